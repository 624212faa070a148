# SPDX-License-Identifier: BSD-3-Clause
# Copyright (c) 2024 dvsim contributors
"""Weak and strong scaling sweeps over the number of ranks."""

from __future__ import annotations

from collections.abc import Iterable, Mapping
from typing import Any

import sciline
import scipp as sc

from .io.report import RunReport, ScalingRow
from .types import CircuitKind, NumQubits, NumRanks
from .workflow import DistributedRunWorkflow


def _run(n: int, p: int, params: Mapping[Any, Any]) -> RunReport:
    wf: sciline.Pipeline = DistributedRunWorkflow()
    for key, value in params.items():
        wf[key] = value
    wf[NumQubits] = n
    wf[NumRanks] = 1 << p
    return wf.compute(RunReport)


def _to_data_array(reports: list[RunReport]) -> sc.DataArray:
    def column(values: list[Any], unit: str = 'dimensionless') -> sc.Variable:
        return sc.array(dims=['ranks'], values=values, unit=unit)

    return sc.DataArray(
        column([r.elapsed_mean_s for r in reports], 's'),
        coords={
            'ranks': column([r.ranks for r in reports]),
            'qubits': column([r.n for r in reports]),
            'comm_bytes': column([r.comm_bytes_measured for r in reports]),
            'comm_bytes_per_rank': column(
                [r.comm_bytes_measured // r.ranks for r in reports]
            ),
            'effective_bandwidth': column(
                [r.effective_bandwidth for r in reports], '1/s'
            ),
        },
    )


def weak_scaling(
    kind: str,
    m: int,
    ps: Iterable[int],
    params: Mapping[Any, Any] | None = None,
) -> sc.DataArray:
    """Run a circuit with ``m`` local qubits on ``2**p`` ranks for each ``p``.

    Parameters
    ----------
    kind:
        Circuit kind, see :data:`dvsim.workflow.CIRCUIT_KINDS`.
    m:
        Local qubits per rank. The circuit has ``n = m + p`` qubits.
    ps:
        Base-2 logarithms of the rank counts.
    params:
        Further workflow parameters.

    Returns
    -------
    :
        Mean elapsed time over dim ``ranks`` with the number of qubits, the
        measured communication in bytes (dimensionless) and the effective
        bandwidth in bytes per second as coordinates.
    """
    return _sweep(kind, [(m + p, p) for p in ps], params)


def strong_scaling(
    kind: str,
    n: int,
    ps: Iterable[int],
    params: Mapping[Any, Any] | None = None,
) -> sc.DataArray:
    """Run an ``n``-qubit circuit on ``2**p`` ranks for each ``p``.

    See :func:`weak_scaling` for the parameters and the result.
    """
    return _sweep(kind, [(n, p) for p in ps], params)


def _sweep(
    kind: str, points: list[tuple[int, int]], params: Mapping[Any, Any] | None
) -> sc.DataArray:
    if not points:
        raise ValueError("A scaling sweep needs at least one rank count.")
    settings = dict(params or {})
    settings[CircuitKind] = kind
    reports = [_run(n, p, settings) for n, p in points]
    return _to_data_array(reports)


def scaling_rows(da: sc.DataArray) -> list[ScalingRow]:
    """Return the points of a sweep as report rows."""
    return [
        ScalingRow(
            qubits=int(da.coords['qubits'].values[i]),
            ranks=int(da.coords['ranks'].values[i]),
            elapsed_mean_s=float(da.values[i]),
            comm_bytes=int(da.coords['comm_bytes'].values[i]),
            comm_bytes_per_rank=int(da.coords['comm_bytes_per_rank'].values[i]),
            effective_bandwidth=float(da.coords['effective_bandwidth'].values[i]),
        )
        for i in range(da.sizes['ranks'])
    ]
