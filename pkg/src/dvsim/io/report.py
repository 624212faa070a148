# SPDX-License-Identifier: BSD-3-Clause
# Copyright (c) 2024 dvsim contributors
"""Machine-readable reports.

Reports are pydantic models written as JSON, or as CSV with one flat row per
report where list-valued fields are joined by ``;``.
"""

from __future__ import annotations

import io
from collections.abc import Sequence

import pandas as pd
from pydantic import BaseModel, ConfigDict, SerializeAsAny, TypeAdapter

from ..metrics import CommPrediction


class Report(BaseModel):
    model_config = ConfigDict(frozen=True)

    def to_json(self) -> str:
        return self.model_dump_json(indent=2)

    def flat_row(self) -> dict[str, object]:
        row: dict[str, object] = {}
        for key, value in self.model_dump().items():
            if isinstance(value, list | tuple):
                row[key] = ';'.join(_flat(v) for v in value)
            else:
                row[key] = value
        return row


def _flat(value: object) -> str:
    if isinstance(value, list | tuple):
        return ':'.join(str(v) for v in value)
    return str(value)


class RunReport(Report):
    """Summary of a timed distributed run."""

    n: int
    p: int
    m: int
    ranks: int
    circuit_kind: str
    seed: int | None
    gate_count: int
    runs: int
    elapsed_mean_s: float
    comm_bytes_measured: int
    comm_bytes_predicted: int
    effective_bandwidth: float
    qbf: float | None = None
    state_norm: float
    state_digest: str


class CommPredictionReport(Report):
    """Predicted communication of a circuit."""

    n: int
    ranks: int
    per_gate: list[tuple[int, int]]
    total_bytes: int

    @classmethod
    def from_prediction(
        cls, prediction: CommPrediction, *, n: int, ranks: int
    ) -> CommPredictionReport:
        return cls(
            n=n,
            ranks=ranks,
            per_gate=list(prediction.per_gate),
            total_bytes=prediction.total_bytes,
        )


class VerificationSummary(Report):
    """Comparison of a distributed run with the single-rank reference."""

    n: int
    ranks: int
    max_abs_diff: float
    norm_error: float
    tolerance: float
    passed: bool
    diverging_op: int | None = None
    digest: str
    reference_digest: str


class QbfReport(Report):
    """Quantum B/F ratio and effective bandwidth of a measurement."""

    n: int
    gates: int
    exetime_s: float
    total_flops: float
    qbf: float
    effective_bandwidth: float


class ScalingRow(Report):
    """One point of a scaling sweep."""

    qubits: int
    ranks: int
    elapsed_mean_s: float
    comm_bytes: int
    comm_bytes_per_rank: int
    effective_bandwidth: float


_REPORT_LIST = TypeAdapter(list[SerializeAsAny[Report]])


def reports_to_csv(reports: Sequence[Report]) -> str:
    """Return reports as CSV text with one row per report."""
    frame = pd.DataFrame([report.flat_row() for report in reports])
    buffer = io.StringIO()
    frame.to_csv(buffer, index=False)
    return buffer.getvalue()


def render(reports: Report | Sequence[Report], fmt: str = 'json') -> str:
    """Render one report or a list of reports as ``json`` or ``csv``."""
    many = not isinstance(reports, Report)
    items = [reports] if isinstance(reports, Report) else list(reports)
    if fmt == 'csv':
        return reports_to_csv(items)
    if fmt != 'json':
        raise ValueError(f"Unknown report format '{fmt}', expected 'json' or 'csv'.")
    if not many:
        return items[0].to_json()
    return _REPORT_LIST.dump_json(items, indent=2).decode()
