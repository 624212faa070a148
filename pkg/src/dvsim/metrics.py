# SPDX-License-Identifier: BSD-3-Clause
# Copyright (c) 2024 dvsim contributors
"""Communication volume prediction and efficiency metrics.

A full state of ``n`` qubits occupies ``2**(n + 4)`` bytes.
A global single-qubit gate exchanges the whole state once, a swap with a global
qubit half of it, and a local/global fused swap of width ``s`` all but the
``2**-s`` fraction each rank keeps.
"""

from __future__ import annotations

from dataclasses import dataclass

from .circuits import Circuit, GateKind, GateOp
from .layout import GlobalLayout

FLOPS_PRESETS: dict[str, float] = {
    'a64fx': 3.1e12,
    'a100': 19.5e12,
    'v100': 7.0e12,
    'xeon-8174': 2.0e12,
}
"""Theoretical double-precision peak FLOP/s per device."""


def state_bytes(n: int) -> int:
    """Return the size of an ``n``-qubit state vector in bytes."""
    return 1 << (n + 4)


@dataclass(frozen=True)
class CommPrediction:
    """Predicted payload bytes of each communicating operation."""

    per_gate: tuple[tuple[int, int], ...]
    total_bytes: int

    @classmethod
    def from_per_gate(cls, per_gate: list[tuple[int, int]]) -> CommPrediction:
        return cls(
            per_gate=tuple(per_gate), total_bytes=sum(b for _, b in per_gate)
        )


def _swap_bytes(layout: GlobalLayout, i: int, j: int) -> int:
    if layout.is_local(i) and layout.is_local(j):
        return 0
    return state_bytes(layout.n) // 2


def op_comm_bytes(op: GateOp, layout: GlobalLayout, index: int = 0) -> int:
    """Return the payload bytes all ranks together send for one physical op.

    Raises
    ------
    ValueError
        If the op cannot be executed under ``layout``.
    """
    full = state_bytes(layout.n)
    kind = op.kind
    if kind.is_single_qubit:
        return 0 if layout.is_local(op.qubits[0]) else full
    if kind is GateKind.CNOT:
        return 0 if layout.is_local(op.qubits[1]) else full
    if kind is GateKind.DENSE2:
        if not all(layout.is_local(q) for q in op.qubits):
            raise ValueError(
                f"Op {index} (DENSE2 on {op.qubits}) touches a global qubit "
                f"(m={layout.m}) and is not executable."
            )
        return 0
    if kind is GateKind.SWAP:
        return _swap_bytes(layout, *op.qubits)
    p_start, q_start = op.qubits
    s = op.width
    local_ranges = [start + s <= layout.m for start in (p_start, q_start)]
    global_ranges = [start >= layout.m for start in (p_start, q_start)]
    if any(local_ranges) and any(global_ranges):
        return full - (full >> s)
    return sum(_swap_bytes(layout, a, b) for a, b in op.swap_pairs())


def predict_comm_bytes(circuit: Circuit, layout: GlobalLayout) -> CommPrediction:
    """Predict the communication of a physical circuit.

    Parameters
    ----------
    circuit:
        Circuit on physical positions.
    layout:
        Partition of the state over ranks.

    Returns
    -------
    :
        Bytes of every communicating op and their sum.
    """
    if circuit.n != layout.n:
        raise ValueError(
            f"Circuit has {circuit.n} qubits but the layout has {layout.n}."
        )
    per_gate = []
    for index, op in enumerate(circuit.ops):
        nbytes = op_comm_bytes(op, layout, index)
        if nbytes:
            per_gate.append((index, nbytes))
    return CommPrediction.from_per_gate(per_gate)


def memory_traffic(n: int, gates: int) -> float:
    """Return ``2**(n + 5) * gates``, the bytes read and written by the gates."""
    if n < 1 or gates < 1:
        raise ValueError(f"Need n >= 1 and gates >= 1, got n={n}, gates={gates}.")
    return 2.0 ** (n + 5) * gates


@dataclass(frozen=True)
class QbfInput:
    """Inputs of the quantum B/F ratio.

    Parameters
    ----------
    n:
        Number of qubits.
    gates:
        Number of gates executed.
    exetime:
        Execution time in seconds.
    total_flops:
        Theoretical peak FLOP/s of all devices together.
    """

    n: int
    gates: int
    exetime: float
    total_flops: float

    def __post_init__(self) -> None:
        for name in ('n', 'gates', 'exetime', 'total_flops'):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}.")


def qbf(qbf_input: QbfInput) -> float:
    """Return the quantum B/F ratio ``2**(n + 5) * gates / (exetime * total_flops)``."""
    traffic = memory_traffic(qbf_input.n, qbf_input.gates)
    return traffic / (qbf_input.exetime * qbf_input.total_flops)


def effective_bandwidth(n: int, gates: int, exetime: float) -> float:
    """Return the effective memory bandwidth ``2**(n + 5) * gates / exetime`` in B/s."""
    if not exetime > 0:
        raise ValueError(f"exetime must be positive, got {exetime}.")
    return memory_traffic(n, gates) / exetime


def resolve_flops(value: str | float, devices: int = 1) -> float:
    """Return total peak FLOP/s from a number or a preset name.

    Parameters
    ----------
    value:
        FLOP/s per device, or one of the names in :data:`FLOPS_PRESETS`.
    devices:
        Number of devices.
    """
    if devices < 1:
        raise ValueError(f"Number of devices must be >= 1, got {devices}.")
    if isinstance(value, str):
        key = value.strip().lower()
        if key in FLOPS_PRESETS:
            per_device = FLOPS_PRESETS[key]
        else:
            try:
                per_device = float(key)
            except ValueError:
                raise ValueError(
                    f"Unknown FLOPS preset '{value}', expected a number or one of "
                    f"{sorted(FLOPS_PRESETS)}."
                ) from None
    else:
        per_device = float(value)
    if not per_device > 0:
        raise ValueError(f"FLOPS must be positive, got {per_device}.")
    return per_device * devices
