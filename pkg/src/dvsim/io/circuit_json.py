# SPDX-License-Identifier: BSD-3-Clause
# Copyright (c) 2024 dvsim contributors
"""Circuit JSON format.

.. code-block:: json

    {"n": 2, "seed": null, "ops": [{"kind": "H", "q": 0},
                                   {"kind": "CNOT", "control": 0, "target": 1}]}

Angles are in radians.
Matrices are row-major lists of ``[re, im]`` pairs, 4 entries for ``DENSE1``
and 16 for ``DENSE2``.
"""

from __future__ import annotations

from pathlib import Path
from typing import Annotated, Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from ..circuits import Circuit, GateKind, GateOp

ComplexEntry = tuple[float, float]


class _Record(BaseModel):
    model_config = ConfigDict(extra='forbid', frozen=True)


class HRecord(_Record):
    kind: Literal['H']
    q: int


class RXRecord(_Record):
    kind: Literal['RX']
    q: int
    theta: float


class RZRecord(_Record):
    kind: Literal['RZ']
    q: int
    theta: float


class CNOTRecord(_Record):
    kind: Literal['CNOT']
    control: int
    target: int


class Dense1Record(_Record):
    kind: Literal['DENSE1']
    q: int
    u: list[ComplexEntry] = Field(min_length=4, max_length=4)


class Dense2Record(_Record):
    kind: Literal['DENSE2']
    q0: int
    q1: int
    u: list[ComplexEntry] = Field(min_length=16, max_length=16)


class SwapRecord(_Record):
    kind: Literal['SWAP']
    i: int
    j: int


class FusedSwapRecord(_Record):
    kind: Literal['FUSED_SWAP']
    p: int
    q: int
    s: int


OpRecord = Annotated[
    HRecord
    | RXRecord
    | RZRecord
    | CNOTRecord
    | Dense1Record
    | Dense2Record
    | SwapRecord
    | FusedSwapRecord,
    Field(discriminator='kind'),
]


class CircuitRecord(_Record):
    n: int
    seed: int | None = None
    ops: list[OpRecord] = Field(default_factory=list)


def _matrix(entries: list[ComplexEntry], dim: int) -> np.ndarray:
    values = np.array([complex(re, im) for re, im in entries], dtype=np.complex128)
    return values.reshape(dim, dim)


def _entries(matrix: np.ndarray) -> list[ComplexEntry]:
    return [(float(z.real), float(z.imag)) for z in matrix.ravel()]


def _to_op(record: OpRecord) -> GateOp:
    if isinstance(record, HRecord):
        return GateOp.h(record.q)
    if isinstance(record, RXRecord):
        return GateOp.rx(record.q, record.theta)
    if isinstance(record, RZRecord):
        return GateOp.rz(record.q, record.theta)
    if isinstance(record, CNOTRecord):
        return GateOp.cnot(record.control, record.target)
    if isinstance(record, Dense1Record):
        return GateOp.dense1(record.q, _matrix(record.u, 2))
    if isinstance(record, Dense2Record):
        return GateOp.dense2(record.q0, record.q1, _matrix(record.u, 4))
    if isinstance(record, SwapRecord):
        return GateOp.swap(record.i, record.j)
    return GateOp.fused_swap(record.p, record.q, record.s)


def _to_record(op: GateOp) -> OpRecord:
    match op.kind:
        case GateKind.H:
            return HRecord(kind='H', q=op.qubits[0])
        case GateKind.RX:
            return RXRecord(kind='RX', q=op.qubits[0], theta=op.theta)
        case GateKind.RZ:
            return RZRecord(kind='RZ', q=op.qubits[0], theta=op.theta)
        case GateKind.CNOT:
            return CNOTRecord(kind='CNOT', control=op.qubits[0], target=op.qubits[1])
        case GateKind.DENSE1:
            return Dense1Record(kind='DENSE1', q=op.qubits[0], u=_entries(op.matrix))
        case GateKind.DENSE2:
            q0, q1 = op.qubits
            return Dense2Record(kind='DENSE2', q0=q0, q1=q1, u=_entries(op.matrix))
        case GateKind.SWAP:
            return SwapRecord(kind='SWAP', i=op.qubits[0], j=op.qubits[1])
        case _:
            p, q = op.qubits
            return FusedSwapRecord(kind='FUSED_SWAP', p=p, q=q, s=op.width)


def circuit_from_json(text: str) -> Circuit:
    """Parse a circuit from JSON text.

    Raises
    ------
    ValueError
        If the text does not follow the schema or an op is invalid for ``n``.
        :class:`pydantic.ValidationError` is a subclass of ValueError.
    """
    record = CircuitRecord.model_validate_json(text)
    return Circuit(
        n=record.n, ops=tuple(_to_op(op) for op in record.ops), seed=record.seed
    )


def circuit_to_json(circuit: Circuit) -> str:
    record = CircuitRecord(
        n=circuit.n,
        seed=circuit.seed,
        ops=[_to_record(op) for op in circuit.ops],
    )
    return record.model_dump_json(indent=1)


def load_circuit(path: str | Path) -> Circuit:
    """Read a circuit JSON file.

    Raises
    ------
    ValueError
        If the file cannot be read or does not hold a valid circuit.
    """
    try:
        text = Path(path).read_text()
    except OSError as err:
        raise ValueError(f"Cannot read circuit file {path}: {err.strerror}.") from err
    return circuit_from_json(text)


def save_circuit(circuit: Circuit, path: str | Path) -> None:
    """Write a circuit JSON file."""
    Path(path).write_text(circuit_to_json(circuit))


def circuit_schema() -> dict[str, object]:
    """Return the JSON schema of the circuit format."""
    return CircuitRecord.model_json_schema()
