# SPDX-License-Identifier: BSD-3-Clause
# Copyright (c) 2024 dvsim contributors
"""Circuit data model and benchmark circuit generators.

Random circuits are generated with numpy's PCG64 bit generator.
A circuit seed is expanded with :class:`numpy.random.SeedSequence` and one
child sequence is spawned per layer, so layer ``k`` of a circuit only depends
on the seed and ``k``.
"""

from __future__ import annotations

import enum
from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from . import state
from .state import Matrix2, Matrix4

HADAMARD_BENCH_ROUNDS = 11
QSB_CNOT_LAYERS = 10


class GateKind(enum.Enum):
    """Kinds of circuit operations."""

    H = 'H'
    RX = 'RX'
    RZ = 'RZ'
    CNOT = 'CNOT'
    DENSE1 = 'DENSE1'
    DENSE2 = 'DENSE2'
    SWAP = 'SWAP'
    FUSED_SWAP = 'FUSED_SWAP'

    @property
    def is_single_qubit(self) -> bool:
        return self in _SINGLE_QUBIT_KINDS

    @property
    def is_swap(self) -> bool:
        return self in (GateKind.SWAP, GateKind.FUSED_SWAP)


_SINGLE_QUBIT_KINDS = frozenset(
    {GateKind.H, GateKind.RX, GateKind.RZ, GateKind.DENSE1}
)


@dataclass(frozen=True, eq=False)
class GateOp:
    """A single circuit operation.

    Use the class methods to construct operations.
    The meaning of ``qubits`` depends on the kind:

    - ``H``, ``RX``, ``RZ``, ``DENSE1``: ``(q,)``
    - ``CNOT``: ``(control, target)``
    - ``DENSE2``: ``(q0, q1)``, see :data:`dvsim.state.Matrix4`
    - ``SWAP``: ``(i, j)``
    - ``FUSED_SWAP``: ``(p, q)``, the starts of the two ranges of ``width`` qubits
    """

    kind: GateKind
    qubits: tuple[int, ...]
    theta: float | None = None
    matrix: np.ndarray | None = field(default=None, repr=False)
    width: int = 1

    @classmethod
    def h(cls, q: int) -> GateOp:
        return cls(GateKind.H, (q,))

    @classmethod
    def rx(cls, q: int, theta: float) -> GateOp:
        return cls(GateKind.RX, (q,), theta=float(theta))

    @classmethod
    def rz(cls, q: int, theta: float) -> GateOp:
        return cls(GateKind.RZ, (q,), theta=float(theta))

    @classmethod
    def cnot(cls, control: int, target: int) -> GateOp:
        return cls(GateKind.CNOT, (control, target))

    @classmethod
    def dense1(cls, q: int, u: Matrix2) -> GateOp:
        return cls(GateKind.DENSE1, (q,), matrix=_frozen_matrix(u, 2))

    @classmethod
    def dense2(cls, q0: int, q1: int, u: Matrix4) -> GateOp:
        return cls(GateKind.DENSE2, (q0, q1), matrix=_frozen_matrix(u, 4))

    @classmethod
    def swap(cls, i: int, j: int) -> GateOp:
        return cls(GateKind.SWAP, (i, j))

    @classmethod
    def fused_swap(cls, p: int, q: int, s: int) -> GateOp:
        return cls(GateKind.FUSED_SWAP, (p, q), width=s)

    @property
    def touched(self) -> frozenset[int]:
        """All qubits the operation acts on."""
        if self.kind is GateKind.FUSED_SWAP:
            p, q = self.qubits
            return frozenset(range(p, p + self.width)) | frozenset(
                range(q, q + self.width)
            )
        return frozenset(self.qubits)

    def swap_pairs(self) -> list[tuple[int, int]]:
        """Return the qubit pairs exchanged by a swap operation."""
        if self.kind is GateKind.SWAP:
            return [(self.qubits[0], self.qubits[1])]
        if self.kind is GateKind.FUSED_SWAP:
            p, q = self.qubits
            return [(p + i, q + i) for i in range(self.width)]
        raise ValueError(f"{self.kind.value} is not a swap operation.")

    def unitary(self) -> Matrix2 | Matrix4:
        """Return the matrix of a single-qubit gate or of a ``DENSE2`` gate."""
        if self.kind is GateKind.H:
            return state.hadamard()
        if self.kind is GateKind.RX:
            return state.rx(self.theta)  # type: ignore[arg-type]
        if self.kind is GateKind.RZ:
            return state.rz(self.theta)  # type: ignore[arg-type]
        if self.kind in (GateKind.DENSE1, GateKind.DENSE2):
            return self.matrix  # type: ignore[return-value]
        if self.kind is GateKind.CNOT:
            return state.cnot_matrix()
        raise ValueError(f"{self.kind.value} has no gate matrix.")

    def with_qubits(self, qubits: Sequence[int]) -> GateOp:
        """Return the same operation acting on other qubits."""
        return GateOp(
            self.kind,
            tuple(int(q) for q in qubits),
            theta=self.theta,
            matrix=self.matrix,
            width=self.width,
        )

    def validate(self, n: int) -> None:
        """Raise ValueError if the operation is not valid for ``n`` qubits."""
        expected = 1 if self.kind.is_single_qubit else 2
        if len(self.qubits) != expected:
            raise ValueError(
                f"{self.kind.value} takes {expected} qubit operands, "
                f"got {self.qubits}."
            )
        if self.kind in (GateKind.RX, GateKind.RZ) and self.theta is None:
            raise ValueError(f"{self.kind.value} requires an angle.")
        if self.kind is GateKind.FUSED_SWAP:
            p, q = self.qubits
            s = self.width
            if s < 1:
                raise ValueError(f"FUSED_SWAP width must be >= 1, got {s}.")
            for start in (p, q):
                if start < 0 or start + s > n:
                    raise ValueError(
                        f"FUSED_SWAP range [{start}, {start + s}) out of range for "
                        f"{n} qubits."
                    )
            if p < q + s and q < p + s:
                raise ValueError(
                    f"FUSED_SWAP ranges [{p}, {p + s}) and [{q}, {q + s}) overlap."
                )
            return
        for q in self.qubits:
            if not 0 <= q < n:
                raise ValueError(
                    f"{self.kind.value} operand {q} out of range for {n} qubits."
                )
        if len(set(self.qubits)) != len(self.qubits):
            raise ValueError(
                f"{self.kind.value} operands must be distinct, got {self.qubits}."
            )

    def _key(self) -> tuple[object, ...]:
        matrix = None if self.matrix is None else self.matrix.tobytes()
        return (self.kind, self.qubits, self.theta, matrix, self.width)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GateOp):
            return NotImplemented
        return self._key() == other._key()

    def __hash__(self) -> int:
        return hash(self._key())


def _frozen_matrix(u: np.ndarray, dim: int) -> np.ndarray:
    matrix = np.array(u, dtype=np.complex128)
    if matrix.shape != (dim, dim):
        raise ValueError(f"Expected a {dim}x{dim} matrix, got shape {matrix.shape}.")
    matrix.setflags(write=False)
    return matrix


@dataclass(frozen=True)
class Circuit:
    """Ordered sequence of operations on ``n`` qubits.

    Parameters
    ----------
    n:
        Number of qubits.
    ops:
        Operations in application order.
    seed:
        Seed the circuit was generated from, if any.
    """

    n: int
    ops: tuple[GateOp, ...] = ()
    seed: int | None = None

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f"A circuit needs at least one qubit, got n={self.n}.")
        ops = tuple(self.ops)
        for index, op in enumerate(ops):
            try:
                op.validate(self.n)
            except ValueError as err:
                raise ValueError(f"Invalid op {index}: {err}") from None
        object.__setattr__(self, 'ops', ops)

    def __len__(self) -> int:
        return len(self.ops)

    def __iter__(self) -> Iterator[GateOp]:
        return iter(self.ops)

    @property
    def gate_count(self) -> int:
        """Number of operations that are not swaps."""
        return sum(1 for op in self.ops if not op.kind.is_swap)

    def count(self, kind: GateKind) -> int:
        return sum(1 for op in self.ops if op.kind is kind)


def _layer_rngs(seed: int | None, layers: int) -> tuple[int, list[np.random.Generator]]:
    sequence = np.random.SeedSequence(seed)
    rngs = [np.random.Generator(np.random.PCG64(s)) for s in sequence.spawn(layers)]
    return int(sequence.entropy), rngs  # type: ignore[arg-type]


def _haar_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / (
        np.sqrt(2)
    )
    q, r = scipy.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def haar_random_2q(rng: np.random.Generator) -> Matrix4:
    """Draw a Haar-random 4x4 unitary.

    The QR decomposition of a complex Gaussian matrix is made unique by fixing
    the phases of the diagonal of ``R``.

    Parameters
    ----------
    rng:
        Source of randomness.
    """
    return _haar_unitary(rng, 4)


def gen_hadamard_bench(n: int) -> Circuit:
    """Return 11 rounds of Hadamard gates on every qubit."""
    if n < 1:
        raise ValueError(f"Hadamard benchmark needs n >= 1, got {n}.")
    ops = [GateOp.h(q) for _ in range(HADAMARD_BENCH_ROUNDS) for q in range(n)]
    return Circuit(n=n, ops=tuple(ops))


def gen_qv(n: int, depth: int = 10, seed: int | None = None) -> Circuit:
    """Return a Quantum Volume model circuit.

    Each layer permutes the qubit labels at random and applies a Haar-random
    two-qubit gate to consecutive pairs of the permuted labels.
    If ``n`` is odd the last permuted label idles.

    Parameters
    ----------
    n:
        Number of qubits, at least 2.
    depth:
        Number of layers.
    seed:
        Seed of the circuit. If None, fresh entropy is drawn and recorded in the
        returned circuit.
    """
    if n < 2:
        raise ValueError(f"Quantum Volume circuit needs n >= 2, got {n}.")
    if depth < 1:
        raise ValueError(f"Depth must be >= 1, got {depth}.")
    entropy, rngs = _layer_rngs(seed, depth)
    ops = []
    for rng in rngs:
        perm = rng.permutation(n)
        for k in range(n // 2):
            u = haar_random_2q(rng)
            ops.append(GateOp.dense2(int(perm[2 * k]), int(perm[2 * k + 1]), u))
    return Circuit(n=n, ops=tuple(ops), seed=entropy)


def _rotation_layer(n: int, rng: np.random.Generator) -> Iterable[GateOp]:
    angles = rng.uniform(0.0, 2 * np.pi, size=(n, 3))
    for q in range(n):
        yield GateOp.rz(q, angles[q, 0])
        yield GateOp.rx(q, angles[q, 1])
        yield GateOp.rz(q, angles[q, 2])


def gen_qsb(n: int, seed: int | None = None) -> Circuit:
    """Return a Quantum Software Benchmark circuit.

    Ten pairs of a rotation layer and a CNOT layer are followed by a final
    rotation layer.
    A rotation layer applies RZ, RX and RZ with uniform random angles to each
    qubit; the CNOT layer applies ``CNOT(control=(i + 1) % n, target=i)`` for
    every ``i``.
    """
    if n < 2:
        raise ValueError(f"QSB circuit needs n >= 2, got {n}.")
    entropy, rngs = _layer_rngs(seed, QSB_CNOT_LAYERS + 1)
    ops: list[GateOp] = []
    for layer, rng in enumerate(rngs):
        ops.extend(_rotation_layer(n, rng))
        if layer < QSB_CNOT_LAYERS:
            ops.extend(GateOp.cnot((i + 1) % n, i) for i in range(n))
    return Circuit(n=n, ops=tuple(ops), seed=entropy)


def gen_single_gate(n: int, target: int, repeats: int = 1) -> Circuit:
    """Return ``repeats`` Hadamard gates on a single target qubit."""
    if n < 1:
        raise ValueError(f"Circuit needs n >= 1, got {n}.")
    if not 0 <= target < n:
        raise ValueError(f"Target qubit {target} out of range for {n} qubits.")
    if repeats < 1:
        raise ValueError(f"Repeats must be >= 1, got {repeats}.")
    return Circuit(n=n, ops=tuple(GateOp.h(target) for _ in range(repeats)))


def gen_random_circuit(n: int, gates: int, seed: int | None = None) -> Circuit:
    """Return a random mix of named, controlled and dense gates.

    Used for randomized equivalence tests; two-qubit gates need ``n >= 2``.
    """
    if n < 1:
        raise ValueError(f"Circuit needs n >= 1, got {n}.")
    entropy, (rng,) = _layer_rngs(seed, 1)
    kinds = [GateKind.H, GateKind.RX, GateKind.RZ, GateKind.DENSE1]
    if n >= 2:
        kinds += [GateKind.CNOT, GateKind.DENSE2]
    ops = []
    for _ in range(gates):
        kind = kinds[int(rng.integers(len(kinds)))]
        q0, q1 = (int(q) for q in rng.choice(n, size=2, replace=n < 2))
        if kind is GateKind.H:
            ops.append(GateOp.h(q0))
        elif kind is GateKind.RX:
            ops.append(GateOp.rx(q0, rng.uniform(0.0, 2 * np.pi)))
        elif kind is GateKind.RZ:
            ops.append(GateOp.rz(q0, rng.uniform(0.0, 2 * np.pi)))
        elif kind is GateKind.DENSE1:
            ops.append(GateOp.dense1(q0, _haar_unitary(rng, 2)))
        elif kind is GateKind.CNOT:
            ops.append(GateOp.cnot(q0, q1))
        else:
            ops.append(GateOp.dense2(q0, q1, haar_random_2q(rng)))
    return Circuit(n=n, ops=tuple(ops), seed=entropy)


@dataclass(frozen=True)
class ExampleCircuits:
    """A four-qubit circuit encoded with plain gates, swaps and fused swaps."""

    original: Circuit
    swapped: Circuit
    fused: Circuit


def example_4q_circuits(theta: float = np.pi / 4) -> ExampleCircuits:
    """Return the four-qubit swap demonstration circuits.

    The circuit applies H and RX to each qubit.
    With two global qubits, the three encodings communicate 1024, 512 and 384
    bytes.
    """

    def layer(qubits: Iterable[int]) -> list[GateOp]:
        return [g for q in qubits for g in (GateOp.h(q), GateOp.rx(q, theta))]

    swaps = [GateOp.swap(0, 2), GateOp.swap(1, 3)]
    fused = [GateOp.fused_swap(0, 2, 2)]
    return ExampleCircuits(
        original=Circuit(n=4, ops=tuple(layer(range(4)))),
        swapped=Circuit(n=4, ops=tuple(layer((0, 1)) + swaps + layer((0, 1)) + swaps)),
        fused=Circuit(n=4, ops=tuple(layer((0, 1)) + fused + layer((0, 1)) + fused)),
    )
