# SPDX-License-Identifier: BSD-3-Clause
# Copyright (c) 2024 dvsim contributors
from collections.abc import Callable

import numpy as np
import pytest

from dvsim import state
from dvsim.circuits import Circuit, GateKind, GateOp
from dvsim.layout import GlobalLayout
from dvsim.state import LocalShard


def embed(u: np.ndarray, qubits: tuple[int, ...], n: int) -> np.ndarray:
    """Return the dense ``2**n`` operator applying ``u`` to ``qubits``.

    ``qubits[i]`` has bit weight ``2**i`` in the row and column index of ``u``.
    """
    if len(qubits) == 1:
        (q,) = qubits
        return np.kron(np.kron(np.eye(1 << (n - 1 - q)), u), np.eye(1 << q))
    dim = 1 << n
    mask = sum(1 << q for q in qubits)
    result = np.zeros((dim, dim), dtype=np.complex128)
    for col in range(dim):
        sub_col = sum(((col >> q) & 1) << i for i, q in enumerate(qubits))
        rest = col & ~mask
        for sub_row in range(1 << len(qubits)):
            row = rest | sum(((sub_row >> i) & 1) << q for i, q in enumerate(qubits))
            result[row, col] = u[sub_row, sub_col]
    return result


def op_matrix(op: GateOp, n: int) -> np.ndarray:
    if op.kind.is_single_qubit or op.kind is GateKind.DENSE2:
        return embed(op.unitary(), op.qubits, n)
    if op.kind is GateKind.CNOT:
        control, target = op.qubits
        return embed(state.cnot_matrix(), (target, control), n)
    result = np.eye(1 << n, dtype=np.complex128)
    for a, b in op.swap_pairs():
        result = embed(state.swap_matrix(), (a, b), n) @ result
    return result


def apply_dense(circuit: Circuit, psi: np.ndarray | None = None) -> np.ndarray:
    if psi is None:
        psi = np.zeros(1 << circuit.n, dtype=np.complex128)
        psi[0] = 1.0
    for op in circuit.ops:
        psi = op_matrix(op, circuit.n) @ psi
    return psi


def random_state(rng: np.random.Generator, n: int) -> np.ndarray:
    psi = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    return psi / np.linalg.norm(psi)


def split_state(psi: np.ndarray, layout: GlobalLayout) -> list[LocalShard]:
    length = layout.local_length
    return [
        LocalShard(
            layout=layout,
            rank=rank,
            amps=psi[rank * length : (rank + 1) * length].copy(),
        )
        for rank in range(layout.ranks)
    ]


@pytest.fixture(scope='session')
def dense_operator() -> Callable[..., np.ndarray]:
    """Brute-force Kronecker-product operator of a gate on ``n`` qubits."""
    return embed


@pytest.fixture(scope='session')
def oracle() -> Callable[..., np.ndarray]:
    """Dense matrix-vector simulation of a circuit, by default from ``|0...0>``."""
    return apply_dense


@pytest.fixture(scope='session')
def make_state() -> Callable[..., np.ndarray]:
    return random_state


@pytest.fixture(scope='session')
def split() -> Callable[..., list[LocalShard]]:
    return split_state


@pytest.fixture(scope='session')
def op_operator() -> Callable[..., np.ndarray]:
    return op_matrix
