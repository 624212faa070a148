# SPDX-License-Identifier: BSD-3-Clause
# Copyright (c) 2024 dvsim contributors
"""Amplitude shards and local gate kernels.

Kernels work on strided views of the shard obtained by reshaping the amplitude
array so that the bits addressed by a gate become separate axes.
The inner axis is always the contiguous run of ``2**q`` amplitudes below the
lowest target bit, so numpy processes it with wide vector loops.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

from .layout import GlobalLayout

Amplitudes = npt.NDArray[np.complex128]
"""1-D array of double precision complex amplitudes (16 bytes each)."""

Matrix2 = npt.NDArray[np.complex128]
"""Row-major 2x2 complex matrix."""

Matrix4 = npt.NDArray[np.complex128]
"""Row-major 4x4 complex matrix.

Row and column index ``k`` addresses the basis state with ``bit(q1) = k >> 1``
and ``bit(q0) = k & 1``.
"""

AMPLITUDE_BYTES = np.dtype(np.complex128).itemsize


@dataclass
class LocalShard:
    """The amplitudes held by one rank.

    ``amps[j]`` is the amplitude with global index ``(rank << m) | j``.
    """

    layout: GlobalLayout
    rank: int
    amps: Amplitudes

    def __post_init__(self) -> None:
        self.layout.check_rank(self.rank)
        if self.amps.shape != (self.layout.local_length,):
            raise ValueError(
                f"Shard of rank {self.rank} must hold {self.layout.local_length} "
                f"amplitudes, got shape {self.amps.shape}."
            )
        if self.amps.dtype != np.complex128:
            raise ValueError(f"Amplitudes must be complex128, got {self.amps.dtype}.")

    @property
    def m(self) -> int:
        return self.layout.m

    def copy(self) -> LocalShard:
        return LocalShard(layout=self.layout, rank=self.rank, amps=self.amps.copy())


def hadamard() -> Matrix2:
    return np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2)


def pauli_x() -> Matrix2:
    return np.array([[0, 1], [1, 0]], dtype=np.complex128)


def rx(theta: float) -> Matrix2:
    """Return ``cos(theta/2) I - i sin(theta/2) X``."""
    c = np.cos(theta / 2)
    s = np.sin(theta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=np.complex128)


def rz(theta: float) -> Matrix2:
    """Return ``diag(exp(-i theta/2), exp(i theta/2))``."""
    return np.array(
        [[np.exp(-0.5j * theta), 0], [0, np.exp(0.5j * theta)]], dtype=np.complex128
    )


def cnot_matrix() -> Matrix4:
    """CNOT with control ``q1`` and target ``q0`` in the :data:`Matrix4` convention."""
    return np.array(
        [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=np.complex128
    )


def swap_matrix() -> Matrix4:
    return np.array(
        [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=np.complex128
    )


def is_unitary(u: npt.NDArray[np.complex128], *, atol: float = 1e-12) -> bool:
    """Return True if ``u^dagger u`` equals the identity within ``atol``."""
    return bool(np.allclose(u.conj().T @ u, np.eye(u.shape[0]), rtol=0, atol=atol))


def init_zero_state(layout: GlobalLayout, rank: int) -> LocalShard:
    """Return the shard of ``rank`` for the state ``|0...0>``.

    Parameters
    ----------
    layout:
        Partition of the state.
    rank:
        Rank that owns the shard.

    Returns
    -------
    :
        A shard with all amplitudes zero except ``amps[0] = 1`` on rank 0.
    """
    layout.check_rank(rank)
    amps = np.zeros(layout.local_length, dtype=np.complex128)
    if rank == 0:
        amps[0] = 1.0
    return LocalShard(layout=layout, rank=rank, amps=amps)


def norm_squared(shard: LocalShard) -> float:
    """Return the sum of ``|a|^2`` over the amplitudes of one shard."""
    return float(np.vdot(shard.amps, shard.amps).real)


def _check_local(shard: LocalShard, *qubits: int) -> None:
    for q in qubits:
        if not 0 <= q < shard.m:
            raise ValueError(
                f"Qubit {q} is not local to rank {shard.rank} (m={shard.m}); "
                "global qubits must be handled by dvsim.dist_ops."
            )
    if len(set(qubits)) != len(qubits):
        raise ValueError(f"Gate qubits must be distinct, got {qubits}.")


def bit_view(amps: Amplitudes, q: int) -> Amplitudes:
    """Return a view with shape ``(outer, 2, 2**q)`` whose middle axis is bit ``q``."""
    return amps.reshape(-1, 2, 1 << q)


def pair_view(
    amps: Amplitudes, qa: int, qb: int
) -> tuple[Amplitudes, dict[int, int]]:
    """Return a 5-d view separating bits ``qa`` and ``qb``.

    Returns
    -------
    view:
        Array of shape ``(outer, 2, middle, 2, inner)``.
    axes:
        Axis of the view for each of the two qubits.
    """
    hi, lo = max(qa, qb), min(qa, qb)
    view = amps.reshape(-1, 2, 1 << (hi - lo - 1), 2, 1 << lo)
    return view, {hi: 1, lo: 3}


def _select(axes: dict[int, int], bits: dict[int, int]) -> tuple[int | slice, ...]:
    index: list[int | slice] = [slice(None)] * 5
    for q, bit in bits.items():
        index[axes[q]] = bit
    return tuple(index)


def apply_1q_local(shard: LocalShard, u: Matrix2, q: int) -> None:
    """Apply a 1-qubit gate to a local qubit in place.

    Every pair of amplitudes ``(a_j0, a_j1)`` whose indices differ only in
    bit ``q`` is replaced by ``u @ (a_j0, a_j1)``.

    Parameters
    ----------
    shard:
        Amplitudes to update.
    u:
        2x2 matrix.
    q:
        Local qubit, ``0 <= q < m``.
    """
    _check_local(shard, q)
    view = bit_view(shard.amps, q)
    a0 = view[:, 0, :].copy()
    a1 = view[:, 1, :]
    view[:, 0, :] = u[0, 0] * a0 + u[0, 1] * a1
    view[:, 1, :] = u[1, 0] * a0 + u[1, 1] * a1


def apply_2q_local(shard: LocalShard, u: Matrix4, q0: int, q1: int) -> None:
    """Apply a 2-qubit gate to two local qubits in place.

    Parameters
    ----------
    shard:
        Amplitudes to update.
    u:
        4x4 matrix, see :data:`Matrix4` for the index convention.
    q0:
        Qubit with bit weight 1 in the 4-element subvector index.
    q1:
        Qubit with bit weight 2 in the 4-element subvector index.
    """
    _check_local(shard, q0, q1)
    view, axes = pair_view(shard.amps, q0, q1)
    indices = [_select(axes, {q1: k >> 1, q0: k & 1}) for k in range(4)]
    group = np.stack([view[idx] for idx in indices])
    updated = np.tensordot(u, group, axes=1)
    for k, idx in enumerate(indices):
        view[idx] = updated[k]


def apply_cnot_local(shard: LocalShard, control: int, target: int) -> None:
    """Flip ``target`` on all amplitudes whose ``control`` bit is set."""
    _check_local(shard, control, target)
    view, axes = pair_view(shard.amps, control, target)
    off = _select(axes, {control: 1, target: 0})
    on = _select(axes, {control: 1, target: 1})
    flipped = view[off].copy()
    view[off] = view[on]
    view[on] = flipped


def apply_x_local(shard: LocalShard, q: int) -> None:
    """Flip bit ``q`` of every amplitude index."""
    _check_local(shard, q)
    view = bit_view(shard.amps, q)
    view[:, :, :] = view[:, ::-1, :].copy()


def apply_swap_local(shard: LocalShard, i: int, j: int) -> None:
    """Exchange bits ``i`` and ``j`` of every amplitude index."""
    _check_local(shard, i, j)
    view, axes = pair_view(shard.amps, i, j)
    a = _select(axes, {i: 1, j: 0})
    b = _select(axes, {i: 0, j: 1})
    moved = view[a].copy()
    view[a] = view[b]
    view[b] = moved
