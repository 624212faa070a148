# SPDX-License-Identifier: BSD-3-Clause
# Copyright (c) 2024 dvsim contributors
"""Index arithmetic for distributing a state vector over ranks.

A state of ``n`` qubits is split over ``2**p`` ranks, each holding ``2**m``
amplitudes with ``m = n - p``.
Qubit ``q`` is bit ``q`` of the global amplitude index, so physical positions
``0 <= q < m`` address amplitudes within a rank (local qubits) and positions
``m <= q < n`` select the rank (global qubits).
"""

from __future__ import annotations

import enum
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field


class QubitKind(enum.Enum):
    """Classification of a physical qubit position."""

    local = enum.auto()
    global_ = enum.auto()


@dataclass(frozen=True)
class GlobalLayout:
    """Partition of an ``n``-qubit state over ``2**p`` ranks.

    The layout also tracks which physical position holds each logical qubit.
    Instances are immutable; the transpiler derives new layouts with
    :meth:`with_swapped_positions`.

    Parameters
    ----------
    n:
        Total number of qubits.
    p:
        Base-2 logarithm of the number of ranks.
    perm:
        Physical position of each logical qubit.
        Defaults to the identity.
    """

    n: int
    p: int
    perm: tuple[int, ...] = field(default=())
    _inverse: tuple[int, ...] = field(default=(), init=False, repr=False)

    def __post_init__(self) -> None:
        if self.p < 0:
            raise ValueError(f"Number of global qubits must be >= 0, got p={self.p}.")
        if self.n - self.p < 1:
            raise ValueError(
                f"Each rank needs at least one local qubit, got n={self.n}, "
                f"p={self.p}."
            )
        perm = tuple(self.perm) if self.perm else tuple(range(self.n))
        if sorted(perm) != list(range(self.n)):
            raise ValueError(f"Not a permutation of {self.n} qubits: {perm}")
        inverse = [0] * self.n
        for logical, physical in enumerate(perm):
            inverse[physical] = logical
        object.__setattr__(self, 'perm', perm)
        object.__setattr__(self, '_inverse', tuple(inverse))

    @classmethod
    def from_ranks(cls, n: int, ranks: int) -> GlobalLayout:
        """Construct an identity layout for a number of ranks.

        Raises
        ------
        ValueError
            If ``ranks`` is not a power of two.
        """
        if ranks < 1 or ranks & (ranks - 1):
            raise ValueError(f"Number of ranks must be a power of two, got {ranks}.")
        return cls(n=n, p=ranks.bit_length() - 1)

    @property
    def m(self) -> int:
        """Number of local qubits."""
        return self.n - self.p

    @property
    def ranks(self) -> int:
        """Number of ranks."""
        return 1 << self.p

    @property
    def local_length(self) -> int:
        """Number of amplitudes held by each rank."""
        return 1 << self.m

    @property
    def is_identity(self) -> bool:
        return self.perm == tuple(range(self.n))

    def _check_position(self, q: int) -> None:
        if not 0 <= q < self.n:
            raise ValueError(f"Qubit {q} out of range for {self.n} qubits.")

    def check_rank(self, rank: int) -> None:
        if not 0 <= rank < self.ranks:
            raise ValueError(f"Rank {rank} out of range for {self.ranks} ranks.")

    def classify(self, physical_q: int) -> QubitKind:
        """Return whether a physical position is local or global."""
        self._check_position(physical_q)
        return QubitKind.local if physical_q < self.m else QubitKind.global_

    def is_local(self, physical_q: int) -> bool:
        return self.classify(physical_q) is QubitKind.local

    def partner_rank(self, rank: int, physical_q: int) -> int:
        """Return the rank holding the amplitudes paired with ``rank`` on a global
        qubit.

        Parameters
        ----------
        rank:
            Rank id.
        physical_q:
            Global physical position.

        Returns
        -------
        :
            ``rank ^ 2**(physical_q - m)``.
        """
        self.check_rank(rank)
        if self.is_local(physical_q):
            raise ValueError(
                f"Qubit {physical_q} is local (m={self.m}) and has no partner rank."
            )
        return rank ^ (1 << (physical_q - self.m))

    def rank_bit(self, rank: int, physical_q: int) -> int:
        """Return the bit of ``rank`` selected by a global position."""
        return (rank >> (physical_q - self.m)) & 1

    def resolve(self, logical_q: int) -> int:
        """Return the physical position of a logical qubit."""
        self._check_position(logical_q)
        return self.perm[logical_q]

    def logical_at(self, physical_q: int) -> int:
        """Return the logical qubit held at a physical position."""
        self._check_position(physical_q)
        return self._inverse[physical_q]

    def with_swapped_positions(self, pairs: Iterable[tuple[int, int]]) -> GlobalLayout:
        """Return the layout after exchanging the contents of physical positions.

        All pairs are applied in order and the result is returned as one new
        layout, so the forward and inverse maps are always consistent.
        """
        inverse = list(self._inverse)
        for a, b in pairs:
            self._check_position(a)
            self._check_position(b)
            inverse[a], inverse[b] = inverse[b], inverse[a]
        perm = [0] * self.n
        for physical, logical in enumerate(inverse):
            perm[logical] = physical
        return GlobalLayout(n=self.n, p=self.p, perm=tuple(perm))

    def with_fused_swap(self, p_start: int, q_start: int, s: int) -> GlobalLayout:
        """Return the layout after a fused swap of two position ranges."""
        return self.with_swapped_positions(
            (p_start + i, q_start + i) for i in range(s)
        )

    def identity(self) -> GlobalLayout:
        """Return a layout with the same partition and the identity permutation."""
        return GlobalLayout(n=self.n, p=self.p)

    def map_qubits(self, logical: Sequence[int]) -> tuple[int, ...]:
        return tuple(self.resolve(q) for q in logical)
