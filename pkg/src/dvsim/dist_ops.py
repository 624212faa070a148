# SPDX-License-Identifier: BSD-3-Clause
# Copyright (c) 2024 dvsim contributors
"""Distributed gate execution.

Every distributed operation is written as a rank program: a generator that
mutates one rank's shard and yields a :class:`~dvsim.transport.PendingExchange`
whenever it has to wait for its partner.
A driver in :mod:`dvsim.cluster` resumes the generator once the exchange has
completed, either from one thread per rank or from a single thread stepping
all ranks in turn.
"""

from __future__ import annotations

import logging
import time
from collections.abc import Callable, Generator, Iterator
from dataclasses import dataclass, field

import numpy as np
import numpy.typing as npt

from .circuits import Circuit, GateKind, GateOp
from .layout import GlobalLayout
from .logging import get_logger
from .state import (
    Amplitudes,
    LocalShard,
    Matrix2,
    apply_1q_local,
    apply_2q_local,
    apply_cnot_local,
    apply_swap_local,
    apply_x_local,
)
from .transport import ExchangeTag, PendingExchange, Transport

RankProgram = Generator[PendingExchange, None, None]
"""Generator yielding the exchanges a rank waits for."""

DEFAULT_MAX_CHUNKS = 16

IndexArray = npt.NDArray[np.intp]


def _is_power_of_two(x: int) -> bool:
    return x >= 1 and not x & (x - 1)


@dataclass(frozen=True)
class ChunkPlan:
    """Split of a shard into ``c`` equal chunks for global gate exchanges."""

    c: int
    chunk_len: int

    def __post_init__(self) -> None:
        if not _is_power_of_two(self.c):
            raise ValueError(f"Chunk count must be a power of two, got {self.c}.")
        if not _is_power_of_two(self.chunk_len):
            raise ValueError(
                f"Chunk length must be a power of two, got {self.chunk_len}."
            )

    @classmethod
    def for_layout(cls, layout: GlobalLayout, c: int | None = None) -> ChunkPlan:
        """Return a plan for a layout.

        Parameters
        ----------
        layout:
            Partition of the state.
        c:
            Number of chunks. Defaults to ``min(16, 2**m)``.
        """
        length = layout.local_length
        if c is None:
            c = min(DEFAULT_MAX_CHUNKS, length)
        if not _is_power_of_two(c) or c > length:
            raise ValueError(
                f"Chunk count must be a power of two between 1 and {length}, got {c}."
            )
        return cls(c=c, chunk_len=length // c)

    @property
    def local_length(self) -> int:
        return self.c * self.chunk_len

    def check(self, shard: LocalShard) -> None:
        if self.local_length != len(shard.amps):
            raise ValueError(
                f"Chunk plan covers {self.local_length} amplitudes but the shard "
                f"holds {len(shard.amps)}."
            )

    def slices(self) -> Iterator[slice]:
        for k in range(self.c):
            yield slice(k * self.chunk_len, (k + 1) * self.chunk_len)


@dataclass
class BufferPair:
    send: Amplitudes
    recv: Amplitudes


@dataclass
class SwapBufferPair:
    """Two send/receive buffer pairs used alternately by the fused-swap pipeline.

    Transfer ``j`` uses pair ``j % 2``.
    """

    pairs: tuple[BufferPair, BufferPair]

    @classmethod
    def allocate(cls, block_len: int) -> SwapBufferPair:
        def pair() -> BufferPair:
            return BufferPair(
                send=np.empty(block_len, dtype=np.complex128),
                recv=np.empty(block_len, dtype=np.complex128),
            )

        return cls(pairs=(pair(), pair()))

    @property
    def block_len(self) -> int:
        return len(self.pairs[0].send)

    def __getitem__(self, j: int) -> BufferPair:
        return self.pairs[j % 2]


@dataclass(frozen=True)
class StageInterval:
    """One stage of the fused-swap pipeline.

    Ticks come from a per-rank logical clock that advances at every stage
    boundary, so containment of intervals does not depend on timing noise.
    """

    stage: str
    block: int
    start_tick: int
    end_tick: int
    start_s: float
    end_s: float

    def contains(self, other: StageInterval) -> bool:
        return self.start_tick < other.start_tick and other.end_tick < self.end_tick


@dataclass
class ScheduleTrace:
    """Record of the pipeline stages executed by one rank."""

    intervals: list[StageInterval] = field(default_factory=list)
    _tick: int = 0

    def _next_tick(self) -> int:
        self._tick += 1
        return self._tick

    def begin(self) -> tuple[int, float]:
        return self._next_tick(), time.perf_counter()

    def end(self, stage: str, block: int, start: tuple[int, float]) -> None:
        tick, wall = start
        self.intervals.append(
            StageInterval(
                stage=stage,
                block=block,
                start_tick=tick,
                end_tick=self._next_tick(),
                start_s=wall,
                end_s=time.perf_counter(),
            )
        )

    def stages(self, stage: str) -> list[StageInterval]:
        return [i for i in self.intervals if i.stage == stage]

    def overlapping_exchanges(self) -> int:
        """Number of exchanges that enclose a gather or scatter stage."""
        local_work = [i for i in self.intervals if i.stage in ('gather', 'scatter')]
        return sum(
            1
            for exchange in self.stages('exchange')
            if any(exchange.contains(work) for work in local_work)
        )


@dataclass(frozen=True)
class ExecutionContext:
    """Settings shared by all operations of a run.

    Parameters
    ----------
    plan:
        Chunking of global single-qubit gates and distributed swaps.
    block_len:
        Amplitudes per fused-swap transfer block.
        Defaults to the full ``2**(m - s)`` amplitudes sent to each partner.
    pipelined:
        Use the double-buffered fused-swap path.
    trace:
        Receives the fused-swap stage intervals of the rank, if given.
    """

    plan: ChunkPlan
    block_len: int | None = None
    pipelined: bool = True
    trace: ScheduleTrace | None = None


def _idle() -> RankProgram:
    yield from ()


def _chunked_exchange(
    shard: LocalShard,
    partner: int,
    plan: ChunkPlan,
    transport: Transport,
    gate_seq: int,
    update: Callable[[Amplitudes, Amplitudes, int], None],
) -> RankProgram:
    low = min(shard.rank, partner)
    recv = np.empty(plan.chunk_len, dtype=np.complex128)
    for k, chunk in enumerate(plan.slices()):
        local = shard.amps[chunk]
        yield transport.post(
            shard.rank, partner, ExchangeTag(gate_seq, k, low), local, recv
        )
        update(local, recv, chunk.start)


def _check_global(layout: GlobalLayout, physical_q: int, what: str) -> None:
    if layout.is_local(physical_q):
        raise ValueError(
            f"{what} qubit {physical_q} is local (m={layout.m}); "
            "use the local kernels in dvsim.state."
        )


def apply_1q_global(
    shard: LocalShard,
    u: Matrix2,
    physical_q: int,
    plan: ChunkPlan,
    transport: Transport,
    *,
    gate_seq: int = 0,
) -> RankProgram:
    """Apply a single-qubit gate to a global qubit.

    The shard is exchanged with the partner rank chunk by chunk.
    After chunk ``k`` has arrived, the rank whose bit ``q - m`` is 0 computes
    ``u00 * local + u01 * remote`` and its partner computes
    ``u10 * remote + u11 * local``.

    Parameters
    ----------
    shard:
        Amplitudes of this rank, updated in place.
    u:
        2x2 gate matrix.
    physical_q:
        Global physical position.
    plan:
        Chunking of the exchange.
    transport:
        Transport shared by all ranks.
    gate_seq:
        Index of the operation in the circuit, used to tag exchanges.

    Returns
    -------
    :
        Rank program to be driven by :func:`dvsim.cluster.drive`.
    """
    layout = shard.layout
    _check_global(layout, physical_q, 'Target')
    plan.check(shard)
    partner = layout.partner_rank(shard.rank, physical_q)
    if layout.rank_bit(shard.rank, physical_q) == 0:
        a, b = u[0, 0], u[0, 1]

        def update(local: Amplitudes, remote: Amplitudes, _: int) -> None:
            local[:] = a * local + b * remote
    else:
        a, b = u[1, 0], u[1, 1]

        def update(local: Amplitudes, remote: Amplitudes, _: int) -> None:
            local[:] = a * remote + b * local

    return _chunked_exchange(shard, partner, plan, transport, gate_seq, update)


def apply_cnot_dist(
    shard: LocalShard,
    control: int,
    target: int,
    plan: ChunkPlan,
    transport: Transport,
    *,
    gate_seq: int = 0,
) -> RankProgram:
    """Apply a CNOT on physical positions of any kind.

    - Both local: local kernel, no communication.
    - Global control, local target: ranks whose control bit is 1 flip the
      target locally, no communication.
    - Global target: every rank exchanges its full shard with the partner and
      takes the remote amplitude wherever the control bit is 1.
    """
    layout = shard.layout
    if control == target:
        raise ValueError(f"CNOT operands must be distinct, got {control}.")
    if layout.is_local(target):
        if layout.is_local(control):
            apply_cnot_local(shard, control, target)
        elif layout.rank_bit(shard.rank, control) == 1:
            apply_x_local(shard, target)
        return _idle()
    plan.check(shard)
    partner = layout.partner_rank(shard.rank, target)

    if layout.is_local(control):

        def update(local: Amplitudes, remote: Amplitudes, start: int) -> None:
            positions = np.arange(start, start + len(local))
            flip = ((positions >> control) & 1).astype(bool)
            local[flip] = remote[flip]
    elif layout.rank_bit(shard.rank, control) == 1:

        def update(local: Amplitudes, remote: Amplitudes, _: int) -> None:
            local[:] = remote
    else:

        def update(local: Amplitudes, remote: Amplitudes, _: int) -> None:
            pass

    return _chunked_exchange(shard, partner, plan, transport, gate_seq, update)


def _bit_positions(length: int, bit: int, value: int) -> IndexArray:
    return np.flatnonzero(((np.arange(length) >> bit) & 1) == value)


def _exchange_positions(
    shard: LocalShard,
    partner: int,
    positions: IndexArray,
    max_chunks: int,
    transport: Transport,
    gate_seq: int,
    step_offset: int,
) -> RankProgram:
    low = min(shard.rank, partner)
    chunks = min(max_chunks, len(positions))
    for k, block in enumerate(np.split(positions, chunks)):
        send = shard.amps[block]
        recv = np.empty_like(send)
        tag = ExchangeTag(gate_seq, step_offset + k, low)
        yield transport.post(shard.rank, partner, tag, send, recv)
        shard.amps[block] = recv


def apply_swap_dist(
    shard: LocalShard,
    i: int,
    j: int,
    transport: Transport,
    *,
    plan: ChunkPlan | None = None,
    gate_seq: int = 0,
    step_offset: int = 0,
) -> RankProgram:
    """Exchange bits ``i`` and ``j`` of all global amplitude indices.

    Only amplitudes whose two bits differ move.
    With one global qubit ``g`` and one local qubit ``l``, the rank whose bit
    ``g`` is ``b`` sends the half of its shard where bit ``l`` is ``1 - b`` and
    receives the partner's matching half into the same positions.
    With two global qubits, ranks whose two bits differ exchange their whole
    shard.
    """
    layout = shard.layout
    layout.classify(i)
    layout.classify(j)
    if i == j:
        raise ValueError(f"Swap operands must be distinct, got {i}.")
    if layout.is_local(i) and layout.is_local(j):
        apply_swap_local(shard, i, j)
        return _idle()
    plan = plan or ChunkPlan.for_layout(layout)
    plan.check(shard)
    if layout.is_local(i) or layout.is_local(j):
        g, loc = (j, i) if layout.is_local(i) else (i, j)
        b = layout.rank_bit(shard.rank, g)
        positions = _bit_positions(layout.local_length, loc, 1 - b)
        partner = layout.partner_rank(shard.rank, g)
    else:
        if layout.rank_bit(shard.rank, i) == layout.rank_bit(shard.rank, j):
            return _idle()
        positions = np.arange(layout.local_length)
        partner = layout.partner_rank(layout.partner_rank(shard.rank, i), j)
    return _exchange_positions(
        shard, partner, positions, plan.c, transport, gate_seq, step_offset
    )


@dataclass(frozen=True)
class Transfer:
    """One block of a fused swap sent to one partner."""

    partner: int
    positions: IndexArray


def fused_swap_transfers(
    layout: GlobalLayout,
    rank: int,
    local_start: int,
    global_start: int,
    s: int,
    block_len: int | None = None,
) -> list[Transfer]:
    """Plan the transfers of a local/global fused swap for one rank.

    Partners are visited in ascending order of the XOR mask ``d`` applied to
    the ``s`` global bits.
    The rank sends, and receives into, the amplitudes whose local field equals
    its own global field XOR ``d``.
    """
    m = layout.m
    per_partner = 1 << (m - s)
    if block_len is None:
        block_len = per_partner
    if not _is_power_of_two(block_len) or block_len > per_partner:
        raise ValueError(
            f"Transfer block length must be a power of two <= {per_partner}, "
            f"got {block_len}."
        )
    inner = 1 << local_start
    outer = 1 << (m - local_start - s)
    stride = (1 << s) * inner
    field_value = (rank >> (global_start - m)) & ((1 << s) - 1)
    transfers = []
    for d in range(1, 1 << s):
        v = field_value ^ d
        positions = (
            np.arange(outer)[:, None] * stride + v * inner + np.arange(inner)
        ).ravel()
        partner = rank ^ (d << (global_start - m))
        transfers.extend(
            Transfer(partner=partner, positions=block)
            for block in np.split(positions, per_partner // block_len)
        )
    return transfers


def _split_ranges(
    layout: GlobalLayout, p_start: int, q_start: int, s: int
) -> tuple[int, int] | None:
    def kind(start: int) -> str | None:
        if start + s <= layout.m:
            return 'local'
        if start >= layout.m:
            return 'global'
        return None

    kinds = (kind(p_start), kind(q_start))
    if kinds == ('local', 'global'):
        return p_start, q_start
    if kinds == ('global', 'local'):
        return q_start, p_start
    return None


def _check_fused(layout: GlobalLayout, p_start: int, q_start: int, s: int) -> None:
    GateOp.fused_swap(p_start, q_start, s).validate(layout.n)


def _naive_fused(
    shard: LocalShard,
    transfers: list[Transfer],
    transport: Transport,
    gate_seq: int,
) -> RankProgram:
    for j, transfer in enumerate(transfers):
        send = shard.amps[transfer.positions]
        recv = np.empty_like(send)
        tag = ExchangeTag(gate_seq, j, min(shard.rank, transfer.partner))
        yield transport.post(shard.rank, transfer.partner, tag, send, recv)
        shard.amps[transfer.positions] = recv


def _sequential_swaps(
    shard: LocalShard,
    p_start: int,
    q_start: int,
    s: int,
    transport: Transport,
    plan: ChunkPlan,
    gate_seq: int,
) -> RankProgram:
    for i in range(s):
        yield from apply_swap_dist(
            shard,
            p_start + i,
            q_start + i,
            transport,
            plan=plan,
            gate_seq=gate_seq,
            step_offset=i * shard.layout.local_length,
        )


def apply_fused_swap(
    shard: LocalShard,
    p_start: int,
    q_start: int,
    s: int,
    transport: Transport,
    *,
    plan: ChunkPlan | None = None,
    gate_seq: int = 0,
    block_len: int | None = None,
) -> RankProgram:
    """Swap the qubit ranges ``[p_start, p_start + s)`` and ``[q_start, q_start + s)``.

    The result equals ``swap(p_start + i, q_start + i)`` for ``i`` in ``0..s-1``.
    When one range is local and the other global, each rank gathers the block
    destined for each of its ``2**s - 1`` partners, exchanges it and scatters
    the received block into the same positions.
    Other range combinations fall back to the sequence of distributed swaps.

    Parameters
    ----------
    shard:
        Amplitudes of this rank, updated in place.
    p_start, q_start:
        Starts of the two disjoint ranges.
    s:
        Width of the ranges.
    transport:
        Transport shared by all ranks.
    plan:
        Chunking used by the sequential fallback.
    gate_seq:
        Index of the operation in the circuit.
    block_len:
        Amplitudes per transfer block.
    """
    layout = shard.layout
    _check_fused(layout, p_start, q_start, s)
    ranges = _split_ranges(layout, p_start, q_start, s)
    if ranges is None:
        plan = plan or ChunkPlan.for_layout(layout)
        return _sequential_swaps(shard, p_start, q_start, s, transport, plan, gate_seq)
    transfers = fused_swap_transfers(layout, shard.rank, *ranges, s, block_len)
    return _naive_fused(shard, transfers, transport, gate_seq)


def run_fused_swap_pipelined(
    shard: LocalShard,
    p_start: int,
    q_start: int,
    s: int,
    transport: Transport,
    *,
    plan: ChunkPlan | None = None,
    gate_seq: int = 0,
    block_len: int | None = None,
    trace: ScheduleTrace | None = None,
) -> RankProgram:
    """Fused swap with double buffering.

    While transfer ``j`` is in flight, the rank scatters the block received by
    transfer ``j - 1`` and gathers the block for transfer ``j + 1`` into the
    other buffer pair.
    The final state and the communicated bytes equal those of
    :func:`apply_fused_swap`.

    Parameters
    ----------
    shard, p_start, q_start, s, transport, plan, gate_seq, block_len:
        See :func:`apply_fused_swap`.
    trace:
        Receives the stage intervals, if given.
    """
    layout = shard.layout
    _check_fused(layout, p_start, q_start, s)
    ranges = _split_ranges(layout, p_start, q_start, s)
    if ranges is None:
        plan = plan or ChunkPlan.for_layout(layout)
        return _sequential_swaps(shard, p_start, q_start, s, transport, plan, gate_seq)
    transfers = fused_swap_transfers(layout, shard.rank, *ranges, s, block_len)
    if len(transfers) < 2:
        # Default blocks span a whole partner, so width 1 yields one block.
        explicit = block_len is not None and shard.rank == 0
        get_logger().log(
            logging.WARNING if explicit else logging.DEBUG,
            "Fused swap of width %d on rank %d moves a single block; "
            "the pipeline cannot overlap any stage.",
            s,
            shard.rank,
        )
    return _pipelined_fused(
        shard, transfers, transport, gate_seq, trace or ScheduleTrace()
    )


def _pipelined_fused(
    shard: LocalShard,
    transfers: list[Transfer],
    transport: Transport,
    gate_seq: int,
    trace: ScheduleTrace,
) -> RankProgram:
    buffers = SwapBufferPair.allocate(len(transfers[0].positions))

    def gather(j: int) -> None:
        start = trace.begin()
        np.take(shard.amps, transfers[j].positions, out=buffers[j].send)
        trace.end('gather', j, start)

    def scatter(j: int) -> None:
        start = trace.begin()
        shard.amps[transfers[j].positions] = buffers[j].recv
        trace.end('scatter', j, start)

    gather(0)
    for j, transfer in enumerate(transfers):
        pair = buffers[j]
        tag = ExchangeTag(gate_seq, j, min(shard.rank, transfer.partner))
        start = trace.begin()
        pending = transport.post(
            shard.rank, transfer.partner, tag, pair.send, pair.recv
        )
        if j >= 1:
            scatter(j - 1)
        if j + 1 < len(transfers):
            gather(j + 1)
        yield pending
        trace.end('exchange', j, start)
    scatter(len(transfers) - 1)


def check_executable(circuit: Circuit, layout: GlobalLayout) -> None:
    """Raise ValueError naming the first op that cannot run under ``layout``.

    Dense two-qubit gates must act on local positions only.
    """
    if circuit.n != layout.n:
        raise ValueError(
            f"Circuit has {circuit.n} qubits but the layout has {layout.n}."
        )
    for index, op in enumerate(circuit.ops):
        if op.kind is GateKind.DENSE2 and not all(
            layout.is_local(q) for q in op.qubits
        ):
            raise ValueError(
                f"Op {index} (DENSE2 on {op.qubits}) touches a global qubit "
                f"(m={layout.m}); localize the circuit first."
            )


def execute_op(
    shard: LocalShard,
    op: GateOp,
    gate_seq: int,
    transport: Transport,
    ctx: ExecutionContext,
) -> RankProgram:
    """Return the rank program of one operation on physical positions."""
    layout = shard.layout
    kind = op.kind
    if kind.is_single_qubit:
        (q,) = op.qubits
        if layout.is_local(q):
            apply_1q_local(shard, op.unitary(), q)
            return _idle()
        return apply_1q_global(
            shard, op.unitary(), q, ctx.plan, transport, gate_seq=gate_seq
        )
    if kind is GateKind.CNOT:
        control, target = op.qubits
        return apply_cnot_dist(
            shard, control, target, ctx.plan, transport, gate_seq=gate_seq
        )
    if kind is GateKind.DENSE2:
        q0, q1 = op.qubits
        if not (layout.is_local(q0) and layout.is_local(q1)):
            raise ValueError(
                f"Op {gate_seq} (DENSE2 on {op.qubits}) touches a global qubit "
                f"(m={layout.m}); localize the circuit first."
            )
        apply_2q_local(shard, op.unitary(), q0, q1)
        return _idle()
    if kind is GateKind.SWAP:
        i, j = op.qubits
        return apply_swap_dist(
            shard, i, j, transport, plan=ctx.plan, gate_seq=gate_seq
        )
    p_start, q_start = op.qubits
    fused = run_fused_swap_pipelined if ctx.pipelined else apply_fused_swap
    extra = {'trace': ctx.trace} if ctx.pipelined else {}
    return fused(
        shard,
        p_start,
        q_start,
        op.width,
        transport,
        plan=ctx.plan,
        gate_seq=gate_seq,
        block_len=ctx.block_len,
        **extra,
    )


def rank_program(
    shard: LocalShard,
    circuit: Circuit,
    transport: Transport,
    ctx: ExecutionContext,
) -> RankProgram:
    """Return the program applying a physical circuit to one rank's shard."""
    for gate_seq, op in enumerate(circuit.ops):
        yield from execute_op(shard, op, gate_seq, transport, ctx)
