# SPDX-License-Identifier: BSD-3-Clause
# Copyright (c) 2024 dvsim contributors
"""The simulated cluster: one worker per rank driving its rank program."""

from __future__ import annotations

import enum
import hashlib
import threading
import time
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipp as sc

from .circuits import Circuit
from .dist_ops import (
    ChunkPlan,
    ExecutionContext,
    RankProgram,
    ScheduleTrace,
    check_executable,
    rank_program,
)
from .layout import GlobalLayout
from .logging import get_logger
from .state import Amplitudes, LocalShard, init_zero_state
from .transport import (
    CommStats,
    PendingExchange,
    ProtocolError,
    RendezvousTransport,
    Transport,
    watchdog_seconds_from_env,
)

DIGEST_GRID = 1e12


class ExecutionMode(str, enum.Enum):
    """How rank programs are driven."""

    threaded = 'threaded'
    """One worker thread per rank."""
    sequential = 'sequential'
    """A single thread steps all ranks in turn."""


def _drive_threaded(
    programs: Sequence[RankProgram],
    transport: Transport,
    pool: ThreadPoolExecutor | None = None,
) -> None:
    if pool is None:
        with ThreadPoolExecutor(
            max_workers=len(programs), thread_name_prefix='dvsim-rank'
        ) as own:
            _drive_threaded(programs, transport, own)
        return
    errors: list[BaseException] = []
    lock = threading.Lock()

    def work(program: RankProgram) -> None:
        try:
            for pending in program:
                transport.wait(pending)
        except BaseException as err:
            with lock:
                errors.append(err)
            transport.abort(err)
            raise

    futures = [pool.submit(work, program) for program in programs]
    for future in futures:
        future.exception()
    if errors:
        raise errors[0]


def _drive_sequential(programs: Sequence[RankProgram], transport: Transport) -> None:
    waiting: dict[int, PendingExchange | None] = dict.fromkeys(range(len(programs)))
    try:
        while waiting:
            progressed = False
            for rank in sorted(waiting):
                pending = waiting[rank]
                if pending is not None and not transport.test(pending):
                    continue
                progressed = True
                try:
                    waiting[rank] = next(programs[rank])
                except StopIteration:
                    del waiting[rank]
            if not progressed:
                blocked = ', '.join(
                    f"rank {rank} on {pending.tag}"  # type: ignore[union-attr]
                    for rank, pending in sorted(waiting.items())
                )
                raise ProtocolError(f"Deadlock: no rank can make progress ({blocked}).")
    except BaseException as err:
        transport.abort(err)
        for program in programs:
            program.close()
        raise


def drive(
    programs: Sequence[RankProgram],
    transport: Transport,
    mode: ExecutionMode = ExecutionMode.threaded,
    *,
    pool: ThreadPoolExecutor | None = None,
) -> None:
    """Run rank programs to completion.

    Parameters
    ----------
    programs:
        One program per rank, indexed by rank.
    transport:
        Transport the programs post their exchanges to.
    mode:
        Threaded or sequential driver.
        Both produce bit-identical shards and statistics.
    pool:
        Worker threads of the threaded driver, with at least one worker per
        rank. A pool is created for this call if None.

    Raises
    ------
    ProtocolError
        If the ranks deadlock or violate the exchange protocol.
        A failing rank aborts the transport so that its peers fail fast; the
        first error is re-raised.
    """
    mode = ExecutionMode(mode)
    if mode is ExecutionMode.threaded:
        _drive_threaded(programs, transport, pool)
    else:
        _drive_sequential(programs, transport)


def run_circuit(
    circuit: Circuit,
    layout: GlobalLayout,
    *,
    plan: ChunkPlan | None = None,
    transport: Transport | None = None,
    mode: ExecutionMode = ExecutionMode.threaded,
    pipelined: bool = True,
    block_len: int | None = None,
    traces: dict[int, ScheduleTrace] | None = None,
) -> list[LocalShard]:
    """Apply a physical circuit to ``|0...0>`` on all ranks of a layout.

    Parameters
    ----------
    circuit:
        Circuit on physical positions.
    layout:
        Partition of the state over ranks.
    plan:
        Chunking of global gate exchanges. Defaults to ``min(16, 2**m)`` chunks.
    transport:
        Transport counting the communication. A new
        :class:`~dvsim.transport.RendezvousTransport` is used if None.
    mode:
        Driver of the rank programs.
    pipelined:
        Use double buffering for fused swaps.
    block_len:
        Amplitudes per fused-swap transfer block.
    traces:
        If given, filled with the fused-swap schedule trace of each rank.

    Returns
    -------
    :
        Final shards ordered by rank.
    """
    prepared = prepare_run(
        circuit,
        layout,
        plan=plan,
        transport=transport,
        pipelined=pipelined,
        block_len=block_len,
        traces=traces,
    )
    drive(prepared.programs, prepared.transport, mode)
    return prepared.shards


@dataclass(frozen=True)
class PreparedRun:
    """Initial shards and not yet started rank programs of one execution."""

    shards: list[LocalShard]
    programs: list[RankProgram]
    transport: Transport


def prepare_run(
    circuit: Circuit,
    layout: GlobalLayout,
    *,
    plan: ChunkPlan | None = None,
    transport: Transport | None = None,
    pipelined: bool = True,
    block_len: int | None = None,
    traces: dict[int, ScheduleTrace] | None = None,
) -> PreparedRun:
    """Allocate ``|0...0>`` shards and build one rank program per rank.

    No gate is applied until the programs are passed to :func:`drive`.
    See :func:`run_circuit` for the parameters.
    """
    check_executable(circuit, layout)
    plan = plan or ChunkPlan.for_layout(layout)
    if transport is None:
        transport = RendezvousTransport(
            layout.ranks, watchdog_seconds=watchdog_seconds_from_env()
        )
    if transport.ranks != layout.ranks:
        raise ValueError(
            f"Transport connects {transport.ranks} ranks but the layout has "
            f"{layout.ranks}."
        )
    shards = [init_zero_state(layout, rank) for rank in range(layout.ranks)]
    programs = []
    for shard in shards:
        trace = None
        if traces is not None:
            trace = traces.setdefault(shard.rank, ScheduleTrace())
        ctx = ExecutionContext(
            plan=plan, block_len=block_len, pipelined=pipelined, trace=trace
        )
        programs.append(rank_program(shard, circuit, transport, ctx))
    return PreparedRun(shards=shards, programs=programs, transport=transport)


def assemble_state(shards: Sequence[LocalShard]) -> Amplitudes:
    """Concatenate shards in rank order into the full state vector."""
    ordered = sorted(shards, key=lambda shard: shard.rank)
    if [shard.rank for shard in ordered] != list(range(len(ordered))):
        raise ValueError("Shards must cover all ranks exactly once.")
    return np.concatenate([shard.amps for shard in ordered])


def run_reference(circuit: Circuit) -> Amplitudes:
    """Return the final state of a single-rank execution of a logical circuit."""
    layout = GlobalLayout(n=circuit.n, p=0)
    shards = run_circuit(circuit, layout, mode=ExecutionMode.sequential)
    return shards[0].amps


def state_digest(vector: Amplitudes) -> str:
    """Return the SHA-256 hex digest of amplitudes rounded to a 1e-12 grid."""
    grid = np.rint(np.ascontiguousarray(vector).view(np.float64) * DIGEST_GRID)
    return hashlib.sha256(grid.astype(np.int64).tobytes()).hexdigest()


@dataclass(frozen=True)
class TimedExecution:
    """Result of the repeated timed execution of a circuit.

    Parameters
    ----------
    shards:
        Final shards of the last run.
    timings:
        Wall-clock time of each run, dim ``run``, unit ``s``.
    stats:
        Communication of a single run.
    """

    shards: list[LocalShard]
    timings: sc.Variable
    stats: CommStats

    @property
    def elapsed_mean(self) -> sc.Variable:
        """Mean time of all runs except the first."""
        runs = self.timings.sizes['run']
        if runs < 2:
            return self.timings['run', 0]
        return self.timings['run', 1:].mean('run')

    @property
    def state(self) -> Amplitudes:
        return assemble_state(self.shards)


def time_execution(
    circuit: Circuit,
    layout: GlobalLayout,
    *,
    runs: int = 6,
    plan: ChunkPlan | None = None,
    mode: ExecutionMode = ExecutionMode.threaded,
    pipelined: bool = True,
    block_len: int | None = None,
    watchdog_seconds: float | None = None,
) -> TimedExecution:
    """Execute a circuit ``runs`` times on a monotonic clock.

    Each run starts from ``|0...0>`` and uses freshly reset counters.
    Only driving the rank programs is timed; allocating the shards and
    building the programs happen before the clock starts.

    Raises
    ------
    ProtocolError
        If two runs disagree on the communicated bytes.
    """
    if runs < 1:
        raise ValueError(f"Number of runs must be >= 1, got {runs}.")
    transport = RendezvousTransport(
        layout.ranks,
        watchdog_seconds=watchdog_seconds or watchdog_seconds_from_env(),
    )
    elapsed = []
    stats: list[CommStats] = []
    shards: list[LocalShard] = []
    with ThreadPoolExecutor(
        max_workers=layout.ranks, thread_name_prefix='dvsim-rank'
    ) as pool:
        for _ in range(runs):
            transport.reset_stats()
            prepared = prepare_run(
                circuit,
                layout,
                plan=plan,
                transport=transport,
                pipelined=pipelined,
                block_len=block_len,
            )
            start = time.perf_counter()
            drive(prepared.programs, transport, mode, pool=pool)
            elapsed.append(time.perf_counter() - start)
            shards = prepared.shards
            stats.append(transport.snapshot_stats())
            if stats[-1] != stats[0]:
                raise ProtocolError(
                    f"Communication differs between runs: {stats[0]} != {stats[-1]}."
                )
    timings = sc.array(dims=['run'], values=elapsed, unit='s')
    result = TimedExecution(shards=shards, timings=timings, stats=stats[-1])
    get_logger().info(
        "Executed %d ops on %d ranks %d times, mean %.3g s, %d bytes per run",
        len(circuit),
        layout.ranks,
        runs,
        result.elapsed_mean.value,
        result.stats.bytes_total,
    )
    return result
