# SPDX-License-Identifier: BSD-3-Clause
# Copyright (c) 2024 dvsim contributors
"""Sciline workflow running a circuit on the simulated cluster."""

from __future__ import annotations

import numpy as np
import sciline

from . import circuits
from .cluster import (
    ExecutionMode,
    TimedExecution,
    run_reference,
    state_digest,
    time_execution,
)
from .dist_ops import ChunkPlan
from .io.circuit_json import load_circuit
from .io.report import RunReport, VerificationSummary
from .layout import GlobalLayout
from .logging import get_logger
from .metrics import (
    CommPrediction,
    QbfInput,
    effective_bandwidth,
    predict_comm_bytes,
    qbf,
)
from .transpile import LocalizedCircuit, TranspileConfig, localize_with_layout
from .transport import ProtocolError, watchdog_seconds_from_env
from .types import (
    ChunkCount,
    CircuitFilename,
    CircuitKind,
    Depth,
    FinalState,
    FuseSetting,
    LogicalCircuit,
    NumQubits,
    NumRanks,
    NumRepeats,
    NumRuns,
    OracleQubitLimit,
    PeakFlops,
    Pipelined,
    RankLayout,
    ReferenceState,
    RestoreLayout,
    Seed,
    TargetQubit,
    TransferBlockLength,
    TranspileSettings,
    WatchdogSeconds,
)
from .verify import to_logical_order, verify_localized

CIRCUIT_KINDS = ('hadamard', 'qv', 'qsb', 'gate', 'file')


def logical_circuit(
    kind: CircuitKind,
    n: NumQubits,
    seed: Seed,
    depth: Depth,
    target: TargetQubit,
    repeats: NumRepeats,
    filename: CircuitFilename,
) -> LogicalCircuit:
    """Generate or load the circuit to run."""
    if kind == 'hadamard':
        circuit = circuits.gen_hadamard_bench(n)
    elif kind == 'qv':
        circuit = circuits.gen_qv(n, depth=depth, seed=seed)
    elif kind == 'qsb':
        circuit = circuits.gen_qsb(n, seed=seed)
    elif kind == 'gate':
        circuit = circuits.gen_single_gate(
            n, n - 1 if target is None else target, repeats
        )
    elif kind == 'file':
        if filename is None:
            raise ValueError("Circuit kind 'file' requires a circuit filename.")
        circuit = load_circuit(filename)
        if circuit.n != n:
            raise ValueError(
                f"Circuit file {filename} has {circuit.n} qubits, expected {n}."
            )
    else:
        raise ValueError(
            f"Unknown circuit kind '{kind}', expected one of {CIRCUIT_KINDS}."
        )
    return LogicalCircuit(circuit)


def rank_layout(n: NumQubits, ranks: NumRanks) -> RankLayout:
    """Partition the state over the ranks."""
    return RankLayout(GlobalLayout.from_ranks(n, ranks))


def parse_fuse_setting(fuse: str, restore: bool = True) -> TranspileConfig | None:
    """Translate ``auto``, ``off`` or a width into transpiler settings."""
    value = str(fuse).strip().lower()
    if value == 'off':
        return None
    if value == 'auto':
        return TranspileConfig(s=None, restore_layout=restore)
    try:
        s = int(value)
    except ValueError:
        raise ValueError(
            f"Fuse setting must be 'auto', 'off' or a width, got '{fuse}'."
        ) from None
    return TranspileConfig(s=s, restore_layout=restore)


def transpile_settings(fuse: FuseSetting, restore: RestoreLayout) -> TranspileSettings:
    return TranspileSettings(parse_fuse_setting(fuse, restore))


def localized_circuit(
    circuit: LogicalCircuit, layout: RankLayout, settings: TranspileSettings
) -> LocalizedCircuit:
    """Insert fused swaps, or pass the circuit through unchanged if fusing is off."""
    if settings is None:
        return LocalizedCircuit.unchanged(circuit, layout)
    return localize_with_layout(circuit, layout, settings)


def chunk_plan(layout: RankLayout, chunks: ChunkCount) -> ChunkPlan:
    return ChunkPlan.for_layout(layout, chunks)


def timed_execution(
    localized: LocalizedCircuit,
    layout: RankLayout,
    plan: ChunkPlan,
    mode: ExecutionMode,
    pipelined: Pipelined,
    block_len: TransferBlockLength,
    runs: NumRuns,
    watchdog: WatchdogSeconds,
) -> TimedExecution:
    """Execute the physical circuit ``runs`` times."""
    return time_execution(
        localized.circuit,
        layout,
        runs=runs,
        plan=plan,
        mode=ExecutionMode(mode),
        pipelined=pipelined,
        block_len=block_len,
        watchdog_seconds=watchdog,
    )


def final_state(execution: TimedExecution) -> FinalState:
    return FinalState(execution.state)


def comm_prediction(localized: LocalizedCircuit, layout: RankLayout) -> CommPrediction:
    return predict_comm_bytes(localized.circuit, layout)


def reference_state(circuit: LogicalCircuit, limit: OracleQubitLimit) -> ReferenceState:
    """Run the logical circuit on a single rank."""
    if circuit.n > limit:
        raise ValueError(
            f"Circuit has {circuit.n} qubits, more than the oracle limit of {limit}."
        )
    return ReferenceState(run_reference(circuit))


def verification_summary(
    circuit: LogicalCircuit,
    localized: LocalizedCircuit,
    state: FinalState,
    reference: ReferenceState,
) -> VerificationSummary:
    return verify_localized(circuit, localized, state, reference)


def run_report(
    kind: CircuitKind,
    circuit: LogicalCircuit,
    layout: RankLayout,
    localized: LocalizedCircuit,
    execution: TimedExecution,
    prediction: CommPrediction,
    flops: PeakFlops,
) -> RunReport:
    """Summarize a timed run.

    Raises
    ------
    ProtocolError
        If the measured communication differs from the prediction.
    """
    measured = execution.stats.bytes_total
    if measured != prediction.total_bytes:
        raise ProtocolError(
            f"Measured {measured} bytes but predicted {prediction.total_bytes}."
        )
    elapsed = float(execution.elapsed_mean.value)
    gates = circuit.gate_count
    bandwidth = 0.0
    ratio = None
    if gates > 0 and elapsed > 0:
        bandwidth = effective_bandwidth(layout.n, gates, elapsed)
        if flops is not None:
            ratio = qbf(
                QbfInput(n=layout.n, gates=gates, exetime=elapsed, total_flops=flops)
            )
    state = execution.state
    report = RunReport(
        n=layout.n,
        p=layout.p,
        m=layout.m,
        ranks=layout.ranks,
        circuit_kind=kind,
        seed=circuit.seed,
        gate_count=gates,
        runs=execution.timings.sizes['run'],
        elapsed_mean_s=elapsed,
        comm_bytes_measured=measured,
        comm_bytes_predicted=prediction.total_bytes,
        effective_bandwidth=bandwidth,
        qbf=ratio,
        state_norm=float(np.vdot(state, state).real),
        state_digest=state_digest(to_logical_order(state, localized.final_layout)),
    )
    get_logger().info(
        "Run of %s on %d qubits and %d ranks: %.3g s, %d bytes",
        kind,
        layout.n,
        layout.ranks,
        elapsed,
        measured,
    )
    return report


providers = (
    logical_circuit,
    rank_layout,
    transpile_settings,
    localized_circuit,
    chunk_plan,
    timed_execution,
    final_state,
    comm_prediction,
    reference_state,
    verification_summary,
    run_report,
)
"""Sciline providers of a distributed run."""


def default_parameters() -> dict:
    return {
        CircuitKind: 'hadamard',
        NumRanks: 1,
        Seed: None,
        Depth: 10,
        TargetQubit: None,
        NumRepeats: 1,
        CircuitFilename: None,
        FuseSetting: 'auto',
        RestoreLayout: True,
        ChunkCount: None,
        TransferBlockLength: None,
        ExecutionMode: ExecutionMode.threaded,
        Pipelined: True,
        NumRuns: 6,
        PeakFlops: None,
        WatchdogSeconds: watchdog_seconds_from_env(),
        OracleQubitLimit: 12,
    }


def DistributedRunWorkflow() -> sciline.Pipeline:
    """
    Workflow with default parameters running a circuit on the simulated cluster.

    Set at least :class:`dvsim.types.NumQubits` before computing results.
    """
    return sciline.Pipeline(providers, params=default_parameters())


__all__ = [
    'CIRCUIT_KINDS',
    'DistributedRunWorkflow',
    'default_parameters',
    'parse_fuse_setting',
    'providers',
]
