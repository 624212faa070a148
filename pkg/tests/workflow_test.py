# SPDX-License-Identifier: BSD-3-Clause
# Copyright (c) 2024 dvsim contributors
import dataclasses

import numpy as np
import pytest
import sciline

from dvsim import workflow as dvsim_workflow
from dvsim.circuits import GateKind, GateOp, gen_qsb
from dvsim.cluster import state_digest
from dvsim.io import RunReport, VerificationSummary, save_circuit
from dvsim.metrics import CommPrediction
from dvsim.transpile import LocalizedCircuit, TranspileConfig
from dvsim.transport import ProtocolError
from dvsim.types import (
    CircuitFilename,
    CircuitKind,
    FinalState,
    FuseSetting,
    LogicalCircuit,
    NumQubits,
    NumRanks,
    NumRuns,
    OracleQubitLimit,
    PeakFlops,
    RankLayout,
    RestoreLayout,
    Seed,
    TranspileSettings,
)
from dvsim.workflow import DistributedRunWorkflow, parse_fuse_setting


@pytest.fixture
def workflow() -> sciline.Pipeline:
    wf = DistributedRunWorkflow()
    wf[NumQubits] = 6
    wf[NumRanks] = 4
    wf[NumRuns] = 2
    return wf


def test_hadamard_run_report(workflow):
    report = workflow.compute(RunReport)
    assert (report.n, report.p, report.m, report.ranks) == (6, 2, 4, 4)
    assert report.circuit_kind == 'hadamard'
    assert report.gate_count == 66
    assert report.runs == 2
    assert report.comm_bytes_measured == report.comm_bytes_predicted
    assert report.comm_bytes_measured > 0
    assert report.state_norm == pytest.approx(1.0, abs=1e-12)
    assert report.qbf is None


def test_global_gate_without_fusing_exchanges_full_state(workflow):
    workflow[CircuitKind] = 'gate'
    workflow[FuseSetting] = 'off'
    report = workflow.compute(RunReport)
    assert report.comm_bytes_measured == 2 ** (6 + 4)


def test_global_gate_with_fusing_and_no_restore(workflow):
    workflow[CircuitKind] = 'gate'
    workflow[RestoreLayout] = False
    localized = workflow.compute(LocalizedCircuit)
    assert [op.kind for op in localized.circuit.ops] == [
        GateKind.FUSED_SWAP,
        GateKind.H,
    ]
    report = workflow.compute(RunReport)
    assert report.comm_bytes_measured == 2**10 - 2**8


def test_single_rank_run_has_no_communication(workflow):
    workflow[NumRanks] = 1
    workflow[CircuitKind] = 'qsb'
    workflow[Seed] = 1
    report = workflow.compute(RunReport)
    assert report.comm_bytes_measured == 0
    assert report.seed == 1


def test_random_circuit_records_drawn_seed(workflow):
    workflow[CircuitKind] = 'qv'
    report = workflow.compute(RunReport)
    assert report.seed is not None


def test_peak_flops_adds_qbf(workflow):
    workflow[PeakFlops] = 1e12
    report = workflow.compute(RunReport)
    assert report.qbf == pytest.approx(
        report.effective_bandwidth / 1e12, rel=1e-12
    )


@pytest.mark.parametrize('kind', ['hadamard', 'qv', 'qsb', 'gate'])
def test_verification_passes(workflow, kind):
    workflow[CircuitKind] = kind
    workflow[NumQubits] = 7
    workflow[NumRanks] = 8
    workflow[Seed] = 3
    summary = workflow.compute(VerificationSummary)
    assert summary.passed
    assert summary.ranks == 8
    assert summary.max_abs_diff <= 1e-12


def test_verification_catches_corrupted_localization(workflow):
    def corrupted_localized_circuit(
        circuit: LogicalCircuit, layout: RankLayout, settings: TranspileSettings
    ) -> LocalizedCircuit:
        localized = dvsim_workflow.localized_circuit(circuit, layout, settings)
        index = next(k for k, o in enumerate(localized.origin) if o is not None)
        ops = list(localized.circuit.ops)
        ops[index] = GateOp.dense2(*ops[index].qubits, np.eye(4))
        return dataclasses.replace(
            localized,
            circuit=dataclasses.replace(localized.circuit, ops=tuple(ops)),
        )

    workflow[CircuitKind] = 'qv'
    workflow[Seed] = 12
    workflow.insert(corrupted_localized_circuit)
    summary = workflow.compute(VerificationSummary)
    assert not summary.passed
    assert summary.diverging_op is not None
    assert summary.digest != summary.reference_digest


def test_mismatching_prediction_is_protocol_error(workflow):
    def wrong_prediction(localized: LocalizedCircuit) -> CommPrediction:
        return CommPrediction.from_per_gate([(0, 1)])

    workflow.insert(wrong_prediction)
    with pytest.raises(ProtocolError, match='predicted 1'):
        workflow.compute(RunReport)


def test_reference_is_limited_to_small_circuits(workflow):
    workflow[OracleQubitLimit] = 5
    with pytest.raises(ValueError, match='oracle limit of 5'):
        workflow.compute(VerificationSummary)


def test_circuit_from_file(workflow, tmp_path):
    path = tmp_path / 'qsb.json'
    save_circuit(gen_qsb(6, seed=8), path)
    workflow[CircuitKind] = 'file'
    workflow[CircuitFilename] = str(path)
    assert workflow.compute(LogicalCircuit) == gen_qsb(6, seed=8)
    assert workflow.compute(VerificationSummary).passed


def test_circuit_file_must_match_qubit_count(workflow, tmp_path):
    path = tmp_path / 'qsb.json'
    save_circuit(gen_qsb(5, seed=8), path)
    workflow[CircuitKind] = 'file'
    workflow[CircuitFilename] = str(path)
    with pytest.raises(ValueError, match='has 5 qubits, expected 6'):
        workflow.compute(LogicalCircuit)


def test_file_kind_requires_filename(workflow):
    workflow[CircuitKind] = 'file'
    with pytest.raises(ValueError, match='requires a circuit filename'):
        workflow.compute(LogicalCircuit)


def test_unknown_circuit_kind(workflow):
    workflow[CircuitKind] = 'ghz'
    with pytest.raises(ValueError, match="Unknown circuit kind 'ghz'"):
        workflow.compute(LogicalCircuit)


def test_ranks_must_be_power_of_two(workflow):
    workflow[NumRanks] = 3
    with pytest.raises(ValueError, match='power of two'):
        workflow.compute(RankLayout)


def test_pipeline_can_compute_intermediate_results(workflow):
    results = workflow.compute((CommPrediction, RankLayout))
    assert results[RankLayout].ranks == 4
    assert results[CommPrediction].total_bytes > 0


def test_workflow_is_deterministic(workflow):
    workflow[CircuitKind] = 'qsb'
    workflow[Seed] = 44
    # This is Sciline's default scheduler, but we want to be explicit here
    scheduler = sciline.scheduler.DaskScheduler()
    graph = workflow.get(FinalState, scheduler=scheduler)
    reference = graph.compute()
    result = graph.compute()
    assert state_digest(result) == state_digest(reference)


@pytest.mark.parametrize(
    ('fuse', 'expected'),
    [
        ('off', None),
        ('auto', TranspileConfig(s=None)),
        ('AUTO', TranspileConfig(s=None)),
        ('2', TranspileConfig(s=2)),
    ],
)
def test_parse_fuse_setting(fuse, expected):
    assert parse_fuse_setting(fuse) == expected


def test_parse_fuse_setting_passes_restore():
    assert parse_fuse_setting('1', restore=False) == TranspileConfig(
        s=1, restore_layout=False
    )


def test_parse_fuse_setting_rejects_garbage():
    with pytest.raises(ValueError, match="Fuse setting must be 'auto', 'off'"):
        parse_fuse_setting('wide')
