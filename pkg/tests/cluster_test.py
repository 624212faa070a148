# SPDX-License-Identifier: BSD-3-Clause
# Copyright (c) 2024 dvsim contributors
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest
import scipp as sc
import scipp.testing

from dvsim.circuits import (
    Circuit,
    GateOp,
    example_4q_circuits,
    gen_hadamard_bench,
    gen_qsb,
    gen_qv,
    gen_random_circuit,
    gen_single_gate,
)
from dvsim.cluster import (
    ExecutionMode,
    assemble_state,
    drive,
    prepare_run,
    run_circuit,
    run_reference,
    state_digest,
    time_execution,
)
from dvsim.dist_ops import ChunkPlan, ScheduleTrace
from dvsim.layout import GlobalLayout
from dvsim.metrics import predict_comm_bytes
from dvsim.state import init_zero_state
from dvsim.transpile import localize
from dvsim.transport import ExchangeTag, ProtocolError, RendezvousTransport


def measured_stats(circuit, layout, **kwargs):
    transport = RendezvousTransport(layout.ranks, watchdog_seconds=10.0)
    shards = run_circuit(circuit, layout, transport=transport, **kwargs)
    return assemble_state(shards), transport.snapshot_stats()


@pytest.mark.parametrize('mode', list(ExecutionMode))
def test_four_qubit_example_communication_triple(mode):
    examples = example_4q_circuits()
    layout = GlobalLayout(n=4, p=2)
    states = {}
    measured = {}
    for name in ('original', 'swapped', 'fused'):
        states[name], stats = measured_stats(
            getattr(examples, name), layout, mode=mode
        )
        measured[name] = stats.bytes_total
    assert measured == {'original': 1024, 'swapped': 512, 'fused': 384}
    np.testing.assert_allclose(states['swapped'], states['original'], atol=1e-12)
    np.testing.assert_allclose(states['fused'], states['original'], atol=1e-12)


@pytest.mark.parametrize('n', range(6, 13))
@pytest.mark.parametrize('p', [1, 2, 3])
def test_global_single_qubit_gate_law(n, p):
    layout = GlobalLayout(n=n, p=p)
    for target in range(layout.m, n):
        _, stats = measured_stats(gen_single_gate(n, target), layout)
        assert stats.bytes_total == 2 ** (n + 4)
    for target in (0, layout.m - 1):
        _, stats = measured_stats(gen_single_gate(n, target), layout)
        assert stats.bytes_total == 0


@pytest.mark.parametrize('m', [6, 8])
def test_bytes_per_rank_of_global_gate_are_independent_of_ranks(m):
    for p in (1, 2, 3):
        n = m + p
        _, stats = measured_stats(
            gen_single_gate(n, n - 1), GlobalLayout(n=n, p=p)
        )
        assert stats.bytes_sent_per_rank == (2 ** (m + 4),) * (1 << p)


def test_run_reference_matches_oracle(oracle):
    circuit = gen_random_circuit(5, 60, seed=31)
    np.testing.assert_allclose(run_reference(circuit), oracle(circuit), atol=1e-12)


@pytest.mark.parametrize(
    'circuit',
    [gen_hadamard_bench(8), gen_qv(8, depth=4, seed=12), gen_qsb(8, seed=5)],
    ids=['hadamard', 'qv', 'qsb'],
)
@pytest.mark.parametrize('p', [1, 2, 3])
def test_localized_generated_circuit_matches_reference_and_prediction(circuit, p):
    layout = GlobalLayout(n=8, p=p)
    localized = localize(circuit, layout)
    state, stats = measured_stats(localized, layout)
    np.testing.assert_allclose(state, run_reference(circuit), rtol=0, atol=1e-12)
    assert stats.bytes_total == predict_comm_bytes(localized, layout).total_bytes
    assert stats.bytes_total > 0


def test_prepared_run_applies_nothing_until_driven():
    layout = GlobalLayout(n=6, p=2)
    circuit = gen_single_gate(6, 5)
    transport = RendezvousTransport(layout.ranks, watchdog_seconds=10.0)
    prepared = prepare_run(circuit, layout, transport=transport)
    assert prepared.transport is transport
    zero = np.zeros(2**6, dtype=np.complex128)
    zero[0] = 1.0
    np.testing.assert_array_equal(assemble_state(prepared.shards), zero)
    assert transport.snapshot_stats().bytes_total == 0
    drive(prepared.programs, transport)
    np.testing.assert_allclose(
        assemble_state(prepared.shards), run_reference(circuit), atol=1e-12
    )
    assert transport.snapshot_stats().bytes_total == 2 ** (6 + 4)


def test_drive_reuses_a_given_pool():
    layout = GlobalLayout(n=6, p=2)
    circuit = localize(gen_qsb(6, seed=2), layout)
    expected = assemble_state(run_circuit(circuit, layout))
    with ThreadPoolExecutor(max_workers=layout.ranks) as pool:
        for _ in range(2):
            prepared = prepare_run(circuit, layout)
            drive(prepared.programs, prepared.transport, pool=pool)
            np.testing.assert_array_equal(assemble_state(prepared.shards), expected)


def test_run_circuit_rejects_dense_gate_on_global_qubit():
    u = np.eye(4)
    circuit = Circuit(n=4, ops=(GateOp.dense2(1, 2, u),))
    with pytest.raises(ValueError, match='Op 0'):
        run_circuit(circuit, GlobalLayout(n=4, p=2))


def test_run_circuit_rejects_transport_of_other_size():
    with pytest.raises(ValueError, match='Transport connects 2 ranks'):
        run_circuit(
            gen_single_gate(4, 0),
            GlobalLayout(n=4, p=2),
            transport=RendezvousTransport(2),
        )


def test_run_circuit_fills_traces():
    layout = GlobalLayout(n=8, p=2)
    circuit = Circuit(n=8, ops=(GateOp.fused_swap(4, 6, 2),))
    traces = {}
    run_circuit(circuit, layout, block_len=4, traces=traces)
    assert sorted(traces) == [0, 1, 2, 3]
    assert all(isinstance(trace, ScheduleTrace) for trace in traces.values())
    assert all(trace.overlapping_exchanges() >= 1 for trace in traces.values())


def test_unpipelined_run_equals_pipelined_run():
    circuit = localize(gen_qsb(7, seed=3), GlobalLayout(n=7, p=2))
    layout = GlobalLayout(n=7, p=2)
    pipelined, stats_a = measured_stats(circuit, layout, pipelined=True, block_len=2)
    naive, stats_b = measured_stats(circuit, layout, pipelined=False, block_len=2)
    np.testing.assert_array_equal(pipelined, naive)
    assert stats_a == stats_b


@pytest.mark.parametrize('ranks', [2, 4, 8])
def test_runs_are_deterministic_across_modes(ranks):
    layout = GlobalLayout.from_ranks(9, ranks)
    circuit = localize(gen_qsb(9, seed=123), layout)
    results = [
        measured_stats(circuit, layout, mode=mode, plan=ChunkPlan.for_layout(layout, 4))
        for mode in (*ExecutionMode, *ExecutionMode)
    ]
    digests = {state_digest(state) for state, _ in results}
    stats = {result[1] for result in results}
    assert len(digests) == 1
    assert len(stats) == 1


def test_assemble_state_orders_by_rank():
    layout = GlobalLayout(n=3, p=1)
    shards = [init_zero_state(layout, 1), init_zero_state(layout, 0)]
    np.testing.assert_array_equal(assemble_state(shards), [1, 0, 0, 0, 0, 0, 0, 0])


def test_assemble_state_requires_all_ranks():
    layout = GlobalLayout(n=3, p=1)
    with pytest.raises(ValueError, match='all ranks exactly once'):
        assemble_state([init_zero_state(layout, 1)])


def test_state_digest_is_value_based(make_state):
    psi = make_state(np.random.default_rng(1), 4)
    assert state_digest(psi) == state_digest(psi.copy())
    assert state_digest(psi) != state_digest(-psi)
    assert len(state_digest(psi)) == 64


def _waits_for_partner(transport):
    recv = np.empty(1, dtype=np.complex128)
    yield transport.post(
        0, 1, ExchangeTag(0, 0, 0), np.ones(1, dtype=np.complex128), recv
    )


def _fails():
    raise RuntimeError('rank 1 crashed')
    yield  # pragma: no cover


@pytest.mark.parametrize('mode', list(ExecutionMode))
def test_failing_rank_aborts_run(mode):
    transport = RendezvousTransport(2, watchdog_seconds=10.0)
    with pytest.raises(RuntimeError, match='rank 1 crashed'):
        drive([_waits_for_partner(transport), _fails()], transport, mode)


def _finishes():
    yield from ()


def test_sequential_driver_reports_deadlock():
    transport = RendezvousTransport(2, watchdog_seconds=10.0)
    with pytest.raises(ProtocolError, match='Deadlock'):
        drive(
            [_waits_for_partner(transport), _finishes()],
            transport,
            ExecutionMode.sequential,
        )


def test_threaded_driver_reports_missing_partner_after_watchdog():
    transport = RendezvousTransport(2, watchdog_seconds=0.1)
    with pytest.raises(ProtocolError, match='Watchdog'):
        drive([_waits_for_partner(transport), _finishes()], transport)


class TestTimeExecution:
    def test_records_each_run(self):
        layout = GlobalLayout(n=6, p=1)
        result = time_execution(gen_single_gate(6, 5, repeats=2), layout, runs=3)
        assert result.timings.sizes == {'run': 3}
        assert result.timings.unit == sc.Unit('s')
        assert result.stats.bytes_total == 2 * 2 ** (6 + 4)
        expected = result.timings['run', 1:].mean('run')
        sc.testing.assert_identical(result.elapsed_mean, expected)

    def test_single_run_mean_is_that_run(self):
        result = time_execution(gen_single_gate(4, 0), GlobalLayout(n=4, p=1), runs=1)
        sc.testing.assert_identical(result.elapsed_mean, result.timings['run', 0])

    def test_final_state_is_that_of_one_run(self):
        layout = GlobalLayout(n=5, p=2)
        circuit = gen_single_gate(5, 4)
        result = time_execution(circuit, layout, runs=2)
        np.testing.assert_allclose(
            result.state, run_reference(circuit), rtol=0, atol=1e-12
        )

    def test_rejects_zero_runs(self):
        with pytest.raises(ValueError, match='runs must be >= 1'):
            time_execution(gen_single_gate(4, 0), GlobalLayout(n=4, p=1), runs=0)
