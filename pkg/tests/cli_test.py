# SPDX-License-Identifier: BSD-3-Clause
# Copyright (c) 2024 dvsim contributors
import dataclasses
import io
import json

import numpy as np
import pandas as pd
import pytest

from dvsim import cli
from dvsim import workflow as dvsim_workflow
from dvsim.circuits import Circuit, GateOp, example_4q_circuits
from dvsim.io import save_circuit
from dvsim.metrics import CommPrediction


def run_cli(capsys, *argv):
    code = cli.main(list(argv))
    return code, capsys.readouterr().out


@pytest.fixture
def example_files(tmp_path):
    paths = {}
    for name, circuit in vars(example_4q_circuits()).items():
        paths[name] = tmp_path / f'{name}.json'
        save_circuit(circuit, paths[name])
    return paths


def test_run_reports_measured_and_predicted_bytes(capsys):
    code, out = run_cli(
        capsys, 'run', '--qubits', '6', '--ranks', '4', '--runs', '2', '--verify'
    )
    assert code == cli.EXIT_OK
    report = json.loads(out)
    assert report['ranks'] == 4
    assert report['runs'] == 2
    assert report['comm_bytes_measured'] == report['comm_bytes_predicted']
    assert report['qbf'] is None


def test_run_with_flops_preset_reports_qbf(capsys):
    code, out = run_cli(
        capsys,
        'run',
        '--qubits',
        '5',
        '--ranks',
        '2',
        '--runs',
        '1',
        '--flops',
        'a64fx',
        '--mode',
        'sequential',
    )
    assert code == cli.EXIT_OK
    assert json.loads(out)['qbf'] > 0


def test_run_writes_csv_to_file(tmp_path, capsys):
    output = tmp_path / 'report.csv'
    code, out = run_cli(
        capsys,
        'run',
        '--circuit',
        'qsb',
        '--qubits',
        '5',
        '--ranks',
        '2',
        '--seed',
        '4',
        '--runs',
        '1',
        '--report',
        'csv',
        '--output',
        str(output),
    )
    assert code == cli.EXIT_OK
    assert out == ''
    frame = pd.read_csv(io.StringIO(output.read_text()))
    assert frame['seed'].tolist() == [4]
    assert frame['circuit_kind'].tolist() == ['qsb']


@pytest.mark.parametrize(
    ('name', 'expected'), [('original', 1024), ('swapped', 512), ('fused', 384)]
)
def test_predict_four_qubit_examples(capsys, example_files, name, expected):
    code, out = run_cli(
        capsys,
        'predict',
        '--circuit',
        'file',
        '--file',
        str(example_files[name]),
        '--qubits',
        '4',
        '--ranks',
        '4',
        '--fuse',
        'off',
    )
    assert code == cli.EXIT_OK
    assert json.loads(out)['total_bytes'] == expected


def test_predict_with_fusing_localizes_example(capsys, example_files):
    code, out = run_cli(
        capsys,
        'predict',
        '--circuit',
        'file',
        '--file',
        str(example_files['original']),
        '--qubits',
        '4',
        '--ranks',
        '4',
    )
    assert code == cli.EXIT_OK
    assert json.loads(out)['total_bytes'] == 384


def test_verify_passes(capsys):
    code, out = run_cli(
        capsys, 'verify', '--circuit', 'qv', '--qubits', '6', '--ranks', '4'
    )
    assert code == cli.EXIT_OK
    assert json.loads(out)['passed'] is True


def test_verify_failure_exits_with_4(capsys, monkeypatch):
    localize = dvsim_workflow.localize_with_layout

    def corrupted(circuit, layout, cfg=None):
        localized = localize(circuit, layout, cfg)
        index = next(k for k, o in enumerate(localized.origin) if o is not None)
        ops = list(localized.circuit.ops)
        ops[index] = GateOp.dense2(*ops[index].qubits, np.eye(4))
        return dataclasses.replace(
            localized,
            circuit=dataclasses.replace(localized.circuit, ops=tuple(ops)),
        )

    monkeypatch.setattr(dvsim_workflow, 'localize_with_layout', corrupted)
    code, out = run_cli(
        capsys,
        'verify',
        '--circuit',
        'qv',
        '--seed',
        '5',
        '--qubits',
        '6',
        '--ranks',
        '4',
    )
    assert code == cli.EXIT_VERIFICATION
    summary = json.loads(out)
    assert summary['passed'] is False
    assert summary['diverging_op'] is not None


def test_protocol_error_exits_with_3(capsys, monkeypatch):
    monkeypatch.setattr(
        dvsim_workflow,
        'predict_comm_bytes',
        lambda circuit, layout: CommPrediction.from_per_gate([(0, 1)]),
    )
    code, out = run_cli(capsys, 'run', '--qubits', '5', '--ranks', '2', '--runs', '1')
    assert code == cli.EXIT_PROTOCOL
    assert out == ''


def test_global_dense_gate_without_fusing_exits_with_2(capsys, tmp_path):
    path = tmp_path / 'dense.json'
    save_circuit(Circuit(n=4, ops=(GateOp.dense2(0, 3, np.eye(4)),)), path)
    code, _ = run_cli(
        capsys,
        'run',
        '--circuit',
        'file',
        '--file',
        str(path),
        '--qubits',
        '4',
        '--ranks',
        '2',
        '--fuse',
        'off',
    )
    assert code == cli.EXIT_USAGE


@pytest.mark.parametrize(
    'argv',
    [
        ('run', '--qubits', '6', '--ranks', '3'),
        ('run', '--qubits', '6', '--fuse', 'wide'),
        ('run', '--qubits', '4', '--ranks', '2', '--fuse', '2'),
        ('run', '--qubits', '4', '--circuit', 'file'),
        ('run', '--circuit', 'file', '--file', 'missing.json', '--ranks', '2'),
        ('predict', '--circuit', 'file', '--file', 'missing.json', '--qubits', '4'),
        ('run', '--circuit', 'qv', '--ranks', '2'),
        ('qbf', '--qubits', '30', '--gates', '1', '--exetime', '0', '--flops', '1e9'),
        ('qbf', '--qubits', '30', '--gates', '1', '--exetime', '1', '--flops', 'x'),
        ('scale', '--scaling', 'weak', '--max-ranks', '4'),
        ('scale', '--scaling', 'strong', '--max-ranks', '4'),
        ('scale', '--scaling', 'strong', '--qubits', '6', '--max-ranks', '6'),
    ],
)
def test_invalid_arguments_exit_with_2(capsys, argv):
    code, out = run_cli(capsys, *argv)
    assert code == cli.EXIT_USAGE
    assert out == ''


def test_usage_error_from_argparse(capsys):
    with pytest.raises(SystemExit) as info:
        cli.main(['run', '--qubits', '4', '--unknown'])
    assert info.value.code == 2


def test_qbf_command(capsys):
    code, out = run_cli(
        capsys,
        'qbf',
        '--qubits',
        '30',
        '--gates',
        '1',
        '--exetime',
        '1',
        '--flops',
        str(2.0**34),
        '--devices',
        '2',
    )
    assert code == cli.EXIT_OK
    report = json.loads(out)
    assert report['qbf'] == 1.0
    assert report['effective_bandwidth'] == 2.0**35
    assert report['total_flops'] == 2.0**35


def test_weak_scaling_keeps_bytes_per_rank(capsys):
    code, out = run_cli(
        capsys,
        'scale',
        '--scaling',
        'weak',
        '--circuit',
        'gate',
        '--local-qubits',
        '4',
        '--max-ranks',
        '4',
        '--fuse',
        'off',
        '--runs',
        '1',
    )
    assert code == cli.EXIT_OK
    rows = json.loads(out)
    assert [row['qubits'] for row in rows] == [4, 5, 6]
    assert [row['ranks'] for row in rows] == [1, 2, 4]
    assert [row['comm_bytes_per_rank'] for row in rows] == [0, 2**8, 2**8]


def test_strong_scaling_as_csv(capsys):
    code, out = run_cli(
        capsys,
        'scale',
        '--scaling',
        'strong',
        '--qubits',
        '6',
        '--max-ranks',
        '2',
        '--runs',
        '1',
        '--report',
        'csv',
    )
    assert code == cli.EXIT_OK
    frame = pd.read_csv(io.StringIO(out))
    assert frame['ranks'].tolist() == [1, 2]
    assert frame['qubits'].tolist() == [6, 6]


def test_file_circuit_takes_qubit_count_from_file(capsys, example_files):
    code, out = run_cli(
        capsys,
        'predict',
        '--circuit',
        'file',
        '--file',
        str(example_files['original']),
        '--ranks',
        '4',
        '--fuse',
        'off',
    )
    assert code == cli.EXIT_OK
    report = json.loads(out)
    assert report['n'] == 4
    assert report['total_bytes'] == 1024


def test_file_circuit_with_other_qubit_count_exits_with_2(capsys, example_files):
    code, out = run_cli(
        capsys,
        'predict',
        '--circuit',
        'file',
        '--file',
        str(example_files['original']),
        '--qubits',
        '5',
        '--ranks',
        '4',
    )
    assert code == cli.EXIT_USAGE
    assert out == ''
