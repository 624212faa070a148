# SPDX-License-Identifier: BSD-3-Clause
# Copyright (c) 2024 dvsim contributors
import json

import numpy as np
import pytest

from dvsim.circuits import Circuit, GateOp, example_4q_circuits, gen_random_circuit
from dvsim.io import (
    circuit_from_json,
    circuit_schema,
    circuit_to_json,
    load_circuit,
    save_circuit,
)


def test_parse_named_gates():
    text = json.dumps(
        {
            'n': 3,
            'ops': [
                {'kind': 'H', 'q': 0},
                {'kind': 'RX', 'q': 1, 'theta': 0.5},
                {'kind': 'RZ', 'q': 2, 'theta': -1.25},
                {'kind': 'CNOT', 'control': 0, 'target': 2},
                {'kind': 'SWAP', 'i': 1, 'j': 2},
            ],
        }
    )
    circuit = circuit_from_json(text)
    assert circuit == Circuit(
        n=3,
        ops=(
            GateOp.h(0),
            GateOp.rx(1, 0.5),
            GateOp.rz(2, -1.25),
            GateOp.cnot(0, 2),
            GateOp.swap(1, 2),
        ),
    )
    assert circuit.seed is None


def test_parse_dense_and_fused_swap():
    entries = [[0, 0]] * 16
    for k in range(4):
        entries[5 * k] = [0, 1]
    text = json.dumps(
        {
            'n': 4,
            'seed': 17,
            'ops': [
                {'kind': 'DENSE1', 'q': 3, 'u': [[0, 0], [1, 0], [1, 0], [0, 0]]},
                {'kind': 'DENSE2', 'q0': 0, 'q1': 1, 'u': entries},
                {'kind': 'FUSED_SWAP', 'p': 0, 'q': 2, 's': 2},
            ],
        }
    )
    circuit = circuit_from_json(text)
    assert circuit.seed == 17
    np.testing.assert_array_equal(circuit.ops[0].matrix, [[0, 1], [1, 0]])
    np.testing.assert_array_equal(circuit.ops[1].matrix, 1j * np.eye(4))
    assert circuit.ops[2] == GateOp.fused_swap(0, 2, 2)


def test_written_circuit_is_read_back(tmp_path):
    path = tmp_path / 'circuit.json'
    for circuit in (
        *vars(example_4q_circuits()).values(),
        gen_random_circuit(5, 50, seed=3),
    ):
        save_circuit(circuit, path)
        assert load_circuit(path) == circuit


def test_written_json_uses_documented_field_names():
    circuit = Circuit(n=2, ops=(GateOp.cnot(1, 0),), seed=4)
    assert json.loads(circuit_to_json(circuit)) == {
        'n': 2,
        'seed': 4,
        'ops': [{'kind': 'CNOT', 'control': 1, 'target': 0}],
    }


@pytest.mark.parametrize(
    'op',
    [
        {'kind': 'TOFFOLI', 'q': 0},
        {'kind': 'H'},
        {'kind': 'H', 'q': 0, 'theta': 1.0},
        {'kind': 'DENSE1', 'q': 0, 'u': [[1, 0]] * 3},
        {'kind': 'RX', 'q': 0, 'theta': 'half'},
    ],
    ids=['unknown-kind', 'missing-field', 'extra-field', 'short-matrix', 'bad-angle'],
)
def test_invalid_records_are_rejected(op):
    with pytest.raises(ValueError, match='validation error'):
        circuit_from_json(json.dumps({'n': 2, 'ops': [op]}))


def test_invalid_operand_is_rejected():
    with pytest.raises(ValueError, match='Invalid op 0'):
        circuit_from_json(json.dumps({'n': 2, 'ops': [{'kind': 'H', 'q': 2}]}))


def test_malformed_json_is_rejected():
    with pytest.raises(ValueError, match='Invalid JSON'):
        circuit_from_json('{"n": 2, "ops": [')


def test_missing_file_raises_value_error(tmp_path):
    path = tmp_path / 'missing.json'
    with pytest.raises(ValueError, match='Cannot read circuit file .*missing.json'):
        load_circuit(path)


def test_schema_lists_all_kinds():
    schema = circuit_schema()
    assert schema['required'] == ['n']
    kinds = {
        definition['properties']['kind']['const']
        for name, definition in schema['$defs'].items()
        if name.endswith('Record')
    }
    assert kinds == {
        'H',
        'RX',
        'RZ',
        'CNOT',
        'DENSE1',
        'DENSE2',
        'SWAP',
        'FUSED_SWAP',
    }
