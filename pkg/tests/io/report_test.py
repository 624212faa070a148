# SPDX-License-Identifier: BSD-3-Clause
# Copyright (c) 2024 dvsim contributors
import io
import json

import pandas as pd
import pytest

from dvsim.io import CommPredictionReport, QbfReport, ScalingRow, render
from dvsim.metrics import CommPrediction


def prediction_report():
    prediction = CommPrediction.from_per_gate([(0, 256), (3, 128)])
    return CommPredictionReport.from_prediction(prediction, n=4, ranks=4)


def scaling_rows():
    return [
        ScalingRow(
            qubits=10 + p,
            ranks=2**p,
            elapsed_mean_s=0.1 * (p + 1),
            comm_bytes=2 ** (14 + p) if p else 0,
            comm_bytes_per_rank=2**14 if p else 0,
            effective_bandwidth=1e9,
        )
        for p in range(3)
    ]


def test_prediction_report_json():
    payload = json.loads(render(prediction_report()))
    assert payload == {
        'n': 4,
        'ranks': 4,
        'per_gate': [[0, 256], [3, 128]],
        'total_bytes': 384,
    }


def test_list_of_reports_renders_as_json_array():
    payload = json.loads(render(scaling_rows()))
    assert [row['ranks'] for row in payload] == [1, 2, 4]


def test_csv_has_one_row_per_report():
    frame = pd.read_csv(io.StringIO(render(scaling_rows(), fmt='csv')))
    assert list(frame.columns) == [
        'qubits',
        'ranks',
        'elapsed_mean_s',
        'comm_bytes',
        'comm_bytes_per_rank',
        'effective_bandwidth',
    ]
    assert frame['comm_bytes'].tolist() == [0, 2**15, 2**16]


def test_csv_joins_list_fields():
    frame = pd.read_csv(io.StringIO(render(prediction_report(), fmt='csv')))
    assert frame['per_gate'].tolist() == ['0:256;3:128']
    assert frame['total_bytes'].tolist() == [384]


def test_reports_are_frozen():
    report = QbfReport(
        n=30,
        gates=1,
        exetime_s=1.0,
        total_flops=2.0**35,
        qbf=1.0,
        effective_bandwidth=2.0**35,
    )
    with pytest.raises(ValueError, match='frozen'):
        report.qbf = 2.0


def test_unknown_format_raises():
    with pytest.raises(ValueError, match="Unknown report format 'xml'"):
        render(prediction_report(), fmt='xml')


def test_json_array_keeps_fields_of_each_report_type():
    reports = [prediction_report(), *scaling_rows()[:1]]
    payload = json.loads(render(reports))
    assert payload[0]['total_bytes'] == 384
    assert payload[1]['comm_bytes_per_rank'] == 0
    assert render(reports).startswith('[\n  {')
