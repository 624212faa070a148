# SPDX-License-Identifier: BSD-3-Clause
# Copyright (c) 2024 dvsim contributors
"""Reading and writing circuits and reports."""

from .circuit_json import (
    circuit_from_json,
    circuit_schema,
    circuit_to_json,
    load_circuit,
    save_circuit,
)
from .report import (
    CommPredictionReport,
    QbfReport,
    RunReport,
    ScalingRow,
    VerificationSummary,
    render,
    reports_to_csv,
)

__all__ = [
    "CommPredictionReport",
    "QbfReport",
    "RunReport",
    "ScalingRow",
    "VerificationSummary",
    "circuit_from_json",
    "circuit_schema",
    "circuit_to_json",
    "load_circuit",
    "save_circuit",
    "render",
    "reports_to_csv",
]
