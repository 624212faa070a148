# SPDX-License-Identifier: BSD-3-Clause
# Copyright (c) 2024 dvsim contributors

"""This module defines the domain types used in dvsim.

The domain types are used to define parameters and to request results from a Sciline
pipeline.
"""

from typing import NewType

import numpy as np

from .circuits import Circuit
from .cluster import ExecutionMode, TimedExecution
from .dist_ops import ChunkPlan
from .io.report import (
    CommPredictionReport,
    QbfReport,
    RunReport,
    VerificationSummary,
)
from .layout import GlobalLayout
from .metrics import CommPrediction
from .transpile import LocalizedCircuit, TranspileConfig

# 1 Workflow parameters

NumQubits = NewType("NumQubits", int)
"""Number of qubits ``n``."""

NumRanks = NewType("NumRanks", int)
"""Number of simulated ranks, a power of two."""

Seed = NewType("Seed", int | None)
"""Seed of random circuits. None draws fresh entropy."""

Depth = NewType("Depth", int)
"""Number of layers of Quantum Volume circuits."""

CircuitKind = NewType("CircuitKind", str)
"""Circuit to run: ``hadamard``, ``qv``, ``qsb``, ``gate`` or ``file``."""

CircuitFilename = NewType("CircuitFilename", str | None)
"""Circuit JSON file, used with circuit kind ``file``."""

TargetQubit = NewType("TargetQubit", int | None)
"""Target of the single-gate circuit. None selects the highest qubit."""

NumRepeats = NewType("NumRepeats", int)
"""Number of gates of the single-gate circuit."""

FuseSetting = NewType("FuseSetting", str)
"""``auto`` (fuse all global qubits), ``off``, or an explicit width."""

RestoreLayout = NewType("RestoreLayout", bool)
"""Return all qubits to their home positions at the end of the circuit."""

ChunkCount = NewType("ChunkCount", int | None)
"""Chunks per global gate exchange. None selects ``min(16, 2**m)``."""

TransferBlockLength = NewType("TransferBlockLength", int | None)
"""Amplitudes per fused-swap transfer block. None sends one block per partner."""

Pipelined = NewType("Pipelined", bool)
"""Use double buffering for fused swaps."""

NumRuns = NewType("NumRuns", int)
"""Number of timed runs. The first run is excluded from the mean."""

PeakFlops = NewType("PeakFlops", float | None)
"""Theoretical peak FLOP/s of all devices together. None omits the B/F ratio."""

WatchdogSeconds = NewType("WatchdogSeconds", float)
"""Maximum time a rank waits for its partner."""

OracleQubitLimit = NewType("OracleQubitLimit", int)
"""Largest circuit verified against the single-rank reference."""

# 2 Intermediate and final results

LogicalCircuit = NewType("LogicalCircuit", Circuit)
"""Circuit on logical qubits, as generated or loaded."""

RankLayout = NewType("RankLayout", GlobalLayout)
"""Identity layout of the state over the ranks."""

TranspileSettings = NewType("TranspileSettings", TranspileConfig | None)
"""Settings of the transpiler. None executes the logical circuit directly."""

FinalState = NewType("FinalState", np.ndarray)
"""Assembled physical state of the distributed run."""

ReferenceState = NewType("ReferenceState", np.ndarray)
"""State of the logical circuit on a single rank."""

__all__ = [
    "ChunkCount",
    "ChunkPlan",
    "CircuitFilename",
    "CircuitKind",
    "CommPrediction",
    "CommPredictionReport",
    "Depth",
    "ExecutionMode",
    "FinalState",
    "FuseSetting",
    "LocalizedCircuit",
    "LogicalCircuit",
    "NumQubits",
    "NumRanks",
    "NumRepeats",
    "NumRuns",
    "OracleQubitLimit",
    "PeakFlops",
    "Pipelined",
    "QbfReport",
    "RankLayout",
    "ReferenceState",
    "RestoreLayout",
    "RunReport",
    "Seed",
    "TargetQubit",
    "TimedExecution",
    "TransferBlockLength",
    "TranspileSettings",
    "VerificationSummary",
    "WatchdogSeconds",
]
