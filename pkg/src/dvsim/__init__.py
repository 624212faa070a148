# SPDX-License-Identifier: BSD-3-Clause
# Copyright (c) 2024 dvsim contributors
"""
Distributed full state-vector simulation of quantum circuits on simulated ranks.
"""

import importlib.metadata

from . import circuits, cluster, dist_ops, io, layout, metrics, scaling, transpile
from . import verify, workflow
from .circuits import Circuit, GateKind, GateOp
from .cluster import ExecutionMode, run_circuit, run_reference, time_execution
from .layout import GlobalLayout
from .transpile import TranspileConfig, localize
from .transport import ProtocolError, RendezvousTransport
from .verify import VerificationError
from .workflow import DistributedRunWorkflow

try:
    __version__ = importlib.metadata.version("dvsim")
except importlib.metadata.PackageNotFoundError:
    __version__ = "0.0.0"

del importlib

providers = (*workflow.providers,)
"""Sciline providers of a distributed run."""

__all__ = [
    "__version__",
    "Circuit",
    "DistributedRunWorkflow",
    "ExecutionMode",
    "GateKind",
    "GateOp",
    "GlobalLayout",
    "ProtocolError",
    "RendezvousTransport",
    "TranspileConfig",
    "VerificationError",
    "circuits",
    "cluster",
    "dist_ops",
    "io",
    "layout",
    "localize",
    "metrics",
    "providers",
    "run_circuit",
    "run_reference",
    "scaling",
    "time_execution",
    "transpile",
    "verify",
    "workflow",
]
