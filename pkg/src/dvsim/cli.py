# SPDX-License-Identifier: BSD-3-Clause
# Copyright (c) 2024 dvsim contributors
"""Command line front end.

Exit codes: 0 on success, 2 for invalid arguments, 3 for protocol errors
between ranks and 4 if a distributed state does not match the reference.
"""

from __future__ import annotations

import logging
import sys
from argparse import ArgumentParser, BooleanOptionalAction, Namespace
from collections.abc import Sequence
from pathlib import Path

import sciline

from .cluster import ExecutionMode
from .io.circuit_json import load_circuit
from .io.report import (
    CommPredictionReport,
    QbfReport,
    Report,
    RunReport,
    VerificationSummary,
    render,
)
from .layout import GlobalLayout
from .logging import get_logger
from .metrics import CommPrediction, QbfInput, effective_bandwidth, qbf, resolve_flops
from .scaling import scaling_rows, strong_scaling, weak_scaling
from .transport import ProtocolError
from .types import (
    ChunkCount,
    CircuitFilename,
    CircuitKind,
    Depth,
    FuseSetting,
    NumQubits,
    NumRanks,
    NumRepeats,
    NumRuns,
    OracleQubitLimit,
    PeakFlops,
    Pipelined,
    RankLayout,
    RestoreLayout,
    Seed,
    TargetQubit,
    TransferBlockLength,
)
from .verify import VerificationError
from .workflow import CIRCUIT_KINDS, DistributedRunWorkflow

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_PROTOCOL = 3
EXIT_VERIFICATION = 4


def _add_circuit_arguments(parser: ArgumentParser, *, qubits: bool = True) -> None:
    parser.add_argument(
        "--circuit",
        choices=CIRCUIT_KINDS,
        default="hadamard",
        help="Circuit to run. 'gate' repeats a Hadamard gate on one qubit.",
    )
    parser.add_argument("--file", help="Circuit JSON file for --circuit file.")
    if qubits:
        parser.add_argument(
            "--qubits",
            type=int,
            default=None,
            help="Qubits n. Defaults to the qubit count of --file.",
        )
    parser.add_argument("--ranks", type=int, default=1, help="Ranks, a power of 2.")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--depth", type=int, default=10, help="QV layers.")
    parser.add_argument("--target", type=int, default=None, help="Qubit for 'gate'.")
    parser.add_argument("--repeats", type=int, default=1, help="Gates for 'gate'.")
    parser.add_argument(
        "--fuse",
        default="auto",
        help="'auto' fuses all global qubits, 'off' runs the circuit unchanged, "
        "an integer sets the fused-swap width.",
    )
    parser.add_argument(
        "--restore",
        action=BooleanOptionalAction,
        default=True,
        help="Return qubits to their home positions at the end.",
    )
    parser.add_argument("--chunks", type=int, default=None)
    parser.add_argument("--block-len", type=int, default=None)
    parser.add_argument(
        "--mode",
        choices=[mode.value for mode in ExecutionMode],
        default=ExecutionMode.threaded.value,
    )
    parser.add_argument("--no-pipeline", action="store_true")


def _add_output_arguments(parser: ArgumentParser) -> None:
    parser.add_argument("--report", choices=("json", "csv"), default="json")
    parser.add_argument("--output", default=None, help="Write to a file, not stdout.")
    parser.add_argument("-v", "--verbose", action="count", default=0)


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(
        prog="dvsim",
        description="Distributed state-vector simulation on simulated ranks.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="Execute a circuit and report timings.")
    _add_circuit_arguments(run)
    run.add_argument("--runs", type=int, default=6)
    run.add_argument("--flops", default=None, help="FLOP/s per device or a preset.")
    run.add_argument("--devices", type=int, default=None, help="Default: ranks.")
    run.add_argument("--verify", action="store_true")
    _add_output_arguments(run)

    predict = commands.add_parser("predict", help="Predict communicated bytes.")
    _add_circuit_arguments(predict)
    _add_output_arguments(predict)

    verify = commands.add_parser("verify", help="Compare with a single rank run.")
    _add_circuit_arguments(verify)
    verify.add_argument("--oracle-limit", type=int, default=12)
    _add_output_arguments(verify)

    ratio = commands.add_parser("qbf", help="Quantum B/F ratio of a measurement.")
    ratio.add_argument("--qubits", type=int, required=True)
    ratio.add_argument("--gates", type=int, required=True)
    ratio.add_argument("--exetime", type=float, required=True, help="Seconds.")
    ratio.add_argument("--flops", required=True, help="FLOP/s per device or preset.")
    ratio.add_argument("--devices", type=int, default=1)
    _add_output_arguments(ratio)

    scale = commands.add_parser("scale", help="Weak or strong scaling sweep.")
    scale.add_argument("--scaling", choices=("weak", "strong"), required=True)
    _add_circuit_arguments(scale, qubits=False)
    scale.add_argument("--local-qubits", type=int, default=None, help="Weak: m.")
    scale.add_argument("--qubits", type=int, default=None, help="Strong: n.")
    scale.add_argument("--max-ranks", type=int, required=True)
    scale.add_argument("--runs", type=int, default=6)
    _add_output_arguments(scale)
    return parser


def _parameters(args: Namespace) -> dict:
    return {
        CircuitKind: args.circuit,
        CircuitFilename: args.file,
        Seed: args.seed,
        Depth: args.depth,
        TargetQubit: args.target,
        NumRepeats: args.repeats,
        FuseSetting: args.fuse,
        RestoreLayout: args.restore,
        ChunkCount: args.chunks,
        TransferBlockLength: args.block_len,
        ExecutionMode: ExecutionMode(args.mode),
        Pipelined: not args.no_pipeline,
    }


def _num_qubits(args: Namespace) -> int:
    if args.qubits is not None:
        return args.qubits
    if args.circuit == "file" and args.file is not None:
        return load_circuit(args.file).n
    raise ValueError("--qubits is required unless --circuit file gives the count.")


def _workflow(args: Namespace) -> sciline.Pipeline:
    wf = DistributedRunWorkflow()
    for key, value in _parameters(args).items():
        wf[key] = value
    wf[NumQubits] = _num_qubits(args)
    wf[NumRanks] = args.ranks
    return wf


def cmd_run(args: Namespace) -> list[Report]:
    """Execute a circuit on the simulated cluster."""
    wf = _workflow(args)
    wf[NumRuns] = args.runs
    if args.flops is not None:
        wf[PeakFlops] = resolve_flops(args.flops, args.devices or args.ranks)
    if not args.verify:
        return [wf.compute(RunReport)]
    results = wf.compute((RunReport, VerificationSummary))
    summary = results[VerificationSummary]
    if not summary.passed:
        raise VerificationError(summary)
    return [results[RunReport]]


def cmd_predict(args: Namespace) -> list[Report]:
    """Predict the communication of the circuit that ``run`` would execute."""
    wf = _workflow(args)
    results = wf.compute((CommPrediction, RankLayout))
    layout: GlobalLayout = results[RankLayout]
    return [
        CommPredictionReport.from_prediction(
            results[CommPrediction], n=layout.n, ranks=layout.ranks
        )
    ]


def cmd_verify(args: Namespace) -> list[Report]:
    """Run once distributed and once on a single rank and compare."""
    wf = _workflow(args)
    wf[NumRuns] = 1
    wf[OracleQubitLimit] = args.oracle_limit
    summary = wf.compute(VerificationSummary)
    if not summary.passed:
        raise VerificationError(summary)
    return [summary]


def cmd_qbf(args: Namespace) -> list[Report]:
    """Compute the quantum B/F ratio and effective bandwidth."""
    total_flops = resolve_flops(args.flops, args.devices)
    measurement = QbfInput(
        n=args.qubits, gates=args.gates, exetime=args.exetime, total_flops=total_flops
    )
    return [
        QbfReport(
            n=args.qubits,
            gates=args.gates,
            exetime_s=args.exetime,
            total_flops=total_flops,
            qbf=qbf(measurement),
            effective_bandwidth=effective_bandwidth(
                args.qubits, args.gates, args.exetime
            ),
        )
    ]


def cmd_scale(args: Namespace) -> list[Report]:
    """Run a weak or strong scaling sweep up to ``--max-ranks`` ranks."""
    max_ranks = args.max_ranks
    if max_ranks < 1 or max_ranks & (max_ranks - 1):
        raise ValueError(f"--max-ranks must be a power of 2, got {max_ranks}.")
    max_p = max_ranks.bit_length() - 1
    params = _parameters(args)
    params[NumRuns] = args.runs
    if args.scaling == "weak":
        if args.local_qubits is None:
            raise ValueError("Weak scaling requires --local-qubits.")
        da = weak_scaling(args.circuit, args.local_qubits, range(max_p + 1), params)
    else:
        if args.qubits is None:
            raise ValueError("Strong scaling requires --qubits.")
        da = strong_scaling(args.circuit, args.qubits, range(max_p + 1), params)
    return list(scaling_rows(da))


COMMANDS = {
    "run": cmd_run,
    "predict": cmd_predict,
    "verify": cmd_verify,
    "qbf": cmd_qbf,
    "scale": cmd_scale,
}


def _emit(text: str, output: str | None) -> None:
    if output is None:
        print(text)
    else:
        Path(output).write_text(text + "\n")


def main(argv: Sequence[str] | None = None) -> int:
    """Run the command line interface and return the exit code."""
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        stream=sys.stderr,
        level=max(logging.DEBUG, logging.WARNING - 10 * args.verbose),
        format="%(levelname)s %(name)s: %(message)s",
    )
    logger = get_logger()
    try:
        reports = COMMANDS[args.command](args)
    except VerificationError as err:
        _emit(render(err.summary, args.report), args.output)
        logger.error("%s", err)
        return EXIT_VERIFICATION
    except ProtocolError as err:
        logger.error("Protocol error: %s", err)
        return EXIT_PROTOCOL
    except ValueError as err:
        logger.error("%s", err)
        return EXIT_USAGE
    _emit(render(reports if len(reports) > 1 else reports[0], args.report), args.output)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
