# SPDX-License-Identifier: BSD-3-Clause
# Copyright (c) 2024 dvsim contributors
"""Comparison of distributed runs with a single-rank reference."""

from __future__ import annotations

from collections import deque

import numpy as np

from .circuits import Circuit, GateOp
from .cluster import state_digest
from .io.report import VerificationSummary
from .layout import GlobalLayout
from .state import Amplitudes
from .transpile import LocalizedCircuit, map_logical_op

DEFAULT_TOLERANCE = 1e-12


class VerificationError(AssertionError):
    """Raised when a distributed state does not match the reference."""

    def __init__(self, summary: VerificationSummary) -> None:
        location = (
            '' if summary.diverging_op is None else f" at op {summary.diverging_op}"
        )
        super().__init__(
            f"Distributed state differs from the reference{location}: "
            f"max |delta| = {summary.max_abs_diff:.3g}, "
            f"|norm - 1| = {summary.norm_error:.3g} "
            f"(tolerance {summary.tolerance:.1g})."
        )
        self.summary = summary


def to_logical_order(vector: Amplitudes, layout: GlobalLayout) -> Amplitudes:
    """Reorder a physical state vector so that bit ``q`` is logical qubit ``q``."""
    n = layout.n
    if len(vector) != 1 << n:
        raise ValueError(f"Expected {1 << n} amplitudes, got {len(vector)}.")
    if layout.is_identity:
        return vector
    axes = [0] * n
    for logical in range(n):
        axes[n - 1 - logical] = n - 1 - layout.resolve(logical)
    return vector.reshape([2] * n).transpose(axes).ravel()


def compare_states(
    distributed: Amplitudes, reference: Amplitudes, final_layout: GlobalLayout
) -> tuple[float, float]:
    """Return the maximum amplitude difference and the norm error.

    Parameters
    ----------
    distributed:
        Assembled physical state of a distributed run.
    reference:
        State of the logical circuit on a single rank.
    final_layout:
        Position of each logical qubit at the end of the distributed run.

    Returns
    -------
    :
        ``max |distributed - reference|`` after undoing the permutation, and
        ``| ||distributed||^2 - 1 |``.
    """
    logical = to_logical_order(distributed, final_layout)
    if logical.shape != reference.shape:
        raise ValueError(
            f"State shapes differ: {logical.shape} != {reference.shape}."
        )
    max_abs_diff = float(np.max(np.abs(logical - reference))) if len(logical) else 0.0
    norm_error = abs(float(np.vdot(logical, logical).real) - 1.0)
    return max_abs_diff, norm_error


def locate_divergence(
    logical: Circuit,
    localized: LocalizedCircuit,
    initial_layout: GlobalLayout | None = None,
) -> int | None:
    """Return the index of the first localized op that breaks the correspondence.

    The localized circuit is replayed while tracking the qubit permutation.
    Each op must be an inserted swap or the next unimplemented piece of its
    logical op mapped through the current permutation, and the ops on each
    logical qubit must keep their order.

    Returns
    -------
    :
        The index of the first offending op, ``len(localized.circuit)`` if
        logical ops are missing or the final layout is wrong, or None.
    """
    layout = initial_layout or GlobalLayout(n=logical.n, p=localized.final_layout.p)
    expected: dict[int, deque[GateOp]] = {}
    last_on_qubit: dict[int, int] = {}
    done: set[int] = set()
    ops = localized.circuit.ops
    for index, (op, origin) in enumerate(zip(ops, localized.origin, strict=True)):
        if origin is None:
            if not op.kind.is_swap:
                return index
            layout = layout.with_swapped_positions(op.swap_pairs())
            continue
        if not 0 <= origin < len(logical) or origin in done:
            return index
        source = logical.ops[origin]
        if origin not in expected:
            if any(last_on_qubit.get(q, -1) > origin for q in source.touched):
                return index
            expected[origin] = deque(map_logical_op(source, layout))
            for q in source.touched:
                last_on_qubit[q] = origin
        queue = expected[origin]
        if not queue or queue.popleft() != op:
            return index
        if not queue:
            done.add(origin)
    if len(done) != len(logical) or layout.perm != localized.final_layout.perm:
        return len(ops)
    return None


def verify_localized(
    logical: Circuit,
    localized: LocalizedCircuit,
    distributed: Amplitudes,
    reference: Amplitudes,
    *,
    tolerance: float = DEFAULT_TOLERANCE,
    raise_on_failure: bool = False,
) -> VerificationSummary:
    """Compare a distributed state with the reference and summarize.

    Raises
    ------
    VerificationError
        If ``raise_on_failure`` and the states differ by more than
        ``tolerance``.
    """
    max_abs_diff, norm_error = compare_states(
        distributed, reference, localized.final_layout
    )
    passed = max_abs_diff <= tolerance and norm_error <= tolerance
    diverging = None if passed else locate_divergence(logical, localized)
    summary = VerificationSummary(
        n=logical.n,
        ranks=localized.final_layout.ranks,
        max_abs_diff=max_abs_diff,
        norm_error=norm_error,
        tolerance=tolerance,
        passed=passed,
        diverging_op=diverging,
        digest=state_digest(to_logical_order(distributed, localized.final_layout)),
        reference_digest=state_digest(reference),
    )
    if raise_on_failure and not passed:
        raise VerificationError(summary)
    return summary
