# SPDX-License-Identifier: BSD-3-Clause
# Copyright (c) 2024 dvsim contributors
"""Insertion of fused swaps so that gates act on local qubits.

The transpiler schedules gates greedily.
In each pass it walks the pending gates in order and emits every gate that is
executable under the current qubit permutation and does not share a qubit with
an earlier pending gate.
When the first pending gate needs a global qubit, the top local positions are
exchanged with global positions by a fused swap and the permutation is
updated.
"""

from __future__ import annotations

from collections.abc import Iterator
from dataclasses import dataclass

from .circuits import Circuit, GateKind, GateOp
from .layout import GlobalLayout
from .logging import get_logger


@dataclass(frozen=True)
class TranspileConfig:
    """Settings of :func:`localize`.

    Parameters
    ----------
    s:
        Width of inserted fused swaps. Defaults to the number of global qubits.
    restore_layout:
        Append swaps returning every logical qubit to its home position.
    """

    s: int | None = None
    restore_layout: bool = True

    def width(self, layout: GlobalLayout) -> int:
        """Return the fuse width for a layout."""
        if self.s is None:
            return layout.p
        if layout.p >= 1 and not 1 <= self.s <= layout.p:
            raise ValueError(
                f"Fuse width must be between 1 and {layout.p} for {layout.ranks} "
                f"ranks, got {self.s}."
            )
        return self.s


@dataclass(frozen=True)
class LocalizedCircuit:
    """A physical circuit derived from a logical circuit.

    Parameters
    ----------
    circuit:
        Operations on physical positions.
    origin:
        For each operation, the index of the logical operation it implements,
        or None for an inserted swap.
    final_layout:
        Position of each logical qubit after the circuit.
    """

    circuit: Circuit
    origin: tuple[int | None, ...]
    final_layout: GlobalLayout

    @property
    def inserted_fused_swaps(self) -> int:
        return sum(
            1
            for op, origin in zip(self.circuit.ops, self.origin, strict=True)
            if origin is None and op.kind is GateKind.FUSED_SWAP
        )

    @classmethod
    def unchanged(cls, circuit: Circuit, layout: GlobalLayout) -> LocalizedCircuit:
        """Wrap a circuit that is executed as it is."""
        return cls(
            circuit=circuit,
            origin=tuple(range(len(circuit))),
            final_layout=layout,
        )


def _needed(op: GateOp) -> tuple[int, ...]:
    """Logical qubits that must be local for the op to execute."""
    if op.kind is GateKind.CNOT:
        return (op.qubits[1],)
    if op.kind.is_swap:
        return ()
    return op.qubits


def map_logical_op(op: GateOp, layout: GlobalLayout) -> list[GateOp]:
    if op.kind is not GateKind.FUSED_SWAP:
        return [op.with_qubits(layout.map_qubits(op.qubits))]
    pairs = [(layout.resolve(a), layout.resolve(b)) for a, b in op.swap_pairs()]
    p0, q0 = pairs[0]
    if all(a == p0 + i and b == q0 + i for i, (a, b) in enumerate(pairs)):
        return [GateOp.fused_swap(p0, q0, op.width)]
    return [GateOp.swap(a, b) for a, b in pairs]


class _Scheduler:
    def __init__(self, circuit: Circuit, layout: GlobalLayout, s: int) -> None:
        self.ops = circuit.ops
        self.layout = layout
        self.s = s
        self.m = layout.m

    def _executable(self, op: GateOp) -> bool:
        return all(self.layout.resolve(q) < self.m for q in _needed(op))

    def _move(self, op: GateOp) -> Iterator[tuple[GateOp, int | None]]:
        self.layout = self.layout.with_swapped_positions(op.swap_pairs())
        yield op, None

    def _relocate(self, op: GateOp, index: int) -> Iterator[tuple[GateOp, int | None]]:
        positions = [self.layout.resolve(q) for q in _needed(op)]
        locals_ = {x for x in positions if x < self.m}
        globals_ = sorted(x for x in positions if x >= self.m)
        s_eff = min(self.s, self.m - len(locals_))
        if s_eff < 1:
            raise ValueError(
                f"Op {index} ({op.kind.value} on {op.qubits}) needs more local "
                f"qubits than the {self.m} available."
            )
        window = self.m - s_eff
        free = [
            x for x in range(window - 1, -1, -1) if x not in locals_
        ]
        for x in sorted(locals_):
            if x >= window:
                yield from self._move(GateOp.swap(x, free.pop(0)))
        g0 = max(self.m, min(globals_[0], self.layout.n - s_eff))
        yield from self._move(GateOp.fused_swap(window, g0, s_eff))

    def schedule(self) -> Iterator[tuple[GateOp, int | None]]:
        pending = list(range(len(self.ops)))
        while pending:
            blocked: set[int] = set()
            remaining = []
            for index in pending:
                op = self.ops[index]
                if blocked.isdisjoint(op.touched) and self._executable(op):
                    for mapped in map_logical_op(op, self.layout):
                        yield mapped, index
                else:
                    blocked.update(op.touched)
                    remaining.append(index)
            if remaining:
                yield from self._relocate(self.ops[remaining[0]], remaining[0])
            pending = remaining

    def restore(self) -> Iterator[tuple[GateOp, int | None]]:
        m, n = self.m, self.layout.n
        while True:
            displaced = [y for y in range(m, n) if self.layout.logical_at(y) != y]
            if not displaced:
                break
            g0 = displaced[0]
            width = 1
            while width < self.s and g0 + width in displaced:
                width += 1
            home = self.layout.resolve(g0)
            if home >= m:
                yield from self._move(GateOp.fused_swap(m - 1, home, 1))
                continue
            run = 0
            while run < width and self.layout.resolve(g0 + run) < m:
                run += 1
            for i in range(run):
                current = self.layout.resolve(g0 + i)
                target = m - run + i
                if current != target:
                    yield from self._move(GateOp.swap(current, target))
            yield from self._move(GateOp.fused_swap(m - run, g0, run))
        for x in range(m):
            current = self.layout.resolve(x)
            if current != x:
                yield from self._move(GateOp.swap(current, x))


def _steps(
    circuit: Circuit, layout: GlobalLayout, cfg: TranspileConfig
) -> tuple[_Scheduler, Iterator[tuple[GateOp, int | None]]]:
    if circuit.n != layout.n:
        raise ValueError(
            f"Circuit has {circuit.n} qubits but the layout has {layout.n}."
        )
    scheduler = _Scheduler(circuit, layout, cfg.width(layout))

    def steps() -> Iterator[tuple[GateOp, int | None]]:
        yield from scheduler.schedule()
        if cfg.restore_layout:
            yield from scheduler.restore()

    return scheduler, steps()


def localize_with_layout(
    circuit: Circuit, layout: GlobalLayout, cfg: TranspileConfig | None = None
) -> LocalizedCircuit:
    """Rewrite a logical circuit so that all gates run on local positions.

    Parameters
    ----------
    circuit:
        Logical circuit.
    layout:
        Partition of the state and initial qubit permutation.
    cfg:
        Fuse width and restore setting.

    Returns
    -------
    :
        The physical circuit with the origin of each op and the final layout.
    """
    cfg = cfg or TranspileConfig()
    if layout.p == 0:
        return LocalizedCircuit.unchanged(circuit, layout)
    scheduler, steps = _steps(circuit, layout, cfg)
    ops: list[GateOp] = []
    origin: list[int | None] = []
    for op, index in steps:
        ops.append(op)
        origin.append(index)
    result = LocalizedCircuit(
        circuit=Circuit(n=circuit.n, ops=tuple(ops), seed=circuit.seed),
        origin=tuple(origin),
        final_layout=scheduler.layout,
    )
    get_logger().info(
        "Localized %d ops for %d global qubits: inserted %d fused swaps of width "
        "<= %d, %d ops total",
        len(circuit),
        layout.p,
        result.inserted_fused_swaps,
        cfg.width(layout),
        len(ops),
    )
    return result


def localize(
    circuit: Circuit, layout: GlobalLayout, cfg: TranspileConfig | None = None
) -> Circuit:
    """Return the physical circuit of :func:`localize_with_layout`."""
    return localize_with_layout(circuit, layout, cfg).circuit


def predict_swap_count(
    circuit: Circuit, layout: GlobalLayout, cfg: TranspileConfig | None = None
) -> int:
    """Return the number of fused swaps :func:`localize` inserts."""
    cfg = cfg or TranspileConfig()
    if layout.p == 0:
        return 0
    _, steps = _steps(circuit, layout, cfg)
    return sum(
        1
        for op, index in steps
        if index is None and op.kind is GateKind.FUSED_SWAP
    )
