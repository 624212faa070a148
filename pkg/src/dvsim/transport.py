# SPDX-License-Identifier: BSD-3-Clause
# Copyright (c) 2024 dvsim contributors
"""Message passing between rank workers.

Exchanges are symmetric and pairwise: both ranks post a send buffer and a
receive buffer under the same :class:`ExchangeTag`.
When the second post arrives, both payloads are copied into the receive buffers
at once and both exchanges complete, so send buffers may be reused as soon as
:meth:`Transport.wait` returns.
Matching is by tag and rank pair only, never by arrival order, which makes
results independent of thread scheduling.
"""

from __future__ import annotations

import os
import threading
import time
from dataclasses import dataclass, field
from typing import Protocol

import numpy as np

from .logging import get_logger
from .state import AMPLITUDE_BYTES, Amplitudes

DEFAULT_WATCHDOG_SECONDS = 30.0
WATCHDOG_ENV_VAR = 'DVSIM_WATCHDOG_SECS'


def watchdog_seconds_from_env(default: float = DEFAULT_WATCHDOG_SECONDS) -> float:
    """Return the watchdog timeout, overridden by ``DVSIM_WATCHDOG_SECS`` if set."""
    raw = os.environ.get(WATCHDOG_ENV_VAR)
    if raw is None or raw == '':
        return default
    try:
        value = float(raw)
    except ValueError:
        raise ValueError(
            f"{WATCHDOG_ENV_VAR} must be a number of seconds, got '{raw}'."
        ) from None
    if value <= 0:
        raise ValueError(f"{WATCHDOG_ENV_VAR} must be positive, got {value}.")
    return value


class ProtocolError(RuntimeError):
    """Raised when ranks do not follow the exchange protocol."""


@dataclass(frozen=True, order=True)
class ExchangeTag:
    """Identifies one exchange within a run."""

    gate_seq: int
    step: int
    pair_low_rank: int


@dataclass(frozen=True)
class CommStats:
    """Payload bytes and message counts sent by each rank.

    Only amplitude payload is counted, 16 bytes per amplitude.
    """

    bytes_sent_per_rank: tuple[int, ...]
    messages_per_rank: tuple[int, ...]

    @property
    def bytes_total(self) -> int:
        return sum(self.bytes_sent_per_rank)

    @property
    def messages_total(self) -> int:
        return sum(self.messages_per_rank)

    @classmethod
    def zeros(cls, ranks: int) -> CommStats:
        return cls(bytes_sent_per_rank=(0,) * ranks, messages_per_rank=(0,) * ranks)


@dataclass(eq=False)
class PendingExchange:
    """Handle of a posted exchange."""

    self_rank: int
    partner_rank: int
    tag: ExchangeTag
    send_buf: Amplitudes
    recv_buf: Amplitudes
    done: bool = False
    error: ProtocolError | None = field(default=None, repr=False)


class Transport(Protocol):
    """Interface used by the distributed gate implementations.

    Alternative transports, e.g. over a network, only need to provide these
    methods.
    """

    @property
    def ranks(self) -> int: ...

    def post(
        self,
        self_rank: int,
        partner_rank: int,
        tag: ExchangeTag,
        send_buf: Amplitudes,
        recv_buf: Amplitudes,
    ) -> PendingExchange:
        """Start an exchange without blocking."""

    def test(self, pending: PendingExchange) -> bool:
        """Return True if the exchange has completed."""

    def wait(self, pending: PendingExchange) -> None:
        """Block until the exchange has completed."""

    def exchange(
        self,
        self_rank: int,
        partner_rank: int,
        tag: ExchangeTag,
        send_buf: Amplitudes,
    ) -> Amplitudes:
        """Send a block to the partner and return the partner's block."""

    def abort(self, reason: BaseException) -> None:
        """Fail all current and future exchanges."""

    def reset_stats(self) -> None: ...

    def snapshot_stats(self) -> CommStats: ...


class RendezvousTransport:
    """In-process transport with exact payload accounting.

    Parameters
    ----------
    ranks:
        Number of ranks.
    watchdog_seconds:
        Maximum time :meth:`wait` blocks before the exchange is declared
        deadlocked.
    """

    def __init__(
        self, ranks: int, *, watchdog_seconds: float = DEFAULT_WATCHDOG_SECONDS
    ) -> None:
        if ranks < 1:
            raise ValueError(f"Need at least one rank, got {ranks}.")
        if watchdog_seconds <= 0:
            raise ValueError(f"Watchdog must be positive, got {watchdog_seconds}.")
        self._ranks = ranks
        self._watchdog_seconds = watchdog_seconds
        self._cond = threading.Condition()
        self._posted: dict[tuple[int, int], PendingExchange] = {}
        self._bytes = [0] * ranks
        self._messages = [0] * ranks
        self._abort_reason: ProtocolError | None = None

    @property
    def ranks(self) -> int:
        return self._ranks

    @property
    def watchdog_seconds(self) -> float:
        return self._watchdog_seconds

    def _check_rank(self, rank: int) -> None:
        if not 0 <= rank < self._ranks:
            raise ProtocolError(f"Rank {rank} out of range for {self._ranks} ranks.")

    def post(
        self,
        self_rank: int,
        partner_rank: int,
        tag: ExchangeTag,
        send_buf: Amplitudes,
        recv_buf: Amplitudes,
    ) -> PendingExchange:
        """Post one side of an exchange.

        Parameters
        ----------
        self_rank:
            Rank posting the exchange.
        partner_rank:
            Rank to exchange with.
        tag:
            Must be identical on both sides.
        send_buf:
            Block to send. Must not be modified until the exchange completes.
        recv_buf:
            Receives the partner's block. Must have the same length as
            ``send_buf``.

        Returns
        -------
        :
            Handle to pass to :meth:`test` or :meth:`wait`.
        """
        self._check_rank(self_rank)
        self._check_rank(partner_rank)
        if self_rank == partner_rank:
            raise ProtocolError(f"Rank {self_rank} cannot exchange with itself.")
        if len(send_buf) != len(recv_buf):
            raise ProtocolError(
                f"Rank {self_rank}: send and receive buffers differ in length "
                f"({len(send_buf)} != {len(recv_buf)})."
            )
        pending = PendingExchange(
            self_rank=self_rank,
            partner_rank=partner_rank,
            tag=tag,
            send_buf=send_buf,
            recv_buf=recv_buf,
        )
        with self._cond:
            self._raise_if_aborted()
            if (self_rank, partner_rank) in self._posted:
                raise self._fail(
                    f"Rank {self_rank} posted {tag} while an exchange with rank "
                    f"{partner_rank} is still in flight."
                )
            other = self._posted.pop((partner_rank, self_rank), None)
            if other is None:
                self._posted[(self_rank, partner_rank)] = pending
                return pending
            if other.tag != tag:
                raise self._fail(
                    f"Tag mismatch between rank {self_rank} ({tag}) and rank "
                    f"{partner_rank} ({other.tag})."
                )
            if len(other.send_buf) != len(send_buf):
                raise self._fail(
                    f"Length mismatch in {tag}: rank {self_rank} sends "
                    f"{len(send_buf)} amplitudes, rank {partner_rank} sends "
                    f"{len(other.send_buf)}."
                )
            np.copyto(pending.recv_buf, other.send_buf)
            np.copyto(other.recv_buf, pending.send_buf)
            for side in (pending, other):
                self._bytes[side.self_rank] += len(side.send_buf) * AMPLITUDE_BYTES
                self._messages[side.self_rank] += 1
                side.done = True
            get_logger().debug(
                "Matched %s between ranks %d and %d (%d amplitudes)",
                tag,
                partner_rank,
                self_rank,
                len(send_buf),
            )
            self._cond.notify_all()
        return pending

    def test(self, pending: PendingExchange) -> bool:
        with self._cond:
            if pending.error is not None:
                raise pending.error
            if not pending.done:
                self._raise_if_aborted()
            return pending.done

    def wait(self, pending: PendingExchange) -> None:
        deadline = time.monotonic() + self._watchdog_seconds
        with self._cond:
            while not pending.done:
                if pending.error is not None:
                    raise pending.error
                self._raise_if_aborted()
                remaining = deadline - time.monotonic()
                if remaining <= 0:
                    raise self._fail(
                        f"Watchdog: rank {pending.self_rank} waited more than "
                        f"{self._watchdog_seconds} s for rank {pending.partner_rank} "
                        f"in {pending.tag}."
                    )
                self._cond.wait(remaining)
            if pending.error is not None:
                raise pending.error

    def exchange(
        self,
        self_rank: int,
        partner_rank: int,
        tag: ExchangeTag,
        send_buf: Amplitudes,
    ) -> Amplitudes:
        """Send a block to ``partner_rank`` and return its block.

        Blocks until the partner posts the matching exchange.
        """
        recv_buf = np.empty_like(send_buf)
        self.wait(self.post(self_rank, partner_rank, tag, send_buf, recv_buf))
        return recv_buf

    def abort(self, reason: BaseException) -> None:
        with self._cond:
            if self._abort_reason is None:
                self._abort_reason = ProtocolError(f"Run aborted: {reason}")
            self._cond.notify_all()

    def _raise_if_aborted(self) -> None:
        if self._abort_reason is not None:
            raise self._abort_reason

    def _fail(self, message: str) -> ProtocolError:
        # Caller holds the lock.
        error = ProtocolError(message)
        for pending in self._posted.values():
            pending.error = error
        if self._abort_reason is None:
            self._abort_reason = error
        self._cond.notify_all()
        return error

    @property
    def in_flight(self) -> int:
        """Number of posted exchanges that have not been matched."""
        with self._cond:
            return len(self._posted)

    def _check_quiescent(self, action: str) -> None:
        if self._posted:
            raise ProtocolError(
                f"Cannot {action} while {len(self._posted)} exchanges are in flight."
            )

    def reset_stats(self) -> None:
        """Zero all counters and clear a previous abort."""
        with self._cond:
            self._check_quiescent('reset statistics')
            self._bytes = [0] * self._ranks
            self._messages = [0] * self._ranks
            self._abort_reason = None

    def snapshot_stats(self) -> CommStats:
        """Return a copy of the counters."""
        with self._cond:
            self._check_quiescent('read statistics')
            return CommStats(
                bytes_sent_per_rank=tuple(self._bytes),
                messages_per_rank=tuple(self._messages),
            )
