"""Contention-based random-access (RACH) simulator.

Models the Msg1/Msg2 exchange at preamble granularity: every active device
transmits a uniformly random preamble from the contention pool at its next
eligible RA slot.  A preamble picked by exactly one device succeeds and the
random-access response arrives after a fixed processing delay; a preamble
picked by two or more devices collides.  Collided devices learn of the
failure when the response window expires, draw a uniform backoff, and
become eligible again at the first RA slot after the backoff runs out.
A device that collides on its last allowed attempt is blocked.

Msg3/Msg4 are not simulated: access delay is defined up to Msg2 reception,
and collisions are resolved at preamble level.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterator

import numpy as np

from .errors import ConfigurationError
from .timebase import FRAME_NS, NS_PER_MS, SUBFRAME_NS

# RA-slot patterns for the PRACH configuration indices used here: number of
# RA slots per frame is what matters; the in-frame subframe offsets are an
# implementation choice.  Override via RachConfig.pattern for other indices.
PRACH_INDEX_PATTERNS: dict[int, "RaSlotPattern"] = {}


@dataclass(frozen=True)
class RaSlotPattern:
    """Periodic RA-slot positions: ``subframe_offsets`` within every
    ``period_frames``-th frame."""
    period_frames: int
    subframe_offsets: tuple[int, ...]

    def __post_init__(self):
        if self.period_frames not in (1, 2):
            raise ConfigurationError(
                f"RA-slot period must be 1 or 2 frames, got {self.period_frames}")
        offs = self.subframe_offsets
        if not offs or list(offs) != sorted(set(offs)) or offs[0] < 0 or offs[-1] > 9:
            raise ConfigurationError(
                f"subframe offsets must be strictly increasing within 0-9, got {offs}")

    @property
    def slots_per_frame(self) -> float:
        return len(self.subframe_offsets) / self.period_frames


PRACH_INDEX_PATTERNS.update({
    16: RaSlotPattern(1, (1,)),          # 1 RA slot per frame
    19: RaSlotPattern(1, (1, 6)),        # 2 RA slots per frame
    22: RaSlotPattern(1, (1, 4, 7)),     # 3 RA slots per frame
    0: RaSlotPattern(2, (1,)),           # sparsest allowed: 1 slot per 2 frames
    27: RaSlotPattern(1, tuple(range(10))),  # densest: 1 slot per subframe
})


def pattern_for_index(index: int) -> RaSlotPattern:
    try:
        return PRACH_INDEX_PATTERNS[index]
    except KeyError:
        raise ConfigurationError(
            f"unsupported PRACH configuration index {index}; "
            f"supported: {sorted(PRACH_INDEX_PATTERNS)} (or pass an explicit pattern)"
        ) from None


@dataclass(frozen=True)
class RachConfig:
    """Random-access parameters.

    ``backoff_quantum_ms`` sets the granularity of the backoff draw: the
    wait is uniform over the multiples of the quantum inside [0, BI]
    (half-frame steps by default); ``None`` draws continuously.  The RAR
    arrives ``rar_processing_delay_ms`` into the response window, at the
    window end by default.
    """
    prach_config_index: int = 19
    num_preambles: int = 60
    preamble_trans_max: int = 10
    rar_window_ms: float = 5.0
    backoff_ms: float = 20.0
    rar_processing_delay_ms: float = 5.0
    backoff_quantum_ms: float | None = 5.0
    pattern: RaSlotPattern | None = None   # overrides the index mapping

    def __post_init__(self):
        if not 1 <= self.num_preambles <= 64:
            raise ConfigurationError(f"preamble pool must be 1-64, got {self.num_preambles}")
        if self.preamble_trans_max < 1:
            raise ConfigurationError("preambleTransMax must be at least 1")
        if not 0 < self.rar_window_ms <= 10.0:
            raise ConfigurationError(f"RAR window must be in (0, 10] ms, got {self.rar_window_ms}")
        if self.backoff_ms < 0:
            raise ConfigurationError("backoff indicator must be non-negative")
        if self.backoff_quantum_ms is not None and self.backoff_quantum_ms <= 0:
            raise ConfigurationError("backoff quantum must be positive or None")
        if self.rar_processing_delay_ms > self.rar_window_ms:
            raise ConfigurationError(
                f"RAR processing delay {self.rar_processing_delay_ms} ms exceeds "
                f"the {self.rar_window_ms} ms response window")

    def backoff_levels_ns(self) -> np.ndarray | None:
        """Discrete backoff values in ns, or None when drawing continuously."""
        if self.backoff_quantum_ms is None:
            return None
        q = self.backoff_quantum_ms * NS_PER_MS
        n_levels = int(self.backoff_ms * NS_PER_MS // q) + 1
        return (np.arange(n_levels) * q).astype(np.int64)

    def resolved_pattern(self) -> RaSlotPattern:
        return self.pattern if self.pattern is not None else pattern_for_index(self.prach_config_index)

    def with_index(self, index: int) -> "RachConfig":
        return replace(self, prach_config_index=index, pattern=None)


def ra_slot_schedule(pattern: RaSlotPattern, horizon_ns: int) -> np.ndarray:
    """Start times (ns) of every RA slot in [0, horizon_ns), in order."""
    if horizon_ns <= 0:
        raise ConfigurationError("horizon must be positive")
    period_ns = pattern.period_frames * FRAME_NS
    n_periods = -(-int(horizon_ns) // period_ns)
    base = np.arange(n_periods, dtype=np.int64) * period_ns
    offs = np.asarray(pattern.subframe_offsets, dtype=np.int64) * SUBFRAME_NS
    times = (base[:, None] + offs[None, :]).ravel()
    return times[times < horizon_ns]


ACTIVE, SUCCEEDED, BLOCKED = 0, 1, 2
_STATE_NAMES = {ACTIVE: "active", SUCCEEDED: "succeeded", BLOCKED: "blocked"}


@dataclass(frozen=True)
class UeRaState:
    id: int
    state: str
    attempts: int
    first_tx_ns: int
    success_ns: int | None


@dataclass
class RaResults:
    """Per-device outcome arrays for one seeded RACH run."""
    attempts: np.ndarray        # transmissions made, in [1, preambleTransMax]
    status: np.ndarray          # SUCCEEDED or BLOCKED
    first_tx_ns: np.ndarray
    success_ns: np.ndarray      # -1 where blocked
    config: RachConfig = field(repr=False, default=None)

    @property
    def n(self) -> int:
        return self.attempts.size

    @property
    def succeeded(self) -> np.ndarray:
        return self.status == SUCCEEDED

    @property
    def blocked(self) -> np.ndarray:
        return self.status == BLOCKED

    def blocking_probability(self) -> float:
        return float(np.count_nonzero(self.blocked)) / self.n

    def access_delays_ms(self) -> np.ndarray:
        """Delay from first preamble transmission to RAR reception, per
        succeeded device."""
        ok = self.succeeded
        return (self.success_ns[ok] - self.first_tx_ns[ok]) / NS_PER_MS

    def states(self) -> Iterator[UeRaState]:
        for i in range(self.n):
            st = int(self.status[i])
            yield UeRaState(
                id=i,
                state=_STATE_NAMES[st],
                attempts=int(self.attempts[i]),
                first_tx_ns=int(self.first_tx_ns[i]),
                success_ns=int(self.success_ns[i]) if st == SUCCEEDED else None,
            )


def access_delay_ms(state: UeRaState) -> float:
    """Access delay of a single succeeded device, in ms."""
    if state.state != "succeeded":
        raise ValueError(f"access delay undefined for state {state.state!r}")
    return (state.success_ns - state.first_tx_ns) / NS_PER_MS


def simulate_rach(n_arrivals: int, config: RachConfig, rng: np.random.Generator,
                  arrival_times_ns=None) -> RaResults:
    """Run the contention-based procedure for a batch of devices.

    ``arrival_times_ns`` defaults to all devices arriving at t=0 (the
    simultaneous-arrival burst).  Deterministic given ``rng``'s state.
    """
    if n_arrivals < 1:
        raise ConfigurationError("need at least one arrival")
    pattern = config.resolved_pattern()
    if arrival_times_ns is None:
        arrivals = np.zeros(n_arrivals, dtype=np.int64)
    else:
        arrivals = np.asarray(arrival_times_ns, dtype=np.int64)
        if arrivals.shape != (n_arrivals,):
            raise ConfigurationError("arrival_times_ns length must match n_arrivals")

    rar_ns = int(config.rar_window_ms * NS_PER_MS)
    proc_ns = int(config.rar_processing_delay_ms * NS_PER_MS)
    backoff_ns = config.backoff_ms * NS_PER_MS
    levels = config.backoff_levels_ns()

    # every attempt advances a device's clock by at most one RAR window,
    # one full backoff and the gap to the next RA slot, so this horizon
    # provably covers the whole procedure
    cycle_ns = rar_ns + int(backoff_ns) + pattern.period_frames * FRAME_NS + SUBFRAME_NS
    horizon = int(arrivals.max()) + (config.preamble_trans_max + 1) * cycle_ns + FRAME_NS
    times = ra_slot_schedule(pattern, horizon)

    status = np.full(n_arrivals, ACTIVE, dtype=np.int8)
    attempts = np.zeros(n_arrivals, dtype=np.int32)
    eligible = np.searchsorted(times, arrivals, side="left")
    first_tx = np.full(n_arrivals, -1, dtype=np.int64)
    success = np.full(n_arrivals, -1, dtype=np.int64)

    active_mask = status == ACTIVE
    while active_mask.any():
        s = int(eligible[active_mask].min())
        if s >= times.size:
            raise AssertionError("RA schedule horizon exhausted with devices still active")
        t = int(times[s])
        idx = np.nonzero(active_mask & (eligible == s))[0]

        preambles = rng.integers(0, config.num_preambles, size=idx.size)
        hits = np.bincount(preambles, minlength=config.num_preambles)
        solo = hits[preambles] == 1

        attempts[idx] += 1
        first_tx[idx] = np.where(first_tx[idx] < 0, t, first_tx[idx])

        winners = idx[solo]
        status[winners] = SUCCEEDED
        success[winners] = t + proc_ns

        losers = idx[~solo]
        exhausted = losers[attempts[losers] >= config.preamble_trans_max]
        status[exhausted] = BLOCKED
        retry = losers[attempts[losers] < config.preamble_trans_max]
        if retry.size:
            if levels is None:
                u = rng.uniform(0.0, backoff_ns, size=retry.size)
            else:
                u = levels[rng.integers(0, levels.size, size=retry.size)]
            expiry = t + rar_ns + u
            eligible[retry] = np.searchsorted(times, expiry, side="left")
        active_mask = status == ACTIVE

    return RaResults(attempts=attempts, status=status, first_tx_ns=first_tx,
                     success_ns=success, config=config)


def rach_metrics(results: RaResults) -> dict:
    """Blocking probability, average retransmissions and access-delay stats.

    Retransmissions (attempts - 1) are averaged over succeeded devices only;
    delay deviations are the mean absolute deviation above and below the
    mean, computed separately.
    """
    if results.n == 0:
        raise ConfigurationError("empty results")
    ok = results.succeeded
    n_ok = int(np.count_nonzero(ok))
    retx = float(np.mean(results.attempts[ok] - 1)) if n_ok else float("nan")
    delays = results.access_delays_ms()
    if n_ok:
        mean = float(delays.mean())
        below = delays[delays < mean]
        above = delays[delays > mean]
        dev_lo = float(np.mean(mean - below)) if below.size else 0.0
        dev_hi = float(np.mean(above - mean)) if above.size else 0.0
    else:
        mean = dev_lo = dev_hi = float("nan")
    return {
        "blocking_probability": results.blocking_probability(),
        "avg_preamble_retx": retx,
        "access_delay_mean_ms": mean,
        "access_delay_dev_lo_ms": dev_lo,
        "access_delay_dev_hi_ms": dev_hi,
        "succeeded": n_ok,
        "blocked": results.n - n_ok,
    }
