"""Bandwidth slicing and per-slice round-robin scheduling.

The carrier is split into three slices (one per traffic profile), each with
its own numerology and direction.  A static plan keeps one split for the
whole run; a dynamic plan swaps splits at activity-interval boundaries.
Scheduling is slot-granular round robin with a rotating cursor, and the
transmission pipeline models the MAC-to-PHY delay, per-slot transport
blocks, decode latency and HARQ retransmissions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConfigurationError, EndOfSimulation
from .timebase import NS_PER_MS, NS_PER_SEC, NS_PER_US, numerology_params

PROFILES = ("eMBB", "URLLC", "mMTC")

DEFAULT_STATIC_SPLIT = (0.55, 0.30, 0.15)
DEFAULT_DYNAMIC_SPLITS = (
    (0.40, 0.30, 0.30),
    (0.30, 0.60, 0.10),
    (0.70, 0.20, 0.10),
)
DEFAULT_NUMEROLOGIES = (0, 2, 0)          # eMBB, URLLC, mMTC
DEFAULT_DIRECTIONS = ("dl", "dl", "ul")   # mMTC reports uplink

TB_OVERHEAD_FACTOR = 0.86  # control/reference-signal overhead inside a slot


@dataclass(frozen=True)
class SliceConfig:
    profile: str
    bandwidth_fraction: float
    numerology: int
    direction: str

    def __post_init__(self):
        if self.profile not in PROFILES:
            raise ConfigurationError(f"unknown profile {self.profile!r}")
        if not 0.0 < self.bandwidth_fraction < 1.0:
            raise ConfigurationError(
                f"{self.profile}: bandwidth fraction must be in (0, 1), got {self.bandwidth_fraction}")
        if self.direction not in ("dl", "ul"):
            raise ConfigurationError(f"{self.profile}: direction must be 'dl' or 'ul'")


@dataclass(frozen=True)
class SlicePlan:
    mode: str                                   # "static" or "dynamic"
    intervals: tuple                            # one (eMBB, URLLC, mMTC) triple per interval
    interval_duration_ns: int = 600 * NS_PER_SEC

    @property
    def n_intervals(self) -> int:
        return len(self.intervals)

    @property
    def horizon_ns(self) -> int:
        return self.n_intervals * self.interval_duration_ns


def build_slice_plan(mode: str, splits=None, numerologies=DEFAULT_NUMEROLOGIES,
                     directions=DEFAULT_DIRECTIONS, n_intervals: int = 3,
                     interval_duration_s: float = 600.0) -> SlicePlan:
    """Assemble a slicing plan from per-interval (eMBB, URLLC, mMTC) fractions.

    ``splits`` defaults to the balanced 55/30/15 split for static mode and
    the per-interval 40/30/30, 30/60/10, 70/20/10 schedule for dynamic mode.
    Every interval's fractions must sum to one.
    """
    if mode == "static":
        split = tuple(splits) if splits is not None else DEFAULT_STATIC_SPLIT
        per_interval = [split] * n_intervals
    elif mode == "dynamic":
        per_interval = [tuple(s) for s in (splits if splits is not None else DEFAULT_DYNAMIC_SPLITS)]
        if len(per_interval) != n_intervals:
            raise ConfigurationError(
                f"dynamic plan needs {n_intervals} splits, got {len(per_interval)}")
    else:
        raise ConfigurationError(f"plan mode must be 'static' or 'dynamic', got {mode!r}")

    intervals = []
    for i, split in enumerate(per_interval):
        if len(split) != 3:
            raise ConfigurationError(f"interval {i + 1}: need three fractions, got {split}")
        if abs(sum(split) - 1.0) > 1e-9:
            raise ConfigurationError(
                f"interval {i + 1}: slice fractions {split} sum to {sum(split):.6f}, expected 1.0")
        intervals.append(tuple(
            SliceConfig(profile=p, bandwidth_fraction=f, numerology=mu, direction=d)
            for p, f, mu, d in zip(PROFILES, split, numerologies, directions)
        ))
    return SlicePlan(mode=mode, intervals=tuple(intervals),
                     interval_duration_ns=int(interval_duration_s * NS_PER_SEC))


def interval_index(plan: SlicePlan, t_ns: int) -> int:
    """0-based interval holding instant t (half-open boundaries)."""
    if t_ns < 0:
        raise ConfigurationError("time must be non-negative")
    idx = int(t_ns // plan.interval_duration_ns)
    if idx >= plan.n_intervals:
        raise EndOfSimulation(f"t={t_ns} ns beyond the {plan.n_intervals}-interval horizon")
    return idx


def slices_at(plan: SlicePlan, t_ns: int):
    """The three active slice configs at instant t."""
    return plan.intervals[interval_index(plan, t_ns)]


def tb_bits(prbs: int, se: float, overhead_factor: float = TB_OVERHEAD_FACTOR) -> int:
    """Transport-block payload of a one-slot grant: 12 subcarriers x 14
    symbols per PRB, scaled by spectral efficiency and overhead."""
    if prbs < 0:
        raise ConfigurationError("PRB count must be non-negative")
    return int(prbs * 12 * 14 * se * overhead_factor)


def prbs_for_bits(bits: int, se: float, overhead_factor: float = TB_OVERHEAD_FACTOR) -> int:
    """Smallest PRB count whose transport block carries ``bits``."""
    if bits <= 0:
        return 0
    per_prb = 12 * 14 * se * overhead_factor
    if per_prb <= 0.0:
        return 0  # zero-rate link, nothing fits
    n = max(1, math.ceil(bits / per_prb - 1e-9))
    while tb_bits(n, se, overhead_factor) < bits:
        n += 1
    while n > 1 and tb_bits(n - 1, se, overhead_factor) >= bits:
        n -= 1
    return n


def rr_allocate(demands, capacity: int, cursor: int, n_devices: int):
    """Split a slot's PRBs among backlogged devices, round-robin.

    ``demands`` is a list of (device, wanted_prbs) pairs.  PRBs are divided
    equally in rotation order starting at the cursor; the remainder goes
    one-each to the first devices after the cursor; grants are capped at
    the demand and freed PRBs are re-offered in the same order.  Returns
    ([(device, prbs), ...], next_cursor); the cursor advances by one device
    per slot.

    >>> rr_allocate([(0, 99), (1, 99), (2, 99)], 10, 0, 3)
    ([(0, 4), (1, 3), (2, 3)], 1)
    """
    next_cursor = (cursor + 1) % n_devices if n_devices else 0
    if not demands or capacity <= 0:
        return [], next_cursor
    order = sorted(demands, key=lambda d: (d[0] - cursor) % n_devices)
    k = len(order)
    base, rem = divmod(capacity, k)
    grants = []
    leftover = 0
    for i, (dev, want) in enumerate(order):
        share = base + (1 if i < rem else 0)
        give = min(share, want)
        leftover += share - give
        grants.append([dev, give])
    # re-offer PRBs freed by demand caps, same rotation order
    if leftover:
        for g in grants:
            if leftover == 0:
                break
            dev, got = g
            want = next(w for d, w in order if d == dev)
            extra = min(leftover, want - got)
            g[1] += extra
            leftover -= extra
    return [(d, g) for d, g in grants if g > 0], next_cursor


def bler(sinr_tx_db: float, sinr_selection_db: float, margin_db: float = 2.0,
         floor: float = 1e-5, ceiling: float = 0.5) -> float:
    """Synthetic transport-block error rate.

    Exponential in the gap between the transmission-time SINR and a
    threshold ``margin_db`` below the SINR the link adaptation used,
    clamped to [floor, ceiling]; monotone decreasing in the actual SINR.
    """
    threshold = sinr_selection_db - margin_db
    p = 0.5 * math.exp(-(sinr_tx_db - threshold))
    return min(max(p, floor), ceiling)


@dataclass(frozen=True)
class LatencyPipeline:
    """Per-slice transmission latency constants, in the slice's own slots."""
    mac_to_phy_slots: int = 2
    tb_decode_us: float = 100.0
    harq_feedback_slots: int = 1
    max_harq_retx: int = 3
    bler_margin_db: float = 2.0

    def tx_delay_ns(self, slot_ns: int) -> int:
        """Grant slot start to decoded TB: MAC-to-PHY, the airtime slot,
        then the decode latency."""
        return (self.mac_to_phy_slots + 1) * slot_ns + int(self.tb_decode_us * NS_PER_US)

    def harq_ready_ns(self, slot_ns: int) -> int:
        """Grant slot start to the moment a failed TB may be re-granted."""
        return self.tx_delay_ns(slot_ns) + self.harq_feedback_slots * slot_ns


def slot_of(t_ns: int, slot_ns: int) -> int:
    return int(t_ns // slot_ns)


def next_slot_start(t_ns: int, slot_ns: int) -> int:
    """First slot boundary at or after t."""
    return -(-int(t_ns) // slot_ns) * slot_ns


def simulate_transmission(created_ns: int, size_bits: int, grant_slots,
                          prbs_per_slot: int, se: float, mu: int,
                          pipeline: LatencyPipeline, tb_error_fn, rng):
    """Reference walk of one packet through the pipeline of a single device.

    ``grant_slots`` yields the slot numbers (in the slice numerology) where
    this device receives ``prbs_per_slot`` PRBs.  ``tb_error_fn(t_ns)``
    gives the TB error probability at a transmission instant.  Returns
    (delivered_ns or None, drop_reason or None, harq_retx_count) and is the
    semantic yardstick the event engine is tested against.
    """
    slot_ns = numerology_params(mu).slot_ns
    payload = tb_bits(prbs_per_slot, se)
    if payload <= 0:
        return None, "zero_rate", 0
    remaining = size_bits
    retx = 0
    pending = []   # (ready_ns, bits, attempts)
    delivered = None
    for slot in grant_slots:
        t = slot * slot_ns
        if t < created_ns:
            continue
        if pending and pending[0][0] <= t:
            ready, bits, attempts = pending.pop(0)
        else:
            if remaining <= 0:
                if not pending:
                    break
                continue
            bits = min(remaining, payload)
            remaining -= bits
            attempts = 0
        if rng.random() < tb_error_fn(t):
            retx += 1
            if attempts + 1 > pipeline.max_harq_retx:
                return None, "harq", retx
            pending.append((t + pipeline.harq_ready_ns(slot_ns), bits, attempts + 1))
            pending.sort()
            continue
        decode = t + pipeline.tx_delay_ns(slot_ns)
        if remaining <= 0 and not pending:
            delivered = decode
            break
    return delivered, (None if delivered is not None else "horizon"), retx
