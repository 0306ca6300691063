"""5G NR frame-structure arithmetic.

All simulation clocks are integer nanoseconds.  Slot durations (1/2^mu ms)
are exact in nanoseconds for every supported numerology, so frame/slot
indexing never drifts.  Symbol durations (1/(14*2^mu) ms) are not integral;
they are rounded to the nearest nanosecond once, here, and the residual
never accumulates because positions are always derived from slot boundaries.
The rounding error over the 14 symbols of one slot stays below 14 ns.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConfigurationError, SliceTooNarrowError

NS_PER_US = 1_000
NS_PER_MS = 1_000_000
NS_PER_SEC = 1_000_000_000

SUBFRAME_NS = NS_PER_MS          # 1 ms
FRAME_NS = 10 * NS_PER_MS        # 10 ms
SUBFRAMES_PER_FRAME = 10
SYMBOLS_PER_SLOT = 14
SUBCARRIERS_PER_PRB = 12

VALID_MU = (0, 1, 2, 3, 4)
FR1_DATA_MU = (0, 1, 2)


@dataclass(frozen=True)
class NumerologyParams:
    mu: int
    scs_khz: int
    slot_ns: int
    symbol_ns: int
    slots_per_subframe: int


def numerology_params(mu: int) -> NumerologyParams:
    """Return SCS, slot/symbol durations and slots-per-subframe for ``mu``.

    SCS = 15 * 2^mu kHz, slot = 1/2^mu ms, symbol = 1/(14 * 2^mu) ms,
    slots per subframe = 2^mu.
    """
    if mu not in VALID_MU:
        raise ConfigurationError(f"numerology mu={mu!r} outside supported range {VALID_MU}")
    n = 2 ** mu
    slot_ns = SUBFRAME_NS // n
    return NumerologyParams(
        mu=mu,
        scs_khz=15 * n,
        slot_ns=slot_ns,
        symbol_ns=round(slot_ns / SYMBOLS_PER_SLOT),
        slots_per_subframe=n,
    )


def scs_hz(mu: int) -> int:
    return numerology_params(mu).scs_khz * 1000


def prb_count(bandwidth_hz: float, mu: int, guard_fraction: float = 0.10) -> int:
    """Number of whole PRBs that fit in a bandwidth after the guard cut.

    PRB width is 12 subcarriers.  The usable fraction (1 - guard_fraction)
    keeps the PRB arithmetic self-contained instead of transcribing the
    standard transmission-bandwidth tables.
    """
    if bandwidth_hz <= 0:
        raise ConfigurationError(f"bandwidth must be positive, got {bandwidth_hz}")
    if not 0 <= guard_fraction < 1:
        raise ConfigurationError(f"guard_fraction must be in [0, 1), got {guard_fraction}")
    prb_hz = SUBCARRIERS_PER_PRB * scs_hz(mu)
    # small relative epsilon so exact ratios are not lost to float rounding
    n = math.floor(bandwidth_hz * (1.0 - guard_fraction) / prb_hz * (1.0 + 1e-12))
    if n == 0:
        raise SliceTooNarrowError(
            f"slice of {bandwidth_hz / 1e6:.3f} MHz holds no PRB at mu={mu} "
            f"(PRB width {prb_hz / 1e3:.0f} kHz, guard {guard_fraction})"
        )
    return n


@dataclass(frozen=True)
class FramePosition:
    frame: int
    subframe: int
    slot: int

    def __post_init__(self):
        if not 0 <= self.subframe < SUBFRAMES_PER_FRAME:
            raise ConfigurationError(f"subframe {self.subframe} outside 0-9")


def time_to_position(t_ns: int, mu: int) -> FramePosition:
    """Frame/subframe/slot containing the instant ``t_ns``."""
    if t_ns < 0:
        raise ConfigurationError(f"time must be non-negative, got {t_ns}")
    p = numerology_params(mu)
    frame, rem = divmod(int(t_ns), FRAME_NS)
    subframe, rem = divmod(rem, SUBFRAME_NS)
    return FramePosition(frame=frame, subframe=subframe, slot=rem // p.slot_ns)


def position_to_time(pos: FramePosition, mu: int) -> int:
    """Start instant of a frame position, in ns.  Inverse of time_to_position."""
    p = numerology_params(mu)
    if not 0 <= pos.slot < p.slots_per_subframe:
        raise ConfigurationError(f"slot {pos.slot} outside 0-{p.slots_per_subframe - 1} for mu={mu}")
    return pos.frame * FRAME_NS + pos.subframe * SUBFRAME_NS + pos.slot * p.slot_ns
