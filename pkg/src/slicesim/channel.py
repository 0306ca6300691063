"""Large-scale propagation, link budget and link adaptation.

Pathloss follows the indoor-factory model with dense clutter and a high
base-station antenna (TR 38.901 style):

    LOS:  31.84 + 21.50 log10(d3D) + 19.00 log10(fc_GHz)
    NLOS: max(LOS, 33.63 + 21.90 log10(d3D) + 20.00 log10(fc_GHz))

plus a log-normal shadowing term that is drawn once per device per
activity interval.  The link budget is single-cell, so SINR reduces to
tx - pathloss - thermal noise over the allocation bandwidth, minus an
optional link margin that absorbs receiver losses not modelled
explicitly.  Link adaptation is truncated-Shannon.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

from .errors import ConfigurationError

THERMAL_NOISE_DBM_HZ = -174.0

# truncated-Shannon defaults; 7.4063 b/s/Hz is the 256QAM ceiling
SE_ALPHA = 0.75
SE_MAX = 7.4063
SE_SINR_FLOOR_DB = -10.0

MIN_DISTANCE_M = 1.0
MAX_DISTANCE_M = 600.0


class Position3D(NamedTuple):
    x: float
    y: float
    z: float


@dataclass(frozen=True)
class LinkState:
    """Quasi-static channel state, fixed per (device, interval)."""
    los: bool
    shadowing_db: float


@dataclass
class ChannelParams:
    """Channel knobs exposed in the scenario file."""
    k_dh_m: float = 25.0
    sigma_los_db: float = 4.3
    sigma_nlos_db: float = 4.0
    noise_figure_dl_db: float = 7.0
    noise_figure_ul_db: float = 5.0
    alpha: float = SE_ALPHA
    se_max: float = SE_MAX
    sinr_floor_db: float = SE_SINR_FLOOR_DB
    link_margin_db: float = 0.0
    near_clamps: int = field(default=0, compare=False)


def distance_3d(a, b) -> float:
    return math.sqrt((a[0] - b[0]) ** 2 + (a[1] - b[1]) ** 2 + (a[2] - b[2]) ** 2)


def distance_2d(a, b) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


def los_pathloss_db(d3d_m: float, freq_ghz: float) -> float:
    return 31.84 + 21.50 * math.log10(d3d_m) + 19.00 * math.log10(freq_ghz)


def nlos_pathloss_db(d3d_m: float, freq_ghz: float) -> float:
    nlos = 33.63 + 21.9 * math.log10(d3d_m) + 20.0 * math.log10(freq_ghz)
    return max(los_pathloss_db(d3d_m, freq_ghz), nlos)


def pathloss_db(tx: Position3D, rx: Position3D, freq_ghz: float,
                state: LinkState, params: ChannelParams | None = None) -> float:
    """Pathloss in dB between two positions under a fixed link state.

    Distances below 1 m are clamped to 1 m (AGVs can pass underneath the
    gNB ground projection); the clamp is counted on ``params`` when given.
    """
    if not 0.5 <= freq_ghz <= 100.0:
        raise ConfigurationError(f"carrier frequency {freq_ghz} GHz outside 0.5-100 GHz")
    d3d = distance_3d(tx, rx)
    if d3d < MIN_DISTANCE_M:
        d3d = MIN_DISTANCE_M
        if params is not None:
            params.near_clamps += 1
    if d3d > MAX_DISTANCE_M:
        raise ConfigurationError(f"3D distance {d3d:.1f} m beyond {MAX_DISTANCE_M} m validity range")
    pl = los_pathloss_db(d3d, freq_ghz) if state.los else nlos_pathloss_db(d3d, freq_ghz)
    return pl + state.shadowing_db


def los_probability(d2d_m: float, k_dh_m: float = 25.0) -> float:
    """LOS probability exp(-d2D/k) for the dense-clutter indoor factory."""
    if d2d_m < 0:
        raise ConfigurationError(f"2D distance must be non-negative, got {d2d_m}")
    return math.exp(-d2d_m / k_dh_m)


def noise_dbm(bandwidth_hz: float, noise_figure_db: float) -> float:
    if bandwidth_hz <= 0:
        raise ConfigurationError(f"noise bandwidth must be positive, got {bandwidth_hz}")
    return THERMAL_NOISE_DBM_HZ + 10.0 * math.log10(bandwidth_hz) + noise_figure_db


def sinr_db(tx_power_dbm: float, pathloss: float, bandwidth_hz: float,
            noise_figure_db: float, link_margin_db: float = 0.0) -> float:
    """Single-cell SINR over an allocation bandwidth (no interference term)."""
    return tx_power_dbm - pathloss - noise_dbm(bandwidth_hz, noise_figure_db) - link_margin_db


def spectral_efficiency(sinr: float, alpha: float = SE_ALPHA, se_max: float = SE_MAX,
                        sinr_floor_db: float = SE_SINR_FLOOR_DB) -> float:
    """Truncated-Shannon mapping from SINR to bits/s/Hz.

    Zero below the floor, capped at ``se_max`` above; monotone in between.
    """
    if sinr < sinr_floor_db:
        return 0.0
    return min(alpha * math.log2(1.0 + 10.0 ** (sinr / 10.0)), se_max)


def draw_link_state(d2d_m: float, params: ChannelParams, rng) -> LinkState:
    """One (LOS, shadowing) draw for a device entering an interval."""
    los = rng.random() < los_probability(d2d_m, params.k_dh_m)
    sigma = params.sigma_los_db if los else params.sigma_nlos_db
    return LinkState(los=los, shadowing_db=float(rng.normal(0.0, sigma)))
