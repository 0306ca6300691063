import pytest

from slicesim import timebase as tb
from slicesim.errors import ConfigurationError, SliceTooNarrowError


# SCS kHz, slot ns, slots/subframe for every supported numerology
NUMEROLOGY_TABLE = {
    0: (15, 1_000_000, 1),
    1: (30, 500_000, 2),
    2: (60, 250_000, 4),
    3: (120, 125_000, 8),
    4: (240, 62_500, 16),
}


@pytest.mark.parametrize("mu", sorted(NUMEROLOGY_TABLE))
def test_numerology_table(mu):
    scs, slot_ns, spsf = NUMEROLOGY_TABLE[mu]
    p = tb.numerology_params(mu)
    assert p.scs_khz == scs
    assert p.slot_ns == slot_ns
    assert p.slots_per_subframe == spsf
    assert p.symbol_ns == round(slot_ns / 14)


def test_numerology_mu0_matches_lte_shape():
    p = tb.numerology_params(0)
    assert p.scs_khz == 15
    assert p.slot_ns == tb.NS_PER_MS          # 1 ms slot
    assert p.symbol_ns == 71_429              # 1/14 ms to nearest ns


def test_numerology_mu2():
    p = tb.numerology_params(2)
    assert p.scs_khz == 60
    assert p.slot_ns == 250_000               # 0.25 ms
    assert p.symbol_ns == round(1e6 / 56)     # 1/56 ms
    assert p.slots_per_subframe == 4


@pytest.mark.parametrize("mu", [-1, 5, 17])
def test_numerology_out_of_range(mu):
    with pytest.raises(ConfigurationError):
        tb.numerology_params(mu)


@pytest.mark.parametrize("mu", sorted(NUMEROLOGY_TABLE))
def test_slot_times_subframe_is_exactly_one_ms(mu):
    p = tb.numerology_params(mu)
    assert p.slot_ns * p.slots_per_subframe == tb.SUBFRAME_NS


@pytest.mark.parametrize("mu", sorted(NUMEROLOGY_TABLE))
def test_symbol_rounding_residual_below_14ns_per_slot(mu):
    # symbol durations are rounded once; the error over a slot's 14 symbols
    # stays below 14 ns and never leaks into slot/frame arithmetic
    p = tb.numerology_params(mu)
    assert abs(p.symbol_ns * 14 - p.slot_ns) < 14


def test_prb_count_20mhz_values():
    # floor(18e6 / 180e3) and floor(18e6 / 720e3), checked by hand
    assert tb.prb_count(20e6, 0, 0.10) == 100
    assert tb.prb_count(20e6, 2, 0.10) == 25
    assert tb.prb_count(180e3, 0, 0.0) == 1


def test_prb_count_monotone_in_mu():
    for bw in (5e6, 11e6, 20e6, 40e6):
        counts = [tb.prb_count(bw, mu, 0.10) for mu in (0, 1, 2)]
        assert counts == sorted(counts, reverse=True)


def test_prb_count_too_narrow():
    with pytest.raises(SliceTooNarrowError):
        tb.prb_count(100e3, 0, 0.10)
    with pytest.raises(ConfigurationError):
        tb.prb_count(-1.0, 0, 0.10)
    with pytest.raises(ConfigurationError):
        tb.prb_count(20e6, 0, 1.0)


def test_time_to_position_examples():
    assert tb.time_to_position(0, 0) == tb.FramePosition(0, 0, 0)
    assert tb.time_to_position(10 * tb.NS_PER_MS, 0) == tb.FramePosition(1, 0, 0)
    # 1.25 ms at mu=2: subframe 1, second 0.25 ms slot
    assert tb.time_to_position(1_250_000, 2) == tb.FramePosition(0, 1, 1)


def test_time_to_position_rejects_negative():
    with pytest.raises(ConfigurationError):
        tb.time_to_position(-1, 0)


@pytest.mark.parametrize("mu", [0, 1, 2])
def test_position_time_round_trip_100_frames(mu):
    p = tb.numerology_params(mu)
    for frame in range(100):
        for subframe in range(10):
            for slot in range(p.slots_per_subframe):
                pos = tb.FramePosition(frame, subframe, slot)
                t = tb.position_to_time(pos, mu)
                assert tb.time_to_position(t, mu) == pos
                # the instant 1 ns before the next boundary still maps here
                assert tb.time_to_position(t + p.slot_ns - 1, mu) == pos
