import numpy as np
import pytest

from slicesim import rach
from slicesim.errors import ConfigurationError
from slicesim.seeding import STREAM_RACH, substream
from slicesim.timebase import NS_PER_MS

from rach_oracle import enumerate_rach


def small_config(**kw):
    defaults = dict(prach_config_index=16, num_preambles=2, preamble_trans_max=2,
                    rar_window_ms=5.0, backoff_ms=20.0, rar_processing_delay_ms=2.0,
                    backoff_quantum_ms=None)
    defaults.update(kw)
    return rach.RachConfig(**defaults)


# ---------------------------------------------------------------- schedule

def test_ra_slot_schedule_counts():
    assert rach.ra_slot_schedule(rach.pattern_for_index(19), 20 * NS_PER_MS).size == 4
    assert rach.ra_slot_schedule(rach.pattern_for_index(16), 100 * NS_PER_MS).size == 10
    assert rach.ra_slot_schedule(rach.pattern_for_index(22), 10 * NS_PER_MS).size == 3


def test_ra_slot_schedule_spacing():
    t = rach.ra_slot_schedule(rach.pattern_for_index(19), 100 * NS_PER_MS)
    assert list(np.diff(t)) == [5 * NS_PER_MS, 5 * NS_PER_MS] * 9 + [5 * NS_PER_MS]


def test_unknown_index_lists_supported():
    with pytest.raises(ConfigurationError, match="16"):
        rach.pattern_for_index(99)


def test_pattern_validation():
    with pytest.raises(ConfigurationError):
        rach.RaSlotPattern(3, (1,))
    with pytest.raises(ConfigurationError):
        rach.RaSlotPattern(1, (5, 2))
    with pytest.raises(ConfigurationError):
        rach.RaSlotPattern(1, (10,))


def test_config_validation():
    with pytest.raises(ConfigurationError):
        rach.RachConfig(num_preambles=65)
    with pytest.raises(ConfigurationError):
        rach.RachConfig(rar_window_ms=12.0)
    with pytest.raises(ConfigurationError):
        rach.RachConfig(rar_processing_delay_ms=6.0, rar_window_ms=5.0)


# ---------------------------------------------------------------- simulator

def test_single_ue_succeeds_first_attempt():
    cfg = small_config(num_preambles=1)
    res = rach.simulate_rach(1, cfg, substream(0, 0, STREAM_RACH))
    assert res.blocking_probability() == 0.0
    assert res.attempts[0] == 1
    # arrives at t=0, first RA slot at 1 ms, RAR 2 ms later
    assert res.first_tx_ns[0] == 1 * NS_PER_MS
    assert res.success_ns[0] == 3 * NS_PER_MS
    assert res.access_delays_ms()[0] == pytest.approx(2.0)
    m = rach.rach_metrics(res)
    assert m["avg_preamble_retx"] == 0.0


def test_two_ues_one_preamble_no_retry_always_block():
    cfg = small_config(num_preambles=1, preamble_trans_max=1)
    for seed in range(20):
        res = rach.simulate_rach(2, cfg, substream(seed, STREAM_RACH))
        assert res.blocking_probability() == 1.0
        assert list(res.attempts) == [1, 1]


def test_partition_and_attempt_bounds():
    cfg = rach.RachConfig(prach_config_index=19, num_preambles=8, preamble_trans_max=5)
    for seed in range(30):
        res = rach.simulate_rach(50, cfg, substream(seed, STREAM_RACH))
        assert np.count_nonzero(res.succeeded) + np.count_nonzero(res.blocked) == 50
        assert res.attempts.min() >= 1
        assert res.attempts.max() <= 5
        assert (res.attempts[res.blocked] == 5).all()
        assert (res.success_ns[res.succeeded] > res.first_tx_ns[res.succeeded]).all()


def test_determinism_same_seed():
    cfg = rach.RachConfig(prach_config_index=22, num_preambles=10, preamble_trans_max=4)
    a = rach.simulate_rach(40, cfg, substream(123, STREAM_RACH))
    b = rach.simulate_rach(40, cfg, substream(123, STREAM_RACH))
    assert (a.attempts == b.attempts).all()
    assert (a.status == b.status).all()
    assert (a.success_ns == b.success_ns).all()


def test_access_delay_contract():
    blocked = rach.UeRaState(id=0, state="blocked", attempts=3, first_tx_ns=0, success_ns=None)
    with pytest.raises(ValueError):
        rach.access_delay_ms(blocked)
    ok = rach.UeRaState(id=1, state="succeeded", attempts=2,
                        first_tx_ns=NS_PER_MS, success_ns=4 * NS_PER_MS)
    assert rach.access_delay_ms(ok) == pytest.approx(3.0)


def test_staggered_arrivals_wait_for_next_slot():
    cfg = small_config(num_preambles=4)
    arrivals = np.array([0, 7 * NS_PER_MS], dtype=np.int64)  # slots at 1, 11, 21 ... ms
    res = rach.simulate_rach(2, cfg, substream(5, STREAM_RACH), arrival_times_ns=arrivals)
    assert res.first_tx_ns[0] == 1 * NS_PER_MS
    assert res.first_tx_ns[1] == 11 * NS_PER_MS


# ---------------------------------------------------------------- oracle

def test_oracle_forced_block():
    out = enumerate_rach(2, small_config(num_preambles=1, preamble_trans_max=1))
    assert out["blocking_probability"] == pytest.approx(1.0)


def test_oracle_single_ue():
    out = enumerate_rach(1, small_config())
    assert out["blocking_probability"] == 0.0
    assert out["expected_attempts_per_device"] == pytest.approx(1.0)
    assert out["mean_access_delay_ms"] == pytest.approx(2.0)


def test_oracle_two_ues_hand_computed_continuous():
    # two UEs, two preambles, two attempts, one RA slot per frame:
    # collide with p=1/2; the two backoff landings coincide with p=0.375
    # (0.25^2 + 0.5^2 + 0.25^2) and then the preambles clash again with
    # p=1/2, so blocking = 0.5 * 0.375 * 0.5 = 0.09375 per device, and
    # E[attempts] = 0.5*1 + 0.5*2 = 1.5 per device
    out = enumerate_rach(2, small_config())
    assert out["blocking_probability"] == pytest.approx(0.09375, abs=1e-12)
    assert out["expected_attempts_per_device"] == pytest.approx(1.5, abs=1e-12)


def test_oracle_two_ues_hand_computed_quantized():
    # half-frame backoff: expiries 6+{0,5,10,15,20} ms land on slots at
    # {11,11,21,21,31} ms, so the landing law is {2/5, 2/5, 1/5} and the
    # coincidence probability is 0.36; blocking = 0.5 * 0.36 * 0.5 = 0.09
    out = enumerate_rach(2, small_config(backoff_quantum_ms=5.0))
    assert out["blocking_probability"] == pytest.approx(0.09, abs=1e-12)


def _empirical(n, cfg, seeds):
    blocked, attempts, dsum, dcnt = [], [], [], []
    for seed in range(seeds):
        res = rach.simulate_rach(n, cfg, substream(seed, STREAM_RACH))
        blocked.append(res.blocking_probability())
        attempts.append(res.attempts.mean())
        d = res.access_delays_ms()
        dsum.append(d.sum())
        dcnt.append(d.size)
    return (np.array(blocked), np.array(attempts), np.array(dsum), np.array(dcnt))


@pytest.mark.parametrize("quantum", [None, 5.0])
@pytest.mark.parametrize("n,pool,maxatt", [(2, 2, 2), (3, 2, 3), (4, 3, 3)])
def test_simulator_matches_enumeration(n, pool, maxatt, quantum):
    cfg = small_config(num_preambles=pool, preamble_trans_max=maxatt,
                       backoff_quantum_ms=quantum)
    exact = enumerate_rach(n, cfg)
    seeds = 3000
    blocked, attempts, dsum, dcnt = _empirical(n, cfg, seeds)
    for emp, key in ((blocked, "blocking_probability"),
                     (attempts, "expected_attempts_per_device")):
        se = emp.std(ddof=1) / np.sqrt(seeds)
        assert abs(emp.mean() - exact[key]) <= 3 * se + 1e-12, key
    # pooled delay mean over succeeded devices
    emp_delay = dsum.sum() / dcnt.sum()
    per_seed = dsum[dcnt > 0] / dcnt[dcnt > 0]
    se = per_seed.std(ddof=1) / np.sqrt(per_seed.size)
    assert abs(emp_delay - exact["mean_access_delay_ms"]) <= 3 * se + 1e-9


# ------------------------------------------------- statistical monotonicity

def _mean_blocking(n, cfg, seeds=200):
    return float(np.mean([
        rach.simulate_rach(n, cfg, substream(seed, STREAM_RACH)).blocking_probability()
        for seed in range(seeds)
    ]))


def test_blocking_monotone_in_ra_slots():
    cfg = dict(num_preambles=20, preamble_trans_max=6)
    b = [_mean_blocking(150, rach.RachConfig(prach_config_index=i, **cfg))
         for i in (16, 19, 22)]
    assert b[0] >= b[1] >= b[2]


def test_blocking_monotone_in_arrivals():
    cfg = rach.RachConfig(prach_config_index=19, num_preambles=20, preamble_trans_max=6)
    b = [_mean_blocking(n, cfg) for n in (50, 150, 400)]
    assert b[0] <= b[1] <= b[2]


def test_blocking_monotone_in_preambles():
    b = [_mean_blocking(150, rach.RachConfig(prach_config_index=19, num_preambles=p,
                                             preamble_trans_max=6))
         for p in (10, 20, 40)]
    assert b[0] >= b[1] >= b[2]
