"""Slot-level simulator against the exact spectra and closed-form moments."""
import math

import numpy as np
import pytest

from fhshare.mixture import GaussianMixtureDiag, entropy_mc
from fhshare.model import (
    HoppingProfile,
    NetworkScenario,
    enumerate_interference_spectrum,
)
from fhshare.sim import (
    SimConfig,
    read_sample_dump,
    run,
    sample_received,
    write_sample_dump,
)

LN2 = math.log(2.0)


def unit(n, u, power=10.0, sigma2=1.0):
    return NetworkScenario(
        n_users=n,
        n_subbands=u,
        gains=np.ones((n, n)),
        total_power=power,
        noise_power=sigma2,
    )


def test_single_user_free_count_is_exact():
    scen = unit(1, 4)
    cfg = SimConfig(
        scenario=scen, profiles=(HoppingProfile.fixed(3),), n_slots=2000, master_seed=1
    )
    stats = run(cfg)
    assert stats.free_mean[0] == 3.0
    assert stats.free_se[0] == 0.0
    assert stats.level_slots[0] == 2000
    np.testing.assert_allclose(stats.level_freq[0], [1.0])


def test_free_subbands_match_expectation():
    scen = unit(3, 4)
    profs = (HoppingProfile.fixed(1),) * 3
    cfg = SimConfig(scenario=scen, profiles=profs, n_slots=100000, master_seed=42)
    stats = run(cfg)
    for i in range(3):
        assert stats.free_se[i] > 0
        assert abs(stats.free_mean[i] - 0.5625) <= 4 * stats.free_se[i]


def test_level_frequencies_match_spectrum():
    scen = unit(3, 4)
    profs = (HoppingProfile.fixed(1),) * 3
    cfg = SimConfig(scenario=scen, profiles=profs, n_slots=100000, master_seed=7)
    stats = run(cfg)
    spec = enumerate_interference_spectrum(scen, profs, 0)
    np.testing.assert_allclose(stats.level_c[0], spec.c_values, atol=1e-12)
    for l, (p, p_hat, se) in enumerate(
        zip(spec.probabilities, stats.level_freq[0], stats.level_se[0])
    ):
        guard = max(se, math.sqrt(p * (1 - p) / cfg.n_slots))
        assert abs(p_hat - p) <= 4 * guard, f"level {l}"


def test_level_frequencies_with_pmf_interferer():
    scen = unit(2, 3)
    profs = (
        HoppingProfile.fixed(1),
        HoppingProfile.from_pmf((0.2, 0.3, 0.5, 0.0)),
    )
    spec = enumerate_interference_spectrum(scen, profs, 0)
    np.testing.assert_allclose(spec.c_values, [0.0, 0.5, 1.0], atol=1e-12)
    np.testing.assert_allclose(
        spec.probabilities, [1 - 1.3 / 3, 0.5 * 2 / 3, 0.3 / 3], rtol=1e-12
    )
    cfg = SimConfig(scenario=scen, profiles=profs, n_slots=120000, master_seed=3)
    stats = run(cfg)
    for p, p_hat, se in zip(
        spec.probabilities, stats.level_freq[0], stats.level_se[0]
    ):
        guard = max(se, math.sqrt(p * (1 - p) / cfg.n_slots))
        assert abs(p_hat - p) <= 4 * guard
    # The pmf user itself occupies nothing in about 20% of slots.
    frac_active = stats.level_slots[1] / cfg.n_slots
    assert abs(frac_active - 0.8) <= 4 * math.sqrt(0.8 * 0.2 / cfg.n_slots)


def test_thread_count_does_not_change_results():
    scen = unit(3, 4)
    profs = (
        HoppingProfile.fixed(1),
        HoppingProfile.fixed(2),
        HoppingProfile.from_pmf((0.25, 0.25, 0.25, 0.25, 0.0)),
    )
    cfg = SimConfig(scenario=scen, profiles=profs, n_slots=50000, master_seed=99)
    a = run(cfg, threads=1)
    b = run(cfg, threads=4)
    np.testing.assert_array_equal(a.free_mean, b.free_mean)
    np.testing.assert_array_equal(a.free_se, b.free_se)
    for i in range(3):
        np.testing.assert_array_equal(a.level_freq[i], b.level_freq[i])
        np.testing.assert_array_equal(a.level_se[i], b.level_se[i])
    c = run(cfg, threads=1)
    np.testing.assert_array_equal(a.free_mean, c.free_mean)
    other = run(
        SimConfig(scenario=scen, profiles=profs, n_slots=50000, master_seed=100)
    )
    assert not np.array_equal(a.free_mean, other.free_mean)


def test_sample_received_second_moments():
    scen = unit(2, 2)
    profs = (HoppingProfile.fixed(1),) * 2
    y, z = sample_received(scen, profs, 0, 60000, seed=5)
    assert y.shape == (60000, 2) and z.shape == (60000, 2)
    # E{z_j^2} = sigma^2 + (v/u) P = 1 + 5; own signal adds P on band 0.
    assert np.mean(z[:, 0] ** 2) == pytest.approx(6.0, rel=0.05)
    assert np.mean(z[:, 1] ** 2) == pytest.approx(6.0, rel=0.05)
    assert np.mean(y[:, 0] ** 2) == pytest.approx(16.0, rel=0.05)
    np.testing.assert_array_equal(y[:, 1], z[:, 1])
    assert abs(np.mean(y[:, 0])) < 4 * math.sqrt(16.0 / 60000)


def test_sample_received_thread_determinism():
    scen = unit(2, 2)
    profs = (HoppingProfile.fixed(1),) * 2
    y1, z1 = sample_received(scen, profs, 0, 40000, seed=8, threads=1)
    y3, z3 = sample_received(scen, profs, 0, 40000, seed=8, threads=3)
    np.testing.assert_array_equal(y1, y3)
    np.testing.assert_array_equal(z1, z3)


def test_sampled_interference_entropy_matches_mixture():
    # Mean negative log density of simulated z under the exact mixture
    # approximates h(Z); compare against the analytic MC estimate.
    scen = unit(2, 2, power=10.0)
    profs = (HoppingProfile.fixed(1),) * 2
    _, z = sample_received(scen, profs, 0, 60000, seed=21)
    mix = GaussianMixtureDiag(
        weights=np.array([0.5, 0.5]),
        variances=np.array([[11.0, 1.0], [1.0, 11.0]]),
    )
    from fhshare.mixture import _log_density_rows

    ll = _log_density_rows(mix, z) / LN2
    h_hat = -float(ll.mean())
    se_hat = float(ll.std(ddof=1)) / math.sqrt(z.shape[0])
    h_ref, se_ref = entropy_mc(mix, 200000, seed=4)
    assert abs(h_hat - h_ref) <= 4 * math.hypot(se_hat, se_ref)


def test_dump_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    samples = rng.normal(size=(257, 3))
    path = tmp_path / "dump.bin"
    write_sample_dump(path, samples)
    back = read_sample_dump(path)
    np.testing.assert_array_equal(back, samples)
    raw = path.read_bytes()
    assert len(raw) == 16 + 257 * 3 * 8
    assert int.from_bytes(raw[:8], "little") == 3
    assert int.from_bytes(raw[8:16], "little") == 257

    bad = tmp_path / "bad.bin"
    bad.write_bytes(raw[:40])
    with pytest.raises(ValueError):
        read_sample_dump(bad)
    with pytest.raises(ValueError):
        write_sample_dump(tmp_path / "x.bin", np.zeros(5))


def test_sim_config_validation():
    scen = unit(2, 2)
    with pytest.raises(ValueError):
        SimConfig(
            scenario=scen, profiles=(HoppingProfile.fixed(1),), n_slots=10, master_seed=0
        )
    with pytest.raises(ValueError):
        SimConfig(
            scenario=scen,
            profiles=(HoppingProfile.fixed(1),) * 2,
            n_slots=0,
            master_seed=0,
        )
