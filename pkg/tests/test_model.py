"""Interference spectrum enumeration, checked against a brute-force oracle.

The oracle tallies the variance increment on sub-band 0 of a receiver over
every joint interferer placement (each v-subset equally likely), which is
the exact law the fast convolution must reproduce.
"""
import itertools
import json
import math

import numpy as np
import pytest
from scipy.stats import binom

from fhshare.model import (
    HoppingProfile,
    InterferenceSpectrum,
    NetworkScenario,
    enumerate_interference_spectrum,
    prob_interference_free,
    scenario_from_json,
    scenario_to_json,
)


def brute_force_levels(scenario, counts, receiver):
    """Exact increment law at sub-band 0 via full placement enumeration."""
    u = scenario.n_subbands
    dist = {0.0: 1.0}
    for k in range(scenario.n_users):
        if k == receiver:
            continue
        v = counts[k]
        subsets = list(itertools.combinations(range(u), v))
        amp = float(scenario.gains[k, receiver]) ** 2 / v if v else 0.0
        new = {}
        for c, p in dist.items():
            for s in subsets:
                key = c + (amp if 0 in s else 0.0)
                new[key] = new.get(key, 0.0) + p / len(subsets)
        dist = new
    return sorted(dist.items())


def merge_oracle(entries, sigma2, power, rel_tol=1e-9):
    """Apply the same adjacent-variance merge rule the library uses."""
    merged = []
    for c, p in entries:
        if merged:
            c0, p0 = merged[-1]
            if (sigma2 + c * power) - (sigma2 + c0 * power) <= rel_tol * (
                sigma2 + c0 * power
            ):
                merged[-1] = ((c0 * p0 + c * p) / (p0 + p), p0 + p)
                continue
        merged.append((c, p))
    return merged


def unit_scenario(n, u, power=10.0, sigma2=1.0):
    return NetworkScenario(
        n_users=n,
        n_subbands=u,
        gains=np.ones((n, n)),
        total_power=power,
        noise_power=sigma2,
    )


def test_three_user_hand_spectrum():
    scen = unit_scenario(3, 4)
    profs = [HoppingProfile.fixed(1)] * 3
    spec = enumerate_interference_spectrum(scen, profs, 0)
    assert spec.n_levels == 3
    np.testing.assert_allclose(spec.probabilities, [9 / 16, 6 / 16, 1 / 16])
    np.testing.assert_allclose(spec.c_values, [0.0, 1.0, 2.0])
    np.testing.assert_allclose(spec.variances, [1.0, 11.0, 21.0])
    assert spec.a0 == pytest.approx(0.5625, abs=0)


def test_two_user_hand_spectrum():
    gains = np.array([[1.0, 0.8], [0.7, 1.0]])
    scen = NetworkScenario(
        n_users=2, n_subbands=2, gains=gains, total_power=4.0, noise_power=0.5
    )
    profs = [HoppingProfile.fixed(1)] * 2
    spec0 = enumerate_interference_spectrum(scen, profs, 0)
    np.testing.assert_allclose(spec0.probabilities, [0.5, 0.5])
    np.testing.assert_allclose(spec0.c_values, [0.0, 0.49])
    np.testing.assert_allclose(spec0.variances, [0.5, 0.5 + 0.49 * 4.0])
    spec1 = enumerate_interference_spectrum(scen, profs, 1)
    np.testing.assert_allclose(spec1.c_values, [0.0, 0.64])


def test_pmf_interferer_outcomes():
    # Interferer hops on 0 or 2 of the 2 sub-bands with equal probability.
    scen = unit_scenario(2, 2)
    profs = [
        HoppingProfile.fixed(1),
        HoppingProfile.from_pmf((0.5, 0.0, 0.5)),
    ]
    spec = enumerate_interference_spectrum(scen, profs, 0)
    np.testing.assert_allclose(spec.probabilities, [0.5, 0.5])
    np.testing.assert_allclose(spec.c_values, [0.0, 0.5])
    assert spec.a0 == pytest.approx(0.5)


def test_matches_brute_force_randomized():
    rng = np.random.default_rng(2024)
    for _ in range(20):
        n = int(rng.integers(2, 5))
        u = int(rng.integers(2, 6))
        counts = [int(rng.integers(1, u + 1)) for _ in range(n)]
        gains = np.exp(rng.normal(size=(n, n)) * 0.5)
        scen = NetworkScenario(
            n_users=n,
            n_subbands=u,
            gains=gains,
            total_power=float(rng.uniform(0.5, 20.0)),
            noise_power=float(rng.uniform(0.1, 2.0)),
        )
        profs = [HoppingProfile.fixed(v) for v in counts]
        receiver = int(rng.integers(0, n))
        spec = enumerate_interference_spectrum(scen, profs, receiver)
        oracle = merge_oracle(
            brute_force_levels(scen, counts, receiver),
            scen.noise_power,
            scen.total_power,
        )
        assert spec.n_levels == len(oracle)
        np.testing.assert_allclose(
            spec.c_values, [c for c, _ in oracle], rtol=1e-12, atol=1e-15
        )
        np.testing.assert_allclose(
            spec.probabilities, [p for _, p in oracle], rtol=1e-12, atol=1e-15
        )
        assert spec.probabilities.sum() == pytest.approx(1.0, abs=1e-12)


def test_mean_variance_identity():
    # E{sigma_l^2} = sigma^2 + (P/u) sum_k |h_ki|^2 P{interferer k active}.
    rng = np.random.default_rng(7)
    for _ in range(10):
        n = int(rng.integers(2, 5))
        u = int(rng.integers(2, 7))
        gains = np.exp(rng.normal(size=(n, n)))
        scen = NetworkScenario(
            n_users=n,
            n_subbands=u,
            gains=gains,
            total_power=3.0,
            noise_power=0.7,
        )
        profs = []
        active = []
        for _k in range(n):
            if rng.random() < 0.5:
                v = int(rng.integers(0, u + 1))
                profs.append(HoppingProfile.fixed(v))
                active.append(1.0 if v > 0 else 0.0)
            else:
                w = rng.random(u + 1)
                w /= w.sum()
                profs.append(HoppingProfile.from_pmf(w))
                active.append(1.0 - w[0])
        spec = enumerate_interference_spectrum(scen, profs, 0)
        expected = scen.noise_power + scen.total_power / u * sum(
            gains[k, 0] ** 2 * active[k] for k in range(1, n)
        )
        assert spec.mean_variance() == pytest.approx(expected, rel=1e-12)


def test_a0_equals_free_probability():
    rng = np.random.default_rng(11)
    for _ in range(10):
        n = int(rng.integers(2, 5))
        u = int(rng.integers(2, 6))
        gains = 0.5 + rng.random((n, n))
        scen = NetworkScenario(
            n_users=n, n_subbands=u, gains=gains, total_power=1.0, noise_power=1.0
        )
        profs = [HoppingProfile.fixed(int(rng.integers(1, u + 1))) for _ in range(n)]
        spec = enumerate_interference_spectrum(scen, profs, 0)
        assert spec.a0 == pytest.approx(
            prob_interference_free(profs, 0, u), rel=1e-12
        )


def test_permutation_covariance():
    rng = np.random.default_rng(5)
    n, u = 4, 5
    gains = np.exp(rng.normal(size=(n, n)))
    counts = [1, 2, 3, 1]
    scen = NetworkScenario(
        n_users=n, n_subbands=u, gains=gains, total_power=2.0, noise_power=1.0
    )
    profs = [HoppingProfile.fixed(v) for v in counts]
    perm = [2, 0, 3, 1]
    gains_p = gains[np.ix_(perm, perm)]
    scen_p = NetworkScenario(
        n_users=n, n_subbands=u, gains=gains_p, total_power=2.0, noise_power=1.0
    )
    profs_p = [HoppingProfile.fixed(counts[j]) for j in perm]
    for new_idx, old_idx in enumerate(perm):
        a = enumerate_interference_spectrum(scen, profs, old_idx)
        b = enumerate_interference_spectrum(scen_p, profs_p, new_idx)
        np.testing.assert_allclose(a.probabilities, b.probabilities, rtol=1e-12)
        np.testing.assert_allclose(a.c_values, b.c_values, rtol=1e-12)


def test_equal_gain_levels_collapse_to_binomial():
    n, u = 6, 5
    scen = unit_scenario(n, u)
    profs = [HoppingProfile.fixed(1)] * n
    spec = enumerate_interference_spectrum(scen, profs, 0)
    assert spec.n_levels == n
    np.testing.assert_allclose(spec.c_values, np.arange(n, dtype=float), atol=1e-12)
    np.testing.assert_allclose(
        spec.probabilities, binom.pmf(np.arange(n), n - 1, 1 / u), rtol=1e-12
    )


def test_merge_keeps_moments():
    # Two interferers whose variance levels differ by well under the merge
    # tolerance collapse into one level without moving the mean variance.
    eps = 5e-10
    gains = np.array(
        [
            [1.0, 1.0, 1.0],
            [1.0, 1.0, 1.0],
            [math.sqrt(1.0 + eps), 1.0, 1.0],
        ]
    )
    scen = NetworkScenario(
        n_users=3, n_subbands=2, gains=gains, total_power=1.0, noise_power=1.0
    )
    profs = [HoppingProfile.fixed(1)] * 3
    spec = enumerate_interference_spectrum(scen, profs, 0)
    assert spec.n_levels == 3
    assert spec.probabilities[1] == pytest.approx(0.5, abs=1e-12)
    assert spec.c_values[1] == pytest.approx(1.0 + eps / 2, rel=1e-12)
    raw_mean = 1.0 + 0.25 * (0.0 + 1.0 + (1.0 + eps) + (2.0 + eps))
    assert spec.mean_variance() == pytest.approx(raw_mean, rel=1e-15)

    # Distinct levels stay distinct.
    gains2 = gains.copy()
    gains2[2, 0] = math.sqrt(1.001)
    scen2 = NetworkScenario(
        n_users=3, n_subbands=2, gains=gains2, total_power=1.0, noise_power=1.0
    )
    spec2 = enumerate_interference_spectrum(scen2, profs, 0)
    assert spec2.n_levels == 4


def test_user_count_guard():
    n = 21
    scen = unit_scenario(n, 4)
    profs = [HoppingProfile.fixed(1)] * n
    with pytest.raises(ValueError, match="enumeration"):
        enumerate_interference_spectrum(scen, profs, 0)


def test_silent_interferer():
    scen = unit_scenario(2, 3)
    for silent in (
        HoppingProfile.fixed(0),
        HoppingProfile.from_pmf((1.0, 0.0, 0.0, 0.0)),
    ):
        profs = [HoppingProfile.fixed(1), silent]
        spec = enumerate_interference_spectrum(scen, profs, 0)
        assert spec.n_levels == 1
        assert spec.a0 == 1.0
        assert spec.variances[0] == scen.noise_power


def test_profile_validation():
    with pytest.raises(ValueError):
        HoppingProfile.fixed(-1)
    with pytest.raises(ValueError):
        HoppingProfile.from_pmf((0.5, 0.4))
    with pytest.raises(ValueError):
        HoppingProfile(fixed_v=1, pmf=(0.5, 0.5))
    prof = HoppingProfile.from_pmf((0.25, 0.5, 0.25))
    assert prof.mean_v() == pytest.approx(1.0)
    assert prof.max_v() == 2
    with pytest.raises(ValueError):
        prof.pmf_for(5)
    np.testing.assert_allclose(
        HoppingProfile.fixed(2).pmf_for(3), [0.0, 0.0, 1.0, 0.0]
    )


def test_spectrum_entropy_and_mixture():
    scen = unit_scenario(3, 4)
    profs = [HoppingProfile.fixed(1)] * 3
    spec = enumerate_interference_spectrum(scen, profs, 0)
    p = spec.probabilities
    expected = -(p * np.log2(p)).sum()
    assert spec.discrete_entropy() == pytest.approx(expected, rel=1e-12)
    mix = spec.to_mixture()
    np.testing.assert_allclose(mix.weights, p)
    np.testing.assert_allclose(mix.component_variances, spec.variances)


def test_json_round_trip():
    rng = np.random.default_rng(3)
    n, u = 3, 4
    gains = np.round(np.exp(rng.normal(size=(n, n))), 6)
    scen = NetworkScenario(
        n_users=n, n_subbands=u, gains=gains, total_power=2.5, noise_power=0.25
    )
    profs = [
        HoppingProfile.fixed(2),
        HoppingProfile.from_pmf((0.1, 0.2, 0.3, 0.4, 0.0)),
        HoppingProfile.fixed(1),
    ]
    doc = scenario_to_json(scen, profs)
    text = json.dumps(doc)
    scen2, profs2 = scenario_from_json(json.loads(text))
    assert scen2.n_users == n and scen2.n_subbands == u
    np.testing.assert_allclose(scen2.gains, scen.gains)
    assert scen2.total_power == scen.total_power
    assert scen2.noise_power == scen.noise_power
    a = enumerate_interference_spectrum(scen, profs, 1)
    b = enumerate_interference_spectrum(scen2, profs2, 1)
    np.testing.assert_allclose(a.probabilities, b.probabilities, rtol=0, atol=0)
    np.testing.assert_allclose(a.c_values, b.c_values, rtol=0, atol=0)
