from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, stats

from funbandit.distributions import (
    Bernoulli,
    Beta,
    Categorical,
    Rng,
    TruncatedGaussian,
    Uniform,
    cdf,
    density_info,
    quantile,
    sample_n,
    true_functional,
)
from funbandit.errors import DomainError, UnsupportedDistribution, UnsupportedFunctional
from funbandit.estimators import (
    AverageValueAtRisk,
    Mean,
    MeanVariance,
    ShannonEntropy,
    ValueAtRisk,
)

CONTINUOUS_SPECS = [
    Uniform(0.0, 1.0),
    Uniform(-2.0, 3.0),
    Beta(2.0, 2.0),
    Beta(2.0, 5.0),
    Beta(0.5, 0.5),
    TruncatedGaussian(0.3, 0.2, 0.0, 1.0),
    TruncatedGaussian(0.0, 1.0, -1.0, 2.0),
]
DISCRETE_SPECS = [
    Bernoulli(0.3),
    Bernoulli(0.5),
    Categorical([0.0, 1.0, 2.0, 3.0], [0.4, 0.3, 0.2, 0.1]),
    Categorical([5.0, -1.0, 2.0], [0.2, 0.5, 0.3]),
]
ALL_SPECS = CONTINUOUS_SPECS + DISCRETE_SPECS


def scipy_frozen(spec):
    if isinstance(spec, Uniform):
        return stats.uniform(spec.a, spec.b - spec.a)
    if isinstance(spec, Beta):
        return stats.beta(spec.alpha, spec.beta)
    return spec.frozen


class TestSampling:
    def test_point_mass_bernoulli(self):
        assert sample_n(Bernoulli(1.0), Rng(123), 3).tolist() == [1.0, 1.0, 1.0]

    def test_single_atom_categorical(self):
        assert sample_n(Categorical([2.0], [1.0]), Rng(7), 2).tolist() == [2.0, 2.0]

    def test_uniform_mean_lln(self):
        x = sample_n(Uniform(0.0, 1.0), Rng(42), 100_000)
        assert abs(x.mean() - 0.5) <= 0.01

    def test_zero_draws(self):
        assert sample_n(Beta(2, 2), Rng(1), 0).size == 0

    def test_negative_n_rejected(self):
        with pytest.raises(DomainError):
            sample_n(Bernoulli(0.5), Rng(1), -1)

    @pytest.mark.parametrize("spec", ALL_SPECS, ids=repr)
    def test_deterministic_and_within_support(self, spec):
        a = sample_n(spec, Rng(99), 5000)
        b = sample_n(spec, Rng(99), 5000)
        assert a.tobytes() == b.tobytes()
        assert a.min() >= spec.support_lo and a.max() <= spec.support_hi

    @pytest.mark.parametrize("spec", CONTINUOUS_SPECS, ids=repr)
    def test_empirical_cdf_at_quantile(self, spec):
        n = 100_000
        x = sample_n(spec, Rng(2024), n)
        for lam in (0.05, 0.3, 0.5, 0.9):
            q = quantile(spec, lam)
            assert abs(np.mean(x <= q) - lam) <= 3 / math.sqrt(n)

    def test_child_streams_are_label_determined(self):
        r = Rng(5)
        a = sample_n(Uniform(0, 1), r.child("arm:0"), 10)
        b = sample_n(Uniform(0, 1), Rng(5).child("arm:0"), 10)
        c = sample_n(Uniform(0, 1), r.child("arm:1"), 10)
        assert a.tolist() == b.tolist()
        assert a.tolist() != c.tolist()

    def test_child_streams_uncorrelated(self):
        r = Rng(11)
        a = sample_n(Uniform(0, 1), r.child("x"), 50_000)
        b = sample_n(Uniform(0, 1), r.child("y"), 50_000)
        assert abs(np.corrcoef(a, b)[0, 1]) < 4 / math.sqrt(50_000)

    def test_spawn_advances_counter(self):
        r = Rng(3)
        s1, s2 = r.spawn(), r.spawn()
        assert r.counter == 2
        assert s1.seed != s2.seed


class TestSpecValidation:
    def test_probs_must_sum_to_one(self):
        with pytest.raises(DomainError):
            Categorical([0, 1], [0.5, 0.6])

    def test_bad_probability(self):
        with pytest.raises(DomainError):
            Bernoulli(1.5)

    @pytest.mark.parametrize("ctor", [lambda: Uniform(1, 1), lambda: TruncatedGaussian(0, 1, 2, 1),
                                      lambda: TruncatedGaussian(0, 0, 0, 1), lambda: Beta(0, 1)])
    def test_bad_parameters(self, ctor):
        with pytest.raises(DomainError):
            ctor()


class TestQuantile:
    def test_uniform(self):
        assert quantile(Uniform(0, 1), 0.1) == pytest.approx(0.1, abs=1e-11)

    def test_bernoulli_right_continuous(self):
        assert quantile(Bernoulli(0.3), 0.5) == 0.0
        assert quantile(Bernoulli(0.3), 0.8) == 1.0

    @pytest.mark.parametrize("lam", [0.0, 1.0, -0.2, 1.3])
    def test_domain(self, lam):
        with pytest.raises(DomainError):
            quantile(Uniform(0, 1), lam)

    @pytest.mark.parametrize("spec", CONTINUOUS_SPECS, ids=repr)
    def test_matches_scipy_ppf(self, spec):
        ref = scipy_frozen(spec)
        for lam in (0.01, 0.2, 0.5, 0.77, 0.99):
            assert quantile(spec, lam) == pytest.approx(ref.ppf(lam), abs=1e-9)

    @pytest.mark.parametrize("spec", DISCRETE_SPECS, ids=repr)
    def test_discrete_definition(self, spec):
        # inf{x : F(x) > lam} evaluated over the atoms by brute force
        atoms = sorted(set(getattr(spec, "values", (0.0, 1.0))))
        for lam in np.linspace(0.01, 0.99, 99):
            expected = min(v for v in atoms if cdf(spec, v) > lam)
            assert quantile(spec, lam) == expected

    @pytest.mark.parametrize("spec", ALL_SPECS, ids=repr)
    def test_nondecreasing(self, spec):
        qs = [quantile(spec, lam) for lam in np.linspace(0.001, 0.999, 200)]
        assert all(b >= a for a, b in zip(qs, qs[1:]))


class TestDensity:
    def test_uniform(self):
        assert density_info(Uniform(0, 2), 1.0) == (0.5, 0.0)
        assert density_info(Uniform(0, 2), 5.0) == (0.0, 0.0)

    def test_beta22(self):
        pdf, deriv = density_info(Beta(2, 2), 0.5)
        assert pdf == pytest.approx(1.5, rel=1e-12)
        assert deriv == pytest.approx(0.0, abs=1e-12)

    def test_discrete_unsupported(self):
        with pytest.raises(UnsupportedDistribution):
            density_info(Bernoulli(0.5), 0.0)

    @pytest.mark.parametrize("spec", CONTINUOUS_SPECS[2:], ids=repr)
    def test_against_scipy_and_finite_difference(self, spec):
        ref = scipy_frozen(spec)
        for x in (0.2, 0.45, 0.7):
            pdf, deriv = density_info(spec, x)
            assert pdf == pytest.approx(ref.pdf(x), rel=1e-10)
            h = 1e-6
            fd = (ref.pdf(x + h) - ref.pdf(x - h)) / (2 * h)
            assert deriv == pytest.approx(fd, rel=1e-5, abs=1e-6)


class TestTrueFunctional:
    def test_bernoulli_mean(self):
        assert true_functional(Bernoulli(0.7), Mean()) == pytest.approx(0.7)

    def test_uniform_avar(self):
        assert true_functional(Uniform(0, 1), AverageValueAtRisk(0.2)) == pytest.approx(-0.1, abs=1e-12)

    def test_fair_coin_entropy(self):
        assert true_functional(Bernoulli(0.5), ShannonEntropy()) == pytest.approx(1.0, abs=1e-15)

    def test_mean_variance(self):
        # Beta(2,2): mean 1/2, variance 1/20
        assert true_functional(Beta(2, 2), MeanVariance(2.0)) == pytest.approx(-0.5 + 0.1)

    @pytest.mark.parametrize("spec", CONTINUOUS_SPECS, ids=repr)
    @pytest.mark.parametrize("lam", [0.05, 0.3, 0.8])
    def test_avar_against_ppf_quadrature(self, spec, lam):
        ref = scipy_frozen(spec)
        val, _ = integrate.quad(lambda p: -ref.ppf(p), 0, lam, epsabs=1e-11, limit=200)
        assert true_functional(spec, AverageValueAtRisk(lam)) == pytest.approx(val / lam, abs=1e-7)

    def test_discrete_avar_by_hand(self):
        # atoms 0..3 w.p. .4,.3,.2,.1 at level .5: (0*.4 + 1*.1)/.5
        spec = Categorical([0.0, 1.0, 2.0, 3.0], [0.4, 0.3, 0.2, 0.1])
        assert true_functional(spec, AverageValueAtRisk(0.5)) == pytest.approx(-0.2)

    @pytest.mark.parametrize("spec", ALL_SPECS, ids=repr)
    def test_avar_dominates_var(self, spec):
        for lam in (0.05, 0.25, 0.5, 0.9):
            g_a = true_functional(spec, AverageValueAtRisk(lam))
            g_v = true_functional(spec, ValueAtRisk(lam))
            assert g_a >= g_v - 1e-9

    @pytest.mark.parametrize("spec", CONTINUOUS_SPECS, ids=repr)
    def test_differential_entropy_matches_scipy(self, spec):
        got = true_functional(spec, ShannonEntropy("knn"))
        assert got == pytest.approx(float(scipy_frozen(spec).entropy()) / math.log(2), abs=1e-9)

    def test_entropy_mode_mismatch(self):
        with pytest.raises(UnsupportedFunctional):
            true_functional(Uniform(0, 1), ShannonEntropy("plugin"))
        with pytest.raises(UnsupportedFunctional):
            true_functional(Bernoulli(0.5), ShannonEntropy("knn"))


@settings(max_examples=40, deadline=None)
@given(a=st.floats(0.2, 5.0), b=st.floats(0.2, 5.0), lam=st.floats(0.02, 0.98))
def test_beta_quantile_inverts_cdf(a, b, lam):
    spec = Beta(a, b)
    assert abs(cdf(spec, quantile(spec, lam)) - lam) <= 1e-9
