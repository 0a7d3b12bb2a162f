import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate
from scipy.stats import norm

from ellipticbeam.channel_models import LogNormalParams, PdtEstimate, estimate_from_samples
from ellipticbeam.errors import AcceptanceError, DomainError
from ellipticbeam.quantum_optics import (
    GaussianQuadState,
    PostselectionCurve,
    db_to_var,
    propagate,
    squeezing_curve,
    var_to_db,
)


def mixture_oracle(state, atoms, counts):
    """Mean and variance of the Gaussian mixture, by numerical integration of its density."""
    w = np.asarray(counts, float) / np.sum(counts)
    locs = np.sqrt(atoms) * state.mean_x
    scales = np.sqrt(np.asarray(atoms) * state.var_x + 1 - np.asarray(atoms))
    pdf = lambda x: float(np.sum(w * norm.pdf(x, locs, scales)))
    span = 12 * scales.max() + np.abs(locs).max()
    # breakpoints at every component centre keep quad honest for narrow components
    pts = sorted(set(np.round(locs, 12)))
    kw = dict(epsabs=1e-12, epsrel=1e-12, limit=400, points=pts)
    m1 = integrate.quad(lambda x: x * pdf(x), -span, span, **kw)[0]
    m2 = integrate.quad(lambda x: x * x * pdf(x), -span, span, **kw)[0]
    return m1, m2 - m1**2


class TestDecibels:
    @pytest.mark.parametrize("db, var", [(0.0, 1.0), (-2.4, 0.5754399373371567), (-0.95, 0.8035261221856173)])
    def test_examples(self, db, var):
        assert db_to_var(db) == pytest.approx(var, rel=1e-14)
        assert var_to_db(var) == pytest.approx(db, abs=1e-13)

    @given(st.floats(-30.0, 30.0))
    def test_round_trip(self, db):
        assert var_to_db(db_to_var(db)) == pytest.approx(db, abs=1e-12)

    @pytest.mark.parametrize("bad", [0.0, -1.0])
    def test_non_positive(self, bad):
        with pytest.raises(DomainError):
            var_to_db(bad)

    def test_state_validation(self):
        with pytest.raises(DomainError):
            GaussianQuadState(0.0, 0.0)
        assert GaussianQuadState.squeezed(-2.4).squeezing_db == pytest.approx(-2.4, abs=1e-13)


class TestPropagate:
    def test_identity_channel(self):
        s = GaussianQuadState(1.3, 0.6)
        out = propagate(s, np.ones(10))
        assert out == s

    def test_full_loss(self):
        out = propagate(GaussianQuadState(2.0, 0.3), np.zeros(5))
        assert out.mean_x == 0.0 and out.var_x == 1.0

    def test_half_transmission_example(self):
        out = propagate(GaussianQuadState.squeezed(-2.4), [0.5])
        assert out.var_x == pytest.approx(0.78772, abs=5e-5)
        assert out.squeezing_db == pytest.approx(-1.036, abs=5e-4)

    @settings(deadline=None, max_examples=40)
    @given(
        st.lists(st.tuples(st.floats(0.0, 1.0), st.integers(1, 5)), min_size=1, max_size=5),
        st.floats(-3.0, 3.0),
        st.floats(0.1, 3.0),
    )
    def test_matches_mixture_oracle(self, atoms, mean, var):
        eta = np.array([a for a, _ in atoms])
        counts = np.array([c for _, c in atoms])
        state = GaussianQuadState(mean, var)
        out = propagate(state, np.repeat(eta, counts))
        m, v = mixture_oracle(state, eta, counts)
        assert out.mean_x == pytest.approx(m, abs=1e-9)
        assert out.var_x == pytest.approx(v, abs=1e-9)

    def test_two_point_oracle(self):
        state = GaussianQuadState(0.0, db_to_var(-2.4))
        out = propagate(state, [0.2, 0.9])
        _, v = mixture_oracle(state, np.array([0.2, 0.9]), [1, 1])
        assert out.var_x == pytest.approx(v, abs=1e-12)

    @given(st.lists(st.floats(0.0, 1.0), min_size=1, max_size=50), st.floats(0.05, 5.0))
    def test_linear_loss_law(self, eta, var):
        out = propagate(GaussianQuadState(0.0, var), eta)
        m = float(np.mean(eta))
        assert 1 - out.var_x == pytest.approx(m * (1 - var), abs=1e-12)
        assert min(var, 1.0) - 1e-12 <= out.var_x <= max(var, 1.0) + 1e-12

    def test_postselection_drops_low_events(self):
        s = GaussianQuadState(0.0, 0.5)
        assert propagate(s, [0.1, 0.8], eta_min=0.5) == propagate(s, [0.8])

    def test_empty_selection(self):
        with pytest.raises(AcceptanceError) as info:
            propagate(GaussianQuadState(0.0, 0.5), [0.1, 0.2], eta_min=0.3)
        assert info.value.threshold == 0.3

    def test_unphysical_samples(self):
        with pytest.raises(DomainError):
            propagate(GaussianQuadState(0.0, 0.5), [0.5, 1.1])


class TestCurve:
    state = GaussianQuadState.squeezed(-2.4)

    def test_zero_threshold_is_unpostselected(self):
        eta = np.random.default_rng(0).beta(5, 3, 2000)
        curve = squeezing_curve(self.state, estimate_from_samples(eta, "elliptic"), [0.0, 0.5])
        assert curve.squeezing_db[0] == propagate(self.state, eta).squeezing_db
        assert curve.acceptance_fraction[0] == 1.0

    @settings(deadline=None, max_examples=30)
    @given(st.integers(0, 2**32 - 1))
    def test_monotone(self, seed):
        eta = np.random.default_rng(seed).beta(2, 2, 500)
        thr = np.linspace(0, 0.9, 19)
        c = squeezing_curve(self.state, estimate_from_samples(eta, "elliptic"), thr)
        ok = ~c.truncated
        assert np.all(np.diff(c.squeezing_db[ok]) <= 1e-12)
        assert np.all(np.diff(c.acceptance_fraction) <= 0)

    def test_truncation_flag(self):
        eta = np.array([0.1, 0.4, 0.6])
        c = squeezing_curve(self.state, estimate_from_samples(eta, "elliptic"), [0.0, 0.6, 0.7])
        np.testing.assert_array_equal(c.truncated, [False, False, True])
        assert math.isnan(c.squeezing_db[2]) and c.acceptance_fraction[2] == 0.0
        assert c.is_truncated

    def test_unsorted_thresholds(self):
        with pytest.raises(DomainError):
            squeezing_curve(self.state, estimate_from_samples(np.array([0.3, 0.5]), "elliptic"), [0.5, 0.1])

    def test_pre_attenuation_threshold(self):
        eta = np.array([0.2, 0.4, 0.8]) * 0.5
        pdt = estimate_from_samples(eta, "elliptic", attenuation=0.5)
        total = squeezing_curve(self.state, pdt, [0.3])
        pre = squeezing_curve(self.state, pdt, [0.3], threshold_on="pre_attenuation")
        assert total.acceptance_fraction[0] == pytest.approx(1 / 3)
        assert pre.acceptance_fraction[0] == pytest.approx(2 / 3)

    def test_lognormal_matches_large_sample(self):
        p = LogNormalParams(mu=0.6, sigma=0.25)
        pdt = PdtEstimate("log_normal", np.array([]), p.mean, 0.0, p.second_moment, 0.0, np.array([]), np.array([]), 1.0, p)
        eta = np.exp(np.random.default_rng(3).normal(-p.mu, p.sigma, 2_000_000))
        thr = [0.0, 0.4, 0.6]
        analytic = squeezing_curve(self.state, pdt, thr)
        for t, sq, acc in zip(thr, analytic.squeezing_db, analytic.acceptance_fraction):
            kept = eta[eta >= t]
            mc = 10 * np.log10(np.mean(kept) * self.state.var_x + 1 - np.mean(kept))
            assert sq == pytest.approx(mc, abs=2e-3)
            assert acc == pytest.approx(kept.size / eta.size, abs=2e-3)

    def test_curve_lengths_checked(self):
        with pytest.raises(DomainError):
            PostselectionCurve([0.0, 0.1], [1.0], [1.0, 1.0], [False, False])
