"""Special functions: gamma wrapper, Mittag-Leffler series, seminorms, envelopes."""

import math

import numpy as np
import pytest

from fracimpulse.special import (
    Envelope,
    gamma,
    holder_constant,
    lp_seminorm,
    mittag_leffler,
)


class TestGamma:
    @pytest.mark.parametrize("x", [0.3, 0.5, 1.2, 4.7])
    def test_recurrence(self, x):
        assert gamma(x + 1.0) == pytest.approx(x * gamma(x), rel=1e-11)

    def test_known_values(self):
        assert gamma(1.0) == 1.0
        assert gamma(5.0) == 24.0
        assert gamma(0.5) ** 2 == pytest.approx(math.pi, rel=1e-12)

    @pytest.mark.parametrize("x", [0.0, -1.0, -0.5])
    def test_domain(self, x):
        with pytest.raises(ValueError):
            gamma(x)


class TestMittagLeffler:
    def test_at_zero(self):
        assert mittag_leffler(0.7, 0.0) == 1.0

    def test_alpha_one_is_exp(self):
        for z in np.linspace(-5.0, 5.0, 21):
            e = math.exp(z)
            assert abs(mittag_leffler(1.0, z) - e) <= 1e-12 * (1.0 + e)

    @pytest.mark.parametrize("z", [-2.0, -1.0, -0.3, 0.5, 1.0, 2.0])
    def test_half_order_erfc_identity(self, z):
        # E_{1/2}(z) = e^{z^2} erfc(-z), independent of the series code
        expected = math.exp(z * z) * math.erfc(-z)
        assert mittag_leffler(0.5, z) == pytest.approx(expected, rel=1e-12)

    def test_frozen_values(self):
        assert mittag_leffler(0.5, 1.0) == pytest.approx(5.008980080762283, rel=1e-13)
        assert mittag_leffler(0.5, -1.0) == pytest.approx(0.42758357615580700, rel=1e-13)

    def test_monotone_in_z(self):
        zs = [-1.5, -1.0, 0.0, 1.0, 3.0]
        vals = [mittag_leffler(0.3, z) for z in zs]
        assert vals == sorted(vals)

    def test_moderate_negative_argument_stays_accurate(self):
        expected = math.exp(9.0) * math.erfc(3.0)
        assert mittag_leffler(0.5, -3.0) == pytest.approx(expected, rel=1e-10)

    def test_cancellation_refused_not_silent(self):
        # small alpha, moderately negative z: the alternating series
        # cannot reach the default tol in doubles, so the call must raise
        with pytest.raises(ValueError, match="cancellation"):
            mittag_leffler(0.3, -3.0)
        with pytest.raises(ValueError, match="cancellation"):
            mittag_leffler(0.5, -10.0)

    def test_relaxed_tol_reopens_lossy_arguments(self):
        val = mittag_leffler(0.8, -10.0, tol=1e-5)
        assert 0.0 < val < 1.0

    def test_domain(self):
        with pytest.raises(ValueError):
            mittag_leffler(0.0, 1.0)
        with pytest.raises(ValueError):
            mittag_leffler(1.5, 1.0)
        with pytest.raises(ValueError):
            mittag_leffler(0.5, 31.0)
        with pytest.raises(ValueError):
            mittag_leffler(0.5, 1.0, tol=0.0)


class TestLpSeminorm:
    @pytest.mark.parametrize(
        "c,p,T", [(1.0, 0.25, 1.0), (2.5, 0.5, 3.0), (0.3, 0.75, 0.5)]
    )
    def test_constant_closed_form(self, c, p, T):
        # (int_0^T c^{1/p})^p = c * T^p
        got = lp_seminorm(lambda t: c + 0.0 * np.asarray(t), p, T)
        assert got == pytest.approx(c * T**p, rel=1e-9)

    def test_identity_function(self):
        # g(t)=t, p=0.5: (int_0^1 t^2)^{1/2} = 1/sqrt(3)
        got = lp_seminorm(lambda t: np.asarray(t, dtype=float), 0.5, 1.0)
        assert got == pytest.approx(1.0 / math.sqrt(3.0), rel=1e-9)

    def test_exp_closed_form(self):
        # g=e^{-t}, p=0.25: ((1 - e^{-4})/4)^{1/4}
        got = lp_seminorm(lambda t: np.exp(-np.asarray(t)), 0.25, 1.0)
        assert got == pytest.approx(((1.0 - math.exp(-4.0)) / 4.0) ** 0.25, rel=1e-9)

    def test_monotone_in_horizon(self):
        g = Envelope.exp_decay(1.0, 0.5)
        a = lp_seminorm(g, 0.25, 0.5)
        b = lp_seminorm(g, 0.25, 1.0)
        assert b > a

    def test_rejects_negative_integrand(self):
        with pytest.raises(ValueError):
            lp_seminorm(lambda t: np.asarray(t) - 0.5, 0.5, 1.0)

    def test_rejects_bad_exponent(self):
        with pytest.raises(ValueError):
            lp_seminorm(lambda t: 1.0, 1.0, 1.0)
        with pytest.raises(ValueError):
            lp_seminorm(lambda t: 1.0, 0.5, 0.0)


class TestHolderConstant:
    def test_frozen_value(self):
        assert holder_constant(0.5, 0.25) == pytest.approx(3.0**0.75, rel=1e-12)

    def test_closed_form(self):
        assert holder_constant(0.75, 0.25) == pytest.approx(1.5**0.75, rel=1e-12)

    def test_at_least_one(self):
        for alpha in (0.2, 0.5, 0.9):
            for frac in (0.1, 0.5, 0.9):
                assert holder_constant(alpha, alpha * frac) >= 1.0

    def test_domain(self):
        with pytest.raises(ValueError):
            holder_constant(0.5, 0.5)
        with pytest.raises(ValueError):
            holder_constant(0.5, 0.0)
        with pytest.raises(ValueError):
            holder_constant(1.0, 0.5)


class TestEnvelope:
    def test_constant(self):
        env = Envelope.constant(2.0)
        assert env(0.0) == 2.0
        assert np.all(env(np.array([0.0, 1.0, 5.0])) == 2.0)

    def test_exp_decay(self):
        env = Envelope.exp_decay(0.5, 1.0)
        ts = np.array([0.0, 0.5, 1.0])
        assert np.allclose(env(ts), 0.5 * np.exp(-ts), rtol=0, atol=0)
        assert env(0.0) == 0.5

    def test_samples_interpolation(self):
        env = Envelope.from_samples([0.0, 1.0, 2.0], [0.0, 2.0, 2.0])
        assert env(0.5) == pytest.approx(1.0)
        assert env(1.5) == pytest.approx(2.0)
        with pytest.raises(ValueError):
            env(3.0)

    def test_validation(self):
        with pytest.raises(ValueError):
            Envelope.constant(-1.0)
        with pytest.raises(ValueError):
            Envelope.exp_decay(-0.5, 1.0)
        with pytest.raises(ValueError):
            Envelope.from_samples([0.0, 0.0], [1.0, 1.0])
        with pytest.raises(ValueError):
            Envelope.from_samples([0.0, 1.0], [1.0, -1.0])
        with pytest.raises(ValueError):
            Envelope.from_samples([0.0], [1.0])

    def test_dict_round_trip(self):
        for env in (
            Envelope.constant(1.5),
            Envelope.exp_decay(0.5, 2.0),
            Envelope.from_samples([0.0, 1.0], [1.0, 0.5]),
        ):
            again = Envelope.from_dict(env.to_dict())
            assert again == env

    def test_from_dict_unknown_form(self):
        with pytest.raises(ValueError):
            Envelope.from_dict({"form": "mystery"})

    def test_seminorm_accepts_envelopes(self):
        env = Envelope.constant(0.1)
        assert lp_seminorm(env, 0.25, 1.0) == pytest.approx(0.1, rel=1e-9)
