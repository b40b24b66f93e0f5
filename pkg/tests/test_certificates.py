"""Certificate quantities against closed forms and the normalization identity."""

import math

import numpy as np
import pytest

from fracimpulse.certificates import (
    CertificateError,
    a_priori_radii,
    certify,
    choose_p,
    contraction_delay,
    contraction_general,
    contraction_split,
    equicontinuity_modulus,
    logistic_growth_bound,
    schaefer_bound,
)
from fracimpulse.problem import DelaySpec, ImpulseSchedule, ProblemSpec, RhsSpec
from fracimpulse.special import Envelope

ALPHA, P, T = 0.5, 0.25, 1.0
C_HOLDER = 3.0**0.75  # ((1-p)/(alpha-p))^(1-p) at (0.5, 0.25)


class TestContractionClosedForms:
    def test_split_frozen_value(self):
        pair = contraction_split(1, 0.25, Envelope.constant(0.1), ALPHA, P, T)
        # independent closed form: 0.25 + c * 0.1 / Gamma(1.5), Gamma(1.5) = sqrt(pi)/2
        expected = 0.25 + C_HOLDER * 0.1 * 2.0 / math.sqrt(math.pi)
        assert pair.stated == pytest.approx(expected, rel=1e-10)
        assert pair.stated == pytest.approx(0.5072148274314975, rel=1e-12)
        assert pair.proof == pytest.approx(
            0.25 + C_HOLDER * 0.1 / math.sqrt(math.pi), rel=1e-10
        )

    def test_delay_matches_split_shape(self):
        env = Envelope.constant(0.2)
        a = contraction_split(2, 0.1, env, ALPHA, P, T)
        b = contraction_delay(2, 0.1, env, ALPHA, P, T)
        assert a == b  # same formula, different envelope role

    def test_general_adds_envelope_norms(self):
        e1 = Envelope.constant(0.1)
        e2 = Envelope.constant(0.3)
        combined = contraction_general(0, 0.0, e1, e2, ALPHA, P, T)
        direct = contraction_delay(0, 0.0, Envelope.constant(0.4), ALPHA, P, T)
        assert combined.stated == pytest.approx(direct.stated, rel=1e-9)
        assert combined.proof == pytest.approx(direct.proof, rel=1e-9)

    def test_normalization_identity_sweep(self):
        # (stated - m*l2) * Gamma(a+1) == (proof - m*l2) * Gamma(a)
        rng = np.random.default_rng(20240811)
        for _ in range(20):
            alpha = float(rng.uniform(0.15, 0.95))
            p = float(alpha * rng.uniform(0.2, 0.8))
            horizon = float(rng.uniform(0.5, 3.0))
            m = int(rng.integers(0, 4))
            l2 = float(rng.uniform(0.0, 0.3))
            env = Envelope.exp_decay(float(rng.uniform(0.05, 1.0)), float(rng.uniform(0.0, 2.0)))
            pair = contraction_delay(m, l2, env, alpha, p, horizon)
            lhs = (pair.stated - m * l2) * math.gamma(alpha + 1.0)
            rhs = (pair.proof - m * l2) * math.gamma(alpha)
            assert lhs == pytest.approx(rhs, rel=1e-12)

    def test_domain_checks(self):
        env = Envelope.constant(0.1)
        with pytest.raises(ValueError):
            contraction_split(1, 0.1, env, 0.5, 0.5, 1.0)
        with pytest.raises(ValueError):
            contraction_split(1, 0.1, env, 1.2, 0.25, 1.0)
        with pytest.raises(ValueError):
            contraction_split(-1, 0.1, env, 0.5, 0.25, 1.0)


class TestRadii:
    def test_closed_form_constant_envelopes(self):
        # tail = c*(||M1|| + ||M2||)*T^(a-p)/Gamma(a), constants are their own seminorm
        radii, lam = a_priori_radii(
            1.0, 0.5, 2, Envelope.constant(0.3), Envelope.constant(0.2), ALPHA, P, T
        )
        tail = C_HOLDER * 0.5 / math.gamma(0.5)
        assert radii == pytest.approx((1.0 + tail, 1.5 + tail, 2.0 + tail), rel=1e-9)
        assert lam == radii[-1]
        assert all(b > a for a, b in zip(radii, radii[1:]))

    def test_single_bound_envelope(self):
        radii, lam = a_priori_radii(
            0.0, 0.0, 0, Envelope.constant(1.0), None, ALPHA, P, T
        )
        assert len(radii) == 1
        assert lam == pytest.approx(C_HOLDER / math.gamma(0.5), rel=1e-9)

    def test_rejects_negative_inputs(self):
        with pytest.raises(ValueError):
            a_priori_radii(-1.0, 0.0, 0, Envelope.constant(1.0), None, ALPHA, P, T)


class TestSchaefer:
    def test_frozen_value(self):
        # M4 = exp(-t)/4, phi0 = 0, one impulse bounded by 1/2, p = 1/4
        q, bound = schaefer_bound(0.0, 0.5, 1, Envelope.exp_decay(0.25, 1.0), ALPHA, P, T)
        assert q == pytest.approx(0.22629970282590746, rel=1e-10)
        assert bound == pytest.approx(0.9387351995064320, rel=1e-10)

    def test_bound_formula(self):
        q, bound = schaefer_bound(0.3, 0.1, 2, Envelope.constant(0.2), ALPHA, P, T)
        assert bound == pytest.approx((0.3 + 0.2 + q) / (1.0 - q), rel=1e-12)

    def test_rejects_q_at_least_one(self):
        with pytest.raises(CertificateError, match="q"):
            schaefer_bound(0.0, 0.0, 0, Envelope.constant(5.0), ALPHA, P, T)


def test_equicontinuity_modulus_frozen():
    got = equicontinuity_modulus(Envelope.constant(1.0), ALPHA, P, T)
    assert got == pytest.approx(2.572148274314975, rel=1e-12)
    assert got == pytest.approx(2.0 * C_HOLDER / math.sqrt(math.pi), rel=1e-10)


def test_logistic_growth_bound_frozen():
    # (|x0| + m*l1) * exp((a* + b*)/Gamma(alpha+1))
    assert logistic_growth_bound(0.1, 2, 0.05, 1.0, 1.0, 0.5) == pytest.approx(
        1.9104148582716843, rel=1e-12
    )
    assert logistic_growth_bound(0.05, 1, 0.05, 1.0, 1.0, 0.5) == pytest.approx(
        0.9552074291358421, rel=1e-12
    )
    with pytest.raises(ValueError):
        logistic_growth_bound(0.1, 2, 0.05, 1.0, 1.0, 1.5)


def _delay_problem(envelopes, jump_lip=0.0, jump_bound=0.5, star=None):
    return ProblemSpec(
        alpha=0.5,
        T=1.0,
        rhs=RhsSpec(
            kind="delay",
            f=lambda t, x, xr, sup: np.array([math.exp(-t) * sup / ((1 + math.exp(t)) * (1 + sup))]),
            envelopes=envelopes,
        ),
        impulses=ImpulseSchedule(
            times=(0.5,),
            jumps=(lambda x: np.array([0.5]),),
            jump_bound=jump_bound,
            jump_lip=jump_lip,
            jump_bound_star=star,
        ),
        delay=DelaySpec(r=0.5, history=lambda s: np.array([0.0])),
    )


class TestCertify:
    def test_delay_contraction_at_quarter(self):
        spec = _delay_problem({"lip": Envelope.exp_decay(0.5, 1.0)})
        cert = certify(spec, p=0.25)
        assert cert.gamma_stated == pytest.approx(0.9051988113036299, rel=1e-9)
        assert cert.verdict == "contraction_holds"
        assert not cert.p_auto
        # identity between the two normalizations
        lhs = (cert.gamma_stated - 0.0) * math.gamma(1.5)
        rhs = (cert.gamma_proof - 0.0) * math.gamma(0.5)
        assert lhs == pytest.approx(rhs, rel=1e-12)

    def test_auto_p_beats_quarter(self):
        spec = _delay_problem({"lip": Envelope.exp_decay(0.5, 1.0)})
        cert = certify(spec, p="auto")
        assert cert.p_auto
        fixed = certify(spec, p=0.25)
        assert cert.gamma_stated <= fixed.gamma_stated
        # grid point: alpha * i / 65
        assert any(
            cert.p == pytest.approx(0.5 * i / 65.0, abs=1e-15) for i in range(1, 65)
        )

    def test_schaefer_route(self):
        spec = _delay_problem({"growth": Envelope.exp_decay(0.25, 1.0)}, star=0.5)
        cert = certify(spec, p=0.25)
        assert cert.verdict == "not_applicable"
        assert cert.gamma_stated is None
        assert cert.schaefer_q == pytest.approx(0.22629970282590746, rel=1e-9)
        assert cert.schaefer_bound == pytest.approx(0.9387351995064320, rel=1e-9)

    def test_schaefer_q_too_large_reported_without_bound(self):
        spec = _delay_problem({"growth": Envelope.constant(5.0)}, star=0.5)
        cert = certify(spec, p=0.25)
        assert cert.schaefer_q is not None and cert.schaefer_q >= 1.0
        assert cert.schaefer_bound is None

    def test_contraction_fails_when_jumps_dominate(self):
        spec = _delay_problem({"lip": Envelope.exp_decay(0.5, 1.0)}, jump_lip=1.0)
        cert = certify(spec, p=0.25)
        assert cert.gamma_stated >= 1.0
        assert cert.verdict == "contraction_fails"

    def test_missing_jump_lip_blocks_gamma(self):
        spec = _delay_problem({"lip": Envelope.exp_decay(0.5, 1.0)}, jump_lip=None)
        cert = certify(spec, p=0.25)
        assert cert.gamma_stated is None
        assert cert.verdict == "not_applicable"

    def test_radii_from_bound_envelope(self):
        spec = _delay_problem({"bound": Envelope.exp_decay(0.5, 1.0)})
        cert = certify(spec, p=0.25)
        assert cert.radii is not None and len(cert.radii) == 2
        assert cert.radius == cert.radii[-1]
        assert cert.radii[1] - cert.radii[0] == pytest.approx(0.5, rel=1e-12)

    def test_spot_check_runs_on_working_ball(self):
        # declared bound is a lie: certify must surface it
        spec = _delay_problem({"bound": Envelope.exp_decay(0.5, 1.0)}, jump_bound=0.01)
        from fracimpulse.problem import ProblemError

        with pytest.raises(ProblemError, match="jump_bound"):
            certify(spec, p=0.25)

    def test_split_equicontinuity_and_radii(self):
        spec = ProblemSpec(
            alpha=0.5,
            T=1.0,
            rhs=RhsSpec(
                kind="split",
                f1=lambda t, x: x,
                f2=lambda t, x: -x * np.abs(x),
                envelopes={
                    "f1_bound": Envelope.constant(0.5),
                    "f2_bound": Envelope.constant(1.0),
                    "f1_lip": Envelope.constant(0.1),
                },
            ),
            x0=np.array([0.1]),
            impulses=ImpulseSchedule(
                times=(0.5,), jumps=(lambda x: np.array([0.05]),),
                jump_bound=0.05, jump_lip=0.25,
            ),
        )
        cert = certify(spec, p=0.25)
        assert cert.equicontinuity_coeff == pytest.approx(2.572148274314975, rel=1e-10)
        assert cert.gamma_stated == pytest.approx(0.5072148274314975, rel=1e-10)
        assert cert.radii is not None and len(cert.radii) == 2

    def test_invalid_p(self):
        spec = _delay_problem({"lip": Envelope.exp_decay(0.5, 1.0)})
        with pytest.raises(ValueError):
            certify(spec, p=0.5)
        with pytest.raises(ValueError):
            certify(spec, p=0.0)


def test_choose_p_minimizes_schaefer_without_lip():
    spec = _delay_problem({"growth": Envelope.exp_decay(0.25, 1.0)}, star=0.5)
    p, auto = choose_p(spec)
    assert auto
    cert = certify(spec, p=p)
    # chosen p must not lose to the fixed quarter exponent
    assert cert.schaefer_q <= 0.22629970282590746 + 1e-12


def test_choose_p_fallback_half_alpha():
    spec = ProblemSpec(
        alpha=0.6,
        T=1.0,
        rhs=RhsSpec(kind="plain", f=lambda t, x: x),
        x0=np.array([1.0]),
    )
    p, auto = choose_p(spec)
    assert auto and p == pytest.approx(0.3)
