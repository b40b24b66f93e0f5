r"""Existence/uniqueness certificates for impulsive fractional problems.

All quantities share two ingredients: the Holder pairing constant
c = ((1-p)/(alpha-p))^(1-p) for an exponent p in (0, alpha), and
L^{1/p} seminorms of declared envelopes.  For a problem with m
impulses of Lipschitz constant l2 and a Lipschitz envelope L of the
right-hand side, the contraction constant is

    gamma = m*l2 + c * ||L||_{1/p} * T^(alpha-p) / D

with normalization D = gamma(alpha+1) in the stated form and
D = gamma(alpha) in the proof form; both are reported, the verdict
keys on the (larger) stated value.  The three contraction operations
differ only in which envelopes feed ||L||: the split kind uses the
Lipschitz envelope of the regular part, the delay kind the history
Lipschitz envelope, and the general kind the sum of state and history
envelopes.

Also provided: nested a-priori radii built from bound envelopes, the
Schaefer-route a-priori bound for delay problems with linear-growth
envelopes, the equicontinuity modulus of the compact split part, and
the classical-Gronwall growth bound for the impulsive logistic
example.  certify() assembles everything for a ProblemSpec, optionally
minimizing the stated gamma over a 64-point grid of exponents.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .problem import ProblemSpec
from .special import Envelope, gamma, holder_constant, lp_seminorm

__all__ = [
    "ContractionPair",
    "Certificate",
    "CertificateError",
    "a_priori_radii",
    "contraction_split",
    "contraction_delay",
    "contraction_general",
    "schaefer_bound",
    "equicontinuity_modulus",
    "logistic_growth_bound",
    "certify",
    "P_GRID_POINTS",
]

P_GRID_POINTS = 64

VERDICTS = ("contraction_holds", "contraction_fails", "not_applicable")


class CertificateError(ValueError):
    """Certificate computation cannot proceed (e.g. Schaefer q >= 1)."""


class ContractionPair(NamedTuple):
    """One contraction constant under both gamma-function normalizations."""

    stated: float  # denominator gamma(alpha + 1)
    proof: float  # denominator gamma(alpha)


def _check_common(alpha: float, p: float, T: float, m: int):
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha!r}")
    if not 0.0 < p < alpha:
        raise ValueError(f"p must lie in (0, alpha), got p={p!r}, alpha={alpha!r}")
    if not T > 0.0:
        raise ValueError(f"T must be positive, got {T!r}")
    if m < 0:
        raise ValueError(f"m must be nonnegative, got {m!r}")


def _kernel_factor(norm: float, alpha: float, p: float, T: float) -> float:
    return holder_constant(alpha, p) * norm * T ** (alpha - p)


def _pair(m: int, jump_lip: float, norm_sum: float, alpha: float, p: float, T: float) -> ContractionPair:
    base = _kernel_factor(norm_sum, alpha, p, T)
    jumps = m * jump_lip
    return ContractionPair(
        stated=jumps + base / gamma(alpha + 1.0),
        proof=jumps + base / gamma(alpha),
    )


def contraction_split(
    m: int, jump_lip: float, f1_lip: Envelope, alpha: float, p: float, T: float
) -> ContractionPair:
    """Contraction constant for a split RHS (Lipschitz part f1)."""
    _check_common(alpha, p, T, m)
    return _pair(m, jump_lip, lp_seminorm(f1_lip, p, T), alpha, p, T)


def contraction_delay(
    m: int, jump_lip: float, lip: Envelope, alpha: float, p: float, T: float
) -> ContractionPair:
    """Contraction constant for a single-history-argument delay RHS."""
    _check_common(alpha, p, T, m)
    return _pair(m, jump_lip, lp_seminorm(lip, p, T), alpha, p, T)


def contraction_general(
    m: int,
    jump_lip: float,
    state_lip: Envelope,
    history_lip: Envelope,
    alpha: float,
    p: float,
    T: float,
) -> ContractionPair:
    """Contraction constant for f(t, x, x_t): state and history envelopes add."""
    _check_common(alpha, p, T, m)
    norm = lp_seminorm(state_lip, p, T) + lp_seminorm(history_lip, p, T)
    return _pair(m, jump_lip, norm, alpha, p, T)


def a_priori_radii(
    x0_norm: float,
    l1: float,
    m: int,
    M1: Envelope,
    M2: Envelope | None,
    alpha: float,
    p: float,
    T: float,
) -> tuple[tuple[float, ...], float]:
    """Nested invariant-ball radii per impulse count.

    lambda_k = |x0| + k*l1 + c*(||M1|| + ||M2||)*T^(alpha-p)/gamma(alpha)
    for k = 0..m; returns (radii, lambda) with lambda = max = last.
    """
    _check_common(alpha, p, T, m)
    if x0_norm < 0.0 or l1 < 0.0:
        raise ValueError("x0_norm and l1 must be nonnegative")
    norm = lp_seminorm(M1, p, T)
    if M2 is not None:
        norm += lp_seminorm(M2, p, T)
    tail = _kernel_factor(norm, alpha, p, T) / gamma(alpha)
    radii = tuple(x0_norm + k * l1 + tail for k in range(m + 1))
    return radii, radii[-1]


def schaefer_bound(
    phi0_norm: float,
    l1_star: float,
    m: int,
    M4: Envelope,
    alpha: float,
    p: float,
    T: float,
) -> tuple[float, float]:
    """A-priori solution bound for the linear-growth delay route.

    With q = c*||M4||_{1/p}*T^(alpha-p)/gamma(alpha), the bound is
    (|phi(0)| + m*l1* + q) / (1 - q).  Returns (q, bound); q >= 1
    raises CertificateError (the route gives no bound there).
    """
    _check_common(alpha, p, T, m)
    if phi0_norm < 0.0 or l1_star < 0.0:
        raise ValueError("phi0_norm and l1_star must be nonnegative")
    q = _kernel_factor(lp_seminorm(M4, p, T), alpha, p, T) / gamma(alpha)
    if q >= 1.0:
        raise CertificateError(
            f"linear-growth factor q={q:.6g} >= 1: no a-priori bound at p={p!r}"
        )
    return q, (phi0_norm + m * l1_star + q) / (1.0 - q)


def equicontinuity_modulus(
    M2: Envelope, alpha: float, p: float, T: float
) -> float:
    """Coefficient C in |F2(tau2) - F2(tau1)| <= C*(tau2 - tau1)^(alpha-p)
    for the compact part's fractional integral: C = 2c*||M2||_{1/p}/gamma(alpha)."""
    _check_common(alpha, p, T, 0)
    return 2.0 * holder_constant(alpha, p) * lp_seminorm(M2, p, T) / gamma(alpha)


def logistic_growth_bound(
    x0_norm: float, m: int, l1: float, a_max: float, b_max: float, alpha: float
) -> float:
    """Growth bound (|x0| + m*l1)*exp((a* + b*)/gamma(alpha+1)) for the
    impulsive logistic equation with rates a(t) <= a*, b(t) <= b*."""
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha!r}")
    if min(x0_norm, l1, a_max, b_max) < 0.0 or m < 0:
        raise ValueError("arguments must be nonnegative")
    return (x0_norm + m * l1) * math.exp((a_max + b_max) / gamma(alpha + 1.0))


@dataclass(frozen=True)
class Certificate:
    """All computed constants for one problem at one Holder exponent."""

    kind: str
    alpha: float
    p: float
    T: float
    m: int
    holder_c: float
    gamma_stated: float | None
    gamma_proof: float | None
    radii: tuple[float, ...] | None
    radius: float | None
    schaefer_q: float | None
    schaefer_bound: float | None
    equicontinuity_coeff: float | None
    verdict: str
    p_auto: bool


def _gamma_pair_for(spec: ProblemSpec, p: float) -> ContractionPair | None:
    envs = spec.rhs.envelopes
    m = len(spec.impulses)
    l2 = spec.impulses.jump_lip
    if m > 0 and l2 is None:
        return None
    l2 = 0.0 if l2 is None else l2
    kind = spec.rhs.kind
    if kind == "plain" and "lip" in envs:
        return contraction_split(m, l2, envs["lip"], spec.alpha, p, spec.T)
    if kind == "split" and "f1_lip" in envs:
        return contraction_split(m, l2, envs["f1_lip"], spec.alpha, p, spec.T)
    if kind == "delay" and "lip" in envs:
        return contraction_delay(m, l2, envs["lip"], spec.alpha, p, spec.T)
    if kind == "general_delay" and "state_lip" in envs and "history_lip" in envs:
        return contraction_general(
            m, l2, envs["state_lip"], envs["history_lip"], spec.alpha, p, spec.T
        )
    return None


def _schaefer_q_for(spec: ProblemSpec, p: float) -> float | None:
    if spec.rhs.kind != "delay" or "growth" not in spec.rhs.envelopes:
        return None
    return _kernel_factor(
        lp_seminorm(spec.rhs.envelopes["growth"], p, spec.T), spec.alpha, p, spec.T
    ) / gamma(spec.alpha)


def choose_p(spec: ProblemSpec) -> tuple[float, bool]:
    """Deterministic 64-point grid search over (0, alpha).

    Minimizes gamma_stated when a Lipschitz envelope is declared, else
    the Schaefer growth factor q, else falls back to alpha/2.
    """
    alpha = spec.alpha
    grid = [alpha * i / (P_GRID_POINTS + 1) for i in range(1, P_GRID_POINTS + 1)]
    has_lip = _gamma_pair_for(spec, grid[0]) is not None
    best_p, best_val = None, math.inf
    for p in grid:
        if has_lip:
            val = _gamma_pair_for(spec, p).stated
        else:
            q = _schaefer_q_for(spec, p)
            if q is None:
                return alpha / 2.0, True
            val = q
        if val < best_val:
            best_p, best_val = p, val
    return best_p, True


def certify(spec: ProblemSpec, p: float | str = "auto") -> Certificate:
    """Assemble the certificate for spec at exponent p (or "auto").

    Quantities whose envelopes or impulse constants are missing come
    back None with verdict not_applicable rather than raising; declared
    jump bounds are spot-checked on the working ball when radii exist.
    """
    if p == "auto":
        p_val, p_auto = choose_p(spec)
    else:
        p_val = float(p)
        if not 0.0 < p_val < spec.alpha:
            raise ValueError(
                f"p must lie in (0, alpha)=(0, {spec.alpha!r}), got {p_val!r}"
            )
        p_auto = False

    alpha, T = spec.alpha, spec.T
    m = len(spec.impulses)
    envs = spec.rhs.envelopes
    kind = spec.rhs.kind

    pair = _gamma_pair_for(spec, p_val)
    if pair is None:
        verdict = "not_applicable"
        gamma_stated = gamma_proof = None
    else:
        gamma_stated, gamma_proof = pair.stated, pair.proof
        verdict = "contraction_holds" if gamma_stated < 1.0 else "contraction_fails"

    radii = radius = None
    l1 = spec.impulses.jump_bound
    bound_envs: tuple[Envelope, Envelope | None] | None = None
    if kind == "split" and "f1_bound" in envs and "f2_bound" in envs:
        bound_envs = (envs["f1_bound"], envs["f2_bound"])
    elif kind in ("plain", "delay", "general_delay") and "bound" in envs:
        bound_envs = (envs["bound"], None)
    if bound_envs is not None and (m == 0 or l1 is not None):
        radii, radius = a_priori_radii(
            float(np.linalg.norm(spec.x0)),
            0.0 if l1 is None else l1,
            m,
            bound_envs[0],
            bound_envs[1],
            alpha,
            p_val,
            T,
        )

    schaefer_q = schaefer_value = None
    l1_star = spec.impulses.jump_bound_star
    if l1_star is None:
        l1_star = spec.impulses.jump_bound
    if kind == "delay" and "growth" in envs and (m == 0 or l1_star is not None):
        try:
            schaefer_q, schaefer_value = schaefer_bound(
                float(np.linalg.norm(spec.x0)),
                0.0 if l1_star is None else l1_star,
                m,
                envs["growth"],
                alpha,
                p_val,
                T,
            )
        except CertificateError:
            schaefer_q = _schaefer_q_for(spec, p_val)
            schaefer_value = None

    equi = None
    if kind == "split" and "f2_bound" in envs:
        equi = equicontinuity_modulus(envs["f2_bound"], alpha, p_val, T)

    if radius is not None and m > 0:
        spec.impulses.spot_check(radius, spec.dim)

    return Certificate(
        kind=kind,
        alpha=alpha,
        p=p_val,
        T=T,
        m=m,
        holder_c=holder_constant(alpha, p_val),
        gamma_stated=gamma_stated,
        gamma_proof=gamma_proof,
        radii=radii,
        radius=radius,
        schaefer_q=schaefer_q,
        schaefer_bound=schaefer_value,
        equicontinuity_coeff=equi,
        verdict=verdict,
        p_auto=p_auto,
    )
