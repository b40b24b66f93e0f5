r"""Scalar special functions and envelope norms.

Building blocks shared by the quadrature and certificate layers:

    gamma(x)                 Euler gamma on x > 0
    mittag_leffler(a, z)     E_a(z) = sum_k z^k / gamma(a*k + 1)
    lp_seminorm(g, p, T)     (int_0^T g(s)^(1/p) ds)^p   for 0 < p < 1
    holder_constant(a, p)    ((1 - p)/(a - p))^(1 - p)   for 0 < p < a < 1

The seminorm and the Holder constant are the two ingredients of every
contraction estimate downstream: Holder's inequality turns the weakly
singular kernel integral int_0^t (t-s)^(a-1) g(s) ds into
c * ||g||_{1/p} * t^(a-p) with c = holder_constant(a, p).

Envelope instances are the nonnegative comparison functions (bounds and
Lipschitz envelopes) fed to lp_seminorm; they come in three concrete
forms so config files can declare them: constants, decaying exponentials
scale*exp(-rate*t), and piecewise-linear sample tables.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

__all__ = [
    "Envelope",
    "gamma",
    "mittag_leffler",
    "lp_seminorm",
    "holder_constant",
]

_ML_MAX_TERMS = 100_000
_ML_RANGE = 30.0
# refuse results whose cancellation-limited accuracy is worse than this
_ML_CANCEL_FLOOR = 3e-11
_SEMINORM_REL_TOL = 1e-10
_SEMINORM_MAX_NODES = 2**20
_PANEL_ORDER = 16


def gamma(x: float) -> float:
    """Euler gamma function for real x > 0."""
    x = float(x)
    if not x > 0.0:
        raise ValueError(f"gamma requires x > 0, got {x!r}")
    return math.gamma(x)


def mittag_leffler(alpha: float, z: float, tol: float = 1e-14) -> float:
    """One-parameter Mittag-Leffler function E_alpha(z) by direct series.

    The series is truncated once the running term magnitude falls below
    tol * (1 + |partial sum|).  Supported range |z| <= 30; beyond that the
    call is rejected.  For negative z the series alternates and the
    largest term bounds the accuracy double precision can deliver; when
    that falls short of the requested tol the call raises rather than
    returning a silently wrong value (small alpha with moderately large
    negative z is the typical failure).  For alpha = 1 this reduces to
    exp(z).
    """
    alpha = float(alpha)
    z = float(z)
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"mittag_leffler requires 0 < alpha <= 1, got {alpha!r}")
    if abs(z) > _ML_RANGE:
        raise ValueError(
            f"mittag_leffler supports |z| <= {_ML_RANGE:g} (series accuracy), got z={z!r}"
        )
    if not tol > 0.0:
        raise ValueError("tol must be positive")
    if z == 0.0:
        return 1.0

    log_abs_z = math.log(abs(z))
    total = 0.0
    largest = 0.0
    for k in range(_ML_MAX_TERMS):
        # |z|^k / gamma(alpha*k + 1) via logs so large k cannot overflow early
        expo = k * log_abs_z - math.lgamma(alpha * k + 1.0)
        if expo > 700.0:
            raise OverflowError(
                f"mittag_leffler series term overflows double precision "
                f"(alpha={alpha!r}, z={z!r})"
            )
        term = math.exp(expo)
        largest = max(largest, term)
        if z < 0.0 and k % 2 == 1:
            term = -term
        total += term
        if abs(term) <= tol * (1.0 + abs(total)):
            # alternating sums leave roundoff of order eps * largest term
            achievable = 10.0 * math.ulp(1.0) * largest / max(abs(total), 1e-300)
            if achievable > max(tol, _ML_CANCEL_FLOOR):
                raise ValueError(
                    f"mittag_leffler series cancellation at alpha={alpha!r}, "
                    f"z={z!r}: achievable relative error ~{achievable:.1e} "
                    f"exceeds tol={tol:g}; reduce |z| or relax tol"
                )
            return total
    raise ArithmeticError(
        f"mittag_leffler series did not converge within {_ML_MAX_TERMS} terms"
    )


def lp_seminorm(g: Callable[[float], float], p: float, T: float) -> float:
    r"""Seminorm ||g||_{1/p} = (\int_0^T g(s)^{1/p} ds)^p for 0 < p < 1.

    g must be nonnegative and evaluable on [0, T].  The integral is
    computed by composite 16-point Gauss-Legendre quadrature with panel
    doubling until the relative change drops below 1e-10, capped at 2^20
    nodes total.
    """
    p = float(p)
    T = float(T)
    if not 0.0 < p < 1.0:
        raise ValueError(f"lp_seminorm requires 0 < p < 1, got p={p!r}")
    if not T > 0.0:
        raise ValueError(f"lp_seminorm requires T > 0, got T={T!r}")

    ref_x, ref_w = np.polynomial.legendre.leggauss(_PANEL_ORDER)
    inv_p = 1.0 / p

    def level(panels: int) -> float:
        edges = np.linspace(0.0, T, panels + 1)
        mid = 0.5 * (edges[:-1] + edges[1:])
        half = 0.5 * (edges[1:] - edges[:-1])
        nodes = (mid[:, None] + half[:, None] * ref_x[None, :]).ravel()
        vals = _eval_nonnegative(g, nodes)
        weights = (half[:, None] * ref_w[None, :]).ravel()
        return float(weights @ vals**inv_p)

    panels = 1
    prev = level(panels)
    while True:
        panels *= 2
        if panels * _PANEL_ORDER > _SEMINORM_MAX_NODES:
            raise ArithmeticError(
                f"lp_seminorm did not converge to rel tol {_SEMINORM_REL_TOL:g} "
                f"within {_SEMINORM_MAX_NODES} nodes"
            )
        cur = level(panels)
        if abs(cur - prev) <= _SEMINORM_REL_TOL * max(abs(cur), 1e-300):
            break
        prev = cur
    return cur**p


def _eval_nonnegative(g: Callable[[float], float], nodes: np.ndarray) -> np.ndarray:
    try:
        vals = np.asarray(g(nodes), dtype=float)
        if vals.shape != nodes.shape:
            raise TypeError
    except (TypeError, ValueError):
        vals = np.asarray([float(g(float(s))) for s in nodes])
    if np.any(vals < 0.0) or not np.all(np.isfinite(vals)):
        bad = nodes[~(np.isfinite(vals) & (vals >= 0.0))][0]
        raise ValueError(f"envelope must be finite and nonnegative; fails at t={bad!r}")
    return vals


def holder_constant(alpha: float, p: float) -> float:
    """Holder pairing constant ((1 - p)/(alpha - p))^(1 - p), 0 < p < alpha < 1."""
    alpha = float(alpha)
    p = float(p)
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"holder_constant requires 0 < alpha < 1, got alpha={alpha!r}")
    if not 0.0 < p < alpha:
        raise ValueError(
            f"holder_constant requires 0 < p < alpha, got p={p!r}, alpha={alpha!r}"
        )
    return ((1.0 - p) / (alpha - p)) ** (1.0 - p)


class Envelope:
    """Nonnegative comparison function t -> g(t) in one of three closed forms.

    Construct via the factories: ``Envelope.constant(v)``,
    ``Envelope.exp_decay(scale, rate)`` (scale * exp(-rate * t)), or
    ``Envelope.from_samples(times, values)`` (piecewise linear).  Instances
    are callables accepting scalars or arrays.
    """

    __slots__ = ("form", "value", "scale", "rate", "times", "values")

    def __init__(self, form: str, **params):
        self.form = form
        self.value = params.get("value")
        self.scale = params.get("scale")
        self.rate = params.get("rate")
        self.times = params.get("times")
        self.values = params.get("values")

    @staticmethod
    def constant(value: float) -> "Envelope":
        value = float(value)
        if value < 0.0:
            raise ValueError(f"constant envelope must be nonnegative, got {value!r}")
        return Envelope("constant", value=value)

    @staticmethod
    def exp_decay(scale: float, rate: float) -> "Envelope":
        """scale * exp(-rate * t); scale must be nonnegative."""
        scale = float(scale)
        rate = float(rate)
        if scale < 0.0:
            raise ValueError(f"exp_decay scale must be nonnegative, got {scale!r}")
        return Envelope("exp_decay", scale=scale, rate=rate)

    @staticmethod
    def from_samples(times, values) -> "Envelope":
        """Piecewise-linear envelope through (times[i], values[i])."""
        times = np.asarray(times, dtype=float)
        values = np.asarray(values, dtype=float)
        if times.ndim != 1 or times.shape != values.shape or times.size < 2:
            raise ValueError("samples need matching 1-D arrays with at least 2 points")
        if np.any(np.diff(times) <= 0.0):
            raise ValueError("sample times must be strictly increasing")
        if np.any(values < 0.0):
            raise ValueError("sample values must be nonnegative")
        return Envelope("samples", times=times, values=values)

    def __call__(self, t):
        scalar = np.isscalar(t)
        ts = np.asarray(t, dtype=float)
        if self.form == "constant":
            out = np.full_like(ts, self.value)
        elif self.form == "exp_decay":
            out = self.scale * np.exp(-self.rate * ts)
        else:
            lo, hi = self.times[0], self.times[-1]
            slack = 1e-12 * max(1.0, abs(lo), abs(hi))
            if np.any(ts < lo - slack) or np.any(ts > hi + slack):
                raise ValueError(
                    f"sampled envelope defined on [{lo!r}, {hi!r}], asked outside"
                )
            out = np.interp(ts, self.times, self.values)
        return float(out) if scalar else out

    def to_dict(self) -> dict:
        if self.form == "constant":
            return {"form": "constant", "value": self.value}
        if self.form == "exp_decay":
            return {"form": "exp_decay", "scale": self.scale, "rate": self.rate}
        return {
            "form": "samples",
            "times": [float(v) for v in self.times],
            "values": [float(v) for v in self.values],
        }

    @staticmethod
    def from_dict(data: dict) -> "Envelope":
        form = data.get("form")
        if form == "constant":
            return Envelope.constant(data["value"])
        if form == "exp_decay":
            return Envelope.exp_decay(data["scale"], data["rate"])
        if form == "samples":
            return Envelope.from_samples(data["times"], data["values"])
        raise ValueError(f"unknown envelope form {form!r}")

    def __eq__(self, other):
        if not isinstance(other, Envelope):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    def __repr__(self):
        inner = ", ".join(f"{k}={v!r}" for k, v in self.to_dict().items() if k != "form")
        return f"Envelope.{self.form}({inner})"
