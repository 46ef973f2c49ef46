"""Horseshoe prior kernel, sampling primitives, and prior-condition checks.

The scalar prior on an off-diagonal entry is a normal scale mixture,
N(0, alpha^2 * lambda^2) with lambda half-Cauchy, alpha acting as the fixed
global scale.  Its marginal density has no closed form; it is evaluated by
adaptive Simpson quadrature after the substitution lambda = tan(theta),
which maps the half-line to (0, pi/2).

Two numerical checks qualify a given alpha: a concentration check (the mass
escaping [-a_n, a_n] must not exceed p^-(1+u)) and a thickness check (the
density on [-E_n, E_n] must stay above p^-c).  Both are offline verification
tools; the Gibbs sampler never calls them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import NumericalError, ValidationError
from .rng import RngStream

__all__ = [
    "sample_normal",
    "sample_exponential",
    "sample_gamma",
    "horseshoe_marginal_density",
    "PriorConditionSpec",
    "check_concentration",
    "check_thickness",
]

_SQRT_2PI = math.sqrt(2.0 * math.pi)
_HALF_PI = 0.5 * math.pi


# ---------------------------------------------------------------------------
# Sampling primitives.  Rate parameterization throughout: the gamma density
# is proportional to x^(shape-1) * exp(-rate * x).
# ---------------------------------------------------------------------------

def _require_positive(name: str, value: float):
    if not (value > 0 and math.isfinite(value)):
        raise ValidationError(f"{name} must be positive and finite, got {value}")


def sample_normal(stream: RngStream, mean: float, var: float) -> float:
    """One draw from N(mean, var)."""
    _require_positive("var", var)
    return mean + math.sqrt(var) * float(stream.standard_normal())


def sample_exponential(stream: RngStream, rate: float) -> float:
    """One draw from Exp(rate), mean 1/rate."""
    _require_positive("rate", rate)
    return float(stream.standard_exponential()) / rate


def sample_gamma(stream: RngStream, shape: float, rate: float) -> float:
    """One draw from Gamma(shape, rate), mean shape/rate."""
    _require_positive("shape", shape)
    _require_positive("rate", rate)
    return float(stream.standard_gamma(shape)) / rate


# ---------------------------------------------------------------------------
# Quadrature
# ---------------------------------------------------------------------------

def _adaptive_simpson(f, a: float, b: float, tol: float, max_evals: int = 200_000) -> float:
    """Adaptive Simpson on [a, b] to absolute tolerance tol."""
    fa, fm, fb = f(a), f(0.5 * (a + b)), f(b)
    evals = 3
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    # stack entries: (a, b, fa, fm, fb, segment_estimate, segment_tol)
    stack = [(a, b, fa, fm, fb, whole, tol)]
    total = 0.0
    while stack:
        a0, b0, fa0, fm0, fb0, s0, t0 = stack.pop()
        m = 0.5 * (a0 + b0)
        lm, rm = 0.5 * (a0 + m), 0.5 * (m + b0)
        flm, frm = f(lm), f(rm)
        evals += 2
        if evals > max_evals:
            raise NumericalError("quadrature failed to converge within evaluation budget")
        s_left = (m - a0) / 6.0 * (fa0 + 4.0 * flm + fm0)
        s_right = (b0 - m) / 6.0 * (fm0 + 4.0 * frm + fb0)
        err = s_left + s_right - s0
        if abs(err) <= 15.0 * t0 or (b0 - a0) < 1e-15 * max(abs(a0), abs(b0), 1.0):
            total += s_left + s_right + err / 15.0
        else:
            stack.append((a0, m, fa0, flm, fm0, s_left, 0.5 * t0))
            stack.append((m, b0, fm0, frm, fb0, s_right, 0.5 * t0))
    return total


def _integrate_with_breakpoints(f, points, tol: float) -> float:
    """Adaptive Simpson over consecutive panels [points[i], points[i+1]]."""
    panels = len(points) - 1
    return sum(
        _adaptive_simpson(f, points[i], points[i + 1], tol / panels)
        for i in range(panels)
    )


def _theta_panels(scale: float):
    """Panel boundaries in theta resolving the transition near lambda = scale."""
    pts = {0.0, _HALF_PI, math.atan(1.0)}
    if scale > 0 and math.isfinite(scale):
        for k in range(-3, 4):
            lam = scale * 10.0 ** k
            if lam > 0:
                pts.add(math.atan(lam))
    return sorted(pts)


# ---------------------------------------------------------------------------
# Horseshoe marginal and the two prior conditions
# ---------------------------------------------------------------------------

def horseshoe_marginal_density(x: float, alpha: float, tol: float = 1e-8) -> float:
    """Marginal density at x of N(0, alpha^2 lambda^2) with lambda ~ C+(0,1).

    Evaluated as (2/pi) * integral over theta in (0, pi/2) of the normal pdf
    with sd alpha*tan(theta).  The density is even in x and has an infinite
    spike at the origin; x == 0 returns inf.
    """
    _require_positive("alpha", alpha)
    if not (0 < tol <= 1e-4):
        raise ValidationError(f"tol must lie in (0, 1e-4], got {tol}")
    x = float(x)
    if x == 0.0:
        return math.inf
    ax = abs(x)

    def integrand(theta: float) -> float:
        sd = alpha * math.tan(theta)
        if sd <= 0.0:
            return 0.0
        z = ax / sd
        if z > 38.0:  # exp underflows; avoids spurious inf * 0
            return 0.0
        return (2.0 / math.pi) * math.exp(-0.5 * z * z) / (sd * _SQRT_2PI)

    return _integrate_with_breakpoints(integrand, _theta_panels(ax / alpha), tol)


@dataclass(frozen=True)
class PriorConditionSpec:
    """Inputs for the concentration/thickness checks.

    a_n is the concentration radius, E_n the signal-strength bound, u > 0 the
    concentration exponent, c > 1 the thickness exponent, alpha the fixed
    global hyper-parameter under test.
    """

    a_n: float
    E_n: float
    p: int
    u: float
    c: float
    alpha: float

    def __post_init__(self):
        _require_positive("a_n", self.a_n)
        _require_positive("E_n", self.E_n)
        _require_positive("alpha", self.alpha)
        _require_positive("u", self.u)
        if self.p < 2:
            raise ValidationError(f"p must be >= 2, got {self.p}")
        if not self.a_n < self.E_n:
            raise ValidationError("a_n must be smaller than E_n")
        if not self.c > 1:
            raise ValidationError(f"c must exceed 1, got {self.c}")


def prior_tail_mass(a: float, alpha: float, tol: float = 1e-8) -> float:
    """P(|x| > a) under the horseshoe marginal with global scale alpha.

    Computed in lambda-space (Tonelli) as (2/pi) * integral of
    2 * normal_sf(a / (alpha lambda)) / (1 + lambda^2), which avoids both the
    origin spike and 1 - (1 - eps) cancellation for tiny masses.
    """
    _require_positive("a", a)
    _require_positive("alpha", alpha)

    def integrand(theta: float) -> float:
        lam = math.tan(theta)
        if lam <= 0.0:
            return 0.0
        t = a / (alpha * lam)
        return (2.0 / math.pi) * math.erfc(t / math.sqrt(2.0))

    return _integrate_with_breakpoints(integrand, _theta_panels(a / alpha), tol)


def check_concentration(spec: PriorConditionSpec, tol: float = 1e-8):
    """Condition (a): mass outside [-a_n, a_n] at most p^-(1+u).

    Returns (mass_outside, passes).
    """
    mass_outside = min(max(prior_tail_mass(spec.a_n, spec.alpha, tol), 0.0), 1.0)
    return mass_outside, mass_outside <= spec.p ** -(1.0 + spec.u)


def check_thickness(spec: PriorConditionSpec, tol: float = 1e-8):
    """Condition (b): density on [-E_n, E_n] at least p^-c.

    The marginal is even and non-increasing in |x|, so the infimum over the
    interval sits at |x| = E_n.  Returns (inf_density, passes).
    """
    inf_density = horseshoe_marginal_density(spec.E_n, spec.alpha, tol)
    return inf_density, inf_density >= spec.p ** -spec.c
