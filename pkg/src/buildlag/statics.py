"""Comparative statics of the boundary: closed-form elasticities for the
geometric model, level partials for the arithmetic model, and a
finite-difference harness to check any of them.

Conventions: an elasticity is (x / Q) dQ/dx at the given point.  The lone
exception is the pair ("c_hat", "q0"), reported as the level derivative
d c_hat / d q0 = -rho e^(rho h): it is the same at every demand level and
every q0, so the elasticity form would just obscure it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .demand import ABM, GBM, validate
from .errors import ParameterError, StepError

__all__ = [
    "Elasticity",
    "gbm_elasticity",
    "gbm_statics_table",
    "ABMPartials",
    "abm_partials",
    "FDReport",
    "finite_diff_check",
]

_QUANTITIES = ("A", "b_sigma", "c_hat")
_PARAMS = ("h", "sigma", "mu", "rho", "q0")


@dataclass(frozen=True)
class Elasticity:
    quantity: str
    wrt: str
    value: float
    analytic: bool = True


def gbm_elasticity(
    quantity: str, wrt: str, mu: float, sigma: float, rho: float, h: float
) -> Elasticity:
    """Closed-form sensitivity of the geometric-model boundary pieces.

    quantity is "A" (slope of the boundary), "b_sigma" (precautionary
    markdown per unit of demand), or "c_hat" (only with wrt="q0").  Raises
    ParameterError outside rho > 2 mu + sigma^2 and ValueError for an
    unsupported pair.
    """
    if quantity not in _QUANTITIES or wrt not in _PARAMS:
        raise ValueError(
            f"unknown pair ({quantity!r}, {wrt!r}); quantities {_QUANTITIES}, "
            f"parameters {_PARAMS}"
        )
    validate(GBM(mu, sigma), rho)
    s2 = sigma * sigma
    half = mu - 0.5 * s2
    S = math.sqrt(half * half + 2.0 * rho * s2)
    pair = (quantity, wrt)
    if pair == ("A", "h") or pair == ("b_sigma", "h"):
        # both carry the lag only through the common factor e^(mu h)
        value = mu * h
    elif pair == ("A", "sigma"):
        value = -s2 / S
    elif pair == ("A", "mu"):
        value = mu * h + 0.5 * mu / (rho - mu) * (1.0 - (mu + 0.5 * s2) / S)
    elif pair == ("A", "rho"):
        value = (
            0.5
            * (rho * s2 + mu * mu - 0.5 * mu * s2 - mu * S)
            / ((rho - mu) * S)
        )
    elif pair == ("b_sigma", "sigma"):
        value = s2 * (2.0 * rho - mu + 0.5 * s2 - S) / (S * (S - mu - 0.5 * s2))
    elif pair == ("b_sigma", "mu"):
        value = mu * (h - 0.5 / (rho - mu) * (2.0 * rho - mu + 0.5 * s2 - S) / S)
    elif pair == ("b_sigma", "rho"):
        value = 0.5 * (rho / (rho - mu)) * (mu + 0.5 * s2 - S) / S
    elif pair == ("c_hat", "q0"):
        value = -rho * math.exp(rho * h)
    else:
        raise ValueError(f"no closed form for ({quantity!r}, {wrt!r})")
    return Elasticity(quantity, wrt, float(value))


# expected sign of each entry: +1, -1, "mu" (sign of the drift), or None
# when the sign genuinely depends on the other parameters
_GBM_SIGNS = {
    ("A", "h"): "mu",
    ("A", "sigma"): -1,
    ("A", "mu"): "mu",
    ("A", "rho"): +1,
    ("b_sigma", "h"): "mu",
    ("b_sigma", "sigma"): +1,
    ("b_sigma", "mu"): None,
    ("b_sigma", "rho"): -1,
    ("c_hat", "q0"): -1,
}


def gbm_statics_table(mu: float, sigma: float, rho: float, h: float):
    """All supported entries with their sign verdicts, for reporting.

    Returns a list of (Elasticity, verdict) where verdict is "ok" when the
    computed sign matches the theoretical one, "ambiguous" for the entry
    whose sign legitimately depends on the point, and "violated" otherwise.
    """
    rows = []
    for (quantity, wrt), sign in _GBM_SIGNS.items():
        e = gbm_elasticity(quantity, wrt, mu, sigma, rho, h)
        if sign is None:
            verdict = "ambiguous"
        else:
            want = math.copysign(1.0, mu) if sign == "mu" else float(sign)
            ok = e.value == 0.0 if mu == 0.0 and sign == "mu" else e.value * want > 0.0
            verdict = "ok" if ok else "violated"
        rows.append((e, verdict))
    return rows


@dataclass(frozen=True)
class ABMPartials:
    """Level derivatives of the arithmetic-model boundary; none depends on
    d, so they describe the whole boundary at once.  cross_h_sigma is the
    mixed second derivative, identically zero: the lag enters through the
    forecast term and the volatility through the markdown, additively."""

    d_mu: float
    d_sigma: float
    d_h: float
    d_rho: float
    cross_h_sigma: float
    separable: bool


def abm_partials(mu: float, sigma: float, rho: float, h: float, q0: float) -> ABMPartials:
    validate(ABM(mu, sigma), rho)
    if not (h >= 0.0 and q0 >= 0.0):
        raise ParameterError(f"need h >= 0 and q0 >= 0, got h={h}, q0={q0}")
    root = math.sqrt(mu * mu + 2.0 * rho * sigma * sigma)
    erh = math.exp(rho * h)
    return ABMPartials(
        d_mu=h + 0.5 / rho * (1.0 - mu / root),
        d_sigma=-sigma / root,
        d_h=mu - q0 * rho * rho * erh,
        d_rho=-q0 * (1.0 + rho * h) * erh
        + (mu * mu + rho * sigma * sigma - mu * root) / (2.0 * rho * rho * root),
        cross_h_sigma=0.0,
        separable=True,
    )


@dataclass(frozen=True)
class FDReport:
    analytic: float
    finite_diff: float
    abs_err: float
    tol: float
    passed: bool


def finite_diff_check(f, x0: float, analytic: float, rel_step: float = 1e-5) -> FDReport:
    """Central-difference check of an analytic derivative.

    f is the quantity as a function of the single parameter being varied.
    If either perturbed point violates a model constraint (f raises
    ParameterError), the check cannot be run there and StepError is raised
    instead of silently shrinking the step.
    """
    if not rel_step > 0.0:
        raise ParameterError(f"need rel_step > 0, got {rel_step}")
    step = rel_step * (abs(x0) if x0 != 0.0 else 1.0)
    try:
        hi = f(x0 + step)
        lo = f(x0 - step)
    except ParameterError as exc:
        raise StepError(
            f"perturbed point of x0={x0} (step {step}) is inadmissible: {exc}"
        ) from exc
    fd = (hi - lo) / (2.0 * step)
    tol = max(1e-6, 1e-4 * abs(analytic))
    err = abs(analytic - fd)
    return FDReport(float(analytic), float(fd), float(err), float(tol), bool(err <= tol))
