"""The optimal investment boundary and its bias decomposition.

A planner facing quadratic flow loss (K_t - D_t)^2 / 2, unit investment cost
q0, discount rate rho, and a fixed lag h between commitment and delivery,
commits capacity the first time demand pushes the threshold

    chat(d) = beta0(d) - b_rho - b_sigma(d)

above the level already committed.  The three pieces:

    beta0(d)   expected demand one lag ahead (chase the forecast)
    b_rho      q0 rho e^(rho h), cost of capital locked in during the lag
    b_sigma(d) precautionary markdown from irreversibility under uncertainty

For affine drift mu(d) = a d + b the markdown is

    b_sigma(d) = sigma(d)^2 / 2 * e^(a h) / (rho - a) * psi''(d) / psi'(d)

with psi the increasing solution of rho phi = mu phi' + sigma^2/2 phi''.
Closed forms are implemented per model; `generic_boundary` recomputes the
threshold from scratch by integrating the psi Riccati equation numerically
and is used as an independent cross-check, never as a fallback.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .demand import (
    ABM,
    CIR,
    GBM,
    DemandModel,
    beta0,
    beta_resolvent,
    drift_affine,
    validate,
)
from .errors import DomainError, NumericsError, ParameterError
from .kummer import psi_ratio_second

__all__ = [
    "BiasDecomposition",
    "Boundary",
    "gbm_constants",
    "abm_lambda",
    "cir_tangent",
    "cir_asymptote",
    "cir_kink",
    "generic_boundary",
]


@dataclass(frozen=True)
class BiasDecomposition:
    """chat(d) split into forecast minus the two biases."""

    beta0: float
    discounting_bias: float
    precautionary_bias: float

    @property
    def total(self) -> float:
        return self.beta0 - self.discounting_bias - self.precautionary_bias


def abm_lambda(mu: float, sigma: float, rho: float) -> float:
    """Positive root of rho - mu*l - sigma^2 l^2 / 2 = 0 (exponent of psi)."""
    root = math.sqrt(mu * mu + 2.0 * rho * sigma * sigma)
    # avoid cancellation when mu > 0 dominates the root
    if mu >= 0.0:
        return 2.0 * rho / (root + mu)
    return (root - mu) / sigma**2


def gbm_constants(mu: float, sigma: float, rho: float, h: float) -> tuple[float, float]:
    """Exponent m of psi(d) = d^m and the slope A of chat(d) = A d - b_rho.

    m is the positive root of rho - mu*m - sigma^2 m (m-1) / 2 = 0; the
    admissibility condition rho > 2 mu + sigma^2 is equivalent to m > 2.
    A = e^(mu h) (2 rho - mu + sigma^2/2 - R) / (2 (rho - mu)) with
    R = sqrt((mu - sigma^2/2)^2 + 2 rho sigma^2), rearranged below into a
    cancellation-free form (exact in the sigma -> 0 limit).
    """
    validate(GBM(mu, sigma), rho)
    s2 = sigma * sigma
    half = mu - 0.5 * s2
    root = math.sqrt(half * half + 2.0 * rho * s2)
    m = 2.0 * rho / (root + half) if half >= 0.0 else (root - half) / s2
    A = 2.0 * rho * math.exp(mu * h) / (2.0 * rho - mu + 0.5 * s2 + root)
    return m, A


class Boundary:
    """Threshold rule d -> least committed capacity, for one model and
    one (rho, h, q0).

    eval() accepts scalars or arrays.  decompose() returns the three-way
    split; eval is computed by recombining exactly the same three terms, so
    eval(d) == decompose(d).total bit for bit.
    """

    def __init__(self, model: DemandModel, rho: float, h: float, q0: float):
        validate(model, rho)
        if not h >= 0.0:
            raise ParameterError(f"need h >= 0, got h={h}")
        if not q0 >= 0.0:
            raise ParameterError(f"need q0 >= 0, got q0={q0}")
        self.model = model
        self.rho = rho
        self.h = h
        self.q0 = q0
        self.discounting_bias = q0 * rho * math.exp(rho * h)
        if isinstance(model, ABM):
            self.lam = abm_lambda(model.mu, model.sigma, rho)
            self._abm_bias = 0.5 * model.sigma**2 * self.lam / rho
        elif isinstance(model, GBM):
            self.m, self.A = gbm_constants(model.mu, model.sigma, rho, h)
            # b_sigma slope: (e^(mu h) - A) computed via the m form
            self._bs_slope = (
                0.5 * model.sigma**2 * math.exp(model.mu * h) * (self.m - 1.0)
                / (rho - model.mu)
            )

    def _check_domain(self, d) -> None:
        if not np.all(np.isfinite(d)):
            raise DomainError("demand level must be finite")
        if isinstance(self.model, GBM) and not np.all(np.asarray(d) > 0.0):
            raise DomainError("demand level must be positive for GBM")
        # d = 0 is allowed for CIR: the boundary extends continuously to the
        # origin (the precautionary term carries a factor d)
        if isinstance(self.model, CIR) and not np.all(np.asarray(d) >= 0.0):
            raise DomainError("demand level must be nonnegative for CIR")

    def precautionary(self, d):
        """b_sigma(d).  Vectorized in d."""
        d = np.asarray(d, dtype=float)
        self._check_domain(d)
        if isinstance(self.model, ABM):
            out = self._abm_bias + 0.0 * d
        elif isinstance(self.model, GBM):
            out = self._bs_slope * d
        else:
            g = self.model.gamma
            pref = 0.5 * self.model.sigma**2 * math.exp(-g * self.h) / (self.rho + g)
            flat = d.reshape(-1)
            ratios = np.array(
                [
                    psi_ratio_second(self.model, self.rho, float(x)) if x > 0.0 else 0.0
                    for x in flat
                ]
            )
            out = (pref * flat * ratios).reshape(d.shape)
        return out if out.ndim else float(out)

    def eval(self, d):
        """chat(d).  Vectorized in d."""
        d = np.asarray(d, dtype=float)
        b0 = beta0(self.model, d, self.h)
        out = b0 - self.discounting_bias - self.precautionary(d)
        return out if np.ndim(out) else float(out)

    def decompose(self, d: float) -> BiasDecomposition:
        """Three-way split of chat at a single demand level."""
        return BiasDecomposition(
            beta0=float(beta0(self.model, d, self.h)),
            discounting_bias=self.discounting_bias,
            precautionary_bias=float(self.precautionary(d)),
        )

    def table(self, d_lo: float, d_hi: float, n: int = 2049):
        """Piecewise-linear surrogate of eval on [d_lo, d_hi].

        For the square-root model each exact evaluation costs two special
        function calls, too slow for 1e7-point Monte Carlo matrices; the
        surrogate evaluates the boundary on a dense grid once and
        interpolates (linear extrapolation outside the range).  ABM/GBM
        boundaries are affine, so eval itself is returned.
        """
        if not isinstance(self.model, CIR):
            return self.eval
        if not (d_hi > d_lo > 0.0):
            raise DomainError(f"need 0 < d_lo < d_hi, got [{d_lo}, {d_hi}]")
        grid = np.linspace(d_lo, d_hi, n)
        vals = self.eval(grid)
        lo_slope = (vals[1] - vals[0]) / (grid[1] - grid[0])
        hi_slope = (vals[-1] - vals[-2]) / (grid[-1] - grid[-2])

        def interp(d):
            d = np.asarray(d, dtype=float)
            out = np.interp(d, grid, vals)
            out = np.where(d < grid[0], vals[0] + (d - grid[0]) * lo_slope, out)
            out = np.where(d > grid[-1], vals[-1] + (d - grid[-1]) * hi_slope, out)
            return out if out.ndim else float(out)

        return interp


# ---------------------------------------------------------------------------
# Square-root model geometry: tangent at the origin, asymptote, kink
# ---------------------------------------------------------------------------


def _cir_args(model: CIR, rho: float, h: float, q0: float):
    validate(model, rho)
    if not h >= 0.0:
        raise ParameterError(f"need h >= 0, got h={h}")
    if not q0 >= 0.0:
        raise ParameterError(f"need q0 >= 0, got q0={q0}")
    return model.gamma, model.delta, model.sigma, math.exp(-model.gamma * h)


def cir_tangent(model: CIR, rho: float, h: float, q0: float, d):
    """Tangent line of the square-root boundary at d -> 0."""
    g, dl, s, e = _cir_args(model, rho, h, q0)
    slope = (g * dl / (g * dl + 0.5 * s * s)) * e
    return slope * np.asarray(d, dtype=float) + (1.0 - e) * dl - q0 * rho * math.exp(rho * h)


def cir_asymptote(model: CIR, rho: float, h: float, q0: float, d):
    """Asymptote of the square-root boundary as d -> inf."""
    g, dl, s, e = _cir_args(model, rho, h, q0)
    slope = (rho / (rho + g)) * e
    intercept = (1.0 - slope) * dl - (s * s / (2.0 * g)) * slope - q0 * rho * math.exp(rho * h)
    return slope * np.asarray(d, dtype=float) + intercept


def cir_kink(model: CIR, rho: float, h: float, q0: float) -> tuple[float, float]:
    """Intersection of tangent and asymptote: the stylized 'kink' of the
    boundary sits at (delta + sigma^2/(2 gamma), delta - q0 rho e^(rho h)),
    independent of the lag."""
    g, dl, s, _ = _cir_args(model, rho, h, q0)
    return dl + s * s / (2.0 * g), dl - q0 * rho * math.exp(rho * h)


# ---------------------------------------------------------------------------
# Independent numerical oracle
# ---------------------------------------------------------------------------


def generic_boundary(model: DemandModel, rho: float, h: float, q0: float, d: float) -> float:
    """Recompute chat(d) without any model-specific closed form for psi.

    Uses the resolvent identity chat(d) = rho * (beta(d) - (psi/psi') beta'(d)
    - q0 e^(rho h)), where psi/psi' comes from integrating the Riccati
    equation for u = psi'/psi:

        u' = 2 (rho - mu(d) u) / sigma(d)^2 - u^2

    rightward from an anchor near the left end of the state space.  The
    decreasing companion solution blows up at the left end, so any bounded
    initial condition converges exponentially to the increasing solution by
    the time the query point is reached; anchors are placed so the remaining
    contamination is below 1e-16 relative.  beta and beta' use the affine
    closed forms, which are validated independently against quadrature.
    """
    validate(model, rho)
    if not h >= 0.0:
        raise ParameterError(f"need h >= 0, got h={h}")
    if not q0 >= 0.0:
        raise ParameterError(f"need q0 >= 0, got q0={q0}")
    if isinstance(model, ABM):
        if not np.isfinite(d):
            raise DomainError("demand level must be finite")
        ratio = _psi_ratio_abm(model, rho, float(d))
    else:
        if not d > 0.0:
            raise DomainError(f"need d > 0 for {type(model).__name__}, got {d}")
        ratio = _psi_ratio_logspace(model, rho, float(d))
    a, _ = drift_affine(model)
    beta_slope = math.exp(a * h) / (rho - a)
    return rho * (
        float(beta_resolvent(model, d, rho, h)) - ratio * beta_slope - q0 * math.exp(rho * h)
    )


def _solve(rhs, span, y0):
    sol = solve_ivp(rhs, span, [y0], method="Radau", rtol=1e-10, atol=1e-13)
    if sol.status != 0:
        sol = solve_ivp(rhs, span, [y0], method="LSODA", rtol=1e-10, atol=1e-13)
    if sol.status != 0:
        raise NumericsError(f"psi ratio integration failed: {sol.message}")
    out = float(sol.y[0, -1])
    if not (math.isfinite(out) and out > 0.0):
        raise NumericsError(f"psi ratio integration produced {out}")
    return out


def _psi_ratio_abm(model: ABM, rho: float, d: float) -> float:
    """psi/psi' at d for the whole-line model, via u' in level space."""
    mu, sig = model.mu, model.sigma
    s2 = sig * sig

    def rhs(_, u):
        return 2.0 * (rho - mu * u) / s2 - u * u

    # contamination by the decreasing solution decays at the root gap
    gap = 2.0 * math.sqrt(mu * mu + 2.0 * rho * s2) / s2
    u = _solve(rhs, [d - 46.0 / gap, d], 0.0)
    return 1.0 / u


def _psi_ratio_logspace(model, rho: float, d: float) -> float:
    """psi/psi' at d for the positive-halfline models, via w = d psi'/psi
    integrated in x = log d."""

    def rhs(x, w):
        dd = math.exp(x)
        s2 = float(model.diffusion(dd)) ** 2
        return w + (2.0 / s2) * (rho * dd * dd - float(model.drift(dd)) * dd * w) - w * w

    if isinstance(model, GBM):
        s2 = model.sigma**2
        half = model.mu - 0.5 * s2
        gap = 2.0 * math.sqrt(half * half + 2.0 * rho * s2) / s2
        span_len = max(6.0, 46.0 / gap)
        w0 = 0.0
    else:
        # anchor near the regular left boundary, where the increasing
        # solution satisfies rho psi(0) = gamma delta psi'(0)
        anchor = 1e-6 * min(d, model.delta)
        span_len = math.log(d / anchor)
        w0 = anchor * rho / (model.gamma * model.delta)
    x1 = math.log(d)
    w = _solve(rhs, [x1 - span_len, x1], w0)
    return d / w
