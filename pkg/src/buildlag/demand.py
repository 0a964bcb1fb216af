"""Demand-side diffusion models.

Three exactly-sampleable diffusions for the demand process, together with
the conditional moments over the build lag and the discounted-mean resolvent
that the investment boundary is built from:

    beta0(d)  = E[D_h | D_0 = d]           (mean over one lag)
    alpha0(d) = E[D_h^2 | D_0 = d]         (second moment over one lag)
    beta(d)   = int_0^inf e^(-rho t) E[beta0(D_t) | D_0 = d] dt

All three models have affine drift, so beta is affine in d and available in
closed form; the closed forms are cross-checked against quadrature in the
test suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError

__all__ = [
    "ABM",
    "GBM",
    "CIR",
    "DemandModel",
    "TimeGrid",
    "DemandPath",
    "validate",
    "state_space",
    "in_state_space",
    "drift_affine",
    "beta0",
    "alpha0",
    "beta_resolvent",
    "sample_path",
    "sample_paths",
]


@dataclass(frozen=True)
class ABM:
    """Arithmetic Brownian demand, dD = mu dt + sigma dW, on the whole line.

    mu is in level units per year, sigma in level units per sqrt(year).
    """

    mu: float
    sigma: float

    def __post_init__(self) -> None:
        if not self.sigma > 0.0:
            raise ParameterError(f"ABM needs sigma > 0, got sigma={self.sigma}")

    def drift(self, d):
        return self.mu + 0.0 * d

    def diffusion(self, d):
        return self.sigma + 0.0 * d


@dataclass(frozen=True)
class GBM:
    """Geometric Brownian demand, dD = mu D dt + sigma D dW, on (0, inf)."""

    mu: float
    sigma: float

    def __post_init__(self) -> None:
        if not self.sigma > 0.0:
            raise ParameterError(f"GBM needs sigma > 0, got sigma={self.sigma}")

    def drift(self, d):
        return self.mu * d

    def diffusion(self, d):
        return self.sigma * d


@dataclass(frozen=True)
class CIR:
    """Square-root mean-reverting demand on (0, inf):

        dD = gamma (delta - D) dt + sigma sqrt(D) dW

    gamma is the reversion speed, delta the long-run level.  Positivity of
    the process requires the Feller condition 2 gamma delta >= sigma^2,
    enforced at construction.
    """

    gamma: float
    delta: float
    sigma: float

    def __post_init__(self) -> None:
        if not (self.gamma > 0.0 and self.delta > 0.0 and self.sigma > 0.0):
            raise ParameterError(
                f"CIR needs gamma, delta, sigma > 0, got "
                f"({self.gamma}, {self.delta}, {self.sigma})"
            )
        if not 2.0 * self.gamma * self.delta >= self.sigma**2:
            raise ParameterError(
                f"CIR needs 2*gamma*delta >= sigma^2 for positivity, got "
                f"2*{self.gamma}*{self.delta} = {2*self.gamma*self.delta:.6g} "
                f"< sigma^2 = {self.sigma**2:.6g}"
            )

    def drift(self, d):
        return self.gamma * (self.delta - d)

    def diffusion(self, d):
        return self.sigma * np.sqrt(d)


DemandModel = ABM | GBM | CIR


def state_space(model: DemandModel) -> tuple[float, float]:
    """Open interval the demand process lives on."""
    if isinstance(model, ABM):
        return (-math.inf, math.inf)
    return (0.0, math.inf)


def in_state_space(model: DemandModel, d) -> bool:
    d = np.asarray(d, dtype=float)
    if isinstance(model, ABM):
        return bool(np.all(np.isfinite(d)))
    return bool(np.all(np.isfinite(d)) and np.all(d > 0.0))


def drift_affine(model: DemandModel) -> tuple[float, float]:
    """Slope and intercept (a, b) of the affine drift mu(d) = a d + b."""
    if isinstance(model, ABM):
        return 0.0, model.mu
    if isinstance(model, GBM):
        return model.mu, 0.0
    if isinstance(model, CIR):
        return -model.gamma, model.gamma * model.delta
    raise TypeError(f"unknown demand model {model!r}")


def validate(model: DemandModel, rho: float) -> None:
    """Check that the discount rate dominates second-moment growth.

    Model-level parameter constraints are already enforced by the dataclass
    constructors; this adds the discounting condition that keeps discounted
    quadratic costs finite:

        ABM, CIR:  rho > 0   (second moments grow at most polynomially /
                              stay bounded)
        GBM:       rho > max(0, 2 mu + sigma^2)   (E[D_t^2] grows like
                              e^((2 mu + sigma^2) t))
    """
    if not isinstance(model, (ABM, GBM, CIR)):
        raise TypeError(f"unknown demand model {model!r}")
    if not rho > 0.0:
        raise ParameterError(f"need rho > 0, got rho={rho}")
    if isinstance(model, GBM):
        floor = 2.0 * model.mu + model.sigma**2
        if not rho > floor:
            raise ParameterError(
                f"GBM needs rho > 2*mu + sigma^2 = {floor:.6g}, got rho={rho}"
            )


# ---------------------------------------------------------------------------
# Time grids and paths
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid t_i = t0 + i*dt for i = 0..n_steps (n_steps+1 points)."""

    t0: float
    dt: float
    n_steps: int

    def __post_init__(self) -> None:
        if not self.dt > 0.0:
            raise ParameterError(f"need dt > 0, got dt={self.dt}")
        if not self.n_steps >= 1:
            raise ParameterError(f"need n_steps >= 1, got {self.n_steps}")

    def times(self) -> np.ndarray:
        # i*dt rather than repeated addition: no accumulated rounding drift
        return self.t0 + self.dt * np.arange(self.n_steps + 1)

    @property
    def t_end(self) -> float:
        return self.t0 + self.dt * self.n_steps


@dataclass(frozen=True)
class DemandPath:
    """A sampled demand trajectory on a grid, with its running maximum.

    running_max[i] = max(values[0..i]); the optimal policy depends on the
    path only through this statistic.
    """

    grid: TimeGrid
    values: np.ndarray
    running_max: np.ndarray
    seed: int


# ---------------------------------------------------------------------------
# Moments
# ---------------------------------------------------------------------------


def beta0(model: DemandModel, d, h: float):
    """Conditional mean E[D_h | D_0 = d].  Vectorized in d."""
    d = np.asarray(d, dtype=float)
    if isinstance(model, ABM):
        out = d + model.mu * h
    elif isinstance(model, GBM):
        out = d * math.exp(model.mu * h)
    elif isinstance(model, CIR):
        e = math.exp(-model.gamma * h)
        out = model.delta + e * (d - model.delta)
    else:
        raise TypeError(f"unknown demand model {model!r}")
    return out if out.ndim else float(out)


def alpha0(model: DemandModel, d, h: float):
    """Conditional second moment E[D_h^2 | D_0 = d].  Vectorized in d."""
    d = np.asarray(d, dtype=float)
    if isinstance(model, ABM):
        out = (d + model.mu * h) ** 2 + model.sigma**2 * h
    elif isinstance(model, GBM):
        out = d**2 * math.exp((2.0 * model.mu + model.sigma**2) * h)
    elif isinstance(model, CIR):
        g, dl, s = model.gamma, model.delta, model.sigma
        e = math.exp(-g * h)
        mean = dl + e * (d - dl)
        var = d * s**2 * (e - e * e) / g + dl * s**2 * (1.0 - e) ** 2 / (2.0 * g)
        out = mean**2 + var
    else:
        raise TypeError(f"unknown demand model {model!r}")
    return out if out.ndim else float(out)


def beta_resolvent(model: DemandModel, d, rho: float, h: float):
    """Discounted resolvent of the lag-h mean,

        beta(d) = int_0^inf e^(-rho t) E[ beta0(D_t) | D_0 = d ] dt.

    Because E[beta0(D_t)] = E[D_(t+h)] and the drift is affine, the integral
    has a closed form; it is affine in d for all three models.
    """
    validate(model, rho)
    d = np.asarray(d, dtype=float)
    if isinstance(model, ABM):
        out = model.mu * h / rho + d / rho + model.mu / rho**2
    elif isinstance(model, GBM):
        out = math.exp(model.mu * h) * d / (rho - model.mu)
    elif isinstance(model, CIR):
        g, dl = model.gamma, model.delta
        out = math.exp(-g * h) * (d - dl) / (rho + g) + dl / rho
    else:
        raise TypeError(f"unknown demand model {model!r}")
    return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# Exact transition sampling
# ---------------------------------------------------------------------------


def _check_d0(model: DemandModel, d0: float) -> None:
    if not in_state_space(model, d0):
        lo, hi = state_space(model)
        raise ParameterError(f"d0={d0} outside state space ({lo}, {hi})")


def _streams(seq):
    """Per-path child streams: (increments, chi-square, bridge uniforms).

    Always three, in a fixed order, so path values do not depend on which
    optional blocks a caller consumes, and the first n draws of each stream
    coincide across grids of different lengths (common random numbers stay
    paired across horizons).
    """
    return seq.spawn(3)


def _bridge_max(a, b, var_dt, u):
    """Max of a Brownian bridge from a to b over one step, by inversion.

    var_dt is sigma^2 * dt per interval (array or scalar); u is uniform on
    [0, 1).  The drift drops out of the bridge law.  The grid running max
    misses the intra-step excursions and is biased low by O(sqrt(dt)); this
    draw restores the exact continuous-time interval maximum.
    """
    return 0.5 * (a + b + np.sqrt((b - a) ** 2 - 2.0 * var_dt * np.log1p(-u)))


def _running_max(vals, interval_max):
    out = np.empty_like(vals)
    out[:, 0] = vals[:, 0]
    np.maximum.accumulate(np.maximum(interval_max, vals[:, 1:]), axis=1, out=out[:, 1:])
    np.maximum(out[:, 1:], out[:, :1], out=out[:, 1:])
    return out


def _path_matrix(model, d0, grid, seqs, scheme, max_refine="grid"):
    """Sample len(seqs) paths; returns (values, running_max), each of shape
    (len(seqs), n_steps+1).  Row i consumes only streams derived from
    SeedSequence seqs[i].

    max_refine selects how the running maximum is formed: "grid" takes the
    max over node values only, "bridge" additionally samples the exact
    within-step maximum from the Brownian bridge between nodes (exact for
    ABM and for GBM in log space; for CIR the diffusion coefficient is
    frozen at the step mean, an O(dt) approximation).  The node values are
    identical under both settings and under both CIR schemes' shared seed
    layout.
    """
    n = grid.n_steps
    dt = grid.dt
    m = len(seqs)
    if max_refine not in ("grid", "bridge"):
        raise ParameterError(f"unknown max_refine {max_refine!r}")
    kids = [_streams(s) for s in seqs]

    def uniforms():
        return np.stack([np.random.default_rng(k[2]).random(n) for k in kids])

    if isinstance(model, ABM):
        z = np.stack([np.random.default_rng(k[0]).standard_normal(n) for k in kids])
        vals = np.empty((m, n + 1))
        vals[:, 0] = d0
        tdrift = model.mu * dt * np.arange(1, n + 1)
        vals[:, 1:] = d0 + tdrift + model.sigma * math.sqrt(dt) * np.cumsum(z, axis=1)
        if max_refine == "grid":
            return vals, np.maximum.accumulate(vals, axis=1)
        imax = _bridge_max(vals[:, :-1], vals[:, 1:], model.sigma**2 * dt, uniforms())
        return vals, _running_max(vals, imax)
    if isinstance(model, GBM):
        z = np.stack([np.random.default_rng(k[0]).standard_normal(n) for k in kids])
        logs = np.empty((m, n + 1))
        logs[:, 0] = math.log(d0)
        texp = (model.mu - 0.5 * model.sigma**2) * dt * np.arange(1, n + 1)
        logs[:, 1:] = logs[:, :1] + texp + model.sigma * math.sqrt(dt) * np.cumsum(z, axis=1)
        vals = np.exp(logs)
        if max_refine == "grid":
            return vals, np.maximum.accumulate(vals, axis=1)
        imax = _bridge_max(logs[:, :-1], logs[:, 1:], model.sigma**2 * dt, uniforms())
        return vals, np.exp(_running_max(logs, imax))
    if isinstance(model, CIR):
        if scheme == "exact":
            vals = _cir_exact(model, d0, n, dt, kids)
        elif scheme == "milstein":
            vals = _cir_milstein(model, d0, n, dt, kids)
        else:
            raise ParameterError(f"unknown scheme {scheme!r}")
        if max_refine == "grid":
            return vals, np.maximum.accumulate(vals, axis=1)
        var_dt = model.sigma**2 * 0.5 * (vals[:, :-1] + vals[:, 1:]) * dt
        imax = _bridge_max(vals[:, :-1], vals[:, 1:], var_dt, uniforms())
        return vals, _running_max(vals, imax)
    raise TypeError(f"unknown demand model {model!r}")


def _cir_exact(model, d0, n, dt, kids):
    """Exact CIR transitions via the noncentral chi-square representation.

    Over a step, 2c D_(t+dt) ~ ncx2(df, 2c e^(-gamma dt) D_t) with
    c = 2 gamma / (sigma^2 (1 - e^(-gamma dt))) and df = 4 gamma delta / sigma^2.
    The Feller condition gives df >= 2, so the draw splits into one normal
    plus a chi-square with df-1 >= 1 degrees of freedom; both blocks are
    drawn per path up front and the recursion is pure arithmetic.
    """
    g, dl, s = model.gamma, model.delta, model.sigma
    edt = math.exp(-g * dt)
    c = 2.0 * g / (s**2 * (1.0 - edt))
    df = 4.0 * g * dl / s**2
    z = np.stack([np.random.default_rng(k[0]).standard_normal(n) for k in kids])
    x2 = np.stack([np.random.default_rng(k[1]).chisquare(df - 1.0, n) for k in kids])
    m = len(kids)
    vals = np.empty((m, n + 1))
    vals[:, 0] = d0
    cur = np.full(m, float(d0))
    for j in range(n):
        nc = 2.0 * c * edt * cur
        cur = (x2[:, j] + (z[:, j] + np.sqrt(nc)) ** 2) / (2.0 * c)
        vals[:, j + 1] = cur
    return vals


def _cir_milstein(model, d0, n, dt, kids):
    """Full-truncation Milstein fallback for cross-checks.

    Biased at coarse dt and can touch zero; use the exact sampler for
    anything quantitative.  Consumes the same increment stream as the exact
    sampler, so the two schemes are path-paired under a shared seed.
    """
    g, dl, s = model.gamma, model.delta, model.sigma
    z = np.stack([np.random.default_rng(k[0]).standard_normal(n) for k in kids])
    m = len(kids)
    vals = np.empty((m, n + 1))
    vals[:, 0] = d0
    x = np.full(m, float(d0))
    sq = math.sqrt(dt)
    for j in range(n):
        xp = np.maximum(x, 0.0)
        x = (
            x
            + g * (dl - xp) * dt
            + s * np.sqrt(xp) * sq * z[:, j]
            + 0.25 * s**2 * dt * (z[:, j] ** 2 - 1.0) * (x > 0.0)
        )
        vals[:, j + 1] = np.maximum(x, 0.0)
    return vals


def sample_path(
    model: DemandModel,
    d0: float,
    grid: TimeGrid,
    seed: int,
    scheme: str = "exact",
    max_refine: str = "grid",
) -> DemandPath:
    """Sample one path. Deterministic in all arguments."""
    _check_d0(model, d0)
    vals, rmax = _path_matrix(
        model, d0, grid, [np.random.SeedSequence(seed)], scheme, max_refine
    )
    return DemandPath(grid=grid, values=vals[0], running_max=rmax[0], seed=seed)


def sample_paths(
    model: DemandModel,
    d0: float,
    grid: TimeGrid,
    seed: int,
    n_paths: int,
    scheme: str = "exact",
    max_refine: str = "grid",
) -> tuple[np.ndarray, np.ndarray]:
    """Sample a batch of paths; returns (values, running_max), each of shape
    (n_paths, n_steps+1).

    Path i draws from an independent stream derived from (seed, i) via
    SeedSequence spawning, so row i does not depend on n_paths: a batch of 5
    is the row-wise prefix of a batch of 8 with the same master seed.
    """
    _check_d0(model, d0)
    if n_paths < 1:
        raise ParameterError(f"need n_paths >= 1, got {n_paths}")
    children = np.random.SeedSequence(seed).spawn(n_paths)
    return _path_matrix(model, d0, grid, children, scheme, max_refine)
