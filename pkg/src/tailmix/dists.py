"""Component distributions on the integers x >= x_min.

Two families: a discrete power law normalized by the Hurwitz zeta
function, and a discrete exponential. The exponential has two modes:
"discrete" renormalizes the geometric form so it sums to one on the
support, "paper-literal" evaluates the unnormalized continuous density
lam*exp(-lam*x) pointwise. The literal mode is not a probability mass
function, so sampling under it is refused.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DomainError, UnsupportedOperationError
from .seeding import substream

# Validation floors; alpha must exceed 1 by a real margin or the zeta
# normalization diverges, and rates must be strictly positive.
ALPHA_MIN = 1.0 + 1e-9
RATE_MIN = 1e-12

EXP_MODES = ("discrete", "paper-literal")

# Sampling table controls: extend until this much mass is covered, then
# fall back to the analytic tail for the remainder.
_TABLE_MASS = 1.0 - 1e-12
_TABLE_MAX = 1 << 20
_INT64_MAX = np.iinfo(np.int64).max


def _check_x_min(x_min) -> int:
    if int(x_min) != x_min or x_min < 1:
        raise DomainError(f"x_min must be an integer >= 1, got {x_min!r}")
    return int(x_min)


def _check_support(x, x_min: int) -> np.ndarray:
    arr = np.asarray(x)
    if arr.size and (np.floor(arr) != arr).any():
        raise DomainError("support values must be integers")
    if arr.size and arr.min() < x_min:
        raise DomainError(f"support values must be >= x_min={x_min}")
    return arr.astype(np.float64)


@dataclass(frozen=True)
class ParetoParams:
    """Discrete power-law parameters: exponent alpha on {x_min, x_min+1, ...}."""

    alpha: float
    x_min: int = 1

    def __post_init__(self):
        if not (self.alpha > ALPHA_MIN):
            raise DomainError(f"alpha must exceed {ALPHA_MIN}, got {self.alpha}")
        object.__setattr__(self, "x_min", _check_x_min(self.x_min))


@dataclass(frozen=True)
class ExpParams:
    """Discrete exponential parameters. ``rate`` is the decay rate lambda."""

    rate: float
    mode: str = "discrete"

    def __post_init__(self):
        if not (self.rate > RATE_MIN):
            raise DomainError(f"rate must exceed {RATE_MIN}, got {self.rate}")
        if self.mode not in EXP_MODES:
            raise DomainError(
                f"mode must be one of {EXP_MODES}, got {self.mode!r}"
            )


def hurwitz_zeta(alpha: float, x_min: int = 1) -> float:
    """Normalizing constant zeta(alpha, x_min) = sum_{x>=x_min} x^-alpha."""
    if not (alpha > ALPHA_MIN):
        raise DomainError(f"alpha must exceed {ALPHA_MIN}, got {alpha}")
    x_min = _check_x_min(x_min)
    return kernels.zeta_pair(alpha, float(x_min))[0]


def hurwitz_zeta_dalpha(alpha: float, x_min: int = 1) -> float:
    """Derivative of zeta(alpha, x_min) with respect to alpha."""
    if not (alpha > ALPHA_MIN):
        raise DomainError(f"alpha must exceed {ALPHA_MIN}, got {alpha}")
    x_min = _check_x_min(x_min)
    return kernels.zeta_pair(alpha, float(x_min))[1]


def pareto_log_pmf(x, params: ParetoParams):
    """Log pmf -alpha*log(x) - log(zeta(alpha, x_min)) on the support."""
    arr = _check_support(x, params.x_min)
    z = kernels.zeta_pair(params.alpha, float(params.x_min))[0]
    out = -params.alpha * np.log(arr) - math.log(z)
    return float(out) if np.isscalar(x) else out


def pareto_pmf(x, params: ParetoParams):
    return np.exp(pareto_log_pmf(x, params))


def exp_log_pmf(x, params: ExpParams, x_min: int = 1):
    """Log density of the exponential component on the support.

    Discrete mode: log(1 - e^-rate) - rate*(x - x_min), a proper pmf.
    Literal mode: log(rate) - rate*x, unnormalized by construction.
    """
    x_min = _check_x_min(x_min)
    arr = _check_support(x, x_min)
    lam = params.rate
    if params.mode == "paper-literal":
        out = math.log(lam) - lam * arr
    else:
        if lam > kernels.LN_HALF_POINT:
            log_amp = math.log1p(-math.exp(-lam))
        else:
            log_amp = math.log(-math.expm1(-lam))
        out = log_amp - lam * (arr - x_min)
    return float(out) if np.isscalar(x) else out


def exp_pmf(x, params: ExpParams, x_min: int = 1):
    return np.exp(exp_log_pmf(x, params, x_min))


def sample_exp(params: ExpParams, n: int, seed, x_min: int = 1) -> np.ndarray:
    """Draw n values from the discrete exponential component."""
    if params.mode == "paper-literal":
        raise UnsupportedOperationError(
            "paper-literal mode is unnormalized and cannot be sampled"
        )
    x_min = _check_x_min(x_min)
    rng = seed if isinstance(seed, np.random.Generator) else substream(seed)
    p = -math.expm1(-params.rate)
    return rng.geometric(p, size=n).astype(np.int64) + (x_min - 1)


def _pareto_table(params: ParetoParams) -> np.ndarray:
    """Cumulative pmf over x_min..x_min+L-1, extended until it covers
    _TABLE_MASS or hits the size cap."""
    z = kernels.zeta_pair(params.alpha, float(params.x_min))[0]
    size = 1 << 10
    while True:
        vals = params.x_min + np.arange(size, dtype=np.float64)
        cum = np.cumsum(vals ** (-params.alpha) / z)
        if cum[-1] >= _TABLE_MASS or size >= _TABLE_MAX:
            return cum
        size <<= 1


def sample_pareto(params: ParetoParams, n: int, seed) -> np.ndarray:
    """Draw n values from the discrete power law by inverse CDF.

    Draws beyond the tabulated range use a continuous power-law draw from
    the table edge, rounded to the nearest integer. Results are clamped
    to the int64 maximum; at very small alpha a draw can exceed it.
    """
    rng = seed if isinstance(seed, np.random.Generator) else substream(seed)
    cum = _pareto_table(params)
    u = rng.random(n)
    idx = np.searchsorted(cum, u, side="right")
    out = params.x_min + idx.astype(np.int64)
    in_tail = idx >= cum.shape[0]
    if in_tail.any():
        edge = params.x_min + cum.shape[0] - 1
        v = (u[in_tail] - cum[-1]) / (1.0 - cum[-1])
        # conditional survival beyond edge approximated by the continuous
        # power law through the half-integer boundary
        draw = (edge + 0.5) * (1.0 - v) ** (-1.0 / (params.alpha - 1.0))
        draw = np.floor(draw + 0.5)
        # largest float64 below 2**63, so the int64 cast cannot overflow
        draw = np.clip(draw, edge + 1, np.nextafter(float(_INT64_MAX), 0.0))
        out[in_tail] = draw.astype(np.int64)
    return out
