"""Mixture family over binned counts: P, EP, and EEP models.

A model mixes n_exp discrete exponential components (n_exp in {0, 1, 2})
with one discrete power-law tail on the integers x >= x_min. Component
order everywhere is [exponentials..., power tail].
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np

from . import dists, kernels
from .dists import ALPHA_MIN, EXP_MODES, ExpParams, ParetoParams
from .errors import ContractError, DataError, DomainError, UnsupportedOperationError
from .seeding import substream

_LABELS = {0: "P", 1: "EP", 2: "EEP"}

# tail_threshold scan limit; fitted models cross far below this
_SCAN_MAX = 1 << 34


@dataclass(frozen=True)
class ModelSpec:
    """Structural description of a mixture: component counts and support."""

    n_exp: int
    has_pareto: bool = True
    x_min: int = 1
    exp_mode: str = "discrete"

    def __post_init__(self):
        if self.n_exp not in (0, 1, 2):
            raise DomainError(f"n_exp must be 0, 1 or 2, got {self.n_exp}")
        if not self.has_pareto:
            raise DomainError("every model in the family includes the power tail")
        if int(self.x_min) != self.x_min or self.x_min < 1:
            raise DomainError(f"x_min must be an integer >= 1, got {self.x_min}")
        object.__setattr__(self, "x_min", int(self.x_min))
        if self.exp_mode not in EXP_MODES:
            raise DomainError(
                f"exp_mode must be one of {EXP_MODES}, got {self.exp_mode!r}"
            )

    @property
    def label(self) -> str:
        return _LABELS[self.n_exp]

    @property
    def n_components(self) -> int:
        return self.n_exp + 1

    @property
    def dof(self) -> int:
        """Free parameters: n_exp mixing weights, n_exp rates, one exponent."""
        return 2 * self.n_exp + 1


@dataclass(frozen=True)
class MixtureParams:
    """Parameter point: mixing weights (power-tail weight last), rates, alpha.

    Rate order is not constrained here; :meth:`canonical` returns the
    label-switching representative with rates sorted descending.
    """

    weights: tuple
    lambdas: tuple
    alpha: float

    def __post_init__(self):
        w = tuple(float(v) for v in self.weights)
        lam = tuple(float(v) for v in self.lambdas)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "lambdas", lam)
        if len(w) != len(lam) + 1:
            raise DomainError(
                f"need len(weights) == len(lambdas) + 1, got {len(w)} and {len(lam)}"
            )
        if any(v <= 0.0 for v in w):
            raise DomainError(f"weights must be strictly positive, got {w}")
        if abs(sum(w) - 1.0) > 1e-9:
            raise DomainError(f"weights must sum to 1, got sum {sum(w)!r}")
        if any(v <= 0.0 for v in lam):
            raise DomainError(f"rates must be strictly positive, got {lam}")
        if not (self.alpha > ALPHA_MIN):
            raise DomainError(f"alpha must exceed {ALPHA_MIN}, got {self.alpha}")

    def canonical(self) -> "MixtureParams":
        """Sort exponential components by rate, fastest decay first."""
        order = sorted(range(len(self.lambdas)), key=lambda i: -self.lambdas[i])
        return MixtureParams(
            weights=tuple(self.weights[i] for i in order) + (self.weights[-1],),
            lambdas=tuple(self.lambdas[i] for i in order),
            alpha=self.alpha,
        )

    def as_arrays(self):
        m = np.asarray(self.weights, dtype=np.float64)
        lam = np.asarray(self.lambdas, dtype=np.float64)
        return m, lam


@dataclass(frozen=True)
class BinnedSeries:
    """Per-bin flow counts at one window size, ready for fitting."""

    counts: np.ndarray
    bin_seconds: float
    source_id: str = ""
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        arr = np.asarray(self.counts)
        if arr.ndim != 1:
            raise DataError(f"counts must be one-dimensional, got shape {arr.shape}")
        if arr.size and (np.floor(arr) != arr).any():
            raise DataError("counts must be integers")
        arr = arr.astype(np.int64)
        if arr.size and arr.min() < 0:
            idx = int(np.argmin(arr))
            raise DataError(f"negative count {arr[idx]} at index {idx}")
        arr.setflags(write=False)
        object.__setattr__(self, "counts", arr)
        if not (self.bin_seconds > 0):
            raise DataError(f"bin_seconds must be positive, got {self.bin_seconds}")

    @property
    def n(self) -> int:
        return int(self.counts.size)

    def fingerprint(self) -> str:
        """Stable hash of the data, used to check fits refer to one series."""
        h = hashlib.blake2s(digest_size=16)
        h.update(np.float64(self.bin_seconds).tobytes())
        h.update(self.counts.tobytes())
        return h.hexdigest()


def check_compat(spec: ModelSpec, params: MixtureParams) -> None:
    if len(params.lambdas) != spec.n_exp:
        raise ContractError(
            f"{spec.label} expects {spec.n_exp} rates, got {len(params.lambdas)}"
        )


def _support_values(x, x_min: int):
    arr = np.asarray(x, dtype=np.float64)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    if arr.size and (np.floor(arr) != arr).any():
        raise DataError("values must be integers")
    if arr.size and arr.min() < x_min:
        idx = int(np.argmin(arr))
        raise DataError(f"value {arr[idx]:.0f} at index {idx} is below x_min={x_min}")
    return arr, scalar


def component_log_pmfs(x, spec: ModelSpec, params: MixtureParams) -> np.ndarray:
    """Log densities of each component at x, shape (n_components, n)."""
    check_compat(spec, params)
    arr, _ = _support_values(x, spec.x_min)
    out = np.empty((spec.n_components, arr.size))
    for e, rate in enumerate(params.lambdas):
        out[e] = dists.exp_log_pmf(arr, ExpParams(rate, spec.exp_mode), spec.x_min)
    out[-1] = dists.pareto_log_pmf(arr, ParetoParams(params.alpha, spec.x_min))
    return out


def mixture_log_pmf(x, spec: ModelSpec, params: MixtureParams):
    """Log of the mixture density at x (scalar in, scalar out)."""
    comp = component_log_pmfs(x, spec, params)
    logs = comp + np.log(params.weights)[:, None]
    mx = logs.max(axis=0)
    out = mx + np.log(np.exp(logs - mx).sum(axis=0))
    return float(out[0]) if np.isscalar(x) else out


def mixture_pmf(x, spec: ModelSpec, params: MixtureParams):
    return np.exp(mixture_log_pmf(x, spec, params))


def responsibilities(x, spec: ModelSpec, params: MixtureParams):
    """Posterior component probabilities at x.

    Scalar x gives a vector of length n_components; an array gives shape
    (n, n_components). Rows sum to one.
    """
    comp = component_log_pmfs(x, spec, params)
    logs = comp + np.log(params.weights)[:, None]
    mx = logs.max(axis=0)
    log_f = mx + np.log(np.exp(logs - mx).sum(axis=0))
    resp = np.exp(logs - log_f).T
    return resp[0] if np.isscalar(x) else resp


def aggregate_counts(counts: np.ndarray, x_min: int):
    """Collapse counts to unique values and multiplicities for the kernels."""
    arr = np.asarray(counts, dtype=np.int64)
    if arr.size == 0:
        raise DataError("series is empty")
    if arr.min() < x_min:
        idx = int(np.argmin(arr))
        raise DataError(f"count {arr[idx]} at index {idx} is below x_min={x_min}")
    values, mult = np.unique(arr, return_counts=True)
    return values.astype(np.float64), mult.astype(np.float64)


def log_likelihood(series, spec: ModelSpec, params: MixtureParams) -> float:
    """Total log-likelihood of a series (or raw count array) under the model."""
    check_compat(spec, params)
    counts = series.counts if isinstance(series, BinnedSeries) else series
    values, mult = aggregate_counts(counts, spec.x_min)
    m, lam = params.as_arrays()
    z, dz = kernels.zeta_pair(params.alpha, float(spec.x_min))
    ll, _, _, _ = kernels.mix_loglik_grad(
        values,
        np.log(values),
        mult,
        m,
        lam,
        params.alpha,
        float(spec.x_min),
        z,
        dz,
        spec.exp_mode == "paper-literal",
    )
    return float(ll)


def tail_threshold(spec: ModelSpec, params: MixtureParams) -> int:
    """Smallest x >= x_min where the power tail owns the bin.

    Returns the first support value whose power-tail responsibility
    reaches 0.5. The tail eventually dominates any exponential, so the
    scan terminates; blocks double in size to keep it cheap.
    """
    check_compat(spec, params)
    if spec.n_exp == 0:
        return spec.x_min
    lo = spec.x_min
    block = 4096
    while lo < _SCAN_MAX:
        xs = np.arange(lo, lo + block, dtype=np.float64)
        resp = responsibilities(xs, spec, params)
        hit = np.nonzero(resp[:, -1] >= 0.5)[0]
        if hit.size:
            return int(xs[hit[0]])
        lo += block
        block *= 2
    raise DomainError(f"no tail crossing found below {_SCAN_MAX}")


def sample_mixture(spec: ModelSpec, params: MixtureParams, n: int, seed) -> np.ndarray:
    """Draw n values from the mixture. Deterministic given the seed."""
    check_compat(spec, params)
    if spec.exp_mode == "paper-literal" and spec.n_exp > 0:
        raise UnsupportedOperationError(
            "paper-literal mode is unnormalized and cannot be sampled"
        )
    rng = seed if isinstance(seed, np.random.Generator) else substream(seed)
    labels = rng.choice(spec.n_components, size=n, p=np.asarray(params.weights))
    out = np.empty(n, dtype=np.int64)
    for e, rate in enumerate(params.lambdas):
        mask = labels == e
        cnt = int(mask.sum())
        if cnt:
            out[mask] = dists.sample_exp(
                ExpParams(rate, spec.exp_mode), cnt, rng, spec.x_min
            )
    mask = labels == spec.n_exp
    cnt = int(mask.sum())
    if cnt:
        out[mask] = dists.sample_pareto(
            ParetoParams(params.alpha, spec.x_min), cnt, rng
        )
    return out
