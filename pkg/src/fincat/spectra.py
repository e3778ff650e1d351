"""Probability vectors, product distributions and entropic quantifiers.

All logarithms are natural; the display base is chosen only at output time.
Product distributions are stored flat in row-major (C) order, so the entry at
multi-index ``(i_1, ..., i_n)`` sits at ``np.ravel_multi_index((i_1, ..., i_n), factors)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.special import logsumexp

from .exceptions import DimensionMismatchError, InvalidStateError, SizeCapError

ENTRY_TOL = 1e-12
NORM_TOL = 1e-9
DEFAULT_SIZE_CAP = 2_000_000


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=float)
    arr.setflags(write=False)
    return arr


def _validate(values) -> np.ndarray:
    arr = np.asarray(values, dtype=float).ravel()
    if arr.size == 0:
        raise InvalidStateError("probability vector must be nonempty")
    if not np.all(np.isfinite(arr)):
        raise InvalidStateError("probability vector has non-finite entries")
    if np.any(arr < -ENTRY_TOL):
        raise InvalidStateError(f"negative entry {arr.min()!r} below tolerance")
    arr = np.clip(arr, 0.0, None)
    total = arr.sum()
    if abs(total - 1.0) > NORM_TOL:
        raise InvalidStateError(f"normalization violated: entries sum to {total!r}")
    if total != 1.0:
        arr = arr / total
    return arr


@dataclass(frozen=True)
class ProbVec:
    """A finite probability distribution (spectrum, Schmidt vector, diagonal)."""

    probs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "probs", _frozen(_validate(self.probs)))

    @property
    def dim(self) -> int:
        return int(self.probs.size)

    def __len__(self) -> int:
        return self.dim

    def sorted(self) -> np.ndarray:
        """Nonincreasing copy of the entries (stable on ties)."""
        return self.probs[sort_order(self.probs)]

    def padded(self, dim: int) -> "ProbVec":
        if dim < self.dim:
            raise DimensionMismatchError(f"cannot pad dim {self.dim} down to {dim}")
        if dim == self.dim:
            return self
        return ProbVec(np.concatenate([self.probs, np.zeros(dim - self.dim)]))

    def tolist(self) -> list[float]:
        return self.probs.tolist()


@dataclass(frozen=True)
class ProductProbVec:
    """Distribution over a product index set, stored flat in row-major order."""

    probs: np.ndarray
    factors: tuple[int, ...] = field(default=())

    def __post_init__(self):
        probs = _validate(self.probs)
        factors = tuple(int(f) for f in self.factors) or (probs.size,)
        if any(f < 1 for f in factors):
            raise InvalidStateError(f"factor dimensions must be positive, got {factors}")
        if math.prod(factors) != probs.size:
            raise DimensionMismatchError(
                f"{probs.size} entries do not match factor dims {factors}"
            )
        object.__setattr__(self, "probs", _frozen(probs))
        object.__setattr__(self, "factors", factors)

    @property
    def dim(self) -> int:
        return int(self.probs.size)

    @property
    def n_factors(self) -> int:
        return len(self.factors)

    def tensor(self) -> np.ndarray:
        return self.probs.reshape(self.factors)

    def flat(self) -> ProbVec:
        return ProbVec(self.probs)


class GibbsSpec:
    """Strictly positive reference (thermal) distribution.

    Build it from explicit ``weights`` or from ``energies`` and an inverse
    temperature ``beta``; ``beta = 0`` gives the uniform distribution.
    """

    def __init__(self, weights=None, *, energies=None, beta: float | None = None):
        if (weights is None) == (energies is None):
            raise InvalidStateError("give either weights or energies (with beta)")
        if energies is not None:
            if beta is None or beta < 0 or not math.isfinite(beta):
                raise InvalidStateError(f"beta must be a finite number >= 0, got {beta!r}")
            e = np.asarray(energies, dtype=float).ravel()
            if e.size == 0 or not np.all(np.isfinite(e)):
                raise InvalidStateError("energies must be finite and nonempty")
            w = np.exp(-beta * (e - e.min()))
            weights = w / w.sum()
        pv = ProbVec(weights)
        if np.any(pv.probs <= 0.0):
            raise InvalidStateError("Gibbs weights must be strictly positive")
        self.weights = pv
        self.energies = None if energies is None else _frozen(energies)
        self.beta = beta

    @classmethod
    def uniform(cls, dim: int) -> "GibbsSpec":
        return cls(np.full(dim, 1.0 / dim))

    @property
    def dim(self) -> int:
        return self.weights.dim

    @property
    def is_uniform(self) -> bool:
        w = self.weights.probs
        return bool(np.all(w == w[0]))

    def __repr__(self) -> str:
        return f"GibbsSpec(weights={self.weights.tolist()})"


def new_prob_vec(values: Iterable[float]) -> ProbVec:
    return ProbVec(np.asarray(list(values), dtype=float))


def as_prob_vec(p) -> ProbVec:
    if isinstance(p, ProbVec):
        return p
    if isinstance(p, ProductProbVec):
        return p.flat()
    return ProbVec(p)


def sort_order(x: np.ndarray) -> np.ndarray:
    """Indices sorting ``x`` nonincreasingly, ties kept in original index order."""
    return np.argsort(-np.asarray(x), kind="stable")


def _gibbs_weights(gamma, dim: int) -> np.ndarray:
    w = gamma.weights.probs if isinstance(gamma, GibbsSpec) else GibbsSpec(gamma).weights.probs
    if w.size != dim:
        raise DimensionMismatchError(f"state has dim {dim} but reference has dim {w.size}")
    return w


# -- entropic quantifiers ----------------------------------------------------


def shannon_entropy(p) -> float:
    x = as_prob_vec(p).probs
    x = x[x > 0]
    return float(max(-np.sum(x * np.log(x)), 0.0))


def entropy_variance(p) -> float:
    x = as_prob_vec(p).probs
    x = x[x > 0]
    logs = np.log(x)
    h = -np.sum(x * logs)
    return float(np.sum(x * (logs + h) ** 2))


def _log_ratio(p, gamma) -> tuple[np.ndarray, np.ndarray]:
    x = as_prob_vec(p).probs
    w = _gibbs_weights(gamma, x.size)
    mask = x > 0
    return x[mask], np.log(x[mask]) - np.log(w[mask])


def relative_entropy(p, gamma) -> float:
    """D(p||gamma) in nats; gamma is strictly positive so this is always finite."""
    x, lr = _log_ratio(p, gamma)
    return float(max(np.sum(x * lr), 0.0))


def relative_entropy_variance(p, gamma) -> float:
    x, lr = _log_ratio(p, gamma)
    d = np.sum(x * lr)
    # centred form: same value as E[lr^2] - D^2 without the cancellation
    return float(np.sum(x * (lr - d) ** 2))


def renyi_entropy(p, alpha: float) -> float:
    """Rényi entropy of order ``alpha`` (any extended real) in nats.

    Orders 0, 1 and +/-inf use their limits. Negative orders need full support.
    """
    x = as_prob_vec(p).probs
    support = x[x > 0]
    if alpha < 0 and support.size != x.size:
        raise InvalidStateError("Rényi entropy of negative order needs full support")
    if alpha == 0:
        return math.log(support.size)
    if alpha == 1:
        return shannon_entropy(p)
    if alpha == math.inf:
        return -math.log(support.max())
    if alpha == -math.inf:
        return -math.log(support.min())
    return float(logsumexp(alpha * np.log(support)) / (1.0 - alpha))


def burg_entropy(p) -> float:
    """Mean-log entropy, shifted so the uniform distribution scores 0."""
    x = as_prob_vec(p).probs
    if np.any(x <= 0):
        raise InvalidStateError("Burg entropy needs full support")
    return float(np.mean(np.log(x)) + math.log(x.size))


@dataclass(frozen=True)
class MulticopyVerdict:
    status: str  # "satisfied" | "violated" | "inconclusive"
    witness_alpha: float | None
    min_margin: float
    n_alphas: int
    grid_based: bool = True


def default_alpha_grid(size: int = 257) -> np.ndarray:
    """Log-spaced orders on [1e-3, 1e3] plus the analytic points 0, 1, 2 and inf."""
    grid = np.logspace(-3.0, 3.0, size) if size > 0 else np.empty(0)
    return np.unique(np.concatenate([[0.0, 1.0, 2.0, np.inf], grid]))


def multicopy_feasibility_check(p, q, alpha_grid_size: int = 257) -> MulticopyVerdict:
    """Grid test of H_a(p) > H_a(q) for a in [0, inf].

    The exact condition ranges over a continuum of orders, so "satisfied" is a
    heuristic certificate. Margins within 1e-12 count as equality (violated);
    a passing grid whose smallest margin is below 1e-9 is reported inconclusive.
    """
    p, q = as_prob_vec(p), as_prob_vec(q)
    d = max(p.dim, q.dim)
    p, q = p.padded(d), q.padded(d)
    alphas = default_alpha_grid(alpha_grid_size)
    min_margin = math.inf
    for a in alphas:
        margin = renyi_entropy(p, a) - renyi_entropy(q, a)
        if not margin > ENTRY_TOL:
            return MulticopyVerdict("violated", float(a), float(margin), alphas.size)
        min_margin = min(min_margin, margin)
    status = "satisfied" if min_margin > NORM_TOL else "inconclusive"
    return MulticopyVerdict(status, None, float(min_margin), alphas.size)


# -- product distributions ---------------------------------------------------


def _check_cap(size: int, size_cap: int) -> None:
    if size > size_cap:
        raise SizeCapError(f"product distribution with {size} entries exceeds cap {size_cap}")


def tensor_product(*parts, size_cap: int = DEFAULT_SIZE_CAP) -> ProductProbVec:
    """Row-major tensor product; factor lists are concatenated."""
    factors: list[int] = []
    size = 1
    for part in parts:
        fs = part.factors if isinstance(part, ProductProbVec) else (as_prob_vec(part).dim,)
        factors.extend(fs)
        size *= math.prod(fs)
    _check_cap(size, size_cap)
    out = np.ones(1)
    for part in parts:
        out = np.multiply.outer(out, as_prob_vec(part).probs).ravel()
    return ProductProbVec(out, tuple(factors))


def tensor_power(p, n: int, size_cap: int = DEFAULT_SIZE_CAP) -> ProductProbVec:
    p = as_prob_vec(p)
    if n < 1:
        raise ValueError(f"n must be a positive integer, got {n}")
    _check_cap(p.dim**n, size_cap)
    return tensor_product(*([p] * n), size_cap=size_cap)


def marginal(x: ProductProbVec, keep: Sequence[int]) -> ProductProbVec:
    """Sum out every factor not in ``keep``; kept factors stay in ascending order."""
    keep = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= x.n_factors for k in keep):
        raise DimensionMismatchError(f"keep={keep} not within {x.n_factors} factors")
    drop = tuple(k for k in range(x.n_factors) if k not in keep)
    if not keep:
        return ProductProbVec(np.ones(1), (1,))
    summed = x.tensor().sum(axis=drop) if drop else x.tensor()
    return ProductProbVec(summed.ravel(), tuple(x.factors[k] for k in keep))


def trace_distance(p, q) -> float:
    """Half the l1 distance between two distributions on the same index set."""
    if isinstance(p, ProductProbVec) and isinstance(q, ProductProbVec):
        if p.factors != q.factors:
            raise DimensionMismatchError(f"factor dims differ: {p.factors} vs {q.factors}")
    a, b = as_prob_vec(p).probs, as_prob_vec(q).probs
    if a.size != b.size:
        raise DimensionMismatchError(f"dims differ: {a.size} vs {b.size}")
    return float(0.5 * np.abs(a - b).sum())
