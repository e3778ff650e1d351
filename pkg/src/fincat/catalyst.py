"""Exact classical simulation of the multi-copy-to-catalysis construction.

Given ``n`` copies converted approximately, ``p^n -> chi`` by a free map
(``p^n`` majorizing ``chi``, or the reverse for pure-state LOCC), the catalyst on ``C = C1 C2`` is

    omega = (1/n) sum_i  p^(i-1) (x) chi_[i+1..n]  (x) |i><i|_C2 ,

where ``chi_[a..b]`` is the marginal of ``chi`` on copies ``a..b``. The
catalyst register C1 holds ``n - 1`` copies of the system and C2 holds the
branch label, so ``d_C = n * d_S^(n-1)``.

Index layout: the joint state lives on ``S x C1_1 x ... x C1_(n-1) x C2``,
row-major, with the branch label last. Branches are 0-based in code.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .exceptions import DimensionMismatchError, FeasibilityOnlyError
from .majorization import majorizes, optimal_chi, optimal_chi_above
from .spectra import (
    DEFAULT_SIZE_CAP,
    GibbsSpec,
    ProbVec,
    ProductProbVec,
    as_prob_vec,
    marginal,
    tensor_power,
    tensor_product,
    trace_distance,
)

EXACT_TOL = 1e-12


def _powers(p: ProbVec, k: int) -> np.ndarray:
    """p^(x)k as a k-dimensional array (a 0-d array holding 1.0 when k = 0)."""
    out = np.array(1.0)
    for _ in range(k):
        out = np.multiply.outer(out, p.probs)
    return out


def _tail(chi: ProductProbVec, start: int) -> np.ndarray:
    """Marginal of chi on copies start..n-1 (0-based) as an array."""
    n = chi.n_factors
    if start >= n:
        return np.array(1.0)
    return marginal(chi, range(start, n)).tensor()


def _common_dim(p, q) -> tuple[ProbVec, ProbVec]:
    p, q = as_prob_vec(p), as_prob_vec(q)
    d = max(p.dim, q.dim)
    return p.padded(d), q.padded(d)


DIRECTIONS = ("down", "up")


def _check_direction(direction: str) -> None:
    if direction not in DIRECTIONS:
        raise ValueError(f"direction must be 'down' or 'up', got {direction!r}")


def build_chi(p, q, n: int, size_cap: int = DEFAULT_SIZE_CAP,
              direction: str = "down") -> tuple[ProductProbVec, float]:
    """Best reachable ``chi`` approximating ``q^n``, in the product basis.

    ``direction="down"`` means free maps go down the majorization order
    (``p^n`` majorizes ``chi``: noisy and thermal operations); ``"up"`` is
    the pure-state LOCC case where ``chi`` must majorize ``p^n``. Sorted
    ``chi`` entries sit where ``q^n`` holds its entries of the same rank
    (ties kept in index order); the returned error is the trace distance to
    ``q^n``.
    """
    _check_direction(direction)
    p, q = _common_dim(p, q)
    pn = tensor_power(p, n, size_cap)
    qn = tensor_power(q, n, size_cap)
    if direction == "down":
        chi, _ = optimal_chi(pn.flat(), qn.flat())
        ok = majorizes(pn.flat(), chi)
    else:
        chi, _ = optimal_chi_above(pn.flat(), qn.flat())
        ok = majorizes(chi, pn.flat())
    if not ok:
        raise AssertionError("constructed chi is not reachable from p^n")
    chi = ProductProbVec(chi.probs, pn.factors)
    return chi, trace_distance(chi, qn)


@dataclass(frozen=True)
class CatalystState:
    """Block-structured catalyst: ``blocks[i]`` is p^(i) (x) chi_[i+1..], weight 1/n."""

    n: int
    d_S: int
    blocks: np.ndarray  # shape (n, d_S ** (n - 1))

    @property
    def dim(self) -> int:
        return self.n * self.d_S ** (self.n - 1)

    def as_product(self) -> ProductProbVec:
        """omega on C1_1 x ... x C1_(n-1) x C2 (row-major, branch label last)."""
        probs = (self.blocks.T / self.n).ravel()
        return ProductProbVec(probs, (self.d_S,) * (self.n - 1) + (self.n,))


def build_catalyst(p, chi: ProductProbVec, n: int) -> CatalystState:
    p = as_prob_vec(p)
    if chi.factors != (p.dim,) * n:
        raise DimensionMismatchError(f"chi factors {chi.factors} do not match {n} copies of dim {p.dim}")
    blocks = np.empty((n, p.dim ** (n - 1)))
    for i in range(n):
        blocks[i] = np.multiply.outer(_powers(p, i), _tail(chi, i + 1)).ravel()
    return CatalystState(n, p.dim, blocks)


@dataclass(frozen=True)
class JointState:
    """Distribution on S x C1 (n-1 copies) x C2 (n branch labels)."""

    n: int
    d_S: int
    probs: np.ndarray

    @property
    def factors(self) -> tuple[int, ...]:
        return (self.d_S,) * self.n + (self.n,)

    def as_product(self) -> ProductProbVec:
        return ProductProbVec(self.probs, self.factors)

    def system_marginal(self) -> ProbVec:
        return marginal(self.as_product(), [0]).flat()

    def catalyst_marginal(self) -> ProductProbVec:
        return marginal(self.as_product(), range(1, self.n + 1))

    def branch_marginal(self) -> ProbVec:
        return marginal(self.as_product(), [self.n]).flat()


def assemble_final_state(p, chi: ProductProbVec, n: int) -> JointState:
    """Joint state after the conditional map and the recovery relabelling.

    Branch ``j`` (0-based) holds ``p^(j) (x) chi_[j..n-1]`` on the n system-like
    registers with registers 0 and j exchanged; branch 0 is ``chi`` itself.
    For a ``chi`` invariant under permuting copies (which ``build_chi``
    produces) this equals applying the cyclic shift of all n registers.
    """
    p = as_prob_vec(p)
    d = p.dim
    if chi.factors != (d,) * n:
        raise DimensionMismatchError(f"chi factors {chi.factors} do not match {n} copies of dim {d}")
    out = np.empty((d,) * n + (n,))
    for j in range(n):
        branch = np.multiply.outer(_powers(p, j), _tail(chi, j))
        out[..., j] = np.swapaxes(branch, 0, j) / n
    return JointState(n, d, out.ravel())


@dataclass(frozen=True)
class CatalysisReport:
    n: int
    d_C: int
    chi_err: float
    system_err: float
    joint_err: float
    marginal_exactness: float
    feasible: bool

    def to_dict(self) -> dict:
        return asdict(self)


def verify_catalytic(final: JointState, omega: CatalystState, q, chi_err: float) -> CatalysisReport:
    """Measure the three guarantees: exact catalyst return, system error, joint error."""
    q = as_prob_vec(q).padded(final.d_S)
    omega_vec = omega.as_product()
    exactness = trace_distance(final.catalyst_marginal(), omega_vec)
    system_err = trace_distance(final.system_marginal(), q)
    reference = tensor_product(q, omega_vec)
    joint_err = trace_distance(final.as_product().flat(), reference.flat())
    feasible = (
        exactness <= EXACT_TOL
        and system_err <= chi_err + EXACT_TOL
        and joint_err <= 2.0 * chi_err + EXACT_TOL
    )
    return CatalysisReport(final.n, omega.dim, chi_err, system_err, joint_err, exactness, feasible)


def run_protocol(p, q, n: int, gamma: GibbsSpec | None = None,
                 size_cap: int = DEFAULT_SIZE_CAP, direction: str = "down") -> CatalysisReport:
    """Build chi, the catalyst and the final joint state for ``n`` copies and report errors.

    Only the infinite-temperature (uniform reference) setting is simulated; a
    non-uniform ``gamma`` is rejected.
    """
    if gamma is not None and not gamma.is_uniform:
        raise FeasibilityOnlyError(
            "protocol simulation needs a uniform Gibbs state; use thermo_majorizes for feasibility only"
        )
    p, q = _common_dim(p, q)
    chi, chi_err = build_chi(p, q, n, size_cap, direction)
    omega = build_catalyst(p, chi, n)
    final = assemble_final_state(p, chi, n)
    return verify_catalytic(final, omega, q, chi_err)


def min_n_search(p, q, eps_target: float, n_max: int,
                 size_cap: int = DEFAULT_SIZE_CAP, direction: str = "down") -> int | None:
    """Smallest n <= n_max whose simulated system error is within ``eps_target``."""
    p, q = _common_dim(p, q)
    n_cap = int(math.log(size_cap) / math.log(p.dim)) if p.dim > 1 else n_max
    for n in range(1, min(n_max, n_cap) + 1):
        if run_protocol(p, q, n, size_cap=size_cap, direction=direction).system_err <= eps_target:
            return n
    return None
