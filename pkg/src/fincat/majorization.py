"""Majorization, thermo-majorization and approximate majorization.

Vectors of unequal length are zero-padded to the longer one before comparison.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass

import numpy as np

from . import _simplex
from .exceptions import DimensionMismatchError, NotMajorizedError
from .spectra import GibbsSpec, ProbVec, as_prob_vec, sort_order

logger = logging.getLogger(__name__)

MAJ_TOL = 1e-12
LP_ORACLE_MAX_DIM = 6


def _pad_pair(p, q) -> tuple[ProbVec, ProbVec]:
    p, q = as_prob_vec(p), as_prob_vec(q)
    if p.dim != q.dim:
        d = max(p.dim, q.dim)
        logger.debug("zero-padding dims %d and %d to %d", p.dim, q.dim, d)
        p, q = p.padded(d), q.padded(d)
    return p, q


def majorizes(p, q, tol: float = MAJ_TOL) -> bool:
    """True iff p majorizes q (every sorted partial sum of p dominates q's)."""
    p, q = _pad_pair(p, q)
    return bool(np.all(np.cumsum(p.sorted()) >= np.cumsum(q.sorted()) - tol))


@dataclass(frozen=True)
class LorenzCurve:
    """Elbows of a piecewise-linear Lorenz curve, from (0, 0) to (1, 1)."""

    x: np.ndarray
    y: np.ndarray

    def __call__(self, at) -> np.ndarray:
        return np.interp(at, self.x, self.y)


def lorenz_curve(p, gamma: GibbsSpec) -> LorenzCurve:
    """Lorenz curve of ``p`` relative to ``gamma``.

    Entries are visited in nonincreasing order of ``p_i / gamma_i``; the x-axis
    accumulates ``gamma`` and the y-axis accumulates ``p``.
    """
    p = as_prob_vec(p)
    w = gamma.weights.probs
    if w.size != p.dim:
        raise DimensionMismatchError(f"state dim {p.dim} vs Gibbs dim {w.size}")
    order = sort_order(p.probs / w)
    x = np.concatenate([[0.0], np.cumsum(w[order])])
    y = np.concatenate([[0.0], np.cumsum(p.probs[order])])
    x[-1] = y[-1] = 1.0
    return LorenzCurve(x, y)


def thermo_majorizes(p, q, gamma: GibbsSpec, tol: float = MAJ_TOL) -> bool:
    """True iff the Lorenz curve of p (relative to gamma) never dips below q's.

    Both curves are concave and piecewise linear, so comparing at q's elbows
    is enough.
    """
    p, q = as_prob_vec(p), as_prob_vec(q)
    if p.dim != q.dim:
        raise DimensionMismatchError(f"dims differ: {p.dim} vs {q.dim}")
    lp, lq = lorenz_curve(p, gamma), lorenz_curve(q, gamma)
    return bool(np.all(lp(lq.x) >= lq.y - tol))


def _water_level_top(qs: np.ndarray, amount: float) -> float:
    """Level c with sum(max(qs - c, 0)) == amount, for qs sorted nonincreasingly."""
    m = np.arange(1, qs.size + 1)
    levels = (np.cumsum(qs) - amount) / m
    ok = np.append(levels[:-1] >= qs[1:], True)
    return float(levels[np.argmax(ok)])


def optimal_chi(p, q) -> tuple[ProbVec, float]:
    """Closest distribution to ``q`` (in trace distance) among those majorized by ``p``.

    The optimal error is the largest partial-sum deficit
    ``max_k [sum_{i<=k} q_i - sum_{i<=k} p_i]_+`` over the sorted vectors. The
    minimizer lowers the top of sorted ``q`` to a common level and raises its
    bottom to a common level, each by that amount; the result is returned in
    ``q``'s own index order.
    """
    p, q = _pad_pair(p, q)
    if majorizes(p, q):
        return q, 0.0
    err = float(np.max(np.cumsum(q.sorted()) - np.cumsum(p.sorted())))
    order = sort_order(q.probs)
    qs = q.probs[order]
    top = _water_level_top(qs, err)
    bottom = -_water_level_top(-qs[::-1], err)
    chi_sorted = np.clip(qs, bottom, top)
    chi = np.empty_like(chi_sorted)
    chi[order] = chi_sorted
    return ProbVec(chi), err


def optimal_chi_above(p, q) -> tuple[ProbVec, float]:
    """Closest distribution to ``q`` among those majorizing ``p``.

    The mirror image of ``optimal_chi``, for theories (pure-state LOCC) where
    the free direction runs up the majorization order. The error is
    ``max_k [sum_{i<=k} p_i - sum_{i<=k} q_i]_+`` over the sorted vectors,
    attained by adding that amount to q's largest entry and draining it from
    q's smallest entries.
    """
    p, q = _pad_pair(p, q)
    if majorizes(q, p):
        return q, 0.0
    err = float(np.max(np.cumsum(p.sorted()) - np.cumsum(q.sorted())))
    order = sort_order(q.probs)
    chi_sorted = q.probs[order].copy()
    chi_sorted[0] += err
    left = err
    for k in range(chi_sorted.size - 1, 0, -1):
        take = min(left, chi_sorted[k])
        chi_sorted[k] -= take
        left -= take
        if left <= 0.0:
            break
    chi = np.empty_like(chi_sorted)
    chi[order] = chi_sorted
    return ProbVec(chi), err


def lp_oracle_above(p, q) -> float:
    """LP minimum of 0.5*||chi - q||_1 over chi majorizing p.

    The feasible set is not convex, but an optimal chi can be taken in q's
    sort order, where the constraints (ordering and partial sums) are linear.
    """
    p, q = _pad_pair(p, q)
    d = p.dim
    qs, ps = q.sorted(), p.sorted()
    # variables: chi (d), u (d), v (d), s (d-1 partial-sum slacks), w (d-1 order slacks)
    nv = 3 * d + 2 * (d - 1)
    rows, b = [], []
    for i in range(d):  # chi_i - u_i + v_i = q_i
        r = np.zeros(nv)
        r[i], r[d + i], r[2 * d + i] = 1.0, -1.0, 1.0
        rows.append(r)
        b.append(qs[i])
    for k in range(d - 1):  # sum_{i<=k} chi_i - s_k = P_k
        r = np.zeros(nv)
        r[: k + 1] = 1.0
        r[3 * d + k] = -1.0
        rows.append(r)
        b.append(np.sum(ps[: k + 1]))
    for k in range(d - 1):  # chi_k - chi_{k+1} - w_k = 0
        r = np.zeros(nv)
        r[k], r[k + 1], r[3 * d + (d - 1) + k] = 1.0, -1.0, -1.0
        rows.append(r)
        b.append(0.0)
    r = np.zeros(nv)
    r[:d] = 1.0
    rows.append(r)
    b.append(1.0)
    c = np.zeros(nv)
    c[d : 3 * d] = 0.5
    _, value = _simplex.solve(c, np.array(rows), np.array(b))
    return max(value, 0.0)


def lp_oracle(p, q) -> float:
    """Brute-force minimum of 0.5*||D p - q||_1 over doubly stochastic D.

    {D p} is the convex hull of the permutations of p (Birkhoff), so the
    problem is a linear program over convex weights on those vertices.
    """
    p, q = _pad_pair(p, q)
    d = p.dim
    if d > LP_ORACLE_MAX_DIM:
        raise ValueError(f"lp_oracle supports dim <= {LP_ORACLE_MAX_DIM}, got {d}")
    vertices = np.array(sorted(set(itertools.permutations(p.probs.tolist()))))
    k = len(vertices)
    # variables: lambda (k), u (d), v (d); rows: D p - q = u - v, sum(lambda) = 1
    A = np.zeros((d + 1, k + 2 * d))
    A[:d, :k] = vertices.T
    A[:d, k : k + d] = -np.eye(d)
    A[:d, k + d :] = np.eye(d)
    A[d, :k] = 1.0
    b = np.concatenate([q.probs, [1.0]])
    c = np.concatenate([np.zeros(k), np.full(2 * d, 0.5)])
    _, value = _simplex.solve(c, A, b)
    return max(value, 0.0)


@dataclass(frozen=True)
class TTransformSeq:
    """Ordered two-level mixing steps ``(i, j, t)``.

    Step convention: ``x_i <- (1-t) x_i + t x_j`` and ``x_j <- t x_i + (1-t) x_j``,
    so ``t = 0`` is the identity and ``t = 1`` swaps the two entries.
    """

    steps: tuple[tuple[int, int, float], ...]
    dim: int

    def __len__(self) -> int:
        return len(self.steps)

    def matrix(self) -> np.ndarray:
        """The doubly stochastic matrix M with ``apply(x) == M @ x``."""
        M = np.eye(self.dim)
        for i, j, t in self.steps:
            T = np.eye(self.dim)
            T[[i, i, j, j], [i, j, i, j]] = [1 - t, t, t, 1 - t]
            M = T @ M
        return M


def apply_ttransforms(seq: TTransformSeq, p) -> ProbVec:
    x = np.array(as_prob_vec(p).probs)
    for i, j, t in seq.steps:
        if not (0 <= i < x.size and 0 <= j < x.size):
            raise DimensionMismatchError(f"step ({i}, {j}) outside dim {x.size}")
        xi, xj = x[i], x[j]
        x[i] = (1 - t) * xi + t * xj
        x[j] = t * xi + (1 - t) * xj
    return ProbVec(x)


def _remainder_majorizes(x: np.ndarray, y: np.ndarray, rest: list[int], merged: dict[int, float]) -> bool:
    xr = np.array([merged.get(k, x[k]) for k in rest])
    yr = y[rest]
    return bool(np.all(np.cumsum(np.sort(xr)[::-1]) >= np.cumsum(np.sort(yr)[::-1]) - 1e-12))


class _Stuck(Exception):
    pass


def _next_move(x: np.ndarray, y: np.ndarray, active: list[int], tol: float):
    """First (m, c) fixing coordinate m whose unfixed remainder still majorizes.

    ``c is None`` means x[m] already equals y[m] and no step is needed.
    """
    by_target = sorted(active, key=lambda k: (-y[k], k))
    for m in by_target:
        rest = [k for k in active if k != m]
        if abs(x[m] - y[m]) <= tol and _remainder_majorizes(x, y, rest, {}):
            return m, None
    for m in by_target:
        rest = [k for k in active if k != m]
        partners = sorted(rest, key=lambda k: (-abs(x[k] - x[m]), k))
        for c in partners:
            lo, hi = sorted((x[m], x[c]))
            if lo - tol <= y[m] <= hi + tol and _remainder_majorizes(
                x, y, rest, {c: x[m] + x[c] - y[m]}
            ):
                return m, c
    raise _Stuck


def _mix(x: np.ndarray, i: int, j: int, t: float) -> None:
    xi, xj = x[i], x[j]
    x[i] = (1 - t) * xi + t * xj
    x[j] = t * xi + (1 - t) * xj


def _fixing_search(p: np.ndarray, q: np.ndarray, tol: float) -> list[tuple[int, int, float]]:
    x = np.array(p)
    active = list(range(x.size))
    steps = []
    while len(active) > 1:
        m, c = _next_move(x, q, active, tol)
        active.remove(m)
        if c is None:
            continue
        gap = x[c] - x[m]
        t = float(np.clip((q[m] - x[m]) / gap, 0.0, 1.0)) if gap != 0.0 else 0.0
        _mix(x, m, c, t)
        steps.append((int(m), int(c), t))
    return steps


def _aligned_hlp(p: np.ndarray, q: np.ndarray, tol: float) -> list[tuple[int, int, float]]:
    """Swaps putting p in q's order, then the classic sorted-rank construction."""
    x = np.array(p)
    p_sorted = x[sort_order(x)]
    pos = sort_order(q)
    steps = []
    for s in range(x.size - 1):
        here = pos[s]
        if x[here] == p_sorted[s]:
            continue
        j = next(k for k in pos[s + 1 :] if x[k] == p_sorted[s])
        _mix(x, here, j, 1.0)
        steps.append((int(here), int(j), 1.0))
    a, b = x[pos], q[pos]
    while True:
        over = np.flatnonzero(a > b + tol)
        if over.size == 0:
            break
        j = int(over[-1])
        under = [k for k in range(j + 1, a.size) if a[k] < b[k] - tol]
        if not under:
            break
        k = under[0]
        delta = min(a[j] - b[j], b[k] - a[k])
        t = float(delta / (a[j] - a[k]))
        _mix(a, j, k, t)
        if a[j] - b[j] <= tol:
            a[j] = b[j]
        if b[k] - a[k] <= tol:
            a[k] = b[k]
        steps.append((int(pos[j]), int(pos[k]), t))
    return steps


def ttransform_sequence(p, q, tol: float = 1e-12) -> TTransformSeq:
    """T-transforms taking ``p`` to ``q`` entrywise (requires p majorizes q).

    First tries to move one coordinate onto its target per step, keeping the
    unfixed remainder of ``p`` majorizing that of ``q``; that uses at most d-1
    steps. When ``p`` and ``q`` are ordered differently this can dead-end, and
    we fall back to swaps aligning ``p`` with ``q``'s order followed by the
    sorted-rank construction: d-1 steps for co-ordered inputs, 2(d-1) at most.
    """
    p, q = _pad_pair(p, q)
    if not majorizes(p, q):
        raise NotMajorizedError("p does not majorize q; no T-transform sequence exists")
    try:
        steps = _fixing_search(p.probs, q.probs, tol)
    except _Stuck:
        steps = _aligned_hlp(p.probs, q.probs, tol)
    return TTransformSeq(tuple(steps), p.dim)
