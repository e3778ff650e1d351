"""Experiment drivers behind the CLI: error-vs-size curves and the resonance sweep.

Rows are plain dicts so the CLI can write them as CSV without further work.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .catalyst import min_n_search, run_protocol
from .exceptions import (
    FeasibilityOnlyError,
    FincatError,
    InfeasibleContourError,
    InvalidStateError,
    NoFiniteNError,
    SizeCapError,
)
from .majorization import majorizes, optimal_chi_above
from .second_order import (
    Athermality,
    Entanglement,
    TheoryKind,
    free_direction,
    n_epsilon,
    predicted_error,
    rates,
)
from .spectra import DEFAULT_SIZE_CAP, ProbVec, as_prob_vec, shannon_entropy

ENTROPY_TOL = 1e-10
MAX_REJECTIONS = 100_000

ERROR_VS_SIZE_COLUMNS = ("n", "d_C_exact", "chi_err", "system_err", "joint_err", "predicted_eps", "status")
RESONANCE_COLUMNS = (
    "sample", "p0", "p1", "p2", "H_ini", "H_fin", "nu", "abs_nu_minus_1", "R",
    "n_eps", "min_n", "d_C", "majorizes_exact", "majorizes_within_eps",
)


def _map(fn, items, workers: int):
    """Ordered map, in-process for one worker."""
    if workers <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# -- error vs catalyst size ----------------------------------------------------

def _size_row(args) -> dict:
    p, q, n, theory, size_cap = args
    d = max(p.dim, q.dim)
    row = {"n": n, "d_C_exact": n * d ** (n - 1)}
    try:
        rep = run_protocol(p, q, n, size_cap=size_cap, direction=free_direction(theory))
    except SizeCapError:
        row["status"] = "skipped"
        return row
    row.update(chi_err=rep.chi_err, system_err=rep.system_err, joint_err=rep.joint_err, status="ok")
    row["predicted_eps"] = predicted_error(theory, p, q, n)
    return row


def error_vs_size(theory: TheoryKind, p, q, n_min: int, n_max: int,
                  size_cap: int = DEFAULT_SIZE_CAP, workers: int = 1) -> list[dict]:
    """One row per n: simulated errors of the construction and the two-term prediction.

    If p already majorizes q nothing is needed and a single n = 1 row is returned.
    """
    p, q = as_prob_vec(p), as_prob_vec(q)
    if isinstance(theory, Athermality) and not theory.gamma.is_uniform:
        raise FeasibilityOnlyError("error-vs-size simulates the uniform-reference setting only")
    done = majorizes(q, p) if free_direction(theory) == "up" else majorizes(p, q)
    if done:
        return [{"n": 1, "d_C_exact": 1, "chi_err": 0.0, "system_err": 0.0,
                 "joint_err": 0.0, "predicted_eps": 0.0, "status": "ok"}]
    jobs = [(p, q, n, theory, size_cap) for n in range(n_min, n_max + 1)]
    return _map(_size_row, jobs, workers)


# -- entropy contour sampling --------------------------------------------------

def _bisect_entropy(u: np.ndarray, direction: np.ndarray, t_hi: float, target: float) -> np.ndarray:
    """Point u + t*direction on [0, t_hi] with entropy == target (entropy falls along t)."""
    lo, hi = 0.0, t_hi
    while hi - lo > 1e-15:
        mid = 0.5 * (lo + hi)
        h = shannon_entropy(u + mid * direction)
        if abs(h - target) <= ENTROPY_TOL:
            return u + mid * direction
        if h > target:
            lo = mid
        else:
            hi = mid
    return u + 0.5 * (lo + hi) * direction


def _ray_point(u: np.ndarray, x: np.ndarray, target: float) -> np.ndarray | None:
    direction = x - u
    neg = direction < 0
    if not neg.any():
        return None
    t_max = float(np.min(u[neg] / -direction[neg]))
    edge = np.clip(u + t_max * direction, 0.0, None)
    if shannon_entropy(edge / edge.sum()) > target:
        return None
    pt = np.clip(_bisect_entropy(u, direction, t_max, target), 0.0, None)
    return pt / pt.sum()


def _check_contour(dim: int, h: float) -> None:
    if h > math.log(dim) + ENTROPY_TOL:
        raise InfeasibleContourError(f"no distribution on {dim} outcomes has entropy {h!r} > ln {dim}")
    if h < 0.0:
        raise InvalidStateError(f"entropy must be nonnegative, got {h!r}")


def sample_contour(dim: int, h: float, k: int, seed: int) -> list[ProbVec]:
    """``k`` distributions with entropy ``h`` (nats), seeded.

    Each draw picks a Dirichlet(1) point, follows the ray from the uniform
    distribution through it, and bisects for the contour crossing; rays that
    leave the simplex before reaching the contour are rejected.
    """
    _check_contour(dim, h)
    rng = np.random.default_rng(seed)
    u = np.full(dim, 1.0 / dim)
    out = []
    tries = 0
    while len(out) < k:
        tries += 1
        if tries > MAX_REJECTIONS:
            raise InvalidStateError(f"could not sample the H = {h!r} contour")
        if h >= math.log(dim) - ENTROPY_TOL:
            out.append(ProbVec(u.copy()))
            continue
        pt = _ray_point(u, rng.dirichlet(np.ones(dim)), h)
        if pt is not None:
            out.append(ProbVec(pt))
    return out


def contour_target(dim: int, h: float) -> ProbVec:
    """Deterministic target with entropy ``h`` on the ray from uniform toward
    ``(1/2, 1/2, 0, ..., 0)``: two equal heavy entries, the rest equal and light.

    For qutrits at the default entropies this puts nu = 1 inside the range
    covered by the sampled initial states.
    """
    _check_contour(dim, h)
    u = np.full(dim, 1.0 / dim)
    if dim == 1 or h >= math.log(dim) - ENTROPY_TOL:
        return ProbVec(u)
    edge = np.zeros(dim)
    edge[:2] = 0.5
    if h < math.log(2.0):
        edge = np.zeros(dim)
        edge[0] = 1.0
    return ProbVec(_bisect_entropy(u, edge - u, 1.0, h))


@dataclass(frozen=True)
class ResonanceConfig:
    h_ini: float  # nats
    h_fin: float  # nats
    dim: int = 3
    samples: int = 50
    eps: float = 0.03
    n_max: int = 7
    seed: int = 0
    size_cap: int = DEFAULT_SIZE_CAP


def _resonance_row(args) -> dict:
    k, p, q, eps, n_max, size_cap = args
    p, q = p.padded(max(p.dim, q.dim)), q.padded(max(p.dim, q.dim))
    row = {"sample": k, **{f"p{i}": v for i, v in enumerate(p.probs)}}
    row["H_ini"], row["H_fin"] = shannon_entropy(p), shannon_entropy(q)
    try:
        r = rates(Entanglement(), p, q, eps)
        row.update(nu=r.nu, abs_nu_minus_1=abs(r.nu - 1.0), R=r.R)
        try:
            row["n_eps"] = n_epsilon(r)
        except NoFiniteNError:
            row["n_eps"] = None
    except FincatError:
        pass
    n = min_n_search(p, q, eps, n_max, size_cap, direction="up")
    row["min_n"] = n
    row["d_C"] = None if n is None else n * p.dim ** (n - 1)
    # LOCC reaches q from p without a catalyst iff q majorizes p
    row["majorizes_exact"] = majorizes(q, p)
    row["majorizes_within_eps"] = optimal_chi_above(p, q)[1] <= eps
    return row


def resonance_sweep(cfg: ResonanceConfig, target: ProbVec | None = None, workers: int = 1) -> list[dict]:
    _check_contour(cfg.dim, cfg.h_ini)
    q = target if target is not None else contour_target(cfg.dim, cfg.h_fin)
    if q.dim > cfg.dim:
        raise InvalidStateError(f"target has dim {q.dim} > sweep dim {cfg.dim}")
    ps = sample_contour(cfg.dim, cfg.h_ini, cfg.samples, cfg.seed)
    jobs = [(k, p, q, cfg.eps, cfg.n_max, cfg.size_cap) for k, p in enumerate(ps)]
    return _map(_resonance_row, jobs, workers)


def resonance_columns(dim: int) -> tuple[str, ...]:
    head = ("sample",) + tuple(f"p{i}" for i in range(dim))
    return head + RESONANCE_COLUMNS[4:]
