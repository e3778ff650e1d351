"""Second-order rate calculus and catalyst sizing.

Three theories are supported: pure-state entanglement (Schmidt vectors,
quantifier H), athermality of energy-incoherent states relative to a Gibbs
state (quantifier D(.||gamma)), and unitary/noisy operations (athermality
relative to the maximally mixed state).

Every sizing result drops the higher-order remainder terms of the expansion
and is labelled as a two-term approximation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .exceptions import NoFiniteNError, UndefinedRateError
from .spectra import (
    GibbsSpec,
    as_prob_vec,
    entropy_variance,
    relative_entropy,
    relative_entropy_variance,
    shannon_entropy,
)

APPROXIMATION = "two-term"
QUANTIFIER_TOL = 1e-14
_SQRT2 = math.sqrt(2.0)
_SQRT2PI = math.sqrt(2.0 * math.pi)

# Acklam's rational approximation to the normal quantile (rel. error ~1e-9)
_A = (-3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
      1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00)
_B = (-5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
      6.680131188771972e01, -1.328068155288572e01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758276141423e00,
      -2.549732539343734e00, 4.374664141464968e00, 2.938163982698783e00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
      3.754408661907416e00)
_P_LOW = 0.02425


def normal_cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / _SQRT2)


def _acklam(p: float) -> float:
    if p < _P_LOW:
        q = math.sqrt(-2.0 * math.log(p))
        num = ((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]
        den = (((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0
        return num / den
    q = p - 0.5
    r = q * q
    num = (((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * q
    den = ((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0
    return num / den


def inv_normal_cdf(x: float) -> float:
    """Quantile of the standard normal distribution.

    Rational initial guess, then two Halley steps against an erfc-based CDF.
    The upper half is mapped to the lower one (``1 - x`` is exact there), so
    the lower tail keeps full relative accuracy.
    """
    if not 0.0 < x < 1.0:
        raise ValueError(f"inv_normal_cdf needs 0 < x < 1, got {x!r}")
    if x > 0.5:
        return -inv_normal_cdf(1.0 - x)
    z = _acklam(x)
    for _ in range(2):
        e = normal_cdf(z) - x
        u = e * _SQRT2PI * math.exp(0.5 * z * z)
        z = z - u / (1.0 + 0.5 * z * u)
    return z


# -- sesqui-normal -------------------------------------------------------------

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
_GRID_STEPS = 65
_X_TOL = 1e-10


@dataclass(frozen=True)
class SesquiNormal:
    value: float
    argmin: float
    at_boundary: bool = False


def _golden_min(f, lo: float, hi: float) -> tuple[float, float]:
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while b - a > _X_TOL:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
    return (c, fc) if fc <= fd else (d, fd)


def sesqui_normal_full(nu: float, eps: float) -> SesquiNormal:
    """inf over eps < x < 1 of sqrt(nu)*Phi^-1(x) - Phi^-1(x - eps), with its argmin.

    The objective blows up at both ends when nu > 0, so only interior points
    are evaluated: a 64-point grid picks brackets, golden-section search
    refines the three best to a width of 1e-10 in x. For nu = 0 the infimum is
    the x -> 1 limit, returned with ``at_boundary``; nu = inf gives +inf.
    """
    if not 0.0 < eps < 1.0:
        raise ValueError(f"eps must lie in (0, 1), got {eps!r}")
    if nu < 0 or math.isnan(nu):
        raise ValueError(f"nu must be >= 0, got {nu!r}")
    if nu == math.inf:
        return SesquiNormal(math.inf, math.nan, at_boundary=True)
    if nu == 0.0:
        return SesquiNormal(-inv_normal_cdf(1.0 - eps), 1.0, at_boundary=True)
    root = math.sqrt(nu)

    def objective(x: float) -> float:
        return root * inv_normal_cdf(x) - inv_normal_cdf(x - eps)

    step = (1.0 - eps) / _GRID_STEPS
    xs = [eps + k * step for k in range(_GRID_STEPS + 1)]
    xs[-1] = 1.0
    vals = [objective(x) for x in xs[1:-1]]
    ranked = sorted(range(len(vals)), key=lambda k: (vals[k], k))[:3]
    best = (math.inf, math.nan)
    for k in ranked:
        x, fx = _golden_min(objective, xs[k], xs[k + 2])
        if fx < best[0]:
            best = (fx, x)
    return SesquiNormal(best[0], best[1])


def sesqui_normal(nu: float, eps: float) -> float:
    return sesqui_normal_full(nu, eps).value


# -- theories and rates --------------------------------------------------------


@dataclass(frozen=True)
class Entanglement:
    """Pure bipartite states given by Schmidt vectors."""

    name: str = field(default="entanglement", init=False)


@dataclass(frozen=True)
class Athermality:
    """Energy-incoherent states relative to the Gibbs state ``gamma``."""

    gamma: GibbsSpec
    name: str = field(default="athermality", init=False)


@dataclass(frozen=True)
class UnitaryNoisy:
    """Unitary/noisy operations on a ``d_S``-level system (uniform reference)."""

    d_S: int
    name: str = field(default="unitary", init=False)

    @property
    def gamma(self) -> GibbsSpec:
        return GibbsSpec.uniform(self.d_S)


TheoryKind = Entanglement | Athermality | UnitaryNoisy


def free_direction(theory: TheoryKind) -> str:
    """"up" if free maps climb the majorization order (pure-state LOCC), else "down"."""
    return "up" if isinstance(theory, Entanglement) else "down"


def quantifiers(theory: TheoryKind, p) -> tuple[float, float]:
    """(resource content, fluctuation) of ``p``: (H, V) or (D, V(.||gamma))."""
    p = as_prob_vec(p)
    if isinstance(theory, Entanglement):
        return shannon_entropy(p), entropy_variance(p)
    gamma = theory.gamma
    return relative_entropy(p, gamma), relative_entropy_variance(p, gamma)


def system_dim(theory: TheoryKind, p, q) -> int:
    if isinstance(theory, UnitaryNoisy):
        return theory.d_S
    if isinstance(theory, Athermality):
        return theory.gamma.dim
    return max(as_prob_vec(p).dim, as_prob_vec(q).dim)


@dataclass(frozen=True)
class SecondOrderRates:
    R: float
    Rprime: float
    nu: float
    f_value: float
    epsilon: float
    mean_p: float
    mean_q: float
    var_p: float
    var_q: float
    d_S: int
    flags: tuple[str, ...] = ()

    @property
    def gap(self) -> float:
        return self.mean_p - self.mean_q


def resonance(mean_p: float, var_p: float, mean_q: float, var_q: float) -> float:
    """Ratio of fluctuation-to-content quotients; +inf when only the target is flat."""
    if var_q == 0.0:
        return math.inf if var_p > 0.0 else 1.0
    if mean_p <= 0.0:
        return 0.0
    return (var_p / mean_p) / (var_q / mean_q)


def rates(theory: TheoryKind, p, q, eps: float) -> SecondOrderRates:
    """First-order rate, second-order coefficient and resonance parameter.

    ``R = M(p)/M(q)`` and ``R' = sqrt(V(p)) f_nu(eps) / M(q)``, where M, V are
    the theory's content and fluctuation quantifiers.
    """
    p, q = as_prob_vec(p), as_prob_vec(q)
    mp, vp = quantifiers(theory, p)
    mq, vq = quantifiers(theory, q)
    if mq <= QUANTIFIER_TOL:
        raise UndefinedRateError("target state is free (zero resource content); rate undefined")
    flags = []
    if mp <= QUANTIFIER_TOL:
        flags.append("no_catalysis")
    nu = resonance(mp, vp, mq, vq)
    if nu == math.inf:
        flags.append("nu_infinite")
    sn = sesqui_normal_full(nu, eps)
    if sn.at_boundary and nu == 0.0:
        flags.append("nu_zero_boundary")
    rprime = 0.0 if vp == 0.0 else math.sqrt(vp) * sn.value / mq
    return SecondOrderRates(
        R=mp / mq,
        Rprime=rprime,
        nu=nu,
        f_value=sn.value,
        epsilon=eps,
        mean_p=mp,
        mean_q=mq,
        var_p=vp,
        var_q=vq,
        d_S=system_dim(theory, p, q),
        flags=tuple(flags),
    )


def n_epsilon(r: SecondOrderRates) -> int:
    """Two-term estimate of the fewest copies with rate above one.

    Smallest n with ``R - R'/sqrt(n) >= 1``, i.e. ``ceil((R'/(R-1))^2)``. A
    nonpositive ``R'`` means a single copy already suffices.
    """
    if not r.R > 1.0:
        raise NoFiniteNError(f"rate R = {r.R!r} <= 1: no finite number of copies suffices")
    if not math.isfinite(r.Rprime):
        raise NoFiniteNError("second-order coefficient is infinite (flat target, nu = inf)")
    if r.Rprime <= 0.0:
        return 1
    return max(1, math.ceil((r.Rprime / (r.R - 1.0)) ** 2))


@dataclass(frozen=True)
class CatalystPlan:
    n_eps: int
    log_dC: float
    dC_exact: int | None
    d_S: int


def catalyst_dimension(n: int, d_S: int) -> CatalystPlan:
    """Catalyst size n * d_S^(n-1) of the multi-copy construction (log in nats)."""
    if n < 1:
        raise ValueError(f"n must be a positive integer, got {n}")
    if d_S < 2:
        raise ValueError(f"d_S must be at least 2, got {d_S}")
    log_dC = math.log(n) + (n - 1) * math.log(d_S)
    exact = n * d_S ** (n - 1)
    return CatalystPlan(n, log_dC, exact if exact < 2**63 else None, d_S)


@dataclass(frozen=True)
class SufficiencyVerdict:
    status: str  # "sufficient" | "not_implied"
    gap: float
    threshold: float
    log_dC: float
    total_log_dC: float
    approximation: str = APPROXIMATION
    note: str = ""

    @property
    def sufficient(self) -> bool:
        return self.status == "sufficient"


def _threshold(var_p: float, d_S: int, log_dC: float, f: float) -> float:
    if var_p == 0.0 or f == 0.0:
        return 0.0
    if log_dC <= 0.0:
        return math.copysign(math.inf, f)
    return math.sqrt(var_p * math.log(d_S) / log_dC) * f


def sufficiency_check(theory: TheoryKind, p, q, eps: float, log_dC: float) -> SufficiencyVerdict:
    """Dominant-term test: gap > sqrt(V(p) log d_S / log d_C) * f_nu(eps).

    A sufficient, not necessary, condition; the o(1/sqrt(log d_C)) remainder is
    ignored. For unitary/noisy operations ``log_dC`` sizes the correlated part
    C1 and the total catalyst is d_C1 * (1 + d_S).
    """
    p, q = as_prob_vec(p), as_prob_vec(q)
    mp, vp = quantifiers(theory, p)
    mq, vq = quantifiers(theory, q)
    d_S = system_dim(theory, p, q)
    total = log_dC + math.log(1 + d_S) if isinstance(theory, UnitaryNoisy) else log_dC
    gap = mp - mq
    if not gap > 0.0:
        return SufficiencyVerdict("not_implied", gap, math.nan, log_dC, total,
                                  note="nonpositive resource gap")
    if vp == 0.0:
        return SufficiencyVerdict("sufficient", gap, 0.0, log_dC, total,
                                  note="source has no fluctuations")
    nu = resonance(mp, vp, mq, vq)
    if nu == math.inf:
        return SufficiencyVerdict("not_implied", gap, math.inf, log_dC, total,
                                  note="flat target: nu is infinite and the expansion degenerates")
    f = sesqui_normal(nu, eps)
    thr = _threshold(vp, d_S, log_dC, f)
    status = "sufficient" if gap > thr else "not_implied"
    return SufficiencyVerdict(status, gap, thr, log_dC, total)


def min_log_dC(theory: TheoryKind, p, q, eps: float) -> float:
    """Smallest log d_C passing ``sufficiency_check`` (0 if any size passes, inf if none)."""
    p, q = as_prob_vec(p), as_prob_vec(q)
    mp, vp = quantifiers(theory, p)
    mq, vq = quantifiers(theory, q)
    gap = mp - mq
    if not gap > 0.0:
        return math.inf
    if vp == 0.0:
        return 0.0
    nu = resonance(mp, vp, mq, vq)
    if nu == math.inf:
        return math.inf
    f = sesqui_normal(nu, eps)
    if f <= 0.0:
        return 0.0
    return vp * math.log(system_dim(theory, p, q)) * f * f / (gap * gap)


def _zero_of_f(nu: float) -> float:
    """Largest eps with f_nu(eps) <= 0 (0 at resonance, where f_1 > 0 on (0, 1))."""
    lo, hi = 0.0, 1.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if mid > 0.0 and sesqui_normal(nu, mid) <= 0.0:
            lo = mid
        else:
            hi = mid
    return lo


def predicted_error(theory: TheoryKind, p, q, n: int, tol: float = 1e-12) -> float:
    """Error the two-term expansion predicts for ``n`` copies.

    Inverts ``n = V(p) f_nu(eps)^2 / gap^2`` (the continuous form of
    ``n_epsilon``) on its decreasing branch, where ``f_nu(eps) <= 0``: solves
    ``f_nu(eps) = -sqrt(n) * gap / sqrt(V(p))`` by bisection in eps. Returns 0
    when the source has no fluctuations or the pair is exactly resonant, and
    nan when the gap is not positive.
    """
    p, q = as_prob_vec(p), as_prob_vec(q)
    mp, vp = quantifiers(theory, p)
    mq, vq = quantifiers(theory, q)
    gap = mp - mq
    if not gap > 0.0:
        return math.nan
    nu = resonance(mp, vp, mq, vq)
    if vp == 0.0 or nu == math.inf:
        return 0.0 if vp == 0.0 else math.nan
    target = -math.sqrt(n) * gap / math.sqrt(vp)
    hi = _zero_of_f(nu)
    lo = 0.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if sesqui_normal(nu, mid) > target:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)
