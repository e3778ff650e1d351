import itertools

import numpy as np
import pytest

from fincat.catalyst import (
    CatalystState,
    assemble_final_state,
    build_catalyst,
    build_chi,
    min_n_search,
    run_protocol,
    verify_catalytic,
)
from fincat.exceptions import DimensionMismatchError, FeasibilityOnlyError
from fincat.majorization import majorizes
from fincat.spectra import GibbsSpec, ProductProbVec, tensor_power

from conftest import FIG2_P, FIG2_Q, random_probs


def loop_marginal(t, keep):
    """Marginal of a dense tensor by explicit index loops."""
    out = np.zeros([t.shape[k] for k in keep])
    for idx in np.ndindex(*t.shape):
        out[tuple(idx[k] for k in keep)] += t[idx]
    return out


def loop_omega(p, chi_t, n):
    """omega[c1_1..c1_(n-1), i] = p(c_1)...p(c_i) * chi_[i+1..](c_(i+1)..), 0-based i."""
    d = len(p)
    out = np.zeros((d,) * (n - 1) + (n,))
    for i in range(n):
        tail = loop_marginal(chi_t, list(range(i + 1, n))) if i + 1 < n else np.array(1.0)
        for c in itertools.product(range(d), repeat=n - 1):
            val = np.prod([p[c[k]] for k in range(i)])
            val *= tail[tuple(c[i:])] if i + 1 < n else 1.0
            out[c + (i,)] = val / n
    return out


def loop_final_cyclic(p, chi_t, n):
    """Final joint state by literally permuting index tuples.

    Before relabelling, branch j holds p^(j) (x) chi_[j..n-1] on the n registers
    (branch 0 being the converted block chi). The recovery map then moves the
    last register to the front, a cyclic shift of all n registers.
    """
    d = len(p)
    out = np.zeros((d,) * n + (n,))
    for j in range(n):
        tail = loop_marginal(chi_t, list(range(j, n)))
        for regs in itertools.product(range(d), repeat=n):
            val = np.prod([p[regs[k]] for k in range(j)]) * tail[tuple(regs[j:])]
            shifted = (regs[-1],) + regs[:-1]
            out[shifted + (j,)] += val / n
    return out


class TestBuildChi:
    def test_single_copy_majorized(self):
        chi, err = build_chi([0.7, 0.2, 0.1], [0.5, 0.3, 0.2], 1)
        assert err == 0.0 and np.allclose(chi.probs, [0.5, 0.3, 0.2])

    def test_equal_states(self, rng):
        p = random_probs(rng, 3)
        chi, err = build_chi(p, p, 3)
        assert err == 0.0
        assert np.allclose(chi.probs, tensor_power(p, 3).probs)

    def test_fig2_error_by_copies(self):
        # not monotone: three copies are worse than one, four are better
        errs = [build_chi(FIG2_P, FIG2_Q, n)[1] for n in (1, 3, 4)]
        assert errs[1] > errs[0] > errs[2]

    def test_fig2_three_copies_lp_oracle(self):
        # sorted-variable LP: chi nonincreasing, partial sums of chi at most those of p^n
        from scipy.optimize import linprog

        _, err = build_chi(FIG2_P, FIG2_Q, 3)
        ps = np.sort(tensor_power(FIG2_P, 3).probs)[::-1]
        qs = np.sort(tensor_power(FIG2_Q, 3).probs)[::-1]
        d = ps.size
        # variables chi, u, v with chi - u + v = q
        c = np.concatenate([np.zeros(d), np.full(2 * d, 0.5)])
        A_eq = np.hstack([np.eye(d), -np.eye(d), np.eye(d)])
        A_eq = np.vstack([A_eq, np.concatenate([np.ones(d), np.zeros(2 * d)])])
        b_eq = np.concatenate([qs, [1.0]])
        lower = np.tril(np.ones((d - 1, d)))
        order = np.zeros((d - 1, d))
        order[np.arange(d - 1), np.arange(d - 1)] = -1.0
        order[np.arange(d - 1), np.arange(1, d)] = 1.0
        A_ub = np.vstack([np.hstack([lower, np.zeros((d - 1, 2 * d))]),
                          np.hstack([order, np.zeros((d - 1, 2 * d))])])
        b_ub = np.concatenate([np.cumsum(ps)[:-1], np.zeros(d - 1)])
        res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq, bounds=(0, None), method="highs")
        assert res.status == 0
        assert err == pytest.approx(res.fun, abs=1e-9)

    def test_reachability_both_directions(self, rng):
        for _ in range(20):
            p, q = random_probs(rng, 3), random_probs(rng, 3)
            pn = tensor_power(p, 3).flat()
            down, _ = build_chi(p, q, 3)
            up, _ = build_chi(p, q, 3, direction="up")
            assert majorizes(pn, down.flat())
            assert majorizes(up.flat(), pn)

    def test_placement_follows_target_ranking(self, rng):
        p, q = random_probs(rng, 3), random_probs(rng, 3)
        chi, _ = build_chi(p, q, 2)
        qn = tensor_power(q, 2).probs
        order = np.argsort(-qn, kind="stable")
        assert np.all(np.diff(chi.probs[order]) <= 1e-15)

    def test_bad_direction(self):
        with pytest.raises(ValueError):
            build_chi([0.5, 0.5], [0.5, 0.5], 1, direction="sideways")


class TestCatalyst:
    def test_single_copy_trivial(self):
        chi, _ = build_chi(FIG2_P, FIG2_Q, 1)
        omega = build_catalyst(FIG2_P, chi, 1)
        assert omega.dim == 1
        assert np.allclose(omega.as_product().probs, [1.0])

    def test_two_block_point_mass(self):
        chi = ProductProbVec(np.array([1.0, 0, 0, 0]), (2, 2))
        omega = build_catalyst([1.0, 0.0], chi, 2)
        assert np.allclose(omega.as_product().tensor(), [[0.5, 0.5], [0.0, 0.0]])

    def test_fig2_loop_oracle(self):
        chi, _ = build_chi(FIG2_P, FIG2_Q, 3)
        omega = build_catalyst(FIG2_P, chi, 3)
        want = loop_omega(FIG2_P, chi.tensor(), 3)
        assert np.allclose(omega.as_product().tensor(), want, atol=1e-15)
        assert omega.dim == 27

    def test_dimension_checks(self):
        chi = tensor_power([0.5, 0.5], 2)
        with pytest.raises(DimensionMismatchError):
            build_catalyst([0.5, 0.5], chi, 3)
        with pytest.raises(DimensionMismatchError):
            assemble_final_state([0.2, 0.3, 0.5], chi, 2)


class TestFinalState:
    def test_single_copy_is_chi(self):
        chi, _ = build_chi(FIG2_P, FIG2_Q, 1)
        final = assemble_final_state(FIG2_P, chi, 1)
        assert np.allclose(final.system_marginal().probs, chi.probs)

    def test_fixed_point(self, rng):
        p = random_probs(rng, 3)
        chi, _ = build_chi(p, p, 3)
        final = assemble_final_state(p, chi, 3)
        omega = build_catalyst(p, chi, 3)
        assert np.allclose(final.system_marginal().probs, p, atol=1e-15)
        assert np.allclose(final.catalyst_marginal().probs, omega.as_product().probs, atol=1e-15)

    @pytest.mark.parametrize("d,n", [(2, 2), (2, 3), (3, 2), (3, 3)])
    def test_cyclic_loop_oracle(self, rng, d, n):
        for _ in range(5):
            p, q = random_probs(rng, d), random_probs(rng, d)
            chi, _ = build_chi(p, q, n)
            final = assemble_final_state(p, chi, n)
            want = loop_final_cyclic(p, chi.tensor(), n)
            assert np.allclose(final.as_product().tensor(), want, atol=1e-15)

    def test_branch_label_uniform(self, rng):
        p, q = random_probs(rng, 3), random_probs(rng, 3)
        chi, _ = build_chi(p, q, 4)
        final = assemble_final_state(p, chi, 4)
        assert np.allclose(final.branch_marginal().probs, 0.25, atol=1e-15)


class TestProtocol:
    def test_equal_states(self, rng):
        p = random_probs(rng, 3)
        rep = run_protocol(p, p, 3)
        assert rep.system_err == pytest.approx(0.0, abs=1e-15)
        assert rep.joint_err == pytest.approx(0.0, abs=1e-15)
        assert rep.feasible

    def test_single_copy_reduces_to_approximate_majorization(self):
        from fincat.majorization import optimal_chi

        rep = run_protocol(FIG2_P, FIG2_Q, 1)
        _, err = optimal_chi(FIG2_P, FIG2_Q)
        assert rep.d_C == 1
        assert rep.system_err == pytest.approx(err, abs=1e-15)
        assert rep.chi_err == pytest.approx(err, abs=1e-15)

    def test_majorized_single_copy(self):
        rep = run_protocol([0.7, 0.2, 0.1], [0.5, 0.3, 0.2], 1)
        assert rep.system_err == 0.0 and rep.d_C == 1

    def test_fig2_exactness(self):
        for n in range(2, 7):
            rep = run_protocol(FIG2_P, FIG2_Q, n)
            assert rep.marginal_exactness <= 1e-12
            assert rep.d_C == n * 3 ** (n - 1)

    def test_fig2_errors_nonincreasing(self):
        errs = [run_protocol(FIG2_P, FIG2_Q, n).system_err for n in range(1, 7)]
        assert all(b <= a + 0.01 for a, b in zip(errs, errs[1:]))

    def test_guarantees_random(self, rng):
        for _ in range(30):
            d, n = int(rng.integers(2, 4)), int(rng.integers(1, 5))
            p, q = random_probs(rng, d), random_probs(rng, d)
            for direction in ("down", "up"):
                rep = run_protocol(p, q, n, direction=direction)
                assert rep.marginal_exactness <= 1e-12
                assert rep.system_err <= rep.chi_err + 1e-12
                assert rep.joint_err <= 2 * rep.chi_err + 1e-12
                assert rep.feasible

    def test_deterministic(self):
        a = run_protocol(FIG2_P, FIG2_Q, 4).to_dict()
        b = run_protocol(FIG2_P, FIG2_Q, 4).to_dict()
        assert a == b

    def test_finite_temperature_rejected(self):
        g = GibbsSpec(energies=[0.0, 1.0, 2.0], beta=1.0)
        with pytest.raises(FeasibilityOnlyError, match="feasibility"):
            run_protocol(FIG2_P, FIG2_Q, 2, gamma=g)

    def test_verify_flags_broken_catalyst(self):
        chi, err = build_chi(FIG2_P, FIG2_Q, 2)
        final = assemble_final_state(FIG2_P, chi, 2)
        omega = build_catalyst(FIG2_P, chi, 2)
        bad = CatalystState(2, 3, omega.blocks[::-1].copy())
        assert not verify_catalytic(final, bad, FIG2_Q, err).feasible


class TestMinN:
    def test_majorized(self):
        assert min_n_search([0.7, 0.2, 0.1], [0.5, 0.3, 0.2], 0.01, 5) == 1

    def test_rate_below_one(self):
        # the target holds more resource than the source
        assert min_n_search(FIG2_Q, FIG2_P, 0.005, 6) is None

    def test_fig2(self):
        n = min_n_search(FIG2_P, FIG2_Q, 0.03, 7)
        errs = [run_protocol(FIG2_P, FIG2_Q, k).system_err for k in range(1, n + 1)]
        assert errs[-1] <= 0.03 and all(e > 0.03 for e in errs[:-1])
