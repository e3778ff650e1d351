import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fincat.exceptions import NotMajorizedError
from fincat.majorization import (
    TTransformSeq,
    apply_ttransforms,
    lorenz_curve,
    lp_oracle,
    lp_oracle_above,
    majorizes,
    optimal_chi,
    optimal_chi_above,
    thermo_majorizes,
    ttransform_sequence,
)
from fincat.spectra import GibbsSpec, ProbVec, tensor_power, trace_distance

from conftest import random_probs


def random_majorizing_pair(rng, d):
    """q = D p for a random doubly stochastic D (a mixture of permutations)."""
    p = random_probs(rng, d)
    perms = [rng.permutation(d) for _ in range(4)]
    w = rng.dirichlet(np.ones(4))
    q = sum(wi * p[perm] for wi, perm in zip(w, perms))
    return p, q / q.sum()


class TestMajorizes:
    def test_examples(self):
        assert majorizes([0.6, 0.4], [0.5, 0.5])
        assert not majorizes([0.5, 0.5], [0.6, 0.4])

    def test_extremes(self, rng):
        for d in range(1, 7):
            p = random_probs(rng, d)
            point = np.eye(d)[0]
            assert majorizes(p, np.full(d, 1 / d))
            assert majorizes(point, p)

    def test_padding(self):
        assert majorizes([1.0], [0.5, 0.5])
        assert not majorizes([0.5, 0.5], [1.0])

    def test_preorder(self, rng):
        checked = 0
        for _ in range(3000):
            p, q, r = (random_probs(rng, 3) for _ in range(3))
            assert majorizes(p, p)
            if majorizes(p, q) and majorizes(q, r):
                assert majorizes(p, r)
                checked += 1
        assert checked > 50


class TestThermo:
    def test_gibbs_is_bottom(self, rng):
        g = GibbsSpec(np.array([0.5, 0.3, 0.2]))
        for _ in range(50):
            assert thermo_majorizes(random_probs(rng, 3), g.weights, g)

    def test_uniform_reduces_to_majorization(self, rng):
        for _ in range(1000):
            d = int(rng.integers(2, 5))
            p, q = random_probs(rng, d), random_probs(rng, d)
            assert thermo_majorizes(p, q, GibbsSpec.uniform(d)) == majorizes(p, q)

    def test_qubit_lorenz_oracle(self):
        g = GibbsSpec(np.array([2 / 3, 1 / 3]))
        p, q = [0.9, 0.1], [0.5, 0.5]
        # elbows: p sorts by ratio 0.9/(2/3) > 0.1/(1/3), elbow (2/3, 0.9);
        # q sorts by 0.5/(1/3) > 0.5/(2/3), elbow (1/3, 0.5)
        lp = lorenz_curve(p, g)
        assert np.allclose(lp.x, [0, 2 / 3, 1]) and np.allclose(lp.y, [0, 0.9, 1])
        lq = lorenz_curve(q, g)
        assert np.allclose(lq.x, [0, 1 / 3, 1]) and np.allclose(lq.y, [0, 0.5, 1])
        # p's curve at 1/3 is 0.45 < 0.5: q is not reachable
        assert not thermo_majorizes(p, q, g)
        assert thermo_majorizes(q, g.weights, g)


class TestOptimalChi:
    def test_already_majorized(self):
        chi, err = optimal_chi([0.7, 0.3], [0.6, 0.4])
        assert err == 0.0 and chi.tolist() == [0.6, 0.4]

    def test_example(self):
        chi, err = optimal_chi([0.5, 0.5], [0.7, 0.3])
        assert err == pytest.approx(0.2)
        assert np.allclose(chi.probs, [0.5, 0.5])

    def test_oracle_examples(self):
        assert lp_oracle([0.3, 0.7], [0.3, 0.7]) == pytest.approx(0.0, abs=1e-12)
        assert lp_oracle([1.0, 0.0], [0.5, 0.5]) == pytest.approx(0.0, abs=1e-12)
        assert lp_oracle([0.5, 0.5], [1.0, 0.0]) == pytest.approx(0.5, abs=1e-12)

    def test_qubit_oracle_exhaustive(self, rng):
        # every 2x2 bistochastic map is a mixing weight t
        for _ in range(100):
            p, q = random_probs(rng, 2), random_probs(rng, 2)
            ts = np.linspace(0, 1, 20001)
            mixed = np.outer(1 - ts, p) + np.outer(ts, p[::-1])
            brute = 0.5 * np.abs(mixed - q).sum(axis=1).min()
            assert optimal_chi(p, q)[1] == pytest.approx(brute, abs=1e-4)

    def test_matches_lp_and_is_majorized(self, rng):
        for _ in range(300):
            d = int(rng.integers(2, 6))
            p, q = random_probs(rng, d), random_probs(rng, d)
            chi, err = optimal_chi(p, q)
            assert majorizes(p, chi)
            assert trace_distance(chi, q) == pytest.approx(err, abs=1e-12)
            assert err == pytest.approx(lp_oracle(p, q), abs=1e-9)
            assert (err == 0.0) == majorizes(p, q)

    def test_tensor_power_chi(self, rng):
        p, q = random_probs(rng, 3), random_probs(rng, 3)
        pn, qn = tensor_power(p, 3).flat(), tensor_power(q, 3).flat()
        chi, _ = optimal_chi(pn, qn)
        assert majorizes(pn, chi)

    def test_mirror_matches_lp(self, rng):
        for _ in range(300):
            d = int(rng.integers(2, 6))
            p, q = random_probs(rng, d), random_probs(rng, d)
            chi, err = optimal_chi_above(p, q)
            assert majorizes(chi, p)
            assert trace_distance(chi, q) == pytest.approx(err, abs=1e-12)
            assert err == pytest.approx(lp_oracle_above(p, q), abs=1e-9)
            assert (err == 0.0) == majorizes(q, p)


class TestTTransforms:
    def test_identity(self):
        assert len(ttransform_sequence([0.6, 0.4], [0.6, 0.4])) == 0

    def test_single_mix(self):
        seq = ttransform_sequence([1.0, 0.0], [0.5, 0.5])
        assert seq.steps == ((0, 1, 0.5),)

    def test_not_majorized(self):
        with pytest.raises(NotMajorizedError):
            ttransform_sequence([0.5, 0.5], [0.6, 0.4])

    def test_empty_and_swap(self):
        p = ProbVec(np.array([0.7, 0.2, 0.1]))
        assert np.allclose(apply_ttransforms(TTransformSeq((), 3), p).probs, p.probs, atol=1e-15)
        swapped = apply_ttransforms(TTransformSeq(((0, 2, 1.0),), 3), p)
        assert np.allclose(swapped.probs, [0.1, 0.2, 0.7], atol=1e-15)

    def test_round_trip(self, rng):
        for _ in range(500):
            d = int(rng.integers(2, 7))
            p, q = random_majorizing_pair(rng, d)
            seq = ttransform_sequence(p, q)
            out = apply_ttransforms(seq, p)
            assert np.abs(out.probs - q).max() <= 1e-10
            assert len(seq) <= 2 * (d - 1)
            assert np.allclose(seq.matrix() @ p, out.probs, atol=1e-12)

    def test_co_ordered_length(self, rng):
        for _ in range(300):
            d = int(rng.integers(2, 7))
            p, q = random_majorizing_pair(rng, d)
            order = np.argsort(-q, kind="stable")
            p = np.sort(p)[::-1][np.argsort(order)]
            assert len(ttransform_sequence(p, q)) <= d - 1

    def test_output_is_majorized_and_matrix_bistochastic(self, rng):
        for _ in range(100):
            d = int(rng.integers(2, 6))
            steps = tuple(
                (int(i), int(j), float(rng.uniform()))
                for i, j in (rng.choice(d, 2, replace=False) for _ in range(4))
            )
            seq = TTransformSeq(steps, d)
            p = random_probs(rng, d)
            assert majorizes(p, apply_ttransforms(seq, p))
            M = seq.matrix()
            assert np.allclose(M.sum(axis=0), 1) and np.allclose(M.sum(axis=1), 1)


@settings(max_examples=100, deadline=None)
@given(st.integers(2, 5), st.integers(0, 2**32 - 1))
def test_chi_error_zero_iff_majorized(d, seed):
    rng = np.random.default_rng(seed)
    p, q = random_probs(rng, d), random_probs(rng, d)
    _, err = optimal_chi(p, q)
    assert (err == 0.0) == majorizes(p, q)


def test_lp_oracle_size_guard():
    with pytest.raises(ValueError):
        lp_oracle(np.full(7, 1 / 7), np.full(7, 1 / 7))


def test_permutation_vertices_cover_birkhoff():
    # the LP optimum is a convex combination of permuted copies of p
    p = np.array([0.5, 0.3, 0.2])
    verts = {tuple(p[list(s)]) for s in itertools.permutations(range(3))}
    assert len(verts) == 6
