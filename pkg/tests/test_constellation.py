import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lierot.constellation import (
    Constellation,
    NuqamParams,
    direct_product,
    make_nuqam,
    make_qam,
    normalize_unit_energy,
    rotate,
)
from lierot.lie_rotations import build_skew_generator, exp_skew, family_rotation


def as_set(X):
    return {tuple(p) for p in X.points.tolist()}


def pairwise(points):
    return np.linalg.norm(points[:, None, :] - points[None, :, :], axis=-1)


def random_rotation(seed, n):
    B = np.random.default_rng(seed).normal(size=(n, n))
    return exp_skew(B - B.T)


class TestQam:
    def test_4qam(self):
        assert as_set(make_qam(4)) == {(a, b) for a in (-1.0, 1.0) for b in (-1.0, 1.0)}

    def test_16qam(self):
        X = make_qam(16)
        assert (X.M, X.n) == (16, 2)
        assert as_set(X) == {(a, b) for a in (-3.0, -1.0, 1.0, 3.0) for b in (-3.0, -1.0, 1.0, 3.0)}
        assert X.mean_energy == 10.0

    def test_order_is_lexicographic(self):
        X = make_qam(16)
        np.testing.assert_array_equal(X.points[:4], [[-3, -3], [-3, -1], [-3, 1], [-3, 3]])

    @pytest.mark.parametrize("M", [2, 8, 12, 32, 0, 1])
    def test_rejects(self, M):
        with pytest.raises(ValueError):
            make_qam(M)


class TestNuqam:
    def test_alpha_four_example(self):
        X = make_nuqam(NuqamParams(4, (4,)))
        expected = {(a, b) for a in (-4.0, -1.0, 1.0, 4.0) for b in (-4.0, -1.0, 1.0, 4.0)}
        assert as_set(X) == expected

    def test_uniform_levels_recover_qam(self):
        assert make_nuqam(NuqamParams(4, (3,))) == make_qam(16)
        assert make_nuqam(NuqamParams(6, (3, 5, 7))) == make_qam(64)
        assert make_nuqam(NuqamParams.uniform(6)) == make_qam(64)

    @pytest.mark.parametrize(
        "q,alpha",
        [(8, (2, 3, 4, 5, 6)), (5, (2, 3)), (4, (0.5,)), (4, (1.0,)), (6, (3, 2, 5)), (6, (2, 3))],
    )
    def test_invalid_params(self, q, alpha):
        with pytest.raises(ValueError):
            NuqamParams(q, alpha)

    def test_q8_explains(self):
        with pytest.raises(ValueError, match="only q=4 and q=6"):
            NuqamParams(8, (2, 3, 4, 5, 6))


class TestDirectProduct:
    def test_4d_qam(self):
        X = direct_product(make_qam(4), make_qam(4))
        assert (X.M, X.n) == (16, 4)
        assert as_set(X) == {
            (a, b, c, d) for a in (-1.0, 1.0) for b in (-1.0, 1.0) for c in (-1.0, 1.0) for d in (-1.0, 1.0)
        }

    def test_embed_with_zero_point(self):
        X = make_qam(4)
        Z = Constellation(np.zeros((1, 1)))
        Y = direct_product(X, Z)
        np.testing.assert_array_equal(Y.points, np.hstack([X.points, np.zeros((4, 1))]))

    def test_cartesian_order(self):
        A = Constellation([[0.0], [1.0]])
        B = Constellation([[10.0], [20.0], [30.0]])
        P = direct_product(A, B)
        np.testing.assert_array_equal(
            P.points, [[0, 10], [0, 20], [0, 30], [1, 10], [1, 20], [1, 30]]
        )

    def test_energy_adds(self):
        A, B = make_qam(16), make_nuqam(NuqamParams(4, (4.5,)))
        assert direct_product(A, B).mean_energy == pytest.approx(A.mean_energy + B.mean_energy, rel=1e-15)


class TestNormalize:
    def test_4qam(self):
        Y = normalize_unit_energy(make_qam(4))
        np.testing.assert_allclose(Y.points, make_qam(4).points / math.sqrt(2), rtol=1e-15)
        assert Y.mean_energy == pytest.approx(1.0, abs=1e-15)

    def test_16qam(self):
        np.testing.assert_allclose(normalize_unit_energy(make_qam(16)).points, make_qam(16).points / math.sqrt(10))

    def test_idempotent(self):
        Y = normalize_unit_energy(make_qam(64))
        np.testing.assert_allclose(normalize_unit_energy(Y).points, Y.points, atol=1e-15, rtol=0)

    def test_all_zero_rejected(self):
        with pytest.raises(ValueError):
            normalize_unit_energy(Constellation(np.zeros((1, 2))))


class TestRotate:
    def test_identity(self):
        X = make_qam(16)
        assert rotate(X, np.eye(2)) == X

    def test_quarter_turn(self):
        Q = family_rotation(build_skew_generator(1), math.pi / 2)
        np.testing.assert_allclose(rotate(Constellation([[1.0, 0.0]]), Q).points, [[0.0, -1.0]], atol=1e-16)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            rotate(make_qam(4), np.eye(3))

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.sampled_from([(4, 4), (16, 4), (4, 16)]))
    def test_distances_energy_and_normalization(self, seed, orders):
        X = direct_product(make_qam(orders[0]), make_qam(orders[1]))
        Q = random_rotation(seed, 4)
        Y = rotate(X, Q)
        assert Y.mean_energy == pytest.approx(X.mean_energy, abs=1e-12 * X.mean_energy)
        assert np.abs(pairwise(Y.points) - pairwise(X.points)).max() < 1e-12 * max(1.0, X.mean_energy)
        a = normalize_unit_energy(rotate(X, Q)).points
        b = rotate(normalize_unit_energy(X), Q).points
        assert np.abs(a - b).max() < 1e-12


class TestConstellationType:
    def test_duplicates_rejected(self):
        with pytest.raises(ValueError, match="distinct"):
            Constellation([[1.0, 0.0], [1.0, 0.0]])

    def test_ragged_rejected(self):
        with pytest.raises(ValueError):
            Constellation(np.zeros((0, 2)))

    def test_immutable(self):
        X = make_qam(4)
        with pytest.raises(ValueError):
            X.points[0, 0] = 5.0
