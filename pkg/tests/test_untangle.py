import numpy as np
import pytest

from repaudit.errors import DataError, DimensionError, TooFewSamplesError
from repaudit.linalg import SymMatrix, mahalanobis_sq
from repaudit.synth import Infection, SynthSpec, generate
from repaudit.untangle import lda_direction, subgroup_means, untangle_class

from oracles import diag_cov_pair, fld_value, random_spd


def infected_class_rows(seed, d=8, m=200, p=0.3, s=6.0):
    s_mu, s_eps = diag_cov_pair(d)
    data, tags = generate(
        SynthSpec(
            d=d,
            num_classes=3,
            samples_per_class=m,
            s_mu_true=s_mu,
            s_eps_true=s_eps,
            infections=(Infection(0, p, s),),
            seed=seed,
        )
    )
    rows = data.class_rows(0)
    truth = np.array([1 if tag == "mix" else 2 for tag in tags[:m]])
    return rows - rows.mean(axis=0), truth, s_eps


class TestLdaDirection:
    def test_symmetric_means_about_origin(self):
        v, t = lda_direction(np.array([1.0, 0.0]), np.array([-1.0, 0.0]), SymMatrix(np.eye(2)))
        assert np.array_equal(v, [2.0, 0.0])
        assert t == 0.0

    def test_identical_means(self):
        mu = np.array([1.5, -2.0])
        v, t = lda_direction(mu, mu, SymMatrix(np.eye(2)))
        assert np.array_equal(v, [0.0, 0.0])
        assert t == 0.0

    def test_scalar_case(self):
        v, t = lda_direction(np.array([2.0]), np.array([0.0]), SymMatrix(np.array([[4.0]])))
        assert v == pytest.approx([0.5], abs=0)
        assert t == pytest.approx(0.5, abs=0)

    def test_antisymmetry(self):
        rng = np.random.default_rng(6)
        s = SymMatrix(random_spd(rng, 4))
        m1, m2 = rng.standard_normal(4), rng.standard_normal(4)
        v, t = lda_direction(m1, m2, s)
        v_swapped, t_swapped = lda_direction(m2, m1, s)
        assert np.allclose(v_swapped, -v, atol=0)
        assert t_swapped == -t

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            lda_direction(np.zeros(3), np.zeros(2), SymMatrix(np.eye(2)))


class TestSubgroupMeans:
    def test_singleton_groups(self):
        mu1, mu2 = subgroup_means(np.array([[0.0, 0.0], [2.0, 0.0]]), [1, 2])
        assert np.array_equal(mu1, [0.0, 0.0])
        assert np.array_equal(mu2, [2.0, 0.0])

    def test_repeated_points(self):
        rows = np.array([[1.0, 1.0], [1.0, 1.0], [3.0, 3.0]])
        mu1, mu2 = subgroup_means(rows, [1, 1, 2])
        assert np.array_equal(mu1, [1.0, 1.0])
        assert np.array_equal(mu2, [3.0, 3.0])

    def test_permutation_invariance(self):
        rng = np.random.default_rng(1)
        rows = rng.standard_normal((12, 3))
        labels = np.array([1, 2] * 6)
        perm = rng.permutation(12)
        mu1a, mu2a = subgroup_means(rows, labels)
        mu1b, mu2b = subgroup_means(rows[perm], labels[perm])
        assert np.allclose(mu1a, mu1b, atol=1e-12)
        assert np.allclose(mu2a, mu2b, atol=1e-12)

    def test_empty_subgroup_raises(self):
        with pytest.raises(DataError):
            subgroup_means(np.zeros((3, 1)), [1, 1, 1])


class TestUntangleClass:
    def test_sign_split_quartet(self):
        rows = np.array([[-5.0], [-5.0], [5.0], [5.0]])
        res = untangle_class(rows, SymMatrix(np.array([[1.0]])))
        assert res.converged
        assert res.iters <= 3
        assert not res.degenerate
        split = set(zip(res.labels.tolist(), rows[:, 0].tolist()))
        assert split in (
            {(1, -5.0), (2, 5.0)},
            {(2, -5.0), (1, 5.0)},
        )
        lo, hi = sorted([float(res.mu1[0]), float(res.mu2[0])])
        assert (lo, hi) == (-5.0, 5.0)

    def test_identical_rows_degenerate(self):
        res = untangle_class(np.ones((5, 2)), SymMatrix(np.eye(2)))
        assert res.degenerate
        assert res.labels.min() == res.labels.max()

    def test_tie_assigned_label_one(self):
        # Symmetric start means the two zero rows score exactly 0 on the
        # first relabel; the tie rule must hand them to subgroup 1.
        rows = np.array([[-2.0], [0.0], [2.0], [0.0]])
        res = untangle_class(
            rows,
            SymMatrix(np.array([[1.0]])),
            max_iters=1,
            init_labels=np.array([1, 1, 2, 2]),
        )
        score = rows @ res.v - res.t
        on_plane = np.abs(score) <= 1e-12
        assert on_plane.sum() == 2
        assert np.all(res.labels[on_plane] == 1)

    def test_too_few_samples(self):
        with pytest.raises(TooFewSamplesError):
            untangle_class(np.zeros((1, 2)), SymMatrix(np.eye(2)))

    def test_bad_init_labels(self):
        with pytest.raises(DataError):
            untangle_class(
                np.zeros((3, 1)),
                SymMatrix(np.array([[1.0]])),
                init_labels=np.array([0, 1, 2]),
            )

    def test_fixed_point_consistency(self):
        for seed in (0, 2, 5):
            rows, _, s_eps = infected_class_rows(seed)
            res = untangle_class(rows, s_eps)
            assert res.converged
            mu1, mu2 = subgroup_means(rows, res.labels)
            v, t = lda_direction(mu2, mu1, s_eps)
            relabeled = np.where(rows @ v - t <= 1e-12, 1, 2)
            assert np.array_equal(relabeled, res.labels)
            assert np.allclose(mu1, res.mu1, atol=0)
            assert np.allclose(mu2, res.mu2, atol=0)

    def test_label_swap_symmetry(self):
        for seed in (0, 2, 5):
            rows, _, s_eps = infected_class_rows(seed, m=80)
            init = np.where(np.arange(80) % 2 == 0, 1, 2)
            a = untangle_class(rows, s_eps, init_labels=init)
            b = untangle_class(rows, s_eps, init_labels=3 - init)
            same = np.array_equal(a.labels, b.labels) or np.array_equal(
                a.labels, 3 - b.labels
            )
            assert same

    def test_fld_non_decreasing_over_iterations(self):
        for seed in (0, 2, 5):
            rows, _, s_eps = infected_class_rows(seed, m=120, p=0.4, s=5.0)
            init = np.where(np.arange(120) % 2 == 0, 1, 2)
            values = []
            for iters in range(1, 6):
                res = untangle_class(rows, s_eps, max_iters=iters, init_labels=init)
                if res.degenerate:
                    break
                values.append(fld_value(res.v, res.mu1, res.mu2, s_eps.values))
            assert all(a <= b + 1e-9 for a, b in zip(values, values[1:]))

    def test_recovery_accuracy(self):
        for seed in (0, 2, 5, 6, 7):
            for p in (0.1, 0.3, 0.5):
                rows, truth, s_eps = infected_class_rows(seed, p=p, s=6.0)
                res = untangle_class(rows, s_eps)
                agree = float(np.mean(res.labels == truth))
                assert max(agree, 1.0 - agree) >= 0.95

    def test_deterministic(self):
        rows, _, s_eps = infected_class_rows(3)
        a = untangle_class(rows, s_eps)
        b = untangle_class(rows, s_eps)
        assert np.array_equal(a.labels, b.labels)
        assert a.t == b.t
        assert np.array_equal(a.v, b.v)

    def test_separation_reflected_in_means(self):
        rows, truth, s_eps = infected_class_rows(0, p=0.5, s=8.0)
        res = untangle_class(rows, s_eps)
        sep = np.sqrt(mahalanobis_sq(res.mu1, res.mu2, s_eps))
        assert sep == pytest.approx(8.0, rel=0.2)
