import numpy as np
import pytest

from repaudit.errors import ConfigError, SingularMatrixError
from repaudit.linalg import SymMatrix, mahalanobis_sq
from repaudit.synth import Infection, SynthSpec, generate

from oracles import diag_cov_pair


def spec_with(d=16, L=43, m=100, infections=(), seed=0):
    s_mu, s_eps = diag_cov_pair(d)
    return SynthSpec(
        d=d,
        num_classes=L,
        samples_per_class=m,
        s_mu_true=s_mu,
        s_eps_true=s_eps,
        infections=infections,
        seed=seed,
    )


class TestSpecValidation:
    def test_duplicate_infection_labels(self):
        with pytest.raises(ConfigError):
            spec_with(infections=(Infection(0, 0.3, 6.0), Infection(0, 0.2, 4.0)))

    def test_infection_label_out_of_range(self):
        with pytest.raises(ConfigError):
            spec_with(L=5, infections=(Infection(7, 0.3, 6.0),))

    def test_mix_fraction_bounds(self):
        with pytest.raises(ConfigError):
            Infection(0, 1.0, 6.0)

    def test_negative_separation(self):
        with pytest.raises(ConfigError):
            Infection(0, 0.5, -1.0)


class TestGenerate:
    def test_deterministic_bit_identical(self):
        spec = spec_with(infections=(Infection(0, 0.3, 6.0),), seed=11)
        a, tags_a = generate(spec)
        b, tags_b = generate(spec)
        assert a.rows.tobytes() == b.rows.tobytes()
        assert np.array_equal(a.labels, b.labels)
        assert tags_a == tags_b

    def test_no_infections_all_clean(self):
        data, tags = generate(spec_with(L=5, m=10))
        assert set(tags) == {"clean"}
        assert data.n == 50

    def test_zero_separation_is_distributionally_clean(self):
        base, _ = generate(spec_with(L=5, m=20, seed=4))
        mixed, tags = generate(
            spec_with(L=5, m=20, infections=(Infection(1, 0.4, 0.0),), seed=4)
        )
        assert base.rows.tobytes() == mixed.rows.tobytes()
        assert tags.count("mix") == 8

    def test_mix_rows_confined_to_infected_class(self):
        data, tags = generate(
            spec_with(L=6, m=25, infections=(Infection(2, 0.3, 6.0),), seed=8)
        )
        tags = np.array(tags)
        assert set(data.labels[tags == "mix"].tolist()) == {2}
        assert int(np.sum(tags == "mix")) == 8

    def test_noise_shared_across_separations(self):
        # Same seed, different separation: only the planted offset differs.
        a, tags = generate(spec_with(L=4, m=30, infections=(Infection(0, 0.5, 4.0),), seed=2))
        b, _ = generate(spec_with(L=4, m=30, infections=(Infection(0, 0.5, 8.0),), seed=2))
        tags = np.array(tags)
        clean_mask = tags == "clean"
        assert a.rows[clean_mask].tobytes() == b.rows[clean_mask].tobytes()

    def test_pooled_variation_covariance_converges(self):
        d = 16
        _, s_eps = diag_cov_pair(d)
        data, _ = generate(spec_with(d=d, L=43, m=100, seed=13))
        residuals = []
        for label in data.observed_labels():
            rows = data.class_rows(int(label))
            residuals.append(rows - rows.mean(axis=0))
        pooled = np.vstack(residuals)
        emp = pooled.T @ pooled / (pooled.shape[0] - 43)
        err = np.linalg.norm(emp - s_eps.values) / np.linalg.norm(s_eps.values)
        assert err <= 0.15

    def test_planted_separation_matches_request(self):
        d = 16
        s_mu, s_eps = diag_cov_pair(d)
        for seed in (0, 1, 2):
            data, tags = generate(
                spec_with(d=d, L=3, m=400, infections=(Infection(0, 0.5, 6.0),), seed=seed)
            )
            tags = np.array(tags[:400])
            rows = data.class_rows(0)
            mu_mix = rows[tags == "mix"].mean(axis=0)
            mu_clean = rows[tags == "clean"].mean(axis=0)
            sep = np.sqrt(mahalanobis_sq(mu_mix, mu_clean, s_eps))
            assert sep == pytest.approx(6.0, rel=0.2)

    def test_identity_covariance_spd_required(self):
        d = 3
        bad = SynthSpec(
            d=d,
            num_classes=3,
            samples_per_class=5,
            s_mu_true=SymMatrix(np.eye(d)),
            s_eps_true=SymMatrix(np.zeros((d, d))),
            seed=0,
        )
        with pytest.raises(SingularMatrixError):
            generate(bad)
