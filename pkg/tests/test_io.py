import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from repaudit.contamination import TriggerSpec
from repaudit.data import LabeledMatrix
from repaudit.decomposition import GlobalStats
from repaudit.errors import ConfigError, ParseError
from repaudit.io import (
    RunConfig,
    make_config,
    read_config_file,
    read_lrm,
    read_stats,
    read_tags,
    read_trigger,
    write_lrm,
    write_stats,
    write_tags,
    write_trigger,
)
from repaudit.linalg import SymMatrix


class TestLrmFormat:
    def test_happy_path(self, tmp_path):
        path = tmp_path / "data.lrm"
        path.write_text("lrm 1 2 3\n0 1.0 2.0 3.0\n1 4.0 5.0 6.0\n")
        data = read_lrm(path)
        assert (data.n, data.d) == (2, 3)
        assert np.array_equal(data.labels, [0, 1])
        assert np.array_equal(data.rows[1], [4.0, 5.0, 6.0])

    def test_version_gate(self, tmp_path):
        path = tmp_path / "data.lrm"
        path.write_text("lrm 2 1 1\n0 1.0\n")
        with pytest.raises(ParseError, match="version"):
            read_lrm(path)

    def test_wrong_field_count_names_line(self, tmp_path):
        path = tmp_path / "data.lrm"
        path.write_text("lrm 1 2 3\n0 1.0 2.0 3.0\n1 4.0 5.0\n")
        with pytest.raises(ParseError, match="line 3"):
            read_lrm(path)

    def test_non_finite_value_names_line(self, tmp_path):
        path = tmp_path / "data.lrm"
        path.write_text("lrm 1 1 2\n0 1.0 inf\n")
        with pytest.raises(ParseError, match="line 2"):
            read_lrm(path)

    def test_negative_label_rejected(self, tmp_path):
        path = tmp_path / "data.lrm"
        path.write_text("lrm 1 1 1\n-1 1.0\n")
        with pytest.raises(ParseError, match="label"):
            read_lrm(path)

    def test_missing_rows_rejected(self, tmp_path):
        path = tmp_path / "data.lrm"
        path.write_text("lrm 1 3 1\n0 1.0\n")
        with pytest.raises(ParseError, match="expected 3"):
            read_lrm(path)

    def test_round_trip_bit_exact(self, tmp_path):
        rng = np.random.default_rng(0)
        rows = rng.standard_normal((20, 4)) * np.logspace(-150, 150, 4)
        data = LabeledMatrix(rows, rng.integers(0, 5, 20), 5)
        path = tmp_path / "data.lrm"
        write_lrm(path, data)
        back = read_lrm(path)
        assert back.rows.tobytes() == data.rows.tobytes()
        assert np.array_equal(back.labels, data.labels)

    @given(
        values=st.lists(
            st.floats(allow_nan=False, allow_infinity=False, width=64),
            min_size=1,
            max_size=8,
        )
    )
    @settings(max_examples=80, deadline=None)
    def test_round_trip_any_finite_floats(self, values, tmp_path_factory):
        path = tmp_path_factory.mktemp("lrm") / "row.lrm"
        data = LabeledMatrix(np.array([values]), [0], 1)
        write_lrm(path, data)
        assert read_lrm(path).rows.tobytes() == data.rows.tobytes()

    def test_write_is_deterministic(self, tmp_path):
        data = LabeledMatrix(np.array([[1.5, -0.25]]), [0], 1)
        a, b = tmp_path / "a.lrm", tmp_path / "b.lrm"
        write_lrm(a, data)
        write_lrm(b, data)
        assert a.read_bytes() == b.read_bytes()


class TestTriggerFormat:
    def test_round_trip(self, tmp_path):
        trig = TriggerSpec(kappa=[0.0, 0.5, 1.0], delta=[1.0, -2.0, 0.25])
        path = tmp_path / "t.trig"
        write_trigger(path, trig)
        back = read_trigger(path)
        assert back.kappa.tobytes() == trig.kappa.tobytes()
        assert back.delta.tobytes() == trig.delta.tobytes()

    def test_header_checked(self, tmp_path):
        path = tmp_path / "t.trig"
        path.write_text("trig 9 2\n0 0\n0 0\n")
        with pytest.raises(ParseError, match="version"):
            read_trigger(path)

    def test_wrong_value_count(self, tmp_path):
        path = tmp_path / "t.trig"
        path.write_text("trig 1 3\n0 0\n0 0 0\n")
        with pytest.raises(ParseError):
            read_trigger(path)


class TestStatsFormat:
    def make_stats(self, d=4, seed=0):
        rng = np.random.default_rng(seed)
        a = rng.standard_normal((d, d))
        b = rng.standard_normal((d, d))
        return GlobalStats(
            d=d,
            s_mu=SymMatrix(a @ a.T + np.eye(d)),
            s_eps=SymMatrix(b @ b.T + np.eye(d)),
            center=rng.standard_normal(d),
            em_iters_used=5,
            converged=True,
        )

    def test_round_trip_exact(self, tmp_path):
        stats = self.make_stats()
        path = tmp_path / "g.scgs"
        write_stats(path, stats)
        back = read_stats(path)
        assert back.d == stats.d
        assert back.center.tobytes() == stats.center.tobytes()
        assert back.s_mu.values.tobytes() == stats.s_mu.values.tobytes()
        assert back.s_eps.values.tobytes() == stats.s_eps.values.tobytes()
        assert back.fingerprint() == stats.fingerprint()

    def test_header_layout(self, tmp_path):
        stats = self.make_stats(d=3)
        path = tmp_path / "g.scgs"
        write_stats(path, stats)
        raw = path.read_bytes()
        assert raw[:4] == b"SCGS"
        assert int.from_bytes(raw[4:8], "little") == 1
        assert int.from_bytes(raw[8:12], "little") == 3
        assert len(raw) == 12 + 8 * (3 + 2 * 9)

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "g.scgs"
        path.write_bytes(b"NOPE" + bytes(20))
        with pytest.raises(ParseError, match="magic"):
            read_stats(path)

    def test_truncated_body(self, tmp_path):
        stats = self.make_stats(d=2)
        path = tmp_path / "g.scgs"
        write_stats(path, stats)
        path.write_bytes(path.read_bytes()[:-8])
        with pytest.raises(ParseError, match="bytes"):
            read_stats(path)


class TestRunConfig:
    def test_defaults(self):
        config = RunConfig()
        assert config.threshold == math.exp(2.0)
        assert config.dof(16) == 16.0

    def test_custom_dof_requires_value(self):
        with pytest.raises(ConfigError):
            RunConfig(dof_mode="custom")
        assert RunConfig(dof_mode="custom", dof_value=40.0).dof(16) == 40.0

    def test_bad_mode(self):
        with pytest.raises(ConfigError):
            RunConfig(dof_mode="auto")

    def test_config_file_parsing(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text(
            "# full-line comment\n"
            "ridge_scale = 1e-5\n"
            "em_max_iters = 25  # inline comment\n"
            "dof_mode = custom\n"
            "dof_value = 40\n"
            "\n"
        )
        overrides = read_config_file(path)
        assert overrides == {
            "ridge_scale": 1e-5,
            "em_max_iters": 25,
            "dof_mode": "custom",
            "dof_value": 40.0,
        }

    def test_unknown_key_rejected(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("mystery = 3\n")
        with pytest.raises(ConfigError, match="mystery"):
            read_config_file(path)

    def test_flags_override_file(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("em_max_iters = 25\nseed = 4\n")
        config = make_config(path, em_max_iters=99)
        assert config.em_max_iters == 99
        assert config.seed == 4

    def test_bad_value_rejected(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("em_max_iters = soon\n")
        with pytest.raises(ConfigError):
            read_config_file(path)


class TestTags:
    def test_round_trip(self, tmp_path):
        path = tmp_path / "x.tags"
        write_tags(path, ["clean", "mix", "clean"])
        assert read_tags(path) == ["clean", "mix", "clean"]
