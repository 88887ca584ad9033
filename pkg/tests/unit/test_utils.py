import json
import math
import os

import numpy as np
import pytest

from povmlab.utils.file_utils import (
    FileFormatError, dump_json, ensure_directory, json_safe, load_json, load_yaml,
    save_json, write_text_file,
)
from povmlab.utils.numeric_utils import (
    TWO_PI, binomial_pmf, binomial_tail, derive_seeds, format_endpoint, format_float,
    is_nondecreasing, is_nonincreasing, make_rng, normal_cdf, normal_interval_mass,
    power_law_exponent, reduce_angle,
)


class TestNumericUtils:
    """Tests for the numeric helpers."""

    def test_normal_cdf_limits(self):
        """Test the standard normal CDF at zero and infinity."""
        assert normal_cdf(0.0) == pytest.approx(0.5)
        assert normal_cdf(-math.inf) == 0.0
        assert normal_cdf(math.inf) == 1.0

    def test_normal_interval_mass_far_tail(self):
        """Test that masses far in the right tail are not lost to cancellation."""
        mass = float(normal_interval_mass(10.0, 11.0))

        assert mass > 0.0
        assert mass == pytest.approx(float(normal_cdf(-10.0) - normal_cdf(-11.0)), rel=1e-12)

    def test_normal_interval_mass_whole_line(self):
        """Test that the whole line has mass 1."""
        assert float(normal_interval_mass(-math.inf, math.inf)) == 1.0

    def test_binomial_pmf_sums_to_one(self):
        """Test that the binomial pmf is normalized."""
        values = binomial_pmf(np.arange(0, 11), 10, 0.3)

        assert float(np.sum(values)) == pytest.approx(1.0, abs=1e-14)
        assert float(binomial_pmf(11, 10, 0.3)) == 0.0

    def test_binomial_tail(self):
        """Test P(Bin(m, eps) > threshold)."""
        assert float(binomial_tail(-1, 5, 0.5)) == pytest.approx(1.0)
        assert float(binomial_tail(4, 5, 0.5)) == pytest.approx(1 / 32)

    @pytest.mark.parametrize("theta,expected", [
        (0.0, 0.0),
        (TWO_PI, 0.0),
        (-math.pi / 2, 3 * math.pi / 2),
        (5.0, 5.0),
    ])
    def test_reduce_angle(self, theta, expected):
        """Test reducing angles into [0, 2*pi)."""
        assert reduce_angle(theta) == pytest.approx(expected)

    def test_format_float(self):
        """Test 17-significant-digit formatting."""
        assert format_float(0.1) == "0.10000000000000001"
        assert format_float(math.inf) == "inf"
        assert format_float(-math.inf) == "-inf"
        assert float(format_float(1 / 3)) == 1 / 3

    def test_format_endpoint(self):
        """Test the shortest round-trip endpoint text."""
        assert format_endpoint(1.0) == "1"
        assert format_endpoint(0.25) == "0.25"
        assert format_endpoint(-math.inf) == "-inf"

    def test_make_rng_is_reproducible(self):
        """Test that one seed yields one stream."""
        first = make_rng(42).uniform(size=5)
        second = make_rng(42).uniform(size=5)

        np.testing.assert_array_equal(first, second)

    def test_derive_seeds_are_independent(self):
        """Test that spawned children give different streams."""
        children = derive_seeds(42, 2)
        a = np.random.default_rng(children[0]).uniform(size=5)
        b = np.random.default_rng(children[1]).uniform(size=5)

        assert len(children) == 2
        assert not np.allclose(a, b)

    def test_monotonicity(self):
        """Test the monotonicity helpers with tolerance."""
        assert is_nondecreasing([1.0, 1.0 - 1e-14, 2.0]) is True
        assert is_nondecreasing([1.0, 0.5]) is False
        assert is_nonincreasing([3.0, 2.0, 2.0]) is True
        assert is_nonincreasing([1.0, 2.0]) is False

    def test_power_law_exponent(self):
        """Test the fitted exponent of i^(-2)."""
        values = [1.0 / i ** 2 for i in range(1, 11)]

        assert power_law_exponent(values) == pytest.approx(2.0)

    def test_power_law_exponent_edge_cases(self):
        """Test zero values and short sequences."""
        assert power_law_exponent([1.0, 0.0]) == math.inf
        assert power_law_exponent([0.5]) == 0.0


class TestFileUtils:
    """Tests for the file helpers."""

    def test_json_safe(self):
        """Test that non-finite floats become strings."""
        data = {"a": math.inf, "b": [-math.inf, 1.5], "c": (float("nan"),)}

        assert json_safe(data) == {"a": "inf", "b": ["-inf", 1.5], "c": ["nan"]}

    def test_dump_json_is_sorted(self):
        """Test deterministic key order."""
        text = dump_json({"b": 1, "a": math.inf})

        assert text.index('"a"') < text.index('"b"')
        assert json.loads(text) == {"a": "inf", "b": 1}

    def test_save_and_load_json(self, tmp_path):
        """Test writing JSON into a new directory."""
        path = os.path.join(str(tmp_path), "nested", "out.json")

        save_json(path, {"value": 0.1})

        assert load_json(path) == {"value": 0.1}

    def test_load_json_malformed(self, tmp_path):
        """Test that malformed JSON raises FileFormatError."""
        path = os.path.join(str(tmp_path), "bad.json")
        write_text_file(path, "{not json")

        with pytest.raises(FileFormatError):
            load_json(path)

    def test_load_yaml(self, tmp_path, sample_config_yaml):
        """Test loading a YAML configuration."""
        path = os.path.join(str(tmp_path), "run.yaml")
        write_text_file(path, sample_config_yaml)

        data = load_yaml(path)

        assert data["seed"] == 11
        assert data["analyzers"] == ["norm1", "kernel-axioms"]

    def test_load_yaml_malformed(self, tmp_path):
        """Test that malformed YAML raises FileFormatError."""
        path = os.path.join(str(tmp_path), "bad.yaml")
        write_text_file(path, "a: [1, 2\n")

        with pytest.raises(FileFormatError):
            load_yaml(path)

    def test_ensure_directory(self, tmp_path):
        """Test creating nested directories."""
        path = os.path.join(str(tmp_path), "x", "y")

        assert ensure_directory(path) == path
        assert os.path.isdir(path)
