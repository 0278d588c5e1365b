"""
Tests for the numerically derived midpoint density.

The Jacobian is computed without any closed form, so the known profile
sin^2(theta/2) / (4 pi^2 theta^2) serves as an independent oracle here.
"""

import importlib.util
import json
import math
import os
import sys

import pytest

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from src.core.group_core import TWO_PI
from src.phase_space.midpoint_density import (
    density_at,
    local_haar_constant,
    radial_density_spline,
    radial_normalization,
    tabulate_density,
)


def expected_density(theta: float) -> float:
    if theta == 0.0:
        return 1.0 / (16.0 * math.pi ** 2)
    return math.sin(0.5 * theta) ** 2 / (4.0 * math.pi ** 2 * theta ** 2)


class TestMidpointDensity:

    @pytest.fixture(scope="class")
    def haar_constant(self):
        return local_haar_constant()

    def test_haar_constant_at_identity(self, haar_constant):
        assert abs(haar_constant - 1.0 / (16.0 * math.pi ** 2)) < 1e-9

    @pytest.mark.parametrize("theta", [0.0, 0.5, 1.7, 3.1, 4.4, 6.0])
    def test_matches_known_profile(self, haar_constant, theta):
        value = density_at(theta, haar_constant)
        expected = expected_density(theta)
        assert abs(value - expected) <= 1e-6 * expected, f"rho({theta}) = {value}, expected {expected}"

    def test_table_shape(self):
        table = tabulate_density(1.0, points=5)
        assert len(table["theta"]) == 5
        assert table["theta"][0] == 0.0
        assert table["radial"][0] == 0.0
        assert len(table["haar_constant"]) == 1

    def test_spline_follows_table(self):
        theta_max = TWO_PI - 1e-3
        spline = radial_density_spline(theta_max)
        for theta in (0.3, 2.0, 5.5):
            expected = theta ** 2 * expected_density(theta)
            assert abs(float(spline(theta)) - expected) < 1e-7

    def test_normalization(self):
        assert abs(radial_normalization(TWO_PI - 1e-3) - 1.0) < 1e-6

    def test_tabulator_script_writes_table(self, tmp_path):
        script = os.path.join(os.path.dirname(__file__), '..', 'scripts', 'tabulate_midpoint_density.py')
        spec = importlib.util.spec_from_file_location("tabulate_midpoint_density", script)
        module = importlib.util.module_from_spec(spec)
        spec.loader.exec_module(module)

        output = tmp_path / "midpoint_density.json"
        document = module.MidpointDensityTabulator(1e-3, points=9, output_path=output).run()
        saved = json.loads(output.read_text(encoding="utf-8"))
        assert saved["points"] == 9
        assert len(saved["theta"]) == 9
        assert saved["theta_max"] == document["theta_max"]
