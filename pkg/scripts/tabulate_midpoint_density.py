#!/usr/bin/env python3
"""
Tabulate the Midpoint Density

Derives the Haar density rho(theta) in exponential coordinates from the
Jacobian of the (s, s') -> (g'', g') chart and writes the table to
config/midpoint_density.json for inspection. The library rebuilds the same
table on demand, so the file is a record, not an input.
"""

import math
import os
import sys
import logging
from pathlib import Path

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from src.phase_space.midpoint_density import TABLE_POINTS, radial_normalization, tabulate_density
from src.utils.serialization import dumps
from src.utils.settings import PROJECT_ROOT, load_settings

# Setup logging
logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger(__name__)


class MidpointDensityTabulator:
    """Computes the rho(theta) table and saves it as JSON."""

    def __init__(self, antipode_eps: float, points: int = TABLE_POINTS,
                 output_path: Path = PROJECT_ROOT / "config" / "midpoint_density.json"):
        self.theta_max = 2.0 * math.pi - antipode_eps
        self.points = points
        self.output_path = output_path

    def run(self) -> dict:
        logger.info(f"Tabulating rho(theta) on {self.points} points up to theta={self.theta_max:.6f}...")
        table = tabulate_density(self.theta_max, self.points)
        normalization = radial_normalization(self.theta_max, self.points)
        logger.info(f"Radial normalization 4pi int theta^2 rho = {normalization:.12f}")

        document = {
            "theta_max": self.theta_max,
            "points": self.points,
            "normalization": normalization,
            **table,
        }
        self.output_path.parent.mkdir(parents=True, exist_ok=True)
        self.output_path.write_text(dumps(document), encoding="utf-8")
        logger.info(f"Table saved to: {self.output_path}")

        print("\n" + "=" * 60)
        print("MIDPOINT DENSITY SUMMARY")
        print("=" * 60)
        print(f"✓ Points: {self.points}")
        print(f"✓ theta_max: {self.theta_max:.6f}")
        print(f"✓ rho(0): {table['rho'][0]:.12e}")
        print(f"✓ Normalization: {normalization:.12f}")
        print(f"✓ Output: {self.output_path}")
        print("=" * 60 + "\n")
        return document


if __name__ == "__main__":
    try:
        settings = load_settings()
        MidpointDensityTabulator(settings.antipode_eps).run()
        sys.exit(0)
    except Exception as e:
        print(f"\n✗ ERROR: Tabulation failed: {e}")
        import traceback
        traceback.print_exc()
        sys.exit(1)
