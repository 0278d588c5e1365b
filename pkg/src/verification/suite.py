"""
Verification suite runner.

Selects the checks of a suite, runs them (optionally on a thread pool), compares
each residual with its configured tolerance and collects a deterministic report.
Runtimes go to the human-readable run log; the JSON report carries them only on
request so that two runs with the same seed produce identical output.
"""

import logging
import math
import time
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Dict, List, Optional

import numpy as np

from src.utils.settings import Settings, load_tolerances
from src.utils.run_logger import VerificationLogger
from src.verification.checks import CHECKS, SUITES, CheckContext, suite_of

logger = logging.getLogger(__name__)

ALL_SUITE = "all"


@dataclass(frozen=True)
class CheckResult:
    check_id: str
    residual: float
    tolerance: float
    passed: bool
    runtime_s: float
    detail: Optional[str] = None
    error: Optional[str] = None

    def to_dict(self, include_timings: bool = False) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "id": self.check_id,
            # inf is not valid JSON; failures by exception are reported as null
            "residual": self.residual if math.isfinite(self.residual) else None,
            "tolerance": self.tolerance,
            "pass": self.passed,
        }
        if self.detail:
            data["detail"] = self.detail
        if self.error:
            data["error"] = self.error
        if include_timings:
            data["runtime_s"] = round(self.runtime_s, 6)
        return data


@dataclass(frozen=True)
class VerificationReport:
    suite: str
    seed: int
    results: List[CheckResult]

    @property
    def passed(self) -> bool:
        return all(result.passed for result in self.results)

    @property
    def failed_checks(self) -> List[str]:
        return [result.check_id for result in self.results if not result.passed]

    def to_dict(self, include_timings: bool = False) -> Dict[str, Any]:
        return {
            "suite": self.suite,
            "seed": self.seed,
            "passed": self.passed,
            "checks": [result.to_dict(include_timings) for result in self.results],
        }


def check_ids_for(suite: str) -> List[str]:
    """Check ids of a suite in registration order.

    Raises:
        ValueError: For an unknown suite name
    """
    if suite == ALL_SUITE:
        return list(CHECKS)
    if suite not in SUITES:
        raise ValueError(f"Unknown suite '{suite}', expected one of: {', '.join((ALL_SUITE,) + SUITES)}")
    return [check_id for check_id in CHECKS if suite_of(check_id) == suite]


def check_rng(seed: int, check_id: str) -> np.random.Generator:
    """Per-check generator, independent of which other checks run and in what order."""
    return np.random.default_rng([seed, zlib.crc32(check_id.encode("utf-8"))])


def run_check(check_id: str, settings: Settings, tolerance: float) -> CheckResult:
    """Run one check; an exception becomes a failed result with an infinite residual."""
    context = CheckContext(settings=settings, rng=check_rng(settings.seed, check_id))
    start_time = time.time()
    try:
        outcome = CHECKS[check_id](context)
        runtime = time.time() - start_time
        residual = float(outcome.residual)
        passed = math.isfinite(residual) and residual <= tolerance
        if not passed:
            logger.warning(f"Check {check_id} failed: residual {residual:.3e} > tolerance {tolerance:.3e}")
        return CheckResult(check_id, residual, tolerance, passed, runtime, outcome.detail)
    except Exception as e:
        runtime = time.time() - start_time
        logger.error(f"Check {check_id} raised {type(e).__name__}: {e}")
        return CheckResult(check_id, math.inf, tolerance, False, runtime,
                           error=f"{type(e).__name__}: {e}")


class VerificationSuite:
    """
    Runs a named suite against the tolerance table.

    Example:
        >>> suite = VerificationSuite(load_settings())
        >>> report = suite.run("wigner")
        >>> report.passed
    """

    def __init__(self, settings: Settings, run_logger: Optional[VerificationLogger] = None):
        self.settings = settings
        self.run_logger = run_logger
        self.tolerances = load_tolerances(settings.tolerances_file)
        missing = [check_id for check_id in CHECKS if check_id not in self.tolerances]
        if missing:
            raise ValueError(f"No tolerance configured for: {', '.join(missing)}")

    def tolerance(self, check_id: str) -> float:
        return float(self.tolerances[check_id]["tolerance"])

    def run(self, suite: str) -> VerificationReport:
        check_ids = check_ids_for(suite)
        workers = max(1, self.settings.workers)
        logger.info(f"Running suite '{suite}': {len(check_ids)} checks, seed {self.settings.seed}, {workers} workers")
        if self.run_logger:
            self.run_logger.start_suite(suite, self.settings.seed, len(check_ids), workers)

        start_time = time.time()
        if workers > 1 and len(check_ids) > 1:
            with ThreadPoolExecutor(max_workers=workers) as executor:
                futures = [
                    executor.submit(run_check, check_id, self.settings, self.tolerance(check_id))
                    for check_id in check_ids
                ]
                # collected in submission order so the report is deterministic
                results = [future.result() for future in futures]
        else:
            results = [run_check(check_id, self.settings, self.tolerance(check_id)) for check_id in check_ids]
        total_time = time.time() - start_time

        if self.run_logger:
            for result in results:
                if result.error:
                    error_type, _, message = result.error.partition(": ")
                    self.run_logger.log_check_error(result.check_id, message, error_type)
                else:
                    self.run_logger.log_check(result.check_id, result.residual, result.tolerance,
                                              result.passed, result.runtime_s, result.detail)

        report = VerificationReport(suite, self.settings.seed, results)
        passed = sum(1 for result in results if result.passed)
        if self.run_logger:
            self.run_logger.complete_suite(suite, passed, len(results) - passed, total_time)
        logger.info(f"Suite '{suite}' finished: {passed}/{len(results)} passed in {total_time:.2f}s")
        return report


def run_suite(suite: str, settings: Settings,
              run_logger: Optional[VerificationLogger] = None) -> VerificationReport:
    return VerificationSuite(settings, run_logger).run(suite)
