"""
Human-readable verification run logger.
Creates one log file per run with a header, one entry per check and a summary.
"""

import logging
import shutil
from datetime import datetime
from pathlib import Path
from typing import Optional

logger = logging.getLogger(__name__)


class VerificationLogger:
    """Human-readable logger for verification runs"""

    def __init__(self, logs_dir: str = "logs"):
        self.logs_dir = Path(logs_dir)
        self.logs_dir.mkdir(parents=True, exist_ok=True)

        self.archive_dir = self.logs_dir / "archive"
        self.archive_dir.mkdir(exist_ok=True)

        # Archive existing log files before starting a new run
        self._archive_existing_logs()

        self.run_timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")
        self.run_id = f"run_{self.run_timestamp}"
        self.main_log_file = self.logs_dir / f"verify_{self.run_timestamp}.log"

        self._initialize_log_file()
        self.check_counter = 0

    def _archive_existing_logs(self):
        """Move any existing log files to the archive folder"""
        try:
            log_files = list(self.logs_dir.glob("*.log"))
            for log_file in log_files:
                archive_path = self.archive_dir / log_file.name
                # If the archive file already exists, add a timestamp to avoid conflicts
                if archive_path.exists():
                    timestamp = datetime.now().strftime("%H%M%S_%f")
                    archive_path = self.archive_dir / f"{log_file.stem}_archived_{timestamp}{log_file.suffix}"
                shutil.move(str(log_file), str(archive_path))
            if log_files:
                logger.info(f"Archived {len(log_files)} log file{'s' if len(log_files) > 1 else ''} to {self.archive_dir}")
        except OSError as e:
            # archiving problems never stop a run
            logger.warning(f"Could not archive existing logs: {e}")

    def _initialize_log_file(self):
        header = f"""
Schwinger Representation Verification Log
Run Started: {datetime.now().strftime('%Y-%m-%d %H:%M:%S')}
Run ID: {self.run_id}
{'='*80}

"""
        with open(self.main_log_file, 'w', encoding='utf-8') as f:
            f.write(header)

    def _write(self, content: str):
        with open(self.main_log_file, 'a', encoding='utf-8') as f:
            f.write(content + '\n')

    def _format_timestamp(self) -> str:
        return datetime.now().strftime("%Y-%m-%d %H:%M:%S.%f")[:-3]

    def start_suite(self, suite: str, seed: int, check_count: int, workers: int):
        self._write(f"""
{'='*80}
{self._format_timestamp()} [INFO] [SUITE_START] - Running suite '{suite}'
    ↳ Seed: {seed}
    ↳ Checks: {check_count}
    ↳ Workers: {workers}
{'='*80}
""")

    def log_check(self, check_id: str, residual: float, tolerance: float, passed: bool,
                  runtime_s: float, detail: Optional[str] = None):
        self.check_counter += 1
        level = "INFO" if passed else "ERROR"
        status = "PASS" if passed else "FAIL"
        entry = f"""
{self._format_timestamp()} [{level}] [CHECK] - {check_id}
    ↳ Status: {status}
    ↳ Residual: {residual:.6e}
    ↳ Tolerance: {tolerance:.3e}
    ↳ Runtime: {runtime_s:.3f}s"""
        if detail:
            entry += f"\n    ↳ Detail: {detail}"
        self._write(entry)

    def log_check_error(self, check_id: str, error_message: str, error_type: str):
        self._write(f"""
{self._format_timestamp()} [ERROR] [CHECK] - {check_id} raised
    ↳ Error Type: {error_type}
    ↳ Error Message: {error_message}
""")

    def complete_suite(self, suite: str, passed: int, failed: int, total_time_s: float):
        total = passed + failed
        self._write(f"""
{self._format_timestamp()} [INFO] [SUITE_COMPLETE] - Suite '{suite}' finished
    ↳ Final Status: {'SUCCESS' if failed == 0 else 'FAILED'}
    ↳ Passed: {passed}/{total}
    ↳ Failed: {failed}
    ↳ Total Time: {total_time_s:.3f}s

{'='*80}
""")


# Global logger instance
_logger_instance = None


def get_run_logger() -> VerificationLogger:
    """Get the global run logger instance (must be initialized first)"""
    if _logger_instance is None:
        raise RuntimeError("VerificationLogger not initialized. Call initialize_logging() first.")
    return _logger_instance


def initialize_logging(logs_dir: str = "logs") -> VerificationLogger:
    """Initialize the run logger with the specified directory"""
    global _logger_instance
    _logger_instance = VerificationLogger(logs_dir)
    return _logger_instance
