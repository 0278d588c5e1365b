"""
Tests for the human-readable verification run log.
"""

import os
import sys

import pytest

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from src.utils import run_logger
from src.utils.run_logger import VerificationLogger, get_run_logger, initialize_logging


class TestVerificationLogger:

    def test_creates_log_with_header(self, tmp_path):
        log = VerificationLogger(str(tmp_path))
        text = log.main_log_file.read_text(encoding="utf-8")
        assert "Schwinger Representation Verification Log" in text
        assert log.run_id in text
        assert (tmp_path / "archive").is_dir()

    def test_archives_previous_logs(self, tmp_path):
        (tmp_path / "verify_old.log").write_text("old run\n", encoding="utf-8")
        log = VerificationLogger(str(tmp_path))
        assert (tmp_path / "archive" / "verify_old.log").exists()
        assert [path.name for path in tmp_path.glob("*.log")] == [log.main_log_file.name]

    def test_archive_name_clash(self, tmp_path):
        (tmp_path / "archive").mkdir()
        (tmp_path / "archive" / "verify_old.log").write_text("older\n", encoding="utf-8")
        (tmp_path / "verify_old.log").write_text("old\n", encoding="utf-8")
        VerificationLogger(str(tmp_path))
        assert len(list((tmp_path / "archive").glob("verify_old*.log"))) == 2

    def test_entries(self, tmp_path):
        log = VerificationLogger(str(tmp_path))
        log.start_suite("sun", 42, 2, 1)
        log.log_check("sun.singlet_unique", 0.0, 0.0, True, 0.01)
        log.log_check("sun.conjugation_mirror", 2.0, 0.0, False, 0.02, detail="failing: [(1, 0)]")
        log.log_check_error("sun.branching_obstruction", "boom", "RuntimeError")
        log.complete_suite("sun", 1, 2, 0.5)
        text = log.main_log_file.read_text(encoding="utf-8")
        assert "[SUITE_START] - Running suite 'sun'" in text
        assert "Status: PASS" in text and "Status: FAIL" in text
        assert "Detail: failing: [(1, 0)]" in text
        assert "Error Type: RuntimeError" in text
        assert "Final Status: FAILED" in text
        assert log.check_counter == 2


class TestGlobalInstance:

    def test_uninitialized(self, monkeypatch):
        monkeypatch.setattr(run_logger, "_logger_instance", None)
        with pytest.raises(RuntimeError):
            get_run_logger()

    def test_initialize(self, monkeypatch, tmp_path):
        monkeypatch.setattr(run_logger, "_logger_instance", None)
        log = initialize_logging(str(tmp_path))
        assert get_run_logger() is log
