"""
Tests for logging setup and the Prometheus counters.
"""

import json
import logging

import pytest
from prometheus_client import REGISTRY

from cqd.ensemble import flip_probability_mc, isotropic
from cqd.logging_config import setup_logging
from cqd.metrics import metrics_collector, track_duration, write_metrics


def sample_value(name, **labels):
    return REGISTRY.get_sample_value(name, labels) or 0.0


class TestLogging:
    """structlog over stdlib logging."""

    @pytest.fixture(autouse=True)
    def restore_root_logger(self):
        """Put the root logger back the way the test found it."""
        root = logging.getLogger()
        handlers, level = list(root.handlers), root.level
        yield
        for handler in root.handlers:
            if handler not in handlers:
                handler.close()
        root.handlers = handlers
        root.setLevel(level)

    def test_file_handler_writes_json(self, tmp_path):
        log_file = tmp_path / "run.log"
        setup_logging("WARNING", str(log_file))
        logging.getLogger("cqd.test").debug("detail line")
        for handler in logging.getLogger().handlers:
            handler.flush()
        record = json.loads(log_file.read_text().splitlines()[-1])
        assert record["message"] == "detail line"
        assert record["levelname"] == "DEBUG"

    def test_file_handler_captures_debug(self, tmp_path):
        setup_logging("ERROR", str(tmp_path / "run.log"))
        root = logging.getLogger()
        assert root.level == logging.DEBUG
        file_handlers = [h for h in root.handlers if isinstance(h, logging.FileHandler)]
        assert file_handlers and file_handlers[-1].level == logging.DEBUG


class TestMetrics:
    """Counters updated by the numerical routines."""

    def test_check_counter(self):
        before = sample_value("cqd_checks_total", check="sample_check", result="passed")
        metrics_collector.record_check("sample_check", True, 0.01)
        assert sample_value("cqd_checks_total", check="sample_check", result="passed") == before + 1

    def test_mc_samples_counted(self):
        experiment = "flip_probability:isotropic"
        before = sample_value("cqd_mc_samples_total", experiment=experiment)
        flip_probability_mc(1.0, isotropic(), 5000, seed=1)
        assert sample_value("cqd_mc_samples_total", experiment=experiment) == before + 5000

    def test_track_duration_records_failures(self):
        @track_duration("broken_kind")
        def broken():
            raise ValueError("bad")

        before = sample_value("cqd_integrations_total", kind="broken_kind", status="failed")
        with pytest.raises(ValueError):
            broken()
        assert sample_value("cqd_integrations_total", kind="broken_kind", status="failed") == before + 1

    def test_write_metrics(self, tmp_path):
        metrics_collector.record_fit(True)
        path = tmp_path / "cqd.prom"
        write_metrics(str(path))
        text = path.read_text()
        assert "cqd_fits_total" in text
        assert 'status="converged"' in text
