"""Tests for logging setup.

Tests cover:
- JSON lines on standard error with ``extra`` fields at the top level
- Numpy values and non-finite floats in ``extra`` stay valid JSON
- Child loggers under the base logger
"""

import json
import logging

import numpy as np
import pytest

from src.config import LogFormat
from src.logging_config import BASE_LOGGER, get_logger, setup_logging


class TestLogging:
    """Tests for setup_logging and get_logger."""

    def test_json_lines_carry_extra_fields(self, capsys):
        setup_logging(log_level="INFO", log_format=LogFormat.JSON)
        get_logger("tests.fit").info("EM finished", extra={"iterations": 7, "loglik": -12.5})

        captured = capsys.readouterr()
        assert captured.out == ""
        record = json.loads(captured.err.strip().splitlines()[-1])
        assert record["message"] == "EM finished"
        assert record["level"] == "INFO"
        assert record["logger"] == f"{BASE_LOGGER}.tests.fit"
        assert record["iterations"] == 7
        assert record["loglik"] == -12.5

    def test_level_filters_records(self, capsys):
        setup_logging(log_level="WARNING", log_format=LogFormat.JSON)
        get_logger("tests.quiet").info("hidden")
        assert capsys.readouterr().err == ""

    def test_repeated_setup_keeps_one_handler(self):
        setup_logging(log_format=LogFormat.JSON)
        logger = setup_logging(log_format=LogFormat.JSON)
        assert len(logger.handlers) == 1
        assert logger is logging.getLogger(BASE_LOGGER)

    def test_get_logger_without_name(self):
        assert get_logger() is logging.getLogger(BASE_LOGGER)

    def test_numpy_and_infinite_extras(self, capsys):
        setup_logging(log_level="INFO", log_format=LogFormat.JSON)
        get_logger("tests.em").warning(
            "Unsupported tree",
            extra={
                "loglik": float("-inf"),
                "weight": np.float64(2.0),
                "trees": np.int64(3),
                "joints": np.array([0.25, 0.75]),
            },
        )

        line = capsys.readouterr().err.strip().splitlines()[-1]
        record = json.loads(line, parse_constant=lambda name: pytest.fail(f"bare {name}"))
        assert record["loglik"] == "-inf"
        assert record["weight"] == 2.0
        assert record["trees"] == 3
        assert record["joints"] == [0.25, 0.75]

    def test_package_prefix_dropped(self):
        assert get_logger("src.estimators.em").name == f"{BASE_LOGGER}.estimators.em"
