#!/usr/bin/env python3
"""
Test script for the actsteer logger
Tests the centralized logging system
"""

import logging

from actsteer.cli import main
from actsteer.logger import (add_file_handler, configure_from_config, get_cli_logger, get_core_logger,
                             get_logger, get_logger_stats, get_metrics_logger, get_pipeline_logger,
                             get_transport_logger, set_global_log_level)


def test_basic_logging():
    """Loggers live under the actsteer namespace."""
    transport_logger = get_logger("transport")
    assert transport_logger.name == "actsteer.transport"
    assert get_logger("evaluation").name == "actsteer.evaluation"


def test_convenience_loggers():
    """Test convenience logger functions."""
    names = [get_core_logger().name, get_transport_logger().name, get_pipeline_logger().name,
             get_metrics_logger().name, get_cli_logger().name]
    assert names == ["actsteer.core", "actsteer.transport", "actsteer.pipeline",
                     "actsteer.metrics", "actsteer.cli"]


def test_singleton_behavior():
    """Test that loggers follow singleton pattern."""
    assert get_logger("test") is get_logger("test")
    assert get_transport_logger() is get_transport_logger()


def test_log_level_changes():
    """Test changing log levels."""
    logger = get_logger("level_test")
    try:
        set_global_log_level("DEBUG")
        assert logger.isEnabledFor(logging.DEBUG)
        assert logging.getLogger("actsteer").level == logging.DEBUG
        set_global_log_level("WARNING")
        assert not logger.isEnabledFor(logging.INFO)
    finally:
        set_global_log_level("INFO")


def test_file_handler(tmp_path):
    """Messages reach a file handler added under a new directory."""
    log_path = tmp_path / "runs" / "actsteer.log"
    root = logging.getLogger("actsteer")
    before = list(root.handlers)
    try:
        add_file_handler(str(log_path), "DEBUG")
        get_logger("file_test").info("Fitted 8 maps for layer 3")
        for handler in root.handlers:
            handler.flush()
        text = log_path.read_text()
        assert "[INFO] [actsteer.file_test] - Fitted 8 maps for layer 3" in text
    finally:
        for handler in root.handlers[len(before):]:
            handler.close()
        root.handlers[:] = before


def test_config_integration(tmp_path):
    """Test logger configuration from a config dictionary."""
    root = logging.getLogger("actsteer")
    before = list(root.handlers)
    try:
        configure_from_config({'logging': {'level': 'ERROR', 'file': str(tmp_path / "a.log")}})
        assert root.level == logging.ERROR
        assert len(root.handlers) == len(before) + 1
        configure_from_config({})
        assert root.level == logging.ERROR
    finally:
        for handler in root.handlers[len(before):]:
            handler.close()
        root.handlers[:] = before
        set_global_log_level("INFO")


def test_logger_stats():
    """Test logger statistics."""
    get_logger("stats_test1")
    get_logger("stats_test2")

    stats = get_logger_stats()
    assert stats['configured_loggers_count'] >= 2
    assert {"stats_test1", "stats_test2"} <= set(stats['logger_names'])
    assert stats['root_handler_configured'] is True
    assert stats['root_logger_handlers_count'] >= 1
    assert len(stats['handler_targets']) == stats['root_logger_handlers_count']


def test_file_handler_added_once_per_path(tmp_path):
    """Configuring the same log file twice keeps one handler for it."""
    root = logging.getLogger("actsteer")
    before = list(root.handlers)
    log_path = tmp_path / "twice.log"
    try:
        add_file_handler(str(log_path))
        add_file_handler(str(log_path), "DEBUG")
        assert len(root.handlers) == len(before) + 1
        assert root.handlers[-1].level == logging.DEBUG
        assert get_logger_stats()['handler_targets'][-1] == str(log_path)
    finally:
        for handler in root.handlers[len(before):]:
            handler.close()
        root.handlers[:] = before


def test_cli_reports_logging_setup_at_debug(tmp_path, monkeypatch):
    """A DEBUG run records where logging goes; a second run adds no handler."""
    monkeypatch.chdir(tmp_path)
    log_path = tmp_path / "logs" / "run.log"
    config = tmp_path / "debug.yaml"
    config.write_text(f"logging:\n  level: DEBUG\n  file: {log_path}\n  file_level: DEBUG\n")
    root = logging.getLogger("actsteer")
    before = list(root.handlers)
    try:
        assert main(["--config", str(config), "demo", "--name", "identity-2-layer", "--out", "a"]) == 0
        assert main(["--config", str(config), "demo", "--name", "identity-2-layer", "--out", "b"]) == 0
        assert len(root.handlers) == len(before) + 1
        for handler in root.handlers:
            handler.flush()
        summary = [line for line in log_path.read_text().splitlines() if "[actsteer.cli] - Logging at DEBUG to" in line]
        assert len(summary) == 2
        assert str(log_path) in summary[0] and "cli" in summary[0]
    finally:
        for handler in root.handlers[len(before):]:
            handler.close()
        root.handlers[:] = before
        set_global_log_level("INFO")
