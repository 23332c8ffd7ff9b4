#!/usr/bin/env python3
"""
Logging utilities for actsteer
Provides standardized logging across the estimation, application and CLI layers
"""

import logging
import sys
import os
from typing import Dict, Any

# Global registry to track configured loggers (singleton pattern)
_configured_loggers: Dict[str, logging.Logger] = {}
_root_handler_configured = False

ROOT_LOGGER_NAME = "actsteer"
LOG_FORMAT = '[%(asctime)s] [%(levelname)s] [%(name)s] - %(message)s'
DATE_FORMAT = '%Y-%m-%d %H:%M:%S'


def get_logger(name: str, level: str = "INFO") -> logging.Logger:
    """
    Get a standardized logger instance with consistent formatting.
    
    Uses singleton pattern to ensure loggers are not reconfigured multiple times.
    
    Args:
        name: Logger name (e.g., "transport", "pipeline", "cli")
        level: Log level ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")
        
    Returns:
        Configured logger instance
        
    Example:
        >>> logger = get_logger("transport")
        >>> logger.info("Fitted 8 maps for layer 3")
        [2026-10-17 10:30:45] [INFO] [actsteer.transport] - Fitted 8 maps for layer 3
    """
    global _root_handler_configured
    
    if name in _configured_loggers:
        return _configured_loggers[name]
    
    logger = logging.getLogger(f"{ROOT_LOGGER_NAME}.{name}")
    logger.setLevel(getattr(logging, level.upper(), logging.INFO))
    
    if not _root_handler_configured:
        _configure_root_handler()
        _root_handler_configured = True
    
    _configured_loggers[name] = logger
    return logger


def _configure_root_handler():
    """Configure the root actsteer handler with standard formatting."""
    root_logger = logging.getLogger(ROOT_LOGGER_NAME)
    
    # Remove any existing handlers to avoid duplicates
    root_logger.handlers.clear()
    
    # stderr, so command output on stdout stays parseable
    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(logging.DEBUG)
    console_handler.setFormatter(logging.Formatter(LOG_FORMAT, datefmt=DATE_FORMAT))
    
    root_logger.addHandler(console_handler)
    root_logger.setLevel(logging.INFO)
    root_logger.propagate = False


def set_global_log_level(level: str) -> None:
    """
    Set the log level for all actsteer loggers.
    
    Args:
        level: Log level ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")
    """
    log_level = getattr(logging, level.upper(), logging.INFO)
    
    logging.getLogger(ROOT_LOGGER_NAME).setLevel(log_level)
    for logger in _configured_loggers.values():
        logger.setLevel(log_level)


def add_file_handler(log_file_path: str, level: str = "INFO") -> None:
    """
    Add file logging to all actsteer loggers.

    A path that already has a handler is not added twice, so repeated
    command runs in one process write each record once.

    Args:
        log_file_path: Path to log file
        level: Log level for file handler
    """
    root_logger = logging.getLogger(ROOT_LOGGER_NAME)
    target = os.path.abspath(log_file_path)
    for handler in root_logger.handlers:
        if isinstance(handler, logging.FileHandler) and handler.baseFilename == target:
            handler.setLevel(getattr(logging, level.upper(), logging.INFO))
            return

    log_dir = os.path.dirname(target)
    if log_dir and not os.path.exists(log_dir):
        os.makedirs(log_dir, exist_ok=True)

    file_handler = logging.FileHandler(target)
    file_handler.setLevel(getattr(logging, level.upper(), logging.INFO))
    file_handler.setFormatter(logging.Formatter(LOG_FORMAT, datefmt=DATE_FORMAT))
    root_logger.addHandler(file_handler)


def configure_from_config(config: dict) -> None:
    """
    Configure logging from a configuration dictionary.
    
    Args:
        config: Configuration dictionary with logging settings
        
    Example config:
        {
            "logging": {
                "level": "INFO",
                "file": "runs/actsteer.log",
                "file_level": "DEBUG"
            }
        }
    """
    logging_config = config.get('logging') or {}
    
    if 'level' in logging_config:
        set_global_log_level(logging_config['level'])
    
    if logging_config.get('file'):
        add_file_handler(logging_config['file'], logging_config.get('file_level', 'INFO'))


def _handler_target(handler: logging.Handler) -> str:
    if isinstance(handler, logging.FileHandler):
        return handler.baseFilename
    stream = getattr(handler, 'stream', None)
    return getattr(stream, 'name', type(handler).__name__)


def get_logger_stats() -> Dict[str, Any]:
    """
    Get statistics about configured loggers.

    Returns:
        Dictionary with logger statistics; ``handler_targets`` lists where
        records go (``<stderr>`` or a log file path)
    """
    root_logger = logging.getLogger(ROOT_LOGGER_NAME)
    return {
        'configured_loggers_count': len(_configured_loggers),
        'logger_names': sorted(_configured_loggers),
        'root_handler_configured': _root_handler_configured,
        'root_logger_level': logging.getLevelName(root_logger.level),
        'root_logger_handlers_count': len(root_logger.handlers),
        'handler_targets': [_handler_target(handler) for handler in root_logger.handlers],
    }


# Convenience loggers for the subsystems
def get_core_logger() -> logging.Logger:
    """Get logger for activation collection and file formats."""
    return get_logger("core")


def get_transport_logger() -> logging.Logger:
    """Get logger for transport map estimation."""
    return get_logger("transport")


def get_pipeline_logger() -> logging.Logger:
    """Get logger for whole-model estimation and intervention."""
    return get_logger("pipeline")


def get_metrics_logger() -> logging.Logger:
    """Get logger for evaluation."""
    return get_logger("metrics")


def get_cli_logger() -> logging.Logger:
    """Get logger for the command-line surface."""
    return get_logger("cli")
