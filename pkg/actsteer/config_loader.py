#!/usr/bin/env python3
"""
Config Loader Module for actsteer
Handles loading, merging and atomically saving configuration files (YAML, JSON)
"""

import yaml
import json
import os
import tempfile
from typing import Dict, Any

from .logger import get_logger

logger = get_logger("config")


def load_config(config_path: str) -> Dict[str, Any]:
    """
    Load configuration from a YAML or JSON file.
    
    Args:
        config_path: Path to the configuration file (.yaml, .yml, or .json)
        
    Returns:
        Dictionary containing the parsed configuration
        
    Raises:
        FileNotFoundError: If the config file doesn't exist
        ValueError: If the file format is not supported or invalid
    """
    if not os.path.exists(config_path):
        raise FileNotFoundError(f"Configuration file not found: {config_path}")
    
    _, ext = os.path.splitext(config_path.lower())
    if ext not in ('.yaml', '.yml', '.json'):
        raise ValueError(f"Unsupported config file format: {ext}. Supported: .yaml, .yml, .json")
    
    try:
        with open(config_path, 'r', encoding='utf-8') as file:
            if ext == '.json':
                config = json.load(file)
            else:
                config = yaml.safe_load(file)
    except yaml.YAMLError as e:
        raise ValueError(f"Invalid YAML format in {config_path}: {e}")
    except json.JSONDecodeError as e:
        raise ValueError(f"Invalid JSON format in {config_path}: {e}")
    
    if not isinstance(config, dict):
        raise ValueError(f"Config file must contain a dictionary/object, got: {type(config)}")
    
    logger.debug(f"Loaded config from: {config_path}")
    return config


def _merge(defaults: Dict[str, Any], overrides: Dict[str, Any]) -> Dict[str, Any]:
    merged = dict(defaults)
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def load_config_with_defaults(config_path: str, defaults: Dict[str, Any]) -> Dict[str, Any]:
    """
    Load configuration with default values fallback.
    
    Sections are merged key by key, so a file that only sets
    ``estimation.method`` keeps every other default of that section.
    
    Args:
        config_path: Path to the configuration file
        defaults: Default configuration values
        
    Returns:
        Merged configuration (file values override defaults)
    """
    try:
        config = load_config(config_path)
    except FileNotFoundError:
        logger.warning(f"Config file not found: {config_path}, using defaults only")
        return _merge({}, defaults)
    return _merge(defaults, config)


def atomic_write_text(path: str, text: str) -> None:
    """
    Write ``text`` to ``path`` through a temporary file in the same directory
    followed by a rename, so readers never observe a partial file.
    """
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp_path = tempfile.mkstemp(dir=directory, prefix='.tmp-', suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, 'w', encoding='utf-8', newline='') as handle:
            handle.write(text)
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.unlink(tmp_path)
        raise


def save_config(config: Dict[str, Any], config_path: str, format_type: str = 'yaml') -> None:
    """
    Save configuration to a file.
    
    Args:
        config: Configuration dictionary to save
        config_path: Path where to save the configuration
        format_type: Output format ('yaml' or 'json')
    """
    if format_type.lower() == 'yaml':
        text = yaml.safe_dump(config, default_flow_style=False, indent=2, sort_keys=False)
    elif format_type.lower() == 'json':
        text = json.dumps(config, indent=2, ensure_ascii=False) + "\n"
    else:
        raise ValueError(f"Unsupported format: {format_type}. Use 'yaml' or 'json'")
    
    atomic_write_text(config_path, text)
    logger.info(f"Configuration saved to: {config_path}")
