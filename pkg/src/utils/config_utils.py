"""
Configuration loading and logging setup
"""
import os
import copy
import logging
from typing import Dict, Optional

import yaml
from dotenv import load_dotenv

logger = logging.getLogger(__name__)

DEFAULT_CONFIG_PATH = os.path.join(
    os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__)))),
    'config.yaml'
)

CONFIG_ENV_VAR = 'RADIAL_EP_CONFIG'
LOG_LEVEL_ENV_VAR = 'RADIAL_EP_LOG_LEVEL'


def deep_merge(base: Dict, override: Dict) -> Dict:
    """Recursively merge ``override`` into a copy of ``base``"""
    merged = copy.deepcopy(base)
    for key, value in (override or {}).items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = deep_merge(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def read_yaml(path: str) -> Dict:
    """Read a YAML mapping from disk; an empty file yields an empty dict"""
    with open(path, 'r') as f:
        data = yaml.safe_load(f)
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ValueError(f"Configuration file {path} must contain a mapping")
    return data


def load_config(path: Optional[str] = None) -> Dict:
    """
    Load the bundled defaults and merge a user configuration over them

    Args:
        path: Optional user configuration file. Falls back to the
            RADIAL_EP_CONFIG environment variable (``.env`` honoured).

    Returns:
        Merged configuration dictionary
    """
    load_dotenv()
    config = read_yaml(DEFAULT_CONFIG_PATH) if os.path.exists(DEFAULT_CONFIG_PATH) else {}

    user_path = path or os.getenv(CONFIG_ENV_VAR)
    if user_path:
        if not os.path.exists(user_path):
            raise FileNotFoundError(f"Configuration file not found: {user_path}")
        config = deep_merge(config, read_yaml(user_path))
        logger.debug(f"Merged configuration from {user_path}")

    return config


def setup_logging(config: Optional[Dict] = None) -> None:
    """Configure root logging from the ``logging`` config section"""
    log_config = (config or {}).get('logging', {})
    level_name = os.getenv(LOG_LEVEL_ENV_VAR, log_config.get('level', 'INFO'))
    level = getattr(logging, str(level_name).upper(), logging.INFO)
    logging.basicConfig(
        level=level,
        format=log_config.get('format', '%(asctime)s - %(name)s - %(levelname)s - %(message)s')
    )
    logging.getLogger().setLevel(level)
