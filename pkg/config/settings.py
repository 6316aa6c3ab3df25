"""
Core configuration for the Era Splitting GBDT toolkit
Contains process settings read from the environment and logging setup
"""

import os
import logging
from logging.handlers import RotatingFileHandler
from typing import List, Optional, Union

from dotenv import load_dotenv

from core.errors import ConfigError

# Load environment variables
load_dotenv()

logger = logging.getLogger(__name__)


def _env_flag(name: str) -> bool:
    return os.getenv(name, '').strip().lower() in ('1', 'true', 'yes', 'on')


def _env_int(name: str, default: int) -> Union[int, str]:
    """Integer setting; an unparsable value is kept as text for validate_config to report"""
    raw = os.getenv(name, '').strip()
    if not raw:
        return default
    try:
        return int(raw)
    except ValueError:
        return raw


class EraGBDTConfig:
    """Process-level settings"""

    # ===================
    # PARALLELISM
    # ===================
    THREADS = _env_int('ERA_GBDT_THREADS', 0)   # 0 = one worker per CPU

    # ===================
    # REPRODUCIBILITY
    # ===================
    DEFAULT_SEED = _env_int('ERA_GBDT_DEFAULT_SEED', 0)

    # ===================
    # MODEL FILES
    # ===================
    MODEL_FORMAT_VERSION = 1

    # ===================
    # TESTING
    # ===================
    RUN_ACCEPTANCE = _env_flag('ERA_GBDT_RUN_ACCEPTANCE')

    # ===================
    # LOGGING CONFIG
    # ===================
    LOG_LEVEL = os.getenv('ERA_GBDT_LOG_LEVEL', 'INFO').upper()
    LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    LOG_FILE_PATH = os.getenv('ERA_GBDT_LOG_FILE') or None
    MAX_LOG_SIZE = 10 * 1024 * 1024  # 10MB
    LOG_BACKUP_COUNT = 5


def effective_threads(requested: Optional[int] = None) -> int:
    """Resolve a thread count; 0 or None falls back to ERA_GBDT_THREADS, then CPU count"""
    threads = requested if requested else EraGBDTConfig.THREADS
    if not isinstance(threads, int):
        raise ConfigError('threads', f"ERA_GBDT_THREADS must be an integer, got {threads!r}")
    if threads <= 0:
        threads = os.cpu_count() or 1
    return threads


def setup_logging(level: Optional[str] = None) -> None:
    """Configure root logging once for command-line use"""
    level_name = (level or EraGBDTConfig.LOG_LEVEL).upper()
    handlers: List[logging.Handler] = [logging.StreamHandler()]

    if EraGBDTConfig.LOG_FILE_PATH:
        log_dir = os.path.dirname(EraGBDTConfig.LOG_FILE_PATH)
        if log_dir:
            os.makedirs(log_dir, exist_ok=True)
        handlers.append(RotatingFileHandler(
            EraGBDTConfig.LOG_FILE_PATH,
            maxBytes=EraGBDTConfig.MAX_LOG_SIZE,
            backupCount=EraGBDTConfig.LOG_BACKUP_COUNT
        ))

    logging.basicConfig(
        level=getattr(logging, level_name, logging.INFO),
        format=EraGBDTConfig.LOG_FORMAT,
        handlers=handlers,
        force=True
    )


# ===================
# VALIDATION FUNCTIONS
# ===================
def validate_config() -> bool:
    """Validate all environment-derived settings"""
    errors = []

    for name, value in (('ERA_GBDT_THREADS', EraGBDTConfig.THREADS),
                        ('ERA_GBDT_DEFAULT_SEED', EraGBDTConfig.DEFAULT_SEED)):
        if not isinstance(value, int):
            errors.append(f"{name} must be an integer, got '{value}'")
        elif value < 0:
            errors.append(f"{name} must be >= 0")
    if not isinstance(logging.getLevelName(EraGBDTConfig.LOG_LEVEL), int):
        errors.append(f"ERA_GBDT_LOG_LEVEL '{EraGBDTConfig.LOG_LEVEL}' is not a logging level")

    if errors:
        logger.error("Configuration validation failed:")
        for error in errors:
            logger.error(f"  - {error}")
        return False

    logger.debug("Configuration validation successful")
    return True


# ===================
# EXPORT CLASSES
# ===================
__all__ = [
    'EraGBDTConfig',
    'effective_threads',
    'setup_logging',
    'validate_config'
]
