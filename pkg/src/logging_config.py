"""
Logging setup for the command line and scripts.
"""

import logging
import os
from typing import Optional

LOG_FORMAT = "%(asctime)s %(name)s %(levelname)s %(message)s"


def configure_logging(level: Optional[str] = None) -> logging.Logger:
    """
    Install a single stream handler on the root logger.

    Args:
        level: Log level name (defaults to the LOG_LEVEL environment variable)

    Returns:
        The package logger
    """
    level_name = (level or os.getenv("LOG_LEVEL", "INFO")).upper()
    known = isinstance(logging.getLevelName(level_name), int)
    logging.basicConfig(level=level_name if known else logging.INFO, format=LOG_FORMAT, force=True)
    logger = logging.getLogger("src")
    if not known:
        logger.warning("Unknown log level %r, using INFO", level_name)
    return logger
