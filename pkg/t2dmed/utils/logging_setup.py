"""
Logging configuration for the CLI.
"""
import logging
import sys
from typing import Optional

LOG_FORMAT = '%(asctime)s %(levelname)s %(name)s: %(message)s'


def configure_logging(level: Optional[str] = None) -> logging.Logger:
    """Attach a single stream handler to the package logger."""
    from t2dmed.config.settings import get_config

    level_name = (level or get_config().LOG_LEVEL).upper()
    root = logging.getLogger('t2dmed')
    root.setLevel(getattr(logging, level_name, logging.INFO))

    if not any(getattr(h, '_t2dmed', False) for h in root.handlers):
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        handler._t2dmed = True
        root.addHandler(handler)

    return root
