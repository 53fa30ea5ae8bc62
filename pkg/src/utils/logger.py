"""Pipeline, error and per-cell loggers"""
import logging
import sys
from datetime import datetime
from logging.handlers import RotatingFileHandler
from pathlib import Path
from typing import Optional

from src.config.settings import settings

PIPELINE_LOGGER = "painfair.pipeline"
ERROR_LOGGER = "painfair.errors"


def _file_handler(log_file: str, formatter: logging.Formatter) -> RotatingFileHandler:
    settings.ensure_directories()
    handler = RotatingFileHandler(
        Path(settings.logs_dir) / log_file,
        maxBytes=10 * 1024 * 1024,  # 10MB
        backupCount=5
    )
    handler.setLevel(logging.DEBUG)
    handler.setFormatter(formatter)
    return handler


def setup_logger(
    name: str,
    log_file: Optional[str] = None,
    level: Optional[str] = None
) -> logging.Logger:
    """
    Configure a named logger with a stdout handler and, when file logging is on,
    a rotating file under the logs directory.

    Calling it again replaces the handlers, so tests can re-point LOGS_DIR.
    """
    logger = logging.getLogger(name)
    logger.setLevel(getattr(logging, (level or settings.log_level).upper()))
    logger.handlers.clear()
    logger.propagate = False

    formatter = logging.Formatter(settings.log_format, datefmt=settings.log_date_format)

    console_handler = logging.StreamHandler(sys.stdout)
    console_handler.setLevel(logging.INFO)
    console_handler.setFormatter(formatter)
    logger.addHandler(console_handler)

    if log_file and settings.log_to_file:
        logger.addHandler(_file_handler(log_file, formatter))

    return logger


def _daily(name: str, prefix: str, level: Optional[str] = None) -> logging.Logger:
    logger = logging.getLogger(name)
    if logger.handlers:
        return logger
    stamp = datetime.now().strftime("%Y%m%d")
    return setup_logger(name, log_file=f"{prefix}_{stamp}.log", level=level)


def get_pipeline_logger() -> logging.Logger:
    """Logger for ingestion, feature extraction, training and experiment progress"""
    return _daily(PIPELINE_LOGGER, "pipeline")


def get_error_logger() -> logging.Logger:
    """ERROR-level logger; failed cells and rejected bundles land here with stack traces"""
    return _daily(ERROR_LOGGER, "errors", level="ERROR")


class CellLogger(logging.LoggerAdapter):
    """Prefixes every record with the experiment cell it belongs to."""

    def process(self, msg, kwargs):
        extra = self.extra
        prefix = (f"[rep={extra['repetition']} attribute={extra['attribute']} "
                  f"mitigation={extra['mitigation']} model={extra['model']}]")
        return f"{prefix} {msg}", kwargs


def cell_logger(logger: logging.Logger, repetition: int, attribute: str, mitigation: str,
                model: str) -> CellLogger:
    return CellLogger(logger, {"repetition": repetition, "attribute": attribute,
                               "mitigation": mitigation, "model": model})
