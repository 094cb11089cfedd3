"""
Logging setup: structlog over stdlib logging, JSON lines on stderr and an
optional JSON log file.
"""

import os
import sys
import logging
from typing import Optional

import structlog
from pythonjsonlogger import jsonlogger


def setup_logging(level: Optional[str] = None, log_file: Optional[str] = None):
    log_level = (level or os.getenv("LOG_LEVEL", "WARNING")).upper()
    log_file = log_file or os.getenv("CQD_LOG_FILE")

    # Results go to stdout; every log line goes to stderr
    logging.basicConfig(
        level=getattr(logging, log_level, logging.WARNING),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        stream=sys.stderr,
    )

    structlog.configure(
        processors=[
            structlog.stdlib.filter_by_level,
            structlog.stdlib.add_logger_name,
            structlog.stdlib.add_log_level,
            structlog.stdlib.PositionalArgumentsFormatter(),
            structlog.processors.TimeStamper(fmt="iso"),
            structlog.processors.StackInfoRenderer(),
            structlog.processors.format_exc_info,
            structlog.processors.UnicodeDecoder(),
            structlog.processors.JSONRenderer()
        ],
        context_class=dict,
        logger_factory=structlog.stdlib.LoggerFactory(),
        wrapper_class=structlog.stdlib.BoundLogger,
        cache_logger_on_first_use=True,
    )

    # Optional file handler for detailed run logs
    if log_file:
        root = logging.getLogger()
        for handler in root.handlers:
            handler.setLevel(root.level)
        root.setLevel(logging.DEBUG)
        file_handler = logging.FileHandler(log_file)
        file_handler.setLevel(logging.DEBUG)
        formatter = jsonlogger.JsonFormatter(
            "%(asctime)s %(name)s %(levelname)s %(message)s"
        )
        file_handler.setFormatter(formatter)
        logging.getLogger().addHandler(file_handler)

    # scipy and matplotlib are chatty at DEBUG
    logging.getLogger("matplotlib").setLevel(logging.WARNING)
    logging.getLogger("scipy").setLevel(logging.WARNING)
