from __future__ import annotations

import logging
import sys
from logging.handlers import RotatingFileHandler
from typing import Optional

from config import settings


def setup_logging(log_name: Optional[str] = "cyclescope") -> None:
    """
    Call once at process start.

    Root logger goes to stderr (stdout carries JSON reports and tables) and,
    unless CYCLESCOPE_LOG_TO_FILE is off, to a rotating file under
    settings.log_dir. Python warnings raised by scipy quadrature or numpy are
    routed into the log as well.
    """
    root = logging.getLogger()
    if root.handlers:
        return

    level = getattr(logging, settings.log_level, logging.INFO)
    root.setLevel(level)
    fmt = logging.Formatter("%(asctime)s | %(levelname)s | %(name)s | %(message)s")

    ch = logging.StreamHandler(sys.stderr)
    ch.setFormatter(fmt)
    root.addHandler(ch)

    if settings.log_to_file:
        settings.log_dir.mkdir(parents=True, exist_ok=True)
        fh = RotatingFileHandler(
            settings.log_dir / f"{log_name or 'cyclescope'}.log",
            maxBytes=10_000_000,  # 10MB
            backupCount=5,
            encoding="utf-8",
        )
        fh.setFormatter(fmt)
        root.addHandler(fh)

    logging.captureWarnings(True)
