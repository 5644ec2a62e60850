"""
Logging and run history for umedopt.
- Application logs: <UMEDOPT_DATA_DIR>/logs/app.log (commands, solver timings, errors with traceback).
- Run history: runs table in <UMEDOPT_DATA_DIR>/umedopt.db (command, arguments, input fingerprint, status).
Without UMEDOPT_DATA_DIR only the console handler is installed and nothing is written to disk.
"""

import hashlib
import json
import logging
import os
import sqlite3
import traceback
from datetime import datetime, timezone
from typing import Any, Optional

_LOGGER_NAME = "umedopt"
_FORMAT = "%(asctime)s [%(levelname)s] %(message)s"

_logger_initialized = False


def data_dir() -> Optional[str]:
    value = (os.environ.get("UMEDOPT_DATA_DIR") or "").strip()
    return value or None


def setup_logging(level: Optional[str] = None) -> None:
    """Configure console (and, with a data dir, file) logging. Safe to call multiple times."""
    global _logger_initialized
    console_level = (level or os.environ.get("UMEDOPT_LOG_LEVEL") or "WARNING").upper()
    logger = logging.getLogger(_LOGGER_NAME)
    if _logger_initialized:
        for handler in logger.handlers:
            if getattr(handler, "_umedopt_console", False):
                handler.setLevel(console_level)
        return
    logger.setLevel(logging.DEBUG)
    fmt = logging.Formatter(_FORMAT, datefmt="%Y-%m-%d %H:%M:%S")
    directory = data_dir()
    if directory:
        log_dir = os.path.join(directory, "logs")
        os.makedirs(log_dir, exist_ok=True)
        fh = logging.FileHandler(os.path.join(log_dir, "app.log"), encoding="utf-8")
        fh.setLevel(logging.DEBUG)
        fh.setFormatter(fmt)
        logger.addHandler(fh)
    ch = logging.StreamHandler()
    ch.setLevel(console_level)
    ch.setFormatter(fmt)
    ch._umedopt_console = True
    logger.addHandler(ch)
    _logger_initialized = True


def get_logger():
    setup_logging()
    return logging.getLogger(_LOGGER_NAME)


def get_connection() -> Optional[sqlite3.Connection]:
    directory = data_dir()
    if not directory:
        return None
    os.makedirs(directory, exist_ok=True)
    return sqlite3.connect(os.path.join(directory, "umedopt.db"))


def init_audit_db() -> None:
    """Create the runs table if it doesn't exist."""
    conn = get_connection()
    if conn is None:
        return
    try:
        conn.execute("""
            CREATE TABLE IF NOT EXISTS runs (
                id INTEGER PRIMARY KEY AUTOINCREMENT,
                created_at TEXT NOT NULL,
                run_id TEXT,
                command TEXT NOT NULL,
                args_json TEXT,
                input_fingerprint TEXT,
                status TEXT NOT NULL,
                exit_code INTEGER,
                error_message TEXT
            )
        """)
        conn.commit()
    finally:
        conn.close()


def log_run(
    status: str,
    command: str,
    args: Optional[dict] = None,
    run_id: Optional[str] = None,
    input_fingerprint: Optional[str] = None,
    exit_code: Optional[int] = None,
    error_message: Optional[str] = None,
) -> None:
    """Record a run (success or error). Never raises."""
    try:
        init_audit_db()
        conn = get_connection()
    except Exception as e:
        get_logger().exception("Failed to open run history: %s", e)
        return
    if conn is None:
        return
    try:
        conn.execute(
            """INSERT INTO runs (
                created_at, run_id, command, args_json, input_fingerprint,
                status, exit_code, error_message
            ) VALUES (?, ?, ?, ?, ?, ?, ?, ?)""",
            (
                datetime.now(timezone.utc).isoformat(),
                run_id,
                command,
                json.dumps(args, default=str, sort_keys=True) if args else None,
                input_fingerprint,
                status,
                exit_code,
                error_message,
            ),
        )
        conn.commit()
    except Exception as e:
        get_logger().exception("Failed to write run record: %s", e)
    finally:
        conn.close()


def log_error(command: str, error: Exception, exit_code: int, **kwargs: Any) -> None:
    """Log exception to file (with full traceback) and record a failed run."""
    logger = get_logger()
    err_msg = str(error)
    tb = "".join(traceback.format_exception(type(error), error, error.__traceback__))
    logger.debug("Command %s failed: %s\n%s", command, err_msg, tb)
    full_error = f"{err_msg}\n\nTraceback:\n{tb}" if error.__traceback__ is not None else err_msg
    log_run(status="error", command=command, exit_code=exit_code, error_message=full_error, **kwargs)


def file_fingerprint(path: Optional[str]) -> Optional[str]:
    """sha256 prefix of a file's bytes, or None when unreadable."""
    if not path:
        return None
    try:
        with open(path, "rb") as fh:
            return hashlib.sha256(fh.read()).hexdigest()[:16]
    except OSError:
        return None
