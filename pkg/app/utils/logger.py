import logging
from logging.handlers import RotatingFileHandler
import sys
from functools import wraps
from pathlib import Path
from datetime import datetime
from typing import Optional
from app.config import Settings, settings as default_settings

class CustomFormatter(logging.Formatter):
    """Level-coloured formatter; plain text when the stream is not a terminal"""

    fmt = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
    colors = {
        logging.DEBUG: "\x1b[38;20m",
        logging.INFO: "\x1b[38;20m",
        logging.WARNING: "\x1b[33;20m",
        logging.ERROR: "\x1b[31;20m",
        logging.CRITICAL: "\x1b[31;1m",
    }
    reset = "\x1b[0m"

    def __init__(self, use_color: bool = True):
        super().__init__(self.fmt, datefmt="%Y-%m-%d %H:%M:%S")
        self.use_color = use_color

    def format(self, record):
        message = super().format(record)
        if not self.use_color:
            return message
        return f"{self.colors.get(record.levelno, '')}{message}{self.reset}"

def setup_logger(name: str, config: Optional[Settings] = None) -> logging.Logger:
    """Setup logger with console and optional rotating file handlers"""
    config = config or default_settings
    logger = logging.getLogger(name)
    logger.setLevel(logging.DEBUG if config.debug else logging.INFO)

    if logger.handlers:
        return logger

    if config.log_dir:
        log_dir = Path(config.log_dir)
        log_dir.mkdir(parents=True, exist_ok=True)

        timestamp = datetime.utcnow().strftime("%Y%m%d")
        file_handler = RotatingFileHandler(
            filename=log_dir / f"{name}_{timestamp}.log",
            maxBytes=10*1024*1024,  # 10MB
            backupCount=5
        )
        file_handler.setFormatter(logging.Formatter(CustomFormatter.fmt))
        file_handler.setLevel(logging.DEBUG)
        logger.addHandler(file_handler)

    # stdout carries command output
    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setFormatter(CustomFormatter(use_color=sys.stderr.isatty()))
    console_handler.setLevel(logging.DEBUG if config.debug else config.log_level.upper())
    logger.addHandler(console_handler)

    return logger

def log_function_call(logger: logging.Logger):
    """Decorator to log function calls"""
    def decorator(func):
        @wraps(func)
        def wrapper(*args, **kwargs):
            func_name = func.__name__
            logger.debug(f"Calling function: {func_name}")
            try:
                result = func(*args, **kwargs)
                logger.debug(f"Function {func_name} completed successfully")
                return result
            except Exception as e:
                logger.error(f"Error in function {func_name}: {str(e)}")
                raise
        return wrapper
    return decorator
