import logging
import os
import sys


LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


def configure_logger(logger: logging.Logger) -> None:
    """Attaches a stderr handler to the given logger.

    The level is taken from the LOG_LEVEL environment variable (default INFO).
    Calling this twice on the same logger does not add a second handler.

    Args:
        logger (logging.Logger): The logger to configure.

    """
    level = os.getenv("LOG_LEVEL", "INFO").upper()
    logger.setLevel(level)

    if any(getattr(h, "_qcskit", False) for h in logger.handlers):
        return

    # Create a console handler that logs to stderr, stdout is reserved for reports
    handler = logging.StreamHandler(sys.stderr)
    handler.setLevel(level)
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    handler._qcskit = True

    logger.addHandler(handler)
