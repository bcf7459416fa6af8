"""Logging setup shared by the library and the command line tool."""
# Python imports
import logging

# who@timestamp: message
FORMAT = "%(name)s@%(created)f: %(message)s"

_handler = None


def configure(level="WARNING"):
    """Attach one stream handler to the sncov logger and set its level.

    Calling this more than once only changes the level.
    """
    global _handler

    logger = logging.getLogger("sncov")
    if _handler is None:
        _handler = logging.StreamHandler()
        _handler.setFormatter(logging.Formatter(FORMAT))
        logger.addHandler(_handler)

    if isinstance(level, str):
        level = level.upper()
    logger.setLevel(level)

    return logger


def say(s):
    """Logs a progress message on behalf of the command line tool"""
    logging.getLogger("sncov.cli").info(s)
