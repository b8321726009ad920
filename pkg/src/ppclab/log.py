import logging
import os
import sys
import traceback

LEVEL_VARIABLE = "PPCLAB_LOG_LEVEL"
FORMAT = "%(asctime)s %(levelname)-7s %(name)s: %(message)s"

logger = logging.getLogger("ppclab")


def configure(level: str | int | None = None) -> logging.Logger:
    """
    Attach a single stderr handler to the package logger.

    The level comes from `level`, else from $PPCLAB_LOG_LEVEL, else INFO.
    Calling again only changes the level.
    """
    if level is None:
        level = os.environ.get(LEVEL_VARIABLE, "INFO")
    if isinstance(level, str):
        level = level.upper()
    logger.setLevel(level)
    if not any(getattr(h, "_ppclab", False) for h in logger.handlers):
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter(FORMAT))
        handler._ppclab = True
        logger.addHandler(handler)
        logger.propagate = False
    return logger


def full_stack() -> str:
    """Calling stack followed by the exception being handled, if any."""
    exc = sys.exc_info()[1]
    if exc is None:
        return "".join(traceback.format_stack()[:-1])
    # the traceback of the exception starts at the frame that caught it
    outer = traceback.format_stack(exc.__traceback__.tb_frame.f_back)
    inner = traceback.format_exception(exc)
    return inner[0] + "".join(outer) + "".join(inner[1:])


configure()
