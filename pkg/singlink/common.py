#!/usr/bin/env python3
"""Shared helpers for the singlink modules: logging, errors, constants."""

import logging

EXIT_OK = 0
EXIT_INPUT_ERROR = 1
EXIT_NUMERIC_FAILURE = 2
EXIT_CROSSCHECK_FAILED = 3

MAX_NEWTON_ITER = 50
MAX_DOUBLINGS = 3

LOG_FORMAT = "%(asctime)s: %(module)-10s %(levelname)-8s %(message)s"

# set fancy logging colours
for _level, _colour in (
    (logging.INFO, "1;32m"),
    (logging.WARN, "1;38;5;220m"),
    (logging.DEBUG, "1;94m"),
    (logging.ERROR, "1;91m"),
    (logging.CRITICAL, "1;91m"),
):
    logging.addLevelName(_level, f"\x1b[{_colour}\t{logging.getLevelName(_level)}\x1b[0m")

TRACE_LEVEL_NUM = 9
logging.addLevelName(TRACE_LEVEL_NUM, "TRACE")


def trace(self, message, *args, **kws):
    # Yes, logger takes its '*args' as 'args'.
    if self.isEnabledFor(TRACE_LEVEL_NUM):
        self._log(TRACE_LEVEL_NUM, message, args, **kws)


logging.Logger.trace = trace


def setup_logging(debug: bool = False, trace: bool = False) -> logging.Logger:
    """Configure the root logger the way every singlink entry point does.

    INFO by default, DEBUG with ``debug``, everything (level 1) with ``trace``.
    Records go to stderr so stdout stays free for reports.
    """
    logging.basicConfig(format=LOG_FORMAT)
    logger = logging.getLogger()
    logger.setLevel(logging.INFO)
    if debug:
        logger.setLevel(logging.DEBUG)
    if trace:
        logger.setLevel(1)
    return logger


class SinglinkError(Exception):
    """Base class of every error raised by singlink"""

    exit_code = EXIT_NUMERIC_FAILURE


class InputError(SinglinkError):
    """The input file, configuration or arguments are unusable"""

    exit_code = EXIT_INPUT_ERROR


class NumericFailure(SinglinkError):
    """A numeric stage could not certify its result"""

    exit_code = EXIT_NUMERIC_FAILURE


class CrosscheckFailed(SinglinkError):
    """Independent routes to the same integer disagree"""

    exit_code = EXIT_CROSSCHECK_FAILED


def format_bool_color(bool_var: bool, text_if_true: str, text_if_false: str) -> str:
    """
    Generate a ANSI escape code colored string based on a boolean.

    Args:
    bool_var:       Boolean to be evaluated
    text_if_true:   Text returned if bool_var is true -- ANSI Formatted in green color
    text_if_false:  Text returned if bool_var is false -- ANSI Formatted in red color
    """
    return (
        f"\x1b[32m{text_if_true}\x1b[0m"
        if bool_var
        else f"\x1b[31m{text_if_false}\x1b[0m"
    )


def round_to_integer(value: float) -> tuple[int, float]:
    """Nearest integer and the distance to it."""
    nearest = int(round(value))
    return nearest, abs(value - nearest)


def is_power_of_two(n: int) -> bool:
    return n > 0 and n & (n - 1) == 0
