"""Utility functions for linemine."""

from __future__ import annotations

import logging
import sys
import time
from collections.abc import Generator
from contextlib import contextmanager

##############################################################################
# Number of decimal places used whenever a percentage is written out.
PERCENT_PLACES = 4


@contextmanager
def timed_step(label: str) -> Generator[None, None, None]:
    """Time a named pipeline step and report its wall-clock duration.

    Writes `label` to standard error immediately (without a trailing
    newline) so the elapsed time can be appended on the same line once the
    step finishes.  If the step raises an exception a bare newline is
    emitted before re-raising, so subsequent output always starts on a
    fresh line.

    Standard error is used so that standard output stays clean for the
    data a command produces.

    Args:
        label: Human-readable description of the step, printed as it begins.

    Yields:
        Nothing; the caller performs the work inside the `with` block.
    """
    print(label, end="", flush=True, file=sys.stderr)
    start = time.monotonic()
    try:
        yield
    except BaseException:
        print(file=sys.stderr)
        raise
    elapsed = time.monotonic() - start
    print(f" [{elapsed:.2f}s]", file=sys.stderr)


def setup_logging(verbosity: int = 0) -> None:
    """Route linemine's log records to standard error.

    Records are written as `LEVEL: message`, the same shape the warnings
    and errors take everywhere else on standard error.

    Args:
        verbosity: Positive values enable debug output, negative values
            limit output to errors. Zero shows warnings and above.
    """
    if verbosity > 0:
        level = logging.DEBUG
    elif verbosity < 0:
        level = logging.ERROR
    else:
        level = logging.WARNING
    logger = logging.getLogger("linemine")
    for existing in list(logger.handlers):
        logger.removeHandler(existing)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s: %(message)s"))
    logger.addHandler(handler)
    logger.setLevel(level)


def format_pct(value: float | None) -> str:
    """Format a percentage for a report.

    Args:
        value: The percentage, or `None` when the metric is undefined.

    Returns:
        The value with four decimal places, or an empty string for an
        undefined metric.

    Examples:
        >>> format_pct(17.2113)
        '17.2113'
        >>> format_pct(None)
        ''
    """
    if value is None:
        return ""
    return f"{value:.{PERCENT_PLACES}f}"
