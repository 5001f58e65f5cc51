"""Working-precision control.

All analytic computations run under mpmath with at least 60 bits of
mantissa.  The default is 80 bits; the CLI can raise it (never lower it
below 60).  Functions that need extra guard bits wrap their work in
``with working(extra):``.
"""

import mpmath

MIN_BITS = 60
DEFAULT_BITS = 80

_bits = DEFAULT_BITS


def set_precision(bits):
    global _bits
    _bits = max(MIN_BITS, int(bits))


def bits():
    return _bits


def working(extra=0):
    """Context manager running mpmath at the configured precision + extra."""
    return mpmath.workprec(_bits + extra)
