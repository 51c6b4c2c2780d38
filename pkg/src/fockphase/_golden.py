"""Golden-section search on a bracketing interval."""

from __future__ import annotations

import math

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_max(f, lo: float, hi: float, iterations: int = 40):
    """Locate the maximum of ``f`` on [lo, hi] by golden-section shrinking.

    Returns ``(x, f(x))`` for the best probe.  The interval shrinks by the
    inverse golden ratio per iteration, so 40 iterations resolve the argmax
    to ~1e-9 of the initial bracket width.
    """
    a, b = lo, hi
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iterations):
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    return (c, fc) if fc >= fd else (d, fd)
