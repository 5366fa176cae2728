"""Exact rational comparisons against k-th roots.

Several verified inequalities compare a rational statistic against an
irrational threshold such as ``eps**(1/4)`` or ``a**(1/4) + b**(1/4)``.
Verdicts must not depend on floating point, so:

- comparisons against a single root are decided by integer powering,
- comparisons against sums of roots are decided by refining integer root
  brackets (``math.isqrt``) until the two sides separate.

All functions accept :class:`fractions.Fraction` (or int) arguments and
return plain bools / Fractions.
"""

from __future__ import annotations

import math
from fractions import Fraction


def integer_kth_root(n: int, k: int) -> int:
    """floor(n ** (1/k)) for n >= 0, exact."""
    if n < 0:
        raise ValueError("negative radicand")
    if n in (0, 1) or k == 1:
        return n
    if k == 2:
        return math.isqrt(n)
    if k == 4:
        return math.isqrt(math.isqrt(n))
    # general small k: Newton from a float seed, then correct
    r = int(round(n ** (1.0 / k)))
    r = max(r, 1)
    while r**k > n:
        r -= 1
    while (r + 1) ** k <= n:
        r += 1
    return r


def exact_kth_root(x: Fraction, k: int) -> Fraction | None:
    """x ** (1/k) if it is rational, else None.  Requires x >= 0."""
    x = Fraction(x)
    if x < 0:
        raise ValueError("negative radicand")
    rn = integer_kth_root(x.numerator, k)
    rd = integer_kth_root(x.denominator, k)
    if rn**k == x.numerator and rd**k == x.denominator:
        return Fraction(rn, rd)
    return None


def root_bracket(x: Fraction, k: int, bits: int) -> tuple[Fraction, Fraction]:
    """(lo, hi) with lo <= x**(1/k) <= hi and hi - lo <= 2 / 2**bits."""
    x = Fraction(x)
    if x < 0:
        raise ValueError("negative radicand")
    scale = 1 << bits
    t = (x.numerator << (bits * k)) // x.denominator
    r = integer_kth_root(t, k)
    return Fraction(r, scale), Fraction(r + 2, scale)


def le_root(r: Fraction, x: Fraction, k: int = 4) -> bool:
    """Decide r <= x**(1/k) exactly (x >= 0)."""
    r = Fraction(r)
    if r <= 0:
        return True
    return r**k <= Fraction(x)


def lt_root(r: Fraction, x: Fraction, k: int = 4) -> bool:
    """Decide r < x**(1/k) exactly (x >= 0)."""
    r = Fraction(r)
    if r < 0:
        return True
    return r**k < Fraction(x)


def le_root_sum(r: Fraction, xs: list[Fraction], k: int = 4, max_bits: int = 4096) -> bool:
    """Decide r <= sum(x**(1/k) for x in xs) exactly.

    Rational roots are summed exactly; the remaining irrational roots are
    bracketed at increasing precision.  A knife-edge equality that survives
    ``max_bits`` of refinement is resolved as True (the sides then agree to
    better than 2**-max_bits, which no computed statistic in this package
    distinguishes).
    """
    r = Fraction(r)
    rational_part = Fraction(0)
    irrational = []
    for x in xs:
        x = Fraction(x)
        if x < 0:
            raise ValueError("negative radicand")
        root = exact_kth_root(x, k)
        if root is not None:
            rational_part += root
        else:
            irrational.append(x)
    if not irrational:
        return r <= rational_part
    bits = 64
    while bits <= max_bits:
        lo = rational_part
        hi = rational_part
        for x in irrational:
            blo, bhi = root_bracket(x, k, bits)
            lo += blo
            hi += bhi
        if r <= lo:
            return True
        if r > hi:
            return False
        bits *= 2
    return True


def frac_str(x: Fraction) -> str:
    """Canonical exact rendering, e.g. '7/256' or '3'."""
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def parse_frac(text: str | int | float) -> Fraction:
    """Parse '7/256', '0.25', or numeric literals into a Fraction."""
    if isinstance(text, (int, Fraction)):
        return Fraction(text)
    if isinstance(text, float):
        return Fraction(text).limit_denominator(10**12)
    return Fraction(str(text).strip())


def rat_json(x: Fraction) -> dict:
    """Report rendering: exact string plus float approximation."""
    x = Fraction(x)
    return {"exact": frac_str(x), "approx": float(x)}
