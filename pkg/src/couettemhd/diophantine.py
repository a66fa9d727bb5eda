"""Continued fractions and non-resonance certificates for the field tilt.

The tilt sigma of the background field enters every oscillation
frequency through sigma*k + l, and the useful tilts are those for which
inf over integers of |q|^n |q sigma - p| = c > 0.  This module certifies
that constant: exact integer/surd arithmetic for quadratic irrationals
(a + b*sqrt(d))/e, a brute-force scan elsewhere, and the inverse
directional-derivative magnitude 1/|sigma*k + l| with its per-mode bound
c/|k|^n.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction

_GUARD_BITS = 192  # sqrt precision guard for float conversions of surd values


@dataclass(frozen=True)
class Surd:
    """Exact real of the form (a + b*sqrt(d))/e with integer fields, e > 0."""

    a: int
    b: int
    d: int
    e: int = 1

    def __post_init__(self):
        if self.e == 0:
            raise ValueError("zero denominator")
        if self.d < 0:
            raise ValueError("negative radicand")
        if self.e < 0:
            object.__setattr__(self, "a", -self.a)
            object.__setattr__(self, "b", -self.b)
            object.__setattr__(self, "e", -self.e)
        r = math.isqrt(self.d)
        if r * r == self.d:
            # perfect square: fold into the rational part
            object.__setattr__(self, "a", self.a + self.b * r)
            object.__setattr__(self, "b", 0)
            object.__setattr__(self, "d", 0)

    @property
    def is_rational(self) -> bool:
        return self.b == 0

    def as_fraction(self) -> Fraction:
        if not self.is_rational:
            raise ValueError("irrational surd")
        return Fraction(self.a, self.e)

    def __float__(self) -> float:
        s = math.isqrt(self.d << (2 * _GUARD_BITS))
        num = (self.a << _GUARD_BITS) + self.b * s
        return num / (self.e << _GUARD_BITS)

    def minimal_polynomial(self) -> tuple[int, int, int]:
        """(A, B, C) with A x^2 + B x + C = 0, A > 0, content-reduced."""
        # from (e x - a)^2 = b^2 d
        A = self.e * self.e
        B = -2 * self.a * self.e
        C = self.a * self.a - self.b * self.b * self.d
        g = math.gcd(math.gcd(A, abs(B)), abs(C)) or 1
        return A // g, B // g, C // g

    def conjugate_gap(self) -> float:
        """|sigma - sigma_bar| = 2|b|sqrt(d)/e for the algebraic conjugate."""
        return 2 * abs(self.b) * math.sqrt(self.d) / self.e


_PRESETS = {
    "sqrt2": Surd(0, 1, 2, 1),
    "golden": Surd(1, 1, 5, 2),
}

_SURD_RE = re.compile(
    r"^\(?\s*(-?\d+)\s*([+-])\s*(\d+)\s*\*?\s*sqrt\(?(\d+)\)?\s*\)?\s*(?:/\s*(\d+))?$"
)
_SQRT_RE = re.compile(r"^(\d*)\s*\*?\s*sqrt\(?(\d+)\)?$")


def parse_sigma(text) -> Surd | float:
    """Parse a tilt descriptor.

    Accepts presets ('sqrt2', 'golden'), integers, fractions 'p/q',
    'sqrt(d)' / 'b*sqrt(d)', '(a+b*sqrt(d))/e', or a float literal
    (floats fall back to non-certified arithmetic).
    """
    if isinstance(text, Surd):
        return text
    if isinstance(text, (int,)):
        return Surd(int(text), 0, 0, 1)
    if isinstance(text, float):
        return text
    s = str(text).strip().lower().replace(" ", "")
    if s in _PRESETS:
        return _PRESETS[s]
    if re.fullmatch(r"-?\d+", s):
        return Surd(int(s), 0, 0, 1)
    m = re.fullmatch(r"(-?\d+)/(\d+)", s)
    if m:
        return Surd(int(m.group(1)), 0, 0, int(m.group(2)))
    m = _SQRT_RE.fullmatch(s)
    if m:
        return Surd(0, int(m.group(1) or 1), int(m.group(2)), 1)
    m = _SURD_RE.fullmatch(s)
    if m:
        a, sign, b, d, e = m.groups()
        b = int(b) * (1 if sign == "+" else -1)
        return Surd(int(a), b, int(d), int(e or 1))
    try:
        return float(s)
    except ValueError:
        raise ValueError(f"cannot parse tilt descriptor {text!r}") from None


def sigma_value(descriptor) -> float:
    v = parse_sigma(descriptor)
    return float(v) if isinstance(v, Surd) else v


# -- exact comparisons -----------------------------------------------


def _cmp_rational_sqrt(r_num: int, r_den: int, y: int, d: int) -> int:
    """Sign of r_num/r_den - y*sqrt(d) with r_den > 0, all integers."""
    lhs = r_num
    rhs_sign = 1 if y > 0 else (-1 if y < 0 else 0)
    if rhs_sign == 0:
        return (lhs > 0) - (lhs < 0)
    if (lhs <= 0) and rhs_sign > 0:
        return -1
    if (lhs >= 0) and rhs_sign < 0:
        return 1
    # both sides share a sign: compare squares
    left = lhs * lhs
    right = y * y * d * r_den * r_den
    if lhs < 0:
        left, right = right, left
    return (left > right) - (left < right)


def _floor_surd(a: int, b: int, d: int, e: int) -> int:
    """Exact floor of (a + b*sqrt(d))/e, e > 0."""
    s = math.isqrt(b * b * d) if b >= 0 else -(math.isqrt(b * b * d) + 1)
    f = (a + s) // e
    # adjust: want largest f with f*e <= a + b*sqrt(d)
    while _cmp_rational_sqrt((f + 1) * e - a, 1, b, d) <= 0:
        f += 1
    while _cmp_rational_sqrt(f * e - a, 1, b, d) > 0:
        f -= 1
    return f


# -- continued fractions ----------------------------------------------


@dataclass
class ContinuedFraction:
    """Partial quotients and exact convergents p_i/q_i."""

    quotients: list
    convergents: list  # list of (p, q) integer pairs
    exact: bool


def continued_fraction(sigma, depth: int = 30) -> ContinuedFraction:
    """Continued-fraction expansion; exact for surd descriptors.

    Rational inputs terminate; float inputs stop when precision runs out.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    v = parse_sigma(sigma)
    if isinstance(v, Surd):
        if float(v) <= 0:
            raise ValueError("tilt descriptor must be positive")
        quotients = _cf_surd(v, depth)
        exact = True
    else:
        if v <= 0:
            raise ValueError("tilt descriptor must be positive")
        quotients = _cf_float(v, depth)
        exact = False
    convergents = []
    p0, q0, p1, q1 = 0, 1, 1, 0  # (p_{-2}, q_{-2}) and (p_{-1}, q_{-1}) seeds
    for a in quotients:
        p0, q0, p1, q1 = p1, q1, a * p1 + p0, a * q1 + q0
        convergents.append((p1, q1))
    return ContinuedFraction(quotients, convergents, exact)


def _cf_surd(v: Surd, depth: int) -> list:
    a, b, d, e = v.a, v.b, v.d, v.e
    out = []
    for _ in range(depth):
        f = _floor_surd(a, b, d, e)
        out.append(f)
        # x - f = (a - f e + b sqrt d)/e; reciprocal by rationalizing
        na = a - f * e
        num_a, num_b = na, b
        if num_a == 0 and num_b == 0:
            break  # rational input terminated
        # 1/((num_a + num_b sqrt d)/e) = e (num_a - num_b sqrt d)/(num_a^2 - num_b^2 d)
        den = num_a * num_a - num_b * num_b * d
        if den == 0:
            break
        a2 = e * num_a
        b2 = -e * num_b
        e2 = den
        if e2 < 0:
            a2, b2, e2 = -a2, -b2, -e2
        g = math.gcd(math.gcd(abs(a2), abs(b2)), e2) or 1
        a, b, e = a2 // g, b2 // g, e2 // g
    return out


def _cf_float(x: float, depth: int) -> list:
    out = []
    for _ in range(depth):
        f = math.floor(x)
        out.append(int(f))
        frac = x - f
        if frac < 1e-12:
            break
        x = 1.0 / frac
        if x > 1e14:  # beyond float precision
            break
    return out


# -- certificates ------------------------------------------------------


@dataclass
class DiophantineCertificate:
    sigma_descriptor: str
    n: int
    c: float
    best_p: int
    best_q: int
    search_bound: int
    tail_method: str  # quadratic-irrational-exact | convergent-bound | brute-force-only
    warning: str = ""

    def as_dict(self) -> dict:
        return {
            "sigma_descriptor": self.sigma_descriptor,
            "n": self.n,
            "c": self.c,
            "best_p": self.best_p,
            "best_q": self.best_q,
            "search_bound": self.search_bound,
            "tail_method": self.tail_method,
            "warning": self.warning,
        }


def _dist_surd(v: Surd, q: int) -> tuple[float, int]:
    """(|q sigma - p|, p) for the nearest integer p, without cancellation.

    q sigma - p = (X + Y sqrt d)/e with X = q a - p e, Y = q b; the
    magnitude is |X^2 - Y^2 d| / (e (|X| + |Y| sqrt d)), which involves
    no subtractive cancellation since X and Y sqrt d have opposite signs
    for the minimizing p.
    """
    a, b, d, e = v.a, v.b, v.d, v.e
    # nearest integer to (qa + qb sqrt d)/e: floor of value + 1/2
    p = _floor_surd(2 * q * a + e, 2 * b * q, d, 2 * e)
    best = None
    best_p = p
    for cand in (p - 1, p, p + 1):
        X = q * a - cand * e
        Y = q * b
        numer = abs(X * X - Y * Y * d)
        if numer == 0:
            return 0.0, cand
        denom = e * (abs(X) + abs(Y) * math.sqrt(d))
        val = numer / denom
        if best is None or val < best:
            best, best_p = val, cand
    return best, best_p


def dioph_constant(sigma, n: int = 1, search_bound: int = 100000) -> DiophantineCertificate:
    """Certificate for inf over q of |q|^n dist(q sigma, Z).

    Scans 1 <= q <= search_bound exactly (surds) or in floats; for surd
    input additionally bounds the tail q > search_bound through the
    minimal polynomial: q |q sigma - p| >= 1/(A(|sigma - sigma_bar| + 1/(2q)))
    since A p^2 + B p q + C q^2 is a nonzero integer.  If the tail bound
    exceeds the scanned minimum the certificate is exact.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if search_bound < 2:
        raise ValueError("search bound must be >= 2")
    v = parse_sigma(sigma)
    desc = str(sigma)
    if isinstance(v, Surd) and v.is_rational:
        frac = v.as_fraction()
        return DiophantineCertificate(
            desc, n, 0.0, frac.numerator, frac.denominator, search_bound,
            "quadratic-irrational-exact",
            warning="rational tilt: exact resonance at q = denominator",
        )
    best = math.inf
    best_p = best_q = 0
    if isinstance(v, Surd):
        for q in range(1, search_bound + 1):
            dist, p = _dist_surd(v, q)
            val = q**n * dist
            if val < best:
                best, best_p, best_q = val, p, q
        A, _B, _C = v.minimal_polynomial()
        tail_low = 1.0 / (A * (v.conjugate_gap() + 0.5 / search_bound))
        if n > 1:
            tail_low *= float(search_bound) ** (n - 1)
        if tail_low > best:
            method = "quadratic-irrational-exact"
        else:
            # walk the convergent ladder past the scan: convergents are
            # best approximations, so for q_i <= q < q_{i+1} we have
            # dist(q sigma, Z) >= dist(q_i sigma, Z) and hence
            # |q|^n dist >= q_i^n dist_i on that gap (with q_i capped
            # below by the scan bound on the first gap); close with the
            # minimal-polynomial bound beyond the last ladder rung
            cf = continued_fraction(v, 200)
            tail_min = math.inf
            q_lo = search_bound
            dist_lo = None
            for _p, q in cf.convergents:
                if q <= search_bound:
                    dist_lo, _ = _dist_surd(v, q)
                    continue
                if dist_lo is not None:
                    tail_min = min(tail_min, float(q_lo) ** n * dist_lo)
                dist_lo, _ = _dist_surd(v, q)
                q_lo = q
                if q > search_bound**2:
                    break
            if dist_lo is not None:
                tail_min = min(tail_min, float(q_lo) ** n * dist_lo)
            far = 1.0 / (A * (v.conjugate_gap() + 0.5 / q_lo))
            if n > 1:
                far *= float(q_lo) ** (n - 1)
            tail_min = min(tail_min, far)
            method = "convergent-bound" if tail_min >= best else "brute-force-only"
        return DiophantineCertificate(desc, n, float(best), best_p, best_q, search_bound, method)
    # float path: no irrationality certificate possible
    for q in range(1, search_bound + 1):
        x = q * v
        p = round(x)
        val = q**n * abs(x - p)
        if val < best:
            best, best_p, best_q = val, p, q
    warning = "float tilt: certificate is a scan, not a proof"
    if best < 1e-12:
        warning = "tilt indistinguishable from rational at float precision"
        best = 0.0
    return DiophantineCertificate(
        desc, n, float(best), best_p, best_q, search_bound, "brute-force-only", warning=warning
    )


def inv_dsigma_magnitude(sigma, mode) -> float:
    """1/|sigma k + l| for a mode (k, l) or (k, eta, l).

    Raises on exact resonance (sigma k + l = 0), identifying the mode.
    """
    if len(mode) == 3:
        k, _, l = mode
    else:
        k, l = mode
    k, l = int(k), int(l)
    v = parse_sigma(sigma)
    if isinstance(v, Surd):
        # sigma k + l = (a k + l e + b k sqrt d)/e
        s = Surd(v.a * k + l * v.e, v.b * k, v.d, v.e)
        if s.a == 0 and s.b == 0:
            raise ValueError(f"resonant mode (k={k}, l={l}): sigma*k + l = 0")
        if s.is_rational:
            return abs(1.0 / float(s.as_fraction()))
        # guarded-precision float of the exact surd absorbs the cancellation
        return 1.0 / abs(float(s))
    val = v * k + l
    if val == 0:
        raise ValueError(f"resonant mode (k={k}, l={l}): sigma*k + l = 0")
    return 1.0 / abs(val)
