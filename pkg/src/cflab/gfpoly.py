"""Polynomials over a prime field F_p, with a small text grammar.

Coefficients live in numpy ``int64`` arrays indexed by ascending power of T.
Products go through :func:`convolve_mod`, which switches to an FFT for long
operands; everything stays exact because the inputs are reduced residues.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "NEG_INF",
    "FieldElement",
    "Poly",
    "PolySyntaxError",
    "convolve_mod",
    "inverse_series",
    "parse_poly",
    "format_poly",
]

#: Degree of the zero polynomial.
NEG_INF = -math.inf

_DIRECT_LIMIT = 1 << 16  # len(a) * len(b) below this: plain np.convolve
_FFT_SAFE = 1 << 44


def _check_prime(p: int) -> int:
    p = int(p)
    if p < 2 or any(p % d == 0 for d in range(2, math.isqrt(p) + 1)):
        raise ValueError(f"modulus must be prime, got {p}")
    return p


def convolve_mod(a: np.ndarray, b: np.ndarray, p: int) -> np.ndarray:
    """Full linear convolution of two residue vectors, reduced mod p."""
    n, m = len(a), len(b)
    if n == 0 or m == 0:
        return np.zeros(0, dtype=np.int64)
    if n * m <= _DIRECT_LIMIT or min(n, m) <= 32:
        return np.convolve(a, b) % p
    if (p - 1) ** 2 * min(n, m) >= _FFT_SAFE:
        # too large for float64 rounding to stay exact; split the shorter one
        if n < m:
            a, b, n, m = b, a, m, n
        half = m // 2
        lo = convolve_mod(a, b[:half], p)
        hi = convolve_mod(a, b[half:], p)
        out = np.zeros(n + m - 1, dtype=np.int64)
        out[: len(lo)] += lo
        out[half : half + len(hi)] += hi
        return out % p
    size = 1 << (n + m - 2).bit_length()
    fa = np.fft.rfft(a.astype(np.float64), size)
    fb = np.fft.rfft(b.astype(np.float64), size)
    raw = np.fft.irfft(fa * fb, size)[: n + m - 1]
    return np.rint(raw).astype(np.int64) % p


def inverse_series(u: np.ndarray, n: int, p: int) -> np.ndarray:
    """First ``n`` coefficients of 1/u, u a power series with u[0] != 0."""
    if n <= 0:
        return np.zeros(0, dtype=np.int64)
    u = np.asarray(u, dtype=np.int64)
    if len(u) == 0 or u[0] % p == 0:
        raise ZeroDivisionError("series has zero constant term")
    g = np.array([pow(int(u[0]), -1, p)], dtype=np.int64)
    k = 1
    while k < n:
        k2 = min(2 * k, n)
        ug = convolve_mod(u[:k2], g, p)[:k2]
        t = (-ug) % p
        if len(t) < k2:
            t = np.concatenate([t, np.zeros(k2 - len(t), dtype=np.int64)])
        t[0] = (t[0] + 2) % p
        g = convolve_mod(g, t, p)[:k2]
        k = k2
    return g


@dataclass(frozen=True)
class FieldElement:
    """A residue modulo a small prime."""

    value: int
    p: int = 3

    def __post_init__(self):
        object.__setattr__(self, "value", int(self.value) % self.p)

    def _coerce(self, other) -> int:
        if isinstance(other, FieldElement):
            if other.p != self.p:
                raise ValueError(f"modulus mismatch: {self.p} vs {other.p}")
            return other.value
        return int(other)

    def __add__(self, other):
        return FieldElement(self.value + self._coerce(other), self.p)

    __radd__ = __add__

    def __sub__(self, other):
        return FieldElement(self.value - self._coerce(other), self.p)

    def __rsub__(self, other):
        return FieldElement(self._coerce(other) - self.value, self.p)

    def __mul__(self, other):
        return FieldElement(self.value * self._coerce(other), self.p)

    __rmul__ = __mul__

    def __neg__(self):
        return FieldElement(-self.value, self.p)

    def inverse(self) -> "FieldElement":
        if self.value == 0:
            raise ZeroDivisionError("zero has no inverse")
        return FieldElement(pow(self.value, -1, self.p), self.p)

    def __truediv__(self, other):
        return self * FieldElement(self._coerce(other), self.p).inverse()

    def __int__(self):
        return self.value

    def __repr__(self):
        return f"{self.value} (mod {self.p})"


class Poly:
    """Immutable univariate polynomial over F_p.

    >>> Poly([1, 1]) ** 3 == Poly([1, 0, 0, 1])
    True
    """

    __slots__ = ("_c", "p", "_hash")

    def __init__(self, coeffs: Iterable[int] | np.ndarray = (), p: int = 3):
        self.p = p
        if not isinstance(coeffs, np.ndarray):
            coeffs = [int(x) for x in coeffs]
        c = np.array(coeffs, dtype=np.int64).reshape(-1) % p
        nz = np.flatnonzero(c)
        c = c[: nz[-1] + 1] if len(nz) else c[:0]
        c.flags.writeable = False
        self._c = c
        self._hash = None

    @classmethod
    def _raw(cls, c: np.ndarray, p: int) -> "Poly":
        # c already reduced; only trims
        obj = cls.__new__(cls)
        obj.p = p
        nz = np.flatnonzero(c)
        c = c[: nz[-1] + 1] if len(nz) else c[:0]
        c.flags.writeable = False
        obj._c = c
        obj._hash = None
        return obj

    @classmethod
    def monomial(cls, degree: int, coeff: int = 1, p: int = 3) -> "Poly":
        c = np.zeros(degree + 1, dtype=np.int64)
        c[degree] = coeff % p
        return cls._raw(c, p)

    @classmethod
    def constant(cls, value: int, p: int = 3) -> "Poly":
        return cls([value], p)

    @classmethod
    def T(cls, p: int = 3) -> "Poly":
        return cls.monomial(1, 1, p)

    # -- basic accessors -------------------------------------------------

    @property
    def coeffs(self) -> np.ndarray:
        return self._c

    @property
    def degree(self) -> int | float:
        """Degree, or ``NEG_INF`` for the zero polynomial."""
        return len(self._c) - 1 if len(self._c) else NEG_INF

    @property
    def leading(self) -> int:
        return int(self._c[-1]) if len(self._c) else 0

    def is_zero(self) -> bool:
        return len(self._c) == 0

    def is_monomial(self) -> bool:
        return len(self._c) > 0 and np.count_nonzero(self._c) == 1

    def __bool__(self):
        return not self.is_zero()

    def __len__(self):
        return len(self._c)

    def __getitem__(self, k: int) -> int:
        return int(self._c[k]) if 0 <= k < len(self._c) else 0

    def __eq__(self, other):
        if isinstance(other, int):
            other = Poly([other], self.p)
        if not isinstance(other, Poly):
            return NotImplemented
        return self.p == other.p and np.array_equal(self._c, other._c)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.p, self._c.tobytes()))
        return self._hash

    def __repr__(self):
        return f"Poly({format_poly(self)!r}, p={self.p})"

    def __str__(self):
        return format_poly(self)

    # -- ring operations -------------------------------------------------

    def _lift(self, other) -> "Poly":
        if isinstance(other, Poly):
            if other.p != self.p:
                raise ValueError(f"modulus mismatch: {self.p} vs {other.p}")
            return other
        if isinstance(other, (int, np.integer, FieldElement)):
            return Poly([int(other)], self.p)
        return NotImplemented

    def __add__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        a, b = self._c, other._c
        if len(a) < len(b):
            a, b = b, a
        c = a.copy()
        c[: len(b)] += b
        return Poly._raw(c % self.p, self.p)

    __radd__ = __add__

    def __neg__(self):
        return Poly._raw((-self._c) % self.p, self.p)

    def __sub__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def __mul__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return Poly._raw(convolve_mod(self._c, other._c, self.p), self.p)

    __rmul__ = __mul__

    def scale(self, k: int) -> "Poly":
        return Poly._raw((self._c * (k % self.p)) % self.p, self.p)

    def shift(self, k: int) -> "Poly":
        """Multiply by T^k (k >= 0)."""
        if self.is_zero() or k == 0:
            return self
        return Poly._raw(np.concatenate([np.zeros(k, dtype=np.int64), self._c]), self.p)

    def __pow__(self, e: int):
        if e < 0:
            raise ValueError("negative exponent")
        result = Poly([1], self.p)
        base = self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def __divmod__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return poly_divmod(self, other)

    def __floordiv__(self, other):
        return divmod(self, other)[0]

    def __mod__(self, other):
        return divmod(self, other)[1]

    def exact_div(self, other: "Poly") -> "Poly":
        """Quotient of an exact division; raises ArithmeticError otherwise."""
        q, r = divmod(self, other)
        if not r.is_zero():
            raise ArithmeticError(f"{format_poly(other)} does not divide {format_poly(self)}")
        return q

    def divides(self, other: "Poly") -> bool:
        """True when ``self`` divides ``other``."""
        return divides(self, other)

    def monic(self) -> "Poly":
        if self.is_zero():
            return self
        return self.scale(pow(self.leading, -1, self.p))

    def frobenius(self) -> "Poly":
        """f(T)^p, computed by spreading coefficients (char p)."""
        if len(self._c) <= 1:
            return self
        c = np.zeros((len(self._c) - 1) * self.p + 1, dtype=np.int64)
        c[:: self.p] = self._c  # a^p == a in F_p
        return Poly._raw(c, self.p)

    def frobenius_cube(self) -> "Poly":
        if self.p == 3:
            return self.frobenius()
        return self * self * self

    def reverse_coeffs(self, n: int) -> np.ndarray:
        c = np.zeros(n, dtype=np.int64)
        k = min(n, len(self._c))
        c[:k] = self._c[:k]
        return c[::-1]


def poly_divmod(num: Poly, den: Poly) -> tuple[Poly, Poly]:
    if den.is_zero():
        raise ZeroDivisionError("division by the zero polynomial")
    p = num.p
    if den.p != p:
        raise ValueError(f"modulus mismatch: {p} vs {den.p}")
    n, d = len(num) - 1, len(den) - 1
    if n < d:
        return Poly._raw(np.zeros(0, dtype=np.int64), p), num
    inv_lead = pow(den.leading, -1, p)
    if den.is_monomial():
        q = (num.coeffs[d:] * inv_lead) % p
        return Poly._raw(q, p), Poly._raw(num.coeffs[:d].copy(), p)
    qlen = n - d + 1
    if qlen <= 256 or d <= 8 and qlen <= 4096:
        r = num.coeffs.copy()
        dc = den.coeffs
        q = np.zeros(qlen, dtype=np.int64)
        for k in range(n, d - 1, -1):
            t = (r[k] * inv_lead) % p
            if t:
                q[k - d] = t
                r[k - d : k + 1] = (r[k - d : k + 1] - t * dc) % p
        return Poly._raw(q, p), Poly._raw(r[:d], p)
    # reversed-series division
    rn = num.coeffs[::-1]
    rd = den.coeffs[::-1]
    inv = inverse_series(rd, qlen, p)
    q = convolve_mod(rn[:qlen], inv, p)[:qlen][::-1].copy()
    qp = Poly._raw(q, p)
    rem = num - qp * den
    return qp, rem


def divides(d: Poly, a: Poly) -> bool:
    return (a % d).is_zero()


def gcd(a: Poly, b: Poly) -> Poly:
    """Monic gcd."""
    if a.is_zero() and b.is_zero():
        raise ValueError("gcd(0, 0) is undefined")
    while not b.is_zero():
        a, b = b, a % b
    return a.monic()


def frobenius_cube(f: Poly) -> Poly:
    return f.frobenius_cube()


# -- text grammar ----------------------------------------------------------


class PolySyntaxError(ValueError):
    def __init__(self, message: str, text: str, pos: int):
        super().__init__(f"{message} at position {pos} in {text!r}")
        self.text = text
        self.pos = pos


_TOKEN = re.compile(r"\s*(?:(\d+)|([Tt])|(\^)|(\*)|([+-]))")


def _tokenize(text: str):
    pos = 0
    tokens = []
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            start = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise PolySyntaxError(f"unexpected character {text[start]!r}", text, start)
        start = m.start(m.lastindex)
        kind = ("int", "T", "^", "*", "sign")[m.lastindex - 1]
        tokens.append((kind, m.group(m.lastindex), start))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


def parse_poly(text: str, p: int = 3) -> Poly:
    """Parse ``term (('+'|'-') term)*`` into a Poly over F_p.

    A leading sign is accepted, so ``"-T^3"`` is valid.
    """
    p = _check_prime(p)
    tokens = _tokenize(str(text))
    i = 0
    terms: dict[int, int] = {}

    def peek():
        return tokens[i]

    def expect(kind):
        nonlocal i
        tok = tokens[i]
        if tok[0] != kind:
            found = tok[1] or "end of input"
            raise PolySyntaxError(f"expected {kind}, found {found!r}", text, tok[2])
        i += 1
        return tok

    def power():
        nonlocal i
        if peek()[0] == "^":
            i += 1
            return int(expect("int")[1])
        return 1

    def term(sign):
        nonlocal i
        kind, val, pos = peek()
        if kind == "int":
            i += 1
            coeff = int(val)
            if peek()[0] == "*":
                i += 1
                expect("T")
                exp = power()
            elif peek()[0] == "T":
                raise PolySyntaxError("missing '*' between coefficient and T", text, peek()[2])
            else:
                exp = 0
        elif kind == "T":
            i += 1
            coeff, exp = 1, power()
        else:
            found = val or "end of input"
            raise PolySyntaxError(f"expected a term, found {found!r}", text, pos)
        terms[exp] = terms.get(exp, 0) + sign * coeff

    sign = 1
    if peek()[0] == "sign":
        sign = -1 if peek()[1] == "-" else 1
        i += 1
    term(sign)
    while peek()[0] == "sign":
        sign = -1 if peek()[1] == "-" else 1
        i += 1
        term(sign)
    if peek()[0] != "end":
        raise PolySyntaxError(f"unexpected {peek()[1]!r}", text, peek()[2])

    top = max(terms) if terms else 0
    c = np.zeros(top + 1, dtype=np.int64)
    for e, v in terms.items():
        c[e] = v % p
    return Poly(c, p)


def format_poly(f: Poly) -> str:
    """Canonical text: descending terms, residues in [0, p), ``2*T^4+T``."""
    if f.is_zero():
        return "0"
    parts = []
    for e in np.flatnonzero(f.coeffs)[::-1]:
        e = int(e)
        c = int(f.coeffs[e])
        if e == 0:
            parts.append(str(c))
        else:
            mono = "T" if e == 1 else f"T^{e}"
            parts.append(mono if c == 1 else f"{c}*{mono}")
    return "+".join(parts)


def as_poly(x, p: int = 3) -> Poly:
    """Coerce str/int/Poly to a Poly over F_p."""
    if isinstance(x, Poly):
        if x.p != p:
            raise ValueError(f"modulus mismatch: {x.p} vs {p}")
        return x
    if isinstance(x, (int, np.integer)):
        return Poly([int(x)], p)
    if isinstance(x, str):
        return parse_poly(x, p)
    raise TypeError(f"cannot make a polynomial from {type(x).__name__}")


def poly_list(items: Sequence, p: int = 3) -> list[Poly]:
    return [as_poly(x, p) for x in items]
