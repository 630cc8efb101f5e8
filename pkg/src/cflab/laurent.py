"""Truncated Laurent series in 1/T over F_p, and quartic root extraction.

A :class:`Laurent` stores a dense window of coefficients for exponents
``top, top-1, ..., floor``. Every stored coefficient is certified; nothing
is claimed below ``floor`` unless the series is flagged ``exact`` (then all
lower coefficients are zero, i.e. it is a Laurent polynomial).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .gfpoly import Poly, as_poly, convolve_mod, format_poly, inverse_series

__all__ = [
    "Laurent",
    "PrecisionExhausted",
    "RootError",
    "QuarticSpec",
    "EquationSpec",
    "FAMILIES",
    "eval_quartic",
    "solve_root",
    "square_route_root",
]


class PrecisionExhausted(ArithmeticError):
    """Raised when an answer would depend on uncertified coefficients."""


class RootError(ArithmeticError):
    """Newton lifting could not pin a root with |x| < 1."""


def _trim_leading(coeffs: np.ndarray, top: int) -> tuple[np.ndarray, int]:
    nz = np.flatnonzero(coeffs)
    if len(nz) == 0:
        return coeffs[:0], top - len(coeffs)
    k = int(nz[0])
    return coeffs[k:], top - k


def _add_bounds(a: int | None, b: int | None) -> int | None:
    return None if a is None or b is None else a + b


def _mul_bound(a: int | None, k: int) -> int | None:
    return None if a is None else a * k


class Laurent:
    """Immutable truncated series ``sum c_e T^e`` for ``floor <= e <= top``."""

    __slots__ = ("top", "coeffs", "p", "exact", "den_bound")

    def __init__(self, top: int, coeffs, p: int = 3, exact: bool = False, den_bound: int | None = None):
        c = np.array(coeffs, dtype=np.int64).reshape(-1) % p
        c, top = _trim_leading(c, int(top))
        if exact and len(c):
            nz = np.flatnonzero(c)
            c = c[: int(nz[-1]) + 1]
        c.flags.writeable = False
        self.top = top
        self.coeffs = c
        self.p = p
        self.exact = exact
        if exact:
            den_bound = max(0, -(top - len(c) + 1)) if len(c) else 0
        # an upper bound on the denominator degree when the value is a known rational function
        self.den_bound = den_bound

    # -- constructors ------------------------------------------------------

    @classmethod
    def from_poly(cls, f: Poly) -> "Laurent":
        if f.is_zero():
            return cls(-1, [], f.p, exact=True)
        return cls(int(f.degree), f.coeffs[::-1], f.p, exact=True)

    @classmethod
    def monomial(cls, exponent: int, coeff: int = 1, p: int = 3) -> "Laurent":
        return cls(exponent, [coeff], p, exact=True)

    @classmethod
    def zero(cls, floor: int, p: int = 3) -> "Laurent":
        """Certified-zero segment: nothing nonzero at exponents >= floor."""
        return cls(floor - 1, [], p)

    @classmethod
    def from_rational(cls, num: Poly, den: Poly, floor: int) -> "Laurent":
        """Expansion of num/den certified down to exponent ``floor``."""
        if den.is_zero():
            raise ZeroDivisionError("zero denominator")
        p = num.p
        if num.is_zero():
            return cls(-1, [], p, exact=True)
        top = int(num.degree - den.degree)
        length = top - floor + 1
        if length <= 0:
            return cls(floor - 1, [], p, den_bound=int(den.degree))
        inv = inverse_series(den.coeffs[::-1], length, p)
        c = convolve_mod(num.coeffs[::-1][:length], inv, p)[:length]
        return cls(top, c, p, den_bound=int(den.degree))

    # -- accessors ----------------------------------------------------------

    @property
    def rational(self) -> bool:
        """True when the value is a rational function with a known denominator-degree bound."""
        return self.den_bound is not None

    @property
    def floor(self) -> int:
        """Lowest stored exponent."""
        return self.top - len(self.coeffs) + 1

    @property
    def precision_floor(self) -> int | float:
        return -math.inf if self.exact else self.floor

    @property
    def significant_length(self) -> int | float:
        return math.inf if self.exact else len(self.coeffs)

    def is_zero_segment(self) -> bool:
        return len(self.coeffs) == 0

    @property
    def degree(self) -> int:
        """Exponent of the leading term, so |x| = |T|^degree."""
        if self.is_zero_segment():
            raise PrecisionExhausted("degree of a certified-zero segment is unknown")
        return self.top

    def coefficient(self, e: int) -> int:
        if e > self.top:
            return 0
        if e < self.floor:
            if self.exact:
                return 0
            raise PrecisionExhausted(f"coefficient of T^{e} is below the precision floor {self.floor}")
        return int(self.coeffs[self.top - e])

    def window(self, hi: int, lo: int) -> np.ndarray:
        """Coefficients for exponents hi, hi-1, ..., lo (zero-padded above top)."""
        if hi < lo:
            return np.zeros(0, dtype=np.int64)
        if lo < self.floor and not self.exact:
            raise PrecisionExhausted(f"exponent {lo} is below the precision floor {self.floor}")
        idx = self.top - np.arange(hi, lo - 1, -1)
        ok = (idx >= 0) & (idx < len(self.coeffs))
        out = np.zeros(hi - lo + 1, dtype=np.int64)
        out[ok] = self.coeffs[idx[ok]]
        return out

    def __repr__(self):
        return f"Laurent({self.to_text()})"

    def to_text(self, max_terms: int = 12) -> str:
        parts = []
        for i, c in enumerate(self.coeffs):
            if c == 0:
                continue
            e = self.top - i
            mono = "1" if e == 0 else ("T" if e == 1 else f"T^{e}")
            parts.append(mono if c == 1 else f"{int(c)}*{mono}")
            if len(parts) >= max_terms:
                parts.append("...")
                break
        body = "+".join(parts) if parts else "0"
        return body if self.exact else f"{body} + O(T^{self.floor - 1})"

    # -- arithmetic ---------------------------------------------------------

    def _check(self, other: "Laurent") -> "Laurent":
        if isinstance(other, Poly):
            other = Laurent.from_poly(other)
        if not isinstance(other, Laurent):
            raise TypeError(f"cannot combine Laurent with {type(other).__name__}")
        if other.p != self.p:
            raise ValueError(f"modulus mismatch: {self.p} vs {other.p}")
        return other

    def __add__(self, other):
        other = self._check(other)
        exact = self.exact and other.exact
        rational = _add_bounds(self.den_bound, other.den_bound)
        if exact:
            lo = min(self.floor, other.floor)
        else:
            lo = max(t.floor for t in (self, other) if not t.exact)
        hi = max(self.top, other.top)
        if hi < lo:
            return Laurent(lo - 1, [], self.p, exact=exact, den_bound=rational)
        c = np.zeros(hi - lo + 1, dtype=np.int64)
        for t in (self, other):
            if len(t.coeffs) == 0 or t.top < lo:
                continue
            seg = t.coeffs[: t.top - max(t.floor, lo) + 1]
            start = hi - t.top
            c[start : start + len(seg)] += seg
        return Laurent(hi, c % self.p, self.p, exact=exact, den_bound=rational)

    __radd__ = __add__

    def __neg__(self):
        return Laurent(self.top, (-self.coeffs) % self.p, self.p, self.exact, self.den_bound)

    def __sub__(self, other):
        return self + (-self._check(other))

    def __rsub__(self, other):
        return self._check(other) + (-self)

    def scale(self, k: int) -> "Laurent":
        return Laurent(self.top, self.coeffs * (k % self.p), self.p, self.exact, self.den_bound)

    def shift(self, k: int) -> "Laurent":
        """Multiply by T^k."""
        bound = None if self.den_bound is None else self.den_bound + max(0, -k)
        return Laurent(self.top + k, self.coeffs, self.p, self.exact, bound)

    def mul(self, other, floor: int | None = None) -> "Laurent":
        """Product; with ``floor`` only exponents >= floor are computed."""
        other = self._check(other)
        p = self.p
        rat = _add_bounds(self.den_bound, other.den_bound)
        x, y = self, other
        if x.is_zero_segment() or y.is_zero_segment():
            if (x.exact and x.is_zero_segment()) or (y.exact and y.is_zero_segment()):
                return Laurent(-1, [], p, exact=True)
            if x.is_zero_segment() and y.is_zero_segment():
                f = x.floor + y.floor - 1
            elif x.is_zero_segment():
                f = x.floor + y.top
            else:
                f = y.floor + x.top
            if floor is not None:
                f = max(f, floor)
            return Laurent(f - 1, [], p, den_bound=rat)
        top = x.top + y.top
        s = min(x.significant_length, y.significant_length)
        if floor is not None:
            s = min(s, top - floor + 1)
            if s <= 0:
                return Laurent(floor - 1, [], p, den_bound=rat)
        if math.isinf(s):
            c = convolve_mod(x.coeffs, y.coeffs, p)
            return Laurent(top, c, p, exact=True)
        s = int(s)
        c = convolve_mod(x.coeffs[:s], y.coeffs[:s], p)[:s]
        if len(c) < s:
            c = np.concatenate([c, np.zeros(s - len(c), dtype=np.int64)])
        exact = x.exact and y.exact and floor is None
        return Laurent(top, c, p, exact=exact, den_bound=rat)

    def __mul__(self, other):
        if isinstance(other, (int, np.integer)):
            return self.scale(int(other))
        return self.mul(other)

    def __rmul__(self, other):
        if isinstance(other, (int, np.integer)):
            return self.scale(int(other))
        return self._check(other).mul(self)

    def __pow__(self, e: int):
        if e < 0:
            return self.invert() ** (-e)
        out = Laurent.monomial(0, 1, self.p)
        for _ in range(e):
            out = out.mul(self)
        return out

    def invert(self, length: int | None = None) -> "Laurent":
        """1/x. Exact non-monomial inputs need an explicit significant ``length``."""
        if self.is_zero_segment():
            raise ZeroDivisionError("cannot invert a certified-zero segment")
        p = self.p
        if self.exact and np.count_nonzero(self.coeffs) == 1:
            return Laurent(-self.top, [pow(int(self.coeffs[0]), -1, p)], p, exact=True)
        if self.exact:
            if length is None:
                raise PrecisionExhausted("inverse of an exact non-monomial series needs a length")
            s = length
        else:
            s = len(self.coeffs) if length is None else min(length, len(self.coeffs))
        u = self.coeffs[:s]
        # x = N/D with deg N = top + deg D, so 1/x has denominator degree <= top + bound
        bound = None if self.den_bound is None else max(0, self.top + self.den_bound)
        return Laurent(-self.top, inverse_series(u, s, p), p, den_bound=bound)

    def __truediv__(self, other):
        other = self._check(other)
        length = None
        if other.exact and np.count_nonzero(other.coeffs) > 1:
            if self.exact:
                raise PrecisionExhausted("quotient of exact series needs a target precision")
            length = len(self.coeffs)
        return self.mul(other.invert(length))

    def truncate(self, floor: int) -> "Laurent":
        """Forget every coefficient below ``floor``."""
        if floor > self.top:
            if not self.exact and floor < self.floor:
                raise PrecisionExhausted("cannot truncate below the current floor")
            return Laurent(floor - 1, [], self.p, den_bound=self.den_bound)
        if not self.exact and floor < self.floor:
            raise PrecisionExhausted(f"requested floor {floor} is below the certified floor {self.floor}")
        return Laurent(self.top, self.window(self.top, floor), self.p, den_bound=self.den_bound)

    def as_exact(self) -> "Laurent":
        """Treat the stored window as an exact Laurent polynomial."""
        return Laurent(self.top, self.coeffs, self.p, exact=True)

    def frobenius(self) -> "Laurent":
        """x^p by spreading coefficients; certified down to p*(floor-1)+1."""
        p = self.p
        if self.is_zero_segment():
            if self.exact:
                return self
            return Laurent(p * (self.floor - 1), [], p, den_bound=_mul_bound(self.den_bound, p))
        n = len(self.coeffs)
        c = np.zeros((n - 1) * p + 1, dtype=np.int64)
        c[::p] = self.coeffs
        if not self.exact:
            c = np.concatenate([c, np.zeros(p - 1, dtype=np.int64)])
        return Laurent(p * self.top, c, p, exact=self.exact, den_bound=_mul_bound(self.den_bound, p))

    def poly_part(self) -> tuple[Poly, "Laurent"]:
        """Split into ([x], x - [x]) where [x] collects exponents >= 0."""
        p = self.p
        if not self.exact and self.floor > 0:
            raise PrecisionExhausted(f"polynomial part needs the floor <= 0, got {self.floor}")
        if self.top >= 0:
            head = self.window(self.top, 0)[::-1]
            poly = Poly(head, p)
        else:
            poly = Poly([], p)
        if self.exact:
            lo = min(self.floor, -1)
            tail = self.window(-1, lo) if self.floor <= -1 else np.zeros(0, dtype=np.int64)
            return poly, Laurent(-1, tail, p, exact=True)
        if self.floor > -1:
            return poly, Laurent(-1, [], p, den_bound=self.den_bound)  # certified zero down to 0: nothing known below
        tail = self.window(-1, self.floor)
        return poly, Laurent(-1, tail, p, den_bound=self.den_bound)

    def agrees_with(self, other: "Laurent") -> bool:
        """Equal on every exponent both series certify."""
        other = self._check(other)
        lo = max(self.precision_floor, other.precision_floor)
        hi = max(self.top, other.top)
        if math.isinf(lo):
            lo = min(self.floor, other.floor)
        lo = int(lo)
        if hi < lo:
            return True
        return bool(np.array_equal(self.window(hi, lo), other.window(hi, lo)))

    def leading_difference_exponent(self, other: "Laurent") -> int | None:
        """Highest exponent where the two differ, or None if equal on the common window."""
        d = self - self._check(other)
        if d.is_zero_segment():
            return None
        return d.top

    def __eq__(self, other):
        if not isinstance(other, Laurent):
            return NotImplemented
        return (
            self.p == other.p
            and self.exact == other.exact
            and self.top == other.top
            and np.array_equal(self.coeffs, other.coeffs)
        )

    def __hash__(self):
        return hash((self.p, self.top, self.exact, self.coeffs.tobytes()))


# -- equations -----------------------------------------------------------------

FAMILIES = ("W1", "W2", "E1", "E2", "MR", "RAW")


@dataclass(frozen=True)
class QuarticSpec:
    """c4*x^4 + c3*x^3 + c2*x^2 + c1*x + c0 = 0 over F_p[T]."""

    c4: Poly
    c3: Poly
    c2: Poly
    c1: Poly
    c0: Poly

    @property
    def coefficients(self) -> tuple[Poly, ...]:
        """Ascending: c0, c1, c2, c3, c4."""
        return (self.c0, self.c1, self.c2, self.c3, self.c4)

    @property
    def p(self) -> int:
        return self.c1.p

    def to_strings(self) -> list[str]:
        return [format_poly(c) for c in (self.c4, self.c3, self.c2, self.c1, self.c0)]


@dataclass(frozen=True)
class EquationSpec:
    family: str
    A: Poly | None = None
    C: Poly | None = None
    raw: QuarticSpec | None = None
    p: int = 3
    c_divides_a: bool = field(init=False, default=False)

    def __post_init__(self):
        fam = self.family.upper()
        if fam not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        object.__setattr__(self, "family", fam)
        if fam == "RAW":
            if self.raw is None:
                raise ValueError("RAW equations need five coefficients")
            return
        if fam == "MR":
            object.__setattr__(self, "A", Poly.T(self.p))
            object.__setattr__(self, "C", Poly([1], self.p))
            return
        if self.A is None or self.C is None:
            raise ValueError(f"{fam} needs both A and C")
        A, C = self.A, self.C
        if A.p != self.p or C.p != self.p:
            raise ValueError("coefficient modulus does not match p")
        if self.p != 3:
            raise ValueError(f"family {fam} is defined over F_3 only")
        if C.is_zero():
            raise ValueError("C must be nonzero")
        if fam in ("W1", "E1"):
            if A.degree < 1:
                raise ValueError("A must be nonconstant")
            if C.degree > A.degree:
                raise ValueError("need deg C <= deg A")
        else:
            if not C.degree < A.degree:
                raise ValueError("need deg C < deg A")
        object.__setattr__(self, "c_divides_a", C.divides(A))

    @classmethod
    def make(cls, family: str, A=None, C=None, raw=None, p: int = 3) -> "EquationSpec":
        """Build from strings/Polys; ``raw`` is [c4, c3, c2, c1, c0]."""
        fam = family.upper()
        if fam == "RAW":
            if raw is None or len(raw) != 5:
                raise ValueError("RAW needs exactly five coefficients c4,c3,c2,c1,c0")
            cs = [as_poly(x, p) for x in raw]
            return cls("RAW", raw=QuarticSpec(*cs), p=p)
        if fam == "MR":
            return cls("MR", p=p)
        return cls(fam, as_poly(A, p), as_poly(C, p), p=p)

    def quartic(self) -> QuarticSpec:
        if self.family == "RAW":
            return self.raw
        p = self.p
        one = Poly([1], p)
        zero = Poly([], p)
        A, C = self.A, self.C
        fam = self.family
        if fam == "W1":
            return QuarticSpec(C, zero, zero, -A, one)
        if fam == "W2":
            return QuarticSpec(-one, zero, zero, -A, C)
        if fam == "E1":
            return QuarticSpec(C * C, zero, C.scale(2), -(A * A), one)
        if fam == "E2":
            return QuarticSpec(one, zero, C, -(A * A), C * C)
        T = Poly.T(p)
        return QuarticSpec(one, zero, one, -T, one)  # MR

    def to_json(self) -> dict:
        if self.family == "RAW":
            return {"family": "RAW", "p": self.p, "raw": self.raw.to_strings()}
        if self.family == "MR":
            return {"family": "MR", "p": self.p}
        return {"family": self.family, "p": self.p, "A": format_poly(self.A), "C": format_poly(self.C)}

    @classmethod
    def from_json(cls, data: dict) -> "EquationSpec":
        p = int(data.get("p", 3))
        return cls.make(data["family"], data.get("A"), data.get("C"), data.get("raw"), p=p)

    def __str__(self):
        d = self.to_json()
        return " ".join(f"{k}={v}" for k, v in d.items())


# -- evaluation and root solving -----------------------------------------------


def eval_quartic(eq: QuarticSpec | EquationSpec, x: Laurent, floor: int | None = None) -> Laurent:
    """Horner evaluation; precision follows the operands unless ``floor`` is given."""
    q = eq.quartic() if isinstance(eq, EquationSpec) else eq
    cs = q.coefficients
    h = Laurent.from_poly(cs[4])
    for c in reversed(cs[:4]):
        h = h.mul(x, floor=floor) + Laurent.from_poly(c)
        if floor is not None and h.exact:
            h = h.truncate(floor)
    return h


def _derivative(q: QuarticSpec) -> QuarticSpec:
    c0, c1, c2, c3, c4 = q.coefficients
    zero = Poly([], q.p)
    return QuarticSpec(zero, c4.scale(4), c3.scale(3), c2.scale(2), c1)


def _dominance_margin(q: QuarticSpec, top: int) -> int:
    """deg c1 minus the largest |c_k x^(k-1)| exponent over k >= 2."""
    d1 = q.c1.degree
    others = [c.degree + (k - 1) * top for k, c in enumerate(q.coefficients) if k >= 2 and not c.is_zero()]
    if not others:
        return math.inf
    return d1 - max(others)


def solve_root(eq: EquationSpec | QuarticSpec, precision: int, max_iter: int = 200) -> Laurent:
    """The root with |x| < 1, certified down to exponent ``-precision``.

    Seeds at -c0/c1 (1/A for W1, C/A for W2, 1/A^2 for E1, C^2/A^2 for E2,
    1/T for Mills-Robbins) and runs Newton steps until the residual
    certifies every requested coefficient.
    """
    if precision < 1:
        raise ValueError("precision must be positive")
    q = eq.quartic() if isinstance(eq, EquationSpec) else eq
    p = q.p
    c0, c1 = q.c0, q.c1
    if c1.is_zero():
        raise RootError("linear coefficient vanishes; no Newton seed")
    if c0.is_zero():
        raise RootError("x = 0 is a root; no irrational root with |x| < 1 pinned by this seed")
    d1 = int(c1.degree)
    top = int(c0.degree) - d1
    if top >= 0:
        raise RootError(f"seed -c0/c1 has degree {top}; no root with |x| < 1 is pinned")
    if _dominance_margin(q, top) <= 0:
        raise RootError("the linear term does not dominate at the seed; derivative is not a unit multiple of c1")
    N = precision
    work = N + 2  # working floor is -work
    resid_floor = -(N - d1 + 2)
    dq = _derivative(q)
    x = Laurent.from_rational(-c0, c1, -work).as_exact()
    last_top = None
    for _ in range(max_iter):
        r = eval_quartic(q, x, floor=resid_floor)
        if r.is_zero_segment():
            break
        if last_top is not None and r.top >= last_top:
            raise RootError(f"residual failed to contract (degree {r.top} after {last_top})")
        last_top = r.top
        if r.top <= d1 - N - 1:
            break
        dfx = eval_quartic(dq, x, floor=d1 - len(r.coeffs) - 2)
        if dfx.is_zero_segment() or dfx.top != d1:
            raise RootError("derivative lost its dominant term")
        corr = r.mul(dfx.invert(length=len(r.coeffs) + 1))
        x = (x - corr).truncate(-work).as_exact()
    else:
        raise RootError("Newton iteration did not converge")
    return Laurent(x.top, x.window(x.top, -N), p)


def square_route_root(eq: EquationSpec, precision: int) -> Laurent:
    """E1/E2 root as the square of the matching W1/W2 root."""
    fam = {"E1": "W1", "E2": "W2"}.get(eq.family)
    if fam is None:
        raise ValueError("square route exists only for E1 and E2")
    w = EquationSpec(fam, eq.A, eq.C, p=eq.p)
    # beta has degree -(a) (W1) or c-a (W2); its square keeps the relative length
    bdeg = -int(eq.A.degree) if fam == "W1" else int(eq.C.degree - eq.A.degree)
    beta = solve_root(w, precision + bdeg + 2)
    sq = beta.mul(beta)
    return sq.truncate(-precision) if sq.floor <= -precision else sq
