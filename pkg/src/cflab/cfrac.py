"""Continued fractions of Laurent series over F_p.

``expand`` peels partial quotients off a certified series and stops as soon
as the next quotient would depend on an uncertified coefficient. The rest of
the module is the sequence calculus used on quotient lists: convergents,
reversal, elementwise cubing and alternating scaling by a polynomial.
"""

from __future__ import annotations

import csv
import io
import json
import warnings
from dataclasses import dataclass
from typing import Iterable, Sequence

from .gfpoly import Poly, as_poly, format_poly
from .laurent import Laurent

__all__ = [
    "ContinuedFraction",
    "ConvergentTable",
    "DivisibilityError",
    "PrecisionWarning",
    "expand",
    "expand_rational",
    "convergents",
    "continuant",
    "evaluate",
    "reconstruct",
    "scale_identity_check",
    "alt_scale",
    "scale_down",
    "scale_up",
    "reverse",
    "cube_each",
    "open_question_check",
    "OpenQuestionReport",
    "first_mismatch",
]


class DivisibilityError(ArithmeticError):
    def __init__(self, index: int, divisor: Poly, entry: Poly):
        super().__init__(
            f"{format_poly(divisor)} does not divide entry {index} ({format_poly(entry)})"
        )
        self.index = index
        self.divisor = divisor
        self.entry = entry


class PrecisionWarning(UserWarning):
    pass


@dataclass(frozen=True)
class ContinuedFraction:
    """[a_0; a_1, a_2, ...] with ``quotients[0] == a_0``.

    ``exhausted_at`` is the index of the first quotient the input precision
    could not certify; ``None`` means the list is the whole (finite) expansion.
    """

    quotients: tuple[Poly, ...]
    exhausted_at: int | None = None

    def __post_init__(self):
        qs = tuple(self.quotients)
        object.__setattr__(self, "quotients", qs)
        if not qs:
            raise ValueError("a continued fraction needs at least a_0")
        for i, a in enumerate(qs[1:], start=1):
            if a.degree < 1:
                raise ValueError(f"partial quotient a_{i} = {format_poly(a)} has degree < 1")

    @classmethod
    def from_partials(cls, partials: Iterable, a0=0, p: int = 3, exhausted_at: int | None = None):
        qs = [as_poly(a0, p)] + [as_poly(x, p) for x in partials]
        return cls(tuple(qs), exhausted_at)

    @property
    def a0(self) -> Poly:
        return self.quotients[0]

    @property
    def partials(self) -> tuple[Poly, ...]:
        """a_1, a_2, ..."""
        return self.quotients[1:]

    @property
    def finite(self) -> bool:
        return self.exhausted_at is None

    @property
    def p(self) -> int:
        return self.quotients[0].p

    def degrees(self) -> list[int]:
        return [int(a.degree) for a in self.partials]

    def __len__(self):
        return len(self.quotients)

    def __getitem__(self, i):
        return self.quotients[i]

    def to_json(self) -> dict:
        return {
            "a0": format_poly(self.a0),
            "quotients": [format_poly(a) for a in self.partials],
            "exhausted_at": self.exhausted_at,
        }

    @classmethod
    def from_json(cls, data: dict, p: int = 3) -> "ContinuedFraction":
        return cls.from_partials(data["quotients"], data.get("a0", "0"), p, data.get("exhausted_at"))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["index", "quotient", "degree"])
        for i, a in enumerate(self.quotients):
            w.writerow([i, format_poly(a), "" if a.is_zero() else int(a.degree)])
        return buf.getvalue()

    def __str__(self):
        return "[" + ", ".join(format_poly(a) for a in self.quotients) + ("]" if self.finite else ", ...]")


@dataclass(frozen=True)
class ConvergentTable:
    """U_k / V_k for k = 0..n."""

    numerators: tuple[Poly, ...]
    denominators: tuple[Poly, ...]

    def __len__(self):
        return len(self.numerators)

    def determinant(self, k: int) -> Poly:
        """U_{k+1} V_k - V_{k+1} U_k, which should be (-1)^k."""
        U, V = self.numerators, self.denominators
        return U[k + 1] * V[k] - V[k + 1] * U[k]

    def determinant_ok(self) -> bool:
        p = self.numerators[0].p
        for k in range(len(self) - 1):
            if self.determinant(k) != Poly([(-1) ** k], p):
                return False
        return True


def expand_rational(num: Poly, den: Poly, max_terms: int | None = None) -> ContinuedFraction:
    """Exact Euclidean expansion of num/den."""
    if den.is_zero():
        raise ZeroDivisionError("zero denominator")
    qs = []
    while True:
        q, r = divmod(num, den)
        qs.append(q)
        if r.is_zero():
            return ContinuedFraction(tuple(qs))
        if max_terms is not None and len(qs) > max_terms:
            return ContinuedFraction(tuple(qs), exhausted_at=len(qs))
        num, den = den, r


def _certified_equal(alpha: Laurent, qs: list[Poly]) -> bool:
    """Whether alpha = U/V for the continuant of ``qs`` follows from the stored coefficients.

    With alpha = N/D and deg D <= alpha.den_bound, N V - U D is a polynomial of
    absolute value |alpha - U/V| |D| |V|. If the difference vanishes down to
    alpha.floor and -alpha.floor >= deg D + deg V, that polynomial is zero.
    """
    U, V = continuant(qs)
    if -alpha.floor < alpha.den_bound + int(V.degree):
        return False
    return (alpha - Laurent.from_rational(U, V, alpha.floor)).is_zero_segment()


def expand(alpha: Laurent, max_terms: int | None = None) -> ContinuedFraction:
    """Partial quotients of ``alpha`` that its certified coefficients determine.

    ``max_terms`` bounds the number of quotients after a_0. A quotient is
    emitted only when its complete quotient is certified down to T^0, so a
    higher-precision rerun can extend the list but never change it.
    """
    if alpha.exact:
        p = alpha.p
        if alpha.is_zero_segment():
            return ContinuedFraction((Poly([], p),))
        k = max(0, -alpha.floor)
        num = Poly(alpha.coeffs[::-1], p).shift(alpha.floor + k)
        return expand_rational(num, Poly.monomial(k, 1, p), max_terms)
    qs: list[Poly] = []
    x = alpha
    exhausted = None
    while True:
        if x.floor > 0 or x.is_zero_segment():
            exhausted = len(qs)
            break
        a, r = x.poly_part()
        qs.append(a)
        if max_terms is not None and len(qs) > max_terms:
            break
        if r.is_zero_segment():
            if alpha.rational and _certified_equal(alpha, qs):
                break
            exhausted = len(qs)
            break
        x = r.invert()
    if max_terms is not None and len(qs) > max_terms:
        # stopped by the caller's budget, not by precision
        return ContinuedFraction(tuple(qs[: max_terms + 1]), exhausted_at=max_terms + 1)
    return ContinuedFraction(tuple(qs), exhausted)


def continuant(seq: Sequence[Poly]) -> tuple[Poly, Poly]:
    """(U, V) with [seq[0]; seq[1], ...] = U/V, via the two-term recurrence."""
    p = seq[0].p if seq else 3
    u_m2, u_m1 = Poly([], p), Poly([1], p)
    v_m2, v_m1 = Poly([1], p), Poly([], p)
    for a in seq:
        u_m2, u_m1 = u_m1, a * u_m1 + u_m2
        v_m2, v_m1 = v_m1, a * v_m1 + v_m2
    return u_m1, v_m1


def convergents(cf: ContinuedFraction | Sequence[Poly]) -> ConvergentTable:
    qs = cf.quotients if isinstance(cf, ContinuedFraction) else tuple(cf)
    p = qs[0].p
    U, V = [], []
    u_m2, u_m1 = Poly([], p), Poly([1], p)
    v_m2, v_m1 = Poly([1], p), Poly([], p)
    for a in qs:
        u_m2, u_m1 = u_m1, a * u_m1 + u_m2
        v_m2, v_m1 = v_m1, a * v_m1 + v_m2
        U.append(u_m1)
        V.append(v_m1)
    return ConvergentTable(tuple(U), tuple(V))


def evaluate(seq: Sequence[Poly]) -> tuple[Poly, Poly]:
    """Exact value of [seq[0]; seq[1], ...] as a pair (numerator, denominator)."""
    return continuant(seq)


def reconstruct(cf: ContinuedFraction, precision: int) -> Laurent:
    """Series of the value [a_0; a_1, ...] certified down to T^-precision.

    For a truncated expansion (``exhausted_at`` set) only the coefficients the
    prefix determines are returned, i.e. down to T^(-2 deg V_n); asking for
    more emits a :class:`PrecisionWarning`.
    """
    U, V = continuant(cf.quotients)
    floor = -precision
    if not cf.finite:
        determined = -2 * int(V.degree)
        if floor < determined:
            warnings.warn(
                f"prefix determines coefficients only down to T^{determined}; "
                f"requested T^{floor}",
                PrecisionWarning,
                stacklevel=2,
            )
            floor = determined
        out = Laurent.from_rational(U, V, floor)
        return Laurent(out.top, out.coeffs, out.p)
    return Laurent.from_rational(U, V, floor)


def scale_identity_check(B: Poly, C: Poly, cf: ContinuedFraction | Sequence[Poly]) -> bool:
    """C [B a0, C a1, B a2, ...] == B [C a0, B a1, C a2, ...] as rational functions."""
    if B.is_zero() or C.is_zero():
        raise ValueError("B and C must be nonzero")
    qs = cf.quotients if isinstance(cf, ContinuedFraction) else tuple(cf)
    left = [(B if i % 2 == 0 else C) * a for i, a in enumerate(qs)]
    right = [(C if i % 2 == 0 else B) * a for i, a in enumerate(qs)]
    ul, vl = continuant(left)
    ur, vr = continuant(right)
    return C * ul * vr == B * ur * vl


# -- sequence calculus ---------------------------------------------------------


def alt_scale(seq: Sequence[Poly], B: Poly, mode: str = "odd") -> list[Poly]:
    """Alternating scaling of a 1-based sequence.

    ``mode="odd"``: B^{-1} seq = a1/B, B a2, a3/B, ...  (B must divide odd entries)
    ``mode="even"``: B seq = B a1, a2/B, B a3, ...       (B must divide even entries)
    """
    if mode not in ("odd", "even"):
        raise ValueError("mode must be 'odd' or 'even'")
    if B.is_zero():
        raise ZeroDivisionError("cannot scale by zero")
    divide_parity = 1 if mode == "odd" else 0
    out = []
    for i, a in enumerate(seq, start=1):
        if i % 2 == divide_parity:
            q, r = divmod(a, B)
            if not r.is_zero():
                raise DivisibilityError(i, B, a)
            out.append(q)
        else:
            out.append(a * B)
    return out


def scale_down(seq: Sequence[Poly], B: Poly) -> list[Poly]:
    """B^{-1} seq."""
    return alt_scale(seq, B, "odd")


def scale_up(seq: Sequence[Poly], B: Poly) -> list[Poly]:
    """B seq."""
    return alt_scale(seq, B, "even")


def reverse(seq: Sequence[Poly]) -> list[Poly]:
    return list(seq)[::-1]


def cube_each(seq: Sequence[Poly]) -> list[Poly]:
    return [a.frobenius_cube() for a in seq]


def first_mismatch(a: Sequence[Poly], b: Sequence[Poly]) -> int | None:
    """Index of the first disagreement over the common prefix."""
    for i, (x, y) in enumerate(zip(a, b)):
        if x != y:
            return i
    return None


@dataclass
class OpenQuestionReport:
    n: int
    hypothesis: bool
    conclusion: bool | None = None
    n_even: bool | None = None
    witness_index: int | None = None
    detail: str = ""

    @property
    def status(self) -> str:
        if not self.hypothesis:
            return "hypothesis not satisfied"
        return "conclusion holds" if self.conclusion else "counterexample"

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "status": self.status,
            "hypothesis": self.hypothesis,
            "conclusion": self.conclusion,
            "n_even": self.n_even,
            "witness_index": self.witness_index,
            "detail": self.detail,
        }


def open_question_check(seq: Sequence[Poly], D: Poly) -> OpenQuestionReport:
    """Test [a_n, ..., a_1] = D^{-1} [a_1, ..., a_n] and, if it holds, the
    claimed consequence: n even and a_{n-k} = D^{-(-1)^k} a_{k+1}."""
    seq = list(seq)
    n = len(seq)
    if n == 0:
        raise ValueError("empty sequence")
    if D.degree < 1:
        raise ValueError("D must have positive degree")
    if not D.divides(seq[0]):
        raise DivisibilityError(1, D, seq[0])
    ur, vr = continuant(seq[::-1])
    uf, vf = continuant(seq)
    hyp = ur * D * vf == uf * vr
    rep = OpenQuestionReport(n=n, hypothesis=hyp)
    if not hyp:
        return rep
    rep.n_even = n % 2 == 0
    for k in range(n):
        lhs = seq[n - 1 - k]
        rhs = seq[k]
        ok = lhs * D == rhs if k % 2 == 0 else lhs == D * rhs
        if not ok:
            rep.conclusion = False
            rep.witness_index = k
            rep.detail = f"a_{n - k} = {format_poly(lhs)} vs a_{k + 1} = {format_poly(rhs)}"
            return rep
    rep.conclusion = rep.n_even
    if not rep.n_even:
        rep.detail = "n is odd"
    return rep


def dumps_sequence(seq: Sequence[Poly]) -> str:
    return json.dumps([format_poly(a) for a in seq])
