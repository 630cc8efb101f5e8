"""Generators for quotient sequences that are known (or conjectured) in closed form.

Everything here is pure polynomial arithmetic: no series, no root solving.
The point is to produce sequences that the expansion engine can be checked
against. Powers with exponent 3^k are reached by k Frobenius cubings, and every
negative power of C is an exact division that fails loudly if it is not exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence

from .cfrac import (
    DivisibilityError,
    alt_scale,
    convergents,
    continuant,
    cube_each,
    expand,
    first_mismatch,
    reverse,
)
from .gfpoly import Poly, as_poly, format_poly, gcd
from .laurent import Laurent

__all__ = [
    "ConsistencyError",
    "OmegaSeq",
    "SpecialConvergentSeq",
    "RSConvergents",
    "frob_power",
    "w1_quotients",
    "w2_quotients",
    "w1_quotient_degree",
    "w2_quotient_degree",
    "w1_special_convergents",
    "w2_special_convergents",
    "beta_convergents_e1",
    "omega_build",
    "omega_length",
    "section3_rs_convergents",
    "locate_convergent",
    "square_relation_check",
    "hyperquadratic_square_quotients",
    "DEFAULT_DEPTH_CAP",
]

DEFAULT_DEPTH_CAP = 5


class ConsistencyError(ArithmeticError):
    """A recurrence and its closed form disagree."""


def _cube_times(x: Poly, k: int) -> Poly:
    for _ in range(k):
        x = x.frobenius_cube()
    return x


def frob_power(x: Poly, e: int) -> Poly:
    """x**e assembled from cubings along the base-3 digits of e."""
    if e < 0:
        raise ValueError("negative exponent")
    out = Poly([1], x.p)
    base = x
    while e:
        e, d = divmod(e, 3)
        if d == 1:
            out = out * base
        elif d == 2:
            out = out * base * base
        if e:
            base = base.frobenius_cube()
    return out


def _prep(A, C, p=3):
    A, C = as_poly(A, p), as_poly(C, p)
    if C.is_zero():
        raise ValueError("C must be nonzero")
    return A, C


def _require_c_divides_a(A: Poly, C: Poly):
    if not C.divides(A):
        raise ValueError(f"C = {format_poly(C)} does not divide A = {format_poly(A)}")


# -- hyperquadratic quotient sequences ---------------------------------------


def w1_quotient_degree(a: int, c: int, n: int) -> int:
    """deg b_n for the W1 root when C | A."""
    return 3 ** (n - 1) * a - (3 ** (n - 1) + (-1) ** n) // 4 * c


def w2_quotient_degree(a: int, c: int, n: int) -> int:
    """deg b_n for the W2 root when C | A."""
    return 3 ** (n - 1) * (a - c) + (3 ** (n - 1) + (-1) ** n) // 4 * c


def w1_quotients(A, C, n: int, check: bool = True) -> list[Poly]:
    """b_1..b_n of the W1 root (C | A): b_1 = A, then alternately b^3/(-C) and -C b^3.

    With ``check`` the closed form (-1)^(k-1) A^(3^(k-1)) / C^((3^(k-1)+(-1)^k)/4)
    is evaluated independently and compared term by term.
    """
    A, C = _prep(A, C)
    if A.degree < 1:
        raise ValueError("A must be nonconstant")
    _require_c_divides_a(A, C)
    if n < 1:
        return []
    negC = -C
    seq = [A]
    for k in range(2, n + 1):
        cube = seq[-1].frobenius_cube()
        seq.append(negC * cube if k % 2 else cube.exact_div(negC))
    if check:
        for k, b in enumerate(seq, start=1):
            e = (3 ** (k - 1) + (-1) ** k) // 4
            closed = _cube_times(A, k - 1).exact_div(frob_power(C, e))
            if k % 2 == 0:
                closed = -closed
            if closed != b:
                raise ConsistencyError(f"W1 recurrence and closed form differ at b_{k}")
    return seq


def w2_quotients(A, C, n: int, check: bool = True) -> list[Poly]:
    """b_1..b_n of the W2 root (C | A): b_1 = A/C, then alternately C b^3 and b^3/C."""
    A, C = _prep(A, C)
    if A.degree <= C.degree:
        raise ValueError("W2 needs deg A > deg C")
    _require_c_divides_a(A, C)
    if n < 1:
        return []
    b1 = A.exact_div(C)
    seq = [b1]
    for k in range(2, n + 1):
        cube = seq[-1].frobenius_cube()
        seq.append(C * cube if k % 2 == 0 else cube.exact_div(C))
    if check:
        for k, b in enumerate(seq, start=1):
            e = (3 ** (k - 1) + (-1) ** k) // 4
            closed = _cube_times(b1, k - 1) * frob_power(C, e)
            if closed != b:
                raise ConsistencyError(f"W2 recurrence and closed form differ at b_{k}")
    return seq


def hyperquadratic_square_quotients(A, C, n: int) -> list[Poly]:
    """Quotients of the square of [0, Omega_inf] as predicted in closed form.

    First term -C + A^4, then (-1)^(k-1) A^(3^k - (-1)^k) / C^((3^k + 3(-1)^k)/4).
    """
    A, C = _prep(A, C)
    _require_c_divides_a(A, C)
    out = []
    for k in range(1, n + 1):
        if k == 1:
            out.append(frob_power(A, 4) - C)
            continue
        ea = 3 ** k - (-1) ** k
        ec = (3 ** k + 3 * (-1) ** k) // 4
        q = frob_power(A, ea).exact_div(frob_power(C, ec))
        out.append(q if k % 2 else -q)
    return out


# -- special convergents -------------------------------------------------------


@dataclass(frozen=True)
class SpecialConvergentSeq:
    pairs: tuple[tuple[Poly, Poly], ...]
    family: str
    A: Poly
    C: Poly

    @property
    def P(self) -> list[Poly]:
        return [pq[0] for pq in self.pairs]

    @property
    def Q(self) -> list[Poly]:
        return [pq[1] for pq in self.pairs]

    def q_degrees(self) -> list[int]:
        return [int(q.degree) for q in self.Q]

    def coprime(self) -> bool:
        one = Poly([1], self.A.p)
        return all(gcd(P, Q) == one for P, Q in self.pairs if not P.is_zero())

    def __len__(self):
        return len(self.pairs)

    def __iter__(self) -> Iterator[tuple[Poly, Poly]]:
        return iter(self.pairs)


def w1_special_convergents(A, C, n: int) -> SpecialConvergentSeq:
    """P_0 = 1, Q_0 = A; P_k = Q_{k-1}^3, Q_k = A Q_{k-1}^3 - C P_{k-1}^3 (k = 0..n)."""
    A, C = _prep(A, C)
    P, Q = Poly([1], A.p), A
    pairs = [(P, Q)]
    for _ in range(n):
        q3 = Q.frobenius_cube()
        P, Q = q3, A * q3 - C * P.frobenius_cube()
        pairs.append((P, Q))
    return SpecialConvergentSeq(tuple(pairs), "W1", A, C)


def w2_special_convergents(A, C, n: int) -> SpecialConvergentSeq:
    """P_0 = A, Q_0 = C; P_k = A P_{k-1}^3 + Q_{k-1}^3, Q_k = C P_{k-1}^3.

    These approximate the first complete quotient 1/beta, not beta itself.
    """
    A, C = _prep(A, C)
    P, Q = A, C
    pairs = [(P, Q)]
    for _ in range(n):
        p3 = P.frobenius_cube()
        P, Q = A * p3 + Q.frobenius_cube(), C * p3
        pairs.append((P, Q))
    return SpecialConvergentSeq(tuple(pairs), "W2", A, C)


def beta_convergents_e1(A, C, n: int) -> SpecialConvergentSeq:
    """Convergents P_k/Q_k (k = 0..n) of the W1 root through the Frobenius recurrences.

    Odd k: P = Q'^3, Q = A Q'^3 - C P'^3.  Even k: P = -Q'^3/C, Q = -(A/C) Q'^3 + P'^3.
    """
    A, C = _prep(A, C)
    _require_c_divides_a(A, C)
    p = A.p
    pairs = [(Poly([], p), Poly([1], p))]
    if n >= 1:
        pairs.append((Poly([1], p), A))
    AoverC = A.exact_div(C)
    for k in range(2, n + 1):
        Pp, Qp = pairs[-1]
        q3, p3 = Qp.frobenius_cube(), Pp.frobenius_cube()
        if k % 2:
            pairs.append((q3, A * q3 - C * p3))
        else:
            try:
                Pk = -(q3.exact_div(C))
            except ArithmeticError as exc:
                raise DivisibilityError(k, C, q3) from exc
            pairs.append((Pk, -(AoverC * q3) + p3))
    return SpecialConvergentSeq(tuple(pairs), "E1-beta", A, C)


# -- Omega sequences -----------------------------------------------------------


@dataclass(frozen=True)
class OmegaSeq:
    entries: tuple[Poly, ...]
    depth: int
    family: str
    A: Poly | None = None
    C: Poly | None = None

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, i):
        return self.entries[i]

    def degrees(self) -> list[int]:
        return [int(e.degree) for e in self.entries]

    def c_divisibility_ok(self) -> bool:
        """C divides the entries the next recursion step will divide.

        That is every odd 1-based position for E1 and every even one for E2.
        """
        if self.C is None:
            return True
        start = 0 if self.family == "E1" else 1
        return all(self.C.divides(e) for e in self.entries[start::2])

    def to_json(self) -> dict:
        return {
            "family": self.family,
            "depth": self.depth,
            "A": None if self.A is None else format_poly(self.A),
            "C": None if self.C is None else format_poly(self.C),
            "quotients": [format_poly(e) for e in self.entries],
        }


def omega_length(family: str, depth: int) -> int:
    """Length of Omega_depth; the same recursion L_n = 2L_{n-1} + L_{n-2} + 2 for all three families."""
    L = [0, 1]
    for _ in range(2, depth + 1):
        L.append(2 * L[-1] + L[-2] + 2)
    return L[depth]


def omega_build(family: str, A=None, C=None, depth: int = DEFAULT_DEPTH_CAP, *, p: int = 3,
                depth_cap: int = DEFAULT_DEPTH_CAP) -> OmegaSeq:
    """Build Omega_depth for E1, E2 or MR by juxtaposition, cubing and alternating scaling.

    Depths beyond ``depth_cap`` must be requested by raising the cap; entry
    degrees grow like 3^depth. A failed alternating division raises
    :class:`DivisibilityError` carrying the offending index.
    """
    family = family.upper()
    if depth < 0:
        raise ValueError("depth must be nonnegative")
    if depth > depth_cap:
        raise ValueError(f"depth {depth} exceeds the cap {depth_cap}; pass depth_cap to go deeper")
    if family == "MR":
        if p != 3:
            raise ValueError("the MR recursion is stated over F_3")
        T = Poly.T(p)
        mT = -T
        om: list[list[Poly]] = [[], [T]]
        for m in range(2, depth + 1):
            om.append(om[m - 1] + [mT] + cube_each(om[m - 2]) + [mT] + om[m - 1])
        return OmegaSeq(tuple(om[depth]), depth, "MR")
    if family not in ("E1", "E2"):
        raise ValueError(f"no Omega recursion for family {family!r}")
    if p != 3:
        raise ValueError("the Omega recursions are stated over F_3")
    A, C = _prep(A, C, p)
    if A.degree < 1:
        raise ValueError("A must be nonconstant")
    if C.degree > A.degree or (family == "E2" and C.degree >= A.degree):
        raise ValueError("degree condition on C fails")
    _require_c_divides_a(A, C)
    two = Poly([2], p)
    A2 = A * A
    if family == "E1":
        tC = two * C
        C2 = C * C
        A2C = A2.exact_div(C)
        om = [[], [A2]]
        for m in range(2, depth + 1):
            prev, prev2 = om[m - 1], om[m - 2]
            if m % 2:
                block = prev + [two * A2] + alt_scale(cube_each(prev2), C2, "odd") + [two * A2] + reverse(prev)
            else:
                block = prev + [A2C] + alt_scale(cube_each(prev2), tC, "odd") + [two * A2] + alt_scale(prev, tC, "odd")
            om.append(block)
    else:
        C2 = C * C
        A2C2 = A2.exact_div(C2)
        A2C = A2.exact_div(C)
        om = [[], [A2C2]]
        for m in range(2, depth + 1):
            prev, prev2 = om[m - 1], om[m - 2]
            if m % 2:
                block = prev + [two * A2C2] + alt_scale(cube_each(prev2), C2, "even") + [two * A2C2] + reverse(prev)
            else:
                block = prev + [two * A2C] + alt_scale(cube_each(prev2), C, "even") + [two * A2C2] + alt_scale(prev, C, "even")
            om.append(block)
    return OmegaSeq(tuple(om[depth]), depth, family, A, C)


# -- the R/S convergents of the E1 analysis ------------------------------------


@dataclass(frozen=True)
class RSConvergents:
    n: int
    pairs: tuple[tuple[Poly, Poly], ...]  # (R_i, S_i) for i = 1, 2, 3
    predicted_next_degrees: tuple[int, int, int]
    coprime: tuple[bool, bool, bool]


def section3_rs_convergents(A, C, n: int) -> RSConvergents:
    """The three convergents R_{i,n}/S_{i,n} built from the n-th beta convergent, with
    the predicted degree of the quotient that follows each one."""
    A, C = _prep(A, C)
    if n < 1:
        raise ValueError("n must be at least 1")
    P, Q = beta_convergents_e1(A, C, n).pairs[n]
    one = Poly([1], A.p)
    P2, Q2 = P * P, Q * Q
    Q4 = Q2 * Q2
    if n % 2:
        try:
            Q4c = Q4.exact_div(C)
            P2Q2c = (P2 * Q2).exact_div(C)
            Q6c = (Q4 * Q2).exact_div(C)
        except ArithmeticError as exc:
            raise DivisibilityError(n, C, Q) from exc
        r2 = (P2Q2c, Q4c + one)
        r3 = (P2 * (one - Q4c), -Q6c)
    else:
        r2 = (P2 * Q2, Q4 + one)
        r3 = (P2 * (Q4 + Poly([2], A.p)), Q4 * Q2)
    pairs = ((P2, Q2), r2, r3)
    a, c = int(A.degree), 0 if C.degree < 0 else int(C.degree)
    pred = (2 * a, 2 * a, 2 * a) if n % 2 == 0 else (2 * a - c, 2 * a, 2 * a - c)
    cop = tuple(gcd(R, S) == one for R, S in pairs)
    return RSConvergents(n, pairs, pred, cop)


def locate_convergent(quotients: Sequence[Poly], R: Poly, S: Poly) -> int | None:
    """Index k with U_k/V_k = R/S among the convergents of ``quotients``, if any."""
    table = convergents(quotients)
    target = int(S.degree) - int(gcd(R, S).degree)
    for k, (U, V) in enumerate(zip(table.numerators, table.denominators)):
        if V.degree == target and U * S == V * R:
            return k
        if V.degree > target:
            return None
    return None


# -- the squaring relations ----------------------------------------------------


def _cf_series_prefix(quotients: Sequence[Poly]) -> Laurent:
    """Series of [0; quotients...] certified as far as the prefix determines it."""
    U, V = continuant([Poly([], quotients[0].p)] + list(quotients))
    floor = -2 * int(V.degree)
    s = Laurent.from_rational(U, V, floor)
    return Laurent(s.top, s.coeffs, s.p)


def square_relation_check(A, C, terms: int = 5) -> dict:
    """Check both squaring identities on ``terms`` quotients.

    (i) the square of the W1 root, rebuilt from its closed-form quotients,
        expands to Omega_inf;
    (ii) the square of [0, Omega_inf], rebuilt from an Omega prefix, expands to
        the closed-form sequence starting with -C + A^4.
    """
    A, C = _prep(A, C)
    a = int(A.degree)
    c = 0 if C.degree < 0 else int(C.degree)
    report: dict = {"A": format_poly(A), "C": format_poly(C), "terms": terms}

    # (i): enough W1 quotients to certify `terms` Omega entries (Omega degrees are at most ~3^k a)
    omega = None
    for depth in range(3, 12):
        if omega_length("E1", depth) >= terms + 1:
            omega = omega_build("E1", A, C, depth, depth_cap=max(depth, DEFAULT_DEPTH_CAP))
            break
    need = 2 * sum(int(q.degree) for q in omega.entries[: terms + 1]) + 1
    nb = 2
    while sum(w1_quotient_degree(a, c, k) for k in range(1, nb + 1)) * 2 < need + 2 * a:
        nb += 1
    beta = _cf_series_prefix(w1_quotients(A, C, nb))
    lhs1 = expand(beta * beta)
    got1 = list(lhs1.partials)
    mm1 = first_mismatch(got1, omega.entries)
    ok1 = lhs1.a0.is_zero() and mm1 is None and len(got1) >= terms
    report["omega_side"] = {
        "matched": len(got1) if mm1 is None else mm1,
        "first_mismatch": mm1,
        "ok": bool(ok1),
    }

    # (ii): an Omega prefix long enough to certify `terms` predicted quotients
    predicted = hyperquadratic_square_quotients(A, C, terms)
    need = 2 * sum(int(q.degree) for q in predicted[:-1]) + int(predicted[-1].degree) + 1
    depth = 2
    while True:
        om = omega_build("E1", A, C, depth, depth_cap=max(depth, DEFAULT_DEPTH_CAP))
        if 2 * sum(om.degrees()) >= need + 2 * int(om.entries[-1].degree):
            break
        depth += 1
    alpha = _cf_series_prefix(list(om.entries))
    lhs2 = expand(alpha * alpha, max_terms=terms)
    got2 = list(lhs2.partials)
    mm2 = first_mismatch(got2, predicted)
    ok2 = lhs2.a0.is_zero() and mm2 is None and len(got2) >= terms
    report["square_side"] = {
        "matched": len(got2) if mm2 is None else mm2,
        "first_mismatch": mm2,
        "omega_depth": depth,
        "ok": bool(ok2),
    }
    if mm2 is not None:
        report["square_side"]["values"] = [format_poly(got2[mm2]), format_poly(predicted[mm2])]
    if mm1 is not None:
        report["omega_side"]["values"] = [format_poly(got1[mm1]), format_poly(omega.entries[mm1])]
    report["ok"] = bool(ok1 and ok2)
    return report
