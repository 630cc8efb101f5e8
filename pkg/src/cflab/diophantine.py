"""Approximation-exponent measurements.

All ratios and valuations are exact (``int`` or ``Fraction``). Comparisons
against 1 + sqrt(mu) or 2/sqrt(3) are done by squaring both sides, so no
floating point enters a pass/fail decision. Floats appear only in reports.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .cfrac import ContinuedFraction, convergents
from .closedform import SpecialConvergentSeq
from .gfpoly import Poly, format_poly
from .laurent import EquationSpec, Laurent, PrecisionExhausted

__all__ = [
    "MeasureEstimate",
    "measure_estimate",
    "predicted_nu",
    "valuation_ratios",
    "approximation_valuation",
    "liouville_check",
    "VolochCheck",
    "voloch_hypothesis_check",
    "exceeds_one_plus_sqrt",
    "lambda_bounds_check",
    "central_degree",
    "deg_v_before_central",
]


def _degrees(cf) -> list[int]:
    if isinstance(cf, ContinuedFraction):
        return cf.degrees()
    out = []
    for x in cf:
        out.append(int(x.degree) if isinstance(x, Poly) else int(x))
    return out


def _fmt(x: Fraction | None) -> str | None:
    if x is None:
        return None
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True)
class MeasureEstimate:
    """r_n = deg a_{n+1} / (deg a_1 + ... + deg a_n) for n = 1..N-1, kept exact."""

    ratios: tuple[Fraction, ...]
    n0: int
    predicted: Fraction | None = None

    @property
    def global_sup(self) -> Fraction:
        return max(self.ratios)

    @property
    def tail_sup(self) -> Fraction:
        return max(self.ratios[self.n0 - 1:])

    @property
    def estimate_global(self) -> Fraction:
        return 2 + self.global_sup

    @property
    def estimate_tail(self) -> Fraction:
        return 2 + self.tail_sup

    def window_sups(self, width: int) -> list[Fraction]:
        """2 + max ratio over consecutive windows of ``width`` indices."""
        return [2 + max(self.ratios[i:i + width]) for i in range(0, len(self.ratios) - width + 1, width)]

    def to_json(self, family=None, A=None, C=None, depth=None) -> dict:
        return {
            "family": family,
            "A": A,
            "C": C,
            "predicted_nu": None if self.predicted is None else float(self.predicted),
            "estimate_global": float(self.estimate_global),
            "estimate_tail": float(self.estimate_tail),
            "n0": self.n0,
            "depth": depth if depth is not None else len(self.ratios) + 1,
            "ratios": [_fmt(r) for r in self.ratios],
            "exact": {
                "predicted_nu": _fmt(self.predicted),
                "estimate_global": _fmt(self.estimate_global),
                "estimate_tail": _fmt(self.estimate_tail),
            },
        }


def measure_estimate(cf, n0: int | None = None, predicted: Fraction | None = None) -> MeasureEstimate:
    """Estimate nu = 2 + limsup r_n by the sup over all n and over n >= n0.

    ``cf`` may be a ContinuedFraction, a list of partial quotients a_1, a_2, ...
    or a list of their degrees.
    """
    d = _degrees(cf)
    if any(x < 1 for x in d):
        raise ValueError("partial quotients past index 0 must have positive degree")
    N = len(d)
    if n0 is None:
        n0 = max(1, N // 2)
    if n0 < 1 or N < n0 + 2:
        raise ValueError(f"need at least n0 + 2 = {n0 + 2} quotients, have {N}")
    ratios = []
    s = 0
    for n in range(1, N):
        s += d[n - 1]
        ratios.append(Fraction(d[n], s))
    return MeasureEstimate(tuple(ratios), n0, predicted)


def predicted_nu(eq: EquationSpec) -> Fraction | None:
    """The known exponent for a named equation, or None when no result applies."""
    if eq.family in ("E1", "E2", "MR"):
        return Fraction(2)
    if eq.family not in ("W1", "W2"):
        return None
    if eq.c_divides_a:
        return Fraction(4)
    a, c = int(eq.A.degree), int(eq.C.degree)
    if eq.family == "W1":
        return 4 - Fraction(c, a)
    gamma = 4 - Fraction(3 * c, a)
    return gamma if exceeds_one_plus_sqrt(gamma, Fraction(3)) else None


def approximation_valuation(alpha: Laurent, U: Poly, V: Poly) -> int:
    """v with |alpha - U/V| = |T|^-v, measured on certified coefficients."""
    diff = alpha - Laurent.from_rational(U, V, alpha.floor)
    if diff.is_zero_segment():
        raise PrecisionExhausted(
            f"alpha - U/V vanishes down to T^{alpha.floor}; more precision is needed"
        )
    return -diff.top


def valuation_ratios(alpha: Laurent, cf: ContinuedFraction) -> list[Fraction]:
    """Ratios (v_k - 2 deg V_k) / deg V_k for k = 1..n, from measured valuations.

    For every k with a_{k+1} known this equals r_k, which is what the
    consistency tests check.
    """
    table = convergents(cf)
    out = []
    for k in range(1, len(table)):
        U, V = table.numerators[k], table.denominators[k]
        try:
            v = approximation_valuation(alpha, U, V)
        except PrecisionExhausted:
            break
        dv = int(V.degree)
        out.append(Fraction(v - 2 * dv, dv))
    return out


def liouville_check(cf: ContinuedFraction, degree_bound: int, n0: int | None = None,
                    tol: Fraction = Fraction(1, 10)) -> dict:
    """Mahler's bound: |alpha - U/V| >= c |V|^-n for an algebraic alpha of degree n.

    Reports the implied constant as a log (max of v_k - n deg V_k) and whether
    the tail estimate stays within ``tol`` of n.
    """
    est = measure_estimate(cf, n0)
    d = cf.degrees()
    dv = 0
    worst = None
    for k in range(1, len(d)):
        dv += d[k - 1]
        v = 2 * dv + d[k]
        excess = v - degree_bound * dv
        worst = excess if worst is None else max(worst, excess)
    return {
        "degree_bound": degree_bound,
        "estimate_tail": float(est.estimate_tail),
        "estimate_global": float(est.estimate_global),
        "implied_log_c": worst,
        "ok": est.estimate_tail <= degree_bound + tol,
    }


# -- Voloch-type criterion -------------------------------------------------------


def exceeds_one_plus_sqrt(gamma: Fraction, mu: Fraction) -> bool:
    """gamma > 1 + sqrt(mu), decided exactly."""
    return gamma > 1 and (gamma - 1) ** 2 > mu


def _differences_fit(xs: Sequence[int], ys: Sequence[int]) -> tuple[Fraction, list[Fraction]]:
    slopes = [Fraction(ys[i + 1] - ys[i], xs[i + 1] - xs[i]) for i in range(len(xs) - 1)]
    return slopes[-1], slopes


@dataclass
class VolochCheck:
    q_degrees: list[int]
    valuations: list[int]
    mu: Fraction
    mu_steps: list[Fraction]
    log_lambda: Fraction
    gamma: Fraction
    gamma_steps: list[Fraction]
    log_rho: Fraction
    rho_residuals: list[Fraction]
    predicted_gamma: Fraction | None = None
    predicted_mu: Fraction | None = None

    @property
    def exact_fit(self) -> bool:
        return len(set(self.mu_steps)) == 1 and len(set(self.gamma_steps)) == 1 and not any(self.rho_residuals)

    @property
    def hypothesis_met(self) -> bool:
        return self.mu > 1 and exceeds_one_plus_sqrt(self.gamma, self.mu)

    @property
    def matches_prediction(self) -> bool | None:
        if self.predicted_gamma is None:
            return None
        ok = self.gamma == self.predicted_gamma
        if self.predicted_mu is not None:
            ok = ok and self.mu == self.predicted_mu
        return ok

    @property
    def status(self) -> str:
        if not self.hypothesis_met:
            return "hypothesis not met"
        return f"nu = {_fmt(self.gamma)}"

    def to_json(self) -> dict:
        return {
            "q_degrees": self.q_degrees,
            "valuations": self.valuations,
            "mu": _fmt(self.mu),
            "log_lambda": _fmt(self.log_lambda),
            "gamma": _fmt(self.gamma),
            "log_rho": _fmt(self.log_rho),
            "exact_fit": self.exact_fit,
            "hypothesis_met": self.hypothesis_met,
            "predicted_gamma": _fmt(self.predicted_gamma),
            "matches_prediction": self.matches_prediction,
            "status": self.status,
        }


def voloch_hypothesis_check(seq: SpecialConvergentSeq, root: Laurent,
                            predicted_gamma: Fraction | None = None,
                            predicted_mu: Fraction | None = None) -> VolochCheck:
    """Fit |Q_n| = lambda |Q_{n-1}|^mu and |root - P_n/Q_n| = rho |Q_n|^-gamma.

    mu and gamma come from consecutive differences, which are exact when the
    laws hold exactly; the constants are then averaged and their residuals kept.
    In degree terms: deg Q_n = mu deg Q_{n-1} + log lambda and
    v_n = gamma deg Q_n + log rho.
    """
    if len(seq) < 4:
        raise ValueError("need at least 4 convergent pairs")
    q = seq.q_degrees()
    v = [approximation_valuation(root, P, Q) for P, Q in seq.pairs]
    mu, mu_steps = _differences_fit(q[:-1], q[1:])
    lam_terms = [q[i] - mu * q[i - 1] for i in range(1, len(q))]
    log_lambda = sum(lam_terms, Fraction(0)) / len(lam_terms)
    gamma, gamma_steps = _differences_fit(q, v)
    rho_terms = [v[i] - gamma * q[i] for i in range(len(q))]
    log_rho = sum(rho_terms, Fraction(0)) / len(rho_terms)
    return VolochCheck(
        q_degrees=q,
        valuations=v,
        mu=mu,
        mu_steps=mu_steps,
        log_lambda=log_lambda,
        gamma=gamma,
        gamma_steps=gamma_steps,
        log_rho=log_rho,
        rho_residuals=[t - log_rho for t in rho_terms],
        predicted_gamma=predicted_gamma,
        predicted_mu=predicted_mu,
    )


# -- lambda bounds for the E1 family ----------------------------------------------


def central_degree(a: int, c: int, i: int) -> int:
    """Degree of the central quotient of Omega_{2i+1}: 2(3^i a - (3^i + (-1)^(i+1)) c / 4)."""
    return 2 * (3 ** i * a - (3 ** i + (-1) ** (i + 1)) // 4 * c)


def deg_v_before_central(a: int, c: int, i: int) -> Fraction:
    """deg V_{k_i - 1} = (3^(2i+1) - 2*3^i - 1)/2 (a - c/4) + (1 - (-1)^i) c/4."""
    return Fraction(3 ** (2 * i + 1) - 2 * 3 ** i - 1, 2) * (a - Fraction(c, 4)) + Fraction((1 - (-1) ** i) * c, 4)


def lambda_bounds_check(cf, A: Poly, C: Poly, depth: int, root: Laurent | None = None) -> dict:
    """Check both lambda bounds along the quotient stream of [0, Omega_inf].

    lambda_1: at V_{k_i - 1}, d_{k_i} >= (2/sqrt 3) sqrt(deg V), i.e. 3 d^2 >= 4 deg V.
    lambda_2: the smallest admissible constant is max d_{k+1} / sqrt(deg V_k)
    over k >= k_1 - 1; it is reported squared (exact) and as a float.
    When ``root`` is given the valuation at each V_{k_i - 1} is measured on the
    series instead of being read off the degrees.
    """
    qs = list(cf.partials) if isinstance(cf, ContinuedFraction) else list(cf)
    d = _degrees(qs)
    a = int(A.degree)
    c = 0 if C.degree < 0 else int(C.degree)
    prefix = [0]
    for x in d:
        prefix.append(prefix[-1] + x)  # prefix[k] = deg V_k
    table = convergents([Poly([], A.p)] + qs) if root is not None else None
    rows = []
    ks = []
    status = "ok"
    for i in range(1, depth + 1):
        target = central_degree(a, c, i)
        try:
            k = d.index(target) + 1
        except ValueError:
            status = f"central quotient of degree {target} (i = {i}) not found"
            break
        ks.append(k)
        dv = prefix[k - 1]
        val = 2 * dv + d[k - 1]
        if table is not None:
            val = approximation_valuation(root, table.numerators[k - 1], table.denominators[k - 1])
        excess = val - 2 * dv
        rows.append({
            "i": i,
            "k_i": k,
            "central_degree": target,
            "deg_V": dv,
            "deg_V_formula": _fmt(deg_v_before_central(a, c, i)),
            "formula_ok": Fraction(dv) == deg_v_before_central(a, c, i),
            "valuation": val,
            "lambda1_ok": 3 * excess * excess >= 4 * dv,
            "ratio_sq": _fmt(Fraction(excess * excess, dv)),
            "ratio": (excess * excess / dv) ** 0.5,
        })
    lam2_sq = None
    windows = []
    if ks:
        start = ks[0] - 1
        bounds = [kk - 1 for kk in ks] + [len(d)]
        for lo, hi in zip(bounds[:-1], bounds[1:]):
            vals = [Fraction(d[k] ** 2, prefix[k]) for k in range(max(lo, 1), min(hi, len(d)))]
            if vals:
                windows.append(max(vals))
        all_vals = [Fraction(d[k] ** 2, prefix[k]) for k in range(max(start, 1), len(d))]
        lam2_sq = max(all_vals)
    four_thirds = Fraction(4, 3)
    return {
        "A": format_poly(A),
        "C": format_poly(C),
        "status": status,
        "central": rows,
        "lambda1_ok": bool(rows) and all(r["lambda1_ok"] for r in rows) and status == "ok",
        "lambda2_min_sq": _fmt(lam2_sq),
        "lambda2_min": None if lam2_sq is None else float(lam2_sq) ** 0.5,
        "lambda2_window_sq": [_fmt(w) for w in windows],
        "lambda2_exceeds_lambda1": lam2_sq is not None and lam2_sq > four_thirds,
        "lambda2_threshold_index": ks[0] - 1 if ks else None,
    }
