"""Slow, obviously-correct reference implementations used as test oracles.

Polynomials are plain lists of ints, ascending powers, reduced mod p with no
trailing zeros. Series are dicts {exponent: coefficient}. Nothing here touches
numpy or the package under test.
"""

P = 3


def norm(a, p=P):
    a = [x % p for x in a]
    while a and a[-1] == 0:
        a.pop()
    return a


def add(a, b, p=P):
    n = max(len(a), len(b))
    return norm([(a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n)], p)


def neg(a, p=P):
    return norm([-x for x in a], p)


def sub(a, b, p=P):
    return add(a, neg(b, p), p)


def mul(a, b, p=P):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return norm(out, p)


def divmod_(a, b, p=P):
    a, b = norm(a, p), norm(b, p)
    if not b:
        raise ZeroDivisionError
    inv = pow(b[-1], -1, p)
    r = list(a)
    q = [0] * max(0, len(a) - len(b) + 1)
    while len(r) >= len(b) and r:
        shift = len(r) - len(b)
        c = r[-1] * inv % p
        q[shift] = c
        for i, y in enumerate(b):
            r[i + shift] = (r[i + shift] - c * y) % p
        r = norm(r, p)
    return norm(q, p), r


def power(a, e, p=P):
    out = [1]
    for _ in range(e):
        out = mul(out, a, p)
    return out


def cf_value(quotients, p=P):
    """[a0; a1, ..., an] as (num, den), folded from the right with no recurrences."""
    num, den = list(quotients[-1]), [1]
    for a in reversed(quotients[:-1]):
        # a + 1/(num/den) = (a*num + den)/num
        num, den = add(mul(a, num, p), den, p), num
    return num, den


# -- series in 1/T, truncated below `floor` ------------------------------------


def series_from_poly(a):
    return {i: c for i, c in enumerate(a) if c}


def series_mul(x, y, floor, p=P):
    out = {}
    for e1, c1 in x.items():
        for e2, c2 in y.items():
            e = e1 + e2
            if e >= floor:
                out[e] = (out.get(e, 0) + c1 * c2) % p
    return {e: c for e, c in out.items() if c}


def series_div_poly(x, a, floor, p=P):
    """x / a for a polynomial a, by long division downward in powers of T."""
    a = norm(a, p)
    d = len(a) - 1
    inv = pow(a[-1], -1, p)
    rem = dict(x)
    out = {}
    top = max(rem) if rem else floor
    for e in range(top, floor + d - 1, -1):
        c = rem.get(e, 0) % p
        if not c:
            continue
        q = c * inv % p
        qe = e - d
        out[qe] = q
        for i, y in enumerate(a):
            k = qe + i
            rem[k] = (rem.get(k, 0) - q * y) % p
    return {e: c for e, c in out.items() if c and e >= floor}


def rational_series(num, den, floor, p=P):
    return series_div_poly(series_from_poly(num), den, floor, p)


def w1_fixed_point(A, C, floor, p=P):
    """Root of C x^4 - A x + 1 = 0 with |x| < 1 via x <- (C x^4 + 1)/A."""
    x = {}
    for _ in range(200):
        x2 = series_mul(x, x, floor - 4 * len(A), p)
        x4 = series_mul(x2, x2, floor - 4 * len(A), p)
        num = series_mul(series_from_poly(C), x4, floor - 4 * len(A), p)
        num[0] = (num.get(0, 0) + 1) % p
        new = series_div_poly({e: c for e, c in num.items() if c}, A, floor, p)
        if new == x:
            return x
        x = new
    raise RuntimeError("fixed point did not settle")
