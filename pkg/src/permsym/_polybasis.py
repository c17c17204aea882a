"""Sparse multivariate polynomials and exact Hermite basis changes.

Polynomials are dicts mapping exponent tuples to float coefficients.  The
Hermite coefficient tables are exact integers (and their inverses exact
rationals), so the only floating input anywhere is the orthogonal matrix
entries fed into :func:`linear_substitution`.
"""

from __future__ import annotations

import functools
from fractions import Fraction

Poly = dict[tuple[int, ...], float]

_COEFF_CHOP = 1e-14  # drop terms from pure float cancellation noise


def hermite_coefficients(n: int) -> tuple[int, ...]:
    """Physicists' Hermite polynomial H_n as ascending integer coefficients.

    Satisfies H_{n+1}(q) = 2q H_n(q) - 2n H_{n-1}(q).
    """
    if n < 0:
        raise ValueError(f"Hermite degree must be >= 0, got {n}")
    prev: list[int] = [1]
    if n == 0:
        return (1,)
    cur = [0, 2]
    for k in range(1, n):
        nxt = [0] + [2 * c for c in cur]
        for i, c in enumerate(prev):
            nxt[i] -= 2 * k * c
        prev, cur = cur, nxt
    return tuple(cur)


@functools.lru_cache(maxsize=None)
def _monomial_to_hermite(max_deg: int) -> tuple[tuple[Fraction, ...], ...]:
    """Row m holds the exact expansion q^m = sum_a T[m][a] H_a(q).

    Obtained by inverting the triangular integer Hermite coefficient matrix
    with rationals.
    """
    # H[a][i] = coefficient of q^i in H_a
    H = [hermite_coefficients(a) for a in range(max_deg + 1)]
    T = [[Fraction(0)] * (max_deg + 1) for _ in range(max_deg + 1)]
    for m in range(max_deg + 1):
        # peel off Hermite components from the top degree downwards
        residue = [Fraction(0)] * (m + 1)
        residue[m] = Fraction(1)
        for a in range(m, -1, -1):
            lead = residue[a]
            if lead == 0:
                continue
            coeff = lead / H[a][a]
            T[m][a] = coeff
            for i, h in enumerate(H[a]):
                residue[i] -= coeff * h
        if any(residue):
            raise AssertionError("Hermite triangularization failed")
    return tuple(tuple(row) for row in T)


def poly_add_inplace(acc: Poly, p: Poly, factor: float = 1.0) -> None:
    for e, c in p.items():
        acc[e] = acc.get(e, 0.0) + c * factor


def poly_mul(p: Poly, q: Poly) -> Poly:
    out: Poly = {}
    for e1, c1 in p.items():
        for e2, c2 in q.items():
            e = tuple(a + b for a, b in zip(e1, e2))
            out[e] = out.get(e, 0.0) + c1 * c2
    return out


def poly_chop(p: Poly, tol: float = _COEFF_CHOP) -> Poly:
    if not p:
        return p
    scale = max(abs(c) for c in p.values())
    if scale == 0.0:
        return {}
    return {e: c for e, c in p.items() if abs(c) > tol * scale}


def hermite_product(pattern: tuple[int, ...]) -> Poly:
    """prod_i H_{pattern[i]}(q_i) as a sparse polynomial in len(pattern) vars."""
    nvars = len(pattern)
    out: Poly = {(0,) * nvars: 1.0}
    for var, deg in enumerate(pattern):
        coeffs = hermite_coefficients(deg)
        univ: Poly = {}
        for power, c in enumerate(coeffs):
            if c == 0:
                continue
            e = [0] * nvars
            e[var] = power
            univ[tuple(e)] = float(c)
        out = poly_mul(out, univ)
    return out


def linear_substitution(p: Poly, rows) -> Poly:
    """Substitute variable i -> sum_j rows[i][j] * x_j and expand.

    ``rows`` is indexable as rows[i][j]; the output polynomial has
    len(rows[0]) variables.
    """
    nvars_out = len(rows[0])
    # cache powers of each linear form as they are needed
    powers: dict[tuple[int, int], Poly] = {}

    def form_power(var: int, exp: int) -> Poly:
        key = (var, exp)
        if key in powers:
            return powers[key]
        if exp == 0:
            out: Poly = {(0,) * nvars_out: 1.0}
        elif exp == 1:
            out = {}
            for j, w in enumerate(rows[var]):
                if w == 0.0:
                    continue
                e = [0] * nvars_out
                e[j] = 1
                out[tuple(e)] = float(w)
        else:
            out = poly_mul(form_power(var, exp - 1), form_power(var, 1))
        powers[key] = out
        return out

    result: Poly = {}
    for exps, coeff in p.items():
        term: Poly = {(0,) * nvars_out: coeff}
        for var, exp in enumerate(exps):
            if exp:
                term = poly_mul(term, form_power(var, exp))
        poly_add_inplace(result, term)
    return poly_chop(result)


def hermite_expansion(p: Poly) -> dict[tuple[int, ...], float]:
    """Expand a polynomial over products of Hermite polynomials.

    Returns coefficients e such that p = sum_pattern e[pattern] *
    prod_i H_{pattern_i}(q_i).  Exact rational conversion tables, float
    accumulation.
    """
    if not p:
        return {}
    max_deg = max((max(e) if e else 0) for e in p)
    T = _monomial_to_hermite(max_deg)
    out: dict[tuple[int, ...], float] = {}

    def rec(exps: tuple[int, ...], var: int, pattern: tuple[int, ...], weight: float):
        if var == len(exps):
            out[pattern] = out.get(pattern, 0.0) + weight
            return
        m = exps[var]
        for a in range(m % 2, m + 1, 2):   # q^m only hits same-parity H_a
            t = T[m][a]
            if t:
                rec(exps, var + 1, pattern + (a,), weight * float(t))

    for exps, coeff in p.items():
        rec(exps, 0, (), coeff)
    return {pat: c for pat, c in out.items() if c != 0.0}
