"""Exact and modular linear algebra kernels.

Two lanes back every dimension computed by the package:

* a sparse, fraction-free row-echelon reduction with exact scalars
  (rationals or prime-field residues), used wherever actual vectors are
  extracted and as the fallback of last resort;
* dense Gaussian elimination modulo a word-sized prime, vectorized with
  numpy and blocked so trailing updates run as exact float64 matrix
  products.

For an integer matrix, the modular rank is always a *lower* bound on the
rational rank, and exact vectors that are independent modulo p are
independent over the rationals.  Callers combine these one-sided bounds
into certificates; nothing modular is ever reported as exact without one.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd

import numpy as np

# Primes just above 10^6: small enough that panel updates of width 128
# stay exact in float64, large enough that rank drops are freak events.
CERT_PRIMES = (1_000_003, 999_983, 1_000_033, 999_979, 1_000_039, 999_961)

_PANEL = 128


def _integerize(row: dict) -> dict[int, int]:
    """Scale a rational row to coprime integers (row scaling preserves RREF)."""
    if not row:
        return {}
    lcm = 1
    for v in row.values():
        den = v.denominator if isinstance(v, Fraction) else 1
        lcm = lcm * den // gcd(lcm, den)
    out = {}
    for c, v in row.items():
        n = int(v * lcm) if isinstance(v, Fraction) else v * lcm
        if n:
            out[c] = n
    g = 0
    for n in out.values():
        g = gcd(g, n)
    if g > 1:
        out = {c: n // g for c, n in out.items()}
    return out


def _rref_rows_qq(rows: list[dict]) -> tuple[list[int], list[dict]]:
    """Reduced row echelon form over Q via fraction-free integer pivoting."""
    echelon: dict[int, dict[int, int]] = {}
    for row in rows:
        row = _integerize(row)
        while row:
            lead = min(row)
            piv = echelon.get(lead)
            if piv is None:
                if row[lead] < 0:
                    row = {c: -v for c, v in row.items()}
                echelon[lead] = row
                break
            # row := piv[lead]*row - row[lead]*piv, then strip content
            a, b = piv[lead], row[lead]
            merged = {c: a * v for c, v in row.items()}
            for c, v in piv.items():
                acc = merged.get(c, 0) - b * v
                if acc:
                    merged[c] = acc
                else:
                    merged.pop(c, None)
            g = 0
            for v in merged.values():
                g = gcd(g, v)
            row = {c: v // g for c, v in merged.items()} if g > 1 else merged
    pivots = sorted(echelon)
    # back-substitute to clear pivot columns above, fraction-free
    for i in range(len(pivots) - 1, -1, -1):
        pc = pivots[i]
        piv = echelon[pc]
        for j in range(i):
            target = echelon[pivots[j]]
            b = target.get(pc)
            if b is None:
                continue
            a = piv[pc]
            merged = {c: a * v for c, v in target.items()}
            for c, v in piv.items():
                acc = merged.get(c, 0) - b * v
                if acc:
                    merged[c] = acc
                else:
                    merged.pop(c, None)
            g = 0
            for v in merged.values():
                g = gcd(g, v)
            echelon[pivots[j]] = {c: v // g for c, v in merged.items()} if g > 1 else merged
    reduced = []
    for pc in pivots:
        row = echelon[pc]
        lead = row[pc]
        reduced.append({c: Fraction(v, lead) for c, v in row.items()})
    return pivots, reduced


def _rref_rows_fp(rows: list[dict], p: int) -> tuple[list[int], list[dict]]:
    """Reduced row echelon form over GF(p), sparse rows."""
    echelon: dict[int, dict[int, int]] = {}
    for row in rows:
        row = {c: v % p for c, v in row.items() if v % p}
        while row:
            lead = min(row)
            piv = echelon.get(lead)
            if piv is None:
                inv = pow(row[lead], -1, p)
                echelon[lead] = {c: v * inv % p for c, v in row.items()}
                break
            b = row[lead]
            merged = dict(row)
            for c, v in piv.items():
                acc = (merged.get(c, 0) - b * v) % p
                if acc:
                    merged[c] = acc
                else:
                    merged.pop(c, None)
            row = merged
    pivots = sorted(echelon)
    for i in range(len(pivots) - 1, -1, -1):
        pc = pivots[i]
        piv = echelon[pc]
        for j in range(i):
            target = echelon[pivots[j]]
            b = target.get(pc)
            if b is None:
                continue
            for c, v in piv.items():
                acc = (target.get(c, 0) - b * v) % p
                if acc:
                    target[c] = acc
                else:
                    target.pop(c, None)
    return pivots, [echelon[pc] for pc in pivots]


def rref_rows(rows: list[dict], field) -> tuple[list[int], list[dict]]:
    """Canonical RREF of the row space; returns (pivot columns, reduced rows)."""
    if field.kind == "fp":
        return _rref_rows_fp(rows, field.p)
    return _rref_rows_qq(rows)


def kernel_basis(rows: list[dict], ncols: int, field) -> list[dict]:
    """Canonical basis of the solution space of the homogeneous system.

    ``rows`` are equations over ``ncols`` unknowns.  The returned vectors
    form the reduced row echelon basis of the kernel (leading entry 1,
    earliest pivot first), which makes the output deterministic.
    """
    pivots, reduced = rref_rows(rows, field)
    pivot_set = set(pivots)
    free_cols = [c for c in range(ncols) if c not in pivot_set]
    one = field.from_int(1)
    vectors = []
    for fc in free_cols:
        vec = {fc: one}
        for pc, row in zip(pivots, reduced):
            v = row.get(fc)
            if v is not None:
                vec[pc] = field.neg(v)
        vectors.append(vec)
    # the free-column basis is not echelon in general; canonicalize it
    _, canonical = rref_rows(vectors, field)
    return canonical


# --- dense modular elimination -----------------------------------------


def modp_rank(matrix: np.ndarray, p: int, target: int | None = None) -> int:
    """Rank of ``matrix`` over GF(p) by blocked Gaussian elimination.

    ``matrix`` is int64 and is destroyed.  Stops early once ``target``
    pivots are found.  Trailing updates use float64 matrix products,
    exact because panel_width * (p-1)^2 < 2^53.
    """
    a = matrix
    rows, cols = a.shape
    if rows == 0 or cols == 0:
        return 0
    np.mod(a, p, out=a)
    panel = _PANEL
    if panel * (p - 1) ** 2 >= 2**53:
        panel = max(1, 2**53 // (p - 1) ** 2)
    r = 0
    c0 = 0
    while c0 < cols and r < rows:
        c1 = min(c0 + panel, cols)
        r0 = r
        piv_cols: list[int] = []
        # panel factorization, multipliers stored in place (LAPACK style)
        for c in range(c0, c1):
            col = a[r:, c]
            nz = np.nonzero(col)[0]
            if nz.size == 0:
                continue
            i = r + int(nz[0])
            if i != r:
                a[[r, i], :] = a[[i, r], :]
            inv = pow(int(a[r, c]), -1, p)
            below = a[r + 1 :, c]
            nzb = np.nonzero(below)[0]
            if nzb.size:
                mult = below[nzb] * inv % p
                a[r + 1 + nzb, c + 1 : c1] = (
                    a[r + 1 + nzb, c + 1 : c1] - mult[:, None] * a[r, c + 1 : c1]
                ) % p
                below[nzb] = mult
            piv_cols.append(c)
            r += 1
            if target is not None and r >= target:
                return r
            if r >= rows:
                break
        npiv = r - r0
        if npiv and c1 < cols:
            # forward-substitute the unit lower triangle over the trailing
            # columns, in place: after step j, row j holds its U12 values
            trailing = a[r0:r, c1:]
            for j in range(1, npiv):
                lrow = a[r0 + j, piv_cols[:j]]
                if lrow.any():
                    upd = np.rint(
                        lrow.astype(np.float64) @ trailing[:j].astype(np.float64)
                    ).astype(np.int64)
                    trailing[j] = (trailing[j] - upd) % p
            if r < rows:
                l21 = a[r:, piv_cols]
                if l21.any():
                    upd = np.rint(
                        l21.astype(np.float64) @ trailing.astype(np.float64)
                    ).astype(np.int64)
                    a[r:, c1:] = (a[r:, c1:] - upd) % p
        c0 = c1
    return r


def rows_to_modp_dense(rows: list[dict], ncols: int, p: int) -> np.ndarray:
    """Reduce exact sparse rows (int or Fraction entries) into a dense int64 matrix mod p.

    Raises ZeroDivisionError if a denominator vanishes mod p (bad prime).
    """
    out = np.zeros((len(rows), ncols), dtype=np.int64)
    for i, row in enumerate(rows):
        for c, v in row.items():
            if isinstance(v, Fraction):
                if v.denominator == 1:
                    out[i, c] = v.numerator % p
                else:
                    out[i, c] = v.numerator * pow(v.denominator % p, -1, p) % p
            else:
                out[i, c] = v % p
    return out
