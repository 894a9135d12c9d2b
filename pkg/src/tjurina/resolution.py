"""Minimal graded free resolution data of the Milnor algebra of a plane curve.

Everything here is degree-by-degree exact linear algebra on the evaluation
map (a, b, c) |-> a*f_x + b*f_y + c*f_z.  Its cokernel dimensions give the
Hilbert function of the Milnor algebra M(f) = S/J_f, whose eventual
constant value is the total Tjurina number; its kernels are the syzygy
spaces whose minimal generators carry the exponents d_1 <= ... <= d_m.

Over the rationals every reported dimension is certified: the modular
rank of an exact matrix bounds its rational rank from below, and exact
syzygy multiples that stay independent modulo p bound the kernel from
below.  When the two bounds meet the value is exact; when they do not,
the computation escalates to exact sparse elimination instead of
guessing.  Over a prime field the modular numbers are the answer by
definition of that (probabilistic) mode.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import comb

import numpy as np

from .errors import (
    DegreeMismatch,
    InternalInconsistency,
    NotReduced,
    NotStabilized,
    PreconditionViolated,
)
from .linalg import CERT_PRIMES, kernel_basis, modp_rank, rows_to_modp_dense, rref_rows
from .polyring import (
    HomogPoly,
    monomial_basis,
    monomial_mul,
    partial_derivatives,
    poly_add,
    poly_mul,
)

# Exact-elimination fallback is refused above this many matrix cells; a
# certificate that fails to close on a matrix this large means several
# independent primes all dropped rank, i.e. something is genuinely wrong.
_EXACT_CELL_LIMIT = 1_200_000


class SyzygyVector:
    """A relation (a, b, c) with a*f_x + b*f_y + c*f_z = 0, all components of one degree."""

    __slots__ = ("degree", "components")

    def __init__(self, components, partials):
        a, b, c = components
        if not (a.degree == b.degree == c.degree):
            raise DegreeMismatch("syzygy components must share a degree")
        total = HomogPoly.zero(a.field, a.degree + partials[0].degree)
        for comp, part in zip(components, partials):
            total = poly_add(total, poly_mul(comp, part))
        if not total.is_zero:
            raise InternalInconsistency("vector is not a syzygy of the partials")
        self.degree = a.degree
        self.components = (a, b, c)

    def __repr__(self):
        return f"SyzygyVector(deg={self.degree}, {tuple(str(c) for c in self.components)})"


class _Relation:
    """A relation (h_1, ..., h_m) among syzygy generators: sum h_i g_i = 0."""

    __slots__ = ("degree", "parts")

    def __init__(self, degree: int, parts: tuple[HomogPoly, ...], generators):
        sums = [HomogPoly.zero(parts[0].field, degree) for _ in range(3)]
        for h, g in zip(parts, generators):
            if h.is_zero:
                continue
            for s in range(3):
                sums[s] = poly_add(sums[s], poly_mul(h, g.components[s]))
        if not all(s.is_zero for s in sums):
            raise InternalInconsistency("vector is not a relation among the generators")
        self.degree = degree
        self.parts = parts


@dataclass(frozen=True)
class ResolutionData:
    """Skeleton of the minimal resolution: exponents, second-syzygy twists, epsilons.

    ``second_twists`` stores each twist as the magnitude c_j of S(-c_j),
    ascending; ``epsilons`` holds eps_j = c_j - d - d_{j+2} + 1.  Both are
    empty exactly when the curve is free (m = 2).
    """

    degree: int
    exponents: tuple[int, ...]
    generators: tuple[SyzygyVector, ...]
    second_twists: tuple[int, ...]
    epsilons: tuple[int, ...]

    @property
    def m(self) -> int:
        return len(self.exponents)

    def first_module_shifts(self) -> tuple[int, ...]:
        return (1 - self.degree,) * 3

    def second_module_shifts(self) -> tuple[int, ...]:
        return tuple(1 - self.degree - di for di in self.exponents)

    def third_module_shifts(self) -> tuple[int, ...]:
        return tuple(-c for c in self.second_twists)

    def validate(self) -> None:
        """Check every structural invariant; raise InternalInconsistency on failure."""
        d = self.degree
        exps = self.exponents
        m = self.m
        problems = []
        if m < 2:
            problems.append(f"m = {m} < 2")
        if any(e < 1 for e in exps):
            problems.append(f"non-positive exponent in {exps}")
        if list(exps) != sorted(exps):
            problems.append(f"exponents not sorted: {exps}")
        if len(self.generators) != m:
            problems.append("generator count disagrees with exponents")
        if any(g.degree != e for g, e in zip(self.generators, exps)):
            problems.append("generator degrees disagree with exponents")
        if len(self.second_twists) != max(m - 2, 0) or len(self.epsilons) != max(m - 2, 0):
            problems.append("second-syzygy count must be m - 2")
        if list(self.second_twists) != sorted(self.second_twists):
            problems.append(f"twists not sorted: {self.second_twists}")
        for j, (c, eps) in enumerate(zip(self.second_twists, self.epsilons)):
            if eps != c - d - exps[j + 2] + 1:
                problems.append(f"epsilon_{j+1} inconsistent with twist {c}")
            if eps < 1:
                problems.append(f"epsilon_{j+1} = {eps} < 1")
        if m >= 2 and exps[0] + exps[1] != d - 1 + sum(self.epsilons):
            problems.append(
                f"d_1 + d_2 = {exps[0] + exps[1]} != d - 1 + sum(eps) = {d - 1 + sum(self.epsilons)}"
            )
        for j in range(m - 3):
            if exps[j + 2] + self.epsilons[j] > exps[j + 3] + self.epsilons[j + 1]:
                problems.append(f"degree chain fails at j = {j+1}")
        if m >= 3 and exps[2] > d - 1:
            problems.append(f"d_3 = {exps[2]} > d - 1 = {d-1}")
        if exps and exps[-1] > 2 * d - 4:
            problems.append(f"d_m = {exps[-1]} > 2d - 4 = {2*d-4}")
        if problems:
            raise InternalInconsistency("; ".join(problems))


def _binom2(n: int) -> int:
    """C(n, 2) with the truncation C(n, 2) = 0 for n < 2."""
    return n * (n - 1) // 2 if n >= 2 else 0


def predicted_hilbert_dim(degree: int, exponents, second_twists, k: int) -> int:
    """Degree-k Hilbert dimension implied by the resolution skeleton (alternating sum)."""
    d = degree
    value = _binom2(k + 2) - 3 * _binom2(k + 3 - d)
    for di in exponents:
        value += _binom2(k + 3 - d - di)
    for c in second_twists:
        value -= _binom2(k - c + 2)
    return value


class CurveAnalysis:
    """Per-curve computation state: partials, syzygy generators, resolution, Hilbert cache."""

    def __init__(self, f: HomogPoly):
        if f.is_zero:
            raise PreconditionViolated("curve equation must be nonzero")
        if f.degree < 1:
            raise PreconditionViolated("curve equation must have positive degree")
        self.f = f
        self.field = f.field
        self.d = f.degree
        self.partials = partial_derivatives(f)
        self._index_cache: dict[int, dict] = {}
        self._hilbert: dict[int, int] = {}
        self._generators: tuple[SyzygyVector, ...] | None = None
        self._tau: int | None = None
        self._stabilized_checked = False
        self._resolution: ResolutionData | None = None

    # --- bases and index maps -------------------------------------------

    def _index(self, k: int) -> dict:
        idx = self._index_cache.get(k)
        if idx is None:
            idx = {mono: i for i, mono in enumerate(monomial_basis(k))}
            self._index_cache[k] = idx
        return idx

    def _primes(self):
        if self.field.kind == "fp":
            return (self.field.p,)
        return CERT_PRIMES

    # --- the evaluation map S_kappa^3 -> S_k, k = kappa + d - 1 ----------

    def _eval_equations(self, k: int) -> tuple[list[dict], int]:
        """Sparse equation rows of the evaluation map into S_k; returns (rows, ncols)."""
        kappa = k - self.d + 1
        block = comb(kappa + 2, 2)
        idx = self._index(k)
        rows: list[dict] = [dict() for _ in range(comb(k + 2, 2))]
        for s in range(3):
            coeffs = self.partials[s].coeffs
            for j, mu in enumerate(monomial_basis(kappa)):
                col = s * block + j
                for mono, coef in coeffs.items():
                    rows[idx[monomial_mul(mu, mono)]][col] = coef
        return rows, 3 * block

    def _eval_dense(self, k: int, q: int) -> np.ndarray:
        kappa = k - self.d + 1
        block = comb(kappa + 2, 2)
        idx = self._index(k)
        out = np.zeros((comb(k + 2, 2), 3 * block), dtype=np.int64)
        for s in range(3):
            reduced = [(mono, _reduce_mod(v, q)) for mono, v in self.partials[s].coeffs.items()]
            for j, mu in enumerate(monomial_basis(kappa)):
                col = s * block + j
                for mono, cv in reduced:
                    out[idx[monomial_mul(mu, mono)], col] = cv
        return out

    # --- syzygy multiples (exact vectors inside the kernel) --------------

    def _syzygy_multiple_rows(self, kappa: int, gens) -> list[dict]:
        """One exact row per (generator, monomial) pair, in domain coordinates at degree kappa."""
        block = comb(kappa + 2, 2)
        idx = self._index(kappa)
        rows = []
        for g in gens:
            shift = kappa - g.degree
            if shift < 0:
                continue
            for mu in monomial_basis(shift):
                row: dict[int, object] = {}
                for s in range(3):
                    for mono, coef in g.components[s].coeffs.items():
                        row[s * block + idx[monomial_mul(mu, mono)]] = coef
                rows.append(row)
        return rows

    # --- certified ranks --------------------------------------------------

    def _eval_rank(self, k: int) -> int:
        """Rank of the evaluation map into S_k; certified over the rationals."""
        kappa = k - self.d + 1
        if kappa < 0:
            return 0
        ncols = 3 * comb(kappa + 2, 2)
        if self.field.kind == "fp":
            return modp_rank(self._eval_dense(k, self.field.p), self.field.p)
        gens = self.ensure_generators()
        candidates = self._syzygy_multiple_rows(kappa, gens)
        for q in self._primes():
            try:
                r_q = modp_rank(self._eval_dense(k, q), q)
                if candidates:
                    k_lo = modp_rank(
                        rows_to_modp_dense(candidates, ncols, q), q, target=ncols - r_q
                    )
                else:
                    k_lo = 0
            except ZeroDivisionError:
                continue
            if r_q + k_lo == ncols:
                return r_q
        rows, _ = self._eval_equations(k)
        if len(rows) * ncols > _EXACT_CELL_LIMIT:
            raise InternalInconsistency(
                f"rank certificate failed at degree {k} and the matrix "
                f"({len(rows)} x {ncols}) is too large for exact elimination"
            )
        pivots, _ = rref_rows(rows, self.field)
        return len(pivots)

    def hilbert_dim(self, k: int) -> int:
        """Exact dimension of the degree-k piece of M(f) = S/J_f."""
        if k < 0:
            return 0
        cached = self._hilbert.get(k)
        if cached is None:
            cached = comb(k + 2, 2) - self._eval_rank(k)
            self._hilbert[k] = cached
        return cached

    # --- stage 1: minimal syzygy generators ------------------------------

    def ensure_generators(self) -> tuple[SyzygyVector, ...]:
        if self._generators is None:
            gens: list[SyzygyVector] = []
            for kappa in range(1, max(2 * self.d - 4, 0) + 1):
                gens.extend(self._new_generators_at(kappa, gens))
            self._generators = tuple(gens)
        return self._generators

    def _new_generators_at(self, kappa: int, gens) -> list[SyzygyVector]:
        k = kappa + self.d - 1
        ncols = 3 * comb(kappa + 2, 2)
        # modular prepass: new generators cannot hide from it, because the
        # modular kernel is at least the rational one and the modular span
        # of the exact multiples is at most the rational one
        candidates = self._syzygy_multiple_rows(kappa, gens)
        for q in self._primes():
            try:
                dimker_q = ncols - modp_rank(self._eval_dense(k, q), q)
                span_q = (
                    modp_rank(rows_to_modp_dense(candidates, ncols, q), q)
                    if candidates
                    else 0
                )
            except ZeroDivisionError:
                continue
            if dimker_q == span_q:
                return []
            break
        # something new (or a freak prime): settle it exactly
        rows, _ = self._eval_equations(k)
        kernel = kernel_basis(rows, ncols, self.field)
        span_pivots = set(rref_rows(candidates, self.field)[0]) if candidates else set()
        block = comb(kappa + 2, 2)
        fresh = []
        for vec in kernel:
            if min(vec) in span_pivots:
                continue
            fresh.append(SyzygyVector(self._coords_to_components(vec, kappa, block), self.partials))
        return fresh

    def _coords_to_components(self, vec: dict, kappa: int, block: int):
        basis = monomial_basis(kappa)
        tables: list[dict] = [{}, {}, {}]
        for col, value in vec.items():
            tables[col // block][basis[col % block]] = value
        return tuple(HomogPoly(self.field, kappa, t) for t in tables)

    # --- Tjurina number via Hilbert-function stabilization ----------------

    def stabilized_value(self) -> int:
        """Eventual constant value of k |-> hilbert_dim(k), or NotStabilized.

        Policy: scan windows of three consecutive equal values, first
        window starting at k = 3d - 6, last one ending at the hard cap 5d.
        """
        if self._tau is not None:
            return self._tau
        if self._stabilized_checked:
            raise NotStabilized(f"Hilbert function not constant by degree {5 * self.d}")
        start = max(0, 3 * self.d - 6)
        cap = 5 * self.d
        for k in range(start, cap - 1):
            v = self.hilbert_dim(k)
            if v == self.hilbert_dim(k + 1) and v == self.hilbert_dim(k + 2):
                self._tau = v
                return v
        self._stabilized_checked = True
        raise NotStabilized(f"Hilbert function not constant by degree {cap}")

    def reduced(self) -> bool:
        try:
            self.stabilized_value()
            return True
        except NotStabilized:
            return False

    # --- stage 2: second syzygies and the full skeleton -------------------

    def resolution(self) -> ResolutionData:
        if self._resolution is not None:
            return self._resolution
        if self.d < 3:
            raise PreconditionViolated(f"resolution requires degree >= 3, got {self.d}")
        if not self.reduced():
            raise NotReduced("input curve is not reduced (Hilbert function does not stabilize)")
        gens = self.ensure_generators()
        m = len(gens)
        if m < 2:
            raise InternalInconsistency(f"found only {m} syzygy generators")
        exponents = tuple(g.degree for g in gens)
        if m == 2:
            res = ResolutionData(self.d, exponents, gens, (), ())
        else:
            relations: list[_Relation] = []
            for k in range(exponents[1], 3 * self.d - 4):
                relations.extend(self._new_relations_at(k, gens, relations))
            if len(relations) != m - 2:
                raise InternalInconsistency(
                    f"expected {m - 2} second syzygies, found {len(relations)}"
                )
            twists = tuple(r.degree + self.d - 1 for r in relations)
            epsilons = tuple(
                c - self.d - exponents[j + 2] + 1 for j, c in enumerate(twists)
            )
            res = ResolutionData(self.d, exponents, gens, twists, epsilons)
        res.validate()
        self._resolution = res
        return res

    def _relation_layout(self, k: int, gens):
        """Column layout of the map (+)_i S_{k - d_i} -> S_k^3."""
        offsets = []
        total = 0
        for g in gens:
            width = comb(k - g.degree + 2, 2) if k >= g.degree else 0
            offsets.append(total)
            total += width
        return offsets, total

    def _relation_equations(self, k: int, gens) -> tuple[list[dict], int]:
        offsets, ncols = self._relation_layout(k, gens)
        block = comb(k + 2, 2)
        idx = self._index(k)
        rows: list[dict] = [dict() for _ in range(3 * block)]
        for i, g in enumerate(gens):
            if k < g.degree:
                continue
            for j, mu in enumerate(monomial_basis(k - g.degree)):
                col = offsets[i] + j
                for s in range(3):
                    for mono, coef in g.components[s].coeffs.items():
                        row = s * block + idx[monomial_mul(mu, mono)]
                        acc = rows[row].get(col)
                        rows[row][col] = coef if acc is None else self.field.add(acc, coef)
        return rows, ncols

    def _relation_multiple_rows(self, k: int, gens, relations) -> list[dict]:
        offsets, _ = self._relation_layout(k, gens)
        indices = {
            g.degree: self._index(k - g.degree) for g in gens if k >= g.degree
        }
        rows = []
        for rel in relations:
            shift = k - rel.degree
            if shift < 0:
                continue
            for mu in monomial_basis(shift):
                row: dict[int, object] = {}
                for i, h in enumerate(rel.parts):
                    if h.is_zero or k < gens[i].degree:
                        continue
                    idx = indices[gens[i].degree]
                    for mono, coef in h.coeffs.items():
                        row[offsets[i] + idx[monomial_mul(mu, mono)]] = coef
                rows.append(row)
        return rows

    def _new_relations_at(self, k: int, gens, relations) -> list[_Relation]:
        offsets, ncols = self._relation_layout(k, gens)
        if ncols == 0:
            return []
        candidates = self._relation_multiple_rows(k, gens, relations)
        eqs, _ = self._relation_equations(k, gens)
        for q in self._primes():
            try:
                dimker_q = ncols - modp_rank(rows_to_modp_dense(eqs, ncols, q), q)
                span_q = (
                    modp_rank(rows_to_modp_dense(candidates, ncols, q), q)
                    if candidates
                    else 0
                )
            except ZeroDivisionError:
                continue
            if dimker_q == span_q:
                return []
            break
        kernel = kernel_basis(eqs, ncols, self.field)
        span_pivots = set(rref_rows(candidates, self.field)[0]) if candidates else set()
        fresh = []
        for vec in kernel:
            if min(vec) in span_pivots:
                continue
            fresh.append(_Relation(k, self._coords_to_relation_parts(vec, k, gens, offsets), gens))
        return fresh

    def _coords_to_relation_parts(self, vec: dict, k: int, gens, offsets):
        widths = [comb(k - g.degree + 2, 2) if k >= g.degree else 0 for g in gens]
        bases = {g.degree: monomial_basis(k - g.degree) for g in gens if k >= g.degree}
        tables: list[dict] = [dict() for _ in gens]
        for col, value in vec.items():
            i = _block_of(col, offsets, widths)
            tables[i][bases[gens[i].degree][col - offsets[i]]] = value
        parts = []
        for g, t in zip(gens, tables):
            degree = k - g.degree if k >= g.degree else 0
            parts.append(HomogPoly(self.field, degree, t))
        return tuple(parts)

    # --- Euler-characteristic cross-check ---------------------------------

    def consistency_check(self, res: ResolutionData) -> bool:
        for k in range(0, 5 * self.d + 1):
            predicted = predicted_hilbert_dim(res.degree, res.exponents, res.second_twists, k)
            if self.hilbert_dim(k) != predicted:
                return False
        return True


def _block_of(col: int, offsets: list[int], widths: list[int]) -> int:
    for i in range(len(offsets) - 1, -1, -1):
        if col >= offsets[i] and widths[i]:
            return i
    raise IndexError(col)


def _reduce_mod(value, q: int) -> int:
    from fractions import Fraction

    if isinstance(value, Fraction):
        if value.denominator == 1:
            return value.numerator % q
        return value.numerator * pow(value.denominator % q, -1, q) % q
    return int(value) % q


@lru_cache(maxsize=64)
def _analysis(f: HomogPoly) -> CurveAnalysis:
    return CurveAnalysis(f)


def analysis(f: HomogPoly) -> CurveAnalysis:
    """Memoized per-curve computation context."""
    return _analysis(f)


# --- public operations ----------------------------------------------------


def hilbert_dim(f: HomogPoly, k: int) -> int:
    """dim of the degree-k piece of S/J_f (0 for negative k)."""
    if k < 0:
        return 0
    return analysis(f).hilbert_dim(k)


def tjurina_oracle(f: HomogPoly) -> int:
    """Total Tjurina number as the stabilized value of the Hilbert function."""
    if f.degree < 3:
        raise PreconditionViolated(f"requires degree >= 3, got {f.degree}")
    return analysis(f).stabilized_value()


def is_reduced(f: HomogPoly) -> bool:
    """True iff the Hilbert function of S/J_f stabilizes under the scan policy."""
    return analysis(f).reduced()


def syzygy_basis(f: HomogPoly, k: int) -> list[SyzygyVector]:
    """Canonical basis of the degree-k syzygies of the partials of f."""
    if k < 0:
        raise PreconditionViolated("syzygy degree must be non-negative")
    ctx = analysis(f)
    ncols = 3 * comb(k + 2, 2)
    gens = ctx.ensure_generators()
    candidates = ctx._syzygy_multiple_rows(k, gens)
    pivots, reduced = rref_rows(candidates, ctx.field)
    certified = False
    for q in ctx._primes():
        try:
            r_q = modp_rank(ctx._eval_dense(k + ctx.d - 1, q), q)
        except ZeroDivisionError:
            continue
        if r_q + len(pivots) == ncols:
            certified = True
            break
    if not certified:
        rows, _ = ctx._eval_equations(k + ctx.d - 1)
        if len(rows) * ncols > _EXACT_CELL_LIMIT:
            raise InternalInconsistency(
                f"syzygy basis certificate failed at degree {k} on a matrix too large "
                "for exact elimination"
            )
        reduced = kernel_basis(rows, ncols, ctx.field)
    block = comb(k + 2, 2)
    return [
        SyzygyVector(ctx._coords_to_components(vec, k, block), ctx.partials)
        for vec in reduced
    ]


def minimal_resolution(f: HomogPoly) -> ResolutionData:
    """Exponents, generators and second-syzygy twists of the minimal resolution."""
    return analysis(f).resolution()


def resolution_consistency_check(res: ResolutionData, f: HomogPoly) -> bool:
    """True iff the resolution's alternating sum reproduces hilbert_dim at every k <= 5d."""
    return analysis(f).consistency_check(res)
