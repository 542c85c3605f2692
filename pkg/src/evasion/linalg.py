"""Exact rational linear algebra.

Everything downstream (cone feasibility, coboundary kernels, certificates)
rides on this module, so all arithmetic is `fractions.Fraction`: the kernel
statements we certify are exact equalities and any floating tolerance would
manufacture wrong verdicts.

Matrices are small immutable dataclasses; the elimination and simplex
routines work on sparse rows (dict of column -> Fraction) so that the
banded systems produced by sheaves over a stratified line stay cheap.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

ZERO = Fraction(0)
ONE = Fraction(1)

Vec = tuple[Fraction, ...]
SparseRow = dict[int, Fraction]


def vec(items) -> Vec:
    """Coerce an iterable of int/str/Fraction into an exact vector."""
    return tuple(Fraction(x) for x in items)


def parse_rational(value) -> Fraction:
    """Parse "p", "p/q" or a plain int. Floats are rejected: they would
    silently contaminate the exact pipeline."""
    if isinstance(value, bool):
        raise ValueError(f"not a rational: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"unsupported rational literal: {value!r}") from exc
    raise ValueError(f"unsupported rational value: {value!r} (floats are not accepted)")


def format_rational(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


@dataclass(frozen=True)
class Matrix:
    """Dense row-major rational matrix."""

    rows: int
    cols: int
    entries: tuple[Fraction, ...]

    def __post_init__(self):
        if self.rows < 0 or self.cols < 0:
            raise ValueError("negative matrix dimension")
        if len(self.entries) != self.rows * self.cols:
            raise ValueError(
                f"matrix shape {self.rows}x{self.cols} needs "
                f"{self.rows * self.cols} entries, got {len(self.entries)}"
            )

    @classmethod
    def from_rows(cls, rows_data) -> "Matrix":
        rows_data = [list(r) for r in rows_data]
        nrows = len(rows_data)
        ncols = len(rows_data[0]) if rows_data else 0
        if any(len(r) != ncols for r in rows_data):
            raise ValueError("ragged rows")
        flat = tuple(Fraction(x) for r in rows_data for x in r)
        return cls(nrows, ncols, flat)

    @classmethod
    def identity(cls, n: int) -> "Matrix":
        return cls(n, n, tuple(ONE if i == j else ZERO for i in range(n) for j in range(n)))

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "Matrix":
        return cls(rows, cols, (ZERO,) * (rows * cols))

    def at(self, i: int, j: int) -> Fraction:
        return self.entries[i * self.cols + j]

    def row(self, i: int) -> Vec:
        return self.entries[i * self.cols : (i + 1) * self.cols]

    def col(self, j: int) -> Vec:
        return tuple(self.entries[i * self.cols + j] for i in range(self.rows))

    def mul_vec(self, v) -> Vec:
        if len(v) != self.cols:
            raise ValueError(f"dimension mismatch: {self.rows}x{self.cols} @ {len(v)}")
        out = []
        for i in range(self.rows):
            base = i * self.cols
            acc = ZERO
            for j, x in enumerate(v):
                if x:
                    acc += self.entries[base + j] * x
            out.append(acc)
        return tuple(out)

    def to_sparse_rows(self) -> list[SparseRow]:
        out: list[SparseRow] = []
        for i in range(self.rows):
            base = i * self.cols
            out.append({j: self.entries[base + j] for j in range(self.cols) if self.entries[base + j]})
        return out

    @classmethod
    def from_sparse_rows(cls, rows: list[SparseRow], ncols: int) -> "Matrix":
        flat = []
        for r in rows:
            flat.extend(r.get(j, ZERO) for j in range(ncols))
        return cls(len(rows), ncols, tuple(flat))


def kernel_sparse(rows: list[SparseRow], ncols: int) -> list[Vec]:
    """Exact basis of {x : Mx = 0} over the rationals.

    Forward elimination to row echelon form (the pivot column is cleared
    only from the rows still waiting, so banded inputs such as sheaf
    coboundaries in time order never cascade), then one back-substitution
    pass per free column.
    """
    work = [dict(r) for r in rows if r]
    echelon: list[tuple[int, SparseRow]] = []  # (pivot column, normalised row)
    pivot_cols: set[int] = set()
    for col in range(ncols):
        pidx = None
        for i, r in enumerate(work):
            if col in r:
                pidx = i
                break
        if pidx is None:
            continue
        prow = work.pop(pidx)
        pv = prow[col]
        if pv != 1:
            prow = {j: v / pv for j, v in prow.items()}
        for r in work:
            f = r.get(col)
            if f:
                _row_sub(r, prow, f)
        echelon.append((col, prow))
        pivot_cols.add(col)
    basis: list[Vec] = []
    for free in range(ncols):
        if free in pivot_cols:
            continue
        x = [ZERO] * ncols
        x[free] = ONE
        for col, prow in reversed(echelon):
            acc = ZERO
            for j, v in prow.items():
                if j != col and x[j]:
                    acc += v * x[j]
            if acc:
                x[col] = -acc
        basis.append(tuple(x))
    return basis


def kernel_basis(A: Matrix) -> list[Vec]:
    """Exact rational basis of the null space of A; empty iff A is injective."""
    return kernel_sparse(A.to_sparse_rows(), A.cols)


def _row_sub(target: SparseRow, source: SparseRow, factor: Fraction) -> None:
    # target -= factor * source, dropping exact zeros
    for j, v in source.items():
        nv = target.get(j, ZERO) - factor * v
        if nv:
            target[j] = nv
        else:
            target.pop(j, None)


def solve_nonneg(rows: list[SparseRow], ncols: int, rhs: list[Fraction]):
    """Decide {x >= 0 : Mx = b} by an exact phase-one simplex (Bland's rule).

    Returns (x, None) with an exact feasible point, or (None, u) with a
    Farkas vector satisfying u'M <= 0 componentwise and u'b > 0. Bland's
    pivoting rule guarantees termination despite degeneracy.
    """
    m = len(rows)
    if len(rhs) != m:
        raise ValueError("rhs length does not match row count")
    tableau: list[SparseRow] = []
    b: list[Fraction] = []
    flips: list[int] = []
    for i in range(m):
        r = dict(rows[i])
        bb = rhs[i]
        if bb < 0:
            r = {j: -v for j, v in r.items()}
            bb = -bb
            flips.append(-1)
        else:
            flips.append(1)
        r[ncols + i] = ONE  # artificial variable
        tableau.append(r)
        b.append(bb)
    basis = [ncols + i for i in range(m)]
    # reduced costs for phase-one objective (minimise the artificial sum)
    obj: SparseRow = {}
    for r in tableau:
        for j, v in r.items():
            if j < ncols:
                nv = obj.get(j, ZERO) - v
                if nv:
                    obj[j] = nv
                else:
                    obj.pop(j, None)
    objval = sum(b, ZERO)

    while True:
        entering = None
        for j, v in obj.items():
            if v < 0 and (entering is None or j < entering):
                entering = j
        if entering is None:
            break
        best = None
        for i in range(m):
            a = tableau[i].get(entering)
            if a and a > 0:
                key = (b[i] / a, basis[i])
                if best is None or key < best[0]:
                    best = (key, i)
        if best is None:
            raise AssertionError("phase-one objective cannot be unbounded")
        p = best[1]
        prow = tableau[p]
        pv = prow[entering]
        if pv != 1:
            prow = {j: v / pv for j, v in prow.items()}
            tableau[p] = prow
            b[p] /= pv
        bp = b[p]
        for i in range(m):
            if i == p:
                continue
            f = tableau[i].get(entering)
            if f:
                _row_sub(tableau[i], prow, f)
                if bp:
                    b[i] -= f * bp
        f = obj.get(entering)
        if f:
            _row_sub(obj, prow, f)
            objval += f * bp  # reduced cost is negative: the artificial sum drops
        basis[p] = entering

    if objval == 0:
        xs = [ZERO] * ncols
        for i, bv in enumerate(basis):
            if bv < ncols:
                xs[bv] = b[i]
        return xs, None
    if objval < 0:
        raise AssertionError("phase-one objective went negative")
    u = [(ONE - obj.get(ncols + i, ZERO)) * flips[i] for i in range(m)]
    return None, u


def solve_square_sparse(rows: list[SparseRow], rhs: list[Fraction]) -> list[Fraction]:
    """Solve a nonsingular sparse square system exactly (Gauss-Jordan)."""
    n = len(rows)
    work = [dict(r) for r in rows]
    b = list(rhs)
    where: dict[int, int] = {}  # unknown -> equation solved for it
    for e in range(n):
        row = work[e]
        if not row:
            raise AssertionError("singular system")
        col = min(row)
        pv = row[col]
        if pv != 1:
            work[e] = row = {j: v / pv for j, v in row.items()}
            b[e] /= pv
        for o in range(n):
            if o != e:
                f = work[o].get(col)
                if f:
                    _row_sub(work[o], row, f)
                    if b[e]:
                        b[o] -= f * b[e]
        where[col] = e
    if len(where) != n:
        raise AssertionError("singular system")
    return [b[where[i]] for i in range(n)]


def kernel_ray(rows: list[SparseRow], ncols: int):
    """Find a nonzero nonnegative kernel point of M, or a strict dual vector.

    Runs a bounded-variable simplex (Bland's rule) on max sum(x) over
    {Mx = 0, 0 <= x <= 1}, starting from the artificial basis pinned to
    [0, 0]. Two things keep banded inputs near-linear: artificial columns
    are never materialised in the tableau (the infeasibility dual is
    recovered at the end from one solve against the final basis), and the
    search stops at the first strictly positive objective value, since the
    simplex point is primal-feasible throughout and any positive mass
    already scales to a witness.

    Returns (x, None) with x >= 0, sum(x) = 1, Mx = 0 exactly, or (None, u)
    with (M'u)_j >= 1 for every column j (the optimum-zero duals).
    """
    m = len(rows)
    tableau = [dict(r) for r in rows]
    basis = [ncols + i for i in range(m)]  # artificial ids, columns kept implicit
    values = [ZERO] * m
    at_upper = [False] * ncols
    obj = {j: ONE for j in range(ncols)}  # reduced costs of max sum(x)
    z = ZERO

    def upper(var: int) -> Fraction:
        return ONE if var < ncols else ZERO  # artificials are pinned at zero

    while z == 0:
        entering = None
        for j, d in obj.items():
            if (d > 0 and not at_upper[j]) or (d < 0 and at_upper[j]):
                if entering is None or j < entering:
                    entering = j
        if entering is None:
            break
        sigma = -1 if at_upper[entering] else 1
        column = [(i, a) for i in range(m) if (a := tableau[i].get(entering))]
        # ratio test against basic bounds, plus the entering variable's own flip
        best_theta = ONE
        best_tie = entering
        best_row = None
        best_hits_upper = False
        for i, a in column:
            step = sigma * a
            if step > 0:
                theta = values[i] / step
                hits_upper = False
            else:
                theta = (upper(basis[i]) - values[i]) / (-step)
                hits_upper = True
            if theta < best_theta or (theta == best_theta and basis[i] < best_tie):
                best_theta, best_tie, best_row, best_hits_upper = theta, basis[i], i, hits_upper
        d = obj[entering]
        z += (d if sigma > 0 else -d) * best_theta
        if best_theta:
            for i, a in column:
                values[i] -= sigma * a * best_theta
        if best_row is None:
            at_upper[entering] = not at_upper[entering]
            continue
        p = best_row
        leaving = basis[p]
        if leaving < ncols:
            at_upper[leaving] = best_hits_upper
        prow = tableau[p]
        pv = prow[entering]
        if pv != 1:
            prow = {j: v / pv for j, v in prow.items()}
            tableau[p] = prow
        prow_items = list(prow.items())
        for i, f in column:
            if i == p:
                continue
            row = tableau[i]
            for j, v in prow_items:
                nv = row.get(j, ZERO) - f * v
                if nv:
                    row[j] = nv
                else:
                    row.pop(j, None)
        f = obj.get(entering)
        if f:
            _row_sub(obj, prow, f)
        basis[p] = entering
        values[p] = (upper(entering) if at_upper[entering] else ZERO) + sigma * best_theta
        at_upper[entering] = False  # basic now; flag only meaningful when nonbasic

    if z > 0:
        xs = [ZERO] * ncols
        for j in range(ncols):
            if at_upper[j]:
                xs[j] = ONE
        for i, var in enumerate(basis):
            if var < ncols:
                xs[var] = values[i]
        total = sum(xs, ZERO)
        if total <= 0:
            raise AssertionError("positive objective with nonpositive support")
        return [v / total for v in xs], None
    # optimum is zero: the duals of the final basis certify M'u >= 1
    columns: list[SparseRow] = [{} for _ in range(ncols)]
    for i, r in enumerate(rows):
        for j, v in r.items():
            columns[j][i] = v
    eqs: list[SparseRow] = []
    rhs: list[Fraction] = []
    for var in basis:
        if var < ncols:
            eqs.append(dict(columns[var]))
            rhs.append(ONE)
        else:
            eqs.append({var - ncols: ONE})
            rhs.append(ZERO)
    return None, solve_square_sparse(eqs, rhs)
