"""Finitely generated rational cones and certified feasibility queries.

A cone is given by generators in an ambient rational vector space; a cone is
*positive* when it meets its own negation only trivially. The feasibility
primitive is the positive-kernel query: does the kernel of a matrix contain
a nonzero nonnegative point? By Stiemke's alternative exactly one of two
things exists, and we always return the corresponding exact object:

  * a witness x with x >= 0, sum(x) = 1 and Ax = 0, or
  * a certificate y with (A'y)_j > 0 for every column j.

Both objects are re-checkable by third parties (see is_valid_certificate),
which is what makes the downstream verdicts trustworthy.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

from evasion.linalg import Matrix, ONE, Vec, ZERO, kernel_ray, solve_nonneg, vec

FEASIBLE = "feasible"
INFEASIBLE = "infeasible"


@dataclass(frozen=True)
class FeasibilityResult:
    status: str
    witness: Vec | None = None
    certificate: Vec | None = None

    @property
    def feasible(self) -> bool:
        return self.status == FEASIBLE


@dataclass(frozen=True)
class PolyhedralCone:
    """Cone generated by finitely many nonzero rational vectors.

    Generators need not be extreme rays; redundancy is allowed. A cone with
    no generators is the trivial cone {0}.
    """

    ambient_dim: int
    generators: tuple[Vec, ...]
    labels: tuple[str, ...]

    def __post_init__(self):
        if self.ambient_dim < 0:
            raise ValueError("negative ambient dimension")
        if len(self.labels) != len(self.generators):
            raise ValueError("labels must parallel generators")
        for g in self.generators:
            if len(g) != self.ambient_dim:
                raise ValueError("generator dimension mismatch")
            if not any(g):
                raise ValueError("zero vector is not a valid generator")

    @classmethod
    def make(cls, generators, labels=None, ambient_dim=None) -> "PolyhedralCone":
        gens = tuple(vec(g) for g in generators)
        if ambient_dim is None:
            if not gens:
                raise ValueError("ambient_dim required for a generator-free cone")
            ambient_dim = len(gens[0])
        if labels is None:
            labels = tuple(f"g{i}" for i in range(len(gens)))
        return cls(ambient_dim, gens, tuple(labels))

    @classmethod
    def free(cls, labels) -> "PolyhedralCone":
        """Nonnegative orthant on one basis vector per label."""
        labels = tuple(labels)
        n = len(labels)
        gens = tuple(tuple(ONE if i == j else ZERO for j in range(n)) for i in range(n))
        return cls(n, gens, labels)

    @cached_property
    def is_free(self) -> bool:
        if self.ambient_dim != len(self.generators):
            return False
        n = self.ambient_dim
        return all(
            g[j] == (1 if i == j else 0) for i, g in enumerate(self.generators) for j in range(n)
        )

    def generator_matrix(self) -> Matrix:
        """Columns are the generators (ambient_dim x num_generators)."""
        n = len(self.generators)
        flat = tuple(self.generators[j][i] for i in range(self.ambient_dim) for j in range(n))
        return Matrix(self.ambient_dim, n, flat)


def lp_positive_kernel(A: Matrix) -> FeasibilityResult:
    """Find a nonzero nonnegative kernel point of A, or certify none exists.

    The nonnegative kernel cone is probed on the unit l1 slice sum(x) = 1,
    which excludes the zero vector; Bland pivoting makes the outcome exact
    and deterministic. The returned witness/certificate is verified before
    being handed back.
    """
    if A.cols < 1:
        raise ValueError("lp_positive_kernel needs at least one column")
    return decide_positive_kernel(A.to_sparse_rows(), A.cols)


def decide_positive_kernel(rows: list[SparseRow], ncols: int) -> FeasibilityResult:
    """Sparse-row entry point of lp_positive_kernel; verifies its own output."""
    x, u = kernel_ray(rows, ncols)
    if x is not None:
        witness = tuple(x)
        if any(c < 0 for c in witness) or sum(witness) != 1:
            raise AssertionError("witness is not a normalised nonnegative vector")
        for r in rows:
            if sum((v * witness[j] for j, v in r.items()), ZERO):
                raise AssertionError("witness is not in the kernel")
        return FeasibilityResult(FEASIBLE, witness=witness)
    certificate = tuple(u)
    if not _certifies(rows, ncols, certificate):
        raise AssertionError("simplex produced an invalid infeasibility certificate")
    return FeasibilityResult(INFEASIBLE, certificate=certificate)


def _certifies(rows: list[SparseRow], ncols: int, y: Vec) -> bool:
    against = [ZERO] * ncols
    for i, r in enumerate(rows):
        yi = y[i]
        if yi:
            for j, v in r.items():
                against[j] += v * yi
    return all(c > 0 for c in against)


def is_valid_certificate(A: Matrix, y) -> bool:
    """True iff every component of A'y is strictly positive.

    Such a y proves {x >= 0, x != 0, Ax = 0} empty: pairing Ax = 0 with y
    gives sum_j (A'y)_j x_j = 0 with strictly positive weights.
    """
    y = vec(y)
    if len(y) != A.rows:
        raise ValueError(f"certificate length {len(y)} does not match {A.rows} rows")
    return _certifies(A.to_sparse_rows(), A.cols, y)


def cone_membership(v, K: PolyhedralCone) -> bool:
    """Is v a nonnegative combination of K's generators?

    The zero vector is always a member (the empty combination); callers who
    need the strict convention that positive cones exclude zero must test
    for zero separately.
    """
    v = vec(v)
    if len(v) != K.ambient_dim:
        raise ValueError(f"vector dim {len(v)} does not match ambient dim {K.ambient_dim}")
    if K.is_free:
        return all(c >= 0 for c in v)
    if not any(v):
        return True
    if not K.generators:
        return False
    ngens = len(K.generators)
    rows = []
    for d in range(K.ambient_dim):
        rows.append({g: K.generators[g][d] for g in range(ngens) if K.generators[g][d]})
    x, _ = solve_nonneg(rows, ngens, list(v))
    return x is not None


def is_positive_cone(K: PolyhedralCone) -> bool:
    """True iff K meets -K only in the origin.

    Equivalent formulation used here: no nonnegative, l1-normalised
    combination of generators hits zero. Cones whose generators are all
    componentwise nonnegative sit inside an orthant and are positive
    without any search.
    """
    if not K.generators:
        return True
    if all(all(c >= 0 for c in g) for g in K.generators):
        return True
    return not lp_positive_kernel(K.generator_matrix()).feasible
