"""Cellular sheaves of cones on a stratified real line.

The base space is the time axis, stratified by finitely many vertices into
vertices v1..vk and open edges e1..e{k+1} (e1 and e{k+1} unbounded). A cone
sheaf assigns a positive polyhedral cone to every cell and a linear cone map
from each vertex stalk into its two incident edge stalks.

Global sections are the nonzero families of vertex-stalk elements agreeing
on every shared edge. Agreement is encoded as the kernel of one signed block
matrix (rows: precompact edge stalks; columns: vertex stalk generators; the
left endpoint of an edge enters negatively, the right endpoint positively;
unbounded edges contribute no rows since they have noncompact closure).
Writing each vertex element in generator coordinates turns "nonzero section
exists" into a positive-kernel LP.
"""

from __future__ import annotations

from bisect import bisect_left
from dataclasses import dataclass
from fractions import Fraction

from evasion.cones import (
    INFEASIBLE,
    FeasibilityResult,
    PolyhedralCone,
    cone_membership,
    decide_positive_kernel,
    is_positive_cone,
)
from evasion.linalg import Matrix, SparseRow, Vec, ZERO, kernel_sparse

CellLabel = tuple[str, str]  # (cell id, generator label)


@dataclass(frozen=True)
class Stratification:
    """Strictly increasing critical times; k times induce k vertices and k+1 edges."""

    vertex_times: tuple[Fraction, ...]

    def __post_init__(self):
        ts = self.vertex_times
        if any(ts[i] >= ts[i + 1] for i in range(len(ts) - 1)):
            raise ValueError("vertex times must be strictly increasing")

    @classmethod
    def make(cls, times) -> "Stratification":
        return cls(tuple(Fraction(t) for t in times))

    @property
    def k(self) -> int:
        return len(self.vertex_times)

    @property
    def edge_count(self) -> int:
        return self.k + 1

    def vertex_id(self, i: int) -> str:
        return f"v{i + 1}"

    def edge_id(self, j: int) -> str:
        return f"e{j + 1}"

    def find_edge(self, t: Fraction) -> int:
        """Index of the open edge containing t; error if t is a vertex time."""
        pos = bisect_left(self.vertex_times, t)
        if pos < self.k and self.vertex_times[pos] == t:
            raise ValueError(f"t={t} is a vertex time, not interior to an edge")
        return pos


@dataclass(frozen=True)
class ConeSheaf:
    """Stalks plus restriction matrices; vertex i maps left into edge i and
    right into edge i+1. Restriction matrices act on ambient coordinates."""

    strat: Stratification
    vertex_stalks: tuple[PolyhedralCone, ...]
    edge_stalks: tuple[PolyhedralCone, ...]
    left_maps: tuple[Matrix, ...]
    right_maps: tuple[Matrix, ...]

    def __post_init__(self):
        k = self.strat.k
        if len(self.vertex_stalks) != k:
            raise ValueError(f"expected {k} vertex stalks, got {len(self.vertex_stalks)}")
        if len(self.edge_stalks) != k + 1:
            raise ValueError(f"expected {k + 1} edge stalks, got {len(self.edge_stalks)}")
        if len(self.left_maps) != k or len(self.right_maps) != k:
            raise ValueError("need one left and one right restriction per vertex")
        for i in range(k):
            for M, j in ((self.left_maps[i], i), (self.right_maps[i], i + 1)):
                if M.rows != self.edge_stalks[j].ambient_dim or M.cols != self.vertex_stalks[i].ambient_dim:
                    raise ValueError(
                        f"restriction {self.strat.vertex_id(i)}->{self.strat.edge_id(j)} "
                        f"has shape {M.rows}x{M.cols}, expected "
                        f"{self.edge_stalks[j].ambient_dim}x{self.vertex_stalks[i].ambient_dim}"
                    )

    def incidences(self):
        """Yield (vertex index, edge index, matrix) for every vertex/edge incidence."""
        for i in range(self.strat.k):
            yield i, i, self.left_maps[i]
            yield i, i + 1, self.right_maps[i]


@dataclass(frozen=True)
class SheafViolation:
    vertex: str | None
    edge: str | None
    generator: str | None
    message: str


@dataclass(frozen=True)
class SheafReport:
    ok: bool
    violations: tuple[SheafViolation, ...]


class SheafValidationError(ValueError):
    def __init__(self, report: SheafReport):
        self.report = report
        lines = "; ".join(v.message for v in report.violations[:5])
        super().__init__(f"invalid cone sheaf: {lines}")


@dataclass(frozen=True)
class GlobalSections:
    """Coboundary of a cone sheaf in generator coordinates, plus the decision.

    Columns are vertex-stalk generators, rows are ambient coordinates of
    precompact edge stalks (for free stalks those coincide with labelled
    generators). kernel/decision are None when only the matrix was assembled.
    """

    coboundary: Matrix
    row_labels: tuple[CellLabel, ...]
    column_labels: tuple[CellLabel, ...]
    kernel: tuple[Vec, ...] | None = None
    decision: FeasibilityResult | None = None


def validate_sheaf(S: ConeSheaf) -> SheafReport:
    """Check every stalk is a positive cone and every restriction is a cone map."""
    violations: list[SheafViolation] = []
    for i, stalk in enumerate(S.vertex_stalks):
        if not is_positive_cone(stalk):
            vid = S.strat.vertex_id(i)
            violations.append(SheafViolation(vid, None, None, f"stalk over {vid} is not a positive cone"))
    for j, stalk in enumerate(S.edge_stalks):
        if not is_positive_cone(stalk):
            eid = S.strat.edge_id(j)
            violations.append(SheafViolation(None, eid, None, f"stalk over {eid} is not a positive cone"))
    for i, j, M in S.incidences():
        vid, eid = S.strat.vertex_id(i), S.strat.edge_id(j)
        target = S.edge_stalks[j]
        for g, gen in enumerate(S.vertex_stalks[i].generators):
            image = M.mul_vec(gen)
            if not cone_membership(image, target):
                label = S.vertex_stalks[i].labels[g]
                violations.append(
                    SheafViolation(vid, eid, label, f"image of {vid}.{label} under {vid}->{eid} leaves the edge cone")
                )
    return SheafReport(not violations, tuple(violations))


def _assemble_sparse(S: ConeSheaf):
    """Sparse rows of the substituted coboundary D*G, with row/column labels."""
    strat = S.strat
    col_labels: list[CellLabel] = []
    col_offsets: list[int] = []
    for i, stalk in enumerate(S.vertex_stalks):
        col_offsets.append(len(col_labels))
        vid = strat.vertex_id(i)
        col_labels.extend((vid, lab) for lab in stalk.labels)
    rows: list[SparseRow] = []
    row_labels: list[CellLabel] = []
    for j in range(1, strat.k):  # precompact edges only; unbounded maps are zeroed out
        stalk = S.edge_stalks[j]
        eid = strat.edge_id(j)
        if stalk.is_free:
            coord_labels = stalk.labels
        else:
            coord_labels = tuple(f"x{d}" for d in range(stalk.ambient_dim))
        base = len(rows)
        for d in range(stalk.ambient_dim):
            row_labels.append((eid, coord_labels[d]))
            rows.append({})
        # left endpoint enters with -, right endpoint with +
        for vi, M, sign in ((j - 1, S.right_maps[j - 1], -1), (j, S.left_maps[j], 1)):
            offset = col_offsets[vi]
            for g, gen in enumerate(S.vertex_stalks[vi].generators):
                image = M.mul_vec(gen)
                for d, val in enumerate(image):
                    if val:
                        rows[base + d][offset + g] = val if sign > 0 else -val
    return rows, tuple(row_labels), tuple(col_labels)


def _ensure_valid(S: ConeSheaf) -> None:
    report = validate_sheaf(S)
    if not report.ok:
        raise SheafValidationError(report)


def _normalise(S: ConeSheaf) -> ConeSheaf:
    # A vertex-free stratification carries no generator columns, which would
    # misreport a nonempty constant section as infeasible; one synthetic
    # vertex with identity restrictions is sheaf-equivalent and fixes this.
    return refine(S, Fraction(0)) if S.strat.k == 0 else S


def assemble_coboundary(S: ConeSheaf) -> GlobalSections:
    """Labelled coboundary matrix only; kernel and decision left unset."""
    S = _normalise(S)
    _ensure_valid(S)
    rows, row_labels, col_labels = _assemble_sparse(S)
    return GlobalSections(
        coboundary=Matrix.from_sparse_rows(rows, len(col_labels)),
        row_labels=row_labels,
        column_labels=col_labels,
    )


def global_sections(S: ConeSheaf) -> GlobalSections:
    """Decide whether the sheaf has a nonzero global section.

    Feasible: the witness lists nonnegative generator coordinates, one block
    per vertex, summing to one, whose induced edge values agree everywhere.
    Infeasible: the certificate is a strict dual vector over the coboundary
    rows (vacuous when no vertex carries any generator).
    """
    S = _normalise(S)
    _ensure_valid(S)
    rows, row_labels, col_labels = _assemble_sparse(S)
    ncols = len(col_labels)
    kernel = tuple(kernel_sparse(rows, ncols))
    cob = Matrix.from_sparse_rows(rows, ncols)
    if ncols == 0:
        # no generator anywhere: only the zero section exists, vacuous certificate
        decision = FeasibilityResult(INFEASIBLE, certificate=(ZERO,) * len(rows))
    else:
        decision = decide_positive_kernel(rows, ncols)
    return GlobalSections(
        coboundary=cob,
        row_labels=row_labels,
        column_labels=col_labels,
        kernel=kernel,
        decision=decision,
    )


def refine(S: ConeSheaf, t) -> ConeSheaf:
    """Insert a vertex at time t inside an open edge.

    The new vertex copies the stalk of the edge it subdivides and restricts
    by the identity into both daughter edges, so the sheaf of sections is
    unchanged up to the relabelling of cells.
    """
    t = Fraction(t)
    j = S.strat.find_edge(t)
    stalk = S.edge_stalks[j]
    ident = Matrix.identity(stalk.ambient_dim)
    times = list(S.strat.vertex_times)
    times.insert(j, t)
    vertex_stalks = list(S.vertex_stalks)
    vertex_stalks.insert(j, stalk)
    edge_stalks = list(S.edge_stalks)
    edge_stalks[j : j + 1] = [stalk, stalk]
    left_maps = list(S.left_maps)
    left_maps.insert(j, ident)
    right_maps = list(S.right_maps)
    right_maps.insert(j, ident)
    return ConeSheaf(
        strat=Stratification(tuple(times)),
        vertex_stalks=tuple(vertex_stalks),
        edge_stalks=tuple(edge_stalks),
        left_maps=tuple(left_maps),
        right_maps=tuple(right_maps),
    )
