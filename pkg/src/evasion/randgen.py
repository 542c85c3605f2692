"""Seeded random instances for fuzzing and property tests.

Shared by the test suite and the experiment scripts so both draw from the
same distribution. Everything takes an explicit `random.Random`; seeding is
the caller's business (the tests honour the EVASION_SEED environment
variable).
"""

from __future__ import annotations

from fractions import Fraction
from random import Random

from evasion.cones import PolyhedralCone
from evasion.geometry import Box, Scene, validate_scene
from evasion.linalg import Matrix, ONE, ZERO
from evasion.sheaf import ConeSheaf, Stratification


def random_function_like_sheaf(rng: Random, max_vertices: int = 6, max_gens: int = 4) -> ConeSheaf:
    """Free-cone sheaf with total 0/1 function-like restrictions.

    Every stalk is a nonempty orthant and every vertex generator maps to
    exactly one generator on each side: the class where the combinatorial
    section sweep and the LP must agree.
    """
    k = rng.randint(1, max_vertices)
    strat = Stratification(tuple(Fraction(i) for i in range(k)))
    edge_sizes = [rng.randint(1, max_gens) for _ in range(k + 1)]
    vertex_sizes = [rng.randint(1, max_gens) for _ in range(k)]
    edge_stalks = tuple(PolyhedralCone.free([f"g{i}" for i in range(n)]) for n in edge_sizes)
    vertex_stalks = tuple(PolyhedralCone.free([f"g{i}" for i in range(n)]) for n in vertex_sizes)

    def random_map(nv: int, ne: int) -> Matrix:
        entries = [[ZERO] * nv for _ in range(ne)]
        for c in range(nv):
            entries[rng.randrange(ne)][c] = ONE
        return Matrix.from_rows(entries)

    left = tuple(random_map(vertex_sizes[i], edge_sizes[i]) for i in range(k))
    right = tuple(random_map(vertex_sizes[i], edge_sizes[i + 1]) for i in range(k))
    return ConeSheaf(strat, vertex_stalks, edge_stalks, left, right)


def _random_time(rng: Random) -> Fraction:
    return Fraction(rng.randint(0, 24), rng.choice((1, 2, 2)))


def random_scene(rng: Random, max_boxes: int = 5) -> Scene:
    """Random valid scene over a fixed window.

    Boxes are a mix of full-width walls, full-height walls, loose rectangles
    and instantaneous blackouts; candidates whose coverage disconnects are
    re-rolled so the result always satisfies the scene contract.
    """
    window = Scene.make((0, 12), (0, 12))
    for _ in range(64):
        boxes = []
        for _ in range(rng.randint(0, max_boxes)):
            t0 = _random_time(rng)
            t1 = t0 if rng.random() < 0.15 else t0 + Fraction(rng.randint(0, 8), 2)
            kind = rng.random()
            lo = Fraction(rng.randint(-2, 10))
            size = Fraction(rng.randint(1, 8))
            if kind < 0.35:  # horizontal wall, full width
                boxes.append(Box.make((t0, t1), (0, 12), (lo, lo + size)))
            elif kind < 0.55:  # vertical wall, full height
                boxes.append(Box.make((t0, t1), (lo, lo + size), (0, 12)))
            elif kind < 0.65:  # zero-width wall segment: covers no area, still separates
                boxes.append(Box.make((t0, t1), (lo, lo), (0, 12)))
            elif kind < 0.85:  # loose rectangle, may stick out of the window
                lo2 = Fraction(rng.randint(-2, 10))
                boxes.append(Box.make((t0, t1), (lo, lo + size), (lo2, lo2 + rng.randint(1, 6))))
            else:  # full blackout pulse
                boxes.append(Box.make((t0, t1), (0, 12), (0, 12)))
        scene = Scene(window.window_x, window.window_y, tuple(boxes))
        if validate_scene(scene).ok:
            return scene
    raise RuntimeError("could not draw a valid random scene (generator misconfigured)")


def pulsing_box_scene(n_critical_times: int) -> Scene:
    """Scaling family: a wall stub blinking on and off.

    The stub hangs off the left window edge (coverage must stay connected),
    leaves a single gap component at every time, and produces exactly
    `n_critical_times` critical times (must be even), so cost growth
    isolates the pipeline's bookkeeping rather than the topology."""
    if n_critical_times % 2:
        raise ValueError("n_critical_times must be even")
    boxes = [
        Box.make((2 * i + 1, 2 * i + 2), (0, 5), (3, 5))
        for i in range(n_critical_times // 2)
    ]
    return Scene.make((0, 8), (0, 8), boxes)
