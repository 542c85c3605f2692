"""Command-line front end and JSON interchange formats.

Subcommands:
  check   scene.json  -> full pipeline (validate, sheaf, LP, path), verdict report
  sheaf   scene.json  -> the constructed cone sheaf as JSON
  lp      sheaf.json  -> validate + coboundary + LP on an abstract sheaf
  matrix  sheaf.json  -> labelled coboundary matrix only
  oracle  sheaf.json  -> combinatorial section sweep (free function-like sheaves)
  path    scene.json  -> extracted evasion path as JSON

Exit codes: 0 = evasion possible, 2 = no evasion, 1 = error. Rationals are
serialised as "p" or "p/q" strings (ints allowed on input, floats rejected)
so reports stay exact and diffable; reports are byte-identical across runs
except for the timing block.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from fractions import Fraction
from pathlib import Path

from evasion.cones import PolyhedralCone
from evasion.geometry import (
    Box,
    EvasionPath,
    PathSegment,
    Scene,
    SceneValidationError,
    build_sheaf,
    critical_times,
    extract_path,
    scene_fibres,
    validate_scene,
)
from evasion.linalg import Matrix, format_rational, parse_rational
from evasion.oracle import SectionChain, UnsupportedSheafError, dp_section_exists
from evasion.sheaf import (
    ConeSheaf,
    GlobalSections,
    SheafValidationError,
    Stratification,
    assemble_coboundary,
    global_sections,
)

EXIT_EVASION = 0
EXIT_ERROR = 1
EXIT_NO_EVASION = 2


# ---------------------------------------------------------------------------
# formats

def _rat(value) -> Fraction:
    return parse_rational(value)


def _interval_from(obj) -> tuple:
    if not isinstance(obj, (list, tuple)) or len(obj) != 2:
        raise ValueError(f"interval must be a two-element list, got {obj!r}")
    return _rat(obj[0]), _rat(obj[1])


def scene_from_jsonable(data) -> Scene:
    if not isinstance(data, dict) or "window" not in data:
        raise ValueError("scene JSON must be an object with a 'window' field")
    try:
        win = data["window"]
        boxes = []
        for b in data.get("boxes", []):
            boxes.append(Box(_interval_from(b["t"]), _interval_from(b["x"]), _interval_from(b["y"])))
        return Scene(_interval_from(win["x"]), _interval_from(win["y"]), tuple(boxes))
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed scene JSON: {exc!r}") from exc


def _interval_json(iv) -> list:
    return [format_rational(iv[0]), format_rational(iv[1])]


def scene_to_jsonable(scene: Scene) -> dict:
    return {
        "window": {"x": _interval_json(scene.window_x), "y": _interval_json(scene.window_y)},
        "boxes": [
            {"t": _interval_json(b.t), "x": _interval_json(b.x), "y": _interval_json(b.y)}
            for b in scene.boxes
        ],
    }


def matrix_to_jsonable(M: Matrix) -> dict:
    return {
        "rows": M.rows,
        "cols": M.cols,
        "entries": [format_rational(e) for e in M.entries],
    }


def matrix_from_jsonable(data) -> Matrix:
    rows, cols = int(data["rows"]), int(data["cols"])
    entries = tuple(_rat(e) for e in data["entries"])
    return Matrix(rows, cols, entries)


def sheaf_to_jsonable(S: ConeSheaf) -> dict:
    strat = S.strat
    stalks: dict[str, dict] = {}

    def stalk_json(cone: PolyhedralCone) -> dict:
        out: dict = {"labels": list(cone.labels)}
        if not cone.is_free:
            out["ambient_dim"] = cone.ambient_dim
            out["generators"] = [[format_rational(c) for c in g] for g in cone.generators]
        return out

    for j in range(strat.edge_count):
        stalks[strat.edge_id(j)] = stalk_json(S.edge_stalks[j])
        if j < strat.k:
            stalks[strat.vertex_id(j)] = stalk_json(S.vertex_stalks[j])
    restrictions = []
    for i, j, M in S.incidences():
        restrictions.append(
            {"from": strat.vertex_id(i), "to": strat.edge_id(j), "matrix": matrix_to_jsonable(M)}
        )
    return {
        "vertices": [format_rational(t) for t in strat.vertex_times],
        "stalks": stalks,
        "restrictions": restrictions,
    }


def _stalk_from_jsonable(data) -> PolyhedralCone:
    labels = tuple(str(lab) for lab in data["labels"])
    if "generators" in data:
        gens = [tuple(_rat(c) for c in g) for g in data["generators"]]
        ambient = int(data.get("ambient_dim", len(gens[0]) if gens else 0))
        return PolyhedralCone(ambient, tuple(gens), labels)
    return PolyhedralCone.free(labels)


def sheaf_from_jsonable(data) -> ConeSheaf:
    if not isinstance(data, dict) or "vertices" not in data:
        raise ValueError("sheaf JSON must be an object with a 'vertices' field")
    try:
        return _sheaf_from_jsonable(data)
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed sheaf JSON: {exc!r}") from exc


def _sheaf_from_jsonable(data) -> ConeSheaf:
    strat = Stratification(tuple(_rat(t) for t in data["vertices"]))
    stalks = data.get("stalks", {})

    def stalk(cell: str) -> PolyhedralCone:
        if cell not in stalks:
            raise ValueError(f"missing stalk for cell {cell}")
        return _stalk_from_jsonable(stalks[cell])

    vertex_stalks = tuple(stalk(strat.vertex_id(i)) for i in range(strat.k))
    edge_stalks = tuple(stalk(strat.edge_id(j)) for j in range(strat.edge_count))
    maps: dict[tuple[str, str], Matrix] = {}
    for r in data.get("restrictions", []):
        key = (str(r["from"]), str(r["to"]))
        if key in maps:
            raise ValueError(f"duplicate restriction {key[0]}->{key[1]}")
        maps[key] = matrix_from_jsonable(r["matrix"])
    left, right = [], []
    for i in range(strat.k):
        vid = strat.vertex_id(i)
        for j, bucket in ((i, left), (i + 1, right)):
            key = (vid, strat.edge_id(j))
            if key not in maps:
                raise ValueError(f"missing restriction {key[0]}->{key[1]}")
            bucket.append(maps.pop(key))
    if maps:
        extra = ", ".join(f"{a}->{b}" for a, b in maps)
        raise ValueError(f"restrictions for non-incident cells: {extra}")
    return ConeSheaf(strat, vertex_stalks, edge_stalks, tuple(left), tuple(right))


def sections_to_jsonable(sec: GlobalSections, include_matrix: bool) -> dict:
    out: dict = {
        "kernel_dim": len(sec.kernel) if sec.kernel is not None else None,
        "columns": [f"{cell}.{lab}" for cell, lab in sec.column_labels],
        "rows": [f"{cell}.{lab}" for cell, lab in sec.row_labels],
    }
    if sec.decision is not None:
        if sec.decision.feasible:
            support = {
                f"{cell}.{lab}": format_rational(v)
                for (cell, lab), v in zip(sec.column_labels, sec.decision.witness)
                if v
            }
            out["witness"] = {"support": support}
        else:
            out["certificate"] = [format_rational(v) for v in sec.decision.certificate]
    if include_matrix:
        out["matrix"] = matrix_to_jsonable(sec.coboundary)
    return out


def chain_to_jsonable(chain: SectionChain) -> dict:
    return chain.as_dict()


def path_to_jsonable(path: EvasionPath) -> dict:
    segments = []
    for seg in path.segments:
        segments.append(
            {
                "t": [
                    None if seg.start is None else format_rational(seg.start),
                    None if seg.end is None else format_rational(seg.end),
                ],
                "point": [format_rational(seg.point[0]), format_rational(seg.point[1])],
            }
        )
    return {"segments": segments, "chain": chain_to_jsonable(path.chain)}


def path_from_jsonable(data) -> EvasionPath:
    segs = []
    for seg in data["segments"]:
        lo, hi = seg["t"]
        segs.append(
            PathSegment(
                None if lo is None else _rat(lo),
                None if hi is None else _rat(hi),
                (_rat(seg["point"][0]), _rat(seg["point"][1])),
            )
        )
    chain = SectionChain(tuple((c, l) for c, l in data.get("chain", {}).items()))
    return EvasionPath(tuple(segs), chain)


# ---------------------------------------------------------------------------
# svg rendering (time horizontally, spatial y vertically)

def render_scene_svg(scene: Scene, path: EvasionPath | None = None) -> str:
    times = critical_times(scene)
    t_lo = (times[0] - 1) if times else Fraction(-1)
    t_hi = (times[-1] + 1) if times else Fraction(1)
    y_lo, y_hi = scene.window_y
    width, height, margin = 720.0, 360.0, 30.0

    def sx(t: Fraction) -> float:
        return margin + float((t - t_lo) / (t_hi - t_lo)) * (width - 2 * margin)

    def sy(y: Fraction) -> float:
        return height - margin - float((y - y_lo) / (y_hi - y_lo)) * (height - 2 * margin)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:g}" height="{height:g}" '
        f'viewBox="0 0 {width:g} {height:g}">',
        f'<rect x="{margin}" y="{margin}" width="{width - 2 * margin}" height="{height - 2 * margin}" '
        'fill="#f4f6f8" stroke="#333"/>',
    ]
    _, vertex_fibres, edge_fibres = scene_fibres(scene)
    cells = []
    vts = list(critical_times(scene)) or [Fraction(0)]
    for j, ef in enumerate(edge_fibres):
        lo = vts[j - 1] if j >= 1 else t_lo
        hi = vts[j] if j < len(vts) else t_hi
        cells.append((lo, hi, ef))
    for i, vf in enumerate(vertex_fibres):
        eps = (t_hi - t_lo) / 400
        cells.append((vts[i] - eps, vts[i] + eps, vf))
    for lo, hi, fibre in cells:
        for comp in fibre.components:
            ylo, yhi = comp.y_extent(fibre)
            parts.append(
                f'<rect x="{sx(lo):.2f}" y="{sy(yhi):.2f}" width="{max(sx(hi) - sx(lo), 0.5):.2f}" '
                f'height="{max(sy(ylo) - sy(yhi), 0.5):.2f}" fill="#9fd49f" fill-opacity="0.35"/>'
            )
    for b in scene.boxes:
        lo, hi = max(b.t[0], t_lo), min(b.t[1], t_hi)
        if lo > hi:
            continue
        parts.append(
            f'<rect x="{sx(lo):.2f}" y="{sy(min(b.y[1], y_hi)):.2f}" '
            f'width="{max(sx(hi) - sx(lo), 1.0):.2f}" '
            f'height="{max(sy(max(b.y[0], y_lo)) - sy(min(b.y[1], y_hi)), 1.0):.2f}" '
            'fill="#5a5a5a" fill-opacity="0.75"/>'
        )
    for t in times:
        parts.append(
            f'<line x1="{sx(t):.2f}" y1="{margin}" x2="{sx(t):.2f}" y2="{height - margin}" '
            'stroke="#888" stroke-dasharray="4 3" stroke-width="0.7"/>'
        )
    if path is not None:
        pts = []
        for seg in path.segments:
            lo = seg.start if seg.start is not None else t_lo
            hi = seg.end if seg.end is not None else t_hi
            pts.append((sx(lo), sy(seg.point[1])))
            pts.append((sx(hi), sy(seg.point[1])))
        d = "M " + " L ".join(f"{x:.2f} {y:.2f}" for x, y in pts)
        parts.append(f'<path d="{d}" fill="none" stroke="#c0392b" stroke-width="2"/>')
    parts.append("</svg>")
    return "\n".join(parts)


# ---------------------------------------------------------------------------
# commands

def _emit(payload: dict) -> None:
    sys.stdout.write(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _fail(message: str, **extra) -> int:
    _emit({"error": message, **extra})
    return EXIT_ERROR


def _load_json(path_str: str):
    raw = Path(path_str).read_bytes()
    digest = hashlib.sha256(raw).hexdigest()
    return json.loads(raw.decode("utf-8")), digest


def cmd_check(args) -> int:
    try:
        data, digest = _load_json(args.scene)
        scene = scene_from_jsonable(data)
    except json.JSONDecodeError as exc:
        return _fail(f"malformed JSON: {exc.msg}", location={"line": exc.lineno, "column": exc.colno})
    except (OSError, ValueError) as exc:
        return _fail(str(exc))

    timing: dict[str, float] = {}
    t0 = time.perf_counter()
    try:
        report = validate_scene(scene)
    except ValueError as exc:
        return _fail(str(exc))
    timing["validate"] = (time.perf_counter() - t0) * 1000
    if not report.ok:
        return _fail("scene validation failed", violations=list(report.problems))

    t0 = time.perf_counter()
    sheaf = build_sheaf(scene)
    timing["build_sheaf"] = (time.perf_counter() - t0) * 1000
    t0 = time.perf_counter()
    sections = global_sections(sheaf)
    timing["lp"] = (time.perf_counter() - t0) * 1000

    feasible = sections.decision.feasible
    out: dict = {
        "verdict": "EVASION" if feasible else "NO_EVASION",
        "input_digest": digest,
        "sections": sections_to_jsonable(sections, include_matrix=args.matrix),
    }
    if args.oracle:
        t0 = time.perf_counter()
        exists, chain = dp_section_exists(sheaf)
        timing["oracle"] = (time.perf_counter() - t0) * 1000
        out["oracle"] = {"section_exists": exists}
        if chain is not None:
            out["oracle"]["chain"] = chain_to_jsonable(chain)
        if exists != feasible:
            return _fail(
                "oracle disagrees with the linear program",
                lp_feasible=feasible,
                oracle_section_exists=exists,
            )
    path = None
    if feasible:
        t0 = time.perf_counter()
        path = extract_path(scene, sections)
        timing["path"] = (time.perf_counter() - t0) * 1000
        out["path"] = path_to_jsonable(path)
        if args.path_out:
            Path(args.path_out).write_text(json.dumps(path_to_jsonable(path), indent=2, sort_keys=True))
    if args.plot:
        Path(args.plot).write_text(render_scene_svg(scene, path))
    out["timing_ms"] = {k: round(v, 3) for k, v in timing.items()}
    _emit(out)
    return EXIT_EVASION if feasible else EXIT_NO_EVASION


def cmd_sheaf(args) -> int:
    try:
        data, _ = _load_json(args.scene)
        scene = scene_from_jsonable(data)
        sheaf = build_sheaf(scene)
    except json.JSONDecodeError as exc:
        return _fail(f"malformed JSON: {exc.msg}", location={"line": exc.lineno, "column": exc.colno})
    except SceneValidationError as exc:
        return _fail("scene validation failed", violations=list(exc.report.problems))
    except (OSError, ValueError) as exc:
        return _fail(str(exc))
    _emit(sheaf_to_jsonable(sheaf))
    return EXIT_EVASION


def _load_sheaf(path_str: str) -> tuple[ConeSheaf, str]:
    data, digest = _load_json(path_str)
    return sheaf_from_jsonable(data), digest


def cmd_lp(args) -> int:
    try:
        sheaf, digest = _load_sheaf(args.sheaf)
        sections = global_sections(sheaf)
    except json.JSONDecodeError as exc:
        return _fail(f"malformed JSON: {exc.msg}", location={"line": exc.lineno, "column": exc.colno})
    except SheafValidationError as exc:
        return _fail(
            "sheaf validation failed",
            violations=[
                {"vertex": v.vertex, "edge": v.edge, "generator": v.generator, "message": v.message}
                for v in exc.report.violations
            ],
        )
    except (OSError, ValueError) as exc:
        return _fail(str(exc))
    feasible = sections.decision.feasible
    _emit(
        {
            "verdict": "EVASION" if feasible else "NO_EVASION",
            "input_digest": digest,
            "sections": sections_to_jsonable(sections, include_matrix=args.matrix),
        }
    )
    return EXIT_EVASION if feasible else EXIT_NO_EVASION


def cmd_matrix(args) -> int:
    try:
        sheaf, _ = _load_sheaf(args.sheaf)
        sections = assemble_coboundary(sheaf)
    except json.JSONDecodeError as exc:
        return _fail(f"malformed JSON: {exc.msg}", location={"line": exc.lineno, "column": exc.colno})
    except SheafValidationError as exc:
        return _fail(
            "sheaf validation failed",
            violations=[
                {"vertex": v.vertex, "edge": v.edge, "generator": v.generator, "message": v.message}
                for v in exc.report.violations
            ],
        )
    except (OSError, ValueError) as exc:
        return _fail(str(exc))
    _emit(sections_to_jsonable(sections, include_matrix=True))
    return EXIT_EVASION


def cmd_oracle(args) -> int:
    try:
        sheaf, _ = _load_sheaf(args.sheaf)
        exists, chain = dp_section_exists(sheaf)
    except json.JSONDecodeError as exc:
        return _fail(f"malformed JSON: {exc.msg}", location={"line": exc.lineno, "column": exc.colno})
    except UnsupportedSheafError as exc:
        return _fail(str(exc))
    except (OSError, ValueError) as exc:
        return _fail(str(exc))
    out: dict = {"section_exists": exists}
    if chain is not None:
        out["chain"] = chain_to_jsonable(chain)
    _emit(out)
    return EXIT_EVASION if exists else EXIT_NO_EVASION


def cmd_path(args) -> int:
    try:
        data, digest = _load_json(args.scene)
        scene = scene_from_jsonable(data)
        sheaf = build_sheaf(scene)
        sections = global_sections(sheaf)
    except json.JSONDecodeError as exc:
        return _fail(f"malformed JSON: {exc.msg}", location={"line": exc.lineno, "column": exc.colno})
    except SceneValidationError as exc:
        return _fail("scene validation failed", violations=list(exc.report.problems))
    except (OSError, ValueError) as exc:
        return _fail(str(exc))
    if not sections.decision.feasible:
        _emit({"verdict": "NO_EVASION", "input_digest": digest})
        return EXIT_NO_EVASION
    path = extract_path(scene, sections)
    payload = path_to_jsonable(path)
    if args.out:
        Path(args.out).write_text(json.dumps(payload, indent=2, sort_keys=True))
        _emit({"verdict": "EVASION", "input_digest": digest, "path_file": args.out})
    else:
        _emit({"verdict": "EVASION", "input_digest": digest, "path": payload})
    return EXIT_EVASION


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="evasion",
        description="Decide whether an evader can avoid a time-varying planar coverage region.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="full pipeline on a scene file")
    p.add_argument("scene")
    p.add_argument("--oracle", action="store_true", help="cross-check with the combinatorial sweep")
    p.add_argument("--matrix", action="store_true", help="embed the labelled coboundary matrix")
    p.add_argument("--path", dest="path_out", metavar="OUT", help="write the evasion path JSON here")
    p.add_argument("--plot", metavar="OUT_SVG", help="write an SVG rendering of gaps and path")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("sheaf", help="print the cone sheaf built from a scene")
    p.add_argument("scene")
    p.set_defaults(func=cmd_sheaf)

    p = sub.add_parser("lp", help="global sections of an abstract sheaf file")
    p.add_argument("sheaf")
    p.add_argument("--matrix", action="store_true")
    p.set_defaults(func=cmd_lp)

    p = sub.add_parser("matrix", help="labelled coboundary of a sheaf file")
    p.add_argument("sheaf")
    p.set_defaults(func=cmd_matrix)

    p = sub.add_parser("oracle", help="combinatorial section existence for a sheaf file")
    p.add_argument("sheaf")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("path", help="extract the evasion path from a scene file")
    p.add_argument("scene")
    p.add_argument("-o", "--out", help="write the path JSON to a file instead of stdout")
    p.set_defaults(func=cmd_path)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
