#!/usr/bin/env python3
"""Fuzz the LP pipeline against the combinatorial section sweep.

Draws random free function-like cone sheaves and insists the simplex
verdict, the reachability sweep, certificate validity and witness
decomposability all line up. Any disagreement prints the offending sheaf
as JSON and exits nonzero.

Usage: python scripts/oracle_fuzz.py --count 10000 --seed 7
"""

import argparse
import json
import os
import sys
from random import Random

from evasion.cli import sheaf_to_jsonable
from evasion.cones import is_valid_certificate
from evasion.oracle import dp_section_exists, flow_decompose
from evasion.randgen import random_function_like_sheaf
from evasion.sheaf import global_sections


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--count", type=int, default=10_000)
    parser.add_argument("--seed", type=int, default=int(os.environ.get("EVASION_SEED", "20240817")))
    parser.add_argument("--max-vertices", type=int, default=6)
    parser.add_argument("--max-gens", type=int, default=4)
    args = parser.parse_args()

    rng = Random(args.seed)
    feasible = 0
    for trial in range(args.count):
        sheaf = random_function_like_sheaf(rng, args.max_vertices, args.max_gens)
        sections = global_sections(sheaf)
        exists, chain = dp_section_exists(sheaf)
        ok = exists == sections.decision.feasible
        if ok and sections.decision.feasible:
            feasible += 1
            decomposition = flow_decompose(sheaf, sections.decision.witness)
            ok = bool(decomposition)
        elif ok:
            ok = is_valid_certificate(sections.coboundary, sections.decision.certificate)
        if not ok:
            print(f"disagreement at trial {trial} (seed {args.seed}):", file=sys.stderr)
            json.dump(sheaf_to_jsonable(sheaf), sys.stderr, indent=2)
            return 1
    print(f"{args.count} sheaves checked, {feasible} feasible, no disagreements (seed {args.seed})")
    return 0


if __name__ == "__main__":
    sys.exit(main())
