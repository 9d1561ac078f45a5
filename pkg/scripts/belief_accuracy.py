#!/usr/bin/env python3
"""Score belief estimates against rule-derived gold labels.

Two modes:
  * --records FILE   score the belief snapshots already stored in a records
                     file (what the agents believed while playing);
  * default          play a fresh mind-enabled alignment batch with the
                     scripted agents, then score those snapshots.

Either way the gold labels are recomputed from the transcripts by the
lexical annotator, so the comparison never trusts the player's own output.
Add --reestimate BACKEND to also query a backend for fresh estimates on the
archived dialogue prefixes and score those side by side.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from commonground.annotator import evaluate_mind, score_recorded
from commonground.cli import build_registry, _load_config
from commonground.model import MindMode, RunLimits
from commonground.orchestrator import ExperimentSpec, cells_for_modes, run_batch
from commonground.records import read_records
from commonground.scenarios import AlignmentGenParams, generate_alignment


def parse_args() -> argparse.Namespace:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--records", help="score an existing records file")
    parser.add_argument("--count", type=int, default=50,
                        help="scenarios to play when no records file is given")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--mode", default="both",
                        choices=["first", "second", "both"])
    parser.add_argument("--reestimate", metavar="BACKEND",
                        help="also query this backend for fresh estimates")
    parser.add_argument("--config", help="JSON file declaring extra backends")
    return parser.parse_args()


def main() -> int:
    args = parse_args()
    registry = build_registry(_load_config(args.config))

    if args.records:
        records = read_records(args.records)
        print(f"loaded {len(records)} session(s) from {args.records}")
    else:
        scenarios = generate_alignment(
            AlignmentGenParams(count=args.count, friend_count=5, id_prefix="ba"),
            args.seed,
        )
        spec = ExperimentSpec(
            scenarios=scenarios,
            cells=cells_for_modes(
                [MindMode(args.mode)],
                mind_backend="scripted",
                generator_backend="scripted",
                temperature=0.0,
            ),
            seed=args.seed,
            limits=RunLimits(max_turns=20),
        )
        records = run_batch(spec, registry).records
        print(f"played {len(records)} scripted session(s) in mode {args.mode}")

    print()
    print("recorded snapshots vs gold labels")
    print(score_recorded(records).render())

    if args.reestimate:
        backend = registry.get(args.reestimate)
        print()
        print(f"fresh estimates from backend {args.reestimate!r} vs gold labels")
        print(evaluate_mind(backend, records).render())
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
