#!/usr/bin/env python3
"""Run the headline experiment: one task, every mind mode, shared scenarios.

Generates a deterministic scenario set, plays each scenario under each
requested mind mode with the same seeds, and prints the per-cell comparison
table. With --out-dir the raw records and index land on disk for later
reporting, annotation, or replay.

Defaults run entirely on the scripted deterministic agents, so this is
runnable offline. Point --generator/--mind at a backend declared in a
--config JSON file to run the same matrix against a live model (credentials
come from the environment variable the config names, never from flags).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from commonground.cli import build_registry, _load_config
from commonground.metrics import render_comparison
from commonground.model import MindMode, RunLimits, TaskKind
from commonground.orchestrator import ExperimentSpec, cells_for_modes, run_batch
from commonground.scenarios import (
    AlignmentGenParams,
    NegotiationGenParams,
    generate_alignment,
    generate_negotiation,
)


def parse_args() -> argparse.Namespace:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--task", choices=[t.value for t in TaskKind], default="alignment")
    parser.add_argument("--count", type=int, default=100, help="scenarios per cell")
    parser.add_argument("--modes", default="none,first,second,both")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--reps", type=int, default=1)
    parser.add_argument("--friends", type=int, default=5)
    parser.add_argument("--opposed", action="store_true",
                        help="negotiation tables as mirror-image priorities")
    parser.add_argument("--generator", default="scripted")
    parser.add_argument("--mind", default="scripted")
    parser.add_argument("--temperature", type=float, default=0.0)
    parser.add_argument("--max-turns", type=int, default=20)
    parser.add_argument("--parallelism", type=int, default=1)
    parser.add_argument("--config", help="JSON file declaring extra backends")
    parser.add_argument("--out-dir", help="write records.jsonl and index.json here")
    return parser.parse_args()


def main() -> int:
    args = parse_args()
    task = TaskKind(args.task)
    if task is TaskKind.ALIGNMENT:
        scenarios = generate_alignment(
            AlignmentGenParams(
                count=args.count, friend_count=args.friends, id_prefix="mx"
            ),
            args.seed,
        )
    else:
        scenarios = generate_negotiation(
            NegotiationGenParams(
                count=args.count, id_prefix="mx", opposed=args.opposed
            ),
            args.seed,
        )

    modes = [MindMode(m.strip()) for m in args.modes.split(",") if m.strip()]
    spec = ExperimentSpec(
        scenarios=scenarios,
        cells=cells_for_modes(
            modes,
            mind_backend=args.mind,
            generator_backend=args.generator,
            temperature=args.temperature,
        ),
        seed=args.seed,
        repetitions=args.reps,
        parallelism=args.parallelism,
        limits=RunLimits(max_turns=args.max_turns),
    )
    registry = build_registry(_load_config(args.config))
    result = run_batch(spec, registry, out_dir=args.out_dir)

    print(f"{task.value}: {len(scenarios)} scenarios x {len(modes)} modes x {args.reps} reps")
    print(render_comparison(result.reports))
    aborted = sum(1 for r in result.records if r.aborted)
    if aborted:
        print(f"warning: {aborted} aborted session(s) excluded from the table")
    if args.out_dir:
        print(f"records: {Path(args.out_dir) / 'records.jsonl'}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
