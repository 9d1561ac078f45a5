#!/usr/bin/env python3
"""Build a belief-conditioned fine-tuning set from played sessions.

Reads an existing records file, or plays a fresh mind-enabled batch with the
scripted agents, then renders every eligible turn (speaker-matched belief
snapshot present, session not aborted) into the instruction/beliefs/
knowledge/dialogue/response layout and samples the requested fraction.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from commonground.cli import build_registry
from commonground.model import MindMode, RunLimits, TaskKind
from commonground.orchestrator import (
    ExperimentSpec,
    cells_for_modes,
    export_finetune,
    run_batch,
    save_finetune,
)
from commonground.records import read_records
from commonground.scenarios import (
    AlignmentGenParams,
    NegotiationGenParams,
    generate_alignment,
    generate_negotiation,
)


def parse_args() -> argparse.Namespace:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--records", help="use an existing records file")
    parser.add_argument("--task", choices=[t.value for t in TaskKind],
                        default="alignment")
    parser.add_argument("--count", type=int, default=50)
    parser.add_argument("--fraction", type=float, default=1.0,
                        help="share of eligible turns to sample")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--raw", action="store_true", help="omit the belief block")
    parser.add_argument("--format", choices=["jsonl", "text"], default="jsonl")
    parser.add_argument("--out", default="finetune.jsonl")
    return parser.parse_args()


def main() -> int:
    args = parse_args()
    if args.records:
        records = read_records(args.records)
    else:
        task = TaskKind(args.task)
        if task is TaskKind.ALIGNMENT:
            scenarios = generate_alignment(
                AlignmentGenParams(count=args.count, friend_count=5, id_prefix="ft"),
                args.seed,
            )
        else:
            scenarios = generate_negotiation(
                NegotiationGenParams(count=args.count, id_prefix="ft"), args.seed
            )
        spec = ExperimentSpec(
            scenarios=scenarios,
            cells=cells_for_modes(
                [MindMode.BOTH],
                mind_backend="scripted",
                generator_backend="scripted",
                temperature=0.0,
            ),
            seed=args.seed,
            limits=RunLimits(max_turns=20),
        )
        records = run_batch(spec, build_registry(None)).records

    samples = export_finetune(
        records, fraction=args.fraction, seed=args.seed, with_beliefs=not args.raw
    )
    save_finetune(args.out, samples, jsonl=args.format == "jsonl")
    print(f"wrote {len(samples)} sample(s) to {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
