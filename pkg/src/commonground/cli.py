"""Command-line entry points for the whole pipeline.

Backends are assembled from built-ins (scripted, echo) plus whatever a JSON
config file declares. Remote credentials are read from an environment
variable only; there is deliberately no flag or config key holding a key.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .annotator import (
    annotate_record,
    evaluate_mind,
    gold_lookup,
    read_gold,
    score_recorded,
    write_gold,
)
from .backends import (
    BackendRegistry,
    CachingBackend,
    EchoBackend,
    HttpBackendConfig,
    HttpChatBackend,
    ReplayBackend,
)
from .metrics import render_comparison, report_for
from .model import MindMode, RunLimits, TaskKind
from .orchestrator import (
    ExperimentSpec,
    cells_for_modes,
    export_finetune,
    rerun_from_record,
    run_batch,
    save_finetune,
)
from .records import read_records, replay_view
from .scenarios import (
    AlignmentGenParams,
    NegotiationGenParams,
    generate_alignment,
    generate_negotiation,
    load_scenarios,
    save_scenarios,
)
from .scripted import ScriptedAgentBackend
from .service import PlayService, ServiceConfig, build_app


def build_registry(config: dict | None) -> BackendRegistry:
    registry = BackendRegistry()
    registry.register("scripted", ScriptedAgentBackend(), deterministic=True)
    registry.register("echo", EchoBackend(), deterministic=True)
    declared = (config or {}).get("backends", {})
    caches = {}
    for backend_id, spec in declared.items():
        kind = spec.get("kind")
        if kind == "http":
            http_config = HttpBackendConfig(
                base_url=spec["base_url"],
                model=spec["model"],
                api_key_env=spec.get("api_key_env", "CHAT_API_KEY"),
                max_attempts=spec.get("max_attempts", 4),
                backoff_base=spec.get("backoff_base", 0.5),
                requests_per_second=spec.get("requests_per_second"),
            )
            registry.register(backend_id, HttpChatBackend(http_config), billable=True)
        elif kind == "replay":
            registry.register(
                backend_id, ReplayBackend.from_file(spec["path"]), deterministic=True
            )
        elif kind == "echo":
            registry.register(backend_id, EchoBackend(), deterministic=True)
        elif kind == "scripted":
            registry.register(backend_id, ScriptedAgentBackend(), deterministic=True)
        elif kind == "cache":
            caches[backend_id] = spec
        else:
            raise SystemExit(f"config backend {backend_id!r}: unknown kind {kind!r}")
    for backend_id, spec in caches.items():
        inner = registry.entry(spec["inner"])
        registry.register(
            backend_id,
            CachingBackend(inner.backend, force=spec.get("force", False)),
            deterministic=inner.deterministic,
            billable=inner.billable,
        )
    return registry


def _load_config(path: str | None) -> dict | None:
    if path is None:
        return None
    return json.loads(Path(path).read_text(encoding="utf-8"))


def _out_path(args, name: str) -> Path:
    if getattr(args, "out", None):
        return Path(args.out)
    base = Path(args.out_dir) if args.out_dir else Path(".")
    return base / name


def cmd_generate(args) -> int:
    task = TaskKind(args.task)
    if task is TaskKind.ALIGNMENT:
        params = AlignmentGenParams(
            count=args.count, friend_count=args.friends, id_prefix=args.id_prefix
        )
        scenarios = generate_alignment(params, args.seed)
    else:
        params = NegotiationGenParams(
            count=args.count, id_prefix=args.id_prefix, opposed=args.opposed
        )
        scenarios = generate_negotiation(params, args.seed)
    out = _out_path(args, f"{task.value}-scenarios.jsonl")
    save_scenarios(out, scenarios)
    print(f"wrote {len(scenarios)} {task.value} scenarios to {out}")
    return 0


def cmd_selfplay(args) -> int:
    registry = build_registry(_load_config(args.config))
    scenarios = load_scenarios(args.scenarios)
    modes = [MindMode(m.strip()) for m in args.modes.split(",") if m.strip()]
    cells = cells_for_modes(
        modes,
        mind_backend=args.mind,
        generator_backend=args.generator,
        temperature=args.temperature,
    )
    spec = ExperimentSpec(
        scenarios=scenarios,
        cells=cells,
        seed=args.seed,
        repetitions=args.reps,
        parallelism=args.parallelism,
        limits=RunLimits(max_turns=args.max_turns, parse_retries=args.retries),
    )
    result = run_batch(spec, registry, out_dir=args.out_dir)
    print(render_comparison(result.reports))
    aborted = sum(1 for r in result.records if r.aborted)
    print(f"sessions: {len(result.records)}  aborted: {aborted}")
    if args.out_dir:
        print(f"records written to {Path(args.out_dir) / 'records.jsonl'}")
    return 0


def cmd_report(args) -> int:
    records = read_records(args.records)
    report = report_for(records, pareto_over_agreed=args.pareto_over_agreed) \
        if records and records[0].scenario.task is TaskKind.NEGOTIATION \
        else report_for(records)
    if args.json:
        print(json.dumps(report.as_dict(), indent=2))
    else:
        print(report.render())
    return 0


def cmd_annotate(args) -> int:
    records = read_records(args.records)
    turns = []
    for record in records:
        if record.scenario.task is TaskKind.ALIGNMENT:
            turns.extend(annotate_record(record))
    out = _out_path(args, "gold.jsonl")
    write_gold(out, turns)
    print(f"wrote {len(turns)} gold-labeled turns to {out}")
    return 0


def cmd_eval_minds(args) -> int:
    records = read_records(args.records)
    gold = gold_lookup(read_gold(args.gold)) if args.gold else None
    if args.recorded:
        report = score_recorded(records, gold)
    else:
        registry = build_registry(_load_config(args.config))
        backend = registry.get(args.backend)
        report = evaluate_mind(
            backend, records, limits=RunLimits(max_turns=args.max_turns)
        )
    if args.json:
        print(json.dumps(report.as_dict(), indent=2))
    else:
        print(report.render())
    return 0


def cmd_export_finetune(args) -> int:
    records = read_records(args.records)
    samples = export_finetune(
        records, fraction=args.fraction, seed=args.seed, with_beliefs=not args.raw
    )
    out = _out_path(args, "finetune.jsonl" if args.format == "jsonl" else "finetune.txt")
    save_finetune(out, samples, jsonl=args.format == "jsonl")
    print(f"wrote {len(samples)} samples to {out}")
    return 0


def cmd_replay(args) -> int:
    records = read_records(args.records)
    if args.session:
        records = [r for r in records if r.session_id == args.session]
        if not records:
            print(f"no session {args.session!r} in {args.records}", file=sys.stderr)
            return 2
    failures = 0
    for record in records:
        if record.aborted:
            print(f"{record.session_id}: skipped (aborted session)")
            continue
        rerun = rerun_from_record(record)
        if replay_view(rerun) == replay_view(record):
            print(f"{record.session_id}: reproduced")
        else:
            failures += 1
            print(f"{record.session_id}: MISMATCH")
    if failures:
        print(f"{failures} session(s) failed to reproduce", file=sys.stderr)
        return 1
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    registry = build_registry(_load_config(args.config))
    service = PlayService(
        ServiceConfig(
            registry=registry,
            out_dir=Path(args.out_dir) if args.out_dir else None,
            seed=args.seed,
            limits=RunLimits(max_turns=args.max_turns),
            reveal_after_close=not args.no_reveal,
            default_generator=args.generator,
            friend_count=args.friends,
            opposed_tables=args.opposed,
        )
    )
    app = build_app(service)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="commonground",
        description="Two-agent dialogue harness: self-play, annotation, metrics, and human play.",
    )
    parser.add_argument("--config", help="JSON file declaring extra backends")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out-dir", help="default directory for outputs")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate-scenarios", help="write a scenario JSONL file")
    p.add_argument("--task", required=True, choices=[t.value for t in TaskKind])
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--friends", type=int, default=5, help="friends per side (alignment)")
    p.add_argument("--opposed", action="store_true", help="mirror-image priorities (negotiation)")
    p.add_argument("--id-prefix", default="scn")
    p.add_argument("--out")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("selfplay", help="run a scenarios x mind-modes batch")
    p.add_argument("--scenarios", required=True)
    p.add_argument("--modes", default="none,both", help="comma list of mind modes")
    p.add_argument("--generator", default="scripted")
    p.add_argument("--mind", default="scripted")
    p.add_argument("--temperature", type=float, default=0.7)
    p.add_argument("--reps", type=int, default=1)
    p.add_argument("--parallelism", type=int, default=1)
    p.add_argument("--max-turns", type=int, default=20)
    p.add_argument("--retries", type=int, default=2)
    p.set_defaults(func=cmd_selfplay)

    p = sub.add_parser("report", help="recompute metrics from a records file")
    p.add_argument("--records", required=True)
    p.add_argument("--pareto-over-agreed", action="store_true")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("annotate", help="emit gold belief labels for alignment records")
    p.add_argument("--records", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_annotate)

    p = sub.add_parser("eval-minds", help="score belief predictions against gold labels")
    p.add_argument("--records", required=True)
    p.add_argument("--recorded", action="store_true",
                   help="score the snapshots stored in the records instead of querying a backend")
    p.add_argument("--backend", default="scripted")
    p.add_argument("--gold", help="gold JSONL from the annotate subcommand")
    p.add_argument("--max-turns", type=int, default=20)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_eval_minds)

    p = sub.add_parser("export-finetune", help="render training samples from records")
    p.add_argument("--records", required=True)
    p.add_argument("--fraction", type=float, default=1.0)
    p.add_argument("--raw", action="store_true", help="omit the belief block")
    p.add_argument("--format", choices=["jsonl", "text"], default="jsonl")
    p.add_argument("--out")
    p.set_defaults(func=cmd_export_finetune)

    p = sub.add_parser("replay", help="re-run archived sessions from their own tapes")
    p.add_argument("--records", required=True)
    p.add_argument("--session", help="only this session id")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("serve", help="run the human-play HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--generator", default="scripted")
    p.add_argument("--friends", type=int, default=5)
    p.add_argument("--opposed", action="store_true")
    p.add_argument("--max-turns", type=int, default=20)
    p.add_argument("--no-reveal", action="store_true",
                   help="never reveal the agent's knowledge, even after close")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = make_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
