"""Operator entry points.

Exit codes: 0 success, 2 validation/input error, 1 anything else.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .backends import build_gateway
from .compiler import compile_plan, load_metadata
from .config import Config
from .errors import PlanValidationError
from .evaluation import (
    align_verdicts,
    exact_matcher,
    containment_matcher,
    load_frame_labels,
    load_verdict_map,
    score_description_file,
    score_monitoring,
)
from .frames import FfmpegFrameSource, SyntheticFrameSource
from .knowledge import KnowledgeBase, UserProfile
from .plan import load_plan
from .runner import ReplayFixture, events_to_jsonl, replay_plan
from .session import SessionEngine, check_event_invariants
from .transcript import load_words

logger = logging.getLogger(__name__)


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--backend", choices=("live", "mock", "scripted"), default=None,
        help="model backend (default: config/MODEL_BACKEND, else mock)",
    )
    parser.add_argument("--config", default=None, help="JSON config file")
    parser.add_argument("--fixtures", default=None, help="fixture file for the mock backend")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stepcoach",
        description="Compile how-to videos into coach plans and run assistance sessions",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compile", help="transcript (+video/metadata) -> coach plan JSON")
    _add_common(p)
    p.add_argument("--transcript", required=True)
    p.add_argument("--video", required=True)
    p.add_argument("--metadata", default=None)
    p.add_argument("--title", default=None)
    p.add_argument("--duration", type=float, default=None,
                   help="video duration in seconds (mock runs without ffprobe)")
    p.add_argument("--out", required=True)

    p = sub.add_parser("kb-ingest", help="resource manifest -> embedded JSONL store")
    _add_common(p)
    p.add_argument("--manifest", required=True)
    p.add_argument("--store", required=True)
    p.add_argument("--corpus", default=None)

    p = sub.add_parser("serve", help="serve a session endpoint for a plan")
    _add_common(p)
    p.add_argument("--plan", required=True)
    p.add_argument("--profile", default=None)
    p.add_argument("--port", type=int, default=8765)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--kb-store", default=None)
    p.add_argument("--static", default=None, help="web console build directory")

    p = sub.add_parser("replay", help="replay a timed fixture; event log to stdout")
    _add_common(p)
    p.add_argument("--plan", required=True)
    p.add_argument("--fixture", required=True)
    p.add_argument("--profile", default=None)

    p = sub.add_parser("eval-desc", help="atomic-fact description scoring")
    _add_common(p)
    p.add_argument("--data", required=True, help="JSONL of {generated, narration, reference, labels}")
    p.add_argument("--out-prefix", default=None)
    p.add_argument("--containment", action="store_true",
                   help="match facts by containment instead of exact text")

    p = sub.add_parser("eval-monitor", help="per-frame monitoring accuracy")
    _add_common(p)
    p.add_argument("--labels", required=True, help="frame-label CSV")
    p.add_argument("--verdicts", required=True, help="JSON map frame_id -> status")
    p.add_argument("--out-prefix", default=None)
    return parser


def _config(args: argparse.Namespace) -> Config:
    cfg = Config.load(args.config) if args.config else Config.load()
    if args.backend:
        cfg.backend = args.backend
    if getattr(args, "fixtures", None):
        cfg.fixtures = args.fixtures
    return cfg


def _gateway(cfg: Config):
    return build_gateway(
        cfg.backend,
        fixtures=cfg.fixtures or None,
        strict=cfg.strict_mock,
        embed_dim=cfg.embed_dim,
    )


def _require_file(path: str | None, what: str) -> Path:
    if path is None:
        raise FileNotFoundError(f"{what} not provided")
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(f"{what} not found: {p}")
    return p


def cmd_compile(args: argparse.Namespace) -> int:
    cfg = _config(args)
    transcript_path = _require_file(args.transcript, "transcript")
    words = load_words(transcript_path)
    metadata = load_metadata(args.metadata) if args.metadata else None
    title = args.title or (metadata or {}).get("title") or Path(args.video).stem
    if cfg.backend == "live":
        source = FfmpegFrameSource(args.video, cfg.frame_cache_dir)
    else:
        duration = args.duration or (words[-1].end + cfg.sample_window_s)
        # synthetic refs keyed by basename so fixtures survive path changes
        source = SyntheticFrameSource(Path(args.video).name, duration)
    gateway = _gateway(cfg)
    plan = compile_plan(words, gateway, source, title, metadata, cfg)
    plan.save(args.out)
    print(f"wrote {args.out}: {len(plan.steps)} steps, "
          f"{sum(len(s.actions) for s in plan.steps)} actions")
    return 0


def cmd_kb_ingest(args: argparse.Namespace) -> int:
    cfg = _config(args)
    manifest = _require_file(args.manifest, "manifest")
    gateway = _gateway(cfg)
    kb = KnowledgeBase(gateway, store_path=args.store, corpus=args.corpus or cfg.corpus)
    count = kb.ingest_manifest(manifest)
    print(f"ingested {count} chunks into {args.store}")
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .server import create_app

    cfg = _config(args)
    plan = load_plan(_require_file(args.plan, "plan"))
    profile = UserProfile()
    if args.profile:
        with open(_require_file(args.profile, "profile"), encoding="utf-8") as fh:
            profile = UserProfile.from_dict(json.load(fh))
    gateway = _gateway(cfg)
    kb = None
    store = args.kb_store or cfg.kb_store
    if store and Path(store).exists():
        kb = KnowledgeBase(gateway, store_path=store, corpus=cfg.corpus)
    app = create_app(
        plan, profile, cfg, gateway, kb,
        frame_dir=cfg.frame_cache_dir, static_dir=args.static,
    )
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def cmd_replay(args: argparse.Namespace) -> int:
    cfg = _config(args)
    plan = load_plan(_require_file(args.plan, "plan"))
    fixture = ReplayFixture.load(_require_file(args.fixture, "fixture"))
    profile = UserProfile()
    if args.profile:
        with open(_require_file(args.profile, "profile"), encoding="utf-8") as fh:
            profile = UserProfile.from_dict(json.load(fh))
    gateway = _gateway(cfg) if (cfg.backend != "mock" or cfg.fixtures) else None
    engine = SessionEngine(gateway, cfg)
    events = replay_plan(plan, fixture, engine, profile=profile)
    check_event_invariants(events)
    sys.stdout.write(events_to_jsonl(events))
    return 0


def cmd_eval_desc(args: argparse.Namespace) -> int:
    matcher = containment_matcher if args.containment else exact_matcher
    reports = score_description_file(_require_file(args.data, "data file"), matcher)
    payload = [r.to_dict() for r in reports]
    for i, report in enumerate(reports):
        rate = ("n/a" if report.hallucination_rate is None
                else f"{report.hallucination_rate:.2f}%")
        print(f"case {i}: new={report.new_facts} missed={report.missed_facts} "
              f"hallucination={rate}")
    if args.out_prefix:
        Path(f"{args.out_prefix}.json").write_text(
            json.dumps(payload, indent=2) + "\n", encoding="utf-8"
        )
        lines = ["| Case | New facts | Missed facts | Hallucination |", "|---|---|---|---|"]
        for i, report in enumerate(reports):
            rate = ("n/a" if report.hallucination_rate is None
                    else f"{report.hallucination_rate:.2f}%")
            lines.append(f"| {i} | {report.new_facts} | {report.missed_facts} | {rate} |")
        Path(f"{args.out_prefix}.md").write_text("\n".join(lines) + "\n", encoding="utf-8")
    return 0


def cmd_eval_monitor(args: argparse.Namespace) -> int:
    labels = load_frame_labels(_require_file(args.labels, "labels CSV"))
    verdicts = load_verdict_map(_require_file(args.verdicts, "verdicts file"))
    report = score_monitoring(align_verdicts(labels, verdicts), labels)
    sys.stdout.write(report.to_markdown())
    if args.out_prefix:
        Path(f"{args.out_prefix}.json").write_text(
            json.dumps(report.to_dict(), indent=2) + "\n", encoding="utf-8"
        )
        Path(f"{args.out_prefix}.md").write_text(report.to_markdown(), encoding="utf-8")
    return 0


_COMMANDS = {
    "compile": cmd_compile,
    "kb-ingest": cmd_kb_ingest,
    "serve": cmd_serve,
    "replay": cmd_replay,
    "eval-desc": cmd_eval_desc,
    "eval-monitor": cmd_eval_monitor,
}


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (FileNotFoundError, PlanValidationError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except Exception as err:  # noqa: BLE001 - CLI boundary
        logger.exception("command failed")
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
