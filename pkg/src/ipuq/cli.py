"""Command-line front end: ad-hoc elicitation, campaigns, synthetic studies,
record-level evaluation, and the local mock endpoint."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from typing import Sequence

from .campaign import (
    CampaignConfig,
    ConfigError,
    RecordsSchemaError,
    load_run_records,
    payload_to_dict,
    records_path,
    run_campaign,
)
from .core import CandidateSet, IpuqError
from .datasets import SchemaViolationError
from .elicit.client import ChatClient, ModelEndpoint
from .elicit.loop import RetriesExhaustedError, elicit_with_retry
from .elicit.prompts import KINDS_WITH_CANDIDATES, PromptKind
from .mock import MockScript, serve_forever
from .reporting import (
    LABEL_AMBIGUOUS,
    LABEL_KINDS,
    REF_ENTROPY_PSTAR,
    REF_KINDS,
    SCORE_FIELDS,
    cost_rows,
    metric_rows,
    write_cost_csv,
    write_metric_csv,
)
from .study import (
    DEFAULT_STUDY_METHODS,
    run_synthetic_study,
    simulated_agent_client_factory,
    write_study_csv,
)
from .synth import NoiseSpec, TransformSpec, generate_icl_task

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_DATASET = 2
EXIT_PARTIAL = 3


def _add_endpoint_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--base-url", required=True, help="chat-completions URL")
    parser.add_argument("--model", required=True, help="model identifier")
    parser.add_argument(
        "--auth-env",
        default=None,
        help="name of the environment variable holding the bearer token",
    )
    parser.add_argument("--temperature", type=float, default=0.0)
    parser.add_argument("--seed", type=int, default=None)


def _endpoint_from_args(args: argparse.Namespace) -> ModelEndpoint:
    return ModelEndpoint(
        base_url=args.base_url,
        model_id=args.model,
        auth_token_env=args.auth_env,
        temperature=args.temperature,
        seed=args.seed,
    )


def _transform_from_args(args: argparse.Namespace) -> TransformSpec:
    return TransformSpec(
        steps=((args.transform, args.steps),), shift_direction=args.direction
    )


def _add_transform_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--transform", choices=("rotation", "cyclic_shift"), default="rotation"
    )
    parser.add_argument("--steps", type=int, default=1)
    parser.add_argument("--direction", choices=("left", "right"), default="left")


def _float_grid(text: str) -> list[float]:
    return [float(part) for part in text.split(",") if part.strip()]


def _int_grid(text: str) -> list[int]:
    return [int(part) for part in text.split(",") if part.strip()]


# -------------------------------------------------------------------------
# Subcommand implementations
# -------------------------------------------------------------------------


def _cmd_elicit(args: argparse.Namespace) -> int:
    endpoint = _endpoint_from_args(args)
    kind = PromptKind(args.kind)
    candidates = None
    if args.candidate:
        candidates = CandidateSet(answers=tuple(args.candidate))
    elif kind in KINDS_WITH_CANDIDATES:
        print(f"error: kind {kind.value!r} needs at least one --candidate", file=sys.stderr)
        return EXIT_FAILURE
    client = ChatClient()
    try:
        result = elicit_with_retry(
            client,
            endpoint,
            kind,
            args.question,
            candidates,
            max_attempts=args.max_attempts,
            salvage_renormalize=args.salvage,
        )
    except RetriesExhaustedError as exc:
        report = {
            "succeeded": False,
            "attempts": exc.result.attempts,
            "verdicts": [v.describe() for v in exc.result.verdicts if v is not None],
        }
        print(json.dumps(report, indent=2))
        return EXIT_FAILURE
    payload = (
        list(result.payload.answers)
        if kind == PromptKind.CANDIDATES
        else payload_to_dict(kind.value, result.payload)
    )
    print(
        json.dumps(
            {
                "succeeded": True,
                "attempts": result.attempts,
                "salvaged": result.salvaged,
                "payload": payload,
                "score": result.score,
                "score_kind": result.score_kind,
            },
            indent=2,
        )
    )
    return EXIT_OK


def _run_campaign_config(args: argparse.Namespace, *, must_exist: bool) -> int:
    config = CampaignConfig.load(args.config)
    path = records_path(config.output_dir)
    import os

    has_records = os.path.exists(path) and os.path.getsize(path) > 0
    if must_exist and not has_records:
        print(f"error: nothing to resume at {path}", file=sys.stderr)
        return EXIT_DATASET
    if not must_exist and has_records:
        print(
            f"error: records already exist at {path}; use `campaign resume`",
            file=sys.stderr,
        )
        return EXIT_DATASET
    written = run_campaign(config)
    failed = sum(1 for rec in written if not rec["elicitation"]["succeeded"])
    print(f"wrote {len(written)} records to {path} ({failed} failed)")
    return EXIT_PARTIAL if failed else EXIT_OK


def _cmd_campaign_run(args: argparse.Namespace) -> int:
    return _run_campaign_config(args, must_exist=False)


def _cmd_campaign_resume(args: argparse.Namespace) -> int:
    return _run_campaign_config(args, must_exist=True)


def _cmd_synth_gen(args: argparse.Namespace) -> int:
    transform = _transform_from_args(args)
    lines = []
    for i in range(args.count):
        task = generate_icl_task(
            transform,
            NoiseSpec(p=args.p, rng_seed=args.base_seed + 10_000 + i),
            m=args.m,
            word_length=args.word_length,
            rng_seed=args.base_seed + i,
        )
        lines.append(json.dumps(task.to_dict(), sort_keys=True, ensure_ascii=False))
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
        print(f"wrote {args.count} tasks to {args.out}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_synth_run(args: argparse.Namespace) -> int:
    transform = _transform_from_args(args)
    if args.base_url:
        endpoint = _endpoint_from_args(args)
        client = ChatClient()
        factory = lambda p: client  # noqa: E731 - fixed client for every p
    else:
        endpoint = None
        factory = simulated_agent_client_factory(width_c=args.agent_width_c)
    cells = run_synthetic_study(
        transform,
        _float_grid(args.p_grid),
        _int_grid(args.m_grid),
        args.repeats,
        endpoint,
        client_factory=factory,
        methods=tuple(args.methods.split(",")),
        word_length=args.word_length,
        base_seed=args.base_seed,
        max_attempts=args.max_attempts,
    )
    if args.out:
        write_study_csv(cells, args.out)
        print(f"wrote {len(cells)} rows to {args.out}")
    else:
        for cell in cells:
            print(json.dumps(cell.as_row(), sort_keys=True))
    return EXIT_OK


def _load_records(path: str) -> list[dict]:
    return load_run_records(path)


def _cmd_eval_auroc(args: argparse.Namespace) -> int:
    records = _load_records(args.records)
    rows = metric_rows(
        records,
        "auroc",
        dataset=args.dataset,
        score_field=args.score_field,
        label_kind=args.label,
    )
    return _emit_metric_rows(rows, args.out)


def _cmd_eval_concordance(args: argparse.Namespace) -> int:
    records = _load_records(args.records)
    rows = metric_rows(
        records,
        "concordance",
        dataset=args.dataset,
        score_field=args.score_field,
        ref_kind=args.ref,
    )
    return _emit_metric_rows(rows, args.out)


def _emit_metric_rows(rows: list[dict], out: str | None) -> int:
    if out:
        write_metric_csv(rows, out)
        print(f"wrote {len(rows)} rows to {out}")
    else:
        for row in rows:
            print(json.dumps(row, sort_keys=True))
    return EXIT_OK


def _cmd_eval_cost(args: argparse.Namespace) -> int:
    records = _load_records(args.records)
    config = CampaignConfig.load(args.config)
    rows = cost_rows(records, config.endpoints)
    if args.out:
        write_cost_csv(rows, args.out)
        print(f"wrote {len(rows)} rows to {args.out}")
    else:
        for row in rows:
            print(json.dumps(row, sort_keys=True))
    return EXIT_OK


def _cmd_mock_serve(args: argparse.Namespace) -> int:
    script = MockScript.load(args.script)
    print(f"serving mock endpoint on http://{args.host}:{args.port} (ctrl-c to stop)")
    serve_forever(script, args.host, args.port)
    return EXIT_OK


# -------------------------------------------------------------------------
# Parser wiring
# -------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ipuq",
        description="Elicit, verify and score first- and second-order uncertainty "
        "reports from chat endpoints.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p_elicit = sub.add_parser("elicit", help="elicit one question ad hoc")
    p_elicit.add_argument("--kind", required=True, choices=[k.value for k in PromptKind])
    p_elicit.add_argument("--question", required=True)
    p_elicit.add_argument(
        "--candidate",
        action="append",
        default=[],
        help="candidate answer (repeatable)",
    )
    p_elicit.add_argument("--max-attempts", type=int, default=5)
    p_elicit.add_argument("--salvage", action="store_true")
    _add_endpoint_flags(p_elicit)
    p_elicit.set_defaults(func=_cmd_elicit)

    p_campaign = sub.add_parser("campaign", help="run or resume a recorded campaign")
    campaign_sub = p_campaign.add_subparsers(dest="subcommand", required=True)
    for name, func in (("run", _cmd_campaign_run), ("resume", _cmd_campaign_resume)):
        p = campaign_sub.add_parser(name)
        p.add_argument("--config", required=True, help="campaign config JSON file")
        p.set_defaults(func=func)

    p_synth = sub.add_parser("synth", help="generate tasks or run the grid study")
    synth_sub = p_synth.add_subparsers(dest="subcommand", required=True)

    p_gen = synth_sub.add_parser("gen")
    _add_transform_flags(p_gen)
    p_gen.add_argument("--p", type=float, default=0.25)
    p_gen.add_argument("--m", type=int, default=4)
    p_gen.add_argument("--word-length", type=int, default=5)
    p_gen.add_argument("--count", type=int, default=10)
    p_gen.add_argument("--base-seed", type=int, default=0)
    p_gen.add_argument("--out", default=None)
    p_gen.set_defaults(func=_cmd_synth_gen)

    p_run = synth_sub.add_parser("run")
    _add_transform_flags(p_run)
    p_run.add_argument("--p-grid", default="0,0.25,0.5")
    p_run.add_argument("--m-grid", default="1,5,20,80")
    p_run.add_argument("--repeats", type=int, default=5)
    p_run.add_argument("--word-length", type=int, default=4)
    p_run.add_argument("--base-seed", type=int, default=0)
    p_run.add_argument("--max-attempts", type=int, default=5)
    p_run.add_argument("--methods", default=",".join(DEFAULT_STUDY_METHODS))
    p_run.add_argument(
        "--agent-width-c",
        type=float,
        default=1.0,
        help="interval width constant for the in-process simulated agent",
    )
    p_run.add_argument("--base-url", default=None, help="use a real endpoint instead")
    p_run.add_argument("--model", default=None)
    p_run.add_argument("--auth-env", default=None)
    p_run.add_argument("--temperature", type=float, default=0.0)
    p_run.add_argument("--seed", type=int, default=None)
    p_run.add_argument("--out", default=None)
    p_run.set_defaults(func=_cmd_synth_run)

    p_eval = sub.add_parser("eval", help="metrics over a records file")
    eval_sub = p_eval.add_subparsers(dest="subcommand", required=True)

    p_auroc = eval_sub.add_parser("auroc")
    p_auroc.add_argument("--records", required=True)
    p_auroc.add_argument("--dataset", default="records")
    p_auroc.add_argument("--score-field", choices=SCORE_FIELDS, default="first_order")
    p_auroc.add_argument("--label", choices=LABEL_KINDS, default=LABEL_AMBIGUOUS)
    p_auroc.add_argument("--out", default=None)
    p_auroc.set_defaults(func=_cmd_eval_auroc)

    p_conc = eval_sub.add_parser("concordance")
    p_conc.add_argument("--records", required=True)
    p_conc.add_argument("--dataset", default="records")
    p_conc.add_argument("--score-field", choices=SCORE_FIELDS, default="first_order")
    p_conc.add_argument("--ref", choices=REF_KINDS, default=REF_ENTROPY_PSTAR)
    p_conc.add_argument("--out", default=None)
    p_conc.set_defaults(func=_cmd_eval_concordance)

    p_cost = eval_sub.add_parser("cost")
    p_cost.add_argument("--records", required=True)
    p_cost.add_argument("--config", required=True, help="config supplying token prices")
    p_cost.add_argument("--out", default=None)
    p_cost.set_defaults(func=_cmd_eval_cost)

    p_mock = sub.add_parser("mock", help="local deterministic endpoint")
    mock_sub = p_mock.add_subparsers(dest="subcommand", required=True)
    p_serve = mock_sub.add_parser("serve")
    p_serve.add_argument("--script", required=True, help="mock script JSON file")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8139)
    p_serve.set_defaults(func=_cmd_mock_serve)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except (SchemaViolationError, ConfigError, RecordsSchemaError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATASET
    except (FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATASET
    except IpuqError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
