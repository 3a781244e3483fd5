"""Command-line orchestration for the judging pipeline.

Verbs:
  judge     score table -> binary qrels (direct generation or thresholding)
  sweep     threshold sweep against gold qrels, writes the curve + selection
  transfer  route per-dataset sweep selections through a transfer plan
  eval      evaluate one run against qrels under one metric
  agree     Cohen's kappa between predicted and gold qrels
  rankcorr  Kendall's tau between system orderings under two qrels
  bias      cross-evaluate a run set under every judge; scatter CSV + report
  convert   binarize graded qrels

Conventions: outputs are written atomically (temp file + rename) and are
byte-identical across re-runs on the same inputs; floats in reports use 4
decimal places. A JSON config file (--config) may supply any flag of the
verb by name; explicit flags win. JUDGEKIT_THREADS caps internal worker
threads. Exit codes: 0 success, 1 domain/data error, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping, Sequence

from . import __version__
from .adapt import (
    SweepObjective,
    SweepResult,
    ThresholdGrid,
    TokenMap,
    TransferPlan,
    apply_transfer,
    judge_direct,
    judge_threshold,
    sweep,
)
from .agreement import OrderingPair, cohen_kappa, confusion, kendall_tau_a, kendall_tau_b
from .bias import HUMAN_ROW, SystemCatalog, bias_report, cross_evaluate, rank_systems, scatter_data
from .errors import JudgekitError, MissingSource
from .metrics import MetricSpec, evaluate_run
from .trec_io import binarize, load_qrels, load_run, load_scores, write_qrels


class UsageError(Exception):
    """Bad invocation (missing/conflicting options); maps to exit code 2."""


@dataclass(frozen=True)
class Command:
    verb: str
    options: dict[str, Any]


@dataclass(frozen=True)
class _Opt:
    name: str
    kind: type = str
    choices: tuple[str, ...] | None = None
    required: bool = False
    default: Any = None
    help: str = ""

    @property
    def flag(self) -> str:
        return "--" + self.name.replace("_", "-")


_VERBS: dict[str, tuple[_Opt, ...]] = {
    "judge": (
        _Opt("scores", required=True, help="score-table TSV to adapt"),
        _Opt("strategy", choices=("direct", "threshold"), required=True, help="adaptation strategy"),
        _Opt("theta", kind=float, help="threshold for --strategy threshold"),
        _Opt("transfer", help="thetas JSON from the transfer verb (alternative to --theta)"),
        _Opt("dataset", help="dataset id to look up in --transfer"),
        _Opt("token_map", help="JSON {token: 0|1} for --strategy direct (default true/false)"),
        _Opt("out", required=True, help="output qrels file"),
    ),
    "sweep": (
        _Opt("scores", required=True, help="score-table TSV"),
        _Opt("gold", required=True, help="gold qrels file"),
        _Opt("cutoff", kind=int, default=2, help="binarization cutoff for the gold qrels"),
        _Opt("objective", choices=("kappa", "tau"), default="kappa", help="sweep objective"),
        _Opt("metric", help="metric for the tau objective, e.g. map@100"),
        _Opt("runs", help="directory of <system>.run files (tau objective)"),
        _Opt("grid", default="auto", help="auto | unit | wide | start:stop:step | comma list"),
        _Opt("missing", choices=("error", "zero"), default="error", help="policy for gold pairs without scores"),
        _Opt("out", required=True, help="output sweep JSON"),
    ),
    "transfer": (
        _Opt("plan", default="trecdl-paper", help="preset name or JSON file {target: source}"),
        _Opt("sweeps", required=True, help="directory of <dataset>.json sweep results"),
        _Opt("out", required=True, help="output thetas JSON {dataset: theta}"),
    ),
    "eval": (
        _Opt("run", required=True, help="run file"),
        _Opt("qrels", required=True, help="qrels file"),
        _Opt("metric", required=True, help="metric name, e.g. map@100"),
        _Opt("cutoff", kind=int, help="binarize qrels at this cutoff first (default: use grades as-is)"),
        _Opt("per_topic", kind=bool, help="also print per-topic values"),
        _Opt("out", help="write the report here instead of stdout"),
    ),
    "agree": (
        _Opt("pred", required=True, help="predicted qrels file"),
        _Opt("gold", required=True, help="gold qrels file"),
        _Opt("cutoff", kind=int, default=2, help="binarization cutoff for the gold qrels"),
        _Opt("pred_cutoff", kind=int, default=1, help="binarization cutoff for the predicted qrels"),
        _Opt("missing", choices=("error", "zero"), default="error", help="policy for unpredicted gold pairs"),
        _Opt("degenerate", choices=("error", "one"), default="error", help="policy when chance agreement is 1"),
        _Opt("judge_id", default="-", help="label for the report's judge column"),
        _Opt("dataset_id", default="-", help="label for the report's dataset column"),
        _Opt("out", help="write the report here instead of stdout"),
    ),
    "rankcorr": (
        _Opt("pred", required=True, help="predicted qrels file"),
        _Opt("gold", required=True, help="gold qrels file"),
        _Opt("runs", required=True, help="directory of <system>.run files"),
        _Opt("metric", required=True, help="metric name, e.g. map@100"),
        _Opt("cutoff", kind=int, default=2, help="binarization cutoff for the gold qrels"),
        _Opt("pred_cutoff", kind=int, default=1, help="binarization cutoff for the predicted qrels"),
        _Opt("tau", choices=("b", "a"), default="b", help="tau variant"),
        _Opt("judge_id", default="-", help="label for the report's judge column"),
        _Opt("dataset_id", default="-", help="label for the report's dataset column"),
        _Opt("out", help="write the report here instead of stdout"),
    ),
    "bias": (
        _Opt("catalog", required=True, help="catalog JSON with systems and judges"),
        _Opt("runs", required=True, help="directory of <system>.run files"),
        _Opt("judges", required=True, help="directory of <judge>.qrels files"),
        _Opt("human", required=True, help="human qrels file"),
        _Opt("metric", default="map@100", help="metric name"),
        _Opt("cutoff", kind=int, default=2, help="binarization cutoff for the human qrels"),
        _Opt("judge_cutoff", kind=int, default=1, help="binarization cutoff for judge qrels"),
        _Opt("baseline", help="system id for baseline-overestimation deltas"),
        _Opt("out_scatter", required=True, help="output scatter CSV"),
        _Opt("out_report", required=True, help="output report JSON"),
    ),
    "convert": (
        _Opt("qrels", required=True, help="graded qrels file"),
        _Opt("cutoff", kind=int, default=2, help="binarization cutoff"),
        _Opt("out", required=True, help="output binary qrels file"),
    ),
}

_VERB_HELP = {
    "judge": "adapt a score table into binary qrels",
    "sweep": "sweep thresholds against gold qrels",
    "transfer": "route selected thetas through a transfer plan",
    "eval": "evaluate a run against qrels",
    "agree": "Cohen's kappa between two qrels",
    "rankcorr": "Kendall's tau between system orderings",
    "bias": "cross-evaluate runs under every judge",
    "convert": "binarize graded qrels",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="judgekit", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=f"judgekit {__version__}")
    subparsers = parser.add_subparsers(dest="verb", metavar="VERB")
    for verb, options in _VERBS.items():
        sub = subparsers.add_parser(verb, help=_VERB_HELP[verb])
        sub.add_argument("--config", help="JSON file supplying any flag of this verb by name")
        for opt in options:
            if opt.kind is bool:
                sub.add_argument(opt.flag, dest=opt.name, action="store_true", help=opt.help)
            elif opt.kind in (int, float):
                sub.add_argument(opt.flag, dest=opt.name, type=opt.kind, help=opt.help)
            else:
                sub.add_argument(opt.flag, dest=opt.name, choices=opt.choices, help=opt.help)
    return parser


def _merge_config(verb: str, options: dict[str, Any], config_path: str) -> None:
    table = {opt.name: opt for opt in _VERBS[verb]}
    with open(config_path, encoding="utf-8") as handle:
        config = json.load(handle)
    if not isinstance(config, dict):
        raise UsageError(f"config {config_path} must be a JSON object")
    for raw_key, value in config.items():
        key = raw_key.replace("-", "_")
        opt = table.get(key)
        if opt is None:
            raise UsageError(f"config {config_path}: unknown option {raw_key!r} for verb {verb!r}")
        if options.get(key) not in (None, False):
            continue  # explicit flag wins
        if opt.kind is bool:
            if not isinstance(value, bool):
                raise UsageError(f"config {config_path}: {raw_key!r} must be a boolean")
            options[key] = value
        elif opt.kind is int:
            if isinstance(value, bool) or not isinstance(value, int):
                raise UsageError(f"config {config_path}: {raw_key!r} must be an integer")
            options[key] = value
        elif opt.kind is float:
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise UsageError(f"config {config_path}: {raw_key!r} must be a number")
            options[key] = float(value)
        else:
            if not isinstance(value, str):
                raise UsageError(f"config {config_path}: {raw_key!r} must be a string")
            if opt.choices and value not in opt.choices:
                raise UsageError(f"config {config_path}: {raw_key!r} must be one of {opt.choices}")
            options[key] = value


def parse_args(argv: Sequence[str] | None = None) -> Command:
    """Parse argv into a validated Command; --help/--version exit via argparse."""
    parser = build_parser()
    namespace = parser.parse_args(argv)
    if namespace.verb is None:
        raise UsageError("a verb is required; see --help")
    verb = namespace.verb
    options = {key: value for key, value in vars(namespace).items() if key not in ("verb", "config")}
    if namespace.config:
        _merge_config(verb, options, namespace.config)
    for opt in _VERBS[verb]:
        if options.get(opt.name) is None and opt.default is not None:
            options[opt.name] = opt.default
        if opt.kind is bool and options.get(opt.name) is None:
            options[opt.name] = False
        if opt.required and options.get(opt.name) is None:
            raise UsageError(f"{opt.flag} is required for `{verb}`")
    return Command(verb=verb, options=options)


def _fmt(value: float) -> str:
    return f"{value + 0.0:.4f}"


def _fmt_rank(value: float) -> str:
    return f"{value:.1f}"


def _write_text_atomic(path: str, text: str) -> None:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    handle, tmp_name = tempfile.mkstemp(dir=target.parent, prefix=target.name + ".", suffix=".tmp")
    try:
        with os.fdopen(handle, "w", encoding="utf-8", newline="") as tmp:
            tmp.write(text)
        os.replace(tmp_name, target)
    except BaseException:
        try:
            os.unlink(tmp_name)
        except OSError:
            pass
        raise


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        _write_text_atomic(out, text)


def _max_workers() -> int:
    raw = os.environ.get("JUDGEKIT_THREADS")
    if raw is None:
        return 1
    try:
        value = int(raw)
    except ValueError:
        raise UsageError(f"JUDGEKIT_THREADS must be an integer, got {raw!r}") from None
    return max(1, value)


def _load_runs_dir(path: str) -> dict[str, Any]:
    directory = Path(path)
    if not directory.is_dir():
        raise UsageError(f"{path} is not a directory")
    runs = {run_path.stem: load_run(run_path) for run_path in sorted(directory.glob("*.run"))}
    if not runs:
        raise JudgekitError(f"no .run files found in {path}")
    return runs


def _handle_judge(options: Mapping[str, Any]) -> int:
    scores = load_scores(options["scores"])
    if options["strategy"] == "direct":
        if options.get("theta") is not None or options.get("transfer"):
            raise UsageError("--theta/--transfer only apply to --strategy threshold")
        token_map = TokenMap()
        if options.get("token_map"):
            with open(options["token_map"], encoding="utf-8") as handle:
                token_map = TokenMap(json.load(handle))
        predicted = judge_direct(scores, token_map)
    else:
        if options.get("token_map"):
            raise UsageError("--token-map only applies to --strategy direct")
        theta = options.get("theta")
        transfer_path = options.get("transfer")
        if (theta is None) == (transfer_path is None):
            raise UsageError("--strategy threshold needs exactly one of --theta or --transfer")
        if transfer_path is not None:
            dataset = options.get("dataset")
            if dataset is None:
                raise UsageError("--transfer needs --dataset to pick the theta")
            with open(transfer_path, encoding="utf-8") as handle:
                thetas = json.load(handle)
            if dataset not in thetas:
                raise MissingSource(f"dataset {dataset!r} not present in {transfer_path}")
            theta = float(thetas[dataset])
        predicted = judge_threshold(scores, theta)
    _write_text_atomic(options["out"], write_qrels(predicted))
    return 0


def _parse_grid(text: str, scores) -> ThresholdGrid:
    try:
        if text == "auto":
            return ThresholdGrid.for_scores(scores)
        if text == "unit":
            return ThresholdGrid.unit()
        if text == "wide":
            return ThresholdGrid.wide()
        if ":" in text:
            parts = text.split(":")
            if len(parts) != 3:
                raise UsageError(f"--grid range must be start:stop:step, got {text!r}")
            start, stop, step = (float(part) for part in parts)
            if step <= 0:
                raise UsageError("--grid step must be positive")
            thetas = []
            index = 0
            while True:
                value = start + index * step
                if value > stop + step * 1e-9:
                    break
                thetas.append(value)
                index += 1
            return ThresholdGrid(tuple(thetas))
        return ThresholdGrid(tuple(float(part) for part in text.split(",")))
    except (ValueError, JudgekitError) as exc:
        raise UsageError(f"bad --grid {text!r}: {exc}") from None


def _handle_sweep(options: Mapping[str, Any]) -> int:
    scores = load_scores(options["scores"])
    gold = binarize(load_qrels(options["gold"]), options["cutoff"])
    grid = _parse_grid(options["grid"], scores)
    runs = None
    if options["objective"] == "tau":
        if not options.get("metric") or not options.get("runs"):
            raise UsageError("--objective tau needs --metric and --runs")
        objective = SweepObjective("tau", MetricSpec.parse(options["metric"]))
        runs = _load_runs_dir(options["runs"])
    else:
        if options.get("runs"):
            raise UsageError("--runs only applies to --objective tau")
        objective = SweepObjective("kappa")
    result = sweep(scores, gold, grid, objective, runs, missing=options["missing"], max_workers=_max_workers())
    payload = {"objective": str(objective), **result.to_dict()}
    _write_text_atomic(options["out"], json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return 0


def _handle_transfer(options: Mapping[str, Any]) -> int:
    plan_ref = options["plan"]
    if plan_ref in TransferPlan.PRESETS:
        plan = TransferPlan.preset(plan_ref)
    else:
        with open(plan_ref, encoding="utf-8") as handle:
            plan = TransferPlan(json.load(handle))
    sweeps_dir = Path(options["sweeps"])
    per_source: dict[str, SweepResult] = {}
    for source in sorted(set(plan.assignments.values())):
        source_path = sweeps_dir / f"{source}.json"
        if not source_path.is_file():
            raise MissingSource(f"no sweep result for source dataset {source!r} at {source_path}")
        with open(source_path, encoding="utf-8") as handle:
            per_source[source] = SweepResult.from_dict(json.load(handle))
    thetas = apply_transfer(plan, per_source)
    _write_text_atomic(options["out"], json.dumps(thetas, indent=2, sort_keys=True) + "\n")
    return 0


def _handle_eval(options: Mapping[str, Any]) -> int:
    run = load_run(options["run"])
    qrels = load_qrels(options["qrels"])
    if options.get("cutoff") is not None:
        qrels = binarize(qrels, options["cutoff"])
    spec = MetricSpec.parse(options["metric"])
    evaluation = evaluate_run(run, qrels, spec)
    lines = [f"num_q\tall\t{evaluation.evaluable_topics}"]
    if options["per_topic"]:
        lines.extend(f"{spec}\t{topic}\t{_fmt(value)}" for topic, value in sorted(evaluation.per_topic.items()))
    lines.append(f"{spec}\tall\t{_fmt(evaluation.mean)}")
    if evaluation.evaluable_topics == 0:
        print("warning: no evaluable topics; mean reported as 0", file=sys.stderr)
    _emit("\n".join(lines) + "\n", options.get("out"))
    return 0


def _handle_agree(options: Mapping[str, Any]) -> int:
    predicted = binarize(load_qrels(options["pred"]), options["pred_cutoff"])
    gold = binarize(load_qrels(options["gold"]), options["cutoff"])
    table = confusion(predicted, gold, missing=options["missing"])
    kappa = cohen_kappa(table, degenerate=options["degenerate"])
    lines = [
        "judge\tdataset\tkappa\tn\ttp\tfp\tfn\ttn",
        f"{options['judge_id']}\t{options['dataset_id']}\t{_fmt(kappa)}\t{table.total}"
        f"\t{table.tp}\t{table.fp}\t{table.fn}\t{table.tn}",
    ]
    _emit("\n".join(lines) + "\n", options.get("out"))
    return 0


def _handle_rankcorr(options: Mapping[str, Any]) -> int:
    predicted = binarize(load_qrels(options["pred"]), options["pred_cutoff"])
    gold = binarize(load_qrels(options["gold"]), options["cutoff"])
    runs = _load_runs_dir(options["runs"])
    spec = MetricSpec.parse(options["metric"])
    system_ids = sorted(runs)
    gold_means = [evaluate_run(runs[system], gold, spec).mean for system in system_ids]
    pred_means = [evaluate_run(runs[system], predicted, spec).mean for system in system_ids]
    pair = OrderingPair(system_ids, gold_means, pred_means)
    tau = kendall_tau_b(pair) if options["tau"] == "b" else kendall_tau_a(pair)
    lines = [
        "judge\tdataset\tmetric\ttau\tn_systems",
        f"{options['judge_id']}\t{options['dataset_id']}\t{spec}\t{_fmt(tau)}\t{len(system_ids)}",
    ]
    _emit("\n".join(lines) + "\n", options.get("out"))
    return 0


def _scatter_csv(rows) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["judge", "system", "family", "human_value", "judge_value", "human_rank", "judge_rank"])
    for row in rows:
        writer.writerow(
            [row.judge, row.system, row.family, _fmt(row.human_value), _fmt(row.judge_value),
             _fmt_rank(row.human_rank), _fmt_rank(row.judge_rank)]
        )
    return buffer.getvalue()


def _report_json(matrix, report) -> str:
    ranks = {row: rank_systems(values) for row, values in matrix.rows.items()}
    payload = {
        "metric": str(matrix.metric),
        "definitions": {
            "rank_delta": "human rank minus judge rank; positive = the judge ranks the system higher than humans do",
            "value_delta": "judge mean minus human mean; positive = the judge scores the system higher",
            "family_value_delta": "mean of value_delta over (judge in judge_family, system in system_family)",
            "family_rank_delta": "mean of rank_delta over (judge in judge_family, system in system_family)",
        },
        "matrix": {row: {system: round(value, 4) for system, value in sorted(values.items())} for row, values in sorted(matrix.rows.items())},
        "evaluable": {row: dict(sorted(counts.items())) for row, counts in sorted(matrix.counts.items())},
        "ranks": {row: dict(sorted(row_ranks.items())) for row, row_ranks in sorted(ranks.items())},
        "self_preference": [
            {
                "judge": item.judge,
                "system": item.system,
                "judge_rank": item.judge_rank,
                "human_rank": item.human_rank,
                "rank_delta": item.rank_delta,
                "value_delta": round(item.value_delta, 4),
            }
            for item in report.self_preference
        ],
        "family_deltas": [
            {
                "judge_family": item.judge_family,
                "system_family": item.system_family,
                "value_delta": round(item.value_delta, 4),
                "rank_delta": round(item.rank_delta, 4),
            }
            for item in report.family_deltas
        ],
        "baseline": None
        if report.baseline_system is None
        else {
            "system": report.baseline_system,
            "deltas": [{"judge": item.judge, "delta": round(item.delta, 4)} for item in report.baseline_deltas],
        },
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _report_table(matrix, report) -> str:
    judges = matrix.judge_ids()
    systems = matrix.system_ids()
    lines = [f"metric: {matrix.metric}", ""]
    header = ["system", HUMAN_ROW] + judges
    widths = [max(len(header[0]), *(len(s) for s in systems))] + [max(len(name), 6) for name in header[1:]]
    lines.append("  ".join(name.ljust(width) for name, width in zip(header, widths)))
    for system in systems:
        cells = [system.ljust(widths[0])]
        for column, row_id in enumerate([HUMAN_ROW] + judges, start=1):
            cells.append(_fmt(matrix.rows[row_id][system]).ljust(widths[column]))
        lines.append("  ".join(cells).rstrip())
    lines.append("")
    lines.append("self-preference (rank_delta = human_rank - judge_rank; positive = judge favors its own system):")
    if report.self_preference:
        for item in report.self_preference:
            lines.append(
                f"  {item.judge}: own={item.system} judge_rank={_fmt_rank(item.judge_rank)} "
                f"human_rank={_fmt_rank(item.human_rank)} rank_delta={item.rank_delta:+.1f} "
                f"value_delta={item.value_delta:+.4f}"
            )
    else:
        lines.append("  (no judge declares an own system)")
    lines.append("")
    lines.append("family deltas vs human (value primary, rank secondary):")
    for item in report.family_deltas:
        lines.append(
            f"  {item.judge_family} -> {item.system_family}: value_delta={item.value_delta:+.4f} "
            f"rank_delta={item.rank_delta:+.2f}"
        )
    if report.baseline_system is not None:
        lines.append("")
        lines.append(f"baseline overestimation for {report.baseline_system} (judge value - human value):")
        for item in report.baseline_deltas:
            lines.append(f"  {item.judge}: {item.delta:+.4f}")
    return "\n".join(lines) + "\n"


def _handle_bias(options: Mapping[str, Any]) -> int:
    catalog = SystemCatalog.load(options["catalog"])
    runs_dir = Path(options["runs"])
    judges_dir = Path(options["judges"])
    runs = {system: load_run(runs_dir / f"{system}.run") for system in sorted(catalog.systems)}
    judges = {
        judge: binarize(load_qrels(judges_dir / f"{judge}.qrels"), options["judge_cutoff"])
        for judge in sorted(catalog.judges)
    }
    human = binarize(load_qrels(options["human"]), options["cutoff"])
    spec = MetricSpec.parse(options["metric"])
    matrix = cross_evaluate(runs, judges, human, spec, max_workers=_max_workers())
    report = bias_report(matrix, catalog, baseline=options.get("baseline"))
    scatter_text = _scatter_csv(scatter_data(matrix, catalog))
    report_text = _report_json(matrix, report)
    table_text = _report_table(matrix, report)
    _write_text_atomic(options["out_scatter"], scatter_text)
    _write_text_atomic(options["out_report"], report_text)
    sys.stdout.write(table_text)
    return 0


def _handle_convert(options: Mapping[str, Any]) -> int:
    qrels = binarize(load_qrels(options["qrels"]), options["cutoff"])
    _write_text_atomic(options["out"], write_qrels(qrels))
    return 0


_HANDLERS = {
    "judge": _handle_judge,
    "sweep": _handle_sweep,
    "transfer": _handle_transfer,
    "eval": _handle_eval,
    "agree": _handle_agree,
    "rankcorr": _handle_rankcorr,
    "bias": _handle_bias,
    "convert": _handle_convert,
}


def execute(command: Command) -> int:
    """Run a validated command; raises domain/usage errors to the caller."""
    return _HANDLERS[command.verb](command.options)


def main(argv: Sequence[str] | None = None) -> int:
    try:
        command = parse_args(argv)
    except SystemExit as exc:  # argparse --help/--version or flag errors
        return exc.code if isinstance(exc.code, int) else 2
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    try:
        return execute(command)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except JudgekitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entry() -> None:
    sys.exit(main())
