"""Command line: explain a dataset's test split, or benchmark explainers.

`explain` loads a CSV, splits it, fits (or loads) the model, builds the
chosen explainer, and writes one JSON document per test instance, with
an optional terminal bar rendering.  `bench` times the explainers and
optionally adds stability, robustness, and the perturbation-grid sweep,
emitting the report as JSON and CSV.  Exit codes: 1 for configuration
errors, 2 for data errors, 3 for unexpected runtime failures.
"""

import argparse
import csv
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .dataset import CATEGORICAL, NUMERIC, load_csv, split_dataset
from .errors import CalexError, ConfigError, DataError
from .evaluate import (BASELINE, FAST, EvalRecord, EvalReport,
                       _config_dict, measure_robustness, measure_stability,
                       measure_time, report_to_csv, report_to_json,
                       run_ablation)
from .explain_baseline import explain_factual_dataset, init_baseline
from .explain_fast import ThresholdSpec, explain_dataset, init_fast
from .models import ExternalScores, fit_knn, load_external_scores
from .perturb import (GAUSSIAN, NOISE_ONLY, PERMUTE_NOISE, UNIFORM,
                      PerturbConfig)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def _build_parser():
    parser = _Parser(prog="calex", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    default_seed = int(os.environ.get("CALEX_SEED", "42"))

    def add_common(p):
        p.add_argument("--config", help="JSON file with defaults for any flag")
        p.add_argument("--data", required=True, help="CSV file with header row")
        p.add_argument("--target", help="target column (default: last column)")
        p.add_argument("--task", choices=["auto", "classification",
                                          "regression"], default="auto")
        p.add_argument("--model", default="knn:5",
                       help="knn:<k> or external:<path>")
        p.add_argument("--train-frac", type=float, default=0.5)
        p.add_argument("--cal-frac", type=float, default=0.25)
        p.add_argument("--noise-type", choices=[UNIFORM, GAUSSIAN],
                       default=UNIFORM)
        p.add_argument("--scale-factor", type=int, default=5)
        p.add_argument("--severity", type=float, default=0.5)
        p.add_argument("--numeric-mode", choices=[PERMUTE_NOISE, NOISE_ONLY],
                       default=PERMUTE_NOISE)
        p.add_argument("--percentiles", default="5,95",
                       help="low,high interval percentiles")
        p.add_argument("--threshold", type=float,
                       help="explain p(target vs threshold); regression only")
        p.add_argument("--direction", choices=["below", "above"],
                       default="above")
        p.add_argument("--seed", type=int, default=default_seed,
                       help="master seed (env CALEX_SEED overrides default)")

    pe = sub.add_parser("explain", help="write per-instance explanations")
    add_common(pe)
    pe.add_argument("--explainer", choices=[FAST, BASELINE], default=FAST)
    pe.add_argument("--out", required=True, help="output directory")
    pe.add_argument("--plot", action="store_true",
                    help="render terminal bar charts")
    pe.add_argument("--jobs", type=int, default=1,
                    help="worker threads for baseline explanations")

    pb = sub.add_parser("bench", help="time and compare explainers")
    add_common(pb)
    pb.add_argument("--explainers", default="fast,baseline",
                    help="comma-separated subset of fast,baseline")
    pb.add_argument("--runs", type=int, default=5)
    pb.add_argument("--stability", action="store_true")
    pb.add_argument("--robustness", action="store_true")
    pb.add_argument("--grid", action="store_true",
                    help="sweep the full perturbation grid")
    pb.add_argument("--out", help="directory for report.json / report.csv")
    return parser


def _apply_config_file(parser, argv):
    if "--config" not in argv:
        return argv
    at = argv.index("--config")
    if at + 1 >= len(argv):
        raise ConfigError("--config needs a file path")
    path = argv[at + 1]
    try:
        with open(path, encoding="utf-8") as fh:
            defaults = json.load(fh)
    except OSError as e:
        raise ConfigError(f"cannot read config file: {e}") from None
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: invalid JSON: {e}") from None
    if not isinstance(defaults, dict):
        raise ConfigError(f"{path}: config file must hold a JSON object")
    known = {a.dest for a in parser._actions}
    for sp in parser._subparsers._group_actions[0].choices.values():
        known |= {a.dest for a in sp._actions}
    unknown = set(defaults) - known
    if unknown:
        raise ConfigError(f"{path}: unknown config keys {sorted(unknown)}")
    for sp in parser._subparsers._group_actions[0].choices.values():
        sp.set_defaults(**defaults)
    return argv


def _target_name(path, target):
    if target:
        return target
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            header = next(csv.reader(fh), None)
    except OSError as e:
        raise DataError(f"cannot read {path}: {e}") from None
    if not header:
        raise DataError(f"{path}: empty file")
    return header[-1]


def _load(args):
    hints = {}
    name = _target_name(args.data, args.target)
    if args.task == "classification":
        hints[name] = CATEGORICAL
    elif args.task == "regression":
        hints[name] = NUMERIC
    d = load_csv(args.data, hints, args.target)
    return d, split_dataset(d, args.train_frac, args.cal_frac, args.seed)


def _model(args, d, split):
    spec = args.model
    kind, _, rest = spec.partition(":")
    if kind == "knn":
        try:
            k = int(rest)
        except ValueError:
            raise ConfigError(f"--model knn needs an integer k, got {spec!r}")
        return fit_knn(split.proper_training, k)
    if kind == "external":
        if not rest:
            raise ConfigError("--model external needs a path")
        return load_external_scores(rest, d)
    raise ConfigError(f"unknown model spec {spec!r}; use knn:<k> or "
                      f"external:<path>")


def _percentiles(args):
    parts = args.percentiles.split(",")
    try:
        lo, hi = (float(p) for p in parts)
    except ValueError:
        raise ConfigError(f"--percentiles needs low,high; got "
                          f"{args.percentiles!r}")
    return lo, hi


def _perturb_config(args):
    return PerturbConfig(args.noise_type, args.scale_factor, args.severity,
                         args.seed, args.numeric_mode)


def _threshold(args, d):
    if args.threshold is None:
        return None
    if d.target_kind != NUMERIC:
        raise ConfigError("--threshold applies to regression tasks only")
    return ThresholdSpec(args.threshold, args.direction)


def _num(v):
    v = float(v)
    return v if math.isfinite(v) else None


def explanation_to_dict(ex):
    doc = {"instance_id": ex.instance_id,
           "task": ex.task,
           "prediction": {"value": _num(ex.prediction), "low": _num(ex.low),
                          "high": _num(ex.high)}}
    if ex.positive_class is not None:
        doc["positive_class"] = ex.positive_class
    if ex.threshold is not None:
        doc["threshold"] = {"t": ex.threshold.t,
                            "direction": ex.threshold.direction}
    feats = []
    for f in ex.features:
        fd = {"name": f.name,
              "value": f.value if isinstance(f.value, str) else _num(f.value),
              "weight": _num(f.weight), "low": _num(f.low),
              "high": _num(f.high)}
        if f.condition is not None:
            fd["condition"] = f.condition
        feats.append(fd)
    doc["features"] = feats
    return doc


def _fmt(v):
    if v is None or not math.isfinite(v):
        return "unbounded"
    return f"{v:+.4f}"


def render_explanation(ex, width=30):
    head = (f"instance {ex.instance_id}  prediction {_fmt(ex.prediction)}  "
            f"[{_fmt(ex.low)}, {_fmt(ex.high)}]")
    if ex.positive_class is not None:
        head += f"  class {ex.positive_class}"
    if ex.threshold is not None:
        side = ">" if ex.threshold.direction == "above" else "<="
        head += f"  p(target {side} {ex.threshold.t:g})"
    lines = [head]
    feats = sorted(ex.features, key=lambda f: -abs(f.weight))
    top = max((abs(f.weight) for f in feats), default=0.0) or 1.0
    for f in feats:
        shown = f.value if isinstance(f.value, str) else f"{f.value:.4g}"
        label = f.condition or f"{f.name} = {shown}"
        bar = "#" * max(1, round(abs(f.weight) / top * width)) \
            if f.weight != 0 else ""
        lines.append(f"  {label:<28} {f.weight:+.4f}  {bar:<{width}}  "
                     f"[{_fmt(f.low)}, {_fmt(f.high)}]")
    return "\n".join(lines)


def cmd_explain(args):
    d, split = _load(args)
    model = _model(args, d, split)
    config = _perturb_config(args)
    threshold = _threshold(args, d)
    percentiles = _percentiles(args)
    if args.explainer == FAST:
        e = init_fast(model, split.calibration, config, threshold, percentiles)
        explanations = explain_dataset(e, split.test)
    else:
        e = init_baseline(model, split.calibration, threshold, percentiles)
        test = split.test
        if args.jobs > 1:
            def one(i):
                return explain_factual_dataset(e, test.subset([i]))[0]
            with ThreadPoolExecutor(max_workers=args.jobs) as pool:
                explanations = list(pool.map(one, range(len(test))))
        else:
            explanations = explain_factual_dataset(e, test)
    os.makedirs(args.out, exist_ok=True)
    for ex in explanations:
        doc = json.dumps(explanation_to_dict(ex), indent=2, allow_nan=False)
        path = os.path.join(args.out, f"explanation_{ex.instance_id}.json")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(doc + "\n")
        if args.plot:
            print(render_explanation(ex))
    print(f"wrote {len(explanations)} explanations to {args.out}")
    return 0


def cmd_bench(args):
    d, split = _load(args)
    model = _model(args, d, split)
    config = _perturb_config(args)
    threshold = _threshold(args, d)
    percentiles = _percentiles(args)
    names = [n.strip() for n in args.explainers.split(",") if n.strip()]
    if not names:
        raise ConfigError("--explainers names no explainer")
    for n in names:
        if n not in (FAST, BASELINE):
            raise ConfigError(f"unknown explainer {n!r}")
    dataset_name = os.path.basename(args.data)
    records = []
    timings = {}
    for n in names:
        t = measure_time(model, split.calibration, split.test, n, config,
                         threshold, percentiles)
        timings[n] = t
        stability = robustness = pred_var = None
        if args.stability:
            stability = measure_stability(model, split.calibration,
                                          split.test, n, args.runs, config,
                                          threshold, percentiles)
        if args.robustness:
            if isinstance(model, ExternalScores):
                raise ConfigError("robustness refits the model per run; use "
                                  "a built-in model")
            kind, _, rest = args.model.partition(":")
            k = int(rest)
            pool_ids = np.concatenate([split.proper_training.row_ids,
                                       split.calibration.row_ids])
            pool = d.subset(np.flatnonzero(np.isin(d.row_ids, pool_ids)))
            robustness, pred_var = measure_robustness(
                pool, split.test, lambda tr: fit_knn(tr, k), n, args.runs,
                args.seed, config, threshold, percentiles,
                args.train_frac, args.cal_frac)
        records.append(EvalRecord(dataset_name, n, _config_dict(config),
                                  t.init_seconds, t.mean_seconds,
                                  t.median_seconds, t.mean_model_evals,
                                  stability, robustness, pred_var))
    if args.grid:
        grid_report = run_ablation(model, split.calibration, split.test,
                                   dataset_name, threshold, percentiles,
                                   args.seed)
        records.extend(grid_report.records)
    report = EvalReport(tuple(records))

    header = (f"{'explainer':<10} {'init_s':>10} {'mean_s':>10} "
              f"{'median_s':>10} {'stability':>11} {'robustness':>11}")
    print(header)
    for r in records:
        def cell(v):
            return "-" if v is None else f"{v:.3g}"
        print(f"{r.explainer:<10} {r.init_seconds:>10.4f} "
              f"{r.mean_explain_seconds:>10.6f} "
              f"{r.median_explain_seconds:>10.6f} {cell(r.stability):>11} "
              f"{cell(r.robustness):>11}")
    if FAST in timings and BASELINE in timings and \
            timings[FAST].mean_seconds > 0:
        speedup = timings[BASELINE].mean_seconds / timings[FAST].mean_seconds
        print(f"speedup (baseline mean / fast mean): {speedup:.1f}")
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "report.json"), "w",
                  encoding="utf-8") as fh:
            fh.write(report_to_json(report) + "\n")
        with open(os.path.join(args.out, "report.csv"), "w",
                  encoding="utf-8") as fh:
            fh.write(report_to_csv(report))
        print(f"wrote report.json and report.csv to {args.out}")
    return 0


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = _build_parser()
    try:
        argv = _apply_config_file(parser, argv)
        args = parser.parse_args(argv)
        if args.command == "explain":
            return cmd_explain(args)
        return cmd_bench(args)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except DataError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except CalexError as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    except Exception as e:  # noqa: BLE001 - map unexpected failures to exit 3
        print(f"unexpected error: {type(e).__name__}: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
