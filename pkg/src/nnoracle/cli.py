"""Command-line front end.

Exit codes: 0 ok (``check``: everything accepted), 1 ``check`` saw
rejections, 2 usage error, 3 training diverged, 4 model file unreadable,
5 ``check`` hit malformed records.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from . import harness, svg
from .encode import Kind, encode_output, winner
from .estimator import VARIANTS, ArtificialSpecification
from .fnn import Mode, TrainingDiverged
from .modelio import ModelFormatError, load_model, save_model
from .subject import FIELDS, MUTANTS

EXIT_OK, EXIT_REJECTED, EXIT_USAGE, EXIT_DIVERGED, EXIT_MODEL, EXIT_PARSE = range(6)

log = logging.getLogger("nnoracle")


def _aggressiveness(text: str) -> int:
    a = int(text)
    if a not in range(6):
        raise argparse.ArgumentTypeError(f"aggressiveness must be 0..5, got {a}")
    return a


def _int_list(text: str) -> list[int]:
    return [int(t) for t in text.split(",") if t]


def _add_training_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--variant", choices=VARIANTS, default="uni")
    p.add_argument("--n", type=int, default=30, help="number of abstraction intervals")
    p.add_argument("--mode", choices=[m.value for m in Mode], default=None)
    p.add_argument("--lr", type=float, default=None, help="learning rate (variant default)")
    p.add_argument("--epochs", type=int, default=None, help="epochs (variant default)")
    p.add_argument("--hidden", type=int, default=24)
    p.add_argument("--derivative-clip", type=float, default=0.01)
    p.add_argument("--shuffle", action="store_true", help="permute samples every epoch")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nnoracle", description="Neural networks as test oracles")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train an oracle and write a model file")
    _add_training_flags(p)
    p.add_argument("--seed", type=int, default=0, help="weight initialisation seed")
    p.add_argument("--data-seed", type=int, default=None, help="training-set seed (default: --seed)")
    p.add_argument("--log-every", type=int, default=100, help="log the error every k epochs")
    p.add_argument("--out", required=True, help="model file to write")

    p = sub.add_parser("eval", help="evaluate a model against the 21 mutants")
    p.add_argument("--model", required=True)
    p.add_argument("--aggressiveness", type=_aggressiveness, default=0)
    p.add_argument("--data-seed", type=int, default=None, help="default: the model's training seed")
    p.add_argument("--fp-on-training-set", action="store_true")
    p.add_argument(
        "--per-mutant-fp-inputs", choices=["fresh", "exposing"], default="fresh",
        help="per-mutant FP from fresh correct samples or from each mutant's exposing inputs",
    )
    p.add_argument("--csv", help="also write the report row(s) to this CSV file")

    p = sub.add_parser("sweep", help="train/evaluate a grid and write CSV + SVG")
    p.add_argument("--preset", choices=["fig2", "fig3", "fig4"])
    p.add_argument("--variants", default="uni", help="comma list, for explicit grids")
    p.add_argument("--ns", type=_int_list, default=[30])
    p.add_argument("--aggressiveness", type=_int_list, default=[0])
    p.add_argument("--mode", choices=[m.value for m in Mode], default=None)
    p.add_argument("--epochs", type=int, default=None, help="explicit grids only (variant default)")
    p.add_argument("--data-seed", type=int, default=0)
    p.add_argument("--weight-seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out-dir", default=".")
    p.add_argument("--name", default=None, help="output file stem (default: preset or 'sweep')")

    p = sub.add_parser("check", help="judge execution records (JSON lines) with a model")
    p.add_argument("--model", required=True)
    p.add_argument("--aggressiveness", type=_aggressiveness, default=None)
    p.add_argument("--input", default="-", help="record file, '-' for standard input")

    sub.add_parser("mutants", help="list the mutants")
    return parser


def cmd_train(args) -> int:
    est = ArtificialSpecification(
        variant=args.variant,
        n=args.n,
        mode=args.mode,
        learning_rate=args.lr,
        epochs=args.epochs,
        hidden=args.hidden,
        seed=args.seed,
        shuffle=args.shuffle,
        derivative_clip=args.derivative_clip,
    )
    data_seed = args.seed if args.data_seed is None else args.data_seed
    X, y = harness.training_set(data_seed)
    try:
        est.fit(X, y)
    except TrainingDiverged as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    every = max(args.log_every, 1)
    for e, err in enumerate(est.history_, start=1):
        if e % every == 0 or e == len(est.history_):
            print(f"epoch {e:6d}  training error {err:.6e}")
    print(f"final mse {est.mse_:.6e}")
    save_model(est, args.out, meta={"data_seed": data_seed, "n_train": len(X)})
    print(f"wrote {args.out}")
    return EXIT_OK


def _report_table(report: harness.EvaluationReport) -> str:
    lines = [
        f"{report.config.label}  aggressiveness {report.config.aggressiveness}",
        f"  TP rate {report.tp_rate:6.2f}%",
        f"  FP rate {report.fp_rate:6.2f}%  (sigma {report.fp_sigma:.2f})",
        "  mutant   TP%     FP%   sigma",
    ]
    for m in harness.MUTANT_IDS:
        lines.append(
            f"  M{m:<5d} {report.per_mutant_tp[m]:6.2f}  {report.per_mutant_fp[m]:6.2f}"
            f"  {report.per_mutant_fp_sigma[m]:6.2f}"
        )
    return "\n".join(lines)


def cmd_eval(args) -> int:
    try:
        est = load_model(args.model)
    except ModelFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MODEL
    meta = est.model_meta_
    data_seed = meta.get("data_seed", 0) if args.data_seed is None else args.data_seed
    cfg = harness.ExperimentConfig(
        variant=est.variant,
        n=est.n,
        aggressiveness=args.aggressiveness,
        mode=est.train_config().mode.value,
        learning_rate=est.train_config().learning_rate,
        epochs=est.train_config().epochs,
        data_seed=data_seed,
        weight_seed=est.seed,
        n_train=meta.get("n_train", 500),
        hidden=est.hidden,
        derivative_clip=est.derivative_clip,
        shuffle=est.shuffle,
        fp_on_training_set=args.fp_on_training_set,
        per_mutant_fp_inputs=args.per_mutant_fp_inputs,
    )
    report = harness.evaluate(cfg, oracle=est)
    print(_report_table(report))
    text = harness.write_csv([report])
    if args.csv:
        Path(args.csv).write_text(text)
    else:
        print()
        print(text, end="")
    return EXIT_OK


def _grid(args) -> tuple[str, list[harness.ExperimentConfig]]:
    if args.preset:
        return args.preset, harness.preset(args.preset, args.data_seed, args.weight_seed)
    variants = [v for v in args.variants.split(",") if v]
    for v in variants:
        if v not in VARIANTS:
            raise ValueError(f"unknown variant {v!r}")
    grid = [
        harness.ExperimentConfig(
            variant=v, n=n, aggressiveness=a, mode=args.mode, epochs=args.epochs,
            data_seed=args.data_seed, weight_seed=args.weight_seed,
        )
        for v in variants
        for n in ([1] if v == "direct" else args.ns)
        for a in args.aggressiveness
    ]
    return "sweep", grid


def sweep_chart(name: str, reports) -> str:
    ok = [r for r in reports if not r.error]
    if name == "fig4":
        cats = [f"M{m}" for m in harness.MUTANT_IDS]
        tp = {r.config.label: [(r.per_mutant_tp[m], None) for m in harness.MUTANT_IDS] for r in ok}
        fp = {
            r.config.label: [(r.per_mutant_fp[m], r.per_mutant_fp_sigma[m]) for m in harness.MUTANT_IDS]
            for r in ok
        }
        return svg.bar_chart([("true positives per mutant", tp), ("false positives per mutant", fp)], cats)
    by_n = name == "fig3" or len({r.config.aggressiveness for r in ok}) <= 1
    tp: dict[str, list] = {}
    fp: dict[str, list] = {}
    for r in ok:
        c = r.config
        label = c.variant if by_n else c.label
        x = c.n if by_n else c.aggressiveness
        tp.setdefault(label, []).append((x, r.tp_rate))
        fp.setdefault(label, []).append((x, r.fp_rate))
    xlabel = "abstraction granularity N" if by_n else "aggressiveness"
    return svg.line_chart([("true positive rate", tp), ("false positive rate", fp)], xlabel)


def cmd_sweep(args) -> int:
    name, grid = _grid(args)
    stem = args.name or name
    reports = harness.sweep(grid, workers=args.workers)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / f"{stem}.csv").write_text(harness.write_csv(reports))
    (out / f"{stem}.svg").write_text(sweep_chart(name, reports))
    written = [f"{stem}.csv", f"{stem}.svg"]
    if name == "fig4":
        (out / f"{stem}_mutants.csv").write_text(harness.write_mutant_csv(reports))
        written.append(f"{stem}_mutants.csv")
    for r in reports:
        status = r.error or f"TP {r.tp_rate:6.2f}%  FP {r.fp_rate:6.2f}%"
        print(f"{r.config.label:<22} A={r.config.aggressiveness}  {status}")
    print("wrote " + ", ".join(str(out / w) for w in written))
    return EXIT_OK


def _record_schema() -> dict:
    text = resources.files("nnoracle").joinpath("schemas/execution_record.schema.json").read_text()
    return json.loads(text)


def check_stream(est: ArtificialSpecification, lines, out) -> tuple[int, int, int]:
    """Judge each JSON-lines record in order; returns (accepted, rejected, errors)."""
    validator = jsonschema.Draft202012Validator(_record_schema())
    spec = est.abstraction
    accepted = rejected = errors = 0
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
            problems = sorted(validator.iter_errors(rec), key=lambda e: list(e.path))
            if problems:
                raise ValueError(problems[0].message)
        except ValueError as exc:
            errors += 1
            print(f"{lineno}\terror\t{exc}", file=out)
            continue
        x = np.array([[rec[f] for f in FIELDS]])
        amount = rec["amount"]
        judgment = est.judge(x, [amount])[0]
        z_net = est.decision_function(x)[0]
        if spec.kind is Kind.DIRECT:
            detail = f"observed={amount / spec.y_max:.6f}\tpredicted={z_net[0]:.6f}"
        else:
            k = winner(encode_output(spec, amount))
            detail = f"observed={k}\tpredicted={winner(z_net)}\tconfidence={z_net.max():.4f}"
        if judgment.accepted:
            accepted += 1
        else:
            rejected += 1
        print(f"{lineno}\t{judgment.verdict.value}\t{judgment.reason.value}\t{detail}", file=out)
    print(
        f"summary\ttotal={accepted + rejected + errors}\taccepted={accepted}"
        f"\trejected={rejected}\terrors={errors}",
        file=out,
    )
    return accepted, rejected, errors


def cmd_check(args) -> int:
    try:
        est = load_model(args.model)
    except ModelFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MODEL
    if args.aggressiveness is not None:
        est.set_params(aggressiveness=args.aggressiveness)
    if args.input == "-":
        _, rejected, errors = check_stream(est, sys.stdin, sys.stdout)
    else:
        with open(args.input, encoding="utf-8") as fh:
            _, rejected, errors = check_stream(est, fh, sys.stdout)
    if errors:
        return EXIT_PARSE
    return EXIT_REJECTED if rejected else EXIT_OK


def cmd_mutants(args) -> int:
    for mid, m in MUTANTS.items():
        print(f"M{mid:<3d} line {m.line:>2d}  {m.original:<24s} -> {m.mutated}")
    return EXIT_OK


COMMANDS = {
    "train": cmd_train,
    "eval": cmd_eval,
    "sweep": cmd_sweep,
    "check": cmd_check,
    "mutants": cmd_mutants,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except ValueError as exc:
        parser.print_usage(sys.stderr)
        print(f"nnoracle: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
