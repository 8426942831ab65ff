"""Command-line entry point: ``pnn <subcommand> ...``.

Defaults reproduce the [784,48,35,10]+[784,50,10] method-A run (60 separate
epochs, 40 joint epochs, sigmoid).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict
from pathlib import Path

from .dataio import load_mnist
from .errors import PnnError
from .experiment import ExperimentSpec, compare_activations, run_experiment
from .gradcheck import gradient_oracle, merge_oracle
from .metrics import categorize, evaluate, weight_balance, weight_snapshot
from .network import Activation, BiasMode
from .persist import load_checkpoint, write_taxonomy_json, write_weights_csv
from .train import TrainConfig

DEFAULT_ARCH = "784,48,35,10+784,50,10"
GRAD_TOL = 1e-6
MERGE_TOL = 1e-12


def _add_data_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--data-dir", type=Path, default=Path("data/mnist"),
                   help="directory holding the four MNIST IDX files (raw or .gz)")
    p.add_argument("--train-size", type=int, default=60000,
                   help="use the first N of the 60000 training images (50000 for the classic split)")
    p.add_argument("--train-cap", type=int, default=None, help="truncate the training set further")


def _add_train_args(p: argparse.ArgumentParser) -> None:
    _add_data_args(p)
    p.add_argument("--arch", default=DEFAULT_ARCH)
    p.add_argument("--method", choices=["A", "B"], default="A", type=str.upper)
    p.add_argument("--epochs-separate", type=int, default=60)
    p.add_argument("--epochs-joint", type=int, default=None,
                   help="default 40 for method A, 100 for method B")
    p.add_argument("--activation", choices=[a.value for a in Activation], default="sigmoid")
    p.add_argument("--head-activation", choices=[a.value for a in Activation], default="sigmoid")
    p.add_argument("--eta", type=float, default=0.1)
    p.add_argument("--lambda", dest="lam", type=float, default=5.0)
    p.add_argument("--batch-size", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--out-dir", type=Path, default=Path("runs"))
    p.add_argument("--mask-mode", choices=["own", "shared"], default="shared")
    p.add_argument("--name", default="pnn")
    p.add_argument("--no-checkpoint-trail", action="store_true",
                   help="only write best.pnn and final.pnn, not every improving epoch")


def _spec(args) -> ExperimentSpec:
    epochs_joint = args.epochs_joint
    if epochs_joint is None:
        epochs_joint = 40 if args.method == "A" else 100
    cfg = TrainConfig(method=args.method, epochs_separate=args.epochs_separate,
                      epochs_joint=epochs_joint, eta=args.eta, lam=args.lam,
                      batch_size=args.batch_size, seed=args.seed,
                      activation=Activation(args.activation), head=Activation(args.head_activation),
                      train_size=args.train_size, train_cap=args.train_cap)
    return ExperimentSpec(args.name, args.arch, cfg, args.trials, args.out_dir,
                          BiasMode(args.mask_mode), not args.no_checkpoint_trail)


def _dataset(args):
    return load_mnist(args.data_dir, train_size=args.train_size, train_cap=args.train_cap)


def cmd_train(args) -> int:
    spec = _spec(args)
    spec.archs  # validate before loading data
    summaries = run_experiment(spec, _dataset(args))
    for s in summaries:
        print(json.dumps({"trial": s.trial, "seed": s.seed, "max_alpha_para": s.max_alpha_para,
                          "best_epoch": s.best_epoch, "type_counts": s.type_counts}))
    return 0


def cmd_compare(args) -> int:
    spec = _spec(args)
    spec.archs
    acts = [Activation(a) for a in args.activations.split(",")]
    results = compare_activations(spec, _dataset(args), acts)
    print((Path(spec.out_dir) / "comparison.csv").read_text(), end="")
    return 0 if results else 1


def cmd_eval(args) -> int:
    model = load_checkpoint(args.checkpoint)
    m, _ = evaluate(model, _dataset(args).eval)
    print(json.dumps({"alpha_para": m.alpha_para, "alpha": m.alpha, "alpha_prime": m.alpha_prime}))
    return 0


def cmd_taxonomy(args) -> int:
    model = load_checkpoint(args.checkpoint)
    tax = categorize(model, _dataset(args).eval, BiasMode(args.mask_mode))
    if args.out:
        write_taxonomy_json(args.out, tax, checkpoint=str(args.checkpoint))
    print(json.dumps({"total": tax.total_correct, "type_counts": tax.type_counts}))
    return 0


def cmd_weights(args) -> int:
    ws = weight_snapshot(load_checkpoint(args.checkpoint))
    if args.out:
        write_weights_csv(args.out, ws)
    for b in weight_balance(ws):
        print(json.dumps(asdict(b) | {"subnet": b.subnet + 1}))
    return 0


def cmd_selftest(args) -> int:
    ok = True
    for name, err in gradient_oracle(args.seed).items():
        passed = err < GRAD_TOL
        ok &= passed
        print(f"{'PASS' if passed else 'FAIL'} gradient {name}: max rel err {err:.3e}")
    err = merge_oracle(args.seed)
    passed = err < MERGE_TOL
    ok &= passed
    print(f"{'PASS' if passed else 'FAIL'} merge [4,3,3]+[4,2,3] == [4,5,3]: max |dz| {err:.3e}")
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pnn", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true", help="log every epoch")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train one or more trials and write all artifacts")
    _add_train_args(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("compare", help="repeat an experiment for several activation functions")
    _add_train_args(p)
    p.add_argument("--activations", default="sigmoid,relu,tanh")
    p.set_defaults(func=cmd_compare)

    for name, func, help_ in [("eval", cmd_eval, "accuracies of a checkpoint"),
                              ("taxonomy", cmd_taxonomy, "Type I-IV counts of a checkpoint")]:
        p = sub.add_parser(name, help=help_)
        p.add_argument("checkpoint", type=Path)
        _add_data_args(p)
        if name == "taxonomy":
            p.add_argument("--mask-mode", choices=["own", "shared"], default="shared")
            p.add_argument("--out", type=Path)
        p.set_defaults(func=func)

    p = sub.add_parser("weights", help="output-layer weight snapshot of a checkpoint")
    p.add_argument("checkpoint", type=Path)
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_weights)

    p = sub.add_parser("selftest", help="gradient and merge oracles (no data needed)")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(asctime)s %(name)s %(message)s")
    try:
        return args.func(args)
    except (PnnError, OSError, ValueError, IndexError) as exc:
        kind = getattr(exc, "kind", type(exc).__name__)
        print("error: " + json.dumps({"type": kind, "message": str(exc)}), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
