"""Experiment runner: repeated trials, per-trial artifacts and summaries."""

from __future__ import annotations

import csv
import json
import logging
import re
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Sequence

from .dataio import Dataset
from .errors import ArchError
from .metrics import TYPE_NAMES, weight_balance, weight_snapshot
from .network import Activation, BiasMode
from .persist import save_checkpoint, write_metrics_csv, write_taxonomy_json, write_weights_csv
from .train import RunResult, TrainConfig, run

log = logging.getLogger(__name__)

_TOKEN = re.compile(r"\s*(?:(\d+)|(.))")


def parse_arch(spec: str, require_deep: bool = True) -> list[list[int]]:
    """Parse ``"[784,48,35,10]+[784,50,10]"`` (brackets optional).

    ``require_deep`` rejects PNNs built only from two-layer sub-networks,
    which are equivalent to a single wider FNN.
    """
    archs: list[list[int]] = []
    current: list[int] | None = None
    bracket = False
    expect_int = True
    pos = 0
    for m in _TOKEN.finditer(spec):
        pos = m.start(m.lastindex)
        num, ch = m.group(1), m.group(2)
        if num is not None:
            if not expect_int:
                raise ArchError(f"unexpected number {num} in {spec!r}", pos)
            if current is None:
                current = []
            current.append(int(num))
            expect_int = False
        elif ch == "[":
            if current is not None or bracket:
                raise ArchError(f"unexpected '[' in {spec!r}", pos)
            bracket, current = True, []
        elif ch == "]":
            if not bracket or expect_int:
                raise ArchError(f"unexpected ']' in {spec!r}", pos)
            bracket = False
        elif ch == ",":
            if expect_int or current is None:
                raise ArchError(f"unexpected ',' in {spec!r}", pos)
            expect_int = True
        elif ch == "+":
            if expect_int or bracket or current is None:
                raise ArchError(f"unexpected '+' in {spec!r}", pos)
            archs.append(current)
            current, expect_int = None, True
        elif ch.isspace():
            continue
        else:
            raise ArchError(f"unexpected character {ch!r} in {spec!r}", pos)
    if expect_int or bracket or current is None:
        raise ArchError(f"incomplete architecture {spec!r}", len(spec))
    archs.append(current)

    if len(archs) < 2:
        raise ArchError(f"{spec!r} describes a single network; a PNN needs at least two")
    for a in archs:
        if len(a) < 3 or min(a) < 1:
            raise ArchError(f"sub-network {a} needs input, hidden and output layers of width >= 1")
    n_in, n_out = archs[0][0], archs[0][-1]
    for a in archs[1:]:
        if a[0] != n_in:
            raise ArchError(f"input widths differ: {n_in} vs {a[0]}")
        if a[-1] != n_out:
            raise ArchError(f"output widths differ: {n_out} vs {a[-1]}")
    if require_deep and all(len(a) == 3 for a in archs):
        raise ArchError("every sub-network has a single hidden layer, so the PNN is just one wider "
                        "FNN; at least one sub-network needs two or more hidden layers")
    return archs


def format_arch(archs: Sequence[Sequence[int]]) -> str:
    return "+".join("[" + ",".join(map(str, a)) + "]" for a in archs)


@dataclass
class ExperimentSpec:
    name: str
    arch: str
    config: TrainConfig
    trials: int = 1
    out_dir: Path = Path("runs")
    mask_mode: BiasMode = BiasMode.SHARED
    write_checkpoints: bool = True

    @property
    def archs(self) -> list[list[int]]:
        return parse_arch(self.arch)


@dataclass
class TrialSummary:
    trial: int          # 1 is the median run
    run_index: int      # order in which the run was executed
    seed: int
    max_alpha_para: float
    best_epoch: int
    type_counts: dict[str, int] = field(default_factory=dict)
    run_dir: str = ""

    @property
    def n_iv(self) -> int:
        return self.type_counts.get("IV", 0)


def median_first(summaries: list[TrialSummary]) -> list[TrialSummary]:
    """Label the run whose max alpha_para is the middle value as Trial 1.

    The other runs keep their execution order as Trials 2..n.  For an even
    count the lower of the two middle values is used.
    """
    ranked = sorted(summaries, key=lambda s: (s.max_alpha_para, s.run_index))
    median = ranked[(len(ranked) - 1) // 2]
    rest = [s for s in summaries if s is not median]
    return [replace(s, trial=i + 1) for i, s in enumerate([median, *rest])]


def write_run(run_dir: Path, result: RunResult, archs, write_checkpoints: bool = True) -> None:
    run_dir.mkdir(parents=True, exist_ok=True)
    write_metrics_csv(run_dir / "metrics.csv", result.metrics)
    best = result.best_model
    if result.best_taxonomy is not None:
        write_taxonomy_json(run_dir / "taxonomy.json", result.best_taxonomy,
                            arch=format_arch(archs), epoch=result.best_epoch,
                            alpha_para=result.max_alpha_para)
    ws = weight_snapshot(best)
    write_weights_csv(run_dir / "weights.csv", ws)
    balance = [asdict(b) | {"subnet": b.subnet + 1} for b in weight_balance(ws)]
    (run_dir / "weight_balance.json").write_text(json.dumps(balance, indent=1) + "\n")
    save_checkpoint(run_dir / "best.pnn", best)
    save_checkpoint(run_dir / "final.pnn", result.model)
    if write_checkpoints:
        ckpt_dir = run_dir / "checkpoints"
        ckpt_dir.mkdir(exist_ok=True)
        for c in result.checkpoints:
            save_checkpoint(ckpt_dir / f"epoch_{c.epoch:03d}_{c.reason}.pnn", c.model)


def run_trial(spec: ExperimentSpec, dataset: Dataset, run_index: int) -> tuple[TrialSummary, RunResult]:
    cfg = replace(spec.config, seed=spec.config.seed + run_index)
    archs = spec.archs
    log.info("%s: run %d (seed %d) %s method %s", spec.name, run_index, cfg.seed,
             format_arch(archs), cfg.method)
    result = run(archs, cfg, dataset, spec.mask_mode)
    run_dir = Path(spec.out_dir) / f"run_{run_index:02d}"
    write_run(run_dir, result, archs, spec.write_checkpoints)
    counts = dict(result.best_taxonomy.type_counts) if result.best_taxonomy else {}
    summary = TrialSummary(run_index + 1, run_index, cfg.seed, result.max_alpha_para,
                           result.best_epoch, counts, str(run_dir))
    return summary, result


def _check_widths(archs, dataset: Dataset) -> None:
    n_in = dataset.train.images.shape[1]
    n_out = int(max(dataset.train.labels.max(), dataset.eval.labels.max())) + 1
    if archs[0][0] != n_in or archs[0][-1] < n_out:
        raise ArchError(f"architecture {format_arch(archs)} does not fit data with {n_in} inputs "
                        f"and {n_out} classes")


def write_summary(out_dir: Path, summaries: list[TrialSummary]) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "summary.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["trial", "run_index", "seed", "max_alpha_para", "best_epoch",
                    *(f"n_{t}" for t in TYPE_NAMES), "run_dir"])
        for s in summaries:
            w.writerow([s.trial, s.run_index, s.seed, f"{s.max_alpha_para:.6f}", s.best_epoch,
                        *(s.type_counts.get(t, "") for t in TYPE_NAMES), s.run_dir])
    (out_dir / "summary.json").write_text(json.dumps([asdict(s) for s in summaries], indent=1) + "\n")


def run_experiment(spec: ExperimentSpec, dataset: Dataset) -> list[TrialSummary]:
    if spec.trials < 1:
        raise ValueError(f"trials must be >= 1, got {spec.trials}")
    _check_widths(spec.archs, dataset)
    summaries = [run_trial(spec, dataset, i)[0] for i in range(spec.trials)]
    summaries = median_first(summaries)
    write_summary(Path(spec.out_dir), summaries)
    return summaries


def compare_activations(spec: ExperimentSpec, dataset: Dataset,
                        activations: Sequence[Activation] = tuple(Activation)) -> dict[Activation, list[TrialSummary]]:
    """Run the same experiment once per activation and write a comparison table.

    ``comparison.csv`` has one row per trial label with n_IV and max
    alpha_para for each activation, followed by an ``average`` row.
    """
    results = {}
    for act in activations:
        sub = replace(spec, name=f"{spec.name}-{act.value}",
                      config=replace(spec.config, activation=act),
                      out_dir=Path(spec.out_dir) / act.value)
        results[act] = run_experiment(sub, dataset)
    write_comparison(Path(spec.out_dir) / "comparison.csv", results)
    return results


def comparison_rows(results: dict[Activation, list[TrialSummary]]) -> list[list]:
    acts = list(results)
    n = len(next(iter(results.values())))
    rows = []
    for t in range(n):
        row: list = [t + 1]
        for a in acts:
            s = results[a][t]
            row += [s.n_iv, round(100 * s.max_alpha_para, 2)]
        rows.append(row)
    avg: list = ["average"]
    for a in acts:
        ss = results[a]
        avg += [round(sum(s.n_iv for s in ss) / len(ss), 1),
                round(100 * sum(s.max_alpha_para for s in ss) / len(ss), 2)]
    rows.append(avg)
    return rows


def write_comparison(path: Path, results: dict[Activation, list[TrialSummary]]) -> None:
    header = ["trial"]
    for a in results:
        header += [f"{a.value}_n_iv", f"{a.value}_alpha_pct"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(comparison_rows(results))
