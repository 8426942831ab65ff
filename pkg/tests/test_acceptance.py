"""Acceptance criteria.  Each test appends one PASS/FAIL line to the terminal summary.

Criteria 3, 4, 5, 7 and 8 need the MNIST IDX files (PNN_MNIST_DIR or data/mnist).
Criterion 6 trains the full-size network for 100 epochs and only runs with PNN_FULL=1.
"""

import csv
import os
import time
from pathlib import Path

import numpy as np
import pytest

from pnn.dataio import load_mnist
from pnn.experiment import ExperimentSpec, compare_activations, parse_arch, run_experiment
from pnn.gradcheck import gradient_oracle, merge_oracle
from pnn.metrics import accuracy_masked, categorize
from pnn.network import Activation, BiasMode, connect, init_fnn, predict_fnn
from pnn.persist import load_checkpoint, read_metrics_csv, read_taxonomy_json
from pnn.rng import Rng
from pnn.train import TrainConfig, run, sgd_epoch

from conftest import ACCEPTANCE_LINES

GRAD_TOL = 1e-6
MERGE_TOL = 1e-12
DESK_ARCH = "[784,30,20,10]+[784,32,10]"
DESK = dict(method="B", epochs_joint=15, train_cap=10000, seed=0)
DESK_MIN_ALPHA = 0.92
DESK_DIVERGENCE = 0.05
DESK_MIN_N_IV = 10
FULL_BAND = (0.970, 0.985)
FULL_MIN_DROP = 0.10


def report(n, ok, detail):
    ACCEPTANCE_LINES.append(f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}")
    return ok


def partition_holds(tax):
    return (sum(tax.type_counts.values()) == tax.total_correct == len(tax.records)
            and all(r.rp == r.y for r in tax.records))


@pytest.fixture(scope="module")
def desk_data(mnist_dir):
    return load_mnist(mnist_dir, train_cap=10000)


@pytest.fixture(scope="module")
def desk_run(desk_data):
    t0 = time.perf_counter()
    result = run(parse_arch(DESK_ARCH), TrainConfig(**DESK), desk_data)
    return result, time.perf_counter() - t0


def test_1_gradient_oracle():
    t0 = time.perf_counter()
    errs = gradient_oracle(0)
    elapsed = time.perf_counter() - t0
    worst = max(errs.values())
    ok = worst < GRAD_TOL and elapsed < 10 and len(errs) == 2 * len(Activation)
    report(1, ok, f"max rel err {worst:.2e} over {len(errs)} model/activation pairs "
                  f"(< {GRAD_TOL:g}), {elapsed:.2f}s (< 10s)")
    assert ok, errs


def test_2_merge_equivalence():
    t0 = time.perf_counter()
    diff = merge_oracle(0, n_inputs=100)
    elapsed = time.perf_counter() - t0
    ok = diff < MERGE_TOL and elapsed < 1
    report(2, ok, f"[4,3,3]+[4,2,3] vs [4,5,3] max |dz| {diff:.2e} (< {MERGE_TOL:g}), {elapsed:.3f}s (< 1s)")
    assert ok


@pytest.mark.parametrize("act", list(Activation), ids=lambda a: a.value)
def test_3_connection_conservation(mnist_dir, act):
    t0 = time.perf_counter()
    ds = load_mnist(mnist_dir, train_cap=2000, eval_cap=1000)
    cfg = TrainConfig(activation=act)
    rng = Rng(7)
    fnns = [init_fnn(a, act, rng.child(i)) for i, a in enumerate(parse_arch(DESK_ARCH))]
    # one short epoch so the sub-networks are not at chance level
    fnns = [sgd_epoch(f, ds.train, cfg, rng.child(0x10 + i)) for i, f in enumerate(fnns)]
    pnn = connect(fnns)
    counts = []
    for i, f in enumerate(fnns):
        standalone = int(np.count_nonzero(predict_fnn(f, ds.eval.images) == ds.eval.labels))
        masked = round(accuracy_masked(pnn, ds.eval, i, BiasMode.OWN) * len(ds.eval))
        counts.append((standalone, masked))
    elapsed = time.perf_counter() - t0
    ok = all(s == m for s, m in counts) and elapsed < 10
    report(3, ok, f"{act.value}: standalone vs Own-mode correct of 1000 = {counts}, {elapsed:.2f}s (< 10s)")
    assert ok


def test_4_taxonomy_partition_on_desk_checkpoints(desk_run, desk_data):
    result, _ = desk_run
    checked = 0
    ok = partition_holds(result.best_taxonomy)
    for c in result.checkpoints:
        for mode in BiasMode:
            ok &= partition_holds(categorize(c.model, desk_data.eval, mode))
            checked += 1
    report(4, ok, f"I+II+III+IV == total and r_p == y on {checked} checkpoint/mode pairs of the desk run")
    assert ok


def test_5_desk_scale(desk_run):
    result, elapsed = desk_run
    best = result.metrics[result.best_epoch]
    alpha = best.alpha_para
    worst_prime = min(best.alpha_prime)
    n_iv = result.best_taxonomy.n_iv
    ok = (alpha >= DESK_MIN_ALPHA and worst_prime <= alpha - DESK_DIVERGENCE
          and n_iv >= DESK_MIN_N_IV and elapsed < 600)
    report(5, ok, f"alpha_para {alpha:.4f} (>= {DESK_MIN_ALPHA}) at epoch {result.best_epoch}, "
                  f"alpha' = [{', '.join(f'{v:.4f}' for v in best.alpha_prime)}] "
                  f"(min <= {alpha - DESK_DIVERGENCE:.4f}), n_IV {n_iv} (>= {DESK_MIN_N_IV}), "
                  f"types {result.best_taxonomy.type_counts}, {elapsed:.1f}s (< 600s)")
    assert ok


@pytest.mark.slow
@pytest.mark.full
@pytest.mark.skipif(os.environ.get("PNN_FULL") != "1", reason="set PNN_FULL=1 for the 100-epoch full run")
def test_6_full_scale_band(mnist_dir):
    cfg = TrainConfig(method="A", epochs_separate=60, epochs_joint=40, seed=0)
    result = run(parse_arch("[784,48,35,10]+[784,50,10]"), cfg, load_mnist(mnist_dir))
    rows = result.metrics
    peak = result.max_alpha_para
    max_a2 = max(r.alpha[1] for r in rows[:cfg.epochs_separate])
    min_a2_prime = min(r.alpha_prime[1] for r in rows[cfg.epochs_separate:])
    drop = max_a2 - min_a2_prime
    ok = FULL_BAND[0] <= peak <= FULL_BAND[1] and drop >= FULL_MIN_DROP
    report(6, ok, f"max alpha_para {peak:.4f} in {list(FULL_BAND)} at epoch {result.best_epoch}, "
                  f"alpha_2 peak {max_a2:.4f} -> alpha_2' low {min_a2_prime:.4f} "
                  f"(drop {100 * drop:.1f} points, >= {100 * FULL_MIN_DROP:.0f})")
    assert ok


def test_7_determinism(desk_data, tmp_path):
    paths = []
    for name in ("a", "b"):
        spec = ExperimentSpec(name, DESK_ARCH, TrainConfig(**DESK), 1, tmp_path / name,
                              write_checkpoints=False)
        run_experiment(spec, desk_data)
        paths.append(tmp_path / name / "run_00" / "metrics.csv")
    a, b = (p.read_bytes() for p in paths)
    ok = a == b and len(read_metrics_csv(paths[0])) == DESK["epochs_joint"]
    report(7, ok, f"two seed-0 desk runs give byte-identical metrics.csv ({len(a)} bytes)")
    assert ok


def test_8_activation_comparison(desk_data, tmp_path):
    spec = ExperimentSpec("compare", DESK_ARCH, TrainConfig(**DESK), 3, tmp_path, write_checkpoints=True)
    results = compare_activations(spec, desk_data)
    with open(tmp_path / "comparison.csv") as fh:
        rows = list(csv.reader(fh))
    header = ["trial"] + [f"{a.value}_{col}" for a in Activation for col in ("n_iv", "alpha_pct")]
    structural = (rows[0] == header and [r[0] for r in rows[1:]] == ["1", "2", "3", "average"]
                  and all(len(r) == len(header) and all(c != "" for c in r) for r in rows)
                  and all(len(v) == 3 for v in results.values()))

    # criteria 1-4 for every activation
    grad_ok = max(gradient_oracle(0).values()) < GRAD_TOL
    merge_ok = merge_oracle(0) < MERGE_TOL
    conservation_ok = True
    partition_ok = True
    sub_eval = desk_data.eval.head(1000)
    for act, summaries in results.items():
        rng = Rng(11)
        fnns = [init_fnn(a, act, rng.child(i)) for i, a in enumerate(parse_arch(DESK_ARCH))]
        pnn = connect(fnns)
        for i, f in enumerate(fnns):
            standalone = np.count_nonzero(predict_fnn(f, sub_eval.images) == sub_eval.labels) / len(sub_eval)
            conservation_ok &= accuracy_masked(pnn, sub_eval, i, BiasMode.OWN) == standalone
        for s in summaries:
            partition_ok &= partition_holds(read_taxonomy_json(Path(s.run_dir) / "taxonomy.json"))
            for ckpt in sorted((Path(s.run_dir) / "checkpoints").glob("*.pnn")):
                partition_ok &= partition_holds(categorize(load_checkpoint(ckpt), desk_data.eval))
    ok = structural and grad_ok and merge_ok and conservation_ok and partition_ok
    avg = rows[-1]
    summary = ", ".join(f"{a.value} avg n_IV {avg[1 + 2 * k]} alpha {avg[2 + 2 * k]}%"
                        for k, a in enumerate(Activation))
    report(8, ok, f"3 trials x 3 activations table complete={structural}, criteria 1-4 hold="
                  f"{grad_ok and merge_ok and conservation_ok and partition_ok}; {summary}")
    assert ok
