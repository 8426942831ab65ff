"""Mini-batch SGD with backpropagation, cross-entropy cost and L2 weight decay.

Two schedules are provided.  Method A trains each sub-network on its own,
connects them, then keeps training the PNN.  Method B connects freshly
initialised sub-networks before the first update.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import linalg
from .dataio import Dataset, Split
from .metrics import EpochMetrics, ResultTaxonomy, evaluate, taxonomy_from_predictions
from .network import (Activation, BiasMode, FnnModel, PnnModel, connect, forward_batch,
                      init_fnn)
from .rng import Rng

log = logging.getLogger(__name__)

CLAMP = 1e-12

# rng stream ids, XORed into the run seed
STREAM_INIT = 0x100
STREAM_SHUFFLE = 0x200
STREAM_JOINT = 0x300


@dataclass
class TrainConfig:
    method: str = "A"
    epochs_separate: int = 60
    epochs_joint: int = 40
    eta: float = 0.1
    lam: float = 5.0
    batch_size: int = 10
    seed: int = 0
    activation: Activation = Activation.SIGMOID
    head: Activation = Activation.SIGMOID
    train_size: int = 60000
    train_cap: int | None = None

    def __post_init__(self):
        self.method = self.method.upper()
        self.activation = Activation(self.activation)
        self.head = Activation(self.head)
        if self.method not in ("A", "B"):
            raise ValueError(f"method must be A or B, got {self.method!r}")
        if self.method == "B":
            self.epochs_separate = 0
        if self.epochs_separate < 0 or self.epochs_joint < 0:
            raise ValueError("epoch counts must be non-negative")
        if self.eta < 0 or self.lam < 0:
            raise ValueError("eta and lambda must be non-negative")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")

    @property
    def total_epochs(self) -> int:
        return self.epochs_separate + self.epochs_joint


@dataclass
class GradientSet:
    """Gradients aligned with ``model.weight_arrays()`` / ``model.bias_arrays()``."""

    weights: list[np.ndarray]
    biases: list[np.ndarray]

    def flat(self) -> np.ndarray:
        return np.concatenate([g.ravel() for g in self.weights + self.biases])


def cost(output_activation: np.ndarray, target: np.ndarray) -> float:
    """Cross-entropy summed over output neurons (activations clamped)."""
    a = np.clip(output_activation, CLAMP, 1.0 - CLAMP)
    y = target
    return float(-np.sum(y * np.log(a) + (1.0 - y) * np.log(1.0 - a)))


def quadratic_cost(output_activation: np.ndarray, target: np.ndarray) -> float:
    d = output_activation - target
    return float(0.5 * np.sum(d * d))


def cost_fn(head: Activation):
    """Cross-entropy for a sigmoid head, quadratic cost otherwise."""
    return cost if head is Activation.SIGMOID else quadratic_cost


def backprop_batch(model: FnnModel | PnnModel, xs: np.ndarray, ys: np.ndarray) -> GradientSet:
    """Gradient of the summed per-example cost over the rows of ``xs``."""
    act = model.activation
    trace = forward_batch(model, xs)
    delta = trace.activation - ys
    if model.head is not Activation.SIGMOID:
        delta = delta * model.head.derivative(trace.z, trace.activation)

    w_grads: list[np.ndarray] = []
    b_grads: list[np.ndarray] = []
    for (ws, _bs, out_w), tr in zip(model.blocks(), trace.hidden):
        n = len(ws)
        gw: list = [None] * (n + 1)
        gb: list = [None] * n
        gw[n] = linalg.outer_sum(delta, tr.activations[n])
        d = linalg.batch_transpose_matvec(out_w, delta) * act.derivative(tr.zs[n - 1], tr.activations[n])
        for l in range(n - 1, -1, -1):
            gb[l] = d.sum(axis=0)
            gw[l] = linalg.outer_sum(d, tr.activations[l])
            if l > 0:
                d = linalg.batch_transpose_matvec(ws[l], d) * act.derivative(tr.zs[l - 1], tr.activations[l])
        w_grads.extend(gw)
        b_grads.extend(gb)
    b_grads.append(delta.sum(axis=0))
    return GradientSet(w_grads, b_grads)


def backprop(model: FnnModel | PnnModel, x: np.ndarray, target: np.ndarray) -> GradientSet:
    return backprop_batch(model, x[None, :], np.asarray(target, dtype=np.float64)[None, :])


def apply_gradients(model, grads: GradientSet, eta: float, lam: float, n: int, batch: int) -> None:
    """In-place step: w <- (1 - eta*lam/n) w - (eta/batch) g; b <- b - (eta/batch) g."""
    decay = 1.0 - eta * lam / n
    step = eta / batch
    for w, g in zip(model.weight_arrays(), grads.weights):
        w *= decay
        w -= step * g
    for b, g in zip(model.bias_arrays(), grads.biases):
        b -= step * g


def sgd_epoch(model, data: Split, cfg: TrainConfig, rng: Rng):
    """One pass over ``data`` in shuffled mini-batches; returns a new model."""
    n = len(data)
    if n == 0:
        raise ValueError("cannot train on an empty data set")
    if cfg.batch_size > n:
        raise ValueError(f"batch_size {cfg.batch_size} exceeds training set size {n}")
    model = model.copy()
    targets = data.targets(model.n_out)
    order = rng.permutation(n)
    for start in range(0, n, cfg.batch_size):
        idx = order[start:start + cfg.batch_size]
        grads = backprop_batch(model, data.images[idx], targets[idx])
        apply_gradients(model, grads, cfg.eta, cfg.lam, n, len(idx))
    return model


@dataclass
class Checkpoint:
    epoch: int
    reason: str  # "connect" or "best"
    model: PnnModel


@dataclass
class RunResult:
    metrics: list[EpochMetrics]
    model: PnnModel
    checkpoints: list[Checkpoint] = field(default_factory=list)
    best_epoch: int = -1
    best_model: PnnModel | None = None
    best_taxonomy: ResultTaxonomy | None = None

    @property
    def max_alpha_para(self) -> float:
        return self.metrics[self.best_epoch].alpha_para


class _BestTracker:
    def __init__(self, result: RunResult, mask_mode: BiasMode):
        self.result = result
        self.mask_mode = mask_mode
        self.best = -1.0

    def offer(self, epoch: int, model: PnnModel, metrics: EpochMetrics, preds, reason="best"):
        r = self.result
        improved = metrics.alpha_para > self.best
        if not (improved or reason == "connect"):
            return
        snapshot = model.copy()
        r.checkpoints.append(Checkpoint(epoch, reason, snapshot))
        if improved:
            self.best = metrics.alpha_para
            r.best_epoch = epoch
            r.best_model = snapshot
            if len(model.subnets) == 2:
                r.best_taxonomy = taxonomy_from_predictions(preds, self.mask_mode)


def _log_row(m: EpochMetrics) -> None:
    subs = " ".join(f"a{i + 1}={a:.4f} a{i + 1}'={ap:.4f}"
                    for i, (a, ap) in enumerate(zip(m.alpha, m.alpha_prime)))
    log.info("epoch %d: para=%.4f %s", m.epoch, m.alpha_para, subs)


def _joint_phase(pnn: PnnModel, dataset: Dataset, cfg: TrainConfig, rng: Rng,
                 result: RunResult, tracker: _BestTracker, first_epoch: int) -> PnnModel:
    joint = rng.child(STREAM_JOINT)
    for epoch in range(first_epoch, first_epoch + cfg.epochs_joint):
        pnn = sgd_epoch(pnn, dataset.train, cfg, joint)
        m, preds = evaluate(pnn, dataset.eval, epoch)
        result.metrics.append(m)
        _log_row(m)
        tracker.offer(epoch, pnn, m, preds)
    return pnn


def _init_subnets(archs, cfg: TrainConfig, rng: Rng) -> list[FnnModel]:
    return [init_fnn(a, cfg.activation, rng.child(STREAM_INIT + i), cfg.head)
            for i, a in enumerate(archs)]


def run_method_A(archs: Sequence[Sequence[int]], cfg: TrainConfig, rng: Rng, dataset: Dataset,
                 mask_mode: BiasMode = BiasMode.SHARED) -> RunResult:
    """Train sub-networks separately, connect, then train jointly.

    Rows for the separate phase evaluate the connection the networks would
    form at that epoch; their own-bias accuracies are the standalone ones.
    """
    if cfg.epochs_separate < 1:
        raise ValueError("method A needs at least one separate-training epoch")
    fnns = _init_subnets(archs, cfg, rng)
    shufflers = [rng.child(STREAM_SHUFFLE + i) for i in range(len(fnns))]
    result = RunResult([], None)  # type: ignore[arg-type]
    tracker = _BestTracker(result, mask_mode)
    pnn = None
    for epoch in range(cfg.epochs_separate):
        fnns = [sgd_epoch(f, dataset.train, cfg, s) for f, s in zip(fnns, shufflers)]
        pnn = connect(fnns)
        m, preds = evaluate(pnn, dataset.eval, epoch)
        result.metrics.append(m)
        _log_row(m)
    # the last separate-phase row already describes the freshly connected PNN
    tracker.offer(cfg.epochs_separate - 1, pnn, m, preds, reason="connect")
    result.model = _joint_phase(pnn, dataset, cfg, rng, result, tracker, cfg.epochs_separate)
    return result


def run_method_B(archs: Sequence[Sequence[int]], cfg: TrainConfig, rng: Rng, dataset: Dataset,
                 mask_mode: BiasMode = BiasMode.SHARED) -> RunResult:
    if cfg.epochs_joint < 1:
        raise ValueError("method B needs at least one epoch")
    pnn = connect(_init_subnets(archs, cfg, rng))
    result = RunResult([], pnn)
    tracker = _BestTracker(result, mask_mode)
    result.model = _joint_phase(pnn, dataset, cfg, rng, result, tracker, 0)
    return result


def run(archs, cfg: TrainConfig, dataset: Dataset, mask_mode: BiasMode = BiasMode.SHARED) -> RunResult:
    rng = Rng(cfg.seed)
    if cfg.method == "A":
        return run_method_A(archs, cfg, rng, dataset, mask_mode)
    return run_method_B(archs, cfg, rng, dataset, mask_mode)
