"""Fully-connected networks and their parallel connection.

A PNN is a set of sub-networks that read the same input vector and write into
the same output layer.  Each sub-network keeps its own hidden stack; only its
final weight block ``w_i`` touches the shared output neurons, whose weighted
input is ``z = sum_i w_i . x_i + b``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import reduce
from typing import NamedTuple, Sequence

import numpy as np

from . import linalg
from .errors import ArchError, ShapeError
from .rng import Rng


class Activation(enum.Enum):
    SIGMOID = "sigmoid"
    RELU = "relu"
    TANH = "tanh"

    @property
    def code(self) -> int:
        return _ACTIVATION_CODES[self]

    @classmethod
    def from_code(cls, code: int) -> "Activation":
        for act, c in _ACTIVATION_CODES.items():
            if c == code:
                return act
        raise ValueError(f"unknown activation code {code}")

    def __call__(self, z):
        if self is Activation.SIGMOID:
            with np.errstate(over="ignore"):
                return 1.0 / (1.0 + np.exp(-z))
        if self is Activation.RELU:
            return np.maximum(z, 0.0)
        return np.tanh(z)

    def derivative(self, z, a):
        """f'(z), given the already computed activation ``a = f(z)``."""
        if self is Activation.SIGMOID:
            return a * (1.0 - a)
        if self is Activation.RELU:
            # defined as 0 at the kink
            return (z > 0).astype(np.float64)
        return 1.0 - a * a


_ACTIVATION_CODES = {Activation.SIGMOID: 0, Activation.RELU: 1, Activation.TANH: 2}


class BiasMode(enum.Enum):
    OWN = "own"
    SHARED = "shared"


def _as_arch(arch: Sequence[int]) -> tuple[int, ...]:
    arch = tuple(int(n) for n in arch)
    if len(arch) < 3:
        raise ArchError(f"architecture {list(arch)} needs an input, at least one hidden and an output layer")
    if min(arch) < 1:
        raise ArchError(f"architecture {list(arch)} has a layer of width < 1")
    return arch


@dataclass
class FnnModel:
    arch: tuple[int, ...]
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    activation: Activation = Activation.SIGMOID
    head: Activation = Activation.SIGMOID

    def __post_init__(self):
        self.arch = _as_arch(self.arch)
        if len(self.weights) != len(self.arch) - 1 or len(self.biases) != len(self.arch) - 1:
            raise ShapeError("FnnModel layers", (len(self.weights), len(self.biases)), (len(self.arch) - 1,))
        for l, (w, b) in enumerate(zip(self.weights, self.biases)):
            want = (self.arch[l + 1], self.arch[l])
            if w.shape != want:
                raise ShapeError(f"FnnModel weights[{l}]", w.shape, want)
            if b.shape != (self.arch[l + 1],):
                raise ShapeError(f"FnnModel biases[{l}]", b.shape, (self.arch[l + 1],))

    def copy(self) -> "FnnModel":
        return FnnModel(self.arch, [w.copy() for w in self.weights],
                        [b.copy() for b in self.biases], self.activation, self.head)

    @property
    def n_in(self) -> int:
        return self.arch[0]

    @property
    def n_out(self) -> int:
        return self.arch[-1]

    def blocks(self):
        return [(self.weights[:-1], self.biases[:-1], self.weights[-1])]

    @property
    def output_bias(self) -> np.ndarray:
        return self.biases[-1]

    # trainable arrays in a fixed order; gradients use the same order
    def weight_arrays(self) -> list[np.ndarray]:
        return list(self.weights)

    def bias_arrays(self) -> list[np.ndarray]:
        return list(self.biases)


@dataclass
class SubNet:
    """One hidden stack plus its output weight block."""

    arch: tuple[int, ...]
    hidden_weights: list[np.ndarray]
    hidden_biases: list[np.ndarray]
    output_weights: np.ndarray

    def copy(self) -> "SubNet":
        return SubNet(self.arch, [w.copy() for w in self.hidden_weights],
                      [b.copy() for b in self.hidden_biases], self.output_weights.copy())

    @property
    def last_hidden(self) -> int:
        return self.arch[-2]


@dataclass
class PnnModel:
    """Parallel connection of two or more sub-networks.

    ``shared_bias`` is the trainable output bias ``b``.  ``sub_biases`` hold
    each sub-network's own output bias as it was when the networks were
    connected; training never touches them.
    """

    subnets: list[SubNet]
    shared_bias: np.ndarray
    sub_biases: list[np.ndarray]
    activation: Activation = Activation.SIGMOID
    head: Activation = Activation.SIGMOID
    archs: list[tuple[int, ...]] = field(init=False)

    def __post_init__(self):
        if len(self.subnets) < 2:
            raise ArchError(f"a PNN needs at least 2 sub-networks, got {len(self.subnets)}")
        if len(self.sub_biases) != len(self.subnets):
            raise ShapeError("PnnModel sub_biases", (len(self.sub_biases),), (len(self.subnets),))
        self.archs = [s.arch for s in self.subnets]
        n_in, n_out = self.archs[0][0], self.archs[0][-1]
        for a in self.archs:
            if a[0] != n_in or a[-1] != n_out:
                raise ArchError(f"sub-network {list(a)} does not share input width {n_in} "
                                f"and output width {n_out}")
        for b in [self.shared_bias, *self.sub_biases]:
            if b.shape != (n_out,):
                raise ShapeError("PnnModel output bias", b.shape, (n_out,))

    def copy(self) -> "PnnModel":
        return PnnModel([s.copy() for s in self.subnets], self.shared_bias.copy(),
                        [b.copy() for b in self.sub_biases], self.activation, self.head)

    @property
    def n_in(self) -> int:
        return self.archs[0][0]

    @property
    def n_out(self) -> int:
        return self.archs[0][-1]

    def blocks(self):
        return [(s.hidden_weights, s.hidden_biases, s.output_weights) for s in self.subnets]

    @property
    def output_bias(self) -> np.ndarray:
        return self.shared_bias

    def weight_arrays(self) -> list[np.ndarray]:
        out = []
        for s in self.subnets:
            out.extend(s.hidden_weights)
            out.append(s.output_weights)
        return out

    def bias_arrays(self) -> list[np.ndarray]:
        out = []
        for s in self.subnets:
            out.extend(s.hidden_biases)
        out.append(self.shared_bias)
        return out


def param_count(model: FnnModel | PnnModel) -> int:
    return sum(a.size for a in model.weight_arrays()) + sum(a.size for a in model.bias_arrays())


def init_fnn(arch: Sequence[int], activation: Activation, rng: Rng,
             head: Activation = Activation.SIGMOID) -> FnnModel:
    """Gaussian initialisation: biases ~ N(0, 1), weights ~ N(0, 1/fan_in).

    Draw order is all biases (input side first), then all weight matrices in
    row-major order.
    """
    arch = _as_arch(arch)
    biases = [rng.gaussian_array((n,)) for n in arch[1:]]
    weights = [rng.gaussian_array((n_out, n_in), 0.0, 1.0 / math.sqrt(n_in))
               for n_in, n_out in zip(arch[:-1], arch[1:])]
    return FnnModel(arch, weights, biases, activation, head)


def connect(models: Sequence[FnnModel]) -> PnnModel:
    if len(models) < 2:
        raise ArchError(f"connect needs at least 2 networks, got {len(models)}")
    first = models[0]
    for m in models[1:]:
        if m.n_in != first.n_in or m.n_out != first.n_out:
            raise ArchError(f"cannot connect {list(first.arch)} with {list(m.arch)}: "
                            "input and output widths must match")
        if m.activation is not first.activation or m.head is not first.head:
            raise ArchError("cannot connect networks with different activation functions")
    subnets = [SubNet(m.arch, [w.copy() for w in m.weights[:-1]],
                      [b.copy() for b in m.biases[:-1]], m.weights[-1].copy())
               for m in models]
    sub_biases = [m.biases[-1].copy() for m in models]
    shared = reduce(linalg.add, sub_biases)
    return PnnModel(subnets, shared, sub_biases, first.activation, first.head)


def as_fnn(model: PnnModel) -> FnnModel:
    """Rewrite a PNN of two-layer sub-networks as one wider two-layer FNN."""
    if any(len(a) != 3 for a in model.archs):
        raise ArchError("only PNNs made of two-layer sub-networks collapse to a single FNN")
    hidden_w = np.vstack([s.hidden_weights[0] for s in model.subnets])
    hidden_b = np.concatenate([s.hidden_biases[0] for s in model.subnets])
    out_w = np.hstack([s.output_weights for s in model.subnets])
    arch = (model.n_in, hidden_b.size, model.n_out)
    return FnnModel(arch, [hidden_w, out_w], [hidden_b, model.shared_bias.copy()],
                    model.activation, model.head)


# ---------------------------------------------------------------------------
# single-example forward passes

class Trace(NamedTuple):
    zs: list[np.ndarray]
    activations: list[np.ndarray]  # activations[0] is the input


def _check_input(model, x: np.ndarray) -> None:
    if x.ndim != 1 or x.shape[0] != model.n_in:
        raise ShapeError("forward input", x.shape, (model.n_in,))


def _hidden(ws, bs, x, act: Activation) -> Trace:
    zs, acts = [], [x]
    for w, b in zip(ws, bs):
        z = linalg.add(linalg.matvec(w, acts[-1]), b)
        zs.append(z)
        acts.append(act(z))
    return Trace(zs, acts)


def forward_fnn(model: FnnModel, x: np.ndarray) -> Trace:
    _check_input(model, x)
    tr = _hidden(model.weights[:-1], model.biases[:-1], x, model.activation)
    z = linalg.add(linalg.matvec(model.weights[-1], tr.activations[-1]), model.biases[-1])
    return Trace(tr.zs + [z], tr.activations + [model.head(z)])


class PnnOutput(NamedTuple):
    z: np.ndarray
    activation: np.ndarray
    hidden: list[np.ndarray]  # last hidden-layer activation of each sub-network


def _last_hidden(model: PnnModel, x: np.ndarray) -> list[np.ndarray]:
    return [_hidden(s.hidden_weights, s.hidden_biases, x, model.activation).activations[-1]
            for s in model.subnets]


def forward_pnn(model: PnnModel, x: np.ndarray) -> PnnOutput:
    _check_input(model, x)
    hidden = _last_hidden(model, x)
    parts = [linalg.matvec(s.output_weights, h) for s, h in zip(model.subnets, hidden)]
    z = linalg.add(reduce(linalg.add, parts), model.shared_bias)
    return PnnOutput(z, model.head(z), hidden)


def forward_masked(model: PnnModel, x: np.ndarray, keep: int,
                   mode: BiasMode = BiasMode.SHARED) -> tuple[np.ndarray, np.ndarray]:
    """Output of the PNN with every sub-network but ``keep`` bypassed.

    OWN uses the kept sub-network's own bias ``b_keep``; SHARED uses the
    trained shared bias ``b``.
    """
    _check_input(model, x)
    if not 0 <= keep < len(model.subnets):
        raise IndexError(f"sub-network index {keep} out of range 0..{len(model.subnets) - 1}")
    s = model.subnets[keep]
    h = _hidden(s.hidden_weights, s.hidden_biases, x, model.activation).activations[-1]
    bias = model.sub_biases[keep] if BiasMode(mode) is BiasMode.OWN else model.shared_bias
    z = linalg.add(linalg.matvec(s.output_weights, h), bias)
    return z, model.head(z)


def classify(output_activation: np.ndarray) -> int:
    """Index of the largest activation; ties go to the lowest index."""
    return int(np.argmax(output_activation))


# ---------------------------------------------------------------------------
# batched passes (rows of ``xs`` are examples)

class BatchTrace(NamedTuple):
    hidden: list[Trace]  # per sub-network, batched zs/activations
    z: np.ndarray
    activation: np.ndarray


def _hidden_batch(ws, bs, xs, act: Activation) -> Trace:
    zs, acts = [], [xs]
    for w, b in zip(ws, bs):
        z = linalg.batch_matvec(w, acts[-1]) + b
        zs.append(z)
        acts.append(act(z))
    return Trace(zs, acts)


def forward_batch(model: FnnModel | PnnModel, xs: np.ndarray) -> BatchTrace:
    if xs.ndim != 2 or xs.shape[1] != model.n_in:
        raise ShapeError("forward_batch input", xs.shape, (None, model.n_in))
    traces, z = [], None
    for ws, bs, out_w in model.blocks():
        tr = _hidden_batch(ws, bs, xs, model.activation)
        traces.append(tr)
        part = linalg.batch_matvec(out_w, tr.activations[-1])
        z = part if z is None else z + part
    z = z + model.output_bias
    return BatchTrace(traces, z, model.head(z))


def contributions(model: FnnModel | PnnModel, xs: np.ndarray) -> list[np.ndarray]:
    """Per sub-network ``w_i . x_i`` for every row of ``xs`` (no bias)."""
    out = []
    for ws, bs, out_w in model.blocks():
        h = _hidden_batch(ws, bs, xs, model.activation).activations[-1]
        out.append(linalg.batch_matvec(out_w, h))
    return out


def predict_fnn(model: FnnModel, xs: np.ndarray) -> np.ndarray:
    (c,) = contributions(model, xs)
    return np.argmax(model.head(c + model.output_bias), axis=1)
