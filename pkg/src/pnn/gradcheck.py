"""Central finite-difference oracle for backprop, plus the merge-equivalence check.

Both checks only need a model and random inputs, so they run without MNIST.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .network import (Activation, FnnModel, PnnModel, as_fnn, connect, forward_batch, forward_fnn,
                      forward_pnn, init_fnn)
from .rng import Rng
from .train import backprop, cost_fn


def _example_cost(model, x: np.ndarray, y: np.ndarray) -> float:
    a = forward_batch(model, x[None, :]).activation[0]
    return cost_fn(model.head)(a, y)


def numeric_gradient(model, x, y, h: float = 1e-5) -> np.ndarray:
    """Central differences over every parameter, flattened weights-then-biases."""
    model = model.copy()
    out = []
    for arr in model.weight_arrays() + model.bias_arrays():
        flat = arr.reshape(-1)  # view: edits land in the model
        for i in range(flat.size):
            keep = flat[i]
            flat[i] = keep + h
            up = _example_cost(model, x, y)
            flat[i] = keep - h
            down = _example_cost(model, x, y)
            flat[i] = keep
            out.append((up - down) / (2.0 * h))
    return np.array(out)


def relative_errors(analytic: np.ndarray, numeric: np.ndarray) -> np.ndarray:
    """|g - g_fd| / max(|g|, |g_fd|); entries where both are exactly 0 count as 0."""
    scale = np.maximum(np.abs(analytic), np.abs(numeric))
    diff = np.abs(analytic - numeric)
    return np.divide(diff, scale, out=np.zeros_like(diff), where=scale > 0)


@dataclass
class GradCheck:
    max_rel_error: float
    max_abs_error: float
    n_params: int


def check_gradient(model, x, y, h: float = 1e-5) -> GradCheck:
    analytic = backprop(model, x, y).flat()
    numeric = numeric_gradient(model, x, y, h)
    rel = relative_errors(analytic, numeric)
    return GradCheck(float(rel.max()), float(np.abs(analytic - numeric).max()), analytic.size)


def random_pnn(archs, activation: Activation, rng: Rng, head=Activation.SIGMOID) -> PnnModel:
    """Connected PNN whose shared bias is re-drawn so it differs from sum(b_i)."""
    pnn = connect([init_fnn(a, activation, rng.child(i + 1), head) for i, a in enumerate(archs)])
    pnn.shared_bias = rng.gaussian_array(pnn.shared_bias.shape)
    return pnn


def random_example(n_in: int, n_out: int, rng: Rng) -> tuple[np.ndarray, np.ndarray]:
    x = np.array([rng.uniform() for _ in range(n_in)])
    y = np.zeros(n_out)
    y[rng.randbelow(n_out)] = 1.0
    return x, y


def gradient_oracle(seed: int = 0, h: float = 1e-5) -> dict[str, float]:
    """Max relative backprop error per model and activation."""
    rng = Rng(seed)
    out = {}
    for act in Activation:
        fnn = init_fnn([6, 4, 3], act, rng.child(0x10 + act.code))
        x, y = random_example(6, 3, rng)
        out[f"fnn[6,4,3]/{act.value}"] = check_gradient(fnn, x, y, h).max_rel_error
        pnn = random_pnn([[6, 3, 3], [6, 2, 4, 3]], act, rng.child(0x20 + act.code))
        x, y = random_example(6, 3, rng)
        out[f"pnn[6,3,3]+[6,2,4,3]/{act.value}"] = check_gradient(pnn, x, y, h).max_rel_error
    return out


def merge_oracle(seed: int = 0, n_inputs: int = 100) -> float:
    """Max |z| difference between a [4,3,3]+[4,2,3] PNN and its [4,5,3] FNN form."""
    rng = Rng(seed)
    pnn = random_pnn([[4, 3, 3], [4, 2, 3]], Activation.SIGMOID, rng)
    fnn: FnnModel = as_fnn(pnn)
    xs = np.array([[rng.gaussian() for _ in range(4)] for _ in range(n_inputs)])
    return max(float(np.max(np.abs(forward_pnn(pnn, x).z - forward_fnn(fnn, x).zs[-1]))) for x in xs)
