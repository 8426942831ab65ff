"""Parallel-connected feedforward neural networks trained from scratch."""

from .network import (Activation, BiasMode, FnnModel, PnnModel, SubNet, classify, connect,
                      forward_fnn, forward_masked, forward_pnn, init_fnn, param_count)
from .rng import Rng
from .train import TrainConfig, run, run_method_A, run_method_B

__all__ = [
    "Activation", "BiasMode", "FnnModel", "PnnModel", "SubNet", "Rng", "TrainConfig",
    "classify", "connect", "forward_fnn", "forward_masked", "forward_pnn", "init_fnn",
    "param_count", "run", "run_method_A", "run_method_B",
]
