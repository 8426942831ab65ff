"""Accuracy curves, Type I-IV result taxonomy and output-weight snapshots."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .dataio import Split
from .errors import ShapeError
from .network import BiasMode, PnnModel, contributions

TYPE_NAMES = ("I", "II", "III", "IV")


@dataclass(frozen=True)
class Predictions:
    """Class predictions on an evaluation split.

    ``own[i]`` / ``shared[i]`` come from sub-network ``i`` alone with its own
    output bias or the shared one, respectively.
    """

    para: np.ndarray
    own: list[np.ndarray]
    shared: list[np.ndarray]
    labels: np.ndarray

    def masked(self, mode: BiasMode) -> list[np.ndarray]:
        return self.own if BiasMode(mode) is BiasMode.OWN else self.shared


def _argmax_rows(model: PnnModel, z: np.ndarray) -> np.ndarray:
    return np.argmax(model.head(z), axis=1)


def predictions(model: PnnModel, data: Split) -> Predictions:
    parts = contributions(model, data.images)
    total = parts[0]
    for p in parts[1:]:
        total = total + p
    para = _argmax_rows(model, total + model.shared_bias)
    own = [_argmax_rows(model, p + b) for p, b in zip(parts, model.sub_biases)]
    shared = [_argmax_rows(model, p + model.shared_bias) for p in parts]
    return Predictions(para, own, shared, data.labels)


@dataclass(frozen=True)
class EpochMetrics:
    epoch: int
    alpha_para: float
    alpha: list[float]        # own output bias
    alpha_prime: list[float]  # shared output bias


def _frac(pred: np.ndarray, labels: np.ndarray) -> float:
    return int(np.count_nonzero(pred == labels)) / len(labels)


def metrics_from_predictions(preds: Predictions, epoch: int) -> EpochMetrics:
    y = preds.labels
    return EpochMetrics(epoch, _frac(preds.para, y),
                        [_frac(p, y) for p in preds.own],
                        [_frac(p, y) for p in preds.shared])


def evaluate(model: PnnModel, data: Split, epoch: int = 0) -> tuple[EpochMetrics, Predictions]:
    if len(data) == 0:
        raise ValueError("evaluation set is empty")
    preds = predictions(model, data)
    return metrics_from_predictions(preds, epoch), preds


def accuracy_para(model: PnnModel, data: Split) -> float:
    if len(data) == 0:
        raise ValueError("evaluation set is empty")
    return _frac(predictions(model, data).para, data.labels)


def accuracy_masked(model: PnnModel, data: Split, subnet: int,
                    mode: BiasMode = BiasMode.SHARED) -> float:
    if not 0 <= subnet < len(model.subnets):
        raise IndexError(f"sub-network index {subnet} out of range 0..{len(model.subnets) - 1}")
    if len(data) == 0:
        raise ValueError("evaluation set is empty")
    return _frac(predictions(model, data).masked(mode)[subnet], data.labels)


class Record(NamedTuple):
    index: int
    r1: int
    r2: int
    rp: int
    y: int


@dataclass
class ResultTaxonomy:
    """PNN-correct examples split by which sub-networks were also right.

    I: both right; II: only network 1 wrong; III: only network 2 wrong;
    IV: both wrong although the PNN is right.
    """

    total_correct: int
    type_counts: dict[str, int]
    records: list[Record]
    mask_mode: BiasMode = BiasMode.SHARED

    @property
    def n_iv(self) -> int:
        return self.type_counts["IV"]

    def records_of(self, type_name: str) -> list[Record]:
        return [r for r in self.records if classify_record(r) == type_name]

    def group_by_pair(self, type_name: str | None = None) -> dict[tuple[int, int], list[Record]]:
        groups: dict[tuple[int, int], list[Record]] = defaultdict(list)
        for r in (self.records if type_name is None else self.records_of(type_name)):
            groups[(r.r1, r.r2)].append(r)
        return dict(groups)


def classify_record(r: Record) -> str:
    if r.rp != r.y:
        raise ValueError(f"record {r} is not a PNN-correct result")
    ok1, ok2 = r.r1 == r.y, r.r2 == r.y
    if ok1 and ok2:
        return "I"
    if ok2:
        return "II"
    if ok1:
        return "III"
    return "IV"


def taxonomy_from_predictions(preds: Predictions, mode: BiasMode = BiasMode.SHARED) -> ResultTaxonomy:
    masked = preds.masked(mode)
    if len(masked) != 2:
        raise ValueError(f"the Type I-IV taxonomy needs exactly 2 sub-networks, got {len(masked)}")
    r1, r2 = masked
    y = preds.labels
    records = [Record(int(i), int(r1[i]), int(r2[i]), int(preds.para[i]), int(y[i]))
               for i in np.flatnonzero(preds.para == y)]
    counts = dict.fromkeys(TYPE_NAMES, 0)
    for r in records:
        counts[classify_record(r)] += 1
    return ResultTaxonomy(len(records), counts, records, BiasMode(mode))


def categorize(model: PnnModel, data: Split, mode: BiasMode = BiasMode.SHARED) -> ResultTaxonomy:
    return taxonomy_from_predictions(predictions(model, data), mode)


@dataclass
class WeightSnapshot:
    """Output-layer weights, one column per last-hidden neuron of any sub-network.

    ``owner[j]`` is the 0-based sub-network that neuron ``j`` belongs to;
    sub-network 1's neurons come first.
    """

    weights: np.ndarray  # (n_out, total last-hidden neurons)
    owner: np.ndarray

    def block(self, subnet: int) -> np.ndarray:
        return self.weights[:, self.owner == subnet]

    @property
    def n_subnets(self) -> int:
        return int(self.owner.max()) + 1


def weight_snapshot(model: PnnModel) -> WeightSnapshot:
    blocks = [s.output_weights for s in model.subnets]
    owner = np.concatenate([np.full(b.shape[1], i) for i, b in enumerate(blocks)])
    return WeightSnapshot(np.hstack(blocks).copy(), owner)


def apply_snapshot(model: PnnModel, ws: WeightSnapshot) -> PnnModel:
    out = model.copy()
    for i, s in enumerate(out.subnets):
        block = ws.block(i)
        if block.shape != s.output_weights.shape:
            raise ShapeError("apply_snapshot", block.shape, s.output_weights.shape)
        s.output_weights = block.copy()
    return out


@dataclass(frozen=True)
class BlockStats:
    subnet: int
    mean_abs: float
    max_abs: float
    rms: float


def weight_balance(ws: WeightSnapshot) -> list[BlockStats]:
    stats = []
    for i in range(ws.n_subnets):
        w = ws.block(i)
        stats.append(BlockStats(i, float(np.mean(np.abs(w))), float(np.max(np.abs(w))),
                                float(np.sqrt(np.mean(w * w)))))
    return stats
