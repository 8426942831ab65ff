"""On-disk formats: binary checkpoints, metrics/weights CSV, taxonomy JSON.

Checkpoint layout (all integers little-endian):

    b"PNN1"                          magic
    u8   format version (1)
    u8   hidden activation code (0 sigmoid, 1 relu, 2 tanh)
    u8   output-layer activation code
    u32  sub-network count k
    k x  [u32 layer count L, L x u32 layer sizes]
    k x  [for each hidden layer: weights (rows*cols f64), bias (rows f64);
          then the output weight block (n_out * n_last f64)]
    f64  shared output bias (n_out)
    k x  f64 frozen sub-network output bias (n_out)

Matrices are row-major; floats are IEEE-754 binary64 little-endian.
"""

from __future__ import annotations

import csv
import io
import json
import struct
from pathlib import Path

import numpy as np

from .errors import CheckpointError
from .metrics import EpochMetrics, Record, ResultTaxonomy, WeightSnapshot, TYPE_NAMES
from .network import Activation, BiasMode, PnnModel, SubNet

MAGIC = b"PNN1"
VERSION = 1
_F64 = np.dtype("<f8")


def checkpoint_bytes(model: PnnModel) -> bytes:
    out = io.BytesIO()
    out.write(MAGIC)
    out.write(struct.pack("<BBBI", VERSION, model.activation.code, model.head.code,
                          len(model.subnets)))
    for arch in model.archs:
        out.write(struct.pack(f"<I{len(arch)}I", len(arch), *arch))
    for s in model.subnets:
        for w, b in zip(s.hidden_weights, s.hidden_biases):
            out.write(w.astype(_F64).tobytes())
            out.write(b.astype(_F64).tobytes())
        out.write(s.output_weights.astype(_F64).tobytes())
    out.write(model.shared_bias.astype(_F64).tobytes())
    for b in model.sub_biases:
        out.write(b.astype(_F64).tobytes())
    return out.getvalue()


class _Reader:
    def __init__(self, buf: bytes, name: str):
        self.buf, self.pos, self.name = buf, 0, name

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.buf):
            raise CheckpointError(f"{self.name}: truncated at byte {self.pos}, need {n} more")
        chunk = self.buf[self.pos:self.pos + n]
        self.pos += n
        return chunk

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))

    def floats(self, *shape) -> np.ndarray:
        n = int(np.prod(shape))
        return np.frombuffer(self.take(8 * n), dtype=_F64).astype(np.float64).reshape(shape)


def model_from_bytes(buf: bytes, name: str = "checkpoint") -> PnnModel:
    r = _Reader(buf, name)
    if r.take(4) != MAGIC:
        raise CheckpointError(f"{name}: not a PNN checkpoint (bad magic)")
    version, act, head, k = r.unpack("<BBBI")
    if version != VERSION:
        raise CheckpointError(f"{name}: unsupported format version {version}")
    try:
        activation, head_act = Activation.from_code(act), Activation.from_code(head)
    except ValueError as exc:
        raise CheckpointError(f"{name}: {exc}") from None
    archs = []
    for _ in range(k):
        (n_layers,) = r.unpack("<I")
        archs.append(r.unpack(f"<{n_layers}I"))
    subnets = []
    for arch in archs:
        ws, bs = [], []
        for n_in, n_out in zip(arch[:-2], arch[1:-1]):
            ws.append(r.floats(n_out, n_in))
            bs.append(r.floats(n_out))
        subnets.append(SubNet(tuple(arch), ws, bs, r.floats(arch[-1], arch[-2])))
    n_out = archs[0][-1]
    shared = r.floats(n_out)
    subs = [r.floats(n_out) for _ in range(k)]
    if r.pos != len(buf):
        raise CheckpointError(f"{name}: {len(buf) - r.pos} trailing bytes")
    return PnnModel(subnets, shared, subs, activation, head_act)


def save_checkpoint(path, model: PnnModel) -> None:
    Path(path).write_bytes(checkpoint_bytes(model))


def load_checkpoint(path) -> PnnModel:
    return model_from_bytes(Path(path).read_bytes(), str(path))


# ---------------------------------------------------------------------------
# metrics CSV

def metrics_columns(n_subnets: int) -> list[str]:
    cols = ["alpha_para"]
    for i in range(1, n_subnets + 1):
        cols += [f"alpha_{i}", f"alpha_{i}_prime"]
    return cols


def _row_values(m: EpochMetrics) -> list[float]:
    vals = [m.alpha_para]
    for a, ap in zip(m.alpha, m.alpha_prime):
        vals += [a, ap]
    return vals


def write_metrics_csv(path, rows: list[EpochMetrics]) -> None:
    """Decimal columns (6 places) for reading, ``*_hex`` columns for exact values."""
    k = len(rows[0].alpha) if rows else 2
    cols = metrics_columns(k)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["epoch", *cols, *(c + "_hex" for c in cols)])
        for m in rows:
            vals = _row_values(m)
            w.writerow([m.epoch, *(f"{v:.6f}" for v in vals), *(v.hex() for v in vals)])


def read_metrics_csv(path) -> list[EpochMetrics]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        hex_cols = [c for c in reader.fieldnames if c.endswith("_hex")]
        k = (len(hex_cols) - 1) // 2
        rows = []
        for rec in reader:
            v = lambda c: float.fromhex(rec[c + "_hex"])  # noqa: E731
            rows.append(EpochMetrics(int(rec["epoch"]), v("alpha_para"),
                                     [v(f"alpha_{i}") for i in range(1, k + 1)],
                                     [v(f"alpha_{i}_prime") for i in range(1, k + 1)]))
    return rows


# ---------------------------------------------------------------------------
# taxonomy JSON

def taxonomy_dict(tax: ResultTaxonomy, **extra) -> dict:
    return {
        **extra,
        "mask_mode": tax.mask_mode.value,
        "total": tax.total_correct,
        "type_counts": dict(tax.type_counts),
        "records": [r._asdict() for r in tax.records],
    }


def write_taxonomy_json(path, tax: ResultTaxonomy, **extra) -> None:
    Path(path).write_text(json.dumps(taxonomy_dict(tax, **extra), indent=1) + "\n")


def read_taxonomy_json(path) -> ResultTaxonomy:
    d = json.loads(Path(path).read_text())
    counts = {t: int(d["type_counts"][t]) for t in TYPE_NAMES}
    records = [Record(**r) for r in d["records"]]
    return ResultTaxonomy(int(d["total"]), counts, records, BiasMode(d["mask_mode"]))


# ---------------------------------------------------------------------------
# weight snapshot CSV; neurons and sub-networks are 1-indexed on disk

def write_weights_csv(path, ws: WeightSnapshot) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["neuron_index", "subnet", "output_digit", "weight"])
        for j in range(ws.weights.shape[1]):
            for d in range(ws.weights.shape[0]):
                # repr() is the shortest string that round-trips the float
                w.writerow([j + 1, int(ws.owner[j]) + 1, d, repr(float(ws.weights[d, j]))])


def read_weights_csv(path) -> WeightSnapshot:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    n_neurons = max(int(r["neuron_index"]) for r in rows)
    n_out = max(int(r["output_digit"]) for r in rows) + 1
    weights = np.zeros((n_out, n_neurons))
    owner = np.zeros(n_neurons, dtype=int)
    for r in rows:
        j = int(r["neuron_index"]) - 1
        weights[int(r["output_digit"]), j] = float(r["weight"])
        owner[j] = int(r["subnet"]) - 1
    return WeightSnapshot(weights, owner)
