"""Class-hypervector model: adaptive single-pass online training, iterative
retraining on mispredictions, prediction, evaluation, and serialization.

Training updates, with delta_l = cosine(H, C_l) and learning rate eta:

    online (every sample):        C_l += eta * (1 - delta_l) * H
    retrain (on misprediction,
    true label l, predicted l'):  C_l  += eta * (delta_l' - delta_l) * H
                                  C_l' -= eta * (delta_l' - delta_l) * H

A zero-norm class vector contributes delta = 0 by convention.  Class
vectors are stored float32 (matching the on-disk format, so save/load
round-trips bit-exactly); each retrain increment is computed once and
applied with both signs, so the two touched rows move by exact
component-wise negatives.
"""

from __future__ import annotations

import os
import struct
import tempfile
import zlib
from dataclasses import dataclass, field

import numpy as np

from .encoding import EncoderConfig
from .errors import (
    BadMagicError,
    ChecksumError,
    DimensionMismatchError,
    EmptyDatasetError,
    ModelNotTrainedError,
    TruncatedModelError,
    UnknownClassError,
    UnsupportedVersionError,
)
from .hv import AccumHV

MAGIC = b"HDWM"
FORMAT_VERSION = 1


@dataclass(eq=False)
class Model:
    """Per-class accumulators plus everything needed to reproduce encodings.

    ``trained_epochs`` counts retraining epochs (0 right after online
    training); it and ``retrain_curve`` are runtime metadata, not persisted.
    """

    classes: list
    encoder: EncoderConfig
    eta: float = 0.5
    class_matrix: np.ndarray = None  # type: ignore[assignment]
    trained_epochs: int = 0
    retrain_curve: list = field(default_factory=list)

    def __post_init__(self):
        if not self.classes:
            raise UnknownClassError("model needs at least one class")
        if len(set(self.classes)) != len(self.classes):
            raise UnknownClassError("duplicate class labels")
        k = len(self.classes)
        if self.class_matrix is None:
            self.class_matrix = np.zeros((k, self.encoder.dim), dtype=np.float32)
        else:
            self.class_matrix = np.asarray(self.class_matrix, dtype=np.float32)
            if self.class_matrix.shape != (k, self.encoder.dim):
                raise DimensionMismatchError(
                    f"class matrix shape {self.class_matrix.shape} != "
                    f"({k}, {self.encoder.dim})"
                )
        self._index = {c: i for i, c in enumerate(self.classes)}

    @property
    def dim(self) -> int:
        return self.encoder.dim

    @property
    def n_classes(self) -> int:
        return len(self.classes)

    @property
    def is_trained(self) -> bool:
        return bool(np.any(self.class_matrix))

    def class_hv(self, label) -> AccumHV:
        return AccumHV(self.dim, self.class_matrix[self.class_index(label)])

    def class_index(self, label) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise UnknownClassError(f"unknown class {label!r}") from None

    def copy(self) -> "Model":
        return Model(
            classes=list(self.classes),
            encoder=self.encoder,
            eta=self.eta,
            class_matrix=self.class_matrix.copy(),
            trained_epochs=self.trained_epochs,
            retrain_curve=list(self.retrain_curve),
        )

    def __eq__(self, other):
        return (
            isinstance(other, Model)
            and self.classes == other.classes
            and self.encoder == other.encoder
            and self.eta == other.eta
            and np.array_equal(self.class_matrix, other.class_matrix)
        )


def _as_components(H) -> np.ndarray:
    if isinstance(H, AccumHV):
        return np.asarray(H.comps, dtype=np.float64)
    return H.to_array().astype(np.float64)


def similarities(model: Model, H) -> np.ndarray:
    """Cosine of H against every class vector; zero-norm rows give 0."""
    h = _as_components(H)
    if h.shape != (model.dim,):
        raise DimensionMismatchError(f"query dim {h.shape} != ({model.dim},)")
    hn = np.linalg.norm(h)
    M = model.class_matrix.astype(np.float64)
    dots = M @ h
    norms = np.linalg.norm(M, axis=1)
    out = np.zeros(model.n_classes)
    ok = (norms > 0) & (hn > 0)
    out[ok] = dots[ok] / (norms[ok] * hn)
    return out


def predict(model: Model, H):
    """Most similar class; ties resolve to the lowest class index."""
    if not model.is_trained:
        raise ModelNotTrainedError("model has not been trained")
    return model.classes[int(np.argmax(similarities(model, H)))]


def online_update(model: Model, H, label) -> Model:
    """One adaptive update: the true class absorbs H scaled by how much new
    information it carries (eta * (1 - delta)).  Mutates and returns model."""
    li = model.class_index(label)
    delta = similarities(model, H)[li]
    if delta != 1.0:
        inc = (model.eta * (1.0 - delta) * _as_components(H)).astype(np.float32)
        model.class_matrix[li] += inc
    return model


def train_online(model: Model, stream) -> Model:
    """Single sequential pass of online updates; order matters by design."""
    for H, label in stream:
        online_update(model, H, label)
    model.trained_epochs = 0
    return model


def retrain_epoch(model: Model, dataset) -> tuple[Model, int]:
    """One pass updating only on mispredictions; later samples in the epoch
    see earlier updates.  Returns (model, misprediction count)."""
    if not model.is_trained:
        raise ModelNotTrainedError("retraining starts from a trained model")
    misses = 0
    for H, label in dataset:
        li = model.class_index(label)
        sims = similarities(model, H)
        pi = int(np.argmax(sims))
        if pi != li:
            misses += 1
            inc = (model.eta * (sims[pi] - sims[li]) * _as_components(H)).astype(
                np.float32
            )
            model.class_matrix[li] += inc
            model.class_matrix[pi] -= inc
    model.trained_epochs += 1
    return model, misses


def train_iterative(
    model: Model,
    dataset,
    max_epochs: int = 30,
    patience: int = 3,
    shuffle_seed: int | None = None,
) -> Model:
    """Retrain until the training misprediction count stops improving for
    `patience` consecutive epochs (or max_epochs); returns the epoch-end
    snapshot with the fewest mispredictions.

    Samples are visited in dataset order unless shuffle_seed is given, in
    which case each epoch uses a fresh seeded permutation.
    """
    dataset = list(dataset)
    best = model.copy()
    best_misses = None
    bad_epochs = 0
    curve = []
    rng = None if shuffle_seed is None else np.random.Generator(
        np.random.Philox(key=np.array([shuffle_seed, 0], dtype=np.uint64))
    )
    for _ in range(max_epochs):
        epoch_data = dataset
        if rng is not None:
            epoch_data = [dataset[i] for i in rng.permutation(len(dataset))]
        model, misses = retrain_epoch(model, epoch_data)
        curve.append(misses)
        if best_misses is None or misses < best_misses:
            best_misses = misses
            best = model.copy()
            bad_epochs = 0
        else:
            bad_epochs += 1
            if bad_epochs > patience:
                break
        if misses == 0:
            break
    best.trained_epochs = len(curve)
    best.retrain_curve = curve
    return best


@dataclass
class EvalReport:
    """Accuracy, confusion counts (row = true class, column = predicted),
    and per-class recall."""

    classes: list
    accuracy: float
    confusion: np.ndarray
    per_class_recall: np.ndarray
    n_samples: int


def evaluate(model: Model, dataset) -> EvalReport:
    dataset = list(dataset)
    if not dataset:
        raise EmptyDatasetError("cannot evaluate on an empty dataset")
    k = model.n_classes
    confusion = np.zeros((k, k), dtype=np.int64)
    for H, label in dataset:
        confusion[model.class_index(label), model.class_index(predict(model, H))] += 1
    total = int(confusion.sum())
    correct = int(np.trace(confusion))
    row_sums = confusion.sum(axis=1)
    recall = np.divide(
        np.diag(confusion),
        row_sums,
        out=np.zeros(k, dtype=np.float64),
        where=row_sums > 0,
    )
    return EvalReport(
        classes=list(model.classes),
        accuracy=correct / total,
        confusion=confusion,
        per_class_recall=recall,
        n_samples=total,
    )


# ------------------------------------------------------------- serialization
#
# Layout (all integers little-endian):
#   magic "HDWM" | u16 version | u32 D | u32 K | u32 Q | u32 n | f64 eta
#   | u64 item_seed | u64 level_seed | u64 sensor_seed | u64 tie_seed
#   | u32 F | F x (f64 v_min, f64 v_max)
#   | K x (u32 byte_len, UTF-8 label)
#   | K x D f32 class components (row-major)
#   | u32 CRC32 of all preceding bytes


def model_to_bytes(model: Model) -> bytes:
    enc = model.encoder
    head = struct.pack(
        "<4sHIIIId4QI",
        MAGIC,
        FORMAT_VERSION,
        enc.dim,
        model.n_classes,
        enc.q_levels,
        enc.n,
        model.eta,
        enc.item_seed & (2**64 - 1),
        enc.level_seed & (2**64 - 1),
        enc.sensor_seed & (2**64 - 1),
        enc.tie_seed & (2**64 - 1),
        enc.n_features,
    )
    parts = [head]
    for lo, hi in enc.feature_bounds:
        parts.append(struct.pack("<dd", float(lo), float(hi)))
    for label in model.classes:
        raw = str(label).encode("utf-8")
        parts.append(struct.pack("<I", len(raw)) + raw)
    parts.append(model.class_matrix.astype("<f4").tobytes())
    payload = b"".join(parts)
    return payload + struct.pack("<I", zlib.crc32(payload))


class _Reader:
    def __init__(self, blob: bytes):
        self.blob = blob
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.blob):
            raise TruncatedModelError(
                f"file ends at byte {len(self.blob)}, needed {self.pos + n}"
            )
        out = self.blob[self.pos : self.pos + n]
        self.pos += n
        return out

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))


def model_from_bytes(blob: bytes) -> Model:
    if len(blob) < 4 or blob[:4] != MAGIC:
        raise BadMagicError("not a model file (bad magic)")
    r = _Reader(blob)
    r.take(4)
    (version,) = r.unpack("<H")
    if version != FORMAT_VERSION:
        raise UnsupportedVersionError(
            f"format version {version} not supported (expected {FORMAT_VERSION})"
        )
    dim, k, q, n = r.unpack("<IIII")
    (eta,) = r.unpack("<d")
    item_seed, level_seed, sensor_seed, tie_seed = r.unpack("<4Q")
    (n_features,) = r.unpack("<I")
    bounds = [r.unpack("<dd") for _ in range(n_features)]
    classes = []
    for _ in range(k):
        (ln,) = r.unpack("<I")
        classes.append(r.take(ln).decode("utf-8"))
    matrix = np.frombuffer(r.take(4 * k * dim), dtype="<f4").reshape(k, dim)
    payload_end = r.pos
    (stored_crc,) = r.unpack("<I")
    if zlib.crc32(blob[:payload_end]) != stored_crc:
        raise ChecksumError("model file checksum mismatch")
    encoder = EncoderConfig(
        dim=dim,
        n=n,
        q_levels=q,
        item_seed=item_seed,
        level_seed=level_seed,
        sensor_seed=sensor_seed,
        tie_seed=tie_seed,
        feature_bounds=[(lo, hi) for lo, hi in bounds],
    )
    return Model(classes=classes, encoder=encoder, eta=eta, class_matrix=matrix.copy())


def save_model(model: Model, path) -> None:
    """Write atomically: temp file in the target directory, then rename."""
    blob = model_to_bytes(model)
    path = os.fspath(path)
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(blob)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_model(path) -> Model:
    with open(path, "rb") as fh:
        return model_from_bytes(fh.read())
