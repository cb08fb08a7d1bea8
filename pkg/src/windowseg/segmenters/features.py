"""Log-linear autoregressive boundary model over hashed character n-grams.

The model factorizes a labeling's probability into per-token conditionals
p(y_t | y_<t, x) and parameterizes each with a logistic layer over sparse
features: hashed character n-grams of the tokens within a context radius
of t, plus one feature encoding the previous few decisions.  Everything
downstream (greedy/beam/exact search, n-best, reranking) only needs these
locally normalized conditionals.
"""

from __future__ import annotations

import math
import struct
import zlib
from dataclasses import dataclass
from pathlib import Path
from random import Random
from typing import Optional, Sequence, Union

import numpy as np

from ..core import CONTINUE, SPLIT, Decision, SegmentationLabels, Transcript

_PAD_LEFT = "<s>"
_PAD_RIGHT = "</s>"


@dataclass(frozen=True)
class FeatureConfig:
    """Feature space geometry; fixed at training time and stored with the model."""

    hash_dims: int = 2 ** 20
    ngram_orders: tuple[int, ...] = (2, 3, 4)
    context_radius: int = 5
    history: int = 4
    salt: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "ngram_orders", tuple(self.ngram_orders))
        if self.hash_dims < 1:
            raise ValueError("hash_dims must be >= 1")
        if not self.ngram_orders or any(o < 1 for o in self.ngram_orders):
            raise ValueError("ngram orders must be positive")
        if self.context_radius < 0 or self.history < 0:
            raise ValueError("context_radius and history must be >= 0")
        if not 0 <= self.salt <= 0xFFFFFFFF:
            raise ValueError("salt must fit in 32 bits")


def _hash(cfg: FeatureConfig, key: str) -> int:
    return zlib.crc32(key.encode("utf-8"), cfg.salt) % cfg.hash_dims


def history_bits(prefix: Sequence[object], t: int, history: int) -> str:
    """The last ``history`` decisions before position ``t`` as '0'/'1' chars.

    ``prefix`` may hold Decision values or 0/1 ints.  Positions before the
    sequence start pad with '_' so early positions are distinguishable.
    """
    bits = []
    for i in range(t - history, t):
        if i < 0:
            bits.append("_")
        else:
            d = prefix[i]
            bits.append("1" if d is SPLIT or d == 1 else "0")
    return "".join(bits)


def static_features(cfg: FeatureConfig, tokens: Sequence[str], t: int) -> dict[int, float]:
    """Position features independent of decision history: bias + char n-grams."""
    feats: dict[int, float] = {_hash(cfg, "B"): 1.0}
    n = len(tokens)
    for delta in range(-cfg.context_radius, cfg.context_radius + 1):
        idx = t + delta
        if idx < 0:
            tok = _PAD_LEFT
        elif idx >= n:
            tok = _PAD_RIGHT
        else:
            tok = tokens[idx]
        padded = "\x02" + tok + "\x03"
        for order in cfg.ngram_orders:
            for s in range(len(padded) - order + 1):
                fid = _hash(cfg, f"G{delta}:{order}:{padded[s:s + order]}")
                feats[fid] = feats.get(fid, 0.0) + 1.0
    return feats


def history_feature(cfg: FeatureConfig, bits: str) -> int:
    return _hash(cfg, "H" + bits)


def step_features(
    cfg: FeatureConfig, tokens: Sequence[str], t: int, prefix: Sequence[object]
) -> dict[int, float]:
    feats = static_features(cfg, tokens, t)
    fid = history_feature(cfg, history_bits(prefix, t, cfg.history))
    feats[fid] = feats.get(fid, 0.0) + 1.0
    return feats


def _softplus(x: float) -> float:
    if x > 0:
        return x + math.log1p(math.exp(-x))
    return math.log1p(math.exp(x))


def _sigmoid(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


@dataclass
class FeatureModel:
    """A trained (or zero-initialized) boundary model: weights over hashed features."""

    config: FeatureConfig
    weights: np.ndarray

    def __post_init__(self) -> None:
        self.weights = np.asarray(self.weights, dtype=np.float64)
        if self.weights.shape != (self.config.hash_dims,):
            raise ValueError(
                f"weights shape {self.weights.shape} != ({self.config.hash_dims},)"
            )

    @classmethod
    def zeros(cls, config: Optional[FeatureConfig] = None) -> "FeatureModel":
        cfg = config or FeatureConfig()
        return cls(cfg, np.zeros(cfg.hash_dims))

    def copy(self) -> "FeatureModel":
        return FeatureModel(self.config, self.weights.copy())

    def _logit(self, feats: dict[int, float]) -> float:
        ids = np.fromiter(feats.keys(), dtype=np.int64, count=len(feats))
        counts = np.fromiter(feats.values(), dtype=np.float64, count=len(feats))
        return float(self.weights[ids] @ counts)

    def split_logit(self, tokens: Sequence[str], t: int, prefix: Sequence[object]) -> float:
        """Log-odds of SPLIT at position ``t`` given the decision prefix."""
        if not 0 <= t < len(tokens):
            raise ValueError(f"position {t} outside window of {len(tokens)} tokens")
        return self._logit(step_features(self.config, tokens, t, prefix))

    def score_step(
        self, tokens: Sequence[str], t: int, prefix: Sequence[object]
    ) -> dict[Decision, float]:
        """Locally normalized log-distribution over the decision at ``t``.

        exp of the two scores sums to one.  The pipeline never consults
        position 0 (a segment opens there structurally); for consistency
        the raw conditional is returned anyway.
        """
        z = self.split_logit(tokens, t, prefix)
        return {SPLIT: -_softplus(-z), CONTINUE: -_softplus(z)}

    def sequence_logprob(
        self, tokens: Sequence[str], labels: Union[SegmentationLabels, Sequence[Decision]]
    ) -> float:
        """Log-likelihood of a labeling: sum over positions 1..n-1.

        Position 0 is structural and contributes nothing, matching the
        path scores produced by constrained search.
        """
        decisions = list(labels)
        if len(decisions) != len(tokens):
            raise ValueError(f"labels length {len(decisions)} != window length {len(tokens)}")
        total = 0.0
        for t in range(1, len(tokens)):
            z = self.split_logit(tokens, t, decisions[:t])
            total += -_softplus(-z) if decisions[t] is SPLIT else -_softplus(z)
        return total


@dataclass(frozen=True)
class TrainConfig:
    """SGD hyperparameters; defaults are artifact choices, all overridable."""

    epochs: int = 5
    learning_rate: float = 0.1
    seed: int = 13
    shuffle: bool = True

    def __post_init__(self) -> None:
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")


@dataclass
class TrainResult:
    model: FeatureModel
    epoch_losses: list[float]


Corpus = Sequence[tuple[Transcript, SegmentationLabels]]


def _check_corpus(corpus: Corpus) -> None:
    if not corpus:
        raise ValueError("training corpus is empty")
    for i, (transcript, labels) in enumerate(corpus):
        if len(labels) != len(transcript):
            raise ValueError(
                f"corpus item {i}: labels length {len(labels)} != "
                f"transcript length {len(transcript)}"
            )


def _example_steps(cfg: FeatureConfig, transcript: Transcript, labels: SegmentationLabels):
    """Precompute (ids, counts, y) per trainable position of one document."""
    steps = []
    decisions = labels.decisions
    for t in range(1, len(transcript)):
        feats = step_features(cfg, transcript.tokens, t, decisions)
        ids = np.fromiter(feats.keys(), dtype=np.int64, count=len(feats))
        counts = np.fromiter(feats.values(), dtype=np.float64, count=len(feats))
        steps.append((ids, counts, 1.0 if decisions[t] is SPLIT else 0.0))
    return steps


def evaluate_loss(model: FeatureModel, corpus: Corpus) -> float:
    """Mean per-token negative log-likelihood over positions 1..n-1."""
    _check_corpus(corpus)
    total = 0.0
    count = 0
    for transcript, labels in corpus:
        total -= model.sequence_logprob(transcript.tokens, labels)
        count += len(transcript) - 1
    return total / count if count else 0.0


def loss_gradient(model: FeatureModel, corpus: Corpus) -> tuple[float, np.ndarray]:
    """Mean per-token loss and its dense analytic gradient."""
    _check_corpus(corpus)
    grad = np.zeros_like(model.weights)
    total = 0.0
    count = 0
    for transcript, labels in corpus:
        for ids, counts, y in _example_steps(model.config, transcript, labels):
            z = float(model.weights[ids] @ counts)
            total += _softplus(z) - y * z
            np.add.at(grad, ids, (_sigmoid(z) - y) * counts)
            count += 1
    if count == 0:
        return 0.0, grad
    return total / count, grad / count


def train_feature_model(
    corpus: Corpus,
    feature_config: Optional[FeatureConfig] = None,
    train_config: Optional[TrainConfig] = None,
    init: Optional[FeatureModel] = None,
) -> TrainResult:
    """Stochastic gradient training of the per-token log-loss.

    The step size decays as lr/sqrt(step); document order is reshuffled
    per epoch from the seed, so runs are reproducible.  ``init`` warm
    starts from an existing model (its config wins); zero epochs then
    return it unchanged.  ``epoch_losses`` holds the full-corpus mean
    loss evaluated after each epoch.
    """
    tcfg = train_config or TrainConfig()
    if init is not None:
        model = init.copy()
    else:
        model = FeatureModel.zeros(feature_config)
    _check_corpus(corpus)
    prepared = [_example_steps(model.config, tr, lb) for tr, lb in corpus]
    rng = Random(tcfg.seed)
    order = list(range(len(prepared)))
    weights = model.weights
    step = 0
    losses: list[float] = []
    for _ in range(tcfg.epochs):
        if tcfg.shuffle:
            rng.shuffle(order)
        for doc_index in order:
            for ids, counts, y in prepared[doc_index]:
                step += 1
                z = float(weights[ids] @ counts)
                loss = _softplus(z) - y * z
                if not math.isfinite(loss):
                    raise ValueError(
                        f"non-finite loss {loss} at step {step} "
                        f"(document {doc_index}, logit {z})"
                    )
                lr = tcfg.learning_rate / math.sqrt(step)
                weights[ids] -= lr * (_sigmoid(z) - y) * counts
        losses.append(evaluate_loss(model, corpus))
    return TrainResult(model, losses)


_MAGIC = b"WSGM"
_VERSION = 1
_HEADER = struct.Struct("<4sHIB")  # magic, version, hash_dims, n_orders
_TAIL = struct.Struct("<BBIQ")     # radius, history, salt, nonzero count
_PAIR = struct.Struct("<Id")


def save_model(model: FeatureModel, path: Union[str, Path]) -> None:
    """Write the versioned binary model file (sparse nonzero weights)."""
    cfg = model.config
    nonzero = np.nonzero(model.weights)[0]
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(_MAGIC, _VERSION, cfg.hash_dims, len(cfg.ngram_orders)))
        fh.write(bytes(cfg.ngram_orders))
        fh.write(_TAIL.pack(cfg.context_radius, cfg.history, cfg.salt, len(nonzero)))
        for fid in nonzero:
            fh.write(_PAIR.pack(int(fid), float(model.weights[fid])))


def load_model(path: Union[str, Path]) -> FeatureModel:
    """Read a model file written by save_model; validates magic and version."""
    blob = Path(path).read_bytes()
    if len(blob) < _HEADER.size:
        raise ValueError(f"{path}: truncated model file")
    magic, version, hash_dims, n_orders = _HEADER.unpack_from(blob, 0)
    if magic != _MAGIC:
        raise ValueError(f"{path}: not a model file (bad magic {magic!r})")
    if version != _VERSION:
        raise ValueError(f"{path}: unsupported model version {version}")
    off = _HEADER.size
    orders = tuple(blob[off:off + n_orders])
    off += n_orders
    radius, history, salt, count = _TAIL.unpack_from(blob, off)
    off += _TAIL.size
    cfg = FeatureConfig(hash_dims, orders, radius, history, salt)
    weights = np.zeros(hash_dims)
    expected = off + count * _PAIR.size
    if len(blob) != expected:
        raise ValueError(f"{path}: expected {expected} bytes, found {len(blob)}")
    for _ in range(count):
        fid, w = _PAIR.unpack_from(blob, off)
        off += _PAIR.size
        if fid >= hash_dims:
            raise ValueError(f"{path}: feature id {fid} out of range")
        weights[fid] = w
    return FeatureModel(cfg, weights)
