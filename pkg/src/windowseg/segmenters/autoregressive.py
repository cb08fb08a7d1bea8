"""Constrained decoding and reranking on top of the feature model.

The feature model supplies locally normalized per-token conditionals; the
automaton supplies the legal next symbols.  Mapping decisions onto arcs
(SPLIT to the delimiter arc, CONTINUE to the plain token arc, completion
and position-0 arcs free) makes every path score equal the model's
log-likelihood of the decoded labeling, so greedy, beam, and exact search
all optimize the same objective.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

from ..automaton import (
    GREEDY,
    Hypothesis,
    SearchStrategy,
    beam,
    build_automaton,
    constrained_search,
)
from ..core import DEFAULT_DELIMITER, SPLIT, SegmentationLabels
from .base import NBestList, WindowInfo
from .features import FeatureModel, history_bits, history_feature, static_features


def _softplus(x: float) -> float:
    if x > 0:
        return x + math.log1p(math.exp(-x))
    return math.log1p(math.exp(x))


class CachedConditionals:
    """Per-window cache of the model's conditionals.

    Static feature sums depend only on the position; the decision history
    contributes one weight looked up by its bit pattern.  Both are cached
    so each (position, history) pair costs one dict probe after the first
    evaluation, which keeps search over many hypotheses cheap.
    """

    def __init__(self, model: FeatureModel, tokens: Sequence[str]):
        self.model = model
        self.tokens = tuple(tokens)
        cfg = model.config
        w = model.weights
        statics = []
        for t in range(len(self.tokens)):
            feats = static_features(cfg, self.tokens, t)
            statics.append(sum(w[fid] * v for fid, v in feats.items()))
        self._static = statics
        self._hist: dict[str, float] = {}
        self._probs: dict[tuple[int, str], tuple[float, float]] = {}

    def _hist_weight(self, bits: str) -> float:
        got = self._hist.get(bits)
        if got is None:
            got = float(self.model.weights[history_feature(self.model.config, bits)])
            self._hist[bits] = got
        return got

    def logprobs(self, t: int, prefix: Sequence[object]) -> tuple[float, float]:
        """(log p(CONTINUE), log p(SPLIT)) at position ``t`` given ``prefix``."""
        bits = history_bits(prefix, t, self.model.config.history)
        key = (t, bits)
        got = self._probs.get(key)
        if got is None:
            z = self._static[t] + self._hist_weight(bits)
            got = (-_softplus(z), -_softplus(-z))
            self._probs[key] = got
        return got

    def sequence_logprob(self, labels: Sequence[object]) -> float:
        decisions = list(labels)
        if len(decisions) != len(self.tokens):
            raise ValueError(
                f"labels length {len(decisions)} != window length {len(self.tokens)}"
            )
        total = 0.0
        for t in range(1, len(decisions)):
            lc, ls = self.logprobs(t, decisions[:t])
            total += ls if _is_split(decisions[t]) else lc
        return total


def _is_split(d: object) -> bool:
    return d is SPLIT or d == 1


class FeatureStepScorer:
    """Adapts a feature model to the automaton's symbol-scoring interface.

    Delimiter arcs score log p(SPLIT) at the upcoming position; plain
    token arcs score log p(CONTINUE) unless they complete a delimiter
    detour or sit at position 0, both of which are structural (probability
    one, score zero).
    """

    locally_normalized = True

    def __init__(
        self, model: FeatureModel, tokens: Sequence[str], delimiter: str = DEFAULT_DELIMITER
    ):
        self.delimiter = delimiter
        self.conditionals = CachedConditionals(model, tokens)

    def score_symbol(self, hypothesis: Hypothesis, symbol: str) -> float:
        t = hypothesis.position
        if symbol == self.delimiter:
            return self.conditionals.logprobs(t, hypothesis.decisions)[1]
        if hypothesis.pending or t == 0:
            return 0.0
        return self.conditionals.logprobs(t, hypothesis.decisions)[0]


@dataclass
class AutoregressiveSegmenter:
    """Feature-model segmenter decoding through the acceptor."""

    model: Optional[FeatureModel]
    strategy: SearchStrategy = GREEDY
    delimiter: str = DEFAULT_DELIMITER
    name: str = "autoregressive"

    def _model(self) -> FeatureModel:
        if self.model is None:
            raise ValueError("no model loaded")
        return self.model

    def scorer(self, window: Sequence[str]) -> FeatureStepScorer:
        return FeatureStepScorer(self._model(), window, self.delimiter)

    def segment(
        self, window: Sequence[str], info: WindowInfo = WindowInfo()
    ) -> SegmentationLabels:
        a = build_automaton(window, self.delimiter)
        return constrained_search(a, self.scorer(window), self.strategy)[0][0]

    def nbest(
        self, window: Sequence[str], k: int, strategy: Optional[SearchStrategy] = None
    ) -> NBestList:
        """Top-k labelings; defaults to a beam of width k.

        With one strategy fixed, lists for growing k are nested prefixes
        of the same ranking whenever the strategy's width covers them.
        """
        if k < 1:
            raise ValueError("k must be >= 1")
        strat = strategy or beam(k)
        a = build_automaton(window, self.delimiter)
        results = constrained_search(a, self.scorer(window), strat)
        return NBestList(tuple(results[:k]), self.name)


@dataclass
class FeatureModelReranker:
    """Scores complete labelings by their log-likelihood under a feature model.

    Used as the second-stage scorer over another generator's n-best list;
    caches per-window conditionals so rescoring many candidates of the
    same window stays cheap.
    """

    model: FeatureModel
    _cache: dict[tuple[str, ...], CachedConditionals] = field(
        default_factory=dict, repr=False
    )

    def _conditionals(self, window: tuple[str, ...]) -> CachedConditionals:
        got = self._cache.get(window)
        if got is None:
            if len(self._cache) >= 8:
                self._cache.pop(next(iter(self._cache)))
            got = CachedConditionals(self.model, window)
            self._cache[window] = got
        return got

    def score_sequence(self, window: Sequence[str], labels: SegmentationLabels) -> float:
        return self._conditionals(tuple(window)).sequence_logprob(labels.decisions)
