"""The all-segmentations acceptor and constrained search over it.

For a window of tokens ``x_0 .. x_{w-1}`` the acceptor recognizes exactly
the delimiter-insertions of the window: at every token position the path
either consumes the token directly or takes a detour that consumes the
delimiter and then the token.  The shape is a sawtooth: one main state per
position plus one detour state per permitted delimiter slot.  Any search
procedure restricted to its arcs therefore emits well-formed output by
construction.

Searches are generic over an autoregressive symbol scorer, so the same
machinery serves greedy decoding, beam search with ranked n-best output,
and exact search by depth-first branch and bound (which requires a locally
normalized scorer so that prefix scores upper-bound completions).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterator, Protocol, Sequence, runtime_checkable

from .core import DEFAULT_DELIMITER, Malformed, SegmentationLabels, decode_delimited


@dataclass(frozen=True)
class SegAutomaton:
    """Deterministic acceptor of all segmentations of one token window."""

    tokens: tuple[str, ...]
    delimiter: str
    start: int
    final: int
    arcs: tuple[dict[str, int], ...]  # arcs[state][symbol] -> next state
    positions: tuple[int, ...]        # tokens consumed on entry to each state

    @property
    def num_states(self) -> int:
        return len(self.arcs)

    def allowed_symbols(self, state: int) -> frozenset[str]:
        """Arc labels leaving ``state``; empty only at the final state."""
        if not 0 <= state < len(self.arcs):
            raise ValueError(f"unknown state {state}")
        return frozenset(self.arcs[state])

    def step(self, state: int, symbol: str) -> int:
        nxt = self.arcs[state].get(symbol)
        if nxt is None:
            raise ValueError(f"no arc labeled {symbol!r} from state {state}")
        return nxt

    def enumerate_strings(self) -> Iterator[tuple[str, ...]]:
        """All accepted symbol strings, in depth-first token-before-delimiter order."""
        stack: list[tuple[int, tuple[str, ...]]] = [(self.start, ())]
        while stack:
            state, emitted = stack.pop()
            if state == self.final:
                yield emitted
                continue
            for sym in sorted(self.arcs[state], key=lambda s: s == self.delimiter, reverse=True):
                stack.append((self.arcs[state][sym], emitted + (sym,)))

    def to_arc_format(self) -> str:
        """Text arc table for external FST tooling: ``src dst input output`` lines
        plus one line naming each final state."""
        lines = []
        for state in range(len(self.arcs)):
            for sym, nxt in sorted(self.arcs[state].items()):
                lines.append(f"{state} {nxt} {sym} {sym}")
        lines.append(str(self.final))
        return "\n".join(lines) + "\n"


def build_automaton(
    window_tokens: Sequence[str],
    delimiter: str = DEFAULT_DELIMITER,
    allow_initial_delimiter: bool = False,
) -> SegAutomaton:
    """Build the sawtooth acceptor for one window.

    By default the delimiter slot before token 0 is suppressed (the global
    convention: a segment always opens there), giving 2^(w-1) accepted
    strings; with ``allow_initial_delimiter`` the language doubles.  An
    empty window yields the single-state acceptor of the empty string.
    """
    tokens = tuple(window_tokens)
    for tok in tokens:
        if tok == delimiter or delimiter in tok:
            raise ValueError(f"token collides with the delimiter: {tok!r}")
    w = len(tokens)
    arcs: list[dict[str, int]] = [{} for _ in range(w + 1)]
    positions: list[int] = list(range(w + 1))
    for i in range(w):
        arcs[i][tokens[i]] = i + 1
        if i > 0 or allow_initial_delimiter:
            detour = len(arcs)
            arcs.append({tokens[i]: i + 1})
            positions.append(i)
            arcs[i][delimiter] = detour
    return SegAutomaton(
        tokens=tokens,
        delimiter=delimiter,
        start=0,
        final=w,
        arcs=tuple(arcs),
        positions=tuple(positions),
    )


@dataclass(frozen=True)
class SearchStrategy:
    """Decoding strategy: greedy, beam with a width, or exact."""

    kind: str
    beam_width: int = 1

    def __post_init__(self) -> None:
        if self.kind not in ("greedy", "beam", "exact"):
            raise ValueError(f"unknown search strategy {self.kind!r}")
        if self.beam_width < 1:
            raise ValueError("beam width must be >= 1")


GREEDY = SearchStrategy("greedy")
EXACT = SearchStrategy("exact")


def beam(width: int = 4) -> SearchStrategy:
    return SearchStrategy("beam", width)


def parse_strategy(name: str) -> SearchStrategy:
    """Parse ``greedy``, ``exact``, ``beam`` or ``beam:K``."""
    name = name.strip().lower()
    if name == "greedy":
        return GREEDY
    if name == "exact":
        return EXACT
    if name == "beam":
        return beam()
    if name.startswith("beam:"):
        width = name.split(":", 1)[1]
        if not width.isdigit():
            raise ValueError(f"beam width must be an integer, got {width!r}")
        return beam(int(width))
    raise ValueError(f"unknown search strategy {name!r}")


@dataclass(frozen=True)
class Hypothesis:
    """A scored path prefix through the automaton.

    ``decisions`` records the segmentation decision per consumed token
    (position 0 is always 1: its delimiter is implied even when
    suppressed); ``pending`` is set between a delimiter and the token
    that completes it.
    """

    state: int
    emitted: tuple[str, ...]
    score: float
    decisions: tuple[int, ...] = ()
    pending: bool = False

    @property
    def position(self) -> int:
        """Number of tokens consumed so far."""
        return len(self.decisions)

    def sort_key(self) -> tuple[float, tuple[int, ...]]:
        # Higher score first; ties prefer fewer/later delimiters (lex order
        # with no-delimiter = 0), which favors longer segments.
        return (-self.score, self.decisions + ((1,) if self.pending else ()))


@runtime_checkable
class SymbolScorer(Protocol):
    """Autoregressive log-scorer over output symbols.

    ``locally_normalized`` declares that, at every expansion point, the
    scores of the allowed next symbols are log-probabilities summing to
    one (hence each is <= 0).  Exact search relies on this to bound
    completions by prefix scores.
    """

    locally_normalized: bool

    def score_symbol(self, hypothesis: Hypothesis, symbol: str) -> float:
        ...


@dataclass
class ConstantScorer:
    """Assigns the same log-score to every symbol; useful as a tie-break probe."""

    value: float = math.log(0.5)
    locally_normalized: bool = False

    def score_symbol(self, hypothesis: Hypothesis, symbol: str) -> float:
        return self.value


@dataclass
class FunctionScorer:
    """Wraps a plain ``fn(emitted_prefix, symbol) -> log-score`` callable."""

    fn: Callable[[tuple[str, ...], str], float]
    locally_normalized: bool = False

    def score_symbol(self, hypothesis: Hypothesis, symbol: str) -> float:
        return self.fn(hypothesis.emitted, symbol)


def _extend(a: SegAutomaton, hyp: Hypothesis, symbol: str, step_score: float) -> Hypothesis:
    nxt = a.arcs[hyp.state][symbol]
    if symbol == a.delimiter:
        return Hypothesis(nxt, hyp.emitted + (symbol,), hyp.score + step_score, hyp.decisions, True)
    # Position 0 always opens a segment even though its delimiter is
    # suppressed; recording it as 1 keeps scorer decision histories
    # consistent with document-level labelings.
    dec = 1 if (hyp.pending or not hyp.decisions) else 0
    return Hypothesis(
        nxt, hyp.emitted + (symbol,), hyp.score + step_score, hyp.decisions + (dec,), False
    )


def _arc_order(a: SegAutomaton, state: int) -> list[str]:
    # Token arc before delimiter arc: stable expansion order matching the
    # tie-break preference for no delimiter.
    syms = list(a.arcs[state])
    syms.sort(key=lambda s: s == a.delimiter)
    return syms


def _decode(a: SegAutomaton, hyp: Hypothesis) -> SegmentationLabels:
    result = decode_delimited(hyp.emitted, a.tokens, a.delimiter)
    if isinstance(result, Malformed):  # pragma: no cover - structurally impossible
        raise RuntimeError(f"search emitted a malformed string: {result}")
    return result


def _greedy_hypothesis(a: SegAutomaton, scorer: SymbolScorer) -> Hypothesis:
    hyp = Hypothesis(a.start, (), 0.0)
    while hyp.state != a.final:
        best_sym = None
        best_score = -math.inf
        for sym in _arc_order(a, hyp.state):
            s = scorer.score_symbol(hyp, sym)
            if s > best_score:
                best_sym, best_score = sym, s
        assert best_sym is not None
        hyp = _extend(a, hyp, best_sym, best_score)
    return hyp


def _search_greedy(a: SegAutomaton, scorer: SymbolScorer) -> list[tuple[SegmentationLabels, float]]:
    hyp = _greedy_hypothesis(a, scorer)
    return [(_decode(a, hyp), hyp.score)]


def _search_beam(
    a: SegAutomaton, scorer: SymbolScorer, width: int
) -> list[tuple[SegmentationLabels, float]]:
    active = [Hypothesis(a.start, (), 0.0)]
    finished: list[Hypothesis] = []
    if a.start == a.final:
        return [(_decode(a, active[0]), 0.0)]
    while active:
        candidates: list[Hypothesis] = []
        for hyp in active:
            for sym in _arc_order(a, hyp.state):
                candidates.append(_extend(a, hyp, sym, scorer.score_symbol(hyp, sym)))
        finished.extend(c for c in candidates if c.state == a.final)
        finished.sort(key=Hypothesis.sort_key)
        del finished[width:]
        active = sorted((c for c in candidates if c.state != a.final), key=Hypothesis.sort_key)
        del active[width:]
    # Pool the greedy path so a wider beam is never worse than greedy even
    # under adversarial scorers, then dedup label-equivalent paths.
    pooled = sorted(finished + [_greedy_hypothesis(a, scorer)], key=Hypothesis.sort_key)
    out: list[tuple[SegmentationLabels, float]] = []
    seen: set[SegmentationLabels] = set()
    for h in pooled:
        labels = _decode(a, h)
        if labels in seen:
            continue
        seen.add(labels)
        out.append((labels, h.score))
        if len(out) == width:
            break
    return out


def _search_exact(a: SegAutomaton, scorer: SymbolScorer) -> list[tuple[SegmentationLabels, float]]:
    if not getattr(scorer, "locally_normalized", False):
        raise ValueError("exact search requires a locally normalized scorer")
    best: Hypothesis | None = None
    # Depth-first branch and bound; token arcs are pushed last so they are
    # explored first, making the first completion the all-continue path and
    # keeping ties resolved toward fewer delimiters.
    stack: list[Hypothesis] = [Hypothesis(a.start, (), 0.0)]
    while stack:
        hyp = stack.pop()
        if best is not None and hyp.score <= best.score:
            continue
        if hyp.state == a.final:
            best = hyp
            continue
        for sym in reversed(_arc_order(a, hyp.state)):
            step = scorer.score_symbol(hyp, sym)
            if step > 1e-9:
                raise ValueError(
                    f"scorer claims local normalization but returned a positive "
                    f"log-score {step} for {sym!r}"
                )
            nxt = _extend(a, hyp, sym, min(step, 0.0))
            if best is None or nxt.score > best.score:
                stack.append(nxt)
    assert best is not None
    return [(_decode(a, best), best.score)]


def constrained_search(
    a: SegAutomaton, scorer: SymbolScorer, strategy: SearchStrategy
) -> list[tuple[SegmentationLabels, float]]:
    """Search the automaton language, returning ranked (labels, score) pairs.

    Greedy and exact return a single hypothesis; beam returns up to its
    width, best first.  Every result is well-formed by construction since
    only automaton arcs are followed.
    """
    if strategy.kind == "greedy":
        return _search_greedy(a, scorer)
    if strategy.kind == "beam":
        return _search_beam(a, scorer, strategy.beam_width)
    return _search_exact(a, scorer)
