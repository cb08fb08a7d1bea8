"""Levenshtein alignment and boundary projection.

When a generative segmenter paraphrases instead of copying, its delimiters
no longer decode directly against the source window.  Aligning the
generated tokens to the reference under unit edit costs lets every
delimiter be carried over to the reference position of the token it
precedes, so boundary annotations survive imperfect copies.  The same
projection moves punctuation-derived boundaries from reference transcripts
onto ASR output.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .core import (
    CONTINUE,
    DEFAULT_DELIMITER,
    SPLIT,
    Decision,
    DelimitedText,
    SegmentationLabels,
    Transcript,
    parse_delimited_lenient,
)
from .rules import RulePunctuation

MATCH = "match"
SUBST = "subst"
INSERT = "insert"
DELETE = "delete"


@dataclass(frozen=True)
class Link:
    """One edit operation: ``ref`` and/or ``gen`` give the aligned indices.

    MATCH and SUBST carry both indices, DELETE only ``ref`` (a reference
    token with no generated counterpart), INSERT only ``gen``.
    """

    op: str
    ref: Optional[int]
    gen: Optional[int]

    def __post_init__(self) -> None:
        if self.op not in (MATCH, SUBST, INSERT, DELETE):
            raise ValueError(f"unknown op {self.op!r}")
        if (self.ref is None) != (self.op == INSERT):
            raise ValueError(f"{self.op} link must carry ref={'None' if self.op == INSERT else 'an index'}")
        if (self.gen is None) != (self.op == DELETE):
            raise ValueError(f"{self.op} link must carry gen={'None' if self.op == DELETE else 'an index'}")


@dataclass(frozen=True)
class Alignment:
    """A monotone alignment between a reference and a generated sequence."""

    links: tuple[Link, ...]
    total_cost: int

    def __post_init__(self) -> None:
        refs = [l.ref for l in self.links if l.ref is not None]
        gens = [l.gen for l in self.links if l.gen is not None]
        if refs != list(range(len(refs))) or gens != list(range(len(gens))):
            raise ValueError("links must cover each side exactly once, in order")
        if self.total_cost != sum(1 for l in self.links if l.op != MATCH):
            raise ValueError("total_cost must equal the number of non-MATCH links")

    @property
    def ref_len(self) -> int:
        return sum(1 for l in self.links if l.ref is not None)

    @property
    def gen_len(self) -> int:
        return sum(1 for l in self.links if l.gen is not None)

    def ref_index_of_gen(self) -> list[Optional[int]]:
        """For each generated position, the aligned reference index (None for INSERT)."""
        out: list[Optional[int]] = [None] * self.gen_len
        for link in self.links:
            if link.gen is not None and link.ref is not None:
                out[link.gen] = link.ref
        return out


def _tokens(side: Union[Transcript, Sequence[str]]) -> tuple[str, ...]:
    return side.tokens if isinstance(side, Transcript) else tuple(side)


def levenshtein_align(
    reference: Union[Transcript, Sequence[str]],
    generated: Union[Transcript, Sequence[str]],
) -> Alignment:
    """Optimal monotone alignment under unit costs.

    Ties are broken per cell preferring MATCH, then SUBST, then DELETE,
    then INSERT, which keeps delimiters anchored to lexical matches and
    makes the output deterministic.  Either side may be empty.
    """
    ref = _tokens(reference)
    gen = _tokens(generated)
    m, n = len(ref), len(gen)
    ids: dict[str, int] = {}
    ref_ids = np.fromiter((ids.setdefault(t, len(ids)) for t in ref), dtype=np.int64, count=m)
    gen_ids = np.fromiter((ids.setdefault(t, len(ids)) for t in gen), dtype=np.int64, count=n)

    # Row-by-row DP; the in-row left-to-right dependency D[i][j-1]+1 is a
    # running minimum of (candidate[k] - k) + j, which vectorizes.
    dist = np.empty((m + 1, n + 1), dtype=np.int32)
    cols = np.arange(n + 1, dtype=np.int32)
    dist[0] = cols
    for i in range(1, m + 1):
        cand = np.empty(n + 1, dtype=np.int32)
        cand[0] = i
        sub = (gen_ids != ref_ids[i - 1]).astype(np.int32)
        cand[1:] = np.minimum(dist[i - 1, :-1] + sub, dist[i - 1, 1:] + 1)
        dist[i] = np.minimum.accumulate(cand - cols) + cols

    links: list[Link] = []
    i, j = m, n
    while i > 0 or j > 0:
        here = dist[i, j]
        if i > 0 and j > 0 and ref[i - 1] == gen[j - 1] and dist[i - 1, j - 1] == here:
            links.append(Link(MATCH, i - 1, j - 1))
            i, j = i - 1, j - 1
        elif i > 0 and j > 0 and ref[i - 1] != gen[j - 1] and dist[i - 1, j - 1] + 1 == here:
            links.append(Link(SUBST, i - 1, j - 1))
            i, j = i - 1, j - 1
        elif i > 0 and dist[i - 1, j] + 1 == here:
            links.append(Link(DELETE, i - 1, None))
            i -= 1
        else:
            links.append(Link(INSERT, None, j - 1))
            j -= 1
    links.reverse()
    return Alignment(tuple(links), int(dist[m, n]))


def project_boundaries(
    reference: Union[Transcript, Sequence[str]],
    generated: Union[DelimitedText, str, Sequence[str]],
    delimiter: str = DEFAULT_DELIMITER,
) -> SegmentationLabels:
    """Carry the delimiters of ``generated`` onto the reference tokens.

    Each delimiter belongs to the generated token after it; that token's
    aligned reference position becomes a SPLIT.  A delimiter in front of
    an inserted (unaligned) token falls forward to the next aligned one
    and is dropped when none follows.  Total on any input: the result is
    always a labeling of the reference window.
    """
    ref = _tokens(reference)
    if not isinstance(generated, DelimitedText):
        generated = parse_delimited_lenient(generated, delimiter)
    if not ref:
        return SegmentationLabels(())
    gen_tokens = generated.tokens()
    alignment = levenshtein_align(ref, gen_tokens)
    ref_of_gen = alignment.ref_index_of_gen()

    # next_aligned[j]: first aligned reference index at generated position >= j.
    next_aligned: list[Optional[int]] = [None] * (len(gen_tokens) + 1)
    for j in range(len(gen_tokens) - 1, -1, -1):
        next_aligned[j] = ref_of_gen[j] if ref_of_gen[j] is not None else next_aligned[j + 1]

    decisions: list[Decision] = [CONTINUE] * len(ref)
    for j, (has_delim, _) in enumerate(generated.items):
        if not has_delim:
            continue
        target = next_aligned[j]
        if target is not None:
            decisions[target] = SPLIT
    return SegmentationLabels(tuple(decisions))


def project_oracle(
    reference_punctuated: str,
    asr: Union[Transcript, Sequence[str]],
    rule: Optional[RulePunctuation] = None,
) -> SegmentationLabels:
    """Project punctuation-derived boundaries from a reference onto ASR tokens.

    The reference text is normalized and labeled by the punctuation rules,
    then each boundary moves across the token alignment onto the ASR side.
    Position 0 always opens a segment.  An empty ASR yields empty labels.
    """
    asr_tokens = _tokens(asr)
    if not asr_tokens:
        return SegmentationLabels(())
    transcript, labels = (rule or RulePunctuation()).derive_labels(reference_punctuated)
    flagged = DelimitedText(
        tuple((labels[i] is SPLIT, tok) for i, tok in enumerate(transcript.tokens))
    )
    projected = list(project_boundaries(asr_tokens, flagged).decisions)
    projected[0] = SPLIT
    return SegmentationLabels(tuple(projected))
