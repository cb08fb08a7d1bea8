"""Core transcript types and the delimiter-insertion encoding.

A transcript is a flat sequence of word tokens.  A segmentation assigns one
of two decisions to every token: SPLIT opens a new segment at that token,
CONTINUE extends the current one.  The generative encoding of a segmentation
is the token stream with a reserved delimiter symbol in front of every SPLIT
token.  The delimiter in front of token 0 carries no information (a segment
always begins there) and is suppressed when rendering.

All types here are immutable values; the operations are pure functions.
"""

from __future__ import annotations

import string
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Iterator, Sequence, Union

DEFAULT_DELIMITER = "■"  # black square

# Characters removed by the optional normalization pass.
_PUNCT_CHARS = string.punctuation + "“”‘’«»…—–‐¿¡·" + DEFAULT_DELIMITER
_PUNCT_TABLE = str.maketrans("", "", _PUNCT_CHARS)


class Decision(Enum):
    """Per-token segmentation decision."""

    SPLIT = "SPLIT"
    CONTINUE = "CONTINUE"


SPLIT = Decision.SPLIT
CONTINUE = Decision.CONTINUE


def _check_token(token: str, delimiter: str = DEFAULT_DELIMITER) -> None:
    if not token:
        raise ValueError("tokens must be non-empty")
    if any(ch.isspace() for ch in token):
        raise ValueError(f"token contains whitespace: {token!r}")
    if delimiter in token:
        raise ValueError(f"token contains the delimiter symbol: {token!r}")


@dataclass(frozen=True)
class Transcript:
    """An ordered sequence of word tokens with an opaque source identifier."""

    tokens: tuple[str, ...]
    source_id: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "tokens", tuple(self.tokens))
        for tok in self.tokens:
            _check_token(tok)

    def __len__(self) -> int:
        return len(self.tokens)

    def __iter__(self) -> Iterator[str]:
        return iter(self.tokens)

    @classmethod
    def from_text(cls, text: str, source_id: str = "") -> "Transcript":
        """Tokenize ``text`` on whitespace."""
        return cls(tuple(text.split()), source_id)

    def text(self) -> str:
        return " ".join(self.tokens)


@dataclass(frozen=True)
class SegmentationLabels:
    """One decision per token of an associated transcript.

    By convention a document-level labeling has SPLIT at position 0 (a
    segment always begins at the first token).  Window-local labelings
    produced mid-pipeline may legitimately carry CONTINUE at their local
    position 0; the convention is enforced where document labelings are
    assembled (stitching, decoding, projection, file loading).
    """

    decisions: tuple[Decision, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "decisions", tuple(self.decisions))
        for d in self.decisions:
            if not isinstance(d, Decision):
                raise TypeError(f"not a Decision: {d!r}")

    def __len__(self) -> int:
        return len(self.decisions)

    def __iter__(self) -> Iterator[Decision]:
        return iter(self.decisions)

    def __getitem__(self, i: int) -> Decision:
        return self.decisions[i]

    def split_positions(self) -> tuple[int, ...]:
        return tuple(i for i, d in enumerate(self.decisions) if d is SPLIT)

    @classmethod
    def from_split_positions(cls, n: int, positions: Iterable[int]) -> "SegmentationLabels":
        """Build a document labeling of length ``n`` with SPLIT at ``positions``.

        Position 0 is implied and always set for non-empty labelings.
        """
        wanted = set(positions)
        for p in wanted:
            if not 0 <= p < n:
                raise ValueError(f"split position {p} out of range for length {n}")
        if n > 0:
            wanted.add(0)
        return cls(tuple(SPLIT if i in wanted else CONTINUE for i in range(n)))


@dataclass(frozen=True)
class DelimitedText:
    """A token stream where each token optionally carries a preceding delimiter."""

    items: tuple[tuple[bool, str], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "items", tuple((bool(d), t) for d, t in self.items))
        for _, tok in self.items:
            _check_token(tok)

    def __len__(self) -> int:
        return len(self.items)

    def tokens(self) -> tuple[str, ...]:
        return tuple(tok for _, tok in self.items)

    def render(self, delimiter: str = DEFAULT_DELIMITER, include_initial: bool = False) -> str:
        """Render to a whitespace-joined string.

        The delimiter before the first token is suppressed unless
        ``include_initial`` is set.
        """
        out: list[str] = []
        for i, (has_delim, tok) in enumerate(self.items):
            if has_delim and (i > 0 or include_initial):
                out.append(delimiter)
            out.append(tok)
        return " ".join(out)

    def symbols(self, delimiter: str = DEFAULT_DELIMITER, include_initial: bool = False) -> tuple[str, ...]:
        """The rendered token/delimiter sequence as individual symbols."""
        return tuple(self.render(delimiter, include_initial).split())


@dataclass(frozen=True)
class Segment:
    """Half-open token span [start, end)."""

    start: int
    end: int

    def __post_init__(self) -> None:
        if not 0 <= self.start < self.end:
            raise ValueError(f"invalid segment [{self.start}, {self.end})")

    def __len__(self) -> int:
        return self.end - self.start


@dataclass(frozen=True)
class Malformed:
    """Decode failure: the candidate does not reproduce the reference tokens.

    ``position`` is the index (in the delimiter-free token stream) of the
    first violation.
    """

    position: int
    reason: str


def encode_delimited(transcript: Transcript, labels: SegmentationLabels) -> DelimitedText:
    """Encode a labeling as the transcript tokens with inserted delimiters."""
    if len(labels) != len(transcript):
        raise ValueError(
            f"labels length {len(labels)} != transcript length {len(transcript)}"
        )
    return DelimitedText(
        tuple((labels[i] is SPLIT, tok) for i, tok in enumerate(transcript.tokens))
    )


def decode_delimited(
    candidate: Union[str, Sequence[str]],
    reference: Union[Transcript, Sequence[str]],
    delimiter: str = DEFAULT_DELIMITER,
) -> Union[SegmentationLabels, Malformed]:
    """Strictly decode a delimited candidate against the reference tokens.

    The candidate is well-formed iff, after removing delimiters, its token
    sequence equals the reference exactly, no two delimiters are adjacent,
    and no delimiter trails the last token.  Returns the decoded labels
    (position 0 coerced to SPLIT), or ``Malformed`` locating the first
    violation.
    """
    symbols = candidate.split() if isinstance(candidate, str) else list(candidate)
    ref = reference.tokens if isinstance(reference, Transcript) else tuple(reference)
    decisions: list[Decision] = []
    pending = False
    t = 0
    for sym in symbols:
        if sym == delimiter:
            if pending:
                return Malformed(t, "adjacent delimiters")
            pending = True
            continue
        if t >= len(ref):
            return Malformed(t, f"extra token {sym!r} beyond reference")
        if sym != ref[t]:
            return Malformed(t, f"token mismatch: {sym!r} != {ref[t]!r}")
        decisions.append(SPLIT if (pending or t == 0) else CONTINUE)
        pending = False
        t += 1
    if pending:
        return Malformed(t, "trailing delimiter")
    if t != len(ref):
        return Malformed(t, f"candidate ends before reference token {ref[t]!r}")
    return SegmentationLabels(tuple(decisions))


def parse_delimited_lenient(
    candidate: Union[str, Sequence[str]], delimiter: str = DEFAULT_DELIMITER
) -> DelimitedText:
    """Parse arbitrary generated text into a delimited token stream.

    Never fails: runs of adjacent delimiters collapse to one, trailing
    delimiters are dropped, and any token is accepted as-is.  Tokens that
    would be invalid (contain whitespace after splitting: impossible) are
    kept verbatim.
    """
    symbols = candidate.split() if isinstance(candidate, str) else list(candidate)
    items: list[tuple[bool, str]] = []
    pending = False
    for sym in symbols:
        if sym == delimiter:
            pending = True
            continue
        items.append((pending, sym))
        pending = False
    return DelimitedText(tuple(items))


def labels_to_segments(labels: SegmentationLabels) -> list[Segment]:
    """Expand a document labeling into the segments it induces.

    Requires the document convention: SPLIT at position 0 for non-empty
    labelings, so the segments partition [0, n).
    """
    n = len(labels)
    if n == 0:
        return []
    if labels[0] is not SPLIT:
        raise ValueError("document labeling must have SPLIT at position 0")
    starts = list(labels.split_positions())
    bounds = starts + [n]
    return [Segment(bounds[i], bounds[i + 1]) for i in range(len(starts))]


def segments_to_labels(segments: Sequence[Segment], n: int) -> SegmentationLabels:
    """Inverse of :func:`labels_to_segments`; segments must partition [0, n)."""
    ordered = sorted(segments, key=lambda s: s.start)
    cursor = 0
    for seg in ordered:
        if seg.start != cursor:
            raise ValueError(f"segments do not partition [0, {n}): gap/overlap at {seg.start}")
        cursor = seg.end
    if cursor != n:
        raise ValueError(f"segments cover [0, {cursor}) but n = {n}")
    return SegmentationLabels.from_split_positions(n, (s.start for s in ordered))


def normalize_token(token: str) -> str:
    """Lowercase and strip punctuation characters; may return an empty string."""
    return token.lower().translate(_PUNCT_TABLE)


def normalize_text(text: str) -> list[str]:
    """Lowercase, strip punctuation, and drop tokens that become empty."""
    out = []
    for raw in text.split():
        tok = normalize_token(raw)
        if tok:
            out.append(tok)
    return out
