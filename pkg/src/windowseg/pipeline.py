"""End-to-end document segmentation: plan windows, run a segmenter, stitch.

Windows are independent, so they run on a bounded thread pool; results
are stitched in plan order regardless of completion order, keeping output
deterministic for any worker count.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Optional, Sequence, Union

from concurrent.futures import ThreadPoolExecutor

from .align import project_boundaries
from .automaton import parse_strategy
from .config import PipelineConfig
from .core import (
    DEFAULT_DELIMITER,
    SPLIT,
    SegmentationLabels,
    Transcript,
    encode_delimited,
)
from .segmenters import (
    AutoregressiveSegmenter,
    EndpointConfig,
    ExternalSegmenter,
    FixedLengthSegmenter,
    WindowInfo,
    WindowSegmenter,
    load_model,
)
from .windowing import WindowConfig, plan_windows, stitch


@dataclass(frozen=True)
class RenderProjectSegmenter:
    """Round-trips another segmenter's labels through the text channel.

    The inner labeling is rendered as delimited text (initial delimiter
    suppressed, as on the wire) and recovered by Levenshtein projection,
    exercising the projection path end to end.  On a segmenter that emits
    well-formed text this is the identity.
    """

    inner: WindowSegmenter
    delimiter: str = DEFAULT_DELIMITER

    def segment(
        self, window: Sequence[str], info: WindowInfo = WindowInfo()
    ) -> SegmentationLabels:
        window = tuple(window)
        if not window:
            return SegmentationLabels(())
        labels = self.inner.segment(window, info)
        rendered = encode_delimited(Transcript(window), labels).render(self.delimiter)
        projected = list(project_boundaries(window, rendered, self.delimiter))
        projected[0] = SPLIT
        return SegmentationLabels(tuple(projected))


def build_segmenter(cfg: PipelineConfig) -> WindowSegmenter:
    """Construct the configured window segmenter; validate() the config first."""
    if cfg.segmenter == "fixed":
        return FixedLengthSegmenter(cfg.segment_len)
    if cfg.segmenter == "autoregressive":
        seg = AutoregressiveSegmenter(
            load_model(cfg.model_path), parse_strategy(cfg.strategy)
        )
        if cfg.constraint == "LEVENSHTEIN":
            return RenderProjectSegmenter(seg)
        return seg
    if cfg.segmenter == "external":
        fallback: Optional[WindowSegmenter] = None
        if cfg.endpoint_fallback == "fixed":
            fallback = FixedLengthSegmenter(cfg.segment_len)
        endpoint = EndpointConfig(
            url=cfg.endpoint_url or "",
            timeout=cfg.endpoint_timeout,
            max_retries=cfg.endpoint_retries,
            backoff=cfg.endpoint_backoff,
            concurrency=cfg.endpoint_concurrency,
        )
        return ExternalSegmenter(endpoint, fallback)
    if cfg.segmenter == "replay":
        raise ValueError(
            "replay segmenters are per document; construct ReplaySegmenter directly"
        )
    raise ValueError(f"unknown segmenter {cfg.segmenter!r}")


def segment_tokens(
    tokens: Sequence[str],
    segmenter: WindowSegmenter,
    window: WindowConfig = WindowConfig(),
    workers: int = 0,
) -> SegmentationLabels:
    """Window, segment, and stitch one document's tokens."""
    tokens = tuple(tokens)
    if not tokens:
        return SegmentationLabels(())
    windows = plan_windows(len(tokens), window)

    def run(win) -> SegmentationLabels:
        info = WindowInfo(
            global_start=win.start,
            left_context=win.adopt_start - win.start,
            right_context=win.end - win.adopt_end,
        )
        return segmenter.segment(win.slice(tokens), info)

    count = min(len(windows), workers or os.cpu_count() or 1)
    if count <= 1 or len(windows) == 1:
        results = [run(w) for w in windows]
    else:
        with ThreadPoolExecutor(max_workers=count) as pool:
            results = list(pool.map(run, windows))
    return stitch(windows, results)


def segment_transcript(
    transcript: Transcript,
    segmenter: WindowSegmenter,
    window: WindowConfig = WindowConfig(),
    workers: int = 0,
) -> SegmentationLabels:
    return segment_tokens(transcript.tokens, segmenter, window, workers)


def render_segments(
    tokens: Sequence[str], labels: Union[SegmentationLabels, Sequence[object]]
) -> list[str]:
    """One line of space-joined tokens per segment."""
    decisions = list(labels)
    if len(decisions) != len(tokens):
        raise ValueError(f"labels length {len(decisions)} != token count {len(tokens)}")
    lines: list[str] = []
    for i, tok in enumerate(tokens):
        if i == 0 or decisions[i] is SPLIT:
            lines.append(tok)
        else:
            lines[-1] += " " + tok
    return lines
