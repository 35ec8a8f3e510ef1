"""Critical-point detection on the S'(h) series by sliding-template matching.

Three two-parameter template families (rising step, peak, falling step) are
least-squares fit inside a sliding window; window centers whose fit residual
drops below one standard deviation of that template's own residual series,
and whose fitted contrast clears a relative gate, are detections. Rising
steps mark minima (index 0), peaks mark saddles (index 1), falling steps
mark maxima (index 2).

Two boundary choices matter. First, the derivative series is zero-extended
by a half window on each side before scanning: the true area rate is
identically zero outside the sampled height range, and the extension gives
the global extremes (whose kinks sit at the grid boundary) a full window of
context. Second, a template must beat the best straight-line fit of its
window by a fixed margin: a smooth monotone ramp fits a step template with
a residual-to-jump ratio that never exceeds a line fit's, so without this
gate every gently sloping stretch of S' fires spurious extremes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from . import _kernels
from .areafn import DerivSeries, HeightGrid

STEP_UP = "step_up"
CUSP = "cusp"
STEP_DOWN = "step_down"

TEMPLATE_KINDS = (STEP_UP, CUSP, STEP_DOWN)
INDEX_OF_TEMPLATE = {STEP_UP: 0, CUSP: 1, STEP_DOWN: 2}

DEFAULT_WINDOW_LEN = 9
DEFAULT_CONTRAST_FRAC = 0.05
DEFAULT_LINE_MARGIN = 0.8
DEFAULT_SHAPE_MARGIN = 0.30


@dataclass(frozen=True)
class Template:
    kind: str
    window_len: int = DEFAULT_WINDOW_LEN

    def __post_init__(self):
        if self.kind not in TEMPLATE_KINDS:
            raise ValueError(f"unknown template kind {self.kind!r}")
        if self.window_len % 2 == 0 or self.window_len < 5:
            raise ValueError("window_len must be odd and >= 5")

    @property
    def index(self) -> int:
        return INDEX_OF_TEMPLATE[self.kind]


@dataclass(frozen=True)
class ResidualSeries:
    grid: HeightGrid
    kind: str
    residuals: np.ndarray  # RMS fit residual per grid node (window center)
    contrast: np.ndarray  # fitted step jump / peak prominence per node
    threshold: float  # one standard deviation of the residual sequence


@dataclass(frozen=True)
class CriticalPoint:
    height: float
    index: int
    template: str
    residual: float


@dataclass(frozen=True)
class CriticalSet:
    points: Tuple[CriticalPoint, ...]

    @property
    def counts(self) -> Tuple[int, int, int]:
        idx = [p.index for p in self.points]
        return (idx.count(0), idx.count(1), idx.count(2))

    @property
    def degenerate(self) -> bool:
        """A compact surface needs at least one minimum and one maximum."""
        n_min, _, n_max = self.counts
        return n_min == 0 or n_max == 0

    def heights(self) -> np.ndarray:
        return np.array([p.height for p in self.points])


def make_templates(window_len: int = DEFAULT_WINDOW_LEN) -> Tuple[Template, ...]:
    """The rising-step, peak, falling-step family triple."""
    return tuple(Template(kind, window_len) for kind in TEMPLATE_KINDS)


def _scan_padded(d: np.ndarray, window_len: int):
    """Template scan over the zero-extended series; outputs align to nodes."""
    if len(d) < window_len:
        raise ValueError(
            f"derivative series of length {len(d)} shorter than window {window_len}"
        )
    half = window_len // 2
    padded = np.concatenate([np.zeros(half), d, np.zeros(half)])
    (
        res_up,
        con_up,
        res_pk,
        con_pk,
        res_dn,
        con_dn,
        line_gap,
        line_full,
    ) = _kernels.template_scan(padded, window_len)
    return {
        STEP_UP: (res_up, con_up, line_gap),
        CUSP: (res_pk, con_pk, line_full),
        STEP_DOWN: (res_dn, con_dn, line_gap),
    }


def residual_series(deriv: DerivSeries, template: Template) -> ResidualSeries:
    res, con, _ = _scan_padded(deriv.d, template.window_len)[template.kind]
    return ResidualSeries(deriv.grid, template.kind, res, con, float(np.std(res)))


def _collapse_runs(mask: np.ndarray, res: np.ndarray) -> list:
    """Reduce each contiguous True run to its minimal-residual center."""
    centers = []
    j = 0
    n = len(mask)
    while j < n:
        if mask[j]:
            k = j
            while k + 1 < n and mask[k + 1]:
                k += 1
            centers.append(j + int(np.argmin(res[j : k + 1])))
            j = k + 1
        else:
            j += 1
    return centers


def _enforce_separation(centers: list, res: np.ndarray, min_sep: int) -> list:
    """Greedily keep best-residual centers at pairwise distance >= min_sep."""
    order = sorted(centers, key=lambda c: res[c])
    kept: list = []
    for c in order:
        if all(abs(c - k) >= min_sep for k in kept):
            kept.append(c)
    return sorted(kept)


def _step_center_between(padded, c, window_len, margin=0.3):
    """The three central nodes of a step window must lie between the two
    fitted levels (within margin * jump): a genuine kink transitions
    monotonically, while a window whose sides straddle a hidden dip or
    bump does not."""
    half = window_len // 2
    side = half - 1
    win = padded[c : c + window_len]
    la = win[:side].mean()
    rb = win[window_len - side :].mean()
    tol = margin * abs(rb - la)
    mid = win[half - 1 : half + 2]
    return (mid.min() >= min(la, rb) - tol) and (mid.max() <= max(la, rb) + tol)


def detect_critical_points(
    deriv: DerivSeries,
    templates: Optional[Sequence[Template]] = None,
    contrast_frac: float = DEFAULT_CONTRAST_FRAC,
    line_margin: float = DEFAULT_LINE_MARGIN,
    shape_margin: float = DEFAULT_SHAPE_MARGIN,
) -> CriticalSet:
    """Detect and classify critical heights from the S' series.

    Per template, a window center is a candidate when its residual is
    below threshold, its slope-adjusted contrast clears the relative gate,
    and the template beats the straight-line fit of the same window. Step
    candidates must further have residual small against their own jump,
    central nodes between the two levels, and no clearly stronger peak
    detection inside the window on their high side (the smeared shoulder
    of a saddle peak forms a genuine-looking level break one half-window
    away). Candidates are collapsed run-wise, thinned to just over a
    half-window separation per template, and a center claimed by several
    templates goes to the smallest residual.
    """
    if templates is None:
        templates = make_templates()
    window_len = templates[0].window_len
    if any(t.window_len != window_len for t in templates):
        raise ValueError("templates must share one window length")

    d = deriv.d
    scan = _scan_padded(d, window_len)
    gate = contrast_frac * (float(d.max()) - float(d.min()))
    half = window_len // 2
    min_sep = half + 1
    padded = np.concatenate([np.zeros(half), d, np.zeros(half)])

    candidates: Dict[str, list] = {}
    strength: Dict[str, Dict[int, float]] = {}
    for t in templates:
        res, con, line = scan[t.kind]
        threshold = float(np.std(res))
        mask = (res < threshold) & (con >= gate) & (con > 0.0) & (res < line_margin * line)
        if t.kind != CUSP:
            mask &= res < shape_margin * con
        centers = _collapse_runs(mask, res)
        centers = _enforce_separation(centers, res, min_sep)
        if t.kind != CUSP:
            centers = [c for c in centers if _step_center_between(padded, c, window_len)]
        candidates[t.kind] = centers
        strength[t.kind] = {
            c: float(res[c]) / threshold if threshold > 0 else 0.0 for c in centers
        }

    # suppress a step when a clearly better peak sits in its window on the
    # high side; geometry keeps true neighbor pairs outside the window
    cusp_set = candidates.get(CUSP, [])
    for kind, high_dir in ((STEP_UP, +1), (STEP_DOWN, -1)):
        kept = []
        for c in candidates.get(kind, []):
            shadowed = any(
                1 <= high_dir * (q - c) <= half
                and strength[CUSP][q] < 0.5 * strength[kind][c]
                for q in cusp_set
            )
            if not shadowed:
                kept.append(c)
        candidates[kind] = kept

    by_center: Dict[int, Tuple[float, str]] = {}
    for t in templates:
        res, _, _ = scan[t.kind]
        for c in candidates[t.kind]:
            r = float(res[c])
            if c not in by_center or r < by_center[c][0]:
                by_center[c] = (r, t.kind)

    nodes = deriv.grid.nodes()
    points = tuple(
        CriticalPoint(float(nodes[c]), INDEX_OF_TEMPLATE[kind], kind, r)
        for c, (r, kind) in sorted(by_center.items())
    )
    return CriticalSet(points)
