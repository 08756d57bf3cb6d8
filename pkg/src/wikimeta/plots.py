"""Deterministic SVG rendering of forest, funnel and mass (L'Abbe-like) plots.

Output is plain SVG 1.1 text: shapes and text only, coordinates rounded to
two decimals, element order fixed, so identical input gives identical bytes.
Markers carry a ``class`` attribute (``study-marker``, ``diamond``,
``study-point``, ``mass-point``) that tests and stylesheets can select on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from xml.sax.saxutils import escape

from .errors import EmptyInput
from .pooling import Z_95

FOREST_WIDTH = 800
FOREST_ROW = 28
SCATTER_WIDTH = 640
SCATTER_HEIGHT = 480
MAX_LABEL = 40
# rough advance width of a glyph relative to the font size
CHAR_WIDTH = 0.6

MEASURE_NAMES = {
    "smd_cohen": "Standardized mean difference (Cohen's d)",
    "smd_hedges": "Standardized mean difference (Hedges' g)",
    "log_odds_ratio": "Log odds ratio",
    "log_variance_ratio": "Log variance ratio (ln sd1/sd2)",
}


@dataclass(frozen=True)
class SvgDocument:
    width: int
    height: int
    body: str

    def __str__(self):
        return self.body

    def encode(self):
        return self.body.encode("utf-8")


@dataclass(frozen=True)
class MassPoint:
    label: str
    effect: float
    se: float
    n_total: int

    @property
    def significant(self):
        return abs(self.effect) >= Z_95 * self.se


def _num(value, digits=2):
    text = f"{value:.{digits}f}"
    if text.lstrip("-").strip("0.") == "":
        text = text.lstrip("-")
    return text


def _c(value):
    return _num(value, 2)


def _text(value):
    return escape(str(value), {'"': "&quot;"})


def _label(text, limit=MAX_LABEL):
    return text if len(text) <= limit else text[:limit - 1] + "…"


def _open(width, height, title):
    return [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="Helvetica, Arial, sans-serif" font-size="12">',
        f"<title>{_text(title)}</title>",
        f'<rect class="background" x="0" y="0" width="{width}" height="{height}" fill="white"/>',
    ]


def _close(parts, width, height):
    parts.append("</svg>")
    return SvgDocument(width, height, "\n".join(parts) + "\n")


def nice_ticks(low, high, target=5):
    """Round tick positions (1, 2 or 5 times a power of ten) inside [low, high]."""
    span = high - low
    if span <= 0:
        return [low]
    raw = span / target
    power = 10 ** math.floor(math.log10(raw))
    step = next(m * power for m in (1, 2, 5, 10) if m * power >= raw)
    digits = max(0, -math.floor(math.log10(step) + 1e-9))
    first = math.ceil(low / step - 1e-9)
    ticks = []
    i = first
    while i * step <= high + 1e-9 * step:
        ticks.append(round(i * step, digits + 1))
        i += 1
    return ticks, digits


class _Scale:
    """Affine map from data values to pixels."""

    def __init__(self, lo, hi, px_lo, px_hi):
        self.lo, self.hi, self.px_lo, self.px_hi = lo, hi, px_lo, px_hi

    def __call__(self, value):
        return self.px_lo + (value - self.lo) / (self.hi - self.lo) * (self.px_hi - self.px_lo)


def _padded(values, fraction=0.1):
    lo, hi = min(values), max(values)
    if hi == lo:
        lo, hi = lo - 1.0, hi + 1.0
    pad = fraction * (hi - lo)
    return lo - pad, hi + pad


def _x_axis(parts, scale, y, y_top=None, label=None):
    parts.append(f'<line class="axis" x1="{_c(scale.px_lo)}" y1="{_c(y)}" x2="{_c(scale.px_hi)}" '
                 f'y2="{_c(y)}" stroke="black"/>')
    ticks, digits = nice_ticks(scale.lo, scale.hi)
    for tick in ticks:
        x = scale(tick)
        parts.append(f'<line class="tick" x1="{_c(x)}" y1="{_c(y)}" x2="{_c(x)}" y2="{_c(y + 4)}" '
                     f'stroke="black"/>')
        parts.append(f'<text x="{_c(x)}" y="{_c(y + 16)}" text-anchor="middle" font-size="10">'
                     f"{_num(tick, digits)}</text>")
    if label:
        mid = (scale.px_lo + scale.px_hi) / 2
        parts.append(f'<text x="{_c(mid)}" y="{_c(y + 32)}" text-anchor="middle">{_text(label)}</text>')


def _y_axis(parts, scale, x, label):
    parts.append(f'<line class="axis" x1="{_c(x)}" y1="{_c(scale.px_lo)}" x2="{_c(x)}" '
                 f'y2="{_c(scale.px_hi)}" stroke="black"/>')
    ticks, digits = nice_ticks(scale.lo, scale.hi)
    for tick in ticks:
        y = scale(tick)
        parts.append(f'<line class="tick" x1="{_c(x - 4)}" y1="{_c(y)}" x2="{_c(x)}" y2="{_c(y)}" '
                     f'stroke="black"/>')
        parts.append(f'<text x="{_c(x - 6)}" y="{_c(y + 4)}" text-anchor="end" font-size="10">'
                     f"{_num(tick, digits)}</text>")
    mid = (scale.px_lo + scale.px_hi) / 2
    parts.append(f'<text x="{_c(x - 44)}" y="{_c(mid)}" text-anchor="middle" '
                 f'transform="rotate(-90 {_c(x - 44)} {_c(mid)})">{_text(label)}</text>')


def _ci_text(effect, low, high):
    return f"{_num(effect)} [{_num(low)}, {_num(high)}]"


# -- forest -----------------------------------------------------------------------

def forest_height(k):
    return FOREST_ROW * (k + 2) + 80


def forest_svg(result):
    """Forest plot: one row per study plus fixed and random-effects diamonds."""
    estimates = result.estimates
    k = len(estimates)
    width, height = FOREST_WIDTH, forest_height(k)
    top = 40
    rows_end = top + FOREST_ROW * (k + 2)

    cis = [(e.effect - Z_95 * e.se, e.effect + Z_95 * e.se) for e in estimates]
    pooled = [result.fixed, result.random]
    extents = [v for ci in cis for v in ci]
    extents += [v for p in pooled for v in (p.ci_low, p.ci_high)] + [0.0]
    scale = _Scale(*_padded(extents), 290, 570)

    weights = result.weights("random_dl")
    max_weight = max(weights)
    title = result.title or "Meta-analysis"
    parts = _open(width, height, f"Forest plot: {title}")
    parts.append(f'<text x="10" y="18" font-size="14" font-weight="bold">{_text(_label(title, 90))}</text>')
    parts.append(f'<text x="10" y="34" font-weight="bold">Study</text>')
    parts.append(f'<text x="430" y="34" text-anchor="middle">'
                 f"{_text(MEASURE_NAMES[result.measure.value])}</text>")
    parts.append('<text x="585" y="34" font-weight="bold">Effect [95% CI]</text>')
    parts.append('<text x="790" y="34" text-anchor="end" font-weight="bold">Weight</text>')

    zero = scale(0.0)
    parts.append(f'<line class="zero-line" x1="{_c(zero)}" y1="{top}" x2="{_c(zero)}" '
                 f'y2="{rows_end + 4}" stroke="#888888" stroke-dasharray="4 3"/>')

    for i, (est, (low, high), weight) in enumerate(zip(estimates, cis, weights)):
        y = top + FOREST_ROW * i + FOREST_ROW / 2
        side = 4 + 12 * math.sqrt(weight / max_weight)
        x = scale(est.effect)
        parts.append(f'<text x="10" y="{_c(y + 4)}" font-size="11">{_text(_label(est.study_label))}</text>')
        parts.append(f'<line class="ci" x1="{_c(scale(low))}" y1="{_c(y)}" x2="{_c(scale(high))}" '
                     f'y2="{_c(y)}" stroke="black"/>')
        parts.append(f'<rect class="study-marker" x="{_c(x - side / 2)}" y="{_c(y - side / 2)}" '
                     f'width="{_c(side)}" height="{_c(side)}" fill="#1f4e79"/>')
        parts.append(f'<text x="585" y="{_c(y + 4)}">{_ci_text(est.effect, low, high)}</text>')
        parts.append(f'<text x="790" y="{_c(y + 4)}" text-anchor="end">{_num(weight, 1)}%</text>')

    names = ("Fixed effect", "Random effects (DL)")
    fills = ("#444444", "#b03a2e")
    for j, (res, name, fill) in enumerate(zip(pooled, names, fills)):
        y = top + FOREST_ROW * (k + j) + FOREST_ROW / 2
        lo, mid, hi = scale(res.ci_low), scale(res.effect), scale(res.ci_high)
        parts.append(f'<text x="10" y="{_c(y + 4)}" font-size="11" font-weight="bold">{name}</text>')
        parts.append(f'<polygon class="diamond" points="{_c(lo)},{_c(y)} {_c(mid)},{_c(y - 7)} '
                     f'{_c(hi)},{_c(y)} {_c(mid)},{_c(y + 7)}" fill="{fill}"/>')
        parts.append(f'<text x="585" y="{_c(y + 4)}" font-weight="bold">'
                     f"{_ci_text(res.effect, res.ci_low, res.ci_high)}</text>")
        parts.append(f'<text x="790" y="{_c(y + 4)}" text-anchor="end">100.0%</text>')

    _x_axis(parts, scale, rows_end + 4)
    het = result.heterogeneity
    parts.append(f'<text class="heterogeneity" x="10" y="{height - 8}" font-size="11">'
                 f"Heterogeneity: Q = {_num(het.Q)}, df = {het.df}, p = {_num(het.p_Q, 3)}, "
                 f"I² = {_num(het.I2, 1)}%, τ² = {_num(het.tau2, 4)}</text>")
    return _close(parts, width, height)


# -- funnel ------------------------------------------------------------------------

def funnel_svg(result):
    """Funnel plot: effect against standard error (inverted), with pseudo-95% limits."""
    estimates = result.estimates
    width, height = SCATTER_WIDTH, SCATTER_HEIGHT
    centre = result.fixed.effect
    se_max = 1.1 * max(e.se for e in estimates)
    spread = Z_95 * se_max
    xs = [e.effect for e in estimates] + [centre - spread, centre + spread]
    xscale = _Scale(*_padded(xs), 70, 620)
    yscale = _Scale(0.0, se_max, 40, 420)

    title = result.title or "Meta-analysis"
    parts = _open(width, height, f"Funnel plot: {title}")
    parts.append(f'<text x="{width // 2}" y="22" text-anchor="middle" font-size="14" '
                 f'font-weight="bold">{_text(_label(title, 80))}</text>')
    apex = (xscale(centre), yscale(0.0))
    for sign in (-1, 1):
        parts.append(f'<line class="funnel-bound" x1="{_c(apex[0])}" y1="{_c(apex[1])}" '
                     f'x2="{_c(xscale(centre + sign * spread))}" y2="{_c(yscale(se_max))}" '
                     f'stroke="#888888" stroke-dasharray="4 3"/>')
    parts.append(f'<line class="pooled-line" x1="{_c(apex[0])}" y1="{_c(yscale(0.0))}" '
                 f'x2="{_c(apex[0])}" y2="{_c(yscale(se_max))}" stroke="#b03a2e"/>')
    for est in estimates:
        parts.append(f'<circle class="study-point" cx="{_c(xscale(est.effect))}" '
                     f'cy="{_c(yscale(est.se))}" r="4" fill="#1f4e79">'
                     f"<title>{_text(est.study_label)}</title></circle>")
    _x_axis(parts, xscale, 424, label=MEASURE_NAMES[result.measure.value])
    _y_axis(parts, yscale, 66, "Standard error")
    return _close(parts, width, height)


# -- mass plot ---------------------------------------------------------------------

def dot_radius(n_total):
    return min(20.0, max(3.0, math.sqrt(n_total)))


def labbe_mass_svg(points, title="Mass meta-analysis"):
    """Many meta-analyses in one scatter: effect against standard error,
    dot size by subject count, rays marking two-sided 0.05 significance."""
    if not points:
        raise EmptyInput("no meta-analysis results to plot")
    width, height = SCATTER_WIDTH, SCATTER_HEIGHT
    se_max = 1.1 * max(p.se for p in points)
    spread = Z_95 * se_max
    xs = [p.effect for p in points] + [-spread, spread]
    xscale = _Scale(*_padded(xs), 70, 620)
    yscale = _Scale(0.0, se_max, 420, 40)

    parts = _open(width, height, title)
    parts.append(f'<text x="{width // 2}" y="22" text-anchor="middle" font-size="14" '
                 f'font-weight="bold">{_text(_label(title, 80))}</text>')
    origin = (xscale(0.0), yscale(0.0))
    for sign in (-1, 1):
        parts.append(f'<line class="significance-bound" x1="{_c(origin[0])}" y1="{_c(origin[1])}" '
                     f'x2="{_c(xscale(sign * spread))}" y2="{_c(yscale(se_max))}" stroke="#b03a2e"/>')
    # large dots first so small ones stay visible
    ordered = sorted(points, key=lambda p: (-p.n_total, p.label, p.effect, p.se))
    for p in ordered:
        x, y, r = xscale(p.effect), yscale(p.se), dot_radius(p.n_total)
        kind = "significant" if p.significant else "nonsignificant"
        fill = "#b03a2e" if p.significant else "white"
        parts.append(f'<circle class="mass-point {kind}" cx="{_c(x)}" cy="{_c(y)}" r="{_c(r)}" '
                     f'fill="{fill}" fill-opacity="0.7" stroke="#1f4e79"/>')
    for p in ordered:
        x, y, r = xscale(p.effect), yscale(p.se), dot_radius(p.n_total)
        text = _label(p.label, 30)
        if x + r + 2 + CHAR_WIDTH * 9 * len(text) > width:
            parts.append(f'<text x="{_c(x - r - 2)}" y="{_c(y + 3)}" text-anchor="end" '
                         f'font-size="9">{_text(text)}</text>')
        else:
            parts.append(f'<text x="{_c(x + r + 2)}" y="{_c(y + 3)}" font-size="9">{_text(text)}</text>')
    _x_axis(parts, xscale, 424, label="Effect size (random effects)")
    _y_axis(parts, yscale, 66, "Standard error")
    parts.append(f'<text x="{width - 10}" y="{height - 8}" text-anchor="end" font-size="10">'
                 f"filled: p &lt; 0.05; dot area proportional to number of subjects</text>")
    return _close(parts, width, height)
