"""Aggregate explanations into reports and render them as standalone SVG.

Three views: global mean-|phi| bars, a local waterfall for a single window,
and per-concept scatter of last component value against phi with a Pearson r.
Rendering is hand-rolled SVG 1.1 with fixed number formatting, so identical
report records always produce identical bytes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .decompose import Decomposition
from .errors import EmptyInput
from .series import Scaler
from .shapley import ShapExplanation

SCALED = "scaled"
DOMAIN = "domain"


@dataclass(frozen=True)
class GlobalReport:
    """Mean absolute attribution per concept over a set of explanations."""

    means: dict[str, float]
    count: int
    units: str = SCALED
    config_digest: str = ""

    def __post_init__(self):
        if self.count <= 0:
            raise EmptyInput("global report needs at least one explanation")
        for name, value in self.means.items():
            if value < 0 or not math.isfinite(value):
                raise ValueError(f"mean |phi| for {name!r} must be finite and nonnegative, got {value}")

    def ranked(self) -> list[tuple[str, float]]:
        """Concepts sorted by mean |phi|, largest first (ties keep concept order)."""
        order = sorted(self.means, key=lambda name: -self.means[name])
        return [(name, self.means[name]) for name in order]

    def to_record(self) -> dict:
        return {
            "means": dict(self.means),
            "count": self.count,
            "units": self.units,
            "config_digest": self.config_digest,
        }


@dataclass(frozen=True)
class WaterfallReport:
    """Additive path from the base value through per-concept steps to the prediction."""

    base_value: float
    steps: tuple[tuple[str, float], ...]
    final_value: float
    units: str = SCALED
    input_id: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple((str(n), float(v)) for n, v in self.steps))

    def cumulative(self) -> list[float]:
        """Running totals: base, then base plus each step in order."""
        totals = [self.base_value]
        for _, value in self.steps:
            totals.append(totals[-1] + value)
        return totals

    def to_record(self) -> dict:
        return {
            "base_value": self.base_value,
            "steps": [[name, value] for name, value in self.steps],
            "final_value": self.final_value,
            "units": self.units,
            "input_id": self.input_id,
        }


@dataclass(frozen=True)
class CorrelationReport:
    """Per concept: (last component value, phi) pairs and their Pearson r.

    ``r`` is None when either coordinate has zero variance.
    """

    pairs: dict[str, tuple[tuple[float, float], ...]]
    r: dict[str, float | None]
    count: int
    units: str = SCALED

    def __post_init__(self):
        for name, value in self.r.items():
            if value is not None and abs(value) > 1 + 1e-12:
                raise ValueError(f"|r| must be <= 1, got {value} for {name!r}")
        for name, pts in self.pairs.items():
            if len(pts) != self.count:
                raise ValueError(f"{name!r} has {len(pts)} pairs, expected {self.count}")

    def to_record(self) -> dict:
        return {
            "pairs": {name: [[x, y] for x, y in pts] for name, pts in self.pairs.items()},
            "r": dict(self.r),
            "count": self.count,
            "units": self.units,
        }


def global_report(
    explanations: Sequence[ShapExplanation],
    scaler: Scaler | None = None,
    config_digest: str = "",
) -> GlobalReport:
    """Mean |phi| per concept; a scaler converts the means to domain units."""
    if not explanations:
        raise EmptyInput("no explanations to aggregate")
    names = explanations[0].names
    factor = scaler.std if scaler is not None else 1.0
    means = {
        name: factor * math.fsum(abs(e.phi[name]) for e in explanations) / len(explanations)
        for name in names
    }
    return GlobalReport(
        means=means,
        count=len(explanations),
        units=DOMAIN if scaler is not None else SCALED,
        config_digest=config_digest,
    )


def waterfall(explanation: ShapExplanation, scaler: Scaler | None = None) -> WaterfallReport:
    """Waterfall for one explanation, in domain units when a scaler is given.

    The affine map phi -> phi * std, base -> base * std + mean preserves the
    additivity base + sum(phi) = output.
    """
    if scaler is None:
        base = explanation.base_value
        steps = tuple((name, explanation.phi[name]) for name in explanation.names)
        final = explanation.model_output
        units = SCALED
    else:
        base = scaler.inverse(explanation.base_value)
        steps = tuple((name, explanation.phi[name] * scaler.std) for name in explanation.names)
        final = scaler.inverse(explanation.model_output)
        units = DOMAIN
    return WaterfallReport(
        base_value=float(base),
        steps=steps,
        final_value=float(final),
        units=units,
        input_id=explanation.input_id,
    )


def _pearson(xs: np.ndarray, ys: np.ndarray) -> float | None:
    xd = xs - xs.mean()
    yd = ys - ys.mean()
    sx = math.sqrt(float(xd @ xd))
    sy = math.sqrt(float(yd @ yd))
    if sx == 0.0 or sy == 0.0:
        return None
    r = float(xd @ yd) / (sx * sy)
    return max(-1.0, min(1.0, r))


def correlation_report(
    explanations: Sequence[ShapExplanation],
    decompositions: Sequence[Decomposition],
    scaler: Scaler | None = None,
) -> CorrelationReport:
    """Pair each concept's last component value with its phi and correlate.

    Pearson r is invariant under the affine domain conversion, so the scaler
    only changes the plotted coordinates, never r.
    """
    if not explanations:
        raise EmptyInput("no explanations to correlate")
    if len(explanations) != len(decompositions):
        raise ValueError(f"{len(explanations)} explanations but {len(decompositions)} decompositions")
    names = explanations[0].names
    factor = scaler.std if scaler is not None else 1.0
    pairs: dict[str, tuple[tuple[float, float], ...]] = {}
    r: dict[str, float | None] = {}
    for name in names:
        xs = np.array([float(d.components[name][-1]) for d in decompositions])
        ys = np.array([e.phi[name] for e in explanations])
        r[name] = _pearson(xs, ys)
        pairs[name] = tuple((float(x) * factor, float(y) * factor) for x, y in zip(xs, ys))
    return CorrelationReport(
        pairs=pairs,
        r=r,
        count=len(explanations),
        units=DOMAIN if scaler is not None else SCALED,
    )


# ---------------------------------------------------------------------------
# SVG rendering


def _fmt(x: float) -> str:
    """Fixed 3-decimal coordinate formatting; trims to keep files compact."""
    s = f"{x:.3f}"
    if s == "-0.000":
        s = "0.000"
    return s


def _fmt_value(x: float) -> str:
    return f"{x:.6g}"


def _esc(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


_POS = "#d1615d"
_NEG = "#5387b2"
_BAR = "#4878a8"
_AXIS = "#555555"

_STYLE = (
    "text{font-family:Helvetica,Arial,sans-serif;font-size:12px;fill:#222222}"
    ".title{font-size:15px;font-weight:bold}"
    ".axis{stroke:#555555;stroke-width:1}"
    ".grid{stroke:#dddddd;stroke-width:1}"
)


def _document(width: float, height: float, body: list[str], title: str) -> bytes:
    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{_fmt(width)}" '
        f'height="{_fmt(height)}" viewBox="0 0 {_fmt(width)} {_fmt(height)}">',
        f"<style>{_STYLE}</style>",
    ]
    if title:
        parts.append(f"<title>{_esc(title)}</title>")
        parts.append(f'<text class="title" x="{_fmt(width / 2)}" y="22" text-anchor="middle">{_esc(title)}</text>')
    parts.extend(body)
    parts.append("</svg>")
    return ("\n".join(parts) + "\n").encode("utf-8")


def _render_global(report: GlobalReport, title: str) -> bytes:
    names = list(report.means)
    top = 40.0 if title else 16.0
    row, bar_h = 34.0, 22.0
    label_w, value_w = 150.0, 90.0
    plot_w = 360.0
    width = label_w + plot_w + value_w + 20.0
    height = top + row * len(names) + 20.0
    peak = max(report.means.values()) if report.means else 0.0
    scale = plot_w / peak if peak > 0 else 0.0

    body = [f'<line class="axis" x1="{_fmt(label_w)}" y1="{_fmt(top)}" '
            f'x2="{_fmt(label_w)}" y2="{_fmt(top + row * len(names))}"/>']
    for k, name in enumerate(names):
        y = top + row * k
        w = report.means[name] * scale
        body.append(
            f'<text x="{_fmt(label_w - 8)}" y="{_fmt(y + bar_h / 2 + 4)}" text-anchor="end">{_esc(name)}</text>'
        )
        body.append(
            f'<rect class="bar" x="{_fmt(label_w)}" y="{_fmt(y)}" width="{_fmt(w)}" '
            f'height="{_fmt(bar_h)}" fill="{_BAR}"/>'
        )
        body.append(
            f'<text x="{_fmt(label_w + w + 6)}" y="{_fmt(y + bar_h / 2 + 4)}">'
            f"{_fmt_value(report.means[name])}</text>"
        )
    return _document(width, height, body, title)


def _render_waterfall(report: WaterfallReport, title: str) -> bytes:
    names = [name for name, _ in report.steps]
    totals = report.cumulative()
    top = 44.0 if title else 20.0
    row = 36.0
    label_w = 150.0
    plot_w = 400.0
    width = label_w + plot_w + 110.0
    height = top + row * (len(names) + 1) + 30.0

    lo = min(totals)
    hi = max(totals)
    if hi == lo:
        lo, hi = lo - 1.0, hi + 1.0
    pad = 0.06 * (hi - lo)
    lo, hi = lo - pad, hi + pad
    scale = plot_w / (hi - lo)

    def x_of(v: float) -> float:
        return label_w + (v - lo) * scale

    marker = (
        "<defs>"
        '<marker id="headpos" markerWidth="8" markerHeight="8" refX="6" refY="3" orient="auto">'
        f'<path d="M0,0 L6,3 L0,6 z" fill="{_POS}"/></marker>'
        '<marker id="headneg" markerWidth="8" markerHeight="8" refX="6" refY="3" orient="auto">'
        f'<path d="M0,0 L6,3 L0,6 z" fill="{_NEG}"/></marker>'
        "</defs>"
    )
    bottom = top + row * (len(names) + 0.5)
    body = [marker]
    body.append(
        f'<line class="grid" x1="{_fmt(x_of(report.base_value))}" y1="{_fmt(top - 6)}" '
        f'x2="{_fmt(x_of(report.base_value))}" y2="{_fmt(bottom)}" stroke-dasharray="4,3"/>'
    )
    body.append(
        f'<line class="grid" x1="{_fmt(x_of(report.final_value))}" y1="{_fmt(top - 6)}" '
        f'x2="{_fmt(x_of(report.final_value))}" y2="{_fmt(bottom)}" stroke-dasharray="4,3"/>'
    )
    body.append(
        f'<text x="{_fmt(x_of(report.base_value))}" y="{_fmt(top - 10)}" text-anchor="middle">'
        f"base {_fmt_value(report.base_value)}</text>"
    )
    for k, (name, value) in enumerate(report.steps):
        y = top + row * k + row / 2
        x0, x1 = x_of(totals[k]), x_of(totals[k + 1])
        color = _POS if value >= 0 else _NEG
        body.append(
            f'<text x="{_fmt(label_w - 8)}" y="{_fmt(y + 4)}" text-anchor="end">{_esc(name)}</text>'
        )
        if x0 == x1:
            body.append(f'<circle cx="{_fmt(x0)}" cy="{_fmt(y)}" r="2.5" fill="{color}"/>')
        else:
            head = "headpos" if value >= 0 else "headneg"
            body.append(
                f'<line class="arrow" x1="{_fmt(x0)}" y1="{_fmt(y)}" x2="{_fmt(x1)}" y2="{_fmt(y)}" '
                f'stroke="{color}" stroke-width="2" marker-end="url(#{head})"/>'
            )
        sign = "+" if value >= 0 else ""
        body.append(
            f'<text x="{_fmt(max(x0, x1) + 10)}" y="{_fmt(y + 4)}" fill="{color}">{sign}{_fmt_value(value)}</text>'
        )
    body.append(
        f'<text x="{_fmt(x_of(report.final_value))}" y="{_fmt(bottom + 16)}" text-anchor="middle">'
        f"prediction {_fmt_value(report.final_value)}</text>"
    )
    return _document(width, height, body, title)


def _render_correlation(report: CorrelationReport, title: str) -> bytes:
    names = list(report.pairs)
    cols = 2 if len(names) > 1 else 1
    rows = (len(names) + cols - 1) // cols
    panel_w, panel_h = 270.0, 200.0
    gap = 34.0
    top = 44.0 if title else 16.0
    width = gap + cols * (panel_w + gap)
    height = top + rows * (panel_h + gap)

    body = []
    for k, name in enumerate(names):
        px = gap + (k % cols) * (panel_w + gap)
        py = top + (k // cols) * (panel_h + gap)
        pts = report.pairs[name]
        xs = [p[0] for p in pts]
        ys = [p[1] for p in pts]
        xlo, xhi = min(xs), max(xs)
        ylo, yhi = min(ys), max(ys)
        if xhi == xlo:
            xlo, xhi = xlo - 1.0, xhi + 1.0
        if yhi == ylo:
            ylo, yhi = ylo - 1.0, yhi + 1.0
        xpad, ypad = 0.05 * (xhi - xlo), 0.05 * (yhi - ylo)
        xlo, xhi, ylo, yhi = xlo - xpad, xhi + xpad, ylo - ypad, yhi + ypad
        body.append(
            f'<rect class="axis" x="{_fmt(px)}" y="{_fmt(py)}" width="{_fmt(panel_w)}" '
            f'height="{_fmt(panel_h)}" fill="none"/>'
        )
        r = report.r[name]
        r_text = "r: n/a" if r is None else f"r = {r:.4f}"
        body.append(
            f'<text x="{_fmt(px + panel_w / 2)}" y="{_fmt(py - 6)}" text-anchor="middle">'
            f"{_esc(name)} ({r_text})</text>"
        )
        for x, y in pts:
            cx = px + (x - xlo) / (xhi - xlo) * panel_w
            cy = py + panel_h - (y - ylo) / (yhi - ylo) * panel_h
            body.append(f'<circle cx="{_fmt(cx)}" cy="{_fmt(cy)}" r="2" fill="{_BAR}" fill-opacity="0.7"/>')
    return _document(width, height, body, title)


def render_svg(report: GlobalReport | WaterfallReport | CorrelationReport, title: str = "") -> bytes:
    """Render a report as a standalone SVG 1.1 document (UTF-8 bytes).

    Pure function of the report record and title: identical inputs give
    byte-identical output.  An empty title omits the title element.
    """
    if isinstance(report, GlobalReport):
        return _render_global(report, title)
    if isinstance(report, WaterfallReport):
        return _render_waterfall(report, title)
    if isinstance(report, CorrelationReport):
        return _render_correlation(report, title)
    raise TypeError(f"cannot render {type(report).__name__}")
