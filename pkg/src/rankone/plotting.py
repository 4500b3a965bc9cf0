"""Dependency-free SVG rendering of trajectories in the complex plane."""

from __future__ import annotations

import colorsys
from dataclasses import dataclass
from xml.sax.saxutils import escape

import numpy as np

from rankone.trajectory import TrajectoryBundle


def _fmt(x: float) -> str:
    return f"{x:.2f}"


def index_color(j: int, n: int) -> str:
    r, g, b = colorsys.hls_to_rgb((j / max(n, 1)) * 0.85, 0.45, 0.75)
    return f"#{int(r * 255):02x}{int(g * 255):02x}{int(b * 255):02x}"


@dataclass
class PlotSpec:
    width: int = 800
    height: int = 600
    margin: int = 40
    x_range: tuple[float, float] | None = None
    y_range: tuple[float, float] | None = None
    stroke_width: float = 1.0
    show_axis: bool = True
    t_marker: float | None = None  # draw i t* for this t
    disk: tuple[complex, float] | None = None  # (center, radius), e.g. from an OutlierReport
    title: str | None = None

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ValueError("plot dimensions must be positive")
        for r in (self.x_range, self.y_range):
            if r is not None and not (np.all(np.isfinite(r)) and r[1] > r[0]):
                raise ValueError(f"bad axis range {r}")


class Frame:
    """Maps complex-plane coordinates to pixels."""

    def __init__(self, spec: PlotSpec, x_range, y_range):
        self.spec = spec
        self.x0, self.x1 = x_range
        self.y0, self.y1 = y_range
        self.sx = (spec.width - 2 * spec.margin) / (self.x1 - self.x0)
        self.sy = (spec.height - 2 * spec.margin) / (self.y1 - self.y0)

    def px(self, z: complex) -> tuple[float, float]:
        m = self.spec.margin
        return m + (z.real - self.x0) * self.sx, self.spec.height - m - (z.imag - self.y0) * self.sy


def _auto_range(vals: np.ndarray, pad: float = 0.05) -> tuple[float, float]:
    lo, hi = float(np.min(vals)), float(np.max(vals))
    if hi - lo < 1e-12:
        lo, hi = lo - 0.5, hi + 0.5
    span = hi - lo
    return lo - pad * span, hi + pad * span


def render_svg(bundle: TrajectoryBundle, spec: PlotSpec | None = None) -> str:
    """One polyline per trajectory, colored by index."""
    spec = spec or PlotSpec()
    lam = np.asarray(bundle.lambdas)
    if lam.size == 0:
        raise ValueError("empty bundle")
    frame = Frame(
        spec,
        spec.x_range or _auto_range(lam.real),
        spec.y_range or _auto_range(np.concatenate([lam.imag.ravel(), [0.0]])),
    )
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{spec.width}" height="{spec.height}" '
        f'viewBox="0 0 {spec.width} {spec.height}">',
        f'<rect width="{spec.width}" height="{spec.height}" fill="white"/>',
    ]
    if spec.title:
        out.append(f'<text x="{spec.margin}" y="{spec.margin // 2}" font-size="14">{escape(spec.title)}</text>')
    if spec.show_axis and frame.y0 <= 0 <= frame.y1:
        xa, ya = frame.px(complex(frame.x0, 0))
        xb, _ = frame.px(complex(frame.x1, 0))
        out.append(f'<line class="real-axis" x1="{_fmt(xa)}" y1="{_fmt(ya)}" x2="{_fmt(xb)}" y2="{_fmt(ya)}" '
                   'stroke="black" stroke-width="0.5"/>')
    n = lam.shape[1]
    for j in range(n):
        pts = " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in (frame.px(z) for z in lam[:, j]))
        out.append(f'<polyline class="trajectory" data-j="{j + 1}" points="{pts}" fill="none" '
                   f'stroke="{index_color(j, n)}" stroke-width="{spec.stroke_width}"/>')
    if spec.t_marker is not None:
        ts = spec.t_marker - 1 / spec.t_marker
        x, y = frame.px(complex(0, ts))
        out.append(f'<circle class="t-star" cx="{_fmt(x)}" cy="{_fmt(y)}" r="3" fill="black"/>')
    if spec.disk is not None:
        center, radius = spec.disk
        x, y = frame.px(complex(center))
        out.append(f'<ellipse class="outlier-disk" cx="{_fmt(x)}" cy="{_fmt(y)}" rx="{_fmt(radius * frame.sx)}" '
                   f'ry="{_fmt(radius * frame.sy)}" fill="none" stroke="black" stroke-dasharray="4 2"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
