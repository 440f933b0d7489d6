"""Deterministic SVG rendering of landscape profiles."""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import ParameterError
from .profile import LandscapeProfile

_HEX = re.compile(r"^#[0-9a-fA-F]{6}$")

MINIMUM_COLOR = "#d62728"   # red dots
SADDLE_COLOR = "#ff7f0e"    # orange dots


@dataclass
class RenderStyle:
    width: int = 900
    height: int = 600
    ramp_dark: str = "#08306b"
    ramp_light: str = "#c6dbef"
    minimum_radius: float = 4.0
    saddle_radius: float = 3.0
    axis: bool = True
    background: str = "#ffffff"
    padding: int = 40

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ParameterError("canvas dimensions must be positive")
        for c in (self.ramp_dark, self.ramp_light, self.background):
            if not _HEX.match(c):
                raise ParameterError(f"invalid hex color {c!r}")
        if self.minimum_radius <= 0 or self.saddle_radius <= 0:
            raise ParameterError("marker radii must be positive")


def _fmt(x: float) -> str:
    return f"{x:.3f}"


def to_svg(profile, style: RenderStyle = RenderStyle()) -> str:
    """Render a profile (or its JSON document) to SVG text.

    One <rect> per width step, one <circle> per marker; identical inputs
    produce byte-identical output.  A value range of zero renders as a flat
    band with a warning comment.
    """
    doc = profile.to_json_dict() if isinstance(profile, LandscapeProfile) else profile
    vmin, vmax = doc["valueRange"]
    total_width = doc["vertexCount"]
    pad = style.padding
    plot_w = style.width - 2 * pad
    plot_h = style.height - 2 * pad
    degenerate = vmax <= vmin

    def sx(x: float) -> float:
        return pad + (x / total_width) * plot_w if total_width else pad

    def sy(v: float) -> float:
        if degenerate:
            return pad + plot_h / 2
        return pad + (vmax - v) / (vmax - vmin) * plot_h

    band = plot_h * 0.05  # nominal thickness for zero-height rectangles

    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{style.width}" '
        f'height="{style.height}" viewBox="0 0 {style.width} {style.height}">',
        f'<rect x="0" y="0" width="{style.width}" height="{style.height}" '
        f'fill="{style.background}"/>',
    ]
    if degenerate:
        lines.append("<!-- warning: degenerate zero-range value axis; "
                     "rendering flat band -->")

    def emit_basin(b: dict) -> None:
        fill = b["color"] or "#9ecae1"
        for x0, x1, y0, y1 in b["rectangles"]:
            top = sy(y1)
            bottom = sy(y0)
            h = bottom - top
            if h <= 0:
                h = band
                top = bottom - h
            lines.append(
                f'<rect x="{_fmt(sx(x0))}" y="{_fmt(top)}" '
                f'width="{_fmt(sx(x1) - sx(x0))}" height="{_fmt(h)}" '
                f'fill="{fill}"/>'
            )
        for c in b["children"]:
            emit_basin(c)

    for basin in doc["basins"]:
        emit_basin(basin)

    if style.axis:
        lines.append(
            f'<line x1="{_fmt(pad)}" y1="{_fmt(pad)}" x2="{_fmt(pad)}" '
            f'y2="{_fmt(pad + plot_h)}" stroke="#333333" stroke-width="1"/>'
        )
        lines.append(
            f'<text x="{_fmt(pad - 6)}" y="{_fmt(sy(vmax))}" font-size="10" '
            f'text-anchor="end" fill="#333333">{vmax:.6g}</text>'
        )
        lines.append(
            f'<text x="{_fmt(pad - 6)}" y="{_fmt(sy(vmin))}" font-size="10" '
            f'text-anchor="end" fill="#333333">{vmin:.6g}</text>'
        )

    for m in doc["markers"]:
        if m["kind"] == "minimum":
            color, r = MINIMUM_COLOR, style.minimum_radius
        else:
            color, r = SADDLE_COLOR, style.saddle_radius
        lines.append(
            f'<circle cx="{_fmt(sx(m["x"]))}" cy="{_fmt(sy(m["y"]))}" '
            f'r="{_fmt(r)}" fill="{color}"/>'
        )

    lines.append("</svg>")
    return "\n".join(lines) + "\n"
