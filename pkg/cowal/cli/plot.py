"""
SVG Plot

Line chart of AL curves written as raw SVG text. Layout and styling are
fixed so identical input gives identical bytes.
"""

from pathlib import Path
from typing import Sequence
from xml.sax.saxutils import escape

from ..data.io import read_curve_csv
from ..errors import IoFailure

WIDTH = 800
HEIGHT = 500
MARGIN_LEFT = 70
MARGIN_RIGHT = 170
MARGIN_TOP = 30
MARGIN_BOTTOM = 60

PALETTE = (
    "#1f77b4",
    "#ff7f0e",
    "#2ca02c",
    "#d62728",
    "#9467bd",
    "#8c564b",
    "#e377c2",
    "#7f7f7f",
    "#bcbd22",
    "#17becf",
)


def _fmt(value: float) -> str:
    return f"{value:.6f}"


def render_svg(
    labels: Sequence[str], steps: Sequence[int], columns: Sequence[Sequence[float]]
) -> str:
    """One polyline per column on a DICE axis from 0 to 1"""
    plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT
    plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM
    x_min, x_max = min(steps), max(steps)
    span = (x_max - x_min) or 1

    def x(step: float) -> float:
        return MARGIN_LEFT + (step - x_min) / span * plot_w

    def y(score: float) -> float:
        return MARGIN_TOP + (1.0 - min(max(score, 0.0), 1.0)) * plot_h

    bottom = MARGIN_TOP + plot_h
    right = MARGIN_LEFT + plot_w
    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>',
        f'<line class="axis" x1="{MARGIN_LEFT}" y1="{bottom}" x2="{right}" y2="{bottom}" '
        'stroke="#000000"/>',
        f'<line class="axis" x1="{MARGIN_LEFT}" y1="{MARGIN_TOP}" x2="{MARGIN_LEFT}" '
        f'y2="{bottom}" stroke="#000000"/>',
    ]

    for step in steps:
        lines.append(
            f'<text class="tick" x="{_fmt(x(step))}" y="{bottom + 18}" font-size="12" '
            f'text-anchor="middle">{step}</text>'
        )
    for tenth in range(0, 11, 2):
        score = tenth / 10
        lines.append(
            f'<text class="tick" x="{MARGIN_LEFT - 8}" y="{_fmt(y(score) + 4)}" font-size="12" '
            f'text-anchor="end">{score:.1f}</text>'
        )

    lines.append(
        f'<text class="xlabel" x="{_fmt(MARGIN_LEFT + plot_w / 2)}" y="{HEIGHT - 15}" '
        'font-size="14" text-anchor="middle">AL step</text>'
    )
    lines.append(
        f'<text class="ylabel" x="20" y="{_fmt(MARGIN_TOP + plot_h / 2)}" font-size="14" '
        f'text-anchor="middle" transform="rotate(-90 20 {_fmt(MARGIN_TOP + plot_h / 2)})">'
        "DICE</text>"
    )

    for i, (label, scores) in enumerate(zip(labels, columns)):
        color = PALETTE[i % len(PALETTE)]
        points = " ".join(f"{_fmt(x(s))},{_fmt(y(v))}" for s, v in zip(steps, scores))
        lines.append(
            f'<polyline class="curve" data-label="{escape(label, {chr(34): "&quot;"})}" '
            f'points="{points}" fill="none" stroke="{color}" stroke-width="2"/>'
        )
        legend_y = MARGIN_TOP + 10 + 20 * i
        lines.append(
            f'<line x1="{right + 15}" y1="{legend_y}" x2="{right + 35}" y2="{legend_y}" '
            f'stroke="{color}" stroke-width="2"/>'
        )
        lines.append(
            f'<text class="legend" x="{right + 42}" y="{legend_y + 4}" font-size="12">'
            f"{escape(label)}</text>"
        )

    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def emit_plot(curves_csv: Path, out_path: Path) -> None:
    """
    Render a curve CSV as an SVG line chart

    Raises:
        MalformedCsv: The CSV cannot be parsed
        IoFailure: The SVG cannot be written
    """
    labels, steps, columns = read_curve_csv(curves_csv)
    svg = render_svg(labels, steps, columns)
    try:
        Path(out_path).write_text(svg, encoding="utf-8", newline="\n")
    except OSError as e:
        raise IoFailure(f"cannot write '{out_path}': {e}") from e
