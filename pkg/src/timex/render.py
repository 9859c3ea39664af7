"""Standalone SVG heatmap of an analysis result document.

One row per important feature (already sorted by descending score in the
document), one column per timestep.  Cells inside a feature's window are
filled with opacity proportional to its normalized score; windows whose
ordering tested significant carry a diagonal hatch overlay.  The output is
self-contained XML with no external references.
"""

from xml.sax.saxutils import escape, quoteattr

from .errors import DataFormatError

CELL_W = 26
CELL_H = 22
LEFT = 150
TOP = 34
BAR_H = 14
FILL = "#1f6fb4"
MIN_OPACITY = 0.15


def _shade(score: float, max_score: float) -> float:
    if max_score <= 0.0:
        return MIN_OPACITY
    norm = min(max(score / max_score, 0.0), 1.0)
    return MIN_OPACITY + (1.0 - MIN_OPACITY) * norm


def render_heatmap(document: dict) -> str:
    """SVG (as a string) for a results document produced by the pipeline."""
    try:
        features = document["features"]
        rows = [f for f in features if f["important"]]
        length = int(
            document.get("sequence_length")
            or max((f["window"]["end"] for f in rows if f.get("window")), default=1)
        )
    except (KeyError, TypeError) as exc:
        raise DataFormatError(f"malformed results document: {exc}") from exc

    width = LEFT + CELL_W * length + 40
    height = TOP + CELL_H * max(1, len(rows)) + 70
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
        "<defs>",
        '<pattern id="hatch" patternUnits="userSpaceOnUse" width="6" height="6" '
        'patternTransform="rotate(45)">'
        '<line x1="0" y1="0" x2="0" y2="6" stroke="#222222" stroke-width="1.4"/>'
        "</pattern>",
        f'<linearGradient id="scorebar" x1="0" y1="0" x2="1" y2="0">'
        f'<stop offset="0" stop-color="{FILL}" stop-opacity="{MIN_OPACITY}"/>'
        f'<stop offset="1" stop-color="{FILL}" stop-opacity="1"/>'
        "</linearGradient>",
        "</defs>",
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="#ffffff"/>',
    ]

    if not rows:
        parts.append(
            f'<text x="{width / 2:.1f}" y="{height / 2:.1f}" text-anchor="middle" '
            f'fill="#444444">no important features</text>'
        )
        parts.append("</svg>")
        return "\n".join(parts) + "\n"

    max_score = max((f["score"] or 0.0) for f in rows)

    # column header: timestep ticks
    tick = max(1, length // 10)
    for k in range(1, length + 1):
        if k == 1 or k == length or k % tick == 0:
            x = LEFT + (k - 0.5) * CELL_W
            parts.append(
                f'<text x="{x:.1f}" y="{TOP - 8}" text-anchor="middle" fill="#666666">{k}</text>'
            )

    for row_index, feature in enumerate(rows):
        y = TOP + row_index * CELL_H
        name = feature["name"]
        window = feature.get("window")
        ordering = feature.get("window_ordering") or {}
        shade = _shade(feature["score"] or 0.0, max_score)
        parts.append(f'<g class="feature-row" data-feature={quoteattr(name)}>')
        parts.append(
            f'<text x="{LEFT - 8}" y="{y + CELL_H - 7}" text-anchor="end" '
            f'fill="#222222">{escape(name)}</text>'
        )
        parts.append(
            f'<rect x="{LEFT}" y="{y}" width="{CELL_W * length}" height="{CELL_H}" '
            f'fill="none" stroke="#dddddd"/>'
        )
        if window:
            for k in range(window["start"], window["end"] + 1):
                x = LEFT + (k - 1) * CELL_W
                parts.append(
                    f'<rect class="cell" x="{x}" y="{y}" width="{CELL_W}" height="{CELL_H}" '
                    f'fill="{FILL}" fill-opacity="{shade:.4f}" stroke="#ffffff" stroke-width="0.5"/>'
                )
            if ordering.get("important"):
                x = LEFT + (window["start"] - 1) * CELL_W
                w = (window["end"] - window["start"] + 1) * CELL_W
                parts.append(
                    f'<rect class="hatch" x="{x}" y="{y}" width="{w}" height="{CELL_H}" '
                    f'fill="url(#hatch)"/>'
                )
        parts.append("</g>")

    bar_y = TOP + len(rows) * CELL_H + 24
    bar_w = min(240, CELL_W * length)
    parts.extend(
        [
            f'<rect x="{LEFT}" y="{bar_y}" width="{bar_w}" height="{BAR_H}" '
            f'fill="url(#scorebar)" stroke="#999999" stroke-width="0.5"/>',
            f'<text x="{LEFT}" y="{bar_y + BAR_H + 14}" fill="#444444">0</text>',
            f'<text x="{LEFT + bar_w}" y="{bar_y + BAR_H + 14}" text-anchor="end" '
            f'fill="#444444">{max_score:.4g}</text>',
            f'<text x="{LEFT - 8}" y="{bar_y + BAR_H - 2}" text-anchor="end" '
            f'fill="#444444">importance</text>',
        ]
    )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
