"""Run artifact writers: atomic file output, CSV, JSON, and the loss-curve SVG.

Every writer goes through a temp-file-then-rename so an interrupted run never
leaves a partial artifact at the final path. Floats are formatted with
``repr`` (shortest round-trip), which keeps identical runs byte-identical.
"""

import json
import os
import tempfile


def atomic_write_bytes(path, payload):
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix="~")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(path, text):
    atomic_write_bytes(path, text.encode("utf-8"))


def format_cell(value):
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(path, header, rows):
    lines = [",".join(header)]
    for row in rows:
        if len(row) != len(header):
            raise ValueError(f"row width {len(row)} != header width {len(header)}")
        lines.append(",".join(format_cell(v) for v in row))
    atomic_write_text(path, "\n".join(lines) + "\n")


def write_json(path, obj):
    atomic_write_text(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _svg_path(xs, ys, x0, x1, y0, y1, width, height, pad):
    span_x = (x1 - x0) or 1.0
    span_y = (y1 - y0) or 1.0
    pts = []
    for x, y in zip(xs, ys):
        px = pad + (x - x0) / span_x * (width - 2 * pad)
        py = height - pad - (y - y0) / span_y * (height - 2 * pad)
        pts.append(f"{px:.2f},{py:.2f}")
    return " ".join(pts)


def render_curve_svg(series, xlabel="epoch", ylabel="loss", width=640, height=400):
    """Render line series as a standalone SVG document.

    series: list of (name, xs, ys). Direct markup emission; no plotting
    dependency. Returns the SVG text.
    """
    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]
    pad = 48.0
    xs_all = [x for _, xs, _ in series for x in xs]
    ys_all = [y for _, _, ys in series for y in ys]
    if not xs_all:
        xs_all, ys_all = [0.0, 1.0], [0.0, 1.0]
    x0, x1 = min(xs_all), max(xs_all)
    y0, y1 = min(ys_all), max(ys_all)
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        # axes
        f'<line x1="{pad}" y1="{height-pad}" x2="{width-pad}" y2="{height-pad}" '
        'stroke="black"/>',
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height-pad}" stroke="black"/>',
        f'<text x="{width/2:.0f}" y="{height-10:.0f}" font-size="13" '
        f'text-anchor="middle">{xlabel}</text>',
        f'<text x="14" y="{height/2:.0f}" font-size="13" text-anchor="middle" '
        f'transform="rotate(-90 14 {height/2:.0f})">{ylabel}</text>',
        f'<text x="{pad:.0f}" y="{height-pad+16:.0f}" font-size="11" '
        f'text-anchor="middle">{x0:g}</text>',
        f'<text x="{width-pad:.0f}" y="{height-pad+16:.0f}" font-size="11" '
        f'text-anchor="middle">{x1:g}</text>',
        f'<text x="{pad-6:.0f}" y="{height-pad:.0f}" font-size="11" '
        f'text-anchor="end">{y0:.4g}</text>',
        f'<text x="{pad-6:.0f}" y="{pad+4:.0f}" font-size="11" '
        f'text-anchor="end">{y1:.4g}</text>',
    ]
    for k, (name, xs, ys) in enumerate(series):
        color = colors[k % len(colors)]
        pts = _svg_path(xs, ys, x0, x1, y0, y1, width, height, pad)
        out.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>'
        )
        ly = pad + 16 * k
        out.append(
            f'<line x1="{width-pad-130:.0f}" y1="{ly:.0f}" x2="{width-pad-106:.0f}" '
            f'y2="{ly:.0f}" stroke="{color}" stroke-width="1.5"/>'
        )
        out.append(
            f'<text x="{width-pad-100:.0f}" y="{ly+4:.0f}" font-size="12">{name}</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def format_table(header, rows):
    """Aligned text table (header + rows of strings)."""
    cells = [list(map(str, header))] + [list(map(str, r)) for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    lines = []
    for i, row in enumerate(cells):
        lines.append("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip())
        if i == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"
