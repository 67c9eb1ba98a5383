"""Minimal SVG 1.1 charts: line panels and grouped bar panels with error bars."""

from __future__ import annotations

from xml.sax.saxutils import escape

PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"]

PANEL_W, PANEL_H = 420, 300
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 50, 20, 30, 60


def _fmt(v: float) -> str:
    return f"{v:.2f}".rstrip("0").rstrip(".")


class _Panel:
    def __init__(self, x0, title, y_max=100.0):
        self.x0 = x0
        self.title = title
        self.y_max = y_max
        self.parts: list[str] = []
        self.w = PANEL_W - MARGIN_L - MARGIN_R
        self.h = PANEL_H - MARGIN_T - MARGIN_B

    def px(self, frac):
        return self.x0 + MARGIN_L + frac * self.w

    def py(self, y):
        y = min(max(y, 0.0), self.y_max)
        return MARGIN_T + self.h * (1 - y / self.y_max)

    def axes(self, ylabel):
        p = self.parts
        p.append(
            f'<text x="{self.x0 + PANEL_W / 2:.1f}" y="18" text-anchor="middle" '
            f'font-size="13">{escape(self.title)}</text>'
        )
        for tick in range(0, 101, 20):
            y = self.py(tick * self.y_max / 100)
            p.append(
                f'<line x1="{self.px(0):.1f}" y1="{y:.1f}" x2="{self.px(1):.1f}" '
                f'y2="{y:.1f}" stroke="#dddddd"/>'
            )
            p.append(
                f'<text x="{self.px(0) - 4:.1f}" y="{y + 4:.1f}" text-anchor="end" '
                f'font-size="10">{_fmt(tick * self.y_max / 100)}</text>'
            )
        p.append(
            f'<polyline points="{self.px(0):.1f},{self.py(self.y_max):.1f} '
            f'{self.px(0):.1f},{self.py(0):.1f} {self.px(1):.1f},{self.py(0):.1f}" '
            f'fill="none" stroke="black"/>'
        )
        p.append(
            f'<text x="{self.x0 + 14}" y="{MARGIN_T + self.h / 2:.1f}" font-size="11" '
            f'transform="rotate(-90 {self.x0 + 14} {MARGIN_T + self.h / 2:.1f})" '
            f'text-anchor="middle">{escape(ylabel)}</text>'
        )

    def legend(self, labels):
        for i, label in enumerate(labels):
            x = self.px(0) + 8 + (i % 3) * 120
            y = MARGIN_T + self.h + 42 + (i // 3) * 14
            color = PALETTE[i % len(PALETTE)]
            self.parts.append(f'<rect x="{x:.1f}" y="{y - 8:.1f}" width="10" height="10" fill="{color}"/>')
            self.parts.append(f'<text x="{x + 14:.1f}" y="{y + 1:.1f}" font-size="10">{escape(label)}</text>')


def _document(panels) -> str:
    width = PANEL_W * len(panels)
    body = "\n".join(part for panel in panels for part in panel.parts)
    return (
        '<?xml version="1.0" encoding="UTF-8" standalone="no"?>\n'
        '<!DOCTYPE svg PUBLIC "-//W3C//DTD SVG 1.1//EN" '
        '"http://www.w3.org/Graphics/SVG/1.1/DTD/svg11.dtd">\n'
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" '
        f'height="{PANEL_H}" viewBox="0 0 {width} {PANEL_H}" font-family="sans-serif">\n'
        f'<rect width="{width}" height="{PANEL_H}" fill="white"/>\n'
        f"{body}\n</svg>\n"
    )


def line_chart(panels, xlabel: str, ylabel: str = "rate (%)") -> str:
    """``panels``: list of ``(title, {series label: [(x, y), ...]})``."""
    out = []
    for k, (title, series) in enumerate(panels):
        panel = _Panel(k * PANEL_W, title)
        panel.axes(ylabel)
        xs = sorted({x for pts in series.values() for x, _ in pts}) or [0]
        lo, hi = xs[0], xs[-1]
        span = (hi - lo) or 1

        def fx(x):
            return panel.px((x - lo) / span)

        for x in xs:
            panel.parts.append(
                f'<text x="{fx(x):.1f}" y="{MARGIN_T + panel.h + 14:.1f}" '
                f'text-anchor="middle" font-size="10">{_fmt(x)}</text>'
            )
        panel.parts.append(
            f'<text x="{panel.px(0.5):.1f}" y="{MARGIN_T + panel.h + 28:.1f}" '
            f'text-anchor="middle" font-size="11">{escape(xlabel)}</text>'
        )
        for i, (label, pts) in enumerate(series.items()):
            color = PALETTE[i % len(PALETTE)]
            pts = sorted(pts)
            coords = " ".join(f"{fx(x):.1f},{panel.py(y):.1f}" for x, y in pts)
            panel.parts.append(f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="2"/>')
            for x, y in pts:
                panel.parts.append(f'<circle cx="{fx(x):.1f}" cy="{panel.py(y):.1f}" r="3" fill="{color}"/>')
        panel.legend(list(series))
        out.append(panel)
    return _document(out)


def bar_chart(panels, categories, ylabel: str = "rate (%)") -> str:
    """``panels``: list of ``(title, {series label: [(value, err or None), ...]})``.

    Error bars span ``value ± err`` capped to the axis range.
    """
    out = []
    for k, (title, series) in enumerate(panels):
        panel = _Panel(k * PANEL_W, title)
        panel.axes(ylabel)
        n_cat, n_ser = len(categories), max(len(series), 1)
        slot = 1.0 / max(n_cat, 1)
        bar = slot * 0.8 / n_ser
        for c, cat in enumerate(categories):
            cx = panel.px((c + 0.5) * slot)
            panel.parts.append(
                f'<text x="{cx:.1f}" y="{MARGIN_T + panel.h + 12:.1f}" font-size="8" '
                f'text-anchor="middle">{escape(str(cat))}</text>'
            )
        for s, (label, values) in enumerate(series.items()):
            color = PALETTE[s % len(PALETTE)]
            for c, (value, err) in enumerate(values):
                x = panel.px(c * slot + slot * 0.1 + s * bar)
                w = bar * panel.w
                top = panel.py(value)
                panel.parts.append(
                    f'<rect x="{x:.1f}" y="{top:.1f}" width="{w:.1f}" '
                    f'height="{panel.py(0) - top:.1f}" fill="{color}"/>'
                )
                if err is not None:
                    mid = x + w / 2
                    y0, y1 = panel.py(value - err), panel.py(value + err)
                    panel.parts.append(
                        f'<line x1="{mid:.1f}" y1="{y0:.1f}" x2="{mid:.1f}" y2="{y1:.1f}" stroke="black"/>'
                    )
                    for y in (y0, y1):
                        panel.parts.append(
                            f'<line x1="{mid - 2:.1f}" y1="{y:.1f}" x2="{mid + 2:.1f}" y2="{y:.1f}" stroke="black"/>'
                        )
        panel.legend(list(series))
        out.append(panel)
    return _document(out)
