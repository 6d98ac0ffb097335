"""A minimal SVG line-chart renderer.

Only what the scenario plots need: polylines in four dash styles, a frame with
ticks, and a legend. Output depends only on the input numbers, so rendering
the same columns twice gives identical bytes.

Example
-------
.. code-block:: python

    import numpy as np
    from moneyflow.svg import LinePlot

    tau = np.linspace(0.0, 10.0, 201)
    plot = LinePlot(title="demo", x_label="tau")
    plot.add("sin", tau, np.sin(tau), style="solid")
    plot.add("cos", tau, np.cos(tau), style="dashed")
    text = plot.render()
"""

import logging
import os
from typing import Dict, List, Mapping, NamedTuple, Sequence, Tuple, Union
from xml.sax.saxutils import escape

import aiofiles
import numpy as np

logger = logging.getLogger(__name__)

DASHES: Dict[str, str] = {
    "solid": "",
    "dashed": "6,4",
    "dashdot": "8,3,2,3",
    "dotted": "2,3",
}

PALETTE = ("#000000", "#1f4e9c", "#b03a2e", "#2e7d32")

PREAMBLE = """\
<?xml version="1.0" standalone="no"?>
<svg version="1.1" width="{width}" height="{height}" viewBox="0 0 {width} {height}" \
xmlns="http://www.w3.org/2000/svg">
<rect x="0" y="0" width="{width}" height="{height}" fill="#ffffff"/>
"""

POSTAMBLE = "</svg>\n"


class Series(NamedTuple):
    label: str
    x: np.ndarray
    y: np.ndarray
    style: str
    width: float
    color: str


def _fmt(value: float) -> str:
    return f"{value:.3f}"


def _tick_label(value: float) -> str:
    text = f"{value:.4g}"
    return "0" if text in ("-0", "0") else text


class LinePlot:
    """Accumulates line series and renders them as one SVG document."""

    def __init__(
        self,
        title: str = "",
        x_label: str = "",
        width: int = 720,
        height: int = 440,
        ticks: int = 5,
    ) -> None:
        self.title = title
        self.x_label = x_label
        self.width = width
        self.height = height
        self.ticks = ticks
        self.margin = (60, 20, 40, 50)  # left, right, top, bottom
        self.series: List[Series] = []

    def add(
        self,
        label: str,
        x: Sequence[float],
        y: Sequence[float],
        style: str = "solid",
        width: float = 1.0,
        color: str = "",
    ) -> "LinePlot":
        if style not in DASHES:
            raise ValueError(f"unknown line style {style!r}; expected one of {sorted(DASHES)}")
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if x.shape != y.shape:
            raise ValueError(f"x and y differ in shape: {x.shape} vs {y.shape}")
        color = color or PALETTE[len(self.series) % len(PALETTE)]
        self.series.append(Series(label, x, y, style, float(width), color))
        return self

    def _bounds(self) -> Tuple[float, float, float, float]:
        xs = [s.x[np.isfinite(s.x)] for s in self.series]
        ys = [s.y[np.isfinite(s.y)] for s in self.series]
        x_all = np.concatenate(xs) if xs else np.zeros(0)
        y_all = np.concatenate(ys) if ys else np.zeros(0)
        if x_all.size == 0 or y_all.size == 0:
            return 0.0, 1.0, -1.0, 1.0
        x0, x1 = float(x_all.min()), float(x_all.max())
        y0, y1 = float(y_all.min()), float(y_all.max())
        if x1 == x0:
            x0, x1 = x0 - 0.5, x1 + 0.5
        if y1 == y0:
            y0, y1 = y0 - 0.5, y1 + 0.5
        pad = 0.05 * (y1 - y0)
        return x0, x1, y0 - pad, y1 + pad

    def render(self) -> str:
        left, right, top, bottom = self.margin
        plot_w = self.width - left - right
        plot_h = self.height - top - bottom
        x0, x1, y0, y1 = self._bounds()

        def px(x: np.ndarray) -> np.ndarray:
            return left + (x - x0) / (x1 - x0) * plot_w

        def py(y: np.ndarray) -> np.ndarray:
            return top + (y1 - y) / (y1 - y0) * plot_h

        out = [PREAMBLE.format(width=self.width, height=self.height)]
        if self.title:
            out.append(
                f'<text x="{_fmt(self.width / 2)}" y="{_fmt(top / 2 + 5)}" '
                f'text-anchor="middle" font-family="sans-serif" font-size="14">'
                f"{escape(self.title)}</text>\n"
            )
        out.append(
            f'<rect x="{left}" y="{top}" width="{plot_w}" height="{plot_h}" '
            f'fill="none" stroke="#000000" stroke-width="1"/>\n'
        )

        for value in np.linspace(x0, x1, self.ticks):
            x = float(px(np.float64(value)))
            out.append(
                f'<line x1="{_fmt(x)}" y1="{top + plot_h}" x2="{_fmt(x)}" y2="{top + plot_h + 5}" '
                f'stroke="#000000"/>\n'
                f'<text x="{_fmt(x)}" y="{top + plot_h + 18}" text-anchor="middle" '
                f'font-family="sans-serif" font-size="10">{_tick_label(value)}</text>\n'
            )
        for value in np.linspace(y0, y1, self.ticks):
            y = float(py(np.float64(value)))
            out.append(
                f'<line x1="{left - 5}" y1="{_fmt(y)}" x2="{left}" y2="{_fmt(y)}" '
                f'stroke="#000000"/>\n'
                f'<text x="{left - 8}" y="{_fmt(y + 3)}" text-anchor="end" '
                f'font-family="sans-serif" font-size="10">{_tick_label(value)}</text>\n'
            )
        if self.x_label:
            out.append(
                f'<text x="{_fmt(left + plot_w / 2)}" y="{self.height - 8}" '
                f'text-anchor="middle" font-family="sans-serif" font-size="12">'
                f"{escape(self.x_label)}</text>\n"
            )

        for s in self.series:
            keep = np.isfinite(s.x) & np.isfinite(s.y)
            points = " ".join(
                f"{_fmt(a)},{_fmt(b)}" for a, b in zip(px(s.x[keep]), py(s.y[keep]))
            )
            dash = f' stroke-dasharray="{DASHES[s.style]}"' if DASHES[s.style] else ""
            out.append(
                f'<polyline points="{points}" fill="none" stroke="{s.color}" '
                f'stroke-width="{s.width:g}"{dash}><title>{escape(s.label)}</title></polyline>\n'
            )

        for i, s in enumerate(self.series):
            y = top + 14 + 16 * i
            x = left + plot_w - 150
            dash = f' stroke-dasharray="{DASHES[s.style]}"' if DASHES[s.style] else ""
            out.append(
                f'<line x1="{x}" y1="{y}" x2="{x + 30}" y2="{y}" stroke="{s.color}" '
                f'stroke-width="{s.width:g}"{dash}/>\n'
                f'<text x="{x + 36}" y="{y + 4}" font-family="sans-serif" font-size="11">'
                f"{escape(s.label)}</text>\n"
            )
        out.append(POSTAMBLE)
        return "".join(out)

    async def save(self, path: Union[str, "os.PathLike[str]"]) -> None:
        async with aiofiles.open(os.fspath(path), mode="w") as f:
            await f.write(self.render())
        logger.debug("wrote plot %r to %s", self.title, path)


def trajectory_plot(columns: Mapping[str, np.ndarray], title: str = "") -> LinePlot:
    """``rho - 1/2`` solid, ``upsilon + eta`` dashed, ``eta`` dot-dashed, ``upsilon`` dotted."""
    tau = columns["tau"]
    plot = LinePlot(title=title, x_label="tau")
    plot.add("rho - 1/2", tau, columns["rho_tilde"], style="solid", color=PALETTE[0])
    plot.add("upsilon + eta", tau, columns["eta_tilde"], style="dashed", color=PALETTE[1])
    plot.add("eta", tau, columns["eta"], style="dashdot", color=PALETTE[2])
    plot.add("upsilon", tau, columns["upsilon"], style="dotted", color=PALETTE[3])
    return plot


def indicator_plot(columns: Mapping[str, np.ndarray], title: str = "") -> LinePlot:
    """Volume and return in bold over thin ``rho - 1/2`` and ``eta``."""
    tau = columns["tau"]
    plot = LinePlot(title=title, x_label="tau")
    plot.add("V", tau, columns["V"], style="solid", width=2.5, color=PALETTE[0])
    plot.add("R", tau, columns["R"], style="dashdot", width=2.5, color=PALETTE[2])
    plot.add("rho - 1/2", tau, columns["rho_tilde"], style="solid", width=0.8, color=PALETTE[1])
    plot.add("eta", tau, columns["eta"], style="dashdot", width=0.8, color=PALETTE[3])
    return plot


def index_plot(columns: Mapping[str, np.ndarray], title: str = "") -> LinePlot:
    """Recursive PVI solid, NVI dashed, stylized PVI dotted."""
    tau = columns["tau"]
    plot = LinePlot(title=title, x_label="tau")
    plot.add("PVI", tau, columns["PVI"], style="solid", color=PALETTE[0])
    plot.add("NVI", tau, columns["NVI"], style="dashed", color=PALETTE[1])
    plot.add("PVI (stylized)", tau, columns["PVI_stylized"], style="dotted", color=PALETTE[2])
    return plot
