"""Tests for the SVG line-chart renderer."""

import numpy as np
import pytest

from moneyflow.svg import DASHES, LinePlot, index_plot, indicator_plot, trajectory_plot


def _columns():
    tau = np.linspace(0.0, 5.0, 51)
    return {
        "tau": tau,
        "rho_tilde": 0.1 * np.sin(tau),
        "eta_tilde": 0.2 * np.cos(tau),
        "eta": 0.2 * np.cos(tau) - 0.05,
        "upsilon": 0.05 + 0.0 * tau,
        "V": np.abs(np.cos(tau)),
        "R": -np.sin(tau),
        "PVI": 1000.0 + tau,
        "NVI": 1000.0 - tau,
        "PVI_stylized": 1000.0 + 0.5 * tau,
    }


class TestLinePlot:
    def test_render_is_deterministic(self):
        first = trajectory_plot(_columns(), "demo").render()
        second = trajectory_plot(_columns(), "demo").render()
        assert first == second

    def test_document_structure(self):
        text = LinePlot(title="a < b").add("s", [0.0, 1.0], [0.0, 1.0]).render()
        assert text.startswith("<?xml")
        assert text.rstrip().endswith("</svg>")
        assert "a &lt; b" in text
        assert text.count("<polyline") == 1

    def test_dash_styles(self):
        text = trajectory_plot(_columns()).render()
        for style in ("dashed", "dashdot", "dotted"):
            assert f'stroke-dasharray="{DASHES[style]}"' in text, f"{style} line missing"
        assert text.count("<polyline") == 4

    def test_line_weights(self):
        text = indicator_plot(_columns()).render()
        assert 'stroke-width="2.5"' in text
        assert 'stroke-width="0.8"' in text

    def test_index_plot_labels(self):
        text = index_plot(_columns()).render()
        for label in ("PVI", "NVI", "PVI (stylized)"):
            assert f"<title>{label}</title>" in text

    def test_non_finite_points_are_skipped(self):
        plot = LinePlot().add("s", [0.0, 1.0, 2.0], [0.0, np.nan, 1.0])
        points = plot.render().split('points="')[1].split('"')[0]
        assert len(points.split()) == 2

    def test_constant_series(self):
        text = LinePlot().add("flat", [0.0, 1.0], [3.0, 3.0]).render()
        assert "nan" not in text

    def test_unknown_style(self):
        with pytest.raises(ValueError):
            LinePlot().add("s", [0.0], [0.0], style="wavy")

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            LinePlot().add("s", [0.0, 1.0], [0.0])

    @pytest.mark.asyncio
    async def test_save(self, tmp_path):
        plot = trajectory_plot(_columns(), "saved")
        path = tmp_path / "plot.svg"
        await plot.save(path)
        assert path.read_text() == plot.render()
