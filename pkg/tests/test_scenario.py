"""Tests for scenario runs, sweeps, indicator recomputation and lattice reports."""

import csv
import enum
import io
import json
import math
from pathlib import Path

import numpy as np
import pytest

from moneyflow import (
    ConfigError,
    Regime,
    SamplingError,
    TerminationKind,
    load_config,
    run_scenario,
    sweep,
)
from moneyflow.csvio import read_columns
from moneyflow.scenario import (
    INDICATOR_COLUMNS,
    TRAJECTORY_COLUMNS,
    item_dir_name,
    lattice_report,
    recompute_indicators,
    render_plots,
    resolve_axis,
    to_jsonable,
)

BOUNDARY = [
    "model.alpha1=0",
    "model.alpha2=1",
    "initial.eta=3",
    "integrator.rho_epsilon=1e-3",
]


def _cfg(tmp_path, preset="fig-correct", assignments=(), name="run", **flags):
    pairs = [("output.dir", str(tmp_path / name))]
    pairs.extend((key.replace("__", "."), value) for key, value in flags.items())
    return load_config(preset=preset, assignments=list(assignments), flags=pairs)


def _summary(path):
    return list(csv.DictReader(io.StringIO(Path(path).read_text())))


# ============================================================================
# Single scenarios
# ============================================================================


class TestRunScenario:
    @pytest.mark.asyncio
    async def test_artifacts(self, tmp_path):
        report = await run_scenario(_cfg(tmp_path))
        out = tmp_path / "run"
        for name in (
            "trajectory.csv",
            "indicators.csv",
            "trajectory.svg",
            "indicators.svg",
            "indices.svg",
            "report.json",
        ):
            assert (out / name).exists(), f"{name} missing"
        assert report.status == "ok"
        assert report.termination.kind is TerminationKind.COMPLETED
        assert report.classification.regime is Regime.NEUTRAL_OSCILLATION
        assert report.energy_drift < 1e-8

        table = await read_columns(out / "trajectory.csv", required=TRAJECTORY_COLUMNS)
        assert table["tau"].size == 1001
        assert table["tau"][1] == 0.05
        np.testing.assert_allclose(table["rho_tilde"], table["rho"] - 0.5)
        await read_columns(out / "indicators.csv", required=INDICATOR_COLUMNS)

    @pytest.mark.asyncio
    async def test_report_json(self, tmp_path):
        await run_scenario(_cfg(tmp_path, assignments=["model.alpha1=0.5"]))
        data = json.loads((tmp_path / "run" / "report.json").read_text())
        assert data["status"] == "ok"
        assert data["preset"] == "fig-correct"
        assert data["overrides"]["model.alpha1"] == 0.5
        assert data["termination"]["kind"] == "completed"
        assert data["classification"]["regime"] == "neutral-oscillation"
        assert data["settings"]["model"]["alpha1"] == 0.5
        assert data["prediction"]["omega"] == pytest.approx(math.sqrt(6.0))

    @pytest.mark.asyncio
    async def test_deterministic(self, tmp_path):
        await run_scenario(_cfg(tmp_path, name="a", integrator__t_end=10.0))
        await run_scenario(_cfg(tmp_path, name="b", integrator__t_end=10.0))
        for name in ("trajectory.csv", "indicators.csv", "trajectory.svg", "indices.svg"):
            a = (tmp_path / "a" / name).read_bytes()
            b = (tmp_path / "b" / name).read_bytes()
            assert a == b, f"{name} differs between identical runs"

    @pytest.mark.asyncio
    async def test_plots_regenerate_from_csv(self, tmp_path):
        await run_scenario(_cfg(tmp_path, integrator__t_end=10.0))
        out = tmp_path / "run"
        names = ("trajectory.svg", "indicators.svg", "indices.svg")
        original = {name: (out / name).read_bytes() for name in names}
        for name in names:
            (out / name).unlink()
        paths = await render_plots(out, "fig-correct")
        assert sorted(p.name for p in paths.values()) == sorted(names)
        for name in names:
            assert (out / name).read_bytes() == original[name], f"{name} not reproduced"

    @pytest.mark.asyncio
    async def test_without_svg(self, tmp_path):
        report = await run_scenario(_cfg(tmp_path, integrator__t_end=5.0, output__svg=False))
        assert not (tmp_path / "run" / "trajectory.svg").exists()
        assert "trajectory_svg" not in report.artifacts

    @pytest.mark.asyncio
    async def test_boundary_is_reported(self, tmp_path):
        report = await run_scenario(_cfg(tmp_path, preset=None, assignments=BOUNDARY))
        assert report.termination.kind is TerminationKind.BOUNDARY_REACHED
        assert report.status == "boundary-reached"
        assert (tmp_path / "run" / "trajectory.csv").exists()

    @pytest.mark.asyncio
    async def test_fit_failure_is_not_fatal(self, tmp_path):
        report = await run_scenario(
            _cfg(tmp_path, assignments=["initial.eta=0"], integrator__t_end=5.0)
        )
        assert report.fit is None
        assert report.fit_error
        assert report.status == "fit-failed"

    @pytest.mark.asyncio
    async def test_short_run_skips_indicators(self, tmp_path):
        report = await run_scenario(_cfg(tmp_path, integrator__t_end=0.06))
        assert report.divergence is None
        assert not (tmp_path / "run" / "indicators.csv").exists()


# ============================================================================
# Sweeps
# ============================================================================


class TestSweep:
    @pytest.mark.asyncio
    async def test_alpha1_sweep_is_neutral(self, tmp_path):
        result = await sweep(_cfg(tmp_path), "alpha1", [0.0, 0.5, 1.5], tmp_path / "sweep")
        assert not result.failures
        for value, report in zip(result.values, result.outcomes):
            assert abs(report.fit.damping) <= 0.002, f"alpha1={value}: {report.fit.damping}"
        assert (tmp_path / "sweep" / "001-alpha1=0.5" / "trajectory.csv").exists()
        rows = _summary(result.summary_path)
        assert [row["status"] for row in rows] == ["ok", "ok", "ok"]
        assert [float(row["value"]) for row in rows] == [0.0, 0.5, 1.5]

    @pytest.mark.asyncio
    async def test_near_equal_values_get_own_directories(self, tmp_path):
        values = [1.0000001, 1.0000002, 1.0000002]
        cfg = _cfg(tmp_path, integrator__t_end=5.0)
        result = await sweep(cfg, "alpha1", values, tmp_path / "sweep")
        assert not result.failures
        dirs = [tmp_path / "sweep" / item_dir_name(i, "alpha1", v) for i, v in enumerate(values)]
        assert len(set(dirs)) == 3
        for value, item_dir in zip(values, dirs):
            report = json.loads((item_dir / "report.json").read_text())
            assert report["overrides"]["model.alpha1"] == value, f"{item_dir} holds {report}"

    def test_item_dir_name(self):
        assert item_dir_name(1, "alpha1", 0.5) == "001-alpha1=0.5"
        assert item_dir_name(0, "c0", 1.0000001) != item_dir_name(0, "c0", 1.0000002)

    @pytest.mark.asyncio
    async def test_c0_sweep_regimes(self, tmp_path):
        cfg = _cfg(tmp_path, integrator__t_end=20.0)
        result = await sweep(cfg, "c0", [-0.1, 0.0, 0.1], tmp_path / "sweep")
        regimes = [row["regime"] for row in _summary(result.summary_path)]
        assert regimes == [
            "exponential-growth-of-S",
            "neutral-oscillation",
            "exponential-decay-of-S",
        ]

    @pytest.mark.asyncio
    async def test_empty_sweep(self, tmp_path):
        result = await sweep(_cfg(tmp_path), "alpha2", [], tmp_path / "sweep")
        assert result.outcomes == []
        assert _summary(result.summary_path) == []

    @pytest.mark.asyncio
    async def test_failing_item_is_flagged(self, tmp_path):
        cfg = _cfg(tmp_path, integrator__t_end=5.0)
        result = await sweep(cfg, "alpha2", [10.0, -1.0], tmp_path / "sweep")
        assert len(result.failures) == 1
        assert isinstance(result.outcomes[1], ConfigError)
        rows = _summary(result.summary_path)
        assert rows[0]["status"] in ("ok", "fit-failed")
        assert rows[1]["status"] == "error: ConfigError"

    def test_axes(self):
        assert resolve_axis("alpha1") == "model.alpha1"
        assert resolve_axis("c0") == "initial.c0"
        assert resolve_axis("integrator.t_end") == "integrator.t_end"
        with pytest.raises(ConfigError):
            resolve_axis("model.variant")
        with pytest.raises(ConfigError):
            resolve_axis("gamma")


# ============================================================================
# Indicator recomputation
# ============================================================================


class TestRecomputeIndicators:
    @pytest.mark.asyncio
    async def test_same_grid_reproduces_scenario(self, tmp_path):
        report = await run_scenario(_cfg(tmp_path, integrator__t_end=10.0))
        out = tmp_path / "again"
        divergence = await recompute_indicators(tmp_path / "run" / "trajectory.csv", out)
        assert divergence.max_gap == report.divergence.max_gap
        assert divergence.first_disagreement == report.divergence.first_disagreement
        first = await read_columns(tmp_path / "run" / "indicators.csv")
        second = await read_columns(out / "indicators.csv")
        for name in INDICATOR_COLUMNS:
            np.testing.assert_array_equal(second[name], first[name])

    @pytest.mark.asyncio
    async def test_coarser_grid(self, tmp_path):
        await run_scenario(_cfg(tmp_path, integrator__t_end=10.0))
        out = tmp_path / "coarse"
        await recompute_indicators(tmp_path / "run" / "trajectory.csv", out, dtau=0.1)
        table = await read_columns(out / "indicators.csv")
        assert table["tau"].size == 101
        assert json.loads((out / "indicators.json").read_text())["stride"] == 2
        assert (out / "indices.svg").exists()

    @pytest.mark.asyncio
    async def test_incompatible_grid(self, tmp_path):
        await run_scenario(_cfg(tmp_path, integrator__t_end=2.0, output__svg=False))
        with pytest.raises(SamplingError):
            await recompute_indicators(
                tmp_path / "run" / "trajectory.csv", tmp_path / "x", dtau=0.07
            )

    @pytest.mark.asyncio
    async def test_missing_columns(self, tmp_path):
        path = tmp_path / "bare.csv"
        path.write_text("tau,V\n0.0,1.0\n0.1,2.0\n")
        with pytest.raises(ConfigError):
            await recompute_indicators(path, tmp_path / "x")


# ============================================================================
# Lattice report and JSON conversion
# ============================================================================


class TestLatticeReport:
    def test_contents(self):
        report = lattice_report([1.0, 2.0, 2.0], beta=2.0, dt=0.1)
        np.testing.assert_allclose(report["plaquette_returns"], [0.5, 0.0])
        assert report["loop_returns"][0] == pytest.approx((1.0, -0.5))
        assert len(report["matrices"]) == 3
        for entry in report["matrices"]:
            assert entry["determinant"] == 0.0
            assert abs(entry["entries_determinant"]) <= 1e-15
            np.testing.assert_allclose(entry["hamiltonian_times_dt"], entry["hamiltonian"] * 0.1)

    def test_single_rate(self):
        report = lattice_report([1.5])
        assert report["discrete_action"] is None
        assert report["loop_returns"] == []

    def test_serializable(self):
        text = json.dumps(to_jsonable(lattice_report([1.0, 1.1, 0.9], beta=2.0, dt=0.1)))
        assert "NaN" not in text


class TestToJsonable:
    def test_values(self):
        class Color(enum.Enum):
            RED = "red"

        assert to_jsonable(Color.RED) == "red"
        assert to_jsonable(Path("a/b")) == "a/b"
        assert to_jsonable(np.float64(math.nan)) is None
        assert to_jsonable(np.array([1.0, math.inf])) == [1.0, None]
        assert to_jsonable(ValueError("bad")) == "ValueError: bad"
        assert to_jsonable({"k": (np.int64(3),)}) == {"k": [3]}
