"""Performance benchmarks for moneyflow: integration, analysis and artifact writing."""

import asyncio
import tempfile
import time
from pathlib import Path

from moneyflow import (
    PRESETS,
    envelope_fit,
    integrate,
    load_config,
    recursive_pvi_nvi,
    run_scenario,
    sample_indicators,
)
from moneyflow.csvio import write_columns
from moneyflow.scenario import trajectory_table

METHODS = ("DOP853", "RK45")
REPEATS = 3


def best_of(func, repeats: int = REPEATS) -> float:
    """Fastest of ``repeats`` wall-clock timings of ``func()``."""
    timings = []
    for _ in range(repeats):
        start = time.perf_counter()
        func()
        timings.append(time.perf_counter() - start)
    return min(timings)


async def best_of_async(func, repeats: int = REPEATS) -> float:
    timings = []
    for _ in range(repeats):
        start = time.perf_counter()
        await func()
        timings.append(time.perf_counter() - start)
    return min(timings)


def benchmark_integration() -> list:
    """Time ``integrate`` for every preset and both Runge-Kutta pairs."""
    print("Integration (t_end = 50):")
    results = []
    for preset in sorted(PRESETS):
        for method in METHODS:
            cfg = load_config(preset=preset, flags=[("integrator.method", method)])
            traj = integrate(cfg.params, cfg.initial, cfg.integrator)
            elapsed = best_of(lambda: integrate(cfg.params, cfg.initial, cfg.integrator))
            print(f"  {preset:18s} {method:7s} {elapsed:.4f}s ({traj.taus.size} steps)")
            results.append({"preset": preset, "method": method, "seconds": elapsed})
    return results


def benchmark_analysis() -> dict:
    """Time the envelope fit and the indicator pipeline on one trajectory."""
    cfg = load_config(preset="fig-indicators")
    traj = integrate(cfg.params, cfg.initial, cfg.integrator)

    fit = best_of(lambda: envelope_fit(traj))
    indicators = best_of(lambda: recursive_pvi_nvi(sample_indicators(traj)))
    print("\nAnalysis:")
    print(f"  envelope_fit:       {fit:.4f}s")
    print(f"  indicators:         {indicators:.4f}s")
    return {"envelope_fit": fit, "indicators": indicators}


async def benchmark_artifacts() -> dict:
    """Time CSV emission and a full scenario run including SVG plots."""
    cfg = load_config(preset="fig-correct")
    traj = integrate(cfg.params, cfg.initial, cfg.integrator)
    table = trajectory_table(traj, cfg.sampling.dtau)
    rows = len(next(iter(table.values())))

    with tempfile.TemporaryDirectory() as tmp:
        csv_path = Path(tmp) / "trajectory.csv"
        csv_time = await best_of_async(lambda: write_columns(csv_path, table))
        scenario_cfg = cfg.with_output_dir(Path(tmp) / "run")
        scenario_time = await best_of_async(lambda: run_scenario(scenario_cfg))

    print("\nArtifacts:")
    print(f"  trajectory.csv:     {csv_time:.4f}s ({rows / csv_time:.0f} rows/s)")
    print(f"  full scenario:      {scenario_time:.4f}s")
    return {"csv": csv_time, "scenario": scenario_time}


async def run_benchmarks():
    """Run all benchmarks."""
    print("=" * 80)
    print("moneyflow Performance Benchmarks")
    print("=" * 80)
    print()

    results = {
        "integration": benchmark_integration(),
        "analysis": benchmark_analysis(),
        "artifacts": await benchmark_artifacts(),
    }

    print("\n" + "=" * 80)
    print("Summary")
    print("=" * 80)
    print(f"\nBest of {REPEATS} runs, wall-clock seconds. Lower is better.")
    return results


if __name__ == "__main__":
    asyncio.run(run_benchmarks())
