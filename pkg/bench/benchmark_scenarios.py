#!/usr/bin/env python3
from __future__ import annotations

import argparse
import contextlib
import io
import json
import math
import statistics
import sys
import time
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional

import pandas as pd

PROJECT_ROOT = Path(__file__).resolve().parents[1]
SCRIPT_DIR = Path(__file__).resolve().parent
DEFAULT_CONFIG_PATH = SCRIPT_DIR / "benchmark_scenarios.config.json"
sys.path.insert(0, str(PROJECT_ROOT))

from cyclescope import run as run_cli
from utils.artifact_writer import write_csv, write_json


def _parse_csv_list(raw: str) -> List[str]:
    return [x.strip() for x in str(raw or "").split(",") if x.strip()]


def _percentile(values: List[float], p: float) -> float:
    if not values:
        return 0.0
    if len(values) == 1:
        return float(values[0])
    ranked = sorted(float(v) for v in values)
    idx = max(0, min(len(ranked) - 1, math.ceil((p / 100.0) * len(ranked)) - 1))
    return float(ranked[idx])


@dataclass
class ScenarioSpec:
    name: str
    argv: List[str]
    expected_exit: int
    budget_seconds: Optional[float] = None


def _default_config() -> Dict[str, Any]:
    specs = "specs"
    return {
        "scenarios": [
            {
                "name": "fig3_check_t3",
                "argv": ["check", "--spec", f"{specs}/fig3.toml", "--theorem", "t3"],
                "expected_exit": 0,
            },
            {
                "name": "fig3_cycle",
                "argv": ["cycle", "--spec", f"{specs}/fig3.toml"],
                "expected_exit": 0,
                "budget_seconds": 60,
            },
            {"name": "fig4_cycle", "argv": ["cycle", "--spec", f"{specs}/fig4.toml"], "expected_exit": 0},
            {"name": "fig1_portrait", "argv": ["portrait", "--spec", f"{specs}/fig1.toml"], "expected_exit": 0},
            {"name": "fig2_isoclines", "argv": ["isoclines", "--spec", f"{specs}/fig2.toml"], "expected_exit": 0},
            {
                "name": "massera_classical_cycle",
                "argv": ["cycle", "--spec", f"{specs}/massera_classical.toml"],
                "expected_exit": 65,
            },
            {"name": "hopf_scan", "argv": ["hopf-scan", "--spec", f"{specs}/hopf.toml"], "expected_exit": 0},
        ],
        "only": "",
        "warmup": 0,
        "repeats": 1,
        "output_dir": str(PROJECT_ROOT / "outputs" / "benchmarks"),
        "dry_run_scenarios": False,
    }


def _write_config_template(path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as f:
        json.dump(_default_config(), f, ensure_ascii=False, indent=2)


def _load_config(path: Path) -> Dict[str, Any]:
    if not path.exists():
        _write_config_template(path)
        raise FileNotFoundError(
            f"Config file not found. A template was created at: {path}\n"
            "Edit it once, then run this script again with no parameters."
        )
    with path.open("r", encoding="utf-8") as f:
        data = json.load(f)
    if not isinstance(data, dict):
        raise ValueError(f"Config at {path} must be a JSON object.")
    return data


def _pick(cli_value: Any, cfg_value: Any, default_value: Any = None) -> Any:
    if cli_value is not None:
        if isinstance(cli_value, str):
            if cli_value.strip():
                return cli_value
        else:
            return cli_value
    if cfg_value is not None:
        if isinstance(cfg_value, str):
            if cfg_value.strip():
                return cfg_value
        else:
            return cfg_value
    return default_value


def _build_scenarios(raw: List[Dict[str, Any]], only: List[str]) -> List[ScenarioSpec]:
    scenarios: List[ScenarioSpec] = []
    for item in raw:
        name = str(item.get("name") or "").strip()
        argv = [str(a) for a in item.get("argv") or []]
        if not name or not argv:
            raise ValueError(f"scenario needs a name and argv, got {item}")
        if only and name not in only:
            continue
        budget = item.get("budget_seconds")
        scenarios.append(
            ScenarioSpec(
                name=name,
                argv=argv,
                expected_exit=int(item.get("expected_exit", 0)),
                budget_seconds=float(budget) if budget is not None else None,
            )
        )
    if not scenarios:
        raise ValueError(f"no scenario selected (only={only})")
    return scenarios


def _run_one(spec: ScenarioSpec, out_dir: Path) -> Dict[str, Any]:
    argv = list(spec.argv)
    # spec paths in the config are relative to the project root
    for i, token in enumerate(argv[:-1]):
        if token == "--spec" and not Path(argv[i + 1]).is_absolute():
            argv[i + 1] = str(PROJECT_ROOT / argv[i + 1])
    if argv[0] != "check":
        argv += ["--out", str(out_dir)]
    stdout, stderr = io.StringIO(), io.StringIO()
    t0 = time.perf_counter()
    with contextlib.redirect_stdout(stdout), contextlib.redirect_stderr(stderr):
        code = run_cli(argv)
    total = time.perf_counter() - t0
    return {
        "total_seconds": total,
        "exit_code": int(code),
        "stderr_tail": stderr.getvalue().strip().splitlines()[-1:] or [""],
    }


def _summarize(raw_runs: List[Dict[str, Any]], scenarios: List[ScenarioSpec]) -> List[Dict[str, Any]]:
    by_name = {s.name: s for s in scenarios}
    grouped: Dict[str, List[Dict[str, Any]]] = {}
    for row in raw_runs:
        grouped.setdefault(str(row["scenario_name"]), []).append(row)

    out: List[Dict[str, Any]] = []
    for scenario_name, rows in grouped.items():
        totals = [float(r["total_seconds"]) for r in rows]
        spec = by_name[scenario_name]
        out.append(
            {
                "scenario_name": scenario_name,
                "repeats": len(rows),
                "mean_seconds": statistics.fmean(totals),
                "median_seconds": statistics.median(totals),
                "p95_seconds": _percentile(totals, 95),
                "min_seconds": min(totals),
                "max_seconds": max(totals),
                "std_seconds": statistics.pstdev(totals) if len(totals) > 1 else 0.0,
                "exit_ok": all(int(r["exit_code"]) == spec.expected_exit for r in rows),
                "within_budget": spec.budget_seconds is None or max(totals) <= spec.budget_seconds,
            }
        )
    out.sort(key=lambda x: str(x["scenario_name"]))
    return out


def _print_summary(summary_rows: List[Dict[str, Any]]) -> None:
    header = (
        f"{'scenario':28} {'mean(s)':>10} {'p95(s)':>10} {'std(s)':>10} "
        f"{'exit':>6} {'budget':>7}"
    )
    print(header)
    print("-" * len(header))
    for r in summary_rows:
        print(
            f"{str(r['scenario_name']):28} "
            f"{float(r['mean_seconds']):10.3f} "
            f"{float(r['p95_seconds']):10.3f} "
            f"{float(r['std_seconds']):10.3f} "
            f"{'ok' if r['exit_ok'] else 'FAIL':>6} "
            f"{'ok' if r['within_budget'] else 'OVER':>7}"
        )


def _build_arg_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        description=(
            "Time the figure-reproduction scenarios end to end through the CLI, "
            "then export CSV + JSON. No args is supported via config file."
        )
    )
    p.add_argument(
        "--config",
        default=str(DEFAULT_CONFIG_PATH),
        help="JSON config path (default: bench/benchmark_scenarios.config.json).",
    )
    p.add_argument(
        "--write-config-template",
        action="store_true",
        help="Write a config template and exit.",
    )
    p.add_argument("--only", default=None, help="Comma-separated scenario names to run.")
    p.add_argument("--warmup", type=int, default=None, help="Warmup runs per scenario (not recorded).")
    p.add_argument("--repeats", type=int, default=None, help="Measured runs per scenario.")
    p.add_argument(
        "--output-dir",
        default=None,
        help="Directory where benchmark artifacts are written.",
    )
    p.add_argument(
        "--dry-run-scenarios",
        action="store_true",
        help="Print the scenarios and exit without running them.",
    )
    return p


def main() -> int:
    args = _build_arg_parser().parse_args()
    config_path = Path(args.config).resolve()
    if args.write_config_template:
        _write_config_template(config_path)
        print(f"Wrote config template to: {config_path}")
        return 0

    cfg = _load_config(config_path)
    settings = {
        "only": _parse_csv_list(_pick(args.only, cfg.get("only"), "")),
        "warmup": int(_pick(args.warmup, cfg.get("warmup"), 0)),
        "repeats": int(_pick(args.repeats, cfg.get("repeats"), 1)),
        "output_dir": _pick(args.output_dir, cfg.get("output_dir"), str(PROJECT_ROOT / "outputs" / "benchmarks")),
        "dry_run_scenarios": bool(cfg.get("dry_run_scenarios", False)) or bool(args.dry_run_scenarios),
        "config_path": str(config_path),
    }
    if settings["warmup"] < 0:
        raise ValueError("--warmup must be >= 0")
    if settings["repeats"] < 1:
        raise ValueError("--repeats must be >= 1")

    scenarios = _build_scenarios(list(cfg.get("scenarios") or _default_config()["scenarios"]), settings["only"])
    if settings["dry_run_scenarios"]:
        print(json.dumps([{"name": s.name, "argv": s.argv, "expected_exit": s.expected_exit} for s in scenarios], indent=2))
        return 0

    run_id = datetime.now().strftime("%Y%m%d_%H%M%S")
    out_dir = Path(str(settings["output_dir"])).resolve() / f"cyclescope_benchmark_{run_id}"
    out_dir.mkdir(parents=True, exist_ok=True)

    raw_runs: List[Dict[str, Any]] = []
    for spec in scenarios:
        print(f"\n[scenario] {spec.name}")
        artifacts = out_dir / spec.name
        for i in range(int(settings["warmup"])):
            _run_one(spec, artifacts)
            print(f"  warmup {i + 1}/{settings['warmup']} done")

        for rep in range(1, int(settings["repeats"]) + 1):
            out = _run_one(spec, artifacts)
            raw_runs.append(
                {
                    "scenario_name": spec.name,
                    "iteration": rep,
                    "total_seconds": float(out["total_seconds"]),
                    "exit_code": out["exit_code"],
                    "expected_exit": spec.expected_exit,
                    "stderr_tail": out["stderr_tail"][0],
                }
            )
            print(f"  run {rep}/{settings['repeats']}: {out['total_seconds']:.3f}s (exit={out['exit_code']})")

    summary_rows = _summarize(raw_runs, scenarios)
    write_csv(out_dir, "benchmark_raw_runs", pd.DataFrame(raw_runs))
    write_csv(out_dir, "benchmark_summary", pd.DataFrame(summary_rows))
    write_json(
        out_dir,
        "benchmark_manifest",
        {
            "generated_at": datetime.now().isoformat(),
            "project_root": str(PROJECT_ROOT),
            "settings": settings,
            "scenario_names": [s.name for s in scenarios],
        },
    )

    print("\nBenchmark summary")
    _print_summary(summary_rows)
    print(f"\nArtifacts written to: {out_dir}")
    failed = [r["scenario_name"] for r in summary_rows if not (r["exit_ok"] and r["within_budget"])]
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
