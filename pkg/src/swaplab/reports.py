"""Self-contained experiment and verification reports.

A report stores raw metrics plus, for each verdict, the metric value, the
comparison and the threshold, so :func:`recheck` can recompute every pass
bit from the stored file alone. Wall-clock time is written to a separate
sidecar so the CSV/JSON outputs stay byte-identical across runs.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

SCHEMA_VERSION = "swaplab-report/1"

_OPS = {
    "<": lambda v, t: v < t,
    "<=": lambda v, t: v <= t,
    ">=": lambda v, t: v >= t,
    "==": lambda v, t: v == t,
    "in": lambda v, t: t[0] <= v <= t[1],
}


def _clean(x):
    # JSON has no NaN/inf; store them as strings so reports stay valid JSON
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    if isinstance(x, dict):
        return {k: _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if hasattr(x, "item"):
        return _clean(x.item())
    return x


@dataclass(frozen=True)
class Check:
    name: str
    value: Any
    op: str
    threshold: Any
    note: str = ""

    def __post_init__(self):
        if self.op not in _OPS:
            raise ValueError(f"unknown comparison {self.op!r}")

    @property
    def passed(self) -> bool:
        return evaluate(self.value, self.op, self.threshold)

    def to_json(self) -> dict:
        out = {"name": self.name, "value": self.value, "op": self.op,
               "threshold": self.threshold, "passed": self.passed}
        if self.note:
            out["note"] = self.note
        return _clean(out)


def evaluate(value, op: str, threshold) -> bool:
    if isinstance(value, str) or value is None:
        return False
    return bool(_OPS[op](value, threshold))


@dataclass
class Report:
    name: str
    params: dict
    columns: list[str] = field(default_factory=list)
    rows: list[list] = field(default_factory=list)
    checks: list[Check] = field(default_factory=list)
    seed: int | None = None
    plot: dict | None = None

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name: str, value, op: str, threshold, note: str = "") -> Check:
        c = Check(name, value, op, threshold, note)
        self.checks.append(c)
        return c

    def to_json(self) -> dict:
        return _clean({
            "schema": SCHEMA_VERSION,
            "name": self.name,
            "params": self.params,
            "seed": self.seed,
            "columns": self.columns,
            "rows": self.rows,
            "checks": [c.to_json() for c in self.checks],
            "passed": self.passed,
        })

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True) + "\n"

    def csv_text(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["# schema", SCHEMA_VERSION, self.name])
        w.writerow(self.columns)
        for row in self.rows:
            w.writerow([repr(v) if isinstance(v, float) else v for v in row])
        return buf.getvalue()

    def summary_lines(self) -> list[str]:
        lines = []
        for c in self.checks:
            mark = "PASS" if c.passed else "FAIL"
            lines.append(f"[{mark}] {self.name}: {c.name} = {_fmt(c.value)} (need {c.op} {_fmt(c.threshold)})"
                         + (f"  {c.note}" if c.note else ""))
        return lines


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.4g}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    return str(v)


def recheck(report: dict) -> dict[str, bool]:
    """Recompute each verdict from a stored report's values and thresholds."""
    if report.get("schema") != SCHEMA_VERSION:
        raise ValueError(f"unsupported report schema {report.get('schema')!r}")
    return {c["name"]: evaluate(c["value"], c["op"], c["threshold"]) for c in report["checks"]}


def write_report(report: Report, out_dir: Path | str, elapsed: float | None = None) -> dict[str, Path]:
    """Write ``<name>.json``, ``<name>.csv`` and, when plot data exists, ``<name>.svg``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stem = report.name
    paths = {"json": out / f"{stem}.json", "csv": out / f"{stem}.csv"}
    paths["json"].write_text(report.dumps())
    paths["csv"].write_text(report.csv_text())
    if report.plot:
        paths["svg"] = out / f"{stem}.svg"
        render_plot(report, paths["svg"])
    if elapsed is not None:
        paths["timing"] = out / f"{stem}.timing.json"
        paths["timing"].write_text(json.dumps({"name": stem, "wall_clock_s": elapsed}) + "\n")
    return paths


def render_plot(report: Report, path: Path) -> None:
    """Static SVG of one sweep; deterministic bytes for identical data."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    spec = report.plot
    cols = report.columns
    x = [row[cols.index(spec["x"])] for row in report.rows]
    plt.rcParams["svg.hashsalt"] = "swaplab"
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for key in spec["y"]:
        y = [row[cols.index(key)] for row in report.rows]
        ax.plot(x, y, marker=spec.get("marker", "o"), linestyle=spec.get("linestyle", "-"), label=key)
    if spec.get("logx"):
        ax.set_xscale("log")
    if spec.get("logy"):
        ax.set_yscale("log")
    ax.set_xlabel(spec["x"])
    ax.set_ylabel(spec.get("ylabel", ", ".join(spec["y"])))
    ax.set_title(report.name)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def rows_sorted(rows: Sequence[Sequence], key_index: int = 0) -> list[list]:
    return [list(r) for r in sorted(rows, key=lambda r: r[key_index])]
