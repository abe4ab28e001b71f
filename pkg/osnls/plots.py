"""Emit plain-text matplotlib scripts for the CSV reports. Nothing is rendered here."""
from __future__ import annotations

from pathlib import Path
from typing import List, Sequence

from osnls.errors import InvalidParamsError, MissingReportError
from osnls.reports import read_header, read_table

SCRIPT_HEADER = '''"""Plot script for {csv_name} (generated; edit freely)."""
import csv
from pathlib import Path

import matplotlib.pyplot as plt

plt.rc("figure", figsize=[5, 3.5])
plt.rc("axes", linewidth=0.5)

HERE = Path(__file__).resolve().parent
with open(HERE / "{csv_name}", encoding="utf-8", newline="") as f:
    ROWS = list(csv.DictReader(f))
'''

LOGLOG_BODY = '''
points = [
    (float(r["{x}"]), float(r["{y}"]))
    for r in ROWS
    if r["status"].startswith("completed") and float(r["{y}"]) > 0
]
fig, ax = plt.subplots()
ax.loglog([p[0] for p in points], [p[1] for p in points], "o-")
ax.set_xlabel("omega")
ax.set_ylabel("{y}")
fig.tight_layout()
fig.savefig(HERE / "{output}")
'''

DUHAMEL_BODY = '''
points = [(float(r["omega"]), float(r["gap"])) for r in ROWS if r["q"] == "{q}" and r["r"] == "{r}"]
fig, ax = plt.subplots()
ax.loglog([p[0] for p in points], [max(p[1], 1e-300) for p in points], "o-")
ax.set_xlabel("omega")
ax.set_ylabel("duhamel gap (q={q}, r={r})")
fig.tight_layout()
fig.savefig(HERE / "{output}")
'''

DRIFT_BODY = '''
times = [float(r["time"]) for r in ROWS]
fig, ax = plt.subplots()
for column in ("mass", "hamiltonian"):
    values = [float(r[column]) for r in ROWS]
    base = values[0] if values[0] != 0 else 1.0
    ax.semilogy(times, [abs(v - values[0]) / abs(base) + 1e-300 for v in values], label=column)
ax.set_xlabel("t")
ax.set_ylabel("relative drift")
ax.legend()
fig.tight_layout()
fig.savefig(HERE / "{output}")
'''

CONSERVATION_BODY = '''
labels = ["%s w=%s dt=%s" % (r["label"], r["omega"], r["dt"]) for r in ROWS]
fig, ax = plt.subplots()
positions = range(len(ROWS))
ax.bar([p - 0.2 for p in positions], [float(r["mass_drift"]) for r in ROWS], width=0.4, label="mass")
ax.bar([p + 0.2 for p in positions], [float(r["hamiltonian_drift"]) for r in ROWS], width=0.4, label="hamiltonian")
ax.set_yscale("log")
ax.set_xticks(list(positions))
ax.set_xticklabels(labels, rotation=60, ha="right", fontsize=6)
ax.legend()
fig.tight_layout()
fig.savefig(HERE / "{output}")
'''

SUITE_BODY = '''
rows = [r for r in ROWS if r["grid_size"] == "{grid}"]
fig, ax = plt.subplots()
ax.plot(range(len(rows)), [float(r["ratio_or_min_constant"]) for r in rows], "o")
ax.set_xticks(range(len(rows)))
ax.set_xticklabels([r["family_member"] for r in rows], rotation=90, fontsize=5)
ax.set_ylabel("ratio or minimal constant")
ax.set_title("{grid}")
fig.tight_layout()
fig.savefig(HERE / "{output}")
'''


def _write(path: Path, text: str) -> Path:
    path.write_text(text, encoding="utf-8")
    return path


def _scripts_for(csv_path: Path) -> List[Path]:
    header = read_header(csv_path)
    rows = read_table(csv_path)
    stem = csv_path.stem
    head = SCRIPT_HEADER.format(csv_name=csv_path.name)
    directory = csv_path.parent
    if not rows:
        return [_write(directory / f"plot_{stem}.py", head)]

    if "sup_h1_gap" in header:
        columns = ["sup_h1_gap"] + [c for c in header if c.startswith("gap_")]
        return [
            _write(
                directory / f"plot_{stem}_{c}.py",
                head + LOGLOG_BODY.format(x="omega", y=c, output=f"{stem}_{c}.png"),
            )
            for c in columns
        ]
    if header == ["omega", "q", "r", "gap"]:
        pairs = []
        for r in rows:
            if (r["q"], r["r"]) not in pairs:
                pairs.append((r["q"], r["r"]))
        return [
            _write(
                directory / f"plot_{stem}_q{q}_r{r}.py",
                head + DUHAMEL_BODY.format(q=q, r=r, output=f"{stem}_q{q}_r{r}.png"),
            )
            for q, r in pairs
        ]
    if "mass_drift" in header:
        return [_write(directory / f"plot_{stem}.py", head + CONSERVATION_BODY.format(output=f"{stem}.png"))]
    if header[:3] == ["time", "mass", "hamiltonian"]:
        return [_write(directory / f"plot_{stem}.py", head + DRIFT_BODY.format(output=f"{stem}.png"))]
    if "ratio_or_min_constant" in header:
        grids = []
        for r in rows:
            if r["grid_size"] not in grids:
                grids.append(r["grid_size"])
        return [
            _write(
                directory / f"plot_{stem}_{g}.py",
                head + SUITE_BODY.format(grid=g, output=f"{stem}_{g}.png"),
            )
            for g in grids
        ]
    raise InvalidParamsError(f"Unrecognized report columns in {csv_path}: {header!r}")


def emit_plot_scripts(report_paths: Sequence[Path]) -> List[Path]:
    """Write plot_<report>*.py next to each report; re-emission for identical reports is byte-identical."""
    paths = [Path(p) for p in report_paths]
    missing = [str(p) for p in paths if not p.is_file()]
    if missing:
        raise MissingReportError(f"Report(s) not found: {', '.join(missing)}")
    scripts: List[Path] = []
    for path in paths:
        scripts.extend(_scripts_for(path))
    return scripts
