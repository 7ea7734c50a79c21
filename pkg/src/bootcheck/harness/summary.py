"""Summary tables, acceptance checks, plot-data files and figures."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..diagnostics import (
    INCONSISTENCY_THRESHOLD,
    TrendVerdict,
    chebyshev_bound,
    pair_report,
    trend_verdict,
)
from ..inference import uniformity_distance
from .records import ExperimentRecord


@dataclass
class Check:
    name: str
    passed: bool
    detail: str


@dataclass
class Summary:
    tables: dict[str, list[dict]]
    trends: dict[str, TrendVerdict]
    checks: list[Check] = field(default_factory=list)
    plot_data: dict[str, list[tuple[int, float]]] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


def fmt(v) -> str:
    """Six significant digits for reals; blanks for missing values."""
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def _median(vals) -> float:
    vals = [v for v in vals if v is not None]
    return float(np.median(vals)) if vals else math.nan


def _q75(vals) -> float:
    vals = [v for v in vals if v is not None]
    return float(np.quantile(vals, 0.75)) if vals else math.nan


def _cells(records) -> dict[tuple[int, int], list[ExperimentRecord]]:
    out: dict[tuple[int, int], list[ExperimentRecord]] = {}
    for r in sorted(records, key=lambda r: r.sort_key):
        out.setdefault(r.cell, []).append(r)
    return out


def _diagonal(cells) -> list[tuple[int, int]]:
    """Cells that are increasing in both n and M, in ladder order."""
    ns = sorted({n for n, _ in cells})
    ms = sorted({m for _, m in cells})
    if len(ns) == len(ms) and all((n, m) in cells for n, m in zip(ns, ms)):
        return list(zip(ns, ms))
    return sorted(cells)


def d_table(cells) -> list[dict]:
    rows = []
    for (n, m), recs in cells.items():
        errs = [r.d_bl_err for r in recs if r.d_bl_err is not None]
        rows.append(
            {
                "n": n,
                "M": m,
                "N": len(recs),
                "median_d_k": _median([r.d_k for r in recs]),
                "q75_d_k": _q75([r.d_k for r in recs]),
                "median_d_bl": _median([r.d_bl for r in recs]),
                "q75_d_bl": _q75([r.d_bl for r in recs]),
                "max_d_bl_thinning_err": max(errs) if errs else math.nan,
                "chebyshev_bound": chebyshev_bound(m),
            }
        )
    return rows


def a_table(cells, limit) -> list[dict]:
    rows = []
    by_n: dict[int, list[ExperimentRecord]] = {}
    for (n, m), recs in cells.items():
        if m >= 2 and n not in by_n:
            by_n[n] = recs
    for n, recs in sorted(by_n.items()):
        triples = np.array([(r.s_n, r.s1, r.s2) for r in recs])
        rep = pair_report(triples, limit, n)
        rows.append(
            {
                "n": n,
                "N": rep.reps,
                "d_k_Sn": rep.marginal_dk[0],
                "d_k_S1": rep.marginal_dk[1],
                "d_k_S2": rep.marginal_dk[2],
                "indep_gap_S1_S2": rep.independence_gaps["S1,S2"],
                "indep_gap_Sn_S1": rep.independence_gaps["Sn,S1"],
                "limit_gap_S1_S2": rep.limit_gaps["S1,S2"],
                "limit_gap_Sn_S1": rep.limit_gaps["Sn,S1"],
                "replicate_zero_freq": rep.zero_freq,
            }
        )
    return rows


def inference_table(cells) -> list[dict]:
    rows = []
    for (n, m), recs in cells.items():
        alphas = recs[0].alphas
        p = [r.p_value for r in recs]
        for k, a in enumerate(alphas):
            row = {
                "n": n,
                "M": m,
                "N": len(recs),
                "alpha": a,
                "reject_rate": float(np.mean([r.reject[k] for r in recs])),
                "coverage": math.nan,
                "one_sided_rate": math.nan,
                "pvalue_d_k_uniform": uniformity_distance(p),
                "pvalue_tol": pvalue_tolerance(len(recs), m),
            }
            if recs[0].ci_hit is not None:
                row["coverage"] = float(np.mean([r.ci_hit[k] for r in recs]))
                row["one_sided_rate"] = float(np.mean([r.one_sided[k] for r in recs]))
            rows.append(row)
    return rows


def gap_tolerance(threshold: float, reps: int) -> float:
    """Consistency tolerance for pair gaps: the threshold, widened for small N.

    2.5 / sqrt(N) is about five times the typical product-gap noise, so small
    pilot runs are not failed on Monte Carlo error alone.
    """
    return max(threshold, 2.5 / math.sqrt(reps))


def coverage_tolerance(alpha: float, reps: int, m: int) -> float:
    """Three binomial standard errors plus the 1/M quantile granularity."""
    return 3.0 * math.sqrt(alpha * (1.0 - alpha) / reps) + 1.0 / m


def pvalue_tolerance(reps: int, m: int) -> float:
    """95% DKW band for ``reps`` p-values plus the 1/M granularity."""
    return math.sqrt(math.log(2.0 / 0.05) / (2.0 * reps)) + 1.0 / m


def summarize(
    records,
    limit=None,
    expect: str = "consistent",
    threshold: float = INCONSISTENCY_THRESHOLD,
    null_holds: bool = True,
    conditional=None,
    inference: bool = True,
) -> Summary:
    """Per-assertion tables, trend verdicts along the ladder and pass/fail checks.

    ``inference=False`` still tabulates the interval and p-value columns but
    skips their checks.
    """
    records = list(records)
    if not records:
        raise ValueError("cannot summarize an empty record set")
    cells = _cells(records)
    diag = _diagonal(cells)
    tables: dict[str, list[dict]] = {}
    trends: dict[str, TrendVerdict] = {}
    checks: list[Check] = []
    plots: dict[str, list[tuple[int, float]]] = {}
    consistent = expect == "consistent"

    has_d = any(r.d_k is not None for r in records)
    if has_d:
        tables["d"] = d_table(cells)
        by_cell = {(row["n"], row["M"]): row for row in tables["d"]}
        for metric in ("d_k", "d_bl"):
            vals = [by_cell[c][f"median_{metric}"] for c in diag]
            if all(math.isfinite(v) for v in vals):
                trends[metric] = trend_verdict(metric, diag, vals)
                plots[f"median_{metric}"] = list(enumerate(vals))
        last = by_cell[diag[-1]]["median_d_k"]
        if consistent:
            for metric, tv in trends.items():
                if len(diag) > 1:
                    detail = tv.verdict
                    if tv.violations:
                        detail += " at " + ", ".join(f"(n={n}, M={m})" for n, m in tv.violations)
                    checks.append(Check(f"{metric} median decreasing along ladder", tv.decreasing, detail))
        else:
            checks.append(
                Check(
                    "d_k stays above inconsistency threshold",
                    last > threshold,
                    f"final median d_k {fmt(last)} vs {fmt(threshold)}",
                )
            )

    if limit is not None and any(r.s2 is not None for r in records):
        tables["a"] = a_table(cells, limit)
        if tables["a"]:
            top = tables["a"][-1]
            gaps = max(top["limit_gap_S1_S2"], top["limit_gap_Sn_S1"])
            marg = max(top["d_k_Sn"], top["d_k_S1"], top["d_k_S2"])
            if consistent:
                tol = gap_tolerance(threshold, top["N"])
                checks.append(
                    Check(
                        "pair gaps and marginals below threshold",
                        gaps < tol and marg < tol,
                        f"n={top['n']}: max limit gap {fmt(gaps)}, "
                        f"max marginal d_k {fmt(marg)}, tolerance {fmt(tol)}",
                    )
                )
            else:
                checks.append(
                    Check(
                        "replicate pair gap flags inconsistency",
                        top["limit_gap_S1_S2"] > threshold,
                        f"n={top['n']}: limit gap (S1, S2) {fmt(top['limit_gap_S1_S2'])}",
                    )
                )

    tables["inference"] = inference_table(cells)
    if consistent and inference:
        for row in tables["inference"]:
            if diag and (row["n"], row["M"]) != diag[-1]:
                continue
            if math.isfinite(row["coverage"]):
                tol = coverage_tolerance(row["alpha"], row["N"], row["M"])
                err = abs(row["coverage"] - (1.0 - row["alpha"]))
                checks.append(
                    Check(
                        f"coverage at alpha={fmt(row['alpha'])}",
                        err <= tol,
                        f"coverage {fmt(row['coverage'])}, tolerance {fmt(tol)}",
                    )
                )
            if null_holds:
                d = row["pvalue_d_k_uniform"]
                checks.append(
                    Check(
                        "p-values uniform",
                        d < row["pvalue_tol"],
                        f"d_k {fmt(d)} vs {fmt(row['pvalue_tol'])}",
                    )
                )
                break

    if conditional is not None:
        tables["c"] = [
            {
                "n": conditional.n,
                "M_inner": conditional.m_inner,
                "datasets": int(conditional.d_k.size),
                "median_d_k": conditional.quantile(0.5),
                "q90_d_k": conditional.quantile(0.9),
                "median_d_bl": conditional.quantile(0.5, "d_bl"),
                "chebyshev_bound": conditional.chebyshev_bound,
                "label": conditional.label,
            }
        ]

    for name, tv in trends.items():
        tables.setdefault("trends", []).append(
            {
                "metric": name,
                "verdict": tv.verdict,
                "violations": ";".join(f"n={n} M={m}" for n, m in tv.violations),
            }
        )
    return Summary(tables, trends, checks, plots)


def _write_csv(path: Path, rows: list[dict]) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(rows[0]))
        for row in rows:
            writer.writerow([fmt(v) for v in row.values()])


def write_plot_data(path: Path, points, label: str) -> None:
    with path.open("w", encoding="utf-8") as fh:
        fh.write(f"# x = ladder index, y = {label}\n")
        for x, y in points:
            fh.write(f"{x} {fmt(y)}\n")


def render_figures(summary: Summary, out: Path) -> list[Path]:
    """PNG renderings of the ladder trends, next to the plot-data files."""
    if not summary.plot_data:
        return []
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(5.0, 3.5))
    for name, pts in sorted(summary.plot_data.items()):
        xs, ys = zip(*pts)
        ax.plot(xs, ys, marker="o", label=name.replace("median_", "median "))
    cells = summary.trends[next(iter(summary.trends))].cells if summary.trends else []
    if cells:
        ax.set_xticks(range(len(cells)))
        ax.set_xticklabels([f"n={n}\nM={m}" for n, m in cells], fontsize=8)
    ax.set_yscale("log")
    ax.set_ylabel("distance to oracle")
    ax.legend(frameon=False)
    fig.tight_layout()
    path = out / "ladder.png"
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return [path]


def write_summary(summary: Summary, out) -> dict[str, Path]:
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    files = {}
    for name, rows in summary.tables.items():
        if rows:
            path = out / f"summary_{name}.csv"
            _write_csv(path, rows)
            files[f"summary_{name}"] = path
    checks_path = out / "checks.csv"
    _write_csv(
        checks_path,
        [{"check": c.name, "passed": c.passed, "detail": c.detail} for c in summary.checks]
        or [{"check": "", "passed": "", "detail": "no checks enabled"}],
    )
    files["checks"] = checks_path
    for name, pts in summary.plot_data.items():
        path = out / f"plot_{name}.dat"
        write_plot_data(path, pts, name.replace("_", " "))
        files[f"plot_{name}"] = path
    for path in render_figures(summary, out):
        files[path.stem] = path
    return files


def format_summary(summary: Summary) -> str:
    lines = []
    for name, rows in summary.tables.items():
        if not rows:
            continue
        lines.append(f"[{name}]")
        keys = list(rows[0])
        lines.append("  ".join(keys))
        for row in rows:
            lines.append("  ".join(fmt(row[k]) for k in keys))
        lines.append("")
    for c in summary.checks:
        lines.append(f"{'PASS' if c.passed else 'FAIL'}  {c.name}: {c.detail}")
    return "\n".join(lines)
