"""Run an experiment: oracles, per-(cell, epoch) work items, persisted records."""
from __future__ import annotations

import hashlib
import json
import math
import time
import traceback
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from ..diagnostics import (
    LIMIT,
    ConditionalReport,
    check_assertion_c,
    data_seed,
    oracle_law,
    oracle_seed,
    replicate_distances,
    scenario_key,
)
from ..inference import EmpiricalDF, approx_p_value, basic_ci, bootstrap_test, generalized_inverse
from ..metrics import DiscreteMeasure
from ..rand_streams import Stream, StreamKey
from ..statistics import ScenarioId, draw_sample, limit_law, replicate_set
from .config import ExperimentConfig
from .records import ExperimentRecord, serialize, write_records


class RunError(RuntimeError):
    """A work item failed; ``item`` is its (n, M, epoch)."""

    def __init__(self, item, detail: str):
        super().__init__(f"work item n={item[0]} M={item[1]} epoch={item[2]} failed:\n{detail}")
        self.item = item


@dataclass
class RunContext:
    config: ExperimentConfig
    oracles: dict

    def item_list(self) -> list[tuple[int, int, int]]:
        cfg = self.config
        return [
            (n, m, e) for n, m in cfg.ladder.cell_list() for e in range(cfg.ladder.outer_reps)
        ]


@dataclass
class RunResult:
    config: ExperimentConfig
    records: list[ExperimentRecord]
    limit: object
    conditional: ConditionalReport | None = None
    files: dict[str, Path] = field(default_factory=dict)


def evaluate_item(ctx: RunContext, n: int, m: int, epoch: int) -> ExperimentRecord:
    """One outer repetition of one cell: dataset, replicates, distances, inference."""
    cfg = ctx.config
    scn = cfg.scenario
    start = time.perf_counter()
    seed = data_seed(cfg.seed, n)
    x = draw_sample(scn, n, Stream(StreamKey(seed, 0, epoch)))
    rs = replicate_set(scn, cfg.scheme, x, m, seed, epoch, cfg.block_length)

    d_k = d_bl = d_bl_err = None
    if "d" in cfg.run:
        d = replicate_distances(rs, ctx.oracles[n], cfg.bl_cap, cfg.with_bl)
        d_k = d["d_k"]
        if cfg.with_bl:
            d_bl, d_bl_err = d["d_bl"], d["d_bl_err"]

    decisions = [bootstrap_test(rs, a) for a in cfg.alphas]
    ci_lower = ci_upper = ci_hit = one_sided = None
    if scn.id is ScenarioId.MEAN_ROOT:
        theta = scn.data_law.mean
        theta_n = float(np.mean(x.values))
        cis = [basic_ci(theta_n, rs, a) for a in cfg.alphas]
        ci_lower = tuple(c.lower for c in cis)
        ci_upper = tuple(c.upper for c in cis)
        ci_hit = tuple(c.contains(theta) for c in cis)
        root = math.sqrt(n) * (theta_n - theta)
        F = EmpiricalDF(rs.replicates)
        one_sided = tuple(root >= generalized_inverse(F, 1.0 - a) for a in cfg.alphas)

    return ExperimentRecord(
        scenario=scn.id.value,
        scheme=cfg.scheme.value,
        n=n,
        m=m,
        epoch=epoch,
        master_seed=cfg.seed,
        data_seed=seed,
        s_n=rs.s_n,
        s1=float(rs.replicates[0]),
        s2=float(rs.replicates[1]) if m >= 2 else None,
        d_k=d_k,
        d_bl=d_bl,
        d_bl_err=d_bl_err,
        alphas=tuple(cfg.alphas),
        critical=tuple(d.critical for d in decisions),
        reject=tuple(d.reject for d in decisions),
        ci_lower=ci_lower,
        ci_upper=ci_upper,
        ci_hit=ci_hit,
        one_sided=one_sided,
        p_value=approx_p_value(rs),
        wall_time=time.perf_counter() - start,
    )


_worker_ctx: RunContext | None = None


def _init_worker(ctx: RunContext) -> None:
    global _worker_ctx
    _worker_ctx = ctx


def _run_chunk(items):
    out = []
    for item in items:
        try:
            out.append(("ok", evaluate_item(_worker_ctx, *item)))
        except Exception:
            out.append(("error", (item, traceback.format_exc())))
            break
    return out


def _cache_path(cache_dir: Path, key: dict) -> Path:
    digest = hashlib.sha256(json.dumps(key, sort_keys=True).encode()).hexdigest()[:24]
    return cache_dir / f"oracle-{digest}.npz"


def cached_oracle(cfg: ExperimentConfig, n, cache_dir: Path | None) -> DiscreteMeasure:
    """Oracle law for ``n`` (or LIMIT), read from / written to the on-disk cache."""
    reps = cfg.ladder.oracle_reps
    seed = oracle_seed(cfg.seed, cfg.scenario, n, reps)
    n_big = cfg.ladder.n_big if n == LIMIT else None
    key = {"scenario": scenario_key(cfg.scenario), "n": str(n), "R": reps, "seed": seed, "n_big": n_big}
    path = _cache_path(cache_dir, key) if cache_dir is not None else None
    if path is not None and path.exists():
        with np.load(path) as data:
            return DiscreteMeasure(data["support"], data["probs"])
    law = oracle_law(cfg.scenario, n, reps, seed, n_big)
    if path is not None:
        cache_dir.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(".tmp.npz")
        np.savez(tmp, support=law.support, probs=law.probs)
        tmp.replace(path)
    return law


def build_context(cfg: ExperimentConfig, cache_dir: Path | None) -> RunContext:
    oracles = {}
    if "d" in cfg.run or "c" in cfg.run:
        for n in sorted({n for n, _ in cfg.ladder.cell_list()}):
            if cfg.fixed_oracle is not None:
                oracles[n] = cfg.fixed_oracle
            else:
                oracles[n] = cached_oracle(cfg, n, cache_dir)
    return RunContext(cfg, oracles)


def resolve_limit(cfg: ExperimentConfig, cache_dir: Path | None):
    """Limit reference for assertion (a): closed-form d.f. or cached simulation."""
    law = limit_law(cfg.scenario)
    if law is not None:
        return law.cdf
    return cached_oracle(cfg, LIMIT, cache_dir)


def execute(ctx: RunContext, workers: int = 1, sink=None) -> list[ExperimentRecord]:
    """Evaluate every work item; ``sink`` receives records in completion order."""
    items = ctx.item_list()
    records = []
    if workers <= 1:
        for item in items:
            try:
                rec = evaluate_item(ctx, *item)
            except Exception:
                raise RunError(item, traceback.format_exc()) from None
            records.append(rec)
            if sink is not None:
                sink(rec)
        return records

    size = max(1, len(items) // (workers * 8))
    chunks = [items[k : k + size] for k in range(0, len(items), size)]
    with ProcessPoolExecutor(max_workers=workers, initializer=_init_worker, initargs=(ctx,)) as pool:
        futures = [pool.submit(_run_chunk, c) for c in chunks]
        for fut in as_completed(futures):
            for status, payload in fut.result():
                if status == "error":
                    for other in futures:
                        other.cancel()
                    raise RunError(*payload)
                records.append(payload)
                if sink is not None:
                    sink(payload)
    return records


def run(cfg: ExperimentConfig, out_dir=None, workers: int | None = None) -> RunResult:
    """Run the configured checks and persist records under ``out_dir``.

    Writes ``records.jsonl`` (canonical order, no timings), ``timings.csv``
    and ``config.resolved.yaml``.  Records are also appended to
    ``records.partial.jsonl`` as they complete, so an interrupted run leaves
    its finished work behind.
    """
    out = Path(out_dir if out_dir is not None else cfg.output)
    workers = cfg.workers if workers is None else workers
    cfg = replace(cfg, workers=workers, output=str(out))
    out.mkdir(parents=True, exist_ok=True)
    cache_dir = out / "oracle-cache"
    (out / "config.resolved.yaml").write_text(cfg.to_yaml(), encoding="utf-8")

    ctx = build_context(cfg, cache_dir)
    partial = out / "records.partial.jsonl"
    with partial.open("w", encoding="utf-8") as fh:

        def sink(rec):
            fh.write(serialize(rec, canonical=False) + "\n")
            fh.flush()

        records = execute(ctx, workers, sink)

    records_path = out / "records.jsonl"
    write_records(records_path, records)
    timings = out / "timings.csv"
    with timings.open("w", encoding="utf-8") as fh:
        fh.write("n,M,epoch,wall_time_s\n")
        for r in sorted(records, key=lambda r: r.sort_key):
            fh.write(f"{r.n},{r.m},{r.epoch},{r.wall_time:.6g}\n")
    partial.unlink()

    limit = resolve_limit(cfg, cache_dir) if "a" in cfg.run else None
    conditional = None
    if "c" in cfg.run:
        n_top = max(n for n, _ in cfg.ladder.cell_list())
        conditional = check_assertion_c(
            cfg.scenario,
            cfg.scheme,
            n_top,
            cfg.m_inner,
            cfg.inner_reps,
            cfg.ladder.oracle_reps,
            cfg.seed,
            oracle=ctx.oracles[n_top],
            block_length=cfg.block_length,
            bl_cap=cfg.bl_cap,
            with_bl=cfg.with_bl,
        )
    files = {"records": records_path, "timings": timings, "config": out / "config.resolved.yaml"}
    return RunResult(cfg, sorted(records, key=lambda r: r.sort_key), limit, conditional, files)
