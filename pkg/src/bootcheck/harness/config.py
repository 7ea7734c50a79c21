"""Experiment configuration: YAML schema, defaults and validation.

Schema (version 1); every key except ``scenario`` is optional::

    schema_version: 1
    scenario: MeanRoot            # or a mapping:
    #   id: MeanRoot | KSParametricGoF | GridProcess | UniformMax
    #   family: normal            # data law: normal | exponential | uniform | point
    #   loc: 0.0
    #   scale: 1.0
    #   mu0: null                 # MeanRoot hypothesis, defaults to the true mean
    #   grid: [-1.0, 0.0, 1.0]    # GridProcess evaluation points
    #   estimate: true            # KSParametricGoF: re-estimate parameters
    #   theta: 1.0                # UniformMax: upper end of the support
    scheme: Multinomial
    block_length: 1
    seed: 1
    workers: 1
    output: bootcheck-out
    ladder:
      n: [50, 200, 800]
      M: [50, 200, 800]
      N: 200                      # outer repetitions per cell
      R: 4000                     # oracle draws
      cells: diagonal             # or grid
    alpha: [0.1]
    run: [d, a, inference]        # optional extra: c
    conditional: {m_inner: 1000, reps: 20}
    bl: {enabled: true, cap: 512}
    expect: auto                  # consistent | inconsistent
    threshold: 0.10               # inconsistency threshold for pair gaps
    fixed_oracle: null            # {support: [...], probs: [...]} to compare with a fixed law
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from ..diagnostics import INCONSISTENCY_THRESHOLD, LadderSpec
from ..metrics import DiscreteMeasure
from ..resampling import Scheme
from ..statistics import (
    DataLaw,
    IncompatibleSchemeError,
    Scenario,
    ScenarioId,
    check_compatible,
)

SCHEMA_VERSION = 1
ASSERTIONS = ("d", "a", "inference", "c")
MIN_INNER = 1000

_TOP_KEYS = {
    "schema_version",
    "scenario",
    "scheme",
    "block_length",
    "seed",
    "workers",
    "output",
    "ladder",
    "alpha",
    "run",
    "conditional",
    "bl",
    "expect",
    "threshold",
    "fixed_oracle",
}
_SCENARIO_KEYS = {"id", "family", "loc", "scale", "mu0", "grid", "estimate", "theta"}
_LADDER_KEYS = {"n", "M", "N", "R", "cells"}


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending field or line."""


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: Scenario
    scheme: Scheme = Scheme.MULTINOMIAL
    seed: int = 1
    ladder: LadderSpec = field(default_factory=LadderSpec)
    alphas: tuple[float, ...] = (0.1,)
    block_length: int = 1
    workers: int = 1
    output: str = "bootcheck-out"
    run: tuple[str, ...] = ("d", "a", "inference")
    m_inner: int = 1000
    inner_reps: int = 20
    with_bl: bool = True
    bl_cap: int = 512
    expect: str = "consistent"
    threshold: float = INCONSISTENCY_THRESHOLD
    fixed_oracle: DiscreteMeasure | None = None
    schema_version: int = SCHEMA_VERSION

    def to_dict(self) -> dict:
        """Plain-data echo of the resolved configuration (all defaults filled)."""
        scn = self.scenario
        law = scn.data_law
        scenario = {"id": scn.id.value, "family": law.family, "loc": law.loc, "scale": law.scale}
        if scn.id is ScenarioId.MEAN_ROOT:
            scenario["mu0"] = scn.hypothesized_mean
        if scn.id is ScenarioId.GRID_PROCESS:
            scenario["grid"] = list(scn.grid)
        if scn.id is ScenarioId.KS_PARAMETRIC_GOF:
            scenario["estimate"] = scn.estimate
        if scn.id is ScenarioId.UNIFORM_MAX:
            scenario["theta"] = scn.theta
        out = {
            "schema_version": self.schema_version,
            "scenario": scenario,
            "scheme": self.scheme.value,
            "block_length": self.block_length,
            "seed": self.seed,
            "workers": self.workers,
            "output": self.output,
            "ladder": {
                "n": list(self.ladder.n_values),
                "M": list(self.ladder.m_values),
                "N": self.ladder.outer_reps,
                "R": self.ladder.oracle_reps,
                "cells": self.ladder.cells,
            },
            "alpha": list(self.alphas),
            "run": list(self.run),
            "conditional": {"m_inner": self.m_inner, "reps": self.inner_reps},
            "bl": {"enabled": self.with_bl, "cap": self.bl_cap},
            "expect": self.expect,
            "threshold": self.threshold,
            "fixed_oracle": None,
        }
        if self.fixed_oracle is not None:
            out["fixed_oracle"] = {
                "support": self.fixed_oracle.support.tolist(),
                "probs": self.fixed_oracle.probs.tolist(),
            }
        return out

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=False)


def _mapping(value, where: str) -> dict:
    if value is None:
        return {}
    if not isinstance(value, dict):
        raise ConfigError(f"field '{where}': expected a mapping")
    return value


def _reject_unknown(data: dict, allowed: set[str], where: str) -> None:
    for key in data:
        if key not in allowed:
            prefix = f"{where}." if where else ""
            raise ConfigError(f"field '{prefix}{key}': unknown key")


def _int(value, where: str, minimum: int = 0) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"field '{where}': expected an integer, got {value!r}")
    if value < minimum:
        raise ConfigError(f"field '{where}': must be >= {minimum}, got {value}")
    return value


def _float(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"field '{where}': expected a number, got {value!r}")
    if not math.isfinite(value):
        raise ConfigError(f"field '{where}': must be finite")
    return float(value)


def _int_list(value, where: str) -> tuple[int, ...]:
    if isinstance(value, int) and not isinstance(value, bool):
        value = [value]
    if not isinstance(value, list) or not value:
        raise ConfigError(f"field '{where}': expected a non-empty list of integers")
    vals = tuple(_int(v, f"{where}[{k}]", 1) for k, v in enumerate(value))
    for k in range(1, len(vals)):
        if vals[k] <= vals[k - 1]:
            raise ConfigError(
                f"field '{where}': values must be strictly increasing "
                f"({vals[k - 1]} then {vals[k]})"
            )
    return vals


def _scenario(raw) -> Scenario:
    if isinstance(raw, str):
        raw = {"id": raw}
    if raw is None:
        raise ConfigError("field 'scenario': required")
    data = _mapping(raw, "scenario")
    _reject_unknown(data, _SCENARIO_KEYS, "scenario")
    if "id" not in data:
        raise ConfigError("field 'scenario.id': required")
    try:
        sid = ScenarioId.parse(data["id"])
    except ValueError as exc:
        raise ConfigError(f"field 'scenario.id': {exc}") from None

    theta = _float(data.get("theta", 1.0), "scenario.theta")
    default_family = "uniform" if sid is ScenarioId.UNIFORM_MAX else "normal"
    family = data.get("family", default_family)
    loc = _float(data.get("loc", 0.0), "scenario.loc")
    scale = _float(data.get("scale", theta if sid is ScenarioId.UNIFORM_MAX else 1.0), "scenario.scale")
    try:
        law = DataLaw(family, loc, scale)
    except ValueError as exc:
        raise ConfigError(f"field 'scenario.family': {exc}") from None
    mu0 = data.get("mu0")
    if mu0 is not None:
        mu0 = _float(mu0, "scenario.mu0")
    grid = data.get("grid", [])
    if not isinstance(grid, list):
        raise ConfigError("field 'scenario.grid': expected a list of numbers")
    grid = tuple(_float(g, f"scenario.grid[{k}]") for k, g in enumerate(grid))
    estimate = data.get("estimate", True)
    if not isinstance(estimate, bool):
        raise ConfigError("field 'scenario.estimate': expected true or false")
    if sid is ScenarioId.UNIFORM_MAX and (family != "uniform" or loc != 0.0 or scale != theta):
        raise ConfigError("field 'scenario.family': UniformMax data must be uniform on [0, theta]")
    if sid is ScenarioId.KS_PARAMETRIC_GOF and family not in ("normal", "exponential"):
        raise ConfigError("field 'scenario.family': KSParametricGoF needs normal or exponential data")
    if sid is ScenarioId.KS_PARAMETRIC_GOF and family == "exponential" and loc != 0.0:
        raise ConfigError("field 'scenario.loc': the exponential GoF family has no location")
    try:
        return Scenario(sid, law, mu0=mu0, grid=grid, gof_family=family, estimate=estimate, theta=theta)
    except ValueError as exc:
        raise ConfigError(f"field 'scenario': {exc}") from None


def _fixed_oracle(raw) -> DiscreteMeasure | None:
    if raw is None:
        return None
    data = _mapping(raw, "fixed_oracle")
    _reject_unknown(data, {"support", "probs"}, "fixed_oracle")
    try:
        return DiscreteMeasure(data.get("support"), data.get("probs"))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"field 'fixed_oracle': {exc}") from None


def parse_config(data) -> ExperimentConfig:
    """Validate already-parsed YAML data and fill defaults."""
    data = _mapping(data, "<root>")
    _reject_unknown(data, _TOP_KEYS, "")
    version = data.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ConfigError(f"field 'schema_version': expected {SCHEMA_VERSION}, got {version!r}")
    scn = _scenario(data.get("scenario"))

    try:
        scheme = Scheme.parse(data.get("scheme", "Multinomial"))
    except ValueError as exc:
        raise ConfigError(f"field 'scheme': {exc}") from None
    try:
        check_compatible(scn, scheme)
    except IncompatibleSchemeError as exc:
        raise ConfigError(f"field 'scheme': {exc}") from None

    seed = _int(data.get("seed", 1), "seed")
    if seed >= 1 << 64:
        raise ConfigError("field 'seed': must fit in 64 bits")

    ladder_raw = _mapping(data.get("ladder"), "ladder")
    _reject_unknown(ladder_raw, _LADDER_KEYS, "ladder")
    n_values = _int_list(ladder_raw.get("n", [50, 200, 800]), "ladder.n")
    m_values = _int_list(ladder_raw.get("M", [50, 200, 800]), "ladder.M")
    cells = ladder_raw.get("cells", "diagonal")
    if cells not in ("diagonal", "grid"):
        raise ConfigError(f"field 'ladder.cells': expected diagonal or grid, got {cells!r}")
    if cells == "diagonal" and len(n_values) != len(m_values):
        raise ConfigError("field 'ladder.M': a diagonal ladder needs as many M values as n values")
    ladder = LadderSpec(
        n_values,
        m_values,
        _int(ladder_raw.get("N", 200), "ladder.N", 1),
        _int(ladder_raw.get("R", 4000), "ladder.R", 1),
        cells,
    )

    alpha_raw = data.get("alpha", [0.1])
    if not isinstance(alpha_raw, list):
        alpha_raw = [alpha_raw]
    if not alpha_raw:
        raise ConfigError("field 'alpha': expected at least one level")
    alphas = tuple(_float(a, f"alpha[{k}]") for k, a in enumerate(alpha_raw))
    for k, a in enumerate(alphas):
        if not 0.0 < a < 0.5:
            raise ConfigError(f"field 'alpha[{k}]': must lie in (0, 0.5), got {a}")

    run = data.get("run", ["d", "a", "inference"])
    if not isinstance(run, list) or not run:
        raise ConfigError("field 'run': expected a non-empty list")
    for k, name in enumerate(run):
        if name not in ASSERTIONS:
            raise ConfigError(f"field 'run[{k}]': unknown check {name!r}; choose from {ASSERTIONS}")

    cond = _mapping(data.get("conditional"), "conditional")
    _reject_unknown(cond, {"m_inner", "reps"}, "conditional")
    m_inner = _int(cond.get("m_inner", MIN_INNER), "conditional.m_inner", MIN_INNER)
    inner_reps = _int(cond.get("reps", 20), "conditional.reps", 1)

    bl = _mapping(data.get("bl"), "bl")
    _reject_unknown(bl, {"enabled", "cap"}, "bl")
    with_bl = bl.get("enabled", True)
    if not isinstance(with_bl, bool):
        raise ConfigError("field 'bl.enabled': expected true or false")
    bl_cap = _int(bl.get("cap", 512), "bl.cap", 2)

    expect = data.get("expect", "auto")
    if expect not in ("auto", "consistent", "inconsistent"):
        raise ConfigError(f"field 'expect': expected auto, consistent or inconsistent, got {expect!r}")
    if expect == "auto":
        expect = "inconsistent" if scn.id is ScenarioId.UNIFORM_MAX else "consistent"

    threshold = _float(data.get("threshold", INCONSISTENCY_THRESHOLD), "threshold")
    if not 0.0 < threshold < 1.0:
        raise ConfigError("field 'threshold': must lie in (0, 1)")

    output = data.get("output", "bootcheck-out")
    if not isinstance(output, str) or not output:
        raise ConfigError("field 'output': expected a path")

    return ExperimentConfig(
        scenario=scn,
        scheme=scheme,
        seed=seed,
        ladder=ladder,
        alphas=alphas,
        block_length=_int(data.get("block_length", 1), "block_length", 1),
        workers=_int(data.get("workers", 1), "workers", 1),
        output=output,
        run=tuple(dict.fromkeys(run)),
        m_inner=m_inner,
        inner_reps=inner_reps,
        with_bl=with_bl,
        bl_cap=bl_cap,
        expect=expect,
        threshold=threshold,
        fixed_oracle=_fixed_oracle(data.get("fixed_oracle")),
    )


def load_config_text(text: str, source: str = "<config>") -> ExperimentConfig:
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"{source}:{mark.line + 1}" if mark is not None else source
        problem = getattr(exc, "problem", None) or str(exc)
        raise ConfigError(f"{where}: parse error: {problem}") from None
    if data is None:
        data = {}
    return parse_config(data)


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config: {exc.strerror}") from None
    return load_config_text(text, str(path))
