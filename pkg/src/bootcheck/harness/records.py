"""ExperimentRecord and its bit-exact JSON-lines encoding.

Reals are written as hex-float strings so a decode/encode round trip is the
identity.  The canonical encoding omits wall time, which is the only field
that depends on the machine and the schedule.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, fields
from pathlib import Path

RECORD_SCHEMA = 1


@dataclass(frozen=True)
class ExperimentRecord:
    scenario: str
    scheme: str
    n: int
    m: int
    epoch: int
    master_seed: int
    data_seed: int
    s_n: float
    s1: float
    s2: float | None
    d_k: float | None
    d_bl: float | None
    d_bl_err: float | None
    alphas: tuple[float, ...]
    critical: tuple[float, ...]
    reject: tuple[bool, ...]
    ci_lower: tuple[float, ...] | None
    ci_upper: tuple[float, ...] | None
    ci_hit: tuple[bool, ...] | None
    one_sided: tuple[bool, ...] | None
    p_value: float
    wall_time: float = 0.0

    @property
    def cell(self) -> tuple[int, int]:
        return (self.n, self.m)

    @property
    def sort_key(self) -> tuple[int, int, int]:
        return (self.n, self.m, self.epoch)


_INT_FIELDS = {"n", "m", "epoch", "master_seed", "data_seed"}
_STR_FIELDS = {"scenario", "scheme"}
_FLOAT_FIELDS = {"s_n", "s1", "s2", "d_k", "d_bl", "d_bl_err", "p_value", "wall_time"}
_FLOAT_TUPLES = {"alphas", "critical", "ci_lower", "ci_upper"}
_BOOL_TUPLES = {"reject", "ci_hit", "one_sided"}


def _hex(v):
    return None if v is None else float(v).hex()


def _unhex(v):
    return None if v is None else float.fromhex(v)


def record_to_dict(rec: ExperimentRecord, canonical: bool = True) -> dict:
    out = {"type": "record", "schema": RECORD_SCHEMA}
    for f in fields(rec):
        name = f.name
        if canonical and name == "wall_time":
            continue
        v = getattr(rec, name)
        if name in _FLOAT_FIELDS:
            out[name] = _hex(v)
        elif name in _FLOAT_TUPLES:
            out[name] = None if v is None else [_hex(x) for x in v]
        elif name in _BOOL_TUPLES:
            out[name] = None if v is None else [bool(x) for x in v]
        elif name in _INT_FIELDS:
            out[name] = int(v)
        else:
            out[name] = v
    return out


def record_from_dict(data: dict) -> ExperimentRecord:
    if data.get("type") != "record" or data.get("schema") != RECORD_SCHEMA:
        raise ValueError("not an experiment record of a supported schema")
    kwargs = {}
    for f in fields(ExperimentRecord):
        name = f.name
        if name not in data:
            if name == "wall_time":
                continue
            raise ValueError(f"record lacks field {name!r}")
        v = data[name]
        if name in _FLOAT_FIELDS:
            kwargs[name] = _unhex(v)
        elif name in _FLOAT_TUPLES:
            kwargs[name] = None if v is None else tuple(_unhex(x) for x in v)
        elif name in _BOOL_TUPLES:
            kwargs[name] = None if v is None else tuple(bool(x) for x in v)
        elif name in _INT_FIELDS:
            kwargs[name] = int(v)
        else:
            kwargs[name] = str(v)
    return ExperimentRecord(**kwargs)


def serialize(rec: ExperimentRecord, canonical: bool = True) -> str:
    return json.dumps(record_to_dict(rec, canonical), sort_keys=True, separators=(",", ":"))


def deserialize(line: str) -> ExperimentRecord:
    return record_from_dict(json.loads(line))


def canonical_order(records) -> list[ExperimentRecord]:
    return sorted(records, key=lambda r: r.sort_key)


def write_records(path, records, canonical: bool = True) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for rec in canonical_order(records):
            fh.write(serialize(rec, canonical) + "\n")


def read_records(path) -> list[ExperimentRecord]:
    out = []
    with Path(path).open(encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                out.append(deserialize(line))
    return out
