"""Plain-data reports and their JSON / CSV serialisation.

Complex numbers are stored as ``[re, im]`` and the point at infinity as
the string ``"inf"``.  JSON output uses sorted keys and Python's shortest
round-trip float repr, so identical inputs give identical bytes.  CSV
numbers use 17 significant digits, which also round-trips exactly.
"""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from dataclasses import asdict, dataclass, field, fields

from compdyn.mobius import INF, MapClassification


def point_to_data(z):
    if z is None:
        return None
    if z is INF:
        return "inf"
    z = complex(z)
    return [z.real, z.imag]


def point_from_data(d):
    if d is None:
        return None
    if d == "inf":
        return INF
    return complex(d[0], d[1])


def classification_to_data(cls: MapClassification) -> dict:
    return {
        "class": cls.kind.value,
        "fixed_points": [point_to_data(z) for z in cls.fixed_points],
        "multiplier": point_to_data(cls.multiplier),
        "attracting": point_to_data(cls.attracting),
        "repelling": point_to_data(cls.repelling),
        "automorphism": cls.automorphism,
        "near_parabolic": cls.near_parabolic,
    }


def table_to_data(table, set_name: str = "") -> dict:
    return {
        "set": set_name,
        "label": table.label,
        "p": table.p,
        "rows": [{"n": int(n), "norm": float(v)} for n, v in table.rows],
    }


@dataclass
class DynamicsReport:
    command: str
    config: dict = field(default_factory=dict)
    classification: dict | None = None
    verdict: dict | None = None
    tables: list = field(default_factory=list)
    witness: dict | None = None
    bound: dict | None = None
    result: dict | None = None
    selfcheck: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)
    wall_time: float | None = None

    def to_dict(self) -> dict:
        d = asdict(self)
        if d["wall_time"] is None:
            del d["wall_time"]
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2, allow_nan=False) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "DynamicsReport":
        names = {f.name for f in fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ValueError(f"unknown report keys {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def from_json(cls, text: str) -> "DynamicsReport":
        return cls.from_dict(json.loads(text))


def _g17(x: float) -> str:
    return format(float(x), ".17g")


def orbit_csv(table_data: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "norm"])
    for row in table_data["rows"]:
        w.writerow([row["n"], _g17(row["norm"])])
    return buf.getvalue()


def tables_csv(tables: list) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["set", "label", "n", "norm"])
    for t in tables:
        for row in t["rows"]:
            w.writerow([t["set"], t["label"], row["n"], _g17(row["norm"])])
    return buf.getvalue()


def _flatten(prefix: str, value, out: list):
    if isinstance(value, dict):
        for k in sorted(value):
            _flatten(f"{prefix}.{k}" if prefix else k, value[k], out)
    elif isinstance(value, list) and value and not all(
        isinstance(v, (int, float)) for v in value
    ):
        for i, v in enumerate(value):
            _flatten(f"{prefix}[{i}]", v, out)
    else:
        if isinstance(value, float):
            value = _g17(value)
        elif isinstance(value, list):
            value = ";".join(_g17(v) for v in value)
        out.append((prefix, value))


def summary_csv(report: DynamicsReport) -> str:
    """``key,value`` rows for reports without decay tables."""
    rows: list = []
    d = report.to_dict()
    for key in ("classification", "verdict", "witness", "bound", "result", "selfcheck"):
        if d.get(key) is not None:
            _flatten(key, d[key], rows)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["key", "value"])
    for k, v in rows:
        w.writerow([k, "" if v is None else v])
    return buf.getvalue()


def parse_orbit_csv(text: str) -> list[dict]:
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if header != ["n", "norm"]:
        raise ValueError(f"unexpected header {header}")
    return [{"n": int(n), "norm": float(v)} for n, v in reader]


def parse_tables_csv(text: str) -> list[dict]:
    """Inverse of :func:`tables_csv`; ``p`` is not carried by the CSV."""
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if header != ["set", "label", "n", "norm"]:
        raise ValueError(f"unexpected header {header}")
    out: list[dict] = []
    for s, label, n, v in reader:
        if not out or out[-1]["set"] != s or out[-1]["label"] != label:
            out.append({"set": s, "label": label, "rows": []})
        out[-1]["rows"].append({"n": int(n), "norm": float(v)})
    return out


def atomic_write(path: str, text: str) -> None:
    """Write to a temporary file in the target directory, then rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".part")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
