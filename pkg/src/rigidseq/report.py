"""Report structure, JSON serialization and file emission.

JSON is the primary format.  Integers beyond 2**53 become decimal strings,
rationals become "p/q", and binary-float brackets are written as decimals
rounded outward so that a printed lower bound never exceeds the true one.
Data files never contain timings; those go to a separate meta file.
"""
from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
import re
from fractions import Fraction
from pathlib import Path
from typing import Any

import mpmath
import numpy as np

from ._exact import fmt_fraction

SCHEMA = "rigidseq.report/1"
SAFE_INT = 1 << 53


def _mpf_fraction(x: mpmath.mpf) -> Fraction:
    man, exp = x.man_exp
    man, exp = int(man), int(exp)
    return Fraction(man) * 2**exp if exp >= 0 else Fraction(man, 1 << -exp)


def fmt_decimal(x, digits: int = 30, rounding: str = "nearest") -> str:
    """Decimal string with ``digits`` fractional digits, rounded down, up or to nearest."""
    if isinstance(x, mpmath.mpf):
        if not mpmath.isfinite(x):
            return str(x)
        x = _mpf_fraction(x)
    x = Fraction(x)
    scaled = x * 10**digits
    if rounding == "down":
        q = math.floor(scaled)
    elif rounding == "up":
        q = math.ceil(scaled)
    else:
        q = round(scaled)
    sign = "-" if q < 0 else ""
    s = str(abs(q)).rjust(digits + 1, "0")
    whole, frac = s[:-digits], s[-digits:].rstrip("0")
    return f"{sign}{whole}.{frac}" if frac else f"{sign}{whole}"


def bracket(lower, upper, digits: int = 30) -> dict:
    """An outward-rounded [lower, upper] pair."""
    return {"lower": fmt_decimal(lower, digits, "down"), "upper": fmt_decimal(upper, digits, "up")}


def jsonable(obj: Any) -> Any:
    """Convert results into plain JSON values, losslessly where it matters."""
    if obj is None or isinstance(obj, (bool, str)):
        return obj
    if isinstance(obj, (int, np.integer)):
        v = int(obj)
        return v if abs(v) < SAFE_INT else str(v)
    if isinstance(obj, Fraction):
        return fmt_fraction(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, mpmath.mpf):
        return mpmath.nstr(obj, 30)
    if isinstance(obj, (complex, mpmath.mpc)):
        return {"re": jsonable(obj.real), "im": jsonable(obj.imag)}
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if hasattr(obj, "to_spec"):
        return jsonable(obj.to_spec())
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        out = {}
        for f in dataclasses.fields(obj):
            v = getattr(obj, f.name)
            if callable(v) or f.name.startswith("_"):
                continue
            out[f.name] = jsonable(v)
        return out
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        items = sorted(obj) if isinstance(obj, (set, frozenset)) else obj
        return [jsonable(v) for v in items]
    raise TypeError(f"cannot serialize {type(obj).__name__}")


@dataclasses.dataclass
class Entry:
    """One check: what it instantiates, its status and its data."""

    checks: str
    status: str = "ok"
    result: Any = None
    error: dict | None = None


@dataclasses.dataclass
class Report:
    config: dict
    entries: dict[str, Entry] = dataclasses.field(default_factory=dict)
    meta: dict = dataclasses.field(default_factory=dict)

    def add(self, key: str, entry: Entry) -> None:
        if key in self.entries:
            raise KeyError(f"duplicate report key {key}")
        self.entries[key] = entry

    @property
    def failures(self) -> list[str]:
        return sorted(k for k, e in self.entries.items() if e.status != "ok")

    def data(self) -> dict:
        return {
            "schema": SCHEMA,
            "config": jsonable(self.config),
            "entries": {k: jsonable(self.entries[k]) for k in sorted(self.entries)},
        }

    def to_json(self) -> str:
        return json.dumps(self.data(), sort_keys=True, indent=2) + "\n"


def load_report(text: str) -> dict:
    data = json.loads(text)
    if data.get("schema") != SCHEMA:
        raise ValueError(f"unexpected schema {data.get('schema')!r}")
    return data


def _scalar(v: Any) -> str:
    if isinstance(v, (dict, list)):
        return json.dumps(v, sort_keys=True, separators=(",", ":"))
    return "" if v is None else str(v)


def _tables(data: dict) -> dict[str, list[dict]]:
    """Flatten each entry: lists of records become tables, the rest key/value rows."""
    tables = {}
    for key, entry in data["entries"].items():
        res = entry.get("result")
        if isinstance(res, dict):
            for name, val in res.items():
                if isinstance(val, list) and val and all(isinstance(r, dict) for r in val):
                    tables[f"{key}.{name}"] = val
        rows = [{"field": "checks", "value": entry["checks"]}, {"field": "status", "value": entry["status"]}]
        if isinstance(res, dict):
            for name in sorted(res):
                val = res[name]
                if not (isinstance(val, list) and val and all(isinstance(r, dict) for r in val)):
                    rows.append({"field": name, "value": _scalar(val)})
        elif res is not None:
            rows.append({"field": "result", "value": _scalar(res)})
        if entry.get("error"):
            rows.append({"field": "error", "value": _scalar(entry["error"])})
        tables[key] = rows
    return tables


def _csv_text(rows: list[dict], columns: list[str] | None = None) -> str:
    cols = columns or sorted({c for r in rows for c in r})
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n", extrasaction="ignore")
    w.writeheader()
    for r in rows:
        w.writerow({c: _scalar(r.get(c)) for c in cols})
    return buf.getvalue()


PLOT_COLUMNS = ["m", "n_m", "gap_lower", "gap_upper"]


def plot_tables(data: dict) -> dict[str, str]:
    """Gap profiles as CSV with columns m, n_m, gap_lower, gap_upper."""
    out = {}
    for key, entry in data["entries"].items():
        res = entry.get("result")
        if isinstance(res, dict) and isinstance(res.get("gap_profile"), list):
            out[key] = _csv_text(res["gap_profile"], PLOT_COLUMNS)
    return out


def render(report: Report, fmt: str) -> dict[str, str]:
    """File name -> contents for the requested format (data files only)."""
    data = report.data()
    if fmt == "json":
        return {"report.json": report.to_json()}
    if fmt == "csv":
        return {f"{name}.csv": _csv_text(rows) for name, rows in sorted(_tables(data).items())}
    if fmt == "plot-csv":
        return {f"{name}.plot.csv": text for name, text in sorted(plot_tables(data).items())}
    raise ValueError(f"unknown format {fmt!r}")


def _safe_name(name: str) -> str:
    # entry keys may carry rationals such as "1/4"
    return re.sub(r"[^A-Za-z0-9._\[\]=+-]", "_", name)


def emit(report: Report, out_dir: str | Path, fmt: str = "json") -> list[Path]:
    """Write the data files plus meta.json into ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    files = render(report, fmt)
    if fmt != "json":
        files["report.json"] = report.to_json()
    for name, text in sorted(files.items()):
        p = out / _safe_name(name)
        p.write_text(text, encoding="utf-8")
        written.append(p)
    meta = out / "meta.json"
    meta.write_text(json.dumps(jsonable(report.meta), sort_keys=True, indent=2) + "\n", encoding="utf-8")
    written.append(meta)
    return written
