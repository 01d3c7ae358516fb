"""JSON/CSV helpers. Complex numbers travel as {"re": x, "im": y}."""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np


def complex_to_json(c) -> dict:
    c = complex(c)
    return {"re": _float(c.real), "im": _float(c.imag)}


def _float(x: float):
    x = float(x)
    if math.isfinite(x):
        return x
    return "inf" if x > 0 else ("-inf" if x < 0 else "nan")


def complex_from_json(obj) -> complex:
    if isinstance(obj, dict):
        return complex(float(obj["re"]), float(obj.get("im", 0.0)))
    if isinstance(obj, (int, float)):
        return complex(obj)
    if isinstance(obj, str):
        return parse_complex(obj)
    raise ValueError(f"cannot read a complex number from {obj!r}")


def complex_list_to_json(xs) -> list:
    return [complex_to_json(x) for x in np.asarray(xs).reshape(-1)]


def complex_list_from_json(objs) -> list[complex]:
    return [complex_from_json(o) for o in objs]


def parse_complex(text: str) -> complex:
    """Read ``a+bi`` style literals ("2", "-1.5i", "3-4i", "i", "inf")."""
    s = text.strip().replace(" ", "")
    if s.lower() in ("inf", "infinity", "oo"):
        return complex(math.inf, 0.0)
    try:
        return complex(s.replace("i", "j"))
    except ValueError as exc:
        raise ValueError(f"not a complex literal: {text!r}") from exc


def dump_json(obj, path: str | Path | None) -> str:
    text = json.dumps(obj, indent=2, sort_keys=False)
    if path is not None:
        Path(path).write_text(text + "\n")
    return text


def load_json(path: str | Path):
    return json.loads(Path(path).read_text())


def write_csv(path: str | Path | None, header: list[str], rows) -> str:
    import io as _io

    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in row])
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text
