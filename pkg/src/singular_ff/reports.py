"""CSV, JSON and plot-data writers with byte-stable output."""
from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass
from fractions import Fraction


@dataclass
class Check:
    name: str
    value: object
    bound: object
    passed: bool
    note: str = ""


def plain(x):
    """JSON-friendly form: Fractions as 'a/b' strings, non-finite floats as strings."""
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, float):
        return x if math.isfinite(x) else str(x)
    if isinstance(x, (list, tuple)):
        return [plain(v) for v in x]
    if isinstance(x, dict):
        return {str(k): plain(v) for k, v in x.items()}
    return x


def cell(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


def write_csv(path: str, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([cell(x) for x in row])


def write_summary(path: str, command: str, config: dict, checks, fitted: dict, extra: dict | None = None) -> None:
    doc = {
        "command": command,
        "config_echo": plain(config),
        "checks": [{"name": c.name, "value": plain(c.value), "bound": plain(c.bound), "pass": bool(c.passed),
                    **({"note": c.note} if c.note else {})} for c in checks],
        "fitted_constants": plain(fitted),
    }
    if extra:
        doc.update(plain(extra))
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_plot(path: str, xs, ys) -> None:
    os.makedirs(os.path.dirname(path), exist_ok=True)
    with open(path, "w") as fh:
        for x, y in zip(xs, ys):
            fh.write(f"{cell(x)} {cell(y)}\n")
