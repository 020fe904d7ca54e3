"""Structured pass/fail records and deterministic, atomic artifact output."""
import json
import math
import os
import tempfile
from dataclasses import dataclass, field

import numpy as np

from .errors import IoError

SCHEMA_VERSION = 1


@dataclass
class Check:
    name: str
    passed: bool
    value: float
    tolerance: float
    anchor: str
    asserted: bool = True
    note: str = ""

    def to_dict(self):
        d = {
            "name": self.name,
            "pass": bool(self.passed),
            "value": _clean(self.value),
            "tolerance": _clean(self.tolerance),
            "anchor": self.anchor,
            "asserted": bool(self.asserted),
        }
        if self.note:
            d["note"] = self.note
        return d


@dataclass
class VerificationReport:
    """Named list of checks; passes iff every asserted check passes."""

    name: str
    checks: list = field(default_factory=list)
    metrics: dict = field(default_factory=dict)
    scenario: dict = field(default_factory=dict)

    def add(self, name, passed, value, tolerance, anchor, asserted=True, note=""):
        self.checks.append(Check(name, bool(passed), value, tolerance, anchor, asserted, note))
        return self

    def check_le(self, name, value, tolerance, anchor, asserted=True, note=""):
        return self.add(name, value <= tolerance, value, tolerance, anchor, asserted, note)

    def check_ge(self, name, value, tolerance, anchor, asserted=True, note=""):
        return self.add(name, value >= tolerance, value, tolerance, anchor, asserted, note)

    @property
    def passed(self):
        return all(c.passed for c in self.checks if c.asserted)

    def __getitem__(self, name):
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def failures(self):
        return [c.name for c in self.checks if c.asserted and not c.passed]

    def to_dict(self):
        return {
            "schema": SCHEMA_VERSION,
            "report": self.name,
            "pass": self.passed,
            "scenario": _clean(self.scenario),
            "checks": [c.to_dict() for c in self.checks],
            "metrics": _clean(self.metrics),
        }

    def merge(self, other, prefix=""):
        for c in other.checks:
            self.checks.append(Check(prefix + c.name, c.passed, c.value, c.tolerance,
                                     c.anchor, c.asserted, c.note))
        for k, v in other.metrics.items():
            self.metrics[prefix + k] = v
        return self


def _clean(obj):
    """Convert numpy scalars/arrays to JSON-safe Python objects."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    return obj


def dumps(obj):
    return json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n"


def atomic_write_text(path, text):
    """Write via a temporary file in the target directory, then rename."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    try:
        os.makedirs(directory, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".part")
        try:
            with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def write_json(path, obj):
    atomic_write_text(path, dumps(obj))
