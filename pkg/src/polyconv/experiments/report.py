"""Scenario reports and their CSV / JSON serializations."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

from .fitting import RateFit


@dataclass
class Verdict:
    name: str
    passed: bool
    value: float | None
    criterion: str
    tolerance: float | None = None

    def line(self) -> str:
        val = "-" if self.value is None else f"{self.value:.6g}"
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}: {val} ({self.criterion})"


@dataclass
class ScenarioReport:
    scenario: str
    anchor: str
    columns: list[str]
    records: list[dict] = field(default_factory=list)
    fits: dict[str, RateFit] = field(default_factory=dict)
    verdicts: list[Verdict] = field(default_factory=list)
    flags: list[str] = field(default_factory=list)
    constants: dict[str, float] = field(default_factory=dict)
    runtime: float = 0.0

    @property
    def passed(self) -> bool:
        return all(v.passed for v in self.verdicts)

    def verdict(self, name: str, passed: bool, value, criterion: str, tolerance=None) -> Verdict:
        v = Verdict(name, bool(passed), None if value is None else float(value), criterion, tolerance)
        self.verdicts.append(v)
        return v

    # runtime is deliberately left out so that reruns are byte-identical
    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "anchor": self.anchor,
            "columns": list(self.columns),
            "records": [{k: _jsonable(r.get(k)) for k in self.columns if k in r} for r in self.records],
            "fits": {k: f.to_dict() for k, f in self.fits.items()},
            "verdicts": [vars(v).copy() for v in self.verdicts],
            "flags": list(self.flags),
            "constants": {k: float(v) for k, v in self.constants.items()},
            "passed": self.passed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ScenarioReport":
        return cls(
            scenario=d["scenario"],
            anchor=d["anchor"],
            columns=list(d["columns"]),
            records=[dict(r) for r in d["records"]],
            fits={k: RateFit.from_dict(v) for k, v in d["fits"].items()},
            verdicts=[Verdict(**v) for v in d["verdicts"]],
            flags=list(d["flags"]),
            constants=dict(d["constants"]),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=False) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for r in self.records:
            w.writerow([_csv_cell(r.get(c)) for c in self.columns])
        return buf.getvalue()


def _jsonable(v):
    if v is None or isinstance(v, (str, bool, int)):
        return v
    return float(v)


def _csv_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "pass" if v else "fail"
    if isinstance(v, str):
        return v
    if isinstance(v, int):
        return str(v)
    f = float(v)
    return repr(f) if math.isfinite(f) else str(f)
