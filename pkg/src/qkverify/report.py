"""Verification report structures and deterministic JSON/CSV emission.

Reports are plain data: named residuals, the tolerance they were judged
against, a verdict, and the provenance needed to reproduce the run (seed,
sample counts, convention flags, differentiation mode).  Serialization is
deterministic so two runs with the same configuration produce byte-identical
JSON apart from the timing block.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field


@dataclass
class CheckResult:
    """Outcome of one verification pass."""

    name: str
    passed: bool
    tolerance: float
    residuals: dict
    provenance: dict = field(default_factory=dict)
    elapsed: float = 0.0
    error: str = ""

    def as_dict(self):
        return {
            "name": self.name,
            "passed": bool(self.passed),
            "tolerance": self.tolerance,
            "residuals": {k: _jsonify(v) for k, v in sorted(self.residuals.items())},
            "provenance": {k: _jsonify(v) for k, v in sorted(self.provenance.items())},
            "error": self.error,
        }


@dataclass
class VerificationReport:
    """Aggregated outcome of a full verification run."""

    config: dict
    checks: list = field(default_factory=list)
    obstructions: dict = field(default_factory=dict)
    engine_errors: list = field(default_factory=list)

    def add(self, result):
        self.checks.append(result)
        if result.error:
            self.engine_errors.append(result.name)

    def add_obstruction(self, key, result):
        self.obstructions[key] = result
        if result.error:
            self.engine_errors.append(result.name)

    @property
    def passed(self):
        every = list(self.checks) + list(self.obstructions.values())
        return bool(every) and all(c.passed for c in every) and not self.engine_errors

    def as_dict(self, include_timing=True):
        out = {
            "config": {k: _jsonify(v) for k, v in sorted(self.config.items())},
            "checks": [c.as_dict() for c in self.checks],
            "obstructions": {k: v.as_dict() for k, v in sorted(self.obstructions.items())},
            "engine_errors": list(self.engine_errors),
            "passed": self.passed,
            "verdict": "pass" if self.passed else "fail",
        }
        if include_timing:
            timing = {c.name: round(c.elapsed, 6) for c in self.checks}
            timing.update({v.name: round(v.elapsed, 6) for v in self.obstructions.values()})
            timing["total"] = round(sum(timing.values()), 6)
            out["timing"] = timing
        return out

    def to_json(self, include_timing=True):
        return json.dumps(self.as_dict(include_timing), indent=2, sort_keys=True) + "\n"

    def write_json(self, path, include_timing=True):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_json(include_timing))

    def summary_lines(self):
        lines = []
        for c in list(self.checks) + list(self.obstructions.values()):
            worst = max(c.residuals.values()) if c.residuals else 0.0
            status = "PASS" if c.passed else ("ERROR" if c.error else "FAIL")
            lines.append(f"{status:5s}  {c.name:32s} max residual {worst:.3e}  (tol {c.tolerance:.1e})")
        lines.append(f"overall: {'pass' if self.passed else 'fail'}")
        return lines


def write_slab_csv(path, rows):
    """Slab volume table: one row per (t0, t1) with numeric and closed form."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t0", "t1", "numeric_volume", "closed_form_volume", "relative_error"])
        for r in rows:
            writer.writerow([repr(x) for x in r])


def _jsonify(v):
    if isinstance(v, (bool, int, float, str)) or v is None:
        return v
    if isinstance(v, dict):
        return {k: _jsonify(x) for k, x in sorted(v.items())}
    if isinstance(v, (list, tuple)):
        return [_jsonify(x) for x in v]
    try:
        import numpy as np

        if isinstance(v, np.integer):
            return int(v)
        if isinstance(v, np.floating):
            return float(v)
        if isinstance(v, np.ndarray):
            return [_jsonify(x) for x in v.tolist()]
    except ImportError:  # pragma: no cover
        pass
    return str(v)
