"""Evaluation metrics and the report structure for the synthetic suite."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..data import MODELED_JOINTS, InteractionSequence, SubEventParse


def avg_joint_distance(synth: InteractionSequence, gt: InteractionSequence,
                       joints=MODELED_JOINTS, start_t: int = 1) -> float:
    """Mean distance between the two agent-2 tracks over frames >= start_t."""
    if synth.num_frames != gt.num_frames:
        raise ValueError(f"track lengths differ: {synth.num_frames} vs {gt.num_frames}")
    total, count = 0.0, 0
    for t in range(start_t, synth.num_frames + 1):
        fa, fb = synth.frames[t - 1].agent2, gt.frames[t - 1].agent2
        for j in joints:
            total += float(np.linalg.norm(np.asarray(fa[j]) - np.asarray(fb[j])))
            count += 1
    return total / count


def boundary_recovery(parse: SubEventParse, gt_parse: SubEventParse, tol: int = 2) -> float:
    """Fraction of ground-truth internal boundaries matched within +-tol frames.

    Greedy one-to-one matching; a ground truth without internal boundaries
    scores 1.0 vacuously.
    """
    if parse.total_frames != gt_parse.total_frames:
        raise ValueError("parses cover different lengths")
    gt = list(gt_parse.boundaries())
    if not gt:
        return 1.0
    pred = list(parse.boundaries())
    matched = 0
    for g in gt:
        best, best_i = None, None
        for i, b in enumerate(pred):
            d = abs(b - g)
            if d <= tol and (best is None or d < best):
                best, best_i = d, i
        if best_i is not None:
            pred.pop(best_i)
            matched += 1
    return matched / len(gt)


@dataclass
class EvalReport:
    """Method x scenario average joint distances plus recovery diagnostics."""

    scenarios: list
    methods: list
    distances: dict  # method -> {scenario: meters}
    boundary_rates: dict = field(default_factory=dict)  # scenario -> rate
    grouping_recovered: dict = field(default_factory=dict)  # scenario -> bool
    config: dict = field(default_factory=dict)

    def average(self, method: str) -> float:
        return float(np.mean([self.distances[method][s] for s in self.scenarios]))

    def to_json(self) -> dict:
        return {
            "scenarios": list(self.scenarios),
            "methods": list(self.methods),
            "distances": {m: {s: self.distances[m][s] for s in self.scenarios} for m in self.methods},
            "averages": {m: self.average(m) for m in self.methods},
            "boundary_rates": dict(self.boundary_rates),
            "grouping_recovered": dict(self.grouping_recovered),
            "config": dict(self.config),
        }

    def save_json(self, path):
        with Path(path).open("w", encoding="utf-8") as fp:
            json.dump(self.to_json(), fp, sort_keys=True, indent=2)

    def to_csv(self) -> str:
        lines = ["Method," + ",".join(self.scenarios) + ",Average"]
        for m in self.methods:
            row = [m] + [f"{self.distances[m][s]:.4f}" for s in self.scenarios]
            row.append(f"{self.average(m):.4f}")
            lines.append(",".join(row))
        return "\n".join(lines) + "\n"

    def save_csv(self, path):
        Path(path).write_text(self.to_csv(), encoding="utf-8")

    @classmethod
    def from_json(cls, obj: dict) -> "EvalReport":
        return cls(scenarios=list(obj["scenarios"]), methods=list(obj["methods"]),
                   distances={m: dict(v) for m, v in obj["distances"].items()},
                   boundary_rates=dict(obj.get("boundary_rates", {})),
                   grouping_recovered=dict(obj.get("grouping_recovered", {})),
                   config=dict(obj.get("config", {})))
