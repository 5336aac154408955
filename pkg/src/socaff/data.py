"""Data model and I/O for two-agent interaction sequences.

One sequence per JSON file::

    {"id": ..., "label": ..., "fps": ..., "object_present": bool,
     "frames": [{"t": 1, "agent1": {joint: [x, y, z], ...},
                 "agent2": {...}, "object": [x, y, z] | null}, ...],
     "annotations": {"intervals": [[t1, t2], ...], "labels": [int, ...]}}

A dataset is a directory of such files plus a ``dictionary.json`` listing the
interaction labels. Coordinates are meters, right-handed, z-up. All types are
immutable values after construction and safe to share across threads.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

JOINT_NAMES = (
    "SpineBase", "SpineMid", "Neck", "Head",
    "ShoulderL", "ElbowL", "WristL",
    "ShoulderR", "ElbowR", "WristR",
    "HipL", "KneeL", "AnkleL",
    "HipR", "KneeR", "AnkleR",
)
JOINT_INDEX = {name: i for i, name in enumerate(JOINT_NAMES)}

# The affordance model consumes only this subset; full bodies are kept for
# codebook fitting and synthesis output.
MODELED_JOINTS = ("SpineBase", "WristL", "WristR", "AnkleL", "AnkleR")

BASE_JOINT = "SpineBase"

FPS_RANGE = (5.0, 60.0)


class DataError(Exception):
    """Raised for unloadable or invariant-violating dataset files."""


@dataclass(frozen=True)
class SubEventParse:
    """Non-overlapping labeled intervals covering frames 1..T.

    intervals[k] = (tau1, tau2) inclusive 1-based frame range; labels[k] is
    the sub-event type in 1..num_types. Consecutive intervals never share a
    label (they would be a single sub-event).
    """

    intervals: tuple
    labels: tuple

    def __init__(self, intervals, labels):
        object.__setattr__(self, "intervals", tuple((int(a), int(b)) for a, b in intervals))
        object.__setattr__(self, "labels", tuple(int(x) for x in labels))
        self._check()

    def _check(self):
        if len(self.intervals) != len(self.labels) or len(self.intervals) < 1:
            raise ValueError("parse needs equally many intervals and labels, at least one each")
        prev_end = 0
        for (a, b), lab in zip(self.intervals, self.labels):
            if a != prev_end + 1 or b < a:
                raise ValueError(f"intervals must tile 1..T contiguously, got {self.intervals}")
            if lab < 1:
                raise ValueError("labels are 1-based positive integers")
            prev_end = b
        for k in range(1, len(self.labels)):
            if self.labels[k] == self.labels[k - 1]:
                raise ValueError("consecutive intervals share a label")

    @property
    def num_segments(self):
        return len(self.intervals)

    @property
    def total_frames(self):
        return self.intervals[-1][1]

    def boundaries(self):
        """Internal boundaries: last frame of each interval except the final one."""
        return [b for (_, b) in self.intervals[:-1]]

    def to_json(self):
        return {"intervals": [list(iv) for iv in self.intervals], "labels": list(self.labels)}

    @classmethod
    def from_json(cls, obj):
        return cls(obj["intervals"], obj["labels"])


@dataclass(frozen=True)
class Frame:
    """One time step: both agents' joint maps plus an optional object point."""

    t: int
    agent1: dict
    agent2: dict
    obj: np.ndarray | None = None


@dataclass(frozen=True)
class ValidationReport:
    sequence_id: str
    violations: tuple = ()

    @property
    def ok(self):
        return len(self.violations) == 0


def _freeze(arr):
    a = np.asarray(arr, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class InteractionSequence:
    """Time-indexed full skeletons of two agents plus an optional object track."""

    id: str
    label: str
    fps: float
    frames: tuple
    annotations: SubEventParse | None = None

    @property
    def num_frames(self):
        return len(self.frames)

    @property
    def object_present(self):
        return self.frames[0].obj is not None if self.frames else False

    @cached_property
    def agent_positions(self):
        """(T, 2, 16, 3) array of both agents' joints in JOINT_NAMES order."""
        T = len(self.frames)
        out = np.empty((T, 2, len(JOINT_NAMES), 3))
        for t, f in enumerate(self.frames):
            for j, name in enumerate(JOINT_NAMES):
                out[t, 0, j] = f.agent1[name]
                out[t, 1, j] = f.agent2[name]
        out.setflags(write=False)
        return out

    @cached_property
    def object_track(self):
        """(T, 3) object positions, or None."""
        if not self.object_present:
            return None
        return _freeze([f.obj for f in self.frames])

    def agent_joint_map(self, t, agent):
        """Joint map of one agent at 1-based frame t."""
        f = self.frames[t - 1]
        return f.agent1 if agent == 1 else f.agent2


@dataclass(frozen=True)
class Dataset:
    sequences: tuple
    dictionary: tuple

    def by_label(self, label):
        return [s for s in self.sequences if s.label == label]


def make_sequence(seq_id, label, fps, frames, annotations=None):
    """Build an immutable InteractionSequence from per-frame joint maps."""
    fr = []
    for f in frames:
        a1 = {j: _freeze(f.agent1[j]) for j in JOINT_NAMES}
        a2 = {j: _freeze(f.agent2[j]) for j in JOINT_NAMES}
        obj = _freeze(f.obj) if f.obj is not None else None
        fr.append(Frame(t=int(f.t), agent1=a1, agent2=a2, obj=obj))
    return InteractionSequence(id=str(seq_id), label=str(label), fps=float(fps),
                               frames=tuple(fr), annotations=annotations)


def validate_sequence(seq: InteractionSequence) -> ValidationReport:
    """Collect all invariant violations; an empty report means valid."""
    v = []
    T = len(seq.frames)
    if T < 2:
        v.append("T >= 2 required")
    if not (FPS_RANGE[0] <= seq.fps <= FPS_RANGE[1]):
        v.append(f"fps {seq.fps} outside [{FPS_RANGE[0]:g}, {FPS_RANGE[1]:g}]")
    if not seq.label:
        v.append("empty label")
    for i, f in enumerate(seq.frames):
        if f.t != i + 1:
            v.append(f"non-contiguous frames: frame {i} has t={f.t}, expected {i + 1}")
            break
    has_obj = [f.obj is not None for f in seq.frames]
    if any(has_obj) and not all(has_obj):
        v.append("inconsistent object track: object present in some frames only")
    for f in seq.frames:
        for agent, joints in (("agent1", f.agent1), ("agent2", f.agent2)):
            missing = [j for j in JOINT_NAMES if j not in joints]
            if missing:
                v.append(f"frame {f.t} {agent}: missing joints {missing}")
                continue
            for j in JOINT_NAMES:
                p = np.asarray(joints[j], dtype=float)
                if p.shape != (3,):
                    v.append(f"frame {f.t} {agent} {j}: not a 3D point")
                elif not np.all(np.isfinite(p)):
                    v.append(f"frame {f.t} {agent} {j}: non-finite coordinate")
        if f.obj is not None and not np.all(np.isfinite(np.asarray(f.obj, dtype=float))):
            v.append(f"frame {f.t} object: non-finite coordinate")
    if seq.annotations is not None and T >= 1:
        if seq.annotations.total_frames != T:
            v.append(f"annotations cover {seq.annotations.total_frames} frames, sequence has {T}")
    return ValidationReport(sequence_id=seq.id, violations=tuple(v))


def _point_list(p):
    return [float(p[0]), float(p[1]), float(p[2])]


def sequence_to_json(seq: InteractionSequence) -> dict:
    frames = []
    for f in seq.frames:
        frames.append({
            "t": f.t,
            "agent1": {j: _point_list(f.agent1[j]) for j in JOINT_NAMES},
            "agent2": {j: _point_list(f.agent2[j]) for j in JOINT_NAMES},
            "object": _point_list(f.obj) if f.obj is not None else None,
        })
    out = {
        "id": seq.id,
        "label": seq.label,
        "fps": seq.fps,
        "object_present": seq.object_present,
        "frames": frames,
    }
    if seq.annotations is not None:
        out["annotations"] = seq.annotations.to_json()
    return out


def sequence_from_json(obj: dict) -> InteractionSequence:
    frames = []
    for f in obj["frames"]:
        a1 = {j: np.asarray(f["agent1"][j], dtype=float) for j in f["agent1"]}
        a2 = {j: np.asarray(f["agent2"][j], dtype=float) for j in f["agent2"]}
        op = f.get("object")
        frames.append(Frame(t=int(f["t"]), agent1=a1, agent2=a2,
                            obj=np.asarray(op, dtype=float) if op is not None else None))
    ann = obj.get("annotations")
    parse = SubEventParse.from_json(ann) if ann else None
    return make_sequence(obj["id"], obj["label"], obj["fps"], frames, annotations=parse)


def save_sequence(seq: InteractionSequence, path) -> None:
    """Write one sequence JSON file; full float precision so round-trips are exact."""
    path = Path(path)
    with path.open("w", encoding="utf-8") as fp:
        json.dump(sequence_to_json(seq), fp, sort_keys=True)


def load_sequence(path) -> InteractionSequence:
    path = Path(path)
    try:
        with path.open("r", encoding="utf-8") as fp:
            obj = json.load(fp)
        seq = sequence_from_json(obj)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise DataError(f"cannot load sequence file {path}: {exc}") from exc
    report = validate_sequence(seq)
    if not report.ok:
        raise DataError(f"invalid sequence {seq.id!r} in {path}: " + "; ".join(report.violations))
    return seq


def save_dataset(ds: Dataset, directory) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    with (directory / "dictionary.json").open("w", encoding="utf-8") as fp:
        json.dump({"dictionary": list(ds.dictionary)}, fp, sort_keys=True)
    for seq in ds.sequences:
        save_sequence(seq, directory / f"{seq.id}.json")


def load_dataset(path) -> Dataset:
    """Load and validate every sequence file in a dataset directory."""
    directory = Path(path)
    if not directory.is_dir():
        raise DataError(f"dataset directory {directory} does not exist")
    dict_file = directory / "dictionary.json"
    if dict_file.exists():
        try:
            with dict_file.open("r", encoding="utf-8") as fp:
                dictionary = tuple(json.load(fp)["dictionary"])
        except (OSError, ValueError, KeyError) as exc:
            raise DataError(f"cannot load {dict_file}: {exc}") from exc
    else:
        dictionary = None
    sequences = []
    for f in sorted(directory.glob("*.json")):
        if f.name == "dictionary.json":
            continue
        sequences.append(load_sequence(f))
    if not sequences:
        raise DataError(f"no sequence files found in {directory}")
    if dictionary is None:
        dictionary = tuple(sorted({s.label for s in sequences}))
    for s in sequences:
        if s.label not in dictionary:
            raise DataError(f"sequence {s.id!r} has label {s.label!r} not in the dictionary")
    return Dataset(sequences=tuple(sequences), dictionary=dictionary)
