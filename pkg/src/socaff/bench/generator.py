"""Procedural two-agent interaction generator with planted ground truth.

Five parameterized scenarios (handshake, high_five, pull_up, throw_catch,
hand_over) animate two skeletons through three phases; the phase boundaries
and the contact-phase joint grouping are the planted structure that learning
is expected to recover. Per-instance randomization: phase-duration jitter
(+-20%), contact-geometry jitter, actor limb scales, a random global yaw +
translation, and i.i.d. Gaussian joint noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..data import (JOINT_INDEX, JOINT_NAMES, Dataset, Frame, SubEventParse,
                    make_sequence)
from ..geometry import two_bone_chain

SCENARIO_KINDS = ("handshake", "high_five", "pull_up", "throw_catch", "hand_over")
OBJECT_KINDS = frozenset({"throw_catch", "hand_over"})

# canonical local pose: SpineBase at the origin, facing +x, y to the left
_LOCAL_POSE = {
    "SpineBase": (0.0, 0.0, 0.0),
    "SpineMid": (0.0, 0.0, 0.25),
    "Neck": (0.0, 0.0, 0.50),
    "Head": (0.0, 0.0, 0.65),
    "ShoulderL": (0.0, 0.20, 0.45),
    "ElbowL": (0.0, 0.24, 0.13),
    "WristL": (0.0, 0.26, -0.18),
    "ShoulderR": (0.0, -0.20, 0.45),
    "ElbowR": (0.0, -0.24, 0.13),
    "WristR": (0.0, -0.26, -0.18),
    "HipL": (0.0, 0.10, -0.05),
    "KneeL": (0.0, 0.11, -0.50),
    "AnkleL": (0.0, 0.12, -0.93),
    "HipR": (0.0, -0.10, -0.05),
    "KneeR": (0.0, -0.11, -0.50),
    "AnkleR": (0.0, -0.12, -0.93),
}
BASE_HEIGHT = 1.0
ANKLE_HEIGHT = 0.07

_ARMS = {"L": ("ShoulderL", "ElbowL", "WristL"), "R": ("ShoulderR", "ElbowR", "WristR")}
_LEGS = {"L": ("HipL", "KneeL", "AnkleL"), "R": ("HipR", "KneeR", "AnkleR")}

_V = {j: np.asarray(p) for j, p in _LOCAL_POSE.items()}
ARM_REACH = float(np.linalg.norm(_V["ElbowR"] - _V["ShoulderR"])
                  + np.linalg.norm(_V["WristR"] - _V["ElbowR"]))  # at scale 1


@dataclass(frozen=True)
class Phase:
    duration: int
    name: str


@dataclass(frozen=True)
class Scenario:
    kind: str
    phases: tuple
    noise_sigma: float = 0.02
    actor_scale: float = 1.0

    def __post_init__(self):
        if self.kind not in SCENARIO_KINDS:
            raise ValueError(f"unknown scenario {self.kind!r}; valid: {SCENARIO_KINDS}")
        if any(p.duration < 3 for p in self.phases):
            raise ValueError("phase durations must be >= 3 frames")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be >= 0")

    @property
    def object_present(self):
        return self.kind in OBJECT_KINDS


_PHASE_NAMES = {
    "handshake": ("approach", "reach", "withdraw"),
    "high_five": ("approach", "raise", "lower"),
    "pull_up": ("crouch", "grip", "rise"),
    "throw_catch": ("windup", "flight", "lower"),
    "hand_over": ("approach", "transfer", "withdraw"),
}


def make_scenario(kind, phase_frames=(20, 20, 20), noise_sigma=0.02, actor_scale=1.0) -> Scenario:
    names = _PHASE_NAMES[kind]
    phases = tuple(Phase(duration=int(d), name=n) for d, n in zip(phase_frames, names))
    return Scenario(kind=kind, phases=phases, noise_sigma=noise_sigma, actor_scale=actor_scale)


def planted_contact_group(kind) -> frozenset:
    """Entities that co-locate at the end of the contact phase (sub-event 2)."""
    if kind == "throw_catch":
        return frozenset({"2:WristR", "object"})
    if kind == "hand_over":
        return frozenset({"1:WristR", "2:WristR", "object"})
    return frozenset({"1:WristR", "2:WristR"})


def _place(scale, base, yaw):
    """World joint array (16, 3) for a scaled canonical pose at base position/yaw."""
    c, s = math.cos(yaw), math.sin(yaw)
    out = np.empty((len(JOINT_NAMES), 3))
    for i, name in enumerate(JOINT_NAMES):
        lx, ly, lz = _LOCAL_POSE[name]
        lx, ly, lz = lx * scale, ly * scale, lz * scale
        out[i] = (base[0] + c * lx - s * ly, base[1] + s * lx + c * ly, base[2] + lz)
    return out


def _set_chain(skel, chain, target):
    root, mid, end = (JOINT_INDEX[j] for j in chain)
    new_mid, new_end = two_bone_chain(skel[root], skel[mid], skel[end], target)
    skel[mid], skel[end] = new_mid, new_end


def _plant_feet(skel, scale, yaw, stance=0.0):
    """Pin ankles to ground height under their placed xy, bending knees.

    A nonzero stance widens/narrows the feet laterally (in the body frame).
    """
    lat = np.array([-math.sin(yaw), math.cos(yaw), 0.0])  # body-left direction
    for side, chain in _LEGS.items():
        aidx = JOINT_INDEX[chain[2]]
        sign = 1.0 if side == "L" else -1.0
        target = skel[aidx] + sign * stance * lat
        target[2] = ANKLE_HEIGHT * scale
        _set_chain(skel, chain, target)


class _InstanceParams:
    """Per-instance randomized geometry shared by all scenario programs."""

    def __init__(self, scenario, rng, scales):
        self.s1 = scenario.actor_scale * float(rng.choice(scales))
        self.s2 = scenario.actor_scale * float(rng.choice(scales))
        self.mean_s = 0.5 * (self.s1 + self.s2)
        self.durations = [max(3, int(round(p.duration * (1.0 + rng.uniform(-0.2, 0.2)))))
                          for p in scenario.phases]
        self.d0 = 2.4 * self.mean_s * (1.0 + rng.uniform(-0.12, 0.12))
        self.d1 = 0.85 * self.mean_s * (1.0 + rng.uniform(-0.12, 0.12))
        self.meet_y = rng.uniform(-0.025, 0.025) * self.mean_s
        self.meet_dz = rng.uniform(-0.025, 0.025) * self.mean_s
        self.lat1 = rng.uniform(-0.08, 0.08)
        self.lat2 = rng.uniform(-0.08, 0.08)
        self.yaw = rng.uniform(0.0, 2.0 * math.pi)
        self.translation = np.array([rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0), 0.0])
        # per-instance idiosyncrasy: posture varies across actors so that only
        # the planted contact relation stays tight across instances
        self.base_lift = rng.uniform(-0.06, 0.06, 2)
        self.stance = rng.uniform(-0.08, 0.08, 2)
        self.wrist_rest = {(a, side): rng.uniform(-0.12, 0.12, 3)
                           for a in (0, 1) for side in ("L", "R")}


def _shoulder_r(base, yaw, scale):
    lx, ly, lz = _LOCAL_POSE["ShoulderR"]
    c, s = math.cos(yaw), math.sin(yaw)
    return np.array([base[0] + (c * lx - s * ly) * scale,
                     base[1] + (s * lx + c * ly) * scale, base[2] + lz * scale])


def _reach_point(sh_a, r_a, sh_b, r_b, offset):
    """Point between two shoulders, split proportionally to arm reach.

    Lies strictly inside both reach balls whenever the shoulders are closer
    than the summed reach, so small offsets keep two-arm contact targets
    attainable without clamping.
    """
    w = r_a / (r_a + r_b)
    return sh_a + (sh_b - sh_a) * w + offset


def _simulate(scenario: Scenario, p: _InstanceParams):
    """Run the phase programs in the canonical axis; returns (a1, a2, obj) tracks."""
    kind = scenario.kind
    T = sum(p.durations)
    a1 = np.empty((T, 16, 3))
    a2 = np.empty((T, 16, 3))
    obj = np.empty((T, 3)) if scenario.object_present else None

    static_kinds = {"throw_catch"}
    d_start = 2.0 * p.mean_s if kind in static_kinds else p.d0
    d_end = 2.0 * p.mean_s if kind in static_kinds else (0.7 * p.mean_s if kind == "pull_up" else p.d1)

    # contact-phase geometry anchored to the right shoulders at contact distance
    crouch_c = 0.35 if kind == "pull_up" else 0.0
    sh1c = _shoulder_r(np.array([-0.5 * d_end, p.lat1, (BASE_HEIGHT + p.base_lift[0]) * p.s1]), 0.0, p.s1)
    sh2c = _shoulder_r(np.array([0.5 * d_end, p.lat2, (BASE_HEIGHT + p.base_lift[1] - crouch_c) * p.s2]),
                       math.pi, p.s2)
    r1, r2 = ARM_REACH * p.s1, ARM_REACH * p.s2
    jit = np.array([0.0, p.meet_y, p.meet_dz])
    if kind in ("handshake", "hand_over"):
        meet = _reach_point(sh1c, r1, sh2c, r2, jit + np.array([0.0, 0.0, -0.035 * p.mean_s]))
    elif kind == "high_five":
        meet = _reach_point(sh1c, r1, sh2c, r2, jit + np.array([0.0, 0.0, 0.035 * p.mean_s]))
    elif kind == "pull_up":
        grip_low = _reach_point(sh1c, r1, sh2c, r2, jit + np.array([0.0, 0.0, -0.15 * p.mean_s]))
        sh2s = _shoulder_r(np.array([0.5 * d_end, p.lat2, BASE_HEIGHT * p.s2]), math.pi, p.s2)
        grip_high = _reach_point(sh1c, r1, sh2s, r2, jit + np.array([0.0, 0.0, -0.05 * p.mean_s]))

    rest_w1 = rest_w2 = None  # placed rest wrist targets, refreshed per frame
    t = 0
    throw_p0 = catch_p1 = None
    for phase_idx, dur in enumerate(p.durations):
        for i in range(1, dur + 1):
            # constant-velocity progress keeps phase boundaries identifiable
            u = i / dur
            # contact phase reaches its sub-goal 2 frames early and holds, so
            # the exact contact geometry is visible within the +-2 boundary
            # tolerance that learning is evaluated at
            u_c = min(1.0, i / max(1, dur - 2)) if phase_idx == 1 else u
            # body placement
            if kind == "pull_up":
                d = d_start + (d_end - d_start) * (u if phase_idx == 0 else 1.0)
                crouch = (0.35 * u if phase_idx == 0 else (0.35 if phase_idx == 1 else 0.35 * (1.0 - u)))
            elif kind in static_kinds:
                d, crouch = d_start, 0.0
            else:
                d = d_start + (d_end - d_start) * (u if phase_idx == 0 else 1.0)
                crouch = 0.0
            base1 = np.array([-0.5 * d, p.lat1, (BASE_HEIGHT + p.base_lift[0]) * p.s1])
            base2 = np.array([0.5 * d, p.lat2, (BASE_HEIGHT + p.base_lift[1] - crouch) * p.s2])
            s1 = _place(p.s1, base1, 0.0)
            s2 = _place(p.s2, base2, math.pi)
            _plant_feet(s1, p.s1, 0.0, p.stance[0])
            _plant_feet(s2, p.s2, math.pi, p.stance[1])
            rest_w1 = s1[JOINT_INDEX["WristR"]] + p.wrist_rest[(0, "R")]
            rest_w2 = s2[JOINT_INDEX["WristR"]] + p.wrist_rest[(1, "R")]
            _set_chain(s1, _ARMS["L"], s1[JOINT_INDEX["WristL"]] + p.wrist_rest[(0, "L")])
            _set_chain(s2, _ARMS["L"], s2[JOINT_INDEX["WristL"]] + p.wrist_rest[(1, "L")])

            # right-arm programs and the object
            w1, w2, o = rest_w1, rest_w2, None
            if kind in ("handshake", "high_five"):
                if phase_idx == 1:
                    w1 = rest_w1 + (meet - rest_w1) * u_c
                    w2 = rest_w2 + (meet - rest_w2) * u_c
                elif phase_idx == 2:
                    w1 = meet + (rest_w1 - meet) * u
                    w2 = meet + (rest_w2 - meet) * u
            elif kind == "pull_up":
                if phase_idx == 1:
                    w1 = rest_w1 + (grip_low - rest_w1) * u_c
                    w2 = rest_w2 + (grip_low - rest_w2) * u_c
                elif phase_idx == 2:
                    g = grip_low + (grip_high - grip_low) * u
                    w1 = w2 = g
            elif kind == "throw_catch":
                sh1 = s1[JOINT_INDEX["ShoulderR"]]
                sh2 = s2[JOINT_INDEX["ShoulderR"]]
                throw = sh1 + np.array([0.30 * p.s1, 0.0, 0.10 * p.s1])
                catch = sh2 + np.array([-0.30 * p.s2, 0.0, 0.10 * p.s2])
                if phase_idx == 0:
                    w1 = rest_w1 + (throw - rest_w1) * u
                    o = w1
                    throw_p0 = throw
                elif phase_idx == 1:
                    w1 = throw + (rest_w1 - throw) * u  # follow-through
                    w2 = rest_w2 + (catch - rest_w2) * u_c
                    catch_p1 = catch
                    o = ((1.0 - u_c) * throw_p0 + u_c * catch
                         + 4.0 * u_c * (1.0 - u_c) * np.array([0.0, 0.0, 0.3 * p.mean_s]))
                else:
                    drop = s2[JOINT_INDEX["SpineBase"]] + np.array([-0.25 * p.s2, -0.2 * p.s2, 0.05])
                    w2 = catch_p1 + (drop - catch_p1) * u
                    o = w2
            elif kind == "hand_over":
                if phase_idx == 0:
                    o = rest_w1
                elif phase_idx == 1:
                    w1 = rest_w1 + (meet - rest_w1) * u_c
                    w2 = rest_w2 + (meet - rest_w2) * u_c
                    o = w1
                else:
                    w1 = meet + (rest_w1 - meet) * u
                    w2 = meet + (rest_w2 - meet) * u
                    o = w2

            _set_chain(s1, _ARMS["R"], np.asarray(w1))
            _set_chain(s2, _ARMS["R"], np.asarray(w2))
            a1[t], a2[t] = s1, s2
            if obj is not None:
                obj[t] = o
            t += 1
    return a1, a2, obj


def _apply_rigid(track, yaw, translation):
    c, s = math.cos(yaw), math.sin(yaw)
    out = np.empty_like(track)
    out[..., 0] = c * track[..., 0] - s * track[..., 1] + translation[0]
    out[..., 1] = s * track[..., 0] + c * track[..., 1] + translation[1]
    out[..., 2] = track[..., 2] + translation[2]
    return out


def _to_sequence(seq_id, label, a1, a2, obj, durations, fps=15.0):
    frames = []
    for t in range(a1.shape[0]):
        frames.append(Frame(
            t=t + 1,
            agent1={j: a1[t, i] for i, j in enumerate(JOINT_NAMES)},
            agent2={j: a2[t, i] for i, j in enumerate(JOINT_NAMES)},
            obj=obj[t] if obj is not None else None,
        ))
    bounds = np.cumsum(durations)
    intervals = [(int(a) + 1, int(b)) for a, b in zip(np.concatenate([[0], bounds[:-1]]), bounds)]
    parse = SubEventParse(intervals, list(range(1, len(intervals) + 1)))
    return make_sequence(seq_id, label, fps, frames, annotations=parse)


def generate_instance(scenario: Scenario, rng, scales=(1.0,), seq_id="instance"):
    p = _InstanceParams(scenario, rng, np.asarray(scales, dtype=float))
    a1, a2, obj = _simulate(scenario, p)
    a1 = _apply_rigid(a1, p.yaw, p.translation)
    a2 = _apply_rigid(a2, p.yaw, p.translation)
    if obj is not None:
        obj = _apply_rigid(obj, p.yaw, p.translation)
    if scenario.noise_sigma > 0:
        a1 = a1 + rng.normal(0.0, scenario.noise_sigma, a1.shape)
        a2 = a2 + rng.normal(0.0, scenario.noise_sigma, a2.shape)
        if obj is not None:
            obj = obj + rng.normal(0.0, scenario.noise_sigma, obj.shape)
    return _to_sequence(seq_id, scenario.kind, a1, a2, obj, p.durations)


def generate_synthetic(scenario: Scenario, n_instances: int, rng, scales=(1.0,),
                       id_prefix=None) -> Dataset:
    """Dataset of procedurally animated instances with planted annotations."""
    if n_instances < 1:
        raise ValueError("n_instances must be >= 1")
    prefix = id_prefix or scenario.kind
    seqs = [generate_instance(scenario, rng, scales=scales, seq_id=f"{prefix}_{i:03d}")
            for i in range(n_instances)]
    return Dataset(sequences=tuple(seqs), dictionary=(scenario.kind,))


def grouping_probe_dataset(n_instances: int, rng, noise_sigma=0.02,
                           ankle_entity="2:AnkleL", ankle_sigma=0.3) -> Dataset:
    """Handshake-style dataset with one ankle replaced by i.i.d. spatial noise.

    The wrist pairing at the contact sub-goal stays planted; the noisy ankle
    has no consistent spatial relation to anything and should end up Null.
    """
    scenario = make_scenario("handshake", noise_sigma=noise_sigma)
    agent, joint = ankle_entity.split(":")
    jidx = JOINT_INDEX[joint]
    seqs = []
    for i in range(n_instances):
        p = _InstanceParams(scenario, rng, np.array([1.0]))
        a1, a2, obj = _simulate(scenario, p)
        track = a1 if agent == "1" else a2
        center = track[0, jidx] + rng.uniform(-0.3, 0.3, 3)
        track[:, jidx] = center + rng.normal(0.0, ankle_sigma, (track.shape[0], 3))
        a1 = _apply_rigid(a1, p.yaw, p.translation)
        a2 = _apply_rigid(a2, p.yaw, p.translation)
        if noise_sigma > 0:
            a1 = a1 + rng.normal(0.0, noise_sigma, a1.shape)
            a2 = a2 + rng.normal(0.0, noise_sigma, a2.shape)
        seqs.append(_to_sequence(f"probe_{i:03d}", "handshake", a1, a2, None, p.durations))
    return Dataset(sequences=tuple(seqs), dictionary=("handshake",))
