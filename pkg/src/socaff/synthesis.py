"""Online synthesis of one agent's motion in reaction to the other agent.

Every step extends the synthesized track by a short window: hold the pose,
re-decode the latent sub-event of the extended prefix, sample the ongoing
sub-event's end time from its duration prior, draw candidate sub-goal
placements of the modeled joints from the spatial potentials, interpolate
them to the window end, keep the likeliest, and lift the winner to a full
skeleton via the pose codebook with exact limb-chain placement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .data import (BASE_JOINT, JOINT_INDEX, JOINT_NAMES, MODELED_JOINTS,
                   Frame, InteractionSequence, make_sequence)
from .geometry import (apply_yaw_translation, align_yaw_translate,
                       cyl_features_batch, facing_x_axis, two_bone_chain)
from .inference import dp_parse_parts
from .model import InteractionModel, SequenceFeatures, centroid_joint_map
from .stats import KMeansModel

LIMB_CHAINS = (
    ("ShoulderL", "ElbowL", "WristL"),
    ("ShoulderR", "ElbowR", "WristR"),
    ("HipL", "KneeL", "AnkleL"),
    ("HipR", "KneeR", "AnkleR"),
)


@dataclass(frozen=True)
class SynthesisConfig:
    step: int = 5  # frames advanced per iteration
    warm_start: int = 10  # frames of the synthesized agent given as input
    n_candidates: int = 100
    duration_retry_cap: int = 50
    seed: int = 0

    def __post_init__(self):
        if self.step < 1 or self.warm_start < 2 or self.n_candidates < 1:
            raise ValueError("step >= 1, warm_start >= 2, n_candidates >= 1 required")


@dataclass
class SynthesisState:
    a1: np.ndarray  # (T, 16, 3) observed
    obj: np.ndarray | None  # (T, 3) observed
    a2: np.ndarray  # (T, 16, 3); filled through frame tau
    tau: int
    rng: np.random.Generator
    parse: object = None
    subevent: int = 0
    predicted_end: int = 0
    trace: list = field(default_factory=list)


def predict_subevent_end(parse, model: InteractionModel, tau: int, rng,
                         config: SynthesisConfig) -> int:
    """Sample the ongoing sub-event's complete duration; returns its end frame.

    Rejection-samples |T| >= elapsed from the duration prior; after the retry
    cap, falls back to max(elapsed, mode), which ends the sub-event now when
    the elapsed time is already in the distribution's far tail.
    """
    t1 = parse.intervals[-1][0]
    s = parse.labels[-1]
    elapsed = max(1, tau - t1 + 1)
    dist = model.potentials.duration[s]
    for _ in range(config.duration_retry_cap):
        d = int(round(dist.sample(rng)))
        if d >= elapsed:
            return t1 + d - 1
    return t1 + max(elapsed, int(round(dist.mode))) - 1


def sample_subgoal_candidates(state: SynthesisState, model: InteractionModel,
                              s: int, tau2: int, n: int, rng, t_obs=None) -> np.ndarray:
    """(n, 5, 3) candidate sub-goal placements of the synthesized agent's joints.

    The candidates stand for the modeled joints at the predicted sub-event
    end tau2. Null joints stay at their current position; affordable joints
    sample offset features from their spatial potential and are placed around
    the group reference: the mass center of the group's observable
    (non-agent-2) members at the newest observed frame (no extrapolation to
    tau2), or the other agent's base joint when there is none.
    """
    if t_obs is None:
        t_obs = min(state.tau, state.a1.shape[0]) - 1  # 0-based newest observed frame
    obs_now = {}
    for j in MODELED_JOINTS:
        obs_now[f"1:{j}"] = state.a1[t_obs, JOINT_INDEX[j]]
    if state.obj is not None:
        obs_now["object"] = state.obj[t_obs]
    base1 = state.a1[t_obs, JOINT_INDEX[BASE_JOINT]]
    base2 = state.a2[state.tau - 1, JOINT_INDEX[BASE_JOINT]]
    x_axis = facing_x_axis(base2, base1)
    y_axis = np.array([-x_axis[1], x_axis[0], 0.0])
    out = np.empty((n, len(MODELED_JOINTS), 3))
    for ji, j in enumerate(MODELED_JOINTS):
        entity = f"2:{j}"
        gid = model.grouping.group_of(s, entity)
        if gid == 0:
            out[:, ji] = state.a2[state.tau - 1, JOINT_INDEX[j]]
            continue
        members = model.grouping.groups(s)[gid]
        others = [m for m in members if m != entity]
        if not others:
            ref = base1  # singleton rule: the other agent's base joint
        else:
            # other members' mass center: observed entities at the newest
            # observed frame, synthesized-agent entities held at their
            # current positions
            pts = [obs_now[m] if m in obs_now
                   else state.a2[state.tau - 1, JOINT_INDEX[m.split(":")[1]]]
                   for m in others]
            ref = np.mean(pts, axis=0)
        cell = model.potentials.spatial[(s, entity)]
        r = cell.r_xy.sample(rng, size=n)
        dz = cell.dz.sample(rng, size=n)
        sign = cell.dz_sign.sample(rng, size=n)
        az = cell.azimuth.sample(rng, size=n)
        out[:, ji] = (ref[None, :]
                      + r[:, None] * (np.cos(az)[:, None] * x_axis[None, :]
                                      + np.sin(az)[:, None] * y_axis[None, :])
                      + (sign * dz)[:, None] * np.array([0.0, 0.0, 1.0])[None, :])
    return out


def _score_candidates(cands_now: np.ndarray, state: SynthesisState,
                      model: InteractionModel, s: int, u: float, t_end: int) -> np.ndarray:
    """Motion + progress-scaled spatial log potential per candidate."""
    n = cands_now.shape[0]
    entities = model.entities
    grouping = model.grouping
    pots = model.potentials
    t_obs = t_end - 1
    # candidate entity positions at the window end: observed entities fixed
    pos = np.empty((n, len(entities), 3))
    for i, e in enumerate(entities):
        if e == "object":
            pos[:, i] = state.obj[t_obs]
        else:
            agent, joint = e.split(":")
            if agent == "1":
                pos[:, i] = state.a1[t_obs, JOINT_INDEX[joint]]
            else:
                pos[:, i] = cands_now[:, MODELED_JOINTS.index(joint)]
    base1 = state.a1[t_obs, JOINT_INDEX[BASE_JOINT]]
    base2_cur = state.a2[state.tau - 1, JOINT_INDEX[BASE_JOINT]]
    x1 = facing_x_axis(base1, base2_cur)
    x2 = facing_x_axis(base2_cur, base1)
    x_of = {1: x1, 2: x2}
    scores = np.zeros(n)
    # motion: displacement of each agent-2 joint over the step window
    for ji, j in enumerate(MODELED_JOINTS):
        entity = f"2:{j}"
        cell = pots.motion[(s, entity)]
        delta = cands_now[:, ji] - state.a2[state.tau - 1, JOINT_INDEX[j]][None, :]
        r, z, sg, az = cyl_features_batch(delta, np.broadcast_to(x2, (n, 3)))
        scores += (cell.r_xy.log_pdf(r) + cell.dz.log_pdf(z)
                   + cell.dz_sign.log_pdf(sg) + cell.azimuth.log_pdf(az))
    # spatial: all affordable entities, as if the window end were the sub-goal
    eidx = {e: i for i, e in enumerate(entities)}
    spatial = np.zeros(n)
    for gid, members in grouping.groups(s).items():
        for e in members:
            others = [eidx[m] for m in members if m != e]
            if others:
                ref = pos[:, others].mean(axis=1)
            else:
                ref_pt = base1 if (e == "object" or e.startswith("2")) else base2_cur
                ref = np.broadcast_to(ref_pt, (n, 3))
            cell = pots.spatial[(s, e)]
            owner = 1 if e == "object" else int(e.split(":")[0])
            r, z, sg, az = cyl_features_batch(pos[:, eidx[e]] - ref,
                                              np.broadcast_to(x_of[owner], (n, 3)))
            spatial += (cell.r_xy.log_pdf(r) + cell.dz.log_pdf(z)
                        + cell.dz_sign.log_pdf(sg) + cell.azimuth.log_pdf(az))
    return scores + u * spatial


def fit_full_body(targets: dict, codebook: KMeansModel, current_full: dict) -> dict:
    """Lift 5 modeled-joint targets to a full skeleton via the pose codebook.

    Picks the centroid with the smallest 5-joint residual after yaw +
    translation alignment, snaps the base joint exactly, then solves each
    limb chain analytically so wrists/ankles hit their targets with the
    centroid's bone lengths (out-of-reach targets clamp to full extension).
    """
    names = list(targets.keys())
    best = None
    for ci in range(codebook.k):
        cjm = centroid_joint_map(codebook.centroids[ci])
        theta, v = align_yaw_translate(cjm, targets)
        res = sum(float(np.sum((apply_yaw_translation(cjm[j][None, :], theta, v)[0] - targets[j]) ** 2))
                  for j in names)
        if best is None or res < best[0]:
            best = (res, ci, theta, v)
    _, ci, theta, v = best
    full = apply_yaw_translation(centroid_joint_map(codebook.centroids[ci]), theta, v)
    shift = np.asarray(targets[BASE_JOINT]) - full[BASE_JOINT]
    full = {j: p + shift for j, p in full.items()}
    for root, mid, end in LIMB_CHAINS:
        if end in targets:
            full[mid], full[end] = two_bone_chain(full[root], full[mid], full[end], targets[end])
    return full


def _chain_lengths(joint_map: dict) -> dict:
    out = {}
    for root, mid, end in LIMB_CHAINS:
        out[(root, mid, end)] = (float(np.linalg.norm(joint_map[mid] - joint_map[root])),
                                 float(np.linalg.norm(joint_map[end] - joint_map[mid])))
    return out


def synthesize_step(state: SynthesisState, model: InteractionModel,
                    config: SynthesisConfig) -> SynthesisState:
    """Advance the synthesized track by one window of at most `step` frames."""
    T = state.a1.shape[0]
    dt = min(config.step, T - state.tau)
    t_end = state.tau + dt
    # hold the current pose through the window, then re-decode the prefix
    held = state.a2[state.tau - 1]
    state.a2[state.tau: t_end] = held
    feats = SequenceFeatures(state.a1[:t_end], state.a2[:t_end],
                             state.obj[:t_end] if state.obj is not None else None)
    parse, _ = dp_parse_parts(feats, model.grouping, model.potentials, model.num_subevents)
    s = parse.labels[-1]
    tau2 = predict_subevent_end(parse, model, state.tau, state.rng, config)
    cands = sample_subgoal_candidates(state, model, s, tau2, config.n_candidates,
                                      state.rng, t_obs=t_end - 1)
    u = 1.0 if tau2 <= state.tau else min(1.0, dt / (tau2 - state.tau))
    cur5 = np.stack([held[JOINT_INDEX[j]] for j in MODELED_JOINTS])
    cands_now = cur5[None, :, :] + (cands - cur5[None, :, :]) * u
    scores = _score_candidates(cands_now, state, model, s, u, t_end)
    best = int(np.argmax(scores))
    target5 = cands_now[best]
    cur_full = {j: held[JOINT_INDEX[j]].copy() for j in JOINT_NAMES}
    if np.array_equal(target5, cur5):
        # nothing moves (all-Null sub-event): hold the entire body
        for t in range(state.tau, t_end):
            state.a2[t] = held
    else:
        targets = {j: target5[ji] for ji, j in enumerate(MODELED_JOINTS)}
        fitted = fit_full_body(targets, model.codebook, cur_full)
        lengths = _chain_lengths(fitted)
        for t in range(state.tau, t_end):
            w = (t - state.tau + 1) / dt
            frame = {j: (1.0 - w) * cur_full[j] + w * fitted[j] for j in JOINT_NAMES}
            if w < 1.0:
                for chain in LIMB_CHAINS:
                    root, mid, end = chain
                    frame[mid], frame[end] = two_bone_chain(
                        frame[root], frame[mid], frame[end], frame[end], lengths=lengths[chain])
            for j, p in frame.items():
                state.a2[t, JOINT_INDEX[j]] = p
    state.trace.append({"tau": state.tau, "window_end": t_end, "subevent": int(s),
                        "predicted_end": int(tau2), "best_score": float(scores[best])})
    state.tau = t_end
    state.parse = parse
    state.subevent = int(s)
    state.predicted_end = int(tau2)
    return state


def synthesize(observed: InteractionSequence, model: InteractionModel,
               config: SynthesisConfig = SynthesisConfig()) -> tuple:
    """Synthesize agent 2's track in reaction to agent 1 (and the object).

    The first `warm_start` frames of agent 2 are taken from the input
    sequence; the rest are generated online. Returns (sequence, trace).
    """
    T = observed.num_frames
    ap = observed.agent_positions
    a1 = np.array(ap[:, 0])
    a2 = np.array(ap[:, 1])
    obj = np.array(observed.object_track) if observed.object_present else None
    t0 = min(config.warm_start, T)
    work = np.zeros_like(a2)
    work[:t0] = a2[:t0]
    state = SynthesisState(a1=a1, obj=obj, a2=work, tau=t0,
                           rng=np.random.default_rng(config.seed))
    while state.tau < T:
        state = synthesize_step(state, model, config)
    frames = []
    for t in range(T):
        frames.append(Frame(
            t=t + 1,
            agent1={j: a1[t, i] for i, j in enumerate(JOINT_NAMES)},
            agent2={j: state.a2[t, i] for i, j in enumerate(JOINT_NAMES)},
            obj=obj[t] if obj is not None else None,
        ))
    seq = make_sequence(f"{observed.id}_synth", observed.label, observed.fps, frames)
    return seq, state.trace
