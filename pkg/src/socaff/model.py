"""The probabilistic interaction model: groupings, potentials, and log-probability terms.

An interaction instance is a parse graph (label, latent sub-event parsing,
observed skeletons). Per sub-event type, each modeled entity (an agent joint
or the object) is either Null or assigned to a functional group. Affordable
entities carry a spatial potential on their offset from the group reference
at the sub-goal frame tau2 and a motion potential on their displacement over
the sub-event; Null entities carry only a motion potential with exponential
distance factors, which rewards staying put.

All features are relative (facing-frame azimuths, distances), so every
probability term is invariant to global translation + yaw rotation.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .data import (BASE_JOINT, JOINT_INDEX, JOINT_NAMES, MODELED_JOINTS,
                   InteractionSequence, SubEventParse)
from .geometry import cyl_features_batch, facing_x_axis_batch
from .stats import (Bernoulli, Exponential, KMeansModel, LogNormal, VonMises,
                    Weibull, dist_from_json, dist_to_json, fit_mle)

OBJECT_ENTITY = "object"


def entity_list(object_present: bool):
    """Canonical modeled entity order: agent-1 joints, agent-2 joints, object."""
    names = [f"{a}:{j}" for a in (1, 2) for j in MODELED_JOINTS]
    if object_present:
        names.append(OBJECT_ENTITY)
    return tuple(names)


def entity_agent(entity: str) -> int:
    """Owning agent (1 or 2); the object belongs to agent 1's frame."""
    return 1 if entity == OBJECT_ENTITY else int(entity.split(":")[0])


def entity_reference_agent(entity: str) -> int:
    """Agent whose base joint anchors a singleton group containing this entity."""
    return 1 if entity == OBJECT_ENTITY else 3 - int(entity.split(":")[0])


@dataclass(frozen=True)
class CrpConfig:
    """Priors of the joint selection and grouping process."""

    beta: float = 0.3  # Bernoulli inclusion prior
    gamma: float = 1.0  # CRP concentration

    def __post_init__(self):
        if not 0.0 < self.beta < 1.0:
            raise ValueError("beta must be in (0, 1)")
        if self.gamma <= 0.0:
            raise ValueError("gamma must be positive")


class Grouping:
    """Per sub-event type assignment of each entity to Null (0) or a group id >= 1.

    Stored in canonical form: group ids are dense 1..H in order of first
    appearance over the canonical entity order, so equal groupings compare
    and hash equal.
    """

    def __init__(self, assignments: dict):
        canon = {}
        for s in sorted(assignments):
            zs = assignments[s]
            remap = {}
            out = {}
            for e in sorted(zs):
                g = int(zs[e])
                if g <= 0:
                    out[e] = 0
                else:
                    if g not in remap:
                        remap[g] = len(remap) + 1
                    out[e] = remap[g]
            canon[int(s)] = out
        self._assign = canon

    @classmethod
    def all_null(cls, num_subevents: int, entities):
        return cls({s: {e: 0 for e in entities} for s in range(1, num_subevents + 1)})

    @classmethod
    def single_group(cls, num_subevents: int, entities):
        """Every entity affordable in one shared group (the no-grouping ablation)."""
        return cls({s: {e: 1 for e in entities} for s in range(1, num_subevents + 1)})

    @property
    def subevent_types(self):
        return tuple(sorted(self._assign))

    def entities(self, s: int):
        return tuple(sorted(self._assign[s]))

    def assignment(self, s: int) -> dict:
        return dict(self._assign[s])

    def group_of(self, s: int, entity: str) -> int:
        return self._assign[s][entity]

    def groups(self, s: int) -> dict:
        """Group id -> tuple of member entities (canonical order)."""
        out = {}
        for e, g in sorted(self._assign[s].items()):
            if g > 0:
                out.setdefault(g, []).append(e)
        return {g: tuple(m) for g, m in out.items()}

    def affordable(self, s: int):
        return tuple(e for e, g in sorted(self._assign[s].items()) if g > 0)

    def with_assignment(self, s: int, entity: str, group) -> "Grouping":
        """New grouping with one entity reassigned; group is 0, an id, or 'new'."""
        new = {t: dict(zs) for t, zs in self._assign.items()}
        if group == "new":
            group = max(new[s].values(), default=0) + 1
        new[s][entity] = int(group)
        return Grouping(new)

    def key(self, s: int = None):
        if s is not None:
            return tuple(self._assign[s][e] for e in sorted(self._assign[s]))
        return tuple((t, self.key(t)) for t in self.subevent_types)

    def __eq__(self, other):
        return isinstance(other, Grouping) and self._assign == other._assign

    def __hash__(self):
        return hash(self.key())

    def to_json(self):
        return {str(s): self._assign[s] for s in self.subevent_types}

    @classmethod
    def from_json(cls, obj):
        return cls({int(s): {e: int(g) for e, g in zs.items()} for s, zs in obj.items()})


@dataclass(frozen=True)
class ParseGraph:
    """One interaction instance: label, latent parsing, observed skeletons."""

    label: str
    parse: SubEventParse
    sequence: InteractionSequence

    def __post_init__(self):
        if self.parse.total_frames != self.sequence.num_frames:
            raise ValueError("parse does not cover the sequence length")


@dataclass(frozen=True)
class SpatialCell:
    """Sub-goal offset distributions of one affordable entity in one sub-event type."""

    r_xy: Weibull
    dz: Weibull
    azimuth: VonMises
    dz_sign: Bernoulli

    def log_pdf(self, feats):
        f = np.atleast_2d(feats)
        return (self.r_xy.log_pdf(f[:, 0]) + self.dz.log_pdf(f[:, 1])
                + self.dz_sign.log_pdf(f[:, 2]) + self.azimuth.log_pdf(f[:, 3]))


@dataclass(frozen=True)
class MotionCell:
    """Displacement distributions of one entity in one sub-event type.

    Distances are Weibull for affordable entities and Exponential for Null
    ones (static joints score higher under a rate fitted on near-zero moves).
    """

    r_xy: object
    dz: object
    azimuth: VonMises
    dz_sign: Bernoulli

    def log_pdf(self, feats):
        f = np.atleast_2d(feats)
        return (self.r_xy.log_pdf(f[:, 0]) + self.dz.log_pdf(f[:, 1])
                + self.dz_sign.log_pdf(f[:, 2]) + self.azimuth.log_pdf(f[:, 3]))


REF_MASS_CENTER = "mass_center"
REF_OTHER_BASE = "other_base"

# Weakly informative cells for sub-event types absent from every parse.
DEFAULT_SPATIAL = SpatialCell(Weibull(1.0, 0.5), Weibull(1.0, 0.5), VonMises(0.0, 0.0), Bernoulli(0.5))
DEFAULT_MOTION_AFFORDABLE = MotionCell(Weibull(1.0, 0.1), Weibull(1.0, 0.1), VonMises(0.0, 0.0), Bernoulli(0.5))
DEFAULT_MOTION_NULL = MotionCell(Exponential(10.0), Exponential(10.0), VonMises(0.0, 0.0), Bernoulli(0.5))
DEFAULT_DURATION = LogNormal(math.log(10.0), 0.5)


@dataclass
class PotentialSet:
    """Fitted potentials of one interaction category."""

    spatial: dict  # (s, entity) -> SpatialCell, affordable entities only
    motion: dict  # (s, entity) -> MotionCell, every entity
    duration: dict  # s -> LogNormal over |T_k|
    transition: np.ndarray  # (|S|, |S|) row-stochastic, Laplace-smoothed
    subevent_marginal: np.ndarray  # (|S|,) smoothed label frequencies (diagnostic)
    reference: dict  # (s, group id) -> REF_MASS_CENTER | REF_OTHER_BASE

    @property
    def num_subevents(self):
        return self.transition.shape[0]

    def to_json(self):
        return {
            "spatial": {f"{s}|{e}": {k: dist_to_json(getattr(c, k)) for k in ("r_xy", "dz", "azimuth", "dz_sign")}
                        for (s, e), c in sorted(self.spatial.items())},
            "motion": {f"{s}|{e}": {k: dist_to_json(getattr(c, k)) for k in ("r_xy", "dz", "azimuth", "dz_sign")}
                       for (s, e), c in sorted(self.motion.items())},
            "duration": {str(s): dist_to_json(d) for s, d in sorted(self.duration.items())},
            "transition": self.transition.tolist(),
            "subevent_marginal": self.subevent_marginal.tolist(),
            "reference": {f"{s}|{h}": r for (s, h), r in sorted(self.reference.items())},
        }

    @classmethod
    def from_json(cls, obj):
        def split_key(k):
            s, e = k.split("|", 1)
            return int(s), e

        spatial = {split_key(k): SpatialCell(**{n: dist_from_json(v[n]) for n in v}) for k, v in obj["spatial"].items()}
        motion = {split_key(k): MotionCell(**{n: dist_from_json(v[n]) for n in v}) for k, v in obj["motion"].items()}
        duration = {int(s): dist_from_json(d) for s, d in obj["duration"].items()}
        reference = {(int(k.split("|")[0]), int(k.split("|")[1])): r for k, r in obj["reference"].items()}
        return cls(spatial=spatial, motion=motion, duration=duration,
                   transition=np.asarray(obj["transition"], dtype=float),
                   subevent_marginal=np.asarray(obj["subevent_marginal"], dtype=float),
                   reference=reference)


class SequenceFeatures:
    """Dense per-frame arrays of one sequence for fast potential evaluation."""

    def __init__(self, a1, a2, obj=None):
        a1 = np.asarray(a1, dtype=float)  # (T, 16, 3)
        a2 = np.asarray(a2, dtype=float)
        self.T = a1.shape[0]
        self.entities = entity_list(obj is not None)
        midx = [JOINT_INDEX[j] for j in MODELED_JOINTS]
        cols = [a1[:, midx, :], a2[:, midx, :]]
        if obj is not None:
            cols.append(np.asarray(obj, dtype=float)[:, None, :])
        self.pos = np.concatenate(cols, axis=1)  # (T, E, 3)
        base1 = a1[:, JOINT_INDEX[BASE_JOINT], :]
        base2 = a2[:, JOINT_INDEX[BASE_JOINT], :]
        self.bases = np.stack([base1, base2], axis=1)  # (T, 2, 3)
        self.x_axes = np.stack([facing_x_axis_batch(base1, base2),
                                facing_x_axis_batch(base2, base1)], axis=1)  # (T, 2, 3)
        self.owner = np.array([entity_agent(e) - 1 for e in self.entities])
        self.ref_agent = np.array([entity_reference_agent(e) - 1 for e in self.entities])
        self.index = {e: i for i, e in enumerate(self.entities)}

    @classmethod
    def from_sequence(cls, seq: InteractionSequence):
        ap = seq.agent_positions
        return cls(ap[:, 0], ap[:, 1], seq.object_track)

    def motion_features(self, t1: int, t2: int):
        """(E, 4) displacement features over 1-based frames [t1, t2]."""
        delta = self.pos[t2 - 1] - self.pos[t1 - 1]
        x = self.x_axes[t1 - 1][self.owner]
        r, z, sg, az = cyl_features_batch(delta, x)
        return np.stack([r, z, sg, az], axis=1)

    def spatial_features(self, t2: int, members):
        """Offset features at 1-based frame t2 for one group.

        members: tuple of entity indices. Returns {entity index: (4,) feats}.
        Each member is referenced to the mass center of the group's other
        members; a singleton uses the other agent's base joint.
        """
        p = self.pos[t2 - 1]
        out = {}
        for e in members:
            others = [m for m in members if m != e]
            if others:
                ref = p[others].mean(axis=0)
            else:
                ref = self.bases[t2 - 1, self.ref_agent[e]]
            r, z, sg, az = cyl_features_batch((p[e] - ref)[None, :], self.x_axes[t2 - 1, self.owner[e]][None, :])
            out[e] = np.array([r[0], z[0], sg[0], az[0]])
        return out


def as_features(x) -> SequenceFeatures:
    if isinstance(x, SequenceFeatures):
        return x
    feats = x.__dict__.get("_feat_cache")
    if feats is None:
        feats = SequenceFeatures.from_sequence(x)
        object.__setattr__(x, "_feat_cache", feats)
    return feats


class OccurrenceData:
    """Stacked tau1/tau2 snapshots of every occurrence of one sub-event type."""

    def __init__(self, feats_list, occurrences):
        # occurrences: list of (SequenceFeatures, t1, t2)
        self.n = len(occurrences)
        f0 = occurrences[0][0]
        self.entities = f0.entities
        self.owner = f0.owner
        self.ref_agent = f0.ref_agent
        self.pos2 = np.stack([f.pos[t2 - 1] for f, _, t2 in occurrences])  # (n, E, 3)
        self.x2 = np.stack([f.x_axes[t2 - 1] for f, _, t2 in occurrences])  # (n, 2, 3)
        self.base2 = np.stack([f.bases[t2 - 1] for f, _, t2 in occurrences])  # (n, 2, 3)
        self.durations = np.array([t2 - t1 + 1 for _, t1, t2 in occurrences], dtype=float)
        self.motion = np.stack([f.motion_features(t1, t2) for f, t1, t2 in occurrences], axis=1)  # (E, n, 4)

    def spatial_features(self, members):
        """{entity index: (n, 4)} offset features for one group across occurrences.

        Each member is referenced to the mass center of the group's other
        members; a singleton uses the other agent's base joint.
        """
        out = {}
        for e in members:
            others = [m for m in members if m != e]
            if others:
                ref = self.pos2[:, others, :].mean(axis=1)
            else:
                ref = self.base2[np.arange(self.n), self.ref_agent[e]]
            r, z, sg, az = cyl_features_batch(self.pos2[:, e, :] - ref, self.x2[:, self.owner[e], :])
            out[e] = np.stack([r, z, sg, az], axis=1)
        return out


def collect_occurrences(feats_list, parses, s: int):
    """OccurrenceData of sub-event type s across instances, or None if absent."""
    occ = []
    for feats, parse in zip(feats_list, parses):
        for (t1, t2), lab in zip(parse.intervals, parse.labels):
            if lab == s:
                occ.append((feats, t1, t2))
    return OccurrenceData(feats_list, occ) if occ else None


def fit_spatial_cell(feats) -> SpatialCell:
    f = np.atleast_2d(feats)
    return SpatialCell(r_xy=fit_mle("weibull", f[:, 0]), dz=fit_mle("weibull", f[:, 1]),
                       azimuth=fit_mle("vonmises", f[:, 3]), dz_sign=fit_mle("bernoulli", f[:, 2]))


def fit_motion_cell(feats, affordable: bool) -> MotionCell:
    f = np.atleast_2d(feats)
    dist_kind = "weibull" if affordable else "exponential"
    return MotionCell(r_xy=fit_mle(dist_kind, f[:, 0]), dz=fit_mle(dist_kind, f[:, 1]),
                      azimuth=fit_mle("vonmises", f[:, 3]), dz_sign=fit_mle("bernoulli", f[:, 2]))


def fit_transitions(parses, num_subevents: int):
    """Laplace add-1 smoothed transition matrix and marginal label frequencies."""
    counts = np.zeros((num_subevents, num_subevents))
    marg = np.zeros(num_subevents)
    for parse in parses:
        for lab in parse.labels:
            marg[lab - 1] += 1
        for a, b in zip(parse.labels[:-1], parse.labels[1:]):
            counts[a - 1, b - 1] += 1
    trans = (counts + 1.0) / (counts.sum(axis=1, keepdims=True) + num_subevents)
    marginal = (marg + 1.0) / (marg.sum() + num_subevents)
    return trans, marginal


def fit_potentials(parse_graphs, grouping: Grouping) -> PotentialSet:
    """MLE potentials for every (sub-event type, entity) cell of a grouping.

    Spatial features are taken at each occurrence's final frame, motion
    features over the whole occurrence; sparsity falls back to weak priors
    and fully absent sub-event types to module defaults.
    """
    feats_list = [as_features(pg.sequence) for pg in parse_graphs]
    parses = [pg.parse for pg in parse_graphs]
    types = grouping.subevent_types
    entities = feats_list[0].entities
    spatial, motion, duration, reference = {}, {}, {}, {}
    for s in types:
        occ = collect_occurrences(feats_list, parses, s)
        groups = grouping.groups(s)
        affordable = set(grouping.affordable(s))
        if occ is None:
            for e in entities:
                if e in affordable:
                    spatial[(s, e)] = DEFAULT_SPATIAL
                motion[(s, e)] = DEFAULT_MOTION_AFFORDABLE if e in affordable else DEFAULT_MOTION_NULL
            duration[s] = DEFAULT_DURATION
            for h, members in groups.items():
                reference[(s, h)] = REF_MASS_CENTER if len(members) >= 2 else REF_OTHER_BASE
            continue
        eidx = {e: i for i, e in enumerate(occ.entities)}
        for h, members in groups.items():
            reference[(s, h)] = REF_MASS_CENTER if len(members) >= 2 else REF_OTHER_BASE
            midx = tuple(eidx[e] for e in members)
            for e, f in zip(members, occ.spatial_features(midx).values()):
                spatial[(s, e)] = fit_spatial_cell(f)
        for e in entities:
            motion[(s, e)] = fit_motion_cell(occ.motion[eidx[e]], e in affordable)
        duration[s] = fit_mle("lognormal", occ.durations)
    trans, marginal = fit_transitions(parses, len(types))
    return PotentialSet(spatial=spatial, motion=motion, duration=duration,
                        transition=trans, subevent_marginal=marginal, reference=reference)


def spatial_log_potential(seq, t1: int, t2: int, grouping: Grouping, potentials: PotentialSet, s: int) -> float:
    """Sum of affordable entities' sub-goal offset log densities at frame t2.

    Each entity's offset is measured from the mass center of its group's
    other members (other agent's base joint for singletons), matching how
    synthesis reconstructs positions from the same distributions.
    """
    feats = as_features(seq)
    total = 0.0
    for h, members in grouping.groups(s).items():
        midx = tuple(feats.index[e] for e in members)
        for e, f in zip(members, feats.spatial_features(t2, midx).values()):
            if (s, e) not in potentials.spatial:
                raise KeyError(f"no spatial potential for sub-event {s}, entity {e}")
            total += float(potentials.spatial[(s, e)].log_pdf(f)[0])
    return total


def motion_log_potential(seq, t1: int, t2: int, grouping: Grouping, potentials: PotentialSet, s: int) -> float:
    """Sum over every entity of its displacement log density over [t1, t2]."""
    feats = as_features(seq)
    f = feats.motion_features(t1, t2)
    total = 0.0
    for i, e in enumerate(feats.entities):
        if (s, e) not in potentials.motion:
            raise KeyError(f"no motion potential for sub-event {s}, entity {e}")
        total += float(potentials.motion[(s, e)].log_pdf(f[i])[0])
    return total


def segment_log_likelihood(seq, t1: int, t2: int, grouping: Grouping, potentials: PotentialSet, s: int) -> float:
    return (spatial_log_potential(seq, t1, t2, grouping, potentials, s)
            + motion_log_potential(seq, t1, t2, grouping, potentials, s))


def duration_log_prior(length: int, s: int, potentials: PotentialSet) -> float:
    if length < 1:
        raise ValueError("segment length must be >= 1")
    return float(potentials.duration[s].log_pdf(float(length)))


def grouping_log_prior(z_s, config: CrpConfig) -> float:
    """Eq.-style CRP + Bernoulli inclusion log prior of one sub-event type's grouping.

    z_s maps entity -> group id (0 = Null). The CRP factor is
    prod_h (M_h - 1)! / M! and vanishes for M <= 1.
    """
    if isinstance(z_s, Grouping):
        raise TypeError("pass one sub-event type's assignment map")
    sizes = {}
    n_aff = 0
    total = 0.0
    lb, l1b = math.log(config.beta), math.log(1.0 - config.beta)
    for e, g in z_s.items():
        if g > 0:
            sizes[g] = sizes.get(g, 0) + 1
            n_aff += 1
            total += lb
        else:
            total += l1b
    for m in sizes.values():
        total += math.lgamma(m)
    total -= math.lgamma(n_aff + 1)
    return total


def grouping_log_prior_total(grouping: Grouping, config: CrpConfig) -> float:
    return sum(grouping_log_prior(grouping.assignment(s), config) for s in grouping.subevent_types)


def parse_graph_log_prob(pg: ParseGraph, grouping: Grouping, potentials: PotentialSet,
                         dictionary_size: int) -> float:
    """Log probability of one parse graph given the grouping.

    Likelihood of every segment + uniform interaction prior + transition
    products + per-segment duration priors.
    """
    total = -math.log(dictionary_size)
    parse = pg.parse
    for (t1, t2), s in zip(parse.intervals, parse.labels):
        total += segment_log_likelihood(pg.sequence, t1, t2, grouping, potentials, s)
        total += duration_log_prior(t2 - t1 + 1, s, potentials)
    for a, b in zip(parse.labels[:-1], parse.labels[1:]):
        total += math.log(potentials.transition[a - 1, b - 1])
    return total


def joint_log_prob(parse_graphs, grouping: Grouping, potentials: PotentialSet,
                   dictionary_size: int, crp: CrpConfig) -> float:
    """Grouping prior over all sub-event types plus all instances' parse-graph terms."""
    labels = {pg.label for pg in parse_graphs}
    if len(labels) > 1:
        raise ValueError(f"instances span several interaction labels: {sorted(labels)}")
    total = grouping_log_prior_total(grouping, crp)
    for pg in parse_graphs:
        total += parse_graph_log_prob(pg, grouping, potentials, dictionary_size)
    return total


def normalized_pose_features(feats: SequenceFeatures) -> np.ndarray:
    """(T, E*3) modeled entity positions expressed in agent 1's facing frame.

    Rigid-motion invariant; the per-frame feature used for atomic-interval
    clustering and for comparing mean skeletons.
    """
    base1 = feats.bases[:, 0, :]
    x = feats.x_axes[:, 0, :]
    y = np.stack([-x[:, 1], x[:, 0], np.zeros(feats.T)], axis=1)
    d = feats.pos - base1[:, None, :]  # (T, E, 3)
    fx = np.einsum("tej,tj->te", d, x)
    fy = np.einsum("tej,tj->te", d, y)
    fz = d[:, :, 2]
    return np.stack([fx, fy, fz], axis=2).reshape(feats.T, -1)


def normalized_skeleton_vecs(a2, base1) -> np.ndarray:
    """(T, 48) full agent-2 skeletons, base-centered and yaw-normalized.

    Each skeleton is expressed in agent 2's facing frame (x-axis toward
    agent 1's base), which makes the codebook rigid-motion invariant.
    """
    a2 = np.asarray(a2, dtype=float)
    base2 = a2[:, JOINT_INDEX[BASE_JOINT], :]
    x = facing_x_axis_batch(base2, np.asarray(base1, dtype=float))
    y = np.stack([-x[:, 1], x[:, 0], np.zeros(len(x))], axis=1)
    d = a2 - base2[:, None, :]
    fx = np.einsum("tej,tj->te", d, x)
    fy = np.einsum("tej,tj->te", d, y)
    fz = d[:, :, 2]
    return np.stack([fx, fy, fz], axis=2).reshape(a2.shape[0], -1)


def centroid_joint_map(vec) -> dict:
    """Codebook centroid vector -> joint map in the normalized frame."""
    pts = np.asarray(vec, dtype=float).reshape(len(JOINT_NAMES), 3)
    return {j: pts[i] for i, j in enumerate(JOINT_NAMES)}


@dataclass
class InteractionModel:
    """Everything learned for one interaction category."""

    label: str
    num_subevents: int
    object_present: bool
    grouping: Grouping
    potentials: PotentialSet
    codebook: KMeansModel  # full agent-2 skeletons, base-centered and yaw-normalized
    dictionary: tuple
    config: dict = field(default_factory=dict)

    @property
    def transition(self):
        return self.potentials.transition

    @property
    def entities(self):
        return entity_list(self.object_present)

    def parse_log_prob(self, pg: ParseGraph) -> float:
        return parse_graph_log_prob(pg, self.grouping, self.potentials, len(self.dictionary))

    def to_json(self):
        return {
            "label": self.label,
            "num_subevents": self.num_subevents,
            "object_present": self.object_present,
            "grouping": self.grouping.to_json(),
            "potentials": self.potentials.to_json(),
            "codebook": self.codebook.centroids.tolist(),
            "dictionary": list(self.dictionary),
            "config": self.config,
        }

    @classmethod
    def from_json(cls, obj):
        return cls(label=obj["label"], num_subevents=int(obj["num_subevents"]),
                   object_present=bool(obj["object_present"]),
                   grouping=Grouping.from_json(obj["grouping"]),
                   potentials=PotentialSet.from_json(obj["potentials"]),
                   codebook=KMeansModel(np.asarray(obj["codebook"], dtype=float)),
                   dictionary=tuple(obj["dictionary"]), config=obj.get("config", {}))

    def save(self, path):
        with Path(path).open("w", encoding="utf-8") as fp:
            json.dump(self.to_json(), fp, sort_keys=True)

    @classmethod
    def load(cls, path):
        with Path(path).open("r", encoding="utf-8") as fp:
            return cls.from_json(json.load(fp))
