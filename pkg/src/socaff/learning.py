"""MCMC structure learning: MH over sub-event parsings, Gibbs over joint grouping.

The outer loop proposes merge/split/relabel moves on one instance's parsing
(always along atomic-interval boundaries), the inner loop resamples the joint
selection/grouping per sub-event type, and the move is accepted with the MH
ratio of the refit joint probabilities. The best state ever evaluated is kept
and turned into the returned model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .data import BASE_JOINT, JOINT_INDEX, SubEventParse
from .model import (CrpConfig, Grouping, InteractionModel, ParseGraph,
                    PotentialSet, as_features, collect_occurrences,
                    fit_motion_cell, fit_potentials, fit_spatial_cell,
                    fit_transitions, grouping_log_prior,
                    normalized_pose_features, normalized_skeleton_vecs,
                    DEFAULT_DURATION, DEFAULT_MOTION_AFFORDABLE,
                    DEFAULT_MOTION_NULL, DEFAULT_SPATIAL)
from .stats import fit_mle, kmeans_assign_batch, kmeans_fit

_LOG_FLOOR = 1e-300  # keeps (1 - e^{-lambda*d}) factors off exact zero


@dataclass(frozen=True)
class ProposalConfig:
    lambda_merge: float = 1.0
    q: tuple = (0.4, 0.4, 0.2)  # (merge, split, relabel)
    atomic_k: int = 50

    def __post_init__(self):
        if abs(sum(self.q) - 1.0) > 1e-9:
            raise ValueError("kind probabilities q must sum to 1")
        if self.lambda_merge <= 0 or self.atomic_k < 2:
            raise ValueError("lambda_merge must be positive, atomic_k >= 2")


@dataclass(frozen=True)
class LearnConfig:
    num_subevents: int = 3
    outer_iters: int = 100
    gibbs_sweeps: int = 5
    crp: CrpConfig = field(default_factory=CrpConfig)
    proposal: ProposalConfig = field(default_factory=ProposalConfig)
    seed: int = 0

    def __post_init__(self):
        if self.num_subevents < 1 or self.outer_iters < 1:
            raise ValueError("num_subevents and outer_iters must be >= 1")


@dataclass
class Proposal:
    kind: str  # "merge" | "split" | "relabel" | "none"
    instance: int
    parse: SubEventParse | None
    valid: bool
    log_move_fwd: float = 0.0
    log_move_rev: float = 0.0
    log_kind_fwd: float = 0.0
    log_kind_rev: float = 0.0

    @property
    def log_q_fwd(self):
        return self.log_kind_fwd + self.log_move_fwd

    @property
    def log_q_rev(self):
        return self.log_kind_rev + self.log_move_rev


@dataclass
class McmcState:
    parses: list
    grouping: Grouping
    log_prob: float
    best_log_prob: float
    best_parses: list
    best_grouping: Grouping
    trace: list = field(default_factory=list)


def atomic_intervals(seq, k: int, seed) -> list:
    """Maximal runs of equal pose-cluster labels; the indivisible proposal units."""
    feats = as_features(seq)
    X = normalized_pose_features(feats)
    km = kmeans_fit(X, min(k, X.shape[0]), seed)
    labels = kmeans_assign_batch(km, X)
    intervals = []
    start = 0
    for t in range(1, len(labels) + 1):
        if t == len(labels) or labels[t] != labels[start]:
            intervals.append((start + 1, t))
            start = t
    return intervals


def _interval_means(npf: np.ndarray, intervals) -> np.ndarray:
    return np.stack([npf[t1 - 1:t2].mean(axis=0) for t1, t2 in intervals])


def _mean_skeleton_distance(mean_a: np.ndarray, mean_b: np.ndarray) -> float:
    """Mean per-joint distance between two normalized mean pose vectors."""
    d = (mean_a - mean_b).reshape(-1, 3)
    return float(np.mean(np.linalg.norm(d, axis=1)))


def _internal_atom_ends(interval, atom_ends) -> list:
    t1, t2 = interval
    return [b for b in atom_ends if t1 <= b < t2]


def _feasible_kinds(parse: SubEventParse, atom_ends, q: tuple) -> dict:
    kinds = {}
    if parse.num_segments >= 2:
        kinds["merge"] = q[0]
    if any(_internal_atom_ends(iv, atom_ends) for iv in parse.intervals):
        kinds["split"] = q[1]
    kinds["relabel"] = q[2]
    total = sum(kinds.values())
    return {k: v / total for k, v in kinds.items()}


def _pair_distances(npf, parse):
    means = _interval_means(npf, parse.intervals)
    return np.array([_mean_skeleton_distance(means[k], means[k + 1])
                     for k in range(parse.num_segments - 1)])


def _check_labels(labels) -> bool:
    return all(labels[i] != labels[i + 1] for i in range(len(labels) - 1))


def propose(parse: SubEventParse, npf: np.ndarray, atom_ends, instance: int,
            rng, config: ProposalConfig, num_subevents: int) -> Proposal:
    """One merge/split/relabel proposal on a single instance's parsing.

    Move-level and kind-level log proposal probabilities are kept separate;
    the acceptance ratio uses their sum. Proposals whose label draws would
    put equal labels on consecutive intervals are returned invalid (they
    violate the parse invariant and are always rejected).
    """
    S = num_subevents
    lam = config.lambda_merge
    kinds = _feasible_kinds(parse, atom_ends, config.q)
    if not kinds:
        return Proposal(kind="none", instance=instance, parse=None, valid=False)
    names = sorted(kinds)
    kind = names[int(rng.choice(len(names), p=np.array([kinds[n] for n in names])))]
    K = parse.num_segments
    ivs, labs = list(parse.intervals), list(parse.labels)

    if kind == "relabel":
        k = int(rng.integers(K))
        new_lab = int(rng.integers(1, S + 1))
        labs2 = labs.copy()
        labs2[k] = new_lab
        valid = _check_labels(labs2)
        log_move = -math.log(K) - math.log(S)
        new_parse = SubEventParse(ivs, labs2) if valid else None
        # self-inverse: same interval count and feasibility either way
        return Proposal(kind="relabel", instance=instance, parse=new_parse, valid=valid,
                        log_move_fwd=log_move, log_move_rev=log_move,
                        log_kind_fwd=math.log(kinds["relabel"]),
                        log_kind_rev=math.log(kinds["relabel"]))

    if kind == "merge":
        d = _pair_distances(npf, parse)
        w = np.exp(-lam * d)
        probs = w / w.sum()
        j = int(rng.choice(K - 1, p=probs))
        new_lab = int(rng.integers(1, S + 1))
        ivs2 = ivs[:j] + [(ivs[j][0], ivs[j + 1][1])] + ivs[j + 2:]
        labs2 = labs[:j] + [new_lab] + labs[j + 2:]
        valid = _check_labels(labs2)
        if not valid:
            return Proposal(kind="merge", instance=instance, parse=None, valid=False)
        new_parse = SubEventParse(ivs2, labs2)
        log_move_fwd = math.log(probs[j]) - math.log(S)
        # reverse: split the merged interval at the old junction into the old labels
        kinds_rev = _feasible_kinds(new_parse, atom_ends, config.q)
        n_split = sum(1 for iv in new_parse.intervals if _internal_atom_ends(iv, atom_ends))
        n_bounds = len(_internal_atom_ends(ivs2[j], atom_ends))
        split_factor = max(1.0 - math.exp(-lam * d[j]), _LOG_FLOOR)
        log_move_rev = (-math.log(n_split) - math.log(n_bounds)
                        + math.log(split_factor) - 2.0 * math.log(S))
        return Proposal(kind="merge", instance=instance, parse=new_parse, valid=True,
                        log_move_fwd=log_move_fwd, log_move_rev=log_move_rev,
                        log_kind_fwd=math.log(kinds["merge"]),
                        log_kind_rev=math.log(kinds_rev["split"]))

    # split
    splittable = [k for k, iv in enumerate(ivs) if _internal_atom_ends(iv, atom_ends)]
    k = splittable[int(rng.integers(len(splittable)))]
    bounds = _internal_atom_ends(ivs[k], atom_ends)
    cut = bounds[int(rng.integers(len(bounds)))]
    lab_a = int(rng.integers(1, S + 1))
    lab_b = int(rng.integers(1, S + 1))
    ivs2 = ivs[:k] + [(ivs[k][0], cut), (cut + 1, ivs[k][1])] + ivs[k + 1:]
    labs2 = labs[:k] + [lab_a, lab_b] + labs[k + 1:]
    valid = _check_labels(labs2)
    if not valid:
        return Proposal(kind="split", instance=instance, parse=None, valid=False)
    new_parse = SubEventParse(ivs2, labs2)
    halves = _interval_means(npf, [ivs2[k], ivs2[k + 1]])
    d_halves = _mean_skeleton_distance(halves[0], halves[1])
    split_factor = max(1.0 - math.exp(-lam * d_halves), _LOG_FLOOR)
    log_move_fwd = (-math.log(len(splittable)) - math.log(len(bounds))
                    + math.log(split_factor) - 2.0 * math.log(S))
    # reverse: merge the two halves back under the old label
    kinds_rev = _feasible_kinds(new_parse, atom_ends, config.q)
    d_rev = _pair_distances(npf, new_parse)
    w_rev = np.exp(-lam * d_rev)
    log_move_rev = math.log(w_rev[k] / w_rev.sum()) - math.log(S)
    return Proposal(kind="split", instance=instance, parse=new_parse, valid=True,
                    log_move_fwd=log_move_fwd, log_move_rev=log_move_rev,
                    log_kind_fwd=math.log(kinds["split"]),
                    log_kind_rev=math.log(kinds_rev["merge"]))


def gibbs_conditional(entity: str, z_minus: dict, config: CrpConfig):
    """CRP + inclusion conditional over {Null, each existing group, new group}.

    z_minus is the sub-event type's assignment map without the entity.
    Returns (options, probabilities); options are 0, existing group ids, "new".
    """
    sizes = {}
    for e, g in z_minus.items():
        if g > 0:
            sizes[g] = sizes.get(g, 0) + 1
    m_rest = sum(sizes.values())
    denom = m_rest + config.gamma
    options = [0]
    probs = [1.0 - config.beta]
    for h in sorted(sizes):
        options.append(h)
        probs.append(config.beta * sizes[h] / denom)
    options.append("new")
    probs.append(config.beta * config.gamma / denom)
    return options, np.array(probs)


class SweepEvaluator:
    """Cell-cached joint-probability evaluator for a fixed parse set.

    Fits and scores (sub-event type, entity) cells lazily and memoizes them
    by group membership, which makes repeated Gibbs sweeps cheap. Produces
    exactly the same numbers as fit_potentials + joint_log_prob.
    """

    def __init__(self, feats_list, parses, num_subevents: int, dictionary_size: int = 1):
        self.feats_list = feats_list
        self.parses = parses
        self.S = num_subevents
        self.entities = feats_list[0].entities
        self.eidx = {e: i for i, e in enumerate(self.entities)}
        self.occ = {s: collect_occurrences(feats_list, parses, s) for s in range(1, num_subevents + 1)}
        self._spatial = {}
        self._motion = {}
        self.duration = {}
        const = -len(parses) * math.log(dictionary_size) if dictionary_size > 1 else 0.0
        for s in range(1, num_subevents + 1):
            occ = self.occ[s]
            if occ is None:
                self.duration[s] = DEFAULT_DURATION
            else:
                self.duration[s] = fit_mle("lognormal", occ.durations)
                const += float(np.sum(self.duration[s].log_pdf(occ.durations)))
        self.transition, self.marginal = fit_transitions(parses, num_subevents)
        for parse in parses:
            for a, b in zip(parse.labels[:-1], parse.labels[1:]):
                const += math.log(self.transition[a - 1, b - 1])
        self.const = const

    def spatial_cell(self, s: int, members: tuple):
        key = (s, members)
        hit = self._spatial.get(key)
        if hit is not None:
            return hit
        occ = self.occ[s]
        if occ is None:
            cells = {e: DEFAULT_SPATIAL for e in members}
            value = 0.0
        else:
            midx = tuple(self.eidx[e] for e in members)
            feats = occ.spatial_features(midx)
            cells = {}
            value = 0.0
            for e, f in zip(members, feats.values()):
                cells[e] = fit_spatial_cell(f)
                value += float(np.sum(cells[e].log_pdf(f)))
        self._spatial[key] = (cells, value)
        return cells, value

    def motion_cell(self, s: int, entity: str, affordable: bool):
        key = (s, entity, affordable)
        hit = self._motion.get(key)
        if hit is not None:
            return hit
        occ = self.occ[s]
        if occ is None:
            cell = DEFAULT_MOTION_AFFORDABLE if affordable else DEFAULT_MOTION_NULL
            value = 0.0
        else:
            f = occ.motion[self.eidx[entity]]
            cell = fit_motion_cell(f, affordable)
            value = float(np.sum(cell.log_pdf(f)))
        self._motion[key] = (cell, value)
        return cell, value

    def log_likelihood(self, grouping: Grouping) -> float:
        total = 0.0
        for s in range(1, self.S + 1):
            affordable = set(grouping.affordable(s))
            for members in grouping.groups(s).values():
                total += self.spatial_cell(s, members)[1]
            for e in self.entities:
                total += self.motion_cell(s, e, e in affordable)[1]
        return total

    def joint(self, grouping: Grouping, crp: CrpConfig) -> float:
        prior = sum(grouping_log_prior(grouping.assignment(s), crp) for s in range(1, self.S + 1))
        return self.const + prior + self.log_likelihood(grouping)

    def potentials(self, grouping: Grouping) -> PotentialSet:
        """Assemble the PotentialSet of this parse set under a grouping."""
        from .model import REF_MASS_CENTER, REF_OTHER_BASE

        spatial, motion, reference = {}, {}, {}
        for s in range(1, self.S + 1):
            affordable = set(grouping.affordable(s))
            for h, members in grouping.groups(s).items():
                reference[(s, h)] = REF_MASS_CENTER if len(members) >= 2 else REF_OTHER_BASE
                cells, _ = self.spatial_cell(s, members)
                for e, c in cells.items():
                    spatial[(s, e)] = c
            for e in self.entities:
                motion[(s, e)], _ = self.motion_cell(s, e, e in affordable)
        return PotentialSet(spatial=spatial, motion=motion, duration=dict(self.duration),
                            transition=self.transition, subevent_marginal=self.marginal,
                            reference=reference)


def _sweep(ev: SweepEvaluator, grouping: Grouping, crp: CrpConfig, rng) -> Grouping:
    """One randomized-order Gibbs sweep over every (sub-event type, entity)."""
    for s in range(1, ev.S + 1):
        order = rng.permutation(len(ev.entities))
        for i in order:
            entity = ev.entities[int(i)]
            z = grouping.assignment(s)
            z.pop(entity)
            options, cond = gibbs_conditional(entity, z, crp)
            log_w = np.empty(len(options))
            candidates = []
            for c, opt in enumerate(options):
                cand = grouping.with_assignment(s, entity, opt)
                candidates.append(cand)
                log_w[c] = ev.log_likelihood(cand) + math.log(cond[c])
            log_w -= log_w.max()
            w = np.exp(log_w)
            pick = int(rng.choice(len(options), p=w / w.sum()))
            grouping = candidates[pick]
    return grouping


def gibbs_sweep(parse_graphs, grouping: Grouping, config: LearnConfig, rng) -> Grouping:
    """One Gibbs sweep with parses fixed (builds a fresh evaluator)."""
    feats_list = [as_features(pg.sequence) for pg in parse_graphs]
    ev = SweepEvaluator(feats_list, [pg.parse for pg in parse_graphs], config.num_subevents)
    return _sweep(ev, grouping, config.crp, rng)


def _initial_parse(atoms, num_subevents: int) -> SubEventParse:
    """Split the atomic intervals into near-equal contiguous frame blocks."""
    T = atoms[-1][1]
    K = min(num_subevents, len(atoms))
    ends = [b for _, b in atoms]
    bounds = []
    for k in range(1, K):
        target = round(T * k / K)
        candidates = [b for b in ends[:-1] if b not in bounds]
        if not candidates:
            break
        bounds.append(min(candidates, key=lambda b: (abs(b - target), b)))
    bounds = sorted(set(bounds))
    intervals = []
    prev = 0
    for b in bounds + [T]:
        if b > prev:
            intervals.append((prev + 1, b))
            prev = b
    labels = [(i % num_subevents) + 1 for i in range(len(intervals))]
    return SubEventParse(intervals, labels)


def learn_with_trace(instances, config: LearnConfig, dictionary=None,
                     grouping_mode: str = "gibbs"):
    """Run the full sampler and return (InteractionModel, trace rows)."""
    if not instances:
        raise ValueError("learn: empty instance list")
    labels = {s.label for s in instances}
    if len(labels) > 1:
        raise ValueError(f"learn: mixed interaction labels {sorted(labels)}")
    label = instances[0].label
    dictionary = tuple(dictionary) if dictionary else (label,)
    S = config.num_subevents
    feats_list = [as_features(s) for s in instances]
    entities = feats_list[0].entities
    if any(f.entities != entities for f in feats_list):
        raise ValueError("learn: instances disagree on object presence")

    ss = np.random.SeedSequence(config.seed)
    children = ss.spawn(len(instances) + 2)
    rng = np.random.default_rng(children[0])
    atoms = [atomic_intervals(seq, config.proposal.atomic_k, children[i + 1])
             for i, seq in enumerate(instances)]
    atom_ends = [[b for _, b in a] for a in atoms]
    npfs = [normalized_pose_features(f) for f in feats_list]

    parses = [_initial_parse(a, S) for a in atoms]
    if grouping_mode == "single_group":
        grouping = Grouping.single_group(S, entities)
        sweeps = 0
    elif grouping_mode == "gibbs":
        grouping = Grouping.all_null(S, entities)
        sweeps = config.gibbs_sweeps
    else:
        raise ValueError(f"unknown grouping_mode {grouping_mode!r}")

    ev = SweepEvaluator(feats_list, parses, S, len(dictionary))
    log_p = ev.joint(grouping, config.crp)
    state = McmcState(parses=parses, grouping=grouping, log_prob=log_p,
                      best_log_prob=log_p, best_parses=list(parses), best_grouping=grouping)

    for it in range(config.outer_iters):
        idx = int(rng.integers(len(instances)))
        prop = propose(state.parses[idx], npfs[idx], atom_ends[idx], idx, rng,
                       config.proposal, S)
        accepted = False
        if prop.valid:
            new_parses = list(state.parses)
            new_parses[idx] = prop.parse
            ev_new = SweepEvaluator(feats_list, new_parses, S, len(dictionary))
            z_new = state.grouping
            for _ in range(sweeps):
                z_new = _sweep(ev_new, z_new, config.crp, rng)
            log_p_new = ev_new.joint(z_new, config.crp)
            if log_p_new > state.best_log_prob:
                state.best_log_prob = log_p_new
                state.best_parses = list(new_parses)
                state.best_grouping = z_new
            log_alpha = min(0.0, prop.log_q_rev + log_p_new - prop.log_q_fwd - state.log_prob)
            if math.log(rng.random()) <= log_alpha:
                accepted = True
                state.parses = new_parses
                state.grouping = z_new
                state.log_prob = log_p_new
        state.trace.append({"iteration": it, "kind": prop.kind, "accepted": accepted,
                            "log_prob": state.log_prob, "best_log_prob": state.best_log_prob})

    pgs = [ParseGraph(label, p, seq) for p, seq in zip(state.best_parses, instances)]
    potentials = fit_potentials(pgs, state.best_grouping)
    base_idx = JOINT_INDEX[BASE_JOINT]
    vecs = np.concatenate([normalized_skeleton_vecs(seq.agent_positions[:, 1],
                                                    seq.agent_positions[:, 0, base_idx])
                           for seq in instances])
    codebook = kmeans_fit(vecs, min(config.proposal.atomic_k, vecs.shape[0]), children[-1])
    model = InteractionModel(
        label=label, num_subevents=S, object_present=entities[-1] == "object",
        grouping=state.best_grouping, potentials=potentials, codebook=codebook,
        dictionary=dictionary,
        config={"num_subevents": S, "outer_iters": config.outer_iters,
                "gibbs_sweeps": config.gibbs_sweeps, "seed": config.seed,
                "beta": config.crp.beta, "gamma": config.crp.gamma,
                "lambda_merge": config.proposal.lambda_merge,
                "q": list(config.proposal.q), "atomic_k": config.proposal.atomic_k,
                "grouping_mode": grouping_mode},
    )
    return model, state.trace


def learn(instances, config: LearnConfig, dictionary=None,
          grouping_mode: str = "gibbs") -> InteractionModel:
    """Fit one interaction category's model from same-label instances."""
    model, _ = learn_with_trace(instances, config, dictionary=dictionary,
                                grouping_mode=grouping_mode)
    return model
