"""Segmental dynamic-programming decoder for the latent sub-event parsing.

Fills b(s, t), the best log posterior of any labeling of frames 1..t whose
last segment has type s, by maximizing over the previous type s' != s and
the segment start. Segment lengths are capped per type at three times the
fitted log-normal mean to bound the recursion; passing an explicit cap of
the sequence length restores the exact MAP.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .data import SubEventParse
from .geometry import cyl_features_batch
from .model import Grouping, InteractionModel, PotentialSet, SequenceFeatures, as_features


@dataclass
class DpTable:
    """Filled recursion arrays: scores, per-cell best segment length, caps."""

    b: np.ndarray  # (S, T) best log posterior
    best_len: np.ndarray  # (S, T) length of the winning last segment (0 = unreachable)
    horizon: np.ndarray  # (S,) per-type segment length cap
    log_trans: np.ndarray
    log_start: float


def default_lmax(potentials: PotentialSet, s: int, total: int) -> int:
    """Per-type cap: 3x the fitted log-normal mean, never above the sequence length."""
    d = potentials.duration[s]
    return min(total, int(math.ceil(3.0 * math.exp(d.mu + d.sigma))))


def segment_score(seq, s_prev, t1: int, s: int, t2: int, grouping: Grouping,
                  potentials: PotentialSet, num_subevents: int) -> float:
    """Log probability of labeling [t1, t2] with type s after type s_prev.

    The first segment (t1 == 1) replaces the transition term with the
    uniform start anchor ln(1/|S|).
    """
    from .model import duration_log_prior, segment_log_likelihood

    if not 1 <= t1 <= t2:
        raise ValueError(f"invalid segment range [{t1}, {t2}]")
    if t1 > 1 and s_prev == s:
        raise ValueError("consecutive segments cannot share a type")
    total = segment_log_likelihood(seq, t1, t2, grouping, potentials, s)
    total += duration_log_prior(t2 - t1 + 1, s, potentials)
    if t1 == 1:
        total += -math.log(num_subevents)
    else:
        total += math.log(potentials.transition[s_prev - 1, s - 1])
    return total


def _segment_score_tables(feats: SequenceFeatures, grouping: Grouping, potentials: PotentialSet,
                          num_subevents: int, T: int, lmax: np.ndarray) -> np.ndarray:
    """m[s-1, t2-1, l-1] = likelihood + duration score of segment [t2-l+1, t2]."""
    S = num_subevents
    L = int(lmax.max())
    E = len(feats.entities)
    pos = feats.pos[:T]
    # spatial term per (s, t2)
    spatial = np.zeros((S, T))
    for s in range(1, S + 1):
        for members in grouping.groups(s).values():
            midx = [feats.index[e] for e in members]
            for e, ei in zip(members, midx):
                others = [m for m in midx if m != ei]
                if others:
                    ref = pos[:, others, :].mean(axis=1)
                else:
                    ref = feats.bases[:T, feats.ref_agent[ei], :]
                r, z, sg, az = cyl_features_batch(pos[:, ei, :] - ref, feats.x_axes[:T, feats.owner[ei], :])
                cell = potentials.spatial[(s, e)]
                spatial[s - 1] += (cell.r_xy.log_pdf(r) + cell.dz.log_pdf(z)
                                   + cell.dz_sign.log_pdf(sg) + cell.azimuth.log_pdf(az))
    # displacement features for every (t2, l): F[t2-1, l-1, e, 4]
    F = np.zeros((T, L, E, 4))
    F[:, :, :, 0] = F[:, :, :, 1] = 1.0  # benign filler for unreachable cells
    xa = feats.x_axes[:T][:, feats.owner, :]  # (T, E, 3) per-entity frame at each frame
    for l in range(1, L + 1):
        n = T - l + 1
        if n <= 0:
            break
        d = (pos[l - 1:] - pos[: T - l + 1]).reshape(-1, 3)
        x = xa[: T - l + 1].reshape(-1, 3)
        r, z, sg, az = cyl_features_batch(d, x)
        F[l - 1:, l - 1, :, 0] = r.reshape(n, E)
        F[l - 1:, l - 1, :, 1] = z.reshape(n, E)
        F[l - 1:, l - 1, :, 2] = sg.reshape(n, E)
        F[l - 1:, l - 1, :, 3] = az.reshape(n, E)
    m = np.zeros((S, T, L))
    for s in range(1, S + 1):
        acc = np.zeros((T, L))
        for ei, e in enumerate(feats.entities):
            cell = potentials.motion[(s, e)]
            acc += (cell.r_xy.log_pdf(F[:, :, ei, 0]) + cell.dz.log_pdf(F[:, :, ei, 1])
                    + cell.dz_sign.log_pdf(F[:, :, ei, 2]) + cell.azimuth.log_pdf(F[:, :, ei, 3]))
        lengths = np.arange(1, L + 1, dtype=float)
        dur = potentials.duration[s].log_pdf(lengths)
        m[s - 1] = acc + spatial[s - 1][:, None] + dur[None, :]
    return m


def dp_table(seq, grouping: Grouping, potentials: PotentialSet, num_subevents: int,
             upto: int = None, lmax=None) -> DpTable:
    """Run the recursion over frames 1..upto and return the filled table."""
    feats = as_features(seq)
    T = feats.T if upto is None else int(upto)
    S = num_subevents
    if lmax is None:
        caps = np.array([default_lmax(potentials, s, T) for s in range(1, S + 1)], dtype=np.int64)
    else:
        caps = np.full(S, int(lmax), dtype=np.int64) if np.isscalar(lmax) else np.asarray(lmax, dtype=np.int64)
    if S == 1:
        caps = np.full(1, T, dtype=np.int64)  # a single type must cover everything
    log_trans = np.log(potentials.transition)
    log_start = -math.log(S)
    m = _segment_score_tables(feats, grouping, potentials, S, T, caps)
    b, best_len = kernels.dp_decode(m, log_trans, np.full(S, log_start), caps)
    if not np.any(np.isfinite(b[:, T - 1])) and caps.min() < T:
        caps = np.full(S, T, dtype=np.int64)
        m = _segment_score_tables(feats, grouping, potentials, S, T, caps)
        b, best_len = kernels.dp_decode(m, log_trans, np.full(S, log_start), caps)
    return DpTable(b=b, best_len=best_len, horizon=caps, log_trans=log_trans, log_start=log_start)


def backtrace(table: DpTable, T: int) -> tuple:
    """(SubEventParse, log posterior) of the best labeling of frames 1..T."""
    b = table.b
    s = int(np.argmax(b[:, T - 1]))
    value = float(b[s, T - 1])
    segments = []
    t = T - 1
    while True:
        l = int(table.best_len[s, t])
        start = t - l + 1
        segments.append((start + 1, t + 1, s + 1))
        if start == 0:
            break
        best, best_sp = -np.inf, -1
        for sp in range(b.shape[0]):
            if sp == s:
                continue
            v = b[sp, start - 1] + table.log_trans[sp, s]
            if v > best:
                best, best_sp = v, sp
        s, t = best_sp, start - 1
    segments.reverse()
    parse = SubEventParse([(a, bnd) for a, bnd, _ in segments], [lab for _, _, lab in segments])
    return parse, value


def dp_parse_parts(seq, grouping: Grouping, potentials: PotentialSet, num_subevents: int,
                   upto: int = None, lmax=None) -> tuple:
    feats = as_features(seq)
    T = feats.T if upto is None else int(upto)
    table = dp_table(seq, grouping, potentials, num_subevents, upto=T, lmax=lmax)
    return backtrace(table, T)


def dp_parse(seq, model: InteractionModel, upto: int = None, lmax=None) -> tuple:
    """Optimal latent sub-event parsing of a (possibly partial) sequence."""
    return dp_parse_parts(seq, model.grouping, model.potentials, model.num_subevents,
                          upto=upto, lmax=lmax)


def parse_score(seq, parse: SubEventParse, grouping: Grouping, potentials: PotentialSet,
                num_subevents: int) -> float:
    """Sum of segment scores of a given parse (the DP objective)."""
    total = 0.0
    prev = None
    for (t1, t2), s in zip(parse.intervals, parse.labels):
        total += segment_score(seq, prev, t1, s, t2, grouping, potentials, num_subevents)
        prev = s
    return total
