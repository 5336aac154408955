"""Frame normalization, cylindrical features, skeleton averages, and rigid alignment.

Conventions: right-handed world coordinates, z-axis up, units in meters.
All angular features are measured inside a horizontal "facing frame" whose
x-axis points from one agent's base joint toward the other agent's base
joint, which makes every feature invariant to global yaw + translation.
"""

from dataclasses import dataclass

import numpy as np

EPS_DIST = 1e-4  # clamp for distance features (Weibull density diverges at 0)
_XY_TOL = 1e-9  # below this horizontal separation the facing frame is degenerate

WORLD_X = np.array([1.0, 0.0, 0.0])
WORLD_Z = np.array([0.0, 0.0, 1.0])


@dataclass(frozen=True)
class FacingFrame:
    """Horizontal frame anchored at one agent's base, x-axis toward the other."""

    origin: np.ndarray
    x_axis: np.ndarray

    @property
    def y_axis(self):
        return np.array([-self.x_axis[1], self.x_axis[0], 0.0])

    @property
    def z_axis(self):
        return WORLD_Z


@dataclass(frozen=True)
class CylFeatures:
    """Cylindrical decomposition of a displacement in a facing frame."""

    r_xy: float
    dz_abs: float
    dz_sign: float
    azimuth: float

    def as_tuple(self):
        return (self.r_xy, self.dz_abs, self.dz_sign, self.azimuth)


def facing_x_axis(base_a, base_b):
    """Unit horizontal direction from base_a toward base_b (world x fallback)."""
    dx = float(base_b[0] - base_a[0])
    dy = float(base_b[1] - base_a[1])
    n = np.hypot(dx, dy)
    if n < _XY_TOL:
        return WORLD_X.copy()
    return np.array([dx / n, dy / n, 0.0])


def facing_frame(base_a, base_b) -> FacingFrame:
    """Facing frame with origin at base_a, x-axis toward base_b."""
    return FacingFrame(origin=np.asarray(base_a, dtype=float), x_axis=facing_x_axis(base_a, base_b))


def facing_x_axis_batch(base_a, base_b):
    """Vectorized facing_x_axis over (N, 3) base arrays -> (N, 3)."""
    d = np.asarray(base_b, dtype=float) - np.asarray(base_a, dtype=float)
    n = np.hypot(d[:, 0], d[:, 1])
    out = np.zeros_like(d)
    ok = n >= _XY_TOL
    out[ok, 0] = d[ok, 0] / n[ok]
    out[ok, 1] = d[ok, 1] / n[ok]
    out[~ok, 0] = 1.0
    return out


def wrap_angle(a):
    """Wrap angle(s) to (-pi, pi]."""
    a = np.asarray(a, dtype=float)
    w = np.mod(a + np.pi, 2.0 * np.pi) - np.pi
    w = np.where(w == -np.pi, np.pi, w)
    return float(w) if w.ndim == 0 else w


def cyl_decompose(reference, point, frame: FacingFrame) -> CylFeatures:
    """Cylindrical features of (point - reference) in the given facing frame."""
    d = np.asarray(point, dtype=float) - np.asarray(reference, dtype=float)
    r, z, sign, az = cyl_features_batch(d[None, :], frame.x_axis[None, :])
    return CylFeatures(float(r[0]), float(z[0]), float(sign[0]), float(az[0]))


def cyl_features_batch(delta, x_axis):
    """Vectorized cylindrical features.

    delta: (N, 3) displacement vectors; x_axis: (N, 3) facing x-axes.
    Returns (r_xy, dz_abs, dz_sign, azimuth) arrays, distances clamped to
    EPS_DIST and azimuth measured in each row's frame.
    """
    delta = np.asarray(delta, dtype=float)
    x_axis = np.asarray(x_axis, dtype=float)
    r_xy = np.maximum(EPS_DIST, np.hypot(delta[:, 0], delta[:, 1]))
    dz = delta[:, 2]
    dz_abs = np.maximum(EPS_DIST, np.abs(dz))
    dz_sign = np.where(dz >= 0.0, 1.0, -1.0)
    ax = delta[:, 0] * x_axis[:, 0] + delta[:, 1] * x_axis[:, 1]
    ay = -delta[:, 0] * x_axis[:, 1] + delta[:, 1] * x_axis[:, 0]
    azimuth = wrap_angle(np.arctan2(ay, ax))
    return r_xy, dz_abs, dz_sign, azimuth


def group_mass_center(points):
    """Component-wise mean of a non-empty list of 3D points."""
    pts = np.asarray(points, dtype=float)
    if pts.size == 0:
        raise ValueError("group_mass_center: empty point list")
    return pts.reshape(-1, 3).mean(axis=0)


def skeleton_distance(a, b, joints):
    """Mean Euclidean distance over the requested joints of two joint maps."""
    total = 0.0
    count = 0
    for j in joints:
        if j not in a or j not in b:
            raise KeyError(f"skeleton_distance: joint {j!r} missing")
        total += float(np.linalg.norm(np.asarray(a[j], dtype=float) - np.asarray(b[j], dtype=float)))
        count += 1
    if count == 0:
        raise ValueError("skeleton_distance: empty joint set")
    return total / count


def mean_skeleton(frames, agent):
    """Per-joint mean position of one agent over a non-empty frame list."""
    if not frames:
        raise ValueError("mean_skeleton: empty frame list")
    key = "agent1" if agent == 1 else "agent2"
    joints = getattr(frames[0], key).keys()
    out = {}
    for j in joints:
        out[j] = np.mean([np.asarray(getattr(f, key)[j], dtype=float) for f in frames], axis=0)
    return out


def lerp_joints(a, b, u):
    """Per-joint linear interpolation (1-u)*a + u*b for u in [0, 1]."""
    if not 0.0 <= u <= 1.0:
        raise ValueError(f"lerp_joints: u={u} outside [0, 1]")
    if set(a.keys()) != set(b.keys()):
        raise KeyError("lerp_joints: joint sets differ")
    return {j: (1.0 - u) * np.asarray(a[j], dtype=float) + u * np.asarray(b[j], dtype=float) for j in a}


def align_yaw_translate(source, targets):
    """Least-squares yaw + translation taking source joints onto targets.

    Closed-form 2D Procrustes on xy (rotation about z only), exact mean on z.
    Returns (theta, v) so that R_z(theta) @ p + v best matches each target.
    """
    names = sorted(targets.keys())
    if len(names) < 2:
        raise ValueError("align_yaw_translate: need at least 2 target joints")
    src = np.array([np.asarray(source[j], dtype=float) for j in names])
    tgt = np.array([np.asarray(targets[j], dtype=float) for j in names])
    sc = src[:, :2].mean(axis=0)
    tc = tgt[:, :2].mean(axis=0)
    ps = src[:, :2] - sc
    pt = tgt[:, :2] - tc
    num = float(np.sum(ps[:, 0] * pt[:, 1] - ps[:, 1] * pt[:, 0]))
    den = float(np.sum(ps[:, 0] * pt[:, 0] + ps[:, 1] * pt[:, 1]))
    theta = 0.0 if (num == 0.0 and den == 0.0) else float(np.arctan2(num, den))
    c, s = np.cos(theta), np.sin(theta)
    v_xy = tc - np.array([c * sc[0] - s * sc[1], s * sc[0] + c * sc[1]])
    v_z = float(np.mean(tgt[:, 2] - src[:, 2]))
    return theta, np.array([v_xy[0], v_xy[1], v_z])


def apply_yaw_translation(points, theta, v):
    """Apply R_z(theta) then translate by v to an (N, 3) array or joint map."""
    c, s = np.cos(theta), np.sin(theta)
    if isinstance(points, dict):
        return {j: apply_yaw_translation(np.asarray(p, dtype=float)[None, :], theta, v)[0] for j, p in points.items()}
    pts = np.asarray(points, dtype=float)
    out = np.empty_like(pts)
    out[..., 0] = c * pts[..., 0] - s * pts[..., 1] + v[0]
    out[..., 1] = s * pts[..., 0] + c * pts[..., 1] + v[1]
    out[..., 2] = pts[..., 2] + v[2]
    return out


def two_bone_chain(root, mid, end, target, lengths=None, eps=1e-12):
    """Reposition a two-bone chain so its end point reaches the target.

    Bone lengths (|root-mid|, |mid-end|, or the explicit `lengths` pair) are
    preserved exactly. Out-of-reach targets clamp to full extension along the
    target direction; too-close targets clamp to the folded length. The
    original bend direction is kept as the pole hint. Returns (new_mid, new_end).
    """
    root = np.asarray(root, dtype=float)
    mid = np.asarray(mid, dtype=float)
    end = np.asarray(end, dtype=float)
    target = np.asarray(target, dtype=float)
    if lengths is None:
        l1 = float(np.linalg.norm(mid - root))
        l2 = float(np.linalg.norm(end - mid))
    else:
        l1, l2 = float(lengths[0]), float(lengths[1])
    to_t = target - root
    d = float(np.linalg.norm(to_t))
    if d < eps:
        # degenerate target on the root: keep the current axis direction
        axis = end - root
        an = float(np.linalg.norm(axis))
        u = axis / an if an > eps else WORLD_X
    else:
        u = to_t / d
    d_eff = min(max(d, abs(l1 - l2) + eps), l1 + l2)
    new_end = root + u * d_eff
    a = (l1 * l1 - l2 * l2 + d_eff * d_eff) / (2.0 * d_eff)
    h2 = l1 * l1 - a * a
    h = np.sqrt(h2) if h2 > 0.0 else 0.0
    # pole: original mid offset made perpendicular to the new axis
    pole = (mid - root) - np.dot(mid - root, u) * u
    pn = float(np.linalg.norm(pole))
    if pn < eps:
        # straight chain: pick any perpendicular, preferring horizontal
        pole = np.cross(u, WORLD_Z)
        pn = float(np.linalg.norm(pole))
        if pn < eps:
            pole = np.cross(u, WORLD_X)
            pn = float(np.linalg.norm(pole))
    pole = pole / pn
    new_mid = root + a * u + h * pole
    return new_mid, new_end
