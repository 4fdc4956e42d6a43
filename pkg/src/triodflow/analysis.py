"""Singularity analysis, rescalings, self-similar solutions and Steiner trees."""

import enum
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import InvalidInputError
from .functionals import network_arrays, has_junction
from .geometry import DiscreteCurve, frame
from .junction import Triod

DENSITY_VALUES = (0.5, 1.0, 1.5)


# -- blow-up rate ----------------------------------------------------------------------


class Classification(str, enum.Enum):
    TYPE_I = "TypeI"
    TYPE_II = "TypeII"
    NO_BLOWUP = "NoBlowup"


@dataclass(frozen=True)
class BlowupFit:
    T_est: float
    C_est: float
    residual: float
    classification: Classification
    trend: float
    thresholds: dict


def estimate_blowup(
    t,
    max_k2,
    fit_tol: float = 0.05,
    trend_factor: float = 2.0,
    horizon: float = 10.0,
) -> BlowupFit:
    """Fit ``max k^2 = C / (T - t)`` by least squares on ``1 / max k^2``.

    The verdict is ``NoBlowup`` when ``1/max k^2`` does not decrease or the
    extrapolated ``T`` lies more than ``horizon`` window-lengths past the
    last sample; ``TypeII`` when ``max k^2 (T - t)`` grows by more than
    ``trend_factor`` across the window; ``TypeI`` when the relative RMS fit
    residual is below ``fit_tol``. A blow-up matching neither test is
    reported as ``TypeII``. If the global root precedes the last sample
    (blow-up faster than the fitted rate), ``T_est`` comes from a fit over
    the trailing quarter of the samples.
    """
    t = np.asarray(t, dtype=float)
    k2 = np.asarray(max_k2, dtype=float)
    if t.shape != k2.shape or t.ndim != 1:
        raise InvalidInputError("t and max_k2 must be 1-D arrays of equal length")
    if len(t) < 8:
        raise InvalidInputError(f"need at least 8 samples, got {len(t)}")
    if np.any(k2 <= 0) or not np.all(np.isfinite(k2)):
        raise InvalidInputError("max_k2 must be positive and finite")

    y = 1.0 / k2
    A = np.column_stack((t, np.ones_like(t)))
    (slope, icept), *_ = np.linalg.lstsq(A, y, rcond=None)
    fit = A @ np.array([slope, icept])
    resid = float(np.sqrt(np.mean((y - fit) ** 2)) / np.sqrt(np.mean(y**2)))
    thresholds = {"fit_tol": fit_tol, "trend_factor": trend_factor, "horizon": horizon}

    span = t[-1] - t[0]
    if slope >= 0 or np.isclose(slope, 0.0, atol=1e-14 * np.abs(y).max() / max(span, 1e-300)):
        return BlowupFit(np.inf, np.inf, resid, Classification.NO_BLOWUP, 1.0, thresholds)
    T_est = -icept / slope
    C_est = -1.0 / slope
    if T_est <= t[-1]:
        # faster than the fitted rate: the global root falls inside the window,
        # so take the root of a fit over the trailing samples instead
        m = max(3, len(t) // 4)
        (ts, ti), *_ = np.linalg.lstsq(A[-m:], y[-m:], rcond=None)
        if not ts < 0 or -ti / ts <= t[-1]:
            return BlowupFit(float(T_est), float(C_est), resid, Classification.TYPE_II, np.inf, thresholds)
        T_est, C_est = -ti / ts, -1.0 / ts
    if T_est - t[-1] > horizon * span:
        return BlowupFit(T_est, C_est, resid, Classification.NO_BLOWUP, 1.0, thresholds)

    scaled = k2 * (T_est - t)
    trend = float(scaled[-1] / scaled[0])
    if trend > trend_factor:
        cls = Classification.TYPE_II
    elif resid < fit_tol and C_est > 0:
        cls = Classification.TYPE_I
    else:
        cls = Classification.TYPE_II
    return BlowupFit(float(T_est), float(C_est), resid, cls, trend, thresholds)


# -- rescalings ------------------------------------------------------------------------


@dataclass(frozen=True)
class RescaledState:
    """Geometry after a parabolic rescaling about ``origin``.

    ``factor`` is the spatial magnification, ``time`` the rescaled time.
    """

    geometry: object
    time: float
    origin: tuple
    factor: float
    marked: Optional[tuple] = None

    @property
    def arrays(self):
        return network_arrays(self.geometry)


def _map_geometry(geom, fn):
    arrays = network_arrays(geom)
    mapped = [fn(a) for a in arrays]
    if has_junction(geom):
        return Triod(tuple(DiscreteCurve(a) for a in mapped))
    if len(mapped) == 1:
        return DiscreteCurve(mapped[0])
    return [DiscreteCurve(a) for a in mapped]


def rescale_huisken(state, x0, T: float) -> RescaledState:
    """``(F - x0) / sqrt(2 (T - t))`` at rescaled time ``-log(T - t) / 2``."""
    t = float(getattr(state, "t", 0.0))
    if T <= t:
        raise InvalidInputError(f"rescaling time T={T} must exceed t={t}")
    x0 = np.asarray(x0, dtype=float)
    scale = 1.0 / np.sqrt(2.0 * (T - t))
    geom = _map_geometry(getattr(state, "geometry", state), lambda a: (a - x0) * scale)
    return RescaledState(geom, time=-0.5 * np.log(T - t), origin=tuple(x0), factor=scale)


def _state_curvature(state):
    arrays = network_arrays(state)
    return [frame(a)["k"] for a in arrays]


def _interpolate_state(states, times, t):
    """Linear interpolation in time between stored states with equal node counts."""
    i = int(np.searchsorted(times, t, side="right")) - 1
    i = min(max(i, 0), len(states) - 1)
    if i == len(states) - 1 or times[i] == t:
        return network_arrays(states[i])
    a, b = network_arrays(states[i]), network_arrays(states[i + 1])
    w = (t - times[i]) / (times[i + 1] - times[i])
    if any(x.shape != y.shape for x, y in zip(a, b)):
        return a if w < 0.5 else b
    return [(1 - w) * x + w * y for x, y in zip(a, b)]


def hamilton_rescale(
    states: Sequence,
    T: float,
    ladder: Optional[Sequence[int]] = None,
    rescaled_times: Sequence[float] = (0.0,),
) -> list:
    """Blow-up sequence at near-maximal ``k^2 (T - 1/n - t)`` points.

    For each ``n`` in the ladder (default 4, 8, 16, ... while ``T - 1/n``
    exceeds the first sample time) the recorded sample and node maximizing
    ``k^2 (T - 1/n - t)`` over ``t <= T - 1/n`` is selected as ``(p_n, t_n)``;
    the snapshots are ``k(p_n, t_n) [F(., t_n + s / k^2) - F(p_n, t_n)]`` for
    each ``s`` in ``rescaled_times``, with states linearly interpolated in
    time.

    Returns a list of ``(n, [RescaledState, ...])``.
    """
    states = list(states)
    if len(states) < 2:
        raise InvalidInputError("need at least two recorded states")
    times = np.array([float(s.t) for s in states])
    kmax = np.array([max(np.max(np.abs(k)) for k in _state_curvature(s)) for s in states])
    if not kmax[-1] > kmax[0] * (1 + 1e-9):
        raise InvalidInputError("trajectory shows no curvature growth")
    if T <= times[0]:
        raise InvalidInputError("blow-up time must follow the first sample")

    if ladder is None:
        ladder = []
        n = 4
        while T - 1.0 / n <= times[0]:
            n *= 2
        while n <= 2**20 and T - 1.0 / n > times[0]:
            ladder.append(n)
            if T - 1.0 / n >= times[-1]:
                break
            n *= 2

    out = []
    for n in ladder:
        horizon = T - 1.0 / n
        usable = np.flatnonzero(times <= horizon)
        if len(usable) == 0:
            continue
        best = (-np.inf, None, None, None)
        for i in usable:
            for c, k in enumerate(_state_curvature(states[i])):
                j = int(np.argmax(k**2))
                score = float(k[j] ** 2 * (horizon - times[i]))
                if score > best[0]:
                    best = (score, i, c, j)
        _, i, c, j = best
        kn = float(abs(_state_curvature(states[i])[c][j]))
        pn = network_arrays(states[i])[c][j].copy()
        tn = times[i]
        snaps = []
        for s in rescaled_times:
            arrays = _interpolate_state(states, times, tn + s / kn**2)
            geom = _rebuild(states[i], [kn * (a - pn) for a in arrays])
            snaps.append(RescaledState(geom, time=float(s), origin=tuple(pn), factor=kn, marked=(c, j)))
        out.append((n, snaps))
    return out


def _rebuild(like, arrays):
    if has_junction(like):
        return Triod(tuple(DiscreteCurve(a) for a in arrays))
    if len(arrays) == 1:
        return DiscreteCurve(arrays[0])
    return [DiscreteCurve(a) for a in arrays]


# -- self-similar solutions -------------------------------------------------------------


def shrinker_residual(geom) -> float:
    """``max |k + <x, nu>|`` over all nodes (zero for shrinkers about the origin)."""
    res = 0.0
    for a in network_arrays(geom):
        f = frame(a)
        r = f["k"] + np.einsum("ij,ij->i", a, f["nu"])
        res = max(res, float(np.max(np.abs(r))))
    return res


def translator_residual(geom, w) -> float:
    """``max |k - <w, nu>|`` over all nodes (zero for translators with velocity ``w``)."""
    w = np.asarray(w, dtype=float)
    res = 0.0
    for a in network_arrays(geom):
        f = frame(a)
        r = f["k"] - f["nu"] @ w
        res = max(res, float(np.max(np.abs(r))))
    return res


def grim_reaper(w=(1.0, 0.0), n: int = 257, y_max: float = 1.3) -> DiscreteCurve:
    """Sampled grim reaper translating with velocity ``w``.

    For ``w = e1`` the nodes are ``(-log cos y, y)`` for ``y`` running from
    ``y_max`` down to ``-y_max``, which makes ``k = cos y`` positive. Nodes are
    uniform in arclength ``s = asinh(tan y)``, inverted by ``y = 2 atan(tanh(s/2))``;
    uniform-in-``y`` sampling stretches the ends and spoils the end stencils. Other ``w`` rotate the curve onto ``w`` and dilate it by
    ``1 / |w|``.
    """
    if not 0.0 < y_max < np.pi / 2:
        raise InvalidInputError(f"y_max must lie in (0, pi/2), got {y_max}")
    if n < 3:
        raise InvalidInputError("n must be at least 3")
    w = np.asarray(w, dtype=float)
    speed = float(np.hypot(*w))
    if speed == 0:
        raise InvalidInputError("w must be nonzero")
    s_max = np.arcsinh(np.tan(y_max))
    y = 2.0 * np.arctan(np.tanh(np.linspace(s_max, -s_max, n) / 2.0))
    y[0], y[-1] = y_max, -y_max
    pts = np.column_stack((-np.log(np.cos(y)), y)) / speed
    c, s = w / speed
    rot = np.array([[c, -s], [s, c]])
    return DiscreteCurve(pts @ rot.T)


def grim_reaper_x(y, t=0.0):
    """Exact translating solution ``x = t - log cos y``."""
    return t - np.log(np.cos(y))


def halfline_star(x0=(0.0, 0.0), extent: float = 1.0, count: int = 3, n: int = 257, angle: float = np.pi / 2):
    """Straight halflines from ``x0`` at equal angles (120 degrees for three).

    ``count = 3`` gives a Triod; ``count = 1`` a single halfline; ``count = 2``
    a straight segment through ``x0`` (a full line, truncated).
    """
    x0 = np.asarray(x0, dtype=float)
    s = np.linspace(0.0, extent, n)[:, None]
    if count == 3:
        dirs = [np.array([np.cos(angle + 2 * np.pi * i / 3), np.sin(angle + 2 * np.pi * i / 3)]) for i in range(3)]
        return Triod(tuple(DiscreteCurve(x0 + s * d) for d in dirs))
    d = np.array([np.cos(angle), np.sin(angle)])
    if count == 1:
        return DiscreteCurve(x0 + s * d)
    if count == 2:
        u = np.linspace(-extent, extent, 2 * n - 1)[:, None]
        pts = x0 + u * d
        pts[n - 1] = x0
        return DiscreteCurve(pts)
    raise InvalidInputError("count must be 1, 2 or 3")


# -- Gaussian density classes --------------------------------------------------------------


class DensityClass(str, enum.Enum):
    HALF = "Half"
    ONE = "One"
    THREE_HALVES = "ThreeHalves"
    UNCLASSIFIED = "Unclassified"


def classify_density(theta: float, tol: float = 0.02) -> DensityClass:
    """Nearest admissible limit density (1/2, 1 or 3/2) if within ``tol``."""
    values = np.array(DENSITY_VALUES)
    i = int(np.argmin(np.abs(values - theta)))
    if abs(values[i] - theta) <= tol:
        return (DensityClass.HALF, DensityClass.ONE, DensityClass.THREE_HALVES)[i]
    return DensityClass.UNCLASSIFIED


# -- Steiner configuration -----------------------------------------------------------------


def _angles_at(P):
    out = []
    for i in range(3):
        a, b = P[(i + 1) % 3] - P[i], P[(i + 2) % 3] - P[i]
        cosang = np.dot(a, b) / (np.linalg.norm(a) * np.linalg.norm(b))
        out.append(np.arccos(np.clip(cosang, -1.0, 1.0)))
    return np.array(out)


def weiszfeld_map(x, P):
    d = np.linalg.norm(P - x, axis=1)
    w = 1.0 / d
    return (w[:, None] * P).sum(axis=0) / w.sum()


def steiner_point(P1, P2, P3, tol: float = 1e-12, max_iter: int = 10_000):
    """Fermat point of the triangle, or ``None`` if some angle is >= 120 degrees.

    Weiszfeld iteration from the centroid; an iterate landing on a vertex is
    nudged 1e-9 toward the centroid.

    Raises
    ------
    InvalidInputError
        For collinear (or coincident) points.
    """
    P = np.array([P1, P2, P3], dtype=float)
    scale = max(np.ptp(P[:, 0]), np.ptp(P[:, 1]))
    area2 = (P[1, 0] - P[0, 0]) * (P[2, 1] - P[0, 1]) - (P[1, 1] - P[0, 1]) * (P[2, 0] - P[0, 0])
    if scale == 0 or abs(area2) <= 1e-12 * scale**2:
        raise InvalidInputError("Steiner point needs three non-collinear points")
    if np.any(_angles_at(P) >= 2 * np.pi / 3):
        return None
    centroid = P.mean(axis=0)
    x = centroid.copy()
    for _ in range(max_iter):
        if np.any(np.linalg.norm(P - x, axis=1) == 0):
            x = x + 1e-9 * (centroid - x)
        nxt = weiszfeld_map(x, P)
        if np.linalg.norm(nxt - x) <= tol * scale:
            x = nxt
            break
        x = nxt
    return x


def steiner_tree(P1, P2, P3):
    """``(fermat_point, [segments], length)`` of the minimal connection."""
    S = steiner_point(P1, P2, P3)
    if S is None:
        raise InvalidInputError("no interior Steiner point: some triangle angle is >= 120 degrees")
    P = np.array([P1, P2, P3], dtype=float)
    segs = [np.array([S, p]) for p in P]
    return S, segs, float(np.sum(np.linalg.norm(P - S, axis=1)))


def _point_segment_distances(points, a, b):
    ab = b - a
    denom = float(np.dot(ab, ab))
    u = np.clip(((points - a) @ ab) / denom, 0.0, 1.0) if denom > 0 else np.zeros(len(points))
    proj = a + u[:, None] * ab
    return np.linalg.norm(points - proj, axis=1)


def _distance_to_polylines(points, polylines):
    best = np.full(len(points), np.inf)
    for pl in polylines:
        for a, b in zip(pl[:-1], pl[1:]):
            best = np.minimum(best, _point_segment_distances(points, a, b))
    return best


def _densify(polyline, sub):
    u = np.linspace(0.0, 1.0, sub + 1)[:-1, None]
    pts = [a + u * (b - a) for a, b in zip(polyline[:-1], polyline[1:])]
    pts.append(polyline[-1:])
    return np.vstack(pts)


def hausdorff_polylines(A, B, sub: int = 16) -> float:
    """Symmetric Hausdorff distance between two unions of polylines.

    Each segment is subdivided ``sub`` times and exact point-to-segment
    distances are taken, so the error is at most the segment length over
    ``2 sub``.
    """
    da = max(float(np.max(_distance_to_polylines(_densify(a, sub), B))) for a in A)
    db = max(float(np.max(_distance_to_polylines(_densify(b, sub), A))) for b in B)
    return max(da, db)


def steiner_distance(state, P1, P2, P3, sub: int = 16):
    """``(hausdorff, length_gap)`` between the network and the Steiner tree."""
    _, segs, L_star = steiner_tree(P1, P2, P3)
    arrays = network_arrays(state)
    L = sum(float(np.sum(np.linalg.norm(np.diff(a, axis=0), axis=1))) for a in arrays)
    return hausdorff_polylines(arrays, segs, sub=sub), L - L_star
