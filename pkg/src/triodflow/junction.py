"""Triods and the algebra of the 120 degree triple junction.

Each curve of a :class:`Triod` is parametrized from the junction (node 0)
to its fixed endpoint (node ``n - 1``). The curves are indexed so that, in
the standard counterclockwise arrangement, the tangent of curve ``i + 1`` at
the junction is the tangent of curve ``i`` rotated by +120 degrees. Triods
arranged clockwise are supported; the sign of the junction relation between
curvatures and tangential speeds is flipped accordingly (see
:func:`orientation`).
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceWarning, InvalidInputError
from .geometry import DiscreteCurve, as_points, frame

SQRT3 = np.sqrt(3.0)

ANGLE_TOL = 1e-8
COMPAT_TOL = 1e-6
MAX_SWEEPS = 8


@dataclass(frozen=True, eq=False)
class Triod:
    """Three curves meeting at one junction, far ends fixed.

    Parameters
    ----------
    curves : sequence of 3 DiscreteCurve or (n, 2) arrays
        Node 0 of every curve must be the same point (bit-exact).
    """

    curves: tuple

    def __post_init__(self):
        curves = tuple(c if isinstance(c, DiscreteCurve) else DiscreteCurve(as_points(c)) for c in self.curves)
        if len(curves) != 3:
            raise InvalidInputError(f"a triod has exactly 3 curves, got {len(curves)}")
        o = curves[0].points[0]
        for i, c in enumerate(curves[1:], start=1):
            if not np.array_equal(c.points[0], o):
                raise InvalidInputError(f"curve {i} does not start at the junction")
        ends = [c.points[-1] for c in curves]
        for i in range(3):
            for j in range(i + 1, 3):
                if np.array_equal(ends[i], ends[j]):
                    raise InvalidInputError(f"endpoints {i} and {j} coincide")
        object.__setattr__(self, "curves", curves)

    @property
    def junction(self) -> np.ndarray:
        return self.curves[0].points[0]

    @property
    def endpoints(self) -> np.ndarray:
        return np.array([c.points[-1] for c in self.curves])

    @property
    def arrays(self) -> list:
        return [c.points for c in self.curves]

    def __eq__(self, other):
        if not isinstance(other, Triod):
            return NotImplemented
        return all(a == b for a, b in zip(self.curves, other.curves))

    __hash__ = None


def orientation(tangents) -> float:
    """+1 if the three junction tangents turn counterclockwise, else -1.

    Uses the sign of the summed cross products ``tau_i x tau_{i+1}``, which
    is twice the signed area of the triangle spanned by the tangent tips.
    """
    t = np.asarray(tangents, dtype=float)
    cross = 0.0
    for i in range(3):
        a, b = t[i], t[(i + 1) % 3]
        cross += a[0] * b[1] - a[1] * b[0]
    return 1.0 if cross >= 0.0 else -1.0


def lambda_from_k(K) -> np.ndarray:
    """Junction tangential speeds from junction curvatures.

    ``lambda_i = (k_{i-1} - k_{i+1}) / sqrt(3)`` with cyclic indices, i.e.
    ``Lambda = u x K`` for ``u = (1, 1, 1) / sqrt(3)``. On the plane
    ``sum K = 0`` this is ``-S K`` with ``S`` the clockwise quarter turn
    about ``u``.
    """
    k = np.asarray(K, dtype=float)
    if k.shape != (3,):
        raise InvalidInputError(f"K must have 3 entries, got shape {k.shape}")
    return (np.roll(k, 1) - np.roll(k, -1)) / SQRT3


def _junction_frames(triod: Triod):
    return [frame(c.points) for c in triod.curves]


def junction_curvatures(triod: Triod) -> np.ndarray:
    """One-sided curvature of each curve at the junction node."""
    return np.array([f["k"][0] for f in _junction_frames(triod)])


def junction_tangents(triod: Triod) -> np.ndarray:
    return np.array([f["tau"][0] for f in _junction_frames(triod)])


def angle_defect(triod: Triod) -> float:
    """``|tau_1(0) + tau_2(0) + tau_3(0)|``; zero exactly at 120 degrees."""
    return float(np.linalg.norm(junction_tangents(triod).sum(axis=0)))


@dataclass(frozen=True)
class JunctionReport:
    K: np.ndarray
    Lambda: np.ndarray
    sum_k: float
    sum_lambda: float
    sum_sq_diff: float
    sum_k_lambda: float
    angle_defect: float
    orientation: float = 1.0


def junction_identities(triod: Triod) -> JunctionReport:
    """Evaluate the junction identities on a discrete triod.

    ``Lambda`` comes from :func:`lambda_from_k` (sign-corrected for clockwise
    triods), never from one-sided tangential stencils.
    """
    frames = _junction_frames(triod)
    K = np.array([f["k"][0] for f in frames])
    taus = np.array([f["tau"][0] for f in frames])
    sgn = orientation(taus)
    lam = sgn * lambda_from_k(K)
    return JunctionReport(
        K=K,
        Lambda=lam,
        sum_k=float(K.sum()),
        sum_lambda=float(lam.sum()),
        sum_sq_diff=float(np.dot(K, K) - np.dot(lam, lam)),
        sum_k_lambda=float(np.dot(K, lam)),
        angle_defect=float(np.linalg.norm(taus.sum(axis=0))),
        orientation=sgn,
    )


def junction_velocities(triod: Triod) -> np.ndarray:
    """Per-curve junction velocity ``k_i nu_i + lambda_i tau_i``, shape (3, 2)."""
    frames = _junction_frames(triod)
    return _junction_velocities_from_frames(frames)


def _junction_velocities_from_frames(frames) -> np.ndarray:
    K = np.array([f["k"][0] for f in frames])
    taus = np.array([f["tau"][0] for f in frames])
    nus = np.array([f["nu"][0] for f in frames])
    lam = orientation(taus) * lambda_from_k(K)
    return K[:, None] * nus + lam[:, None] * taus


@dataclass(frozen=True)
class CompatibilityReport:
    """Pass/fail of the compatibility conditions of order 0, 1 and 2.

    Order 2 is split into (a) zero velocity at the fixed endpoints and (b)
    equal velocities of the three curves at the junction.
    """

    tol: float
    order0: bool
    order1: bool
    order2a: bool
    order2b: bool
    angle_defect: float
    endpoint_speeds: np.ndarray
    junction_velocity_gaps: np.ndarray
    messages: tuple = field(default_factory=tuple)

    @property
    def order2(self) -> bool:
        return self.order2a and self.order2b

    @property
    def passed(self) -> bool:
        return self.order0 and self.order1 and self.order2


def compatibility_report(triod, tol: float = COMPAT_TOL) -> CompatibilityReport:
    """Check the compatibility conditions of orders 0-2 on a triod.

    ``triod`` may also be a sequence of three point arrays; in that case
    concurrency and distinct endpoints are checked here instead of raising.
    """
    arrays = triod.arrays if isinstance(triod, Triod) else [as_points(c) for c in triod]
    messages = []

    order0 = len(arrays) == 3 and all(len(a) >= 3 for a in arrays)
    if order0:
        o = arrays[0][0]
        if not all(np.array_equal(a[0], o) for a in arrays):
            order0 = False
            messages.append("order 0: curves are not concurrent at the junction")
        ends = [a[-1] for a in arrays]
        if any(np.array_equal(ends[i], ends[j]) for i in range(3) for j in range(i + 1, 3)):
            order0 = False
            messages.append("order 0: endpoints are not distinct")
    else:
        messages.append("order 0: need three curves of at least 3 points")

    frames = [frame(a) for a in arrays]
    taus = np.array([f["tau"][0] for f in frames])
    defect = float(np.linalg.norm(taus.sum(axis=0)))
    order1 = defect <= tol
    if not order1:
        messages.append(f"order 1: angle defect {defect:.3e} exceeds {tol:.1e}")

    end_speed = np.array([np.linalg.norm(f["v"][-1]) for f in frames])
    order2a = bool(np.all(end_speed <= tol))
    if not order2a:
        bad = [i + 1 for i in range(3) if end_speed[i] > tol]
        messages.append(f"order 2: nonzero velocity at endpoint(s) {bad}")

    v0 = np.array([f["v"][0] for f in frames])
    gaps = np.array([np.linalg.norm(v0[i] - v0[j]) for i, j in ((0, 1), (1, 2), (2, 0))])
    order2b = bool(np.all(gaps <= tol))
    if not order2b:
        messages.append(f"order 2: junction velocities differ (max gap {gaps.max():.3e})")

    return CompatibilityReport(
        tol=tol,
        order0=order0,
        order1=bool(order1),
        order2a=order2a,
        order2b=order2b,
        angle_defect=defect,
        endpoint_speeds=end_speed,
        junction_velocity_gaps=gaps,
        messages=tuple(messages),
    )


def endpoint_conditions(triod: Triod) -> np.ndarray:
    """Residual ``max(|k|, |lambda|)`` at each fixed endpoint."""
    out = []
    for c in triod.curves:
        f = frame(c.points)
        out.append(max(abs(f["k"][-1]), abs(f["lam"][-1])))
    return np.array(out)


def relax_angles(arrays, tol: float = ANGLE_TOL, max_sweeps: int = MAX_SWEEPS) -> float:
    """Restore the 120 degree condition in place by moving node 1 of each curve.

    Node 1 of curve ``i`` moves on the circle about the junction through its
    current position. Each sweep is a damped minimum-norm Newton step on the
    two-dimensional defect ``sum_i tau_i(0)`` with respect to the three
    angles. ``arrays`` is a list of three ``(n_i, 2)`` arrays or one
    ``(3, n, 2)`` array. Returns the final defect.
    """
    o = arrays[0][0].copy()
    p2 = np.array([a[2] for a in arrays])
    d = np.array([a[1] for a in arrays]) - o
    radius = np.sqrt(d[:, 0] ** 2 + d[:, 1] ** 2)
    phi = np.arctan2(d[:, 1], d[:, 0])
    base = p2 + 3.0 * o

    def evaluate(angles):
        c, s = np.cos(angles), np.sin(angles)
        p1 = o + radius[:, None] * np.column_stack((c, s))
        g = 4.0 * p1 - base
        gn = np.sqrt(g[:, 0] ** 2 + g[:, 1] ** 2)
        t = g / gn[:, None]
        dg = (4.0 * radius)[:, None] * np.column_stack((-s, c))
        proj = t[:, 0] * dg[:, 0] + t[:, 1] * dg[:, 1]
        jac = ((dg - t * proj[:, None]) / gn[:, None]).T
        return t.sum(axis=0), jac, p1

    defect_vec, jac, p1 = evaluate(phi)
    defect = float(np.hypot(defect_vec[0], defect_vec[1]))
    start = defect
    sweeps = 0
    while defect > tol and sweeps < max_sweeps:
        sweeps += 1
        try:
            step = -jac.T @ np.linalg.solve(jac @ jac.T, defect_vec)
        except np.linalg.LinAlgError:
            break
        scale = 1.0
        for _ in range(20):
            trial = phi + scale * step
            tv, tj, tp = evaluate(trial)
            td = float(np.hypot(tv[0], tv[1]))
            if td < defect:
                phi, defect_vec, jac, defect, p1 = trial, tv, tj, td, tp
                break
            scale *= 0.5
        else:
            break

    if defect < start:
        for i, a in enumerate(arrays):
            a[1] = p1[i]
        return defect
    return start


def enforce_junction(triod: Triod, new_junction, tol: float = ANGLE_TOL, max_sweeps: int = MAX_SWEEPS) -> Triod:
    """Move the junction to ``new_junction`` and re-impose the 120 degree angles.

    Endpoints are never touched. Emits :class:`ConvergenceWarning` when the
    defect stays above ``10 * tol`` after ``max_sweeps`` sweeps.
    """
    o = np.asarray(new_junction, dtype=float).copy()
    arrays = [c.points.copy() for c in triod.curves]
    for a in arrays:
        a[0] = o
    defect = relax_angles(arrays, tol=tol, max_sweeps=max_sweeps)
    if defect > 10.0 * tol:
        warnings.warn(f"angle relaxation stopped at defect {defect:.3e}", ConvergenceWarning, stacklevel=2)
    return Triod(tuple(DiscreteCurve(a) for a in arrays))
