"""Discrete differential geometry of open planar curves.

A curve is an ordered array of ``n >= 3`` planar points sampled on the
uniform parameter grid ``x_j = j / (n - 1)``. Derivatives with respect to
``x`` use centered second-order stencils at interior nodes and one-sided
second-order stencils at the two ends.

Conventions: the unit normal is the counterclockwise rotation of the unit
tangent, ``nu = (-tau_y, tau_x)``, and the signed curvature is
``k = <gamma_xx, nu> / |gamma_x|^2``, so a counterclockwise circle of radius
``R`` has ``k = 1/R``.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateGeometryError, InvalidInputError

# Stencil differences shorter than this fraction of the curve length are
# treated as collapsed nodes.
DEGENERATE_RTOL = 1e-13


def as_points(points) -> np.ndarray:
    """Return ``points`` as a float ``(n, 2)`` array, validating shape."""
    arr = np.asarray(points, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise InvalidInputError(f"expected an (n, 2) array of points, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError("points must have finite coordinates")
    return arr


@dataclass(frozen=True, eq=False)
class DiscreteCurve:
    """Open planar curve sampled on a uniform parameter grid.

    Parameters
    ----------
    points : array_like, shape (n, 2)
        Node coordinates in parameter order, ``n >= 3``. Consecutive nodes
        must be distinct.
    """

    points: np.ndarray
    closed: bool = False

    def __post_init__(self):
        pts = as_points(self.points)
        if len(pts) < 3:
            raise InvalidInputError(f"a DiscreteCurve needs at least 3 points, got {len(pts)}")
        if self.closed:
            raise InvalidInputError("closed curves are not supported")
        seg = np.linalg.norm(np.diff(pts, axis=0), axis=1)
        if np.any(seg == 0.0):
            j = int(np.flatnonzero(seg == 0.0)[0])
            raise DegenerateGeometryError(f"consecutive nodes {j} and {j + 1} coincide")
        pts = pts.copy()
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return len(self.points)

    @property
    def dx(self) -> float:
        return 1.0 / (self.n - 1)

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.n)

    def __len__(self):
        return self.n

    def __eq__(self, other):
        if not isinstance(other, DiscreteCurve):
            return NotImplemented
        return np.array_equal(self.points, other.points)

    def __hash__(self):
        return hash(self.points.tobytes())


def _pts(curve) -> np.ndarray:
    if isinstance(curve, DiscreteCurve):
        return curve.points
    return as_points(curve)


def segment_lengths(curve) -> np.ndarray:
    """Euclidean lengths of the ``n - 1`` chords of the polyline."""
    return np.linalg.norm(np.diff(_pts(curve), axis=0), axis=1)


def cumulative_arclength(curve) -> np.ndarray:
    """Arclength of each node measured from node 0 along the polyline."""
    return np.concatenate(([0.0], np.cumsum(segment_lengths(curve))))


def arclength(curve) -> float:
    """Total polyline length of ``curve``.

    Raises
    ------
    InvalidInputError
        If the curve has fewer than two points.
    """
    pts = np.asarray(curve.points if isinstance(curve, DiscreteCurve) else curve, dtype=float)
    if pts.ndim != 2 or len(pts) < 2:
        raise InvalidInputError("arclength needs at least 2 points")
    return float(np.sum(segment_lengths(pts)))


def derivatives(points) -> tuple[np.ndarray, np.ndarray]:
    """Finite-difference ``gamma_x`` and ``gamma_xx`` at every node.

    Interior nodes use centered differences. The first derivative at the ends
    uses the 3-point one-sided formula; the second derivative uses the
    4-point one-sided formula (both second order), falling back to the
    3-point first-order formula when ``n == 3``.

    ``points`` may carry leading batch dimensions, ``(..., n, 2)``; every
    curve in the batch shares the same ``n``.

    Raises
    ------
    DegenerateGeometryError
        If a first-derivative stencil collapses (see ``DEGENERATE_RTOL``).
    """
    p = points.points if isinstance(points, DiscreteCurve) else np.asarray(points, dtype=float)
    n = p.shape[-2]
    if n < 3:
        raise InvalidInputError("derivative stencils need at least 3 points")
    h = 1.0 / (n - 1)

    d1 = np.empty_like(p)
    d1[..., 1:-1, :] = p[..., 2:, :] - p[..., :-2, :]
    d1[..., 0, :] = -3.0 * p[..., 0, :] + 4.0 * p[..., 1, :] - p[..., 2, :]
    d1[..., -1, :] = 3.0 * p[..., -1, :] - 4.0 * p[..., -2, :] + p[..., -3, :]

    seg = np.diff(p, axis=-2)
    length = np.sqrt(seg[..., 0] ** 2 + seg[..., 1] ** 2).sum(axis=-1)
    norms = np.sqrt(d1[..., 0] ** 2 + d1[..., 1] ** 2)
    bad = norms < DEGENERATE_RTOL * length[..., None]
    if np.any(bad):
        idx = np.argwhere(bad)[0]
        j = int(idx[-1])
        which = tuple(int(i) for i in idx[:-1])
        raise DegenerateGeometryError(
            f"degenerate tangent stencil at node {j}", node=j, curve=which[0] if which else None
        )

    d2 = np.empty_like(p)
    d2[..., 1:-1, :] = p[..., 2:, :] - 2.0 * p[..., 1:-1, :] + p[..., :-2, :]
    if n >= 4:
        d2[..., 0, :] = 2.0 * p[..., 0, :] - 5.0 * p[..., 1, :] + 4.0 * p[..., 2, :] - p[..., 3, :]
        d2[..., -1, :] = 2.0 * p[..., -1, :] - 5.0 * p[..., -2, :] + 4.0 * p[..., -3, :] - p[..., -4, :]
    else:
        d2[..., 0, :] = d2[..., -1, :] = p[..., 0, :] - 2.0 * p[..., 1, :] + p[..., 2, :]

    return d1 / (2.0 * h), d2 / (h * h)


def _rotate(v: np.ndarray) -> np.ndarray:
    out = np.empty_like(v)
    out[..., 0] = -v[..., 1]
    out[..., 1] = v[..., 0]
    return out


def frame(points) -> dict:
    """All nodal geometric quantities of a curve in one pass.

    Returns
    -------
    dict
        ``gx``, ``gxx`` (parameter derivatives), ``speed`` (``|gamma_x|``),
        ``tau``, ``nu`` (unit tangent/normal), ``k`` (curvature),
        ``lam`` (tangential speed) and ``v`` (velocity ``gamma_xx/|gamma_x|^2``).
    """
    gx, gxx = derivatives(points)
    sq = gx[..., 0] ** 2 + gx[..., 1] ** 2
    speed = np.sqrt(sq)
    tau = gx / speed[..., None]
    nu = _rotate(tau)
    v = gxx / sq[..., None]
    k = v[..., 0] * nu[..., 0] + v[..., 1] * nu[..., 1]
    lam = v[..., 0] * tau[..., 0] + v[..., 1] * tau[..., 1]
    return {"gx": gx, "gxx": gxx, "speed": speed, "tau": tau, "nu": nu, "k": k, "lam": lam, "v": v}


def tangents(curve) -> np.ndarray:
    return frame(curve)["tau"]


def normals(curve) -> np.ndarray:
    return frame(curve)["nu"]


def curvatures(curve) -> np.ndarray:
    return frame(curve)["k"]


def tangential_speeds(curve) -> np.ndarray:
    return frame(curve)["lam"]


def velocities(curve) -> np.ndarray:
    return frame(curve)["v"]


def _check_index(curve, j: int) -> int:
    n = len(_pts(curve))
    if not -n <= j < n:
        raise InvalidInputError(f"node index {j} out of range for {n} points")
    return j % n


def tangent(curve, j: int) -> np.ndarray:
    """Unit tangent at node ``j``."""
    return tangents(curve)[_check_index(curve, j)]


def normal(curve, j: int) -> np.ndarray:
    """Unit normal at node ``j``: the tangent rotated by +90 degrees."""
    return normals(curve)[_check_index(curve, j)]


def curvature(curve, j: int) -> float:
    """Signed curvature ``<gamma_xx, nu> / |gamma_x|^2`` at node ``j``."""
    return float(curvatures(curve)[_check_index(curve, j)])


def tangential_speed(curve, j: int) -> float:
    """Tangential velocity ``<gamma_xx, gamma_x> / |gamma_x|^3`` at node ``j``."""
    return float(tangential_speeds(curve)[_check_index(curve, j)])


def velocity(curve, j: int) -> np.ndarray:
    """Flow velocity ``gamma_xx / |gamma_x|^2`` at node ``j``."""
    return velocities(curve)[_check_index(curve, j)]


def resample_uniform(curve, n: int) -> DiscreteCurve:
    """Resample the polyline at ``n`` nodes equally spaced in arclength.

    The first and last points are copied unchanged.
    """
    if n < 3:
        raise InvalidInputError(f"resample_uniform needs n >= 3, got {n}")
    p = _pts(curve)
    s = cumulative_arclength(p)
    target = np.linspace(0.0, s[-1], n)
    out = np.column_stack((np.interp(target, s, p[:, 0]), np.interp(target, s, p[:, 1])))
    out[0] = p[0]
    out[-1] = p[-1]
    return DiscreteCurve(out)
