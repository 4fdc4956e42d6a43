"""Monitored quantities of an evolving triod or curve.

Every integral along the network is a composite trapezoid rule on the
polyline arclength, ``sum_j (f_j + f_{j+1}) / 2 * |p_{j+1} - p_j|``, so the
same routine yields lengths (``f = 1``), curvature norms and kernel
integrals.

Functions accept a :class:`~triodflow.flow.FlowState`, a
:class:`~triodflow.junction.Triod`, a
:class:`~triodflow.geometry.DiscreteCurve` or a list of point arrays.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError, InvalidProbeError
from .geometry import DiscreteCurve, as_points, frame
from .junction import Triod, junction_identities, _junction_velocities_from_frames

FOUR_SQRT3 = 4.0 * np.sqrt(3.0)
AREA_FLOOR = 1e-14


def network_arrays(geom) -> list:
    """Point arrays of the curves of ``geom``, junction first for triods."""
    if hasattr(geom, "geometry"):
        geom = geom.geometry
    if isinstance(geom, Triod):
        return geom.arrays
    if isinstance(geom, DiscreteCurve):
        return [geom.points]
    if isinstance(geom, np.ndarray) and geom.ndim == 2:
        return [as_points(geom)]
    return [as_points(a) for a in geom]


def has_junction(geom) -> bool:
    if hasattr(geom, "geometry"):
        geom = geom.geometry
    return isinstance(geom, Triod)


def state_time(geom) -> float:
    return float(getattr(geom, "t", 0.0))


def integrate(arrays, values) -> float:
    """Trapezoid integral of nodal ``values`` against arclength.

    ``values`` is a list with one nodal array per curve.
    """
    total = 0.0
    for p, f in zip(arrays, values):
        d = np.diff(p, axis=0)
        seg = np.sqrt(d[:, 0] ** 2 + d[:, 1] ** 2)
        total += float(np.sum(0.5 * (f[:-1] + f[1:]) * seg))
    return total


def lengths(geom) -> np.ndarray:
    arrays = network_arrays(geom)
    return np.array([integrate([p], [np.ones(len(p))]) for p in arrays])


def total_length(geom) -> float:
    arrays = network_arrays(geom)
    return integrate(arrays, [np.ones(len(p)) for p in arrays])


def curvature_l2(geom) -> float:
    """``int k^2 ds`` over the whole network."""
    arrays = network_arrays(geom)
    return integrate(arrays, [frame(p)["k"] ** 2 for p in arrays])


def max_abs_curvature(geom) -> float:
    return max(float(np.max(np.abs(frame(p)["k"]))) for p in network_arrays(geom))


def _centered_derivative(t, f) -> float:
    """Second-order derivative at ``t[1]`` from three possibly uneven samples."""
    h0 = t[1] - t[0]
    h1 = t[2] - t[1]
    if h0 <= 0 or h1 <= 0:
        raise InvalidInputError("sample times must be strictly increasing")
    return (-h1 / (h0 * (h0 + h1))) * f[0] + ((h1 - h0) / (h0 * h1)) * f[1] + (h0 / (h1 * (h0 + h1))) * f[2]


def _window(window, need=3):
    window = list(window)
    if len(window) < need:
        raise InvalidInputError(f"need at least {need} consecutive samples, got {len(window)}")
    mid = len(window) // 2
    return window[mid - 1 : mid + 2]


def length_dissipation_residual(window) -> float:
    """``|dL/dt + int k^2 ds|`` at the middle of three consecutive samples.

    ``window`` holds FlowStates or MonitorRecords (which already carry
    ``L_total`` and ``k_l2_sq``).
    """
    w = _window(window)
    if all(isinstance(s, MonitorRecord) for s in w):
        t = [s.t for s in w]
        L = [s.L_total for s in w]
        k2 = w[1].k_l2_sq
    else:
        t = [state_time(s) for s in w]
        L = [total_length(s) for s in w]
        k2 = curvature_l2(w[1])
    return abs(_centered_derivative(t, L) + k2)


# -- test functions for the weak formulation -------------------------------------


class TestFunction:
    """Smooth space-time function ``phi(x, t)`` with gradient and time derivative."""

    def value(self, x, t):
        raise NotImplementedError

    def gradient(self, x, t):
        raise NotImplementedError

    def time_derivative(self, x, t):
        return np.zeros(len(x))


class ConstantTest(TestFunction):
    """``phi = c`` on a neighbourhood of the network."""

    def __init__(self, c=1.0):
        self.c = float(c)

    def value(self, x, t):
        return np.full(len(x), self.c)

    def gradient(self, x, t):
        return np.zeros((len(x), 2))


class BumpTest(TestFunction):
    """Compactly supported C^2 bump ``(1 - |x - c(t)|^2 / r^2)^3``.

    The center may drift with constant ``velocity``, which makes ``phi_t``
    nonzero.
    """

    def __init__(self, center, radius, velocity=(0.0, 0.0)):
        self.center = np.asarray(center, dtype=float)
        self.radius = float(radius)
        self.velocity = np.asarray(velocity, dtype=float)
        if self.radius <= 0:
            raise InvalidInputError("bump radius must be positive")

    def _u(self, x, t):
        d = np.asarray(x, dtype=float) - (self.center + t * self.velocity)
        q = (d[:, 0] ** 2 + d[:, 1] ** 2) / self.radius**2
        return d, np.clip(1.0 - q, 0.0, None)

    def value(self, x, t):
        _, u = self._u(x, t)
        return u**3

    def gradient(self, x, t):
        d, u = self._u(x, t)
        return (-6.0 * u**2 / self.radius**2)[:, None] * d

    def time_derivative(self, x, t):
        return -self.gradient(x, t) @ self.velocity


def brakke_residual(window, phi: TestFunction) -> float:
    """Residual of the weak (Brakke) equality at the middle of three samples.

    ``|d/dt int phi ds + int phi k^2 ds - int <grad phi, k nu> ds - int phi_t ds|``
    """
    w = _window(window)
    t = [state_time(s) for s in w]
    masses = []
    for s, tt in zip(w, t):
        arrays = network_arrays(s)
        masses.append(integrate(arrays, [phi.value(p, tt) for p in arrays]))

    arrays = network_arrays(w[1])
    tm = t[1]
    frames = [frame(p) for p in arrays]
    phik2 = integrate(arrays, [phi.value(p, tm) * (f["k"] ** 2) for p, f in zip(arrays, frames)])
    grad_term = integrate(
        arrays,
        [np.einsum("ij,ij->i", phi.gradient(p, tm), f["k"][:, None] * f["nu"]) for p, f in zip(arrays, frames)],
    )
    dt_term = integrate(arrays, [phi.time_derivative(p, tm) for p in arrays])
    return abs(_centered_derivative(t, masses) - (-phik2 + grad_term + dt_term))


# -- embeddedness -------------------------------------------------------------------


def _cross(a, b):
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


def embeddedness_ratio(geom) -> float:
    """Minimum of ``|p - q|^2 / A_pq`` over all node pairs of the network.

    ``A_pq`` is the absolute shoelace area of the closed polygon formed by the
    in-network path from ``p`` to ``q`` and the chord ``[q, p]``. Pairs with
    area below ``AREA_FLOOR`` are ignored. For triods the junction
    self-pair contributes ``4 sqrt(3)``, which caps the result.
    """
    arrays = network_arrays(geom)
    junction = has_junction(geom)
    ref = arrays[0][0]
    rel = [p - ref for p in arrays]
    prefix = []
    for p in rel:
        c = _cross(p[:-1], p[1:])
        prefix.append(np.concatenate(([0.0], np.cumsum(c))))

    best = FOUR_SQRT3 if junction else np.inf

    def consider(dist2, twice_area):
        nonlocal best
        area = 0.5 * np.abs(twice_area)
        ok = area >= AREA_FLOOR
        if np.any(ok):
            best = min(best, float(np.min(dist2[ok] / area[ok])))

    for i, (p, S) in enumerate(zip(rel, prefix)):
        a, b = np.triu_indices(len(p), k=2)
        twice = S[b] - S[a] + _cross(p[b], p[a])
        d = p[a] - p[b]
        consider(d[:, 0] ** 2 + d[:, 1] ** 2, twice)

    if junction:
        for i in range(len(rel)):
            for j in range(i + 1, len(rel)):
                p, q = rel[i][1:], rel[j][1:]
                Sp, Sq = prefix[i][1:], prefix[j][1:]
                # path: p -> junction along curve i (reversed), junction -> q along curve j
                twice = -Sp[:, None] + Sq[None, :] + _cross(q[None, :, :], p[:, None, :])
                d = p[:, None, :] - q[None, :, :]
                consider((d[..., 0] ** 2 + d[..., 1] ** 2).ravel(), twice.ravel())
    return best


# -- Gaussian density and monotonicity -------------------------------------------------


@dataclass(frozen=True)
class DensityProbe:
    """Base point ``x0`` and estimated singular time ``T`` of a kernel probe."""

    x0: tuple
    T: float

    def __post_init__(self):
        object.__setattr__(self, "x0", tuple(float(v) for v in self.x0))
        object.__setattr__(self, "T", float(self.T))


def backward_heat_kernel(x, x0, T, t) -> np.ndarray:
    """``exp(-|x - x0|^2 / 4(T - t)) / sqrt(4 pi (T - t))`` at points ``x``."""
    tau = T - t
    if tau <= 0:
        raise InvalidProbeError(f"kernel evaluated at t={t} not before T={T}")
    d = np.asarray(x, dtype=float) - np.asarray(x0, dtype=float)
    r2 = d[..., 0] ** 2 + d[..., 1] ** 2
    return np.exp(-r2 / (4.0 * tau)) / np.sqrt(4.0 * np.pi * tau)


def gaussian_density(geom, probe: DensityProbe, t=None) -> float:
    """``int rho_{x0}(x, t) ds`` over the network at the state's time."""
    t = state_time(geom) if t is None else t
    if probe.T <= t:
        raise InvalidProbeError(f"probe time T={probe.T} must exceed t={t}")
    arrays = network_arrays(geom)
    return integrate(arrays, [backward_heat_kernel(p, probe.x0, probe.T, t) for p in arrays])


def fixed_ends(geom):
    """``(point, outward unit tangent)`` for every fixed endpoint of ``geom``."""
    arrays = network_arrays(geom)
    out = []
    for p in arrays:
        tau = frame(p)["tau"]
        out.append((p[-1], tau[-1]))
    if not has_junction(geom):
        p = arrays[0]
        out.insert(0, (p[0], -frame(p)["tau"][0]))
    return out


def boundary_terms(geom, probe: DensityProbe, t=None) -> np.ndarray:
    """``<(P - x0) / 2(T - t), tau_out(P)> rho(P, t)`` for every fixed endpoint."""
    t = state_time(geom) if t is None else t
    tau = probe.T - t
    x0 = np.asarray(probe.x0)
    terms = []
    for P, tout in fixed_ends(geom):
        rho = backward_heat_kernel(P[None, :], x0, probe.T, t)[0]
        terms.append(float(np.dot(P - x0, tout)) / (2.0 * tau) * rho)
    return np.array(terms)


def monotonicity_integrand(geom, probe: DensityProbe, t=None) -> float:
    """``int |k nu + (x - x0)^perp / 2(T - t)|^2 rho ds``."""
    t = state_time(geom) if t is None else t
    tau = probe.T - t
    if tau <= 0:
        raise InvalidProbeError(f"probe time T={probe.T} must exceed t={t}")
    x0 = np.asarray(probe.x0)
    arrays = network_arrays(geom)
    vals = []
    for p in arrays:
        f = frame(p)
        d = p - x0
        normal_part = f["k"] + np.einsum("ij,ij->i", d, f["nu"]) / (2.0 * tau)
        vals.append(normal_part**2 * backward_heat_kernel(p, x0, probe.T, t))
    return integrate(arrays, vals)


@dataclass(frozen=True)
class MonotonicityResult:
    residual: float
    dtheta_dt: float
    dissipation: float
    boundary: np.ndarray


def monotonicity_residual(window, probe: DensityProbe) -> MonotonicityResult:
    """Residual of the monotonicity identity at the middle of three samples.

    ``dTheta/dt + int |k nu + (x - x0)^perp / 2(T - t)|^2 rho ds - sum_i b_i``
    where ``b_i`` are the endpoint terms of :func:`boundary_terms`.
    """
    w = _window(window)
    t = [state_time(s) for s in w]
    if probe.T <= max(t):
        raise InvalidProbeError(f"probe time T={probe.T} must exceed all sample times")
    theta = [gaussian_density(s, probe) for s in w]
    dth = _centered_derivative(t, theta)
    diss = monotonicity_integrand(w[1], probe)
    b = boundary_terms(w[1], probe)
    return MonotonicityResult(residual=dth + diss - float(np.sum(b)), dtheta_dt=dth, dissipation=diss, boundary=b)


def boundary_term_integrals(states, probe: DensityProbe) -> np.ndarray:
    """Trapezoid-in-time integral of each endpoint term over ``states``."""
    states = list(states)
    t = np.array([state_time(s) for s in states])
    b = np.array([boundary_terms(s, probe) for s in states])
    if len(states) < 2:
        return np.zeros(b.shape[1] if b.ndim == 2 else 0)
    return np.sum(0.5 * (b[1:] + b[:-1]) * np.diff(t)[:, None], axis=0)


# -- per-sample record --------------------------------------------------------------


@dataclass(frozen=True)
class MonitorRecord:
    t: float
    lengths: tuple
    L_total: float
    k_l2_sq: float
    k_max_abs: float
    E: float
    sum_k: float = 0.0
    sum_lambda: float = 0.0
    angle_defect: float = 0.0
    junction_vel_spread: float = 0.0
    thetas: tuple = field(default_factory=tuple)


def monitor_record(state, probes=(), with_embeddedness=True) -> MonitorRecord:
    """Evaluate every tracked functional on ``state``.

    Single curves report zeros for the junction fields.
    """
    arrays = network_arrays(state)
    t = state_time(state)
    frames = [frame(p) for p in arrays]
    lens = tuple(integrate([p], [np.ones(len(p))]) for p in arrays)
    L = integrate(arrays, [np.ones(len(p)) for p in arrays])
    k2 = integrate(arrays, [f["k"] ** 2 for f in frames])
    kmax = max(float(np.max(np.abs(f["k"]))) for f in frames)
    E = embeddedness_ratio(state) if with_embeddedness else float("nan")
    extra = {}
    if has_junction(state):
        geom = state.geometry if hasattr(state, "geometry") else state
        rep = junction_identities(geom)
        vj = _junction_velocities_from_frames(frames)
        spread = float(np.max(np.linalg.norm(vj - vj.mean(axis=0), axis=1)))
        extra = dict(
            sum_k=rep.sum_k, sum_lambda=rep.sum_lambda, angle_defect=rep.angle_defect, junction_vel_spread=spread
        )
    thetas = tuple(gaussian_density(state, pr) for pr in probes)
    return MonitorRecord(t=t, lengths=lens, L_total=L, k_l2_sq=k2, k_max_abs=kmax, E=E, thetas=thetas, **extra)
