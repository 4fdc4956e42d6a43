"""Explicit time integration of curvature flow for triods and single curves.

Interior nodes follow ``gamma_t = gamma_xx / |gamma_x|^2`` (centered
differences, Heun's method). Fixed endpoints never move. For a triod the
junction moves with the mean over the three curves of
``k_i nu_i + lambda_i tau_i``, where ``k_i`` are one-sided curvatures and
``lambda_i`` follow from them through :func:`~triodflow.junction.lambda_from_k`;
after every step the 120 degree condition is re-imposed by
:func:`~triodflow.junction.relax_angles`.
"""

import logging
import warnings
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import ConvergenceWarning, DegenerateGeometryError, InvalidInputError, PinchOffError
from .functionals import DensityProbe, MonitorRecord, monitor_record
from .geometry import DiscreteCurve, frame, resample_uniform
from .junction import ANGLE_TOL, MAX_SWEEPS, SQRT3, Triod, orientation, relax_angles

log = logging.getLogger(__name__)

PINCH_RTOL = 1e-6


@dataclass(frozen=True)
class FlowState:
    """Geometry (a Triod or a single DiscreteCurve) at time ``t``."""

    geometry: object
    t: float = 0.0
    step_count: int = 0

    def __post_init__(self):
        if not isinstance(self.geometry, (Triod, DiscreteCurve)):
            raise InvalidInputError("FlowState geometry must be a Triod or a DiscreteCurve")

    @property
    def is_triod(self) -> bool:
        return isinstance(self.geometry, Triod)

    @property
    def triod(self) -> Triod:
        if not self.is_triod:
            raise AttributeError("single-curve state has no triod")
        return self.geometry

    @property
    def arrays(self) -> list:
        if self.is_triod:
            return self.geometry.arrays
        return [self.geometry.points]


@dataclass(frozen=True)
class FlowConfig:
    """Integration and stopping parameters.

    ``min_length_ratio`` stops a run once any curve is shorter than that
    fraction of its initial length. ``resample_every = 0`` disables
    resampling; ``points_per_curve`` (if set) is the node count used when
    resampling.
    """

    cfl: float = 0.25
    resample_every: int = 50
    points_per_curve: Optional[int] = None
    angle_tol: float = ANGLE_TOL
    t_end: float = 1.0
    max_curvature: float = 1e4
    min_length_ratio: float = 0.05
    max_steps: int = 10_000_000
    monitor_every: int = 1
    record_states: bool = True
    embeddedness: bool = True

    def __post_init__(self):
        if not 0.0 < self.cfl <= 1.0:
            raise InvalidInputError(f"cfl must lie in (0, 1], got {self.cfl}")
        if self.points_per_curve is not None and self.points_per_curve < 3:
            raise InvalidInputError("points_per_curve must be at least 3")
        if self.monitor_every < 1:
            raise InvalidInputError("monitor_every must be a positive step count")


def _check_cfl(cfl):
    if not 0.0 < cfl <= 1.0:
        raise InvalidInputError(f"cfl must lie in (0, 1], got {cfl}")


def _min_metric(arrays) -> float:
    m = np.inf
    for a in arrays:
        d = 0.5 * (a[2:] - a[:-2])
        m = min(m, float(np.min(d[:, 0] ** 2 + d[:, 1] ** 2)))
    return m


def adaptive_dt(state, cfl: float = 0.25) -> float:
    """Stable explicit step ``cfl * min |gamma_x|^2 dx^2`` over interior nodes.

    ``|gamma_x| dx`` is evaluated with the centered stencil, i.e. half the
    distance between the two neighbours of each interior node.
    """
    _check_cfl(cfl)
    arrays = state.arrays if isinstance(state, FlowState) else list(state)
    m = _min_metric(arrays)
    if not m > 0.0:
        raise DegenerateGeometryError("zero-length stencil while computing the time step")
    return cfl * m


# -- rates ---------------------------------------------------------------------------
#
# Internally a network is a list of (n_i, 2) arrays; when all curves share
# n they are stacked into one (m, n, 2) array so each stage is a handful of
# vectorized operations.

_ROT = np.array([[0.0, -1.0], [1.0, 0.0]])


def _pack(arrays):
    if all(len(a) == len(arrays[0]) for a in arrays):
        return np.array(arrays, dtype=float)
    return [np.array(a, dtype=float) for a in arrays]


def _junction_velocity(K, taus, nus):
    lam = orientation(taus) * ((K[[2, 0, 1]] - K[[1, 2, 0]]) / SQRT3)
    per_curve = K[:, None] * nus + lam[:, None] * taus
    return per_curve.mean(axis=0), per_curve


def _rates_batch(X, junction):
    """Velocities of a stacked (m, n, 2) network and the interior max |k|."""
    n = X.shape[1]
    h = 1.0 / (n - 1)
    d1 = (X[:, 2:] - X[:, :-2]) * (0.5 / h)
    d2 = (X[:, 2:] - 2.0 * X[:, 1:-1] + X[:, :-2]) * (1.0 / (h * h))
    sq = d1[..., 0] ** 2 + d1[..., 1] ** 2
    if not np.all(sq > 0.0):
        c, j = np.argwhere(~(sq > 0.0))[0]
        raise DegenerateGeometryError(f"degenerate stencil at node {j + 1}", node=int(j) + 1, curve=int(c))
    V = np.zeros_like(X)
    V[:, 1:-1] = d2 / sq[..., None]
    kint = (d1[..., 0] * d2[..., 1] - d1[..., 1] * d2[..., 0]) / (sq * np.sqrt(sq))
    kmax = float(np.max(np.abs(kint))) if kint.size else 0.0
    if junction:
        g = (-3.0 * X[:, 0] + 4.0 * X[:, 1] - X[:, 2]) * (0.5 / h)
        if n >= 4:
            gxx = (2.0 * X[:, 0] - 5.0 * X[:, 1] + 4.0 * X[:, 2] - X[:, 3]) * (1.0 / (h * h))
        else:
            gxx = (X[:, 0] - 2.0 * X[:, 1] + X[:, 2]) * (1.0 / (h * h))
        gsq = g[:, 0] ** 2 + g[:, 1] ** 2
        if not np.all(gsq > 0.0):
            c = int(np.argmin(gsq))
            raise DegenerateGeometryError("degenerate stencil at the junction", node=0, curve=c)
        taus = g / np.sqrt(gsq)[:, None]
        nus = taus @ _ROT.T
        K = (gxx[:, 0] * nus[:, 0] + gxx[:, 1] * nus[:, 1]) / gsq
        vo, _ = _junction_velocity(K, taus, nus)
        V[:, 0] = vo
        kmax = max(kmax, float(np.max(np.abs(K))))
    return V, kmax


def _rates_list(arrays, junction):
    frames = []
    for i, a in enumerate(arrays):
        try:
            frames.append(frame(a))
        except DegenerateGeometryError as exc:
            exc.curve = i
            raise
    rates = [f["v"].copy() for f in frames]
    for r in rates:
        r[0] = 0.0
        r[-1] = 0.0
    kmax = max(float(np.max(np.abs(f["k"][1:-1]))) if len(f["k"]) > 2 else 0.0 for f in frames)
    if junction:
        K = np.array([f["k"][0] for f in frames])
        taus = np.array([f["tau"][0] for f in frames])
        nus = np.array([f["nu"][0] for f in frames])
        vo, _ = _junction_velocity(K, taus, nus)
        for r in rates:
            r[0] = vo
        kmax = max(kmax, float(np.max(np.abs(K))))
    return rates, kmax


def _rates(X, junction):
    if isinstance(X, np.ndarray):
        return _rates_batch(X, junction)
    return _rates_list(X, junction)


def _axpy(X, a, V):
    if isinstance(X, np.ndarray):
        return X + a * V
    return [x + a * v for x, v in zip(X, V)]


def _segments_min(X):
    if isinstance(X, np.ndarray):
        d = X[:, 1:] - X[:, :-1]
        seg = np.sqrt(d[..., 0] ** 2 + d[..., 1] ** 2)
        return seg.min(axis=1)
    out = []
    for a in X:
        d = np.diff(a, axis=0)
        out.append(np.sqrt(d[:, 0] ** 2 + d[:, 1] ** 2).min())
    return np.array(out)


def _check_pinch(X, ref_lengths):
    segmin = _segments_min(X)
    for i, (m, L0) in enumerate(zip(segmin, ref_lengths)):
        if not np.isfinite(m) or m < PINCH_RTOL * L0:
            raise PinchOffError(f"pinch-off on curve {i}: segment of length {m:.3e}", curve=i)


def _lengths(arrays):
    out = []
    for a in arrays:
        d = np.diff(a, axis=0)
        out.append(float(np.sum(np.sqrt(d[:, 0] ** 2 + d[:, 1] ** 2))))
    return out


def _place_ends(X, ends):
    X[0][0] = ends[0]
    X[0][-1] = ends[1]


def _advance(X, dt, junction, angle_tol, ends_at=None, t=0.0):
    """One Heun step on packed arrays; returns ``(new, max |k| at the start)``."""
    try:
        k1, kmax = _rates(X, junction)
        pred = _axpy(X, dt, k1)
        if ends_at is not None:
            _place_ends(pred, ends_at(t + dt))
        k2, _ = _rates(pred, junction)
    except DegenerateGeometryError as exc:
        raise PinchOffError(str(exc), node=exc.node, curve=exc.curve) from exc
    if isinstance(X, np.ndarray):
        new = X + (0.5 * dt) * (k1 + k2)
        new[:, -1] = X[:, -1]
        if not junction:
            new[:, 0] = X[:, 0]
    else:
        new = [x + (0.5 * dt) * (a + b) for x, a, b in zip(X, k1, k2)]
        for a, old in zip(new, X):
            a[-1] = old[-1]
            if not junction:
                a[0] = old[0]
    if ends_at is not None:
        _place_ends(new, ends_at(t + dt))
    if junction:
        o = new[0][0].copy()
        for a in new:
            a[0] = o
        defect = relax_angles(new, tol=angle_tol, max_sweeps=MAX_SWEEPS)
        if defect > 10.0 * angle_tol:
            warnings.warn(f"angle relaxation stopped at defect {defect:.3e}", ConvergenceWarning, stacklevel=3)
    return new, kmax


def step(
    state: FlowState,
    dt: float,
    angle_tol: float = ANGLE_TOL,
    endpoint_path: Optional[Callable] = None,
    ref_lengths=None,
) -> FlowState:
    """Advance ``state`` by one Heun step of size ``dt``.

    ``endpoint_path(t) -> (start, end)`` prescribes the two ends of a single
    curve; without it endpoints stay fixed. ``ref_lengths`` sets the lengths
    used by the pinch-off test (defaults to the current lengths).

    Raises
    ------
    PinchOffError
        If nodes of some curve collide; ``exc.curve`` is its index.
    """
    if not dt > 0:
        raise InvalidInputError(f"dt must be positive, got {dt}")
    junction = state.is_triod
    if endpoint_path is not None and junction:
        raise InvalidInputError("prescribed endpoint paths apply to single curves only")
    X = _pack(state.arrays)
    new, _ = _advance(X, dt, junction, angle_tol, endpoint_path, state.t)
    _check_pinch(new, ref_lengths if ref_lengths is not None else _lengths(state.arrays))
    return FlowState(_wrap(new, junction), t=state.t + dt, step_count=state.step_count + 1)


def _wrap(arrays, junction):
    arrays = [np.array(a) for a in arrays]
    if junction:
        return Triod(tuple(DiscreteCurve(a) for a in arrays))
    return DiscreteCurve(arrays[0])


def resample_state(state: FlowState, n: Optional[int] = None, angle_tol: float = ANGLE_TOL) -> FlowState:
    """Redistribute nodes uniformly in arclength, keeping junction and endpoints."""
    arrays = state.arrays
    new = [np.array(resample_uniform(a, n or len(a)).points) for a in arrays]
    if state.is_triod:
        relax_angles(new, tol=angle_tol)
    return replace(state, geometry=_wrap(new, state.is_triod))


# -- drivers ---------------------------------------------------------------------------


@dataclass
class Trajectory:
    """Sampled states and monitor records of one run.

    ``stop_reason`` is one of ``"t_end"``, ``"curvature_blowup"``,
    ``"min_length"`` or ``"max_steps"``.
    """

    states: list = field(default_factory=list)
    records: list = field(default_factory=list)
    stop_reason: str = ""
    probes: tuple = ()
    final: Optional[FlowState] = None

    @property
    def times(self) -> np.ndarray:
        return np.array([r.t for r in self.records])

    def series(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records])


def evolve(
    state: FlowState,
    config: FlowConfig = FlowConfig(),
    probes: Sequence[DensityProbe] = (),
    endpoint_path: Optional[Callable] = None,
) -> Trajectory:
    """Run the flow until a stop condition fires.

    The initial state is always recorded, then every ``monitor_every``
    steps and at termination. A :class:`~triodflow.errors.PinchOffError`
    propagates with the partial trajectory attached as ``exc.trajectory``.
    """
    probes = tuple(probes)
    traj = Trajectory(probes=probes)
    L0 = _lengths(state.arrays)

    def record(s):
        active = tuple(p for p in probes if p.T > s.t)
        rec = monitor_record(s, active, with_embeddedness=config.embeddedness)
        if len(active) < len(probes):
            thetas = [float("nan")] * len(probes)
            it = iter(rec.thetas)
            for i, p in enumerate(probes):
                if p.T > s.t:
                    thetas[i] = next(it)
            rec = replace(rec, thetas=tuple(thetas))
        traj.records.append(rec)
        if config.record_states:
            traj.states.append(s)
        return rec

    rec = record(state)
    junction = state.is_triod
    X = _pack(state.arrays)
    t = state.t
    kmax = rec.k_max_abs
    n_steps = 0
    last_recorded = True
    reason = ""
    while True:
        if t >= config.t_end:
            reason = "t_end"
            break
        if kmax > config.max_curvature:
            reason = "curvature_blowup"
            break
        if min(l / l0 for l, l0 in zip(_lengths(X), L0)) < config.min_length_ratio:
            reason = "min_length"
            break
        if n_steps >= config.max_steps:
            reason = "max_steps"
            break
        m = _min_metric(X)
        if not m > 0.0:
            raise DegenerateGeometryError("zero-length stencil while computing the time step")
        dt = min(config.cfl * m, config.t_end - t)
        try:
            X, kmax = _advance(X, dt, junction, config.angle_tol, endpoint_path, t)
            _check_pinch(X, L0)
        except PinchOffError as exc:
            exc.trajectory = traj
            exc.t = t
            raise
        t += dt
        n_steps += 1
        if config.t_end - t < 1e-14 * max(1.0, abs(config.t_end)):
            t = config.t_end
        if config.resample_every and n_steps % config.resample_every == 0 and endpoint_path is None:
            X = _pack([np.array(resample_uniform(a, config.points_per_curve or len(a)).points) for a in X])
            if junction:
                relax_angles(X, tol=config.angle_tol)
        last_recorded = n_steps % config.monitor_every == 0
        if last_recorded:
            rec = record(FlowState(_wrap(X, junction), t=t, step_count=state.step_count + n_steps))
            kmax = rec.k_max_abs
    final = FlowState(_wrap(X, junction), t=t, step_count=state.step_count + n_steps)
    if not last_recorded:
        record(final)
    traj.stop_reason = reason
    traj.final = final
    log.info("flow stopped at t=%.6g after %d steps: %s", t, n_steps, reason)
    return traj


class SingleCurveFlow:
    """Curvature flow of one open curve with fixed or prescribed endpoints.

    Parameters
    ----------
    curve : DiscreteCurve or array_like
    endpoint_path : callable, optional
        ``endpoint_path(t) -> (start, end)``; exact positions of the two ends.
    cfl : float
    t0 : float
    """

    def __init__(self, curve, endpoint_path=None, cfl: float = 0.25, t0: float = 0.0):
        _check_cfl(cfl)
        if not isinstance(curve, DiscreteCurve):
            curve = DiscreteCurve(curve)
        self.endpoint_path = endpoint_path
        self.cfl = cfl
        self.state = FlowState(curve, t=t0)
        self._L0 = _lengths(self.state.arrays)

    def step(self, dt: Optional[float] = None) -> FlowState:
        dt = adaptive_dt(self.state, self.cfl) if dt is None else dt
        self.state = step(self.state, dt, endpoint_path=self.endpoint_path, ref_lengths=self._L0)
        return self.state

    def run(self, t_end: float, callback: Optional[Callable] = None) -> FlowState:
        while self.state.t < t_end:
            dt = min(adaptive_dt(self.state, self.cfl), t_end - self.state.t)
            self.step(dt)
            if t_end - self.state.t < 1e-14 * max(1.0, abs(t_end)):
                self.state = replace(self.state, t=t_end)
            if callback is not None:
                callback(self.state)
        return self.state

    def evolve(self, config: FlowConfig = FlowConfig(), probes=()) -> Trajectory:
        return evolve(self.state, config, probes, endpoint_path=self.endpoint_path)


def single_curve_mode(curve, endpoint_path=None, cfl: float = 0.25) -> SingleCurveFlow:
    """Driver for a single curve, endpoints fixed or moved along ``endpoint_path``."""
    return SingleCurveFlow(curve, endpoint_path=endpoint_path, cfl=cfl)
