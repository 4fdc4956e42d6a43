"""Initial configurations, scenario files and trajectory persistence.

Scenario files are JSON documents::

    {
      "family": "perturbed_steiner",
      "params": {"amplitude": 0.05, "n": 33},
      "flow": {"t_end": 2.0, "cfl": 0.25, "monitor_every": 100},
      "probes": [{"x0": [0.0, 0.0], "T": 5.0}],
      "seed": 7
    }

``flow`` holds :class:`~triodflow.flow.FlowConfig` fields.
"""

import csv
import io
import json
import os
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from .analysis import grim_reaper, halfline_star, steiner_point
from .errors import InvalidInputError, TriodFlowError
from .flow import FlowConfig, FlowState, Trajectory
from .functionals import DensityProbe
from .geometry import DiscreteCurve, resample_uniform
from .junction import Triod, relax_angles

DEFAULT_TRIANGLE = ((-1.0, -0.6), (1.1, -0.5), (0.2, 1.0))
UNIT_RAYS = tuple((float(np.cos(a)), float(np.sin(a))) for a in np.pi / 2 + 2 * np.pi / 3 * np.arange(3))

CSV_COLUMNS = (
    "t",
    "L1",
    "L2",
    "L3",
    "L_total",
    "k_l2_sq",
    "k_max_abs",
    "E",
    "sum_k",
    "sum_lambda",
    "angle_defect",
    "junction_vel_spread",
)


class ScenarioError(TriodFlowError, ValueError):
    """Unknown family or invalid scenario parameters."""


# -- families -------------------------------------------------------------------------


def _ccw(junction, endpoints):
    P = np.asarray(endpoints, dtype=float)
    ang = np.arctan2(P[:, 1] - junction[1], P[:, 0] - junction[0])
    return P[np.argsort(ang, kind="stable")]


def _best_star(junction, endpoints):
    """Unit directions at exact 120 degrees, rotated to best match the endpoints."""
    u = endpoints - junction
    z = (u[:, 0] + 1j * u[:, 1]) / np.abs(u[:, 0] + 1j * u[:, 1])
    alpha = np.angle(np.sum(z * np.exp(-2j * np.pi * np.arange(3) / 3)))
    a = alpha + 2 * np.pi * np.arange(3) / 3
    return np.column_stack((np.cos(a), np.sin(a)))


def _smooth_triod(junction, endpoints, directions, n, bumps=None):
    """Triod whose curves leave ``junction`` exactly along ``directions``.

    Curve ``i`` is ``O + x (P - O) + x (1 - x)^2 c + b(x) nu`` with ``c``
    chosen so the parameter derivative at ``x = 0`` is ``|P - O| d``; the
    optional bump ``b(x) = x sum_m a_m sin(m pi x)`` keeps value and slope
    at the junction. Curves are resampled uniformly in arclength and the
    discrete angle condition is relaxed afterwards.
    """
    O = np.asarray(junction, dtype=float)
    x = np.linspace(0.0, 1.0, 4 * n)[:, None]
    arrays = []
    for i, (P, d) in enumerate(zip(endpoints, directions)):
        chord = P - O
        L = np.hypot(*chord)
        c = L * d - chord
        pts = O + x * chord + x * (1 - x) ** 2 * c
        if bumps is not None:
            nu = np.array([-chord[1], chord[0]]) / L
            b = np.zeros_like(x[:, 0])
            for m, a in enumerate(bumps[i], start=1):
                b += a * L * x[:, 0] * np.sin(m * np.pi * x[:, 0])
            pts = pts + b[:, None] * nu
        pts[0] = O
        pts[-1] = P
        arrays.append(np.array(resample_uniform(pts, n).points))
    for a in arrays:
        a[0] = O
    relax_angles(arrays)
    return Triod(tuple(DiscreteCurve(a) for a in arrays))


def steiner_triod(endpoints=UNIT_RAYS, n: int = 64) -> Triod:
    """Exact Steiner tree of ``endpoints`` as a triod of straight segments."""
    P = np.asarray(endpoints, dtype=float)
    S = steiner_point(*P)
    if S is None:
        raise ScenarioError("endpoints have an angle of at least 120 degrees: no Steiner triod")
    P = _ccw(S, P)
    s = np.linspace(0.0, 1.0, n)[:, None]
    curves = []
    for p in P:
        pts = S + s * (p - S)
        pts[0] = S
        pts[-1] = p
        curves.append(DiscreteCurve(pts))
    return Triod(tuple(curves))


def _family_steiner(params, rng):
    return FlowState(steiner_triod(params.get("endpoints", UNIT_RAYS), int(params.get("n", 64))))


def _family_triangle(params, rng):
    P = np.asarray(params.get("endpoints", DEFAULT_TRIANGLE), dtype=float)
    n = int(params.get("n", 33))
    O = np.asarray(params.get("junction", P.mean(axis=0)), dtype=float)
    P = _ccw(O, P)
    dirs = _best_star(O, P)
    amp = float(params.get("amplitude", 0.0))
    modes = int(params.get("modes", 3))
    bumps = amp * rng.uniform(-1.0, 1.0, size=(3, modes)) / np.arange(1, modes + 1) if amp else None
    return FlowState(_smooth_triod(O, P, dirs, n, bumps))


def _family_perturbed_steiner(params, rng):
    P = np.asarray(params.get("endpoints", DEFAULT_TRIANGLE), dtype=float)
    S = steiner_point(*P)
    if S is None:
        raise ScenarioError("endpoints have an angle of at least 120 degrees: no Steiner point")
    amp = float(params.get("amplitude", 0.05))
    n = int(params.get("n", 33))
    modes = int(params.get("modes", 3))
    scale = float(np.min(np.linalg.norm(P - S, axis=1)))
    O = S + amp * scale * rng.uniform(-1.0, 1.0, size=2)
    P = _ccw(O, P)
    dirs = _best_star(O, P)
    bumps = amp * rng.uniform(-1.0, 1.0, size=(3, modes)) / np.arange(1, modes + 1)
    return FlowState(_smooth_triod(O, P, dirs, n, bumps))


def bowed_curve(n: int = 129, height: float = 0.3, start=(-1.0, 0.0), end=(1.0, 0.0)) -> DiscreteCurve:
    """Sine-shaped bow of the given ``height`` over the chord ``start``-``end``."""
    a, b = np.asarray(start, dtype=float), np.asarray(end, dtype=float)
    chord = b - a
    nu = np.array([-chord[1], chord[0]]) / np.hypot(*chord)
    x = np.linspace(0.0, 1.0, n)[:, None]
    pts = a + x * chord + height * np.sin(np.pi * x) * nu
    pts[0], pts[-1] = a, b
    return DiscreteCurve(pts)


def _family_bowed(params, rng):
    return FlowState(
        bowed_curve(
            int(params.get("n", 129)),
            float(params.get("height", 0.3)),
            params.get("start", (-1.0, 0.0)),
            params.get("end", (1.0, 0.0)),
        )
    )


def _family_grim_reaper(params, rng):
    return FlowState(grim_reaper(params.get("w", (1.0, 0.0)), int(params.get("n", 257)), float(params.get("y_max", 1.3))))


def _family_halflines(params, rng):
    geom = halfline_star(
        params.get("x0", (0.0, 0.0)),
        float(params.get("extent", 1.0)),
        int(params.get("count", 3)),
        int(params.get("n", 257)),
    )
    return FlowState(geom)


def _family_points(params, rng):
    if "path" in params:
        state, _ = load_snapshot(params["path"])
        return state
    curves = params.get("curves")
    if curves is None:
        raise ScenarioError("family 'points' needs 'curves' or 'path'")
    t = float(params.get("t", 0.0))
    if len(curves) == 1:
        return FlowState(DiscreteCurve(np.asarray(curves[0], dtype=float)), t=t)
    if len(curves) == 3:
        return FlowState(Triod(tuple(DiscreteCurve(np.asarray(c, dtype=float)) for c in curves)), t=t)
    raise ScenarioError("'curves' must list 1 or 3 curves")


FAMILIES = {
    "steiner": _family_steiner,
    "triangle": _family_triangle,
    "perturbed_steiner": _family_perturbed_steiner,
    "bowed": _family_bowed,
    "grim_reaper": _family_grim_reaper,
    "halflines": _family_halflines,
    "points": _family_points,
}


def build_scenario(name: str, params=None, seed: int = 0) -> FlowState:
    """Construct the initial state of a named family.

    Families: ``steiner``, ``triangle``, ``perturbed_steiner``, ``bowed``,
    ``grim_reaper``, ``halflines`` and ``points`` (explicit node lists or a
    snapshot file).
    """
    if name not in FAMILIES:
        raise ScenarioError(f"unknown scenario family {name!r}; known: {', '.join(sorted(FAMILIES))}")
    rng = np.random.default_rng(seed)
    try:
        return FAMILIES[name](dict(params or {}), rng)
    except (TypeError, KeyError) as exc:
        raise ScenarioError(f"invalid parameters for {name!r}: {exc}") from exc


# -- scenario files ---------------------------------------------------------------------


@dataclass
class ScenarioConfig:
    family: str
    params: dict = field(default_factory=dict)
    flow: FlowConfig = field(default_factory=FlowConfig)
    probes: tuple = ()
    seed: int = 0
    out: str = "out"

    @classmethod
    def from_dict(cls, doc: dict) -> "ScenarioConfig":
        if "family" not in doc:
            raise ScenarioError("scenario needs a 'family'")
        known = {f.name for f in fields(FlowConfig)}
        flow_doc = dict(doc.get("flow", {}))
        unknown = set(flow_doc) - known
        if unknown:
            raise ScenarioError(f"unknown flow settings: {sorted(unknown)}")
        probes = tuple(DensityProbe(tuple(p["x0"]), float(p["T"])) for p in doc.get("probes", []))
        return cls(
            family=doc["family"],
            params=dict(doc.get("params", {})),
            flow=FlowConfig(**flow_doc),
            probes=probes,
            seed=int(doc.get("seed", 0)),
            out=str(doc.get("out", "out")),
        )

    @classmethod
    def load(cls, path) -> "ScenarioConfig":
        try:
            with open(path, encoding="utf-8") as fh:
                doc = json.load(fh)
        except OSError as exc:
            raise ScenarioError(f"cannot read scenario {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"{path} is not valid JSON: {exc}") from exc
        base = Path(path).parent
        params = doc.get("params", {})
        if "path" in params and not os.path.isabs(params["path"]):
            params["path"] = str(base / params["path"])
        return cls.from_dict(doc)

    def build(self) -> FlowState:
        return build_scenario(self.family, self.params, self.seed)


# -- persistence ------------------------------------------------------------------------------


def _fmt(x) -> str:
    return repr(float(x))


def series_rows(trajectory: Trajectory):
    n_probes = len(trajectory.probes)
    header = list(CSV_COLUMNS) + [f"theta_{i}" for i in range(n_probes)]
    rows = [header]
    for r in trajectory.records:
        L = list(r.lengths) + [0.0] * (3 - len(r.lengths))
        row = [r.t, *L[:3], r.L_total, r.k_l2_sq, r.k_max_abs, r.E, r.sum_k, r.sum_lambda, r.angle_defect]
        row += [r.junction_vel_spread, *r.thetas]
        rows.append([_fmt(v) for v in row])
    return rows


def write_series(trajectory: Trajectory, path) -> None:
    """Write the monitor records as CSV (header row, ``\\n`` line endings)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerows(series_rows(trajectory))
    _write_text(path, buf.getvalue())


def read_series(path) -> dict:
    """Load a series CSV into ``{column: float array}``."""
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise TriodFlowError(f"cannot read series {path}: {exc}") from exc
    header, data = rows[0], rows[1:]
    return {name: np.array([float(r[i]) for r in data]) for i, name in enumerate(header)}


def snapshot_dict(state: FlowState, family: str = "", seed: int = 0) -> dict:
    return {
        "t": float(state.t),
        "curves": [[[float(x), float(y)] for x, y in a] for a in state.arrays],
        "meta": {"family": str(family), "seed": int(seed)},
    }


def dumps_snapshot(state: FlowState, family: str = "", seed: int = 0) -> str:
    return json.dumps(snapshot_dict(state, family, seed)) + "\n"


def write_snapshot(state: FlowState, path, family: str = "", seed: int = 0) -> None:
    """Write the full node lists of ``state`` as JSON."""
    _write_text(path, dumps_snapshot(state, family, seed))


def load_snapshot(path):
    """Read a snapshot file; returns ``(FlowState, meta)``."""
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise TriodFlowError(f"cannot read snapshot {path}: {exc}") from exc
    curves = [np.asarray(c, dtype=float) for c in doc["curves"]]
    if len(curves) == 3:
        geom = Triod(tuple(DiscreteCurve(c) for c in curves))
    elif len(curves) == 1:
        geom = DiscreteCurve(curves[0])
    else:
        raise InvalidInputError(f"snapshot {path} holds {len(curves)} curves; expected 1 or 3")
    return FlowState(geom, t=float(doc["t"])), dict(doc.get("meta", {}))


def _write_text(path, text: str) -> None:
    try:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise TriodFlowError(f"cannot write {path}: {exc}") from exc
