"""Curvature flow of planar triods and its diagnostics."""

from .errors import (
    ConvergenceWarning,
    DegenerateGeometryError,
    InvalidInputError,
    InvalidProbeError,
    PinchOffError,
    TriodFlowError,
)
from .flow import FlowConfig, FlowState, SingleCurveFlow, Trajectory, adaptive_dt, evolve, single_curve_mode, step
from .functionals import DensityProbe, MonitorRecord
from .geometry import DiscreteCurve
from .junction import JunctionReport, Triod, lambda_from_k
from .scenarios import ScenarioConfig, build_scenario

__version__ = "0.1.0"
