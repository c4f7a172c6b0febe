"""Closed-form conformal flow solutions used as oracles and initial data.

Every family solves du/dt = lap(log u) on its chart, where lap is the flat
Laplacian of the chart; the scalar curvature of g = u * (flat) is
R = -lap(log u) / u.

Families:
  Flat      u = 1 on the plane (stationary).
  Cigar     u = (4/R0) / (rho^2 + (4/R0) e^{R0 t}); tip curvature R0 for all
            t, curvature profile R(s) = R0 sech^2(sqrt(R0) s / 2).
  DSSoliton u = 2 / (beta (rho^2 + delta e^{2 beta t})); eternal gradient
            soliton, R at the center equals 2*beta for all t.
  Sphere    u = -8t / (1 + rho^2)^2 for t < 0; round, R(t) = 1/(-t).
  Rosenau   u = sinh(-t) / (cosh x + cosh t) on the cylinder for t < 0;
            R = (1 + cosh t cosh x) / (sinh(-t) (cosh x + cosh t)),
            R_max(t) = coth(-t).

Hyperbolic evaluations run in log space so coordinates with |x| of a few
hundred stay finite and hit their asymptotic limits instead of overflowing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ExtentError
from .grids import CYLINDER, RADIAL, ConformalGrid

CIGAR = "Cigar"
ROSENAU = "Rosenau"
SPHERE = "Sphere"
FLAT = "Flat"
DS_SOLITON = "DSSoliton"
FAMILIES = (CIGAR, ROSENAU, SPHERE, FLAT, DS_SOLITON)

_LOG2 = math.log(2.0)
# exp overflow threshold for float64; beyond it log-space paths are mandatory
_EXP_MAX = 700.0


def _logcosh(y):
    y = np.abs(np.asarray(y, dtype=float))
    return y + np.log1p(np.exp(-2.0 * y)) - _LOG2


def _logsinh(y):
    """log(sinh(y)) for y > 0, stable for both tiny and huge y."""
    y = np.asarray(y, dtype=float)
    if np.any(y <= 0.0):
        raise DomainError("logsinh expects positive argument")
    small = y < 1e-3
    out = y + np.log1p(-np.exp(-2.0 * y)) - _LOG2
    if np.any(small):
        ys = np.where(small, y, 1.0)
        out = np.where(small, np.log(ys) + ys * ys / 6.0, out)
    return out


@dataclass(frozen=True)
class ExactSolutionSpec:
    """Family tag plus validated parameters, hashable and immutable."""

    family: str
    params: tuple[tuple[str, float], ...] = ()

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise DomainError(f"unknown family {self.family!r}")
        params = dict(self.params)
        object.__setattr__(self, "params", tuple(sorted(params.items())))
        allowed = _FAMILY_PARAMS[self.family]
        extra = set(params) - set(allowed)
        if extra:
            raise DomainError(f"{self.family} does not take params {sorted(extra)}")
        for key, default in allowed.items():
            value = float(params.get(key, default))
            if key in ("r0", "beta", "delta") and value <= 0.0:
                raise DomainError(f"{self.family} requires {key} > 0")
            params[key] = value
        if self.family == DS_SOLITON:
            if params.get("x0", 0.0) != 0.0 or params.get("y0", 0.0) != 0.0:
                # off-center solitons are not rotationally symmetric about the
                # chart origin, so they cannot live on the radial grid
                raise DomainError("DSSoliton center must be the chart origin")
        object.__setattr__(self, "params", tuple(sorted(params.items())))

    @property
    def p(self) -> dict[str, float]:
        return dict(self.params)

    @property
    def chart(self) -> str:
        return CYLINDER if self.family == ROSENAU else RADIAL

    def existence_interval(self) -> tuple[float, float]:
        if self.family in (ROSENAU, SPHERE):
            return (-math.inf, 0.0)
        return (-math.inf, math.inf)


_FAMILY_PARAMS: dict[str, dict[str, float]] = {
    CIGAR: {"r0": 4.0},
    ROSENAU: {},
    SPHERE: {},
    FLAT: {},
    DS_SOLITON: {"beta": 2.0, "delta": 1.0, "x0": 0.0, "y0": 0.0},
}


def cigar(r0: float = 4.0) -> ExactSolutionSpec:
    return ExactSolutionSpec(CIGAR, (("r0", float(r0)),))


def rosenau() -> ExactSolutionSpec:
    return ExactSolutionSpec(ROSENAU)


def sphere() -> ExactSolutionSpec:
    return ExactSolutionSpec(SPHERE)


def flat() -> ExactSolutionSpec:
    return ExactSolutionSpec(FLAT)


def ds_soliton(beta: float = 2.0, delta: float = 1.0) -> ExactSolutionSpec:
    return ExactSolutionSpec(DS_SOLITON, (("beta", float(beta)), ("delta", float(delta))))


@dataclass(frozen=True)
class ChartPoint:
    """A point of the radial chart (rho,) or the cylinder chart (x, theta)."""

    chart: str
    coords: tuple[float, ...]

    def __post_init__(self):
        if self.chart == RADIAL:
            (rho,) = self.coords
            if rho < 0.0:
                raise DomainError("radial coordinate must be nonnegative")
            object.__setattr__(self, "coords", (float(rho),))
        elif self.chart == CYLINDER:
            x, theta = self.coords
            object.__setattr__(self, "coords", (float(x), math.remainder(theta, 2.0 * math.pi)))
        else:
            raise DomainError(f"unknown chart {self.chart!r}")


def radial_point(rho: float) -> ChartPoint:
    return ChartPoint(RADIAL, (rho,))


def cylinder_point(x: float, theta: float = 0.0) -> ChartPoint:
    return ChartPoint(CYLINDER, (x, theta))


def check_time(spec: ExactSolutionSpec, t: float) -> None:
    lo, hi = spec.existence_interval()
    if not (lo < t < hi):
        raise DomainError(f"{spec.family} is only defined for t in ({lo}, {hi}); got t={t}")


def _ds_params(spec: ExactSolutionSpec) -> tuple[float, float]:
    if spec.family == CIGAR:
        r0 = spec.p["r0"]
        return r0 / 2.0, 4.0 / r0
    return spec.p["beta"], spec.p["delta"]


def _ds_shift(beta: float, delta: float, t: float) -> float:
    arg = math.log(delta) + 2.0 * beta * t
    if arg > _EXP_MAX:
        raise DomainError("soliton time shift overflows float64; rescale first")
    return math.exp(arg)


def log_u_profile(spec: ExactSolutionSpec, coords: np.ndarray, t: float) -> np.ndarray:
    """log u along the generator line (rho or x nodes) at time t."""
    check_time(spec, t)
    c = np.asarray(coords, dtype=float)
    fam = spec.family
    if fam == FLAT:
        return np.zeros_like(c)
    if fam == ROSENAU:
        lcx = _logcosh(c)
        lct = _logcosh(t)
        return _logsinh(-t) - np.logaddexp(lcx, lct)
    if fam == SPHERE:
        return math.log(-8.0 * t) - 2.0 * np.log1p(c * c)
    beta, delta = _ds_params(spec)
    shift = _ds_shift(beta, delta, t)
    return math.log(2.0 / beta) - np.log(c * c + shift)


def u_profile(spec: ExactSolutionSpec, coords: np.ndarray, t: float) -> np.ndarray:
    return np.exp(log_u_profile(spec, coords, t))


def r_profile(spec: ExactSolutionSpec, coords: np.ndarray, t: float) -> np.ndarray:
    """Scalar curvature R = -lap(log u)/u along the generator line."""
    check_time(spec, t)
    c = np.asarray(coords, dtype=float)
    fam = spec.family
    if fam == FLAT:
        return np.zeros_like(c)
    if fam == ROSENAU:
        lcx = _logcosh(c)
        lct = _logcosh(t)
        num = np.logaddexp(0.0, lcx + lct)
        return np.exp(num - _logsinh(-t) - np.logaddexp(lcx, lct))
    if fam == SPHERE:
        return np.full_like(c, 1.0 / (-t))
    beta, delta = _ds_params(spec)
    shift = _ds_shift(beta, delta, t)
    return 2.0 * beta * shift / (c * c + shift)


def dudt_profile(spec: ExactSolutionSpec, coords: np.ndarray, t: float) -> np.ndarray:
    """Analytic time derivative of u; equals lap(log u) pointwise."""
    check_time(spec, t)
    c = np.asarray(coords, dtype=float)
    fam = spec.family
    if fam == FLAT:
        return np.zeros_like(c)
    if fam == ROSENAU:
        lcx = _logcosh(c)
        lct = _logcosh(t)
        return -np.exp(np.logaddexp(0.0, lcx + lct) - 2.0 * np.logaddexp(lcx, lct))
    if fam == SPHERE:
        return -8.0 / (1.0 + c * c) ** 2
    beta, delta = _ds_params(spec)
    shift = _ds_shift(beta, delta, t)
    return -4.0 * shift / (c * c + shift) ** 2


def _point_coord(spec: ExactSolutionSpec, point: ChartPoint) -> float:
    if point.chart != spec.chart:
        raise DomainError(f"{spec.family} lives on the {spec.chart} chart, got {point.chart}")
    return point.coords[0]


def eval_u(spec: ExactSolutionSpec, point: ChartPoint, t: float) -> float:
    return float(u_profile(spec, np.array([_point_coord(spec, point)]), t)[0])


def eval_R(spec: ExactSolutionSpec, point: ChartPoint, t: float) -> float:
    return float(r_profile(spec, np.array([_point_coord(spec, point)]), t)[0])


def eval_dudt(spec: ExactSolutionSpec, point: ChartPoint, t: float) -> float:
    return float(dudt_profile(spec, np.array([_point_coord(spec, point)]), t)[0])


def rosenau_rmax(t: float) -> float:
    """Supremum of R at time t < 0, approached at the cylinder ends: coth(-t)."""
    if t >= 0.0:
        raise DomainError("Rosenau solution requires t < 0")
    return 1.0 / math.tanh(-t)


def sample_grid(
    spec: ExactSolutionSpec,
    t: float,
    *,
    n: int,
    extent: float | None = None,
    x_lo: float | None = None,
    x_hi: float | None = None,
) -> ConformalGrid:
    """Sample the family on a uniform grid of its chart at time t."""
    if spec.chart == RADIAL:
        if extent is None or extent <= 0.0:
            raise ExtentError("radial sampling needs extent > 0")
        nodes = np.linspace(0.0, float(extent), int(n))
    else:
        if x_lo is None or x_hi is None:
            if extent is None or extent <= 0.0:
                raise ExtentError("cylinder sampling needs extent > 0 or explicit bounds")
            x_lo, x_hi = -float(extent), float(extent)
        if not x_hi > x_lo:
            raise ExtentError("cylinder sampling needs x_hi > x_lo")
        nodes = np.linspace(float(x_lo), float(x_hi), int(n))
    u = u_profile(spec, nodes, t)
    return ConformalGrid(chart=spec.chart, nodes=nodes, u=u, t=float(t), provenance=spec)


def spec_from_name(family: str, **params: float) -> ExactSolutionSpec:
    """Build a spec from a family name (case-insensitive) and parameters."""
    lookup = {f.lower(): f for f in FAMILIES}
    key = family.strip().lower()
    if key not in lookup:
        raise DomainError(f"unknown family {family!r}; expected one of {list(FAMILIES)}")
    return ExactSolutionSpec(lookup[key], tuple(sorted((k, float(v)) for k, v in params.items())))
