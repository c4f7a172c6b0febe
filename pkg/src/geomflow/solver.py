"""Time integration of the conformal-factor flow du/dt = lap(log u).

The state is advanced in w = log u, where the equation reads
w_t = exp(-w) * lap(w): positivity of u is then automatic and the far
field (where u underflows toward zero) stays well conditioned because
exp(-w) * lap(w) = -R is bounded on the families of interest.

Boundary closure: when a grid carries provenance (it was sampled from a
known family) the outermost nodes are pinned to the family's values at
every stage time (Dirichlet). Without provenance the boundary rows use a
mirror closure (zero normal derivative of w). Pointwise statistics skip
the outer margin either way, so the closure choice only has to keep the
interior stable.

Two schemes are provided: an explicit midpoint rule whose stable step
scales like h^2 * u_min (prohibitive when the far field is tiny), and a
semi-implicit midpoint rule (backward Euler predictor for the frozen
diffusion coefficient, then a trapezoid corrector) whose step is limited
only by accuracy, dt ~ h.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.linalg import LinAlgError, solve_banded

from .errors import BlowUpError, DomainError, GeomflowError, StepRejectedError, WindowError
from .exact import check_time, log_u_profile
from .geometry import laplacian_field, scalar_curvature
from .grids import CYLINDER, RADIAL, U_NOISE_FLOOR, ConformalGrid

EXPLICIT_RK2 = "ExplicitRK2"
SEMI_IMPLICIT = "SemiImplicit"
SCHEMES = (EXPLICIT_RK2, SEMI_IMPLICIT)
# trajectories sampled straight from a family, no stepping involved
EXACT = "exact"

BLOW_UP_RMAX = 1.0e3
DEFAULT_OUTPUT_COUNT = 9

# Trust region for curvature statistics on evolved data. R = -lap(w)/u divides
# a second difference by u, so the smooth O(h^2 + dt^2) integration error in w
# is amplified like 1/u; below u ~ 1e-5 that amplification exceeds the ~1e-4
# accuracy the statistics promise (measured on boundary-pinned runs), while the
# discarded tail carries curvature within 1e-6 of the retained region's values.
CURVATURE_TRUST_FLOOR = 1.0e-5


@dataclass(frozen=True)
class StepRecord:
    """One accepted step: time reached, step size, PDE residual, curvature max."""

    t: float
    dt: float
    residual: float
    r_max: float

    def __post_init__(self):
        if not (math.isfinite(self.dt) and self.dt > 0.0):
            raise DomainError(f"step record needs dt > 0, got {self.dt}")
        if not self.residual >= 0.0:
            raise DomainError(f"step record needs residual >= 0, got {self.residual}")


@dataclass(frozen=True)
class FlowTrajectory:
    """Snapshots of one flow run plus the per-step bookkeeping.

    Snapshots share the initial grid's chart, nodes and provenance (the
    provenance keeps recording which family supplied the boundary data,
    even though evolved interiors carry discretization error).
    """

    snapshots: tuple[ConformalGrid, ...]
    steps: tuple[StepRecord, ...]
    scheme: str

    def __post_init__(self):
        if self.scheme not in SCHEMES and self.scheme != EXACT:
            raise DomainError(f"unknown scheme {self.scheme!r}")
        if len(self.snapshots) < 1:
            raise WindowError("trajectory needs at least one snapshot")
        first = self.snapshots[0]
        for g in self.snapshots[1:]:
            if g.chart != first.chart or not np.array_equal(g.nodes, first.nodes):
                raise DomainError("all snapshots must share one chart and node layout")
        times = [g.t for g in self.snapshots]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise WindowError("snapshot times must be strictly increasing")

    @property
    def times(self) -> np.ndarray:
        return np.array([g.t for g in self.snapshots])

    @property
    def grid0(self) -> ConformalGrid:
        return self.snapshots[0]

    def u_at(self, t: float) -> np.ndarray:
        """Conformal factor at time t, linear in time between snapshots."""
        times = self.times
        tol = 1e-9 * max(1.0, abs(float(times[0])), abs(float(times[-1])))
        if t < times[0] - tol or t > times[-1] + tol:
            raise WindowError(f"time {t} outside snapshot range [{times[0]}, {times[-1]}]")
        k = int(np.searchsorted(times, t))
        if k == 0:
            return self.snapshots[0].u.copy()
        if k == len(times):
            return self.snapshots[-1].u.copy()
        t0, t1 = times[k - 1], times[k]
        lam = (t - t0) / (t1 - t0)
        return (1.0 - lam) * self.snapshots[k - 1].u + lam * self.snapshots[k].u


@dataclass(frozen=True)
class RmaxSeries:
    """Masked curvature maximum per snapshot and its worst drop."""

    values: tuple[tuple[float, float], ...]
    monotonicity_defect: float


@dataclass(frozen=True)
class DiagnosticReport:
    """Conservation and monotonicity defects measured on a trajectory.

    f_defect: max over reliable nodes and times of
        |log(u(t)/u(0)) + integral_0^t R dtau|  (exactly zero for the flow).
    m_of_t: per-snapshot infimum of log(u(t)/u(0)) over reliable nodes.
    harnack_defect: worst negative increment of t * R between consecutive
        snapshots after shifting times to a positive window [span, 2*span]
        (harnack_shift records the shift; zero when times already positive).
    length_evolution_defect: worst relative mismatch between the measured
        d(length)/dt of tracked circles and -pi * rho * R * sqrt(u)
        (radial chart; the rho factor drops on the cylinder chart).
    """

    f_defect: float
    m_of_t: tuple[tuple[float, float], ...]
    harnack_defect: float
    harnack_shift: float
    length_evolution_defect: float
    circle_indices: tuple[int, ...]

    def __post_init__(self):
        for name in ("f_defect", "harnack_defect", "length_evolution_defect"):
            value = getattr(self, name)
            if not value >= 0.0:
                raise DomainError(f"{name} must be nonnegative, got {value}")


class _Stencil:
    """Tridiagonal lap(w) rows plus the boundary-pinning bookkeeping."""

    def __init__(self, grid: ConformalGrid):
        n = grid.n
        h = grid.h
        inv_h2 = 1.0 / (h * h)
        sub = np.zeros(n)
        dia = np.zeros(n)
        sup = np.zeros(n)
        dia[1:-1] = -2.0 * inv_h2
        sub[1:-1] = inv_h2
        sup[1:-1] = inv_h2
        if grid.chart == RADIAL:
            rho = grid.nodes[1:-1]
            sub[1:-1] -= 1.0 / (2.0 * h * rho)
            sup[1:-1] += 1.0 / (2.0 * h * rho)
            # even extension through the axis: lap w(0) = 4 (w1 - w0) / h^2
            dia[0] = -4.0 * inv_h2
            sup[0] = 4.0 * inv_h2
            # mirror closure at the outer end (replaced by pinning if provenance)
            dia[-1] = -2.0 * inv_h2
            sub[-1] = 2.0 * inv_h2
            pinned = [n - 1] if grid.provenance is not None else []
        else:
            dia[0] = -2.0 * inv_h2
            sup[0] = 2.0 * inv_h2
            dia[-1] = -2.0 * inv_h2
            sub[-1] = 2.0 * inv_h2
            pinned = [0, n - 1] if grid.provenance is not None else []
        self.sub = sub
        self.dia = dia
        self.sup = sup
        self.pinned = np.array(pinned, dtype=int)
        self.pinned_nodes = grid.nodes[self.pinned]
        self.provenance = grid.provenance

    def apply(self, w: np.ndarray) -> np.ndarray:
        lap = self.dia * w
        lap[1:] += self.sub[1:] * w[:-1]
        lap[:-1] += self.sup[:-1] * w[1:]
        return lap

    def pin_values(self, t: float) -> np.ndarray:
        return log_u_profile(self.provenance, self.pinned_nodes, t)

    def pin(self, w: np.ndarray, t: float) -> None:
        if self.pinned.size:
            w[self.pinned] = self.pin_values(t)

    def solve_shifted(self, coeff: np.ndarray, rhs: np.ndarray) -> np.ndarray:
        """Solve (I - diag(coeff) L) w = rhs with pinned rows forced to identity."""
        c = coeff
        if self.pinned.size:
            c = coeff.copy()
            c[self.pinned] = 0.0
        n = rhs.size
        ab = np.zeros((3, n))
        ab[0, 1:] = -(c * self.sup)[:-1]
        ab[1, :] = 1.0 - c * self.dia
        ab[2, :-1] = -(c * self.sub)[1:]
        return solve_banded((1, 1), ab, rhs, check_finite=False)


def _step_explicit(st: _Stencil, w: np.ndarray, t: float, dt: float) -> np.ndarray:
    f0 = np.exp(-w) * st.apply(w)
    w_mid = w + (0.5 * dt) * f0
    st.pin(w_mid, t + 0.5 * dt)
    f1 = np.exp(-w_mid) * st.apply(w_mid)
    w_new = w + dt * f1
    st.pin(w_new, t + dt)
    return w_new


def _step_semi_implicit(st: _Stencil, w: np.ndarray, t: float, dt: float) -> np.ndarray:
    lap0 = st.apply(w)
    rhs = w.copy()
    st.pin(rhs, t + dt)
    w_star = st.solve_shifted(dt * np.exp(-w), rhs)
    d_mid = np.exp(-0.5 * (w + w_star))
    rhs = w + (0.5 * dt) * d_mid * lap0
    st.pin(rhs, t + dt)
    return st.solve_shifted((0.5 * dt) * d_mid, rhs)


_STEPPERS = {EXPLICIT_RK2: _step_explicit, SEMI_IMPLICIT: _step_semi_implicit}


def _check_state(w_new: np.ndarray, u_new: np.ndarray, t: float) -> None:
    bad = ~np.isfinite(w_new) | ~np.isfinite(u_new) | (u_new <= 0.0)
    if bad.any():
        node = int(np.argmax(bad))
        raise StepRejectedError(
            f"step toward t={t} produced an invalid conformal factor at node {node}",
            node=node,
        )


def _advance(stepper, st: _Stencil, w: np.ndarray, t: float, dt: float):
    """Run one stage-complete step and adjudicate validity of the result."""
    # overflow/invalid are expected failure modes for oversized steps; they are
    # silenced here and judged by _check_state instead of leaking as warnings
    try:
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            w_new = stepper(st, w, t, dt)
            u_new = np.exp(w_new)
    except LinAlgError:
        raise StepRejectedError(f"linear solve failed during step toward t={t + dt}") from None
    _check_state(w_new, u_new, t + dt)
    return w_new, u_new


def _stat_mask(u: np.ndarray, rel: slice) -> np.ndarray:
    mask = np.zeros(u.size, dtype=bool)
    mask[rel] = True
    mask &= u >= max(U_NOISE_FLOOR, CURVATURE_TRUST_FLOOR)
    if not mask.any():
        mask[int(np.argmax(u))] = True
    return mask


def trusted_mask(grid: ConformalGrid) -> np.ndarray:
    """Reliable-slice nodes whose conformal factor supports curvature statistics."""
    return _stat_mask(grid.u, grid.reliable_slice())


def _masked_rmax(u: np.ndarray, lap: np.ndarray, rel: slice) -> float:
    r = -lap / u
    return float(r[_stat_mask(u, rel)].max())


def adaptive_dt(grid: ConformalGrid, cfl: float) -> float:
    """Stable explicit step: cfl * min(h^2 * u_min / 4, 1 / R_max)."""
    if not (0.0 < cfl <= 1.0):
        raise DomainError(f"cfl must lie in (0, 1], got {cfl}")
    cap = grid.h * grid.h * float(grid.u.min()) / 4.0
    r = scalar_curvature(grid)
    r_max = float(r[_stat_mask(grid.u, grid.reliable_slice())].max())
    if r_max > 0.0:
        cap = min(cap, 1.0 / r_max)
    return cfl * cap


def step(grid: ConformalGrid, dt: float, scheme: str = EXPLICIT_RK2) -> ConformalGrid:
    """Advance one step of w_t = exp(-w) lap(w) and return the new grid."""
    if scheme not in _STEPPERS:
        raise DomainError(f"unknown scheme {scheme!r}")
    if not (math.isfinite(dt) and dt > 0.0):
        raise DomainError(f"step needs dt > 0, got {dt}")
    st = _Stencil(grid)
    w = np.log(grid.u)
    _, u_new = _advance(_STEPPERS[scheme], st, w, grid.t, dt)
    return grid.with_u(u_new, t=grid.t + dt)


def _resolve_output_times(t0: float, t_end: float, output_times) -> np.ndarray:
    if output_times is None:
        return np.linspace(t0, t_end, DEFAULT_OUTPUT_COUNT)
    times = np.unique(np.asarray(output_times, dtype=float))
    if times.size == 0 or not np.all(np.isfinite(times)):
        raise WindowError("output times must be a nonempty finite collection")
    tol = 1e-9 * max(1.0, abs(t0), abs(t_end))
    if times[0] < t0 - tol or times[-1] > t_end + tol:
        raise WindowError(
            f"output times must lie in [{t0}, {t_end}], got [{times[0]}, {times[-1]}]"
        )
    if times[0] > t0 + tol:
        times = np.concatenate(([t0], times))
    times[0] = t0
    if times[-1] < t_end - tol:
        times = np.concatenate((times, [t_end]))
    times[-1] = t_end
    return times


def evolve(
    grid: ConformalGrid,
    t_end: float,
    cfl: float = 0.5,
    *,
    scheme: str = EXPLICIT_RK2,
    output_times=None,
    blow_up_threshold: float = BLOW_UP_RMAX,
    max_steps: int = 2_000_000,
) -> FlowTrajectory:
    """Evolve to t_end, snapshotting at the requested output times."""
    if scheme not in _STEPPERS:
        raise DomainError(f"unknown scheme {scheme!r}")
    if not (0.0 < cfl <= 1.0):
        raise DomainError(f"cfl must lie in (0, 1], got {cfl}")
    if not (math.isfinite(t_end) and t_end > grid.t):
        raise DomainError(f"t_end must exceed the initial time {grid.t}, got {t_end}")
    if grid.provenance is not None:
        check_time(grid.provenance, t_end)
    targets = _resolve_output_times(grid.t, float(t_end), output_times)

    st = _Stencil(grid)
    stepper = _STEPPERS[scheme]
    rel = grid.reliable_slice()
    h = grid.h
    w = np.log(grid.u)
    u = grid.u.copy()
    t = grid.t
    r_max = _masked_rmax(u, laplacian_field(w, grid.nodes, h, grid.chart), rel)
    snapshots = [grid]
    steps: list[StepRecord] = []

    for target in targets[1:]:
        tol = 1e-12 * max(1.0, abs(target))
        while t < target - tol:
            if scheme == EXPLICIT_RK2:
                cap = h * h * float(u.min()) / 4.0
            else:
                cap = h
            if r_max > 0.0:
                cap = min(cap, 1.0 / r_max)
            dt = min(cfl * cap, target - t)
            w_new, u_new = _advance(stepper, st, w, t, dt)
            w_mid = 0.5 * (w + w_new)
            resid = (w_new - w) / dt - np.exp(-w_mid) * st.apply(w_mid)
            residual = float(np.abs(resid[rel]).max())
            w, u = w_new, u_new
            t = t + dt
            r_max = _masked_rmax(u, laplacian_field(w, grid.nodes, h, grid.chart), rel)
            steps.append(StepRecord(t=t, dt=dt, residual=residual, r_max=r_max))
            if r_max > blow_up_threshold:
                raise BlowUpError(
                    f"curvature maximum {r_max:.6g} crossed {blow_up_threshold:.6g} at t={t:.6g}",
                    t=t,
                    r_max=r_max,
                )
            if len(steps) >= max_steps:
                raise GeomflowError(f"step budget {max_steps} exhausted at t={t}")
        t = float(target)
        snapshots.append(ConformalGrid(grid.chart, grid.nodes.copy(), u.copy(), t, grid.provenance))

    return FlowTrajectory(snapshots=tuple(snapshots), steps=tuple(steps), scheme=scheme)


def exact_trajectory(
    spec,
    times,
    *,
    n: int,
    extent: float | None = None,
    x_lo: float | None = None,
    x_hi: float | None = None,
) -> FlowTrajectory:
    """Trajectory sampled straight from a family (no stepping, no error)."""
    from .exact import sample_grid

    times = np.asarray(times, dtype=float)
    if times.size < 2 or np.any(np.diff(times) <= 0.0):
        raise WindowError("exact trajectory needs at least two strictly increasing times")
    snaps = tuple(
        sample_grid(spec, float(t), n=n, extent=extent, x_lo=x_lo, x_hi=x_hi) for t in times
    )
    return FlowTrajectory(snapshots=snaps, steps=(), scheme=EXACT)


def rmax_series(traj: FlowTrajectory) -> RmaxSeries:
    """Per-snapshot masked curvature maximum and its worst drop."""
    values = []
    for g in traj.snapshots:
        r = scalar_curvature(g)
        rel = g.reliable_slice()
        values.append((float(g.t), float(r[_stat_mask(g.u, rel)].max())))
    drops = [a[1] - b[1] for a, b in zip(values, values[1:])]
    defect = max(0.0, max(drops, default=0.0))
    return RmaxSeries(values=tuple(values), monotonicity_defect=defect)


def _tracked_circle_indices(grid: ConformalGrid, fractions) -> tuple[int, ...]:
    rel = grid.reliable_slice()
    lo = rel.start if grid.chart == CYLINDER else 1
    hi = rel.stop - 1
    if hi <= lo:
        raise WindowError("grid too small to track circles")
    picked = sorted({min(hi, max(lo, int(round(lo + f * (hi - lo))))) for f in fractions})
    return tuple(picked)


def diagnostics(traj: FlowTrajectory, *, circle_fractions=(0.25, 0.5, 0.75)) -> DiagnosticReport:
    """Measure conservation/monotonicity defects on a trajectory; needs >= 3 snapshots."""
    if len(traj.snapshots) < 3:
        raise WindowError("diagnostics needs at least three snapshots")
    snaps = traj.snapshots
    times = traj.times
    u_all = np.stack([g.u for g in snaps])
    w_all = np.log(u_all)
    r_all = np.stack([scalar_curvature(g) for g in snaps])
    rel = snaps[0].reliable_slice()
    mask = _stat_mask(snaps[0].u, rel)
    for g in snaps[1:]:
        mask &= _stat_mask(g.u, rel)
    if not mask.any():
        mask = np.zeros(snaps[0].n, dtype=bool)
        mask[rel] = True

    f_all = w_all - w_all[0]
    r_int = cumulative_trapezoid(r_all, x=times, axis=0, initial=0.0)
    f_defect = float(np.abs(f_all + r_int)[:, mask].max())
    m_of_t = tuple(
        (float(times[k]), float(f_all[k][mask].min())) for k in range(len(snaps))
    )

    if times[0] > 0.0:
        shift = 0.0
    else:
        span = float(times[-1] - times[0])
        shift = span - float(times[0])
    tr = ((times + shift)[:, None] * r_all)[:, mask]
    increments = np.diff(tr, axis=0)
    harnack_defect = max(0.0, -float(increments.min()))

    grid0 = snaps[0]
    idx = _tracked_circle_indices(grid0, circle_fractions)
    cols = np.array(idx, dtype=int)
    root_u = np.sqrt(u_all[:, cols])
    if grid0.chart == RADIAL:
        geom = math.pi * grid0.nodes[cols]
    else:
        geom = math.pi * np.ones(cols.size)
    lengths = 2.0 * geom * root_u
    dldt = np.gradient(lengths, times, axis=0)
    rhs = -geom * r_all[:, cols] * root_u
    err = np.abs(dldt - rhs)[1:-1]
    scale = np.maximum(np.abs(rhs)[1:-1], 1e-12)
    length_defect = float((err / scale).max())

    return DiagnosticReport(
        f_defect=f_defect,
        m_of_t=m_of_t,
        harnack_defect=harnack_defect,
        harnack_shift=shift,
        length_evolution_defect=length_defect,
        circle_indices=idx,
    )
