import math

import numpy as np
import pytest

from geomflow import exact, geometry, rescaling, solver
from geomflow.errors import (
    DegeneratePickError,
    DomainError,
    ExtentError,
    WindowError,
)
from geomflow.grids import ConformalGrid


def ladder_trajectory(j, h_target=0.05, snapshot_count=65):
    return rescaling.backward_rosenau_trajectory(
        j, h_target=h_target, snapshot_count=snapshot_count
    )


def ladder_pick(j, **kwargs):
    traj = ladder_trajectory(j, **kwargs)
    pick = rescaling.pick_point(
        traj, rescaling.default_window(j), rescaling.default_gamma(j), j=j
    )
    return traj, pick


def sphere_trajectory(t_start=-8.0, snapshots=257):
    times = np.linspace(t_start, -1e-3, snapshots)
    return solver.exact_trajectory(exact.sphere(), times, n=1201, extent=30.0)


def classifier_rosenau_trajectory():
    times = np.linspace(-64.0, -1.0, 253)
    return solver.exact_trajectory(exact.rosenau(), times, n=3081, x_lo=-77.0, x_hi=77.0)


def test_default_window_is_dyadic():
    assert [rescaling.default_window(j) for j in range(1, 7)] == [
        -2.0, -4.0, -8.0, -16.0, -32.0, -64.0,
    ]


def test_default_gamma_increases_toward_one():
    gammas = [rescaling.default_gamma(j) for j in range(1, 9)]
    assert gammas[0] == 0.5
    assert all(0.0 < g < 1.0 for g in gammas)
    assert all(b > a for a, b in zip(gammas, gammas[1:]))


def test_cigar_profile_values():
    assert rescaling.cigar_profile(0.0) == 1.0
    s_half = 2.0 * math.acosh(math.sqrt(2.0))
    assert rescaling.cigar_profile(s_half) == pytest.approx(0.5, rel=1e-12)
    s = np.linspace(0.0, 6.0, 25)
    prof = rescaling.cigar_profile(s)
    assert prof.shape == s.shape
    assert np.all(np.diff(prof) < 0.0)


@pytest.mark.parametrize("T", [0.0, 1.0, float("nan")])
def test_pick_rejects_nonnegative_window(T):
    traj = ladder_trajectory(1)
    with pytest.raises(DomainError):
        rescaling.pick_point(traj, T, 0.5)


@pytest.mark.parametrize("gamma", [0.0, 1.0, -0.2, 1.5])
def test_pick_rejects_bad_gamma(gamma):
    traj = ladder_trajectory(1)
    with pytest.raises(DomainError):
        rescaling.pick_point(traj, -2.0, gamma)


def test_pick_needs_window_coverage():
    traj = ladder_trajectory(1)  # starts at -2
    with pytest.raises(WindowError):
        rescaling.pick_point(traj, -4.0, 0.5)


def test_pick_needs_strictly_backward_times():
    base = exact.sample_grid(exact.flat(), -1.0, n=64, extent=5.0)
    snaps = (
        ConformalGrid(base.chart, base.nodes.copy(), base.u.copy(), -1.0),
        ConformalGrid(base.chart, base.nodes.copy(), base.u.copy(), 0.0),
    )
    traj = solver.FlowTrajectory(snapshots=snaps, steps=(), scheme=solver.EXACT)
    with pytest.raises(WindowError):
        rescaling.pick_point(traj, -1.0, 0.5)


def test_flat_pick_is_degenerate():
    times = np.linspace(-2.0, -0.5, 9)
    traj = solver.exact_trajectory(exact.flat(), times, n=201, extent=10.0)
    with pytest.raises(DegeneratePickError):
        rescaling.pick_point(traj, -2.0, 0.5)


def test_tied_scores_resolve_to_earliest_snapshot():
    # equal weights (-t)(t - T) at t = -3 and t = -1 for T = -4, identical u
    base = exact.sample_grid(exact.sphere(), -1.0, n=201, extent=10.0)
    snaps = tuple(
        ConformalGrid(base.chart, base.nodes.copy(), base.u.copy(), t)
        for t in (-4.0, -3.0, -1.0)
    )
    traj = solver.FlowTrajectory(snapshots=snaps, steps=(), scheme=solver.EXACT)
    pick = rescaling.pick_point(traj, -4.0, 0.5)
    assert pick.t_j == -3.0


def test_pick_is_reproducible():
    traj, pick = ladder_pick(3)
    again = rescaling.pick_point(
        traj, rescaling.default_window(3), rescaling.default_gamma(3), j=3
    )
    assert again == pick


def test_backward_pick_lands_mid_window_at_half_coth():
    traj, pick = ladder_pick(3)
    assert pick.j == 3
    assert pick.T_j == -8.0
    # weight (-t)(t - T) peaks at T/2; the snapshot grid contains it exactly
    assert pick.t_j == pytest.approx(-4.0005, abs=1e-9)
    assert pick.x_j == pytest.approx(-15.5, abs=1e-9)
    assert 2.0 * pick.M_j == pytest.approx(1.0 / math.tanh(-pick.t_j), abs=1e-3)
    assert pick.alpha_j == pytest.approx((pick.t_j - pick.T_j) * pick.M_j, rel=1e-14)
    assert pick.omega_j == pytest.approx(-pick.t_j * pick.M_j, rel=1e-14)
    assert pick.alpha_j == pytest.approx(2.0, abs=5e-3)
    assert pick.omega_j == pytest.approx(2.0, abs=5e-3)
    assert pick.score == pytest.approx(
        (-pick.t_j) * (pick.t_j - pick.T_j) * pick.M_j, rel=1e-13
    )


def test_pick_attains_searched_supremum():
    traj, pick = ladder_pick(2)
    sup = 0.0
    for grid in traj.snapshots:
        t = float(grid.t)
        weight = (-t) * (t - pick.T_j)
        if weight <= 0.0:
            continue
        mag = 0.5 * np.abs(geometry.scalar_curvature(grid))
        sup = max(sup, weight * float(mag[solver.trusted_mask(grid)].max()))
    assert pick.score >= pick.gamma_j * sup
    assert pick.score >= sup * (1.0 - 2.0 * rescaling.PICK_TIE_RTOL)


def test_pick_validation_rejects_inconsistent_fields():
    good = dict(
        j=None, T_j=-2.0, gamma_j=0.5, x_j=0.0, node=0,
        t_j=-1.0, M_j=1.0, alpha_j=1.0, omega_j=1.0, score=1.0,
    )
    rescaling.RescalingPick(**good)
    for bad in (
        dict(T_j=0.5),
        dict(gamma_j=1.2),
        dict(t_j=0.5),
        dict(t_j=-3.0),
        dict(M_j=-1.0),
        dict(alpha_j=-1.0),
        dict(omega_j=0.0),
    ):
        with pytest.raises(DomainError):
            rescaling.RescalingPick(**{**good, **bad})


def test_dilated_window_is_open():
    traj, pick = ladder_pick(3)
    flow = rescaling.dilate(traj, pick)
    lo, hi = flow.window
    assert lo == -pick.alpha_j and hi == pick.omega_j
    for t in (lo, hi, lo - 1.0, hi + 1.0):
        with pytest.raises(WindowError):
            flow.u_at(t)
        with pytest.raises(WindowError):
            flow.magnitude_bound(t)


def test_dilation_scales_conformal_factor():
    traj, pick = ladder_pick(3)
    flow = rescaling.dilate(traj, pick)
    np.testing.assert_allclose(
        flow.u_at(0.0), pick.M_j * traj.u_at(pick.t_j), rtol=1e-13
    )
    grid = flow.grid_at(0.5)
    assert grid.t == 0.5
    assert grid.chart == traj.grid0.chart


def test_dilated_tip_curvature_is_two():
    traj, pick = ladder_pick(3)
    flow = rescaling.dilate(traj, pick)
    r = geometry.scalar_curvature(flow.grid_at(0.0))
    assert float(r[pick.node]) == pytest.approx(2.0, rel=1e-12)


def test_magnitude_bound_holds_inside_window():
    traj, pick = ladder_pick(3)
    flow = rescaling.dilate(traj, pick)
    assert flow.magnitude_bound(0.0) == pytest.approx(1.0 / pick.gamma_j, rel=1e-13)
    lo, hi = flow.window
    for t in np.linspace(lo + 0.05, hi - 0.05, 21):
        grid = flow.grid_at(float(t))
        mag = 0.5 * np.abs(geometry.scalar_curvature(grid))
        peak = float(mag[solver.trusted_mask(grid)].max())
        assert peak <= flow.magnitude_bound(float(t))


def test_rescaled_profile_structure():
    traj, pick = ladder_pick(3)
    flow = rescaling.dilate(traj, pick)
    prof = rescaling.rescaled_profile(flow, 3.0)
    assert prof.s[0] == 0.0
    assert prof.Rn[0] == pytest.approx(1.0, abs=1e-12)
    assert prof.R0 == pytest.approx(2.0, rel=1e-12)
    assert np.all(np.diff(prof.s) >= 0.0)
    assert float(prof.s[-1]) <= 3.0
    assert prof.s.size > 100


def test_profile_span_errors():
    traj, pick = ladder_pick(3)
    flow = rescaling.dilate(traj, pick)
    with pytest.raises(ExtentError):
        rescaling.rescaled_profile(flow, 0.0)
    # trusted region ends near unit-curvature distance 10.8 on this grid
    with pytest.raises(ExtentError):
        rescaling.rescaled_profile(flow, 20.0)


def test_profile_validation_rejects_malformed_arrays():
    s = np.array([0.0, 1.0, 2.0])
    rn = np.array([1.0, 0.8, 0.4])
    rescaling.RescaledProfile(s=s, Rn=rn, R0=2.0)
    with pytest.raises(DomainError):
        rescaling.RescaledProfile(s=s[:2], Rn=rn, R0=2.0)
    with pytest.raises(DomainError):
        rescaling.RescaledProfile(s=np.array([0.1, 1.0]), Rn=np.array([1.0, 0.5]), R0=2.0)
    with pytest.raises(DomainError):
        rescaling.RescaledProfile(s=np.array([0.0, 1.0]), Rn=np.array([0.9, 0.5]), R0=2.0)
    with pytest.raises(DomainError):
        rescaling.RescaledProfile(s=np.array([0.0, 2.0, 1.0]), Rn=rn, R0=2.0)
    with pytest.raises(DomainError):
        rescaling.RescaledProfile(s=np.array([0.0]), Rn=np.array([1.0]), R0=2.0)


def test_profile_distance_ladder_approaches_cigar():
    dists = []
    mins = []
    for j in range(1, 7):
        traj, pick = ladder_pick(j)
        flow = rescaling.dilate(traj, pick)
        dists.append(rescaling.profile_distance(flow, 3.0))
        mins.append(min(pick.alpha_j, pick.omega_j))
    expected = [8.175413e-1, 1.591337e-1, 2.053736e-3, 1.144657e-4, 1.146530e-4, 1.145182e-4]
    for got, want in zip(dists, expected):
        assert got == pytest.approx(want, rel=1e-2, abs=5e-7)
    # sup-norm noise on the far plateau sits near 2e-7; 1e-6 absorbs it
    assert all(b <= a + 1e-6 for a, b in zip(dists, dists[1:]))
    assert dists[-1] < 1e-3
    assert all(b >= a for a, b in zip(mins, mins[1:]))
    assert mins[0] < 1.0 and mins[-1] > 15.0


def test_solver_path_pick_matches_exact_magnitude():
    grid0 = exact.sample_grid(exact.rosenau(), -4.0, n=881, x_lo=-22.0, x_hi=22.0)
    traj = solver.evolve(
        grid0,
        -0.01,
        cfl=0.4,
        scheme=solver.SEMI_IMPLICIT,
        output_times=np.linspace(-4.0, -0.01, 65),
    )
    pick = rescaling.pick_point(traj, -4.0, rescaling.default_gamma(2), j=2)
    assert pick.t_j == pytest.approx(-1.7556, abs=1e-3)
    assert pick.x_j == pytest.approx(-13.2, abs=0.3)
    assert 2.0 * pick.M_j == pytest.approx(1.0 / math.tanh(-pick.t_j), abs=5e-4)
    dist = rescaling.profile_distance(rescaling.dilate(traj, pick), 3.0)
    assert 0.1 < dist < 0.2


def test_sphere_pick_forward_endpoint_stays_bounded():
    traj = sphere_trajectory()
    picks = [rescaling.pick_point(traj, T, 0.9) for T in (-4.0, -8.0)]
    for pick in picks:
        # omega = -t_j M_j pins the |t| R / 2 = 1/2 identity of the round family
        assert pick.omega_j == pytest.approx(0.5, abs=1e-3)
    assert picks[0].t_j == picks[1].t_j
    assert picks[1].alpha_j > 100.0


def test_sphere_profile_stays_far_from_cigar():
    traj = sphere_trajectory()
    pick = rescaling.pick_point(traj, -8.0, 0.9)
    dist = rescaling.profile_distance(rescaling.dilate(traj, pick), 2.0)
    assert dist == pytest.approx(0.5717, abs=0.02)
    assert dist > 0.5


def test_classifier_rejects_bad_t0():
    traj = classifier_rosenau_trajectory()
    with pytest.raises(DomainError):
        rescaling.classify_type(traj, t0=0.0)


def test_classifier_needs_enough_windows():
    times = np.linspace(-4.0, -1.0, 13)
    traj = solver.exact_trajectory(exact.rosenau(), times, n=401, x_lo=-22.0, x_hi=22.0)
    with pytest.raises(WindowError):
        rescaling.classify_type(traj)


def test_classifier_needs_coverage_up_to_t0():
    times = np.linspace(-64.0, -2.0, 63)
    traj = solver.exact_trajectory(exact.rosenau(), times, n=1001, x_lo=-77.0, x_hi=77.0)
    with pytest.raises(WindowError):
        rescaling.classify_type(traj, t0=-1.0)


def test_classifier_flags_diverging_growth():
    rep = rescaling.classify_type(classifier_rosenau_trajectory())
    assert rep.verdict == rescaling.DIVERGING
    assert rep.basis == rescaling.VERDICT_BASIS
    assert rep.t0 == -1.0
    windows = [T for T, _ in rep.samples]
    assert windows == [-2.0, -4.0, -8.0, -16.0, -32.0, -64.0]
    expected = [1.037521, 2.001740, 4.000796, 8.001589, 16.003175, 32.006395]
    for (_, got), want in zip(rep.samples, expected):
        assert got == pytest.approx(want, rel=1e-4)
    values = [s for _, s in rep.samples]
    for prev, nxt in zip(values[2:], values[3:]):
        assert nxt / prev >= 1.8


def test_classifier_keeps_round_family_bounded():
    times = np.linspace(-64.0, -1.0, 253)
    traj = solver.exact_trajectory(exact.sphere(), times, n=1201, extent=30.0)
    rep = rescaling.classify_type(traj)
    assert rep.verdict == rescaling.BOUNDED
    for _, s in rep.samples:
        assert s == pytest.approx(0.500043, abs=1e-3)
        assert 0.45 <= s <= 0.55


def test_classifier_keeps_flat_bounded():
    times = np.linspace(-64.0, -1.0, 65)
    traj = solver.exact_trajectory(exact.flat(), times, n=201, extent=10.0)
    rep = rescaling.classify_type(traj)
    assert rep.verdict == rescaling.BOUNDED
    assert all(s == 0.0 for _, s in rep.samples)


def test_classifier_is_scale_invariant():
    traj = classifier_rosenau_trajectory()
    rep = rescaling.classify_type(traj)
    lam = 2.0
    scaled = solver.FlowTrajectory(
        snapshots=tuple(
            ConformalGrid(g.chart, g.nodes.copy(), lam * g.u, lam * float(g.t))
            for g in traj.snapshots
        ),
        steps=(),
        scheme=solver.EXACT,
    )
    rep_scaled = rescaling.classify_type(scaled, t0=lam * rep.t0)
    assert rep_scaled.verdict == rep.verdict
    assert len(rep_scaled.samples) == len(rep.samples)
    for (T, s), (T_scaled, s_scaled) in zip(rep.samples, rep_scaled.samples):
        assert T_scaled == lam * T
        assert s_scaled == pytest.approx(s, rel=1e-4)


def test_backward_trajectory_validation_and_layout():
    with pytest.raises(DomainError):
        rescaling.backward_rosenau_trajectory(0)
    traj = rescaling.backward_rosenau_trajectory(1, h_target=0.5, snapshot_count=5)
    assert traj.grid0.n == 85
    assert traj.grid0.nodes[0] == -21.0
    assert len(traj.snapshots) == 5
    assert float(traj.times[0]) == -2.0
