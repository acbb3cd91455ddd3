import math
import subprocess
import sys

import numpy as np
import pytest

from fraclab.errors import NumericsError, ParameterError
from fraclab.exponents import ParamSet, SystemParamSet
from fraclab.fraclap import Field, SpaceGrid
from fraclab.fracops import TimeGrid, TimeSeries
from fraclab.solver import (
    BumpSpec,
    HistoryBuffer,
    SimConfig,
    default_space_grid,
    detect_blowup,
    nonlocal_source,
    run,
    run_system,
    tune_amplitude,
)

PARAMS = ParamSet(0.5, 0.3, 0.25, 0.5, 0.7, 2.0)
SYS_PARAMS = SystemParamSet(
    0.5, 0.3, 0.25, 0.5, 0.7,
    0.5, 0.3, 0.25, 0.5, 0.7,
    p=2.0, q=2.0,
)
GRID = SpaceGrid(1, 20.0, 128)


def cfg(amplitude, horizon=10.0, steps=2000, **kw):
    return SimConfig(PARAMS, GRID, TimeGrid(horizon, steps), BumpSpec(amplitude, 1.0), **kw)


def test_bump_spec():
    with pytest.raises(ParameterError):
        BumpSpec(1.0, 0.0)
    f = BumpSpec(3.0, 1.0).render(GRID)
    assert f.sup_norm() == 3.0
    assert f.values[np.argmin(np.abs(GRID.axis()))] == 3.0
    with pytest.raises(ParameterError):
        # support sticks out of the box
        BumpSpec(1.0, 4.0, center=15.0).render(GRID)


def test_bump_spec_2d():
    g = SpaceGrid(2, 8.0, 32)
    f = BumpSpec(2.0, 1.0, center=(1.0, -1.0)).render(g)
    assert f.values.shape == (32, 32)
    assert np.isclose(f.sup_norm(), 2.0)
    i = np.argmin(np.abs(g.axis() - 1.0))
    j = np.argmin(np.abs(g.axis() + 1.0))
    assert f.values[i, j] == 2.0


def test_default_space_grid():
    g = default_space_grid(1, BumpSpec(1.0, 0.5), 256)
    assert g.half_length == 10.0
    assert g.points == 256


def test_sim_config_validation():
    with pytest.raises(ParameterError):
        cfg(1.0, threshold=0.0)
    with pytest.raises(ParameterError):
        cfg(-1.0)
    # negative amplitudes are allowed once the hypothesis guard is off
    c = cfg(-1.0, theorem_mode=False)
    assert c.bump.amplitude == -1.0
    other = Field(SpaceGrid(1, 10.0, 128), np.zeros(128))
    with pytest.raises(ParameterError):
        cfg(1.0, u0=other)
    big = Field(GRID, np.full(128, 5.0))
    with pytest.raises(ParameterError):
        cfg(1.0, u0=big, threshold=2.0)


def test_run_rejects_mismatched_params():
    c = cfg(1.0)
    c.params = SYS_PARAMS
    with pytest.raises(ParameterError):
        run(c)
    c.params = PARAMS
    with pytest.raises(ParameterError):
        run_system(c)
    c2 = cfg(1.0)
    c2.params = ParamSet(0.5, 0.3, 0.25, 0.5, 0.7, 2.0, dim=2)
    with pytest.raises(ParameterError):
        run(c2)


def test_zero_data_is_fixed_point():
    r = run(cfg(0.0, horizon=1.0, steps=16))
    assert r.status == "Completed"
    assert r.steps_taken == 16
    assert np.array_equal(r.trace.values, np.zeros(17))


def test_history_buffer_growth():
    buf = HistoryBuffer(3, capacity=2)
    for i in range(9):
        buf.append(np.full(3, float(i)))
    assert len(buf) == 9
    assert buf.rows.shape[0] >= 9
    assert np.array_equal(buf.rows[:9, 0], np.arange(9.0))


def test_nonlocal_source_exact_on_constants():
    # I^{1-g} c^p = c^p t^{1-g} / Gamma(2-g), exact for the left-endpoint rule
    g = SpaceGrid(1, 4.0, 16)
    hist = [Field(g, np.full(16, 3.0)) for _ in range(9)]
    h = 0.125
    gamma = 0.25
    for idx in (1, 4, 8):
        out = nonlocal_source(hist, gamma, 2.0, idx, h)
        t = idx * h
        exact = 9.0 * t**0.75 / math.gamma(1.75)
        assert np.allclose(out.values, exact, rtol=1e-13)


def test_nonlocal_source_is_causal():
    g = SpaceGrid(1, 4.0, 16)
    base = [Field(g, np.full(16, 1.0)) for _ in range(6)]
    out1 = nonlocal_source(base, 0.3, 2.0, 4, 0.1)
    # changing states at and after the evaluation node must not matter
    base[4] = Field(g, np.full(16, 50.0))
    base[5] = Field(g, np.full(16, 50.0))
    out2 = nonlocal_source(base, 0.3, 2.0, 4, 0.1)
    assert np.array_equal(out1.values, out2.values)
    assert np.array_equal(nonlocal_source(base, 0.3, 2.0, 0, 0.1).values, np.zeros(16))


def test_nonlocal_source_validation():
    g = SpaceGrid(1, 4.0, 16)
    hist = [Field(g, np.ones(16))]
    with pytest.raises(ParameterError):
        nonlocal_source(hist, 0.3, 1.0, 1, 0.1)
    with pytest.raises(ParameterError):
        nonlocal_source(hist, 1.0, 2.0, 1, 0.1)
    with pytest.raises(ParameterError):
        nonlocal_source(hist, 0.3, 2.0, 5, 0.1)


def test_detect_blowup_interpolates():
    grid = TimeGrid(1.0, 2)
    t = detect_blowup(TimeSeries(grid, np.array([0.0, 5.0, 15.0])), 10.0)
    assert np.isclose(t, 0.75)
    assert detect_blowup(TimeSeries(grid, np.array([12.0, 5.0, 5.0])), 10.0) == 0.0
    assert detect_blowup(TimeSeries(grid, np.array([0.0, 1.0, 2.0])), 10.0) is None
    bad = TimeSeries(grid, np.array([0.0, np.inf, 2.0]), diverged=True)
    assert detect_blowup(bad, 10.0) == 0.5


def test_linear_runs_self_converge():
    finals = []
    for n in (64, 128, 256):
        c = cfg(1.0, horizon=1.0, steps=n, nonlinearity=False)
        finals.append(run(c).trace.values[-1])
    assert abs(finals[0] - finals[2]) > abs(finals[1] - finals[2])
    assert abs(finals[1] - finals[2]) < 1e-4


def test_growth_guard_trips_on_coarse_linear_step():
    u0 = Field(GRID, 1e-6 * BumpSpec(1.0, 1.0).render(GRID).values)
    c = cfg(1e3, horizon=1.0, steps=100, u0=u0, nonlinearity=False)
    with pytest.raises(NumericsError, match="reduce the time step"):
        run(c)


def test_blowup_time_monotone_in_amplitude():
    r8 = run(cfg(8.0))
    r16 = run(cfg(16.0))
    assert r8.status == "BlowUp" and r16.status == "BlowUp"
    assert r16.blowup_time < r8.blowup_time
    # trace is truncated at the stopping step
    assert r8.trace.grid.horizon < 10.0
    assert r8.trace.values[-1] >= 1e8
    assert r8.blowup_time < r8.trace.grid.horizon


def test_blowup_trace_is_finite_and_flagged_correctly():
    r = run(cfg(8.0))
    assert not r.trace.diverged
    assert np.all(np.isfinite(r.trace.values))


def test_snapshot_cadence():
    r = run(cfg(0.5, horizon=1.0, steps=20, snapshot_every=5))
    assert r.status == "Completed"
    times = [t for t, _ in r.snapshots]
    assert np.allclose(times, [0.0, 0.25, 0.5, 0.75, 1.0])
    r2 = run(cfg(16.0, snapshot_every=10**9))
    # blow-up appends the terminal state even off-cadence
    assert r2.status == "BlowUp"
    assert len(r2.snapshots) == 2
    assert np.isclose(r2.snapshots[-1][0], r2.trace.grid.horizon)


def test_diverged_run_is_reported_not_raised():
    c = cfg(1e160, threshold=1e300)
    with np.errstate(over="ignore", invalid="ignore"):
        r = run(c)
    assert r.status == "Diverged"
    assert r.trace.diverged
    assert r.blowup_time == r.trace.grid.horizon


def test_far_too_coarse_step_raises():
    c = cfg(1e6, horizon=1.0, steps=2, threshold=1.0)
    with pytest.raises(NumericsError, match="too coarse"):
        run(c)


def test_symmetric_system_reduces_to_scalar():
    c = SimConfig(SYS_PARAMS, GRID, TimeGrid(10.0, 2000), BumpSpec(8.0, 1.0))
    ru, rv = run_system(c)
    assert ru.status == rv.status == "BlowUp"
    assert ru.blowup_time == rv.blowup_time
    assert np.array_equal(ru.trace.values, rv.trace.values)
    rs = run(cfg(8.0))
    assert np.array_equal(rs.trace.values, ru.trace.values)
    assert rs.blowup_time == ru.blowup_time


def test_asymmetric_system_components_differ():
    sp = SystemParamSet(
        0.5, 0.3, 0.25, 0.5, 0.7,
        0.6, 0.4, 0.2, 0.4, 0.8,
        p=2.0, q=3.0,
    )
    c = SimConfig(
        sp, GRID, TimeGrid(1.0, 200), BumpSpec(0.5, 1.0),
        bump2=BumpSpec(0.25, 1.0),
    )
    ru, rv = run_system(c)
    assert ru.status == rv.status == "Completed"
    assert not np.array_equal(ru.trace.values, rv.trace.values)
    assert ru.trace.values[-1] != rv.trace.values[-1]


def test_tune_amplitude_doubles_until_blowup():
    base = cfg(0.25, horizon=6.0, steps=1200)
    amp, r = tune_amplitude(base, 0.25)
    assert amp == 1.0
    assert r.status == "BlowUp"
    with pytest.raises(ParameterError):
        tune_amplitude(base, 0.0)
    linear = cfg(1.0, horizon=1.0, steps=200, nonlinearity=False)
    with pytest.raises(NumericsError, match="no blow-up"):
        tune_amplitude(linear, 1.0, max_doublings=2)


def test_numpy_backend_matches_numba():
    # same run in a subprocess forced onto the pure-numpy kernels
    code = (
        "from fraclab.exponents import ParamSet\n"
        "from fraclab.fraclap import SpaceGrid\n"
        "from fraclab.fracops import TimeGrid\n"
        "from fraclab.solver import BumpSpec, SimConfig, run\n"
        "p = ParamSet(0.5, 0.3, 0.25, 0.5, 0.7, 2.0)\n"
        "c = SimConfig(p, SpaceGrid(1, 20.0, 128), TimeGrid(10.0, 2000), BumpSpec(8.0, 1.0))\n"
        "r = run(c)\n"
        "print(repr(float(r.blowup_time)), r.trace.values[-1].hex())\n"
    )
    out = subprocess.run(
        [sys.executable, "-c", code],
        capture_output=True, text=True, check=True,
        env={"PATH": "/usr/bin:/bin", "FRACLAB_BACKEND": "numpy"},
    )
    t_star_s, final_hex = out.stdout.split()
    r = run(cfg(8.0))
    # backends differ only in summation order: a few ulps at most
    assert np.isclose(float(t_star_s), r.blowup_time, rtol=1e-12, atol=0.0)
    assert np.isclose(float.fromhex(final_hex), r.trace.values[-1], rtol=1e-9, atol=0.0)
