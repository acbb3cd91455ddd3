r"""IMEX spectral time stepper for the damped fractional wave problem.

The second-order-in-time equation is advanced as the first-order pair

.. math::

    u_t = v, \qquad
    D^{a_1}_{0|t} v = -(-\Delta)^\sigma u - (-\Delta)^\delta I^{1-a_2}_{0|t} v
                      + I^{1-\gamma}_{0|t} |u|^p,

which is equivalent to the original problem because the composite
derivative of order 1+a_1 acts as D^{a_1} on u_t and the damping
derivative of order a_2 acts as I^{1-a_2} on u_t.  Per Fourier mode the
update treats the current-step weight of every memory operator and the
diffusion term implicitly (a scalar 2x2 solve folded into one division),
with all history sums and the nonlinear source explicit.  The linear
update is then unconditionally stable mode by mode: every coefficient in
the implicit denominator is nonnegative.

History sums are the runtime hot spot and run through the dispatch kernels
in ``_kernels`` (numba loops or sliced BLAS, selected by
``FRACLAB_BACKEND``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import NumericsError, ParameterError
from .exponents import ParamSet, SystemParamSet
from .fraclap import Field, SpaceGrid
from .fracops import TimeGrid, TimeSeries, l1_weights, rect_weights
from .testfn import bump_profile


@dataclass(frozen=True)
class BumpSpec:
    """Initial-velocity profile: amplitude * psi(|x - center| / width).

    The canonical bump has support radius 2, so the support radius here is
    ``2 * width``.  Nonnegative amplitudes keep the velocity admissible
    for the blow-up theorems.
    """

    amplitude: float
    width: float
    center: float = 0.0

    def __post_init__(self):
        if self.width <= 0.0:
            raise ParameterError(f"width must be positive, got {self.width}")

    def render(self, grid: SpaceGrid) -> Field:
        x = grid.axis()
        if grid.dim == 1:
            dist = np.abs(x - self.center)
        else:
            c = self.center if isinstance(self.center, tuple) else (self.center,) * 2
            dist = np.hypot(x[:, None] - c[0], x[None, :] - c[1])
        if np.max(np.abs(np.atleast_1d(self.center))) + 2.0 * self.width > grid.half_length:
            raise ParameterError("bump support does not fit inside the box")
        return Field(grid, self.amplitude * bump_profile(dist / self.width))


def default_space_grid(dim: int, bump: BumpSpec, points: int) -> SpaceGrid:
    """Box sized so wrap-around stays negligible: half-length 20x bump width."""
    return SpaceGrid(dim, 20.0 * bump.width, points)


@dataclass
class SimConfig:
    """Everything one run needs.

    ``bump`` is the initial velocity; ``u0`` (default zero, as the blow-up
    results assume) the initial datum.  ``bump2``/``v0`` are the second
    component's data and are only read by :func:`run_system`.
    ``theorem_mode`` enforces the nonnegative-velocity hypothesis.
    ``snapshot_every`` > 0 stores every k-th state for post-hoc analysis.
    """

    params: object
    space: SpaceGrid
    time: TimeGrid
    bump: BumpSpec
    bump2: BumpSpec | None = None
    u0: Field | None = None
    v0_init: Field | None = None
    threshold: float = 1e8
    nonlinearity: bool = True
    theorem_mode: bool = True
    snapshot_every: int = 0

    def __post_init__(self):
        if self.threshold <= 0.0:
            raise ParameterError(f"threshold must be positive, got {self.threshold}")
        if self.theorem_mode and self.bump.amplitude < 0.0:
            raise ParameterError(
                "theorem mode requires a nonnegative initial velocity"
            )
        if self.u0 is not None:
            if self.u0.grid != self.space:
                raise ParameterError("u0 lives on a different grid")
            if self.u0.sup_norm() >= self.threshold:
                raise ParameterError("threshold must exceed the initial sup-norm")


@dataclass
class SimResult:
    """Outcome of a run.

    ``status`` is Completed, BlowUp, or Diverged.  ``blowup_time`` holds
    the linearly interpolated threshold crossing for BlowUp and the first
    non-finite node for Diverged.  The sup-norm trace is truncated at the
    stopping step, so its grid covers [0, t_stop].
    """

    trace: TimeSeries
    status: str
    blowup_time: float | None = None
    snapshots: list | None = None
    steps_taken: int = 0


class HistoryBuffer:
    """Append-only per-step rows (the memory of the nonlocal operators).

    Grows by doubling so short runs over long horizons never allocate the
    full-horizon buffer.
    """

    def __init__(self, width: int, dtype=np.float64, capacity: int = 1024):
        self._rows = np.zeros((capacity, width), dtype=dtype)
        self._count = 0

    def __len__(self) -> int:
        return self._count

    @property
    def rows(self) -> np.ndarray:
        return self._rows

    def append(self, row: np.ndarray):
        if self._count == self._rows.shape[0]:
            grown = np.zeros(
                (2 * self._rows.shape[0], self._rows.shape[1]), dtype=self._rows.dtype
            )
            grown[: self._count] = self._rows
            self._rows = grown
        self._rows[self._count] = row
        self._count += 1


def nonlocal_source(history, gamma, p: float, t_index: int, h: float) -> Field:
    """I^{1-gamma} |u|^p at node ``t_index`` from the stored past states.

    Product-rectangle quadrature with left-endpoint panel density, so only
    states strictly before ``t_index`` enter; exact for states constant in
    time.
    """
    gamma = float(gamma)
    if p <= 1.0:
        raise ParameterError(f"power must exceed 1, got {p}")
    if not (0.0 < gamma < 1.0):
        raise ParameterError(f"gamma must lie in (0,1), got {gamma}")
    if t_index < 0 or t_index > len(history):
        raise ParameterError(f"need history through node {t_index - 1}")
    grid = history[0].grid
    mu = 1.0 - gamma
    coeff = h**mu / math.gamma(mu + 1.0)
    w = rect_weights(mu, t_index + 1)
    acc = np.zeros(grid.shape())
    for k in range(t_index):
        acc += w[t_index - k] * np.abs(history[k].values) ** p
    return Field(grid, coeff * acc)


def _mode_layout(grid: SpaceGrid):
    # rfft layout: squared wavenumbers flattened, plus transform closures
    m = grid.points
    if grid.dim == 1:
        kr = 2.0 * math.pi * np.fft.rfftfreq(m, d=grid.spacing)
        k2 = kr**2
        shape = k2.shape
        fwd = np.fft.rfft
        inv = lambda a: np.fft.irfft(a, n=m)
    else:
        kx = 2.0 * math.pi * np.fft.fftfreq(m, d=grid.spacing)
        ky = 2.0 * math.pi * np.fft.rfftfreq(m, d=grid.spacing)
        k2 = kx[:, None] ** 2 + ky[None, :] ** 2
        shape = k2.shape
        fwd = np.fft.rfftn
        inv = lambda a: np.fft.irfftn(a, s=(m, m))
    return k2.ravel(), shape, fwd, inv


class _Channel:
    """One component of the first-order system, advanced in mode space."""

    def __init__(self, space, time, alpha1, alpha2, sigma, delta,
                 src_gamma, store_power, u0_vals, v0_vals):
        self.space = space
        self.h = time.h
        n = time.steps
        self.n = n
        k2, self.mode_shape, self.fwd, self.inv = _mode_layout(space)
        self.c1 = self.h ** (-alpha1) / math.gamma(2.0 - alpha1)
        self.q2 = self.h ** (1.0 - alpha2) / math.gamma(2.0 - alpha2)
        self.cg = self.h ** (1.0 - src_gamma) / math.gamma(2.0 - src_gamma)
        self.lsig = k2**sigma
        self.ldel = k2**delta
        self.denom = self.c1 + 0.5 * self.q2 * self.ldel + 0.5 * self.h * self.lsig
        # weights pre-reversed: wb[n - m] = b_m, so per-step slices are contiguous
        self.wb = l1_weights(alpha1, n + 1)[::-1].copy()
        self.ww = rect_weights(1.0 - alpha2, n + 1)[::-1].copy()
        self.wg = rect_weights(1.0 - src_gamma, n + 1)[::-1].copy()
        self.store_power = store_power
        k = k2.shape[0]
        self.uhat = self.fwd(u0_vals).ravel().astype(np.complex128)
        self.vhat = self.fwd(v0_vals).ravel().astype(np.complex128)
        self.dv = HistoryBuffer(k, np.complex128)
        self.dv.append(np.zeros(k, dtype=np.complex128))  # slot 0: alignment
        self.pv = HistoryBuffer(k, np.complex128)
        self.fpow = HistoryBuffer(u0_vals.size)
        self.fpow.append(np.abs(u0_vals.ravel()) ** store_power)

    def step(self, j: int, src_hat) -> np.ndarray:
        hist1 = _kernels.hist_dot_complex(self.wb, self.n - j, self.dv.rows, 1, j)
        hist2 = _kernels.hist_dot_complex(self.ww, self.n - j, self.pv.rows, 0, j - 1)
        rhs = (
            self.c1 * self.vhat
            - self.c1 * hist1
            - self.ldel * self.q2 * (0.5 * self.vhat + hist2)
            - self.lsig * (self.uhat + 0.5 * self.h * self.vhat)
        )
        if src_hat is not None:
            rhs = rhs + src_hat
        vnew = rhs / self.denom
        self.uhat = self.uhat + 0.5 * self.h * (vnew + self.vhat)
        self.dv.append(vnew - self.vhat)
        self.pv.append(0.5 * (vnew + self.vhat))
        self.vhat = vnew
        u = self.inv(self.uhat.reshape(self.mode_shape))
        self.fpow.append(np.abs(u.ravel()) ** self.store_power)
        return u


def detect_blowup(trace: TimeSeries, threshold: float):
    """First threshold crossing of a sup-norm trace, linearly interpolated.

    A non-finite entry counts as a crossing at its own node.  Returns None
    when the trace stays finite and below threshold throughout.
    """
    vals = trace.values
    t = trace.grid.nodes()
    for j, v in enumerate(vals):
        if not np.isfinite(v):
            return float(t[j])
        if v >= threshold:
            if j == 0:
                return 0.0
            a, b = vals[j - 1], v
            frac = (threshold - a) / (b - a) if b > a else 1.0
            return float(t[j - 1] + frac * trace.grid.h)
    return None


def _zero_vals(space: SpaceGrid):
    return np.zeros(space.shape())


def _finish(h, trace, j, status, t_star, snaps, diverged=False):
    if j < 2:
        raise NumericsError(
            "run ended before step 2; the step size is far too coarse for "
            "these data (reduce h or the amplitude)"
        )
    ts = TimeSeries(TimeGrid(h * j, j), trace[: j + 1].copy(), diverged=diverged)
    return SimResult(ts, status, t_star, snaps, j)


def run(config: SimConfig) -> SimResult:
    """Advance the scalar problem; stop at blow-up, divergence, or horizon.

    Zero data is preserved exactly (every update is a linear combination
    of zeros).  With the nonlinearity off, a per-step sup-norm growth
    beyond 10x trips a step-size error: the implicit linear update is
    dissipative mode by mode, so such growth can only mean the time step
    is too coarse for the data.
    """
    if not isinstance(config.params, ParamSet):
        raise ParameterError("run() needs a scalar ParamSet")
    pr = config.params
    if pr.dim != config.space.dim:
        raise ParameterError("params.dim and space.dim disagree")
    space, time = config.space, config.time
    u0 = config.u0.values if config.u0 is not None else _zero_vals(space)
    v0 = config.bump.render(space).values
    ch = _Channel(
        space, time, pr.alpha1, pr.alpha2, pr.sigma, pr.delta,
        pr.gamma, pr.p, u0, v0,
    )
    n = time.steps
    h = time.h
    trace = np.zeros(n + 1)
    trace[0] = float(np.max(np.abs(u0)))
    snaps = None
    if config.snapshot_every > 0:
        snaps = [(0.0, Field(space, u0.copy()))]
    prev = trace[0]
    for j in range(1, n + 1):
        if config.nonlinearity:
            raw = ch.cg * _kernels.hist_dot_real(ch.wg, n - j, ch.fpow.rows, 0, j)
            src = ch.fwd(raw.reshape(space.shape())).ravel()
        else:
            src = None
        u = ch.step(j, src)
        sup = float(np.max(np.abs(u)))
        trace[j] = sup
        if not np.isfinite(sup):
            return _finish(h, trace, j, "Diverged", h * j, snaps, diverged=True)
        if sup >= config.threshold:
            a = trace[j - 1]
            frac = (config.threshold - a) / (sup - a) if sup > a else 1.0
            t_star = h * (j - 1) + frac * h
            if snaps is not None:
                snaps.append((h * j, Field(space, u.copy())))
            return _finish(h, trace, j, "BlowUp", t_star, snaps)
        if not config.nonlinearity and prev > 0.0 and sup > 10.0 * prev:
            raise NumericsError(
                f"sup-norm grew {sup / prev:.2f}x in one linear step at t={h * j:.3g}; "
                "reduce the time step"
            )
        if snaps is not None and j % config.snapshot_every == 0:
            snaps.append((h * j, Field(space, u.copy())))
        prev = sup
    return SimResult(TimeSeries(time, trace), "Completed", None, snaps, n)


def run_system(config: SimConfig):
    """Advance the cross-coupled pair; the components stop together.

    Sources are I^{1-gamma1}|v|^p for the first component and
    I^{1-gamma2}|u|^q for the second.  If either sup-norm crosses the
    threshold both results report BlowUp at the same interpolated time.
    """
    if not isinstance(config.params, SystemParamSet):
        raise ParameterError("run_system() needs a SystemParamSet")
    pr = config.params
    if pr.dim != config.space.dim:
        raise ParameterError("params.dim and space.dim disagree")
    space, time = config.space, config.time
    bump2 = config.bump2 if config.bump2 is not None else config.bump
    if config.theorem_mode and bump2.amplitude < 0.0:
        raise ParameterError("theorem mode requires nonnegative initial velocities")
    u0 = config.u0.values if config.u0 is not None else _zero_vals(space)
    w0 = config.v0_init.values if config.v0_init is not None else _zero_vals(space)
    ch_u = _Channel(
        space, time, pr.alpha1, pr.alpha2, pr.sigma1, pr.delta1,
        pr.gamma1, pr.q, u0, config.bump.render(space).values,
    )
    ch_v = _Channel(
        space, time, pr.beta1, pr.beta2, pr.sigma2, pr.delta2,
        pr.gamma2, pr.p, w0, bump2.render(space).values,
    )
    n, h = time.steps, time.h
    tr_u = np.zeros(n + 1)
    tr_v = np.zeros(n + 1)
    tr_u[0] = float(np.max(np.abs(u0)))
    tr_v[0] = float(np.max(np.abs(w0)))
    for j in range(1, n + 1):
        if config.nonlinearity:
            raw_u = ch_u.cg * _kernels.hist_dot_real(ch_u.wg, n - j, ch_v.fpow.rows, 0, j)
            raw_v = ch_v.cg * _kernels.hist_dot_real(ch_v.wg, n - j, ch_u.fpow.rows, 0, j)
            src_u = ch_u.fwd(raw_u.reshape(space.shape())).ravel()
            src_v = ch_v.fwd(raw_v.reshape(space.shape())).ravel()
        else:
            src_u = src_v = None
        uu = ch_u.step(j, src_u)
        vv = ch_v.step(j, src_v)
        tr_u[j] = float(np.max(np.abs(uu)))
        tr_v[j] = float(np.max(np.abs(vv)))
        bad = not (np.isfinite(tr_u[j]) and np.isfinite(tr_v[j]))
        if bad:
            ru = _finish(h, tr_u, j, "Diverged", h * j, None, True)
            rv = _finish(h, tr_v, j, "Diverged", h * j, None, True)
            return ru, rv
        hit_u = tr_u[j] >= config.threshold
        hit_v = tr_v[j] >= config.threshold
        if hit_u or hit_v:
            tr, hit_j = (tr_u, j) if hit_u else (tr_v, j)
            a = tr[hit_j - 1]
            frac = (config.threshold - a) / (tr[hit_j] - a) if tr[hit_j] > a else 1.0
            t_star = h * (hit_j - 1) + frac * h
            ru = _finish(h, tr_u, j, "BlowUp", t_star, None)
            rv = _finish(h, tr_v, j, "BlowUp", t_star, None)
            return ru, rv
    ru = SimResult(TimeSeries(time, tr_u), "Completed", None, None, n)
    rv = SimResult(TimeSeries(time, tr_v), "Completed", None, None, n)
    return ru, rv


def tune_amplitude(config: SimConfig, start: float, max_doublings: int = 12):
    """Double the velocity amplitude until the run reports blow-up.

    Returns (amplitude, result) for the first amplitude that blows up
    within the horizon.  This is an experiment policy, not a statement
    about the threshold: with an admissible power every amplitude blows up
    eventually, but possibly beyond any affordable horizon.
    """
    if start <= 0.0:
        raise ParameterError(f"starting amplitude must be positive, got {start}")
    amp = start
    for _ in range(max_doublings):
        cfg = SimConfig(
            params=config.params,
            space=config.space,
            time=config.time,
            bump=BumpSpec(amp, config.bump.width, config.bump.center),
            threshold=config.threshold,
            nonlinearity=config.nonlinearity,
            theorem_mode=config.theorem_mode,
            snapshot_every=config.snapshot_every,
        )
        result = run(cfg)
        if result.status == "BlowUp":
            return amp, result
        amp *= 2.0
    raise NumericsError(
        f"no blow-up detected after {max_doublings} doublings from {start}"
    )
