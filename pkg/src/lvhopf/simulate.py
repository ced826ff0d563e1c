"""Direct integration of the delayed model and oscillation diagnostics.

Two discretisations are provided:

``simulate_chain``
    Erlang kernels only.  The convolution against an Erlang(k) density is
    the output of ``k`` cascaded first-order filters with rate ``k/E``, so the
    delayed system becomes an ODE of dimension ``3 + 2k``.
``simulate_convolution``
    Any kernel.  The solution is stored on the step grid and the delayed
    averages are evaluated by trapezoid quadrature over the stored history
    (Dirac kernels read the interpolated history at lag ``E``).

Both use classic fixed-step RK4.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _integrators as _ig
from .errors import BlowUp, ConfigError, NotErlang, StepTooCoarse, TooShort
from .kernels import DelayKernel, quadrature_weights, support_bound
from .model import Equilibrium, ModelParams, compute_equilibrium

BLOWUP_LIMIT = 1e6
HISTORIES = ("constant", "perturbed")
METHODS = ("chain", "convolution")


@dataclass(frozen=True)
class SimConfig:
    t_end: float = 200.0
    dt: float = 1e-3
    method: str = "convolution"
    history: str = "perturbed"
    rho: float = 1e-3
    truncation_epsilon: float = 1e-10
    transient_fraction: float = 0.5
    output_stride: int = 10

    def __post_init__(self):
        if not self.dt > 0:
            raise ConfigError(f"dt must be positive, got {self.dt}")
        if not self.t_end > 0:
            raise ConfigError(f"t_end must be positive, got {self.t_end}")
        if self.method not in METHODS:
            raise ConfigError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.history not in HISTORIES:
            raise ConfigError(f"history must be one of {HISTORIES}, got {self.history!r}")
        if not 0 < self.transient_fraction < 1:
            raise ConfigError("transient_fraction must lie in (0, 1)")
        if not 0 < self.truncation_epsilon < 1:
            raise ConfigError("truncation_epsilon must lie in (0, 1)")
        if self.output_stride < 1:
            raise ConfigError("output_stride must be >= 1")

    @property
    def nsteps(self) -> int:
        return int(round(self.t_end / self.dt))

    def history_label(self) -> str:
        if self.history == "constant":
            return "constant at equilibrium"
        return f"constant at equilibrium, x3(0) scaled by (1 + {self.rho:.17g})"


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0]) if len(self.times) > 1 else 0.0


@dataclass(frozen=True)
class CycleMetrics:
    amplitude: np.ndarray
    period: float | None
    decaying: bool
    period_rel_err_bound: float | None
    n_peaks: int = 0


def initial_state(eq: Equilibrium, config: SimConfig) -> np.ndarray:
    x0 = eq.as_array()
    if config.history == "perturbed":
        x0[2] *= 1.0 + config.rho
    return x0


def _finish(times, states, n_done, status, what):
    traj = Trajectory(times[: n_done + 1], states[: n_done + 1])
    if status == 1:
        raise BlowUp(f"{what}: state left |x| <= {BLOWUP_LIMIT:g} at t={traj.times[-1]:.6g}", traj)
    if status == 2:
        raise BlowUp(f"{what}: a population became non-positive at t={traj.times[-1]:.6g}", traj)
    return traj


def simulate_chain(params: ModelParams, kernel: DelayKernel, config: SimConfig) -> Trajectory:
    """Integrate the linear-chain reduction for an Erlang(k) kernel."""
    if kernel.family != "erlang":
        raise NotErlang(f"linear chain needs an Erlang kernel, got {kernel.family}")
    if kernel.expectation <= 0:
        raise NotErlang("linear chain needs E > 0")
    eq = compute_equilibrium(params)
    k = kernel.shape
    x0 = initial_state(eq, config)
    s0 = np.concatenate([x0, np.full(k, eq.x1), np.full(k, eq.x2)])
    n = config.nsteps
    states, n_done, status = _ig.rk4_chain(
        s0, params.a, params.H, k, k / kernel.expectation, config.dt, n, BLOWUP_LIMIT
    )
    times = config.dt * np.arange(n + 1)
    return _finish(times, states, n_done, status, "chain simulation")


def _run_history(params, x0, hist, mode, w, lag, m0, config):
    n = config.nsteps
    X = np.empty((3, m0 + n + 1))
    X[:, : m0 + 1] = np.asarray(hist, dtype=float)[:, None]
    X[:, m0] = x0
    n_done, status = _ig.rk4_history(
        X[0], X[1], X[2], m0, params.a, params.H, mode, w, lag, config.dt, n, BLOWUP_LIMIT
    )
    times = config.dt * np.arange(n + 1)
    return times, X[:, m0:].T.copy(), n_done, status


def simulate_convolution(params: ModelParams, kernel: DelayKernel, config: SimConfig) -> Trajectory:
    """Integrate the delayed system with the history convolution done by quadrature."""
    eq = compute_equilibrium(params)
    E = kernel.expectation
    dt = config.dt
    if E > 0 and config.t_end <= support_bound(kernel, config.truncation_epsilon):
        raise ConfigError(
            f"t_end={config.t_end} must exceed the kernel support bound "
            f"{support_bound(kernel, config.truncation_epsilon):.6g}"
        )
    if E == 0.0:
        mode, w, lag, m0 = _ig.MODE_INSTANT, np.ones(1), 0.0, 0
    elif kernel.family == "dirac":
        if dt > E / 20:
            raise StepTooCoarse(f"dt={dt} > E/20={E / 20:.6g}: lag under-resolved")
        mode, w, lag, m0 = _ig.MODE_LAG, np.ones(1), E, int(math.ceil(E / dt)) + 2
    else:
        w = quadrature_weights(kernel, dt, config.truncation_epsilon)
        mode, lag, m0 = _ig.MODE_QUADRATURE, 0.0, len(w) - 1
    times, states, n_done, status = _run_history(
        params, initial_state(eq, config), eq.as_array(), mode, w, lag, m0, config
    )
    return _finish(times, states, n_done, status, "convolution simulation")


def simulate(params: ModelParams, kernel: DelayKernel, config: SimConfig) -> Trajectory:
    if config.method == "chain":
        return simulate_chain(params, kernel, config)
    return simulate_convolution(params, kernel, config)


def integrate_no_delay(params: ModelParams, x0, dt: float, t_end: float) -> Trajectory:
    """RK4 for the system without delay, started from ``x0``."""
    config = SimConfig(t_end=t_end, dt=dt)
    x0 = np.asarray(x0, dtype=float)
    times, states, n_done, status = _run_history(
        params, x0, x0, _ig.MODE_INSTANT, np.ones(1), 0.0, 0, config
    )
    return _finish(times, states, n_done, status, "no-delay integration")


# ---------------------------------------------------------------------------
# diagnostics


def _refined_peaks(t, y):
    """Local maxima of ``y`` refined by a parabola through the three samples."""
    i = np.flatnonzero((y[1:-1] > y[:-2]) & (y[1:-1] >= y[2:])) + 1
    if i.size == 0:
        return np.empty(0), np.empty(0)
    ym, y0, yp = y[i - 1], y[i], y[i + 1]
    denom = ym - 2.0 * y0 + yp
    safe = np.where(denom == 0.0, 1.0, denom)
    off = np.where(denom == 0.0, 0.0, 0.5 * (ym - yp) / safe)
    h = t[1] - t[0]
    return t[i] + off * h, y0 - 0.25 * (ym - yp) * off


def limit_cycle_metrics(
    traj: Trajectory, eq: Equilibrium, config: SimConfig | None = None, transient_fraction: float | None = None
) -> CycleMetrics:
    """Amplitude, period and decay verdict on the post-transient part of ``traj``.

    Peaks are taken on ``x3``.  A period is reported only when there are at
    least four peaks whose spacings agree to within 5%.  ``decaying`` means
    every peak height above ``x3*`` is at most 98% of the previous one; a
    signal without oscillation counts as decaying.
    """
    if transient_fraction is None:
        transient_fraction = config.transient_fraction if config else 0.5
    n = len(traj.times)
    start = int(math.floor(transient_fraction * (n - 1)))
    if n - start < 3:
        raise TooShort(f"only {n - start} samples after the transient")
    t = traj.times[start:]
    seg = traj.states[start:]
    amp = 0.5 * (seg.max(axis=0) - seg.min(axis=0))
    if amp[2] < 1e-12:
        return CycleMetrics(amp, None, True, None, 0)

    tp, yp = _refined_peaks(t, seg[:, 2])
    period = err = None
    if tp.size >= 4:
        s = np.diff(tp)
        if (s.max() - s.min()) / s.mean() < 0.05:
            period = float(s.mean())
            err = float((s.max() - s.min()) / (2 * s.mean()) + traj.dt / s.mean())
    heights = yp - eq.x3
    if heights.size < 2:
        decaying = True
    else:
        decaying = bool(np.all(heights[1:] <= 0.98 * heights[:-1]))
    return CycleMetrics(amp, period, decaying, err, int(tp.size))


def empirical_growth_rate(
    traj: Trajectory,
    eq: Equilibrium,
    t_start: float = 0.0,
    t_stop: float | None = None,
    floor: float = 1e-11,
    ceiling: float = 1e-2,
) -> float:
    """Exponential rate of the deviation from ``eq``, from the peaks of its log-square.

    The squared distance to the equilibrium is sampled at its local maxima in
    ``[t_start, t_stop]`` (restricted to deviations between ``floor`` and
    ``ceiling``, the linear regime) and a straight line is fitted to the
    logarithm.  Half the slope is the growth rate.
    """
    t = traj.times
    d2 = np.sum((traj.states - eq.as_array()) ** 2, axis=1)
    mask = (t >= t_start) & (t <= (t[-1] if t_stop is None else t_stop))
    tp, dp = _refined_peaks(t[mask], d2[mask])
    keep = (dp > floor**2) & (dp < ceiling**2)
    if keep.sum() < 3:
        raise TooShort("fewer than three deviation peaks in the linear regime")
    slope = np.polyfit(tp[keep], np.log(dp[keep]), 1)[0]
    return 0.5 * float(slope)
