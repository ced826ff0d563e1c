"""End-to-end checks tying the analytic predictions to independent oracles
and to simulation.

Each ``criterion_*`` function returns a :class:`CriterionResult`.  They share a
:class:`ValidationContext` that caches the expensive pieces (critical
expectations).  ``run_all`` is what ``lvhopf validate`` executes.
"""
from __future__ import annotations

import filecmp
import math
import tempfile
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import spectral as sp
from .config import RunConfig
from .contour import Rectangle
from .errors import LVHopfError
from .kernels import DelayKernel, support_bound
from .model import (
    ModelParams,
    check_feasibility,
    compute_equilibrium,
    harvest_threshold,
    jacobian_no_delay,
    linear_coeffs,
    rhs_no_delay,
)
from .simulate import (
    SimConfig,
    empirical_growth_rate,
    initial_state,
    integrate_no_delay,
    limit_cycle_metrics,
    simulate,
    simulate_chain,
    simulate_convolution,
)

CSV_NAMES = ("analysis.csv", "scan.csv", "trajectory.csv", "metrics.csv")


@dataclass
class CriterionResult:
    number: int
    title: str
    status: str  # "pass", "fail" or "skip"
    detail: str = ""

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def line(self) -> str:
        return f"[{self.status.upper()}] {self.number:2d}. {self.title}: {self.detail}"


@dataclass
class ValidationContext:
    config: RunConfig = field(default_factory=RunConfig)
    _hopf: dict = field(default_factory=dict, repr=False)

    @property
    def params(self) -> ModelParams:
        return self.config.model

    @property
    def eq(self):
        return compute_equilibrium(self.params)

    @property
    def coeffs(self):
        return linear_coeffs(self.params, self.eq)

    @property
    def family(self) -> str:
        return self.config.kernel.family

    @property
    def shape(self) -> int:
        return self.config.kernel.shape

    def hopf(self, family: str, shape: int = 1) -> sp.HopfPoint:
        key = (family, shape)
        if key not in self._hopf:
            self._hopf[key] = sp.critical_expectation(self.coeffs, family, shape)
        return self._hopf[key]

    def mu(self, kernel: DelayKernel) -> complex:
        return sp.rightmost_root(self.coeffs, kernel).lam


TITLES = {
    1: "equilibrium residual on 10x10 (a, H) grid",
    2: "Jacobian char. polynomial = (a1, a2+a4, a3+a5)",
    3: "a3^2 > a5^2, Schwartz envelope, Dirac saturation",
    4: "omega0: G(omega0) = envelope; closed form = bisection",
    5: "omega1 in (0, omega0] with F = G; Dirac omega1 = omega0",
    6: "solve for (C, S) and back-substitute",
    7: "E_crit >= E1 lower bound (Dirac, Erlang k=1,2,3)",
    8: "Erlang k=1,2,3: rightmost root and counts vs polynomial reduction",
    9: "E=0 rightmost root = rightmost Jacobian eigenvalue",
    10: "transversality: analytic slope = secant slope, nonzero",
    11: "Erlang(2) chain vs convolution, t in [0,50], dt=1e-3",
    12: "Hopf witness: decay at 0.9 E_crit, oscillation at 1.1 E_crit, growth rates",
    13: "E=0 simulation = no-delay ODE; constant history is stationary",
    14: "CSV outputs byte-identical across repeated runs",
}


def feasible_grid(n: int = 10):
    """``n x n`` feasible (a, H) pairs: a in [3.5, 6], H in [0, 0.9 H_threshold(a)]."""
    for a in np.linspace(3.5, 6.0, n):
        for H in np.linspace(0.0, 0.9 * harvest_threshold(a), n):
            yield ModelParams(float(a), float(H))


def charpoly_faddeev(M: np.ndarray) -> np.ndarray:
    """Characteristic polynomial coefficients (monic, highest first) by Faddeev-LeVerrier."""
    n = M.shape[0]
    coeffs = [1.0]
    B = np.eye(n)
    for k in range(1, n + 1):
        AB = M @ B
        c = -np.trace(AB) / k
        coeffs.append(c)
        B = AB + c * np.eye(n)
    return np.array(coeffs)


def omega0_bisection(coeffs) -> float:
    """Largest positive root of the omega0 cubic by scan + bisection (closed-form free)."""
    p = sp.omega0_cubic(coeffs)

    def P(z):
        return np.polyval(p, z)

    Z = 1.0 + np.max(np.abs(p[1:]))  # Cauchy bound
    z = np.linspace(0.0, Z, 20001)
    v = P(z)
    i = int(np.flatnonzero(v <= 0)[-1])
    lo, hi = z[i], z[i + 1]
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if P(mid) <= 0:
            lo = mid
        else:
            hi = mid
    return math.sqrt(0.5 * (lo + hi))


def erlang_polynomial(coeffs, k: int, E: float) -> np.poly1d:
    """``(1 + l E/k)^k (l^3 + a1 l^2 + a2 l + a5) + a3 + a4 l``: same roots as the Erlang quasi-polynomial."""
    c = coeffs
    return np.poly1d([1.0, c.a1, c.a2, c.a5]) * np.poly1d([E / k, 1.0]) ** k + np.poly1d([c.a4, c.a3])


def upper_representative(z: complex) -> complex:
    return z.conjugate() if z.imag < 0 else z


def rightmost_of(roots) -> complex:
    roots = np.asarray(roots, dtype=complex)
    best = roots.real.max()
    ties = roots[roots.real >= best - 1e-10]
    return upper_representative(complex(ties[np.argmin(np.abs(ties.imag))]))


def _ok(cond: bool) -> str:
    return "pass" if cond else "fail"


def _guard(number, title, fn):
    try:
        return fn()
    except LVHopfError as exc:
        return CriterionResult(number, title, "fail", f"{type(exc).__name__}: {exc}")


# ---------------------------------------------------------------------------


def criterion_equilibrium_residual(ctx: ValidationContext) -> CriterionResult:
    title = TITLES[1]
    worst = max(
        np.max(np.abs(rhs_no_delay(p, compute_equilibrium(p).as_array()))) for p in feasible_grid()
    )
    return CriterionResult(1, title, _ok(worst < 1e-10), f"max |rhs| = {worst:.3g} (tol 1e-10)")


def criterion_coefficient_identity(ctx: ValidationContext) -> CriterionResult:
    title = TITLES[2]
    worst = 0.0
    for p in feasible_grid():
        eq = compute_equilibrium(p)
        c = linear_coeffs(p, eq)
        cp = charpoly_faddeev(jacobian_no_delay(p, eq))
        worst = max(worst, float(np.max(np.abs(cp[1:] - c.cubic()[1:]))))
    return CriterionResult(2, title, _ok(worst < 1e-10), f"max coefficient error {worst:.3g} (tol 1e-10)")


def criterion_proof_steps(ctx: ValidationContext) -> CriterionResult:
    title = TITLES[3]
    min_gap = min(
        (lambda c: c.a3**2 - c.a5**2)(linear_coeffs(p, compute_equilibrium(p))) for p in feasible_grid()
    )
    rng = np.random.default_rng(ctx.config.seed)
    c = ctx.coeffs
    worst_ratio = 0.0
    worst_dirac = 0.0
    for _ in range(1000):
        family = rng.choice(["dirac", "erlang", "uniform"])
        kernel = DelayKernel(str(family), float(rng.uniform(0.0, 5.0)), int(rng.integers(1, 6)))
        w = float(rng.uniform(0.0, 5.0))
        F = float(sp.F_of_omega(c, kernel, w))
        env = float(sp.envelope(c, w))
        worst_ratio = max(worst_ratio, F / env)
        if kernel.family == "dirac":
            worst_dirac = max(worst_dirac, abs(F - env) / env)
    ok = min_gap > 0 and worst_ratio <= 1 + 1e-12 and worst_dirac <= 1e-12
    return CriterionResult(
        3,
        title,
        _ok(ok),
        f"min a3^2-a5^2 = {min_gap:.3g}; max F/envelope = {worst_ratio:.15f}; "
        f"Dirac |F-env|/env <= {worst_dirac:.3g}",
    )


def criterion_omega0(ctx: ValidationContext) -> CriterionResult:
    title = TITLES[4]
    worst_id = worst_diff = 0.0
    for p in [ctx.params, *feasible_grid(4)]:
        c = linear_coeffs(p, compute_equilibrium(p))
        w0 = sp.omega0(c)
        env = float(sp.envelope(c, w0))
        worst_id = max(worst_id, abs(float(sp.G_of_omega(c, w0)) - env) / env)
        worst_diff = max(worst_diff, abs(w0 - omega0_bisection(c)))
    ok = worst_id <= 1e-9 and worst_diff <= 1e-10
    return CriterionResult(4, title, _ok(ok), f"identity rel err {worst_id:.3g} (1e-9); |closed-bisect| {worst_diff:.3g} (1e-10)")


def _bracket_kernels(ctx):
    E = ctx.config.kernel.expectation or 1.0
    return [DelayKernel.dirac(E), *(DelayKernel.erlang(k, E) for k in (1, 2, 3)), DelayKernel.uniform(E)]


def criterion_omega1(ctx: ValidationContext) -> CriterionResult:
    title = TITLES[5]
    c = ctx.coeffs
    w0 = sp.omega0(c)
    worst = 0.0
    in_bracket = True
    dirac_gap = 0.0
    for kernel in _bracket_kernels(ctx):
        w1 = sp.omega1(c, kernel)
        in_bracket &= 0 < w1 <= w0
        G = float(sp.G_of_omega(c, w1))
        worst = max(worst, abs(float(sp.F_of_omega(c, kernel, w1)) - G) / G)
        if kernel.family == "dirac":
            dirac_gap = abs(w1 - w0)
    ok = in_bracket and worst <= 1e-9 and dirac_gap <= 1e-8
    return CriterionResult(5, title, _ok(ok), f"max |F-G|/G = {worst:.3g} (1e-9); Dirac |w1-w0| = {dirac_gap:.3g} (1e-8)")


def criterion_back_substitution(ctx: ValidationContext) -> CriterionResult:
    title = TITLES[6]
    c = ctx.coeffs
    omegas = [sp.omega0(c)] + [sp.omega1(c, k) for k in _bracket_kernels(ctx)]
    worst = 0.0
    for w in omegas:
        C, S = sp.crossing_moments(c, w)
        r10 = c.a3 * C + c.a4 * w * S - (c.a1 * w**2 - c.a5)
        r11 = -c.a3 * S + c.a4 * w * C - (w**3 - c.a2 * w)
        worst = max(worst, abs(r10), abs(r11))
    return CriterionResult(6, title, _ok(worst < 1e-9), f"max residual {worst:.3g} (tol 1e-9)")


def criterion_bound_consistency(ctx: ValidationContext) -> CriterionResult:
    title = TITLES[7]

    def run():
        parts = []
        ok = True
        for family, k in (("dirac", 1), ("erlang", 1), ("erlang", 2), ("erlang", 3)):
            hp = ctx.hopf(family, k)
            w1 = sp.omega1(ctx.coeffs, DelayKernel(family, hp.E_crit, k))
            bound = sp.E1_lower_bound(ctx.coeffs, w1)
            ok &= hp.E_crit >= bound
            parts.append(f"{family}{k if family == 'erlang' else ''}: {hp.E_crit:.6g} >= {bound:.6g}")
        return CriterionResult(7, title, _ok(ok), "; ".join(parts))

    return _guard(7, title, run)


ORACLE_EXPECTATIONS = (0.25, 1.0, 1.3, 4.0)


def _oracle_rectangles(win: Rectangle):
    mid = 0.5 * (win.re_lo + win.re_hi)
    return [
        win,
        Rectangle(win.re_lo, mid + 0.0137, win.im_lo, win.im_hi),
        Rectangle(mid + 0.0137, win.re_hi, win.im_lo, win.im_hi),
        Rectangle(-0.5013, 0.2071, -0.7019, 0.6983),
        Rectangle(-0.0521, 0.0497, 0.2003, 0.6011),
        Rectangle(-2.0117, -0.2029, -1.0031, 1.0043),
    ]


def criterion_root_finder_oracle(ctx: ValidationContext) -> CriterionResult:
    title = TITLES[8]

    def run():
        c = ctx.coeffs
        win = sp.search_window(c)
        worst = 0.0
        mismatches = []
        for k in (1, 2, 3):
            for E in ORACLE_EXPECTATIONS:
                kernel = DelayKernel.erlang(k, E)
                roots = erlang_polynomial(c, k, E).roots
                worst = max(worst, abs(sp.rightmost_root(c, kernel).lam - rightmost_of(roots)))
                for rect in _oracle_rectangles(win):
                    expected = sum(rect.strictly_contains(complex(r)) for r in roots)
                    got = sp.count_roots_in_rectangle(c, kernel, rect)
                    if got != expected:
                        mismatches.append(f"k={k},E={E}: {got}!={expected}")
        ok = worst < 1e-8 and not mismatches
        detail = f"max root error {worst:.3g} (tol 1e-8); count mismatches: {mismatches or 'none'}"
        return CriterionResult(8, title, _ok(ok), detail)

    return _guard(8, title, run)


def criterion_zero_delay_oracle(ctx: ValidationContext) -> CriterionResult:
    title = TITLES[9]

    def run():
        worst = 0.0
        for p in [ctx.params, *feasible_grid(3)]:
            eq = compute_equilibrium(p)
            c = linear_coeffs(p, eq)
            eig = rightmost_of(np.linalg.eigvals(jacobian_no_delay(p, eq)))
            for family in ("dirac", "erlang", "uniform"):
                lam = sp.rightmost_root(c, DelayKernel(family, 0.0, 2)).lam
                worst = max(worst, abs(lam - eig))
        return CriterionResult(9, title, _ok(worst < 1e-8), f"max |root - eigenvalue| = {worst:.3g} (tol 1e-8)")

    return _guard(9, title, run)


def criterion_transversality(ctx: ValidationContext) -> CriterionResult:
    title = TITLES[10]

    def run():
        c = ctx.coeffs
        hp = ctx.hopf(ctx.family, ctx.shape)
        base = DelayKernel(ctx.family, hp.E_crit, ctx.shape)
        h = 1e-4 * hp.E_crit
        secant = (ctx.mu(base.with_expectation(hp.E_crit + h)).real
                  - ctx.mu(base.with_expectation(hp.E_crit - h)).real) / (2 * h)
        analytic = hp.transversal_slope
        rel = abs(analytic - secant) / abs(analytic)
        recip = abs(sp.transversality(c, base, 1j * hp.omega_crit) * sp.dE_dlambda(c, base, 1j * hp.omega_crit) - 1)
        ok = rel < 1e-3 and hp.transversal_ok and recip < 1e-10
        return CriterionResult(
            10, title, _ok(ok),
            f"{base.describe()}: analytic {analytic:.10g}, secant {secant:.10g}, rel {rel:.3g} (1e-3); "
            f"|dl/dE * dE/dl - 1| = {recip:.3g}",
        )

    return _guard(10, title, run)


def criterion_simulation_equivalence(ctx: ValidationContext) -> CriterionResult:
    title = TITLES[11]

    def run():
        E = ctx.hopf("erlang", 2).E_crit
        kernel = DelayKernel.erlang(2, E)
        cfg = SimConfig(t_end=50.0, dt=1e-3, rho=0.05)
        a = simulate_chain(ctx.params, kernel, cfg)
        b = simulate_convolution(ctx.params, kernel, cfg)
        diff = float(np.max(np.abs(a.states - b.states)))
        return CriterionResult(11, title, _ok(diff < 1e-4), f"E={E:.6g}, rho=0.05: sup |diff| = {diff:.3g} (tol 1e-4)")

    return _guard(11, title, run)


def witness_config(ctx: ValidationContext, t_end: float) -> SimConfig:
    sim = ctx.config.sim
    method = "chain" if (ctx.family == "erlang" and sim.method == "chain") else "convolution"
    return replace(sim, t_end=t_end, method=method, history="perturbed")


def growth_horizon(ctx: ValidationContext, mu: float, period: float) -> float:
    """Time for linear growth from the initial kick to amplitude 1e-2, within [20 periods, 600]."""
    kick = ctx.config.sim.rho * ctx.eq.x3
    t = math.log(1e-2 / kick) / mu if mu > 0 else 600.0
    return float(min(max(t, 20 * period), 600.0))


def criterion_hopf_witness(ctx: ValidationContext) -> CriterionResult:
    title = TITLES[12]

    def run():
        hp = ctx.hopf(ctx.family, ctx.shape)
        eq = ctx.eq
        period_pred = 2 * math.pi / hp.omega_crit
        base = DelayKernel(ctx.family, hp.E_crit, ctx.shape)
        kick = ctx.config.sim.rho * eq.x3
        parts = []
        ok = True

        sub = witness_config(ctx, 600.0)
        tr_sub = simulate(ctx.params, base.with_expectation(0.9 * hp.E_crit), sub)
        m_sub = limit_cycle_metrics(tr_sub, eq, sub)
        ratio = kick / max(m_sub.amplitude[2], 1e-300)
        ok &= ratio >= 10 and m_sub.decaying
        parts.append(f"0.9: decay x{ratio:.3g} (>=10), decaying={m_sub.decaying}")

        mu_super = ctx.mu(base.with_expectation(1.1 * hp.E_crit)).real
        sup = witness_config(ctx, growth_horizon(ctx, mu_super, period_pred))
        tr_sup = simulate(ctx.params, base.with_expectation(1.1 * hp.E_crit), sup)
        m_sup = limit_cycle_metrics(tr_sup, eq, sup)
        per_err = abs(m_sup.period - period_pred) / period_pred if m_sup.period else math.inf
        ok &= (not m_sup.decaying) and per_err < 0.05
        parts.append(f"1.1: decaying={m_sup.decaying}, period rel err {per_err:.3g} (<0.05)")

        for s, tr in ((0.5, None), (0.9, tr_sub), (1.1, tr_sup)):
            kernel = base.with_expectation(s * hp.E_crit)
            if tr is None:
                tr = simulate(ctx.params, kernel, witness_config(ctx, 600.0))
            mu = ctx.mu(kernel).real
            fit = empirical_growth_rate(tr, eq, t_start=5 * period_pred)
            rel = abs(fit - mu) / abs(mu)
            ok &= rel < 0.1
            parts.append(f"growth {s}: fit {fit:.5g} vs mu {mu:.5g} rel {rel:.2g} (<0.1)")
        return CriterionResult(12, title, _ok(ok), "; ".join(parts))

    return _guard(12, title, run)


def criterion_degenerate_reductions(ctx: ValidationContext) -> CriterionResult:
    title = TITLES[13]

    def run():
        sim = ctx.config.sim
        eq = ctx.eq
        cfg = replace(sim, t_end=50.0, history="perturbed")
        zero = simulate_convolution(ctx.params, DelayKernel(ctx.family, 0.0, ctx.shape), cfg)
        ode = integrate_no_delay(ctx.params, initial_state(eq, cfg), cfg.dt, cfg.t_end)
        d0 = float(np.max(np.abs(zero.states - ode.states)))

        kernel = ctx.config.kernel.to_kernel()
        chain_kernel = DelayKernel.erlang(ctx.shape if ctx.family == "erlang" else 2, kernel.expectation or 1.0)
        horizon = max(50.0, 2 * support_bound(kernel, sim.truncation_epsilon) + 1)
        const = replace(sim, t_end=horizon, history="constant")
        d_conv = float(np.max(np.abs(simulate_convolution(ctx.params, kernel, const).states - eq.as_array())))
        d_chain = float(np.max(np.abs(simulate_chain(ctx.params, chain_kernel, const).states - eq.as_array())))
        ok = d0 < 1e-10 and d_conv < 1e-6 and d_chain < 1e-6
        return CriterionResult(
            13, title, _ok(ok),
            f"|E=0 - ODE| = {d0:.3g} (1e-10); constant history drift conv {d_conv:.3g}, chain {d_chain:.3g} (1e-6)",
        )

    return _guard(13, title, run)


def criterion_determinism(ctx: ValidationContext) -> CriterionResult:
    title = TITLES[14]
    from .cli import emit_outputs

    def run():
        with tempfile.TemporaryDirectory() as d1, tempfile.TemporaryDirectory() as d2:
            emit_outputs(ctx.config, Path(d1))
            emit_outputs(ctx.config, Path(d2))
            same = [filecmp.cmp(Path(d1) / n, Path(d2) / n, shallow=False) for n in CSV_NAMES]
        return CriterionResult(14, title, _ok(all(same)), ", ".join(f"{n}:{'same' if s else 'DIFF'}" for n, s in zip(CSV_NAMES, same)))

    return _guard(14, title, run)


CRITERIA = (
    criterion_equilibrium_residual,
    criterion_coefficient_identity,
    criterion_proof_steps,
    criterion_omega0,
    criterion_omega1,
    criterion_back_substitution,
    criterion_bound_consistency,
    criterion_root_finder_oracle,
    criterion_zero_delay_oracle,
    criterion_transversality,
    criterion_simulation_equivalence,
    criterion_hopf_witness,
    criterion_degenerate_reductions,
    criterion_determinism,
)


def run_all(config: RunConfig, echo=None) -> list[CriterionResult]:
    """Run every criterion; infeasible or unstable-at-zero models skip them all."""
    report = check_feasibility(config.model)
    if not (report.feasible and report.routh_hurwitz_ok):
        why = report.reason or "equilibrium unstable at E=0"
        results = [CriterionResult(i, TITLES[i], "skip", why) for i in range(1, len(CRITERIA) + 1)]
        for r in results:
            if echo:
                echo(r.line())
        return results
    ctx = ValidationContext(config)
    results = []
    for i, f in enumerate(CRITERIA):
        try:
            r = f(ctx)
        except LVHopfError as exc:
            r = CriterionResult(i + 1, TITLES[i + 1], "fail", f"{type(exc).__name__}: {exc}")
        results.append(r)
        if echo:
            echo(r.line())
    return results
