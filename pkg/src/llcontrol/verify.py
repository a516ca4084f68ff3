"""Property suites behind ``llcontrol verify``.

Each suite returns a list of :class:`Check`; a check passes when its measured
``value`` lies within ``[lower, upper]``. Suites are independent and can run
in separate processes.
"""
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core import ControlLaw, Equilibrium, MagnetizationField, PhysicalParams
from .diagnostics import (
    DegenerateFieldError,
    lemma3_integral,
    lemma4_ratio,
    lyapunov_affine,
    lyapunov_field,
    lyapunov_l2,
)
from .discretization import build, thomas_solve, weak_laplacian
from .dynamics import RhsKind, evaluate
from .fields import SMOOTH_FIELDS, random_band_limited, random_saturated, smooth_field, winding_field
from .integrator import IntegratorConfig, Phase, default_dt, run
from .oracle import fd_rhs
from .presets import R1
from .scenario import affine_rate_bound

__all__ = ["Check", "SUITES", "LEVELS", "run_suite", "run_verify", "orthogonality_tolerance"]

LEVELS = ("fast", "full")
EPS = np.finfo(float).eps
NU = 0.02
ALL_KINDS = ("uncontrolled", "affine", "field", "linear_affine", "linear_field")


@dataclass(frozen=True)
class Check:
    suite: str
    name: str
    value: float
    lower: float = -math.inf
    upper: float = math.inf

    @property
    def passed(self):
        return bool(np.isfinite(self.value) and self.lower <= self.value <= self.upper)

    @property
    def margin(self):
        """Distance to the nearest violated edge; positive means inside."""
        return min(self.value - self.lower, self.upper - self.value)

    def line(self):
        tag = "PASS" if self.passed else "FAIL"
        lo = "" if self.lower == -math.inf else f"{self.lower:.4g} <= "
        hi = "" if self.upper == math.inf else f" <= {self.upper:.4g}"
        return f"[{tag}] {self.suite}/{self.name}: {lo}{self.value:.4g}{hi} (margin {self.margin:.3g})"


def orthogonality_tolerance(m, g, nu, ulps=8):
    """Per-node bound ``ulps * eps * |m|^2 |g| (1 + nu |m|)`` on ``|m . rhs|``.

    ``g`` is the effective field; every term of the RHS is a cross product
    with ``m``, so rounding in ``m . rhs`` scales with ``|m|^2 |g|``.
    """
    mn = np.linalg.norm(m, axis=-1)
    return ulps * EPS * mn ** 2 * np.linalg.norm(g, axis=-1) * (1.0 + nu * mn)


def _kind(name, k=0.5, r=R1, a=None):
    if name == "uncontrolled":
        return RhsKind("uncontrolled")
    base = Equilibrium(a) if a is not None else None
    return RhsKind(name, float(k), Equilibrium(r), base)


def suite_orthogonality(level, seed):
    rng = np.random.default_rng(seed)
    n_fields = 200 if level == "fast" else 1000
    p = PhysicalParams(NU)
    out = []
    for kind_name in ("uncontrolled", "field"):
        worst = 0.0
        for j in range(n_fields):
            n = int(rng.choice([12, 24, 48]))
            d = build(n, mass="consistent" if j % 2 == 0 else "lumped")
            m = random_saturated(rng, n).nodes
            k = float(rng.uniform(0.1, 10.0))
            r = Equilibrium.normalized(rng.normal(size=3))
            kind = _kind(kind_name, k, r.vector)
            rhs = evaluate(d, p, kind, m).nodes
            g = weak_laplacian(d, m).nodes
            if kind_name == "field":
                g = g + k * (r.vector - m)
            tol = orthogonality_tolerance(m, g, p.nu)
            worst = max(worst, float(np.max(np.abs(np.sum(m * rhs, axis=1)) / tol)))
        out.append(Check("orthogonality", f"{kind_name} |m.rhs| / 8ulp tol", worst, upper=1.0))
    return out


def suite_fixed_points(level, seed):
    rng = np.random.default_rng(seed)
    p = PhysicalParams(NU)
    out = []
    worst = {name: 0.0 for name in ALL_KINDS}
    for _ in range(20 if level == "fast" else 100):
        n = int(rng.choice([12, 24, 48]))
        d = build(n)
        r = Equilibrium.normalized(rng.normal(size=3))
        a = Equilibrium.normalized(rng.normal(size=3))
        k = float(rng.uniform(0.1, 10.0))
        const_r = r.field(n + 1)
        worst["uncontrolled"] = max(worst["uncontrolled"],
                                    np.abs(evaluate(d, p, _kind("uncontrolled"), a.field(n + 1)).nodes).max())
        for name in ("affine", "field", "linear_affine"):
            kind = _kind(name, k, r.vector, a.vector if name == "linear_affine" else None)
            worst[name] = max(worst[name], np.abs(evaluate(d, p, kind, const_r).nodes).max())
        zero = MagnetizationField(np.zeros((n + 1, 3)))
        worst["linear_field"] = max(worst["linear_field"],
                                    np.abs(evaluate(d, p, _kind("linear_field", k, r.vector), zero).nodes).max())
    for name, v in worst.items():
        out.append(Check("fixed_points", f"{name} max |rhs| at equilibrium", float(v), upper=1e-12))
    return out


def suite_decomposition(level, seed):
    """Affine RHS minus uncontrolled RHS is exactly the feedback term."""
    rng = np.random.default_rng(seed)
    p = PhysicalParams(NU)
    worst = 0.0
    for _ in range(20 if level == "fast" else 100):
        d = build(24)
        m = random_band_limited(rng, 24).nodes
        k = float(rng.uniform(0.1, 10.0))
        r = Equilibrium.normalized(rng.normal(size=3))
        diff = evaluate(d, p, _kind("affine", k, r.vector), m).nodes - evaluate(d, p, _kind("uncontrolled"), m).nodes
        worst = max(worst, float(np.abs(diff - k * (r.vector - m)).max() / (1 + k)))
    return [Check("decomposition", "affine - uncontrolled - k(r - m)", worst, upper=1e-12)]


def suite_laplacian(level, seed):
    out = []
    rng = np.random.default_rng(seed)
    for n in (12, 48):
        d = build(n)
        b = rng.normal(size=(n + 1, 3))
        x = thomas_solve(d.mass_lower, d.mass_diag, d.mass_upper, b)
        ref = np.linalg.solve(d.mass, b)
        out.append(Check("laplacian", f"thomas vs dense solve n={n}",
                         float(np.abs(x - ref).max() / np.abs(ref).max()), upper=1e-12))
    errs = []
    ladder = (12, 24, 48) if level == "fast" else (12, 24, 48, 96)
    for n in ladder:
        d = build(n)
        f = np.cos(np.pi * d.x)
        w = weak_laplacian(d, np.column_stack([f, f, f])).nodes[:, 0]
        errs.append(np.abs(w + np.pi ** 2 * f).max())
    for i in range(len(ladder) - 1):
        out.append(Check("laplacian", f"cos(pi x) error ratio {ladder[i]}->{ladder[i + 1]}",
                         float(errs[i] / errs[i + 1]), 3.5, 4.5))
    return out


def suite_oracle(level, seed):
    p = PhysicalParams(NU)
    ladder = (12, 24, 48) if level == "fast" else (12, 24, 48, 96)
    a = (0.0, 0.0, 1.0)
    out = []
    for kind_name in ALL_KINDS:
        worst_lo, worst_hi = math.inf, -math.inf
        for field_name in SMOOTH_FIELDS:
            errs = []
            for n in ladder:
                d = build(n)
                m = smooth_field(field_name, n).nodes
                kind = _kind(kind_name, 0.5, R1, a if kind_name == "linear_affine" else None)
                k, r, base = kind.kernel_params()
                ref = fd_rhs(kind_name, m, d.h, p.nu, k, r, base)
                errs.append(np.abs(evaluate(d, p, kind, m).nodes - ref).max())
            ratios = np.array(errs[:-1]) / np.array(errs[1:])
            worst_lo, worst_hi = min(worst_lo, ratios.min()), max(worst_hi, ratios.max())
        out.append(Check("oracle", f"{kind_name} FEM-FD refinement ratio (min)", float(worst_lo), 3.5, 4.5))
        out.append(Check("oracle", f"{kind_name} FEM-FD refinement ratio (max)", float(worst_hi), 3.5, 4.5))
    return out


def suite_lemmas(level, seed):
    rng = np.random.default_rng(seed)
    ladder = (12, 24, 48) if level == "fast" else (12, 24, 48, 96)
    out = []
    for name in SMOOTH_FIELDS:
        vals = []
        for n in ladder:
            d = build(n)
            m = smooth_field(name, n)
            vals.append(abs(lemma3_integral(d, m, R1)))
        order = math.log2(vals[-2] / vals[-1])
        out.append(Check("lemma3", f"field {name} observed order of |integral| -> 0", order, lower=2.0))
    worst = 0.0
    for _ in range(30 if level == "fast" else 100):
        d = build(48)
        try:
            worst = max(worst, lemma4_ratio(d, random_band_limited(rng, 48)))
        except DegenerateFieldError:
            continue
    out.append(Check("lemma4", "max ratio over band-limited fields (<= 4 L^2)", worst, upper=4.0))
    return out


def suite_affine_decay(level, seed):
    """Exponential envelope of the affine Lyapunov functional on the fig2 scenario."""
    p = PhysicalParams(NU)
    k = 0.5
    rate = affine_rate_bound(k, p.nu, p.length)
    out = []
    for n in ((12,) if level == "fast" else (12, 24)):
        d = build(n)
        cfg = IntegratorConfig(dt=default_dt(d), t_max=200.0, record_every=5)
        rec = run(d, p, [Phase.settle(ControlLaw.affine(k, R1))], winding_field(n), cfg, diagnostics=False)
        v = np.array([lyapunov_affine(d, s, R1) for s in rec.states])
        worst = float(np.max(v / (v[0] * np.exp(-rate * rec.times))))
        out.append(Check("decay_bound", f"affine V / (V0 e^(-{rate:.2f} t)) n={n}", worst, upper=1.05))
        out.append(Check("decay_bound", f"affine final max|m - r1| n={n}",
                         float(np.max(np.linalg.norm(rec.states[-1] - np.array(R1), axis=1))), upper=1e-3))
    return out


def suite_linear_decay(level, seed):
    """``||z - r||^2 <= e^(-2kt) ||z0 - r||^2`` for the linear affine system."""
    rng = np.random.default_rng(seed)
    p = PhysicalParams(NU)
    n = 12
    d = build(n)
    out = []
    for k in (0.1, 0.5, 2.0):
        worst = 0.0
        horizon = 1.0 / k if level == "fast" else 3.0 / k
        for _ in range(3 if level == "fast" else 20):
            r = Equilibrium.normalized(rng.normal(size=3))
            z0 = random_band_limited(rng, n)
            cfg = IntegratorConfig(dt=default_dt(d), t_max=horizon + 1.0, record_every=20)
            law = RhsKind("linear_affine", k, r)
            rec = run(d, p, [Phase.fixed(law, horizon)], z0, cfg, diagnostics=False)
            v = np.array([lyapunov_l2(d, s, r) for s in rec.states])
            worst = max(worst, float(np.max(v / (v[0] * np.exp(-2 * k * rec.times)))))
        out.append(Check("decay_bound", f"linear affine ratio to e^(-2kt) bound, k={k}", worst, upper=1.02))
    return out


def suite_field_monotone(level, seed):
    """Field-control Lyapunov functional never increases by more than 10 dt^5 per step."""
    p = PhysicalParams(NU)
    k = 10.0
    d = build(12, mass="lumped")
    dt = default_dt(d)
    cfg = IntegratorConfig(dt=dt, t_max=300.0, record_every=1)
    phase = Phase.fixed(ControlLaw.applied_field(k, R1), 20.0) if level == "fast" else \
        Phase.settle(ControlLaw.applied_field(k, R1))
    rec = run(d, p, [phase], winding_field(12), cfg, diagnostics=False)
    diag_v = _lyap_field_series(d, rec.states, np.array(R1), k)
    inc = float(np.max(np.diff(diag_v)))
    return [Check("field_monotone", "max per-step increase / (10 dt^5)", inc / (10 * dt ** 5), upper=1.0)]


def _lyap_field_series(d, states, r, k):
    return np.array([lyapunov_field(d, s, r, k) for s in states])


def suite_linear_field(level, seed):
    """Linearized field control: ``1/2 ||v - r||^2`` is non-increasing and the
    mean of ``r . v`` is conserved."""
    rng = np.random.default_rng(seed)
    p = PhysicalParams(NU)
    d = build(12)
    out = []
    worst_inc, worst_mean = -math.inf, 0.0
    for _ in range(3 if level == "fast" else 10):
        r = Equilibrium.normalized(rng.normal(size=3))
        v0 = 0.1 * random_band_limited(rng, 12).nodes
        cfg = IntegratorConfig(dt=default_dt(d), t_max=20.0, record_every=10)
        rec = run(d, p, [Phase.fixed(RhsKind("linear_field", 2.0, r), 5.0)], v0, cfg, diagnostics=False)
        v = np.array([lyapunov_l2(d, s, r) for s in rec.states])
        worst_inc = max(worst_inc, float(np.max(np.diff(v)) / v[0]))
        col = _mass_colsum(d)
        means = np.einsum("i,sic,c->s", col, rec.states, r.vector)
        worst_mean = max(worst_mean, float(np.abs(means - means[0]).max()))
    out.append(Check("linear_field", "max relative increase of 1/2||v - r||^2", worst_inc, upper=1e-12))
    out.append(Check("linear_field", "drift of integral of r.v", worst_mean, upper=1e-10))
    return out


def _mass_colsum(d):
    col = d.mass_diag.copy()
    col[:-1] += d.mass_upper
    col[1:] += d.mass_lower
    return col


def suite_saturation(level, seed):
    """Nodal norm drift of the unprojected flow shrinks at fourth order in dt."""
    p = PhysicalParams(NU)
    d = build(12)
    lam = d.max_eigenvalue()
    t_end = 2.0 if level == "fast" else 10.0
    out = []
    for name, law in (("uncontrolled", ControlLaw.none()), ("field", ControlLaw.applied_field(10.0, R1))):
        drift = []
        for frac in (1 / 16, 1 / 32):
            dt = t_end / math.ceil(t_end / (frac / lam))
            cfg = IntegratorConfig(dt=dt, t_max=t_end + 1.0, record_every=1)
            rec = run(d, p, [Phase.fixed(law, t_end)], winding_field(12), cfg, diagnostics=False)
            drift.append(float(np.max(np.abs(np.linalg.norm(rec.states, axis=2) - 1.0))))
        out.append(Check("saturation", f"{name} drift ratio when dt halves", drift[0] / drift[1], 12.0, 20.0))
    return out


SUITES = {
    "orthogonality": suite_orthogonality,
    "fixed_points": suite_fixed_points,
    "decomposition": suite_decomposition,
    "laplacian": suite_laplacian,
    "oracle": suite_oracle,
    "lemmas": suite_lemmas,
    "affine_decay": suite_affine_decay,
    "linear_decay": suite_linear_decay,
    "field_monotone": suite_field_monotone,
    "linear_field": suite_linear_field,
    "saturation": suite_saturation,
}


def run_suite(name, level="fast", seed=0):
    if level not in LEVELS:
        raise ValueError(f"level must be one of {LEVELS}, got {level!r}")
    t0 = time.perf_counter()
    checks = SUITES[name](level, seed)
    return name, checks, time.perf_counter() - t0


def run_verify(level="fast", seed=0, jobs=None, suites=None, echo=print):
    """Run the suites, print one line per check, return ``(ok, checks)``."""
    names = list(suites or SUITES)
    if jobs == 1:
        results = [run_suite(n, level, seed) for n in names]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(run_suite, names, [level] * len(names), [seed] * len(names)))
    checks = []
    for name, cs, elapsed in results:
        echo(f"== {name} ({elapsed:.1f} s)")
        for c in cs:
            echo(c.line())
        checks += cs
    n_fail = sum(not c.passed for c in checks)
    echo(f"{len(checks) - n_fail}/{len(checks)} checks passed")
    return n_fail == 0, checks
