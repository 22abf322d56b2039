"""Energy functional E = E1 + E2 + E3 with pluggable integrands.

E1 sums j_i(u_i, |Du_i|) over components, E2 is minus a local integral
-int F(|x|, U), and E3 is minus the nonlocal quadratic form
-int int G(U(x)) V(|x-y|) G(U(y)).  All integrand evaluators must accept
numpy arrays (broadcasting) and be pure.
"""

from __future__ import annotations

import dataclasses

import numpy as np
from scipy.signal import fftconvolve

from .grid import GridSpec, MultiField, ScalarField, gradient_magnitude, make_grid


@dataclasses.dataclass
class IntegrandJ:
    """Gradient integrand j(s, b) with partial derivatives.

    a1 is the coercivity constant in j(s, b) >= a1 * b^p; strictly_convex
    declares strict convexity of j(s, .).  depends_on_gradient=False marks
    integrands that ignore b, for which polarization invariance is exact.
    """

    j: callable
    dj_ds: callable
    dj_db: callable
    a1: float = 1.0
    strictly_convex: bool = False
    depends_on_gradient: bool = True


@dataclasses.dataclass
class LocalTermF:
    """Local term F(r, s_1, ..., s_m) with growth data (F1).

    f takes (r, s) with s a list of m arrays; df_ds returns the list of m
    partial derivatives.  f2_triple, when set, is one (eps, R0, s0) sample
    point for the vanishing-tail condition (F2); otherwise (F2) is treated
    as declared metadata.
    """

    f: callable
    df_ds: callable
    growth_K: float
    exponents_l: tuple
    f2_triple: tuple | None = None


@dataclasses.dataclass
class CouplingG:
    g: callable
    dg_ds: callable
    growth_K: float
    exponents_mu: tuple


@dataclasses.dataclass
class KernelV:
    """Radial non-increasing interaction kernel V(r), r > 0.

    q is the declared weak-L^q exponent (documentation only).  origin_rule
    is one of "cell_average", "zero", or ("explicit", value) and fixes the
    kernel value at zero offset.
    """

    v: callable
    q: float
    origin_rule: object = "cell_average"


@dataclasses.dataclass
class EnergyModel:
    p: float
    p_star: float
    js: list
    F: LocalTermF | None = None
    G: CouplingG | None = None
    V: KernelV | None = None
    name: str = "custom"

    def __post_init__(self):
        if not self.p_star > self.p:
            raise ValueError("p* must exceed p")
        if (self.G is None) != (self.V is None):
            raise ValueError("coupling G and kernel V must be configured together")

    @property
    def m(self) -> int:
        return len(self.js)


@dataclasses.dataclass
class EnergyBreakdown:
    E1: float
    E2: float
    E3: float

    @property
    def total(self) -> float:
        return self.E1 + self.E2 + self.E3


def _require_finite(vals: np.ndarray, what: str) -> None:
    if not np.all(np.isfinite(vals)):
        idx = np.unravel_index(int(np.argmax(~np.isfinite(vals))), vals.shape)
        raise ValueError(f"{what} produced non-finite value at {idx}")


def eval_E1(U: MultiField, model: EnergyModel) -> float:
    if len(U.components) != model.m:
        raise ValueError("component count does not match model")
    total = 0.0
    for comp, integrand in zip(U.components, model.js):
        b = gradient_magnitude(comp).values
        vals = integrand.j(comp.values, b)
        _require_finite(np.asarray(vals), "integrand")
        total += float(np.sum(vals))
    return total * U.spec.cell_volume


def eval_E2(U: MultiField, model: EnergyModel) -> float:
    if model.F is None:
        return 0.0
    r = U.spec.radii
    vals = model.F.f(r, [c.values for c in U.components])
    _require_finite(np.asarray(vals), "integrand")
    return -float(np.sum(vals)) * U.spec.cell_volume


def origin_value(V: KernelV, spec: GridSpec) -> float:
    """Kernel value assigned to zero offset.

    cell_average integrates V(|x|) over the cell [-h/2, h/2]^N with a fixed
    16-point-per-axis midpoint rule.
    """
    rule = V.origin_rule
    if rule == "zero":
        return 0.0
    if isinstance(rule, tuple) and rule[0] == "explicit":
        return float(rule[1])
    if rule != "cell_average":
        raise ValueError(f"unknown origin rule {rule!r}")
    h = spec.h
    q = 16
    pts = (np.arange(q) + 0.5) / q * h - h / 2.0
    mesh = np.meshgrid(*([pts] * spec.dim), indexing="ij")
    r = np.sqrt(np.sum([m**2 for m in mesh], axis=0))
    vals = V.v(r)
    _require_finite(np.asarray(vals), "kernel")
    return float(np.mean(vals))


def sample_kernel(V: KernelV, spec: GridSpec) -> ScalarField:
    """Kernel values at all pairwise-offset lattice vectors.

    The result lives on the padded grid with 2n-1 points per axis and
    half-width 2L; the entry at zero offset follows the origin rule.
    """
    padded = make_grid(spec.dim, 2 * spec.points_per_axis - 1,
                       2.0 * spec.half_width)
    r = padded.radii
    vals = np.empty_like(r)
    nz = r > 0
    vals[nz] = V.v(r[nz])
    _require_finite(vals[nz], "kernel")
    vals[~nz] = origin_value(V, spec)
    return ScalarField(padded, vals)


def coupling_density(U: MultiField, model: EnergyModel) -> np.ndarray:
    g = model.G.g([c.values for c in U.components])
    _require_finite(np.asarray(g), "coupling")
    return np.asarray(g, dtype=np.float64)


def kernel_convolve(g: np.ndarray, kernel: ScalarField) -> np.ndarray:
    """Free-space linear convolution sum_y K[x - y] g(y) (no volume factor).

    fftconvolve zero-pads to the full linear size, so there is no periodic
    wrap-around.
    """
    return fftconvolve(g, kernel.values, mode="valid")


def nonlocal_quadratic(U: MultiField, model: EnergyModel,
                       method: str = "fft") -> float:
    """Positive double sum Q(U) = h^2N sum_xy g(x) V(|x-y|) g(y)."""
    if model.G is None:
        return 0.0
    spec = U.spec
    g = coupling_density(U, model)
    if method == "fft":
        kernel = sample_kernel(model.V, spec)
        conv = kernel_convolve(g, kernel)
        q = float(np.sum(g * conv))
    elif method == "direct":
        kmat = _kernel_matrix(model.V, spec)
        gf = g.ravel()
        q = float(gf @ (kmat @ gf))
    else:
        raise ValueError(f"unknown method {method!r}")
    return q * spec.cell_volume**2


_KERNEL_MATRIX_CACHE = {}


def _kernel_matrix(V: KernelV, spec: GridSpec) -> np.ndarray:
    """Dense pairwise matrix V(|x - y|) over all grid points (direct oracle)."""
    key = (spec, V.v, repr(V.origin_rule))
    hit = _KERNEL_MATRIX_CACHE.get(key)
    if hit is not None:
        return hit
    x = spec.coords.reshape(-1, spec.dim)
    d = np.sqrt(np.sum((x[:, None, :] - x[None, :, :]) ** 2, axis=2))
    vals = np.empty_like(d)
    nz = d > 0.5 * spec.h
    vals[nz] = V.v(d[nz])
    _require_finite(vals[nz], "kernel")
    vals[~nz] = origin_value(V, spec)
    if len(_KERNEL_MATRIX_CACHE) > 4:
        _KERNEL_MATRIX_CACHE.clear()
    _KERNEL_MATRIX_CACHE[key] = vals
    return vals


def eval_E3(U: MultiField, model: EnergyModel, method: str = "fft") -> float:
    if model.G is None:
        return 0.0
    return -nonlocal_quadratic(U, model, method)


def eval_total(U: MultiField, model: EnergyModel,
               method: str = "fft") -> EnergyBreakdown:
    return EnergyBreakdown(eval_E1(U, model), eval_E2(U, model),
                           eval_E3(U, model, method))


# --- sampled verification of the structural assumptions ---------------------

@dataclasses.dataclass
class CheckResult:
    name: str
    passed: bool
    witness: object = None


@dataclasses.dataclass
class AssumptionReport:
    checks: list
    trials: int
    seed: int

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list:
        return [c for c in self.checks if not c.passed]


_EPS = 1e-12


def check_assumptions(model: EnergyModel, trials: int, seed: int) -> AssumptionReport:
    """Sample the structural inequalities on random points.

    A failed check carries a concrete counterexample tuple.  The weak-L^q
    membership of V (G2) has no finite certificate and is not sampled.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    m = model.m
    p = model.p
    checks = []

    def run(name, sampler):
        for _ in range(trials):
            witness = sampler(rng)
            if witness is not None:
                checks.append(CheckResult(name, False, witness))
                return
        checks.append(CheckResult(name, True))

    for i, integrand in enumerate(model.js):
        jf = integrand.j

        def j0(rng, jf=jf):
            s, b = rng.uniform(-3, 3), rng.uniform(0, 3)
            if jf(abs(s), b) > jf(s, b) + _EPS:
                return (s, b)

        def j1(rng, jf=jf, a1=integrand.a1):
            s, b = rng.uniform(0, 3), rng.uniform(0, 3)
            if jf(s, b) < a1 * b**p - _EPS:
                return (s, b)

        def j2(rng, jf=jf, strict=integrand.strictly_convex):
            s = rng.uniform(0, 3)
            b, b2 = np.sort(rng.uniform(0, 3, size=2))
            if jf(s, b) > jf(s, b2) + _EPS:  # non-decreasing
                return (s, b, b2)
            mid = jf(s, (b + b2) / 2.0)
            avg = (jf(s, b) + jf(s, b2)) / 2.0
            if mid > avg + _EPS:
                return (s, b, b2)
            if strict and b2 - b > 1e-3 and mid > avg - _EPS:
                return (s, b, b2)

        run(f"J0[{i}]", j0)
        run(f"J1[{i}]", j1)
        run(f"J2[{i}]", j2)

    if model.F is not None:
        F = model.F

        def split(s):
            return [s[i] for i in range(m)]

        def f0(rng):
            r = rng.uniform(0, 5)
            s = rng.uniform(-3, 3, size=m)
            if F.f(r, split(s)) > F.f(r, split(np.abs(s))) + _EPS:
                return (r, tuple(s))

        def f1(rng):
            r = rng.uniform(0, 5)
            s = rng.uniform(0, 3, size=m)
            val = F.f(r, split(s))
            bound = F.growth_K * (
                np.sum(s**2) ** (p / 2.0)
                + sum(s[i] ** (F.exponents_l[i] + p) for i in range(m)))
            if val < -_EPS or val > bound + _EPS:
                return (r, tuple(s))

        def f3(rng):
            r = rng.uniform(0, 5)
            y = rng.uniform(0, 3, size=m)
            hh, kk = rng.uniform(0, 2, size=2)
            if m >= 2:
                i, jdx = rng.choice(m, size=2, replace=False)
                ya, yb, yc = y.copy(), y.copy(), y.copy()
                ya[i] += hh
                ya[jdx] += kk
                yb[i] += hh
                yc[jdx] += kk
                lhs = F.f(r, split(ya)) + F.f(r, split(y))
                rhs = F.f(r, split(yb)) + F.f(r, split(yc))
                if lhs < rhs - _EPS:
                    return ("s-supermod", r, tuple(y), hh, kk, int(i), int(jdx))
            # mixed radius/value inequality with R >= r
            R = r + rng.uniform(0, 5)
            i = rng.integers(m)
            yb = y.copy()
            yb[i] += hh
            lhs = F.f(r, split(yb)) + F.f(R, split(y))
            rhs = F.f(R, split(yb)) + F.f(r, split(y))
            if lhs < rhs - _EPS:
                return ("r-supermod", r, R, tuple(y), hh, int(i))

        run("F0", f0)
        run("F1", f1)
        run("F3", f3)

        if F.f2_triple is not None:
            eps, r0, s0 = F.f2_triple

            def f2(rng):
                r = r0 + rng.uniform(0, 5)
                s = rng.uniform(0, s0, size=m)
                if F.f(r, split(s)) > eps * np.sum(s**2) ** (p / 2.0) + _EPS:
                    return (r, tuple(s))

            run("F2", f2)

    if model.G is not None:
        G, V = model.G, model.V

        def split(s):
            return [s[i] for i in range(m)]

        def g0(rng):
            s = rng.uniform(-3, 3, size=m)
            if G.g(split(s)) > G.g(split(np.abs(s))) + _EPS:
                return tuple(s)

        def g1(rng):
            s = rng.uniform(0, 3, size=m)
            val = G.g(split(s))
            bound = G.growth_K * sum(
                s[i] ** G.exponents_mu[i] for i in range(m))
            if val < -_EPS or val > bound + _EPS:
                return tuple(s)

        def g4(rng):
            y = rng.uniform(0, 3, size=m)
            hh, kk = rng.uniform(0, 2, size=2)
            i = rng.integers(m)
            yb = y.copy()
            yb[i] += hh
            if G.g(split(yb)) < G.g(split(y)) - _EPS:  # monotone
                return ("monotone", tuple(y), hh, int(i))
            if m >= 2:
                i, jdx = rng.choice(m, size=2, replace=False)
                ya, yb, yc = y.copy(), y.copy(), y.copy()
                ya[i] += hh
                ya[jdx] += kk
                yb[i] += hh
                yc[jdx] += kk
                lhs = G.g(split(ya)) + G.g(split(y))
                rhs = G.g(split(yb)) + G.g(split(yc))
                if lhs < rhs - _EPS:
                    return ("supermod", tuple(y), hh, kk, int(i), int(jdx))

        def g3(rng):
            r1 = rng.uniform(1e-3, 5)
            r2 = r1 + rng.uniform(0, 5)
            if V.v(np.array(r1)) < V.v(np.array(r2)) - _EPS:
                return (r1, r2)

        run("G0", g0)
        run("G1", g1)
        run("G3", g3)
        run("G4", g4)

    return AssumptionReport(checks, trials, seed)
