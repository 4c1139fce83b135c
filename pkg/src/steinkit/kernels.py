"""Stein kernel existence, construction, and certification.

A Stein kernel for a square-integrable law mu with mean m is a function tau
with E[tau(X) f'(X)] = E[(X - m) f(X)] for every C^1 test function f with
bounded derivative.  A kernel exists iff the Lebesgue density of the
absolutely continuous part of mu is strictly positive (up to a null set) on
the open interval between the essential infimum and supremum.  When it
exists, the canonical version returned here is

    tau(t) = sigma^2 * q(t) * h(t) / p(t)   on the open support interval,

with q the non-zero-bias density, p the AC density, and h the
Radon-Nikodym factor of the AC part with respect to mu; tau vanishes off
the support interval, at every atom, and on the Cantor-type singular
support.  Purely atomic laws with two or more atoms admit no kernel, and
the over-determined moment system that proves it is exposed as an
inconsistency witness.
"""

from __future__ import annotations

import enum
import io
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .distributions import (
    DEFAULT_CONFIG,
    DistributionSpec,
    Exponential,
    Normal,
    QuadratureConfig,
    SupportInterval,
    Tabulated,
    Uniform,
    ac_density,
    ac_segments,
    cantor_in_support,
    cantor_in_support_vec,
    cantor_points,
    expect_cantor,
    integrate_ac,
    moments,
    partial_expectation,
    support,
    truncated_support,
    _piece_pdf,
    _piece_quantile_range,
    _piece_support,
    _positivity_intervals,
)
from .errors import DegenerateError, ExistenceError, NumericsError, SpecError

UNDERFLOW_FLOOR = 1e-300
FEASIBILITY_TOL = 1e-9


class Verdict(enum.Enum):
    EXISTS = "exists"
    NOT_EXISTS = "not_exists"
    DEGENERATE = "degenerate"


class Reason(enum.Enum):
    AC_PART_ZERO = "ac_part_zero"
    DENSITY_VANISHES = "density_vanishes_on_subinterval"
    PURELY_ATOMIC = "purely_atomic"
    SINGULAR_MASS_INFO = "singular_mass_blocks_nothing"


@dataclass(frozen=True)
class ExistenceReport:
    """Verdict of the existence gate with machine-readable failure reasons."""

    verdict: Verdict
    reasons: tuple = ()
    failing_region: tuple | None = None

    @property
    def exists(self) -> bool:
        return self.verdict is Verdict.EXISTS

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "reasons": [r.value for r in self.reasons],
            "failing_region": list(self.failing_region) if self.failing_region else None,
        }


@dataclass(frozen=True)
class TestFunction:
    """A C^1 test function with its exact derivative and a derivative bound
    valid on the working interval."""

    __test__ = False  # keep pytest from collecting this as a test class

    id: str
    f: Callable[[float], float]
    f_prime: Callable[[float], float]
    derivative_bound: float

    def derivative_mismatch(self, lo: float, hi: float, n: int = 100, seed: int = 0) -> float:
        """Largest relative error of f_prime against central differences of f
        at n random interior points.  Used to enforce the exactness invariant."""
        rng = np.random.default_rng(seed)
        ts = rng.uniform(lo, hi, size=n)
        h = 1e-6 * max(abs(lo), abs(hi), 1.0)
        worst = 0.0
        for t in ts:
            fd = (self.f(t + h) - self.f(t - h)) / (2.0 * h)
            exact = self.f_prime(t)
            scale = max(abs(exact), 1.0)
            worst = max(worst, abs(fd - exact) / scale)
        return worst


def _sech_squared(t):
    # 1/cosh^2 without overflowing cosh for large |t|
    e = np.exp(-2.0 * np.abs(t))
    return 4.0 * e / (1.0 + e) ** 2


def standard_test_functions(lo: float, hi: float) -> tuple:
    """The certification family {x, x^2, x^3, sin, cos, tanh, arctan} with
    derivative bounds taken over [lo, hi]."""
    c = max(abs(lo), abs(hi))
    return (
        TestFunction("x", lambda t: t, lambda t: 1.0, 1.0),
        TestFunction("x^2", lambda t: t * t, lambda t: 2.0 * t, 2.0 * c),
        TestFunction("x^3", lambda t: t ** 3, lambda t: 3.0 * t * t, 3.0 * c * c),
        TestFunction("sin", np.sin, np.cos, 1.0),
        TestFunction("cos", np.cos, lambda t: -np.sin(t), 1.0),
        TestFunction("tanh", np.tanh, _sech_squared, 1.0),
        TestFunction("arctan", np.arctan, lambda t: 1.0 / (1.0 + t * t), 1.0),
    )


@dataclass(frozen=True)
class RadonNikodymFactor:
    """Pointwise Radon-Nikodym factor h = d(mu_ac)/d(mu) for specs in this
    universe: 0 at atoms and on Cantor supports, 1 elsewhere."""

    atom_locations: tuple
    cantor_intervals: tuple

    def __call__(self, t: float) -> float:
        if t in self.atom_locations:
            return 0.0
        for lo, hi in self.cantor_intervals:
            if cantor_in_support(t, lo, hi):
                return 0.0
        return 1.0


def radon_nikodym_factor(spec: DistributionSpec) -> RadonNikodymFactor:
    return RadonNikodymFactor(
        atom_locations=tuple(a.location for a in spec.atoms),
        cantor_intervals=tuple((c.lo, c.hi) for c in spec.cantor_parts),
    )


# ---------------------------------------------------------------------------
# Existence gate
# ---------------------------------------------------------------------------

def _merge_intervals(intervals):
    """Merge open intervals whose closures touch; single shared endpoints are
    Lebesgue-null and do not break coverage."""
    out = []
    for lo, hi in sorted(intervals):
        if out and lo <= out[-1][1]:
            out[-1][1] = max(out[-1][1], hi)
        else:
            out.append([lo, hi])
    return [(lo, hi) for lo, hi in out]


def existence_check(spec: DistributionSpec,
                    config: QuadratureConfig = DEFAULT_CONFIG) -> ExistenceReport:
    """Decide whether a Stein kernel exists for the spec.

    The gate tests whether the mixture's AC density is strictly positive up
    to a Lebesgue-null set on the open interval I between the essential
    infimum and supremum: the union of the pieces' positivity intervals must
    cover I with no gap of positive length.  Verdicts: a single atom is
    degenerate; anything else without that coverage has no kernel.
    """
    sup = support(spec)
    if sup.is_degenerate:
        return ExistenceReport(Verdict.DEGENERATE)
    if not spec.ac_pieces:
        reason = Reason.PURELY_ATOMIC if not spec.cantor_parts else Reason.AC_PART_ZERO
        return ExistenceReport(Verdict.NOT_EXISTS, (reason,))

    covered = _merge_intervals(
        iv for c in spec.ac_pieces for iv in _positivity_intervals(c))

    gap = None
    if covered[0][0] > sup.lo:
        gap = (sup.lo, covered[0][0])
    else:
        reach = covered[0][1]
        for lo, hi in covered[1:]:
            if lo > reach and reach < sup.hi:
                gap = (reach, min(lo, sup.hi))
                break
            reach = max(reach, hi)
        if gap is None and reach < sup.hi:
            gap = (reach, sup.hi)

    if gap is None:
        return ExistenceReport(Verdict.EXISTS)
    reasons = [Reason.DENSITY_VANISHES]
    if spec.singular_mass > 0:
        reasons.append(Reason.SINGULAR_MASS_INFO)
    return ExistenceReport(Verdict.NOT_EXISTS, tuple(reasons), failing_region=gap)


# ---------------------------------------------------------------------------
# Non-zero-bias density
# ---------------------------------------------------------------------------

def nz_density(spec: DistributionSpec, t,
               config: QuadratureConfig = DEFAULT_CONFIG):
    """Density q(t) = sigma^-2 E[(X - m) 1{X >= t}] of the non-zero-biased
    distribution; vanishes outside the closed support interval.

    Defined for every non-degenerate spec, whether or not a kernel exists.
    Accepts scalars or arrays.
    """
    mom = moments(spec)
    if mom.variance <= 0.0:
        raise DegenerateError("non-zero-bias density undefined for a point mass")
    sup = support(spec)
    arr = np.asarray(t, dtype=float)
    q = partial_expectation(spec, arr) / mom.variance
    q = np.where((arr < sup.lo) | (arr > sup.hi), 0.0, np.maximum(q, 0.0))
    if np.ndim(t) == 0:
        return float(q)
    return q


# ---------------------------------------------------------------------------
# Kernel construction
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class KernelFn:
    """A Stein kernel in the canonical version: zero off the open support
    interval, zero at every atom, zero on the Cantor-type singular support.

    `form` is one of constant | polynomial-over-interval | linear (single
    closed-form pieces) or grid (general mixtures).  Evaluation always goes
    through the generating rule in `_fn`, so grid kernels are exact at and
    between their export abscissae; `grid_t`/`grid_tau` are the canonical
    sampled representation used by the CSV interchange format.
    """

    domain: SupportInterval
    form: str
    params: dict
    grid_t: np.ndarray
    grid_tau: np.ndarray
    atom_zeros: tuple
    cantor_intervals: tuple = ()
    density_breaks: tuple = ()
    _fn: Callable = field(default=None, repr=False)
    _fn_vec: Callable = field(default=None, repr=False)

    def evaluate(self, t: float) -> float:
        """Kernel value at a point, applying the canonical version rules."""
        if not self.domain.lo < t < self.domain.hi:
            return 0.0
        if t in self.atom_zeros:
            return 0.0
        for lo, hi in self.cantor_intervals:
            if cantor_in_support(t, lo, hi):
                return 0.0
        return max(0.0, float(self._fn(t)))

    __call__ = evaluate

    def values(self, ts) -> np.ndarray:
        """Vectorized pointwise evaluation with all version rules applied."""
        ts = np.asarray(ts, dtype=float)
        out = self.values_ae(ts)
        for loc in self.atom_zeros:
            out = np.where(ts == loc, 0.0, out)
        for lo, hi in self.cantor_intervals:
            out = np.where(cantor_in_support_vec(ts, lo, hi), 0.0, out)
        return out

    def values_ae(self, ts) -> np.ndarray:
        """Vectorized evaluation of the Lebesgue-a.e. version: the pointwise
        zeros on atoms and the Cantor set (both null sets) are not applied,
        which is exactly what integrals against Lebesgue measure need."""
        ts = np.asarray(ts, dtype=float)
        fn = self._fn_vec if self._fn_vec is not None else np.vectorize(self._fn)
        out = np.maximum(np.asarray(fn(ts), dtype=float), 0.0)
        return np.where((ts <= self.domain.lo) | (ts >= self.domain.hi), 0.0, out)

    def descriptor(self) -> dict | None:
        """JSON descriptor for closed forms; None for grid kernels."""
        if self.form == "grid":
            return None
        return {"form": self.form, "params": dict(self.params)}


def _chebyshev_interior(lo: float, hi: float, n: int) -> np.ndarray:
    """n Chebyshev-clustered points strictly inside (lo, hi); clustering near
    the endpoints keeps the q/p ratio well resolved where p may vanish."""
    k = np.arange(n)
    theta = (2 * k + 1) * math.pi / (2 * n)
    return 0.5 * (lo + hi) - 0.5 * (hi - lo) * np.cos(theta)


def stein_kernel(spec: DistributionSpec, grid_size: int = 4096,
                 config: QuadratureConfig = DEFAULT_CONFIG) -> KernelFn:
    """Construct the canonical Stein kernel for a spec that passes the
    existence gate.

    Single uniform, normal, and exponential pieces take their closed forms
    ((t-lo)(hi-t)/2 rescaled to the interval, the constant variance, and
    t/rate respectively); every other spec is built from the general rule
    sigma^2 q h / p evaluated exactly, and sampled on `grid_size`
    Chebyshev-clustered points spanning the (tail-truncated) support.
    """
    if grid_size < 16:
        raise SpecError(f"grid_size must be >= 16, got {grid_size}")
    report = existence_check(spec, config)
    if report.verdict is Verdict.DEGENERATE:
        raise DegenerateError("a point mass admits the trivial kernel only; "
                              "no grid construction is defined")
    if report.verdict is not Verdict.EXISTS:
        raise ExistenceError(
            f"no Stein kernel exists: {', '.join(r.value for r in report.reasons)}",
            report=report)

    sup = support(spec)
    lo, hi = truncated_support(spec, config.tail_quantile)
    atom_zeros = tuple(a.location for a in spec.atoms)
    cantor_iv = tuple((c.lo, c.hi) for c in spec.cantor_parts)
    breaks = set(atom_zeros)
    for c in spec.ac_pieces:
        plo, phi = _piece_support(c)
        breaks.update(b for b in (plo, phi) if math.isfinite(b))
        if isinstance(c, Tabulated):
            breaks.update(float(g) for g in c.grid)
    density_breaks = tuple(sorted(b for b in breaks if lo < b < hi))

    if len(spec.components) == 1:
        c = spec.components[0]
        fn = fn_vec = None
        if isinstance(c, Uniform):
            a, b = c.lo, c.hi
            fn = fn_vec = lambda t: 0.5 * (t - a) * (b - t)
            form, params = "polynomial-over-interval", {"lo": a, "hi": b}
        elif isinstance(c, Normal):
            v = c.sd * c.sd
            fn = lambda t: v
            fn_vec = lambda ts: np.full_like(ts, v)
            form, params = "constant", {"value": v}
        elif isinstance(c, Exponential):
            r = c.rate
            fn = fn_vec = lambda t: t / r
            form, params = "linear", {"slope": 1.0 / r, "origin": 0.0}
        if fn is not None:
            grid_t = _chebyshev_interior(lo, hi, grid_size)
            grid_tau = np.maximum(fn_vec(grid_t), 0.0)
            return KernelFn(domain=SupportInterval(sup.lo, sup.hi), form=form,
                            params=params, grid_t=grid_t, grid_tau=grid_tau,
                            atom_zeros=atom_zeros, density_breaks=density_breaks,
                            _fn=fn, _fn_vec=fn_vec)

    h = radon_nikodym_factor(spec)

    def fn(t):
        # sigma^2 * q / p * h with sigma^2 q written as the partial expectation
        pe = partial_expectation(spec, t)
        p = ac_density(spec, t)
        if p < UNDERFLOW_FLOOR or not math.isfinite(p):
            return 0.0
        return max(pe, 0.0) / p * h(t)

    def fn_vec(ts):
        pe = np.maximum(partial_expectation(spec, ts), 0.0)
        p = ac_density(spec, ts)
        out = np.zeros_like(pe)
        ok = p >= UNDERFLOW_FLOOR
        out[ok] = pe[ok] / p[ok]
        return out

    grid_t = _chebyshev_interior(lo, hi, grid_size)
    grid_t = np.array([t for t in grid_t if t not in atom_zeros])
    dens = ac_density(spec, grid_t)
    bad = np.nonzero(dens < UNDERFLOW_FLOOR)[0]
    if len(bad):
        raise NumericsError(
            f"AC density underflows below {UNDERFLOW_FLOOR} inside the support "
            f"interval at t={grid_t[bad[0]]!r}")
    pe = np.maximum(partial_expectation(spec, grid_t), 0.0)
    grid_tau = pe / dens
    # the vectorized ratio misses the pointwise h-zeros; restore them
    for i, t in enumerate(grid_t):
        if h(float(t)) == 0.0:
            grid_tau[i] = 0.0
    return KernelFn(domain=SupportInterval(sup.lo, sup.hi), form="grid", params={},
                    grid_t=grid_t, grid_tau=grid_tau, atom_zeros=atom_zeros,
                    cantor_intervals=cantor_iv, density_breaks=density_breaks,
                    _fn=fn, _fn_vec=fn_vec)


# ---------------------------------------------------------------------------
# Certification and statistics
# ---------------------------------------------------------------------------

COMPOSITE_POINTS = 1 << 18


def integrate_kernel_ac(spec: DistributionSpec, kernel: KernelFn,
                        weight: Callable = None, weight_vec: Callable = None,
                        lo: float = -math.inf, hi: float = math.inf,
                        extra_breaks=(),
                        config: QuadratureConfig = DEFAULT_CONFIG) -> float:
    """integral of tau(t) * w(t) * p(t) dt over [lo, hi].

    Smooth specs go through the adaptive engine.  Cantor-bearing specs use a
    fine composite trapezoid per smooth segment instead: there the kernel
    inherits the Hoelder modulus of the devil's staircase, which defeats
    adaptive error estimation but averages out on uniform grids.
    """
    if not spec.cantor_parts:
        w = weight if weight is not None else (lambda t: 1.0)
        return integrate_ac(spec, lambda t: kernel.evaluate(t) * float(w(t)),
                            lo=lo, hi=hi, extra_breaks=extra_breaks, config=config)
    total = 0.0
    for c, sa, sb in ac_segments(spec, lo, hi, extra_breaks):
        qa, qb = _piece_quantile_range(c, config.tail_quantile)
        sa, sb = max(sa, qa), min(sb, qb)
        if not sa < sb:
            continue
        ts = np.linspace(sa, sb, COMPOSITE_POINTS + 1)
        vals = kernel.values_ae(ts)
        if weight_vec is not None:
            vals = vals * np.asarray(weight_vec(ts), dtype=float)
        total += c.weight * float(np.trapezoid(vals * _piece_pdf(c, ts), ts))
    return total


def _kernel_singular_continuous_term(spec: DistributionSpec, kernel: KernelFn,
                                     weight_vec: Callable = None,
                                     lo: float = -math.inf, hi: float = math.inf,
                                     config: QuadratureConfig = DEFAULT_CONFIG) -> float:
    """Contribution of the Cantor parts to integrals of tau * w against mu.

    A Cantor support registered on the kernel carries value zero by the
    version convention, so it contributes exactly nothing; an unregistered
    (caller-built) kernel is sampled at construction-cell left endpoints,
    which are points of the Cantor set itself.  Numeric set-membership is
    deliberately not used here: iterated ternary maps amplify float error,
    so deep cell endpoints would drift off the set.
    """
    total = 0.0
    for c in spec.cantor_parts:
        if (c.lo, c.hi) in kernel.cantor_intervals:
            continue
        span = c.hi - c.lo
        depth = min(config.cantor_depth(span), 22)
        pts = c.lo + span * cantor_points(depth, endpoint="left")
        sel = (pts >= lo) & (pts <= hi)
        if not sel.any():
            continue
        vals = kernel.values_ae(pts[sel])
        for loc in kernel.atom_zeros:
            vals = np.where(pts[sel] == loc, 0.0, vals)
        if weight_vec is not None:
            vals = vals * np.asarray(weight_vec(pts[sel]), dtype=float)
        total += c.weight * float(np.sum(vals)) / len(pts)
    return total


def stein_residual(spec: DistributionSpec, kernel: KernelFn, tf: TestFunction,
                   config: QuadratureConfig = DEFAULT_CONFIG) -> float:
    """E[tau(X) f'(X)] - E[(X - m) f(X)] for the given kernel and test
    function; a valid kernel drives this below the certification tolerance.

    The left side integrates the kernel against the AC density plus atom
    terms (identically zero for the canonical version) plus the
    singular-continuous terms.  The right side combines quadrature, atom
    sums, and the Cantor cell recursion.
    """
    m = moments(spec).mean
    lhs = integrate_kernel_ac(spec, kernel,
                              weight=lambda t: float(tf.f_prime(t)),
                              weight_vec=tf.f_prime, config=config)
    for a in spec.atoms:
        lhs += a.mass * kernel.evaluate(a.location) * float(tf.f_prime(a.location))
    lhs += _kernel_singular_continuous_term(spec, kernel, weight_vec=tf.f_prime,
                                            config=config)

    rhs = integrate_ac(spec, lambda t: (t - m) * float(tf.f(t)), config=config)
    for a in spec.atoms:
        rhs += a.mass * (a.location - m) * float(tf.f(a.location))
    if spec.cantor_parts:
        rhs += expect_cantor(spec, lambda xs: (xs - m) * np.asarray(tf.f(xs), dtype=float),
                             config=config, endpoint="mid")
    return lhs - rhs


def kernel_stats(spec: DistributionSpec, kernel: KernelFn,
                 config: QuadratureConfig = DEFAULT_CONFIG) -> tuple:
    """(E[tau(X)], Var(tau(X))) under the mixture.

    Atoms and the singular support carry kernel value zero in the canonical
    version, so they contribute only to the spread around the mean.
    """
    def moment(weight, weight_vec):
        val = integrate_kernel_ac(spec, kernel, weight=weight,
                                  weight_vec=weight_vec, config=config)
        for a in spec.atoms:
            w = 1.0 if weight is None else weight(a.location)
            val += a.mass * kernel.evaluate(a.location) * w
        val += _kernel_singular_continuous_term(spec, kernel, weight_vec=weight_vec,
                                                config=config)
        return val

    mean_tau = moment(None, None)
    second = moment(lambda t: kernel.evaluate(t), kernel.values_ae)
    return mean_tau, max(second - mean_tau * mean_tau, 0.0)


def kernel_measure_integral(spec: DistributionSpec, kernel: KernelFn,
                            lo: float, hi: float,
                            config: QuadratureConfig = DEFAULT_CONFIG) -> float:
    """integral of tau over [lo, hi] against the full mixture measure."""
    val = integrate_kernel_ac(spec, kernel, lo=lo, hi=hi, config=config)
    for a in spec.atoms:
        if lo <= a.location <= hi:
            val += a.mass * kernel.evaluate(a.location)
    val += _kernel_singular_continuous_term(spec, kernel, lo=lo, hi=hi, config=config)
    return val


def nz_mass(spec: DistributionSpec, lo: float, hi: float,
            config: QuadratureConfig = DEFAULT_CONFIG) -> float:
    """integral of the non-zero-bias density q over [lo, hi].

    Computed without quadrature of q itself: Fubini turns the integral into
    sigma^-2 E[(X - m) (clamp(X, lo, hi) - lo)], an expectation of a
    piecewise-smooth function that every component evaluates accurately.
    """
    mom = moments(spec)
    if mom.variance <= 0.0:
        raise DegenerateError("non-zero-bias density undefined for a point mass")
    m = mom.mean

    def g(x):
        return (x - m) * (min(max(x, lo), hi) - lo)

    def g_vec(xs):
        return (xs - m) * (np.clip(xs, lo, hi) - lo)

    total = integrate_ac(spec, g, extra_breaks=(lo, hi), config=config)
    for a in spec.atoms:
        total += a.mass * g(a.location)
    total += expect_cantor(spec, g_vec, config=config, endpoint="mid")
    return total / mom.variance


# ---------------------------------------------------------------------------
# Discrete inconsistency witness
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class InconsistencyWitness:
    """Least-squares verdict on the moment system a purely atomic law imposes
    on its would-be kernel values.

    residual_norm > 0 iff the system is infeasible.  For a feasible system
    (single atoms) `assignment` maps each atom location to its kernel value.
    For two symmetric atoms, `functions` and `implied_values` name the two
    monomials whose equations pin the same linear combination of kernel
    values to incompatible constants.
    """

    residual_norm: float
    functions: tuple | None = None
    implied_values: tuple | None = None
    assignment: dict | None = None

    @property
    def feasible(self) -> bool:
        return self.assignment is not None


def discrete_witness(spec: DistributionSpec) -> InconsistencyWitness:
    """Build and solve the moment system for a purely atomic spec.

    With k atoms, the Stein identity against the monomials x^j for
    j = 1..k+1 gives k+1 linear equations in the k unknown kernel values;
    the least-squares residual certifies (in)feasibility.  Two equal-mass
    atoms at +/-c yield the classic pair of incompatible implied values for
    tau(c) + tau(-c), reported via the j = 1 and j = 3 equations.
    """
    atoms = spec.atoms
    if len(atoms) != len(spec.components):
        raise SpecError("discrete witness is defined for purely atomic specs")
    k = len(atoms)
    locs = np.array([a.location for a in atoms])
    masses = np.array([a.mass for a in atoms])
    m = float(np.sum(masses * locs))

    rows = []
    rhs = []
    for j in range(1, k + 2):
        rows.append(masses * j * locs ** (j - 1))
        rhs.append(float(np.sum(masses * (locs - m) * locs ** j)))
    a_mat = np.vstack(rows)
    b_vec = np.array(rhs)

    sol, _, _, _ = np.linalg.lstsq(a_mat, b_vec, rcond=None)
    residual = float(np.linalg.norm(a_mat @ sol - b_vec))

    scale = max(1.0, float(np.max(np.abs(b_vec))))
    if residual <= FEASIBILITY_TOL * scale:
        assignment = {float(x): float(v) + 0.0 for x, v in zip(locs, sol)}
        return InconsistencyWitness(residual_norm=0.0, assignment=assignment)

    functions = implied = None
    if k == 2:
        (x1, p1), (x2, p2) = sorted(zip(locs, masses))
        if math.isclose(x2, -x1, rel_tol=1e-12, abs_tol=0.0) and math.isclose(p1, p2, rel_tol=1e-12):
            # rows j=1 and j=3 both constrain tau(x1) + tau(x2)
            functions = ("x^1", "x^3")
            implied = (b_vec[0] / a_mat[0, 0], b_vec[2] / a_mat[2, 0])
    return InconsistencyWitness(residual_norm=residual, functions=functions,
                                implied_values=implied)


# ---------------------------------------------------------------------------
# Interchange formats
# ---------------------------------------------------------------------------

def kernel_to_csv(kernel: KernelFn) -> str:
    """CSV interchange form: header t,tau, one row per grid point, then one
    row per atom with tau = 0 and a trailing `# atom` comment."""
    buf = io.StringIO()
    buf.write("t,tau\n")
    for t, v in zip(kernel.grid_t, kernel.grid_tau):
        buf.write(f"{t:.17g},{v:.17g}\n")
    for loc in kernel.atom_zeros:
        buf.write(f"{loc:.17g},0 # atom\n")
    return buf.getvalue()
