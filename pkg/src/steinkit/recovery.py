"""Density reconstruction from a Stein kernel, and the Stein operator.

A positive kernel tau on an interval determines the absolutely continuous
law it belongs to: with gamma(x) = m - x,

    p(x) = (C / tau(x)) * exp( integral from x0 to x of gamma(t)/tau(t) dt ),

where x0 is the zero of gamma (the mean) and C normalizes.  The associated
first-order Stein operator is (Lg)(x) = tau(x) g'(x) + (m - x) g(x), whose
expectation vanishes exactly at the recovered law.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .distributions import DEFAULT_CONFIG, QuadratureConfig
from .errors import NumericsError, SpecError
from .kernels import KernelFn, TestFunction

EXPONENT_FLOOR = math.log(1e-300)
_EDGE_INSET = 1e-9
_BREAK_GAP = 1e-12


def _segmented_grid(lo, hi, breaks, grid_size):
    """Uniform grids per smooth segment, split a hair on each side of every
    density breakpoint so no trapezoid cell straddles a jump."""
    inset = (hi - lo) * _EDGE_INSET
    gap = (hi - lo) * _BREAK_GAP
    cuts = [b for b in breaks if lo + inset < b < hi - inset]
    edges = [lo + inset]
    for b in cuts:
        edges.extend((b - gap, b + gap))
    edges.append(hi - inset)
    spans = [(a, b) for a, b in zip(edges[::2], edges[1::2])]
    total = sum(b - a for a, b in spans)
    parts = []
    for a, b in spans:
        n = max(8, int(round(grid_size * (b - a) / total)))
        parts.append(np.linspace(a, b, n))
    return np.concatenate(parts)


@dataclass(frozen=True, eq=False)
class RecoveredDensity:
    """Density values on a strictly increasing grid, trapezoid-normalized to
    unit mass; `normalizer` is the constant C and `anchor` the zero of gamma."""

    grid: np.ndarray
    values: np.ndarray
    normalizer: float
    anchor: float

    def __call__(self, t):
        return np.interp(t, self.grid, self.values, left=0.0, right=0.0)


def recover_density(kernel: KernelFn, m: float, grid_size: int = 4096,
                    config: QuadratureConfig = DEFAULT_CONFIG,
                    anchor: float = None) -> RecoveredDensity:
    """Reconstruct the density determined by a strictly positive kernel.

    The exponent integral of (m - t)/tau(t) is accumulated panel by panel
    with adaptive quadrature outward from the anchor x0 (by convention the
    zero of gamma, x0 = m; any other interior anchor yields the same density
    after normalization); once the exponent falls below the underflow floor
    the density is pinned to zero beyond.  The grid spans the kernel's
    domain, falling back to the kernel's sampled range when the domain is
    unbounded, with a hair of inset so tau stays positive at the first and
    last points.
    """
    lo = kernel.domain.lo if math.isfinite(kernel.domain.lo) else float(kernel.grid_t[0])
    hi = kernel.domain.hi if math.isfinite(kernel.domain.hi) else float(kernel.grid_t[-1])
    if not lo < m < hi:
        raise SpecError(f"mean m={m} lies outside the kernel domain ({lo}, {hi})")
    x0 = m if anchor is None else anchor
    if not lo < x0 < hi:
        raise SpecError(f"anchor x0={x0} lies outside the kernel domain ({lo}, {hi})")
    if grid_size < 16:
        raise SpecError(f"grid_size must be >= 16, got {grid_size}")

    for loc in kernel.atom_zeros:
        if lo < loc < hi:
            raise NumericsError(f"kernel has an interior zero at t={loc}; "
                                "the exponent integral diverges there")

    grid = _segmented_grid(lo, hi, kernel.density_breaks, grid_size)
    tau = np.array([kernel.evaluate(float(t)) for t in grid])
    # a density vanishing at an endpoint drives tau to zero faster than the
    # partial expectation can be resolved in floats; shave those edge points
    pos = np.nonzero(tau > 0.0)[0]
    if len(pos) < 16:
        raise NumericsError("kernel is not positive on enough of the grid")
    grid = grid[pos[0]:pos[-1] + 1]
    tau = tau[pos[0]:pos[-1] + 1]
    bad = np.nonzero(tau <= 0.0)[0]
    if len(bad):
        raise NumericsError(f"kernel is not strictly positive on the interior "
                            f"grid (first zero at t={grid[bad[0]]!r})")
    grid_size = len(grid)

    def psi(t):
        return (m - t) / kernel.evaluate(t)

    # cumulative exponent, anchored so that E(x0) = 0
    anchor_idx = int(np.searchsorted(grid, x0))
    anchor_idx = min(max(anchor_idx, 0), grid_size - 1)
    expo = np.empty(grid_size)
    expo[anchor_idx], _ = integrate.quad(psi, x0, grid[anchor_idx],
                                         epsabs=config.abs_tol, epsrel=config.rel_tol,
                                         limit=config.max_subdivisions)

    def sweep(indices):
        prev = anchor_idx
        dead = False
        for i in indices:
            if dead:
                expo[i] = -math.inf
                prev = i
                continue
            step, _ = integrate.quad(psi, grid[prev], grid[i],
                                     epsabs=config.abs_tol, epsrel=config.rel_tol,
                                     limit=config.max_subdivisions)
            expo[i] = expo[prev] + step
            if expo[i] < EXPONENT_FLOOR:
                expo[i] = -math.inf
                dead = True
            prev = i

    sweep(range(anchor_idx + 1, grid_size))
    sweep(range(anchor_idx - 1, -1, -1))

    raw = np.exp(expo) / tau
    total = float(np.trapezoid(raw, grid))
    if not (math.isfinite(total) and total > 0.0):
        raise NumericsError("recovered density could not be normalized")
    c = 1.0 / total
    return RecoveredDensity(grid=grid, values=raw * c, normalizer=c, anchor=x0)


def stein_operator(kernel: KernelFn, m: float, g: TestFunction, x: float) -> float:
    """(Lg)(x) = tau(x) g'(x) + (m - x) g(x)."""
    return kernel.evaluate(x) * float(g.f_prime(x)) + (m - x) * float(g.f(x))


def density_to_csv(density: RecoveredDensity) -> str:
    """CSV interchange form: header x,p, one row per grid point."""
    buf = io.StringIO()
    buf.write("x,p\n")
    for x, p in zip(density.grid, density.values):
        buf.write(f"{x:.17g},{p:.17g}\n")
    return buf.getvalue()
