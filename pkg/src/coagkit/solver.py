"""Time integration of the coagulation equations with truncated kernels.

The right-hand side is assembled as ``max(gain, 0) - loss`` (the
positivity-preserving split), with merger products that would exceed the
grid handled by one of two boundary modes:

* ``conservative`` -- overflowing reactions are suppressed entirely, so the
  on-grid mass is constant by construction;
* ``absorbing`` -- overflowing reactions fire, the reactants are consumed,
  and the product mass accumulates in an explicit gel-mass variable, so
  grid mass plus gel mass is constant.

Separable kernels (constant, additive, multiplicative, two-exponent sums,
product kernels, Brownian) on integer grids use an FFT fast path for the
gain convolution and prefix sums for the loss; everything else falls back
to a dense pairwise path.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, replace

import numpy as np
from scipy.signal import fftconvolve

from .errors import DomainError, GridError, UnsupportedFamilyError
from .grids import MomentSeries, SizeDistribution, SizeGrid, clamp_negatives
from .kernels import KernelSpec

__all__ = [
    "SolverConfig",
    "RateSplit",
    "Trajectory",
    "rates",
    "fast_gain",
    "integrate",
]

_MATRIX_LIMIT = 4096  # dense pairwise path refuses larger grids

# FFT round-off contract: entries of the convolution smaller than
# _FFT_ERR_FACTOR * eps * log2(2M) * ||u||2 ||v||2 / _REL_TARGET are
# recomputed by direct summation so the relative error stays below
# _REL_TARGET.  The factor is ~10x above the observed worst case.
_FFT_ERR_FACTOR = 32.0
_REL_TARGET = 1e-13

MOMENT_ORDERS = (0.0, 0.5, 1.0, 2.0)


# ---------------------------------------------------------------------------
# Configuration and results
# ---------------------------------------------------------------------------

@dataclass
class SolverConfig:
    kernel: KernelSpec
    t_end: float
    snapshot_times: tuple | None = None
    scheme: str = "rk45"            # "rk45" | "rk4"
    dt: float | None = None         # fixed step for rk4
    rel_tol: float = 1e-8
    abs_tol: float = 1e-12
    boundary: str = "absorbing"     # "absorbing" | "conservative"
    truncation_n: float | None = None
    truncation_mode: str = "cap"    # "cap" | "product_cap"
    use_fast_gain: bool | None = None  # None = automatic

    def __post_init__(self):
        if self.t_end <= 0:
            raise DomainError("t_end must be positive")
        if self.scheme not in ("rk45", "rk4"):
            raise DomainError(f"unknown scheme {self.scheme!r}")
        if self.scheme == "rk4" and (self.dt is None or self.dt <= 0):
            raise DomainError("rk4 needs a positive fixed dt")
        if self.scheme == "rk45" and (self.rel_tol <= 0 or self.abs_tol <= 0):
            raise DomainError("rk45 tolerances must be positive")
        if self.boundary not in ("absorbing", "conservative"):
            raise DomainError(f"unknown boundary mode {self.boundary!r}")
        if self.snapshot_times is not None:
            st = tuple(float(t) for t in self.snapshot_times)
            if not st or any(t <= 0 or t > self.t_end for t in st):
                raise DomainError("snapshot times must lie in (0, t_end]")
            if any(b <= a for a, b in zip(st, st[1:])):
                raise DomainError("snapshot times must be strictly increasing")
            self.snapshot_times = st

    def resolved_snapshots(self) -> tuple:
        if self.snapshot_times is not None:
            return self.snapshot_times
        return tuple(np.linspace(0.0, self.t_end, 11)[1:])


@dataclass
class RateSplit:
    """Gain/loss split of the right-hand side, in density-rate units."""

    gain: np.ndarray
    loss: np.ndarray
    loss_factor: np.ndarray
    gel_rate: float = 0.0


@dataclass
class Trajectory:
    snapshots: list
    moments: MomentSeries
    step_log: dict
    config: SolverConfig | None = None

    @property
    def flagged(self) -> bool:
        return self.step_log.get("flag") is not None

    @property
    def grid(self) -> SizeGrid:
        return self.snapshots[0].grid

    @property
    def times(self) -> np.ndarray:
        return self.moments.times

    def initial(self) -> SizeDistribution:
        return self.snapshots[0]

    def moments_csv(self) -> str:
        lines = ["t,M0,M05,M1,M2,gel_mass"]
        m = self.moments
        for k, t in enumerate(m.times):
            lines.append(",".join(repr(float(v)) for v in (
                t, m[0.0][k], m[0.5][k], m[1.0][k], m[2.0][k], m.gel_mass[k])))
        return "\n".join(lines) + "\n"

    def snapshots_csv(self) -> str:
        lines = ["t,pivot,width,density"]
        for snap in self.snapshots:
            t = repr(float(snap.time))
            for p, w, d in zip(snap.grid.pivots, snap.grid.widths, snap.density):
                lines.append(f"{t},{float(p)!r},{float(w)!r},{float(d)!r}")
        return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Fast non-negative convolution with a per-entry relative guarantee
# ---------------------------------------------------------------------------

def _conv_prefix(u: np.ndarray, v: np.ndarray, n_keep: int, refine: bool) -> np.ndarray:
    """First ``n_keep`` entries of the linear convolution of u and v (>= 0).

    The bulk comes from an FFT product.  Entries below the FFT round-off
    floor are indistinguishable from zero and are zeroed outright: leaving
    the (sign-biased) noise in place seeds spurious tail growth in the
    solver.  With ``refine`` every entry small enough that the floor could
    exceed ``_REL_TARGET`` of its value is recomputed by direct summation,
    which restores exact zeros and the per-entry relative contract.
    """
    m = u.size + v.size - 1
    if m < 64:
        return np.convolve(u, v)[:n_keep]
    c = fftconvolve(u, v)[:n_keep]
    s2 = float(np.linalg.norm(u) * np.linalg.norm(v))
    floor = _FFT_ERR_FACTOR * np.finfo(float).eps * math.log2(2.0 * m) * s2
    if refine:
        for k in np.nonzero(c < floor / _REL_TARGET)[0]:
            i0 = max(0, k - v.size + 1)
            i1 = min(k + 1, u.size)
            c[k] = float(np.dot(u[i0:i1], v[k - i1 + 1: k - i0 + 1][::-1]))
    else:
        c[c < floor] = 0.0
    return c


def _separable_terms(kernel: KernelSpec, x: np.ndarray) -> list[tuple[np.ndarray, np.ndarray]]:
    """K(x,y) = sum of a(x) b(y) over the returned (a, b) pairs, or raise."""
    fam = kernel.family
    ones = np.ones_like(x)
    if fam == "constant":
        return [(kernel.params[0] * ones, ones)]
    if fam == "additive":
        return [(x, ones), (ones, x)]
    if fam == "multiplicative":
        return [(x, x)]
    if fam == "power_sum":
        a, b = kernel.params
        return [(x**a, x**b), (x**b, x**a)]
    if fam == "brownian":
        cb = np.cbrt(x)
        return [(2.0 * ones, ones), (cb, 1.0 / cb), (1.0 / cb, cb)]
    if fam == "product":
        rate = kernel.rate
        if kernel.cap is not None and kernel.cap_mode == "product":
            rate = rate.truncated(kernel.cap)
        r = np.asarray(rate(x))
        return [(r, r)]
    raise UnsupportedFamilyError(f"kernel family {fam!r} has no separable form")


def _kernel_grid_bound(kernel: KernelSpec, grid: SizeGrid) -> float:
    """Upper bound of the uncapped kernel over grid x grid (corner scan)."""
    raw = replace(kernel, cap=None)
    if kernel.family == "tabulated":
        return float(np.max(kernel.table[1]))
    lo, hi = grid.pivots[0], grid.pivots[-1]
    corners = np.array([lo, hi])
    xx, yy = np.meshgrid(corners, corners)
    return float(np.max(raw.eval(xx, yy)))


def _fast_path_ok(kernel: KernelSpec, grid: SizeGrid) -> bool:
    if grid.kind != "discrete":
        return False
    if kernel.family in ("tabulated",):
        return False
    if kernel.cap is None or kernel.cap_mode == "product":
        return True
    # a pointwise cap is compatible only if it never binds on the grid
    return kernel.cap >= _kernel_grid_bound(kernel, grid) * (1.0 - 1e-12)


def fast_gain(dist: SizeDistribution, kernel: KernelSpec, refine: bool = True) -> np.ndarray:
    """Gain term on an integer grid via fast convolution.

    Returns ``gain_i = 0.5 * sum_{j+k=i} K(j,k) f_j f_k`` for i = 1..N,
    agreeing with the direct pairwise sum to 1e-12 relative entrywise.
    Requires a separable family; a pointwise kernel cap that binds on the
    grid destroys separability and is refused.
    """
    if dist.grid.kind != "discrete":
        raise GridError("fast_gain requires a discrete integer grid")
    if not _fast_path_ok(kernel, dist.grid):
        raise UnsupportedFamilyError(
            "fast_gain needs a separable kernel whose cap does not bind on the grid")
    x = dist.grid.pivots
    f = dist.density
    n = f.size
    gain = np.zeros(n)
    for a, b in _separable_terms(kernel, x):
        conv = _conv_prefix(a * f, b * f, n - 1, refine)
        gain[1:] += conv
    gain *= 0.5
    return gain


# ---------------------------------------------------------------------------
# Reference pairwise rates (any family, both grid kinds)
# ---------------------------------------------------------------------------

class _PairTables:
    """Precomputed pair-interaction tables for the dense path."""

    def __init__(self, grid: SizeGrid, kernel: KernelSpec, boundary: str):
        m = grid.size
        if m > _MATRIX_LIMIT:
            raise GridError(
                f"dense pairwise path limited to {_MATRIX_LIMIT} cells; "
                "use a separable kernel family on a discrete grid")
        p = grid.pivots
        self.grid = grid
        self.boundary = boundary
        self.kmat = np.asarray(kernel.eval(p[:, None], p[None, :]))
        v = p[:, None] + p[None, :]
        if grid.kind == "discrete":
            # product size (i0+1) + (j0+1) lands exactly on cell i0 + j0 + 1
            self.overflow = v > grid.n + 1e-9
            s = np.add.outer(np.arange(m), np.arange(m)) + 1
            self.idx_lo = np.minimum(s, m - 1)
            self.w_lo = np.ones((m, m))
            self.idx_hi = self.idx_lo
            self.w_hi = np.zeros((m, m))
        else:
            self.overflow = v > p[-1] * (1 + 1e-12)
            vc = np.clip(v, p[0], p[-1])
            j = np.clip(np.searchsorted(p, vc) - 1, 0, m - 2)
            lo, hi = p[j], p[j + 1]
            t = np.clip((vc - lo) / (hi - lo), 0.0, 1.0)
            self.idx_lo = j
            self.idx_hi = j + 1
            self.w_lo = 1.0 - t
            self.w_hi = t
        self.react = ~self.overflow if boundary == "conservative" else np.ones_like(self.overflow)
        self.kmat_react = self.kmat * self.react
        self.pair_mass = v

    def split(self, density: np.ndarray) -> RateSplit:
        grid = self.grid
        n_cells = grid.size
        number = density * grid.widths
        pair = self.kmat * np.outer(number, number)       # ordered pair rates
        pair_react = pair * self.react
        on_grid = pair_react * ~self.overflow
        w = (on_grid * self.w_lo).ravel()
        gain_num = 0.5 * np.bincount(self.idx_lo.ravel(), weights=w, minlength=n_cells)
        w = (on_grid * self.w_hi).ravel()
        gain_num += 0.5 * np.bincount(self.idx_hi.ravel(), weights=w, minlength=n_cells)
        loss_factor = self.kmat_react @ number
        gain = gain_num / grid.widths
        loss = density * loss_factor
        if self.boundary == "absorbing":
            gel = 0.5 * float(np.sum(pair * self.overflow * self.pair_mass))
        else:
            gel = 0.0
        return RateSplit(gain=gain, loss=loss, loss_factor=loss_factor, gel_rate=gel)


def rates(dist: SizeDistribution, kernel: KernelSpec,
          boundary: str = "conservative") -> RateSplit:
    """Gain/loss split of the coagulation operator at one state.

    Reference pairwise implementation: exact index sums on discrete grids,
    two-point number/mass apportionment of merger products on sectional
    grids.
    """
    if boundary not in ("absorbing", "conservative"):
        raise DomainError(f"unknown boundary mode {boundary!r}")
    tables = _PairTables(dist.grid, kernel, boundary)
    return tables.split(dist.density)


# ---------------------------------------------------------------------------
# Right-hand-side operators for the integrator
# ---------------------------------------------------------------------------

class _SeparableRhs:
    """Fast RHS for separable kernels on a discrete grid.

    State vector: N densities followed by the gel mass.
    """

    def __init__(self, grid: SizeGrid, kernel: KernelSpec, boundary: str,
                 refine: bool = False):
        self.x = grid.pivots
        self.n = grid.n
        self.boundary = boundary
        self.refine = refine
        self.terms = _separable_terms(kernel, self.x)
        self.evals = 0

    def __call__(self, t: float, y: np.ndarray) -> np.ndarray:
        self.evals += 1
        n = self.n
        x = self.x
        f = y[:n]
        gain = np.zeros(n)
        loss_factor = np.zeros(n)
        gel_rate = 0.0
        for a, b in self.terms:
            af = a * f
            bf = b * f
            gain[1:] += _conv_prefix(af, bf, n - 1, self.refine)
            if self.boundary == "conservative":
                # sum over partners j <= n - i
                prefix = np.concatenate(([0.0], np.cumsum(bf)))
                loss_factor += a * prefix[n - np.arange(1, n + 1)]
            else:
                loss_factor += a * float(np.sum(bf))
                # overflow mass flux: partners k > n - j, via suffix sums,
                # so the rate is a sum of non-negative products (exactly
                # zero until the tail is populated)
                tb = np.cumsum(bf[::-1])
                txb = np.cumsum((x * bf)[::-1])
                gel_rate += 0.5 * float(np.dot(af, x * tb + txb))
        gain *= 0.5
        loss = f * loss_factor
        fdot = np.maximum(gain, 0.0) - loss
        out = np.empty(n + 1)
        out[:n] = fdot
        out[n] = gel_rate
        return out


class _DenseRhs:
    """Pairwise RHS for arbitrary kernels (both grid kinds)."""

    def __init__(self, grid: SizeGrid, kernel: KernelSpec, boundary: str):
        self.tables = _PairTables(grid, kernel, boundary)
        self.grid = grid
        self.evals = 0

    def __call__(self, t: float, y: np.ndarray) -> np.ndarray:
        self.evals += 1
        m = self.grid.size
        split = self.tables.split(y[:m])
        out = np.empty(m + 1)
        out[:m] = np.maximum(split.gain, 0.0) - split.loss
        if self.tables.boundary == "absorbing":
            p, w = self.grid.pivots, self.grid.widths
            out[m] = float(np.dot(p * w, split.loss - split.gain))
        else:
            out[m] = 0.0
        return out


# ---------------------------------------------------------------------------
# Embedded Dormand-Prince 5(4) and classical RK4
# ---------------------------------------------------------------------------

_DP_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_DP_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
]
_DP_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_DP_E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920,
                  -17253 / 339200, 22 / 525, -1 / 40])


class _StepLog:
    def __init__(self):
        self.accepted = 0
        self.rejected = 0
        self.clamp_events = 0
        self.clamped_mass = 0.0
        self.flag = None
        self.min_dt = math.inf

    def as_dict(self, evals: int, runtime: float) -> dict:
        return {
            "accepted": self.accepted,
            "rejected": self.rejected,
            "clamp_events": self.clamp_events,
            "clamped_mass": self.clamped_mass,
            "flag": self.flag,
            "min_dt": None if math.isinf(self.min_dt) else self.min_dt,
            "rhs_evals": evals,
            "runtime_s": runtime,
        }


def _weighted_norm(v: np.ndarray, weights: np.ndarray) -> float:
    return float(np.dot(weights, np.abs(v)))


def _initial_step(rhs, t0, y0, f0, weights, tol_of) -> float:
    d0 = _weighted_norm(y0, weights)
    d1 = _weighted_norm(f0, weights)
    if d0 < 1e-30 or d1 < 1e-30:
        return 1e-6
    h0 = 0.01 * d0 / d1
    y1 = y0 + h0 * f0
    f1 = rhs(t0 + h0, y1)
    d2 = _weighted_norm(f1 - f0, weights) / h0
    rate = max(d1, d2)
    if rate <= 1e-30:
        return min(h0 * 100, 1.0)
    h1 = (0.01 * tol_of(y0) / rate) ** 0.2
    return min(100 * h0, h1)


def _advance_rk45(rhs, t0, t1, y, weights, rel_tol, abs_tol, log, t_end, clamp):
    """Integrate y from t0 to t1 in place; returns (y, ok)."""

    def tol_of(yv):
        return abs_tol + rel_tol * _weighted_norm(yv, weights)

    t = t0
    f0 = rhs(t, y)
    h = min(_initial_step(rhs, t, y, f0, weights, tol_of), t1 - t0)
    k = [None] * 7
    k[0] = f0
    while t < t1 - 1e-14 * max(1.0, t1):
        h = min(h, t1 - t)
        if h < 1e-12 * t_end:
            log.flag = "dt_underflow"
            return y, False
        for i in range(1, 7):
            yi = y + h * sum(a * k[j] for j, a in enumerate(_DP_A[i]))
            k[i] = rhs(t + _DP_C[i] * h, yi)
        y5 = y + h * sum(b * k[j] for j, b in enumerate(_DP_B) if b)
        err = h * sum(e * k[j] for j, e in enumerate(_DP_E) if e)
        en = _weighted_norm(err, weights)
        tol = tol_of(y)
        if en <= tol:
            t += h
            log.accepted += 1
            log.min_dt = min(log.min_dt, h)
            y = y5
            y = clamp(y)
            k[0] = rhs(t, y)  # refresh after clamping (FSAL would reuse k[6])
        else:
            log.rejected += 1
        factor = 0.9 * (tol / en) ** 0.2 if en > 0 else 5.0
        h *= min(5.0, max(0.2, factor))
    return y, True


def _advance_rk4(rhs, t0, t1, y, dt, log, clamp):
    t = t0
    while t < t1 - 1e-14 * max(1.0, t1):
        h = min(dt, t1 - t)
        k1 = rhs(t, y)
        k2 = rhs(t + h / 2, y + h / 2 * k1)
        k3 = rhs(t + h / 2, y + h / 2 * k2)
        k4 = rhs(t + h, y + h * k3)
        y = y + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
        y = clamp(y)
        t += h
        log.accepted += 1
        log.min_dt = min(log.min_dt, h)
    return y, True


# ---------------------------------------------------------------------------
# Driver
# ---------------------------------------------------------------------------

def _default_cap(kernel: KernelSpec, grid: SizeGrid) -> float:
    """Cap level that leaves min(K, n) unsaturated on the grid diagonal."""
    p = grid.pivots
    raw = replace(kernel, cap=None)
    return float(np.max(raw.eval(p, p)))


def resolve_kernel(config: SolverConfig, grid: SizeGrid) -> KernelSpec:
    """Kernel actually integrated: explicit truncation wins, otherwise the
    default diagonal cap makes the approximation explicit."""
    kernel = config.kernel
    if config.truncation_n is not None:
        mode = "product_cap" if config.truncation_mode == "product_cap" else "cap"
        return kernel.truncate(config.truncation_n, mode)
    if kernel.cap is not None:
        return kernel
    return kernel.truncate(_default_cap(kernel, grid), "cap")


def integrate(init: SizeDistribution, config: SolverConfig) -> Trajectory:
    """Run the coagulation dynamics from ``init`` and record snapshots.

    On step-size underflow (gelation stiffness) the trajectory collected so
    far is returned with ``step_log["flag"] = "dt_underflow"`` rather than
    raising.
    """
    if np.any(init.density < 0):
        raise DomainError("initial density must be non-negative")
    grid = init.grid
    kernel = resolve_kernel(config, grid)

    want_fast = config.use_fast_gain
    if want_fast is None:
        want_fast = _fast_path_ok(kernel, grid)
    elif want_fast and not _fast_path_ok(kernel, grid):
        raise UnsupportedFamilyError(
            "fast gain requested but the kernel/grid combination is not separable")
    if want_fast:
        rhs = _SeparableRhs(grid, kernel, config.boundary)
    else:
        rhs = _DenseRhs(grid, kernel, config.boundary)

    m = grid.size
    weights = np.empty(m + 1)
    weights[:m] = (1.0 + grid.pivots) * grid.widths   # the (1+x)-weighted norm
    weights[m] = 1.0

    log = _StepLog()

    def clamp(y):
        f, events, removed = clamp_negatives(y[:m])
        if removed:
            log.clamp_events += events
            log.clamped_mass += removed
            y = y.copy()
            y[:m] = f
        return y

    y = np.concatenate([init.density, [0.0]])
    snap_times = config.resolved_snapshots()
    snapshots = [SizeDistribution(grid, init.density.copy(), 0.0)]
    gel_series = [0.0]
    t_prev = 0.0
    started = time.perf_counter()
    ok = True
    for t_next in snap_times:
        if config.scheme == "rk45":
            y, ok = _advance_rk45(rhs, t_prev, t_next, y, weights,
                                  config.rel_tol, config.abs_tol, log,
                                  config.t_end, clamp)
        else:
            y, ok = _advance_rk4(rhs, t_prev, t_next, y, config.dt, log, clamp)
        if not ok:
            break
        snapshots.append(SizeDistribution(grid, y[:m].copy(), t_next))
        gel_series.append(max(float(y[m]), 0.0))
        t_prev = t_next

    times = np.array([s.time for s in snapshots])
    values = {mu: np.array([s.moment(mu) for s in snapshots]) for mu in MOMENT_ORDERS}
    moments = MomentSeries(times, values, np.asarray(gel_series))
    step_log = log.as_dict(rhs.evals, time.perf_counter() - started)
    return Trajectory(snapshots=snapshots, moments=moments, step_log=step_log,
                      config=config)
