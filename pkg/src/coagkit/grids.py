"""Size grids, size distributions, and moment functionals.

Two discretizations of the size axis are supported:

* ``discrete`` -- integer sizes 1..N; ``density`` is the number of particles
  per site, widths are 1.
* ``sectional`` -- bins with strictly increasing edges and one representative
  pivot per bin; ``density`` is number per unit size.

Moments use pivot (midpoint) quadrature throughout, matching the two-point
number/mass apportionment used by the solver and ``regrid``.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, GridError

__all__ = [
    "SizeGrid",
    "SizeDistribution",
    "MomentSeries",
    "moment",
    "init_distribution",
    "regrid",
]

DEFAULT_GEOMETRIC_RATIO = 2.0 ** 0.25

# Round-off negatives below this fraction of the peak are clamped silently.
NEGATIVE_CLAMP_FRACTION = 1e-14


@dataclass(frozen=True)
class SizeGrid:
    """Discretization of the size axis."""

    kind: str  # "discrete" | "sectional"
    n: int = 0
    edges: tuple = ()
    pivots_: tuple = ()

    @staticmethod
    def discrete(n: int) -> "SizeGrid":
        if n < 1:
            raise GridError("discrete grid needs n >= 1")
        return SizeGrid("discrete", n=int(n))

    @staticmethod
    def sectional(edges, pivots=None) -> "SizeGrid":
        edges = np.asarray(edges, dtype=float)
        if edges.ndim != 1 or edges.size < 2 or np.any(np.diff(edges) <= 0):
            raise GridError("edges must be strictly increasing, length >= 2")
        if edges[0] <= 0:
            raise GridError("edges must be positive")
        if pivots is None:
            pivots = np.sqrt(edges[:-1] * edges[1:])  # geometric-mean pivots
        else:
            pivots = np.asarray(pivots, dtype=float)
            if pivots.shape != (edges.size - 1,):
                raise GridError("need one pivot per bin")
            if np.any(pivots <= edges[:-1]) or np.any(pivots >= edges[1:]):
                raise GridError("each pivot must lie inside its bin")
        return SizeGrid("sectional", edges=tuple(edges), pivots_=tuple(pivots))

    @staticmethod
    def geometric(x_min: float, x_max: float, ratio: float = DEFAULT_GEOMETRIC_RATIO,
                  bins: int | None = None) -> "SizeGrid":
        """Geometric sectional grid spanning [x_min, x_max]."""
        if bins is not None:
            edges = np.geomspace(x_min, x_max, bins + 1)
        else:
            if ratio <= 1:
                raise GridError("ratio must exceed 1")
            m = int(np.ceil(np.log(x_max / x_min) / np.log(ratio)))
            edges = x_min * ratio ** np.arange(m + 1)
        return SizeGrid.sectional(edges)

    @property
    def size(self) -> int:
        return self.n if self.kind == "discrete" else len(self.pivots_)

    @property
    def pivots(self) -> np.ndarray:
        if self.kind == "discrete":
            return np.arange(1, self.n + 1, dtype=float)
        return np.asarray(self.pivots_)

    @property
    def widths(self) -> np.ndarray:
        if self.kind == "discrete":
            return np.ones(self.n)
        e = np.asarray(self.edges)
        return e[1:] - e[:-1]

    @property
    def span(self) -> tuple[float, float]:
        if self.kind == "discrete":
            return (1.0, float(self.n))
        return (self.edges[0], self.edges[-1])

    def __eq__(self, other):
        if not isinstance(other, SizeGrid):
            return NotImplemented
        return (self.kind, self.n, self.edges, self.pivots_) == (
            other.kind, other.n, other.edges, other.pivots_)


@dataclass
class SizeDistribution:
    """Particle number density on a grid at one instant.

    Snapshots are treated as immutable once time-stamped; operations return
    new instances.
    """

    grid: SizeGrid
    density: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        self.density = np.asarray(self.density, dtype=float)
        if self.density.shape != (self.grid.size,):
            raise GridError("density length must match the grid")

    def moment(self, mu: float) -> float:
        return moment(self, mu)

    @property
    def number(self) -> np.ndarray:
        """Per-cell particle number (density times width)."""
        return self.density * self.grid.widths

    def norm_weighted(self, mu: float = 1.0) -> float:
        """The (1 + x^mu)-weighted L1 norm of the density."""
        p, w = self.grid.pivots, self.grid.widths
        return float(np.sum((1.0 + p**mu) * np.abs(self.density) * w))

    def with_time(self, t: float) -> "SizeDistribution":
        return SizeDistribution(self.grid, self.density.copy(), float(t))

    def to_csv(self) -> str:
        """CSV columns pivot,width,density with LF line endings."""
        buf = io.StringIO()
        buf.write("pivot,width,density\n")
        for p, w, d in zip(self.grid.pivots, self.grid.widths, self.density):
            buf.write(f"{float(p)!r},{float(w)!r},{float(d)!r}\n")
        return buf.getvalue()

    def to_json_obj(self) -> dict:
        return {
            "time": self.time,
            "grid": {"kind": self.grid.kind,
                     "n": self.grid.n,
                     "edges": list(self.grid.edges),
                     "pivots": list(self.grid.pivots_)},
            "density": [float(v) for v in self.density],
        }

    @staticmethod
    def from_json_obj(obj: dict) -> "SizeDistribution":
        g = obj["grid"]
        if g["kind"] == "discrete":
            grid = SizeGrid.discrete(g["n"])
        else:
            grid = SizeGrid.sectional(g["edges"], g["pivots"])
        return SizeDistribution(grid, np.asarray(obj["density"], float), obj["time"])


def moment(dist: SizeDistribution, mu: float) -> float:
    """M_mu = integral of x^mu times the density (pivot quadrature)."""
    if not -1.0 <= mu <= 3.0:
        raise DomainError("moment order must lie in [-1, 3]")
    p, w = dist.grid.pivots, dist.grid.widths
    return float(np.sum(p**mu * dist.density * w))


@dataclass
class MomentSeries:
    """Moment time series recorded along a trajectory."""

    times: np.ndarray
    values: dict[float, np.ndarray]
    gel_mass: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        if np.any(np.diff(self.times) <= 0):
            raise DomainError("snapshot times must be strictly increasing")
        if self.gel_mass.size == 0:
            self.gel_mass = np.zeros_like(self.times)
        if np.any(np.diff(self.gel_mass) < -1e-12 * (1 + np.max(self.gel_mass))):
            raise DomainError("gel mass must be non-decreasing")

    def __getitem__(self, mu: float) -> np.ndarray:
        return self.values[mu]


def _two_point_weights(v: float, lo: float, hi: float) -> tuple[float, float]:
    """Number fractions onto pivots (lo, hi) preserving number and mass of
    a unit point mass at v in [lo, hi]."""
    t = (v - lo) / (hi - lo)
    return 1.0 - t, t


def init_distribution(grid: SizeGrid, family: str, **params) -> SizeDistribution:
    """Initial condition on a grid.

    Families: ``monodisperse(size=..)`` one particle per unit volume at one
    size; ``exponential(mean=..)`` density exp(-x/mean)/mean with unit number;
    ``tabulated(density=..)`` explicit per-cell density.
    """
    m = grid.size
    density = np.zeros(m)
    if family == "monodisperse":
        size = float(params.get("size", 1.0))
        if size <= 0:
            raise DomainError("monodisperse size must be positive")
        p = grid.pivots
        hit = np.nonzero(np.abs(p - size) <= 1e-12 * size)[0]
        if hit.size == 0:
            raise GridError(f"monodisperse size {size} is not representable on the grid")
        density[hit[0]] = 1.0 / grid.widths[hit[0]]
    elif family == "exponential":
        mean = float(params.get("mean", 1.0))
        if mean <= 0:
            raise DomainError("exponential mean must be positive")
        if grid.kind == "discrete":
            x = grid.pivots
            density = np.exp(-x / mean) / mean
        else:
            # exact per-cell number and mass, apportioned onto pivots so the
            # grid-level M0 and M1 match the analytic values up to the mass
            # lying outside the span
            e = np.asarray(grid.edges)
            a, b = e[:-1], e[1:]
            num = np.exp(-a / mean) - np.exp(-b / mean)
            mass = (a + mean) * np.exp(-a / mean) - (b + mean) * np.exp(-b / mean)
            density = _apportion_cells(grid, num, mass) / grid.widths
    elif family == "tabulated":
        density = np.asarray(params["density"], dtype=float)
        if density.shape != (m,):
            raise GridError("tabulated density length must match the grid")
        if np.any(density < 0):
            raise DomainError("density must be non-negative")
    else:
        raise DomainError(f"unknown initial-condition family {family!r}")
    return SizeDistribution(grid, density, 0.0)


def _apportion_cells(grid: SizeGrid, num: np.ndarray, mass: np.ndarray) -> np.ndarray:
    """Spread per-cell (number, mass) pairs onto pivots two-point-wise.

    Cells whose mass centroid falls outside the pivot range are assigned to
    the nearest pivot, preserving mass.
    """
    p = grid.pivots
    out = np.zeros_like(p)
    for n_i, m_i in zip(num, mass):
        if n_i <= 0:
            continue
        v = m_i / n_i
        if v <= p[0]:
            out[0] += m_i / p[0]
        elif v >= p[-1]:
            out[-1] += m_i / p[-1]
        else:
            j = int(np.searchsorted(p, v)) - 1
            w_lo, w_hi = _two_point_weights(v, p[j], p[j + 1])
            out[j] += n_i * w_lo
            out[j + 1] += n_i * w_hi
    return out


def regrid(dist: SizeDistribution, target: SizeGrid) -> tuple[SizeDistribution, dict]:
    """Re-express ``dist`` on ``target`` conserving number and mass.

    Each source cell is treated as a point mass at its pivot and apportioned
    onto the two bracketing target pivots, which conserves number and mass
    cell by cell.  Mass below the first or above the last target pivot has
    no bracket; it is removed from the distribution and reported in the info
    dict as ``underflow_mass`` / ``overflow_mass``, so that the new first
    moment plus the reported masses reproduces the old first moment exactly.
    """
    if target.size < 1:
        raise GridError("degenerate target grid")
    if target == dist.grid:
        return SizeDistribution(dist.grid, dist.density.copy(), dist.time), {
            "underflow_mass": 0.0, "overflow_mass": 0.0}
    p_t = target.pivots
    out_number = np.zeros(target.size)
    underflow = overflow = 0.0
    for p, n in zip(dist.grid.pivots, dist.number):
        if n == 0.0:
            continue
        if p < p_t[0]:
            underflow += p * n
        elif p > p_t[-1]:
            overflow += p * n
        elif p == p_t[-1]:
            out_number[-1] += n
        else:
            j = int(np.searchsorted(p_t, p, side="right")) - 1
            w_lo, w_hi = _two_point_weights(p, p_t[j], p_t[j + 1])
            out_number[j] += n * w_lo
            out_number[j + 1] += n * w_hi
    new = SizeDistribution(target, out_number / target.widths, dist.time)
    return new, {"underflow_mass": underflow, "overflow_mass": overflow}


def clamp_negatives(density: np.ndarray, fraction: float = NEGATIVE_CLAMP_FRACTION
                    ) -> tuple[np.ndarray, int, float]:
    """Zero out round-off negatives.

    Returns (density, overshoot_count, removed_total) where overshoot_count
    counts entries below -fraction*max(density), i.e. beyond harmless
    round-off; all negatives are clamped either way.
    """
    neg = density < 0
    if not np.any(neg):
        return density, 0, 0.0
    peak = float(np.max(density, initial=0.0))
    overshoot = int(np.count_nonzero(density < -fraction * max(peak, 1e-300)))
    removed = float(-np.sum(density[neg]))
    return np.where(neg, 0.0, density), overshoot, removed
