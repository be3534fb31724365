"""Constructive weak-L1 compactness toolkit.

* modulus of uniform integrability of a family of piecewise-constant
  functions (supremal integral over sets of small measure),
* its tail-integral characterisation (the two agree in the limit),
* a builder for superlinear convex functions Phi with concave derivative:
  piecewise quadratic on intervals [N_m, N_{m+1}], with the integer
  breakpoints chosen against a prescribed tail table, and the full suite of
  inequalities such functions satisfy.

Breakpoints and slopes are kept as exact integers/rationals whenever the
inputs permit, so the structural identities (derivative continuity, slope
monotonicity) hold exactly rather than to round-off.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational

import numpy as np

from .errors import ConstructionError, DomainError
from .grids import SizeDistribution

__all__ = [
    "FunctionFamily",
    "VPFunction",
    "eta_modulus",
    "eta_limit",
    "eta_zero_extrapolation",
    "family_tail",
    "synthetic_family",
    "dlvp_construct",
    "vp_eval",
    "vp_check",
    "phi_integral",
    "VPCheckReport",
]


# ---------------------------------------------------------------------------
# Families and the modulus of uniform integrability
# ---------------------------------------------------------------------------

@dataclass
class FunctionFamily:
    """Finitely many non-negative piecewise-constant functions on one grid."""

    members: list
    measures: np.ndarray

    def __post_init__(self):
        self.measures = np.asarray(self.measures, dtype=float)
        if np.any(self.measures <= 0):
            raise DomainError("cell measures must be positive")
        self.members = [np.abs(np.asarray(m, dtype=float)) for m in self.members]
        for m in self.members:
            if m.shape != self.measures.shape:
                raise DomainError("members must share the common grid")
        if not self.members:
            raise DomainError("family must be non-empty")

    @staticmethod
    def from_snapshots(snapshots) -> "FunctionFamily":
        if not all(s.grid == snapshots[0].grid for s in snapshots):
            raise DomainError("snapshots live on different grids")
        widths = snapshots[0].grid.widths
        return FunctionFamily([s.density for s in snapshots], widths)

    def sup_l1(self) -> float:
        return max(float(np.dot(m, self.measures)) for m in self.members)


def eta_modulus(family: FunctionFamily, eps: float) -> float:
    """sup over members and sets A with measure(A) <= eps of the integral
    over A, with fractional inclusion of the cell that straddles eps."""
    if eps <= 0:
        raise DomainError("eps must be positive")
    best = 0.0
    for f in family.members:
        order = np.argsort(-f, kind="stable")
        v = f[order]
        w = family.measures[order]
        cw = np.cumsum(w)
        k = int(np.searchsorted(cw, eps, side="right"))
        if k >= v.size:
            total = float(np.dot(v, w))
        else:
            total = float(np.dot(v[:k], w[:k]))
            total += float(v[k]) * (eps - (cw[k - 1] if k else 0.0))
        best = max(best, total)
    return best


def eta_limit(family: FunctionFamily, thresholds) -> tuple[float, np.ndarray]:
    """Tail integrals sup_f int_{|f| >= c} |f| at each threshold c.

    Returns (estimate, per-threshold values); the estimate is the value at
    the largest threshold, and the sequence is non-increasing in c.
    """
    cs = np.asarray(thresholds, dtype=float)
    if cs.size == 0 or np.any(np.diff(cs) <= 0):
        raise DomainError("thresholds must be a non-empty increasing list")
    tails = np.array([
        max(float(np.sum(np.where(f >= c, f * family.measures, 0.0)))
            for f in family.members)
        for c in cs
    ])
    return float(tails[-1]), tails


def eta_zero_extrapolation(family: FunctionFamily, eps_list) -> float:
    """Linear extrapolation of eta_modulus to eps = 0 from the two smallest
    eps values (exact for finite families once eps is below the measure of
    the top-value cell)."""
    eps = np.sort(np.asarray(eps_list, dtype=float))
    if eps.size < 2:
        raise DomainError("need at least two eps values to extrapolate")
    e1, e2 = eps[0], eps[1]
    h1, h2 = eta_modulus(family, e1), eta_modulus(family, e2)
    return h1 - e1 * (h2 - h1) / (e2 - e1)


def family_tail(family: FunctionFamily):
    """Tail-integral callable c -> sup_f int_{|f| >= c} |f|."""

    def tail(c):
        return max(float(np.sum(np.where(f >= c, f * family.measures, 0.0)))
                   for f in family.members)

    return tail


def synthetic_family(kind: str, resolution: int = 512) -> FunctionFamily:
    """Reference families used by tests, demos, and the CLI.

    ``bounded``: the indicator of (0, 1).  ``concentrating``: the spikes
    n * 1_(0, 1/n) for dyadic n up to 64 (unit mass each, all above any
    threshold below n).  ``singular``: x**(-1/2) on (0, 1) discretised by
    cell averages on square-spaced edges (j/M)**2, which keeps every cell
    integral exactly 2/M.
    """
    if kind == "bounded":
        m = 64
        return FunctionFamily([np.ones(m)], np.full(m, 1.0 / m))
    if kind == "concentrating":
        k = 6  # spikes n = 1, 2, ..., 64
        rights = 2.0 ** np.arange(-k, 1)          # 1/64 .. 1
        widths = np.diff(np.concatenate([[0.0], rights]))
        members = []
        for j in range(k + 1):
            n = 2.0**j
            vals = np.where(rights <= 1.0 / n + 1e-15, n, 0.0)
            members.append(vals)
        return FunctionFamily(members, widths)
    if kind == "singular":
        m = resolution
        j = np.arange(m)
        widths = (2.0 * j + 1.0) / m**2           # ((j+1)/M)^2 - (j/M)^2
        values = 2.0 * m / (2.0 * j + 1.0)        # exact cell averages
        return FunctionFamily([values], widths)
    raise DomainError(f"unknown synthetic family {kind!r}")


# ---------------------------------------------------------------------------
# The convex-function builder
# ---------------------------------------------------------------------------

def _is_rational(x) -> bool:
    return isinstance(x, Rational)  # covers int and Fraction


def _frac(x):
    return x if isinstance(x, Fraction) else Fraction(x)


@dataclass
class VPFunction:
    """Piecewise-quadratic convex function with concave derivative.

    Phi'(r) = A_m r + B_m on [N_m, N_{m+1}], Phi(0) = Phi'(0) = 0, slopes A_m
    positive and non-increasing, Phi' continuous.  Beyond the last breakpoint
    Phi' continues affinely with the last slope.
    """

    breakpoints: list          # integers N_0 = 1 < N_1 <= ...
    alphas: list               # alpha_m, one per segment
    tail_table: dict = field(default_factory=dict)   # N_m -> tail bound used
    exact: bool = False

    # derived, filled in __post_init__
    slopes: list = field(default_factory=list)       # A_m
    intercepts: list = field(default_factory=list)   # B_m
    deriv_at: list = field(default_factory=list)     # Phi'(N_m)
    value_at: list = field(default_factory=list)     # Phi(N_m)

    def __post_init__(self):
        n = self.breakpoints
        a = self.alphas
        if len(n) < 2 or len(a) != len(n) - 1:
            raise DomainError("need breakpoints N_0..N_M and one alpha per segment")
        if n[0] != 1 or n[1] < 2:
            raise DomainError("breakpoints must start at N_0 = 1 with N_1 >= 2")
        if any(b <= c for c, b in zip(n, n[1:])):
            raise DomainError("breakpoints must be strictly increasing")
        if any(x <= 0 for x in a):
            raise DomainError("alphas must be positive")
        self.exact = all(_is_rational(v) for v in list(n) + list(a))
        conv = _frac if self.exact else float
        A = [conv(a[m]) / (conv(n[m + 1]) - conv(n[m])) for m in range(len(a))]
        for prev, cur in zip(A, A[1:]):
            if cur > prev:
                raise DomainError("slope sequence must be non-increasing (c1)")
        # Phi'(N_m) = sum_{i<m} alpha_i + alpha_0/(N_1 - N_0)
        P = [A[0] * conv(n[0])]
        for m in range(1, len(n)):
            P.append(sum((conv(x) for x in a[:m]), conv(0)) + A[0])
        B = [conv(0)] + [P[m] - A[min(m, len(A) - 1)] * conv(n[m])
                         for m in range(1, len(n))]
        # Phi at breakpoints by exact quadratic integration
        V = [A[0] * conv(n[0]) ** 2 / 2]
        for m in range(1, len(n)):
            lo, hi = conv(n[m - 1]), conv(n[m])
            Am = A[m - 1]
            V.append(V[-1] + P[m - 1] * (hi - lo) + Am * (hi - lo) ** 2 / 2)
        self.slopes, self.intercepts, self.deriv_at, self.value_at = A, B, P, V
        # derivative continuity (c2) as an identity
        for m in range(len(A) - 1):
            lhs = A[m + 1] * conv(n[m + 1]) + B[m + 1]
            rhs = A[m] * conv(n[m + 1]) + B[m]
            if self.exact:
                if lhs != rhs:
                    raise DomainError("derivative continuity (c2) violated")
            elif abs(lhs - rhs) > 1e-12 * max(1.0, abs(rhs)):
                raise DomainError("derivative continuity (c2) violated")

    # -- scalar exact evaluation ---------------------------------------------

    def _segment(self, r):
        n = self.breakpoints
        if r < n[0]:
            return -1
        for m in range(len(n) - 1):
            if r < n[m + 1]:
                return m
        return len(n) - 2  # affine continuation uses the last slope

    def deriv_exact(self, r: Fraction) -> Fraction:
        r = _frac(r)
        if r < 0:
            raise DomainError("argument must be non-negative")
        A = self.slopes
        n = self.breakpoints
        if r < n[1]:
            return A[0] * r
        if r >= n[-1]:
            return self.deriv_at[-1] + A[-1] * (r - _frac(n[-1]))
        m = self._segment(r)
        return self.deriv_at[m] + A[m] * (r - _frac(n[m]))

    def value_exact(self, r: Fraction) -> Fraction:
        r = _frac(r)
        if r < 0:
            raise DomainError("argument must be non-negative")
        n = self.breakpoints
        A = self.slopes
        if r < n[1]:
            return A[0] * r ** 2 / 2
        if r >= n[-1]:
            d = r - _frac(n[-1])
            return self.value_at[-1] + self.deriv_at[-1] * d + A[-1] * d ** 2 / 2
        m = self._segment(r)
        d = r - _frac(n[m])
        return self.value_at[m] + self.deriv_at[m] * d + A[m] * d ** 2 / 2

    def second_exact(self, r) -> Fraction:
        r = _frac(r)
        if r < 0:
            raise DomainError("argument must be non-negative")
        if r >= self.breakpoints[-1]:
            return _frac(self.slopes[-1])
        m = self._segment(r)
        return _frac(self.slopes[max(m, 0)])

    # -- vectorised float evaluation ------------------------------------------

    def _float_tables(self):
        n = np.asarray([float(v) for v in self.breakpoints])
        A = np.asarray([float(v) for v in self.slopes])
        P = np.asarray([float(v) for v in self.deriv_at])
        V = np.asarray([float(v) for v in self.value_at])
        return n, A, P, V

    def __call__(self, r, order: int = 0):
        return vp_eval(self, r, order)

    def to_json_obj(self) -> dict:
        return {
            "breakpoints": [int(b) for b in self.breakpoints],
            "alphas": [str(a) if self.exact else float(a) for a in self.alphas],
            "exact": self.exact,
            "tail_table": {str(k): (str(v) if self.exact else float(v))
                           for k, v in self.tail_table.items()},
            "deriv_at_breakpoints": [float(p) for p in self.deriv_at],
        }


def vp_eval(phi: VPFunction, r, order: int = 0):
    """Phi (order 0), Phi' (order 1), or the piecewise-constant Phi'' (order 2).

    Accepts scalars or arrays; exact rationals in, exact rationals out when
    the function was built in exact mode.
    """
    if order not in (0, 1, 2):
        raise DomainError("order must be 0, 1, or 2")
    if np.isscalar(r) and _is_rational(r) and phi.exact:
        return (phi.value_exact, phi.deriv_exact, phi.second_exact)[order](r)
    arr = np.asarray(r, dtype=float)
    if np.any(arr < 0):
        raise DomainError("argument must be non-negative")
    n, A, P, V = phi._float_tables()
    seg = np.clip(np.searchsorted(n, arr, side="right") - 1, 0, len(A) - 1)
    d = arr - n[seg]
    if order == 2:
        out = A[seg]
    elif order == 1:
        out = np.where(arr < n[1], A[0] * arr, P[seg] + A[seg] * d)
    else:
        out = np.where(arr < n[1], A[0] * arr * arr / 2.0,
                       V[seg] + P[seg] * d + A[seg] * d * d / 2.0)
    return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# Breakpoint selection against a tail table
# ---------------------------------------------------------------------------

def _tail_callable(tail):
    """Normalise a tail specification to a callable with a search ceiling."""
    if callable(tail):
        return tail, None
    items = sorted(tail.items())
    keys = [k for k, _ in items]
    vals = [v for _, v in items]
    for (k1, v1), (k2, v2) in zip(items, items[1:]):
        if v2 > v1:
            raise DomainError("tail table must be non-increasing")

    def step(c):
        idx = np.searchsorted(keys, c, side="right") - 1
        if idx < 0:
            return np.inf  # below the table: no certificate available
        return vals[idx]

    return step, keys[-1]


def _as_sequence(spec, count):
    if callable(spec):
        return [spec(m) for m in range(count)]
    seq = list(spec)
    if len(seq) < count:
        raise DomainError(f"need at least {count} sequence terms")
    return seq[:count]


def _ceil_div(num, den):
    return -((-num) // den)


def dlvp_construct(tail, alphas, betas, terms: int | None = None,
                   search_limit: int = 2 ** 62) -> VPFunction:
    """Build a superlinear convex function against a tail table.

    ``tail`` maps a threshold to (an upper bound for) the family tail
    integral; it may be a callable or a mapping (used as a right-continuous
    step function).  ``alphas`` and ``betas`` are positive sequences or
    callables m -> value; the partial sum of alpha_m * beta_m must be finite,
    which for the finitely many stored terms amounts to positivity checks.

    Breakpoints: N_0 = 1; N_m for m >= 1 is the smallest integer satisfying
    the growth constraint N_m >= (1 + alpha_{m-1}/alpha_{m-2}) N_{m-1}
    (N_1 >= 2) and the tail constraint tail(N_m) <= beta_m.  Raises
    ConstructionError naming the first index whose tail constraint cannot be
    met within the table's range.
    """
    if terms is None:
        if callable(alphas) or callable(betas):
            raise DomainError("terms must be given when sequences are callables")
        terms = min(len(alphas), len(betas) - 1)
    if terms < 1:
        raise DomainError("need at least one segment")
    a = _as_sequence(alphas, terms)
    b = _as_sequence(betas, terms + 1)
    if any((x <= 0) for x in a) or any((x <= 0) for x in b):
        raise DomainError("alphas and betas must be positive")
    tail_fn, ceiling = _tail_callable(tail)
    limit = min(search_limit, ceiling) if ceiling is not None else search_limit

    exact = all(_is_rational(v) for v in a)

    breakpoints = [1]
    tail_table = {}
    for m in range(1, terms + 1):
        if m == 1:
            lower = 2
        else:
            ratio_num, ratio_den = (a[m - 1], a[m - 2])
            if exact and all(_is_rational(v) for v in (ratio_num, ratio_den)):
                ratio = _frac(ratio_num) / _frac(ratio_den)
                lower = int(_ceil_div((1 + ratio).numerator * breakpoints[m - 1],
                                      (1 + ratio).denominator))
            else:
                lower = int(np.ceil((1.0 + float(ratio_num) / float(ratio_den))
                                    * breakpoints[m - 1]))
            lower = max(lower, breakpoints[m - 1] + 1)
        beta_m = b[m]
        if tail_fn(lower) <= beta_m:
            chosen = lower
        else:
            hi = lower
            while True:
                hi *= 2
                if hi > limit:
                    raise ConstructionError(
                        f"tail constraint unmet at index {m}: "
                        f"tail({limit}) > beta_{m}", m)
                if tail_fn(hi) <= beta_m:
                    break
            lo = max(lower, hi // 2)
            while lo < hi:
                mid = (lo + hi) // 2
                if tail_fn(mid) <= beta_m:
                    hi = mid
                else:
                    lo = mid + 1
            chosen = hi
        breakpoints.append(chosen)
        tail_table[chosen] = tail_fn(chosen)

    return VPFunction(breakpoints, list(a), tail_table)


# ---------------------------------------------------------------------------
# Inequality suite
# ---------------------------------------------------------------------------

@dataclass
class InequalityCheck:
    name: str
    samples: int
    violations: int
    min_margin: float

    @property
    def passed(self) -> bool:
        return self.violations == 0


@dataclass
class VPCheckReport:
    checks: list

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, name: str) -> InequalityCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_json_obj(self) -> dict:
        return {
            "passed": self.passed,
            "checks": [
                {"name": c.name, "samples": c.samples,
                 "violations": c.violations, "min_margin": c.min_margin}
                for c in self.checks
            ],
        }


def _margin_accumulate(records, name, lhs, rhs, tol):
    """Record margin rhs - lhs >= -tol * scale for one sample."""
    margin = rhs - lhs
    scale = max(1, abs(lhs), abs(rhs)) if isinstance(margin, Fraction) \
        else max(1.0, abs(float(lhs)), abs(float(rhs)))
    ok = margin >= -tol * scale
    rec = records.setdefault(name, [0, 0, None])
    rec[0] += 1
    rec[1] += 0 if ok else 1
    mf = float(margin)
    rec[2] = mf if rec[2] is None else min(rec[2], mf)


def vp_check(phi: VPFunction, samples, member=None, tol: float = 1e-12
             ) -> VPCheckReport:
    """Evaluate the inequality suite on (r, s, lambda) triples.

    Checks: concavity of Phi(r)/r; Phi <= r Phi' <= 2 Phi; s Phi'(r) <=
    Phi(r) + Phi(s); Phi(lambda r) <= max(1, lambda^2) Phi(r); the
    three-point product bound on Phi(r+s); subadditivity of Phi'; and, when
    ``member`` (values, measures) is given, the layer-cake tail bound of the
    integral of Phi(|f|) below each breakpoint.

    In exact mode with rational samples every margin is computed in exact
    arithmetic and ``tol`` is ignored (exact comparisons).
    """
    records: dict = {}
    exact = phi.exact and all(
        _is_rational(v) for t in samples for v in t)
    use_tol = 0 if exact else tol

    def Phi(r):
        return phi.value_exact(r) if exact else float(vp_eval(phi, float(r), 0))

    def dPhi(r):
        return phi.deriv_exact(r) if exact else float(vp_eval(phi, float(r), 1))

    for (r, s, lam) in samples:
        if r < 0 or s < 0 or lam < 0:
            raise DomainError("samples must be non-negative")
        fr, fs = Phi(r), Phi(s)
        dfr = dPhi(r)
        if r > 0 and s > 0:
            mid = (r + s) / 2 if exact else (float(r) + float(s)) / 2.0
            _margin_accumulate(records, "b122_ratio_concave",
                               (fr / r + fs / s) / 2, Phi(mid) / mid, use_tol)
        _margin_accumulate(records, "b123_lower", fr, r * dfr, use_tol)
        _margin_accumulate(records, "b123_upper", r * dfr, 2 * fr, use_tol)
        _margin_accumulate(records, "b123b_cross", s * dfr, fr + fs, use_tol)
        _margin_accumulate(records, "b124_scaling", Phi(lam * r),
                           max(1, lam * lam) * fr, use_tol)
        frs = Phi(r + s)
        _margin_accumulate(records, "b125_product",
                           (r + s) * (frs - fr - fs),
                           2 * (r * fs + s * fr), use_tol)
        _margin_accumulate(records, "b127_deriv_subadd",
                           dPhi(r + s), dfr + dPhi(s), use_tol)

    if member is not None:
        values, measures = member
        pairs = list(zip(values, measures))
        exact_m = exact and all(
            _is_rational(v) and _is_rational(w) for v, w in pairs)
        if exact_m:
            norm1 = sum((abs(v) * w for v, w in pairs), Fraction(0))
        else:
            norm1 = float(np.dot(np.abs(np.asarray(values, float)),
                                 np.asarray(measures, float)))
        dphi1 = phi.deriv_exact(Fraction(1)) if exact_m else float(vp_eval(phi, 1.0, 1))

        def tail_at(nm):
            if exact_m:
                return sum((abs(v) * w for v, w in pairs if abs(v) >= nm), Fraction(0))
            va = np.abs(np.asarray(values, float))
            wa = np.asarray(measures, float)
            return float(np.sum(np.where(va >= nm, va * wa, 0.0)))

        nbp = phi.breakpoints
        for k in range(1, len(nbp)):
            nk = nbp[k]
            if exact_m:
                lhs = sum((phi.value_exact(abs(v)) * w
                           for v, w in pairs if abs(v) < nk), Fraction(0))
            else:
                va = np.abs(np.asarray(values, float))
                wa = np.asarray(measures, float)
                below = va < nk
                lhs = float(np.sum(np.asarray(vp_eval(phi, va[below], 0)) * wa[below]))
            rhs = dphi1 * norm1
            for j in range(k):
                dstep = (phi.deriv_at[j + 1] - phi.deriv_at[j]) if exact_m else \
                    float(phi.deriv_at[j + 1]) - float(phi.deriv_at[j])
                rhs = rhs + dstep * tail_at(nbp[j])
            _margin_accumulate(records, "b111_tail_bound", lhs, rhs,
                               0 if exact_m else tol)

    checks = [InequalityCheck(name, *records[name]) for name in records]
    return VPCheckReport(checks)


def phi_integral(phi, dist: SizeDistribution, R: float) -> float:
    """Integral of Phi(density) over sizes below R (pivot quadrature).

    ``phi`` may be a VPFunction or any callable with phi(0) = 0.
    """
    lo, hi = dist.grid.span
    if not (lo < R <= hi * (1 + 1e-12)):
        raise DomainError("R must lie within the grid span")
    p, w = dist.grid.pivots, dist.grid.widths
    mask = p < R
    f = dist.density[mask]
    if isinstance(phi, VPFunction):
        vals = np.asarray(vp_eval(phi, f, 0))
    else:
        vals = np.asarray([phi(v) for v in f], dtype=float)
    return float(np.dot(vals, w[mask]))
