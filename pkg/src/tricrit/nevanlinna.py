"""Growth measurements: sheet counts ``A(t)``, pull-back measures and ``T(r)``.

All area integrals are done in log-polar coordinates ``z = exp(s + i theta)``,
where the spherical area element of ``f`` becomes
``|z f'(z)|**2 / (1 + |f|**2)**2 ds dtheta``.  For the functions built on
``log z`` or ``I(z)`` that integrand is smooth and of bounded scale, so
Gauss-Legendre in ``s`` times the periodic midpoint rule in ``theta``
converges quickly.

``f1`` lives on the punctured plane; its counts and areas are taken over
``1 <= |z| <= t``.  Every other function is integrated over the full disc.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import elliptic, triangle_map
from ._quad import legendre_rule
from .elliptic import SQRT3
from .errors import CriticalValueProximity, NonConvergence, SamplingTooCoarse, Unsupported
from .extremal_fn import I_prime_abs, I_regions, SCALE

SQRT3_OVER_PI = SQRT3 / math.pi
SQRT3_OVER_2PI = SQRT3 / (2 * math.pi)
ROW_HEIGHT = 1.5  # imaginary part of the second lattice generator

DEFAULT_PER_DECADE = 20
DEFAULT_MC_SAMPLES = 2000
_S_FLOOR = -20.0  # exp(2 * -20) is far below every tolerance used here


# --- functions under study ----------------------------------------------------------


@dataclass(frozen=True)
class AnalyzedFunction:
    """Value and ``|z f'(z)|`` of a function, both vectorised."""

    name: str
    value: Callable[[np.ndarray], np.ndarray]
    log_derivative_abs: Callable[[np.ndarray], np.ndarray]
    inner_radius: float = 0.0  # counts and areas are over inner_radius <= |z| <= t

    def spherical_integrand(self, z: np.ndarray) -> np.ndarray:
        w = self.value(z)
        d = self.log_derivative_abs(z)
        with np.errstate(over="ignore", invalid="ignore"):
            h = (d / (1 + np.abs(w) ** 2)) ** 2
        # poles of order 3 have zero spherical derivative
        return np.where(np.isfinite(h), h, 0.0)


def _f1_value(z):
    return elliptic.wp_prime(SCALE * np.log(z))


def _f1_dlog(z):
    return np.abs(elliptic.wp_second(SCALE * np.log(z))) * SQRT3_OVER_2PI


def _f0_value(z):
    return elliptic.wp_prime(SCALE * I_regions(z))


def _f0_dlog(z):
    u = SCALE * I_regions(z)
    return np.abs(elliptic.wp_second(u)) * SQRT3_OVER_2PI * np.abs(z) * I_prime_abs(z)


class _Exp:
    @staticmethod
    def value(z):
        with np.errstate(over="ignore"):
            return np.exp(z)

    @staticmethod
    def integrand(z):
        # |z e^z|^2 / (1 + |e^z|^2)^2 = |z|^2 / (4 cosh^2 Re z)
        return np.abs(z) ** 2 / (4 * np.cosh(np.clip(z.real, -350, 350)) ** 2)


class _ExpFunction(AnalyzedFunction):
    def spherical_integrand(self, z):
        return _Exp.integrand(z)


FUNCTIONS: dict[str, AnalyzedFunction] = {
    "f1": AnalyzedFunction("f1", _f1_value, _f1_dlog, inner_radius=1.0),
    "f0": AnalyzedFunction("f0", _f0_value, _f0_dlog),
    "identity": AnalyzedFunction("identity", lambda z: z, np.abs),
    "exp": _ExpFunction("exp", _Exp.value, lambda z: np.abs(z * np.exp(z))),
}


def get_function(fn_id: str | AnalyzedFunction) -> AnalyzedFunction:
    if isinstance(fn_id, AnalyzedFunction):
        return fn_id
    try:
        return FUNCTIONS[fn_id]
    except KeyError:
        raise ValueError(f"unknown function {fn_id!r}") from None


# --- measures on the sphere ------------------------------------------------------------


@dataclass(frozen=True)
class SphereMeasure:
    """A probability measure on the sphere.

    ``kind`` is one of ``"spherical"``, ``"rho0"``, ``"point"`` or
    ``"empirical"``; the last two carry ``points`` (and ``weights``).
    """

    kind: str
    points: tuple[complex, ...] = ()
    weights: tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind not in ("spherical", "rho0", "point", "empirical"):
            raise ValueError(f"unknown measure kind {self.kind!r}")
        if self.kind == "point" and len(self.points) != 1:
            raise ValueError("a point mass needs exactly one point")
        if self.kind == "empirical":
            if not self.points:
                raise ValueError("empirical measure needs points")
            if self.weights and len(self.weights) != len(self.points):
                raise ValueError("weights and points differ in length")
            if self.weights and abs(sum(self.weights) - 1) > 1e-12:
                raise ValueError("weights must sum to 1")

    @classmethod
    def spherical(cls) -> "SphereMeasure":
        return cls("spherical")

    @classmethod
    def rho0(cls) -> "SphereMeasure":
        return cls("rho0")

    @classmethod
    def point_mass(cls, w: complex) -> "SphereMeasure":
        return cls("point", (complex(w),))

    @property
    def is_continuous(self) -> bool:
        return self.kind in ("spherical", "rho0")

    def density(self, w: np.ndarray) -> np.ndarray:
        """Density with respect to Lebesgue measure on the w-plane."""
        w = np.asarray(w, dtype=complex)
        if self.kind == "spherical":
            return 1.0 / (math.pi * (1 + np.abs(w) ** 2) ** 2)
        if self.kind == "rho0":
            with np.errstate(divide="ignore", invalid="ignore"):
                d = triangle_map._density_example(w) ** 2 / (SQRT3 / 2)
            return np.where(np.isfinite(d), d, 0.0)
        raise Unsupported(f"{self.kind} measures have no density")

    def sample(self, rng: np.random.Generator, n: int) -> tuple[np.ndarray, np.ndarray]:
        """``n`` points and their weights (uniform weights unless empirical)."""
        if self.kind == "spherical":
            zc = 2 * rng.random(n) - 1
            phi = 2 * math.pi * rng.random(n)
            with np.errstate(divide="ignore"):
                w = np.sqrt((1 + zc) / (1 - zc)) * np.exp(1j * phi)
            return w, np.full(n, 1.0 / n)
        if self.kind == "rho0":
            return triangle_map.sample_rho0_measure(rng, n), np.full(n, 1.0 / n)
        pts = np.array(self.points, dtype=complex)
        wts = np.array(self.weights) if self.weights else np.full(len(pts), 1.0 / len(pts))
        return pts, wts


# --- quadrature ---------------------------------------------------------------------


@dataclass
class _AnnulusRule:
    n_s: int = 8
    n_theta: int = 128
    rel_tol: float = 1e-7
    max_depth: int = 6  # finest grid 512 x 8192
    pole_threshold: float = 1e6


def _annulus_integral(integrand, s0: float, s1: float, n_s: int, n_theta: int):
    x, w = legendre_rule(n_s)
    s = s0 + (s1 - s0) * x
    theta = 2 * math.pi * (np.arange(n_theta) + 0.5) / n_theta
    z = np.exp(s[:, None] + 1j * theta[None, :])
    vals, big = integrand(z)
    # fixed reduction order: theta first, then s
    rows = vals.sum(axis=1) * (2 * math.pi / n_theta)
    return float(np.dot(rows, w) * (s1 - s0)), big


def _adaptive_annulus(integrand, s0, s1, rule: _AnnulusRule) -> float:
    n_s, n_t = rule.n_s, rule.n_theta
    prev, big = _annulus_integral(integrand, s0, s1, n_s, n_t)
    for _ in range(rule.max_depth):
        n_s, n_t = 2 * n_s, 2 * n_t
        cur, big2 = _annulus_integral(integrand, s0, s1, n_s, n_t)
        scale = max(abs(cur), 1e-300)
        converged = abs(cur - prev) <= rule.rel_tol * scale + 1e-14 * (s1 - s0)
        if converged and not big:
            return cur
        prev, big = cur, False
    raise NonConvergence(f"annulus [{s0}, {s1}] did not converge within {rule.max_depth} refinements")


def _breakpoints(fn: AnalyzedFunction, radii: np.ndarray, per_decade: int, inner: float = 0.0) -> np.ndarray:
    s_top = float(np.log(radii.max()))
    step = math.log(10.0) / per_decade
    fine = np.arange(0.0, s_top, step)
    inner = max(inner, fn.inner_radius)
    if inner > 0:
        s_in = math.log(inner)
        coarse = np.array([s_in])
    else:
        # unit steps through |z| < 1, where every integrand here is tame
        s_in = _S_FLOOR
        coarse = np.arange(_S_FLOOR, 0.0, 1.0)
    pts = np.unique(np.round(np.concatenate([coarse, fine, np.log(radii)]), 14))
    return pts[pts >= s_in]


def pullback_area(fn_id, radii: Sequence[float], density: Callable | None = None,
                  per_decade: int = DEFAULT_PER_DECADE, rule: _AnnulusRule | None = None,
                  inner: float = 0.0) -> np.ndarray:
    """``int density(f(z)) |f'(z)|**2 dA`` over ``|z| <= t`` for each ``t`` in ``radii``.

    With ``density=None`` this is ``A(t)``, the normalised spherical area.
    A positive ``inner`` restricts the domain to ``inner <= |z| <= t``.
    """
    fn = get_function(fn_id)
    rule = rule or _AnnulusRule()
    radii = np.asarray(radii, dtype=float)
    if np.any(radii <= max(fn.inner_radius, inner, 0.0)):
        raise ValueError("radii must exceed the inner radius of the domain")

    if density is None:
        def integrand(z):
            h = fn.spherical_integrand(z) / math.pi
            big = False
            if fn.name in ("f0", "f1"):
                big = bool(np.nanmax(np.abs(fn.value(z[:, ::max(1, z.shape[1] // 64)]))) > rule.pole_threshold)
            return h, big
    else:
        def integrand(z):
            w = fn.value(z)
            d = fn.log_derivative_abs(z)
            with np.errstate(invalid="ignore", over="ignore"):
                # density decays at poles as fast as d grows: multiply before squaring
                h = (np.sqrt(density(w)) * d) ** 2
            h = np.where(np.isfinite(h), h, 0.0)
            return h, False

    bps = _breakpoints(fn, radii, per_decade, inner)
    cum = np.zeros(len(bps))
    for i in range(1, len(bps)):
        cum[i] = cum[i - 1] + _adaptive_annulus(integrand, bps[i - 1], bps[i], rule)
    idx = np.searchsorted(bps, np.round(np.log(radii), 14))
    return cum[idx]


def spherical_area(fn_id, t: float, **kw) -> float:
    """``A(t)``: the spherical area of the image of ``|z| <= t`` over ``pi``."""
    return float(pullback_area(fn_id, [t], **kw)[0])


def rho_area(fn_id, radii: Sequence[float], **kw) -> np.ndarray:
    """Area of ``|z| <= t`` in the pulled-back flat metric ``rho0(f) |f'|``.

    For ``f0`` the metric has a cone point on ``|z| = 1`` that the product
    rule does not resolve; pass ``inner > 1`` to measure a ring instead.
    """
    return (SQRT3 / 2) * pullback_area(fn_id, radii, density=SphereMeasure.rho0().density, **kw)


# --- T(r) and growth series -----------------------------------------------------------


def characteristic(radii: Sequence[float], A: Sequence[float], r: float, max_gap: float = 0.5) -> float:
    """``T(r) = int_e^r A(t) dt / t`` by the trapezoid rule in ``log t``.

    ``A`` sampled at ``radii`` must cover ``[e, r]`` with steps in ``log t`` of
    at most ``max_gap``; the value at ``e`` is interpolated linearly in ``log t``.
    """
    radii = np.asarray(radii, dtype=float)
    A = np.asarray(A, dtype=float)
    if r < math.e:
        raise ValueError("T is defined for r >= e")
    x = np.log(radii)
    if x.min() > 1 + 1e-12 or x.max() < math.log(r) - 1e-12:
        raise SamplingTooCoarse("samples do not cover [e, r]")
    lo, hi = 1.0, math.log(r)
    inner = (x > lo) & (x < hi)
    xs = np.concatenate([[lo], x[inner], [hi]])
    ys = np.interp(xs, x, A)
    if len(xs) > 1 and np.max(np.diff(xs)) > max_gap:
        raise SamplingTooCoarse(f"gap of {np.max(np.diff(xs)):.3f} in log t exceeds {max_gap}")
    return float(np.trapezoid(ys, xs))


def characteristic_series(radii: Sequence[float], A: Sequence[float], max_gap: float = 0.5) -> np.ndarray:
    """``T`` at every sample radius ``>= e`` (cumulative trapezoid)."""
    radii = np.asarray(radii, dtype=float)
    return np.array([characteristic(radii, A, r, max_gap) for r in radii])


@dataclass
class GrowthSeries:
    r: np.ndarray
    A: np.ndarray
    T: np.ndarray

    def __post_init__(self):
        self.r = np.asarray(self.r, dtype=float)
        self.A = np.asarray(self.A, dtype=float)
        self.T = np.asarray(self.T, dtype=float)
        if not (len(self.r) == len(self.A) == len(self.T)):
            raise ValueError("r, A, T must have equal length")
        if np.any(np.diff(self.r) <= 0):
            raise ValueError("radii must be strictly increasing")

    @classmethod
    def from_A(cls, r, A) -> "GrowthSeries":
        return cls(r, A, characteristic_series(r, A))

    def check_invariants(self, a_tol: float = 1e-3, t_tol: float = 1e-9) -> list[str]:
        """Return a list of violated invariants (empty when all hold)."""
        problems = []
        if np.any(np.diff(self.A) < -a_tol):
            problems.append("A is not nondecreasing")
        if np.any(np.diff(self.T) < -t_tol):
            problems.append("T is not nondecreasing")
        x = np.log(self.r)
        slopes = np.diff(self.T) / np.diff(x)
        if len(slopes) > 1 and np.any(np.diff(slopes) < -a_tol):
            problems.append("T is not convex in log r")
        return problems

    def to_csv(self, extra: dict[str, np.ndarray] | None = None) -> str:
        buf = io.StringIO()
        cols = {"r": self.r, "A": self.A, "T": self.T}
        if extra:
            cols.update(extra)
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(list(cols))
        for row in zip(*cols.values()):
            writer.writerow([format(float(v), ".17g") for v in row])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "GrowthSeries":
        rows = list(csv.DictReader(io.StringIO(text)))
        return cls([float(r["r"]) for r in rows], [float(r["A"]) for r in rows], [float(r["T"]) for r in rows])


def sample_radii(r_max: float, per_decade: int = DEFAULT_PER_DECADE, r_min: float = math.e) -> np.ndarray:
    """``e``, then ``10**(k/per_decade)`` strictly inside ``(r_min, r_max)``, then ``r_max``."""
    if not r_min < r_max:
        raise ValueError("r_min must be below r_max")
    k0 = math.floor(per_decade * math.log10(r_min)) + 1
    k1 = math.ceil(per_decade * math.log10(r_max)) - 1
    grid = [10 ** (k / per_decade) for k in range(k0, k1 + 1)]
    pts = [r_min] + [g for g in grid if r_min < g < r_max] + [r_max]
    if r_min > math.e:
        pts = [math.e] + pts
    return np.array(sorted(set(pts)))


def growth_series_quadrature(fn_id, r_max: float, per_decade: int = DEFAULT_PER_DECADE,
                             r_min: float = math.e) -> GrowthSeries:
    radii = sample_radii(r_max, per_decade, r_min)
    A = pullback_area(fn_id, radii, per_decade=per_decade)
    return GrowthSeries.from_A(radii, A)


# --- preimage counting for f1 ------------------------------------------------------


def _count_from_roots(im_parts: np.ndarray, H: np.ndarray) -> np.ndarray:
    """Number of ``n`` with ``-H <= y + 1.5 n <= 0`` summed over the roots' ``y``."""
    y = im_parts[:, None]
    hi = np.floor(-y / ROW_HEIGHT + 1e-12)
    lo = np.ceil((-H[None, :] - y) / ROW_HEIGHT - 1e-12)
    return np.maximum(hi - lo + 1, 0).sum(axis=0).astype(int)


def count_preimages_f1(w: complex, r, tol: float = 1e-6):
    """Exact number of solutions of ``f1(z) = w`` in ``1 <= |z| <= r``.

    Solutions correspond to ``u = sqrt(3)/(2 pi i) log z`` with
    ``wp'(u) = w``: three per period cell, each row of cells being one
    lattice step ``1.5`` down in ``Im u``; ``|z| <= r`` means
    ``Im u >= -sqrt(3) log(r) / (2 pi)``.
    """
    scalar = np.ndim(r) == 0
    r = np.atleast_1d(np.asarray(r, dtype=float))
    if np.any(r < 1):
        raise ValueError("r must be at least 1")
    roots = elliptic.solve_wp_prime(w, tol=tol)
    counts = _count_from_roots(np.array([z.imag for z in roots]), SQRT3_OVER_2PI * np.log(r))
    return int(counts[0]) if scalar else counts


def counting_function(fn_id: str, w: complex, radii) -> np.ndarray:
    if fn_id != "f1":
        raise Unsupported("exact preimage counting is implemented for f1 only")
    return count_preimages_f1(w, radii)


@dataclass
class PullbackEstimate:
    value: np.ndarray
    stderr: np.ndarray
    n_used: int
    n_flagged: int
    flagged: list = field(default_factory=list)


def pullback_count(fn_id, mu: SphereMeasure, r, mc_samples: int = DEFAULT_MC_SAMPLES,
                   seed: int | None = None, method: str = "auto") -> PullbackEstimate:
    """``A_mu(r)``: the pull-back of ``mu`` by ``f`` evaluated on ``|z| <= r``.

    ``method="mc"`` samples ``w ~ mu`` and counts preimages exactly (``f1``
    only); point and empirical measures are summed exactly with the same
    counts.  ``method="quadrature"`` integrates the pulled-back density
    (continuous ``mu``, any function).  ``"auto"`` picks Monte Carlo for
    ``f1`` and quadrature otherwise.
    """
    fn = get_function(fn_id)
    radii = np.atleast_1d(np.asarray(r, dtype=float))
    if method == "auto":
        method = "mc" if fn.name == "f1" else "quadrature"
    if method == "quadrature":
        if not mu.is_continuous:
            raise Unsupported(f"{mu.kind} measures need preimage counting, available for f1 only")
        dens = None if mu.kind == "spherical" else mu.density
        val = pullback_area(fn, radii, density=dens)
        return PullbackEstimate(val, np.zeros_like(val), 0, 0)
    if method != "mc":
        raise ValueError(f"unknown method {method!r}")
    if fn.name != "f1":
        raise Unsupported("Monte Carlo pull-back counts are implemented for f1 only")
    if mu.is_continuous:
        if seed is None:
            raise ValueError("a seed is required for Monte Carlo estimates")
        rng = np.random.default_rng(seed)
        ws, wts = mu.sample(rng, mc_samples)
    else:
        ws, wts = mu.sample(None, 0)
    H = SQRT3_OVER_2PI * np.log(radii)
    rows = []
    used_w = []
    flagged = []
    for w, wt in zip(ws, wts):
        try:
            roots = elliptic.solve_wp_prime(complex(w)) if np.isfinite(w) else None
        except CriticalValueProximity:
            roots = None
        if roots is None or len(roots) != 3:
            flagged.append(complex(w))
            continue
        rows.append(_count_from_roots(np.array([z.imag for z in roots]), H))
        used_w.append(wt)
    if not rows:
        raise CriticalValueProximity("every sampled value was too close to a critical value")
    counts = np.array(rows, dtype=float)
    wts = np.array(used_w)
    wts = wts / wts.sum()
    mean = wts @ counts
    if mu.is_continuous:
        var = (wts @ (counts - mean) ** 2) * len(wts) / max(len(wts) - 1, 1)
        stderr = np.sqrt(var / len(wts))
    else:
        stderr = np.zeros_like(mean)
    return PullbackEstimate(mean, stderr, len(rows), len(flagged), flagged)


# --- fitting ------------------------------------------------------------------------


@dataclass(frozen=True)
class GrowthFit:
    model: str
    c2: float
    c1: float
    c0: float
    rms: float
    window: tuple[float, float]
    n_samples: int

    def as_dict(self) -> dict:
        return {"model": self.model, "c2": self.c2, "c1": self.c1, "c0": self.c0,
                "rms": self.rms, "window": list(self.window), "n_samples": self.n_samples}


MODELS = ("A-linear-in-log", "T-quadratic-in-log")


def fit_growth(r, y, model: str, window: tuple[float, float] | None = None) -> GrowthFit:
    """Least squares in ``x = log r``: ``y = c1 x + c0`` or ``y = c2 x**2 + c1 x + c0``."""
    if model not in MODELS:
        raise ValueError(f"unknown model {model!r}")
    r = np.asarray(r, dtype=float)
    y = np.asarray(y, dtype=float)
    if window is None:
        window = (float(r.min()), float(r.max()))
    sel = (r >= window[0] * (1 - 1e-12)) & (r <= window[1] * (1 + 1e-12))
    if sel.sum() < 8:
        raise SamplingTooCoarse(f"{sel.sum()} samples in the fit window; at least 8 are needed")
    x = np.log(r[sel])
    if model == "A-linear-in-log":
        X = np.column_stack([x, np.ones_like(x)])
    else:
        X = np.column_stack([x**2, x, np.ones_like(x)])
    coef, _, rank, _ = np.linalg.lstsq(X, y[sel], rcond=None)
    if rank < X.shape[1]:
        raise ValueError("degenerate design matrix")
    resid = y[sel] - X @ coef
    rms = float(np.sqrt(np.mean(resid**2)))
    if model == "A-linear-in-log":
        c2, c1, c0 = 0.0, coef[0], coef[1]
    else:
        c2, c1, c0 = coef
    return GrowthFit(model, float(c2), float(c1), float(c0), rms, (float(window[0]), float(window[1])), int(sel.sum()))


def fit_series(series: GrowthSeries, model: str, window: tuple[float, float] | None = None) -> GrowthFit:
    y = series.A if model == "A-linear-in-log" else series.T
    return fit_growth(series.r, y, model, window)
