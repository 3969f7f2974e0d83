"""The integral ``I``, the cylinder function ``f1`` and the plane function ``f0``.

``I(z) = int_0^z t**(-2/3) (1 - t)**(-1/3) dt`` is multivalued; every
evaluation that depends on the branch takes an explicit ``BranchPath`` and
continues the integrand's logarithms segment by segment.  ``f0`` itself is
single-valued, so the vectorised evaluators used for growth measurements
may pick any convenient branch per region.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import poch

from . import elliptic
from ._quad import graded_segment, jacobi_rule, legendre_rule
from .elliptic import INF, SQRT3, compute_constants, is_inf
from .errors import BranchPointHit, EssentialSingularity, InvalidPath, NonConvergence

DELTA_PATH = 1e-3
I_OF_1 = 2 * math.pi / SQRT3
SCALE = SQRT3 / (2j * math.pi)  # u = SCALE * log z  or  SCALE * I(z)
_JACOBI_NODES = 40

_EPS_UP = cmath.exp(1j * math.pi / 3)
_EPS_DOWN = cmath.exp(-1j * math.pi / 3)


@dataclass(frozen=True)
class BranchPath:
    waypoints: tuple[complex, ...]

    def __init__(self, waypoints):
        object.__setattr__(self, "waypoints", tuple(complex(w) for w in waypoints))
        if len(self.waypoints) < 1:
            raise InvalidPath("a path needs at least a base point")

    @property
    def base(self) -> complex:
        return self.waypoints[0]

    @property
    def end(self) -> complex:
        return self.waypoints[-1]

    def then(self, *points) -> "BranchPath":
        return BranchPath(self.waypoints + tuple(points))


@dataclass(frozen=True)
class ContinuedValue:
    value: object
    path: BranchPath


def _dist_point_segment(c: complex, p: complex, q: complex) -> float:
    d = q - p
    if d == 0:
        return abs(c - p)
    t = ((c - p) * d.conjugate()).real / abs(d) ** 2
    t = min(1.0, max(0.0, t))
    return abs(c - (p + t * d))


def _check_clearance(pts: tuple[complex, ...]) -> None:
    n = len(pts) - 1
    for k in range(n):
        p, q = pts[k], pts[k + 1]
        for c in (0j, 1 + 0j):
            allowed_start = k == 0 and c == 0 and p == 0
            allowed_end = k == n - 1 and c == 1 and q == 1
            d = _dist_point_segment(c, p, q)
            if allowed_start or allowed_end:
                # only the designated endpoint may touch the branch point
                other = q if allowed_start else p
                if abs(other - c) < DELTA_PATH:
                    raise BranchPointHit(f"segment {p!r}->{q!r} degenerates at {c!r}")
                continue
            if d < DELTA_PATH:
                raise BranchPointHit(f"segment {p!r}->{q!r} passes within {d:.2e} of {c!r}")


def _integrand(zeta, log0, log1):
    return np.exp(-2.0 / 3.0 * log0 - 1.0 / 3.0 * log1)


def _graded(p: complex, q: complex, L0: complex, L1: complex) -> complex:
    """Integral over ``[p, q]`` (both away from 0 and 1) with logs continued from ``p``."""
    def f(z):
        return _integrand(z, L0 + np.log(z / p), L1 + np.log((1 - z) / (1 - p)))
    return graded_segment(f, p, q, singular=(0j, 1 + 0j))


def _advance_logs(p: complex, q: complex, L0: complex, L1: complex) -> tuple[complex, complex]:
    return L0 + cmath.log(q / p), L1 + cmath.log((1 - q) / (1 - p))


def _from_zero(q: complex) -> tuple[complex, complex, complex]:
    """Integral over ``[0, q]`` with the principal germ; returns ``(value, log q, log(1-q))``."""
    m = q * min(1.0, 0.5 / abs(q))
    x, w = jacobi_rule(_JACOBI_NODES, -2.0 / 3.0)
    Lm0 = cmath.log(m)
    vals = np.exp(-1.0 / 3.0 * np.log(1 - m * x))
    total = cmath.exp(Lm0 / 3.0) * complex(np.sum(w * vals))
    L0, L1 = Lm0, cmath.log(1 - m)
    if m != q:
        if q == 1:
            total += _to_one(m, L0, L1)
            return total, 0j, complex("nan")
        total += _graded(m, q, L0, L1)
        L0, L1 = _advance_logs(m, q, L0, L1)
    return total, L0, L1


def _to_one(p: complex, L0: complex, L1: complex) -> complex:
    """Integral over ``[p, 1]`` with the endpoint singularity at 1."""
    f = min(1.0, 0.5 / abs(p - 1))
    m = 1 + (p - 1) * f
    total = 0j
    if m != p:
        total += _graded(p, m, L0, L1)
        L0, L1 = _advance_logs(p, m, L0, L1)
    # zeta = m + (1 - m) x, so log(1 - zeta) = log(1 - m) + log(1 - x)
    x, w = jacobi_rule(_JACOBI_NODES, 0.0, -1.0 / 3.0)
    zeta = m + (1 - m) * x
    vals = np.exp(-2.0 / 3.0 * (L0 + np.log(zeta / m)))
    total += (1 - m) * cmath.exp(-L1 / 3.0) * complex(np.sum(w * vals))
    return total


def integral_I(path: BranchPath | list) -> complex:
    """``I`` continued along ``path`` (base point 0, principal cube roots on ``(0, 1)``)."""
    if not isinstance(path, BranchPath):
        path = BranchPath(path)
    pts = path.waypoints
    if pts[0] != 0:
        raise InvalidPath("integral_I paths start at 0")
    # drop repeated points
    clean = [pts[0]]
    for z in pts[1:]:
        if z != clean[-1]:
            clean.append(z)
    pts = tuple(clean)
    if len(pts) == 1:
        return 0j
    if any(z == 1 for z in pts[:-1]) or any(z == 0 for z in pts[1:]):
        raise BranchPointHit("path revisits a branch point")
    _check_clearance(pts)
    total, L0, L1 = _from_zero(pts[1])
    for p, q in zip(pts[1:-1], pts[2:]):
        if q == 1:
            total += _to_one(p, L0, L1)
            break
        total += _graded(p, q, L0, L1)
        L0, L1 = _advance_logs(p, q, L0, L1)
    return total


# --- vectorised principal-region evaluation --------------------------------------

_N_SERIES = 90


@lru_cache(maxsize=None)
def _series_coeffs() -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    n = np.arange(_N_SERIES)
    c0 = poch(1.0 / 3.0, n) / np.exp(np.cumsum(np.log(np.maximum(n, 1)))) / (n + 1.0 / 3.0)
    c1 = poch(2.0 / 3.0, n) / np.exp(np.cumsum(np.log(np.maximum(n, 1)))) / (n + 2.0 / 3.0)
    m = np.arange(1, _N_SERIES + 1)
    cinf = poch(1.0 / 3.0, m) / np.exp(np.cumsum(np.log(m))) / m
    return c0, c1, cinf


def _horner(coeffs: np.ndarray, x: np.ndarray) -> np.ndarray:
    acc = np.zeros_like(x)
    for c in coeffs[::-1]:
        acc = acc * x + c
    return acc


@lru_cache(maxsize=None)
def _infinity_constants() -> tuple[complex, complex]:
    """Additive constants of the expansion at infinity in the upper/lower half-planes."""
    z = 3j
    up = integral_I([0, 0.5, 0.5 + 0.5j, z])
    c_up = up - _EPS_UP * (cmath.log(z) - complex(_horner(_series_coeffs()[2], np.array([1 / z]))[0] / z))
    return c_up, c_up.conjugate()


def I_regions(z) -> np.ndarray:
    """A branch of ``I`` at each point, chosen per region of the plane.

    Upper half-plane points use the continuation from ``(0, 1)`` through the
    upper half-plane, lower half-plane points the one through the lower.
    Values may differ from ``integral_I`` along other paths by the monodromy
    of ``I``; ``f0`` does not see the difference.
    """
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    out = np.empty_like(z)
    c0, c1, cinf = _series_coeffs()
    a0 = np.abs(z)
    a1 = np.abs(z - 1)
    near0 = a0 <= 0.6
    near1 = (a1 <= 0.6) & ~near0
    far = (a0 >= 2.5) & ~near0 & ~near1
    mid = ~(near0 | near1 | far)
    if near0.any():
        x = z[near0]
        out[near0] = x ** (1.0 / 3.0) * _horner(c0, x)
    if near1.any():
        y = 1 - z[near1]
        out[near1] = I_OF_1 - y ** (2.0 / 3.0) * _horner(c1, y)
    if far.any():
        x = z[far]
        c_up, c_dn = _infinity_constants()
        upper = x.imag >= 0
        eps = np.where(upper, _EPS_UP, _EPS_DOWN)
        const = np.where(upper, c_up, c_dn)
        # the principal log is continuous in each closed half-plane used here
        # (on the negative axis it gives the upper-side value, and those
        # points are classed as upper)
        logz = np.log(x)
        inv = 1 / x
        out[far] = const + eps * (logz - inv * _horner(cinf, inv))
    if mid.any():
        out[mid] = _mid_region(z[mid])
    return out


def _mid_region(z: np.ndarray) -> np.ndarray:
    """Straight Gauss-Legendre from ``1/2 +- i/2`` (value from the series at 0)."""
    c0 = _series_coeffs()[0]
    upper = z.imag >= 0
    ref = np.where(upper, 0.5 + 0.5j, 0.5 - 0.5j)
    base = ref ** (1.0 / 3.0) * _horner(c0, ref)
    x, w = legendre_rule(16)
    pieces = 8
    total = np.zeros_like(z)
    for k in range(pieces):
        a = ref + (z - ref) * (k / pieces)
        b = ref + (z - ref) * ((k + 1) / pieces)
        nodes = a[:, None] + (b - a)[:, None] * x[None, :]
        # the integration segment stays in one closed half-plane, where the
        # principal powers are continuous (nodes never lie on the real axis
        # unless the endpoint does)
        nodes_c = np.where(upper[:, None], nodes + 0j, nodes)
        vals = _principal_integrand(nodes_c, upper[:, None])
        total += np.sum(vals * w[None, :], axis=1) * (b - a)
    return base + total


def _principal_integrand(t, upper):
    # on the real axis outside (0, 1) pick the value continuous from the
    # half-plane we are integrating in
    tiny = np.where(upper, 1e-300j, -1e-300j)
    t = np.where(t.imag == 0, t + tiny, t)
    return t ** (-2.0 / 3.0) * (1 - t) ** (-1.0 / 3.0)


def I_prime_abs(z) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    return np.abs(z) ** (-2.0 / 3.0) * np.abs(1 - z) ** (-1.0 / 3.0)


# --- f1 and f0 ------------------------------------------------------------------------


def u_f1(z, sheet: int = 0):
    return SCALE * (np.log(np.asarray(z, dtype=complex)) + 2j * math.pi * sheet)


def f1(z: complex, sheet: int = 0):
    """``g(sqrt(3)/(2 pi i) log z)``; the sheet shifts the argument by a period."""
    z = complex(z)
    if z == 0:
        raise EssentialSingularity("f1 has an essential singularity at 0")
    return elliptic.wp_prime(complex(u_f1(z, sheet)))


def f1_array(z) -> np.ndarray:
    return elliptic.wp_prime(u_f1(z))


def f0(path: BranchPath | list):
    """``g(sqrt(3)/(2 pi i) I(z))`` continued along ``path`` from the base point 1/2."""
    if not isinstance(path, BranchPath):
        path = BranchPath(path)
    if path.base != 0.5:
        raise InvalidPath("f0 paths start at 1/2")
    u = SCALE * integral_I(BranchPath((0j,) + path.waypoints))
    return elliptic.wp_prime(u)


def f0_continued(path: BranchPath | list) -> ContinuedValue:
    if not isinstance(path, BranchPath):
        path = BranchPath(path)
    return ContinuedValue(f0(path), path)


def f0_array(z) -> np.ndarray:
    return elliptic.wp_prime(SCALE * I_regions(z))


# --- critical points ------------------------------------------------------------------


def _critical_u_points(re_lo, re_hi, im_lo, im_hi):
    """Lattice points and centroids (``wp = 0``) of the lattice in a box of the u-plane."""
    lat = elliptic.LATTICE
    out = []
    w1, w2 = lat.omega1, lat.omega2
    nmin = int(math.floor(im_lo / w2.imag)) - 2
    nmax = int(math.ceil(im_hi / w2.imag)) + 2
    offsets = ((0j, "pole"), (1j, "minus"), (complex(SQRT3 / 2, 0.5), "plus"))
    for n in range(nmin, nmax + 1):
        row = n * w2
        mmin = int(math.floor((re_lo - row.real) / w1.real)) - 2
        mmax = int(math.ceil((re_hi - row.real) / w1.real)) + 2
        for m in range(mmin, mmax + 1):
            for off, kind in offsets:
                u = row + m * w1 + off
                if re_lo <= u.real < re_hi and im_lo <= u.imag <= im_hi:
                    out.append((u, kind))
    return out


def local_degree(fn, z0: complex, value, radius: float | None = None, n: int = 720) -> int:
    """Local degree of ``fn`` at ``z0`` by the winding of ``fn - value`` on a small circle."""
    if radius is None:
        radius = 1e-3 * max(1.0, abs(z0))
    t = np.exp(2j * np.pi * np.arange(n + 1) / n)
    vals = fn(z0 + radius * t)
    if is_inf(value):
        h = 1 / vals
    else:
        h = vals - value
    wind = np.sum(np.diff(np.unwrap(np.angle(h)))) / (2 * np.pi)
    return abs(int(round(wind)))


def critical_points_in_disc(fn_id: str, r: float) -> list[tuple[complex, int]]:
    """Critical points of ``f1`` (in ``1 <= |z| <= r``) or ``f0`` (in ``|z| <= r``).

    Points are found as preimages of ``{ia, -ia, inf}`` and each one's local
    degree is measured by the argument principle.
    """
    if fn_id == "f1":
        return _critical_points_f1(r)
    if fn_id == "f0":
        return _critical_points_f0(r)
    raise ValueError(f"unknown function {fn_id!r}")


def _value_of_kind(kind):
    a = compute_constants().a
    return {"pole": INF, "plus": 1j * a, "minus": -1j * a}[kind]


def _critical_points_f1(r: float):
    if r < 1:
        raise ValueError("r must be at least 1 for f1")
    H = SQRT3 / (2 * math.pi) * math.log(r)
    pts = _critical_u_points(0.0, SQRT3, -H, 0.0)
    out = []
    for u, kind in pts:
        z = cmath.exp(u / SCALE)
        deg = local_degree(f1_array, z, _value_of_kind(kind))
        out.append((z, deg))
    out.sort(key=lambda p: (abs(p[0]), cmath.phase(p[0])))
    return out


def _invert_I_upper(target: complex, z0: complex, steps: int = 80) -> complex:
    z = z0
    for _ in range(steps):
        val = complex(I_regions(np.array([z]))[0])
        deriv = z ** (-2.0 / 3.0) * (1 - z) ** (-1.0 / 3.0) if z.imag != 0 else \
            (z + 1e-300j) ** (-2.0 / 3.0) * (1 - z - 1e-300j) ** (-1.0 / 3.0)
        step = (val - target) / deriv
        # damp steps that would leave the closed upper half-plane
        znew = z - step
        while znew.imag < -1e-12 * max(1.0, abs(znew)):
            step /= 2
            znew = z - step
        z = complex(znew.real, max(znew.imag, 0.0))
        if abs(step) < 1e-13 * max(1.0, abs(z)):
            return z
    if abs(complex(I_regions(np.array([z]))[0]) - target) < 1e-9 * max(1.0, abs(target)):
        return z
    raise NonConvergence(f"inverting I did not converge for target {target!r} from seed {z0!r}")


def _critical_points_f0(r: float):
    """Critical points of ``f0`` with ``|z| <= r``.

    The upper half-plane is mapped by ``SCALE * I`` onto a region bounded by
    the segment ``[-i, 0]`` and two rays; critical points there correspond to
    lattice points and centroids in that region.  The lower half-plane is the
    mirror image (``f0`` commutes with conjugation up to the symmetry
    ``w -> -conj(w)``).
    """
    c_up, _ = _infinity_constants()
    L = math.log(max(r, 2.0)) + 2
    corners = [0j, -1j]
    far = SCALE * (c_up + _EPS_UP * (L + 1j * math.pi))
    far2 = SCALE * (c_up + _EPS_UP * L)
    xs = [p.real for p in corners + [far, far2]]
    ys = [p.imag for p in corners + [far, far2]]
    cands = _critical_u_points(min(xs) - 1, max(xs) + 1, min(ys) - 1, max(ys) + 1)
    found: list[tuple[complex, int]] = []
    for u, kind in cands:
        target = u / SCALE
        # seed from the asymptotic form, or near the finite vertices
        zs = cmath.exp((target - c_up) / _EPS_UP)
        # boundary targets sit on the real axis; keep the seed just inside
        seed = complex(zs.real, max(abs(zs.imag), 1e-3 * abs(zs)))
        if abs(zs) <= 1.5:
            seed = complex(zs.real, max(seed.imag, 0.1))
        try:
            z = _invert_I_upper(target, seed)
        except NonConvergence:
            continue
        if abs(complex(I_regions(np.array([z]))[0]) - target) > 1e-8 * max(1.0, abs(target)):
            continue
        for zz in {z, z.conjugate()}:
            if abs(zz) <= r and all(abs(zz - p) > 1e-8 * max(1.0, abs(zz)) for p, _ in found):
                if kind == "pole":
                    deg = local_degree(f0_array, zz, INF)
                else:
                    deg = local_degree(f0_array, zz, _nearest_crit(complex(f0_array(np.array([zz]))[0])))
                # the simple pole at 0 is a preimage of inf but not a critical point
                if deg >= 2:
                    found.append((zz, deg))
    found.sort(key=lambda p: (abs(p[0]), cmath.phase(p[0])))
    return found


def _nearest_crit(val: complex):
    a = compute_constants().a
    return min((1j * a, -1j * a), key=lambda c: abs(val - c))
