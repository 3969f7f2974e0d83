"""Equiharmonic lattice, Weierstrass functions and derived constants.

The lattice is ``sqrt(3) * (Z + Z*omega)`` with ``omega = exp(2*pi*i/3)``.
Evaluation reduces the argument to the Voronoi cell of the origin and sums
the Laurent expansion of ``wp`` there; with ``g2 = 0`` only every third
coefficient survives, so the series is a polynomial in ``z**6``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import mpmath
import numpy as np

from .errors import CriticalValueProximity

SQRT3 = math.sqrt(3.0)
OMEGA = complex(-0.5, SQRT3 / 2)

# Number of nonzero Laurent coefficients kept beyond z**-2.  On the Voronoi
# cell |z| <= 1 and the radius of convergence is sqrt(3), so term m is
# roughly 3**(-3m); 14 terms put the truncation far below 1e-16.
_N_TERMS = 14


class Infinity:
    """The point at infinity of the extended complex plane."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "INF"

    def __reduce__(self):
        return (Infinity, ())


INF = Infinity()


def is_inf(w) -> bool:
    return w is INF


@dataclass(frozen=True)
class EquiharmonicLattice:
    omega1: complex = complex(SQRT3, 0.0)
    omega2: complex = SQRT3 * OMEGA

    @property
    def tau(self) -> complex:
        return self.omega2 / self.omega1

    def to_cell_coords(self, z):
        """Real coordinates ``(s, t)`` with ``z = s*omega1 + t*omega2``."""
        z = np.asarray(z, dtype=complex)
        w1, w2 = self.omega1, self.omega2
        det = (w1.conjugate() * w2).imag
        s = (z * w2.conjugate()).imag / -det
        t = (z * w1.conjugate()).imag / det
        return s, t

    def reduce(self, z):
        """Return ``(z - lam, lam)`` where ``lam`` is the lattice point nearest ``z``."""
        z = np.asarray(z, dtype=complex)
        s, t = self.to_cell_coords(z)
        s0, t0 = np.floor(s), np.floor(t)
        best = None
        best_lam = None
        # the nearest lattice point is a corner of the enclosing parallelogram
        for ds in (0.0, 1.0):
            for dt in (0.0, 1.0):
                lam = (s0 + ds) * self.omega1 + (t0 + dt) * self.omega2
                d = np.abs(z - lam)
                if best is None:
                    best, best_lam = d, lam
                else:
                    closer = d < best
                    best = np.where(closer, d, best)
                    best_lam = np.where(closer, lam, best_lam)
        return z - best_lam, best_lam

    def is_lattice_point(self, z, tol: float = 1e-13) -> bool:
        r, _ = self.reduce(z)
        return bool(abs(complex(r)) < tol)


LATTICE = EquiharmonicLattice()


@dataclass(frozen=True)
class EquiharmonicConstants:
    k: float
    a: float
    g2: complex
    g3: complex


def _divisor_power_sum(n: int, p: int) -> int:
    return sum(d**p for d in range(1, n + 1) if n % d == 0)


def eisenstein_invariants(lattice: EquiharmonicLattice = LATTICE, dps: int = 30, terms: int = 40):
    """``(g2, g3)`` from the q-expansions of E4 and E6.

    ``g2 = 60 * G4`` and ``g3 = 140 * G6`` with ``G_2k = 2 zeta(2k) E_2k(tau) / omega1**2k``.
    """
    with mpmath.workdps(dps):
        w1 = mpmath.mpc(lattice.omega1)
        tau = mpmath.exp(2j * mpmath.pi / 3)
        q = mpmath.exp(2j * mpmath.pi * tau)
        e4 = 1 + 240 * mpmath.fsum(_divisor_power_sum(n, 3) * q**n for n in range(1, terms))
        e6 = 1 - 504 * mpmath.fsum(_divisor_power_sum(n, 5) * q**n for n in range(1, terms))
        g2 = 60 * 2 * mpmath.zeta(4) * e4 / w1**4
        g3 = 140 * 2 * mpmath.zeta(6) * e6 / w1**6
        return complex(g2), complex(g3)


def lattice_sum_invariants(lattice: EquiharmonicLattice = LATTICE, radius: int = 200):
    """``(g2, g3)`` by direct summation over the lattice points in a disc (slow oracle).

    A disc is invariant under the hexagonal rotations, so the truncated ``g2``
    sum cancels orbit by orbit; the ``g3`` tail is ``O(radius**-4)``.
    """
    m = np.arange(-2 * radius, 2 * radius + 1)
    mm, nn = np.meshgrid(m, m)
    lam = (mm * lattice.omega1 + nn * lattice.omega2).ravel()
    # |m w1 + n w2|**2 = 3 (m**2 - m n + n**2): cut on the exact integer form
    q = (mm * mm - mm * nn + nn * nn).ravel()
    lam = lam[(q > 0) & (q <= radius * radius)]
    # sum small terms first
    lam = lam[np.argsort(-np.abs(lam))]
    g2 = 60 * np.sum(lam**-4)
    g3 = 140 * np.sum(lam**-6)
    return complex(g2), complex(g3)


@lru_cache(maxsize=None)
def compute_constants(precision: int = 15) -> EquiharmonicConstants:
    if precision < 10:
        raise ValueError("precision must be at least 10 digits")
    with mpmath.workdps(precision + 10):
        k = mpmath.gamma(mpmath.mpf(1) / 3) ** 3 / (2 * mpmath.pi * mpmath.sqrt(3))
        a = k**3
        kf, af = float(k), float(a)
    g2, g3 = eisenstein_invariants(dps=precision + 10)
    return EquiharmonicConstants(k=kf, a=af, g2=g2, g3=g3)


@lru_cache(maxsize=None)
def _laurent_coefficients() -> tuple[float, ...]:
    """Coefficients ``b_m`` of ``wp(z) = z**-2 + sum_m b_m z**(6m - 2)``."""
    g3 = mpmath.mpf(compute_constants().g3.real)
    with mpmath.workdps(40):
        nmax = 3 * _N_TERMS + 3
        c = [mpmath.mpf(0)] * (nmax + 1)
        c[3] = g3 / 28
        for n in range(4, nmax + 1):
            acc = mpmath.fsum(c[m] * c[n - m] for m in range(2, n - 1))
            c[n] = 3 * acc / ((2 * n + 1) * (n - 3))
        # c[n] multiplies z**(2n - 2); nonzero only for n = 3m
        return tuple(float(c[3 * m]) for m in range(1, _N_TERMS + 1))


def _series(r, derivative: int):
    b = _laurent_coefficients()
    r6 = r**6
    if derivative == 0:
        acc = np.zeros_like(r)
        for m in range(len(b), 0, -1):
            acc = acc * r6 + b[m - 1]
        # sum b_m r**(6m-2) = r**4 * sum b_m r6**(m-1)
        return r**-2 + r**4 * acc
    if derivative == 1:
        acc = np.zeros_like(r)
        for m in range(len(b), 0, -1):
            acc = acc * r6 + (6 * m - 2) * b[m - 1]
        return -2 * r**-3 + r**3 * acc
    if derivative == 2:
        acc = np.zeros_like(r)
        for m in range(len(b), 0, -1):
            acc = acc * r6 + (6 * m - 2) * (6 * m - 3) * b[m - 1]
        return 6 * r**-4 + r**2 * acc
    raise ValueError(derivative)


def _evaluate(z, derivative: int, lattice: EquiharmonicLattice):
    scalar = np.ndim(z) == 0
    r, _ = lattice.reduce(np.atleast_1d(np.asarray(z, dtype=complex)))
    # closer than this the principal part overflows a double: treat as the pole
    pole = np.abs(r) < 1e-60
    with np.errstate(divide="ignore", invalid="ignore"):
        val = _series(np.where(pole, 1.0, r), derivative)
    val = np.where(pole, np.nan + 0j, val)
    if scalar:
        return INF if pole[0] else complex(val[0])
    return val


def wp(z, lattice: EquiharmonicLattice = LATTICE):
    """Weierstrass ``wp``.  Scalars return ``INF`` at lattice points; arrays carry NaN there."""
    return _evaluate(z, 0, lattice)


def wp_prime(z, lattice: EquiharmonicLattice = LATTICE):
    return _evaluate(z, 1, lattice)


def wp_second(z, lattice: EquiharmonicLattice = LATTICE):
    """``wp'' = 6 wp**2`` (``g2 = 0``), evaluated from the series directly."""
    return _evaluate(z, 2, lattice)


def cell_representative(z, lattice: EquiharmonicLattice = LATTICE) -> complex:
    """Translate ``z`` into ``{s*omega1 + t*omega2 : 0 <= s, t < 1}``."""
    s, t = lattice.to_cell_coords(z)
    s, t = float(s) % 1.0, float(t) % 1.0
    # guard against s == 1.0 after the modulo of a tiny negative number
    s = 0.0 if s >= 1.0 else s
    t = 0.0 if t >= 1.0 else t
    return s * lattice.omega1 + t * lattice.omega2


def _newton(z, w, lattice, steps: int = 60):
    for _ in range(steps):
        f = wp_prime(z, lattice)
        if f is INF:
            return None
        df = wp_second(z, lattice)
        step = (f - w) / df
        z = z - step
        if abs(step) < 1e-15 * max(1.0, abs(z)):
            break
    return z


def solve_wp_prime(w: complex, lattice: EquiharmonicLattice = LATTICE, tol: float = 1e-6) -> list[complex]:
    """All solutions of ``wp'(z) = w`` in the fundamental cell (exactly three).

    Raises ``CriticalValueProximity`` when ``w`` is within ``tol`` (relative) of
    ``+-i a`` or has modulus beyond ``1/tol``.
    """
    if w is INF:
        raise CriticalValueProximity("infinity is a critical value")
    w = complex(w)
    a = compute_constants().a
    for crit in (1j * a, -1j * a):
        if abs(w - crit) < tol * a:
            raise CriticalValueProximity(f"{w!r} is within {tol} of the critical value {crit!r}")
    if abs(w) > 1.0 / tol:
        raise CriticalValueProximity(f"{w!r} is too close to the critical value infinity")

    # wp' = w  <=>  wp = p with p a root of 4p**3 - g3 = w**2; each root p
    # gives the pair +-z of solutions of wp(z) = p and exactly one has wp' = w.
    g3 = compute_constants().g3.real
    ps = np.roots([4.0, 0.0, 0.0, -(g3 + w * w)])
    roots: list[complex] = []
    for p in ps:
        z0 = _invert_wp(p, lattice)
        for cand in (z0, -z0):
            if abs(wp_prime(cand, lattice) - w) < 1e-6 * max(1.0, abs(w)):
                z = _newton(cand, w, lattice)
                roots.append(cell_representative(z, lattice))
                break
        else:
            z = _newton(z0, w, lattice)
            roots.append(cell_representative(z, lattice))
    # disambiguate the rare case where two seeds converged to one root
    uniq: list[complex] = []
    for z in roots:
        if all(abs(_mod_lattice_distance(z, u, lattice)) > 1e-7 for u in uniq):
            uniq.append(z)
    if len(uniq) != 3:
        uniq = _solve_by_grid(w, lattice)
    return sorted(uniq, key=lambda z: (round(z.real, 9), round(z.imag, 9)))


def _mod_lattice_distance(z1, z2, lattice):
    r, _ = lattice.reduce(z1 - z2)
    return complex(r)


def _invert_wp(p: complex, lattice) -> complex:
    """A solution of ``wp(z) = p`` by Newton from the best seed on a grid."""
    grid = _seed_grid(lattice)
    vals = wp(grid, lattice)
    i = int(np.nanargmin(np.abs(vals - p)))
    z = grid[i]
    for _ in range(80):
        f = wp(z, lattice) - p
        df = wp_prime(z, lattice)
        if df is INF or df == 0:
            break
        step = f / df
        z -= step
        if abs(step) < 1e-15:
            break
    return z


@lru_cache(maxsize=4)
def _seed_grid(lattice) -> np.ndarray:
    s = (np.arange(40) + 0.5) / 40
    ss, tt = np.meshgrid(s, s)
    return (ss * lattice.omega1 + tt * lattice.omega2).ravel()


def _solve_by_grid(w, lattice) -> list[complex]:
    grid = _seed_grid(lattice)
    vals = wp_prime(grid, lattice)
    order = np.argsort(np.abs(vals - w))
    found: list[complex] = []
    for i in order[:400]:
        z = _newton(grid[i], w, lattice)
        if z is None or abs(wp_prime(z, lattice) - w) > 1e-8 * max(1.0, abs(w)):
            continue
        z = cell_representative(z, lattice)
        if all(abs(_mod_lattice_distance(z, u, lattice)) > 1e-7 for u in found):
            found.append(z)
        if len(found) == 3:
            break
    return found


def argument_principle_count(w: complex, lattice: EquiharmonicLattice = LATTICE, n: int = 4000) -> int:
    """Number of zeros of ``wp' - w`` in a shifted fundamental cell, via winding.

    The pole count (3) is subtracted back out, so the result is the number of
    solutions.  The cell is shifted off the pole at the origin.
    """
    shift = 0.123 + 0.0567j
    corners = [shift, shift + lattice.omega1, shift + lattice.omega1 + lattice.omega2, shift + lattice.omega2, shift]
    pts = []
    for p, q in zip(corners[:-1], corners[1:]):
        t = np.arange(n) / n
        pts.append(p + (q - p) * t)
    pts = np.concatenate(pts + [np.array([corners[0]])])
    vals = wp_prime(pts, lattice) - w
    winding = np.sum(np.diff(np.unwrap(np.angle(vals)))) / (2 * np.pi)
    poles = 0
    for lam in (0, lattice.omega1, lattice.omega2, lattice.omega1 + lattice.omega2):
        s, t = lattice.to_cell_coords(lam - shift)
        if 0 < s < 1 and 0 < t < 1:
            poles += 3
    return int(round(winding)) + poles
