"""The conformal map between the unit equilateral triangle and a half-plane.

The triangle has vertices ``0``, ``i`` and ``(sqrt(3) + i)/2``.  The forward
map is ``wp'`` restricted to the triangle, which sends it onto the right
half-plane with ``0 -> inf``, ``(sqrt(3)+i)/2 -> i a`` and ``i -> -i a``.
The inverse is computed independently as a Schwarz-Christoffel integral
(Gauss-Jacobi near the prevertices), so the two routes can be compared.

The flat metric ``rho0`` on the thrice-punctured sphere has length element
``|(g^-1)'(w)| |dw|``; each half-plane is isometric to the triangle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.special import beta as beta_fn

from . import elliptic
from ._quad import graded_segment, jacobi_rule
from .elliptic import INF, SQRT3, compute_constants, is_inf
from .errors import MetricSingularity, OutsideDomain


@dataclass(frozen=True)
class TriangleDomain:
    vertices: tuple[complex, complex, complex] = (0j, 1j, complex(SQRT3 / 2, 0.5))

    def contains(self, u: complex, tol: float = 1e-12) -> bool:
        u = complex(u)
        v = self.vertices
        for k in range(3):
            p, q = v[k], v[(k + 1) % 3]
            # vertices are listed clockwise, so the interior is on the right
            if ((q - p).conjugate() * (u - p)).imag > tol:
                return False
        return True


DELTA = TriangleDomain()
_EDGE_MID = (DELTA.vertices[1] + DELTA.vertices[2]) / 2  # wp' vanishes here
_SC_BETA = beta_fn(0.5, 1.0 / 3.0)  # Euclidean length of the image of [-1, 1]
_SC_ROT = complex(-SQRT3 / 2, 0.5)  # exp(5 pi i / 6)
_F_INF = 0.5j * beta_fn(0.5, 1.0 / 6.0)  # SC integral from 0 to i*inf
_NODES = 40


@dataclass(frozen=True)
class CriticalTriple:
    """Three distinct points of the sphere; ``A, B, C`` are sent to ``inf, ia, -ia``.

    Under ``map_g`` the triangle vertices go ``0 -> A``,
    ``(sqrt(3)+i)/2 -> B``, ``i -> C``.
    """

    A: object = INF
    B: object = None
    C: object = None

    def __post_init__(self):
        a = compute_constants().a
        if self.B is None:
            object.__setattr__(self, "B", 1j * a)
        if self.C is None:
            object.__setattr__(self, "C", -1j * a)
        pts = [self.A, self.B, self.C]
        finite = [p for p in pts if not is_inf(p)]
        if len(finite) < 2 or any(abs(complex(p) - complex(q)) < 1e-14 for i, p in enumerate(finite) for q in finite[i + 1:]):
            raise ValueError("critical triple must be three distinct points")

    @property
    def is_example(self) -> bool:
        a = compute_constants().a
        return is_inf(self.A) and not is_inf(self.B) and not is_inf(self.C) \
            and abs(self.B - 1j * a) < 1e-12 and abs(self.C + 1j * a) < 1e-12

    def punctures(self) -> tuple:
        return (self.A, self.B, self.C)

    def to_example(self, w):
        """The Moebius map sending ``(A, B, C)`` to ``(inf, ia, -ia)``."""
        if self.is_example:
            return w
        a = compute_constants().a
        A, B, C = self.A, self.B, self.C
        if is_inf(w):
            s = _cross_ratio_at_inf(A, B, C)
        else:
            s = _cross_ratio(complex(w), A, B, C)
        if is_inf(s):
            return INF
        return 2j * a * s - 1j * a

    def from_example(self, v):
        if self.is_example:
            return v
        a = compute_constants().a
        s = INF if is_inf(v) else (complex(v) + 1j * a) / (2j * a)
        return _inverse_cross_ratio(s, self.A, self.B, self.C)

    def derivative_to_example(self, w: complex) -> float:
        """``|M'(w)|`` for the Moebius map ``M = to_example``."""
        if self.is_example:
            return 1.0
        a = compute_constants().a
        A, B, C = self.A, self.B, self.C
        if is_inf(A):
            ds = 1.0 / (B - C)
        elif is_inf(B):
            ds = (C - A) / (w - A) ** 2
        elif is_inf(C):
            ds = -(B - A) / (w - A) ** 2
        else:
            ds = (B - A) / (B - C) * (C - A) / (w - A) ** 2
        return abs(2j * a * ds)


def _cross_ratio(w, A, B, C):
    """``S(w)`` with ``S(A) = inf``, ``S(B) = 1``, ``S(C) = 0``."""
    if is_inf(A):
        return (w - C) / (B - C)
    if is_inf(B):
        if w == A:
            return INF
        return (w - C) / (w - A)
    if is_inf(C):
        if w == A:
            return INF
        return (B - A) / (w - A)
    if w == A:
        return INF
    return (w - C) * (B - A) / ((w - A) * (B - C))


def _cross_ratio_at_inf(A, B, C):
    if is_inf(A):
        return INF
    if is_inf(B):
        return 1.0 + 0j
    if is_inf(C):
        return 0j
    return (B - A) / (B - C)


def _inverse_cross_ratio(s, A, B, C):
    if is_inf(s):
        return A
    if is_inf(A):
        return C + s * (B - C)
    if is_inf(B):
        # s = (w - C)/(w - A)
        if s == 1:
            return INF
        return (C - s * A) / (1 - s)
    if is_inf(C):
        if s == 0:
            return INF
        return A + (B - A) / s
    k = (B - A) / (B - C)
    # s (w - A) = k (w - C)
    if s == k:
        return INF
    return (s * A - k * C) / (s - k)


EXAMPLE = CriticalTriple()


def map_g(u: complex, triple: CriticalTriple = EXAMPLE, tol: float = 1e-12):
    """Conformal map of the closed triangle onto the closed half-plane bounded by the triple."""
    if not DELTA.contains(u, tol):
        raise OutsideDomain(f"{u!r} is not in the closed triangle")
    w = elliptic.wp_prime(complex(u))
    return triple.from_example(w)


def _sc_integral(zeta: complex) -> complex:
    """``int_0^zeta (1 - t**2)**(-2/3) dt`` in the closed upper half-plane."""
    x, wts = jacobi_rule(_NODES, -2.0 / 3.0)
    if abs(zeta - 1) < 0.5 or abs(zeta + 1) < 0.5:
        sgn = 1.0 if abs(zeta - 1) < 0.5 else -1.0
        # endpoint +-1 with weight s**(-2/3): t = sgn (1 - d s), d = 1 - sgn*zeta
        # componentwise, so a boundary point keeps the sign of its zero imaginary part
        d = complex(1 - sgn * zeta.real, -sgn * zeta.imag)
        vals = (2 - d * x) ** (-2.0 / 3.0)
        tail = d ** (1.0 / 3.0) * np.sum(wts * vals)
        return sgn * (_SC_BETA / 2 - tail)
    if abs(zeta) > 2:
        # int_zeta^inf with t = zeta/s: zeta * int_0^1 s**(-2/3) (s**2 - zeta**2)**(-2/3) ds
        vals = (x**2 - zeta**2) ** (-2.0 / 3.0)
        tail = zeta * np.sum(wts * vals)
        # principal powers are consistent here only in the open upper half-plane
        if zeta.imag < 0:
            raise OutsideDomain("internal: lower half-plane")
        if zeta.imag == 0:
            # on the real axis outside [-1, 1] approach from above
            side = -1e-300j if zeta.real > 0 else 1e-300j
            tail = complex(zeta * np.sum(wts * (x**2 - zeta**2 + side) ** (-2.0 / 3.0)))
        return _F_INF - tail
    f = lambda t: (1 - t * t + 0j) ** (-2.0 / 3.0)
    sing = (1 + 0j, -1 + 0j)
    if zeta.imag == 0 and abs(zeta.real) > 1:
        # boundary point beyond a prevertex: detour through the upper half-plane,
        # where the principal branch is continuous (nodes never hit the endpoint)
        mid = complex(zeta.real, 0.5)
        return graded_segment(f, 0j, mid, singular=sing) + graded_segment(f, mid, zeta, singular=sing)
    return graded_segment(f, 0j, zeta, singular=sing)


def map_g_inverse(w, triple: CriticalTriple = EXAMPLE, tol: float = 1e-12) -> complex:
    """Schwarz-Christoffel inverse of ``map_g``."""
    v = triple.to_example(w)
    if is_inf(v):
        return DELTA.vertices[0]
    a = compute_constants().a
    v = complex(v)
    if v.real < -tol * max(1.0, abs(v)):
        raise OutsideDomain(f"{w!r} is not in the closed half-plane of the triple")
    zeta = 1j * v / a
    if zeta.imag <= 1e-12 * max(1.0, abs(zeta)):
        # on or numerically on the boundary (including -0.0): approach from above
        zeta = complex(zeta.real, 0.0)
    return _EDGE_MID + _SC_ROT * _sc_integral(zeta) / _SC_BETA


def _density_example(v):
    a = compute_constants().a
    v = np.asarray(v, dtype=complex)
    return np.abs(1 + (v / a) ** 2) ** (-2.0 / 3.0) / (a * _SC_BETA)


def rho0_density(w, triple: CriticalTriple = EXAMPLE, tol: float = 1e-14) -> float:
    """Length element of ``rho0`` at ``w`` (``ds = density * |dw|``).

    On the defining half-plane this is ``|(g^-1)'(w)|``; the formula is
    invariant under the reflection in the boundary, which extends it.
    """
    for p in triple.punctures():
        if is_inf(p) and is_inf(w):
            raise MetricSingularity("w is a puncture")
        if not is_inf(p) and not is_inf(w) and abs(complex(w) - complex(p)) <= tol:
            raise MetricSingularity(f"{w!r} is a puncture")
    if is_inf(w):
        # finite puncture-free chart at infinity: the density decays like |w|^(-4/3)
        return 0.0
    v = triple.to_example(complex(w))
    if is_inf(v):
        raise MetricSingularity("w maps to the puncture at infinity")
    return float(_density_example(v)) * triple.derivative_to_example(complex(w))


def reflect(w, triple: CriticalTriple = EXAMPLE):
    """Reflection in the circle through the triple."""
    v = triple.to_example(w)
    if is_inf(v):
        return triple.from_example(INF)
    v = complex(v)
    return triple.from_example(complex(-v.real, v.imag))


def rho0_area(half: bool = False, epsabs: float = 1e-12) -> float:
    """``rho0``-area of one half-plane or of the whole sphere.

    Uses ``zeta = cosh(s + it)`` on the upper half-plane of the
    Schwarz-Christoffel variable; the integrand becomes
    ``(sinh(s)**2 + sin(t)**2)**(-1/3) / B**2``.
    """
    def inner(s):
        f = lambda t: (math.sinh(s) ** 2 + math.sin(t) ** 2) ** (-1.0 / 3.0)
        # integrable t**(-2/3) spikes at both ends when s -> 0
        v, _ = integrate.quad(f, 0.0, math.pi / 2, epsabs=epsabs, epsrel=1e-12, limit=200)
        return 2 * v

    total = 0.0
    for lo, hi in ((0.0, 0.5), (0.5, 4.0), (4.0, 40.0)):
        v, _ = integrate.quad(inner, lo, hi, epsabs=epsabs, epsrel=1e-11, limit=200)
        total += v
    # tail beyond s = 40 where the integrand is (sinh s)^(-2/3) ~ 2^(2/3) e^(-2s/3)
    total += 2 ** (2.0 / 3.0) * 1.5 * math.exp(-2 * 40.0 / 3) * math.pi
    area = total / _SC_BETA**2
    return area if half else 2 * area


def _segment_length(p: complex, q: complex, triple: CriticalTriple) -> float:
    if p == q:
        return 0.0
    d = q - p
    length = abs(d)
    f = lambda t: rho0_density(p + d * t, triple, tol=0.0) * length
    val, _ = integrate.quad(f, 0.0, 1.0, epsabs=0.0, epsrel=1e-10, limit=400)
    return val


def _ray_length(p: complex, direction: complex, triple: CriticalTriple) -> float:
    d = direction / abs(direction)
    f = lambda x: rho0_density(p + d * x, triple, tol=0.0)
    v1, _ = integrate.quad(f, 0.0, 1.0, epsabs=0.0, epsrel=1e-10, limit=400)
    v2, _ = integrate.quad(f, 1.0, np.inf, epsabs=0.0, epsrel=1e-10, limit=400)
    return v1 + v2


def _puncture_in_open_segment(p, q, triple, tol=1e-12) -> bool:
    for c in triple.punctures():
        if is_inf(c):
            continue
        c = complex(c)
        if abs(c - p) <= tol or abs(c - q) <= tol:
            continue
        d = q - p
        t = ((c - p) * d.conjugate()).real / abs(d) ** 2
        if 0 < t < 1 and abs(p + t * d - c) <= tol * max(1.0, abs(d)):
            return True
    return False


def rho0_length(path, triple: CriticalTriple = EXAMPLE) -> float:
    """``rho0``-length of a polyline.

    Punctures may occur as polyline vertices (the singularity is integrable),
    never strictly inside a segment.  An ``INF`` entry at either end extends
    the adjacent segment to a ray.
    """
    pts = list(path)
    if len(pts) < 2:
        return 0.0
    total = 0.0
    start_ray = is_inf(pts[0])
    end_ray = is_inf(pts[-1])
    core = pts[1 if start_ray else 0: len(pts) - 1 if end_ray else len(pts)]
    if any(is_inf(p) for p in core):
        raise ValueError("INF is only allowed at the ends of a path")
    core = [complex(p) for p in core]
    if len(core) < 2 and (start_ray or end_ray):
        raise ValueError("a ray needs a finite segment to fix its direction")
    for p, q in zip(core[:-1], core[1:]):
        if _puncture_in_open_segment(p, q, triple):
            raise MetricSingularity("path passes through a puncture")
        total += _segment_length(p, q, triple)
    if start_ray:
        total += _ray_length(core[0], core[0] - core[1], triple)
    if end_ray:
        total += _ray_length(core[-1], core[-1] - core[-2], triple)
    return total


def sample_rho0_measure(rng: np.random.Generator, n: int, triple: CriticalTriple = EXAMPLE) -> np.ndarray:
    """``n`` points distributed by the normalised ``rho0`` area.

    The sphere is two copies of the triangle: draw a uniform point of the
    triangle, map it by ``g`` and reflect with probability 1/2.
    """
    v = np.array(DELTA.vertices)
    r1 = rng.random(n)
    r2 = rng.random(n)
    flip = r1 + r2 > 1
    r1 = np.where(flip, 1 - r1, r1)
    r2 = np.where(flip, 1 - r2, r2)
    u = v[0] + r1 * (v[1] - v[0]) + r2 * (v[2] - v[0])
    w = elliptic.wp_prime(u)
    side = rng.random(n) < 0.5
    w = np.where(side, -w.conjugate(), w)
    if not triple.is_example:
        w = np.array([complex(triple.from_example(x)) if not is_inf(triple.from_example(x)) else np.nan for x in w])
    return w
