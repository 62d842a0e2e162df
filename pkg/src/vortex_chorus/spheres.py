"""Explicit degree-one choreographic spheres in CP^{n-1} and CP^{n-2}.

Each sphere is the projective line through two configurations fixed by the
cyclic action, parametrised so that rotating the domain by 2 pi / n matches
one application of the action on the target.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, OddN, QuadratureFailure
from .hamiltonians import doubled_polygon, regular_polygon
from .projective import (
    LimFrame,
    ProjectivePoint,
    fs_distance,
    fs_distance_batch,
    lim_transform,
    sigma,
    sigma_rows,
)

QUAD_TOL = 1e-8
DISC_AREA = np.pi / 2


class Target(str, enum.Enum):
    CPN1 = "cpn1"
    CPN2 = "cpn2"


def make_configurations(n: int, target: Target | str) -> tuple[ProjectivePoint, ProjectivePoint]:
    """(A, B): total (or binary total) collision and the n-polygon."""
    target = Target(target)
    if n < 2:
        raise DomainError("n >= 2 required")
    if target is Target.CPN1:
        return ProjectivePoint(np.ones(n)), ProjectivePoint(regular_polygon(n))
    if n % 2:
        raise OddN("the centred sphere needs an even number of vortices")
    if n < 4:
        raise DomainError("CP^{n-2} sphere needs n >= 4 (CP^0 is a point)")
    frame = LimFrame.dft(n)
    wA = lim_transform(frame, doubled_polygon(n))
    wB = lim_transform(frame, regular_polygon(n))
    return ProjectivePoint(wA[:-1]), ProjectivePoint(wB[:-1])


@dataclass(frozen=True, eq=False)
class SphereMap:
    """Line through A and B.

    CP^{n-1}: u(z) = [zeta z A + B] (u(0) = B, u(inf) = A), using the
    unnormalised vectors A = (1, ..., 1), B = (e^{2 pi i k / n})_k.
    CP^{n-2}: u(z) = [zeta z W_B + W_A] (u(0) = A, u(inf) = B) in the
    centred frame coordinates.
    """

    n: int
    target: Target
    A: ProjectivePoint
    B: ProjectivePoint
    moebius_scale: complex = 1.0
    a_vec: np.ndarray | None = None
    b_vec: np.ndarray | None = None

    @classmethod
    def make(cls, n: int, target: Target | str = Target.CPN1, moebius_scale: complex = 1.0) -> "SphereMap":
        target = Target(target)
        A, B = make_configurations(n, target)
        if target is Target.CPN1:
            a, b = np.ones(n, dtype=complex), regular_polygon(n)
        else:
            frame = LimFrame.dft(n)
            a = lim_transform(frame, doubled_polygon(n))[:-1]
            b = lim_transform(frame, regular_polygon(n))[:-1]
        if moebius_scale == 0:
            raise DomainError("moebius_scale must be non-zero")
        return cls(n, target, A, B, complex(moebius_scale), a, b)

    def with_scale(self, zeta: complex) -> "SphereMap":
        return SphereMap(self.n, self.target, self.A, self.B, complex(zeta), self.a_vec, self.b_vec)

    @property
    def _pencil(self) -> tuple[np.ndarray, np.ndarray]:
        """(coefficient of z, constant term) of the linear lift v(z)."""
        if self.target is Target.CPN1:
            return self.moebius_scale * self.a_vec, self.b_vec
        return self.moebius_scale * self.b_vec, self.a_vec

    def lift(self, z) -> np.ndarray:
        """Unnormalised lift rows v(z) for finite z (vectorised)."""
        p, q = self._pencil
        z = np.asarray(z, dtype=complex)
        return z[..., None] * p + q

    def lift_inverted(self, w) -> np.ndarray:
        """Lift in the chart at infinity: w v(1/w) = p + w q."""
        p, q = self._pencil
        w = np.asarray(w, dtype=complex)
        return p + w[..., None] * q

    @property
    def endpoint_zero(self) -> ProjectivePoint:
        return self.B if self.target is Target.CPN1 else self.A

    @property
    def endpoint_inf(self) -> ProjectivePoint:
        return self.A if self.target is Target.CPN1 else self.B


def evaluate_sphere(s: SphereMap, z) -> ProjectivePoint:
    """u(z) for z in C or z = inf (pass ``np.inf`` or ``None``)."""
    if z is None or (np.isscalar(z) and np.isinf(np.abs(z))):
        return ProjectivePoint(s.lift_inverted(0.0))
    return ProjectivePoint(s.lift(complex(z)))


def _eval_rows(s: SphereMap, zs) -> np.ndarray:
    rows = []
    for z in zs:
        rows.append(evaluate_sphere(s, z).v)
    return np.array(rows)


def equivariance_defect(s: SphereMap, samples) -> float:
    """max_z d(u(e^{2 pi i/n} z), sigma u(z))."""
    samples = list(samples)
    if not samples:
        raise DomainError("need at least one sample")
    rot = np.exp(2j * np.pi / s.n)
    rotated = [z if (z is None or np.isinf(np.abs(z))) else rot * z for z in samples]
    lhs = _eval_rows(s, rotated)
    rhs = sigma_rows(_eval_rows(s, samples), s.n)
    return float(np.max(fs_distance_batch(lhs, rhs)))


def random_points(n_points: int, seed: int = 0, scale: float = 3.0) -> np.ndarray:
    """Log-uniform moduli, uniform arguments: covers both charts."""
    rng = np.random.default_rng(seed)
    r = np.exp(rng.uniform(-np.log(scale), np.log(scale), n_points))
    return r * np.exp(2j * np.pi * rng.uniform(size=n_points))


# ------------------------------------------------------------ area

def area_density(v: np.ndarray, dv: np.ndarray) -> np.ndarray:
    """Pullback Fubini-Study density (|v|^2 |v'|^2 - |<v, v'>|^2) / |v|^4."""
    nv = np.sum(np.abs(v) ** 2, axis=-1)
    nd = np.sum(np.abs(dv) ** 2, axis=-1)
    ip = np.abs(np.sum(np.conj(v) * dv, axis=-1)) ** 2
    return (nv * nd - ip) / nv**2


# Radial panels graded geometrically towards the origin, so the density
# stays resolved however small the Moebius scale makes its bump.
_PANEL_EDGES = np.concatenate([[0.0], 4.0 ** -np.arange(16, -1, -1)])


def _disc_integral(lift, deriv, n_r: int, n_t: int) -> float:
    """Composite Gauss-Legendre in r, trapezoid (spectral for periodic) in angle."""
    x, w = np.polynomial.legendre.leggauss(n_r)
    a, b = _PANEL_EDGES[:-1, None], _PANEL_EDGES[1:, None]
    r = (0.5 * (b - a) * (x + 1) + a).ravel()
    wr = (0.5 * (b - a) * w).ravel()
    t = 2 * np.pi * np.arange(n_t) / n_t
    Z = r[:, None] * np.exp(1j * t)[None, :]
    dens = area_density(lift(Z), deriv(Z))
    return float(np.sum(wr[:, None] * r[:, None] * dens) * (2 * np.pi / n_t))


def _adaptive(lift, deriv, quad_tol: float, max_level: int = 6) -> float:
    n_r, n_t = 8, 32
    prev = _disc_integral(lift, deriv, n_r, n_t)
    floor = 64 * np.finfo(float).eps * max(abs(prev), 1.0)
    if quad_tol <= floor:
        raise QuadratureFailure(f"quad_tol {quad_tol:g} is below the roundoff floor {floor:.1e}")
    for _ in range(max_level):
        n_r, n_t = 2 * n_r, 2 * n_t
        cur = _disc_integral(lift, deriv, n_r, n_t)
        if abs(cur - prev) < quad_tol:
            return cur
        prev = cur
    raise QuadratureFailure(f"area quadrature did not reach {quad_tol:g}")


def fs_area(s: SphereMap, region: str = "unit_disc", quad_tol: float = QUAD_TOL) -> float:
    """Fubini-Study area of u restricted to |z| <= 1, or of the whole sphere.

    Normalised so a projective line has area pi.  The full area is the unit
    disc plus the disc |w| <= 1 in the chart at infinity.
    """
    if quad_tol <= 0:
        raise DomainError("quad_tol must be positive")
    p, q = s._pencil
    inner = _adaptive(s.lift, lambda z: np.broadcast_to(p, z.shape + p.shape), quad_tol / 2)
    if region in ("unit_disc", "UnitDisc"):
        return inner
    if region not in ("full", "Full"):
        raise ValueError(f"unknown region {region!r}")
    outer = _adaptive(s.lift_inverted, lambda w: np.broadcast_to(q, w.shape + q.shape), quad_tol / 2)
    return inner + outer


def calibrate_scale(s: SphereMap, disc_area: float = DISC_AREA, quad_tol: float = QUAD_TOL,
                    lo: float = 1e-4, hi: float = 1e4) -> SphereMap:
    """Choose |zeta| by bisection (in log scale) so the unit disc carries ``disc_area``.

    The disc area increases monotonically from 0 to the full area as |zeta|
    grows, so any value in (0, pi) is reachable.
    """
    if not 0 < disc_area < np.pi:
        raise DomainError("disc area must lie strictly between 0 and pi")

    def f(logr):
        return fs_area(s.with_scale(np.exp(logr)), "unit_disc", quad_tol) - disc_area

    a, b = np.log(lo), np.log(hi)
    fa, fb = f(a), f(b)
    if fa > 0 or fb < 0:
        raise DomainError("target disc area not bracketed")
    for _ in range(200):
        mid = 0.5 * (a + b)
        fm = f(mid)
        if abs(fm) < quad_tol or b - a < 1e-14:
            break
        if fm < 0:
            a = mid
        else:
            b = mid
    return s.with_scale(np.exp(mid))


def endpoint_distances(s: SphereMap) -> tuple[float, float]:
    return (
        fs_distance(evaluate_sphere(s, 0.0), s.endpoint_zero),
        fs_distance(evaluate_sphere(s, np.inf), s.endpoint_inf),
    )


def fixed_point_defects(s: SphereMap) -> tuple[float, float]:
    """d(sigma A, A) and d(sigma B, B)."""
    return (fs_distance(sigma(s.A, s.n), s.A), fs_distance(sigma(s.B, s.n), s.B))
