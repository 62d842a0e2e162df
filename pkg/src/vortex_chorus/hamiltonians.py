"""Planar N-vortex type Hamiltonians.

Three families of the form

    H(Z) = sum_i a_i V(|z_i|^2) + sum_{i<j} b_ij F(|z_i - z_j|^2)

are provided: the Euler point-vortex problem, the Gross-Pitaevskii (BEC)
vortex problem in the unit disc, and the cyclic discrete NLS lattice.

States are handled internally as complex vectors ``z = x + iy`` of length n.
Public functions also accept the real interleaved layout
``[x1, y1, ..., xn, yn]`` or an ``(n, 2)`` array; gradients and vector fields
come back in the interleaved real layout.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .errors import CollisionError, DimensionMismatch, DomainError

COLLISION_EPS = 1e-12


class Family(str, enum.Enum):
    EULER = "euler"
    BEC = "bec"
    NLS_SITES = "nls"


@dataclass(frozen=True)
class SystemSpec:
    """Hamiltonian family plus vorticities and (BEC only) trap parameters."""

    family: Family
    n: int
    gamma: tuple[float, ...] = ()
    mu: float | None = None
    lam: float | None = None
    collision_eps: float = COLLISION_EPS
    _gamma_arr: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        gamma = tuple(float(g) for g in self.gamma) if len(self.gamma) else (1.0,) * self.n
        object.__setattr__(self, "gamma", gamma)
        if self.n < 1:
            raise DomainError("n must be positive")
        if len(gamma) != self.n:
            raise DimensionMismatch(f"gamma has length {len(gamma)}, expected {self.n}")
        if any(not np.isfinite(g) or g <= 0 for g in gamma):
            raise DomainError("all vorticities must be positive")
        if self.family is Family.BEC:
            if self.mu is None or self.lam is None or self.mu <= 0 or self.lam <= 0:
                raise DomainError("BEC family requires mu > 0 and lam > 0")
        object.__setattr__(self, "_gamma_arr", np.asarray(gamma, dtype=float))

    @classmethod
    def euler(cls, n: int, gamma: Sequence[float] = (), **kw) -> "SystemSpec":
        return cls(Family.EULER, n, tuple(gamma), **kw)

    @classmethod
    def bec(cls, n: int, mu: float = 1.0, lam: float = 1.0, gamma: Sequence[float] = (), **kw) -> "SystemSpec":
        return cls(Family.BEC, n, tuple(gamma), mu=mu, lam=lam, **kw)

    @classmethod
    def nls(cls, n: int, gamma: Sequence[float] = (), **kw) -> "SystemSpec":
        return cls(Family.NLS_SITES, n, tuple(gamma), **kw)

    @property
    def gamma_array(self) -> np.ndarray:
        return self._gamma_arr

    @property
    def identical(self) -> bool:
        return bool(np.all(self._gamma_arr == self._gamma_arr[0]))

    @property
    def translation_invariant(self) -> bool:
        return self.family is Family.EULER


class Integrals(NamedTuple):
    H: float
    I: float
    P: float
    Q: float
    pq_conserved: bool


# ---------------------------------------------------------------- layouts

def as_complex(Z) -> np.ndarray:
    """Return the state as a complex vector of length n."""
    a = np.asarray(Z)
    if np.iscomplexobj(a):
        return a.astype(complex).ravel()
    a = a.astype(float)
    if a.ndim == 2 and a.shape[1] == 2:
        return a[:, 0] + 1j * a[:, 1]
    a = a.ravel()
    if a.size % 2:
        raise DimensionMismatch("real state must have even length 2n")
    return a[0::2] + 1j * a[1::2]


def as_real(z) -> np.ndarray:
    """Complex n-vector -> interleaved real vector [x1, y1, ..., xn, yn]."""
    z = np.asarray(z, dtype=complex).ravel()
    out = np.empty(2 * z.size)
    out[0::2] = z.real
    out[1::2] = z.imag
    return out


def cyclic_shift(z, k: int = 1) -> np.ndarray:
    """The cyclic relabelling (z1, ..., zn) -> (zn, z1, ..., z_{n-1}), applied k times."""
    return np.roll(np.asarray(z), k, axis=-1)


def rotate(z, angle: float) -> np.ndarray:
    """Common counter-clockwise rotation of all vortices by ``angle``."""
    return np.exp(1j * angle) * np.asarray(z, dtype=complex)


def J_apply(z) -> np.ndarray:
    """Blockwise J = [[0, 1], [-1, 0]] in complex form: (x, y) -> (y, -x)."""
    return -1j * np.asarray(z, dtype=complex)


def min_pair_distance(z: np.ndarray) -> float:
    if z.size < 2:
        return np.inf
    d = np.abs(z[:, None] - z[None, :])
    iu = np.triu_indices(z.size, 1)
    return float(d[iu].min())


def check_state(spec: SystemSpec, Z) -> np.ndarray:
    """Validate and convert a state; raises on collision or leaving the disc."""
    z = as_complex(Z)
    if z.size != spec.n:
        raise DimensionMismatch(f"state has {z.size} vortices, spec has n={spec.n}")
    if not np.all(np.isfinite(z)):
        raise DomainError("state contains non-finite values")
    if min_pair_distance(z) <= spec.collision_eps:
        raise CollisionError("two vortices coincide (generalised diagonal)")
    if spec.family is Family.BEC and np.any(np.abs(z) >= 1.0):
        raise DomainError("BEC vortices must lie in the open unit disc")
    return z


# ---------------------------------------------------------------- energies

def _pair_weights(spec: SystemSpec) -> np.ndarray:
    g = spec.gamma_array
    return np.outer(g, g)


def _energy_c(spec: SystemSpec, z: np.ndarray) -> float:
    g = spec.gamma_array
    n = spec.n
    if spec.family is Family.NLS_SITES:
        znext = np.roll(z, -1)
        site = 0.5 * g**2 * np.abs(z) ** 4
        hop = g * np.roll(g, -1) * np.abs(znext - z) ** 2
        return float(0.5 * np.sum(site - hop))
    iu = np.triu_indices(n, 1)
    d2 = np.abs(z[:, None] - z[None, :]) ** 2
    logs = np.sum(_pair_weights(spec)[iu] * np.log(d2[iu]))
    if spec.family is Family.EULER:
        return float(-logs / (4 * np.pi))
    trap = np.sum(g**2 * np.log(1.0 / (1.0 - np.abs(z) ** 2)))
    return float(-0.5 * (spec.mu * trap + spec.lam * logs))


def _grad_c(spec: SystemSpec, z: np.ndarray) -> np.ndarray:
    """Gradient as complex numbers dH/dx + i dH/dy per vortex.

    Works on a single state (n,) or a batch (..., n).
    """
    g = spec.gamma_array
    if spec.family is Family.NLS_SITES:
        c_fwd = g * np.roll(g, -1)          # weight of |z_{j+1} - z_j|^2
        c_bwd = np.roll(c_fwd, 1)           # weight of |z_j - z_{j-1}|^2
        site = g**2 * np.abs(z) ** 2 * z
        hop = c_fwd * (z - np.roll(z, -1, axis=-1)) + c_bwd * (z - np.roll(z, 1, axis=-1))
        return site - hop
    diff = z[..., :, None] - z[..., None, :]
    d2 = diff.real**2 + diff.imag**2
    d2[..., _eye(spec.n)] = 1.0
    pair = (g * diff / d2).sum(axis=-1) * g
    if spec.family is Family.EULER:
        return -pair / (2 * np.pi)
    trap = g**2 * z / (1.0 - (z.real**2 + z.imag**2))
    return -spec.mu * trap - spec.lam * pair


def _eye(n: int) -> np.ndarray:
    return np.eye(n, dtype=bool)


def energy(spec: SystemSpec, Z) -> float:
    """Value of the Hamiltonian at ``Z``."""
    return _energy_c(spec, check_state(spec, Z))


def grad_energy(spec: SystemSpec, Z) -> np.ndarray:
    """Euclidean gradient of the Hamiltonian, interleaved real layout (2n,)."""
    return as_real(_grad_c(spec, check_state(spec, Z)))


def velocity(spec: SystemSpec, z: np.ndarray) -> np.ndarray:
    """Complex velocities dz_i/dt = (1/Gamma_i) J grad_i H, no validation."""
    return J_apply(_grad_c(spec, z)) / spec.gamma_array


def vector_field(spec: SystemSpec, Z) -> np.ndarray:
    """Vorticity-weighted Hamiltonian vector field, interleaved real layout."""
    return as_real(velocity(spec, check_state(spec, Z)))


def moment_of_inertia(spec: SystemSpec, z) -> float:
    z = as_complex(z)
    return float(np.sum(spec.gamma_array * np.abs(z) ** 2))


def first_integrals(spec: SystemSpec, Z) -> Integrals:
    """Energy, vorticity-weighted moment of inertia and the centroid (P, Q).

    P and Q are only conserved for the translation-invariant Euler family;
    ``pq_conserved`` says so.
    """
    z = check_state(spec, Z)
    c = z.mean()
    return Integrals(
        H=_energy_c(spec, z),
        I=moment_of_inertia(spec, z),
        P=float(c.real),
        Q=float(c.imag),
        pq_conserved=spec.translation_invariant,
    )


def regular_polygon(n: int, radius: float = 1.0, phase: float = 0.0, center: complex = 0.0) -> np.ndarray:
    """Vertices z_j = c + r e^{i(phase + 2 pi j / n)}, j = 1..n (so z_n sits at angle ``phase``)."""
    j = np.arange(1, n + 1)
    return center + radius * np.exp(1j * (phase + 2 * np.pi * j / n))


def doubled_polygon(n: int, radius: float = 1.0) -> np.ndarray:
    """The m-gon (m = n/2) traversed twice: the binary total collision state.

    Vortices j and j + m coincide, so this is not admissible on its own; it is
    used as an endpoint and as a seed direction.
    """
    if n % 2:
        raise DomainError("doubled polygon needs even n")
    j = np.arange(1, n + 1)
    return radius * np.exp(2j * np.pi * j / (n // 2))


def random_state(n: int, rng: np.random.Generator, radius: float = 1.0, min_sep: float = 0.3,
                 max_tries: int = 10_000) -> np.ndarray:
    """Uniform points in the disc of the given radius, redrawn until all pairs are min_sep apart.

    Close pairs spin fast and make short test runs needlessly stiff.
    """
    for _ in range(max_tries):
        r = radius * np.sqrt(rng.uniform(size=n))
        z = r * np.exp(2j * np.pi * rng.uniform(size=n))
        if n < 2 or min_pair_distance(z) > min_sep:
            return z
    raise DomainError(f"could not place {n} points {min_sep} apart in radius {radius}")
