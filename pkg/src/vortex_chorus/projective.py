"""Complex projective reduction: Hopf quotient, Fubini-Study distance,
the centroid-isolating unitary frame and the induced cyclic actions.

Points of CP^k are stored as unit-norm complex (k+1)-vectors.  The phase of
the stored vector carries no meaning, so every comparison goes through
:func:`fs_distance`.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DimensionMismatch, ZeroVector
from .hamiltonians import as_complex


@dataclass(frozen=True, eq=False)
class ProjectivePoint:
    v: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.v, dtype=complex).ravel()
        nrm = np.linalg.norm(v)
        if nrm == 0 or not np.isfinite(nrm):
            raise ZeroVector("the zero vector has no projective class")
        v = v / nrm
        v.setflags(write=False)
        object.__setattr__(self, "v", v)

    @property
    def k(self) -> int:
        return self.v.size - 1

    def __eq__(self, other):
        if not isinstance(other, ProjectivePoint):
            return NotImplemented
        return self.k == other.k and fs_distance(self, other) < 1e-12

    __hash__ = None


def hopf_project(Z) -> ProjectivePoint:
    """[z1 : ... : zn]; scale and global phase are quotiented out."""
    return ProjectivePoint(as_complex(Z))


def fs_distance(p: ProjectivePoint, q: ProjectivePoint) -> float:
    """Fubini-Study geodesic distance arccos |<p, q>|, in [0, pi/2]."""
    if p.k != q.k:
        raise DimensionMismatch(f"CP^{p.k} vs CP^{q.k}")
    return _fs(p.v, q.v)


def _fs(a: np.ndarray, b: np.ndarray) -> float:
    # arccos loses half the digits near 1; the chordal form keeps them.
    c = np.vdot(a, b)
    phase = c / abs(c) if abs(c) > 0 else 1.0
    chord = np.linalg.norm(a * phase - b)
    return float(2 * np.arcsin(min(1.0, chord / 2)))


def fs_distance_batch(P: np.ndarray, Q: np.ndarray) -> np.ndarray:
    """Row-wise Fubini-Study distances between unit-norm representatives."""
    c = np.sum(np.conj(P) * Q, axis=-1)
    mag = np.abs(c)
    phase = np.where(mag > 0, c / np.where(mag > 0, mag, 1.0), 1.0)
    chord = np.linalg.norm(P * phase[..., None] - Q, axis=-1)
    return 2 * np.arcsin(np.minimum(1.0, chord / 2))


def normalize_rows(A: np.ndarray) -> np.ndarray:
    nrm = np.linalg.norm(A, axis=-1, keepdims=True)
    if np.any(nrm == 0):
        raise ZeroVector("zero row cannot be projectivised")
    return A / nrm


# ------------------------------------------------------------ Lim frame

def shift_matrix(n: int) -> np.ndarray:
    """Permutation matrix of (z1, ..., zn) -> (zn, z1, ..., z_{n-1})."""
    return np.roll(np.eye(n), 1, axis=0)


@dataclass(frozen=True, eq=False)
class LimFrame:
    """Unitary change of variables whose last coordinate is the scaled centroid.

    The unitary discrete Fourier matrix U[k, j] = n^{-1/2} exp(-2 pi i j k / n)
    (rows and columns indexed 1..n) is used: row n is constant, so
    w_n = n^{-1/2} sum z_i, and U diagonalises the cyclic relabelling.
    """

    n: int
    U: np.ndarray

    @classmethod
    def dft(cls, n: int) -> "LimFrame":
        return cls(n, _dft(n))

    @property
    def shift_eigenvalues(self) -> np.ndarray:
        """Diagonal of U S U^*, i.e. exp(-2 pi i k / n) for k = 1..n."""
        k = np.arange(1, self.n + 1)
        return np.exp(-2j * np.pi * k / self.n)


@lru_cache(maxsize=64)
def _dft(n: int) -> np.ndarray:
    idx = np.arange(1, n + 1)
    U = np.exp(-2j * np.pi * np.outer(idx, idx) / n) / np.sqrt(n)
    U.setflags(write=False)
    return U


def lim_transform(frame: LimFrame, Z, direction: str = "forward") -> np.ndarray:
    """Forward: W = U Z.  Inverse: Z = U^* W."""
    z = np.asarray(Z, dtype=complex).ravel()
    if z.size != frame.n:
        raise DimensionMismatch(f"vector of length {z.size} for frame of size {frame.n}")
    if direction == "forward":
        return frame.U @ z
    if direction == "inverse":
        return frame.U.conj().T @ z
    raise ValueError(f"unknown direction {direction!r}")


def centred_project(Z) -> ProjectivePoint:
    """Point of CP^{n-2}: first n-1 frame coordinates, centroid dropped."""
    z = as_complex(Z)
    w = lim_transform(LimFrame.dft(z.size), z)
    return ProjectivePoint(w[:-1])


# ------------------------------------------------------------ cyclic actions

def sigma1(p: ProjectivePoint) -> ProjectivePoint:
    """[z1 : ... : zn] -> [zn : z1 : ... : z_{n-1}]."""
    return ProjectivePoint(np.roll(p.v, 1))


def sigma2(q: ProjectivePoint) -> ProjectivePoint:
    """Cyclic action on CP^{n-2} as a diagonal phase multiplication."""
    n = q.k + 2
    return ProjectivePoint(q.v * LimFrame.dft(n).shift_eigenvalues[:-1])


def sigma2_composite(q: ProjectivePoint, lift_phase: float = 0.0) -> ProjectivePoint:
    """Cyclic action on CP^{n-2} through the ambient space.

    Lift to the sphere (with an arbitrary phase), append a zero centroid
    coordinate, pull back to particle coordinates, relabel cyclically, push
    forward and drop the centroid coordinate.
    """
    n = q.k + 2
    frame = LimFrame.dft(n)
    W = np.append(np.exp(1j * lift_phase) * q.v, 0.0)
    Z = lim_transform(frame, W, "inverse")
    W2 = lim_transform(frame, np.roll(Z, 1), "forward")
    return ProjectivePoint(W2[:-1])


def sigma(p: ProjectivePoint, n: int) -> ProjectivePoint:
    """sigma_1 on CP^{n-1}, sigma_2 on CP^{n-2}."""
    if p.k == n - 1:
        return sigma1(p)
    if p.k == n - 2:
        return sigma2(p)
    raise DimensionMismatch(f"CP^{p.k} is neither CP^{n-1} nor CP^{n-2}")


def sigma_rows(V: np.ndarray, n: int, power: int = 1) -> np.ndarray:
    """Apply sigma**power to each row of an array of representatives."""
    k = V.shape[-1] - 1
    if k == n - 1:
        return np.roll(V, power, axis=-1)
    if k == n - 2:
        return V * LimFrame.dft(n).shift_eigenvalues[:-1] ** power
    raise DimensionMismatch(f"CP^{k} is neither CP^{n-1} nor CP^{n-2}")
