"""Loop-space cyclic symmetry, shooting residual and orbit classification.

A loop is sampled at m equally spaced times over its period T with n | m,
so the time shift by T/n is an exact index shift by m/n.  The symmetry
operator acts by

    (g L)(t) = sigma L(t - T/n)

with sigma the cyclic relabelling in the plane, or its induced action on
CP^{n-1} / CP^{n-2}.  A loop is choreographic when g L = L.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DegenerateInput, DimensionMismatch, GridMismatch, NotApplicable
from .hamiltonians import Family, SystemSpec, as_complex, as_real, check_state, cyclic_shift
from .integrate import flow, flow_map
from .projective import LimFrame, fs_distance_batch, normalize_rows, sigma_rows

TRIVIALITY_EPS = 1e-3
FIT_EPS = 1e-8


class Space(str, enum.Enum):
    AMBIENT = "ambient"
    CPN1 = "cpn1"
    CPN2 = "cpn2"


@dataclass(frozen=True, eq=False)
class LoopSample:
    """m samples of a closed loop; rows are states (ambient: complex n-vectors)
    or unit-norm homogeneous representatives (projective spaces)."""

    space: Space
    T: float
    samples: np.ndarray
    n: int

    def __post_init__(self):
        object.__setattr__(self, "space", Space(self.space))
        smp = np.array(self.samples, dtype=complex)
        if smp.ndim != 2:
            raise DimensionMismatch("samples must be a 2-d array (m, dim)")
        width = {Space.AMBIENT: self.n, Space.CPN1: self.n, Space.CPN2: self.n - 1}[self.space]
        if smp.shape[1] != width:
            raise DimensionMismatch(f"{self.space.value} loop rows must have length {width}")
        if self.space is not Space.AMBIENT:
            smp = normalize_rows(smp)
        smp.setflags(write=False)
        object.__setattr__(self, "samples", smp)

    @property
    def m(self) -> int:
        return self.samples.shape[0]

    @property
    def times(self) -> np.ndarray:
        return self.T * np.arange(self.m) / self.m

    def _check_grid(self):
        if self.m % self.n:
            raise GridMismatch(f"n={self.n} does not divide m={self.m}")


def apply_g(loop: LoopSample, power: int = 1) -> LoopSample:
    """Cyclic relabelling combined with the time shift by T/n."""
    loop._check_grid()
    shift = (loop.m // loop.n) * power
    rolled = np.roll(loop.samples, shift, axis=0)
    if loop.space is Space.AMBIENT:
        out = cyclic_shift(rolled, power)
    else:
        out = sigma_rows(rolled, loop.n, power)
    return replace(loop, samples=out)


def _pointwise_distance(loop: LoopSample, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    if loop.space is Space.AMBIENT:
        return np.linalg.norm(A - B, axis=1)
    return fs_distance_batch(A, B)


def chore_defect(loop: LoopSample) -> float:
    """max_j dist((g L)_j, L_j); zero exactly for choreographic loops."""
    g = apply_g(loop)
    return float(np.max(_pointwise_distance(loop, g.samples, loop.samples)))


def fs_diameter(loop: LoopSample) -> float:
    """Largest pairwise Fubini-Study distance between samples of a reduced loop."""
    if loop.space is Space.AMBIENT:
        raise NotApplicable("diameter is measured in the reduced space")
    V = loop.samples
    best = 0.0
    for row in V:
        best = max(best, float(fs_distance_batch(np.broadcast_to(row, V.shape), V).max()))
    return best


def symmetrize(loop: LoopSample) -> LoopSample:
    """Average over the cyclic group generated by g (ambient loops only).

    Assumes identical vorticities, otherwise the relabelled loop is not a
    motion of the same system.
    """
    if loop.space is not Space.AMBIENT:
        raise NotApplicable("projective loops have no linear average")
    loop._check_grid()
    acc = np.zeros_like(loop.samples)
    for j in range(loop.n):
        acc = acc + apply_g(loop, j).samples
    return replace(loop, samples=acc / loop.n)


# ------------------------------------------------------------ shooting

def shooting_residual(spec: SystemSpec, Z0, T_seg: float, theta: float, tol: float = 1e-12) -> np.ndarray:
    """R_{-theta} Phi_{T_seg}(Z0) - sigma Z0, interleaved real (2n,).

    A zero means Z(t + T_seg) = R_theta sigma Z(t): the motion is a relative
    choreography with period n T_seg in the reduced space.
    """
    z0 = check_state(spec, Z0)
    zT = flow_map(spec, z0, T_seg, tol)
    return as_real(np.exp(-1j * theta) * zT - cyclic_shift(z0))


def frame_angle(Z_start, Z_end) -> tuple[float, float]:
    """Angle a in [0, 2 pi) minimising |R_a sigma Z_start - Z_end|, and that minimum."""
    a = cyclic_shift(as_complex(Z_start))
    b = as_complex(Z_end)
    if a.shape != b.shape:
        raise DimensionMismatch("states of different sizes")
    if not np.any(a):
        raise DegenerateInput("Z_start is the zero configuration")
    c = np.vdot(a, b)
    alpha = float(np.angle(c)) % (2 * np.pi)
    mismatch = float(np.linalg.norm(np.exp(1j * alpha) * a - b))
    return alpha, mismatch


def reduced_space(spec: SystemSpec) -> Space:
    """CP^{n-2} when translations are a symmetry (Euler), else CP^{n-1}."""
    return Space.CPN2 if spec.translation_invariant else Space.CPN1


def reduce_states(states: np.ndarray, space: Space) -> np.ndarray:
    states = np.atleast_2d(states)
    if space is Space.CPN1:
        return normalize_rows(states)
    if space is Space.CPN2:
        U = LimFrame.dft(states.shape[1]).U
        return normalize_rows((states @ U.T)[:, :-1])
    return states


def orbit_loops(
    spec: SystemSpec, Z0, T_seg: float, theta: float, samples_per_segment: int = 32, tol: float = 1e-12,
) -> tuple[LoopSample, LoopSample, np.ndarray]:
    """Flow Z0 over the full reduced period n T_seg.

    Returns the reduced loop, the loop in the frame rotating by theta per
    segment (closed if the orbit is a relative choreography) and the raw
    states.
    """
    n = spec.n
    m = n * samples_per_segment
    T = n * T_seg
    times = T * np.arange(m) / m
    traj = flow(spec, Z0, T, tol=tol, samples=np.append(times, T))
    states = traj.states[:m]
    red = LoopSample(reduced_space(spec), T, reduce_states(states, reduced_space(spec)), n)
    frame = np.exp(-1j * theta * times / T_seg)[:, None]
    amb = LoopSample(Space.AMBIENT, T, states * frame, n)
    return red, amb, traj.states


# ------------------------------------------------------------ results

class Classification(str, enum.Enum):
    TRIVIAL = "TrivialRelativeEquilibrium"
    CENTRED_POLYGON = "CentredPolygon"
    NONTRIVIAL = "NonTrivial"
    UNCLASSIFIED = "Unclassified"
    INCONSISTENT_FIT = "InconsistentFit"


@dataclass(frozen=True)
class OrbitResult:
    spec: SystemSpec
    Z0: np.ndarray
    T_seg: float
    theta: float
    residual: float
    chore_defect: float
    fs_diameter: float
    energy: float
    I_level: float
    classification: Classification = Classification.UNCLASSIFIED
    diagnostics: dict = field(default_factory=dict)

    def to_record(self) -> dict:
        z = np.asarray(self.Z0)
        return {
            "family": self.spec.family.value,
            "n": self.spec.n,
            "Z0": [[float(p.real), float(p.imag)] for p in z],
            "T_seg": self.T_seg,
            "theta": self.theta,
            "residual": self.residual,
            "chore_defect": self.chore_defect,
            "fs_diameter": self.fs_diameter,
            "energy": self.energy,
            "I_level": self.I_level,
            "classification": self.classification.value,
            "diagnostics": {k: _plain(v) for k, v in self.diagnostics.items()},
        }


def _plain(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, enum.Enum):
        return v.value
    if isinstance(v, dict):
        return {k: _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    return v


def polygon_fit(z: np.ndarray) -> tuple[float, complex]:
    """Least-squares fit of a regular n-gon with any vertex ordering.

    Vertex i sits at c + rho exp(i (phi + 2 pi p i / n)) for the best step
    p in 1..n-1.  Returns (residual norm, centre).
    """
    n = z.size
    c = z.mean()
    d = z - c
    coeff = np.fft.fft(d)
    p = 1 + int(np.argmax(np.abs(coeff[1:])))
    # subtract the fitted mode explicitly; |d|^2 - |c_p|^2 would lose half the digits
    fitted = coeff[p] / n * np.exp(2j * np.pi * p * np.arange(n) / n)
    return float(np.linalg.norm(d - fitted)), complex(c)


def classify_orbit(
    spec: SystemSpec, result: OrbitResult, loop: LoopSample,
    triviality_eps: float = TRIVIALITY_EPS, fit_eps: float = FIT_EPS,
) -> Classification:
    """Trivial if the reduced loop is a point; for BEC, test the polygon case.

    A rigid polygon in a rotating frame with constant trap energy must be
    centred at the origin; a non-centred fit satisfying both is flagged as
    inconsistent.
    """
    try:
        if result.fs_diameter <= triviality_eps:
            return Classification.TRIVIAL
        if spec.family is not Family.BEC or loop.space is not Space.CPN1:
            return Classification.NONTRIVIAL
        g = spec.gamma_array
        V = loop.samples
        scale = np.sqrt(result.I_level / np.sum(g * np.abs(V) ** 2, axis=1))
        states = V * scale[:, None]
        fits = [polygon_fit(z) for z in states]
        resid = max(f[0] for f in fits)
        centre = max(abs(f[1]) for f in fits)
        trap = np.sum(np.log(1.0 - np.abs(states) ** 2), axis=1)
        if resid < fit_eps and np.ptp(trap) < fit_eps:
            return Classification.CENTRED_POLYGON if centre < fit_eps else Classification.INCONSISTENT_FIT
        return Classification.NONTRIVIAL
    except (ValueError, FloatingPointError, ZeroDivisionError):
        return Classification.UNCLASSIFIED
