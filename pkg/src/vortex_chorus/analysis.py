"""Numerical companions to the structural facts about relative equilibria.

* chord-log maximality of the regular polygon on a circle;
* the trigonometric coefficient that forces a rigid polygon in the trap to
  be centred;
* a scan showing relative equilibria of the trapped problem stay away from
  collisions;
* a probe for a cyclically invariant component of an energy level on the
  torus of equal moduli.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    CollisionApproach,
    DegenerateGap,
    DomainError,
    LevelEmpty,
    NoConvergence,
    NotApplicable,
    NumericalError,
)
from .hamiltonians import Family, SystemSpec, _energy_c, _grad_c, min_pair_distance, random_state
from .integrate import RE_TOL, find_relative_equilibrium

SUM_TOL = 1e-12
GRAD_TOL = 1e-10


# ------------------------------------------------------------ chord logs

@dataclass(frozen=True, eq=False)
class CircleConfig:
    """n points on a circle of radius rho, given by consecutive gap angles."""

    theta: np.ndarray
    rho: float = 1.0

    def __post_init__(self):
        th = np.array(self.theta, dtype=float).ravel()
        if th.size < 1:
            raise DomainError("need at least one gap")
        if self.rho <= 0:
            raise DomainError("rho must be positive")
        if np.any(th < 0) or not np.all(np.isfinite(th)):
            raise DomainError("gap angles must be non-negative and finite")
        if np.any(th == 0):
            raise DegenerateGap("a zero gap puts two points on top of each other")
        if abs(th.sum() - 2 * np.pi) > SUM_TOL:
            raise DomainError(f"gaps sum to {th.sum()!r}, not 2 pi")
        th.setflags(write=False)
        object.__setattr__(self, "theta", th)

    @property
    def n(self) -> int:
        return self.theta.size

    @classmethod
    def regular(cls, n: int, rho: float = 1.0) -> "CircleConfig":
        return cls(np.full(n, 2 * np.pi / n), rho)

    def points(self) -> np.ndarray:
        phi = np.concatenate([[0.0], np.cumsum(self.theta[:-1])])
        return self.rho * np.exp(1j * phi)


def _chord_logs(theta: np.ndarray, rho: float) -> np.ndarray:
    """Row-wise sum over i < j of log(2 rho sin(arc_ij / 2)); theta has shape (..., n)."""
    n = theta.shape[-1]
    phi = np.concatenate([np.zeros(theta.shape[:-1] + (1,)), np.cumsum(theta[..., :-1], axis=-1)], axis=-1)
    i, j = np.triu_indices(n, 1)
    chords = 2 * rho * np.sin(0.5 * (phi[..., j] - phi[..., i]))
    if np.any(chords <= 0):
        raise DegenerateGap("coincident points on the circle")
    return np.sum(np.log(chords), axis=-1)


def chord_log_sum(c: CircleConfig) -> float:
    """sum_{i<j} log l_ij with l_ij = 2 rho sin(half the arc from i to j)."""
    return float(_chord_logs(c.theta, c.rho))


def chord_log_gradient(c: CircleConfig) -> np.ndarray:
    """Partial derivatives with respect to the gaps.

    Gap k lies on the arc i -> j exactly when i <= k < j, each such chord
    contributing cot(arc / 2) / 2.
    """
    n = c.n
    phi = np.concatenate([[0.0], np.cumsum(c.theta[:-1])])
    grad = np.zeros(n)
    for i in range(n):
        for j in range(i + 1, n):
            grad[i:j] += 0.5 / np.tan(0.5 * (phi[j] - phi[i]))
    return grad


def ngon_chord_log_sum(n: int, rho: float = 1.0) -> float:
    """Closed form (n/2) log n + C(n, 2) log rho, from prod_k 2 sin(pi k / n) = n."""
    return 0.5 * n * math.log(n) + 0.5 * n * (n - 1) * math.log(rho)


@dataclass(frozen=True)
class MaximalityReport:
    n: int
    rho: float
    trials: int
    max_sampled: float | None
    ngon_value: float
    margin: float | None
    grad_norm: float
    passed: bool


def ngon_maximality_test(
    n: int, rho: float = 1.0, trials: int = 10_000, seed: int = 0, extra=(),
) -> MaximalityReport:
    """Sample gap vectors uniformly on the simplex and compare with the n-gon.

    ``extra`` configurations are evaluated alongside the random ones.  The
    gradient is projected onto the tangent of sum(theta) = 2 pi.
    """
    if n < 2:
        raise DomainError("n >= 2 required")
    if trials < 0:
        raise DomainError("trials must be non-negative")
    ngon = CircleConfig.regular(n, rho)
    value = chord_log_sum(ngon)
    g = chord_log_gradient(ngon)
    grad_norm = float(np.linalg.norm(g - g.mean()))

    vals = []
    if trials:
        rng = np.random.default_rng(seed)
        th = 2 * np.pi * rng.dirichlet(np.ones(n), size=trials)
        vals.append(_chord_logs(th, rho))
    for c in extra:
        if c.n != n:
            raise DomainError("extra configuration of the wrong size")
        vals.append(np.array([chord_log_sum(CircleConfig(c.theta, rho))]))
    if vals:
        best = float(np.max(np.concatenate(vals)))
        margin = value - best
    else:
        best = margin = None
    passed = (margin is None or margin >= 0) and grad_norm < GRAD_TOL
    return MaximalityReport(n, rho, trials, best, value, margin, grad_norm, passed)


# ------------------------------------------------------------ trap coefficient

def trap_product(alpha_c: float, beta_c: float, n: int, theta) -> np.ndarray:
    """prod_{k<n} (alpha + beta cos(theta + 2 pi k / n))."""
    theta = np.asarray(theta, dtype=float)
    k = np.arange(n)
    return np.prod(alpha_c + beta_c * np.cos(theta[..., None] + 2 * np.pi * k / n), axis=-1)


def polygon_trap_coefficient(alpha_c: float, beta_c: float, n: int, method: str = "exact") -> float:
    """Magnitude sqrt(a_n^2 + b_n^2) of the order-n Fourier coefficient.

    ``method="fft"`` samples the product at 4n equispaced angles (a degree-n
    trigonometric polynomial, so no aliasing).  Its absolute error is about
    eps * |alpha|^n, which swamps the coefficient once |beta| is small.
    ``method="exact"`` multiplies the Laurent coefficients of the factors
    alpha + (beta/2)(e^{i(t+phi_k)} + e^{-i(t+phi_k)}) instead; the top
    coefficient is then a single product and keeps full relative accuracy.
    """
    if n < 1:
        raise DomainError("n >= 1 required")
    if method == "fft":
        m = 4 * n
        f = trap_product(alpha_c, beta_c, n, 2 * np.pi * np.arange(m) / m)
        c = np.fft.rfft(f)[n] / m
        return float(2 * abs(c))
    if method != "exact":
        raise ValueError(f"unknown method {method!r}")
    poly = np.array([1.0 + 0j])  # coefficients of e^{-ikt}, ..., e^{ikt}
    for k in range(n):
        ph = np.exp(2j * np.pi * k / n)
        poly = np.convolve(poly, [0.5 * beta_c / ph, alpha_c, 0.5 * beta_c * ph])
    return float(2 * abs(poly[-1]))


# ------------------------------------------------------------ Shub scan

@dataclass(frozen=True)
class ShubReport:
    n: int
    I_level: float
    n_starts: int
    converged: int
    m_values: list = field(default_factory=list)
    eps_hat: float | None = None
    min_diagonal_distance: float | None = None
    max_residual: float | None = None
    failures: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)
    equilibria: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        if self.eps_hat is None:
            return True
        return self.eps_hat > 0 and self.max_residual < RE_TOL


def shub_separation_scan(
    spec: SystemSpec, I_level: float, n_starts: int = 200, seed: int = 0,
    seed_radius: float = 0.55, re_tol: float = RE_TOL,
) -> ShubReport:
    """Relative equilibria of the trapped problem from random starts at fixed I.

    m(Z) is the smallest squared pair distance; the distance to the
    collision set is min |z_i - z_j| / sqrt(2).
    """
    if spec.family is not Family.BEC:
        raise NotApplicable("the separation scan concerns the trapped (BEC) family")
    if I_level <= 0:
        raise DomainError("I_level must be positive")
    if n_starts < 0:
        raise DomainError("n_starts must be non-negative")
    warnings = []
    gmin = float(spec.gamma_array.min())
    if I_level >= gmin:
        warnings.append(f"I_level={I_level} >= min Gamma={gmin}: separation bound not guaranteed")
    rng = np.random.default_rng(seed)
    m_values, eqs, resids = [], [], []
    failures: dict[str, int] = {}
    for _ in range(n_starts):
        z0 = random_state(spec.n, rng, seed_radius, 0.05)
        try:
            re = find_relative_equilibrium(spec, z0, I_level, re_tol=re_tol)
        except (NoConvergence, CollisionApproach, DomainError, NumericalError) as exc:
            key = type(exc).__name__
            failures[key] = failures.get(key, 0) + 1
            continue
        d = min_pair_distance(re.Z)
        m_values.append(d * d)
        resids.append(re.residual)
        eqs.append(re)
    if not m_values:
        return ShubReport(spec.n, I_level, n_starts, 0, failures=failures, warnings=warnings)
    dmin = math.sqrt(min(m_values))
    return ShubReport(
        spec.n, I_level, n_starts, len(m_values), m_values, float(min(m_values)),
        dmin / math.sqrt(2), float(max(resids)), failures, warnings, eqs,
    )


# ------------------------------------------------------------ invariant component

@dataclass(frozen=True)
class ProbeReport:
    n: int
    c: float
    ngon_energy: float
    rho: float
    samples: int
    placed: int
    connected: int
    max_sigma_energy_gap: float
    max_level_error: float
    steps: list = field(default_factory=list)

    @property
    def success_rate(self) -> float:
        return self.connected / self.placed if self.placed else 0.0


class _TorusEnergy:
    """Energy on the torus of equal moduli z_j = sqrt(rho) e^{i phi_j}."""

    def __init__(self, spec: SystemSpec, rho: float):
        self.spec, self.r = spec, math.sqrt(rho)
        self.ones = np.ones(spec.n) / math.sqrt(spec.n)

    def z(self, phi):
        return self.r * np.exp(1j * phi)

    def H(self, phi):
        return _energy_c(self.spec, self.z(phi))

    def grad(self, phi):
        # dz_j = i z_j dphi_j, dH = Re(conj(g) dz)
        z = self.z(phi)
        g = np.real(np.conj(_grad_c(self.spec, z)) * 1j * z)
        return g - self.ones * (self.ones @ g)

    def to_level(self, phi, c, iters=50):
        for _ in range(iters):
            err = self.H(phi) - c
            if abs(err) < 1e-13 * max(1.0, abs(c)):
                return phi
            g = self.grad(phi)
            gg = g @ g
            if gg == 0:
                break
            phi = phi - err * g / gg
        if abs(self.H(phi) - c) < 1e-11 * max(1.0, abs(c)):
            return phi
        raise NoConvergence("could not project onto the level set")


def _ray_to_level(tor: _TorusEnergy, base, u, c, r_max):
    """Smallest r in (0, r_max] with H(base + r u) = c, by bracketing then bisection."""
    h0 = tor.H(base)
    rs = np.linspace(0, r_max, 65)[1:]
    prev = 0.0
    for r in rs:
        try:
            val = tor.H(base + r * u)
        except (ValueError, FloatingPointError):
            return None
        if not np.isfinite(val):
            return None
        if (val - c) * (h0 - c) <= 0:
            a, b = prev, r
            for _ in range(80):
                mid = 0.5 * (a + b)
                if (tor.H(base + mid * u) - c) * (h0 - c) > 0:
                    a = mid
                else:
                    b = mid
            return base + b * u
        prev = r
    return None


def _trace(tor: _TorusEnergy, start, target, c, step, max_steps, rng):
    """Walk from ``start`` to ``target`` staying on the level set.

    Each move follows the target direction projected orthogonally to the
    gradient (and to the rotation direction), followed by a Newton
    correction back onto the level.  Returns the number of steps or None.
    """
    x = start.copy()
    for k in range(max_steps):
        d = target - x
        dist = np.linalg.norm(d)
        if dist <= step:
            return k + 1
        g = tor.grad(x)
        gn = g / np.linalg.norm(g)
        t = d - gn * (gn @ d)
        t = t - tor.ones * (tor.ones @ t)
        if np.linalg.norm(t) < 1e-3 * dist:
            # target straight across the level set: sidestep
            t = rng.standard_normal(x.size)
            t = t - gn * (gn @ t) - tor.ones * (tor.ones @ t)
            if np.linalg.norm(t) < 1e-12:
                return None  # n = 2: the level set is a pair of points
        x = x + step * t / np.linalg.norm(t)
        try:
            x = tor.to_level(x, c)
        except NoConvergence:
            return None
    return None


def invariant_component_probe(
    spec: SystemSpec, c: float, I_level: float, samples: int = 16, seed: int = 0,
    step: float = 1e-3, max_steps: int = 100_000,
) -> ProbeReport:
    """Evidence that the level H = c on the equal-moduli torus has a sigma-invariant component.

    With these sign conventions the regular polygon minimises H on the
    torus (it maximises the chord-log sum), so levels just above H(n-gon)
    are small spheres around the polygon orbit and levels below it are empty.
    """
    if samples < 1:
        raise DomainError("samples >= 1 required")
    if spec.family is Family.NLS_SITES:
        raise NotApplicable("the polygon extremum argument needs a pairwise log interaction")
    if not spec.identical:
        raise DomainError("cyclic invariance of H needs identical vorticities")
    n = spec.n
    if n < 2:
        raise DomainError("n >= 2 required")
    rho = I_level / (n * float(spec.gamma_array[0]))
    if spec.family is Family.BEC and rho >= 1:
        raise DomainError("equal-moduli torus leaves the unit disc")
    tor = _TorusEnergy(spec, rho)
    base = 2 * np.pi * np.arange(1, n + 1) / n
    h_ngon = tor.H(base)
    if c < h_ngon:
        raise LevelEmpty(f"c={c} lies below the polygon value {h_ngon}")

    rng = np.random.default_rng(seed)
    placed = connected = 0
    sig_gap = lvl_err = 0.0
    steps = []
    r_max = min(np.pi / n, 1.0)
    for _ in range(samples):
        u = rng.standard_normal(n)
        u = u - tor.ones * (tor.ones @ u)
        u /= np.linalg.norm(u)
        p = _ray_to_level(tor, base, u, c, r_max)
        if p is None:
            steps.append(None)
            continue
        p = tor.to_level(p, c)
        placed += 1
        q = np.roll(p, 1)
        q[0] -= 2 * np.pi  # the last vertex wraps round to the front
        z_p, z_q = tor.z(p), tor.z(q)
        h_p, h_q = _energy_c(spec, z_p), _energy_c(spec, z_q)
        sig_gap = max(sig_gap, abs(h_q - h_p))
        lvl_err = max(lvl_err, abs(h_p - c))
        # represent sigma p in the same rotation gauge as p
        q = q - tor.ones * (tor.ones @ (q - p))
        k = _trace(tor, p, q, c, step, max_steps, rng)
        steps.append(k)
        if k is not None:
            connected += 1
    return ProbeReport(n, c, h_ngon, rho, samples, placed, connected, sig_gap, lvl_err, steps)
