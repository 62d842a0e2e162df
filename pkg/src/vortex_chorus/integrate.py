"""Time integration with invariant monitoring, and relative equilibria."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .errors import CollisionApproach, CollisionError, DomainError, NoConvergence, StepFailure
from .hamiltonians import (
    Family,
    SystemSpec,
    as_complex,
    as_real,
    check_state,
    first_integrals,
    min_pair_distance,
    moment_of_inertia,
    velocity,
)

RE_TOL = 1e-10
MAX_ITER = 100
# The integrator controls an RMS-weighted error estimate; the margin keeps the
# componentwise local error under the requested tol.
_SAFETY = 1e-2


@dataclass(frozen=True)
class Trajectory:
    """Sampled solution.  ``states`` is complex with shape (m, n);
    ``integrals`` has columns H, I, P, Q."""

    spec: SystemSpec
    times: np.ndarray
    states: np.ndarray
    integrals: np.ndarray

    def __len__(self):
        return self.times.size

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def drift(self) -> dict[str, float]:
        """Largest deviation of each first integral from its initial value.

        H and I are divided by their initial magnitude; P and Q are positions
        and are divided by the radius of gyration sqrt(I / sum Gamma).
        """
        if len(self) == 0:
            return {k: 0.0 for k in "HIPQ"}
        dev = np.max(np.abs(self.integrals - self.integrals[0]), axis=0)
        H0, I0 = self.integrals[0, :2]
        length = np.sqrt(I0 / self.spec.gamma_array.sum())
        scale = [max(abs(H0), np.finfo(float).tiny), I0, length, length]
        return {k: float(d / s) for k, d, s in zip("HIPQ", dev, scale)}


def _rhs(spec: SystemSpec):
    def f(t, y):
        return as_real(velocity(spec, y[0::2] + 1j * y[1::2]))

    return f


def _guards(spec: SystemSpec):
    def collision(t, y):
        return min_pair_distance(y[0::2] + 1j * y[1::2]) - spec.collision_eps

    collision.terminal = True
    events = [collision]
    if spec.family is Family.BEC:
        def boundary(t, y):
            return 1.0 - np.max(np.hypot(y[0::2], y[1::2]))

        boundary.terminal = True
        events.append(boundary)
    return events


def _integrate(spec, z0, T, tol, t_eval=None, dense=False):
    sol = solve_ivp(
        _rhs(spec), (0.0, T), as_real(z0), method="DOP853",
        rtol=max(tol * _SAFETY, 5e-14), atol=tol * _SAFETY, t_eval=t_eval, events=_guards(spec), dense_output=dense,
    )
    if sol.status == 1:
        raise CollisionApproach(f"vortices within collision guard at t={sol.t[-1]:.6g}")
    if sol.status != 0:
        raise StepFailure(sol.message)
    return sol


def flow_map(spec: SystemSpec, Z0, T: float, tol: float = 1e-12) -> np.ndarray:
    """Final state of the flow after time T (complex n-vector)."""
    z0 = check_state(spec, Z0)
    if T == 0:
        return z0.copy()
    sol = _integrate(spec, z0, T, tol)
    y = sol.y[:, -1]
    return y[0::2] + 1j * y[1::2]


def flow(spec: SystemSpec, Z0, T: float, tol: float = 1e-10, samples: int | np.ndarray | None = None) -> Trajectory:
    """Integrate the vortex equations from Z0 over [0, T].

    ``samples`` is either a number of equally spaced output times (endpoints
    included) or an explicit array of times; by default the integrator's own
    steps are returned.  Negative T integrates backwards.
    """
    if tol <= 0:
        raise DomainError("tol must be positive")
    z0 = check_state(spec, Z0)
    if T == 0:
        times = np.zeros(1)
        states = z0[None, :].copy()
    else:
        if samples is None:
            t_eval = None
        elif np.ndim(samples) == 0:
            t_eval = np.linspace(0.0, T, int(samples))
        else:
            t_eval = np.asarray(samples, dtype=float)
        sol = _integrate(spec, z0, T, tol, t_eval=t_eval)
        times = sol.t
        states = (sol.y[0::2] + 1j * sol.y[1::2]).T
    integrals = np.array([first_integrals(spec, s)[:4] for s in states])
    return Trajectory(spec, times, states, integrals)


# ------------------------------------------------------------ relative equilibria

@dataclass(frozen=True)
class RelativeEquilibrium:
    """Rigidly rotating configuration: dz/dt = omega J (z - center).

    With J = [[0, 1], [-1, 0]], a counter-clockwise rotation has omega < 0.
    """

    Z: np.ndarray
    omega: float
    center: complex
    residual: float
    iterations: int = 0

    @property
    def angular_rate(self) -> float:
        """Counter-clockwise angular velocity (= -omega)."""
        return -self.omega


def rotation_center(spec: SystemSpec, z: np.ndarray) -> complex:
    """Vorticity centre for translation-invariant systems, the origin otherwise."""
    if spec.translation_invariant:
        g = spec.gamma_array
        return complex(np.sum(g * z) / g.sum())
    return 0j


def _re_residual_c(spec, z, omega, center):
    return velocity(spec, z) - omega * (-1j) * (z - center)


def relative_equilibrium_residual(spec: SystemSpec, Z, omega: float, center: complex = 0j) -> float:
    z = check_state(spec, Z)
    return float(np.linalg.norm(_re_residual_c(spec, z, omega, complex(center))))


def fit_omega(spec: SystemSpec, Z, center: complex | None = None) -> float:
    """Least-squares rotation rate for a given configuration."""
    z = check_state(spec, Z)
    c = rotation_center(spec, z) if center is None else center
    d = -1j * (z - c)
    v = velocity(spec, z)
    return float(np.real(np.vdot(d, v)) / np.real(np.vdot(d, d)))


def central_jacobian(fun, x: np.ndarray, rel_step: float = 1e-6) -> np.ndarray:
    f0 = fun(x)
    J = np.empty((f0.size, x.size))
    for k in range(x.size):
        h = rel_step * max(1.0, abs(x[k]))
        e = np.zeros_like(x)
        e[k] = h
        J[:, k] = (fun(x + e) - fun(x - e)) / (2 * h)
    return J


def gauss_newton(fun, x0: np.ndarray, tol: float, max_iter: int, jac=None) -> tuple[np.ndarray, int]:
    """Minimum-norm Gauss-Newton with backtracking on ||fun||.

    Works for over- and under-determined systems; stops once ||fun|| < tol
    or no backtracked step decreases the residual.
    """
    jac = jac or (lambda x: central_jacobian(fun, x))
    x = np.asarray(x0, dtype=float).copy()
    r = fun(x)
    nr = np.linalg.norm(r)
    it = 0
    for it in range(1, max_iter + 1):
        if nr < tol:
            return x, it - 1
        dx = np.linalg.lstsq(jac(x), -r, rcond=1e-12)[0]
        t = 1.0
        while t > 1e-6:
            xt = x + t * dx
            rt = fun(xt)
            nrt = np.linalg.norm(rt)
            if np.isfinite(nrt) and nrt < nr:
                break
            t *= 0.5
        else:
            return x, it
        x, r, nr = xt, rt, nrt
    return x, it


def find_relative_equilibrium(
    spec: SystemSpec, guess, fix_I: float, re_tol: float = RE_TOL, max_iter: int = MAX_ITER,
) -> RelativeEquilibrium:
    """Solve for a relative equilibrium on the level I = fix_I.

    Unknowns are the configuration and omega; the rotational freedom is
    pinned by Im z1 = 0, Re z1 > 0; for translation-invariant systems the
    vorticity centre is also pinned at the origin.  Gauss-Newton on the stacked residual.
    """
    if fix_I <= 0:
        raise DomainError("fix_I must be positive")
    z = check_state(spec, guess)
    if spec.translation_invariant:
        z = z - rotation_center(spec, z)
    z = z * np.sqrt(fix_I / moment_of_inertia(spec, z))
    if abs(z[0]) > 0:
        z = z * np.exp(-1j * np.angle(z[0]))
    z = check_state(spec, z)
    n = spec.n

    def unpack(x):
        return x[0 : 2 * n : 2] + 1j * x[1 : 2 * n : 2], x[-1]

    def fun(x):
        zz, om = unpack(x)
        if min_pair_distance(zz) <= spec.collision_eps:
            raise CollisionApproach("relative equilibrium solve approached a collision")
        if spec.family is Family.BEC and np.any(np.abs(zz) >= 1):
            return np.full(2 * n + 4, 1e6)
        c = rotation_center(spec, zz)
        r = _re_residual_c(spec, zz, om, c)
        pins = [moment_of_inertia(spec, zz) - fix_I, zz[0].imag]
        if spec.translation_invariant:
            pins += [c.real, c.imag]
        return np.concatenate([as_real(r), pins])

    x0 = np.append(as_real(z), fit_omega(spec, z))
    try:
        x, iters = gauss_newton(fun, x0, tol=0.1 * re_tol, max_iter=max_iter)
    except CollisionError as exc:
        raise CollisionApproach(str(exc)) from exc
    zz, om = unpack(x)
    if zz[0].real < 0:
        zz = -zz
    if spec.family is Family.BEC and np.any(np.abs(zz) >= 1):
        raise NoConvergence("iterate left the unit disc")
    if min_pair_distance(zz) <= spec.collision_eps:
        raise CollisionApproach("relative equilibrium solve converged onto a collision")
    c = rotation_center(spec, zz)
    res = relative_equilibrium_residual(spec, zz, om, c)
    cons = abs(moment_of_inertia(spec, zz) - fix_I)
    if not (res < re_tol and cons < re_tol):
        raise NoConvergence(f"residual {res:.3e} after {iters} iterations")
    return RelativeEquilibrium(zz, float(om), c, res, iters)


def phase_rate(spec: SystemSpec, Z, h: float = 1e-3, tol: float = 1e-13) -> float:
    """omega (J convention) read off from the global phase advance of a short flow.

    Independent of the residual formulation: only uses the integrator.
    Central difference of arg <z(0), z(t)> over t = -h, h, about the vorticity
    centre for translation-invariant systems.
    """
    z = check_state(spec, Z)
    c = rotation_center(spec, z)
    zp = flow_map(spec, z, h, tol) - c
    zm = flow_map(spec, z, -h, tol) - c
    ang = np.angle(np.vdot(zm, zp))
    return float(-ang / (2 * h))


def flow_map_batch(spec: SystemSpec, Zs: np.ndarray, T: float, tol: float = 1e-12) -> np.ndarray:
    """Flow several initial states together under one step-size sequence.

    Sharing the steps makes finite differences between nearby copies smooth
    in the initial data.  Returns complex finals with shape (b, n).
    """
    Zs = np.asarray(Zs, dtype=complex)
    b, n = Zs.shape
    if T == 0:
        return Zs.copy()

    def f(t, y):
        z = y.reshape(b, 2 * n)
        v = velocity(spec, z[:, 0::2] + 1j * z[:, 1::2])
        out = np.empty((b, 2 * n))
        out[:, 0::2] = v.real
        out[:, 1::2] = v.imag
        return out.ravel()

    def collision(t, y):
        z = y.reshape(b, 2 * n)
        zc = z[:, 0::2] + 1j * z[:, 1::2]
        d = np.abs(zc[:, :, None] - zc[:, None, :])
        d[:, np.eye(n, dtype=bool)] = np.inf
        return d.min() - spec.collision_eps

    collision.terminal = True
    events = [collision]
    if spec.family is Family.BEC:
        def boundary(t, y):
            return 1.0 - np.sqrt(np.max(y[0::2] ** 2 + y[1::2] ** 2))

        boundary.terminal = True
        events.append(boundary)
    y0 = np.stack([as_real(z) for z in Zs]).ravel()
    sol = solve_ivp(f, (0.0, T), y0, method="DOP853", rtol=max(tol * _SAFETY, 5e-14),
                    atol=tol * _SAFETY, events=events)
    if sol.status == 1:
        raise CollisionApproach(f"vortices within collision guard at t={sol.t[-1]:.6g}")
    if sol.status != 0:
        raise StepFailure(sol.message)
    z = sol.y[:, -1].reshape(b, 2 * n)
    return z[:, 0::2] + 1j * z[:, 1::2]
