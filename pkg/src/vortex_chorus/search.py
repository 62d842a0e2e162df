"""Multi-start shooting search for relative choreographies.

Each start picks a seed near the regular n-gon or, for even n, near the
binary collision of the doubled (n/2)-gon, then runs Gauss-Newton on the
unknowns (Z0, T_seg, theta) to solve

    R_{-theta} Phi_{T_seg}(Z0) = sigma Z0

together with I(Z0) = I_level, a rotational phase pin and optionally the
centring P = Q = 0 and an energy level H(Z0) = c.  Converged candidates are
re-flowed over the full reduced period, checked and classified.
"""
from __future__ import annotations

import logging
import os
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .choreography import (
    Classification,
    OrbitResult,
    chore_defect,
    classify_orbit,
    fs_diameter,
    frame_angle,
    orbit_loops,
)
from .errors import InvalidConfig, NumericalError, VortexError
from .hamiltonians import (
    Family,
    SystemSpec,
    _energy_c,
    _grad_c,
    as_real,
    cyclic_shift,
    doubled_polygon,
    moment_of_inertia,
    regular_polygon,
    velocity,
)
from .integrate import flow_map_batch

log = logging.getLogger(__name__)

FLOW_TOL = 1e-12
FD_STEP = 1e-7


@dataclass(frozen=True)
class SearchConfig:
    I_level: float
    energy_target: float | None = None
    n_starts: int = 8
    seed: int = 0
    newton_tol: float = 1e-9
    max_iter: int = 40
    T_seg_range: tuple[float, float] = (0.5, 2.0)
    perturbation_scale: float = 0.05
    require_nontrivial: bool = False
    centred: bool = False
    samples_per_segment: int = 32

    def validate(self, spec: SystemSpec) -> list[str]:
        """Raise InvalidConfig on hard errors; return soft warnings."""
        lo, hi = self.T_seg_range
        if not (self.I_level > 0 and np.isfinite(self.I_level)):
            raise InvalidConfig("I_level must be positive")
        if self.newton_tol <= 0 or self.max_iter < 1 or self.n_starts < 0:
            raise InvalidConfig("newton_tol > 0, max_iter >= 1 and n_starts >= 0 required")
        if not (0 < lo <= hi):
            raise InvalidConfig("T_seg_range must satisfy 0 < lo <= hi")
        if self.perturbation_scale < 0:
            raise InvalidConfig("perturbation_scale must be non-negative")
        if spec.n < 2:
            raise InvalidConfig("choreographies need n >= 2")
        if not spec.identical:
            raise InvalidConfig(
                "simple choreographies require identical vorticities; refusing non-identical gamma"
            )
        if self.centred and not spec.translation_invariant:
            raise InvalidConfig("centring is only a symmetry reduction for the Euler family")
        warnings = []
        if spec.family is Family.BEC and self.I_level >= spec.gamma_array.min():
            warnings.append("I_level >= min gamma: vortices may reach the trap boundary")
        return warnings


@dataclass
class StartReport:
    index: int
    seed_kind: str
    status: str
    iterations: int = 0
    residual: float = float("nan")
    message: str = ""
    result: OrbitResult | None = None

    def to_record(self) -> dict:
        return {
            "index": self.index,
            "seed_kind": self.seed_kind,
            "status": self.status,
            "iterations": self.iterations,
            "residual": self.residual,
            "message": self.message,
        }


@dataclass
class SearchReport:
    spec: SystemSpec
    config: SearchConfig
    results: list[OrbitResult] = field(default_factory=list)
    starts: list[StartReport] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    def histogram(self) -> dict[str, int]:
        return dict(Counter(r.classification.value for r in self.results))


# ------------------------------------------------------------ seeding

def _fourier_mode(n: int, k: int) -> np.ndarray:
    j = np.arange(1, n + 1)
    return np.exp(2j * np.pi * k * j / n)


def seed_state(spec: SystemSpec, cfg: SearchConfig, index: int) -> tuple[np.ndarray, str, float]:
    """Deterministic initial guess (Z0, kind, T_seg) for start ``index``.

    The perturbation is a single cyclic Fourier mode, i.e. an eigenvector of
    the relabelling, so seed + perturbation lies on a line joining two
    relabelling-fixed configurations.
    """
    n = spec.n
    rng = np.random.default_rng([cfg.seed, index])
    kind = "doubled" if (n % 2 == 0 and n >= 4 and index % 2 == 1) else "polygon"
    if kind == "polygon":
        base = regular_polygon(n)
        own = 1
    else:
        # offset along the polygon mode keeps coincident pairs apart
        base = doubled_polygon(n) + 0.3 * regular_polygon(n)
        own = 2
    modes = [k for k in range(n) if k != own and not (cfg.centred and k == 0)]
    k = int(rng.choice(modes)) if modes else own
    coeff = rng.standard_normal() + 1j * rng.standard_normal()
    z = base + cfg.perturbation_scale * coeff / abs(coeff) * _fourier_mode(n, k)
    if cfg.centred:
        z = z - z.mean()
    z = z * np.sqrt(cfg.I_level / moment_of_inertia(spec, z))
    T_seg = float(rng.uniform(*cfg.T_seg_range))
    return z, kind, T_seg


# ------------------------------------------------------------ Newton system

class _System:
    """Residual and Jacobian of the shooting problem in x = (Z0, T_seg, theta)."""

    def __init__(self, spec: SystemSpec, cfg: SearchConfig, z_ref: np.ndarray):
        self.spec, self.cfg, self.n = spec, cfg, spec.n
        self.z_ref = z_ref

    def unpack(self, x):
        n = self.n
        return x[0 : 2 * n : 2] + 1j * x[1 : 2 * n : 2], x[2 * n], x[2 * n + 1]

    def constraints(self, z):
        spec, cfg = self.spec, self.cfg
        rows = [moment_of_inertia(spec, z) - cfg.I_level, np.vdot(self.z_ref, z).imag]
        if cfg.centred:
            c = z.mean()
            rows += [c.real, c.imag]
        if cfg.energy_target is not None:
            rows.append(_energy_c(spec, z) - cfg.energy_target)
        return np.array(rows)

    def constraint_jacobian(self, z):
        spec, cfg, n = self.spec, self.cfg, self.n
        rows = [as_real(2 * spec.gamma_array * z), as_real(1j * self.z_ref)]
        if cfg.centred:
            rows += [as_real(np.ones(n) / n), as_real(1j * np.ones(n) / n)]
        if cfg.energy_target is not None:
            rows.append(as_real(_grad_c(spec, z)))
        J = np.array(rows)
        return np.hstack([J, np.zeros((len(rows), 2))])

    def shoot(self, z, T, th):
        zT = flow_map_batch(self.spec, z[None, :], T, FLOW_TOL)[0]
        return as_real(np.exp(-1j * th) * zT - cyclic_shift(z))

    def residual(self, x):
        z, T, th = self.unpack(x)
        if T <= 0:
            raise _Diverged("non-positive segment time")
        return np.concatenate([self.shoot(z, T, th), self.constraints(z)])

    def residual_and_jacobian(self, x):
        n = self.n
        z, T, th = self.unpack(x)
        if T <= 0:
            raise _Diverged("non-positive segment time")
        xr = x[: 2 * n]
        steps = FD_STEP * np.maximum(1.0, np.abs(xr))
        copies = [z]
        for k in range(2 * n):
            e = np.zeros(2 * n)
            e[k] = steps[k]
            xe = xr + e
            copies.append(xe[0::2] + 1j * xe[1::2])
        finals = flow_map_batch(self.spec, np.array(copies), T, FLOW_TOL)
        rot = np.exp(-1j * th)
        base = rot * finals[0] - cyclic_shift(z)
        J = np.empty((2 * n, 2 * n + 2))
        for k in range(2 * n):
            zk = copies[k + 1]
            J[:, k] = (as_real(rot * finals[k + 1] - cyclic_shift(zk)) - as_real(base)) / steps[k]
        J[:, 2 * n] = as_real(rot * velocity(self.spec, finals[0]))
        J[:, 2 * n + 1] = as_real(-1j * rot * finals[0])
        F = np.concatenate([as_real(base), self.constraints(z)])
        return F, np.vstack([J, self.constraint_jacobian(z)])


class _Diverged(Exception):
    pass


def _newton(system: _System, x0: np.ndarray, tol: float, max_iter: int):
    """Damped minimum-norm Gauss-Newton.

    Once below ``tol`` a few more steps polish the solution so that the
    certified residual has margin; the best iterate is kept.
    """
    x = x0.copy()
    F, J = system.residual_and_jacobian(x)
    nf = np.linalg.norm(F)
    polish = 0
    for it in range(1, max_iter + 1):
        dx = np.linalg.lstsq(J, -F, rcond=1e-10)[0]
        t = 1.0
        while True:
            try:
                nft = np.linalg.norm(system.residual(x + t * dx))
            except (NumericalError, _Diverged, ValueError):
                nft = np.inf
            if nft < nf:
                break
            t *= 0.5
            if t < 1e-4:
                return x, nf, it, ("converged" if nf < tol else "stalled")
        x = x + t * dx
        if nft < tol:
            polish += 1
            if nft < 1e-3 * tol or polish > 3:
                return x, nft, it, "converged"
        F, J = system.residual_and_jacobian(x)
        nf = np.linalg.norm(F)
    return x, nf, max_iter, ("converged" if nf < tol else "max_iter")


# ------------------------------------------------------------ driver

def _run_start(spec: SystemSpec, cfg: SearchConfig, index: int) -> StartReport:
    z0, kind, T0 = seed_state(spec, cfg, index)
    rep = StartReport(index, kind, "failed")
    try:
        zT = flow_map_batch(spec, z0[None, :], T0, FLOW_TOL)[0]
        th0, _ = frame_angle(z0, zT)
        system = _System(spec, cfg, z0)
        x0 = np.concatenate([as_real(z0), [T0, th0]])
        x, res, iters, status = _newton(system, x0, cfg.newton_tol, cfg.max_iter)
    except (VortexError, _Diverged, ValueError) as exc:
        rep.message = f"{type(exc).__name__}: {exc}"
        return rep
    rep.iterations, rep.residual = iters, float(res)
    if status != "converged":
        rep.status = "no_convergence"
        rep.message = status
        return rep
    z, T, th = system.unpack(x)
    try:
        result = _certify(spec, cfg, z, float(T), float(th) % (2 * np.pi))
    except (VortexError, ValueError) as exc:
        rep.message = f"certification failed: {exc}"
        return rep
    rep.result = result
    checks = result.diagnostics
    tol10 = 10 * cfg.newton_tol
    if not (
        result.residual < cfg.newton_tol
        and result.chore_defect < tol10
        and checks["I_deviation"] < tol10
        and checks["H_deviation"] < tol10
    ):
        rep.status = "rejected"
        rep.message = "post-check failed: " + ", ".join(
            f"{k}={v:.2e}" for k, v in (
                ("residual", result.residual), ("chore_defect", result.chore_defect),
                ("I_dev", checks["I_deviation"]), ("H_dev", checks["H_deviation"]),
            )
        )
        return rep
    rep.status = "converged"
    return rep


def _certify(spec, cfg, z, T_seg, theta) -> OrbitResult:
    resid = np.linalg.norm(_System(spec, cfg, z).shoot(z, T_seg, theta))
    red, amb, states = orbit_loops(spec, z, T_seg, theta, cfg.samples_per_segment, FLOW_TOL)
    H = np.array([_energy_c(spec, s) for s in states])
    I = np.array([moment_of_inertia(spec, s) for s in states])
    result = OrbitResult(
        spec=spec, Z0=z, T_seg=T_seg, theta=theta, residual=float(resid),
        chore_defect=chore_defect(red), fs_diameter=fs_diameter(red),
        energy=float(H[0]), I_level=cfg.I_level,
        diagnostics={
            "ambient_chore_defect": chore_defect(amb),
            "I_deviation": float(np.max(np.abs(I - cfg.I_level))),
            "H_deviation": float(np.max(np.abs(H - H[0]))),
            "reduced_space": red.space.value,
        },
    )
    return replace(result, classification=classify_orbit(spec, result, red))


def _workers() -> int:
    env = os.environ.get("VORTEX_CHORUS_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def run_search(spec: SystemSpec, cfg: SearchConfig, workers: int | None = None) -> SearchReport:
    """Full search with per-start reports; deterministic for fixed (spec, cfg)."""
    warnings = cfg.validate(spec)
    workers = workers or _workers()
    idx = list(range(cfg.n_starts))
    if workers > 1 and len(idx) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            starts = list(pool.map(_run_start, [spec] * len(idx), [cfg] * len(idx), idx))
    else:
        starts = [_run_start(spec, cfg, i) for i in idx]
    for s in starts:
        log.debug("start %d (%s): %s %s", s.index, s.seed_kind, s.status, s.message)
    results = [s.result for s in starts if s.status == "converged"]
    if cfg.require_nontrivial:
        results = [r for r in results if r.classification is not Classification.TRIVIAL]
    order = sorted(range(len(results)), key=lambda i: (results[i].energy, i))
    return SearchReport(spec, cfg, [results[i] for i in order], starts, warnings)


def search(spec: SystemSpec, cfg: SearchConfig, workers: int | None = None) -> list[OrbitResult]:
    """Converged, certified relative choreographies sorted by energy."""
    return run_search(spec, cfg, workers).results


def energy_sweep(spec: SystemSpec, levels, cfg: SearchConfig, workers: int | None = None) -> list[dict]:
    """Run the search with the energy pinned at each level in turn."""
    report = []
    for c in levels:
        rep = run_search(spec, replace(cfg, energy_target=float(c)), workers)
        residuals = [s.residual for s in rep.starts if np.isfinite(s.residual)]
        report.append({
            "level": float(c),
            "found": bool(rep.results),
            "n_results": len(rep.results),
            "best_residual": float(min(residuals)) if residuals else None,
            "classification": rep.histogram(),
            "results": rep.results,
        })
    return report
