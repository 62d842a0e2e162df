import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from vortex_chorus.analysis import (
    CircleConfig,
    chord_log_gradient,
    chord_log_sum,
    invariant_component_probe,
    ngon_chord_log_sum,
    ngon_maximality_test,
    polygon_trap_coefficient,
    shub_separation_scan,
    trap_product,
)
from vortex_chorus.errors import DegenerateGap, DomainError, LevelEmpty, NotApplicable
from vortex_chorus.hamiltonians import SystemSpec, _energy_c, cyclic_shift, min_pair_distance, regular_polygon
from vortex_chorus.integrate import relative_equilibrium_residual


def dense_oracle(a, b, n, m=4096):
    """Order-n Fourier magnitude by direct projection on a dense grid."""
    t = 2 * np.pi * np.arange(m) / m
    f = np.ones(m)
    for k in range(n):
        f = f * (a + b * np.cos(t + 2 * np.pi * k / n))
    an = 2 * np.mean(f * np.cos(n * t))
    bn = 2 * np.mean(f * np.sin(n * t))
    return math.hypot(an, bn)


def test_chord_log_examples():
    assert chord_log_sum(CircleConfig([math.pi, math.pi])) == pytest.approx(math.log(2), abs=1e-15)
    assert chord_log_sum(CircleConfig.regular(3)) == pytest.approx(1.5 * math.log(3), abs=1e-14)
    assert chord_log_sum(CircleConfig.regular(4)) == pytest.approx(4 * math.log(2), abs=1e-14)


def test_chord_log_brute_force(rng):
    th = 2 * np.pi * rng.dirichlet(np.ones(6))
    th[-1] = 2 * np.pi - th[:-1].sum()
    c = CircleConfig(th, 1.7)
    p = c.points()
    brute = sum(math.log(abs(p[i] - p[j])) for i in range(6) for j in range(i + 1, 6))
    assert chord_log_sum(c) == pytest.approx(brute, abs=1e-12)


@pytest.mark.parametrize("n", range(2, 13))
def test_ngon_closed_form_and_critical(n):
    c = CircleConfig.regular(n, 0.8)
    assert chord_log_sum(c) == pytest.approx(ngon_chord_log_sum(n, 0.8), abs=1e-12)
    g = chord_log_gradient(c)
    assert np.linalg.norm(g - g.mean()) < 1e-10


def test_gradient_matches_finite_differences(rng):
    th = 2 * np.pi * rng.dirichlet(np.full(5, 3.0))
    th[-1] = 2 * np.pi - th[:-1].sum()
    c = CircleConfig(th)
    g = chord_log_gradient(c)
    # move along a direction tangent to sum(theta) = 2 pi
    d = rng.standard_normal(5)
    d -= d.mean()
    h = 1e-6
    f = lambda x: chord_log_sum(CircleConfig(th + x * d))  # noqa: E731
    assert (f(h) - f(-h)) / (2 * h) == pytest.approx(g @ d, rel=1e-6)


@given(st.integers(3, 9), st.integers(0, 2**31 - 1), st.integers(0, 8))
def test_relabelling_symmetry(n, seed, k):
    rng = np.random.default_rng(seed)
    th = 2 * np.pi * rng.dirichlet(np.full(n, 2.0))
    th[-1] = 2 * np.pi - th[:-1].sum()
    if np.any(th <= 0):
        return
    base = chord_log_sum(CircleConfig(th))
    rolled = np.roll(th, k)
    rolled[-1] = 2 * np.pi - rolled[:-1].sum()
    rev = th[::-1].copy()
    rev[-1] = 2 * np.pi - rev[:-1].sum()
    assert chord_log_sum(CircleConfig(rolled)) == pytest.approx(base, abs=1e-11)
    assert chord_log_sum(CircleConfig(rev)) == pytest.approx(base, abs=1e-11)


def test_circle_validation():
    with pytest.raises(DomainError):
        CircleConfig([1.0, 1.0])
    with pytest.raises(DegenerateGap):
        CircleConfig([0.0, math.pi, math.pi])
    with pytest.raises(DomainError):
        CircleConfig([math.pi, math.pi], rho=0)
    tiny = 5e-324  # half of it underflows to a zero chord
    with pytest.raises(DegenerateGap):
        chord_log_sum(CircleConfig([tiny, 2 * math.pi - tiny]))


def test_maximality_reports():
    r = ngon_maximality_test(6, trials=2000, seed=4)
    assert r.passed and r.margin > 0 and r.grad_norm < 1e-10
    vac = ngon_maximality_test(6, trials=0)
    assert vac.passed and vac.margin is None
    at = ngon_maximality_test(6, trials=0, extra=[CircleConfig.regular(6)])
    assert at.margin == 0.0 and at.passed
    with pytest.raises(DomainError):
        ngon_maximality_test(1)


@pytest.mark.parametrize("a,b,n", [(0.7, 0.4, 3), (-0.3, 0.9, 5), (0.1, 0.05, 2), (1.0, 1.0, 6), (0.2, 0.3, 1)])
def test_trap_coefficient_oracle(a, b, n):
    assert polygon_trap_coefficient(a, b, n) == pytest.approx(dense_oracle(a, b, n), abs=1e-12)
    assert polygon_trap_coefficient(a, b, n, method="fft") == pytest.approx(dense_oracle(a, b, n), abs=1e-12)


def test_trap_coefficient_closed_form_and_alpha_independence():
    for n in range(2, 7):
        for b in (0.1, 0.5, 0.9):
            vals = [polygon_trap_coefficient(a, b, n) for a in np.linspace(-1, 1, 7)]
            assert np.ptp(vals) < 1e-14
            assert vals[0] == pytest.approx(2 * (b / 2) ** n, rel=1e-12)


def test_trap_coefficient_zero_iff_beta_zero():
    assert polygon_trap_coefficient(0.6, 0.0, 4) == 0.0
    assert polygon_trap_coefficient(0.6, 0.0, 4, method="fft") < 1e-15
    with pytest.raises(ValueError):
        polygon_trap_coefficient(0.6, 0.1, 4, method="series")
    for n in range(1, 7):
        for b in (1e-6, -1e-3, 0.2):
            assert polygon_trap_coefficient(0.3, b, n) >= (abs(b) / 2) ** n / 2


def test_trap_product_is_periodic():
    t = np.linspace(0, 1, 5)
    assert np.allclose(trap_product(0.4, 0.3, 5, t), trap_product(0.4, 0.3, 5, t + 2 * np.pi / 5))


def test_shub_scan_small():
    spec = SystemSpec.bec(3)
    rep = shub_separation_scan(spec, 0.3, n_starts=15, seed=2)
    assert rep.converged > 0 and rep.passed
    assert rep.eps_hat > 0 and rep.min_diagonal_distance > 1e-3
    assert not rep.warnings
    for re in rep.equilibria:
        assert relative_equilibrium_residual(spec, re.Z, re.omega, re.center) < 1e-10
        assert min_pair_distance(re.Z) ** 2 >= rep.eps_hat


def test_shub_edge_cases():
    spec = SystemSpec.bec(3)
    empty = shub_separation_scan(spec, 0.3, n_starts=0)
    assert empty.converged == 0 and empty.eps_hat is None and empty.passed
    warned = shub_separation_scan(spec, 1.5, n_starts=1)
    assert warned.warnings
    with pytest.raises(NotApplicable):
        shub_separation_scan(SystemSpec.euler(3), 0.3, 1)


@pytest.mark.parametrize("spec,I", [(SystemSpec.euler(4), 4.0), (SystemSpec.bec(3), 0.3), (SystemSpec.euler(5), 2.0)])
def test_probe_near_polygon(spec, I):
    rho = I / spec.n
    h = _energy_c(spec, regular_polygon(spec.n, math.sqrt(rho)))
    rep = invariant_component_probe(spec, h + 1e-3 * max(1.0, abs(h)), I, samples=4, seed=3)
    assert rep.placed == 4 and rep.success_rate == 1.0
    assert rep.max_sigma_energy_gap <= 1e-12
    assert rep.max_level_error < 1e-10


def test_probe_errors():
    spec = SystemSpec.euler(4)
    h = _energy_c(spec, regular_polygon(4))
    with pytest.raises(LevelEmpty):
        invariant_component_probe(spec, h - 0.01, 4.0, 2)
    with pytest.raises(NotApplicable):
        invariant_component_probe(SystemSpec.nls(3), 0.0, 1.0, 1)
    with pytest.raises(DomainError):
        invariant_component_probe(SystemSpec.euler(3, gamma=(1, 2, 1)), 0.0, 1.0, 1)
    with pytest.raises(DomainError):
        invariant_component_probe(spec, h, 4.0, 0)


def test_probe_two_vortices_is_disconnected():
    # the level set mod rotation is two points swapped by the relabelling
    spec = SystemSpec.euler(2)
    h = _energy_c(spec, regular_polygon(2))
    rep = invariant_component_probe(spec, h + 0.01, 2.0, samples=2)
    assert rep.placed == 2 and rep.connected == 0


def test_sigma_energy_equality_exact(rng):
    spec = SystemSpec.bec(4)
    z = 0.5 * np.exp(1j * rng.uniform(0, 2 * np.pi, 4)) * math.sqrt(0.5)
    assert abs(_energy_c(spec, cyclic_shift(z)) - _energy_c(spec, z)) <= 1e-12
