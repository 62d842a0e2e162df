import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from vortex_chorus.errors import CollisionError, DimensionMismatch, DomainError
from vortex_chorus.hamiltonians import (
    Family,
    SystemSpec,
    as_complex,
    as_real,
    cyclic_shift,
    energy,
    first_integrals,
    grad_energy,
    moment_of_inertia,
    random_state,
    regular_polygon,
    vector_field,
)


def fd_gradient(spec, x, h=1e-6):
    g = np.empty_like(x)
    for k in range(x.size):
        e = np.zeros_like(x)
        e[k] = h
        g[k] = (energy(spec, x + e) - energy(spec, x - e)) / (2 * h)
    return g


SPECS = [
    SystemSpec.euler(4),
    SystemSpec.euler(3, gamma=(1.0, 2.0, 0.5)),
    SystemSpec.bec(4, mu=1.0, lam=1.0),
    SystemSpec.bec(3, mu=0.7, lam=1.3, gamma=(1.0, 1.5, 0.8)),
    SystemSpec.nls(4),
    SystemSpec.nls(3, gamma=(1.0, 2.0, 3.0)),
]


def test_layouts_round_trip(rng):
    z = rng.standard_normal(5) + 1j * rng.standard_normal(5)
    x = as_real(z)
    assert x.shape == (10,)
    assert np.array_equal(as_complex(x), z)
    assert np.array_equal(as_complex(x.reshape(5, 2)), z)


def test_two_vortices_unit_separation_zero_energy():
    assert energy(SystemSpec.euler(2), [[0.5, 0], [-0.5, 0]]) == 0.0


def test_equilateral_energy():
    s = 0.7
    z = regular_polygon(3, s / math.sqrt(3))
    assert energy(SystemSpec.euler(3), z) == pytest.approx(-3 / (4 * math.pi) * math.log(s * s), rel=1e-13)


def test_bec_single_vortex_scalar():
    r = 0.5
    expected = -0.5 * math.log(1.0 / (1.0 - r * r))
    assert energy(SystemSpec.bec(1), [[r, 0.0]]) == pytest.approx(expected, rel=1e-15)


def test_nls_cyclic_convention():
    z = np.array([1.0, 0.5j, -0.3 + 0.2j])
    g = (1.0, 2.0, 3.0)
    spec = SystemSpec.nls(3, gamma=g)
    expected = 0.0
    for j in range(3):
        k = (j + 1) % 3
        expected += 0.5 * g[j] ** 2 * abs(z[j]) ** 4 - g[j] * g[k] * abs(z[k] - z[j]) ** 2
    assert energy(spec, z) == pytest.approx(0.5 * expected, rel=1e-14)


@pytest.mark.parametrize("spec", SPECS, ids=lambda s: f"{s.family.value}{s.n}")
def test_gradient_matches_finite_differences(spec, rng):
    z = random_state(spec.n, rng, 0.6, 0.2)
    x = as_real(z)
    g = grad_energy(spec, x)
    fd = fd_gradient(spec, x)
    assert np.linalg.norm(g - fd) <= 1e-6 * np.linalg.norm(g)


def test_nls_gradient_at_origin_site():
    spec = SystemSpec.nls(2)
    x = as_real(np.array([1.0, 0.0]))
    assert np.allclose(grad_energy(spec, x), fd_gradient(spec, x), atol=1e-8)


def test_two_vortex_velocity():
    v = as_complex(vector_field(SystemSpec.euler(2), [[0.5, 0], [-0.5, 0]]))
    assert v[0] == pytest.approx(1j / (2 * math.pi), abs=1e-15)
    assert v[1] == pytest.approx(-1j / (2 * math.pi), abs=1e-15)


def test_thomson_field_is_common_rotation():
    z = regular_polygon(3)
    v = as_complex(vector_field(SystemSpec.euler(3), z))
    rates = (v / (1j * z)).real
    assert np.ptp(rates) < 1e-14
    assert np.max(np.abs((v / (1j * z)).imag)) < 1e-14


def test_first_integrals_of_polygon():
    H, I, P, Q, conserved = first_integrals(SystemSpec.euler(5), regular_polygon(5))
    assert I == pytest.approx(5.0)
    assert abs(P) < 1e-15 and abs(Q) < 1e-15
    assert conserved
    assert not first_integrals(SystemSpec.bec(2), np.array([0.1, -0.1], dtype=complex)).pq_conserved


def test_moment_of_inertia_is_vorticity_weighted():
    spec = SystemSpec.euler(2, gamma=(2.0, 3.0))
    assert moment_of_inertia(spec, np.array([1.0, 1j])) == pytest.approx(5.0)


@given(st.integers(2, 7), st.integers(0, 2**31 - 1), st.sampled_from(["euler", "bec", "nls"]))
def test_cyclic_shift_invariance(n, seed, fam):
    rng = np.random.default_rng(seed)
    spec = SystemSpec(Family(fam), n, mu=1.0, lam=1.0) if fam == "bec" else SystemSpec(Family(fam), n)
    z = random_state(n, rng, 0.8, 0.05)
    assert energy(spec, cyclic_shift(z)) == pytest.approx(energy(spec, z), rel=1e-12, abs=1e-13)


@given(st.integers(2, 6), st.integers(0, 2**31 - 1), st.floats(-3, 3), st.complex_numbers(max_magnitude=5))
def test_euler_rigid_motion_invariance(n, seed, angle, shift):
    z = random_state(n, np.random.default_rng(seed), 1.0, 0.05)
    spec = SystemSpec.euler(n)
    moved = np.exp(1j * angle) * z + shift
    assert energy(spec, moved) == pytest.approx(energy(spec, z), abs=1e-11)


def test_errors():
    with pytest.raises(CollisionError):
        energy(SystemSpec.euler(2), np.array([0.3, 0.3], dtype=complex))
    with pytest.raises(DomainError):
        energy(SystemSpec.bec(2), np.array([0.3, 1.2], dtype=complex))
    with pytest.raises(DimensionMismatch):
        energy(SystemSpec.euler(3), np.array([0.0, 1.0], dtype=complex))
    with pytest.raises(DimensionMismatch):
        SystemSpec.euler(3, gamma=(1.0, 1.0))
    with pytest.raises(DomainError):
        SystemSpec.euler(2, gamma=(1.0, -1.0))
    with pytest.raises(DomainError):
        SystemSpec(Family.BEC, 2)


def test_spec_helpers():
    assert SystemSpec.euler(3).identical
    assert not SystemSpec.euler(2, gamma=(1, 2)).identical
    assert SystemSpec.euler(3).translation_invariant
    assert not SystemSpec.bec(3).translation_invariant
