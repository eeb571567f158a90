import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from alcontinuum.dynamics import (
    EvolutionParams,
    al_rhs,
    dispersion,
    evolve,
    free_propagator,
    propagate,
    sign_value,
)
from alcontinuum.errors import OverflowGuardError, ParameterError, StepSizeRejected
from alcontinuum.grid import LatticeField
from alcontinuum.oracles import plane_wave_error

from conftest import random_field


def _plane_wave(M, a, mode):
    n = np.arange(M) - M // 2
    theta = 2 * np.pi * mode / M
    return n, theta, LatticeField(1.0, a * np.exp(1j * n * theta))


def test_rhs_of_zero_is_zero():
    assert np.all(al_rhs(LatticeField(1.0, np.zeros(16)), "focusing").values == 0)


@pytest.mark.parametrize("sign", ["focusing", "defocusing"])
def test_rhs_of_single_site(sign):
    M, c = 16, 0.3 - 0.2j
    v = np.zeros(M, dtype=complex)
    v[M // 2] = c
    d = al_rhs(LatticeField(1.0, v), sign).values
    expected = np.zeros(M, dtype=complex)
    expected[M // 2] = -2j * c
    expected[M // 2 - 1] = expected[M // 2 + 1] = 1j * c
    np.testing.assert_allclose(d, expected, atol=1e-15)


def test_rhs_of_plane_wave():
    a = 0.2
    n, theta, f = _plane_wave(64, a, 5)
    d = al_rhs(f, "defocusing").values
    expected = -1j * (4 * np.sin(theta / 2) ** 2 + 2 * a**2 * np.cos(theta)) * f.values
    np.testing.assert_allclose(d, expected, atol=1e-14)


def test_free_propagator_identity_and_fastest_mode(rng):
    f = random_field(rng, 64)
    np.testing.assert_allclose(free_propagator(f, 0.0).values, f.values, atol=1e-14)
    n = np.arange(64) - 32
    pi_mode = LatticeField(1.0, np.exp(1j * np.pi * n))
    tau = 0.731
    np.testing.assert_allclose(free_propagator(pi_mode, tau).values, np.exp(-4j * tau) * pi_mode.values,
                               atol=1e-13)
    assert np.allclose(dispersion(4), [0, 2, 4, 2])


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=1, max_value=64), st.floats(-1e3, 1e3),
       st.integers(min_value=0, max_value=2**31 - 1))
def test_free_propagator_is_unitary(half, tau, seed):
    f = random_field(np.random.default_rng(seed), 2 * half)
    g = free_propagator(f, tau)
    assert abs(g.norm() - f.norm()) <= 1e-13 * f.norm()
    assert g.t_lat == f.t_lat + tau


def test_linear_evolution_matches_free_propagator(rng):
    f0 = random_field(rng, 128, scale=0.1)
    tr = evolve(f0, EvolutionParams("defocusing", 0.1, 10.0, nonlinear=False))
    ref = free_propagator(f0, 10.0)
    assert np.max(np.abs(tr.fields[-1].values - ref.values)) <= 1e-10


def test_plane_wave_oracle_defocusing():
    assert plane_wave_error() <= 1e-8


def test_plane_wave_focusing_frequency():
    # the focusing sign flips the nonlinear frequency shift
    a, M, t = 0.1, 128, 20.0
    n, theta, f = _plane_wave(M, a, 5)
    tr = evolve(f, EvolutionParams("focusing", 0.05, t, mass_tol=None))
    omega = 4 * np.sin(theta / 2) ** 2 - 2 * a**2 * np.cos(theta)
    assert np.max(np.abs(tr.fields[-1].values - a * np.exp(1j * (n * theta - omega * t)))) <= 1e-8


def test_two_sided_snapshots_and_time_reversal(rng):
    f0 = random_field(rng, 64, scale=0.05)
    tr = evolve(f0, EvolutionParams("focusing", 0.05, 4.0, snapshot_stride=1.0, two_sided=True))
    np.testing.assert_allclose(tr.times, [-4, -3, -2, -1, 0, 1, 2, 3, 4])
    assert np.all(np.diff(tr.times) > 0)
    assert all(f.M == 64 and f.h == f0.h for f in tr.fields)
    assert tr.initial().t_lat == 0.0
    np.testing.assert_array_equal(tr.initial().values, f0.values)
    back = propagate(tr.fields[-1], -4.0, "focusing", dt=0.05)
    assert np.max(np.abs(back.values - f0.values)) <= 1e-10


def test_step_rounding_never_exceeds_requested_dt(rng):
    f0 = random_field(rng, 32, scale=0.05)
    tr = evolve(f0, EvolutionParams("defocusing", 0.3, 1.0, mass_tol=None))
    assert tr.steps == 4 and tr.dt_used == 0.25


def test_parameter_validation():
    with pytest.raises(ParameterError):
        EvolutionParams(dt=0.0)
    with pytest.raises(ParameterError):
        EvolutionParams(sign="sideways")
    with pytest.raises(ParameterError):
        EvolutionParams(t_final_lat=1.0, snapshot_stride=0.3).snapshot_count()
    assert sign_value("focusing") == -1.0 and sign_value(1) == 1.0


def test_overflow_guard_for_defocusing_disk():
    f = LatticeField(1.0, np.full(8, 1.0 + 0j))
    with pytest.raises(OverflowGuardError):
        evolve(f, EvolutionParams("defocusing", 0.1, 1.0))
    # the focusing flow has no disk constraint
    evolve(LatticeField(1.0, np.full(8, 0.5 + 0j)), EvolutionParams("focusing", 0.1, 1.0))


def test_mass_guard_rejects_hopeless_step(rng):
    f0 = random_field(rng, 64, scale=0.3)
    params = EvolutionParams("focusing", 0.9, 20.0, snapshot_stride=1.0, mass_tol=1e-14,
                             max_refinements=1)
    with pytest.raises(StepSizeRejected):
        evolve(f0, params)


def test_refinement_recovers_mass_tolerance(rng):
    f0 = random_field(rng, 64, scale=0.2)
    params = EvolutionParams("focusing", 0.8, 20.0, snapshot_stride=2.0, mass_tol=1e-8,
                             max_refinements=6)
    tr = evolve(f0, params)
    assert tr.refinements >= 1 and tr.dt_used < 0.8


def test_small_data_approach_the_free_flow_quadratically(rng):
    base = random_field(rng, 64)
    base = base.replace(values=base.values / np.max(np.abs(base.values)))
    devs = []
    for a in (1e-2, 1e-3, 1e-4):
        f0 = base.replace(values=a * base.values)
        tr = evolve(f0, EvolutionParams("focusing", 0.05, 5.0, mass_tol=None))
        ref = free_propagator(f0, 5.0)
        devs.append(np.linalg.norm(tr.fields[-1].values - ref.values) / f0.norm())
    ratios = np.array(devs[:-1]) / np.array(devs[1:])
    np.testing.assert_allclose(ratios, 100.0, rtol=0.05)
