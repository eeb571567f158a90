import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from alcontinuum.errors import AliasingError, BandlimitError, ParameterError, SmallMeshError
from alcontinuum.grid import (
    ContinuumField,
    LatticeField,
    SpectralCoefficients,
    continuum_spectrum,
    field_from_spectrum,
    forward_transform,
    fundamental_arc,
    inverse_transform,
    project_arc,
    project_smooth,
    reconstruct,
    resample,
    sample_initial_data,
    sharp_cutoff,
    site_count,
    smooth_bump,
    smooth_symbol,
    split_fields,
)
from alcontinuum.profiles import GaussianProfile

from conftest import naive_dft, random_field, trig_poly


# ---------------------------------------------------------------------------
# forward / inverse transform


def test_delta_transforms_to_constant():
    M = 32
    v = np.zeros(M)
    v[M // 2] = 1.0  # site n = 0
    c = forward_transform(LatticeField(0.1, v))
    np.testing.assert_allclose(c.values, np.ones(M), atol=1e-15)


def test_constant_field_concentrates_at_zero_frequency():
    M = 32
    c = forward_transform(LatticeField(0.1, np.ones(M))).values
    assert abs(c[0] - M) < 1e-12
    assert np.max(np.abs(c[1:])) < 1e-12


def test_transform_matches_naive_dft_and_round_trips(rng):
    f = random_field(rng, M=96)
    c = forward_transform(f)
    ref = naive_dft(f.values)
    assert np.linalg.norm(c.values - ref) / np.linalg.norm(ref) <= 1e-12
    back = inverse_transform(c, f.h)
    assert np.linalg.norm(back.values - f.values) / f.norm() <= 1e-12


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=1, max_value=64), st.integers(min_value=0, max_value=2**31 - 1))
def test_round_trip_and_plancherel_property(half, seed):
    rng = np.random.default_rng(seed)
    f = random_field(rng, M=2 * half)
    c = forward_transform(f)
    back = inverse_transform(c, f.h)
    assert np.linalg.norm(back.values - f.values) <= 1e-12 * max(f.norm(), 1e-300)
    assert abs(np.sum(np.abs(c.values) ** 2) / f.M - f.norm() ** 2) <= 1e-12 * f.norm() ** 2


def test_fundamental_arc_range():
    theta = fundamental_arc(64)
    assert theta.min() >= -np.pi / 2 and theta.max() < 1.5 * np.pi
    assert np.isclose(theta[16], np.pi / 2) and np.isclose(theta[48], -np.pi / 2)
    assert SpectralCoefficients(np.zeros(8)).theta.size == 8


def test_lattice_field_validation():
    with pytest.raises(ParameterError):
        LatticeField(0.1, np.zeros(7))
    with pytest.raises(ParameterError):
        LatticeField(0.0, np.zeros(8))
    f = LatticeField(0.5, np.zeros(8))
    assert f.L == 2.0 and list(f.sites) == [-4, -3, -2, -1, 0, 1, 2, 3]
    with pytest.raises(ValueError):
        f.values[0] = 1.0  # immutable


# ---------------------------------------------------------------------------
# sampling


def test_band_limited_data_is_sampled_exactly():
    L, h, gamma = 8.0, 0.1, 0.5
    N = h**-gamma
    kmax = int(np.floor(N * L / np.pi))
    g, band = trig_poly(L, kmax, seed=3)
    assert band <= N
    a = sample_initial_data(g, None, h, gamma, L, enforce_small_h=False)
    x = h * (np.arange(site_count(L, h)) - site_count(L, h) // 2)
    exact = h * g(x)
    assert np.max(np.abs(a.values - exact)) <= 1e-12 * np.max(np.abs(exact))


def test_gaussian_sampling_mass_against_quadrature():
    h, gamma, L = 0.05, 0.5, 16.0
    N = h**-gamma
    a = sample_initial_data(GaussianProfile(), None, h, gamma, L, enforce_small_h=False)
    # ||P_{<=N} psi0||^2 = (1/2pi) int_{-N}^{N} |psi0_hat|^2, psi0_hat = sqrt(pi) exp(-xi^2/4)
    cut_mass, _ = quad(lambda xi: np.pi * np.exp(-xi**2 / 2) / (2 * np.pi), -N, N, epsabs=1e-14)
    assert abs(a.norm() ** 2 / h - cut_mass) <= 1e-3


def test_aliasing_rejected():
    with pytest.raises(AliasingError, match="aliasing"):
        sample_initial_data(GaussianProfile(), None, 2.5, 0.5, 10.0, enforce_small_h=False)


def test_small_mesh_condition_and_gamma_bound():
    with pytest.raises(SmallMeshError, match="h_0"):
        sample_initial_data(GaussianProfile(), None, 0.1, 0.5, 8.0)
    with pytest.raises(ParameterError):
        sample_initial_data(GaussianProfile(), None, 0.01, 0.9, 8.0)
    # the override raises the ceiling
    sample_initial_data(GaussianProfile(0.01), None, 0.1, 0.9, 8.0, gamma_max=1.0)


def test_split_recovers_cut_data_at_time_zero():
    h, gamma, L = 0.1, 0.5, 16.0
    psi0 = GaussianProfile(1.0, 1.0, -0.5)
    phi0 = GaussianProfile(0.5, 0.7, 1.0, 0.3)
    a = sample_initial_data(psi0, phi0, h, gamma, L, enforce_small_h=False)
    psi, phi = split_fields(a, 0.0)
    N = h**-gamma
    for got, prof in ((psi, psi0), (phi, phi0)):
        xi, _ = continuum_spectrum(got)
        ref = field_from_spectrum(np.where(np.abs(xi) <= N, prof.transform(xi), 0.0), got.dx)
        assert np.linalg.norm(got.values - ref.values) <= 1e-10 * np.linalg.norm(ref.values)


def test_sampling_identity_for_band_limited_pairs():
    L, h = 8.0, 0.125
    f, _ = trig_poly(L, 20, seed=1)
    g, _ = trig_poly(L, 15, seed=2)
    M = site_count(L, h)
    x = h * (np.arange(M) - M // 2)
    lattice = h * np.sum(f(x) * np.conj(g(x)))
    J = 8 * M
    xf = -L + (2 * L / J) * np.arange(J)
    _, cf = continuum_spectrum(ContinuumField(2 * L / J, f(xf)))
    _, cg = continuum_spectrum(ContinuumField(2 * L / J, g(xf)))
    spectral = np.sum(cf * np.conj(cg)) / (2 * L)
    assert abs(lattice - spectral) <= 1e-10 * abs(spectral)


@pytest.mark.parametrize("p", [4, 6])
def test_plancherel_polya_bracket_is_stable(p):
    # h sum |f(nh)|^p against int |f|^p for a fixed band-limited f under refinement
    L = 16.0
    f, band = trig_poly(L, 12, seed=5)
    J = 4096
    xf = -L + (2 * L / J) * np.arange(J)
    continuum = (2 * L / J) * np.sum(np.abs(f(xf)) ** p)
    ratios = []
    for h in (0.5, 0.25, 0.125, 0.0625):
        assert band < np.pi / h
        x = h * (np.arange(site_count(L, h)) - site_count(L, h) // 2)
        ratios.append(h * np.sum(np.abs(f(x)) ** p) / continuum)
    ratios = np.array(ratios)
    assert np.all((ratios > 0.5) & (ratios < 2.0))
    # once the samples resolve |f|^p the quadrature is exact
    assert abs(ratios[-1] - 1) < 1e-10 and abs(ratios[-2] - 1) < 1e-10


# ---------------------------------------------------------------------------
# split_fields


def test_slow_band_goes_to_psi_channel():
    L, h = 8.0, 0.1
    g, band = trig_poly(L, 39, seed=7)
    assert band < np.pi / (2 * h)
    M = site_count(L, h)
    f = LatticeField(h, h * g(h * (np.arange(M) - M // 2)))
    psi, phi = split_fields(f, 0.37)
    assert np.max(np.abs(psi.values - g(psi.x))) <= 1e-11 * np.max(np.abs(g(psi.x)))
    assert np.max(np.abs(phi.values)) <= 1e-12


def test_alternating_data_goes_to_phi_channel_with_phase():
    L, h, t = 8.0, 0.1, 0.37
    g, _ = trig_poly(L, 39, seed=8)
    M = site_count(L, h)
    n = np.arange(M) - M // 2
    vals = (-1.0) ** n * h * g(h * n)
    f = LatticeField(h, vals, t / h**2)
    psi, phi = split_fields(f)
    # oracle: shift the direct DFT by pi and read off the slow band
    c = naive_dft(vals)
    shifted = np.roll(c, -M // 2)
    k = np.fft.fftfreq(M, d=1.0 / M).astype(int)
    slow = np.abs(2 * np.pi * k / M) < np.pi / 2
    ref = np.zeros(4 * M, dtype=complex)
    ref[np.mod(k[slow], 4 * M)] = shifted[slow]
    expected = np.exp(4j * t / h**2) * field_from_spectrum(ref, h / 4).values
    assert np.max(np.abs(phi.values - expected)) <= 1e-11 * np.max(np.abs(expected))
    assert np.max(np.abs(phi.values - np.exp(4j * t / h**2) * g(phi.x))) <= 1e-10 * np.max(np.abs(g(phi.x)))
    assert np.max(np.abs(psi.values)) <= 1e-12


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=2, max_value=48), st.floats(0.01, 1.0), st.floats(-3.0, 3.0),
       st.integers(min_value=0, max_value=2**31 - 1))
def test_split_plancherel_property(half, h, t, seed):
    rng = np.random.default_rng(seed)
    f = random_field(rng, M=2 * half, h=h)
    psi, phi = split_fields(f, t)
    lhs = psi.norm() ** 2 + phi.norm() ** 2
    assert abs(lhs - f.norm() ** 2 / h) <= 1e-10 * f.norm() ** 2 / h


# ---------------------------------------------------------------------------
# reconstruct


def test_reconstruct_zero():
    assert np.all(reconstruct(LatticeField(0.2, np.zeros(16))).values == 0)


def test_reconstruct_delta_gives_line_kernel():
    h = 0.5
    errors = []
    for L in (32.0, 64.0):
        M = site_count(L, h)
        v = np.zeros(M)
        v[M // 2] = 1.0
        r = reconstruct(LatticeField(h, v))
        x = r.x
        # exact periodic interpolant: (1/2L) sum over the half-open slow arc
        k = np.arange(-M // 4, M // 4)
        periodic = np.exp(1j * np.pi * np.outer(x, k) / L).sum(axis=1) / (2 * L)
        assert np.max(np.abs(r.values - periodic)) <= 1e-12
        with np.errstate(invalid="ignore", divide="ignore"):
            kernel = np.where(x == 0, 1 / (2 * h), np.sin(np.pi * x / (2 * h)) / (np.pi * x))
        inner = np.abs(x) <= L / 2
        errors.append(np.max(np.abs(r.values - kernel)[inner]))
        # the window truncation error is one endpoint mode of weight 1/2L
        assert errors[-1] <= 1.1 / (2 * L)
    assert errors[1] < 0.55 * errors[0]


def test_reconstruct_plancherel_on_slow_semicircle(rng):
    M, h = 128, 0.05
    theta = fundamental_arc(M)
    c = np.where(np.abs(theta) < np.pi / 2, rng.standard_normal(M) + 1j * rng.standard_normal(M), 0)
    f = inverse_transform(SpectralCoefficients(c), h)
    r = reconstruct(f)
    assert abs(r.norm() ** 2 - f.norm() ** 2 / h) <= 1e-10 * f.norm() ** 2 / h
    # general data: the bound ||R c|| <= h^{-1/2} ||c||
    g = random_field(rng, M, h)
    assert reconstruct(g).norm() <= h**-0.5 * g.norm() * (1 + 1e-12)


def test_reconstruct_tail_bound_on_delta_trains():
    # c supported in |n h| <= L1: mass of R c beyond L1 + L' is <= C L1 / (h L') ||c||^2
    h, L = 0.25, 64.0
    M = site_count(L, h)
    n = np.arange(M) - M // 2
    out = {}
    for L1 in (1.0, 2.0, 4.0):
        v = np.where((np.abs(n * h) <= L1) & (n % 3 == 0), 1.0, 0.0)
        r = reconstruct(LatticeField(h, v))
        for Lp in (4.0, 8.0, 16.0):
            tail = r.dx * np.sum(np.abs(r.values[np.abs(r.x) > L1 + Lp]) ** 2)
            out[(L1, Lp)] = tail / (L1 / (h * Lp) * np.sum(v**2))
    C = out[(1.0, 4.0)]
    assert all(v <= C * 1.5 for v in out.values())


# ---------------------------------------------------------------------------
# projections


def test_project_arc_idempotent_and_pythagoras(rng):
    f = random_field(rng, 128)
    p = project_arc(f, 0.6)
    pp = project_arc(p, 0.6)
    assert np.linalg.norm(pp.values - p.values) <= 1e-13 * f.norm()
    q = f.values - p.values
    total = np.linalg.norm(p.values) ** 2 + np.linalg.norm(q) ** 2
    assert abs(total - f.norm() ** 2) <= 1e-12 * f.norm() ** 2


@pytest.mark.parametrize("delta", [0.1, 0.5, 0.99])
def test_project_arc_kills_inflection_mode(delta):
    M = 64
    n = np.arange(M) - M // 2
    f = LatticeField(0.1, np.exp(1j * n * np.pi / 2))
    assert np.max(np.abs(project_arc(f, delta).values)) <= 1e-13
    with pytest.raises(ParameterError):
        project_arc(f, 1.0)


def test_project_arc_nested(rng):
    f = random_field(rng, 128)
    norms = [np.linalg.norm(f.values - project_arc(f, d).values) for d in (0.2, 0.5, 0.8, 0.95)]
    assert all(b <= a + 1e-12 for a, b in zip(norms, norms[1:]))


def test_smooth_bump_plateau_and_support():
    x = np.linspace(-3, 3, 601)
    chi = smooth_bump(x)
    assert np.all(chi[np.abs(x) <= 1] == 1.0)
    assert np.all(chi[np.abs(x) >= 2] == 0.0)
    assert np.all((chi >= 0) & (chi <= 1))
    bridge = (x > 1) & (x < 2)
    assert np.all(np.diff(chi[bridge]) <= 0)
    assert 0 < smooth_bump(1.5) < 1 and smooth_bump(-1.5) == smooth_bump(1.5)


def test_project_smooth_modes():
    M, h = 128, 0.05
    n = np.arange(M) - M // 2
    zero_mode = LatticeField(h, np.ones(M))
    np.testing.assert_allclose(project_smooth(zero_mode, 4.0).values, np.ones(M), atol=1e-13)
    inflection = LatticeField(h, np.exp(1j * n * np.pi / 2))
    kappa = 0.9 * np.pi / (8 * h)
    assert np.max(np.abs(project_smooth(inflection, kappa).values)) <= 1e-13
    with pytest.raises(ParameterError):
        project_smooth(zero_mode, np.pi / (4 * h))


def test_smooth_projection_commutator_decays_like_inverse_kappa_r():
    h, M = 0.1, 512
    x = h * (np.arange(M) - M // 2)
    F = np.fft.fft(np.eye(M), axis=0)

    def comm(kappa, R):
        P = np.fft.ifft(smooth_symbol(M, kappa, h)[:, None] * F, axis=0)
        phi = 1 - smooth_bump(x / R)
        return np.linalg.norm(P * phi[None, :] - phi[:, None] * P, 2)

    pairs = [(1.0, 4.0), (2.0, 4.0), (4.0, 4.0), (4.0, 8.0), (7.0, 8.0)]
    norms = {p: comm(*p) for p in pairs}
    C = norms[(7.0, 8.0)] * 7.0 * 8.0  # fitted once
    for (k, R), n in norms.items():
        assert n <= C / (k * R) * (1 + 1e-9)
    # the symbol and the cutoff are dilations of fixed profiles: only kappa R matters
    assert abs(comm(1.0, 8.0) - comm(2.0, 4.0)) <= 1e-5 * comm(2.0, 4.0)


# ---------------------------------------------------------------------------
# continuum helpers


def test_continuum_bandlimit_invariant():
    f, band = trig_poly(4.0, 5, seed=9)
    J = 128
    x = -4.0 + (8.0 / J) * np.arange(J)
    ContinuumField(8.0 / J, f(x), band)
    with pytest.raises(BandlimitError):
        ContinuumField(8.0 / J, f(x), band / 2)
    cut = sharp_cutoff(ContinuumField(8.0 / J, f(x)), band / 2)
    assert cut.bandlimit == band / 2


def test_resample_preserves_norm_and_values():
    f, band = trig_poly(4.0, 5, seed=10)
    g = ContinuumField(8.0 / 64, f(-4.0 + (8.0 / 64) * np.arange(64)))
    up = resample(g, 256)
    assert abs(up.norm() - g.norm()) <= 1e-12 * g.norm()
    assert np.max(np.abs(up.values - f(up.x))) <= 1e-11 * np.max(np.abs(f(up.x)))
    with pytest.raises(ParameterError):
        site_count(1.0, 0.3)
