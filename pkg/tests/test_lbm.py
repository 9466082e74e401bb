"""D1Q3 BGK solver and its second-order Carleman embedding."""
import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from carleman_lab.errors import DomainError, ResourceError
from carleman_lab.lbm import (
    D1Q3,
    FlowState,
    build_clb2,
    classical_lbm_run,
    clb2_evolve,
    collide,
    collision_system,
    equilibrium,
    rest_state,
    sine_initial_state,
    stream,
    streaming_matrix,
)


def mp_equilibrium(rho, j):
    """Equilibrium moments in 50-digit arithmetic."""
    mpmath.mp.dps = 50
    c = [mpmath.mpf(-1), mpmath.mpf(0), mpmath.mpf(1)]
    w = [mpmath.mpf(1) / 6, mpmath.mpf(2) / 3, mpmath.mpf(1) / 6]
    cs2 = mpmath.mpf(1) / 3
    rho, j = mpmath.mpf(rho), mpmath.mpf(j)
    return [
        wi * (rho + ci * j / cs2 + (ci * ci - cs2) * j * j / (2 * cs2 * cs2))
        for ci, wi in zip(c, w)
    ]


@pytest.mark.parametrize("rho,j", [(1.0, 0.0), (1.02, 0.03), (0.97, -0.05)])
def test_equilibrium_against_mpmath(rho, j):
    feq = equilibrium(D1Q3, rho, j)
    ref = [float(v) for v in mp_equilibrium(rho, j)]
    np.testing.assert_allclose(feq, ref, rtol=1e-15, atol=1e-16)


def test_equilibrium_moments():
    rho, j = 1.01, 0.04
    feq = equilibrium(D1Q3, rho, j)
    c = D1Q3.c
    assert feq.sum() == pytest.approx(rho, abs=1e-15)
    assert (c * feq).sum() == pytest.approx(j, abs=1e-15)
    # quadratic term uses rho ~ 1
    assert (c * c * feq).sum() == pytest.approx(D1Q3.cs2 * rho + j * j, abs=1e-15)


def test_stream_is_periodic_shift():
    rng = np.random.default_rng(0)
    s = FlowState(rng.random((3, 7)))
    out = stream(s)
    np.testing.assert_array_equal(out.f[0], np.roll(s.f[0], -1))
    np.testing.assert_array_equal(out.f[1], s.f[1])
    np.testing.assert_array_equal(out.f[2], np.roll(s.f[2], 1))
    np.testing.assert_array_equal(streaming_matrix(D1Q3, 7) @ s.vector(), out.vector())


def test_collision_polynomial_equals_bgk_increment():
    rng = np.random.default_rng(2)
    s = sine_initial_state(D1Q3, 6, 0.1)
    s = FlowState(s.f + 1e-3 * rng.standard_normal(s.f.shape))
    for omega in (0.6, 1.0, 1.7):
        poly = collision_system(D1Q3, 6, omega)
        increment = poly.rhs(s.vector())
        np.testing.assert_allclose(
            increment, (collide(s, omega).f - s.f).reshape(-1), atol=1e-15
        )


def test_rest_state_is_fixed_point():
    s = rest_state(D1Q3, 8)
    np.testing.assert_allclose(classical_lbm_run(s, 1.3, 20).f, s.f, atol=1e-15)


def test_classical_conserves_mass_and_momentum():
    s = sine_initial_state(D1Q3, 16, 0.1)
    out = classical_lbm_run(s, 0.8, 50)
    assert out.mass == pytest.approx(s.mass, abs=1e-12)
    assert out.total_momentum() == pytest.approx(s.total_momentum(), abs=1e-12)


def test_omega_range():
    s = rest_state(D1Q3, 4)
    with pytest.raises(DomainError):
        classical_lbm_run(s, 2.0, 1)
    with pytest.raises(DomainError):
        build_clb2(D1Q3, 4, -0.1)


def test_clb2_single_step_exact():
    sys_ = build_clb2(D1Q3, 8, 1.0, mach=0.1)
    run = clb2_evolve(sys_, None, 1)
    assert run.linf_error[0] < 1e-14


def test_clb2_dimensions_and_cap():
    sys_ = build_clb2(D1Q3, 4, 1.0)
    assert sys_.N1 == 12
    assert sys_.total_dim == 12 + 144
    assert sys_.step.shape == (156, 156)
    with pytest.raises(ResourceError):
        build_clb2(D1Q3, 16, 1.0, max_dim=1000)


def test_clb2_error_grows_with_mach():
    errs = [clb2_evolve(build_clb2(D1Q3, 16, 1.0, m), None, 100).max_error
            for m in (0.01, 0.025, 0.05, 0.1)]
    assert all(a < b for a, b in zip(errs, errs[1:]))


def test_clb2_conserves_mass():
    run = clb2_evolve(build_clb2(D1Q3, 16, 1.0, 0.05), None, 100)
    assert np.abs(run.mass_drift).max() < 1e-12


@settings(max_examples=10, deadline=None)
@given(omega=st.floats(0.3, 1.8), mach=st.floats(0.005, 0.1))
def test_property_clb2_tracks_classical(omega, mach):
    run = clb2_evolve(build_clb2(D1Q3, 8, omega, mach), None, 20)
    assert run.max_error < 1e-2
    assert np.abs(run.mass_drift).max() < 1e-12
