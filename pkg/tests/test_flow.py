import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wegnerflow.operators import band_part, commutator, off_diag_norm_sq
from wegnerflow.flow import (
    Wegner,
    Band,
    FlowConfig,
    integrate_flow,
    wegner_generator,
    band_generator,
    decay_identity_residual,
)


def random_hermitian(rng, d):
    m = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return m + m.conj().T


hermitians = st.integers(0, 2**31 - 1).map(
    lambda seed: random_hermitian(np.random.default_rng(seed), 6)
)


@given(hermitians)
@settings(max_examples=25, deadline=None)
def test_wegner_generator_matches_commutator(h):
    hd = np.diag(np.diag(h))
    expect = commutator(hd, h - hd)
    assert np.allclose(wegner_generator(h), expect, atol=1e-10)


@given(hermitians, st.integers(1, 5))
@settings(max_examples=25, deadline=None)
def test_band_generator_matches_commutator(h, a):
    hd = np.diag(np.diag(h))
    expect = commutator(hd, band_part(h, a))
    assert np.allclose(band_generator(h, a), expect, atol=1e-10)


def test_flow_diagonalizes_and_preserves_spectrum():
    rng = np.random.default_rng(7)
    h0 = random_hermitian(rng, 6)
    traj = integrate_flow(h0, Wegner(), FlowConfig(l_max=50.0))
    assert traj.stop_reason == "converged"
    final = traj.samples[-1]
    assert final.offdiag_sq <= 1e-18
    flowed = np.sort(np.real(np.diag(final.h)))
    direct = np.sort(np.linalg.eigvalsh(h0))
    assert np.max(np.abs(flowed - direct)) < 1e-8


def test_offdiag_norm_monotone():
    rng = np.random.default_rng(8)
    h0 = random_hermitian(rng, 6)
    traj = integrate_flow(h0, Wegner(),
                          FlowConfig(l_max=5.0, sample_dl=0.05))
    off = np.array([s.offdiag_sq for s in traj.samples])
    assert np.all(np.diff(off) <= 1e-10 * off[0])


def test_trace_conservation():
    rng = np.random.default_rng(9)
    h0 = random_hermitian(rng, 6)
    traj = integrate_flow(h0, Wegner(), FlowConfig(l_max=20.0))
    first, last = traj.samples[0], traj.samples[-1]
    assert last.trace_h == pytest.approx(first.trace_h, rel=1e-9)
    assert last.trace_h2 == pytest.approx(first.trace_h2, rel=1e-9)


def test_tracked_unitary_transports_h():
    rng = np.random.default_rng(10)
    h0 = random_hermitian(rng, 5)
    traj = integrate_flow(
        h0, Wegner(),
        FlowConfig(l_max=3.0, sample_dl=0.5, track_unitary=True,
                   rtol=1e-10, atol=1e-13))
    for s in traj.samples:
        assert np.allclose(s.u.conj().T @ s.u, np.eye(5), atol=1e-8)
        assert np.allclose(s.u @ h0 @ s.u.conj().T, s.h, atol=1e-7)


def test_stalled_on_degenerate_diagonal():
    h0 = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
    traj = integrate_flow(h0, Wegner(), FlowConfig(l_max=1.0))
    assert traj.stop_reason == "stalled"
    assert np.max(np.abs(wegner_generator(h0))) == 0.0
    assert traj.block_report is not None
    assert traj.block_report["intra_cluster_offdiag_sq"] > 0


def test_rk4_agrees_with_rk45():
    rng = np.random.default_rng(11)
    h0 = random_hermitian(rng, 5)
    t1 = integrate_flow(h0, Wegner(),
                        FlowConfig(l_max=0.5, sample_dl=0.1,
                                   stop_offdiag=0.0))
    t2 = integrate_flow(h0, Wegner(),
                        FlowConfig(l_max=0.5, sample_dl=0.1, stop_offdiag=0.0,
                                   integrator="rk4", step=1e-3))
    assert np.allclose(t1.samples[-1].h, t2.samples[-1].h, atol=1e-7)


def test_band_flow_touches_only_generated_bands():
    # a band-1 flow on a band-1 matrix feeds band 2 but conserves spectrum
    eps = np.array([0.0, 0.7, 1.9, 3.4, 4.6])
    h0 = np.diag(eps).astype(complex)
    rows = np.arange(1, 5)
    h0[rows, rows - 1] = 0.3
    h0[rows - 1, rows] = 0.3
    traj = integrate_flow(h0, Band(1),
                          FlowConfig(l_max=30.0, sample_dl=0.5,
                                     stop_offdiag=0.0))
    first, final = traj.samples[0], traj.samples[-1]
    # band 1 dies off, band 2 gets fed, trace(H^2) is conserved
    assert final.band_sq[1] < 1e-10 * first.band_sq[1]
    assert final.band_sq.get(2, 0.0) > 0.0
    assert final.trace_h2 == pytest.approx(first.trace_h2, rel=1e-9)


def test_decay_identity_on_band_flow():
    eps = np.array([0.0, 0.9, 2.1, 3.0, 4.2, 5.5])
    h0 = np.diag(eps).astype(complex)
    rows = np.arange(1, 6)
    h0[rows, rows - 1] = 0.2
    h0[rows - 1, rows] = 0.2
    traj = integrate_flow(
        h0, Band(1),
        FlowConfig(l_max=1.0, sample_dl=1e-3, stop_offdiag=0.0,
                   rtol=1e-11, atol=1e-14))
    l, band_res, trace_res = decay_identity_residual(traj)
    off = np.array([s.offdiag_sq for s in traj.samples])
    scale = np.max(np.abs(np.gradient(off, [s.l for s in traj.samples])))
    assert np.max(np.abs(band_res)) / scale < 1e-5
    assert np.max(np.abs(trace_res)) / scale < 1e-5


def test_flow_config_validation():
    with pytest.raises(ValueError):
        FlowConfig(l_max=0.0)
    with pytest.raises(ValueError):
        FlowConfig(rtol=-1.0)
    with pytest.raises(ValueError):
        FlowConfig(stop_offdiag=-1.0)
