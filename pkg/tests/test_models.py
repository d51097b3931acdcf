import numpy as np
import pytest

from wegnerflow.operators import band_split, validate_hermitian
from wegnerflow.flow import FlowConfig, Wegner, integrate_flow
from wegnerflow.geometry import fs_metric
from wegnerflow.models import (
    SpecViolationError,
    TruncationTooSmallError,
    GhoSpec,
    SpinSpec,
    JcSpec,
    build_gho,
    build_spin,
    build_jc,
    displacement_shift,
    jc_sector_indices,
    jc_sector_blocks,
    displacement_family,
    squeeze_family,
    spin_family,
    jc_family,
    closed_form_flow,
    coordinate_projection,
    interior_rows,
)


def test_spec_validation():
    with pytest.raises(SpecViolationError):
        GhoSpec(omega=1.0, lam=0.6)  # omega <= 2|lambda|
    with pytest.raises(SpecViolationError):
        SpinSpec(s=0.3, b_field=(0, 0, 1))
    with pytest.raises(SpecViolationError):
        SpinSpec(s=0.5, b_field=(0, 0, 0))
    with pytest.raises(SpecViolationError):
        JcSpec(omega0=1.0, omega=1.0, kappa=0.1, n_max=1)
    with pytest.raises(TruncationTooSmallError):
        squeeze_family(0, 10)


def test_build_gho_structure():
    h = build_gho(GhoSpec(omega=1.0, lam=0.2, n_max=12))
    validate_hermitian(h)
    bd = band_split(h)
    assert bd.band_indices() == [2]
    assert h[2, 0] == pytest.approx(0.2 * np.sqrt(2.0))
    assert h[3, 3] == pytest.approx(3.0)


def test_displacement_shift_removes_linear_terms():
    omega, lam, mu = 1.0, 0.2, 0.3 + 0.1j
    alpha = displacement_shift(omega, lam, mu)
    assert abs(omega * alpha + 2 * lam * np.conj(alpha) - mu) < 1e-12


def test_build_spin_eigenvalues():
    b = (1 / np.sqrt(2), 0.0, 1 / np.sqrt(2))
    h = build_spin(SpinSpec(s=1.0, b_field=b))
    w = np.sort(np.linalg.eigvalsh(h))
    assert np.allclose(w, [-1.0, 0.0, 1.0], atol=1e-12)


def test_build_jc_sector_structure():
    spec = JcSpec(omega0=1.5, omega=1.0, kappa=0.2, n_max=4)
    h = build_jc(spec)
    validate_hermitian(h)
    blocks, scalar = jc_sector_blocks(spec)
    assert scalar == pytest.approx(-0.75)
    for n, blk in enumerate(blocks):
        i, j = jc_sector_indices(n)
        assert h[i, i] == pytest.approx(blk[0, 0])
        assert h[j, j] == pytest.approx(blk[1, 1])
        assert h[i, j] == pytest.approx(blk[0, 1])


def test_jc_resonance_has_vanishing_generator():
    # at omega0 = omega every sector block has A_n = B_n: the flow
    # generator is identically zero despite nonzero coupling
    spec = JcSpec(omega0=1.0, omega=1.0, kappa=0.2, n_max=4)
    h = build_jc(spec)
    traj = integrate_flow(h, Wegner(), FlowConfig(l_max=1.0))
    assert traj.stop_reason == "stalled"


def test_closed_form_flow_asymptotics():
    # quadratic coefficient decays; frequency settles above omega
    spec = GhoSpec(omega=1.0, lam=0.2, n_max=12)
    l = np.linspace(0.0, 8.0, 81)
    red = closed_form_flow(spec, l)
    lam = red.values["lam"]
    assert abs(lam[-1]) < 1e-9
    # invariant of the reduced system: omega^2 - 4|lam|^2
    inv = red.values["omega"] ** 2 - 4 * np.abs(lam) ** 2
    assert np.allclose(inv, inv[0], atol=1e-9)

    spec_s = SpinSpec(s=0.5, b_field=(0.6, 0.0, 0.8))
    red_s = closed_form_flow(spec_s, l)
    beta = red_s.values["beta"]
    assert abs(beta[-1]) < abs(beta[0]) * 1e-2
    # beta_z^2 + 4|beta|^2 is an invariant of the reduced system
    mag = 4 * np.abs(beta) ** 2 + red_s.values["beta_z"] ** 2
    assert np.allclose(np.real(mag), np.real(mag[0]), atol=1e-9)


def test_family_unitaries_are_unitary():
    for fam, alpha in (
        (displacement_family(30), [0.3, -0.2]),
        (squeeze_family(0, 40), [0.2, 0.5]),
        (spin_family(0.5, 0.5), [0.7, 0.3]),
        (jc_family(), [0.6, 0.2, -0.1]),
    ):
        u = fam.unitary(np.asarray(alpha, dtype=float))
        d = u.shape[0]
        assert np.allclose(u.conj().T @ u, np.eye(d), atol=1e-10)


def test_squeeze_family_bogoliubov_convention():
    # U^dag a U = a cosh r - a^dag e^{-2 i phi} sinh r
    n_max = 60
    fam = squeeze_family(0, n_max)
    r, phi = 0.25, 0.4
    u = fam.unitary(np.array([r, phi]))
    from wegnerflow.models import fock_annihilation
    a = fock_annihilation(n_max)
    lhs = u.conj().T @ a @ u
    rhs = np.cosh(r) * a - np.exp(-2j * phi) * np.sinh(r) * a.conj().T
    # the finite cutoff corrupts high Fock rows; the algebra holds
    # to near machine precision well below the truncation front
    assert np.max(np.abs((lhs - rhs)[:20, :20])) < 1e-10


def test_coordinate_projection_spin_roundtrip():
    spec = SpinSpec(s=0.5, b_field=(1 / np.sqrt(2), 0.0, 1 / np.sqrt(2)))
    traj = integrate_flow(
        build_spin(spec), Wegner(),
        FlowConfig(l_max=6.0, sample_dl=0.1, track_unitary=True,
                   rtol=1e-11, atol=1e-14))
    fam = spin_family(0.5, 0.5)
    ct = coordinate_projection(traj, "spin", family=fam, s=0.5)
    # the flow unitary starts at the identity and rotates the base
    # state toward the eigenvector, saturating at the field tilt pi/4
    assert ct.alpha[0, 0] == pytest.approx(0.0, abs=1e-10)
    assert ct.alpha[-1, 0] == pytest.approx(np.pi / 4, abs=1e-2)
    # phi stays constant for a real field
    assert np.max(np.abs(ct.alpha[:, 1] - ct.alpha[0, 1])) < 1e-8


def test_jc_family_metric_closed_form():
    fam = jc_family()
    c = 0.6
    g = fs_metric(fam, np.array([c, 0.3, -0.2])).g
    k = c * c * (1 - c * c)
    expect = np.array([
        [1.0 / (1.0 - c * c), 0.0, 0.0],
        [0.0, k, -k],
        [0.0, -k, k],
    ])
    assert np.allclose(g, expect, atol=1e-5)
