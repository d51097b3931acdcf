import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wegnerflow.operators import NoSuchBandError, band_split
from wegnerflow.geometry import (
    CoordinateTrajectory,
    condition17,
    condition17_offenders,
    fs_metric,
    christoffel,
    arc_length,
    geodesic_residual,
    case_classify,
)
from wegnerflow.models import spin_family, displacement_family


def test_condition17_truth_table():
    assert condition17({1}, 1) is True
    assert condition17({1, 2}, 1) is False
    assert condition17({1, 3}, 1) is False
    assert condition17({1, 4}, 1) is True
    assert condition17({2, 5}, 2) is True


def test_condition17_requires_member_band():
    with pytest.raises(NoSuchBandError):
        condition17({1, 2}, 3)


def test_condition17_offenders():
    assert condition17_offenders({1, 2, 3}, 1) == [(2, 2), (3, 3)]
    assert condition17_offenders({2, 5}, 2) == []


@given(st.sets(st.integers(1, 30), min_size=1, max_size=6),
       st.integers(1, 10))
@settings(max_examples=100, deadline=None)
def test_condition17_scale_invariance(bands, k):
    # rescaling every band index by k cannot change the verdict
    a = min(bands)
    scaled = {k * b for b in bands}
    assert condition17(bands, a) == condition17(scaled, k * a)


def test_spin_half_metric_is_round_sphere():
    fam = spin_family(0.5, 0.5)
    theta, phi = 0.9, 0.4
    g = fs_metric(fam, np.array([theta, phi])).g
    expect = 0.25 * np.diag([1.0, np.sin(theta) ** 2])
    assert np.allclose(g, expect, atol=1e-6)


def test_sphere_christoffels():
    fam = spin_family(0.5, 0.5)
    theta = 0.8
    gam = christoffel(fam, np.array([theta, 0.3]))
    # conformal factors cancel: standard round-sphere symbols
    assert gam[0, 1, 1] == pytest.approx(-np.sin(theta) * np.cos(theta),
                                         abs=1e-5)
    assert gam[1, 0, 1] == pytest.approx(1.0 / np.tan(theta), abs=1e-4)
    assert gam[0, 0, 0] == pytest.approx(0.0, abs=1e-5)


def test_arc_length_great_circle():
    fam = spin_family(0.5, 0.5)
    theta = np.linspace(0.2, 1.2, 101)
    l = np.linspace(0.0, 1.0, 101)
    ct = CoordinateTrajectory.from_alpha(
        l, np.column_stack([theta, np.zeros_like(theta)]))
    # ds = (1/2) dtheta on the Bloch sphere
    total, cum = arc_length(ct, fam)
    assert total == pytest.approx(0.5 * (theta[-1] - theta[0]), rel=1e-5)
    assert np.all(np.diff(cum) > 0)


def test_meridian_is_geodesic_latitude_is_not():
    fam = spin_family(0.5, 0.5)
    l = np.linspace(0.0, 2.0, 161)
    meridian = CoordinateTrajectory.from_alpha(
        l, np.column_stack([0.3 + 0.5 * l, np.zeros_like(l)]))
    gr = geodesic_residual(meridian, fam)
    assert np.max(np.abs(gr.residual)) < 1e-5

    latitude = CoordinateTrajectory.from_alpha(
        l, np.column_stack([np.full_like(l, np.pi / 4), l]))
    gr2 = geodesic_residual(latitude, fam, speed_rel=1e-3)
    assert np.max(np.abs(gr2.residual)) > 1e-2


def test_displacement_metric_is_flat():
    fam = displacement_family(40)
    g = fs_metric(fam, np.array([0.2, -0.3])).g
    assert np.allclose(g, 0.5 * np.eye(2), atol=1e-6)


def test_case_classification_labels():
    # equal spacing: Case C (gap exactly zero)
    h = np.diag([0.0, 1.0, 2.0, 3.0]).astype(complex)
    rows = np.arange(1, 4)
    h[rows, rows - 1] = 0.1
    h[rows - 1, rows] = 0.1
    lab = case_classify(band_split(h), 1, 1)
    assert lab.label == "C"
    assert lab.gap == 0.0

    # edge row: one neighbor only -> Case B
    lab_edge = case_classify(band_split(h), 0, 1)
    assert lab_edge.label == "B"

    # absent band: no coupling at all -> Case A
    h0 = np.diag([0.0, 1.0, 2.0]).astype(complex)
    lab0 = case_classify(band_split(h0), 1, 1)
    assert lab0.label == "A"

    with pytest.raises(NoSuchBandError):
        case_classify(band_split(h), 1, 9)


def test_coordinate_trajectory_slicing():
    l = np.linspace(0.0, 1.0, 11)
    alpha = np.column_stack([l, l**2])
    ct = CoordinateTrajectory.from_alpha(l, alpha)
    sub = ct.sliced(slice(2, 8))
    assert sub.l[0] == pytest.approx(0.2)
    assert sub.alpha.shape == (6, 2)
