"""Named verification checks for the flow/geometry claims.

Each check exercises one structural identity or closed-form result on a
concrete model and returns :class:`CheckResult` records with the
measured residual, its tolerance, and a pass flag.  ``run_all`` strings
every check together; the CLI ``verify-all`` command and the acceptance
test suite both consume this module so there is a single source of
truth for what "verified" means.

Most checks compare with ``<=`` (residual below tolerance).  The
counter-control checks use ``>=``: they pass only when a deliberately
non-geodesic curve produces a *large* residual, guarding against a
vacuously small residual pipeline.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .operators import (
    BandDecomposition,
    band_split,
    band_assemble,
    validate_hermitian,
)
from .flow import (
    FlowConfig,
    Wegner,
    Band,
    integrate_flow,
    wegner_generator,
    decay_identity_residual,
)
from .geometry import (
    CoordinateTrajectory,
    condition17,
    fs_metric,
    geodesic_residual,
    variational_gradient,
    xi_residual,
    case_classify,
    generator_consistency,
    relation14_residual,
    sandwiched_ode_residual,
)
from .models import (
    GhoSpec,
    SpinSpec,
    JcSpec,
    build_gho,
    build_spin,
    build_jc,
    displacement_family,
    squeeze_family,
    spin_family,
    jc_family,
    closed_form_flow,
    coordinate_projection,
)

__all__ = ["CheckResult", "run_all", "ALL_CHECKS"]

SQUEEZE_NMAX = 60
SPIN_B = (1.0 / np.sqrt(2.0), 0.0, 1.0 / np.sqrt(2.0))


@dataclass
class CheckResult:
    """One named verification outcome."""

    name: str
    max_residual: float
    tolerance: float
    passed: bool
    comparison: str = "<="
    note: str = ""


def _below(name, value, tol, note=""):
    value = float(value)
    return CheckResult(name, value, float(tol), bool(value <= tol), "<=", note)


def _above(name, value, tol, note=""):
    value = float(value)
    return CheckResult(name, value, float(tol), bool(value >= tol), ">=", note)


def _failed(name, tol, note):
    return CheckResult(name, float("inf"), float(tol), False, "<=", note)


# ---------------------------------------------------------------------------
# shared flows (deterministic, so safe to cache)


def _random_hermitian_ensemble(seed, count=20, dim=8, gap_scale=1.0):
    """Well-gapped random Hermitian matrices: Haar-like eigenvectors with
    eigenvalue gaps drawn uniformly from gap_scale * [0.5, 1.0]."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        q, r = np.linalg.qr(z)
        q = q * (np.diag(r) / np.abs(np.diag(r)))
        e = np.cumsum(rng.uniform(0.5, 1.0, size=dim)) * gap_scale
        h = (q * e) @ q.conj().T
        perm = rng.permutation(dim)
        out.append(validate_hermitian(h[np.ix_(perm, perm)], tol=1e-10))
    return out


@lru_cache(maxsize=None)
def _spin_flow(s, b_field, l_max, sample_dl):
    h0 = build_spin(SpinSpec(s=s, b_field=b_field))
    cfg = FlowConfig(l_max=l_max, stop_offdiag=0.0, sample_dl=sample_dl,
                     track_unitary=True, rtol=1e-11, atol=1e-14)
    return integrate_flow(h0, Wegner(), cfg)


def _spin_traj():
    return _spin_flow(0.5, SPIN_B, 20.0, 0.05)


def _spin_dense_traj():
    return _spin_flow(0.5, SPIN_B, 2.0, 1e-3)


@lru_cache(maxsize=None)
def _gho_flow(omega, lam, mu, n_max, l_max, sample_dl):
    h0 = build_gho(GhoSpec(omega=omega, lam=lam, mu=mu, n_max=n_max))
    cfg = FlowConfig(l_max=l_max, stop_offdiag=0.0, sample_dl=sample_dl,
                     track_unitary=True, integrator="dop853",
                     rtol=1e-9, atol=1e-12)
    return integrate_flow(h0, Wegner(), cfg)


def _squeeze_traj():
    return _gho_flow(1.0, 0.2, 0.0, SQUEEZE_NMAX, 2.0, 0.01)


def _squeeze_dense_traj():
    return _gho_flow(1.0, 0.2, 0.0, SQUEEZE_NMAX, 0.3, 5e-4)


@lru_cache(maxsize=None)
def _jc_flow(omega0, omega, kappa, n_max, l_max, sample_dl):
    h0 = build_jc(JcSpec(omega0=omega0, omega=omega, kappa=kappa,
                         n_max=n_max))
    cfg = FlowConfig(l_max=l_max, stop_offdiag=0.0, sample_dl=sample_dl,
                     track_unitary=True, rtol=1e-10, atol=1e-13)
    return integrate_flow(h0, Wegner(), cfg)


def _jc_traj(omega0):
    return _jc_flow(omega0, 1.0, 0.2, 4, 30.0, 0.1)


def _jc_dense_traj(omega0):
    return _jc_flow(omega0, 1.0, 0.2, 4, 2.2, 2e-3)


def _trim(ct, keep_mask):
    idx = np.nonzero(keep_mask)[0]
    return ct.sliced(slice(idx[0], idx[-1] + 1))


# ---------------------------------------------------------------------------
# criterion 1: isospectral flow on a random ensemble


def check_isospectral(seed=0):
    mats = _random_hermitian_ensemble(seed)
    worst_eig = 0.0
    worst_trace = 0.0
    for h0 in mats:
        cfg = FlowConfig(l_max=60.0, stop_offdiag=1e-18,
                         rtol=1e-10, atol=1e-13)
        traj = integrate_flow(h0, Wegner(), cfg)
        final = traj.samples[-1]
        flowed = np.sort(np.real(np.diag(final.h)))
        direct = np.sort(np.linalg.eigvalsh(h0))
        worst_eig = max(worst_eig, np.max(np.abs(flowed - direct)))
        t0, t20 = traj.samples[0].trace_h, traj.samples[0].trace_h2
        dt = abs(final.trace_h - t0) / max(abs(t0), 1.0)
        dt2 = abs(final.trace_h2 - t20) / max(abs(t20), 1.0)
        worst_trace = max(worst_trace, dt, dt2)
    return [
        _below("isospectral_eigenvalues", worst_eig, 1e-8,
               "20 seeded d=8 matrices, flow to offdiag^2 <= 1e-18"),
        _below("isospectral_trace_drift", worst_trace, 1e-9,
               "relative drift of Tr H and Tr H^2 along the flow"),
    ]


# ---------------------------------------------------------------------------
# criterion 2: coefficient-decay identity


def check_decay_identity(seed=0):
    mats = _random_hermitian_ensemble(seed, gap_scale=0.25)
    worst = 0.0
    for h0 in mats:
        bd = band_split(h0)
        single = band_assemble(
            BandDecomposition(eps=bd.eps, bands={1: bd.bands[1]}))
        cfg = FlowConfig(l_max=2.0, stop_offdiag=0.0, sample_dl=1e-3,
                         rtol=1e-11, atol=1e-14)
        traj = integrate_flow(single, Band(1), cfg)
        _, band_res, trace_res = decay_identity_residual(traj)
        scale = max(
            np.max(np.abs(np.gradient(
                [s.offdiag_sq for s in traj.samples],
                [s.l for s in traj.samples]))),
            1e-30,
        )
        worst = max(worst, np.max(band_res) / scale, np.max(trace_res) / scale)
    return [_below("decay_identity", worst, 1e-6,
                   "single-band ensemble, central differences at dl = 1e-3")]


# ---------------------------------------------------------------------------
# criterion 3: band condition truth table


def check_condition_truth_table():
    table = [
        ({1}, 1, True),
        ({1, 2}, 1, False),
        ({1, 3}, 1, False),
        ({1, 4}, 1, True),
        ({2, 5}, 2, True),
    ]
    wrong = sum(condition17(bands, a) != expect for bands, a, expect in table)
    return [_below("condition17_truth_table", wrong, 0,
                   "five-entry truth table, exact matches required")]


# ---------------------------------------------------------------------------
# criterion 4: closed-form metric factors


def check_metric_factors():
    out = []

    fam = displacement_family(40)
    worst = 0.0
    for alpha in ([0.3, -0.2], [0.0, 0.5], [-0.4, 0.1]):
        g = fs_metric(fam, np.array(alpha)).g
        worst = max(worst, np.max(np.abs(g - 0.5 * np.eye(2))))
    out.append(_below("metric_displacement", worst, 1e-6,
                      "coherent family metric is I/2"))

    worst = 0.0
    for n in (0, 1, 2):
        fam = squeeze_family(n, SQUEEZE_NMAX)
        factor = 0.5 * (n * n + n + 1)
        for r in (0.1, 0.2, 0.3):
            g = fs_metric(fam, np.array([r, 0.4])).g
            expect = factor * np.diag([1.0, np.sinh(2 * r) ** 2])
            worst = max(worst, np.max(np.abs(g - expect)))
    out.append(_below("metric_squeeze", worst, 1e-4,
                      "factor (n^2+n+1)/2 for base n = 0, 1, 2 at r <= 0.3"))

    worst = 0.0
    for s, m in ((0.5, 0.5), (1.0, 0.0), (1.0, 1.0)):
        fam = spin_family(s, m)
        factor = 0.5 * (s * s + s - m * m)
        theta = 0.7
        g = fs_metric(fam, np.array([theta, 0.3])).g
        expect = factor * np.diag([1.0, np.sin(theta) ** 2])
        worst = max(worst, np.max(np.abs(g - expect)))
    out.append(_below("metric_spin", worst, 1e-5,
                      "factor (s^2+s-m^2)/2 for (s, m) in {(1/2,1/2), (1,0), (1,1)}"))

    fam = jc_family()
    worst = 0.0
    for c in (0.55, 0.7, 0.85):
        g = fs_metric(fam, np.array([c, 0.3, -0.2])).g
        k = c * c * (1.0 - c * c)
        expect = np.array([
            [1.0 / (1.0 - c * c), 0.0, 0.0],
            [0.0, k, -k],
            [0.0, -k, k],
        ])
        worst = max(worst, np.max(np.abs(g - expect)))
    out.append(_below("metric_jc", worst, 1e-5,
                      "two-level family closed form on a 3-point grid in c"))
    return out


# ---------------------------------------------------------------------------
# criterion 5: reduced coefficient ODEs + phase constancy


def check_reduced_odes():
    out = []

    spec = GhoSpec(omega=1.0, lam=0.2, n_max=SQUEEZE_NMAX)
    h0 = build_gho(spec)
    cfg = FlowConfig(l_max=1.0, stop_offdiag=0.0, sample_dl=0.05,
                     rtol=1e-11, atol=1e-14)
    traj = integrate_flow(h0, Wegner(), cfg)
    l = np.array([s.l for s in traj.samples])
    lam = np.array([s.h[2, 0] / np.sqrt(2.0) for s in traj.samples])
    red = closed_form_flow(spec, l)
    out.append(_below(
        "reduced_ode_squeeze",
        np.max(np.abs(lam - red.values["lam"])), 1e-6,
        "row-0 quadratic coefficient vs dlam/dl = -4 w^2 lam system"))

    spec_s = SpinSpec(s=0.5, b_field=SPIN_B)
    traj_s = _spin_traj()
    l_s = np.array([s.l for s in traj_s.samples])
    beta = np.array([s.h[0, 1] for s in traj_s.samples])
    red_s = closed_form_flow(spec_s, l_s)
    out.append(_below(
        "reduced_ode_spin",
        np.max(np.abs(beta - red_s.values["beta"])), 1e-6,
        "off-diagonal coefficient vs dbeta/dl = -beta_z^2 beta system"))
    return out


def check_phase_constancy():
    out = []

    spec = GhoSpec(omega=1.0, lam=0.2 * np.exp(0.4j), n_max=SQUEEZE_NMAX)
    cfg = FlowConfig(l_max=1.0, stop_offdiag=0.0, sample_dl=0.05,
                     rtol=1e-11, atol=1e-14)
    traj = integrate_flow(build_gho(spec), Wegner(), cfg)
    lam = np.array([s.h[2, 0] / np.sqrt(2.0) for s in traj.samples])
    out.append(_below("phase_constancy_squeeze", np.ptp(np.angle(lam)), 1e-8,
                      "arg lam(l) drift along the flow"))

    spec_s = SpinSpec(s=0.5, b_field=(0.5, 0.4, 0.6))
    traj_s = integrate_flow(
        build_spin(spec_s), Wegner(),
        FlowConfig(l_max=10.0, stop_offdiag=0.0, sample_dl=0.05,
                   rtol=1e-11, atol=1e-14))
    beta = np.array([s.h[0, 1] for s in traj_s.samples])
    out.append(_below("phase_constancy_spin", np.ptp(np.angle(beta)), 1e-8,
                      "arg beta(l) drift along the flow"))

    ct = coordinate_projection(_jc_traj(1.5), "jc", sector=0)
    drift = max(np.ptp(ct.alpha[:, 1]), np.ptp(ct.alpha[:, 2]))
    out.append(_below("phase_constancy_jc", drift, 1e-8,
                      "theta_alpha and theta_gamma drift in sector 0"))
    return out


# ---------------------------------------------------------------------------
# criterion 6: geodesic verdicts


def _geodesic_records(ct_geo, ct_xi, family, *, christoffel_step=1e-3,
                      pinv_cutoff=None, var_subsample=4):
    out = []
    gr = geodesic_residual(ct_geo, family, christoffel_step=christoffel_step,
                           pinv_cutoff=pinv_cutoff, speed_rel=1e-3)
    out.append(_below("geodesic_residual",
                      np.max(np.abs(gr.residual)), 1e-3))
    vg = variational_gradient(ct_geo.sliced(slice(0, None, var_subsample)),
                              family)
    out.append(_below("variational_gradient", np.max(np.abs(vg)), 5e-4))
    xr = xi_residual(family, ct_xi)
    ratio = np.max(np.abs(xr.x)) / max(np.max(xr.scale), 1e-300)
    out.append(_below("xi_residual", ratio, 1e-5,
                      "relative to the magnitude of the cancelling terms"))
    return out


def _structure_records(h0, a, n_state):
    """Band-condition, case-classification, and sandwiched-ODE records
    shared by every geodesic suite."""
    bands = band_split(h0).band_indices()
    ok17 = condition17(bands, a)
    out = [CheckResult("condition17", 0.0 if ok17 else 1.0, 0.0, ok17, "<=",
                       f"bands {bands}, targeted a = {a}")]
    lab = case_classify(band_split(h0), n_state, a)
    gap = 0.0 if np.isnan(lab.gap) else lab.gap
    # only Case C demands a vanishing gap; A and B carry no constraint
    gap = gap if lab.label == "C" else 0.0
    out.append(CheckResult("case_classification", float(gap), 0.0,
                           gap == 0.0, "<=",
                           f"Case {lab.label} at basis row {n_state}"))
    return out


def _sandwiched_records(traj_dense, n_state, a):
    sw = sandwiched_ode_residual(traj_dense, n_state, a)
    h = traj_dense.samples[0].h
    eps = np.real(np.diag(h))
    ref = 0.0
    if n_state - a >= 0:
        ref = max(ref, (eps[n_state] - eps[n_state - a]) ** 2
                  * abs(h[n_state, n_state - a]))
    if n_state + a < h.shape[0]:
        ref = max(ref, (eps[n_state + a] - eps[n_state]) ** 2
                  * abs(h[n_state + a, n_state]))
    ref = max(ref, 1e-300)
    worst = max(np.max(sw.residual_lower), np.max(sw.residual_upper)) / ref
    drift = max(sw.phase_drift_lower, sw.phase_drift_upper)
    return [
        _below("sandwiched_ode", worst, 1e-3,
               "closed coefficient equations, relative to the l = 0 rate"),
        _below("sandwiched_phase_drift", drift, 1e-8),
    ]


def _stalled_records(note):
    return [
        _failed("geodesic_residual", 1e-3, note),
        _failed("variational_gradient", 5e-4, note),
        _failed("xi_residual", 1e-5, note),
    ]


def geodesic_suite(spec, base_n=0, sector=0):
    """Full geodesic verification pipeline for one model spec.

    Returns CheckResult records named geodesic_residual,
    variational_gradient, xi_residual, condition17, case_classification,
    sandwiched_ode, sandwiched_phase_drift.  A stalled flow yields
    failed geodesic records (there is no curve to test).
    """
    if isinstance(spec, SpinSpec):
        traj = _spin_flow(spec.s, tuple(spec.b_field), 20.0, 0.05)
        dense = _spin_flow(spec.s, tuple(spec.b_field), 2.0, 1e-3)
        out = _structure_records(traj.samples[0].h, 1, 0)
        if traj.stop_reason == "stalled":
            return out + _stalled_records("flow stalled: eta = 0 at l = 0")
        fam = spin_family(spec.s, spec.s)
        ct = coordinate_projection(traj, "spin", family=fam, s=spec.s)
        ct_xi = coordinate_projection(dense, "spin", family=fam,
                                      s=spec.s).sliced(slice(1, -1))
        out += _geodesic_records(ct, ct_xi, fam)
        out += _sandwiched_records(dense, 0, 1)
        return out

    if isinstance(spec, GhoSpec):
        if spec.lam != 0:
            kind, a, n_state = "squeeze", 2, 10
            fam = squeeze_family(base_n, spec.n_max)
        else:
            kind, a, n_state = "displacement", 1, 10
            fam = displacement_family(spec.n_max)
        traj = _gho_flow(spec.omega, spec.lam, spec.mu, spec.n_max, 2.0, 0.01)
        dense = _gho_flow(spec.omega, spec.lam, spec.mu, spec.n_max,
                          0.3, 5e-4)
        out = _structure_records(traj.samples[0].h, a, n_state)
        if traj.stop_reason == "stalled":
            return out + _stalled_records("flow stalled: eta = 0 at l = 0")
        ct = coordinate_projection(traj, kind, family=fam, residual_tol=1e-4)
        ct_xi = coordinate_projection(dense, kind, family=fam,
                                      residual_tol=1e-4)
        if kind == "squeeze":
            ct = _trim(ct, ct.alpha[:, 0] >= 0.02)
            ct_xi = _trim(ct_xi, ct_xi.alpha[:, 0] >= 0.02).sliced(
                slice(0, -1, 2))
        else:
            ct_xi = ct_xi.sliced(slice(1, -1, 2))
        out += _geodesic_records(ct, ct_xi, fam)
        out += _sandwiched_records(dense, 2 if kind == "squeeze" else 1, a)
        return out

    if isinstance(spec, JcSpec):
        traj = _jc_flow(spec.omega0, spec.omega, spec.kappa, spec.n_max,
                        30.0, 0.1)
        row = 2 * sector + 1
        out = _structure_records(traj.samples[0].h, 1, row)
        if traj.stop_reason == "stalled":
            return out + _stalled_records(
                "flow stalled at l = 0: the generator (A_n - B_n) C_n "
                "vanishes identically at resonance (omega0 = omega), so the "
                "induced state curve is a single point with no geodesic data")
        dense = _jc_flow(spec.omega0, spec.omega, spec.kappa, spec.n_max,
                         2.2, 2e-3)
        fam = jc_family()
        ct = coordinate_projection(traj, "jc", family=fam, sector=sector)
        ct = _trim(ct, ct.alpha[:, 0] <= 0.98)
        ct_xi = coordinate_projection(dense, "jc", family=fam, sector=sector)
        ct_xi = _trim(ct_xi, ct_xi.alpha[:, 0] <= 0.99)
        out += _geodesic_records(ct, ct_xi, fam, christoffel_step=1e-4,
                                 pinv_cutoff=1e-8, var_subsample=1)
        out += _sandwiched_records(dense, row, 1)
        return out

    raise TypeError(f"no geodesic suite for spec type {type(spec).__name__}")


def _tagged(records, tag):
    out = []
    for r in records:
        out.append(CheckResult(f"{r.name}_{tag}", r.max_residual, r.tolerance,
                               r.passed, r.comparison, r.note))
    return out


def check_geodesic_spin():
    recs = geodesic_suite(SpinSpec(s=0.5, b_field=SPIN_B))
    keep = {"geodesic_residual", "variational_gradient", "xi_residual"}
    return _tagged([r for r in recs if r.name in keep], "spin")


def check_geodesic_squeeze():
    out = []
    keep = {"geodesic_residual", "variational_gradient", "xi_residual"}
    for base in (0, 1):
        recs = geodesic_suite(GhoSpec(omega=1.0, lam=0.2,
                                      n_max=SQUEEZE_NMAX), base_n=base)
        out += _tagged([r for r in recs if r.name in keep],
                       f"squeeze_base{base}")
    return out


def check_geodesic_jc_resonant():
    """The verdict at exact resonance: the flow is a fixed point, so the
    geodesic records fail by construction (analyzed in the project
    notes); the detuned companion check below exercises the same
    pipeline on a flowing sector."""
    recs = geodesic_suite(JcSpec(omega0=1.0, omega=1.0, kappa=0.2, n_max=4))
    keep = {"geodesic_residual", "variational_gradient", "xi_residual"}
    return _tagged([r for r in recs if r.name in keep], "jc_resonant")


def check_geodesic_jc_detuned():
    """Supplementary: the same pipeline with omega0 = 1.5 actually flows."""
    recs = geodesic_suite(JcSpec(omega0=1.5, omega=1.0, kappa=0.2, n_max=4))
    keep = {"geodesic_residual", "variational_gradient", "xi_residual"}
    return _tagged([r for r in recs if r.name in keep], "jc_detuned")


def check_latitude_counter_control():
    fam = spin_family(0.5, 0.5)
    l = np.linspace(0.0, 3.0, 241)
    alpha = np.column_stack([np.full_like(l, np.pi / 4), l])
    ct = CoordinateTrajectory.from_alpha(l, alpha)
    gr = geodesic_residual(ct, fam, speed_rel=1e-3)
    return [_above("latitude_counter_control", np.max(np.abs(gr.residual)),
                   1e-2, "theta = pi/4 circle must fail the geodesic test")]


# ---------------------------------------------------------------------------
# criteria 7-8: case classification and Case-C proportionality


def check_case_classification():
    out = []

    h_sq = build_gho(GhoSpec(omega=1.0, lam=0.2, n_max=SQUEEZE_NMAX))
    bd = band_split(h_sq)
    labels = {case_classify(bd, n, 2).label for n in range(6, 40)}
    gaps = [case_classify(bd, n, 2).gap for n in range(6, 40)]
    ok = labels == {"C"} and max(gaps) == 0.0
    out.append(CheckResult("case_squeeze", float(max(gaps)), 0.0, ok, "<=",
                           "interior rows are Case C with an exactly zero gap"))

    h_jc = build_jc(JcSpec(omega0=1.5, omega=1.0, kappa=0.2, n_max=4))
    lab = case_classify(band_split(h_jc), 1, 1).label
    out.append(CheckResult("case_jc", 0.0 if lab == "B" else 1.0, 0.0,
                           lab == "B", "<=", f"sector block row gives {lab}"))

    h_zero = build_jc(JcSpec(omega0=1.5, omega=1.0, kappa=0.0, n_max=4))
    lab0 = case_classify(band_split(h_zero), 1, 1).label
    out.append(CheckResult("case_zero_coupling", 0.0 if lab0 == "A" else 1.0,
                           0.0, lab0 == "A", "<=",
                           f"uncoupled model gives {lab0}"))
    return out


def check_case_c_proportionality():
    traj = _squeeze_dense_traj()
    samples = [s for s in traj.samples if s.l <= 0.2]
    worst = 0.0
    for n in (0, 2):
        ratio = np.array([abs(s.h[n + 4, n + 2]) / abs(s.h[n + 2, n])
                          for s in samples])
        worst = max(worst, np.ptp(ratio) / ratio[0])
    return [_below("case_c_proportionality", worst, 1e-6,
                   "|C_{n+2}| / |C_n| constant along the squeeze flow "
                   "(low rows, inside the truncation horizon)")]


# ---------------------------------------------------------------------------
# criterion 9: degenerate fixed point


def check_degenerate_fixed_point():
    h0 = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
    traj = integrate_flow(h0, Wegner(), FlowConfig(l_max=1.0))
    eta0 = np.max(np.abs(wegner_generator(h0)))
    ok = traj.stop_reason == "stalled" and eta0 == 0.0
    return [CheckResult("degenerate_fixed_point", float(eta0), 0.0, ok, "<=",
                        f"stop_reason = {traj.stop_reason}; eta(0) = 0: the "
                        "flow cannot leave the degenerate-diagonal fixed point")]


# ---------------------------------------------------------------------------
# criterion 10: operator identities along the flow


def check_identities_spin():
    traj = _spin_dense_traj()
    fam = spin_family(0.5, 0.5)
    ct = coordinate_projection(traj, "spin", family=fam, s=0.5)
    etas = np.array([wegner_generator(s.h) for s in traj.samples[1:-1]])
    gc = generator_consistency(fam, ct.sliced(slice(1, -1)), etas)
    r14 = relation14_residual(fam, ct.sliced(slice(1, -1, 4)))
    return [
        _below("generator_consistency_spin", np.max(gc), 1e-5),
        _below("relation14_spin", np.max(r14), 1e-3),
    ]


def check_identities_squeeze():
    traj = _squeeze_dense_traj()
    fam = squeeze_family(0, SQUEEZE_NMAX)
    ct = coordinate_projection(traj, "squeeze", family=fam, residual_tol=1e-4)
    rows = np.arange(9)
    # the identity window: the truncation corruption front moving inward
    # from the Fock edge reaches the compared rows past l ~ 0.1
    l = ct.l
    last = int(np.searchsorted(l, 0.1))
    etas = np.array([wegner_generator(s.h) for s in traj.samples[1:last]])
    gc = generator_consistency(fam, ct.sliced(slice(1, last)), etas, rows=rows)
    ct14 = _trim(ct, ct.alpha[:, 0] >= 0.02).sliced(slice(0, -1, 4))
    r14 = relation14_residual(fam, ct14, rows=rows)
    return [
        _below("generator_consistency_squeeze", np.max(gc), 1e-5,
               "rows 0-8 inside the truncation horizon l <= 0.1"),
        _below("relation14_squeeze", np.max(r14), 1e-3, "rows 0-8"),
    ]


# ---------------------------------------------------------------------------

ALL_CHECKS = [
    check_isospectral,
    check_decay_identity,
    check_condition_truth_table,
    check_metric_factors,
    check_reduced_odes,
    check_phase_constancy,
    check_geodesic_spin,
    check_geodesic_squeeze,
    check_geodesic_jc_resonant,
    check_geodesic_jc_detuned,
    check_latitude_counter_control,
    check_case_classification,
    check_case_c_proportionality,
    check_degenerate_fixed_point,
    check_identities_spin,
    check_identities_squeeze,
]


def run_all(seed=0):
    """Run every named check; returns a flat list of CheckResult."""
    results = []
    for fn in ALL_CHECKS:
        if fn in (check_isospectral, check_decay_identity):
            results.extend(fn(seed))
        else:
            results.extend(fn())
    return results
