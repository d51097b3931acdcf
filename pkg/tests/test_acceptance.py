"""Acceptance gate: one test per numbered criterion.

The full verification battery runs once per session (a couple of
minutes); each test then audits its slice of the records and prints one
pass/fail line.  The resonant atom-field records in criterion 6 fail by
construction: at exact resonance every sector block is degenerate, the
generator vanishes identically, and the flow never leaves l = 0 (see
the geodesic-verdict records named *_jc_resonant and the project
notes); that criterion is reported honestly rather than worked around.
"""

import pytest

from wegnerflow import verification


@pytest.fixture(scope="session")
def records():
    return {r.name: r for r in verification.run_all(seed=0)}


def audit(capsys, number, title, records, names):
    recs = [records[n] for n in names]
    missing = [n for n in names if n not in records]
    assert not missing, f"missing records: {missing}"
    bad = [r.name for r in recs if not r.passed]
    ok = not bad
    with capsys.disabled():
        worst = max((r.max_residual / r.tolerance if r.tolerance else 0.0)
                    for r in recs)
        status = "PASS" if ok else "FAIL"
        print(f"CRITERION {number:2d} [{status}] {title} "
              f"(worst residual/tolerance = {worst:.2e})")
        for name in bad:
            r = records[name]
            print(f"    failed: {name} = {r.max_residual:.3e} "
                  f"(tolerance {r.tolerance:.1e}) {r.note}")
    assert ok, f"criterion {number} failed records: {bad}"


def test_criterion_01_isospectral(records, capsys):
    audit(capsys, 1, "isospectral flow on the seeded ensemble", records,
          ["isospectral_eigenvalues", "isospectral_trace_drift"])


def test_criterion_02_decay_identity(records, capsys):
    audit(capsys, 2, "off-diagonal decay identity", records,
          ["decay_identity"])


def test_criterion_03_condition_truth_table(records, capsys):
    audit(capsys, 3, "band-condition truth table", records,
          ["condition17_truth_table"])


def test_criterion_04_metric_factors(records, capsys):
    audit(capsys, 4, "closed-form metric factors", records,
          ["metric_displacement", "metric_squeeze", "metric_spin",
           "metric_jc"])


def test_criterion_05_reduced_odes(records, capsys):
    audit(capsys, 5, "reduced coefficient ODEs and phase constancy",
          records,
          ["reduced_ode_squeeze", "reduced_ode_spin",
           "phase_constancy_squeeze", "phase_constancy_spin",
           "phase_constancy_jc"])


def test_criterion_06_geodesic_verdicts(records, capsys):
    # The *_jc_resonant records cannot pass: the resonant flow is a
    # fixed point, so there is no trajectory to test.  They are kept
    # in the audit so the criterion reports its true status; the
    # detuned companion exercises the same pipeline and passes.
    names = []
    for tag in ("spin", "squeeze_base0", "squeeze_base1",
                "jc_resonant", "jc_detuned"):
        names += [f"geodesic_residual_{tag}",
                  f"variational_gradient_{tag}",
                  f"xi_residual_{tag}"]
    names.append("latitude_counter_control")
    audit(capsys, 6, "geodesic verdicts (resonant sector stalls; "
          "see notes)", records, names)


def test_criterion_07_case_classification(records, capsys):
    audit(capsys, 7, "case classification", records,
          ["case_squeeze", "case_jc", "case_zero_coupling"])


def test_criterion_08_case_c_proportionality(records, capsys):
    audit(capsys, 8, "Case-C coefficient proportionality", records,
          ["case_c_proportionality"])


def test_criterion_09_degenerate_fixed_point(records, capsys):
    audit(capsys, 9, "degenerate fixed point is reported stalled",
          records, ["degenerate_fixed_point"])


def test_criterion_10_numerical_identities(records, capsys):
    audit(capsys, 10, "generator consistency and curve identity",
          records,
          ["generator_consistency_spin", "generator_consistency_squeeze",
           "relation14_spin", "relation14_squeeze"])
