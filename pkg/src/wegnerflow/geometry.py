"""Fubini-Study geometry on parametrized unitary families.

A family is a smooth map alpha -> U(alpha) together with a fixed base
state |psi>; the induced state is |psi(alpha)> = U(alpha)^dagger |psi>
and the metric on the coordinate patch is

    ds^2 = 1 - |<psi(alpha)|psi(alpha + dalpha)>|^2
         = [-(1/2)<{G_i, G_j}> + <G_i><G_j>] dalpha^i dalpha^j,

with G_i = (d_i U) U^dagger anti-Hermitian.  Both routes are computed
numerically and cross-checked.  On top of the metric sit Christoffel
symbols, geodesic and variational residuals for sampled coordinate
curves, and the algebraic checks tied to the band structure of the
flowing Hamiltonian: the no-resonance condition on band indices, the
A/B/C classification of the targeted coefficients, and the sandwiched
single-coefficient flow equations.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .operators import (
    WegnerFlowError,
    NoSuchBandError,
    DimMismatchError,
    BandDecomposition,
    band_split,
)

__all__ = [
    "NonUnitaryFamilyError",
    "RouteMismatchError",
    "DegenerateMetricError",
    "StationaryCurveError",
    "TooFewSamplesError",
    "ConditionViolatedError",
    "ParametrizedFamily",
    "MetricSample",
    "CoordinateTrajectory",
    "CaseLabel",
    "condition17",
    "condition17_offenders",
    "family_generators",
    "fs_metric",
    "christoffel",
    "arc_length",
    "geodesic_residual",
    "GeodesicResidual",
    "variational_gradient",
    "xi_residual",
    "XiResidual",
    "generator_consistency",
    "relation14_residual",
    "case_classify",
    "sandwiched_ode_residual",
    "SandwichedResiduals",
]


class NonUnitaryFamilyError(WegnerFlowError):
    pass


class RouteMismatchError(WegnerFlowError):
    pass


class DegenerateMetricError(WegnerFlowError):
    pass


class StationaryCurveError(WegnerFlowError):
    pass


class TooFewSamplesError(WegnerFlowError):
    pass


class ConditionViolatedError(WegnerFlowError):
    pass


@dataclass
class ParametrizedFamily:
    """Map alpha -> U(alpha) with named coordinates and a base state.

    ``domain`` optionally gives (lo, hi) per coordinate; residual
    evaluators drop curve samples whose finite-difference stencils
    would leave it.  Unitary evaluations are memoized.
    """

    coord_names: tuple
    unitary_at: callable
    base_state: np.ndarray
    fd_step: float = 1e-4
    domain: tuple | None = None
    unitarity_tol: float = 1e-10
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.coord_names = tuple(self.coord_names)
        self.base_state = np.asarray(self.base_state, dtype=complex)
        nrm = np.linalg.norm(self.base_state)
        if abs(nrm - 1.0) > 1e-12:
            raise ValueError(f"base state norm {nrm} deviates from 1 by > 1e-12")

    @property
    def k(self):
        return len(self.coord_names)

    @property
    def dim(self):
        return len(self.base_state)

    def steps(self):
        return np.broadcast_to(np.asarray(self.fd_step, float), (self.k,)).copy()

    def unitary(self, alpha):
        alpha = np.asarray(alpha, dtype=float)
        key = alpha.tobytes()
        u = self._cache.get(key)
        if u is None:
            u = np.asarray(self.unitary_at(alpha), dtype=complex)
            dev = np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0])))
            if dev > self.unitarity_tol:
                raise NonUnitaryFamilyError(
                    f"||U^dagger U - I||_max = {dev:.3e} at alpha = {alpha}"
                )
            if len(self._cache) > 8192:
                self._cache.clear()
            self._cache[key] = u
        return u


@dataclass
class MetricSample:
    alpha: np.ndarray
    g: np.ndarray
    christoffel: np.ndarray | None = None


@dataclass
class CoordinateTrajectory:
    """Sampled coordinate curve (l, alpha(l), alpha_dot(l))."""

    l: np.ndarray
    alpha: np.ndarray      # (n, k)
    alpha_dot: np.ndarray  # (n, k)

    def __len__(self):
        return len(self.l)

    @classmethod
    def from_alpha(cls, l, alpha):
        """Build a trajectory from sampled coordinates, filling
        alpha_dot by finite differences (central at interior nodes)."""
        l = np.asarray(l, dtype=float)
        alpha = np.asarray(alpha, dtype=float)
        dot = np.gradient(alpha, l, axis=0)
        dot[1:-1] = _d1_nonuniform(l, alpha)
        return cls(l=l, alpha=alpha, alpha_dot=dot)

    def sliced(self, sl):
        return CoordinateTrajectory(self.l[sl], self.alpha[sl], self.alpha_dot[sl])


def _d1_nonuniform(x, f):
    """3-point central first derivative at interior nodes, non-uniform grid."""
    x = np.asarray(x, float)
    f = np.asarray(f)
    shape = (-1,) + (1,) * (f.ndim - 1)
    h1 = (x[1:-1] - x[:-2]).reshape(shape)
    h2 = (x[2:] - x[1:-1]).reshape(shape)
    return (h1**2 * f[2:] - h2**2 * f[:-2] - (h1**2 - h2**2) * f[1:-1]) / (
        h1 * h2 * (h1 + h2)
    )


def _d2_nonuniform(x, f):
    """3-point second derivative at interior nodes, non-uniform grid."""
    x = np.asarray(x, float)
    f = np.asarray(f)
    shape = (-1,) + (1,) * (f.ndim - 1)
    h1 = (x[1:-1] - x[:-2]).reshape(shape)
    h2 = (x[2:] - x[1:-1]).reshape(shape)
    return 2.0 * (h1 * f[2:] + h2 * f[:-2] - (h1 + h2) * f[1:-1]) / (
        h1 * h2 * (h1 + h2)
    )


# ---------------------------------------------------------------------------
# band-index condition and case classification


def condition17(bands, a):
    """True iff no band index equals 2a or 3a.

    ``bands`` is the set of off-diagonality indices present; ``a`` must
    be one of them.  The quantifier runs over all present bands (the
    universal reading: any band at 2a or 3a spoils the cancellation).
    """
    bands = set(int(b) for b in bands)
    a = int(a)
    if a not in bands:
        raise NoSuchBandError(f"index {a} not among bands {sorted(bands)}")
    return not condition17_offenders(bands, a)


def condition17_offenders(bands, a):
    """List of (offending index, multiple) pairs, empty when condition holds."""
    bands = set(int(b) for b in bands)
    a = int(a)
    out = []
    for mult in (2, 3):
        if mult * a in bands:
            out.append((mult * a, mult))
    return out


@dataclass
class CaseLabel:
    label: str  # "A" | "B" | "C"
    gap: float  # |eps_{n+a} + eps_{n-a} - 2 eps_n|, NaN if out of range


def case_classify(bd: BandDecomposition, n, a, zero_rel=1e-12, gap_rel=1e-10):
    """Classify the targeted coefficients C_n, C_{n+a} at basis state n.

    A: both numerically zero; B: exactly one zero; C: both nonzero
    (the flow then requires the spectral gap eps_{n+a} + eps_{n-a}
    - 2 eps_n to vanish, which is reported alongside).  A band absent
    from the decomposition counts as all-zero coefficients.

    ``n`` is the 0-based storage index of the basis state.
    """
    if not 1 <= a < bd.dim:
        raise NoSuchBandError(f"band index {a} out of range for dim {bd.dim}")
    norm = max(bd.frobenius_norm(), 1e-300)
    c_low = bd.coeff(a, n)          # <u_n|H|u_{n-a}>
    c_up = bd.coeff(a, n + a)       # <u_{n+a}|H|u_n>
    z_low = abs(c_low) <= zero_rel * norm
    z_up = abs(c_up) <= zero_rel * norm
    if 0 <= n - a and n + a < bd.dim:
        gap = abs(bd.eps[n + a] + bd.eps[n - a] - 2.0 * bd.eps[n])
        if gap <= gap_rel * norm:
            gap = 0.0
    else:
        gap = float("nan")
    if z_low and z_up:
        label = "A"
    elif z_low or z_up:
        label = "B"
    else:
        label = "C"
    return CaseLabel(label=label, gap=gap)


@dataclass
class SandwichedResiduals:
    l: np.ndarray
    residual_lower: np.ndarray   # |dC_n/dl + (eps_n - eps_{n-a})^2 C_n|
    residual_upper: np.ndarray   # |dC_{n+a}/dl + (eps_{n+a} - eps_n)^2 C_{n+a}|
    phase_drift_lower: float
    phase_drift_upper: float


def _wrap_angle(x):
    return (x + np.pi) % (2.0 * np.pi) - np.pi


def sandwiched_ode_residual(flow_traj, n, a, zero_rel=1e-12):
    """Check the closed single-coefficient flow equations along a
    trajectory generated by Band(a) or single-band Wegner flow.

    Valid only when the band-index condition holds for a (no band at
    2a or 3a); otherwise the closed equations are not claimed and
    ConditionViolatedError is raised.
    """
    samples = flow_traj.samples
    if len(samples) < 3:
        raise TooFewSamplesError("need at least 3 samples")
    bands0 = band_split(samples[0].h).band_indices()
    if a not in bands0:
        raise NoSuchBandError(f"band {a} absent at l = 0")
    if condition17_offenders(bands0, a):
        raise ConditionViolatedError(
            f"bands {bands0} contain a multiple 2x/3x of {a}; the sandwiched "
            "equations are not guaranteed"
        )
    l = np.array([s.l for s in samples])
    d = samples[0].h.shape[0]
    norm = max(np.linalg.norm(samples[0].h), 1e-300)

    c_low = np.array([s.h[n, n - a] if n - a >= 0 else 0.0 for s in samples])
    c_up = np.array([s.h[n + a, n] if n + a < d else 0.0 for s in samples])
    eps = np.array([np.real(np.diag(s.h)) for s in samples])

    dc_low = _d1_nonuniform(l, c_low)
    dc_up = _d1_nonuniform(l, c_up)

    gap_low = np.zeros(len(samples))
    gap_up = np.zeros(len(samples))
    if n - a >= 0:
        gap_low = eps[:, n] - eps[:, n - a]
    if n + a < d:
        gap_up = eps[:, n + a] - eps[:, n]

    res_low = np.abs(dc_low + gap_low[1:-1] ** 2 * c_low[1:-1])
    res_up = np.abs(dc_up + gap_up[1:-1] ** 2 * c_up[1:-1])

    def drift(c):
        live = np.abs(c) > zero_rel * norm
        if not live.any() or not live[0]:
            return 0.0
        return float(np.max(np.abs(_wrap_angle(np.angle(c[live]) - np.angle(c[0])))))

    return SandwichedResiduals(
        l=l[1:-1],
        residual_lower=res_low,
        residual_upper=res_up,
        phase_drift_lower=drift(c_low),
        phase_drift_upper=drift(c_up),
    )


# ---------------------------------------------------------------------------
# metric, Christoffel symbols


def family_generators(family: ParametrizedFamily, alpha):
    """G_i(alpha) = (d_i U) U^dagger by central differences, one per coordinate."""
    alpha = np.asarray(alpha, dtype=float)
    u0 = family.unitary(alpha)
    steps = family.steps()
    gs = []
    for i in range(family.k):
        e = np.zeros(family.k)
        e[i] = steps[i]
        du = (family.unitary(alpha + e) - family.unitary(alpha - e)) / (2 * steps[i])
        g = du @ u0.conj().T
        gs.append(0.5 * (g - g.conj().T))
    return gs


def fs_metric(family: ParametrizedFamily, alpha, check_routes=True, route_tol=1e-5):
    """Metric tensor at alpha, generator route, cross-checked against the
    overlap route when check_routes is set.

    Raises RouteMismatchError if the two routes disagree beyond
    route_tol relative to the largest metric component.
    """
    alpha = np.asarray(alpha, dtype=float)
    k = family.k
    psi = family.base_state
    steps = family.steps()

    gs = family_generators(family, alpha)
    ev = np.array([psi.conj() @ (g @ psi) for g in gs])
    g_gen = np.empty((k, k))
    for i in range(k):
        for j in range(i, k):
            anti = psi.conj() @ (gs[i] @ (gs[j] @ psi) + gs[j] @ (gs[i] @ psi))
            val = np.real(-0.5 * anti + ev[i] * ev[j])
            g_gen[i, j] = g_gen[j, i] = val

    if check_routes:
        u0 = family.unitary(alpha)
        psi0 = u0.conj().T @ psi

        def defect(delta):
            u = family.unitary(alpha + delta)
            ov = psi0.conj() @ (u.conj().T @ psi)
            return 1.0 - abs(ov) ** 2

        def sym_defect(vec):
            delta = steps * vec
            return 0.5 * (defect(delta) + defect(-delta))

        g_ov = np.empty((k, k))
        eye = np.eye(k)
        for i in range(k):
            g_ov[i, i] = sym_defect(eye[i]) / steps[i] ** 2
        for i in range(k):
            for j in range(i + 1, k):
                f = sym_defect(eye[i] + eye[j])
                g_ov[i, j] = g_ov[j, i] = (
                    f - g_ov[i, i] * steps[i] ** 2 - g_ov[j, j] * steps[j] ** 2
                ) / (2 * steps[i] * steps[j])
        scale = np.max(np.abs(g_gen))
        if scale > 1e-12:
            rel = np.max(np.abs(g_gen - g_ov)) / scale
            if rel > route_tol:
                raise RouteMismatchError(
                    f"overlap and generator metric routes disagree: rel = {rel:.3e}"
                )

    w = np.linalg.eigvalsh(g_gen)
    if w[0] < -1e-10 * max(1.0, w[-1]):
        raise WegnerFlowError(
            f"metric not positive semi-definite: min eigenvalue {w[0]:.3e}"
        )
    return MetricSample(alpha=alpha, g=g_gen)


def christoffel(family, alpha, step=1e-3, pinv_cutoff=None, check_routes=False):
    """Gamma^h_ij at alpha by central differences of the metric.

    With pinv_cutoff set, raising uses the pseudo-inverse so that
    families with a degenerate direction (a coordinate the base state
    is blind to) can still be handled; otherwise a metric with minimum
    eigenvalue below 1e-10 raises DegenerateMetricError.
    """
    alpha = np.asarray(alpha, dtype=float)
    k = family.k
    g0 = fs_metric(family, alpha, check_routes=check_routes).g
    dg = np.empty((k, k, k))
    for h in range(k):
        e = np.zeros(k)
        e[h] = step
        gp = fs_metric(family, alpha + e, check_routes=check_routes).g
        gm = fs_metric(family, alpha - e, check_routes=check_routes).g
        dg[h] = (gp - gm) / (2 * step)

    lower = np.empty((k, k, k))
    for h in range(k):
        for i in range(k):
            for j in range(k):
                lower[h, i, j] = 0.5 * (dg[i][h, j] + dg[j][i, h] - dg[h][i, j])

    if pinv_cutoff is None:
        w = np.linalg.eigvalsh(g0)
        if w[0] <= 1e-10:
            raise DegenerateMetricError(
                f"metric min eigenvalue {w[0]:.3e} <= 1e-10 at alpha = {alpha}"
            )
        ginv = np.linalg.inv(g0)
    else:
        ginv = np.linalg.pinv(g0, rcond=pinv_cutoff, hermitian=True)
    return np.einsum("hl,lij->hij", ginv, lower)


# ---------------------------------------------------------------------------
# curve functionals


def _domain_mask(family, alpha, margin_scale):
    """Samples whose stencils (margin_scale per coordinate) stay in domain."""
    n = alpha.shape[0]
    mask = np.ones(n, dtype=bool)
    if family.domain is None:
        return mask
    for i, (lo, hi) in enumerate(family.domain):
        m = margin_scale[i]
        if np.isfinite(lo):
            mask &= alpha[:, i] > lo + m
        if np.isfinite(hi):
            mask &= alpha[:, i] < hi - m
    return mask


def _largest_true_run(mask):
    best = (0, 0)
    start = None
    for i, v in enumerate(np.append(mask, False)):
        if v and start is None:
            start = i
        elif not v and start is not None:
            if i - start > best[1] - best[0]:
                best = (start, i)
            start = None
    return slice(*best)


def arc_length(traj: CoordinateTrajectory, family):
    """Total length integral L dl with L = sqrt(g_ij adot^i adot^j),
    plus the cumulative profile.  Composite trapezoid in l."""
    speeds = np.empty(len(traj))
    for m in range(len(traj)):
        g = fs_metric(family, traj.alpha[m], check_routes=False).g
        speeds[m] = np.sqrt(max(traj.alpha_dot[m] @ g @ traj.alpha_dot[m], 0.0))
    cum = cumulative_trapezoid(speeds, traj.l, initial=0.0)
    return float(cum[-1]), cum


@dataclass
class GeodesicResidual:
    indices: np.ndarray   # indices into the input trajectory (interior nodes)
    s: np.ndarray         # arc-length parameter at those nodes
    residual: np.ndarray  # (m, k): d2a/ds2 + Gamma a' a'


def geodesic_residual(traj: CoordinateTrajectory, family,
                      christoffel_step=1e-3, pinv_cutoff=None,
                      speed_rel=1e-10):
    """Geodesic-equation residual along a sampled curve, in the
    arc-length parametrization.

    With s the arc length, the residual d2a/ds2 + Gamma a' a' is
    evaluated through the unit tangent t = alpha_dot / (ds/dl):

        residual = (dt/dl) / (ds/dl) + Gamma t t,

    which avoids differencing the cumulative arc length twice and stays
    well conditioned where the curve slows down.  Samples too close to
    the domain boundary or essentially stationary (ds/dl below
    speed_rel * max) are dropped before differencing.
    """
    if len(traj) < 5:
        raise TooFewSamplesError("need at least 5 samples")
    steps = family.steps()
    margin = 2.0 * christoffel_step + 4.0 * steps
    mask = _domain_mask(family, traj.alpha, margin)

    speeds = np.full(len(traj), np.nan)
    for m in np.nonzero(mask)[0]:
        g = fs_metric(family, traj.alpha[m], check_routes=False).g
        speeds[m] = np.sqrt(max(traj.alpha_dot[m] @ g @ traj.alpha_dot[m], 0.0))
    vmax = np.nanmax(speeds)
    if not np.isfinite(vmax) or vmax <= 0:
        raise StationaryCurveError("curve has no usable moving samples")
    mask &= np.nan_to_num(speeds) >= speed_rel * vmax

    run = _largest_true_run(mask)
    idx = np.arange(len(traj))[run]
    if len(idx) < 5:
        raise StationaryCurveError(
            "fewer than 5 usable samples after dropping boundary/stationary points"
        )
    l = traj.l[run]
    alpha = traj.alpha[run]
    speed = speeds[run]
    s = cumulative_trapezoid(speed, l, initial=0.0)

    tangent = traj.alpha_dot[run] / speed[:, None]
    dt_dl = _d1_nonuniform(l, tangent)

    res = np.empty((len(idx) - 2, family.k))
    for m in range(len(idx) - 2):
        gamma = christoffel(family, alpha[m + 1], step=christoffel_step,
                            pinv_cutoff=pinv_cutoff)
        t = tangent[m + 1]
        res[m] = dt_dl[m] / speed[m + 1] + np.einsum("hij,i,j->h", gamma, t, t)
    return GeodesicResidual(indices=idx[1:-1], s=s[1:-1], residual=res)


def variational_gradient(traj: CoordinateTrajectory, family, h_var=1e-5,
                         seg_rel=1e-3):
    """Gradient of the discretized length functional with respect to the
    interior node coordinates (endpoints fixed).

    Segment lengths use the metric at the segment midpoint; the
    gradient is a central difference over +-h_var per node coordinate.
    Vanishes to discretization order exactly on geodesics.

    Nodes adjacent to a segment shorter than seg_rel times the longest
    segment are skipped (gradient row set to zero): where the curve has
    stalled the nodes nearly coincide and the polyline gradient is
    dominated by the node spacing, not by the geometry.
    """
    n = len(traj)
    if n < 7:
        raise TooFewSamplesError("need at least 7 samples")
    alpha = traj.alpha
    k = family.k

    def seg(p, q):
        g = fs_metric(family, 0.5 * (p + q), check_routes=False).g
        d = q - p
        return np.sqrt(max(d @ g @ d, 0.0))

    base = np.array([seg(alpha[j], alpha[j + 1]) for j in range(n - 1)])
    if np.max(base) <= 0:
        raise StationaryCurveError("all segments have zero length")

    floor = seg_rel * np.max(base)
    # the +-h_var stencil is only meaningful well inside a segment
    gap = np.max(np.abs(np.diff(alpha, axis=0)), axis=1)
    grad = np.zeros((n - 2, k))
    for j in range(1, n - 1):
        if base[j - 1] < floor or base[j] < floor:
            continue
        if gap[j - 1] < 10.0 * h_var or gap[j] < 10.0 * h_var:
            continue
        for i in range(k):
            e = np.zeros(k)
            e[i] = h_var
            plus = seg(alpha[j - 1], alpha[j] + e) + seg(alpha[j] + e, alpha[j + 1])
            minus = seg(alpha[j - 1], alpha[j] - e) + seg(alpha[j] - e, alpha[j + 1])
            grad[j - 1, i] = (plus - minus) / (2 * h_var)
    return grad


# ---------------------------------------------------------------------------
# flow-side identities


def _eta_along(family, traj):
    """eta(l) = G_i(alpha(l)) alpha_dot^i and the generators, per sample."""
    etas = []
    gens = []
    for m in range(len(traj)):
        gs = family_generators(family, traj.alpha[m])
        gens.append(gs)
        eta = sum(traj.alpha_dot[m][i] * gs[i] for i in range(family.k))
        etas.append(eta)
    return np.array(etas), gens


@dataclass
class XiResidual:
    l: np.ndarray
    x: np.ndarray      # (m, k) value of the variational obstruction
    scale: np.ndarray  # (m, k) magnitude of the terms before cancellation


def xi_residual(family, traj: CoordinateTrajectory):
    """Numerical evaluation of the variational obstruction for the base
    state: each component must vanish when the flow curve extremizes
    arc length.

        X_i = 2 <eta^2> <{deta/dl, G_i}> - <d(eta^2)/dl> <G_i eta + eta G_i>

    with all expectations in the family base state and the l
    derivatives taken by central differences along the trajectory.
    The returned scale is the sum of the magnitudes of the two terms,
    the natural yardstick for "numerically zero".
    """
    if len(traj) < 3:
        raise TooFewSamplesError("need at least 3 samples")
    psi = family.base_state
    etas, gens = _eta_along(family, traj)
    eta2 = np.einsum("mij,mjk->mik", etas, etas)

    deta = _d1_nonuniform(traj.l, etas)
    deta2 = _d1_nonuniform(traj.l, eta2)

    def ex(op):
        return np.real(psi.conj() @ (op @ psi))

    m_int = len(traj) - 2
    x = np.empty((m_int, family.k))
    scale = np.empty((m_int, family.k))
    for m in range(m_int):
        e2 = ex(eta2[m + 1])
        de2 = ex(deta2[m])
        for i in range(family.k):
            gi = gens[m + 1][i]
            anti_d = ex(deta[m] @ gi + gi @ deta[m])
            anti_e = ex(gi @ etas[m + 1] + etas[m + 1] @ gi)
            t1 = 2.0 * e2 * anti_d
            t2 = de2 * anti_e
            x[m, i] = t1 - t2
            scale[m, i] = abs(t1) + abs(t2)
    return XiResidual(l=traj.l[1:-1], x=x, scale=scale)


def generator_consistency(family, traj: CoordinateTrajectory, eta_flow, rows=None):
    """Max-norm mismatch per sample between G_i alpha_dot^i and the
    generator the flow engine actually used.

    ``eta_flow`` is a sequence of matrices in the family's space, one
    per trajectory sample.  ``rows`` optionally restricts the norm to a
    subset of basis rows/columns (e.g. away from a truncation edge).
    """
    if len(eta_flow) != len(traj):
        raise DimMismatchError(
            f"{len(eta_flow)} generator samples vs {len(traj)} trajectory samples"
        )
    etas, _ = _eta_along(family, traj)
    out = np.empty(len(traj))
    for m in range(len(traj)):
        diff = etas[m] - np.asarray(eta_flow[m])
        if rows is not None:
            diff = diff[np.ix_(rows, rows)]
        out[m] = np.max(np.abs(diff))
    return out


def relation14_residual(family, traj: CoordinateTrajectory, h_alpha=None,
                        rows=None):
    """Residual of the operator identity relating the l-derivative of
    G_i to the alpha-derivative of eta and the commutator [eta, G_i]:

        d/dl G_i(alpha(l)) = d eta / d alpha^i + [eta, G_i].

    All three terms are formed by central finite differences; returns
    the max-norm per interior sample and coordinate, shape (m, k).
    ``rows`` optionally restricts the norm to a basis-row subset.
    """
    if len(traj) < 5:
        raise TooFewSamplesError("need at least 5 samples")
    if h_alpha is None:
        h_alpha = family.steps()
    else:
        h_alpha = np.broadcast_to(np.asarray(h_alpha, float), (family.k,))
    etas, gens = _eta_along(family, traj)
    g_arr = np.array([[g for g in gs] for gs in gens])  # (n, k, d, d)
    dg = _d1_nonuniform(traj.l, g_arr)                  # (n-2, k, d, d)

    m_int = len(traj) - 2
    res = np.empty((m_int, family.k))
    for m in range(m_int):
        alpha = traj.alpha[m + 1]
        adot = traj.alpha_dot[m + 1]
        eta = etas[m + 1]
        for i in range(family.k):
            e = np.zeros(family.k)
            e[i] = h_alpha[i]
            gp = family_generators(family, alpha + e)
            gm = family_generators(family, alpha - e)
            deta_dai = sum(
                adot[j] * (gp[j] - gm[j]) / (2 * h_alpha[i])
                for j in range(family.k)
            )
            gi = gens[m + 1][i]
            comm = eta @ gi - gi @ eta
            diff = dg[m, i] - deta_dai - comm
            if rows is not None:
                diff = diff[np.ix_(rows, rows)]
            res[m, i] = np.max(np.abs(diff))
    return res
