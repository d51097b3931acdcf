"""Generator construction and integration of the matrix flow dH/dl = [eta, H].

The generator is either the full double-bracket choice
eta = [H_d, H_od] ("wegner") or a single-band variant
eta^(a) = [H_d, H_od^(a)] targeting only the diagonals at offset +-a.
Along the flow trace(H) and trace(H^2) are conserved and the targeted
off-diagonal weight decays monotonically; both are recorded per sample.

When requested, the accumulated unitary U(l) with dU/dl = eta U,
U(0) = I is integrated jointly with H so that U H(0) U^dagger = H(l)
holds within one integrator error budget.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .operators import (
    WegnerFlowError,
    NoSuchBandError,
    DimMismatchError,
    band_norm_sq,
    band_part,
    band_split,
    commutator,
    hermitize,
    antihermitize,
    off_diag_norm_sq,
)

__all__ = [
    "Wegner",
    "Band",
    "FlowConfig",
    "FlowSample",
    "FlowTrajectory",
    "IntegratorFailureError",
    "UnitarityDriftError",
    "wegner_generator",
    "band_generator",
    "make_generator",
    "flow_rhs",
    "integrate_flow",
    "decay_identity_residual",
    "degenerate_block_report",
]

STALL_REL = 1e-14


class IntegratorFailureError(WegnerFlowError):
    pass


class UnitarityDriftError(WegnerFlowError):
    pass


@dataclass(frozen=True)
class Wegner:
    """Full generator [H_d, H_od]."""


@dataclass(frozen=True)
class Band:
    """Single-band generator [H_d, H_od^(a)] for off-diagonality ``index``."""

    index: int


def wegner_generator(h):
    """eta = [H_d, H_od]; exactly anti-Hermitian on return.

    Because H_d is diagonal the commutator is elementwise,
    eta[m, n] = (eps_m - eps_n) H[m, n], which avoids two dense
    matrix products per evaluation.
    """
    h = np.asarray(h, dtype=complex)
    eps = np.real(np.diag(h))
    return antihermitize((eps[:, None] - eps[None, :]) * h)


def band_generator(h, a):
    """eta^(a) = [H_d, H_od^(a)].  Raises NoSuchBandError if band a is
    absent (all coefficients below the pruning threshold)."""
    h = np.asarray(h, dtype=complex)
    bd = band_split(h)
    if a not in bd.bands:
        raise NoSuchBandError(f"band {a} not present in matrix")
    eps = np.real(np.diag(h))
    return antihermitize((eps[:, None] - eps[None, :]) * band_part(h, a))


def make_generator(choice):
    """Return eta(H) for a GeneratorChoice.  The band variant does not
    re-check band presence per call: it is zero once the band decays."""
    if isinstance(choice, Wegner):
        return wegner_generator

    def gen(h):
        eps = np.real(np.diag(h))
        return antihermitize((eps[:, None] - eps[None, :]) * band_part(h, choice.index))

    return gen


def flow_rhs(h, eta):
    """dH/dl = [eta, H], symmetrized back to Hermitian."""
    h = np.asarray(h)
    eta = np.asarray(eta)
    if h.shape != eta.shape:
        raise DimMismatchError(f"shape mismatch {h.shape} vs {eta.shape}")
    return hermitize(commutator(eta, h))


@dataclass
class FlowConfig:
    l_max: float = 50.0
    stop_offdiag: float = 1e-18
    integrator: str = "rk45"  # "rk45" | "dop853" | "rk4"
    step: float = 1e-2        # fixed-step rk4 only
    rtol: float = 1e-9
    atol: float = 1e-12
    max_step: float = np.inf
    sample_dl: float | None = None
    track_unitary: bool = False
    stall_rel: float = STALL_REL
    cluster_tol_rel: float = 1e-8

    def __post_init__(self):
        if self.l_max <= 0 or not np.isfinite(self.l_max):
            raise ValueError("l_max must be positive and finite")
        if self.stop_offdiag < 0:
            raise ValueError("stop_offdiag must be >= 0")
        if self.rtol <= 0 or self.atol <= 0 or self.step <= 0:
            raise ValueError("tolerances and step must be positive")


@dataclass
class FlowSample:
    l: float
    h: np.ndarray
    u: np.ndarray | None
    offdiag_sq: float
    eps_sq_sum: float
    trace_h: float
    trace_h2: float
    band_sq: dict = field(default_factory=dict)


@dataclass
class FlowTrajectory:
    samples: list
    stop_reason: str  # "converged" | "max_l" | "stalled" | "integrator_failure"
    choice: object
    block_report: dict | None = None

    @property
    def l(self):
        return np.array([s.l for s in self.samples])

    def matrices(self):
        return [s.h for s in self.samples]

    def unitaries(self):
        return [s.u for s in self.samples]


def _target_sq(h, choice):
    if isinstance(choice, Wegner):
        return off_diag_norm_sq(h)
    return band_norm_sq(h, choice.index)


def _make_sample(l, h, u, choice):
    eps = np.real(np.diag(h))
    bd = band_split(h)
    return FlowSample(
        l=float(l),
        h=h,
        u=u,
        offdiag_sq=off_diag_norm_sq(h),
        eps_sq_sum=float(np.sum(eps**2)),
        trace_h=float(np.real(np.trace(h))),
        trace_h2=float(np.real(np.trace(h @ h))),
        band_sq={a: 2.0 * float(np.sum(np.abs(c) ** 2)) for a, c in bd.bands.items()},
    )


def integrate_flow(h0, choice, cfg: FlowConfig):
    """Integrate the flow equation for H (and optionally U) over l.

    Stops with reason "converged" when the targeted off-diagonal
    norm^2 (all bands for Wegner, band a only for Band(a)) drops below
    cfg.stop_offdiag; "stalled" when ||eta||_F < stall_rel * ||H||_F
    while the target is still above threshold (fixed point, e.g. a
    degenerate diagonal); "max_l" at cfg.l_max.
    """
    h0 = hermitize(np.asarray(h0, dtype=complex))
    d = h0.shape[0]
    if isinstance(choice, Band):
        bd0 = band_split(h0)
        if choice.index not in bd0.bands:
            raise NoSuchBandError(f"band {choice.index} absent at l = 0")
    gen = make_generator(choice)
    h_norm0 = max(np.linalg.norm(h0), 1e-300)

    u0 = np.eye(d, dtype=complex) if cfg.track_unitary else None

    # Trivial endpoints: already converged or an exact fixed point.
    if _target_sq(h0, choice) <= cfg.stop_offdiag:
        return FlowTrajectory(
            samples=[_make_sample(0.0, h0, u0, choice)],
            stop_reason="converged",
            choice=choice,
            block_report=degenerate_block_report(h0, cfg.cluster_tol_rel),
        )
    if np.linalg.norm(gen(h0)) < cfg.stall_rel * h_norm0:
        return FlowTrajectory(
            samples=[_make_sample(0.0, h0, u0, choice)],
            stop_reason="stalled",
            choice=choice,
            block_report=degenerate_block_report(h0, cfg.cluster_tol_rel),
        )

    n = d * d

    def pack(h, u=None):
        parts = [h.real.ravel(), h.imag.ravel()]
        if u is not None:
            parts += [u.real.ravel(), u.imag.ravel()]
        return np.concatenate(parts)

    def unpack(y):
        h = (y[:n] + 1j * y[n:2 * n]).reshape(d, d)
        u = None
        if cfg.track_unitary:
            u = (y[2 * n:3 * n] + 1j * y[3 * n:4 * n]).reshape(d, d)
        return h, u

    def rhs(_l, y):
        h, u = unpack(y)
        h = hermitize(h)
        eta = gen(h)
        dh = flow_rhs(h, eta)
        if u is None:
            return pack(dh)
        return pack(dh, eta @ u)

    def ev_converged(_l, y):
        h, _ = unpack(y)
        return _target_sq(h, choice) - cfg.stop_offdiag

    def ev_stalled(_l, y):
        h, _ = unpack(y)
        return np.linalg.norm(gen(h)) - cfg.stall_rel * np.linalg.norm(h)

    ev_converged.terminal = True
    ev_converged.direction = -1
    ev_stalled.terminal = True
    ev_stalled.direction = -1

    y0 = pack(h0, u0)

    if cfg.integrator == "rk4":
        ls, ys, reason = _fixed_rk4(rhs, y0, cfg, ev_converged, ev_stalled)
    else:
        method = "DOP853" if cfg.integrator == "dop853" else "RK45"
        sol = solve_ivp(
            rhs, (0.0, cfg.l_max), y0,
            method=method, rtol=cfg.rtol, atol=cfg.atol,
            max_step=cfg.max_step, dense_output=True,
            events=[ev_converged, ev_stalled],
        )
        if sol.status == -1:
            l_end = sol.t[-1]
            reason = "integrator_failure"
        elif sol.status == 1:
            l_end = sol.t[-1]
            reason = "converged" if len(sol.t_events[0]) else "stalled"
        else:
            l_end = cfg.l_max
            reason = "max_l"
        sample_dl = cfg.sample_dl or max(l_end, 1e-12) / 200.0
        ls = np.arange(0.0, l_end, sample_dl)
        if len(ls) == 0 or l_end - ls[-1] > 1e-12 * max(1.0, l_end):
            ls = np.append(ls, l_end)
        ys = sol.sol(ls).T

    samples = []
    for l, y in zip(ls, ys):
        h, u = unpack(np.asarray(y))
        samples.append(_make_sample(l, hermitize(h), u, choice))

    if cfg.track_unitary:
        drift = max(
            np.max(np.abs(s.u.conj().T @ s.u - np.eye(d))) for s in samples
        )
        if drift > 1e-6:
            raise UnitarityDriftError(
                f"max ||U^dagger U - I|| = {drift:.3e} > 1e-6; reduce the step "
                "or tighten integrator tolerances"
            )

    report = None
    if reason in ("converged", "max_l"):
        report = degenerate_block_report(samples[-1].h, cfg.cluster_tol_rel)
    return FlowTrajectory(samples=samples, stop_reason=reason, choice=choice,
                          block_report=report)


def _fixed_rk4(rhs, y0, cfg, ev_converged, ev_stalled):
    h = cfg.step
    sample_dl = cfg.sample_dl or max(cfg.l_max / 200.0, h)
    record_every = max(1, int(round(sample_dl / h)))
    l, y = 0.0, y0
    ls, ys = [0.0], [y0]
    reason = "max_l"
    i = 0
    while l < cfg.l_max - 1e-15:
        step = min(h, cfg.l_max - l)
        k1 = rhs(l, y)
        k2 = rhs(l + step / 2, y + step / 2 * k1)
        k3 = rhs(l + step / 2, y + step / 2 * k2)
        k4 = rhs(l + step, y + step * k3)
        y = y + step / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        l += step
        i += 1
        done = ev_converged(l, y) <= 0
        stalled = not done and ev_stalled(l, y) <= 0
        if i % record_every == 0 or done or stalled or l >= cfg.l_max - 1e-15:
            ls.append(l)
            ys.append(y)
        if done:
            reason = "converged"
            break
        if stalled:
            reason = "stalled"
            break
    return np.array(ls), np.array(ys), reason


def degenerate_block_report(h, cluster_tol_rel=1e-8):
    """Group basis states into near-degenerate diagonal clusters and
    report residual off-diagonal weight inside and between clusters.

    Clusters are maximal chains of diagonal entries whose sorted gaps
    are below cluster_tol_rel * ||H||_F; residual weight inside a
    cluster is the part the flow cannot remove (block-diagonalization
    rather than full diagonalization).
    """
    h = np.asarray(h, dtype=complex)
    eps = np.real(np.diag(h))
    tol = cluster_tol_rel * max(np.linalg.norm(h), 1e-300)
    order = np.argsort(eps)
    clusters = [[int(order[0])]]
    for prev, cur in zip(order[:-1], order[1:]):
        if eps[cur] - eps[prev] < tol:
            clusters[-1].append(int(cur))
        else:
            clusters.append([int(cur)])
    label = np.empty(len(eps), dtype=int)
    for ci, idxs in enumerate(clusters):
        for i in idxs:
            label[i] = ci
    same = label[:, None] == label[None, :]
    off = np.abs(h) ** 2
    np.fill_diagonal(off, 0.0)
    intra = float(np.sum(off[same]))
    inter = float(np.sum(off[~same]))
    return {
        "clusters": clusters,
        "intra_cluster_offdiag_sq": intra,
        "inter_cluster_offdiag_sq": inter,
    }


def _central_d1(l, f):
    """First derivative of f(l) at interior nodes by 3-point central
    differences on a possibly non-uniform grid."""
    l = np.asarray(l, dtype=float)
    f = np.asarray(f)
    shape = (-1,) + (1,) * (f.ndim - 1)
    h1 = (l[1:-1] - l[:-2]).reshape(shape)
    h2 = (l[2:] - l[1:-1]).reshape(shape)
    return (h1**2 * f[2:] - h2**2 * f[:-2] - (h1**2 - h2**2) * f[1:-1]) / (
        h1 * h2 * (h1 + h2)
    )


def decay_identity_residual(traj: FlowTrajectory, choice=None):
    """Residuals of the off-diagonal decay identity along a trajectory.

    For a single-band flow (band off-diagonality a) the identity reads

        d/dl sum_{m != n} |H_mn|^2 = -4 sum_n (eps_{n+a} - eps_n)^2 |C_{n+a}|^2

    and, by conservation of trace(H^2), equals -d/dl sum_n eps_n^2.

    Returns (l_interior, band_residual, trace_residual), with numeric
    l-derivatives taken by central differences at interior samples.
    """
    if choice is None:
        choice = traj.choice
    if len(traj.samples) < 3:
        raise WegnerFlowError("need at least 3 samples for central differences")
    if isinstance(choice, Band):
        a = choice.index
    else:
        bands = band_split(traj.samples[0].h).band_indices()
        if len(bands) != 1:
            raise WegnerFlowError(
                "decay identity requires Band(a) or a single-band matrix; "
                f"found bands {bands}"
            )
        a = bands[0]

    l = traj.l
    offd = np.array([s.offdiag_sq for s in traj.samples])
    epsq = np.array([s.eps_sq_sum for s in traj.samples])

    d_offd = _central_d1(l, offd)
    d_epsq = _central_d1(l, epsq)

    rhs = []
    for s in traj.samples[1:-1]:
        eps = np.real(np.diag(s.h))
        c = np.diagonal(s.h, offset=-a)
        rhs.append(-4.0 * float(np.sum((eps[a:] - eps[:-a]) ** 2 * np.abs(c) ** 2)))
    rhs = np.array(rhs)

    band_residual = np.abs(d_offd - rhs)
    trace_residual = np.abs(d_offd + d_epsq)
    return l[1:-1], band_residual, trace_residual
