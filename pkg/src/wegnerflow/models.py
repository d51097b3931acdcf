"""Three physical systems: Hamiltonian builders, unitary families,
reduced coefficient flows, and coordinate projection of tracked
unitaries.

Conventions:
  * harmonic oscillator truncated at Fock level n_max (dimension
    n_max + 1); the top 10% of Fock rows are treated as an edge zone
    excluded from residual checks;
  * spin-s basis ordered by decreasing magnetic quantum number
    (row 0 is m = s, dimension 2s + 1);
  * two-level-atom/field product basis interleaved as
    |g,0>, |e,0>, |g,1>, |e,1>, ... so the coupling sits on the first
    off-diagonal band; sector n couples |e,n> and |g,n+1>.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .operators import WegnerFlowError, expm_antihermitian, hermitize
from .geometry import CoordinateTrajectory, ParametrizedFamily

__all__ = [
    "SpecViolationError",
    "SingularShiftError",
    "TruncationTooSmallError",
    "NotInFamilyError",
    "GhoSpec",
    "SpinSpec",
    "JcSpec",
    "fock_annihilation",
    "spin_matrices",
    "build_gho",
    "build_spin",
    "build_jc",
    "jc_sector_blocks",
    "jc_sector_indices",
    "displacement_shift",
    "displacement_family",
    "squeeze_family",
    "spin_family",
    "jc_family",
    "ReducedCoefficients",
    "closed_form_flow",
    "coordinate_projection",
    "edge_zone",
    "interior_rows",
    "edge_amplitude",
]


class SpecViolationError(WegnerFlowError):
    pass


class SingularShiftError(WegnerFlowError):
    pass


class TruncationTooSmallError(WegnerFlowError):
    pass


class NotInFamilyError(WegnerFlowError):
    pass


@dataclass(frozen=True)
class GhoSpec:
    """omega a^dag a + lambda a^dag^2 + conj c.c. + mu a^dag + c.c. + nu."""

    omega: float
    lam: complex = 0.0
    mu: complex = 0.0
    nu: float = 0.0
    n_max: int = 40

    def __post_init__(self):
        if self.omega <= 2.0 * abs(self.lam):
            raise SpecViolationError(
                f"require omega > 2|lambda|: {self.omega} <= {2 * abs(self.lam)}"
            )
        if self.n_max < 4:
            raise SpecViolationError("n_max must be >= 4")


@dataclass(frozen=True)
class SpinSpec:
    s: float
    b_field: tuple

    def __post_init__(self):
        if abs(2 * self.s - round(2 * self.s)) > 1e-12 or self.s < 0.5:
            raise SpecViolationError(f"s must be a half-integer >= 1/2, got {self.s}")
        if np.linalg.norm(self.b_field) == 0:
            raise SpecViolationError("magnetic field must be nonzero")


@dataclass(frozen=True)
class JcSpec:
    omega0: float
    omega: float
    kappa: float
    n_max: int = 20

    def __post_init__(self):
        if self.n_max < 2:
            raise SpecViolationError("n_max must be >= 2")
        if not np.isfinite(self.kappa):
            raise SpecViolationError("kappa must be finite")


def fock_annihilation(n_max):
    """Annihilation operator on Fock levels 0..n_max."""
    d = n_max + 1
    a = np.zeros((d, d), dtype=complex)
    n = np.arange(1, d)
    a[n - 1, n] = np.sqrt(n)
    return a


def spin_matrices(s):
    """(Sx, Sy, Sz, Sp, Sm) for spin s, basis ordered m = s .. -s.

    The commutation relations [Sz, S+-] = +-S+- and [S+, S-] = 2 Sz are
    verified at build time.
    """
    d = int(round(2 * s)) + 1
    m = s - np.arange(d)  # m value per row
    sz = np.diag(m.astype(complex))
    sp = np.zeros((d, d), dtype=complex)
    for i in range(1, d):
        # raises |m[i]> -> |m[i] + 1> = row i - 1
        sp[i - 1, i] = np.sqrt(s * (s + 1) - m[i] * (m[i] + 1))
    sm = sp.conj().T
    sx = 0.5 * (sp + sm)
    sy = -0.5j * (sp - sm)
    for lhs, rhs in (((sz @ sp - sp @ sz), sp),
                     ((sz @ sm - sm @ sz), -sm),
                     ((sp @ sm - sm @ sp), 2 * sz)):
        assert np.max(np.abs(lhs - rhs)) < 1e-12
    return sx, sy, sz, sp, sm


def build_gho(spec: GhoSpec):
    a = fock_annihilation(spec.n_max)
    ad = a.conj().T
    h = (spec.omega * ad @ a
         + spec.lam * ad @ ad + np.conj(spec.lam) * a @ a
         + spec.mu * ad + np.conj(spec.mu) * a
         + spec.nu * np.eye(spec.n_max + 1))
    return hermitize(h)


def displacement_shift(omega, lam, mu):
    """Complex shift alpha solving omega*alpha + 2*lam*conj(alpha) = mu.

    Removes the linear terms of the oscillator Hamiltonian so the
    two-band case reduces to the pure quadratic one.
    """
    lam = complex(lam)
    mu = complex(mu)
    det = omega**2 - 4.0 * abs(lam) ** 2
    if abs(det) < 1e-14 * max(omega**2, 1.0):
        raise SingularShiftError("omega^2 = 4|lambda|^2: shift system singular")
    mat = np.array([
        [omega + 2 * lam.real, 2 * lam.imag],
        [2 * lam.imag, omega - 2 * lam.real],
    ])
    xy = np.linalg.solve(mat, [mu.real, mu.imag])
    alpha = complex(xy[0], xy[1])
    assert abs(omega * alpha + 2 * lam * np.conj(alpha) - mu) <= 1e-12 * max(1.0, abs(mu))
    return alpha


def build_spin(spec: SpinSpec):
    sx, sy, sz, _, _ = spin_matrices(spec.s)
    bx, by, bz = spec.b_field
    return hermitize(bx * sx + by * sy + bz * sz)


def build_jc(spec: JcSpec):
    """Atom-field matrix in the interleaved product basis.

    Index 2n is |g,n>, index 2n+1 is |e,n>; the coupling connects
    |e,n> and |g,n+1> (adjacent indices), so the whole off-diagonal
    part is a single band of off-diagonality 1.
    """
    d = 2 * (spec.n_max + 1)
    h = np.zeros((d, d), dtype=complex)
    for n in range(spec.n_max + 1):
        h[2 * n, 2 * n] = -0.5 * spec.omega0 + spec.omega * n
        h[2 * n + 1, 2 * n + 1] = 0.5 * spec.omega0 + spec.omega * n
    for n in range(spec.n_max):
        g = spec.kappa * np.sqrt(n + 1)
        h[2 * n + 1, 2 * n + 2] = g
        h[2 * n + 2, 2 * n + 1] = g
    return h


def jc_sector_indices(n):
    """(row of |e,n>, row of |g,n+1>) in the interleaved basis."""
    return 2 * n + 1, 2 * n + 2


def jc_sector_blocks(spec: JcSpec):
    """Per-sector 2x2 blocks [[A_n, C_n], [C_n, B_n]] on
    span{|e,n>, |g,n+1>}, plus the uncoupled |g,0> diagonal scalar."""
    blocks = []
    for n in range(spec.n_max):
        a_n = 0.5 * spec.omega0 + spec.omega * n
        b_n = -0.5 * spec.omega0 + spec.omega * (n + 1)
        c_n = spec.kappa * np.sqrt(n + 1)
        blocks.append(np.array([[a_n, c_n], [c_n, b_n]]))
    scalar = -0.5 * spec.omega0
    return blocks, scalar


# ---------------------------------------------------------------------------
# unitary families


def displacement_family(n_max, fd_step=1e-4):
    """Coordinates (x, p) with shift z = (x + i p)/sqrt(2); base state |0>."""
    a = fock_annihilation(n_max)
    ad = a.conj().T
    base = np.zeros(n_max + 1, dtype=complex)
    base[0] = 1.0

    def unitary(alpha):
        z = (alpha[0] + 1j * alpha[1]) / np.sqrt(2.0)
        return expm_antihermitian(z * ad - np.conj(z) * a)

    return ParametrizedFamily(("x", "p"), unitary, base, fd_step=fd_step)


def squeeze_family(base_n, n_max, fd_step=1e-4):
    """Coordinates (r, phi), squeeze parameter xi = r exp(-2 i phi);
    base state is the Fock level |base_n>.  A generous cutoff above the
    base level is required for finite-difference accuracy."""
    if n_max < base_n + 20:
        raise TruncationTooSmallError(
            f"need n_max >= base_n + 20 for reliable stencils, got {n_max}"
        )
    a = fock_annihilation(n_max)
    ad2 = a.conj().T @ a.conj().T
    a2 = a @ a
    base = np.zeros(n_max + 1, dtype=complex)
    base[base_n] = 1.0

    def unitary(alpha):
        # Convention: U^dagger a U = a cosh(r) - a^dagger e^{-2 i phi} sinh(r)
        xi = alpha[0] * np.exp(-2j * alpha[1])
        return expm_antihermitian(0.5 * (np.conj(xi) * a2 - xi * ad2))

    return ParametrizedFamily(("r", "phi"), unitary, base, fd_step=fd_step,
                              domain=((0.0, np.inf), (-np.inf, np.inf)))


def spin_family(s, base_m, fd_step=1e-4):
    """Coordinates (theta, phi), rotation exp(sigma S+ - conj(sigma) S-)
    with sigma = (theta/2) exp(-i phi); base state |base_m>."""
    _, _, _, sp, sm = spin_matrices(s)
    d = int(round(2 * s)) + 1
    idx = int(round(s - base_m))
    if not 0 <= idx < d:
        raise SpecViolationError(f"base_m = {base_m} out of range for s = {s}")
    base = np.zeros(d, dtype=complex)
    base[idx] = 1.0

    def unitary(alpha):
        sigma = 0.5 * alpha[0] * np.exp(-1j * alpha[1])
        return expm_antihermitian(sigma * sp - np.conj(sigma) * sm)

    return ParametrizedFamily(("theta", "phi"), unitary, base, fd_step=fd_step,
                              domain=((0.0, np.pi), (-np.inf, np.inf)))


def jc_family(fd_step=1e-4):
    """Sector family on span{|e,n>, |g,n+1>}.

    Coordinates (c, theta_a, theta_c) with c = |alpha_n|; the remaining
    entries are fixed by unitarity and the phase constraint
    theta_a + theta_b - theta_c - theta_d = pi with the branch
    theta_b = 0.  Base state |e,n> = (1, 0)."""
    base = np.array([1.0, 0.0], dtype=complex)

    def unitary(alpha):
        c, th_a, th_c = alpha
        c = float(c)
        if not -1e-12 <= c <= 1.0 + 1e-12:
            raise WegnerFlowError(f"coordinate c = {c} outside [0, 1]")
        s = np.sqrt(max(1.0 - c * c, 0.0))
        th_d = th_a - th_c - np.pi
        return np.array([
            [c * np.exp(1j * th_a), s * np.exp(1j * th_c)],
            [s * np.exp(1j * th_d), c],
        ])

    return ParametrizedFamily(("c", "theta_a", "theta_c"), unitary, base,
                              fd_step=fd_step,
                              domain=((0.0, 1.0), (-np.inf, np.inf),
                                      (-np.inf, np.inf)))


# ---------------------------------------------------------------------------
# reduced coefficient flows


@dataclass
class ReducedCoefficients:
    """Closed-form coefficient trajectories sampled on an l grid."""

    model: str  # "squeeze" | "spin" | "jc_sector"
    l: np.ndarray
    values: dict  # name -> array over l


def closed_form_flow(spec, l_grid, sector=None, rtol=1e-12, atol=1e-14):
    """Integrate the reduced coefficient ODE system for a model spec.

    Oscillator (quadratic band): dlam/dl = -4 w^2 lam, with the
    diagonal feeding back as dw/dl = -16 w |lam|^2, dnu/dl = -8 w |lam|^2.
    Spin: dbeta/dl = -bz^2 beta, dbz/dl = 4 bz |beta|^2.
    Atom-field sector n: dC/dl = -(A - B)^2 C, d(A - B)/dl = 4 C^2 (A - B),
    A + B constant.
    """
    l_grid = np.asarray(l_grid, dtype=float)

    if isinstance(spec, GhoSpec):
        if abs(spec.mu) > 0:
            raise SpecViolationError(
                "reduced quadratic flow needs mu = 0; apply displacement_shift first"
            )

        def rhs(_l, y):
            w, lr, li, nu = y
            lam2 = lr * lr + li * li
            return [-16.0 * w * lam2, -4.0 * w * w * lr, -4.0 * w * w * li,
                    -8.0 * w * lam2]

        y0 = [spec.omega, np.real(spec.lam), np.imag(spec.lam), spec.nu]
        sol = solve_ivp(rhs, (l_grid[0], l_grid[-1]), y0, t_eval=l_grid,
                        method="DOP853", rtol=rtol, atol=atol)
        _check(sol)
        return ReducedCoefficients("squeeze", l_grid, {
            "omega": sol.y[0],
            "lam": sol.y[1] + 1j * sol.y[2],
            "nu": sol.y[3],
        })

    if isinstance(spec, SpinSpec):
        bx, by, bz = spec.b_field
        beta0 = 0.5 * (bx - 1j * by)

        def rhs(_l, y):
            bzv, br, bi = y
            b2 = br * br + bi * bi
            return [4.0 * bzv * b2, -bzv * bzv * br, -bzv * bzv * bi]

        sol = solve_ivp(rhs, (l_grid[0], l_grid[-1]),
                        [bz, beta0.real, beta0.imag], t_eval=l_grid,
                        method="DOP853", rtol=rtol, atol=atol)
        _check(sol)
        return ReducedCoefficients("spin", l_grid, {
            "beta_z": sol.y[0],
            "beta": sol.y[1] + 1j * sol.y[2],
        })

    if isinstance(spec, JcSpec):
        if sector is None:
            raise SpecViolationError("sector index required for the atom-field model")
        blocks, _ = jc_sector_blocks(spec)
        blk = blocks[sector]
        a0, b0, c0 = blk[0, 0].real, blk[1, 1].real, blk[0, 1].real

        def rhs(_l, y):
            an, bn, cn = y
            gap = an - bn
            return [2.0 * cn * cn * gap, -2.0 * cn * cn * gap, -gap * gap * cn]

        sol = solve_ivp(rhs, (l_grid[0], l_grid[-1]), [a0, b0, c0],
                        t_eval=l_grid, method="DOP853", rtol=rtol, atol=atol)
        _check(sol)
        return ReducedCoefficients("jc_sector", l_grid, {
            "A": sol.y[0], "B": sol.y[1], "C": sol.y[2], "n": sector,
        })

    raise SpecViolationError(f"unsupported spec type {type(spec).__name__}")


def _check(sol):
    if not sol.success:
        from .flow import IntegratorFailureError
        raise IntegratorFailureError(sol.message)


# ---------------------------------------------------------------------------
# coordinate projection


def edge_zone(dim, frac=0.1):
    """Number of top rows considered truncation edge (at least 2)."""
    return max(2, int(np.ceil(frac * dim)))


def interior_rows(dim, frac=0.1):
    return np.arange(dim - edge_zone(dim, frac))


def edge_amplitude(u, base_state, frac=0.1):
    """Weight of the transported base state in the truncation edge rows."""
    psi = u.conj().T @ base_state
    z = edge_zone(len(psi), frac)
    return float(np.sum(np.abs(psi[-z:]) ** 2))


def coordinate_projection(flow_traj, kind, family=None, residual_tol=1e-6,
                          gimbal_tol=1e-8, **kw):
    """Invert the family map along a tracked flow.

    kind is one of "displacement", "squeeze", "spin", "jc"; extra
    keywords: s for spin, sector for jc.  Returns the coordinate
    trajectory; when ``family`` is given the reconstruction residual
    ||U(alpha(l)) - U(l) * phase||_max is verified at each sample
    (NotInFamilyError above residual_tol).  For the truncated Fock
    families (displacement, squeeze) the residual is restricted to the
    tracked base-state column on interior rows, because the cutoff
    scrambles high Fock columns regardless of family membership.

    Angular coordinates are undefined where their conjugate amplitude
    vanishes (theta ~ 0, r ~ 0, c ~ 1); such samples inherit the value
    of the nearest well-defined sample.
    """
    samples = flow_traj.samples
    if samples[0].u is None:
        raise WegnerFlowError("flow was not run with track_unitary")
    l = np.array([s.l for s in samples])

    extractors = {
        "displacement": _extract_displacement,
        "squeeze": _extract_squeeze,
        "spin": _extract_spin,
        "jc": _extract_jc,
    }
    if kind not in extractors:
        raise ValueError(f"unknown family kind {kind!r}")

    alphas = []
    defined = []
    for s in samples:
        alpha, ok = extractors[kind](s.u, gimbal_tol=gimbal_tol, **kw)
        alphas.append(alpha)
        defined.append(ok)
    alphas = np.array(alphas)
    defined = np.array(defined)

    # forward/backward fill of undefined angular coordinates
    k = alphas.shape[1]
    for i in range(k):
        col = alphas[:, i]
        und = ~defined[:, i]
        if und.all():
            col[:] = 0.0
            continue
        good = np.nonzero(~und)[0]
        for j in np.nonzero(und)[0]:
            col[j] = col[good[np.argmin(np.abs(good - j))]]

    traj = CoordinateTrajectory.from_alpha(l, alphas)

    if family is not None:
        worst = 0.0
        for s, alpha in zip(samples, alphas):
            u_fam = family.unitary(alpha)
            u_flow = _project_block(s.u, kind, **kw)
            if kind in ("squeeze", "displacement"):
                # High Fock columns of the flowed unitary are scrambled
                # by the cutoff (the truncated generator leaves the
                # family algebra at the edge), so compare only the
                # column of the tracked base state on interior rows.
                rows = interior_rows(u_fam.shape[0])
                col = int(np.argmax(np.abs(family.base_state)))
                u_fam = u_fam[rows, col]
                u_flow = u_flow[rows, col]
                ip = np.vdot(u_fam, u_flow)
            else:
                ip = np.trace(u_fam.conj().T @ u_flow)
            phase = ip / abs(ip) if abs(ip) > 0 else 1.0
            worst = max(worst, np.max(np.abs(u_fam * phase - u_flow)))
        if worst > residual_tol:
            raise NotInFamilyError(
                f"reconstruction residual {worst:.3e} > {residual_tol:.1e}: "
                "the flow left the coordinate family"
            )
    return traj


def _project_block(u, kind, sector=None, **_kw):
    if kind == "jc":
        i, j = jc_sector_indices(sector)
        return u[np.ix_([i, j], [i, j])]
    return u


def _extract_displacement(u, gimbal_tol=0.0, **_kw):
    d = u.shape[0]
    a = fock_annihilation(d - 1)
    z = (u.conj().T @ a @ u)[0, 0]
    x = np.sqrt(2.0) * z.real
    p = np.sqrt(2.0) * z.imag
    return np.array([x, p]), np.array([True, True])


def _extract_squeeze(u, gimbal_tol=1e-8, **_kw):
    d = u.shape[0]
    a = fock_annihilation(d - 1)
    b = u.conj().T @ a @ u
    # a^dagger coefficient of the transformed operator, averaged over a
    # few low rows: b[n + 1, n] = -sinh(r) exp(-2 i phi) sqrt(n+1)
    rows = min(4, d - 2)
    c2 = np.mean([b[n + 1, n] / np.sqrt(n + 1) for n in range(rows)])
    r = float(np.arcsinh(abs(c2)))
    if abs(c2) > gimbal_tol:
        phi = float(-0.5 * np.angle(-c2))
        return np.array([r, phi]), np.array([True, True])
    return np.array([r, 0.0]), np.array([True, False])


def _extract_spin(u, s=0.5, gimbal_tol=1e-8, **_kw):
    _, _, sz, sp, _ = spin_matrices(s)
    adj = u @ sz @ u.conj().T
    # adj = cos(theta) Sz - (sin(theta)/2)(e^{-i phi} S+ + h.c.)
    cz = np.real(np.trace(sz.conj().T @ adj) / np.trace(sz.conj().T @ sz))
    cp = np.trace(sp.conj().T @ adj) / np.real(np.trace(sp.conj().T @ sp))
    theta = float(np.arccos(np.clip(cz, -1.0, 1.0)))
    if abs(cp) > gimbal_tol:
        phi = float(-np.angle(-cp))
        return np.array([theta, phi]), np.array([True, True])
    return np.array([theta, 0.0]), np.array([True, False])


def _extract_jc(u, sector=0, gimbal_tol=1e-8, **_kw):
    blk = _project_block(u, "jc", sector=sector)
    # normalize the branch phase so the |g,n+1> diagonal entry is real >= 0
    if abs(blk[1, 1]) > gimbal_tol:
        blk = blk * np.exp(-1j * np.angle(blk[1, 1]))
    c = float(np.clip(abs(blk[0, 0]), 0.0, 1.0))
    th_a = float(np.angle(blk[0, 0])) if c > gimbal_tol else 0.0
    ok_a = c > gimbal_tol
    sgamma = abs(blk[0, 1])
    if sgamma > gimbal_tol:
        th_c = float(np.angle(blk[0, 1]))
        ok_c = True
    else:
        th_c = 0.0
        ok_c = False
    return np.array([c, th_a, th_c]), np.array([True, ok_a, ok_c])
