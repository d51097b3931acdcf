"""Dense complex Hermitian matrix algebra in a fixed natural basis.

Matrices are plain (d, d) complex numpy arrays.  The basis index is
0-based in storage; reports meant for human consumption add 1 to match
the usual physics convention n = 1..d.

The band decomposition splits a Hermitian matrix into its diagonal
eigenvalues eps[n] and a set of "bands": for each off-diagonality index
``a`` the coefficient vector C with C[m - a] = <u_m|H|u_{m-a}>, i.e. the
lower sub-diagonal at offset a.  The decomposition is lossless.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "WegnerFlowError",
    "NotHermitianError",
    "NonFiniteError",
    "DimMismatchError",
    "IndexOverflowError",
    "NoSuchBandError",
    "BandDecomposition",
    "validate_hermitian",
    "hermitize",
    "antihermitize",
    "commutator",
    "band_split",
    "band_assemble",
    "band_part",
    "off_diag_norm_sq",
    "band_norm_sq",
    "expm_antihermitian",
    "matrix_to_json",
    "matrix_from_json",
]

# A band is kept only if some coefficient exceeds this times ||H||_F.
BAND_PRUNE_REL = 1e-14


class WegnerFlowError(Exception):
    """Base class for all errors raised by this package."""


class NotHermitianError(WegnerFlowError):
    pass


class NonFiniteError(WegnerFlowError):
    pass


class DimMismatchError(WegnerFlowError):
    pass


class IndexOverflowError(WegnerFlowError):
    pass


class NoSuchBandError(WegnerFlowError):
    pass


def hermitize(m):
    """(M + M†)/2 — project onto the Hermitian part."""
    return 0.5 * (m + m.conj().T)


def antihermitize(m):
    """(M - M†)/2 — project onto the anti-Hermitian part."""
    return 0.5 * (m - m.conj().T)


def validate_hermitian(grid, tol=1e-12):
    """Validate and exactly symmetrize a square complex grid.

    Parameters
    ----------
    grid : array_like, shape (d, d)
    tol : float
        Maximum allowed element-wise deviation |grid - grid†|.

    Returns
    -------
    ndarray, shape (d, d), complex
        The Hermitian part (grid + grid†)/2.

    Raises
    ------
    NonFiniteError
        If any entry is NaN or infinite.
    NotHermitianError
        If max |grid - grid†| exceeds ``tol``.
    """
    m = np.asarray(grid, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimMismatchError(f"expected a square matrix, got shape {m.shape}")
    if tol < 0:
        raise ValueError("tol must be >= 0")
    if not np.all(np.isfinite(m.view(float))):
        raise NonFiniteError("matrix contains NaN or Inf entries")
    dev = np.max(np.abs(m - m.conj().T))
    if dev > tol:
        raise NotHermitianError(
            f"max |H - H^dagger| element = {dev:.3e} exceeds tol = {tol:.3e}"
        )
    return hermitize(m)


def commutator(a, b):
    """[A, B] = AB - BA."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise DimMismatchError(f"shape mismatch {a.shape} vs {b.shape}")
    return a @ b - b @ a


@dataclass(frozen=True)
class BandDecomposition:
    """Diagonal eigenvalues plus per-band coefficient vectors.

    ``bands[a]`` has length d - a with bands[a][m - a] = <u_m|H|u_{m-a}>
    (0-based rows m = a .. d-1).  Band indices are strictly increasing
    and bands with all coefficients below the pruning threshold are
    absent.
    """

    eps: np.ndarray
    bands: dict = field(default_factory=dict)

    @property
    def dim(self):
        return len(self.eps)

    def band_indices(self):
        return sorted(self.bands)

    def coeff(self, a, row):
        """Coefficient <u_row|H|u_{row-a}> with the boundary convention
        that out-of-range coefficients are zero."""
        if a not in self.bands:
            return 0.0 + 0.0j
        if row < a or row >= self.dim:
            return 0.0 + 0.0j
        return complex(self.bands[a][row - a])

    def frobenius_norm(self):
        sq = float(np.sum(self.eps**2))
        for c in self.bands.values():
            sq += 2.0 * float(np.sum(np.abs(c) ** 2))
        return np.sqrt(sq)


def band_split(h, prune_rel=BAND_PRUNE_REL):
    """Decompose a Hermitian matrix into diagonal + bands.

    Bands whose largest coefficient is below prune_rel * ||H||_F are
    dropped so floating-point dust cannot create phantom bands.
    """
    h = np.asarray(h, dtype=complex)
    d = h.shape[0]
    eps = np.real(np.diag(h)).copy()
    thresh = prune_rel * np.linalg.norm(h)
    bands = {}
    for a in range(1, d):
        c = np.diagonal(h, offset=-a).copy()
        if np.max(np.abs(c)) > thresh:
            bands[a] = c
    return BandDecomposition(eps=eps, bands=bands)


def band_assemble(bd):
    """Rebuild the Hermitian matrix from a BandDecomposition."""
    d = bd.dim
    h = np.diag(bd.eps.astype(complex))
    for a, c in bd.bands.items():
        if a >= d:
            raise IndexOverflowError(f"band index {a} >= dim {d}")
        if len(c) != d - a:
            raise DimMismatchError(
                f"band {a}: expected {d - a} coefficients, got {len(c)}"
            )
        rows = np.arange(a, d)
        h[rows, rows - a] = c
        h[rows - a, rows] = np.conj(c)
    return h


def band_part(h, a):
    """The Hermitian matrix supported only on diagonals +-a of h."""
    h = np.asarray(h, dtype=complex)
    d = h.shape[0]
    if not 1 <= a < d:
        raise IndexOverflowError(f"band index {a} out of range for dim {d}")
    out = np.zeros_like(h)
    rows = np.arange(a, d)
    out[rows, rows - a] = h[rows, rows - a]
    out[rows - a, rows] = h[rows - a, rows]
    return out


def off_diag_norm_sq(h):
    """Sum of |H[m, n]|^2 over m != n."""
    h = np.asarray(h)
    return float(np.sum(np.abs(h) ** 2) - np.sum(np.abs(np.diag(h)) ** 2))


def band_norm_sq(h, a):
    """Sum of |H[m, n]|^2 over the diagonals at offset +-a."""
    c = np.diagonal(np.asarray(h), offset=-a)
    return 2.0 * float(np.sum(np.abs(c) ** 2))


def expm_antihermitian(k, tol=1e-10):
    """exp(K) for anti-Hermitian K, via eigendecomposition of iK.

    The result is unitary to machine precision by construction.
    """
    k = np.asarray(k, dtype=complex)
    if not np.all(np.isfinite(k.view(float))):
        raise NonFiniteError("generator contains NaN or Inf entries")
    dev = np.max(np.abs(k + k.conj().T))
    if dev > tol * max(1.0, np.max(np.abs(k))):
        raise NotHermitianError(
            f"matrix is not anti-Hermitian: max |K + K^dagger| = {dev:.3e}"
        )
    w, v = np.linalg.eigh(1j * antihermitize(k))
    return (v * np.exp(-1j * w)) @ v.conj().T


def matrix_to_json(h):
    """Serialize to {"dim": d, "entries": [[[re, im], ...], ...]} (row-major)."""
    h = np.asarray(h, dtype=complex)
    d = h.shape[0]
    entries = [[[float(h[m, n].real), float(h[m, n].imag)] for n in range(d)]
               for m in range(d)]
    return {"dim": d, "entries": entries}


def matrix_from_json(obj, tol=1e-12):
    """Read the matrix JSON format and validate Hermiticity."""
    if isinstance(obj, str):
        obj = json.loads(obj)
    d = int(obj["dim"])
    raw = np.array(obj["entries"], dtype=float)
    if raw.shape != (d, d, 2):
        raise DimMismatchError(
            f"entries shape {raw.shape} inconsistent with dim {d}"
        )
    return validate_hermitian(raw[..., 0] + 1j * raw[..., 1], tol=tol)
