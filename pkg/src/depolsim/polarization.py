"""Qubit polarization states, Stokes vectors, and fidelity metrics.

Basis and sign conventions used throughout the package:

    |h> = (1, 0)                 horizontal
    |v> = (0, 1)                 vertical
    |p> = (|h> + |v>)/sqrt(2)    diagonal (+45 deg linear)
    |m> = (-|h> + |v>)/sqrt(2)   antidiagonal
    |r> = (|h> + i|v>)/sqrt(2)   right circular
    |l> = (i|h> + |v>)/sqrt(2)   left circular

Stokes components are expectation values of the three operators

    SIGMA1 = |h><h| - |v><v|
    SIGMA2 = |p><p| - |m><m|
    SIGMA3 = |r><r| - |l><l|

i.e. S_i = tr(rho * SIGMA_i).  In the h/v matrix representation SIGMA1,
SIGMA2, SIGMA3 are the Pauli Z, X, Y matrices.  Every other module uses
these constants; they are the single source of truth for all signs.  The
handedness implied by the |l> definition above is fixed; any alternative
display convention must relabel at the presentation layer only.
"""

from __future__ import annotations

import numpy as np

NORM_ATOL = 1e-10
PSD_ATOL = 1e-10

JONES_H = np.array([1.0, 0.0], dtype=complex)
JONES_V = np.array([0.0, 1.0], dtype=complex)
JONES_P = np.array([1.0, 1.0], dtype=complex) / np.sqrt(2.0)
JONES_M = np.array([-1.0, 1.0], dtype=complex) / np.sqrt(2.0)
JONES_R = np.array([1.0, 1.0j], dtype=complex) / np.sqrt(2.0)
JONES_L = np.array([1.0j, 1.0], dtype=complex) / np.sqrt(2.0)

JONES_STATES = {
    "h": JONES_H,
    "v": JONES_V,
    "p": JONES_P,
    "m": JONES_M,
    "r": JONES_R,
    "l": JONES_L,
}

# exact matrix forms of |h><h|-|v><v|, |p><p|-|m><m|, |r><r|-|l><l|
# (a unit test asserts they match the outer-product definitions)
SIGMA1 = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
SIGMA2 = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA3 = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMAS = (SIGMA1, SIGMA2, SIGMA3)

IDENTITY = np.eye(2, dtype=complex)


def as_jones(vec) -> np.ndarray:
    """Coerce to a normalized complex 2-vector, raising if the norm is off."""
    j = np.asarray(vec, dtype=complex).reshape(2)
    norm2 = float(np.vdot(j, j).real)
    if abs(norm2 - 1.0) > NORM_ATOL:
        raise ValueError(f"Jones vector is not normalized: |j|^2 = {norm2!r}")
    return j


def density_from_jones(j) -> np.ndarray:
    """Rank-1 projector |j><j| of a normalized Jones vector."""
    j = as_jones(j)
    return np.outer(j, j.conj())


def stokes_from_density(rho) -> np.ndarray:
    """Stokes vector (S1, S2, S3) of a density matrix, S_i = tr(rho SIGMA_i)."""
    rho = np.asarray(rho, dtype=complex)
    return np.array([np.trace(rho @ s).real for s in SIGMAS])


def density_from_stokes(s) -> np.ndarray:
    """Density matrix (I + S1*SIGMA1 + S2*SIGMA2 + S3*SIGMA3) / 2.

    Raises ValueError if |s| > 1 (no physical state lies outside the
    Poincare sphere).
    """
    s = np.asarray(s, dtype=float).reshape(3)
    norm = float(np.linalg.norm(s))
    if norm > 1.0 + NORM_ATOL:
        raise ValueError(f"Stokes vector of length {norm!r} lies outside the unit ball")
    rho = IDENTITY.copy()
    for si, sigma in zip(s, SIGMAS):
        rho += si * sigma
    return rho / 2.0


def jones_from_stokes(s, atol: float = 1e-6) -> np.ndarray:
    """Jones vector of the pure state with unit Stokes vector `s`.

    Only unit-length Stokes vectors describe pure states, so `s` must have
    norm 1 within `atol`.
    """
    s = np.asarray(s, dtype=float).reshape(3)
    if abs(np.linalg.norm(s) - 1.0) > atol:
        raise ValueError("only unit Stokes vectors correspond to pure states")
    rho = density_from_stokes(s / np.linalg.norm(s))
    vals, vecs = np.linalg.eigh(rho)
    j = vecs[:, np.argmax(vals)]
    # fix the global phase so the largest component is real positive
    k = int(np.argmax(np.abs(j)))
    j = j * np.exp(-1j * np.angle(j[k]))
    return as_jones(j)


def check_density(rho, name: str = "rho") -> np.ndarray:
    """Validate Hermiticity, unit trace and positivity of a density matrix."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (2, 2):
        raise ValueError(f"{name} must be 2x2, got shape {rho.shape}")
    if np.abs(rho - rho.conj().T).max() > 1e-12:
        raise ValueError(f"{name} is not Hermitian")
    if abs(np.trace(rho).real - 1.0) > 1e-12 or abs(np.trace(rho).imag) > 1e-12:
        raise ValueError(f"{name} does not have unit trace")
    if np.linalg.eigvalsh(rho).min() < -PSD_ATOL:
        raise ValueError(f"{name} has a negative eigenvalue beyond tolerance")
    return rho


def dop(rho) -> float:
    """Degree of polarization: the length of the Stokes vector, in [0, 1].

    Computed from the Stokes components rather than via sqrt(1 - 4 det rho);
    the two agree analytically, but the determinant form loses half the
    significant digits near D = 0 where the radicand cancels.
    """
    d = float(np.linalg.norm(stokes_from_density(rho)))
    return min(d, 1.0)


def dop_from_determinant(rho) -> float:
    """Degree of polarization via sqrt(1 - 4 det rho).

    Tiny negative radicands (>= -1e-10, floating-point noise around the
    fully mixed state) are clamped to zero; anything more negative means
    the input was not a physical state.
    """
    rho = np.asarray(rho, dtype=complex)
    radicand = 1.0 - 4.0 * np.linalg.det(rho).real
    if radicand < -1e-10:
        raise ValueError(f"1 - 4 det(rho) = {radicand!r}; not a physical state")
    return min(np.sqrt(max(radicand, 0.0)), 1.0)


def _sqrtm_psd(h: np.ndarray) -> np.ndarray:
    """Square root of a Hermitian PSD matrix, clipping eigenvalue noise."""
    vals, vecs = np.linalg.eigh(h)
    vals = np.clip(vals, 0.0, None)
    return (vecs * np.sqrt(vals)) @ vecs.conj().T


def state_fidelity(a, b) -> float:
    """Uhlmann fidelity F = (tr sqrt(sqrt(a) b sqrt(a)))^2 between two states."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    ra = _sqrtm_psd(a)
    f = np.trace(_sqrtm_psd(ra @ b @ ra)).real ** 2
    return float(min(max(f, 0.0), 1.0))
