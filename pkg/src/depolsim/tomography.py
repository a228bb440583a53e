"""State and process reconstruction from measurement records.

State tomography comes in two flavors: a linear Stokes estimate (fast,
but possibly unphysical under noise) and a maximum-likelihood estimate
over the Cholesky-style parameterization rho(T) = T^dag T / tr(T^dag T),
which is positive and trace-one by construction.

Process tomography expresses a channel as

    E(rho) = sum_{m,n} chi[m, n] E_m rho E_n^dag

in the fixed operator basis (E0, E1, E2, E3) = (I, X, Y, Z), where
X = SIGMA2 (the bit flip in h/v, +1 eigenstates p/m), Y = SIGMA3
(eigenstates r/l) and Z = SIGMA1 = |h><h| - |v><v|.  With this ordering
the chi diagonal reads directly as (no error, bit flip, bit-phase flip,
phase flip) probabilities for Pauli channels.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .channels import StokesChannel, affine_from_outputs
from .measurement import SETTING_PAIRS, MeasurementRecord, projector
from .polarization import (
    IDENTITY,
    JONES_STATES,
    PSD_ATOL,
    SIGMA1,
    SIGMA2,
    SIGMA3,
    _sqrtm_psd,
    density_from_jones,
)

CHI_BASIS = (IDENTITY, SIGMA2, SIGMA3, SIGMA1)
CHI_BASIS_LABELS = ("I", "X", "Y", "Z")

_QPT_INPUTS = ("h", "v", "p", "r")


class ConvergenceError(RuntimeError):
    """Raised when the likelihood optimizer exhausts its restart budget."""

    def __init__(self, message: str, best_rho: np.ndarray, grad_norm: float):
        super().__init__(message)
        self.best_rho = best_rho
        self.grad_norm = grad_norm


@dataclass(frozen=True)
class LinearEstimate:
    """Linear-inversion state estimate; `physical` is False if it left the PSD cone."""

    rho: np.ndarray
    physical: bool


@dataclass(frozen=True)
class ChiMatrix:
    """Process matrix in the (I, X, Y, Z) basis, with the mass removed by CP projection."""

    matrix: np.ndarray
    clipped_mass: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "matrix", np.asarray(self.matrix, dtype=complex).reshape(4, 4))

    def to_json(self) -> dict:
        return {
            "basis": list(CHI_BASIS_LABELS),
            "re": self.matrix.real.tolist(),
            "im": self.matrix.imag.tolist(),
            "clipped_mass": float(self.clipped_mass),
        }

    @classmethod
    def from_json(cls, data) -> "ChiMatrix":
        if isinstance(data, str):
            data = json.loads(data)
        if list(data.get("basis", CHI_BASIS_LABELS)) != list(CHI_BASIS_LABELS):
            raise ValueError("chi matrix uses an unexpected operator basis")
        mat = np.array(data["re"], dtype=float) + 1j * np.array(data["im"], dtype=float)
        return cls(mat, float(data.get("clipped_mass", 0.0)))


def _require_full_settings(record: MeasurementRecord):
    missing = [lbl for pair in SETTING_PAIRS for lbl in pair if lbl not in record.settings]
    if missing:
        raise ValueError(f"record is missing settings {missing}; all six are required")


def qst_linear(record: MeasurementRecord) -> LinearEstimate:
    """Stokes estimate S_i = (n+ - n-)/(n+ + n-) per complementary pair.

    The returned matrix has unit trace and is Hermitian but may have a
    negative eigenvalue when counts are noisy; `physical` flags that.
    """
    _require_full_settings(record)
    s_hat = []
    for plus, minus in SETTING_PAIRS:
        n_plus = record.count(plus)
        n_minus = record.count(minus)
        total = n_plus + n_minus
        if total == 0:
            raise ValueError(f"no counts in the ({plus}, {minus}) pair; Stokes estimate undefined")
        s_hat.append((n_plus - n_minus) / total)
    rho = (IDENTITY + s_hat[0] * SIGMA1 + s_hat[1] * SIGMA2 + s_hat[2] * SIGMA3) / 2.0
    physical = bool(np.linalg.eigvalsh(rho).min() >= -PSD_ATOL)
    return LinearEstimate(rho, physical)


# --- maximum likelihood ------------------------------------------------

_DT = (
    np.array([[1, 0], [0, 0]], dtype=complex),
    np.array([[0, 0], [0, 1]], dtype=complex),
    np.array([[0, 0], [1, 0]], dtype=complex),
    np.array([[0, 0], [1j, 0]], dtype=complex),
)


def _t_matrix(t: np.ndarray) -> np.ndarray:
    return np.array([[t[0], 0.0], [t[2] + 1j * t[3], t[1]]], dtype=complex)


def rho_from_params(t) -> np.ndarray:
    """rho(T) = T^dag T / tr(T^dag T) for the lower-triangular 4-parameter T."""
    tm = _t_matrix(np.asarray(t, dtype=float))
    b = tm.conj().T @ tm
    return b / np.trace(b).real


def _params_from_rho(rho: np.ndarray) -> np.ndarray:
    """Factor a strictly positive rho as T^dag T with T lower triangular."""
    t1 = np.sqrt(max(rho[1, 1].real, 1e-30))
    c = rho[1, 0] / t1
    t0 = np.sqrt(max(rho[0, 0].real - (c * c.conjugate()).real, 0.0))
    return np.array([t0, t1, c.real, c.imag])


def _psd_project(rho: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(rho)
    vals = np.clip(vals, 0.0, None)
    vals = vals / vals.sum()
    return (vecs * vals) @ vecs.conj().T


def negative_log_likelihood(t, counts, projectors, shots) -> tuple[float, np.ndarray]:
    """Poisson negative log-likelihood per recorded count, with gradient.

    The model is counts[j] ~ Poisson(shots * p_j(rho(t))).  The value and
    gradient are scaled by 1/sum(counts) so the stationarity tolerance is
    independent of the shot budget.
    """
    t = np.asarray(t, dtype=float)
    tm = _t_matrix(t)
    b = tm.conj().T @ tm
    tau = np.trace(b).real
    rho = b / tau
    p = np.einsum("sij,ji->s", projectors, rho).real
    p_safe = np.clip(p, 1e-15, None)
    scale = max(1.0, float(counts.sum()))
    value = -(float(counts @ np.log(p_safe)) - shots * float(p.sum())) / scale
    coeff = counts / p_safe - shots
    grad = np.empty(4)
    for k, dt in enumerate(_DT):
        db = dt.conj().T @ tm + tm.conj().T @ dt
        drho = (db - rho * np.trace(db).real) / tau
        dp = np.einsum("sij,ji->s", projectors, drho).real
        grad[k] = -float(coeff @ dp) / scale
    return value, grad


def _newton_polish(t, counts, projectors, shots, max_iter: int = 8) -> np.ndarray:
    """Drive the likelihood gradient toward machine precision.

    L-BFGS-B stalls around gradient norms of 1e-8, which leaves state
    errors large enough to show up in process fidelities against
    rank-deficient channels.  A few damped Newton steps fix that; the
    normalization of rho(T) makes the objective scale-invariant in T, so
    the Hessian is singular along the radial direction and the step is
    taken by least squares (the gradient is orthogonal to that direction).
    """
    t = np.asarray(t, dtype=float)
    value, grad = negative_log_likelihood(t, counts, projectors, shots)
    for _ in range(max_iter):
        grad_norm = np.linalg.norm(grad)
        if grad_norm < 1e-13:
            break
        hess = np.empty((4, 4))
        for k in range(4):
            h = 1e-7 * max(1.0, abs(t[k]))
            t_up, t_dn = t.copy(), t.copy()
            t_up[k] += h
            t_dn[k] -= h
            _, g_up = negative_log_likelihood(t_up, counts, projectors, shots)
            _, g_dn = negative_log_likelihood(t_dn, counts, projectors, shots)
            hess[:, k] = (g_up - g_dn) / (2.0 * h)
        hess = (hess + hess.T) / 2.0
        step = np.linalg.lstsq(hess, -grad, rcond=1e-12)[0]
        improved = False
        for _ in range(25):
            candidate = t + step
            cand_value, cand_grad = negative_log_likelihood(candidate, counts, projectors, shots)
            if cand_value < value or (cand_value == value and np.linalg.norm(cand_grad) < grad_norm):
                t, value, grad = candidate, cand_value, cand_grad
                improved = True
                break
            step = step / 2.0
        if not improved:
            break
    return t


def qst_mle(
    record: MeasurementRecord,
    restarts: int = 16,
    grad_tol: float = 1e-8,
    restart_seed: int = 0,
) -> np.ndarray:
    """Maximum-likelihood state estimate from a six-setting record.

    Maximizes the Poisson log-likelihood over rho(T); the Poisson law is
    exact for the counting model in `sample_counts`, and the likelihood
    is concave in rho, so any stationary point is the global optimum.
    The first start is the PSD-projected linear estimate; if the
    optimizer does not reach gradient norm < `grad_tol` it is restarted
    from seeded random perturbations, up to `restarts` attempts in total,
    after which a ConvergenceError carrying the best iterate is raised.
    """
    _require_full_settings(record)
    projs = np.stack([projector(lbl) for lbl in record.settings])
    counts = record.counts.astype(float)
    shots = float(record.shots)

    rho_lin = _psd_project(qst_linear(record).rho)
    rho_init = (1.0 - 1e-6) * rho_lin + 1e-6 * IDENTITY / 2.0
    t_init = _params_from_rho(rho_init)

    rng = np.random.default_rng(restart_seed)
    best_value = np.inf
    best_t = t_init
    best_grad = np.inf
    for attempt in range(restarts):
        t_start = t_init if attempt == 0 else t_init + rng.normal(scale=0.1, size=4)
        result = minimize(
            negative_log_likelihood,
            t_start,
            args=(counts, projs, shots),
            method="L-BFGS-B",
            jac=True,
            options={"maxiter": 2000, "ftol": 1e-16, "gtol": 1e-12},
        )
        t_opt = _newton_polish(result.x, counts, projs, shots)
        value, grad = negative_log_likelihood(t_opt, counts, projs, shots)
        grad_norm = float(np.linalg.norm(grad))
        if value < best_value:
            best_value, best_t, best_grad = value, t_opt, grad_norm
        if grad_norm < grad_tol:
            return rho_from_params(t_opt)
    raise ConvergenceError(
        f"likelihood optimizer stalled at gradient norm {best_grad:.3e} after {restarts} restarts",
        rho_from_params(best_t),
        best_grad,
    )


# --- process tomography ------------------------------------------------


def apply_chi(chi, rho) -> np.ndarray:
    """Apply the channel sum_{m,n} chi[m,n] E_m rho E_n^dag."""
    mat = chi.matrix if isinstance(chi, ChiMatrix) else np.asarray(chi, dtype=complex)
    rho = np.asarray(rho, dtype=complex)
    out = np.zeros((2, 2), dtype=complex)
    for m in range(4):
        for n in range(4):
            if mat[m, n] != 0:
                out += mat[m, n] * (CHI_BASIS[m] @ rho @ CHI_BASIS[n].conj().T)
    return out


def qpt(rho_h, rho_v, rho_p, rho_r) -> ChiMatrix:
    """Process matrix from the channel outputs for the h, v, p, r inputs.

    Linearity turns the four outputs into the channel images of I, X, Y
    and Z, which fix the superoperator; chi follows by projecting onto
    the Pauli product basis.  The raw solution is then projected onto the
    completely positive cone (negative eigenvalues clipped, trace
    renormalized to 1) and the clipped mass is kept as a quality
    diagnostic; more than 0.1 of clipped mass signals inconsistent
    inputs and triggers a warning.
    """
    rho_h = np.asarray(rho_h, dtype=complex)
    rho_v = np.asarray(rho_v, dtype=complex)
    rho_p = np.asarray(rho_p, dtype=complex)
    rho_r = np.asarray(rho_r, dtype=complex)

    image_i = rho_h + rho_v
    image_z = rho_h - rho_v
    image_x = 2.0 * rho_p - image_i
    image_y = 2.0 * rho_r - image_i
    images = (image_i, image_x, image_y, image_z)

    # superoperator on column-stacked rho: S vec(B) = vec(E(B))
    basis_cols = np.column_stack([b.flatten(order="F") for b in CHI_BASIS])
    image_cols = np.column_stack([im.flatten(order="F") for im in images])
    superop = image_cols @ np.linalg.inv(basis_cols)

    chi = np.empty((4, 4), dtype=complex)
    for m in range(4):
        for n in range(4):
            pauli_pair = np.kron(CHI_BASIS[n].conj(), CHI_BASIS[m])
            chi[m, n] = np.trace(pauli_pair.conj().T @ superop) / 4.0
    chi = (chi + chi.conj().T) / 2.0

    vals, vecs = np.linalg.eigh(chi)
    clipped = float(-vals[vals < 0].sum())
    vals = np.clip(vals, 0.0, None)
    chi_psd = (vecs * vals) @ vecs.conj().T
    chi_psd /= np.trace(chi_psd).real
    if clipped > 0.1:
        warnings.warn(
            f"chi reconstruction clipped {clipped:.3f} of negative mass; inputs look inconsistent",
            stacklevel=2,
        )
    return ChiMatrix(chi_psd, clipped)


def qpt_from_scheme_outputs(outputs: dict) -> ChiMatrix:
    """qpt() taking a {'h': rho, 'v': rho, 'p': rho, 'r': rho} mapping."""
    return qpt(*(outputs[lbl] for lbl in _QPT_INPUTS))


def process_fidelity(a, b) -> float:
    """Uhlmann fidelity between two trace-normalized chi matrices.

    Treats the chi matrices as states on the 4-dimensional operator
    space; equals 1 exactly when the channels coincide.
    """
    mat_a = a.matrix if isinstance(a, ChiMatrix) else np.asarray(a, dtype=complex)
    mat_b = b.matrix if isinstance(b, ChiMatrix) else np.asarray(b, dtype=complex)
    mat_a = mat_a / np.trace(mat_a).real
    mat_b = mat_b / np.trace(mat_b).real
    root = _sqrtm_psd(mat_a)
    f = np.trace(_sqrtm_psd(root @ mat_b @ root)).real ** 2
    return float(min(max(f, 0.0), 1.0))


def trace_preservation_residual(chi) -> float:
    """Norm of sum_{m,n} chi[m,n] E_n^dag E_m - I (zero for TP channels)."""
    mat = chi.matrix if isinstance(chi, ChiMatrix) else np.asarray(chi, dtype=complex)
    acc = np.zeros((2, 2), dtype=complex)
    for m in range(4):
        for n in range(4):
            acc += mat[m, n] * (CHI_BASIS[n].conj().T @ CHI_BASIS[m])
    return float(np.linalg.norm(acc - IDENTITY))


def channel_from_chi(chi) -> StokesChannel:
    """Affine Stokes map of the channel encoded by a chi matrix."""
    outputs = [apply_chi(chi, density_from_jones(JONES_STATES[lbl])) for lbl in _QPT_INPUTS]
    return affine_from_outputs(*outputs)
