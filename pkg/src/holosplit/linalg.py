"""Dense complex linear algebra primitives used throughout the package.

Matrices are plain numpy arrays with dtype complex128 and are never mutated.
The Frobenius norm is the canonical matrix distance everywhere.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Tolerances",
    "DEFAULT_TOL",
    "as_complex_matrix",
    "commutator_norm",
    "expm_skew",
    "frobenius",
    "hermitian_part",
    "loewdin_orthonormalize",
    "min_eigenvalue_hermitian",
    "polar_decompose",
    "skew_part",
]


@dataclass(frozen=True)
class Tolerances:
    """Numerical thresholds shared by the whole pipeline.

    structure_tol bounds Hermiticity/unitarity residuals, positivity_tol is
    the threshold on the in-phase margin, and separation_tol is the
    classification threshold of the separability analysis.
    """

    structure_tol: float = 1e-10
    positivity_tol: float = 1e-9
    separation_tol: float = 1e-6

    def __post_init__(self):
        for name in ("structure_tol", "positivity_tol", "separation_tol"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")


DEFAULT_TOL = Tolerances()


def as_complex_matrix(a) -> np.ndarray:
    """Coerce to a 2d complex array, rejecting non-finite entries."""
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2:
        raise ValueError(f"expected a matrix, got array of shape {m.shape}")
    if not np.isfinite(m).all():
        raise ValueError("matrix contains non-finite entries")
    return m


def _require_square(m: np.ndarray, name: str = "matrix") -> None:
    if m.shape[0] != m.shape[1]:
        raise ValueError(f"{name} must be square, got shape {m.shape}")


def frobenius(a) -> float:
    return float(np.linalg.norm(a))


def hermitian_part(a: np.ndarray) -> np.ndarray:
    return (a + a.conj().swapaxes(-1, -2)) / 2


def skew_part(a: np.ndarray) -> np.ndarray:
    return (a - a.conj().swapaxes(-1, -2)) / 2


def expm_skew(x, *, structure_tol: float = DEFAULT_TOL.structure_tol) -> np.ndarray:
    """exp(x) for anti-Hermitian x, via unitary diagonalization of i*x.

    The result is unitary to roundoff, a property the holonomy identities
    downstream rely on. Inputs whose anti-Hermiticity residual exceeds
    structure_tol are rejected; below it the skew part is taken first to
    suppress roundoff drift.
    """
    x = as_complex_matrix(x)
    _require_square(x)
    if frobenius(x + x.conj().T) > structure_tol:
        raise ValueError("input is not anti-Hermitian within tolerance")
    h = hermitian_part(1j * skew_part(x))
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * w)) @ v.conj().T


def expm_skew_stack(xs: np.ndarray) -> np.ndarray:
    """Batched exp() of a stack (..., n, n) of anti-Hermitian matrices.

    No validation; internal fast path. Callers guarantee skewness.
    """
    h = hermitian_part(1j * skew_part(xs))
    w, v = np.linalg.eigh(h)
    return np.einsum("...ij,...j,...kj->...ik", v, np.exp(-1j * w), v.conj())


def polar_decompose(u) -> tuple[np.ndarray, np.ndarray]:
    """Left polar factorization u = p @ q.

    p is Hermitian positive semidefinite and q unitary, obtained from the
    singular value decomposition u = x @ diag(s) @ yh as p = x s x^dag,
    q = x yh.
    """
    u = as_complex_matrix(u)
    _require_square(u)
    try:
        x, s, yh = np.linalg.svd(u)
    except np.linalg.LinAlgError as exc:
        raise ValueError(f"SVD of polar input failed: {exc}") from exc
    p = hermitian_part((x * s) @ x.conj().T)
    q = x @ yh
    return p, q


def min_eigenvalue_hermitian(
    o, *, structure_tol: float = DEFAULT_TOL.structure_tol
) -> float:
    """Smallest eigenvalue of the Hermitian matrix o.

    o is symmetrized as (o + o^dag)/2 before the eigenvalue solve; inputs
    with Hermiticity residual above structure_tol are rejected.
    """
    o = as_complex_matrix(o)
    _require_square(o)
    if frobenius(o - o.conj().T) > structure_tol:
        raise ValueError("input is not Hermitian within tolerance")
    return float(np.linalg.eigvalsh(hermitian_part(o)).min())


def commutator_norm(a, b) -> float:
    """Frobenius norm of the commutator a@b - b@a."""
    a = as_complex_matrix(a)
    b = as_complex_matrix(b)
    _require_square(a, "first argument")
    _require_square(b, "second argument")
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return frobenius(a @ b - b @ a)


def loewdin_orthonormalize(frame: np.ndarray) -> np.ndarray:
    """Symmetric (Loewdin) orthonormalization of the columns of frame.

    Returns frame @ (frame^dag frame)^(-1/2). Unlike Gram-Schmidt this
    treats all columns on the same footing.
    """
    g = frame.conj().T @ frame
    w, v = np.linalg.eigh(hermitian_part(g))
    if w.min() <= 0.0:
        raise ValueError("frame is numerically rank deficient")
    inv_sqrt = (v * (1.0 / np.sqrt(w))) @ v.conj().T
    return frame @ inv_sqrt
