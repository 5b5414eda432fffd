"""Dense complex operator algebra for small open quantum systems.

Operators are plain complex numpy arrays. Energies are dimensionless,
measured in units of the qubit half-splitting (hbar = k_B = 1).
"""

from __future__ import annotations

import warnings
from typing import NamedTuple

import numpy as np
import scipy.linalg as sla

# absolute entrywise tolerance for (anti-)Hermiticity preconditions
HERMITICITY_ATOL = 1e-10

# a pivot below this fraction of max|a| marks a system as singular
SINGULAR_PIVOT_RTOL = 1e-14

# relative residual a direct solve must reach
SOLVE_RESIDUAL_RTOL = 1e-8


class HermiticityError(ValueError):
    """An operator violates its (anti-)Hermiticity requirement."""


class TruncationError(ValueError):
    """Bosonic truncation level too small to be meaningful."""


class SingularSystemError(RuntimeError):
    """Direct factorization hit a numerically singular matrix."""


class EigenSystem(NamedTuple):
    """Hermitian eigendecomposition, eigenvalues ascending.

    ``values[k]`` is the k-th eigenvalue and ``vectors[:, k]`` the matching
    eigenvector; the column phases are fixed so the first component above
    the noise floor is real positive, making downstream tensors
    reproducible across runs.
    """

    values: np.ndarray
    vectors: np.ndarray


def hermiticity_defect(a: np.ndarray) -> float:
    """Largest entrywise deviation of ``a`` from its conjugate transpose."""
    return float(np.abs(a - a.conj().T).max())


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Tensor product of two square operators."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"left operand is not square: shape {a.shape}")
    if b.ndim != 2 or b.shape[0] != b.shape[1]:
        raise ValueError(f"right operand is not square: shape {b.shape}")
    return np.kron(a, b)


def pauli(kind: str) -> np.ndarray:
    """One of the 2x2 Pauli matrices ('x', 'y', 'z') or 'identity'."""
    if kind == "x":
        return np.array([[0, 1], [1, 0]], dtype=complex)
    if kind == "y":
        return np.array([[0, -1j], [1j, 0]], dtype=complex)
    if kind == "z":
        return np.array([[1, 0], [0, -1]], dtype=complex)
    if kind == "identity":
        return np.eye(2, dtype=complex)
    raise ValueError(f"unknown Pauli kind {kind!r}")


def ladder(m: int) -> np.ndarray:
    """Truncated bosonic annihilation operator on an m-level Fock space."""
    if m < 2:
        raise TruncationError(f"need at least 2 levels, got {m}")
    a = np.zeros((m, m), dtype=complex)
    ns = np.arange(m - 1)
    a[ns, ns + 1] = np.sqrt(ns + 1.0)
    return a


def _fix_phases(vectors: np.ndarray, floor: float = 1e-8) -> np.ndarray:
    """Rotate each column so its first component above ``floor`` is real positive."""
    v = vectors.copy()
    for k in range(v.shape[1]):
        col = v[:, k]
        idx = np.flatnonzero(np.abs(col) > floor)
        if idx.size:
            pivot = col[idx[0]]
            v[:, k] = col * (pivot.conjugate() / abs(pivot))
    return v


def herm_eig(h: np.ndarray, atol: float = HERMITICITY_ATOL) -> EigenSystem:
    """Eigendecomposition of a Hermitian operator.

    Raises HermiticityError (reporting the measured asymmetry) if ``h``
    is not Hermitian within ``atol``.
    """
    h = np.asarray(h, dtype=complex)
    defect = hermiticity_defect(h)
    if defect > atol:
        raise HermiticityError(
            f"matrix is not Hermitian: max |h - h^dag| = {defect:.3e} > {atol:.1e}"
        )
    values, vectors = np.linalg.eigh(h)
    return EigenSystem(values, _fix_phases(vectors))


def unitary_exp(k: np.ndarray, atol: float = HERMITICITY_ATOL) -> np.ndarray:
    """exp(k) for anti-Hermitian k, via the spectrum of the Hermitian i*k.

    The spectral route is stable for anti-Hermitian generators and keeps
    the result unitary to roundoff.
    """
    k = np.asarray(k, dtype=complex)
    defect = float(np.abs(k + k.conj().T).max())
    if defect > atol:
        raise HermiticityError(
            f"generator is not anti-Hermitian: max |k + k^dag| = {defect:.3e} > {atol:.1e}"
        )
    values, vectors = herm_eig(1j * k, atol=np.inf)
    # i*k = V diag(values) V^dag  =>  exp(k) = V diag(exp(-i*values)) V^dag
    return (vectors * np.exp(-1j * values)) @ vectors.conj().T


def solve_linear(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve a x = b by LU with partial pivoting.

    Raises SingularSystemError when a pivot falls below
    ``SINGULAR_PIVOT_RTOL * max|a|`` or the relative residual cannot be
    brought under ``SOLVE_RESIDUAL_RTOL`` (one refinement step is tried).
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"matrix is not square: shape {a.shape}")
    if b.shape[0] != a.shape[0]:
        raise ValueError(f"rhs length {b.shape[0]} != matrix dim {a.shape[0]}")
    scale = float(np.abs(a).max())
    with warnings.catch_warnings():
        # singularity is detected below through the pivot magnitude
        warnings.simplefilter("ignore", sla.LinAlgWarning)
        lu, piv = sla.lu_factor(a, check_finite=False)
    min_pivot = float(np.abs(np.diagonal(lu)).min())
    if min_pivot < SINGULAR_PIVOT_RTOL * scale:
        raise SingularSystemError(
            f"singular system: min pivot {min_pivot:.3e} < "
            f"{SINGULAR_PIVOT_RTOL:.1e} * max|a| = {SINGULAR_PIVOT_RTOL * scale:.3e}"
        )
    x = sla.lu_solve((lu, piv), b, check_finite=False)
    norm_b = float(np.linalg.norm(b))
    if norm_b == 0.0:
        return x
    resid = float(np.linalg.norm(b - a @ x)) / norm_b
    if resid > SOLVE_RESIDUAL_RTOL:
        x = x + sla.lu_solve((lu, piv), b - a @ x, check_finite=False)
        resid = float(np.linalg.norm(b - a @ x)) / norm_b
        if resid > SOLVE_RESIDUAL_RTOL:
            raise SingularSystemError(
                f"solve residual {resid:.3e} exceeds {SOLVE_RESIDUAL_RTOL:.1e} "
                "after refinement; system is numerically singular"
            )
    return x
