"""Collective-mode (reaction-coordinate) embedding of the two-bath qubit.

One harmonic mode is extracted from each bath and absorbed into the
system, giving an extended Hamiltonian on qubit x mode_L x mode_R with
the residual baths coupling through the mode displacement operators.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .linalg import EigenSystem, herm_eig, kron, ladder, pauli, unitary_exp
from .model import JunctionSpec

DEFAULT_POLARON_TRUNCATION = 40
DEFAULT_SPECTRUM_LEVELS = 10


def coupling_operator(angle: float) -> np.ndarray:
    """Qubit coupling operator cos(angle)*sigma_z + sin(angle)*sigma_x."""
    return np.cos(angle) * pauli("z") + np.sin(angle) * pauli("x")


@dataclass(frozen=True)
class RCModel:
    """Extended system after the embedding.

    h_s_rc      : Hamiltonian on qubit x mode_L x mode_R (dim 2 M^2)
    s_res_left  : displacement operator of the left mode in the full space
    s_res_right : displacement operator of the right mode in the full space
    """

    h_s_rc: np.ndarray
    s_res_left: np.ndarray
    s_res_right: np.ndarray
    spec: JunctionSpec


def _embedded_parts(spec: JunctionSpec):
    m = spec.truncation
    a = ladder(m)
    x = a + a.conj().T
    num = a.conj().T @ a
    im = np.eye(m, dtype=complex)
    i2 = pauli("identity")
    return m, x, num, im, i2


def build_rc_model(spec: JunctionSpec) -> RCModel:
    """Extended Hamiltonian and residual coupling operators for a junction.

    Tensor ordering is fixed as qubit x mode_L x mode_R so that dissipator
    indexing and vectorization are unambiguous.
    """
    _, x, num, im, i2 = _embedded_parts(spec)
    s_left = coupling_operator(spec.left.angle)
    s_right = coupling_operator(spec.right.angle)
    h = (
        spec.delta * kron(pauli("z"), kron(im, im))
        + spec.left.omega * kron(i2, kron(num, im))
        + spec.right.omega * kron(i2, kron(im, num))
        + spec.left.lam * kron(s_left, kron(x, im))
        + spec.right.lam * kron(s_right, kron(im, x))
    )
    s_res_left = kron(i2, kron(x, im))
    s_res_right = kron(i2, kron(im, x))
    return RCModel(h, s_res_left, s_res_right, spec)


def polaron_generator(spec: JunctionSpec) -> np.ndarray:
    """Anti-Hermitian generator of the mode-displacement (polaron) unitary.

    sum over baths of (lam/omega) * S_bath x (a^dag - a), embedded in the
    full space with the standard ordering.
    """
    _, _, _, im, i2 = _embedded_parts(spec)
    a = ladder(spec.truncation)
    p = a.conj().T - a
    k = spec.left.lam / spec.left.omega * kron(
        coupling_operator(spec.left.angle), kron(p, im)
    )
    k += spec.right.lam / spec.right.omega * kron(
        coupling_operator(spec.right.angle), kron(im, p)
    )
    return k


def polaron_spectrum(
    spec: JunctionSpec,
    lam_values,
    m_large: int = DEFAULT_POLARON_TRUNCATION,
    n_levels: int = DEFAULT_SPECTRUM_LEVELS,
) -> np.ndarray:
    """Low-lying spectrum of the polaron-frame extended Hamiltonian vs coupling.

    For each lam in ``lam_values`` (applied to both baths), the extended
    Hamiltonian is conjugated with the displacement unitary exp(lam * K1)
    built in the truncated space, and the lowest ``n_levels`` eigenvalues
    are returned, one row per lam.

    The displacement generator is linear in lam, so a single Hermitian
    eigendecomposition of i*K1 serves the whole grid; each unitary equals
    unitary_exp(lam * K1) to roundoff.
    """
    if m_large < spec.truncation:
        raise ValueError(
            f"m_large = {m_large} must be >= the transport truncation "
            f"{spec.truncation}"
        )
    dim = 2 * m_large**2
    if n_levels > dim:
        raise ValueError(f"n_levels = {n_levels} exceeds dimension {dim}")
    big = replace(spec, truncation=m_large)
    h0 = build_rc_model(big.with_couplings(0.0)).h_s_rc
    h1 = build_rc_model(big.with_couplings(1.0)).h_s_rc - h0
    k1 = polaron_generator(big.with_couplings(1.0))
    freqs, basis = herm_eig(1j * k1, atol=1e-8)
    out = np.empty((len(lam_values), n_levels))
    for i, lam in enumerate(lam_values):
        u = (basis * np.exp(-1j * lam * freqs)) @ basis.conj().T
        h_polaron = u @ (h0 + lam * h1) @ u.conj().T
        out[i] = np.linalg.eigvalsh(h_polaron)[:n_levels]
    return out


def polaron_unitary(spec: JunctionSpec) -> np.ndarray:
    """Displacement unitary exp(K) for the junction's own couplings."""
    return unitary_exp(polaron_generator(spec))
