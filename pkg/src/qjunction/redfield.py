"""Redfield generator assembly, steady-state solves, and heat currents.

The generator acts on column-stacked density matrices: vec(rho) keeps
rho[i, j] at position j*d + i, so vec(A rho B) = kron(B.T, A) vec(rho).
Dissipators are built from energy-eigenbasis-filtered coupling operators;
the imaginary (Lamb-shift) part of the bath correlation is dropped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.linalg as sla
import scipy.sparse.linalg as spla
from scipy.integrate import solve_ivp

from .embedding import build_rc_model
from .linalg import (
    EigenSystem,
    SingularSystemError,
    herm_eig,
    hermiticity_defect,
    solve_linear,
)
from .model import JunctionSpec
from .spectral import SpectralDensity, rate_function

# largest Hilbert dimension for which the dense generator is materialized
DENSE_DIM_LIMIT = 72

# dimensions at or below this are solved directly even in 'auto' mode
SMALL_DENSE_DIM = 12

# residual above which a steady state is flagged ill-conditioned
RESIDUAL_WARN_ATOL = 1e-6

COUPLING_HERM_ATOL = 1e-12


class NonuniqueSteadyStateError(RuntimeError):
    """The trace-corrected system is singular: degenerate stationary manifold."""


class StiffnessError(RuntimeError):
    """Adaptive time integration failed (step size underflow)."""


class _IterativeFailure(RuntimeError):
    pass


@dataclass(frozen=True)
class DissipatorSpec:
    """A bath contact: Hermitian coupling operator plus its rate function.

    ``rate`` maps a transition frequency (positive = emission into the
    bath favoured) to a nonnegative rate; it may be numpy-vectorized.
    """

    s: np.ndarray
    rate: Callable
    label: str

    def __post_init__(self):
        defect = hermiticity_defect(self.s)
        if defect > COUPLING_HERM_ATOL:
            raise ValueError(
                f"coupling operator for bath {self.label!r} is not Hermitian: "
                f"max |s - s^dag| = {defect:.3e}"
            )


def _rate_matrix(rate: Callable, bohr: np.ndarray) -> np.ndarray:
    """Evaluate a rate function on a matrix of transition frequencies."""
    try:
        g = np.asarray(rate(bohr), dtype=float)
        if g.shape == bohr.shape:
            return g
    except (TypeError, ValueError):
        pass
    out = np.empty(bohr.shape)
    for idx in np.ndindex(bohr.shape):
        out[idx] = rate(float(bohr[idx]))
    return out


def filtered_operator(d: DissipatorSpec, eig: EigenSystem) -> np.ndarray:
    """Rate-filtered coupling operator, returned in the computational basis.

    In the energy eigenbasis the (j, k) element of the coupling operator is
    multiplied by the rate at the transition frequency w_k - w_j.
    """
    w, v = eig
    s_eig = v.conj().T @ d.s @ v
    bohr = w[None, :] - w[:, None]
    filt = s_eig * _rate_matrix(d.rate, bohr)
    return v @ filt @ v.conj().T


def _dissipator_apply(s, st, rho):
    return (
        st @ rho @ s
        + s @ rho @ st.conj().T
        - s @ st @ rho
        - rho @ st.conj().T @ s
    )


@dataclass
class Liouvillian:
    """Vectorized Redfield generator with per-bath dissipator access.

    The action on density matrices is always available matrix-free via
    ``apply``/``apply_bath``; the dense d^2 x d^2 generator is built on
    demand (and only for dimensions up to ``dense_limit``).
    """

    dim: int
    eig: EigenSystem
    h: np.ndarray
    baths: tuple[DissipatorSpec, ...]
    filtered: dict[str, np.ndarray]
    dense_limit: int = DENSE_DIM_LIMIT
    _generator: np.ndarray | None = field(default=None, repr=False)

    def apply(self, rho: np.ndarray) -> np.ndarray:
        out = -1j * (self.h @ rho - rho @ self.h)
        for bath in self.baths:
            out += _dissipator_apply(bath.s, self.filtered[bath.label], rho)
        return out

    def apply_bath(self, label: str, rho: np.ndarray) -> np.ndarray:
        bath = self._bath(label)
        return _dissipator_apply(bath.s, self.filtered[label], rho)

    def coherent_block(self) -> np.ndarray:
        idm = np.eye(self.dim, dtype=complex)
        return -1j * (np.kron(idm, self.h) - np.kron(self.h.T, idm))

    def bath_block(self, label: str) -> np.ndarray:
        s = self._bath(label).s
        st = self.filtered[label]
        idm = np.eye(self.dim, dtype=complex)
        return (
            np.kron(s.T, st)
            + np.kron(st.conj(), s)
            - np.kron(idm, s @ st)
            - np.kron((st.conj().T @ s).T, idm)
        )

    def generator(self) -> np.ndarray:
        if self._generator is None:
            if self.dim > self.dense_limit:
                raise ValueError(
                    f"dense generator disabled for dim {self.dim} > "
                    f"{self.dense_limit}; use the matrix-free interface"
                )
            gen = self.coherent_block()
            for bath in self.baths:
                gen += self.bath_block(bath.label)
            self._generator = gen
        return self._generator

    def _bath(self, label: str) -> DissipatorSpec:
        for bath in self.baths:
            if bath.label == label:
                return bath
        raise KeyError(f"unknown bath label {label!r}")


def assemble_liouvillian(
    h: np.ndarray,
    baths: Sequence[DissipatorSpec],
    dense: bool = False,
    dense_limit: int = DENSE_DIM_LIMIT,
) -> Liouvillian:
    """Build the Redfield generator for a Hamiltonian and a list of contacts."""
    h = np.asarray(h, dtype=complex)
    dim = h.shape[0]
    for bath in baths:
        if bath.s.shape != h.shape:
            raise ValueError(
                f"coupling operator for bath {bath.label!r} has shape "
                f"{bath.s.shape}, Hamiltonian has {h.shape}"
            )
    eig = herm_eig(h)
    filtered = {b.label: filtered_operator(b, eig) for b in baths}
    liouv = Liouvillian(dim, eig, h, tuple(baths), filtered, dense_limit)
    if dense:
        liouv.generator()
    return liouv


@dataclass(frozen=True)
class NessResult:
    """Steady state with currents and solver diagnostics.

    asymmetry is the Frobenius norm of (rho - rho^dag) before the final
    symmetrization; min_eigenvalue records how far the Redfield state
    strays from positivity (small negative values are expected at strong
    coupling and are reported, not rejected).
    """

    rho: np.ndarray
    j_left: float
    j_right: float
    residual: float
    min_eigenvalue: float
    asymmetry: float
    warnings: tuple[str, ...] = ()


def heat_current(l: Liouvillian, rho: np.ndarray, h: np.ndarray, label: str) -> float:
    """Energy flow from bath ``label`` into the system, Tr[D_label(rho) h].

    Positive values flow into the system. The imaginary part must be
    numerical noise (<= 1e-9) or the inputs are inconsistent.
    """
    val = complex(np.trace(l.apply_bath(label, rho) @ h))
    if abs(val.imag) > 1e-9:
        raise ValueError(
            f"heat current has non-negligible imaginary part {val.imag:.3e}; "
            "check that rho is Hermitian and h matches the assembled generator"
        )
    return val.real


def _finish(l: Liouvillian, rho_raw: np.ndarray) -> NessResult:
    asym = float(np.linalg.norm(rho_raw - rho_raw.conj().T))
    rho = 0.5 * (rho_raw + rho_raw.conj().T)
    trace = float(np.trace(rho).real)
    if abs(trace) < 1e-12:
        raise NonuniqueSteadyStateError(
            "solved state has vanishing trace; stationary manifold is degenerate"
        )
    rho = rho / trace
    residual = float(np.linalg.norm(l.apply(rho)))
    min_eig = float(np.linalg.eigvalsh(rho).min())
    j_left = heat_current(l, rho, l.h, "L") if _has_bath(l, "L") else 0.0
    j_right = heat_current(l, rho, l.h, "R") if _has_bath(l, "R") else 0.0
    warnings = ()
    if residual > RESIDUAL_WARN_ATOL:
        warnings = (f"ill-conditioned: residual {residual:.3e}",)
    return NessResult(rho, j_left, j_right, residual, min_eig, asym, warnings)


def _has_bath(l: Liouvillian, label: str) -> bool:
    return any(b.label == label for b in l.baths)


def _ness_dense(l: Liouvillian) -> NessResult:
    d = l.dim
    corrected = l.generator().copy()
    # trace constraint replaces the zero mode: add |e0>><<identity|
    corrected[0, :: d + 1] += 1.0
    rhs = np.zeros(d * d, dtype=complex)
    rhs[0] = 1.0
    try:
        x = solve_linear(corrected, rhs)
    except SingularSystemError as exc:
        raise NonuniqueSteadyStateError(
            f"trace-corrected generator is singular ({exc}); "
            "the stationary state is not unique"
        ) from exc
    return _finish(l, x.reshape((d, d), order="F"))


def _eigenbasis_operators(l: Liouvillian):
    w, v = l.eig
    ops = []
    for bath in l.baths:
        s_e = v.conj().T @ bath.s @ v
        st_e = v.conj().T @ l.filtered[bath.label] @ v
        ops.append((s_e, st_e))
    return w, v, ops


def _secular_preconditioner(w, ops, dim):
    """Invert the population block and coherence diagonal of the generator.

    The residual-bath dissipator is a weak perturbation on top of the
    coherent splitting, so the secular skeleton captures the stiff part
    of the corrected system and leaves GMRES a well-clustered remainder.
    """
    pop = np.zeros((dim, dim))
    cdiag = (-1j * (w[:, None] - w[None, :])).astype(complex)
    for s_e, st_e in ops:
        pop += 2.0 * (st_e * s_e.conj()).real
        loss = np.einsum("bk,kb->b", s_e, st_e).real
        loss += np.einsum("kb,kb->b", st_e.conj(), s_e).real
        pop -= np.diag(loss)
        cdiag += np.diag(st_e)[:, None] * np.diag(s_e)[None, :]
        cdiag += np.diag(s_e)[:, None] * np.diag(st_e).conj()[None, :]
        cdiag -= np.diag(s_e @ st_e)[:, None]
        cdiag -= np.diag(st_e.conj().T @ s_e)[None, :]
    pop_corrected = pop.astype(complex)
    pop_corrected[0, :] += 1.0
    singular_values = np.linalg.svd(pop_corrected, compute_uv=False)
    if singular_values[-1] < 1e-12 * singular_values[0]:
        raise NonuniqueSteadyStateError(
            "population rate block is singular even with the trace "
            "constraint; the stationary manifold is degenerate"
        )
    lu, piv = sla.lu_factor(pop_corrected, check_finite=False)
    small = np.abs(cdiag) < 1e-30
    cdiag[small] = 1.0
    diag_idx = np.diag_indices(dim)

    def precondition(vec):
        r = vec.reshape(dim, dim).copy()
        pops = sla.lu_solve((lu, piv), np.diagonal(r).copy(), check_finite=False)
        r /= cdiag
        r[diag_idx] = pops
        return r.ravel()

    return precondition


def _ness_iterative(l: Liouvillian, rtol: float) -> NessResult:
    d = l.dim
    w, v, ops = _eigenbasis_operators(l)
    bohr = -1j * (w[:, None] - w[None, :])

    def l_apply_eig(rho):
        out = bohr * rho
        for s_e, st_e in ops:
            out += _dissipator_apply(s_e, st_e, rho)
        return out

    def corrected_mv(vec):
        rho = vec.reshape(d, d)
        y = l_apply_eig(rho)
        y[0, 0] += np.trace(rho)
        return y.ravel()

    precondition = _secular_preconditioner(w, ops, d)
    op = spla.LinearOperator((d * d, d * d), matvec=corrected_mv, dtype=complex)
    pre = spla.LinearOperator((d * d, d * d), matvec=precondition, dtype=complex)
    rhs = np.zeros(d * d, dtype=complex)
    rhs[0] = 1.0
    x, info = spla.gmres(
        op, rhs, rtol=rtol, atol=0.0, restart=100, maxiter=30, M=pre
    )
    if info != 0:
        resid = float(np.linalg.norm(corrected_mv(x) - rhs))
        raise _IterativeFailure(
            f"GMRES did not reach rtol {rtol:.1e} (info={info}, "
            f"residual {resid:.3e})"
        )
    rho_eig = x.reshape(d, d)
    return _finish(l, v @ rho_eig @ v.conj().T)


def ness_solve(
    l: Liouvillian,
    method: str = "auto",
    iter_rtol: float = 1e-10,
) -> NessResult:
    """Stationary state of the generator under the unit-trace constraint.

    The zero mode is fixed by adding a rank-1 coupling of the trace onto
    one basis state and solving the resulting regular linear system.
    'dense' factorizes the full generator; 'iterative' runs preconditioned
    GMRES on the matrix-free corrected system (residual <= iter_rtol);
    'auto' uses the direct solve for small systems and otherwise the
    iterative route with a dense fallback when the dimension allows it.
    """
    if method not in ("auto", "dense", "iterative"):
        raise ValueError(f"unknown method {method!r}")
    if method == "dense":
        return _ness_dense(l)
    if method == "iterative":
        try:
            return _ness_iterative(l, iter_rtol)
        except _IterativeFailure as exc:
            raise RuntimeError(f"iterative steady-state solve failed: {exc}") from exc
    if l.dim <= SMALL_DENSE_DIM:
        return _ness_dense(l)
    try:
        return _ness_iterative(l, iter_rtol)
    except _IterativeFailure:
        if l.dim <= l.dense_limit:
            return _ness_dense(l)
        raise


def propagate(
    l: Liouvillian,
    rho0: np.ndarray,
    t_final: float,
    rtol: float = 1e-10,
    atol: float = 1e-12,
    method: str = "auto",
) -> np.ndarray:
    """Evolve rho0 under d rho/dt = L(rho) to ``t_final``.

    'dop853' integrates the complex system explicitly with adaptive step
    control and suits coherent or short-horizon runs. 'bdf' real-stacks
    the system with the exact dense generator as Jacobian; it handles
    moderately long horizons at small dimension but resolves every
    coherent oscillation, so it scales poorly. 'spectral' applies
    exp(t L) through the eigendecomposition of the dense (constant)
    generator, which is the practical route to the very long horizons
    used to cross-check the stationary solve. 'auto' picks by horizon.
    """
    rho0 = np.asarray(rho0, dtype=complex)
    if rho0.shape != (l.dim, l.dim):
        raise ValueError(f"initial state has shape {rho0.shape}, expected "
                         f"({l.dim}, {l.dim})")
    if hermiticity_defect(rho0) > 1e-8 or abs(np.trace(rho0).real - 1.0) > 1e-8:
        raise ValueError("initial state must be Hermitian with unit trace")
    if t_final == 0:
        return rho0.copy()
    if method == "auto":
        w = l.eig.values
        spread = float(w.max() - w.min()) + 1.0
        method = "dop853" if t_final * spread <= 2e4 else "spectral"

    d = l.dim
    if method == "dop853":
        def rhs(_, y):
            return l.apply(y.reshape(d, d)).ravel()

        sol = solve_ivp(
            rhs, (0.0, t_final), rho0.ravel(), method="DOP853",
            rtol=rtol, atol=atol,
        )
        if not sol.success:
            raise StiffnessError(f"adaptive integration failed: {sol.message}")
        return sol.y[:, -1].reshape(d, d)

    if method == "bdf":
        gen = l.generator()
        jac = np.block([[gen.real, -gen.imag], [gen.imag, gen.real]])

        def rhs_stacked(_, y):
            z = y[: d * d] + 1j * y[d * d:]
            dz = l.apply(z.reshape(d, d, order="F")).ravel(order="F")
            return np.concatenate([dz.real, dz.imag])

        y0 = np.concatenate([rho0.ravel(order="F").real,
                             rho0.ravel(order="F").imag])
        sol = solve_ivp(
            rhs_stacked, (0.0, t_final), y0, method="BDF",
            jac=jac, rtol=rtol, atol=atol,
        )
        if not sol.success:
            raise StiffnessError(f"stiff integration failed: {sol.message}")
        yf = sol.y[:, -1]
        return (yf[: d * d] + 1j * yf[d * d:]).reshape(d, d, order="F")

    if method != "spectral":
        raise ValueError(f"unknown method {method!r}")
    gen = l.generator()
    vals, vecs = np.linalg.eig(gen)
    coeffs = solve_linear(vecs, rho0.ravel(order="F"))
    # decaying modes only: clip the roundoff-positive real parts so the
    # propagator cannot amplify
    rates = np.minimum(vals.real, 0.0) + 1j * vals.imag
    yf = vecs @ (np.exp(rates * t_final) * coeffs)
    return yf.reshape((d, d), order="F")


def assemble_rc_junction(
    spec: JunctionSpec,
    dense: bool = False,
) -> Liouvillian:
    """Embedded-junction generator: extended Hamiltonian plus both residual baths."""
    model = build_rc_model(spec)
    baths = (
        DissipatorSpec(
            model.s_res_left,
            rate_function(SpectralDensity("ohmic-rc", spec.left),
                          spec.left.temperature),
            "L",
        ),
        DissipatorSpec(
            model.s_res_right,
            rate_function(SpectralDensity("ohmic-rc", spec.right),
                          spec.right.temperature),
            "R",
        ),
    )
    return assemble_liouvillian(model.h_s_rc, baths, dense=dense)


def junction_current(spec: JunctionSpec, method: str = "auto") -> NessResult:
    """Steady state and currents of the embedded junction."""
    return ness_solve(assemble_rc_junction(spec), method=method)


def rectification(
    spec: JunctionSpec,
    method: str = "auto",
) -> tuple[float, float, float]:
    """Forward/reverse currents under temperature exchange, and their asymmetry.

    Returns (j_forward, j_reverse, asymmetry) with
    asymmetry = (|j_fwd| - |j_rev|) / (|j_fwd| + |j_rev|).
    """
    if spec.left.temperature == spec.right.temperature:
        raise ValueError("rectification needs a temperature bias")
    j_fwd = junction_current(spec, method=method).j_left
    j_rev = junction_current(spec.with_swapped_temperatures(), method=method).j_left
    denom = abs(j_fwd) + abs(j_rev)
    asym = 0.0 if denom == 0 else (abs(j_fwd) - abs(j_rev)) / denom
    return j_fwd, j_rev, asym
