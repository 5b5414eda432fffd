"""Bath spectral densities, thermal occupation, and half-Fourier rates.

The structured bath is peaked at its mode frequency ``omega``; after the
collective-mode (reaction-coordinate) extraction the residual bath is
Ohmic with an exponential cutoff, and its rate function carries the
detailed-balance asymmetry between emission and absorption.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np
from scipy import integrate

from .model import BathSpec

# |w| at or below this uses the zero-frequency rate branch pi*gamma*T
ZERO_FREQ_ATOL = 1e-9

QUAD_RTOL = 1e-8
TAIL_RTOL = 1e-10

_FAMILIES = ("brownian", "ohmic-rc", "effective")


class QuadratureError(RuntimeError):
    """Adaptive quadrature failed to reach the requested tolerance."""


def brownian_j(w, spec: BathSpec):
    """Structured (Brownian) spectral density of the original bath.

    Peaked at ``spec.omega`` with width parameter ``spec.gamma``; the
    overall weight scales with the coupling energy squared.
    """
    w = np.asarray(w, dtype=float)
    gam, om, lam = spec.gamma, spec.omega, spec.lam
    num = 4.0 * gam * om**2 * lam**2 * w
    den = (w**2 - om**2) ** 2 + (2.0 * math.pi * gam * om * w) ** 2
    out = num / den
    return out if out.ndim else float(out)


def ohmic_j_rc(w, spec: BathSpec):
    """Residual Ohmic spectral density gamma * w * exp(-w/cutoff)."""
    w = np.asarray(w, dtype=float)
    out = spec.gamma * w * np.exp(-w / spec.cutoff)
    return out if out.ndim else float(out)


def bose(w, temperature: float):
    """Bose-Einstein occupation 1/(exp(w/T) - 1); requires w > 0."""
    w = np.asarray(w, dtype=float)
    if not temperature > 0:
        raise ValueError(f"temperature must be positive, got {temperature}")
    if np.any(w <= 0):
        raise ValueError("occupation requires w > 0; negative and zero "
                         "frequencies are handled by the rate function")
    out = 1.0 / np.expm1(w / temperature)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class SpectralDensity:
    """A member of one of the supported spectral-density families.

    family 'brownian' is the original structured bath; 'ohmic-rc' is the
    residual bath after the collective-mode extraction; 'effective' is the
    residual density rescaled by (2*lam/omega)^2 as seen by the dressed
    two-level model. ``scale`` multiplies the density uniformly.
    """

    family: str
    bath: BathSpec
    scale: float = 1.0

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise ValueError(f"unknown spectral-density family {self.family!r}")

    def __call__(self, w):
        if self.family == "brownian":
            base = brownian_j(w, self.bath)
        elif self.family == "ohmic-rc":
            base = ohmic_j_rc(w, self.bath)
        else:  # effective
            b = self.bath
            base = (2.0 * b.lam / b.omega) ** 2 * np.asarray(ohmic_j_rc(w, b))
            if not base.ndim:
                base = float(base)
        return self.scale * base

    def slope_at_zero(self) -> float:
        """lim_{w->0} J(w)/w, the Ohmic slope that sets the w = 0 rate."""
        b = self.bath
        if self.family == "brownian":
            slope = 4.0 * b.gamma * b.lam**2 / b.omega**2
        elif self.family == "ohmic-rc":
            slope = b.gamma
        else:
            slope = (2.0 * b.lam / b.omega) ** 2 * b.gamma
        return self.scale * slope

    def cubic_tail_coefficient(self) -> float:
        """lim_{w->inf} w^3 J(w); nonzero only for the structured family.

        The structured density decays like 1/w^3, so its third moment
        grows linearly with the integration cutoff and is only defined
        as a finite part; this constant is what the finite part removes.
        """
        b = self.bath
        if self.family == "brownian":
            return self.scale * 4.0 * b.gamma * b.omega**2 * b.lam**2
        return 0.0

    def support_scale(self) -> float:
        """Frequency scale containing the density's structure."""
        return self.bath.omega if self.family == "brownian" else self.bath.cutoff

    def cubic_moment_integrand(self, w):
        """w^3 J(w) - cubic_tail_coefficient(), evaluated without cancellation.

        For the structured family the subtraction is carried out
        algebraically, so the far tail (~1/w^2) is computed at full
        precision instead of as a difference of two near-equal numbers.
        """
        if self.family != "brownian":
            return np.asarray(w, dtype=float) ** 3 * self(w)
        w = np.asarray(w, dtype=float)
        b = self.bath
        om2 = b.omega**2
        a2 = (2.0 * math.pi * b.gamma * b.omega) ** 2
        num = (2.0 * om2 - a2) * w**2 - om2**2
        den = (w**2 - om2) ** 2 + a2 * w**2
        out = self.scale * 4.0 * b.gamma * om2 * b.lam**2 * num / den
        return out if out.ndim else float(out)

    def scaled(self, c: float) -> "SpectralDensity":
        return replace(self, scale=self.scale * c)


def rate_function(
    j: SpectralDensity,
    temperature: float,
    zero_atol: float = ZERO_FREQ_ATOL,
) -> Callable:
    """Half-Fourier rate of a bath with density ``j`` at ``temperature``.

    Returns a vectorized callable: pi*J(w)(n(w)+1) for emission (w > 0),
    pi*J(|w|)n(|w|) for absorption (w < 0), and the Ohmic limit
    pi*slope*T at w = 0.
    """
    if not temperature > 0:
        raise ValueError(f"temperature must be positive, got {temperature}")
    slope = j.slope_at_zero()

    def rate(w):
        w_in = np.asarray(w, dtype=float)
        w1 = np.atleast_1d(w_in)
        out = np.empty_like(w1)
        aw = np.abs(w1)
        zero = aw <= zero_atol
        out[zero] = math.pi * slope * temperature
        nz = ~zero
        if np.any(nz):
            awnz = aw[nz]
            occ = 1.0 / np.expm1(awnz / temperature)
            jv = np.asarray(j(awnz), dtype=float)
            out[nz] = math.pi * jv * np.where(w1[nz] > 0, occ + 1.0, occ)
        return out.reshape(w_in.shape) if w_in.ndim else float(out[0])

    return rate


def gamma_rc(w, spec: BathSpec, zero_atol: float = ZERO_FREQ_ATOL):
    """Rate function of the residual Ohmic bath attached to one collective mode."""
    return rate_function(
        SpectralDensity("ohmic-rc", spec), spec.temperature, zero_atol
    )(w)


def _segment(f, lo: float, hi: float, seed_points, rtol: float):
    pts = sorted(p for p in seed_points if lo < p < hi)
    res = integrate.quad(
        f, lo, hi, points=pts or None, limit=400, epsabs=0.0,
        epsrel=rtol, full_output=1,
    )
    if len(res) > 3:
        raise QuadratureError(
            f"quadrature did not converge on [{lo:.3e}, {hi:.3e}]: {res[3]} "
            f"(estimate {res[0]:.6e}, error bound {res[1]:.2e})"
        )
    return res[0], res[1]


def rc_parameters_from_spectrum(
    j: SpectralDensity,
    rtol: float = QUAD_RTOL,
    tail_rtol: float = TAIL_RTOL,
) -> tuple[float, float]:
    """Collective-mode coupling and frequency from a spectral density.

    Evaluates the first and third frequency moments by adaptive quadrature
    over geometrically growing segments, extending the upper limit until a
    further doubling contributes less than ``tail_rtol`` relative to both
    moments. The structured family's third moment diverges linearly
    (w^3 J -> const), so it is taken as a Hadamard finite part: the known
    asymptotic constant is subtracted from the integrand, which is what
    makes the recovered frequency track the spectral peak.
    """
    scale = j.support_scale()

    def f1(w):
        return w * j(w)

    f3 = j.cubic_moment_integrand

    seeds = (0.25 * scale, 0.5 * scale, scale, 1.5 * scale)
    hi = 2.0 * scale
    m1, e1 = _segment(f1, 0.0, hi, seeds, rtol)
    m3, e3 = _segment(f3, 0.0, hi, seeds, rtol)
    converged = False
    for _ in range(60):
        lo, hi = hi, 2.0 * hi
        d1, de1 = _segment(f1, lo, hi, (), rtol)
        d3, de3 = _segment(f3, lo, hi, (), rtol)
        m1, e1 = m1 + d1, e1 + de1
        m3, e3 = m3 + d3, e3 + de3
        if (abs(d1) <= tail_rtol * max(abs(m1), 1e-300)
                and abs(d3) <= tail_rtol * max(abs(m3), 1e-300)):
            converged = True
            break
    if not converged:
        raise QuadratureError(
            f"moment tails not converged by upper limit {hi:.3e}; last "
            f"relative contributions {abs(d1) / max(abs(m1), 1e-300):.2e}, "
            f"{abs(d3) / max(abs(m3), 1e-300):.2e}"
        )
    for name, val, err in (("M1", m1, e1), ("M3", m3, e3)):
        if err > 100.0 * rtol * abs(val) and err > 1e-13:
            raise QuadratureError(
                f"{name} reached only {err / max(abs(val), 1e-300):.2e} "
                f"relative accuracy, requested {rtol:.1e}"
            )
    if m1 <= 0 or m3 <= 0:
        raise QuadratureError(
            f"moments must be positive, got M1 = {m1:.6e}, M3(fp) = {m3:.6e}"
        )
    omega_out = math.sqrt(m3 / m1)
    lam_out = math.sqrt(m1 / omega_out)
    return lam_out, omega_out
