"""Dressed two-level description of the strongly coupled junction.

Displacing the collective modes and projecting onto their ground manifold
leaves a bare qubit with a suppressed splitting, rescaled coupling
operators, and a rescaled residual spectral density. Two operator
arrangements admit published closed forms: identical transition couplings
on both contacts ('commuting', both angles at pi/2), and the
quarter-period-shifted family ('shifted', angles differing by pi/2),
whose zero-transport corner is flagged as 'dissipative-decoherence'.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .embedding import coupling_operator
from .linalg import pauli
from .model import JunctionSpec
from .redfield import DissipatorSpec, assemble_liouvillian, ness_solve
from .spectral import SpectralDensity, bose, rate_function

# series/asymptotic split of the Dawson evaluation; both branches agree
# to ~1e-14 here (the asymptotic tail error scales like exp(-y^2))
DAWSON_CROSSOVER = 6.0

ANGLE_ATOL = 1e-9


class UnsupportedFamilyError(ValueError):
    """Coupling angles outside the families with published dressings."""


class UnsupportedAsymmetryError(ValueError):
    """The dressed description requires equal couplings and mode frequencies."""


def _dawson_series(y: float) -> float:
    """Series branch: the inner integral has all-positive terms, so the
    only rounding enters through the final exp(-y^2) factor."""
    y2 = y * y
    power = y  # y^(2n+1) / n!
    total = y
    n = 0
    while True:
        n += 1
        power *= y2 / n
        term = power / (2 * n + 1)
        total += term
        if term < 1e-18 * total:
            break
    return math.exp(-y2) * total


def _dawson_asymptotic(y: float) -> float:
    """Large-argument branch, summed to optimal truncation; the stopped
    tail is of order exp(-y^2), negligible beyond the crossover."""
    inv2y2 = 1.0 / (2.0 * y * y)
    term = 0.5 / y
    total = term
    k = 0
    while True:
        nxt = term * (2 * k + 1) * inv2y2
        if nxt >= term or nxt < 1e-18 * total:
            break
        total += nxt
        term = nxt
        k += 1
    return total


def dawson(y: float) -> float:
    """Dawson integral F(y) = exp(-y^2) * integral_0^y exp(t^2) dt.

    Absolute error stays below 1e-12 on [0, 50]; negative arguments
    extend by oddness. The two branches agree to ~1e-14 at the crossover.
    """
    y = float(y)
    if y < 0.0:
        return -dawson(-y)
    if y == 0.0:
        return 0.0
    if y <= DAWSON_CROSSOVER:
        return _dawson_series(y)
    return _dawson_asymptotic(y)


def dressing_commuting(x: float) -> float:
    """Splitting suppression exp(-4 x^2) for identical transition couplings."""
    return math.exp(-4.0 * x * x)


def dressing_shifted(x: float) -> float:
    """Dressing 1 - sqrt(2) x F(sqrt(2) x) of the quarter-shifted family.

    Equals the Gaussian average of cos^2(sqrt(2) x r), so it stays in
    (0, 1]: it falls from 1, dips to ~0.358 near x ~ 1.06, and relaxes
    back towards the ultrastrong-coupling limit 1/2 from below.
    """
    s = math.sqrt(2.0) * x
    return 1.0 - s * dawson(s)


def _mod_dist(a: float, b: float, period: float) -> float:
    d = (a - b) % period
    return min(d, period - d)


def classify_family(theta: float, phi: float, atol: float = ANGLE_ATOL) -> str:
    """Which published family a pair of coupling angles realizes.

    Angles are treated modulo pi: flipping the sign of a coupling
    operator leaves every dissipator unchanged.
    """
    half_pi = math.pi / 2.0
    if (_mod_dist(theta, half_pi, math.pi) <= atol
            and _mod_dist(phi, half_pi, math.pi) <= atol):
        return "commuting"
    if _mod_dist(phi - theta, half_pi, math.pi) <= atol:
        if _mod_dist(theta, 0.0, half_pi) <= atol:
            return "dissipative-decoherence"
        return "shifted"
    raise UnsupportedFamilyError(
        f"angles ({theta!r}, {phi!r}) realize neither identical transition "
        "couplings nor a quarter-period shift; no published dressing applies"
    )


@dataclass(frozen=True)
class EffectiveJunction:
    """Dressed two-level junction with rescaled contacts."""

    delta_tilde: float
    s_eff_left: np.ndarray
    s_eff_right: np.ndarray
    j_eff_left: SpectralDensity
    j_eff_right: SpectralDensity
    family: str
    spec: JunctionSpec


def _require_symmetric(spec: JunctionSpec) -> tuple[float, float]:
    lam_l, lam_r = spec.left.lam, spec.right.lam
    om_l, om_r = spec.left.omega, spec.right.omega
    if not math.isclose(lam_l, lam_r, rel_tol=1e-12, abs_tol=1e-300):
        raise UnsupportedAsymmetryError(
            f"couplings differ ({lam_l} vs {lam_r}); the dressed description "
            "assumes equal couplings"
        )
    if not math.isclose(om_l, om_r, rel_tol=1e-12):
        raise UnsupportedAsymmetryError(
            f"mode frequencies differ ({om_l} vs {om_r}); the dressed "
            "description assumes equal frequencies"
        )
    return lam_l, om_l


def build_effective_junction(
    spec: JunctionSpec,
    atol: float = ANGLE_ATOL,
) -> EffectiveJunction:
    """Dressed junction for coupling angles in a published family."""
    family = classify_family(spec.left.angle, spec.right.angle, atol)
    lam, omega = _require_symmetric(spec)
    x = lam / omega
    if family == "commuting":
        delta_tilde = spec.delta * dressing_commuting(x)
        s_left = pauli("x")
        s_right = pauli("x")
    else:
        f = dressing_shifted(x)
        delta_tilde = spec.delta * f
        s_left = f * coupling_operator(spec.left.angle)
        s_right = f * coupling_operator(spec.right.angle)
    return EffectiveJunction(
        delta_tilde=delta_tilde,
        s_eff_left=s_left,
        s_eff_right=s_right,
        j_eff_left=SpectralDensity("effective", spec.left),
        j_eff_right=SpectralDensity("effective", spec.right),
        family=family,
        spec=spec,
    )


def effective_current_numeric(
    eff: EffectiveJunction,
    temperatures: tuple[float, float] | None = None,
    method: str = "auto",
) -> float:
    """Left-contact current of the dressed two-level junction.

    Runs the same (nonsecular) generator machinery as the embedded model,
    on the two-dimensional dressed system.
    """
    t_left, t_right = temperatures or (
        eff.spec.left.temperature, eff.spec.right.temperature
    )
    if eff.j_eff_left.slope_at_zero() == 0 and eff.j_eff_right.slope_at_zero() == 0:
        return 0.0  # decoupled: no contact carries any spectral weight
    h = eff.delta_tilde * pauli("z")
    baths = (
        DissipatorSpec(eff.s_eff_left, rate_function(eff.j_eff_left, t_left), "L"),
        DissipatorSpec(eff.s_eff_right, rate_function(eff.j_eff_right, t_right), "R"),
    )
    liouv = assemble_liouvillian(h, baths)
    return ness_solve(liouv, method=method).j_left


def analytic_current_commuting(spec: JunctionSpec) -> float:
    """Closed-form sequential-resonant current of the commuting family.

    Populations follow a two-state rate equation at the dressed splitting;
    the current is positive when the left bath is hotter.
    """
    family = classify_family(spec.left.angle, spec.right.angle)
    if family != "commuting":
        raise UnsupportedFamilyError(
            f"closed form applies to the commuting family, angles realize "
            f"{family!r}"
        )
    lam, omega = _require_symmetric(spec)
    delta_tilde = spec.delta * dressing_commuting(lam / omega)
    gap = 2.0 * delta_tilde
    j_left = SpectralDensity("effective", spec.left)(gap)
    j_right = SpectralDensity("effective", spec.right)(gap)
    if j_left == 0.0 and j_right == 0.0:
        return 0.0
    n_left = bose(gap, spec.left.temperature)
    n_right = bose(gap, spec.right.temperature)
    num = 4.0 * math.pi * delta_tilde * j_left * j_right * (n_left - n_right)
    den = j_left * (2.0 * n_left + 1.0) + j_right * (2.0 * n_right + 1.0)
    return num / den


def analytic_current_shifted(spec: JunctionSpec, delta_angle: float) -> float:
    """Closed-form current of the quarter-shifted family.

    ``delta_angle`` is the left-contact angle of the (delta, delta +- pi/2)
    pair; its transition weight sin^2 enters the left rates and cos^2 the
    right ones, which is also what makes the pair rectify. Vanishes at
    delta_angle in {0, pi/2} where one contact loses its transition
    component entirely.
    """
    lam, omega = _require_symmetric(spec)
    f = dressing_shifted(lam / omega)
    delta_tilde = spec.delta * f
    gap = 2.0 * delta_tilde
    s2 = math.sin(delta_angle) ** 2
    c2 = math.cos(delta_angle) ** 2
    # the dissipative-decoherence corners carry identically zero current;
    # snap the roundoff remnants of sin/cos at multiples of pi/2
    if s2 < 1e-24:
        s2 = 0.0
    if c2 < 1e-24:
        c2 = 0.0
    j_left = SpectralDensity("effective", spec.left)(gap)
    j_right = SpectralDensity("effective", spec.right)(gap)
    n_left = bose(gap, spec.left.temperature)
    n_right = bose(gap, spec.right.temperature)
    f2 = f * f
    num = (4.0 * math.pi * delta_tilde * s2 * c2 * f2 * f2
           * j_left * j_right * (n_left - n_right))
    if num == 0.0:
        return 0.0
    den = (s2 * f2 * j_left * (2.0 * n_left + 1.0)
           + c2 * f2 * j_right * (2.0 * n_right + 1.0))
    return num / den
