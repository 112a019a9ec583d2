"""Stationary second moments, cooling limits, squeezing and regime flags.

Closed forms are expressed with the shorthand

    A = g^2 / (8 eta zeta)          feedback-induced noise weight
    B = zeta/8 + theta/2            back-action + classical thermal weight
    D = (1 + g)(Q^2 + g)

in omega_m = 1 working units.  The classical-delta thermal model treats the
Brownian force as white noise of rate gamma_m * theta, valid for theta >> 1;
the exact model replaces the thermal pieces with a coth-weighted quadrature
over the reservoir band.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from enum import Enum
from typing import NamedTuple

import numpy as np

from ._quad import quad_spectrum
from .core import Scheme, SchemeParams
from .response import chi_freq, damping_rate


class ThermalModel(Enum):
    CLASSICAL_DELTA = "classical-delta"
    CLASSICAL_PLUS_LOG = "classical-plus-log"
    EXACT_COTH = "exact-coth"


@dataclass(frozen=True)
class NoiseStrengths:
    """Delta-correlated noise intensities entering the working equations.

    ``d_q`` drives the position equation (stochastic cooling only), ``d_p``
    the momentum equation (back-action + classical thermal), and
    ``d_fb_cd`` is the coefficient of the omega^2/omega_m^2 spectral density
    of the band-limited cold-damping feedback force.
    """

    d_q: float
    d_p: float
    d_fb_cd: float


def noise_strengths(s: SchemeParams) -> NoiseStrengths:
    gm = s.gamma_m
    feedback = gm * s.g**2 / (4.0 * s.eta * s.zeta)
    return NoiseStrengths(
        d_q=feedback if s.scheme is Scheme.STOCHASTIC_COOLING else 0.0,
        d_p=gm * (s.zeta / 4.0 + s.theta),
        d_fb_cd=feedback if s.scheme is Scheme.COLD_DAMPING else 0.0,
    )


@dataclass(frozen=True)
class MomentSet:
    """Stationary second moments; qp is the symmetrized <QP+PQ>/2."""

    q2: float
    p2: float
    qp: float
    thermal_model: ThermalModel = ThermalModel.CLASSICAL_DELTA

    def __post_init__(self):
        if self.q2 <= 0 or self.p2 <= 0:
            raise ValueError(f"variances must be positive, got q2={self.q2}, p2={self.p2}")

    @property
    def energy_units(self) -> float:
        """Stationary energy in zero-point units, 2 U_st / (hbar omega_m)."""
        return 2.0 * (self.q2 + self.p2)


class BrownianMoments(NamedTuple):
    q2_bm: float
    p2_bm: float


def _coefficients(s: SchemeParams) -> tuple[float, float, float]:
    """(A, B, D) shorthand; B uses the classical-delta thermal weight."""
    a = s.g**2 / (8.0 * s.eta * s.zeta)
    b = s.zeta / 8.0 + s.theta / 2.0
    d = (1.0 + s.g) * (s.quality**2 + s.g)
    return a, b, d


def _log_correction(s: SchemeParams) -> float:
    """Momentum-variance correction (gamma_m/pi) ln(varpi / (2 pi theta))."""
    if s.theta <= 0:
        raise ValueError("the logarithmic thermal correction requires theta > 0")
    return (s.gamma_m / math.pi) * math.log(s.cutoff_reservoir / (2.0 * math.pi * s.theta))


def _p2_feedback_wide(s: SchemeParams) -> float:
    """Wide-band feedback heating of <P^2>, proportional to the loop cutoff."""
    cutoff_fb = s.cutoff_reservoir  # wide loop extends to the reservoir cutoff
    return (s.gamma_m * s.g**2 / (8.0 * s.eta * s.zeta)) * cutoff_fb / math.pi


def steady_moments(
    s: SchemeParams, model: ThermalModel = ThermalModel.CLASSICAL_DELTA
) -> MomentSet:
    """Stationary {<Q^2>, <P^2>, <QP+PQ>/2} for the configured scheme.

    Cold damping defaults to the narrow-band loop, for which the stationary
    state is an effective thermal state with q2 = p2 and qp = 0; a wide-band
    loop (``cutoff_feedback="wide"``) instead heats <P^2> by a term
    proportional to the loop cutoff.  The cross moment qp always uses the
    classical thermal weight (its quadrature carries no cutoff ambiguity).
    """
    if model is ThermalModel.CLASSICAL_DELTA and s.theta == 0:
        warnings.warn(
            "classical-delta thermal model with theta = 0: the white-noise "
            "approximation assumes hbar omega_m << k_B T",
            UserWarning,
            stacklevel=2,
        )

    a, b, d = _coefficients(s)
    q = s.quality
    g = s.g

    if model is ThermalModel.EXACT_COTH:
        bm = brownian_exact(s)
        b_ba = s.zeta / 8.0  # back-action stays delta-correlated
    else:
        bm = None
        b_ba = b

    if s.scheme is Scheme.STOCHASTIC_COOLING or s.scheme is Scheme.NONE:
        q2 = a * (1.0 + q * q + g) / d + b_ba * q * q / d
        p2 = a * q * q / d + b_ba * (g * g + q * q + g) / d
        if bm is not None:
            q2 += bm.q2_bm
            p2 += bm.p2_bm
        qp = (b * g - a) * q / d
    else:
        fb = a / (1.0 + g)
        q2 = fb + b_ba / (1.0 + g)
        if s.wide_band:
            p2 = b_ba / (1.0 + g) + _p2_feedback_wide(s)
        else:
            p2 = fb + b_ba / (1.0 + g)
        if bm is not None:
            q2 += bm.q2_bm
            p2 += bm.p2_bm
        qp = 0.0

    if model is ThermalModel.CLASSICAL_PLUS_LOG:
        p2 += _log_correction(s)

    return MomentSet(q2=q2, p2=p2, qp=qp, thermal_model=model)


def _omega_coth(omega: np.ndarray, theta: float) -> np.ndarray:
    """omega * coth(omega / (2 theta)), -> 2 theta as omega -> 0."""
    omega = np.asarray(omega, dtype=float)
    if theta == 0:
        return np.abs(omega)
    x = omega / (2.0 * theta)
    out = np.empty_like(omega)
    small = np.abs(x) < 1e-8
    out[small] = 2.0 * theta * (1.0 + x[small] ** 2 / 3.0)
    out[~small] = omega[~small] / np.tanh(x[~small])
    return out


def brownian_exact(s: SchemeParams) -> BrownianMoments:
    """Quantum Brownian contributions to q2 and p2 by coth-weighted quadrature.

    Integrates (gamma_m/2) |chi~|^2 omega coth(omega/2 theta) {1, w(omega)}
    over the reservoir band [-varpi, varpi], with momentum weight
    w = omega^2 + (g gamma_m)^2 for stochastic cooling and omega^2 for cold
    damping.  Integrands are even, so only [0, varpi] is sampled.
    """
    gm = s.gamma_m
    varpi = s.cutoff_reservoir
    halfwidth = 0.5 * damping_rate(s)

    def chi2(w):
        return np.abs(chi_freq(s, w)) ** 2

    def integrand_q(w):
        return (gm / 2.0) * _omega_coth(w, s.theta) * chi2(w) / (2.0 * math.pi)

    if s.scheme is Scheme.COLD_DAMPING:
        wshift = 0.0
    else:
        wshift = (s.g * gm) ** 2

    def integrand_p(w):
        return (gm / 2.0) * _omega_coth(w, s.theta) * chi2(w) * (w * w + wshift) / (
            2.0 * math.pi
        )

    knee = 2.0 * s.theta  # coth crossover from classical to quantum
    q2_bm = quad_spectrum(
        integrand_q,
        varpi,
        peak=1.0,
        halfwidth=halfwidth,
        extra_points=(knee,),
        name="brownian q2 quadrature",
    )
    p2_bm = quad_spectrum(
        integrand_p,
        varpi,
        peak=1.0,
        halfwidth=halfwidth,
        extra_points=(knee,),
        name="brownian p2 quadrature",
    )
    return BrownianMoments(q2_bm=q2_bm, p2_bm=p2_bm)


def steady_energy(s: SchemeParams) -> float:
    """Stationary energy 2 U_st / (hbar omega_m) in the classical-delta model."""
    return steady_moments(s, ThermalModel.CLASSICAL_DELTA).energy_units


class PowerOptimum(NamedTuple):
    zeta_opt: float
    energy_units: float


def optimal_input_power(s: SchemeParams) -> PowerOptimum:
    """Input power minimizing the stationary energy at fixed gain.

    Cold damping admits the closed form zeta_opt = g / sqrt(eta).  For
    stochastic cooling the energy is minimized numerically (golden section
    on log zeta, seeded by the same asymptote, which is exact only for
    Q >> g).  The zeta stored in ``s`` is ignored.
    """
    if s.g <= 0:
        raise ValueError("optimal_input_power requires a positive feedback gain")

    if s.scheme is Scheme.COLD_DAMPING:
        zopt = s.g / math.sqrt(s.eta)
        return PowerOptimum(zopt, steady_energy(replace(s, zeta=zopt)))

    def energy(logz: float) -> float:
        return steady_energy(replace(s, zeta=math.exp(logz)))

    center = math.log(s.g / math.sqrt(s.eta))
    lo, hi = center - 35.0, center + 10.0
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    x1 = hi - invphi * (hi - lo)
    x2 = lo + invphi * (hi - lo)
    f1, f2 = energy(x1), energy(x2)
    for _ in range(200):
        if hi - lo < 1e-12:
            break
        if f1 < f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - invphi * (hi - lo)
            f1 = energy(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + invphi * (hi - lo)
            f2 = energy(x2)
    logz = (lo + hi) / 2.0
    return PowerOptimum(math.exp(logz), energy(logz))


class SqueezeOptimum(NamedTuple):
    zeta_opt: float
    q2_min: float
    squeezed: bool


def min_position_variance(
    g: float, quality: float, theta: float, eta: float
) -> SqueezeOptimum:
    """Minimum of <Q^2>_st over input power, stochastic cooling only.

    The minimum is attained at zeta = (g / (Q sqrt(eta))) sqrt(1 + Q^2 + g)
    and beats the standard quantum limit 1/4 at sufficiently large gain
    (g >> Q^2); ``squeezed`` flags q2_min < 1/4.
    """
    if g < 0 or quality <= 0 or theta < 0 or not 0 < eta <= 1:
        raise ValueError("invalid parameters for min_position_variance")
    q = quality
    d = (1.0 + g) * (q * q + g)
    q2_min = g * q * math.sqrt(1.0 + q * q + g) / (4.0 * math.sqrt(eta) * d) + (
        theta / 2.0
    ) * q * q / d
    zeta_opt = (g / (q * math.sqrt(eta))) * math.sqrt(1.0 + q * q + g) if g > 0 else 0.0
    return SqueezeOptimum(zeta_opt, q2_min, q2_min < 0.25)


class RegimeFlags(NamedTuple):
    squeezed: bool
    contractive: bool
    thermal_like: bool


def regime_flags(
    s: SchemeParams, model: ThermalModel = ThermalModel.CLASSICAL_DELTA
) -> RegimeFlags:
    """Qualitative state classification from the stationary moments.

    squeezed: q2 < 1/4 (below the standard quantum limit); contractive:
    qp < 0 (negative position-momentum correlation, stochastic cooling at
    g > eta zeta (zeta + 4 theta)); thermal_like: q2 and p2 agree and qp
    vanishes to within 1e-3 relative.
    """
    m = steady_moments(s, model)
    return RegimeFlags(
        squeezed=m.q2 < 0.25,
        contractive=m.qp < 0.0,
        thermal_like=abs(m.q2 - m.p2) < 1e-3 * m.q2 and abs(m.qp) < 1e-3 * m.q2,
    )
