"""Stationary position-noise spectra, detected spectra, and the stationary SNR.

Spectra are two-sided densities in 1/omega_m units, normalized so that
int (domega / 2 pi) N_Q^2(omega) = <Q^2>_st.  They are even in omega; all
entry points take omega >= 0 grids.
"""

from __future__ import annotations

import io
import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ._quad import quad_spectrum
from .core import Scheme, SchemeParams
from .response import chi_freq, damping_rate
from .steady import _omega_coth

KIND_POSITION_NOISE = "PositionNoise"
KIND_DETECTED_NOISE = "DetectedNoise"
KIND_SIGNAL = "Signal"
KIND_SNR = "SNR"

_NOISE_KINDS = (KIND_POSITION_NOISE, KIND_DETECTED_NOISE)

#: CSV cells use 12 significant digits
_FLOAT_FMT = "{:.12g}"


@dataclass(frozen=True)
class SpectrumSeries:
    """A spectrum (or SNR curve) on a frequency grid, with provenance tag."""

    omegas: np.ndarray
    values: np.ndarray
    kind: str
    provenance: str

    def __post_init__(self):
        omegas = np.asarray(self.omegas, dtype=float)
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "omegas", omegas)
        object.__setattr__(self, "values", values)
        if omegas.shape != values.shape or omegas.ndim != 1:
            raise ValueError("omegas and values must be 1-d arrays of equal length")
        if len(omegas) > 1 and not np.all(np.diff(omegas) > 0):
            raise ValueError("frequency grid must be strictly increasing")
        if self.kind in _NOISE_KINDS and np.any(values < 0):
            raise ValueError(f"{self.kind} values must be non-negative")

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("omega,value,kind,provenance\n")
        for w, v in zip(self.omegas, self.values):
            buf.write(
                f"{_FLOAT_FMT.format(w)},{_FLOAT_FMT.format(v)},{self.kind},{self.provenance}\n"
            )
        return buf.getvalue()

    def write_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_csv())


def default_grid(n: int = 400, lo: float = 1e-3, hi: float = 3.0) -> np.ndarray:
    """Default frequency grid: log-spaced, resolves the w -> 0 plateau and
    the resonance."""
    return np.geomspace(lo, hi, n)


def _gates(s: SchemeParams, omega: np.ndarray, apply: bool):
    if not apply:
        one = np.ones_like(omega)
        return one, one
    lo, hi = s.feedback_band()
    absw = np.abs(omega)
    gate_fb = ((absw >= lo) & (absw <= hi)).astype(float)
    gate_res = (absw <= s.cutoff_reservoir).astype(float)
    return gate_fb, gate_res


def _thermal_density(s: SchemeParams, omega: np.ndarray, thermal: str) -> np.ndarray:
    if thermal == "exact":
        return _omega_coth(omega, s.theta) / 2.0
    if thermal == "classical":
        return np.full_like(omega, s.theta)
    raise ValueError(f"thermal must be 'exact' or 'classical', got {thermal!r}")


def _feedback_weight(s: SchemeParams, omega: np.ndarray) -> np.ndarray:
    # stochastic cooling feeds noise into the position equation; its kernel
    # carries an extra gamma_m^2 relative to cold damping
    if s.scheme is Scheme.STOCHASTIC_COOLING:
        return omega**2 + s.gamma_m**2
    return omega**2


def position_noise_spectrum(
    s: SchemeParams, omega, thermal: str = "exact", gates: bool = True
):
    """Stationary position noise spectrum N_Q^2(omega).

    gamma_m |chi~|^2 [ zeta/4 + (g^2 / 4 eta zeta) w_fb(omega) Gate_fb
    + (omega/2) coth(omega / 2 theta) Gate_res ], with the coth replaced by
    its classical limit theta when ``thermal="classical"``.
    """
    omega = np.asarray(omega, dtype=float)
    scalar = omega.ndim == 0
    omega = np.atleast_1d(omega)
    gm = s.gamma_m
    chi2 = np.abs(chi_freq(s, omega)) ** 2
    gate_fb, gate_res = _gates(s, omega, gates)
    fb = (s.g**2 / (4.0 * s.eta * s.zeta)) * _feedback_weight(s, omega) * gate_fb
    th = _thermal_density(s, omega, thermal) * gate_res
    out = gm * chi2 * (s.zeta / 4.0 + fb + th)
    return float(out[0]) if scalar else out


def shot_noise_floor(s: SchemeParams) -> float:
    """Homodyne shot-noise contribution to the detected position spectrum."""
    return 1.0 / (4.0 * s.eta * s.zeta * s.gamma_m)


def detected_noise_spectrum(s: SchemeParams, omega, thermal: str = "exact"):
    """Detected spectrum: position noise (no gate functions) plus shot noise.

    Faithful to the mirror dynamics only below the cavity bandwidth; the
    adiabatic elimination hides the cavity rolloff, so the caller is
    responsible for staying at omega < gamma_c.
    """
    return position_noise_spectrum(s, omega, thermal=thermal, gates=False) + shot_noise_floor(s)


class FrequencyOptimum(NamedTuple):
    zeta_opt: float
    n_min: float


def optimal_power_at_frequency(s: SchemeParams, omega: float, thermal: str = "exact") -> FrequencyOptimum:
    """Power minimizing the detected noise at one frequency, and that minimum.

    Closed forms; the zeta stored in ``s`` is ignored.
    """
    gm = s.gamma_m
    chi2 = abs(chi_freq(s, omega)) ** 2
    w = float(_feedback_weight(s, np.atleast_1d(float(omega)))[0])
    x = 1.0 + s.g**2 * gm**2 * chi2 * w  # Q^-2 g^2 |chi|^2 w, Q^-2 = gm^2
    zeta_opt = math.sqrt(x / (s.eta * gm**2 * chi2))
    th = float(_thermal_density(s, np.atleast_1d(float(omega)), thermal)[0])
    n_min = gm * chi2 * th + math.sqrt(chi2) / (2.0 * math.sqrt(s.eta)) * math.sqrt(x)
    return FrequencyOptimum(zeta_opt, n_min)


def stationary_snr(s: SchemeParams, f_abs, omega, t_m: float, thermal: str = "exact"):
    """Stationary spectral signal-to-noise ratio for force spectrum |f~(omega)|.

    Valid when the measurement lasts many relaxation times; a warning is
    issued when gamma_m (1 + g) t_m < 10.  Scales as |f~| / sqrt(t_m).
    """
    if t_m <= 0:
        raise ValueError("measurement time t_m must be > 0")
    if damping_rate(s) * t_m < 10.0:
        warnings.warn(
            "stationary SNR assumes t_m >> relaxation time; "
            f"gamma_m (1+g) t_m = {damping_rate(s) * t_m:.3g} < 10",
            UserWarning,
            stacklevel=2,
        )
    omega = np.asarray(omega, dtype=float)
    scalar = omega.ndim == 0
    omega = np.atleast_1d(omega)
    f_abs = np.broadcast_to(np.asarray(f_abs, dtype=float), omega.shape)
    gm = s.gamma_m
    chi2 = np.abs(chi_freq(s, omega)) ** 2
    th = _thermal_density(s, omega, thermal)
    fb = s.g**2 * _feedback_weight(s, omega)
    bracket = th + s.zeta / 4.0 + (fb + 1.0 / (gm**2 * chi2)) / (4.0 * s.eta * s.zeta)
    out = f_abs / np.sqrt(gm * t_m * bracket)
    return float(out[0]) if scalar else out


def integrated_position_variance(
    s: SchemeParams, thermal: str = "exact", gates: bool = True, rtol: float = 1e-8
) -> float:
    """int (domega / 2 pi) N_Q^2 over the reservoir band, by quadrature.

    Equals <Q^2>_st; used as the spectral-consistency cross-check against
    the steady module's closed forms.
    """
    halfwidth = 0.5 * damping_rate(s)
    lo, hi = s.feedback_band()

    def integrand(w):
        return position_noise_spectrum(s, w, thermal=thermal, gates=gates) / (2.0 * math.pi)

    return quad_spectrum(
        integrand,
        s.cutoff_reservoir,
        peak=1.0,
        halfwidth=halfwidth,
        extra_points=(lo, hi, 2.0 * s.theta),
        rtol=rtol,
        name="position-spectrum integral",
    )
