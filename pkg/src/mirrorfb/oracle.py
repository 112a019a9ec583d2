"""Monte Carlo integrator of the classical-equivalent feedback Langevin equations.

Independent cross-check of every closed form: trajectories of

    dQ = (P - delta_sc g gamma_m Q) dt + dW_Q
    dP = (-Q - gamma_m (1 + delta_cd g) P + f(t)) dt + dW_P + dW_fb

are integrated in omega_m = 1 units with a split-step update: damping and
white noise advance by their exact Ornstein-Uhlenbeck propagator (a plain
Euler-Maruyama noise term leaves an O(gamma (1+g) dt) moment bias), while
the conservative rotation keeps the semi-implicit symplectic-Euler form for
long-horizon stability.  White-noise intensities come from the steady
module; the cold-damping feedback force is synthesized spectrally per
trajectory as band-limited noise with two-sided density d_fb * omega^2,
since white noise cannot carry the omega^2 spectrum without the loop's own
band limit.

Trajectories are independent work units on counter-based (Philox) streams,
one stream per fixed-size batch, so results are bit-reproducible for a
given (seed, n_traj, dt) regardless of how the batches are executed.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.fft import next_fast_len

from .core import Scheme, SchemeParams
from .spectra import SpectrumSeries
from .steady import MomentSet, ThermalModel, noise_strengths, steady_moments

_BATCH = 512
_CHUNK = 2048
_RNG_ALGORITHM = "philox4x64(one jumped stream per trajectory batch)"


class InstabilityError(RuntimeError):
    """Trajectory blow-up detected during integration."""


@dataclass(frozen=True)
class SimConfig:
    """Monte Carlo run configuration (times in 1/omega_m).

    ``dt`` must satisfy dt <= min(1/50, 1/(50 gamma_m (1+g))); leaving it
    None picks half that bound.  ``n_steps`` counts post-burn-in averaging
    steps.  ``fb_band`` overrides the scheme's feedback band for the
    synthesized cold-damping force noise.  The spectrum estimator averages
    tapered periodograms of duration ``seg_time`` (Hann by default; a boxcar
    leaks the resonance peak into the wings) and keeps bins inside
    ``spectrum_band``.
    """

    dt: float | None = None
    n_steps: int | None = None
    n_traj: int = 1000
    seed: int = 12345
    burn_in_steps: int | None = None
    fb_band: tuple[float, float] | None = None
    estimator: str = "moments"
    seg_time: float | None = None
    spectrum_band: tuple[float, float] = (0.5, 1.5)
    window: str = "hann"

    def __post_init__(self):
        if self.n_traj < 2:
            raise ValueError("n_traj must be >= 2 to estimate standard errors")
        if self.estimator not in ("moments", "spectrum"):
            raise ValueError(f"estimator must be 'moments' or 'spectrum', got {self.estimator!r}")
        if self.dt is not None and self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.window not in ("hann", "boxcar"):
            raise ValueError(f"window must be 'hann' or 'boxcar', got {self.window!r}")


@dataclass(frozen=True)
class SpectrumEstimate:
    omegas: np.ndarray
    values: np.ndarray
    errors: np.ndarray


@dataclass(frozen=True)
class EnsembleStats:
    """Ensemble moment estimates with standard errors and RNG provenance."""

    q2: float
    q2_err: float
    p2: float
    p2_err: float
    qp: float
    qp_err: float
    mean_q: float
    mean_q_err: float
    mean_p: float
    mean_p_err: float
    seed: int
    n_traj: int
    dt: float
    algorithm: str = _RNG_ALGORITHM
    spectrum: SpectrumEstimate | None = field(default=None, compare=False)

    def to_json(self) -> str:
        # wire format is fixed: exactly these nine fields
        return json.dumps(
            {
                "q2": self.q2,
                "q2_err": self.q2_err,
                "p2": self.p2,
                "p2_err": self.p2_err,
                "qp": self.qp,
                "qp_err": self.qp_err,
                "seed": self.seed,
                "n_traj": self.n_traj,
                "dt": self.dt,
            }
        )


def dt_bound(s: SchemeParams) -> float:
    """Largest admissible timestep, min(1/50, 1/(50 gamma_m (1+g)))."""
    return min(1.0, 1.0 / s.damping) / 50.0


def _resolve_config(s: SchemeParams, cfg: SimConfig) -> tuple[float, int, int]:
    bound = dt_bound(s)
    dt = cfg.dt if cfg.dt is not None else 0.5 * bound
    if dt > bound * (1.0 + 1e-12):
        raise ValueError(f"dt = {dt:g} exceeds the stability bound {bound:g}")
    relax = 1.0 / s.damping
    burn = cfg.burn_in_steps if cfg.burn_in_steps is not None else math.ceil(12.0 * relax / dt)
    if cfg.n_steps is not None:
        n_steps = cfg.n_steps
    elif cfg.estimator == "spectrum":
        seg = cfg.seg_time if cfg.seg_time is not None else 48.0 * math.pi * relax
        n_steps = int(round(seg / dt))
    else:
        n_steps = math.ceil(150.0 * relax / dt)
    return dt, burn, n_steps


def _band_noise(
    rng: np.random.Generator,
    nb: int,
    n_total: int,
    dt: float,
    band: tuple[float, float],
    coeff: float,
) -> np.ndarray:
    """Gaussian noise with two-sided PSD coeff * w^2 inside ``band``.

    Circular spectral synthesis: filter white noise in the frequency domain
    so that <y(t) y(t')> = int (dw/2pi) S(w) e^{i w (t - t')}.  Returned
    time-major, shape (n_total, nb).
    """
    n_fft = next_fast_len(n_total, real=True)  # truncating a stationary process is harmless
    xi = rng.standard_normal((n_fft, nb))
    freqs = 2.0 * math.pi * np.fft.rfftfreq(n_fft, d=dt)
    h = np.where(
        (freqs >= band[0]) & (freqs <= band[1]), math.sqrt(coeff) * freqs, 0.0
    )
    y = np.fft.irfft(np.fft.rfft(xi, axis=0) * h[:, None], n=n_fft, axis=0)
    return y[:n_total] / math.sqrt(dt)


def simulate(s: SchemeParams, cfg: SimConfig, force=None) -> EnsembleStats:
    """Integrate the ensemble and estimate stationary moments (and spectrum).

    Per-trajectory time averages over the post-burn-in window are reduced
    across trajectories; the quoted errors are standard errors of those
    independent per-trajectory means.  Raises :class:`InstabilityError` when
    any |Q| exceeds 1e6 standard deviations of the analytic prediction.
    """
    dt, burn, n_steps = _resolve_config(s, cfg)
    n_total = burn + n_steps
    gm = s.gamma_m

    a_q = gm * s.g if s.scheme is Scheme.STOCHASTIC_COOLING else 0.0
    g_p = gm * (1.0 + s.g) if s.scheme is Scheme.COLD_DAMPING else gm

    ns = noise_strengths(s)
    # damping + white noise advance as an exact OU substep; plain
    # Euler-Maruyama noise would leave an O(gamma (1+g) dt) moment bias
    decay_p = math.exp(-g_p * dt)
    amp_p = math.sqrt(ns.d_p * (1.0 - decay_p**2) / (2.0 * g_p)) if g_p > 0 else 0.0
    if a_q > 0:
        decay_q = math.exp(-a_q * dt)
        amp_q = math.sqrt(ns.d_q * (1.0 - decay_q**2) / (2.0 * a_q))
    else:
        decay_q = 1.0
        amp_q = math.sqrt(ns.d_q * dt)
    band = cfg.fb_band if cfg.fb_band is not None else s.feedback_band()

    f_grid = None
    if force is not None:
        f_grid = np.asarray(force(np.arange(n_total) * dt), dtype=float)

    ref = steady_moments(s, ThermalModel.CLASSICAL_DELTA)
    guard = 1e6 * math.sqrt(max(ref.q2, 1.0))

    want_spectrum = cfg.estimator == "spectrum"
    if want_spectrum:
        seg_len = n_steps if cfg.seg_time is None else int(round(cfg.seg_time / dt))
        seg_len = max(min(seg_len, n_steps), 16)
        n_seg = n_steps // seg_len
        if n_seg < 1:
            raise ValueError("n_steps too short for one spectrum segment")
        freqs = 2.0 * math.pi * np.fft.rfftfreq(seg_len, d=dt)
        keep = (freqs >= cfg.spectrum_band[0]) & (freqs <= cfg.spectrum_band[1])
        spec_omegas = freqs[keep]
        if cfg.window == "hann":
            taper = np.hanning(seg_len)
        else:
            taper = np.ones(seg_len)
        spec_norm = dt / float(np.sum(taper**2))

    per_traj: dict[str, list[np.ndarray]] = {k: [] for k in ("q2", "p2", "qp", "q", "p")}
    spec_rows: list[np.ndarray] = []

    needs_fb = s.scheme is Scheme.COLD_DAMPING and s.g > 0
    batch_size = _BATCH if needs_fb else 4 * _BATCH  # fb storage caps the batch
    base = np.random.Philox(key=cfg.seed)
    n_batches = (cfg.n_traj + batch_size - 1) // batch_size
    for b in range(n_batches):
        nb = min(batch_size, cfg.n_traj - b * batch_size)
        rng = np.random.Generator(base.jumped(b))

        fb = None
        if needs_fb:
            fb = _band_noise(rng, nb, n_total, dt, band, ns.d_fb_cd)

        q = np.zeros(nb)
        p = np.zeros(nb)
        acc = {k: np.zeros(nb) for k in per_traj}
        if want_spectrum:
            seg_buf = np.empty((nb, seg_len))
            spec_acc = np.zeros((nb, int(np.count_nonzero(keep))))
            seg_pos = 0
            seg_done = 0

        j = 0
        while j < n_total:
            n = min(_CHUNK, n_total - j)
            xi = rng.standard_normal((2, n, nb))
            for k in range(n):
                step = j + k
                drive = f_grid[step] if f_grid is not None else 0.0
                fb_k = fb[step] if fb is not None else 0.0
                p_new = decay_p * p + amp_p * xi[1, k] + dt * (-q + drive + fb_k)
                q_new = decay_q * q + amp_q * xi[0, k] + dt * p_new
                if step > burn:
                    # the staggered update leaves p half a step behind q;
                    # pairing q with the two-point p average removes the
                    # O(dt) bias of the cross moment
                    acc["qp"] += q * (0.5 * (p + p_new))
                p, q = p_new, q_new
                if step >= burn:
                    acc["q2"] += q * q
                    acc["p2"] += p * p
                    acc["q"] += q
                    acc["p"] += p
                    if want_spectrum:
                        if seg_done < n_seg:
                            seg_buf[:, seg_pos] = q
                            seg_pos += 1
                            if seg_pos == seg_len:
                                fq = np.fft.rfft(seg_buf * taper[None, :], axis=1)[:, keep]
                                spec_acc += (np.abs(fq) ** 2) * spec_norm
                                seg_pos = 0
                                seg_done += 1
            j += n
            peak = float(np.max(np.abs(q)))
            if not math.isfinite(peak) or peak > guard:
                raise InstabilityError(
                    f"|Q| reached {peak:.3g} (guard {guard:.3g}) at step {j} "
                    f"of {n_total}; dt = {dt:g}, scheme = {s.scheme.value}, g = {s.g:g}"
                )

        for key in per_traj:
            count = n_steps - 1 if key == "qp" else n_steps
            per_traj[key].append(acc[key] / count)
        if want_spectrum:
            spec_rows.append(spec_acc / n_seg)

    def reduce(key: str) -> tuple[float, float]:
        vals = np.concatenate(per_traj[key])
        return float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(len(vals)))

    q2, q2_err = reduce("q2")
    p2, p2_err = reduce("p2")
    qp, qp_err = reduce("qp")
    mq, mq_err = reduce("q")
    mp, mp_err = reduce("p")

    spectrum = None
    if want_spectrum:
        rows = np.concatenate(spec_rows, axis=0)
        spectrum = SpectrumEstimate(
            omegas=spec_omegas,
            values=rows.mean(axis=0),
            errors=rows.std(axis=0, ddof=1) / math.sqrt(rows.shape[0]),
        )

    return EnsembleStats(
        q2=q2,
        q2_err=q2_err,
        p2=p2,
        p2_err=p2_err,
        qp=qp,
        qp_err=qp_err,
        mean_q=mq,
        mean_q_err=mq_err,
        mean_p=mp,
        mean_p_err=mp_err,
        seed=cfg.seed,
        n_traj=cfg.n_traj,
        dt=dt,
        spectrum=spectrum,
    )


def paired_timestep_stats(
    s: SchemeParams, cfg: SimConfig, force=None
) -> tuple[EnsembleStats, EnsembleStats]:
    """Run chains at dt and dt/2 driven by common random numbers.

    The coarse chain's per-step noise is composed from the fine chain's two
    sub-step draws (exactly matching its marginal law), so the difference of
    the two moment estimates isolates the discretization error instead of
    being dominated by independent sampling noise.  Returns
    (coarse_stats, fine_stats); the spectrum estimator is not supported here.
    """
    dt, burn, n_steps = _resolve_config(s, cfg)
    dt_f = 0.5 * dt
    n_total = burn + n_steps
    gm = s.gamma_m

    a_q = gm * s.g if s.scheme is Scheme.STOCHASTIC_COOLING else 0.0
    g_p = gm * (1.0 + s.g) if s.scheme is Scheme.COLD_DAMPING else gm

    ns = noise_strengths(s)

    def coeffs(step: float):
        dec_p = math.exp(-g_p * step)
        amp_p = math.sqrt(ns.d_p * (1.0 - dec_p**2) / (2.0 * g_p)) if g_p > 0 else 0.0
        if a_q > 0:
            dec_q = math.exp(-a_q * step)
            amp_q = math.sqrt(ns.d_q * (1.0 - dec_q**2) / (2.0 * a_q))
        else:
            dec_q = 1.0
            amp_q = math.sqrt(ns.d_q * step)
        return dec_p, amp_p, dec_q, amp_q

    dec_p_c, amp_p_c, dec_q_c, amp_q_c = coeffs(dt)
    dec_p_f, amp_p_f, dec_q_f, amp_q_f = coeffs(dt_f)
    band = cfg.fb_band if cfg.fb_band is not None else s.feedback_band()

    f_coarse = f_fine = None
    if force is not None:
        f_coarse = np.asarray(force(np.arange(n_total) * dt), dtype=float)
        f_fine = np.asarray(force(np.arange(2 * n_total) * dt_f), dtype=float)

    ref = steady_moments(s, ThermalModel.CLASSICAL_DELTA)
    guard = 1e6 * math.sqrt(max(ref.q2, 1.0))

    needs_fb = s.scheme is Scheme.COLD_DAMPING and s.g > 0
    batch_size = _BATCH if needs_fb else 4 * _BATCH
    base = np.random.Philox(key=cfg.seed)
    n_batches = (cfg.n_traj + batch_size - 1) // batch_size

    acc_names = ("q2", "p2", "qp", "q", "p")
    per_traj = {chain: {k: [] for k in acc_names} for chain in ("coarse", "fine")}

    for b in range(n_batches):
        nb = min(batch_size, cfg.n_traj - b * batch_size)
        rng = np.random.Generator(base.jumped(b))

        fb_f = None
        if needs_fb:
            fb_f = _band_noise(rng, nb, 2 * n_total, dt_f, band, ns.d_fb_cd)

        qc = np.zeros(nb)
        pc = np.zeros(nb)
        qf = np.zeros(nb)
        pf = np.zeros(nb)
        acc = {chain: {k: np.zeros(nb) for k in acc_names} for chain in ("coarse", "fine")}

        j = 0
        while j < n_total:
            n = min(_CHUNK, n_total - j)
            xi = rng.standard_normal((2, n, 2, nb))  # (noise channel, step, substep, traj)
            for k in range(n):
                step = j + k
                xi_p1, xi_p2 = xi[1, k, 0], xi[1, k, 1]
                xi_q1, xi_q2 = xi[0, k, 0], xi[0, k, 1]

                # two fine sub-steps
                for half, (xp, xq) in enumerate(((xi_p1, xi_q1), (xi_p2, xi_q2))):
                    fstep = 2 * step + half
                    drive = f_fine[fstep] if f_fine is not None else 0.0
                    fb_k = fb_f[fstep] if fb_f is not None else 0.0
                    pf_new = dec_p_f * pf + amp_p_f * xp + dt_f * (-qf + drive + fb_k)
                    qf_new = dec_q_f * qf + amp_q_f * xq + dt_f * pf_new
                    if fstep > 2 * burn:
                        acc["fine"]["qp"] += qf * (0.5 * (pf + pf_new))
                    pf, qf = pf_new, qf_new
                    if fstep >= 2 * burn:
                        a = acc["fine"]
                        a["q2"] += qf * qf
                        a["p2"] += pf * pf
                        a["q"] += qf
                        a["p"] += pf

                # one coarse step from the composed noise
                eta_p = amp_p_f * (dec_p_f * xi_p1 + xi_p2)
                eta_q = amp_q_f * (dec_q_f * xi_q1 + xi_q2) if a_q > 0 else amp_q_c * (
                    (xi_q1 + xi_q2) / math.sqrt(2.0)
                )
                drive = f_coarse[step] if f_coarse is not None else 0.0
                fb_k = (
                    0.5 * (fb_f[2 * step] + fb_f[2 * step + 1]) if fb_f is not None else 0.0
                )
                pc_new = dec_p_c * pc + eta_p + dt * (-qc + drive + fb_k)
                qc_new = dec_q_c * qc + eta_q + dt * pc_new
                if step > burn:
                    acc["coarse"]["qp"] += qc * (0.5 * (pc + pc_new))
                pc, qc = pc_new, qc_new
                if step >= burn:
                    a = acc["coarse"]
                    a["q2"] += qc * qc
                    a["p2"] += pc * pc
                    a["q"] += qc
                    a["p"] += pc
            j += n
            peak = max(float(np.max(np.abs(qc))), float(np.max(np.abs(qf))))
            if not math.isfinite(peak) or peak > guard:
                raise InstabilityError(
                    f"|Q| reached {peak:.3g} (guard {guard:.3g}) in paired run at "
                    f"step {j} of {n_total}"
                )

        counts = {"coarse": n_steps, "fine": 2 * n_steps}
        for chain in ("coarse", "fine"):
            for key in acc_names:
                cnt = counts[chain] - 1 if key == "qp" else counts[chain]
                per_traj[chain][key].append(acc[chain][key] / cnt)

    def build(chain: str, dt_val: float) -> EnsembleStats:
        def reduce(key: str) -> tuple[float, float]:
            vals = np.concatenate(per_traj[chain][key])
            return float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(len(vals)))

        q2, q2e = reduce("q2")
        p2, p2e = reduce("p2")
        qp, qpe = reduce("qp")
        mq, mqe = reduce("q")
        mp, mpe = reduce("p")
        return EnsembleStats(
            q2=q2, q2_err=q2e, p2=p2, p2_err=p2e, qp=qp, qp_err=qpe,
            mean_q=mq, mean_q_err=mqe, mean_p=mp, mean_p_err=mpe,
            seed=cfg.seed, n_traj=cfg.n_traj, dt=dt_val,
        )

    return build("coarse", dt), build("fine", dt_f)


@dataclass(frozen=True)
class CompareEntry:
    name: str
    analytic: float
    empirical: float
    error: float
    z: float


@dataclass(frozen=True)
class CompareReport:
    entries: tuple[CompareEntry, ...]
    z_max: float

    @property
    def passed(self) -> bool:
        return all(abs(e.z) <= self.z_max for e in self.entries)

    @property
    def failures(self) -> tuple[str, ...]:
        return tuple(e.name for e in self.entries if abs(e.z) > self.z_max)

    def __str__(self) -> str:
        lines = [
            f"{e.name}: analytic={e.analytic:.6g} empirical={e.empirical:.6g} "
            f"+- {e.error:.2g} (z={e.z:+.2f})"
            for e in self.entries
        ]
        verdict = "PASS" if self.passed else "FAIL: " + ", ".join(self.failures)
        return "\n".join(lines + [verdict])


def compare(analytic, empirical: EnsembleStats, z_max: float = 3.0) -> CompareReport:
    """z-score the Monte Carlo estimates against analytic predictions.

    ``analytic`` is a MomentSet (compares q2, p2, qp) or a SpectrumSeries
    (compares per-bin values against the empirical spectrum, whose grid must
    match).  The report passes when every |z| <= z_max.
    """
    entries: list[CompareEntry] = []
    if isinstance(analytic, MomentSet):
        for name, a_val, e_val, e_err in (
            ("q2", analytic.q2, empirical.q2, empirical.q2_err),
            ("p2", analytic.p2, empirical.p2, empirical.p2_err),
            ("qp", analytic.qp, empirical.qp, empirical.qp_err),
        ):
            if e_err > 0:
                z = (e_val - a_val) / e_err
            else:
                z = 0.0 if e_val == a_val else math.inf
            entries.append(CompareEntry(name, a_val, e_val, e_err, z))
        return CompareReport(entries=tuple(entries), z_max=z_max)

    if isinstance(analytic, SpectrumSeries):
        if empirical.spectrum is None:
            raise ValueError("empirical stats carry no spectrum estimate")
        emp = empirical.spectrum
        if emp.omegas.shape != analytic.omegas.shape or not np.allclose(
            emp.omegas, analytic.omegas, rtol=1e-9, atol=1e-12
        ):
            raise ValueError("spectrum grids do not match (shape mismatch)")
        for w, a_val, e_val, e_err in zip(
            analytic.omegas, analytic.values, emp.values, emp.errors
        ):
            z = (e_val - a_val) / e_err if e_err > 0 else math.inf
            entries.append(CompareEntry(f"bin omega={w:.6g}", a_val, e_val, e_err, z))
        return CompareReport(entries=tuple(entries), z_max=z_max)

    raise TypeError(f"cannot compare against {type(analytic).__name__}")
