"""Echo-decay fitting and nutation Fourier analysis.

Two-pulse echo decays are modeled as

    y(tau) = y0 + A exp(-2 tau / T_M) {1 + k exp(-lambda tau) cos(2 pi nu tau + phi)}

and three-pulse (stimulated-echo) decays identically with exp(-T / T_1) in
place of the exp(-2 tau / T_M) envelope. The oscillating term is a
phenomenological envelope-modulation component at a nuclear frequency; no
attempt is made to derive it microscopically.

Nutation traces are analyzed by magnitude DFT with optional windowing and
zero padding. Detected peaks are classified against twice the nitrogen
Larmor frequency and the proton Larmor frequency at the trace's field; the
proton frequency can fall inside the plausible Rabi band, in which case a
peak is reported with both candidate labels rather than silently resolved.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares

from .constants import GYRO_MHZ_PER_T
from .errors import DataError, DomainError, FitError, ValidationError

__all__ = [
    "DecayTrace",
    "DecayFit",
    "NutationResult",
    "decay_model",
    "fit_decay",
    "field_sweep_summary",
    "larmor",
    "nutation_fft",
    "read_trace_csv",
    "write_trace_csv",
    "write_fit_report_csv",
]

PARAM_NAMES = ("y0", "a", "t_decay", "k", "lam", "nu", "phi")

T_DECAY_BOUNDS = (1e-3, 1e3)   # microseconds
K_BOUNDS = (0.0, 10.0)


@dataclass(frozen=True)
class DecayTrace:
    """A time-series echo amplitude: tau for 2-pulse, T for 3-pulse (us)."""

    times: np.ndarray
    amplitude: np.ndarray
    kind: str = "two_pulse"
    field_mt: float = 0.0

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        a = np.asarray(self.amplitude, dtype=float)
        if t.ndim != 1 or t.shape != a.shape:
            raise ValidationError("times and amplitude must be matching 1-d arrays")
        if t.size < 16:
            raise ValidationError(f"trace needs >= 16 points, got {t.size}")
        if np.any(np.diff(t) <= 0):
            raise ValidationError("times must be strictly ascending")
        if self.kind not in ("two_pulse", "three_pulse"):
            raise ValidationError(f"unknown trace kind {self.kind!r}")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "amplitude", a)


@dataclass(frozen=True)
class DecayFit:
    """Fitted decay parameters with linearized standard errors.

    ``t_decay`` is T_M for a two-pulse trace and T_1 for a three-pulse one.
    ``flags`` collects soft diagnostics ("bound_hit", "weak_modulation",
    "ill_conditioned"); a flagged fit is still a fit.
    """

    y0: float
    a: float
    t_decay: float
    k: float
    lam: float
    nu: float
    phi: float
    errors: np.ndarray = field(default_factory=lambda: np.zeros(7))
    residual_norm: float = 0.0
    flags: tuple = ()
    kind: str = "two_pulse"

    def __post_init__(self):
        if not (self.t_decay > 0):
            raise ValidationError("t_decay must be positive")
        if self.k < 0:
            raise ValidationError("k must be >= 0")
        err = np.asarray(self.errors, dtype=float)
        if err.shape != (7,) or not np.all(np.isfinite(err)):
            raise ValidationError("errors must be 7 finite values")
        object.__setattr__(self, "errors", err)

    def as_vector(self) -> np.ndarray:
        return np.array([self.y0, self.a, self.t_decay, self.k,
                         self.lam, self.nu, self.phi])


def _envelope_rate(kind: str) -> float:
    # exp(-2 tau / T_M) for two-pulse, exp(-T / T_1) for three-pulse
    return 2.0 if kind == "two_pulse" else 1.0


def decay_model(t, params, kind: str = "two_pulse") -> np.ndarray:
    """Evaluate the decay model; ``params`` ordered as PARAM_NAMES."""
    y0, a, t_decay, k, lam, nu, phi = params
    c = _envelope_rate(kind)
    env = np.exp(-c * t / t_decay)
    mod = 1.0 + k * np.exp(-lam * t) * np.cos(2 * np.pi * nu * t + phi)
    return y0 + a * env * mod


def _smooth(y: np.ndarray, width: int) -> np.ndarray:
    width = max(1, width)
    kernel = np.ones(width) / width
    return np.convolve(y, kernel, mode="same")


def _initial_guess(trace: DecayTrace) -> np.ndarray:
    """Deterministic starting point when the caller supplies none."""
    t = trace.times
    y = trace.amplitude
    n = t.size
    tail = max(4, n // 4)
    head = max(4, n // 10)
    y0 = float(np.mean(y[-tail:]))
    a = float(np.mean(y[:head]) - y0)
    if a == 0.0:
        a = float(np.max(np.abs(y - y0))) or 1.0

    c = _envelope_rate(trace.kind)
    span = t[-1] - t[0]
    # log-linear envelope slope on the smoothed positive part
    env = _smooth(np.abs(y - y0), max(3, n // 20))
    mask = env > 1e-3 * np.max(env)
    t_decay = span / 2
    if np.count_nonzero(mask) >= 4:
        slope = np.polyfit(t[mask], np.log(env[mask]), 1)[0]
        if slope < 0:
            t_decay = float(np.clip(-c / slope, *T_DECAY_BOUNDS))

    # dominant DFT component of the detrended residual
    resid = y - (y0 + a * np.exp(-c * t / t_decay))
    dt = float(np.median(np.diff(t)))
    spec = np.abs(np.fft.rfft(resid - resid.mean()))
    freqs = np.fft.rfftfreq(n, dt)
    nu = float(freqs[np.argmax(spec[1:]) + 1]) if spec.size > 1 else 0.0

    envelope = np.maximum(np.abs(a) * np.exp(-c * t / t_decay), 1e-12 * np.abs(a) + 1e-30)
    k = float(np.clip(np.sqrt(2.0) * np.std(resid / envelope), *K_BOUNDS))
    lam = 1.0 / (5.0 * span)
    return np.array([y0, a, t_decay, k, lam, nu, 0.0])


def fit_decay(trace: DecayTrace, init: DecayFit | None = None,
              max_nfev: int = 4000) -> DecayFit:
    """Damped least-squares fit of the decay model to a trace.

    Uses a trust-region reflective solver with bounds T in [1e-3, 1e3] us,
    k in [0, 10], nu in [0, Nyquist], lambda >= 0. Hitting a bound flags
    the fit rather than failing it; running out of iterations raises
    :class:`FitError` carrying the best parameters reached.
    """
    t = trace.times
    y = trace.amplitude
    nyquist = 0.5 / float(np.median(np.diff(t)))

    x0 = init.as_vector() if init is not None else _initial_guess(trace)
    lower = np.array([-np.inf, -np.inf, T_DECAY_BOUNDS[0], K_BOUNDS[0], 0.0, 0.0, -np.inf])
    upper = np.array([np.inf, np.inf, T_DECAY_BOUNDS[1], K_BOUNDS[1], np.inf, nyquist, np.inf])
    x0 = np.clip(x0, lower + 1e-12, upper - 1e-12)

    def residual(p):
        return decay_model(t, p, trace.kind) - y

    res = least_squares(residual, x0, bounds=(lower, upper), method="trf",
                        xtol=1e-12, ftol=1e-12, gtol=1e-12, max_nfev=max_nfev)
    flags = ()
    if res.status == 0:
        # unidentifiable directions (e.g. k ~ 0) can stall the tight-tolerance
        # pass in a flat valley; certify stationarity at a looser tolerance
        # before declaring failure
        res = least_squares(residual, res.x, bounds=(lower, upper), method="trf",
                            xtol=1e-8, ftol=1e-8, gtol=1e-8, max_nfev=max_nfev)
        if res.status == 0:
            best = _fit_from_result(res, trace, flags=("not_converged",))
            raise FitError(
                f"decay fit did not converge within {max_nfev} evaluations "
                f"(residual norm {np.linalg.norm(res.fun):.3e})",
                best=best,
            )
        flags = ("tolerance_not_reached",)
    return _fit_from_result(res, trace, flags=flags)


def _fit_from_result(res, trace: DecayTrace, flags: tuple = ()) -> DecayFit:
    p = res.x
    n, npar = res.fun.size, p.size
    dof = max(1, n - npar)
    s_sq = float(res.fun @ res.fun) / dof

    flags = list(flags)
    u, sv, vt = np.linalg.svd(res.jac, full_matrices=False)
    if sv[0] == 0 or sv[-1] < 1e-12 * sv[0]:
        flags.append("ill_conditioned")
    sv_inv = np.where(sv > 1e-12 * sv[0] if sv[0] > 0 else sv > 0, 1.0 / np.where(sv > 0, sv, 1.0), 0.0)
    cov = (vt.T * sv_inv**2) @ vt * s_sq
    errors = np.sqrt(np.maximum(np.diag(cov), 0.0))

    if abs(p[2] - T_DECAY_BOUNDS[0]) < 1e-9 or abs(p[2] - T_DECAY_BOUNDS[1]) < 1e-6:
        flags.append("bound_hit")
    if abs(p[3] - K_BOUNDS[1]) < 1e-9:
        flags.append("bound_hit")
    span = trace.times[-1] - trace.times[0]
    if p[3] <= max(1e-3, 2.0 * errors[3]) or p[5] * span < 0.5:
        # modulation indistinguishable from zero, or fewer than half an
        # oscillation inside the window: nu and phi are not identified
        flags.append("weak_modulation")

    return DecayFit(
        y0=float(p[0]), a=float(p[1]), t_decay=float(p[2]), k=float(p[3]),
        lam=float(p[4]), nu=float(p[5]), phi=float(p[6]),
        errors=errors, residual_norm=float(np.linalg.norm(res.fun)),
        flags=tuple(dict.fromkeys(flags)), kind=trace.kind,
    )


def field_sweep_summary(fits) -> list[dict]:
    """Per-field decay parameters, sorted by field; no smoothing applied.

    ``fits`` is an iterable of (field_mT, DecayFit) pairs; at least two
    fields are required for a sweep.
    """
    rows = sorted(fits, key=lambda fw: fw[0])
    if len(rows) < 2:
        raise DomainError("a field sweep needs at least two fields")
    out = []
    for field_mt, fit in rows:
        out.append({
            "field_mT": float(field_mt),
            "t_decay_us": fit.t_decay,
            "t_decay_err_us": float(fit.errors[2]),
            "a": fit.a,
            "a_err": float(fit.errors[1]),
            "nu_MHz": fit.nu,
            "nu_err_MHz": float(fit.errors[5]),
            "kind": fit.kind,
            "flags": "+".join(fit.flags),
        })
    return out


def larmor(nucleus: str, b_mt: float) -> float:
    """Nuclear Larmor frequency in MHz at a field given in mT."""
    if b_mt < 0:
        raise DomainError(f"field must be >= 0, got {b_mt}")
    try:
        gamma = GYRO_MHZ_PER_T[nucleus]
    except KeyError:
        raise DomainError(
            f"unknown nucleus {nucleus!r}; expected one of {sorted(GYRO_MHZ_PER_T)}"
        ) from None
    return gamma * b_mt * 1e-3


@dataclass(frozen=True)
class NutationResult:
    """Magnitude spectrum of a nutation trace with classified peaks.

    ``peaks`` holds (frequency_MHz, magnitude) tuples; ``labels[i]`` is the
    tuple of candidate labels of ``peaks[i]`` drawn from {"rabi",
    "two_x_larmor_N", "larmor_H", "unassigned"}. More than one label on a
    peak means the assignment is ambiguous and both candidates are reported.
    """

    freq_axis: np.ndarray
    magnitude: np.ndarray
    peaks: tuple
    labels: tuple
    resolution: float


def nutation_fft(trace: DecayTrace, window: str = "none", zero_pad_factor: int = 1,
                 noise_floor_multiple: float = 5.0, min_peak_fraction: float = 0.05,
                 nitrogen: str = "N14") -> NutationResult:
    """Magnitude DFT of a nutation trace with peak detection and labeling.

    The trace must be uniformly sampled (relative tolerance 1e-9). The
    signal is mean-subtracted, optionally Hann-windowed, zero padded by
    ``zero_pad_factor`` and transformed; only the non-negative frequency
    half is reported (the input is real, so the spectrum is symmetric).
    Peaks are local maxima above ``noise_floor_multiple`` times the median
    magnitude; ``min_peak_fraction`` of the strongest magnitude acts as a
    second floor so that windowing side lobes of clean signals are not
    mistaken for peaks. Labels are assigned by proximity (within one
    resolution bin)
    to twice the nitrogen Larmor frequency and the proton Larmor frequency
    at ``trace.field_mt``; the largest unassigned peak is labeled "rabi".
    A proton-labeled peak at least as large as the Rabi candidate also
    carries "rabi", reporting the ambiguity instead of resolving it.
    """
    if zero_pad_factor < 1:
        raise DomainError("zero_pad_factor must be >= 1")
    if window not in ("none", "hann"):
        raise DomainError(f"unknown window {window!r}")
    t = trace.times
    steps = np.diff(t)
    dt = steps[0]
    if np.max(np.abs(steps - dt)) > 1e-9 * dt:
        raise DataError("nutation analysis requires uniform sampling")

    y = trace.amplitude - np.mean(trace.amplitude)
    n = y.size
    if window == "hann":
        y = y * np.hanning(n)
    n_padded = int(n * zero_pad_factor)
    magnitude = np.abs(np.fft.rfft(y, n=n_padded))
    freq_axis = np.fft.rfftfreq(n_padded, dt)  # us -> MHz
    resolution = 1.0 / (n_padded * dt)

    floor = max(noise_floor_multiple * np.median(magnitude),
                min_peak_fraction * np.max(magnitude, initial=0.0))
    interior = (magnitude[1:-1] > magnitude[:-2]) & (magnitude[1:-1] >= magnitude[2:])
    peak_idx = np.nonzero(interior & (magnitude[1:-1] > floor))[0] + 1
    peaks = tuple((float(freq_axis[i]), float(magnitude[i])) for i in peak_idx)

    two_nu_n = 2.0 * larmor(nitrogen, trace.field_mt)
    nu_h = larmor("H1", trace.field_mt)
    candidates = []
    for f, _mag in peaks:
        cand = []
        if abs(f - two_nu_n) <= resolution:
            cand.append("two_x_larmor_N")
        if abs(f - nu_h) <= resolution:
            cand.append("larmor_H")
        candidates.append(cand)

    unassigned = [i for i, c in enumerate(candidates) if not c]
    rabi_i = max(unassigned, key=lambda i: peaks[i][1]) if unassigned else None
    if rabi_i is not None:
        candidates[rabi_i].append("rabi")
    for i, cand in enumerate(candidates):
        if "larmor_H" in cand:
            rabi_mag = peaks[rabi_i][1] if rabi_i is not None else -np.inf
            if peaks[i][1] >= rabi_mag:
                cand.append("rabi")
        if not cand:
            cand.append("unassigned")

    return NutationResult(
        freq_axis=freq_axis,
        magnitude=magnitude,
        peaks=peaks,
        labels=tuple(tuple(c) for c in candidates),
        resolution=float(resolution),
    )


def read_trace_csv(path) -> DecayTrace:
    """Read a trace CSV: ``t_us,amplitude`` rows with metadata comments.

    Recognized comments are ``# kind=two_pulse|three_pulse`` and
    ``# field_mT=<value>``. Validation failures carry the row number.
    """
    kind = "two_pulse"
    field_mt = 0.0
    rows = []
    with open(path, newline="") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if body.startswith("kind="):
                    kind = body[len("kind="):].strip()
                elif body.startswith("field_mT="):
                    try:
                        field_mt = float(body[len("field_mT="):])
                    except ValueError as exc:
                        raise DataError(f"{path}: bad field_mT at row {lineno}") from exc
                continue
            if line == "t_us,amplitude":
                continue
            parts = line.split(",")
            try:
                t_val, a_val = float(parts[0]), float(parts[1])
            except (ValueError, IndexError) as exc:
                raise DataError(f"{path}: bad row {lineno}: {line!r}") from exc
            if rows and t_val <= rows[-1][0]:
                raise DataError(f"{path}: non-ascending time at row {lineno}")
            rows.append((t_val, a_val))
    if len(rows) < 16:
        raise DataError(f"{path}: need >= 16 data rows, got {len(rows)}")
    arr = np.array(rows)
    return DecayTrace(times=arr[:, 0], amplitude=arr[:, 1], kind=kind, field_mt=field_mt)


def write_trace_csv(trace: DecayTrace, path, comments=()) -> None:
    """Write a trace in the format accepted by :func:`read_trace_csv`."""
    with open(path, "w", newline="") as fh:
        fh.write(f"# kind={trace.kind}\n")
        fh.write(f"# field_mT={trace.field_mt:.12g}\n")
        for line in comments:
            fh.write(f"# {line}\n")
        fh.write("t_us,amplitude\n")
        for t, a in zip(trace.times, trace.amplitude):
            fh.write(f"{t:.12g},{a:.12g}\n")


def write_fit_report_csv(rows, path, comments=()) -> None:
    """One row per fitted trace: parameters and standard errors."""
    header = ["field_mT", "kind"]
    for name in PARAM_NAMES:
        header += [name, f"{name}_err"]
    header += ["residual_norm", "flags"]
    with open(path, "w", newline="") as fh:
        for line in comments:
            fh.write(f"# {line}\n")
        writer = csv.writer(fh)
        writer.writerow(header)
        for field_mt, fit in rows:
            vec = fit.as_vector()
            row = [f"{field_mt:.12g}", fit.kind]
            for i in range(7):
                row += [f"{vec[i]:.12g}", f"{fit.errors[i]:.12g}"]
            row += [f"{fit.residual_norm:.12g}", "+".join(fit.flags)]
            writer.writerow(row)
