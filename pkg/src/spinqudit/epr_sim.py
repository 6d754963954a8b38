"""Field-swept, powder-averaged continuous-wave EPR simulation.

Resonances are located by scanning the level-pair frequencies nu_nm(B) over
the user's field grid, bracketing sign changes of nu_nm - nu_spectrometer
and refining each bracket by bisection to 0.01 mT. Multiple crossings per
pair (looping transitions) are all reported; a curvature heuristic warns
when the grid is too coarse to bracket a crossing hidden between points.

Transition weights follow the standard unpolarized powder convention:
(|<n|S_x'|m>|^2 + |<n|S_y'|m>|^2)/2 with the primed frame chosen so z'
lies along the static field, times the Boltzmann population difference at
the spectrometer temperature. Weights depend only on squared moduli, so
they are invariant under eigenvector phase changes.
"""

from __future__ import annotations

import csv
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .constants import K_TO_GHZ, MUB_GHZ_PER_T
from .ensembles import EnsembleSpec, ensemble_params, powder_directions
from .errors import CoarseGridWarning, DataError, ValidationError
from .spin_core import coupled_spin_component, field_decomposition, system_gs, system_spins

__all__ = [
    "SpectrometerSpec",
    "Spectrum",
    "Resonance",
    "resonance_search",
    "powder_spectrum",
    "derivative_spectrum",
    "write_spectrum_csv",
    "read_spectrum_csv",
]

_FWHM_PER_SIGMA = 2.3548200450309493
_BISECT_TOL_T = 1e-5  # 0.01 mT
# orientations per work chunk; fixed so results do not depend on thread count
_CHUNK = 8


@dataclass(frozen=True)
class SpectrometerSpec:
    """Spectrometer frequency, swept-field grid and line shape settings."""

    frequency: float               # GHz
    field_grid: np.ndarray         # Tesla, strictly ascending
    linewidth_fwhm: float = 5.0    # mT, Gaussian convolution width
    temperature: float = 6.0       # K

    def __post_init__(self):
        if not (self.frequency > 0):
            raise ValidationError("spectrometer frequency must be positive")
        grid = np.asarray(self.field_grid, dtype=float)
        if grid.ndim != 1 or grid.size < 2:
            raise ValidationError("field grid must be a 1-d array with >= 2 points")
        if np.any(np.diff(grid) <= 0):
            raise ValidationError("field grid must be strictly ascending")
        if not (self.linewidth_fwhm > 0):
            raise ValidationError("linewidth must be positive")
        if not (self.temperature > 0):
            raise ValidationError("temperature must be positive")
        object.__setattr__(self, "field_grid", grid)


@dataclass(frozen=True)
class Spectrum:
    """A simulated spectrum on a field grid (Tesla); amplitude is arbitrary."""

    field_grid: np.ndarray
    amplitude: np.ndarray
    kind: str = "absorption"

    def __post_init__(self):
        grid = np.asarray(self.field_grid, dtype=float)
        amp = np.asarray(self.amplitude, dtype=float)
        if grid.shape != amp.shape:
            raise ValidationError("field grid and amplitude lengths differ")
        if self.kind not in ("absorption", "first_derivative"):
            raise ValidationError(f"unknown spectrum kind {self.kind!r}")
        object.__setattr__(self, "field_grid", grid)
        object.__setattr__(self, "amplitude", amp)


class Resonance(NamedTuple):
    """One located resonance: field (T), level pair (0-based, n < m), weight."""

    field_t: float
    n: int
    m: int
    weight: float


def _perp_frame(direction) -> tuple[np.ndarray, np.ndarray]:
    """Two orthonormal vectors perpendicular to ``direction``."""
    d = np.asarray(direction, dtype=float)
    aux = np.array([0.0, 0.0, 1.0]) if abs(d[2]) < 0.9 else np.array([1.0, 0.0, 0.0])
    e1 = np.cross(d, aux)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(d, e1)
    return e1, e2


def _batched_eigvalsh(h0, hb, fields, chunk=256):
    out = np.empty((fields.size, h0.shape[0]))
    for start in range(0, fields.size, chunk):
        b = fields[start:start + chunk]
        out[start:start + chunk] = np.linalg.eigvalsh(
            h0[None, :, :] + b[:, None, None] * hb[None, :, :]
        )
    return out


def _hidden_extrema_count(nu: np.ndarray, target: float) -> int:
    """Count interior parabolic extrema of nu(B) that cross the target.

    ``nu`` has shape (n_fields, n_pairs). A discrete local extremum whose
    parabolic vertex lies on the other side of the target from its three
    supporting points signals a potential pair of crossings hidden inside
    one grid step.
    """
    if nu.shape[0] < 3:
        return 0
    y0, y1, y2 = nu[:-2], nu[1:-1], nu[2:]
    d1 = y1 - y0
    d2 = y2 - y1
    extremum = (d1 * d2) < 0
    curv = y2 - 2 * y1 + y0
    with np.errstate(divide="ignore", invalid="ignore"):
        vertex = y1 - (y2 - y0) ** 2 / (8.0 * curv)
    same_side = ((y0 > target) & (y1 > target) & (y2 > target)) | (
        (y0 < target) & (y1 < target) & (y2 < target)
    )
    crosses = np.where(y1 > target, vertex < target, vertex > target)
    return int(np.count_nonzero(extremum & same_side & crosses & np.isfinite(vertex)))


def resonance_search(params, orientation, spec: SpectrometerSpec) -> list[Resonance]:
    """Locate all resonance fields for one molecular orientation.

    Returns every field in the grid range where a level-pair frequency
    crosses ``spec.frequency``, refined to 0.01 mT, with the transition
    weight evaluated at the refined field.
    """
    grid = spec.field_grid
    h0, hb = field_decomposition(params, orientation)
    d = h0.shape[0]

    ev = _batched_eigvalsh(h0, hb, grid)
    iu_n, iu_m = np.triu_indices(d, 1)
    nu = ev[:, iu_m] - ev[:, iu_n]            # (nB, npairs), >= 0
    f = nu - spec.frequency

    hidden = _hidden_extrema_count(nu, spec.frequency)
    if hidden:
        warnings.warn(
            f"{hidden} possible resonance(s) may be hidden between field-grid "
            "points (frequency extremum crossing the spectrometer frequency); "
            "refine the field grid",
            CoarseGridWarning,
            stacklevel=2,
        )

    neg = np.signbit(f)
    seg, pair = np.nonzero(neg[:-1] != neg[1:])
    if seg.size == 0:
        return []

    lo = grid[seg].copy()
    hi = grid[seg + 1].copy()
    f_lo_neg = neg[seg, pair]
    n_idx = iu_n[pair]
    m_idx = iu_m[pair]

    while np.max(hi - lo) > _BISECT_TOL_T:
        mid = 0.5 * (lo + hi)
        ev_mid = np.linalg.eigvalsh(h0[None] + mid[:, None, None] * hb[None])
        f_mid = ev_mid[np.arange(mid.size), m_idx] - ev_mid[np.arange(mid.size), n_idx] - spec.frequency
        mid_neg = np.signbit(f_mid)
        go_right = mid_neg == f_lo_neg
        lo = np.where(go_right, mid, lo)
        hi = np.where(go_right, hi, mid)
    b_res = 0.5 * (lo + hi)

    # weights at the refined fields
    ev_res, vec = np.linalg.eigh(h0[None] + b_res[:, None, None] * hb[None])
    spins = system_spins(params)
    gs = system_gs(params)
    e1, e2 = _perp_frame(orientation)
    op1 = coupled_spin_component(spins, e1, weights=gs)
    op2 = coupled_spin_component(spins, e2, weights=gs)

    k = np.arange(b_res.size)
    vn = np.take_along_axis(vec, n_idx[:, None, None], axis=2)[:, :, 0]
    vm = np.take_along_axis(vec, m_idx[:, None, None], axis=2)[:, :, 0]
    el1 = np.sum(vn.conj() * (vm @ op1.T), axis=1)
    el2 = np.sum(vn.conj() * (vm @ op2.T), axis=1)
    element_sq = 0.5 * (np.abs(el1) ** 2 + np.abs(el2) ** 2)

    shifted = ev_res - ev_res[:, :1]
    w = np.exp(-shifted / (K_TO_GHZ * spec.temperature))
    pops = w / w.sum(axis=1, keepdims=True)
    dpop = pops[k, n_idx] - pops[k, m_idx]

    weights = element_sq * dpop
    order = np.argsort(b_res, kind="stable")
    return [
        Resonance(float(b_res[i]), int(n_idx[i]), int(m_idx[i]), float(weights[i]))
        for i in order
    ]


def _uniform_step(grid: np.ndarray) -> float:
    steps = np.diff(grid)
    step = steps[0]
    if np.max(np.abs(steps - step)) > 1e-9 * step:
        raise ValidationError("powder spectra require a uniform field grid")
    return float(step)


def _accumulate(params_list, directions, spec, step) -> np.ndarray:
    grid = spec.field_grid
    hist = np.zeros(grid.size)
    for u in directions:
        for p in params_list:
            for res in resonance_search(p, u, spec):
                idx = int(round((res.field_t - grid[0]) / step))
                if 0 <= idx < grid.size:
                    hist[idx] += res.weight
    return hist


def powder_spectrum(params, ensemble: EnsembleSpec, spec: SpectrometerSpec,
                    threads: int = 1) -> Spectrum:
    """Powder-averaged absorption spectrum with strain broadening.

    Resonance weights are accumulated into the field-grid bins over all
    orientations and strain samples, normalized by the number of ensemble
    members, then convolved with a Gaussian of ``spec.linewidth_fwhm``.
    Work is split into fixed-size orientation chunks merged in a fixed
    order, so the result is independent of ``threads``.
    """
    grid = spec.field_grid
    step = _uniform_step(grid)
    directions = (
        powder_directions(ensemble.n_orientations)
        if ensemble.n_orientations > 1
        else np.array([[0.0, 0.0, 1.0]])
    )
    params_list = ensemble_params(params, ensemble)

    chunks = [directions[i:i + _CHUNK] for i in range(0, len(directions), _CHUNK)]
    if threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            partials = list(pool.map(
                lambda c: _accumulate(params_list, c, spec, step), chunks
            ))
    else:
        partials = [_accumulate(params_list, c, spec, step) for c in chunks]

    hist = np.zeros(grid.size)
    for part in partials:
        hist += part
    hist /= len(directions) * len(params_list)

    sigma_bins = (spec.linewidth_fwhm * 1e-3) / _FWHM_PER_SIGMA / step
    half = max(1, int(np.ceil(4 * sigma_bins)))
    x = np.arange(-half, half + 1)
    kernel = np.exp(-0.5 * (x / sigma_bins) ** 2)
    kernel /= kernel.sum()
    amp = np.convolve(hist, kernel, mode="same")
    return Spectrum(field_grid=grid, amplitude=amp, kind="absorption")


def derivative_spectrum(s: Spectrum) -> Spectrum:
    """First-derivative presentation of an absorption spectrum.

    Central differences on the field grid, one-sided at the endpoints.
    Differentiating an already-differentiated spectrum is refused.
    """
    if s.kind != "absorption":
        raise ValidationError("derivative_spectrum expects an absorption spectrum")
    amp = np.gradient(s.amplitude, s.field_grid)
    return Spectrum(field_grid=s.field_grid, amplitude=amp, kind="first_derivative")


def write_spectrum_csv(s: Spectrum, path, comments=()) -> None:
    """Write ``B_mT,amplitude`` rows, with the kind recorded as a comment."""
    with open(path, "w", newline="") as fh:
        fh.write(f"# kind={s.kind}\n")
        for line in comments:
            fh.write(f"# {line}\n")
        fh.write("B_mT,amplitude\n")
        for b, a in zip(s.field_grid, s.amplitude):
            fh.write(f"{b * 1e3:.12g},{a:.12g}\n")


def read_spectrum_csv(path) -> Spectrum:
    """Read a spectrum written by :func:`write_spectrum_csv`."""
    kind = "absorption"
    rows = []
    with open(path, newline="") as fh:
        for i, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if body.startswith("kind="):
                    kind = body[len("kind="):]
                continue
            if line == "B_mT,amplitude":
                continue
            parts = line.split(",")
            try:
                rows.append((float(parts[0]), float(parts[1])))
            except (ValueError, IndexError) as exc:
                raise DataError(f"{path}: bad row {i}: {line!r}") from exc
    if not rows:
        raise DataError(f"{path}: no data rows")
    arr = np.array(rows)
    return Spectrum(field_grid=arr[:, 0] * 1e-3, amplitude=arr[:, 1], kind=kind)
