"""Transition-frequency and Rabi-rate maps for driven transitions.

The Rabi convention is Omega_R = (g mu_B b1 / h) * |<n| S_d |m>| with b1
the drive amplitude, i.e. the map stores rates per mT of drive and carries
no extra factor 1/2. The rotating-wave half-factor alternative is exposed
as a switch for sensitivity studies but is off by default: the plain
convention reproduces measured nutation frequencies at quoted drive
amplitudes.

The map itself is population-free (pure matrix elements); thermal weighting
belongs to the spectroscopy layer.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constants import MUB_GHZ_PER_T
from .errors import ValidationError
from .spin_core import EigenSystem, coupled_spin_component

__all__ = ["RabiMap", "transition_frequencies", "rabi_map", "write_rabi_map_csv"]


@dataclass(frozen=True)
class RabiMap:
    """Symmetric per-pair drive rates (MHz/mT) and gaps (GHz)."""

    rate: np.ndarray
    freq: np.ndarray
    d: int
    drive_direction: tuple[float, float, float]

    def __post_init__(self):
        r = np.asarray(self.rate, dtype=float)
        f = np.asarray(self.freq, dtype=float)
        if r.shape != (self.d, self.d) or f.shape != (self.d, self.d):
            raise ValidationError("rate/freq must be d x d")
        object.__setattr__(self, "rate", r)
        object.__setattr__(self, "freq", f)


def transition_frequencies(es: EigenSystem) -> np.ndarray:
    """|E_n - E_m| for every level pair, in GHz."""
    e = es.energies
    return np.abs(e[:, None] - e[None, :])


def rabi_map(es: EigenSystem, drive_direction, g, spins=None,
             half_factor: bool = False) -> RabiMap:
    """Rabi rates per mT of drive amplitude for every level pair.

    ``spins`` names the tensor factors of the Hilbert space (e.g. ``(3.5,)``
    for one ion, ``(3.5, 3.5)`` for a dimer); by default a single spin is
    inferred from the dimension. ``g`` may be a scalar (applied to every
    site) or one value per site. The drive direction should be perpendicular
    to the static field for the usual geometry; this is recommended, not
    enforced.
    """
    d_vec = np.asarray(drive_direction, dtype=float)
    norm = np.linalg.norm(d_vec)
    if norm == 0:
        raise ValidationError("drive direction must be a nonzero vector")
    d_vec = d_vec / norm

    if spins is None:
        spins = ((es.dimension - 1) / 2.0,)
    spins = tuple(spins)
    dim = int(np.prod([int(round(2 * s)) + 1 for s in spins]))
    if dim != es.dimension:
        raise ValidationError(
            f"spins {spins} give dimension {dim}, eigen system has {es.dimension}"
        )
    if np.isscalar(g):
        weights = (float(g),) * len(spins)
    else:
        weights = tuple(float(x) for x in g)
        if len(weights) != len(spins):
            raise ValidationError("need one g per spin")

    op = coupled_spin_component(spins, d_vec, weights=weights)
    m = es.states.conj().T @ op @ es.states
    rate = MUB_GHZ_PER_T * np.abs(m)  # GHz/T == MHz/mT
    if half_factor:
        rate = 0.5 * rate
    np.fill_diagonal(rate, 0.0)
    rate = 0.5 * (rate + rate.T)  # squash asymmetry at rounding level
    return RabiMap(rate=rate, freq=transition_frequencies(es), d=es.dimension,
                   drive_direction=tuple(d_vec))


def write_rabi_map_csv(rmap: RabiMap, path, comments=()) -> None:
    """Export the upper triangle as ``n,m,freq_GHz,rate_MHz_per_mT`` rows.

    Levels are numbered from 1 in the file.
    """
    with open(path, "w", newline="") as fh:
        for line in comments:
            fh.write(f"# {line}\n")
        fh.write("n,m,freq_GHz,rate_MHz_per_mT\n")
        for n in range(rmap.d):
            for m in range(n + 1, rmap.d):
                fh.write(
                    f"{n + 1},{m + 1},{rmap.freq[n, m]:.12g},{rmap.rate[n, m]:.12g}\n"
                )
