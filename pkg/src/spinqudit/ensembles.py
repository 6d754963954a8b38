"""Powder orientation grids and static parameter-strain sampling.

A powder (or frozen-solution) measurement averages over molecule-to-field
orientations; line broadening additionally reflects a static distribution
of the anisotropy constants across the ensemble ("D/E strain"). Both are
represented here:

* orientations come from a deterministic Fibonacci-spiral point set on the
  sphere (equal weights, no quadrature tables);
* strain is sampled as independent Gaussians on D and on E with the given
  FWHM expressed as a fraction of each nominal value.

Strain draws are reproducible: every site of a system gets its own child
stream spawned from the ensemble seed (site 1 -> child 0, site 2 ->
child 1). A single-ion system draws from child ``strain_stream``, so a
monomer calculation can be aligned with either site of a dimer for paired
comparisons.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import ValidationError
from .spin_core import DimerParams, SingleIonParams

__all__ = ["EnsembleSpec", "powder_directions", "strain_multipliers", "ensemble_params"]

# FWHM of a Gaussian in units of its sigma.
_FWHM_PER_SIGMA = 2.3548200450309493


@dataclass(frozen=True)
class EnsembleSpec:
    """Powder-grid size, strain widths and RNG seed for ensemble averages.

    ``d_strain`` / ``e_strain`` are FWHM fractions of the nominal |D| / |E|.
    With ``n_orientations == 1`` the field direction of the calculation is
    used as-is (single-crystal mode) instead of a one-point powder grid.
    """

    n_orientations: int = 230
    d_strain: float = 0.0
    e_strain: float = 0.0
    n_strain_samples: int = 1
    seed: int = 0
    strain_stream: int = 0

    def __post_init__(self):
        if self.n_orientations < 1:
            raise ValidationError("n_orientations must be >= 1")
        if self.d_strain < 0 or self.e_strain < 0:
            raise ValidationError("strain FWHM fractions must be >= 0")
        if self.n_strain_samples < 1:
            raise ValidationError("n_strain_samples must be >= 1")
        if self.strain_stream not in (0, 1):
            raise ValidationError("strain_stream must be 0 or 1")


def powder_directions(n: int) -> np.ndarray:
    """Deterministic equal-area Fibonacci-spiral unit vectors, shape (n, 3)."""
    if n < 1:
        raise ValidationError("need at least one orientation")
    i = np.arange(n) + 0.5
    z = 1.0 - 2.0 * i / n
    phi = np.pi * (1.0 + np.sqrt(5.0)) * i
    r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])


def orientation_set(ensemble: EnsembleSpec, direction) -> np.ndarray:
    """Field directions for the ensemble average.

    One orientation means "use the requested direction"; more than one
    means a powder grid (the requested direction is then irrelevant).
    """
    if ensemble.n_orientations == 1:
        return np.asarray(direction, dtype=float).reshape(1, 3)
    return powder_directions(ensemble.n_orientations)


def strain_multipliers(ensemble: EnsembleSpec, n_sites: int) -> np.ndarray:
    """Per-sample (D, E) multipliers, shape (n_samples, n_sites, 2).

    With both strain widths zero this collapses to a single nominal sample
    so that a zero-width ensemble is bit-identical to an unstrained one.
    """
    if ensemble.d_strain == 0.0 and ensemble.e_strain == 0.0:
        return np.ones((1, n_sites, 2))
    children = np.random.SeedSequence(ensemble.seed).spawn(2)
    out = np.empty((ensemble.n_strain_samples, n_sites, 2))
    for i in range(n_sites):
        stream = ensemble.strain_stream if n_sites == 1 else i
        rng = np.random.default_rng(children[stream])
        x = rng.standard_normal((ensemble.n_strain_samples, 2))
        out[:, i, 0] = 1.0 + (ensemble.d_strain / _FWHM_PER_SIGMA) * x[:, 0]
        out[:, i, 1] = 1.0 + (ensemble.e_strain / _FWHM_PER_SIGMA) * x[:, 1]
    return out


def _strained_site(site: SingleIonParams, mult) -> SingleIonParams:
    return replace(site, d_zfs=site.d_zfs * mult[0], e_zfs=site.e_zfs * mult[1])


def ensemble_params(params, ensemble: EnsembleSpec) -> list:
    """The list of strained parameter sets for the ensemble, in draw order."""
    if isinstance(params, SingleIonParams):
        mults = strain_multipliers(ensemble, 1)
        return [_strained_site(params, m[0]) for m in mults]
    if isinstance(params, DimerParams):
        mults = strain_multipliers(ensemble, 2)
        return [
            replace(
                params,
                site1=_strained_site(params.site1, m[0]),
                site2=_strained_site(params.site2, m[1]),
            )
            for m in mults
        ]
    raise TypeError(f"unsupported parameter type {type(params).__name__}")
