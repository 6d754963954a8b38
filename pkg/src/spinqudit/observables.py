"""Thermodynamic observables from eigenspectra.

Heat capacity, magnetization and the susceptibility-temperature product are
computed from exact spectra, averaged over powder orientations and strain
samples (average of per-molecule observables, modeling an inhomogeneous
non-interacting ensemble). All loops run in a fixed order, so results are
bit-identical for a fixed seed.

Unit conventions: temperatures in Kelvin, energies internally in GHz,
magnetization in Bohr magnetons per molecule, chi*T in emu*K/mol computed
as chiT = T * M * (N_A mu_B) / H with H in Oe = 1e4 * B[T].
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .constants import K_TO_GHZ, MUB_GHZ_PER_T, NA_MUB_EMU
from .ensembles import EnsembleSpec, ensemble_params, orientation_set
from .errors import DataError, DataRangeError, DomainError, ValidationError
from .spin_core import (
    EigenSystem,
    FieldSpec,
    build_hamiltonian,
    coupled_spin_component,
    system_gs,
    system_spins,
)

__all__ = [
    "ThermalGrid",
    "BaselineTable",
    "populations",
    "heat_capacity",
    "free_energy",
    "magnetization",
    "chi_t_curve",
    "add_lattice_baseline",
]


@dataclass(frozen=True)
class ThermalGrid:
    """Strictly ascending positive temperatures plus the applied field."""

    temperatures: np.ndarray
    field: FieldSpec

    def __post_init__(self):
        t = np.asarray(self.temperatures, dtype=float)
        if t.size == 0:
            raise ValidationError("temperature grid is empty")
        if np.any(t <= 0):
            raise ValidationError("temperatures must be positive")
        if np.any(np.diff(t) <= 0):
            raise ValidationError("temperatures must be strictly ascending")
        object.__setattr__(self, "temperatures", t)


@dataclass(frozen=True)
class BaselineTable:
    """Tabulated nonmagnetic (lattice) heat capacity, c/R vs T."""

    t_k: np.ndarray
    c_over_r: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.t_k, dtype=float)
        c = np.asarray(self.c_over_r, dtype=float)
        if t.ndim != 1 or t.shape != c.shape or t.size < 2:
            raise ValidationError("baseline needs matching 1-d T and c/R columns (>= 2 rows)")
        if np.any(np.diff(t) <= 0):
            raise ValidationError("baseline temperatures must be strictly ascending")
        if np.any(c < 0):
            raise ValidationError("baseline c/R must be non-negative")
        object.__setattr__(self, "t_k", t)
        object.__setattr__(self, "c_over_r", c)

    def interpolate(self, temperatures) -> np.ndarray:
        """Linear interpolation; requests outside the table raise."""
        t = np.asarray(temperatures, dtype=float)
        if np.any(t < self.t_k[0]) or np.any(t > self.t_k[-1]):
            raise DataRangeError(
                f"baseline covers [{self.t_k[0]:g}, {self.t_k[-1]:g}] K; "
                "refusing to extrapolate"
            )
        return np.interp(t, self.t_k, self.c_over_r)

    @classmethod
    def from_csv(cls, path) -> "BaselineTable":
        """Read a two-column CSV with header ``T_K,c_over_R``."""
        rows = []
        with open(path, newline="") as fh:
            reader = csv.reader(line for line in fh if not line.startswith("#"))
            header = next(reader, None)
            if header is None or [h.strip() for h in header] != ["T_K", "c_over_R"]:
                raise DataError(f"{path}: expected header 'T_K,c_over_R'")
            for i, row in enumerate(reader, start=2):
                if not row:
                    continue
                try:
                    rows.append((float(row[0]), float(row[1])))
                except (ValueError, IndexError) as exc:
                    raise DataError(f"{path}: bad row {i}: {row!r}") from exc
        if len(rows) < 2:
            raise DataError(f"{path}: need at least two baseline rows")
        arr = np.array(rows)
        return cls(t_k=arr[:, 0], c_over_r=arr[:, 1])


def populations(es: EigenSystem, t: float) -> np.ndarray:
    """Boltzmann populations of the eigenlevels at temperature ``t`` (K).

    Computed with the energies shifted by their minimum so the exponent
    never overflows; the result sums to 1.
    """
    if not (t > 0):
        raise DomainError(f"temperature must be positive, got {t}")
    e = (es.energies - es.energies[0]) / (K_TO_GHZ * t)
    w = np.exp(-e)
    return w / w.sum()


def _boltzmann(e_shift_ghz: np.ndarray, t: float) -> np.ndarray:
    w = np.exp(-e_shift_ghz / (K_TO_GHZ * t))
    return w / w.sum()


def _ensemble_iter(params, ensemble: EnsembleSpec, direction):
    """Yield (strained params, unit field direction) in a fixed order."""
    dirs = orientation_set(ensemble, direction)
    strained = ensemble_params(params, ensemble)
    for u in dirs:
        for p in strained:
            yield p, u


def heat_capacity(params, ensemble: EnsembleSpec, grid: ThermalGrid) -> np.ndarray:
    """Magnetic heat capacity per molecule, c/R, on ``grid.temperatures``.

    c/R = (<(E/k_B)^2> - <E/k_B>^2) / T^2 for each ensemble member, then
    averaged over orientations and strain samples.
    """
    t = grid.temperatures
    beta = 1.0 / (K_TO_GHZ * t)  # 1/GHz
    acc = np.zeros_like(t)
    count = 0
    for p, u in _ensemble_iter(params, ensemble, grid.field.direction):
        f = FieldSpec(magnitude=grid.field.magnitude, direction=tuple(u))
        ev = np.linalg.eigvalsh(build_hamiltonian(p, f))
        e = ev - ev[0]
        w = np.exp(-np.outer(beta, e))
        z = w.sum(axis=1)
        e1 = (w * e).sum(axis=1) / z
        e2 = (w * e**2).sum(axis=1) / z
        acc += (e2 - e1**2) * beta**2  # Var(E)/(k_B T)^2, dimensionless
        count += 1
    return acc / count


def add_lattice_baseline(temperatures, magnetic_c_over_r, baseline: BaselineTable) -> np.ndarray:
    """Pointwise sum of a magnetic c/R curve and the lattice baseline."""
    magnetic = np.asarray(magnetic_c_over_r, dtype=float)
    return magnetic + baseline.interpolate(temperatures)


def free_energy(params, ensemble: EnsembleSpec, field: FieldSpec, t: float) -> float:
    """Ensemble-averaged Helmholtz free energy per molecule, in GHz.

    Provided mainly as the independent route for checking magnetization:
    M = -dF/dB (converted from GHz/T to Bohr magnetons via mu_B/h).
    """
    if not (t > 0):
        raise DomainError(f"temperature must be positive, got {t}")
    kt = K_TO_GHZ * t
    acc = 0.0
    count = 0
    for p, u in _ensemble_iter(params, ensemble, field.direction):
        f = FieldSpec(magnitude=field.magnitude, direction=tuple(u))
        ev = np.linalg.eigvalsh(build_hamiltonian(p, f))
        acc += ev[0] - kt * np.log(np.exp(-(ev - ev[0]) / kt).sum())
        count += 1
    return acc / count


def magnetization(params, ensemble: EnsembleSpec, field: FieldSpec, t: float) -> float:
    """Thermal magnetic moment along the field, mu_B per molecule.

    M = sum_i g_i <S_i . h> with the expectation in the eigenbasis,
    averaged over the ensemble.
    """
    if not (t > 0):
        raise DomainError(f"temperature must be positive, got {t}")
    spins = system_spins(params)
    gs = system_gs(params)
    acc = 0.0
    count = 0
    for p, u in _ensemble_iter(params, ensemble, field.direction):
        f = FieldSpec(magnitude=field.magnitude, direction=tuple(u))
        ev, vec = np.linalg.eigh(build_hamiltonian(p, f))
        op = coupled_spin_component(spins, u, weights=gs)
        diag = np.real(np.einsum("in,ij,jn->n", vec.conj(), op, vec))
        pn = _boltzmann(ev - ev[0], t)
        acc += float(pn @ diag)
        count += 1
    return acc / count


def chi_t_curve(params, ensemble: EnsembleSpec, grid: ThermalGrid,
                probe_field: float = 0.1) -> np.ndarray:
    """chi*T per molecule in emu*K/mol on ``grid.temperatures``.

    chi is evaluated as M/H at a small probe field (SQUID practice) rather
    than as a zero-field derivative; the default 0.1 T stays within the
    linear-response regime for T >= 2 K. Powder averaged; ``grid.field``
    only supplies the direction when ``n_orientations == 1``.
    """
    if not (probe_field > 0):
        raise DomainError(f"probe field must be positive, got {probe_field}")
    t = grid.temperatures
    spins = system_spins(params)
    gs = system_gs(params)
    acc = np.zeros_like(t)
    count = 0
    for p, u in _ensemble_iter(params, ensemble, grid.field.direction):
        f = FieldSpec(magnitude=probe_field, direction=tuple(u))
        ev, vec = np.linalg.eigh(build_hamiltonian(p, f))
        op = coupled_spin_component(spins, u, weights=gs)
        diag = np.real(np.einsum("in,ij,jn->n", vec.conj(), op, vec))
        e = ev - ev[0]
        w = np.exp(-np.outer(1.0 / (K_TO_GHZ * t), e))
        m_of_t = (w * diag).sum(axis=1) / w.sum(axis=1)
        acc += m_of_t
        count += 1
    m_avg = acc / count
    return t * m_avg * NA_MUB_EMU / (1e4 * probe_field)
