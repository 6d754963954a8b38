"""Spin operators, spin Hamiltonians and exact diagonalization.

Hamiltonian conventions (energies in GHz, fields in Tesla):

    single ion:  H = -D*Sz^2 + E*(Sx^2 - Sy^2) - g*muB*B*(h.S)
    dimer:       H = H1 (x) I + I (x) H2 - J*(S1x S2x + S1y S2y + S1z S2z)

with D, E, J given in Kelvin and converted internally, J < 0
antiferromagnetic. The signs are deliberate and fixed: changing them
silently breaks every fitted parameter set shipped with the package.

The site-2 anisotropy frame of a dimer may be rotated relative to site 1
via intrinsic z-y-z Euler angles; the default (0, 0, 0) is the collinear
case. Field directions are always expressed in the site-1 anisotropy frame.

Eigenvector gauge in degenerate subspaces is not contractual: downstream
quantities (populations, |matrix element|^2, reachability) are all gauge
invariant.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.transform import Rotation

from .constants import K_TO_GHZ, MUB_GHZ_PER_T, kelvin_to_ghz
from .errors import DomainError, InvalidSpinError, ValidationError

__all__ = [
    "SpinOperatorSet",
    "SingleIonParams",
    "DimerParams",
    "FieldSpec",
    "EigenSystem",
    "spin_operators",
    "spin_component",
    "coupled_spin_component",
    "single_ion_hamiltonian",
    "dimer_hamiltonian",
    "build_hamiltonian",
    "field_decomposition",
    "system_spins",
    "system_gs",
    "eigensolve",
]


@dataclass(frozen=True)
class SpinOperatorSet:
    """The three spin-component matrices for one spin, in units of hbar = 1.

    The basis is ordered by descending magnetic quantum number
    (m = s, s-1, ..., -s), so ``sz`` is ``diag(s, ..., -s)``.
    """

    s: float
    sx: np.ndarray
    sy: np.ndarray
    sz: np.ndarray

    @property
    def dimension(self) -> int:
        return int(round(2 * self.s)) + 1


@dataclass(frozen=True)
class SingleIonParams:
    """Anisotropy constants (Kelvin), g factor and spin of one ion.

    The conventional rhombicity bound |E| <= |D|/3 is intentionally not
    enforced: physically fitted parameter sets may violate it, and any
    finite values are accepted.
    """

    d_zfs: float
    e_zfs: float
    g: float = 1.99
    s: float = 3.5

    def __post_init__(self):
        if not (self.g > 0):
            raise ValidationError(f"g must be positive, got {self.g}")
        if not (self.s > 0):
            raise ValidationError(f"s must be positive, got {self.s}")
        _validate_spin(self.s)
        for name in ("d_zfs", "e_zfs"):
            if not np.isfinite(getattr(self, name)):
                raise ValidationError(f"{name} must be finite")


@dataclass(frozen=True)
class DimerParams:
    """Two exchange-coupled ions; J in Kelvin, negative = antiferromagnetic.

    ``axes_rotation`` gives the orientation of the site-2 anisotropy axes in
    the site-1 frame as intrinsic z-y-z Euler angles (radians). The default
    is the collinear case.
    """

    site1: SingleIonParams
    site2: SingleIonParams
    j_exchange: float
    axes_rotation: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        if not np.isfinite(self.j_exchange):
            raise ValidationError("j_exchange must be finite")
        if len(self.axes_rotation) != 3:
            raise ValidationError("axes_rotation must be three Euler angles")


@dataclass(frozen=True)
class FieldSpec:
    """Static magnetic field: magnitude (Tesla) and unit direction.

    The direction is expressed in the site-1 anisotropy frame and must be
    normalized to within 1e-12; use :meth:`along` to normalize a vector.
    """

    magnitude: float
    direction: tuple[float, float, float]

    def __post_init__(self):
        if not (self.magnitude >= 0):
            raise ValidationError(f"field magnitude must be >= 0, got {self.magnitude}")
        d = np.asarray(self.direction, dtype=float)
        if d.shape != (3,):
            raise ValidationError("direction must be a 3-vector")
        if abs(np.linalg.norm(d) - 1.0) > 1e-12:
            raise ValidationError("direction must be a unit vector (|d| = 1 to 1e-12)")
        object.__setattr__(self, "direction", tuple(d))

    @classmethod
    def along(cls, vector, magnitude: float) -> "FieldSpec":
        """Build a FieldSpec from any nonzero vector, normalizing it."""
        v = np.asarray(vector, dtype=float)
        n = np.linalg.norm(v)
        if n == 0:
            raise ValidationError("cannot normalize a zero direction vector")
        return cls(magnitude=magnitude, direction=tuple(v / n))


@dataclass(frozen=True)
class EigenSystem:
    """Sorted eigenvalues (GHz) and eigenvectors of a Hermitian Hamiltonian.

    ``states[:, k]`` is the eigenvector of ``energies[k]``; energies are
    non-decreasing.
    """

    energies: np.ndarray
    states: np.ndarray
    dimension: int = field(init=False)

    def __post_init__(self):
        e = np.asarray(self.energies, dtype=float)
        v = np.asarray(self.states)
        if e.ndim != 1 or v.shape != (e.size, e.size):
            raise ValidationError("energies and states have inconsistent shapes")
        if np.any(np.diff(e) < 0):
            raise ValidationError("energies must be non-decreasing")
        object.__setattr__(self, "energies", e)
        object.__setattr__(self, "states", v)
        object.__setattr__(self, "dimension", e.size)


def _validate_spin(s: float) -> None:
    two_s = 2 * s
    if not np.isfinite(s) or s < 0 or abs(two_s - round(two_s)) > 1e-9:
        raise InvalidSpinError(f"spin must be a non-negative half-integer, got {s}")


def spin_operators(s: float) -> SpinOperatorSet:
    """Construct Sx, Sy, Sz for spin quantum number ``s``.

    Built from the ladder operators, <m'|S+-|m> = sqrt(s(s+1) - m(m+-1))
    delta(m', m+-1), in the descending-m basis.
    """
    _validate_spin(s)
    d = int(round(2 * s)) + 1
    m = s - np.arange(d)
    sz = np.diag(m.astype(complex))
    sp = np.zeros((d, d), dtype=complex)
    for i in range(1, d):
        # S+ |m[i]> = c |m[i-1]>  (m[i-1] = m[i] + 1)
        sp[i - 1, i] = np.sqrt(s * (s + 1) - m[i] * (m[i] + 1))
    sm = sp.conj().T
    sx = (sp + sm) / 2.0
    sy = (sp - sm) / 2.0j
    return SpinOperatorSet(s=float(s), sx=sx, sy=sy, sz=sz)


def spin_component(ops: SpinOperatorSet, direction) -> np.ndarray:
    """Return the spin component d . S along a unit 3-vector."""
    d = np.asarray(direction, dtype=float)
    return d[0] * ops.sx + d[1] * ops.sy + d[2] * ops.sz


def _rotated_axes(euler_zyz) -> np.ndarray:
    """Rotation matrix whose columns are the rotated frame axes."""
    return Rotation.from_euler("ZYZ", euler_zyz).as_matrix()


def _zfs_matrix(ops: SpinOperatorSet, d_ghz: float, e_ghz: float,
                axes: np.ndarray | None = None) -> np.ndarray:
    """-D Sz'^2 + E (Sx'^2 - Sy'^2) with primes along ``axes`` columns."""
    if axes is None:
        sx, sy, sz = ops.sx, ops.sy, ops.sz
    else:
        comps = [spin_component(ops, axes[:, k]) for k in range(3)]
        sx, sy, sz = comps
    return -d_ghz * (sz @ sz) + e_ghz * (sx @ sx - sy @ sy)


def single_ion_hamiltonian(p: SingleIonParams, f: FieldSpec) -> np.ndarray:
    """Single-ion Hamiltonian in GHz: -D Sz^2 + E (Sx^2 - Sy^2) - g muB B (h.S)."""
    ops = spin_operators(p.s)
    h = _zfs_matrix(ops, kelvin_to_ghz(p.d_zfs), kelvin_to_ghz(p.e_zfs))
    h -= p.g * MUB_GHZ_PER_T * f.magnitude * spin_component(ops, f.direction)
    return h


def dimer_hamiltonian(p: DimerParams, f: FieldSpec) -> np.ndarray:
    """Dimer Hamiltonian in GHz: H1 (x) I + I (x) H2 - J S1.S2.

    Site operators are embedded by tensor products (site 1 left factor).
    The site-2 zero-field term uses the rotated anisotropy axes; the Zeeman
    term acts along the common (site-1 frame) field direction at both sites.
    """
    ops1 = spin_operators(p.site1.s)
    ops2 = spin_operators(p.site2.s)
    axes2 = None
    if any(a != 0.0 for a in p.axes_rotation):
        axes2 = _rotated_axes(p.axes_rotation)

    h1 = _zfs_matrix(ops1, kelvin_to_ghz(p.site1.d_zfs), kelvin_to_ghz(p.site1.e_zfs))
    h1 -= p.site1.g * MUB_GHZ_PER_T * f.magnitude * spin_component(ops1, f.direction)
    h2 = _zfs_matrix(ops2, kelvin_to_ghz(p.site2.d_zfs), kelvin_to_ghz(p.site2.e_zfs), axes2)
    h2 -= p.site2.g * MUB_GHZ_PER_T * f.magnitude * spin_component(ops2, f.direction)

    i1 = np.eye(ops1.dimension)
    i2 = np.eye(ops2.dimension)
    h = np.kron(h1, i2) + np.kron(i1, h2)

    j_ghz = kelvin_to_ghz(p.j_exchange)
    for a, b in ((ops1.sx, ops2.sx), (ops1.sy, ops2.sy), (ops1.sz, ops2.sz)):
        h -= j_ghz * np.kron(a, b)
    return h


def build_hamiltonian(params, f: FieldSpec) -> np.ndarray:
    """Dispatch on parameter type (SingleIonParams or DimerParams)."""
    if isinstance(params, SingleIonParams):
        return single_ion_hamiltonian(params, f)
    if isinstance(params, DimerParams):
        return dimer_hamiltonian(params, f)
    raise TypeError(f"unsupported parameter type {type(params).__name__}")


def system_spins(params) -> tuple[float, ...]:
    """Spin quantum numbers of the tensor factors of a system."""
    if isinstance(params, SingleIonParams):
        return (params.s,)
    if isinstance(params, DimerParams):
        return (params.site1.s, params.site2.s)
    raise TypeError(f"unsupported parameter type {type(params).__name__}")


def system_gs(params) -> tuple[float, ...]:
    """g factors of the tensor factors of a system."""
    if isinstance(params, SingleIonParams):
        return (params.g,)
    if isinstance(params, DimerParams):
        return (params.site1.g, params.site2.g)
    raise TypeError(f"unsupported parameter type {type(params).__name__}")


def coupled_spin_component(spins, direction, weights=None) -> np.ndarray:
    """Sum_i w_i (d . S_i) embedded in the product space of ``spins``.

    ``weights`` defaults to 1 for every site; pass the g factors to build
    magnetic-moment-like operators.
    """
    spins = tuple(spins)
    if weights is None:
        weights = (1.0,) * len(spins)
    dims = [int(round(2 * s)) + 1 for s in spins]
    total = np.zeros((int(np.prod(dims)), int(np.prod(dims))), dtype=complex)
    for i, s in enumerate(spins):
        op = weights[i] * spin_component(spin_operators(s), direction)
        left = int(np.prod(dims[:i])) if i else 1
        right = int(np.prod(dims[i + 1:])) if i + 1 < len(dims) else 1
        total += np.kron(np.kron(np.eye(left), op), np.eye(right))
    return total


def field_decomposition(params, direction) -> tuple[np.ndarray, np.ndarray]:
    """Split H(B) = H0 + B * HB for a field swept along ``direction``.

    H0 is the zero-field Hamiltonian and HB the Zeeman operator per Tesla,
    both in GHz. Used by field-swept resonance searches to avoid rebuilding
    the full Hamiltonian at every field value.
    """
    zero = FieldSpec(magnitude=0.0, direction=_as_unit(direction))
    h0 = build_hamiltonian(params, zero)
    hb = -MUB_GHZ_PER_T * coupled_spin_component(
        system_spins(params), _as_unit(direction), weights=system_gs(params)
    )
    return h0, hb


def _as_unit(direction) -> tuple[float, float, float]:
    d = np.asarray(direction, dtype=float)
    n = np.linalg.norm(d)
    if n == 0:
        raise ValidationError("direction vector must be nonzero")
    return tuple(d / n)


def eigensolve(h: np.ndarray) -> EigenSystem:
    """Diagonalize a Hermitian matrix; energies ascending.

    The input must be Hermitian to within 1e-10 (absolute, relative to its
    largest element); anything else is rejected before the solve.
    """
    h = np.asarray(h)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValidationError("eigensolve expects a square matrix")
    scale = max(1.0, float(np.max(np.abs(h))) if h.size else 1.0)
    dev = float(np.max(np.abs(h - h.conj().T))) if h.size else 0.0
    if dev > 1e-10 * scale:
        raise ValidationError(
            f"matrix is not Hermitian (max |H - H^dag| = {dev:.3e} at scale {scale:.3e})"
        )
    energies, states = np.linalg.eigh(h)
    return EigenSystem(energies=energies, states=states)
