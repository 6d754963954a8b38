"""Operational universality of a driven level system.

A resonant pulse implements a two-level rotation on a pair (n, m) when the
drive matrix element is large enough *and* the pulse frequency addresses
that pair alone. Concatenating such rotations reaches further pairs:
commutators of the pair generators produce the generator of any pair
connected through a shared level, so the closure of the allowed set is
exactly graph connectivity of the allowed-transition graph. The system is
operationally universal when a single component spans all levels.

Two fine points are encoded here:

* addressability: a transition whose frequency lies within the spectral
  selectivity window of another allowed transition cannot be driven
  individually (both rotations would be executed at once), so it is
  excluded from the edge set. This is what disqualifies an uncoupled dimer,
  whose two-site transitions come in frequency-degenerate copies, and a
  strongly Zeeman-dominated dimer whose ladder becomes nearly equidistant.
  The window defaults to 50 MHz, a few times the strongest experimentally
  usable Rabi rate, and is configurable.

* the connectivity reduction is guarded by an independent Lie-algebra rank
  computation: each edge contributes both drive quadratures as generators
  (the drive phase selects the quadrature), and the generated real algebra
  of a component with k levels has dimension k^2 - 1. ``lie_algebra_rank``
  computes the dimension by brute-force commutator closure and is meant as
  a verification oracle, not the production path.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .control_map import RabiMap
from .errors import DomainError, ValidationError

__all__ = [
    "EdgeSet",
    "ReachabilityResult",
    "allowed_edges",
    "graph_closure",
    "lie_algebra_rank",
    "write_reachability_csv",
]

DEFAULT_RESOLVABILITY_MHZ = 50.0
_RANK_DIMENSION_GUARD = 16


@dataclass(frozen=True)
class EdgeSet:
    """Unordered level pairs (1-based) that can be driven individually."""

    d: int
    edges: frozenset
    threshold: float

    def __post_init__(self):
        edges = frozenset(tuple(sorted(e)) for e in self.edges)
        for a, b in edges:
            if a == b:
                raise ValidationError(f"self-edge ({a}, {b}) not allowed")
            if not (1 <= a <= self.d and 1 <= b <= self.d):
                raise ValidationError(f"edge ({a}, {b}) outside [1, {self.d}]")
        object.__setattr__(self, "edges", edges)


@dataclass(frozen=True)
class ReachabilityResult:
    """Transitive reachability between levels and the universality verdict."""

    reachable: np.ndarray          # d x d bool, True on the diagonal
    components: tuple              # tuple of sorted tuples of 1-based levels
    universal: bool


def allowed_edges(rmap: RabiMap, threshold: float,
                  resolvability_mhz: float = DEFAULT_RESOLVABILITY_MHZ) -> EdgeSet:
    """Edges with rate above ``threshold`` (MHz/mT) that are addressable.

    A pair is dropped when another above-threshold pair sits within
    ``resolvability_mhz`` of its transition frequency; pass 0 to disable
    the addressability filter.
    """
    if threshold < 0:
        raise DomainError(f"threshold must be >= 0, got {threshold}")
    if resolvability_mhz < 0:
        raise DomainError(f"resolvability must be >= 0, got {resolvability_mhz}")
    iu = np.triu_indices(rmap.d, 1)
    rates = rmap.rate[iu]
    freqs = rmap.freq[iu]
    above = rates > threshold
    idx = np.nonzero(above)[0]
    edges = set()
    if idx.size:
        fsel = freqs[idx]
        order = np.argsort(fsel, kind="stable")
        fsorted = fsel[order]
        sep_ghz = resolvability_mhz * 1e-3
        gaps = np.diff(fsorted)
        blocked_sorted = np.zeros(idx.size, dtype=bool)
        blocked_sorted[:-1] |= gaps < sep_ghz
        blocked_sorted[1:] |= gaps < sep_ghz
        blocked = np.zeros(idx.size, dtype=bool)
        blocked[order] = blocked_sorted
        for keep_pos in np.nonzero(~blocked)[0]:
            k = idx[keep_pos]
            edges.add((int(iu[0][k]) + 1, int(iu[1][k]) + 1))
    return EdgeSet(d=rmap.d, edges=frozenset(edges), threshold=float(threshold))


class _UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, x):
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[ra] = rb


def graph_closure(edge_set: EdgeSet) -> ReachabilityResult:
    """Close the edge set under shared-endpoint concatenation.

    Edges (n, m) and (n, m') generate (m, m'); iterated to a fixpoint this
    is transitive connectivity, so two levels are mutually reachable exactly
    when they lie in the same connected component. Universal means a single
    component covers all levels.
    """
    d = edge_set.d
    uf = _UnionFind(d)
    for a, b in edge_set.edges:
        uf.union(a - 1, b - 1)
    roots = np.array([uf.find(i) for i in range(d)])
    reachable = roots[:, None] == roots[None, :]
    comps = {}
    for level, root in enumerate(roots, start=1):
        comps.setdefault(root, []).append(level)
    components = tuple(tuple(sorted(c)) for c in sorted(comps.values()))
    return ReachabilityResult(
        reachable=reachable,
        components=components,
        universal=len(components) == 1,
    )


def _edge_generators(d: int, a: int, b: int) -> list[np.ndarray]:
    """Both drive quadratures of one pair as anti-Hermitian generators."""
    x = np.zeros((d, d), dtype=complex)
    x[a, b] = 1.0
    x[b, a] = 1.0
    y = np.zeros((d, d), dtype=complex)
    y[a, b] = 1.0
    y[b, a] = -1.0
    return [1j * x, y]


def lie_algebra_rank(edge_set: EdgeSet, allow_large: bool = False,
                     tol: float = 1e-9) -> int:
    """Dimension of the real Lie algebra generated by the edge drives.

    Starts from both quadrature generators i(|n><m| + |m><n|) and
    (|n><m| - |m><n|) per edge and repeatedly adds commutators,
    orthonormalizing in the real vector space of anti-Hermitian traceless
    matrices until the dimension stabilizes. Cost grows as d^6; dimensions
    above 16 require ``allow_large=True``.
    """
    d = edge_set.d
    if d > _RANK_DIMENSION_GUARD and not allow_large:
        raise DomainError(
            f"lie_algebra_rank is O(d^6); d={d} > {_RANK_DIMENSION_GUARD} "
            "requires allow_large=True"
        )

    def to_vec(m):
        return np.concatenate([m.real.ravel(), m.imag.ravel()])

    basis_mats: list[np.ndarray] = []
    basis_vecs: list[np.ndarray] = []

    def try_add(m) -> bool:
        v = to_vec(m)
        for bv in basis_vecs:
            v = v - np.dot(bv, v) * bv
        norm = np.linalg.norm(v)
        if norm <= tol * max(1.0, np.linalg.norm(to_vec(m))):
            return False
        v /= norm
        basis_vecs.append(v)
        half = d * d
        mat = (v[:half] + 1j * v[half:]).reshape(d, d)
        basis_mats.append(mat)
        return True

    for a, b in sorted(edge_set.edges):
        for gen in _edge_generators(d, a - 1, b - 1):
            try_add(gen)

    frontier = list(range(len(basis_mats)))
    while frontier:
        new_frontier = []
        snapshot = len(basis_mats)
        for i in frontier:
            for j in range(snapshot):
                if i == j:
                    continue
                comm = basis_mats[i] @ basis_mats[j] - basis_mats[j] @ basis_mats[i]
                if try_add(comm):
                    new_frontier.append(len(basis_mats) - 1)
        # also bracket new elements against each other
        frontier = new_frontier
    return len(basis_mats)


def write_reachability_csv(result: ReachabilityResult, path, comments=()) -> None:
    """Write the boolean reachability matrix as CSV (rows of 0/1)."""
    with open(path, "w", newline="") as fh:
        for line in comments:
            fh.write(f"# {line}\n")
        fh.write(f"# universal={'true' if result.universal else 'false'} "
                 f"components={len(result.components)}\n")
        for row in result.reachable:
            fh.write(",".join("1" if x else "0" for x in row) + "\n")
