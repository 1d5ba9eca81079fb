"""Momentum lattice 2 pi Z^2 minus the zero mode, with a radial cutoff."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class MomentumLattice:
    """Nonzero modes p = 2 pi (n1, n2) with |p| <= cutoff.

    Modes are ordered by (|p|^2, n1, n2) so that every consumer sees the
    same deterministic enumeration.
    """

    cutoff: float
    ints: np.ndarray       # shape (M, 2) integer coordinates
    points: np.ndarray     # shape (M, 2) momenta
    norms2: np.ndarray     # |p|^2

    @property
    def size(self) -> int:
        return len(self.ints)

    def index_of(self, n1: int, n2: int) -> int:
        hits = np.nonzero((self.ints[:, 0] == n1) & (self.ints[:, 1] == n2))[0]
        if len(hits) != 1:
            raise ConfigError(f"mode ({n1},{n2}) not on the lattice")
        return int(hits[0])

    def negation_index(self) -> np.ndarray:
        """Permutation mapping each mode index to the index of -p."""
        order = {(int(a), int(b)): i for i, (a, b) in enumerate(self.ints)}
        return np.array([order[(-int(a), -int(b))] for a, b in self.ints])

    def unique_norms(self):
        """Sorted unique |p| values and the inverse map onto modes."""
        norms = np.sqrt(self.norms2)
        uniq, inv = np.unique(np.round(norms, 12), return_inverse=True)
        return uniq, inv


def build_lattice(cutoff: float) -> MomentumLattice:
    if cutoff < TWO_PI:
        raise ConfigError(f"cutoff {cutoff} leaves the lattice empty "
                          f"(need at least 2*pi)")
    nmax = int(np.floor(cutoff / TWO_PI))
    rng = np.arange(-nmax, nmax + 1)
    n1, n2 = np.meshgrid(rng, rng, indexing="ij")
    ints = np.column_stack((n1.ravel(), n2.ravel()))
    norms2 = TWO_PI ** 2 * (ints[:, 0] ** 2 + ints[:, 1] ** 2).astype(float)
    keep = (norms2 > 0) & (norms2 <= cutoff ** 2 * (1 + 1e-12))
    ints = ints[keep]
    norms2 = norms2[keep]
    order = np.lexsort((ints[:, 1], ints[:, 0], norms2))
    ints = ints[order]
    norms2 = norms2[order]
    return MomentumLattice(float(cutoff), ints, TWO_PI * ints.astype(float),
                           norms2)


def octant_norm_counts(nmax: int):
    """Unique values of n1^2 + n2^2 <= nmax^2 (n != 0) with multiplicities.

    Enumerates one octant and expands by symmetry; used for fast radial
    sums over the full lattice.
    """
    vals = []
    counts = []
    for i in range(0, nmax + 1):
        for j in range(i, nmax + 1):
            if i == 0 and j == 0:
                continue
            s = i * i + j * j
            if s > nmax * nmax:
                break
            if i == 0:
                mult = 4
            elif i == j:
                mult = 4
            else:
                mult = 8
            vals.append(s)
            counts.append(mult)
    vals = np.array(vals)
    counts = np.array(counts)
    uniq, inv = np.unique(vals, return_inverse=True)
    agg = np.zeros(len(uniq), dtype=np.int64)
    np.add.at(agg, inv, counts)
    return uniq, agg
