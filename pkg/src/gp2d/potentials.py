"""Compactly supported radial pair potentials and their 2D Fourier transform."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import j0

from .errors import ConfigError, QuadratureError
from .quadrature import (gl_nodes_weights, integrate_panels,
                         panel_bounds_hankel)

TABLE_HEADER = "# radial-potential v1"


@dataclass(frozen=True)
class RadialPotential:
    """Radial pair potential V(r) >= 0 vanishing beyond its range r0.

    ``kind`` is one of ``step``, ``gaussian-bump`` or ``user-tabulated``.
    For tabulated potentials ``table_r``/``table_v`` hold the sample points;
    evaluation interpolates linearly and is zero outside the table.
    """

    kind: str
    v0: float
    r0: float
    table_r: np.ndarray | None = field(default=None, repr=False)
    table_v: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in ("step", "gaussian-bump", "user-tabulated"):
            raise ConfigError(f"unknown potential kind {self.kind!r}")
        if self.v0 < 0:
            raise ConfigError("potential strength must be non-negative")
        if self.r0 <= 0:
            raise ConfigError("potential range must be positive")
        if self.kind == "user-tabulated":
            if self.table_r is None or self.table_v is None:
                raise ConfigError("tabulated potential requires a table")
            if np.any(np.diff(self.table_r) <= 0):
                raise ConfigError("table radii must be strictly increasing")
            if np.any(self.table_v < 0):
                raise ConfigError("potential must be pointwise non-negative")

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        if self.kind == "step":
            return np.where(r <= self.r0, self.v0, 0.0)
        if self.kind == "gaussian-bump":
            x2 = np.clip((r / self.r0) ** 2, 0.0, 1.0)
            with np.errstate(divide="ignore", over="ignore"):
                val = self.v0 * np.exp(1.0 - 1.0 / (1.0 - x2))
            return np.where(r < self.r0, val, 0.0)
        return np.interp(r, self.table_r, self.table_v, left=self.table_v[0],
                         right=0.0)

    @property
    def is_zero(self) -> bool:
        return self.v0 == 0.0 or (self.kind == "user-tabulated"
                                  and not np.any(self.table_v > 0))

    def norm_lp(self, p: int) -> float:
        """L^p norm of V over the plane, (2 pi int V^p r dr)^(1/p)."""
        if self.is_zero:
            return 0.0
        bounds = np.linspace(0.0, self.r0, 65)
        val = integrate_panels(lambda r: self(r) ** p * r, bounds)
        return float((2.0 * np.pi * val) ** (1.0 / p))


def step(v0: float, r0: float) -> RadialPotential:
    return RadialPotential("step", v0, r0)


def gaussian_bump(v0: float, r0: float) -> RadialPotential:
    return RadialPotential("gaussian-bump", v0, r0)


def free() -> RadialPotential:
    """The identically-zero potential (free gas)."""
    return RadialPotential("step", 0.0, 1.0)


def tabulated(r: np.ndarray, v: np.ndarray) -> RadialPotential:
    r = np.asarray(r, float)
    v = np.asarray(v, float)
    nz = np.nonzero(v > 0)[0]
    r0 = float(r[nz[-1] + 1]) if (len(nz) and nz[-1] + 1 < len(r)) \
        else float(r[-1])
    v0 = float(v.max(initial=0.0))
    return RadialPotential("user-tabulated", v0, r0, table_r=r, table_v=v)


def load_table(path) -> RadialPotential:
    """Read a two-column (r, V) text table with the v1 header line."""
    with open(path, "r", encoding="utf-8") as fh:
        first = fh.readline().strip()
        if first != TABLE_HEADER:
            raise ConfigError(f"{path}: missing header {TABLE_HEADER!r}")
        data = np.loadtxt(fh)
    if data.ndim != 2 or data.shape[1] != 2:
        raise ConfigError(f"{path}: expected two columns")
    return tabulated(data[:, 0], data[:, 1])


def save_table(pot: RadialPotential, path, n: int = 256) -> None:
    r = np.linspace(0.0, pot.r0, n)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(TABLE_HEADER + "\n")
        for ri, vi in zip(r, pot(r)):
            fh.write(f"{ri:.17g} {vi:.17g}\n")


def fourier_transform_radial(pot: RadialPotential, k):
    """2D Fourier transform of V at radial wavenumber(s) k >= 0.

    Radial (Hankel) form: 2 pi int_0^r0 V(r) J0(k r) r dr.  Accepts a
    scalar or an array of wavenumbers; panels are split at the Bessel
    zeros of the largest requested k.
    """
    k = np.abs(np.asarray(k, dtype=float))
    scalar = k.ndim == 0
    if pot.is_zero:
        return 0.0 if scalar else np.zeros(k.shape)
    bounds = panel_bounds_hankel(0.0, pot.r0, float(k.max()), per_efold=4)
    # low per_efold: V itself is not log-singular, panels resolve J0 only
    bounds = np.unique(np.concatenate((bounds, np.linspace(0, pot.r0, 17))))
    nodes, wts = gl_nodes_weights(bounds)
    weighted = wts * pot(nodes) * nodes
    val = 2.0 * np.pi * (j0(np.multiply.outer(k, nodes)) @ weighted)
    if not np.all(np.isfinite(val)):
        raise QuadratureError("non-finite potential transform")
    return float(val) if scalar else val
