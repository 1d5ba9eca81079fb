"""Energy trajectories, ground states, and persisted parameter sweeps."""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh
from scipy.sparse.linalg import eigsh

from .config import RunConfig, fingerprint
from .errors import SolverError
from .fock import (FockBasis, FockVector, LinearOperator, build_basis,
                   effective_hamiltonians, number_operator, shell_modes)
from .kernels import (GPParameters, eta_coefficients, renormalized_potential)
from .lattice import build_lattice
from .potentials import RadialPotential
from .scattering import neumann_ground_state, scattering_length

SCHEMA = "gp2d-sweep-v1"
CSV_COLUMNS = ("N", "alpha", "cutoff", "dim", "E_vac", "E0", "depletion",
               "lambda_group", "omega0", "wall_ms")
DENSE_EIG_CAP = 4000


def vacuum_upper_bound(params: GPParameters, renorm) -> float:
    """Vacuum expectation of the renormalized Hamiltonian family."""
    return 0.5 * renorm.omega0 * (params.N - 1)


def ground_state(op: LinearOperator, basis: FockBasis,
                 seed: int = 0) -> tuple[float, FockVector, float]:
    """Smallest eigenpair and the occupation fraction of its eigenvector."""
    if op.dim <= DENSE_EIG_CAP:
        vals, vecs = eigh(op.mat)
        e0, vec = float(vals[0]), vecs[:, 0]
    else:
        rng = np.random.default_rng(seed)
        v0 = rng.standard_normal(op.dim)
        try:
            vals, vecs = eigsh(op.mat, k=1, which="SA", v0=v0)
        except Exception as exc:
            raise SolverError(f"iterative eigensolve failed: {exc}")
        e0, vec = float(vals[0]), vecs[:, 0]
    npl = number_operator(basis).mat
    depletion = float(np.real(np.vdot(vec, npl @ vec))) / basis.cap
    return e0, FockVector(vec.astype(complex)), depletion


@dataclass(frozen=True)
class EnergyRecord:
    N: int
    alpha: float
    cutoff: float
    dim: int
    E_vac: float
    E0: float
    depletion: float
    lambda_group: float
    omega0: float
    wall_ms: float

    def key(self):
        return (self.N, round(self.alpha, 12), round(self.cutoff, 9))

    def csv_row(self) -> str:
        return ",".join([
            str(self.N), f"{self.alpha:.17g}", f"{self.cutoff:.17g}",
            str(self.dim), f"{self.E_vac:.17g}", f"{self.E0:.17g}",
            f"{self.depletion:.17g}", f"{self.lambda_group:.17g}",
            f"{self.omega0:.17g}", f"{self.wall_ms:.3f}",
        ])


@dataclass
class SweepDataset:
    records: list
    fingerprint: str
    schema: str = SCHEMA
    skipped: int = 0

    def sorted_records(self):
        return sorted(self.records, key=lambda r: r.key())


def compute_record(pot: RadialPotential, N: int, alpha: float,
                   cfg: RunConfig, a: float,
                   with_fock: bool) -> EnergyRecord:
    """One grid point of the pipeline: scattering through (optionally)
    the assembled effective Hamiltonian's ground state."""
    t0 = time.perf_counter()
    params = GPParameters(N, alpha, cfg.ell_scale)
    if pot.is_zero:
        lam_group, omega0 = 0.0, 0.0
    else:
        sol = neumann_ground_state(pot, params.R, a=a)
        lam_group = sol.lam_R2
        lat = build_lattice(cfg.cutoff)
        renorm = renormalized_potential(params, lam_group, lat)
        omega0 = renorm.omega0
    E_vac = 0.5 * omega0 * (N - 1)
    E0, depletion, dim = math.nan, math.nan, 0
    if with_fock:
        basis = build_basis(shell_modes(cfg.shell), N)
        dim = basis.dim
        if pot.is_zero:
            from .fock import kinetic_operator
            R_eff = kinetic_operator(basis)
        else:
            table = eta_coefficients(sol, params, lat,
                                     per_efold=cfg.quad_per_efold)
            ops = effective_hamiltonians(basis, renorm, pot, params, table)
            R_eff = ops["R_eff"]
        E0, _, depletion = ground_state(R_eff, basis, cfg.seed)
    wall = (time.perf_counter() - t0) * 1000.0
    return EnergyRecord(N, alpha, cfg.cutoff, dim, E_vac, E0, depletion,
                        lam_group, omega0, wall)


def sweep_grid(cfg: RunConfig) -> list:
    """(N, alpha, with_fock) grid: small-N Fock builds plus the scalar
    trajectory."""
    grid = []
    for n in range(3, cfg.fock_n_max + 1):
        grid.append((n, cfg.fock_alpha, True))
    for n in range(cfg.n_min, cfg.n_max + 1, cfg.n_step):
        grid.append((n, cfg.alpha, False))
    return grid


def sweep(cfg: RunConfig, csv_path=None) -> SweepDataset:
    """Run the grid, skipping records already persisted for this config."""
    fp = fingerprint(cfg)
    done = {}
    if csv_path is not None:
        loaded = load_dataset(csv_path)
        if loaded is not None and loaded.fingerprint == fp:
            done = {r.key(): r for r in loaded.records}

    pot = cfg.make_potential()
    a = 0.0 if pot.is_zero else scattering_length(pot).a
    grid = sweep_grid(cfg)
    todo = [(n, al, wf) for (n, al, wf) in grid
            if (n, round(al, 12), round(cfg.cutoff, 9)) not in done]

    def task(point):
        n, al, wf = point
        return compute_record(pot, n, al, cfg, a, wf)

    if cfg.threads > 1 and len(todo) > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            fresh = list(pool.map(task, todo))
    else:
        fresh = [task(p) for p in todo]

    records = list(done.values()) + fresh
    ds = SweepDataset(records, fp, skipped=len(done))
    if csv_path is not None:
        write_dataset(ds, csv_path)
    return ds


def write_dataset(ds: SweepDataset, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# schema={ds.schema} fingerprint={ds.fingerprint}\n")
        fh.write(",".join(CSV_COLUMNS) + "\n")
        for rec in ds.sorted_records():
            fh.write(rec.csv_row() + "\n")


def load_dataset(path) -> SweepDataset | None:
    try:
        fh = open(path, "r", encoding="utf-8")
    except FileNotFoundError:
        return None
    with fh:
        header = fh.readline().strip()
        if not header.startswith("# schema="):
            return None
        parts = dict(p.split("=", 1) for p in header[2:].split())
        fh.readline()
        records = []
        for line in fh:
            cells = line.strip().split(",")
            if len(cells) != len(CSV_COLUMNS):
                continue
            records.append(EnergyRecord(
                int(cells[0]), float(cells[1]), float(cells[2]),
                int(cells[3]), float(cells[4]), float(cells[5]),
                float(cells[6]), float(cells[7]), float(cells[8]),
                float(cells[9])))
    return SweepDataset(records, parts.get("fingerprint", ""),
                        parts.get("schema", ""))


def vacuum_slope_fit(ds: SweepDataset) -> float:
    """Least-squares slope of (E_vac - 2 pi N) against log N over the
    scalar-trajectory records."""
    pts = [(r.N, r.E_vac) for r in ds.sorted_records()
           if not r.dim and np.isfinite(r.E_vac)]
    if len(pts) < 3:
        raise SolverError("not enough trajectory records for a slope fit")
    x = np.log([float(n) for n, _ in pts])
    y = np.array([ev - 2.0 * np.pi * n for n, ev in pts])
    coef = np.polynomial.polynomial.polyfit(x, y, 1)
    return float(coef[1])


def depletion_products(ds: SweepDataset) -> list:
    """depletion * N over the Fock-built records."""
    return [r.depletion * r.N for r in ds.sorted_records()
            if r.dim and np.isfinite(r.depletion)]
