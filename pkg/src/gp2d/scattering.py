"""2D radial zero-energy and Neumann scattering problems.

The radial reduction of -Delta u + V u / 2 = lambda u is

    -u'' - u'/r + V(r) u / 2 = lambda u.

Inside the range of the potential the equation is integrated numerically
with regular initial data at the origin; outside, the solution is an exact
combination of Bessel functions (log profile at zero energy), so solvers
match onto the analytic tail instead of integrating across many decades.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq
from scipy.special import j0, j1, y0, y1

from .errors import ConsistencyError, SolverError
from .potentials import RadialPotential
from .quadrature import geometric_bounds, gl_nodes_weights

EULER_GAMMA = 0.5772156649015328606

_ODE_RTOL = 1e-11
_ODE_ATOL = 1e-13


@dataclass(frozen=True)
class RadialGrid:
    """Strictly increasing radial nodes, first node at 0."""

    nodes: np.ndarray
    scheme: str = "uniform-in-core+log-tail"

    def __post_init__(self):
        n = np.asarray(self.nodes, float)
        if n[0] != 0.0 or np.any(np.diff(n) <= 0):
            raise ConsistencyError("grid must start at 0 and be increasing")

    @property
    def rmax(self) -> float:
        return float(self.nodes[-1])


def make_grid(r_core: float, r_max: float, n_core: int = 64,
              n_tail: int = 256) -> RadialGrid:
    """Uniform nodes inside r_core, log-spaced out to r_max."""
    core = np.linspace(0.0, r_core, n_core + 1)
    if r_max > r_core:
        tail = np.geomspace(r_core, r_max, n_tail + 1)[1:]
        nodes = np.concatenate((core, tail))
    else:
        nodes = core
    return RadialGrid(nodes)


@dataclass(frozen=True)
class ZeroEnergySolution:
    """Regular zero-energy solution and the extracted scattering length."""

    grid: RadialGrid
    phi: np.ndarray
    phi_prime: np.ndarray
    a: float                      # scattering length; 0 flags the free case
    log_slope: float              # c in phi(r) = c log(r/a) outside the range
    fit_residual: float
    pot: RadialPotential = field(repr=False)
    _dense: object = field(default=None, repr=False)

    @property
    def is_free(self) -> bool:
        return self.a == 0.0

    def phi_at(self, r):
        """Evaluate phi anywhere (analytic log continuation outside r0)."""
        r = np.asarray(r, float)
        if self.is_free:
            return np.broadcast_to(np.float64(self.phi[0]), r.shape).copy()
        r0 = self.pot.r0
        inner = self._dense.sol(np.minimum(r, r0))[0]
        val_r0 = float(self._dense.sol(r0)[0])
        with np.errstate(divide="ignore"):
            outer = val_r0 + self.log_slope * np.log(
                np.maximum(r, r0) / r0)
        return np.where(r <= r0, inner, outer)

    def phi_prime_at(self, r):
        r = np.asarray(r, float)
        if self.is_free:
            return np.zeros_like(r)
        r0 = self.pot.r0
        inner = self._dense.sol(np.minimum(r, r0))[1]
        with np.errstate(divide="ignore"):
            outer = self.log_slope / np.maximum(r, r0)
        return np.where(r <= r0, inner, outer)


@dataclass(frozen=True)
class NeumannSolution:
    """Ground state of the radial Neumann problem on a disk of radius R."""

    grid: RadialGrid
    f: np.ndarray
    w: np.ndarray
    f_prime: np.ndarray
    lam: float
    R: float
    a: float
    pot: RadialPotential = field(repr=False)
    _interior: object = field(default=None, repr=False)  # dense ODE output
    _c_bessel: tuple = field(default=(0.0, 0.0), repr=False)
    _scale: float = field(default=1.0, repr=False)

    @property
    def eps_R(self) -> float:
        return float(np.sqrt(max(self.lam, 0.0)) * self.R)

    @property
    def lam_R2(self) -> float:
        """Dimensionless eigenvalue group lambda * R^2."""
        return float(self.lam * self.R ** 2)

    def f_at(self, r):
        r = np.asarray(r, float)
        if self._interior is None:            # free case: f == 1
            return np.ones_like(r)
        r0 = self.pot.r0
        out = np.empty_like(r)
        inside = r <= r0
        if np.any(inside):
            out[inside] = self._scale * self._interior.sol(r[inside])[0]
        if np.any(~inside):
            k = np.sqrt(self.lam)
            c1, c2 = self._c_bessel
            rr = r[~inside]
            out[~inside] = self._scale * (c1 * j0(k * rr) + c2 * y0(k * rr))
        return out

    def f_prime_at(self, r):
        r = np.asarray(r, float)
        if self._interior is None:
            return np.zeros_like(r)
        r0 = self.pot.r0
        out = np.empty_like(r)
        inside = r <= r0
        if np.any(inside):
            out[inside] = self._scale * self._interior.sol(r[inside])[1]
        if np.any(~inside):
            k = np.sqrt(self.lam)
            c1, c2 = self._c_bessel
            rr = r[~inside]
            out[~inside] = -self._scale * k * (c1 * j1(k * rr)
                                               + c2 * y1(k * rr))
        return out

    def w_at(self, r):
        return 1.0 - self.f_at(r)


@dataclass(frozen=True)
class TrialOracle:
    """Bessel trial wavefunction with Neumann derivative root k(R)."""

    k: float
    R: float
    a: float
    bessel_ratio: float           # J0(k a) / Y0(k a)
    gamma: float = EULER_GAMMA

    def psi(self, r):
        r = np.asarray(r, float)
        return j0(self.k * r) - self.bessel_ratio * y0(self.k * r)

    def psi_prime(self, r):
        r = np.asarray(r, float)
        return -self.k * (j1(self.k * r) - self.bessel_ratio * y1(self.k * r))


@dataclass(frozen=True)
class AsymptoticsReport:
    """Scaled residuals of the Neumann large-R asymptotics."""

    e1: float   # eigenvalue vs 2/(R^2 L) (1 + 3/(4L)), scaled by R^2 L^3 / 2
    e2: float   # int V f vs 4 pi / L, scaled by L^2
    e3: float   # sup |w| log(a/R)/log(r/R) on [r0, R]
    e4: float   # sup |w'| (r+1) L
    L: float

    @property
    def all_finite(self) -> bool:
        return all(np.isfinite(v) for v in (self.e1, self.e2, self.e3,
                                            self.e4))


def _integrate_interior(pot: RadialPotential, lam: float, r_end: float):
    """Regular solution of the radial equation on (0, r_end], unnormalized."""
    v0 = float(pot(0.0))
    h = r_end * 1e-7
    c = (0.5 * v0 - lam) / 4.0
    y0_ = np.array([1.0 + c * h * h, 2.0 * c * h])

    def rhs(r, y):
        return [y[1], (0.5 * pot(r) - lam) * y[0] - y[1] / r]

    sol = solve_ivp(rhs, (h, r_end), y0_, method="RK45", dense_output=True,
                    rtol=_ODE_RTOL, atol=_ODE_ATOL)
    if not sol.success:
        raise SolverError(f"radial ODE failed: {sol.message}")
    return sol


def scattering_length(pot: RadialPotential, fit_lo: float = 1.0,
                      fit_hi: float = 2.0, n_fit: int = 64,
                      residual_tol: float = 1e-8) -> ZeroEnergySolution:
    """Scattering length from the regular zero-energy solution.

    Integrates outward from the origin and fits c log(r/a) on the window
    (fit_lo * r0, fit_hi * r0], where the log form is exact.
    """
    r0 = pot.r0
    grid = make_grid(r0 / 100.0, fit_hi * r0, n_core=48, n_tail=200)
    if pot.is_zero:
        ones = np.ones_like(grid.nodes)
        return ZeroEnergySolution(grid, ones, np.zeros_like(ones), 0.0, 0.0,
                                  0.0, pot)

    sol = _integrate_interior(pot, 0.0, fit_hi * r0)
    nodes = grid.nodes
    vals = np.empty_like(nodes)
    ders = np.empty_like(nodes)
    vals[0], ders[0] = 1.0, 0.0
    y = sol.sol(nodes[1:])
    vals[1:], ders[1:] = y[0], y[1]

    if np.any(vals <= 0.0):
        raise ConsistencyError("zero-energy solution crossed zero (V >= 0)")

    window = (nodes > fit_lo * r0) & (nodes <= fit_hi * r0)
    if window.sum() < 4:
        raise SolverError("fit window contains too few grid nodes")
    x = np.log(nodes[window])
    yv = vals[window]
    coef = np.polynomial.polynomial.polyfit(x, yv, 1)
    slope, intercept = float(coef[1]), float(coef[0])
    resid = float(np.max(np.abs(intercept + slope * x - yv)) /
                  np.max(np.abs(yv)))
    if slope <= 0.0:
        raise ConsistencyError("log slope must be positive for V >= 0")
    a = float(np.exp(-intercept / slope))
    if resid > residual_tol:
        raise SolverError(f"log fit residual {resid:.3e} above tolerance")
    return ZeroEnergySolution(grid, vals, ders, a, slope, resid, pot,
                              _dense=sol)


def _neumann_mismatch(pot: RadialPotential, R: float, lam: float):
    """Neumann derivative at R for given lambda, plus tail coefficients."""
    r0 = pot.r0
    sol = _integrate_interior(pot, lam, r0)
    fv, fd = sol.sol(r0)
    k = np.sqrt(lam)
    mat = np.array([[j0(k * r0), y0(k * r0)],
                    [-k * j1(k * r0), -k * y1(k * r0)]])
    c1, c2 = np.linalg.solve(mat, np.array([fv, fd]))
    gprime_R = -k * (c1 * j1(k * R) + c2 * y1(k * R))
    return gprime_R, (c1, c2), sol


def neumann_ground_state(pot: RadialPotential, R: float,
                         a: float | None = None,
                         n_grid: int = 400) -> NeumannSolution:
    """Lowest Neumann eigenpair on [0, R], normalized to f(R) = 1.

    Shooting on lambda: the interior is integrated numerically up to the
    potential range, matched onto the exact J0/Y0 tail, and the boundary
    derivative is driven to zero by bracketing + Brent.  The ground state
    is certified by the absence of interior sign changes.
    """
    r0 = pot.r0
    if R <= r0 and not pot.is_zero:
        raise SolverError(f"Neumann radius {R} must exceed the range {r0}")
    grid = make_grid(min(r0, R) / 2.0, R, n_core=64, n_tail=n_grid)
    if pot.is_zero:
        ones = np.ones_like(grid.nodes)
        return NeumannSolution(grid, ones, 1.0 - ones, np.zeros_like(ones),
                               0.0, R, 0.0, pot)

    if a is None:
        a = scattering_length(pot).a
    L = np.log(R / a)
    if L <= 0:
        raise SolverError("R must exceed the scattering length")
    lam_est = (2.0 / (R * R * L)) * (1.0 + 0.75 / L)

    scan = lam_est * np.concatenate((np.geomspace(1e-3, 0.5, 12),
                                     np.linspace(0.55, 10.0, 60)))
    prev_l, prev_g = None, None
    bracket = None
    for lam in scan:
        g, _, _ = _neumann_mismatch(pot, R, lam)
        if prev_g is not None and np.sign(g) != np.sign(prev_g):
            bracket = (prev_l, lam)
            break
        prev_l, prev_g = lam, g
    if bracket is None:
        raise SolverError("no sign change of the Neumann mismatch in the "
                          "scan window")
    lam = brentq(lambda t: _neumann_mismatch(pot, R, t)[0],
                 bracket[0], bracket[1], rtol=8.9e-16, xtol=1e-280)

    _, (c1, c2), interior = _neumann_mismatch(pot, R, lam)
    k = np.sqrt(lam)
    fR = c1 * j0(k * R) + c2 * y0(k * R)
    if fR == 0.0:
        raise SolverError("degenerate boundary value")
    scale = 1.0 / fR

    sol = NeumannSolution(grid, np.empty(0), np.empty(0), np.empty(0),
                          float(lam), R, float(a), pot,
                          _interior=interior, _c_bessel=(c1, c2),
                          _scale=float(scale))
    f_vals = sol.f_at(grid.nodes)
    fp_vals = sol.f_prime_at(grid.nodes)
    if np.any(np.diff(np.sign(f_vals[f_vals != 0.0])) != 0):
        raise SolverError("interior node detected: not the ground state")
    object.__setattr__(sol, "f", f_vals)
    object.__setattr__(sol, "w", 1.0 - f_vals)
    object.__setattr__(sol, "f_prime", fp_vals)
    return sol


def rayleigh_quotient(sol: NeumannSolution) -> float:
    """int (f'^2 + V f^2 / 2) r dr / int f^2 r dr for the computed state."""
    bounds = geometric_bounds(0.0, sol.R, per_efold=16)
    bounds = np.unique(np.concatenate((bounds,
                                       np.linspace(0, sol.pot.r0, 33))))
    nodes, wts = gl_nodes_weights(bounds)
    f = sol.f_at(nodes)
    fp = sol.f_prime_at(nodes)
    num = np.dot(wts, (fp ** 2 + 0.5 * sol.pot(nodes) * f ** 2) * nodes)
    den = np.dot(wts, f ** 2 * nodes)
    return float(num / den)


def potential_integral(sol: NeumannSolution) -> float:
    """2 pi int_0^r0 V(r) f_R(r) r dr."""
    if sol.pot.is_zero:
        return 0.0
    bounds = np.linspace(0.0, sol.pot.r0, 65)
    nodes, wts = gl_nodes_weights(bounds)
    return float(2.0 * np.pi
                 * np.dot(wts, sol.pot(nodes) * sol.f_at(nodes) * nodes))


def trial_wavenumber(R: float, a: float) -> TrialOracle:
    """Smallest k > 0 where the Bessel trial function has f'(R) = 0."""
    if not R > a > 0:
        raise SolverError("need R > a > 0")
    L = np.log(R / a)
    k_est = np.sqrt((2.0 / L) * (1.0 + 0.75 / L)) / R

    def h(k):
        return -j1(k * R) + (j0(k * a) / y0(k * a)) * y1(k * R)

    ks = k_est * np.geomspace(0.05, 5.0, 200)
    hk = np.array([h(k) for k in ks])
    sign_change = np.nonzero(np.diff(np.sign(hk)) != 0)[0]
    if len(sign_change) == 0:
        raise SolverError("no root bracket for the trial wavenumber")
    i = sign_change[0]
    k = brentq(h, ks[i], ks[i + 1], rtol=8.9e-16, xtol=1e-280)
    return TrialOracle(float(k), R, a, float(j0(k * a) / y0(k * a)))


def trial_upper_bound(oracle: TrialOracle, zero_sol: ZeroEnergySolution) -> float:
    """Rayleigh quotient of the Neumann trial state built from the oracle.

    Inside the potential range the trial function composes the outer Bessel
    profile with the change of variable m(r) = a exp(phi(r)/c), which maps
    onto |x| outside the range; outside it equals the Bessel profile itself.
    """
    pot = zero_sol.pot
    r0, R, a = pot.r0, oracle.R, oracle.a
    c = zero_sol.log_slope

    def m(r):
        return a * np.exp(zero_sol.phi_at(r) / c)

    def m_prime(r):
        return m(r) * zero_sol.phi_prime_at(r) / c

    bounds_in = np.linspace(0.0, r0, 129)
    nodes, wts = gl_nodes_weights(bounds_in)
    psi_in = oracle.psi(m(nodes))
    dpsi_in = oracle.psi_prime(m(nodes)) * m_prime(nodes)
    num = np.dot(wts, (dpsi_in ** 2 + 0.5 * pot(nodes) * psi_in ** 2) * nodes)
    den = np.dot(wts, psi_in ** 2 * nodes)

    bounds_out = geometric_bounds(r0, R, per_efold=24)
    nodes, wts = gl_nodes_weights(bounds_out)
    psi_out = oracle.psi(nodes)
    dpsi_out = oracle.psi_prime(nodes)
    num += np.dot(wts, dpsi_out ** 2 * nodes)
    den += np.dot(wts, psi_out ** 2 * nodes)
    return float(num / den)


def validate_neumann_asymptotics(sol: NeumannSolution) -> AsymptoticsReport:
    if sol.pot.is_zero or sol.a == 0.0:
        return AsymptoticsReport(0.0, 0.0, 0.0, 0.0, np.inf)
    R, a = sol.R, sol.a
    L = np.log(R / a)
    lam_ref = (2.0 / (R * R * L)) * (1.0 + 0.75 / L)
    e1 = abs(sol.lam - lam_ref) * R * R * L ** 3 / 2.0
    e2 = abs(potential_integral(sol) - 4.0 * np.pi / L) * L * L

    r0 = sol.pot.r0
    rs = np.geomspace(r0, R, 400)
    w = sol.w_at(rs)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.abs(w) * np.log(a / R) / np.log(rs / R)
    e3 = float(np.nanmax(ratio[np.isfinite(ratio)]))

    rs_all = np.concatenate((np.linspace(r0 * 1e-3, r0, 100), rs))
    wp = -sol.f_prime_at(rs_all)
    e4 = float(np.max(np.abs(wp) * (rs_all + 1.0) * L))
    return AsymptoticsReport(float(e1), float(e2), e3, e4, float(L))


def export_solution_csv(sol: NeumannSolution, path) -> None:
    """Write (r, f, w, f') columns for the solution grid."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("r,f,w,fprime\n")
        for r, f, w, fp in zip(sol.grid.nodes, sol.f, sol.w, sol.f_prime):
            fh.write(f"{r:.17g},{f:.17g},{w:.17g},{fp:.17g}\n")
