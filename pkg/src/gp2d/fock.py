"""Truncated excitation Fock space and its operator algebra at desk scale.

Everything is built as a dense complex matrix over occupation-number basis
states with total occupation at most the particle cap N.  The modified
ladder operators b, b* carry the sqrt((N - number)/N) factors that make
them endomorphisms of the truncated space; for the plain creation operator
a*, any matrix element that would push the total above N is dropped (the
one deliberate deviation from the untruncated algebra).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm
from scipy.sparse.linalg import expm_multiply

from .errors import ConfigError, ConsistencyError, SizeError
from .kernels import GPParameters, KernelTable, RenormPotential
from .lattice import TWO_PI
from .potentials import RadialPotential, fourier_transform_radial

HERMITIAN_TOL = 1e-12
DEFAULT_DIM_CAP = 200_000
DENSE_EXP_CAP = 4000


def shell_modes(count: int = 4) -> tuple[tuple[int, int], ...]:
    """Small negation-closed integer mode shells (4, 8 or 12 points)."""
    first = [(1, 0), (0, 1), (-1, 0), (0, -1)]
    second = [(1, 1), (1, -1), (-1, 1), (-1, -1)]
    third = [(2, 0), (0, 2), (-2, 0), (0, -2)]
    if count == 4:
        return tuple(first)
    if count == 8:
        return tuple(first + second)
    if count == 12:
        return tuple(first + second + third)
    raise ConfigError(f"unsupported shell size {count}")


def _compositions(total: int, parts: int):
    """Occupation tuples with the given total, lexicographic order."""
    if parts == 1:
        yield (total,)
        return
    for head in range(total + 1):
        for rest in _compositions(total - head, parts - 1):
            yield (head,) + rest


@dataclass(frozen=True)
class FockBasis:
    """Occupation basis over a negation-closed mode set, total <= cap."""

    modes: tuple
    cap: int
    states: np.ndarray = field(repr=False)
    index: dict = field(repr=False)
    neg_mode: np.ndarray = field(repr=False)
    mode_p2: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return len(self.states)

    @property
    def n_modes(self) -> int:
        return len(self.modes)

    def mode_index(self, mode) -> int:
        try:
            return self.modes.index(tuple(mode))
        except ValueError:
            raise ConfigError(f"mode {mode} not in basis") from None

    def totals(self) -> np.ndarray:
        return self.states.sum(axis=1)

    def vacuum(self) -> np.ndarray:
        v = np.zeros(self.dim, dtype=complex)
        v[self.index[tuple([0] * self.n_modes)]] = 1.0
        return v


def build_basis(modes, cap: int, dim_cap: int = DEFAULT_DIM_CAP) -> FockBasis:
    modes = tuple(tuple(int(c) for c in m) for m in modes)
    if cap < 1:
        raise ConfigError("particle cap must be at least 1")
    mode_set = set(modes)
    for m in modes:
        if m == (0, 0):
            raise ConfigError("the zero mode does not belong to the "
                              "excitation space")
        if (-m[0], -m[1]) not in mode_set:
            raise ConfigError(f"mode set not closed under negation: {m}")
    m = len(modes)
    dim = math.comb(cap + m, m)
    if dim > dim_cap:
        raise SizeError(f"basis dimension {dim} exceeds cap {dim_cap}")
    states = []
    for total in range(cap + 1):
        states.extend(_compositions(total, m))
    arr = np.array(states, dtype=np.int64)
    index = {tuple(s): i for i, s in enumerate(states)}
    neg = np.array([modes.index((-a, -b)) for a, b in modes])
    p2 = TWO_PI ** 2 * np.array([a * a + b * b for a, b in modes],
                                dtype=float)
    return FockBasis(modes, cap, arr, index, neg, p2)


@dataclass(frozen=True)
class LinearOperator:
    """Dense matrix over a FockBasis with its symbol tag."""

    mat: np.ndarray
    tag: str
    hermitian: bool = False

    def __post_init__(self):
        if self.hermitian:
            r = hermiticity_residual(self.mat)
            if r > HERMITIAN_TOL:
                raise ConsistencyError(
                    f"{self.tag}: hermiticity residual {r:.3e}")

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    def expectation(self, vec: np.ndarray) -> float:
        val = np.vdot(vec, self.mat @ vec)
        return float(val.real)


@dataclass
class FockVector:
    """Amplitude vector with a cached norm."""

    amplitudes: np.ndarray
    norm: float = 0.0

    def __post_init__(self):
        if not np.all(np.isfinite(self.amplitudes)):
            raise ConsistencyError("non-finite amplitudes")
        self.norm = float(np.linalg.norm(self.amplitudes))


def hermiticity_residual(mat: np.ndarray) -> float:
    return float(np.max(np.abs(mat - mat.conj().T)))


def _apply_monomial(basis: FockBasis, ops, state) -> tuple | None:
    """Apply an operator string (leftmost written first) to one state.

    Returns (coefficient, resulting occupation tuple) or None when the
    string annihilates the state.  Kinds: 'a', 'ad', 'b', 'bd'.
    """
    occ = list(state)
    total = sum(occ)
    cap = basis.cap
    coef = 1.0
    for kind, i in reversed(ops):
        if kind == "a":
            if occ[i] == 0:
                return None
            coef *= math.sqrt(occ[i])
            occ[i] -= 1
            total -= 1
        elif kind == "ad":
            if total + 1 > cap:
                return None
            coef *= math.sqrt(occ[i] + 1)
            occ[i] += 1
            total += 1
        elif kind == "b":
            if occ[i] == 0:
                return None
            coef *= math.sqrt(occ[i])
            occ[i] -= 1
            total -= 1
            coef *= math.sqrt((cap - total) / cap)
        elif kind == "bd":
            if total >= cap:
                return None
            coef *= math.sqrt((cap - total) / cap)
            coef *= math.sqrt(occ[i] + 1)
            occ[i] += 1
            total += 1
        else:
            raise ConfigError(f"unknown ladder kind {kind!r}")
    return coef, tuple(occ)


def build_operator(basis: FockBasis, terms, tag: str,
                   hermitian: bool = False) -> LinearOperator:
    """Assemble sum of coefficient * monomial-string into a dense matrix."""
    mat = np.zeros((basis.dim, basis.dim), dtype=complex)
    for col in range(basis.dim):
        state = tuple(basis.states[col])
        for coef, ops in terms:
            if coef == 0.0:
                continue
            hit = _apply_monomial(basis, ops, state)
            if hit is None:
                continue
            amp, out = hit
            mat[basis.index[out], col] += coef * amp
    return LinearOperator(mat, tag, hermitian)


def ladder(basis: FockBasis, mode, kind: str) -> LinearOperator:
    i = basis.mode_index(mode)
    return build_operator(basis, [(1.0, [(kind, i)])], f"{kind}_{mode}")


def number_operator(basis: FockBasis) -> LinearOperator:
    return LinearOperator(np.diag(basis.totals().astype(complex)), "N+",
                          hermitian=True)


def diagonal_in_total(basis: FockBasis, func, tag: str) -> LinearOperator:
    vals = np.array([func(int(n)) for n in basis.totals()], dtype=complex)
    return LinearOperator(np.diag(vals), tag, hermitian=True)


def kinetic_operator(basis: FockBasis) -> LinearOperator:
    diag = (basis.states * basis.mode_p2).sum(axis=1).astype(complex)
    return LinearOperator(np.diag(diag), "K", hermitian=True)


def _vhat(pot: RadialPotential, params: GPParameters, mode) -> float:
    damp = math.exp(-params.N)
    k = TWO_PI * math.hypot(mode[0], mode[1]) * damp
    return fourier_transform_radial(pot, k)


def potential_operator(basis: FockBasis, pot: RadialPotential,
                       params: GPParameters) -> LinearOperator:
    """Quartic interaction, restricted to mode-closed index quadruples.

    (1/2) sum over p, q, r with r != -p, -q of Vhat(r/e^N)
    a*_{p+r} a*_q a_{q+r} a_p, keeping terms whose four indices all lie in
    the mode set.
    """
    modes = basis.modes
    mode_set = {m: i for i, m in enumerate(modes)}
    damp = math.exp(-params.N)
    vcache = {}

    def vhat_int(r):
        if r not in vcache:
            k = TWO_PI * math.hypot(*r) * damp
            vcache[r] = fourier_transform_radial(pot, k)
        return vcache[r]

    terms = []
    for ip, p in enumerate(modes):
        for iq, q in enumerate(modes):
            for ipr, pr in enumerate(modes):       # pr = p + r
                r = (pr[0] - p[0], pr[1] - p[1])
                qr = (q[0] + r[0], q[1] + r[1])    # q + r
                if qr == (0, 0):
                    continue
                iqr = mode_set.get(qr)
                if iqr is None:
                    continue
                terms.append((0.5 * vhat_int(r),
                              [("ad", ipr), ("ad", iq), ("a", iqr),
                               ("a", ip)]))
    return build_operator(basis, terms, "V_N", hermitian=True)


def hamiltonian_pieces(basis: FockBasis, pot: RadialPotential,
                       params: GPParameters) -> dict:
    """The kinetic/potential pair and the four conjugated-Hamiltonian parts."""
    N = params.N
    K = kinetic_operator(basis)
    VN = potential_operator(basis, pot, params)
    v0 = fourier_transform_radial(pot, 0.0)

    L0 = diagonal_in_total(
        basis,
        lambda n: 0.5 * v0 * ((N - 1) * (N - n) + n * (N - n)),
        "L0")

    terms2 = []
    for i, m in enumerate(basis.modes):
        vm = _vhat(pot, params, m)
        ineg = basis.neg_mode[i]
        terms2.append((N * vm, [("bd", i), ("b", i)]))
        terms2.append((-vm, [("ad", i), ("a", i)]))
        terms2.append((0.5 * N * vm, [("bd", i), ("bd", ineg)]))
        terms2.append((0.5 * N * vm, [("b", i), ("b", ineg)]))
    L2 = LinearOperator(
        K.mat + build_operator(basis, terms2, "L2-int").mat, "L2",
        hermitian=True)

    L3 = _cubic_operator(basis, lambda m: _vhat(pot, params, m),
                         math.sqrt(N), "L3")
    return {"K": K, "V_N": VN, "L0": L0, "L2": L2, "L3": L3, "L4": VN}


def _cubic_operator(basis: FockBasis, weight, prefactor: float,
                    tag: str) -> LinearOperator:
    """prefactor * sum over p, q of weight(p) [b*_{p+q} a*_{-p} a_q + h.c.]

    with p, q and p+q all in the mode set and p + q != 0.
    """
    modes = basis.modes
    mode_set = {m: i for i, m in enumerate(modes)}
    terms = []
    for ip, p in enumerate(modes):
        wp = weight(p)
        ineg = int(basis.neg_mode[ip])
        for iq, q in enumerate(modes):
            s = (p[0] + q[0], p[1] + q[1])
            if s == (0, 0):
                continue
            isum = mode_set.get(s)
            if isum is None:
                continue
            terms.append((prefactor * wp,
                          [("bd", isum), ("ad", ineg), ("a", iq)]))
            terms.append((prefactor * wp,
                          [("ad", iq), ("a", ineg), ("b", isum)]))
    return build_operator(basis, terms, tag, hermitian=True)


def _eta_lookup(basis: FockBasis, table: KernelTable) -> np.ndarray:
    return np.array([table.eta_at(*m) for m in basis.modes])


def generators(basis: FockBasis, table: KernelTable,
               params: GPParameters) -> dict:
    """Quadratic generator B and cubic generator A from the eta kernel."""
    eta = _eta_lookup(basis, table)
    terms_b = []
    for i in range(basis.n_modes):
        ineg = int(basis.neg_mode[i])
        terms_b.append((0.5 * eta[i], [("bd", i), ("bd", ineg)]))
        terms_b.append((-0.5 * eta[i], [("b", i), ("b", ineg)]))
    B = build_operator(basis, terms_b, "B")

    modes = basis.modes
    mode_set = {m: i for i, m in enumerate(modes)}
    pref = 1.0 / math.sqrt(params.N)
    terms_a = []
    for ir, r in enumerate(modes):
        ineg = int(basis.neg_mode[ir])
        for iv, v in enumerate(modes):
            s = (r[0] + v[0], r[1] + v[1])
            if s == (0, 0):
                continue
            isum = mode_set.get(s)
            if isum is None:
                continue
            terms_a.append((pref * eta[ir],
                            [("bd", isum), ("ad", ineg), ("a", iv)]))
            terms_a.append((-pref * eta[ir],
                            [("ad", iv), ("a", ineg), ("b", isum)]))
    A = build_operator(basis, terms_a, "A")
    for gen in (B, A):
        r = float(np.max(np.abs(gen.mat + gen.mat.conj().T)))
        if r > HERMITIAN_TOL:
            raise ConsistencyError(f"{gen.tag} not antihermitian ({r:.3e})")
    return {"B": B, "A": A}


@dataclass(frozen=True)
class ConjugationHandle:
    """Matrix-free e^{-G} op e^{G} application for large bases."""

    op: LinearOperator
    gen: LinearOperator

    def apply(self, vec: np.ndarray) -> np.ndarray:
        step = expm_multiply(self.gen.mat, vec)
        step = self.op.mat @ step
        return expm_multiply(-self.gen.mat, step)


def conjugate(op: LinearOperator, gen: LinearOperator,
              dense_cap: int = DENSE_EXP_CAP):
    """e^{-gen} op e^{gen} with certified unitarity of e^{gen}."""
    if op.dim != gen.dim:
        raise ConfigError("dimension mismatch in conjugation")
    r = float(np.max(np.abs(gen.mat + gen.mat.conj().T)))
    if r > HERMITIAN_TOL:
        raise ConsistencyError(f"generator not antihermitian ({r:.3e})")
    if op.dim > dense_cap:
        return ConjugationHandle(op, gen)
    U = expm(gen.mat)
    unit = float(np.max(np.abs(U.conj().T @ U - np.eye(op.dim))))
    if unit > 1e-10:
        raise ConsistencyError(f"exponential not unitary ({unit:.3e})")
    mat = U.conj().T @ op.mat @ U
    return LinearOperator(mat, f"conj({op.tag};{gen.tag})",
                          hermitian=op.hermitian)


def remainder_d(basis: FockBasis, mode, table: KernelTable,
                params: GPParameters, B: LinearOperator) -> LinearOperator:
    """d_p = e^{-B} b_p e^{B} - cosh(eta_p) b_p - sinh(eta_p) b*_{-p}."""
    i = basis.mode_index(mode)
    eta_p = table.eta_at(*basis.modes[i])
    bp = ladder(basis, mode, "b")
    bd_neg = ladder(basis, basis.modes[int(basis.neg_mode[i])], "bd")
    conj = conjugate(bp, B)
    mat = conj.mat - math.cosh(eta_p) * bp.mat - math.sinh(eta_p) * bd_neg.mat
    return LinearOperator(mat, f"d_{mode}")


def effective_hamiltonians(basis: FockBasis, renorm: RenormPotential,
                           pot: RadialPotential, params: GPParameters,
                           table: KernelTable) -> dict:
    """Quadratically and cubically renormalized effective Hamiltonians."""
    N = params.N
    w0 = renorm.omega0

    def omega_mode(m):
        return float(renorm.omega_at(TWO_PI * math.hypot(m[0], m[1])))

    K = kinetic_operator(basis)
    VN = potential_operator(basis, pot, params)
    HN = LinearOperator(K.mat + VN.mat, "H_N", hermitian=True)
    v0 = fourier_transform_radial(pot, 0.0)

    def quad_off_diag(weight):
        terms = []
        for i in range(basis.n_modes):
            wv = weight(basis.modes[i])
            ineg = int(basis.neg_mode[i])
            terms.append((0.5 * wv, [("bd", i), ("bd", ineg)]))
            terms.append((0.5 * wv, [("b", i), ("b", ineg)]))
        return build_operator(basis, terms, "quad", hermitian=True)

    g_diag = diagonal_in_total(
        basis,
        lambda n: 0.5 * w0 * (N - 1) * (1 - n / N)
        + (2 * N * v0 - 0.5 * w0) * n * (1 - n / N),
        "G-diag")
    g_cubic = _cubic_operator(basis, lambda m: _vhat(pot, params, m),
                              math.sqrt(N), "G-cubic")
    G_eff = LinearOperator(
        g_diag.mat + quad_off_diag(omega_mode).mat + g_cubic.mat + HN.mat,
        "G_eff", hermitian=True)

    r_diag = diagonal_in_total(
        basis,
        lambda n: 0.5 * (N - 1) * w0 * (1 - n / N)
        + 0.5 * w0 * n * (1 - n / N) + w0 * n * (1 - n / N),
        "R-diag")
    r_cubic = _cubic_operator(basis, omega_mode, 1.0 / math.sqrt(N),
                              "R-cubic")
    R_eff = LinearOperator(
        r_diag.mat + quad_off_diag(omega_mode).mat + r_cubic.mat + HN.mat,
        "R_eff", hermitian=True)
    return {"G_eff": G_eff, "R_eff": R_eff, "H_N": HN, "K": K, "V_N": VN}


# ---------------------------------------------------------------------------
# full N-particle sector and the occupation bijection onto the truncated
# excitation space


@dataclass(frozen=True)
class SectorBasis:
    """Symmetric N-particle occupation basis over modes plus the zero mode."""

    modes: tuple          # excitation modes only; slot 0 is the zero mode
    N: int
    states: np.ndarray = field(repr=False)   # columns: (n0, n_modes...)
    index: dict = field(repr=False)

    @property
    def dim(self) -> int:
        return len(self.states)


def build_sector(modes, N: int, dim_cap: int = DENSE_EXP_CAP) -> SectorBasis:
    modes = tuple(tuple(m) for m in modes)
    states = []
    for total_exc in range(N + 1):
        for occ in _compositions(total_exc, len(modes)):
            states.append((N - total_exc,) + occ)
    if len(states) > dim_cap:
        raise SizeError(f"sector dimension {len(states)} exceeds cap")
    arr = np.array(states, dtype=np.int64)
    index = {tuple(s): i for i, s in enumerate(states)}
    return SectorBasis(modes, N, arr, index)


def sector_hop(sec: SectorBasis, i: int, j: int) -> np.ndarray:
    """Matrix of a*_i a_j on the fixed-N sector (slot 0 is the zero mode)."""
    mat = np.zeros((sec.dim, sec.dim), dtype=complex)
    for col in range(sec.dim):
        occ = list(sec.states[col])
        if occ[j] == 0:
            continue
        coef = math.sqrt(occ[j])
        occ[j] -= 1
        coef *= math.sqrt(occ[i] + 1)
        occ[i] += 1
        mat[sec.index[tuple(occ)], col] = coef
    return mat


def unitary_excitation_map(modes, N: int) -> dict:
    """Build the occupation bijection U_N explicitly and audit its rules.

    U_N sends the sector state |n0, vec n> to the excitation state |vec n>
    (n0 = N - total is redundant).  Returns the residuals of the four
    conjugation rules and of unitarity.
    """
    if N > 3 or len(modes) > 4:
        raise SizeError("the explicit map is audited at N <= 3 with at "
                        "most 4 modes")
    sec = build_sector(modes, N)
    basis = build_basis(modes, N)
    if sec.dim != basis.dim:
        raise ConsistencyError("sector and excitation bases disagree")
    U = np.zeros((basis.dim, sec.dim), dtype=complex)
    for col in range(sec.dim):
        occ = tuple(sec.states[col][1:])
        U[basis.index[occ], col] = 1.0

    nplus = number_operator(basis).mat
    eye = np.eye(basis.dim)
    sqrt_fac = np.diag(np.sqrt(np.maximum(N - basis.totals(), 0))
                       .astype(complex))

    report = {}
    report["unitary"] = float(np.max(np.abs(U @ U.conj().T - eye)))
    rule1 = U @ sector_hop(sec, 0, 0) @ U.conj().T
    report["rule_n0"] = float(np.max(np.abs(rule1 - (N * eye - nplus))))

    max2 = max3 = max4 = 0.0
    for ip, p in enumerate(basis.modes):
        ap = ladder(basis, p, "a").mat
        lhs2 = U @ sector_hop(sec, ip + 1, 0) @ U.conj().T
        rhs2 = ap.conj().T @ sqrt_fac
        max2 = max(max2, float(np.max(np.abs(lhs2 - rhs2))))
        lhs3 = U @ sector_hop(sec, 0, ip + 1) @ U.conj().T
        rhs3 = sqrt_fac @ ap
        max3 = max(max3, float(np.max(np.abs(lhs3 - rhs3))))
        for iq, q in enumerate(basis.modes):
            lhs4 = U @ sector_hop(sec, ip + 1, iq + 1) @ U.conj().T
            aq = ladder(basis, q, "a").mat
            rhs4 = ap.conj().T @ aq
            max4 = max(max4, float(np.max(np.abs(lhs4 - rhs4))))
    report["rule_create"] = max2
    report["rule_annihilate"] = max3
    report["rule_hop"] = max4
    report["pass"] = all(v <= 1e-12 for k, v in report.items()
                         if k != "pass")
    return report


def export_operator(op: LinearOperator, path, tol: float = 0.0) -> None:
    """Coordinate-triplet text dump (row col re im), one header line."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# dim={op.dim} tag={op.tag} "
                 f"hermitian={int(op.hermitian)}\n")
        rows, cols = np.nonzero(np.abs(op.mat) > tol)
        for r, c in zip(rows, cols):
            v = op.mat[r, c]
            fh.write(f"{r} {c} {v.real:.17g} {v.imag:.17g}\n")
