import math
from math import comb

import numpy as np
import pytest

from gp2d.errors import SizeError
from gp2d.fock import (ConjugationHandle, LinearOperator, build_basis,
                       build_operator, conjugate, diagonal_in_total,
                       effective_hamiltonians, export_operator, generators,
                       hamiltonian_pieces, hermiticity_residual,
                       kinetic_operator, ladder, number_operator,
                       remainder_d, shell_modes, unitary_excitation_map)
from gp2d.kernels import (GPParameters, eta_coefficients,
                          renormalized_potential)
from gp2d.lattice import TWO_PI, build_lattice
from gp2d.potentials import fourier_transform_radial, step
from gp2d.scattering import neumann_ground_state

N = 3


@pytest.fixture(scope="module")
def fock_setup(step_pot, step_a):
    params = GPParameters(N, 2.5)
    sol = neumann_ground_state(step_pot, params.R, a=step_a)
    lat = build_lattice(TWO_PI * 8)
    table = eta_coefficients(sol, params, lat)
    renorm = renormalized_potential(params, sol.lam_R2, lat)
    basis = build_basis(shell_modes(4), N)
    return params, sol, table, renorm, basis


def test_shell_modes_sizes():
    assert len(shell_modes(4)) == 4
    assert len(shell_modes(8)) == 8
    assert len(shell_modes(12)) == 12
    # shells close under negation
    for count in (4, 8, 12):
        modes = set(shell_modes(count))
        assert {(-a, -b) for a, b in modes} == modes
        assert (0, 0) not in modes


def test_basis_dimension_is_stars_and_bars():
    for m, cap in [(4, 2), (4, 3), (8, 2)]:
        basis = build_basis(shell_modes(m), cap)
        assert basis.dim == comb(cap + m, m)


def test_basis_dimension_cap():
    with pytest.raises(SizeError):
        build_basis(shell_modes(12), 8, dim_cap=1000)


def test_occupations_bounded_by_cap(fock_setup):
    *_, basis = fock_setup
    totals = basis.totals()
    assert totals.max() == N
    assert totals.min() == 0
    assert np.all(basis.states.sum(axis=1) == totals)


def test_creation_is_adjoint_of_annihilation(fock_setup):
    *_, basis = fock_setup
    for mode in basis.modes:
        a = ladder(basis, mode, "a").mat
        ad = ladder(basis, mode, "ad").mat
        np.testing.assert_array_equal(ad, a.conj().T)
        b = ladder(basis, mode, "b").mat
        bd = ladder(basis, mode, "bd").mat
        np.testing.assert_array_equal(bd, b.conj().T)


def test_canonical_commutators(fock_setup):
    *_, basis = fock_setup
    eye = np.eye(basis.dim)
    ntot = number_operator(basis).mat
    worst = 0.0
    for p in basis.modes:
        ap = ladder(basis, p, "a").mat
        bp = ladder(basis, p, "b").mat
        for q in basis.modes:
            aq = ladder(basis, q, "a").mat
            bq = ladder(basis, q, "b").mat
            delta = 1.0 if p == q else 0.0
            # modified operators: [b_p, b_q^*] = delta (1 - Ntot/N) - a_q^* a_p / N
            lhs = bp @ bq.conj().T - bq.conj().T @ bp
            rhs = delta * (eye - ntot / N) - aq.conj().T @ ap / N
            worst = max(worst, np.abs(lhs - rhs).max(),
                        np.abs(bp @ bq - bq @ bp).max())
    assert worst <= 1e-12


def test_number_operator_counts(fock_setup):
    *_, basis = fock_setup
    ntot = number_operator(basis).mat
    np.testing.assert_array_equal(np.diag(ntot).real, basis.totals())
    assert np.count_nonzero(ntot - np.diag(np.diag(ntot))) == 0


def test_truncation_annihilates_top_sector(fock_setup):
    *_, basis = fock_setup
    top = basis.totals() == N
    for mode in basis.modes:
        ad = ladder(basis, mode, "ad").mat
        bd = ladder(basis, mode, "bd").mat
        assert np.abs(ad[:, top]).max() == 0.0
        assert np.abs(bd[:, top]).max() == 0.0


def test_kinetic_eigenvalues(fock_setup):
    *_, basis = fock_setup
    k = kinetic_operator(basis)
    want = basis.states @ basis.mode_p2
    np.testing.assert_allclose(np.diag(k.mat).real, want, rtol=1e-13)


def test_hamiltonian_pieces_hermitian(fock_setup, step_pot):
    params, *_, basis = fock_setup
    pieces = hamiltonian_pieces(basis, step_pot, params)
    assert set(pieces) == {"K", "V_N", "L0", "L2", "L3", "L4"}
    for op in pieces.values():
        assert hermiticity_residual(op.mat) <= 1e-12


def test_constant_piece_vacuum_value(fock_setup, step_pot):
    params, *_, basis = fock_setup
    pieces = hamiltonian_pieces(basis, step_pot, params)
    vhat0 = fourier_transform_radial(step_pot, 0.0)
    vac = basis.vacuum()
    assert pieces["L0"].expectation(vac) == pytest.approx(
        0.5 * vhat0 * N * (N - 1), rel=1e-12)
    assert pieces["K"].expectation(vac) == 0.0
    assert pieces["V_N"].expectation(vac) == 0.0


def test_quartic_piece_positive(fock_setup, step_pot):
    params, *_, basis = fock_setup
    pieces = hamiltonian_pieces(basis, step_pot, params)
    evals = np.linalg.eigvalsh(pieces["V_N"].mat)
    assert evals.min() >= -1e-12


def test_generators_antihermitian(fock_setup):
    params, _, table, _, basis = fock_setup
    gens = generators(basis, table, params)
    for op in gens.values():
        assert np.abs(op.mat + op.mat.conj().T).max() <= 1e-14


def test_conjugation_preserves_spectrum(fock_setup, step_pot):
    params, _, table, _, basis = fock_setup
    gens = generators(basis, table, params)
    pieces = hamiltonian_pieces(basis, step_pot, params)
    ham = LinearOperator(pieces["L0"].mat + pieces["L2"].mat
                         + pieces["L3"].mat + pieces["V_N"].mat,
                         "H", hermitian=True)
    rotated = conjugate(ham, gens["B"])
    ev1 = np.linalg.eigvalsh(ham.mat)
    ev2 = np.linalg.eigvalsh(rotated.mat)
    np.testing.assert_allclose(ev1, ev2, rtol=0, atol=1e-10)


def test_conjugation_handle_beyond_dense_cap(fock_setup):
    params, _, table, _, basis = fock_setup
    gens = generators(basis, table, params)
    ntot = number_operator(basis)
    handle = conjugate(ntot, gens["B"], dense_cap=1)
    assert isinstance(handle, ConjugationHandle)
    vec = basis.vacuum()
    dense = conjugate(ntot, gens["B"]).mat @ vec
    np.testing.assert_allclose(handle.apply(vec), dense, atol=1e-12)


def test_remainder_is_small(fock_setup):
    params, _, table, _, basis = fock_setup
    gens = generators(basis, table, params)
    mode = basis.modes[0]
    d = remainder_d(basis, mode, table, params, gens["B"])
    # the non-Bogoliubov remainder carries at least one factor eta/N
    scale = np.abs(table.eta).max()
    assert np.linalg.norm(d.mat, 2) <= 10 * scale


def test_effective_hamiltonians(fock_setup, step_pot):
    params, _, table, renorm, basis = fock_setup
    ops = effective_hamiltonians(basis, renorm, step_pot, params, table)
    vac = basis.vacuum()
    for key in ("G_eff", "R_eff", "H_N"):
        assert hermiticity_residual(ops[key].mat) <= 1e-12
    want = 0.5 * renorm.omega0 * (N - 1)
    assert ops["G_eff"].expectation(vac) == pytest.approx(want, rel=1e-12)
    assert ops["R_eff"].expectation(vac) == pytest.approx(want, rel=1e-12)


def test_unitary_excitation_map_rules():
    rep = unitary_excitation_map(shell_modes(4), N)
    assert rep["pass"]
    for key in ("unitary", "rule_n0", "rule_create", "rule_annihilate",
                "rule_hop"):
        assert rep[key] <= 1e-12


def test_diagonal_in_total(fock_setup):
    *_, basis = fock_setup
    op = diagonal_in_total(basis, lambda n: n * (n - 1), "pairs")
    totals = basis.totals()
    np.testing.assert_allclose(np.diag(op.mat).real,
                               totals * (totals - 1), rtol=1e-14)


def test_export_operator(fock_setup, tmp_path):
    *_, basis = fock_setup
    op = number_operator(basis)
    path = tmp_path / "op.csv"
    export_operator(op, path)
    lines = path.read_text().splitlines()
    assert lines[0].startswith("#") and f"dim={basis.dim}" in lines[0]
    entries = lines[1:]
    # one (row col re im) entry per nonzero matrix element
    assert len(entries) == np.count_nonzero(op.mat)
    r, c, re, im = entries[0].split()
    assert op.mat[int(r), int(c)] == complex(float(re), float(im))
