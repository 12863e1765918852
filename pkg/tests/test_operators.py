import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from noonsim.darkstate import chain_couplings, extract_chain_couplings
from noonsim.operators import (
    DECAY_FACTORS,
    OperatorError,
    apply,
    build_hamiltonian_set,
    hamiltonian_for,
)
from noonsim.oracles import first_quantized_hamiltonian
from noonsim.statespace import ALPHA, BETA, PHOTON_A, Basis, OccupationState, enumerate_sector, make_initial_state


@pytest.mark.parametrize("M", [2, 3])
@pytest.mark.parametrize("sector", [ALPHA, BETA])
def test_matches_distinct_atom_construction(M, sector):
    basis = enumerate_sector(M, sector)
    H = build_hamiltonian_set(basis, 1.0, 1.0)
    ref = first_quantized_hamiltonian(M, cutoff=M).project(basis)
    np.testing.assert_allclose(H.H_pump.matrix.toarray(), ref["H_pump"], atol=1e-12, rtol=0)
    np.testing.assert_allclose(H.H_cav.matrix.toarray(), ref["H_cav"], atol=1e-12, rtol=0)
    np.testing.assert_allclose(np.diag(H.D_decay), ref["D_decay"], atol=1e-12, rtol=0)


def test_projected_basis_is_orthonormal():
    basis = enumerate_sector(3, ALPHA)
    P = first_quantized_hamiltonian(3, 3).projector(basis)
    np.testing.assert_allclose((P.T @ P).toarray(), np.eye(len(basis)), atol=1e-12)


@pytest.mark.parametrize("M", range(1, 9))
def test_hermitian_parts(M):
    H = hamiltonian_for(enumerate_sector(M, ALPHA), 1.3, 0.7)
    assert H.H_pump.hermiticity_error() == 0.0
    assert H.H_cav.hermiticity_error() == 0.0


def test_decay_conventions():
    basis = enumerate_sector(3, ALPHA)
    amp = build_hamiltonian_set(basis, 1.0, 2.0, "amplitude")
    pop = build_hamiltonian_set(basis, 1.0, 2.0, "population")
    np.testing.assert_allclose(amp.decay_rates, 2.0 * basis.excited)
    np.testing.assert_allclose(pop.decay_rates, 1.0 * basis.excited)
    assert DECAY_FACTORS == {"amplitude": 1.0, "population": 0.5}
    with pytest.raises(OperatorError):
        build_hamiltonian_set(basis, 1.0, 1.0, "other")
    with pytest.raises(OperatorError):
        build_hamiltonian_set(basis, -1.0, 1.0)


def test_effective_generator_is_anti_hermitian_part_on_excited_levels():
    basis = enumerate_sector(3, ALPHA)
    H = build_hamiltonian_set(basis, 1.0, 1.0)
    Heff = H.effective(2.0).toarray()
    anti = (Heff - Heff.conj().T) / 2j
    np.testing.assert_allclose(np.diag(anti).real, -H.decay_rates)
    np.testing.assert_allclose(anti - np.diag(np.diag(anti)), 0, atol=1e-15)


def test_known_matrix_elements():
    basis = enumerate_sector(3, ALPHA)
    H = build_hamiltonian_set(basis, 1.0, 0.0)
    seed = OccupationState(2, 0, 1, 0, 0, 0, 0, 0)
    pumped = OccupationState(1, 1, 1, 0, 0, 0, 0, 0)
    i, j = basis.position(pumped), basis.position(seed)
    assert H.H_pump.matrix[i, j] == pytest.approx(math.sqrt(2))  # sqrt(n1 (n2+1))
    emitted = OccupationState(1, 0, 2, 0, 0, 0, 1, 0)
    k = basis.position(emitted)
    assert H.H_cav.matrix[i, k] == pytest.approx(math.sqrt(2 * 1))  # sqrt(na) sqrt(n3 (n2+1))


@pytest.mark.parametrize("M", range(2, 9))
def test_chain_couplings_read_off_the_matrix(M):
    H = hamiltonian_for(enumerate_sector(M, ALPHA), 1.0, 0.0)
    for n in range(1, M):
        om, gn = extract_chain_couplings(H, n, 1.0)
        assert gn == pytest.approx(math.sqrt(n * (n + 1)))
        assert om == pytest.approx(math.sqrt(M - n))
        printed_om, printed_g = chain_couplings(n, M, 1.0, 1.0)
        assert printed_g == pytest.approx(gn)
        # the printed pump factor sits one rung higher than the matrix element
        assert printed_om == pytest.approx(math.sqrt(M - n + 1))


@pytest.mark.parametrize("M", range(1, 9))
def test_sector_closure_exhaustive(M):
    # every coupling of an alpha state lands in the alpha basis and never in beta
    a, b = enumerate_sector(M, ALPHA), enumerate_sector(M, BETA)
    assert not set(a.states) & set(b.states)
    for basis in (a, b):
        build_hamiltonian_set(basis, 1.0, 1.0)  # raises on any leak


def test_assembly_rejects_truncated_basis():
    full = enumerate_sector(3, ALPHA)
    with pytest.raises(OperatorError):
        build_hamiltonian_set(Basis(full.states[:-3]), 1.0, 1.0)


def test_cache_shares_sets():
    b = enumerate_sector(4, ALPHA)
    assert hamiltonian_for(b, 1.0, 1.0) is hamiltonian_for(b, 1.0, 1.0)
    assert hamiltonian_for(b, 1.0, 1.0) is not hamiltonian_for(b, 1.0, 1.0, "population")


@settings(max_examples=40, deadline=None)
@given(M=st.integers(1, 5), om=st.floats(-50, 50), a=st.complex_numbers(max_magnitude=10),
       seed=st.integers(0, 2 ** 32 - 1))
def test_apply_is_linear(M, om, a, seed):
    H = hamiltonian_for(enumerate_sector(M, ALPHA), 1.0, 1.0)
    rng = np.random.default_rng(seed)
    n = H.dimension
    x = rng.normal(size=n) + 1j * rng.normal(size=n)
    y = rng.normal(size=n) + 1j * rng.normal(size=n)
    lhs = apply(H, om, a * x + y)
    rhs = a * apply(H, om, x) + apply(H, om, y)
    np.testing.assert_allclose(lhs, rhs, atol=1e-9 * (1 + abs(a)) * (1 + abs(om)))


def test_apply_matches_effective_matrix():
    H = hamiltonian_for(enumerate_sector(3, ALPHA), 1.0, 1.0)
    x = np.arange(H.dimension, dtype=complex)
    np.testing.assert_allclose(apply(H, 2.5, x), H.effective(2.5) @ x)
    np.testing.assert_allclose(apply(H, 2.5, x, decay_on=False), H.hermitian_part(2.5) @ x)


def test_apply_checks_shapes():
    H = hamiltonian_for(enumerate_sector(3, ALPHA), 1.0, 1.0)
    with pytest.raises(OperatorError):
        apply(H, 1.0, np.zeros(H.dimension + 1))
    with pytest.raises(OperatorError):
        apply(H, 1.0, make_initial_state(0.6, 0.8, 3))


def test_photonic_sector_is_closed():
    b = enumerate_sector(3, PHOTON_A)
    H = build_hamiltonian_set(b, 1.0, 1.0)
    assert H.H_pump.hermiticity_error() == 0.0


def test_dump_format():
    H = build_hamiltonian_set(enumerate_sector(2, ALPHA), 1.0, 1.0)
    buf = io.StringIO()
    H.H_cav.dump(buf)
    lines = buf.getvalue().strip().splitlines()
    assert len(lines) == H.H_cav.matrix.nnz
    r, c, re, im = lines[0].split()
    assert float(im) == 0.0
    assert H.H_cav.matrix[int(r), int(c)] == float(re)
