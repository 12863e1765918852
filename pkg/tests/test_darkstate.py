import math
from types import SimpleNamespace

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from noonsim.darkstate import (
    LadderProjector,
    NoDarkStateError,
    analytic_dark_state,
    dark_coefficients,
    dark_overlap,
    ladder,
    ladder_populations,
    null_residual,
    numerical_null_state,
    resolve_law,
    select_coefficient_law,
)
from noonsim.operators import hamiltonian_for
from noonsim.statespace import ALPHA, PHOTON_A, enumerate_sector, make_initial_state


def test_law_selection_picks_the_annihilated_state():
    assert select_coefficient_law() == "collective"
    assert resolve_law("auto") == "collective"
    with pytest.raises(ValueError):
        resolve_law("nope")


@pytest.mark.parametrize("M", range(3, 7))
def test_face_value_normalization_is_not_dark(M):
    H = hamiltonian_for(enumerate_sector(M, ALPHA), 1.0, 0.0)
    D = analytic_dark_state(2.0, 1.0, M, law="normalized_ladder").components[0].amplitudes
    assert null_residual(H, 2.0, D) > 1e-3


@pytest.mark.parametrize("M", [1, 2])
def test_laws_agree_for_few_atoms(M):
    # the rung norms sqrt(M!/(M-n-1)!) are all equal for M <= 2
    a = dark_coefficients(M, 3.0, "collective").coefficients
    b = dark_coefficients(M, 3.0, "normalized_ladder").coefficients
    np.testing.assert_allclose(a, b)


def test_chain_recursion_of_collective_law():
    M, r = 6, 1.7
    c = dark_coefficients(M, r, "collective").coefficients
    for n in range(M - 1):
        assert c[n + 1] / c[n] == pytest.approx(-r * math.sqrt(M - n - 1) / math.sqrt((n + 1) * (n + 2)))


def test_coefficient_normalization_and_signs():
    spec = dark_coefficients(5, 2.0)
    assert np.sum(spec.populations) == pytest.approx(1.0)
    assert np.all(np.sign(spec.coefficients) == (-1.0) ** np.arange(5))
    neg = dark_coefficients(5, -2.0).coefficients
    np.testing.assert_allclose(neg, np.abs(spec.coefficients))


def test_coefficients_stay_finite_at_extreme_ratios():
    spec = dark_coefficients(8, 1e12)
    assert np.all(np.isfinite(spec.coefficients))
    assert abs(spec.coefficients[-1]) == pytest.approx(1.0)


@pytest.mark.parametrize("M", range(1, 9))
def test_zero_field_dark_state_is_the_seed(M):
    psi = analytic_dark_state(0.0, 1.0, M, 0.6, 0.8)
    assert abs(psi.vdot(make_initial_state(0.6, 0.8, M))) ** 2 == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("M", [2, 4, 6, 8])
@pytest.mark.parametrize("ratio", [0.1, 1.0, 10.0, 100.0])
def test_null_state_oracle(M, ratio):
    H = hamiltonian_for(enumerate_sector(M, ALPHA), 1.0, 0.0)
    ns = numerical_null_state(H, ratio)
    D = analytic_dark_state(ratio, 1.0, M).components[0].amplitudes
    assert abs(np.vdot(ns.amplitudes, D)) ** 2 > 1 - 1e-8
    assert null_residual(H, ratio, D) < 1e-8
    assert ns.excited_population < 1e-10


@pytest.mark.parametrize("M", [1, 2, 3, 5])
def test_photonic_ladder_dark_state(M):
    H = hamiltonian_for(enumerate_sector(M, PHOTON_A), 1.0, 0.0)
    for r in (0.5, 3.0):
        D = analytic_dark_state(r, 1.0, M, mode="photonic").components[0].amplitudes
        assert null_residual(H, r, D) < 1e-12
    assert len(ladder(M, "photonic")) == M + 1


def test_no_dark_state_is_reported():
    b = enumerate_sector(2, ALPHA)
    gapped = SimpleNamespace(basis=b, hermitian_part=lambda om: sp.identity(len(b), format="csr"))
    with pytest.raises(NoDarkStateError):
        numerical_null_state(gapped, 1.0)
    # a null space living only on excited levels is rejected as well
    exc = np.flatnonzero(b.excited > 0)
    proj = np.ones(len(b))
    proj[exc[0]] = 0.0
    bright = SimpleNamespace(basis=b, hermitian_part=lambda om: sp.diags(proj, format="csr"))
    with pytest.raises(NoDarkStateError):
        numerical_null_state(bright, 1.0)


@pytest.mark.parametrize("M", range(2, 9))
def test_large_field_limit_is_the_top_rung(M):
    psi = analytic_dark_state(1e3 * M, 1.0, M).components[0].amplitudes
    top = ladder(M)[-1].alpha_leg
    b = enumerate_sector(M, ALPHA)
    assert abs(psi[b.position(top)]) ** 2 > 0.99


def test_ladder_geometry():
    rungs = ladder(4)
    assert [r.alpha_leg.n3 for r in rungs] == [1, 2, 3, 4]
    assert [r.alpha_leg.na for r in rungs] == [0, 1, 2, 3]
    assert [r.beta_leg.n5 for r in rungs] == [1, 2, 3, 4]
    assert [r.beta_leg.nb for r in rungs] == [0, 1, 2, 3]


def test_projector_and_overlap():
    M = 4
    psi = analytic_dark_state(2.0, 1.0, M, 0.6, 0.8)
    proj = LadderProjector(psi)
    amps = proj.amplitudes(psi)
    np.testing.assert_allclose(amps, dark_coefficients(M, 2.0).coefficients, atol=1e-14)
    assert dark_overlap(psi, 2.0, 1.0) == pytest.approx(1.0)
    assert dark_overlap(psi, 0.0, 1.0) == pytest.approx(dark_coefficients(M, 2.0).populations[0])
    assert np.sum(ladder_populations(psi)) == pytest.approx(1.0)


@settings(max_examples=30, deadline=None)
@given(M=st.integers(2, 6), logr=st.floats(-2, 2))
def test_dark_state_is_annihilated(M, logr):
    r = 10.0 ** logr
    H = hamiltonian_for(enumerate_sector(M, ALPHA), 1.0, 0.0)
    D = analytic_dark_state(r, 1.0, M).components[0].amplitudes
    assert null_residual(H, r, D) < 1e-12


def test_invalid_arguments():
    with pytest.raises(ValueError):
        analytic_dark_state(1.0, 0.0, 3)
    with pytest.raises(ValueError):
        analytic_dark_state(1.0, 1.0, 0)
    with pytest.raises(ValueError):
        dark_coefficients(3, 1.0, "bogus")
