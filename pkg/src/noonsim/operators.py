"""Sparse matrices of the interaction Hamiltonian on a sector basis.

Matrix elements are those of the bosonized collective operators,
``<.. n_u - 1, n_v + 1 ..| sigma_vu |.. n_u, n_v ..> = sqrt(n_u (n_v + 1))``,
times ``sqrt(n)`` for each absorbed photon.  The pump and cavity parts are
real symmetric and assembled once; the time dependence of the pump enters
only as a scalar coefficient.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import TextIO

import numpy as np
import scipy.sparse as sp

from .statespace import (
    CAVITY_TERMS,
    PUMP_TERMS,
    Basis,
    OccupationState,
    SectorBasis,
    StateVector,
    apply_term,
    enumerate_sector,
    flip,
)

DECAY_FACTORS = {"amplitude": 1.0, "population": 0.5}


class OperatorError(ValueError):
    pass


def collective_flip_element(state: OccupationState, from_level: int, to_level: int) -> tuple[OccupationState, float]:
    """Image of ``state`` under ``sigma_{to,from}`` and its matrix element.

    Returns the input state with amplitude 0 when ``from_level`` is empty.
    """
    return flip(state, from_level, to_level)


@dataclass(frozen=True)
class SparseOperator:
    matrix: sp.csr_matrix
    hermitian: bool = False

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    def entries(self) -> list[tuple[int, int, complex]]:
        coo = self.matrix.tocoo()
        return [(int(r), int(c), complex(v)) for r, c, v in zip(coo.row, coo.col, coo.data)]

    def hermiticity_error(self) -> float:
        diff = self.matrix - self.matrix.conj().T
        return float(abs(diff).max()) if diff.nnz else 0.0

    def dump(self, fh: TextIO) -> None:
        """Coordinate list, one ``row col re im`` line per stored entry."""
        for r, c, v in self.entries():
            fh.write(f"{r} {c} {v.real:.17g} {v.imag:.17g}\n")


def _assemble(basis: Basis, terms) -> sp.csr_matrix:
    rows, cols, vals = [], [], []
    for j, state in enumerate(basis.states):
        for term in terms:
            target, amp = apply_term(state, term)
            if amp == 0.0:
                continue
            i = basis.index.get(target)
            if i is None:
                raise OperatorError(f"term {term} maps {state} outside the basis")
            # term and its conjugate
            rows += [i, j]
            cols += [j, i]
            vals += [amp, amp]
    n = len(basis)
    mat = sp.coo_matrix((vals, (rows, cols)), shape=(n, n), dtype=float).tocsr()
    mat.sum_duplicates()
    mat.sort_indices()
    return mat


@dataclass(frozen=True)
class HamiltonianSet:
    """Fixed operator pattern of one sector.

    The generator of the dynamics is
    ``Omega(t) * H_pump + g * H_cav - 1j * gamma_factor * Gamma * D_decay``.
    """

    basis: Basis
    H_pump: SparseOperator
    H_cav: SparseOperator
    D_decay: np.ndarray
    g: float
    Gamma: float
    decay_convention: str = "amplitude"

    @property
    def dimension(self) -> int:
        return len(self.basis)

    @property
    def decay_rates(self) -> np.ndarray:
        """Amplitude damping rate of each basis state."""
        return DECAY_FACTORS[self.decay_convention] * self.Gamma * self.D_decay

    def hermitian_part(self, Omega: float) -> sp.csr_matrix:
        return (Omega * self.H_pump.matrix + self.g * self.H_cav.matrix).tocsr()

    def effective(self, Omega: float, decay_on: bool = True) -> sp.csr_matrix:
        H = self.hermitian_part(Omega).astype(complex)
        if decay_on and self.Gamma:
            H = H - 1j * sp.diags(self.decay_rates)
        return H.tocsr()


def build_hamiltonian_set(basis: Basis, g: float, Gamma: float,
                          decay_convention: str = "amplitude") -> HamiltonianSet:
    if decay_convention not in DECAY_FACTORS:
        raise OperatorError(f"decay_convention must be one of {sorted(DECAY_FACTORS)}")
    if g < 0 or Gamma < 0:
        raise OperatorError("rates must be non-negative")
    return HamiltonianSet(
        basis=basis,
        H_pump=SparseOperator(_assemble(basis, PUMP_TERMS), hermitian=True),
        H_cav=SparseOperator(_assemble(basis, CAVITY_TERMS), hermitian=True),
        D_decay=basis.excited.astype(float),
        g=float(g),
        Gamma=float(Gamma),
        decay_convention=decay_convention,
    )


@lru_cache(maxsize=64)
def _cached_set(M: int, sector: tuple[int, int], g: float, Gamma: float, convention: str) -> HamiltonianSet:
    return build_hamiltonian_set(enumerate_sector(M, sector), g, Gamma, convention)


def hamiltonian_for(basis: Basis, g: float, Gamma: float, decay_convention: str = "amplitude") -> HamiltonianSet:
    """Shared, cached operator set for canonical sector bases."""
    if isinstance(basis, SectorBasis) and basis is enumerate_sector(basis.M, basis.sector):
        return _cached_set(basis.M, tuple(basis.sector), float(g), float(Gamma), decay_convention)
    return build_hamiltonian_set(basis, g, Gamma, decay_convention)


def apply(H: HamiltonianSet, Omega: float, psi: np.ndarray | StateVector,
          decay_on: bool = True) -> np.ndarray:
    """``(Omega H_pump + g H_cav - i Gamma D) psi`` on one sector's amplitudes.

    A :class:`StateVector` is accepted when it has exactly one component
    defined on ``H.basis``.
    """
    if isinstance(psi, StateVector):
        if len(psi.components) != 1 or psi.components[0].basis is not H.basis:
            raise OperatorError("state vector is not defined on this operator's basis")
        psi = psi.components[0].amplitudes
    psi = np.asarray(psi)
    if psi.shape != (H.dimension,):
        raise OperatorError(f"dimension mismatch: operator {H.dimension}, vector {psi.shape}")
    out = Omega * (H.H_pump.matrix @ psi) + H.g * (H.H_cav.matrix @ psi)
    if decay_on and H.Gamma:
        out = out - 1j * H.decay_rates * psi
    return out
