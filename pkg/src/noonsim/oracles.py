"""Brute-force reference constructions used to validate the collective code.

Nothing here is used on the production path.  The first-quantized
Hamiltonian treats the atoms as distinguishable six-level systems on the
full tensor product space and only afterwards projects onto normalized
permutation-symmetric states.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .statespace import Basis

_LEVELS = 6


def _single_atom_flip(u: int, v: int) -> sp.csr_matrix:
    """``|v><u|`` on one atom (levels numbered from 1)."""
    m = sp.lil_matrix((_LEVELS, _LEVELS))
    m[v - 1, u - 1] = 1.0
    return m.tocsr()


def _collective(op: sp.csr_matrix, M: int) -> sp.csr_matrix:
    eye = sp.identity(_LEVELS, format="csr")
    total = None
    for i in range(M):
        factors = [eye] * M
        factors[i] = op
        term = factors[0]
        for f in factors[1:]:
            term = sp.kron(term, f, format="csr")
        total = term if total is None else total + term
    return total.tocsr()


def _annihilator(cutoff: int) -> sp.csr_matrix:
    return sp.diags(np.sqrt(np.arange(1, cutoff + 1)), 1, shape=(cutoff + 1, cutoff + 1), format="csr")


@dataclass
class FirstQuantized:
    M: int
    cutoff: int
    H_pump: sp.csr_matrix
    H_cav: sp.csr_matrix
    D_decay: sp.csr_matrix

    def symmetric_state(self, occ) -> np.ndarray:
        """Normalized symmetric vector in atoms (x) photon-a (x) photon-b space."""
        levels = [lvl for lvl in range(_LEVELS) for _ in range(occ[lvl])]
        arrangements = set(itertools.permutations(levels))
        vec_atoms = np.zeros(_LEVELS ** self.M)
        for arr in arrangements:
            idx = 0
            for lv in arr:
                idx = idx * _LEVELS + lv
            vec_atoms[idx] = 1.0
        vec_atoms /= math.sqrt(len(arrangements))
        na, nb = occ[6], occ[7]
        ea = np.zeros(self.cutoff + 1)
        eb = np.zeros(self.cutoff + 1)
        ea[na] = 1.0
        eb[nb] = 1.0
        return np.kron(np.kron(vec_atoms, ea), eb)

    def projector(self, basis: Basis) -> sp.csr_matrix:
        cols = [sp.csr_matrix(self.symmetric_state(s)).T for s in basis.states]
        return sp.hstack(cols, format="csr")

    def project(self, basis: Basis) -> dict[str, np.ndarray]:
        P = self.projector(basis)
        return {
            "H_pump": (P.T @ self.H_pump @ P).toarray(),
            "H_cav": (P.T @ self.H_cav @ P).toarray(),
            "D_decay": (P.T @ self.D_decay @ P).toarray(),
        }


def first_quantized_hamiltonian(M: int, cutoff: int) -> FirstQuantized:
    """Distinct-atom pump, cavity and decay operators with photon cutoff."""
    sig = {
        (u, v): _collective(_single_atom_flip(u, v), M)
        for (u, v) in [(1, 2), (3, 2), (5, 6), (5, 2), (3, 4)]
    }
    a1 = _annihilator(cutoff)
    ip = sp.identity(cutoff + 1, format="csr")
    ia = sp.identity(_LEVELS ** M, format="csr")
    a = sp.kron(ia, sp.kron(a1, ip), format="csr")
    b = sp.kron(ia, sp.kron(ip, a1), format="csr")
    ph = sp.kron(ip, ip, format="csr")

    def atoms(op):
        return sp.kron(op, ph, format="csr")

    pump = atoms(sig[(1, 2)])
    pump = pump + pump.T
    cav = a @ (atoms(sig[(3, 2)]) + atoms(sig[(5, 6)])) + b @ (atoms(sig[(5, 2)]) + atoms(sig[(3, 4)]))
    cav = cav + cav.T
    excited = sp.diags([1.0 if lvl in (1, 3, 5) else 0.0 for lvl in range(_LEVELS)], format="csr")
    decay = atoms(_collective(excited, M))
    return FirstQuantized(M, cutoff, pump.tocsr(), cav.tocsr(), decay.tocsr())


def brute_force_detection(n3_distribution: dict[int, float], K: int, p: float,
                          parity_of: int | None = None) -> float:
    """Probability of registering exactly ``K`` level-3 atoms.

    Each of the ``j`` atoms actually present is detected independently with
    probability ``p``; all ``2**j`` detection patterns are enumerated.  With
    ``parity_of`` set, only patterns whose number of missed atoms has that
    parity contribute.
    """
    total = 0.0
    for j, weight in n3_distribution.items():
        if weight == 0.0 or j < K:
            continue
        for pattern in itertools.product((True, False), repeat=j):
            hits = sum(pattern)
            if hits != K:
                continue
            if parity_of is not None and (j - hits) % 2 != parity_of:
                continue
            total += weight * p ** hits * (1.0 - p) ** (j - hits)
    return total
