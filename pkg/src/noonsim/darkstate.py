"""Dark state of the pumped two-mode system.

The dark state is a superposition of the ladder states ``|n:>`` (``n+1``
atoms in level 3 with ``n`` photons in mode a, mirrored by level 5 and
mode b).  Two coefficient laws are provided on the *normalized* ladder
states:

``collective``
    ``(-Omega/g)^n / sqrt(n! (n+1)!)`` times the norm
    ``sqrt(M! / (M-n-1)!)`` that the collective operators give the
    unnormalized ladder vector.  Equivalently
    ``c[n+1]/c[n] = -(Omega/g) sqrt(M-n-1) / sqrt((n+1)(n+2))``, which is
    the chain recursion obtained by cancelling the two pump/cavity
    pathways into every singly excited intermediate state.
``normalized_ladder``
    ``(-Omega/g)^n / sqrt(n! (n+1)!)`` placed directly on normalized
    ladder states, i.e. the printed normalization constant
    ``C = sum (Omega/g)^(2n) / (n! (n+1)!)`` taken at face value.

The two differ by ``sqrt(M!/(M-n-1)!)`` per rung.  ``law="auto"`` picks
whichever one is annihilated by the Hamiltonian (checked numerically), which
is ``collective``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg as la

from .operators import HamiltonianSet, hamiltonian_for
from .statespace import (
    ALPHA,
    BETA,
    PHOTON_A,
    PHOTON_B,
    Basis,
    Component,
    OccupationState,
    SectorBasis,
    SectorLabel,
    StateVector,
    enumerate_sector,
    seed_state,
)

LAWS = ("collective", "normalized_ladder")


class NoDarkStateError(RuntimeError):
    pass


@dataclass(frozen=True)
class LadderState:
    n: int
    alpha_leg: OccupationState
    beta_leg: OccupationState
    collective_norm: float


@lru_cache(maxsize=None)
def ladder(M: int, mode: str = "atomic") -> tuple[LadderState, ...]:
    """Ladder states ``|0:>, |1:>, ...`` of the atomic or photonic seed."""
    out = []
    if mode == "atomic":
        for n in range(M):
            a = OccupationState(M - n - 1, 0, n + 1, 0, 0, 0, n, 0)
            b = OccupationState(M - n - 1, 0, 0, 0, n + 1, 0, 0, n)
            out.append(LadderState(n, a, b, math.sqrt(math.factorial(M) / math.factorial(M - n - 1))))
    elif mode == "photonic":
        for n in range(M + 1):
            a = OccupationState(M - n, 0, n, 0, 0, 0, n + 1, 0)
            b = OccupationState(M - n, 0, 0, 0, n, 0, 0, n + 1)
            out.append(LadderState(n, a, b, math.sqrt(math.factorial(M) / math.factorial(M - n))))
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return tuple(out)


def _sectors(mode: str) -> tuple[SectorLabel, SectorLabel]:
    return (ALPHA, BETA) if mode == "atomic" else (PHOTON_A, PHOTON_B)


@dataclass(frozen=True)
class DarkStateSpec:
    M: int
    ratio: float
    law: str
    mode: str
    coefficients: np.ndarray
    normalization: float

    @property
    def populations(self) -> np.ndarray:
        return np.abs(self.coefficients) ** 2

    @property
    def mean_excitation(self) -> float:
        return float(np.dot(np.arange(len(self.coefficients)), self.populations))


def _raw_log_coefficients(M: int, ratio: float, law: str, mode: str) -> tuple[np.ndarray, np.ndarray]:
    """Log-magnitudes and signs of the unnormalized coefficients."""
    rungs = ladder(M, mode)
    logs = np.zeros(len(rungs))
    signs = np.ones(len(rungs))
    if ratio == 0.0:
        logs[1:] = -np.inf
        return logs, signs
    lr = math.log(abs(ratio))
    s = -math.copysign(1.0, ratio)
    for n in range(1, len(rungs)):
        signs[n] = signs[n - 1] * s
        if law == "collective":
            prev, cur = rungs[n - 1].alpha_leg, rungs[n].alpha_leg
            logs[n] = logs[n - 1] + lr + 0.5 * (math.log(prev.n1) - math.log(cur.n3 * cur.na))
        elif law == "normalized_ladder":
            logs[n] = logs[n - 1] + lr - 0.5 * math.log(n * (n + 1))
        else:
            raise ValueError(f"unknown coefficient law {law!r}")
    return logs, signs


def dark_coefficients(M: int, ratio: float, law: str = "auto", mode: str = "atomic") -> DarkStateSpec:
    """Normalized ladder coefficients of the dark state at ``Omega/g = ratio``."""
    law = resolve_law(law)
    logs, signs = _raw_log_coefficients(M, ratio, law, mode)
    top = np.max(logs)
    mags = np.exp(logs - top)
    norm = math.sqrt(float(np.sum(mags ** 2)))
    coeffs = signs * mags / norm
    C = float(np.exp(2 * top) * norm ** 2) if np.isfinite(top) else 1.0
    return DarkStateSpec(M, float(ratio), law, mode, coeffs, C)


def analytic_dark_state(Omega: float, g: float, M: int, alpha: complex = 1.0, beta: complex = 0.0,
                        basis: Basis | None = None, law: str = "auto", mode: str = "atomic") -> StateVector:
    """Dark state on the canonical sector bases (or on ``basis`` for one branch)."""
    if g <= 0:
        raise ValueError("g must be positive")
    if M < 1:
        raise ValueError("M must be at least 1")
    spec = dark_coefficients(M, Omega / g, law, mode)
    rungs = ladder(M, mode)
    comps = []
    for weight, sector, leg in zip((alpha, beta), _sectors(mode), ("alpha_leg", "beta_leg")):
        if weight == 0:
            continue
        b = basis if basis is not None and getattr(basis, "sector", None) == sector else enumerate_sector(M, sector)
        amps = np.zeros(len(b), dtype=complex)
        for c, rung in zip(spec.coefficients, rungs):
            amps[b.position(getattr(rung, leg))] = weight * c
        comps.append(Component(b, amps))
    return StateVector(comps, complex(alpha), complex(beta), M)


@dataclass
class NullState:
    amplitudes: np.ndarray
    eigenvalue: float
    residual: float
    excited_population: float
    null_dimension: int


def numerical_null_state(H: HamiltonianSet, Omega: float, basis: SectorBasis | None = None,
                         tol: float = 1e-9) -> NullState:
    """Zero-energy eigenvector of ``Omega H_pump + g H_cav`` without excited population.

    Decay is ignored.  When the zero eigenvalue is degenerate the candidate
    is the projection of the seed state (the dark state at ``Omega = 0``)
    onto the ground-level part of the null space.  The phase is fixed so the
    seed amplitude is real and positive.
    """
    basis = basis if basis is not None else H.basis
    Hm = H.hermitian_part(Omega).toarray()
    w, V = la.eigh(Hm)
    scale = max(1.0, float(np.max(np.abs(w)))) if len(w) else 1.0
    cand = np.flatnonzero(np.abs(w) <= tol * scale)
    if cand.size == 0:
        raise NoDarkStateError(f"no zero eigenvalue (smallest |E| = {np.min(np.abs(w)):.3e})")
    N = V[:, cand]
    exc = basis.excited > 0
    if exc.any():
        _, s, vh = la.svd(N[exc, :], full_matrices=True)
        s_full = np.zeros(N.shape[1])
        s_full[: len(s)] = s
        keep = vh.conj().T[:, s_full < 1e-7]
        G = N @ keep
    else:
        G = N
    if G.shape[1] == 0:
        raise NoDarkStateError("every zero-energy state populates an excited level")
    try:
        seed = basis.position(seed_state(basis.M, basis.sector))
    except Exception:
        seed = int(np.argmax(np.abs(G[:, 0])))
    v = G @ G[seed, :].conj()
    if np.linalg.norm(v) < 1e-12:
        v = G[:, 0].copy()
        seed = int(np.argmax(np.abs(v)))
    v = v / np.linalg.norm(v)
    v = v * (abs(v[seed]) / v[seed])
    v[exc] = np.where(np.abs(v[exc]) < 1e-15, 0.0, v[exc])
    exc_pop = float(np.sum(np.abs(v[exc]) ** 2))
    if exc_pop >= 1e-10:
        raise NoDarkStateError(f"zero-energy state has excited population {exc_pop:.3e}")
    resid = float(np.linalg.norm(Hm @ v) / scale)
    k = int(cand[np.argmin(np.abs(w[cand]))])
    return NullState(v.astype(complex), float(w[k]), resid, exc_pop, int(cand.size))


def null_residual(H: HamiltonianSet, Omega: float, amplitudes: np.ndarray) -> float:
    """``||(Omega Hp + g Hc) D|| / (||H|| ||D||)`` with the spectral norm of ``H``."""
    Hm = H.hermitian_part(Omega)
    num = np.linalg.norm(Hm @ amplitudes)
    hn = _spectral_norm(Hm)
    return float(num / (max(hn, 1e-300) * np.linalg.norm(amplitudes)))


def _spectral_norm(Hm) -> float:
    dense = Hm.toarray() if hasattr(Hm, "toarray") else np.asarray(Hm)
    if dense.size == 0:
        return 0.0
    return float(np.max(np.abs(la.eigvalsh(dense))))


@lru_cache(maxsize=None)
def select_coefficient_law(M: int = 3, ratios: tuple[float, ...] = (0.5, 2.0), tol: float = 1e-10) -> str:
    """Pick the coefficient law whose state the Hamiltonian annihilates."""
    basis = enumerate_sector(M, ALPHA)
    H = hamiltonian_for(basis, 1.0, 0.0)
    passing = []
    for law in LAWS:
        ok = True
        for r in ratios:
            D = analytic_dark_state(r, 1.0, M, 1.0, 0.0, law=law).components[0].amplitudes
            if null_residual(H, r, D) > tol:
                ok = False
                break
        if ok:
            passing.append(law)
    if len(passing) != 1:
        raise NoDarkStateError(f"coefficient-law oracle is ambiguous: {passing}")
    return passing[0]


def resolve_law(law: str) -> str:
    if law == "auto":
        return select_coefficient_law()
    if law not in LAWS:
        raise ValueError(f"unknown coefficient law {law!r}")
    return law


class LadderProjector:
    """Fast ladder amplitudes of a state defined on canonical sector bases."""

    def __init__(self, psi: StateVector, mode: str | None = None):
        sectors = {getattr(c.basis, "sector", None) for c in psi.components}
        if mode is None:
            mode = "photonic" if sectors & {PHOTON_A, PHOTON_B} else "atomic"
        self.mode = mode
        self.M = psi.M
        self.alpha, self.beta = psi.alpha, psi.beta
        rungs = ladder(psi.M, mode)
        sa, sb = _sectors(mode)
        self.slots = []  # (component index, positions, weight)
        for ci, c in enumerate(psi.components):
            sector = getattr(c.basis, "sector", None)
            if sector == sa:
                pos = [c.basis.position(r.alpha_leg) for r in rungs]
                self.slots.append((ci, np.array(pos), self.alpha))
            elif sector == sb:
                pos = [c.basis.position(r.beta_leg) for r in rungs]
                self.slots.append((ci, np.array(pos), self.beta))

    def amplitudes(self, psi: StateVector) -> np.ndarray:
        """``<n:|psi>`` for every rung."""
        out = np.zeros(len(ladder(self.M, self.mode)), dtype=complex)
        for ci, pos, weight in self.slots:
            out += np.conj(weight) * psi.components[ci].amplitudes[pos]
        return out


def dark_overlap(psi: StateVector, Omega: float, g: float, M: int | None = None,
                 law: str = "auto", projector: LadderProjector | None = None) -> float:
    """Population ``|<D(Omega)|psi>|^2`` of the instantaneous dark state."""
    proj = projector or LadderProjector(psi)
    spec = dark_coefficients(M or psi.M, Omega / g, law, proj.mode)
    amp = np.dot(spec.coefficients, proj.amplitudes(psi))
    return float(abs(amp) ** 2)


def ladder_populations(psi: StateVector, projector: LadderProjector | None = None) -> np.ndarray:
    proj = projector or LadderProjector(psi)
    return np.abs(proj.amplitudes(psi)) ** 2


def chain_couplings(n: int, M: int, Omega: float, g: float) -> tuple[float, float]:
    """Reduced-chain couplings ``(Omega sqrt(M-n+1), g sqrt(n(n+1)))`` as printed.

    The Hamiltonian's own pump element into the intermediate state between
    ``|n-1:>`` and ``|n:>`` is ``Omega sqrt(M-n)``; see
    :func:`extract_chain_couplings`.
    """
    if not 1 <= n <= M - 1:
        raise IndexError(f"chain index n={n} outside 1..{M - 1}")
    return Omega * math.sqrt(M - n + 1), g * math.sqrt(n * (n + 1))


def extract_chain_couplings(H: HamiltonianSet, n: int, Omega: float) -> tuple[float, float]:
    """Read the rung ``n`` couplings off the assembled alpha-sector matrices."""
    M = H.basis.M
    if not 1 <= n <= M - 1:
        raise IndexError(f"chain index n={n} outside 1..{M - 1}")
    rungs = ladder(M, "atomic")
    inter = OccupationState(M - n - 1, 1, n, 0, 0, 0, n - 1, 0)
    i = H.basis.position(inter)
    lo = H.basis.position(rungs[n - 1].alpha_leg)
    hi = H.basis.position(rungs[n].alpha_leg)
    return Omega * float(H.H_pump.matrix[i, lo]), H.g * float(H.H_cav.matrix[i, hi])
