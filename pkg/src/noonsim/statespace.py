"""Collective state space of M six-level atoms and two cavity modes.

Atoms are indistinguishable and start in the symmetric subspace, so a basis
vector is fully specified by the level occupations ``n1..n6`` together with
the photon numbers ``na``, ``nb``.  Every term of the interaction Hamiltonian
conserves the two sector constants

    Y = na - n3 - n4 + n6
    Z = nb - n5 - n6 + n4

so the photon numbers are a function of the atomic occupations inside a
sector.  The atomic seed ``sigma_31 |vac>`` lives in sector ``(-1, 0)``, the
seed ``sigma_51 |vac>`` in ``(0, -1)``; the photonic seeds ``a^dag |vac>``
and ``b^dag |vac>`` live in ``(1, 0)`` and ``(0, 1)``.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Iterator, NamedTuple, Sequence

import numpy as np


class StateSpaceError(ValueError):
    """Raised for invalid occupations, labels, sectors or initial states."""


class OccupationState(NamedTuple):
    """Occupation numbers of one symmetric basis vector."""

    n1: int
    n2: int
    n3: int
    n4: int
    n5: int
    n6: int
    na: int
    nb: int

    @property
    def M(self) -> int:
        return self.n1 + self.n2 + self.n3 + self.n4 + self.n5 + self.n6

    @property
    def levels(self) -> tuple[int, int, int, int, int, int]:
        return (self.n1, self.n2, self.n3, self.n4, self.n5, self.n6)

    @property
    def excited(self) -> int:
        """Number of atoms in the short-lived levels 2, 4 and 6."""
        return self.n2 + self.n4 + self.n6

    @property
    def photons(self) -> int:
        return self.na + self.nb

    @property
    def sector(self) -> "SectorLabel":
        return SectorLabel(
            self.na - self.n3 - self.n4 + self.n6,
            self.nb - self.n5 - self.n6 + self.n4,
        )

    def as_dict(self) -> dict[str, int]:
        return self._asdict()


class SectorLabel(NamedTuple):
    Y: int
    Z: int

    @property
    def branch(self) -> str:
        return _BRANCH_NAMES.get((self.Y, self.Z), "other")


ALPHA = SectorLabel(-1, 0)
BETA = SectorLabel(0, -1)
PHOTON_A = SectorLabel(1, 0)
PHOTON_B = SectorLabel(0, 1)

_BRANCH_NAMES = {
    tuple(ALPHA): "alpha",
    tuple(BETA): "beta",
    tuple(PHOTON_A): "photon_a",
    tuple(PHOTON_B): "photon_b",
}

BRANCHES = {"alpha": ALPHA, "beta": BETA, "photon_a": PHOTON_A, "photon_b": PHOTON_B}


def as_sector(sector: SectorLabel | str | Sequence[int]) -> SectorLabel:
    if isinstance(sector, str):
        try:
            return BRANCHES[sector]
        except KeyError:
            raise StateSpaceError(f"unknown branch {sector!r}") from None
    Y, Z = sector
    return SectorLabel(int(Y), int(Z))


def make_occupation(M: int, n2: int, n3: int, n4: int, n5: int, n6: int,
                    sector: SectorLabel) -> OccupationState:
    """Complete atomic occupations ``n2..n6`` to a state of the given sector."""
    n1 = M - (n2 + n3 + n4 + n5 + n6)
    na = sector.Y + n3 + n4 - n6
    nb = sector.Z + n5 + n6 - n4
    state = OccupationState(n1, n2, n3, n4, n5, n6, na, nb)
    if min(state) < 0:
        raise StateSpaceError(f"negative occupation in {state}")
    return state


class Basis:
    """Ordered collection of occupation states with index lookup.

    States are stored in the order given; use :func:`enumerate_sector` for the
    canonical lexicographic order of a single sector.
    """

    def __init__(self, states: Iterable[OccupationState]):
        self.states: tuple[OccupationState, ...] = tuple(OccupationState(*s) for s in states)
        self.index: dict[OccupationState, int] = {s: i for i, s in enumerate(self.states)}
        if len(self.index) != len(self.states):
            raise StateSpaceError("duplicate states in basis")
        self.table = np.array(self.states, dtype=np.int64).reshape(len(self.states), 8)

    def __len__(self) -> int:
        return len(self.states)

    def __iter__(self) -> Iterator[OccupationState]:
        return iter(self.states)

    def __contains__(self, state) -> bool:
        return OccupationState(*state) in self.index

    def __getitem__(self, i: int) -> OccupationState:
        return self.states[i]

    def position(self, state: Sequence[int]) -> int:
        return self.index[OccupationState(*state)]

    def column(self, name: str) -> np.ndarray:
        return self.table[:, OccupationState._fields.index(name)]

    @property
    def excited(self) -> np.ndarray:
        return self.column("n2") + self.column("n4") + self.column("n6")

    @property
    def photons(self) -> np.ndarray:
        return self.column("na") + self.column("nb")

    def to_records(self) -> list[dict[str, int]]:
        return [dict(s._asdict(), index=i) for i, s in enumerate(self.states)]


class SectorBasis(Basis):
    """All occupation states of M atoms in one conserved sector."""

    def __init__(self, M: int, sector: SectorLabel, states: Iterable[OccupationState]):
        super().__init__(states)
        self.M = M
        self.sector = sector

    def __repr__(self) -> str:
        return f"SectorBasis(M={self.M}, sector={tuple(self.sector)}, dim={len(self)})"


@lru_cache(maxsize=64)
def enumerate_sector(M: int, sector: SectorLabel | str | tuple[int, int]) -> SectorBasis:
    """Enumerate every occupation state of ``M`` atoms in ``sector``.

    The result is ordered lexicographically in ``(n2, n3, n4, n5, n6)`` and
    cached; :class:`SectorBasis` is never mutated after construction.
    """
    if M < 1:
        raise StateSpaceError(f"need at least one atom, got M={M}")
    sector = as_sector(sector)
    states = []
    for n2, n3, n4, n5, n6 in itertools.product(range(M + 1), repeat=5):
        if n2 + n3 + n4 + n5 + n6 > M:
            continue
        na = sector.Y + n3 + n4 - n6
        nb = sector.Z + n5 + n6 - n4
        if na < 0 or nb < 0:
            continue
        states.append(OccupationState(M - (n2 + n3 + n4 + n5 + n6), n2, n3, n4, n5, n6, na, nb))
    if not states:
        raise StateSpaceError(f"sector {tuple(sector)} is empty for M={M}")
    return SectorBasis(M, sector, states)


def labels_to_occupation(m: int, k: int, l: int, q: int, r: int, branch: str, M: int) -> OccupationState:
    """Convert ``|m,k,l,q,r>`` amplitude labels to occupations.

    The label state is ``s21^m s31^(k-q) s51^(l-r) s41^q s61^r a^(k-r) b^(l-q)``
    acting on the seed ``s31 |vac>`` (alpha) or ``s51 |vac>`` (beta).
    """
    n2, n3, n4, n5, n6 = m, k - q, q, l - r, r
    na, nb = k - r, l - q
    if branch == "alpha":
        n3 += 1
    elif branch == "beta":
        n5 += 1
    else:
        raise StateSpaceError(f"labels are defined for the alpha/beta branches, not {branch!r}")
    n1 = M - (n2 + n3 + n4 + n5 + n6)
    state = OccupationState(n1, n2, n3, n4, n5, n6, na, nb)
    if min(state) < 0:
        raise StateSpaceError(f"labels {(m, k, l, q, r)} give negative occupation {state}")
    return state


def label_range(M: int) -> Iterator[tuple[int, int, int, int, int]]:
    """Label tuples covered by the nested amplitude sums (``q, r <= min(k, l)``)."""
    for m in range(M + 1):
        for l in range(M - m + 1):
            for k in range(M - m - l + 1):
                for q in range(min(k, l) + 1):
                    for r in range(min(k, l) + 1):
                        yield m, k, l, q, r


# Interaction terms as (from level, to level, annihilated photon mode).
# Each term moves one atom and absorbs one photon; its Hermitian conjugate
# moves the atom back and emits the photon.
PUMP_TERMS: tuple[tuple[int, int, str | None], ...] = ((1, 2, None),)
CAVITY_TERMS: tuple[tuple[int, int, str | None], ...] = (
    (3, 2, "a"),  # a s23
    (5, 6, "a"),  # a s65
    (5, 2, "b"),  # b s25
    (3, 4, "b"),  # b s43
)

_LEVEL_SLOT = {lvl: lvl - 1 for lvl in range(1, 7)}
_MODE_SLOT = {"a": 6, "b": 7}


def flip(state: OccupationState, u: int, v: int) -> tuple[OccupationState, float]:
    """Collective flip ``sigma_vu``: move one atom from level ``u`` to ``v``."""
    occ = list(state)
    nu = occ[_LEVEL_SLOT[u]]
    if nu == 0:
        return state, 0.0
    if u == v:
        return state, float(nu)
    nv = occ[_LEVEL_SLOT[v]]
    occ[_LEVEL_SLOT[u]] -= 1
    occ[_LEVEL_SLOT[v]] += 1
    return OccupationState(*occ), float(np.sqrt(nu * (nv + 1)))


def photon_op(state: OccupationState, mode: str, create: bool) -> tuple[OccupationState, float]:
    occ = list(state)
    slot = _MODE_SLOT[mode]
    n = occ[slot]
    if create:
        occ[slot] += 1
        return OccupationState(*occ), float(np.sqrt(n + 1))
    if n == 0:
        return state, 0.0
    occ[slot] -= 1
    return OccupationState(*occ), float(np.sqrt(n))


def apply_term(state: OccupationState, term: tuple[int, int, str | None],
               dagger: bool = False) -> tuple[OccupationState, float]:
    """Act with one interaction term (or its conjugate) on a basis state."""
    u, v, mode = term
    if dagger:
        u, v = v, u
    target, amp = flip(state, u, v)
    if amp == 0.0:
        return state, 0.0
    if mode is not None:
        target, pamp = photon_op(target, mode, create=dagger)
        amp *= pamp
    return target, amp


def neighbours(state: OccupationState, terms=PUMP_TERMS + CAVITY_TERMS) -> Iterator[tuple[OccupationState, float]]:
    for term in terms:
        for dagger in (False, True):
            target, amp = apply_term(state, term, dagger)
            if amp != 0.0:
                yield target, amp


def reachable_states(seed: OccupationState) -> set[OccupationState]:
    """Closure of ``seed`` under every Hamiltonian term (breadth-first search)."""
    seen = {seed}
    queue = deque([seed])
    while queue:
        s = queue.popleft()
        for t, _ in neighbours(s):
            if t not in seen:
                seen.add(t)
                queue.append(t)
    return seen


@dataclass(frozen=True)
class ReachabilityReport:
    M: int
    sector: SectorLabel
    enumerated: int
    reachable: int
    unreachable: tuple[OccupationState, ...]
    missing: tuple[OccupationState, ...]

    @property
    def complete(self) -> bool:
        return not self.missing and not self.unreachable


def reachability_report(M: int, sector: SectorLabel | str) -> ReachabilityReport:
    """Compare the enumerated sector with the closure of its seed state."""
    basis = enumerate_sector(M, sector)
    reach = reachable_states(seed_state(M, basis.sector))
    enum = set(basis.states)
    return ReachabilityReport(
        M=M,
        sector=basis.sector,
        enumerated=len(enum),
        reachable=len(reach),
        unreachable=tuple(sorted(enum - reach)),
        missing=tuple(sorted(reach - enum)),
    )


def seed_state(M: int, sector: SectorLabel | str) -> OccupationState:
    """The single-excitation seed of a branch (one excitation, rest in level 1)."""
    sector = as_sector(sector)
    seeds = {
        ALPHA: OccupationState(M - 1, 0, 1, 0, 0, 0, 0, 0),
        BETA: OccupationState(M - 1, 0, 0, 0, 1, 0, 0, 0),
        PHOTON_A: OccupationState(M, 0, 0, 0, 0, 0, 1, 0),
        PHOTON_B: OccupationState(M, 0, 0, 0, 0, 0, 0, 1),
    }
    try:
        return seeds[sector]
    except KeyError:
        raise StateSpaceError(f"no seed state defined for sector {tuple(sector)}") from None


@dataclass
class Component:
    """Amplitudes of one sector; the branch weight is folded in."""

    basis: Basis
    amplitudes: np.ndarray

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.shape != (len(self.basis),):
            raise StateSpaceError("amplitude vector does not match basis dimension")


@dataclass
class StateVector:
    """State as a direct sum of sector components sharing one parameter set."""

    components: list[Component]
    alpha: complex = 1.0
    beta: complex = 0.0
    M: int = field(default=0)

    def __post_init__(self):
        if not self.M and self.components:
            self.M = self.components[0].basis[0].M

    def norm(self) -> float:
        return float(np.sqrt(sum(np.vdot(c.amplitudes, c.amplitudes).real for c in self.components)))

    def copy(self) -> "StateVector":
        comps = [Component(c.basis, c.amplitudes.copy()) for c in self.components]
        return StateVector(comps, self.alpha, self.beta, self.M)

    def component(self, sector: SectorLabel | str) -> Component:
        sector = as_sector(sector)
        for c in self.components:
            if getattr(c.basis, "sector", None) == sector:
                return c
        raise KeyError(f"no component for sector {tuple(sector)}")

    def amplitude(self, state: Sequence[int]) -> complex:
        state = OccupationState(*state)
        for c in self.components:
            i = c.basis.index.get(state)
            if i is not None:
                return complex(c.amplitudes[i])
        return 0.0j

    def merged(self) -> tuple[Basis, np.ndarray]:
        """Single basis spanning all components, with the joint amplitude vector."""
        states = [s for c in self.components for s in c.basis.states]
        amps = np.concatenate([c.amplitudes for c in self.components]) if self.components else np.zeros(0, complex)
        return Basis(states), amps

    def vdot(self, other: "StateVector") -> complex:
        """``<self|other>``, matching components by occupation state."""
        total = 0.0j
        for c in self.components:
            for s, a in zip(c.basis.states, c.amplitudes):
                if a != 0:
                    total += np.conj(a) * other.amplitude(s)
        return complex(total)


def make_initial_state(alpha: complex, beta: complex, M: int, mode: str = "atomic") -> StateVector:
    """Seed state ``(alpha s31 + beta s51)|vac>`` or ``(alpha a^dag + beta b^dag)|vac>``.

    Only the branches with nonzero weight are carried as components.
    """
    alpha, beta = complex(alpha), complex(beta)
    if abs(abs(alpha) ** 2 + abs(beta) ** 2 - 1.0) > 1e-12:
        raise StateSpaceError(f"|alpha|^2 + |beta|^2 must be 1, got {abs(alpha) ** 2 + abs(beta) ** 2!r}")
    if mode == "atomic":
        sectors = (ALPHA, BETA)
    elif mode == "photonic":
        sectors = (PHOTON_A, PHOTON_B)
    else:
        raise StateSpaceError(f"unknown initial-state mode {mode!r}")
    comps = []
    for weight, sector in zip((alpha, beta), sectors):
        if weight == 0:
            continue
        basis = enumerate_sector(M, sector)
        amps = np.zeros(len(basis), dtype=complex)
        amps[basis.position(seed_state(M, sector))] = weight
        comps.append(Component(basis, amps))
    return StateVector(comps, alpha, beta, M)


def state_to_json(psi: StateVector) -> dict:
    return {
        "M": psi.M,
        "alpha": [psi.alpha.real, psi.alpha.imag],
        "beta": [psi.beta.real, psi.beta.imag],
        "components": [
            {
                "sector": list(getattr(c.basis, "sector", (None, None))),
                "states": [list(s) for s in c.basis.states],
                "re": c.amplitudes.real.tolist(),
                "im": c.amplitudes.imag.tolist(),
            }
            for c in psi.components
        ],
    }


def state_from_json(data: dict) -> StateVector:
    M = int(data["M"])
    comps = []
    for cd in data["components"]:
        states = [OccupationState(*s) for s in cd["states"]]
        Y, Z = cd["sector"]
        basis = SectorBasis(M, SectorLabel(Y, Z), states) if Y is not None else Basis(states)
        amps = np.asarray(cd["re"], float) + 1j * np.asarray(cd["im"], float)
        comps.append(Component(basis, amps))
    return StateVector(comps, complex(*data["alpha"]), complex(*data["beta"]), M)
