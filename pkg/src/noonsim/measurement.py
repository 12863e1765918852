"""Conversion of the atom-photon ladder state into a photonic NOON state.

A microwave pulse mixes the collective atomic modes of levels 3 and 5,
after which the number of atoms in level 3 is counted.  For the top ladder
state the photons are left in ``alpha |N,0> + s beta |0,N>`` with
``s = (-1)^K`` for ``K`` detected atoms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .oracles import brute_force_detection
from .statespace import Basis, Component, OccupationState, StateVector


class MeasurementError(ValueError):
    pass


@dataclass(frozen=True)
class RotationSpec:
    """Two-mode mixing of atomic levels 3 and 5.

    With ``reflect=False`` (default) the collective creation operators map as
    ``c3 -> cos(t) c3 + e^{i phi} sin(t) c5`` and
    ``c5 -> -e^{-i phi} sin(t) c3 + cos(t) c5``, an SU(2) rotation generated by
    the 3<->5 exchange.  ``reflect=True`` gives
    ``c5 -> e^{-i phi} sin(t) c3 - cos(t) c5`` instead, which at ``t = pi/4``
    maps ``s51`` to ``(s31 - s51)/sqrt(2)``.
    """

    angle: float = math.pi / 4
    phase: float = 0.0
    reflect: bool = False

    def matrix(self) -> np.ndarray:
        """Columns are the images of ``c3^dag`` and ``c5^dag`` in the (3, 5) basis."""
        c, s = math.cos(self.angle), math.sin(self.angle)
        e = complex(math.cos(self.phase), math.sin(self.phase))
        if self.reflect:
            return np.array([[c, np.conj(e) * s], [e * s, -c]], dtype=complex)
        return np.array([[c, -np.conj(e) * s], [e * s, c]], dtype=complex)


def _mode_transform(n3: int, n5: int, U: np.ndarray) -> np.ndarray:
    """Amplitudes on ``|j, T-j>`` (j = 0..T) of the transformed ``|n3, n5>``."""
    T = n3 + n5
    out = np.zeros(T + 1, dtype=complex)
    u33, u53 = U[0, 0], U[1, 0]
    u35, u55 = U[0, 1], U[1, 1]
    for a in range(n3 + 1):
        ca = math.comb(n3, a) * u33 ** a * u53 ** (n3 - a)
        for b in range(n5 + 1):
            out[a + b] += ca * math.comb(n5, b) * u35 ** b * u55 ** (n5 - b)
    j = np.arange(T + 1)
    fact = np.array([math.sqrt(math.factorial(int(x)) * math.factorial(T - int(x))) for x in j])
    return out * fact / math.sqrt(math.factorial(n3) * math.factorial(n5))


def rotate_35(psi: StateVector, spec: RotationSpec | None = None) -> StateVector:
    """Apply the 3<->5 mixing; the result lives on one merged basis.

    The map conserves ``n3 + n5``, all other occupations and the photon
    numbers, but not the sector constants, so components are merged.
    """
    spec = spec or RotationSpec()
    U = spec.matrix()
    amps: dict[OccupationState, complex] = {}
    for comp in psi.components:
        for s, a in zip(comp.basis.states, comp.amplitudes):
            if a == 0:
                continue
            coeffs = _mode_transform(s.n3, s.n5, U)
            T = s.n3 + s.n5
            for j, cj in enumerate(coeffs):
                if cj == 0:
                    continue
                t = s._replace(n3=j, n5=T - j)
                amps[t] = amps.get(t, 0.0) + a * cj
    states = sorted(amps)
    basis = Basis(states)
    vec = np.array([amps[s] for s in states], dtype=complex)
    return StateVector([Component(basis, vec)], psi.alpha, psi.beta, psi.M)


def photon_basis(N: int) -> list[tuple[int, int]]:
    return [(N, 0), (0, N)]


def noon_vector(alpha: complex, beta: complex, N: int, sign: int,
                basis: list[tuple[int, int]]) -> np.ndarray:
    """``(alpha |N,0> + sign beta |0,N>)`` normalized, on ``basis``."""
    v = np.zeros(len(basis), dtype=complex)
    idx = {b: i for i, b in enumerate(basis)}
    if N == 0:
        v[idx[(0, 0)]] = 1.0
        return v
    for key, amp in (((N, 0), alpha), ((0, N), sign * beta)):
        if key in idx:
            v[idx[key]] += amp
    nrm = math.sqrt(abs(alpha) ** 2 + abs(beta) ** 2)
    return v / nrm


def noon_fidelity(state: np.ndarray, basis: list[tuple[int, int]], alpha: complex, beta: complex,
                  N: int) -> dict:
    """Fidelity with ``NOON(alpha, +-beta, N)``; ``state`` is a vector or density matrix."""
    state = np.asarray(state, dtype=complex)
    rho = np.outer(state, state.conj()) if state.ndim == 1 else state
    tr = float(np.trace(rho).real)
    if tr <= 0:
        return {"plus": 0.0, "minus": 0.0, "best": 0.0, "best_sign": 1}
    rho = rho / tr
    out = {}
    for name, sgn in (("plus", 1), ("minus", -1)):
        v = noon_vector(alpha, beta, N, sgn, basis)
        out[name] = float(np.real(v.conj() @ rho @ v))
    best_sign = 1 if out["plus"] >= out["minus"] else -1
    out["best"] = max(out["plus"], out["minus"])
    out["best_sign"] = best_sign
    return out


@dataclass
class MeasurementOutcome:
    K: int
    probability: float
    photon_basis: list[tuple[int, int]]
    density: np.ndarray | None
    amplitudes: np.ndarray | None
    fidelity: float
    fidelity_plus: float
    fidelity_minus: float
    sign: int
    expected_sign: int
    defined: bool = True
    n5: int | None = None

    def as_dict(self) -> dict:
        return {"K": self.K, "n5": self.n5, "probability": self.probability,
                "fidelity": self.fidelity, "fidelity_plus": self.fidelity_plus,
                "fidelity_minus": self.fidelity_minus, "sign": self.sign,
                "expected_sign": self.expected_sign, "defined": self.defined}


def _photon_density(basis: Basis, amps: np.ndarray, mask: np.ndarray,
                    weights: np.ndarray | None = None):
    """Reduced photon density matrix of the selected states (unnormalized)."""
    sel = np.flatnonzero(mask)
    keys = sorted({(int(basis[i].na), int(basis[i].nb)) for i in sel})
    pidx = {k: i for i, k in enumerate(keys)}
    groups: dict[tuple, np.ndarray] = {}
    for i in sel:
        s = basis[i]
        atoms = s.levels
        v = groups.setdefault(atoms, np.zeros(len(keys), dtype=complex))
        w = 1.0 if weights is None else math.sqrt(weights[i])
        v[pidx[(s.na, s.nb)]] += w * amps[i]
    rho = np.zeros((len(keys), len(keys)), dtype=complex)
    for v in groups.values():
        rho += np.outer(v, v.conj())
    return keys, rho


def _outcome(K, prob, keys, rho, alpha, beta, N, n5=None, tol=1e-24) -> MeasurementOutcome:
    expected = -1 if K % 2 else 1
    if prob <= tol:
        return MeasurementOutcome(K, 0.0, keys, None, None, math.nan, math.nan, math.nan,
                                  expected, expected, defined=False, n5=n5)
    rho = rho / prob
    w, V = np.linalg.eigh(rho)
    amps = None
    if w[-1] > 1 - 1e-12:
        amps = V[:, -1]
        k = int(np.argmax(np.abs(amps)))
        amps = amps * (abs(amps[k]) / amps[k])
    fid = noon_fidelity(rho, keys, alpha, beta, N)
    return MeasurementOutcome(
        K, float(prob), keys, rho, amps,
        fidelity=fid["plus"] if expected == 1 else fid["minus"],
        fidelity_plus=fid["plus"], fidelity_minus=fid["minus"],
        sign=fid["best_sign"], expected_sign=expected, n5=n5,
    )


def default_noon_size(psi: StateVector) -> int:
    sectors = {tuple(getattr(c.basis, "sector", ())) for c in psi.components}
    photonic = bool(sectors & {(1, 0), (0, 1)})
    return psi.M + 1 if photonic else psi.M - 1


def project_and_condition(psi_rot: StateVector, K: int, N: int | None = None,
                          n5: int | None = None) -> MeasurementOutcome:
    """Project on ``n3 = K`` (and ``n5`` when given) and condition the photons.

    The photon state is the reduced density matrix over any unmeasured
    atomic degrees of freedom; ``amplitudes`` is filled when it is pure.
    """
    if not 0 <= K <= psi_rot.M:
        raise MeasurementError(f"K={K} outside 0..{psi_rot.M}")
    N = default_noon_size(psi_rot) if N is None else N
    basis, amps = psi_rot.merged()
    mask = basis.column("n3") == K
    if n5 is not None:
        mask &= basis.column("n5") == n5
    prob = float(np.sum(np.abs(amps[mask]) ** 2))
    keys, rho = _photon_density(basis, amps, mask)
    return _outcome(K, prob, keys, rho, psi_rot.alpha, psi_rot.beta, N, n5=n5)


def project_lossy(psi_rot: StateVector, K: int, p: float, N: int | None = None) -> MeasurementOutcome:
    """Herald ``K`` clicks from a detector that sees each level-3 atom with probability ``p``."""
    if not 0 <= p <= 1:
        raise MeasurementError("detection efficiency must lie in [0, 1]")
    N = default_noon_size(psi_rot) if N is None else N
    basis, amps = psi_rot.merged()
    n3 = basis.column("n3")
    w = np.array([math.comb(int(j), K) * p ** K * (1 - p) ** (int(j) - K) if j >= K else 0.0 for j in n3])
    mask = w > 0
    prob = float(np.sum(w[mask] * np.abs(amps[mask]) ** 2))
    # different true n3 values are orthogonal records in the detector
    keys_all = sorted({(int(s.na), int(s.nb)) for s in basis.states})
    rho = np.zeros((len(keys_all), len(keys_all)), dtype=complex)
    pidx = {k: i for i, k in enumerate(keys_all)}
    for j in np.unique(n3[mask]):
        keys, r = _photon_density(basis, amps, mask & (n3 == j), weights=w)
        ix = [pidx[k] for k in keys]
        rho[np.ix_(ix, ix)] += r
    return _outcome(K, prob, keys_all, rho, psi_rot.alpha, psi_rot.beta, N)


def measure_all(psi_rot: StateVector, N: int | None = None, p: float | None = None) -> list[MeasurementOutcome]:
    """Outcomes for every ``K = 0..M`` (ideal detector unless ``p`` is given)."""
    if p is None:
        return [project_and_condition(psi_rot, K, N) for K in range(psi_rot.M + 1)]
    return [project_lossy(psi_rot, K, p, N) for K in range(psi_rot.M + 1)]


def measure_n3_n5(psi_rot: StateVector, N: int | None = None) -> list[MeasurementOutcome]:
    out = []
    for K in range(psi_rot.M + 1):
        for n5 in range(psi_rot.M - K + 1):
            out.append(project_and_condition(psi_rot, K, N, n5=n5))
    return out


@dataclass(frozen=True)
class DetectionWeight:
    M: int
    K: int
    p: float
    form: str
    weight: float
    normalized: float


def _literal_weight(M: int, K: int, p: float) -> float:
    lo = math.ceil(K / 2)
    hi = math.floor((M - K) / 2)
    return p ** K * sum((1 - p) ** (2 * m) * math.comb(M, 2 * m) for m in range(lo, hi + 1))


def _derived_weight(M: int, K: int, p: float) -> float:
    """Probability of ``K`` clicks with an even number of missed atoms for ``|(M-1):>``."""
    return (math.comb(M, K) / 2 ** M * p ** K
            * sum((1 - p) ** (2 * m) * math.comb(M - K, 2 * m) for m in range((M - K) // 2 + 1)))


_FORMS = {"literal": _literal_weight, "derived": _derived_weight}


def detection_probability(M: int, K: int, p: float, form: str = "literal") -> DetectionWeight:
    """Heralding weight of ``K`` level-3 detections at efficiency ``p``.

    ``form="literal"`` is ``p^K sum_{m=K/2}^{(M-K)/2} (1-p)^{2m} C(M, 2m)`` with
    the limits rounded inward; it is defined only up to a constant, so the
    result also carries the weight normalized over ``K = 0..M``.
    ``form="derived"`` is the absolute probability for the ideal rotated top
    ladder state, ``C(M,K)/2^M p^K sum_m (1-p)^{2m} C(M-K, 2m)``.
    """
    if not 0 <= p <= 1:
        raise MeasurementError("p must lie in [0, 1]")
    if not 0 <= K <= M:
        raise MeasurementError(f"K={K} outside 0..{M}")
    fn = _FORMS[form]
    w = fn(M, K, p)
    total = sum(fn(M, k, p) for k in range(M + 1))
    return DetectionWeight(M, K, p, form, w, w / total if total > 0 else 0.0)


def n3_distribution(psi_rot: StateVector) -> dict[int, float]:
    basis, amps = psi_rot.merged()
    dist: dict[int, float] = {}
    for s, a in zip(basis.states, amps):
        dist[s.n3] = dist.get(s.n3, 0.0) + float(abs(a) ** 2)
    return dist


@dataclass
class DetectionComparison:
    M: int
    p: float
    K: int
    literal_normalized: float
    brute_normalized: float
    derived: float
    brute: float

    @property
    def literal_matches(self) -> bool:
        return abs(self.literal_normalized - self.brute_normalized) <= 1e-12

    @property
    def derived_matches(self) -> bool:
        return abs(self.derived - self.brute) <= 1e-12


@dataclass
class DetectionReport:
    rows: list[DetectionComparison] = field(default_factory=list)

    @property
    def discrepancies(self) -> list[DetectionComparison]:
        return [r for r in self.rows if not r.literal_matches]

    def as_dict(self) -> dict:
        return {
            "rows": [vars(r) | {"literal_matches": r.literal_matches, "derived_matches": r.derived_matches}
                     for r in self.rows],
            "literal_discrepancies": len(self.discrepancies),
            "derived_all_match": all(r.derived_matches for r in self.rows),
        }


def compare_detection_formulas(Ms=range(1, 7), ps=(0.0, 0.4, 0.9, 1.0)) -> DetectionReport:
    """Both closed forms against brute-force enumeration of detector miss patterns.

    The brute-force side uses the ``n3`` distribution of the rotated top
    ladder state and counts only heralds with an even number of misses.  One
    branch is used: with both present at ``M = 1`` the photon-free legs
    interfere and ``n3`` is no longer binomial.
    """
    report = DetectionReport()
    for M in Ms:
        dist = n3_distribution(rotate_35(top_ladder_state(M, 1.0, 0.0)))
        for p in ps:
            brute = [brute_force_detection(dist, K, p, parity_of=0) for K in range(M + 1)]
            btot = sum(brute)
            for K in range(M + 1):
                report.rows.append(DetectionComparison(
                    M, p, K,
                    literal_normalized=detection_probability(M, K, p, "literal").normalized,
                    brute_normalized=brute[K] / btot if btot > 0 else 0.0,
                    derived=detection_probability(M, K, p, "derived").weight,
                    brute=brute[K],
                ))
    return report


def top_ladder_state(M: int, alpha: complex, beta: complex) -> StateVector:
    """``|(M-1):>`` on the atomic sector bases."""
    from .darkstate import ladder
    from .statespace import ALPHA, BETA, enumerate_sector

    rung = ladder(M, "atomic")[-1]
    comps = []
    for w, sector, leg in ((alpha, ALPHA, rung.alpha_leg), (beta, BETA, rung.beta_leg)):
        if w == 0:
            continue
        b = enumerate_sector(M, sector)
        a = np.zeros(len(b), dtype=complex)
        a[b.position(leg)] = w
        comps.append(Component(b, a))
    return StateVector(comps, complex(alpha), complex(beta), M)
