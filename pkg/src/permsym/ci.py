"""Configuration interaction over Slater determinants of oscillator orbitals.

The one-particle basis is the first M eigenfunctions of the uncoupled
unit-frequency oscillator, which makes the one-body part diagonal and
reduces every two-body integral to a product of tridiagonal position matrix
elements.  The full determinant space (all C(2M, N) selections, optionally
filtered to one M_s sector) is diagonalized densely; total spin is measured
on each eigenvector, never imposed on the basis.  Comparing the resulting
spectrum against the exact levels exposes the missing ones.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence, Union

import numpy as np

from .errors import BasisTooSmallError, DimensionCapError, NumericalIntegrityError
from .oscillator import LevelDescriptor, OscillatorModel
from .spin import AllowedIrrepMap, _s_from_eigenvalue

_S2_GUARD = 1e-6
_PARITY_COMPONENT_TOL = 1e-8

#: brute-force product-basis caps: M^N stays diagonalizable densely
_ORACLE_CAPS = {3: 8, 4: 6}


@dataclass(frozen=True, order=True)
class SpinOrbital:
    """One-particle basis function: oscillator orbital x spin projection.

    ``ms2`` is twice the spin projection (+1 for alpha, -1 for beta).  The
    flat index interleaves spins: index = 2 * orbital + (0 if alpha else 1),
    which realizes the canonical "by orbital, then spin" order.
    """

    orbital: int
    ms2: int

    @property
    def index(self) -> int:
        return 2 * self.orbital + (0 if self.ms2 > 0 else 1)

    @classmethod
    def from_index(cls, index: int) -> "SpinOrbital":
        return cls(orbital=index // 2, ms2=+1 if index % 2 == 0 else -1)


def _orb(index: int) -> int:
    return index // 2


def _spin_bit(index: int) -> int:
    return index % 2


@dataclass(frozen=True)
class SlaterDeterminant:
    """Occupied spin-orbital indices, strictly increasing (Pauli + canonical
    sign convention)."""

    occupied: tuple[int, ...]

    def __post_init__(self):
        occ = tuple(self.occupied)
        object.__setattr__(self, "occupied", occ)
        if any(a >= b for a, b in zip(occ, occ[1:])):
            raise ValueError(f"occupied indices must strictly increase: {occ}")
        if any(i < 0 for i in occ):
            raise ValueError(f"negative spin-orbital index in {occ}")

    @property
    def n(self) -> int:
        return len(self.occupied)

    @property
    def ms(self) -> float:
        return sum(0.5 if _spin_bit(i) == 0 else -0.5 for i in self.occupied)

    @property
    def orbital_quanta(self) -> int:
        return sum(_orb(i) for i in self.occupied)

    def spin_orbitals(self) -> tuple[SpinOrbital, ...]:
        return tuple(SpinOrbital.from_index(i) for i in self.occupied)


def canonicalize(indices: Sequence[int]) -> tuple[SlaterDeterminant, int]:
    """Sort spin-orbital indices, returning the determinant and the parity
    of the sorting permutation; swapping two inputs flips the sign."""
    indices = list(indices)
    if len(set(indices)) != len(indices):
        raise ValueError(f"repeated spin-orbital in {indices}")
    sign = 1
    # insertion sort, counting transpositions
    for i in range(1, len(indices)):
        j = i
        while j > 0 and indices[j - 1] > indices[j]:
            indices[j - 1], indices[j] = indices[j], indices[j - 1]
            sign = -sign
            j -= 1
    return SlaterDeterminant(tuple(indices)), sign


def x_matrix_element(a: int, b: int) -> float:
    """<phi_a | x | phi_b> for unit-frequency oscillator orbitals:
    sqrt(max(a, b)/2) when |a - b| = 1, else 0."""
    if a < 0 or b < 0:
        raise ValueError("orbital indices must be >= 0")
    if abs(a - b) != 1:
        return 0.0
    return math.sqrt(max(a, b) / 2.0)


def core_energy(a: int) -> float:
    """One-body energy of orbital a: a + 1/2 (diagonal in this basis)."""
    if a < 0:
        raise ValueError("orbital index must be >= 0")
    return a + 0.5


MsFilter = Union[str, float, None]


def _ms_matches(det_ms: float, ms: MsFilter) -> bool:
    if ms is None or ms == "all":
        return True
    return abs(det_ms - float(ms)) < 1e-12


def build_basis(
    n_particles: int, n_orbitals: int, ms: MsFilter = "all"
) -> list[SlaterDeterminant]:
    """All C(2M, N) determinants over 2M spin-orbitals, optionally filtered
    to a fixed M_s, in deterministic lexicographic order."""
    if 2 * n_orbitals < n_particles:
        raise BasisTooSmallError(
            f"{2 * n_orbitals} spin-orbitals cannot hold {n_particles} particles"
        )
    out = []
    for occ in itertools.combinations(range(2 * n_orbitals), n_particles):
        det = SlaterDeterminant(occ)
        if _ms_matches(det.ms, ms):
            out.append(det)
    return out


def _pair_interaction(a: int, b: int, c: int, d: int, xi: float) -> float:
    """<ab|v|cd> for v = xi * x_1 x_2, spin-orthogonality included."""
    if _spin_bit(a) != _spin_bit(c) or _spin_bit(b) != _spin_bit(d):
        return 0.0
    return xi * x_matrix_element(_orb(a), _orb(c)) * x_matrix_element(_orb(b), _orb(d))


def _antisymmetrized(a: int, b: int, c: int, d: int, xi: float) -> float:
    return _pair_interaction(a, b, c, d, xi) - _pair_interaction(a, b, d, c, xi)


def hamiltonian_element(
    d1: SlaterDeterminant, d2: SlaterDeterminant, model: OscillatorModel
) -> float:
    """Slater-Condon matrix element of the coupled-oscillator Hamiltonian.

    Cases: identical determinants, single excitation, double excitation;
    anything differing in more than two spin-orbitals vanishes.
    """
    if d1.n != d2.n:
        raise ValueError(f"determinant sizes differ: {d1.n} vs {d2.n}")
    if d1.n != model.n_particles:
        raise ValueError(
            f"determinants have {d1.n} particles, model has {model.n_particles}"
        )
    xi = model.xi
    occ1, occ2 = d1.occupied, d2.occupied
    set1, set2 = set(occ1), set(occ2)
    only1 = sorted(set1 - set2)
    only2 = sorted(set2 - set1)
    if len(only1) > 2:
        return 0.0

    if not only1:
        val = sum(core_energy(_orb(i)) for i in occ1)
        val += sum(
            _antisymmetrized(p, q, p, q, xi) for p, q in itertools.combinations(occ1, 2)
        )
        return val

    common = set1 & set2
    if len(only1) == 1:
        p, q = only1[0], only2[0]
        sign = (-1) ** (occ1.index(p) + occ2.index(q))
        # one-body term <p|h|q> vanishes off-diagonal in this orbital basis
        val = sum(_antisymmetrized(p, r, q, r, xi) for r in common)
        return sign * val

    p1, p2 = only1
    q1, q2 = only2
    sign = (-1) ** (occ1.index(p1) + occ1.index(p2) + occ2.index(q1) + occ2.index(q2))
    return sign * _antisymmetrized(p1, p2, q1, q2, xi)


def hamiltonian_matrix(
    model: OscillatorModel, basis: Sequence[SlaterDeterminant]
) -> np.ndarray:
    """Dense symmetric CI matrix; assembly order never affects the entries."""
    dim = len(basis)
    masks = [sum(1 << i for i in det.occupied) for det in basis]
    h = np.zeros((dim, dim))
    for i in range(dim):
        for j in range(i, dim):
            if (masks[i] ^ masks[j]).bit_count() > 4:
                continue
            val = hamiltonian_element(basis[i], basis[j], model)
            h[i, j] = val
            h[j, i] = val
    return h


def _apply_flip(det: tuple[int, ...], create: int, destroy: int):
    """a†_create a_destroy on an index-sorted determinant; None if it dies."""
    if destroy not in det:
        return None
    pos = det.index(destroy)
    phase = -1 if pos % 2 else 1
    rest = det[:pos] + det[pos + 1 :]
    if create in rest:
        return None
    ins = sum(1 for r in rest if r < create)
    if ins % 2:
        phase = -phase
    return phase, rest[:ins] + (create,) + rest[ins:]


def s_squared_matrix(basis: Sequence[SlaterDeterminant]) -> np.ndarray:
    """S^2 = S-S+ + Sz(Sz+1) over the determinant basis."""
    index = {det.occupied: i for i, det in enumerate(basis)}
    dim = len(basis)
    max_orb = max((_orb(i) for det in basis for i in det.occupied), default=0)
    s2 = np.zeros((dim, dim))
    for col, det in enumerate(basis):
        ms = det.ms
        s2[col, col] += ms * (ms + 1.0)
        occ = det.occupied
        for i in range(max_orb + 1):
            up = _apply_flip(occ, 2 * i, 2 * i + 1)  # S+ on orbital i
            if up is None:
                continue
            ph1, mid = up
            for k in range(max_orb + 1):
                down = _apply_flip(mid, 2 * k + 1, 2 * k)  # S- on orbital k
                if down is None:
                    continue
                ph2, fin = down
                row = index.get(fin)
                if row is None:
                    raise ValueError(
                        "S^2 leaves the given basis; use a full M_s sector"
                    )
                s2[row, col] += ph1 * ph2
    return s2


@dataclass(frozen=True)
class CIState:
    energy: float
    s: float
    ms: float
    parity: int


@dataclass(frozen=True)
class CIResult:
    """Eigensolution over the determinant basis, labelled per state."""

    basis: tuple[SlaterDeterminant, ...]
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray          # column j belongs to eigenvalues[j]
    states: tuple[CIState, ...]


def _state_parity(basis: Sequence[SlaterDeterminant], vec: np.ndarray) -> int:
    nonzero = np.abs(vec) > _PARITY_COMPONENT_TOL
    parities = {(-1) ** basis[i].orbital_quanta for i in np.nonzero(nonzero)[0]}
    if len(parities) != 1:
        raise NumericalIntegrityError("eigenvector mixes orbital parities")
    return parities.pop()


def _resolve_degenerate_clusters(
    evals: np.ndarray, evecs: np.ndarray, s2: np.ndarray, dtol: float = 1e-9
) -> None:
    """Rotate each degenerate eigenvalue cluster onto S^2 eigenvectors.

    An exact level can host several total spins at one energy; the raw
    eigensolver is free to mix them, which would leave <S^2> between
    S(S+1) values.  Diagonalizing S^2 inside each cluster restores definite
    spin, fixes the degenerate-block orthonormalization deterministically,
    and leaves the eigenvalues untouched.  Signs are normalized so the
    largest-magnitude component of every vector is positive.
    """
    i = 0
    dim = len(evals)
    while i < dim:
        j = i
        while j < dim and evals[j] - evals[i] <= dtol * max(1.0, abs(evals[i])):
            j += 1
        if j - i > 1:
            block = evecs[:, i:j]
            small = block.T @ s2 @ block
            _, rot = np.linalg.eigh(0.5 * (small + small.T))
            evecs[:, i:j] = block @ rot
        for col in range(i, j):
            lead = np.argmax(np.abs(evecs[:, col]))
            if evecs[lead, col] < 0:
                evecs[:, col] = -evecs[:, col]
        i = j


def ci_solve(model: OscillatorModel, basis: Sequence[SlaterDeterminant]) -> CIResult:
    """Dense symmetric eigensolution with deterministic output.

    The basis is split into M_s blocks (H commutes with S_z), each block is
    diagonalized separately, and states are merged by ascending energy with
    an (energy, M_s, block index) tie-break.  Total spin is measured from
    <S^2> on each eigenvector (degenerate clusters are first rotated onto
    S^2 eigenvectors) and guarded to a half-integer.
    """
    if not basis:
        raise ValueError("empty determinant basis")
    basis = list(basis)
    blocks: dict[float, list[int]] = {}
    for i, det in enumerate(basis):
        blocks.setdefault(det.ms, []).append(i)

    entries = []
    for ms in sorted(blocks):
        idx = blocks[ms]
        sub = [basis[i] for i in idx]
        h = hamiltonian_matrix(model, sub)
        evals, evecs = np.linalg.eigh(h)
        s2 = s_squared_matrix(sub)
        _resolve_degenerate_clusters(evals, evecs, s2)
        for j, e in enumerate(evals):
            vec = evecs[:, j]
            s2v = float(vec @ s2 @ vec)
            s = _s_from_eigenvalue(s2v)
            if abs(s * (s + 1) - s2v) >= _S2_GUARD:
                raise NumericalIntegrityError(
                    f"<S^2> = {s2v} is not S(S+1) for any half-integer S"
                )
            par = _state_parity(sub, vec)
            full = np.zeros(len(basis))
            full[idx] = vec
            entries.append((float(e), ms, j, s, par, full))

    entries.sort(key=lambda t: (t[0], t[1], t[2]))
    eigenvalues = np.array([t[0] for t in entries])
    eigenvectors = np.column_stack([t[5] for t in entries])
    states = tuple(
        CIState(energy=t[0], s=t[3], ms=t[1], parity=t[4]) for t in entries
    )
    return CIResult(
        basis=tuple(basis),
        eigenvalues=eigenvalues,
        eigenvectors=eigenvectors,
        states=states,
    )


# ---------------------------------------------------------------------------
# comparison against the exact spectrum


@dataclass(frozen=True)
class MatchedState:
    ci_energy: float
    exact_energy: float
    quanta_key: tuple[int, int]
    s: float
    parity: int


@dataclass(frozen=True)
class MissingLevel:
    quanta_key: tuple[int, int]
    energy: float
    irrep_mults: Mapping[str, int]


@dataclass(frozen=True)
class ComparisonReport:
    """Outcome of matching CI states against the exact level list.

    ``missing`` holds exact levels below the convergence horizon that no CI
    state matched; on a successful experiment every one of them carries only
    forbidden irrep content and ``spurious`` is empty.
    """

    matched: tuple[MatchedState, ...]
    missing: tuple[MissingLevel, ...]
    spurious: tuple[float, ...]
    horizon: float
    vacuous: bool
    forbidden_irreps: tuple[str, ...]

    @property
    def ok(self) -> bool:
        forbidden = set(self.forbidden_irreps)
        for lv in self.missing:
            content = {lbl for lbl, m in lv.irrep_mults.items() if m}
            if not content <= forbidden:
                return False
        return not self.spurious

    def to_dict(self) -> dict:
        return {
            "matched": [
                {
                    "ci_energy": m.ci_energy,
                    "exact_energy": m.exact_energy,
                    "quanta_key": list(m.quanta_key),
                    "S": m.s,
                    "parity": m.parity,
                }
                for m in self.matched
            ],
            "missing": [
                {
                    "quanta_key": list(lv.quanta_key),
                    "energy": lv.energy,
                    "irrep_mults": dict(lv.irrep_mults),
                }
                for lv in self.missing
            ],
            "spurious": list(self.spurious),
            "horizon": self.horizon,
            "vacuous": self.vacuous,
            "ok": self.ok,
        }


def compare(
    model: OscillatorModel,
    ci_result: CIResult,
    exact_levels: Sequence[LevelDescriptor],
    allowed: AllowedIrrepMap,
    tol: float,
) -> ComparisonReport:
    """Greedy energy matching of CI states to exact levels within tol.

    Every exact level must carry irrep multiplicities.  The convergence
    horizon is the energy of the first allowed level that no CI state
    reproduces within tol (clipped to the top of the enumerated list); only
    CI states below the horizon are classified.  Levels below the horizon
    with no matching CI state are reported missing.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if allowed.n != model.n_particles:
        raise ValueError(
            f"allowed map is for N={allowed.n}, model has N={model.n_particles}"
        )
    vacuous = not math.isfinite(tol)
    for lv in exact_levels:
        if lv.irrep_mults is None:
            raise ValueError(
                f"level {lv.quanta_key} lacks irrep multiplicities; decorate "
                "levels before comparing"
            )
    levels = sorted(exact_levels, key=lambda lv: (lv.energy, lv.quanta_key))
    forbidden = allowed.forbidden_labels()

    def has_allowed_content(lv: LevelDescriptor) -> bool:
        return any(m and lbl not in forbidden for lbl, m in lv.irrep_mults.items())

    evals = ci_result.eigenvalues
    horizon = levels[-1].energy + tol if levels else 0.0
    for lv in levels:
        if not has_allowed_content(lv):
            continue
        if not np.any(np.abs(evals - lv.energy) <= tol):
            horizon = min(horizon, lv.energy)
            break

    allowed_levels = [
        lv for lv in levels if has_allowed_content(lv) and lv.energy < horizon
    ]
    matched: list[MatchedState] = []
    matched_keys: set[tuple[int, int]] = set()
    spurious: list[float] = []
    for j, e in enumerate(evals):
        if e >= horizon:
            break
        best = None
        for lv in allowed_levels:
            gap = abs(e - lv.energy)
            if gap <= tol and (best is None or gap < abs(e - best.energy)):
                best = lv
        if best is None:
            spurious.append(float(e))
            continue
        state = ci_result.states[j]
        matched.append(
            MatchedState(
                ci_energy=float(e),
                exact_energy=best.energy,
                quanta_key=best.quanta_key,
                s=state.s,
                parity=state.parity,
            )
        )
        matched_keys.add(best.quanta_key)

    missing = tuple(
        MissingLevel(lv.quanta_key, lv.energy, dict(lv.irrep_mults))
        for lv in levels
        if lv.energy < horizon and lv.quanta_key not in matched_keys
    )
    return ComparisonReport(
        matched=tuple(matched),
        missing=missing,
        spurious=tuple(spurious),
        horizon=float(horizon),
        vacuous=vacuous,
        forbidden_irreps=tuple(sorted(forbidden)),
    )


# ---------------------------------------------------------------------------
# brute-force oracle


def product_basis_oracle(
    model: OscillatorModel, n_orbitals: int, cluster_tol: float = 1e-7
) -> list[tuple[float, int]]:
    """Dense spectrum of H on the non-antisymmetrized M^N product basis.

    Realizes the full permutation-symmetric spectrum, including the levels
    that antisymmetrized (CI) calculations cannot reach; low-lying
    eigenvalues converge to the closed form.  Returns (energy, degeneracy)
    pairs with eigenvalues clustered within ``cluster_tol``.
    """
    n = model.n_particles
    cap = _ORACLE_CAPS.get(n)
    if cap is None or n_orbitals > cap:
        raise DimensionCapError(
            f"product-basis oracle limited to M <= {cap} for N={n}; "
            f"got M={n_orbitals}"
        )
    h1 = np.diag([core_energy(a) for a in range(n_orbitals)])
    x1 = np.zeros((n_orbitals, n_orbitals))
    for a in range(n_orbitals):
        for b in range(n_orbitals):
            x1[a, b] = x_matrix_element(a, b)
    eye = np.eye(n_orbitals)

    def kron_chain(ops: Iterable[np.ndarray]) -> np.ndarray:
        out = np.array([[1.0]])
        for op in ops:
            out = np.kron(out, op)
        return out

    dim = n_orbitals**n
    h = np.zeros((dim, dim))
    for site in range(n):
        h += kron_chain(h1 if k == site else eye for k in range(n))
    for i, j in itertools.combinations(range(n), 2):
        h += model.xi * kron_chain(
            x1 if k in (i, j) else eye for k in range(n)
        )
    evals = np.linalg.eigvalsh(h)
    out: list[tuple[float, int]] = []
    i = 0
    while i < len(evals):
        j = i
        while j < len(evals) and evals[j] - evals[i] <= cluster_tol:
            j += 1
        out.append((float(np.mean(evals[i:j])), j - i))
        i = j
    return out
