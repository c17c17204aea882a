"""Spin space of N electrons and the Pauli-allowed spatial symmetry species.

Two independent routes decide which spatial irreps survive total
antisymmetrization:

* the character route: decompose each total-spin eigenspace of the
  2^N-dimensional spin space into irreps, then ask for which spin species
  the product with a given spatial irrep contains the sign irrep;
* the constructive route: project a level eigenfunction onto an irrep,
  multiply by a concrete spin product, antisymmetrize over simultaneous
  space-spin label permutations, and check whether anything survives.

The two must agree pair by pair; their agreement is the module's central
cross-validation (a test failure, not a runtime recovery).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

import numpy as np

from .errors import NumericalIntegrityError
from .levelsym import character_projector
from .oscillator import (
    LevelDescriptor,
    OscillatorModel,
    uncoupled_expansion,
)
from .symgroup import (
    CharacterTable,
    IrrepId,
    Permutation,
    all_permutations,
    character_table,
    class_representative,
    parity,
    sign_irrep,
)

_HALF_GUARD = 1e-6
_ZERO_TOL = 1e-8

ALPHA, BETA = "a", "b"

_MULTIPLET_NAMES = {
    1: "singlet",
    2: "doublet",
    3: "triplet",
    4: "quadruplet",
    5: "quintuplet",
    6: "sextet",
    7: "septet",
}


@dataclass(frozen=True)
class SpinProduct:
    """A product of N one-electron spin states, each alpha or beta."""

    labels: tuple[str, ...]

    def __post_init__(self):
        if any(l not in (ALPHA, BETA) for l in self.labels):
            raise ValueError(f"spin labels must be '{ALPHA}'/'{BETA}': {self.labels}")

    @classmethod
    def parse(cls, text: str) -> "SpinProduct":
        return cls(tuple(text))

    @property
    def n(self) -> int:
        return len(self.labels)

    @property
    def ms(self) -> float:
        up = self.labels.count(ALPHA)
        return (up - (self.n - up)) / 2.0


def spin_basis(n: int) -> list[tuple[str, ...]]:
    """All 2^N products in lexicographic order (alpha before beta)."""
    return [tuple(p) for p in itertools.product((ALPHA, BETA), repeat=n)]


def _basis_index(labels: tuple[str, ...]) -> int:
    idx = 0
    for l in labels:
        idx = 2 * idx + (0 if l == ALPHA else 1)
    return idx


def permute_labels(p: Permutation, labels: Sequence) -> tuple:
    """Move the content of slot i to slot p(i): out[p(i)-1] = labels[i-1].

    Matches the action of the permutation operator on product functions.
    """
    out = [None] * len(labels)
    for i, val in enumerate(labels, start=1):
        out[p(i) - 1] = val
    return tuple(out)


def spin_permutation_matrix(n: int, p: Permutation) -> np.ndarray:
    """2^N x 2^N 0/1 matrix permuting the tensor factors of the spin basis."""
    if p.n != n:
        raise ValueError(f"permutation size {p.n} != N {n}")
    dim = 2**n
    mat = np.zeros((dim, dim))
    for labels in spin_basis(n):
        mat[_basis_index(permute_labels(p, labels)), _basis_index(labels)] = 1.0
    return mat


def s_squared_matrix(n: int) -> np.ndarray:
    """Total-spin operator S^2 = Sz^2 + (S+S- + S-S+)/2 on the product basis,
    built from the elementary one-site spin matrices.  Real and symmetric."""
    sz1 = np.array([[0.5, 0.0], [0.0, -0.5]])
    sp1 = np.array([[0.0, 1.0], [0.0, 0.0]])  # |a><b|
    sm1 = sp1.T

    def total(op1: np.ndarray) -> np.ndarray:
        dim = 2**n
        out = np.zeros((dim, dim))
        for site in range(n):
            mat = np.array([[1.0]])
            for k in range(n):
                mat = np.kron(mat, op1 if k == site else np.eye(2))
            out += mat
        return out

    sz, sp, sm = total(sz1), total(sp1), total(sm1)
    return sz @ sz + 0.5 * (sp @ sm + sm @ sp)


def _s_from_eigenvalue(value: float) -> float:
    s = 0.5 * (-1.0 + math.sqrt(max(1.0 + 4.0 * value, 0.0)))
    twice = round(2 * s)
    if abs(2 * s - twice) >= _HALF_GUARD:
        raise NumericalIntegrityError(f"S^2 eigenvalue {value} gives non-half-integer S")
    return twice / 2.0


def multiplet_name(s: float) -> str:
    mult = round(2 * s) + 1
    return _MULTIPLET_NAMES.get(mult, f"{mult}-fold multiplet")


@dataclass(frozen=True)
class MultipletTable:
    """Count of spin multiplets per total spin S; sum of (2S+1)-weighted
    counts is 2^N."""

    n: int
    counts: Mapping[float, int]

    def dimension(self) -> int:
        return sum(round(2 * s + 1) * c for s, c in self.counts.items())


def _spin_eigenspaces(n: int) -> list[tuple[float, np.ndarray]]:
    """(S, orthonormal eigenbasis columns) per total-spin eigenspace."""
    evals, evecs = np.linalg.eigh(s_squared_matrix(n))
    spaces = []
    i = 0
    while i < len(evals):
        j = i
        while j < len(evals) and abs(evals[j] - evals[i]) < 1e-8:
            j += 1
        s = _s_from_eigenvalue(float(np.mean(evals[i:j])))
        spaces.append((s, evecs[:, i:j]))
        i = j
    return spaces


def multiplet_table(n: int) -> MultipletTable:
    """Multiplet counts from diagonalizing S^2 on the 2^N product space."""
    if n < 1:
        raise ValueError("need at least one spin")
    counts: dict[float, int] = {}
    for s, basis in _spin_eigenspaces(n):
        dim = basis.shape[1]
        block = round(2 * s) + 1
        if dim % block:
            raise NumericalIntegrityError(
                f"S={s} eigenspace dimension {dim} not divisible by 2S+1={block}"
            )
        counts[s] = counts.get(s, 0) + dim // block
    table = MultipletTable(n=n, counts=counts)
    if table.dimension() != 2**n:
        raise NumericalIntegrityError("multiplet dimensions do not sum to 2^N")
    return table


def _decompose_on_subspace(
    n: int, table: CharacterTable, basis: np.ndarray
) -> dict[IrrepId, int]:
    """Irrep content of a permutation-invariant subspace of spin space."""
    order = math.factorial(n)
    traces = {}
    for cls in table.classes:
        rep = class_representative(cls.cycle_type)
        mat = spin_permutation_matrix(n, rep)
        traces[cls.cycle_type] = float(np.trace(basis.T @ mat @ basis))
    out = {}
    for irrep, row in zip(table.irreps, table.chars):
        acc = sum(
            cls.size * chi * traces[cls.cycle_type]
            for cls, chi in zip(table.classes, row)
        )
        m = acc / order
        rounded = round(m)
        if abs(m - rounded) >= _HALF_GUARD:
            raise NumericalIntegrityError(
                f"non-integer spin multiplicity {m} for {irrep.label}"
            )
        out[irrep] = int(rounded)
    return out


def spin_irrep_multiplicities(n: int, table: CharacterTable) -> dict[IrrepId, int]:
    """Decomposition of the full 2^N spin space into irreps."""
    if table.n != n:
        raise ValueError(f"table is for N={table.n}, not N={n}")
    dim = 2**n
    full = np.eye(dim)
    out = _decompose_on_subspace(n, table, full)
    if sum(ir.dimension * m for ir, m in out.items()) != dim:
        raise NumericalIntegrityError("spin decomposition does not sum to 2^N")
    return out


def spin_content_by_s(n: int, table: CharacterTable) -> dict[float, dict[IrrepId, int]]:
    """Irrep content of each total-spin eigenspace of the spin space."""
    return {
        s: _decompose_on_subspace(n, table, basis)
        for s, basis in _spin_eigenspaces(n)
    }


@dataclass(frozen=True)
class AllowedIrrepMap:
    """For each spatial irrep, the total spins S it can combine with to form
    a totally antisymmetric space-spin function; empty means forbidden."""

    n: int
    spins: Mapping[str, tuple[float, ...]]

    def allowed(self, label: str) -> bool:
        return bool(self.spins[label])

    def forbidden_labels(self) -> set[str]:
        return {label for label, s in self.spins.items() if not s}

    def to_dict(self) -> dict:
        return {
            label: {
                "allowed": bool(spins),
                "spins": list(spins),
                "multiplets": [multiplet_name(s) for s in spins],
            }
            for label, spins in self.spins.items()
        }


def allowed_spatial_irreps(n: int) -> AllowedIrrepMap:
    """Character route: spatial Gamma is allowed with spin S iff the sign
    irrep occurs in Gamma (x) (irrep content of the S eigenspace)."""
    table = character_table(n)
    sign = sign_irrep(table)
    order = math.factorial(n)
    content = spin_content_by_s(n, table)
    spins: dict[str, tuple[float, ...]] = {}
    for spatial, srow in zip(table.irreps, table.chars):
        found = []
        for s in sorted(content):
            total = 0
            for spin_ir, mult in content[s].items():
                if not mult:
                    continue
                spin_row = table.chars[table.irreps.index(spin_ir)]
                sign_row = table.chars[table.irreps.index(sign)]
                acc = sum(
                    cls.size * a * b * c
                    for cls, a, b, c in zip(table.classes, srow, spin_row, sign_row)
                )
                m, rem = divmod(acc, order)
                if rem:
                    raise NumericalIntegrityError(
                        f"non-integer sign-irrep multiplicity in "
                        f"{spatial.label} x {spin_ir.label}"
                    )
                total += mult * m
            if total:
                found.append(s)
        spins[spatial.label] = tuple(found)
    return AllowedIrrepMap(n=n, spins=spins)


# ---------------------------------------------------------------------------
# constructive route: antisymmetrized space-spin functions


@dataclass(frozen=True)
class SpaceSpinFunction:
    """Result of antisymmetrizing (projected eigenfunction) x (spin product).

    ``determinants`` expands the survivor over normalized determinants of
    one-particle space x spin functions, keyed by the canonically sorted
    tuple of (orbital, twice-ms) pairs.  A zero result is a valid answer.
    """

    nonzero: bool
    norm: float
    s_value: Optional[float]
    determinants: Mapping[tuple[tuple[int, int], ...], float]


def antisymmetrize_space_spin(
    model: OscillatorModel,
    level: LevelDescriptor,
    table: CharacterTable,
    irrep: IrrepId | str,
    spin_product: SpinProduct | str,
    seed_index: Optional[int] = None,
) -> SpaceSpinFunction:
    """Antisymmetrize the product of an irrep-projected level eigenfunction
    with a concrete spin product, over simultaneous space-spin relabeling.

    The projected eigenfunction is realized as a finite combination of
    products of one-particle oscillator orbitals (valid for symmetry
    purposes at any coupling, see :func:`uncoupled_expansion`), the spin
    product is attached, and the simultaneous space-spin antisymmetrizer is
    applied.  Survivors are returned as Slater-determinant expansions with
    their measured total spin.

    ``seed_index`` selects which level basis function to project; by
    default the first one with a surviving projection is used.  A zero
    result with an explicit seed only shows that combination dies;
    forbiddenness needs exhaustion (:func:`constructive_allowed_spins`).
    """
    if isinstance(spin_product, str):
        spin_product = SpinProduct.parse(spin_product)
    n = model.n_particles
    if spin_product.n != n:
        raise ValueError(f"spin product has {spin_product.n} labels, model N={n}")

    proj = character_projector(model, level, table, irrep)
    if seed_index is None:
        norms = np.linalg.norm(proj, axis=0)
        candidates = np.nonzero(norms > _ZERO_TOL)[0]
        if len(candidates) == 0:
            return SpaceSpinFunction(False, 0.0, None, {})
        seed_index = int(candidates[0])
    elif not (0 <= seed_index < level.degeneracy):
        raise ValueError(f"seed index {seed_index} out of range")
    spatial = proj[:, seed_index]
    if np.linalg.norm(spatial) < _ZERO_TOL:
        return SpaceSpinFunction(False, 0.0, None, {})
    spatial = spatial / np.linalg.norm(spatial)

    orb_patterns, expansion = uncoupled_expansion(n, level.n_sym, level.n_last)
    xvec = spatial @ expansion  # coefficients over orbital patterns

    # product-space coefficients over (orbital pattern, spin labels)
    work: dict[tuple[tuple[int, ...], tuple[str, ...]], float] = {}
    for j, pat in enumerate(orb_patterns):
        if abs(xvec[j]) > 1e-14:
            work[(pat, spin_product.labels)] = float(xvec[j])

    out: dict[tuple[tuple[int, ...], tuple[str, ...]], float] = {}
    nfact = math.factorial(n)
    for p in all_permutations(n):
        sgn = parity(p)
        for (pat, labels), coeff in work.items():
            key = (permute_labels(p, pat), permute_labels(p, labels))
            out[key] = out.get(key, 0.0) + sgn * coeff / nfact

    norm = math.sqrt(sum(c * c for c in out.values()))
    if norm <= _ZERO_TOL:
        return SpaceSpinFunction(False, norm, None, {})

    # collect determinant expansion: spin-orbitals (orbital, 2*ms)
    dets: dict[tuple[tuple[int, int], ...], float] = {}
    for (pat, labels), coeff in out.items():
        if abs(coeff) < 1e-12:
            continue
        sos = [(o, 1 if l == ALPHA else -1) for o, l in zip(pat, labels)]
        if len(set(sos)) != n:
            raise NumericalIntegrityError(
                "antisymmetric function has weight on a Pauli-violating product"
            )
        ordered = tuple(sorted(sos))
        if ordered == tuple(sos):  # keep one representative per orbit
            dets[ordered] = coeff * math.sqrt(nfact)

    s_value = _measure_spin(n, out)
    return SpaceSpinFunction(True, norm, s_value, dets)


def _measure_spin(n: int, coeffs: Mapping) -> float:
    """<S^2> of a product-space vector, spin factor only."""
    s2 = s_squared_matrix(n)
    basis = spin_basis(n)
    bidx = {labels: i for i, labels in enumerate(basis)}
    # group coefficients by orbital pattern
    grouped: dict[tuple[int, ...], np.ndarray] = {}
    for (pat, labels), c in coeffs.items():
        vec = grouped.setdefault(pat, np.zeros(2**n))
        vec[bidx[labels]] += c
    num = 0.0
    den = 0.0
    for vec in grouped.values():
        num += vec @ s2 @ vec
        den += vec @ vec
    return _s_from_eigenvalue(num / den)


def constructive_allowed_spins(
    model: OscillatorModel,
    level: LevelDescriptor,
    table: CharacterTable,
    irrep: IrrepId | str,
) -> set[float]:
    """Exhaust all spin products and all seed functions of a level; return
    the set of total spins of the surviving antisymmetrized functions.

    An empty set proves the irrep forbidden at this level: a single zero
    does not, but exhaustion over the finite space does.
    """
    spins: set[float] = set()
    for labels in spin_basis(model.n_particles):
        for seed in range(level.degeneracy):
            res = antisymmetrize_space_spin(
                model, level, table, irrep, SpinProduct(labels), seed_index=seed
            )
            if res.nonzero:
                spins.add(res.s_value)
    return spins


def first_level_with_irrep(
    model: OscillatorModel,
    table: CharacterTable,
    irrep: IrrepId | str,
    max_n_sym: int = 8,
) -> LevelDescriptor:
    """Lowest level (by n_sym, at n_last = 0) containing the irrep."""
    from .levelsym import irrep_multiplicities, level_characters
    from .oscillator import make_level

    if isinstance(irrep, str):
        irrep = table.irrep(irrep)
    for n_sym in range(max_n_sym + 1):
        level = make_level(model, n_sym, 0)
        mults = irrep_multiplicities(level_characters(model, level), table)
        if mults[irrep]:
            return level
    raise ValueError(f"irrep {irrep.label} not found up to n_sym={max_n_sym}")
