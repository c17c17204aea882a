"""Permutations of N labels, conjugacy classes, and character tables.

Ships validated integer character tables for S3 (point-group alias C3v) and
S4 (alias O), together with exact-rational projection-operator coefficients.
Everything in this module is integer or ``Fraction`` arithmetic; no floats.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .errors import NumericalIntegrityError

CycleType = tuple[int, ...]


@dataclass(frozen=True)
class Permutation:
    """A permutation of the labels 1..N stored as its image tuple.

    ``images[i-1]`` is the image of label ``i``.  The composition
    convention is fixed once for the whole package: ``compose(p, q)``
    means "apply q first, then p", i.e. ``compose(p, q)(i) == p(q(i))``.
    """

    images: tuple[int, ...]

    def __post_init__(self):
        images = tuple(self.images)
        object.__setattr__(self, "images", images)
        if sorted(images) != list(range(1, len(images) + 1)):
            raise ValueError(f"not a bijection of 1..{len(images)}: {images!r}")

    @property
    def n(self) -> int:
        return len(self.images)

    def __call__(self, label: int) -> int:
        return self.images[label - 1]

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(tuple(range(1, n + 1)))

    def is_identity(self) -> bool:
        return all(img == i + 1 for i, img in enumerate(self.images))

    @classmethod
    def transposition(cls, n: int, i: int, j: int) -> "Permutation":
        images = list(range(1, n + 1))
        images[i - 1], images[j - 1] = j, i
        return cls(tuple(images))

    def cycles(self) -> list[tuple[int, ...]]:
        """Disjoint cycles (fixed points included), each starting at its
        smallest label, listed by ascending smallest label."""
        seen = set()
        out = []
        for start in range(1, self.n + 1):
            if start in seen:
                continue
            cyc = [start]
            seen.add(start)
            cur = self(start)
            while cur != start:
                cyc.append(cur)
                seen.add(cur)
                cur = self(cur)
            out.append(tuple(cyc))
        return out


def compose(p: Permutation, q: Permutation) -> Permutation:
    """Composition "apply q, then p"."""
    if p.n != q.n:
        raise ValueError(f"size mismatch: N={p.n} vs N={q.n}")
    return Permutation(tuple(p(q(i)) for i in range(1, p.n + 1)))


def inverse(p: Permutation) -> Permutation:
    images = [0] * p.n
    for i in range(1, p.n + 1):
        images[p(i) - 1] = i
    return Permutation(tuple(images))


def parity(p: Permutation) -> int:
    """+1 for even permutations, -1 for odd (one transposition is odd)."""
    transpositions = sum(len(c) - 1 for c in p.cycles())
    return -1 if transpositions % 2 else +1


def cycle_type(p: Permutation) -> CycleType:
    """Cycle lengths in weakly decreasing order; a partition of N.

    Two permutations are conjugate in S_N iff their cycle types agree.
    """
    return tuple(sorted((len(c) for c in p.cycles()), reverse=True))


def all_permutations(n: int) -> list[Permutation]:
    """All N! permutations in lexicographic image order (identity first)."""
    return [Permutation(images) for images in itertools.permutations(range(1, n + 1))]


# ---------------------------------------------------------------------------
# conjugacy classes


@dataclass(frozen=True)
class ConjClass:
    cycle_type: CycleType
    size: int
    order: int          # lcm of cycle lengths (period of every member)


def partitions(n: int) -> list[CycleType]:
    """All partitions of n as weakly decreasing tuples."""
    if n == 0:
        return [()]
    out = []

    def rec(remaining: int, cap: int, prefix: tuple[int, ...]):
        if remaining == 0:
            out.append(prefix)
            return
        for part in range(min(cap, remaining), 0, -1):
            rec(remaining - part, part, prefix + (part,))

    rec(n, n, ())
    return out


def class_size(ct: CycleType) -> int:
    """Number of permutations with this cycle type: N! / prod(m_i! * i^m_i)."""
    n = sum(ct)
    denom = 1
    for length in set(ct):
        mult = ct.count(length)
        denom *= math.factorial(mult) * length**mult
    return math.factorial(n) // denom


def element_order(ct: CycleType) -> int:
    return math.lcm(*ct)


def class_representative(ct: CycleType) -> Permutation:
    """Canonical member: cycles filled with consecutive labels, e.g.
    (3, 1) -> the permutation with cycle (1 2 3) and fixed point 4."""
    images = []
    start = 1
    for length in ct:
        block = list(range(start, start + length))
        for idx, label in enumerate(block):
            images.append(block[(idx + 1) % length])
        start += length
    # images currently indexed by label order within blocks, which is 1..N
    return Permutation(tuple(images))


def _class_sort_key(ct: CycleType):
    # Identity first, then classes by ascending number of moved points;
    # among equal moved counts, fewer nontrivial cycles first (so for S4:
    # transpositions, 3-cycles, 4-cycles, double transpositions).
    moved = sum(length for length in ct if length > 1)
    nontrivial = sum(1 for length in ct if length > 1)
    return (moved, nontrivial, tuple(-length for length in ct))


def conjugacy_classes(n: int) -> tuple[ConjClass, ...]:
    """Conjugacy classes of S_N with sizes and element orders.

    Ordering is canonical (documented in :func:`_class_sort_key`); class
    sizes always sum to N!.
    """
    if n < 2:
        raise ValueError(f"conjugacy classes require N >= 2, got {n}")
    cts = sorted(partitions(n), key=_class_sort_key)
    return tuple(ConjClass(ct, class_size(ct), element_order(ct)) for ct in cts)


# ---------------------------------------------------------------------------
# character tables


@dataclass(frozen=True)
class IrrepId:
    label: str
    dimension: int


@dataclass(frozen=True)
class CharacterTable:
    """Integer character table of S_N, classes in canonical order.

    ``class_labels`` carry the point-group alias of each class as display
    metadata; the one-to-one operator correspondence is fixed by matching
    class size and element order, and any consistent assignment yields the
    same multiplicities downstream.
    """

    group_name: str
    n: int
    classes: tuple[ConjClass, ...]
    class_labels: tuple[str, ...]
    irreps: tuple[IrrepId, ...]
    chars: tuple[tuple[int, ...], ...]          # rows = irreps, cols = classes

    def class_index(self, ct: CycleType) -> int:
        for i, c in enumerate(self.classes):
            if c.cycle_type == ct:
                return i
        raise KeyError(f"no class with cycle type {ct}")

    def irrep(self, label: str) -> IrrepId:
        for ir in self.irreps:
            if ir.label == label:
                return ir
        raise KeyError(f"no irrep labelled {label!r}")

    def char(self, irrep: IrrepId | str, ct: CycleType) -> int:
        if isinstance(irrep, str):
            irrep = self.irrep(irrep)
        row = self.irreps.index(irrep)
        return self.chars[row][self.class_index(ct)]

    def to_dict(self) -> dict:
        return {
            "group_name": self.group_name,
            "n": self.n,
            "classes": [
                {
                    "cycle_type": list(c.cycle_type),
                    "size": c.size,
                    "order": c.order,
                    "label": lbl,
                }
                for c, lbl in zip(self.classes, self.class_labels)
            ],
            "irreps": [{"label": ir.label, "dimension": ir.dimension} for ir in self.irreps],
            "characters": {
                ir.label: list(row) for ir, row in zip(self.irreps, self.chars)
            },
        }


# Literal tables, classes in canonical order (see conjugacy_classes).
# S3 classes: identity, 3 transpositions, 2 three-cycles.  Operator-level
# correspondence with C3v (images tuples, "apply" convention of
# Permutation): sigma_v1 = (1,3,2), sigma_v2 = (3,2,1), sigma_v3 = (2,1,3);
# C3 = (3,1,2), C3^2 = (2,3,1).  Any consistent assignment yields the same
# class data and multiplicities.
_S3_TABLE = dict(
    group_name="S3/C3v",
    n=3,
    class_labels=("E", "3sigma_v", "2C3"),
    irreps=(IrrepId("A1", 1), IrrepId("A2", 1), IrrepId("E", 2)),
    chars=(
        (1, 1, 1),
        (1, -1, 1),
        (2, 0, -1),
    ),
)

# S4 classes: identity, 6 transpositions, 8 three-cycles, 6 four-cycles,
# 3 double transpositions.  The coordinate triple (the three degenerate
# normal modes) transforms as T2, which fixes which 3-dim row gets which
# label: chi_T2 = +1 on transpositions.
_S4_TABLE = dict(
    group_name="S4/O",
    n=4,
    class_labels=("E", "6C2", "8C3", "6C4", "3C2"),
    irreps=(
        IrrepId("A1", 1),
        IrrepId("A2", 1),
        IrrepId("E", 2),
        IrrepId("T1", 3),
        IrrepId("T2", 3),
    ),
    chars=(
        (1, 1, 1, 1, 1),
        (1, -1, 1, -1, 1),
        (2, 0, -1, 0, 2),
        (3, -1, 0, 1, -1),
        (3, 1, 0, -1, -1),
    ),
)

_TABLES = {3: _S3_TABLE, 4: _S4_TABLE}


def character_table(n: int) -> CharacterTable:
    """The shipped character table for S3 or S4, validated at load."""
    if n not in _TABLES:
        raise ValueError(f"no character table shipped for N={n} (supported: 3, 4)")
    data = _TABLES[n]
    table = CharacterTable(classes=conjugacy_classes(n), **data)
    violation = validate_table(table)
    if violation is not None:
        raise NumericalIntegrityError(f"shipped table for N={n} invalid: {violation}")
    return table


def validate_table(table: CharacterTable) -> Optional[str]:
    """Check the order sum rule and both orthogonality relations exactly.

    Returns None if the table is consistent, otherwise a description of the
    first violated relation (with the indices involved).
    """
    order = math.factorial(table.n)
    sizes = [c.size for c in table.classes]
    if sum(sizes) != order:
        return f"class sizes sum to {sum(sizes)}, expected {order}"
    dim_sum = sum(ir.dimension**2 for ir in table.irreps)
    if dim_sum != order:
        return f"sum of squared dimensions is {dim_sum}, expected {order}"
    for row, ir in zip(table.chars, table.irreps):
        if row[0] != ir.dimension:
            return f"irrep {ir.label}: character on identity != dimension"
    nir = len(table.irreps)
    for i in range(nir):
        for j in range(i, nir):
            acc = sum(
                s * a * b for s, a, b in zip(sizes, table.chars[i], table.chars[j])
            )
            want = order if i == j else 0
            if acc != want:
                return (
                    f"row orthogonality violated for irreps "
                    f"({table.irreps[i].label}, {table.irreps[j].label}): "
                    f"{acc} != {want}"
                )
    ncl = len(table.classes)
    for a in range(ncl):
        for b in range(a, ncl):
            acc = sum(row[a] * row[b] for row in table.chars)
            want = order // sizes[a] if a == b else 0
            if acc != want:
                return (
                    f"column orthogonality violated for classes ({a}, {b}): "
                    f"{acc} != {want}"
                )
    return None


def projector_coefficients(
    table: CharacterTable, irrep: IrrepId | str
) -> dict[Permutation, Fraction]:
    """Coefficients of the character projector P_Gamma.

    The coefficient of group element g is dim(Gamma)/N! * chi_Gamma(class
    of g); for multidimensional irreps this is the dimension-weighted
    character projector, the same convention as the printed P_E.
    """
    if isinstance(irrep, str):
        irrep = table.irrep(irrep)
    if irrep not in table.irreps:
        raise ValueError(f"irrep {irrep} does not belong to {table.group_name}")
    order = math.factorial(table.n)
    out = {}
    for p in all_permutations(table.n):
        chi = table.char(irrep, cycle_type(p))
        out[p] = Fraction(irrep.dimension * chi, order)
    return out


def sign_irrep(table: CharacterTable) -> IrrepId:
    """The one-dimensional irrep whose character is the permutation parity.

    Totally antisymmetric functions transform as it; the antisymmetrizer is
    (up to normalization) its projector.  A2 for both shipped tables.
    """
    for ir, row in zip(table.irreps, table.chars):
        if ir.dimension != 1:
            continue
        if all(
            chi == parity(class_representative(c.cycle_type))
            for chi, c in zip(row, table.classes)
        ):
            return ir
    raise NumericalIntegrityError(
        f"{table.group_name}: no irrep matches the parity character"
    )
