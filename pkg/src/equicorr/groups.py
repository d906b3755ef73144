"""Finite groups and their actions on finite base sets.

Groups are explicit Cayley tables over dense 0-based element indices;
actions are explicit (group x base) tables.  Everything downstream indexes
into these tables, so element order is part of a group's identity: two
groups with the same multiplication but different element order are
different objects here.

Axioms are checked numerically, not assumed: validate_group and
validate_action scan the tables (exhaustively at desk scale, sampled above
a budget) and report every violated axiom with an offending tuple.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import StructuralError
from .reporting import Check, ValidationReport
from .rng import SplitMix64

# exhaustive scan budgets; larger tables fall back to seeded sampling
_ASSOC_EXHAUSTIVE_MAX = 64  # |G|^3 <= 262144 triples
_ACTION_EXHAUSTIVE_BUDGET = 1_000_000  # |G|^2 * |B|
_SAMPLE_COUNT = 200_000
_SCAN_SEED = 0x5EED0001  # fixed seed for sampled axiom scans


@dataclass(eq=False)
class FiniteGroup:
    """Explicit finite group: labels, Cayley table, inverses, identity index."""

    elements: tuple[str, ...]
    cayley: np.ndarray  # (n, n) int, cayley[g, h] = g*h
    inv: np.ndarray  # (n,) int
    identity: int

    def __post_init__(self):
        n = len(self.elements)
        self.cayley = np.ascontiguousarray(np.asarray(self.cayley, dtype=np.int64))
        self.inv = np.ascontiguousarray(np.asarray(self.inv, dtype=np.int64))
        if n == 0:
            raise StructuralError("group must have at least one element")
        if self.cayley.shape != (n, n):
            raise StructuralError(f"cayley table shape {self.cayley.shape}, expected {(n, n)}")
        if self.inv.shape != (n,):
            raise StructuralError(f"inverse table shape {self.inv.shape}, expected {(n,)}")
        if self.cayley.min() < 0 or self.cayley.max() >= n:
            raise StructuralError("cayley table entry out of range")
        if self.inv.min() < 0 or self.inv.max() >= n:
            raise StructuralError("inverse table entry out of range")
        if not (0 <= self.identity < n):
            raise StructuralError("identity index out of range")

    @property
    def order(self) -> int:
        return len(self.elements)

    def mul(self, g: int, h: int) -> int:
        return int(self.cayley[g, h])

    def inverse(self, g: int) -> int:
        return int(self.inv[g])

    def conjugate(self, g: int, h: int) -> int:
        """g h g^-1."""
        return int(self.cayley[self.cayley[g, h], self.inv[g]])

    def conjugation_row(self, g: int) -> np.ndarray:
        """Array c with c[h] = g h g^-1."""
        return self.cayley[self.cayley[g], self.inv[g]]


@dataclass(eq=False)
class GroupAction:
    """Left action of a FiniteGroup on a finite base set, as a lookup table."""

    group: FiniteGroup
    base: tuple[str, ...]
    table: np.ndarray  # (|G|, |B|) int, table[g, b] = g.b

    def __post_init__(self):
        n, m = self.group.order, len(self.base)
        self.table = np.ascontiguousarray(np.asarray(self.table, dtype=np.int64))
        if m == 0:
            raise StructuralError("base set must be nonempty")
        if self.table.shape != (n, m):
            raise StructuralError(f"action table shape {self.table.shape}, expected {(n, m)}")
        if self.table.min() < 0 or self.table.max() >= m:
            raise StructuralError("action table entry out of range")

    @property
    def base_size(self) -> int:
        return len(self.base)

    def act(self, g: int, b: int) -> int:
        n, m = self.group.order, self.base_size
        if not (0 <= g < n):
            raise StructuralError(f"group index {g} out of range for order {n}")
        if not (0 <= b < m):
            raise StructuralError(f"base index {b} out of range for size {m}")
        return int(self.table[g, b])


@dataclass(frozen=True)
class Orbit:
    base_point: int
    members: tuple[int, ...]  # ascending


@dataclass(frozen=True)
class CosetSection:
    """For an anchor b, one representative k_c per orbit member c with k_c.b = c.

    The default section takes the smallest element index; rep order is
    parallel to the ascending member list, so sections are deterministic.
    """

    anchor: int
    members: tuple[int, ...]
    reps: tuple[int, ...]

    def rep_for(self, c: int) -> int:
        i = np.searchsorted(self.members, c)
        if i >= len(self.members) or self.members[i] != c:
            raise StructuralError(f"base point {c} not in orbit of anchor {self.anchor}")
        return self.reps[i]


# ---------------------------------------------------------------------------
# constructors


def cyclic_group(n: int) -> FiniteGroup:
    if n < 1:
        raise StructuralError("cyclic group needs n >= 1")
    idx = np.arange(n)
    cayley = (idx[:, None] + idx[None, :]) % n
    inv = (-idx) % n
    labels = tuple(f"r{i}" for i in range(n))
    return FiniteGroup(labels, cayley, inv, 0)


def dihedral_group(n: int) -> FiniteGroup:
    """Dihedral group of order 2n: rotations r0..r{n-1}, reflections s0..s{n-1}.

    Encoding: index i < n is the rotation v -> v+i, index n+i is the
    reflection v -> i-v (all mod n).
    """
    if n < 1:
        raise StructuralError("dihedral group needs n >= 1")
    order = 2 * n
    cayley = np.zeros((order, order), dtype=np.int64)
    for a in range(order):
        ai, aref = a % n, a >= n
        for b in range(order):
            bi, bref = b % n, b >= n
            # compose as functions: (a*b).v = a.(b.v)
            if not aref and not bref:
                cayley[a, b] = (ai + bi) % n
            elif not aref and bref:
                cayley[a, b] = n + (ai + bi) % n
            elif aref and not bref:
                cayley[a, b] = n + (ai - bi) % n
            else:
                cayley[a, b] = (ai - bi) % n
    inv = np.zeros(order, dtype=np.int64)
    inv[:n] = (-np.arange(n)) % n
    inv[n:] = np.arange(n, order)  # reflections are involutions
    labels = tuple(f"r{i}" for i in range(n)) + tuple(f"s{i}" for i in range(n))
    return FiniteGroup(labels, cayley, inv, 0)


def direct_product(a: FiniteGroup, b: FiniteGroup) -> FiniteGroup:
    """Direct product with the first factor cycling fastest: index = j*|A| + i."""
    na, nb = a.order, b.order
    ia = np.tile(np.arange(na), nb)
    ib = np.repeat(np.arange(nb), na)

    def pack(x: np.ndarray, y: np.ndarray) -> np.ndarray:
        return y * na + x

    ga, gb = ia[:, None], ib[:, None]
    ha, hb = ia[None, :], ib[None, :]
    cayley = pack(a.cayley[ga, ha], b.cayley[gb, hb])
    inv = pack(a.inv[ia], b.inv[ib])
    labels = tuple(f"({a.elements[i]},{b.elements[j]})" for j in range(nb) for i in range(na))
    return FiniteGroup(labels, cayley, inv, pack(np.array(a.identity), np.array(b.identity)).item())


def group_from_tables(elements: list[str], cayley: np.ndarray, identity: int | None = None) -> FiniteGroup:
    """Build a group from labels and a Cayley table, deriving inverses.

    The identity is located by its row behaviour when not given.  Raises
    StructuralError when no identity or some inverse exists; deeper axiom
    violations are left to validate_group.
    """
    cayley = np.asarray(cayley, dtype=np.int64)
    n = len(elements)
    if identity is None:
        hits = [e for e in range(n) if np.array_equal(cayley[e], np.arange(n))]
        if not hits:
            raise StructuralError("no identity row in cayley table")
        identity = hits[0]
    inv = np.full(n, -1, dtype=np.int64)
    for g in range(n):
        right = np.flatnonzero(cayley[g] == identity)
        if right.size == 0:
            raise StructuralError(f"element {g} has no right inverse")
        inv[g] = right[0]
    return FiniteGroup(tuple(elements), cayley, inv, int(identity))


# ---------------------------------------------------------------------------
# validation


def _sample_triples(rng: SplitMix64, count: int, bounds: tuple[int, int, int]) -> np.ndarray:
    out = np.empty((count, 3), dtype=np.int64)
    for i in range(count):
        out[i, 0] = rng.integer(bounds[0])
        out[i, 1] = rng.integer(bounds[1])
        out[i, 2] = rng.integer(bounds[2])
    return out


def validate_group(group: FiniteGroup, tolerance: float = 0.0) -> ValidationReport:
    """Scan the group axioms.  Residuals count violations; witnesses name
    the first offending tuple in scan order."""
    n = group.order
    cay, inv, e = group.cayley, group.inv, group.identity
    report = ValidationReport()

    def count_check(name: str, bad_mask: np.ndarray, coords) -> None:
        count = int(bad_mask.sum())
        witness = None
        if count:
            flat = int(np.flatnonzero(bad_mask.ravel())[0])
            witness = tuple(int(c) for c in np.unravel_index(flat, bad_mask.shape)) if bad_mask.ndim else ()
            witness = coords(witness)
        report.add(Check(f"group-{name}", float(count), tolerance, count == 0, witness))

    idn = np.arange(n)
    count_check("identity-left", cay[e] != idn, lambda w: (e, int(w[0])))
    count_check("identity-right", cay[:, e] != idn, lambda w: (int(w[0]), e))
    count_check("inverse-left", cay[inv, idn] != e, lambda w: (int(inv[w[0]]), int(w[0])))
    count_check("inverse-right", cay[idn, inv] != e, lambda w: (int(w[0]), int(inv[w[0]])))

    if n <= _ASSOC_EXHAUSTIVE_MAX:
        lhs = cay[cay]  # lhs[g, h, k] = (g h) k
        rhs = cay[:, cay].reshape(n, n, n)  # rhs[g, h, k] = g (h k)
        count_check("associativity", lhs != rhs, lambda w: w)
    else:
        rng = SplitMix64(_SCAN_SEED)
        triples = _sample_triples(rng, _SAMPLE_COUNT, (n, n, n))
        g, h, k = triples.T
        bad = cay[cay[g, h], k] != cay[g, cay[h, k]]
        count = int(bad.sum())
        witness = None
        if count:
            i = int(np.flatnonzero(bad)[0])
            witness = (int(g[i]), int(h[i]), int(k[i]))
        report.add(Check("group-associativity(sampled)", float(count), tolerance, count == 0, witness))
    return report


def validate_action(action: GroupAction, tolerance: float = 0.0) -> ValidationReport:
    """Scan the action axioms: identity row and (g h).b = g.(h.b)."""
    grp, table = action.group, action.table
    n, m = grp.order, action.base_size
    report = ValidationReport()

    bad_id = table[grp.identity] != np.arange(m)
    count = int(bad_id.sum())
    witness = (grp.identity, int(np.flatnonzero(bad_id)[0])) if count else None
    report.add(Check("action-identity", float(count), tolerance, count == 0, witness))

    if n * n * m <= _ACTION_EXHAUSTIVE_BUDGET:
        lhs = table[grp.cayley]  # (g, h, b) -> (g h).b
        rhs = table[np.arange(n)[:, None, None], table[None, :, :]]  # g.(h.b)
        bad = lhs != rhs
        count = int(bad.sum())
        witness = None
        if count:
            flat = int(np.flatnonzero(bad.ravel())[0])
            witness = tuple(int(c) for c in np.unravel_index(flat, bad.shape))
        report.add(Check("action-compatibility", float(count), tolerance, count == 0, witness))
    else:
        rng = SplitMix64(_SCAN_SEED + 1)
        triples = _sample_triples(rng, _SAMPLE_COUNT, (n, n, m))
        g, h, b = triples.T
        bad = table[grp.cayley[g, h], b] != table[g, table[h, b]]
        count = int(bad.sum())
        witness = None
        if count:
            i = int(np.flatnonzero(bad)[0])
            witness = (int(g[i]), int(h[i]), int(b[i]))
        report.add(Check("action-compatibility(sampled)", float(count), tolerance, count == 0, witness))
    return report


# ---------------------------------------------------------------------------
# orbits, stabilizers, coset sections


def orbit(action: GroupAction, b: int) -> Orbit:
    members = np.unique(action.table[:, b])
    return Orbit(b, tuple(int(c) for c in members))


def orbits(action: GroupAction) -> list[Orbit]:
    """All orbits, ordered by smallest member; each listed once."""
    seen = np.zeros(action.base_size, dtype=bool)
    out = []
    for b in range(action.base_size):
        if not seen[b]:
            o = orbit(action, b)
            seen[list(o.members)] = True
            out.append(Orbit(b, o.members))
    return out


def fundamental_domain(action: GroupAction) -> list[int]:
    """Smallest base index of each orbit, ascending."""
    return [o.base_point for o in orbits(action)]


def stabilizer(action: GroupAction, b: int) -> np.ndarray:
    """Element indices g with g.b = b, ascending."""
    return np.flatnonzero(action.table[:, b] == b)


def stabilizer_mask(action: GroupAction) -> np.ndarray:
    """Boolean (|B|, |G|) mask: mask[b, g] iff g.b = b."""
    return (action.table == np.arange(action.base_size)[None, :]).T


def coset_section(action: GroupAction, b: int) -> CosetSection:
    """Deterministic section of k -> k.b over the orbit of b: smallest index wins."""
    col = action.table[:, b]
    members, first = np.unique(col, return_index=True)
    return CosetSection(b, tuple(int(c) for c in members), tuple(int(k) for k in first))


def pair_stabilizer(action: GroupAction, c: int, b: int) -> np.ndarray:
    """Elements fixing both c and b under the diagonal action."""
    table = action.table
    return np.flatnonzero((table[:, b] == b) & (table[:, c] == c))
