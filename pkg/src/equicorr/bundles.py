"""Equivariant vector bundles over a group action, and their sections.

A bundle assigns each base point b a fiber dimension and each pair (g, b) a
matrix carrying the fiber at b to the fiber at g.b, subject to the cocycle
law

    act_matrix(e, b) = I,
    act_matrix(g h, b) = act_matrix(g, h.b) @ act_matrix(h, b).

Fiber dimension is constant along orbits, so every act matrix is square.
Tables are stored dense and zero-padded to the maximum fiber dimension;
the padding is inert under all products and sums, and validators confirm
it stays exactly zero.

Two section representations coexist.  A plain Section stores one vector
per base point.  A MackeySection stores a vector in the fiber at b for
every pair (h, b), subject to the periodicity law

    m(h, g.b) = act_matrix(g, b) @ m(h g, b),

which is exactly the translation-compatibility a cross-correlation output
satisfies.  The two are interconvertible over any point where the action
is defined, and the conversions are mutually inverse.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import StructuralError
from .groups import GroupAction, orbits
from .reporting import ValidationReport, check_from_residual


def _maxabs(arr: np.ndarray) -> float:
    return float(np.abs(arr).max()) if arr.size else 0.0


def _argmax_coords(arr: np.ndarray) -> tuple[int, ...]:
    flat = int(np.abs(arr).argmax())
    return tuple(int(c) for c in np.unravel_index(flat, arr.shape))


@dataclass(eq=False)
class EquivariantBundle:
    action: GroupAction
    fiber_dim: np.ndarray  # (|B|,) int
    act_matrix: np.ndarray  # (|G|, |B|, dmax, dmax), entry [g, b] maps fiber(b) -> fiber(g.b)

    def __post_init__(self):
        n, m = self.action.group.order, self.action.base_size
        self.fiber_dim = np.asarray(self.fiber_dim, dtype=np.int64)
        self.act_matrix = np.asarray(self.act_matrix, dtype=float)
        if self.fiber_dim.shape != (m,):
            raise StructuralError(f"fiber_dim shape {self.fiber_dim.shape}, expected {(m,)}")
        if self.fiber_dim.min(initial=0) < 0:
            raise StructuralError("fiber dimensions must be nonnegative")
        dmax = self.dmax
        if self.act_matrix.shape != (n, m, dmax, dmax):
            raise StructuralError(
                f"act_matrix shape {self.act_matrix.shape}, expected {(n, m, dmax, dmax)}"
            )

    @property
    def dmax(self) -> int:
        return int(self.fiber_dim.max(initial=0))

    def matrix(self, g: int, b: int) -> np.ndarray:
        """The (fiber_dim(g.b), fiber_dim(b)) block, unpadded."""
        d_out = int(self.fiber_dim[self.action.table[g, b]])
        d_in = int(self.fiber_dim[b])
        return self.act_matrix[g, b, :d_out, :d_in]


def padded_identity(fiber_dim: np.ndarray, dmax: int) -> np.ndarray:
    """(|B|, dmax, dmax) stack: identity on each fiber block, zero padding."""
    out = np.zeros((len(fiber_dim), dmax, dmax))
    for b, d in enumerate(fiber_dim):
        out[b, :d, :d] = np.eye(int(d))
    return out


def pad_mask(fiber_dim: np.ndarray, dmax: int) -> np.ndarray:
    """(|B|, dmax) bool: True on live fiber coordinates."""
    return np.arange(dmax)[None, :] < np.asarray(fiber_dim)[:, None]


def trivial_bundle(action: GroupAction, dim: int = 1) -> EquivariantBundle:
    """Product bundle: every fiber dim-dimensional, every act matrix the identity."""
    n, m = action.group.order, action.base_size
    fiber_dim = np.full(m, dim, dtype=np.int64)
    mats = np.broadcast_to(np.eye(dim), (n, m, dim, dim)).copy()
    return EquivariantBundle(action, fiber_dim, mats)


def representation_bundle(action: GroupAction, rep: np.ndarray) -> EquivariantBundle:
    """Bundle whose act matrices are a representation, constant in b.

    rep has shape (|G|, d, d) and must be a homomorphism into GL(d);
    the cocycle law then holds automatically.  validate_bundle still
    checks it numerically.
    """
    n, m = action.group.order, action.base_size
    rep = np.asarray(rep, dtype=float)
    if rep.ndim != 3 or rep.shape[0] != n or rep.shape[1] != rep.shape[2]:
        raise StructuralError(f"representation shape {rep.shape}, expected (|G|, d, d)")
    d = rep.shape[1]
    fiber_dim = np.full(m, d, dtype=np.int64)
    mats = np.repeat(rep[:, None, :, :], m, axis=1)
    return EquivariantBundle(action, fiber_dim, mats)


def sign_bundle(action: GroupAction, signs: np.ndarray) -> EquivariantBundle:
    """One-dimensional bundle with act matrix [sign(g)]; signs must be a
    homomorphism into {+1, -1}."""
    signs = np.asarray(signs, dtype=float)
    return representation_bundle(action, signs.reshape(-1, 1, 1))


def validate_bundle(bundle: EquivariantBundle, tolerance: float = 1e-9) -> ValidationReport:
    """Check identity slice, orbit-constant fiber dims, zero padding, and the
    cocycle law.  Cocycle witness coordinates are (g, h, b)."""
    action = bundle.action
    grp = action.group
    n, m = grp.order, action.base_size
    A = bundle.act_matrix
    dmax = bundle.dmax
    report = ValidationReport()

    dim_bad = 0.0
    dim_witness = None
    for o in orbits(action):
        dims = bundle.fiber_dim[list(o.members)]
        if not np.all(dims == dims[0]):
            dim_bad += 1.0
            if dim_witness is None:
                off = o.members[int(np.flatnonzero(dims != dims[0])[0])]
                dim_witness = (o.base_point, off)
    report.add(check_from_residual("bundle-fiber-dim-orbit-constant", dim_bad, 0.0, dim_witness))

    ident = padded_identity(bundle.fiber_dim, dmax)
    res = _maxabs(A[grp.identity] - ident)
    witness = (grp.identity,) + _argmax_coords(A[grp.identity] - ident) if res > tolerance else None
    report.add(check_from_residual("bundle-identity-slice", res, tolerance, witness))

    # padding must be exactly zero outside the fiber block
    live = pad_mask(bundle.fiber_dim, dmax)  # (|B|, dmax)
    block = live[:, :, None] & live[:, None, :]  # square fibers: d(g.b) = d(b) if dims valid
    pad_res = _maxabs(np.where(block[None, :, :, :], 0.0, A))
    report.add(check_from_residual("bundle-padding-zero", pad_res, 0.0, None))

    worst = 0.0
    witness = None
    for h in range(n):
        hb = action.table[h]
        lhs = A[grp.cayley[:, h]]  # (g, b) -> A(g h, b)
        rhs = np.einsum("gbij,bjk->gbik", A[:, hb], A[h])
        diff = lhs - rhs
        r = _maxabs(diff)
        if r > worst:
            worst = r
            g, b = _argmax_coords(diff)[:2]
            witness = (g, h, b)
    report.add(check_from_residual("bundle-cocycle", worst, tolerance, witness if worst > tolerance else None))
    return report


# ---------------------------------------------------------------------------
# sections


@dataclass(eq=False)
class Section:
    bundle: EquivariantBundle
    values: np.ndarray  # (|B|, dmax)

    def __post_init__(self):
        m, dmax = self.bundle.action.base_size, self.bundle.dmax
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (m, dmax):
            raise StructuralError(f"section values shape {self.values.shape}, expected {(m, dmax)}")


@dataclass(eq=False)
class MackeySection:
    bundle: EquivariantBundle
    values: np.ndarray  # (|G|, |B|, dmax); values[h, b] lives in the fiber at b

    def __post_init__(self):
        n = self.bundle.action.group.order
        m, dmax = self.bundle.action.base_size, self.bundle.dmax
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (n, m, dmax):
            raise StructuralError(f"mackey values shape {self.values.shape}, expected {(n, m, dmax)}")


def act_on_section(g: int, f: Section) -> Section:
    """(g.f)(b) = act_matrix(g, g^-1.b) @ f(g^-1.b)."""
    bundle = f.bundle
    action = bundle.action
    src = action.table[action.group.inv[g]]  # b -> g^-1.b
    vals = np.einsum("bij,bj->bi", bundle.act_matrix[g, src], f.values[src])
    return Section(bundle, vals)


def section_to_mackey(f: Section) -> MackeySection:
    """m(h, b) = act_matrix(h^-1, h.b) @ f(h.b): pull the value at h.b back to b."""
    bundle = f.bundle
    action = bundle.action
    inv = action.group.inv
    hb = action.table  # (|G|, |B|)
    mats = bundle.act_matrix[inv[:, None], hb]  # (|G|, |B|, d, d)
    vals = np.einsum("hbij,hbj->hbi", mats, f.values[hb])
    return MackeySection(bundle, vals)


def mackey_to_section(m: MackeySection) -> Section:
    """f(b) = m(e, b)."""
    return Section(m.bundle, m.values[m.bundle.action.group.identity].copy())


def act_on_mackey(g: int, m: MackeySection) -> MackeySection:
    """(g.m)(h, b) = m(g^-1 h, b): pure index shuffle in the first slot."""
    grp = m.bundle.action.group
    return MackeySection(m.bundle, m.values[grp.cayley[grp.inv[g]]].copy())


def validate_mackey(m: MackeySection, tolerance: float = 1e-9) -> ValidationReport:
    """Residual of the periodicity law m(h, g.b) = act_matrix(g, b) @ m(h g, b).

    Witness coordinates are (g, h, b).
    """
    bundle = m.bundle
    action = bundle.action
    grp = action.group
    worst = 0.0
    witness = None
    for g in range(grp.order):
        lhs = m.values[:, action.table[g]]  # (h, b) -> m(h, g.b)
        rhs = np.einsum("bij,hbj->hbi", bundle.act_matrix[g], m.values[grp.cayley[:, g]])
        diff = lhs - rhs
        r = _maxabs(diff)
        if r > worst:
            worst = r
            h, b = _argmax_coords(diff)[:2]
            witness = (g, h, b)
    report = ValidationReport()
    report.add(check_from_residual("mackey-periodicity", worst, tolerance, witness if worst > tolerance else None))
    return report
