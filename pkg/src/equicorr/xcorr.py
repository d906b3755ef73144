"""Faintly constrained filters and group cross-correlation.

A filter assigns each pair (h, b) a matrix from the input fiber at b to
the output fiber at b, with finite support per base point, subject to the
faint compatibility law

    omega(g h g^-1, g.b) @ actE(g, b) = actF(g, b) @ omega(h, b)

for all g, h, b.  The law constrains each row only up to conjugation of
the group slot and motion of the base slot; it never forces translation
invariance in h, which is what separates it from the strict equivariance
laws of classical group convolutions.

Cross-correlation consumes a Mackey section and produces one:

    (omega * m)(h, b) = sum_k mu_b(k) omega(k, b) @ m(h k, b),

summed in ascending element index.  For a valid filter this intertwines
the group action on Mackey sections and preserves the periodicity law;
both facts are checked numerically by the property suite rather than
assumed.

When mu is left-invariant the cross-correlation also matches a group
convolution with the inverted filter omega'(h, b) = omega(h^-1, b):

    (omega' conv m)(h, b) = sum_k mu_b(k) omega'(k^-1 h, b) @ m(k, b).

The equality is conditional, so the check reports a skip when mu is not
left-invariant instead of asserting anything.

Filters are stored dense over (|G|, |B|) with an explicit support mask
derived at construction: an entry belongs to the support exactly when its
matrix has a nonzero coefficient, so an all-zero matrix never counts as
support.  A fundamental-domain codec stores one row per orbit and
rebuilds the rest through the compatibility law; expansion has exactly
one consistent answer, and the codec re-checks the stabilizer constraint
on each stored row before trusting it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bundles import EquivariantBundle, MackeySection
from .errors import InconsistencyError, StructuralError
from .groups import coset_section, fundamental_domain, orbit, stabilizer
from .measures import GroupMeasureFamily
from .reporting import Check, ValidationReport, check_from_residual


def _maxabs(arr: np.ndarray) -> float:
    return float(np.abs(arr).max()) if arr.size else 0.0


def _argmax_coords(arr: np.ndarray) -> tuple[int, ...]:
    flat = int(np.abs(arr).argmax())
    return tuple(int(c) for c in np.unravel_index(flat, arr.shape))


def _common_action(e_bundle: EquivariantBundle, f_bundle: EquivariantBundle):
    if e_bundle.action is not f_bundle.action:
        raise StructuralError("input and output bundles must share one action")
    return e_bundle.action


@dataclass(eq=False)
class Filter:
    """Matrix-valued filter omega(h, b): fiber_E(b) -> fiber_F(b)."""

    input_bundle: EquivariantBundle
    output_bundle: EquivariantBundle
    matrices: np.ndarray  # (|G|, |B|, dF, dE) padded
    support: np.ndarray = None  # (|G|, |B|) bool, derived

    def __post_init__(self):
        action = _common_action(self.input_bundle, self.output_bundle)
        n, m = action.group.order, action.base_size
        de, df = self.input_bundle.dmax, self.output_bundle.dmax
        self.matrices = np.asarray(self.matrices, dtype=float)
        if self.matrices.shape != (n, m, df, de):
            raise StructuralError(f"filter shape {self.matrices.shape}, expected {(n, m, df, de)}")
        # support is derived, never stored: exact-zero matrices are not support
        self.support = np.any(self.matrices != 0.0, axis=(2, 3))

    @property
    def action(self):
        return self.input_bundle.action

    def support_set(self, b: int) -> set[int]:
        return {int(h) for h in np.flatnonzero(self.support[:, b])}


def validate_filter(filt: Filter, tolerance: float = 1e-9) -> ValidationReport:
    """Residual of the faint compatibility law; witness coordinates (g, h, b)."""
    action = filt.action
    grp = action.group
    ae = filt.input_bundle.act_matrix
    af = filt.output_bundle.act_matrix
    worst, witness = 0.0, None
    for g in range(grp.order):
        conj = grp.conjugation_row(g)
        moved = filt.matrices[conj][:, action.table[g]]  # [h, b] -> omega(g h g^-1, g.b)
        lhs = np.einsum("hbij,bjk->hbik", moved, ae[g])
        rhs = np.einsum("bij,hbjk->hbik", af[g], filt.matrices)
        diff = lhs - rhs
        r = _maxabs(diff)
        if r > worst:
            worst = r
            h, b = _argmax_coords(diff)[:2]
            witness = (g, h, b)
    report = ValidationReport()
    report.add(check_from_residual("filter-faint-constraint", worst, tolerance, witness if worst > tolerance else None))
    return report


# ---------------------------------------------------------------------------
# cross-correlation


def cross_correlate(filt: Filter, m: MackeySection, mu: GroupMeasureFamily) -> MackeySection:
    """(omega * m)(h, b) = sum_k mu_b(k) omega(k, b) @ m(h k, b), ascending k."""
    _check_xcorr_args(filt, m, mu)
    grp = filt.action.group
    shifted = m.values[grp.cayley]  # [h, k, b] -> m(h k, b)
    vals = np.einsum("bk,kbij,hkbj->hbi", mu.weights, filt.matrices, shifted)
    return MackeySection(filt.output_bundle, vals)


def cross_correlate_at_identity(filt: Filter, m: MackeySection, mu: GroupMeasureFamily) -> np.ndarray:
    """The h = e slice only: (omega * m)(e, b) = sum_k mu_b(k) omega(k, b) @ m(k, b).

    This is the slice the transform comparison needs, and it avoids the
    full (|G|, |G|) shift table on large grids.
    """
    _check_xcorr_args(filt, m, mu)
    return np.einsum("bk,kbij,kbj->bi", mu.weights, filt.matrices, m.values)


def _check_xcorr_args(filt: Filter, m: MackeySection, mu: GroupMeasureFamily) -> None:
    if m.bundle is not filt.input_bundle:
        raise StructuralError("mackey section does not live in the filter's input bundle")
    if mu.action is not filt.action:
        raise StructuralError("measure family is over a different action")


def xcorr_equivariance_residual(
    filt: Filter,
    mu: GroupMeasureFamily,
    sections: list[MackeySection],
) -> tuple[float, tuple[int, int] | None]:
    """Max residual of T(g.f) = g.T(f) over the given sections and every g,
    where T(f) = (omega * f~)(e, -) is the induced map on plain sections;
    witness is (section index, g).

    On the raw Mackey tables the group acts by left translation and
    commutes with any right cross-correlation whatsoever, so the
    falsifiable statement lives at the section level: it is equivalent to
    the output table keeping the Mackey periodicity, and it fails for
    matrices that break the conjugation constraint.
    """
    from .bundles import Section, act_on_section, mackey_to_section, section_to_mackey

    grp = filt.action.group
    worst, witness = 0.0, None
    for i, m in enumerate(sections):
        f = mackey_to_section(m)
        base = Section(filt.output_bundle, cross_correlate_at_identity(filt, m, mu))
        for g in range(grp.order):
            gm = section_to_mackey(act_on_section(g, f))
            lhs = cross_correlate_at_identity(filt, gm, mu)
            rhs = act_on_section(g, base).values
            r = _maxabs(lhs - rhs)
            if r > worst:
                worst = r
                witness = (i, g)
    return worst, witness


# ---------------------------------------------------------------------------
# convolution form


def to_convolution_form(filt: Filter) -> Filter:
    """omega'(h, b) = omega(h^-1, b)."""
    return Filter(filt.input_bundle, filt.output_bundle, filt.matrices[filt.action.group.inv].copy())


def convolve(filt_prime: Filter, m: MackeySection, mu: GroupMeasureFamily) -> MackeySection:
    """(omega' conv m)(h, b) = sum_k mu_b(k) omega'(k^-1 h, b) @ m(k, b)."""
    _check_xcorr_args(filt_prime, m, mu)
    grp = filt_prime.action.group
    kinv_h = grp.cayley[grp.inv]  # [k, h] -> k^-1 h
    mats = filt_prime.matrices[kinv_h]  # (k, h, b, dF, dE)
    vals = np.einsum("bk,khbij,kbj->hbi", mu.weights, mats, m.values)
    return MackeySection(filt_prime.output_bundle, vals)


def mu_left_invariant(mu: GroupMeasureFamily, tolerance: float = 0.0) -> bool:
    """On a finite group, left invariance is equivalent to constant weights per b."""
    w = mu.weights
    if w.size == 0:
        return True
    return float((w.max(axis=1) - w.min(axis=1)).max()) <= tolerance


def check_convolution_equality(
    filt: Filter,
    mu: GroupMeasureFamily,
    sections: list[MackeySection],
    tolerance: float = 1e-12,
) -> ValidationReport:
    """Compare cross-correlation with the convolution of the inverted filter.

    The identity needs a left-invariant mu; without one the check is
    recorded as skipped, never asserted.
    """
    report = ValidationReport()
    if not mu_left_invariant(mu):
        report.add(Check("xcorr-convolution-equality", 0.0, tolerance, True, None, skipped=True))
        return report
    flipped = to_convolution_form(filt)
    worst, witness = 0.0, None
    for i, m in enumerate(sections):
        lhs = cross_correlate(filt, m, mu)
        rhs = convolve(flipped, m, mu)
        r = _maxabs(lhs.values - rhs.values)
        if r > worst:
            worst = r
            witness = (i,)
    report.add(check_from_residual("xcorr-convolution-equality", worst, tolerance, witness if worst > tolerance else None))
    return report


# ---------------------------------------------------------------------------
# fundamental-domain codec


@dataclass(eq=False)
class CompressedFilter:
    """One filter row per orbit representative; the rest is determined by
    the compatibility law."""

    input_bundle: EquivariantBundle
    output_bundle: EquivariantBundle
    rows: dict[int, np.ndarray]  # orbit rep b -> (|G|, dF, dE)


def compress_filter(filt: Filter) -> CompressedFilter:
    reps = fundamental_domain(filt.action)
    rows = {b: filt.matrices[:, b].copy() for b in reps}
    return CompressedFilter(filt.input_bundle, filt.output_bundle, rows)


def expand_filter(comp: CompressedFilter, tolerance: float = 1e-9) -> Filter:
    """Rebuild the full table from fundamental-domain rows.

    Each stored row must satisfy the stabilizer slice of the compatibility
    law; a violating row has no consistent expansion and raises
    InconsistencyError naming the offending (g, h).  Off the domain,

        omega(h', k.b) = actF(k, b) @ omega(k^-1 h' k, b) @ actE(k^-1, k.b)

    with k the deterministic coset representative, which is the unique
    table satisfying the law with the given rows.
    """
    e_bundle, f_bundle = comp.input_bundle, comp.output_bundle
    action = _common_action(e_bundle, f_bundle)
    grp = action.group
    n, m = grp.order, action.base_size
    reps = fundamental_domain(action)
    if sorted(comp.rows) != reps:
        raise StructuralError(f"compressed rows keyed {sorted(comp.rows)}, expected orbit reps {reps}")

    ae, af = e_bundle.act_matrix, f_bundle.act_matrix
    de, df = e_bundle.dmax, f_bundle.dmax
    out = np.zeros((n, m, df, de))
    for b in reps:
        row = np.asarray(comp.rows[b], dtype=float)
        if row.shape != (n, df, de):
            raise StructuralError(f"compressed row at b={b} has shape {row.shape}, expected {(n, df, de)}")
        for g in stabilizer(action, b):
            conj = grp.conjugation_row(g)
            lhs = np.einsum("hij,jk->hik", row[conj], ae[g, b])
            rhs = np.einsum("ij,hjk->hik", af[g, b], row)
            diff = np.abs(lhs - rhs)
            if _maxabs(diff) > tolerance:
                h = _argmax_coords(diff)[0]
                raise InconsistencyError(
                    f"stored row at b={b} violates its stabilizer constraint at (g={int(g)}, h={h})"
                )
        sec = coset_section(action, b)
        for c, k in zip(sec.members, sec.reps):
            if k == grp.identity:
                out[:, c] = row
                continue
            kinv = grp.inv[k]
            conj_back = grp.cayley[grp.cayley[kinv], k]  # h' -> k^-1 h' k
            out[:, c] = np.einsum("ij,hjk,kl->hil", af[k, b], row[conj_back], ae[kinv, c])
    return Filter(e_bundle, f_bundle, out)


# ---------------------------------------------------------------------------
# scalar specialization


def pointwise_xcorr(filt: Filter, f_values: np.ndarray, mu: GroupMeasureFamily) -> np.ndarray:
    """Scalar pointwise form on a trivial line bundle:

        out(b) = sum_h mu_b(h) omega(h, b) f(h.b).

    Agrees with cross-correlation of the induced Mackey section at h = e;
    useful as an independent check on transitive scalar scenarios.
    """
    action = filt.action
    if filt.input_bundle.dmax != 1 or filt.output_bundle.dmax != 1:
        raise StructuralError("pointwise form needs one-dimensional fibers")
    f_values = np.asarray(f_values, dtype=float)
    w = filt.matrices[:, :, 0, 0]  # (|G|, |B|)
    return np.einsum("bh,hb->b", mu.weights, w * f_values[action.table])
