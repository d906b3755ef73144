"""Orbitwise integral transforms and the filter <-> kernel dictionary.

A kernel assigns matrices kappa(c, b): fiber_E(c) -> fiber_F(b) to pairs
of base points in a common orbit, subject to the compatibility law

    actF(g, b) @ kappa(c, b) = kappa(g.c, g.b) @ actE(g, c),

whose support is invariant under the diagonal action.  The induced
transform integrates over the orbit against the orbit measure family:

    T(f)(b) = sum_{c in G.b} mubar_b(c) kappa(c, b) @ f(c),

summed in ascending base index.  The compatibility law is exactly what
makes T commute with the group action on sections; necessity holds too,
so a kernel violating the law on a strictly positive mubar is always
caught by an equivariance search over random sections.

Projection averages a filter over each stabilizer into a kernel:

    kappa(k.b, b) = sum_{h in G_b} nu_b(h) omega(k h, b) @ actE((k h)^-1, k.b),

independent of the representative k by left-invariance of nu.  Lifting
goes the other way and needs two extra pieces of scenario data: a section
theta of the orbit map, theta(c, b).b = c with
g theta(c, b) = theta(g.c, g.b) g on the kernel support, and a
stabilizer density delta of unit nu-mass:

    omega(h, b) = delta(theta(h.b, b)^-1 h, b) kappa(h.b, b) @ actE(h, b)

on pairs with (h.b, b) in the kernel support, zero elsewhere.  Theta is
data, never inferred: validate_theta checks a given map and reports
infeasibility rather than constructing one.

Both directions are tied together numerically: the lifted filter's
cross-correlation at the identity reproduces the transform whenever the
disintegration identity holds (checked first as a precondition), and
projecting a lifted filter returns the original kernel.  The opposite
composition lift(project(omega)) is NOT an identity in general; distinct
theta choices produce filters with visibly different supports inducing
one and the same transform.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bundles import EquivariantBundle, MackeySection, Section, act_on_section, section_to_mackey
from .errors import CoverageError, InconsistencyError, PreconditionError, StructuralError
from .groups import GroupAction, coset_section, stabilizer
from .measures import (
    DeltaFunction,
    GroupMeasureFamily,
    OrbitMeasureFamily,
    StabilizerMeasureFamily,
    dirac_delta,
    fubini_pointwise_residual,
    orbit_mask,
)
from .reporting import ValidationReport, check_from_residual
from .rng import SplitMix64
from .xcorr import Filter, cross_correlate_at_identity, _common_action

__all__ = [
    "Kernel",
    "ThetaMap",
    "dirac_delta",
    "make_kernel",
    "validate_kernel",
    "integral_transform",
    "check_equivariance",
    "transform_equivariance_residual",
    "project_filter_to_kernel",
    "validate_theta",
    "lift_kernel_to_filter",
    "lift_equivalence_check",
    "theta_trivialization",
    "random_sections",
]


def _maxabs(arr: np.ndarray) -> float:
    return float(np.abs(arr).max()) if arr.size else 0.0


def _argmax_coords(arr: np.ndarray) -> tuple[int, ...]:
    flat = int(np.abs(arr).argmax())
    return tuple(int(c) for c in np.unravel_index(flat, arr.shape))


@dataclass(eq=False)
class Kernel:
    """Matrix table kappa(c, b), indexed [c, b], zero off orbit pairs."""

    input_bundle: EquivariantBundle
    output_bundle: EquivariantBundle
    matrices: np.ndarray  # (|B|, |B|, dF, dE)
    support: np.ndarray = None  # (|B|, |B|) bool, derived

    def __post_init__(self):
        action = _common_action(self.input_bundle, self.output_bundle)
        m = action.base_size
        de, df = self.input_bundle.dmax, self.output_bundle.dmax
        self.matrices = np.asarray(self.matrices, dtype=float)
        if self.matrices.shape != (m, m, df, de):
            raise StructuralError(f"kernel shape {self.matrices.shape}, expected {(m, m, df, de)}")
        self.support = np.any(self.matrices != 0.0, axis=(2, 3))
        off_orbit = self.support & ~orbit_mask(action).T  # support[c, b] needs c in G.b
        if np.any(off_orbit):
            c, b = _argmax_coords(off_orbit.astype(float))
            raise StructuralError(f"kernel entry at (c={c}, b={b}) is off the orbit of b")

    @property
    def action(self):
        return self.input_bundle.action

    def support_pairs(self) -> list[tuple[int, int]]:
        cs, bs = np.nonzero(self.support)
        return [(int(c), int(b)) for c, b in zip(cs, bs)]


def make_kernel(
    input_bundle: EquivariantBundle,
    output_bundle: EquivariantBundle,
    matrices: np.ndarray,
) -> Kernel:
    return Kernel(input_bundle, output_bundle, matrices)


def validate_kernel(kern: Kernel, tolerance: float = 1e-9) -> ValidationReport:
    """Compatibility law residual (witness (g, c, b)) plus exact invariance
    of the support under the diagonal action."""
    action = kern.action
    grp = action.group
    ae = kern.input_bundle.act_matrix
    af = kern.output_bundle.act_matrix
    n = grp.order
    worst, witness = 0.0, None
    support_bad, support_witness = 0, None
    for g in range(n):
        tg = action.table[g]
        lhs = np.einsum("bij,cbjk->cbik", af[g], kern.matrices)
        rhs = np.einsum("cbij,cjk->cbik", kern.matrices[np.ix_(tg, tg)], ae[g])
        diff = lhs - rhs
        r = _maxabs(diff)
        if r > worst:
            worst = r
            c, b = _argmax_coords(diff)[:2]
            witness = (g, c, b)
        moved = kern.support[np.ix_(tg, tg)]
        bad = moved != kern.support
        if bad.any():
            support_bad += int(bad.sum())
            if support_witness is None:
                c, b = _argmax_coords(bad.astype(float))
                support_witness = (g, c, b)
    report = ValidationReport()
    report.add(check_from_residual("kernel-constraint", worst, tolerance, witness if worst > tolerance else None))
    report.add(check_from_residual("kernel-support-invariance", float(support_bad), 0.0, support_witness))
    return report


# ---------------------------------------------------------------------------
# transform


def integral_transform(kern: Kernel, mubar: OrbitMeasureFamily, f: Section) -> Section:
    """T(f)(b) = sum_c mubar_b(c) kappa(c, b) @ f(c), ascending c."""
    if f.bundle is not kern.input_bundle:
        raise StructuralError("section does not live in the kernel's input bundle")
    if mubar.action is not kern.action:
        raise StructuralError("orbit family is over a different action")
    vals = np.einsum("bc,cbij,cj->bi", mubar.weights, kern.matrices, f.values)
    return Section(kern.output_bundle, vals)


def random_sections(bundle: EquivariantBundle, rng: SplitMix64, count: int) -> list[Section]:
    """Sections with uniform [-1, 1) coordinates on live fiber slots."""
    from .bundles import pad_mask

    mask = pad_mask(bundle.fiber_dim, bundle.dmax)
    out = []
    for _ in range(count):
        vals = rng.uniforms(mask.shape, -1.0, 1.0)
        out.append(Section(bundle, np.where(mask, vals, 0.0)))
    return out


def transform_equivariance_residual(
    kern: Kernel,
    mubar: OrbitMeasureFamily,
    sections: list[Section],
) -> tuple[float, tuple[int, int] | None]:
    """Max residual of T(g.f) = g.T(f) over the sections and every g;
    witness is (section index, g)."""
    grp = kern.action.group
    worst, witness = 0.0, None
    for i, f in enumerate(sections):
        base = integral_transform(kern, mubar, f)
        for g in range(grp.order):
            lhs = integral_transform(kern, mubar, act_on_section(g, f))
            rhs = act_on_section(g, base)
            r = _maxabs(lhs.values - rhs.values)
            if r > worst:
                worst = r
                witness = (i, g)
    return worst, witness


def check_equivariance(
    kern: Kernel,
    mubar: OrbitMeasureFamily,
    seed: int = 0,
    n_sections: int = 20,
    tolerance: float = 1e-12,
) -> ValidationReport:
    """Equivariance search over seeded random sections (>= 20) and all g."""
    rng = SplitMix64(seed)
    sections = random_sections(kern.input_bundle, rng, max(n_sections, 20))
    res, wit = transform_equivariance_residual(kern, mubar, sections)
    report = ValidationReport()
    report.add(check_from_residual("transform-equivariance", res, tolerance, wit if res > tolerance else None))
    return report


# ---------------------------------------------------------------------------
# projection


def project_filter_to_kernel(filt: Filter, nu: StabilizerMeasureFamily) -> Kernel:
    """Average the filter over each stabilizer:

        kappa(k.b, b) = sum_{h in G_b} nu_b(h) omega(k h, b) @ actE((k h)^-1, k.b)

    with k the deterministic coset representative of c = k.b.
    """
    if nu.action is not filt.action:
        raise StructuralError("stabilizer family is over a different action")
    action = filt.action
    grp = action.group
    m = action.base_size
    ae = filt.input_bundle.act_matrix
    de, df = filt.input_bundle.dmax, filt.output_bundle.dmax
    out = np.zeros((m, m, df, de))
    for b in range(m):
        stab = stabilizer(action, b)
        w = nu.weights[b, stab]
        sec = coset_section(action, b)
        for c, k in zip(sec.members, sec.reps):
            kh = grp.cayley[k, stab]  # the coset k G_b
            mats = filt.matrices[kh, b]  # (|S|, dF, dE)
            back = ae[grp.inv[kh], c]  # (|S|, dE, dE): actE((k h)^-1, c)
            out[c, b] = np.einsum("s,sij,sjk->ik", w, mats, back)
    return Kernel(filt.input_bundle, filt.output_bundle, out)


# ---------------------------------------------------------------------------
# theta


@dataclass(eq=False)
class ThetaMap:
    """Partial section of the orbit map: reps[c, b] = theta(c, b), -1 where
    undefined.  Supplied by scenario data, validated here, never inferred."""

    action: GroupAction
    reps: np.ndarray  # (|B|, |B|) int

    def __post_init__(self):
        m = self.action.base_size
        self.reps = np.asarray(self.reps, dtype=np.int64)
        if self.reps.shape != (m, m):
            raise StructuralError(f"theta shape {self.reps.shape}, expected {(m, m)}")
        n = self.action.group.order
        vals = self.reps[self.reps >= 0]
        if vals.size and vals.max() >= n:
            raise StructuralError("theta entry out of group range")

    @property
    def defined(self) -> np.ndarray:
        return self.reps >= 0

    def element(self, c: int, b: int) -> int:
        g = int(self.reps[c, b])
        if g < 0:
            raise CoverageError(f"theta undefined at (c={c}, b={b})")
        return g


def validate_theta(theta: ThetaMap, kern: Kernel, tolerance: float = 0.0) -> ValidationReport:
    """Check theta on the kernel support: coverage (an uncovered pair raises
    CoverageError), the section law theta(c, b).b = c, and translation
    compatibility g theta(c, b) = theta(g.c, g.b) g for all g.  Both laws are
    integer identities; residuals count violations."""
    if theta.action is not kern.action:
        raise StructuralError("theta is over a different action")
    action = theta.action
    grp = action.group
    supp = kern.support
    missing = supp & ~theta.defined
    if np.any(missing):
        c, b = _argmax_coords(missing.astype(float))
        raise CoverageError(f"theta misses kernel support at (c={c}, b={b})")

    report = ValidationReport()
    cs, bs = np.nonzero(supp)
    sect_bad = action.table[theta.reps[cs, bs], bs] != cs
    count = int(sect_bad.sum())
    witness = None
    if count:
        i = int(np.flatnonzero(sect_bad)[0])
        witness = (int(cs[i]), int(bs[i]))
    report.add(check_from_residual("theta-section", float(count), tolerance, witness))

    worst_count, witness = 0, None
    for g in range(grp.order):
        tg = action.table[g]
        lhs = grp.cayley[g, theta.reps[cs, bs]]
        rhs = grp.cayley[theta.reps[tg[cs], tg[bs]], g]
        bad = lhs != rhs
        if bad.any():
            worst_count += int(bad.sum())
            if witness is None:
                i = int(np.flatnonzero(bad)[0])
                witness = (g, int(cs[i]), int(bs[i]))
    report.add(check_from_residual("theta-translation", float(worst_count), tolerance, witness))
    return report


def theta_trivialization(theta: ThetaMap, bundle: EquivariantBundle, b: int) -> dict[int, np.ndarray]:
    """Diagnostic: the local trivialization over the orbit of b induced by
    theta, as the matrices actE(theta(c, b), b) indexed by c.

    Composing a section value at b with these matrices transports it to
    every covered point of the orbit; emitted for inspection only.
    """
    if theta.action is not bundle.action:
        raise StructuralError("theta is over a different action")
    cs = np.flatnonzero(theta.defined[:, b])
    return {int(c): bundle.act_matrix[theta.element(int(c), b), b].copy() for c in cs}


# ---------------------------------------------------------------------------
# lift


def lift_kernel_to_filter(kern: Kernel, theta: ThetaMap, delta: DeltaFunction) -> Filter:
    """omega(h, b) = delta(theta(h.b, b)^-1 h, b) kappa(h.b, b) @ actE(h, b)
    on pairs with (h.b, b) in the kernel support, zero elsewhere.

    The delta argument theta(h.b, b)^-1 h lands in the stabilizer of b
    whenever theta satisfies its section law; that is asserted before the
    lookup, and a failure raises InconsistencyError rather than silently
    reading delta off its support.
    """
    action = kern.action
    if theta.action is not action or delta.action is not action:
        raise StructuralError("theta or delta is over a different action")
    grp = action.group
    n, m = grp.order, action.base_size
    hb = action.table  # (|G|, |B|): h.b
    cols = np.arange(m)
    mask = kern.support[hb, cols[None, :]]  # (|G|, |B|)

    th = np.where(mask, theta.reps[hb, cols[None, :]], grp.identity)
    if np.any((th < 0) & mask):
        h, b = _argmax_coords(((th < 0) & mask).astype(float))
        raise CoverageError(f"theta misses kernel support at (c={int(hb[h, b])}, b={b})")
    s = grp.cayley[grp.inv[th], np.arange(n)[:, None]]  # theta^-1 h
    stays = action.table[s, cols[None, :]] == cols[None, :]
    if np.any(mask & ~stays):
        h, b = _argmax_coords((mask & ~stays).astype(float))
        raise InconsistencyError(
            f"theta(h.b, b)^-1 h left the stabilizer at (h={h}, b={b}); theta violates its section law"
        )

    dvals = delta.values[s, cols[None, :]]  # (|G|, |B|)
    ksel = kern.matrices[hb, cols[None, :]]  # (|G|, |B|, dF, dE)
    mats = np.einsum("hb,hbij,hbjk->hbik", np.where(mask, dvals, 0.0), ksel, kern.input_bundle.act_matrix)
    return Filter(kern.input_bundle, kern.output_bundle, mats)


def lift_equivalence_check(
    kern: Kernel,
    theta: ThetaMap,
    delta: DeltaFunction,
    mu: GroupMeasureFamily,
    nu: StabilizerMeasureFamily,
    mubar: OrbitMeasureFamily,
    f: Section,
    fubini_tolerance: float = 1e-9,
) -> float:
    """Residual of (lifted omega * f~)(e, -) = T(f), the transform
    equivalence the lift construction promises.

    The promise only holds when the measure families satisfy the
    disintegration identity, so that is checked first (exhaustively, on
    the indicator basis) and a violation raises PreconditionError.
    """
    res, wit = fubini_pointwise_residual(mu, nu, mubar)
    if res > fubini_tolerance:
        raise PreconditionError(
            f"disintegration identity fails by {res:.3e} at (b, h)={wit}; lift equivalence not applicable"
        )
    lifted = lift_kernel_to_filter(kern, theta, delta)
    lhs = cross_correlate_at_identity(lifted, section_to_mackey(f), mu)
    rhs = integral_transform(kern, mubar, f)
    return _maxabs(lhs - rhs.values)
