"""Conjugation-compatible measure families on a group action.

Three families travel together.  For each base point b:

  * a group family mu_b, a weight per group element, satisfying the
    pushforward compatibility mu_{g.b}(g h g^-1) = mu_b(h);
  * a stabilizer family nu_b, weights supported on the stabilizer of b,
    with the same compatibility and left-invariant (hence constant on the
    stabilizer, since the stabilizer is finite);
  * an orbit family mubar_b, weights on the orbit of b, compatible with
    the action itself: mubar_{g.b}(g.c) = mubar_b(c).

The three are linked by the disintegration identity

    sum_h mu_b(h) f(h) = sum_{c in G.b} mubar_b(c) sum_{h in G_b} nu_b(h) f(k_c h)

for every real function f on the group, where k_c is any coset
representative with k_c.b = c; left-invariance of nu_b makes the inner
sum independent of which representative is chosen.  check_fubini measures
the identity for a given f; solve_orbit_measure inverts it for mubar when
mu_b has constant weight.

Normalized families are built from a positive weight function psi(h, b)
that is conjugation-compatible, psi(g h g^-1, g.b) = psi(h, b), and does
not vanish identically on any stabilizer.  Finite groups carry no modular
correction: the modulus is 1 and the scaling freedom of the group family
is a single positive constant (the `scale` of counting_family).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateMeasureError, DomainError, PreconditionError, StructuralError
from .groups import CosetSection, GroupAction, coset_section, stabilizer, stabilizer_mask
from .reporting import ValidationReport, check_from_residual

_EXACT = 0.0


def _maxabs(arr: np.ndarray) -> float:
    return float(np.abs(arr).max()) if arr.size else 0.0


def _argmax_coords(arr: np.ndarray) -> tuple[int, ...]:
    flat = int(np.abs(arr).argmax())
    return tuple(int(c) for c in np.unravel_index(flat, arr.shape))


@dataclass(eq=False)
class GroupMeasureFamily:
    action: GroupAction
    weights: np.ndarray  # (|B|, |G|) nonnegative
    haar: bool = False  # advisory flag: weights constant per b

    def __post_init__(self):
        n, m = self.action.group.order, self.action.base_size
        self.weights = np.asarray(self.weights, dtype=float)
        if self.weights.shape != (m, n):
            raise StructuralError(f"group family shape {self.weights.shape}, expected {(m, n)}")
        if self.weights.min(initial=0.0) < 0:
            raise StructuralError("group family weights must be nonnegative")


@dataclass(eq=False)
class StabilizerMeasureFamily:
    action: GroupAction
    weights: np.ndarray  # (|B|, |G|), zero off the stabilizer of b

    def __post_init__(self):
        n, m = self.action.group.order, self.action.base_size
        self.weights = np.asarray(self.weights, dtype=float)
        if self.weights.shape != (m, n):
            raise StructuralError(f"stabilizer family shape {self.weights.shape}, expected {(m, n)}")
        if self.weights.min(initial=0.0) < 0:
            raise StructuralError("stabilizer family weights must be nonnegative")
        off = self.weights[~stabilizer_mask(self.action)]
        if off.size and np.any(off != 0.0):
            raise StructuralError("stabilizer family has weight off the stabilizer")


@dataclass(eq=False)
class OrbitMeasureFamily:
    action: GroupAction
    weights: np.ndarray  # (|B|, |B|): weights[b, c], zero off the orbit of b

    def __post_init__(self):
        m = self.action.base_size
        self.weights = np.asarray(self.weights, dtype=float)
        if self.weights.shape != (m, m):
            raise StructuralError(f"orbit family shape {self.weights.shape}, expected {(m, m)}")
        if self.weights.min(initial=0.0) < 0:
            raise StructuralError("orbit family weights must be nonnegative")
        off = self.weights[~orbit_mask(self.action)]
        if off.size and np.any(off != 0.0):
            raise StructuralError("orbit family has weight off the orbit")

    def strictly_positive(self) -> bool:
        mask = orbit_mask(self.action)
        return bool(np.all(self.weights[mask] > 0))


@dataclass(eq=False)
class PsiFunction:
    """Positive weight function used to normalize measure families.

    Finite groups are unimodular: the modulus is identically 1 and the
    group-family scaling constant is a plain positive number, recorded
    here for reference.
    """

    action: GroupAction
    values: np.ndarray  # (|G|, |B|)
    modulus: float = 1.0
    scale: float = 1.0

    def __post_init__(self):
        n, m = self.action.group.order, self.action.base_size
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (n, m):
            raise StructuralError(f"psi shape {self.values.shape}, expected {(n, m)}")
        if self.values.min(initial=0.0) < 0:
            raise StructuralError("psi must be nonnegative")
        if self.scale <= 0:
            raise DomainError("psi scale must be positive")


@dataclass(eq=False)
class DeltaFunction:
    """Stabilizer-supported density with unit nu-mass on each stabilizer."""

    action: GroupAction
    values: np.ndarray  # (|G|, |B|), zero off the stabilizer of b

    def __post_init__(self):
        n, m = self.action.group.order, self.action.base_size
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (n, m):
            raise StructuralError(f"delta shape {self.values.shape}, expected {(n, m)}")
        off = self.values[~stabilizer_mask(self.action).T]
        if off.size and np.any(off != 0.0):
            raise StructuralError("delta has support off the stabilizer")


def orbit_mask(action: GroupAction) -> np.ndarray:
    """Boolean (|B|, |B|) mask: mask[b, c] iff c is in the orbit of b."""
    m = action.base_size
    mask = np.zeros((m, m), dtype=bool)
    for b in range(m):
        mask[b, np.unique(action.table[:, b])] = True
    return mask


# ---------------------------------------------------------------------------
# constructors


def counting_family(action: GroupAction, scale: float = 1.0) -> GroupMeasureFamily:
    """Haar family: constant weight `scale` on every element, every b."""
    if scale <= 0:
        raise DomainError("counting family scale must be positive")
    n, m = action.group.order, action.base_size
    return GroupMeasureFamily(action, np.full((m, n), float(scale)), haar=True)


def counting_stabilizer_family(action: GroupAction, scale: float = 1.0) -> StabilizerMeasureFamily:
    """Constant weight `scale` on each stabilizer (left-invariant by construction)."""
    if scale <= 0:
        raise DomainError("stabilizer counting scale must be positive")
    return StabilizerMeasureFamily(action, float(scale) * stabilizer_mask(action).astype(float))


def counting_orbit_family(action: GroupAction, scale: float = 1.0) -> OrbitMeasureFamily:
    if scale <= 0:
        raise DomainError("orbit counting scale must be positive")
    return OrbitMeasureFamily(action, float(scale) * orbit_mask(action).astype(float))


# ---------------------------------------------------------------------------
# validation


def validate_families(
    mu: GroupMeasureFamily,
    nu: StabilizerMeasureFamily,
    mubar: OrbitMeasureFamily,
    tolerance: float = 1e-9,
) -> ValidationReport:
    """Check the three compatibility laws plus nu left-invariance and any
    advisory flags.  Witnesses are (g, b, h) for the group and stabilizer
    families and (g, b, c) for the orbit family."""
    action = mu.action
    grp = action.group
    n, m = grp.order, action.base_size
    report = ValidationReport()

    def conj_residual(weights: np.ndarray) -> tuple[float, tuple[int, ...] | None]:
        worst, witness = 0.0, None
        for g in range(n):
            conj = grp.conjugation_row(g)  # h -> g h g^-1
            moved = weights[action.table[g]][:, conj]  # [b, h] -> w[g.b, g h g^-1]
            diff = moved - weights
            r = _maxabs(diff)
            if r > worst:
                worst = r
                b, h = _argmax_coords(diff)
                witness = (g, b, h)
        return worst, witness

    res, wit = conj_residual(mu.weights)
    report.add(check_from_residual("family-mu-conjugation", res, tolerance, wit if res > tolerance else None))

    res, wit = conj_residual(nu.weights)
    report.add(check_from_residual("family-nu-conjugation", res, tolerance, wit if res > tolerance else None))

    # left-invariance on a finite stabilizer forces constant weight there
    smask = stabilizer_mask(action)
    spread, wit = 0.0, None
    for b in range(m):
        w = nu.weights[b, smask[b]]
        if w.size:
            r = float(w.max() - w.min())
            if r > spread:
                spread = r
                wit = (b,)
    report.add(check_from_residual("family-nu-left-invariance", spread, tolerance, wit if spread > tolerance else None))

    worst, witness = 0.0, None
    for g in range(n):
        moved = mubar.weights[np.ix_(action.table[g], action.table[g])]  # [b, c] -> w[g.b, g.c]
        diff = moved - mubar.weights
        r = _maxabs(diff)
        if r > worst:
            worst = r
            b, c = _argmax_coords(diff)
            witness = (g, b, c)
    report.add(check_from_residual("family-mubar-pushforward", worst, tolerance, witness if worst > tolerance else None))

    if mu.haar:
        spread = float((mu.weights.max(axis=1) - mu.weights.min(axis=1)).max()) if n else 0.0
        report.add(check_from_residual("family-mu-haar-flag", spread, tolerance, None))
    return report


# ---------------------------------------------------------------------------
# disintegration


def check_fubini(
    mu: GroupMeasureFamily,
    nu: StabilizerMeasureFamily,
    mubar: OrbitMeasureFamily,
    f: np.ndarray,
    b: int,
    section: CosetSection | None = None,
) -> float:
    """Residual of the disintegration identity at base point b for a real
    function f on the group, using the given coset section (default: the
    deterministic smallest-index section)."""
    action = mu.action
    grp = action.group
    f = np.asarray(f, dtype=float)
    if f.shape != (grp.order,):
        raise StructuralError(f"group function shape {f.shape}, expected {(grp.order,)}")
    if section is None:
        section = coset_section(action, b)
    stab = stabilizer(action, b)
    members = np.asarray(section.members)
    reps = np.asarray(section.reps)

    lhs = float(mu.weights[b] @ f)
    inner = f[grp.cayley[np.ix_(reps, stab)]] @ nu.weights[b, stab]  # one value per orbit member
    rhs = float(mubar.weights[b, members] @ inner)
    return abs(lhs - rhs)


def fubini_pointwise_residual(
    mu: GroupMeasureFamily,
    nu: StabilizerMeasureFamily,
    mubar: OrbitMeasureFamily,
) -> tuple[float, tuple[int, int] | None]:
    """Exhaustive disintegration check on the indicator basis.

    For f the indicator of one element h, the identity collapses to
    mu_b(h) = mubar_b(h.b) * nu_b(k^-1 h) with k the representative of
    h.b; scanning all (b, h) covers a complete basis of functions, so a
    zero residual here implies the identity for every f.
    """
    action = mu.action
    grp = action.group
    worst, witness = 0.0, None
    for b in range(action.base_size):
        sec = coset_section(action, b)
        rep_of = np.zeros(action.base_size, dtype=np.int64)
        rep_of[list(sec.members)] = sec.reps
        hb = action.table[:, b]  # h -> h.b
        k = rep_of[hb]
        rhs = mubar.weights[b, hb] * nu.weights[b, grp.cayley[grp.inv[k], np.arange(grp.order)]]
        diff = np.abs(mu.weights[b] - rhs)
        r = float(diff.max()) if diff.size else 0.0
        if r > worst:
            worst = r
            witness = (b, int(diff.argmax()))
    return worst, witness


def solve_orbit_measure(
    mu: GroupMeasureFamily,
    nu: StabilizerMeasureFamily,
    b: int,
    tolerance: float = 1e-9,
) -> np.ndarray:
    """Solve the disintegration identity for the orbit weights at b.

    Testing against coset indicator functions decouples the unknowns:

        mubar_b(c) = mu_b(k_c G_b) / nu_b(G_b).

    Requires mu_b constant (Haar) and nu_b strictly positive on the
    stabilizer.  Returns a full-length weight row (zero off the orbit).
    """
    action = mu.action
    grp = action.group
    stab = stabilizer(action, b)
    nu_mass = float(nu.weights[b, stab].sum())
    if nu_mass <= 0 or np.any(nu.weights[b, stab] <= 0):
        raise DegenerateMeasureError(f"stabilizer weights at b={b} must be strictly positive")
    w = mu.weights[b]
    if w.size and float(w.max() - w.min()) > tolerance:
        raise PreconditionError(f"group family at b={b} is not constant; cannot solve for orbit weights")
    sec = coset_section(action, b)
    row = np.zeros(action.base_size)
    for c, k in zip(sec.members, sec.reps):
        coset = grp.cayley[k, stab]  # k_c G_b
        row[c] = float(w[coset].sum()) / nu_mass
    return row


def solve_orbit_family(
    mu: GroupMeasureFamily,
    nu: StabilizerMeasureFamily,
    tolerance: float = 1e-9,
) -> OrbitMeasureFamily:
    rows = [solve_orbit_measure(mu, nu, b, tolerance) for b in range(mu.action.base_size)]
    return OrbitMeasureFamily(mu.action, np.stack(rows, axis=0))


# ---------------------------------------------------------------------------
# psi-normalized families


def psi_indicator_identity(action: GroupAction) -> PsiFunction:
    """psi(h, b) = [h = e]: the simplest class function, positive at the
    identity of every stabilizer."""
    n, m = action.group.order, action.base_size
    vals = np.zeros((n, m))
    vals[action.group.identity, :] = 1.0
    return PsiFunction(action, vals)


def psi_from_class_function(action: GroupAction, values: np.ndarray) -> PsiFunction:
    """psi(h, b) = psi0(h) for a nonnegative class function psi0 (constant on
    conjugacy classes); conjugation compatibility is then automatic."""
    grp = action.group
    values = np.asarray(values, dtype=float)
    if values.shape != (grp.order,):
        raise StructuralError(f"class function shape {values.shape}, expected {(grp.order,)}")
    for g in range(grp.order):
        conj = grp.conjugation_row(g)
        if _maxabs(values[conj] - values) > 0:
            raise PreconditionError(f"psi0 is not a class function: varies under conjugation by g={g}")
    vals = np.repeat(values[:, None], action.base_size, axis=1)
    return PsiFunction(action, vals)


def validate_psi(psi: PsiFunction, tolerance: float = 1e-9) -> ValidationReport:
    """Conjugation compatibility plus nonvanishing: each b needs positive
    total mass and positive mass on its stabilizer."""
    action = psi.action
    grp = action.group
    report = ValidationReport()

    worst, witness = 0.0, None
    for g in range(grp.order):
        conj = grp.conjugation_row(g)
        moved = psi.values[np.ix_(conj, action.table[g])]  # [h, b] -> psi(g h g^-1, g.b)
        diff = moved - psi.values
        r = _maxabs(diff)
        if r > worst:
            worst = r
            h, b = _argmax_coords(diff)
            witness = (g, h, b)
    report.add(check_from_residual("psi-conjugation", worst, tolerance, witness if worst > tolerance else None))

    total = psi.values.sum(axis=0)
    bad = int((total <= 0).sum())
    wit = (int(np.flatnonzero(total <= 0)[0]),) if bad else None
    report.add(check_from_residual("psi-nonvanishing", float(bad), 0.0, wit))

    smask = stabilizer_mask(action)
    stab_mass = (psi.values.T * smask).sum(axis=1)
    bad = int((stab_mass <= 0).sum())
    wit = (int(np.flatnonzero(stab_mass <= 0)[0]),) if bad else None
    report.add(check_from_residual("psi-stabilizer-nonvanishing", float(bad), 0.0, wit))
    return report


def construct_normalized_families(
    psi: PsiFunction,
) -> tuple[GroupMeasureFamily, StabilizerMeasureFamily, OrbitMeasureFamily]:
    """Counting families rescaled so psi integrates to 1 against each.

        mu_b = counting / Z_b,   Z_b = sum_h psi(h, b)
        nu_b = counting / Z'_b,  Z'_b = sum_{h in G_b} psi(h, b)

    and the orbit family solved from the disintegration identity.  The
    compatibilities are inherited from psi's own, exactly: conjugation
    permutes each sum.
    """
    action = psi.action
    n, m = action.group.order, action.base_size
    z = psi.values.sum(axis=0)  # (|B|,)
    if np.any(z <= 0):
        b = int(np.flatnonzero(z <= 0)[0])
        raise DegenerateMeasureError(f"psi has no mass at b={b}")
    smask = stabilizer_mask(action)  # (|B|, |G|)
    zs = (psi.values.T * smask).sum(axis=1)  # (|B|,)
    if np.any(zs <= 0):
        b = int(np.flatnonzero(zs <= 0)[0])
        raise DegenerateMeasureError(f"psi has no mass on the stabilizer of b={b}")

    mu = GroupMeasureFamily(action, np.repeat((1.0 / z)[:, None], n, axis=1), haar=True)
    nu = StabilizerMeasureFamily(action, smask.astype(float) / zs[:, None])
    mubar = solve_orbit_family(mu, nu)
    return mu, nu, mubar


def normalization_residual(
    psi: PsiFunction,
    mu: GroupMeasureFamily,
    nu: StabilizerMeasureFamily,
) -> float:
    """Max deviation of the two normalizations sum psi*mu = sum psi*nu = 1."""
    against_mu = np.einsum("hb,bh->b", psi.values, mu.weights) - 1.0
    against_nu = np.einsum("hb,bh->b", psi.values, nu.weights) - 1.0
    return max(_maxabs(against_mu), _maxabs(against_nu))


def restrict_psi_to_delta(psi: PsiFunction, nu: StabilizerMeasureFamily, tolerance: float = 1e-9) -> DeltaFunction:
    """Restrict psi to the stabilizers, checking unit nu-mass first."""
    res = _psi_delta_norm_residual(psi, nu)
    if res > tolerance:
        raise PreconditionError(f"psi restricted to stabilizers has nu-mass off 1 by {res:.3e}")
    vals = np.where(stabilizer_mask(psi.action).T, psi.values, 0.0)
    return DeltaFunction(psi.action, vals)


def _psi_delta_norm_residual(psi: PsiFunction, nu: StabilizerMeasureFamily) -> float:
    mass = np.einsum("hb,bh->b", psi.values, nu.weights)
    return _maxabs(mass - 1.0)


def validate_delta(delta: DeltaFunction, nu: StabilizerMeasureFamily, tolerance: float = 1e-9) -> ValidationReport:
    """Unit mass against nu on each stabilizer, and conjugation compatibility
    delta(g h g^-1, g.b) = delta(h, b)."""
    action = delta.action
    grp = action.group
    report = ValidationReport()

    mass = np.einsum("hb,bh->b", delta.values, nu.weights) - 1.0
    res = _maxabs(mass)
    wit = (int(np.abs(mass).argmax()),) if res > tolerance else None
    report.add(check_from_residual("delta-normalization", res, tolerance, wit))

    worst, witness = 0.0, None
    for g in range(grp.order):
        conj = grp.conjugation_row(g)
        moved = delta.values[np.ix_(conj, action.table[g])]
        diff = moved - delta.values
        r = _maxabs(diff)
        if r > worst:
            worst = r
            h, b = _argmax_coords(diff)
            witness = (g, h, b)
    report.add(check_from_residual("delta-conjugation", worst, tolerance, witness if worst > tolerance else None))
    return report


def dirac_delta(nu: StabilizerMeasureFamily) -> DeltaFunction:
    """delta(h, b) = [h = e] / nu_b(e): the canonical unit-mass density."""
    action = nu.action
    e = action.group.identity
    w = nu.weights[:, e]
    if np.any(w <= 0):
        b = int(np.flatnonzero(w <= 0)[0])
        raise DegenerateMeasureError(f"nu gives the identity no mass at b={b}")
    vals = np.zeros((action.group.order, action.base_size))
    vals[e, :] = 1.0 / w
    return DeltaFunction(action, vals)
