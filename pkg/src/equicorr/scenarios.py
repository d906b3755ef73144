"""Built-in scenarios: concrete actions, bundles, families, kernels, and
theta data ready for the property suite and the CLI.

Finite scenarios
----------------
  cyclic(n)         rotation group acting on itself; free and transitive.
  dihedral(n)       dihedral group on the n vertices of a polygon;
                    2-element stabilizers; optional sign bundle.
  torus(N)          Z_N x Z_N acting on Z_N by (g1, g2).b = g1 + g2 + b;
                    N-element stabilizers {(k, -k)}.
  torus-bands(N)    the torus action with the second coordinate scaled by
                    a band spacing s, (g1, g2).b = g1 + s*g2 + b, carrying
                    a three-band kernel and two competing theta maps.
  circle-grid(n)    the circle discretized to n points with quadrature
                    weight 2*pi/n; equivariance is exact for grid-aligned
                    rotations, and off-grid rotations are reported only.

Grid quadrature
---------------
  line-grid(units, dx) discretizes the line with a window of `units`
  length units and grid step dx.  The window is emulated on a wrap large
  enough that the compactly supported data never reaches the seam, so the
  wrapped computation coincides with the truncated one exactly while
  group axioms stay exactly true.  Its kernel has sharp band edges
  deliberately misaligned with every grid level, so the residual against
  the continuous transform is genuinely first order in dx.

Elements of product groups are packed with the first coordinate cycling
fastest: (a, b) has index b*|A| + a.  Scenario randomness (the default
filter and kernel of the finite scenarios) comes from the seeded
generator with fixed salts, so two builds of the same scenario are
identical.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numpy as np

from .bundles import EquivariantBundle, Section, sign_bundle, trivial_bundle
from .errors import DomainError, StructuralError
from .groups import (
    FiniteGroup,
    GroupAction,
    cyclic_group,
    dihedral_group,
    direct_product,
    pair_stabilizer,
    stabilizer,
)
from .measures import (
    DeltaFunction,
    GroupMeasureFamily,
    OrbitMeasureFamily,
    PsiFunction,
    StabilizerMeasureFamily,
    construct_normalized_families,
    counting_family,
    counting_stabilizer_family,
    dirac_delta,
    orbit_mask,
    psi_indicator_identity,
    solve_orbit_family,
)
from .rng import SplitMix64
from .sampling import random_valid_filter, random_valid_kernel
from .transforms import Kernel, ThetaMap, lift_kernel_to_filter
from .xcorr import Filter

_FILTER_SALT = 0x46494C54
_KERNEL_SALT = 0x4B45524E


@dataclass(eq=False)
class Scenario:
    name: str
    params: dict
    action: GroupAction
    input_bundle: EquivariantBundle
    output_bundle: EquivariantBundle
    mu: GroupMeasureFamily
    nu: StabilizerMeasureFamily
    mubar: OrbitMeasureFamily
    psi: PsiFunction | None = None
    delta: DeltaFunction | None = None
    filt: Filter | None = None
    kernel: Kernel | None = None
    thetas: dict[str, ThetaMap] = field(default_factory=dict)
    extras: dict = field(default_factory=dict)

    @property
    def group(self) -> FiniteGroup:
        return self.action.group


def _families(action: GroupAction, kind: str):
    """Counting or psi-normalized family triple; psi travels along when used."""
    if kind == "counting":
        mu = counting_family(action, 1.0)
        nu = counting_stabilizer_family(action, 1.0)
        return mu, nu, solve_orbit_family(mu, nu), None
    if kind == "normalized-psi":
        psi = psi_indicator_identity(action)
        mu, nu, mubar = construct_normalized_families(psi)
        return mu, nu, mubar, psi
    raise DomainError(f"unknown family kind {kind!r}; use 'counting' or 'normalized-psi'")


def derive_theta(action: GroupAction, support: np.ndarray | None = None) -> ThetaMap:
    """Construct a compatible orbit-map section over the given pair support
    (default: all same-orbit pairs).

    On each diagonal pair orbit a representative k with k.b = c must
    commute with the pair stabilizer of (c, b); the smallest such k seeds
    the orbit and the rest follows by conjugation.  When no candidate
    commutes, no compatible theta exists on that orbit and DomainError
    reports the obstruction; nothing is ever guessed.
    """
    grp = action.group
    m = action.base_size
    if support is None:
        support = orbit_mask(action).T  # [c, b]
    support = np.asarray(support, dtype=bool)
    if support.shape != (m, m):
        raise StructuralError(f"support shape {support.shape}, expected {(m, m)}")
    reps = np.full((m, m), -1, dtype=np.int64)
    seen = np.zeros((m, m), dtype=bool)
    for b in range(m):
        for c in range(m):
            if not support[c, b] or seen[c, b]:
                continue
            ps = pair_stabilizer(action, c, b)
            movers = np.flatnonzero(action.table[:, b] == c)
            k0 = -1
            for k in movers:
                if all(grp.conjugate(int(g), int(k)) == int(k) for g in ps):
                    k0 = int(k)
                    break
            if k0 < 0:
                raise DomainError(
                    f"no orbit-map section is compatible with the pair stabilizer at (c={c}, b={b})"
                )
            for g in range(grp.order):
                gc, gb = action.table[g, c], action.table[g, b]
                if not seen[gc, gb]:
                    reps[gc, gb] = grp.conjugate(g, k0)
                    seen[gc, gb] = True
    return ThetaMap(action, reps)


# ---------------------------------------------------------------------------
# finite scenario builders


def _attach_default_data(scn: Scenario, seed: int) -> None:
    """Deterministic filter, kernel, theta, delta for the finite builders."""
    scn.filt = random_valid_filter(
        scn.input_bundle, scn.output_bundle, SplitMix64(seed ^ _FILTER_SALT), support_per_rep=8
    )
    scn.kernel = random_valid_kernel(scn.input_bundle, scn.output_bundle, SplitMix64(seed ^ _KERNEL_SALT))
    scn.thetas["derived"] = derive_theta(scn.action)
    scn.delta = dirac_delta(scn.nu)


def build_cyclic(n: int, families: str = "counting", seed: int = 0) -> Scenario:
    """Z_n acting on itself by translation."""
    if n < 1:
        raise DomainError("cyclic scenario needs n >= 1")
    grp = cyclic_group(n)
    table = (np.arange(n)[:, None] + np.arange(n)[None, :]) % n
    action = GroupAction(grp, tuple(str(b) for b in range(n)), table)
    e_bundle = trivial_bundle(action, 1)
    mu, nu, mubar, psi = _families(action, families)
    scn = Scenario(f"cyclic({n})", {"n": n, "families": families}, action, e_bundle, e_bundle, mu, nu, mubar, psi)
    _attach_default_data(scn, seed)
    return scn


def dihedral_vertex_action(n: int) -> GroupAction:
    """Dihedral group on polygon vertices: rotations add, reflections negate."""
    grp = dihedral_group(n)
    table = np.zeros((2 * n, n), dtype=np.int64)
    for g in range(2 * n):
        i = g % n
        if g < n:
            table[g] = (np.arange(n) + i) % n
        else:
            table[g] = (i - np.arange(n)) % n
    return GroupAction(grp, tuple(f"v{v}" for v in range(n)), table)


def build_dihedral(n: int, bundle: str = "trivial", families: str = "counting", seed: int = 0) -> Scenario:
    """Dihedral group on n vertices; each vertex has a 2-element stabilizer."""
    if n < 1:
        raise DomainError("dihedral scenario needs n >= 1")
    action = dihedral_vertex_action(n)
    if bundle == "trivial":
        e_bundle = trivial_bundle(action, 1)
    elif bundle == "sign":
        signs = np.concatenate([np.ones(n), -np.ones(n)])
        e_bundle = sign_bundle(action, signs)
    else:
        raise DomainError(f"unknown dihedral bundle {bundle!r}; use 'trivial' or 'sign'")
    mu, nu, mubar, psi = _families(action, families)
    scn = Scenario(
        f"dihedral({n})",
        {"n": n, "bundle": bundle, "families": families},
        action,
        e_bundle,
        e_bundle,
        mu,
        nu,
        mubar,
        psi,
    )
    _attach_default_data(scn, seed)
    return scn


def torus_action(n: int, spacing: int = 1) -> GroupAction:
    """Z_N x Z_N acting on Z_N by (g1, g2).b = g1 + spacing*g2 + b."""
    grp = direct_product(cyclic_group(n), cyclic_group(n))
    ia = np.tile(np.arange(n), n)
    ib = np.repeat(np.arange(n), n)
    table = (ia[:, None] + spacing * ib[:, None] + np.arange(n)[None, :]) % n
    return GroupAction(grp, tuple(str(b) for b in range(n)), table)


def torus_element(n: int, a: int, m2: int) -> int:
    """Index of (a, m2) in the product packing (first coordinate fastest)."""
    return (m2 % n) * n + (a % n)


def torus_coords(n: int, g: int) -> tuple[int, int]:
    return g % n, g // n

def _signed_mod(x: np.ndarray | int, n: int):
    """Wrap to the signed window [-n/2, n/2)."""
    return (np.asarray(x) + n // 2) % n - n // 2


def build_torus(n: int, families: str = "counting", seed: int = 0) -> Scenario:
    """The plain finite torus: stabilizer of every b is {(k, -k)}."""
    if n < 1:
        raise DomainError("torus scenario needs n >= 1")
    action = torus_action(n, 1)
    e_bundle = trivial_bundle(action, 1)
    mu, nu, mubar, psi = _families(action, families)
    scn = Scenario(f"torus({n})", {"n": n, "families": families}, action, e_bundle, e_bundle, mu, nu, mubar, psi)
    _attach_default_data(scn, seed)
    return scn


def _band_profile(i: int, r, eps: int):
    """Deterministic nonzero value on band point (band index i, offset r).

    Stays in [1.0, 3.0] for i, r in range, so the support set is exactly
    the union of the three bands.
    """
    return 2.0 + 0.7 * i + 0.3 * (np.asarray(r) / (eps + 1.0))


def build_torus_bands(
    n: int,
    spacing: int | None = None,
    eps_steps: int = 1,
    families: str = "normalized-psi",
    seed: int = 0,
) -> Scenario:
    """Finite analogue of the banded line kernel on a scaled torus action.

    The kernel is supported, per base point, on three bands of half-width
    eps_steps around displacements -spacing, 0, +spacing; two theta maps
    cover it:

      * theta_global(c, b) = (c - b, 0), support three segments;
      * theta_special(c, b) = (c - b - i*spacing, i) on band i, support a
        full rectangle {-eps..eps} x {-1, 0, 1}.

    Both are valid; they lift the same kernel to visibly different filters
    inducing one and the same transform.  The half-width must stay below a
    quarter of the outer band separation (eps_steps < spacing / 2), and
    the three bands must fit on the circle without touching.
    """
    if n < 4:
        raise DomainError("torus-bands scenario needs n >= 4")
    if spacing is None:
        spacing = n // 4
    if spacing < 1:
        raise DomainError("band spacing must be >= 1")
    if eps_steps < 0:
        raise DomainError("band half-width must be >= 0")
    if not eps_steps < spacing / 2:
        raise DomainError(f"band half-width {eps_steps} must stay below spacing/2 = {spacing / 2}")
    if not (n - 2 * spacing) > 2 * eps_steps:
        raise DomainError("bands overlap around the wrap; increase n or shrink the bands")

    action = torus_action(n, spacing)
    e_bundle = trivial_bundle(action, 1)
    mu, nu, mubar, psi = _families(action, families)

    d = _signed_mod(np.arange(n)[:, None] - np.arange(n)[None, :], n)  # [c, b] displacement
    mats = np.zeros((n, n, 1, 1))
    for i in (-1, 0, 1):
        r = d - i * spacing
        on_band = np.abs(r) <= eps_steps
        mats[:, :, 0, 0] = np.where(on_band, _band_profile(i, r, eps_steps), mats[:, :, 0, 0])
    kern = Kernel(e_bundle, e_bundle, mats)

    theta_global = _torus_theta_global(action, n, kern.support)
    theta_special = _torus_theta_special(action, n, spacing, eps_steps, kern.support)

    scn = Scenario(
        f"torus-bands({n})",
        {"n": n, "spacing": spacing, "eps_steps": eps_steps, "families": families},
        action,
        e_bundle,
        e_bundle,
        mu,
        nu,
        mubar,
        psi,
    )
    scn.kernel = kern
    scn.thetas = {"global": theta_global, "special": theta_special}
    scn.delta = dirac_delta(nu)
    # the scenario's filter is the kernel's own lift along the global theta
    scn.filt = lift_kernel_to_filter(kern, theta_global, scn.delta)
    scn.extras["band_spacing"] = spacing
    scn.extras["eps_steps"] = eps_steps
    return scn


def _torus_theta_global(action: GroupAction, n: int, support: np.ndarray) -> ThetaMap:
    reps = np.full((n, n), -1, dtype=np.int64)
    cs, bs = np.nonzero(support)
    reps[cs, bs] = (cs - bs) % n  # element ((c-b), 0) has index (c-b)
    return ThetaMap(action, reps)


def _torus_theta_special(action: GroupAction, n: int, spacing: int, eps: int, support: np.ndarray) -> ThetaMap:
    reps = np.full((n, n), -1, dtype=np.int64)
    cs, bs = np.nonzero(support)
    d = _signed_mod(cs - bs, n)
    band = np.zeros_like(d)
    for i in (-1, 1):
        band = np.where(np.abs(d - i * spacing) <= eps, i, band)
    a = (d - band * spacing) % n
    reps[cs, bs] = (band % n) * n + a
    return ThetaMap(action, reps)


def theta_builders(scn: Scenario) -> tuple[ThetaMap, ThetaMap]:
    """The (global, special) theta pair of a torus-bands scenario."""
    if "global" not in scn.thetas or "special" not in scn.thetas:
        raise DomainError(f"scenario {scn.name} does not carry the banded theta pair")
    return scn.thetas["global"], scn.thetas["special"]


def banded_support_shapes(scn: Scenario) -> dict[str, set[tuple[int, int]]]:
    """Predicted and actual filter supports of the two lifts at every base
    point, in (spatial, offset) group coordinates relative to b.

    The global theta keeps the offset coordinate at zero, so its lift
    lives on three spatial segments; the special theta spends one offset
    step per band, folding the same kernel into a compact rectangle.
    """
    tg, ts = theta_builders(scn)
    n = scn.params["n"]
    s, eps = scn.extras["band_spacing"], scn.extras["eps_steps"]
    lift_g = lift_kernel_to_filter(scn.kernel, tg, scn.delta)
    lift_s = lift_kernel_to_filter(scn.kernel, ts, scn.delta)
    segments = {(i * s + r, 0) for i in (-1, 0, 1) for r in range(-eps, eps + 1)}
    rectangle = {(r, i) for r in range(-eps, eps + 1) for i in (-1, 0, 1)}
    return {
        "segments-predicted": segments,
        "rectangle-predicted": rectangle,
        "global-observed": _filter_support_coords(lift_g, n, 0),
        "special-observed": _filter_support_coords(lift_s, n, 0),
    }


def _filter_support_coords(filt: Filter, n: int, b: int) -> set[tuple[int, int]]:
    hs = np.flatnonzero(filt.support[:, b])
    return {(int(_signed_mod(h % n, n)), int(_signed_mod(h // n, n))) for h in hs}


def banded_support_mismatch(scn: Scenario) -> int:
    """Total symmetric difference, over every base point, between the
    observed supports of the two lifts and the predicted shapes; zero
    means the support sets are exactly the segments and the rectangle."""
    tg, ts = theta_builders(scn)
    n = scn.params["n"]
    s, eps = scn.extras["band_spacing"], scn.extras["eps_steps"]
    lift_g = lift_kernel_to_filter(scn.kernel, tg, scn.delta)
    lift_s = lift_kernel_to_filter(scn.kernel, ts, scn.delta)
    segments = {(i * s + r, 0) for i in (-1, 0, 1) for r in range(-eps, eps + 1)}
    rectangle = {(r, i) for r in range(-eps, eps + 1) for i in (-1, 0, 1)}
    total = 0
    for b in range(scn.action.base_size):
        total += len(_filter_support_coords(lift_g, n, b) ^ segments)
        total += len(_filter_support_coords(lift_s, n, b) ^ rectangle)
    return total


# ---------------------------------------------------------------------------
# degeneracy demonstration


DEGENERACY_PROFILE = {-1: 0.25, 0: 1.0, 1: 0.5}
DEGENERACY_TEST_FUNCTION = {-1: 0.25, 0: 1.0, 1: 0.5}


def biequivariant_filter(scn: Scenario, profile: dict[int, float] | None = None) -> Filter:
    """A filter on the plain torus that is constant along stabilizer cosets:
    omega(g1, g2) = p((g1 + g2) mod N).

    Such a filter satisfies the faint constraint (the group is abelian and
    the table is base-independent) and additionally the translation
    invariance along stabilizers that forces the degeneracy.
    """
    if profile is None:
        profile = DEGENERACY_PROFILE
    n = scn.params["n"]
    ia = np.tile(np.arange(n), n)
    ib = np.repeat(np.arange(n), n)
    coset = (ia + ib) % n
    vals = np.zeros(n)
    for d, v in profile.items():
        vals[d % n] += v
    mats = np.zeros((n * n, n, 1, 1))
    mats[:, :, 0, 0] = vals[coset][:, None]
    return Filter(scn.input_bundle, scn.output_bundle, mats)


def degeneracy_demo(sizes: list[int]) -> dict:
    """Contrast the bi-equivariant filter with its faintly constrained
    counterpart across torus sizes.

    The bi-equivariant cross-correlation at a fixed point scales linearly
    with the stabilizer size N (the finite signature of the continuous
    divergence), while lifting the same displacement kernel with a Dirac
    density produces an N-independent output.  Returns per-size rows plus
    the two spreads: relative spread of output/N and absolute spread of
    the lifted output.
    """
    from .bundles import section_to_mackey
    from .xcorr import cross_correlate_at_identity

    if any(s < 4 for s in sizes):
        raise DomainError("degeneracy demo needs torus sizes >= 4")
    rows = []
    for n in sizes:
        scn = build_torus(n, families="counting")
        filt = biequivariant_filter(scn)
        fvals = np.zeros((n, 1))
        for d, v in DEGENERACY_TEST_FUNCTION.items():
            fvals[d % n, 0] += v
        f = Section(scn.input_bundle, fvals)
        m = section_to_mackey(f)
        bi = float(cross_correlate_at_identity(filt, m, scn.mu)[0, 0])

        d = _signed_mod(np.arange(n)[:, None] - np.arange(n)[None, :], n)
        mats = np.zeros((n, n, 1, 1))
        for off, v in DEGENERACY_PROFILE.items():
            mats[:, :, 0, 0] += np.where(d == off, v, 0.0)
        kern = Kernel(scn.input_bundle, scn.output_bundle, mats)
        theta = _torus_theta_global(scn.action, n, kern.support)
        lifted = lift_kernel_to_filter(kern, theta, scn.delta)
        faint = float(cross_correlate_at_identity(lifted, m, scn.mu)[0, 0])
        rows.append({"N": n, "biequivariant": bi, "ratio": bi / n, "faint": faint})

    ratios = np.array([r["ratio"] for r in rows])
    faints = np.array([r["faint"] for r in rows])
    ratio_spread = float((ratios.max() - ratios.min()) / max(abs(ratios).max(), 1e-300))
    faint_spread = float(faints.max() - faints.min())
    return {"rows": rows, "ratio_relative_spread": ratio_spread, "faint_absolute_spread": faint_spread}


# ---------------------------------------------------------------------------
# circle grid


def circle_profile(j: np.ndarray, width: int) -> np.ndarray:
    """Smooth taper on signed step distance, nonzero exactly for |j| <= width."""
    inside = np.abs(j) <= width
    return np.where(inside, np.cos(np.pi * j / (2.0 * (width + 1.0))) ** 2, 0.0)


def circle_test_function(x: np.ndarray) -> np.ndarray:
    return np.sin(x) + 0.5 * np.cos(2.0 * x)


def build_circle_grid(n: int, filter_width: int = 2, families: str = "counting", seed: int = 0) -> Scenario:
    """The circle discretized to n grid points, quadrature weight 2*pi/n.

    The filter support spans filter_width grid steps each way and must not
    wrap onto itself (2*filter_width + 1 <= n): the finite picture is
    faithful only while the filter sees less than the full circle.
    """
    if n < 1:
        raise DomainError("circle-grid scenario needs n >= 1")
    if filter_width < 0 or 2 * filter_width + 1 > n:
        raise DomainError("filter width must satisfy 2*width + 1 <= n")
    grp = cyclic_group(n)
    table = (np.arange(n)[:, None] + np.arange(n)[None, :]) % n
    action = GroupAction(grp, tuple(str(b) for b in range(n)), table)
    e_bundle = trivial_bundle(action, 1)
    step = 2.0 * math.pi / n
    if families == "counting":
        mu = counting_family(action, step)
        nu = counting_stabilizer_family(action, 1.0)
        mubar = solve_orbit_family(mu, nu)
        psi = None
    else:
        mu, nu, mubar, psi = _families(action, families)

    j = _signed_mod(np.arange(n), n)
    mats = np.zeros((n, n, 1, 1))
    mats[:, :, 0, 0] = circle_profile(j, filter_width)[:, None]
    filt = Filter(e_bundle, e_bundle, mats)

    scn = Scenario(
        f"circle-grid({n})",
        {"n": n, "filter_width": filter_width, "families": families},
        action,
        e_bundle,
        e_bundle,
        mu,
        nu,
        mubar,
        psi,
    )
    scn.filt = filt
    scn.kernel = None
    scn.thetas["derived"] = derive_theta(action)
    scn.delta = dirac_delta(nu)
    scn.extras["grid_step"] = step
    return scn


def circle_grid_samples(scn: Scenario, angle: float = 0.0) -> Section:
    """The smooth test function rotated by `angle` and sampled on the grid."""
    n = scn.params["n"]
    step = scn.extras["grid_step"]
    x = np.arange(n) * step
    vals = circle_test_function(x - angle)[:, None]
    return Section(scn.input_bundle, vals)


def circle_offgrid_residual(scn: Scenario, angle: float) -> float:
    """Reported-only residual for an off-grid rotation emulated by
    nearest-grid rounding.

    The exactly rotated samples are cross-correlated and compared with the
    nearest-grid translate of the unrotated output; the gap decays like
    1/n for the fixed smooth test function.  Nothing asserts on this.
    """
    from .bundles import section_to_mackey
    from .xcorr import cross_correlate_at_identity

    n = scn.params["n"]
    step = scn.extras["grid_step"]
    nearest = int(round(angle / step)) % n
    f0 = circle_grid_samples(scn, 0.0)
    fa = circle_grid_samples(scn, angle)
    out0 = cross_correlate_at_identity(scn.filt, section_to_mackey(f0), scn.mu)[:, 0]
    outa = cross_correlate_at_identity(scn.filt, section_to_mackey(fa), scn.mu)[:, 0]
    shifted = np.roll(out0, nearest)  # translate by the nearest grid rotation
    return float(np.abs(outa - shifted).max())


# ---------------------------------------------------------------------------
# line grid


LINE_BAND_EPS = 1.0 / 3.0
LINE_BAND_WEIGHTS = {-1: 0.8, 0: 1.0, 1: 0.6}
LINE_SUPPORT_HALF_WIDTH = 2.0  # of the smooth test function


def line_test_function(x: np.ndarray) -> np.ndarray:
    """Smooth compactly supported bump: cos^2 taper on [-W, W]."""
    w = LINE_SUPPORT_HALF_WIDTH
    inside = np.abs(x) <= w
    return np.where(inside, np.cos(np.pi * x / (2.0 * w)) ** 2, 0.0)


def line_test_antiderivative(x: float) -> float:
    w = LINE_SUPPORT_HALF_WIDTH
    x = min(max(x, -w), w)
    return x / 2.0 + (w / (2.0 * math.pi)) * math.sin(math.pi * x / w)


def line_band_kernel_value(d: np.ndarray) -> np.ndarray:
    """Sharp-edged three-band profile at physical displacement d."""
    out = np.zeros_like(np.asarray(d, dtype=float))
    for i, w in LINE_BAND_WEIGHTS.items():
        out = np.where(np.abs(d - i) <= LINE_BAND_EPS, w, out)
    return out


def continuous_line_transform() -> float:
    """Closed form of the transform at the origin: sum_i w_i * int_{i-eps}^{i+eps} f."""
    total = 0.0
    for i, w in LINE_BAND_WEIGHTS.items():
        total += w * (line_test_antiderivative(i + LINE_BAND_EPS) - line_test_antiderivative(i - LINE_BAND_EPS))
    return total


def build_line_grid(units: int = 6, dx: float = 0.1, families: str = "counting", seed: int = 0) -> Scenario:
    """Grid discretization of the banded line transform.

    The base is a window of `units` length units at step dx; the group is
    (window grid) x Z_units, acting by g1 + u*g2 + b with u = 1/dx steps
    per unit, so the second factor walks the integer offsets and the
    stabilizer has `units` elements, the finite stand-in for the integer
    stabilizer of the continuous picture.  All compactly supported data
    lives well inside the window, so the wrapped tables agree exactly
    with the truncated computation they emulate.

    The measure weights are the quadrature ones: dx per group element, a
    counting stabilizer family, and dx per base point for the orbit
    family (solved, not assumed).
    """
    if units < 5:
        raise DomainError("line-grid window must span at least 5 units")
    u = round(1.0 / dx)
    if u < 2 or abs(u * dx - 1.0) > 1e-9:
        raise DomainError(f"grid step {dx} must divide the unit length exactly")
    m = units * u  # base points
    spatial = cyclic_group(m)
    offsets = cyclic_group(units)
    grp = direct_product(spatial, offsets)
    ia = np.tile(np.arange(m), units)
    ib = np.repeat(np.arange(units), m)
    table = (ia[:, None] + u * ib[:, None] + np.arange(m)[None, :]) % m
    action = GroupAction(grp, tuple(str(b) for b in range(m)), table)
    e_bundle = trivial_bundle(action, 1)

    if families != "counting":
        raise DomainError("line-grid carries quadrature weights; only counting families apply")
    mu = counting_family(action, dx)
    nu = counting_stabilizer_family(action, 1.0)
    mubar = solve_orbit_family(mu, nu)

    d_steps = _signed_mod(np.arange(m)[:, None] - np.arange(m)[None, :], m)
    mats = np.zeros((m, m, 1, 1))
    mats[:, :, 0, 0] = line_band_kernel_value(d_steps * dx)
    kern = Kernel(e_bundle, e_bundle, mats)

    reps = np.full((m, m), -1, dtype=np.int64)
    cs, bs = np.nonzero(kern.support)
    reps[cs, bs] = (cs - bs) % m  # ((c-b), 0)
    theta = ThetaMap(action, reps)

    scn = Scenario(
        f"line-grid({units},{dx})",
        {"units": units, "dx": dx, "families": families},
        action,
        e_bundle,
        e_bundle,
        mu,
        nu,
        mubar,
    )
    scn.kernel = kern
    scn.thetas["global"] = theta
    scn.delta = dirac_delta(nu)
    scn.extras["dx"] = dx
    scn.extras["origin"] = 0
    return scn


def line_grid_sample_function(scn: Scenario) -> Section:
    m = scn.action.base_size
    dx = scn.extras["dx"]
    x = _signed_mod(np.arange(m), m) * dx
    return Section(scn.input_bundle, line_test_function(x)[:, None])


def line_grid_oracle_residual(scn: Scenario) -> float:
    """Gap between the grid computation and the continuous transform at the
    origin.

    The grid side goes through the full machinery: lift the sampled kernel
    along theta, cross-correlate the induced Mackey section, read off the
    identity slice.  The continuous side is the closed-form integral.  The
    gap is pure quadrature error, first order in dx because the band edges
    never align with the grid.
    """
    from .bundles import section_to_mackey
    from .xcorr import cross_correlate_at_identity

    f = line_grid_sample_function(scn)
    lifted = lift_kernel_to_filter(scn.kernel, scn.thetas["global"], scn.delta)
    out = cross_correlate_at_identity(lifted, section_to_mackey(f), scn.mu)
    return abs(float(out[scn.extras["origin"], 0]) - continuous_line_transform())


def line_grid_ladder(levels: int = 4, dx0: float = 0.1, units: int = 6) -> list[float]:
    """Oracle residuals across a 2x refinement ladder, coarse to fine."""
    return [line_grid_oracle_residual(build_line_grid(units, dx0 / 2**j)) for j in range(levels)]


# ---------------------------------------------------------------------------
# scenario spec parsing


_BUILDERS = {
    "cyclic": build_cyclic,
    "dihedral": build_dihedral,
    "torus": build_torus,
    "torus-bands": build_torus_bands,
    "circle-grid": build_circle_grid,
    "line-grid": build_line_grid,
}

_SPEC_RE = re.compile(r"^\s*([a-z][a-z0-9-]*)\s*\(\s*(.*?)\s*\)\s*$")


def is_scenario_spec(text: str) -> bool:
    return _SPEC_RE.match(text) is not None


def build_scenario(spec: str, **overrides) -> Scenario:
    """Build a built-in scenario from a spec string like 'torus-bands(16)'
    or 'dihedral(4, bundle=sign)'.  Keyword overrides win over the spec."""
    m = _SPEC_RE.match(spec)
    if not m:
        raise DomainError(f"not a scenario spec: {spec!r}")
    name, argtext = m.group(1), m.group(2)
    if name not in _BUILDERS:
        raise DomainError(f"unknown scenario {name!r}; known: {sorted(_BUILDERS)}")
    args: list = []
    kwargs: dict = {}
    if argtext:
        for part in argtext.split(","):
            part = part.strip()
            if not part:
                continue
            if "=" in part:
                key, val = part.split("=", 1)
                kwargs[key.strip()] = _parse_value(val.strip())
            else:
                args.append(_parse_value(part))
    kwargs.update(overrides)
    return _BUILDERS[name](*args, **kwargs)


def _parse_value(text: str):
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        pass
    return text.strip("'\"")
