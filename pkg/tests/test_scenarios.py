from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from equicorr.errors import DomainError
from equicorr.groups import GroupAction, dihedral_group
from equicorr.scenarios import (
    DEGENERACY_PROFILE,
    DEGENERACY_TEST_FUNCTION,
    LINE_BAND_EPS,
    LINE_BAND_WEIGHTS,
    banded_support_mismatch,
    banded_support_shapes,
    build_circle_grid,
    build_dihedral,
    build_line_grid,
    build_scenario,
    build_torus_bands,
    circle_offgrid_residual,
    continuous_line_transform,
    degeneracy_demo,
    derive_theta,
    is_scenario_spec,
    line_grid_ladder,
    line_grid_oracle_residual,
    line_test_function,
)
from equicorr.transforms import validate_theta


# ---------------------------------------------------------------------------
# spec strings and builder preconditions


def test_spec_parsing_round_trips_names():
    assert is_scenario_spec("torus-bands(16)")
    assert is_scenario_spec("dihedral(4, bundle=sign)")
    assert not is_scenario_spec("just words")
    scn = build_scenario("dihedral(4, bundle=sign, families=normalized-psi)")
    assert scn.params["bundle"] == "sign"
    assert scn.psi is not None
    assert build_scenario("cyclic(6)").name == "cyclic(6)"


def test_spec_overrides_win():
    a = build_scenario("cyclic(6)")
    b = build_scenario("cyclic(6)", seed=3)
    assert not np.array_equal(a.filt.matrices, b.filt.matrices)


@pytest.mark.parametrize(
    "spec",
    [
        "cyclic(0)",
        "dihedral(4, bundle=weird)",
        "torus-bands(4)",  # default half-width no longer fits under spacing/2
        "torus-bands(16, eps_steps=2)",
        "line-grid(4)",
        "line-grid(6, dx=0.3)",  # 0.3 does not divide the unit length
        "line-grid(6, families=normalized-psi)",
        "circle-grid(4, filter_width=2)",
        "nonesuch(3)",
        "not a spec",
    ],
)
def test_builder_rejections(spec):
    with pytest.raises(DomainError):
        build_scenario(spec)


# ---------------------------------------------------------------------------
# theta derivation


@settings(max_examples=12, deadline=None)
@given(st.integers(min_value=1, max_value=12))
def test_derived_theta_validates_on_cyclic(n):
    scn = build_scenario(f"cyclic({n})")
    assert validate_theta(scn.thetas["derived"], scn.kernel).passed


def test_derived_theta_validates_on_odd_dihedral():
    scn = build_dihedral(5)
    assert validate_theta(scn.thetas["derived"], scn.kernel).passed


def test_derived_theta_recovers_global_on_bands():
    # the smallest compatible mover on the scaled torus keeps the offset
    # coordinate at zero, which is exactly the global section
    scn = build_torus_bands(16)
    derived = derive_theta(scn.action, scn.kernel.support)
    assert np.array_equal(derived.reps, scn.thetas["global"].reps)


def test_derivation_obstruction_reported():
    # dihedral(4) on the two diagonals: every mover between the diagonals
    # fails to commute with the shared order-4 pair stabilizer
    grp = dihedral_group(4)
    table = np.zeros((8, 2), dtype=np.int64)
    for g in range(8):
        i = g % 4
        table[g] = (i + np.arange(2)) % 2
    action = GroupAction(grp, ("d0", "d1"), table)
    with pytest.raises(DomainError):
        derive_theta(action)


# ---------------------------------------------------------------------------
# banded torus supports


def test_band_supports_match_predictions_exactly(bands16):
    shapes = banded_support_shapes(bands16)
    assert shapes["global-observed"] == shapes["segments-predicted"]
    assert shapes["special-observed"] == shapes["rectangle-predicted"]
    assert len(shapes["segments-predicted"]) == 9
    assert len(shapes["rectangle-predicted"]) == 9
    assert shapes["segments-predicted"] != shapes["rectangle-predicted"]
    assert banded_support_mismatch(bands16) == 0


def test_band_supports_other_sizes():
    assert banded_support_mismatch(build_torus_bands(12, spacing=3, eps_steps=1)) == 0
    assert banded_support_mismatch(build_torus_bands(20)) == 0


# ---------------------------------------------------------------------------
# degeneracy contrast


def test_degeneracy_rows_match_hand_arithmetic():
    expected = sum(DEGENERACY_PROFILE[d] * DEGENERACY_TEST_FUNCTION[d] for d in DEGENERACY_PROFILE)
    assert expected == 1.3125
    demo = degeneracy_demo([4, 8, 16])
    for row in demo["rows"]:
        assert row["biequivariant"] == pytest.approx(row["N"] * expected, abs=1e-12)
        assert row["ratio"] == pytest.approx(expected, abs=1e-12)
        assert row["faint"] == pytest.approx(expected, abs=1e-12)
    assert demo["ratio_relative_spread"] < 1e-12
    assert demo["faint_absolute_spread"] < 1e-12


def test_degeneracy_rejects_tiny_sizes():
    with pytest.raises(DomainError):
        degeneracy_demo([2, 8])


# ---------------------------------------------------------------------------
# line grid quadrature


def simpson(f, a: float, b: float, panels: int = 400) -> float:
    x = np.linspace(a, b, 2 * panels + 1)
    w = np.ones_like(x)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return float((b - a) / (6.0 * panels) * (w * f(x)).sum())


def test_continuous_transform_against_simpson():
    total = 0.0
    for i, wt in LINE_BAND_WEIGHTS.items():
        lo, hi = max(i - LINE_BAND_EPS, -2.0), min(i + LINE_BAND_EPS, 2.0)
        if hi > lo:
            total += wt * simpson(line_test_function, lo, hi)
    assert continuous_line_transform() == pytest.approx(total, abs=1e-10)
    assert continuous_line_transform() == pytest.approx(1.1183098861837906, abs=1e-12)


def test_line_grid_machinery_matches_direct_sum():
    # independent of the lift/xcorr path: plain weighted sample sum
    scn = build_line_grid(6, 0.05)
    dx = scn.extras["dx"]
    m = scn.action.base_size
    d = np.arange(m)
    d = np.where(d > m // 2, d - m, d).astype(float)
    q = np.zeros(m)
    for i, wt in LINE_BAND_WEIGHTS.items():
        q += wt * (np.abs(d * dx - i) <= LINE_BAND_EPS + 1e-12)
    direct = float((q * line_test_function(d * dx)).sum() * dx)
    gap = abs(direct - continuous_line_transform())
    assert abs(line_grid_oracle_residual(scn) - gap) < 1e-12


def test_line_grid_ladder_halves_the_residual():
    ladder = line_grid_ladder(4)
    assert ladder[0] == pytest.approx(0.054665251924075564, rel=1e-9)
    for coarse, fine in zip(ladder, ladder[1:]):
        assert 1.4 <= coarse / fine <= 2.6


# ---------------------------------------------------------------------------
# circle grid


def test_grid_aligned_rotation_is_exact():
    scn = build_circle_grid(16)
    step = scn.extras["grid_step"]
    for k in (1, 3, 7):
        assert circle_offgrid_residual(scn, k * step) < 1e-12


def test_offgrid_residual_decays_with_refinement():
    coarse = circle_offgrid_residual(build_circle_grid(16), 0.7)
    fine = circle_offgrid_residual(build_circle_grid(128), 0.7)
    assert coarse > 1e-3  # genuinely off the grid
    assert fine < coarse / 4.0
