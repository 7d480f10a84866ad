"""Half-space lift, energy, and calibration checks.

Kernel cell integrals are compared against adaptive quadrature of the
literal integrand; calibration quality is judged against the interval
closed form 2 L^(1-s) / (s (1-s)).
"""

import math

import numpy as np
import pytest
from scipy import integrate

import fracperim as fp
from fracperim.extension import (
    _poisson_table_1d,
    _poisson_table_2d,
    _slab_weight,
)
from oracles import interval_union_perimeter


def lift_shape(shape, dim, h, s=0.5, **domain_kw):
    params = fp.KernelParams(dim, s)
    e = fp.rasterize(shape, fp.auto_spec(shape, h))
    grid, embedded = fp.extension_domain(e, **domain_kw)
    return fp.poisson_extend(embedded, grid, params), embedded


# ---------------------------------------------------------------- constants


def test_lambda_value_matches_independent_gamma_evaluation():
    want = math.gamma(0.75) / (math.sqrt(math.pi) * math.gamma(0.25))
    got = fp.lambda_constant(fp.KernelParams(1, 0.5))
    assert got == pytest.approx(want, rel=1e-14)


def test_lambda_value_2d_closed_form():
    # Gamma(1 + s/2) = (s/2) Gamma(s/2) collapses the ratio to s/(2 pi).
    for s in (0.25, 0.5, 0.75):
        got = fp.lambda_constant(fp.KernelParams(2, s))
        assert got == pytest.approx(s / (2 * math.pi), rel=1e-14)


def test_lambda_positive_across_s():
    for dim in (1, 2):
        for s in (0.01, 0.3, 0.99):
            assert fp.lambda_constant(fp.KernelParams(dim, s)) > 0.0


def test_kernel_mass_is_one_at_arbitrary_centers():
    rng = np.random.default_rng(7)
    for _ in range(5):
        x = float(rng.uniform(-5, 5))
        z = float(rng.uniform(0.01, 4.0))
        mass = fp.poisson_kernel_mass(fp.KernelParams(1, 0.5), x, z)
        assert mass == pytest.approx(1.0, abs=1e-9)
    for _ in range(5):
        x = tuple(rng.uniform(-5, 5, size=2))
        z = float(rng.uniform(0.01, 4.0))
        mass = fp.poisson_kernel_mass(fp.KernelParams(2, 0.75), x, z)
        assert mass == pytest.approx(1.0, abs=1e-9)


def test_kernel_mass_rejects_zero_height():
    with pytest.raises(ValueError):
        fp.poisson_kernel_mass(fp.KernelParams(1, 0.5), 0.0, 0.0)


# ------------------------------------------------------------ kernel tables


def test_poisson_table_1d_matches_adaptive_quadrature():
    h, s = 1 / 16, 0.5
    for z in (h / 4, h, 2.0):
        table = _poisson_table_1d(s, h, z, 6)
        for d in (-6, -1, 0, 3):
            f = lambda w: z**s * (w * w + z * z) ** (-0.5 * (1 + s))
            want, _ = integrate.quad(f, (d - 0.5) * h, (d + 0.5) * h)
            assert table[d + 6] == pytest.approx(want, rel=1e-12)


def test_poisson_table_2d_matches_adaptive_quadrature():
    h, s = 1 / 16, 0.5
    z = h / 4
    table = _poisson_table_2d(s, h, z, 8, 8)
    f = lambda w2, w1: z**s * (w1 * w1 + w2 * w2 + z * z) ** (-0.5 * (2 + s))
    for d in ((0, 0), (1, 0), (1, 1), (3, 2), (8, 5)):
        want, _ = integrate.dblquad(
            f,
            (d[0] - 0.5) * h,
            (d[0] + 0.5) * h,
            (d[1] - 0.5) * h,
            (d[1] + 0.5) * h,
            epsabs=1e-13,
            epsrel=1e-11,
        )
        got = table[d[0] + 8, d[1] + 8]
        assert got == pytest.approx(want, rel=5e-5)


def test_table_mass_stays_below_one():
    params = fp.KernelParams(1, 0.5)
    lam = fp.lambda_constant(params)
    h, s = 1 / 8, 0.5
    w_max = 400.5 * h
    for z in (h / 4, 1.0):
        total = lam * _poisson_table_1d(s, h, z, 400).sum()
        # window mass misses at most the algebraic tail beyond w_max
        tail_bound = 2 * lam * z**s * w_max ** (-s) / s
        assert total < 1.0
        assert 1.0 - total < tail_bound


# ------------------------------------------------------------- grid objects


def test_half_space_grid_validation():
    base = fp.GridSpec(1, (8,), 0.125, (0.0,))
    with pytest.raises(ValueError):
        fp.HalfSpaceGrid(base, ())
    with pytest.raises(ValueError, match="trace"):
        fp.HalfSpaceGrid(base, (0.0, 0.1))
    with pytest.raises(ValueError):
        fp.HalfSpaceGrid(base, (0.1, 0.1))
    with pytest.raises(ValueError):
        fp.HalfSpaceGrid(base, (0.25,))  # above one cell width
    grid = fp.HalfSpaceGrid(base, (0.03125, 0.05, 0.1))
    assert grid.level_count == 3


def test_geometric_levels_cover_the_top():
    levels = fp.geometric_levels(0.25, 1.5, 4.0)
    assert levels[0] == 0.25
    assert levels[-1] >= 4.0
    assert levels[-2] < 4.0
    ratios = [b / a for a, b in zip(levels, levels[1:])]
    assert all(r == pytest.approx(1.5, rel=1e-12) for r in ratios)
    with pytest.raises(ValueError):
        fp.geometric_levels(0.0, 1.5, 4.0)
    with pytest.raises(ValueError):
        fp.geometric_levels(0.25, 1.0, 4.0)


def test_extension_domain_geometry():
    h = 1 / 16
    shape = fp.Interval(0.0, 1.0)
    e = fp.rasterize(shape, fp.auto_spec(shape, h))
    grid, embedded = fp.extension_domain(e)
    # same physical cells after re-embedding
    assert embedded.cell_count == e.cell_count
    old = {round(c / h) for (c,) in map(tuple, e.spec.centers()[e.occupancy])}
    new = {round(c / h) for (c,) in map(tuple, grid.base.centers()[embedded.occupancy])}
    assert old == new
    # lateral dilation by at least four raster diameters on each side
    box = embedded.bounding_cells()[0]
    extent = (box[1] - box[0] + 1) * h
    assert box[0] * h >= 4.0 * extent
    assert (grid.base.cells[0] - 1 - box[1]) * h >= 4.0 * extent
    assert grid.z_levels[0] == pytest.approx(h / 4)
    assert grid.z_levels[-1] >= 8.0 * extent
    with pytest.raises(fp.EmptySetError):
        fp.extension_domain(fp.GridSet.empty(e.spec))


# ------------------------------------------------------------------- lifts


def test_lift_of_interval_basic_properties():
    u, embedded = lift_shape(fp.Interval(0.0, 1.0), 1, 1 / 16)
    vals = u.values
    assert vals.min() >= 0.0
    assert vals.max() < 1.0  # strict maximum principle
    mid = int(np.argwhere(embedded.occupancy).mean())
    # center of the set at z0: misses only the two fat s=1/2 side tails
    assert vals[0, mid] > 0.8
    assert vals[-1].max() < 0.05  # decayed at the top
    # decay in |x| at fixed z
    row = vals[0]
    occ_idx = np.argwhere(embedded.occupancy).ravel()
    left, right = occ_idx.min(), occ_idx.max()
    assert np.all(np.diff(row[: left + 1]) >= -1e-15)
    assert np.all(np.diff(row[right:]) <= 1e-15)


def test_lift_symmetry_matches_set_symmetry():
    u, _ = lift_shape(fp.Interval(-1.0, 1.0), 1, 1 / 8)
    for j in (0, 5, u.grid.level_count - 1):
        row = u.values[j]
        assert np.max(np.abs(row - row[::-1])) < 1e-12


def test_lift_threads_do_not_change_bytes():
    params = fp.KernelParams(1, 0.5)
    shape = fp.Interval(0.0, 1.0)
    e = fp.rasterize(shape, fp.auto_spec(shape, 1 / 8))
    grid, embedded = fp.extension_domain(e)
    u1 = fp.poisson_extend(embedded, grid, params, threads=1)
    u2 = fp.poisson_extend(embedded, grid, params, threads=3)
    assert np.array_equal(u1.values, u2.values)


def test_empty_set_lifts_to_zero_field():
    base = fp.GridSpec(1, (32,), 0.125, (-2.0,))
    grid = fp.HalfSpaceGrid(base, (0.03125, 0.06, 0.12, 0.25))
    u = fp.poisson_extend(fp.GridSet.empty(base), grid, fp.KernelParams(1, 0.5))
    assert np.all(u.values == 0.0)
    assert fp.extension_energy(u).total == 0.0


def test_lift_rejects_foreign_spec():
    params = fp.KernelParams(1, 0.5)
    shape = fp.Interval(0.0, 1.0)
    e = fp.rasterize(shape, fp.auto_spec(shape, 1 / 8))
    grid, _ = fp.extension_domain(e)
    with pytest.raises(fp.GridMismatchError):
        fp.poisson_extend(e, grid, params)


def test_field_validation_and_immutability():
    base = fp.GridSpec(1, (4,), 0.25, (0.0,))
    grid = fp.HalfSpaceGrid(base, (0.0625, 0.125))
    datum = np.array([0, 1, 1, 0], dtype=bool)
    good = fp.ExtensionField(grid, fp.KernelParams(1, 0.5), np.zeros((2, 4)), datum)
    with pytest.raises(AttributeError):
        good.values = None
    assert not good.values.flags.writeable
    with pytest.raises(fp.GridMismatchError):
        fp.ExtensionField(grid, fp.KernelParams(1, 0.5), np.zeros((3, 4)), datum)
    with pytest.raises(fp.GridMismatchError):
        fp.ExtensionField(grid, fp.KernelParams(2, 0.5), np.zeros((2, 4)), datum)
    with pytest.raises(ValueError):
        fp.ExtensionField(
            grid, fp.KernelParams(1, 0.5), np.full((2, 4), 1.5), datum
        )
    bad = np.zeros((2, 4))
    bad[1, 1] = np.nan
    with pytest.raises(ValueError):
        fp.ExtensionField(grid, fp.KernelParams(1, 0.5), bad, datum)


# ------------------------------------------------------------------ energy


def test_slab_weight_matches_quadrature():
    for s in (0.25, 0.75):
        for a, b in ((0.0, 0.1), (0.2, 0.7)):
            want, _ = integrate.quad(lambda t: t ** (1 - s), a, b)
            assert _slab_weight(a, b, s) == pytest.approx(want, rel=1e-12)


@pytest.mark.filterwarnings("ignore::fracperim.extension.TruncationWarning")
def test_energy_of_hand_assembled_field():
    # Two cells, two levels, datum (1, 0); every term written out by hand.
    # The toy field is truncated on purpose, so the decay warning is expected.
    h, s = 0.5, 0.5
    base = fp.GridSpec(1, (2,), h, (0.0,))
    z1, z2 = 0.125, 0.375
    grid = fp.HalfSpaceGrid(base, (z1, z2))
    datum = np.array([True, False])
    vals = np.array([[0.8, 0.2], [0.5, 0.3]])
    u = fp.ExtensionField(grid, fp.KernelParams(1, s), vals, datum)
    en = fp.extension_energy(u)

    mid = 0.5 * (z1 + z2)
    w_lo = _slab_weight(0.0, mid, s)
    w_hi = _slab_weight(mid, z2, s)
    x_want = w_lo * h * (0.6 / h) ** 2 + w_hi * h * (0.2 / h) ** 2
    w0 = _slab_weight(0.0, z1, s)
    w1 = _slab_weight(z1, z2, s)
    z_want = (
        w0 * h * ((0.2 / z1) ** 2 + (0.2 / z1) ** 2)
        + w1 * h * ((0.3 / (z2 - z1)) ** 2 + (0.1 / (z2 - z1)) ** 2)
    )
    assert en.x_part == pytest.approx(x_want, rel=1e-12)
    assert en.z_part == pytest.approx(z_want, rel=1e-12)
    assert en.total == pytest.approx(x_want + z_want, rel=1e-12)


@pytest.mark.filterwarnings("ignore::fracperim.extension.TruncationWarning")
def test_energy_quadratic_in_field_values():
    base = fp.GridSpec(1, (16,), 0.25, (0.0,))
    grid = fp.HalfSpaceGrid(base, (0.0625, 0.125, 0.25, 0.5))
    x = np.linspace(0, 1, 16)
    bump = np.exp(-10 * (x - 0.5) ** 2)
    vals = np.stack([bump * w for w in (0.8, 0.5, 0.3, 0.1)])
    datum = np.zeros(16, dtype=bool)
    params = fp.KernelParams(1, 0.5)
    e1 = fp.extension_energy(fp.ExtensionField(grid, params, vals, datum))
    e2 = fp.extension_energy(fp.ExtensionField(grid, params, 0.5 * vals, datum))
    assert e2.total == pytest.approx(0.25 * e1.total, rel=1e-12)
    assert e2.x_part == pytest.approx(0.25 * e1.x_part, rel=1e-12)
    assert e2.z_part == pytest.approx(0.25 * e1.z_part, rel=1e-12)


def test_truncation_warning_on_cramped_domain():
    with pytest.warns(fp.TruncationWarning):
        u, _ = lift_shape(
            fp.Interval(0.0, 1.0), 1, 1 / 8, lateral_factor=0.4, top_factor=0.4
        )
        fp.extension_energy(u)


def test_comfortable_domain_reports_small_truncation():
    u, _ = lift_shape(fp.Interval(0.0, 1.0), 1, 1 / 16)
    en = fp.extension_energy(u)
    assert en.truncation_estimate < 0.01 * en.total


# ------------------------------------------------------------- calibration


def test_calibrate_gamma_against_interval_closed_form():
    params = fp.KernelParams(1, 0.5)
    registry = fp.ConstantsRegistry()
    with pytest.raises(fp.CalibrationError):
        registry.gamma_value(params)
    gamma = fp.calibrate_gamma(
        fp.Interval(0.0, 2.0),
        fp.Interval(0.0, 1.0),
        params,
        1 / 32,
        registry=registry,
    )
    assert gamma > 0.0
    rec = registry.gamma_record(params)
    assert rec.value == gamma
    assert "interval" in rec.reference
    assert rec.residual < 0.02

    # predicted perimeter of an edge-aligned unit interval vs the closed
    # form; edge alignment keeps the raster measure exactly 1
    h = 1 / 32
    spec = fp.GridSpec(1, (48,), h, (-0.25,))
    e = fp.rasterize(fp.Interval(0.0, 1.0), spec)
    assert e.measure == pytest.approx(1.0, abs=1e-12)
    grid, embedded = fp.extension_domain(e)
    u = fp.poisson_extend(embedded, grid, params)
    predicted = 0.5 * gamma * fp.extension_energy(u).total
    closed = interval_union_perimeter(((0.0, 1.0),), 0.5)
    assert predicted == pytest.approx(closed, rel=0.02)


def test_gamma_independent_of_reference_length():
    params = fp.KernelParams(1, 0.5)
    g_short = fp.calibrate_gamma(
        fp.Interval(0.0, 1.0), fp.Interval(0.0, 2.0), params, 1 / 32
    )
    g_long = fp.calibrate_gamma(
        fp.Interval(0.0, 4.0), fp.Interval(0.0, 2.0), params, 1 / 32
    )
    assert g_short == pytest.approx(g_long, rel=0.02)


def test_calibration_failure_raises():
    params = fp.KernelParams(1, 0.5)
    with pytest.raises(fp.CalibrationError, match="residual"):
        fp.calibrate_gamma(
            fp.Interval(0.0, 2.0),
            fp.Interval(0.0, 1.0),
            params,
            1 / 32,
            rtol=1e-7,
        )


def test_registry_limit_constants():
    registry = fp.ConstantsRegistry()
    with pytest.raises(KeyError):
        registry.limit_constant(2)
    registry.record_limit_constant(2, 1.98, source="sweep at s=0.99")
    value, source = registry.limit_constant(2)
    assert value == 1.98 and "sweep" in source
    with pytest.raises(ValueError):
        registry.record_limit_constant(1, -1.0, source="bad")


# ---------------------------------------------------------- rearrangement


def test_horizontal_rearrange_preserves_level_multisets():
    shape = fp.UnionShape((fp.Interval(0.0, 0.8), fp.Interval(1.5, 2.7)))
    u, _ = lift_shape(shape, 1, 1 / 16)
    star = fp.horizontal_rearrange(u)
    for j in (0, 3, u.grid.level_count - 1):
        assert np.array_equal(
            np.sort(u.values[j].ravel()), np.sort(star.values[j].ravel())
        )
    # datum becomes the centered ball with the same count
    assert star.datum.sum() == u.datum.sum()
    d = star.datum
    assert np.array_equal(d, d[::-1]) or abs(int(d.sum())) % 2 == 0


def test_horizontal_rearrange_idempotent():
    shape = fp.UnionShape((fp.Interval(0.0, 0.8), fp.Interval(1.5, 2.7)))
    u, _ = lift_shape(shape, 1, 1 / 16)
    once = fp.horizontal_rearrange(u)
    twice = fp.horizontal_rearrange(once)
    assert np.array_equal(once.values, twice.values)
    assert np.array_equal(once.datum, twice.datum)


def test_rearranged_lift_does_not_gain_energy():
    shape = fp.UnionShape((fp.Interval(0.0, 0.8), fp.Interval(1.5, 2.7)))
    u, _ = lift_shape(shape, 1, 1 / 32)
    star = fp.horizontal_rearrange(u)
    before = fp.extension_energy(u)
    after = fp.extension_energy(star)
    assert after.x_part <= before.x_part + 1e-12 * before.total
    assert after.z_part <= before.z_part + 1e-12 * before.total
    assert after.total <= before.total + 1e-12 * before.total


# ------------------------------------------------------------------- trace


def test_trace_distances_decrease_toward_bottom():
    h = 1 / 16
    u, _ = lift_shape(fp.Interval(0.0, 1.0), 1, h)
    dist = fp.trace_check(u)
    assert dist.shape == (u.grid.level_count,)
    assert np.all(np.diff(dist) > 0)  # grows with z, shrinks toward z0
    # half-layer bound: two endpoints, half a cell each
    assert dist[0] < math.sqrt(h)


def test_trace_needs_four_levels():
    base = fp.GridSpec(1, (8,), 0.25, (0.0,))
    grid = fp.HalfSpaceGrid(base, (0.0625, 0.125, 0.25))
    u = fp.ExtensionField(
        grid, fp.KernelParams(1, 0.5), np.zeros((3, 8)), np.zeros(8, bool)
    )
    with pytest.raises(ValueError):
        fp.trace_check(u)


def test_trace_resolution_refinement_shrinks_bottom_distance():
    d_coarse = fp.trace_check(lift_shape(fp.Interval(0.0, 1.0), 1, 1 / 16)[0])[0]
    d_fine = fp.trace_check(lift_shape(fp.Interval(0.0, 1.0), 1, 1 / 32)[0])[0]
    assert d_fine < d_coarse


def test_trace_against_wrong_target_stays_bounded_below():
    u, embedded = lift_shape(fp.Interval(0.0, 1.0), 1, 1 / 16)
    other = fp.rasterize(fp.Interval(3.0, 4.0), u.grid.base)
    dist = fp.trace_check(u, other)
    assert dist[0] > 0.5  # distinct indicators keep L2 distance away from 0


def test_rearranged_trace_approaches_centered_ball():
    h = 1 / 32
    shape = fp.UnionShape((fp.Interval(0.0, 0.8), fp.Interval(1.5, 2.7)))
    u, _ = lift_shape(shape, 1, h)
    star = fp.horizontal_rearrange(u)
    dist = fp.trace_check(star)  # default target: the rearranged datum
    assert np.all(np.diff(dist) > 0)
    # the union has four endpoints worth of transition layer
    assert dist[0] < 2.0 * math.sqrt(h)


# ------------------------------------------------------------ serialization


def test_fracext_round_trip(tmp_path):
    u, _ = lift_shape(fp.Interval(0.0, 0.5), 1, 1 / 8)
    path = tmp_path / "lift.fracext"
    fp.save_extension(u, path)
    back = fp.load_extension(path)
    assert back.grid.z_levels == u.grid.z_levels
    assert back.params.dim == u.params.dim
    assert back.params.s == u.params.s
    assert np.array_equal(back.values, u.values)
    assert np.array_equal(back.datum, u.datum)


def test_fracext_round_trip_2d(tmp_path):
    u, _ = lift_shape(fp.Ball((0.0, 0.0), 0.4), 2, 1 / 4, s=0.75)
    path = tmp_path / "lift2.fracext"
    fp.save_extension(u, path)
    back = fp.load_extension(path)
    assert np.array_equal(back.values, u.values)
    assert np.array_equal(back.datum, u.datum)


def test_fracext_rejects_malformed_input(tmp_path):
    u, _ = lift_shape(fp.Interval(0.0, 0.5), 1, 1 / 8)
    path = tmp_path / "lift.fracext"
    fp.save_extension(u, path)
    text = path.read_text().splitlines()

    bad = tmp_path / "bad.fracext"
    bad.write_text("\n".join(["FRACFUN v1"] + text[1:]) + "\n")
    with pytest.raises(fp.FormatError):
        fp.load_extension(bad)

    no_datum = [ln for ln in text if ln.strip() != "datum"]
    bad.write_text("\n".join(no_datum) + "\n")
    with pytest.raises(fp.FormatError):
        fp.load_extension(bad)

    truncated = text[: len(text) // 2]
    bad.write_text("\n".join(truncated) + "\n")
    with pytest.raises(fp.FormatError):
        fp.load_extension(bad)
