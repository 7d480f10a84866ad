import math

import numpy as np
import pytest
from scipy import integrate

from fracperim import FormatError, SameCellError
from fracperim.kernels import (
    KernelParams,
    build_table,
    cell_pair_integral,
    far_kernel_unit,
    load_table,
    save_table,
    window_offsets,
)

# frozen from the 1D antiderivative: values double-checked by hand
PAIR_1D_D1 = 4.0 * (2.0 - math.sqrt(2.0))  # 2.3431457505076194
PAIR_1D_D10 = 4.0 * (2.0 * math.sqrt(10.0) - 3.0 - math.sqrt(11.0))


def test_params_validation():
    with pytest.raises(ValueError):
        KernelParams(3, 0.5)
    with pytest.raises(ValueError):
        KernelParams(1, 0.0)
    with pytest.raises(ValueError):
        KernelParams(2, 1.0)


def test_1d_closed_form_values():
    p = KernelParams(1, 0.5)
    assert cell_pair_integral((1,), p, 1.0) == pytest.approx(PAIR_1D_D1, rel=1e-15)
    assert cell_pair_integral((10,), p, 1.0) == pytest.approx(PAIR_1D_D10, rel=1e-14)
    # sign symmetry
    assert cell_pair_integral((-7,), p, 1.0) == cell_pair_integral((7,), p, 1.0)


def test_1d_midpoint_agreement_at_distance():
    # at d=10 the midpoint value h^2 d^-(1+s) is already within half a percent
    p = KernelParams(1, 0.5)
    exact = cell_pair_integral((10,), p, 1.0)
    midpoint = 10.0 ** -(1.5)
    assert abs(midpoint - exact) / exact < 5e-3


def test_scaling_is_exact():
    for params, off in [(KernelParams(1, 0.3), (4,)), (KernelParams(2, 0.7), (3, 1))]:
        v1 = cell_pair_integral(off, params, 1.0)
        v2 = cell_pair_integral(off, params, 2.0)
        assert v2 == 2.0 ** (params.dim - params.s) * v1


def test_zero_offset_rejected():
    with pytest.raises(SameCellError):
        cell_pair_integral((0,), KernelParams(1, 0.5), 1.0)
    with pytest.raises(SameCellError):
        cell_pair_integral((0, 0), KernelParams(2, 0.5), 1.0)


def nquad_pair_2d(a, b, s):
    # independent reference: 4d integral reduced to the 2d tent form
    alpha = 2.0 + s

    def f(w1, w2):
        return (w1 * w1 + w2 * w2) ** (-alpha / 2) * (1 - abs(w1 - a)) * (
            1 - abs(w2 - b)
        )

    val, err = integrate.nquad(
        f,
        [[a - 1, a + 1], [b - 1, b + 1]],
        opts={"limit": 200, "epsabs": 1e-12, "epsrel": 1e-12},
    )
    return val


@pytest.mark.parametrize("offset", [(2, 0), (2, 2), (3, 1), (5, 4), (16, 16)])
def test_2d_separated_against_quadrature(offset):
    p = KernelParams(2, 0.5)
    ref = nquad_pair_2d(offset[0], offset[1], 0.5)
    assert cell_pair_integral(offset, p, 1.0) == pytest.approx(ref, rel=1e-10)


def test_2d_touching_against_quadrature():
    # the (1,0) and (1,1) entries carry the integrable singularity
    p = KernelParams(2, 0.5)
    for off in [(1, 0), (1, 1)]:
        def f(w1, w2, a=off[0], b=off[1]):
            return (w1 * w1 + w2 * w2) ** (-1.25) * (1 - abs(w1 - a)) * (
                1 - abs(w2 - b)
            )

        ref, _ = integrate.nquad(
            f,
            [[off[0] - 1, off[0] + 1], [off[1] - 1, off[1] + 1]],
            opts=[
                {"points": [0.0], "limit": 200},
                {"points": [0.0], "limit": 200},
            ],
        )
        assert cell_pair_integral(off, p, 1.0) == pytest.approx(ref, rel=1e-9)


# pinned once from the dyadic-corner scheme after cross-validation against
# adaptive quadrature (worst case 3e-13 relative, including s near 0 and 1)
_FROZEN_TOUCHING = {
    0.01: (1.8671581298303077, 0.6545221691129948),
    0.25: (2.4264756187395373, 0.6576135314422308),
    0.75: (7.497661167067116, 0.7165415435648944),
    0.99: (199.293296584047, 0.789060177537509),
}


@pytest.mark.parametrize("s", sorted(_FROZEN_TOUCHING))
def test_2d_touching_frozen_regression(s):
    p = KernelParams(2, s)
    edge, corner = _FROZEN_TOUCHING[s]
    assert cell_pair_integral((1, 0), p, 1.0) == pytest.approx(edge, rel=1e-12)
    assert cell_pair_integral((1, 1), p, 1.0) == pytest.approx(corner, rel=1e-12)


def test_table_symmetry_classes():
    tab = build_table(KernelParams(2, 0.5), cutoff=4)
    assert tab.entries[(1, 0)] == tab.entries[(0, 1)]
    assert tab.entries[(1, 0)] == tab.entries[(-1, 0)]
    assert tab.entries[(3, 2)] == tab.entries[(-2, 3)] == tab.entries[(2, -3)]
    assert all(v > 0 for v in tab.entries.values())
    assert len(tab.entries) == (2 * 4 + 1) ** 2 - 1


def test_table_matches_1d_closed_form():
    tab = build_table(KernelParams(1, 0.5), cutoff=16)
    for d in range(1, 17):
        exact = cell_pair_integral((d,), KernelParams(1, 0.5), 1.0)
        assert tab.entries[(d,)] == pytest.approx(exact, rel=1e-12)


def test_cache_round_trip_bit_identical(tmp_path):
    path = tmp_path / "k.fractab"
    tab = build_table(KernelParams(2, 0.35), cutoff=5, cache_path=path)
    again = build_table(KernelParams(2, 0.35), cutoff=5, cache_path=path)
    assert again.entries == tab.entries
    loaded = load_table(path, h=0.125)
    assert loaded.entries == tab.entries
    assert loaded.h == 0.125
    assert loaded.params == tab.params


def test_save_is_lexicographic_17_digits(tmp_path):
    path = tmp_path / "k.fractab"
    tab = build_table(KernelParams(2, 0.5), cutoff=2)
    save_table(tab, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "FRACTAB v1 N=2 s=0.5 Rc=2"
    offs = [tuple(int(t) for t in ln.split()[:2]) for ln in lines[1:]]
    assert offs == window_offsets(2, 2)
    val = float(lines[1].split()[2])
    assert val == tab.entries[(-2, -2)]


def test_load_rejects_corruption(tmp_path):
    path = tmp_path / "k.fractab"
    tab = build_table(KernelParams(1, 0.5), cutoff=3)
    save_table(tab, path)
    body = path.read_text().splitlines()
    body[2] = body[2].split()[0] + " -1.0"
    path.write_text("\n".join(body) + "\n")
    with pytest.raises(FormatError):
        load_table(path)


def test_mismatched_cache_triggers_rebuild(tmp_path):
    path = tmp_path / "k.fractab"
    build_table(KernelParams(1, 0.5), cutoff=4, cache_path=path)
    with pytest.warns(UserWarning):
        tab = build_table(KernelParams(1, 0.25), cutoff=4, cache_path=path)
    assert tab.params.s == 0.25
    # cache now holds the rebuilt parameters
    assert load_table(path).params.s == 0.25


def test_far_rule_accuracy_outside_cutoff():
    p = KernelParams(2, 0.5)
    offsets = np.array([(17, 0), (17, 17), (24, 3), (40, 0)])
    approx = far_kernel_unit(offsets, p, 3)
    for row, off in enumerate(offsets):
        exact = cell_pair_integral(tuple(off), p, 1.0)
        assert abs(approx[row] - exact) / exact < 1e-8


def test_far_rule_1d_is_closed_form():
    p = KernelParams(1, 0.5)
    vals = far_kernel_unit(np.array([[17], [-40]]), p, 3)
    assert vals[0] == cell_pair_integral((17,), p, 1.0)
    assert vals[1] == cell_pair_integral((40,), p, 1.0)
