"""Uniform pixel grids and finite cell sets.

A grid covers a box with ``cells[k]`` cells of side ``h`` along axis ``k``,
anchored at ``origin``.  Cell ``i`` (a ``dim``-tuple) occupies the half-open
box ``origin + i*h .. origin + (i+1)*h`` and its center sits at
``origin + (i + 1/2)*h``.  Sets are stored as boolean occupancy arrays over
the full grid, axis 0 first.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DomainTooSmallError,
    EmptySetError,
    FormatError,
    GridMismatchError,
    OffLatticePlaneError,
)

__all__ = [
    "GridSpec",
    "GridSet",
    "unit_ball_volume",
    "set_algebra",
    "reflect",
    "steiner_symmetrize",
    "bisect_halves",
    "pad_domain",
    "same_region",
    "save_gridset",
    "load_gridset",
]

_LATTICE_TOL = 1e-9


def unit_ball_volume(dim: int) -> float:
    """Volume of the unit ball: 2 on the line, pi in the plane."""
    if dim == 1:
        return 2.0
    if dim == 2:
        return math.pi
    raise ValueError(f"unsupported dimension {dim}")


@dataclass(frozen=True)
class GridSpec:
    """Geometry of a uniform grid: dimension, cell counts, spacing, anchor."""

    dim: int
    cells: tuple[int, ...]
    h: float
    origin: tuple[float, ...]

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError(f"dim must be 1 or 2, got {self.dim}")
        if len(self.cells) != self.dim or len(self.origin) != self.dim:
            raise ValueError("cells/origin length must equal dim")
        if any(int(n) != n or n <= 0 for n in self.cells):
            raise ValueError("cell counts must be positive integers")
        if not (self.h > 0.0 and math.isfinite(self.h)):
            raise ValueError("cell size h must be positive and finite")
        object.__setattr__(self, "cells", tuple(int(n) for n in self.cells))
        object.__setattr__(self, "origin", tuple(float(x) for x in self.origin))

    def axis_centers(self, axis: int) -> np.ndarray:
        n = self.cells[axis]
        return self.origin[axis] + (np.arange(n) + 0.5) * self.h

    def centers(self) -> np.ndarray:
        """All cell centers, shape (prod(cells), dim), axis-0-major order."""
        axes = [self.axis_centers(k) for k in range(self.dim)]
        if self.dim == 1:
            return axes[0][:, None]
        gx, gy = np.meshgrid(axes[0], axes[1], indexing="ij")
        return np.column_stack([gx.ravel(), gy.ravel()])

    def extent(self) -> tuple[tuple[float, float], ...]:
        return tuple(
            (self.origin[k], self.origin[k] + self.cells[k] * self.h)
            for k in range(self.dim)
        )

    def center_cell(self) -> tuple[int, ...]:
        """Index of the cell that anchors center-based fills.

        The middle cell for odd extents; for even extents the cell just on
        the positive side of the geometric midline.
        """
        return tuple(n // 2 for n in self.cells)

    def center_point(self) -> tuple[float, ...]:
        """Center coordinate of the anchor cell."""
        cc = self.center_cell()
        return tuple(
            self.origin[k] + (cc[k] + 0.5) * self.h for k in range(self.dim)
        )


class GridSet:
    """A finite union of grid cells, stored as a boolean occupancy array."""

    __slots__ = ("spec", "occupancy")

    def __init__(self, spec: GridSpec, occupancy: np.ndarray):
        occ = np.asarray(occupancy, dtype=bool)
        if occ.shape != spec.cells:
            raise GridMismatchError(
                f"occupancy shape {occ.shape} does not match grid cells {spec.cells}"
            )
        occ = occ.copy()
        occ.setflags(write=False)
        object.__setattr__(self, "spec", spec)
        object.__setattr__(self, "occupancy", occ)

    def __setattr__(self, name, value):
        raise AttributeError("GridSet is immutable")

    @classmethod
    def empty(cls, spec: GridSpec) -> "GridSet":
        return cls(spec, np.zeros(spec.cells, dtype=bool))

    @classmethod
    def from_cells(cls, spec: GridSpec, cells) -> "GridSet":
        occ = np.zeros(spec.cells, dtype=bool)
        for c in cells:
            occ[tuple(np.atleast_1d(c))] = True
        return cls(spec, occ)

    @property
    def cell_count(self) -> int:
        return int(np.count_nonzero(self.occupancy))

    @property
    def measure(self) -> float:
        return self.cell_count * self.spec.h**self.spec.dim

    @property
    def is_empty(self) -> bool:
        return not self.occupancy.any()

    def cells(self) -> np.ndarray:
        """Occupied cell indices, shape (count, dim), axis-0-major order."""
        idx = np.argwhere(self.occupancy)
        return idx.astype(np.int64)

    def bounding_cells(self) -> tuple[tuple[int, int], ...]:
        """Inclusive index range of occupied cells per axis."""
        if self.is_empty:
            raise EmptySetError("empty set has no bounding box")
        idx = np.argwhere(self.occupancy)
        return tuple(
            (int(idx[:, k].min()), int(idx[:, k].max())) for k in range(self.spec.dim)
        )

    def trimmed(self) -> "GridSet":
        """Copy restricted to the occupied bounding box."""
        bc = self.bounding_cells()
        sl = tuple(slice(lo, hi + 1) for lo, hi in bc)
        spec = GridSpec(
            self.spec.dim,
            tuple(hi - lo + 1 for lo, hi in bc),
            self.spec.h,
            tuple(
                self.spec.origin[k] + bc[k][0] * self.spec.h
                for k in range(self.spec.dim)
            ),
        )
        return GridSet(spec, self.occupancy[sl])

    def __eq__(self, other) -> bool:
        if not isinstance(other, GridSet):
            return NotImplemented
        return self.spec == other.spec and np.array_equal(
            self.occupancy, other.occupancy
        )

    def __hash__(self):
        return hash((self.spec, self.occupancy.tobytes()))

    def __repr__(self):
        return (
            f"GridSet(dim={self.spec.dim}, cells={self.spec.cells}, "
            f"h={self.spec.h}, count={self.cell_count})"
        )


def same_region(a: GridSet, b: GridSet) -> bool:
    """True when two sets cover the same region of space.

    Compares cell size, trimmed occupancy, and trimmed anchor, so sets that
    live on differently padded domains still compare equal.
    """
    if a.spec.h != b.spec.h or a.spec.dim != b.spec.dim:
        return False
    if a.is_empty or b.is_empty:
        return a.is_empty and b.is_empty
    ta, tb = a.trimmed(), b.trimmed()
    if ta.spec.cells != tb.spec.cells:
        return False
    h = a.spec.h
    for k in range(a.spec.dim):
        if abs(ta.spec.origin[k] - tb.spec.origin[k]) > _LATTICE_TOL * h:
            return False
    return bool(np.array_equal(ta.occupancy, tb.occupancy))


def set_algebra(a: GridSet, b: GridSet | None, op: str) -> GridSet:
    """Pointwise set operation on a shared grid.

    ``op`` is one of ``union``, ``intersection``, ``difference``,
    ``symmetric_difference``, or the unary ``complement`` (b ignored),
    taken within the grid domain.
    """
    if op == "complement":
        return GridSet(a.spec, ~a.occupancy)
    if b is None:
        raise ValueError(f"binary operation {op!r} needs two sets")
    if a.spec != b.spec:
        raise GridMismatchError("set algebra requires identical grid specs")
    if op == "union":
        occ = a.occupancy | b.occupancy
    elif op == "intersection":
        occ = a.occupancy & b.occupancy
    elif op == "difference":
        occ = a.occupancy & ~b.occupancy
    elif op == "symmetric_difference":
        occ = a.occupancy ^ b.occupancy
    else:
        raise ValueError(f"unknown set operation {op!r}")
    return GridSet(a.spec, occ)


def _lattice_position(spec: GridSpec, axis: int, plane: float) -> int:
    """Plane coordinate as an integer count of half-cells from the origin."""
    t = (plane - spec.origin[axis]) / spec.h
    doubled = 2.0 * t
    nearest = round(doubled)
    if abs(doubled - nearest) > 1e-6:
        raise OffLatticePlaneError(
            f"plane {plane} is off-lattice along axis {axis}: "
            f"{t} cells from the origin is not a half-integer"
        )
    return int(nearest)


def _with_room(e: GridSet, lo_need: list[int], hi_need: list[int]) -> GridSet:
    """Re-embed on an enlarged grid so indices [lo_need, hi_need] exist."""
    spec = e.spec
    pad_lo = [max(0, -lo) for lo in lo_need]
    pad_hi = [max(0, hi - (spec.cells[k] - 1)) for k, hi in enumerate(hi_need)]
    if not any(pad_lo) and not any(pad_hi):
        return e
    new_cells = tuple(
        spec.cells[k] + pad_lo[k] + pad_hi[k] for k in range(spec.dim)
    )
    new_origin = tuple(
        spec.origin[k] - pad_lo[k] * spec.h for k in range(spec.dim)
    )
    occ = np.zeros(new_cells, dtype=bool)
    sl = tuple(
        slice(pad_lo[k], pad_lo[k] + spec.cells[k]) for k in range(spec.dim)
    )
    occ[sl] = e.occupancy
    return GridSet(GridSpec(spec.dim, new_cells, spec.h, new_origin), occ)


def reflect(e: GridSet, axis: int, plane: float) -> GridSet:
    """Mirror a set across a plane orthogonal to ``axis``.

    The plane must sit on a grid line or on a line of cell centers.  The
    domain grows as needed so mirrored cells always fit; measure is exact
    and reflecting twice returns the original region.
    """
    if not 0 <= axis < e.spec.dim:
        raise ValueError(f"axis {axis} out of range for dim {e.spec.dim}")
    m = _lattice_position(e.spec, axis, plane)
    # cell i maps to m - 1 - i in index space
    if e.is_empty:
        return e
    idx = e.cells()
    new_axis = m - 1 - idx[:, axis]
    lo_need = [0] * e.spec.dim
    hi_need = [n - 1 for n in e.spec.cells]
    lo_need[axis] = min(lo_need[axis], int(new_axis.min()))
    hi_need[axis] = max(hi_need[axis], int(new_axis.max()))
    base = _with_room(e, lo_need, hi_need)
    shift = round((e.spec.origin[axis] - base.spec.origin[axis]) / e.spec.h)
    m_base = m + 2 * shift
    occ = np.zeros(base.spec.cells, dtype=bool)
    idx = base.cells()
    idx[:, axis] = m_base - 1 - idx[:, axis]
    occ[tuple(idx.T)] = True
    return GridSet(base.spec, occ)


def steiner_symmetrize(e: GridSet, axis: int) -> GridSet:
    """Slide each line of cells along ``axis`` into a centered block.

    Cell counts per line are preserved exactly, so the measure is too.  When
    a block cannot be centered exactly, the extra cell goes to the positive
    side.  The result is idempotent.
    """
    if not 0 <= axis < e.spec.dim:
        raise ValueError(f"axis {axis} out of range for dim {e.spec.dim}")
    occ = e.occupancy
    if e.spec.dim == 1:
        n = e.spec.cells[0]
        k = int(np.count_nonzero(occ))
        out = np.zeros(n, dtype=bool)
        start = (n - k + 1) // 2
        out[start : start + k] = True
        return GridSet(e.spec, out)
    work = occ if axis == 0 else occ.T
    n = work.shape[0]
    counts = work.sum(axis=0)
    starts = (n - counts + 1) // 2
    rows = np.arange(n)[:, None]
    out = (rows >= starts[None, :]) & (rows < (starts + counts)[None, :])
    if axis != 0:
        out = out.T
    return GridSet(e.spec, out)


def bisect_halves(e: GridSet, axis: int) -> tuple[float, GridSet, GridSet]:
    """Split a set by a half-lattice plane into reflected halves.

    Considers every grid line and every line of cell centers orthogonal to
    ``axis``, scores each by how far the two mirrored half counts stray
    from the original count, and keeps the best (ties resolved toward the
    smaller coordinate).  Returns ``(plane, upper half united with its
    mirror image, lower half united with its mirror image)``; cells on a
    cell-center plane belong to both halves and map to themselves, so a
    set symmetric about such a plane reproduces itself exactly.  Domains
    grow as needed so the mirrored halves always fit.
    """
    if e.is_empty:
        raise EmptySetError("cannot bisect an empty set")
    if not 0 <= axis < e.spec.dim:
        raise ValueError(f"axis {axis} out of range for dim {e.spec.dim}")
    spec = e.spec
    total = e.cell_count
    lo, hi = e.bounding_cells()[axis]
    if spec.dim == 1:
        line_counts = e.occupancy.astype(np.int64)
    else:
        line_counts = e.occupancy.sum(axis=1 - axis)
    # strictly-above counts indexed by doubled coordinate q: grid line at
    # index p <-> q = 2p, line of cell centers at index c <-> q = 2c + 1
    best_q, best_score = None, None
    for q in range(2 * lo, 2 * hi + 3):
        if q % 2 == 0:
            above = int(line_counts[q // 2 : hi + 1].sum())
            up_count, dn_count = 2 * above, 2 * (total - above)
        else:
            c = (q - 1) // 2
            on = int(line_counts[c])
            above = int(line_counts[c + 1 : hi + 1].sum())
            up_count = 2 * above + on
            dn_count = 2 * (total - above - on) + on
        score = max(abs(up_count - total), abs(dn_count - total))
        if best_score is None or score < best_score:
            best_q, best_score = q, score
    plane = spec.origin[axis] + best_q * 0.5 * spec.h

    idx = e.cells()
    if best_q % 2 == 0:
        sel_up = idx[:, axis] >= best_q // 2
        sel_dn = ~sel_up
    else:
        c = (best_q - 1) // 2
        sel_up = idx[:, axis] >= c
        sel_dn = idx[:, axis] <= c
    occ_up = np.zeros(spec.cells, dtype=bool)
    occ_dn = np.zeros(spec.cells, dtype=bool)
    occ_up[tuple(idx[sel_up].T)] = True
    occ_dn[tuple(idx[sel_dn].T)] = True
    up = GridSet(spec, occ_up)
    dn = GridSet(spec, occ_dn)
    f_plus = _mirror_union(up, axis, plane)
    f_minus = _mirror_union(dn, axis, plane)
    return plane, f_plus, f_minus


def _mirror_union(half: GridSet, axis: int, plane: float) -> GridSet:
    if half.is_empty:
        return half
    mirrored = reflect(half, axis, plane)
    base = _with_room(
        half,
        [
            round((mirrored.spec.origin[k] - half.spec.origin[k]) / half.spec.h)
            for k in range(half.spec.dim)
        ],
        [
            round((mirrored.spec.origin[k] - half.spec.origin[k]) / half.spec.h)
            + mirrored.spec.cells[k]
            - 1
            for k in range(half.spec.dim)
        ],
    )
    occ = np.array(base.occupancy)
    off = [
        round((mirrored.spec.origin[k] - base.spec.origin[k]) / base.spec.h)
        for k in range(base.spec.dim)
    ]
    idx = mirrored.cells() + np.array(off, dtype=np.int64)
    occ[tuple(idx.T)] = True
    return GridSet(base.spec, occ)


def pad_domain(e: GridSet, pad: int) -> GridSet:
    """Re-embed a set so its bounding box has ``pad`` free cells per side.

    The set keeps its absolute position; only the domain is resized.  Useful
    before perimeter calls on sets whose domain grew flush to the occupancy.
    """
    if e.is_empty:
        raise EmptySetError("cannot pad the domain of an empty set")
    if pad < 0:
        raise ValueError("pad must be nonnegative")
    t = e.trimmed()
    spec = GridSpec(
        t.spec.dim,
        tuple(n + 2 * pad for n in t.spec.cells),
        t.spec.h,
        tuple(x - pad * t.spec.h for x in t.spec.origin),
    )
    occ = np.zeros(spec.cells, dtype=bool)
    occ[tuple(slice(pad, pad + n) for n in t.spec.cells)] = t.occupancy
    return GridSet(spec, occ)


def translate_cells(e: GridSet, offset_cells) -> GridSet:
    """Shift a set by whole cells (implemented as an exact anchor move)."""
    off = tuple(int(v) for v in np.atleast_1d(offset_cells))
    if len(off) != e.spec.dim:
        raise ValueError("offset length must equal dim")
    spec = GridSpec(
        e.spec.dim,
        e.spec.cells,
        e.spec.h,
        tuple(e.spec.origin[k] + off[k] * e.spec.h for k in range(e.spec.dim)),
    )
    return GridSet(spec, e.occupancy)


def _format_float(x: float) -> str:
    return repr(float(x))


def save_gridset(e: GridSet, path) -> None:
    """Write a set in the FRACGRID v1 text format."""
    spec = e.spec
    lines = ["FRACGRID v1"]
    geo = [str(spec.dim), _format_float(spec.h)]
    geo += [_format_float(x) for x in spec.origin]
    geo += [str(n) for n in spec.cells]
    lines.append(" ".join(geo))
    if spec.dim == 1:
        lines.append("".join("1" if v else "0" for v in e.occupancy))
    else:
        for row in e.occupancy:
            lines.append("".join("1" if v else "0" for v in row))
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")


def load_gridset(path) -> GridSet:
    """Read a set from the FRACGRID v1 text format."""
    with open(path, "r", encoding="ascii") as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    if not lines or lines[0].strip() != "FRACGRID v1":
        raise FormatError("missing FRACGRID v1 header")
    fields = lines[1].split()
    dim = int(fields[0])
    h = float(fields[1])
    origin = tuple(float(x) for x in fields[2 : 2 + dim])
    cells = tuple(int(x) for x in fields[2 + dim : 2 + 2 * dim])
    spec = GridSpec(dim, cells, h, origin)
    rows = [ln for ln in lines[2:] if ln.strip() != ""]
    expected_rows = 1 if dim == 1 else cells[0]
    if len(rows) != expected_rows:
        raise FormatError(
            f"expected {expected_rows} occupancy rows, found {len(rows)}"
        )
    width = cells[0] if dim == 1 else cells[1]
    occ_rows = []
    for ln in rows:
        if len(ln) != width or set(ln) - {"0", "1"}:
            raise FormatError(f"bad occupancy row: {ln!r}")
        occ_rows.append([c == "1" for c in ln])
    occ = np.array(occ_rows, dtype=bool)
    if dim == 1:
        occ = occ[0]
    return GridSet(spec, occ)
