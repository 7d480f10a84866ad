"""Half-space lifts of lattice indicator data and their weighted energies.

A set E on an N-dimensional grid is lifted to u(x, z) on z > 0 by

    u(x, z) = lam(N, s) * sum_{c in E} int_c z^s / (|x - y|^2 + z^2)^((N+s)/2) dy

where lam(N, s) = Gamma((N+s)/2) / (pi^(N/2) * Gamma(s/2)) normalizes the
kernel to unit mass.  The lift is evaluated on a finite stack of
z-levels over an enlarged copy of the base grid, and its energy

    int z^(1-s) * |grad u|^2 dx dz

is assembled with forward differences in x, difference quotients between
consecutive levels in z (the boundary datum acts as the level at z = 0),
and the weight z^(1-s) integrated exactly over each z-slab.  The energy
of the lift of an indicator is proportional to the set's fractional
perimeter; the proportionality constant gamma is calibrated once against
a shape with a trusted perimeter value and then reused.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import integrate, signal, special

from .errors import (
    CalibrationError,
    EmptySetError,
    FormatError,
    GridMismatchError,
)
from .grids import GridSet, GridSpec
from .kernels import InteractionTable, KernelParams, build_table
from .perimeter import fractional_perimeter
from .rearrange import GridFunction, symmetric_rearrangement
from .shapes import auto_spec, format_shape, rasterize

__all__ = [
    "ConstantsRegistry",
    "ExtensionEnergy",
    "ExtensionField",
    "GammaRecord",
    "HalfSpaceGrid",
    "TruncationWarning",
    "calibrate_gamma",
    "extension_domain",
    "extension_energy",
    "geometric_levels",
    "horizontal_rearrange",
    "lambda_constant",
    "load_extension",
    "poisson_extend",
    "poisson_kernel_mass",
    "save_extension",
    "trace_check",
]

_INV_SQRT3 = 1.0 / math.sqrt(3.0)

# Panels per cell scale like _PANEL_SCALE * h / sqrt(|offset|^2 + z^2);
# two-node tensor Gauss rules per panel keep every table entry within
# about 2e-5 relative error (checked against adaptive quadrature).
_PANEL_SCALE = 8.0
_PANEL_CAP = 64


class TruncationWarning(RuntimeWarning):
    """The field had not decayed enough at the domain edge."""


def lambda_constant(params: KernelParams) -> float:
    """Unit-mass normalization Gamma((N+s)/2) / (pi^(N/2) Gamma(s/2))."""
    n, s = params.dim, params.s
    return float(
        special.gamma(0.5 * (n + s))
        / (math.pi ** (0.5 * n) * special.gamma(0.5 * s))
    )


def poisson_kernel_mass(params: KernelParams, x, z: float) -> float:
    """Quadrature of lam * int z^s / (|x-y|^2 + z^2)^((N+s)/2) dy.

    Evaluates the mass of the lifting kernel centered at `x` at height
    `z` by adaptive quadrature after the substitution y = x + z*tan(t)
    (radial in two dimensions).  The exact value is 1 for every center
    and height; the point of evaluating it numerically is to confirm
    the normalization constant.
    """
    if z <= 0.0:
        raise ValueError("kernel mass requires z > 0")
    lam = lambda_constant(params)
    s = params.s
    if params.dim == 1:
        x0 = float(np.asarray(x).reshape(()))

        def integrand(t: float) -> float:
            y = x0 + z * math.tan(t)
            r2 = (y - x0) ** 2 + z * z
            jac = z * (1.0 + math.tan(t) ** 2)
            return z**s * r2 ** (-0.5 * (1 + s)) * jac

        val, _ = integrate.quad(
            integrand, -0.5 * math.pi, 0.5 * math.pi, limit=200
        )
        return lam * val
    if params.dim == 2:

        def radial(t: float) -> float:
            rho = z * math.tan(t)
            r2 = rho * rho + z * z
            jac = z * (1.0 + math.tan(t) ** 2)
            return rho * z**s * r2 ** (-0.5 * (2 + s)) * jac

        val, _ = integrate.quad(radial, 0.0, 0.5 * math.pi, limit=200)
        return lam * 2.0 * math.pi * val
    raise ValueError("only dimensions 1 and 2 are supported")


@dataclass(frozen=True)
class HalfSpaceGrid:
    """A base grid plus a strictly increasing stack of z-levels.

    The first level must sit at or below one lateral cell width; the
    trace at z = 0 is never a level, it is read from the boundary datum.
    """

    base: GridSpec
    z_levels: tuple[float, ...]

    def __post_init__(self) -> None:
        levels = tuple(float(z) for z in self.z_levels)
        object.__setattr__(self, "z_levels", levels)
        if not levels:
            raise ValueError("at least one z-level is required")
        if levels[0] <= 0.0:
            raise ValueError(
                "z = 0 is the trace line and is read from the boundary "
                "datum, not from the kernel; levels must be positive"
            )
        if any(not math.isfinite(z) for z in levels):
            raise ValueError("z-levels must be finite")
        if any(b <= a for a, b in zip(levels, levels[1:])):
            raise ValueError("z-levels must be strictly increasing")
        if levels[0] > self.base.h * (1.0 + 1e-12):
            raise ValueError("the first z-level must not exceed the cell width")

    @property
    def level_count(self) -> int:
        return len(self.z_levels)


def geometric_levels(z0: float, rho: float, top: float) -> tuple[float, ...]:
    """Levels z0 * rho^j up to and including the first one >= top."""
    if z0 <= 0.0 or top <= z0:
        raise ValueError("need 0 < z0 < top")
    if rho <= 1.0:
        raise ValueError("geometric ratio must exceed 1")
    levels = [z0]
    while levels[-1] < top:
        levels.append(levels[-1] * rho)
    return tuple(levels)


def _bbox_diameter(e: GridSet) -> float:
    box = e.bounding_cells()
    extents = [(hi - lo + 1) * e.spec.h for lo, hi in box]
    return math.sqrt(sum(x * x for x in extents))


def extension_domain(
    e: GridSet,
    *,
    z0: float | None = None,
    rho: float = 1.15,
    top_factor: float = 8.0,
    lateral_factor: float = 4.0,
) -> tuple[HalfSpaceGrid, GridSet]:
    """Build the half-space grid for a set and re-embed the set in it.

    The base grid is the set's bounding box dilated on every side by
    `lateral_factor` times the bounding-box diagonal; levels are graded
    geometrically from z0 (default: a quarter cell) up past
    `top_factor` times the diagonal.  Returns the grid and the same
    occupancy re-embedded in the enlarged base grid.
    """
    if e.is_empty:
        raise EmptySetError("cannot build an extension domain for an empty set")
    spec = e.spec
    h = spec.h
    if z0 is None:
        z0 = 0.25 * h
    diam = _bbox_diameter(e)
    pad = max(2, math.ceil(lateral_factor * diam / h))
    box = e.bounding_cells()
    cells = tuple(hi - lo + 1 + 2 * pad for lo, hi in box)
    origin = tuple(
        spec.origin[k] + (box[k][0] - pad) * h for k in range(spec.dim)
    )
    base = GridSpec(spec.dim, cells, h, origin)
    occ = np.zeros(cells, dtype=bool)
    inner = tuple(slice(pad, pad + hi - lo + 1) for lo, hi in box)
    trim = tuple(slice(lo, hi + 1) for lo, hi in box)
    occ[inner] = e.occupancy[trim]
    levels = geometric_levels(z0, rho, top_factor * diam)
    return HalfSpaceGrid(base, levels), GridSet(base, occ)


class ExtensionField:
    """Lift values on a half-space grid together with their boundary datum.

    `values[j]` holds u(., z_j) over the base grid; `datum` is the
    indicator the lift converges to as z drops to 0.  Values of lifts of
    indicators stay within [0, 1]; the constructor enforces that window
    up to roundoff and then clamps.
    """

    __slots__ = ("grid", "params", "values", "datum")

    def __init__(
        self,
        grid: HalfSpaceGrid,
        params: KernelParams,
        values,
        datum,
    ) -> None:
        if params.dim != grid.base.dim:
            raise GridMismatchError("kernel dimension differs from the grid")
        vals = np.asarray(values, dtype=np.float64)
        expected = (grid.level_count,) + grid.base.cells
        if vals.shape != expected:
            raise GridMismatchError(
                f"value stack shape {vals.shape} does not match {expected}"
            )
        if not np.isfinite(vals).all():
            raise ValueError("field values must be finite")
        if vals.min() < -1e-9 or vals.max() > 1.0 + 1e-9:
            raise ValueError("indicator lifts must stay within [0, 1]")
        vals = np.clip(vals, 0.0, 1.0)
        vals.setflags(write=False)
        datum_arr = np.asarray(datum, dtype=bool)
        if datum_arr.shape != grid.base.cells:
            raise GridMismatchError("datum shape does not match the base grid")
        datum_arr = datum_arr.copy()
        datum_arr.setflags(write=False)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "params", params)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "datum", datum_arr)

    def __setattr__(self, name, value):
        raise AttributeError("ExtensionField is immutable")

    def level_function(self, j: int) -> GridFunction:
        """The level slice u(., z_j) as a grid function."""
        return GridFunction(self.grid.base, self.values[j])

    def datum_set(self) -> GridSet:
        return GridSet(self.grid.base, self.datum.copy())

    def edge_maximum(self) -> float:
        """Largest value on the lateral rim or the top level."""
        rim = _rim_mask(self.grid.base.cells)
        lateral = float(self.values[:, rim].max()) if rim.any() else 0.0
        return max(lateral, float(self.values[-1].max()))


def _rim_mask(cells: tuple[int, ...]) -> np.ndarray:
    mask = np.zeros(cells, dtype=bool)
    for axis in range(len(cells)):
        sl_lo = [slice(None)] * len(cells)
        sl_hi = [slice(None)] * len(cells)
        sl_lo[axis] = 0
        sl_hi[axis] = cells[axis] - 1
        mask[tuple(sl_lo)] = True
        mask[tuple(sl_hi)] = True
    return mask


def _beta_profile(w: np.ndarray, z: float, s: float) -> np.ndarray:
    """Antiderivative of z^s (w^2 + z^2)^(-(1+s)/2) in w, odd in w.

    With w = z*tan(theta) the integrand becomes cos(theta)^(s-1), whose
    integral from 0 is half a regularized incomplete Beta function.
    """
    t = w * w / (w * w + z * z)
    vals = 0.5 * special.beta(0.5, 0.5 * s) * special.betainc(0.5, 0.5 * s, t)
    return np.copysign(vals, w)


def _poisson_table_1d(s: float, h: float, z: float, m: int) -> np.ndarray:
    """Exact cell integrals of the lifting kernel for offsets -m..m."""
    edges = (np.arange(-m, m + 2) - 0.5) * h
    prof = _beta_profile(edges, z, s)
    return prof[1:] - prof[:-1]


def _poisson_table_2d(
    s: float, h: float, z: float, m1: int, m2: int
) -> np.ndarray:
    """Cell integrals of the lifting kernel for offsets [-m1..m1]x[-m2..m2].

    A two-node tensor Gauss rule handles every cell in one separable
    pass; cells whose distance to the kernel peak is small compared to
    the cell width are redone with subdivided panels.
    """

    def kernel(w1: np.ndarray, w2: np.ndarray) -> np.ndarray:
        return z**s * (w1 * w1 + w2 * w2 + z * z) ** (-0.5 * (2 + s))

    dx = np.arange(-m1, m1 + 1, dtype=np.float64)
    dy = np.arange(-m2, m2 + 1, dtype=np.float64)
    # Separable two-node pass: nodes at offset +- 1/(2*sqrt(3)) per axis.
    nx = np.concatenate([dx - 0.5 * _INV_SQRT3, dx + 0.5 * _INV_SQRT3]) * h
    ny = np.concatenate([dy - 0.5 * _INV_SQRT3, dy + 0.5 * _INV_SQRT3]) * h
    vals = kernel(nx[:, None], ny[None, :])
    nxc, nyc = dx.size, dy.size
    table = (
        vals.reshape(2, nxc, 2, nyc).mean(axis=(0, 2)) * (h * h)
    )
    # Redo peaked cells with subdivided panels, two Gauss nodes each.
    r2 = (dx[:, None] * h) ** 2 + (dy[None, :] * h) ** 2 + z * z
    panels = np.ceil(_PANEL_SCALE * h / np.sqrt(r2)).astype(np.int64)
    for idx, idy in zip(*np.nonzero(panels > 1)):
        k = min(_PANEL_CAP, int(panels[idx, idy]))
        centers = (np.arange(k) + 0.5) / k - 0.5
        nodes = np.concatenate(
            [centers - 0.5 * _INV_SQRT3 / k, centers + 0.5 * _INV_SQRT3 / k]
        )
        w1 = (dx[idx] + nodes)[:, None] * h
        w2 = (dy[idy] + nodes)[None, :] * h
        table[idx, idy] = float(kernel(w1, w2).mean()) * (h * h)
    return table


def _level_slice(u_full: np.ndarray, cells: tuple[int, ...]) -> np.ndarray:
    # Central part of the full convolution; the kernel spans 2n-1 offsets
    # per axis, so the slice starts at n-1.
    sl = tuple(slice(n - 1, 2 * n - 1) for n in cells)
    return u_full[sl]


def poisson_extend(
    e: GridSet,
    grid: HalfSpaceGrid,
    params: KernelParams,
    *,
    threads: int = 1,
) -> ExtensionField:
    """Lift an indicator to every level of a half-space grid.

    The set must live on the grid's base spec (see extension_domain).
    Each level is one convolution of the occupancy with a table of exact
    or near-exact kernel cell integrals, so values are convex
    combinations of {0, 1} and stay strictly below 1.  The empty set
    lifts to the zero field.
    """
    if e.spec != grid.base:
        raise GridMismatchError("set does not live on the grid's base spec")
    if params.dim != grid.base.dim:
        raise GridMismatchError("kernel dimension differs from the grid")
    s = params.s
    h = grid.base.h
    cells = grid.base.cells
    if e.is_empty:
        values = np.zeros((grid.level_count,) + cells)
        return ExtensionField(grid, params, values, e.occupancy)
    lam = lambda_constant(params)
    occ = e.occupancy.astype(np.float64)

    def one_level(z: float) -> np.ndarray:
        if params.dim == 1:
            table = _poisson_table_1d(s, h, z, cells[0] - 1)
        else:
            table = _poisson_table_2d(s, h, z, cells[0] - 1, cells[1] - 1)
        full = signal.fftconvolve(occ, table, mode="full")
        # fft roundoff can leave values a hair outside [0, mass]
        return np.clip(lam * _level_slice(full, cells), 0.0, 1.0)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            slices = list(pool.map(one_level, grid.z_levels))
    else:
        slices = [one_level(z) for z in grid.z_levels]
    values = np.stack(slices, axis=0)
    return ExtensionField(grid, params, values, e.occupancy)


@dataclass(frozen=True)
class ExtensionEnergy:
    """Weighted gradient energy split into lateral and vertical parts."""

    total: float
    x_part: float
    z_part: float
    truncation_estimate: float


def _slab_weight(a: float, b: float, s: float) -> float:
    """Exact integral of z^(1-s) over (a, b)."""
    p = 2.0 - s
    return (b**p - a**p) / p


def extension_energy(
    u: ExtensionField, *, warn_threshold: float = 0.01
) -> ExtensionEnergy:
    """Assemble int z^(1-s) |grad u|^2 from the level stack.

    Lateral gradients are forward differences at each level, weighted by
    the exact z^(1-s) mass of the slab the level represents (slabs meet
    at midpoints between consecutive levels).  Vertical gradients are
    difference quotients between consecutive levels, the boundary datum
    acting as the level at z = 0.  A decay-model estimate of the energy
    ignored outside the computed box is returned, and a warning is
    issued when it is not small against the total.
    """
    grid = u.grid
    s = u.params.s
    h = grid.base.h
    n = grid.base.dim
    zs = grid.z_levels
    levels = len(zs)
    cell = h**n
    rim = _rim_mask(grid.base.cells)

    mids = [0.5 * (a + b) for a, b in zip(zs, zs[1:])]
    lo_edges = [0.0] + mids
    hi_edges = mids + [zs[-1]]

    x_part = 0.0
    z_part = 0.0
    rim_energy = 0.0
    for j in range(levels):
        w = _slab_weight(lo_edges[j], hi_edges[j], s)
        density = np.zeros(grid.base.cells, dtype=np.float64)
        for axis in range(n):
            d = np.diff(u.values[j], axis=axis) / h
            pad = [(0, 0)] * n
            pad[axis] = (0, 1)
            density += np.pad(d * d, pad)
        x_part += w * cell * float(density.sum())
        rim_energy += w * cell * float(density[rim].sum())

    datum = u.datum.astype(np.float64)
    prev = datum
    prev_z = 0.0
    for j in range(levels):
        dz = zs[j] - prev_z
        w = _slab_weight(prev_z, zs[j], s)
        q = (u.values[j] - prev) / dz
        q2 = q * q
        z_part += w * cell * float(q2.sum())
        rim_energy += w * cell * float(q2[rim].sum())
        prev = u.values[j]
        prev_z = zs[j]

    # Decay model for the ignored exterior: laterally u ~ r^-(N+s) so the
    # outermost ring underestimates the exterior by about r/(h*(N+2s));
    # above the top level u ~ z^-N, integrated in closed form.
    half_extent = 0.5 * max(c * h for c in grid.base.cells)
    lateral_est = rim_energy * half_extent / (h * (n + 2.0 * s))
    z_top = zs[-1]
    top_vals = u.values[-1]
    top_mass = cell * float((top_vals * top_vals).sum())
    top_est = 2.0 * n * n * top_mass * z_top ** (-s) / (2.0 * n + s)
    est = lateral_est + top_est

    total = x_part + z_part
    if total > 0.0 and est > warn_threshold * total:
        warnings.warn(
            "field had not decayed at the domain edge: estimated "
            f"neglected energy {est:.3e} vs total {total:.3e}",
            TruncationWarning,
            stacklevel=2,
        )
    return ExtensionEnergy(total, x_part, z_part, est)


@dataclass(frozen=True)
class GammaRecord:
    """Calibrated energy-to-perimeter constant with its provenance."""

    value: float
    reference: str
    validation: str
    residual: float

    def __post_init__(self) -> None:
        if not self.value > 0.0:
            raise ValueError("calibrated constant must be positive")
        if not 0.0 <= self.residual:
            raise ValueError("residual must be nonnegative")


class ConstantsRegistry:
    """Analytic, calibrated, and measured constants keyed by (dim, s).

    The kernel normalization is analytic and computed on demand; the
    energy-to-perimeter constant is only available after a calibration
    recorded the reference shape and its cross-validation residual; the
    small-s/large-s limit slopes are measured values with a provenance
    string.
    """

    def __init__(self) -> None:
        self._gamma: dict[tuple[int, float], GammaRecord] = {}
        self._limits: dict[int, tuple[float, str]] = {}

    @staticmethod
    def lambda_value(params: KernelParams) -> float:
        return lambda_constant(params)

    def record_gamma(
        self,
        params: KernelParams,
        value: float,
        *,
        reference: str,
        validation: str,
        residual: float,
    ) -> GammaRecord:
        rec = GammaRecord(float(value), reference, validation, float(residual))
        self._gamma[(params.dim, params.s)] = rec
        return rec

    def gamma_value(self, params: KernelParams) -> float:
        return self.gamma_record(params).value

    def gamma_record(self, params: KernelParams) -> GammaRecord:
        key = (params.dim, params.s)
        if key not in self._gamma:
            raise CalibrationError(
                f"no calibrated constant for dim={params.dim}, s={params.s}"
            )
        return self._gamma[key]

    def record_limit_constant(
        self, dim: int, value: float, *, source: str
    ) -> None:
        if not value > 0.0:
            raise ValueError("limit constant must be positive")
        self._limits[dim] = (float(value), source)

    def limit_constant(self, dim: int) -> tuple[float, str]:
        if dim not in self._limits:
            raise KeyError(f"no measured limit constant for dim={dim}")
        return self._limits[dim]


def calibrate_gamma(
    reference,
    validation,
    params: KernelParams,
    h: float,
    *,
    table: InteractionTable | None = None,
    registry: ConstantsRegistry | None = None,
    rtol: float = 0.02,
    z0: float | None = None,
    rho: float = 1.15,
    top_factor: float = 8.0,
    lateral_factor: float = 4.0,
    threads: int = 1,
) -> float:
    """Calibrate the energy-to-perimeter constant on a reference shape.

    gamma = 2 * perimeter(reference) / energy(lift of reference); the
    constant is accepted only if (gamma / 2) * energy predicts the
    perimeter of an independent validation shape within `rtol`,
    otherwise a CalibrationError carries both residuals.
    """
    if table is None:
        table = build_table(params, h=h)

    def measure(shape) -> tuple[float, float]:
        e = rasterize(shape, auto_spec(shape, h))
        if e.is_empty:
            raise EmptySetError("calibration shape rasterized to nothing")
        perim = fractional_perimeter(e, table, threads=threads)
        grid, embedded = extension_domain(
            e,
            z0=z0,
            rho=rho,
            top_factor=top_factor,
            lateral_factor=lateral_factor,
        )
        lift = poisson_extend(embedded, grid, params, threads=threads)
        energy = extension_energy(lift)
        return perim, energy.total

    ref_perim, ref_energy = measure(reference)
    if ref_energy <= 0.0:
        raise CalibrationError("reference lift has no energy")
    gamma = 2.0 * ref_perim / ref_energy
    val_perim, val_energy = measure(validation)
    predicted = 0.5 * gamma * val_energy
    residual = abs(predicted - val_perim) / val_perim
    if residual > rtol:
        raise CalibrationError(
            f"validation residual {residual:.4f} exceeds {rtol:.4f} "
            f"(predicted {predicted:.6g}, measured {val_perim:.6g})"
        )
    if registry is not None:
        registry.record_gamma(
            params,
            gamma,
            reference=format_shape(reference),
            validation=format_shape(validation),
            residual=residual,
        )
    return gamma


def horizontal_rearrange(u: ExtensionField) -> ExtensionField:
    """Rearrange every level slice symmetrically, keeping level multisets.

    Each u(., z_j) is replaced by its symmetric decreasing rearrangement
    on the base grid; the boundary datum is rearranged the same way, so
    the new datum is the centered ball with the original cell count.
    """
    grid = u.grid
    slices = [
        symmetric_rearrangement(GridFunction(grid.base, u.values[j])).values
        for j in range(grid.level_count)
    ]
    datum_fn = GridFunction(grid.base, u.datum.astype(np.float64))
    new_datum = symmetric_rearrangement(datum_fn).values > 0.5
    return ExtensionField(grid, u.params, np.stack(slices, axis=0), new_datum)


def trace_check(u: ExtensionField, target: GridSet | None = None) -> np.ndarray:
    """L2 distance from each level slice to a boundary indicator.

    Returns one distance per level, in level order.  For a lift built by
    poisson_extend the distances decrease toward 0 as z drops to the
    first level.  At least four levels are required for the sequence to
    say anything.
    """
    if u.grid.level_count < 4:
        raise ValueError("trace comparison needs at least four levels")
    if target is None:
        ind = u.datum.astype(np.float64)
    else:
        if target.spec != u.grid.base:
            raise GridMismatchError("target does not live on the base grid")
        ind = target.occupancy.astype(np.float64)
    cell = u.grid.base.h ** u.grid.base.dim
    out = np.empty(u.grid.level_count, dtype=np.float64)
    for j in range(u.grid.level_count):
        diff = u.values[j] - ind
        out[j] = math.sqrt(cell * float((diff * diff).sum()))
    return out


def save_extension(u: ExtensionField, path) -> None:
    """FRACEXT v1 text dump.

    Header, geometry line (dim, s, h, origin, cells), a levels line, one
    row-major value block per level, then the boundary datum as a final
    0/1 block.
    """
    spec = u.grid.base
    geo = [str(spec.dim), repr(float(u.params.s)), repr(float(spec.h))]
    geo += [repr(float(o)) for o in spec.origin]
    geo += [str(n) for n in spec.cells]
    lines = ["FRACEXT v1", " ".join(geo)]
    lines.append(
        "levels " + " ".join(repr(float(z)) for z in u.grid.z_levels)
    )
    for j in range(u.grid.level_count):
        lines.append(f"level {j}")
        for row in u.values[j].reshape(spec.cells[0], -1):
            lines.append(" ".join(f"{x:.17g}" for x in row))
    lines.append("datum")
    for row in u.datum.reshape(spec.cells[0], -1):
        lines.append(" ".join("1" if x else "0" for x in row))
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")


def load_extension(path) -> ExtensionField:
    with open(path, "r", encoding="ascii") as fh:
        raw = fh.read().splitlines()
    if not raw or raw[0] != "FRACEXT v1":
        raise FormatError("missing FRACEXT v1 header")
    if len(raw) < 3:
        raise FormatError("missing geometry or levels line")
    geo = raw[1].split()
    try:
        dim = int(geo[0])
        s = float(geo[1])
        h = float(geo[2])
        origin = tuple(float(x) for x in geo[3 : 3 + dim])
        cells = tuple(int(x) for x in geo[3 + dim : 3 + 2 * dim])
    except (IndexError, ValueError) as exc:
        raise FormatError(f"bad geometry line: {raw[1]!r}") from exc
    if len(cells) != dim:
        raise FormatError("geometry line is missing cell counts")
    lvl = raw[2].split()
    if not lvl or lvl[0] != "levels":
        raise FormatError("missing levels line")
    try:
        z_levels = tuple(float(x) for x in lvl[1:])
    except ValueError as exc:
        raise FormatError("non-numeric z-level") from exc
    spec = GridSpec(dim, cells, h, origin)
    grid = HalfSpaceGrid(spec, z_levels)
    rows_per_block = cells[0]
    cols = 1 if dim == 1 else cells[1]
    cursor = 3
    blocks = []
    for j in range(len(z_levels)):
        if cursor >= len(raw) or raw[cursor].strip() != f"level {j}":
            raise FormatError(f"missing block marker for level {j}")
        cursor += 1
        rows = raw[cursor : cursor + rows_per_block]
        if len(rows) < rows_per_block:
            raise FormatError(f"level {j} block is truncated")
        try:
            arr = np.array([[float(x) for x in r.split()] for r in rows])
        except ValueError as exc:
            raise FormatError(f"non-numeric row in level {j}") from exc
        if arr.shape != (rows_per_block, cols):
            raise FormatError(f"level {j} block has the wrong shape")
        blocks.append(arr.reshape(cells))
        cursor += rows_per_block
    if cursor >= len(raw) or raw[cursor].strip() != "datum":
        raise FormatError("missing datum block")
    cursor += 1
    rows = raw[cursor : cursor + rows_per_block]
    if len(rows) < rows_per_block:
        raise FormatError("datum block is truncated")
    try:
        datum = np.array(
            [[int(x) for x in r.split()] for r in rows], dtype=np.int64
        )
    except ValueError as exc:
        raise FormatError("non-numeric row in datum block") from exc
    if datum.shape != (rows_per_block, cols):
        raise FormatError("datum block has the wrong shape")
    if not np.isin(datum, (0, 1)).all():
        raise FormatError("datum block must be 0/1")
    params = KernelParams(dim, s)
    return ExtensionField(
        grid, params, np.stack(blocks, axis=0), datum.reshape(cells) == 1
    )
