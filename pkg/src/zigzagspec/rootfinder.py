"""All zeros of a holomorphic function in a rectangle.

The counting tool is the argument principle: (1/2pi i) times the contour
integral of f'/f equals the number of zeros inside, and the first and second
moments (same integral with extra factors zeta, zeta^2) localize them.  The
strategy:

1. resolve the phase of f along each edge until consecutive samples turn by
   less than pi/2, which makes the telescoped winding number exact;
2. integrate (f'/f) * (1, zeta, zeta^2) along the resolved edges in one
   batched adaptive pass and cross-check the quadrature winding against the
   telescoped one;
3. recurse by bisecting the longest side until each box holds one zero
   (Newton-polish the first moment) or a cluster collapses to a point
   (multiple root, polished with the multiplicity-aware Newton step).

Zeros sitting on a contour are handled deterministically: the requested
region is dilated by 1e-4 on the offending side, and interior split lines are
shifted until clear.  Both f and logderiv must accept complex numpy arrays.
"""

from __future__ import annotations

import cmath
import dataclasses
import math
from typing import Callable, List, Optional, Tuple

import numpy as np

from .errors import (
    BoundaryProximityError,
    NearZeroError,
    PolishFailureError,
    UnresolvedClusterError,
    WindingError,
)
from .quadrature import QuadratureConfig, integrate_finite

__all__ = [
    "ComplexRegion",
    "RootfinderConfig",
    "RootRecord",
    "RootSet",
    "count_zeros",
    "locate_zeros",
    "newton_polish",
]

_TWO_PI = 2.0 * math.pi
_MAX_EDGE_POINTS = 8192
_IM_SNAP = 1e-10


@dataclasses.dataclass(frozen=True)
class ComplexRegion:
    re_min: float
    re_max: float
    im_min: float
    im_max: float
    edge_samples: int = 64

    def __post_init__(self):
        if not (self.re_min < self.re_max and self.im_min < self.im_max):
            raise ValueError(
                f"degenerate region [{self.re_min},{self.re_max}]x[{self.im_min},{self.im_max}]"
            )

    @property
    def width(self) -> float:
        return self.re_max - self.re_min

    @property
    def height(self) -> float:
        return self.im_max - self.im_min

    @property
    def center(self) -> complex:
        return complex(0.5 * (self.re_min + self.re_max), 0.5 * (self.im_min + self.im_max))

    def contains(self, z: complex, pad: float = 0.0) -> bool:
        return (
            self.re_min - pad <= z.real <= self.re_max + pad
            and self.im_min - pad <= z.imag <= self.im_max + pad
        )

    def corners(self):
        return (
            complex(self.re_min, self.im_min),
            complex(self.re_max, self.im_min),
            complex(self.re_max, self.im_max),
            complex(self.re_min, self.im_max),
        )


@dataclasses.dataclass(frozen=True)
class RootfinderConfig:
    root_tol: float = 1e-10       # Newton step stopping size
    boundary_tol: float = 1e-8    # |f| below this on a contour sample => too close
    min_box_size: float = 1e-8
    cluster_tol: float = 1e-6     # moment spread below this collapses to a multiple root
    max_newton_iter: int = 50
    dilation: float = 1e-4        # deterministic boundary jitter
    quad: QuadratureConfig = QuadratureConfig(rel_tol=1e-9, abs_tol=1e-11, max_depth=40)


DEFAULT_ROOT_CONFIG = RootfinderConfig()


@dataclasses.dataclass(frozen=True)
class RootRecord:
    location: complex
    multiplicity: int
    residual: float
    polished: bool = True


@dataclasses.dataclass(frozen=True)
class RootSet:
    roots: Tuple[RootRecord, ...]
    region: ComplexRegion
    winding: int

    def locations(self):
        return [r.location for r in self.roots]

    def total_multiplicity(self) -> int:
        return sum(r.multiplicity for r in self.roots)


# ---------------------------------------------------------------------------
# contour machinery
# ---------------------------------------------------------------------------


def _edges(region: ComplexRegion):
    c0, c1, c2, c3 = region.corners()
    return (
        (c0, c1, "bottom"),
        (c1, c2, "right"),
        (c2, c3, "top"),
        (c3, c0, "left"),
    )


def _phase_skeleton(fvec, z0, direction, length, n0, boundary_tol, edge_name):
    """Sample f along an edge until successive phases turn < pi/2.

    Returns (ts, total phase change).  A sample with |f| < boundary_tol, or a
    phase that refuses to resolve, raises BoundaryProximityError for this
    edge, carrying the offending location.
    """
    ts = np.linspace(0.0, length, max(int(n0), 8) + 1)
    vals = np.asarray(fvec(z0 + direction * ts), dtype=complex)

    def check_clear(points, values):
        small = np.abs(values) < boundary_tol
        if small.any():
            loc = z0 + direction * points[np.argmax(small)]
            raise BoundaryProximityError(edge_name, loc)

    check_clear(ts, vals)
    for _ in range(40):
        turns = np.angle(vals[1:] * np.conj(vals[:-1]))
        bad = np.abs(turns) >= 0.5 * math.pi
        if not bad.any():
            return ts, float(np.sum(turns))
        if len(ts) > _MAX_EDGE_POINTS:
            worst = int(np.argmax(np.abs(turns)))
            raise BoundaryProximityError(
                edge_name, z0 + direction * 0.5 * (ts[worst] + ts[worst + 1])
            )
        mids = 0.5 * (ts[:-1][bad] + ts[1:][bad])
        mvals = np.asarray(fvec(z0 + direction * mids), dtype=complex)
        check_clear(mids, mvals)
        order = np.argsort(np.concatenate([ts, mids]), kind="stable")
        ts = np.concatenate([ts, mids])[order]
        vals = np.concatenate([vals, mvals])[order]
    raise BoundaryProximityError(edge_name, z0 + direction * 0.5 * length)


def _contour_moments(fvec, ldvec, region, cfg, n0):
    """Telescoped winding plus quadrature moments (s0, s1, s2) of the contour.

    s_k = (1/2pi i) contour-integral of zeta^k logderiv(zeta).  Also returns
    the name of the edge with the worst quadrature error (suspect for any
    trouble upstream).
    """
    total_phase = 0.0
    moments = np.zeros(3, dtype=complex)
    worst_err = -1.0
    worst_edge = "bottom"
    for (za, zb, name) in _edges(region):
        length = abs(zb - za)
        direction = (zb - za) / length
        ts, dphase = _phase_skeleton(
            fvec, za, direction, length, n0, cfg.boundary_tol, name
        )
        total_phase += dphase

        def rows(t, _za=za, _dir=direction):
            z = _za + _dir * t
            ld = np.asarray(ldvec(z), dtype=complex)
            return np.stack([ld, z * ld, z * z * ld]) * _dir

        try:
            vals, errs = integrate_finite(
                rows, 0.0, length, cfg.quad, breakpoints=ts[1:-1]
            )
        except NearZeroError as exc:
            raise BoundaryProximityError(name, exc.gamma) from exc
        moments += vals
        if float(errs[0]) > worst_err:
            worst_err = float(errs[0])
            worst_edge = name
    moments /= 2.0j * math.pi
    return total_phase / _TWO_PI, moments, worst_edge


def _winding_and_moments(fvec, ldvec, region, cfg):
    """Integer winding number with moments; refines edge sampling on doubt."""
    n0 = region.edge_samples
    last = None
    for _ in range(3):
        w_tel, moments, worst_edge = _contour_moments(fvec, ldvec, region, cfg, n0)
        w_int = int(round(w_tel))
        tel_ok = abs(w_tel - w_int) < 0.05
        quad_ok = abs(moments[0] - w_int) <= 0.25
        if tel_ok and quad_ok:
            return w_int, moments
        last = (w_tel, moments[0], worst_edge)
        n0 *= 4
    raise BoundaryProximityError(
        last[2],
        region.center,
    )


def _winding_logderiv_only(ldvec, region, cfg):
    """Winding without access to f: trust the quadrature plus the 0.25 rule.

    Proximity of a zero to the contour is inferred from |logderiv| spikes.
    """
    n0 = region.edge_samples
    for _ in range(4):
        total = 0.0 + 0.0j
        for (za, zb, name) in _edges(region):
            length = abs(zb - za)
            direction = (zb - za) / length
            ts = np.linspace(0.0, length, n0 + 1)
            ld_samples = np.asarray(ldvec(za + direction * ts), dtype=complex)
            spikes = np.abs(ld_samples) > 1.0 / cfg.boundary_tol
            if spikes.any():
                raise BoundaryProximityError(name, za + direction * ts[np.argmax(spikes)])

            def row(t, _za=za, _dir=direction):
                return np.asarray(ldvec(_za + _dir * t), dtype=complex) * _dir

            try:
                val, _ = integrate_finite(row, 0.0, length, cfg.quad, breakpoints=ts[1:-1])
            except NearZeroError as exc:
                raise BoundaryProximityError(name, exc.gamma) from exc
            total += val
        w = total / (2.0j * math.pi)
        w_int = int(round(w.real))
        if abs(w - w_int) <= 0.25:
            return w_int
        n0 *= 4
    raise BoundaryProximityError("unresolved", region.center)


def _dilated(region: ComplexRegion, exc: BoundaryProximityError, amount: float) -> ComplexRegion:
    """Enlarge the region by `amount` on the side named by the error
    (all four sides when the edge is unknown)."""
    grow = {"bottom": 0.0, "right": 0.0, "top": 0.0, "left": 0.0}
    if exc.edge in grow:
        grow[exc.edge] = amount
    else:
        grow = dict.fromkeys(grow, amount)
    return ComplexRegion(
        region.re_min - grow["left"],
        region.re_max + grow["right"],
        region.im_min - grow["bottom"],
        region.im_max + grow["top"],
        region.edge_samples,
    )


# ---------------------------------------------------------------------------
# Newton polish
# ---------------------------------------------------------------------------


def newton_polish(
    logderiv: Callable,
    guess: complex,
    cfg: RootfinderConfig = DEFAULT_ROOT_CONFIG,
    multiplicity: int = 1,
) -> complex:
    """Refine a root estimate with gamma <- gamma - m / logderiv(gamma).

    A NearZeroError from the logderiv means the iterate has landed on the
    root (the residual is already below the near-zero floor) and stops the
    iteration.  Five consecutive step growths abort with PolishFailureError.
    """
    z = complex(guess)
    prev_step = math.inf
    growth = 0
    for _ in range(cfg.max_newton_iter):
        try:
            ld = complex(np.asarray(logderiv(np.array([z])), dtype=complex)[0])
        except NearZeroError:
            return z
        if not cmath.isfinite(ld):
            return z  # logderiv pole: the iterate sits on the root itself
        if ld == 0.0:
            raise PolishFailureError(f"logderiv vanished at {z} (critical point?)")
        step = multiplicity / ld
        z -= step
        s = abs(step)
        if s < cfg.root_tol:
            return z
        if s > prev_step:
            growth += 1
            if growth >= 5:
                raise PolishFailureError(
                    f"Newton diverged from {guess}: step grew 5 times, last {s:.3e}"
                )
        else:
            growth = 0
        prev_step = s
    return z


# ---------------------------------------------------------------------------
# subdivision search
# ---------------------------------------------------------------------------


def _choose_cut(fvec, region: ComplexRegion, cfg: RootfinderConfig):
    """Pick a split coordinate on the longest side, shifted off any zero.

    Returns ('re'|'im', cut).  Deterministic: offsets are tried in the fixed
    order 0, +1, -1, +2, -2, ... in units of min(dilation, span/16).
    """
    vertical_cut = region.width >= region.height  # cut parallel to imag axis
    span = region.width if vertical_cut else region.height
    base = 0.5 * (region.re_min + region.re_max) if vertical_cut else 0.5 * (
        region.im_min + region.im_max
    )
    unit = min(cfg.dilation, span / 16.0)
    best = None
    for k in range(0, 8):
        for offset in ((0.0,) if k == 0 else (k * unit, -k * unit)):
            cut = base + offset
            if vertical_cut:
                line = cut + 1j * np.linspace(region.im_min, region.im_max, 65)
            else:
                line = np.linspace(region.re_min, region.re_max, 65) + 1j * cut
            lo = float(np.min(np.abs(np.asarray(fvec(line), dtype=complex))))
            if lo >= cfg.boundary_tol:
                return ("re" if vertical_cut else "im"), cut
            if best is None or lo > best[0]:
                best = (lo, ("re" if vertical_cut else "im"), cut)
    # every candidate line grazes a zero; take the least bad one and let the
    # edge machinery complain if it truly cannot resolve it
    return best[1], best[2]


def _split(region: ComplexRegion, axis: str, cut: float):
    if axis == "re":
        return (
            ComplexRegion(region.re_min, cut, region.im_min, region.im_max, region.edge_samples),
            ComplexRegion(cut, region.re_max, region.im_min, region.im_max, region.edge_samples),
        )
    return (
        ComplexRegion(region.re_min, region.re_max, region.im_min, cut, region.edge_samples),
        ComplexRegion(region.re_min, region.re_max, cut, region.im_max, region.edge_samples),
    )


def _snap(z: complex) -> complex:
    return complex(z.real, 0.0) if abs(z.imag) < _IM_SNAP else z


def _emit_root(fvec, ldvec, centroid, multiplicity, cfg, out):
    try:
        root = newton_polish(ldvec, centroid, cfg, multiplicity=multiplicity)
        polished = True
    except PolishFailureError:
        root = complex(centroid)
        polished = False
    root = _snap(root)
    residual = float(abs(complex(np.asarray(fvec(np.array([root])), dtype=complex)[0])))
    out.append(RootRecord(root, int(multiplicity), residual, polished))


def _solve(fvec, ldvec, region: ComplexRegion, cfg: RootfinderConfig, out: list) -> int:
    try:
        w, moments = _winding_and_moments(fvec, ldvec, region, cfg)
    except BoundaryProximityError:
        if max(region.width, region.height) < cfg.min_box_size:
            raise UnresolvedClusterError(
                f"winding undetermined in a box below min_box_size at {region.center}",
                box=region,
            ) from None
        raise
    if w == 0:
        return 0
    if w < 0:
        raise WindingError(f"negative winding {w} in {region}: not holomorphic?")

    centroid = moments[1] / w
    if w == 1:
        _emit_root(fvec, ldvec, moments[1], 1, cfg, out)
        return w

    spread_sq = moments[2] / w - centroid * centroid
    spread = math.sqrt(abs(spread_sq))
    if spread < cfg.cluster_tol or max(region.width, region.height) < cfg.min_box_size:
        # w roots indistinguishable at working precision: a multiple root
        _emit_root(fvec, ldvec, centroid, w, cfg, out)
        return w

    axis, cut = _choose_cut(fvec, region, cfg)
    child_a, child_b = _split(region, axis, cut)
    wa = _solve(fvec, ldvec, child_a, cfg, out)
    wb = _solve(fvec, ldvec, child_b, cfg, out)
    if wa + wb != w:
        raise WindingError(
            f"winding additivity violated at {axis}-cut {cut:.6g}: {w} != {wa} + {wb}"
        )
    return w


def _as_vectorized(fn):
    def wrapped(z):
        return np.asarray(fn(np.asarray(z, dtype=complex)), dtype=complex)

    return wrapped


def count_zeros(
    logderiv: Callable,
    region: ComplexRegion,
    cfg: RootfinderConfig = DEFAULT_ROOT_CONFIG,
    f: Optional[Callable] = None,
) -> int:
    """Number of zeros (with multiplicity) inside the region.

    When f is supplied the winding is telescoped from its resolved phase and
    cross-checked against quadrature; without f only the quadrature route is
    available.  A zero detected on the boundary dilates the region by 1e-4
    on that side (deterministically) and retries.
    """
    ldvec = _as_vectorized(logderiv)
    fvec = _as_vectorized(f) if f is not None else None
    current = region
    last_exc = None
    for _ in range(5):
        try:
            if fvec is not None:
                w, _ = _winding_and_moments(fvec, ldvec, current, cfg)
                return w
            return _winding_logderiv_only(ldvec, current, cfg)
        except BoundaryProximityError as exc:
            last_exc = exc
            current = _dilated(current, exc, cfg.dilation)
    raise last_exc


def locate_zeros(
    f: Callable,
    logderiv: Callable,
    region: ComplexRegion,
    cfg: RootfinderConfig = DEFAULT_ROOT_CONFIG,
) -> RootSet:
    """All zeros of f inside the region, with multiplicities.

    Boundary zeros are absorbed by dilating the requested region by 1e-4 on
    the offending side, so locations within that jitter of the boundary may
    be reported.  Roots are sorted by (Re, Im); im parts below 1e-10 snap to
    the real axis.
    """
    fvec = _as_vectorized(f)
    ldvec = _as_vectorized(logderiv)
    current = region
    last_exc = None
    for _ in range(5):
        out: List[RootRecord] = []
        try:
            w = _solve(fvec, ldvec, current, cfg, out)
        except BoundaryProximityError as exc:
            last_exc = exc
            current = _dilated(current, exc, cfg.dilation)
            continue
        merged = _merge_duplicates(out, cfg)
        total = sum(r.multiplicity for r in merged)
        if total != w:
            raise WindingError(
                f"root multiplicities sum to {total} but region winding is {w}"
            )
        merged.sort(key=lambda r: (r.location.real, r.location.imag))
        return RootSet(roots=tuple(merged), region=current, winding=w)
    raise last_exc


def _merge_duplicates(records: List[RootRecord], cfg: RootfinderConfig) -> List[RootRecord]:
    """Coalesce identical roots found through adjacent boxes (split jitter)."""
    merged: List[RootRecord] = []
    for rec in records:
        for i, kept in enumerate(merged):
            tol = 100.0 * cfg.root_tol * (1.0 + abs(kept.location))
            if abs(kept.location - rec.location) < tol:
                merged[i] = RootRecord(
                    kept.location,
                    kept.multiplicity + rec.multiplicity,
                    min(kept.residual, rec.residual),
                    kept.polished and rec.polished,
                )
                break
        else:
            merged.append(rec)
    return merged
