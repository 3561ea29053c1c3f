"""Characteristic functions psi+-, Z, Z+- and their derivatives.

With lambda_refr = 0 the point spectrum of the zigzag generator is exactly
the zero set of

    Z(gamma) = 1 - psi_plus(gamma) psi_minus(gamma),

where (after folding both half lines onto u >= 0)

    psi_s(gamma) = 1 - 2 gamma INT_0^inf e^{-2 gamma u - U(s u)} du,  s = +-1.

For even potentials psi_plus = psi_minus =: psi and Z factors as
Z = (1 - psi)(1 + psi), whose factors Z+ and Z- are tracked as separate
branches.  Two backends: adaptive quadrature for any potential, and for the
Gaussian family the closed form

    psi_plus(gamma) = 1 - sqrt(2 pi) gamma erfcx(sqrt(2) gamma)      (sigma = 1)

with psi_sigma(gamma) = psi_1(sigma gamma) handling general widths exactly.
"""

from __future__ import annotations

import dataclasses
import math
from typing import Optional

import numpy as np

from .errors import DomainError, IntegrationError, NearZeroError
from .potential import PotentialModel
from .quadrature import DEFAULT_CONFIG, DecayProfile, QuadratureConfig, integrate_finite, truncation_radius
from .specialfn import erfcx_complex

__all__ = [
    "CharFunctionHandle",
    "make_handle",
    "psi",
    "psi_derivative",
    "psi_batch",
    "z_value",
    "z_log_derivative",
    "z_value_batch",
    "z_log_derivative_batch",
    "gaussian_closed_form_psi",
    "gaussian_closed_form_dpsi",
]

_SQRT_2PI = math.sqrt(2.0 * math.pi)
_SQRT_2 = math.sqrt(2.0)
_SQRT_PI = math.sqrt(math.pi)

NEAR_ZERO_TOL = 1e-14

_BRANCHES = ("full", "plus", "minus")


# ---------------------------------------------------------------------------
# Gaussian closed form (sigma = 1; widths handled by the gamma rescaling)
# ---------------------------------------------------------------------------


def gaussian_closed_form_psi(gamma):
    """psi(gamma) for U(x) = x^2/2; vectorized over gamma."""
    g = np.asarray(gamma, dtype=complex)
    out = 1.0 - _SQRT_2PI * g * erfcx_complex(_SQRT_2 * g)
    return out if out.ndim else complex(out)


def gaussian_closed_form_dpsi(gamma):
    """d psi / d gamma for U(x) = x^2/2.

    Differentiating with erfcx'(z) = 2 z erfcx(z) - 2/sqrt(pi) collapses to
    -sqrt(2 pi) [(1 + 4 gamma^2) erfcx(sqrt2 gamma) - 2 sqrt2 gamma / sqrt(pi)].
    """
    g = np.asarray(gamma, dtype=complex)
    e = erfcx_complex(_SQRT_2 * g)
    out = -_SQRT_2PI * ((1.0 + 4.0 * g * g) * e - 2.0 * _SQRT_2 * g / _SQRT_PI)
    return out if out.ndim else complex(out)


# ---------------------------------------------------------------------------
# quadrature backend
# ---------------------------------------------------------------------------


def _psi_quadrature(potential: PotentialModel, sign: int, gamma: complex, cfg: QuadratureConfig):
    """(psi, dpsi, err) by adaptive quadrature of the folded integrals.

    Uses the partially integrated form 1 - 2 gamma A with
    A = INT e^{-2 gamma u - W}, B = INT u e^{-2 gamma u - W}, W(u) = U(sign u),
    so dpsi = -2A + 4 gamma B comes out of the same panel sweep.
    """
    u0 = potential.U(0.0)
    profile = DecayProfile(
        potential=potential,
        alpha=max(0.0, -2.0 * gamma.real),
        direction=int(sign),
        center=0.0,
    )
    radius, tail = truncation_radius(profile, cfg)

    def rows(u):
        w = potential.U(sign * u) - u0
        kernel = np.exp(-2.0 * gamma * u - w)
        return np.stack([kernel, u * kernel])

    (a_val, b_val), (a_err, b_err) = integrate_finite(
        rows, 0.0, radius, cfg, oscillation=abs(2.0 * gamma.imag)
    )
    # polynomial factor u in B is swallowed by the truncation margin
    value = 1.0 - 2.0 * gamma * a_val
    deriv = -2.0 * a_val + 4.0 * gamma * b_val
    err = (2.0 * abs(gamma) + 2.0) * (a_err + tail) + 4.0 * abs(gamma) * (b_err + tail * radius)
    return complex(value), complex(deriv), float(err)


def _psi_defining_integral(potential: PotentialModel, sign: int, gamma: complex, cfg: QuadratureConfig):
    """psi via the defining integral with the U' factor (verification path)."""
    u0 = potential.U(0.0)
    profile = DecayProfile(
        potential=potential,
        alpha=max(0.0, -2.0 * gamma.real),
        direction=int(sign),
        center=0.0,
    )
    radius, tail = truncation_radius(profile, cfg)

    def f(u):
        w = potential.U(sign * u) - u0
        return sign * potential.dU(sign * u) * np.exp(-2.0 * gamma * u - w)

    value, err = integrate_finite(f, 0.0, radius, cfg, oscillation=abs(2.0 * gamma.imag))
    return complex(value), float(err) + tail * (1.0 + radius)


def psi(
    potential: PotentialModel,
    sign: int,
    gamma: complex,
    cfg: QuadratureConfig = DEFAULT_CONFIG,
    verify: bool = False,
) -> complex:
    """psi_plus (sign=+1) or psi_minus (sign=-1) by quadrature.

    verify=True also evaluates the defining integral with the U' factor and
    insists the two routes agree within their combined error estimates.
    """
    if sign not in (+1, -1):
        raise DomainError(f"sign must be +1 or -1, got {sign!r}")
    gamma = complex(gamma)
    value, _, err = _psi_quadrature(potential, sign, gamma, cfg)
    if verify:
        alt, alt_err = _psi_defining_integral(potential, sign, gamma, cfg)
        budget = err + alt_err + 1e-11
        if abs(value - alt) > budget:
            raise IntegrationError(
                f"psi backends disagree at gamma={gamma}: partial-integration form "
                f"{value} vs defining integral {alt} (budget {budget:.2e})"
            )
    return value


def psi_derivative(
    potential: PotentialModel,
    sign: int,
    gamma: complex,
    cfg: QuadratureConfig = DEFAULT_CONFIG,
) -> complex:
    """d psi_sign / d gamma by quadrature (shares panels with psi)."""
    if sign not in (+1, -1):
        raise DomainError(f"sign must be +1 or -1, got {sign!r}")
    _, deriv, _ = _psi_quadrature(potential, sign, complex(gamma), cfg)
    return deriv


def psi_batch(potential: PotentialModel, sign: int, gammas, cfg: QuadratureConfig = DEFAULT_CONFIG):
    """(psi values, dpsi values) for an array of gammas in one adaptive pass.

    All gammas share quadrature panels (2 rows each: kernel and u * kernel),
    with the truncation radius and oscillation guard taken from the worst
    member of the batch.  This is what keeps contour integration affordable
    for potentials without a closed form.
    """
    g = np.atleast_1d(np.asarray(gammas, dtype=complex))
    if g.size == 0:
        return np.zeros(0, complex), np.zeros(0, complex)
    u0 = potential.U(0.0)
    alpha = float(np.max(np.maximum(0.0, -2.0 * g.real)))
    profile = DecayProfile(potential=potential, alpha=alpha, direction=int(sign), center=0.0)
    radius, _ = truncation_radius(profile, cfg)

    def rows(u):
        w = potential.U(sign * u) - u0
        kernel = np.exp(-2.0 * g[:, None] * u[None, :] - w[None, :])
        return np.concatenate([kernel, u[None, :] * kernel], axis=0)

    vals, _ = integrate_finite(
        rows, 0.0, radius, cfg, oscillation=float(np.max(np.abs(2.0 * g.imag)))
    )
    a_val = vals[: g.size]
    b_val = vals[g.size :]
    return 1.0 - 2.0 * g * a_val, -2.0 * a_val + 4.0 * g * b_val


# ---------------------------------------------------------------------------
# handles: branch + backend + memo
# ---------------------------------------------------------------------------


@dataclasses.dataclass(frozen=True)
class CharFunctionHandle:
    """Bound (potential, branch, backend, config) with per-gamma memoization.

    branch 'full' evaluates Z = 1 - psi+ psi-; 'plus'/'minus' evaluate the
    even-potential factors Z+- = 1 -+ psi.  The closed-form backend is only
    legal for the gaussian family.
    """

    potential: PotentialModel
    branch: str = "full"
    backend: str = "quadrature"
    cfg: QuadratureConfig = DEFAULT_CONFIG
    _memo: dict = dataclasses.field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        if self.branch not in _BRANCHES:
            raise DomainError(f"branch must be one of {_BRANCHES}, got {self.branch!r}")
        if self.backend not in ("quadrature", "gaussian-closed-form"):
            raise DomainError(f"unknown backend {self.backend!r}")
        if self.backend == "gaussian-closed-form" and self.potential.family != "gaussian":
            raise DomainError("closed-form backend requires the gaussian family")
        if self.branch in ("plus", "minus") and not self.potential.is_symmetric:
            raise DomainError("plus/minus branches require an even potential")

    # psi+-(gamma) and derivatives, all four at once, memoized
    def _values(self, gamma: complex):
        key = complex(gamma)
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        if self.backend == "gaussian-closed-form":
            s = self.potential.sigma
            pp = complex(gaussian_closed_form_psi(s * key))
            dp = s * complex(gaussian_closed_form_dpsi(s * key))
            vals = (pp, dp, pp, dp)
        elif self.potential.is_symmetric:
            pp, dp, _ = _psi_quadrature(self.potential, +1, key, self.cfg)
            vals = (pp, dp, pp, dp)
        else:
            pp, dp, _ = _psi_quadrature(self.potential, +1, key, self.cfg)
            pm, dm, _ = _psi_quadrature(self.potential, -1, key, self.cfg)
            vals = (pp, dp, pm, dm)
        if len(self._memo) > 200000:
            self._memo.clear()
        self._memo[key] = vals
        return vals

    def psi_at(self, gamma: complex):
        """(psi+, dpsi+, psi-, dpsi-) at gamma, no near-zero guard.

        Unlike z_value this is safe to call at eigenvalues, where Z itself
        vanishes but the psi values are perfectly regular.
        """
        return self._values(complex(gamma))

    def values_batch(self, gammas):
        """(psi+, dpsi+, psi-, dpsi-) row arrays for an array of gammas."""
        g = np.atleast_1d(np.asarray(gammas, dtype=complex))
        if self.backend == "gaussian-closed-form":
            s = self.potential.sigma
            pp = np.asarray(gaussian_closed_form_psi(s * g), dtype=complex)
            dp = s * np.asarray(gaussian_closed_form_dpsi(s * g), dtype=complex)
            return pp, dp, pp, dp
        out = np.zeros((4, g.size), dtype=complex)
        miss = [i for i, z in enumerate(g) if complex(z) not in self._memo]
        if miss:
            zm = g[miss]
            pp, dp = psi_batch(self.potential, +1, zm, self.cfg)
            if self.potential.is_symmetric:
                pm, dm = pp, dp
            else:
                pm, dm = psi_batch(self.potential, -1, zm, self.cfg)
            for j, i in enumerate(miss):
                self._memo[complex(g[i])] = (
                    complex(pp[j]),
                    complex(dp[j]),
                    complex(pm[j]),
                    complex(dm[j]),
                )
        for i, z in enumerate(g):
            out[:, i] = self._memo[complex(z)]
        return out[0], out[1], out[2], out[3]


def make_handle(
    potential: PotentialModel,
    branch: str = "full",
    cfg: QuadratureConfig = DEFAULT_CONFIG,
    backend: Optional[str] = None,
) -> CharFunctionHandle:
    """Build a handle, defaulting to the closed form when it is available."""
    if backend is None:
        backend = "gaussian-closed-form" if potential.family == "gaussian" else "quadrature"
    return CharFunctionHandle(potential=potential, branch=branch, backend=backend, cfg=cfg)


def z_value(handle: CharFunctionHandle, gamma: complex) -> complex:
    pp, _, pm, _ = handle._values(gamma)
    if handle.branch == "full":
        return 1.0 - pp * pm
    if handle.branch == "plus":
        return 1.0 - pp
    return 1.0 + pp


def z_log_derivative(handle: CharFunctionHandle, gamma: complex) -> complex:
    """Z'(gamma)/Z(gamma) for the handle's branch.

    Raises NearZeroError when |Z| < 1e-14; callers in the rootfinder treat
    that as having landed on a root.
    """
    pp, dp, pm, dm = handle._values(gamma)
    if handle.branch == "full":
        z = 1.0 - pp * pm
        num = -(pm * dp + pp * dm)
    elif handle.branch == "plus":
        z = 1.0 - pp
        num = -dp
    else:
        z = 1.0 + pp
        num = dp
    if abs(z) < NEAR_ZERO_TOL:
        raise NearZeroError(gamma, abs(z))
    return num / z


def z_value_batch(handle: CharFunctionHandle, gammas):
    """Vectorized z_value; accepts and returns numpy arrays."""
    pp, _, pm, _ = handle.values_batch(gammas)
    if handle.branch == "full":
        return 1.0 - pp * pm
    if handle.branch == "plus":
        return 1.0 - pp
    return 1.0 + pp


def z_log_derivative_batch(handle: CharFunctionHandle, gammas):
    """Vectorized Z'/Z; raises NearZeroError at the first numerically-zero Z."""
    g = np.atleast_1d(np.asarray(gammas, dtype=complex))
    pp, dp, pm, dm = handle.values_batch(g)
    if handle.branch == "full":
        z = 1.0 - pp * pm
        num = -(pm * dp + pp * dm)
    elif handle.branch == "plus":
        z = 1.0 - pp
        num = -dp
    else:
        z = 1.0 + pp
        num = dp
    small = np.abs(z) < NEAR_ZERO_TOL
    if small.any():
        i = int(np.argmax(small))
        raise NearZeroError(complex(g[i]), float(np.abs(z[i])))
    return num / z
