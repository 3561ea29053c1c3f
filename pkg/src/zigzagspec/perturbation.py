"""First-order eigenvalue response to constant refreshment.

Adding a constant epsilon to the switching intensity perturbs the generator
by the bounded operator B = F - I, and each simple eigenvalue moves as

    gamma(eps) = gamma + eps (<f, conj f> / <f, F conj f> - 1) + o(eps),

where both pairings are the bilinear (not sesquilinear) integrals of f
against itself.  On the symmetric branches the same expansion reads
+/- <f, conj f>_nu / <f, J conj f>_nu - 1.  Only the first-order term is
modeled here; there is no second-order formula to implement.
"""

from __future__ import annotations

import dataclasses
from typing import Optional, Tuple

import numpy as np

from .charfn import make_handle
from .errors import DomainError, NonSimpleEigenvalueError
from .operator import (
    _pair_full,
    _pair_sym,
    eigenfunction,
    inner_product_mu,
)
from .potential import PotentialModel, parse_potential
from .quadrature import DEFAULT_CONFIG, QuadratureConfig
from .spectrum import SpectrumResult

__all__ = [
    "PerturbedEigenvalue",
    "PerturbedSpectrum",
    "refreshment_coefficient",
    "refreshment_coefficient_symmetric",
    "perturbed_spectrum",
]

_SIMPLE_TOL = 1e-8


def _check_simple(potential: PotentialModel, gamma: complex, branch: str, cfg):
    handle = make_handle(potential, branch=branch, cfg=cfg)
    pp, dp, pm, dm = handle.psi_at(gamma)
    if branch == "full":
        dz = -(pm * dp + pp * dm)
    elif branch == "plus":
        dz = -dp
    else:
        dz = dp
    if abs(dz) <= _SIMPLE_TOL:
        raise NonSimpleEigenvalueError(gamma, abs(dz))


def refreshment_coefficient(
    potential: PotentialModel,
    gamma: complex,
    cfg: QuadratureConfig = DEFAULT_CONFIG,
) -> complex:
    """mu

    <f_gamma, conj f_gamma> / <f_gamma, F conj f_gamma> - 1 for B = F - I.
    """
    gamma = complex(gamma)
    _check_simple(potential, gamma, "full", cfg)
    f = eigenfunction(potential, gamma, "full", cfg)
    den = _pair_full(f, f, potential, cfg)
    # bilinear square: sum_theta int f(x,theta)^2 e^{-U} dx
    num, _ = inner_product_mu(
        f,
        lambda x, th: np.conj(f.component(x, th)),
        potential,
        cfg,
        growth=2.0 * abs(gamma.real),
        oscillation=4.0 * abs(gamma.imag),
    )
    return num / den - 1.0


def refreshment_coefficient_symmetric(
    potential: PotentialModel,
    gamma: complex,
    branch: str,
    cfg: QuadratureConfig = DEFAULT_CONFIG,
) -> complex:
    """Branch form +/- <f, conj f>_nu / <f, J conj f>_nu - 1 for B = +/-J - I."""
    if branch not in ("plus", "minus"):
        raise DomainError(f"branch must be plus or minus, got {branch!r}")
    gamma = complex(gamma)
    _check_simple(potential, gamma, branch, cfg)
    f = eigenfunction(potential, gamma, branch, cfg)
    den = _pair_sym(f, f, potential, cfg, flip=True)
    num = _pair_sym(f, f, potential, cfg, flip=False)
    sign = 1.0 if branch == "plus" else -1.0
    return sign * num / den - 1.0


@dataclasses.dataclass(frozen=True)
class PerturbedEigenvalue:
    gamma: complex
    coefficient: Optional[complex]  # None when the base eigenvalue is not simple
    shifted: Optional[complex]
    resolved: bool


@dataclasses.dataclass(frozen=True)
class PerturbedSpectrum:
    base: SpectrumResult
    epsilon: float
    entries: Tuple[PerturbedEigenvalue, ...]

    def gap(self) -> Optional[float]:
        """First-order prediction of the perturbed spectral gap."""
        res = [
            -e.shifted.real
            for e in self.entries
            if e.resolved and e.gamma != 0 and e.shifted is not None
        ]
        return min(res) if res else None

    def arrows(self):
        """(gamma, coefficient) pairs for the perturbation-direction plot."""
        return [(e.gamma, e.coefficient) for e in self.entries if e.resolved]


def perturbed_spectrum(
    base: SpectrumResult,
    epsilon: float,
    cfg: QuadratureConfig = DEFAULT_CONFIG,
    potential: Optional[PotentialModel] = None,
) -> PerturbedSpectrum:
    """First-order shifted spectrum gamma + eps mu for every base eigenvalue.

    The potential is recovered from the descriptor recorded on ``base``; pass
    it explicitly for custom models whose descriptors do not round-trip.
    Non-simple entries (multiplicity > 1 or |Z'| at the simplicity floor) are
    kept but marked unresolved rather than failing the whole spectrum.
    """
    if epsilon < 0.0:
        raise DomainError(f"epsilon must be nonnegative, got {epsilon!r}")
    if potential is None:
        potential = parse_potential(base.potential_descriptor)
    entries = []
    for rec in base.eigenvalues:
        if rec.multiplicity != 1:
            entries.append(PerturbedEigenvalue(rec.gamma, None, None, False))
            continue
        try:
            mu = refreshment_coefficient(potential, rec.gamma, cfg)
        except NonSimpleEigenvalueError:
            entries.append(PerturbedEigenvalue(rec.gamma, None, None, False))
            continue
        entries.append(
            PerturbedEigenvalue(rec.gamma, mu, rec.gamma + epsilon * mu, True)
        )
    return PerturbedSpectrum(base=base, epsilon=float(epsilon), entries=tuple(entries))
