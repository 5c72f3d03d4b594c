"""Closed-form response of the double-pumped gain medium.

The medium is a three-level atomic ensemble driven by two control
lasers detuned by +-delta0 from their common center, which gives the
probe two gain peaks at sideband frequencies near +-delta0 and
anomalous (negative) dispersion in between. This module provides the
susceptibility, the probe transfer coefficient, the added-noise
coefficients of the amplification process under both bath models, the
stationarity classification, the weak-coupling validity margin, and
the solver for the detuning that cancels the arm propagation phase.

All rates and frequencies are plain floats in any consistent unit
system (tests use units of the arm delay, SI works equally well). The
frequency-dependent functions accept numpy arrays for omega.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import PoleError, SingularParametrizationError
from .numerics import solve_quadratic

__all__ = [
    "MediumParams",
    "MediumClass",
    "NoiseModel",
    "susceptibility",
    "probe_transfer",
    "noise_coefficients",
    "classify_medium",
    "validity_margin",
    "round_trip_phase",
    "solve_detuning",
    "map_eta_xi",
    "eta_xi_of",
]


class MediumClass(Enum):
    STATIONARY = "stationary"
    ATOMIC_INSTABILITY = "atomic"
    NON_STATIONARY = "non-stationary"


class NoiseModel(Enum):
    """Bookkeeping of the decoherence baths.

    LOCAL: each atom couples to its own bath; the per-atom coefficients
    carry the pump rate divided by the atom count and there are
    atom_count independent channels. COLLECTIVE: one common bath with
    the full ensemble pump rate. The two models yield identical noise
    power, so the choice never changes the detector sensitivity.
    """

    LOCAL = "local"
    COLLECTIVE = "collective"


@dataclass(frozen=True)
class MediumParams:
    """Rates and detuning of the double-pumped gain medium.

    gamma12         effective |2> -> |1> transition rate
    gamma_opt_total pump-mediated anti-damping rate of the whole
                    ensemble (atom count already folded in)
    delta0          half the frequency splitting of the two control
                    fields; 0 selects single pumping
    atom_count      number of atoms; enters only the noise bookkeeping
    """

    gamma12: float
    gamma_opt_total: float
    delta0: float
    atom_count: int = 1

    def __post_init__(self) -> None:
        if self.gamma12 <= 0.0:
            raise ValueError(f"gamma12 must be positive, got {self.gamma12}")
        if self.gamma_opt_total < 0.0:
            raise ValueError(
                f"gamma_opt_total must be nonnegative, got {self.gamma_opt_total}")
        if self.delta0 < 0.0:
            raise ValueError(f"delta0 must be nonnegative, got {self.delta0}")
        if self.atom_count < 1:
            raise ValueError(f"atom_count must be >= 1, got {self.atom_count}")

    @property
    def gamma_opt_per_atom(self) -> float:
        return self.gamma_opt_total / self.atom_count

    @property
    def damping_gap(self) -> float:
        """gamma12 - gamma_opt_total; positive for a non-lasing medium."""
        return self.gamma12 - self.gamma_opt_total


def _denominators(p: MediumParams, omega):
    """The two resonance denominators i(omega +- delta0) - gamma12 + Gamma."""
    base = p.gamma_opt_total - p.gamma12
    den_plus = 1j * (np.asarray(omega) + p.delta0) + base
    den_minus = 1j * (np.asarray(omega) - p.delta0) + base
    if np.any(den_plus == 0) or np.any(den_minus == 0):
        raise PoleError(
            "response evaluated on a pole: gamma12 == gamma_opt_total "
            "and omega == +-delta0")
    return den_plus, den_minus


def susceptibility(p: MediumParams, omega):
    """Probe susceptibility chi(omega) of the pumped ensemble.

    chi = 2i G / (i(omega + d0) - g12 + G) + 2i G / (i(omega - d0) - g12 + G)
    with G the ensemble pump rate. Purely imaginary at omega = 0 and
    vanishing for large |omega| or zero pumping.
    """
    den_plus, den_minus = _denominators(p, omega)
    chi = 2j * p.gamma_opt_total * (1.0 / den_plus + 1.0 / den_minus)
    return chi if np.ndim(omega) else complex(chi)


def probe_transfer(p: MediumParams, omega):
    """Transfer coefficient of a sideband passing once through the medium.

    Equals 1 + i chi / 2 identically; kept in the explicit two-pole form
    so the identity is a cross-check rather than a definition. Satisfies
    conj(M(-omega)) == M(omega) for real omega.
    """
    den_plus, den_minus = _denominators(p, omega)
    m = 1.0 - p.gamma_opt_total / den_plus - p.gamma_opt_total / den_minus
    return m if np.ndim(omega) else complex(m)


def noise_coefficients(p: MediumParams, omega, model: NoiseModel):
    """Added-noise coefficients (upper, lower) of the amplifier.

    N_pm = sqrt(2 g12 g_pump) / (+-i d0 - i omega + g12 - G) where
    g_pump is the per-atom pump rate for the LOCAL model (to be summed
    over atom_count independent baths) and the full ensemble rate for
    the COLLECTIVE single-bath model. Both satisfy
    conj(N_plus(-omega)) == N_minus(omega).
    """
    if model is NoiseModel.LOCAL:
        g_pump = p.gamma_opt_per_atom
    else:
        g_pump = p.gamma_opt_total
    amp = math.sqrt(2.0 * p.gamma12 * g_pump)
    den_plus, den_minus = _denominators(p, omega)
    # +i d0 - i omega + g12 - G == -(i(omega - d0) + G - g12), and the
    # -d0 channel likewise picks up the other resonance denominator
    n_plus = amp / (-den_minus)
    n_minus = amp / (-den_plus)
    if np.ndim(omega):
        return n_plus, n_minus
    return complex(n_plus), complex(n_minus)


def classify_medium(p: MediumParams, margin: float = 1.0) -> MediumClass:
    """Stationarity classification of the bare medium.

    Population inversion (gamma12 < Gamma) makes the ensemble lase on
    its own. Otherwise the beat of the two pumps at 2*delta0 must stay
    negligible, which requires delta0^2 + (gamma12 - Gamma)^2 to exceed
    margin * Gamma^2 / 4; the margin factor makes the survey threshold
    reproducible and tunable.
    """
    if margin < 1.0:
        raise ValueError(f"margin must be >= 1, got {margin}")
    if p.gamma12 < p.gamma_opt_total:
        return MediumClass.ATOMIC_INSTABILITY
    lhs = p.delta0**2 + p.damping_gap**2
    if lhs < margin * p.gamma_opt_total**2 / 4.0:
        return MediumClass.NON_STATIONARY
    return MediumClass.STATIONARY


def validity_margin(p: MediumParams, omega):
    """Size of the neglected pump-beat correction, max of |f - 1|^2.

    f_pm - 1 = (Gamma / 2) / (gamma12 - Gamma + i(omega +- delta0)).
    Small values certify the weak-coupling input-output relation.
    """
    _denominators(p, omega)  # shared pole guard
    gap = p.damping_gap
    f_plus = 0.5 * p.gamma_opt_total / (gap + 1j * (np.asarray(omega) + p.delta0))
    f_minus = 0.5 * p.gamma_opt_total / (gap + 1j * (np.asarray(omega) - p.delta0))
    out = np.maximum(np.abs(f_plus) ** 2, np.abs(f_minus) ** 2)
    return out if np.ndim(omega) else float(out)


def round_trip_phase(p: MediumParams, omega, tau: float):
    """Phase accumulated per recycling round trip in the weak-coupling form.

    2 omega tau from the arm propagation plus Re(chi)/2 from the medium.
    At a phase-cancellation detuning the slope of this phase vanishes at
    omega = 0, which is the white-light condition.
    """
    phase = 2.0 * np.asarray(omega) * tau + 0.5 * np.real(susceptibility(p, omega))
    return phase if np.ndim(omega) else float(phase)


def solve_detuning(gamma12: float, gamma_opt_total: float,
                   tau: float) -> tuple[float, ...]:
    """Detunings delta0 that cancel the arm propagation phase.

    With x = delta0^2, g = gamma12 - Gamma and A = Gamma / tau, the
    cancellation condition Gamma (g^2 - x) / (g^2 + x)^2 = -tau
    rearranges to x^2 + (2 g^2 - A) x + g^2 (g^2 + A) = 0. Strictly
    positive roots are returned as sqrt(x), ascending; a repeated root
    appears once; an empty tuple means the cancellation is infeasible
    (discriminant A (A - 8 g^2) < 0). The x = 0 root arising at g = 0
    is the single-pump degenerate case and is discarded.
    """
    if gamma12 <= 0.0 or gamma_opt_total <= 0.0:
        raise ValueError("rates must be positive")
    if tau <= 0.0:
        raise ValueError("tau must be positive")
    g2 = (gamma12 - gamma_opt_total) ** 2
    a_rate = gamma_opt_total / tau
    sol = solve_quadratic(1.0, 2.0 * g2 - a_rate, g2 * (g2 + a_rate))
    return tuple(math.sqrt(x) for x in sol.roots if x > 0.0)


def map_eta_xi(eta: float, xi: float, tau: float) -> tuple[float, float]:
    """Rates (gamma12, gamma_opt_total) for survey coordinates (eta, xi).

    eta = Gamma / gamma12 and xi = 8 (gamma12 - Gamma)^2 tau / gamma12,
    so gamma12 = xi / (8 tau (1 - eta)^2) and Gamma = eta gamma12. The
    map is singular along eta = 1 (zero damping gap).
    """
    if not 0.0 < eta < 1.0:
        if eta == 1.0:
            raise SingularParametrizationError(
                "eta = 1 is unreachable through this parametrization")
        raise ValueError(f"eta must lie in (0, 1), got {eta}")
    if not 0.0 < xi <= 1.0:
        raise ValueError(f"xi must lie in (0, 1], got {xi}")
    if tau <= 0.0:
        raise ValueError("tau must be positive")
    gamma12 = xi / (8.0 * tau * (1.0 - eta) ** 2)
    return gamma12, eta * gamma12


def eta_xi_of(gamma12: float, gamma_opt_total: float,
              tau: float) -> tuple[float, float]:
    """Survey coordinates (eta, xi) of a rate pair; inverse of map_eta_xi."""
    if gamma12 <= 0.0 or tau <= 0.0:
        raise ValueError("gamma12 and tau must be positive")
    eta = gamma_opt_total / gamma12
    xi = 8.0 * (gamma12 - gamma_opt_total) ** 2 * tau / gamma12
    return eta, xi
