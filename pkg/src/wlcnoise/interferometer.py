"""Quadrature-domain model of the signal-recycled detector.

The differential mode of the interferometer maps onto a single cavity:
an arm round trip (pure delay e^{2 i omega tau} on both quadratures),
the gain medium (diagonal block M(omega) because conj(M(-omega)) ==
M(omega)), and the signal recycling mirror closing the loop with
amplitude reflectivity r_s. Test masses are taken infinitely heavy, so
radiation-pressure back-action is absent and the shot-noise-limited
strain spectral density is assembled from the loop blocks plus the
medium's added noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.constants import c as SPEED_OF_LIGHT
from scipy.constants import hbar as HBAR

from . import medium as med_mod
from .errors import MarginalStabilityError, ZeroSignalError
from .medium import MediumParams, NoiseModel
from .numerics import identity2, inv2, scalar_block

__all__ = [
    "IfoParams",
    "LoopBlocks",
    "reference_detector",
    "quad_from_sideband",
    "build_loop",
    "open_loop_gain",
    "strain_psd",
    "baseline_integrated_inverse_psd",
]

# sideband-to-quadrature change of basis and its inverse
M_QS = np.array([[1.0, 1.0], [-1.0j, 1.0j]], dtype=complex) / math.sqrt(2.0)
M_QS_INV = np.array([[1.0, 1.0j], [1.0, -1.0j]], dtype=complex) / math.sqrt(2.0)


@dataclass(frozen=True)
class IfoParams:
    """Detector parameters (SI units unless the caller is consistent otherwise).

    arm_length                  L, one-way arm length
    circulating_power           P_c in the arms
    carrier_angular_frequency   omega_0 of the laser
    srm_amplitude_reflectivity  r_s in [0, 1); t_s^2 = 1 - r_s^2 (lossless)
    homodyne_angle              readout quadrature angle; 0 reads phase
    include_additional_noise    whether the medium's added noise enters
                                the strain spectral density
    """

    arm_length: float
    circulating_power: float
    carrier_angular_frequency: float
    srm_amplitude_reflectivity: float
    homodyne_angle: float = 0.0
    include_additional_noise: bool = True

    def __post_init__(self) -> None:
        if self.arm_length <= 0.0:
            raise ValueError("arm_length must be positive")
        if self.circulating_power <= 0.0:
            raise ValueError("circulating_power must be positive")
        if self.carrier_angular_frequency <= 0.0:
            raise ValueError("carrier_angular_frequency must be positive")
        if not 0.0 <= self.srm_amplitude_reflectivity < 1.0:
            raise ValueError("srm_amplitude_reflectivity must lie in [0, 1)")

    @property
    def tau(self) -> float:
        """One-way arm propagation delay L / c."""
        return self.arm_length / SPEED_OF_LIGHT

    @property
    def srm_amplitude_transmissivity(self) -> float:
        return math.sqrt(1.0 - self.srm_amplitude_reflectivity**2)

    @property
    def signal_strength(self) -> float:
        """P_c omega_0 L^2 / (hbar c^2), the shot-noise signal scale (a rate)."""
        return (self.circulating_power * self.carrier_angular_frequency
                * self.arm_length**2 / (HBAR * SPEED_OF_LIGHT**2))

    @property
    def free_spectral_range(self) -> float:
        """Angular free spectral range pi / tau used as integration limit."""
        return math.pi / self.tau

    def with_power_reflectivity(self, rs2: float) -> "IfoParams":
        return replace(self, srm_amplitude_reflectivity=math.sqrt(rs2))


def reference_detector(srm_power_reflectivity: float = 0.8,
                       homodyne_angle: float = 0.0,
                       include_additional_noise: bool = True) -> IfoParams:
    """A 4 km, 800 kW, 1064 nm detector used for figure reproduction.

    The headline results are dimensionless and do not depend on these
    numbers; they are only a concrete SI anchor.
    """
    wavelength = 1064e-9
    return IfoParams(
        arm_length=4000.0,
        circulating_power=800e3,
        carrier_angular_frequency=2.0 * math.pi * SPEED_OF_LIGHT / wavelength,
        srm_amplitude_reflectivity=math.sqrt(srm_power_reflectivity),
        homodyne_angle=homodyne_angle,
        include_additional_noise=include_additional_noise,
    )


@dataclass(frozen=True)
class LoopBlocks:
    """All 2x2 quadrature blocks of the closed loop at one frequency.

    m0      arm round trip, e^{2 i omega tau} identity
    m_tot   medium block times m0
    m_c     closed-loop block (I - r_s m_tot)^-1
    m_k     input-output block -r_s I + t_s^2 m_c m_tot
    d_vec   signal drive e^{i omega tau} (0, sqrt(2 K))
    n_plus  quadrature block of the upper added-noise channel (per bath)
    n_minus quadrature block of the lower added-noise channel (per bath)
    """

    m0: np.ndarray
    m_tot: np.ndarray
    m_c: np.ndarray
    m_k: np.ndarray
    d_vec: np.ndarray
    n_plus: np.ndarray
    n_minus: np.ndarray


def quad_from_sideband(upper: complex, lower_conj: complex) -> np.ndarray:
    """Quadrature block of a sideband-diagonal transfer.

    Given the transfer of the upper sideband at +omega and the
    conjugated transfer of the lower sideband at -omega, returns
    M_qs diag(upper, lower_conj) M_qs^-1. A pair (z, conj(z)) maps to a
    real-entried block.
    """
    return M_QS @ np.diag([upper, lower_conj]).astype(complex) @ M_QS_INV


def open_loop_gain(ifo: IfoParams, med: MediumParams, omega) -> complex:
    """Scalar open-loop gain: arm delay times medium transfer.

    The closed-loop scalar is 1 / (1 - r_s * open_loop_gain).
    """
    g = np.exp(2j * np.asarray(omega) * ifo.tau) * med_mod.probe_transfer(med, omega)
    return g if np.ndim(omega) else complex(g)


def build_loop(ifo: IfoParams, med: MediumParams, model: NoiseModel,
               omega: float) -> LoopBlocks:
    """Assemble every loop block at sideband frequency omega.

    Raises MarginalStabilityError when the closed loop is singular at
    omega (determinant of I - r_s m_tot below 1e-12).
    """
    rs = ifo.srm_amplitude_reflectivity
    ts = ifo.srm_amplitude_transmissivity
    delay = complex(np.exp(2j * omega * ifo.tau))
    m0 = scalar_block(delay)
    m_scalar = med_mod.probe_transfer(med, omega)
    m_tot = scalar_block(m_scalar * delay)

    closed = identity2() - rs * m_tot
    det = closed[0, 0] * closed[1, 1] - closed[0, 1] * closed[1, 0]
    if abs(det) <= 1e-12:
        raise MarginalStabilityError(
            f"closed loop singular at omega = {omega!r} (|det| = {abs(det):.3e})")
    m_c = inv2(closed)
    m_k = -rs * identity2() + ts**2 * (m_c @ m_tot)

    d_vec = complex(np.exp(1j * omega * ifo.tau)) * np.array(
        [0.0, math.sqrt(2.0 * ifo.signal_strength)], dtype=complex)

    n_up, n_lo = med_mod.noise_coefficients(med, omega, model)
    n_plus = quad_from_sideband(n_up, n_lo)
    n_minus = quad_from_sideband(n_lo, n_up)
    return LoopBlocks(m0=m0, m_tot=m_tot, m_c=m_c, m_k=m_k, d_vec=d_vec,
                      n_plus=n_plus, n_minus=n_minus)


def strain_psd(ifo: IfoParams, med: MediumParams, model: NoiseModel,
               omega: float) -> float:
    """Shot-noise-limited strain spectral density at omega.

    Vacuum entering at the dark port reaches the readout through m_k;
    the gravitational-wave signal through t_s m_c d_vec; the medium's
    added noise through t_s m_c m0 applied to the per-bath noise blocks,
    summed over independent baths. Every transfer is evaluated from the
    full block chain, so no analytic cancellation is assumed. The atom
    count cancels between the bath count and the per-bath coefficients,
    making the result independent of it.
    """
    blocks = build_loop(ifo, med, model, omega)
    v_h = np.array([math.sin(ifo.homodyne_angle), math.cos(ifo.homodyne_angle)],
                   dtype=complex)
    ts = ifo.srm_amplitude_transmissivity

    response = blocks.m_c @ blocks.d_vec
    signal_amp = ts * (v_h @ response)
    signal_power = abs(signal_amp) ** 2
    # orthogonal readout leaves only roundoff-level signal
    floor = (1e-13 * ts * float(np.linalg.norm(response))) ** 2
    if signal_power <= floor:
        raise ZeroSignalError(
            f"readout at homodyne angle {ifo.homodyne_angle} carries no signal")

    row_k = v_h @ blocks.m_k
    vacuum_power = float(np.real(row_k @ np.conj(row_k)))

    noise_power = 0.0
    if ifo.include_additional_noise:
        baths = med.atom_count if model is NoiseModel.LOCAL else 1
        propagate = ts * (blocks.m_c @ blocks.m0)
        for block in (blocks.n_plus, blocks.n_minus):
            row = v_h @ (propagate @ block)
            noise_power += baths * float(np.real(row @ np.conj(row)))

    return (vacuum_power + noise_power) / signal_power


def baseline_integrated_inverse_psd(ifo: IfoParams) -> float:
    """Frequency-integrated inverse strain noise of the bare detector.

    Integral of 1/S_hh over one free spectral range for the detector
    without the medium: 2 pi L P_c omega_0 / (hbar c). Independent of
    the recycling mirror, it only depends on the circulating power and
    the arm length.
    """
    return (2.0 * math.pi * ifo.arm_length * ifo.circulating_power
            * ifo.carrier_angular_frequency / (HBAR * SPEED_OF_LIGHT))
