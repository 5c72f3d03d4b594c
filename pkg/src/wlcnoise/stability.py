"""Nyquist stability of the recycled loop with the gain medium.

The closed loop lases when 1 - r_s G_o(omega) has a zero in the upper
half of the complex frequency plane. With a stationary medium the open
loop gain G_o = e^{2 i omega tau} M(omega) is analytic there, so the
zero count equals the winding number of r_s G_o about the point (1, 0)
along the real axis closed through the decaying upper arc. An
independent argument-principle oracle counts the same zeros by
integrating the logarithmic derivative of 1 - r_s G_o around a
rectangle in the upper half plane.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import medium as med_mod
from .errors import AccuracyError, MarginalStabilityError, MediumNotStationaryError
from .interferometer import IfoParams, open_loop_gain
from .medium import MediumClass, MediumParams
from .numerics import _refine_curve, accumulate_winding

__all__ = [
    "Classification",
    "StabilityReport",
    "default_omega_max",
    "nyquist_contour",
    "classify_system",
    "root_count_oracle",
    "monotonicity_report",
]

CRITICAL_POINT = 1.0 + 0.0j
MARGINAL_ERROR_DISTANCE = 1e-9
MARGINAL_FLAG_DISTANCE = 1e-6
REFINE_NEAR_DISTANCE = 0.1


class Classification(Enum):
    STABLE = "stable"
    ATOMIC_INSTABILITY = "atomic"
    OPTICAL_INSTABILITY = "optical"
    NON_STATIONARY = "non-stationary"


@dataclass(frozen=True)
class StabilityReport:
    """Outcome of the full-system stability test.

    classification  final verdict; medium-level classes take precedence
    winding         encirclements of (1, 0) by r_s G_o (0 when the
                    contour was never computed)
    min_distance_to_critical  closest approach of the contour to (1, 0)
    omega_range_used          real-axis interval that was sampled
    marginal        contour approached (1, 0) closer than 1e-6; surveys
                    treat such cells as unstable
    """

    classification: Classification
    winding: int
    min_distance_to_critical: float
    omega_range_used: tuple[float, float]
    marginal: bool = False

    @property
    def stable(self) -> bool:
        return self.classification is Classification.STABLE


def default_omega_max(med: MediumParams, tau: float, multiplier: float = 50.0) -> float:
    """Sampling limit covering every rate scale of the loop."""
    return multiplier * max(med.delta0, med.gamma12, med.gamma_opt_total, 1.0 / tau)


def _require_damped(med: MediumParams) -> None:
    """Loop poles sit on the real axis when the damping gap closes."""
    if med.damping_gap <= 0.0:
        raise MarginalStabilityError(
            "medium is on the lasing threshold (gamma12 == gamma_opt_total); "
            "the loop poles lie on the real frequency axis")


def _tail_contained(ifo: IfoParams, med: MediumParams, omega_max: float) -> bool:
    """True when |r_s G_o| stays below 1 beyond omega_max.

    Beyond the gain peaks |M - 1| <= 2 Gamma / distance-to-resonance, so
    the contour tail spirals inside a disk that excludes (1, 0) once
    r_s (1 + bound) < 1.
    """
    gap = omega_max - med.delta0
    if gap <= 0.0:
        return False
    bound = 2.0 * med.gamma_opt_total / math.hypot(gap, med.damping_gap)
    return ifo.srm_amplitude_reflectivity * (1.0 + bound) < 1.0 - 1e-9


def _base_grid(med: MediumParams, tau: float, omega_max: float,
               base_samples: int | None) -> np.ndarray:
    """Initial omega samples on [0, omega_max].

    Uniform coverage dense enough for the delay turns, plus clusters
    around the gain peak at delta0 (width set by the damping gap) and
    around the band center.
    """
    turns = omega_max * tau / math.pi
    if base_samples is None:
        base_samples = int(min(max(4096, 16 * turns), 2**21))
    pieces = [np.linspace(0.0, omega_max, base_samples)]
    width = max(med.damping_gap, 1e-3 * med.delta0, 1e-12 / tau)
    if med.delta0 > 0.0:
        pieces.append(med.delta0 + width * np.linspace(-30.0, 30.0, 241))
        pieces.append(np.abs(med.delta0 + width * np.linspace(-1.0, 1.0, 81)))
    pieces.append(width * np.linspace(0.0, 30.0, 121))
    grid = np.concatenate(pieces)
    grid = grid[(grid >= 0.0) & (grid <= omega_max)]
    return np.unique(grid)


def _refined_half(ifo: IfoParams, med: MediumParams, omega_max: float,
                  base_samples: int | None) -> tuple[np.ndarray, np.ndarray]:
    """Refined samples of r_s G_o on [0, omega_max]."""
    rs = ifo.srm_amplitude_reflectivity

    def producer(w):
        return rs * open_loop_gain(ifo, med, w)

    omegas = _base_grid(med, ifo.tau, omega_max, base_samples)
    z = np.asarray(producer(omegas), dtype=complex)
    z, omegas = _refine_curve(z, omegas, producer, CRITICAL_POINT,
                              near_distance=REFINE_NEAR_DISTANCE)
    return omegas, z


def _closed_contour(half: np.ndarray) -> np.ndarray:
    """Close the half-axis image through the origin and mirror it.

    The negative-frequency image is the complex conjugate of the
    positive one, and the infinite upper arc maps to the origin because
    the delay factor decays there.
    """
    z_end = half[-1]
    s = np.linspace(0.0, 1.0, 9)[1:]
    down = z_end * (1.0 - s)
    up = np.conj(z_end) * s
    mirrored = np.conj(half[-2::-1])
    return np.concatenate([half, down, up, mirrored])


def nyquist_contour(ifo: IfoParams, med: MediumParams,
                    omega_max: float | None = None,
                    base_samples: int | None = None) -> np.ndarray:
    """Closed image of r_s G_o along the real axis plus the closing arc.

    Sampling is refined wherever the turning angle about (1, 0) per
    segment reaches pi/2 or a segment passes within 0.1 of (1, 0).
    Requires a stationary medium, whose response poles then lie in the
    lower half plane. The returned polyline starts and ends at the
    omega = 0 point (real) and is traversed with omega increasing.
    """
    if med_mod.classify_medium(med) is not MediumClass.STATIONARY:
        raise MediumNotStationaryError(
            "Nyquist contour requires a stationary medium")
    _require_damped(med)
    floor = default_omega_max(med, ifo.tau, multiplier=20.0)
    if omega_max is None:
        omega_max = default_omega_max(med, ifo.tau)
    elif omega_max < floor:
        raise ValueError(
            f"omega_max = {omega_max:g} is below the required {floor:g}")
    for _ in range(6):
        if _tail_contained(ifo, med, omega_max):
            break
        omega_max *= 2.0
    _, half = _refined_half(ifo, med, omega_max, base_samples)
    return _closed_contour(half)


def classify_system(ifo: IfoParams, med: MediumParams, margin: float = 1.0,
                    omega_max: float | None = None,
                    base_samples: int | None = None) -> StabilityReport:
    """Stability verdict for the full interferometer-plus-medium loop.

    Medium-level instabilities are reported before any contour is
    computed. For a stationary medium the verdict is the Nyquist
    winding about (1, 0): zero means stable, anything else is an
    optical (loop) instability. A contour approaching (1, 0) within
    1e-9 raises MarginalStabilityError; within 1e-6 the report is
    flagged marginal.
    """
    med_class = med_mod.classify_medium(med, margin=margin)
    if med_class is MediumClass.ATOMIC_INSTABILITY:
        return StabilityReport(Classification.ATOMIC_INSTABILITY, 0, math.inf,
                               (0.0, 0.0))
    if med_class is MediumClass.NON_STATIONARY:
        return StabilityReport(Classification.NON_STATIONARY, 0, math.inf,
                               (0.0, 0.0))
    _require_damped(med)

    if omega_max is None:
        omega_max = default_omega_max(med, ifo.tau)
    for _ in range(6):
        if _tail_contained(ifo, med, omega_max):
            break
        omega_max *= 2.0
    omegas, half = _refined_half(ifo, med, omega_max, base_samples)
    contour = _closed_contour(half)
    total, dist = accumulate_winding(contour, CRITICAL_POINT)
    if dist < MARGINAL_ERROR_DISTANCE:
        raise MarginalStabilityError(
            f"Nyquist contour passes within {dist:.3e} of (1, 0)")
    winding = int(round(total / (2.0 * math.pi)))
    marginal = dist < MARGINAL_FLAG_DISTANCE
    classification = (Classification.STABLE if winding == 0
                      else Classification.OPTICAL_INSTABILITY)
    return StabilityReport(classification, winding, float(dist),
                           (-float(omegas[-1]), float(omegas[-1])),
                           marginal=marginal)


# ---------------------------------------------------------------------------
# argument-principle oracle
# ---------------------------------------------------------------------------

def _loop_denominator_and_derivative(ifo: IfoParams, med: MediumParams, w):
    """F = 1 - r_s G_o and dF/domega at complex frequency w."""
    rs = ifo.srm_amplitude_reflectivity
    tau = ifo.tau
    gamma = med.gamma_opt_total
    base = gamma - med.gamma12
    den_p = 1j * (w + med.delta0) + base
    den_m = 1j * (w - med.delta0) + base
    m = 1.0 - gamma / den_p - gamma / den_m
    dm = 1j * gamma * (1.0 / den_p**2 + 1.0 / den_m**2)
    delay = np.exp(2j * w * tau)
    f = 1.0 - rs * delay * m
    df = -rs * delay * (2j * tau * m + dm)
    return f, df


def _edge_integral(ifo: IfoParams, med: MediumParams,
                   start: complex, stop: complex, samples: int,
                   max_rounds: int = 40,
                   max_points: int = 2**22) -> tuple[complex, float]:
    """Integral of d log F along a straight edge from dense samples.

    Segments are bisected until F changes by less than half a radian in
    phase and half a unit in log magnitude across each of them, which
    concentrates samples around zeros lying near the edge. On such a
    partition the per-segment integral of the logarithmic derivative is
    the principal-value log difference, so the sum is exact up to the
    no-phase-wrap resolution of the partition. Also returns the minimum
    |F| encountered.
    """
    w = np.linspace(start, stop, samples)
    f, _ = _loop_denominator_and_derivative(ifo, med, w)
    for _ in range(max_rounds):
        ratio = f[1:] / f[:-1]
        big = (np.abs(np.angle(ratio)) >= 0.5) | (np.abs(np.log(np.abs(ratio))) >= 0.5)
        if not big.any() or w.size >= max_points:
            break
        idx = np.nonzero(big)[0]
        w_mid = 0.5 * (w[idx] + w[idx + 1])
        f_mid, _ = _loop_denominator_and_derivative(ifo, med, w_mid)
        w = np.insert(w, idx + 1, w_mid)
        f = np.insert(f, idx + 1, f_mid)
    value = complex(np.log(f[1:] / f[:-1]).sum())
    return value, float(np.abs(f).min())


def root_count_oracle(ifo: IfoParams, med: MediumParams,
                      rect: tuple[float, float, float, float] | None = None,
                      integer_tol: float = 0.01) -> int:
    """Zeros of 1 - r_s G_o inside a rectangle of the upper half plane.

    Counts via (1 / 2 pi i) of the contour integral of the logarithmic
    derivative, evaluated from adaptively refined dense sampling along
    the rectangle edges; the result must land within integer_tol of a
    nonnegative integer, and the telescoping real part of the closed
    log integral must vanish. Independent from the Nyquist contour
    machinery.

    rect is (re_lo, re_hi, im_lo, im_hi); the default covers
    [-omega_max, omega_max] x [0, 10 max-rate].
    """
    _require_damped(med)
    tau = ifo.tau
    if rect is None:
        omega_max = default_omega_max(med, tau)
        height = 10.0 * max(med.delta0, med.gamma12, med.gamma_opt_total, 1.0 / tau)
        rect = (-omega_max, omega_max, 0.0, height)
    re_lo, re_hi, im_lo, im_hi = rect
    if not (re_lo < re_hi and im_lo < im_hi and im_lo >= 0.0):
        raise ValueError(f"rectangle {rect} must lie in the upper half plane")

    turns = (re_hi - re_lo) * tau / math.pi
    n_horiz = int(min(max(1024, 8 * turns), 2**20))
    n_vert = 256

    corners = [re_lo + 1j * im_lo, re_hi + 1j * im_lo,
               re_hi + 1j * im_hi, re_lo + 1j * im_hi]
    total = 0.0 + 0.0j
    min_f = math.inf
    for k in range(4):
        samples = n_horiz if k % 2 == 0 else n_vert
        value, edge_min = _edge_integral(
            ifo, med, corners[k], corners[(k + 1) % 4], samples)
        total += value
        min_f = min(min_f, edge_min)
    if min_f < 1e-9:
        raise MarginalStabilityError(
            f"zero of the loop denominator on the contour (|F| = {min_f:.3e})")
    count = total / (2j * math.pi)
    value = float(np.real(count))
    nearest = round(value)
    if abs(value - nearest) > integer_tol or abs(float(np.imag(count))) > integer_tol:
        raise AccuracyError(
            f"root-counting integral {count:.4f} is not close to an integer",
            best_estimate=value)
    if nearest < 0:
        raise AccuracyError(
            f"negative zero count {nearest}; contour orientation broken",
            best_estimate=value)
    return int(nearest)


def monotonicity_report(ifo: IfoParams, med: MediumParams,
                        srm_power_reflectivities=(0.5, 0.7, 0.8, 0.9)) -> list[tuple[float, float]]:
    """Pairs (low, high) of SRM power reflectivities that violate
    instability monotonicity: unstable at the lower value but stable at
    the higher one. Expected empty in practice; reported, not asserted,
    because the trend is only a qualitative one.
    """
    values = sorted(srm_power_reflectivities)
    verdicts = []
    for rs2 in values:
        report = classify_system(ifo.with_power_reflectivity(rs2), med)
        verdicts.append(report.stable)
    violations = []
    for i in range(len(values)):
        for j in range(i + 1, len(values)):
            if not verdicts[i] and verdicts[j]:
                violations.append((values[i], values[j]))
    return violations
