"""First-principles simulation of two-mode few-photon interferometry.

Everything downstream of this module (cosine-series likelihoods, Bayesian
updates, trial simulation) consumes detection probabilities that are derived
here from the photon-number-basis unitaries of a Mach-Zehnder interferometer:
a 50/50 beamsplitter, independent phase shifts in the two arms, a second
50/50 beamsplitter, and photon counting at the two outputs.  The module also
computes the combinatorics of resolving n-photon outputs on arrays of
non-number-resolving single-photon detectors.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

# Highest total photon number accepted by default.  Dense amplitude vectors
# and double-precision tolerances are comfortable well past this, but the
# dual-Fock inputs of interest stop at four photons.
PHOTON_CAP = 8

NORM_TOL = 1e-12

# 50/50 beamsplitter mode transformation, written for creation operators:
#   a -> (BS_T * c + BS_R * d),   b -> (BS_R * c + BS_T * d).
# The +-pi/4 transmission/reflection phases make the two-photon input |1,1>
# interfere to (|2,0> + |0,2>)/sqrt(2) with real positive amplitudes, which
# fixes the sign conventions of every derived detection matrix.
BS_T = cmath.exp(-1j * math.pi / 4) / math.sqrt(2)
BS_R = cmath.exp(+1j * math.pi / 4) / math.sqrt(2)


class PhotonCapError(ValueError):
    """Raised when a state would exceed the configured photon cap."""


@dataclass(frozen=True)
class TwoModeFockState:
    """Pure two-mode state with a fixed total photon number.

    ``amplitudes[m]`` is the coefficient of the basis state with ``m`` photons
    in mode one and ``total_photons - m`` photons in mode two.  The vector is
    validated to be normalized within ``NORM_TOL``.
    """

    total_photons: int
    amplitudes: np.ndarray
    cap: int = PHOTON_CAP

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        object.__setattr__(self, "amplitudes", amps)
        if self.total_photons < 0:
            raise ValueError("total_photons must be nonnegative")
        if self.total_photons > self.cap:
            raise PhotonCapError(
                f"total_photons={self.total_photons} exceeds cap {self.cap}"
            )
        if amps.ndim != 1 or amps.size != self.total_photons + 1:
            raise ValueError("amplitude vector must have total_photons + 1 entries")
        norm = float(np.sum(np.abs(amps) ** 2))
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state not normalized: |psi|^2 = {norm!r}")

    @classmethod
    def number_state(cls, m: int, n_other: int, cap: int = PHOTON_CAP) -> "TwoModeFockState":
        """The basis state with ``m`` photons in mode one, ``n_other`` in mode two."""
        n = m + n_other
        amps = np.zeros(n + 1, dtype=complex)
        amps[m] = 1.0
        return cls(n, amps, cap)

    @classmethod
    def dual_fock(cls, half: int, cap: int = PHOTON_CAP) -> "TwoModeFockState":
        """The input |half, half> used for the entangled measurement classes."""
        return cls.number_state(half, half, cap)


@dataclass(frozen=True)
class OutcomeDistribution:
    """Probabilities of photon-number outcomes (n_one, n_two) at the outputs."""

    total_photons: int
    entries: tuple  # of (n_one, n_two, probability)

    def __post_init__(self):
        total = 0.0
        for n1, n2, p in self.entries:
            if n1 + n2 != self.total_photons:
                raise ValueError("outcome photon numbers must sum to total_photons")
            if p < -NORM_TOL:
                raise ValueError(f"negative probability {p!r} for outcome ({n1},{n2})")
            total += p
        if abs(total - 1.0) > NORM_TOL:
            raise ValueError(f"outcome probabilities sum to {total!r}, not 1")

    def probability(self, n_one: int, n_two: int) -> float:
        for m1, m2, p in self.entries:
            if (m1, m2) == (n_one, n_two):
                return p
        return 0.0


@dataclass(frozen=True)
class DetectorArrayConfig:
    """Detector counts and per-detector splitting ratios for the two arms."""

    detectors_per_arm: tuple
    splitting_ratios: tuple = ()

    def __post_init__(self):
        m_e, m_f = self.detectors_per_arm
        if m_e < 1 or m_f < 1:
            raise ValueError("each arm needs at least one detector")
        ratios = self.splitting_ratios
        if not ratios:
            ratios = (
                tuple(1.0 / m_e for _ in range(m_e)),
                tuple(1.0 / m_f for _ in range(m_f)),
            )
            object.__setattr__(self, "splitting_ratios", ratios)
        for m, arm in zip((m_e, m_f), ratios):
            if len(arm) != m:
                raise ValueError("splitting ratio length must match detector count")
            if min(arm) < 0:
                raise ValueError("splitting ratios must be nonnegative")
            if abs(sum(arm) - 1.0) > NORM_TOL:
                raise ValueError("splitting ratios must sum to 1")

    @classmethod
    def equal(cls, m_e: int, m_f: int) -> "DetectorArrayConfig":
        return cls((m_e, m_f))


# Five single-photon counters per arm, evenly split.
FIVE_PER_ARM = DetectorArrayConfig.equal(5, 5)


@lru_cache(maxsize=None)
def _beamsplitter_matrix(n: int) -> np.ndarray:
    """Photon-number-basis unitary of the 50/50 beamsplitter at total number n.

    Matrix element [k, m] is the amplitude for |m, n-m> to scatter into
    |k, n-k>, obtained by expanding the transformed creation operators.
    """
    u = np.zeros((n + 1, n + 1), dtype=complex)
    for m in range(n + 1):
        norm_in = math.sqrt(math.factorial(m) * math.factorial(n - m))
        for k in range(n + 1):
            acc = 0.0 + 0.0j
            for j in range(max(0, k - (n - m)), min(m, k) + 1):
                acc += (
                    math.comb(m, j)
                    * math.comb(n - m, k - j)
                    * BS_T**j
                    * BS_R ** (m - j)
                    * BS_R ** (k - j)
                    * BS_T ** ((n - m) - (k - j))
                )
            norm_out = math.sqrt(math.factorial(k) * math.factorial(n - k))
            u[k, m] = acc * norm_out / norm_in
    return u


def beamsplitter(state: TwoModeFockState) -> TwoModeFockState:
    """Scatter a state through the 50/50 beamsplitter (norm preserving)."""
    u = _beamsplitter_matrix(state.total_photons)
    out = u @ state.amplitudes
    # renormalize away double-precision rounding so chained calls stay valid
    out = out / math.sqrt(float(np.sum(np.abs(out) ** 2)))
    return TwoModeFockState(state.total_photons, out, state.cap)


def apply_phases(state: TwoModeFockState, phi: float, theta: float) -> TwoModeFockState:
    """Advance mode one by phase ``phi`` and mode two by ``theta``."""
    n = state.total_photons
    m = np.arange(n + 1)
    factors = np.exp(1j * (m * phi + (n - m) * theta))
    return TwoModeFockState(n, state.amplitudes * factors, state.cap)


def output_distribution(
    state: TwoModeFockState, phi: float, theta: float
) -> OutcomeDistribution:
    """Detection statistics after beamsplitter -> phases -> beamsplitter."""
    final = beamsplitter(apply_phases(beamsplitter(state), phi, theta))
    probs = np.abs(final.amplitudes) ** 2
    probs = probs / probs.sum()
    n = state.total_photons
    entries = tuple((m, n - m, float(probs[m])) for m in range(n + 1))
    return OutcomeDistribution(n, entries)


def delta_grouping(n_one: int, n_two: int):
    """Default outcome grouping: photon-number difference classes.

    The difference D = n_one - n_two labels outcomes with its sign kept when
    the total photon number is odd and dropped (|D|) when it is even, where
    the two signs are reached by symmetric states and carry no information.
    """
    total = n_one + n_two
    d = n_one - n_two
    return d if total % 2 else abs(d)


def raw_grouping(n_one: int, n_two: int) -> str:
    """Identity grouping: every photon-number outcome is its own label."""
    return f"{n_one},{n_two}"


def derive_harmonic_matrix(
    state: TwoModeFockState,
    grouping: Callable = delta_grouping,
    grid: int = 256,
    residual_tol: float = 1e-10,
):
    """Fit the grouped detection probabilities to an exact cosine series.

    Evaluates the output distribution on a uniform grid of the phase
    difference, groups outcomes, and projects each group's fringe onto
    cosine harmonics by discrete orthogonality.  The projection is exact for
    these band-limited fringes; a residual above ``residual_tol`` means the
    grouping does not produce pure cosine fringes and is rejected.

    Returns a :class:`fockphase.likelihood.HarmonicLikelihood`.
    """
    from .likelihood import HarmonicLikelihood

    n = state.total_photons
    if n < 1:
        raise ValueError("need at least one photon to derive a detection matrix")
    if grid < 4 * (n + 1):
        raise ValueError("grid too coarse for the photon number")

    labels = sorted({grouping(m, n - m) for m in range(n + 1)})
    if any(grouping(m, n - m) is None for m in range(n + 1)):
        raise ValueError("grouping must assign a label to every outcome")
    row_of = {lab: i for i, lab in enumerate(labels)}

    deltas = 2.0 * math.pi * np.arange(grid) / grid
    fringes = np.zeros((len(labels), grid))
    for t, delta in enumerate(deltas):
        dist = output_distribution(state, delta, 0.0)
        for n1, n2, p in dist.entries:
            fringes[row_of[grouping(n1, n2)], t] += p

    # discrete cosine projection; harmonics above n are absent by construction
    spectrum = np.fft.rfft(fringes, axis=1)
    cos_full = np.zeros((len(labels), n + 1))
    cos_full[:, 0] = spectrum[:, 0].real / grid
    cos_full[:, 1:] = 2.0 * spectrum[:, 1 : n + 1].real / grid

    present = [k for k in range(1, n + 1) if np.max(np.abs(cos_full[:, k])) > 1e-11]
    stride = math.gcd(*present) if present else 1
    n_harm = (max(present) // stride) if present else 0
    coeffs = cos_full[:, :: stride][:, : n_harm + 1] if stride > 1 else cos_full[:, : n_harm + 1]

    recon = coeffs @ np.cos(np.outer(stride * np.arange(n_harm + 1), deltas))
    residual = float(np.max(np.abs(recon - fringes)))
    if residual > residual_tol:
        raise ValueError(
            f"grouped fringes are not a cosine series (residual {residual:.3e}); "
            "sine components indicate an asymmetric grouping"
        )

    return HarmonicLikelihood(
        stride=stride,
        coeffs=coeffs,
        labels=tuple(labels),
        photon_cost=n,
        tol_colsum=1e-12,
    )


def _distinct_click_probability(n: int, ratios: Sequence[float]) -> float:
    """Probability that n photons multinomially split over detectors all land
    on distinct ones: n! times the elementary symmetric polynomial e_n of the
    splitting ratios."""
    m = len(ratios)
    if n == 0:
        return 1.0
    if n > m:
        return 0.0
    # coefficients of prod_i (1 + p_i x); e_n is the x^n coefficient
    poly = np.zeros(n + 1)
    poly[0] = 1.0
    for p in ratios:
        poly[1:] += p * poly[:-1]
    return float(math.factorial(n) * poly[n])


def projection_probability(
    n_e: int, n_f: int, config: DetectorArrayConfig = FIVE_PER_ARM
) -> float:
    """Probability that the output |n_e, n_f> is resolved by the detector arrays.

    Each arm splits its photons over the arm's detectors with the configured
    ratios; the state is resolved when every photon lands on its own detector
    in both arms.  With m equally-fed detectors per arm this reduces to
    m! / ((m - n)! * m^n) per arm.
    """
    if n_e < 0 or n_f < 0:
        raise ValueError("photon numbers must be nonnegative")
    p_e = _distinct_click_probability(n_e, config.splitting_ratios[0])
    p_f = _distinct_click_probability(n_f, config.splitting_ratios[1])
    return p_e * p_f
