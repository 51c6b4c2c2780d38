"""Phase distributions as truncated sequences of circular moments.

Because every likelihood in this package is a finite cosine series, Bayes'
rule maps the moment vector a_j = <e^{i j phi}> to a shifted linear
combination of itself: the posterior after any finite measurement plan is
represented *exactly* by finitely many moments.  A grid discretization is
never needed outside of test oracles.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .likelihood import HarmonicLikelihood

MOMENT_TOL = 1e-9


class ImpossibleOutcome(ValueError):
    """The observed outcome has zero probability under the current posterior."""


class UndefinedEstimate(ValueError):
    """The first circular moment vanishes; no phase estimate exists."""


@dataclass(frozen=True)
class PhasePosterior:
    """Circular-moment representation of a phase distribution on [0, 2pi).

    ``moments[j]`` holds a_j for j = 0..j_max; negative indices are implied
    by conjugation.  ``max_harmonic`` tracks the highest index that can be
    nonzero, so updates can verify they stay inside the truncation.
    """

    moments: np.ndarray
    max_harmonic: int = 0

    def __post_init__(self):
        m = np.asarray(self.moments, dtype=complex)
        object.__setattr__(self, "moments", m)
        if m.ndim != 1 or m.size < 2:
            raise ValueError("need moments a_0..a_J with J >= 1")
        if m[0] != 1.0 + 0.0j:
            raise ValueError("a_0 must be exactly 1 (normalization)")
        if not 0 <= self.max_harmonic <= self.j_max:
            raise ValueError("max_harmonic out of range")
        if np.max(np.abs(m)) > 1.0 + MOMENT_TOL:
            raise ValueError("circular moments cannot exceed modulus 1")

    @property
    def j_max(self) -> int:
        return self.moments.size - 1

    def moment(self, j: int) -> complex:
        """a_j for any integer j, using conjugate symmetry and truncation."""
        k = abs(j)
        if k > self.j_max:
            return 0.0 + 0.0j
        value = self.moments[k]
        return complex(value) if j >= 0 else complex(value.conjugate())

    def density_grid(self, points: int) -> np.ndarray:
        """P(phi) on a uniform grid of [0, 2pi), via the inverse Fourier sum."""
        phis = 2.0 * math.pi * np.arange(points) / points
        j = np.arange(1, self.max_harmonic + 1)
        if j.size == 0:
            return np.full(points, 1.0 / (2.0 * math.pi))
        table = np.exp(-1j * np.outer(j, phis))
        recon = 1.0 + 2.0 * np.real(self.moments[1 : self.max_harmonic + 1] @ table)
        return recon / (2.0 * math.pi)

    def to_dict(self) -> dict:
        return {
            "max_harmonic": self.max_harmonic,
            "moments": [[z.real, z.imag] for z in self.moments],
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, data: dict) -> "PhasePosterior":
        moments = np.array([complex(re, im) for re, im in data["moments"]])
        return cls(moments, int(data["max_harmonic"]))


def uniform_prior(j_max: int) -> PhasePosterior:
    """Flat distribution: a_0 = 1, all other moments zero."""
    if j_max < 1:
        raise ValueError("j_max must be at least 1")
    moments = np.zeros(j_max + 1, dtype=complex)
    moments[0] = 1.0
    return PhasePosterior(moments, 0)


def bayes_update(
    posterior: PhasePosterior,
    likelihood: HarmonicLikelihood,
    x: int,
    theta: float,
) -> PhasePosterior:
    """Condition the posterior on outcome ``x`` measured at feedback ``theta``.

    The cosine series shifts each moment by multiples of the stride:

        a~_j = sum_y C[x,y]/2 * (e^{-i s y theta} a_{j+sy} + e^{+i s y theta} a_{j-sy})

    with a_{-k} = conj(a_k).  The update normalizes by a~_0, the outcome's
    marginal probability.
    """
    s = likelihood.stride
    reach = s * likelihood.n_harmonics
    if posterior.max_harmonic + reach > posterior.j_max:
        raise ValueError(
            f"moment truncation too short: need harmonic "
            f"{posterior.max_harmonic + reach}, have {posterior.j_max}"
        )
    j_max = posterior.j_max
    a = posterior.moments
    # extended index line a_{-j_max} .. a_{j_max + reach}, offset by j_max
    ext = np.concatenate([np.conj(a[:0:-1]), a, np.zeros(reach, dtype=complex)])
    new = np.zeros(j_max + 1, dtype=complex)
    base = j_max  # position of a_0 in ext
    row = likelihood.coeffs[x]
    for y, c in enumerate(row):
        if c == 0.0:
            continue
        sy = s * y
        if sy == 0:
            new += c * a
            continue
        up = ext[base + sy : base + sy + j_max + 1]
        down = ext[base - sy : base - sy + j_max + 1]
        phase = np.exp(-1j * sy * theta)
        new += (c / 2.0) * (phase * up + np.conj(phase) * down)
    norm = new[0].real
    if norm <= 1e-15:
        raise ImpossibleOutcome(
            f"outcome {x} has probability {norm!r} under the current posterior"
        )
    new /= norm
    new[0] = 1.0
    return PhasePosterior(new, min(j_max, posterior.max_harmonic + reach))


def sharpness(posterior: PhasePosterior) -> float:
    """|<e^{i phi}>|: 0 for a flat distribution, 1 for a point mass."""
    return float(abs(posterior.moments[1]))


def estimate(posterior: PhasePosterior) -> float:
    """Phase estimate arg(a_1), mapped to [0, 2pi)."""
    a1 = posterior.moments[1]
    if abs(a1) == 0.0:
        raise UndefinedEstimate("first circular moment is zero")
    return float(np.angle(a1) % (2.0 * math.pi))


def holevo_variance(posterior: PhasePosterior) -> float:
    """Sharpness^-2 - 1; infinite for a distribution with no first moment."""
    s = sharpness(posterior)
    if s == 0.0:
        return math.inf
    return 1.0 / (s * s) - 1.0


def density(posterior: PhasePosterior, phi: float) -> float:
    """Reconstructed probability density at one phase."""
    j = np.arange(1, posterior.max_harmonic + 1)
    if j.size == 0:
        return 1.0 / (2.0 * math.pi)
    tail = posterior.moments[1 : posterior.max_harmonic + 1]
    value = 1.0 + 2.0 * float(np.real(tail @ np.exp(-1j * j * phi)))
    return value / (2.0 * math.pi)
