"""Cosine-series detection probability models and their analysis.

A measurement class is described by a coefficient matrix C and a harmonic
stride s: the probability of outcome row x at phase difference delta is

    P(x | delta) = sum_y C[x, y] * cos(s * y * delta).

This covers the ideal single-photon, biphoton and four-photon classes, their
calibrated experimental counterparts, and visibility-scaled NOON-state
models.  The module also provides fringe fitting, the retention (controlled
state-dependent loss) calibration that makes total detection probability
phase independent, and classical Fisher information tools.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ._golden import golden_max

IDEAL_COLSUM_TOL = 1e-12
# Residual column sums of the calibrated fixtures after sign correction.
EXPERIMENTAL_COLSUM_TOL = 2e-3


class FisherDivergence(RuntimeError):
    """Fisher information diverges: an outcome probability vanishes with slope."""


@dataclass(frozen=True)
class HarmonicLikelihood:
    """Detection model P(x | delta) = sum_y coeffs[x, y] cos(stride * y * delta).

    Rows are outcome classes; ``photon_cost`` is the number of photons
    consumed per use, which sequence planning charges against the resource
    budget N.
    """

    stride: int
    coeffs: np.ndarray
    labels: tuple
    photon_cost: int
    tol_colsum: float = IDEAL_COLSUM_TOL
    name: str = ""

    def __post_init__(self):
        coeffs = np.atleast_2d(np.asarray(self.coeffs, dtype=float))
        object.__setattr__(self, "coeffs", coeffs)
        if self.stride < 1:
            raise ValueError("stride must be a positive integer")
        if self.photon_cost < 1:
            raise ValueError("photon_cost must be a positive integer")
        if len(self.labels) != coeffs.shape[0]:
            raise ValueError("one label per outcome row required")
        colsums = coeffs.sum(axis=0)
        if abs(colsums[0] - 1.0) > 1e-9:
            raise ValueError(f"constant terms must sum to 1, got {colsums[0]!r}")
        if coeffs.shape[1] > 1 and np.max(np.abs(colsums[1:])) > self.tol_colsum:
            raise ValueError(
                "cosine column sums exceed tolerance: total probability would "
                f"depend on the phase (max |sum| = {np.max(np.abs(colsums[1:])):.3e})"
            )
        self._check_nonnegative()

    def _check_nonnegative(self):
        # dense scan plus golden refinement around the worst grid point
        grid = np.linspace(0.0, 2.0 * math.pi, 16384, endpoint=False)
        values = self.prob_matrix(grid)
        worst_row = int(np.argmin(values.min(axis=1)))
        worst_col = int(np.argmin(values[worst_row]))
        h = grid[1] - grid[0]
        row = self.coeffs[worst_row]

        def row_value(delta):
            return float(
                sum(c * math.cos(self.stride * y * delta) for y, c in enumerate(row))
            )

        _, neg_min = golden_max(
            lambda d: -row_value(d), grid[worst_col] - h, grid[worst_col] + h, 40
        )
        minimum = min(float(values.min()), -neg_min)
        if minimum < -1e-9:
            raise ValueError(
                f"outcome row {worst_row} goes negative ({minimum:.3e}); "
                "not a valid probability model"
            )

    @property
    def n_outcomes(self) -> int:
        return self.coeffs.shape[0]

    @property
    def n_harmonics(self) -> int:
        """Highest harmonic index Y (columns run y = 0..Y)."""
        return self.coeffs.shape[1] - 1

    def probability(self, x: int, delta: float) -> float:
        """P(outcome row x | phase difference delta)."""
        row = self.coeffs[x]
        return float(
            sum(c * math.cos(self.stride * y * delta) for y, c in enumerate(row))
        )

    def prob_vector(self, delta: float) -> np.ndarray:
        """Probabilities of all outcome rows at one phase difference."""
        y = np.arange(self.coeffs.shape[1])
        return self.coeffs @ np.cos(self.stride * y * delta)

    def prob_matrix(self, deltas: np.ndarray) -> np.ndarray:
        """Rows x grid matrix of probabilities at many phase differences."""
        y = np.arange(self.coeffs.shape[1])
        return self.coeffs @ np.cos(self.stride * np.outer(y, deltas))

    def to_dict(self) -> dict:
        return {
            "stride": self.stride,
            "coeffs": [list(row) for row in self.coeffs],
            "labels": list(self.labels),
            "photon_cost": self.photon_cost,
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, data: dict, tol_colsum: float = EXPERIMENTAL_COLSUM_TOL):
        return cls(
            stride=int(data["stride"]),
            coeffs=np.asarray(data["coeffs"], dtype=float),
            labels=tuple(data["labels"]),
            photon_cost=int(data["photon_cost"]),
            tol_colsum=tol_colsum,
        )


def probability(likelihood: HarmonicLikelihood, x: int, delta: float) -> float:
    return likelihood.probability(x, delta)


# ---------------------------------------------------------------------------
# Fixtures

_A_IDEAL = np.array([[1.0, 1.0], [1.0, -1.0]]) / 2.0
_GAMMA_IDEAL = np.array([[11.0, 12.0, 9.0], [12.0, 0.0, -12.0], [9.0, -12.0, 3.0]]) / 32.0

_A_EXP = np.array([[0.999, 0.976], [1.001, -0.976]]) / 2.0
_B_EXP = np.array([[0.989, 0.940], [1.011, -0.940]]) / 2.0

# As recorded, the four-photon calibration has +10.423 in the (x=2, y=1)
# slot.  That makes the outcome probabilities sum to 1 + 0.65 cos(2 delta),
# which is not a distribution, so the shipped fixture flips that sign; the
# corrected matrix has near-zero cosine column sums and the same sign
# pattern as the ideal four-photon matrix.  The raw row is kept here for
# reference only.
GAMMA_EXP_AS_RECORDED = np.array(
    [[11.206, 9.829, 7.596], [12.901, 0.595, -10.192], [7.893, 10.423, 2.596]]
) / 32.0
_GAMMA_EXP = np.array(
    [[11.206, 9.829, 7.596], [12.901, 0.595, -10.192], [7.893, -10.423, 2.596]]
) / 32.0

_CLASS_ALIASES = {
    "a": "a", "n1": "a", "single": "a",
    "b": "b", "n2": "b", "biphoton": "b",
    "gamma": "gamma", "n4": "gamma", "quadphoton": "gamma",
}


def _canonical_class(name: str) -> str:
    key = name.lower().replace("'", "").replace("_prime", "").strip()
    if key not in _CLASS_ALIASES:
        raise ValueError(f"unknown measurement class {name!r}")
    return _CLASS_ALIASES[key]


def ideal_fixture(name: str) -> HarmonicLikelihood:
    """Ideal detection matrices for the single-, two- and four-photon classes."""
    key = _canonical_class(name)
    if key == "a":
        return HarmonicLikelihood(1, _A_IDEAL, (-1, 1), 1, name="A")
    if key == "b":
        return HarmonicLikelihood(2, _A_IDEAL, (0, 2), 2, name="B")
    return HarmonicLikelihood(2, _GAMMA_IDEAL, (0, 2, 4), 4, name="Gamma")


def experimental_fixture(name: str) -> HarmonicLikelihood:
    """Calibrated detection matrices; the four-photon one is sign-corrected."""
    key = _canonical_class(name)
    if key == "a":
        return HarmonicLikelihood(
            1, _A_EXP, (-1, 1), 1, tol_colsum=EXPERIMENTAL_COLSUM_TOL, name="A'"
        )
    if key == "b":
        return HarmonicLikelihood(
            2, _B_EXP, (0, 2), 2, tol_colsum=EXPERIMENTAL_COLSUM_TOL, name="B'"
        )
    return HarmonicLikelihood(
        2, _GAMMA_EXP, (0, 2, 4), 4, tol_colsum=EXPERIMENTAL_COLSUM_TOL, name="Gamma'"
    )


def noon_likelihood(n: int, visibility: float = 1.0) -> HarmonicLikelihood:
    """Two-outcome model of an n-photon NOON state with fringe contrast v."""
    if not 0.0 <= visibility <= 1.0:
        raise ValueError("visibility must lie in [0, 1]")
    if n < 1:
        raise ValueError("n must be a positive integer")
    coeffs = np.array([[1.0, visibility], [1.0, -visibility]]) / 2.0
    return HarmonicLikelihood(n, coeffs, (0, 1), n, name=f"noon-{n}")


def product_likelihood(a: HarmonicLikelihood, b: HarmonicLikelihood) -> HarmonicLikelihood:
    """Joint model of two independent measurements at the same phase.

    Outcome rows are pairs; cosine products are expanded into sum and
    difference harmonics on the common stride.
    """
    stride = math.gcd(a.stride, b.stride)
    max_k = (a.stride * a.n_harmonics + b.stride * b.n_harmonics) // stride
    rows = a.n_outcomes * b.n_outcomes
    coeffs = np.zeros((rows, max_k + 1))
    labels = []
    r = 0
    for xa, la in enumerate(a.labels):
        for xb, lb in enumerate(b.labels):
            labels.append((la, lb))
            for ya in range(a.n_harmonics + 1):
                for yb in range(b.n_harmonics + 1):
                    # cos(u)cos(w) = [cos(u + w) + cos(u - w)] / 2
                    c = a.coeffs[xa, ya] * b.coeffs[xb, yb]
                    ka = a.stride * ya // stride
                    kb = b.stride * yb // stride
                    coeffs[r, ka + kb] += 0.5 * c
                    coeffs[r, abs(ka - kb)] += 0.5 * c
            r += 1
    tol = a.tol_colsum + b.tol_colsum + 1e-12
    return HarmonicLikelihood(
        stride, coeffs, tuple(labels), a.photon_cost + b.photon_cost, tol_colsum=tol
    )


# ---------------------------------------------------------------------------
# Fringe fitting and retention calibration

@dataclass(frozen=True)
class CalibrationMatrix:
    """Raw least-squares fringe fit, before loss compensation."""

    stride: int
    coeffs: np.ndarray
    photon_cost: int
    labels: tuple = ()

    def __post_init__(self):
        coeffs = np.atleast_2d(np.asarray(self.coeffs, dtype=float))
        object.__setattr__(self, "coeffs", coeffs)
        if not self.labels:
            object.__setattr__(self, "labels", tuple(range(coeffs.shape[0])))
        if np.min(coeffs[:, 0]) <= 0:
            raise ValueError("constant-term column of a calibration fit must be positive")


@dataclass(frozen=True)
class RetentionVector:
    """Per-outcome keep probabilities; ``loss`` is the discard complement."""

    retention: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.retention, dtype=float)
        object.__setattr__(self, "retention", r)
        if np.min(r) <= 0.0:
            raise ValueError("retention entries must be positive")
        if abs(np.max(r) - 1.0) > 1e-12:
            raise ValueError("largest retention entry must be 1")

    @property
    def loss(self) -> np.ndarray:
        return 1.0 - self.retention

    def __len__(self):
        return len(self.retention)

    def __getitem__(self, i):
        return float(self.retention[i])


def fit_coefficients(
    samples: Sequence, stride: int, n_harmonics: int
) -> CalibrationMatrix:
    """Least-squares cosine-series fit of fringe samples.

    ``samples`` is a sequence of (theta, outcome-frequency vector) pairs taken
    with the unknown phase absent.  Recovery is exact for noiseless
    band-limited input.
    """
    thetas = np.array([t for t, _ in samples], dtype=float)
    freqs = np.array([np.asarray(f, dtype=float) for _, f in samples])
    if len(set(np.round(thetas, 12))) < 2 * n_harmonics + 1:
        raise ValueError(
            f"need at least {2 * n_harmonics + 1} distinct theta samples "
            f"to fit {n_harmonics} harmonics"
        )
    design = np.cos(stride * np.outer(thetas, np.arange(n_harmonics + 1)))
    solution, _, rank, _ = np.linalg.lstsq(design, freqs, rcond=None)
    if rank < n_harmonics + 1:
        raise ValueError("degenerate theta samples: fit design matrix is rank deficient")
    return CalibrationMatrix(
        stride=stride, coeffs=solution.T, photon_cost=max(1, stride * n_harmonics)
    )


def compute_retention(j: CalibrationMatrix) -> RetentionVector:
    """Keep probabilities that make total detection probability phase flat.

    Solves sum_x r_x J[x, y] = c * delta_{y,0} and rescales so the largest
    retention is 1.  The resulting per-outcome discards remove the cosine
    content of the *summed* detection rate, which Bayesian updating needs.
    """
    m = j.coeffs.T  # (harmonics) x (outcomes)
    target = np.zeros(m.shape[0])
    target[0] = 1.0
    try:
        if m.shape[0] == m.shape[1]:
            r = np.linalg.solve(m, target)
        else:
            r, *_ = np.linalg.lstsq(m, target, rcond=None)
    except np.linalg.LinAlgError as exc:
        raise ValueError(f"singular calibration system: {exc}") from exc
    residual = float(np.max(np.abs(m @ r - target)))
    if residual > 1e-9 * max(1.0, float(np.max(np.abs(m)))):
        raise ValueError(f"calibration system inconsistent (residual {residual:.3e})")
    if np.max(r) < 0:
        r = -r
    if np.min(r) <= 0:
        raise ValueError(
            "invalid calibration: phase-flattening weights are not all positive"
        )
    return RetentionVector(r / np.max(r))


def apply_retention(j: CalibrationMatrix, r: RetentionVector) -> HarmonicLikelihood:
    """Rescale fit rows by their retention and renormalize to a likelihood."""
    if len(r) != j.coeffs.shape[0]:
        raise ValueError("retention length must match the number of outcome rows")
    scaled = j.coeffs * r.retention[:, None]
    total = float(scaled[:, 0].sum())
    if total <= 0:
        raise ValueError("retention removed all probability")
    return HarmonicLikelihood(
        stride=j.stride,
        coeffs=scaled / total,
        labels=j.labels,
        photon_cost=j.photon_cost,
        tol_colsum=IDEAL_COLSUM_TOL,
    )


def reference_loss_table() -> dict:
    """Reference state-dependent retention for the five-detector-per-arm layout.

    Keyed by measurement class; entries follow the outcome-row order of the
    corresponding fixtures.  Kept as a fixture: the raw fit matrices behind
    these numbers are not available, so they cannot be rederived here.
    """
    return {
        "n1": RetentionVector(np.array([1.0 - 0.1276, 1.0])),
        "n2": RetentionVector(np.array([1.0 - 0.1975, 1.0])),
        "n4": RetentionVector(np.array([1.0 - 0.2304, 1.0 - 0.3395, 1.0])),
    }


# ---------------------------------------------------------------------------
# Fisher information

_P_TINY = 1e-9


def _fisher_term(p: float, dp: float, d2p: float) -> float:
    """One outcome's contribution dP^2/P, with care at probability zeros.

    Where P nearly vanishes the direct quotient is dominated by rounding, so
    the term is rebuilt from the locally exact Taylor data: a genuine double
    zero contributes its removable limit 2 P'', a shallow minimum of depth
    eps contributes dP^2 / (eps + dP^2 / 2P''), and a simple zero (nonzero
    slope) is a true divergence.
    """
    if p > _P_TINY:
        return dp * dp / p
    if d2p > _P_TINY:
        curv = dp * dp / (2.0 * d2p)
        eps = p - curv
        if eps <= 1e-12:
            return 2.0 * d2p
        return dp * dp / (eps + curv)
    if dp * dp <= 1e-18:
        return 0.0
    return math.inf


def fisher_information(likelihood: HarmonicLikelihood, delta: float) -> float:
    """Classical Fisher information F(delta) = sum_x P'(x)^2 / P(x).

    Returns ``math.inf`` at a genuine divergence (an outcome probability
    crossing zero with nonzero slope); removable 0/0 points evaluate to
    their continuous limit.
    """
    s = likelihood.stride
    total = 0.0
    for row in likelihood.coeffs:
        p = dp = d2p = 0.0
        for y, c in enumerate(row):
            sy = s * y
            p += c * math.cos(sy * delta)
            dp += -c * sy * math.sin(sy * delta)
            d2p += -c * sy * sy * math.cos(sy * delta)
        total += _fisher_term(p, dp, d2p)
        if math.isinf(total):
            return math.inf
    return total


@dataclass(frozen=True)
class FisherSummary:
    max_fisher: float
    argmax_delta: float
    fisher_length: float
    curve: tuple  # of (delta, fisher) pairs
    divergent_deltas: tuple = ()


def fisher_summary(likelihood: HarmonicLikelihood, grid: int = 1024) -> FisherSummary:
    """Grid scan of F(delta) over one full turn, with a refined maximum."""
    if grid < 256:
        raise ValueError("fisher grid must have at least 256 points")
    deltas = 2.0 * math.pi * np.arange(grid) / grid
    values = np.array([fisher_information(likelihood, d) for d in deltas])
    finite = np.isfinite(values)
    if not finite.any():
        raise ValueError("Fisher information diverges on the whole grid")
    best = int(np.argmax(np.where(finite, values, -np.inf)))
    h = 2.0 * math.pi / grid
    arg, peak = golden_max(
        lambda d: fisher_information(likelihood, d),
        deltas[best] - h,
        deltas[best] + h,
        iterations=60,
    )
    if peak < values[best]:
        arg, peak = float(deltas[best]), float(values[best])
    return FisherSummary(
        max_fisher=float(peak),
        argmax_delta=float(arg % (2.0 * math.pi)),
        fisher_length=1.0 / math.sqrt(peak),
        curve=tuple(zip(deltas.tolist(), values.tolist())),
        divergent_deltas=tuple(deltas[~finite].tolist()),
    )


def cramer_rao_bound(fisher: float, repetitions: int) -> float:
    """Smallest resolvable phase shift from ``repetitions`` measurements."""
    if fisher <= 0:
        raise ValueError("Fisher information must be positive")
    if repetitions < 1:
        raise ValueError("repetitions must be a positive integer")
    return 1.0 / math.sqrt(repetitions * fisher)


def fisher_curve_csv(curve) -> str:
    """Render (delta, fisher) pairs as CSV with a ``delta,fisher`` header."""
    lines = ["delta,fisher"]
    for delta, fisher in curve:
        lines.append(f"{delta!r},{fisher!r}")
    return "\n".join(lines) + "\n"
