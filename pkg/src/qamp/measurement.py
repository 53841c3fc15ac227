"""Measuring the amplified clone ensemble.

Analytic moments and signal-to-noise ratios of the cascade output, the
binomial clone-count model, Monte Carlo Stokes measurements, direction
estimation, and the final parity observation on the retained photons.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from qamp.cloning import (
    CloneMachineParams,
    MixedQubitState,
    _params,
    clone_count_exact,
    shrink_factor,
    shrink_factor_exact,
)
from qamp.errors import DegenerateDirection, InsufficientPhotons, ParityUndefined, ValidationError
from qamp.qubit_core import AuxiliaryInfo, Parity, Qubit, StokesVector, projective_angle

DIRECTION_TOL = 1e-12
# Above this trial count samples come from the normal limit (float64 holds
# integers exactly only up to 2**53).
_EXACT_BINOMIAL_MAX = 2 ** 53


class MeasurementMode(str, enum.Enum):
    IDEALIZED = "idealized"
    PARTITIONED = "partitioned"


@dataclass(frozen=True)
class EnsembleMoments:
    per_photon: StokesVector
    per_photon_dispersion: tuple[float, float, float]
    total: StokesVector
    clone_count: float
    snr: float
    axis_snr: tuple[float, float, float]


def snr_index_exact(m: CloneMachineParams) -> Fraction:
    m = _params(m)
    p, q = m.p, m.q
    return Fraction(p * (q + 2) ** 2, q * (p + 2) ** 2)


def snr_index(m: CloneMachineParams) -> float:
    """Per-level S/N growth factor squared, p(q+2)^2 / (q(p+2)^2)."""
    return float(snr_index_exact(m))


def snr_grows(m: CloneMachineParams) -> bool:
    """True when S/N increases with cascade depth: q > 4 at p = 1, or q > p >= 2."""
    m = _params(m)
    return (m.p == 1 and m.q > 4) or m.p >= 2


def quantum_snr(m: CloneMachineParams, levels: int, n0: int = 1) -> float:
    """Quantum-noise S/N of the whole ensemble, sqrt(n0) * index^(L/2)."""
    return math.sqrt(n0) * snr_index(m) ** (levels / 2)


def _ratio(signal: float, noise: float) -> float:
    if noise > 0:
        return signal / noise
    return math.copysign(math.inf, signal) if signal else 0.0


def ensemble_moments(q0: Qubit, m: CloneMachineParams, levels: int, n0: int = 1) -> EnsembleMoments:
    m = _params(m)
    shrink = shrink_factor(m) ** levels
    per_photon = q0.stokes.scaled(shrink)
    dispersion = tuple(1.0 - x * x for x in per_photon)
    count = float(clone_count_exact(m, levels, n0))
    total_factor = float(Fraction(m.q + 2, m.p + 2) ** levels) * n0
    axis_snr = tuple(_ratio(count * s, math.sqrt(count * v)) for s, v in zip(per_photon, dispersion))
    return EnsembleMoments(
        per_photon=per_photon,
        per_photon_dispersion=dispersion,
        total=q0.stokes.scaled(total_factor),
        clone_count=count,
        snr=quantum_snr(m, levels, n0),
        axis_snr=axis_snr,
    )


@dataclass(frozen=True)
class BinomialModel:
    """Number of orthogonal-state clones among ``n`` is Binomial(n, d_final)."""

    n: int
    f_final: float
    d_final: float
    # f - d cancels once both are near 1/2, so keep eta^L when it is known
    shrink: float | None = None

    def __post_init__(self):
        if self.n < 0:
            raise ValidationError(f"n must be non-negative, got {self.n}")
        if abs(self.f_final + self.d_final - 1.0) > 1e-12:
            raise ValidationError("f_final + d_final must equal 1")

    @property
    def polarization(self) -> float:
        return self.f_final - self.d_final if self.shrink is None else self.shrink

    @classmethod
    def from_cascade(cls, m: CloneMachineParams, levels: int, n0: int = 1) -> "BinomialModel":
        shrink = float(shrink_factor_exact(_params(m)) ** levels)
        n = math.floor(clone_count_exact(m, levels, n0))
        return cls(n, 0.5 * (1 + shrink), 0.5 * (1 - shrink), shrink)


def _binomial(rng: np.random.Generator, n: int, prob, size=None):
    prob = np.clip(prob, 0.0, 1.0)
    if n < _EXACT_BINOMIAL_MAX:
        return rng.binomial(n, prob, size=size)
    mean = n * prob
    sd = np.sqrt(n * prob * (1 - prob))
    return np.clip(np.rint(rng.normal(mean, sd, size=size)), 0, n)


def _signed_total(rng: np.random.Generator, n: int, p_plus, size=None):
    """(#plus - #minus) over ``n`` +-1 outcomes, as float.

    Sampled directly from its normal limit once ``n`` exceeds float64's exact
    integer range, where ``2 * plus - n`` would cancel to noise.
    """
    p_plus = float(np.clip(p_plus, 0.0, 1.0))
    if n < _EXACT_BINOMIAL_MAX:
        plus = rng.binomial(n, p_plus, size=size)
        return (2 * plus - n).astype(float) if size is not None else float(2 * int(plus) - n)
    mean = float(n) * (2 * p_plus - 1)
    sd = math.sqrt(4.0 * float(n) * p_plus * (1 - p_plus))
    return rng.normal(mean, sd, size=size)


def sample_ensemble(model: BinomialModel, rng: np.random.Generator, size=None):
    """Draw k, the number of clones found in the orthogonal state."""
    return _binomial(rng, model.n, model.d_final, size=size)


class StatisticalMoments(NamedTuple):
    mean: float
    variance: float
    snr: float


def _direction_cosine(q0: Qubit, axis: int) -> float:
    c = q0.stokes[axis]
    if abs(c) <= DIRECTION_TOL:
        raise DegenerateDirection(f"state has no component along S{axis + 1}")
    return c


def statistical_moments(model: BinomialModel, q0: Qubit, axis: int = 0) -> StatisticalMoments:
    """Mean, variance and S/N of the total Stokes component on ``axis``.

    Each clone contributes +c or -c (c the direction cosine) depending on
    whether it is in the original or orthogonal state. For an unshrunk
    ensemble the variance is 0 and the S/N is reported as ``inf``.
    """
    c = _direction_cosine(q0, axis)
    n = model.n
    mean = model.polarization * n * c
    variance = (1 - model.polarization ** 2) * n * c * c
    snr = abs(mean) / math.sqrt(variance) if variance > 0 else math.inf
    return StatisticalMoments(mean, variance, snr)


def empirical_snr(model: BinomialModel, q0: Qubit, trials: int, rng: np.random.Generator, axis: int = 0) -> float:
    """Mean over standard deviation of the sampled total Stokes component."""
    c = _direction_cosine(q0, axis)
    totals = _signed_total(rng, model.n, model.f_final, size=trials) * c
    sd = totals.std(ddof=1)
    return abs(totals.mean()) / sd if sd > 0 else math.inf


@dataclass(frozen=True)
class StokesEstimate:
    totals: tuple[float, float, float]
    direction: tuple[float, float, float]
    aux: AuxiliaryInfo
    angular_error: float | None = None
    photons_per_axis: tuple[int, int, int] | None = None


def estimate_direction(totals, truth=None) -> StokesEstimate:
    """Normalize measured totals into an axis estimate.

    ``truth`` may be a Qubit, an AuxiliaryInfo or a Stokes vector; when given,
    the projective angle to it is recorded as ``angular_error``.
    """
    t = np.asarray(totals, dtype=float)
    norm = float(np.linalg.norm(t))
    if norm <= DIRECTION_TOL:
        raise DegenerateDirection("measured Stokes totals vanish")
    direction = t / norm
    error = None
    if truth is not None:
        if isinstance(truth, Qubit):
            truth = truth.stokes
        elif isinstance(truth, AuxiliaryInfo):
            truth = truth.axis
        error = projective_angle(direction, truth)
    return StokesEstimate(
        totals=tuple(float(x) for x in t),
        direction=tuple(float(x) for x in direction),
        aux=AuxiliaryInfo.from_direction(direction),
        angular_error=error,
    )


def _axis_counts(n: int, mode: MeasurementMode) -> tuple[int, int, int]:
    if mode is MeasurementMode.IDEALIZED:
        return (n, n, n)
    if n < 3:
        raise InsufficientPhotons(f"partitioned measurement needs >= 3 photons, got {n}")
    base, extra = divmod(n, 3)
    return tuple(base + (i < extra) for i in range(3))


def simulate_stokes_measurement(
    final: MixedQubitState,
    n_clones: int,
    mode: MeasurementMode | str = MeasurementMode.IDEALIZED,
    rng: np.random.Generator | None = None,
) -> StokesEstimate:
    """Measure Stokes operators on ``n_clones`` copies of ``final``.

    Every photon gives +-1 on a measured axis with P(+1) = (1 + <S_i>)/2. In
    idealized mode each photon is counted on all three axes; in partitioned
    mode the photons are split into three groups, one axis per group, and the
    direction is estimated from the per-group means.
    """
    if rng is None:
        raise ValidationError("an explicit random generator is required")
    mode = MeasurementMode(mode)
    if n_clones < 1:
        raise InsufficientPhotons("no clones to measure")
    counts = _axis_counts(n_clones, mode)
    mean = final.stokes().as_array()
    totals = np.array([_signed_total(rng, n, (1 + s) / 2) for n, s in zip(counts, mean)])
    n_arr = np.array(counts, dtype=float)
    est = estimate_direction(totals / n_arr, truth=final.base)
    return StokesEstimate(
        totals=tuple(float(x) for x in totals),
        direction=est.direction,
        aux=est.aux,
        angular_error=est.angular_error,
        photons_per_axis=counts,
    )


def axis_vote(true_stokes, axis, n_photons: int, rng: np.random.Generator) -> int:
    """Project ``n_photons`` copies onto the basis along ``axis``; +1/-1 majority.

    A photon is found along ``axis`` with probability (1 + axis . s) / 2.
    Raises ParityUndefined on a tied vote.
    """
    if n_photons < 1:
        raise ValidationError("parity observation needs at least one photon")
    p_along = (1.0 + float(np.dot(axis, true_stokes))) / 2.0
    along = int(_binomial(rng, n_photons, p_along))
    against = n_photons - along
    if along == against:
        raise ParityUndefined(f"tied vote {along}:{against}")
    return 1 if along > against else -1


def observe_parity(true_state: Qubit, aux: AuxiliaryInfo, n_photons: int, rng: np.random.Generator) -> Parity:
    """Guess the parity of ``true_state`` by measuring along the estimated axis."""
    if aux.degenerate:
        raise ParityUndefined("estimated axis lies on the S2 = 0 circle")
    # the canonical axis has S2 > 0, so "along" means PLUS
    vote = axis_vote(true_state.stokes, aux.axis, n_photons, rng)
    return Parity(vote)
