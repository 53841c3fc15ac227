"""Y-00 (mesoscopic coherent-state) protocol model and the amplification attack on it.

The alphabet has M bases at angles theta_k = pi k / M in the S1-S2 plane.
Each basis carries a diametrical pair of coherent states, told apart by
their parity (the sign of the Stokes vector along the basis axis). The key
bit is obtained from (parity, k) through the ciphering wheel, so knowing
the parity is worthless without the exact basis index.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from qamp.attack import amplify_and_estimate, wilson_interval
from qamp.cloning import CloneMachineParams
from qamp.errors import InvalidSplit, SimulationError, ValidationError
from qamp.measurement import MeasurementMode
from qamp.qubit_core import AuxiliaryInfo, Parity, Qubit, StokesVector, orthogonal
from qamp.rng import trial_rng

# the weak-pulse expansion keeps only vacuum + one photon; require mu <= this
MAX_PULSE_MEAN = 0.1

# (parity, k mod 2) -> key bit
WHEEL = {
    (Parity.PLUS, 0): 0,
    (Parity.MINUS, 0): 1,
    (Parity.PLUS, 1): 1,
    (Parity.MINUS, 1): 0,
}


def ciphering_wheel(par: Parity, k: int) -> int:
    if k < 0:
        raise ValidationError(f"basis index must be non-negative, got {k}")
    return WHEEL[(Parity(par), k % 2)]


@dataclass(frozen=True)
class Y00Params:
    m_levels: int
    alpha_sq: float

    def __post_init__(self):
        if self.m_levels < 2:
            raise ValidationError(f"need M >= 2 bases, got {self.m_levels}")
        if not self.alpha_sq > 0:
            raise ValidationError(f"mean photon number must be positive, got {self.alpha_sq}")

    @property
    def alpha(self) -> float:
        return math.sqrt(self.alpha_sq)

    def theta(self, k: int) -> float:
        return math.pi * k / self.m_levels

    def axis(self, k: int) -> np.ndarray:
        """Unit Stokes vector of the PLUS state of basis ``k``."""
        t = self.theta(k)
        return np.array([math.cos(t), math.sin(t), 0.0])


@dataclass(frozen=True)
class Y00State:
    parity: Parity
    k: int
    params: Y00Params

    def __post_init__(self):
        object.__setattr__(self, "parity", Parity(self.parity))
        if not 0 <= self.k < self.params.m_levels:
            raise ValidationError(f"k={self.k} outside 0..{self.params.m_levels - 1}")

    @property
    def direction(self) -> np.ndarray:
        return int(self.parity) * self.params.axis(self.k)

    @property
    def key(self) -> int:
        return ciphering_wheel(self.parity, self.k)


def y00_stokes(s: Y00State) -> tuple[StokesVector, float]:
    """Mean Stokes vector of the coherent state and the per-axis variance |alpha|^2."""
    v = s.params.alpha_sq * s.direction
    return StokesVector(*(float(x) for x in v)), s.params.alpha_sq


def photon_qubit(s: Y00State) -> Qubit:
    """Polarization of a single photon taken from the pulse (phi = 0 plane)."""
    q = Qubit(s.params.theta(s.k), 0.0)
    return q if s.parity is Parity.PLUS else orthogonal(q)


def alphabet_aux(k: int, params: Y00Params) -> AuxiliaryInfo:
    return AuxiliaryInfo.from_direction(params.axis(k))


def stokes_distance(k_a: int, k_b: int, params: Y00Params) -> float:
    """|S(k_a) - S(k_b)| for two same-parity states."""
    return params.alpha_sq * float(np.linalg.norm(params.axis(k_a) - params.axis(k_b)))


def neighboring(k_a: int, k_b: int, params: Y00Params) -> bool:
    """True when two same-parity states lie within one noise radius |alpha|."""
    return stokes_distance(k_a, k_b, params) < params.alpha


def neighbor_threshold(params: Y00Params) -> float:
    """Small-angle bound M / (pi |alpha|) on indistinguishable index offsets."""
    return params.m_levels / (math.pi * params.alpha)


def neighboring_approx(k_a: int, k_b: int, params: Y00Params) -> bool:
    return abs(k_a - k_b) < neighbor_threshold(params)


def security_margin(params: Y00Params) -> tuple[bool, float]:
    ratio = neighbor_threshold(params)
    return params.m_levels > math.pi * params.alpha, ratio


@dataclass(frozen=True)
class SplitPlan:
    alpha1_sq: float
    alpha2_sq: float
    j_pulses: int = 1

    def __post_init__(self):
        if self.alpha1_sq < 0 or self.alpha2_sq < 0:
            raise InvalidSplit("mean photon numbers must be non-negative")
        if self.j_pulses < 1:
            raise InvalidSplit(f"need J >= 1 weak pulses, got {self.j_pulses}")
        if self.per_pulse_mean > MAX_PULSE_MEAN:
            raise InvalidSplit(
                f"per-pulse mean {self.per_pulse_mean:.4g} exceeds {MAX_PULSE_MEAN}; "
                "increase J"
            )

    @property
    def per_pulse_mean(self) -> float:
        return self.alpha1_sq / self.j_pulses

    @property
    def total(self) -> float:
        return self.alpha1_sq + self.alpha2_sq


def beam_split(alpha_sq: float, ratio: float) -> tuple[float, float]:
    """Lossless split: ``ratio`` of the mean photon number goes to the first arm."""
    if not 0 < ratio < 1:
        raise InvalidSplit(f"split ratio must lie in (0, 1), got {ratio}")
    first = alpha_sq * ratio
    return first, alpha_sq - first


def cascade_split(alpha1_sq: float, j_pulses: int) -> list[float]:
    """Mean photon numbers of the ``j_pulses`` equal weak pulses."""
    if j_pulses < 1:
        raise InvalidSplit(f"need J >= 1 weak pulses, got {j_pulses}")
    return [alpha1_sq / j_pulses] * j_pulses


def plan_split(alpha_sq: float, ratio: float, j_pulses: int) -> SplitPlan:
    first, second = beam_split(alpha_sq, ratio)
    return SplitPlan(first, second, j_pulses)


def single_photon_probability(mu: float) -> float:
    """Poisson probability that a coherent pulse of mean ``mu`` holds one photon."""
    return mu * math.exp(-mu)


def extract_single_photons(plan: SplitPlan, rng: np.random.Generator) -> int:
    """Number of the J weak pulses that yield exactly one photon."""
    return int(rng.binomial(plan.j_pulses, single_photon_probability(plan.per_pulse_mean)))


def snap_to_alphabet(direction, params: Y00Params) -> int:
    """Nearest basis index to an estimated axis, using its S1-S2 projection.

    The axis angle is taken modulo pi; an angle rounding up to pi wraps to
    k = 0, whose PLUS direction is the opposite end of the same axis.
    """
    d = np.asarray(direction, dtype=float)
    angle = math.atan2(d[1], d[0]) % math.pi
    return round(params.m_levels * angle / math.pi) % params.m_levels


def y00_parity_readout(
    s: Y00State, aux_estimate: AuxiliaryInfo, alpha2_sq: float, rng: np.random.Generator
) -> Parity:
    """Stokes measurement of the retained pulse along the estimated axis.

    The outcome is Gaussian with mean alpha2_sq * cos(delta) and variance
    alpha2_sq; its sign is the parity relative to the axis' canonical
    orientation.
    """
    if not alpha2_sq > 0:
        raise ValidationError("retained pulse must have positive mean photon number")
    mean = alpha2_sq * float(np.dot(s.direction, aux_estimate.axis))
    return Parity.from_sign(rng.normal(mean, math.sqrt(alpha2_sq)))


@dataclass(frozen=True)
class Y00AttackConfig:
    params: Y00Params
    machine: CloneMachineParams
    levels: int
    split: float = 0.5
    j_pulses: int = 1000
    mode: MeasurementMode = MeasurementMode.IDEALIZED
    trials: int = 500
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "mode", MeasurementMode(self.mode))
        if self.levels < 0:
            raise ValidationError(f"levels must be >= 0, got {self.levels}")
        if self.trials < 1:
            raise ValidationError(f"trials must be >= 1, got {self.trials}")
        if self.seed < 0:
            raise ValidationError("seed must be non-negative")
        self.plan  # validates the split

    @property
    def plan(self) -> SplitPlan:
        return plan_split(self.params.alpha_sq, self.split, self.j_pulses)


@dataclass(frozen=True)
class Y00Outcome:
    k_hat: int | None
    parity_guess: Parity | None
    key_guess: int | None
    success: bool
    photons: int = 0
    failure: str | None = None

    def k_error(self, truth: Y00State) -> bool:
        return self.k_hat != truth.k


def _finish(truth: Y00State, k_hat: int, alpha2_sq: float, rng, photons: int) -> Y00Outcome:
    guess = y00_parity_readout(truth, alphabet_aux(k_hat, truth.params), alpha2_sq, rng)
    key = ciphering_wheel(guess, k_hat)
    return Y00Outcome(k_hat, guess, key, key == truth.key, photons)


def y00_attack_trial(
    truth: Y00State,
    cfg: Y00AttackConfig,
    rng: np.random.Generator,
    inject_k: int | None = None,
) -> Y00Outcome:
    """Extract photons, amplify, estimate the basis, read the parity, apply the wheel.

    ``inject_k`` skips the amplification arm and uses the given index.
    """
    plan = cfg.plan
    if inject_k is not None:
        return _finish(truth, inject_k, plan.alpha2_sq, rng, 0)
    photons = extract_single_photons(plan, rng)
    try:
        est, _ = amplify_and_estimate(
            photon_qubit(truth), photons, cfg.machine, cfg.levels, cfg.mode, rng
        )
    except SimulationError as exc:
        return Y00Outcome(None, None, None, False, photons, failure=type(exc).__name__)
    k_hat = snap_to_alphabet(est.direction, truth.params)
    return _finish(truth, k_hat, plan.alpha2_sq, rng, photons)


def y00_baseline_trial(truth: Y00State, cfg: Y00AttackConfig, rng: np.random.Generator) -> Y00Outcome:
    """No cloning: measure S1, S2 of the first arm directly, with variance alpha1_sq each."""
    plan = cfg.plan
    mean = plan.alpha1_sq * truth.direction[:2]
    measured = rng.normal(mean, math.sqrt(plan.alpha1_sq))
    k_hat = snap_to_alphabet([measured[0], measured[1], 0.0], truth.params)
    return _finish(truth, k_hat, plan.alpha2_sq, rng, 0)


def random_y00_state(params: Y00Params, rng: np.random.Generator) -> Y00State:
    par = Parity.PLUS if rng.random() < 0.5 else Parity.MINUS
    return Y00State(par, int(rng.integers(params.m_levels)), params)


@dataclass(frozen=True)
class Y00Summary:
    rate: float
    ci95: float
    k_error_rate: float
    baseline_rate: float
    baseline_ci95: float
    baseline_k_error_rate: float
    failures: int
    trials: int


def y00_campaign(cfg: Y00AttackConfig) -> Y00Summary:
    """Paired campaign: trial i draws one truth, then attack and baseline on separate substreams."""
    wins = base_wins = k_err = base_k_err = failures = 0
    for i in range(cfg.trials):
        truth = random_y00_state(cfg.params, trial_rng(cfg.seed, i, 0))
        out = y00_attack_trial(truth, cfg, trial_rng(cfg.seed, i, 1))
        base = y00_baseline_trial(truth, cfg, trial_rng(cfg.seed, i, 2))
        wins += out.success
        base_wins += base.success
        k_err += out.k_error(truth)
        base_k_err += base.k_error(truth)
        failures += out.failure is not None
    n = cfg.trials
    lo, hi = wilson_interval(wins, n)
    blo, bhi = wilson_interval(base_wins, n)
    return Y00Summary(
        rate=wins / n,
        ci95=(hi - lo) / 2,
        k_error_rate=k_err / n,
        baseline_rate=base_wins / n,
        baseline_ci95=(bhi - blo) / 2,
        baseline_k_error_rate=base_k_err / n,
        failures=failures,
        trials=n,
    )
