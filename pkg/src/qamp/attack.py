"""The three-step quantum amplification attack on a multiphoton qubit source.

1. Split the pulse: ``floor(n0 * split)`` photons go to amplification, the
   rest are kept for the parity observation.
2. Run the amplification photons through the cloner cascade (in groups of
   ``p``), measure Stokes parameters of all clones and estimate the axis.
3. Measure the kept photons along the estimated axis and take the majority.

For a generic source the key bit is the parity bit itself.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.stats import binomtest

from qamp.cloning import CloneMachineParams, cascade
from qamp.errors import InsufficientPhotons, SimulationError, ValidationError
from qamp.measurement import MeasurementMode, observe_parity, quantum_snr, simulate_stokes_measurement
from qamp.qubit_core import AuxiliaryInfo, Parity, Qubit, aux_info, parity
from qamp.rng import trial_rng

# targets with |<S2>| below this are excluded from random sampling
DEGENERATE_BAND = 1e-3

AuxOracle = Callable[[Qubit, np.random.Generator], AuxiliaryInfo]
TargetSampler = Callable[[np.random.Generator], Qubit]


@dataclass(frozen=True)
class AttackConfig:
    machine: CloneMachineParams
    levels: int
    source_photons: int = 2
    split: float = 0.5
    mode: MeasurementMode = MeasurementMode.IDEALIZED
    trials: int = 1000
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "mode", MeasurementMode(self.mode))
        if self.levels < 0:
            raise ValidationError(f"levels must be >= 0, got {self.levels}")
        if self.source_photons < 2:
            raise ValidationError(f"need at least 2 source photons, got {self.source_photons}")
        if not 0 < self.split < 1:
            raise ValidationError(f"split must lie in (0, 1), got {self.split}")
        if self.n_amplify < 1 or self.n_observe < 1:
            raise ValidationError(
                f"split {self.split} of {self.source_photons} photons leaves an empty arm"
            )
        if self.trials < 1:
            raise ValidationError(f"trials must be >= 1, got {self.trials}")
        if self.seed < 0:
            raise ValidationError("seed must be non-negative")

    @property
    def n_amplify(self) -> int:
        return math.floor(self.source_photons * self.split)

    @property
    def n_observe(self) -> int:
        return self.source_photons - self.n_amplify


@dataclass(frozen=True)
class AttackOutcome:
    aux_estimate: AuxiliaryInfo | None
    angular_error: float
    parity_guess: Parity | None
    key_guess: int | None
    success: bool
    clone_count: float = 0.0
    snr_analytic: float = math.nan
    failure: str | None = field(default=None, compare=False)


def key_bit(par: Parity) -> int:
    """Generic-source key bit: 0 for PLUS, 1 for MINUS."""
    return 0 if par is Parity.PLUS else 1


def amplify_and_estimate(
    photon: Qubit,
    n_photons: int,
    machine: CloneMachineParams,
    levels: int,
    mode: MeasurementMode,
    rng: np.random.Generator,
):
    """Steps 1-2 on ``n_photons`` copies of ``photon``; returns (estimate, clone_count).

    The photons are fed to the cloner in ``n_photons // p`` groups; leftovers
    are discarded.
    """
    groups = n_photons // machine.p
    if groups < 1:
        raise InsufficientPhotons(f"{n_photons} photon(s) cannot feed a p={machine.p} cloner")
    result = cascade(photon, machine, levels, groups * machine.p)
    est = simulate_stokes_measurement(result.final, result.n_clones, mode, rng)
    return est, result.clone_count


def run_attack_trial(
    target: Qubit,
    cfg: AttackConfig,
    rng: np.random.Generator,
    aux: AuxiliaryInfo | None = None,
) -> AttackOutcome:
    """One attack on ``target``.

    Passing ``aux`` skips the amplification step and uses it as Eve's axis.
    Raises ParityUndefined if the target itself has no parity; any other
    simulation failure is reported as an unsuccessful outcome.
    """
    true_parity = parity(target)
    fed = cfg.n_amplify // cfg.machine.p * cfg.machine.p
    snr = quantum_snr(cfg.machine, cfg.levels, fed) if fed else 0.0
    clones = 0.0
    try:
        if aux is None:
            est, clones = amplify_and_estimate(
                target, cfg.n_amplify, cfg.machine, cfg.levels, cfg.mode, rng
            )
            aux = est.aux
        error = aux.distance(aux_info(target))
        guess = observe_parity(target, aux, cfg.n_observe, rng)
    except SimulationError as exc:
        err = aux.distance(aux_info(target)) if aux is not None else math.nan
        return AttackOutcome(aux, err, None, None, False, clones, snr, failure=type(exc).__name__)
    key = key_bit(guess)
    return AttackOutcome(aux, error, guess, key, key == key_bit(true_parity), clones, snr)


def uniform_target(rng: np.random.Generator) -> Qubit:
    """Uniform on the sphere, rejecting the band |<S2>| <= 1e-3."""
    while True:
        v = rng.normal(size=3)
        v /= np.linalg.norm(v)
        if abs(v[1]) > DEGENERATE_BAND:
            return Qubit.from_stokes(v)


def cap_target(center, radius: float) -> TargetSampler:
    """Sampler uniform on the spherical cap of angular ``radius`` around ``center``."""
    c = np.asarray(center, dtype=float)
    c /= np.linalg.norm(c)
    helper = np.array([1.0, 0.0, 0.0]) if abs(c[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = np.cross(c, helper)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(c, e1)

    def sample(rng: np.random.Generator) -> Qubit:
        while True:
            z = rng.uniform(math.cos(radius), 1.0)
            az = rng.uniform(0.0, 2 * math.pi)
            r = math.sqrt(1 - z * z)
            v = z * c + r * (math.cos(az) * e1 + math.sin(az) * e2)
            if abs(v[1]) > DEGENERATE_BAND:
                return Qubit.from_stokes(v)

    return sample


def exact_aux(target: Qubit, rng: np.random.Generator) -> AuxiliaryInfo:
    return aux_info(target)


def random_aux(target: Qubit, rng: np.random.Generator) -> AuxiliaryInfo:
    """An axis carrying no information about the target."""
    return AuxiliaryInfo.from_direction(rng.normal(size=3))


@dataclass(frozen=True)
class SuccessSummary:
    rate: float
    ci95: float
    low: float
    high: float
    successes: int
    trials: int
    mean_angular_error: float
    failures: int


def wilson_interval(successes: int, trials: int) -> tuple[float, float]:
    ci = binomtest(successes, trials).proportion_ci(confidence_level=0.95, method="wilson")
    return float(ci.low), float(ci.high)


def success_rate(
    cfg: AttackConfig,
    targets: TargetSampler = uniform_target,
    aux_oracle: AuxOracle | None = None,
) -> SuccessSummary:
    """Monte Carlo success rate over ``cfg.trials`` independent trials.

    Trial ``i`` uses the substream (cfg.seed, i) for both the target draw and
    the attack, so any subset of trials can be replayed on its own.
    """
    wins = 0
    failures = 0
    errors = []
    for i in range(cfg.trials):
        rng = trial_rng(cfg.seed, i)
        target = targets(rng)
        aux = aux_oracle(target, rng) if aux_oracle is not None else None
        out = run_attack_trial(target, cfg, rng, aux=aux)
        wins += out.success
        failures += out.failure is not None
        if not math.isnan(out.angular_error):
            errors.append(out.angular_error)
    low, high = wilson_interval(wins, cfg.trials)
    return SuccessSummary(
        rate=wins / cfg.trials,
        ci95=(high - low) / 2,
        low=low,
        high=high,
        successes=wins,
        trials=cfg.trials,
        mean_angular_error=float(np.mean(errors)) if errors else math.nan,
        failures=failures,
    )
