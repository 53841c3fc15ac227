"""Universal p -> q qubit cloning at the density-matrix level.

Each output clone of the optimal universal cloner is the mixture
``F rho + D rho_perp`` of the input and its orthogonal state, so the Stokes
vector keeps its direction and shrinks by ``eta = F - D``. Running the
machine L times in cascade multiplies the photon number by (q/p)^L.

Clone ensembles are treated as products of identical mixed states; the
entanglement between real cloner outputs is not represented.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from qamp.errors import InvalidCloneParams, ValidationError
from qamp.qubit_core import DensityMatrix, Qubit, StokesVector, density_matrix, orthogonal

WEIGHT_TOL = 1e-12


@dataclass(frozen=True)
class CloneMachineParams:
    """A machine taking ``p`` identical qubits to ``q`` clones (q > p >= 1)."""

    p: int
    q: int

    def __post_init__(self):
        if isinstance(self.p, bool) or isinstance(self.q, bool):
            raise InvalidCloneParams("p and q must be integers")
        if int(self.p) != self.p or int(self.q) != self.q:
            raise InvalidCloneParams(f"p={self.p!r}, q={self.q!r} must be integers")
        if self.p < 1 or self.q <= self.p:
            raise InvalidCloneParams(f"need q > p >= 1, got p={self.p}, q={self.q}")

    @property
    def gain(self) -> Fraction:
        """Photon multiplication per cascade level, q/p."""
        return Fraction(self.q, self.p)

    @property
    def fidelity(self) -> float:
        return fidelity(self)

    @property
    def disturbance(self) -> float:
        return disturbance(self)

    @property
    def eta(self) -> float:
        return shrink_factor(self)


def _params(m) -> CloneMachineParams:
    if isinstance(m, CloneMachineParams):
        return m
    p, q = m
    return CloneMachineParams(p, q)


def fidelity_exact(m: CloneMachineParams) -> Fraction:
    m = _params(m)
    p, q = m.p, m.q
    return Fraction(q * (p + 1) + p, q * (p + 2))


def disturbance_exact(m: CloneMachineParams) -> Fraction:
    m = _params(m)
    return Fraction(m.q - m.p, m.q * (m.p + 2))


def shrink_factor_exact(m: CloneMachineParams) -> Fraction:
    m = _params(m)
    return Fraction(m.p * (m.q + 2), m.q * (m.p + 2))


def fidelity(m: CloneMachineParams) -> float:
    return float(fidelity_exact(m))


def disturbance(m: CloneMachineParams) -> float:
    return float(disturbance_exact(m))


def shrink_factor(m: CloneMachineParams) -> float:
    return float(shrink_factor_exact(m))


@dataclass(frozen=True)
class MixedQubitState:
    """``a * rho(base) + b * rho(base_perp)`` with a + b = 1."""

    base: Qubit
    a: float = 1.0
    b: float = 0.0

    def __post_init__(self):
        if not (-WEIGHT_TOL <= self.a <= 1 + WEIGHT_TOL and -WEIGHT_TOL <= self.b <= 1 + WEIGHT_TOL):
            raise ValidationError(f"weights ({self.a}, {self.b}) outside [0, 1]")
        if abs(self.a + self.b - 1.0) > WEIGHT_TOL:
            raise ValidationError(f"weights ({self.a}, {self.b}) do not sum to 1")

    @property
    def polarization(self) -> float:
        """Length of the Stokes vector, a - b."""
        return self.a - self.b

    def stokes(self) -> StokesVector:
        return self.base.stokes.scaled(self.polarization)

    def density_matrix(self) -> DensityMatrix:
        return self.a * density_matrix(self.base) + self.b * density_matrix(orthogonal(self.base))


def clone_step(s: MixedQubitState, m: CloneMachineParams) -> MixedQubitState:
    """One pass through the cloner: a' = F a + D b, b' = D a + F b."""
    m = _params(m)
    f, d = m.fidelity, m.disturbance
    return MixedQubitState(s.base, f * s.a + d * s.b, d * s.a + f * s.b)


def closed_form_weights(eta: float, levels: int, a0: float = 1.0) -> tuple[float, float]:
    """Weights after ``levels`` steps, starting from (a0, 1 - a0)."""
    shrink = eta ** levels * (2 * a0 - 1)
    return 0.5 * (1 + shrink), 0.5 * (1 - shrink)


def clone_count_exact(m: CloneMachineParams, levels: int, n0: int = 1) -> Fraction:
    return _params(m).gain ** levels * n0


@dataclass(frozen=True)
class CascadeResult:
    final: MixedQubitState
    levels: tuple[tuple[float, float], ...]
    clone_count: float
    eta: float
    machine: CloneMachineParams = field(repr=False)
    n0: int = 1

    @property
    def depth(self) -> int:
        return len(self.levels) - 1

    @property
    def clone_count_exact(self) -> Fraction:
        return clone_count_exact(self.machine, self.depth, self.n0)

    @property
    def n_clones(self) -> int:
        """Whole number of clones available for measurement."""
        return math.floor(self.clone_count_exact)


def cascade(q0: Qubit, m: CloneMachineParams, levels: int, n0: int = 1) -> CascadeResult:
    """Run ``levels`` cloner stages on ``n0`` copies of the pure state ``q0``."""
    m = _params(m)
    if levels < 0 or int(levels) != levels:
        raise ValidationError(f"levels must be a non-negative integer, got {levels!r}")
    if n0 < 1:
        raise ValidationError(f"n0 must be positive, got {n0!r}")
    state = MixedQubitState(q0)
    history = [(state.a, state.b)]
    for _ in range(levels):
        state = clone_step(state, m)
        history.append((state.a, state.b))
    eta = m.eta
    a, b = closed_form_weights(eta, levels)
    return CascadeResult(
        final=MixedQubitState(q0, a, b),
        levels=tuple(history),
        clone_count=float(clone_count_exact(m, levels, n0)),
        eta=eta,
        machine=m,
        n0=n0,
    )

