"""Polarization qubits on the Poincare sphere.

States are parameterized as ``cos(theta/2)|H> + sin(theta/2) e^{i phi}|V>``.
Stokes operators act on the single-photon subspace spanned by ``|H>, |V>``,
where they are plain 2x2 matrices.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from qamp.errors import AngleOutOfRange, ParityUndefined

TWO_PI = 2.0 * math.pi
# |S2| at or below this is the great circle where parity has no sign.
PARITY_TOL = 1e-9
ANGLE_TOL = 1e-9

DensityMatrix = np.ndarray
"""2x2 complex array in the {|H>, |V>} basis."""


class StokesOperators(NamedTuple):
    s1: np.ndarray
    s2: np.ndarray
    s3: np.ndarray


# s3 is oriented so that Tr[s3 rho] = sin(theta) sin(phi) for the states above;
# with this orientation [s_i, s_j] = 2i eps_ijk s_k.
STOKES = StokesOperators(
    s1=np.array([[1, 0], [0, -1]], dtype=complex),
    s2=np.array([[0, 1], [1, 0]], dtype=complex),
    s3=np.array([[0, -1j], [1j, 0]], dtype=complex),
)


class StokesVector(NamedTuple):
    s1: float
    s2: float
    s3: float

    def as_array(self) -> np.ndarray:
        return np.array(self, dtype=float)

    def norm(self) -> float:
        return math.sqrt(self.s1 ** 2 + self.s2 ** 2 + self.s3 ** 2)

    def scaled(self, factor: float) -> "StokesVector":
        return StokesVector(factor * self.s1, factor * self.s2, factor * self.s3)


class Parity(enum.IntEnum):
    MINUS = -1
    PLUS = 1

    def flipped(self) -> "Parity":
        return Parity(-int(self))

    @classmethod
    def from_sign(cls, x: float) -> "Parity":
        return cls.PLUS if x > 0 else cls.MINUS


def _wrap_phi(phi: float) -> float:
    phi = math.fmod(phi, TWO_PI)
    if phi < 0:
        phi += TWO_PI
    if phi >= TWO_PI - ANGLE_TOL:
        phi = 0.0
    return phi


@dataclass(frozen=True)
class Qubit:
    """Pure polarization state.

    ``theta`` must lie in [0, pi] and ``phi`` in [0, 2 pi); use
    :meth:`normalized` to fold arbitrary angles into range.
    """

    theta: float
    phi: float

    def __post_init__(self):
        if not (0.0 <= self.theta <= math.pi):
            raise AngleOutOfRange(f"theta={self.theta!r} outside [0, pi]")
        if not (0.0 <= self.phi < TWO_PI):
            raise AngleOutOfRange(f"phi={self.phi!r} outside [0, 2pi)")

    @classmethod
    def normalized(cls, theta: float, phi: float) -> "Qubit":
        """Build a qubit from arbitrary angles, reflecting theta into [0, pi]."""
        theta = math.fmod(theta, TWO_PI)
        if theta < 0:
            theta += TWO_PI
        if theta > math.pi:
            theta = TWO_PI - theta
            phi += math.pi
        return cls(min(theta, math.pi), _wrap_phi(phi))

    @classmethod
    def from_stokes(cls, direction) -> "Qubit":
        """Pure state whose Stokes vector points along ``direction``."""
        d = np.asarray(direction, dtype=float)
        d = d / np.linalg.norm(d)
        theta = math.acos(min(1.0, max(-1.0, d[0])))
        if math.hypot(d[1], d[2]) <= ANGLE_TOL:
            phi = 0.0
        else:
            phi = _wrap_phi(math.atan2(d[2], d[1]))
        return cls(theta, phi)

    @property
    def ket(self) -> np.ndarray:
        return np.array(
            [math.cos(self.theta / 2), math.sin(self.theta / 2) * np.exp(1j * self.phi)]
        )

    @property
    def stokes(self) -> StokesVector:
        """Closed-form Stokes expectation (cos t, sin t cos p, sin t sin p)."""
        st = math.sin(self.theta)
        return StokesVector(math.cos(self.theta), st * math.cos(self.phi), st * math.sin(self.phi))


def make_qubit(theta: float, phi: float) -> Qubit:
    return Qubit(theta, phi)


def density_matrix(q: Qubit) -> DensityMatrix:
    c = math.cos(q.theta / 2)
    s = math.sin(q.theta / 2)
    off = c * s * np.exp(-1j * q.phi)
    return np.array([[c * c, off], [np.conj(off), s * s]], dtype=complex)


def check_density_matrix(rho, atol: float = 1e-12) -> DensityMatrix:
    """Validate a 2x2 density matrix; returns it as a complex array."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (2, 2):
        raise ValueError(f"expected a 2x2 matrix, got shape {rho.shape}")
    if not np.allclose(rho, rho.conj().T, atol=atol):
        raise ValueError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1.0) > atol:
        raise ValueError("density matrix trace differs from 1")
    if np.linalg.eigvalsh(rho).min() < -atol:
        raise ValueError("density matrix has a negative eigenvalue")
    return rho


def orthogonal(q: Qubit) -> Qubit:
    """The state diametrically opposite ``q`` on the Poincare sphere."""
    return Qubit(math.pi - q.theta, _wrap_phi(q.phi + math.pi))


def stokes_expectation(rho: DensityMatrix) -> StokesVector:
    rho = np.asarray(rho)
    return StokesVector(*(float(np.real(np.trace(op @ rho))) for op in STOKES))


def stokes_dispersion(rho: DensityMatrix) -> tuple[float, float, float]:
    """Variance of each Stokes operator, Tr[S^2 rho] - Tr[S rho]^2."""
    rho = np.asarray(rho)
    out = []
    for op in STOKES:
        mean = float(np.real(np.trace(op @ rho)))
        second = float(np.real(np.trace(op @ op @ rho)))
        out.append(second - mean * mean)
    return tuple(out)


def canonical_direction(direction) -> np.ndarray:
    """Pick the representative of {d, -d} with S2 > 0 (then S1 > 0, then S3 > 0)."""
    d = np.asarray(direction, dtype=float)
    for component in (d[1], d[0]):
        if abs(component) > PARITY_TOL:
            return d if component > 0 else -d
    return d if d[2] > 0 else -d


@dataclass(frozen=True, eq=False)
class AuxiliaryInfo:
    """A polarization axis: a Stokes direction with its antipode identified.

    ``axis`` is the canonical unit vector; equality compares axes to 1e-9.
    """

    axis: tuple[float, float, float]

    @classmethod
    def from_direction(cls, direction) -> "AuxiliaryInfo":
        d = np.asarray(direction, dtype=float)
        n = np.linalg.norm(d)
        if n == 0:
            raise ValueError("zero vector has no direction")
        d = canonical_direction(d / n)
        return cls(tuple(float(x) for x in d))

    @property
    def theta(self) -> float:
        return math.acos(min(1.0, max(-1.0, self.axis[0])))

    @property
    def phi(self) -> float:
        if math.hypot(self.axis[1], self.axis[2]) <= ANGLE_TOL:
            return 0.0
        return _wrap_phi(math.atan2(self.axis[2], self.axis[1]))

    @property
    def degenerate(self) -> bool:
        """True when the axis lies on the S2 = 0 circle."""
        return abs(self.axis[1]) <= PARITY_TOL

    def as_qubit(self) -> Qubit:
        return Qubit.from_stokes(self.axis)

    def distance(self, other: "AuxiliaryInfo") -> float:
        """Projective angle between two axes, in [0, pi/2]."""
        return projective_angle(self.axis, other.axis)

    def __eq__(self, other):
        if not isinstance(other, AuxiliaryInfo):
            return NotImplemented
        return bool(np.allclose(self.axis, other.axis, rtol=0.0, atol=ANGLE_TOL))

    __hash__ = None


def projective_angle(u, v) -> float:
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    c = abs(float(np.dot(u, v))) / (np.linalg.norm(u) * np.linalg.norm(v))
    return math.acos(min(1.0, c))


def aux_info(q: Qubit) -> AuxiliaryInfo:
    return AuxiliaryInfo.from_direction(q.stokes)


def parity(q: Qubit) -> Parity:
    s2 = q.stokes.s2
    if abs(s2) <= PARITY_TOL:
        raise ParityUndefined(f"<S2> = {s2:.3g} lies on the parity boundary")
    return Parity.from_sign(s2)


def reconstruct(par: Parity, aux: AuxiliaryInfo) -> Qubit:
    """Invert (parity, aux_info): the state on ``aux``'s axis with the given parity."""
    if aux.degenerate:
        raise ParityUndefined("axis lies on the S2 = 0 circle; parity cannot orient it")
    return Qubit.from_stokes(np.asarray(aux.axis) * int(par))
