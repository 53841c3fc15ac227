"""Simulation of the quantum amplification attack on multiphoton quantum cryptography."""

__version__ = "0.1.0"

from qamp.cloning import (  # noqa: E402
    CascadeResult,
    CloneMachineParams,
    MixedQubitState,
    cascade,
    clone_step,
    disturbance,
    fidelity,
    shrink_factor,
)
from qamp.errors import (  # noqa: E402
    AngleOutOfRange,
    DegenerateDirection,
    InsufficientPhotons,
    InvalidCloneParams,
    InvalidSplit,
    ParityUndefined,
)
from qamp.qubit_core import (  # noqa: E402
    STOKES,
    AuxiliaryInfo,
    Parity,
    Qubit,
    StokesVector,
    aux_info,
    density_matrix,
    make_qubit,
    orthogonal,
    parity,
    reconstruct,
    stokes_dispersion,
    stokes_expectation,
)
