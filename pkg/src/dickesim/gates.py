"""Rotation and squeezing unitaries, pulse steps, and sequence application.

A pulse step is a coherent rotation followed by squeezing.  The rotation is
R(theta, n) = exp(s * i * theta * (n_x S_x + n_y S_y + n_z S_z)) and the
squeezes are exp(s * i * alpha S_x^2) and exp(s * i * beta S_y^2), where the
global exponent sign s and the way the pieces compose are configurable via
:class:`GateConventions` so that published parameter tables can be replayed
under every plausible reading.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .core import (
    DickeSpace,
    QuantumState,
    SymmetricOperator,
    apply,
    build_sx,
    build_sy,
    build_sz,
    hermitian_exp,
    _check_same_space,
)

AXIS_NORM_TOL = 1e-9

SQUEEZE_ORDERS = ("xy", "yx")
SQUEEZE_COMPOSITIONS = ("product", "combined")
ROTATION_COMPOSITIONS = ("combined", "product")


@dataclass(frozen=True)
class GateConventions:
    """Resolvable ambiguities in how a pulse step turns into a unitary.

    squeeze_order:        "xy" applies exp(i alpha S_x^2) first, "yx" flips.
                          Only relevant for squeeze_composition="product".
    squeeze_composition:  "product" multiplies the two squeeze exponentials;
                          "combined" uses the single exponential
                          exp(s*i*(alpha S_x^2 + beta S_y^2)).
    rotation_composition: "combined" exponentiates the summed generator
                          theta * (n . S) in one shot; "product" factors the
                          per-axis angles into Rz * Ry * Rx (x applied first).
    exponent_sign:        +1 or -1 global sign of the exponent.
    """

    squeeze_order: str = "xy"
    squeeze_composition: str = "product"
    rotation_composition: str = "combined"
    exponent_sign: int = 1

    def __post_init__(self):
        if self.squeeze_order not in SQUEEZE_ORDERS:
            raise ValueError(f"squeeze_order must be one of {SQUEEZE_ORDERS}")
        if self.squeeze_composition not in SQUEEZE_COMPOSITIONS:
            raise ValueError(f"squeeze_composition must be one of {SQUEEZE_COMPOSITIONS}")
        if self.rotation_composition not in ROTATION_COMPOSITIONS:
            raise ValueError(f"rotation_composition must be one of {ROTATION_COMPOSITIONS}")
        if self.exponent_sign not in (1, -1):
            raise ValueError("exponent_sign must be +1 or -1")


DEFAULT_CONVENTIONS = GateConventions()


def _normalized_axis(axis) -> np.ndarray:
    vec = np.asarray(axis, dtype=float).reshape(-1)
    if vec.shape != (3,):
        raise ValueError(f"rotation axis must be a 3-vector, got shape {vec.shape}")
    norm = np.linalg.norm(vec)
    if norm == 0:
        raise ValueError("rotation axis must be nonzero")
    return vec / norm


@dataclass(frozen=True)
class PulseStep:
    """One sequence step: rotation by theta about axis, then squeezing."""

    axis: Tuple[float, float, float]
    theta: float
    alpha: float
    beta: float

    def __post_init__(self):
        vec = _normalized_axis(self.axis)
        object.__setattr__(self, "axis", (float(vec[0]), float(vec[1]), float(vec[2])))
        object.__setattr__(self, "theta", float(self.theta))
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "beta", float(self.beta))

    @property
    def turns(self) -> np.ndarray:
        """Per-axis rotation angles (theta_x, theta_y, theta_z) = theta * axis."""
        return self.theta * np.asarray(self.axis)


@dataclass(frozen=True)
class PulseSequence:
    """Ordered pulse steps plus a final squeeze-free rotation."""

    space: DickeSpace
    steps: Tuple[PulseStep, ...]
    final_axis: Tuple[float, float, float]
    final_theta: float

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))
        vec = _normalized_axis(self.final_axis)
        object.__setattr__(self, "final_axis", (float(vec[0]), float(vec[1]), float(vec[2])))
        object.__setattr__(self, "final_theta", float(self.final_theta))

    @property
    def n_steps(self) -> int:
        return len(self.steps)

    @property
    def n_params(self) -> int:
        """Flattened parameter count: five per step plus three final angles."""
        return 5 * self.n_steps + 3

    @classmethod
    def identity(cls, space: DickeSpace, n_steps: int = 0) -> "PulseSequence":
        steps = tuple(PulseStep((0.0, 0.0, 1.0), 0.0, 0.0, 0.0) for _ in range(n_steps))
        return cls(space, steps, (0.0, 0.0, 1.0), 0.0)


@functools.lru_cache(maxsize=None)
def _spin_triple(space: DickeSpace):
    return build_sx(space), build_sy(space), build_sz(space)


@functools.lru_cache(maxsize=None)
def _squeeze_eigs(space: DickeSpace):
    """Eigendecompositions of S_x^2 and S_y^2, reused for every squeeze."""
    sx, sy, _ = _spin_triple(space)
    out = []
    for s in (sx, sy):
        w, v = np.linalg.eigh(s.matrix @ s.matrix)
        out.append((w, v))
    return tuple(out)


def rotation_unitary(space: DickeSpace, axis, theta: float,
                     conventions: GateConventions = DEFAULT_CONVENTIONS) -> SymmetricOperator:
    """R(theta, n) about the (normalized) axis n."""
    vec = _normalized_axis(axis)
    return rotation_from_turns(space, theta * vec, conventions)


def rotation_from_turns(space: DickeSpace, turns,
                        conventions: GateConventions = DEFAULT_CONVENTIONS) -> SymmetricOperator:
    """Rotation given per-axis angles (theta_x, theta_y, theta_z)."""
    turns = np.asarray(turns, dtype=float).reshape(3)
    sx, sy, sz = _spin_triple(space)
    s = conventions.exponent_sign
    if conventions.rotation_composition == "combined":
        gen = SymmetricOperator(
            space, turns[0] * sx.matrix + turns[1] * sy.matrix + turns[2] * sz.matrix,
            hermitian=True)
        return hermitian_exp(gen, s * 1j)
    rx = hermitian_exp(sx, s * 1j * turns[0])
    ry = hermitian_exp(sy, s * 1j * turns[1])
    rz = hermitian_exp(sz, s * 1j * turns[2])
    return rz @ ry @ rx  # x rotation acts first


def _single_squeeze(space: DickeSpace, which: int, strength: float, sign: int) -> np.ndarray:
    w, v = _squeeze_eigs(space)[which]
    return (v * np.exp(sign * 1j * strength * w)) @ v.conj().T


def squeeze_x_unitary(space: DickeSpace, alpha: float,
                      conventions: GateConventions = DEFAULT_CONVENTIONS) -> SymmetricOperator:
    """exp(sign * i * alpha * S_x^2)."""
    return SymmetricOperator(space, _single_squeeze(space, 0, alpha, conventions.exponent_sign))


def squeeze_y_unitary(space: DickeSpace, beta: float,
                      conventions: GateConventions = DEFAULT_CONVENTIONS) -> SymmetricOperator:
    """exp(sign * i * beta * S_y^2)."""
    return SymmetricOperator(space, _single_squeeze(space, 1, beta, conventions.exponent_sign))


def squeeze_pair_unitary(space: DickeSpace, alpha: float, beta: float,
                         conventions: GateConventions = DEFAULT_CONVENTIONS) -> SymmetricOperator:
    """The full squeezing part of one step, composition per conventions."""
    s = conventions.exponent_sign
    if conventions.squeeze_composition == "combined":
        sx, sy, _ = _spin_triple(space)
        gen = SymmetricOperator(
            space, alpha * (sx.matrix @ sx.matrix) + beta * (sy.matrix @ sy.matrix),
            hermitian=True)
        return hermitian_exp(gen, s * 1j)
    ux = _single_squeeze(space, 0, alpha, s)
    uy = _single_squeeze(space, 1, beta, s)
    mat = uy @ ux if conventions.squeeze_order == "xy" else ux @ uy
    return SymmetricOperator(space, mat)


def step_unitary(step: PulseStep, space: DickeSpace,
                 conventions: GateConventions = DEFAULT_CONVENTIONS) -> SymmetricOperator:
    """Rotation first, then squeezing: U = U_squeeze @ U_rot."""
    rot = rotation_unitary(space, step.axis, step.theta, conventions)
    sq = squeeze_pair_unitary(space, step.alpha, step.beta, conventions)
    return sq @ rot


def sequence_unitaries(seq: PulseSequence,
                       conventions: GateConventions = DEFAULT_CONVENTIONS) -> list:
    """Per-step unitaries followed by the final rotation, in application order."""
    out = [step_unitary(st, seq.space, conventions) for st in seq.steps]
    out.append(rotation_unitary(seq.space, seq.final_axis, seq.final_theta, conventions))
    return out


def apply_sequence(seq: PulseSequence, initial: QuantumState,
                   conventions: GateConventions = DEFAULT_CONVENTIONS) -> QuantumState:
    """final_rotation . step_M . ... . step_1 applied to the initial state."""
    _check_same_space(seq.space, initial.space)
    state = initial
    for u in sequence_unitaries(seq, conventions):
        state = apply(u, state)
    return state


def flatten_params(seq: PulseSequence) -> np.ndarray:
    """Optimizer-facing vector: (theta_x, theta_y, theta_z, alpha, beta) per
    step, then the three final per-axis angles.  Length 5*M + 3."""
    chunks = []
    for st in seq.steps:
        chunks.append(st.turns)
        chunks.append([st.alpha, st.beta])
    chunks.append(np.asarray(seq.final_axis) * seq.final_theta)
    return np.concatenate(chunks) if chunks else np.zeros(3)


def _axis_angle(turns: np.ndarray) -> Tuple[Tuple[float, float, float], float]:
    theta = float(np.linalg.norm(turns))
    if theta == 0.0:
        return (0.0, 0.0, 1.0), 0.0
    vec = turns / theta
    return (float(vec[0]), float(vec[1]), float(vec[2])), theta


def unflatten_params(space: DickeSpace, n_steps: int, vec) -> PulseSequence:
    """Inverse of :func:`flatten_params` (up to the axis-angle sign gauge,
    which leaves every unitary unchanged)."""
    vec = np.asarray(vec, dtype=float).reshape(-1)
    expected = 5 * n_steps + 3
    if vec.shape[0] != expected:
        raise ValueError(f"parameter vector length {vec.shape[0]}, expected {expected}")
    steps = []
    for i in range(n_steps):
        part = vec[5 * i:5 * i + 5]
        axis, theta = _axis_angle(part[:3])
        steps.append(PulseStep(axis, theta, float(part[3]), float(part[4])))
    axis, theta = _axis_angle(vec[-3:])
    return PulseSequence(space, tuple(steps), axis, theta)
