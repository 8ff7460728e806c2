"""Qubit-qutrit states, observables and Born-rule probabilities.

The composite space is ordered qubit-major: basis index ``3*q + t`` for
qubit level ``q`` and qutrit level ``t``.  All operators are built from
closed forms; nothing here diagonalizes a matrix.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

from .errors import DomainError, NumericError, StructuralError
from .scenario import Behavior, Context, JointContext, Scenario, mix_behaviors, outcome_index, outcome_tuples

THETA_U = 2.868
THETA_V = 1.449

IMAG_TOL = 1e-9
COMMUTE_TOL = 1e-10

SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
I2 = np.eye(2, dtype=complex)
I3 = np.eye(3, dtype=complex)


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@lru_cache(maxsize=None)
def alice_observable(x: int) -> np.ndarray:
    if x == 0:
        return _readonly(SIGMA_Z.copy())
    if x == 1:
        return _readonly(SIGMA_X.copy())
    raise DomainError(f"Alice setting must be 0 or 1, got {x!r}")


def _check_bob_label(j) -> None:
    if j not in (0, 1, 2, 3, 4):
        raise DomainError(f"Bob setting must be in 0..4, got {j!r}")


@lru_cache(maxsize=None)
def kcbs_vector(j: int) -> np.ndarray:
    """Unit vector whose projector defines Bob's j-th observable.

    Consecutive vectors (cyclically) are orthogonal.
    """
    _check_bob_label(j)
    angle = 4 * np.pi * j / 5
    c = 1 / np.sqrt(1 + np.cos(np.pi / 5))
    v = c * np.array([np.cos(angle), np.sin(angle), np.sqrt(np.cos(np.pi / 5))], dtype=complex)
    return _readonly(v)


@lru_cache(maxsize=None)
def _kcbs_projector(j: int) -> np.ndarray:
    v = kcbs_vector(j)
    return _readonly(np.outer(v, v.conj()))


@lru_cache(maxsize=None)
def bob_observable(j: int) -> np.ndarray:
    """(-1)**j * (1 - 2|v_j><v_j|); v_j carries the nondegenerate eigenvalue (-1)**(j+1)."""
    _check_bob_label(j)
    return _readonly((-1) ** j * (I3 - 2 * _kcbs_projector(j)))


@lru_cache(maxsize=None)
def alice_projectors(x: int) -> tuple[np.ndarray, np.ndarray]:
    """(minus, plus) spectral projectors of A_x, indexed like outcomes."""
    a = alice_observable(x)
    return _readonly((I2 - a) / 2), _readonly((I2 + a) / 2)


@lru_cache(maxsize=None)
def bob_projectors(j: int) -> tuple[np.ndarray, np.ndarray]:
    """(minus, plus) spectral projectors of B_j, from the rank-one piece |v_j><v_j|."""
    p = _kcbs_projector(j)
    rest = _readonly(I3 - p)
    # |v_j> has eigenvalue -1 for even j, +1 for odd j
    if j % 2 == 0:
        return p, rest
    return rest, p


def is_hermitian(op: np.ndarray, tol: float = 1e-12) -> bool:
    return op.shape[0] == op.shape[1] and np.max(np.abs(op - op.conj().T)) <= tol


def commutator_norm(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.linalg.norm(a @ b - b @ a))


def product_ket(qubit_angle: float, qutrit_level: int) -> np.ndarray:
    """[cos t |0> + sin t |1>] (x) |level>."""
    ket = np.zeros(6, dtype=complex)
    ket[qutrit_level] = np.cos(qubit_angle)
    ket[3 + qutrit_level] = np.sin(qubit_angle)
    return ket


def state_psi(phi: float, theta_u: float = THETA_U, theta_v: float = THETA_V) -> np.ndarray:
    """cos(phi)|u> + sin(phi)|v> with |u> ending in qutrit |2> and |v> in qutrit |0>."""
    u = product_ket(theta_u, 2)
    v = product_ket(theta_v, 0)
    return np.cos(phi) * u + np.sin(phi) * v


def expectation(ket: np.ndarray, op: np.ndarray) -> float:
    ket = np.asarray(ket)
    if op.shape != (ket.size, ket.size):
        raise StructuralError(f"operator of shape {op.shape} does not act on a {ket.size}-dimensional ket")
    val = np.vdot(ket, op @ ket)
    if abs(val.imag) > IMAG_TOL:
        raise NumericError(f"expectation has imaginary part {val.imag:.3g}")
    return float(val.real)


def bob_product(ctx: Context) -> np.ndarray:
    """Product of Bob's observables over a context (the compound observable)."""
    out = I3
    for y in ctx:
        out = out @ bob_observable(y)
    return out


def joint_observable(x: int | None, ctx: Context) -> np.ndarray:
    """A_x (x) prod B_y, with the qubit identity when ``x`` is None."""
    a = I2 if x is None else alice_observable(x)
    return np.kron(a, bob_product(ctx))


def _check_commuting(ctx: Context) -> None:
    for i, y in enumerate(ctx):
        for yp in ctx[i + 1:]:
            if commutator_norm(bob_observable(y), bob_observable(yp)) > COMMUTE_TOL:
                raise DomainError(f"B_{y} and B_{yp} do not commute; {ctx} is not a context")


@lru_cache(maxsize=None)
def _cell_operators(x: int, ctx: Context) -> np.ndarray:
    """Stack of Pi^x_a (x) Pi^y_b Pi^y'_b' over all cells, in table order."""
    _check_commuting(ctx)
    cells = []
    for a in (-1, 1):
        pa = alice_projectors(x)[outcome_index(a)]
        for bs in outcome_tuples(len(ctx)):
            pb = I3
            for y, b in zip(ctx, bs):
                pb = pb @ bob_projectors(y)[outcome_index(b)]
            cells.append(np.kron(pa, pb))
    return _readonly(np.stack(cells))


@lru_cache(maxsize=8)
def _scenario_operators(scenario: Scenario) -> tuple[np.ndarray, tuple[tuple[JointContext, int, int], ...]]:
    """Every cell operator of the scenario in one stack, with each context's slice."""
    blocks, spans, start = [], [], 0
    for x, ctx in scenario.joint_contexts:
        ops = _cell_operators(x, ctx)
        blocks.append(ops)
        spans.append(((x, ctx), start, start + len(ops)))
        start += len(ops)
    return _readonly(np.concatenate(blocks)), tuple(spans)


def behavior_of_ket(ket: np.ndarray, scenario: Scenario | None = None) -> Behavior:
    scenario = scenario or Scenario.default()
    ket = np.asarray(ket, dtype=complex)
    ops, spans = _scenario_operators(scenario)
    probs = (ops @ ket) @ ket.conj()
    tables = {}
    for (x, ctx), lo, hi in spans:
        cell = probs[lo:hi]
        if np.max(np.abs(cell.imag)) > IMAG_TOL:
            raise NumericError(f"complex probability in context {(x, ctx)}")
        tables[(x, ctx)] = cell.real.reshape((2,) * (1 + len(ctx)))
    return Behavior(tables)


@dataclass(frozen=True)
class QuantumModel:
    """One member of the state family together with the fixed measurements."""

    phi: float
    theta_u: float = THETA_U
    theta_v: float = THETA_V

    def __post_init__(self):
        for name in ("phi", "theta_u", "theta_v"):
            if not np.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite")

    @cached_property
    def state(self) -> np.ndarray:
        return _readonly(state_psi(self.phi, self.theta_u, self.theta_v))

    def expect(self, x: int | None, ctx: Context) -> float:
        return expectation(self.state, joint_observable(x, ctx))

    def behavior(self, scenario: Scenario | None = None) -> Behavior:
        return behavior_of_ket(self.state, scenario)


def quantum_behavior(model: QuantumModel, scenario: Scenario | None = None) -> Behavior:
    return model.behavior(scenario)


def maximally_mixed_behavior(scenario: Scenario | None = None) -> Behavior:
    """Behavior of the maximally mixed two-party state, as an average over the product basis."""
    kets = [np.eye(6, dtype=complex)[k] for k in range(6)]
    return mix_behaviors([behavior_of_ket(k, scenario) for k in kets])
