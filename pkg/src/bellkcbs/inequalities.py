"""Correlators, the CHSH and KCBS functionals, and region classification."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import StructuralError
from .quantum import QuantumModel, joint_observable
from .scenario import CHSH_PAIR, CHSH_SINGLETON, PENTAGON, Behavior, MarginalBehavior, marginalize_bob

ALPHA_BOUND = 2.0
BETA_BOUND = 3.0
RANGE_TOL = 1e-9

CHSH_LABELS = ("A0B0", "A1B0", "A0B2B3", "A1B2B3")
KCBS_LABELS = ("B0B1", "B1B2", "B2B3", "B3B4", "B4B0")
LABELS = CHSH_LABELS + KCBS_LABELS

NEITHER = "neither"
CONTEXTUAL_ONLY = "contextual-only"
NONLOCAL_ONLY = "nonlocal-only"
BOTH = "both"


def parse_label(label: str) -> tuple[int | None, tuple[int, ...]]:
    """'A1B2B3' -> (1, (2, 3)); 'B4B0' -> (None, (4, 0))."""
    x = None
    rest = label
    if rest.startswith("A"):
        x, rest = int(rest[1]), rest[2:]
    parts = rest.split("B")[1:]
    if not parts or not all(p.isdigit() for p in parts):
        raise StructuralError(f"bad correlator label {label!r}")
    return x, tuple(int(p) for p in parts)


def make_label(x: int | None, ctx) -> str:
    return ("" if x is None else f"A{x}") + "".join(f"B{y}" for y in ctx)


@dataclass(frozen=True)
class CorrelatorSet:
    """Expectation values of outcome products.

    ``ab[(x, y)]`` = <A_x B_y>, ``abb[(x, y, y')]`` = <A_x B_y B_y'>,
    ``bb[(y, y')]`` = <B_y B_y'>.
    """

    ab: dict = field(default_factory=dict)
    abb: dict = field(default_factory=dict)
    bb: dict = field(default_factory=dict)

    def __post_init__(self):
        for group in (self.ab, self.abb, self.bb):
            for k, v in group.items():
                if not -1 - RANGE_TOL <= v <= 1 + RANGE_TOL:
                    raise StructuralError(f"correlator {k} = {v} outside [-1, 1]")

    def get(self, label: str) -> float:
        x, ctx = parse_label(label)
        if x is None:
            group, key = self.bb, ctx
        elif len(ctx) == 1:
            group, key = self.ab, (x, ctx[0])
        else:
            group, key = self.abb, (x,) + ctx
        try:
            return group[key]
        except KeyError:
            raise StructuralError(f"missing correlator {label}") from None

    def as_labels(self) -> dict[str, float]:
        out = {}
        for (x, y), v in self.ab.items():
            out[make_label(x, (y,))] = v
        for (x, *ctx), v in self.abb.items():
            out[make_label(x, ctx)] = v
        for ctx, v in self.bb.items():
            out[make_label(None, ctx)] = v
        return out

    @classmethod
    def from_labels(cls, values: dict[str, float]) -> "CorrelatorSet":
        ab, abb, bb = {}, {}, {}
        for label, v in values.items():
            x, ctx = parse_label(label)
            if x is None:
                bb[ctx] = float(v)
            elif len(ctx) == 1:
                ab[(x, ctx[0])] = float(v)
            else:
                abb[(x,) + ctx] = float(v)
        return cls(ab, abb, bb)


@lru_cache(maxsize=None)
def sign_tensor(arity: int) -> np.ndarray:
    """Product of outcomes for every cell of a table with ``arity`` axes."""
    s = np.array([-1.0, 1.0])
    out = np.ones(())
    for _ in range(arity):
        out = np.multiply.outer(out, s)
    return out


def signed_sum(table: np.ndarray) -> float:
    """Sum over cells of (product of outcomes) * probability."""
    return float(np.sum(sign_tensor(table.ndim) * table))


def correlators_from_behavior(behavior: Behavior, marginal: MarginalBehavior | None = None) -> CorrelatorSet:
    """Correlators of every table present.

    Alice-Bob terms come from the joint tables; Bob-Bob terms from the
    marginal, which defaults to ``marginalize_bob(behavior)``.
    """
    if marginal is None:
        marginal = marginalize_bob(behavior)
    xs = sorted({x for x, _ in behavior.contexts})
    for x in xs or (0, 1):
        for ctx in (CHSH_SINGLETON, CHSH_PAIR):
            if (x, ctx) not in behavior:
                raise StructuralError(f"behavior lacks context {(x, ctx)}")
    for ctx in PENTAGON:
        if ctx not in marginal:
            raise StructuralError(f"marginal lacks pentagon context {ctx}")
    ab, abb, bb = {}, {}, {}
    for (x, ctx), table in behavior.tables.items():
        if len(ctx) == 1:
            ab[(x, ctx[0])] = signed_sum(table)
        else:
            abb[(x,) + ctx] = signed_sum(table)
    for ctx, table in marginal.tables.items():
        if len(ctx) == 2:
            bb[ctx] = signed_sum(table)
    return CorrelatorSet(ab, abb, bb)


def quantum_correlators(model: QuantumModel) -> CorrelatorSet:
    """The nine correlators straight from operator expectations."""
    ab = {(x, 0): model.expect(x, CHSH_SINGLETON) for x in (0, 1)}
    abb = {(x,) + CHSH_PAIR: model.expect(x, CHSH_PAIR) for x in (0, 1)}
    bb = {ctx: model.expect(None, ctx) for ctx in PENTAGON}
    return CorrelatorSet(ab, abb, bb)


def alpha_chsh(c: CorrelatorSet) -> float:
    try:
        return c.ab[(0, 0)] + c.abb[(0, 2, 3)] + c.ab[(1, 0)] - c.abb[(1, 2, 3)]
    except KeyError as exc:
        raise StructuralError(f"missing CHSH correlator {exc.args[0]}") from None


def beta_kcbs(c: CorrelatorSet) -> float:
    try:
        return c.bb[(0, 1)] + c.bb[(1, 2)] + c.bb[(2, 3)] + c.bb[(3, 4)] - c.bb[(4, 0)]
    except KeyError as exc:
        raise StructuralError(f"missing KCBS correlator {exc.args[0]}") from None


@lru_cache(maxsize=None)
def functional_operators() -> tuple[np.ndarray, np.ndarray]:
    """Hermitian operators whose expectations are alpha and beta."""
    alpha = (joint_observable(0, CHSH_SINGLETON) + joint_observable(0, CHSH_PAIR)
             + joint_observable(1, CHSH_SINGLETON) - joint_observable(1, CHSH_PAIR))
    beta = sum(joint_observable(None, c) for c in PENTAGON[:4]) - joint_observable(None, PENTAGON[4])
    alpha.setflags(write=False)
    beta.setflags(write=False)
    return alpha, beta


def alpha_beta(model: QuantumModel) -> tuple[float, float]:
    """(alpha, beta) from two operator expectations; the fast path for scans."""
    a_op, b_op = functional_operators()
    psi = model.state
    return float(np.vdot(psi, a_op @ psi).real), float(np.vdot(psi, b_op @ psi).real)


@dataclass(frozen=True)
class InequalityResult:
    alpha: float
    beta: float
    region: str
    alpha_bound: float = ALPHA_BOUND
    beta_bound: float = BETA_BOUND

    @property
    def nonlocal_(self) -> bool:
        return self.alpha > self.alpha_bound

    @property
    def contextual(self) -> bool:
        return self.beta > self.beta_bound


def region_of(alpha: float, beta: float) -> str:
    # equality with a bound does not count as a violation
    nl = alpha > ALPHA_BOUND
    ctx = beta > BETA_BOUND
    if nl and ctx:
        return BOTH
    if nl:
        return NONLOCAL_ONLY
    if ctx:
        return CONTEXTUAL_ONLY
    return NEITHER


def classify(alpha: float, beta: float) -> InequalityResult:
    return InequalityResult(float(alpha), float(beta), region_of(alpha, beta))


def evaluate(model: QuantumModel) -> InequalityResult:
    """Classify a model through its full behavior (the slow, table-based route)."""
    c = correlators_from_behavior(model.behavior())
    return classify(alpha_chsh(c), beta_kcbs(c))
