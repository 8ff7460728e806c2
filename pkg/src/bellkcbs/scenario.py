"""Measurement scenario, behaviors and their consistency checks.

Outcomes are always the pair (-1, +1).  Probability tables are numpy arrays
with one axis per measurement in the context; index 0 stands for outcome -1
and index 1 for outcome +1.  A joint table for Alice setting ``x`` and Bob
context ``(y, y')`` therefore has shape ``(2, 2, 2)`` with axes ``(a, b, b')``.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import StructuralError

Context = tuple[int, ...]
JointContext = tuple[int, Context]

OUTCOMES = (-1, 1)
PENTAGON: tuple[Context, ...] = ((0, 1), (1, 2), (2, 3), (3, 4), (4, 0))
CHSH_SINGLETON: Context = (0,)
CHSH_PAIR: Context = (2, 3)

DEFAULT_TOL = 1e-10
NORMALIZATION_TOL = 1e-9


def outcome_index(o: int) -> int:
    return (o + 1) // 2


def outcome_tuples(arity: int) -> list[tuple[int, ...]]:
    """All outcome tuples of the given arity, -1 before +1, lexicographic."""
    return list(itertools.product(OUTCOMES, repeat=arity))


@dataclass(frozen=True)
class Scenario:
    """Settings and contexts of the two-party experiment.

    ``bob_contexts`` lists the compatible groups of Bob's measurements.  Pair
    contexts must join cyclically adjacent labels, so the default pentagon
    ``(0,1),(1,2),(2,3),(3,4),(4,0)`` is the compatibility graph of the five
    KCBS observables.  ``joint_contexts`` lists the ``(x, bob_context)``
    combinations for which a joint table exists.
    """

    alice_settings: tuple[int, ...] = (0, 1)
    bob_settings: tuple[int, ...] = (0, 1, 2, 3, 4)
    bob_contexts: tuple[Context, ...] = PENTAGON + (CHSH_SINGLETON,)
    joint_contexts: tuple[JointContext, ...] = ()
    alice_outcomes: tuple[int, ...] = OUTCOMES
    bob_outcomes: tuple[int, ...] = OUTCOMES

    def __post_init__(self):
        if not self.joint_contexts:
            joint = tuple((x, c) for x in self.alice_settings for c in self.bob_contexts)
            object.__setattr__(self, "joint_contexts", joint)
        m = len(self.bob_settings)
        for ctx in self.bob_contexts:
            if len(set(ctx)) != len(ctx):
                raise StructuralError(f"context {ctx} repeats a measurement")
            for y in ctx:
                if y not in self.bob_settings:
                    raise StructuralError(f"context {ctx} uses unknown Bob setting {y}")
            if len(ctx) == 2:
                i, j = (self.bob_settings.index(y) for y in ctx)
                if (i - j) % m not in (1, m - 1):
                    raise StructuralError(f"context {ctx} does not join adjacent pentagon vertices")
            if len(ctx) > 2:
                raise StructuralError(f"context {ctx} has more than two measurements")
        for x, ctx in self.joint_contexts:
            if x not in self.alice_settings:
                raise StructuralError(f"unknown Alice setting {x}")
            if ctx not in self.bob_contexts:
                raise StructuralError(f"joint context uses undeclared Bob context {ctx}")

    @classmethod
    def default(cls) -> "Scenario":
        """Every Alice setting paired with every Bob context (12 joint contexts)."""
        return cls()

    @classmethod
    def experimental(cls) -> "Scenario":
        """Only the Alice-Bob pairings that enter the CHSH functional."""
        return cls(
            joint_contexts=(
                (0, CHSH_SINGLETON),
                (1, CHSH_SINGLETON),
                (0, CHSH_PAIR),
                (1, CHSH_PAIR),
            )
        )

    @property
    def pair_contexts(self) -> tuple[Context, ...]:
        return tuple(c for c in self.bob_contexts if len(c) == 2)


def _freeze(table) -> np.ndarray:
    arr = np.array(table, dtype=float)
    arr.setflags(write=False)
    return arr


def _check_table(key, arr: np.ndarray, arity: int, tol: float) -> None:
    if arr.shape != (2,) * arity:
        raise StructuralError(f"table {key} has shape {arr.shape}, expected {(2,) * arity}")
    if arr.min() < -tol:
        raise StructuralError(f"table {key} has negative entries")
    total = arr.sum()
    if abs(total - 1.0) > tol:
        raise StructuralError(f"table {key} sums to {total:.15g}")


@dataclass(frozen=True)
class Behavior:
    """Joint probabilities p(a, b | x, y) keyed by ``(x, bob_context)``."""

    tables: Mapping[JointContext, np.ndarray]

    def __post_init__(self):
        frozen = {}
        for key, table in self.tables.items():
            x, ctx = key
            key = (int(x), tuple(int(y) for y in ctx))
            arr = _freeze(table)
            _check_table(key, arr, 1 + len(ctx), NORMALIZATION_TOL)
            frozen[key] = arr
        object.__setattr__(self, "tables", frozen)

    def __getitem__(self, key: JointContext) -> np.ndarray:
        try:
            return self.tables[key]
        except KeyError:
            raise StructuralError(f"behavior has no context {key}") from None

    def __contains__(self, key) -> bool:
        return key in self.tables

    @property
    def contexts(self) -> list[JointContext]:
        return list(self.tables)

    @property
    def normalization_error(self) -> float:
        return max(abs(t.sum() - 1.0) for t in self.tables.values())


@dataclass(frozen=True)
class MarginalBehavior:
    """Bob's probabilities p(b | y) per Bob context.

    ``spread`` holds, for marginals obtained from a joint behavior, the
    largest cross-``x`` difference seen for each context.
    """

    tables: Mapping[Context, np.ndarray]
    spread: Mapping[Context, float] = field(default_factory=dict)

    def __post_init__(self):
        frozen = {}
        for ctx, table in self.tables.items():
            ctx = tuple(int(y) for y in ctx)
            arr = _freeze(table)
            _check_table(ctx, arr, len(ctx), NORMALIZATION_TOL)
            frozen[ctx] = arr
        object.__setattr__(self, "tables", frozen)
        object.__setattr__(self, "spread", dict(self.spread))

    def __getitem__(self, ctx: Context) -> np.ndarray:
        try:
            return self.tables[ctx]
        except KeyError:
            raise StructuralError(f"marginal has no context {ctx}") from None

    def __contains__(self, ctx) -> bool:
        return ctx in self.tables

    @property
    def contexts(self) -> list[Context]:
        return list(self.tables)


@dataclass(frozen=True)
class ConsistencyReport:
    violations: tuple[tuple[str, float, float, float], ...] = ()

    @property
    def max_violation(self) -> float:
        return max((v[3] for v in self.violations), default=0.0)

    @property
    def ok(self) -> bool:
        return not self.violations


def uniform_behavior(scenario: Scenario) -> Behavior:
    return Behavior({
        (x, ctx): np.full((2,) * (1 + len(ctx)), 0.5 ** (1 + len(ctx)))
        for x, ctx in scenario.joint_contexts
    })


def mix_behaviors(behaviors: Sequence[Behavior], weights: Sequence[float] | None = None) -> Behavior:
    """Convex combination of behaviors defined on the same contexts."""
    if not behaviors:
        raise StructuralError("nothing to mix")
    if weights is None:
        weights = [1.0 / len(behaviors)] * len(behaviors)
    keys = behaviors[0].contexts
    for b in behaviors[1:]:
        if set(b.contexts) != set(keys):
            raise StructuralError("behaviors are defined on different contexts")
    return Behavior({k: sum(w * b[k] for w, b in zip(weights, behaviors)) for k in keys})


def marginalize_bob(behavior: Behavior) -> MarginalBehavior:
    """Sum out Alice's outcome and average the result over her settings."""
    grouped: dict[Context, list[np.ndarray]] = {}
    for (x, ctx), table in behavior.tables.items():
        grouped.setdefault(ctx, []).append(table.sum(axis=0))
    tables, spread = {}, {}
    for ctx, margs in grouped.items():
        if len(margs) == 1:
            tables[ctx], spread[ctx] = margs[0], 0.0
            continue
        stack = np.stack(margs)
        tables[ctx] = stack.mean(axis=0)
        spread[ctx] = float(np.max(stack.max(axis=0) - stack.min(axis=0)))
    return MarginalBehavior(tables, spread)


def single_marginal(table: np.ndarray, ctx: Context, y: int) -> np.ndarray:
    """p(b | y) read off a table over ``ctx``."""
    axis = ctx.index(y)
    other = tuple(i for i in range(len(ctx)) if i != axis)
    return table.sum(axis=other) if other else table


def check_no_signalling(behavior: Behavior, tol: float = DEFAULT_TOL) -> ConsistencyReport:
    violations = []
    by_ctx: dict[Context, list[int]] = {}
    by_x: dict[int, list[Context]] = {}
    for x, ctx in behavior.contexts:
        by_ctx.setdefault(ctx, []).append(x)
        by_x.setdefault(x, []).append(ctx)

    # Bob's marginal must not depend on Alice's setting.
    for ctx, xs in by_ctx.items():
        ref = behavior[(xs[0], ctx)].sum(axis=0)
        for x in xs[1:]:
            other = behavior[(x, ctx)].sum(axis=0)
            if np.max(np.abs(ref - other)) <= tol:
                continue
            for b in outcome_tuples(len(ctx)):
                idx = tuple(outcome_index(o) for o in b)
                d = abs(ref[idx] - other[idx])
                if d > tol:
                    cond = f"no-signalling B: ctx={ctx} b={b} x={xs[0]} vs x={x}"
                    violations.append((cond, float(ref[idx]), float(other[idx]), float(d)))

    # Alice's marginal must not depend on Bob's context.
    for x, ctxs in by_x.items():
        first = behavior[(x, ctxs[0])]
        ref = first.reshape(2, -1).sum(axis=1)
        for ctx in ctxs[1:]:
            other = behavior[(x, ctx)].reshape(2, -1).sum(axis=1)
            if np.max(np.abs(ref - other)) <= tol:
                continue
            for a in OUTCOMES:
                i = outcome_index(a)
                d = abs(ref[i] - other[i])
                if d > tol:
                    cond = f"no-signalling A: x={x} a={a} ctx={ctxs[0]} vs ctx={ctx}"
                    violations.append((cond, float(ref[i]), float(other[i]), float(d)))
    return ConsistencyReport(tuple(violations))


def check_no_disturbance(marginal: MarginalBehavior, tol: float = DEFAULT_TOL) -> ConsistencyReport:
    violations = []
    appearances: dict[int, list[Context]] = {}
    for ctx in marginal.contexts:
        for y in ctx:
            appearances.setdefault(y, []).append(ctx)
    for y, ctxs in sorted(appearances.items()):
        ref = single_marginal(marginal[ctxs[0]], ctxs[0], y)
        for ctx in ctxs[1:]:
            other = single_marginal(marginal[ctx], ctx, y)
            if np.max(np.abs(ref - other)) <= tol:
                continue
            for b in OUTCOMES:
                i = outcome_index(b)
                d = abs(ref[i] - other[i])
                if d > tol:
                    cond = f"no-disturbance: y={y} b={b} ctx={ctxs[0]} vs ctx={ctx}"
                    violations.append((cond, float(ref[i]), float(other[i]), float(d)))
    return ConsistencyReport(tuple(violations))


def disturbance_pairs(marginal: MarginalBehavior) -> dict[int, tuple[float, float]]:
    """(p_y, p_y') for each Bob measurement: p(b=+1) in its first and second pair context.

    Contexts are visited in the marginal's order, which for the default
    scenario is the pentagon order; the first appearance is unprimed.
    """
    appearances: dict[int, list[Context]] = {}
    for ctx in marginal.contexts:
        if len(ctx) < 2:
            continue
        for y in ctx:
            appearances.setdefault(y, []).append(ctx)
    if not appearances:
        raise StructuralError("marginal has no pair contexts")
    out = {}
    for y, ctxs in sorted(appearances.items()):
        if len(ctxs) != 2:
            raise StructuralError(f"measurement {y} appears in {len(ctxs)} pair contexts, need exactly 2")
        p, q = (single_marginal(marginal[c], c, y)[1] for c in ctxs)
        out[y] = (float(p), float(q))
    return out


def disturbance_distance(marginal: MarginalBehavior) -> float:
    """Sum over Bob's measurements of (p_y - p_y')**2."""
    return float(sum((p - q) ** 2 for p, q in disturbance_pairs(marginal).values()))


# -- serialization ----------------------------------------------------------

_KEY_RE = re.compile(r"^x(\d+)_ctx(\d+(?:_\d+)*)$")
_MKEY_RE = re.compile(r"^ctx(\d+(?:_\d+)*)$")


def context_key(x: int, ctx: Context) -> str:
    return f"x{x}_ctx" + "_".join(str(y) for y in ctx)


def behavior_to_json(behavior: Behavior) -> dict[str, list[float]]:
    """Flat probability lists in lexicographic outcome order (a first, -1 before +1)."""
    return {context_key(x, ctx): [float(p) for p in t.reshape(-1)] for (x, ctx), t in behavior.tables.items()}


def behavior_from_json(data: Mapping[str, Iterable[float]]) -> Behavior:
    tables = {}
    for key, values in data.items():
        m = _KEY_RE.match(key)
        if not m:
            raise StructuralError(f"bad behavior key {key!r}")
        ctx = tuple(int(y) for y in m.group(2).split("_"))
        arr = np.asarray(list(values), dtype=float)
        if arr.size != 2 ** (1 + len(ctx)):
            raise StructuralError(f"{key}: expected {2 ** (1 + len(ctx))} probabilities, got {arr.size}")
        tables[(int(m.group(1)), ctx)] = arr.reshape((2,) * (1 + len(ctx)))
    return Behavior(tables)


def marginal_to_json(marginal: MarginalBehavior) -> dict[str, list[float]]:
    return {"ctx" + "_".join(map(str, ctx)): [float(p) for p in t.reshape(-1)] for ctx, t in marginal.tables.items()}


def marginal_from_json(data: Mapping[str, Iterable[float]]) -> MarginalBehavior:
    tables = {}
    for key, values in data.items():
        m = _MKEY_RE.match(key)
        if not m:
            raise StructuralError(f"bad marginal key {key!r}")
        ctx = tuple(int(y) for y in m.group(1).split("_"))
        arr = np.asarray(list(values), dtype=float)
        if arr.size != 2 ** len(ctx):
            raise StructuralError(f"{key}: expected {2 ** len(ctx)} probabilities, got {arr.size}")
        tables[ctx] = arr.reshape((2,) * len(ctx))
    return MarginalBehavior(tables)
