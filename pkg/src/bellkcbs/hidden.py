"""Deterministic hidden-variable strategies and exhaustive classical bounds.

Local strategies give Alice one outcome per setting and Bob one outcome
tuple per *context*, so the same B_y may answer differently in different
contexts.  Noncontextual strategies give each of Bob's measurements a single
value.  All functionals are evaluated with integer correlators, so the
maxima are exact.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence, Union

import numpy as np

from .errors import StructuralError
from .inequalities import CorrelatorSet, alpha_chsh, beta_kcbs
from .scenario import (
    OUTCOMES,
    Behavior,
    Context,
    MarginalBehavior,
    Scenario,
    outcome_index,
)


@dataclass(frozen=True)
class LocalDeterministicStrategy:
    alice: tuple[int, ...]
    bob: tuple[tuple[Context, tuple[int, ...]], ...]

    def bob_outcomes(self, ctx: Context) -> tuple[int, ...]:
        for c, out in self.bob:
            if c == ctx:
                return out
        raise StructuralError(f"strategy assigns nothing to context {ctx}")


@dataclass(frozen=True)
class NoncontextualStrategy:
    bob: tuple[int, ...]

    def bob_outcomes(self, ctx: Context) -> tuple[int, ...]:
        return tuple(self.bob[y] for y in ctx)


Strategy = Union[LocalDeterministicStrategy, NoncontextualStrategy]


def enumerate_local_vertices(
    scenario: Scenario | None = None, singleton_consistent: bool = False
) -> list[LocalDeterministicStrategy]:
    """All local deterministic strategies, Alice's assignment varying slowest.

    With ``singleton_consistent`` a singleton context must repeat the value
    its measurement takes in the first pair context containing it.
    """
    scenario = scenario or Scenario.default()
    contexts = scenario.bob_contexts
    alice_choices = list(itertools.product(OUTCOMES, repeat=len(scenario.alice_settings)))
    free = [c for c in contexts if not (singleton_consistent and len(c) == 1)]
    out = []
    for alice in alice_choices:
        for combo in itertools.product(*(itertools.product(OUTCOMES, repeat=len(c)) for c in free)):
            assigned = dict(zip(free, combo))
            if singleton_consistent:
                for c in contexts:
                    if len(c) == 1:
                        host = next(p for p in free if c[0] in p)
                        assigned[c] = (assigned[host][host.index(c[0])],)
            out.append(LocalDeterministicStrategy(alice, tuple((c, assigned[c]) for c in contexts)))
    return out


def enumerate_noncontextual_vertices(scenario: Scenario | None = None) -> list[NoncontextualStrategy]:
    scenario = scenario or Scenario.default()
    return [NoncontextualStrategy(b) for b in itertools.product(OUTCOMES, repeat=len(scenario.bob_settings))]


def enumerate_product_vertices(scenario: Scenario | None = None) -> list[LocalDeterministicStrategy]:
    """Local strategies whose Bob part is noncontextual (4 x 32 = 128 by default)."""
    scenario = scenario or Scenario.default()
    out = []
    for alice in itertools.product(OUTCOMES, repeat=len(scenario.alice_settings)):
        for nc in enumerate_noncontextual_vertices(scenario):
            bob = tuple((c, nc.bob_outcomes(c)) for c in scenario.bob_contexts)
            out.append(LocalDeterministicStrategy(alice, bob))
    return out


def strategy_correlators(strategy: Strategy) -> CorrelatorSet:
    """Integer correlators of a deterministic strategy."""
    if isinstance(strategy, NoncontextualStrategy):
        bb = {}
        n = len(strategy.bob)
        for y in range(n):
            ctx = (y, (y + 1) % n)
            bb[ctx] = math.prod(strategy.bob_outcomes(ctx))
        return CorrelatorSet(bb=bb)
    ab, abb, bb = {}, {}, {}
    for ctx, outs in strategy.bob:
        prod = math.prod(outs)
        if len(ctx) == 2:
            bb[ctx] = prod
        for x, a in enumerate(strategy.alice):
            if len(ctx) == 1:
                ab[(x, ctx[0])] = a * prod
            else:
                abb[(x,) + ctx] = a * prod
    return CorrelatorSet(ab, abb, bb)


def max_functional(
    vertices: Sequence[Strategy], functional: Callable[[CorrelatorSet], float]
) -> tuple[float, Strategy]:
    """Exhaustive maximum; ties go to the earliest vertex."""
    if not vertices:
        raise ValueError("empty vertex list")
    best, arg = None, None
    for v in vertices:
        val = functional(strategy_correlators(v))
        if best is None or val > best:
            best, arg = val, v
    return best, arg


def max_functional_local(vertices: Sequence[LocalDeterministicStrategy], functional=alpha_chsh):
    return max_functional(vertices, functional)


def max_functional_noncontextual(vertices: Sequence[NoncontextualStrategy], functional=beta_kcbs):
    return max_functional(vertices, functional)


def _one_hot(outcomes: Iterable[int]) -> np.ndarray:
    outcomes = tuple(outcomes)
    t = np.zeros((2,) * len(outcomes))
    t[tuple(outcome_index(o) for o in outcomes)] = 1.0
    return t


def strategy_to_behavior(strategy: Strategy, scenario: Scenario | None = None) -> Behavior | MarginalBehavior:
    """Deterministic probability tables: one cell per context holds 1."""
    scenario = scenario or Scenario.default()
    if isinstance(strategy, NoncontextualStrategy):
        return MarginalBehavior({c: _one_hot(strategy.bob_outcomes(c)) for c in scenario.bob_contexts})
    return Behavior({
        (x, c): _one_hot((strategy.alice[x],) + strategy.bob_outcomes(c))
        for x, c in scenario.joint_contexts
    })


def strategy_as_dict(strategy: Strategy) -> dict:
    if isinstance(strategy, NoncontextualStrategy):
        return {"bob": {f"B{y}": b for y, b in enumerate(strategy.bob)}}
    return {
        "alice": {f"A{x}": a for x, a in enumerate(strategy.alice)},
        "bob": {"".join(f"B{y}" for y in c): list(out) for c, out in strategy.bob},
    }


def classical_bounds(scenario: Scenario | None = None) -> dict:
    """The bound certificates reported by the ``bounds`` command."""
    local = enumerate_local_vertices(scenario)
    consistent = enumerate_local_vertices(scenario, singleton_consistent=True)
    nc = enumerate_noncontextual_vertices(scenario)
    product = enumerate_product_vertices(scenario)
    a_loc, a_arg = max_functional_local(local, alpha_chsh)
    a_con, _ = max_functional_local(consistent, alpha_chsh)
    b_loc, b_loc_arg = max_functional_local(local, beta_kcbs)
    b_nc, b_arg = max_functional_noncontextual(nc, beta_kcbs)
    b_nc_min, b_min_arg = max_functional_noncontextual(nc, lambda c: -beta_kcbs(c))
    a_prod, _ = max_functional_local(product, alpha_chsh)
    s_prod, _ = max_functional_local(product, lambda c: alpha_chsh(c) + beta_kcbs(c))
    return {
        "n_local": len(local),
        "n_local_singleton_consistent": len(consistent),
        "n_noncontextual": len(nc),
        "n_product": len(product),
        "max_alpha_local": a_loc,
        "argmax_alpha_local": strategy_as_dict(a_arg),
        "max_alpha_local_singleton_consistent": a_con,
        "max_beta_local": b_loc,
        "argmax_beta_local": strategy_as_dict(b_loc_arg),
        "max_beta_noncontextual": b_nc,
        "argmax_beta_noncontextual": strategy_as_dict(b_arg),
        "min_beta_noncontextual": -b_nc_min,
        "argmin_beta_noncontextual": strategy_as_dict(b_min_arg),
        "max_alpha_product": a_prod,
        "max_alpha_plus_beta_product": s_prod,
    }
