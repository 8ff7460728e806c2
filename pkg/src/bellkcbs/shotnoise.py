"""Finite-count simulation of the experiment.

Each measured context is an independent multinomial draw with a fixed
total.  Per-correlator uncertainties come from a seeded multinomial
bootstrap of the observed frequencies; the uncertainty of alpha and beta is
the *linear* sum of their component uncertainties, which is how the
published error bars combine.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Sequence, Union

import numpy as np

from .errors import DomainError
from .inequalities import (
    CHSH_LABELS,
    KCBS_LABELS,
    CorrelatorSet,
    alpha_chsh,
    beta_kcbs,
    make_label,
    quantum_correlators,
    sign_tensor,
)
from .quantum import QuantumModel
from .scenario import (
    Behavior,
    Context,
    JointContext,
    MarginalBehavior,
    Scenario,
    disturbance_distance,
    marginalize_bob,
)

N_PER_SETTING = 5500
N_RESAMPLES = 1000
NORM_TOL = 1e-9

AnyContext = Union[JointContext, Context]


def _is_joint(ctx: AnyContext) -> bool:
    return len(ctx) == 2 and isinstance(ctx[1], tuple)


def _label(ctx: AnyContext) -> str:
    return make_label(ctx[0], ctx[1]) if _is_joint(ctx) else make_label(None, ctx)


@dataclass(frozen=True)
class CountTable:
    """Outcome counts for one measured context.

    ``context`` is ``(x, bob_context)`` for Alice-Bob tables and a bare Bob
    context for tables where Alice's outcome was summed out.
    """

    context: AnyContext
    counts: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.counts)
        if np.any(c < 0):
            raise DomainError("negative counts")
        c = c.astype(np.int64)
        c.setflags(write=False)
        object.__setattr__(self, "counts", c)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def label(self) -> str:
        return _label(self.context)


def _pvals(table: np.ndarray) -> np.ndarray:
    p = np.asarray(table, dtype=float).ravel()
    if np.any(p < -NORM_TOL) or abs(p.sum() - 1) > NORM_TOL:
        raise DomainError("probability table is not normalized")
    p = np.clip(p, 0.0, None)
    return p / p.sum()


def sample_counts(table: np.ndarray, n: int, seed=None, context: AnyContext = ()) -> CountTable:
    """One multinomial draw of ``n`` events from ``table``; deterministic given ``seed``."""
    if n <= 0:
        raise DomainError("number of counts must be positive")
    rng = np.random.default_rng(seed)
    table = np.asarray(table)
    counts = rng.multinomial(n, _pvals(table)).reshape(table.shape)
    return CountTable(context, counts)


@dataclass(frozen=True)
class Estimate:
    behavior: Behavior | None
    marginal: MarginalBehavior
    correlators: CorrelatorSet
    sigma: dict
    n_resamples: int
    distance: float | None = None
    distance_sigma: float | None = None
    resampled: dict = field(default_factory=dict, repr=False)


def estimate_from_counts(
    tables: Sequence[CountTable], n_resamples: int = N_RESAMPLES, seed: int = 0
) -> Estimate:
    """Frequencies, correlators and bootstrap uncertainties from count tables."""
    joint, bob = {}, {}
    values, sigma, resampled = {}, {}, {}
    boot_tables = {}
    for i, ct in enumerate(tables):
        if ct.total <= 0:
            raise DomainError(f"context {ct.context} has no counts")
        freq = ct.counts / ct.total
        (joint if _is_joint(ct.context) else bob)[ct.context] = freq
        rng = np.random.default_rng([seed, i])
        boot = rng.multinomial(ct.total, freq.ravel(), size=n_resamples) / ct.total
        boot = boot.reshape((n_resamples,) + freq.shape)
        signs = sign_tensor(freq.ndim)
        samples = np.sum(boot * signs, axis=tuple(range(1, boot.ndim)))
        values[ct.label] = float(np.sum(freq * signs))
        sigma[ct.label] = float(samples.std(ddof=1)) if n_resamples > 1 else 0.0
        resampled[ct.label] = samples
        if not _is_joint(ct.context):
            boot_tables[ct.context] = boot

    behavior = Behavior(joint) if joint else None
    if bob:
        marginal = MarginalBehavior(bob)
    elif behavior is not None:
        marginal = marginalize_bob(behavior)
    else:
        raise DomainError("no count tables given")
    # Bob-Bob correlators from the marginal when they were not measured directly
    if behavior is not None and not bob:
        for ctx, t in marginal.tables.items():
            if len(ctx) == 2:
                values.setdefault(make_label(None, ctx), float(np.sum(t * sign_tensor(2))))

    distance = distance_sigma = None
    pair_ctx = [c for c in marginal.contexts if len(c) == 2]
    if pair_ctx and all(c in boot_tables for c in pair_ctx):
        distance = disturbance_distance(MarginalBehavior({c: marginal[c] for c in pair_ctx}))
        distance_sigma = float(_bootstrap_distances(pair_ctx, boot_tables).std(ddof=1)) if n_resamples > 1 else 0.0

    return Estimate(
        behavior=behavior,
        marginal=marginal,
        correlators=CorrelatorSet.from_labels(values),
        sigma=sigma,
        n_resamples=n_resamples,
        distance=distance,
        distance_sigma=distance_sigma,
        resampled=resampled,
    )


def _bootstrap_distances(pair_ctx, boot_tables) -> np.ndarray:
    """Disturbance distance of every bootstrap replicate, first appearance unprimed."""
    seen: dict[int, list[np.ndarray]] = {}
    for ctx in pair_ctx:
        boot = boot_tables[ctx]
        seen.setdefault(ctx[0], []).append(boot.sum(axis=2)[:, 1])
        seen.setdefault(ctx[1], []).append(boot.sum(axis=1)[:, 1])
    return sum((p[0] - p[1]) ** 2 for p in seen.values())


def measured_tables(model: QuantumModel) -> dict[AnyContext, np.ndarray]:
    """Exact probabilities of the nine settings the experiment records.

    The five pentagon contexts are recorded with Alice's outcome summed out;
    the four CHSH contexts keep Alice's outcome.
    """
    scenario = Scenario.default()
    behavior = model.behavior(scenario)
    marginal = marginalize_bob(behavior)
    out: dict[AnyContext, np.ndarray] = {c: marginal[c] for c in scenario.pair_contexts}
    for key in Scenario.experimental().joint_contexts:
        out[key] = behavior[key]
    return out


@dataclass(frozen=True)
class SimulationReport:
    phi: float
    n_per_setting: int
    seed: int
    n_resamples: int
    alpha: float
    sigma_alpha: float
    beta: float
    sigma_beta: float
    sigma_alpha_quadrature: float
    sigma_beta_quadrature: float
    alpha_exact: float
    beta_exact: float
    distance: float
    distance_sigma: float
    correlators: dict
    sigma: dict

    def as_dict(self) -> dict:
        return asdict(self)


def simulate_experiment(
    model: QuantumModel,
    n_per_setting: int = N_PER_SETTING,
    seed: int = 0,
    n_resamples: int = N_RESAMPLES,
) -> SimulationReport:
    if n_per_setting <= 0:
        raise DomainError("n_per_setting must be positive")
    tables = measured_tables(model)
    counts = [
        sample_counts(p, n_per_setting, seed=[seed, i, 0], context=ctx)
        for i, (ctx, p) in enumerate(tables.items())
    ]
    est = estimate_from_counts(counts, n_resamples=n_resamples, seed=seed)
    c = est.correlators
    s_chsh = [est.sigma[label] for label in CHSH_LABELS]
    s_kcbs = [est.sigma[label] for label in KCBS_LABELS]
    exact = quantum_correlators(model)
    return SimulationReport(
        phi=model.phi,
        n_per_setting=n_per_setting,
        seed=seed,
        n_resamples=n_resamples,
        alpha=alpha_chsh(c),
        sigma_alpha=float(sum(s_chsh)),
        beta=beta_kcbs(c),
        sigma_beta=float(sum(s_kcbs)),
        sigma_alpha_quadrature=float(np.sqrt(np.sum(np.square(s_chsh)))),
        sigma_beta_quadrature=float(np.sqrt(np.sum(np.square(s_kcbs)))),
        alpha_exact=alpha_chsh(exact),
        beta_exact=beta_kcbs(exact),
        distance=float(est.distance),
        distance_sigma=float(est.distance_sigma),
        correlators={label: c.get(label) for label in CHSH_LABELS + KCBS_LABELS},
        sigma={label: est.sigma[label] for label in CHSH_LABELS + KCBS_LABELS},
    )
