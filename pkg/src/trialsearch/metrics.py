"""Resource accounting, outcome verification and the intelligence measure.

The canonical resource unit is one trial.  Strategy steps are counted
alongside but never enter Z or q; neither does wall time.
"""

from __future__ import annotations

import enum
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Iterable, List, Optional, Sequence, Union

from .core import (
    ORACLE_CAP,
    AgentConfig,
    DomainError,
    EnumerationCursor,
    Instance,
    OutcomeKind,
    ResourceMeter,
    RunOutcome,
    oracle_par,
    run_agent,
    run_exhaustive,
    verify_witness,
)
from .instances import GeneratorParams, derive_seed, generate
from .strategies import initial_vector

log = logging.getLogger(__name__)

DEFAULT_THRESHOLD_FACTOR = 4


class VerdictKind(str, enum.Enum):
    DONE_CORRECT = "DoneCorrect"
    DONE_WRONG = "DoneWrong"
    FAILED_GAVE_UP = "FailedGaveUp"
    FAILED_BUDGET = "FailedBudget"
    UNVERIFIED = "Unverified"


@dataclass(frozen=True)
class VerificationVerdict:
    kind: VerdictKind
    oracle_used: bool = False


@dataclass(frozen=True)
class ExhaustiveReference:
    """The reference unparticularized program: exhaustive traversal."""

    pruned: bool = False
    start: str = "all-zeros"

    def run(self, inst: Instance) -> RunOutcome:
        cursor = EnumerationCursor(initial_vector(self.start, inst), self.pruned)
        return run_exhaustive(inst, cursor)

    def worst_case(self, n: int) -> int:
        """Trials needed on a no-instance of length ``n``."""
        return 1 << (n - 1 if self.pruned else n)

    def describe(self) -> str:
        return f"exhaustive(pruned={self.pruned},start={self.start})"


Reference = Union[ExhaustiveReference, Callable[[Instance], RunOutcome]]


def _run_reference(ref: Reference, inst: Instance) -> RunOutcome:
    return ref.run(inst) if isinstance(ref, ExhaustiveReference) else ref(inst)


def unparticularized_resource(instances: Iterable[Instance],
                              references: Optional[Sequence[Reference]] = None) -> int:
    """Max trials of each reference program over the set; min over references."""
    instances = list(instances)
    if not instances:
        raise DomainError("empty instance set")
    if references is None:
        references = [ExhaustiveReference()]
    if not references:
        raise DomainError("no reference program given")
    return min(max(_run_reference(ref, inst).trials for inst in instances) for ref in references)


def combined_resource(finder_trials: int, exec_trials: int) -> int:
    for v in (finder_trials, exec_trials):
        if isinstance(v, bool) or not isinstance(v, int) or v < 0:
            raise DomainError(f"resource counts must be non-negative integers, got {v!r}")
    return finder_trials + exec_trials


def fixed_finder_resource(instances: Iterable[Instance], finder: Reference = ExhaustiveReference()) -> int:
    """Worst case of a fixed finder followed by executing what it found.

    For this problem the found program is the witness itself, so execution
    costs nothing beyond the finder's trials.
    """
    instances = list(instances)
    if not instances:
        raise DomainError("empty instance set")
    return max(combined_resource(_run_reference(finder, inst).trials, 0) for inst in instances)


def classify_outcome(outcome: RunOutcome, inst: Instance, oracle_cap: int = ORACLE_CAP) -> VerificationVerdict:
    kind = outcome.kind
    if kind is OutcomeKind.FOUND:
        if not verify_witness(outcome.witness, inst):
            raise ValueError(f"FoundPartition with a non-zero witness on {inst.id}")
        return VerificationVerdict(VerdictKind.DONE_CORRECT)
    if kind is OutcomeKind.GAVE_UP:
        return VerificationVerdict(VerdictKind.FAILED_GAVE_UP)
    if kind is OutcomeKind.BUDGET_EXHAUSTED:
        return VerificationVerdict(VerdictKind.FAILED_BUDGET)
    if outcome.certificate is not None and outcome.certificate.verify(inst):
        return VerificationVerdict(VerdictKind.DONE_CORRECT)
    if inst.n <= oracle_cap:
        bit, _ = oracle_par(inst, cap=oracle_cap)
        return VerificationVerdict(VerdictKind.DONE_CORRECT if bit == 0 else VerdictKind.DONE_WRONG, True)
    if inst.label is not None:
        return VerificationVerdict(VerdictKind.DONE_CORRECT if inst.label == 0 else VerdictKind.DONE_WRONG)
    return VerificationVerdict(VerdictKind.UNVERIFIED)


def intelligence_threshold(z: int, factor: int = DEFAULT_THRESHOLD_FACTOR, mode: str = "log") -> int:
    """Trial bound under which a correct run counts as intelligent.

    ``log``: factor * ceil(log2 Z).  ``tenth``: factor * ceil(Z / 10).
    """
    if z < 1:
        raise DomainError("Z must be positive")
    if mode == "log":
        return factor * (z - 1).bit_length()
    if mode == "tenth":
        return factor * -(-z // 10)
    raise DomainError(f"unknown threshold mode {mode!r}")


@dataclass(frozen=True)
class InstanceRow:
    id: str
    n: int
    outcome: str
    verdict: str
    trials: int
    steps: int
    intelligent: bool


@dataclass
class IntelligenceReport:
    agent: str
    agent_config: dict
    sample_size: int
    z_reference: int
    z_mode: str
    threshold: int
    threshold_factor: int
    threshold_mode: str
    v_count: int
    rows: List[InstanceRow] = field(default_factory=list)

    @property
    def q(self) -> Fraction:
        return Fraction(self.v_count, self.sample_size)

    @property
    def done_correct(self) -> int:
        return sum(r.verdict == VerdictKind.DONE_CORRECT.value for r in self.rows)

    @property
    def done_wrong(self) -> int:
        return sum(r.verdict == VerdictKind.DONE_WRONG.value for r in self.rows)


def describe_agent(cfg: AgentConfig) -> dict:
    strategy = cfg.strategy if isinstance(cfg.strategy, str) else getattr(cfg.strategy, "__name__", "custom")
    return {
        "strategy": strategy,
        "params": dict(sorted(cfg.params.items())),
        "budget": cfg.budget,
        "budget_factor": cfg.budget_factor,
        "initial": str(cfg.initial),
        "rng_seed": cfg.rng_seed,
        "unsound_claims": cfg.unsound_claims,
    }


def run_configured(inst: Instance, cfg: AgentConfig, meter: Optional[ResourceMeter] = None) -> RunOutcome:
    """run_agent, or run_exhaustive for the ``exhaustive-direct`` pseudo-strategy."""
    if cfg.strategy == "exhaustive-direct":
        p0 = initial_vector(cfg.initial, inst, cfg.rng_seed)
        return run_exhaustive(inst, EnumerationCursor(p0, cfg.params.get("pruned", True)), meter)
    return run_agent(inst, cfg, meter)


def intelligence_q(agent: AgentConfig, instances: Iterable[Instance],
                   threshold_factor: int = DEFAULT_THRESHOLD_FACTOR, *,
                   z: Optional[int] = None, z_mode: str = "worst",
                   threshold_mode: str = "log",
                   reference: ExhaustiveReference = ExhaustiveReference(),
                   oracle_cap: int = ORACLE_CAP) -> IntelligenceReport:
    """Estimate q = |V| / |W| on a finite sample.

    Z defaults to the reference program's worst case over all instances of
    the sample's largest length (``z_mode="worst"``); ``z_mode="sample"``
    takes the maximum measured on the sample instead.  An explicit ``z``
    overrides both.
    """
    instances = list(instances)
    if not instances:
        raise DomainError("empty instance set")
    if z is None:
        if z_mode == "worst":
            z = reference.worst_case(max(inst.n for inst in instances))
        elif z_mode == "sample":
            z = unparticularized_resource(instances, [reference])
        else:
            raise DomainError(f"unknown Z mode {z_mode!r}")
    else:
        z_mode = "supplied"
    if z <= 0:
        raise DomainError("Z must be positive")
    threshold = intelligence_threshold(z, threshold_factor, threshold_mode)
    rows = []
    for inst in instances:
        out = run_configured(inst, agent)
        verdict = classify_outcome(out, inst, oracle_cap)
        smart = verdict.kind is VerdictKind.DONE_CORRECT and out.trials <= threshold
        rows.append(InstanceRow(inst.id, inst.n, out.kind.value, verdict.kind.value,
                                out.trials, out.steps, smart))
    desc = describe_agent(agent)
    return IntelligenceReport(
        agent=desc["strategy"], agent_config=desc, sample_size=len(instances),
        z_reference=z, z_mode=z_mode, threshold=threshold,
        threshold_factor=threshold_factor, threshold_mode=threshold_mode,
        v_count=sum(r.intelligent for r in rows), rows=rows,
    )


SWEEP_COLUMNS = ("n", "bits", "kind", "seed", "count", "done_correct", "done_wrong",
                 "gave_up", "budget_exhausted", "unverified", "mean_trials", "q", "warning")


def _sweep_cell(params: GeneratorParams, agent: AgentConfig, threshold_factor: int,
                threshold_mode: str, oracle_cap: int) -> dict:
    row = {"n": params.n, "bits": params.bits, "kind": params.kind.value, "seed": params.seed,
           "count": params.count, "done_correct": 0, "done_wrong": 0, "gave_up": 0,
           "budget_exhausted": 0, "unverified": 0, "mean_trials": "0.000", "q": "0.0000",
           "warning": ""}
    if params.count == 0:
        log.warning("sweep cell n=%d bits=%d has count 0; skipped", params.n, params.bits)
        row["warning"] = "empty cell skipped"
        return row
    threshold = intelligence_threshold(ExhaustiveReference().worst_case(params.n),
                                       threshold_factor, threshold_mode)
    counts = {k: 0 for k in VerdictKind}
    trials = 0
    smart = 0
    for inst in generate(params):
        cfg = replace(agent, rng_seed=derive_seed(agent.rng_seed, inst.id))
        out = run_configured(inst, cfg)
        verdict = classify_outcome(out, inst, oracle_cap)
        counts[verdict.kind] += 1
        trials += out.trials
        smart += verdict.kind is VerdictKind.DONE_CORRECT and out.trials <= threshold
    row.update(
        done_correct=counts[VerdictKind.DONE_CORRECT],
        done_wrong=counts[VerdictKind.DONE_WRONG],
        gave_up=counts[VerdictKind.FAILED_GAVE_UP],
        budget_exhausted=counts[VerdictKind.FAILED_BUDGET],
        unverified=counts[VerdictKind.UNVERIFIED],
        mean_trials=f"{trials / params.count:.3f}",
        q=f"{smart / params.count:.4f}",
    )
    return row


@dataclass
class SweepTable:
    header: dict
    rows: List[dict]

    def fraction_correct(self, row: dict) -> float:
        return row["done_correct"] / row["count"] if row["count"] else 0.0


def conjecture_sweep(grid: Iterable[GeneratorParams], agent: AgentConfig,
                     budget_factor: Optional[int] = None, *,
                     threshold_factor: int = DEFAULT_THRESHOLD_FACTOR,
                     threshold_mode: str = "log", oracle_cap: int = ORACLE_CAP,
                     workers: int = 1) -> SweepTable:
    """Run the agent on every generated instance of every grid cell.

    The agent's budget becomes ``budget_factor * N`` when a factor is given.
    Each run is seeded from the agent seed and the instance id, so rows do
    not depend on execution order or on ``workers``.
    """
    cells = sorted(grid, key=lambda g: (g.n, g.bits, g.kind.value, g.seed, g.count))
    if budget_factor is not None:
        agent = replace(agent, budget=None, budget_factor=budget_factor)
    args = [(c, agent, threshold_factor, threshold_mode, oracle_cap) for c in cells]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_cell, *zip(*args))) if args else []
    else:
        rows = [_sweep_cell(*a) for a in args]
    header = {
        "agent": describe_agent(agent),
        "grid": [c.describe() for c in cells],
        "threshold_factor": threshold_factor,
        "threshold_mode": threshold_mode,
        "z_reference": ExhaustiveReference().describe() + " worst case",
        "oracle_cap": oracle_cap,
    }
    return SweepTable(header, rows)
