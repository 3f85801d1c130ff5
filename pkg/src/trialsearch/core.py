"""Domain types, the trial function and the two runner loops.

A partition vector assigns each element of an instance to one of two
sides: bit 1 puts the element on the ``+`` side, bit 0 on the ``-`` side.
The signed sum of the instance under that assignment is the discrepancy
between the two side sums; zero means a perfect partition.

Indices are 0-based throughout the Python API.  Bit strings printed for
humans put element 1 leftmost.
"""

from __future__ import annotations

import enum
import time
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Iterable, Optional, Sequence, Tuple, Union

import numpy as np

if TYPE_CHECKING:
    from .strategies import NoCertificate, Strategy


class DimensionError(ValueError):
    """A partition vector does not match the instance length."""


class DomainError(ValueError):
    """An argument is outside the domain of an operation."""


class OracleSizeError(ValueError):
    """The brute-force oracle refuses instances above its size cap."""


ORACLE_CAP = 24
DEFAULT_BUDGET_FACTOR = 64


@dataclass(frozen=True)
class Instance:
    omega: Tuple[int, ...]
    id: str = "anon"
    seed: Optional[int] = None
    label: Optional[int] = None

    def __post_init__(self):
        omega = tuple(self.omega)
        if len(omega) < 1:
            raise DomainError("an instance needs at least one element")
        for w in omega:
            if isinstance(w, bool) or not isinstance(w, (int, np.integer)):
                raise DomainError(f"element {w!r} is not an integer")
            if w < 0:
                raise DomainError(f"element {w} is negative")
        object.__setattr__(self, "omega", tuple(int(w) for w in omega))
        if self.label not in (None, 0, 1):
            raise DomainError(f"label must be 0 or 1, got {self.label!r}")
        if self.seed is not None and not 0 <= self.seed < 2**64:
            raise DomainError(f"seed {self.seed} is not a 64-bit unsigned value")

    @property
    def n(self) -> int:
        return len(self.omega)

    @property
    def total(self) -> int:
        return sum(self.omega)

    def __len__(self):
        return len(self.omega)


@dataclass(frozen=True)
class PartitionVector:
    bits: Tuple[bool, ...]

    def __post_init__(self):
        object.__setattr__(self, "bits", tuple(bool(b) for b in self.bits))

    @classmethod
    def _trusted(cls, bits: Tuple[bool, ...]) -> "PartitionVector":
        # bits must already be a tuple of bools
        obj = object.__new__(cls)
        object.__setattr__(obj, "bits", bits)
        return obj

    @classmethod
    def zeros(cls, n: int) -> "PartitionVector":
        return cls((False,) * n)

    @classmethod
    def ones(cls, n: int) -> "PartitionVector":
        return cls((True,) * n)

    @classmethod
    def from_int(cls, k: int, n: int) -> "PartitionVector":
        """Bit ``j`` of ``k`` (LSB = element 0) becomes ``bits[j]``."""
        return cls._trusted(tuple((k >> j) & 1 == 1 for j in range(n)))

    @classmethod
    def from_string(cls, s: str) -> "PartitionVector":
        if not s or set(s) - {"0", "1"}:
            raise DomainError(f"not a bit string: {s!r}")
        return cls(tuple(c == "1" for c in s))

    def to_int(self) -> int:
        k = 0
        for j, b in enumerate(self.bits):
            if b:
                k |= 1 << j
        return k

    def complement(self) -> "PartitionVector":
        return PartitionVector._trusted(tuple(not b for b in self.bits))

    def flip(self, *indices: int) -> "PartitionVector":
        bits = list(self.bits)
        for j in indices:
            if not 0 <= j < len(bits):
                raise IndexError(f"index {j} out of range for length {len(bits)}")
            bits[j] = not bits[j]
        return PartitionVector._trusted(tuple(bits))

    def sides(self, inst: Instance) -> Tuple[list, list]:
        """Return the ``+`` side and ``-`` side values, in index order."""
        _check_dim(self, inst)
        plus = [w for b, w in zip(self.bits, inst.omega) if b]
        minus = [w for b, w in zip(self.bits, inst.omega) if not b]
        return plus, minus

    def __len__(self):
        return len(self.bits)

    def __str__(self):
        return "".join("1" if b else "0" for b in self.bits)


@dataclass(frozen=True)
class TrialFeedback:
    success: bool
    discrepancy: int


class OutcomeKind(str, enum.Enum):
    FOUND = "FoundPartition"
    CLAIMED_NONE = "ClaimedNoPartition"
    GAVE_UP = "GaveUp"
    BUDGET_EXHAUSTED = "BudgetExhausted"


@dataclass(frozen=True)
class RunOutcome:
    kind: OutcomeKind
    trials: int
    steps: int
    witness: Optional[PartitionVector] = None
    certificate: Optional["NoCertificate"] = None
    diagnostic: str = field(default="", compare=False)

    def __post_init__(self):
        if (self.kind is OutcomeKind.FOUND) != (self.witness is not None):
            raise ValueError("a witness is required exactly for FoundPartition")

    @property
    def par(self) -> Optional[int]:
        """Par value determined by this run, or None when the run failed."""
        if self.kind is OutcomeKind.FOUND:
            return 1
        if self.kind is OutcomeKind.CLAIMED_NONE:
            return 0
        return None


@dataclass
class ResourceMeter:
    """Counts trial evaluations and strategy steps for one run.

    ``wall_time`` is informational only and never enters any resource figure.
    """

    trials: int = 0
    steps: int = 0
    wall_time: float = 0.0

    def merge(self, other: "ResourceMeter") -> "ResourceMeter":
        return ResourceMeter(
            self.trials + other.trials,
            self.steps + other.steps,
            self.wall_time + other.wall_time,
        )


@dataclass(frozen=True)
class EnumerationCursor:
    """Start point and mode of the deterministic traversal of the search space.

    Traversal is binary counting with element 0 as least-significant bit,
    wrapping around.  With ``pruned`` the last bit is held at its start
    value, so each complement class is visited exactly once.
    """

    start: PartitionVector
    pruned: bool = True
    visited: int = 0

    @classmethod
    def zeros(cls, n: int, pruned: bool = True) -> "EnumerationCursor":
        return cls(PartitionVector.zeros(n), pruned)

    @property
    def free_bits(self) -> int:
        n = len(self.start)
        return n - 1 if self.pruned else n

    @property
    def size(self) -> int:
        return 1 << self.free_bits


@dataclass(frozen=True)
class AgentConfig:
    """Configuration of one agent run.

    ``initial`` is a PartitionVector or an initializer name understood by
    :func:`trialsearch.strategies.initial_vector`.  ``budget`` of None means
    ``budget_factor * N``.
    """

    strategy: Union[str, "Strategy"] = "greedy"
    params: dict = field(default_factory=dict)
    budget: Optional[int] = None
    budget_factor: int = DEFAULT_BUDGET_FACTOR
    initial: Union[str, PartitionVector] = "all-zeros"
    rng_seed: int = 0
    unsound_claims: bool = False

    def resolve_budget(self, n: int) -> int:
        if self.budget is not None:
            if self.budget < 0:
                raise DomainError("budget must be non-negative")
            return self.budget
        return self.budget_factor * n


def _check_dim(p: PartitionVector, inst: Instance) -> None:
    if len(p) != inst.n:
        raise DimensionError(f"partition vector has length {len(p)}, instance has {inst.n}")


def signed_sum(p: PartitionVector, inst: Instance) -> int:
    _check_dim(p, inst)
    t = 0
    for b, w in zip(p.bits, inst.omega):
        t += w if b else -w
    return t


def trial(p: PartitionVector, inst: Instance, meter: Optional[ResourceMeter] = None) -> TrialFeedback:
    t = signed_sum(p, inst)
    if meter is not None:
        meter.trials += 1
    return TrialFeedback(t == 0, t)


def flip_delta(p: PartitionVector, inst: Instance, j: int, t: int) -> int:
    """Discrepancy after flipping bit ``j``, given the current discrepancy ``t``.

    Does not count as a trial.
    """
    _check_dim(p, inst)
    if not 0 <= j < inst.n:
        raise IndexError(f"index {j} out of range for length {inst.n}")
    w = inst.omega[j]
    return t - 2 * w if p.bits[j] else t + 2 * w


def successor(p: PartitionVector, pruned: bool = True) -> PartitionVector:
    """Next vector in binary counting order (element 0 least significant), wrapping."""
    n = len(p)
    m = n - 1 if pruned else n
    k = p.to_int()
    low = k & ((1 << m) - 1)
    high = k & ~((1 << m) - 1)
    return PartitionVector.from_int(high | ((low + 1) & ((1 << m) - 1)), n)


def run_exhaustive(inst: Instance, cursor: Optional[EnumerationCursor] = None,
                   meter: Optional[ResourceMeter] = None) -> RunOutcome:
    """Trial every vector in traversal order; stop at the first perfect partition.

    The discrepancy is carried incrementally across counter increments, so
    each trial costs amortised O(1) instead of O(N).
    """
    from .strategies import NoCertificate, CertificateKind

    if cursor is None:
        cursor = EnumerationCursor.zeros(inst.n)
    _check_dim(cursor.start, inst)
    started = time.perf_counter()
    omega = inst.omega
    m = cursor.free_bits
    mask = (1 << m) - 1
    k = cursor.start.to_int()
    high = k & ~mask
    low = k & mask
    t = signed_sum(cursor.start, inst)
    size = 1 << m
    trials = 0
    found = None
    while trials < size:
        trials += 1
        if t == 0:
            found = high | low
            break
        # increment the low counter: trailing ones clear, next zero sets
        j = 0
        while j < m and (low >> j) & 1:
            t -= 2 * omega[j]
            j += 1
        if j < m:
            t += 2 * omega[j]
            low |= 1 << j
        low &= ~((1 << j) - 1) & mask
    if meter is not None:
        meter.trials += trials
        meter.steps += trials if found is None else trials - 1
        meter.wall_time += time.perf_counter() - started
    if found is not None:
        return RunOutcome(OutcomeKind.FOUND, trials, trials - 1,
                          witness=PartitionVector.from_int(found, inst.n))
    cert = NoCertificate(CertificateKind.EXHAUSTED_SPACE, trials, pruned=cursor.pruned)
    return RunOutcome(OutcomeKind.CLAIMED_NONE, trials, trials, certificate=cert)


def run_agent(inst: Instance, cfg: AgentConfig, meter: Optional[ResourceMeter] = None) -> RunOutcome:
    """Trial-and-error loop driven by a dynamic search strategy.

    Exits: FoundPartition when a trial hits zero, ClaimedNoPartition or
    GaveUp when the strategy says so, BudgetExhausted when the trial budget
    runs out.  In the default sound mode a claim without a verifying
    certificate is downgraded to GaveUp; with ``unsound_claims`` a GiveUp is
    reported as an uncertified claim instead.
    """
    from .strategies import DecisionKind, build_strategy, initial_vector

    started = time.perf_counter()
    local = ResourceMeter()
    budget = cfg.resolve_budget(inst.n)

    def finish(kind, witness=None, certificate=None, diagnostic=""):
        local.wall_time = time.perf_counter() - started
        if meter is not None:
            meter.trials += local.trials
            meter.steps += local.steps
            meter.wall_time += local.wall_time
        return RunOutcome(kind, local.trials, local.steps, witness, certificate, diagnostic)

    try:
        strategy = build_strategy(cfg, inst)
        p = initial_vector(cfg.initial, inst, cfg.rng_seed)
        _check_dim(p, inst)
    except DimensionError:
        raise
    except Exception as exc:  # noqa: BLE001 - strategy setup must not crash the run
        return finish(OutcomeKind.GAVE_UP, diagnostic=f"strategy setup failed: {exc!r}")

    while local.trials < budget:
        fb = trial(p, inst, local)
        if fb.success:
            return finish(OutcomeKind.FOUND, witness=p)
        local.steps += 1
        try:
            decision = strategy.decide(fb.discrepancy, p, inst)
        except Exception as exc:  # noqa: BLE001
            return finish(OutcomeKind.GAVE_UP, diagnostic=f"strategy failed: {exc!r}")

        if decision.kind is DecisionKind.CONTINUE:
            nxt = decision.next
            if nxt is None or len(nxt) != inst.n or nxt == p:
                return finish(OutcomeKind.GAVE_UP, diagnostic="strategy proposed an invalid vector")
            p = nxt
        elif decision.kind is DecisionKind.CLAIM_NO_PARTITION:
            cert = decision.certificate
            if cert is not None and cert.verify(inst):
                return finish(OutcomeKind.CLAIMED_NONE, certificate=cert)
            if cfg.unsound_claims:
                return finish(OutcomeKind.CLAIMED_NONE, diagnostic="uncertified claim")
            return finish(OutcomeKind.GAVE_UP, diagnostic="claim without a valid certificate")
        else:
            if cfg.unsound_claims:
                return finish(OutcomeKind.CLAIMED_NONE, diagnostic=f"uncertified claim: {decision.reason}")
            return finish(OutcomeKind.GAVE_UP, diagnostic=decision.reason)
    return finish(OutcomeKind.BUDGET_EXHAUSTED)


def oracle_par(inst: Instance, cap: int = ORACLE_CAP) -> Tuple[int, Optional[PartitionVector]]:
    """Brute force over every vector of the search space.

    Builds the ``+``-side sum of all 2^N vectors by doubling (vector k puts
    element j on the ``+`` side iff bit j of k is set) and looks for one
    whose side sum is exactly half the total.  Shares no code with the
    runners.
    """
    n = inst.n
    if n > cap:
        raise OracleSizeError(f"oracle refuses N={n} above cap {cap}")
    total = inst.total
    sums = _subset_sums(inst.omega, total)
    # signed sum of vector k is 2 * sums[k] - total
    if isinstance(sums, np.ndarray):
        hits = np.flatnonzero(2 * sums - total == 0)
    else:
        hits = [k for k, s in enumerate(sums) if 2 * s - total == 0]
    if len(hits) == 0:
        return 0, None
    return 1, PartitionVector.from_int(int(hits[-1]), n)


def _subset_sums(omega: Sequence[int], total: int):
    if total < 2**62:
        sums = np.zeros(1, dtype=np.int64)
        for w in omega:
            sums = np.concatenate([sums, sums + w])
        return sums
    sums = [0]
    for w in omega:
        sums = sums + [s + w for s in sums]
    return sums


def verify_witness(p: Optional[PartitionVector], inst: Instance) -> bool:
    return p is not None and len(p) == inst.n and signed_sum(p, inst) == 0


def as_instance(values: Iterable[int], id: str = "anon") -> Instance:
    return Instance(tuple(values), id=id)
