"""Dynamic search strategies, initializers and sound no-partition certificates.

A strategy is consulted after every failed trial with the current
discrepancy ``t``, the vector just tried and the instance.  It answers
with a :class:`StrategyDecision`: continue at a new vector, claim that no
perfect partition exists, or give up.

Strategies are registered under stable names (see ``STRATEGIES``) so that
the CLI and reports can refer to them.
"""

from __future__ import annotations

import bisect
import enum
import heapq
import itertools
import random
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Deque, Dict, Iterator, List, Optional, Tuple

from .core import (
    AgentConfig,
    DomainError,
    Instance,
    PartitionVector,
    flip_delta,
    successor,
)


class CertificateKind(str, enum.Enum):
    ODD_TOTAL = "OddTotal"
    DOMINANT_ELEMENT = "DominantElement"
    EXHAUSTED_SPACE = "ExhaustedSpace"


@dataclass(frozen=True)
class NoCertificate:
    """Proof that an instance has no perfect partition.

    ``detail`` is the total (OddTotal), the dominant index (DominantElement)
    or the number of vectors visited (ExhaustedSpace).
    """

    kind: CertificateKind
    detail: int
    pruned: bool = True

    def verify(self, inst: Instance) -> bool:
        if self.kind is CertificateKind.ODD_TOTAL:
            return self.detail == inst.total and inst.total % 2 == 1
        if self.kind is CertificateKind.DOMINANT_ELEMENT:
            k = self.detail
            if not 0 <= k < inst.n:
                return False
            return inst.omega[k] > inst.total - inst.omega[k]
        need = 1 << (inst.n - 1 if self.pruned else inst.n)
        return self.detail >= need

    def __str__(self):
        return f"{self.kind.value}({self.detail})"


def certificates_precheck(inst: Instance) -> Optional[NoCertificate]:
    total = inst.total
    if total % 2 == 1:
        return NoCertificate(CertificateKind.ODD_TOTAL, total)
    k = max(range(inst.n), key=lambda j: (inst.omega[j], -j))
    if inst.omega[k] > total - inst.omega[k]:
        return NoCertificate(CertificateKind.DOMINANT_ELEMENT, k)
    return None


class DecisionKind(str, enum.Enum):
    CONTINUE = "Continue"
    CLAIM_NO_PARTITION = "ClaimNoPartition"
    GIVE_UP = "GiveUp"


@dataclass(frozen=True)
class StrategyDecision:
    kind: DecisionKind
    next: Optional[PartitionVector] = None
    certificate: Optional[NoCertificate] = None
    reason: str = ""
    move: Optional[Tuple[int, ...]] = None

    @classmethod
    def go(cls, nxt: PartitionVector, move=None) -> "StrategyDecision":
        return cls(DecisionKind.CONTINUE, next=nxt, move=move)

    @classmethod
    def claim(cls, cert: Optional[NoCertificate]) -> "StrategyDecision":
        return cls(DecisionKind.CLAIM_NO_PARTITION, certificate=cert)

    @classmethod
    def give_up(cls, reason: str) -> "StrategyDecision":
        return cls(DecisionKind.GIVE_UP, reason=reason)


@dataclass
class StrategyState:
    rng: random.Random
    tabu: Deque[int] = field(default_factory=deque)
    restarts_used: int = 0


class Strategy:
    name = "base"

    def __init__(self, state: StrategyState, inst: Instance):
        self.state = state
        self.inst = inst

    def reset(self) -> None:
        """Forget trajectory-local memory (used on restarts)."""

    def decide(self, t: int, p: PartitionVector, inst: Instance) -> StrategyDecision:
        raise NotImplementedError


class ExhaustiveSearch(Strategy):
    """Walks the whole space in the runner's counting order, then claims."""

    name = "exhaustive"

    def __init__(self, state, inst, pruned: bool = True):
        super().__init__(state, inst)
        self.pruned = pruned
        self.visited = 0
        self.size = 1 << (inst.n - 1 if pruned else inst.n)

    def decide(self, t, p, inst):
        self.visited += 1
        if self.visited >= self.size:
            return StrategyDecision.claim(
                NoCertificate(CertificateKind.EXHAUSTED_SPACE, self.visited, pruned=self.pruned))
        return StrategyDecision.go(successor(p, self.pruned))


class GreedyFlip(Strategy):
    """Best single flip by |t'|, with bounded tabu-guarded sideways moves.

    A move that does not reach a new best |t| counts as sideways; after
    ``max_sideways`` consecutive ones the strategy gives up.  Tabu moves are
    allowed only when they would beat the best |t| seen (aspiration).
    """

    name = "greedy"

    def __init__(self, state, inst, max_sideways: Optional[int] = None,
                 tabu_size: Optional[int] = None):
        super().__init__(state, inst)
        self.max_sideways = inst.n if max_sideways is None else max_sideways
        size = 2 * inst.n if tabu_size is None else tabu_size
        self.state.tabu = deque(maxlen=max(size, 0))
        self.reset()

    def reset(self):
        self.state.tabu.clear()
        self.best_abs = None
        self.run = 0

    def decide(self, t, p, inst):
        if self.best_abs is None:
            self.best_abs = abs(t)
        tabu = set(self.state.tabu)
        best = None
        bits, w = p.bits, inst.omega
        for j in range(inst.n):
            # inline flip_delta; this loop dominates run time
            a = abs(t - 2 * w[j] if bits[j] else t + 2 * w[j])
            if j in tabu and a >= self.best_abs:
                continue
            if best is None or a < best[0]:
                best = (a, j)
        if best is None:
            return StrategyDecision.give_up("every move is tabu")
        a, j = best
        if a < self.best_abs:
            self.best_abs = a
            self.run = 0
        else:
            self.run += 1
            if self.run > self.max_sideways:
                return StrategyDecision.give_up(f"no improvement after {self.max_sideways} sideways moves")
        if self.state.tabu.maxlen:
            self.state.tabu.append(j)
        return StrategyDecision.go(p.flip(j), move=(j,))


@dataclass(frozen=True)
class Move:
    kind: str
    indices: Tuple[int, ...]
    discrepancy: int

    @property
    def key(self):
        # ties: fewer elements moved, then lowest indices
        return (abs(self.discrepancy), len(self.indices), self.indices)


def repertoire_moves(p: PartitionVector, inst: Instance, t: int) -> Iterator[Move]:
    """Every transfer, 1-for-1 swap and 1-for-2 exchange, costed by flip deltas.

    Plain enumeration, O(N^3); :func:`best_adjust_move` finds the minimum
    without listing everything.
    """
    n = inst.n
    single = [flip_delta(p, inst, j, t) - t for j in range(n)]
    for j in range(n):
        yield Move("transfer", (j,), t + single[j])
    for i in range(n):
        for j in range(i + 1, n):
            if p.bits[i] != p.bits[j]:
                yield Move("swap", (i, j), t + single[i] + single[j])
    for a in range(n):
        others = [j for j in range(n) if p.bits[j] != p.bits[a]]
        for x in range(len(others)):
            for y in range(x + 1, len(others)):
                b, c = others[x], others[y]
                yield Move("exchange", tuple(sorted((a, b, c))), t + single[a] + single[b] + single[c])


def apply_move(p: PartitionVector, move: Move) -> PartitionVector:
    return p.flip(*move.indices)


def _nearest(keys: List, target2: int) -> List[int]:
    """Positions of the entries nearest to ``target2 / 2`` in a sorted list."""
    pos = bisect.bisect_left(keys, (target2 + 1) // 2)
    out = []
    if pos < len(keys):
        out.append(pos)
    if pos > 0:
        out.append(pos - 1)
    return out


def best_adjust_move(p: PartitionVector, inst: Instance, t: int) -> Optional[Move]:
    """Repertoire move minimising |t'| (ties: smaller move, then lowest indices).

    Swaps and exchanges are located by bisection on sorted values and
    sorted pair sums of the opposite side, so only the nearest candidates
    for each outgoing element are costed.
    """
    n = inst.n
    w = inst.omega
    bits = p.bits
    # candidates are compared as (|t'|, size, indices, t') tuples, matching Move.key
    best = None
    for j in range(n):
        t2 = t - 2 * w[j] if bits[j] else t + 2 * w[j]
        cand = (abs(t2), 1, (j,), t2)
        if best is None or cand < best:
            best = cand
    if best is None:
        return None

    sides = {True: [j for j in range(n) if bits[j]], False: [j for j in range(n) if not bits[j]]}

    # lowest index per distinct value, per side
    values = {}
    for side, idx in sides.items():
        first = {w[j]: j for j in reversed(idx)}
        values[side] = (sorted(first), first)

    # lexicographically smallest pair per distinct pair sum, per side; combinations
    # of an ascending list come out in lexicographic order, so writing them in
    # reverse leaves the smallest pair for each sum
    pairs = {}
    for side, idx in sides.items():
        first2 = {w[b] + w[c]: (b, c) for b, c in reversed(list(itertools.combinations(idx, 2)))}
        pairs[side] = (sorted(first2), first2)

    for a in range(n):
        side = bits[a]
        # moving a off its side changes t by -2w_a (plus side) or +2w_a
        sign = 1 if side else -1
        # t' = t - 2*sign*w_a + 2*sign*v, where v is the value (or pair sum) moved back
        base = t - 2 * sign * w[a]
        target2 = 2 * w[a] - sign * t
        keys, first = values[not side]
        for pos in _nearest(keys, target2):
            t2 = base + 2 * sign * keys[pos]
            if abs(t2) > best[0]:
                continue
            j = first[keys[pos]]
            cand = (abs(t2), 2, (a, j) if a < j else (j, a), t2)
            if cand < best:
                best = cand
        keys2, first2 = pairs[not side]
        for pos in _nearest(keys2, target2):
            t2 = base + 2 * sign * keys2[pos]
            if abs(t2) > best[0]:
                continue
            cand = (abs(t2), 3, tuple(sorted((a,) + first2[keys2[pos]])), t2)
            if cand < best:
                best = cand
    _, size, indices, t2 = best
    return Move(("transfer", "swap", "exchange")[size - 1], indices, t2)


class AdjustMoves(Strategy):
    """Transfers, swaps and 1-for-2 exchanges across sides; strict descent only."""

    name = "adjust"

    def decide(self, t, p, inst):
        move = best_adjust_move(p, inst, t)
        if move is None or abs(move.discrepancy) >= abs(t):
            return StrategyDecision.give_up(f"no repertoire move improves |t|={abs(t)}")
        return StrategyDecision.go(apply_move(p, move), move=move.indices)


class RandomWalk(Strategy):
    """Uniform random single-bit flips; never claims, never gives up."""

    name = "random"

    def decide(self, t, p, inst):
        j = self.state.rng.randrange(inst.n)
        return StrategyDecision.go(p.flip(j), move=(j,))


class WithPrecheck(Strategy):
    """Claims immediately when a cheap certificate exists, else delegates."""

    def __init__(self, inner: Strategy):
        super().__init__(inner.state, inner.inst)
        self.inner = inner
        self.name = inner.name
        self.cert = certificates_precheck(inner.inst)

    def reset(self):
        self.inner.reset()

    def decide(self, t, p, inst):
        if self.cert is not None:
            return StrategyDecision.claim(self.cert)
        return self.inner.decide(t, p, inst)


class RestartWrapper(Strategy):
    """Turns the inner strategy's GiveUp into a jump to a fresh vector.

    ``restart_from`` is ``"random"`` (uniform bits from the run's RNG) or
    ``"differencing"`` (the differencing seed with a few random flips).
    ``max_restarts`` of None means restart until the budget runs out.
    """

    def __init__(self, inner: Strategy, max_restarts: Optional[int] = None,
                 restart_from: str = "random"):
        super().__init__(inner.state, inner.inst)
        if restart_from not in ("random", "differencing"):
            raise DomainError(f"unknown restart source {restart_from!r}")
        self.inner = inner
        self.name = inner.name + "+restart"
        self.max_restarts = max_restarts
        self.restart_from = restart_from
        self._seed_vector = None

    def reset(self):
        self.inner.reset()

    def decide(self, t, p, inst):
        decision = self.inner.decide(t, p, inst)
        if decision.kind is not DecisionKind.GIVE_UP:
            return decision
        if self.max_restarts is not None and self.state.restarts_used >= self.max_restarts:
            return decision
        self.state.restarts_used += 1
        self.inner.reset()
        return StrategyDecision.go(self._fresh(p, inst))

    def _fresh(self, p: PartitionVector, inst: Instance) -> PartitionVector:
        rng = self.state.rng
        n = inst.n
        if self.restart_from == "random":
            q = PartitionVector.from_int(rng.getrandbits(n), n)
        else:
            if self._seed_vector is None:
                self._seed_vector = differencing_seed(inst)
            flips = rng.sample(range(n), max(1, n // 8))
            q = self._seed_vector.flip(*flips)
        if q == p:
            q = p.flip(rng.randrange(n))
        return q


def differencing_seed(inst: Instance) -> PartitionVector:
    """Largest-first differencing with sign back-propagation.

    Repeatedly replaces the two largest values by their difference, keeping
    track of which original elements sit on each side of every difference.
    Ties pop the earliest-created entry first.
    """
    heap = [(-w, j, (j,), ()) for j, w in enumerate(inst.omega)]
    heapq.heapify(heap)
    order = inst.n
    while len(heap) > 1:
        a, _, a_plus, a_minus = heapq.heappop(heap)
        b, _, b_plus, b_minus = heapq.heappop(heap)
        # -a >= -b; the difference keeps a's members on its plus side
        heapq.heappush(heap, (a - b, order, a_plus + b_minus, a_minus + b_plus))
        order += 1
    _, _, plus, _ = heap[0]
    bits = [False] * inst.n
    for j in plus:
        bits[j] = True
    return PartitionVector(tuple(bits))


_NUMBER_WORDS = {
    "one": 1, "two": 2, "three": 3, "four": 4, "five": 5, "six": 6,
    "seven": 7, "eight": 8, "nine": 9, "ten": 10, "eleven": 11, "twelve": 12,
}

INITIALIZERS = ("all-zeros", "all-ones", "random", "differencing", "first-K")


def initial_vector(spec, inst: Instance, seed: int = 0) -> PartitionVector:
    """Resolve an initializer name (or pass a vector through).

    ``first-K`` puts the first K elements on the ``+`` side; K may be digits
    or an English word (``first-four``).
    """
    if isinstance(spec, PartitionVector):
        return spec
    n = inst.n
    if spec == "all-zeros":
        return PartitionVector.zeros(n)
    if spec == "all-ones":
        return PartitionVector.ones(n)
    if spec == "random":
        rng = random.Random(f"{seed}/init")
        return PartitionVector.from_int(rng.getrandbits(n), n)
    if spec == "differencing":
        return differencing_seed(inst)
    if isinstance(spec, str) and spec.startswith("first-"):
        word = spec[len("first-"):]
        k = int(word) if word.isdigit() else _NUMBER_WORDS.get(word)
        if k is None or k > n:
            raise DomainError(f"bad initializer {spec!r} for N={n}")
        return PartitionVector(tuple(j < k for j in range(n)))
    raise DomainError(f"unknown initializer {spec!r}")


StrategyFactory = Callable[..., Strategy]


def _with_precheck(build: StrategyFactory, default: bool = True) -> StrategyFactory:
    def factory(state, inst, precheck: bool = default, **params):
        s = build(state, inst, **params)
        return WithPrecheck(s) if precheck else s
    return factory


def _restarting(inner_cls) -> StrategyFactory:
    def build(state, inst, max_restarts=None, restart_from="random", **params):
        return RestartWrapper(inner_cls(state, inst, **params), max_restarts, restart_from)
    return build


STRATEGIES: Dict[str, StrategyFactory] = {
    "exhaustive": _with_precheck(ExhaustiveSearch, default=False),
    "greedy": _with_precheck(GreedyFlip),
    "adjust": _with_precheck(AdjustMoves),
    "random": _with_precheck(RandomWalk),
    "greedy+restart": _with_precheck(_restarting(GreedyFlip)),
    "adjust+restart": _with_precheck(_restarting(AdjustMoves)),
    "random+restart": _with_precheck(_restarting(RandomWalk)),
}

# run_exhaustive directly rather than through the agent loop
DIRECT_EXHAUSTIVE = "exhaustive-direct"


def strategy_names() -> List[str]:
    return sorted(STRATEGIES) + [DIRECT_EXHAUSTIVE]


def build_strategy(cfg: AgentConfig, inst: Instance) -> Strategy:
    """Fresh, independently seeded strategy instance for one run."""
    state = StrategyState(rng=random.Random(f"{cfg.rng_seed}/strategy"))
    if callable(cfg.strategy) and not isinstance(cfg.strategy, str):
        return cfg.strategy(state, inst, **cfg.params)
    try:
        factory = STRATEGIES[cfg.strategy]
    except KeyError:
        raise DomainError(f"unknown strategy {cfg.strategy!r}") from None
    return factory(state, inst, **cfg.params)


def check_strategy(name: str) -> None:
    if name not in STRATEGIES and name != DIRECT_EXHAUSTIVE:
        raise DomainError(f"unknown strategy {name!r}; known: {', '.join(strategy_names())}")


__all__ = [
    "CertificateKind", "NoCertificate", "certificates_precheck", "DecisionKind",
    "StrategyDecision", "StrategyState", "Strategy", "ExhaustiveSearch", "GreedyFlip",
    "AdjustMoves", "RandomWalk", "RestartWrapper", "WithPrecheck", "Move",
    "repertoire_moves", "best_adjust_move", "apply_move", "differencing_seed",
    "initial_vector", "STRATEGIES", "build_strategy", "strategy_names", "check_strategy",
]
