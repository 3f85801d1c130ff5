"""Instance generation, the worked example, and the instance file format.

File format: plain text, LF line endings, one instance per line as
decimal values separated by single spaces.  Lines starting with ``#`` are
comments, except ``#@`` lines, which carry ``key=value`` metadata (id,
seed, label) for the instance on the next line.  Instances without a
metadata line get the positional id ``i<k>``.

Random streams come from :class:`random.Random` (MT19937), seeded per
instance from a SHA-256 digest of ``(seed, index)``, so instance k of a
set is the same whether generated alone, in parallel or in sequence.
"""

from __future__ import annotations

import enum
import hashlib
import os
import random
from dataclasses import dataclass
from typing import Iterable, List, Optional, Union

from .core import DomainError, Instance

WORKED_OMEGA = (63, 48, 932, 266, 671, 47, 110, 82, 39)


class InstanceParseError(ValueError):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


class GeneratorKind(str, enum.Enum):
    UNIFORM = "uniform"
    PLANTED = "planted"


@dataclass(frozen=True)
class GeneratorParams:
    n: int
    bits: int
    count: int = 1
    seed: int = 0
    kind: GeneratorKind = GeneratorKind.UNIFORM

    def __post_init__(self):
        if self.n < 1:
            raise DomainError("n must be at least 1")
        if self.bits < 1:
            raise DomainError("bits must be at least 1")
        if self.count < 0:
            raise DomainError("count must be non-negative")
        if not 0 <= self.seed < 2**64:
            raise DomainError("seed must be a 64-bit unsigned value")
        object.__setattr__(self, "kind", GeneratorKind(self.kind))

    def describe(self) -> dict:
        return {"n": self.n, "bits": self.bits, "count": self.count,
                "seed": self.seed, "kind": self.kind.value}


@dataclass
class InstanceSet:
    instances: List[Instance]
    provenance: Union[GeneratorParams, str, None] = None

    def __post_init__(self):
        ids = [inst.id for inst in self.instances]
        if len(set(ids)) != len(ids):
            raise DomainError("instance ids must be unique within a set")

    def __iter__(self):
        return iter(self.instances)

    def __len__(self):
        return len(self.instances)

    def __getitem__(self, k):
        return self.instances[k]


def derive_seed(*parts) -> int:
    """64-bit seed derived from arbitrary parts; stable across platforms."""
    text = "/".join(str(p) for p in parts).encode()
    return int.from_bytes(hashlib.sha256(text).digest()[:8], "big")


def _rng(params: GeneratorParams, index: int) -> random.Random:
    return random.Random(derive_seed(params.kind.value, params.seed, index))


def gen_uniform(params: GeneratorParams, indices: Optional[Iterable[int]] = None) -> InstanceSet:
    """Each value uniform in ``[0, 2**bits - 1]``.

    ``indices`` selects a sub-range of the set, for split generation.
    """
    if params.kind is not GeneratorKind.UNIFORM:
        raise DomainError("gen_uniform needs kind=uniform")
    out = []
    for k in (range(params.count) if indices is None else indices):
        rng = _rng(params, k)
        omega = tuple(rng.getrandbits(params.bits) for _ in range(params.n))
        out.append(Instance(omega, id=f"u{params.seed}-{k}", seed=params.seed))
    return InstanceSet(out, params)


def gen_planted(params: GeneratorParams, indices: Optional[Iterable[int]] = None) -> InstanceSet:
    """Yes-instances: the last value balances a random signing of the others.

    The planting signs are discarded; only ``label=1`` is kept.  The last
    value can exceed ``2**bits - 1``.
    """
    if params.kind is not GeneratorKind.PLANTED:
        raise DomainError("gen_planted needs kind=planted")
    if params.n < 2:
        raise DomainError("planted instances need n >= 2")
    out = []
    for k in (range(params.count) if indices is None else indices):
        rng = _rng(params, k)
        head = [rng.getrandbits(params.bits) for _ in range(params.n - 1)]
        signs = [rng.getrandbits(1) for _ in head]
        t = sum(v if s else -v for v, s in zip(head, signs))
        out.append(Instance(tuple(head) + (abs(t),), id=f"p{params.seed}-{k}",
                            seed=params.seed, label=1))
    return InstanceSet(out, params)


def generate(params: GeneratorParams) -> InstanceSet:
    if params.kind is GeneratorKind.PLANTED:
        return gen_planted(params)
    return gen_uniform(params)


def worked_example() -> Instance:
    return Instance(WORKED_OMEGA, id="paper-s2", label=1)


def format_instances(iset: Iterable[Instance]) -> str:
    lines = []
    for k, inst in enumerate(iset):
        meta = []
        if inst.id != f"i{k}":
            meta.append(f"id={inst.id}")
        if inst.seed is not None:
            meta.append(f"seed={inst.seed}")
        if inst.label is not None:
            meta.append(f"label={inst.label}")
        if meta:
            lines.append("#@ " + " ".join(meta))
        lines.append(" ".join(str(w) for w in inst.omega))
    return "".join(line + "\n" for line in lines)


def parse_instances(text: str, provenance=None) -> InstanceSet:
    out: List[Instance] = []
    meta: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#@"):
            meta = _parse_meta(line[2:], lineno)
            continue
        if line.startswith("#"):
            continue
        try:
            values = tuple(int(tok) for tok in line.split())
        except ValueError:
            raise InstanceParseError(lineno, f"not a list of integers: {line!r}") from None
        if any(v < 0 for v in values):
            raise DomainError(f"line {lineno}: negative value")
        try:
            out.append(Instance(values, id=meta.get("id", f"i{len(out)}"),
                                seed=meta.get("seed"), label=meta.get("label")))
        except DomainError as exc:
            raise InstanceParseError(lineno, str(exc)) from None
        meta = {}
    try:
        return InstanceSet(out, provenance)
    except DomainError as exc:
        raise InstanceParseError(0, str(exc)) from None


def _parse_meta(body: str, lineno: int) -> dict:
    meta = {}
    for tok in body.split():
        key, sep, value = tok.partition("=")
        if not sep or key not in ("id", "seed", "label"):
            raise InstanceParseError(lineno, f"bad metadata field {tok!r}")
        if key == "id":
            meta[key] = value
        else:
            try:
                meta[key] = int(value)
            except ValueError:
                raise InstanceParseError(lineno, f"bad {key} value {value!r}") from None
    return meta


def read_instances(path: Union[str, os.PathLike]) -> InstanceSet:
    with open(path, encoding="ascii", newline="") as fh:
        return parse_instances(fh.read(), provenance=str(path))


def write_instances(iset: Iterable[Instance], path: Union[str, os.PathLike]) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(format_instances(iset))
