"""Finite partial functions, relations and certificate structures.

Everything is an explicit table and every certification question is answered by
enumerating the domain. Indices are 0-based in the Python API; the JSON forms
written by :mod:`spanforge.io` are 1-based.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import Iterable, Mapping

Word = tuple[int, ...]


class DomainError(ValueError):
    """An input word outside the domain of a partial function or relation."""


def _check_word(x: Word, n: int, ell: int) -> None:
    if len(x) != n:
        raise ValueError(f"word {x} has length {len(x)}, expected {n}")
    if any(not 0 <= s < ell for s in x):
        raise ValueError(f"word {x} has a symbol outside [0, {ell})")


@dataclass(frozen=True)
class PartialFunction:
    """``f : D_f -> [m]`` with ``D_f`` a subset of ``[ell]^n``."""

    n: int
    ell: int
    m: int
    table: Mapping[Word, int]

    def __post_init__(self):
        if self.n < 1 or self.ell < 2 or self.m < 1:
            raise ValueError("need n >= 1, ell >= 2, m >= 1")
        if not self.table:
            raise ValueError("empty function table")
        table = {tuple(int(s) for s in x): int(a) for x, a in self.table.items()}
        for x, a in table.items():
            _check_word(x, self.n, self.ell)
            if not 0 <= a < self.m:
                raise ValueError(f"output {a} of {x} outside [0, {self.m})")
        object.__setattr__(self, "table", table)

    @classmethod
    def from_callable(cls, n, ell, m, fn, domain: Iterable[Word]):
        return cls(n, ell, m, {tuple(x): fn(tuple(x)) for x in domain})

    @cached_property
    def domain(self) -> tuple[Word, ...]:
        return tuple(sorted(self.table))

    @cached_property
    def index(self) -> dict[Word, int]:
        return {x: i for i, x in enumerate(self.domain)}

    def __call__(self, x) -> int:
        x = tuple(x)
        try:
            return self.table[x]
        except KeyError:
            raise DomainError(f"{x} is not in the domain") from None

    def __contains__(self, x) -> bool:
        return tuple(x) in self.table

    def __len__(self) -> int:
        return len(self.table)

    def restrict(self, keep) -> "PartialFunction":
        return PartialFunction(self.n, self.ell, self.m,
                               {x: a for x, a in self.table.items() if keep(x, a)})

    def preimage(self, alpha: int) -> list[Word]:
        return [x for x in self.domain if self.table[x] == alpha]


@dataclass(frozen=True)
class Relation:
    """``r : D_r -> 2^[m]`` with uniform image size ``k``."""

    n: int
    ell: int
    m: int
    table: Mapping[Word, frozenset]

    def __post_init__(self):
        if not self.table:
            raise ValueError("empty relation table")
        table = {tuple(int(s) for s in x): frozenset(int(a) for a in v)
                 for x, v in self.table.items()}
        sizes = {len(v) for v in table.values()}
        if len(sizes) != 1 or 0 in sizes:
            raise ValueError(f"relation images must be nonempty with uniform size, got sizes {sorted(sizes)}")
        for x, v in table.items():
            _check_word(x, self.n, self.ell)
            if any(not 0 <= a < self.m for a in v):
                raise ValueError(f"image of {x} leaves [0, {self.m})")
        object.__setattr__(self, "table", table)

    @property
    def k(self) -> int:
        return len(next(iter(self.table.values())))

    @cached_property
    def domain(self) -> tuple[Word, ...]:
        return tuple(sorted(self.table))

    @cached_property
    def index(self) -> dict[Word, int]:
        return {x: i for i, x in enumerate(self.domain)}

    def __call__(self, x) -> frozenset:
        x = tuple(x)
        try:
            return self.table[x]
        except KeyError:
            raise DomainError(f"{x} is not in the domain") from None

    @classmethod
    def from_function(cls, f: PartialFunction) -> "Relation":
        return cls(f.n, f.ell, f.m, {x: frozenset([a]) for x, a in f.table.items()})


@dataclass(frozen=True)
class CertificateStructure:
    """Per-input certificate families, stored by their minimal members."""

    certs: Mapping[Word, tuple[frozenset, ...]] = field(default_factory=dict)

    def __post_init__(self):
        certs = {tuple(x): tuple(frozenset(S) for S in sets) for x, sets in self.certs.items()}
        object.__setattr__(self, "certs", certs)

    def contains(self, x, S) -> bool:
        """Superset closure: ``S`` is in ``M_x`` iff it contains a stored minimal set."""
        S = frozenset(S)
        return any(M <= S for M in self.certs.get(tuple(x), ()))


def _check_subset(S, n: int) -> frozenset:
    S = frozenset(int(j) for j in S)
    if not S:
        raise ValueError("index subset must be nonempty")
    if any(not 0 <= j < n for j in S):
        raise ValueError(f"index subset {sorted(S)} leaves [0, {n})")
    return S


def certifies(f: PartialFunction, x, S) -> bool:
    """True iff every ``y`` in the domain agreeing with ``x`` on ``S`` has ``f(y) = f(x)``."""
    alpha = f(x)
    S = _check_subset(S, f.n)
    x = tuple(x)
    return all(a == alpha for y, a in f.table.items() if all(y[j] == x[j] for j in S))


def assignment_certifies(f: PartialFunction, S, psi) -> int | None:
    """The output forced by fixing ``y_S = psi``; ``None`` if not forced or unrealised.

    ``psi`` maps each index of ``S`` to a symbol (a dict, or a sequence aligned with
    ``sorted(S)``).
    """
    S = sorted(_check_subset(S, f.n))
    if not isinstance(psi, Mapping):
        psi = dict(zip(S, psi))
    outputs = {a for y, a in f.table.items() if all(y[j] == psi[j] for j in S)}
    return outputs.pop() if len(outputs) == 1 else None


def minimal_certificates(f: PartialFunction, x) -> list[frozenset]:
    f(x)
    found: list[frozenset] = []
    for size in range(1, f.n + 1):
        for S in combinations(range(f.n), size):
            S = frozenset(S)
            if any(M <= S for M in found):
                continue
            if certifies(f, x, S):
                found.append(S)
    return sorted(found, key=lambda S: tuple(sorted(S)))


def certificate_structure(f: PartialFunction) -> CertificateStructure:
    """Minimal certificates of every input with nonzero output."""
    return CertificateStructure({x: tuple(minimal_certificates(f, x))
                                 for x in f.domain if f(x) != 0})


@dataclass
class CertificateReport:
    missing: list[Word] = field(default_factory=list)
    failing: list[tuple[Word, frozenset]] = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return not self.missing and not self.failing


def validate_certificate_structure(f: PartialFunction, E: CertificateStructure) -> CertificateReport:
    report = CertificateReport()
    for x in f.domain:
        if f(x) == 0:
            continue
        sets = E.certs.get(x, ())
        if not sets:
            report.missing.append(x)
        for S in sets:
            if not S or not certifies(f, x, S):
                report.failing.append((x, S))
    return report
