"""Exact values in Q adjoined with square roots of distinct primes.

A value is a finite sum  c_1*sqrt(k_1) + ... + c_n*sqrt(k_n)  with rational
coefficients and squarefree positive integer radical keys; key 1 carries the
rational part.  The representation is kept normalized (no zero coefficients,
keys squarefree), which makes equality a plain map comparison and keeps the
rational-independence argument behind prime-sum decoding directly usable.

Everything here is symbolic: no square root is ever evaluated numerically.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from math import gcd

from .errors import IrrationalValueError, MalformedLabelError

_F0 = Fraction(0)
_F1 = Fraction(1)

# Primes are produced on demand and cached; label allocation is the only
# consumer and never needs more than a few hundred.
_PRIMES: list[int] = [2, 3, 5, 7, 11, 13]


def nth_prime(index: int) -> int:
    """Return the prime with the given 0-based index (2, 3, 5, ...)."""
    while len(_PRIMES) <= index:
        candidate = _PRIMES[-1] + 2
        while any(candidate % p == 0 for p in _PRIMES if p * p <= candidate):
            candidate += 2
        _PRIMES.append(candidate)
    return _PRIMES[index]


def is_squarefree(n: int) -> bool:
    """Trial-division squarefreeness test; used by tests and debug asserts."""
    if n < 1:
        return False
    i = 2
    while i * i <= n:
        if n % (i * i) == 0:
            return False
        while n % i == 0:
            n //= i
        i += 1
    return True


class ExactValue:
    """An immutable element of Q(sqrt(2), sqrt(3), sqrt(5), ...).

    Internally a dict mapping squarefree radical key -> nonzero Fraction.
    The empty dict is 0.  Instances hash and compare by normal form.
    """

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: dict[int, Fraction] | None = None):
        cleaned: dict[int, Fraction] = {}
        if terms:
            for key, coef in terms.items():
                if not isinstance(key, int) or key < 1:
                    raise ValueError(f"radical key must be a positive int, got {key!r}")
                frac = coef if isinstance(coef, Fraction) else Fraction(coef)
                if frac != 0:
                    cleaned[key] = frac
        self._terms = cleaned
        self._hash: int | None = None

    @classmethod
    def _raw(cls, terms: dict[int, Fraction]) -> "ExactValue":
        # Internal fast path: terms already normalized.
        value = cls.__new__(cls)
        value._terms = terms
        value._hash = None
        return value

    @classmethod
    def rational(cls, q) -> "ExactValue":
        frac = q if isinstance(q, Fraction) else Fraction(q)
        return cls._raw({1: frac} if frac != 0 else {})

    @classmethod
    def sqrt_of(cls, key: int) -> "ExactValue":
        """sqrt(key) for a squarefree key; sqrt_of(1) is the label 1."""
        return cls._raw({key: _F1})

    @property
    def terms(self) -> dict[int, Fraction]:
        return dict(self._terms)

    # -- predicates -------------------------------------------------------

    def is_zero(self) -> bool:
        return not self._terms

    def is_rational(self) -> bool:
        return not self._terms or set(self._terms) == {1}

    def is_boolean(self) -> bool:
        return self.is_zero() or self._terms == {1: _F1}

    def as_rational(self) -> Fraction:
        if not self._terms:
            return _F0
        if set(self._terms) != {1}:
            raise IrrationalValueError(f"value {self} is not rational")
        return self._terms[1]

    def label_key(self) -> int:
        """Radical key of a prime (product) label: a single term with coefficient 1."""
        if len(self._terms) != 1:
            raise MalformedLabelError(f"label must have exactly one term: {self}")
        key, coef = next(iter(self._terms.items()))
        if coef != 1:
            raise MalformedLabelError(f"label coefficient must be 1: {self}")
        return key

    # -- ring operations --------------------------------------------------

    def __add__(self, other: "ExactValue") -> "ExactValue":
        if not isinstance(other, ExactValue):
            return NotImplemented
        merged = dict(self._terms)
        for key, coef in other._terms.items():
            total = merged.get(key, _F0) + coef
            if total:
                merged[key] = total
            else:
                merged.pop(key, None)
        return ExactValue._raw(merged)

    def __neg__(self) -> "ExactValue":
        return ExactValue._raw({k: -c for k, c in self._terms.items()})

    def __sub__(self, other: "ExactValue") -> "ExactValue":
        if not isinstance(other, ExactValue):
            return NotImplemented
        return self + (-other)

    def __mul__(self, other: "ExactValue") -> "ExactValue":
        if not isinstance(other, ExactValue):
            return NotImplemented
        out: dict[int, Fraction] = {}
        for s, a in self._terms.items():
            for t, b in other._terms.items():
                g = gcd(s, t)
                key = (s // g) * (t // g)
                coef = a * b * g
                total = out.get(key, _F0) + coef
                if total:
                    out[key] = total
                else:
                    out.pop(key, None)
        return ExactValue._raw(out)

    def scale(self, q: Fraction) -> "ExactValue":
        if q == 0:
            return ExactValue._raw({})
        return ExactValue._raw({k: c * q for k, c in self._terms.items()})

    def quot(self, divisor: "ExactValue") -> "ExactValue":
        """Quotient with the engine convention a/0 := a; divisor must be rational."""
        if not divisor.is_rational():
            raise IrrationalValueError(f"irrational divisor: {divisor}")
        d = divisor.as_rational()
        if d == 0:
            return self
        return self.scale(1 / d)

    # -- prime-sum projection ---------------------------------------------

    def project(self, label_key: int, prime_product: int) -> "ExactValue":
        """Component of this prime sum at the given label.

        Keeps terms whose key is divisible by `label_key` and whose cofactor
        is coprime to every labeling prime (their product is passed in), and
        strips the label off each kept term.
        """
        out: dict[int, Fraction] = {}
        for key, coef in self._terms.items():
            if key % label_key:
                continue
            rest = key // label_key
            if gcd(rest, prime_product) != 1:
                continue
            out[rest] = out.get(rest, _F0) + coef
        return ExactValue._raw({k: c for k, c in out.items() if c})

    # -- equality / hashing / rendering ------------------------------------

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ExactValue):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def __repr__(self) -> str:
        return f"ExactValue({self.render()!r})"

    def __str__(self) -> str:
        return self.render()

    def render(self) -> str:
        """Canonical text form: coefficients times sqrt(key), keys ascending."""
        if not self._terms:
            return "0"
        parts = []
        for key in sorted(self._terms):
            coef = self._terms[key]
            parts.append(str(coef) if key == 1 else f"{coef}*sqrt({key})")
        return " + ".join(parts)

    _TERM_RE = re.compile(r"^(-?\d+(?:/\d+)?)(?:\*sqrt\((\d+)\))?$")

    @classmethod
    def parse(cls, text: str) -> "ExactValue":
        text = text.strip()
        if text == "0":
            return cls._raw({})
        terms: dict[int, Fraction] = {}
        for part in text.split(" + "):
            match = cls._TERM_RE.match(part.strip())
            if not match:
                raise ValueError(f"cannot parse exact value term {part!r}")
            coef = Fraction(match.group(1))
            key = int(match.group(2)) if match.group(2) else 1
            if key in terms:
                raise ValueError(f"duplicate radical key {key} in {text!r}")
            if coef:
                terms[key] = coef
        return cls._raw(terms)


EV_ZERO = ExactValue.rational(0)
EV_ONE = ExactValue.rational(1)


def ev_bool(flag: bool) -> ExactValue:
    return EV_ONE if flag else EV_ZERO


@dataclass(frozen=True)
class LabelAllocator:
    """Monotone source of prime labels 1, sqrt(2), sqrt(3), sqrt(5), ...

    The label 1 is issued exactly once per session, as the very first label
    ever requested; afterwards only fresh prime radicals are handed out.
    """

    next_prime_index: int = 0
    first_label_issued: bool = False

    def allocate(self, count: int) -> tuple[tuple[ExactValue, ...], "LabelAllocator"]:
        if count < 1:
            raise ValueError("label count must be >= 1")
        labels: list[ExactValue] = []
        index = self.next_prime_index
        issued = self.first_label_issued
        for _ in range(count):
            if not issued:
                labels.append(EV_ONE)
                issued = True
            else:
                labels.append(ExactValue.sqrt_of(nth_prime(index)))
                index += 1
        return tuple(labels), LabelAllocator(index, issued)


def allocate_labels(
    alloc: LabelAllocator, count: int
) -> tuple[tuple[ExactValue, ...], LabelAllocator]:
    return alloc.allocate(count)


class LabelingMeta:
    """Provenance of a labeling measure: which primes it draws on, and for a
    single grouping, the ordered labels and the (dimension, level) it labels.

    A product of two labelings keeps the union of the prime sets and the
    concatenated targets but no flat label list.
    """

    __slots__ = ("labels", "prime_set", "targets", "prime_product")

    def __init__(
        self,
        prime_set: frozenset[int],
        targets: tuple[tuple[str, str], ...],
        labels: tuple[ExactValue, ...] | None = None,
    ):
        self.labels = labels
        self.prime_set = prime_set
        self.targets = targets
        product = 1
        for p in prime_set:
            product *= p
        self.prime_product = product

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LabelingMeta):
            return NotImplemented
        return (
            self.labels == other.labels
            and self.prime_set == other.prime_set
            and self.targets == other.targets
        )

    def __repr__(self) -> str:
        return f"LabelingMeta(targets={self.targets}, primes={sorted(self.prime_set)})"

    @classmethod
    def for_labels(
        cls, dim: str, level: str, labels: tuple[ExactValue, ...]
    ) -> "LabelingMeta":
        primes: set[int] = set()
        for label in labels:
            key = label.label_key()
            if key != 1:
                primes.add(key)
        return cls(frozenset(primes), ((dim, level),), labels)

    def product(self, other: "LabelingMeta") -> "LabelingMeta":
        if self.prime_set & other.prime_set:
            raise MalformedLabelError(
                "labelings share primes; products require fresh labels"
            )
        return LabelingMeta(
            self.prime_set | other.prime_set, self.targets + other.targets, None
        )


def project_value(
    value: ExactValue, label: ExactValue, labeling_primes: frozenset[int] | set[int]
) -> ExactValue:
    """Project a prime sum on the component belonging to `label`.

    `labeling_primes` must contain every prime under the label's radical; it
    is the full prime set of the labeling the label was drawn from, which is
    what disambiguates the label 1.
    """
    key = label.label_key()
    product = 1
    for p in labeling_primes:
        product *= p
    if key != 1 and gcd(key, product) != key:
        raise MalformedLabelError(
            f"label {label} does not factor over the labeling primes"
        )
    return value.project(key, product)
