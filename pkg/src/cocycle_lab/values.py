"""Exact abelian value groups with translation-invariant metrics.

Every construction in this package takes values in an abelian group
carrying a translation-invariant metric.  Six concrete groups are
provided:

* ``INTEGERS``            -- (Z, +), metric |a - b|
* ``RATIONALS``           -- (Q, +), metric |a - b|
* ``DYADICS``             -- rationals with power-of-two denominator; the
                             countable dense subgroup used for rounding
* ``integers_mod(m)``     -- (Z/m, +), circular metric min(d, m - d)
* ``rational_vectors(d)`` -- (Q^d, +), metric = sum of coordinate distances
* ``APPROX_REALS``        -- floats; inexact, excluded from exact-mode proofs

The metrics on Z/m and Q^d are conventions of this implementation (any
compatible translation-invariant metric would do); they are fixed so that
every derived quantity is a reproducible exact rational.  Float values are
compared with ``REPORTING_TOLERANCE`` in reports only, never in exact-mode
verification.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Any

#: Tolerance for float comparisons in reports.  Exact groups never use it.
REPORTING_TOLERANCE = 1e-9


class GroupMismatchError(TypeError):
    """Raised when an operation mixes values from different groups."""


class UnsupportedValueError(TypeError):
    """Raised when a value variant does not support the requested operation."""


def as_fraction(x: Any) -> Fraction:
    """Parse an exact rational from an int, Fraction, or 'p/q' string.

    Floats are rejected: exact mode must never silently absorb rounding.
    """
    if isinstance(x, bool):
        raise UnsupportedValueError("bool is not an exact rational")
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise UnsupportedValueError(f"cannot interpret {x!r} as an exact rational")


def is_dyadic(q: Fraction) -> bool:
    """True when q's reduced denominator is a power of two."""
    d = q.denominator
    return d & (d - 1) == 0


class Group:
    """An abelian group together with a translation-invariant metric.

    Concrete subclasses fix the payload representation.  Payloads are raw
    Python values (int, Fraction, tuple, float); ``GroupValue`` wraps a
    payload with its group for the public API, while table-scan kernels
    operate on payloads directly through these methods.
    """

    tag: str = "?"
    exact: bool = True

    def zero(self):
        raise NotImplementedError

    def validate(self, payload):
        raise NotImplementedError

    def add(self, a, b):
        raise NotImplementedError

    def neg(self, a):
        raise NotImplementedError

    def sub(self, a, b):
        return self.add(a, self.neg(b))

    def scale(self, a, k: int):
        """k-fold sum of a (k may be negative or zero)."""
        raise NotImplementedError

    def metric(self, a, b):
        raise NotImplementedError

    def norm(self, a):
        return self.metric(a, self.zero())

    def values_equal(self, a, b) -> bool:
        return a == b

    def value(self, payload) -> "GroupValue":
        return GroupValue(self, self.validate(payload))

    def payload_to_json(self, a):
        raise NotImplementedError

    def payload_from_json(self, obj):
        raise NotImplementedError

    def __repr__(self) -> str:
        return self.tag


class IntegerGroup(Group):
    tag = "int"

    def zero(self):
        return 0

    def validate(self, payload):
        if isinstance(payload, bool) or not isinstance(payload, int):
            raise UnsupportedValueError(f"integer group needs int, got {payload!r}")
        return payload

    def add(self, a, b):
        return a + b

    def neg(self, a):
        return -a

    def scale(self, a, k):
        return a * k

    def metric(self, a, b):
        return abs(a - b)

    def payload_to_json(self, a):
        return {"t": "int", "n": a}

    def payload_from_json(self, obj):
        return self.validate(obj["n"])


class RationalGroup(Group):
    tag = "rat"

    def zero(self):
        return Fraction(0)

    def validate(self, payload):
        return as_fraction(payload)

    def add(self, a, b):
        return a + b

    def neg(self, a):
        return -a

    def scale(self, a, k):
        return a * k

    def metric(self, a, b):
        return abs(a - b)

    def payload_to_json(self, a):
        return {"t": "rat", "n": a.numerator, "d": a.denominator}

    def payload_from_json(self, obj):
        return Fraction(obj["n"], obj["d"])


class DyadicGroup(RationalGroup):
    """Rationals whose reduced denominator is a power of two."""

    tag = "dy"

    def validate(self, payload):
        q = as_fraction(payload)
        if not is_dyadic(q):
            raise UnsupportedValueError(f"{q} is not a dyadic rational")
        return q

    def payload_to_json(self, a):
        return {"t": "dy", "n": a.numerator, "k": a.denominator.bit_length() - 1}

    def payload_from_json(self, obj):
        return self.validate(Fraction(obj["n"], 1 << obj["k"]))


@dataclass(frozen=True)
class ModularGroup(Group):
    """Z/m with the circular metric min(d, m - d)."""

    modulus: int
    exact = True

    def __post_init__(self):
        if self.modulus < 1:
            raise ValueError("modulus must be >= 1")

    @property
    def tag(self) -> str:  # type: ignore[override]
        return f"mod:{self.modulus}"

    def zero(self):
        return 0

    def validate(self, payload):
        if isinstance(payload, bool) or not isinstance(payload, int):
            raise UnsupportedValueError(f"Z/{self.modulus} needs int, got {payload!r}")
        return payload % self.modulus

    def add(self, a, b):
        return (a + b) % self.modulus

    def neg(self, a):
        return (-a) % self.modulus

    def scale(self, a, k):
        return (a * k) % self.modulus

    def metric(self, a, b):
        d = (a - b) % self.modulus
        return min(d, self.modulus - d)

    def payload_to_json(self, a):
        return {"t": "mod", "m": self.modulus, "r": a}

    def payload_from_json(self, obj):
        if obj["m"] != self.modulus:
            raise GroupMismatchError(f"modulus {obj['m']} != {self.modulus}")
        return self.validate(obj["r"])

    def __repr__(self) -> str:
        return self.tag


@dataclass(frozen=True)
class RationalVectorGroup(Group):
    """Q^d with the sum-of-absolute-differences metric (exact on rationals)."""

    dim: int
    exact = True

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dimension must be >= 1")

    @property
    def tag(self) -> str:  # type: ignore[override]
        return f"vec:{self.dim}"

    def zero(self):
        return (Fraction(0),) * self.dim

    def validate(self, payload):
        if not isinstance(payload, (tuple, list)) or len(payload) != self.dim:
            raise UnsupportedValueError(
                f"Q^{self.dim} needs a length-{self.dim} coordinate list"
            )
        return tuple(as_fraction(c) for c in payload)

    def add(self, a, b):
        return tuple(x + y for x, y in zip(a, b))

    def neg(self, a):
        return tuple(-x for x in a)

    def scale(self, a, k):
        return tuple(x * k for x in a)

    def metric(self, a, b):
        return sum((abs(x - y) for x, y in zip(a, b)), Fraction(0))

    def payload_to_json(self, a):
        return {"t": "vec", "v": [[c.numerator, c.denominator] for c in a]}

    def payload_from_json(self, obj):
        return self.validate([Fraction(n, d) for n, d in obj["v"]])

    def __repr__(self) -> str:
        return self.tag


class ApproxRealGroup(Group):
    """Float-backed reals.  Inexact; for reporting and demos only."""

    tag = "real"
    exact = False

    def zero(self):
        return 0.0

    def validate(self, payload):
        if isinstance(payload, bool) or not isinstance(payload, (int, float)):
            raise UnsupportedValueError(f"real group needs float, got {payload!r}")
        return float(payload)

    def add(self, a, b):
        return a + b

    def neg(self, a):
        return -a

    def scale(self, a, k):
        return a * k

    def metric(self, a, b):
        return abs(a - b)

    def values_equal(self, a, b) -> bool:
        return abs(a - b) <= REPORTING_TOLERANCE

    def payload_to_json(self, a):
        return {"t": "real", "v": a}

    def payload_from_json(self, obj):
        return self.validate(obj["v"])


INTEGERS = IntegerGroup()
RATIONALS = RationalGroup()
DYADICS = DyadicGroup()
APPROX_REALS = ApproxRealGroup()


def integers_mod(m: int) -> ModularGroup:
    return ModularGroup(m)


def rational_vectors(d: int) -> RationalVectorGroup:
    return RationalVectorGroup(d)


def group_from_tag(tag: str) -> Group:
    """Inverse of ``group.tag``; accepts 'int', 'rat', 'dy', 'real', 'mod:m', 'vec:d'."""
    plain = {"int": INTEGERS, "rat": RATIONALS, "dy": DYADICS, "real": APPROX_REALS}
    if tag in plain:
        return plain[tag]
    kind, _, arg = tag.partition(":")
    if kind == "mod" and arg:
        return ModularGroup(int(arg))
    if kind == "vec" and arg:
        return RationalVectorGroup(int(arg))
    raise UnsupportedValueError(f"unknown group tag {tag!r}")


@dataclass(frozen=True)
class GroupValue:
    """A group element: a payload tagged with its group."""

    group: Group
    payload: Any

    def __post_init__(self):
        object.__setattr__(self, "payload", self.group.validate(self.payload))

    def _require_same(self, other: "GroupValue") -> None:
        if not isinstance(other, GroupValue):
            raise GroupMismatchError(f"expected GroupValue, got {other!r}")
        if other.group != self.group:
            raise GroupMismatchError(
                f"group mismatch: {self.group!r} vs {other.group!r}"
            )

    def __add__(self, other: "GroupValue") -> "GroupValue":
        self._require_same(other)
        return GroupValue(self.group, self.group.add(self.payload, other.payload))

    def __neg__(self) -> "GroupValue":
        return GroupValue(self.group, self.group.neg(self.payload))

    def __sub__(self, other: "GroupValue") -> "GroupValue":
        self._require_same(other)
        return GroupValue(self.group, self.group.sub(self.payload, other.payload))

    def scale(self, k: int) -> "GroupValue":
        return GroupValue(self.group, self.group.scale(self.payload, k))

    def metric_to(self, other: "GroupValue"):
        self._require_same(other)
        return self.group.metric(self.payload, other.payload)

    def norm(self):
        return self.group.norm(self.payload)

    def is_zero(self) -> bool:
        return self.group.values_equal(self.payload, self.group.zero())

    def to_json(self):
        return self.group.payload_to_json(self.payload)

    def __repr__(self) -> str:
        return f"{self.payload!r}@{self.group!r}"


_JSON_GROUPS = {
    "int": lambda obj: INTEGERS,
    "rat": lambda obj: RATIONALS,
    "dy": lambda obj: DYADICS,
    "real": lambda obj: APPROX_REALS,
    "mod": lambda obj: ModularGroup(obj["m"]),
    "vec": lambda obj: RationalVectorGroup(len(obj["v"])),
}


def value_from_json(obj) -> GroupValue:
    """Parse a tagged value record, e.g. {"t":"rat","n":1,"d":3}."""
    try:
        group = _JSON_GROUPS[obj["t"]](obj)
    except KeyError as exc:
        raise UnsupportedValueError(f"unknown value record {obj!r}") from exc
    return GroupValue(group, group.payload_from_json(obj))


def add(a: GroupValue, b: GroupValue) -> GroupValue:
    return a + b


def negate(a: GroupValue) -> GroupValue:
    return -a


def metric(a: GroupValue, b: GroupValue):
    """Translation-invariant distance between two values of one group."""
    return a.metric_to(b)


@dataclass(frozen=True)
class NeighborhoodChain:
    """Halving chain of neighborhood radii eps_n = eps0 * 2^(-n).

    The halving rule forces ball(eps_{n+1}) + ball(eps_{n+1}) into
    ball(eps_n) under any translation-invariant metric, and the balls are
    symmetric because the metric is.
    """

    eps0: Fraction

    def __post_init__(self):
        object.__setattr__(self, "eps0", as_fraction(self.eps0))
        if self.eps0 <= 0:
            raise ValueError("base radius must be positive")

    def epsilon(self, n: int) -> Fraction:
        if n < 0:
            raise ValueError("index must be >= 0")
        return self.eps0 / (1 << n)

    def radii(self, n_max: int) -> list[Fraction]:
        """Radii eps_1 .. eps_{n_max}."""
        return [self.epsilon(n) for n in range(1, n_max + 1)]


def round_to_dyadic(value: Fraction, eps: Fraction) -> Fraction:
    """Nearest point of the coarsest binary grid with spacing <= eps.

    Ties round toward zero; dyadic inputs are returned unchanged.  The
    result r always satisfies |value - r| <= eps.
    """
    if eps <= 0:
        raise ValueError("radius must be positive")
    if is_dyadic(value):
        return value
    q = 0
    while Fraction(1, 1 << q) > eps:
        q += 1
    den = 1 << q
    scaled = value * den
    lo = scaled.numerator // scaled.denominator  # floor
    frac = scaled - lo
    half = Fraction(1, 2)
    if frac < half:
        n = lo
    elif frac > half:
        n = lo + 1
    else:
        n = lo if abs(lo) <= abs(lo + 1) else lo + 1  # toward zero
    return Fraction(n, den)


def round_to_dense(v: GroupValue, n: int, chain: NeighborhoodChain) -> GroupValue:
    """Round v into the dense dyadic subgroup at chain radius eps_n.

    Rational and dyadic inputs round on the exact grid; float inputs are
    converted exactly and always grid-rounded (a float's own value is
    dyadic, so the identity shortcut would make float rounding a no-op).
    """
    eps = chain.epsilon(n)
    if v.group in (RATIONALS, DYADICS):
        return GroupValue(DYADICS, round_to_dyadic(v.payload, eps))
    if v.group == APPROX_REALS:
        exact = Fraction(v.payload)
        q = 0
        while Fraction(1, 1 << q) > eps:
            q += 1
        den = 1 << q
        scaled = exact * den
        lo = scaled.numerator // scaled.denominator
        frac = scaled - lo
        half = Fraction(1, 2)
        if frac < half:
            k = lo
        elif frac > half:
            k = lo + 1
        else:
            k = lo if abs(lo) <= abs(lo + 1) else lo + 1
        return GroupValue(DYADICS, Fraction(k, den))
    raise UnsupportedValueError(
        f"round_to_dense supports rational, dyadic, and float values, not {v.group!r}"
    )
