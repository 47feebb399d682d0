"""Finite-depth cylinder model of Cantor space.

Points of the product space prod_i {0,...,p_i - 1} are truncated to their
first k digits ("prefixes").  A prefix is a tuple (x_1, ..., x_k) with x_1
the fastest-varying digit; the induced table index is the mixed-radix
number x_1 + p_1*(x_2 + p_2*(...)), which turns the odometer into a +1
counter on indices.

The module houses cylinder functions (total functions given by value
tables over depth-m prefixes), exact Borel probability measures on the
prefix space, and the convergence-in-measure functionals tau1/tau3/tau4
together with the uniform-topology distance on finite-quotient
automorphisms.

A caveat on scope: the tau functionals quantify over finitely many
user-supplied measures.  Closeness certified against a finite measure
family is exactly that; no claim is made about the full topologies, which
quantify over all Borel probability measures.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

from .values import (
    Group,
    GroupMismatchError,
    GroupValue,
    as_fraction,
    group_from_tag,
)

#: Largest allowed number of depth-k prefixes (guards machine arithmetic).
MAX_POINTS = 1 << 20


class DepthError(ValueError):
    """Raised when a prefix or table depth does not fit an operation."""


def check_bases(bases: Sequence[int]) -> tuple[int, ...]:
    bases = tuple(int(b) for b in bases)
    if not bases:
        raise ValueError("base vector must be nonempty")
    if any(b < 2 for b in bases):
        raise ValueError(f"every base must be >= 2, got {bases}")
    n = 1
    for b in bases:
        n *= b
        if n > MAX_POINTS:
            raise ValueError(f"prefix space larger than {MAX_POINTS} points")
    return bases


def space_size(bases: Sequence[int]) -> int:
    n = 1
    for b in bases:
        n *= b
    return n


def validate_prefix(x: Sequence[int], bases: Sequence[int]) -> tuple[int, ...]:
    """Check digit bounds of x against the leading coordinates of bases."""
    x = tuple(int(d) for d in x)
    if len(x) > len(bases):
        raise DepthError(f"prefix of depth {len(x)} exceeds model depth {len(bases)}")
    for i, (d, b) in enumerate(zip(x, bases)):
        if not 0 <= d < b:
            raise DepthError(f"digit {d} at coordinate {i + 1} out of range [0,{b})")
    return x


def prefix_to_index(x: Sequence[int], bases: Sequence[int]) -> int:
    """Mixed-radix index with x_1 fastest."""
    i = 0
    for d, b in zip(reversed(x[: len(bases)]), reversed(bases[: len(x)])):
        i = i * b + d
    return i


def index_to_prefix(i: int, bases: Sequence[int]) -> tuple[int, ...]:
    digits = []
    for b in bases:
        i, d = divmod(i, b)
        digits.append(d)
    return tuple(digits)


def iter_prefixes(bases: Sequence[int]) -> Iterator[tuple[int, ...]]:
    """All depth-k prefixes in table-index order."""
    for i in range(space_size(bases)):
        yield index_to_prefix(i, bases)


@dataclass(frozen=True)
class CylinderFunction:
    """A depth-m function given by a table of group payloads.

    ``table[i]`` is the value on the depth-m cylinder whose prefix has
    index ``i``.  Evaluating at deeper prefixes projects onto the first m
    digits, so lifting and then evaluating agrees with evaluating
    directly (refinement consistency).
    """

    bases: tuple[int, ...]
    group: Group
    table: tuple

    def __post_init__(self):
        object.__setattr__(self, "bases", check_bases(self.bases))
        tab = tuple(self.group.validate(v) for v in self.table)
        if len(tab) != space_size(self.bases):
            raise ValueError(
                f"table length {len(tab)} != {space_size(self.bases)} prefixes"
            )
        object.__setattr__(self, "table", tab)

    @classmethod
    def constant(cls, bases, group: Group, payload) -> "CylinderFunction":
        bases = check_bases(bases)
        return cls(bases, group, (group.validate(payload),) * space_size(bases))

    @classmethod
    def from_values(cls, bases, group: Group, values: Iterable) -> "CylinderFunction":
        payloads = [
            v.payload if isinstance(v, GroupValue) else v for v in values
        ]
        return cls(tuple(bases), group, tuple(payloads))

    @property
    def depth(self) -> int:
        return len(self.bases)

    @property
    def size(self) -> int:
        return len(self.table)

    def value_at(self, index: int):
        return self.table[index]

    def eval(self, x: Sequence[int]) -> GroupValue:
        """Evaluate at a prefix of depth >= the table depth."""
        if len(x) < self.depth:
            raise DepthError(
                f"need a prefix of depth >= {self.depth}, got depth {len(x)}"
            )
        validate_prefix(x[: self.depth], self.bases)
        return GroupValue(self.group, self.table[prefix_to_index(x, self.bases)])

    def lift(self, bases: Sequence[int]) -> "CylinderFunction":
        """Reindex over a deeper base vector extending this one.

        The lifted table is this table tiled, which is pointwise equality
        of functions in x_1-fastest order.
        """
        bases = check_bases(bases)
        if len(bases) < self.depth or bases[: self.depth] != self.bases:
            raise DepthError(f"{bases} does not extend {self.bases}")
        reps = space_size(bases) // self.size
        return CylinderFunction(bases, self.group, self.table * reps)

    def _aligned(self, other: "CylinderFunction"):
        if self.group != other.group:
            raise GroupMismatchError(f"{self.group!r} vs {other.group!r}")
        if self.depth >= other.depth:
            return self, other.lift(self.bases)
        return self.lift(other.bases), other

    def __add__(self, other: "CylinderFunction") -> "CylinderFunction":
        f, g = self._aligned(other)
        add = self.group.add
        return CylinderFunction(
            f.bases, f.group, tuple(add(a, b) for a, b in zip(f.table, g.table))
        )

    def __sub__(self, other: "CylinderFunction") -> "CylinderFunction":
        f, g = self._aligned(other)
        sub = self.group.sub
        return CylinderFunction(
            f.bases, f.group, tuple(sub(a, b) for a, b in zip(f.table, g.table))
        )

    def __neg__(self) -> "CylinderFunction":
        neg = self.group.neg
        return CylinderFunction(self.bases, self.group, tuple(map(neg, self.table)))

    def to_json(self):
        return {
            "bases": list(self.bases),
            "depth": self.depth,
            "group": self.group.tag,
            "table": [self.group.payload_to_json(v) for v in self.table],
        }

    @classmethod
    def from_json(cls, obj) -> "CylinderFunction":
        group = group_from_tag(obj["group"])
        bases = tuple(obj["bases"])
        if obj.get("depth", len(bases)) != len(bases):
            raise ValueError("depth field disagrees with bases length")
        return cls(
            bases, group, tuple(group.payload_from_json(v) for v in obj["table"])
        )


# ---------------------------------------------------------------------------
# Measures


class Measure:
    """Exact Borel probability measure evaluated on cylinder sets.

    ``mass(x)`` is the measure of the depth-len(x) cylinder [x]; it is
    defined for any depth up to the measure's base vector length.
    """

    bases: tuple[int, ...]

    def mass(self, x: Sequence[int]) -> Fraction:
        raise NotImplementedError

    def to_json(self):
        raise NotImplementedError


@dataclass(frozen=True)
class BernoulliMeasure(Measure):
    """Product measure with per-coordinate rational weight vectors."""

    bases: tuple[int, ...]
    weights: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        bases = check_bases(self.bases)
        object.__setattr__(self, "bases", bases)
        if len(self.weights) != len(bases):
            raise ValueError("need one weight vector per coordinate")
        rows = []
        for b, row in zip(bases, self.weights):
            row = tuple(as_fraction(w) for w in row)
            if len(row) != b:
                raise ValueError(f"weight vector {row} does not match base {b}")
            if any(w < 0 for w in row) or sum(row) != 1:
                raise ValueError(f"weights {row} must be nonnegative and sum to 1")
            rows.append(row)
        object.__setattr__(self, "weights", tuple(rows))

    @classmethod
    def uniform(cls, bases) -> "BernoulliMeasure":
        """Fair-coin measure: weight 1/p_i per digit (Bernoulli(1/2) on base 2)."""
        bases = check_bases(bases)
        return cls(bases, tuple((Fraction(1, b),) * b for b in bases))

    def mass(self, x: Sequence[int]) -> Fraction:
        x = validate_prefix(x, self.bases)
        m = Fraction(1)
        for i, d in enumerate(x):
            m *= self.weights[i][d]
        return m

    def to_json(self):
        return {
            "kind": "bernoulli",
            "bases": list(self.bases),
            "weights": [[str(w) for w in row] for row in self.weights],
        }


@dataclass(frozen=True)
class MarkovMeasure(Measure):
    """Chain measure: rational initial distribution and transition rows."""

    bases: tuple[int, ...]
    initial: tuple[Fraction, ...]
    transitions: tuple

    def __post_init__(self):
        bases = check_bases(self.bases)
        object.__setattr__(self, "bases", bases)
        init = tuple(as_fraction(w) for w in self.initial)
        if len(init) != bases[0] or any(w < 0 for w in init) or sum(init) != 1:
            raise ValueError("initial distribution must be a probability vector")
        object.__setattr__(self, "initial", init)
        mats = []
        for step in range(len(bases) - 1):
            mat = self.transitions[step]
            rows = []
            if len(mat) != bases[step]:
                raise ValueError(f"transition {step} needs {bases[step]} rows")
            for row in mat:
                row = tuple(as_fraction(w) for w in row)
                if len(row) != bases[step + 1]:
                    raise ValueError("transition row length mismatch")
                if any(w < 0 for w in row) or sum(row) != 1:
                    raise ValueError(f"transition row {row} must sum to 1")
                rows.append(row)
            mats.append(tuple(rows))
        object.__setattr__(self, "transitions", tuple(mats))

    @classmethod
    def homogeneous(cls, bases, initial, matrix) -> "MarkovMeasure":
        bases = check_bases(bases)
        return cls(bases, tuple(initial), tuple([matrix] * (len(bases) - 1)))

    def mass(self, x: Sequence[int]) -> Fraction:
        x = validate_prefix(x, self.bases)
        if not x:
            return Fraction(1)
        m = self.initial[x[0]]
        for i in range(len(x) - 1):
            m *= self.transitions[i][x[i]][x[i + 1]]
        return m

    def to_json(self):
        return {
            "kind": "markov",
            "bases": list(self.bases),
            "initial": [str(w) for w in self.initial],
            "transitions": [
                [[str(w) for w in row] for row in mat] for mat in self.transitions
            ],
        }


@dataclass(frozen=True)
class DiracMeasure(Measure):
    """Point mass at a prefix extended by the all-zeros tail."""

    bases: tuple[int, ...]
    point: tuple[int, ...]

    def __post_init__(self):
        bases = check_bases(self.bases)
        object.__setattr__(self, "bases", bases)
        object.__setattr__(self, "point", validate_prefix(self.point, bases))

    def mass(self, x: Sequence[int]) -> Fraction:
        x = validate_prefix(x, self.bases)
        for i, d in enumerate(x):
            expected = self.point[i] if i < len(self.point) else 0
            if d != expected:
                return Fraction(0)
        return Fraction(1)

    def to_json(self):
        return {"kind": "dirac", "bases": list(self.bases), "point": list(self.point)}


@dataclass(frozen=True)
class MixtureMeasure(Measure):
    """Rational convex combination of measures on one base vector."""

    components: tuple
    weights: tuple[Fraction, ...]

    def __post_init__(self):
        if not self.components:
            raise ValueError("mixture needs at least one component")
        w = tuple(as_fraction(x) for x in self.weights)
        if len(w) != len(self.components):
            raise ValueError("one weight per component")
        if any(x < 0 for x in w) or sum(w) != 1:
            raise ValueError("mixture weights must be nonnegative and sum to 1")
        bases = self.components[0].bases
        if any(c.bases != bases for c in self.components):
            raise ValueError("mixture components must share one base vector")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "components", tuple(self.components))

    @property
    def bases(self) -> tuple[int, ...]:  # type: ignore[override]
        return self.components[0].bases

    def mass(self, x: Sequence[int]) -> Fraction:
        return sum(
            (w * c.mass(x) for w, c in zip(self.weights, self.components)),
            Fraction(0),
        )

    def to_json(self):
        return {
            "kind": "mixture",
            "weights": [str(w) for w in self.weights],
            "components": [c.to_json() for c in self.components],
        }


def measure_from_json(obj) -> Measure:
    kind = obj.get("kind")
    if kind == "bernoulli":
        return BernoulliMeasure(
            tuple(obj["bases"]),
            tuple(tuple(Fraction(w) for w in row) for row in obj["weights"]),
        )
    if kind == "markov":
        return MarkovMeasure(
            tuple(obj["bases"]),
            tuple(Fraction(w) for w in obj["initial"]),
            tuple(
                tuple(tuple(Fraction(w) for w in row) for row in mat)
                for mat in obj["transitions"]
            ),
        )
    if kind == "dirac":
        return DiracMeasure(tuple(obj["bases"]), tuple(obj["point"]))
    if kind == "mixture":
        return MixtureMeasure(
            tuple(measure_from_json(c) for c in obj["components"]),
            tuple(Fraction(w) for w in obj["weights"]),
        )
    raise ValueError(f"unknown measure record {obj!r}")


def measure_of_cylinder_set(mu: Measure, prefixes: Iterable[Sequence[int]]) -> Fraction:
    """Exact measure of a finite disjoint union of same-depth cylinders."""
    prefixes = [tuple(x) for x in prefixes]
    if not prefixes:
        return Fraction(0)
    depth = len(prefixes[0])
    if any(len(x) != depth for x in prefixes):
        raise DepthError("cylinder set must consist of same-depth prefixes")
    if len(set(prefixes)) != len(prefixes):
        raise ValueError("cylinder set contains repeated prefixes")
    return sum((mu.mass(x) for x in prefixes), Fraction(0))


# ---------------------------------------------------------------------------
# Convergence-in-measure functionals


def _difference_metrics(f: CylinderFunction, g: CylinderFunction):
    f, g = f._aligned(g)
    met = f.group.metric
    return f.bases, [met(a, b) for a, b in zip(f.table, g.table)]


def exceedance_prefixes(f: CylinderFunction, g: CylinderFunction, eps) -> list:
    """Prefixes of the set {x : |f(x) - g(x)| > eps}, strict inequality."""
    bases, diffs = _difference_metrics(f, g)
    return [index_to_prefix(i, bases) for i, d in enumerate(diffs) if d > eps]


def tau1_membership(
    f: CylinderFunction,
    g: CylinderFunction,
    measures: Sequence[Measure],
    eps,
    delta,
) -> bool:
    """True iff every measure gives the exceedance set mass strictly below delta."""
    eps = as_fraction(eps) if f.group.exact else eps
    delta = as_fraction(delta)
    exceed = exceedance_prefixes(f, g, eps)
    return all(measure_of_cylinder_set(mu, exceed) < delta for mu in measures)


def tau3_functional(f: CylinderFunction, g: CylinderFunction, mu: Measure) -> Fraction:
    """Integral of min(|f - g|, 1) as a finite exact sum over cylinders."""
    bases, diffs = _difference_metrics(f, g)
    one = Fraction(1)
    total = Fraction(0)
    for i, d in enumerate(diffs):
        total += mu.mass(index_to_prefix(i, bases)) * (d if d < one else one)
    return total


def tau4_functional(f: CylinderFunction, g: CylinderFunction, mu: Measure) -> Fraction:
    """Integral of |f - g| / (1 + |f - g|)."""
    bases, diffs = _difference_metrics(f, g)
    total = Fraction(0)
    for i, d in enumerate(diffs):
        total += mu.mass(index_to_prefix(i, bases)) * d / (1 + d)
    return total


def _resolve_permutation(t):
    if hasattr(t, "permutation"):
        perm = tuple(t.permutation)
        bases = getattr(t, "bases", None)
        if bases is None:
            bases = t.model.bases
        return perm, tuple(bases)
    perm, bases = t
    return tuple(perm), tuple(bases)


def aut_distance(s, t, mu: Measure) -> Fraction:
    """Uniform-topology distance: the measure of {x : Sx != Tx}.

    Arguments may be anything exposing ``permutation`` and ``bases`` (or
    ``model.bases``) -- e.g. odometers and full-group elements -- or raw
    ``(permutation, bases)`` pairs acting on one prefix space.
    """
    perm_s, bases_s = _resolve_permutation(s)
    perm_t, bases_t = _resolve_permutation(t)
    if bases_s != bases_t or len(perm_s) != len(perm_t):
        raise DepthError("automorphisms act on different prefix spaces")
    disagree = [
        index_to_prefix(i, bases_s)
        for i, (a, b) in enumerate(zip(perm_s, perm_t))
        if a != b
    ]
    return measure_of_cylinder_set(mu, disagree) if disagree else Fraction(0)


def convergence_rows(
    functions: Sequence[CylinderFunction],
    target: CylinderFunction,
    mu: Measure,
    eps,
    delta,
) -> list[dict]:
    """Rows (n, tau1, tau3, tau4) for a sequence of functions against a target.

    tau1 is the 0/1 membership indicator at the supplied (eps, delta).
    """
    rows = []
    for n, fn in enumerate(functions, start=1):
        rows.append(
            {
                "n": n,
                "tau1": int(tau1_membership(fn, target, [mu], eps, delta)),
                "tau3": tau3_functional(fn, target, mu),
                "tau4": tau4_functional(fn, target, mu),
            }
        )
    return rows


def convergence_csv(rows: Sequence[dict]) -> str:
    """Render functional-vs-n rows as CSV with exact fractions."""
    lines = ["n,tau1,tau3,tau4"]
    for row in rows:
        lines.append(f"{row['n']},{row['tau1']},{row['tau3']},{row['tau4']}")
    return "\n".join(lines) + "\n"
