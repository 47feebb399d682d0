"""Cocycles of the group generated by commuting digit flips on {0,1}^m.

The group generated by the digit flips delta_1, delta_2, ... (each an
involution, all commuting) acts on binary prefixes.  Its cocycles are
parametrized by generator families (f_n): each f_n invariant under the
first n flips, with the generator values

    c(delta_n, x) = x_1 f_1(delta_n x) + ... + x_{n-1} f_{n-1}(delta_n x)
                    + (-1)^{x_n} f_n(x)
                    - x_{n-1} f_{n-1}(x) - ... - x_1 f_1(x),

digit coefficients acting as integer multiples and (-1) as negation.
Both directions are implemented: a family yields a cocycle whose defining
identities can be verified exhaustively, and a cocycle oracle yields back
its family by reading generator values on the leading-zeros cylinder and
extending by invariance.

Families here are finite truncations: f_n = 0 for n > N, and the family
depth m must be at least N.  This is a modeling choice of the finite
artifact (it makes the transfer-function limit a finite exact sum), not a
statement about the infinite product space.

Invariance is stored structurally: the table of f_n is indexed only by
digits n+1..m, so the invariance hypothesis cannot be violated after
construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Callable, Iterable, Optional, Sequence

from .space import (
    CylinderFunction,
    DepthError,
    check_bases,
    index_to_prefix,
    prefix_to_index,
    space_size,
    validate_prefix,
)
from .values import (
    DYADICS,
    RATIONALS,
    Group,
    GroupValue,
    NeighborhoodChain,
    UnsupportedValueError,
    group_from_tag,
    round_to_dyadic,
)
from .zcocycles import CoboundaryCertificate, ZCocycle, _spread_bound


class InvarianceError(ValueError):
    """Raised when a generator table depends on a digit it must ignore."""


class OracleInconsistencyError(ValueError):
    """Raised when an evaluation oracle disagrees with its invariance extension."""


class ConjugationError(ValueError):
    """Raised when a permutation does not conjugate the acting system to itself."""


def _check_binary(bases) -> tuple[int, ...]:
    bases = check_bases(bases)
    if any(b != 2 for b in bases):
        raise ValueError("digit flips need an all-binary base vector")
    return bases


@dataclass(frozen=True)
class GeneratorFamily:
    """Finitely many generator functions f_1..f_N at a common depth m >= N.

    ``tables[n-1]`` holds the values of f_n indexed by digits n+1..m (the
    fastest-varying digit first), which encodes invariance under
    delta_1..delta_n structurally.
    """

    bases: tuple[int, ...]
    group: Group
    tables: tuple

    def __post_init__(self):
        bases = _check_binary(self.bases)
        object.__setattr__(self, "bases", bases)
        if len(self.tables) > len(bases):
            raise DepthError(
                f"{len(self.tables)} generators need depth >= {len(self.tables)}, "
                f"got {len(bases)}"
            )
        cleaned = []
        for n, table in enumerate(self.tables, start=1):
            expected = 1 << (len(bases) - n)
            table = tuple(self.group.validate(v) for v in table)
            if len(table) != expected:
                raise ValueError(
                    f"generator {n} table has {len(table)} entries, needs {expected}"
                )
            cleaned.append(table)
        object.__setattr__(self, "tables", tuple(cleaned))

    @property
    def depth(self) -> int:
        return len(self.bases)

    @property
    def count(self) -> int:
        return len(self.tables)

    def generator_payload(self, n: int, index: int):
        """Value of f_n at the prefix with full-depth index ``index``."""
        if not 1 <= n <= self.count:
            raise IndexError(f"generator index {n} out of range 1..{self.count}")
        return self.tables[n - 1][index >> n]

    def generator_function(self, n: int) -> CylinderFunction:
        """f_n decompressed to a full-depth cylinder function."""
        size = 1 << self.depth
        table = tuple(self.generator_payload(n, i) for i in range(size))
        return CylinderFunction(self.bases, self.group, table)

    @classmethod
    def from_cylinder_functions(
        cls, bases, functions: Sequence[CylinderFunction]
    ) -> "GeneratorFamily":
        """Build a family, checking each f_n ignores its first n digits."""
        bases = _check_binary(bases)
        if not functions:
            raise ValueError("family needs at least one generator")
        group = functions[0].group
        tables = []
        for n, f in enumerate(functions, start=1):
            if f.group != group:
                raise ValueError("generators must share one value group")
            full = f.lift(bases).table
            mask = (1 << n) - 1
            for i, v in enumerate(full):
                if v != full[i & ~mask]:
                    raise InvarianceError(
                        f"generator {n} depends on digit <= {n} at prefix "
                        f"{index_to_prefix(i, bases)}"
                    )
            tables.append(tuple(full[h << n] for h in range(1 << (len(bases) - n))))
        return cls(bases, group, tuple(tables))

    def to_json(self):
        return {
            "N": self.count,
            "depth": self.depth,
            "group": self.group.tag,
            "tables": [
                [self.group.payload_to_json(v) for v in table] for table in self.tables
            ],
        }

    @classmethod
    def from_json(cls, obj) -> "GeneratorFamily":
        group = group_from_tag(obj["group"])
        depth = obj["depth"]
        tables = tuple(
            tuple(group.payload_from_json(v) for v in table) for table in obj["tables"]
        )
        if len(tables) != obj.get("N", len(tables)):
            raise ValueError("N field disagrees with the number of tables")
        return cls((2,) * depth, group, tables)


def word_reduce(word: Iterable[int]) -> frozenset[int]:
    """Reduce a flip word to its index set (flips commute and square to 1)."""
    out: set[int] = set()
    for n in word:
        out.symmetric_difference_update({n})
    return frozenset(out)


def word_apply_index(word: Iterable[int], i: int) -> int:
    """Apply a set of digit flips to a full-depth prefix index."""
    for n in word_reduce(word):
        i ^= 1 << (n - 1)
    return i


def word_apply(word: Iterable[int], x: Sequence[int]) -> tuple[int, ...]:
    x = tuple(int(d) for d in x)
    out = list(x)
    for n in word_reduce(word):
        if not 1 <= n <= len(x):
            raise IndexError(f"digit index {n} out of range 1..{len(x)}")
        out[n - 1] ^= 1
    return tuple(out)


@dataclass(frozen=True)
class InvolutionCocycle:
    """The cocycle determined by a generator family."""

    family: GeneratorFamily

    @property
    def group(self) -> Group:
        return self.family.group

    @property
    def bases(self) -> tuple[int, ...]:
        return self.family.bases

    @cached_property
    def _generator_tables(self) -> tuple:
        """Full-depth value tables of c(delta_n, .) for n = 1..N."""
        family = self.family
        group = family.group
        size = 1 << family.depth
        tables = []
        for n in range(1, family.count + 1):
            flip = 1 << (n - 1)
            table = []
            for i in range(size):
                i_flipped = i ^ flip
                acc = family.generator_payload(n, i)
                if (i >> (n - 1)) & 1:
                    acc = group.neg(acc)
                for k in range(1, n):
                    if (i >> (k - 1)) & 1:
                        acc = group.add(acc, family.generator_payload(k, i_flipped))
                        acc = group.sub(acc, family.generator_payload(k, i))
                table.append(acc)
            tables.append(tuple(table))
        return tuple(tables)

    def _index_of(self, x: Sequence[int]) -> int:
        x = validate_prefix(x, self.bases)
        if len(x) != self.family.depth:
            raise DepthError("evaluation needs a full-depth prefix")
        return prefix_to_index(x, self.bases)

    def eval_generator(self, n: int, x: Sequence[int]) -> GroupValue:
        """Generator value c(delta_n, x)."""
        if not 1 <= n <= self.family.count:
            raise IndexError(f"generator index {n} out of range 1..{self.family.count}")
        return GroupValue(self.group, self._generator_tables[n - 1][self._index_of(x)])

    def eval_word_index(self, word: Sequence[int], i: int):
        """Payload of the cocycle at an ordered flip word, via the identity chain."""
        group = self.group
        acc = group.zero()
        for n in reversed(list(word)):
            if not 1 <= n <= self.family.count:
                raise IndexError(
                    f"generator index {n} out of range 1..{self.family.count}"
                )
            acc = group.add(acc, self._generator_tables[n - 1][i])
            i ^= 1 << (n - 1)
        return acc

    def eval_word(self, word, x: Sequence[int]) -> GroupValue:
        """Cocycle value at a word of flips; the empty word gives 0.

        Accepts ordered sequences (which may repeat indices) or reduced
        index sets; all factor orderings of a word agree.
        """
        if isinstance(word, (set, frozenset)):
            word = sorted(word)
        return GroupValue(self.group, self.eval_word_index(list(word), self._index_of(x)))

    def generator_cylinder(self, n: int) -> CylinderFunction:
        """c(delta_n, .) as a cylinder function."""
        return CylinderFunction(self.bases, self.group, self._generator_tables[n - 1])


@dataclass(frozen=True)
class IdentityCheck:
    """Outcome of the defining-identity verification, with a witness on failure."""

    ok: bool
    witness: Optional[dict] = None


GeneratorOracle = Callable[[int, tuple[int, ...]], GroupValue]


def _oracle_tables(oracle, count: int, bases, group: Group):
    if isinstance(oracle, InvolutionCocycle):
        return oracle._generator_tables, oracle.group
    size = space_size(bases)
    tables = []
    for n in range(1, count + 1):
        row = []
        for i in range(size):
            v = oracle(n, index_to_prefix(i, bases))
            if group is None:
                group = v.group
            if v.group != group:
                raise ValueError("oracle values must share one group")
            row.append(v.payload)
        tables.append(tuple(row))
    return tuple(tables), group


def verify_identities(
    cocycle, count: int | None = None, bases=None, group: Group | None = None
) -> IdentityCheck:
    """Exhaustively check c(dn dk, .) = c(dk dn, .) and c(dn^2, .) = 0.

    Accepts an InvolutionCocycle or a raw oracle (n, prefix) -> GroupValue;
    every invariant generator family passes, and a violation is returned
    with its first witness.
    """
    if isinstance(cocycle, InvolutionCocycle):
        count = cocycle.family.count
        bases = cocycle.bases
    elif count is None or bases is None:
        raise ValueError("a raw oracle needs explicit count and bases")
    bases = _check_binary(bases)
    tables, group = _oracle_tables(cocycle, count, bases, group)
    size = space_size(bases)

    def chain(word: Sequence[int], i: int):
        acc = group.zero()
        for n in reversed(word):
            acc = group.add(acc, tables[n - 1][i])
            i ^= 1 << (n - 1)
        return acc

    for i in range(size):
        for n in range(1, count + 1):
            v = chain((n, n), i)
            if not group.values_equal(v, group.zero()):
                return IdentityCheck(
                    False,
                    {
                        "identity": "square",
                        "n": n,
                        "x": index_to_prefix(i, bases),
                        "value": GroupValue(group, v),
                    },
                )
            for k in range(1, n):
                lhs = chain((n, k), i)
                rhs = chain((k, n), i)
                if not group.values_equal(lhs, rhs):
                    return IdentityCheck(
                        False,
                        {
                            "identity": "commutation",
                            "n": n,
                            "k": k,
                            "x": index_to_prefix(i, bases),
                            "lhs": GroupValue(group, lhs),
                            "rhs": GroupValue(group, rhs),
                        },
                    )
    return IdentityCheck(True)


def recover_generators(
    oracle, count: int, bases, group: Group | None = None
) -> GeneratorFamily:
    """Read a generator family back from a cocycle evaluation oracle.

    f_n is the generator value on the cylinder x_1 = ... = x_n = 0,
    extended by invariance.  The whole oracle is then replayed against the
    recovered family; any disagreement means the oracle was not generated
    by an invariant family, and is reported with a witness.
    """
    bases = _check_binary(bases)
    tables, group = _oracle_tables(oracle, count, bases, group)
    depth = len(bases)
    family = GeneratorFamily(
        bases,
        group,
        tuple(
            tuple(tables[n - 1][h << n] for h in range(1 << (depth - n)))
            for n in range(1, count + 1)
        ),
    )
    rebuilt = InvolutionCocycle(family)
    for n in range(1, count + 1):
        expected = rebuilt._generator_tables[n - 1]
        for i, v in enumerate(tables[n - 1]):
            if not group.values_equal(v, expected[i]):
                raise OracleInconsistencyError(
                    f"oracle disagrees with its invariance extension at "
                    f"n={n}, x={index_to_prefix(i, bases)}: "
                    f"{v!r} vs {expected[i]!r}"
                )
    return family


def psi(n: int, family: GeneratorFamily, x: Sequence[int]) -> GroupValue:
    """Signed digit-weighted partial sum -x_n f_n(x) - ... - x_1 f_1(x).

    psi_0 = 0, and psi_n(x) = psi_{n-1}(x) - x_n f_n(x).
    """
    if not 0 <= n <= family.count:
        raise IndexError(f"index {n} out of range 0..{family.count}")
    x = validate_prefix(x, family.bases)
    if len(x) != family.depth:
        raise DepthError("psi needs a full-depth prefix")
    i = prefix_to_index(x, family.bases)
    group = family.group
    acc = group.zero()
    for k in range(1, n + 1):
        if (i >> (k - 1)) & 1:
            acc = group.sub(acc, family.generator_payload(k, i))
    return GroupValue(group, acc)


@dataclass(frozen=True)
class TransferReport:
    """Result of approximating a family into the dyadic subgroup.

    ``rounded_family`` generates the cohomologous cocycle beta; the
    transfer g satisfies alpha(w, x) = g(wx) + beta(w, x) - g(x) exactly
    for every flip word and prefix, and |g| is bounded by the sum of the
    per-index rounding radii (at most the chain's base radius).
    """

    family: GeneratorFamily
    rounded_family: GeneratorFamily
    transfer: CylinderFunction
    radii: tuple[Fraction, ...]
    radius_bound: Fraction

    @property
    def beta(self) -> InvolutionCocycle:
        return InvolutionCocycle(self.rounded_family)

    def to_json(self):
        return {
            "rounded": self.rounded_family.to_json(),
            "transfer": self.transfer.to_json(),
            "radii": [str(r) for r in self.radii],
            "bound": str(self.radius_bound),
        }


def h_approximate(
    family: GeneratorFamily, chain: NeighborhoodChain, verify: bool = True
) -> TransferReport:
    """Replace a rational family by a dyadic-valued cohomologous one.

    Each f_n is rounded valuewise at chain radius eps_n (rounding cannot
    break invariance), and the transfer is the finite sum
    g(x) = sum_n x_n (f_n(x) - fbar_n(x)).  With ``verify=True`` the
    cohomology equation is checked exhaustively over all flip words and
    prefixes; the check is a theorem for invariant families, so a failure
    raises.
    """
    if family.group not in (RATIONALS, DYADICS):
        raise UnsupportedValueError(
            "dyadic approximation needs a rational-valued family"
        )
    group = RATIONALS
    rounded_tables = []
    radii = []
    for n in range(1, family.count + 1):
        eps = chain.epsilon(n)
        radii.append(eps)
        rounded_tables.append(
            tuple(round_to_dyadic(Fraction(v), eps) for v in family.tables[n - 1])
        )
    rounded = GeneratorFamily(family.bases, group, tuple(rounded_tables))
    base = (
        family
        if family.group == group
        else GeneratorFamily(family.bases, group, family.tables)
    )

    size = 1 << family.depth
    g_table = []
    for i in range(size):
        acc = Fraction(0)
        for n in range(1, family.count + 1):
            if (i >> (n - 1)) & 1:
                acc += base.generator_payload(n, i) - rounded.generator_payload(n, i)
        g_table.append(acc)
    transfer = CylinderFunction(family.bases, group, tuple(g_table))
    report = TransferReport(
        base, rounded, transfer, tuple(radii), sum(radii, Fraction(0))
    )

    if verify:
        alpha = InvolutionCocycle(base)
        beta = report.beta
        bound = report.radius_bound
        if bound > chain.eps0:
            raise AssertionError("radius bound exceeds the base radius")
        for i, g in enumerate(g_table):
            if abs(g) > bound:
                raise AssertionError(
                    f"transfer value {g} at {index_to_prefix(i, family.bases)} "
                    f"exceeds the bound {bound}"
                )
        indices = list(range(1, family.count + 1))
        for bits in range(1 << family.count):
            word = [n for n in indices if (bits >> (n - 1)) & 1]
            for i in range(size):
                wi = word_apply_index(word, i)
                lhs = alpha.eval_word_index(word, i)
                rhs = g_table[wi] + beta.eval_word_index(word, i) - g_table[i]
                if lhs != rhs:
                    raise AssertionError(
                        f"cohomology equation failed at word {word}, "
                        f"x={index_to_prefix(i, family.bases)}"
                    )
    return report


# ---------------------------------------------------------------------------
# Cocycle transport along prefix permutations (finite-quotient form)


def _permutation_of(phi, size: int) -> tuple[int, ...]:
    if hasattr(phi, "permutation"):
        perm = tuple(phi.permutation)
    else:
        perm = tuple(phi)
    if sorted(perm) != list(range(size)):
        raise ConjugationError("phi is not a permutation of the prefix space")
    return perm


def _inverse(perm: tuple[int, ...]) -> tuple[int, ...]:
    inv = [0] * len(perm)
    for i, p in enumerate(perm):
        inv[p] = i
    return tuple(inv)


def transport(cocycle, phi):
    """Transport a cocycle along a prefix permutation.

    The transported cocycle is a'(gamma, y) = a(gamma, phi^{-1} y), which
    is again a cocycle of the same acting system precisely when phi
    commutes with it; non-commuting permutations conjugate onto a
    different realization and are rejected.  Coboundaries transport to
    coboundaries with transfer c(phi^{-1} y), and the cycle sum is
    preserved.
    """
    if isinstance(cocycle, ZCocycle):
        model = cocycle.model
        size = model.size
        perm = _permutation_of(phi, size)
        for i in range(size):
            if perm[(i + 1) % size] != (perm[i] + 1) % size:
                raise ConjugationError(
                    "phi does not commute with the odometer; conjugation "
                    "leaves the model's transformation"
                )
        inv = _inverse(perm)
        table = cocycle.generator.lift(model.bases).table
        return ZCocycle(
            model,
            CylinderFunction(
                model.bases, cocycle.group, tuple(table[inv[i]] for i in range(size))
            ),
        )
    if isinstance(cocycle, InvolutionCocycle):
        family = cocycle.family
        size = 1 << family.depth
        perm = _permutation_of(phi, size)
        for n in range(1, family.depth + 1):
            flip = 1 << (n - 1)
            if any(perm[i ^ flip] != perm[i] ^ flip for i in range(size)):
                raise ConjugationError(
                    f"phi does not commute with the digit-{n} flip"
                )
        inv = _inverse(perm)
        functions = []
        for n in range(1, family.count + 1):
            full = [family.generator_payload(n, inv[i]) for i in range(size)]
            functions.append(CylinderFunction(family.bases, family.group, tuple(full)))
        return InvolutionCocycle(
            GeneratorFamily.from_cylinder_functions(family.bases, functions)
        )
    raise TypeError(f"cannot transport {cocycle!r}")


def transport_certificate(
    certificate: CoboundaryCertificate, phi
) -> CoboundaryCertificate:
    """Transport a coboundary certificate: c -> c(phi^{-1} .), re-anchored at 0."""
    model = certificate.model
    size = model.size
    perm = _permutation_of(phi, size)
    inv = _inverse(perm)
    group = certificate.generator.group
    c = certificate.transfer.lift(model.bases).table
    moved = [c[inv[i]] for i in range(size)]
    anchor = moved[0]
    moved = tuple(group.sub(v, anchor) for v in moved)
    f = certificate.generator.lift(model.bases).table
    moved_generator = tuple(f[inv[i]] for i in range(size))
    return CoboundaryCertificate(
        model,
        CylinderFunction(model.bases, group, moved_generator),
        CylinderFunction(model.bases, group, moved),
        _spread_bound(moved, group),
    )
