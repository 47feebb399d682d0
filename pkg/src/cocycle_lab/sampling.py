"""Seeded random instances for experiment suites and tests.

All randomness flows through an explicit ``random.Random`` so that a
config seed fixes every sampled object exactly.
"""

from __future__ import annotations

import random
from fractions import Fraction
from typing import Sequence

from .involution_cocycles import GeneratorFamily
from .space import BernoulliMeasure, CylinderFunction, space_size
from .values import (
    APPROX_REALS,
    DYADICS,
    INTEGERS,
    RATIONALS,
    Group,
    ModularGroup,
    RationalVectorGroup,
)


def rational(rng: random.Random, max_num: int = 8, max_den: int = 8) -> Fraction:
    return Fraction(rng.randint(-max_num, max_num), rng.randint(1, max_den))


def payload(rng: random.Random, group: Group, span: int = 8):
    if group == INTEGERS:
        return rng.randint(-span // 2, span // 2)
    if group == RATIONALS:
        return rational(rng, span, span)
    if group == DYADICS:
        return Fraction(rng.randint(-span, span), 1 << rng.randint(0, 3))
    if group == APPROX_REALS:
        return rng.uniform(-float(span), float(span))
    if isinstance(group, ModularGroup):
        return rng.randrange(group.modulus)
    if isinstance(group, RationalVectorGroup):
        return tuple(rational(rng, span, span) for _ in range(group.dim))
    raise TypeError(f"no sampler for group {group!r}")


def cylinder_function(
    rng: random.Random, bases: Sequence[int], group: Group, span: int = 8
) -> CylinderFunction:
    bases = tuple(bases)
    return CylinderFunction(
        bases, group, tuple(payload(rng, group, span) for _ in range(space_size(bases)))
    )


def small_integer_function(
    rng: random.Random, bases: Sequence[int], lo: int = -1, hi: int = 1
) -> CylinderFunction:
    bases = tuple(bases)
    return CylinderFunction(
        bases, INTEGERS, tuple(rng.randint(lo, hi) for _ in range(space_size(bases)))
    )


def coboundary_generator(
    rng: random.Random, bases: Sequence[int], group: Group, span: int = 8
) -> tuple[CylinderFunction, CylinderFunction]:
    """A generator that is a coboundary by construction, with its transfer."""
    bases = tuple(bases)
    transfer = cylinder_function(rng, bases, group, span)
    n = space_size(bases)
    table = tuple(
        group.sub(transfer.table[(i + 1) % n], transfer.table[i]) for i in range(n)
    )
    return CylinderFunction(bases, group, table), transfer


def invariant_family(
    rng: random.Random,
    depth: int,
    count: int,
    group: Group,
    span: int = 8,
) -> GeneratorFamily:
    """A generator family with the structural invariance built in."""
    if count > depth:
        raise ValueError("family size cannot exceed the depth")
    tables = tuple(
        tuple(payload(rng, group, span) for _ in range(1 << (depth - n)))
        for n in range(1, count + 1)
    )
    return GeneratorFamily((2,) * depth, group, tables)


def bernoulli_measure(rng: random.Random, bases: Sequence[int]) -> BernoulliMeasure:
    """Product measure with random positive rational weights."""
    bases = tuple(bases)
    rows = []
    for b in bases:
        cuts = [rng.randint(1, 6) for _ in range(b)]
        total = sum(cuts)
        rows.append(tuple(Fraction(c, total) for c in cuts))
    return BernoulliMeasure(bases, tuple(rows))
