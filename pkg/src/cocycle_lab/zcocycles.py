"""Cocycles of the Z-action generated by the odometer.

A cocycle of the cyclic action is completely determined by its generating
function f(x) = a(1, x); evaluation sums f along forward or backward
orbit segments.  On the single N-cycle quotient this makes everything
exactly computable from one period of partial sums:

* a generator is a coboundary iff its sum over the full cycle vanishes,
  and then the transfer function is the anchored partial-sum table
  (a certificate that can be checked exactly on every prefix);
* every marker set yields a periodic approximation whose cocycles are
  coboundaries with an explicit tower-level transfer;
* the induced coboundary sequence F_n agrees with f off the top sets, so
  its tau3-distance to f is bounded by the top-set measure (2^-n under the
  fair-coin measure on the 2-odometer);
* boundedness of two-sided orbit sums characterizes coboundaries, with
  the certificate spread bound as the explicit constant.

Sign convention throughout: a coboundary generator is f(x) = c(Tx) - c(x),
and every construction is normalized to it (transfers built from periodic
approximations are negated accordingly).  Transfer functions are anchored
to 0 at the all-zeros prefix; on a single cycle they are unique up to an
additive constant, so the anchor makes them deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Optional, Sequence

from .dynamics import (
    FullGroupElement,
    MarkerSequence,
    Odometer,
    TowerDecomposition,
    periodic_approx,
    towers_from_marker,
)
from .space import (
    CylinderFunction,
    DepthError,
    Measure,
    index_to_prefix,
    prefix_to_index,
    tau3_functional,
    validate_prefix,
)
from .values import GroupValue


class PeriodicityError(ValueError):
    """Raised when a transfer over a periodic element cannot exist."""


@dataclass(frozen=True)
class ZCocycle:
    """The cocycle generated by a cylinder function over the odometer."""

    model: Odometer
    generator: CylinderFunction

    def __post_init__(self):
        if (
            self.generator.depth > self.model.depth
            or self.generator.bases != self.model.bases[: self.generator.depth]
        ):
            raise DepthError("generator does not live on the model's prefixes")

    @property
    def group(self):
        return self.generator.group

    @cached_property
    def _table(self) -> tuple:
        return self.generator.lift(self.model.bases).table

    @cached_property
    def _partial(self) -> tuple:
        """Partial sums C[t] = f(0) + f(1) + ... + f(t-1) for t = 0..N-1."""
        group = self.group
        sums = [group.zero()]
        acc = group.zero()
        for v in self._table[:-1]:
            acc = group.add(acc, v)
            sums.append(acc)
        return tuple(sums)

    @cached_property
    def cycle_sum_payload(self):
        group = self.group
        return group.add(self._partial[-1], self._table[-1])

    @property
    def cycle_sum(self) -> GroupValue:
        """Sum of the generator over one full period of the cycle."""
        return GroupValue(self.group, self.cycle_sum_payload)

    def _running(self, t: int):
        """Signed sum of the generator over orbit positions 0 .. t-1."""
        cycles, r = divmod(t, self.model.size)
        base = self._partial[r]
        if cycles:
            return self.group.add(base, self.group.scale(self.cycle_sum_payload, cycles))
        return base

    def evaluate_index(self, j: int, i: int):
        return self.group.sub(self._running(i + j), self._running(i))

    def evaluate(self, j: int, x: Sequence[int]) -> GroupValue:
        """Cocycle value a(j, x) for any integer j; a(0, x) = 0."""
        x = validate_prefix(x, self.model.bases)
        if len(x) != self.model.depth:
            raise DepthError("cocycle evaluation needs a full-depth prefix")
        i = prefix_to_index(x, self.model.bases)
        return GroupValue(self.group, self.evaluate_index(j, i))

    def iterate_function(self, j: int) -> CylinderFunction:
        """The map x -> a(j, x) as a full-depth cylinder function."""
        table = tuple(self.evaluate_index(j, i) for i in range(self.model.size))
        return CylinderFunction(self.model.bases, self.group, table)


def _spread_bound(values, group):
    """Metric diameter of a value set; max - min on totally ordered payloads."""
    distinct = list(dict.fromkeys(values))
    if group.tag in ("int", "rat", "dy", "real"):
        return group.metric(max(distinct), min(distinct))
    best = 0 if group.exact else 0.0
    for i, a in enumerate(distinct):
        for b in distinct[i + 1 :]:
            d = group.metric(a, b)
            if d > best:
                best = d
    return best


@dataclass(frozen=True)
class CoboundaryCertificate:
    """Transfer function witnessing f(x) = c(Tx) - c(x) on every prefix.

    The spread bound dominates the metric size of every two-sided orbit
    sum of the generator, since such a sum telescopes to a difference of
    two transfer values.
    """

    model: Odometer
    generator: CylinderFunction
    transfer: CylinderFunction
    spread_bound: object

    def verify(self) -> bool:
        group = self.generator.group
        f = self.generator.lift(self.model.bases).table
        c = self.transfer.lift(self.model.bases).table
        n = self.model.size
        return all(
            group.values_equal(group.sub(c[(i + 1) % n], c[i]), f[i]) for i in range(n)
        )

    def to_json(self):
        bound = self.spread_bound
        return {
            "transfer": self.transfer.to_json(),
            "M": str(bound) if isinstance(bound, (int, Fraction)) else bound,
        }


def coboundary_solve(a: ZCocycle) -> Optional[CoboundaryCertificate]:
    """Decide the coboundary equation, returning a certificate when solvable.

    A certificate exists iff the cycle sum vanishes; the transfer is then
    the table of partial sums anchored at the all-zeros prefix.  A None
    result is a completeness statement: the cocycle grows linearly along
    the cycle (a(tN, x) is t times the nonzero cycle sum).
    """
    group = a.group
    if not group.values_equal(a.cycle_sum_payload, group.zero()):
        return None
    transfer = CylinderFunction(a.model.bases, group, a._partial)
    return CoboundaryCertificate(
        a.model, a.generator, transfer, _spread_bound(a._partial, group)
    )


def extend_to_full_group(a: ZCocycle, element: FullGroupElement) -> CylinderFunction:
    """The extension x -> a(j_R(x), x) along a full-group element R."""
    if element.model != a.model:
        raise DepthError("full-group element lives on a different model")
    table = tuple(
        a.evaluate_index(element.jump_at(i), i) for i in range(a.model.size)
    )
    return CylinderFunction(a.model.bases, a.group, table)


def periodic_coboundary(
    element: FullGroupElement,
    a: ZCocycle,
    towers: TowerDecomposition | None = None,
) -> CylinderFunction:
    """Transfer function for the cocycle restricted to a periodic element.

    Returns g with a-hat(P^n, x) = g(P^n x) - g(x) for every n and prefix,
    where a-hat is the full-group extension of a; g vanishes on the orbit
    base points (tower bases when a decomposition is supplied, otherwise
    the minimal index of each orbit).  Raises PeriodicityError when an
    orbit's accumulated jump wraps the cycle with a nonzero cycle sum, in
    which case no transfer exists.
    """
    if element.model != a.model:
        raise DepthError("full-group element lives on a different model")
    group = a.group
    size = a.model.size
    if towers is not None:
        bases_ = towers.base_indices()
    else:
        perm = element.permutation
        seen = [False] * size
        bases_ = []
        for start in range(size):
            if seen[start]:
                continue
            orbit_min = start
            j = start
            while not seen[j]:
                seen[j] = True
                j = perm[j]
                orbit_min = min(orbit_min, j)
            bases_.append(orbit_min)
    table = [None] * size
    perm = element.permutation
    for base in bases_:
        if table[base] is not None:
            raise PeriodicityError(f"two base points on one orbit (index {base})")
        acc = group.zero()
        table[base] = acc
        j = base
        while True:
            acc = group.add(acc, a.evaluate_index(element.jump_at(j), j))
            j = perm[j]
            if j == base:
                break
            if table[j] is not None:
                raise PeriodicityError(f"two base points on one orbit (index {j})")
            table[j] = acc
        if not group.values_equal(acc, group.zero()):
            raise PeriodicityError(
                f"orbit of index {base} wraps the cycle with holonomy {acc!r}; "
                "no transfer exists"
            )
    if any(v is None for v in table):
        raise PeriodicityError("base points do not meet every orbit")
    return CylinderFunction(a.model.bases, group, tuple(table))


def density_sequence(
    a: ZCocycle, markers: MarkerSequence, n: int
) -> CylinderFunction:
    """The n-th coboundary approximant F_n of the generator.

    F_n is the coboundary generated by the transfer of the n-th periodic
    approximation, so it always solves the coboundary equation, and it
    agrees with the generator off the top set D_n.
    """
    model = a.model
    decomposition = towers_from_marker(model, markers.marker_indices(n))
    approx = periodic_approx(model, decomposition)
    transfer = periodic_coboundary(approx, a, decomposition)
    group = a.group
    size = model.size
    table = tuple(
        group.sub(transfer.table[(i + 1) % size], transfer.table[i])
        for i in range(size)
    )
    return CylinderFunction(model.bases, group, table)


def density_table(
    a: ZCocycle,
    markers: MarkerSequence,
    n_max: int,
    measures: Sequence[Measure] = (),
) -> list[dict]:
    """Rows (n, tau3 per measure, certificate bound) for n = 1..n_max."""
    rows = []
    f_full = a.generator.lift(a.model.bases)
    for n in range(1, n_max + 1):
        approximant = density_sequence(a, markers, n)
        certificate = coboundary_solve(ZCocycle(a.model, approximant))
        row = {"n": n, "certified": certificate is not None}
        if certificate is not None:
            row["M"] = certificate.spread_bound
        for k, mu in enumerate(measures):
            row[f"tau3_{k}"] = tau3_functional(approximant, f_full, mu)
        rows.append(row)
    return rows


# ---------------------------------------------------------------------------
# Bounded orbit sums (Gottschalk-Hedlund criterion) and the skew product


@dataclass(frozen=True)
class GHWitness:
    """A two-sided orbit sum located by the bounded-sums scan."""

    prefix: tuple[int, ...]
    radius: int
    value: GroupValue


@dataclass(frozen=True)
class GHReport:
    """Outcome of the bounded-orbit-sums criterion.

    For a coboundary, ``empirical_sup`` over the scanned horizon never
    exceeds the certificate's spread bound.  Otherwise the witness shows a
    sum that grows linearly in the window radius, with ``growth_slope``
    the metric gain per full period divided by the period.
    """

    decision: bool
    cycle_sum: GroupValue
    horizon: int
    empirical_sup: object
    certificate: Optional[CoboundaryCertificate]
    witness: Optional[GHWitness]
    growth_slope: object

    def to_json(self):
        sup = self.empirical_sup
        slope = self.growth_slope
        out = {
            "coboundary": self.decision,
            "cycle_sum": self.cycle_sum.to_json(),
            "horizon": self.horizon,
            "empirical_sup": str(sup) if isinstance(sup, (int, Fraction)) else sup,
            "growth_slope": str(slope) if isinstance(slope, (int, Fraction)) else slope,
        }
        if self.certificate is not None:
            out["certificate"] = self.certificate.to_json()
        if self.witness is not None:
            out["witness"] = {
                "x": list(self.witness.prefix),
                "j": self.witness.radius,
                "value": self.witness.value.to_json(),
            }
        return out


def _as_cocycle(h, model: Odometer | None) -> ZCocycle:
    if isinstance(h, ZCocycle):
        return h
    if model is None:
        model = Odometer(h.bases)
    return ZCocycle(model, h)


def two_sided_sum(a: ZCocycle, i: int, j: int):
    """Payload of sum_{k=-j..j} h(T^k x_i), via one period of partial sums."""
    return a.group.sub(a._running(i + j + 1), a._running(i - j))


def gh_check(
    h,
    horizon: int | None = None,
    model: Odometer | None = None,
    exceed_target=None,
) -> GHReport:
    """Bounded two-sided orbit sums test for the coboundary property.

    The decision itself is the vanishing of the cycle sum.  The scan
    produces the empirical sup over all prefixes and window radii up to
    the horizon (default 4N).  For a non-coboundary with ``exceed_target``
    set, the scan extends past the horizon until a witness sum exceeds the
    target; this terminates whenever nonzero multiples of the cycle sum
    are metrically unbounded (so not in Z/m, whose metric caps at m/2).
    """
    a = _as_cocycle(h, model)
    group = a.group
    size = a.model.size
    if horizon is None:
        horizon = 4 * size
    decision = group.values_equal(a.cycle_sum_payload, group.zero())
    certificate = coboundary_solve(a) if decision else None

    best = group.metric(group.zero(), group.zero())
    best_at = (0, 0)
    # For a coboundary the window sums are periodic in j with period N,
    # so radii beyond N-1 repeat earlier values.
    scan_to = min(horizon, size - 1) if decision else horizon
    for i in range(size):
        for j in range(scan_to + 1):
            d = group.norm(two_sided_sum(a, i, j))
            if d > best:
                best, best_at = d, (i, j)
    empirical_sup = best

    witness = None
    if not decision:
        if exceed_target is not None and best <= exceed_target:
            # widening the window by one full period adds two cycle sums,
            # so along j, j+N, j+2N, ... the norm grows by norm(2S) per
            # period (less the bounded part); that bounds the search for
            # any group with homogeneous norm.  Z/m values repeat after at
            # most m periods instead.
            norm_2s = group.norm(group.scale(a.cycle_sum_payload, 2))
            modulus = getattr(group, "modulus", None)
            if modulus is not None:
                cap_periods = modulus + 2
            else:
                cap_periods = int((exceed_target + best) / norm_2s) + 2
            cap = horizon + size * cap_periods
            j = scan_to
            while best <= exceed_target:
                j += 1
                for i in range(size):
                    d = group.norm(two_sided_sum(a, i, j))
                    if d > best:
                        best, best_at = d, (i, j)
                if j > cap:
                    raise PeriodicityError(
                        f"no two-sided sum exceeds {exceed_target} within "
                        f"{cap_periods} periods; the value group's metric is bounded"
                    )
        i, j = best_at
        witness = GHWitness(
            index_to_prefix(i, a.model.bases),
            j,
            GroupValue(group, two_sided_sum(a, i, j)),
        )
    slope_num = group.norm(a.cycle_sum_payload)
    growth_slope = (
        Fraction(slope_num, size)
        if isinstance(slope_num, int)
        else slope_num / size
    )
    return GHReport(
        decision, a.cycle_sum, horizon, empirical_sup, certificate, witness, growth_slope
    )


@dataclass(frozen=True)
class SkewOrbit:
    """Group projection of a skew-product orbit and its metric radius."""

    start: GroupValue
    values: tuple[GroupValue, ...]
    radius: object


def skew_orbit(
    h,
    start: tuple[Sequence[int], GroupValue],
    steps: int,
    model: Odometer | None = None,
) -> SkewOrbit:
    """Iterate (x, g) -> (Tx, g + h(x)) and project onto the group.

    Returns the values after each of the first ``steps`` iterations and
    the largest metric distance from the starting value.  The radius stays
    within the certificate bound exactly when h is a coboundary.
    """
    if steps < 0:
        raise ValueError("steps must be >= 0")
    a = _as_cocycle(h, model)
    x, g0 = start
    x = validate_prefix(x, a.model.bases)
    if len(x) != a.model.depth:
        raise DepthError("skew orbit needs a full-depth starting prefix")
    if g0.group != a.group:
        raise DepthError("starting group value lives in the wrong group")
    i = prefix_to_index(x, a.model.bases)
    group = a.group
    values = []
    radius = group.metric(group.zero(), group.zero())
    for s in range(1, steps + 1):
        v = group.add(g0.payload, a.evaluate_index(s, i))
        values.append(GroupValue(group, v))
        d = group.metric(v, g0.payload)
        if d > radius:
            radius = d
    return SkewOrbit(g0, tuple(values), radius)


def cocycle_metric_convergence(
    model: Odometer,
    generators: Sequence[CylinderFunction],
    target: CylinderFunction,
    j: int,
    measures: Sequence[Measure],
) -> list[dict]:
    """tau3 distances between iterated cocycles a(f_i)(j, .) and a(f)(j, .).

    When the generators converge to the target against every measure and
    its first j odometer translates, the table values converge to zero.
    """
    target_iter = ZCocycle(model, target).iterate_function(j)
    rows = []
    for idx, fi in enumerate(generators, start=1):
        fi_iter = ZCocycle(model, fi).iterate_function(j)
        row = {"i": idx}
        for k, mu in enumerate(measures):
            row[f"tau3_{k}"] = tau3_functional(fi_iter, target_iter, mu)
        rows.append(row)
    return rows
