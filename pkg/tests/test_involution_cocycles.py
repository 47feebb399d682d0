"""Generator families, the flip-group cocycle formula, and dyadic approximation."""

import itertools
import random
from fractions import Fraction

import pytest

from cocycle_lab.dynamics import Odometer, delta_permutation
from cocycle_lab.involution_cocycles import (
    ConjugationError,
    GeneratorFamily,
    InvarianceError,
    InvolutionCocycle,
    OracleInconsistencyError,
    h_approximate,
    psi,
    recover_generators,
    transport,
    transport_certificate,
    verify_identities,
    word_apply,
    word_reduce,
)
from cocycle_lab.sampling import coboundary_generator, invariant_family
from cocycle_lab.space import CylinderFunction, iter_prefixes
from cocycle_lab.values import (
    INTEGERS,
    RATIONALS,
    GroupValue,
    NeighborhoodChain,
    is_dyadic,
)
from cocycle_lab.zcocycles import ZCocycle, coboundary_solve

B3 = (2, 2, 2)


def family_n2_depth3():
    """The worked family: f_1 = a on x_2=0 / b on x_2=1, f_2 = q."""
    a, b, q = Fraction(2), Fraction(5), Fraction(7, 3)
    f1 = CylinderFunction(
        B3, RATIONALS, tuple(a if ((i >> 1) & 1) == 0 else b for i in range(8))
    )
    f2 = CylinderFunction.constant(B3, RATIONALS, q)
    return GeneratorFamily.from_cylinder_functions(B3, [f1, f2]), (a, b, q)


# --- family construction -------------------------------------------------------


def test_structural_invariance_storage():
    fam, _ = family_n2_depth3()
    assert len(fam.tables[0]) == 4  # f_1 indexed by digits 2..3
    assert len(fam.tables[1]) == 2  # f_2 indexed by digit 3
    g1 = fam.generator_function(1)
    for x in iter_prefixes(B3):
        assert g1.eval(x) == g1.eval(word_apply({1}, x))


def test_invariance_violation_is_rejected():
    f1 = CylinderFunction(B3, RATIONALS, tuple(Fraction(i % 2) for i in range(8)))
    with pytest.raises(InvarianceError):
        GeneratorFamily.from_cylinder_functions(B3, [f1])


def test_family_depth_must_cover_generators():
    with pytest.raises(Exception):
        GeneratorFamily((2,), RATIONALS, ((Fraction(1),), (Fraction(1),)))


def test_family_json_roundtrip():
    fam, _ = family_n2_depth3()
    again = GeneratorFamily.from_json(fam.to_json())
    assert again.tables == fam.tables and again.bases == fam.bases


# --- generator evaluation --------------------------------------------------------


def test_eval_generator_n1_formula():
    rng = random.Random(3)
    fam = invariant_family(rng, 4, 3, RATIONALS)
    c = InvolutionCocycle(fam)
    f1 = fam.generator_function(1)
    for x in iter_prefixes(fam.bases):
        expected = f1.eval(x).payload
        if x[0] == 1:
            expected = -expected
        assert c.eval_generator(1, x).payload == expected


def test_eval_generator_zero_family():
    fam = GeneratorFamily(B3, RATIONALS, ((Fraction(0),) * 4, (Fraction(0),) * 2))
    c = InvolutionCocycle(fam)
    for n in (1, 2):
        for x in iter_prefixes(B3):
            assert c.eval_generator(n, x).payload == 0


def test_eval_generator_worked_example():
    fam, (a, b, q) = family_n2_depth3()
    c = InvolutionCocycle(fam)
    # hand-substitution: x_1 f_1(d2 x) + (+1) q - x_1 f_1(x) at x = 100
    assert c.eval_generator(2, (1, 0, 0)).payload == b + q - a


def test_eval_generator_range_check():
    fam, _ = family_n2_depth3()
    c = InvolutionCocycle(fam)
    with pytest.raises(IndexError):
        c.eval_generator(3, (0, 0, 0))


# --- word evaluation ---------------------------------------------------------------


def test_eval_word_singleton_and_empty():
    fam, _ = family_n2_depth3()
    c = InvolutionCocycle(fam)
    for x in iter_prefixes(B3):
        assert c.eval_word([2], x) == c.eval_generator(2, x)
        assert c.eval_word([], x).payload == 0
        assert c.eval_word(frozenset(), x).payload == 0


def test_eval_word_unreduced_square_vanishes():
    fam, _ = family_n2_depth3()
    c = InvolutionCocycle(fam)
    for n in (1, 2):
        for x in iter_prefixes(B3):
            assert c.eval_word([n, n], x).payload == 0


def test_eval_word_order_independence_exhaustive():
    rng = random.Random(11)
    fam = invariant_family(rng, 3, 3, RATIONALS)
    c = InvolutionCocycle(fam)
    for word in [(1, 2), (1, 3), (2, 3), (1, 2, 3)]:
        for x in iter_prefixes(B3):
            reference = c.eval_word(list(word), x)
            for perm in itertools.permutations(word):
                assert c.eval_word(list(perm), x) == reference
            assert c.eval_word(frozenset(word), x) == reference


def test_word_reduce():
    assert word_reduce([1, 2, 1]) == frozenset({2})
    assert word_reduce([3, 3]) == frozenset()
    assert word_apply([1, 2, 1], (0, 0, 0)) == (0, 1, 0)


# --- identity verification -----------------------------------------------------------


def test_identities_zero_and_random_families():
    zero = GeneratorFamily(B3, RATIONALS, ((Fraction(0),) * 4, (Fraction(0),) * 2))
    assert verify_identities(InvolutionCocycle(zero)).ok
    rng = random.Random(17)
    for depth in (3, 4, 5, 6):
        fam = invariant_family(rng, depth, min(depth, 4), RATIONALS)
        assert verify_identities(InvolutionCocycle(fam)).ok


def test_identities_fail_for_broken_invariance():
    """An oracle built from the generator formula with f_1 depending on
    x_1 violates the defining identities, with a located witness."""
    values = {0: Fraction(1), 1: Fraction(2)}  # f_1 reads its own digit

    def oracle(n, x):
        # the n=1 specialization of the generator formula
        sign = -1 if x[0] == 1 else 1
        return GroupValue(RATIONALS, sign * values[x[0]])

    check = verify_identities(oracle, count=1, bases=(2, 2))
    assert not check.ok
    assert check.witness["identity"] == "square"


# --- recovery ---------------------------------------------------------------------------


def test_recover_zero_cocycle():
    zero = GeneratorFamily(B3, RATIONALS, ((Fraction(0),) * 4, (Fraction(0),) * 2))
    rec = recover_generators(InvolutionCocycle(zero), 2, B3, RATIONALS)
    assert rec.tables == zero.tables


def test_recover_roundtrip_worked_example():
    fam, _ = family_n2_depth3()
    rec = recover_generators(InvolutionCocycle(fam), 2, fam.bases, fam.group)
    assert rec.tables == fam.tables


def test_recover_roundtrip_random_families():
    rng = random.Random(19)
    for depth in (4, 5, 6):
        fam = invariant_family(rng, depth, min(depth, 5), RATIONALS)
        oracle = InvolutionCocycle(fam)
        rec = recover_generators(oracle, fam.count, fam.bases, fam.group)
        assert rec.tables == fam.tables


def test_recover_rejects_inconsistent_oracle():
    def oracle(n, x):
        # not of the invariant-family form: value ignores the sign rule
        return GroupValue(RATIONALS, Fraction(x[0]))

    with pytest.raises(OracleInconsistencyError):
        recover_generators(oracle, 1, (2, 2), RATIONALS)


# --- signed partial sums -------------------------------------------------------------------


def test_psi_examples():
    fam, _ = family_n2_depth3()
    assert psi(2, fam, (0, 0, 0)).payload == 0
    f1 = fam.generator_function(1)
    for x in iter_prefixes(B3):
        if x[0] == 1:
            assert psi(1, fam, x).payload == -f1.eval(x).payload
        else:
            assert psi(1, fam, x).payload == 0
    assert psi(0, fam, (1, 1, 1)).payload == 0


def test_psi_additivity():
    rng = random.Random(23)
    fam = invariant_family(rng, 5, 4, RATIONALS)
    f_tables = [fam.generator_function(n) for n in range(1, 5)]
    for x in iter_prefixes(fam.bases):
        for n in range(1, 5):
            delta = psi(n, fam, x).payload - psi(n - 1, fam, x).payload
            expected = -f_tables[n - 1].eval(x).payload if x[n - 1] else Fraction(0)
            assert delta == expected


# --- dyadic approximation --------------------------------------------------------------------


def test_happrox_dyadic_family_is_fixed():
    fam = GeneratorFamily(
        B3, RATIONALS, ((Fraction(1, 2), Fraction(3, 4), Fraction(0), Fraction(2)),)
    )
    report = h_approximate(fam, NeighborhoodChain(Fraction(1, 4)))
    assert report.rounded_family.tables == fam.tables
    assert all(v == 0 for v in report.transfer.table)
    alpha, beta = InvolutionCocycle(fam), report.beta
    for x in iter_prefixes(B3):
        assert alpha.eval_generator(1, x) == beta.eval_generator(1, x)


def test_happrox_worked_example():
    fam = GeneratorFamily((2, 2), RATIONALS, ((Fraction(1, 3), Fraction(1, 3)),))
    report = h_approximate(fam, NeighborhoodChain(Fraction(1, 4)))
    assert report.rounded_family.tables == ((Fraction(3, 8), Fraction(3, 8)),)
    for i, x in enumerate(iter_prefixes((2, 2))):
        expected = -Fraction(x[0], 24)  # x_1 * (1/3 - 3/8)
        assert report.transfer.table[i] == expected
    # cohomology over both words at every depth-2 prefix
    alpha, beta = InvolutionCocycle(report.family), report.beta
    g = report.transfer
    for x in iter_prefixes((2, 2)):
        for word in ([], [1]):
            lhs = alpha.eval_word(word, x).payload
            wx = word_apply(word, x)
            rhs = g.eval(wx).payload + beta.eval_word(word, x).payload - g.eval(x).payload
            assert lhs == rhs


def test_happrox_random_families_exhaustive():
    rng = random.Random(29)
    chain = NeighborhoodChain(Fraction(1, 4))
    for _ in range(5):
        fam = invariant_family(rng, 5, 4, RATIONALS)
        report = h_approximate(fam, chain, verify=True)  # verify raises on failure
        # radii follow the chain and bound the rounding error per index
        assert report.radii == tuple(chain.epsilon(n) for n in (1, 2, 3, 4))
        for n in range(1, 5):
            for orig, rounded in zip(fam.tables[n - 1], report.rounded_family.tables[n - 1]):
                assert is_dyadic(rounded)
                assert abs(orig - rounded) <= chain.epsilon(n)
        assert max(abs(v) for v in report.transfer.table) <= chain.eps0
        # beta takes dyadic values on every word at every prefix
        beta = report.beta
        size = 1 << 5
        for bits in range(1 << 4):
            word = [n for n in (1, 2, 3, 4) if (bits >> (n - 1)) & 1]
            for i in range(size):
                assert is_dyadic(beta.eval_word_index(word, i))


def test_happrox_rejects_integer_family():
    fam = GeneratorFamily(B3, INTEGERS, ((1, 2, 3, 4),))
    with pytest.raises(Exception):
        h_approximate(fam, NeighborhoodChain(Fraction(1, 4)))


# --- transport ---------------------------------------------------------------------------------


def test_transport_identity_is_noop():
    m = Odometer.binary(3)
    f = CylinderFunction(B3, RATIONALS, tuple(Fraction(i, 5) for i in range(8)))
    a = ZCocycle(m, f)
    moved = transport(a, tuple(range(8)))
    assert moved.generator.table == a.generator.lift(B3).table


def test_transport_rotation_preserves_certificates_and_sums():
    rng = random.Random(31)
    m = Odometer.binary(3)
    for r in range(8):
        rotation = tuple((i + r) % 8 for i in range(8))
        f, _ = coboundary_generator(rng, B3, RATIONALS)
        a = ZCocycle(m, f)
        cert = coboundary_solve(a)
        moved = transport(a, rotation)
        assert moved.cycle_sum.payload == a.cycle_sum.payload
        moved_cert = transport_certificate(cert, rotation)
        assert moved_cert.verify()
        assert moved_cert.transfer.table[0] == 0
        # the transported cocycle's own solve agrees with the moved certificate
        direct = coboundary_solve(moved)
        assert direct.transfer.table == moved_cert.transfer.table

        g = cylinder_function_with_sum(rng)
        b = ZCocycle(m, g)
        assert transport(b, rotation).cycle_sum.payload == b.cycle_sum.payload


def cylinder_function_with_sum(rng):
    return CylinderFunction(
        B3, RATIONALS, tuple(Fraction(rng.randint(-3, 3)) for _ in range(8))
    )


def test_transport_rejects_noncommuting_permutation():
    m = Odometer.binary(3)
    a = ZCocycle(m, CylinderFunction.constant(B3, RATIONALS, 1))
    swap = list(range(8))
    swap[0], swap[2] = swap[2], swap[0]
    with pytest.raises(ConjugationError):
        transport(a, tuple(swap))


def test_transport_involution_cocycle_along_flips():
    rng = random.Random(37)
    fam = invariant_family(rng, 4, 3, RATIONALS)
    c = InvolutionCocycle(fam)
    m = Odometer.binary(4)
    phi = delta_permutation(m, 4)  # flips commute with each other
    moved = transport(c, phi)
    assert verify_identities(moved).ok
    # transported values are the originals read at phi-inverse
    for x in iter_prefixes(fam.bases):
        y = word_apply({4}, x)
        for n in (1, 2, 3):
            assert moved.eval_generator(n, x) == c.eval_generator(n, y)


def test_transport_involution_rejects_odometer_rotation():
    rng = random.Random(41)
    fam = invariant_family(rng, 3, 2, RATIONALS)
    c = InvolutionCocycle(fam)
    rotation = tuple((i + 1) % 8 for i in range(8))
    with pytest.raises(ConjugationError):
        transport(c, rotation)
