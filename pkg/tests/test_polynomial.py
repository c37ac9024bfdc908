import itertools
import random
from fractions import Fraction

import pytest

from bellineq.enums import Sign, Site
from bellineq.exceptions import InvalidArgument
from bellineq.repository.catalog import (
    PI5_PARAMS,
    PUBLISHED_PI5_CORRELATOR,
    PUBLISHED_PI5_PROBABILITY,
    printed_alternative_mismatch,
    preset_probability_form,
)
from bellineq.repository.polynomial import (
    BellPolynomial,
    FamilyParams,
    ProbabilityForm,
    chen_alternative,
    alternative_construction,
    chsh,
    compare_terms,
    compose,
    e_double_prime,
    e_prime,
    from_probability_form,
    parse_polynomial,
    parse_probability_form,
    permute_sites,
    projector,
    reduce,
    reduce_each,
    three_qubit_family,
    to_probability_form,
    variable,
)

SIGMA = {Site.A: Site.C, Site.B: Site.A, Site.C: Site.B}
TAU = {Site.A: Site.B, Site.B: Site.A, Site.C: Site.C}


def test_chsh_signs():
    e1 = chsh(1)
    assert e1.coefficient((1, 1, 0)) == 1
    assert e1.coefficient((1, 2, 0)) == -1
    assert e1.coefficient((2, 1, 0)) == -1
    assert e1.coefficient((2, 2, 0)) == -1
    assert e1.bound == 2
    assert chsh(4).coefficient((2, 2, 0)) == 1
    assert chsh(2).coefficient((1, 2, 0)) == 1
    assert chsh(3).coefficient((2, 1, 0)) == 1


@pytest.mark.parametrize("k", [0, 5])
def test_chsh_index_out_of_range(k):
    with pytest.raises(InvalidArgument):
        chsh(k)


def test_projectors():
    plus = projector(Site.A, 1, Sign.plus)
    minus = projector(Site.A, 1, Sign.minus)
    assert plus.constant == Fraction(1, 2)
    assert plus.coefficient((1, 0, 0)) == Fraction(1, 2)
    assert minus.coefficient((1, 0, 0)) == Fraction(-1, 2)
    assert (plus + minus).terms == BellPolynomial.build({(0, 0, 0): 1}).terms


def test_product_on_same_site_is_rejected():
    with pytest.raises(InvalidArgument):
        variable(Site.A, 1) * variable(Site.A, 2)


def test_e_prime_expansion():
    assert e_prime(0).terms == chsh(1).terms
    p = e_prime(4)
    assert p.coefficient((2, 2, 0)) == -2
    assert p.coefficient((2, 0, 0)) == -1
    assert p.coefficient((0, 2, 0)) == -1
    assert p.constant == -1
    assert p.bound == 2
    with pytest.raises(InvalidArgument):
        e_prime(-1)


def test_e_double_prime_expansion():
    p = e_double_prime(4, 8)
    assert p.coefficient((1, 2, 0)) == -2
    assert p.coefficient((2, 1, 0)) == -3
    assert p.constant == -3


def test_scaling_rules_for_bound():
    p = chsh(1)
    assert p.scale(3).bound == 6
    assert p.scale(-1).bound is None
    assert (p + 1).bound == 3
    assert (p + chsh(2)).bound == 4


def test_normalize_folds_constant_into_bound():
    p = e_prime(4).normalize()
    assert p.constant == 0
    assert p.bound == 3


@pytest.mark.parametrize("u,r,s,t", [(0, 0, 0, 0), (1, 4, 2, 2), (2, 8, 4, 4), (3, 10, 5, 5)])
def test_family_reduces_to_its_faces(u, r, s, t):
    p = three_qubit_family(FamilyParams(u, r, s, t))
    assert p.arity == 3
    assert p.bound == 2 + u
    assert (reduce_each(p, Site.C, (1, 1)) - (e_double_prime(s, t) + u)).is_zero()
    assert (reduce_each(p, Site.C, (1, -1)) - (e_prime(r) + u)).is_zero()
    assert (reduce(p, Site.C, -1) + chsh(4).scale(Fraction(2 + u, 2))).is_zero()
    mixed = e_double_prime(s, t) - e_prime(r) - chsh(4).scale(Fraction(2 + u, 2))
    assert (reduce_each(p, Site.C, (-1, 1)) - mixed).is_zero()


def test_mabk_family():
    p = three_qubit_family(FamilyParams())
    assert p.as_dict() == {
        (1, 1, 2): -1,
        (1, 2, 1): -1,
        (2, 1, 1): -1,
        (2, 2, 2): 1,
    }
    assert p.bound == 2


def test_family_matches_published_twenty_term_form():
    p = three_qubit_family(PI5_PARAMS).primitive()
    published = parse_polynomial(PUBLISHED_PI5_CORRELATOR)
    assert compare_terms(p, published) == {}
    assert p.bound == published.bound == 8
    assert len(p.terms) == 20


def test_probability_form_matches_published():
    assert preset_probability_form("pi5") == parse_probability_form(PUBLISHED_PI5_PROBABILITY)


def test_published_probability_form_back_to_correlators():
    q = parse_probability_form(PUBLISHED_PI5_PROBABILITY)
    back = permute_sites(from_probability_form(q), {Site.A: Site.C, Site.B: Site.A, Site.C: Site.B})
    assert back.primitive() == three_qubit_family(PI5_PARAMS).primitive()


@pytest.mark.parametrize("p", [chsh(2), e_prime(3).normalize(), three_qubit_family(FamilyParams(1, 4, 2, 2)).normalize()])
def test_probability_round_trip(p):
    assert from_probability_form(to_probability_form(p)) == p


def _random_coefficients(rng, constant):
    keys = list(itertools.product(range(3), repeat=3))
    if not constant:
        keys.remove((0, 0, 0))
    chosen = rng.sample(keys, rng.randint(1, 10))
    return {key: Fraction(rng.randint(-20, 20), rng.randint(1, 6)) for key in chosen}


def test_probability_round_trip_on_random_polynomials():
    rng = random.Random(500)
    for _ in range(500):
        p = BellPolynomial.build(_random_coefficients(rng, True), 3, Fraction(rng.randint(-10, 30), rng.randint(1, 4)))
        assert from_probability_form(to_probability_form(p)) == p.normalize()
        q = ProbabilityForm.build(_random_coefficients(rng, False), 3, rng.randint(-5, 5))
        assert to_probability_form(from_probability_form(q)) == q


def test_probability_round_trip_other_direction():
    q = parse_probability_form(PUBLISHED_PI5_PROBABILITY)
    assert to_probability_form(from_probability_form(q)) == q


def test_probability_form_needs_bound():
    with pytest.raises(InvalidArgument):
        to_probability_form(chsh(1).with_bound(None))


def test_permutation_is_group_action():
    p = three_qubit_family(FamilyParams(2, 8, 4, 4))
    lhs = permute_sites(permute_sites(p, SIGMA), TAU)
    assert lhs == permute_sites(p, compose(TAU, SIGMA))


def test_permutation_must_be_bijection():
    with pytest.raises(InvalidArgument):
        permute_sites(chsh(1), {Site.A: Site.B, Site.B: Site.B, Site.C: Site.C})


def test_reduce_rejects_bad_values_and_sites():
    with pytest.raises(InvalidArgument):
        reduce(three_qubit_family(FamilyParams()), Site.C, 0)
    with pytest.raises(InvalidArgument):
        reduce(chsh(1), Site.C, 1)


def test_reduce_keeps_arity_for_sites_a_and_b():
    p = three_qubit_family(FamilyParams())
    assert reduce(p, Site.A, 1).arity == 3
    assert reduce(p, Site.C, 1).arity == 2


def test_alternative_construction_faces():
    raw = alternative_construction()
    assert reduce_each(raw, Site.C, (-1, 1)) == chsh(4)
    r1 = 2 - projector(Site.A, 1, Sign.plus) * projector(Site.B, 2, Sign.plus) \
           - projector(Site.A, 2, Sign.plus) * projector(Site.B, 1, Sign.plus)
    assert (reduce_each(raw, Site.C, (1, 1)) - r1).is_zero()


def test_alternative_inequality_normal_form():
    p = chen_alternative()
    assert p.bound == 4
    assert p.constant == 0
    assert p.coefficient((0, 0, 1)) == 6
    assert p.coefficient((0, 0, 2)) == -6
    assert p.coefficient((1, 1, 0)) == -1
    assert p.coefficient((2, 2, 2)) == 5


def test_alternative_inequality_differs_from_printed_form_in_triples():
    mismatch = printed_alternative_mismatch()
    assert set(mismatch) == {
        "c1", "c2",
        "a1b1c1", "a1b2c1", "a2b1c1", "a2b2c1",
        "a1b1c2", "a1b2c2", "a2b1c2", "a2b2c2",
    }
    assert mismatch["a2b2c2"] == (5, 1)


def test_parse_polynomial():
    p = parse_polynomial("-a1b1 + 1/2a2 - 3 + 2a1b2c1 <= 4")
    assert p.arity == 3
    assert p.bound == 4
    assert p.coefficient((1, 1, 0)) == -1
    assert p.coefficient((2, 0, 0)) == Fraction(1, 2)
    assert p.constant == -3
    assert p.coefficient((1, 2, 1)) == 2


@pytest.mark.parametrize("text", ["a1a2", "x1", "a3", "a1**2", "a1+", "sqrt(2)a1"])
def test_parse_polynomial_rejects(text):
    with pytest.raises(InvalidArgument):
        parse_polynomial(text)


def test_primitive_makes_coprime_integers():
    p = BellPolynomial.build({(1, 0, 0): Fraction(1, 2), (0, 1, 0): Fraction(3, 4)}, 2, Fraction(5, 4))
    q = p.primitive()
    assert q.as_dict() == {(1, 0, 0): 2, (0, 1, 0): 3}
    assert q.bound == 5


def test_two_site_polynomial_cannot_hold_site_c():
    with pytest.raises(InvalidArgument):
        BellPolynomial.build({(1, 0, 1): 1}, 2)


def test_parse_polynomial_expands_products():
    p = parse_polynomial("2 - (1+a1)(1+b2)/2 - (1+a2)(1+b1)/2")
    expected = 2 - projector(Site.A, 1, Sign.plus) * projector(Site.B, 2, Sign.plus) * 2 \
                 - projector(Site.A, 2, Sign.plus) * projector(Site.B, 1, Sign.plus) * 2
    assert (p - expected).is_zero()
    assert parse_polynomial("2*a1 + 0.5b1").as_dict() == {(1, 0, 0): 2, (0, 1, 0): Fraction(1, 2)}


@pytest.mark.parametrize("text", ["P(A1,A2)", "P(D1)", "P(A1)+2 <= 1", "P(A1"])
def test_parse_probability_form_rejects(text):
    with pytest.raises(InvalidArgument):
        parse_probability_form(text)
