import random
import warnings
from fractions import Fraction

import pytest

from gcalc.errors import DomainError, UndecidableError
from gcalc.idempotent import Idempotent
from gcalc.interleave import support
from gcalc.internal import (
    IntersectionSet,
    Membrane,
    Region,
    distance_to_complement,
    essential_support,
    intersect_strong,
    membership_report,
    membrane_member,
    strong_member,
)
from gcalc.number import GeneralizedNumber as G, invert, is_invertible, valuation

from corpus import Coord, corpus, num, oracle_member

CASES = corpus()


def _exact_distance(coords, region):
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        return distance_to_complement([c.number() for c in coords], region)


def test_boundary_point_is_not_member():
    d = distance_to_complement(1.0, Region.box(0.0, 1.0))
    assert d.is_zero
    assert not strong_member(1.0, Region.box(0.0, 1.0))


def test_infinitesimally_inside():
    p = G.real(1.0) - G.alpha(2)
    d = distance_to_complement(p, Region.box(0.0, 1.0))
    assert valuation(d).value == 2
    assert strong_member(p, Region.box(0.0, 1.0))


def test_exponential_box_holds_moderate_points():
    r = Region.box("-exp(alpha(-1))", "exp(alpha(-1))")
    for p in (G.alpha(-5), G.alpha(-20) * -3.0, G.real(7.0) + G.alpha(1)):
        assert strong_member(p, r)


@pytest.mark.parametrize("i", range(len(CASES)))
def test_corpus_agreement(i):
    region, coords, (kind, params) = CASES[i]
    d = _exact_distance(coords, region)
    assert d.exact
    member = strong_member([c.number() for c in coords], region)
    assert member == is_invertible(d)
    assert member == oracle_member(kind, coords, params)


def test_corpus_has_both_verdicts():
    verdicts = {strong_member([c.number() for c in coords], r) for r, coords, _ in CASES}
    assert verdicts == {True, False}


@pytest.mark.parametrize("i", range(len(CASES)))
def test_openness(i):
    region, coords, _ = CASES[i]
    if not strong_member([c.number() for c in coords], region):
        return
    # the margin is set by the thinnest branch: -V(1/d), not V(d)
    v = -valuation(invert(_exact_distance(coords, region))).value
    step = Fraction(v) + 1
    rng = random.Random(i)
    for _ in range(4):
        moved = [c.shifted({step: rng.choice([-1.0, 1.0, 0.5])}) for c in coords]
        assert strong_member([c.number() for c in moved], region)


def _widen(region):
    a1 = G.alpha(1)
    if region.kind == "ball":
        return Region("ball", region.a, (region.b[0] + a1,))
    lo = tuple(v if not isinstance(v, G) else v - a1 for v in region.a)
    hi = tuple(v if not isinstance(v, G) else v + a1 for v in region.b)
    return Region("box", lo, hi)


def test_monotonicity():
    for region, coords, _ in CASES:
        p = [c.number() for c in coords]
        if strong_member(p, region):
            assert strong_member(p, _widen(region))


def test_intersection_of_boxes():
    a, b = Region.box(0.0, 2.0), Region.box(1.0, 3.0)
    c = intersect_strong(a, b)
    assert isinstance(c, Region) and c.kind == "box"
    assert str(c) == str(Region.box(1.0, 2.0))
    assert strong_member(1.5, a) and strong_member(1.5, b) and strong_member(1.5, c)
    assert str(intersect_strong(a, a)) == str(a)


def test_disjoint_boxes_have_no_member():
    c = intersect_strong(Region.box(0.0, 1.0), Region.box(2.0, 3.0))
    rng = random.Random(5)
    for _ in range(300):
        x = G.real(rng.uniform(-1, 4)) + G.alpha(rng.choice([1, 2, 3])) * rng.uniform(-1, 1)
        assert not strong_member(x, c)


def test_intersection_membership_matches_members():
    a = Region.ball((0.0, 0.0), 1.0)
    b = Region.ball((1.0, 0.0), 1.0)
    c = intersect_strong(a, b)
    assert isinstance(c, IntersectionSet)
    assert c.to_json()["membership_level"]
    for region, coords, (kind, _) in CASES:
        if kind != "ball":
            continue
        p = [c_.number() for c_ in coords]
        assert strong_member(p, c) == (strong_member(p, a) and strong_member(p, b))


def test_intersection_of_boxes_agrees_with_members():
    rng = random.Random(11)
    a = Region.box((0.0, "1 - alpha(2)"), (2.0, 3.0))
    b = Region.box(("alpha(1)", 0.0), (1.0, 4.0))
    c = intersect_strong(a, b)
    assert isinstance(c, Region)
    for _ in range(200):
        p = [G.real(rng.choice([0.0, 0.5, 1.0, 2.0])) + G.alpha(rng.choice([1, 2, 3])) * rng.choice([-1.0, 1.0]),
             G.real(rng.choice([1.0, 2.0, 3.0])) + G.alpha(rng.choice([1, 2, 3])) * rng.choice([-1.0, 1.0])]
        assert strong_member(p, c) == (strong_member(p, a) and strong_member(p, b))


def test_dimension_mismatch():
    with pytest.raises(DomainError):
        strong_member((0.0, 0.0), Region.box(0.0, 1.0))


def test_membership_report_fields():
    rep = membership_report(G.real(1.0) - G.alpha(2), Region.box(0.0, 1.0))
    assert rep["member"] and rep["tier"] == "exact" and rep["warnings"] == []


def test_membrane_membership():
    m = Membrane(Region.box(0.0, 1.0))
    assert m.L == 2.0
    assert membrane_member(G.real(0.5) + G.alpha(1) * 3.0, m)
    assert membrane_member(G.alpha(1), m)
    assert not membrane_member(G.real(0.5) + G.alpha(-1), m)
    e = Idempotent("", "10")
    drifting = G.interleave([(e, 0.5), (~e, G.real(2.0) + G.alpha(1))])
    assert not membrane_member(drifting, m)
    with pytest.raises(UndecidableError):
        membrane_member(G.from_samples([0.5] * 48), m)
    with pytest.raises(DomainError):
        Membrane(Region.box(0.0, float("inf")))


def test_membrane_support_in_closure():
    m = Membrane((Region.box(0.0, 1.0), Region.box(2.0, 3.0)))
    rng = random.Random(3)
    found = 0
    for _ in range(200):
        x0 = rng.choice([0.0, 0.25, 1.0, 1.5, 2.0, 2.5, 3.0, 4.0])
        p = G.real(x0) + G.alpha(rng.choice([1, 2])) * rng.choice([-1.0, 1.0])
        if membrane_member(p, m):
            found += 1
            for pt in support(p).points:
                assert 0.0 <= pt <= 1.0 or 2.0 <= pt <= 3.0
    assert found > 20


def test_essential_support_examples():
    assert essential_support(G.real(0.3) + G.alpha(1)).points == (0.3,)
    assert essential_support(G.trig("sin")).intervals == ((-1.0, 1.0),)
    assert not essential_support(G.real(1.0) + G.alpha(2)).empty


@pytest.mark.parametrize("seed", range(30))
def test_essential_support_contains_support(seed):
    rng = random.Random(seed)
    e = Idempotent("", rng.choice(["10", "110", "0111"]))
    branches = [G.real(rng.uniform(-2, 2)) + G.alpha(rng.choice([1, 2])),
                G.trig("sin") * rng.choice([0.5, 1.0]) + rng.uniform(-1, 1)]
    rng.shuffle(branches)
    x = G.interleave([(e, branches[0]), (~e, branches[1])])
    assert support(x).issubset(essential_support(x))


def test_corpus_coord_interleaving_round_trip():
    c = Coord({Fraction(0): 1.0}, {Fraction(0): 5.0}, Idempotent("", "10"))
    x = c.number()
    assert x.sample_at(1) == pytest.approx(float(c.at(1)))
    assert x.sample_at(2) == pytest.approx(float(c.at(2)))
    assert num({Fraction(1): 2.0}).expansion.terms == ((2.0, Fraction(1)),)
