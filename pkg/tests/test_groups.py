"""Generator-set construction, config round-trips, hypothesis certificates."""

import json
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import example_checks as ec
from fuchsianwalk import groups, sl2, words
from fuchsianwalk.errors import DegenerateInput, NoInverse, ParseError, ValidationError
from fuchsianwalk.sl2 import ElementClass, Mat2


def test_pants_reference_values():
    ec.check_pants_equilateral_closed_form()
    ec.check_pants_first_trace_exact()
    ec.check_pants_unit_traces()


def test_sanov_reference_values():
    ec.check_sanov_generators()


lengths = st.floats(0.1, 20.0, allow_nan=False)


@settings(max_examples=150, deadline=None)
@given(lengths, lengths, lengths)
def test_pants_hits_all_three_trace_targets(l1, l2, l3):
    gens = groups.pants(l1, l2, l3)
    x, y = gens.mats[0], gens.mats[1]
    assert abs(abs(sl2.trace(x)) - 2.0 * math.cosh(l1 / 2.0)) <= 1e-9
    assert abs(abs(sl2.trace(y)) - 2.0 * math.cosh(l2 / 2.0)) <= 1e-9
    assert abs(abs(sl2.trace(sl2.mat_mul(x, y))) - 2.0 * math.cosh(l3 / 2.0)) <= 1e-9
    for m in gens.mats:
        assert abs(sl2.det(m) - 1.0) <= 1e-9


def test_pants_names_and_pairing():
    gens = groups.pants(1.0, 2.0, 3.0)
    assert gens.names == ("X", "Y", "X^-1", "Y^-1")
    assert gens.inverse_of(0) == 2 and gens.inverse_of(2) == 0
    assert gens.inverse_of(1) == 3 and gens.inverse_of(3) == 1
    bare = groups.pants(1.0, 2.0, 3.0, include_inverses=False)
    assert bare.names == ("X", "Y")
    with pytest.raises(NoInverse):
        bare.inverse_of(0)


def test_pants_rejects_bad_lengths():
    for triple in ((0.0, 1.0, 1.0), (1.0, -2.0, 1.0), (1.0, 1.0, math.inf)):
        with pytest.raises(DegenerateInput):
            groups.pants(*triple)


def test_generator_set_validation():
    with pytest.raises(ValidationError):
        groups.GeneratorSet((), ())
    with pytest.raises(ValidationError):
        groups.GeneratorSet(("A", "A"), (Mat2(1, 0, 0, 1), Mat2(1, 0, 0, 1)))
    with pytest.raises(ValidationError):
        groups.GeneratorSet(("A",), (Mat2(2.0, 0.0, 0.0, 1.0),))
    with pytest.raises(ValidationError):
        # pairing says 1 inverts 0 but the matrices disagree
        groups.GeneratorSet(
            ("A", "B"),
            (Mat2(1.0, 2.0, 0.0, 1.0), Mat2(1.0, 2.0, 0.0, 1.0)),
            {0: 1, 1: 0},
        )


def test_config_roundtrip_and_errors():
    ec.check_config_roundtrip_equals_sanov()
    ec.check_config_rejects_bad_det()
    ec.check_config_rejects_duplicate_name()


def test_config_roundtrip_is_bitwise():
    gens = groups.pants(0.37, 11.25, 2.0)
    text = groups.dump_config(gens)
    again = groups.dump_config(groups.load(text))
    assert text == again
    assert groups.load(text).mats == gens.mats


def test_config_accepts_bytes():
    raw = groups.dump_config(groups.sanov()).encode()
    assert groups.load(raw) == groups.sanov()


def test_config_structural_errors_are_parse_errors():
    with pytest.raises(ParseError):
        groups.load("not json {")
    with pytest.raises(ParseError):
        groups.load(json.dumps({"no_generators": []}))
    with pytest.raises(ParseError):
        groups.load(json.dumps({"generators": [{"name": "X"}]}))
    with pytest.raises(ParseError):
        groups.load(json.dumps(
            {"generators": [{"name": "X", "matrix": [[1.0, 0.0], [0.0]]}]}))


def test_validate_reference_cases():
    ec.check_validate_sanov_shallow()
    ec.check_validate_single_diagonal()
    ec.check_validate_identity_only()


def test_validate_sanov_witnesses():
    report = groups.validate(groups.sanov(), search_depth=2)
    gens = groups.sanov()
    texts = {words.format_word(w, gens) for w in report.witness_words}
    assert texts == {"X Y", "Y X"}
    assert report.moment_ok is True
    assert report.search_depth == 2


def test_validate_depth_monotone():
    # whatever depth 2 certifies stays certified at depth 4
    shallow = groups.validate(groups.sanov(), search_depth=2)
    deep = groups.validate(groups.sanov(), search_depth=4)
    order = {groups.CertStatus.INCONCLUSIVE: 0, groups.CertStatus.VERIFIED: 1}
    assert order[deep.unbounded] >= order[shallow.unbounded]
    assert order[deep.strongly_irreducible] >= order[shallow.strongly_irreducible]


def test_validate_pants_verified():
    report = groups.validate(groups.pants(1.0, 1.0, 1.0), search_depth=4)
    assert report.unbounded is groups.CertStatus.VERIFIED
    assert report.strongly_irreducible is groups.CertStatus.VERIFIED


def test_pants_short_words_all_hyperbolic():
    # free group: no nontrivial relation shows up in short products
    gens = groups.pants(1.0, 1.0, 1.0)
    inv = {0: 2, 2: 0, 1: 3, 3: 1}
    count = 0
    stack = [(sl2.identity(), None, 0)]
    while stack:
        acc, last, depth = stack.pop()
        if depth > 0:
            assert sl2.classify(acc) is ElementClass.HYPERBOLIC
            count += 1
        if depth == 8:
            continue
        for i in range(4):
            if last is not None and i == inv[last]:
                continue
            stack.append((sl2.mul(sl2.from_mat2(gens.mats[i]), acc), i, depth + 1))
    assert count == sum(4 * 3 ** (m - 1) for m in range(1, 9))


def test_provenance_does_not_affect_equality():
    a = groups.sanov()
    b = groups.GeneratorSet(a.names, a.mats, dict(a.inverse_pairing))
    assert a == b
