import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from joincover.core import Hypergraph, cycle, naive_join
from joincover.codes import (
    Codebook,
    DisedgeConstructionParams,
    crt_codebook,
    crt_encode,
    crt_from_dual,
    duplicated_code,
    instance_from_codebook,
    is_prime,
    join_equals_codebook,
    largest_prime_at_most,
    lower_bound_instance,
    min_distance,
    next_prime,
    project_code,
    rs_codebook,
    rs_extend,
)
from joincover.lpbounds import HALF

import oracles


def test_primes():
    assert [p for p in range(20) if is_prime(p)] == [2, 3, 5, 7, 11, 13, 17, 19]
    assert largest_prime_at_most(20) == 19 and next_prime(20) == 23


def test_rs_against_frozen(frozen):
    for item in frozen["rs"]:
        c = rs_codebook(item["q"], item["n"], item["delta"])
        assert c.size == item["size"]
        assert {tuple(w) for w in c.words.tolist()} == oracles.rs_words_direct(item["q"], item["n"], item["delta"])
        if item["min_distance"] is not None:
            assert min_distance(c) == item["min_distance"] == item["delta"]


def test_crt_against_frozen(frozen):
    for item in frozen["crt"]:
        c = crt_codebook(item["primes"], item["k"])
        assert c.size == item["size"]
        assert min_distance(c) == item["min_distance"]
        assert min_distance(c, "difference") == item["min_distance"]
        assert item["min_distance"] >= len(item["primes"]) - item["k"] + 1


def test_rs_examples():
    assert sorted(map(tuple, rs_codebook(2, 2, 2).words.tolist())) == [(0, 0), (1, 1)]
    c = rs_codebook(5, 4, 2)
    assert c.size == 125 and min_distance(c) == 2
    c = rs_codebook(7, 4, 4)
    assert c.size == 7 and min_distance(c) == 4
    with pytest.raises(ValueError):
        rs_codebook(4, 2, 1)
    with pytest.raises(ValueError):
        rs_codebook(3, 5, 1)


def test_rs_infinity_point_keeps_distance():
    c = rs_codebook(3, 4, 3)
    assert c.size == 9 and min_distance(c) == 3


def test_rs_extend_examples():
    c = rs_extend(rs_codebook(5, 3, 2), 1)
    assert (c.n, c.size, min_distance(c)) == (4, 25, 3)
    assert rs_extend(rs_codebook(5, 3, 2), 0).size == 25
    c = rs_extend(rs_codebook(7, 2, 1), 2)
    assert (c.n, c.size, min_distance(c)) == (4, 49, 3)
    with pytest.raises(ValueError):
        rs_extend(rs_codebook(3, 3, 1), 1)


def test_crt_examples():
    assert crt_encode(4, (2, 3, 5)) == (0, 1, 4)
    c = crt_codebook((2, 3, 5), 2)
    assert c.size == 6 and min_distance(c) == 2
    assert crt_codebook((2, 3), 2).size == 6
    with pytest.raises(ValueError):
        crt_codebook((3, 2), 1)
    with pytest.raises(ValueError):
        crt_codebook((2, 4), 1)


def test_duplicated_code_examples():
    p = DisedgeConstructionParams(4, 0, 2)
    c = duplicated_code(rs_codebook(5, p.base_length, p.base_distance), p)
    assert (c.n, c.size, min_distance(c, "pairwise")) == (4, 25, 2)
    p = DisedgeConstructionParams(2, 1, 2)
    c = duplicated_code(rs_codebook(5, p.base_length, p.base_distance), p)
    assert (c.n, c.size, min_distance(c)) == (3, 5, 3)
    with pytest.raises(ValueError):
        DisedgeConstructionParams(4, 0, 3)


def test_min_distance_methods_agree():
    for q, n, d in [(5, 4, 2), (7, 5, 3), (3, 4, 2)]:
        c = rs_codebook(q, n, d)
        assert min_distance(c, "pairwise") == min_distance(c, "weight") == min_distance(c, "rank") == d


def test_min_distance_collision_and_small():
    assert min_distance(Codebook([2, 2], 1, words=[[0, 1], [0, 1], [1, 1]])) == 0
    with pytest.raises(ValueError):
        min_distance(Codebook([2], 1, words=[[0]]))


def test_codebook_json_and_permute():
    c = rs_codebook(5, 3, 2)
    assert Codebook.from_json(c.to_json()).codewords == c.codewords
    p = c.permuted([2, 0, 1])
    assert p.codewords == {(w[2], w[0], w[1]) for w in c.codewords}


@given(st.sampled_from([(3, 3, 2), (5, 4, 3), (5, 5, 2), (7, 4, 2), (2, 3, 1)]), st.data())
def test_projection_matches_enumeration(params, data):
    c = rs_codebook(*params)
    coords = data.draw(st.lists(st.integers(0, c.n - 1), min_size=1, max_size=c.n, unique=True))
    assert project_code(c, coords) == {tuple(w[j] for j in coords) for w in c.codewords}


def test_instance_from_codebook_examples():
    q = instance_from_codebook(cycle(4), rs_codebook(3, 4, 2))
    assert all(len(r) <= 9 for r in q.relations)
    # every edge projection is all of F_3^2, so the join holds all 81 words, not only the 27 codewords
    assert len(naive_join(q)) == 81 and not join_equals_codebook(q, rs_codebook(3, 4, 2))
    assert rs_codebook(3, 4, 2).codewords <= set(naive_join(q).rows)
    full = Hypergraph(3, [(0, 1, 2)])
    c = rs_codebook(5, 3, 2)
    assert set(instance_from_codebook(full, c).relations[0].rows) == c.codewords
    rep = rs_codebook(5, 4, 4)
    assert all(len(r) == 5 for r in instance_from_codebook(cycle(4), rep).relations)


def test_crt_from_dual_examples():
    q, c = crt_from_dual(cycle(4), 100, [HALF] * 4)
    assert all(p >= 10 for p in c.alphabet_sizes) and len(set(c.alphabet_sizes)) == 4
    for r in q.relations:
        assert len(r) <= c.alphabet_sizes[r.schema[0]] * c.alphabet_sizes[r.schema[1]]
    q, c = crt_from_dual(cycle(4), 50, [1, 0, 0, 0])
    assert c.alphabet_sizes[0] >= 50 and max(c.alphabet_sizes[1:]) <= 7
    with pytest.raises(ValueError):
        crt_from_dual(cycle(4), 50, [0, 0, 0, 0])
    with pytest.raises(ValueError):
        crt_from_dual(cycle(4), 50, [1, 1, 0, 0])


def test_lower_bound_rows_that_hold():
    inst = lower_bound_instance(cycle(4), 29, 4)
    assert inst.row == 1 and all(len(r) <= 29 for r in inst.instance.relations)
    assert join_equals_codebook(inst.instance, inst.codebook)
    inst = lower_bound_instance(Hypergraph(4, [(0, 1), (2, 3)]), 29, 2)
    assert inst.row == 4 and inst.codebook.size == 29**2
    assert join_equals_codebook(inst.instance, inst.codebook)
    with pytest.raises(ValueError):
        lower_bound_instance(cycle(4), 3, 2)


def test_lower_bound_row2_join_exceeds_code():
    # edge projections of a rate >= 2/n RS code are all of F_q^2, so the join is every word
    inst = lower_bound_instance(cycle(4), 9, 3)
    assert inst.row == 2 and inst.q == 3 and inst.codebook.size == 9
    assert len(naive_join(inst.instance)) == 81
    assert not join_equals_codebook(inst.instance, inst.codebook)


def test_generated_codes_meet_designed_distance():
    for c in (rs_codebook(7, 6, 3), crt_codebook((5, 7, 11, 13), 2), rs_extend(rs_codebook(7, 3, 2), 2)):
        assert min_distance(c) >= c.designed_distance
