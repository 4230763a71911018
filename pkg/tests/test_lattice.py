from math import comb

import pytest
from hypothesis import given, settings, strategies as st

from gkminer.lattice import CandidateKey, Lattice, create_lattice, is_embedded, pattern_size

CITY = ("city", "City")
COUNTRY = ("country", "Country")


def ck(*items, center="College"):
    return CandidateKey(center, [i for i in items if isinstance(i, str)],
                        [i for i in items if not isinstance(i, str)])


class Sizes(dict):
    def min_size(self, t):
        return self.get(t)


def test_fig2_lattice_shape():
    lat = create_lattice(["name"], [CITY, COUNTRY], "College")
    assert len(lat) == 7
    assert [len(level) for level in lat.levels] == [3, 3, 1]
    assert all(not c.prune for level in lat.levels for c in level)


def test_trivial_lattices():
    assert len(create_lattice(["a"], [], "T")) == 1
    empty = create_lattice([], [], "T")
    assert len(empty) == 0 and list(empty) == [] and empty.levels == []


def test_iteration_order():
    lat = create_lattice(["name"], [COUNTRY, CITY], "College")
    assert list(lat)[:3] == [ck("name"), ck(CITY), ck(COUNTRY)]
    assert list(lat)[3:] == [ck("name", CITY), ck("name", COUNTRY), ck(CITY, COUNTRY),
                             ck("name", CITY, COUNTRY)]


def test_embedding_examples():
    assert is_embedded(ck("name"), ck("name", CITY))
    assert not is_embedded(ck("motto"), ck("name", CITY))
    p = ck("name", CITY)
    assert is_embedded(p, p)
    assert not is_embedded(ck("name", center="City"), ck("name"))


def test_pattern_size():
    assert pattern_size(ck("name", "motto"), Sizes()) == 2
    sizes = Sizes(City=3, Country=1)  # City {name, country}: 2 + 1
    assert pattern_size(ck("name", CITY), sizes) == 5
    assert pattern_size(ck(), Sizes()) == 0
    with pytest.raises(ValueError):
        pattern_size(ck(CITY), Sizes())


def test_prune_descendants():
    lat = create_lattice(["name"], [CITY, COUNTRY], "College")
    lat.prune_descendants(ck("name"))
    flagged = [c for level in lat.levels for c in level if c.prune]
    assert set(flagged) == {ck("name", CITY), ck("name", COUNTRY), ck("name", CITY, COUNTRY)}
    assert list(lat) == [ck("name"), ck(CITY), ck(COUNTRY), ck(CITY, COUNTRY)]
    lat.prune_descendants(ck("name"))
    assert list(lat) == [ck("name"), ck(CITY), ck(COUNTRY), ck(CITY, COUNTRY)]
    lat.prune_descendants(ck("name", CITY, COUNTRY))
    assert len(list(lat)) == 4


def test_prune_itself_and_all():
    lat = create_lattice(["name"], [CITY], "College")
    lat.prune(ck(CITY))
    assert list(lat) == [ck("name")]
    lat.prune(ck("name"))
    assert list(lat) == []


def test_remove_type_and_truncate():
    lat = create_lattice(["name"], [CITY, COUNTRY], "College")
    assert lat.remove_type("City") == [CITY]
    assert lat.remove_type("City") == []
    assert len(lat) == 3
    assert CITY not in {v for c in lat for v in c.variables}
    lat.truncate(1)
    assert list(lat) == [ck("name"), ck(COUNTRY)]


def test_parents():
    lat = create_lattice(["name"], [CITY, COUNTRY], "College")
    assert set(lat.parents(ck("name", CITY))) == {ck("name"), ck(CITY)}
    assert lat.parents(ck("name")) == []


def test_lazy_levels_match_materialized():
    items = [f"a{i}" for i in range(8)]
    eager = create_lattice(items, [], "T")
    lazy = create_lattice(items, [], "T", cap=10)
    lazy.prune_descendants(ck("a0", "a1", center="T"))
    eager.prune_descendants(ck("a0", "a1", center="T"))
    assert list(lazy) == list(eager)
    assert len(list(eager)) == 2 ** 8 - 1 - (2 ** 6 - 1)


def test_candidate_normalization():
    a = CandidateKey("T", ["b", "a", "a"], [("y", "U"), ("x", "U")])
    assert a.constants == ("a", "b") and a.variables == (("x", "U"), ("y", "U"))
    assert a.level == 4 and a.variable_types == ["U"]
    assert a == CandidateKey("T", ["a", "b"], [("x", "U"), ("y", "U")], prune=True)


# -- properties ---------------------------------------------------------------

ITEMS = ["a", "b", "c", ("e", "U"), ("f", "V")]
subsets = st.sets(st.sampled_from(ITEMS), max_size=5).map(lambda s: ck(*s, center="T"))


@settings(max_examples=200, deadline=None)
@given(subsets, subsets, subsets)
def test_embedding_is_partial_order(p, q, r):
    assert is_embedded(p, p)
    if is_embedded(p, q) and is_embedded(q, p):
        assert p == q
    if is_embedded(p, q) and is_embedded(q, r):
        assert is_embedded(p, r)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 4), st.integers(0, 3))
def test_level_counts(na, nv):
    lat = create_lattice([f"a{i}" for i in range(na)], [(f"l{i}", "U") for i in range(nv)], "T")
    n = na + nv
    assert [len(level) for level in lat.levels] == [comb(n, l) for l in range(1, n + 1)]
    assert len(lat) == 2 ** n - 1
    for level in lat.levels:
        for c in level:
            assert all(is_embedded(p, c) for p in lat.parents(c))


@settings(max_examples=150, deadline=None)
@given(st.lists(subsets.filter(lambda c: c.level > 0), max_size=4))
def test_no_pruned_superset_is_yielded(pruned):
    lat = create_lattice(["a", "b", "c"], [("e", "U"), ("f", "V")], "T")
    for p in pruned:
        lat.prune_descendants(p)
    for c in lat:
        assert not any(is_embedded(p, c) and p != c for p in pruned)
    expected = sum(1 for level in lat.levels for c in level
                   if not any(is_embedded(p, c) and p != c for p in pruned))
    assert len(list(lat)) == expected


@settings(max_examples=150, deadline=None)
@given(subsets, subsets, st.integers(1, 4), st.integers(1, 4))
def test_pattern_size_monotone(p, q, su, sv):
    sizes = Sizes(U=su, V=sv)
    if is_embedded(p, q) and p != q:
        assert pattern_size(p, sizes) < pattern_size(q, sizes)
