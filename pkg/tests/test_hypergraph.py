import itertools
import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import brute
from conftest import CORPUS
from hypermatch import hypergraph as hg


def test_validate_canonicalises():
    h = hg.validate(4, [(3, 2, 1), (4, 2, 3)])
    assert h.hyperedges == ((1, 2, 3), (2, 3, 4))
    assert h.rank == h.anti_rank == 3 and h.is_uniform


@pytest.mark.parametrize("edges, exc", [
    ([()], hg.EmptyEdge),
    ([(1, 5)], hg.NodeOutOfRange),
    ([(1, 2)], hg.NotCovering),
    ([(1, 2, 3), (1, 2), (3, 4)], hg.NotSimple),
    ([(1, 2), (3, 4)], hg.NotConnected),
])
def test_validate_rejects(edges, exc):
    with pytest.raises(exc):
        hg.validate(4, edges)


def test_profile_fano():
    p = hg.profile(hg.generate("fano"))
    assert (p.rank, p.uniform_r, p.regular_d, p.transversal_number, p.connected) == (3, 3, 3, 3, True)


@pytest.mark.parametrize("name", sorted(CORPUS))
def test_transversal_number_matches_brute(name):
    h = CORPUS[name]
    assert hg.transversal_number(h) == brute.tau(h)


@pytest.mark.parametrize("name", sorted(CORPUS))
def test_minimal_transversals_match_brute(name):
    h = CORPUS[name]
    assert hg.minimal_transversals(h, "inclusion_minimal") == sorted(brute.inclusion_minimal(h), key=lambda t: (len(t), t))
    tau = brute.tau(h)
    mins = hg.minimal_transversals(h, "minimum_cardinality")
    want = sorted(t for t in brute.inclusion_minimal(h) if len(t) == tau)
    assert mins == want


def test_complete_minus_example_transversal():
    h = hg.generate("complete_minus", q=5, r=3, J=[[1, 2, 3]])
    assert hg.minimal_transversals(h, "minimum_cardinality") == [(4, 5)]


def test_partitions_k_partite_cycle():
    w = hg.detect_partitions(hg.generate("cycle", q=12, r=3, l=2))
    assert w.kind == "k_partite" and w.k == 3
    h = hg.generate("cycle", q=12, r=3, l=2)
    for e in h.hyperedges:
        assert all(len(set(e) & set(p)) == 1 for p in w.parts)


def test_partitions_fano_minus_bipartite():
    h = hg.generate("fano_minus", H=[4, 5, 7])
    w = hg.detect_partitions(h)
    assert w.bipartite is not None
    v1, v2 = map(set, w.bipartite)
    assert v1 | v2 == set(h.nodes) and not v1 & v2
    assert all(len(set(e) & v1) == 1 for e in h.hyperedges)


def test_partitions_none_on_fano_and_complete():
    assert hg.detect_partitions(hg.generate("fano")).kind == "none"
    assert hg.detect_partitions(hg.generate("complete", q=5, r=3)).kind == "none"


def _brute_exact_hitting(h):
    for k in range(1, h.q):
        for S in itertools.combinations(h.nodes, k):
            if all(len(set(S) & set(e)) == 1 for e in h.hyperedges):
                return True
    return False


@pytest.mark.parametrize("name", sorted(k for k, h in CORPUS.items() if h.is_uniform))
def test_bipartite_detection_is_exhaustive(name):
    h = CORPUS[name]
    assert (hg.detect_partitions(h).bipartite is not None) == _brute_exact_hitting(h)


@pytest.mark.parametrize("name", sorted(k for k, h in CORPUS.items() if h.q <= 8))
def test_hall_matches_brute(name):
    h = CORPUS[name]
    res = hg.check_hall(h)
    viol = brute.hall_violations(h)
    assert res.satisfied == (not viol)
    if not res.satisfied:
        v1, v2 = set(res.v1), set(res.v2)
        assert len(v2) < len(v1) and not v1 & v2
        assert all(len(set(e) & v2) >= len(set(e) & v1) for e in h.hyperedges)
        assert len(v1) - len(v2) == max(len(a) - len(b) for a, b in viol)


def test_hall_star_violation():
    # the centre alone covers every leaf's hyperedge
    res = hg.check_hall(CORPUS["graph-star(4)"])
    assert not res.satisfied and res.v1 == (2, 3, 4) and res.v2 == (1,)
    assert hg.check_hall(hg.generate("fano")).satisfied


def test_verify_cycle():
    h = hg.generate("cycle", q=12, r=3, l=2)
    assert hg.verify_cycle(h, list(range(1, 13)), 2)
    assert not hg.verify_cycle(h, [2, 1] + list(range(3, 13)), 2)
    # the complete 3-uniform hypergraph on 4 nodes is itself a 2-cycle
    assert hg.verify_cycle(hg.generate("complete", q=4, r=3), [1, 2, 3, 4], 2)


def test_verify_cycle_rejects_bad_l():
    with pytest.raises(hg.BadParameters):
        hg.verify_cycle(hg.generate("cycle", q=6, r=3, l=2), list(range(1, 7)), 3)


def test_guards():
    big = hg.generate("complete", q=16, r=3)
    with pytest.raises(hg.TooLarge):
        hg.check_hall(big)
    with pytest.raises(hg.GuardExceeded):
        hg.detect_partitions(hg.generate("cycle", q=21, r=3, l=2))


@pytest.mark.parametrize("text, m", [
    ("complete:q=5,r=3", 10),
    ("complete-minus:q=6,r=3,J=[[1,2,3],[4,5,6]]", 18),
    ("cycle:q=12,r=3,l=2", 12),
    ("fano", 7),
    ("fano-minus:H=[4,5,7]", 6),
    ("star:q=5,E=[[1,2,3],[1,4,5]]", 2),
])
def test_family_strings(text, m):
    assert hg.generate(text).m == m


@pytest.mark.parametrize("family, params", [
    ("complete", {"q": 3, "r": 4}),
    ("complete_minus", {"q": 6, "r": 3, "J": [[1, 2, 3], [3, 4, 5]]}),
    ("cycle", {"q": 7, "r": 3, "l": 1}),
    ("fano_minus", {"H": [1, 2, 3]}),
    ("star", {"q": 4, "E": [[2, 3, 4], [1, 2]]}),
    ("petersen", {}),
])
def test_family_errors(family, params):
    with pytest.raises(hg.HypergraphError):
        hg.generate(family, **params)


def test_roundtrip(tmp_path):
    h = hg.generate("fano")
    path = tmp_path / "h.json"
    hg.dump_hypergraph(h, path)
    assert hg.load_hypergraph(path) == h
    assert json.loads(path.read_text())["q"] == 7


@st.composite
def uniform_hypergraphs(draw):
    q = draw(st.integers(4, 8))
    r = draw(st.integers(2, 3))
    pool = list(itertools.combinations(range(1, q + 1), r))
    edges = draw(st.lists(st.sampled_from(pool), min_size=2, max_size=8, unique=True))
    try:
        return hg.validate(q, edges)
    except hg.HypergraphError:
        return None


@settings(max_examples=60, deadline=None)
@given(uniform_hypergraphs())
def test_random_uniform_structure(h):
    if h is None:
        return
    assert hg.transversal_number(h) == brute.tau(h)
    w = hg.detect_partitions(h)
    assert (w.bipartite is not None) == _brute_exact_hitting(h)
    if w.kind == "k_partite":
        assert all(all(len(set(e) & set(p)) == 1 for p in w.parts) for e in h.hyperedges)
