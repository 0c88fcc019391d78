import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from tightham.errors import InvalidArgument, StructuralError
from tightham.hypergraph import DenseHypergraph, make_complete
from tightham.paths import (
    Absorber, Fan, ReservoirPath, SpikePath, TightPath, absorber_traverse, fan_mult, path_from_json,
    reservoir_traverse, rev, validate_spike, validate_tight, windows,
)
from tightham.verify import oracle_mult

from conftest import rng_for


def test_validate_tight_examples():
    k6 = make_complete(6, 3)
    assert validate_tight([0, 1, 2, 3, 4, 5], k6)
    missing = DenseHypergraph(6, 3, [e for e in k6.edges if e != (1, 2, 3)])
    assert not validate_tight([0, 1, 2, 3, 4, 5], missing)
    assert not validate_tight([0, 1, 2, 1], k6)
    with pytest.raises(InvalidArgument):
        validate_tight([0, 1], k6)


def test_validate_tight_agrees_with_window_enumeration():
    rng = rng_for("tight-windows")
    for _ in range(300):
        edges = {tuple(sorted(rng.sample(range(9), 3))) for _ in range(40)}
        g = DenseHypergraph(9, 3, edges)
        seq = rng.sample(range(9), rng.randint(3, 9))
        brute = all(tuple(sorted(seq[i:i + 3])) in edges for i in range(len(seq) - 2))
        assert validate_tight(seq, g) == brute


def test_validate_spike_examples():
    k6 = make_complete(6, 3)
    assert validate_spike(SpikePath([(0, 1), (2, 3), (4, 5)]), k6)
    # rev((0,1)) + (2,3) = (1,0,2,3): windows {0,1,2} and {0,2,3}
    assert SpikePath([(0, 1), (2, 3)]).required_edges() == [(0, 1, 2), (0, 2, 3)]
    without = DenseHypergraph(6, 3, [e for e in k6.edges if e != (0, 2, 3)])
    assert not validate_spike(SpikePath([(0, 1), (2, 3)]), without)
    assert not validate_spike(SpikePath([(0, 1), (1, 3)]), k6)
    with pytest.raises(InvalidArgument):
        validate_spike(SpikePath([(0, 1)]), k6)


def test_tight_path_ops():
    P = TightPath(3, [2, 3, 4])
    P.append(5)
    P.prepend(1)
    assert P.vertices() == [1, 2, 3, 4, 5]
    assert P.end() == (4, 5) and P.start() == (1, 2)
    assert P.reversed().vertices() == [5, 4, 3, 2, 1]
    assert path_from_json(P.to_json(), 3).vertices() == P.vertices()
    with pytest.raises(StructuralError):
        P.append(3)


@given(st.permutations(range(8)))
def test_reversal_is_an_involution(order):
    P = TightPath(3, order)
    assert P.reversed().reversed().vertices() == P.vertices()
    edges = {tuple(sorted(w)) for w in windows(order, 3)}
    assert validate_tight(P.reversed(), edges, 3)


def test_fan_mult_examples():
    fan = Fan((0, 1), 3)
    assert fan_mult(fan, {7}) == 0
    leaf = fan.add_child(0, 2)
    fan.leaves = [leaf]
    assert fan_mult(fan, {1, 2}) == 1
    assert fan_mult(fan, set(fan.end[leaf])) == 1


def test_fan_mult_on_shared_prefix():
    # three paths 0 1 | 2 3 4, 0 1 | 2 3 5, 0 1 | 2 6 4
    fan = Fan((0, 1), 3)
    a = fan.add_child(0, 2)
    b = fan.add_child(a, 3)
    c = fan.add_child(a, 6)
    fan.leaves = [fan.add_child(b, 4), fan.add_child(b, 5), fan.add_child(c, 4)]
    paths = fan.paths()
    for frag in [{2}, {3}, {4}, {2, 3}, {3, 4}, {6, 4}, {1, 2}, {0, 1}, {1, 2, 3}]:
        assert fan_mult(fan, frag) == oracle_mult(paths, frag), frag
    assert fan_mult(fan, {2}) == 1 and fan_mult(fan, {4}) == 2


def _random_fan(rng, r, spike=False):
    fan = Fan(tuple(range(r - 1)), r, spike)
    nxt = r - 1
    for _ in range(rng.randint(1, 4)):
        new = []
        for leaf in list(fan.leaves):
            kids = rng.randint(0, 3)
            if kids == 0:
                fan.prune(leaf)
                continue
            chosen = set()
            for _ in range(kids):
                # reuse earlier vertices sometimes so intervals repeat across paths;
                # siblings stay distinct as in a real fan
                pool = [v for v in range(nxt + 1) if not fan.on_path(leaf, v) and v not in chosen]
                if not pool:
                    break
                b = rng.choice(pool)
                chosen.add(b)
                nxt = max(nxt, b + 1)
                new.append(fan.add_child(leaf, b))
        fan.leaves = new
        if not new:
            break
    return fan


@given(st.integers(0, 10**6), st.sampled_from([3, 4]))
def test_fan_mult_matches_truncation_count(seed, r):
    rng = random.Random(seed)
    fan = _random_fan(rng, r)
    paths = fan.paths()
    verts = sorted({v for P in paths for v in P})
    for _ in range(10):
        if not verts:
            break
        frag = set(rng.sample(verts, rng.randint(1, min(r, len(verts)))))
        assert fan_mult(fan, frag) == oracle_mult(paths, frag)


def test_spike_fan_end_tuple_reverses_on_completed_spikes():
    fan = Fan((0, 1), 3, spike=True)
    a = fan.add_child(0, 2)
    assert fan.end[a] == (1, 2)
    b = fan.add_child(a, 3)
    # spike (2,3) is complete: tight continuation must start from (3,2)
    assert fan.end[b] == (3, 2)
    assert fan.spikes_of(b) == [(1, 0), (2, 3)]
    c = fan.add_child(fan.add_child(b, 4), 5)
    assert fan.spikes_of(c) == [(1, 0), (2, 3), (4, 5)]
    k7 = make_complete(7, 3)
    assert validate_spike(SpikePath(fan.spikes_of(c)), k7)
    with pytest.raises(StructuralError):
        fan.spikes_of(fan.add_child(c, 6))


def _miniature_absorber():
    # seed (x2, x1, a, u1, u2) = (0, 1, 2, 3, 4); spikes x1 x2 v y2 y1 u
    ab = Absorber(2, (0, 1, 2, 3, 4), [(1, 0), (5, 6), (7, 8), (9, 10), (11, 12), (3, 4)],
                  [[1, 0, 13, 12, 11], [5, 6, 14, 10, 9]])
    required = set()
    required |= {tuple(sorted(w)) for w in windows(ab.seed, 3)}
    required |= set(SpikePath(ab.spikes).required_edges())
    for P in ab.connectors:
        required |= {tuple(sorted(w)) for w in windows(P, 3)}
    return ab, required


def test_miniature_absorber_traversals():
    ab, required = _miniature_absorber()
    assert ab.t == 2 and ab.v_a == (7, 8) and ab.y(1) == (11, 12) and ab.x(2) == (5, 6)
    with_a = absorber_traverse(ab, True)
    without_a = absorber_traverse(ab, False)
    assert with_a == [4, 3, 2, 1, 0, 13, 12, 11, 9, 10, 14, 6, 5, 7, 8]
    assert without_a == [4, 3, 11, 12, 13, 0, 1, 5, 6, 14, 10, 9, 7, 8]
    assert validate_tight(with_a, required, 3)
    assert validate_tight(without_a, required, 3)
    assert set(with_a) - set(without_a) == {2}


def test_absorber_roundtrip_and_completeness():
    ab, _ = _miniature_absorber()
    assert Absorber.from_dict(ab.to_dict()) == ab
    broken = Absorber(2, ab.seed, ab.spikes, ab.connectors[:1])
    with pytest.raises(StructuralError):
        absorber_traverse(broken, True)


def _shifted(ab, shift):
    sh = lambda t: tuple(v + shift for v in t)
    return Absorber(ab.a + shift, sh(ab.seed), [sh(s) for s in ab.spikes], [list(sh(P)) for P in ab.connectors])


def _miniature_reservoir():
    ab1, req1 = _miniature_absorber()
    ab2 = _shifted(ab1, 20)
    link = list(ab1.v_a) + [40] + list(rev(ab2.u_a))
    required = req1 | {tuple(v + 20 for v in e) for e in req1} | {tuple(sorted(w)) for w in windows(link, 3)}
    return ReservoirPath([ab1, ab2], [link]), required


def test_reservoir_traverse_on_miniature():
    rp, required = _miniature_reservoir()
    assert rp.R == {2, 22}
    full = reservoir_traverse(rp, ())
    assert validate_tight(full, required, 3)
    assert full[:2] == list(rp.start) and full[-2:] == list(rp.end)
    for omit in [(), (2,), (22,), (2, 22)]:
        seq = reservoir_traverse(rp, omit)
        assert validate_tight(seq, required, 3)
        assert set(seq) == set(full) - set(omit)
    with pytest.raises(InvalidArgument):
        reservoir_traverse(rp, (0,))
    assert ReservoirPath.from_json(rp.to_json()).absorbers == rp.absorbers


def test_single_absorber_reservoir():
    ab, required = _miniature_absorber()
    rp = ReservoirPath([ab], [])
    assert reservoir_traverse(rp, ()) == absorber_traverse(ab, True)
