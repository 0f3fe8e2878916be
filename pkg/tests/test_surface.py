import math
import random
from fractions import Fraction

import pytest

from ncsurf.algebra import Dgen
from ncsurf.surface import (
    MarkedSurface, Triangulation, canonical_polygon, crossing_sequence,
    enumerate_triangulations, flip, make_cylinder, make_polygon,
    make_punctured_polygon, make_special_polygon, make_zero_polygon, quiver,
    surface_from_text, surface_to_text, weight,
)


def catalan(n):
    return math.comb(2 * n, n) // (n + 1)


# ---------------------------------------------------------------------------
# construction
# ---------------------------------------------------------------------------

def test_polygon_star():
    t = make_polygon(6).triangulation
    assert t.arcs == {("c", 1, 3), ("c", 1, 4), ("c", 1, 5)}
    # triangles traverse each fan triangle {1, i, i+1} as (i+1->i, i->1, 1->i+1)
    trip = t.triangle_containing(Dgen(("c", 1, 4), 1))
    assert trip == (Dgen(("b", 3), -1), Dgen(("c", 1, 3), -1),
                    Dgen(("c", 1, 4), 1))


def test_punctured_star():
    t = make_punctured_polygon(4).triangulation
    assert t.arcs == {("r", i) for i in range(1, 5)}
    trip = t.triangle_containing(Dgen(("r", 1), 1))
    assert trip == (Dgen(("b", 1), 1), Dgen(("r", 2), -1), Dgen(("r", 1), 1))


def test_special_monogon():
    t = make_special_polygon(1, 4).triangulation
    assert t.arcs == frozenset()
    assert t.triangles == ()
    assert t.surface.is_special_loop(("b", 1))
    assert t.special_loops() == [("b", 1)]


def test_zero_polygon_star():
    t = make_zero_polygon(4).triangulation
    assert t.arcs == {("r", 1), ("l", 1), ("c", 1, 3), ("c", 1, 4)}
    assert t.zero_loop_pairs() == [(("l", 1), ("r", 1))]
    # the self-folded triangle around the zero puncture
    trip = t.triangle_containing(Dgen(("l", 1), 1))
    assert trip == (Dgen(("r", 1), 1), Dgen(("r", 1), -1), Dgen(("l", 1), 1))


def test_bad_parameters():
    with pytest.raises(ValueError):
        make_polygon(2)
    with pytest.raises(ValueError):
        make_special_polygon(3, 1)
    with pytest.raises(ValueError):
        make_cylinder(0, 1)
    with pytest.raises(ValueError):
        MarkedSurface("torus")


# ---------------------------------------------------------------------------
# flips
# ---------------------------------------------------------------------------

def test_flip_hexagon():
    t = make_polygon(6).triangulation
    t2 = flip(t, ("c", 1, 4))
    assert t2.arcs == {("c", 1, 3), ("c", 3, 5), ("c", 1, 5)}
    d = t2.flip_datum
    assert d.kind == "ordinary"
    assert d.f == Dgen(("c", 1, 4), 1)
    assert d.g == Dgen(("c", 3, 5), 1)
    # quadrilateral corners around the flipped arc, in cyclic order
    assert (d.c1, d.c2) == (Dgen(("b", 3), -1), Dgen(("c", 1, 3), -1))
    assert (d.c3, d.c4) == (Dgen(("c", 1, 5), 1), Dgen(("b", 4), -1))
    assert flip(t2, ("c", 3, 5)) == t


def test_flip_errors():
    t = make_polygon(5).triangulation
    with pytest.raises(ValueError):
        flip(t, ("b", 1))
    with pytest.raises(ValueError):
        flip(t, ("c", 2, 4))
    z = make_zero_polygon(3).triangulation
    with pytest.raises(ValueError):
        flip(z, ("r", 1))


def test_flip_involution_everywhere():
    for tri in (make_polygon(6).triangulation,
                make_punctured_polygon(3).triangulation,
                make_special_polygon(4, 4).triangulation,
                make_zero_polygon(3).triangulation):
        for a in sorted(tri.arcs):
            if tri.surface.arc_kind(a) == "pending":
                continue
            t2 = flip(tri, a)
            back = [b for b in t2.arcs - tri.arcs
                    if tri.surface.arc_kind(b) != "pending"]
            assert len(back) == 1
            assert flip(t2, back[0]) == tri


def test_tagged_square():
    # the four tagged triangulations of the once-punctured bigon form a square
    A = make_punctured_polygon(2).triangulation
    B = flip(A, ("r", 2))
    assert B.arcs == {("r", 1), ("l", 1)} and not B.tags
    C = flip(B, ("r", 1))
    assert C.arcs == {("r", 1), ("r", 2)} and C.tags == {0}
    assert C.flip_datum.kind == "tagged_radius"
    D = flip(C, ("r", 1))
    assert D.arcs == {("r", 2), ("l", 2)} and not D.tags
    assert flip(D, ("l", 2)) == A
    # radius flip, then the flip at the tagged-bigon side, returns the start
    assert flip(C, ("r", 2)) == B
    assert flip(B, ("r", 1)) == C


def test_zero_loop_pair_move():
    t = make_zero_polygon(4).triangulation
    t2 = flip(t, ("l", 1))
    assert t2.arcs == {("c", 1, 3), ("c", 1, 4), ("l", 4), ("r", 4)}
    d = t2.flip_datum
    assert d.kind == "pending"
    assert d.alpha == Dgen(("l", 1), 1) and d.beta == Dgen(("r", 1), 1)
    assert d.alpha2 == Dgen(("l", 4), 1) and d.beta2 == Dgen(("r", 4), 1)
    assert flip(t2, ("l", 4)) == t


def test_special_loop_flip():
    t = make_special_polygon(2, 5).triangulation
    assert t.arcs == {("l", 1)}
    t2 = flip(t, ("l", 1))
    assert t2.arcs == {("l", 2)}
    assert t2.flip_datum.kind == "special_loop"
    assert flip(t2, ("l", 2)) == t


def test_arc_count_preserved_on_random_walks():
    rng = random.Random(7)
    for make in (lambda: make_polygon(7), lambda: make_punctured_polygon(3),
                 lambda: make_special_polygon(3, 4),
                 lambda: make_zero_polygon(3)):
        tri = make().triangulation
        count = len(tri.arcs)
        for _ in range(25):
            choices = [a for a in sorted(tri.arcs)
                       if tri.surface.arc_kind(a) != "pending"]
            tri = flip(tri, rng.choice(choices))
            assert len(tri.arcs) == count


# ---------------------------------------------------------------------------
# enumeration
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("n", range(4, 9))
def test_enumerate_polygon(n):
    assert len(enumerate_triangulations(make_polygon(n))) == catalan(n - 2)


@pytest.mark.parametrize("n,count", [(2, 4), (3, 14), (4, 50)])
def test_enumerate_tagged(n, count):
    tris = enumerate_triangulations(make_punctured_polygon(n))
    assert len(tris) == count
    assert count == (3 * n - 2) * math.comb(2 * n - 2, n - 1) // n


def test_enumerate_special_and_zero():
    # one loop position x one fan of the cut (n+1)-gon
    assert len(enumerate_triangulations(make_special_polygon(4, 4))) == 20
    assert len(enumerate_triangulations(make_zero_polygon(3))) == 6


def test_enumerate_cylinder_rejected():
    with pytest.raises(ValueError):
        enumerate_triangulations(make_cylinder(2, 2))


# ---------------------------------------------------------------------------
# quivers and weights
# ---------------------------------------------------------------------------

def test_quiver_hexagon_path():
    q = quiver(make_polygon(6).triangulation)
    assert q.vertices == (("c", 1, 3), ("c", 1, 4), ("c", 1, 5))
    assert q.arrows == {(("c", 1, 3), ("c", 1, 4)): 1,
                        (("c", 1, 4), ("c", 1, 5)): 1}


def test_weights():
    sp = make_special_polygon(4, 4).triangulation
    assert weight(sp, ("l", 1)) == 4
    assert weight(sp, ("c", 1, 3)) == 1
    z = make_zero_polygon(4).triangulation
    assert weight(z, ("l", 1)) == Fraction(1, 2)


def test_quiver_self_folded_rows_match():
    # the loop and the radius of a self-folded triangle see the same arrows
    B = flip(flip(make_punctured_polygon(3).triangulation, ("r", 2)), ("r", 3))
    q = quiver(B)
    pairs = [(l, r) for (l, r) in B.self_folded_pairs()]
    assert pairs
    l, r = pairs[0]
    for v in q.vertices:
        if v in (l, r):
            continue
        assert q.arrow_count(l, v) == q.arrow_count(r, v)
        assert q.arrow_count(v, l) == q.arrow_count(v, r)


def _fz_mutate(B, k):
    m = len(B)
    out = [[0] * m for _ in range(m)]
    for i in range(m):
        for j in range(m):
            if i == k or j == k:
                out[i][j] = -B[i][j]
            else:
                out[i][j] = B[i][j] + (abs(B[i][k]) * B[k][j]
                                       + B[i][k] * abs(B[k][j])) // 2
    return out


def test_quiver_mutation_matches_matrix_mutation():
    t = make_polygon(7).triangulation
    rng = random.Random(3)
    for _ in range(12):
        arc = rng.choice(sorted(t.arcs))
        q = quiver(t)
        k = q.vertices.index(arc)
        expected = _fz_mutate(q.b_matrix(), k)
        t2 = flip(t, arc)
        q2 = quiver(t2)
        new_arc = next(iter(t2.arcs - t.arcs))
        order = [new_arc if v == arc else v for v in q.vertices]
        got = [[q2.arrow_count(a, b) - q2.arrow_count(b, a) for b in order]
               for a in order]
        assert got == expected
        t = t2


# ---------------------------------------------------------------------------
# crossing sequences and canonical polygons
# ---------------------------------------------------------------------------

def test_crossing_sequence_hexagon():
    t = make_polygon(6).triangulation
    assert crossing_sequence((2, 5), t) == (("c", 1, 3), ("c", 1, 4))


def test_canonical_polygon_pentagon():
    t = make_polygon(5).triangulation
    assert crossing_sequence((2, 4), t) == (("c", 1, 3),)
    cp = canonical_polygon((2, 4), t)
    assert len(cp.faces) == 2
    kinds = [f[0] for f in cp.faces]
    assert kinds == ["tri", "tri"]
    # the two fan triangles glue into the quadrilateral (1,2,3,4)
    corners = set()
    for _, triple in cp.faces:
        for g in triple:
            s, tt = t.surface.dgen_endpoints(g)
            corners.update((s, tt))
    assert corners == {1, 2, 3, 4}


def test_degenerate_monogon_recorded():
    t = make_special_polygon(3, 4).triangulation
    assert crossing_sequence(("l", 2), t) == (
        ("c", 1, 3), ("l", 1), ("l", 1), ("c", 1, 3))
    cp = canonical_polygon(("l", 2), t)
    assert cp.faces[2] == ("monogon", ("l", 1))
    assert len(cp.faces) == 5


def test_crossing_sequence_trivial_for_triangulation_arcs():
    t = make_punctured_polygon(3).triangulation
    for a in sorted(t.arcs):
        assert crossing_sequence(a, t) == ()


def test_crossing_count_lemma():
    # a curve crossing r arcs passes through r + 1 triangles
    t = flip(make_polygon(7).triangulation, ("c", 1, 4))
    for curve in [(2, 5), (2, 6), (3, 6), (2, 7)]:
        cp = canonical_polygon(curve, t)
        assert len(cp.faces) == len(cp.crossings) + 1


# ---------------------------------------------------------------------------
# text format
# ---------------------------------------------------------------------------

def test_text_roundtrip():
    tris = [make_polygon(6).triangulation,
            make_punctured_polygon(3).triangulation,
            make_special_polygon(3, 5).triangulation,
            make_zero_polygon(3).triangulation,
            make_cylinder(3, 2).triangulation]
    C = flip(flip(make_punctured_polygon(2).triangulation, ("r", 2)), ("r", 1))
    tris.append(C)  # tagged
    for t in tris:
        text = surface_to_text(t)
        assert surface_from_text(text) == t
        assert surface_to_text(surface_from_text(text)) == text


def test_text_rejects_garbage():
    with pytest.raises(ValueError):
        surface_from_text("frobnicate 1 2 3\n")
    t = make_polygon(6).triangulation
    bad = surface_to_text(t).replace("glue c1,3 c1,3~", "glue c1,3 c1,4~")
    with pytest.raises(ValueError):
        surface_from_text(bad)


# ---------------------------------------------------------------------------
# cylinder
# ---------------------------------------------------------------------------

def test_cylinder_flip_back():
    t = make_cylinder(3, 2).triangulation
    assert len(t.arcs) == 5
    t2 = flip(t, ("a", 1))
    assert len(t2.arcs) == 5
    new = next(iter(t2.arcs - t.arcs))
    assert flip(t2, new) == t


def test_cylinder_walk():
    t = make_cylinder(2, 2).triangulation
    rng = random.Random(1)
    for _ in range(20):
        t = flip(t, rng.choice(sorted(t.arcs)))
        assert len(t.arcs) == 4
