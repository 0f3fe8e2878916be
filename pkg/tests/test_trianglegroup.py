import random

import pytest

from ncsurf.algebra import Dgen, Word, endo_compose, serialize
from ncsurf.surface import (
    MarkedSurface, Triangulation, flip, make_cylinder, make_polygon,
    make_punctured_polygon, make_special_polygon, make_zero_polygon,
)
from ncsurf.trianglegroup import (
    base_model, base_relations, expected_rank, flip_mutation,
    monomial_mutation, relation_residues, sector, sector_projection,
    tagging_automorphism, total_angle, triangle_relation,
)


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------

def flippable(tri):
    return [a for a in sorted(tri.internal_arcs())
            if tri.surface.arc_kind(a) != "pending"]


def datum_to(tri, target):
    """The flip datum of the (unique) flip taking ``tri`` to ``target``."""
    for a in flippable(tri):
        t2 = flip(tri, a)
        if t2 == target:
            return t2.flip_datum
    raise AssertionError("triangulations are not one flip apart")


def transport(model, path):
    for t in path:
        model = monomial_mutation(model, datum_to(model.tri, t))
    return model


def models_agree(m1, m2):
    return (m1.tri == m2.tri
            and all(m1.to_basis(m1.words[g]) == m2.to_basis(m2.words[g])
                    for g in m1.words))


def flip_graph(surface, tagged=True):
    """All triangulations reachable by flips, with adjacency (flipped arc)."""
    t0 = surface.triangulation
    if t0.tags:
        t0 = Triangulation(surface, t0.arcs)
    tris = {t0.key(): t0}
    adj = {}
    queue = [t0]
    while queue:
        t = queue.pop()
        for a in flippable(t):
            t2 = flip(t, a)
            if not tagged and t2.tags:
                continue
            adj.setdefault(t.key(), {})[t2.key()] = a
            if t2.key() not in tris:
                tris[t2.key()] = t2
                queue.append(t2)
    return tris, adj


def directed_clockwise(alpha, beta, tri):
    """Whether some triangle of ``tri`` traverses arc alpha then arc beta."""
    return any(t[i].arc == alpha and t[(i + 1) % 3].arc == beta
               for t in tri.triangles for i in range(3))


ALL_SURFACES = [
    make_polygon(4), make_polygon(5), make_polygon(6),
    make_punctured_polygon(2), make_punctured_polygon(3),
    make_punctured_polygon(4),
    make_special_polygon(1, 4), make_special_polygon(2, 4),
    make_special_polygon(3, 5),
    make_zero_polygon(1), make_zero_polygon(2), make_zero_polygon(3),
    make_cylinder(2, 2), make_cylinder(3, 2),
]


# ---------------------------------------------------------------------------
# base models
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("surface", ALL_SURFACES, ids=str)
def test_rank_formula(surface):
    model = base_model(surface.triangulation)
    assert model.rank == expected_rank(surface)


def test_rank_formula_values():
    assert base_model(make_polygon(5).triangulation).rank == 11
    assert base_model(make_punctured_polygon(4).triangulation).rank == 12
    assert base_model(make_special_polygon(4, 4).triangulation).rank == 10
    assert base_model(make_zero_polygon(4).triangulation).rank == 11
    assert base_model(make_cylinder(3, 2).triangulation).rank == 15


@pytest.mark.parametrize("surface", ALL_SURFACES, ids=str)
def test_base_relations_hold(surface):
    model = base_model(surface.triangulation)
    assert all(w.is_identity() for w in relation_residues(model))


def test_base_model_rejects_tagged():
    surf = make_punctured_polygon(2)
    tagged = Triangulation(surf, surf.triangulation.arcs, tags=frozenset({0}))
    with pytest.raises(ValueError):
        base_model(tagged)


def test_triangle_relation_residue_shape():
    a, b, c = Dgen(("x", 1)), Dgen(("x", 2)), Dgen(("x", 3))
    w = triangle_relation((a, b, c))
    assert w == Word.of([(a, 1), (b.bar(), -1), (c, 1),
                         (a.bar(), -1), (b, 1), (c.bar(), -1)])


# ---------------------------------------------------------------------------
# monomial mutation: star display, round trips, transitivity
# ---------------------------------------------------------------------------

def _hexagon_gen(u, v):
    """Directed hexagon arc u -> v for vertices 1..6."""
    if v == u + 1:
        return Dgen(("b", u), 1)
    if (u, v) == (1, 6):
        return Dgen(("b", 6), -1)
    return Dgen(("c", u, v), 1)


def test_hexagon_star_display():
    """Transport from the star triangulation writes every diagonal (i, j) as
    t_{i,i+1} t_{1,i+1}^-1 t_{1j}."""
    surf = make_polygon(6)
    m0 = base_model(surf.triangulation)
    seen = {m0.tri.key(): m0}
    queue = [m0]
    while queue:
        m = queue.pop(0)
        for a in flippable(m.tri):
            m2 = flip_mutation(m, a)
            if m2.tri.key() in seen:
                continue
            seen[m2.tri.key()] = m2
            queue.append(m2)
    assert len(seen) == 14
    for m in seen.values():
        for arc in m.tri.internal_arcs():
            _, i, j = arc
            expect = (Word.gen(_hexagon_gen(i, i + 1))
                      * ~Word.gen(_hexagon_gen(1, i + 1))
                      * Word.gen(_hexagon_gen(1, j)))
            got = m.words[Dgen(arc, 1)]
            assert m.to_basis(got) == m.to_basis(expect)


@pytest.mark.parametrize("surface", ALL_SURFACES, ids=str)
def test_flip_round_trip(surface):
    m0 = base_model(surface.triangulation)
    for a in flippable(m0.tri):
        m1 = flip_mutation(m0, a)
        back = datum_to(m1.tri, m0.tri)
        m2 = monomial_mutation(m1, back, inverse=True)
        assert m2.tri == m0.tri
        assert m2.words == m0.words


@pytest.mark.parametrize("surface", ALL_SURFACES, ids=str)
def test_flip_round_trip_other_order(surface):
    m0 = base_model(surface.triangulation)
    for a in flippable(m0.tri):
        new = flip(m0.tri, a)
        m1 = monomial_mutation(m0, new.flip_datum, inverse=True)
        m2 = monomial_mutation(m1, datum_to(m1.tri, m0.tri))
        assert m2.tri == m0.tri
        assert m2.words == m0.words


def test_commuting_square_transitivity():
    """Disjoint flips transport identically in either order."""
    surf = make_polygon(6)
    m0 = base_model(surf.triangulation)
    arcs = flippable(m0.tri)
    checked = 0
    for a in arcs:
        for b in arcs:
            if a >= b:
                continue
            ta = flip(m0.tri, a)
            if b not in ta.arcs or a not in flip(m0.tri, b).arcs:
                continue  # flips interact
            if flip(ta, b) != flip(flip(m0.tri, b), a):
                continue
            m_ab = flip_mutation(flip_mutation(m0, a), b)
            m_ba = flip_mutation(flip_mutation(m0, b), a)
            assert m_ab.tri == m_ba.tri
            assert m_ab.words == m_ba.words
            checked += 1
    assert checked > 0


def test_mutation_rejects_foreign_datum():
    surf = make_polygon(5)
    m0 = base_model(surf.triangulation)
    other = flip(flip(m0.tri, ("c", 1, 3)), ("c", 2, 4))
    with pytest.raises(ValueError):
        monomial_mutation(m0, other.flip_datum)


# ---------------------------------------------------------------------------
# relation transport along flip walks
# ---------------------------------------------------------------------------

WALK_SURFACES = [
    make_polygon(6), make_polygon(7),
    make_punctured_polygon(3), make_punctured_polygon(4),
    make_special_polygon(2, 4), make_zero_polygon(2), make_cylinder(2, 2),
]


@pytest.mark.parametrize("surface", WALK_SURFACES, ids=str)
def test_relations_hold_along_walks(surface):
    rng = random.Random(hash(str(surface)) & 0xFFFF)
    m0 = base_model(surface.triangulation)
    for _ in range(6):
        m = m0
        for _ in range(6):
            m = flip_mutation(m, rng.choice(flippable(m.tri)))
        assert all(w.is_identity() for w in relation_residues(m))


def test_tagged_states_reached_and_relations_hold():
    """Walks on a punctured polygon pass through tagged triangulations."""
    surf = make_punctured_polygon(3)
    rng = random.Random(7)
    m = base_model(surf.triangulation)
    saw_tags = False
    for _ in range(40):
        m = flip_mutation(m, rng.choice(flippable(m.tri)))
        saw_tags = saw_tags or bool(m.tri.tags)
        assert all(w.is_identity() for w in relation_residues(m))
    assert saw_tags


# ---------------------------------------------------------------------------
# groupoid coherence of transport
# ---------------------------------------------------------------------------

def _cycles(adj, length):
    out = set()

    def dfs(path):
        last = path[-1]
        if len(path) == length and path[0] in adj.get(last, {}):
            c = tuple(path)
            rots = [c[i:] + c[:i] for i in range(length)]
            rots += [tuple(reversed(r)) for r in rots]
            out.add(min(rots))
            return
        if len(path) == length:
            return
        for nb in adj.get(last, {}):
            if nb in path or nb < path[0]:
                continue
            dfs(path + [nb])

    for v in adj:
        dfs([v])
    return out


def _check_cycle_relation(tris, adj, cycle, cache):
    """The two transports Δ_{k-1}→Δ_k→Δ_1 and Δ_{k-1}→…→Δ_1 agree whenever
    the first two flipped arcs are not traversed consecutively clockwise."""
    k = len(cycle)
    held = skipped = 0
    for rot in range(k):
        for rev in (False, True):
            cc = cycle[rot:] + cycle[:rot]
            if rev:
                cc = (cc[0],) + tuple(reversed(cc[1:]))
            D = [tris[x] for x in cc]
            alpha = adj[cc[0]][cc[1]]
            beta = adj[cc[1]][cc[2]]
            if directed_clockwise(alpha, beta, D[0]):
                skipped += 1
                continue
            key = D[-2].key()
            if key not in cache:
                cache[key] = base_model(D[-2])
            m = cache[key]
            lhs = transport(m, [D[-1], D[0]])
            rhs = transport(m, list(reversed(D[1:-2])) + [D[0]])
            assert models_agree(lhs, rhs)
            held += 1
    return held, skipped


def test_pentagon_coherence():
    surf = make_polygon(5)
    tris, adj = flip_graph(surf)
    cycles = _cycles(adj, 5)
    assert len(cycles) == 1
    cache = {}
    held, skipped = _check_cycle_relation(tris, adj, next(iter(cycles)),
                                          cache)
    assert held == 5 and skipped == 5


def test_pentagon_condition_is_sharp():
    """In the clockwise orientation the two transports genuinely differ."""
    surf = make_polygon(5)
    tris, adj = flip_graph(surf)
    cycle = next(iter(_cycles(adj, 5)))
    cache = {}
    diffs = 0
    for rot in range(5):
        for rev in (False, True):
            cc = cycle[rot:] + cycle[:rot]
            if rev:
                cc = (cc[0],) + tuple(reversed(cc[1:]))
            D = [tris[x] for x in cc]
            if not directed_clockwise(adj[cc[0]][cc[1]], adj[cc[1]][cc[2]],
                                      D[0]):
                continue
            key = D[-2].key()
            if key not in cache:
                cache[key] = base_model(D[-2])
            m = cache[key]
            lhs = transport(m, [D[-1], D[0]])
            rhs = transport(m, list(reversed(D[1:-2])) + [D[0]])
            if not models_agree(lhs, rhs):
                diffs += 1
    assert diffs == 5


def test_diamond_and_pentagon_coherence_hexagon():
    surf = make_polygon(6)
    tris, adj = flip_graph(surf)
    cache = {}
    for k in (4, 5):
        cycles = _cycles(adj, k)
        assert cycles
        for c in cycles:
            _check_cycle_relation(tris, adj, c, cache)


@pytest.mark.parametrize("surface",
                         [make_punctured_polygon(3),
                          make_special_polygon(3, 4), make_zero_polygon(3)],
                         ids=str)
def test_cycle_coherence_other_families(surface):
    tris, adj = flip_graph(surface, tagged=False)
    cache = {}
    total = 0
    for k in (4, 5, 6):
        for c in _cycles(adj, k):
            held, _ = _check_cycle_relation(tris, adj, c, cache)
            total += held
    assert total > 0


def test_punctured_bigon_twists_commute():
    surf = make_punctured_polygon(2)
    m0 = base_model(surf.triangulation)

    def twist(m, arc):
        m1 = flip_mutation(m, arc)
        return monomial_mutation(m1, datum_to(m1.tri, m.tri))

    ab = twist(twist(m0, ("r", 1)), ("r", 2))
    ba = twist(twist(m0, ("r", 2)), ("r", 1))
    assert models_agree(ab, ba)


def test_double_flip_is_nontrivial_twist():
    """Flipping the same arc twice is an automorphism, not the identity."""
    surf = make_polygon(5)
    m0 = base_model(surf.triangulation)
    m1 = flip_mutation(m0, ("c", 1, 3))
    m2 = monomial_mutation(m1, datum_to(m1.tri, m0.tri))
    assert m2.tri == m0.tri
    assert not models_agree(m2, m0)
    assert all(w.is_identity() for w in relation_residues(m2))


# ---------------------------------------------------------------------------
# tagging automorphisms
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("n", [2, 3, 4])
def test_tagging_preserves_relations(n):
    surf = make_punctured_polygon(n)
    model = base_model(surf.triangulation)
    phi = tagging_automorphism({0}, model.tri)
    for rel in base_relations(model.tri):
        assert model.normalize(phi.apply(rel)).is_identity()


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_tagging_inverse(n):
    surf = make_punctured_polygon(n)
    tri = surf.triangulation
    phi = tagging_automorphism({0}, tri)
    psi = tagging_automorphism({0}, tri, inverse=True)
    for comp in (endo_compose(phi, psi), endo_compose(psi, phi)):
        assert all(comp.image(g) == Word.gen(g) for g in tri.all_dgens())


def test_tagging_fixes_disjoint_arcs():
    surf = make_punctured_polygon(3)
    tri = surf.triangulation
    phi = tagging_automorphism({0}, tri)
    for i in (1, 2, 3):
        g = Dgen(("b", i), 1)
        assert phi.image(g) == Word.gen(g)


def test_tagging_moves_radial_arcs():
    surf = make_punctured_polygon(3)
    tri = surf.triangulation
    phi = tagging_automorphism({0}, tri)
    for i in (1, 2, 3):
        g = Dgen(("r", i), 1)
        assert phi.image(g) != Word.gen(g)
        assert len(phi.image(g)) == 2


def test_tagging_empty_set_is_identity():
    surf = make_punctured_polygon(3)
    phi = tagging_automorphism(set(), surf.triangulation)
    assert all(phi.image(g) == Word.gen(g)
               for g in surf.triangulation.all_dgens())


def test_tagging_rejects_bad_points():
    surf = make_punctured_polygon(3)
    with pytest.raises(ValueError):
        tagging_automorphism({1}, surf.triangulation)
    unp = make_polygon(4)
    with pytest.raises(ValueError):
        tagging_automorphism({0}, unp.triangulation)


def test_tagging_rejects_self_folded_center():
    surf = make_punctured_polygon(2)
    folded = flip(surf.triangulation, ("r", 1))
    assert 0 in folded.self_folded_centers()
    with pytest.raises(ValueError):
        tagging_automorphism({0}, folded)


# ---------------------------------------------------------------------------
# total angles
# ---------------------------------------------------------------------------

def test_total_angle_triangle():
    tri = make_polygon(3).triangulation
    assert serialize(total_angle(1, tri)) == "x[b3]^-1 * x[b2~] * x[b1]^-1"


def test_total_angle_square():
    tri = make_polygon(4).triangulation  # diagonal (1, 3)
    assert serialize(total_angle(2, tri)) == "x[b1]^-1 * x[c1,3] * x[b2]^-1"
    assert serialize(total_angle(1, tri)) == (
        "x[b4]^-1 * x[b3~] * x[c1,3]^-1 + x[c1,3~]^-1 * x[b2~] * x[b1]^-1")


def test_total_angle_once_punctured_triangle():
    tri = make_punctured_polygon(3).triangulation
    assert serialize(total_angle(0, tri)) == (
        "x[r1~]^-1 * x[b1] * x[r2]^-1 + x[r2~]^-1 * x[b2] * x[r3]^-1"
        " + x[r3~]^-1 * x[b3] * x[r1]^-1")


def test_total_angle_special_loop_weight():
    surf = make_special_polygon(2, 4)
    tri = surf.triangulation
    loop = Dgen(tri.special_loops()[0], 1)
    acc = total_angle(surf.dgen_endpoints(loop)[0], tri)
    coeff = dict(acc.items())[Word.gen(loop, -1)]
    assert str(coeff) == "L"


def test_total_angle_term_count_matches_corners():
    surf = make_punctured_polygon(4)
    tri = surf.triangulation
    for i in range(5):
        corners = sum(1 for t in tri.triangles for g in t
                      if surf.dgen_endpoints(g)[0] == i)
        assert len(total_angle(i, tri)) == corners


def test_total_angle_errors():
    with pytest.raises(ValueError):
        total_angle(0, make_zero_polygon(2).triangulation)
    with pytest.raises(ValueError):
        total_angle(1, make_cylinder(2, 2).triangulation)


def test_total_angle_model_normalization_keeps_relations():
    surf = make_punctured_polygon(3)
    model = base_model(surf.triangulation)
    raw = total_angle(0, model.tri)
    normalized = total_angle(0, model.tri, model)
    assert len(normalized) == len(raw)


# ---------------------------------------------------------------------------
# sector elements
# ---------------------------------------------------------------------------

def test_sector_word_and_mismatch():
    surf = make_polygon(4)
    a, b = Dgen(("b", 1), 1), Dgen(("b", 2), 1)
    u = sector(surf, a, b)
    assert u.word == Word.of([(a.bar(), -1), (b, 1)])
    with pytest.raises(ValueError):
        sector(surf, a, a)  # t(a) = 2, s(a) = 1


def test_sector_triangle_relations():
    """y_{a1,a2} y_{a3,a1} y_{a2,a3} = 1 around every triangle."""
    for surf in (make_polygon(5), make_punctured_polygon(3)):
        model = base_model(surf.triangulation)
        for a1, a2, a3 in model.tri.triangles:
            w = (sector(surf, a1, a2).word * sector(surf, a3, a1).word
                 * sector(surf, a2, a3).word)
            assert model.normalize(w).is_identity()


def test_sector_monogon_relations():
    surf = make_special_polygon(2, 4)
    model = base_model(surf.triangulation)
    for l in model.tri.special_loops():
        g = Dgen(l, 1)
        assert model.normalize(sector(surf, g, g).word).is_identity()


def test_sector_star_relation_telescopes():
    surf = make_polygon(5)
    model = base_model(surf.triangulation)
    gs = [g for g in model.tri.all_dgens()
          if surf.dgen_endpoints(g)[0] == 1]
    w = Word()
    for g, g2 in zip(gs, gs[1:] + gs[:1]):
        w *= sector(surf, g.bar(), g2).word
    assert w.is_identity()


def _choice_of_arcs(model):
    surf = model.tri.surface
    choice = {}
    for g in model.tri.all_dgens():
        choice.setdefault(surf.dgen_endpoints(g)[0], g)
    return choice


def test_sector_projection_fixes_chosen_arcs():
    model = base_model(make_polygon(5).triangulation)
    choice = _choice_of_arcs(model)
    pi = sector_projection(model, choice)
    assert all(pi.image(g).is_identity() for g in choice.values())


def test_sector_projection_idempotent():
    model = base_model(make_polygon(5).triangulation)
    pi = sector_projection(model, _choice_of_arcs(model))
    pi2 = endo_compose(pi, pi)
    assert all(pi2.image(g) == pi.image(g)
               for g in model.tri.all_dgens())


def test_sector_projection_rejects_bad_choice():
    model = base_model(make_polygon(4).triangulation)
    choice = _choice_of_arcs(model)
    choice[1] = choice[2]  # does not start at 1
    with pytest.raises(ValueError):
        sector_projection(model, choice)
