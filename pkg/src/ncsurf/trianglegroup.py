"""Free-group models of the triangle group of a triangulated surface.

Each triangulation carries a group generated by two letters per arc (one for
each direction), subject to one relation per triangle plus loop relations at
special and zero punctures.  The group is free; ``base_model`` computes a free
basis by Tietze elimination and ``monomial_mutation`` transports the
generators across flips by single-word (monomial) substitutions.
"""

from .algebra import ArcEndo, Dgen, RingElem, Word, gen_key, scalar_field
from .surface import MarkedSurface, Triangulation, flip


# ---------------------------------------------------------------------------
# defining relations
# ---------------------------------------------------------------------------

def triangle_relation(triple):
    """Residue word of t1 t2bar^-1 t3 = t3bar t2 t1bar read around a cyclic
    triangle; identity iff the relation holds."""
    g1, g2, g3 = triple
    return Word.of([(g1, 1), (g2.bar(), -1), (g3, 1),
                    (g1.bar(), -1), (g2, 1), (g3.bar(), -1)])


def base_relations(tri):
    """Defining relations of the triangle group of ``tri``, as residue words."""
    rels = []
    for t in tri.triangles:
        rels.append(triangle_relation(t))
    for l in tri.special_loops():
        rels.append(Word.of([(Dgen(l, 1), 1), (Dgen(l, -1), -1)]))
    for (l, r) in tri.zero_loop_pairs():
        prod = Word.of([(Dgen(r, 1), 1), (Dgen(r, -1), 1)])
        for sg in (1, -1):
            rels.append(Word.gen(Dgen(l, sg)) * ~prod)
    if tri.surface.family == "punctured":
        # a self-folded loop equals its reverse (the bigon relation of the
        # tagged pair it encloses)
        for (l, r) in tri.self_folded_pairs():
            rels.append(Word.of([(Dgen(l, 1), 1), (Dgen(l, -1), -1)]))
    return rels


def expected_rank(surface):
    n = surface.n
    if surface.family == "polygon":
        return 3 * n - 4
    if surface.family == "punctured":
        return 3 * n
    if surface.family == "special":
        return 3 * n - 2
    if surface.family == "zero":
        return 3 * n - 1
    if surface.family == "cylinder":
        return 3 * (surface.p + surface.q)
    raise ValueError("unsupported surface %r" % (surface,))


# ---------------------------------------------------------------------------
# Tietze elimination
# ---------------------------------------------------------------------------

def _subst(mapping, w):
    out = Word()
    for g, p in w:
        img = mapping.get(g)
        if img is None:
            out.add(g, p)
        else:
            out *= img ** p
    return out


def _tietze(gens, rels):
    """Eliminate one generator per independent relation; returns the surviving
    basis and the substitution map for every generator."""
    sigma = {g: Word.gen(g) for g in gens}
    basis = list(gens)
    for rel in rels:
        w = _subst(sigma, rel)
        if w.is_identity():
            continue  # redundant relation
        counts = {}
        for g, p in w:
            counts[g] = counts.get(g, 0) + abs(p)
        pick = None
        for i, (g, p) in enumerate(w):
            if counts[g] == 1 and abs(p) == 1:
                if pick is None or gen_key(g) > gen_key(pick[1]):
                    pick = (i, g, p)
        if pick is None:
            raise ValueError("relation %r has no eliminable generator" % (w,))
        i, g, p = pick
        letters = list(w)
        before = Word.of(letters[:i])
        after = Word.of(letters[i + 1:])
        sigma[g] = (~before * ~after) ** p
        basis.remove(g)
        killer = ArcEndo({g: sigma[g]})
        for k in list(sigma):
            if k != g:
                sigma[k] = killer.apply(sigma[k])
    return basis, sigma


# ---------------------------------------------------------------------------
# models
# ---------------------------------------------------------------------------

class TriangleGroupModel:
    """A free-group model: a basis computed at a reference triangulation and a
    word for every directed arc of the current triangulation."""

    def __init__(self, base, basis, sigma, tri, words):
        self.base = base          # reference triangulation
        self.basis = tuple(basis)
        self.sigma = sigma        # reference letter -> basis word
        self.tri = tri            # current triangulation
        self.words = words        # current directed arc -> reference word

    @property
    def rank(self):
        return len(self.basis)

    def word(self, g):
        """The (unnormalized) reference word of a current directed arc."""
        return self.words[g].copy()

    def normalize(self, w):
        """Reduce a word over the current arc alphabet to the free basis."""
        return _subst(self.sigma, _subst(self.words, w))

    def to_basis(self, w):
        """Reduce a word over the reference arc alphabet to the free basis."""
        return _subst(self.sigma, w)

    def express(self, g):
        return self.normalize(Word.gen(g))

    def equal(self, w1, w2):
        return self.normalize(w1) == self.normalize(w2)

    def with_words(self, tri, words):
        return TriangleGroupModel(self.base, self.basis, self.sigma, tri,
                                  words)

    def __repr__(self):
        return "TriangleGroupModel(rank=%d, tri=%r)" % (self.rank, self.tri)


def base_model(tri):
    """Free-group model of the triangle group at a triangulation."""
    if isinstance(tri, MarkedSurface):
        tri = tri.triangulation
    if tri.tags:
        raise ValueError("base models are built at untagged triangulations")
    gens = tri.all_dgens()
    basis, sigma = _tietze(gens, base_relations(tri))
    words = {g: Word.gen(g) for g in gens}
    model = TriangleGroupModel(tri, basis, sigma, tri, words)
    if model.rank != expected_rank(tri.surface):
        raise AssertionError("rank %d does not match the surface formula %d"
                             % (model.rank, expected_rank(tri.surface)))
    return model


def relation_residues(model):
    """Normalized residues of the defining relations of the current
    triangulation; the model satisfies them iff all are identity words."""
    return [model.normalize(w) for w in base_relations(model.tri)]


# ---------------------------------------------------------------------------
# monomial mutation
# ---------------------------------------------------------------------------

def _eval_words(words, w):
    out = Word()
    for g, p in w:
        out *= words[g] ** p
    return out


def _twist(words, endo):
    return {g: _eval_words(words, endo.image(g)) for g in words}


def _ordinary_words(words, datum, inverse):
    f, c1, c2, c3, c4, g = (datum.f, datum.c1, datum.c2, datum.c3, datum.c4,
                            datum.g)
    new = {k: v for k, v in words.items() if k.arc != f.arc}
    W = words.__getitem__
    if not inverse:
        new[g] = W(c1.bar()) * W(f) ** -1 * W(c3)
        new[g.bar()] = W(c3.bar()) * W(f.bar()) ** -1 * W(c1)
    else:
        new[g] = W(c2) * W(f.bar()) ** -1 * W(c4.bar())
        new[g.bar()] = W(c4) * W(f) ** -1 * W(c2.bar())
    return new


def _pending_words(words, datum, inverse):
    a, b, a1, a2 = datum.alpha, datum.beta, datum.a1, datum.a2
    a_new, b_new = datum.alpha2, datum.beta2
    new = {k: v for k, v in words.items()
           if k.arc not in (a.arc, b.arc)}
    W = words.__getitem__
    if not inverse:
        new[b_new.bar()] = W(b) ** -1 * W(a1)
        new[b_new] = W(a1.bar()) * W(b.bar()) ** -1
        new[a_new] = W(a1.bar()) * W(a) ** -1 * W(a1)
        new[a_new.bar()] = W(a1.bar()) * W(a.bar()) ** -1 * W(a1)
    else:
        new[b_new] = W(a2) * W(b.bar()) ** -1
        new[b_new.bar()] = W(b) ** -1 * W(a2.bar())
        new[a_new] = W(a2) * W(a) ** -1 * W(a2.bar())
        new[a_new.bar()] = W(a2) * W(a.bar()) ** -1 * W(a2.bar())
    return new


def _special_loop_words(words, datum, inverse):
    a, a1, a2, a_new = datum.alpha, datum.a1, datum.a2, datum.alpha2
    new = {k: v for k, v in words.items() if k.arc != a.arc}
    W = words.__getitem__
    if not inverse:
        new[a_new] = W(a1.bar()) * W(a) ** -1 * W(a1)
        new[a_new.bar()] = W(a1.bar()) * W(a.bar()) ** -1 * W(a1)
    else:
        new[a_new] = W(a2) * W(a) ** -1 * W(a2.bar())
        new[a_new.bar()] = W(a2) * W(a.bar()) ** -1 * W(a2.bar())
    return new


def monomial_mutation(model, datum, inverse=False):
    """Transport a model across a recorded flip by monomial substitution."""
    if model.tri != datum.old:
        raise ValueError("the flip datum does not start at the model's "
                         "triangulation")
    s = model.tri.surface
    words = model.words
    if s.family == "punctured" and model.tri.tags:
        un = Triangulation(s, model.tri.arcs)
        words = _twist(words, tagging_automorphism(model.tri.tags, un,
                                                   inverse=True))
    inner = datum.inner if datum.kind == "tagged_radius" else datum
    if inner.kind == "ordinary":
        words = _ordinary_words(words, inner, inverse)
    elif inner.kind == "pending":
        words = _pending_words(words, inner, inverse)
    elif inner.kind == "special_loop":
        words = _special_loop_words(words, inner, inverse)
    else:
        raise ValueError("unknown flip datum kind %r" % (inner.kind,))
    new_tri = datum.new
    if s.family == "punctured" and new_tri.tags:
        un = Triangulation(s, new_tri.arcs)
        words = _twist(words, tagging_automorphism(new_tri.tags, un))
    return model.with_words(new_tri, words)


def flip_mutation(model, arc, inverse=False):
    """Flip the current triangulation at an arc and transport the model."""
    new_tri = flip(model.tri, arc)
    return monomial_mutation(model, new_tri.flip_datum, inverse)


# ---------------------------------------------------------------------------
# tagging automorphisms
# ---------------------------------------------------------------------------

def tagging_automorphism(P, tri, inverse=False):
    """The automorphism of the triangle group realizing a change of tags at
    the puncture set P, relative to an ordinary triangulation.

    Each arc with one endpoint in P is rewritten through the triangle swept
    first when rotating the arc around that endpoint; ``inverse=True`` rotates
    the other way and yields the inverse automorphism (the composite of the
    two reduces to the identity on every generator by free reduction alone).
    """
    P = frozenset(P)
    if not P:
        return ArcEndo.identity()
    s = tri.surface
    if s.family != "punctured" or P - {0}:
        raise ValueError("only ordinary punctures can be tagged")
    if P & set(tri.self_folded_centers()):
        raise ValueError("tagging a self-folded center is not canonical")
    images = {}
    for g in tri.all_dgens():
        src, tgt = s.dgen_endpoints(g)
        sp, tp = src in P, tgt in P
        if sp and tp:
            images[g] = Word.gen(g.bar(), -1)
        elif sp:
            # (g, b1, b2) is the triangle swept first rotating g around src
            if not inverse:
                b1, b2, _ = tri.triangle_containing(g)
            else:
                d1, d2, _ = tri.triangle_containing(g.bar())
                b1, b2 = d2.bar(), d1.bar()
            images[g] = Word.of([(b2, -1), (b1.bar(), 1)])
        elif tp:
            # bar-paired with the source case applied to g bar
            if not inverse:
                b1, b2, _ = tri.triangle_containing(g.bar())
            else:
                d1, d2, _ = tri.triangle_containing(g)
                b1, b2 = d2.bar(), d1.bar()
            images[g] = Word.of([(b1, 1), (b2.bar(), -1)])
    return ArcEndo(images)


# ---------------------------------------------------------------------------
# total angles
# ---------------------------------------------------------------------------

def total_angle(i, tri, model=None):
    """The total-angle element at a marked point: one three-letter term per
    triangle corner at i, plus a 2cos(pi/d)-weighted term per special loop."""
    s = tri.surface
    if s.family == "cylinder":
        raise ValueError("cylinder corners carry no lift data")
    if s.family == "zero" and i == 0:
        raise ValueError("the zero puncture has no total angle")
    F = scalar_field(s.field_order)
    acc = RingElem.zero(F)
    for t in tri.triangles:
        for r in range(3):
            g1, g2, g3 = t[r], t[(r + 1) % 3], t[(r + 2) % 3]
            if s.dgen_endpoints(g1)[0] != i:
                continue
            w = Word.of([(g1.bar(), -1), (g2, 1), (g3.bar(), -1)])
            acc = acc + RingElem.of_word(F, w)
    for l in tri.special_loops():
        if s.dgen_endpoints(Dgen(l, 1))[0] == i:
            acc = acc + RingElem.of_word(F, Word.gen(Dgen(l, 1), -1), F.lam())
    if model is not None:
        out = RingElem.zero(F)
        for w, c in acc.items():
            out = out + RingElem.of_word(F, model.normalize(w), c)
        acc = out
    return acc


# ---------------------------------------------------------------------------
# sector elements
# ---------------------------------------------------------------------------

class SectorElement:
    """The degree-zero element u_{gamma,gamma'} = t_{gamma bar}^-1 t_gamma'."""

    def __init__(self, gamma, gamma2):
        self.gamma = gamma
        self.gamma2 = gamma2
        self.word = Word.of([(gamma.bar(), -1), (gamma2, 1)])

    def __eq__(self, other):
        return isinstance(other, SectorElement) and self.word == other.word

    def __hash__(self):
        return hash(self.word)

    def __repr__(self):
        return "SectorElement(%r)" % (self.word,)


def sector(surface, gamma, gamma2):
    """u_{gamma,gamma'}; requires t(gamma) = s(gamma')."""
    if isinstance(surface, Triangulation):
        surface = surface.surface
    if surface.dgen_endpoints(gamma)[1] != surface.dgen_endpoints(gamma2)[0]:
        raise ValueError("sector elements need t(gamma) = s(gamma')")
    return SectorElement(gamma, gamma2)


def sector_projection(model, choice):
    """The projection onto sector elements determined by one chosen directed
    arc per marked point: t_gamma -> t_{gamma_s(gamma)}^-1 t_gamma."""
    s = model.tri.surface
    for i, g in choice.items():
        if s.dgen_endpoints(g)[0] != i:
            raise ValueError("chosen arc %r does not start at %r" % (g, i))
    images = {}
    for g in model.tri.all_dgens():
        src = s.dgen_endpoints(g)[0]
        if src not in choice:
            raise ValueError("no chosen arc at marked point %r" % (src,))
        images[g] = Word.of([(choice[src], -1), (g, 1)])
    return ArcEndo(images)
