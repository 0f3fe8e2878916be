"""Marked surfaces, (tagged) triangulations, flips, quivers, and crossing data.

Surfaces are disks with marked boundary vertices 1..n and at most one interior
point (an ordinary, special, or zero puncture, labeled 0), plus a minimally
supported unpunctured cylinder.  Arcs on the punctured families are named by
their canonical lift to a branched cover of the disk: boundary vertices sit at
the integers on the real line (vertex v recurs at v + kn), the puncture sits
above them, and every arc lifts to either a half-plane semicircle between two
integers or a vertical ray.  Crossings, triangles, and crossing orders are all
computed by exact rational arithmetic on these lifts.

Arc ids:
    ('b', i)        boundary edge i -> i+1  (plain polygon: ('b', n) is n -> 1)
    ('c', a, b)     chord; on punctured families b may exceed n, selecting the
                    side of the puncture the chord passes
    ('l', i)        loop based at vertex i enclosing the puncture
    ('r', i)        radius (ordinary puncture) or pending arc (zero puncture)

Directed arcs are ``algebra.Dgen`` values; direction +1 means left-to-right on
the canonical lift for semicircles, 0 -> i for radii, and i -> 0 for pending
arcs.
"""

from fractions import Fraction

from .algebra import Dgen, default_namer


# ---------------------------------------------------------------------------
# lift geometry: semicircles ('c', a, b) and vertical rays ('ray', x)
# ---------------------------------------------------------------------------

def _shift(geom, dx):
    if geom[0] == "ray":
        return ("ray", geom[1] + dx)
    return ("c", geom[1] + dx, geom[2] + dx)


def _crosses(g1, g2):
    """Do two lifts cross in the open upper half plane?"""
    if g1[0] == "ray" and g2[0] == "ray":
        return False
    if g1[0] == "ray":
        g1, g2 = g2, g1
    a, b = g1[1], g1[2]
    if g2[0] == "ray":
        return a < g2[1] < b
    c, d = g2[1], g2[2]
    return (a < c < b < d) or (c < a < d < b)


def _cross_param(g1, g2):
    """Sort key of the crossing point along g1, in its left-to-right (or
    upward, for rays) parameterization.  Assumes the lifts cross."""
    if g1[0] == "ray":
        # height^2 of the crossing with the semicircle g2
        x = g1[1]
        a, b = g2[1], g2[2]
        m = Fraction(a + b, 2)
        r = Fraction(b - a, 2)
        return r * r - (x - m) * (x - m)
    if g2[0] == "ray":
        return Fraction(g2[1])
    a, b = g1[1], g1[2]
    c, d = g2[1], g2[2]
    # x-coordinate where the two circles through (a,0),(b,0) / (c,0),(d,0) meet
    return Fraction(c * d - a * b, (c + d) - (a + b))


# ---------------------------------------------------------------------------
# marked surfaces
# ---------------------------------------------------------------------------

_FAMILIES = ("polygon", "punctured", "special", "zero", "cylinder")


class MarkedSurface:
    """A marked surface from one of the built-in families."""

    def __init__(self, family, n=None, order=None, p=None, q=None):
        if family not in _FAMILIES:
            raise ValueError("unsupported surface family: %r" % (family,))
        self.family = family
        self.n = n
        self.order = order
        self.p = p
        self.q = q
        self.triangulation = None

    @property
    def period(self):
        return 0 if self.family == "polygon" else self.n

    @property
    def field_order(self):
        """Scalar-field order d fixed by this surface (3 means rational)."""
        return self.order if self.family == "special" else 3

    def key(self):
        return (self.family, self.n, self.order, self.p, self.q)

    def __eq__(self, other):
        return isinstance(other, MarkedSurface) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        if self.family == "cylinder":
            return "MarkedSurface(cylinder, %d, %d)" % (self.p, self.q)
        if self.family == "special":
            return "MarkedSurface(special, %d, order=%d)" % (self.n, self.order)
        return "MarkedSurface(%s, %d)" % (self.family, self.n)

    # -- arc inventories ----------------------------------------------------

    def boundary_arcs(self):
        if self.family == "cylinder":
            return ([("db", j) for j in range(1, self.p + 1)]
                    + [("dt", i) for i in range(1, self.q + 1)])
        return [("b", i) for i in range(1, self.n + 1)]

    def internal_arcs(self):
        """All internal arc isotopy classes (finite families only)."""
        if self.family == "cylinder":
            raise ValueError("the cylinder has infinitely many arcs")
        n = self.n
        arcs = []
        if self.family == "polygon":
            for i in range(1, n - 1):
                for j in range(i + 2, n + 1):
                    if (i, j) != (1, n):
                        arcs.append(("c", i, j))
            return arcs
        # punctured / special / zero: chords keep the puncture on one side
        for a in range(1, n + 1):
            for b in range(a + 2, a + n):
                arcs.append(("c", a, b))
        if n > 1:
            # for n == 1 the loop is isotopic to the boundary arc
            arcs.extend(("l", i) for i in range(1, n + 1))
        if self.family in ("punctured", "zero"):
            arcs.extend(("r", i) for i in range(1, n + 1))
        return arcs

    def arc_kind(self, arc):
        k = arc[0]
        if k in ("b", "db", "dt"):
            return "boundary"
        if k == "l":
            return "loop"
        if k == "r":
            return "pending" if self.family == "zero" else "radius"
        if k == "c":
            return "chord"
        return "arc"  # synthetic cylinder arcs

    def is_special_loop(self, arc):
        if self.family != "special":
            return False
        return arc[0] == "l" or (self.n == 1 and arc == ("b", 1))

    def is_zero_loop(self, arc):
        if self.family != "zero":
            return False
        return arc[0] == "l" or (self.n == 1 and arc == ("b", 1))

    # -- lifts ----------------------------------------------------------------

    def lift(self, arc):
        """Canonical lift of an arc (cylinder arcs have no lift geometry)."""
        n = self.n
        k = arc[0]
        if k == "b":
            if self.family == "polygon" and arc[1] == n:
                return ("c", 1, n)
            return ("c", arc[1], arc[1] + 1)
        if k == "c":
            return ("c", arc[1], arc[2])
        if k == "l":
            return ("c", arc[1], arc[1] + n)
        if k == "r":
            return ("ray", arc[1])
        raise ValueError("arc %r has no lift geometry" % (arc,))

    def dgen_lift(self, g):
        """(geom, forward) for a directed arc; forward means direction +1
        travels in increasing parameter (left-to-right / upward)."""
        geom = self.lift(g.arc)
        if geom[0] == "ray":
            up = self.family == "zero"  # +1 is i -> 0 for pending arcs
            forward = (g.s == 1) == up
        elif self.family == "polygon" and g.arc == ("b", self.n):
            forward = g.s == -1  # +1 is n -> 1, right-to-left on the lift
        else:
            forward = g.s == 1
        return geom, forward

    def base_vertex(self, x):
        if x == "apex":
            return 0
        if self.family == "polygon":
            return x
        return (x - 1) % self.n + 1

    def dgen_of_lift(self, pt_from, pt_to):
        """Directed arc whose lift runs pt_from -> pt_to (coords or 'apex')."""
        n = self.n
        if pt_from == "apex" or pt_to == "apex":
            v = pt_to if pt_from == "apex" else pt_from
            arc = ("r", self.base_vertex(v))
            up = pt_to == "apex"
            s = (1 if up else -1) if self.family == "zero" else (-1 if up else 1)
            return Dgen(arc, s)
        a, b = min(pt_from, pt_to), max(pt_from, pt_to)
        span = b - a
        if self.family == "polygon":
            if (a, b) == (1, n):
                return Dgen(("b", n), 1 if pt_from == n else -1)
            arc = ("b", a) if span == 1 else ("c", a, b)
            return Dgen(arc, 1 if pt_from < pt_to else -1)
        a0 = (a - 1) % n + 1
        if span == 1:
            arc = ("b", a0)
        elif span == n and n > 1:
            arc = ("l", a0)
        elif span == n and n == 1:
            arc = ("b", 1)
        else:
            if not 2 <= span <= n - 1:
                raise ValueError("lift (%s, %s) is not a simple arc" % (a, b))
            arc = ("c", a0, a0 + span)
        return Dgen(arc, 1 if pt_from < pt_to else -1)

    def dgen_endpoints(self, g):
        """(source, target) marked-point labels of a directed arc."""
        if self.family == "cylinder":
            raise ValueError("use the triangulation data for cylinder arcs")
        geom, forward = self.dgen_lift(g)
        if geom[0] == "ray":
            lo, hi = self.base_vertex(geom[1]), 0
            return (lo, hi) if forward else (hi, lo)
        a, b = geom[1], geom[2]
        s, t = (a, b) if forward else (b, a)
        return self.base_vertex(s), self.base_vertex(t)

    # -- crossings -----------------------------------------------------------

    def crossing_number(self, arc1, arc2):
        cache = self.__dict__.setdefault("_cross_cache", {})
        key = (arc1, arc2) if arc1 <= arc2 else (arc2, arc1)
        hit = cache.get(key)
        if hit is not None:
            return hit
        g1 = self.lift(arc1)
        g2 = self.lift(arc2)
        if self.period == 0:
            total = 0 if arc1 == arc2 else int(_crosses(g1, g2))
        else:
            total = 0
            for k in range(-3, 4):
                if arc1 == arc2 and k == 0:
                    continue
                if _crosses(g1, _shift(g2, k * self.period)):
                    total += 1
        cache[key] = total
        return total

    def compatible(self, arc1, arc2):
        return arc1 == arc2 or self.crossing_number(arc1, arc2) == 0


def make_polygon(n):
    if n < 3:
        raise ValueError("a plain polygon needs n >= 3")
    s = MarkedSurface("polygon", n=n)
    s.triangulation = Triangulation(s, [("c", 1, j) for j in range(3, n)])
    return s


def make_punctured_polygon(n):
    if n < 1:
        raise ValueError("a punctured polygon needs n >= 1")
    s = MarkedSurface("punctured", n=n)
    s.triangulation = Triangulation(s, [("r", i) for i in range(1, n + 1)])
    return s


def make_special_polygon(n, d):
    if n < 1 or d < 2:
        raise ValueError("a special polygon needs n >= 1 and order d >= 2")
    s = MarkedSurface("special", n=n, order=d)
    arcs = [("c", 1, j) for j in range(3, n + 1)]
    if n > 1:
        arcs.append(("l", 1))
    s.triangulation = Triangulation(s, arcs)
    return s


def make_zero_polygon(n):
    if n < 1:
        raise ValueError("a zero-punctured polygon needs n >= 1")
    s = MarkedSurface("zero", n=n)
    arcs = [("c", 1, j) for j in range(3, n + 1)] + [("r", 1)]
    if n > 1:
        arcs.append(("l", 1))
    s.triangulation = Triangulation(s, arcs)
    return s


def make_cylinder(p, q):
    if p < 1 or q < 1:
        raise ValueError("a cylinder needs p, q >= 1")
    s = MarkedSurface("cylinder", p=p, q=q)
    arcs = [("a", i) for i in range(1, q + 1)]
    arcs += [("bb", j) for j in range(2, p + 1)]
    arcs.append(("w", 0))
    A = lambda i, sg=1: Dgen(("a", i), sg)
    B = lambda j, sg=1: Dgen(("a", 1) if j == 1 else ("bb", j), sg)
    W = lambda sg=1: Dgen(("w", 0), sg)
    dt = lambda i, sg=1: Dgen(("dt", i), sg)
    db = lambda j, sg=1: Dgen(("db", j), sg)
    triples = []
    for i in range(1, q):
        triples.append((A(i), dt(i), A(i + 1, -1)))
    triples.append((A(q), dt(q), W(-1)))
    for j in range(1, p):
        triples.append((db(j), B(j + 1), B(j, -1)))
    triples.append((db(p), W(), B(p, -1)))
    s.triangulation = Triangulation(s, arcs, triples=tuple(triples))
    return s


# ---------------------------------------------------------------------------
# triangulations
# ---------------------------------------------------------------------------

class FlipDatum:
    """The quadrilateral data recorded by a flip.

    kind 'ordinary': old arc f (directed), corners c1..c4 with (c1,c2,f) and
    (c3,c4,f.bar()) cyclic triangles of the old triangulation, and the new
    directed arc g with s(g)=t(c1), t(g)=t(c3).

    kind 'pending': a loop alpha around a pending arc beta was flipped; the
    pair {alpha, beta} is replaced by {alpha2 (new loop), beta2 (new pending)},
    with (a1, a2, alpha.bar()) the cyclic triangle of the old triangulation.

    kind 'tagged_radius': the radius of a self-folded triangle was flipped;
    ``inner`` holds the underlying ordinary flip of the partner loop and
    ``puncture`` the tag that was toggled.
    """

    def __init__(self, kind, **kw):
        self.kind = kind
        for name, value in kw.items():
            setattr(self, name, value)

    def __repr__(self):
        return "FlipDatum(%s)" % self.kind


class Triangulation:
    """An (optionally tagged) triangulation, canonicalized by its arc set."""

    def __init__(self, surface, arcs, tags=(), triples=None, origins=None,
                 flip_datum=None):
        self.surface = surface
        self.arcs = frozenset(arcs)
        self.tags = frozenset(tags)
        self.flip_datum = flip_datum
        self._origins = dict(origins or {})
        if surface.family == "cylinder":
            if triples is None:
                raise ValueError("cylinder triangulations need explicit triangles")
            self.triangles = tuple(triples)
            self._faces = None
        else:
            if self.tags and surface.family != "punctured":
                raise ValueError("only ordinary punctures can be tagged")
            if self.tags - {0}:
                raise ValueError("unknown tagged point")
            self._faces = _lifted_faces(surface, self.arcs, dedup=True)
            self.triangles = tuple(f.triple for f in self._faces)
            self._validate()

    # -- structure ------------------------------------------------------------

    def _validate(self):
        s = self.surface
        if len(self.arcs) != _expected_arc_count(s):
            raise ValueError("wrong number of internal arcs")
        for a in self.arcs:
            if a not in set(s.internal_arcs()):
                raise ValueError("unknown arc %r" % (a,))
        arcs = sorted(self.arcs)
        for i, a in enumerate(arcs):
            for b in arcs[i + 1:]:
                if not s.compatible(a, b):
                    raise ValueError("arcs %r and %r cross" % (a, b))
        if s.family == "zero":
            loops = [a for a in self.arcs if s.is_zero_loop(a)]
            pends = [a for a in self.arcs if a[0] == "r"]
            if s.n == 1:
                loops = [("b", 1)]
            if len(loops) != 1 or len(pends) != 1 or loops[0][1] != pends[0][1]:
                raise ValueError("the zero puncture needs one enclosing "
                                 "self-folded pair")
        if s.family == "special":
            loops = [a for a in self.arcs if s.is_special_loop(a)]
            if s.n == 1:
                loops = [("b", 1)]
            if len(loops) != 1:
                raise ValueError("the special puncture needs one enclosing loop")
        # every directed internal arc bounds the right number of faces
        seen = {}
        for t in self.triangles:
            for g in t:
                seen[g] = seen.get(g, 0) + 1
                if seen[g] > 1:
                    raise ValueError("directed arc %r bounds two triangles" % (g,))
        for a in self.arcs:
            inside_monogon = (s.family == "special" and s.is_special_loop(a))
            for sg in (1, -1):
                g = Dgen(a, sg)
                want = 1
                if inside_monogon and sg == 1:
                    want = 0  # the special monogon side is not a triangle
                if seen.get(g, 0) != want:
                    raise ValueError("arc %r does not bound faces correctly" % (a,))
        if self.tags & set(self.self_folded_centers()):
            raise ValueError("tags at self-folded centers are not canonical")

    def key(self):
        return (self.surface.key(), tuple(sorted(self.arcs)),
                tuple(sorted(self.tags)))

    def __eq__(self, other):
        return isinstance(other, Triangulation) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        names = ",".join(default_namer(Dgen(a, 1)) for a in sorted(self.arcs))
        tags = ("^" + ",".join(str(t) for t in sorted(self.tags))
                if self.tags else "")
        return "Triangulation{%s}%s" % (names, tags)

    def internal_arcs(self):
        return sorted(self.arcs)

    def all_dgens(self):
        out = []
        for a in sorted(self.arcs) + sorted(self.surface.boundary_arcs()):
            out.append(Dgen(a, 1))
            out.append(Dgen(a, -1))
        return out

    def self_folded_pairs(self):
        """(loop, radius/pending) pairs of self-folded triangles."""
        s = self.surface
        if s.family == "cylinder" or s.family == "polygon":
            return []
        pairs = []
        if s.family == "punctured":
            for a in self.arcs:
                if a[0] == "l" and ("r", a[1]) in self.arcs:
                    pairs.append((a, ("r", a[1])))
        elif s.family == "zero":
            pend = next(a for a in self.arcs if a[0] == "r")
            loop = ("b", 1) if s.n == 1 else ("l", pend[1])
            pairs.append((loop, pend))
        return pairs

    def self_folded_centers(self):
        return [0 for _ in self.self_folded_pairs()
                if self.surface.family == "punctured"]

    def special_loops(self):
        s = self.surface
        if s.family != "special":
            return []
        if s.n == 1:
            return [("b", 1)]
        return [a for a in self.arcs if a[0] == "l"]

    def zero_loop_pairs(self):
        if self.surface.family != "zero":
            return []
        return self.self_folded_pairs()

    def triangle_containing(self, g):
        """The stored cyclic triangle containing directed arc g, rotated so
        that g is last."""
        for t in self.triangles:
            if g in t:
                i = t.index(g)
                return (t[(i + 1) % 3], t[(i + 2) % 3], g)
        raise ValueError("no triangle contains %r" % (g,))


def _expected_arc_count(surface):
    n = surface.n
    if surface.family == "polygon":
        return n - 3
    if surface.family == "punctured":
        return n if n > 1 else 1
    if surface.family == "special":
        return n - 1
    if surface.family == "zero":
        return n
    raise ValueError("no fixed arc count for %s" % surface.family)


class _Face:
    __slots__ = ("triple", "edges", "corners")

    def __init__(self, triple, edges):
        self.triple = triple          # cyclic Dgen triple (stored orientation)
        self.edges = edges            # parallel list of lift keys
        cs = set()
        for e in edges:
            if e[0] == "ray":
                cs.add(e[1])
                cs.add("apex")
            else:
                cs.add(e[1])
                cs.add(e[2])
        self.corners = cs


def _lifted_faces(surface, arcs, dedup):
    """Faces of the lifted triangulation.  With dedup=True returns one face
    per downstairs triangle (stored orientation); otherwise every lift in the
    working window."""
    n = surface.n
    fam = surface.family
    lo, hi = 1 - 2 * n, 3 * n + 1
    E = {}
    R = {}
    for a in list(arcs) + surface.boundary_arcs():
        g = surface.lift(a)
        ks = (0,) if surface.period == 0 else range(-3, 4)
        for k in ks:
            gk = _shift(g, k * surface.period)
            if gk[0] == "ray":
                if lo <= gk[1] <= hi:
                    R[gk[1]] = a
            else:
                if gk[1] >= lo and gk[2] <= hi:
                    E[(gk[1], gk[2])] = a
    faces = []
    mirror = fam == "polygon"
    for (a, c) in sorted(E):
        if c - a < 2:
            continue
        if dedup and not 1 <= a <= n:
            continue
        vs = [v for v in range(a + 1, c) if (a, v) in E]
        if not vs:
            raise ValueError("no triangle below edge (%s, %s)" % (a, c))
        v = max(vs)
        if (v, c) not in E:
            raise ValueError("edge (%s, %s) missing below (%s, %s)" % (v, c, a, c))
        if mirror:
            triple = (surface.dgen_of_lift(c, v), surface.dgen_of_lift(v, a),
                      surface.dgen_of_lift(a, c))
            edges = [("c", v, c), ("c", a, v), ("c", a, c)]
        else:
            triple = (surface.dgen_of_lift(a, v), surface.dgen_of_lift(v, c),
                      surface.dgen_of_lift(c, a))
            edges = [("c", a, v), ("c", v, c), ("c", a, c)]
        faces.append(_Face(triple, edges))
    if fam in ("punctured", "zero"):
        xs = sorted(R)
        for u, v in zip(xs, xs[1:]):
            if dedup and not 1 <= u <= n:
                continue
            if (u, v) not in E:
                raise ValueError("no edge between consecutive rays %s, %s" % (u, v))
            triple = (surface.dgen_of_lift(u, v), surface.dgen_of_lift(v, "apex"),
                      surface.dgen_of_lift("apex", u))
            faces.append(_Face(triple, [("c", u, v), ("ray", v), ("ray", u)]))
    return faces


# ---------------------------------------------------------------------------
# flips
# ---------------------------------------------------------------------------

def flip(tri, arc):
    """Flip a triangulation at an internal arc, recording the flip datum."""
    s = tri.surface
    if isinstance(arc, Dgen):
        arc = arc.arc
    if arc not in tri.arcs:
        raise ValueError("arc %r is not in the triangulation" % (arc,))
    if s.family == "cylinder":
        return _flip_cylinder(tri, arc)
    kind = s.arc_kind(arc)
    if kind == "pending":
        raise ValueError("pending arcs are not flippable")
    if s.family == "zero" and s.is_zero_loop(arc):
        return _flip_zero_loop(tri, arc)
    if s.is_special_loop(arc):
        return _flip_special_loop(tri, arc)
    if s.family == "punctured":
        sf = dict((r, l) for (l, r) in tri.self_folded_pairs())
        if arc in sf:
            # radius of a self-folded triangle: flip the partner loop and
            # toggle the tag at the enclosed puncture
            inner = _flip_ordinary(tri, sf[arc], tags=tri.tags | {0})
            datum = FlipDatum("tagged_radius", inner=inner.flip_datum,
                              puncture=0, old=tri, new=inner)
            inner.flip_datum = datum
            return inner
    return _flip_ordinary(tri, arc, tags=None)


def _replacement_candidates(tri, removed):
    s = tri.surface
    rest = [a for a in tri.arcs if a not in removed]
    cands = []
    for a in s.internal_arcs():
        if a in rest:
            continue
        if all(s.compatible(a, b) for b in rest):
            cands.append(a)
    return rest, cands


def _flip_ordinary(tri, arc, tags):
    s = tri.surface
    rest, cands = _replacement_candidates(tri, {arc})
    new_arcs = []
    for a in cands:
        if a == arc:
            continue
        try:
            new_arcs.append(Triangulation(
                s, rest + [a],
                tags=_canonical_tags(s, tri.tags if tags is None else tags,
                                     rest + [a])))
        except ValueError:
            continue
    if len(new_arcs) != 1:
        raise ValueError("arc %r is not flippable" % (arc,))
    new = new_arcs[0]
    new.flip_datum = _ordinary_datum(tri, arc, new)
    return new


def _canonical_tags(surface, tags, arcs):
    if surface.family != "punctured":
        return frozenset(tags)
    centers = set()
    for a in arcs:
        if a[0] == "l" and ("r", a[1]) in arcs:
            centers.add(0)
    return frozenset(tags) - centers


def _ordinary_datum(tri, arc, new):
    s = tri.surface
    f = Dgen(arc, 1)
    c1, c2, _ = tri.triangle_containing(f)
    c3, c4, _ = tri.triangle_containing(f.bar())
    g = _aligned_new_arc(s, (c1, c2, f), (c3, c4, f.bar()))
    new_arc = next(iter(new.arcs - tri.arcs))
    if g.arc != new_arc:
        raise AssertionError("flip datum disagrees with the replacement arc")
    return FlipDatum("ordinary", f=f, c1=c1, c2=c2, c3=c3, c4=c4, g=g,
                     old=tri, new=new)


def _face_lift_edges(surface, triple):
    """Lift the cyclic triangle as a closed chain of directed edges
    [(P, Q), ...] (coordinates or 'apex'), placing the first edge at its
    canonical lift."""
    per = surface.period
    lifts = []
    for g in triple:
        geom, forward = surface.dgen_lift(g)
        if geom[0] == "ray":
            a = geom[1]
            lifts.append((a, "apex") if forward else ("apex", a))
        else:
            lifts.append((geom[1], geom[2]) if forward else
                         (geom[2], geom[1]))

    def sh(pq, d):
        return tuple(pt if pt == "apex" else pt + d for pt in pq)

    out = [lifts[0]]
    floating = None  # index from which the shift is not yet pinned
    for idx in (1, 2):
        p, q = lifts[idx]
        cur = out[-1][1]
        if cur == "apex":
            if p != "apex":
                raise AssertionError("triangle edges do not chain")
            out.append((p, q))
            if floating is None:
                floating = idx
        else:
            if p == "apex":
                raise AssertionError("triangle edges do not chain")
            d = cur - p
            if per and d % per != 0:
                raise AssertionError("triangle edges do not chain")
            out.append(sh((p, q), d))
    # close the cycle; resolve a floating tail (edges after an apex corner)
    first, last = out[0][0], out[-1][1]
    if floating is not None and first != "apex" and last != "apex":
        d = first - last
        if per and d % per != 0:
            raise AssertionError("triangle does not close")
        out = out[:floating] + [sh(pq, d) for pq in out[floating:]]
    else:
        if not (first == last or "apex" in (first, last)):
            raise AssertionError("triangle does not close")
        if first == "apex" and last != "apex" or \
                last == "apex" and first != "apex":
            raise AssertionError("triangle does not close")
    return out


def _aligned_new_arc(surface, t1, t2):
    """New diagonal of the flip quadrilateral: (c1, c2, f) and (c3, c4, f bar)
    are lifted, aligned along the shared lift of f, and the diagonal runs
    t(c1) -> t(c3)."""
    e1 = _face_lift_edges(surface, t1)
    e2 = _face_lift_edges(surface, t2)
    f1 = e1[2]
    f2 = e2[2]
    per = surface.period
    if "apex" in f1:
        b1 = f1[0] if f1[0] != "apex" else f1[1]
        b2 = f2[0] if f2[0] != "apex" else f2[1]
        d = b1 - b2
    else:
        d = f1[0] - f2[1]
        if (f2[1] + d, f2[0] + d) != f1:
            raise AssertionError("flip triangles do not share the arc lift")
    if per and d % per != 0:
        raise AssertionError("flip triangles do not share the arc lift")
    if per == 0 and d != 0:
        raise AssertionError("flip triangles do not share the arc lift")

    def sh(pt):
        return pt if pt == "apex" else pt + d

    return surface.dgen_of_lift(e1[0][1], sh(e2[0][1]))


def _flip_zero_loop(tri, arc):
    """Flip the loop around the zero puncture: the self-folded pair moves to
    the opposite corner of the enclosing triangle."""
    s = tri.surface
    if s.n == 1:
        raise ValueError("the zero monogon's loop is a boundary arc")
    pend = ("r", arc[1])
    a1, a2, abar = tri.triangle_containing(Dgen(arc, -1))
    u = s.dgen_endpoints(a1)[1]
    if u == 0:
        raise AssertionError("unexpected corner at the puncture")
    new_loop, new_pend = ("l", u), ("r", u)
    rest = [a for a in tri.arcs if a not in (arc, pend)]
    new = Triangulation(s, rest + [new_loop, new_pend])
    new.flip_datum = FlipDatum(
        "pending", alpha=Dgen(arc, 1), beta=Dgen(pend, 1), a1=a1, a2=a2,
        alpha2=Dgen(new_loop, 1), beta2=Dgen(new_pend, 1), old=tri, new=new)
    return new


def _flip_special_loop(tri, arc):
    """Flip the loop around the special puncture: the loop moves to the
    opposite vertex of the enclosing bigon (a three-term exchange)."""
    s = tri.surface
    if s.n == 1:
        raise ValueError("the special monogon's loop is a boundary arc")
    a1, a2, abar = tri.triangle_containing(Dgen(arc, -1))
    u = s.dgen_endpoints(a1)[1]
    if u == 0:
        raise AssertionError("unexpected corner at the puncture")
    new_loop = ("l", u)
    rest = [a for a in tri.arcs if a != arc]
    new = Triangulation(s, rest + [new_loop])
    new.flip_datum = FlipDatum(
        "special_loop", alpha=Dgen(arc, 1), a1=a1, a2=a2,
        alpha2=Dgen(new_loop, 1), old=tri, new=new)
    return new


def _flip_cylinder(tri, arc):
    s = tri.surface
    f = Dgen(arc, 1)
    c1, c2, _ = tri.triangle_containing(f)
    c3, c4, _ = tri.triangle_containing(f.bar())

    def canon(t):
        return min(tuple(t[(i + j) % 3] for j in range(3)) for i in range(3))

    origins = dict(tri._origins)
    stack = origins.get(arc, ())
    g = None
    if stack:
        # undoing a recorded flip: reinstate the old diagonal with whichever
        # direction reproduces the triangles it bounded before that flip
        rec_f, rec_triples = stack[-1]
        if rec_f.arc not in tri.arcs:
            for d in (1, -1):
                cand = Dgen(rec_f.arc, d)
                made = frozenset(
                    [canon((c2, c3, cand.bar())), canon((c4, c1, cand))])
                if made == rec_triples:
                    g = cand
                    origins[arc] = stack[:-1]
                    break
    if g is None:
        used = {a[1] for a in tri.arcs if a[0] == "w"}
        g = Dgen(("w", max(used, default=0) + 1), 1)
    new_arc = g.arc
    replaced = frozenset([canon((c1, c2, f)), canon((c3, c4, f.bar()))])
    origins[new_arc] = origins.get(new_arc, ()) + ((f, replaced),)
    new_triples = [t for t in tri.triangles
                   if f not in t and f.bar() not in t]
    new_triples.append((c2, c3, g.bar()))
    new_triples.append((c4, c1, g))
    arcs = (tri.arcs - {arc}) | {new_arc}
    new = Triangulation(s, arcs, triples=tuple(new_triples), origins=origins)
    new.flip_datum = FlipDatum("ordinary", f=f, c1=c1, c2=c2, c3=c3, c4=c4,
                               g=g, old=tri, new=new)
    return new


# ---------------------------------------------------------------------------
# enumeration
# ---------------------------------------------------------------------------

def enumerate_triangulations(surface):
    """All (tagged) triangulations, by breadth-first search over flips."""
    if isinstance(surface, Triangulation):
        start = surface
        surface = start.surface
    else:
        start = surface.triangulation
    if surface.family == "cylinder":
        raise ValueError("the cylinder has infinitely many triangulations")
    seen = {start}
    queue = [start]
    while queue:
        tri = queue.pop()
        for a in sorted(tri.arcs):
            if surface.arc_kind(a) == "pending":
                continue
            if surface.family == "zero" and surface.n == 1:
                continue
            try:
                new = flip(tri, a)
            except ValueError:
                continue
            if new not in seen:
                seen.add(new)
                queue.append(new)
    return seen


# ---------------------------------------------------------------------------
# quivers and weights
# ---------------------------------------------------------------------------

class Quiver:
    """Adjacency quiver of a triangulation: vertices are the non-pending
    internal arcs, arrows counted from consecutive edges of the stored
    triangles (self-folded radii are represented by their loops)."""

    def __init__(self, vertices, arrows, weights):
        self.vertices = tuple(vertices)
        self.arrows = dict(arrows)
        self.weights = dict(weights)

    def arrow_count(self, a, b):
        return self.arrows.get((a, b), 0)

    def b_matrix(self):
        vs = self.vertices
        return [[self.arrow_count(a, b) - self.arrow_count(b, a) for b in vs]
                for a in vs]


def quiver(tri):
    s = tri.surface
    vertices = sorted(a for a in tri.arcs if s.arc_kind(a) != "pending")
    sf_loops = {}
    for (l, r) in tri.self_folded_pairs():
        if s.family == "punctured":
            sf_loops[l] = r
    radii = set(sf_loops.values())

    def represented(arc):
        """Vertices whose triangle representative is this arc."""
        if arc in radii:
            return []          # radii are represented by their loops
        if arc in sf_loops:
            return [arc, sf_loops[arc]]
        if arc in set(vertices):
            return [arc]
        return []

    arrows = {}
    for t in tri.triangles:
        for i in range(3):
            u, v = t[i].arc, t[(i + 1) % 3].arc
            for a in represented(u):
                for b in represented(v):
                    arrows[(a, b)] = arrows.get((a, b), 0) + 1
    weights = {v: weight(tri, v) for v in vertices}
    return Quiver(vertices, arrows, weights)


def weight(tri, arc):
    """w(arc): |p| for a special loop, 1/2 for a loop around the zero
    puncture, 1 otherwise."""
    s = tri.surface
    if s.is_special_loop(arc):
        return s.order
    if s.is_zero_loop(arc):
        return Fraction(1, 2)
    return 1


# ---------------------------------------------------------------------------
# crossing sequences and canonical polygons
# ---------------------------------------------------------------------------

def _curve_dgen(surface, curve):
    if isinstance(curve, Dgen):
        return curve
    if isinstance(curve, tuple) and curve and isinstance(curve[0], str):
        return Dgen(curve, 1)
    if isinstance(curve, tuple) and len(curve) == 2 \
            and all(isinstance(x, int) for x in curve):
        a, b = curve
        if a > b:
            return Dgen(("c", b, a), -1)
        return Dgen(("c", a, b), 1)
    raise ValueError("cannot interpret curve spec %r" % (curve,))


def _crossings(tri, gd):
    s = tri.surface
    geom, forward = s.dgen_lift(gd)
    hits = []
    for a in sorted(tri.arcs):
        ga = s.lift(a)
        ks = (0,) if s.period == 0 else range(-3, 4)
        for k in ks:
            if a == gd.arc and k == 0:
                continue
            gk = _shift(ga, k * s.period)
            if _crosses(geom, gk):
                hits.append((_cross_param(geom, gk), a, gk))
    hits.sort(key=lambda h: h[0], reverse=not forward)
    return hits


def crossing_sequence(curve, tri):
    """Ordered tuple of triangulation arcs crossed by the curve."""
    gd = _curve_dgen(tri.surface, curve)
    return tuple(a for (_, a, _) in _crossings(tri, gd))


class CanonicalPolygon:
    """The fan of triangles a curve passes through, cut open along its
    crossings: faces[k] is either ('tri', stored_triple) or
    ('monogon', special_loop) for a degenerate pass around a special
    puncture; crossings[k] is the arc shared by faces[k] and faces[k+1]."""

    def __init__(self, curve, tri, crossings, crossed_lifts, faces,
                 start, end):
        self.curve = curve
        self.triangulation = tri
        self.crossings = tuple(crossings)
        self.crossed_lifts = tuple(crossed_lifts)
        self.faces = tuple(faces)
        self.start = start
        self.end = end

    def __repr__(self):
        return "CanonicalPolygon(%s; %d crossings)" % (
            default_namer(self.curve.arc), len(self.crossings))


def canonical_polygon(curve, tri):
    s = tri.surface
    if s.family == "cylinder":
        raise ValueError("canonical polygons need lift geometry")
    gd = _curve_dgen(s, curve)
    hits = _crossings(tri, gd)
    geom, forward = s.dgen_lift(gd)
    if geom[0] == "ray":
        start_pt = geom[1] if forward else "apex"
        end_pt = "apex" if forward else geom[1]
    else:
        start_pt = geom[1] if forward else geom[2]
        end_pt = geom[2] if forward else geom[1]
    if not hits:
        return CanonicalPolygon(gd, tri, (), (), (), start_pt, end_pt)
    all_faces = _lifted_faces(s, tri.arcs, dedup=False)
    by_edge = {}
    for f in all_faces:
        for e in f.edges:
            by_edge.setdefault(e, []).append(f)

    mid = []
    mid_first = mid_last = None
    for (h1, h2) in zip(hits, hits[1:]):
        f1s = by_edge.get(h1[2], [])
        f2s = set(id(f) for f in by_edge.get(h2[2], []))
        common = [f for f in f1s if id(f) in f2s]
        if common:
            if len(common) != 1:
                raise AssertionError("ambiguous face between crossings")
            mid.append(("tri", common[0].triple))
            if mid_first is None:
                mid_first = common[0]
            mid_last = common[0]
        else:
            # a degenerate pass through the monogon around a special puncture
            if not (s.family == "special" and h1[1] == h2[1]
                    and s.is_special_loop(h1[1])):
                raise ValueError("inconsistent crossing sequence")
            mid.append(("monogon", h1[1]))

    def end_face(lift_key, corner, exclude):
        cands = [f for f in by_edge.get(lift_key, [])
                 if corner in f.corners and (exclude is None
                                             or id(f) != id(exclude))]
        if len(cands) != 1:
            raise ValueError("no unique triangle on lift %r at %r"
                             % (lift_key, corner))
        return cands[0]

    first = end_face(hits[0][2], start_pt, mid_first)
    last = end_face(hits[-1][2], end_pt,
                    mid_last if hits[1:] else first)
    faces = [("tri", first.triple)] + mid + [("tri", last.triple)]
    return CanonicalPolygon(gd, tri,
                            [h[1] for h in hits], [h[2] for h in hits],
                            faces, start_pt, end_pt)


# ---------------------------------------------------------------------------
# text format
# ---------------------------------------------------------------------------

def _dgen_name(g):
    return default_namer(g)


def _parse_arc_name(name):
    rev = name.endswith("~")
    if rev:
        name = name[:-1]
    i = 0
    while i < len(name) and name[i].isalpha():
        i += 1
    kind = name[:i]
    nums = tuple(int(x) for x in name[i:].split(",")) if name[i:] else ()
    return Dgen((kind,) + nums, -1 if rev else 1)


def surface_to_text(tri):
    """Line-oriented description: points, oriented triangles, gluing pairs,
    and tags."""
    s = tri.surface
    lines = []
    if s.family == "cylinder":
        for j in range(1, s.p + 1):
            lines.append("point b%d boundary" % j)
        for i in range(1, s.q + 1):
            lines.append("point t%d boundary" % i)
    else:
        for v in range(1, s.n + 1):
            lines.append("point %d boundary" % v)
        if s.family == "punctured":
            lines.append("point 0 puncture")
        elif s.family == "special":
            lines.append("point 0 special %d" % s.order)
        elif s.family == "zero":
            lines.append("point 0 zero")
    for t in tri.triangles:
        lines.append("triangle %s %s %s" % tuple(_dgen_name(g) for g in t))
    for a in sorted(tri.arcs):
        lines.append("glue %s %s" % (_dgen_name(Dgen(a, 1)),
                                     _dgen_name(Dgen(a, -1))))
    for p in sorted(tri.tags):
        lines.append("tag %d" % p)
    return "\n".join(lines) + "\n"


def surface_from_text(text):
    """Parse the text format back into a triangulation of a built-in family."""
    points = {}
    triples = []
    glues = []
    tags = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if parts[0] == "point":
            points[parts[1]] = parts[2:]
        elif parts[0] == "triangle":
            triples.append(tuple(_parse_arc_name(x) for x in parts[1:4]))
        elif parts[0] == "glue":
            glues.append(tuple(_parse_arc_name(x) for x in parts[1:3]))
        elif parts[0] == "tag":
            tags.append(int(parts[1]))
        else:
            raise ValueError("unknown line: %r" % (raw,))
    for (g1, g2) in glues:
        if g1.bar() != g2:
            raise ValueError("glue pair %r / %r is not a reversal" %
                             (_dgen_name(g1), _dgen_name(g2)))
    arcs = [g.arc for (g, _) in glues]
    boundary_ids = [p for p, k in points.items() if k[0] == "boundary"]
    if any(p.startswith("b") or p.startswith("t") for p in boundary_ids):
        p = sum(1 for x in boundary_ids if x.startswith("b"))
        q = sum(1 for x in boundary_ids if x.startswith("t"))
        s = MarkedSurface("cylinder", p=p, q=q)
        tri = Triangulation(s, arcs, triples=tuple(triples))
        return tri
    n = len(boundary_ids)
    kinds = [k for p, k in points.items() if p == "0"]
    if not kinds:
        s = MarkedSurface("polygon", n=n)
    elif kinds[0][0] == "puncture":
        s = MarkedSurface("punctured", n=n)
    elif kinds[0][0] == "special":
        s = MarkedSurface("special", n=n, order=int(kinds[0][1]))
    elif kinds[0][0] == "zero":
        s = MarkedSurface("zero", n=n)
    else:
        raise ValueError("unknown point kind %r" % (kinds[0],))
    tri = Triangulation(s, arcs, tags=tags)
    want = sorted(tuple(sorted(t)) for t in tri.triangles)
    got = sorted(tuple(sorted(t)) for t in triples)
    if want != got:
        raise ValueError("triangle list does not match the arc set")
    return tri
