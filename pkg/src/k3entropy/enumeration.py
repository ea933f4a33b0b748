"""Enumeration on definite lattices: short vectors, roots, isometries.

Vectors are always reported in the coordinates of the lattice they were
asked about, with one representative per +-pair (first nonzero coordinate
positive) and norms carrying the sign of the lattice.  Isometry and
automorphism searches are invariant-filtered backtrackings over short
vectors; candidate images are tried by norm, then lexicographically, so
runs are reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .exact import (
    enumerate_up_to,
    hnf_rows,
    int_inverse_unimodular,
    lll_gram,
    mat_mul,
    smith_normal_form,
    transpose,
)
from .lattice import (
    NEGATIVE_DEFINITE,
    POSITIVE_DEFINITE,
    DiscriminantForm,
    IntLattice,
    discriminant_form,
    make_lattice,
    root_lattice,
)

DEFAULT_NODE_CAP = 10**7
DEFAULT_GROUP_CAP = 10**4


def _require_definite(lat: IntLattice) -> int:
    """Return +1/-1 for positive/negative definite, raise otherwise."""
    d = lat.definiteness
    if d == POSITIVE_DEFINITE:
        return 1
    if d == NEGATIVE_DEFINITE:
        return -1
    raise ValueError(f"operation needs a definite lattice, got {d}")


@lru_cache(maxsize=None)
def _reduced(lat: IntLattice):
    """(reduced gram as positive definite, transform rows, sign)."""
    sign = _require_definite(lat)
    g = [[sign * x for x in row] for row in lat.gram]
    g2, t = lll_gram(g)
    return tuple(tuple(r) for r in g2), tuple(tuple(r) for r in t), sign


def reduced_lattice(lat: IntLattice) -> IntLattice:
    """The same lattice on an LLL-reduced basis (small Gram entries)."""
    gpos, _, sign = _reduced(lat)
    return make_lattice([[sign * x for x in row] for row in gpos], lat.name)


@dataclass(frozen=True)
class ShortVectorList:
    bound: int
    vectors: tuple[tuple[int, ...], ...]
    norms: tuple[int, ...]
    complete: bool = True

    def __len__(self):
        return len(self.vectors)


@lru_cache(maxsize=None)
def short_vectors(lat: IntLattice, bound: int) -> ShortVectorList:
    """All v with 0 < |norm(v)| <= bound, one per +-pair, lexicographic order."""
    if bound < 0:
        raise ValueError("bound must be nonnegative")
    gpos, t, sign = _reduced(lat)
    found = []
    if bound > 0:
        for vred, nrm in enumerate_up_to([list(r) for r in gpos], bound):
            v = [sum(vred[i] * t[i][j] for i in range(lat.rank)) for j in range(lat.rank)]
            first = next(c for c in v if c)
            if first < 0:
                v = [-c for c in v]
            found.append((tuple(v), sign * nrm))
    found.sort(key=lambda p: (abs(p[1]), p[0]))
    return ShortVectorList(
        bound=bound,
        vectors=tuple(v for v, _ in found),
        norms=tuple(n for _, n in found),
    )


@lru_cache(maxsize=None)
def minimum(lat: IntLattice) -> int:
    """min |norm| over nonzero vectors of a definite lattice."""
    _require_definite(lat)
    gpos, _, _ = _reduced(lat)
    bound = min(gpos[i][i] for i in range(lat.rank))
    sv = short_vectors(lat, bound)
    assert len(sv), "reduced diagonal must realize some vector"
    return min(abs(n) for n in sv.norms)


def roots(lat: IntLattice) -> ShortVectorList:
    """Vectors of norm +-2, one per +-pair."""
    sv = short_vectors(lat, 2)
    keep = [(v, n) for v, n in zip(sv.vectors, sv.norms) if abs(n) == 2]
    return ShortVectorList(
        bound=2,
        vectors=tuple(v for v, _ in keep),
        norms=tuple(n for _, n in keep),
    )


def root_sublattice(lat: IntLattice) -> IntLattice | None:
    """Sublattice generated by the roots (None if there are no roots)."""
    rts = roots(lat)
    if not rts.vectors:
        return None
    basis = hnf_rows([list(v) for v in rts.vectors], lat.rank)
    gm = [list(r) for r in lat.gram]
    gram = mat_mul(mat_mul(basis, gm), transpose(basis))
    return make_lattice(gram)


def is_root_overlattice(lat: IntLattice) -> bool:
    """True iff the roots of L span a finite-index sublattice."""
    sub = root_sublattice(lat)
    return sub is not None and sub.rank == lat.rank


@lru_cache(maxsize=None)
def root_decomposition(lat: IntLattice) -> tuple[tuple[str, int], ...]:
    """ADE decomposition of the root sublattice, e.g. (("A",1),("A",1),("E",8)).

    Components are the connected pieces of the root system under the
    pairing; each is identified by (rank, number of root pairs) and the
    identification is verified by an isometry test.
    """
    rts = roots(lat)
    vecs = list(rts.vectors)
    if not vecs:
        return ()
    n = len(vecs)
    seen = [False] * n
    comps = []
    for s in range(n):
        if seen[s]:
            continue
        comp = [s]
        seen[s] = True
        stack = [s]
        while stack:
            i = stack.pop()
            for j in range(n):
                if not seen[j] and lat.inner(vecs[i], vecs[j]) != 0:
                    seen[j] = True
                    comp.append(j)
                    stack.append(j)
        comps.append(sorted(comp))
    out = []
    for comp in comps:
        basis = hnf_rows([list(vecs[i]) for i in comp], lat.rank)
        rank = len(basis)
        pairs = len(comp)
        if pairs == rank * (rank + 1) // 2:
            kind = ("A", rank)
        elif pairs == rank * (rank - 1):
            kind = ("D", rank)
        elif (rank, pairs) in ((6, 36), (7, 63), (8, 120)):
            kind = ("E", rank)
        else:
            raise ValueError(f"unrecognized root component (rank {rank}, {pairs} pairs)")
        gm = [list(r) for r in lat.gram]
        comp_gram = mat_mul(mat_mul(basis, gm), transpose(basis))
        if is_isometric(make_lattice(comp_gram), root_lattice(*kind)) is None:
            raise ValueError("root component failed ADE identification")
        out.append(kind)
    return tuple(sorted(out))


# ---------------------------------------------------------------------------
# isometry testing and automorphism groups


@dataclass(frozen=True)
class IsometryWitness:
    """Integer matrix M with M^T G1 M = G2 (columns = images of basis vectors)."""

    matrix: tuple[tuple[int, ...], ...]


class SearchBudgetExceeded(Exception):
    pass


def _theta_slice(lat: IntLattice, bound: int) -> tuple:
    sv = short_vectors(lat, bound)
    counts: dict[int, int] = {}
    for n in sv.norms:
        counts[abs(n)] = counts.get(abs(n), 0) + 1
    return tuple(sorted(counts.items()))


class _Backtracker:
    """Backtracking search for rows W with W G1 W^T = G2 (reduced, positive).

    Candidate vectors and their pairings live on the G1 side, so one
    instance can be reused against many right-hand sides G2.
    """

    def __init__(self, g1, maxnorm):
        self.g1 = g1
        self.n = len(g1)
        self.maxnorm = maxnorm
        base = enumerate_up_to([list(r) for r in g1], maxnorm)
        cands = []
        for v, nrm in base:
            cands.append((v, nrm))
            cands.append((tuple(-c for c in v), nrm))
        cands.sort(key=lambda p: (p[1], p[0]))
        self.by_norm: dict[int, list[tuple[int, ...]]] = {}
        for v, nrm in cands:
            self.by_norm.setdefault(nrm, []).append(v)
        self._pair_cache: dict[tuple, int] = {}

    def pair(self, v, w) -> int:
        key = (v, w)
        got = self._pair_cache.get(key)
        if got is None:
            g = self.g1
            n = self.n
            got = sum(v[i] * g[i][j] * w[j] for i in range(n) for j in range(n))
            self._pair_cache[key] = got
            self._pair_cache[(w, v)] = got
        return got

    def extend(self, g2, chosen: list, level: int, budget: list):
        """DFS from ``level`` with rows 0..level-1 already chosen.

        ``budget`` is a single-element mutable node counter.
        """
        if level == self.n:
            return list(chosen)
        for v in self.by_norm.get(g2[level][level], ()):
            budget[0] -= 1
            if budget[0] < 0:
                raise SearchBudgetExceeded
            if all(self.pair(c, v) == g2[level][j] for j, c in enumerate(chosen)):
                chosen.append(v)
                got = self.extend(g2, chosen, level + 1, budget)
                chosen.pop()
                if got is not None:
                    return got
        return None


@lru_cache(maxsize=None)
def _backtracker_for(lat: IntLattice, maxnorm: int) -> _Backtracker:
    gpos, _, _ = _reduced(lat)
    return _Backtracker([list(r) for r in gpos], maxnorm)


def _translate_witness(w_rows, t1, t2, g1, g2) -> IsometryWitness:
    """Convert reduced-coordinate row images into an original-coordinate witness."""
    t2inv = int_inverse_unimodular([list(r) for r in t2])
    r = mat_mul(mat_mul(t2inv, [list(x) for x in w_rows]), [list(x) for x in t1])
    m = transpose(r)
    check = mat_mul(mat_mul(transpose(m), [list(x) for x in g1]), m)
    assert check == [list(row) for row in g2], "isometry witness failed verification"
    return IsometryWitness(matrix=tuple(tuple(row) for row in m))


def is_isometric(l1: IntLattice, l2: IntLattice, node_cap: int = DEFAULT_NODE_CAP):
    """An IsometryWitness M with M^T G1 M = G2, or None.

    Fast-fails on rank / determinant / minimum / theta-slice mismatches.
    The candidate tables for l1 are cached, so testing one lattice against
    a stream of others is cheap.
    """
    s1 = _require_definite(l1)
    s2 = _require_definite(l2)
    if l1.rank != l2.rank or s1 != s2 or l1.det != l2.det:
        return None
    if minimum(l1) != minimum(l2):
        return None
    g1, t1, _ = _reduced(l1)
    g2, t2, _ = _reduced(l2)
    bound = max(max(g1[i][i] for i in range(l1.rank)), max(g2[i][i] for i in range(l2.rank)))
    if _theta_slice(l1, bound) != _theta_slice(l2, bound):
        return None
    need = max(g2[i][i] for i in range(l2.rank))
    bt = _backtracker_for(l1, max(need, max(g1[i][i] for i in range(l1.rank))))
    rows = bt.extend([list(r) for r in g2], [], 0, [node_cap])
    if rows is None:
        return None
    # the overall sign cancels in the conjugation, so the original Grams work
    return _translate_witness(rows, t1, t2, l1.gram, l2.gram)


@dataclass(frozen=True)
class AutomorphismGroup:
    generators: tuple[IsometryWitness, ...]
    order: int
    complete: bool


@lru_cache(maxsize=None)
def automorphism_group(lat: IntLattice, node_cap: int = DEFAULT_NODE_CAP) -> AutomorphismGroup:
    """Generators of O(L) by stabilizer-chain backtracking on short vectors.

    ``order`` is the product of the orbit sizes down the chain, hence exact
    when ``complete`` is True.
    """
    _require_definite(lat)
    g, t, _sign = _reduced(lat)
    n = lat.rank
    gl = [list(r) for r in g]
    bt = _backtracker_for(lat, max(g[i][i] for i in range(n)))
    budget = [node_cap]
    basis = [tuple(1 if j == i else 0 for j in range(n)) for i in range(n)]
    complete = True
    order = 1

    def orbit_of(point, gens):
        seen = {point}
        frontier = [point]
        while frontier:
            nxt = []
            for p in frontier:
                for w in gens:
                    q = tuple(sum(p[i] * w[i][j] for i in range(n)) for j in range(n))
                    if q not in seen:
                        seen.add(q)
                        nxt.append(q)
            frontier = nxt
        return seen

    # build the chain from the deepest stabilizer up
    level_gens: list[list[list[tuple[int, ...]]]] = [[] for _ in range(n + 1)]
    try:
        for level in range(n - 1, -1, -1):
            gens_here = [w for lv in range(level + 1, n + 1) for w in level_gens[lv]]
            fixed = basis[:level]
            cands = [
                v
                for v in bt.by_norm.get(g[level][level], ())
                if all(bt.pair(basis[j], v) == g[level][j] for j in range(level))
            ]
            orb = orbit_of(basis[level], gens_here)
            for v in cands:
                if v in orb:
                    continue
                rows = bt.extend(gl, list(fixed) + [v], level + 1, budget)
                if rows is not None:
                    level_gens[level].append(rows)
                    gens_here.append(rows)
                    orb = orbit_of(basis[level], gens_here)
            order *= len(orb)
    except SearchBudgetExceeded:
        complete = False
    witnesses = tuple(
        _translate_witness(rows, t, t, lat.gram, lat.gram)
        for lv in range(n + 1)
        for rows in level_gens[lv]
    )
    return AutomorphismGroup(
        generators=witnesses, order=order if complete else 0, complete=complete
    )


# ---------------------------------------------------------------------------
# induced action on the discriminant form


@lru_cache(maxsize=None)
def _snf_conversion(lat: IntLattice):
    d, u, _ = smith_normal_form([list(r) for r in lat.gram])
    keep = [i for i in range(lat.rank) if d[i][i] > 1]
    dd = [d[i][i] for i in range(lat.rank)]
    return tuple(tuple(r) for r in u), tuple(dd), tuple(keep)


def _coords_of(lat: IntLattice, dual_vec) -> tuple[int, ...]:
    """Coordinates in the generator presentation of a dual vector (Fractions)."""
    n = lat.rank
    gm = lat.gram
    w = [sum(gm[i][j] * dual_vec[j] for j in range(n)) for i in range(n)]
    wi = [int(x) for x in w]
    if any(x != y for x, y in zip(w, wi)):
        raise ValueError("vector is not in the dual lattice")
    u, dd, keep = _snf_conversion(lat)
    a = [sum(u[i][j] * wi[j] for j in range(n)) % dd[i] if dd[i] else 0 for i in range(n)]
    return tuple(a[i] for i in keep)


def induced_discriminant_action(lat: IntLattice, gens) -> frozenset:
    """Subgroup of O(A_L) induced by isometries of L.

    Elements are represented as tuples of generator images; the identity is
    always included.  The subgroup is closed under composition.
    """
    df = discriminant_form(lat)
    m = len(df.orders)
    ident = tuple(
        tuple(1 if i == j else 0 for j in range(m)) for i in range(m)
    )
    maps = set()
    gen_maps = []
    for wit in gens:
        images = []
        n = lat.rank
        mt = [list(r) for r in wit.matrix]
        for lift in df.lifts:
            moved = [sum(Fraction(mt[i][j]) * lift[j] for j in range(n)) for i in range(n)]
            images.append(_coords_of(lat, moved))
        gen_maps.append(tuple(images))

    def compose(f, g):
        # (f then g): image of generator i under f, then push through g
        out = []
        for img in f:
            acc = tuple(0 for _ in range(m))
            for coef, row in zip(img, g):
                acc = df.add(acc, tuple((coef * x) % d for x, d in zip(row, df.orders)))
            out.append(acc)
        return tuple(out)

    maps.add(ident)
    frontier = [ident]
    while frontier:
        nxt = []
        for f in frontier:
            for g in gen_maps:
                h = compose(f, g)
                if h not in maps:
                    maps.add(h)
                    nxt.append(h)
        frontier = nxt
    return frozenset(maps)


def discriminant_orthogonal_group(
    df: DiscriminantForm, cap: int = DEFAULT_GROUP_CAP
) -> frozenset:
    """Full O(A, q) by brute force over generator images preserving q and b.

    A map of generators extends to an automorphism iff each image has order
    dividing the generator's order, q and pairwise b values match, and the
    images generate the whole group.
    """
    if df.size > cap:
        raise SearchBudgetExceeded(f"|A| = {df.size} exceeds cap {cap}")
    m = len(df.orders)
    if m == 0:
        return frozenset({()})
    elems = list(df.elements())
    cands: dict[int, list] = {i: [] for i in range(m)}
    for c in elems:
        oc = df.order_of(c)
        qc = df.q_of(c)
        for i in range(m):
            if df.orders[i] % oc == 0 and qc == df.q[i]:
                cands[i].append(c)
    out = []
    images: list[tuple[int, ...]] = []

    def assign(i):
        if i == m:
            if len(df.subgroup_elements(images)) == df.size:
                out.append(tuple(images))
            return
        for cand in cands[i]:
            if any(df.b_of(images[j], cand) != df.b[j][i] for j in range(i)):
                continue
            images.append(cand)
            assign(i + 1)
            images.pop()

    assign(0)
    return frozenset(out)


def restriction_surjective(
    lat: IntLattice,
    node_cap: int = DEFAULT_NODE_CAP,
    group_cap: int = DEFAULT_GROUP_CAP,
) -> str:
    """Whether O(L) -> O(A_L) is onto: "true", "false" or "unknown"."""
    df = discriminant_form(lat)
    full = discriminant_orthogonal_group(df, group_cap)
    if len(full) == 1:
        return "true"
    aut = automorphism_group(lat, node_cap)
    image = induced_discriminant_action(lat, aut.generators)
    assert image <= full, "induced action must preserve the form"
    if len(image) == len(full):
        return "true"
    return "unknown" if not aut.complete else "false"
