"""Even integral lattices given by Gram matrices, and their discriminant forms.

An IntLattice is an even nondegenerate lattice presented by a symmetric
integer Gram matrix; all arithmetic is exact.  The discriminant form
(A_L, q_L) is the finite quadratic form on L*/L with q valued in Q/2Z and
the pairing valued in Q/Z.  Conventions: q values are reduced into [0, 2),
pairings into [0, 1).
"""

from __future__ import annotations

import itertools
import json
import math
import re
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from .exact import (
    det_int,
    frac_inverse,
    hnf_rows,
    identity,
    int_inverse_unimodular,
    kernel_int,
    mat_mul,
    saturate_rows,
    signature,
    smith_normal_form,
    transpose,
)

NEGATIVE_DEFINITE = "negative-definite"
POSITIVE_DEFINITE = "positive-definite"
HYPERBOLIC = "hyperbolic"
INDEFINITE_OTHER = "indefinite-other"


@dataclass(frozen=True)
class IntLattice:
    """Even nondegenerate lattice with integer Gram matrix (rows = basis)."""

    gram: tuple[tuple[int, ...], ...]
    name: str = field(default="", compare=False)

    def __post_init__(self):
        g = self.gram
        n = len(g)
        if n < 1:
            raise ValueError("rank must be at least 1")
        if any(len(row) != n for row in g):
            raise ValueError("Gram matrix must be square")
        if any(g[i][j] != g[j][i] for i in range(n) for j in range(i)):
            raise ValueError("Gram matrix must be symmetric")
        if any(g[i][i] % 2 for i in range(n)):
            raise ValueError("lattice is not even: odd diagonal entry")
        if det_int(g) == 0:
            raise ValueError("degenerate Gram matrix")

    @property
    def rank(self) -> int:
        return len(self.gram)

    @property
    def det(self) -> int:
        return determinant(self)

    @property
    def definiteness(self) -> str:
        return _definiteness(self)

    def norm(self, v) -> int:
        g = self.gram
        return sum(v[i] * g[i][j] * v[j] for i in range(len(g)) for j in range(len(g)))

    def inner(self, v, w) -> int:
        g = self.gram
        return sum(v[i] * g[i][j] * w[j] for i in range(len(g)) for j in range(len(g)))

    def label(self) -> str:
        return self.name or f"rank{self.rank}/det{self.det}"

    def __repr__(self):
        return f"IntLattice({self.label()})"


def make_lattice(gram, name: str = "") -> IntLattice:
    return IntLattice(tuple(tuple(int(x) for x in row) for row in gram), name)


@lru_cache(maxsize=None)
def determinant(lat: IntLattice) -> int:
    """Exact determinant of the Gram matrix."""
    return det_int([list(r) for r in lat.gram])


@lru_cache(maxsize=None)
def _definiteness(lat: IntLattice) -> str:
    pos, neg = signature([list(r) for r in lat.gram])
    if neg == 0:
        return POSITIVE_DEFINITE
    if pos == 0:
        return NEGATIVE_DEFINITE
    if pos == 1:
        return HYPERBOLIC
    return INDEFINITE_OTHER


def rescale(lat: IntLattice, m: int) -> IntLattice:
    """The lattice L(m): same module, form multiplied by m >= 1."""
    if m < 1:
        raise ValueError("scale factor must be >= 1")
    if m == 1:
        return lat
    name = f"{lat.name}({m})" if lat.name else ""
    return make_lattice([[m * x for x in row] for row in lat.gram], name)


def direct_sum(*lats: IntLattice) -> IntLattice:
    """Orthogonal (block-diagonal) sum."""
    n = sum(l.rank for l in lats)
    g = [[0] * n for _ in range(n)]
    off = 0
    for l in lats:
        for i in range(l.rank):
            for j in range(l.rank):
                g[off + i][off + j] = l.gram[i][j]
        off += l.rank
    name = "+".join(l.name for l in lats) if all(l.name for l in lats) else ""
    return make_lattice(g, name)


def is_primitive_vector(lat: IntLattice, v) -> bool:
    """True iff v is nonzero with coprime coordinates."""
    if not any(v):
        raise ValueError("zero vector")
    return math.gcd(*[abs(int(x)) for x in v]) == 1


def primitive_scale_divisor(lat: IntLattice) -> int:
    """Greatest b >= 1 such that (1/b) * gram is still an even integral Gram."""
    g = 0
    for i in range(lat.rank):
        for j in range(lat.rank):
            g = math.gcd(g, lat.gram[i][i] // 2 if i == j else lat.gram[i][j])
    return max(g, 1)


# ---------------------------------------------------------------------------
# discriminant forms


def _mod2(x: Fraction) -> Fraction:
    return x % 2


def _mod1(x: Fraction) -> Fraction:
    return x % 1


@dataclass(frozen=True)
class DiscriminantForm:
    """Finite quadratic form (A, q): orders of generators, q in Q/2Z, b in Q/Z.

    ``orders`` lists the generator orders; for forms produced by
    ``discriminant_form`` these are the invariant factors > 1 of A_L.
    ``lifts`` (when present) are rational coordinate vectors of generator
    preimages in L* with respect to the basis of the source lattice.
    """

    orders: tuple[int, ...]
    q: tuple[Fraction, ...]
    b: tuple[tuple[Fraction, ...], ...]
    lifts: tuple[tuple[Fraction, ...], ...] | None = field(default=None, compare=False)
    source: IntLattice | None = field(default=None, compare=False)

    def __post_init__(self):
        m = len(self.orders)
        if len(self.q) != m or len(self.b) != m or any(len(r) != m for r in self.b):
            raise ValueError("inconsistent generator data")

    @property
    def size(self) -> int:
        return math.prod(self.orders)

    def elements(self):
        return itertools.product(*[range(d) for d in self.orders])

    def q_of(self, c) -> Fraction:
        tot = Fraction(0)
        for i, ci in enumerate(c):
            tot += ci * ci * self.q[i]
            for j in range(i + 1, len(c)):
                tot += 2 * ci * c[j] * self.b[i][j]
        return _mod2(tot)

    def b_of(self, c1, c2) -> Fraction:
        tot = Fraction(0)
        for i, x in enumerate(c1):
            if not x:
                continue
            for j, y in enumerate(c2):
                if y:
                    tot += x * y * self.b[i][j]
        return _mod1(tot)

    def order_of(self, c) -> int:
        out = 1
        for ci, d in zip(c, self.orders):
            out = math.lcm(out, d // math.gcd(d, ci))
        return out

    def normalize(self, c) -> tuple[int, ...]:
        return tuple(ci % d for ci, d in zip(c, self.orders))

    def add(self, c1, c2) -> tuple[int, ...]:
        return tuple((x + y) % d for x, y, d in zip(c1, c2, self.orders))

    def neg(self, c) -> tuple[int, ...]:
        return tuple((-x) % d for x, d in zip(c, self.orders))

    def subgroup_elements(self, gens) -> set[tuple[int, ...]]:
        zero = tuple(0 for _ in self.orders)
        seen = {zero}
        frontier = [zero]
        while frontier:
            nxt = []
            for x in frontier:
                for g in gens:
                    y = self.add(x, g)
                    if y not in seen:
                        seen.add(y)
                        nxt.append(y)
            frontier = nxt
        return seen

    def profile(self) -> tuple:
        """Isomorphism invariant: sorted multiset of (element order, q value)."""
        return _df_profile(self)

    def orthogonal_sum(self, other: "DiscriminantForm") -> "DiscriminantForm":
        m, k = len(self.orders), len(other.orders)
        b = [[Fraction(0)] * (m + k) for _ in range(m + k)]
        for i in range(m):
            for j in range(m):
                b[i][j] = self.b[i][j]
        for i in range(k):
            for j in range(k):
                b[m + i][m + j] = other.b[i][j]
        return DiscriminantForm(
            orders=self.orders + other.orders,
            q=self.q + other.q,
            b=tuple(tuple(r) for r in b),
        )

    def lift_vector(self, c) -> tuple[Fraction, ...]:
        """Rational coordinates in the source basis of a preimage of c in L*."""
        if self.lifts is None:
            raise ValueError("no lift data attached to this form")
        n = len(self.lifts[0]) if self.lifts else 0
        out = [Fraction(0)] * n
        for ci, lift in zip(c, self.lifts):
            for t in range(n):
                out[t] += ci * lift[t]
        return tuple(out)

    def isotropic_subgroup(self, gens) -> "IsotropicSubgroup":
        gens = tuple(self.normalize(g) for g in gens)
        elems = self.subgroup_elements(gens)
        for x in elems:
            if self.q_of(x) != 0:
                raise ValueError(f"subgroup is not isotropic: q({x}) != 0 mod 2Z")
        for g1 in gens:
            for g2 in gens:
                if self.b_of(g1, g2) != 0:
                    raise ValueError("subgroup is not isotropic: nonzero pairing")
        return IsotropicSubgroup(generators=gens, order=len(elems))

    def isomorphism_to(self, other: "DiscriminantForm", node_cap: int = 10**6):
        """Generator images of an isomorphism preserving q, or None.

        Raises FormSearchExhausted when the backtracking budget runs out
        (so callers never confuse "unknown" with "no").
        """
        return _df_isomorphism(self, other, node_cap)


@dataclass(frozen=True)
class IsotropicSubgroup:
    """Isotropic subgroup of a discriminant form, by generator coordinates."""

    generators: tuple[tuple[int, ...], ...]
    order: int


class FormSearchExhausted(Exception):
    """Raised when a discriminant-form search exceeds its node budget."""


@lru_cache(maxsize=None)
def _df_profile(df: DiscriminantForm) -> tuple:
    prof = {}
    for c in df.elements():
        key = (df.order_of(c), df.q_of(c))
        prof[key] = prof.get(key, 0) + 1
    return tuple(sorted(prof.items()))


@lru_cache(maxsize=None)
def _df_isomorphism(a: DiscriminantForm, b: DiscriminantForm, node_cap: int):
    if a.size != b.size:
        return None
    if a.size == 1:
        return ()
    if a.profile() != b.profile():
        return None
    if a.orders == b.orders and a.q == b.q and a.b == b.b:
        return tuple(
            tuple(1 if i == j else 0 for j in range(len(a.orders)))
            for i in range(len(a.orders))
        )
    belems = sorted(b.elements())
    by_key: dict[tuple, list] = {}
    for c in belems:
        by_key.setdefault((b.order_of(c), b.q_of(c)), []).append(c)
    gens_a = [
        tuple(1 if i == j else 0 for j in range(len(a.orders)))
        for i in range(len(a.orders))
    ]
    keys = [(a.orders[i], a.q[i]) for i in range(len(a.orders))]
    images: list[tuple[int, ...]] = []
    nodes = 0

    def assign(i) -> bool:
        nonlocal nodes
        if i == len(gens_a):
            return len(b.subgroup_elements(images)) == b.size
        for cand in by_key.get(keys[i], ()):
            nodes += 1
            if nodes > node_cap:
                raise FormSearchExhausted(f"budget {node_cap} exceeded")
            ok = True
            for j in range(i):
                if b.b_of(images[j], cand) != a.b[j][i]:
                    ok = False
                    break
            if not ok:
                continue
            images.append(cand)
            if assign(i + 1):
                return True
            images.pop()
        return False

    if assign(0):
        return tuple(images)
    return None


@lru_cache(maxsize=None)
def discriminant_form(lat: IntLattice) -> DiscriminantForm:
    """Invariant-factor presentation of (A_L, q_L) computed via Smith normal form."""
    g = [list(r) for r in lat.gram]
    n = lat.rank
    d, u, _ = smith_normal_form(g)
    uinv = int_inverse_unimodular(u)
    ginv = frac_inverse(g)
    orders, lifts = [], []
    for i in range(n):
        di = d[i][i]
        if di > 1:
            # generator g_i lifts to G^-1 * (column i of U^-1)
            col = [uinv[r][i] for r in range(n)]
            lift = tuple(
                sum(ginv[r][c] * col[c] for c in range(n)) for r in range(n)
            )
            orders.append(di)
            lifts.append(lift)
    m = len(orders)

    def pair(x, y) -> Fraction:
        gm = lat.gram
        return sum(x[i] * gm[i][j] * y[j] for i in range(n) for j in range(n))

    q = tuple(_mod2(pair(l, l)) for l in lifts)
    b = tuple(
        tuple(_mod1(pair(lifts[i], lifts[j])) for j in range(m)) for i in range(m)
    )
    df = DiscriminantForm(
        orders=tuple(orders), q=q, b=b, lifts=tuple(lifts), source=lat
    )
    assert df.size == abs(determinant(lat))
    return df


def overlattice(lat: IntLattice, sub: IsotropicSubgroup) -> IntLattice:
    """Even overlattice obtained by adjoining lifts of an isotropic subgroup.

    The output basis is Hermite-reduced, so equal overlattices get equal
    Gram matrices.  det(M) * [M:L]^2 = det(L) is asserted.
    """
    df = discriminant_form(lat)
    # re-validate isotropy against this lattice's form
    sub = df.isotropic_subgroup(sub.generators)
    n = lat.rank
    rows_frac = [tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n)]
    rows_frac += [df.lift_vector(g) for g in sub.generators]
    den = math.lcm(*[f.denominator for row in rows_frac for f in row])
    int_rows = [[int(f * den) for f in row] for row in rows_frac]
    basis = hnf_rows(int_rows, n)
    assert len(basis) == n
    bfrac = [[Fraction(x, den) for x in row] for row in basis]
    gm = [list(r) for r in lat.gram]
    gram2 = mat_mul(mat_mul(bfrac, gm), transpose(bfrac))
    g2int = [[int(x) for x in row] for row in gram2]
    if any(Fraction(g2int[i][j]) != gram2[i][j] for i in range(n) for j in range(n)):
        raise ValueError("overlattice is not integral (subgroup not isotropic?)")
    out = make_lattice(g2int)
    assert determinant(out) * sub.order**2 == determinant(lat)
    return out


def orthogonal_complement(lat: IntLattice, sub_rows) -> IntLattice:
    """Gram matrix of the primitive orthogonal complement of a sublattice.

    ``sub_rows`` are generators (rows, in lattice coordinates).  The input
    is saturated first; a warning is emitted if saturation changed it.
    """
    n = lat.rank
    rows = [list(r) for r in sub_rows]
    sat = saturate_rows(rows, n)
    if not sat:
        raise ValueError("zero sublattice")
    if sat != hnf_rows(rows, n):
        warnings.warn("sublattice was not primitive; taking its saturation")
    gm = [list(r) for r in lat.gram]
    sub_gram = mat_mul(mat_mul(sat, gm), transpose(sat))
    if det_int(sub_gram) == 0:
        raise ValueError("degenerate sublattice")
    pairing = mat_mul(sat, gm)  # k x n; complement = right kernel
    comp = kernel_int(pairing)
    if not comp:
        raise ValueError("orthogonal complement is zero")
    gram2 = mat_mul(mat_mul(comp, gm), transpose(comp))
    return make_lattice(gram2)


# ---------------------------------------------------------------------------
# standard negative definite root lattices and builtin names


def _cartan_a(n):
    g = [[0] * n for _ in range(n)]
    for i in range(n):
        g[i][i] = 2
        if i + 1 < n:
            g[i][i + 1] = g[i + 1][i] = -1
    return g


def _cartan_d(n):
    if n < 4:
        raise ValueError("D_n needs n >= 4")
    g = _cartan_a(n - 1)
    for row in g:
        row.append(0)
    g.append([0] * n)
    g[n - 1][n - 1] = 2
    g[n - 3][n - 1] = g[n - 1][n - 3] = -1
    return g


def _cartan_e(n):
    if n not in (6, 7, 8):
        raise ValueError("E_n needs n in {6, 7, 8}")
    g = _cartan_a(n - 1)
    for row in g:
        row.append(0)
    g.append([0] * n)
    g[n - 1][n - 1] = 2
    # extra node attached to the third simple root of the A-chain
    g[2][n - 1] = g[n - 1][2] = -1
    return g


def root_lattice(kind: str, n: int) -> IntLattice:
    """Negative definite root lattice A_n, D_n or E_n."""
    if kind == "A":
        if n < 1:
            raise ValueError("A_n needs n >= 1")
        g = _cartan_a(n)
    elif kind == "D":
        g = _cartan_d(n)
    elif kind == "E":
        g = _cartan_e(n)
    else:
        raise ValueError(f"unknown root lattice kind {kind!r}")
    return make_lattice([[-x for x in row] for row in g], f"{kind}{n}")


_NAME_TOKEN = re.compile(r"^([ADE])(\d+)(?:\((\d+)\))?(?:\^(\d+))?$")


def lattice_from_name(name: str) -> IntLattice:
    """Parse builtin names: A<n>, D<n>, E6/E7/E8, scaling '(m)', powers '^k', sums '+'.

    Examples: "E8(2)+A1", "A1^8", "A1(6)".
    """
    parts = []
    for token in name.replace(" ", "").split("+"):
        m = _NAME_TOKEN.match(token)
        if not m:
            raise ValueError(f"cannot parse lattice name {token!r}")
        kind, n, scale, power = m.groups()
        lat = root_lattice(kind, int(n))
        if scale:
            lat = rescale(lat, int(scale))
        parts.extend([lat] * (int(power) if power else 1))
    out = direct_sum(*parts) if len(parts) > 1 else parts[0]
    return IntLattice(out.gram, name.replace(" ", ""))


# ---------------------------------------------------------------------------
# JSON interchange


def lattice_to_json(lat: IntLattice) -> dict:
    return {"name": lat.name, "gram": [list(r) for r in lat.gram]}


def lattice_from_json(obj: dict) -> IntLattice:
    return make_lattice(obj["gram"], obj.get("name", ""))


def load_catalog(path) -> list[IntLattice]:
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    return [lattice_from_json(entry) for entry in data]


def dump_catalog(lats, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump([lattice_to_json(l) for l in lats], fh, indent=2)
