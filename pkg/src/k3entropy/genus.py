"""Genus membership and exploration for even definite lattices.

Two even definite lattices of the same rank and sign are in the same genus
iff their discriminant forms are isomorphic; that is tested here by a
direct search, never through p-adic symbols.  Genera are explored by the
neighbor method: a p-neighbor of L meets L in an index-p sublattice of
each, and walking neighbors (for a prime p not dividing det L) reaches
every class in the genus reachable at that prime.  Explorations carry
explicit caps and report ``complete`` honestly.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
from dataclasses import dataclass
from functools import lru_cache

from .exact import hnf_rows, mat_mul, transpose
from .lattice import (
    DiscriminantForm,
    FormSearchExhausted,
    IntLattice,
    discriminant_form,
    lattice_from_json,
    lattice_to_json,
    make_lattice,
)
from .enumeration import (
    _require_definite,
    is_isometric,
    is_root_overlattice,
    minimum,
    reduced_lattice,
    short_vectors,
)

NEIGHBOR_PRIMES = (2, 3, 5)
DEFAULT_CLASS_CAP = 64
DEFAULT_STEP_CAP = 4096


class GenusUndecidable(Exception):
    """Raised when a genus question exceeds its search caps."""


@lru_cache(maxsize=None)
def _forms_isomorphic(a: DiscriminantForm, b: DiscriminantForm) -> bool:
    try:
        return a.isomorphism_to(b) is not None
    except FormSearchExhausted as exc:
        raise GenusUndecidable(str(exc)) from exc


def same_genus(l1: IntLattice, l2: IntLattice, cap: int = 10**4) -> bool:
    """Same rank, same definiteness sign, isomorphic discriminant forms.

    Raises GenusUndecidable (never returns a silent False) when the
    discriminant groups are too large for the search cap.
    """
    s1, s2 = _require_definite(l1), _require_definite(l2)
    if l1.rank != l2.rank:
        raise ValueError("same_genus needs lattices of equal rank")
    if s1 != s2:
        raise ValueError("same_genus needs lattices of the same sign")
    if abs(l1.det) != abs(l2.det):
        return False
    if abs(l1.det) == 1:
        return True
    if abs(l1.det) > cap:
        raise GenusUndecidable(f"|A_L| = {abs(l1.det)} exceeds cap {cap}")
    return _forms_isomorphic(discriminant_form(l1), discriminant_form(l2))


# ---------------------------------------------------------------------------
# neighbors


def _neighbor_from_line(lat: IntLattice, p: int, v):
    """The p-neighbor determined by a mod-p isotropic line representative.

    Returns None if the representative cannot be lifted (should not happen
    for p not dividing det L).
    """
    n = lat.rank
    g = lat.gram
    norm = lat.norm(v)
    gv = [sum(g[i][j] * v[j] for j in range(n)) for i in range(n)]
    if all(x % p == 0 for x in gv):
        return None  # functional vanishes mod p; not a neighbor line
    j0 = next(i for i in range(n) if gv[i] % p)
    w = list(v)
    if p == 2:
        if norm % 8:
            # adjust v by 2*e_j with <v, e_j> odd to reach norm = 0 mod 8
            jodd = next(i for i in range(n) if gv[i] % 2)
            w[jodd] += 2
            norm = lat.norm(w)
            if norm % 8:
                return None
    else:
        s = (norm // (2 * p)) % p
        inv = pow(gv[j0] % p, -1, p)
        t = (-s * inv) % p
        w[j0] += p * t
        norm = lat.norm(w)
        assert norm % (2 * p * p) == 0
    gw = [sum(g[i][j] * w[j] for j in range(n)) for i in range(n)]
    jj = next(i for i in range(n) if gw[i] % p)
    inv = pow(gw[jj] % p, -1, p)
    rows = []
    for i in range(n):
        if i == jj:
            continue
        c = (gw[i] * inv) % p
        row = [0] * n
        row[i] = 1
        row[jj] = -c
        rows.append(row)
    rows.append([p if i == jj else 0 for i in range(n)])
    # scale everything by p and adjoin w: basis of p*N where N is the neighbor
    scaled = [[p * x for x in row] for row in rows]
    scaled.append(list(w))
    basis = hnf_rows(scaled, n)
    assert len(basis) == n
    gram2 = mat_mul(mat_mul(basis, [list(r) for r in g]), transpose(basis))
    if any(x % (p * p) for row in gram2 for x in row):
        return None
    gram_n = [[x // (p * p) for x in row] for row in gram2]
    if any(gram_n[i][i] % 2 for i in range(n)):
        return None
    # canonicalize on a reduced basis so downstream enumeration stays cheap
    return reduced_lattice(make_lattice(gram_n))


def _isotropic_lines(lat: IntLattice, p: int):
    """Lexicographic sweep over projective representatives of isotropic lines."""
    n = lat.rank

    def rec(prefix, idx):
        if idx == n:
            if any(prefix):
                yield tuple(prefix)
            return
        if not any(prefix):
            # first nonzero coordinate normalized to 1
            yield from rec(prefix + [0], idx + 1)
            yield from rec(prefix + [1], idx + 1)
        else:
            for c in range(p):
                yield from rec(prefix + [c], idx + 1)

    for v in rec([], 0):
        norm = abs(lat.norm(v))
        if p == 2:
            if norm % 4 == 0:
                yield v
        else:
            if norm % p == 0:
                yield v


def p_neighbors(lat: IntLattice, p: int, validate: bool = True) -> tuple[IntLattice, ...]:
    """All p-neighbors of a definite even lattice, deterministically ordered.

    Requires p in {2, 3, 5} with p not dividing det(L).  With ``validate``
    every output is checked to lie in the genus of L; the explorer turns
    this off and instead validates once per discovered isometry class,
    which is equivalent (isometric lattices share a genus).
    """
    _require_definite(lat)
    if p not in NEIGHBOR_PRIMES:
        raise ValueError(f"neighbor prime must be one of {NEIGHBOR_PRIMES}")
    if abs(lat.det) % p == 0:
        raise ValueError(f"p = {p} divides det(L) = {lat.det}; standard neighbors need p coprime to det")
    out = []
    seen = set()
    for v in _isotropic_lines(lat, p):
        nb = _neighbor_from_line(lat, p, v)
        if nb is None:
            continue
        if nb.gram in seen:
            continue
        seen.add(nb.gram)
        if validate:
            assert same_genus(nb, lat), "neighbor left the genus"
        out.append(nb)
    return tuple(out)


# ---------------------------------------------------------------------------
# genus exploration


@dataclass(frozen=True)
class GenusExploration:
    seed: IntLattice
    primes_used: tuple[int, ...]
    classes: tuple[IntLattice, ...]
    complete: bool
    steps: int


def _class_key(lat: IntLattice) -> tuple:
    sv = short_vectors(lat, max(abs(lat.gram[i][i]) for i in range(lat.rank)))
    counts: dict[int, int] = {}
    for nrm in sv.norms:
        counts[abs(nrm)] = counts.get(abs(nrm), 0) + 1
    return (abs(lat.det), minimum(lat), tuple(sorted(counts.items())))


def usable_primes(lat: IntLattice, primes=NEIGHBOR_PRIMES) -> tuple[int, ...]:
    """Primes from ``primes`` valid for neighbor steps at this lattice."""
    return tuple(p for p in primes if abs(lat.det) % p != 0)


def _working_prime(lat: IntLattice, primes) -> int | None:
    """First usable prime whose isotropic-line sweep is nonempty.

    For rank >= 3 and odd p isotropy always exists; rank-2 forms can be
    anisotropic mod p, in which case the neighbor graph at p is edgeless
    and proves nothing.
    """
    for p in usable_primes(lat, primes):
        if any(True for _ in _isotropic_lines(lat, p)):
            return p
    return None


def genus_explore(
    lat: IntLattice,
    primes=NEIGHBOR_PRIMES,
    class_cap: int = DEFAULT_CLASS_CAP,
    step_cap: int = DEFAULT_STEP_CAP,
    cache_dir: str | None = None,
) -> GenusExploration:
    """Closure of neighbor expansion with isometry dedup.

    Walks the neighbor graph at the first usable prime from ``primes``
    until no new isometry classes appear; ``complete`` is True only when
    the closure finished without hitting a cap.  Rank-1 genera are
    singletons by scaling, so they close immediately.  Every newly
    discovered class is checked against the seed with same_genus.
    """
    _require_definite(lat)
    if lat.rank == 1:
        return GenusExploration(lat, (), (lat,), True, 0)
    cached = _cache_load(lat, cache_dir) if cache_dir else None
    if cached is not None:
        return cached
    p = _working_prime(lat, primes)
    if p is None:
        return GenusExploration(lat, (), (lat,), False, 0)
    classes = [lat]
    keys = [_class_key(lat)]
    steps = 0
    capped = False
    todo = [0]
    while todo and not capped:
        ci = todo.pop(0)
        steps += 1
        if steps > step_cap:
            capped = True
            break
        for nb in p_neighbors(classes[ci], p, validate=False):
            kb = _class_key(nb)
            matched = any(
                keys[idx] == kb and is_isometric(known, nb) is not None
                for idx, known in enumerate(classes)
            )
            if not matched:
                if len(classes) >= class_cap:
                    capped = True
                    break
                assert same_genus(nb, lat), "neighbor left the genus"
                classes.append(nb)
                keys.append(kb)
                todo.append(len(classes) - 1)
    complete = not capped
    result = GenusExploration(lat, (p,), tuple(classes), complete, steps)
    if cache_dir:
        _cache_store(result, cache_dir)
    return result


@dataclass(frozen=True)
class GenusVerdict:
    status: str  # "true" / "false" / "unknown" (unique_in_genus)
    witness: IntLattice | None
    exploration: GenusExploration


def unique_in_genus(lat: IntLattice, **kw) -> GenusVerdict:
    """"true" only on complete closure with a single class."""
    exp = genus_explore(lat, **kw)
    if len(exp.classes) > 1:
        return GenusVerdict("false", exp.classes[1], exp)
    return GenusVerdict("true" if exp.complete else "unknown", None, exp)


def genus_non_root_overlattice_witness(
    lat: IntLattice, primes=NEIGHBOR_PRIMES, **kw
) -> GenusVerdict:
    """A genus-mate that is not a root-overlattice, preferring minimum 2.

    Status is "witness", "none-in-explored" (complete closure, no witness)
    or "unknown" (capped exploration, no witness).  Falls through to the
    next usable prime when a capped exploration found nothing.
    """
    exp = None
    for p in usable_primes(lat, primes):
        exp = genus_explore(lat, primes=(p,), **kw)
        cands = [c for c in exp.classes if not is_root_overlattice(c)]
        cands.sort(key=lambda c: (minimum(c) != 2,))
        if cands:
            return GenusVerdict("witness", cands[0], exp)
        if exp.complete:
            return GenusVerdict("none-in-explored", None, exp)
    if exp is None:
        exp = genus_explore(lat, primes=primes, **kw)
    return GenusVerdict("unknown", None, exp)


# ---------------------------------------------------------------------------
# exploration cache (JSON files keyed by presentation-invariant data)


def genus_cache_key(lat: IntLattice) -> str:
    df = discriminant_form(lat)
    sig = json.dumps(
        {
            "rank": lat.rank,
            "det": lat.det,
            "orders": list(df.orders),
            "profile": [[o, [qv.numerator, qv.denominator], c] for (o, qv), c in df.profile()],
        },
        sort_keys=True,
    )
    return hashlib.sha256(sig.encode()).hexdigest()[:24]


def _cache_path(lat: IntLattice, cache_dir: str) -> str:
    return os.path.join(cache_dir, f"genus-{genus_cache_key(lat)}.json")


def _cache_store(exp: GenusExploration, cache_dir: str) -> None:
    os.makedirs(cache_dir, exist_ok=True)
    payload = {
        "seed": lattice_to_json(exp.seed),
        "primes_used": list(exp.primes_used),
        "classes": [lattice_to_json(c) for c in exp.classes],
        "complete": exp.complete,
        "steps": exp.steps,
    }
    with open(_cache_path(exp.seed, cache_dir), "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True)


def _cache_load(lat: IntLattice, cache_dir: str) -> GenusExploration | None:
    path = _cache_path(lat, cache_dir)
    if not os.path.exists(path):
        return None
    try:
        with open(path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
        classes = tuple(lattice_from_json(c) for c in payload["classes"])
        # revalidate before trusting the hit
        for c in classes:
            if not same_genus(lat, c):
                return None
        return GenusExploration(
            seed=lat,
            primes_used=tuple(payload["primes_used"]),
            classes=classes,
            complete=bool(payload["complete"]),
            steps=int(payload["steps"]),
        )
    except (KeyError, ValueError, json.JSONDecodeError):
        return None
