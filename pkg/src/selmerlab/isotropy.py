"""F2 combinatorics of the doubled 2-torsion space.

The quadratic form q(u) = e(pi1 u, pi2 u) on A[2]^2 governs which index sets
survive averaging: maximal unlinked subsets are cosets of its maximal
isotropic subspaces, and those are parametrised by pairs (U, phi) with U a
subspace of A[2] and phi an alternating map U -> A[2]/U^perp.  The averaged
character sums over such subspaces are evaluated here literally, with the
inner (v0, z0) average collapsed by character orthogonality (an exact finite
identity, not an analytic step).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

from . import linalg
from .arith import (
    REAL,
    TWO,
    LocalClass,
    Place,
    SigmaSet,
    SquareClass,
    odd_place,
    square_class,
    trivial_class,
)
from .curve import Curve2T, GammaElement, LocalDescentClass, torsion_descent_classes
from .selmer import BClass, BudgetError, SigmaDualData, dual_data


# ---------------------------------------------------------------------------
# ambient spaces


@dataclass(frozen=True)
class F2Space:
    """F2^dim with a symmetric zero-diagonal (alternating) pairing."""

    dim: int
    gram: Tuple[int, ...]  # gram[i] = row i as a bitmask

    def __post_init__(self):
        if len(self.gram) != self.dim:
            raise ValueError("gram must have one row per dimension")
        for i in range(self.dim):
            if self.gram[i] >> i & 1:
                raise ValueError("pairing must have zero diagonal")
            for j in range(self.dim):
                if (self.gram[i] >> j & 1) != (self.gram[j] >> i & 1):
                    raise ValueError("pairing must be symmetric")

    def pair(self, x: int, y: int) -> int:
        acc = 0
        while x:
            low = x & -x
            acc ^= linalg.parity(self.gram[low.bit_length() - 1] & y)
            x ^= low
        return acc

    def orthogonal(self, rows: Sequence[int]) -> List[int]:
        """Basis of the orthogonal complement of span(rows)."""
        cols = []
        for j in range(self.dim):
            col = 0
            for i, r in enumerate(rows):
                if self.pair(r, 1 << j):
                    col |= 1 << i
            cols.append(col)
        return linalg.left_kernel(cols, len(rows))


def torsion_space(g: int = 1, r: int = 1) -> F2Space:
    """A[2] = E[2] tensor F2^r with the product Weil pairing (g = 1 copies)."""
    if g != 1:
        raise NotImplementedError("descent combinatorics implemented for g = 1")
    dim = 2 * r
    gram = [0] * dim
    for i in range(r):
        gram[2 * i] |= 1 << (2 * i + 1)
        gram[2 * i + 1] |= 1 << (2 * i)
    return F2Space(dim, tuple(gram))


def q_form(space: F2Space, u: int) -> int:
    """q(u) = e(first half, second half) on the doubled space."""
    n = space.dim
    return space.pair(u & ((1 << n) - 1), u >> n)


def subspaces(n: int) -> Iterator[List[int]]:
    """All subspaces of F2^n as reduced-echelon bases (pivot = lowest bit)."""
    yield []
    for k in range(1, n + 1):
        for pivots in itertools.combinations(range(n), k):
            free = [
                [j for j in range(p + 1, n) if j not in pivots] for p in pivots
            ]
            total = sum(len(f) for f in free)
            for bits in range(1 << total):
                rows = []
                pos = 0
                for i, p in enumerate(pivots):
                    row = 1 << p
                    for j in free[i]:
                        if bits >> pos & 1:
                            row |= 1 << j
                        pos += 1
                    rows.append(row)
                yield rows


# ---------------------------------------------------------------------------
# maximal isotropic subspaces of (A[2]^2, q)


@dataclass(frozen=True)
class IsoSubspace:
    """W_{U,phi} = {(u, phi(u) + u') : u in U, u' in U^perp}."""

    space_dim: int  # dim of A[2]
    U_basis: Tuple[int, ...]
    phi_images: Tuple[int, ...]  # one image per U basis vector
    W_basis: Tuple[int, ...]  # vectors in F2^(2 * space_dim)

    @property
    def dim(self) -> int:
        return len(self.W_basis)

    def elements(self) -> List[int]:
        return list(linalg.enumerate_span(list(self.W_basis)))

    def key(self) -> Tuple[int, ...]:
        return tuple(linalg.echelon(list(self.W_basis)))


def enumerate_max_isotropic(space: F2Space, budget: int = 1 << 20) -> List[IsoSubspace]:
    """All maximal isotropic subspaces of (A[2]^2, q), via pairs (U, phi)."""
    n = space.dim
    estimate = sum(
        _gauss_count(n, k) << (k * (k - 1) // 2) for k in range(n + 1)
    )
    if estimate > budget:
        raise BudgetError(f"about {estimate} maximal isotropics exceeds the budget")
    out: List[IsoSubspace] = []
    for U in subspaces(n):
        k = len(U)
        Uperp = space.orthogonal(U) if U else [1 << j for j in range(n)]
        # columns of the solve system: e(u_i, e_j) for each coordinate j
        cols = []
        for j in range(n):
            col = 0
            for i, u in enumerate(U):
                if space.pair(u, 1 << j):
                    col |= 1 << i
            cols.append(col)
        for tri in range(1 << (k * (k - 1) // 2)):
            # alternating pairing P on U from the upper-triangle bits
            P = [[0] * k for _ in range(k)]
            pos = 0
            for i in range(k):
                for j in range(i + 1, k):
                    P[i][j] = P[j][i] = tri >> pos & 1
                    pos += 1
            images = []
            ok = True
            for j in range(k):
                target = 0
                for i in range(k):
                    if P[i][j]:
                        target |= 1 << i
                mask = linalg.solve(cols, k, target)
                if mask is None:
                    ok = False
                    break
                x = 0
                for t in range(n):
                    if mask >> t & 1:
                        x ^= 1 << t
                images.append(x)
            if not ok:
                continue
            W = [U[j] | (images[j] << n) for j in range(k)]
            W += [(w << n) for w in Uperp]
            out.append(IsoSubspace(n, tuple(U), tuple(images), tuple(W)))
    return out


def _gauss_count(n: int, k: int) -> int:
    num = den = 1
    for i in range(k):
        num *= (1 << (n - i)) - 1
        den *= (1 << (i + 1)) - 1
    return num // den


def brute_force_max_isotropic(space: F2Space) -> List[Tuple[int, ...]]:
    """Independent enumeration: all q-isotropic subspaces of half dimension."""
    n = space.dim
    if n > 4:
        raise BudgetError("brute-force cross-check limited to dim A[2] <= 4")
    out = []
    for rows in subspaces(2 * n):
        if len(rows) != n:
            continue
        if all(q_form(space, w) == 0 for w in linalg.enumerate_span(rows)):
            out.append(tuple(linalg.echelon(rows)))
    return out


def unlinked_classification_check(space: F2Space) -> bool:
    """Maximal unlinked subsets of A[2]^2 = cosets of maximal isotropics.

    Checked in both directions by explicit clique enumeration on the
    'unlinked' graph (u ~ v iff q(u + v) = 0).
    """
    import networkx as nx

    n = space.dim
    if n > 4:
        raise BudgetError("classification check limited to dim A[2] <= 4")
    size = 1 << (2 * n)
    q = [q_form(space, u) for u in range(size)]

    cosets = set()
    for W in enumerate_max_isotropic(space):
        span = W.elements()
        for c in range(size):
            cosets.add(frozenset(c ^ w for w in span))

    # direction 1: every coset is unlinked and maximal
    for T in cosets:
        elems = sorted(T)
        for x, y in itertools.combinations(elems, 2):
            if q[x ^ y]:
                return False
        for z in range(size):
            if z in T:
                continue
            if all(q[z ^ x] == 0 for x in elems):
                return False

    # direction 2: every maximal unlinked subset is one of the cosets.
    # The unlinked graph is a Cayley graph, so cliques translate; enumerate
    # the maximal cliques through 0 and translate them everywhere.
    nbrs0 = [v for v in range(1, size) if q[v] == 0]
    G = nx.Graph()
    G.add_nodes_from(nbrs0)
    for x, y in itertools.combinations(nbrs0, 2):
        if q[x ^ y] == 0:
            G.add_edge(x, y)
    cliques0 = [frozenset(c) | {0} for c in nx.find_cliques(G)]
    all_maximal = set()
    for C in cliques0:
        for t in range(size):
            all_maximal.add(frozenset(t ^ x for x in C))
    if all_maximal != cosets:
        return False
    return all(len(T) == (1 << n) for T in all_maximal)


def gamma_invariant_subspaces(gammas: Sequence[GammaElement], r: int) -> List[Tuple[int, ...]]:
    """All subspaces of A[2] = E[2]^r invariant under the diagonal action."""
    n = 2 * r

    def act(g: GammaElement, vec: int) -> int:
        out = 0
        for i in range(r):
            a, b = vec >> (2 * i) & 1, vec >> (2 * i + 1) & 1
            ia, ib = g.apply((a, b))
            out |= ia << (2 * i) | ib << (2 * i + 1)
        return out

    out = []
    for rows in subspaces(n):
        basis = linalg.echelon(rows)
        if all(linalg.in_span(act(g, v), basis) for g in gammas for v in rows):
            out.append(tuple(basis))
    return out


# ---------------------------------------------------------------------------
# the finite character source S-bar


class SBarGroup:
    """Image of the twist family in (Z/4N)^x modulo squares, cut by L.

    Elements are bit tuples (eps, omega, residue bits at the odd primes of
    Sigma): eps/omega encode the class mod 8, the residue bit at q is
    [(m|q) = -1] for any lift m.  Everything evaluated on elements (Jacobi
    characters, the 4-torsion Galois action, localizations at Sigma) is
    computed from these bits by quadratic reciprocity, with no lift needed.
    """

    def __init__(self, E: Curve2T, sigma: SigmaSet, L_gens: Sequence[SquareClass]):
        self.E = E
        self.sigma = sigma
        self.L_gens = [square_class(g) for g in L_gens]
        self.odd = sigma.odd_primes
        self.nbits = 2 + len(self.odd)
        for g in self.L_gens:
            for p in g.primes:
                if p != 2 and p not in self.odd:
                    raise ValueError(f"Sigma must contain the ramified prime {p}")
        d1, d2 = torsion_descent_classes(E)
        self._components = (d1.c1, d1.c2, d2.c1, d2.c2)
        self.elements = [
            h for h in range(1 << self.nbits)
            if all(self.char_bit(l, h) == 0 for l in self.L_gens)
        ]

    def alpha(self, h: int) -> int:
        """1 iff lifts are 3 mod 4."""
        return h & 1

    def _omega(self, h: int) -> int:
        return h >> 1 & 1

    def _res(self, h: int, q: int) -> int:
        return h >> (2 + self.odd.index(q)) & 1

    def char_bit(self, c: SquareClass, h: int) -> int:
        """[kronecker(c, m) == -1] for lifts m of h (support of c inside Sigma)."""
        bit = 0
        if c.sign < 0:
            bit ^= self.alpha(h)
        for q in c.primes:
            if q == 2:
                bit ^= self._omega(h)
            else:
                if q not in self.odd:
                    raise ValueError(f"{q} is outside Sigma")
                bit ^= self._res(h, q)
                if q % 4 == 3:
                    bit ^= self.alpha(h)
        return bit

    def gamma_of(self, h: int) -> GammaElement:
        bits = [self.char_bit(c, h) for c in self._components]
        cols = [(bits[1], bits[0]), (bits[3], bits[2])]
        return GammaElement(((cols[0][0], cols[1][0]), (cols[0][1], cols[1][1])))

    def local_character(self, h: int, v: Place) -> LocalClass:
        if v.kind == "real":
            return trivial_class(v)
        if v.kind == "two":
            return LocalClass(v, (0, self.alpha(h), self._omega(h)))
        return LocalClass(v, (0, self._res(h, v.p)))

    def psi_tensor_vec(self, duals: SigmaDualData, h: int, x: Tuple[int, int]) -> int:
        chi = {v: self.local_character(h, v) for v in self.sigma.places}
        return duals.psi_tensor_vec(chi, x)

    def class_of_int(self, m: int) -> int:
        """The bit tuple of a positive integer coprime to 2N."""
        if m <= 0 or m % 2 == 0:
            raise ValueError("need a positive odd integer")
        from .arith import kronecker

        h = (1 if m % 4 == 3 else 0) | ((1 if m % 8 in (3, 5) else 0) << 1)
        for i, q in enumerate(self.odd):
            if m % q == 0:
                raise ValueError(f"{m} is not coprime to Sigma")
            if kronecker(m, q) == -1:
                h |= 1 << (2 + i)
        return h


# ---------------------------------------------------------------------------
# the averaged character sums over maximal isotropics


def _split_pair(vec: int, n: int) -> Tuple[Tuple[int, int], Tuple[int, int]]:
    """A vector of A[2]^2 (r = 1) as a pair of E[2] coordinate pairs."""
    lo, hi = vec & ((1 << n) - 1), vec >> n
    return ((lo & 1, lo >> 1 & 1), (hi & 1, hi >> 1 & 1))


def _weil(x: Tuple[int, int], y: Tuple[int, int]) -> int:
    return (x[0] & y[1]) ^ (x[1] & y[0])


def y_sum(E: Curve2T, sigma: SigmaSet, b: BClass, L_gens: Sequence[SquareClass],
          W: IsoSubspace, r: int = 1, budget: int = 1 << 22) -> Fraction:
    """The averaged sum Y(W) over tuples in SBar^W (r = 1 only).

    The outer average over (v0, z0) is collapsed by character orthogonality
    into an exact signed count on an affine slice of Z0; the sum over SBar^W
    is the literal finite sum.
    """
    if r != 1:
        raise NotImplementedError("W-sums are implemented for r = 1")
    if W.space_dim != 2:
        raise ValueError("expected a maximal isotropic for r = 1, g = 1")
    sbar = SBarGroup(E, sigma, L_gens)
    duals = dual_data(E, sigma, b)
    welts = [_split_pair(w, 2) for w in W.elements()]
    nw = len(welts)
    if len(sbar.elements) ** nw > budget:
        raise BudgetError("SBar^W enumeration exceeds the budget")

    gammas = {h: sbar.gamma_of(h) for h in sbar.elements}
    vec1 = {
        (h, i): sbar.psi_tensor_vec(duals, h, welts[i][0])
        for h in sbar.elements for i in range(nw)
    }
    vec2 = {
        (h, i): sbar.psi_tensor_vec(duals, h, welts[i][1])
        for h in sbar.elements for i in range(nw)
    }
    total = 0
    for hs in itertools.product(sbar.elements, repeat=nw):
        xi = 0
        for i in range(nw):
            xi ^= _weil(welts[i][0], gammas[hs[i]].apply(welts[i][1]))
        # unordered pairs; on an unlinked W the two cross terms agree, take one
        for i in range(nw):
            if sbar.alpha(hs[i]):
                for j in range(i + 1, nw):
                    if sbar.alpha(hs[j]):
                        xi ^= _weil(welts[i][0], welts[j][1])
        x1 = 0
        x2 = 0
        for i in range(nw):
            x1 ^= vec1[(hs[i], i)]
            x2 ^= vec2[(hs[i], i)]
        inner = duals.signed_count_Z(x2, x1)
        total += -inner if xi else inner
    return Fraction(total, len(sbar.elements) ** nw)


def y_sum_pair(E: Curve2T, sigma: SigmaSet, b: BClass,
               L_gens: Sequence[SquareClass], W: IsoSubspace,
               v0_vec: int, z0_vec: int) -> Fraction:
    """Y_{v0,z0}(W) for a single pair, as the literal average over SBar^W."""
    sbar = SBarGroup(E, sigma, L_gens)
    duals = dual_data(E, sigma, b)
    layout = duals.layout
    welts = [_split_pair(w, 2) for w in W.elements()]
    nw = len(welts)
    gammas = {h: sbar.gamma_of(h) for h in sbar.elements}
    vec1 = {(h, i): sbar.psi_tensor_vec(duals, h, welts[i][0])
            for h in sbar.elements for i in range(nw)}
    vec2 = {(h, i): sbar.psi_tensor_vec(duals, h, welts[i][1])
            for h in sbar.elements for i in range(nw)}
    total = 0
    for hs in itertools.product(sbar.elements, repeat=nw):
        xi = 0
        for i in range(nw):
            xi ^= _weil(welts[i][0], gammas[hs[i]].apply(welts[i][1]))
        for i in range(nw):
            if sbar.alpha(hs[i]):
                for j in range(i + 1, nw):
                    if sbar.alpha(hs[j]):
                        xi ^= _weil(welts[i][0], welts[j][1])
        x1 = 0
        x2 = 0
        for i in range(nw):
            x1 ^= vec1[(hs[i], i)]
            x2 ^= vec2[(hs[i], i)]
        bit = xi ^ layout.pair(v0_vec, x2) ^ layout.pair(x1, z0_vec)
        total += -1 if bit else 1
    return Fraction(total, len(sbar.elements) ** nw)


def star_condition(W: IsoSubspace, r: int = 1) -> bool:
    """No codimension-1 subspace of F2^r contains pi1(W); for r = 1: U != 0."""
    if r != 1:
        raise NotImplementedError
    return len(W.U_basis) > 0


@dataclass(frozen=True)
class MainTermReport:
    lhs: Fraction
    rhs: Fraction
    equal: bool
    contributions: Tuple[Tuple[Tuple[int, ...], Fraction], ...]


def main_term_identity_check(E: Curve2T, sigma: SigmaSet, b: BClass,
                             L_gens: Sequence[SquareClass], r: int = 1) -> MainTermReport:
    """sum over (star)-maximal-isotropics of Y(W) against #S_b * 2^{r(r+1)/2}."""
    if r != 1:
        raise NotImplementedError("identity checked at r = 1")
    from .selmer import systematic_subspace

    space = torsion_space(1, r)
    contribs = []
    lhs = Fraction(0)
    for W in enumerate_max_isotropic(space):
        if not star_condition(W, r):
            continue
        val = y_sum(E, sigma, b, L_gens, W, r)
        contribs.append((W.key(), val))
        lhs += val
    S = systematic_subspace(E, sigma, b, L_gens)
    rhs = Fraction((1 << S.n_b) * 2 ** (r * (r + 1) // 2))
    return MainTermReport(lhs, rhs, lhs == rhs, tuple(contribs))


def upsilon_phi(sbar: SBarGroup, phi: Dict[Tuple[int, int], Tuple[int, int]],
                xs: Dict[Tuple[int, int], int]) -> int:
    """The quadratic form Upsilon_phi on tuples indexed by A[2] (r = 1)."""
    elems = list(xs)
    bit = 0
    for i, u in enumerate(elems):
        for up in elems[i + 1:]:
            bit ^= sbar.alpha(xs[u]) & sbar.alpha(xs[up]) & _weil(u, phi[up])
    for u in elems:
        bit ^= _weil(sbar.gamma_of(xs[u]).apply(u), phi[u])
    return bit
