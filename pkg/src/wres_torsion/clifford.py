"""Canonical Clifford algebra with an independent spinor-trace oracle.

Generators c_1 .. c_n obey

    c_i c_j + c_j c_i = -2 delta_ij        (negative-definite, fixed),

so c_i^2 = -1 and distinct generators anticommute.  A basis word is a
product of distinct generators in strictly increasing index order, encoded
as a bitmask (bit k <-> c_{k+1}); the empty word is the identity.  Elements
are finite linear combinations over Gaussian rationals with no stored zero
coefficients, making element equality a plain map comparison.

The normalized trace used everywhere is the spinor trace for n = 2m:
tr[id] = 2^m and every nonempty canonical word is traceless, hence
``trace`` reads off 2^m times the identity coefficient.  ``build_gamma``
and ``trace_via_rep`` provide the independent oracle: exact gamma matrices
grown by iterated tensor products from a 2x2 seed pair, entries always in
{0, +-1, +-i}, and the trace recomputed as an honest matrix diagonal sum.
"""

from __future__ import annotations

from typing import Dict, Iterable, List, Sequence, Tuple

from .numerics import GaussianRational, I, ONE, ZERO

Word = int  # bitmask encoding of a canonical word

_SIGN_TABLES: Dict[int, List[List[int]]] = {}


def blade_mul(a: Word, b: Word) -> Tuple[int, Word]:
    """Product of two canonical words: (sign, canonical word).

    Sign = transposition parity of interleaving b into a, times (-1) per
    common generator (each c_i^2 = -1).
    """
    swaps = 0
    bb = b
    while bb:
        low = bb & -bb
        i = low.bit_length() - 1
        swaps += (a >> (i + 1)).bit_count()
        bb ^= low
    sign = -1 if swaps & 1 else 1
    if (a & b).bit_count() & 1:
        sign = -sign
    return sign, a ^ b


def _sign_table(n: int) -> List[List[int]]:
    table = _SIGN_TABLES.get(n)
    if table is None:
        size = 1 << n
        table = [[blade_mul(a, b)[0] for b in range(size)] for a in range(size)]
        _SIGN_TABLES[n] = table
    return table


def word_indices(word: Word) -> Tuple[int, ...]:
    """Bitmask -> strictly increasing 1-based generator indices."""
    out = []
    i = 1
    while word:
        if word & 1:
            out.append(i)
        word >>= 1
        i += 1
    return tuple(out)


def word_from_indices(indices: Iterable[int]) -> Word:
    mask = 0
    for i in indices:
        mask |= 1 << (i - 1)
    return mask


def canonicalize(indices: Sequence[int], n: int) -> Tuple[GaussianRational, Tuple[int, ...]]:
    """Reduce a raw generator product to (sign, canonical word).

    ``indices`` may repeat and be unordered; rewriting uses c_i c_j = -c_j c_i
    for i != j and c_i c_i = -1.  Raises ValueError on indices outside 1..n.
    """
    sign = 1
    mask = 0
    for i in indices:
        if not 1 <= i <= n:
            raise ValueError(f"generator index {i} outside 1..{n}")
        s, mask = blade_mul(mask, 1 << (i - 1))
        sign *= s
    return (ONE if sign > 0 else -ONE), word_indices(mask)


class CliffordElement:
    """Linear combination of canonical words over GaussianRational."""

    __slots__ = ("n", "terms")

    def __init__(self, n: int, terms: Dict[Word, GaussianRational] | None = None):
        self.n = n
        self.terms: Dict[Word, GaussianRational] = {}
        if terms:
            for word, coeff in terms.items():
                if coeff:
                    self.terms[word] = coeff

    # -- constructors ----------------------------------------------------

    @classmethod
    def zero(cls, n: int) -> "CliffordElement":
        return cls(n)

    @classmethod
    def identity(cls, n: int) -> "CliffordElement":
        return cls(n, {0: ONE})

    @classmethod
    def generator(cls, n: int, i: int) -> "CliffordElement":
        if not 1 <= i <= n:
            raise ValueError(f"generator index {i} outside 1..{n}")
        return cls(n, {1 << (i - 1): ONE})

    @classmethod
    def from_vector(cls, n: int, coeffs: Sequence) -> "CliffordElement":
        """c(v) for v = sum v_i e_i; coeffs are rationals (length n)."""
        terms: Dict[Word, GaussianRational] = {}
        for i, c in enumerate(coeffs):
            g = c if isinstance(c, GaussianRational) else GaussianRational(c)
            if g:
                terms[1 << i] = g
        return cls(n, terms)

    @classmethod
    def from_word(cls, n: int, indices: Sequence[int],
                  coeff: GaussianRational = ONE) -> "CliffordElement":
        sign, word = canonicalize(indices, n)
        return cls(n, {word_from_indices(word): sign * coeff})

    # -- algebra ---------------------------------------------------------

    def _check(self, other: "CliffordElement") -> None:
        if self.n != other.n:
            raise ValueError(f"dimension mismatch: {self.n} != {other.n}")

    def __add__(self, other: "CliffordElement") -> "CliffordElement":
        self._check(other)
        terms = dict(self.terms)
        for word, coeff in other.terms.items():
            acc = terms.get(word, ZERO) + coeff
            if acc:
                terms[word] = acc
            else:
                terms.pop(word, None)
        out = CliffordElement(self.n)
        out.terms = terms
        return out

    def __sub__(self, other: "CliffordElement") -> "CliffordElement":
        return self + (-other)

    def __neg__(self) -> "CliffordElement":
        out = CliffordElement(self.n)
        out.terms = {w: -c for w, c in self.terms.items()}
        return out

    def scale(self, scalar) -> "CliffordElement":
        s = scalar if isinstance(scalar, GaussianRational) else GaussianRational(scalar)
        out = CliffordElement(self.n)
        if s:
            out.terms = {w: c * s for w, c in self.terms.items()}
        return out

    def __mul__(self, other: "CliffordElement") -> "CliffordElement":
        self._check(other)
        sign = _sign_table(self.n)
        acc: Dict[Word, GaussianRational] = {}
        for wa, ca in self.terms.items():
            row = sign[wa]
            for wb, cb in other.terms.items():
                w = wa ^ wb
                c = ca * cb
                prev = acc.get(w)
                term = c if row[wb] > 0 else -c
                acc[w] = term if prev is None else prev + term
        out = CliffordElement(self.n)
        out.terms = {w: c for w, c in acc.items() if c}
        return out

    def __eq__(self, other) -> bool:
        if not isinstance(other, CliffordElement):
            return NotImplemented
        return self.n == other.n and self.terms == other.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __repr__(self):
        if not self.terms:
            return "0"
        bits = []
        for word in sorted(self.terms):
            label = "id" if word == 0 else "c" + "c".join(map(str, word_indices(word)))
            bits.append(f"({self.terms[word]})*{label}")
        return " + ".join(bits)


def mul(a: CliffordElement, b: CliffordElement) -> CliffordElement:
    return a * b


def trace(a: CliffordElement, m: int) -> GaussianRational:
    """Spinor trace over n = 2m: 2^m times the identity coefficient."""
    if a.n != 2 * m:
        raise ValueError(f"element over n={a.n} traced with m={m}")
    return a.terms.get(0, ZERO) * (1 << m)


# ---------------------------------------------------------------------------
# Independent matrix oracle
# ---------------------------------------------------------------------------

Matrix = Tuple[Tuple[GaussianRational, ...], ...]


def _mat_mul(a: Matrix, b: Matrix) -> Matrix:
    size = len(a)
    return tuple(
        tuple(sum((a[i][k] * b[k][j] for k in range(size)), ZERO) for j in range(size))
        for i in range(size)
    )


def _kron(a: Matrix, b: Matrix) -> Matrix:
    na, nb = len(a), len(b)
    return tuple(
        tuple(a[i // nb][j // nb] * b[i % nb][j % nb] for j in range(na * nb))
        for i in range(na * nb)
    )


_X: Matrix = ((ZERO, ONE), (-ONE, ZERO))
_Y: Matrix = ((ZERO, I), (I, ZERO))
_Z: Matrix = ((ONE, ZERO), (ZERO, -ONE))
_EYE2: Matrix = ((ONE, ZERO), (ZERO, ONE))


class GammaRep:
    """Exact gamma matrices for n = 2m generators, size 2^m."""

    def __init__(self, n: int, matrices: Tuple[Matrix, ...]):
        self.n = n
        self.matrices = matrices
        self._word_cache: Dict[Word, Matrix] = {0: _identity_matrix(len(matrices[0]))}

    @property
    def dim(self) -> int:
        return len(self.matrices[0])

    def word_matrix(self, word: Word) -> Matrix:
        """Matrix of a canonical word, built by exact matrix products."""
        cached = self._word_cache.get(word)
        if cached is None:
            low = word & -word
            rest = word ^ low
            gamma = self.matrices[low.bit_length() - 1]
            cached = _mat_mul(gamma, self.word_matrix(rest))
            self._word_cache[word] = cached
        return cached


def _identity_matrix(size: int) -> Matrix:
    return tuple(
        tuple(ONE if i == j else ZERO for j in range(size)) for i in range(size)
    )


def build_gamma(m: int) -> GammaRep:
    """Iterated tensor construction; entries stay in {0, +-1, +-i}."""
    if m < 1:
        raise ValueError("half-dimension m must be >= 1")
    gammas: List[Matrix] = [_X, _Y]
    for _ in range(m - 1):
        eye = _identity_matrix(len(gammas[0]))
        gammas = [_kron(g, _Z) for g in gammas]
        gammas.append(_kron(eye, _X))
        gammas.append(_kron(eye, _Y))
    return GammaRep(2 * m, tuple(gammas))


def trace_via_rep(a: CliffordElement, rep: GammaRep) -> GaussianRational:
    """Assemble the full representing matrix of ``a``, then sum its diagonal."""
    if a.n != rep.n:
        raise ValueError(f"element over n={a.n} against representation n={rep.n}")
    size = rep.dim
    acc = [[ZERO] * size for _ in range(size)]
    for word, coeff in a.terms.items():
        mat = rep.word_matrix(word)
        for i in range(size):
            row = mat[i]
            arow = acc[i]
            for j in range(size):
                entry = row[j]
                if entry:
                    arow[j] = arow[j] + coeff * entry
    total = ZERO
    for i in range(size):
        total = total + acc[i][i]
    return total
