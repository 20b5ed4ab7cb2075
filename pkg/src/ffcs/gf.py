"""Exact arithmetic and linear algebra over GF(q), q prime or q = 2^m.

Elements are encoded as integers 0..q-1.  For extension fields the base-2
digits of the encoding are the polynomial coefficients, and multiplication
uses log/antilog tables built from a fixed primitive polynomial per degree,
so encodings are reproducible across runs and platforms.

Vectors and matrices are plain numpy integer arrays; a GF instance supplies
the arithmetic.  All operations are pure, and a GF instance is immutable
after construction, so it can be shared freely across threads.
"""

from __future__ import annotations

import itertools

import numpy as np

MAX_Q = 1 << 16

# Primitive polynomial for GF(2^m), m -> full polynomial including the x^m
# term, e.g. m=8 -> 0x11D = x^8+x^4+x^3+x^2+1.  Standard LFSR/Reed-Solomon
# choices; changing one would change every element encoding.
PRIMITIVE_POLY = {
    1: 0x3,
    2: 0x7,
    3: 0xB,
    4: 0x13,
    5: 0x25,
    6: 0x43,
    7: 0x89,
    8: 0x11D,
    9: 0x211,
    10: 0x409,
    11: 0x805,
    12: 0x1053,
    13: 0x201B,
    14: 0x4443,
    15: 0x8003,
    16: 0x1100B,
}


class FieldError(ValueError):
    """Unsupported field size or invalid element/dimension."""


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


class GF:
    """Finite field GF(q) for prime q or q = 2^m, q <= 2^16."""

    def __init__(self, q: int):
        if not isinstance(q, (int, np.integer)) or q < 2 or q > MAX_Q:
            raise FieldError(f"unsupported field size {q!r}: need 2 <= q <= {MAX_Q}")
        q = int(q)
        self.q = q
        if _is_prime(q):
            self.characteristic = q
            self.degree = 1
            self.primitive_poly = None
            self._exp = None
            self._log = None
        elif q & (q - 1) == 0:  # power of two
            m = q.bit_length() - 1
            self.characteristic = 2
            self.degree = m
            self.primitive_poly = PRIMITIVE_POLY[m]
            self._build_tables()
        else:
            raise FieldError(f"unsupported field size {q}: not prime and not a power of 2")

    def _build_tables(self):
        q, poly = self.q, self.primitive_poly
        exp = np.zeros(q - 1, dtype=np.int64)
        log = np.full(q, -1, dtype=np.int64)
        x = 1
        for i in range(q - 1):
            exp[i] = x
            log[x] = i
            x <<= 1
            if x & q:
                x ^= poly
        if np.any(log[1:] < 0):
            raise FieldError(f"polynomial {poly:#x} is not primitive for q={q}")
        log[0] = 0  # placeholder, masked out wherever it could be hit
        self._exp = exp
        self._log = log

    @property
    def is_prime_field(self) -> bool:
        return self.degree == 1

    def __repr__(self):
        return f"GF({self.q})"

    def __eq__(self, other):
        return isinstance(other, GF) and other.q == self.q

    def __hash__(self):
        return hash(("GF", self.q))

    # -- scalar arithmetic -------------------------------------------------

    def add(self, a: int, b: int) -> int:
        if self.is_prime_field:
            return (a + b) % self.q
        return a ^ b

    def sub(self, a: int, b: int) -> int:
        if self.is_prime_field:
            return (a - b) % self.q
        return a ^ b

    def neg(self, a: int) -> int:
        if self.is_prime_field:
            return (-a) % self.q
        return a

    def mul(self, a: int, b: int) -> int:
        if self.is_prime_field:
            return (a * b) % self.q
        if a == 0 or b == 0:
            return 0
        return int(self._exp[(self._log[a] + self._log[b]) % (self.q - 1)])

    def inv(self, a: int) -> int:
        if a % self.q == 0:
            raise ZeroDivisionError("inverse of 0 in a finite field")
        if self.is_prime_field:
            return pow(int(a), self.q - 2, self.q)
        return int(self._exp[(self.q - 1 - self._log[a]) % (self.q - 1)])

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    # -- vectorized arithmetic on numpy arrays -----------------------------

    def add_arr(self, a, b):
        if self.is_prime_field:
            return (a + b) % self.q
        return np.bitwise_xor(a, b)

    def sub_arr(self, a, b):
        if self.is_prime_field:
            return (a - b) % self.q
        return np.bitwise_xor(a, b)

    def neg_arr(self, a):
        if self.is_prime_field:
            return (-a) % self.q
        return np.asarray(a).copy()

    def mul_arr(self, a, b):
        if self.is_prime_field:
            return (a * b) % self.q
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        out = self._exp[(self._log[a] + self._log[b]) % (self.q - 1)]
        return np.where((a == 0) | (b == 0), 0, out)

    def scale_arr(self, c: int, a):
        """c * a for a scalar c and array a."""
        return self.mul_arr(np.int64(c), np.asarray(a, dtype=np.int64))

    # -- vectors and matrices ----------------------------------------------

    def check_elements(self, a) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64)
        if a.size and (a.min() < 0 or a.max() >= self.q):
            raise FieldError(f"element out of range for GF({self.q})")
        return a

    def matvec(self, A, x) -> np.ndarray:
        """y = A x with all operations in GF(q); A is (M, N), x is (N,)."""
        A = np.asarray(A, dtype=np.int64)
        x = np.asarray(x, dtype=np.int64)
        if A.ndim != 2 or x.ndim != 1 or A.shape[1] != x.shape[0]:
            raise FieldError(f"dimension mismatch: A is {A.shape}, x is {x.shape}")
        if A.shape[0] == 0:
            return np.zeros(0, dtype=np.int64)
        if self.is_prime_field:
            return (A @ x) % self.q
        terms = self.mul_arr(A, x[None, :])
        return np.bitwise_xor.reduce(terms, axis=1)

    def matvec_many(self, A, X) -> np.ndarray:
        """Batched products: rows of X are vectors; returns (B, M) with row b = A X[b]."""
        A = np.asarray(A, dtype=np.int64)
        X = np.asarray(X, dtype=np.int64)
        if X.ndim != 2 or A.ndim != 2 or A.shape[1] != X.shape[1]:
            raise FieldError(f"dimension mismatch: A is {A.shape}, X is {X.shape}")
        if A.shape[0] == 0:
            return np.zeros((X.shape[0], 0), dtype=np.int64)
        if self.is_prime_field:
            return (X @ A.T) % self.q
        out = np.zeros((X.shape[0], A.shape[0]), dtype=np.int64)
        for i in range(A.shape[0]):
            out[:, i] = np.bitwise_xor.reduce(self.mul_arr(X, A[i][None, :]), axis=1)
        return out

    def row_reduce(self, A):
        """Reduced row-echelon form.

        Returns (rank, rref, pivot_cols).  Pivoting is deterministic: the
        first nonzero entry in column order, scanning rows top-down.
        """
        M = np.array(A, dtype=np.int64, copy=True)
        if M.ndim != 2:
            raise FieldError("row_reduce expects a 2-D matrix")
        n_rows, n_cols = M.shape
        pivot_cols = []
        r = 0
        for c in range(n_cols):
            if r >= n_rows:
                break
            nz = np.nonzero(M[r:, c])[0]
            if nz.size == 0:
                continue
            p = r + int(nz[0])
            if p != r:
                M[[r, p]] = M[[p, r]]
            pv = int(M[r, c])
            if pv != 1:
                M[r] = self.scale_arr(self.inv(pv), M[r])
            col = M[:, c].copy()
            col[r] = 0
            rows = np.nonzero(col)[0]
            if rows.size:
                M[rows] = self.sub_arr(M[rows], self.mul_arr(col[rows, None], M[r][None, :]))
            pivot_cols.append(c)
            r += 1
        return r, M, pivot_cols

    def solve_affine(self, A, y):
        """Solution set of A z = y as (particular | None, kernel_basis).

        The full solution set is particular + span(kernel_basis); an
        inconsistent system yields particular = None (with the kernel basis
        of A still returned).  len(kernel_basis) = N - rank(A).
        """
        A = np.asarray(A, dtype=np.int64)
        y = np.asarray(y, dtype=np.int64)
        if A.ndim != 2 or y.ndim != 1 or A.shape[0] != y.shape[0]:
            raise FieldError(f"dimension mismatch: A is {A.shape}, y is {y.shape}")
        n = A.shape[1]
        aug = np.concatenate([A, y[:, None]], axis=1) if A.shape[0] else np.zeros((0, n + 1), dtype=np.int64)
        rank, R, pivots = self.row_reduce(aug)
        consistent = n not in pivots
        a_pivots = [c for c in pivots if c < n]
        free_cols = [c for c in range(n) if c not in a_pivots]
        basis = []
        for f in free_cols:
            v = np.zeros(n, dtype=np.int64)
            v[f] = 1
            for i, c in enumerate(a_pivots):
                v[c] = self.neg(int(R[i, f]))
            basis.append(v)
        if not consistent:
            return None, basis
        particular = np.zeros(n, dtype=np.int64)
        for i, c in enumerate(a_pivots):
            particular[c] = R[i, n]
        return particular, basis

    def kernel_iter(self, particular, kernel_basis):
        """Yield the full affine set particular + span(kernel_basis).

        Exactly q^len(kernel_basis) distinct vectors, in lexicographic order
        of the basis coefficient tuples (last coefficient varies fastest).
        """
        particular = np.asarray(particular, dtype=np.int64)
        basis = [np.asarray(b, dtype=np.int64) for b in kernel_basis]
        if not basis:
            yield particular.copy()
            return
        for coeffs in itertools.product(range(self.q), repeat=len(basis)):
            z = particular
            for c, b in zip(coeffs, basis):
                if c:
                    z = self.add_arr(z, self.scale_arr(c, b))
            yield np.array(z, dtype=np.int64, copy=True)

    def affine_batches(self, particular, kernel_basis, batch_size=4096):
        """Batched counterpart of kernel_iter: yields (B, N) blocks, same order."""
        particular = np.asarray(particular, dtype=np.int64)
        k = len(kernel_basis)
        total = self.q ** k
        if k == 0:
            yield particular[None, :]
            return
        B = np.stack([np.asarray(b, dtype=np.int64) for b in kernel_basis])
        for start in range(0, total, batch_size):
            idx = np.arange(start, min(start + batch_size, total), dtype=np.int64)
            C = index_to_digits(idx, self.q, k)
            Z = np.broadcast_to(particular, (idx.size, particular.size)).copy()
            if self.is_prime_field:
                Z = (Z + C @ B) % self.q
            else:
                for j in range(k):
                    Z = np.bitwise_xor(Z, self.mul_arr(C[:, j:j + 1], B[j][None, :]))
            yield Z

    def all_vector_batches(self, n: int, batch_size=4096):
        """All of GF(q)^n in lexicographic order, as (B, n) blocks."""
        total = self.q ** n
        for start in range(0, total, batch_size):
            idx = np.arange(start, min(start + batch_size, total), dtype=np.int64)
            yield index_to_digits(idx, self.q, n)


def index_to_digits(idx: np.ndarray, q: int, width: int) -> np.ndarray:
    """Base-q digits of each index, most significant digit first.

    Row i of the result is the i-th vector of GF(q)^width in lexicographic
    order when idx is an increasing range.
    """
    idx = np.asarray(idx, dtype=np.int64)
    out = np.zeros((idx.size, width), dtype=np.int64)
    rem = idx.copy()
    for j in range(width - 1, -1, -1):
        out[:, j] = rem % q
        rem //= q
    return out


def digits_to_index(vecs: np.ndarray, q: int) -> np.ndarray:
    """Inverse of index_to_digits for a (B, width) block."""
    vecs = np.asarray(vecs, dtype=np.int64)
    powers = q ** np.arange(vecs.shape[1] - 1, -1, -1, dtype=np.int64)
    return vecs @ powers
