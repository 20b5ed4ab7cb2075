"""Field arithmetic and linear algebra over GF(q)."""

import itertools

import numpy as np
import pytest

from ffcs.gf import (GF, FieldError, _is_prime, digits_to_index,
                     index_to_digits)

SUPPORTED_SMALL = [q for q in range(2, 257) if _is_prime(q) or (q & (q - 1)) == 0]


@pytest.mark.parametrize("q", SUPPORTED_SMALL)
def test_field_axioms_exhaustive(q):
    """Associativity, commutativity, distributivity, identities, inverses
    checked over every element (triple) of the field."""
    f = GF(q)
    e = np.arange(q, dtype=np.int64)
    A, B = np.meshgrid(e, e, indexing="ij")
    assert np.array_equal(f.add_arr(A, B), f.add_arr(A, B).T)
    assert np.array_equal(f.mul_arr(A, B), f.mul_arr(A, B).T)
    assert np.array_equal(f.add_arr(e, 0), e)
    assert np.array_equal(f.mul_arr(e, 1), e)
    assert np.array_equal(f.mul_arr(e, 0), np.zeros(q, dtype=np.int64))
    invs = np.array([f.inv(a) for a in range(1, q)], dtype=np.int64)
    assert np.all(f.mul_arr(e[1:], invs) == 1)
    assert np.all(f.add_arr(e, f.neg_arr(e)) == 0)
    b, c = e[None, :, None], e[None, None, :]
    for s in range(0, q, 32):
        a = e[s : s + 32, None, None]
        assert np.array_equal(f.add_arr(f.add_arr(a, b), c), f.add_arr(a, f.add_arr(b, c)))
        assert np.array_equal(f.mul_arr(f.mul_arr(a, b), c), f.mul_arr(a, f.mul_arr(b, c)))
        assert np.array_equal(f.mul_arr(a, f.add_arr(b, c)),
                              f.add_arr(f.mul_arr(a, b), f.mul_arr(a, c)))


def test_gf2_characteristic():
    assert GF(2).add(1, 1) == 0


def test_gf4_polynomial_multiplication():
    # encoding {0, 1, 2=x, 3=x+1} modulo x^2+x+1: x*x = x+1
    assert GF(4).mul(2, 2) == 3


def test_gf4_inverse_matches_exhaustive_search():
    f = GF(4)
    for a in range(1, 4):
        brute = next(b for b in range(1, 4) if f.mul(a, b) == 1)
        assert f.inv(a) == brute
    assert f.inv(2) == 3


def test_gf5_scalar_ops():
    f = GF(5)
    assert f.add(3, 4) == 2
    assert f.inv(2) == 3


@pytest.mark.parametrize("q", [6, 10, 12, 100, 2**16 + 1, 3**5])
def test_unsupported_sizes_rejected(q):
    with pytest.raises(FieldError):
        GF(q)


def test_large_supported_sizes():
    assert GF(1 << 16).q == 65536
    assert GF(65521).is_prime_field  # largest prime below 2^16


def test_inv_zero_errors():
    with pytest.raises(ZeroDivisionError):
        GF(7).inv(0)


def test_matvec_identity():
    f = GF(7)
    x = np.array([3, 0, 6], dtype=np.int64)
    assert np.array_equal(f.matvec(np.eye(3, dtype=np.int64), x), x)


def test_matvec_gf2_xor():
    f = GF(2)
    A = np.array([[1, 1], [0, 1]], dtype=np.int64)
    assert np.array_equal(f.matvec(A, np.array([1, 1])), np.array([0, 1]))


def test_matvec_gf3_example():
    assert np.array_equal(GF(3).matvec(np.array([[1, 2]]), np.array([2, 2])),
                          np.array([0]))


def test_matvec_dimension_mismatch():
    with pytest.raises(FieldError):
        GF(3).matvec(np.zeros((2, 3), dtype=np.int64), np.zeros(2, dtype=np.int64))


def test_matvec_many_matches_single():
    f = GF(8)
    rng = np.random.Generator(np.random.PCG64(5))
    A = rng.integers(0, 8, size=(4, 6))
    X = rng.integers(0, 8, size=(10, 6))
    batched = f.matvec_many(A, X)
    for i in range(10):
        assert np.array_equal(batched[i], f.matvec(A, X[i]))


def _minor_rank(f, A):
    """Independent rank oracle: largest k with a nonsingular k x k submatrix,
    determinants by Laplace expansion in field arithmetic."""

    def det(rows, cols):
        if len(rows) == 1:
            return int(A[rows[0], cols[0]])
        total = 0
        for j, c in enumerate(cols):
            minor = det(rows[1:], cols[:j] + cols[j + 1 :])
            term = f.mul(int(A[rows[0], c]), minor)
            total = f.add(total, term) if j % 2 == 0 else f.sub(total, term)
        return total

    m, n = A.shape
    for k in range(min(m, n), 0, -1):
        for rows in itertools.combinations(range(m), k):
            for cols in itertools.combinations(range(n), k):
                if det(list(rows), list(cols)) != 0:
                    return k
    return 0


def test_row_reduce_identity():
    f = GF(5)
    rank, rref, pivots = f.row_reduce(np.eye(4, dtype=np.int64))
    assert rank == 4 and pivots == [0, 1, 2, 3]
    assert np.array_equal(rref, np.eye(4, dtype=np.int64))


def test_row_reduce_duplicate_rows():
    rank, _, _ = GF(2).row_reduce(np.array([[1, 1], [1, 1]]))
    assert rank == 1


@pytest.mark.parametrize("seed", range(6))
def test_row_reduce_rank_matches_minor_oracle(seed):
    f = GF(3)
    rng = np.random.Generator(np.random.PCG64(seed))
    A = rng.integers(0, 3, size=(5, 8))
    rank, rref, pivots = f.row_reduce(A)
    assert rank == _minor_rank(f, A)
    # rref structure: pivot columns are unit vectors
    for i, c in enumerate(pivots):
        col = rref[:, c]
        assert col[i] == 1 and np.count_nonzero(col) == 1


def test_solve_affine_identity():
    f = GF(7)
    y = np.array([2, 5, 0], dtype=np.int64)
    particular, basis = f.solve_affine(np.eye(3, dtype=np.int64), y)
    assert np.array_equal(particular, y) and basis == []


def test_solve_affine_solution_set_gf2():
    f = GF(2)
    particular, basis = f.solve_affine(np.array([[1, 1]]), np.array([0]))
    got = {tuple(z) for z in f.kernel_iter(particular, basis)}
    # oracle: exhaustive enumeration of GF(2)^2
    want = {tuple(v) for v in itertools.product(range(2), repeat=2)
            if (v[0] + v[1]) % 2 == 0}
    assert got == want == {(0, 0), (1, 1)}


def test_solve_affine_inconsistent():
    f = GF(2)
    particular, basis = f.solve_affine(np.array([[1, 1], [1, 1]]), np.array([0, 1]))
    assert particular is None
    assert len(basis) == 1


@pytest.mark.parametrize("q,shape,seed", [(2, (3, 5), 0), (3, (4, 4), 1),
                                          (4, (2, 4), 2), (5, (5, 3), 3)])
def test_rank_nullity_and_solution_membership(q, shape, seed):
    f = GF(q)
    rng = np.random.Generator(np.random.PCG64(seed))
    A = rng.integers(0, q, size=shape)
    x = rng.integers(0, q, size=shape[1])
    y = f.matvec(A, x)
    rank, _, _ = f.row_reduce(A)
    particular, basis = f.solve_affine(A, y)
    assert rank + len(basis) == shape[1]
    assert particular is not None
    sols = [z for z in f.kernel_iter(particular, basis)]
    assert len(sols) == q ** len(basis)
    assert len({tuple(z) for z in sols}) == len(sols)  # no duplicates
    for z in sols:
        assert np.array_equal(f.matvec(A, z), y)
    assert tuple(x) in {tuple(z) for z in sols}


def test_kernel_iter_empty_basis():
    f = GF(3)
    p = np.array([1, 2], dtype=np.int64)
    out = list(f.kernel_iter(p, []))
    assert len(out) == 1 and np.array_equal(out[0], p)


def test_kernel_iter_count_gf2():
    f = GF(2)
    basis = [np.array([1, 0, 1]), np.array([0, 1, 1])]
    out = {tuple(z) for z in f.kernel_iter(np.zeros(3, dtype=np.int64), basis)}
    assert len(out) == 4


def test_kernel_iter_gf3_all_satisfy():
    f = GF(3)
    A = np.array([[1, 1, 2]])
    y = np.array([1])
    particular, basis = f.solve_affine(A, y)
    assert len(basis) == 2
    vecs = list(f.kernel_iter(particular, basis))
    assert len(vecs) == 9
    for z in vecs:
        assert np.array_equal(f.matvec(A, z), y)


def test_affine_batches_match_kernel_iter_order():
    f = GF(3)
    particular = np.array([1, 0, 2, 0], dtype=np.int64)
    basis = [np.array([1, 1, 0, 0]), np.array([0, 0, 1, 2])]
    serial = np.array(list(f.kernel_iter(particular, basis)))
    batched = np.concatenate(list(f.affine_batches(particular, basis, batch_size=4)))
    assert np.array_equal(serial, batched)


def test_all_vector_batches_lexicographic():
    f = GF(3)
    got = np.concatenate(list(f.all_vector_batches(2, batch_size=4)))
    want = np.array(list(itertools.product(range(3), repeat=2)))
    assert np.array_equal(got, want)


def test_digit_round_trip():
    idx = np.arange(125)
    digits = index_to_digits(idx, 5, 3)
    assert np.array_equal(digits_to_index(digits, 5), idx)
