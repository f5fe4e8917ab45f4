import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from savid import field_code as fc

P = fc.MODULUS

felt = st.integers(min_value=0, max_value=P - 1)


def naive_eval_all(coeffs, points):
    return [fc.eval_poly(coeffs, x) for x in points]


# --- serialization -----------------------------------------------------------


def test_fr_bytes_roundtrip():
    rng = random.Random(0)
    for _ in range(50):
        x = rng.randrange(P)
        b = fc.fr_to_bytes(x)
        assert len(b) == 32
        assert fc.fr_from_bytes(b) == x


def test_fr_bytes_rejects_noncanonical():
    with pytest.raises(ValueError):
        fc.fr_from_bytes(P.to_bytes(32, "little"))
    with pytest.raises(ValueError):
        fc.fr_from_bytes((2**256 - 1).to_bytes(32, "little"))
    with pytest.raises(ValueError):
        fc.fr_from_bytes(b"\x00" * 31)
    # boundary: p-1 is canonical
    assert fc.fr_from_bytes((P - 1).to_bytes(32, "little")) == P - 1


def test_fr_to_bytes_rejects_out_of_range():
    with pytest.raises(ValueError):
        fc.fr_to_bytes(P)
    with pytest.raises(ValueError):
        fc.fr_to_bytes(-1)


# --- inverses ----------------------------------------------------------------


@given(st.integers(min_value=1, max_value=P - 1))
def test_inv(a):
    assert a * fc.inv(a) % P == 1


def test_inv_zero_raises():
    with pytest.raises(ZeroDivisionError):
        fc.inv(0)


def test_batch_inverse_matches_inv():
    rng = random.Random(1)
    vals = [rng.randrange(1, P) for _ in range(37)]
    assert fc.batch_inverse(vals) == [fc.inv(v) for v in vals]
    assert fc.batch_inverse([]) == []
    with pytest.raises(ZeroDivisionError):
        fc.batch_inverse([1, 0, 2])


# --- FFT ---------------------------------------------------------------------


def test_domain_root_orders():
    for size in (1, 2, 8, 1024):
        w = fc.domain_root(size)
        assert pow(w, size, P) == 1
        if size > 1:
            assert pow(w, size // 2, P) != 1


def test_domain_root_rejects_bad_sizes():
    with pytest.raises(ValueError):
        fc.domain_root(3)
    with pytest.raises(ValueError):
        fc.domain_root(2**33)


def test_fft_matches_naive_horner():
    rng = random.Random(2)
    for size in (1, 2, 8, 32):
        coeffs = [rng.randrange(P) for _ in range(size)]
        points = [fc.domain_point(size, i) for i in range(size)]
        assert fc.fft(coeffs, size) == naive_eval_all(coeffs, points)


def test_fft_zero_pads_short_input():
    rng = random.Random(3)
    coeffs = [rng.randrange(P) for _ in range(5)]
    assert fc.fft(coeffs, 16) == fc.fft(coeffs + [0] * 11, 16)


def test_ifft_inverts_fft():
    rng = random.Random(4)
    for size in (1, 2, 4, 64):
        coeffs = [rng.randrange(P) for _ in range(size)]
        assert fc.ifft(fc.fft(coeffs, size)) == coeffs


def test_coset_fft_evaluates_on_shifted_domain():
    rng = random.Random(5)
    size = 16
    coeffs = [rng.randrange(P) for _ in range(size)]
    evals = fc.coset_fft(coeffs, size)
    for i in range(size):
        x = fc.GENERATOR * fc.domain_point(size, i) % P
        assert evals[i] == fc.eval_poly(coeffs, x)
    assert fc.coset_ifft(evals) == coeffs


@given(st.lists(felt, min_size=1, max_size=32))
@settings(max_examples=30, deadline=None)
def test_fft_roundtrip_property(coeffs):
    size = fc.next_pow2(len(coeffs))
    back = fc.ifft(fc.fft(coeffs, size))
    assert back[: len(coeffs)] == coeffs
    assert all(c == 0 for c in back[len(coeffs):])


# --- prefix interpolation ----------------------------------------------------


def test_interpolate_prefix_hits_values():
    rng = random.Random(6)
    size = 16
    for m in (1, 2, 3, 7, 15, 16):
        vals = [rng.randrange(P) for _ in range(m)]
        poly = fc.interpolate_prefix(vals, size)
        assert len(poly) == m
        for i in range(m):
            assert fc.eval_poly(poly, fc.domain_point(size, i)) == vals[i]


def test_interpolate_prefix_constant_vector():
    # a constant vector interpolates to the constant polynomial: the
    # degree-(m-1) polynomial equal to c at m distinct points is c itself
    assert fc.interpolate_prefix([42], 8) == [42]
    assert fc.interpolate_prefix([9, 9, 9], 8) == [9, 0, 0]
    assert fc.interpolate_prefix([9] * 8, 8) == [9] + [0] * 7


def test_interpolate_prefix_validates():
    with pytest.raises(ValueError):
        fc.interpolate_prefix([], 8)
    with pytest.raises(ValueError):
        fc.interpolate_prefix([1] * 9, 8)


def test_interpolate_prefix_matches_lagrange_oracle():
    # independent O(m^2) Lagrange interpolation over the same points
    rng = random.Random(7)
    size, m = 8, 5
    vals = [rng.randrange(P) for _ in range(m)]
    xs = [fc.domain_point(size, i) for i in range(m)]
    poly = fc.interpolate_prefix(vals, size)
    for _ in range(10):
        x = rng.randrange(P)
        acc = 0
        for i in range(m):
            num, den = vals[i], 1
            for j in range(m):
                if j != i:
                    num = num * (x - xs[j]) % P
                    den = den * (xs[i] - xs[j]) % P
            acc = (acc + num * fc.inv(den)) % P
        assert fc.eval_poly(poly, x) == acc


# --- Reed-Solomon code -------------------------------------------------------


def small_params():
    # alphas (1,2,3), k=2: classic toy code
    return fc.CodeParams(3, 2, [1, 2, 3])


def test_encode_toy_example():
    # U(X) = 3 + 4X at 1, 2, 3
    assert fc.encode(small_params(), [3, 4]) == [7, 11, 15]


def test_encode_zero_vector():
    cp = fc.CodeParams.make(8, 3)
    assert fc.encode(cp, [0, 0, 0]) == [0] * 8


def test_encode_fft_path_matches_naive():
    rng = random.Random(8)
    for n, k in ((8, 3), (64, 22), (256, 86)):
        cp = fc.CodeParams.make(n, k)
        assert cp.domain_size  # fast path engaged
        for _ in range(5):
            info = [rng.randrange(P) for _ in range(k)]
            naive = [fc.eval_poly(info, a) for a in cp.alphas]
            assert fc.encode(cp, info) == naive


def test_encode_rejects_wrong_length():
    with pytest.raises(ValueError):
        fc.encode(small_params(), [1, 2, 3])


def test_decode_toy_example():
    assert fc.decode(small_params(), [(2, 11), (3, 15)]) == [3, 4]


def test_decode_full_codeword_roundtrip():
    cp = fc.CodeParams.make(4, 4)
    rng = random.Random(9)
    info = [rng.randrange(P) for _ in range(4)]
    cw = fc.encode(cp, info)
    assert fc.decode(cp, list(enumerate(cw, start=1))) == info


def test_decode_all_subsets():
    cp = fc.CodeParams.make(8, 3)
    rng = random.Random(10)
    info = [rng.randrange(P) for _ in range(3)]
    cw = fc.encode(cp, info)
    for idx in itertools.combinations(range(1, 9), 3):
        assert fc.decode(cp, [(i, cw[i - 1]) for i in idx]) == info


def test_decode_rejects_bad_shares():
    cp = fc.CodeParams.make(8, 3)
    with pytest.raises(ValueError):
        fc.decode(cp, [(1, 0), (1, 0), (2, 0)])
    with pytest.raises(ValueError):
        fc.decode(cp, [(0, 0), (1, 0), (2, 0)])
    with pytest.raises(ValueError):
        fc.decode(cp, [(1, 0), (2, 0)])


def test_invert_submatrix_toy():
    cp = fc.CodeParams(2, 2, [1, 2])
    inv = fc.invert_submatrix(cp, [1, 2])
    assert inv == [[2, P - 1], [P - 1, 1]]


def test_invert_submatrix_k1():
    cp = fc.CodeParams.make(4, 1)
    for i in range(1, 5):
        assert fc.invert_submatrix(cp, [i]) == [[1]]


def test_invert_submatrix_product_is_identity():
    cp = fc.CodeParams.make(8, 4)
    rng = random.Random(11)
    indices = sorted(rng.sample(range(1, 9), 4))
    g_inv = fc.invert_submatrix(cp, indices)
    cols = [cp.generator_column(i) for i in indices]
    # G~[j][m] = cols[m][j]
    for r in range(4):
        for c in range(4):
            acc = sum(cols[m][r] * g_inv[m][c] for m in range(4)) % P
            assert acc == (1 if r == c else 0)


def test_decode_matrix_matches_rowwise_decode():
    cp = fc.CodeParams.make(8, 3)
    rng = random.Random(12)
    L = 5
    rows = [[rng.randrange(P) for _ in range(3)] for _ in range(L)]
    coded = [fc.encode(cp, row) for row in rows]
    indices = [2, 5, 7]
    columns = [[coded[r][i - 1] for r in range(L)] for i in indices]
    got = fc.decode_matrix(cp, indices, columns)
    assert got == [[rows[r][j] for r in range(L)] for j in range(3)]


def test_generator_column_structure():
    cp = fc.CodeParams.make(8, 4)
    for i in range(1, 9):
        col = cp.generator_column(i)
        assert col[0] == 1
        for j in range(1, 4):
            assert col[j] == col[j - 1] * cp.alphas[i - 1] % P


def test_code_params_validation():
    with pytest.raises(ValueError):
        fc.CodeParams(3, 0, [1, 2, 3])
    with pytest.raises(ValueError):
        fc.CodeParams(3, 4, [1, 2, 3])
    with pytest.raises(ValueError):
        fc.CodeParams(3, 2, [1, 1, 2])
    with pytest.raises(ValueError):
        fc.CodeParams(3, 2, [0, 1, 2])
    with pytest.raises(ValueError):
        fc.CodeParams(3, 2, [1, 2])


@given(
    st.lists(felt, min_size=3, max_size=3),
    st.lists(felt, min_size=3, max_size=3),
    felt,
    felt,
)
@settings(max_examples=25, deadline=None)
def test_encode_linearity(u, v, a, b):
    cp = fc.CodeParams.make(8, 3)
    lhs = fc.encode(cp, [(a * x + b * y) % P for x, y in zip(u, v)])
    eu, ev = fc.encode(cp, u), fc.encode(cp, v)
    rhs = [(a * x + b * y) % P for x, y in zip(eu, ev)]
    assert lhs == rhs


@given(st.lists(felt, min_size=4, max_size=4), st.integers(0, 10**9))
@settings(max_examples=25, deadline=None)
def test_decode_any_positions_roundtrip(info, pick_seed):
    cp = fc.CodeParams.make(8, 4)
    cw = fc.encode(cp, info)
    rng = random.Random(pick_seed)
    idx = rng.sample(range(1, 9), 4)
    assert fc.decode(cp, [(i, cw[i - 1]) for i in idx]) == info
