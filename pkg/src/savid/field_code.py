"""Prime-field arithmetic and the Reed-Solomon (n, k) code used row-wise
over data matrices.

The field is the scalar field of BLS12-381 (255-bit prime, 2-adicity 32),
so erasure coding and the vector commitments share one coefficient field
and FFTs are available for every power-of-two domain up to 2^32.

Field elements are plain Python ints in canonical reduced form; all
functions here are pure.
"""

from __future__ import annotations

from typing import Iterable, Sequence

# Scalar field modulus of BLS12-381.
MODULUS = 0x73EDA753299D7D483339D80809A1D80553BDA402FFFE5BFEFFFFFFFF00000001

# Multiplicative generator and 2-adicity of MODULUS - 1.
GENERATOR = 7
TWO_ADICITY = 32

# Primitive 2^32-th root of unity.
_ROOT_2_32 = pow(GENERATOR, (MODULUS - 1) >> TWO_ADICITY, MODULUS)

ELEMENT_BYTES = 32


def fr_to_bytes(x: int) -> bytes:
    """Serialize a canonical field element to 32 bytes little-endian."""
    if not 0 <= x < MODULUS:
        raise ValueError("field element out of range")
    return x.to_bytes(ELEMENT_BYTES, "little")


def fr_from_bytes(b: bytes) -> int:
    """Parse a 32-byte little-endian field element; rejects non-canonical
    encodings (values >= MODULUS)."""
    if len(b) != ELEMENT_BYTES:
        raise ValueError("field element must be exactly 32 bytes")
    x = int.from_bytes(b, "little")
    if x >= MODULUS:
        raise ValueError("non-canonical field element encoding")
    return x


def inv(a: int) -> int:
    """Multiplicative inverse mod MODULUS."""
    if a % MODULUS == 0:
        raise ZeroDivisionError("cannot invert zero")
    return pow(a, MODULUS - 2, MODULUS)


def batch_inverse(vals: Sequence[int]) -> list[int]:
    """Montgomery's trick: n inverses for one inversion + 3(n-1) mults."""
    n = len(vals)
    if n == 0:
        return []
    p = MODULUS
    prefix = [0] * n
    acc = 1
    for i, v in enumerate(vals):
        if v % p == 0:
            raise ZeroDivisionError("cannot invert zero")
        acc = acc * v % p
        prefix[i] = acc
    acc = pow(acc, p - 2, p)
    out = [0] * n
    for i in range(n - 1, 0, -1):
        out[i] = acc * prefix[i - 1] % p
        acc = acc * vals[i] % p
    out[0] = acc
    return out


def next_pow2(x: int) -> int:
    return 1 << max(0, (x - 1).bit_length())


def domain_root(size: int) -> int:
    """Primitive size-th root of unity; size must be a power of two <= 2^32."""
    if size < 1 or size & (size - 1):
        raise ValueError("domain size must be a power of two")
    s = size.bit_length() - 1
    if s > TWO_ADICITY:
        raise ValueError("domain size exceeds the field's 2-adicity")
    root = _ROOT_2_32
    for _ in range(TWO_ADICITY - s):
        root = root * root % MODULUS
    return root


# ---------------------------------------------------------------------------
# FFT over the scalar field
# ---------------------------------------------------------------------------

# size -> per-stage twiddle tables for the iterative radix-2 transform
_TWIDDLE_CACHE: dict[tuple[int, bool], list[list[int]]] = {}
_BITREV_CACHE: dict[int, list[int]] = {}


def _bit_reverse_perm(size: int) -> list[int]:
    perm = _BITREV_CACHE.get(size)
    if perm is None:
        bits = size.bit_length() - 1
        perm = [0] * size
        for i in range(size):
            perm[i] = int(format(i, f"0{bits}b")[::-1], 2) if bits else 0
        _BITREV_CACHE[size] = perm
    return perm


def _twiddles(size: int, inverse: bool) -> list[list[int]]:
    key = (size, inverse)
    tw = _TWIDDLE_CACHE.get(key)
    if tw is None:
        p = MODULUS
        root = domain_root(size)
        if inverse:
            root = pow(root, p - 2, p)
        tw = []
        length = 2
        while length <= size:
            w = pow(root, size // length, p)
            row = [1] * (length // 2)
            for j in range(1, length // 2):
                row[j] = row[j - 1] * w % p
            tw.append(row)
            length <<= 1
        _TWIDDLE_CACHE[key] = tw
    return tw


def _fft_core(vals: list[int], size: int, inverse: bool) -> list[int]:
    p = MODULUS
    perm = _bit_reverse_perm(size)
    a = [vals[perm[i]] for i in range(size)]
    for row in _twiddles(size, inverse):
        half = len(row)
        length = half * 2
        for start in range(0, size, length):
            for j in range(half):
                i0 = start + j
                i1 = i0 + half
                t = a[i1] * row[j] % p
                u = a[i0]
                a[i0] = (u + t) % p
                a[i1] = (u - t) % p
    if inverse:
        n_inv = pow(size, p - 2, p)
        a = [x * n_inv % p for x in a]
    return a


def fft(coeffs: Sequence[int], size: int) -> list[int]:
    """Evaluate the polynomial with the given coefficients at all size-th
    roots of unity (natural order: output[i] = P(omega^i)). Coefficients are
    zero-padded to size; len(coeffs) must not exceed size."""
    if len(coeffs) > size:
        raise ValueError("too many coefficients for domain size")
    if size == 1:
        return [coeffs[0] % MODULUS if coeffs else 0]
    vals = list(coeffs) + [0] * (size - len(coeffs))
    return _fft_core(vals, size, inverse=False)


def ifft(evals: Sequence[int]) -> list[int]:
    """Inverse transform: coefficients of the unique polynomial of degree
    < size with the given evaluations on the size-th roots of unity."""
    size = len(evals)
    if size == 1:
        return [evals[0] % MODULUS]
    if size & (size - 1):
        raise ValueError("evaluation vector length must be a power of two")
    return _fft_core(list(evals), size, inverse=True)


def coset_fft(coeffs: Sequence[int], size: int, shift: int = GENERATOR) -> list[int]:
    """Evaluate at the coset shift * omega^i (shift must avoid the domain)."""
    p = MODULUS
    scaled = []
    s = 1
    for c in coeffs:
        scaled.append(c * s % p)
        s = s * shift % p
    return fft(scaled, size)


def coset_ifft(evals: Sequence[int], shift: int = GENERATOR) -> list[int]:
    p = MODULUS
    coeffs = ifft(evals)
    s_inv = pow(shift, p - 2, p)
    s = 1
    out = []
    for c in coeffs:
        out.append(c * s % p)
        s = s * s_inv % p
    return out


def eval_poly(coeffs: Sequence[int], x: int) -> int:
    """Horner evaluation."""
    p = MODULUS
    acc = 0
    for c in reversed(coeffs):
        acc = (acc * x + c) % p
    return acc


# ---------------------------------------------------------------------------
# Interpolation through a prefix of a power-of-two domain
# ---------------------------------------------------------------------------
#
# Vectors of length m are mapped to the unique degree-(m-1) polynomial
# through the FIRST m points of the size-D domain (m <= D). For m = D this
# is a plain inverse FFT. For m < D the first m points are not themselves
# a subgroup, so we use the erasure-decoding identity: with Z_c(X) =
# prod_{i<m}(X - w^i) and Z(X) = (X^D - 1)/Z_c(X) vanishing on the unused
# positions, E(X) = U(X) * Z(X) has degree < D and is fully determined by
# the known evaluations; dividing E by Z on a multiplicative coset recovers
# U's coefficients in O(D log D) per call after a cached O(m^2) setup.

_PREFIX_CACHE: dict[tuple[int, int], tuple[list[int], list[int]]] = {}


def _prefix_tables(size: int, m: int) -> tuple[list[int], list[int]]:
    key = (size, m)
    cached = _PREFIX_CACHE.get(key)
    if cached is not None:
        return cached
    p = MODULUS
    root = domain_root(size)
    # Z_c(X) = prod_{i<m} (X - w^i), built iteratively.
    zc = [1]
    w = 1
    for _ in range(m):
        nxt = [0] * (len(zc) + 1)
        for j, c in enumerate(zc):
            nxt[j + 1] = (nxt[j + 1] + c) % p
            nxt[j] = (nxt[j] - c * w) % p
        zc = nxt
        w = w * root % p
    # A_i = Z(w^i) for i < m, via L'Hopital on (X^D - 1)/Z_c:
    # Z(w^i) = D * w^{-i} / Z_c'(w^i).
    zc_prime = [zc[j] * j % p for j in range(1, len(zc))]
    zc_prime_evals = fft(zc_prime, size)
    w_inv = pow(root, p - 2, p)
    denoms = batch_inverse([zc_prime_evals[i] for i in range(m)])
    vanishing = []
    wi = size % p
    for i in range(m):
        vanishing.append(wi * denoms[i] % p)
        wi = wi * w_inv % p
    # On the coset g*w^i: Z(g w^i) = (g^D - 1)/Z_c(g w^i); fold the constant
    # into a per-point multiplier  U(g w^i) = E(g w^i) * mult[i].
    zc_coset = coset_fft(zc, size)
    gd = (pow(GENERATOR, size, p) - 1) % p
    gd_inv = pow(gd, p - 2, p)
    mult = [zc_coset[i] * gd_inv % p for i in range(size)]
    tables = (vanishing, mult)
    _PREFIX_CACHE[key] = tables
    return tables


def interpolate_prefix(values: Sequence[int], size: int) -> list[int]:
    """Coefficients of the unique degree-(m-1) polynomial taking the given
    m values on the first m points (omega^0, ..., omega^{m-1}) of the
    size-D roots-of-unity domain."""
    m = len(values)
    if m == 0:
        raise ValueError("cannot interpolate an empty vector")
    if m > size:
        raise ValueError("vector longer than the evaluation domain")
    if m == 1:
        return [values[0] % MODULUS]
    if m == size:
        return ifft(values)
    p = MODULUS
    vanishing, mult = _prefix_tables(size, m)
    e_evals = [values[i] * vanishing[i] % p for i in range(m)] + [0] * (size - m)
    e_coeffs = ifft(e_evals)
    e_coset = coset_fft(e_coeffs, size)
    u_coset = [e_coset[i] * mult[i] % p for i in range(size)]
    u_coeffs = coset_ifft(u_coset)
    # Degree bound is structural; a nonzero high coefficient would mean a bug.
    assert all(c == 0 for c in u_coeffs[m:]), "prefix interpolation degree overflow"
    return u_coeffs[:m]


def domain_point(size: int, i: int) -> int:
    """The i-th point omega^i of the size-D domain."""
    return pow(domain_root(size), i, MODULUS)


# ---------------------------------------------------------------------------
# Reed-Solomon (n, k) code
# ---------------------------------------------------------------------------


class CodeParams:
    """An (n, k) Reed-Solomon code over the scalar field: codeword position
    i holds the evaluation of the degree-(k-1) info polynomial at alphas[i].

    The standard construction (`CodeParams.make`) uses alphas[i] = omega^i
    for a primitive 2^s-th root of unity with 2^s >= n, which enables FFT
    encoding. Arbitrary distinct nonzero alphas are also accepted; encoding
    then falls back to direct evaluation.
    """

    __slots__ = ("n", "k", "alphas", "domain_size", "_alpha_index")

    def __init__(self, n: int, k: int, alphas: Sequence[int]):
        if not 1 <= k <= n:
            raise ValueError("need 1 <= k <= n")
        if len(alphas) != n:
            raise ValueError("need exactly n evaluation points")
        alphas = [a % MODULUS for a in alphas]
        if len(set(alphas)) != n:
            raise ValueError("evaluation points must be pairwise distinct")
        if any(a == 0 for a in alphas):
            raise ValueError("evaluation points must be nonzero")
        self.n = n
        self.k = k
        self.alphas = alphas
        self._alpha_index = None
        # FFT fast path applies when alphas are the first n powers of the
        # canonical root of the smallest sufficient power-of-two domain.
        size = next_pow2(n)
        self.domain_size = 0
        try:
            root = domain_root(size)
        except ValueError:
            return
        w = 1
        for a in alphas:
            if a != w:
                return
            w = w * root % MODULUS
        self.domain_size = size

    @classmethod
    def make(cls, n: int, k: int) -> "CodeParams":
        """Standard parameters: alphas = successive powers of a 2^s-th root
        of unity, 2^s >= n."""
        size = next_pow2(n)
        root = domain_root(size)
        alphas = []
        w = 1
        for _ in range(n):
            alphas.append(w)
            w = w * root % MODULUS
        return cls(n, k, alphas)

    def generator_column(self, i: int) -> list[int]:
        """Column g_i = (alpha_i^0, ..., alpha_i^{k-1}) of the generator
        matrix; i is 1-based."""
        if not 1 <= i <= self.n:
            raise ValueError("index out of range")
        a = self.alphas[i - 1]
        col = [1] * self.k
        for j in range(1, self.k):
            col[j] = col[j - 1] * a % MODULUS
        return col

    def __repr__(self) -> str:
        return f"CodeParams(n={self.n}, k={self.k})"


def encode(params: CodeParams, info: Sequence[int]) -> list[int]:
    """Encode a k-element info vector to an n-element codeword:
    output[i] = sum_j info[j] * alphas[i]^j."""
    if len(info) != params.k:
        raise ValueError("info vector length must equal k")
    if params.domain_size:
        return fft(info, params.domain_size)[: params.n]
    return [eval_poly(info, a) for a in params.alphas]


def _check_share_indices(params: CodeParams, indices: Sequence[int]) -> None:
    if len(indices) != params.k:
        raise ValueError("need exactly k shares")
    if len(set(indices)) != len(indices):
        raise ValueError("duplicate share indices")
    for i in indices:
        if not 1 <= i <= params.n:
            raise ValueError("share index out of range")


def invert_submatrix(params: CodeParams, indices: Sequence[int]) -> list[list[int]]:
    """Inverse of the k x k generator submatrix G~ whose columns are the
    generator columns at the given 1-based indices. Always invertible
    (Vandermonde with distinct alphas)."""
    _check_share_indices(params, indices)
    p = MODULUS
    k = params.k
    # G~[j][m] = alphas[indices[m]]^j  (row = power, column = share)
    rows = []
    for j in range(k):
        rows.append([pow(params.alphas[i - 1], j, p) for i in indices])
    # Gauss-Jordan on [G~ | I]; pivot on the first nonzero entry.
    aug = [rows[j] + [1 if m == j else 0 for m in range(k)] for j, _ in enumerate(rows)]
    for col in range(k):
        piv = next(r for r in range(col, k) if aug[r][col] != 0)
        if piv != col:
            aug[col], aug[piv] = aug[piv], aug[col]
        inv_p = pow(aug[col][col], p - 2, p)
        aug[col] = [x * inv_p % p for x in aug[col]]
        for r in range(k):
            if r != col and aug[r][col]:
                f = aug[r][col]
                arow = aug[r]
                prow = aug[col]
                for c in range(col, 2 * k):
                    arow[c] = (arow[c] - f * prow[c]) % p
    return [row[k:] for row in aug]


def decode(params: CodeParams, shares: Iterable[tuple[int, int]]) -> list[int]:
    """Recover the info vector from k (index, symbol) pairs with distinct
    1-based indices: info = c~ . G~^{-1}."""
    shares = list(shares)
    indices = [i for i, _ in shares]
    symbols = [c % MODULUS for _, c in shares]
    g_inv = invert_submatrix(params, indices)
    p = MODULUS
    k = params.k
    out = []
    for j in range(k):
        acc = 0
        for m in range(k):
            acc += symbols[m] * g_inv[m][j]
        out.append(acc % p)
    return out


def decode_matrix(
    params: CodeParams, indices: Sequence[int], columns: Sequence[Sequence[int]]
) -> list[list[int]]:
    """Batch decode: given k coded columns (each of length L) at distinct
    1-based indices, return the k info columns. One submatrix inversion
    amortizes over all L rows."""
    if len(columns) != params.k:
        raise ValueError("need exactly k columns")
    lengths = {len(c) for c in columns}
    if len(lengths) != 1:
        raise ValueError("columns must share one length")
    (L,) = lengths
    g_inv = invert_submatrix(params, indices)
    p = MODULUS
    k = params.k
    out = [[0] * L for _ in range(k)]
    for r in range(L):
        row = [columns[m][r] for m in range(k)]
        for j in range(k):
            acc = 0
            for m in range(k):
                acc += row[m] * g_inv[m][j]
            out[j][r] = acc % p
    return out
