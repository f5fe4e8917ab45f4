"""Self-contained BLS12-381 arithmetic: base/extension fields, G1/G2 group
law, multi-exponentiation, serialization in the standard compressed format,
and the optimal ate pairing with precomputable second arguments.

No pairing library is available in this environment, so the curve is
implemented directly on gmpy2 integers. Conventions follow the common
tower Fp2 = Fp[u]/(u^2+1), Fp6 = Fp2[v]/(v^3 - (u+1)),
Fp12 = Fp6[w]/(w^2 - v); G2 lives on the sextic twist
y^2 = x^3 + 4(u+1), which for this curve is of multiplicative type.

Points cross the public API in affine form: G1 as (x, y) mpz pairs or None
for infinity, G2 as ((x0,x1), (y0,y1)) pairs of Fp2 tuples or None.
"""

from __future__ import annotations

from gmpy2 import mpz, invert

# Base field and scalar field moduli.
P = mpz(0x1A0111EA397FE69A4B1BA7B6434BACD764774B84F38512BF6730D2A0F6B0F6241EABFFFEB153FFFFB9FEFFFFFFFFAAAB)
R = mpz(0x73EDA753299D7D483339D80809A1D80553BDA402FFFE5BFEFFFFFFFF00000001)

B_COEFF = mpz(4)  # G1: y^2 = x^3 + 4

# Curve parameter x (negative); |x| drives the Miller loop and final exp.
X_ABS = 0xD201000000010000

# Standard generators.
G1_GEN = (
    mpz(0x17F1D3A73197D7942695638C4FA9AC0FC3688C4F9774B905A14E3A3F171BAC586C55E83FF97A1AEFFB3AF00ADB22C6BB),
    mpz(0x08B3F481E3AAA0F1A09E30ED741D8AE4FCF5E095D5D00AF600DB18CB2C04B3EDD03CC744A2888AE40CAA232946C5E7E1),
)
G2_GEN = (
    (
        mpz(0x024AA2B2F08F0A91260805272DC51051C6E47AD4FA403B02B4510B647AE3D1770BAC0326A805BBEFD48056C8C121BDB8),
        mpz(0x13E02B6052719F607DACD3A088274F65596BD0D09920B61AB5DA61BBDC7F5049334CF11213945D57E5AC7D055D042B7E),
    ),
    (
        mpz(0x0CE5D527727D6E118CC9CDC6DA2E351AADFD9BAA8CBDD3A76D429A695160D12C923AC9CC3BACA289E193548608B82801),
        mpz(0x0606C4A02EA734CC32ACD2B02BC28B99CB3E287E85A763AF267492AB572E99AB3F370D275CEC1DA1AAA9075FF05F79BE),
    ),
)

_HALF_P = (P - 1) >> 1  # sign threshold for compressed encodings


class PointDecodeError(ValueError):
    """Raised when compressed point bytes cannot be decoded to a valid
    subgroup element."""


# ---------------------------------------------------------------------------
# Fp2 arithmetic: (a, b) represents a + b*u with u^2 = -1
# ---------------------------------------------------------------------------

F2_ZERO = (mpz(0), mpz(0))
F2_ONE = (mpz(1), mpz(0))
XI = (mpz(1), mpz(1))  # the sextic non-residue u + 1


def f2_add(x, y):
    return ((x[0] + y[0]) % P, (x[1] + y[1]) % P)


def f2_sub(x, y):
    return ((x[0] - y[0]) % P, (x[1] - y[1]) % P)


def f2_neg(x):
    return (-x[0] % P, -x[1] % P)


def f2_conj(x):
    return (x[0], -x[1] % P)


def f2_mul(x, y):
    a0, b0 = x
    a1, b1 = y
    t0 = a0 * a1
    t1 = b0 * b1
    t2 = (a0 + b0) * (a1 + b1)
    return ((t0 - t1) % P, (t2 - t0 - t1) % P)


def f2_sq(x):
    a, b = x
    return ((a + b) * (a - b) % P, (a * b << 1) % P)


def f2_scale(x, c):
    return (x[0] * c % P, x[1] * c % P)


def f2_mul_xi(x):
    # (a + bu)(1 + u) = (a - b) + (a + b)u
    a, b = x
    return ((a - b) % P, (a + b) % P)


def f2_inv(x):
    a, b = x
    d = (a * a + b * b) % P
    di = invert(d, P)
    return (a * di % P, -b * di % P)


def f2_pow(x, e):
    acc = F2_ONE
    for bit in bin(e)[2:]:
        acc = f2_sq(acc)
        if bit == "1":
            acc = f2_mul(acc, x)
    return acc


def f2_sqrt(a):
    """Square root in Fp2 (p = 3 mod 4); None if a is not a square."""
    if a == F2_ZERO:
        return F2_ZERO
    a1 = f2_pow(a, (P - 3) >> 2)
    x0 = f2_mul(a1, a)
    alpha = f2_mul(a1, x0)
    if alpha == (P - 1, mpz(0)):
        x = f2_mul((mpz(0), mpz(1)), x0)
    else:
        b = f2_pow(f2_add(F2_ONE, alpha), (P - 1) >> 1)
        x = f2_mul(b, x0)
    if f2_sq(x) != a:
        return None
    return x


# ---------------------------------------------------------------------------
# Fp6 arithmetic: triple of Fp2 coefficients of 1, v, v^2 with v^3 = XI
# ---------------------------------------------------------------------------

F6_ZERO = (F2_ZERO, F2_ZERO, F2_ZERO)
F6_ONE = (F2_ONE, F2_ZERO, F2_ZERO)


def f6_add(x, y):
    return (f2_add(x[0], y[0]), f2_add(x[1], y[1]), f2_add(x[2], y[2]))


def f6_sub(x, y):
    return (f2_sub(x[0], y[0]), f2_sub(x[1], y[1]), f2_sub(x[2], y[2]))


def f6_neg(x):
    return (f2_neg(x[0]), f2_neg(x[1]), f2_neg(x[2]))


def f6_mul(x, y):
    a0, a1, a2 = x
    b0, b1, b2 = y
    t0 = f2_mul(a0, b0)
    t1 = f2_mul(a1, b1)
    t2 = f2_mul(a2, b2)
    r0 = f2_add(t0, f2_mul_xi(f2_sub(f2_mul(f2_add(a1, a2), f2_add(b1, b2)), f2_add(t1, t2))))
    r1 = f2_add(f2_sub(f2_mul(f2_add(a0, a1), f2_add(b0, b1)), f2_add(t0, t1)), f2_mul_xi(t2))
    r2 = f2_add(f2_sub(f2_mul(f2_add(a0, a2), f2_add(b0, b2)), f2_add(t0, t2)), t1)
    return (r0, r1, r2)


def f6_sq(x):
    return f6_mul(x, x)


def f6_mul_by_v(x):
    return (f2_mul_xi(x[2]), x[0], x[1])


def f6_inv(x):
    a0, a1, a2 = x
    c0 = f2_sub(f2_sq(a0), f2_mul_xi(f2_mul(a1, a2)))
    c1 = f2_sub(f2_mul_xi(f2_sq(a2)), f2_mul(a0, a1))
    c2 = f2_sub(f2_sq(a1), f2_mul(a0, a2))
    t = f2_add(f2_mul(a0, c0), f2_mul_xi(f2_add(f2_mul(a2, c1), f2_mul(a1, c2))))
    ti = f2_inv(t)
    return (f2_mul(c0, ti), f2_mul(c1, ti), f2_mul(c2, ti))


# ---------------------------------------------------------------------------
# Fp12 arithmetic: pair of Fp6 coefficients of 1 and w with w^2 = v
# ---------------------------------------------------------------------------

F12_ONE = (F6_ONE, F6_ZERO)


def f12_mul(x, y):
    a0, a1 = x
    b0, b1 = y
    t0 = f6_mul(a0, b0)
    t1 = f6_mul(a1, b1)
    cross = f6_sub(f6_sub(f6_mul(f6_add(a0, a1), f6_add(b0, b1)), t0), t1)
    return (f6_add(t0, f6_mul_by_v(t1)), cross)


def f12_sq(x):
    a, b = x
    t = f6_mul(a, b)
    c0 = f6_mul(f6_add(a, b), f6_add(a, f6_mul_by_v(b)))
    c0 = f6_sub(f6_sub(c0, t), f6_mul_by_v(t))
    return (c0, f6_add(t, t))


def f12_conj(x):
    return (x[0], f6_neg(x[1]))


def f12_inv(x):
    a, b = x
    t = f6_sub(f6_sq(a), f6_mul_by_v(f6_sq(b)))
    ti = f6_inv(t)
    return (f6_mul(a, ti), f6_neg(f6_mul(b, ti)))


def f12_pow(x, e):
    acc = F12_ONE
    for bit in bin(e)[2:]:
        acc = f12_sq(acc)
        if bit == "1":
            acc = f12_mul(acc, x)
    return acc


# Frobenius constants: gamma[j] = XI^(j*(p-1)/6); slot j of the coefficient
# vector (d0..d5) sits on w-power (0,2,4,1,3,5)[j].
_GAMMA = [F2_ONE]
_g = f2_pow(XI, (P - 1) // 6)
for _j in range(1, 6):
    _GAMMA.append(f2_mul(_GAMMA[-1], _g))

_W_POWERS = (0, 2, 4, 1, 3, 5)


def f12_frobenius(x, times: int = 1):
    for _ in range(times):
        (d0, d1, d2), (d3, d4, d5) = x
        slots = [d0, d1, d2, d3, d4, d5]
        out = [f2_mul(f2_conj(s), _GAMMA[_W_POWERS[j]]) for j, s in enumerate(slots)]
        x = ((out[0], out[1], out[2]), (out[3], out[4], out[5]))
    return x


def _f6_mul_by_01(x, c0, c1):
    a0, a1, a2 = x
    t0 = f2_mul(a0, c0)
    t1 = f2_mul(a1, c1)
    r0 = f2_add(t0, f2_mul_xi(f2_mul(a2, c1)))
    r1 = f2_add(f2_mul(a0, c1), f2_mul(a1, c0))
    r2 = f2_add(t1, f2_mul(a2, c0))
    return (r0, r1, r2)


def _f6_mul_by_1(x, c1):
    a0, a1, a2 = x
    return (f2_mul_xi(f2_mul(a2, c1)), f2_mul(a0, c1), f2_mul(a1, c1))


def f12_mul_by_014(x, c0, c1, c4):
    """Multiply by the sparse element c0 + c1*v + c4*(v*w)."""
    a, b = x
    aa = _f6_mul_by_01(a, c0, c1)
    bb = _f6_mul_by_1(b, c4)
    t = f2_add(c1, c4)
    cross = f6_sub(f6_sub(_f6_mul_by_01(f6_add(a, b), c0, t), aa), bb)
    return (f6_add(aa, f6_mul_by_v(bb)), cross)


# ---------------------------------------------------------------------------
# G1 group law (Jacobian coordinates over Fp)
# ---------------------------------------------------------------------------

INF1 = None  # affine infinity
_JINF = (mpz(1), mpz(1), mpz(0))


def g1_is_on_curve(pt) -> bool:
    if pt is None:
        return True
    x, y = pt
    return (y * y - (x * x * x + B_COEFF)) % P == 0


def _jdbl(p):
    X1, Y1, Z1 = p
    if not Z1:
        return p
    A = X1 * X1 % P
    Bv = Y1 * Y1 % P
    C = Bv * Bv % P
    t = X1 + Bv
    D = (t * t - A - C << 1) % P
    E = 3 * A % P
    F = E * E % P
    X3 = (F - (D << 1)) % P
    Y3 = (E * (D - X3) - (C << 3)) % P
    Z3 = (Y1 * Z1 << 1) % P
    return (X3, Y3, Z3)


def _jadd(p, q):
    X1, Y1, Z1 = p
    X2, Y2, Z2 = q
    if not Z1:
        return q
    if not Z2:
        return p
    Z1Z1 = Z1 * Z1 % P
    Z2Z2 = Z2 * Z2 % P
    U1 = X1 * Z2Z2 % P
    U2 = X2 * Z1Z1 % P
    S1 = Y1 * Z2 * Z2Z2 % P
    S2 = Y2 * Z1 * Z1Z1 % P
    H = (U2 - U1) % P
    rr = (S2 - S1 << 1) % P
    if not H:
        if not rr:
            return _jdbl(p)
        return _JINF
    I = (H * H << 2) % P
    J = H * I % P
    V = U1 * I % P
    X3 = (rr * rr - J - (V << 1)) % P
    Y3 = (rr * (V - X3) - (S1 * J << 1)) % P
    t = Z1 + Z2
    Z3 = (t * t - Z1Z1 - Z2Z2) * H % P
    return (X3, Y3, Z3)


def _jmadd(p, q_affine):
    """Mixed addition: q is affine (x, y), never infinity."""
    X1, Y1, Z1 = p
    if not Z1:
        x2, y2 = q_affine
        return (x2, y2, mpz(1))
    x2, y2 = q_affine
    Z1Z1 = Z1 * Z1 % P
    U2 = x2 * Z1Z1 % P
    S2 = y2 * Z1 * Z1Z1 % P
    H = (U2 - X1) % P
    rr = (S2 - Y1 << 1) % P
    if not H:
        if not rr:
            return _jdbl(p)
        return _JINF
    HH = H * H % P
    I = (HH << 2) % P
    J = H * I % P
    V = X1 * I % P
    X3 = (rr * rr - J - (V << 1)) % P
    Y3 = (rr * (V - X3) - (Y1 * J << 1)) % P
    t = Z1 + H
    Z3 = (t * t - Z1Z1 - HH) % P
    return (X3, Y3, Z3)


def _jneg(p):
    return (p[0], -p[1] % P, p[2])


def _to_jac(pt):
    if pt is None:
        return _JINF
    return (pt[0], pt[1], mpz(1))


def _from_jac(p):
    X, Y, Z = p
    if not Z:
        return None
    zi = invert(Z, P)
    zi2 = zi * zi % P
    return (X * zi2 % P, Y * zi2 * zi % P)


def batch_to_affine(jacs) -> list:
    """Convert many Jacobian points to affine with one field inversion."""
    nonzero = [(i, p) for i, p in enumerate(jacs) if p[2]]
    out = [None] * len(jacs)
    if not nonzero:
        return out
    acc = mpz(1)
    prefix = []
    for _, p in nonzero:
        acc = acc * p[2] % P
        prefix.append(acc)
    inv_acc = invert(acc, P)
    for idx in range(len(nonzero) - 1, -1, -1):
        i, p = nonzero[idx]
        zi = inv_acc * (prefix[idx - 1] if idx else 1) % P
        inv_acc = inv_acc * p[2] % P
        zi2 = zi * zi % P
        out[i] = (p[0] * zi2 % P, p[1] * zi2 * zi % P)
    return out


def g1_add(a, b):
    return _from_jac(_jadd(_to_jac(a), _to_jac(b)))


def g1_neg(a):
    if a is None:
        return None
    return (a[0], -a[1] % P)


def _wnaf(k: int, w: int) -> list[int]:
    out = []
    mask = (1 << w) - 1
    half = 1 << (w - 1)
    while k:
        if k & 1:
            d = k & mask
            if d >= half:
                d -= 1 << w
            k -= d
        else:
            d = 0
        out.append(d)
        k >>= 1
    return out


def _odd_multiples(q_affine, count: int):
    """[1Q, 3Q, 5Q, ...] as Jacobian points."""
    table = [_to_jac(q_affine)]
    twoq = _jdbl(table[0])
    for _ in range(count - 1):
        table.append(_jadd(table[-1], twoq))
    return table


def g1_mul(pt, k: int):
    """Scalar multiplication; pt affine or None, k any integer."""
    k = int(k) % int(R)
    if pt is None or k == 0:
        return None
    digits = _wnaf(k, 5)
    table = _odd_multiples(pt, 8)
    acc = _JINF
    for d in reversed(digits):
        acc = _jdbl(acc)
        if d:
            t = table[abs(d) >> 1]
            acc = _jadd(acc, t if d > 0 else _jneg(t))
    return _from_jac(acc)


def g1_multiexp(points, scalars):
    """Multi-exponentiation sum_i scalars[i] * points[i]; points affine
    (None entries allowed and skipped). Pippenger for large batches,
    interleaved wNAF for small ones."""
    pairs = [(p, int(s) % int(R)) for p, s in zip(points, scalars) if p is not None and int(s) % int(R)]
    if len(points) != len(scalars):
        raise ValueError("points/scalars length mismatch")
    if not pairs:
        return None
    if len(pairs) == 1:
        return g1_mul(pairs[0][0], pairs[0][1])
    if len(pairs) <= 32:
        return _from_jac(_straus(pairs))
    return _from_jac(_pippenger(pairs))


def _straus(pairs):
    w = 4
    tables = [_odd_multiples(p, 4) for p, _ in pairs]
    naf = [_wnaf(s, w) for _, s in pairs]
    top = max(len(d) for d in naf)
    acc = _JINF
    for i in range(top - 1, -1, -1):
        acc = _jdbl(acc)
        for j, digits in enumerate(naf):
            if i < len(digits):
                d = digits[i]
                if d:
                    t = tables[j][abs(d) >> 1]
                    acc = _jadd(acc, t if d > 0 else _jneg(t))
    return acc


def _pippenger(pairs):
    m = len(pairs)
    c = 6 if m < 128 else (8 if m < 1024 else 10)
    nwin = (255 + c - 1) // c
    mask = (1 << c) - 1
    result = _JINF
    for win in range(nwin - 1, -1, -1):
        if win != nwin - 1:
            for _ in range(c):
                result = _jdbl(result)
        shift = win * c
        buckets = {}
        for pt, s in pairs:
            d = (s >> shift) & mask
            if d:
                cur = buckets.get(d)
                if cur is None:
                    buckets[d] = (pt[0], pt[1], mpz(1))
                else:
                    buckets[d] = _jmadd(cur, pt)
        # sum_d d * bucket[d] via descending running sums:
        # window = sum over visited of running, with gap correction.
        running = _JINF
        window_sum = _JINF
        last = None
        for d in sorted(buckets, reverse=True):
            if last is not None and last - d > 1:
                window_sum = _jadd(window_sum, _j_small_mul(running, last - d - 1))
            running = _jadd(running, buckets[d])
            window_sum = _jadd(window_sum, running)
            last = d
        if last is not None and last > 1:
            window_sum = _jadd(window_sum, _j_small_mul(running, last - 1))
        result = _jadd(result, window_sum)
    return result


def _j_small_mul(p, k: int):
    """Jacobian small-scalar multiply (double-and-add), k >= 0."""
    if k == 0 or not p[2]:
        return _JINF
    acc = _JINF
    for bit in bin(k)[2:]:
        acc = _jdbl(acc)
        if bit == "1":
            acc = _jadd(acc, p)
    return acc


# Fixed-base comb tables for repeated multiplication of one base.


def g1_fixed_base_table(pt, window: int = 8):
    """Table of window-digit multiples of 2^(w*i) * pt for fast repeated
    scalar multiplication of a fixed base."""
    nwin = (255 + window - 1) // window
    size = 1 << window
    table = []
    base = _to_jac(pt)
    for _ in range(nwin):
        row = [_JINF] * size
        acc = _JINF
        for d in range(1, size):
            acc = _jadd(acc, base)
            row[d] = acc
        row_aff = batch_to_affine(row)
        table.append(row_aff)
        for _ in range(window):
            base = _jdbl(base)
    return (window, table)


def g1_fixed_mul(table, k: int):
    window, rows = table
    k = int(k) % int(R)
    if k == 0:
        return None
    acc = _JINF
    mask = (1 << window) - 1
    i = 0
    while k:
        d = k & mask
        if d:
            pt = rows[i][d]
            if pt is not None:
                acc = _jmadd(acc, pt)
        k >>= window
        i += 1
    return _from_jac(acc)


# ---------------------------------------------------------------------------
# G1 serialization (ZCash-style compressed encoding, 48 bytes)
# ---------------------------------------------------------------------------


def g1_compress(pt) -> bytes:
    if pt is None:
        return bytes([0xC0]) + bytes(47)
    x, y = pt
    flags = 0x80 | (0x20 if y > _HALF_P else 0)
    b = bytearray(int(x).to_bytes(48, "big"))
    b[0] |= flags
    return bytes(b)


def g1_decompress(data: bytes, subgroup_check: bool = True):
    if len(data) != 48:
        raise PointDecodeError("G1 point must be 48 bytes")
    flags = data[0]
    if not flags & 0x80:
        raise PointDecodeError("uncompressed G1 encoding not supported")
    if flags & 0x40:
        if (flags & 0x3F) or any(data[1:]):
            raise PointDecodeError("malformed infinity encoding")
        return None
    x = mpz(int.from_bytes(bytes([flags & 0x1F]) + data[1:], "big"))
    if x >= P:
        raise PointDecodeError("G1 x coordinate out of range")
    y2 = (x * x * x + B_COEFF) % P
    y = pow(y2, (P + 1) >> 2, P)
    if y * y % P != y2:
        raise PointDecodeError("G1 x coordinate not on curve")
    if bool(flags & 0x20) != (y > _HALF_P):
        y = (P - y) % P
    pt = (x, y)
    if subgroup_check and not g1_in_subgroup(pt):
        raise PointDecodeError("G1 point not in the prime-order subgroup")
    return pt


def g1_in_subgroup(pt) -> bool:
    if pt is None:
        return True
    if not g1_is_on_curve(pt):
        return False
    return g1_mul_unchecked_order(pt) is None


def g1_mul_unchecked_order(pt):
    """[r]pt without reducing the scalar (subgroup membership test)."""
    digits = _wnaf(int(R), 5)
    table = _odd_multiples(pt, 8)
    acc = _JINF
    for d in reversed(digits):
        acc = _jdbl(acc)
        if d:
            t = table[abs(d) >> 1]
            acc = _jadd(acc, t if d > 0 else _jneg(t))
    return _from_jac(acc)


def g1_batch_subgroup_check(points, coeff_source) -> bool:
    """Probabilistic batch subgroup check: every point must be on the curve,
    and a random 128-bit combination must land on the subgroup's identity
    coset. coeff_source(nbytes) supplies deterministic pseudorandom bytes."""
    pts = [p for p in points if p is not None]
    if not pts:
        return True
    for p in pts:
        if not g1_is_on_curve(p):
            return False
    coeffs = []
    for _ in pts:
        coeffs.append(1 + int.from_bytes(coeff_source(16), "big"))
    acc = _JINF
    for p, cfs in zip(pts, coeffs):
        acc = _jadd(acc, _j_small_mul((p[0], p[1], mpz(1)), cfs))
    combo = _from_jac(acc)
    return combo is None or g1_mul_unchecked_order(combo) is None


# ---------------------------------------------------------------------------
# G2 group law (Jacobian over Fp2) and serialization
# ---------------------------------------------------------------------------

B2_COEFF = f2_scale(XI, 4)  # 4(u+1)
_J2INF = (F2_ONE, F2_ONE, F2_ZERO)


def g2_is_on_curve(pt) -> bool:
    if pt is None:
        return True
    x, y = pt
    return f2_sq(y) == f2_add(f2_mul(f2_sq(x), x), B2_COEFF)


def _j2dbl(p):
    X1, Y1, Z1 = p
    if Z1 == F2_ZERO:
        return p
    A = f2_sq(X1)
    Bv = f2_sq(Y1)
    C = f2_sq(Bv)
    t = f2_sq(f2_add(X1, Bv))
    D = f2_add(f2_sub(f2_sub(t, A), C), f2_sub(f2_sub(t, A), C))
    E = f2_add(f2_add(A, A), A)
    F = f2_sq(E)
    X3 = f2_sub(F, f2_add(D, D))
    C8 = f2_add(f2_add(C, C), f2_add(C, C))
    C8 = f2_add(C8, C8)
    Y3 = f2_sub(f2_mul(E, f2_sub(D, X3)), C8)
    Z3 = f2_add(f2_mul(Y1, Z1), f2_mul(Y1, Z1))
    return (X3, Y3, Z3)


def _j2add(p, q):
    X1, Y1, Z1 = p
    X2, Y2, Z2 = q
    if Z1 == F2_ZERO:
        return q
    if Z2 == F2_ZERO:
        return p
    Z1Z1 = f2_sq(Z1)
    Z2Z2 = f2_sq(Z2)
    U1 = f2_mul(X1, Z2Z2)
    U2 = f2_mul(X2, Z1Z1)
    S1 = f2_mul(f2_mul(Y1, Z2), Z2Z2)
    S2 = f2_mul(f2_mul(Y2, Z1), Z1Z1)
    H = f2_sub(U2, U1)
    rr = f2_add(f2_sub(S2, S1), f2_sub(S2, S1))
    if H == F2_ZERO:
        if rr == F2_ZERO:
            return _j2dbl(p)
        return _J2INF
    H2 = f2_add(H, H)
    I = f2_sq(H2)
    J = f2_mul(H, I)
    V = f2_mul(U1, I)
    X3 = f2_sub(f2_sub(f2_sq(rr), J), f2_add(V, V))
    SJ = f2_mul(S1, J)
    Y3 = f2_sub(f2_mul(rr, f2_sub(V, X3)), f2_add(SJ, SJ))
    Z3 = f2_mul(f2_sub(f2_sub(f2_sq(f2_add(Z1, Z2)), Z1Z1), Z2Z2), H)
    return (X3, Y3, Z3)


def _j2neg(p):
    return (p[0], f2_neg(p[1]), p[2])


def _to_jac2(pt):
    if pt is None:
        return _J2INF
    return (pt[0], pt[1], F2_ONE)


def _from_jac2(p):
    X, Y, Z = p
    if Z == F2_ZERO:
        return None
    zi = f2_inv(Z)
    zi2 = f2_sq(zi)
    return (f2_mul(X, zi2), f2_mul(Y, f2_mul(zi2, zi)))


def g2_add(a, b):
    return _from_jac2(_j2add(_to_jac2(a), _to_jac2(b)))


def g2_neg(a):
    if a is None:
        return None
    return (a[0], f2_neg(a[1]))


def g2_mul(pt, k: int):
    k = int(k) % int(R)
    if pt is None or k == 0:
        return None
    acc = _J2INF
    base = _to_jac2(pt)
    for bit in bin(k)[2:]:
        acc = _j2dbl(acc)
        if bit == "1":
            acc = _j2add(acc, base)
    return _from_jac2(acc)


def _f2_sign(y) -> bool:
    y0, y1 = y
    return y1 > _HALF_P or (y1 == 0 and y0 > _HALF_P)


def g2_compress(pt) -> bytes:
    if pt is None:
        return bytes([0xC0]) + bytes(95)
    (x0, x1), y = pt
    flags = 0x80 | (0x20 if _f2_sign(y) else 0)
    hi = bytearray(int(x1).to_bytes(48, "big"))
    hi[0] |= flags
    return bytes(hi) + int(x0).to_bytes(48, "big")


def g2_decompress(data: bytes, subgroup_check: bool = True):
    if len(data) != 96:
        raise PointDecodeError("G2 point must be 96 bytes")
    flags = data[0]
    if not flags & 0x80:
        raise PointDecodeError("uncompressed G2 encoding not supported")
    if flags & 0x40:
        if (flags & 0x3F) or any(data[1:]):
            raise PointDecodeError("malformed infinity encoding")
        return None
    x1 = mpz(int.from_bytes(bytes([flags & 0x1F]) + data[1:48], "big"))
    x0 = mpz(int.from_bytes(data[48:], "big"))
    if x0 >= P or x1 >= P:
        raise PointDecodeError("G2 x coordinate out of range")
    x = (x0, x1)
    y2 = f2_add(f2_mul(f2_sq(x), x), B2_COEFF)
    y = f2_sqrt(y2)
    if y is None:
        raise PointDecodeError("G2 x coordinate not on curve")
    if _f2_sign(y) != bool(flags & 0x20):
        y = f2_neg(y)
    pt = (x, y)
    if subgroup_check and g2_mul(pt, int(R) - 1) != g2_neg(pt):
        raise PointDecodeError("G2 point not in the prime-order subgroup")
    return pt


# ---------------------------------------------------------------------------
# Optimal ate pairing with precomputed line coefficients
# ---------------------------------------------------------------------------

_X_BITS = bin(X_ABS)[3:]  # MSB already consumed by the loop initialisation

_TWO_INV = invert(mpz(2), P)


def g2_prepare(q):
    """Precompute the Miller-loop line coefficients for a fixed G2 point.
    Returns None for infinity (pairing is then trivially one)."""
    if q is None:
        return None
    qx, qy = q
    # Homogeneous projective coordinates on the twist.
    rx, ry, rz = qx, qy, F2_ONE
    coeffs = []
    for bit in _X_BITS:
        # Doubling step (Costello-Lange-Naehrig, M-type twist).
        a = f2_scale(f2_mul(rx, ry), _TWO_INV)
        b = f2_sq(ry)
        c = f2_sq(rz)
        c3 = f2_add(f2_add(c, c), c)
        e = f2_mul(B2_COEFF, c3)
        f = f2_add(f2_add(e, e), e)
        g = f2_scale(f2_add(b, f), _TWO_INV)
        h = f2_sub(f2_sq(f2_add(ry, rz)), f2_add(b, c))
        i = f2_sub(e, b)
        j = f2_sq(rx)
        e2 = f2_sq(e)
        rx = f2_mul(a, f2_sub(b, f))
        ry = f2_sub(f2_sq(g), f2_add(f2_add(e2, e2), e2))
        rz = f2_mul(b, h)
        coeffs.append((i, f2_add(f2_add(j, j), j), f2_neg(h)))
        if bit == "1":
            # Addition step with the affine base point.
            theta = f2_sub(ry, f2_mul(qy, rz))
            lam = f2_sub(rx, f2_mul(qx, rz))
            cc = f2_sq(theta)
            dd = f2_sq(lam)
            ee = f2_mul(lam, dd)
            ff = f2_mul(rz, cc)
            gg = f2_mul(rx, dd)
            hh = f2_sub(f2_add(ee, ff), f2_add(gg, gg))
            rx = f2_mul(lam, hh)
            ry = f2_sub(f2_mul(theta, f2_sub(gg, hh)), f2_mul(ee, ry))
            rz = f2_mul(rz, ee)
            coeffs.append((f2_sub(f2_mul(theta, qx), f2_mul(lam, qy)), f2_neg(theta), lam))
    return coeffs


def miller_loop(prepared, p):
    """Evaluate the Miller function for a prepared G2 argument at an affine
    G1 point. Returns an Fp12 element (one for degenerate inputs)."""
    if prepared is None or p is None:
        return F12_ONE
    xp, yp = p
    f = F12_ONE
    idx = 0
    for bit in _X_BITS:
        f = f12_sq(f)
        c0, c1, c2 = prepared[idx]
        idx += 1
        f = f12_mul_by_014(f, c0, f2_scale(c1, xp), f2_scale(c2, yp))
        if bit == "1":
            c0, c1, c2 = prepared[idx]
            idx += 1
            f = f12_mul_by_014(f, c0, f2_scale(c1, xp), f2_scale(c2, yp))
    # The BLS parameter is negative: conjugate the accumulated value.
    return f12_conj(f)


def _exp_by_x(f):
    """f^|x| followed by conjugation (the curve parameter is negative);
    f must lie in the cyclotomic subgroup."""
    acc = F12_ONE
    for bit in bin(X_ABS)[2:]:
        acc = f12_sq(acc)
        if bit == "1":
            acc = f12_mul(acc, f)
    return f12_conj(acc)


def final_exponentiation(f):
    """Map a Miller-loop output to the pairing group. Uses the exponent
    3(p^12-1)/r (a fixed nonzero multiple of the standard one), which admits
    a short addition chain; the result is still a bilinear non-degenerate
    pairing since gcd(3, r) = 1."""
    # Easy part: f^((p^6-1)(p^2+1)).
    f = f12_mul(f12_conj(f), f12_inv(f))
    f = f12_mul(f12_frobenius(f, 2), f)
    # Hard part, exponent (x-1)^2 (x+p) (x^2+p^2-1) + 3.
    a = f12_mul(_exp_by_x(f), f12_conj(f))
    b = f12_mul(_exp_by_x(a), f12_conj(a))
    c = f12_mul(_exp_by_x(b), f12_frobenius(b, 1))
    d = f12_mul(
        f12_mul(_exp_by_x(_exp_by_x(c)), f12_frobenius(c, 2)),
        f12_conj(c),
    )
    return f12_mul(d, f12_mul(f12_sq(f), f))


def pairing(p, q):
    """e(P, Q) for affine P in G1, Q in G2 (either may be None)."""
    return final_exponentiation(miller_loop(g2_prepare(q), p))


def pairing_product_is_one(pairs) -> bool:
    """Check prod e(P_i, Q_i) == 1 given (affine G1, prepared G2) pairs,
    sharing one final exponentiation."""
    f = F12_ONE
    for p, prepared in pairs:
        f = f12_mul(f, miller_loop(prepared, p))
    return final_exponentiation(f) == F12_ONE


# Module self-checks: generators must be on their curves.
assert g1_is_on_curve(G1_GEN), "G1 generator constant is wrong"
assert g2_is_on_curve(G2_GEN), "G2 generator constant is wrong"
