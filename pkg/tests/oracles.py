"""Independent reference implementations used as test oracles.

Pure-integer ristretto255 (Edwards25519 extended coordinates plus the
standard ristretto encoding), kept deliberately naive and separate from the
libsodium-backed code under test.
"""
P = 2**255 - 19
Q = 2**252 + 27742317777372353535851937790883648493
D = (-121665 * pow(121666, -1, P)) % P
SQRT_M1 = pow(2, (P - 1) // 4, P)


def _abs(x):
    x %= P
    return P - x if x & 1 else x


def sqrt_ratio_m1(u, v):
    u %= P
    v %= P
    r = (u * pow(v, 3, P)) * pow(u * pow(v, 7, P), (P - 5) // 8, P) % P
    check = v * r * r % P
    correct = check == u
    flipped = check == (-u) % P
    flipped_i = check == (-u * SQRT_M1) % P
    if flipped or flipped_i:
        r = r * SQRT_M1 % P
    return correct or flipped, _abs(r)


INVSQRT_A_MINUS_D = sqrt_ratio_m1(1, (-1 - D) % P)[1]


def _base():
    y = 4 * pow(5, -1, P) % P
    ok, x = sqrt_ratio_m1(y * y - 1, D * y * y + 1)
    assert ok
    return (x, y, 1, x * y % P)


BASE = _base()
IDENTITY = (0, 1, 1, 0)


def add(p1, p2):
    X1, Y1, Z1, T1 = p1
    X2, Y2, Z2, T2 = p2
    A = (Y1 - X1) * (Y2 - X2) % P
    B = (Y1 + X1) * (Y2 + X2) % P
    C = T1 * 2 * D * T2 % P
    Dd = Z1 * 2 * Z2 % P
    E, F, G, H = B - A, Dd - C, Dd + C, B + A
    return (E * F % P, G * H % P, F * G % P, E * H % P)


def mul(k, pt=BASE):
    acc = IDENTITY
    k %= Q
    while k:
        if k & 1:
            acc = add(acc, pt)
        pt = add(pt, pt)
        k >>= 1
    return acc


def encode(pt) -> bytes:
    X0, Y0, Z0, T0 = pt
    u1 = (Z0 + Y0) * (Z0 - Y0) % P
    u2 = X0 * Y0 % P
    _, invsqrt = sqrt_ratio_m1(1, u1 * u2 * u2)
    den1 = invsqrt * u1 % P
    den2 = invsqrt * u2 % P
    z_inv = den1 * den2 * T0 % P
    if (T0 * z_inv % P) & 1:
        X, Y, den_inv = Y0 * SQRT_M1 % P, X0 * SQRT_M1 % P, den1 * INVSQRT_A_MINUS_D % P
    else:
        X, Y, den_inv = X0, Y0, den2
    if (X * z_inv % P) & 1:
        Y = -Y % P
    s = _abs(den_inv * (Z0 - Y))
    return s.to_bytes(32, "little")


def base_mul_encoding(k: int) -> bytes:
    return encode(mul(k))
