#!/usr/bin/env python3
"""Independent MPFR re-implementation of hash8, used to produce the golden files.

Run from this directory: python3 oracle.py
"""
import gmpy2
from gmpy2 import mpfr

P = 256
gmpy2.get_context().precision = P
gmpy2.get_context().round = gmpy2.RoundToNearest

VECTORS = [
    "0000000000000000",
    "4142434445464748",
    "ffffffffffffffff",
    "0100000000000000",
    "00000000000000ff",
]


def rhs(sig, gam, bet, x, y, z):
    dx = sig * (y - x)
    dy = (gam * x - y) - x * z
    dz = x * y - bet * z
    return dx, dy, dz


def rk4(par, s, h):
    half, sixth = h / 2, h / 6
    k1 = rhs(*par, *s)
    k2 = rhs(*par, *[a + half * k for a, k in zip(s, k1)])
    k3 = rhs(*par, *[a + half * k for a, k in zip(s, k2)])
    k4 = rhs(*par, *[a + h * k for a, k in zip(s, k3)])
    return tuple(
        a + sixth * (((b1 + 2 * b2) + 2 * b3) + b4)
        for a, b1, b2, b3, b4 in zip(s, k1, k2, k3, k4)
    )


def plan(h, t):
    q = t / h
    nearest = int(gmpy2.floor(q + mpfr(1) / 2))
    res = t - mpfr(nearest) * h
    if abs(res) <= h * mpfr(2) ** (-(P // 2)):
        return nearest, None
    n = int(gmpy2.floor(q))
    while True:
        rest = t - mpfr(n) * h
        if rest == 0:
            return n, None
        if rest < 0:
            n -= 1
        elif rest >= h:
            n += 1
        else:
            return n, rest


def encode(m):
    th = lambda v, b: v + mpfr(b) / 1000
    par = (th(mpfr(10), m[1]), th(mpfr(28), m[0]), th(mpfr(8) / mpfr(3), m[2]))
    s = (th(mpfr(5), m[3]), th(mpfr(5), m[4]), th(mpfr(10), m[5]))
    h = mpfr("0.01") + mpfr(m[6]) * mpfr("0.00001")
    t = mpfr(200) + m[7]
    return par, s, h, t


def one_way(m):
    par, s, h, t = encode(m)
    n, partial = plan(h, t)
    for _ in range(n):
        s = rk4(par, s, h)
    if partial is not None:
        s = rk4(par, s, partial)
    return s


def parts(x):
    if x == 0:
        return False, 0, 0
    man, e = x.as_mantissa_exp()
    man = int(man)
    neg = man < 0
    man = abs(man)
    bl = man.bit_length()
    return neg, e + bl, man << (P - bl)


def dump(x):
    neg, e, man = parts(x)
    if man == 0:
        return "p%d:+:0:0" % P
    return "p%d:%s:%d:%064x" % (P, "-" if neg else "+", e, man)


def digest(x):
    neg, _, man = parts(x)
    if man == 0:
        return "00" * 32
    bits = (man & ((1 << (P - 1)) - 1)) | (int(neg) << (P - 1))
    return "%064x" % bits


def keystream(key, blocks):
    chain = bytearray(key)
    out = []
    for _ in range(blocks):
        k = bytes.fromhex(digest(one_way(bytes(chain))[0]))
        out.append(k.hex())
        fold = [k[j] ^ k[j + 8] ^ k[j + 16] ^ k[j + 24] for j in range(8)]
        chain = bytearray(a ^ b for a, b in zip(chain, fold))
    return out


def main():
    base = one_way(bytes(8))
    with open("one_way_base_state.txt", "w") as f:
        f.write("".join(dump(v) + "\n" for v in base))
    with open("hash8_zero_key.hex", "w") as f:
        f.write(digest(base[0]) + "\n")
    with open("hash8_vectors.txt", "w") as f:
        for k in VECTORS:
            f.write("%s %s\n" % (k, digest(one_way(bytes.fromhex(k))[0])))
    with open("keystream_lorenz63.txt", "w") as f:
        f.write("".join(b + "\n" for b in keystream(b"Lorenz63", 3)))


if __name__ == "__main__":
    main()
