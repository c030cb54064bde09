import hashlib
import struct

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from veilaudit.algebra import (
    CTX_ADDR,
    CTX_CTRL,
    CTX_GEN_H,
    CTX_GEN_J,
    CTX_GLOBAL,
    G,
    GENERATORS,
    ORDER,
    REGISTERED_DOMAINS,
    Address,
    GroupElement,
    Reader,
    Scalar,
    SchnorrSignature,
    Writer,
    derive_address,
    hash_to_group,
    hash_to_scalar,
    kdf_derive,
    schnorr_sign,
    schnorr_verify,
)
from veilaudit.errors import EmptySalt, MalformedEncoding, ZeroKey

from oracles import Q, base_mul_encoding

# Standard ristretto255 encodings of k*B for k = 0..4.
BASE_MULTIPLES = [
    "0000000000000000000000000000000000000000000000000000000000000000",
    "e2f2ae0a6abc4e71a884a961c500515f58e30b6aa582dd8db6a65945e08d2d76",
    "6a493210f7499cd17fecb510ae0cea23a110e8d5b901f8acadd3095c73a3b919",
    "94741f5d5d52755ece4f23f044ee27d5d1ea1e2bd196b462166b16152a9d0259",
    "da80862773358b466ffadfe0b3293ab3d9fd53c5ea6c955358f568322daf6a57",
]

scalars = st.integers(min_value=0, max_value=ORDER - 1).map(Scalar)
nonzero = st.integers(min_value=1, max_value=ORDER - 1).map(Scalar)


def test_order_matches_oracle():
    assert ORDER == Q


@pytest.mark.parametrize("k", range(5))
def test_base_multiples_match_standard_vectors(k):
    assert GroupElement.base_mul(Scalar(k)).encode().hex() == BASE_MULTIPLES[k]


@given(scalars)
def test_base_mul_matches_reference_implementation(s):
    assert GroupElement.base_mul(s).encode() == base_mul_encoding(s.value)


@given(scalars, scalars)
def test_group_homomorphism(a, b):
    assert GroupElement.base_mul(a + b) == GroupElement.base_mul(a) + GroupElement.base_mul(b)
    assert (a * b) * G == a * (b * G)


@given(nonzero)
def test_scalar_inverse(a):
    assert a * a.invert() == Scalar(1)


def test_order_annihilates():
    assert (ORDER * G).is_identity()
    assert (Scalar(ORDER - 1) * G) == -G


@given(scalars)
def test_scalar_encoding_roundtrip(s):
    assert Scalar.decode(s.encode()) == s


def test_scalar_decode_rejects_noncanonical():
    with pytest.raises(MalformedEncoding):
        Scalar.decode(ORDER.to_bytes(32, "little"))
    with pytest.raises(MalformedEncoding):
        Scalar.decode(b"\x01" * 31)


@given(scalars)
def test_element_encoding_roundtrip(s):
    e = GroupElement.base_mul(s)
    assert GroupElement.decode(e.encode()) == e


def test_element_decode_rejects_invalid():
    with pytest.raises(MalformedEncoding):
        GroupElement.decode(b"\xff" * 32)
    with pytest.raises(MalformedEncoding):
        GroupElement.decode(b"\x00" * 31)
    assert GroupElement.decode(bytes(32)).is_identity()


def _framed(*parts):
    return b"".join(struct.pack(">I", len(p)) + p for p in parts)


def test_hash_to_scalar_matches_independent_recomputation():
    for payload in (b"", b"abc", bytes(range(200))):
        expect = int.from_bytes(hashlib.sha512(_framed(CTX_GLOBAL, payload)).digest(), "little") % Q
        assert hash_to_scalar(CTX_GLOBAL, payload).value == expect


def test_hash_to_scalar_deterministic_and_domain_separated():
    assert hash_to_scalar(CTX_GLOBAL, b"") == hash_to_scalar(CTX_GLOBAL, b"")
    m = b"test vector"
    assert hash_to_scalar(CTX_GLOBAL, m) != hash_to_scalar(CTX_CTRL, m)


def test_hash_to_scalar_reduced(rng):
    for _ in range(2000):
        assert 0 <= hash_to_scalar(CTX_GLOBAL, rng.bytes(24)).value < ORDER


def test_domain_separation_no_collisions(rng):
    payloads = [rng.bytes(16) for _ in range(10_000)]
    seen = set()
    for d in REGISTERED_DOMAINS:
        for p in payloads:
            seen.add(hash_to_scalar(d, p).value)
    assert len(seen) == len(REGISTERED_DOMAINS) * len(payloads)


def test_hash_to_group():
    assert hash_to_group(CTX_GEN_H, b"") == hash_to_group(CTX_GEN_H, b"")
    assert GENERATORS.H != GENERATORS.J
    assert len({GENERATORS.G, GENERATORS.H, GENERATORS.J}) == 3
    e = hash_to_group(CTX_GEN_J, b"x")
    assert GroupElement.decode(e.encode()) == e


def test_kdf(rng):
    sk = Scalar.random_nonzero(rng)
    assert kdf_derive(sk, b"salt") == kdf_derive(sk, b"salt")
    outs = {kdf_derive(sk, rng.bytes(16)).value for _ in range(1000)}
    assert len(outs) == 1000
    with pytest.raises(EmptySalt):
        kdf_derive(sk, b"")


@given(nonzero, st.binary(max_size=64))
def test_schnorr_complete(sk, msg):
    pk = GroupElement.base_mul(sk)
    assert schnorr_verify(pk, CTX_CTRL, msg, schnorr_sign(sk, CTX_CTRL, msg))


def test_schnorr_rejects(rng):
    sk = Scalar.random_nonzero(rng)
    pk = GroupElement.base_mul(sk)
    msg = b"message"
    sig = schnorr_sign(sk, CTX_CTRL, msg)
    assert not schnorr_verify(pk, CTX_CTRL, b"messagf", sig)
    assert not schnorr_verify(pk + G, CTX_CTRL, msg, sig)
    assert not schnorr_verify(pk, CTX_GLOBAL, msg, sig)
    assert SchnorrSignature.decode(sig.encode()) == sig
    with pytest.raises(ZeroKey):
        schnorr_sign(Scalar(0), CTX_CTRL, msg)


def test_schnorr_deterministic(rng):
    sk = Scalar.random_nonzero(rng)
    assert schnorr_sign(sk, CTX_CTRL, b"m") == schnorr_sign(sk, CTX_CTRL, b"m")


def test_address(rng):
    pk = GroupElement.base_mul(Scalar.random_nonzero(rng))
    a = derive_address(pk)
    assert a == derive_address(pk)
    assert a != derive_address(pk + G)
    assert len(a.raw) == 20
    assert a.raw == hashlib.sha256(CTX_ADDR + pk.encode()).digest()[:20]
    with pytest.raises(MalformedEncoding):
        Address(b"short")


@given(st.lists(st.binary(max_size=40), max_size=6), st.integers(0, 2**64 - 1))
def test_writer_reader_roundtrip(parts, n):
    w = Writer().u64(n)
    for p in parts:
        w.var(p)
    r = Reader(w.getvalue())
    assert r.u64() == n
    assert [r.var() for _ in parts] == parts
    r.done()


def test_reader_rejects_truncation_and_trailing():
    data = Writer().var(b"abc").getvalue()
    with pytest.raises(MalformedEncoding):
        Reader(data[:-1]).var()
    r = Reader(data + b"\x00")
    r.var()
    with pytest.raises(MalformedEncoding):
        r.done()
