"""Prime-order group arithmetic over ristretto255, hashing into the group and
scalar field, key derivation, Schnorr signatures and canonical encodings.

All point operations go through libsodium (via ``rbcl``).  Scalars are plain
Python integers reduced modulo the group order.
"""
from __future__ import annotations

import hashlib
import hmac
import struct
from dataclasses import dataclass
from typing import Iterable

import numpy as np
import rbcl

from .errors import EmptySalt, MalformedEncoding, ZeroKey

#: Order of the ristretto255 group.
ORDER = 2**252 + 27742317777372353535851937790883648493

SCALAR_BYTES = 32
ELEMENT_BYTES = 32
ADDRESS_BYTES = 20

CTX_CTRL = b"VEILAUDIT/CTRL/v1"
CTX_EXEC = b"VEILAUDIT/EXEC/v1"
CTX_GLOBAL = b"VEILAUDIT/GLOBAL/v1"
CTX_GEN_H = b"VEILAUDIT/GEN/H/v1"
CTX_GEN_J = b"VEILAUDIT/GEN/J/v1"
CTX_FS = b"VEILAUDIT/FS/v1"
CTX_ADDR = b"VEILAUDIT/ADDR/v1"

REGISTERED_DOMAINS = frozenset(
    {CTX_CTRL, CTX_EXEC, CTX_GLOBAL, CTX_GEN_H, CTX_GEN_J, CTX_FS, CTX_ADDR}
)

_KDF_KEY = b"VEILAUDIT/KDF/v1"
_NONCE_KEY = b"VEILAUDIT/NONCE/v1"

_smul = rbcl.crypto_scalarmult_ristretto255_allow_scalar_zero
_smul_base = rbcl.crypto_scalarmult_ristretto255_base_allow_scalar_zero
_add = rbcl.crypto_core_ristretto255_add
_sub = rbcl.crypto_core_ristretto255_sub
_is_valid = rbcl.crypto_core_ristretto255_is_valid_point
_from_hash = rbcl.crypto_core_ristretto255_from_hash


class Scalar:
    """An element of the scalar field Z_q."""

    __slots__ = ("value",)

    def __init__(self, value: int):
        self.value = value % ORDER

    @classmethod
    def random(cls, rng: np.random.Generator) -> "Scalar":
        return cls(int.from_bytes(rng.bytes(64), "little"))

    @classmethod
    def random_nonzero(cls, rng: np.random.Generator) -> "Scalar":
        while True:
            s = cls.random(rng)
            if s.value:
                return s

    def __add__(self, other: "Scalar") -> "Scalar":
        return Scalar(self.value + other.value)

    def __sub__(self, other: "Scalar") -> "Scalar":
        return Scalar(self.value - other.value)

    def __mul__(self, other):
        if isinstance(other, Scalar):
            return Scalar(self.value * other.value)
        if isinstance(other, GroupElement):
            return other.__rmul__(self)
        return NotImplemented

    def __neg__(self) -> "Scalar":
        return Scalar(-self.value)

    def invert(self) -> "Scalar":
        if not self.value:
            raise ZeroDivisionError("zero scalar has no inverse")
        return Scalar(pow(self.value, -1, ORDER))

    def __bool__(self) -> bool:
        return self.value != 0

    def __eq__(self, other) -> bool:
        return isinstance(other, Scalar) and self.value == other.value

    def __hash__(self) -> int:
        return hash(("Scalar", self.value))

    def __repr__(self) -> str:
        return f"Scalar({self.value:#x})"

    def encode(self) -> bytes:
        return self.value.to_bytes(SCALAR_BYTES, "little")

    @classmethod
    def decode(cls, data: bytes) -> "Scalar":
        if len(data) != SCALAR_BYTES:
            raise MalformedEncoding(f"scalar must be {SCALAR_BYTES} bytes, got {len(data)}")
        v = int.from_bytes(data, "little")
        if v >= ORDER:
            raise MalformedEncoding("non-canonical scalar")
        return cls(v)


class GroupElement:
    """A ristretto255 point, held in its canonical 32-byte encoding."""

    __slots__ = ("_enc",)

    def __init__(self, enc: bytes):
        # trusted constructor; use decode() for untrusted bytes
        self._enc = enc

    @classmethod
    def identity(cls) -> "GroupElement":
        return cls(bytes(ELEMENT_BYTES))

    @classmethod
    def base_mul(cls, s: Scalar) -> "GroupElement":
        return cls(_smul_base(s.value.to_bytes(32, "little")))

    def __add__(self, other: "GroupElement") -> "GroupElement":
        return GroupElement(_add(self._enc, other._enc))

    def __sub__(self, other: "GroupElement") -> "GroupElement":
        return GroupElement(_sub(self._enc, other._enc))

    def __neg__(self) -> "GroupElement":
        return GroupElement(_sub(_IDENTITY_ENC, self._enc))

    def __rmul__(self, s) -> "GroupElement":
        if isinstance(s, Scalar):
            v = s.value
        elif isinstance(s, int):
            v = s % ORDER
        else:
            return NotImplemented
        if self._enc == _BASE_ENC:
            return GroupElement(_smul_base(v.to_bytes(32, "little")))
        return GroupElement(_smul(v.to_bytes(32, "little"), self._enc))

    __mul__ = __rmul__

    def is_identity(self) -> bool:
        return self._enc == _IDENTITY_ENC

    def __eq__(self, other) -> bool:
        return isinstance(other, GroupElement) and hmac.compare_digest(self._enc, other._enc)

    def __hash__(self) -> int:
        return hash(self._enc)

    def __repr__(self) -> str:
        return f"GroupElement({self._enc.hex()[:16]}...)"

    def encode(self) -> bytes:
        return self._enc

    @classmethod
    def decode(cls, data: bytes) -> "GroupElement":
        if len(data) != ELEMENT_BYTES:
            raise MalformedEncoding(f"element must be {ELEMENT_BYTES} bytes, got {len(data)}")
        data = bytes(data)
        if data != _IDENTITY_ENC and not _is_valid(data):
            raise MalformedEncoding("bytes are not a canonical ristretto255 encoding")
        return cls(data)


_IDENTITY_ENC = bytes(ELEMENT_BYTES)
_BASE_ENC = _smul_base((1).to_bytes(32, "little"))


def _frame(*parts: bytes) -> bytes:
    return b"".join(struct.pack(">I", len(p)) + p for p in parts)


def hash_to_scalar(domain: bytes, payload: bytes) -> Scalar:
    """Deterministic map of (domain, payload) into Z_q.

    Uses a 512-bit digest so the modular reduction bias is below 2^-250.
    """
    digest = hashlib.sha512(_frame(domain, payload)).digest()
    return Scalar(int.from_bytes(digest, "little"))


def hash_to_group(domain: bytes, payload: bytes) -> GroupElement:
    """Hash into the group with the ristretto255 one-way map (no known dlog)."""
    digest = hashlib.sha512(_frame(domain, payload)).digest()
    return GroupElement(_from_hash(digest))


@dataclass(frozen=True)
class GeneratorSet:
    G: GroupElement
    H: GroupElement
    J: GroupElement


G = GroupElement(_BASE_ENC)
GENERATORS = GeneratorSet(
    G=G,
    H=hash_to_group(CTX_GEN_H, b""),
    J=hash_to_group(CTX_GEN_J, b""),
)


def kdf_derive(master_secret: Scalar, salt: bytes) -> Scalar:
    """Derive a nonzero child scalar from a master scalar and a salt."""
    if not salt:
        raise EmptySalt("salt must be non-empty")
    counter = 0
    while True:
        mac = hmac.new(
            _KDF_KEY + master_secret.encode(),
            _frame(salt, counter.to_bytes(4, "big")),
            hashlib.sha512,
        ).digest()
        s = Scalar(int.from_bytes(mac, "little"))
        if s.value:
            return s
        counter += 1  # pragma: no cover


def derive_nonce(secret: bytes, *context: bytes) -> Scalar:
    """Deterministic, nonzero nonce bound to a secret and public context."""
    counter = 0
    while True:
        mac = hmac.new(
            _NONCE_KEY + secret, _frame(counter.to_bytes(4, "big"), *context), hashlib.sha512
        ).digest()
        s = Scalar(int.from_bytes(mac, "little"))
        if s.value:
            return s
        counter += 1  # pragma: no cover


@dataclass(frozen=True)
class SchnorrSignature:
    commitment_hash: Scalar
    response: Scalar

    def encode(self) -> bytes:
        return self.commitment_hash.encode() + self.response.encode()

    @classmethod
    def decode(cls, data: bytes) -> "SchnorrSignature":
        if len(data) != 2 * SCALAR_BYTES:
            raise MalformedEncoding("signature must be 64 bytes")
        return cls(Scalar.decode(data[:32]), Scalar.decode(data[32:]))


def _schnorr_challenge(domain: bytes, R: GroupElement, pk: GroupElement, message: bytes) -> Scalar:
    return hash_to_scalar(domain, _frame(R.encode(), pk.encode(), message))


def schnorr_sign(sk: Scalar, domain: bytes, message: bytes) -> SchnorrSignature:
    if not sk:
        raise ZeroKey("signing key must be nonzero")
    pk = GroupElement.base_mul(sk)
    k = derive_nonce(sk.encode(), domain, message)
    R = GroupElement.base_mul(k)
    e = _schnorr_challenge(domain, R, pk, message)
    return SchnorrSignature(e, k + e * sk)


def schnorr_verify(pk: GroupElement, domain: bytes, message: bytes, sig: SchnorrSignature) -> bool:
    # R = s*G - e*pk; accept iff e recomputes
    R = GroupElement.base_mul(sig.response) - sig.commitment_hash * pk
    return _schnorr_challenge(domain, R, pk, message) == sig.commitment_hash


@dataclass(frozen=True)
class Address:
    raw: bytes

    def __post_init__(self):
        if len(self.raw) != ADDRESS_BYTES:
            raise MalformedEncoding(f"address must be {ADDRESS_BYTES} bytes")

    def hex(self) -> str:
        return self.raw.hex()


def derive_address(pk: GroupElement) -> Address:
    """First 20 bytes of a domain-separated SHA-256 over the key encoding."""
    return Address(hashlib.sha256(CTX_ADDR + pk.encode()).digest()[:ADDRESS_BYTES])


# -- canonical byte framing ------------------------------------------------


class Writer:
    """Append-only canonical encoder: fixed-width numbers, length-prefixed bytes."""

    def __init__(self):
        self._parts: list[bytes] = []

    def u8(self, v: int) -> "Writer":
        self._parts.append(struct.pack(">B", v))
        return self

    def u32(self, v: int) -> "Writer":
        self._parts.append(struct.pack(">I", v))
        return self

    def u64(self, v: int) -> "Writer":
        self._parts.append(struct.pack(">Q", v))
        return self

    def var(self, b: bytes) -> "Writer":
        self._parts.append(struct.pack(">I", len(b)) + b)
        return self

    def fixed(self, b: bytes) -> "Writer":
        self._parts.append(b)
        return self

    def element(self, e: GroupElement) -> "Writer":
        self._parts.append(e.encode())
        return self

    def elements(self, es: Iterable[GroupElement]) -> "Writer":
        for e in es:
            self.element(e)
        return self

    def scalar(self, s: Scalar) -> "Writer":
        self._parts.append(s.encode())
        return self

    def getvalue(self) -> bytes:
        return b"".join(self._parts)


class Reader:
    def __init__(self, data: bytes):
        self._data = bytes(data)
        self._pos = 0

    def _take(self, n: int) -> bytes:
        if self._pos + n > len(self._data):
            raise MalformedEncoding("truncated buffer")
        out = self._data[self._pos:self._pos + n]
        self._pos += n
        return out

    def u8(self) -> int:
        return self._take(1)[0]

    def u32(self) -> int:
        return struct.unpack(">I", self._take(4))[0]

    def u64(self) -> int:
        return struct.unpack(">Q", self._take(8))[0]

    def var(self) -> bytes:
        return self._take(self.u32())

    def fixed(self, n: int) -> bytes:
        return self._take(n)

    def element(self) -> GroupElement:
        return GroupElement.decode(self._take(ELEMENT_BYTES))

    def scalar(self) -> Scalar:
        return Scalar.decode(self._take(SCALAR_BYTES))

    def done(self) -> None:
        if self._pos != len(self._data):
            raise MalformedEncoding("trailing bytes")


def frame(*parts: bytes) -> bytes:
    """Injective concatenation (4-byte big-endian length before each part)."""
    return _frame(*parts)
