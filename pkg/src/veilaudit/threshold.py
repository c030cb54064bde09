"""t-of-n threshold ElGamal with a trusted dealer, Feldman-verifiable
Shamir shares and DLEQ-proved partial decryptions."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .algebra import ORDER, G, GroupElement, Scalar
from .errors import (
    BadShareProof,
    BadThreshold,
    BelowThreshold,
    DuplicateIndex,
    InvalidShare,
    MalformedEncoding,
)
from .nizk import DleqProof, prove_dleq, verify_dleq

MAX_AUTHORITIES = 64


@dataclass(frozen=True)
class ThresholdKeyset:
    tpk: GroupElement
    n: int
    t: int
    feldman: tuple[GroupElement, ...]

    def public_share(self, index: int) -> GroupElement:
        """sum_j index^j * feldman[j] -- the expected secret_i * G."""
        acc = GroupElement.identity()
        power = 1
        for coeff in self.feldman:
            acc = acc + Scalar(power) * coeff
            power = power * index % ORDER
        return acc


@dataclass(frozen=True)
class AuthorityShare:
    index: int
    secret: Scalar

    def to_bytes(self) -> bytes:
        return bytes([self.index]) + self.secret.encode()

    @classmethod
    def from_bytes(cls, data: bytes) -> "AuthorityShare":
        if len(data) != 33:
            raise MalformedEncoding("share export is 33 bytes")
        if not 1 <= data[0] <= MAX_AUTHORITIES:
            raise MalformedEncoding("share index out of range")
        return cls(data[0], Scalar.decode(data[1:]))


@dataclass(frozen=True)
class UidCiphertext:
    c1: GroupElement
    c2: GroupElement


@dataclass(frozen=True)
class DecryptionShare:
    index: int
    value: GroupElement
    proof: DleqProof


def _as_rng(rng_seed) -> np.random.Generator:
    if isinstance(rng_seed, np.random.Generator):
        return rng_seed
    return np.random.default_rng(rng_seed)


def keygen(t: int, n: int, rng_seed) -> tuple[ThresholdKeyset, list[AuthorityShare]]:
    if not (1 <= t <= n <= MAX_AUTHORITIES):
        raise BadThreshold(f"need 1 <= t <= n <= {MAX_AUTHORITIES}, got t={t}, n={n}")
    rng = _as_rng(rng_seed)
    coeffs = [Scalar.random_nonzero(rng)] + [Scalar.random(rng) for _ in range(t - 1)]
    shares = []
    for i in range(1, n + 1):
        # Horner evaluation of f(i)
        acc = 0
        for a in reversed(coeffs):
            acc = (acc * i + a.value) % ORDER
        shares.append(AuthorityShare(i, Scalar(acc)))
    feldman = tuple(GroupElement.base_mul(a) for a in coeffs)
    return ThresholdKeyset(feldman[0], n, t, feldman), shares


def share_verify(keyset: ThresholdKeyset, share: AuthorityShare) -> bool:
    if not 1 <= share.index <= keyset.n:
        return False
    return GroupElement.base_mul(share.secret) == keyset.public_share(share.index)


def encrypt_uid(tpk: GroupElement, pk_id: GroupElement, k: Scalar) -> UidCiphertext:
    return UidCiphertext(GroupElement.base_mul(k), pk_id + k * tpk)


def decrypt_with_secret(secret: Scalar, ct: UidCiphertext) -> GroupElement:
    return ct.c2 - secret * ct.c1


def partial_decrypt(
    share: AuthorityShare, ct: UidCiphertext, keyset: ThresholdKeyset | None = None
) -> DecryptionShare:
    """secret_i * c1 with a DLEQ proof that log_G(secret_i G) = log_c1(value).

    When ``keyset`` is given the share is Feldman-checked first.
    """
    if keyset is not None and not share_verify(keyset, share):
        raise InvalidShare(f"share {share.index} fails the Feldman check")
    return DecryptionShare(share.index, share.secret * ct.c1, prove_dleq(share.secret, G, ct.c1))


def verify_decryption_share(keyset: ThresholdKeyset, ct: UidCiphertext, d: DecryptionShare) -> bool:
    if not 1 <= d.index <= keyset.n:
        return False
    return verify_dleq(keyset.public_share(d.index), d.value, G, ct.c1, d.proof)


def lagrange_at_zero(indices: Iterable[int]) -> dict[int, Scalar]:
    idx = list(indices)
    out = {}
    for i in idx:
        num, den = 1, 1
        for j in idx:
            if j != i:
                num = num * j % ORDER
                den = den * (j - i) % ORDER
        out[i] = Scalar(num * pow(den, -1, ORDER))
    return out


def combine(keyset: ThresholdKeyset, ct: UidCiphertext, shares: Iterable[DecryptionShare]) -> GroupElement:
    shares = list(shares)
    indices = [d.index for d in shares]
    if len(set(indices)) != len(indices):
        raise DuplicateIndex("decryption shares must have distinct indices")
    if len(shares) < keyset.t:
        raise BelowThreshold(f"{len(shares)} shares given, threshold is {keyset.t}")
    for d in shares:
        if not verify_decryption_share(keyset, ct, d):
            raise BadShareProof(f"decryption share {d.index} failed DLEQ verification")
    lam = lagrange_at_zero(indices)
    mask = GroupElement.identity()
    for d in shares:
        mask = mask + lam[d.index] * d.value
    return ct.c2 - mask
