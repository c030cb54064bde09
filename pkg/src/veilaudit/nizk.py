"""Pedersen commitments and Fiat-Shamir sigma protocols.

Three proof families:

* control proof -- Schnorr signature by the ephemeral key over a
  challenge that binds the anonymous address and a session nonce;
* link proof -- AND-composition of three linear relations sharing the
  identity scalar ``x`` (commitment, identity capsule, link ciphertext);
* DLEQ -- Chaum-Pedersen equality of discrete logs.

Each sigma protocol also exposes its raw verification equations with an
explicit challenge and a simulator, so zero-knowledge can be exercised.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import (
    CTX_CTRL,
    CTX_FS,
    CTX_GLOBAL,
    GENERATORS,
    Address,
    GroupElement,
    Reader,
    Scalar,
    SchnorrSignature,
    Writer,
    derive_address,
    derive_nonce,
    frame,
    hash_to_scalar,
    schnorr_sign,
    schnorr_verify,
)
from .errors import AddressMismatch, MalformedEncoding, WitnessInconsistent

PROOF_VERSION = 0x01

G, H, J = GENERATORS.G, GENERATORS.H, GENERATORS.J


@dataclass(frozen=True)
class PedersenCommitment:
    C: GroupElement


def commit(x: Scalar, r: Scalar) -> PedersenCommitment:
    return PedersenCommitment(x * G + r * H)


class FiatShamirTranscript:
    """Ordered, length-prefixed absorption of labelled items."""

    def __init__(self, domain: bytes = CTX_FS):
        self.domain = domain
        self.absorbed: list[tuple[bytes, bytes]] = []

    def absorb(self, label: bytes, data: bytes) -> "FiatShamirTranscript":
        self.absorbed.append((label, data))
        return self

    def absorb_elements(self, label: bytes, *elements: GroupElement) -> "FiatShamirTranscript":
        return self.absorb(label, b"".join(e.encode() for e in elements))

    def challenge(self) -> Scalar:
        payload = b"".join(frame(label, data) for label, data in self.absorbed)
        return hash_to_scalar(self.domain, payload)


def _check_version(r: Reader) -> None:
    if r.u8() != PROOF_VERSION:
        raise MalformedEncoding("unsupported proof version")


# -- control proof ----------------------------------------------------------


@dataclass(frozen=True)
class ControlProof:
    pk_anon: GroupElement
    sig: SchnorrSignature

    def to_bytes(self) -> bytes:
        return Writer().u8(PROOF_VERSION).element(self.pk_anon).fixed(self.sig.encode()).getvalue()

    @classmethod
    def from_bytes(cls, data: bytes) -> "ControlProof":
        r = Reader(data)
        _check_version(r)
        pk = r.element()
        sig = SchnorrSignature.decode(r.fixed(64))
        r.done()
        return cls(pk, sig)


def ctrl_challenge(addr: Address, nonce_sess: bytes) -> Scalar:
    return hash_to_scalar(CTX_CTRL, frame(addr.raw, nonce_sess))


def prove_ctrl(sk_anon: Scalar, addr: Address, nonce_sess: bytes) -> ControlProof:
    pk_anon = GroupElement.base_mul(sk_anon)
    if derive_address(pk_anon) != addr:
        raise AddressMismatch("address is not derived from this key")
    c = ctrl_challenge(addr, nonce_sess)
    return ControlProof(pk_anon, schnorr_sign(sk_anon, CTX_CTRL, c.encode()))


def verify_ctrl(addr: Address, nonce_sess: bytes, proof: ControlProof) -> bool:
    if derive_address(proof.pk_anon) != addr:
        return False
    c = ctrl_challenge(addr, nonce_sess)
    return schnorr_verify(proof.pk_anon, CTX_CTRL, c.encode(), proof.sig)


# -- link proof -------------------------------------------------------------


@dataclass(frozen=True)
class LinkStatement:
    """Public inputs of the link relation.

    ``uid`` is (k*G, PK_id + k*tpk), ``ct_link`` is (s*G, x*J + s*apk).
    ``binding`` is extra context absorbed into the transcript (the party's
    anonymous address), which ties a bundle to the transfer it was made for.
    """

    com: GroupElement
    uid_c1: GroupElement
    uid_c2: GroupElement
    link_c1: GroupElement
    link_c2: GroupElement
    tpk: GroupElement
    apk: GroupElement
    binding: bytes = b""


@dataclass(frozen=True)
class LinkProof:
    A_com: GroupElement
    A_uid1: GroupElement
    A_uid2: GroupElement
    A_link1: GroupElement
    A_link2: GroupElement
    z_x: Scalar
    z_r: Scalar
    z_k: Scalar
    z_s: Scalar

    @property
    def announcements(self) -> tuple[GroupElement, ...]:
        return (self.A_com, self.A_uid1, self.A_uid2, self.A_link1, self.A_link2)

    @property
    def responses(self) -> tuple[Scalar, ...]:
        return (self.z_x, self.z_r, self.z_k, self.z_s)

    def to_bytes(self) -> bytes:
        w = Writer().u8(PROOF_VERSION).elements(self.announcements)
        for z in self.responses:
            w.scalar(z)
        return w.getvalue()

    @classmethod
    def from_bytes(cls, data: bytes) -> "LinkProof":
        r = Reader(data)
        _check_version(r)
        ann = [r.element() for _ in range(5)]
        zs = [r.scalar() for _ in range(4)]
        r.done()
        return cls(*ann, *zs)


def link_challenge(st: LinkStatement, announcements) -> Scalar:
    t = FiatShamirTranscript()
    t.absorb(b"proto", b"link")
    t.absorb(b"ctx", CTX_GLOBAL)
    t.absorb_elements(b"gens", G, H, J)
    t.absorb_elements(b"keys", st.tpk, st.apk)
    t.absorb_elements(b"com", st.com)
    t.absorb_elements(b"uid", st.uid_c1, st.uid_c2)
    t.absorb_elements(b"ct_link", st.link_c1, st.link_c2)
    t.absorb(b"binding", st.binding)
    t.absorb_elements(b"announce", *announcements)
    return t.challenge()


def _link_relations_hold(x, r, k, s, st: LinkStatement) -> bool:
    return (
        st.com == x * G + r * H
        and st.uid_c1 == k * G
        and st.uid_c2 == x * G + k * st.tpk
        and st.link_c1 == s * G
        and st.link_c2 == x * J + s * st.apk
    )


def prove_link(x: Scalar, r: Scalar, k: Scalar, s: Scalar, st: LinkStatement, check: bool = True) -> LinkProof:
    """Prove knowledge of (x, r, k, s) with

    com = xG + rH;  uid = (kG, xG + k tpk);  ct_link = (sG, xJ + s apk).
    ``check=False`` skips re-deriving the publics when the caller just built them.
    """
    if check and not _link_relations_hold(x, r, k, s, st):
        raise WitnessInconsistent("witness does not satisfy the link relations")
    secret = x.encode() + r.encode() + k.encode() + s.encode()
    ctx = st.com.encode() + st.uid_c2.encode() + st.link_c2.encode() + st.binding
    a_x, a_r, a_k, a_s = (derive_nonce(secret, ctx, label) for label in (b"x", b"r", b"k", b"s"))
    a_xG = a_x * G
    ann = (
        a_xG + a_r * H,
        a_k * G,
        a_xG + a_k * st.tpk,
        a_s * G,
        a_x * J + a_s * st.apk,
    )
    c = link_challenge(st, ann)
    return LinkProof(*ann, a_x + c * x, a_r + c * r, a_k + c * k, a_s + c * s)


def link_equations_hold(st: LinkStatement, ann, c: Scalar, z) -> bool:
    """The five verification equations for an explicit challenge."""
    A_com, A_uid1, A_uid2, A_link1, A_link2 = ann
    z_x, z_r, z_k, z_s = z
    z_xG = z_x * G
    return (
        z_xG + z_r * H == A_com + c * st.com
        and z_k * G == A_uid1 + c * st.uid_c1
        and z_xG + z_k * st.tpk == A_uid2 + c * st.uid_c2
        and z_s * G == A_link1 + c * st.link_c1
        and z_x * J + z_s * st.apk == A_link2 + c * st.link_c2
    )


def verify_link(st: LinkStatement, proof: LinkProof) -> bool:
    c = link_challenge(st, proof.announcements)
    return link_equations_hold(st, proof.announcements, c, proof.responses)


def simulate_link(st: LinkStatement, c: Scalar, rng: np.random.Generator):
    """Accepting (announcements, responses) for challenge ``c`` without a witness."""
    z = tuple(Scalar.random(rng) for _ in range(4))
    z_x, z_r, z_k, z_s = z
    ann = (
        z_x * G + z_r * H - c * st.com,
        z_k * G - c * st.uid_c1,
        z_x * G + z_k * st.tpk - c * st.uid_c2,
        z_s * G - c * st.link_c1,
        z_x * J + z_s * st.apk - c * st.link_c2,
    )
    return ann, z


# -- DLEQ -------------------------------------------------------------------


@dataclass(frozen=True)
class DleqProof:
    A1: GroupElement
    A2: GroupElement
    z: Scalar

    def to_bytes(self) -> bytes:
        return Writer().u8(PROOF_VERSION).element(self.A1).element(self.A2).scalar(self.z).getvalue()

    @classmethod
    def from_bytes(cls, data: bytes) -> "DleqProof":
        r = Reader(data)
        _check_version(r)
        out = cls(r.element(), r.element(), r.scalar())
        r.done()
        return out


def dleq_challenge(P1, P2, B1, B2, A1, A2) -> Scalar:
    t = FiatShamirTranscript()
    t.absorb(b"proto", b"dleq")
    t.absorb_elements(b"bases", B1, B2)
    t.absorb_elements(b"publics", P1, P2)
    t.absorb_elements(b"announce", A1, A2)
    return t.challenge()


def prove_dleq(w: Scalar, B1: GroupElement, B2: GroupElement) -> DleqProof:
    P1, P2 = w * B1, w * B2
    a = derive_nonce(w.encode(), B1.encode(), B2.encode())
    A1, A2 = a * B1, a * B2
    c = dleq_challenge(P1, P2, B1, B2, A1, A2)
    return DleqProof(A1, A2, a + c * w)


def dleq_equations_hold(P1, P2, B1, B2, A1, A2, c: Scalar, z: Scalar) -> bool:
    return z * B1 == A1 + c * P1 and z * B2 == A2 + c * P2


def verify_dleq(P1, P2, B1, B2, proof: DleqProof) -> bool:
    c = dleq_challenge(P1, P2, B1, B2, proof.A1, proof.A2)
    return dleq_equations_hold(P1, P2, B1, B2, proof.A1, proof.A2, c, proof.z)


def simulate_dleq(P1, P2, B1, B2, c: Scalar, rng: np.random.Generator):
    z = Scalar.random(rng)
    return z * B1 - c * P1, z * B2 - c * P2, z


def simulate_schnorr(pk: GroupElement, c: Scalar, rng: np.random.Generator):
    """Interactive Schnorr transcript (R, z) with z*G = R + c*pk."""
    z = Scalar.random(rng)
    return z * G - c * pk, z
