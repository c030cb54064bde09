"""Audit tag data model and its canonical encoding.

Kept separate from ``protocols`` so the ledger can verify tags without
importing the protocol drivers.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass

from .algebra import CTX_EXEC, Address, GroupElement, Reader, SchnorrSignature, Writer, frame, hash_to_scalar
from .errors import MalformedEncoding
from .linktag import LinkCiphertext
from .nizk import LinkProof, LinkStatement, PedersenCommitment
from .threshold import UidCiphertext

TAG_VERSION = 0x01


def sha256(data: bytes) -> bytes:
    return hashlib.sha256(data).digest()


@dataclass(frozen=True)
class TransferPayload:
    """Body of a cross-chain transfer as posted on the source chain."""

    sender: Address
    recipient: Address
    amount: int
    pattern: str = "simple_transfer"

    def to_bytes(self) -> bytes:
        return (
            Writer().var(self.sender.raw).var(self.recipient.raw).u64(self.amount)
            .var(self.pattern.encode()).getvalue()
        )

    @classmethod
    def from_bytes(cls, data: bytes) -> "TransferPayload":
        r = Reader(data)
        out = cls(Address(r.var()), Address(r.var()), r.u64(), r.var().decode())
        r.done()
        return out


@dataclass(frozen=True)
class BridgeMessage:
    msg_id: bytes
    src_chain: bytes
    src_txid: bytes
    seq: int
    dst_chain: bytes
    payload: bytes
    required_depth: int
    attestations: tuple[tuple[int, SchnorrSignature], ...] = ()

    def exec_statement(self) -> bytes:
        """m_exec: everything the relayers sign, minus the signatures."""
        return (
            Writer().var(self.msg_id).var(self.src_chain).var(self.src_txid).u64(self.seq)
            .var(self.dst_chain).var(self.payload).u32(self.required_depth).getvalue()
        )

    def digest(self) -> bytes:
        """c_EXEC = H(ctx_EXEC || m_exec)."""
        return hash_to_scalar(CTX_EXEC, self.exec_statement()).encode()

    def nullifier(self) -> bytes:
        return nullifier(self.src_txid, self.seq, self.src_chain, self.dst_chain)

    def write(self, w: Writer) -> None:
        w.fixed(self.exec_statement())
        w.u8(len(self.attestations))
        for idx, sig in self.attestations:
            w.u8(idx).fixed(sig.encode())

    @classmethod
    def read(cls, r: Reader) -> "BridgeMessage":
        fields = (r.var(), r.var(), r.var(), r.u64(), r.var(), r.var(), r.u32())
        atts = []
        for _ in range(r.u8()):
            atts.append((r.u8(), SchnorrSignature.decode(r.fixed(64))))
        return cls(*fields, attestations=tuple(atts))


def message_id(src_chain: bytes, src_txid: bytes, seq: int, dst_chain: bytes) -> bytes:
    return sha256(b"VEILAUDIT/MSGID/v1" + frame(src_chain, src_txid, seq.to_bytes(8, "big"), dst_chain))


def nullifier(txid: bytes, nonce: int, src: bytes, dst: bytes) -> bytes:
    return sha256(b"VEILAUDIT/NULL/v1" + frame(txid, nonce.to_bytes(8, "big"), src, dst))


@dataclass(frozen=True)
class TagCore:
    cid_src: bytes
    txid_src: bytes
    cid_dst: bytes
    txid_dst: bytes
    msg_id: bytes
    ts: int

    def write(self, w: Writer) -> None:
        w.var(self.cid_src).var(self.txid_src).var(self.cid_dst).var(self.txid_dst).var(self.msg_id).u64(self.ts)

    @classmethod
    def read(cls, r: Reader) -> "TagCore":
        return cls(r.var(), r.var(), r.var(), r.var(), r.var(), r.u64())


@dataclass(frozen=True)
class ExecAttestation:
    message: BridgeMessage
    nullifier: bytes


@dataclass(frozen=True)
class PartyBundle:
    uid: UidCiphertext
    com: PedersenCommitment
    ct_link: LinkCiphertext
    pi_link: LinkProof
    pk_anon: GroupElement  # session key of the party's anonymous address
    auth: SchnorrSignature  # sk_anon's signature over the proof and the address

    def auth_message(self, binding: bytes) -> bytes:
        return frame(b"bundle-auth", self.pi_link.to_bytes(), binding)

    def statement(self, tpk, apk, binding: bytes) -> LinkStatement:
        return LinkStatement(
            self.com.C, self.uid.c1, self.uid.c2, self.ct_link.c1, self.ct_link.c2, tpk, apk, binding
        )

    def fields(self) -> dict[str, bytes]:
        """Each individually serialized field, for uniqueness scans."""
        p = self.pi_link
        out = {
            "uid.c1": self.uid.c1.encode(),
            "uid.c2": self.uid.c2.encode(),
            "com": self.com.C.encode(),
            "ct_link.c1": self.ct_link.c1.encode(),
            "ct_link.c2": self.ct_link.c2.encode(),
        }
        for name, e in zip(("A_com", "A_uid1", "A_uid2", "A_link1", "A_link2"), p.announcements):
            out[f"pi.{name}"] = e.encode()
        for name, z in zip(("z_x", "z_r", "z_k", "z_s"), p.responses):
            out[f"pi.{name}"] = z.encode()
        out["pk_anon"] = self.pk_anon.encode()
        out["auth"] = self.auth.encode()
        return out

    def write(self, w: Writer) -> None:
        w.elements((self.uid.c1, self.uid.c2, self.com.C, self.ct_link.c1, self.ct_link.c2, self.pk_anon))
        w.fixed(self.pi_link.to_bytes())
        w.fixed(self.auth.encode())

    @classmethod
    def read(cls, r: Reader) -> "PartyBundle":
        uid = UidCiphertext(r.element(), r.element())
        com = PedersenCommitment(r.element())
        ct = LinkCiphertext(r.element(), r.element())
        pk_anon = r.element()
        proof = LinkProof.from_bytes(r.fixed(1 + 5 * 32 + 4 * 32))
        return cls(uid, com, ct, proof, pk_anon, SchnorrSignature.decode(r.fixed(64)))


@dataclass(frozen=True)
class AuditTag:
    core: TagCore
    exec: ExecAttestation
    party_a: PartyBundle
    party_b: PartyBundle

    def to_bytes(self) -> bytes:
        w = Writer().u8(TAG_VERSION)
        self.core.write(w)
        self.exec.message.write(w)
        w.fixed(self.exec.nullifier)
        self.party_a.write(w)
        self.party_b.write(w)
        return w.getvalue()

    @classmethod
    def from_bytes(cls, data: bytes) -> "AuditTag":
        r = Reader(data)
        if r.u8() != TAG_VERSION:
            raise MalformedEncoding("unsupported tag version")
        core = TagCore.read(r)
        msg = BridgeMessage.read(r)
        ex = ExecAttestation(msg, r.fixed(32))
        a, b = PartyBundle.read(r), PartyBundle.read(r)
        r.done()
        return cls(core, ex, a, b)

    def dedup_key(self) -> bytes:
        return dedup_key(self.core.cid_dst, self.core.txid_dst, self.core.msg_id)

    def digest(self) -> bytes:
        return sha256(self.to_bytes())

    def bundle(self, role: str) -> PartyBundle:
        return self.party_a if role == "A" else self.party_b


def dedup_key(cid_dst: bytes, txid_dst: bytes, msg_id: bytes) -> bytes:
    """k = H(cid_dst || txid_dst || msg_id); the timestamp is deliberately excluded."""
    return sha256(b"VEILAUDIT/DEDUP/v1" + frame(cid_dst, txid_dst, msg_id))


@dataclass(frozen=True)
class TagCommitted:
    key: bytes
    tag_hash: bytes


@dataclass(frozen=True)
class IdentityRevealed:
    case_id: bytes
    tag_keys: tuple[bytes, ...]
    approvals: tuple[int, ...]
    timestamp: int
    revealed: tuple[bytes, ...]

    def to_bytes(self) -> bytes:
        w = Writer().var(self.case_id).u32(len(self.tag_keys))
        for k in self.tag_keys:
            w.var(k)
        w.u32(len(self.approvals))
        for i in self.approvals:
            w.u8(i)
        w.u64(self.timestamp).u32(len(self.revealed))
        for pk in self.revealed:
            w.fixed(pk)
        return w.getvalue()

    @classmethod
    def from_bytes(cls, data: bytes) -> "IdentityRevealed":
        r = Reader(data)
        case_id = r.var()
        keys = tuple(r.var() for _ in range(r.u32()))
        approvals = tuple(r.u8() for _ in range(r.u32()))
        ts = r.u64()
        revealed = tuple(r.fixed(32) for _ in range(r.u32()))
        r.done()
        return cls(case_id, keys, approvals, ts, revealed)

