"""Anonymous identity setup (AIP), audit-tag assembly (AUD) and threshold
identity revelation (IRP), plus a ``World`` that wires them to the chain
simulator for scenario runs."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from . import chainsim
from .algebra import CTX_CTRL, GENERATORS, Address, GroupElement, Scalar, derive_address, kdf_derive, schnorr_sign
from .chainsim import AuditLedger, Bridge, EscrowContract, Network, SimChain, Simulation, Transaction
from .errors import InsufficientFunds, UnknownTag
from .linktag import EtKeypair, LinkPseudonym, encrypt_link, et_keygen
from .nizk import PedersenCommitment, prove_ctrl, prove_link
from .tags import (
    AuditTag,
    BridgeMessage,
    ExecAttestation,
    IdentityRevealed,
    PartyBundle,
    TagCore,
    TransferPayload,
    sha256,
)
from .threshold import AuthorityShare, ThresholdKeyset, combine, encrypt_uid, keygen, partial_decrypt

AUDIT_CHAIN = b"audit"


@dataclass(frozen=True)
class MasterIdentity:
    sk_master: Scalar
    x: Scalar
    PK_id: GroupElement
    L: GroupElement  # cached x*J
    public_account: bytes  # funded L1 account used for escrow deposits

    @classmethod
    def from_secret(cls, sk_master: Scalar) -> "MasterIdentity":
        x = kdf_derive(sk_master, b"id")
        pub = derive_address(GroupElement.base_mul(kdf_derive(sk_master, b"pub"))).raw
        return cls(sk_master, x, GroupElement.base_mul(x), x * GENERATORS.J, pub)

    @classmethod
    def generate(cls, rng: np.random.Generator) -> "MasterIdentity":
        return cls.from_secret(Scalar.random_nonzero(rng))


@dataclass(frozen=True)
class AnonSession:
    salt_addr: bytes
    sk_anon: Scalar
    pk_anon: GroupElement
    addr_anon: Address
    nonce_sess: bytes


@dataclass(frozen=True)
class EscrowReceipt:
    escrow_id: bytes
    deposit_id: bytes
    amount: int
    dest: Address


def new_session(user: MasterIdentity, rng: np.random.Generator) -> AnonSession:
    salt = rng.bytes(16)
    sk = kdf_derive(user.sk_master, salt)
    pk = GroupElement.base_mul(sk)
    return AnonSession(salt, sk, pk, derive_address(pk), b"")


def make_bundle(user: MasterIdentity, session: AnonSession, tpk: GroupElement, apk: GroupElement,
                rng: np.random.Generator) -> PartyBundle:
    """UID, fresh-randomness commitment, link ciphertext and the link proof,
    bound to the session address and authorized by its key."""
    k, r, s = (Scalar.random_nonzero(rng) for _ in range(3))
    uid = encrypt_uid(tpk, user.PK_id, k)
    com = PedersenCommitment(user.PK_id + r * GENERATORS.H)
    ct = encrypt_link(apk, user.x, s, L=user.L)
    binding = session.addr_anon.raw
    draft = PartyBundle(uid, com, ct, None, session.pk_anon, None)  # type: ignore[arg-type]
    # publics were just built from these witnesses, skip re-deriving them
    proof = prove_link(user.x, r, k, s, draft.statement(tpk, apk, binding), check=False)
    return authorize(PartyBundle(uid, com, ct, proof, session.pk_anon, None), session)  # type: ignore[arg-type]


def authorize(bundle: PartyBundle, session: AnonSession) -> PartyBundle:
    binding = session.addr_anon.raw
    sig = schnorr_sign(session.sk_anon, CTX_CTRL, bundle.auth_message(binding))
    return replace(bundle, pk_anon=session.pk_anon, auth=sig)


def aip_run(user: MasterIdentity, chain: SimChain, escrow: EscrowContract, tpk: GroupElement,
            apk: GroupElement, amount: int, rng: np.random.Generator):
    """Fresh anonymous address, escrow funding under a control proof, and the
    party bundle. Returns (session, bundle, receipt)."""
    session = new_session(user, rng)
    if chain.balance(user.public_account) < amount:
        raise InsufficientFunds(f"{chain.balance(user.public_account)} < {amount}")
    deposit_id = rng.bytes(16)
    nonce = escrow.deposit(deposit_id, user.public_account, amount)
    session = AnonSession(session.salt_addr, session.sk_anon, session.pk_anon, session.addr_anon, nonce)
    proof = prove_ctrl(session.sk_anon, session.addr_anon, nonce)
    escrow.release(deposit_id, proof, session.addr_anon)
    bundle = make_bundle(user, session, tpk, apk, rng)
    return session, bundle, EscrowReceipt(escrow.escrow_id, deposit_id, amount, session.addr_anon)


@dataclass(frozen=True)
class FinalizedTransfer:
    cid_src: bytes
    txid_src: bytes
    cid_dst: bytes
    txid_dst: bytes
    message: BridgeMessage
    ts: int


def build_tag(bundle_a: PartyBundle, bundle_b: PartyBundle, transfer: FinalizedTransfer) -> AuditTag:
    msg = transfer.message
    core = TagCore(transfer.cid_src, transfer.txid_src, transfer.cid_dst, transfer.txid_dst,
                   msg.msg_id, transfer.ts)
    return AuditTag(core, ExecAttestation(msg, msg.nullifier()), bundle_a, bundle_b)


def aud_build_and_submit(bundle_a: PartyBundle, bundle_b: PartyBundle, transfer: FinalizedTransfer,
                         ledger: AuditLedger) -> bytes:
    return chainsim.ledger_append(ledger, build_tag(bundle_a, bundle_b, transfer))


@dataclass
class RevealCase:
    case_id: bytes
    tags: tuple[bytes, ...]
    cluster_evidence: LinkPseudonym | None = None
    approvals: frozenset[int] = frozenset()
    roles: tuple[str, ...] | None = None  # party per tag, default "A"
    artifact: tuple[tuple[int, ...], int] | None = None


def irp_run(case: RevealCase, keyset: ThresholdKeyset, shares_available: Sequence[AuthorityShare],
            ledger: AuditLedger, at_ms: int = 0, decrypt_all: bool = False) -> list[GroupElement]:
    """Threshold-gated reveal. Returns [] (refusal) below t approvals.

    The case's tags share one pseudonym, so a single capsule is decrypted
    unless ``decrypt_all`` is set.
    """
    for k in case.tags:
        if k not in ledger.records:
            raise UnknownTag(k.hex())
    if len(case.approvals) < keyset.t:
        return []
    approving = tuple(sorted(case.approvals))
    case.artifact = (approving, at_ms)
    roles = case.roles or ("A",) * len(case.tags)
    uids = [ledger.records[k].bundle(role).uid for k, role in zip(case.tags, roles)]
    signers = [s for s in shares_available if s.index in case.approvals]
    revealed: list[GroupElement] = []
    for uid in (uids if decrypt_all else uids[:1]):
        pk = combine(keyset, uid, [partial_decrypt(s, uid) for s in signers])
        if pk not in revealed:
            revealed.append(pk)
    ledger.record_reveal(
        IdentityRevealed(case.case_id, tuple(case.tags), approving, at_ms, tuple(p.encode() for p in revealed))
    )
    return revealed


# -- scenario wiring --------------------------------------------------------


@dataclass
class ChainConfig:
    chain_id: str
    block_interval_ms: int = 500
    finality_depth: int = 1


@dataclass
class BridgeConfig:
    t_relay: int = 3
    n_relay: int = 4
    relay_delay_ms: int = 0
    depth: int = 1


@dataclass
class CommitteeConfig:
    t: int = 2
    n: int = 3


@dataclass
class ScenarioConfig:
    chains: list[ChainConfig] = field(
        default_factory=lambda: [ChainConfig("chainA"), ChainConfig("chainB")]
    )
    audit_block_interval_ms: int = 500
    bridge: BridgeConfig = field(default_factory=BridgeConfig)
    committee: CommitteeConfig = field(default_factory=CommitteeConfig)
    seed: int = 0

    @classmethod
    def from_dict(cls, d: dict) -> "ScenarioConfig":
        return cls(
            chains=[ChainConfig(**c) for c in d.get("chains", [])] or cls().chains,
            audit_block_interval_ms=d.get("audit_block_interval_ms", 500),
            bridge=BridgeConfig(**d.get("bridge", {})),
            committee=CommitteeConfig(**d.get("committee", {})),
            seed=d.get("seed", 0),
        )


@dataclass(frozen=True)
class TransferJob:
    user_a: int
    user_b: int
    amount: int
    src: bytes
    dst: bytes
    pattern: str = "simple_transfer"


@dataclass
class PendingTransfer:
    """A finalized transfer whose tag was built but not submitted."""

    job: TransferJob
    transfer: FinalizedTransfer
    session_a: AnonSession
    session_b: AnonSession
    tag: AuditTag


@dataclass
class TransferResult:
    job: TransferJob
    key: bytes
    submit_ms: int
    src_commit_ms: int
    tag_commit_ms: int
    tag: AuditTag


class World:
    """Chains, bridge, committee, auditor keys and a user registry."""

    def __init__(self, cfg: ScenarioConfig | None = None):
        cfg = cfg or ScenarioConfig()
        self.cfg = cfg
        ss = np.random.SeedSequence(cfg.seed)
        s_keys, s_et, s_bridge, s_users, s_sessions = ss.spawn(5)
        self.network = Network(SimChain(c.chain_id.encode(), c.block_interval_ms, c.finality_depth)
                               for c in cfg.chains)
        self.network.add(SimChain(AUDIT_CHAIN, cfg.audit_block_interval_ms, 1))
        self.sim = Simulation(self.network)
        b = cfg.bridge
        self.bridge = Bridge(b.t_relay, b.n_relay, b.relay_delay_ms, seed=s_bridge)
        self.depth = b.depth
        self.keyset, self.shares = keygen(cfg.committee.t, cfg.committee.n, s_keys)
        self.et: EtKeypair = et_keygen(np.random.default_rng(s_et))
        self.ledger = AuditLedger(self.bridge.relayer_pks, b.t_relay, self.keyset.tpk, self.et.apk,
                                  network=self.network, min_depth=1)
        self.escrows = {cid: EscrowContract(b"aip", ch) for cid, ch in self.network.chains.items()
                        if cid != AUDIT_CHAIN}
        self.settlement = {cid: EscrowContract(b"settle", ch) for cid, ch in self.network.chains.items()
                           if cid != AUDIT_CHAIN}
        self._user_rng = np.random.default_rng(s_users)
        self.rng = np.random.default_rng(s_sessions)
        self.users: list[MasterIdentity] = []
        self.truth: dict[bytes, tuple[int, int]] = {}
        self.results: list[TransferResult] = []
        self.pending: list[PendingTransfer] = []
        self._nonces: dict[bytes, int] = {}

    @property
    def chain_ids(self) -> list[bytes]:
        return [cid for cid in self.network.chains if cid != AUDIT_CHAIN]

    def add_users(self, count: int, balance: int = 10**9) -> None:
        for _ in range(count):
            u = MasterIdentity.generate(self._user_rng)
            self.users.append(u)
            for cid in self.chain_ids:
                self.network.chain(cid).mint(u.public_account, balance)

    def _nonce(self, sender: bytes) -> int:
        n = self._nonces.get(sender, 0)
        self._nonces[sender] = n + 1
        return n

    def submit_audit_tx(self, tag: AuditTag, kind: str, at_ms: int) -> bytes:
        tx = Transaction(b"auditor-relay", self._nonce(b"auditor-relay"), kind, tag.to_bytes())
        return self.network.submit_tx(AUDIT_CHAIN, tx, at_ms)

    def start_transfer(self, job: TransferJob, on_done: Callable[[TransferResult], None] | None = None,
                       depth: int | None = None, commit: bool = True) -> None:
        """Run one cross-chain transfer through AIP -> bridge -> AUD at ``sim.now``.

        With ``commit=False`` the finished tag is parked in ``self.pending``.
        """
        sim, net = self.sim, self.network
        depth = self.depth if depth is None else depth
        ua, ub = self.users[job.user_a], self.users[job.user_b]
        src, dst = net.chain(job.src), net.chain(job.dst)
        tpk, apk = self.keyset.tpk, self.et.apk
        sess_a, bundle_a, _ = aip_run(ua, src, self.escrows[job.src], tpk, apk, job.amount, self.rng)
        sess_b, bundle_b, _ = aip_run(ub, dst, self.escrows[job.dst], tpk, apk, 0, self.rng)
        submit_ms = sim.now
        body = TransferPayload(sess_a.addr_anon, sess_b.addr_anon, job.amount, job.pattern)
        gateway = b"gateway:" + job.dst
        if job.pattern == "escrow_settlement":
            # deposit by A, released to B's anonymous address on B's acknowledgement
            esc = self.settlement[job.src]
            dep = self.rng.bytes(16)
            nonce = esc.deposit(dep, sess_a.addr_anon.raw, job.amount)
            esc.release(dep, prove_ctrl(sess_b.sk_anon, sess_b.addr_anon, nonce), sess_b.addr_anon)
            src.transfer(sess_b.addr_anon.raw, gateway, job.amount)
        else:
            src.transfer(sess_a.addr_anon.raw, gateway, job.amount)
        tx = Transaction(sess_a.addr_anon.raw, self._nonce(sess_a.addr_anon.raw), "xfer", body.to_bytes())
        txid = net.submit_tx(job.src, tx, submit_ms)
        state: dict = {}

        def included(t_ms):
            state["src_commit"] = t_ms

        def confirmed(t_ms):
            msg = self.bridge.relay(net, job.src, txid, job.dst, tx.payload, depth)
            sim.call_at(t_ms + self.bridge.relay_delay_ms, deliver, msg)

        def deliver(msg):
            dst_txid = self.bridge.deliver(net, msg, sim.now)
            dst.mint(body.recipient.raw, job.amount)
            sim.when_included(job.dst, dst_txid, lambda t: on_dst(msg, dst_txid, t))

        def on_dst(msg, dst_txid, t_ms):
            transfer = FinalizedTransfer(job.src, txid, job.dst, dst_txid, msg, t_ms)
            tag = build_tag(bundle_a, bundle_b, transfer)
            if not commit:
                self.pending.append(PendingTransfer(job, transfer, sess_a, sess_b, tag))
                return
            audit_txid = self.submit_audit_tx(tag, "atag_store", sim.now)
            sim.when_included(AUDIT_CHAIN, audit_txid, lambda t: finish(tag, t))

        def finish(tag, t_ms):
            k = self.ledger.append(tag)
            self.truth[k] = (job.user_a, job.user_b)
            res = TransferResult(job, k, submit_ms, state["src_commit"], t_ms, tag)
            self.results.append(res)
            if on_done is not None:
                on_done(res)

        sim.when_included(job.src, txid, included)
        sim.when_confirmed(job.src, txid, depth, confirmed)

    def run_closed_loop(self, jobs: Sequence[TransferJob], lanes: int, depth: int | None = None) -> None:
        """Each lane issues its next job once the previous tag is committed."""
        queue = list(reversed(jobs))

        def next_job(_res=None):
            if queue:
                self.start_transfer(queue.pop(), on_done=lambda r: self.sim.call_at(self.sim.now, next_job),
                                    depth=depth)

        for _ in range(min(lanes, len(queue))):
            next_job()
        self.sim.run()

    def run_withheld(self, jobs: Sequence[TransferJob], depth: int | None = None) -> list[PendingTransfer]:
        """Execute transfers on-chain but keep their tags off the ledger."""
        before = len(self.pending)
        self.sim.call_at(self.sim.now, lambda: [self.start_transfer(j, depth=depth, commit=False) for j in jobs])
        self.sim.run()
        return self.pending[before:]

    def tag_owner(self, key: bytes, role: str = "A") -> int:
        a, b = self.truth[key]
        return a if role == "A" else b


def identity_fingerprint(pk: GroupElement) -> bytes:
    return sha256(pk.encode())
