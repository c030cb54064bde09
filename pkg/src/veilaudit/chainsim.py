"""Deterministic in-process simulation of Layer-1 chains, an attested
bridge and the Layer-2 audit ledger, all on a virtual millisecond clock."""
from __future__ import annotations

import heapq
import itertools
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np

from .algebra import CTX_CTRL, CTX_EXEC, Address, derive_address, GroupElement, Scalar, Writer, schnorr_sign, schnorr_verify
from .errors import (
    AlreadyReleased,
    BadExecAttestation,
    BadLinkProof,
    DuplicateKey,
    DuplicateMessage,
    DuplicateNullifier,
    InsufficientAttestations,
    InsufficientFunds,
    MalformedEncoding,
    NotYetFinal,
    ProofRejected,
    UnknownChain,
    UnknownDeposit,
)
from .nizk import ControlProof, verify_ctrl, verify_link
from .tags import (
    AuditTag,
    BridgeMessage,
    IdentityRevealed,
    TagCommitted,
    TransferPayload,
    message_id,
    sha256,
)


@dataclass(frozen=True)
class Transaction:
    sender: bytes
    nonce: int
    kind: str
    payload: bytes

    def to_bytes(self) -> bytes:
        return Writer().var(self.sender).u64(self.nonce).var(self.kind.encode()).var(self.payload).getvalue()

    @property
    def txid(self) -> bytes:
        return sha256(self.to_bytes())


@dataclass(frozen=True)
class Block:
    height: int
    time_ms: int
    txids: tuple[bytes, ...]


class SimChain:
    """A chain that produces a block every ``block_interval_ms`` of virtual time.

    A block at time t includes every mempool entry submitted strictly
    before t, in submission order.
    """

    def __init__(self, chain_id: bytes, block_interval_ms: int = 500, finality_depth: int = 1):
        if block_interval_ms <= 0:
            raise ValueError("block interval must be positive")
        self.chain_id = chain_id
        self.block_interval_ms = block_interval_ms
        self.finality_depth = finality_depth
        self.blocks: list[Block] = [Block(0, 0, ())]
        self.clock_ms = 0
        self.mempool: deque[tuple[bytes, int]] = deque()
        self.txs: dict[bytes, Transaction] = {}
        self.submitted_at: dict[bytes, int] = {}
        self.included: dict[bytes, tuple[int, int]] = {}
        self.balances: dict[bytes, int] = {}
        self.minted = 0
        self.escrows: dict[bytes, EscrowContract] = {}

    @property
    def height(self) -> int:
        return self.blocks[-1].height

    def next_block_time(self) -> int:
        return self.clock_ms + self.block_interval_ms

    def submit_tx(self, tx: Transaction, at_ms: int) -> bytes:
        txid = tx.txid
        self.txs[txid] = tx
        self.submitted_at[txid] = at_ms
        self.mempool.append((txid, at_ms))
        return txid

    def produce_block(self) -> Block:
        t = self.next_block_time()
        take, keep = [], deque()
        for txid, at in self.mempool:
            if at < t:
                take.append(txid)
            else:
                keep.append((txid, at))
        self.mempool = keep
        block = Block(self.height + 1, t, tuple(take))
        self.blocks.append(block)
        self.clock_ms = t
        for txid in take:
            self.included[txid] = (block.height, t)
        return block

    def advance_to(self, t_ms: int) -> list[Block]:
        out = []
        while self.next_block_time() <= t_ms:
            out.append(self.produce_block())
        return out

    def confirmations(self, txid: bytes) -> int | None:
        inc = self.included.get(txid)
        if inc is None:
            return None
        return self.height - inc[0]

    def is_final(self, txid: bytes, depth: int | None = None) -> bool:
        conf = self.confirmations(txid)
        return conf is not None and conf >= (self.finality_depth if depth is None else depth)

    def reorg(self, n_blocks: int) -> list[bytes]:
        """Orphan the last ``n_blocks`` blocks; their txs go back to the mempool."""
        orphaned = []
        for _ in range(min(n_blocks, len(self.blocks) - 1)):
            block = self.blocks.pop()
            orphaned[:0] = block.txids
        for txid in orphaned:
            del self.included[txid]
        self.mempool = deque([(t, self.submitted_at[t]) for t in orphaned] + list(self.mempool))
        return orphaned

    # -- balances --
    def mint(self, account: bytes, amount: int) -> None:
        self.balances[account] = self.balances.get(account, 0) + amount
        self.minted += amount

    def balance(self, account: bytes) -> int:
        return self.balances.get(account, 0)

    def debit(self, account: bytes, amount: int) -> None:
        if amount < 0:
            raise ValueError("negative amount")
        if self.balance(account) < amount:
            raise InsufficientFunds(f"balance {self.balance(account)} < {amount}")
        self.balances[account] -= amount

    def credit(self, account: bytes, amount: int) -> None:
        self.balances[account] = self.balances.get(account, 0) + amount

    def transfer(self, src: bytes, dst: bytes, amount: int) -> None:
        self.debit(src, amount)
        self.credit(dst, amount)

    def conserved(self) -> bool:
        held = sum(e.total_held() for e in self.escrows.values())
        return self.minted == sum(self.balances.values()) + held


class EscrowContract:
    """Neutral escrow: funds leave only to an address whose key-control proof
    verifies against the deposit's session nonce."""

    def __init__(self, escrow_id: bytes, chain: SimChain):
        self.escrow_id = escrow_id
        self.chain = chain
        self.held: dict[bytes, tuple[int, bytes]] = {}
        self.released: set[bytes] = set()
        chain.escrows[escrow_id] = self

    def session_nonce(self, deposit_id: bytes) -> bytes:
        return sha256(b"VEILAUDIT/ESCROW/v1" + self.chain.chain_id + self.escrow_id + deposit_id)

    def deposit(self, deposit_id: bytes, depositor: bytes, amount: int) -> bytes:
        if deposit_id in self.held or deposit_id in self.released:
            raise ValueError("deposit id already used")
        self.chain.debit(depositor, amount)
        self.held[deposit_id] = (amount, depositor)
        return self.session_nonce(deposit_id)

    def release(self, deposit_id: bytes, proof: ControlProof, dest: Address) -> int:
        if deposit_id in self.released:
            raise AlreadyReleased(deposit_id.hex())
        if deposit_id not in self.held:
            raise UnknownDeposit(deposit_id.hex())
        if not verify_ctrl(dest, self.session_nonce(deposit_id), proof):
            raise ProofRejected("control proof does not verify for this address and deposit")
        amount, _ = self.held.pop(deposit_id)
        self.released.add(deposit_id)
        self.chain.credit(dest.raw, amount)
        return amount

    def total_held(self) -> int:
        return sum(a for a, _ in self.held.values())


class Network:
    def __init__(self, chains: Iterable[SimChain] = ()):
        self.chains: dict[bytes, SimChain] = {}
        for c in chains:
            self.add(c)

    def add(self, chain: SimChain) -> SimChain:
        self.chains[chain.chain_id] = chain
        return chain

    def chain(self, chain_id: bytes) -> SimChain:
        try:
            return self.chains[chain_id]
        except KeyError:
            raise UnknownChain(chain_id) from None

    def submit_tx(self, chain_id: bytes, tx: Transaction, at_ms: int) -> bytes:
        return self.chain(chain_id).submit_tx(tx, at_ms)

    def advance_to(self, t_ms: int) -> None:
        for c in self.chains.values():
            c.advance_to(t_ms)


# -- bridge -----------------------------------------------------------------


def verify_attestations(msg: BridgeMessage, relayer_pks: list[GroupElement], t_relay: int) -> bool:
    """At least ``t_relay`` distinct registered relayers signed the message digest."""
    digest = msg.digest()
    good = set()
    for idx, sig in msg.attestations:
        if idx in good or not 0 <= idx < len(relayer_pks):
            continue
        if schnorr_verify(relayer_pks[idx], CTX_EXEC, digest, sig):
            good.add(idx)
    return len(good) >= t_relay


class Bridge:
    """t-of-n relayer set with per-source sequence numbers and destination
    de-duplication of message ids."""

    def __init__(self, t_relay: int = 3, n_relay: int = 4, relay_delay_ms: int = 0, seed=0):
        if not 1 <= t_relay <= n_relay:
            raise ValueError("need 1 <= t_relay <= n_relay")
        rng = np.random.default_rng(seed)
        self.t_relay = t_relay
        self._keys = [Scalar.random_nonzero(rng) for _ in range(n_relay)]
        self.relayer_pks = [GroupElement.base_mul(k) for k in self._keys]
        self.relay_delay_ms = relay_delay_ms
        self._seq_of: dict[tuple[bytes, bytes], int] = {}
        self._next_seq: dict[bytes, int] = {}
        self.delivered: set[tuple[bytes, bytes]] = set()

    @property
    def n_relay(self) -> int:
        return len(self._keys)

    def seq_for(self, src_chain: bytes, txid: bytes) -> int:
        key = (src_chain, txid)
        if key not in self._seq_of:
            seq = self._next_seq.get(src_chain, 0)
            self._next_seq[src_chain] = seq + 1
            self._seq_of[key] = seq
        return self._seq_of[key]

    def relay(self, network: Network, src_chain: bytes, txid: bytes, dst_chain: bytes,
              payload: bytes, depth: int, signers: Iterable[int] | None = None) -> BridgeMessage:
        src = network.chain(src_chain)
        network.chain(dst_chain)
        conf = src.confirmations(txid)
        if conf is None or conf < depth:
            raise NotYetFinal(f"{conf} confirmations, need {depth}")
        seq = self.seq_for(src_chain, txid)
        unsigned = BridgeMessage(message_id(src_chain, txid, seq, dst_chain), src_chain, txid, seq,
                                 dst_chain, payload, depth)
        digest = unsigned.digest()
        idx = range(self.n_relay) if signers is None else sorted(set(signers))
        atts = tuple((i, schnorr_sign(self._keys[i], CTX_EXEC, digest)) for i in idx)
        if len(atts) < self.t_relay:
            raise InsufficientAttestations(f"{len(atts)} attestations, need {self.t_relay}")
        return BridgeMessage(unsigned.msg_id, src_chain, txid, seq, dst_chain, payload, depth, atts)

    def deliver(self, network: Network, msg: BridgeMessage, at_ms: int) -> bytes:
        """Verify on the destination gateway and post the inbound transaction."""
        if not verify_attestations(msg, self.relayer_pks, self.t_relay):
            raise InsufficientAttestations("attestation set does not verify")
        key = (msg.dst_chain, msg.msg_id)
        if key in self.delivered:
            raise DuplicateMessage(msg.msg_id.hex())
        dst = network.chain(msg.dst_chain)
        self.delivered.add(key)
        tx = Transaction(b"gateway:" + msg.src_chain, msg.seq, "bridge_in", msg.msg_id + msg.payload)
        return dst.submit_tx(tx, at_ms)


# -- audit ledger -----------------------------------------------------------


@dataclass
class AuditLedger:
    """Append-only tag store keyed by the dedup key, with a nullifier set.

    ``network`` (optional) lets the ledger check source finality and the
    destination transaction against chain state, as a light client would.
    """

    relayer_pks: list[GroupElement]
    t_relay: int
    tpk: GroupElement
    apk: GroupElement
    network: Network | None = None
    min_depth: int = 1
    records: dict[bytes, AuditTag] = field(default_factory=dict)
    nullifiers: set[bytes] = field(default_factory=set)
    events: list = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.records)

    def keys(self) -> list[bytes]:
        return list(self.records)

    def _check_exec(self, tag: AuditTag) -> None:
        core, msg = tag.core, tag.exec.message
        if (msg.src_chain, msg.src_txid, msg.dst_chain, msg.msg_id) != (
            core.cid_src, core.txid_src, core.cid_dst, core.msg_id
        ):
            raise BadExecAttestation("core does not match the attested message")
        if msg.msg_id != message_id(msg.src_chain, msg.src_txid, msg.seq, msg.dst_chain):
            raise BadExecAttestation("message id is not bound to (src, txid, seq, dst)")
        if msg.required_depth < self.min_depth:
            raise BadExecAttestation("confirmation depth below ledger policy")
        if tag.exec.nullifier != msg.nullifier():
            raise BadExecAttestation("nullifier does not match message")
        if not verify_attestations(msg, self.relayer_pks, self.t_relay):
            raise BadExecAttestation("relayer attestations do not verify")
        if self.network is not None:
            try:
                src = self.network.chain(core.cid_src)
                dst = self.network.chain(core.cid_dst)
            except KeyError:
                raise BadExecAttestation("unknown chain") from None
            if not src.is_final(core.txid_src, msg.required_depth):
                raise BadExecAttestation("source transaction not final")
            dtx = dst.txs.get(core.txid_dst)
            if dtx is None or core.txid_dst not in dst.included or not dtx.payload.startswith(core.msg_id):
                raise BadExecAttestation("destination transaction not found for this message")

    def _check_links(self, tag: AuditTag) -> None:
        try:
            body = TransferPayload.from_bytes(tag.exec.message.payload)
        except (MalformedEncoding, UnicodeDecodeError):
            raise BadLinkProof("transfer payload does not parse") from None
        for bundle, addr in ((tag.party_a, body.sender), (tag.party_b, body.recipient)):
            if not verify_link(bundle.statement(self.tpk, self.apk, addr.raw), bundle.pi_link):
                raise BadLinkProof("link proof rejected")
            if derive_address(bundle.pk_anon) != addr:
                raise BadLinkProof("bundle key does not own the transfer address")
            if not schnorr_verify(bundle.pk_anon, CTX_CTRL, bundle.auth_message(addr.raw), bundle.auth):
                raise BadLinkProof("bundle authorization rejected")

    def append(self, tag: AuditTag) -> bytes:
        """Verify and store; on any failure the ledger is unchanged."""
        k = tag.dedup_key()
        if k in self.records:
            raise DuplicateKey(k.hex())
        self._check_exec(tag)
        if tag.exec.nullifier in self.nullifiers:
            raise DuplicateNullifier(tag.exec.nullifier.hex())
        self._check_links(tag)
        self.records[k] = tag
        self.nullifiers.add(tag.exec.nullifier)
        self.events.append(TagCommitted(k, tag.digest()))
        return k

    def record_reveal(self, rec: IdentityRevealed) -> None:
        self.events.append(rec)

    def reveals(self) -> list[IdentityRevealed]:
        return [e for e in self.events if isinstance(e, IdentityRevealed)]

    # -- export --
    def export_lines(self) -> list[str]:
        """Line-delimited export: a header, one tag per line, then reveal records."""
        lines = [
            "keys " + " ".join([self.tpk.encode().hex(), self.apk.encode().hex()]),
            f"relayers {self.t_relay} " + " ".join(pk.encode().hex() for pk in self.relayer_pks),
        ]
        for e in self.events:
            if isinstance(e, TagCommitted):
                lines.append("tag " + self.records[e.key].to_bytes().hex())
            else:
                lines.append("reveal " + e.to_bytes().hex())
        return lines


def ledger_append(ledger: AuditLedger, tag: AuditTag) -> bytes:
    return ledger.append(tag)


def load_ledger(lines: Iterable[str]) -> tuple[AuditLedger, list[str]]:
    """Rebuild a ledger from an export, re-verifying every tag offline.

    Returns the ledger and a list of problems (empty when the export verifies).
    """
    problems: list[str] = []
    ledger: AuditLedger | None = None
    tpk = apk = None
    for n, line in enumerate(l.strip() for l in lines):
        if not line:
            continue
        kind, _, rest = line.partition(" ")
        if kind == "keys":
            a, b = rest.split()
            tpk, apk = GroupElement.decode(bytes.fromhex(a)), GroupElement.decode(bytes.fromhex(b))
        elif kind == "relayers":
            parts = rest.split()
            pks = [GroupElement.decode(bytes.fromhex(p)) for p in parts[1:]]
            ledger = AuditLedger(pks, int(parts[0]), tpk, apk)
        elif kind == "tag":
            if ledger is None:
                raise MalformedEncoding("tag before header")
            try:
                ledger.append(AuditTag.from_bytes(bytes.fromhex(rest)))
            except Exception as exc:  # noqa: BLE001 -- report every rejection
                problems.append(f"line {n + 1}: {type(exc).__name__}: {exc}")
        elif kind == "reveal":
            if ledger is None:
                raise MalformedEncoding("reveal before header")
            rec = IdentityRevealed.from_bytes(bytes.fromhex(rest))
            missing = [k for k in rec.tag_keys if k not in ledger.records]
            if missing:
                problems.append(f"line {n + 1}: reveal references unknown tags")
            ledger.record_reveal(rec)
        else:
            problems.append(f"line {n + 1}: unknown record kind {kind!r}")
    if ledger is None:
        raise MalformedEncoding("missing ledger header")
    return ledger, problems


# -- event scheduler --------------------------------------------------------


class Simulation:
    """Discrete-event driver. Chains tick on their own cadence; callers
    register callbacks on inclusion or on reaching a confirmation depth."""

    def __init__(self, network: Network):
        self.network = network
        self.now = 0
        self._heap: list = []
        self._seq = itertools.count()
        self._jobs = 0
        self._incl: dict[tuple[bytes, bytes], list[Callable]] = {}
        self._depth: dict[bytes, list[tuple[bytes, int, Callable]]] = {}
        for cid, chain in network.chains.items():
            self._push(chain.next_block_time(), 0, self._tick, cid)

    def _push(self, t, prio, fn, *args):
        heapq.heappush(self._heap, (t, prio, next(self._seq), fn, args))

    def call_at(self, t_ms: int, fn: Callable, *args) -> None:
        if t_ms < self.now:
            raise ValueError("cannot schedule in the past")
        self._jobs += 1
        self._push(t_ms, 1, self._job, fn, *args)

    def _job(self, fn, *args):
        self._jobs -= 1
        fn(*args)

    def when_included(self, chain_id: bytes, txid: bytes, cb: Callable) -> None:
        chain = self.network.chain(chain_id)
        if txid in chain.included:
            self.call_at(self.now, cb, chain.included[txid][1])
        else:
            self._incl.setdefault((chain_id, txid), []).append(cb)

    def when_confirmed(self, chain_id: bytes, txid: bytes, depth: int, cb: Callable) -> None:
        chain = self.network.chain(chain_id)
        if chain.is_final(txid, depth):
            self.call_at(self.now, cb, self.now)
        else:
            self._depth.setdefault(chain_id, []).append((txid, depth, cb))

    def _tick(self, cid: bytes) -> None:
        chain = self.network.chains[cid]
        block = chain.produce_block()
        for txid in block.txids:
            for cb in self._incl.pop((cid, txid), ()):
                cb(block.time_ms)
        waiting = self._depth.get(cid)
        if waiting:
            still = []
            for txid, depth, cb in waiting:
                if chain.is_final(txid, depth):
                    cb(block.time_ms)
                else:
                    still.append((txid, depth, cb))
            self._depth[cid] = still
        self._push(chain.next_block_time(), 0, self._tick, cid)

    def idle(self) -> bool:
        return self._jobs == 0 and not self._incl and not any(self._depth.values())

    def run(self, until_ms: int | None = None) -> None:
        """Process events until idle (or until ``until_ms`` if given)."""
        while self._heap:
            if until_ms is None and self.idle():
                return
            t = self._heap[0][0]
            if until_ms is not None and t > until_ms:
                self.now = until_ms
                return
            _, _, _, fn, args = heapq.heappop(self._heap)
            self.now = t
            fn(*args)
