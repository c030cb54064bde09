"""Attack battery run against the assembled system: forgery, replay,
linkability games without the trapdoor, threshold bypass and
post-disclosure impersonation, plus mutation suites for each proof system."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np
from scipy.stats import binomtest

from . import auditor
from .algebra import (
    CTX_CTRL,
    GENERATORS,
    Address,
    G,
    GroupElement,
    Scalar,
    SchnorrSignature,
    Writer,
    derive_address,
)
from .chainsim import AuditLedger
from .errors import BadShareProof, BelowThreshold, VeilAuditError
from .linktag import LinkCiphertext, encrypt_link, equality_test, extract_pseudonym
from .bench import WorkloadSpec, build_corpus, make_jobs
from .nizk import (
    ControlProof,
    DleqProof,
    LinkProof,
    LinkStatement,
    PedersenCommitment,
    prove_ctrl,
    prove_dleq,
    prove_link,
    simulate_link,
    verify_ctrl,
    verify_dleq,
    verify_link,
)
from .protocols import AnonSession, FinalizedTransfer, MasterIdentity, PendingTransfer, World, authorize, build_tag
from .tags import AuditTag, BridgeMessage, PartyBundle, TransferPayload, message_id
from .threshold import (
    AuthorityShare,
    ThresholdKeyset,
    UidCiphertext,
    combine,
    encrypt_uid,
    lagrange_at_zero,
    partial_decrypt,
)

ADVANTAGE_BAND = 0.02
CONTROL_FLOOR = 0.48


@dataclass
class AttackOutcome:
    attack_id: str
    attempts: int
    successes: int
    detail: dict[str, int] = field(default_factory=dict)
    name: str = ""
    advantage: float | None = None
    ci: tuple[float, float] | None = None
    passed: bool = False
    extra: dict = field(default_factory=dict)


def _submit(ledger: AuditLedger, tag: AuditTag | bytes) -> str | None:
    """None on acceptance, otherwise the rejection reason."""
    try:
        if isinstance(tag, bytes):
            tag = AuditTag.from_bytes(tag)
        ledger.append(tag)
    except (VeilAuditError, ValueError) as exc:
        return type(exc).__name__
    return None


def _tally(outcome_id: str, name: str, reasons: Sequence[str | None], **extra) -> AttackOutcome:
    succ = sum(r is None for r in reasons)
    detail = dict(sorted(Counter(r or "ACCEPTED" for r in reasons).items()))
    return AttackOutcome(outcome_id, len(reasons), succ, detail, name, passed=succ == 0, extra=extra)


def _rand_point(rng) -> GroupElement:
    return GroupElement.base_mul(Scalar.random(rng))


def _flip_bits(data: bytes, rng, flips: int = 1) -> bytes:
    buf = bytearray(data)
    for _ in range(flips):
        pos = int(rng.integers(0, len(buf) * 8))
        buf[pos // 8] ^= 1 << (pos % 8)
    return bytes(buf)


@dataclass
class AdversaryView:
    """Everything public: ledger contents, keys, and finalized-but-untagged transfers."""

    ledger: AuditLedger
    committed: list[AuditTag]
    pending: list[FinalizedTransfer]
    chain_ids: list[bytes]

    @classmethod
    def of(cls, world: World, pending: Sequence[PendingTransfer]) -> "AdversaryView":
        return cls(world.ledger, list(world.ledger.records.values()), [p.transfer for p in pending],
                   world.chain_ids)


def _fabricated_bundle(view: AdversaryView, binding: bytes, rng) -> PartyBundle:
    led = view.ledger
    uid = UidCiphertext(_rand_point(rng), _rand_point(rng))
    com = PedersenCommitment(_rand_point(rng))
    ct = LinkCiphertext(_rand_point(rng), _rand_point(rng))
    st = LinkStatement(com.C, uid.c1, uid.c2, ct.c1, ct.c2, led.tpk, led.apk, binding)
    ann, z = simulate_link(st, Scalar.random(rng), rng)
    sig = SchnorrSignature(Scalar.random(rng), Scalar.random(rng))
    return PartyBundle(uid, com, ct, LinkProof(*ann, *z), _rand_point(rng), sig)


def _own_session(rng) -> AnonSession:
    sk = Scalar.random_nonzero(rng)
    pk = GroupElement.base_mul(sk)
    return AnonSession(b"", sk, pk, derive_address(pk), b"")


def attack_forgery(view: AdversaryView, attempts: int = 1000, seed=0) -> AttackOutcome:
    """Attack I: fabrication, field transplant and bit mutation against the ledger."""
    rng = np.random.default_rng(seed)
    reasons = []
    for i in range(attempts):
        kind = i % 5
        pend = view.pending[int(rng.integers(len(view.pending)))]
        body = TransferPayload.from_bytes(pend.message.payload)
        donor = view.committed[int(rng.integers(len(view.committed)))]
        if kind == 0:  # fresh fabrication on a real, untagged transfer
            tag = build_tag(_fabricated_bundle(view, body.sender.raw, rng),
                            _fabricated_bundle(view, body.recipient.raw, rng), pend)
        elif kind == 1:  # fabricated execution evidence for a transfer that never happened
            src, dst = view.chain_ids[0], view.chain_ids[1]
            txid, seq = rng.bytes(32), int(rng.integers(1 << 30))
            atts = tuple((j, SchnorrSignature(Scalar.random(rng), Scalar.random(rng))) for j in range(4))
            msg = BridgeMessage(message_id(src, txid, seq, dst), src, txid, seq, dst, donor.exec.message.payload,
                                donor.exec.message.required_depth, atts)
            tag = build_tag(donor.party_a, donor.party_b, FinalizedTransfer(src, txid, dst, rng.bytes(32), msg, 0))
        elif kind == 2:  # transplant honest bundles onto an untagged transfer
            other = view.committed[int(rng.integers(len(view.committed)))]
            tag = build_tag(donor.party_a, other.party_b, pend)
        elif kind == 3:  # transplant re-authorized under an attacker-owned address key
            sess = _own_session(rng)
            tag = build_tag(authorize(donor.party_a, sess), donor.party_b, pend)
        else:  # bit mutation of a committed tag
            reasons.append(_submit(view.ledger, _flip_bits(donor.to_bytes(), rng, 1 + int(rng.integers(3)))))
            continue
        reasons.append(_submit(view.ledger, tag))
    return _tally("I", "forgery", reasons)


def attack_replay(ledger: AuditLedger, corpus: Sequence[AuditTag], chain_ids: Sequence[bytes]) -> AttackOutcome:
    """Attack II: each tag verbatim, with only ts changed, and rerouted to another destination."""
    reasons = []
    for i, tag in enumerate(corpus):
        core = tag.core
        reasons.append(_submit(ledger, tag))
        reasons.append(_submit(ledger, replace(tag, core=replace(core, ts=core.ts + 1 + i))))
        other = next(c for c in chain_ids if c != core.cid_dst)
        if i % 2 == 0:
            moved = replace(tag, core=replace(core, cid_dst=other))
        else:
            m = tag.exec.message
            msg = replace(m, dst_chain=other, msg_id=message_id(m.src_chain, m.src_txid, m.seq, other))
            moved = replace(tag, core=replace(core, cid_dst=other, msg_id=msg.msg_id),
                            exec=replace(tag.exec, message=msg, nullifier=msg.nullifier()))
        reasons.append(_submit(ledger, moved))
    return _tally("II", "replay", reasons)


# -- linkability games ------------------------------------------------------


@dataclass
class TagSource:
    """Committed tags with their ground-truth party-A owners and L1 metadata."""

    tags: list[AuditTag]
    owners: list[int]
    heights: list[int]
    amounts: list[int]

    @classmethod
    def of(cls, world: World) -> "TagSource":
        tags, owners, heights, amounts = [], [], [], []
        for k, tag in world.ledger.records.items():
            tags.append(tag)
            owners.append(world.truth[k][0])
            src = world.network.chain(tag.core.cid_src)
            heights.append(src.included[tag.core.txid_src][0])
            amounts.append(TransferPayload.from_bytes(tag.exec.message.payload).amount)
        return cls(tags, owners, heights, amounts)

    def by_owner(self) -> dict[int, list[int]]:
        out: dict[int, list[int]] = {}
        for i, o in enumerate(self.owners):
            out.setdefault(o, []).append(i)
        return out

    def draw_pairs(self, trials: int, rng) -> list[tuple[int, int, int]]:
        groups = self.by_owner()
        multi = sorted(o for o, g in groups.items() if len(g) >= 2)
        out = []
        for _ in range(trials):
            b = int(rng.integers(2))
            if b:
                g = groups[multi[int(rng.integers(len(multi)))]]
                i, j = rng.choice(len(g), 2, replace=False)
                out.append((g[i], g[j], 1))
            else:
                while True:
                    i, j = (int(v) for v in rng.integers(0, len(self.tags), 2))
                    if self.owners[i] != self.owners[j]:
                        break
                out.append((i, j, 0))
        return out


def _amount_bucket(a: int) -> int:
    return len(str(a))


def _byte_hist(tag: AuditTag) -> np.ndarray:
    w = Writer()
    tag.party_a.write(w)
    return np.bincount(np.frombuffer(w.getvalue(), dtype=np.uint8), minlength=256)


def _features(src: TagSource) -> dict[str, Callable[[int, int], float]]:
    fields = [t.party_a.fields() | {"b." + k: v for k, v in t.party_b.fields().items()} for t in src.tags]
    values = [set(f.values()) for f in fields]
    hists: dict[int, np.ndarray] = {}

    def hist(i):
        if i not in hists:
            hists[i] = _byte_hist(src.tags[i])
        return hists[i]

    return {
        "field_equality": lambda i, j: float(len(values[i] & values[j])),
        "byte_histogram": lambda i, j: float(np.abs(hist(i) - hist(j)).sum()),
        "timestamp_delta": lambda i, j: float(abs(src.tags[i].core.ts - src.tags[j].core.ts)),
        "inclusion_height_delta": lambda i, j: float(abs(src.heights[i] - src.heights[j])),
        "amount_bucket": lambda i, j: float(_amount_bucket(src.amounts[i]) != _amount_bucket(src.amounts[j])),
    }


def _fit_threshold(stat: Callable, calib: Sequence[tuple[int, int, int]]) -> Callable[[int, int], int]:
    """Median split with the direction taken from class means on calibration pairs."""
    xs = np.array([stat(i, j) for i, j, _ in calib])
    ys = np.array([b for _, _, b in calib])
    thr = float(np.median(xs))
    same_low = xs[ys == 1].mean() <= xs[ys == 0].mean() if ys.any() and (~ys.astype(bool)).any() else True
    if same_low:
        return lambda i, j: int(stat(i, j) < thr)
    return lambda i, j: int(stat(i, j) > thr)


def _advantage(correct: int, trials: int, name: str, attack_id: str, control: bool = False) -> AttackOutcome:
    ci = binomtest(correct, trials).proportion_ci(0.95, method="wilson")
    adv = abs(correct / trials - 0.5)
    lo, hi = ci.low - 0.5, ci.high - 0.5
    adv_ci = (0.0 if lo <= 0 <= hi else min(abs(lo), abs(hi)), max(abs(lo), abs(hi)))
    passed = adv >= CONTROL_FLOOR if control else adv <= ADVANTAGE_BAND
    return AttackOutcome(attack_id, trials, correct, {}, name, adv, adv_ci, passed,
                         {"pr_correct": correct / trials})


def game_aol(src: TagSource, trials: int = 10_000, seed=0, ask: Scalar | None = None,
             calibration: int = 1000) -> list[AttackOutcome]:
    """Same-user vs different-user game against each trapdoor-less baseline;
    with ``ask`` given, also the trapdoor control arm."""
    rng = np.random.default_rng(seed)
    calib = src.draw_pairs(calibration, np.random.default_rng([seed, 1]))
    pairs = src.draw_pairs(trials, rng)
    feats = _features(src)
    deciders = {"field_equality": lambda i, j: int(feats["field_equality"](i, j) > 0)}
    for name in ("byte_histogram", "timestamp_delta", "inclusion_height_delta", "amount_bucket"):
        deciders[name] = _fit_threshold(feats[name], calib)
    out = []
    for name, decide in deciders.items():
        correct = sum(decide(i, j) == b for i, j, b in pairs)
        aid = "III" if name in ("timestamp_delta", "inclusion_height_delta", "amount_bucket") else "AOL"
        out.append(_advantage(correct, trials, name, aid))
    if ask is not None:
        pseudo: dict[int, bytes] = {}

        def L(i):
            if i not in pseudo:
                pseudo[i] = extract_pseudonym(ask, src.tags[i].party_a.ct_link).encode()
            return pseudo[i]

        correct = sum(int(L(i) == L(j)) == b for i, j, b in pairs)
        out.append(_advantage(correct, trials, "trapdoor_control", "AOL", control=True))
    return out


def partition_game(src: TagSource, trials: int = 100, users: int = 5, per_user: int = 4, seed=0) -> AttackOutcome:
    """Attack IV: cluster k tags without the trapdoor; scored by ARI against truth."""
    rng = np.random.default_rng(seed)
    groups = {o: g for o, g in src.by_owner().items() if len(g) >= 2}
    owners = sorted(groups)
    guessers = {
        "amount_bucket": lambda i: _amount_bucket(src.amounts[i]),
        "inclusion_height": lambda i: src.heights[i] // 4,
        "byte_histogram_argmax": lambda i: int(np.argmax(_byte_hist(src.tags[i]))),
    }
    scores: dict[str, list[float]] = {k: [] for k in guessers}
    for _ in range(trials):
        chosen = rng.choice(len(owners), users, replace=False)
        members = []
        for c in chosen:
            g = groups[owners[c]]
            take = rng.choice(len(g), min(per_user, len(g)), replace=False)
            members.extend(g[t] for t in take)
        truth = {i: src.owners[i] for i in members}
        for name, key in guessers.items():
            scores[name].append(auditor.ari(truth, {i: key(i) for i in members}))
    means = {k: float(np.mean(v)) for k, v in scores.items()}
    worst = max(means.values())
    return AttackOutcome("IV", trials, 0, {}, "partition_guess", worst, None, worst <= ADVANTAGE_BAND,
                         {"mean_ari": means})


# -- committee --------------------------------------------------------------


def attack_unauthorized_reveal(keyset: ThresholdKeyset, shares: Sequence[AuthorityShare],
                               uids: Sequence[UidCiphertext], truth: Sequence[GroupElement], coalition_size: int,
                               guesses: int = 1000, seed=0) -> AttackOutcome:
    """Attack V: a coalition below threshold tries to combine, then to brute-force the missing shares."""
    if coalition_size >= keyset.t:
        raise ValueError("coalition must be below threshold")
    rng = np.random.default_rng(seed)
    coalition = list(shares[:coalition_size])
    refusals = recoveries = 0
    for uid, pk in zip(uids, truth):
        try:
            got = combine(keyset, uid, [partial_decrypt(s, uid) for s in coalition])
            recoveries += got == pk
        except BelowThreshold:
            refusals += 1
    missing = [i for i in range(1, keyset.n + 1) if i not in {s.index for s in coalition}][: keyset.t - coalition_size]
    lam = lagrange_at_zero([s.index for s in coalition] + missing)
    uid, pk = uids[0], truth[0]
    known = GroupElement.identity()
    for s in coalition:
        known = known + lam[s.index] * (s.secret * uid.c1)
    brute_hits = 0
    for _ in range(guesses):
        mask = known
        for i in missing:
            mask = mask + lam[i] * (Scalar.random(rng) * uid.c1)
        brute_hits += (uid.c2 - mask) == pk
    # control arms: a full quorum recovers, a quorum with one corrupted share is caught
    quorum = list(shares[: keyset.t])
    control = sum(combine(keyset, u, [partial_decrypt(s, u) for s in quorum]) == p for u, p in zip(uids, truth))
    caught = 0
    for u in uids:
        bad = [AuthorityShare(quorum[0].index, quorum[0].secret + Scalar(1))] + quorum[1:]
        try:
            combine(keyset, u, [partial_decrypt(s, u) for s in bad])
        except BadShareProof:
            caught += 1
    succ = recoveries + brute_hits
    return AttackOutcome("V", len(uids) + guesses, succ, {"BelowThreshold": refusals, "brute_hits": brute_hits},
                         "unauthorized_reveal", passed=succ == 0 and refusals == len(uids),
                         extra={"control_recovered": control, "corrupted_caught": caught, "uids": len(uids)})


def attack_post_disclosure(ledger: AuditLedger, victim_pk: GroupElement, victim_tags: Sequence[AuditTag],
                           own: Sequence[PendingTransfer], attempts: int = 1000, seed=0,
                           ask: Scalar | None = None) -> AttackOutcome:
    """Attack VI: with the victim's PK_id and old tags, try to get a tag accepted
    on the attacker's own transfers that carries the victim's pseudonym."""
    rng = np.random.default_rng(seed)
    tpk, apk = ledger.tpk, ledger.apk
    attacker = MasterIdentity.generate(rng)
    reasons = []
    for i in range(attempts):
        pend = own[i % len(own)]
        sess = pend.session_a
        old = victim_tags[i % len(victim_tags)].party_a
        binding = sess.addr_anon.raw
        kind = i % 4
        if kind == 0:  # transplant the victim's bundle
            bundle = authorize(old, sess)
        else:
            k, r, s = (Scalar.random_nonzero(rng) for _ in range(3))
            uid = encrypt_uid(tpk, victim_pk, k)
            com = PedersenCommitment(victim_pk + r * GENERATORS.H)
            ct = LinkCiphertext(old.ct_link.c1 + GroupElement.base_mul(s), old.ct_link.c2 + s * apk)
            st = LinkStatement(com.C, uid.c1, uid.c2, ct.c1, ct.c2, tpk, apk, binding)
            if kind == 1:  # simulated proof, challenge cannot match
                ann, z = simulate_link(st, Scalar.random(rng), rng)
                proof = LinkProof(*ann, *z)
            elif kind == 2:  # honest prover run with the attacker's own x
                proof = prove_link(attacker.x, r, k, s, st, check=False)
            else:  # attacker's valid proof for its own statement, victim's ciphertext swapped in
                own_ct = encrypt_link(apk, attacker.x, s, L=attacker.L)
                own_uid = encrypt_uid(tpk, attacker.PK_id, k)
                own_com = PedersenCommitment(attacker.PK_id + r * GENERATORS.H)
                st_own = LinkStatement(own_com.C, own_uid.c1, own_uid.c2, own_ct.c1, own_ct.c2, tpk, apk, binding)
                proof = prove_link(attacker.x, r, k, s, st_own)
            bundle = authorize(PartyBundle(uid, com, ct, proof, sess.pk_anon, old.auth), sess)
        reasons.append(_submit(ledger, build_tag(bundle, pend.tag.party_b, pend.transfer)))
    out = _tally("VI", "post_disclosure", reasons)
    # control arm: the attacker's own honest tags are accepted and stay unlinked from the victim
    accepted = separate = 0
    for pend in own:
        if _submit(ledger, pend.tag) is None:
            accepted += 1
            if ask is not None:
                separate += not equality_test(ask, pend.tag.party_a.ct_link, victim_tags[0].party_a.ct_link)
    out.extra = {"control_accepted": accepted, "control_separate": separate, "control_total": len(own)}
    return out


# -- proof-system mutation suites -------------------------------------------


def _scalar_bump(z: Scalar, rng) -> Scalar:
    return z + Scalar(1 + int(rng.integers(1, 1 << 30)))


def proof_suite(kind: str, completeness: int = 1000, mutations: int = 1000, seed=0) -> AttackOutcome:
    """Honest proofs must all verify; every mutated (proof, statement) must be rejected."""
    rng = np.random.default_rng(seed)
    if kind == "ctrl":
        def make():
            sk = Scalar.random_nonzero(rng)
            addr, nonce = derive_address(GroupElement.base_mul(sk)), rng.bytes(16)
            return (addr, nonce), prove_ctrl(sk, addr, nonce)

        def check(st, proof):
            return verify_ctrl(st[0], st[1], proof)

        def mutate_statement(st):
            addr, nonce = st
            if rng.integers(2):
                return (Address(_flip_bits(addr.raw, rng)), nonce)
            return (addr, _flip_bits(nonce, rng))

        def mutate_response(proof):
            s = proof.sig
            return ControlProof(proof.pk_anon, SchnorrSignature(s.commitment_hash, _scalar_bump(s.response, rng)))

        parse = ControlProof.from_bytes
    elif kind == "link":
        tpk, apk = _rand_point(rng), _rand_point(rng)

        def make():
            x, r, k, s = (Scalar.random_nonzero(rng) for _ in range(4))
            com = x * G + r * GENERATORS.H
            st = LinkStatement(com, k * G, x * G + k * tpk, s * G, x * GENERATORS.J + s * apk, tpk, apk,
                               rng.bytes(20))
            return st, prove_link(x, r, k, s, st)

        check = verify_link

        def mutate_statement(st):
            name = ("com", "uid_c1", "uid_c2", "link_c1", "link_c2", "tpk", "apk", "binding")[int(rng.integers(8))]
            if name == "binding":
                return replace(st, binding=_flip_bits(st.binding, rng))
            return replace(st, **{name: getattr(st, name) + G})

        def mutate_response(proof):
            z = list(proof.responses)
            j = int(rng.integers(4))
            z[j] = _scalar_bump(z[j], rng)
            return LinkProof(*proof.announcements, *z)

        parse = LinkProof.from_bytes
    elif kind == "dleq":
        def make():
            w = Scalar.random_nonzero(rng)
            B2 = _rand_point(rng)
            return (w * G, w * B2, G, B2), prove_dleq(w, G, B2)

        def check(st, proof):
            return verify_dleq(*st, proof)

        def mutate_statement(st):
            j = int(rng.integers(4))
            lst = list(st)
            lst[j] = lst[j] + G
            return tuple(lst)

        def mutate_response(proof):
            return DleqProof(proof.A1, proof.A2, _scalar_bump(proof.z, rng))

        parse = DleqProof.from_bytes
    else:
        raise ValueError(f"unknown proof kind {kind!r}")

    honest = [make() for _ in range(completeness)]
    complete = sum(bool(check(st, pf)) for st, pf in honest)
    reasons = []
    for i in range(mutations):
        st, pf = honest[i % len(honest)]
        m = i % 3
        if m == 0:
            try:
                mutated = parse(_flip_bits(pf.to_bytes(), rng))
            except (VeilAuditError, ValueError) as exc:
                reasons.append(type(exc).__name__)
                continue
            ok = check(st, mutated)
        elif m == 1:
            ok = check(mutate_statement(st), pf)
        else:
            ok = check(st, mutate_response(pf))
        reasons.append(None if ok else "rejected")
    out = _tally(kind, f"proof_suite_{kind}", reasons, completeness=complete, completeness_trials=completeness)
    out.passed = out.successes == 0 and complete == completeness
    return out


# -- full battery -----------------------------------------------------------


@dataclass
class SuiteConfig:
    B: int = 2000
    S: int = 500
    withheld: int = 40
    forgery_attempts: int = 1000
    impersonation_attempts: int = 1000
    game_trials: int = 10_000
    partition_trials: int = 100
    reveal_uids: int = 100
    reveal_guesses: int = 1000
    proof_trials: int = 1000
    seed: int = 0


def run_attack_suite(cfg: SuiteConfig | None = None) -> list[AttackOutcome]:
    cfg = cfg or SuiteConfig()
    spec = WorkloadSpec(B=cfg.B, S=cfg.S, k_bar=cfg.B / cfg.S, seed=cfg.seed)
    world = build_corpus(spec, cache=False).world
    out: list[AttackOutcome] = []
    src = TagSource.of(world)

    out.extend(game_aol(src, cfg.game_trials, cfg.seed, ask=world.et.ask))
    out.append(partition_game(src, cfg.partition_trials, seed=cfg.seed))

    committed = list(world.ledger.records.values())
    out.append(attack_replay(world.ledger, committed, world.chain_ids))

    jobs = make_jobs(replace(spec, seed=cfg.seed + 1), world.chain_ids)[: cfg.withheld]
    pending = world.run_withheld(jobs)
    out.append(attack_forgery(AdversaryView.of(world, pending), cfg.forgery_attempts, cfg.seed))

    # the attacker joins as a fresh user and runs its own (untagged) transfers
    world.add_users(1)
    attacker = len(world.users) - 1
    victim = world.truth[next(iter(world.ledger.records))][0]
    victim_tags = [t for k, t in world.ledger.records.items() if world.truth[k][0] == victim]
    own_jobs = [replace(j, user_a=attacker) for j in jobs[:10]]
    own = world.run_withheld(own_jobs)
    out.append(attack_post_disclosure(world.ledger, world.users[victim].PK_id, victim_tags, own,
                                      cfg.impersonation_attempts, cfg.seed, ask=world.et.ask))

    rng = np.random.default_rng(cfg.seed)
    ks, shares = world.keyset, world.shares
    pks = [MasterIdentity.generate(rng).PK_id for _ in range(cfg.reveal_uids)]
    uids = [encrypt_uid(ks.tpk, pk, Scalar.random_nonzero(rng)) for pk in pks]
    out.append(attack_unauthorized_reveal(ks, shares, uids, pks, ks.t - 1, cfg.reveal_guesses, cfg.seed))

    for kind in ("ctrl", "link", "dleq"):
        out.append(proof_suite(kind, cfg.proof_trials, cfg.proof_trials, cfg.seed))
    return out
