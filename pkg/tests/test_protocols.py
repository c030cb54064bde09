import dataclasses

import numpy as np
import pytest

from veilaudit.algebra import G
from veilaudit.chainsim import EscrowContract, SimChain
from veilaudit.errors import BadLinkProof, InsufficientFunds, UnknownTag
from veilaudit.linktag import equality_test, et_keygen
from veilaudit.nizk import verify_link
from veilaudit.protocols import (
    MasterIdentity,
    RevealCase,
    ScenarioConfig,
    aip_run,
    aud_build_and_submit,
    authorize,
    new_session,
    build_tag,
    irp_run,
)
from veilaudit.tags import TagCommitted
from veilaudit.threshold import keygen

from helpers import committed_world, jobs_for, make_world


@pytest.fixture
def setup(rng):
    chain = SimChain(b"c")
    esc = EscrowContract(b"aip", chain)
    user = MasterIdentity.generate(rng)
    chain.mint(user.public_account, 1000)
    keyset, _ = keygen(2, 3, rng)
    et = et_keygen(rng)
    return chain, esc, user, keyset.tpk, et


def test_identity_construction(rng):
    u = MasterIdentity.generate(rng)
    assert u.PK_id == u.x * G
    assert u.PK_id != u.sk_master * G


def test_aip_completeness(setup, rng):
    chain, esc, user, tpk, et = setup
    session, bundle, receipt = aip_run(user, chain, esc, tpk, et.apk, 100, rng)
    assert verify_link(bundle.statement(tpk, et.apk, session.addr_anon.raw), bundle.pi_link)
    assert chain.balance(session.addr_anon.raw) == 100
    assert chain.balance(user.public_account) == 900
    assert chain.conserved() and esc.total_held() == 0
    assert receipt.dest == session.addr_anon


def test_two_runs_share_no_field_but_link(setup, rng):
    chain, esc, user, tpk, et = setup
    s1, b1, _ = aip_run(user, chain, esc, tpk, et.apk, 10, rng)
    s2, b2, _ = aip_run(user, chain, esc, tpk, et.apk, 10, rng)
    assert s1.addr_anon != s2.addr_anon
    f1, f2 = b1.fields(), b2.fields()
    assert not set(f1.values()) & set(f2.values())
    assert equality_test(et.ask, b1.ct_link, b2.ct_link)


def test_aip_insufficient_funds(setup, rng):
    chain, esc, user, tpk, et = setup
    with pytest.raises(InsufficientFunds):
        aip_run(user, chain, esc, tpk, et.apk, 1001, rng)
    assert chain.balance(user.public_account) == 1000


@pytest.fixture(scope="module")
def pending():
    w = make_world(users=4)
    return w, w.run_withheld(jobs_for(w, 3))


def test_aud_honest_and_event(pending):
    w, ps = pending
    p = ps[0]
    k = aud_build_and_submit(p.tag.party_a, p.tag.party_b, p.transfer, w.ledger)
    assert w.ledger.events[-1] == TagCommitted(k, w.ledger.records[k].digest())


def test_aud_bundle_transplant_rejected(pending):
    w, ps = pending
    p1, p2 = ps[1], ps[2]
    with pytest.raises(BadLinkProof):
        aud_build_and_submit(p2.tag.party_a, p1.tag.party_b, p1.transfer, w.ledger)
    with pytest.raises(BadLinkProof):
        aud_build_and_submit(p1.tag.party_b, p1.tag.party_a, p1.transfer, w.ledger)
    assert p1.tag.dedup_key() not in w.ledger.records


def test_bundle_rebinding_without_session_key_rejected(pending):
    # an observer re-signs someone else's bundle with its own key: the key
    # does not own the transfer address, so the ledger refuses
    w, ps = pending
    p = ps[1]
    thief = new_session(w.users[0], np.random.default_rng(1))
    stolen = authorize(p.tag.party_a, thief)
    with pytest.raises(BadLinkProof):
        w.ledger.append(build_tag(stolen, p.tag.party_b, p.transfer))


@pytest.fixture(scope="module")
def world():
    return committed_world(users=5, transfers=15, seed=21)


def test_one_tag_per_transfer(world):
    assert len(world.ledger) == len(world.results) == 15
    src = [t.core.txid_src for t in world.ledger.records.values()]
    assert len(set(src)) == 15


def test_no_identity_bytes_in_ledger(world):
    blob = b"".join(bytes.fromhex(l.split()[-1]) for l in world.ledger.export_lines()[2:])
    for u in world.users:
        for secret in (u.PK_id.encode(), u.x.encode(), u.sk_master.encode(), u.L.encode(), u.public_account):
            assert secret not in blob


def test_commitments_rerandomize(world):
    coms = [t.party_a.com.C for t in world.ledger.records.values()]
    assert len(set(coms)) == len(coms)


def _case(world, user, t_approvals):
    keys = tuple(k for k, (a, _) in world.truth.items() if a == user)
    return RevealCase(b"case-%d" % user, keys, approvals=frozenset(range(1, t_approvals + 1)))


def test_irp_reveals_ground_truth(world):
    owner = world.truth[world.ledger.keys()[0]][0]
    case = _case(world, owner, 2)
    got = irp_run(case, world.keyset, world.shares, world.ledger, at_ms=77, decrypt_all=True)
    assert got == [world.users[owner].PK_id]
    rec = world.ledger.reveals()[-1]
    assert rec.approvals == (1, 2) and rec.timestamp == 77 and rec.tag_keys == case.tags
    assert case.artifact == ((1, 2), 77)


def test_irp_refuses_below_threshold(world):
    before = len(world.ledger.reveals())
    owner = world.truth[world.ledger.keys()[0]][0]
    assert irp_run(_case(world, owner, 1), world.keyset, world.shares, world.ledger) == []
    assert len(world.ledger.reveals()) == before


def test_irp_unknown_tag(world):
    with pytest.raises(UnknownTag):
        irp_run(RevealCase(b"x", (b"\x00" * 32,), approvals=frozenset({1, 2})), world.keyset, world.shares,
                world.ledger)


def test_irp_gate_counts():
    w = committed_world(users=4, transfers=8, seed=3)
    owners = sorted({a for a, _ in w.truth.values()})
    approvals = [0, 1, 2, 3] * len(owners)
    expected = 0
    for i, (o, n_app) in enumerate(zip(owners, approvals)):
        irp_run(_case(w, o, n_app), w.keyset, w.shares, w.ledger)
        expected += n_app >= w.keyset.t
    assert len(w.ledger.reveals()) == expected


def test_party_b_reveal(world):
    k = world.ledger.keys()[0]
    b = world.truth[k][1]
    case = RevealCase(b"b", (k,), approvals=frozenset({2, 3}), roles=("B",))
    assert irp_run(case, world.keyset, world.shares, world.ledger) == [world.users[b].PK_id]


def test_scenario_from_dict():
    cfg = ScenarioConfig.from_dict({
        "chains": [{"chain_id": "x", "block_interval_ms": 250}],
        "bridge": {"t_relay": 2, "n_relay": 3},
        "committee": {"t": 3, "n": 5},
        "seed": 4,
    })
    assert cfg.chains[0].block_interval_ms == 250 and cfg.bridge.n_relay == 3
    assert cfg.committee.t == 3 and cfg.seed == 4
    assert ScenarioConfig.from_dict({}) == ScenarioConfig()


def test_escrow_settlement_pattern():
    w = make_world(users=3)
    w.run_closed_loop(jobs_for(w, 4, pattern="escrow_settlement"), lanes=2)
    assert len(w.ledger) == 4
    assert all(w.network.chain(c).conserved() for c in w.chain_ids)
    assert all(e.total_held() == 0 for e in w.settlement.values())
