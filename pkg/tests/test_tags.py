import dataclasses

import pytest
from hypothesis import given
from hypothesis import strategies as st

from veilaudit.algebra import Address
from veilaudit.errors import MalformedEncoding
from veilaudit.tags import AuditTag, IdentityRevealed, TransferPayload, dedup_key, message_id, nullifier

from helpers import committed_world


@pytest.fixture(scope="module")
def world():
    return committed_world(users=4, transfers=6)


def test_tag_roundtrip(world):
    for tag in world.ledger.records.values():
        data = tag.to_bytes()
        assert AuditTag.from_bytes(data) == tag
        assert AuditTag.from_bytes(data).to_bytes() == data


def test_tag_rejects_truncation_trailing_and_version(world):
    data = next(iter(world.ledger.records.values())).to_bytes()
    with pytest.raises(MalformedEncoding):
        AuditTag.from_bytes(data[:-1])
    with pytest.raises(MalformedEncoding):
        AuditTag.from_bytes(data + b"\x00")
    with pytest.raises(MalformedEncoding):
        AuditTag.from_bytes(b"\x02" + data[1:])


def test_dedup_key_ignores_timestamp(world):
    tag = next(iter(world.ledger.records.values()))
    moved = dataclasses.replace(tag, core=dataclasses.replace(tag.core, ts=tag.core.ts + 1))
    assert moved.dedup_key() == tag.dedup_key()
    assert moved.digest() != tag.digest()


def test_bundle_fields_cover_every_component(world):
    tag = next(iter(world.ledger.records.values()))
    f = tag.party_a.fields()
    assert len(f) == 16
    assert all(v for v in f.values())


@given(st.binary(min_size=20, max_size=20), st.binary(min_size=20, max_size=20), st.integers(0, 2**64 - 1))
def test_payload_roundtrip(a, b, amount):
    p = TransferPayload(Address(a), Address(b), amount, "escrow_settlement")
    assert TransferPayload.from_bytes(p.to_bytes()) == p


@given(st.lists(st.binary(min_size=32, max_size=32), max_size=4), st.lists(st.integers(1, 64), max_size=5))
def test_reveal_record_roundtrip(keys, approvals):
    rec = IdentityRevealed(b"case", tuple(keys), tuple(approvals), 1234, tuple(keys))
    assert IdentityRevealed.from_bytes(rec.to_bytes()) == rec


def test_identifiers_separate_inputs():
    ids = {message_id(b"a", b"tx", s, d) for s in range(3) for d in (b"b", b"c")}
    assert len(ids) == 6
    assert nullifier(b"tx", 0, b"a", b"b") != nullifier(b"tx", 0, b"a", b"c")
    assert nullifier(b"tx", 0, b"a", b"b") == nullifier(b"tx", 0, b"a", b"b")
    # length framing keeps concatenation ambiguity out
    assert dedup_key(b"ab", b"c", b"d") != dedup_key(b"a", b"bc", b"d")
