import dataclasses

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from veilaudit.algebra import GENERATORS, G, GroupElement, Scalar, derive_address
from veilaudit.errors import AddressMismatch, MalformedEncoding, WitnessInconsistent
from veilaudit.linktag import encrypt_link, et_keygen
from veilaudit.nizk import (
    ControlProof,
    DleqProof,
    LinkProof,
    LinkStatement,
    commit,
    ctrl_challenge,
    dleq_challenge,
    dleq_equations_hold,
    link_challenge,
    link_equations_hold,
    prove_ctrl,
    prove_dleq,
    prove_link,
    simulate_dleq,
    simulate_link,
    simulate_schnorr,
    verify_ctrl,
    verify_dleq,
    verify_link,
)
from veilaudit.threshold import encrypt_uid, keygen

H, J = GENERATORS.H, GENERATORS.J
scalars = st.integers(min_value=0, max_value=2**252).map(Scalar)


def test_commit_zero_is_identity():
    assert commit(Scalar(0), Scalar(0)).C.is_identity()


def test_commit_hiding_randomness(rng):
    x = Scalar.random(rng)
    assert commit(x, Scalar(1)) != commit(x, Scalar(2))


def test_commit_homomorphism_100_cases(rng):
    for _ in range(100):
        x, r, y, s = (Scalar.random(rng) for _ in range(4))
        assert commit(x, r).C + commit(y, s).C == commit(x + y, r + s).C


@given(scalars, scalars)
def test_commit_matches_definition(x, r):
    assert commit(x, r).C == x * G + r * H


def _session(rng):
    sk = Scalar.random_nonzero(rng)
    return sk, derive_address(GroupElement.base_mul(sk)), rng.bytes(16)


def test_ctrl_completeness_and_nonce_binding(rng):
    sk, addr, nonce = _session(rng)
    proof = prove_ctrl(sk, addr, nonce)
    assert verify_ctrl(addr, nonce, proof)
    assert not verify_ctrl(addr, nonce + b"\x00", proof)
    assert not verify_ctrl(addr, rng.bytes(16), proof)


def test_ctrl_rejects_perturbed_key(rng):
    sk, addr, nonce = _session(rng)
    proof = prove_ctrl(sk, addr, nonce)
    bad = dataclasses.replace(proof, pk_anon=proof.pk_anon + G)
    assert not verify_ctrl(addr, nonce, bad)


def test_ctrl_address_mismatch(rng):
    sk, _, nonce = _session(rng)
    _, other, _ = _session(rng)
    with pytest.raises(AddressMismatch):
        prove_ctrl(sk, other, nonce)


def test_ctrl_roundtrip_and_version(rng):
    sk, addr, nonce = _session(rng)
    proof = prove_ctrl(sk, addr, nonce)
    data = proof.to_bytes()
    assert data[0] == 0x01
    assert ControlProof.from_bytes(data) == proof
    with pytest.raises(MalformedEncoding):
        ControlProof.from_bytes(b"\x02" + data[1:])


def _link_instance(rng, x=None, binding=b"addr"):
    keyset, _ = keygen(2, 3, rng)
    et = et_keygen(rng)
    x = x or Scalar.random_nonzero(rng)
    r, k, s = (Scalar.random_nonzero(rng) for _ in range(3))
    uid = encrypt_uid(keyset.tpk, x * G, k)
    ct = encrypt_link(et.apk, x, s)
    stmt = LinkStatement(commit(x, r).C, uid.c1, uid.c2, ct.c1, ct.c2, keyset.tpk, et.apk, binding)
    return (x, r, k, s), stmt


def test_link_completeness(rng):
    for _ in range(20):
        w, stmt = _link_instance(rng)
        assert verify_link(stmt, prove_link(*w, stmt))


def test_link_same_x_fresh_randomness(rng):
    x = Scalar.random_nonzero(rng)
    w1, s1 = _link_instance(rng, x)
    w2, s2 = _link_instance(rng, x)
    p1, p2 = prove_link(*w1, s1), prove_link(*w2, s2)
    assert verify_link(s1, p1) and verify_link(s2, p2)
    assert p1.to_bytes() != p2.to_bytes()


def test_link_inconsistent_witness(rng):
    (x, r, k, s), stmt = _link_instance(rng)
    with pytest.raises(WitnessInconsistent):
        prove_link(x + Scalar(1), r, k, s, stmt)


def test_link_response_increment_rejected(rng):
    w, stmt = _link_instance(rng)
    proof = prove_link(*w, stmt)
    for field in ("z_x", "z_r", "z_k", "z_s"):
        bad = dataclasses.replace(proof, **{field: getattr(proof, field) + Scalar(1)})
        assert not verify_link(stmt, bad)


def test_link_transplant_rejected(rng):
    w1, s1 = _link_instance(rng)
    _, s2 = _link_instance(rng)
    proof = prove_link(*w1, s1)
    moved = dataclasses.replace(s1, uid_c1=s2.uid_c1, uid_c2=s2.uid_c2)
    assert not verify_link(moved, proof)
    assert not verify_link(dataclasses.replace(s1, binding=b"other"), proof)


def test_link_roundtrip(rng):
    w, stmt = _link_instance(rng)
    proof = prove_link(*w, stmt)
    assert LinkProof.from_bytes(proof.to_bytes()) == proof
    with pytest.raises(MalformedEncoding):
        LinkProof.from_bytes(proof.to_bytes()[:-1])


def test_link_simulator(rng):
    _, stmt = _link_instance(rng)
    for _ in range(10):
        c = Scalar.random(rng)
        ann, z = simulate_link(stmt, c, rng)
        assert link_equations_hold(stmt, ann, c, z)
        # an accepting simulated transcript fails under the real challenge
        assert link_challenge(stmt, ann) != c


def test_dleq_cases(rng):
    w = Scalar.random_nonzero(rng)
    B1, B2 = G, GroupElement.base_mul(Scalar.random_nonzero(rng))
    proof = prove_dleq(w, B1, B2)
    assert verify_dleq(w * B1, w * B2, B1, B2, proof)
    assert not verify_dleq(w * B1, (w + Scalar(1)) * B2, B1, B2, proof)
    same = prove_dleq(w, B1, B1)
    assert verify_dleq(w * B1, w * B1, B1, B1, same)
    assert DleqProof.from_bytes(proof.to_bytes()) == proof


def test_dleq_and_schnorr_simulators(rng):
    w = Scalar.random_nonzero(rng)
    B2 = GroupElement.base_mul(Scalar.random_nonzero(rng))
    P1, P2 = w * G, w * B2
    c = Scalar.random(rng)
    A1, A2, z = simulate_dleq(P1, P2, G, B2, c, rng)
    assert dleq_equations_hold(P1, P2, G, B2, A1, A2, c, z)
    assert dleq_challenge(P1, P2, G, B2, A1, A2) != c
    R, z = simulate_schnorr(P1, c, rng)
    assert z * G == R + c * P1


@settings(max_examples=20)
@given(st.integers(0, 2**32 - 1))
def test_completeness_property(seed):
    rng = np.random.default_rng(seed)
    sk, addr, nonce = _session(rng)
    assert verify_ctrl(addr, nonce, prove_ctrl(sk, addr, nonce))
    w, stmt = _link_instance(rng)
    assert verify_link(stmt, prove_link(*w, stmt))
    ws = Scalar.random_nonzero(rng)
    B2 = GroupElement.base_mul(Scalar.random_nonzero(rng))
    assert verify_dleq(ws * G, ws * B2, G, B2, prove_dleq(ws, G, B2))


def test_ctrl_challenge_binds_inputs(rng):
    _, addr, nonce = _session(rng)
    _, addr2, _ = _session(rng)
    assert ctrl_challenge(addr, nonce) != ctrl_challenge(addr2, nonce)
