import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from veilaudit.algebra import GENERATORS, Scalar
from veilaudit.errors import ZeroRandomness
from veilaudit.linktag import encrypt_link, equality_test, et_keygen, extract_pseudonym, pseudonym


def test_keygen():
    kp = et_keygen(3)
    assert kp.apk == kp.ask * GENERATORS.G
    assert et_keygen(3) == kp
    assert et_keygen(4) != kp


def test_encrypt_link_fresh_randomness(rng):
    kp = et_keygen(rng)
    x = Scalar.random_nonzero(rng)
    a = encrypt_link(kp.apk, x, Scalar(11))
    b = encrypt_link(kp.apk, x, Scalar(12))
    assert a.c1 != b.c1 and a.c2 != b.c2
    with pytest.raises(ZeroRandomness):
        encrypt_link(kp.apk, x, Scalar(0))


def test_extract(rng):
    kp = et_keygen(rng)
    x = Scalar.random_nonzero(rng)
    ct = encrypt_link(kp.apk, x, Scalar.random_nonzero(rng))
    assert extract_pseudonym(kp.ask, ct).L == x * GENERATORS.J
    assert extract_pseudonym(kp.ask + Scalar(1), ct).L != x * GENERATORS.J
    ct2 = encrypt_link(kp.apk, x, Scalar.random_nonzero(rng))
    assert extract_pseudonym(kp.ask, ct) == extract_pseudonym(kp.ask, ct2) == pseudonym(x)


def test_equality_test_cases(rng):
    kp = et_keygen(rng)
    x1, x2 = Scalar(5), Scalar(6)
    a = encrypt_link(kp.apk, x1, Scalar.random_nonzero(rng))
    b = encrypt_link(kp.apk, x1, Scalar.random_nonzero(rng))
    c = encrypt_link(kp.apk, x2, Scalar.random_nonzero(rng))
    assert equality_test(kp.ask, a, b)
    assert not equality_test(kp.ask, a, c)
    assert equality_test(kp.ask, a, a)


@settings(max_examples=25)
@given(st.lists(st.integers(0, 2), min_size=3, max_size=3), st.integers(0, 2**32))
def test_equality_is_equivalence(ids, seed):
    rng = np.random.default_rng(seed)
    kp = et_keygen(rng)
    xs = [Scalar(100 + i) for i in ids]
    cts = [encrypt_link(kp.apk, x, Scalar.random_nonzero(rng)) for x in xs]
    eq = lambda i, j: equality_test(kp.ask, cts[i], cts[j])
    for i in range(3):
        assert eq(i, i)
        for j in range(3):
            assert eq(i, j) == eq(j, i) == (ids[i] == ids[j])
            for k in range(3):
                if eq(i, j) and eq(j, k):
                    assert eq(i, k)


def test_equality_matches_ground_truth(rng):
    kp = et_keygen(rng)
    owners = rng.integers(0, 50, 2000)
    cts = [encrypt_link(kp.apk, Scalar(int(o) + 1), Scalar.random_nonzero(rng)) for o in owners]
    groups = {}
    for o, ct in zip(owners, cts):
        groups.setdefault(extract_pseudonym(kp.ask, ct).encode(), set()).add(int(o))
    assert all(len(v) == 1 for v in groups.values())
    assert len(groups) == len(set(owners.tolist()))
