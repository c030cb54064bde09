"""Auditor-only linkability: ElGamal encryption of a stable per-identity
pseudonym L = x*J under the auditor key; the auditor's secret is the
equality-test trapdoor."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import GENERATORS, GroupElement, Scalar
from .errors import ZeroRandomness


@dataclass(frozen=True)
class EtKeypair:
    apk: GroupElement
    ask: Scalar


@dataclass(frozen=True)
class LinkCiphertext:
    c1: GroupElement
    c2: GroupElement


@dataclass(frozen=True)
class LinkPseudonym:
    L: GroupElement

    def encode(self) -> bytes:
        return self.L.encode()


def et_keygen(rng_seed) -> EtKeypair:
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)
    ask = Scalar.random_nonzero(rng)
    return EtKeypair(GroupElement.base_mul(ask), ask)


def pseudonym(x: Scalar) -> LinkPseudonym:
    return LinkPseudonym(x * GENERATORS.J)


def encrypt_link(apk: GroupElement, x: Scalar, s: Scalar, L: GroupElement | None = None) -> LinkCiphertext:
    """(sG, xJ + s apk). ``L`` may pass a cached x*J."""
    if not s:
        raise ZeroRandomness("link randomness must be nonzero")
    if L is None:
        L = x * GENERATORS.J
    return LinkCiphertext(GroupElement.base_mul(s), L + s * apk)


def extract_pseudonym(ask: Scalar, ct: LinkCiphertext) -> LinkPseudonym:
    return LinkPseudonym(ct.c2 - ask * ct.c1)


def equality_test(ask: Scalar, ct_a: LinkCiphertext, ct_b: LinkCiphertext) -> bool:
    return extract_pseudonym(ask, ct_a) == extract_pseudonym(ask, ct_b)
