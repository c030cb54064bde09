"""Audit-and-analyze: sample the ledger at a visibility rate, recover
pseudonym clusters under the trapdoor and score them against ground truth."""
from __future__ import annotations

import math
import time
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Hashable, Iterable, Mapping, Sequence

import numpy as np

from .algebra import GroupElement, Scalar
from .chainsim import AuditLedger
from .errors import BadRate, DomainMismatch
from .linktag import LinkPseudonym, extract_pseudonym
from .protocols import RevealCase
from .tags import AuditTag, sha256


@dataclass
class VisibleSet:
    tags: list[tuple[bytes, AuditTag]]
    p: float
    seed: int
    B: int
    truth: Mapping[bytes, tuple[int, int]] | None = None


def sample_visible(ledger: AuditLedger | Sequence[tuple[bytes, AuditTag]], p: float, seed,
                   truth: Mapping[bytes, tuple[int, int]] | None = None) -> VisibleSet:
    """Keep each tag independently with probability ``p``."""
    if not (0.0 < p <= 1.0):
        raise BadRate(f"visibility rate must lie in (0, 1], got {p}")
    items = list(ledger.records.items()) if isinstance(ledger, AuditLedger) else list(ledger)
    keep = np.random.default_rng(seed).random(len(items)) < p
    return VisibleSet([it for it, k in zip(items, keep) if k], p, seed, len(items), truth)


class UnionFind:
    def __init__(self, n: int = 0):
        self.parent = list(range(n))
        self.size = [1] * n

    def add(self) -> int:
        self.parent.append(len(self.parent))
        self.size.append(1)
        return len(self.parent) - 1

    def find(self, a: int) -> int:
        root = a
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[a] != root:
            self.parent[a], a = root, self.parent[a]
        return root

    def union(self, a: int, b: int) -> int:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return ra
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        return ra

    def groups(self) -> list[list[int]]:
        out: dict[int, list[int]] = {}
        for i in range(len(self.parent)):
            out.setdefault(self.find(i), []).append(i)
        return list(out.values())


@dataclass(frozen=True)
class Cluster:
    pseudonym: LinkPseudonym
    keys: tuple[bytes, ...]
    role: str = "A"


@dataclass
class ClusterReport:
    clusters: list[Cluster]
    ari: float
    nmi: float
    n_pairs_effective: int
    wall_ms: int
    pairs_per_s: float
    role: str = "A"
    n_visible: int = 0
    # tag key -> pseudonyms of both parties, for per-party membership queries
    memberships: dict[bytes, tuple[bytes, bytes]] = field(default_factory=dict)

    def partition(self) -> list[tuple[bytes, ...]]:
        return [c.keys for c in self.clusters]


def cluster(visible: VisibleSet, ask: Scalar, role: str = "A", timing: bool = True) -> ClusterReport:
    """Decrypt-once clustering: one trapdoor operation per party per tag,
    then union-find over equal pseudonym encodings."""
    t0 = time.perf_counter()
    enc_a, enc_b = [], []
    for _, tag in visible.tags:
        enc_a.append(extract_pseudonym(ask, tag.party_a.ct_link).encode())
        enc_b.append(extract_pseudonym(ask, tag.party_b.ct_link).encode())
    encs = enc_a if role == "A" else enc_b
    uf = UnionFind(len(encs))
    first: dict[bytes, int] = {}
    for i, e in enumerate(encs):
        j = first.setdefault(e, i)
        if j != i:
            uf.union(j, i)
    keys = [k for k, _ in visible.tags]
    groups = sorted(uf.groups(), key=lambda g: g[0])
    wall = time.perf_counter() - t0
    clusters = [Cluster(LinkPseudonym(GroupElement.decode(encs[g[0]])), tuple(keys[i] for i in g), role)
                for g in groups]
    B = visible.B
    n_pairs = round(visible.p * B * (B - 1) / 2)
    wall_ms = int(round(wall * 1000)) if timing else 0
    pps = n_pairs / wall if timing and wall > 0 else 0.0
    ari_v = nmi_v = float("nan")
    if visible.truth is not None:
        idx = 0 if role == "A" else 1
        truth = {k: visible.truth[k][idx] for k in keys}
        found = [c.keys for c in clusters]
        ari_v, nmi_v = ari(truth, found), nmi(truth, found)
    memberships = {k: (a, b) for k, a, b in zip(keys, enc_a, enc_b)}
    return ClusterReport(clusters, ari_v, nmi_v, n_pairs, wall_ms, pps, role, len(keys), memberships)


# -- partition scores -------------------------------------------------------

Partition = Mapping[Hashable, Hashable] | Iterable[Iterable[Hashable]]


def _labels(part: Partition) -> dict:
    if isinstance(part, Mapping):
        return dict(part)
    out = {}
    for ci, members in enumerate(part):
        for m in members:
            if m in out:
                raise DomainMismatch(f"element {m!r} appears in two clusters")
            out[m] = ci
    return out


def _contingency(a: Partition, b: Partition):
    la, lb = _labels(a), _labels(b)
    if la.keys() != lb.keys():
        raise DomainMismatch("partitions cover different element sets")
    cells = Counter((la[x], lb[x]) for x in la)
    rows = Counter(la.values())
    cols = Counter(lb.values())
    return len(la), cells, rows, cols


def _c2(n: int) -> int:
    return n * (n - 1) // 2


def ari(partition_a: Partition, partition_b: Partition) -> float:
    """Adjusted Rand index from exact pair counts."""
    n, cells, rows, cols = _contingency(partition_a, partition_b)
    both = sum(_c2(v) for v in cells.values())
    sa = sum(_c2(v) for v in rows.values())
    sb = sum(_c2(v) for v in cols.values())
    only_b, only_a = sb - both, sa - both
    if only_a == 0 and only_b == 0:
        return 1.0
    neither = _c2(n) - both - only_a - only_b
    num = 2 * (both * neither - only_a * only_b)
    den = (both + only_a) * (only_a + neither) + (both + only_b) * (only_b + neither)
    return float(Fraction(num, den))


def _entropy(counts: Iterable[int], n: int) -> float:
    return math.fsum(c / n * (math.log(n) - math.log(c)) for c in sorted(counts))


def nmi(partition_a: Partition, partition_b: Partition) -> float:
    """Normalized mutual information, arithmetic-mean normalization."""
    n, cells, rows, cols = _contingency(partition_a, partition_b)
    if n == 0 or (len(rows) == 1 and len(cols) == 1):
        return 1.0
    if len(cells) == len(rows) == len(cols):
        return 1.0  # same partition up to relabelling
    terms = []
    for (i, j), nij in sorted(cells.items(), key=lambda kv: (str(kv[0][0]), str(kv[0][1]))):
        ratio = Fraction(n * nij, rows[i] * cols[j])
        terms.append(nij / n * math.log(ratio))
    mi = max(math.fsum(terms), 0.0)
    if mi == 0.0:
        return 0.0
    norm = (_entropy(rows.values(), n) + _entropy(cols.values(), n)) / 2
    return min(max(mi / norm, 0.0), 1.0)


def edge_sampled_scores(pseudonyms: Sequence[bytes], owners: Sequence[int], p: float, seed) -> tuple[float, float]:
    """ARI/NMI when each same-pseudonym *pair* is observed with rate p and
    clusters are the connected components of the observed pairs.

    Reported alongside the restricted-to-visible scores as the candidate-pair
    visibility model; all B tags are elements.
    """
    if not (0.0 < p <= 1.0):
        raise BadRate(f"visibility rate must lie in (0, 1], got {p}")
    rng = np.random.default_rng(seed)
    groups: dict[bytes, list[int]] = {}
    for i, e in enumerate(pseudonyms):
        groups.setdefault(e, []).append(i)
    uf = UnionFind(len(pseudonyms))
    for members in groups.values():
        m = len(members)
        if m < 2:
            continue
        iu, ju = np.triu_indices(m, 1)
        keep = rng.random(len(iu)) < p
        for a, b in zip(iu[keep], ju[keep]):
            uf.union(members[a], members[b])
    found = {i: uf.find(i) for i in range(len(pseudonyms))}
    truth = dict(enumerate(owners))
    return ari(truth, found), nmi(truth, found)


# -- escalation -------------------------------------------------------------


def size_at_least(threshold: int) -> Callable[[Cluster], bool]:
    return lambda c: len(c.keys) >= threshold


def escalate(report: ClusterReport, rule: Callable[[Cluster], bool] | None = None) -> list[RevealCase]:
    """One zero-approval RevealCase draft per cluster satisfying ``rule``."""
    rule = rule or size_at_least(10)
    drafts = []
    for c in report.clusters:
        if rule(c):
            case_id = sha256(b"case" + c.pseudonym.encode())[:16]
            drafts.append(RevealCase(case_id, c.keys, c.pseudonym, frozenset(), (c.role,) * len(c.keys)))
    return drafts
