"""Scenario drivers for the linkability sweep, the inclusion-latency bench and
the confirmation-depth sweep, plus bootstrap intervals and report writers."""
from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from . import auditor
from .chainsim import AuditLedger, SimChain, Transaction
from .errors import BadConfig, DuplicateMessage, EmptySamples, LedgerRejection
from .protocols import (
    AUDIT_CHAIN,
    BridgeConfig,
    ChainConfig,
    FinalizedTransfer,
    ScenarioConfig,
    TransferJob,
    World,
    build_tag,
)

REGIMES = {"low": (10_000, 2_500, 4.0), "high": (30_000, 7_500, 4.0)}
PATTERNS = ("simple_transfer", "escrow_settlement")


@dataclass(frozen=True)
class WorkloadSpec:
    pattern: str = "simple_transfer"
    B: int = 10_000
    S: int = 2_500
    k_bar: float = 4.0
    qps: float = 20.0
    n_senders: int = 10
    duration_s: int = 30
    seed: int = 0

    def __post_init__(self):
        if self.pattern not in PATTERNS:
            raise BadConfig(f"unknown pattern {self.pattern!r}")
        if self.B < 1 or self.S < 2 or abs(self.B / self.S - self.k_bar) > 1e-9:
            raise BadConfig(f"need B = S * k_bar with S >= 2 (B={self.B}, S={self.S}, k_bar={self.k_bar})")
        if self.n_senders < 1 or self.duration_s <= 0 or self.qps <= 0:
            raise BadConfig("n_senders, duration_s and qps must be positive")

    @classmethod
    def regime(cls, name: str, seed: int = 0) -> "WorkloadSpec":
        if name not in REGIMES:
            raise BadConfig(f"unknown regime {name!r}")
        B, S, k = REGIMES[name]
        return cls(B=B, S=S, k_bar=k, seed=seed)


@dataclass
class BootstrapCi:
    mean: float
    lo: float
    hi: float
    n: int
    resamples: int = 1000


def bootstrap_ci(samples: Sequence[float], resamples: int = 1000, seed=0) -> BootstrapCi:
    """Percentile bootstrap of the mean (2.5 / 97.5 percentiles)."""
    x = np.asarray(samples, dtype=float)
    if x.size == 0:
        raise EmptySamples("bootstrap needs at least one sample")
    rng = np.random.default_rng(seed)
    means = x[rng.integers(0, x.size, size=(resamples, x.size))].mean(axis=1)
    mean = float(x.mean())
    lo, hi = (float(v) for v in np.percentile(means, [2.5, 97.5]))
    return BootstrapCi(mean, min(lo, mean), max(hi, mean), int(x.size), resamples)


@dataclass
class RunReport:
    name: str
    config: dict
    metrics: dict[str, BootstrapCi] = field(default_factory=dict)
    samples: dict[str, list] = field(default_factory=dict)
    rows: list[dict] = field(default_factory=list)
    p50_ms: float | None = None
    p95_ms: float | None = None
    tps_realized: float | None = None

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("rows")
        return d


def _subseed(*parts: int) -> int:
    return int(np.random.SeedSequence([int(p) for p in parts]).generate_state(1)[0])


# -- corpora ----------------------------------------------------------------


@dataclass
class Corpus:
    spec: WorkloadSpec
    world: World
    _pseudonyms: list[bytes] | None = None

    @property
    def items(self):
        return list(self.world.ledger.records.items())

    def owners(self, role: str = "A") -> list[int]:
        idx = 0 if role == "A" else 1
        return [self.world.truth[k][idx] for k in self.world.ledger.records]

    def pseudonyms(self) -> list[bytes]:
        """Party-A pseudonyms of every tag, extracted once and cached."""
        if self._pseudonyms is None:
            ask = self.world.et.ask
            self._pseudonyms = [auditor.extract_pseudonym(ask, t.party_a.ct_link).encode()
                                for t in self.world.ledger.records.values()]
        return self._pseudonyms


def make_jobs(spec: WorkloadSpec, chain_ids: Sequence[bytes]) -> list[TransferJob]:
    """Multinomial owner assignment over S users (mean k_bar tags each), a
    uniformly drawn distinct counterparty, i.i.d. amounts and directions."""
    rng = np.random.default_rng(_subseed(spec.seed, 1))
    owners = rng.integers(0, spec.S, spec.B)
    others = (owners + rng.integers(1, spec.S, spec.B)) % spec.S
    amounts = rng.integers(1, 1000, spec.B)
    direction = rng.integers(0, len(chain_ids), spec.B)
    jobs = []
    for a, b, amt, d in zip(owners, others, amounts, direction):
        src = chain_ids[d]
        dst = chain_ids[(d + 1) % len(chain_ids)]
        jobs.append(TransferJob(int(a), int(b), int(amt), src, dst, spec.pattern))
    return jobs


_CORPUS_CACHE: dict[tuple, Corpus] = {}


def build_corpus(spec: WorkloadSpec, scenario: ScenarioConfig | None = None, lanes: int = 100,
                 cache: bool = True) -> Corpus:
    """Drive B transfers through the full pipeline in closed loop."""
    key = (spec, repr(scenario))
    if cache and key in _CORPUS_CACHE:
        return _CORPUS_CACHE[key]
    scenario = scenario or ScenarioConfig(seed=spec.seed)
    world = World(scenario)
    world.add_users(spec.S)
    world.run_closed_loop(make_jobs(spec, world.chain_ids), lanes)
    corpus = Corpus(spec, world)
    if cache:
        _CORPUS_CACHE[key] = corpus
    return corpus


def clear_cache() -> None:
    _CORPUS_CACHE.clear()


# -- linkability sweep ------------------------------------------------------

AOL_COLUMNS = ("p", "B", "S", "k_bar", "seed", "ari", "nmi", "n_pairs_effective", "wall_ms", "pairs_per_s")


def run_aol_sweep(regime: str | WorkloadSpec, p_values: Sequence[float], repeats: int = 5, warmup: int = 1,
                  seed: int = 0, timing: bool = True, scenario: ScenarioConfig | None = None) -> list[RunReport]:
    """One report per p. The corpus is generated once per (regime, seed) and
    each repeat draws a fresh visibility sample over it."""
    if not p_values or any(not (0.0 < p <= 1.0) for p in p_values):
        raise BadConfig(f"p values must lie in (0, 1]: {list(p_values)}")
    if repeats < 1 or warmup < 0:
        raise BadConfig("repeats must be >= 1 and warmup >= 0")
    spec = regime if isinstance(regime, WorkloadSpec) else WorkloadSpec.regime(regime, seed)
    corpus = build_corpus(spec, scenario)
    items, truth, ask = corpus.items, corpus.world.truth, corpus.world.et.ask
    owners, pseudo = corpus.owners(), corpus.pseudonyms()
    reports = []
    for pi, p in enumerate(p_values):
        for w in range(warmup):
            auditor.cluster(auditor.sample_visible(items, p, _subseed(seed, pi, 10_000 + w)), ask, timing=timing)
        rows, extra = [], {"edge_ari": [], "edge_nmi": [], "n_visible": []}
        for r in range(repeats):
            vseed = _subseed(seed, pi, r)
            rep = auditor.cluster(auditor.sample_visible(items, p, vseed, truth), ask, timing=timing)
            e_ari, e_nmi = auditor.edge_sampled_scores(pseudo, owners, p, vseed)
            rows.append({"p": p, "B": spec.B, "S": spec.S, "k_bar": spec.k_bar, "seed": seed, "ari": rep.ari,
                         "nmi": rep.nmi, "n_pairs_effective": rep.n_pairs_effective, "wall_ms": rep.wall_ms,
                         "pairs_per_s": rep.pairs_per_s})
            extra["edge_ari"].append(e_ari)
            extra["edge_nmi"].append(e_nmi)
            extra["n_visible"].append(rep.n_visible)
        samples = {c: [row[c] for row in rows] for c in ("ari", "nmi", "wall_ms", "pairs_per_s")} | extra
        metrics = {k: bootstrap_ci(v, seed=_subseed(seed, pi, 99)) for k, v in samples.items()}
        cfg = {"regime": regime if isinstance(regime, str) else "custom", "p": p, "B": spec.B, "S": spec.S,
               "k_bar": spec.k_bar, "repeats": repeats, "warmup": warmup, "seed": seed, "timing": timing}
        reports.append(RunReport("aol", cfg, metrics, samples, rows))
    return reports


def linearity_fit(corpus: Corpus, sizes: Sequence[int], repeats: int = 3) -> dict:
    """Decrypt-once wall time on tag prefixes of each size; least-squares slope and R^2."""
    items, ask = corpus.items, corpus.world.et.ask
    xs, ys = [], []
    for B in sizes:
        if B > len(items):
            raise BadConfig(f"corpus has {len(items)} tags, asked for {B}")
        vis = auditor.VisibleSet(items[:B], 1.0, 0, B)
        best = min(auditor.cluster(vis, ask).wall_ms for _ in range(repeats))
        xs.append(B)
        ys.append(best)
    slope, icept = np.polyfit(xs, ys, 1)
    pred = slope * np.asarray(xs) + icept
    ss_res = float(((np.asarray(ys) - pred) ** 2).sum())
    ss_tot = float(((np.asarray(ys) - np.mean(ys)) ** 2).sum())
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return {"sizes": list(xs), "wall_ms": ys, "slope_ms_per_tag": float(slope), "r2": r2}


# -- latency bench ----------------------------------------------------------

LATENCY_COLUMNS = ("mode", "qps", "n_senders", "block_ms", "duration_s", "seed", "repeat", "sent", "included",
                   "p50_ms", "p95_ms", "tps_realized")


def _arrivals(qps: float, n_senders: int, duration_s: int, rng: np.random.Generator):
    """Rate-limited emission: the i-th of Q*D submissions falls uniformly in
    its 1/Q slot; submissions are dealt round-robin to the N senders so each
    emits Q/N tx/s."""
    total = int(round(qps * duration_s))
    slot_ms = 1000.0 / qps
    at = np.floor((np.arange(total) + rng.random(total)) * slot_ms).astype(np.int64)
    return [(int(t), i % n_senders) for i, t in enumerate(at)]


def run_latency_bench(mode: str, qps_values: Sequence[float], n_senders: int | Sequence[int] = 10,
                      block_ms: int = 500, duration_s: int = 30, seed: int = 0, repeats: int = 10,
                      warmup: int = 0) -> list[RunReport]:
    if mode not in ("emit", "store"):
        raise BadConfig(f"mode must be emit or store, got {mode!r}")
    if not qps_values or any(q <= 0 for q in qps_values):
        raise BadConfig("qps values must be positive")
    if block_ms <= 0 or duration_s <= 0 or repeats < 1:
        raise BadConfig("block_ms, duration_s and repeats must be positive")
    senders = [n_senders] if isinstance(n_senders, int) else list(n_senders)
    if any(n < 1 for n in senders):
        raise BadConfig("n_senders must be positive")
    need = int(round(max(qps_values) * duration_s))
    pool = build_corpus(WorkloadSpec(B=4 * max(need // 4 + 1, 1), S=max(need // 4 + 1, 2), k_bar=4.0,
                                     seed=seed))
    tags = list(pool.world.ledger.records.values())[:need]
    blobs = [t.to_bytes() for t in tags]
    reports = []
    for qi, q in enumerate(qps_values):
        for n in senders:
            rows = []
            for r in range(-warmup, repeats):
                rng = np.random.default_rng(_subseed(seed, qi, n, r + warmup))
                chain = SimChain(AUDIT_CHAIN, block_ms)
                ledger = AuditLedger(pool.world.bridge.relayer_pks, pool.world.bridge.t_relay,
                                     pool.world.keyset.tpk, pool.world.et.apk, network=pool.world.network)
                arrivals = _arrivals(q, n, duration_s, rng)
                nonces = [0] * n
                owner: dict[bytes, int] = {}
                for i, (t_ms, s) in enumerate(arrivals):
                    tx = Transaction(b"sender-%d" % s, nonces[s], "atag_" + mode, blobs[i])
                    nonces[s] += 1
                    owner[chain.submit_tx(tx, t_ms)] = i
                events = []
                while chain.next_block_time() <= duration_s * 1000:
                    block = chain.produce_block()
                    for txid in block.txids:
                        if mode == "store":
                            ledger.append(tags[owner[txid]])
                        else:
                            events.append(txid)
                lat = np.array([chain.included[tx][1] - chain.submitted_at[tx] for tx in owner
                                if tx in chain.included])
                if r < 0:
                    continue
                rows.append({"mode": mode, "qps": q, "n_senders": n, "block_ms": block_ms,
                             "duration_s": duration_s, "seed": seed, "repeat": r, "sent": len(arrivals),
                             "included": int(lat.size), "p50_ms": float(np.percentile(lat, 50)),
                             "p95_ms": float(np.percentile(lat, 95)), "tps_realized": lat.size / duration_s})
            samples = {c: [row[c] for row in rows] for c in ("p50_ms", "p95_ms", "tps_realized", "sent")}
            metrics = {k: bootstrap_ci(v, seed=_subseed(seed, qi, n, 99)) for k, v in samples.items()}
            cfg = {"mode": mode, "qps": q, "n_senders": n, "block_ms": block_ms, "duration_s": duration_s,
                   "repeats": repeats, "warmup": warmup, "seed": seed}
            reports.append(RunReport("latency", cfg, metrics, samples, rows, metrics["p50_ms"].mean,
                                     metrics["p95_ms"].mean, metrics["tps_realized"].mean))
    return reports


# -- confirmation-depth sweep -----------------------------------------------

DEPTH_COLUMNS = ("depth", "seed", "transfers", "latency_mean_ms", "latency_p50_ms", "replay_attempts",
                 "replay_accepted")


def replay_probe(world: World) -> tuple[int, int]:
    """Verbatim and ts-mutated resubmission of every committed tag, plus a
    reorg of the source chain followed by re-relay and re-delivery of the
    first transfer. Returns (attempts, accepted)."""
    attempts = accepted = 0
    for res in world.results:
        for tag in (res.tag, replace(res.tag, core=replace(res.tag.core, ts=res.tag.core.ts + 1))):
            attempts += 1
            try:
                world.ledger.append(tag)
                accepted += 1
            except LedgerRejection:
                pass
    if world.results:
        res = world.results[0]
        core = res.tag.core
        src = world.network.chain(core.cid_src)
        height = src.included[core.txid_src][0]
        src.reorg(src.height - height + 1)
        depth = res.tag.exec.message.required_depth
        src.advance_to(src.clock_ms + (depth + 1) * src.block_interval_ms)
        msg = world.bridge.relay(world.network, core.cid_src, core.txid_src, core.cid_dst,
                                 res.tag.exec.message.payload, depth)
        attempts += 1
        try:
            world.bridge.deliver(world.network, msg, src.clock_ms)
            accepted += 1
        except DuplicateMessage:
            pass
        attempts += 1
        try:
            again = build_tag(res.tag.party_a, res.tag.party_b,
                              FinalizedTransfer(core.cid_src, core.txid_src, core.cid_dst, core.txid_dst, msg,
                                                src.clock_ms))
            world.ledger.append(again)
            accepted += 1
        except LedgerRejection:
            pass
    return attempts, accepted


def run_depth_sweep(depths: Sequence[int] = (1, 2, 4, 8), seed: int = 0, transfers: int = 40,
                    block_ms: int = 500, repeats: int = 1) -> list[RunReport]:
    if not depths or any(not (1 <= d <= 64) for d in depths):
        raise BadConfig(f"depths must lie in [1, 64]: {list(depths)}")
    if transfers < 1 or repeats < 1:
        raise BadConfig("transfers and repeats must be positive")
    reports = []
    for di, d in enumerate(depths):
        rows = []
        lat_all: list[float] = []
        for r in range(repeats):
            s = _subseed(seed, di, r)
            scen = ScenarioConfig(chains=[ChainConfig("chainA", block_ms, d), ChainConfig("chainB", block_ms, d)],
                                  audit_block_interval_ms=block_ms, bridge=BridgeConfig(depth=d), seed=s)
            world = World(scen)
            spec = WorkloadSpec(B=transfers * 2, S=transfers, k_bar=2.0, seed=s)
            world.add_users(spec.S)
            world.run_closed_loop(make_jobs(spec, world.chain_ids)[:transfers], lanes=8)
            lat = [res.tag_commit_ms - res.src_commit_ms for res in world.results]
            lat_all.extend(lat)
            att, acc = replay_probe(world)
            rows.append({"depth": d, "seed": seed, "transfers": len(lat), "latency_mean_ms": float(np.mean(lat)),
                         "latency_p50_ms": float(np.percentile(lat, 50)), "replay_attempts": att,
                         "replay_accepted": acc})
        samples = {"latency_ms": lat_all, "replay_accepted": [row["replay_accepted"] for row in rows]}
        metrics = {k: bootstrap_ci(v, seed=_subseed(seed, di, 99)) for k, v in samples.items()}
        cfg = {"depth": d, "block_ms": block_ms, "transfers": transfers, "repeats": repeats, "seed": seed}
        reports.append(RunReport("depth", cfg, metrics, samples, rows))
    return reports


# -- report writers ---------------------------------------------------------


def to_csv(rows: Sequence[dict], columns: Sequence[str]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(columns), extrasaction="ignore", lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow(row)
    return buf.getvalue()


def plot_tuples(reports: Sequence[RunReport], x_key: str, metric: str) -> list[tuple]:
    return [(r.config[x_key], r.metrics[metric].mean, r.metrics[metric].lo, r.metrics[metric].hi)
            for r in reports if metric in r.metrics]


def write_reports(out_dir: str | Path, stem: str, reports: Sequence[RunReport], columns: Sequence[str],
                  meta: dict, plots: dict[str, list] | None = None) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = [row for r in reports for row in r.rows]
    csv_path = out / f"{stem}.csv"
    csv_path.write_text(to_csv(rows, columns))
    doc = {"meta": meta, "reports": [r.to_dict() for r in reports], "plots": plots or {}}
    json_path = out / f"{stem}.json"
    json_path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return [csv_path, json_path]
