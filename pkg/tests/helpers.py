"""Small scenario builders shared by the test modules."""
import numpy as np

from veilaudit.protocols import BridgeConfig, CommitteeConfig, ScenarioConfig, TransferJob, World


def make_world(users=6, seed=5, t=2, n=3, depth=1, block_ms=500):
    cfg = ScenarioConfig(seed=seed, bridge=BridgeConfig(depth=depth), committee=CommitteeConfig(t, n))
    for c in cfg.chains:
        c.block_interval_ms = block_ms
    cfg.audit_block_interval_ms = block_ms
    world = World(cfg)
    world.add_users(users)
    return world


def jobs_for(world, count, seed=0, pattern="simple_transfer", owners=None):
    rng = np.random.default_rng(seed)
    cids = world.chain_ids
    S = len(world.users)
    out = []
    for i in range(count):
        a = int(owners[i]) if owners is not None else int(rng.integers(S))
        b = (a + 1 + int(rng.integers(S - 1))) % S
        d = int(rng.integers(len(cids)))
        out.append(TransferJob(a, b, int(rng.integers(1, 500)), cids[d], cids[(d + 1) % len(cids)], pattern))
    return out


def committed_world(users=6, transfers=12, seed=5, **kw):
    world = make_world(users, seed, **kw)
    world.run_closed_loop(jobs_for(world, transfers, seed), lanes=4)
    return world


# one line per acceptance criterion, echoed in the pytest terminal summary
ACCEPTANCE_LINES: list[str] = []


def report(criterion: str, ok: bool, detail: str) -> bool:
    line = f"{criterion}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok
