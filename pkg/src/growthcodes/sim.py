"""Monte Carlo harness: erasure channel, empirical recovery curves, GF(2) oracle."""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from math import ceil

import numpy as np

from .analysis import RecoveryCurve
from .fountain.codec import DecoderState, SourceBlock, make_esi, packet_stream, regenerate
from .prng import split_seed

TRIAL_CSV_HEADER = ("k", "eta", "trials", "mean_pd", "std_pd", "full_recovery_rate", "mode", "seed")


@dataclass(frozen=True)
class ChannelModel:
    loss_pi: float
    seed: int = 0

    def __post_init__(self):
        if not 0 <= self.loss_pi < 1:
            raise ValueError(f"loss rate must lie in [0, 1), got {self.loss_pi}")

    @classmethod
    def from_config(cls, channel, seed=0):
        return cls(channel.actual_loss_pi, seed)


@dataclass(frozen=True)
class TrialReport:
    k: int
    eta: float
    trials: int
    mean_pd: float
    std_pd: float
    full_recovery_rate: float
    mode: str
    seed: int

    @property
    def stderr(self):
        return self.std_pd / np.sqrt(self.trials)

    def row(self):
        return tuple(getattr(self, name) for name in TRIAL_CSV_HEADER)


def erase(channel, packets):
    """Drop each packet independently with probability ``loss_pi``."""
    packets = list(packets)
    if channel.loss_pi == 0:
        return packets
    keep = np.random.default_rng(channel.seed).random(len(packets)) >= channel.loss_pi
    return [p for p, kept in zip(packets, keep) if kept]


def trial_stream_id(seed, trial):
    return split_seed(seed, trial) & 0xFFFFFFFF


def run_trial(k, code, n_packets, stream_id, mode):
    """Recovered count after ``n_packets`` consecutive packets of one stream."""
    block = _index_block(k)
    state = DecoderState(k, code, mode)
    for p in packet_stream(block, code, n_packets, stream_id=stream_id):
        state.push(p)
    return state.n_recovered


_BLOCKS = {}


def _index_block(k):
    # payload contents do not affect recovery counts; one byte per symbol keeps XOR cheap
    if k not in _BLOCKS:
        _BLOCKS[k] = SourceBlock(tuple(bytes([i & 0xFF]) for i in range(k)))
    return _BLOCKS[k]


def _trial_fractions(args):
    k, code, n, seed, mode, trials = args
    return [run_trial(k, code, n, trial_stream_id(seed, t), mode) / k for t in trials]


def monte_carlo_curve(k, code, eta_grid, trials, mode="S", seed=0, workers=1):
    """Empirical recovery curve; trial ``t`` uses the same stream at every ``eta``.

    Streams depend only on ``(seed, t)``, so runs with different ``mode`` are
    paired packet-for-packet. ``workers > 1`` spreads trials over processes;
    results are gathered in trial order and do not depend on ``workers``.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    etas = np.asarray(eta_grid, dtype=float)
    if np.any(np.diff(etas) <= 0) or np.any(etas < 0):
        raise ValueError("eta_grid must be increasing and non-negative")
    reports = []
    pool = ProcessPoolExecutor(workers) if workers > 1 else None
    try:
        for eta in etas:
            n = ceil(eta * k - 1e-9)
            if pool is None:
                frac = _trial_fractions((k, code, n, seed, mode, range(trials)))
            else:
                chunks = [range(t, min(t + 25, trials)) for t in range(0, trials, 25)]
                jobs = [(k, code, n, seed, mode, c) for c in chunks]
                frac = [x for part in pool.map(_trial_fractions, jobs) for x in part]
            reports.append(_report(k, eta, trials, np.array(frac), mode, seed))
    finally:
        if pool is not None:
            pool.shutdown()
    curve = RecoveryCurve(
        etas, [r.mean_pd for r in reports], source="monte-carlo",
        meta={"k": k, "trials": trials, "mode": mode, "seed": seed},
    )
    return curve, reports


def _report(k, eta, trials, frac, mode, seed):
    return TrialReport(
        k=k,
        eta=float(eta),
        trials=trials,
        mean_pd=float(frac.mean()),
        std_pd=float(frac.std(ddof=1)) if trials > 1 else 0.0,
        full_recovery_rate=float(np.mean(frac == 1.0)),
        mode=mode,
        seed=seed,
    )


def oracle_decode(k, packets, code):
    """How many source symbols the received equations pin down (GF(2) rank argument).

    Rows are bitmasks; after reduction to row echelon form a symbol is
    determined exactly when some reduced row is its unit vector.
    """
    if k > 64:
        raise ValueError("the elimination oracle is meant for k <= 64")
    pivots = {}
    for p in packets:
        _, nbrs = regenerate(p.esi, code, k)
        row = 0
        for i in nbrs:
            row |= 1 << i
        while row:
            top = row.bit_length() - 1
            if top not in pivots:
                pivots[top] = row
                break
            row ^= pivots[top]
    # back-substitute to reduced row echelon form
    for col in sorted(pivots):
        r = pivots[col]
        for other, orow in pivots.items():
            if other != col and (orow >> col) & 1:
                pivots[other] = orow ^ r
    return sum(1 for r in pivots.values() if r & (r - 1) == 0)


def stream_packets(block, code, eta, stream_id=0):
    return packet_stream(block, code, ceil(eta * block.k - 1e-9), stream_id=stream_id)


__all__ = [
    "ChannelModel",
    "TrialReport",
    "erase",
    "make_esi",
    "monte_carlo_curve",
    "oracle_decode",
    "run_trial",
    "stream_packets",
]
