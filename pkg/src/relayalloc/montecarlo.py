"""Seeded outage-rate experiments over fading realizations.

Trials are embarrassingly parallel: every (pair, trial) channel draw comes
from its own counter-based substream, so results are bit-identical for any
worker count, and the same substreams are reused at every SNR point (common
random numbers).  Within a worker, the subset search runs with the trial
axis vectorized.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .scenario import (
    FadingParams,
    NumberingScheme,
    Topology,
    draw_channel_powers_keyed,
    fading_params,
    renumber,
    trial_permutations,
)
from .selector import batch_equal_time, batch_optimized

MODES = ("optimized", "equal_time")

REJECT_KEYS = ("singular", "negative_rate", "nonpositive_time")


class InsufficientSamples(Exception):
    """Too few samples to resolve the requested outage probability."""


@dataclass(frozen=True)
class TrialRecord:
    """Per-realization outcome of the selected selector(s)."""

    rate_optimized: float | None
    rate_equal_time: float | None
    active_relays_optimized: int | None
    active_relays_equal_time: int | None
    reject_counters: dict[str, int] = field(default_factory=dict)


@dataclass(frozen=True)
class OutageCurve:
    """Outage rate and mean active-relay count across an SNR grid, one mode."""

    snr_grid: tuple[float, ...]          # linear SNR values
    snr_grid_db: tuple[float, ...]
    outage_rate: tuple[float, ...]
    avg_active: tuple[float, ...]
    n_trials: int
    epsilon: float
    mode: str
    reject_totals: dict[str, tuple[int, ...]] | None = None


def outage_rate(samples: np.ndarray, epsilon: float) -> float:
    """Empirical epsilon-outage rate: the ceil(epsilon*n)-th smallest sample."""
    samples = np.asarray(samples, dtype=float)
    n = samples.size
    if epsilon * n < 1.0:
        raise InsufficientSamples(
            f"{n} samples cannot resolve outage probability {epsilon}"
        )
    k = math.ceil(epsilon * n)
    return float(np.partition(samples, k - 1)[k - 1])


def run_trials(
    topology: Topology,
    scheme: NumberingScheme,
    snr: float,
    n_trials: int,
    base_seed: int,
    mode: str = "both",
) -> list[TrialRecord]:
    """Simulate ``n_trials`` fading realizations at one linear SNR.

    Each trial draws channel powers, applies the numbering scheme, builds
    capacities, and runs the selector(s) named by ``mode`` ("optimized",
    "equal_time", or "both").  Deterministic given ``base_seed``.
    """
    if n_trials < 1:
        raise ValueError("n_trials must be >= 1")
    if mode not in (*MODES, "both"):
        raise ValueError(f"mode must be one of {MODES + ('both',)}, got {mode!r}")
    modes = MODES if mode == "both" else (mode,)
    out = _evaluate_trials(
        fading_params(topology), topology, scheme, [float(snr)], base_seed,
        0, n_trials, modes,
    )
    records = []
    for i in range(n_trials):
        opt = out.get("optimized")
        eq = out.get("equal_time")
        rejects = {}
        if opt is not None:
            rejects = {k: int(opt["n_" + k][0, i]) for k in REJECT_KEYS}
        records.append(
            TrialRecord(
                rate_optimized=float(opt["rate"][0, i]) if opt else None,
                rate_equal_time=float(eq["rate"][0, i]) if eq else None,
                active_relays_optimized=int(opt["n_active"][0, i]) if opt else None,
                active_relays_equal_time=int(eq["n_active"][0, i]) if eq else None,
                reject_counters=rejects,
            )
        )
    return records


def sweep(
    topology: Topology,
    scheme: NumberingScheme,
    snr_grid_db: list[float],
    n_trials: int,
    epsilon: float,
    base_seed: int,
    modes: tuple[str, ...] = MODES,
    parallel: int = 1,
) -> dict[str, OutageCurve]:
    """Outage curves over an SNR grid (given in dB), one per requested mode.

    The same per-trial channel draws are used at every grid point, and work
    is split over ``parallel`` processes by contiguous trial ranges with a
    deterministic in-order fold.
    """
    if not snr_grid_db:
        raise ValueError("snr grid must be nonempty")
    if epsilon * n_trials < 1.0:
        raise InsufficientSamples(
            f"{n_trials} trials cannot resolve outage probability {epsilon}"
        )
    for m in modes:
        if m not in MODES:
            raise ValueError(f"unknown mode {m!r}")
    snr_db = [float(v) for v in snr_grid_db]
    snr_lin = [10.0 ** (v / 10.0) for v in snr_db]
    params = fading_params(topology)

    if parallel <= 1:
        out = _evaluate_trials(
            params, topology, scheme, snr_lin, base_seed, 0, n_trials, tuple(modes)
        )
    else:
        bounds = np.linspace(0, n_trials, parallel + 1, dtype=int)
        jobs = [
            (params, topology, scheme, snr_lin, base_seed, int(a), int(b - a), tuple(modes))
            for a, b in zip(bounds[:-1], bounds[1:])
            if b > a
        ]
        with ProcessPoolExecutor(max_workers=parallel) as pool:
            parts = list(pool.map(_evaluate_trials_star, jobs))
        out = {
            m: {
                key: np.concatenate([p[m][key] for p in parts], axis=1)
                for key in parts[0][m]
            }
            for m in modes
        }

    curves: dict[str, OutageCurve] = {}
    for m in modes:
        rates = out[m]["rate"]
        curves[m] = OutageCurve(
            snr_grid=tuple(snr_lin),
            snr_grid_db=tuple(snr_db),
            outage_rate=tuple(outage_rate(rates[s], epsilon) for s in range(len(snr_db))),
            avg_active=tuple(float(out[m]["n_active"][s].mean()) for s in range(len(snr_db))),
            n_trials=n_trials,
            epsilon=epsilon,
            mode=m,
            reject_totals=(
                {
                    k: tuple(int(out[m]["n_" + k][s].sum()) for s in range(len(snr_db)))
                    for k in REJECT_KEYS
                }
                if m == "optimized"
                else None
            ),
        )
    return curves


def _evaluate_trials_star(args):
    return _evaluate_trials(*args)


def _evaluate_trials(
    params: FadingParams,
    topology: Topology,
    scheme: NumberingScheme,
    snr_list: list[float],
    base_seed: int,
    start: int,
    count: int,
    modes: tuple[str, ...],
) -> dict[str, dict[str, np.ndarray]]:
    """Evaluate trials [start, start+count) at every SNR; arrays are (S, T)."""
    n = params.lam.shape[0]
    n_relays = n - 2
    powers = draw_channel_powers_keyed(params, base_seed, count, start)
    orders = _trial_orders(powers, topology, scheme, base_seed, start)
    idx = np.concatenate(
        [
            np.zeros((count, 1), dtype=np.intp),
            orders.astype(np.intp),
            np.full((count, 1), n_relays + 1, dtype=np.intp),
        ],
        axis=1,
    )
    trial_ax = np.arange(count)[:, None, None]
    powers = powers[trial_ax, idx[:, :, None], idx[:, None, :]]

    out: dict[str, dict[str, np.ndarray]] = {m: {} for m in modes}
    for s, snr in enumerate(snr_list):
        caps_b = np.log2(1.0 + snr * powers)
        for m in modes:
            res = batch_optimized(caps_b) if m == "optimized" else batch_equal_time(caps_b)
            for key, arr in res.items():
                if key == "best_id":
                    continue
                store = out[m].setdefault(
                    key, np.empty((len(snr_list), count), dtype=arr.dtype)
                )
                store[s] = arr
    return out


def _trial_orders(
    powers: np.ndarray,
    topology: Topology,
    scheme: NumberingScheme,
    base_seed: int,
    start: int,
) -> np.ndarray:
    """Per-trial transmission orders, (T, N), 1-based relay labels.

    Capacities are monotone in channel power at any SNR, so instantaneous
    orders are computed from powers directly and hold for the whole grid.
    """
    n_trials, n, _ = powers.shape
    n_relays = n - 2
    if n_relays == 0:
        return np.empty((n_trials, 0), dtype=np.intp)
    if scheme in (NumberingScheme.AVERAGE_DESCENDING, NumberingScheme.AVERAGE_LINEAR):
        fixed = np.asarray(renumber(topology, scheme), dtype=np.intp)
        return np.tile(fixed, (n_trials, 1))
    if scheme is NumberingScheme.RANDOM:
        return trial_permutations(base_seed, n_relays, n_trials, start)
    if scheme is NumberingScheme.INSTANTANEOUS_SOURCE_RELAY:
        return np.argsort(-powers[:, 0, 1 : n_relays + 1], axis=1, kind="stable") + 1
    if scheme is NumberingScheme.INSTANTANEOUS_RELAY_RELAY:
        order = np.empty((n_trials, n_relays), dtype=np.intp)
        taken = np.zeros((n_trials, n_relays), dtype=bool)
        cur = np.zeros(n_trials, dtype=np.intp)  # source
        rows = np.arange(n_trials)
        for step in range(n_relays):
            scores = powers[rows, cur, 1 : n_relays + 1].copy()
            scores[taken] = -np.inf
            nxt = np.argmax(scores, axis=1)
            order[:, step] = nxt + 1
            taken[rows, nxt] = True
            cur = nxt + 1
        return order
    raise ValueError(f"unknown numbering scheme {scheme!r}")


# -- output formats -----------------------------------------------------------

CSV_HEADER = (
    "snr_db,outage_rate_optimized,outage_rate_equal_time,"
    "avg_active_optimized,avg_active_equal_time"
)


def _fmt(value: float | None) -> str:
    return "nan" if value is None else format(value, ".9g")


def curves_to_csv(curves: dict[str, OutageCurve], config_echo: dict) -> str:
    """Fixed-schema CSV with the resolved configuration echoed in a comment."""
    some = next(iter(curves.values()))
    opt = curves.get("optimized")
    eq = curves.get("equal_time")
    lines = [
        "# config: " + json.dumps(config_echo, sort_keys=True),
        CSV_HEADER,
    ]
    for s, db in enumerate(some.snr_grid_db):
        lines.append(
            ",".join(
                [
                    _fmt(db),
                    _fmt(opt.outage_rate[s] if opt else None),
                    _fmt(eq.outage_rate[s] if eq else None),
                    _fmt(opt.avg_active[s] if opt else None),
                    _fmt(eq.avg_active[s] if eq else None),
                ]
            )
        )
    return "\n".join(lines) + "\n"


def curves_to_json(curves: dict[str, OutageCurve], config_echo: dict) -> str:
    """Full experiment record: config echo, curves, and reject counters."""
    doc = {"config": config_echo, "curves": {}}
    for mode, c in curves.items():
        doc["curves"][mode] = {
            "snr_db": list(c.snr_grid_db),
            "snr_linear": list(c.snr_grid),
            "outage_rate": list(c.outage_rate),
            "avg_active": list(c.avg_active),
            "n_trials": c.n_trials,
            "epsilon": c.epsilon,
            "reject_totals": (
                {k: list(v) for k, v in c.reject_totals.items()}
                if c.reject_totals
                else None
            ),
        }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"
