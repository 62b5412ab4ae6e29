# Outage-rate curves for linear relay pools of growing size: optimized time
# allocation versus the equal-time baseline, plus active-relay statistics.
# Desk-scale statistics (2000 trials, epsilon 0.02) keep this quick; raise
# TRIALS for smoother curves.

from relayalloc import NumberingScheme, linear_topology, sweep
from relayalloc.montecarlo import curves_to_csv

SNR_DB = [0, 5, 10, 15, 20]
TRIALS = 2000
EPSILON = 0.02
SEED = 7

print(f"{TRIALS} fading realizations per point, outage target {EPSILON}")
print(f"{'pool':>4} {'mode':>10} " + " ".join(f"{db:>7}dB" for db in SNR_DB))
for n_relays in (1, 2, 4, 6):
    curves = sweep(
        linear_topology(n_relays),
        NumberingScheme.AVERAGE_DESCENDING,
        SNR_DB,
        TRIALS,
        EPSILON,
        base_seed=SEED,
    )
    for mode in ("optimized", "equal_time"):
        rates = " ".join(f"{r:9.3f}" for r in curves[mode].outage_rate)
        print(f"{n_relays:>4} {mode:>10} {rates}")

# The same seed gives every pool the same fading on shared links, so the
# curves are directly comparable.  Active-relay counts show the optimizer
# keeping more relays busy at high SNR than the equal-time baseline:
curves = sweep(
    linear_topology(6),
    NumberingScheme.AVERAGE_DESCENDING,
    SNR_DB,
    TRIALS,
    EPSILON,
    base_seed=SEED,
)
print("\nmean active relays, 6-relay pool:")
for mode in ("optimized", "equal_time"):
    counts = " ".join(f"{a:9.2f}" for a in curves[mode].avg_active)
    print(f"     {mode:>10} {counts}")

with open("outage_sweep_demo.csv", "w", encoding="utf-8", newline="\n") as fh:
    fh.write(curves_to_csv(curves, {"topology": "linear-6", "seed": SEED}))
print("\nwrote outage_sweep_demo.csv")
