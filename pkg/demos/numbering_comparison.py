# Relay numbering decides who decodes whom: relay k only hears slots before
# its own.  This compares the numbering heuristics on a 3x3 relay grid and
# shows the optimization is robust to all of them, with only the random
# order giving ground.

from relayalloc import NumberingScheme, grid_topology, renumber, sweep

TOPO = grid_topology(3)
SNR_DB = [0, 10, 20]
TRIALS = 2000
EPSILON = 0.02

print("grid columns run toward the destination; orders below are relay labels")
for scheme in (NumberingScheme.AVERAGE_DESCENDING, NumberingScheme.AVERAGE_LINEAR):
    print(f"  {scheme.value:22} {renumber(TOPO, scheme)}")

print(f"\noutage rate (optimized), {TRIALS} trials @ epsilon {EPSILON}:")
print(f"{'scheme':>28} " + " ".join(f"{db:>7}dB" for db in SNR_DB))
for scheme in NumberingScheme:
    curves = sweep(TOPO, scheme, SNR_DB, TRIALS, EPSILON, base_seed=3, modes=("optimized",))
    rates = " ".join(f"{r:9.3f}" for r in curves["optimized"].outage_rate)
    print(f"{scheme.value:>28} {rates}")

print(
    "\nevery scheme sees identical per-trial fading (same seed), so the\n"
    "spread above is purely the effect of transmission order"
)
