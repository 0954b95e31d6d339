"""Which protocol yields the most secret bits per transmitted qubit?

Dense-coded keys pay for four fibre passes, so they win only on short links.
"""
from qdkd import efficiency as ef

p_low, p_high = ef.switch_thresholds()
print(f"switch points in transmission probability: {p_low:.4f}, {p_high:.4f}")

for alpha in (0.2, 1e-2, 1e-4):
    l1, l2 = ef.crossover_distances(alpha)
    print(f"alpha={alpha:g} dB/km: dense coding best below {l1:.1f} km, BB84 best beyond {l2:.1f} km")

print()
print(ef.efficiency_csv(ef.efficiency_table(0.2, [0, 5, 10, 15, 20, 30])), end="")

ch = ef.ChannelModel(0.2, 10)
print(f"\nquantum memory for a 10 km link: {ef.storage_requirement('QDKD', ch) * 1e6:.0f} us")
