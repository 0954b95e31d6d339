"""A full honest session followed by key recovery.

Each conclusive encode round yields two key bits: Alice knows ``a`` and learns
``b = s xor a`` from the announcement, and Bob does the reverse.
"""
from qdkd import protocol as pr

report = pr.run_session(pr.SessionConfig(rounds=5000, check_fraction=0.2, rng_seed=42))
print(f"encode rounds      {report.encode_rounds}")
print(f"conclusive rounds  {report.conclusive_rounds}")
print(f"key bits per party {len(report.alice_view.key_a) + len(report.alice_view.key_b)}")
print(f"P_corr estimate    {report.p_corr_estimate}  ({report.p_corr_check_count} checks)")
print(f"QBER estimate      {report.qber_estimate}")

same = (report.alice_view.key_a == report.bob_view.key_a).all() and \
       (report.alice_view.key_b == report.bob_view.key_b).all()
print("views agree:", bool(same))

# A noisy channel shows up as disagreement between the two views.
noisy = pr.run_session(pr.SessionConfig(rounds=5000, channel_flip_prob=0.05, rng_seed=42))
print(f"\nwith 5% phase flips, QBER estimate = {noisy.qber_estimate:.4f}")

# Bob can hide the order of his key half with a shared secret seed.
key_b = report.bob_view.key_b[:16]
hidden = pr.scramble_key(key_b, secret_seed=99)
print("\nkey_b    ", "".join(map(str, key_b)))
print("scrambled", "".join(map(str, hidden)))
print("restored ", "".join(map(str, pr.unscramble_key(hidden, secret_seed=99))))
