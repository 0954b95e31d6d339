"""What an eavesdropper gains, and how detectable that makes the attack.

For a coherent attack (J on the way in, K on the way out) we compute the
exact probability P_corr that the anticorrelation check fails, plus Holevo
bounds on Eve's information about each party's bit.
"""
import math

import numpy as np

from qdkd import adversary as adv

for name, attack in [
    ("identity", adv.make_attack("identity")),
    ("intercept-resend Z", adv.make_attack("intercept-resend", basis="Z")),
    ("intercept-resend X", adv.make_attack("intercept-resend", basis="X")),
]:
    o = adv.evaluate_attack(attack)
    print(f"{name:20s} P_corr={o.p_corr:.3f}  chi_bob={o.chi_eve_bob:.3f}  chi_alice={o.chi_eve_alice:.3f}")

print("\nsymmetric rotation attack: information is paid for in P_corr")
print(" theta   P_corr  q        chi_bob  chi_alice")
for o in adv.rotation_sweep(np.linspace(0, math.pi / 4, 6)):
    t = o.attack.params["theta"]
    print(f" {t:.3f}   {o.p_corr:.3f}   {o.q:+.1e}  {o.chi_eve_bob:.3f}    {o.chi_eve_alice:.3f}")

print("\nasymmetric rotation leaves the q = 0 line")
o = adv.evaluate_attack(adv.make_attack("rotation", theta=0.2, theta_one=0.6))
print(f" P_corr={o.p_corr:.3f}  q={o.q:.3f}  chi_bob={o.chi_eve_bob:.3f}  chi_alice={o.chi_eve_alice:.3f}")

# The trace form and the overlap form of P_corr agree for random attacks too.
attacks = [adv.make_attack("random-unitary", seed=s, ancilla_dim=2) for s in range(50)]
print("\ndiscrepancies over 50 random attacks:", len(adv.check_p_corr_consistency(attacks)))
