"""Dense coding on a shared singlet.

Both parties encode one bit by applying Z (bit 1) or the identity (bit 0) to
their half. A Bell measurement restricted to psi-/psi+ reveals only the XOR
of the two bits, which is the public announcement.
"""
import itertools

import numpy as np

from qdkd import protocol as pr
from qdkd import quantum as qm

rng = np.random.default_rng(0)
singlet = qm.psi_minus()

print("alice bob  -> outcome  announcement")
for a, b in itertools.product((0, 1), repeat=2):
    state = pr.bob_encode(b, pr.alice_encode(a, singlet))
    outcome, _ = pr.incomplete_bell_measure(state, rng)
    print(f"  {a}     {b}   -> {outcome.value:7s}  {pr.announce(outcome)}")

# Alice's bit-1 gate takes psi- to psi+ up to a global sign.
flipped = pr.alice_encode(1, singlet)
print("\nZ_A psi- equals psi+ up to phase:", qm.equal_up_to_phase(flipped, qm.psi_plus()))

# Either party's reduced state is maximally mixed, so one half alone carries no bit.
print("reduced state of B:\n", np.round(qm.partial_trace(flipped, ["B"]).data, 12))
