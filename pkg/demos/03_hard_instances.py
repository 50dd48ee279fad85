"""The hard instance family and the lazy adversary that samples it on the fly.

Every player's i/n-point sits in chunk i of a fine grid.  A hidden permutation
pi decides who is left of whom; any fair one-piece-per-player allocation has to
hand pieces out in the order pi^-1, so a protocol must learn pi.
"""

import random

from rwcake import AdversaryState, adversary_cut, adversary_finalize, count_J, enumerate_J, sample_J
from rwcake.adversary import instance_distribution

n = 3
print(f"|J| for n = 1..4: {[count_J(k) for k in range(1, 5)]}")

inst = sample_J(n, random.Random(11))
print("sampled instance:", inst.to_json())
print("pi^-1 (left-to-right owners of a fair allocation):", inst.pi_inverse())

# The adversary commits to nothing until asked.
state = AdversaryState.start(n, random.Random(3))
for player, chunk in [(1, 2), (2, 2), (3, 2)]:
    x = adversary_cut(state, player, chunk)
    print(f"Cut(player {player}, {chunk}/{n}) -> {x}")
print("consistent instance:", adversary_finalize(state).to_json())

# Whatever order the questions come in, the instance law is uniform on J.
law = instance_distribution(n, [(2, 1), (1, 3), (3, 2)])
print("distinct probabilities:", set(law.values()), "over", len(law), "instances")
assert set(law) == set(enumerate_J(n))
