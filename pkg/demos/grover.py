"""
Grover search with an uncomputed oracle ancilla
===============================================

Each oracle call writes membership into a fresh ancilla, flips the phase with
Z and lets the auto scope uncompute the ancilla. Without that step the
ancilla stays entangled with the search register and the diffuser fails to
amplify.
"""

from quncomp import sim

n, marked, k = 3, [5], 2

exact = sim.grover_closed_form(n, len(marked), k)
with_uncompute = sim.grover_success_probability(n, marked, k)
without = sim.grover_success_probability(n, marked, k, uncompute=False)

print(f"closed form        {exact:.12f}")
print(f"with uncompute     {with_uncompute:.12f}")
print(f"without uncompute  {without:.12f}")
print(sim.grover_demo(n, marked, k))
