"""
Pauli-basis tomography of a simulated state
===========================================

Measure copies of a random two-qubit state in the nine Pauli bases, average
sign products into Pauli expectation values and invert linearly.
"""

import numpy as np

from qtomo import run_tomography
from qtomo.state import maximally_mixed, random_state
from qtomo.tomography import hs_error_sq, simulate_estimates

# %%
# A random full-rank state and 9000 copies, 1000 per basis.

rho = random_state(2, 7)
result = run_tomography(rho, 9000, seed=1, project=True)
for est in result.per_observable[:5]:
    print(f"{est.observable.label}: {est.e_value:+.4f} from {est.sample_count} samples")
print(result.errors(rho))

# %%
# The linear-inversion estimate is Hermitian with unit trace but may have
# small negative eigenvalues; the projected estimate is a valid state.

print("raw spectrum      ", np.round(np.linalg.eigvalsh(result.estimate), 4))
print("projected spectrum", np.round(np.linalg.eigvalsh(result.projected), 4))

# %%
# At the maximally mixed state the mean of d n ||rho_hat - rho||_2^2 is
# 10^N - 1, just under the general 10^N bound.

for n_qubits in (1, 2, 3):
    mm = maximally_mixed(n_qubits)
    n = 100 * 3 ** n_qubits
    e, _ = simulate_estimates(mm, n, seed=(0, n_qubits), reps=20_000)
    scaled = mm.dim * n * hs_error_sq(e, mm)
    print(f"N={n_qubits}: mean {scaled.mean():8.2f}  (10^N - 1 = {10 ** n_qubits - 1})")
