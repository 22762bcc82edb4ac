"""
Random-sign perturbations of the maximally mixed state
======================================================

Build the instances used for the copy-count lower bound and look at how the
operator norm of the random Pauli sum concentrates.
"""

import numpy as np

from qtomo import HardInstanceParams, build_instance
from qtomo.hard_instance import hamming_separation_check, opnorm_concentration_sweep

# %%
# Default parameters: weight at least ceil(9N/10), c = 1/200, eps = 0.1.

params = HardInstanceParams(4)
print(f"N={params.n_qubits} w={params.min_weight} l={params.ell} regime={params.regime()}")
h = build_instance(params, seed=3)
print(f"clip={h.clip}  ||W||_op={h.w_opnorm:.3f}  sqrt(l/d)={params.norm_unit:.3f}")
print(f"smallest eigenvalue {np.linalg.eigvalsh(h.state.data)[0]:.5f} (>= 1/(2d) = {1 / 32})")
print(f"trace distance to I/d {h.trace_distance_to_mm:.2e}, eps = {params.eps}")

# %%
# The normalized constant ||W||_op / sqrt(l/d) drifts upwards with N toward
# the free-probability value 2.

for n_qubits in range(2, 8):
    stats = opnorm_concentration_sweep(HardInstanceParams(n_qubits), 300, seed=n_qubits)
    q = stats.quantiles((0.5, 0.999))
    print(f"N={n_qubits}: median C {q[0.5]:.3f}  99.9% {q[0.999]:.3f}")

# %%
# Flipping signs moves the state by an amount proportional to the number of
# flips.

c_est = opnorm_concentration_sweep(params, 2000, seed=1).c_estimate()
rng = np.random.default_rng(0)
for flips in (1, 5, 20, params.ell):
    zhat = h.z.copy()
    zhat[rng.choice(params.ell, flips, replace=False)] *= -1
    r = hamming_separation_check(h, zhat, c_est)
    print(f"ham={r.hamming:3d}  lhs={r.lhs:.3e}  rhs={r.rhs:.3e}  holds={r.holds}")
