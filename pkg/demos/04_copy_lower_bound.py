"""
Copy-count lower bound, term by term
====================================

Mutual information between the hidden signs and the outcomes, the Fano-type
lower bound it must exceed, and the arithmetic that turns the two into a
copy count.
"""

from qtomo.hard_instance import HardInstanceParams
from qtomo.measurement import PauliBasisMeasurement, constant_strategy, flip_strategy
from qtomo.mic_info import (binary_entropy, binom_identity, fano_bound_check, lower_bound_copies,
                            mi_experiment, tail_prob)

# %%
# Exact mutual information on one qubit, enumerating all 8 sign vectors and
# every outcome history.

params = HardInstanceParams(1, 1, c=1.0, eps=1.0)
for name, strategy in (("Z only", constant_strategy(PauliBasisMeasurement.from_label("Z"))),
                       ("adaptive", flip_strategy())):
    r = mi_experiment(params, strategy, 4)
    print(name, r.per_coordinate.round(4), "average", round(r.average, 4),
          "bound", round(r.report.rhs, 4))

# %%
# An estimator that is eps-accurate errs on each sign with probability at
# most 0.41, which forces at least 1 - h(0.41) bits per sign.

print(fano_bound_check([0.41], [0.03]).to_dict())
print("1 - h(0.41) =", 1 - binary_entropy(0.41))

# %%
# Exact combinatorics: 10^N = (9 + 1)^N and the binomial weight tail.

print(binom_identity(20).verdict, float(tail_prob(10, 0.9, 9)))

# %%
# Putting the pieces together. Halving eps multiplies the bound by four.

for n_qubits in (10, 12, 20):
    rec = lower_bound_copies(n_qubits, 0.1)
    print(f"N={n_qubits}: log10 n >= {rec.chain['log10_n_lower']:.2f}; "
          f"concentration term below sqrt(N)/10^N: {rec.chain['concentration_below_first_term']}")
print(lower_bound_copies(12, 0.05).n_lower / lower_bound_copies(12, 0.1).n_lower)
