"""
Measurement information channels
================================

How much can one copy measured with a product POVM reveal about high-weight
Pauli directions?
"""

import numpy as np

from qtomo.measurement import PauliBasisMeasurement, ProductPovm, SingleQubitPovm
from qtomo.mic_info import (lemma62_certify, mic_matrix, mic_toy_identity, random_product_povm,
                            spectral_quantity, weight_bound)
from qtomo.pauli import enumerate_by_min_weight

# %%
# A single-qubit Z measurement sees Z fully and X, Y not at all.

mic = mic_matrix(PauliBasisMeasurement.from_label("Z"))
for letter, matrix in (("X", [[0, 1], [1, 0]]), ("Z", [[1, 0], [0, -1]])):
    v = np.array(matrix) / np.sqrt(2)
    print(letter, mic.quadratic_form(v))

# %%
# Averaged over the eight states I/2 + alpha z.sigma the channel output is
# 2 alpha^2 for any basis.

basis = ProductPovm((SingleQubitPovm.along([1.0, 2.0, -0.5]),))
print(mic_toy_identity(basis, 0.05).to_dict())

# %%
# The sum over weight >= w normalized Paulis never exceeds sum_{m>=w} C(N, m).

obs = enumerate_by_min_weight(3, 3)
rng = np.random.default_rng(1)
values = [spectral_quantity(random_product_povm(3, rng), obs) for _ in range(2000)]
print(f"max over random POVMs {max(values):.4f}, bound {weight_bound(3, 3)}")
print(f"Pauli basis ZZZ: {spectral_quantity(PauliBasisMeasurement.from_label('ZZZ'), obs)}")
print(lemma62_certify(2000, 4, 3, seed=0).to_dict())
