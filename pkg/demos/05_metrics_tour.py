"""A short tour of the subspace metrics and what they measure.

Two d-dimensional subspaces are compared through their principal angles;
the determinant similarity multiplies squared cosines (one orthogonal
direction kills it) while the Frobenius discrepancy sums squared sines
(each misaligned direction contributes at most 1).
"""

import numpy as np

from grouse import (
    basis_with_angles,
    determinant_similarity,
    frobenius_discrepancy,
    principal_angles,
    random_orthonormal,
)

rng = np.random.default_rng(3)
ubar = random_orthonormal(50, 4, rng)

print("prescribed angle cosines -> metrics")
for cosines in ([1.0, 1.0, 1.0, 1.0],
                [1.0, 1.0, 1.0, 0.7],
                [0.9, 0.9, 0.9, 0.9],
                [1.0, 1.0, 1.0, 0.0]):
    u = basis_with_angles(ubar, np.array(cosines), rng)
    zeta = determinant_similarity(u, ubar)
    eps = frobenius_discrepancy(u, ubar)
    recovered = principal_angles(u, ubar)
    print(f"cos={cosines} -> zeta={zeta:.4f} eps={eps:.4f} "
          f"recovered={np.round(recovered, 4)}")

print("\nrandom subspace pairs: zeta is tiny, eps is near d")
for _ in range(3):
    u = random_orthonormal(50, 4, rng)
    print(f"zeta={determinant_similarity(u, ubar):.3e} "
          f"eps={frobenius_discrepancy(u, ubar):.4f}")

print("\nboth metrics see the span only: rotating basis columns changes nothing")
u = random_orthonormal(50, 4, rng)
q = np.linalg.qr(rng.standard_normal((4, 4)))[0]
print(f"|zeta(UQ) - zeta(U)| = {abs(determinant_similarity(u @ q, ubar) - determinant_similarity(u, ubar)):.2e}")
