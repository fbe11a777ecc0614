"""A Fourier system carried two rungs up the ladder stays orthogonal.

The weight is the product of |Z|^2 / ln along the orbit, which is exactly
the derivative of phi_1^2, so the Gram matrix is diag(2l, l, ..., l).
"""

import numpy as np

from ladderlab import build_ladder
from ladderlab.ortho import base_system, gram_matrix
from ladderlab.segments import window_requirement

T = 1e4
table = build_ladder(*window_requirement(T, 2))
rep = gram_matrix(table, base_system(0.5, 5), T, k=2)
np.set_printoptions(precision=10, suppress=True, linewidth=120)
print(rep.G)
print(f"off-diagonal residual {rep.offdiag_residual:.2e}, diagonal residual {rep.diag_residual:.2e}")
