import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ladderlab.ladder import phi1_iter_ext
from ladderlab.ortho import (base_system, exact_gram, gram_matrix, substitution_gram,
                             weighted_eval, _orbit_weight)
from ladderlab.quadrature import gauss_legendre
from ladderlab.segments import iterated_segment


@settings(max_examples=25, deadline=None)
@given(st.floats(0.05, 5.0), st.integers(1, 9))
def test_base_system_orthonormal_table(l, N):
    sys = base_system(l, N)
    x, w = gauss_legendre(64)
    u = l * (x + 1)
    B = sys.evaluate_all(u)
    G = (B * (l * w)) @ B.T
    assert np.allclose(G, exact_gram(sys), atol=1e-12 * max(1.0, l))


def test_base_norms():
    sys = base_system(0.5, 7)
    assert sys.norms[0] == 1.0 and np.all(sys.norms[1:] == 0.5)
    assert sys.label(1).startswith("cos") and sys.label(2).startswith("sin")


def test_weighted_eval_k0(ladder_1e4):
    sys = base_system(0.5, 5)
    t = np.array([1e4 + 0.1, 1e4 + 0.7])
    assert np.allclose(weighted_eval(ladder_1e4, sys, 1e4, 0, 3, t), sys.evaluate(3, t - 1e4))


def test_weighted_eval_constant_and_chain_rule(ladder_1e4):
    sys = base_system(0.5, 5)
    seg = iterated_segment(ladder_1e4, 1e4, 1.0, 2)
    t = np.linspace(seg.lo, seg.hi, 9)[1:-1]
    F0 = weighted_eval(ladder_1e4, sys, 1e4, 2, 0, t, seg=seg)
    u, w = _orbit_weight(ladder_1e4, t, 2)
    assert np.allclose(F0 ** 2, w, rtol=1e-13)
    F3 = weighted_eval(ladder_1e4, sys, 1e4, 2, 3, t, seg=seg)
    assert np.allclose(F3 ** 2, sys.evaluate(3, (u - 1e4).astype(float)) ** 2 * w, rtol=1e-12)


def test_weighted_eval_outside(ladder_1e4):
    with pytest.raises(ValueError):
        weighted_eval(ladder_1e4, base_system(0.5, 3), 1e4, 1, 0, 1e4)


@pytest.mark.parametrize("k", [1, 2])
def test_gram_exact(ladder_1e5, k):
    rep = gram_matrix(ladder_1e5, base_system(0.5, 7), 1e5, k)
    assert np.array_equal(rep.G, rep.G.T)
    assert rep.offdiag_residual <= 1e-4
    assert rep.diag_residual <= 1e-4
    assert rep.G[0, 0] == pytest.approx(1.0, rel=1e-4)


def test_gram_tolerance_halving(ladder_1e5):
    sys = base_system(0.5, 7)
    for k in (1, 2):
        worst = [gram_matrix(ladder_1e5, sys, 1e5, k, rtol=rt, max_width=None).worst_residual
                 for rt in (1e-2, 5e-3, 2.5e-3)]
        assert worst[0] > worst[1] > worst[2]


def test_substitution_oracle(ladder_1e4):
    sys = base_system(0.5, 7)
    G = gram_matrix(ladder_1e4, sys, 1e4, 2).G
    S = substitution_gram(ladder_1e4, sys, 1e4, 2)
    assert np.max(np.abs(S - G)) <= 1e-6
