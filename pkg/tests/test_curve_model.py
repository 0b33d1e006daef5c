import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from curvemax.curve_model import (CurveParams, ParamSet, anisotropic_dilate, covering_number,
                                  dyadic_indices, gamma_eval, lacunary_check, lacunary_selection,
                                  param_set_from_descriptor, separated_subsequence,
                                  skim_to_dyadic_representatives)


def test_params_validation():
    with pytest.raises(ValueError):
        CurveParams(1.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        CurveParams(2.0, 0.0, 1.0)
    p = CurveParams(3, 2, -1)
    assert p.coefficient(1) == 2.0 and p.coefficient(-1) == -1.0
    assert p.to_dict() == {"b": 3.0, "c_plus": 2.0, "c_minus": -1.0}


def test_param_set_validation():
    for bad in ((), (1.0, 1.0), (2.0, 1.0), (-1.0,), (float("inf"),)):
        with pytest.raises(ValueError):
            ParamSet(bad)
    assert ParamSet.from_iterable([3, 1, 3, 2]).values == (1.0, 2.0, 3.0)


def test_gamma_two_sided():
    p = CurveParams(2.0, 1.0, -3.0)
    assert gamma_eval(p, 2.0) == 4.0
    assert gamma_eval(p, -2.0) == -12.0
    assert gamma_eval(p, 0.0) == 0.0


@given(st.floats(0.05, 20), st.floats(-5, 5), st.floats(1.1, 4))
def test_gamma_homogeneous(s, t, b):
    p = CurveParams(b, 1.3, -0.4)
    assert math.isclose(gamma_eval(p, s * t), s**b * gamma_eval(p, t), rel_tol=1e-12, abs_tol=1e-12)


def test_anisotropic_dilate():
    p = CurveParams(3.0, 1.0, 1.0)
    assert np.allclose(anisotropic_dilate(p, 2.0, [1.0, 1.0]), [2.0, 8.0])
    with pytest.raises(ValueError):
        anisotropic_dilate(p, 0.0, [1.0, 1.0])


def test_covering_number_hand_counts():
    # 1 lies in both [1/2, 1] and [1, 2]
    assert dyadic_indices(ParamSet((1.0,))) == [-1, 0]
    assert covering_number(ParamSet((1.0,))) == 3
    assert covering_number(ParamSet((1.5, 3.0, 100.0))) == 4
    assert covering_number(ParamSet((1.1, 1.2, 1.9))) == 2


@settings(max_examples=60)
@given(st.lists(st.floats(1e-3, 1e3), min_size=1, max_size=12), st.integers(-6, 6))
def test_covering_number_dyadic_invariance(vals, k):
    U = ParamSet.from_iterable(vals)
    V = ParamSet.from_iterable([2.0**k * v for v in vals])
    assert covering_number(U) == covering_number(V)
    assert 2 <= covering_number(U) <= 1 + 2 * len(U)


def test_lacunary_and_skim():
    U = ParamSet((1.0, 1.5, 4.0, 5.0, 16.0))
    assert not lacunary_check(U, 2.0)
    S = skim_to_dyadic_representatives(U)
    assert S.values == (1.0, 4.0, 16.0)
    assert lacunary_check(S, 4.0)
    with pytest.raises(ValueError):
        lacunary_check(U, 1.0)


def test_descriptors():
    assert param_set_from_descriptor("[4, 1, 2]").values == (1.0, 2.0, 4.0)
    lac = param_set_from_descriptor({"type": "lacunary", "start": 1, "ratio": 3, "count": 3})
    assert lac.values == (1.0, 3.0, 9.0)
    assert param_set_from_descriptor({"type": "explicit", "values": [2, 1]}).values == (1.0, 2.0)
    with pytest.raises(ValueError):
        param_set_from_descriptor({"type": "other"})


@pytest.mark.parametrize("mu", [1, 2, 3, 4, 5])
def test_lacunary_selection(mu):
    p = CurveParams(2.0, 1.0, 1.0)
    sel = lacunary_selection(p, mu, 1.9)
    assert sel.M == 2**mu - 1 and len(sel.u_list) == sel.M
    assert covering_number(ParamSet(sel.u_list)) == 2**mu
    assert sel.verify()
    # K is computed from N = M + 1
    assert math.isclose(math.log2(sel.K), 2 * 2.0 * math.log2(1.9 * 2**mu))


def test_separated_subsequence_needs_large_cover():
    U = ParamSet(tuple(2.0 ** (k + 0.5) for k in range(31)))
    with pytest.raises(ValueError):
        separated_subsequence(U, 1.9, 2.0)


def test_separated_subsequence_picks_gap():
    # with C = 1 and b = 1.01 the needed gap is small enough for a long lacunary set
    U = ParamSet(tuple(2.0 ** (k + 0.5) for k in range(400)))
    sel = separated_subsequence(U, 1.0, 1.01)
    assert sel.verify() and sel.M == 2**sel.mu - 1 and sel.M >= 1
