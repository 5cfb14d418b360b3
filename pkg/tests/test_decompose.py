import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from multilevel.constructors import example3_state, maximally_entangled, xi_states
from multilevel.decompose import (
    TABLE1,
    WitnessSpec,
    alpha_from_det,
    bipartite_max_overlap,
    evaluate_witness,
    extremal_witness_search,
    is_decomposable,
    make_witness,
    max_entangled_spectrum,
    max_singular_value,
    table1_overlap,
)
from multilevel.schmidt import SchmidtSpectrum, schmidt_spectrum
from multilevel.statevec import Bipartition, DensityMatrix, PureState, random_state
from multilevel.tableaux import CapExceeded

CUT01 = Bipartition.from_left([0], 2)
XI1_VALUE = math.sqrt((3 + math.sqrt(5)) / 6)
XI2_VALUE = math.sqrt((3 + 2 * math.sqrt(2)) / 6)


def test_max_singular_value_examples():
    val, ansatz = max_singular_value([[0.5, 0.5], [0.5, 0.5]])
    assert val == pytest.approx(1)
    assert np.allclose(ansatz.alpha, 1 / math.sqrt(2)) and np.allclose(ansatz.beta, 1 / math.sqrt(2))
    r = 1 / math.sqrt(3)
    assert max_singular_value([[r, r], [r, 0]])[0] == pytest.approx(XI1_VALUE, abs=1e-12)
    a, b = math.sqrt(3 / 4), 1 / (2 * math.sqrt(3))
    assert max_singular_value([[a, b], [b, b]])[0] == pytest.approx(XI2_VALUE, abs=1e-12)


def test_product_ansatz_reproduces_top_rank_one_part():
    m = np.array([[0.6, 0.5], [0.45, 0.3]])
    m = m / np.linalg.norm(m)
    val, ansatz = max_singular_value(m)
    assert float(ansatz.alpha @ m @ ansatz.beta) == pytest.approx(val)


@pytest.mark.parametrize("det,value", [(0, 1), (0.5, 1 / math.sqrt(2)), (-0.5, 1 / math.sqrt(2)), (-1 / 3, XI1_VALUE)])
def test_alpha_from_det(det, value):
    assert alpha_from_det(det) == pytest.approx(value, abs=1e-12)


def test_alpha_from_det_rejects_impossible_determinant():
    with pytest.raises(ValueError):
        alpha_from_det(0.6)


@given(seed=st.integers(0, 2**32 - 1))
def test_alpha_from_det_matches_svd(seed):
    m = np.random.default_rng(seed).standard_normal((2, 2))
    m /= np.linalg.norm(m)
    assert alpha_from_det(np.linalg.det(m)) == pytest.approx(np.linalg.svd(m, compute_uv=False)[0], abs=1e-12)


def test_bipartite_max_overlap_examples():
    psi4 = schmidt_spectrum(maximally_entangled(4), CUT01)
    assert bipartite_max_overlap(psi4, 2, 2)[0] == pytest.approx(1)
    rank5 = max_entangled_spectrum(5, 6)
    assert bipartite_max_overlap(rank5, 2, 3)[0] == pytest.approx(math.sqrt((5 + math.sqrt(17)) / 10), abs=1e-12)
    xi1 = schmidt_spectrum(xi_states()[0], CUT01)
    assert bipartite_max_overlap(xi1, 2, 2)[0] == pytest.approx(XI1_VALUE, abs=1e-12)


def test_bipartite_max_overlap_cap():
    with pytest.raises(CapExceeded):
        bipartite_max_overlap(max_entangled_spectrum(20, 25), 5, 5)


def test_is_decomposable_examples():
    psi4 = schmidt_spectrum(maximally_entangled(4), CUT01)
    res = is_decomposable(psi4, 2, 2)
    assert res.decomposable and res.max_overlap == pytest.approx(1)
    assert np.allclose(res.factor_spectra[0], 1 / math.sqrt(2))
    e3 = schmidt_spectrum(example3_state(), Bipartition.from_left([0], 3))
    assert not is_decomposable(e3, 2, 2).decomposable
    two = SchmidtSpectrum(np.array([math.sqrt(0.9), math.sqrt(0.1), 0, 0]))
    res = is_decomposable(two, 2, 2)
    assert res.decomposable
    assert res.arrangement.tolist() in ([[math.sqrt(0.9), math.sqrt(0.1)], [0, 0]],
                                        [[math.sqrt(0.9), 0], [math.sqrt(0.1), 0]])


def test_is_decomposable_rank_too_large():
    res = is_decomposable(max_entangled_spectrum(5, 5), 2, 2)
    assert not res.decomposable and res.notes


@given(seed=st.integers(0, 2**32 - 1))
def test_exact_overlap_dominates_random_products(seed):
    """No product of two-qubit pairs beats the arrangement bound."""
    rng = np.random.default_rng(seed)
    s = random_state((4, 4), rng)
    bound = bipartite_max_overlap(schmidt_spectrum(s, CUT01), 2, 2)[0]
    a, b = random_state((2, 2), rng), random_state((2, 2), rng)
    prod = np.einsum("ab,cd->acbd", a.tensor(), b.tensor()).reshape(16)
    assert abs(np.vdot(prod, s.amps)) <= bound + 1e-12


def test_table1_rows():
    assert len(TABLE1) == 12
    for row in TABLE1[:3]:
        assert table1_overlap(row.d1, row.d2, row.rank) == pytest.approx(row.value, abs=1e-9)
    assert table1_overlap(2, 2, 4) == pytest.approx(1)
    assert table1_overlap(2, 2, 3) == pytest.approx(XI1_VALUE, abs=1e-12)
    assert TABLE1[6].value == pytest.approx(0.965925826, abs=1e-9)


def test_extremal_search_boundary():
    spec, val = extremal_witness_search(det_sign=0)
    assert val == 1


def test_extremal_search_negative_det():
    spec, val = extremal_witness_search(det_sign=-1, starts=40)
    assert val == pytest.approx(XI1_VALUE, abs=1e-6)
    assert np.allclose(spec.coeffs, [1 / math.sqrt(3)] * 3 + [0], atol=1e-5)


def test_witness_examples():
    xi1, xi2 = xi_states()
    w1 = make_witness(xi1)
    assert w1.alpha_sq == pytest.approx((3 + math.sqrt(5)) / 6, abs=1e-12)
    assert make_witness(xi2).alpha_sq == pytest.approx((3 + 2 * math.sqrt(2)) / 6, abs=1e-12)
    assert evaluate_witness(xi1, w1) == pytest.approx((3 + math.sqrt(5)) / 6 - 1, abs=1e-12)
    psi4 = maximally_entangled(4)
    assert evaluate_witness(DensityMatrix.from_pure(psi4), w1) == pytest.approx(w1.alpha_sq - 0.75, abs=1e-12)
    mixed = DensityMatrix.maximally_mixed((4, 4))
    assert evaluate_witness(mixed, w1) == pytest.approx(w1.alpha_sq - 1 / 16)
    assert np.allclose(w1.operator(), w1.alpha_sq * np.eye(16) - xi1.projector())


def test_witness_from_decomposable_state_warns():
    with pytest.warns(UserWarning):
        w = make_witness(maximally_entangled(4))
    assert w.alpha_sq == pytest.approx(1)


def test_witness_spec_validation():
    with pytest.raises(ValueError):
        WitnessSpec(xi_states()[0], 1.5, (2, 2))
    w = make_witness(xi_states()[0])
    with pytest.raises(ValueError):
        evaluate_witness(maximally_entangled(2), w)


@given(seed=st.integers(0, 2**32 - 1))
def test_witness_nonnegative_on_decomposable_states(seed):
    rng = np.random.default_rng(seed)
    w = make_witness(xi_states()[0])
    a, b = random_state((2, 2), rng), random_state((2, 2), rng)
    prod = np.einsum("ab,cd->acbd", a.tensor(), b.tensor()).reshape(16)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert evaluate_witness(PureState((4, 4), prod), w) >= -1e-12
