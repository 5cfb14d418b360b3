import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from multilevel.constructors import example3_state, maximally_entangled, xi_states
from multilevel.schmidt import SchmidtSpectrum, coefficient_matrix, lu_overlap_bound, schmidt_spectrum
from multilevel.seesaw import haar_random_unitary
from multilevel.statevec import (
    Bipartition,
    FactorizationSpec,
    apply_local_unitaries,
    basis_state,
    random_state,
    regroup,
    tensor,
)

CUT01 = Bipartition.from_left([0], 2)


def test_coefficient_matrix_examples():
    assert np.allclose(coefficient_matrix(maximally_entangled(2), CUT01).matrix, np.eye(2) / math.sqrt(2))
    m = coefficient_matrix(basis_state((2, 2), (0, 0)), CUT01).matrix
    assert np.linalg.matrix_rank(m) == 1 and m[0, 0] == 1
    four = regroup(maximally_entangled(4), FactorizationSpec.parse("2x2,2x2"))
    m = coefficient_matrix(four, Bipartition.from_left([0, 1], 4)).matrix
    assert np.allclose(m, np.eye(4) / 2)


def test_coefficient_matrix_orders_non_contiguous_cut(rng):
    s = random_state((2, 3, 2), rng)
    m = coefficient_matrix(s, Bipartition.from_left([0, 2], 3)).matrix
    assert np.allclose(m, np.transpose(s.tensor(), (0, 2, 1)).reshape(4, 3))


def test_psi4_and_product_spectra():
    assert np.allclose(schmidt_spectrum(maximally_entangled(4), CUT01).coeffs, 0.5)
    p = tensor(random_state((3,), np.random.default_rng(0)), random_state((2,), np.random.default_rng(1)))
    assert np.allclose(schmidt_spectrum(p, CUT01).coeffs, [1, 0])


def test_example3_spectrum_on_every_cut():
    s = example3_state()
    for left in ([0], [1], [2]):
        c = schmidt_spectrum(s, Bipartition.from_left(left, 3)).fit(4).coeffs
        assert np.allclose(c, [0.551, 0.5, 0.5, 0.443], atol=5e-4)


def test_cut_must_match_party_count():
    with pytest.raises(ValueError):
        schmidt_spectrum(maximally_entangled(2), Bipartition.from_left([0], 3))


def test_spectrum_validation_and_fit():
    with pytest.raises(ValueError):
        SchmidtSpectrum(np.array([0.5, 0.8]))
    with pytest.raises(ValueError):
        SchmidtSpectrum(np.array([1.0, -0.1]))
    s = SchmidtSpectrum.from_values([0.6, 0.8])
    assert s.coeffs.tolist() == [0.8, 0.6]
    assert s.fit(4).coeffs.tolist() == [0.8, 0.6, 0, 0]
    assert s.fit(1) is None
    assert SchmidtSpectrum(np.array([1.0, 0, 0])).fit(2).coeffs.tolist() == [1.0, 0.0]


def test_lu_overlap_bound_examples():
    psi4 = schmidt_spectrum(maximally_entangled(4), CUT01)
    xi1 = schmidt_spectrum(xi_states()[0], CUT01)
    assert lu_overlap_bound(psi4, psi4) == pytest.approx(1)
    assert lu_overlap_bound(psi4, xi1) == pytest.approx(math.sqrt(3) / 2)
    prod = SchmidtSpectrum(np.array([1.0]))
    assert lu_overlap_bound(psi4, prod) == pytest.approx(0.5)


@given(seed=st.integers(0, 2**32 - 1), da=st.integers(2, 4), db=st.integers(2, 4))
def test_spectrum_is_normalized_and_lu_invariant(seed, da, db):
    rng = np.random.default_rng(seed)
    s = random_state((da, db), rng)
    a = schmidt_spectrum(s, CUT01).coeffs
    t = apply_local_unitaries(s, [haar_random_unitary(da, rng), haar_random_unitary(db, rng)])
    assert np.sum(a**2) == pytest.approx(1, abs=1e-12)
    assert np.allclose(a, schmidt_spectrum(t, CUT01).coeffs, atol=1e-12)
    assert len(a) == min(da, db)


@given(seed=st.integers(0, 2**32 - 1))
def test_lu_overlap_bound_dominates_overlap(seed):
    rng = np.random.default_rng(seed)
    a, b = random_state((3, 3), rng), random_state((3, 3), rng)
    bound = lu_overlap_bound(schmidt_spectrum(a, CUT01), schmidt_spectrum(b, CUT01))
    assert abs(np.vdot(a.amps, b.amps)) <= bound + 1e-12
