import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from multilevel.seesaw import haar_random_unitary
from multilevel.statevec import (
    Bipartition,
    DensityMatrix,
    FactorizationSpec,
    PureState,
    apply_local_unitaries,
    apply_local_unitary,
    basis_state,
    density_from_json,
    density_to_json,
    group_parties,
    load_state,
    make_pure,
    merge_parties,
    partial_trace,
    permute_parties,
    random_state,
    regroup,
    save_state,
    state_from_json,
    state_to_json,
    tensor,
)

dims_strategy = st.lists(st.integers(2, 3), min_size=2, max_size=4)


def test_basis_state_index_is_mixed_radix():
    s = basis_state((2, 3), (1, 2))
    assert np.argmax(np.abs(s.amps)) == 1 * 3 + 2


def test_amplitudes_are_read_only():
    s = basis_state((2, 2), (0, 0))
    with pytest.raises(ValueError):
        s.amps[0] = 2


def test_bad_length_rejected():
    with pytest.raises(ValueError):
        PureState((2, 2), np.ones(3))


def test_make_pure_normalizes():
    s = make_pure((2,), [3, 4], normalize=True)
    assert math.isclose(s.norm, 1.0)
    with pytest.raises(ValueError):
        make_pure((2,), [0, 0], normalize=True)


def test_tensor_order():
    s = tensor(basis_state((2,), (1,)), basis_state((3,), (2,)))
    assert s.dims == (2, 3)
    assert abs(s.amps[5]) == 1


def test_bipartition_parse_and_str():
    c = Bipartition.parse("0|1,2", 3)
    assert c.left == {0} and c.right == {1, 2}
    assert str(c) == "0|1,2"
    assert Bipartition.parse("0,2|", 3).right == {1}
    with pytest.raises(ValueError):
        Bipartition.parse("0,1", 3)
    with pytest.raises(ValueError):
        Bipartition.from_left([0, 1], 2)


def test_factorization_spec():
    f = FactorizationSpec.parse("2x3,3x2")
    assert f.party_dims == (6, 6)
    assert f.n_factors == 2
    assert str(f) == "2x3,3x2"
    with pytest.raises(ValueError):
        FactorizationSpec.parse("2x3,6").n_factors
    with pytest.raises(ValueError):
        f.check((6, 4))


def test_regroup_keeps_amplitudes():
    s = random_state((4, 6), np.random.default_rng(1))
    r = regroup(s, FactorizationSpec.parse("2x2,2x3"))
    assert r.dims == (2, 2, 2, 3)
    assert np.array_equal(r.amps, s.amps)


def test_permute_then_inverse(rng):
    s = random_state((2, 3, 4), rng)
    p = (2, 0, 1)
    inv = tuple(np.argsort(p))
    back = permute_parties(permute_parties(s, p), inv)
    assert np.allclose(back.amps, s.amps)
    assert permute_parties(s, p).dims == (4, 2, 3)


def test_group_parties(rng):
    s = random_state((2, 3, 2), rng)
    g = group_parties(s, [(0, 2), (1,)])
    assert g.dims == (4, 3)
    assert np.allclose(g.tensor(), np.transpose(s.tensor(), (0, 2, 1)).reshape(4, 3))
    assert merge_parties(s, (2, 1)).dims == (6, 2)


def test_apply_local_unitary_rejects_non_unitary():
    s = basis_state((2, 2), (0, 0))
    with pytest.raises(ValueError):
        apply_local_unitary(s, 0, np.diag([1, 2]))
    with pytest.raises(ValueError):
        apply_local_unitary(s, 1, np.eye(3))


@given(dims=dims_strategy, seed=st.integers(0, 2**32 - 1))
def test_local_unitaries_preserve_norm_and_marginal_spectra(dims, seed):
    rng = np.random.default_rng(seed)
    s = random_state(dims, rng)
    t = apply_local_unitaries(s, [haar_random_unitary(d, rng) for d in dims])
    assert math.isclose(t.norm, 1.0, abs_tol=1e-12)
    a = np.linalg.eigvalsh(partial_trace(s, [0]).mat)
    b = np.linalg.eigvalsh(partial_trace(t, [0]).mat)
    assert np.allclose(a, b, atol=1e-10)


@given(dims=dims_strategy, seed=st.integers(0, 2**32 - 1))
def test_partial_trace_routes_agree(dims, seed):
    s = random_state(dims, np.random.default_rng(seed))
    keep = [0, len(dims) - 1]
    via_pure = partial_trace(s, keep).mat
    via_rho = partial_trace(DensityMatrix.from_pure(s), keep).mat
    via_bare = partial_trace(s.projector(), keep, dims)
    assert np.allclose(via_pure, via_rho, atol=1e-12)
    assert np.allclose(via_bare, via_rho, atol=1e-12)
    assert math.isclose(np.trace(via_pure).real, 1.0, abs_tol=1e-12)


def test_partial_trace_of_non_hermitian_is_linear(rng):
    dims = (2, 3)
    x = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
    y = rng.standard_normal((6, 6))
    lhs = partial_trace(2 * x + y, [1], dims)
    rhs = 2 * partial_trace(x, [1], dims) + partial_trace(y, [1], dims)
    assert np.allclose(lhs, rhs)
    assert np.isclose(np.trace(lhs), np.trace(x * 2 + y))


def test_density_matrix_validation():
    with pytest.raises(ValueError):
        DensityMatrix((2,), np.array([[1, 1], [0, 0]]))
    with pytest.raises(ValueError):
        DensityMatrix((2,), np.diag([1.5, -0.5]))
    rho = DensityMatrix.maximally_mixed((2, 2))
    assert math.isclose(rho.trace.real, 1.0)


def test_json_round_trip(tmp_path, rng):
    s = random_state((2, 3), rng)
    path = tmp_path / "s.json"
    save_state(s, path)
    t = load_state(path)
    assert t.dims == s.dims and np.array_equal(t.amps, s.amps)
    obj = state_to_json(s)
    obj["amps"] = [[2 * a, 2 * b] for a, b in obj["amps"]]
    with pytest.raises(ValueError):
        state_from_json(obj)
    assert math.isclose(state_from_json(obj, renormalize=True).norm, 1.0)
    with pytest.raises(ValueError):
        state_from_json({"dims": [2]})


def test_density_json_round_trip(rng):
    rho = DensityMatrix.from_pure(random_state((2, 2), rng))
    back = density_from_json(json.loads(json.dumps(density_to_json(rho))))
    assert np.allclose(back.mat, rho.mat)
