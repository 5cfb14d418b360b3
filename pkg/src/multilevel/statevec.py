"""Dense multipartite pure states and density operators.

Index convention (used everywhere in the package): amplitudes are stored
mixed-radix with party 0 as the most significant digit, i.e. the amplitude
vector is ``psi.reshape(dims)`` in C order.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

UNITARY_TOL = 1e-10
NORM_TOL = 1e-12
HERMITIAN_TOL = 1e-10
PSD_TOL = -1e-9


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.complex128)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class PureState:
    """Amplitude vector over a tensor product of local spaces."""

    dims: tuple[int, ...]
    amps: np.ndarray

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if not dims or any(d < 1 for d in dims):
            raise ValueError(f"invalid local dimensions {dims}")
        amps = np.asarray(self.amps).reshape(-1)
        if amps.size != math.prod(dims):
            raise ValueError(
                f"amplitude vector has length {amps.size}, expected {math.prod(dims)}"
            )
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "amps", _frozen(amps))

    @property
    def n_parties(self) -> int:
        return len(self.dims)

    @property
    def dim(self) -> int:
        return self.amps.size

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def tensor(self) -> np.ndarray:
        """Amplitudes as an array with one axis per party."""
        return self.amps.reshape(self.dims)

    def projector(self) -> np.ndarray:
        return np.outer(self.amps, self.amps.conj())

    def __repr__(self):
        return f"PureState(dims={list(self.dims)}, norm={self.norm:.12g})"


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Square operator on a multipartite space.

    With ``check=True`` (default) the operator must be a valid density
    matrix. Operators produced by tracing non-Hermitian outer products are
    built with ``check=False``.
    """

    dims: tuple[int, ...]
    mat: np.ndarray
    check: bool = True

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        mat = np.asarray(self.mat, dtype=np.complex128)
        n = math.prod(dims)
        if mat.shape != (n, n):
            raise ValueError(f"operator shape {mat.shape} does not match dims {dims}")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "mat", _frozen(mat))
        if self.check:
            if np.abs(mat - mat.conj().T).max() > HERMITIAN_TOL:
                raise ValueError("density matrix is not Hermitian")
            if abs(np.trace(mat) - 1) > HERMITIAN_TOL:
                raise ValueError(f"density matrix has trace {np.trace(mat).real:.3g}")
            if np.linalg.eigvalsh(mat).min() < PSD_TOL:
                raise ValueError("density matrix is not positive semidefinite")

    @classmethod
    def from_pure(cls, s: PureState) -> "DensityMatrix":
        return cls(s.dims, s.projector())

    @classmethod
    def maximally_mixed(cls, dims: Sequence[int]) -> "DensityMatrix":
        n = math.prod(dims)
        return cls(tuple(dims), np.eye(n) / n)

    @property
    def trace(self) -> complex:
        return complex(np.trace(self.mat))


@dataclass(frozen=True)
class Bipartition:
    """A split M|M' of the parties ``0..n-1`` into two nonempty sets."""

    left: frozenset
    right: frozenset

    def __post_init__(self):
        left, right = frozenset(self.left), frozenset(self.right)
        if not left or not right:
            raise ValueError("both sides of a bipartition must be nonempty")
        if left & right:
            raise ValueError("bipartition sides overlap")
        if left | right != frozenset(range(len(left) + len(right))):
            raise ValueError("bipartition does not cover parties 0..n-1")
        object.__setattr__(self, "left", left)
        object.__setattr__(self, "right", right)

    @classmethod
    def from_left(cls, left: Iterable[int], n: int) -> "Bipartition":
        left = frozenset(int(i) for i in left)
        if not left <= frozenset(range(n)):
            raise ValueError(f"party index out of range for {n} parties")
        return cls(left, frozenset(range(n)) - left)

    @classmethod
    def parse(cls, text: str, n: int | None = None) -> "Bipartition":
        """Parse ``"0|1,2"``; if the right side is empty it is inferred from ``n``."""
        if "|" not in text:
            raise ValueError(f"cut {text!r} must contain '|'")
        lhs, rhs = text.split("|", 1)
        left = {int(x) for x in lhs.split(",") if x.strip()}
        right = {int(x) for x in rhs.split(",") if x.strip()}
        if n is not None:
            if not right:
                right = set(range(n)) - left
            if left | right != set(range(n)):
                raise ValueError(f"cut {text!r} does not cover {n} parties")
        return cls(frozenset(left), frozenset(right))

    @property
    def n_parties(self) -> int:
        return len(self.left) + len(self.right)

    def __str__(self):
        return ",".join(map(str, sorted(self.left))) + "|" + ",".join(map(str, sorted(self.right)))


@dataclass(frozen=True)
class FactorizationSpec:
    """Per-party ordered factor dimensions, most significant factor first."""

    factors: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        factors = tuple(tuple(int(d) for d in f) for f in self.factors)
        for f in factors:
            if not f or any(d < 1 for d in f):
                raise ValueError(f"invalid factor list {f}")
        object.__setattr__(self, "factors", factors)

    @classmethod
    def parse(cls, text: str) -> "FactorizationSpec":
        """Parse ``"2x3,2x3,2x3"`` (one ``x``-separated group per party)."""
        return cls(tuple(tuple(int(d) for d in part.split("x")) for part in text.split(",")))

    @classmethod
    def uniform(cls, factors: Sequence[int], n_parties: int) -> "FactorizationSpec":
        return cls(tuple(tuple(factors) for _ in range(n_parties)))

    @property
    def party_dims(self) -> tuple[int, ...]:
        return tuple(math.prod(f) for f in self.factors)

    @property
    def n_factors(self) -> int:
        """Common number of factors per party (raises if it varies)."""
        ks = {len(f) for f in self.factors}
        if len(ks) != 1:
            raise ValueError("parties have different numbers of factors")
        return ks.pop()

    def check(self, dims: Sequence[int]):
        if tuple(dims) != self.party_dims:
            raise ValueError(
                f"factorization {self} has party dimensions {self.party_dims}, state has {tuple(dims)}"
            )

    def __str__(self):
        return ",".join("x".join(map(str, f)) for f in self.factors)


def make_pure(dims: Sequence[int], amps, normalize: bool = False) -> PureState:
    amps = np.asarray(amps, dtype=np.complex128).reshape(-1)
    if amps.size != math.prod(dims):
        raise ValueError(f"amplitude vector has length {amps.size}, expected {math.prod(dims)}")
    if normalize:
        nrm = np.linalg.norm(amps)
        if nrm == 0:
            raise ValueError("cannot normalize the zero vector")
        amps = amps / nrm
    return PureState(tuple(dims), amps)


def basis_state(dims: Sequence[int], digits: Sequence[int]) -> PureState:
    amps = np.zeros(math.prod(dims), dtype=np.complex128)
    amps[np.ravel_multi_index(tuple(digits), tuple(dims))] = 1
    return PureState(tuple(dims), amps)


def tensor(a: PureState, b: PureState) -> PureState:
    return PureState(a.dims + b.dims, np.kron(a.amps, b.amps))


def tensor_all(states: Iterable[PureState]) -> PureState:
    states = list(states)
    out = states[0]
    for s in states[1:]:
        out = tensor(out, s)
    return out


def is_unitary(u: np.ndarray, tol: float = UNITARY_TOL) -> bool:
    u = np.asarray(u)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        return False
    return np.abs(u.conj().T @ u - np.eye(u.shape[0])).max() <= tol


def _apply_on_axis(t: np.ndarray, axis: int, op: np.ndarray) -> np.ndarray:
    return np.moveaxis(np.tensordot(op, t, axes=([1], [axis])), 0, axis)


def apply_local_unitary(s: PureState, party: int, u) -> PureState:
    u = np.asarray(u, dtype=np.complex128)
    if not 0 <= party < s.n_parties:
        raise IndexError(f"party {party} out of range")
    if u.shape != (s.dims[party], s.dims[party]):
        raise ValueError(f"unitary of shape {u.shape} does not act on dimension {s.dims[party]}")
    if not is_unitary(u):
        raise ValueError("matrix is not unitary within tolerance")
    return PureState(s.dims, _apply_on_axis(s.tensor(), party, u).reshape(-1))


def apply_local_unitaries(s: PureState, unitaries: Sequence) -> PureState:
    """Apply ``unitaries[i]`` to party ``i``; ``None`` entries are skipped."""
    out = s
    for i, u in enumerate(unitaries):
        if u is not None:
            out = apply_local_unitary(out, i, u)
    return out


def permute_parties(s: PureState, perm: Sequence[int]) -> PureState:
    """Reorder parties: new party ``k`` is old party ``perm[k]``."""
    perm = tuple(int(p) for p in perm)
    if sorted(perm) != list(range(s.n_parties)):
        raise ValueError(f"{perm} is not a permutation of {s.n_parties} parties")
    t = np.transpose(s.tensor(), perm)
    return PureState(tuple(s.dims[p] for p in perm), t.reshape(-1))


def regroup(s: PureState, spec: FactorizationSpec) -> PureState:
    """Split every party into its factor parties (digit expansion, most significant first)."""
    spec.check(s.dims)
    dims = tuple(d for f in spec.factors for d in f)
    return PureState(dims, s.amps)


def merge_parties(s: PureState, sizes: Sequence[int]) -> PureState:
    """Merge consecutive runs of parties; ``sizes`` gives the run lengths."""
    if sum(sizes) != s.n_parties or any(k < 1 for k in sizes):
        raise ValueError(f"group sizes {tuple(sizes)} do not cover {s.n_parties} parties")
    dims, i = [], 0
    for k in sizes:
        dims.append(math.prod(s.dims[i:i + k]))
        i += k
    return PureState(tuple(dims), s.amps)


def group_parties(s: PureState, groups: Sequence[Sequence[int]]) -> PureState:
    """Reorder so each group is contiguous (in the given order) and merge each group."""
    perm = [p for g in groups for p in g]
    return merge_parties(permute_parties(s, perm), [len(g) for g in groups])


def partial_trace(x, keep: Iterable[int], dims: Sequence[int] | None = None):
    """Reduced operator on the parties in ``keep`` (ascending party order).

    ``x`` is a PureState, a DensityMatrix, or a bare square ndarray together
    with ``dims``. A bare ndarray need not be Hermitian; the result is then a
    bare ndarray and only linearity and trace preservation hold.
    """
    keep = sorted(set(int(k) for k in keep))
    if not keep:
        raise ValueError("keep set must be nonempty")
    if isinstance(x, PureState):
        dims = x.dims
        if not keep[-1] < len(dims) or keep[0] < 0:
            raise ValueError("keep set contains an unknown party")
        rest = [i for i in range(len(dims)) if i not in keep]
        t = np.transpose(x.tensor(), keep + rest)
        dk = math.prod(dims[i] for i in keep)
        m = t.reshape(dk, -1)
        return DensityMatrix(tuple(dims[i] for i in keep), m @ m.conj().T, check=False)
    bare = not isinstance(x, DensityMatrix)
    if bare:
        if dims is None:
            raise ValueError("dims required for a bare operator")
        mat = np.asarray(x)
    else:
        dims, mat = x.dims, x.mat
    dims = tuple(dims)
    n = len(dims)
    if not keep[-1] < n or keep[0] < 0:
        raise ValueError("keep set contains an unknown party")
    rest = [i for i in range(n) if i not in keep]
    t = mat.reshape(dims + dims)
    t = np.transpose(t, keep + rest + [n + i for i in keep] + [n + i for i in rest])
    dk = math.prod(dims[i] for i in keep)
    dr = math.prod(dims[i] for i in rest)
    red = np.einsum("arbr->ab", t.reshape(dk, dr, dk, dr))
    if bare:
        return red
    return DensityMatrix(tuple(dims[i] for i in keep), red, check=False)


def fidelity_overlap(a: PureState, b: PureState) -> complex:
    """Inner product <a|b>."""
    if a.dim != b.dim:
        raise ValueError(f"total dimensions differ: {a.dim} vs {b.dim}")
    return complex(np.vdot(a.amps, b.amps))


def random_state(dims: Sequence[int], rng: np.random.Generator) -> PureState:
    n = math.prod(dims)
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return PureState(tuple(dims), v / np.linalg.norm(v))


# JSON state files: {"dims": [...], "amps": [[re, im], ...]}

def state_to_json(s: PureState) -> dict:
    return {"dims": list(s.dims), "amps": [[float(z.real), float(z.imag)] for z in s.amps]}


def state_from_json(obj: dict, renormalize: bool = False) -> PureState:
    try:
        dims = [int(d) for d in obj["dims"]]
        amps = np.array([complex(re, im) for re, im in obj["amps"]], dtype=np.complex128)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed state file: {exc}") from exc
    s = make_pure(dims, amps, normalize=renormalize)
    if abs(s.norm - 1) > 1e-9:
        raise ValueError(f"state has norm {s.norm:.12g}; pass renormalize to accept it")
    return s


def save_state(s: PureState, path) -> None:
    Path(path).write_text(json.dumps(state_to_json(s)) + "\n")


def load_state(path, renormalize: bool = False) -> PureState:
    return state_from_json(json.loads(Path(path).read_text()), renormalize=renormalize)


# Density matrix files: {"dims": [...], "matrix": [[[re, im], ...], ...]}

def density_to_json(rho: DensityMatrix) -> dict:
    return {
        "dims": list(rho.dims),
        "matrix": [[[float(z.real), float(z.imag)] for z in row] for row in rho.mat],
    }


def density_from_json(obj: dict) -> DensityMatrix:
    try:
        mat = np.array([[complex(re, im) for re, im in row] for row in obj["matrix"]], dtype=np.complex128)
        return DensityMatrix(tuple(int(d) for d in obj["dims"]), mat)
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed density matrix file: {exc}") from exc
