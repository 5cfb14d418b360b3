"""Exact decomposability of bipartite pure states and projector witnesses.

A bipartite state is d1 x d2 decomposable if, up to local unitaries, it is
a product of two entangled pairs whose Schmidt ranks fit a d1 x d2 grid.
Its maximal overlap with such states is the largest top singular value
over all admissible arrangements of its Schmidt coefficients, and it is
decomposable exactly when some arrangement has rank one.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .schmidt import SchmidtSpectrum, schmidt_spectrum
from .statevec import Bipartition, DensityMatrix, PureState
from .tableaux import (
    DEFAULT_CAP,
    RANK_ONE_TOL,
    ArrangementMatrix,
    CapExceeded,
    arrangements,
    rank_one_search,
)


@dataclass(frozen=True, eq=False)
class ProductAnsatz:
    """Schmidt vectors of the two factor pairs; S is approximated by alpha beta^T."""

    alpha: np.ndarray
    beta: np.ndarray

    @property
    def spectrum(self) -> SchmidtSpectrum:
        return SchmidtSpectrum.from_values(np.outer(self.alpha, self.beta).ravel(), normalize=False)


@dataclass(frozen=True, eq=False)
class WitnessSpec:
    """W = alpha_sq * 1 - |xi><xi|."""

    xi: PureState
    alpha_sq: float
    shape: tuple[int, int]

    def __post_init__(self):
        if not 0 < self.alpha_sq <= 1 + 1e-12:
            raise ValueError(f"alpha_sq = {self.alpha_sq} outside (0, 1]")

    @property
    def alpha(self) -> float:
        return math.sqrt(self.alpha_sq)

    def operator(self) -> np.ndarray:
        return self.alpha_sq * np.eye(self.xi.dim) - self.xi.projector()


@dataclass
class Decomposability:
    decomposable: bool
    shape: tuple[int, int]
    arrangement: ArrangementMatrix | None = None
    factor_spectra: tuple[np.ndarray, np.ndarray] | None = None
    max_overlap: float | None = None
    branches: int = 0
    notes: list[str] = field(default_factory=list)

    def certificate(self) -> dict:
        out = {"shape": list(self.shape), "branches": self.branches}
        if self.arrangement is not None:
            out["arrangement"] = self.arrangement.tolist()
            out["factor_spectra"] = [v.tolist() for v in self.factor_spectra]
        if self.max_overlap is not None:
            out["max_overlap"] = self.max_overlap
        return out


def max_singular_value(S) -> tuple[float, ProductAnsatz]:
    """Top singular value of an arrangement and its nonnegative singular vectors."""
    m = S.values if isinstance(S, ArrangementMatrix) else np.asarray(S, dtype=float)
    u, sv, vt = np.linalg.svd(m)
    # For an entrywise nonnegative matrix |u|, |v| reach the same value.
    alpha, beta = np.abs(u[:, 0]), np.abs(vt[0])
    return float(sv[0]), ProductAnsatz(alpha, beta)


def alpha_from_det(det: float) -> float:
    """Top singular value of a unit-Frobenius 2x2 matrix from its determinant."""
    if abs(det) > 0.5 + 1e-12:
        raise ValueError(f"|det| = {abs(det)} exceeds 1/2")
    return math.sqrt((1 + math.sqrt(max(0.0, 1 - 4 * det * det))) / 2)


def _fitted(spectrum: SchmidtSpectrum, d1: int, d2: int) -> SchmidtSpectrum:
    return spectrum.truncate(d1 * d2)


def bipartite_max_overlap(spectrum: SchmidtSpectrum, d1: int, d2: int, cap: int = DEFAULT_CAP,
                          dedupe: bool = False) -> tuple[float, ArrangementMatrix, ProductAnsatz]:
    """Maximal overlap of a state with the d1 x d2 decomposable pure states.

    Only the largest d1*d2 coefficients can contribute; the spectrum is
    truncated or zero padded accordingly. Raises CapExceeded when the
    arrangement enumeration is too large (use the seesaw instead).
    """
    spec = _fitted(spectrum, d1, d2)
    best = (-1.0, None, None)
    for a in arrangements(spec, d1, d2, cap=cap, dedupe=dedupe):
        val, ansatz = max_singular_value(a)
        if val > best[0]:
            best = (val, a, ansatz)
    return best


def is_decomposable(spectrum: SchmidtSpectrum, d1: int, d2: int, tol: float = RANK_ONE_TOL,
                    cap: int = DEFAULT_CAP, cross_check: bool = True) -> Decomposability:
    """Decide d1 x d2 decomposability by searching for a rank-1 arrangement."""
    spec = spectrum.fit(d1 * d2)
    if spec is None:
        return Decomposability(False, (d1, d2), notes=["Schmidt rank exceeds d1*d2"])
    stats: dict = {}
    arr = rank_one_search(spec, d1, d2, tol=tol, stats=stats)
    out = Decomposability(arr is not None, (d1, d2), arrangement=arr, branches=stats["branches"])
    if arr is not None:
        rows = np.linalg.norm(arr.values, axis=1)
        cols = np.linalg.norm(arr.values, axis=0)
        out.factor_spectra = (rows / np.linalg.norm(rows), cols / np.linalg.norm(cols))
    if cross_check:
        try:
            out.max_overlap = bipartite_max_overlap(spec, d1, d2, cap=cap)[0]
        except CapExceeded:
            out.notes.append("max-overlap cross-check skipped: enumeration cap")
        else:
            if out.decomposable and out.max_overlap < 1 - 1e-6:
                raise RuntimeError(
                    f"rank-1 arrangement found but max overlap is {out.max_overlap:.9f}"
                )
    return out


def max_entangled_spectrum(rank: int, length: int) -> SchmidtSpectrum:
    if not 1 <= rank <= length:
        raise ValueError(f"rank {rank} not in 1..{length}")
    c = np.zeros(length)
    c[:rank] = 1 / math.sqrt(rank)
    return SchmidtSpectrum(c)


@dataclass(frozen=True)
class Table1Row:
    d1: int
    d2: int
    rank: int
    closed_form: str
    value: float


def _row(d1, d2, r, x):
    return Table1Row(d1, d2, r, f"sqrt(({r}+sqrt({x}))/{2 * r})", math.sqrt((r + math.sqrt(x)) / (2 * r)))


# Maximal overlap of the rank-r maximally entangled state with the d1 x d2
# decomposable states, closed forms sqrt((r + sqrt(x)) / (2r)).
TABLE1 = (
    _row(2, 2, 3, 5),
    _row(2, 3, 5, 17),
    _row(2, 4, 5, 17),
    _row(2, 4, 7, 37),
    _row(3, 3, 5, 17),
    _row(3, 3, 7, 33),
    _row(3, 3, 8, 48),
    _row(2, 5, 7, 37),
    _row(2, 5, 9, 65),
    _row(2, 6, 7, 37),
    _row(2, 6, 9, 65),
    _row(7, 7, 11, 101),
)


def table1_overlap(d1: int, d2: int, rank: int, cap: int = DEFAULT_CAP) -> float:
    spec = max_entangled_spectrum(rank, d1 * d2)
    return bipartite_max_overlap(spec, d1, d2, cap=max(cap, rank))[0]


def _det_value(s: np.ndarray, det_sign: int) -> float:
    det = s[0] * s[3] - s[1] * s[2]
    if det_sign * det <= 0:
        return math.inf
    return alpha_from_det(det)


def _spectrum_from_increments(t: np.ndarray) -> np.ndarray:
    s = np.cumsum(t[::-1])[::-1]
    return s / np.linalg.norm(s)


def extremal_witness_search(d1: int = 2, d2: int = 2, det_sign: int | None = -1, starts: int = 200,
                            seed: int = 0, step_tol: float = 1e-13,
                            cap: int = DEFAULT_CAP) -> tuple[SchmidtSpectrum, float]:
    """Ordered unit spectrum minimizing the maximal decomposable overlap.

    For 2x2 the search is restricted to arrangements with the given
    determinant sign (``det_sign = 0`` is the decomposable boundary, value 1).
    Other shapes take ``det_sign=None`` and minimize over spectra that are
    not decomposable.

    The ordered simplex is parametrized by nonnegative increments
    ``t_k = s_k - s_{k+1}``; each start is refined by a pattern search on
    single coordinates (clipped at zero) until the step falls below
    ``step_tol``.
    """
    n = d1 * d2
    if det_sign is not None and (d1, d2) != (2, 2):
        raise ValueError("determinant sign is only meaningful for 2x2")
    if det_sign == 0:
        return SchmidtSpectrum(np.full(4, 0.5)), 1.0

    if det_sign is None:
        def f(t):
            s = _spectrum_from_increments(t)
            spec = SchmidtSpectrum(np.maximum(s, 0))
            if rank_one_search(spec, d1, d2) is not None:
                return math.inf
            return bipartite_max_overlap(spec, d1, d2, cap=cap)[0]
    else:
        def f(t):
            return _det_value(_spectrum_from_increments(t), det_sign)

    rng = np.random.default_rng(seed)
    best_t, best_v = None, math.inf
    for _ in range(starts):
        t = rng.exponential(size=n)
        v = f(t)
        if not math.isfinite(v):
            continue
        h = 0.5 * t.max()
        while h > step_tol * max(t.max(), 1.0):
            improved = False
            for i in range(n):
                for sgn in (1, -1):
                    trial = t.copy()
                    trial[i] = max(0.0, trial[i] + sgn * h)
                    if not trial.any():
                        continue
                    tv = f(trial)
                    if tv < v:
                        t, v, improved = trial, tv, True
                        break
            if not improved:
                h /= 2
        if v < best_v:
            best_t, best_v = t, v
    if best_t is None:
        raise RuntimeError("no feasible start found")
    return SchmidtSpectrum(np.maximum(_spectrum_from_increments(best_t), 0)), float(best_v)


def make_witness(xi: PureState, d1: int = 2, d2: int = 2, cut: Bipartition | None = None,
                 cap: int = DEFAULT_CAP) -> WitnessSpec:
    """Projector witness for genuine d1 x d2-level entanglement built on ``xi``."""
    if cut is None:
        if xi.n_parties < 2:
            raise ValueError("witness state must have at least two parties")
        cut = Bipartition.from_left([0], xi.n_parties)
    overlap = bipartite_max_overlap(schmidt_spectrum(xi, cut), d1, d2, cap=cap)[0]
    alpha_sq = min(overlap * overlap, 1.0)
    if alpha_sq > 1 - 1e-12:
        warnings.warn("xi is decomposable; the witness cannot detect anything", stacklevel=2)
    return WitnessSpec(xi, alpha_sq, (d1, d2))


def evaluate_witness(rho, w: WitnessSpec) -> float:
    """tr(rho W); negative values certify genuine multilevel entanglement."""
    if isinstance(rho, PureState):
        if rho.dim != w.xi.dim:
            raise ValueError("state and witness dimensions differ")
        return float(w.alpha_sq * np.vdot(rho.amps, rho.amps).real - abs(np.vdot(w.xi.amps, rho.amps)) ** 2)
    mat = rho.mat if isinstance(rho, DensityMatrix) else np.asarray(rho)
    if mat.shape != (w.xi.dim, w.xi.dim):
        raise ValueError("state and witness dimensions differ")
    xi = w.xi.amps
    return float((w.alpha_sq * np.trace(mat) - xi.conj() @ mat @ xi).real)
