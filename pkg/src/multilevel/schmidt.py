"""Bipartite structure of pure states: coefficient matrices and Schmidt spectra."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .statevec import Bipartition, PureState


@dataclass(frozen=True, eq=False)
class CoefficientMatrix:
    matrix: np.ndarray
    cut: Bipartition


@dataclass(frozen=True, eq=False)
class SchmidtSpectrum:
    """Nonincreasing nonnegative coefficients (zero padded)."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float).reshape(-1)
        if c.size == 0 or (c < 0).any():
            raise ValueError("Schmidt coefficients must be nonnegative")
        if (np.diff(c) > 0).any():
            raise ValueError("Schmidt coefficients must be nonincreasing")
        c = c.copy()
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def from_values(cls, values: Sequence[float], normalize: bool = True) -> "SchmidtSpectrum":
        """Sort descending (stable, so ties keep their input order) and optionally normalize."""
        v = np.abs(np.asarray(values, dtype=float))
        v = v[np.argsort(-v, kind="stable")]
        if normalize:
            v = v / np.linalg.norm(v)
        return cls(v)

    def __len__(self):
        return self.coeffs.size

    def __iter__(self):
        return iter(self.coeffs.tolist())

    def rank(self, tol: float = 1e-12) -> int:
        return int((self.coeffs > tol).sum())

    def fit(self, n: int, tol: float = 1e-12) -> "SchmidtSpectrum | None":
        """Pad with zeros or drop trailing zeros to length ``n``.

        Returns None when more than ``n`` coefficients are nonzero.
        """
        c = self.coeffs
        if c.size <= n:
            return SchmidtSpectrum(np.concatenate([c, np.zeros(n - c.size)]))
        if (c[n:] > tol).any():
            return None
        return SchmidtSpectrum(c[:n])

    def truncate(self, n: int) -> "SchmidtSpectrum":
        """Largest ``n`` coefficients (zero padded), without renormalizing."""
        c = self.coeffs[:n]
        return SchmidtSpectrum(np.concatenate([c, np.zeros(n - c.size)]))

    def __repr__(self):
        return f"SchmidtSpectrum({np.array2string(self.coeffs, precision=6)})"


def _check_cut(s: PureState, cut: Bipartition):
    if cut.n_parties != s.n_parties:
        raise ValueError(f"cut {cut} is for {cut.n_parties} parties, state has {s.n_parties}")


def coefficient_matrix(s: PureState, cut: Bipartition) -> CoefficientMatrix:
    _check_cut(s, cut)
    left, right = sorted(cut.left), sorted(cut.right)
    t = np.transpose(s.tensor(), left + right)
    rows = math.prod(s.dims[i] for i in left)
    return CoefficientMatrix(t.reshape(rows, -1), cut)


def schmidt_spectrum(s: PureState, cut: Bipartition) -> SchmidtSpectrum:
    c = coefficient_matrix(s, cut).matrix
    sv = np.linalg.svd(c, compute_uv=False)
    return SchmidtSpectrum(np.sort(sv)[::-1])


def lu_overlap_bound(a: SchmidtSpectrum, b: SchmidtSpectrum) -> float:
    """Maximal overlap |<a|U (x) V|b>| over local unitaries: sum_i a_i b_i."""
    n = max(len(a), len(b))
    x = np.pad(a.coeffs, (0, n - len(a)))
    y = np.pad(b.coeffs, (0, n - len(b)))
    return float(x @ y)
