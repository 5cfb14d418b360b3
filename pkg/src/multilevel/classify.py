"""Multipartite classification: full decomposability, bipartitions, GMME.

A state is fully decomposable if every party splits into two factors so
that the state is, up to local unitaries, a product of two multipartite
states on the factors. It is bidecomposable if this holds for some
bipartition with arbitrary unitaries on each side, and genuinely
multipartite multilevel entangled (GMME) otherwise.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field
from enum import Enum

from .decompose import Decomposability, is_decomposable
from .schmidt import schmidt_spectrum
from .seesaw import SeesawConfig, SeesawProblem, SeesawResult, seesaw
from .statevec import Bipartition, FactorizationSpec, PureState


class Verdict(str, Enum):
    FULLY_DECOMPOSABLE = "FULLY_DECOMPOSABLE"
    MME_BIDECOMPOSABLE = "MME_BIDECOMPOSABLE"
    GMME = "GMME"
    GMME_CANDIDATE = "GMME_CANDIDATE"
    VACUOUS = "VACUOUS"


def enumerate_bipartitions(N: int) -> list[Bipartition]:
    """All 2^(N-1) - 1 unordered nontrivial bipartitions; party 0 is always on the left."""
    if N < 2:
        raise ValueError("bipartitions need at least two parties")
    out = []
    for size in range(1, N):
        for rest in itertools.combinations(range(1, N), size - 1):
            out.append(Bipartition.from_left((0,) + rest, N))
    return out


def divisor_pairs(D: int) -> list[tuple[int, int]]:
    """Ordered nontrivial splits D = a * a' with a, a' >= 2."""
    return [(a, D // a) for a in range(2, D // 2 + 1) if D % a == 0 and D // a >= 2]


def candidate_shapes(d_left: int, d_right: int) -> list[tuple[int, int]]:
    """Arrangement shapes for a cut with side dimensions d_left = a a', d_right = b b'.

    Pairing a with b and a' with b' bounds the two factor Schmidt ranks by
    min(a, b) and min(a', b'); iterating over ordered splits on both sides
    also covers the crossed pairing.
    """
    shapes = set()
    for (a, a2), (b, b2) in itertools.product(divisor_pairs(d_left), divisor_pairs(d_right)):
        d1, d2 = sorted((min(a, b), min(a2, b2)))
        shapes.add((d1, d2))
    return sorted(shapes)


@dataclass
class CutVerdict:
    cut: Bipartition
    decomposable: bool
    certified_by: str | None
    exact: list[Decomposability] = field(default_factory=list)
    variational: dict | None = None

    @property
    def exact_found(self) -> bool:
        return any(d.decomposable for d in self.exact)

    def to_dict(self) -> dict:
        out = {
            "cut": str(self.cut),
            "decomposable": self.decomposable,
            "certified_by": self.certified_by,
            "exact": [
                {"shape": list(d.shape), "decomposable": d.decomposable, **d.certificate()} for d in self.exact
            ],
        }
        if self.variational is not None:
            out["variational"] = self.variational
        return out


def _side_dims(state: PureState, cut: Bipartition) -> tuple[int, int]:
    return (math.prod(state.dims[i] for i in cut.left), math.prod(state.dims[i] for i in cut.right))


def exact_cut_route(state: PureState, cut: Bipartition, tol: float = 1e-9) -> list[Decomposability]:
    """Rank-1 arrangement search over every candidate shape of the cut; stops at the first success."""
    spec = schmidt_spectrum(state, cut)
    results = []
    for d1, d2 in candidate_shapes(*_side_dims(state, cut)):
        res = is_decomposable(spec, d1, d2, tol=tol, cross_check=False)
        results.append(res)
        if res.decomposable:
            break
    return results


def variational_cut_route(state: PureState, cut: Bipartition, cfg: SeesawConfig) -> dict:
    """Seesaw with one joint unitary per side over all two-factor splits of the sides."""
    dl, dr = _side_dims(state, cut)
    groups = (tuple(sorted(cut.left)), tuple(sorted(cut.right)))
    best = None
    tried = []
    for left in divisor_pairs(dl):
        if left[0] > left[1]:
            continue
        for right in divisor_pairs(dr):
            f = FactorizationSpec((left, right))
            res = seesaw(SeesawProblem(state, f, merge_groups=groups), cfg)
            tried.append({"factorization": str(f), "overlap": res.best_overlap})
            if best is None or res.best_overlap > best[1].best_overlap:
                best = (f, res)
            if res.best_overlap >= cfg.success_threshold:
                break
        if best is not None and best[1].best_overlap >= cfg.success_threshold:
            break
    if best is None:
        return {"overlap": 0.0, "factorization": None, "tried": tried,
                "reading": "arbitrary factor states on each side"}
    return {
        "overlap": best[1].best_overlap,
        "factorization": str(best[0]),
        "tried": tried,
        "reading": "arbitrary factor states on each side",
    }


def bidecomposable_check(state: PureState, cut: Bipartition, cfg: SeesawConfig | None = None,
                         routes=("exact", "variational")) -> CutVerdict:
    cfg = cfg or SeesawConfig()
    if cut.n_parties != state.n_parties:
        raise ValueError(f"cut {cut} does not match {state.n_parties} parties")
    verdict = CutVerdict(cut, False, None)
    if "exact" in routes:
        verdict.exact = exact_cut_route(state, cut)
        if verdict.exact_found:
            verdict.decomposable, verdict.certified_by = True, "exact"
    if "variational" in routes:
        verdict.variational = variational_cut_route(state, cut, cfg)
        if verdict.variational["overlap"] >= cfg.success_threshold and not verdict.decomposable:
            verdict.decomposable, verdict.certified_by = True, "variational"
    return verdict


def full_factorizations(dims) -> list[FactorizationSpec]:
    """Two-factor splits of every party; factor j of each party joins factor state j.

    Party 0 uses unordered splits (a <= a'), the others ordered ones.
    """
    options = []
    for i, D in enumerate(dims):
        pairs = divisor_pairs(D)
        if i == 0:
            pairs = [p for p in pairs if p[0] <= p[1]]
        options.append(pairs)
    return [FactorizationSpec(combo) for combo in itertools.product(*options)]


@dataclass
class FullDecomposition:
    best_overlap: float
    factorization: FactorizationSpec | None
    result: SeesawResult | None
    tried: list = field(default_factory=list)
    children: list = field(default_factory=list)

    @property
    def best_fidelity(self) -> float:
        return self.best_overlap**2

    def to_dict(self) -> dict:
        out = {
            "best_overlap": self.best_overlap,
            "best_fidelity": self.best_fidelity,
            "factorization": str(self.factorization) if self.factorization else None,
            "tried": self.tried,
        }
        if self.children:
            out["factors"] = [c.to_dict() if c else None for c in self.children]
        return out


def full_decomposability(state: PureState, cfg: SeesawConfig | None = None,
                         recurse: bool = True) -> FullDecomposition:
    """Best seesaw overlap with fully decomposable states over all two-factor splits.

    With ``recurse``, the factor states of a certified decomposition are
    decomposed further while their local dimensions stay composite.
    """
    cfg = cfg or SeesawConfig()
    out = FullDecomposition(0.0, None, None)
    for f in full_factorizations(state.dims):
        res = seesaw(SeesawProblem(state, f), cfg)
        out.tried.append({"factorization": str(f), "overlap": res.best_overlap})
        if res.best_overlap > out.best_overlap:
            out.best_overlap, out.factorization, out.result = res.best_overlap, f, res
        if res.best_overlap >= cfg.success_threshold:
            break
    if recurse and out.result is not None and out.best_overlap >= cfg.success_threshold:
        for phi in out.result.factor_states:
            if all(divisor_pairs(d) for d in phi.dims):
                out.children.append(full_decomposability(phi, cfg, recurse=True))
            else:
                out.children.append(None)
    return out


@dataclass
class Classification:
    verdict: Verdict
    exact: bool
    cuts: list[CutVerdict] = field(default_factory=list)
    full: FullDecomposition | None = None
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "exact": self.exact,
            "cuts": [c.to_dict() for c in self.cuts],
            "full": self.full.to_dict() if self.full else None,
            "notes": self.notes,
        }


def classify(state: PureState, cfg: SeesawConfig | None = None,
             cut_routes=("exact",)) -> Classification:
    """Fully decomposable, MME but bidecomposable, or GMME.

    Cuts are examined first: full decomposability implies decomposability
    across every cut, so when no cut is decomposable the seesaw is skipped
    and the GMME verdict rests on the exact route alone. GMME_CANDIDATE is
    returned when the cut verdicts come from the variational route only.
    """
    cfg = cfg or SeesawConfig()
    if state.n_parties < 2:
        raise ValueError("classification needs at least two parties")
    prime = [i for i, d in enumerate(state.dims) if not divisor_pairs(d)]
    if prime:
        msg = f"parties {prime} have prime (or trivial) local dimension; classification is vacuous"
        warnings.warn(msg, stacklevel=2)
        return Classification(Verdict.VACUOUS, False, notes=[msg])

    cuts = [bidecomposable_check(state, c, cfg, routes=cut_routes) for c in enumerate_bipartitions(state.n_parties)]
    if not any(c.decomposable for c in cuts):
        exact = "exact" in cut_routes
        verdict = Verdict.GMME if exact else Verdict.GMME_CANDIDATE
        return Classification(verdict, exact, cuts,
                              notes=["no bipartition is decomposable, so the state is not fully decomposable"])

    full = full_decomposability(state, cfg)
    if full.best_overlap >= cfg.success_threshold:
        return Classification(Verdict.FULLY_DECOMPOSABLE, False, cuts, full)
    return Classification(
        Verdict.MME_BIDECOMPOSABLE, False, cuts, full,
        notes=["full decomposability excluded numerically (seesaw), not proven"],
    )
