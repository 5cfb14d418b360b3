"""Alternating maximization of the overlap with decomposable states.

The ansatz is ``(U_1 (x) ... (x) U_N) |phi_1> (x) ... (x) |phi_k>`` where
factor state ``phi_j`` lives on the j-th factor of every party. The engine
maximizes ``|<phi_1 ... phi_k| W_1 (x) ... (x) W_N |psi>|`` with
``W_i = U_i^dagger``. With all but one variable fixed, the optimum is
closed form:

* factor state: the normalized partial contraction of the rotated target
  with the other factor states;
* local unitary: the polar factor of ``R = tr_rest(|psi''><Phi|)``, i.e.
  ``W = V U^dagger`` for ``R = U S V^dagger``, reaching ``tr S``.

Every step is a coordinate maximization, so the overlap never decreases.
"""

from __future__ import annotations

import math
import string
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from .statevec import FactorizationSpec, PureState, group_parties

ZERO_RESIDUAL = 1e-14


def haar_random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary: QR of a complex Ginibre matrix, phases fixed by diag(R)."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def polar_step(R: np.ndarray) -> tuple[np.ndarray, float]:
    """Unitary W maximizing |tr(W R)| and the maximum (the nuclear norm of R).

    Rank-deficient R is fine: the SVD completes the singular vectors to
    full bases, so W is unitary on the null space too.
    """
    u, s, vh = np.linalg.svd(R)
    return vh.conj().T @ u.conj().T, float(s.sum())


def _random_vector(shape, rng) -> np.ndarray:
    v = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return v / np.linalg.norm(v)


@dataclass(frozen=True, eq=False)
class SeesawProblem:
    """Target state and the decomposable family to compare it with.

    ``factorization`` lists factor dimensions per party; with
    ``merge_groups`` the parties of a group share one (nonlocal) unitary
    and the group's j-th factor has the product of its members' j-th
    factor dimensions. ``factorization`` may also be given per group.

    With ``reference`` set, the ansatz is that fixed state and only local
    unitaries are optimized (local-unitary overlap mode).
    """

    target: PureState
    factorization: FactorizationSpec | None = None
    merge_groups: tuple | None = None
    reference: PureState | None = None

    def __post_init__(self):
        n = self.target.n_parties
        groups = self.merge_groups
        if groups is None:
            groups = tuple((i,) for i in range(n))
        groups = tuple(tuple(int(p) for p in g) for g in groups)
        flat = sorted(p for g in groups for p in g)
        if flat != list(range(n)) or any(not g for g in groups):
            raise ValueError(f"merge groups {groups} do not partition {n} parties")
        object.__setattr__(self, "merge_groups", groups)
        if self.reference is None:
            if self.factorization is None:
                raise ValueError("either a factorization or a reference state is required")
            self.factorization.n_factors  # uniform k
        elif self.reference.dim != self.target.dim:
            raise ValueError("reference and target have different dimensions")
        self.group_factors  # validate eagerly

    @property
    def lu_mode(self) -> bool:
        return self.reference is not None

    @cached_property
    def group_dims(self) -> tuple[int, ...]:
        return tuple(math.prod(self.target.dims[p] for p in g) for g in self.merge_groups)

    @cached_property
    def group_factors(self) -> tuple[tuple[int, ...], ...]:
        if self.lu_mode:
            return tuple((d,) for d in self.group_dims)
        f = self.factorization
        groups = self.merge_groups
        if len(f.factors) == self.target.n_parties:
            f.check(self.target.dims)
            k = f.n_factors
            out = tuple(
                tuple(math.prod(f.factors[p][j] for p in g) for j in range(k)) for g in groups
            )
        elif len(f.factors) == len(groups):
            f.n_factors
            out = f.factors
            if tuple(math.prod(x) for x in out) != self.group_dims:
                raise ValueError(f"factorization {f} does not match group dimensions {self.group_dims}")
        else:
            raise ValueError(f"factorization {f} has neither one entry per party nor per group")
        return out

    @property
    def n_factors(self) -> int:
        return len(self.group_factors[0])

    @cached_property
    def psi(self) -> np.ndarray:
        return group_parties(self.target, self.merge_groups).tensor()

    @cached_property
    def reference_tensor(self) -> np.ndarray | None:
        if not self.lu_mode:
            return None
        return self.reference.amps.reshape(self.group_dims)

    @cached_property
    def _letters(self):
        P, k = len(self.group_dims), self.n_factors
        pool = iter(string.ascii_letters)
        return [[next(pool) for _ in range(k)] for _ in range(P)]

    @cached_property
    def fine_shape(self) -> tuple[int, ...]:
        return tuple(d for f in self.group_factors for d in f)

    def factor_shape(self, j: int) -> tuple[int, ...]:
        return tuple(f[j] for f in self.group_factors)

    @cached_property
    def _ansatz_expr(self) -> str:
        L = self._letters
        ins = ",".join("".join(L[p][j] for p in range(len(L))) for j in range(self.n_factors))
        out = "".join(L[p][j] for p in range(len(L)) for j in range(self.n_factors))
        return f"{ins}->{out}"

    def _contract_expr(self, j: int) -> str:
        L = self._letters
        P, k = len(L), self.n_factors
        fine = "".join(L[p][jj] for p in range(P) for jj in range(k))
        others = ["".join(L[p][jj] for p in range(P)) for jj in range(k) if jj != j]
        out = "".join(L[p][j] for p in range(P))
        return ",".join([fine] + others) + "->" + out

    def ansatz(self, factors: Sequence[np.ndarray]) -> np.ndarray:
        """Product of factor states as a tensor over the (merged) parties."""
        if self.lu_mode:
            return self.reference_tensor
        t = np.einsum(self._ansatz_expr, *factors)
        return t.reshape(self.group_dims)


@dataclass
class SeesawConfig:
    restarts: int = 64
    max_iters: int = 2000
    convergence_tol: float = 1e-12
    rng_seed: int = 0
    success_threshold: float = 1 - 1e-6
    record_steps: bool = False
    jobs: int = 1
    stop_at: float | None = None

    def __post_init__(self):
        if self.restarts < 1 or self.max_iters < 1 or self.convergence_tol <= 0 or self.jobs < 1:
            raise ValueError("seesaw configuration values must be positive")


@dataclass
class Assignment:
    """Current variables of one restart: W_p acting on the target, factor states."""

    unitaries: list
    factors: list


@dataclass
class RestartTrace:
    restart: int
    final_overlap: float
    iterations: int
    converged: bool
    reinitialized: int = 0
    steps: list | None = None

    def summary(self) -> dict:
        return {
            "restart": self.restart,
            "final_overlap": self.final_overlap,
            "iterations": self.iterations,
            "converged": self.converged,
            "reinitialized": self.reinitialized,
        }


@dataclass
class SeesawResult:
    best_overlap: float
    unitaries: list
    factor_states: list
    traces: list
    best_restart: int
    group_dims: tuple
    merge_groups: tuple = field(default=())
    reconstruction: PureState | None = None

    def certified(self, threshold: float = 1 - 1e-6) -> bool:
        return self.best_overlap >= threshold


def _apply(t: np.ndarray, p: int, op: np.ndarray) -> np.ndarray:
    return np.moveaxis(np.tensordot(op, t, axes=([1], [p])), 0, p)


def rotated_target(problem: SeesawProblem, a: Assignment, skip: int | None = None) -> np.ndarray:
    t = problem.psi
    for p, w in enumerate(a.unitaries):
        if p != skip:
            t = _apply(t, p, w)
    return t


def overlap(problem: SeesawProblem, a: Assignment) -> float:
    phi = problem.ansatz(a.factors)
    return float(abs(np.vdot(phi, rotated_target(problem, a))))


def optimize_factor_state(problem: SeesawProblem, a: Assignment, which: int,
                          psi_rot: np.ndarray | None = None) -> tuple[np.ndarray | None, float]:
    """Optimal factor state ``which`` with everything else fixed.

    Returns the new state and the overlap it achieves; the state is None
    when the residual vector vanishes (degenerate point).
    """
    if psi_rot is None:
        psi_rot = rotated_target(problem, a)
    others = [a.factors[j].conj() for j in range(problem.n_factors) if j != which]
    v = np.einsum(problem._contract_expr(which), psi_rot.reshape(problem.fine_shape), *others)
    nrm = float(np.linalg.norm(v))
    if nrm < ZERO_RESIDUAL:
        return None, nrm
    return v / nrm, nrm


def unitary_residual(problem: SeesawProblem, a: Assignment, which: int,
                     phi: np.ndarray | None = None) -> np.ndarray:
    """R = tr_rest(|psi''><Phi|) for party (group) ``which``; the overlap is tr(W R)."""
    if phi is None:
        phi = problem.ansatz(a.factors)
    psi2 = rotated_target(problem, a, skip=which)
    d = problem.group_dims[which]
    pm = np.moveaxis(psi2, which, 0).reshape(d, -1)
    fm = np.moveaxis(phi, which, 0).reshape(d, -1)
    return pm @ fm.conj().T


def optimize_unitary(problem: SeesawProblem, a: Assignment, which: int,
                     phi: np.ndarray | None = None) -> tuple[np.ndarray, float]:
    """Polar-optimal W for party (group) ``which`` and the overlap it achieves."""
    return polar_step(unitary_residual(problem, a, which, phi))


def random_assignment(problem: SeesawProblem, rng: np.random.Generator) -> Assignment:
    unitaries = [haar_random_unitary(d, rng) for d in problem.group_dims]
    factors = [] if problem.lu_mode else [
        _random_vector(problem.factor_shape(j), rng) for j in range(problem.n_factors)
    ]
    return Assignment(unitaries, factors)


def run_restart(problem: SeesawProblem, cfg: SeesawConfig, restart: int,
                seed_seq: np.random.SeedSequence) -> tuple[RestartTrace, Assignment]:
    rng = np.random.default_rng(seed_seq)
    a = random_assignment(problem, rng)
    steps = [] if cfg.record_steps else None
    current = overlap(problem, a)
    if steps is not None:
        steps.append(current)
    reinit = 0
    converged = False
    it = 0
    for it in range(1, cfg.max_iters + 1):
        before = current
        if not problem.lu_mode:
            psi_rot = rotated_target(problem, a)
            for j in range(problem.n_factors):
                new, val = optimize_factor_state(problem, a, j, psi_rot)
                if new is None:
                    a.factors[j] = _random_vector(problem.factor_shape(j), rng)
                    reinit += 1
                    val = overlap(problem, a)
                else:
                    a.factors[j] = new
                current = val
                if steps is not None:
                    steps.append(current)
        phi = problem.ansatz(a.factors)
        for p in range(len(problem.group_dims)):
            a.unitaries[p], current = optimize_unitary(problem, a, p, phi)
            if steps is not None:
                steps.append(current)
        if current - before < cfg.convergence_tol:
            converged = True
            break
    return RestartTrace(restart, current, it, converged, reinit, steps), a


def _run_batch(args):
    problem, cfg, items = args
    return [run_restart(problem, cfg, r, ss) for r, ss in items]


def seesaw(problem: SeesawProblem, cfg: SeesawConfig | None = None) -> SeesawResult:
    """Best overlap over ``cfg.restarts`` random restarts.

    Restart r draws from the r-th child of ``SeedSequence(cfg.rng_seed)``,
    so results do not depend on ``cfg.jobs``. With ``cfg.stop_at`` the
    remaining restarts are skipped once a batch of ``cfg.jobs`` restarts
    reaches that overlap.
    """
    cfg = cfg or SeesawConfig()
    seeds = np.random.SeedSequence(cfg.rng_seed).spawn(cfg.restarts)
    items = list(enumerate(seeds))
    outcomes: list[tuple[RestartTrace, Assignment]] = []
    if cfg.jobs == 1:
        for r, ss in items:
            outcomes.append(run_restart(problem, cfg, r, ss))
            if cfg.stop_at is not None and outcomes[-1][0].final_overlap >= cfg.stop_at:
                break
    else:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            for start in range(0, len(items), cfg.jobs):
                batch = [(problem, cfg, [it]) for it in items[start:start + cfg.jobs]]
                for res in pool.map(_run_batch, batch):
                    outcomes.extend(res)
                if cfg.stop_at is not None and max(t.final_overlap for t, _ in outcomes) >= cfg.stop_at:
                    break
    best = max(range(len(outcomes)), key=lambda i: outcomes[i][0].final_overlap)
    trace, a = outcomes[best]
    if problem.lu_mode:
        factor_states = [PureState(problem.group_dims, problem.reference_tensor.reshape(-1))]
    else:
        factor_states = [
            PureState(problem.factor_shape(j), a.factors[j].reshape(-1)) for j in range(problem.n_factors)
        ]
    phi = problem.ansatz(a.factors)
    for p, w in enumerate(a.unitaries):
        phi = _apply(phi, p, w.conj().T)
    return SeesawResult(
        best_overlap=min(trace.final_overlap, 1.0),
        unitaries=[w.conj().T for w in a.unitaries],
        factor_states=factor_states,
        traces=[t for t, _ in outcomes],
        best_restart=best,
        group_dims=problem.group_dims,
        merge_groups=problem.merge_groups,
        reconstruction=PureState(problem.group_dims, phi.reshape(-1)),
    )
