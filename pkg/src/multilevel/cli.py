"""Command-line interface.

Every command prints one JSON document (or ``key: value`` lines with
``--format text``) that includes a run manifest. Exit codes: 0 success,
2 negative analysis verdict, 1 error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .classify import Verdict, classify
from .constructors import (
    GraphSpec,
    chain4x4,
    example3_state,
    ghz,
    maximally_entangled,
    six_qubit_ame,
    star_graph_state,
    weighted_graph_state,
    xi_states,
)
from .decompose import TABLE1, bipartite_max_overlap, evaluate_witness, is_decomposable, make_witness, table1_overlap
from .recipes import RECIPES, run_recipe, write_csv
from .schmidt import schmidt_spectrum
from .seesaw import SeesawConfig, SeesawProblem, seesaw
from .statevec import (
    Bipartition,
    FactorizationSpec,
    PureState,
    density_from_json,
    save_state,
    state_from_json,
    state_to_json,
)
from .tableaux import DEFAULT_CAP, enumerate_syt, hook_count

SEED_ENV = "MULTILEVEL_SEED"
EXIT_OK, EXIT_ERROR, EXIT_NEGATIVE = 0, 1, 2


class CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # Usage errors are errors (exit 1), not negative verdicts.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise CliError(f"{SEED_ENV}={raw!r} is not an integer") from None


def _shape(text: str) -> tuple[int, int]:
    try:
        a, b = (int(x) for x in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"shape {text!r} is not of the form d1xd2") from None
    if a < 1 or b < 1:
        raise argparse.ArgumentTypeError("shape dimensions must be positive")
    return a, b


def _complex_matrix(m) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m)]


class Run:
    """Collects inputs for the manifest of one invocation."""

    def __init__(self, args):
        self.args = args
        self.digests: dict[str, str] = {}
        self.start = time.perf_counter()

    def read_json(self, path) -> dict:
        data = Path(path).read_bytes()
        self.digests[str(path)] = hashlib.sha256(data).hexdigest()
        try:
            return json.loads(data)
        except json.JSONDecodeError as exc:
            raise CliError(f"{path}: invalid JSON ({exc})") from None

    def state(self, path) -> PureState:
        return state_from_json(self.read_json(path), renormalize=self.args.renormalize)

    def manifest(self) -> dict:
        params = {
            k: v for k, v in sorted(vars(self.args).items())
            if k not in ("func", "command", "format") and v is not None
        }
        return {
            "command": self.args.command,
            "parameters": json.loads(json.dumps(params)),
            "seed": getattr(self.args, "seed", None),
            "version": __version__,
            "wall_time": round(time.perf_counter() - self.start, 6),
            "input_digests": self.digests,
        }


def _parse_cut(text, n) -> Bipartition:
    return Bipartition.parse(text, n) if text else Bipartition.from_left([0], n)


# commands ------------------------------------------------------------------

def cmd_gen(run: Run):
    a = run.args
    name = a.name
    if name in ("bell", "maxent"):
        s = maximally_entangled(2 if name == "bell" else a.d or 2)
    elif name == "ghz":
        s = ghz(a.n or 3, a.d or 2)
    elif name == "star":
        s = star_graph_state(a.n or 3, a.d or 2)
    elif name == "graph":
        if not a.graph:
            raise CliError("gen graph needs --graph FILE")
        s = weighted_graph_state(GraphSpec.from_json(run.read_json(a.graph)))
    elif name == "example3":
        s = example3_state()
    elif name in ("xi1", "xi2"):
        s = xi_states()[name == "xi2"]
    elif name == "ame6":
        s = six_qubit_ame(corrected=not a.printed)
    elif name == "chain4x4":
        s = chain4x4()
    else:
        raise CliError(f"unknown generator {name!r}")
    if a.out:
        save_state(s, a.out)
        return {"written": str(a.out), "dims": list(s.dims)}, EXIT_OK
    return {"state": state_to_json(s)}, EXIT_OK


def cmd_schmidt(run: Run):
    s = run.state(run.args.state)
    cut = _parse_cut(run.args.cut, s.n_parties)
    return {"cut": str(cut), "coeffs": schmidt_spectrum(s, cut).coeffs.tolist()}, EXIT_OK


def cmd_check(run: Run):
    s = run.state(run.args.state)
    cut = _parse_cut(run.args.cut, s.n_parties)
    d1, d2 = run.args.shape
    res = is_decomposable(schmidt_spectrum(s, cut), d1, d2, cap=run.args.cap)
    out = {"decomposable": res.decomposable, "value": res.decomposable, "certificate": res.certificate()}
    if res.notes:
        out["notes"] = res.notes
    return out, EXIT_OK if res.decomposable else EXIT_NEGATIVE


def cmd_max_overlap(run: Run):
    s = run.state(run.args.state)
    cut = _parse_cut(run.args.cut, s.n_parties)
    d1, d2 = run.args.shape
    val, arr, ansatz = bipartite_max_overlap(schmidt_spectrum(s, cut), d1, d2, cap=run.args.cap,
                                            dedupe=run.args.dedupe)
    cert = {"arrangement": arr.tolist(), "alpha": ansatz.alpha.tolist(), "beta": ansatz.beta.tolist()}
    return {"value": val, "certificate": cert}, EXIT_OK


def cmd_witness(run: Run):
    a = run.args
    if a.xi in ("xi1", "xi2"):
        xi = xi_states()[a.xi == "xi2"]
    else:
        xi = run.state(a.xi)
    d1, d2 = a.shape
    w = make_witness(xi, d1, d2, cut=_parse_cut(a.cut, xi.n_parties), cap=a.cap)
    obj = run.read_json(a.rho)
    rho = density_from_json(obj) if "matrix" in obj else state_from_json(obj, renormalize=a.renormalize)
    val = evaluate_witness(rho, w)
    violated = val < 0
    cert = {"alpha_sq": w.alpha_sq, "shape": list(w.shape), "violated": violated}
    return {"value": val, "certificate": cert}, EXIT_OK if violated else EXIT_NEGATIVE


def cmd_table1(run: Run):
    a = run.args
    rows = TABLE1
    if a.source:
        rows = [r for r in rows if (r.d1, r.d2) == a.source and (a.rank is None or r.rank == a.rank)]
    elif a.rank is not None:
        rows = [r for r in rows if r.rank == a.rank]
    if not rows:
        raise CliError("no table row matches the selection")
    out = []
    for r in rows:
        val = table1_overlap(r.d1, r.d2, r.rank)
        out.append({"shape": f"{r.d1}x{r.d2}", "rank": r.rank, "closed_form": r.closed_form,
                    "expected": r.value, "value": val, "delta": val - r.value})
    ok = all(abs(r["delta"]) <= 1e-9 for r in out)
    res = {"rows": out}
    if len(out) == 1:
        res["value"] = out[0]["value"]
        res["certificate"] = out[0]
    return res, EXIT_OK if ok else EXIT_NEGATIVE


def cmd_tableaux(run: Run):
    d1, d2 = run.args.shape
    if run.args.count_only:
        return {"count": hook_count(d1, d2)}, EXIT_OK
    return {"tableaux": [t.tolist() for t in enumerate_syt(d1, d2, cap=run.args.cap)]}, EXIT_OK


def _seesaw_cfg(a) -> SeesawConfig:
    return SeesawConfig(restarts=a.restarts, max_iters=a.max_iters, rng_seed=a.seed,
                        success_threshold=a.threshold, jobs=a.jobs, stop_at=a.stop_at)


def cmd_seesaw(run: Run):
    a = run.args
    s = run.state(a.state)
    groups = None
    if a.merge:
        groups = tuple(tuple(int(p) for p in part.split(",")) for part in a.merge.split("|"))
    if a.reference:
        problem = SeesawProblem(s, merge_groups=groups, reference=run.state(a.reference))
    elif a.factorization:
        problem = SeesawProblem(s, FactorizationSpec.parse(a.factorization), merge_groups=groups)
    else:
        raise CliError("seesaw needs --factorization or --reference")
    cfg = _seesaw_cfg(a)
    res = seesaw(problem, cfg)
    certified = res.certified(cfg.success_threshold)
    out = {
        "verdict": "CERTIFIED" if certified else "NOT_CERTIFIED",
        "best_overlap": res.best_overlap,
        "best_fidelity": res.best_overlap ** 2,
        "best_restart": res.best_restart,
        "restarts": [t.summary() for t in res.traces],
    }
    if certified:
        out["certificate"] = {
            "merge_groups": [list(g) for g in res.merge_groups],
            "unitaries": [_complex_matrix(u) for u in res.unitaries],
            "factor_states": [state_to_json(f) for f in res.factor_states],
        }
    return out, EXIT_OK if certified else EXIT_NEGATIVE


def cmd_classify(run: Run):
    a = run.args
    s = run.state(a.state)
    routes = ("exact", "variational") if a.variational_cuts else ("exact",)
    res = classify(s, _seesaw_cfg(a), cut_routes=routes)
    return res.to_dict(), EXIT_NEGATIVE if res.verdict is Verdict.VACUOUS else EXIT_OK


def cmd_reproduce(run: Run):
    a = run.args
    names = list(RECIPES) if a.id == "all" else [a.id]
    if any(n not in RECIPES for n in names):
        raise CliError(f"unknown example {a.id!r}; choose from all, {', '.join(RECIPES)}")
    kw = {"seed": a.seed, "jobs": a.jobs}
    if a.restarts is not None:
        kw["restarts"] = a.restarts
    reports = [run_recipe(n, **kw) for n in names]
    if a.csv:
        write_csv(reports, a.csv)
    ok = all(r.passed for r in reports)
    return {"passed": ok, "reports": [r.to_dict() for r in reports]}, EXIT_OK if ok else EXIT_NEGATIVE


# parser -----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="multilevel", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "text"), default="json")
    common.add_argument("--renormalize", action="store_true", help="accept and renormalize unnormalized input states")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, func, help_):
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.set_defaults(func=func)
        return sp

    def cut_and_shape(sp, shape=True):
        sp.add_argument("--cut", help='bipartition such as "0|1,2" (default: first party vs the rest)')
        if shape:
            sp.add_argument("--shape", type=_shape, default=(2, 2), help="arrangement shape d1xd2")
            sp.add_argument("--cap", type=int, default=DEFAULT_CAP, help="arrangement enumeration cap")

    def seesaw_opts(sp, restarts=64):
        sp.add_argument("--restarts", type=int, default=restarts)
        sp.add_argument("--max-iters", type=int, default=2000)
        sp.add_argument("--threshold", type=float, default=1 - 1e-6)
        sp.add_argument("--stop-at", type=float)
        sp.add_argument("--seed", type=int, default=None, help=f"default: ${SEED_ENV} or 0")
        sp.add_argument("--jobs", type=int, default=1)

    sp = add("gen", cmd_gen, "generate a named state")
    sp.add_argument("name", help="bell, maxent, ghz, graph, example3, xi1, xi2, ame6, chain4x4, star")
    sp.add_argument("--n", type=int)
    sp.add_argument("--d", type=int)
    sp.add_argument("--graph", help="GraphSpec JSON file (for gen graph)")
    sp.add_argument("--printed", action="store_true", help="ame6: use the uncorrected edge list")
    sp.add_argument("--out", help="output file (default: stdout)")

    sp = add("schmidt", cmd_schmidt, "Schmidt coefficients across a cut")
    sp.add_argument("--state", required=True)
    cut_and_shape(sp, shape=False)

    sp = add("check", cmd_check, "exact decomposability across a cut")
    sp.add_argument("--state", required=True)
    cut_and_shape(sp)

    sp = add("max-overlap", cmd_max_overlap, "maximal overlap with decomposable states")
    sp.add_argument("--state", required=True)
    sp.add_argument("--dedupe", action="store_true", help="skip arrangements equal to one already seen")
    cut_and_shape(sp)

    sp = add("witness", cmd_witness, "evaluate a projector witness")
    sp.add_argument("--xi", required=True, help="xi1, xi2 or a state file")
    sp.add_argument("--rho", required=True, help="state or density matrix file")
    cut_and_shape(sp)

    sp = add("table1", cmd_table1, "maximal overlaps of maximally entangled states of lower rank")
    sp.add_argument("--source", type=_shape)
    sp.add_argument("--rank", type=int)

    sp = add("tableaux", cmd_tableaux, "standard Young tableaux of a rectangle")
    sp.add_argument("--shape", type=_shape, required=True)
    sp.add_argument("--count-only", action="store_true")
    sp.add_argument("--cap", type=int, default=DEFAULT_CAP)

    sp = add("seesaw", cmd_seesaw, "variational overlap with decomposable or LU-equivalent states")
    sp.add_argument("--state", required=True)
    sp.add_argument("--factorization", help='per-party factor dimensions, e.g. "2x2,2x2"')
    sp.add_argument("--merge", help='party groups sharing a unitary, e.g. "0,3|1,2"')
    sp.add_argument("--reference", help="state file; optimize local unitaries only")
    seesaw_opts(sp)

    sp = add("classify", cmd_classify, "fully decomposable, MME or GMME")
    sp.add_argument("--state", required=True)
    sp.add_argument("--variational-cuts", action="store_true", help="also run the seesaw on every cut")
    seesaw_opts(sp)

    sp = add("reproduce", cmd_reproduce, "run a worked example end to end")
    sp.add_argument("id", help="all, " + ", ".join(RECIPES))
    sp.add_argument("--restarts", type=int)
    sp.add_argument("--seed", type=int, default=None, help=f"default: ${SEED_ENV} or 0")
    sp.add_argument("--jobs", type=int, default=1)
    sp.add_argument("--csv", help="also write all checks as flat CSV")
    return p


def _text(obj, prefix="") -> list[str]:
    lines = []
    if isinstance(obj, dict):
        for k, v in obj.items():
            key = f"{prefix}.{k}" if prefix else str(k)
            if isinstance(v, dict):
                lines.extend(_text(v, key))
            else:
                lines.append(f"{key}: {json.dumps(v) if isinstance(v, (list, bool)) or v is None else v}")
    else:
        lines.append(f"{prefix}: {obj}")
    return lines


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if hasattr(args, "seed") and args.seed is None:
            args.seed = _default_seed()
        run = Run(args)
        result, code = args.func(run)
    except (CliError, ValueError, KeyError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    doc = {"command": args.command, **result, "manifest": run.manifest()}
    if args.format == "text":
        print("\n".join(_text(doc)))
    else:
        print(json.dumps(doc, indent=2, default=_json_default))
    return code


if __name__ == "__main__":
    sys.exit(main())
