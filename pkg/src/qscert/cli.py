"""Command-line frontend.

Commands: ``analyze`` (eigendata, transform, functional constants, bound
curves), ``evolve`` (exact conditioned evolution with bound columns),
``simulate`` (trajectory sampling with exact-value comparisons), ``verify``
(the acceptance suite), ``model`` (validate and normalize a model file).

Exit codes: 0 success, 1 usage, 2 model error, 3 solver error,
4 statistics error, 5 verification failures.

Total variation follows the analyst convention ``sum |m(x)|`` throughout;
``--probabilist-tv`` halves every tv column and records the choice in the
output metadata.  Outputs carry the model hash, tool version, and the
tolerances used; no timestamps, so identical invocations produce identical
bytes.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys

import numpy as np

from . import __version__
from . import bounds as bdm
from . import evolution as ev
from . import funineq as fi
from . import montecarlo as mc
from . import verify as vf
from .core import (
    ContinuousAbsorbingChain,
    DiscreteAbsorbingChain,
    model_hash,
    parse_model,
    probability_vector,
    serialize_model,
)
from .doob import doob_discrete, doob_transform
from .errors import ModelError, QscertError, SchemaError, SolverError, StatsError
from .models import make_builtin_ref
from .spectral import dirichlet_spectrum, perron

EXIT_USAGE = 1
EXIT_MODEL = 2
EXIT_SOLVER = 3
EXIT_STATS = 4
EXIT_VERIFY = 5


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _build_parser():
    parser = _Parser(
        prog="qscert",
        description="Convergence-to-quasi-stationarity certificates for finite absorbing chains",
    )
    parser.add_argument("--version", action="version", version=f"qscert {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_model_args(p):
        p.add_argument("source", nargs="?", help="model file or builtin:name?p=v reference")
        p.add_argument("--model", help="model file path (or builtin reference)")
        p.add_argument("--builtin", help="builtin reference, e.g. bd_uniform?N=4")
        p.add_argument("--format", choices=("json", "csv"), default=None)
        p.add_argument("--out", help="output path (default: stdout)")
        p.add_argument("--tol-eigen", type=float, default=1e-9,
                       help="eigen-residual acceptance tolerance")
        p.add_argument("--probabilist-tv", action="store_true",
                       help="report tv/2 instead of the analyst convention")

    p_an = sub.add_parser("analyze", help="eigendata, transform, constants, bound curves")
    add_model_args(p_an)
    p_an.add_argument("--seed", type=int, default=0, help="seed for the entropy-constant search")

    p_ev = sub.add_parser("evolve", help="exact conditioned evolution with bound columns")
    add_model_args(p_ev)
    p_ev.add_argument("--init", default="worst",
                      help="initial law: state label, 'nu', 'worst', or a JSON file of weights")
    p_ev.add_argument("--tmin", type=float, default=0.01)
    p_ev.add_argument("--tmax", type=float, default=None,
                      help="default: 20 / (lambda2 - lambda1)")
    p_ev.add_argument("--tcount", type=int, default=50)
    p_ev.add_argument("--tscale", choices=("linear", "log"), default="log")

    p_sim = sub.add_parser("simulate", help="trajectory sampling and exact comparisons")
    add_model_args(p_sim)
    p_sim.add_argument("--init", default="nu")
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--n", type=int, default=10000, help="number of trajectories")
    p_sim.add_argument("--tmax", type=float, default=None,
                       help="simulation horizon (default: 30 / lambda1)")

    p_ver = sub.add_parser("verify", help="run the acceptance suite")
    p_ver.add_argument("--only", help="filter items by id (7 or c07) or tag (e.g. 3.1)")
    p_ver.add_argument("--json", action="store_true", help="machine-readable report")
    p_ver.add_argument("--out", help="output path (default: stdout)")

    p_mod = sub.add_parser("model", help="validate a model and print its normal form")
    add_model_args(p_mod)
    return parser


def _load_chain(args):
    sources = [s for s in (getattr(args, "source", None), getattr(args, "model", None)) if s]
    builtin = getattr(args, "builtin", None)
    if builtin:
        sources.append(builtin if builtin.startswith("builtin:") else f"builtin:{builtin}")
    if not sources:
        raise UsageError("no model given; use a positional source, --model, or --builtin")
    if len(sources) > 1:
        raise UsageError("more than one model source given")
    src = sources[0]
    if os.path.exists(src):
        with open(src, "r", encoding="utf-8") as fh:
            return parse_model(fh.read())
    if src.lstrip().startswith("{"):
        return parse_model(src)
    if os.sep in src or src.endswith(".json"):
        raise ModelError(f"model file not found: {src}")
    return make_builtin_ref(src)


def _tv_scale(args):
    return 0.5 if getattr(args, "probabilist_tv", False) else 1.0


def _doc_header(chain, args):
    return {
        "tool": {"name": "qscert", "version": __version__},
        "model": {
            "hash": model_hash(chain),
            "kind": "continuous" if isinstance(chain, ContinuousAbsorbingChain) else "discrete",
            "n": chain.n,
            "states": list(chain.states.labels),
            "family": chain.meta.get("family"),
        },
        "tolerances": {"eigen": getattr(args, "tol_eigen", 1e-9)},
        "tv_convention": "probabilist (sup_A |m(A)|)" if _tv_scale(args) == 0.5
        else "analyst (sum_x |m(x)|)",
        "probabilist_tv": _tv_scale(args) == 0.5,
    }


def _emit(text, args):
    out = getattr(args, "out", None)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
            if not text.endswith("\n"):
                fh.write("\n")
    else:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")


def _dump_json(doc, args):
    _emit(json.dumps(doc, indent=2, sort_keys=True), args)


def _init_law(spec_text, chain, p):
    if spec_text == "nu":
        return np.asarray(p.nu, dtype=float), "nu"
    if spec_text == "worst":
        return None, "worst"
    if os.path.exists(spec_text):
        with open(spec_text, "r", encoding="utf-8") as fh:
            data = json.load(fh)
        return probability_vector(data, chain.n), "file"
    try:
        k = chain.states.index(spec_text)
    except KeyError:
        raise UsageError(
            f"--init {spec_text!r} is not 'nu', 'worst', a state label, or a file"
        ) from None
    law = np.zeros(chain.n)
    law[k] = 1.0
    return law, f"delta[{spec_text}]"


def _curves_for(chain, p, spec, constants):
    curves = [bdm.thm2_curve(p, constants.gap_tilde), bdm.lsi_curve(p, constants.lsi_lower)]
    if spec.reversible:
        curves.append(bdm.thm3_curve(p, spec.lambda2, "a"))
        curves.append(bdm.thm3_curve(p, spec.lambda2, "b"))
        curves.append(bdm.lsi_curve(p, constants.lsi_lower, reversible=True))
    return curves


def cmd_analyze(args):
    chain = _load_chain(args)
    p = perron(chain, tol=args.tol_eigen)
    spec = dirichlet_spectrum(chain)
    doc = _doc_header(chain, args)
    doc["spectral"] = {
        "lambda1": p.lambda1,
        "phi_ratio": p.ratio,
        "residual": p.residual,
        "reversible": spec.reversible,
        "nu": p.nu.tolist(),
        "dirichlet_spectrum": [[z.real, z.imag] for z in spec.eigenvalues],
    }
    if spec.lambda2 is not None:
        doc["spectral"]["lambda2"] = spec.lambda2
    if p.discrete:
        doc["spectral"]["beta"] = p.beta
        d = doob_discrete(chain, p.beta, p.phi, p.psi)
        doc["doob"] = {
            "kernel": np.asarray(d.generator).tolist(),
            "invariant": d.invariant.tolist(),
        }
        qdist = np.full(chain.n, 1.0 / chain.n)
        try:
            A, beta1_upper = fi.path_bound(chain, qdist)
            doc["path_bound"] = {"A": A, "beta1_upper": beta1_upper, "q": "uniform"}
        except QscertError:
            pass
    else:
        doc["spectral"]["eta"] = p.eta.tolist()
        d = doob_transform(chain, p)
        constants = fi.functional_constants(chain, p, d, seed=args.seed)
        doc["doob"] = {"invariant": d.invariant.tolist()}
        doc["functional"] = {
            "gap_tilde": constants.gap_tilde,
            "gap_base": constants.gap_base,
            "ratio_comparison_lower": constants.eq_lower,
            "lsi_lower": constants.lsi_lower,
            "lsi_estimate": constants.lsi_estimate,
            "lsi_upper": constants.lsi_upper,
        }
        scale = _tv_scale(args)
        doc["curves"] = [
            {"kind": c.kind, "prefactor": c.prefactor * scale, "rate": c.rate}
            for c in _curves_for(chain, p, spec, constants)
        ]
    _dump_json(doc, args)
    return 0


def _evolve_rows(chain, p, d, spec, constants, init_law, times):
    curves = _curves_for(chain, p, spec, constants)
    rows = []
    if init_law is None:
        starts = [np.eye(chain.n)[x] for x in range(chain.n)]
    else:
        starts = [init_law]
    reports = [ev.evolution_report(chain, p, d, mu0, times) for mu0 in starts]
    for i, t in enumerate(times):
        row = {"t": float(t)}
        row["survival"] = float(min(rep.survival[i] for rep in reports))
        row["tv_actual"] = float(max(rep.tv[i] for rep in reports))
        row["I_t"] = float(max(rep.chi2[i] for rep in reports))
        row["I_tilde_t"] = float(max(rep.chi2_doob[i] for rep in reports))
        row["J_t"] = float(max(rep.kl[i] for rep in reports))
        row["J_tilde_t"] = float(max(rep.kl_doob[i] for rep in reports))
        sound = True
        for c in curves:
            val = float(c.eval(t))
            key = {"thm3_a": "tv_thm3", "thm2": "tv_thm2", "lsi": "tv_lsi"}.get(c.kind)
            if key:
                row[key] = val
            if val < row["tv_actual"] - 1e-9:
                sound = False
        row["sound"] = sound
        rows.append(row)
    return rows


def cmd_evolve(args):
    chain = _load_chain(args)
    if isinstance(chain, DiscreteAbsorbingChain):
        raise ModelError("evolve drives the continuous dynamics; embed discrete chains first")
    p = perron(chain, tol=args.tol_eigen)
    spec = dirichlet_spectrum(chain)
    d = doob_transform(chain, p)
    constants = fi.functional_constants(chain, p, d, lsi_mode="bracket")
    init_law, init_name = _init_law(args.init, chain, p)
    if args.tcount < 1:
        raise UsageError("--tcount must be >= 1")
    if args.tmin < 0:
        raise UsageError("--tmin must be >= 0")
    tmax = args.tmax
    if tmax is None:
        reals = np.sort(np.unique(spec.eigenvalues.real.round(12)))
        tmax = 20.0 / (reals[1] - reals[0])
    if tmax < args.tmin:
        raise UsageError("--tmax must be >= --tmin")
    if args.tscale == "log":
        if args.tmin <= 0:
            raise UsageError("log grids need --tmin > 0")
        times = np.geomspace(args.tmin, tmax, args.tcount)
    else:
        times = np.linspace(args.tmin, tmax, args.tcount)
    rows = _evolve_rows(chain, p, d, spec, constants, init_law, times)
    scale = _tv_scale(args)
    if scale != 1.0:
        for row in rows:
            for key in row:
                if key.startswith("tv_"):
                    row[key] *= scale
    if (args.format or "csv") == "json":
        doc = _doc_header(chain, args)
        doc["init"] = init_name
        doc["rows"] = rows
        _dump_json(doc, args)
    else:
        buf = io.StringIO()
        fields = list(rows[0].keys())
        writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\r\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})
        _emit(buf.getvalue(), args)
    return 0


def cmd_simulate(args):
    chain = _load_chain(args)
    if args.n < 1:
        raise UsageError("--n must be >= 1")
    p = perron(chain, tol=args.tol_eigen)
    horizon = args.tmax
    if horizon is None:
        horizon = 30.0 / p.lambda1 if p.lambda1 > 0 else 100.0
        if isinstance(chain, DiscreteAbsorbingChain):
            horizon = float(int(math.ceil(horizon)))
    if not horizon > 0:
        raise UsageError("simulation horizon must be positive")
    init_law, init_name = _init_law(args.init, chain, p)
    if init_law is None:
        raise UsageError("simulate needs a concrete initial law, not 'worst'")
    cfg = mc.SimConfig(n_traj=args.n, horizon=horizon, seed=args.seed)
    sample = mc.simulate(chain, init_law, cfg)
    doc = _doc_header(chain, args)
    doc["init"] = init_name
    doc["config"] = {"n_traj": cfg.n_traj, "horizon": cfg.horizon, "seed": cfg.seed}
    doc["backend"] = __import__("qscert._backend", fromlist=["backend_name"]).backend_name()
    doc["sample"] = sample.summary()
    doc["exact"] = {"lambda1": p.lambda1}
    taus = sample.tau[sample.absorbed]
    if init_name == "nu" and taus.size > 10 and p.lambda1 > 0:
        import scipy.stats as st

        ks = st.kstest(taus, "expon", args=(0.0, 1.0 / p.lambda1))
        doc["ks_exponential"] = {
            "statistic": float(ks.statistic),
            "pvalue": float(ks.pvalue),
            "pass_at_1pct": bool(ks.pvalue > 0.01),
        }
    # survivor-law comparison at the horizon when enough mass remains
    mu_exact, survival = ev.conditioned_law(chain, init_law, horizon)
    doc["exact"]["survival_at_horizon"] = survival
    alive = ~sample.absorbed
    if survival * cfg.n_traj >= 100 and alive.sum() > 0:
        counts = np.bincount(sample.terminal[alive], minlength=chain.n).astype(float)
        est = counts / alive.sum()
        se = np.sqrt(np.clip(est * (1 - est), 0, None) / alive.sum())
        zmax = float(np.max(np.abs(est - mu_exact) / np.where(se > 0, se, np.inf)))
        doc["conditioned_at_horizon"] = {
            "estimate": est.tolist(),
            "std_error": se.tolist(),
            "exact": mu_exact.tolist(),
            "max_abs_z": zmax,
        }
    if args.format == "csv":
        # raw trajectories: one row per path
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\r\n")
        writer.writerow(["trajectory", "tau", "terminal", "weight", "jumps"])
        for i in range(sample.tau.size):
            term = sample.terminal[i]
            label = "absorbed" if term < 0 else chain.states.labels[term]
            writer.writerow([i, repr(float(sample.tau[i])), label,
                             repr(float(sample.weights[i])), int(sample.jumps[i])])
        _emit(buf.getvalue(), args)
        return 0
    _dump_json(doc, args)
    return 0


def cmd_verify(args):
    results = vf.run(only=args.only)
    if not results:
        raise UsageError(f"--only {args.only!r} matches no acceptance item")
    if args.json:
        _emit(json.dumps([r.to_dict() for r in results], indent=2, sort_keys=True), args)
    else:
        _emit(vf.format_report(results), args)
    return 0 if all(r.passed for r in results) else EXIT_VERIFY


def cmd_model(args):
    chain = _load_chain(args)
    _emit(serialize_model(chain), args)
    return 0


def main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        handler = {
            "analyze": cmd_analyze,
            "evolve": cmd_evolve,
            "simulate": cmd_simulate,
            "verify": cmd_verify,
            "model": cmd_model,
        }[args.command]
        return handler(args)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (ModelError, SchemaError) as e:
        print(f"model error: {e}", file=sys.stderr)
        return EXIT_MODEL
    except SolverError as e:
        print(f"solver error: {e}", file=sys.stderr)
        return EXIT_SOLVER
    except StatsError as e:
        print(f"statistics error: {e}", file=sys.stderr)
        return EXIT_STATS
    except OSError as e:
        print(f"i/o error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
