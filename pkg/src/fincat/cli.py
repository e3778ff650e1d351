"""Command-line entry point: ``fincat <verb> [options]``.

Verbs: rates, error-vs-size, resonance, check {locc-mixed,multicopy},
protocol run. Exit codes: 0 ok, 2 input error, 3 infeasible or undefined,
4 size cap exceeded.

Options may also come from a ``--config`` file of ``key = value`` lines
(keys are the long option names with dashes or underscores); command-line
flags win. ``FINCAT_OUT_DIR`` is prepended to relative output paths.
"""

from __future__ import annotations

import argparse
import configparser
import logging
import math
import os
import sys
from io import StringIO
from pathlib import Path

from . import __version__
from .catalyst import run_protocol
from .exceptions import (
    FeasibilityOnlyError,
    FincatError,
    InfeasibleContourError,
    NoFiniteNError,
    NotMajorizedError,
    SizeCapError,
    UndefinedRateError,
)
from .io import (
    InputError,
    dumps,
    load_density_matrix,
    load_gibbs,
    load_prob_vec,
    write_csv,
)
from .plot import line_chart
from .qstates import (
    concurrence,
    corollary1_check,
    eof_two_qubit,
    partial_trace,
    von_neumann_entropy,
)
from .second_order import (
    Athermality,
    Entanglement,
    UnitaryNoisy,
    catalyst_dimension,
    free_direction,
    min_log_dC,
    n_epsilon,
    rates,
    sufficiency_check,
)
from .spectra import (
    DEFAULT_SIZE_CAP,
    GibbsSpec,
    burg_entropy,
    multicopy_feasibility_check,
    shannon_entropy,
)
from .sweeps import (
    ERROR_VS_SIZE_COLUMNS,
    ResonanceConfig,
    error_vs_size,
    resonance_columns,
    resonance_sweep,
)

FORMAT_VERSION = 1
EXIT_OK, EXIT_INPUT, EXIT_INFEASIBLE, EXIT_SIZE_CAP = 0, 2, 3, 4

# option name -> (type, default) for values that may come from a config file
OPTIONS = {
    "theory": (str, None),
    "p": (str, None),
    "q": (str, None),
    "gibbs": (str, None),
    "rho": (str, None),
    "sigma": (str, None),
    "e_sigma": (float, None),
    "target": (str, None),
    "eps": (float, 0.03),
    "n": (int, None),
    "n_min": (int, 1),
    "n_max": (int, 6),
    "seed": (int, 0),
    "base": (str, "e"),
    "out": (str, None),
    "svg": (str, None),
    "workers": (int, 1),
    "h_ini": (float, 0.9),
    "h_fin": (float, 0.8),
    "dim": (int, 3),
    "samples": (int, 50),
    "grid": (int, 257),
    "size_cap": (int, DEFAULT_SIZE_CAP),
}


# -- option plumbing -------------------------------------------------------------

def read_config(path) -> dict:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read config {path}: {exc}") from None
    try:
        parser.read_string("[fincat]\n" + text)
    except configparser.Error as exc:
        raise InputError(f"{path}: {exc}") from None
    out = {}
    for key, raw in parser["fincat"].items():
        name = key.replace("-", "_")
        if name not in OPTIONS:
            raise InputError(f"{path}: unknown key {key!r}")
        kind = OPTIONS[name][0]
        try:
            out[name] = kind(raw)
        except ValueError:
            raise InputError(f"{path}: bad value for {key!r}: {raw!r}") from None
    return out


def resolve(args: argparse.Namespace) -> argparse.Namespace:
    """Merge flags over config values over defaults."""
    cfg = read_config(args.config) if getattr(args, "config", None) else {}
    for name, (_, default) in OPTIONS.items():
        if getattr(args, name, None) is None:
            setattr(args, name, cfg.get(name, default))
    if args.base not in ("2", "e"):
        raise InputError(f"base must be 2 or e, got {args.base!r}")
    if args.workers < 1:
        raise InputError("workers must be at least 1")
    if not 0.0 < args.eps < 1.0:
        raise InputError(f"eps must lie in (0, 1), got {args.eps!r}")
    return args


def _need(args, name: str) -> str:
    value = getattr(args, name)
    if value is None:
        raise InputError(f"missing required option --{name.replace('_', '-')}")
    return value


def _log_base(args) -> float:
    return math.log(2.0) if args.base == "2" else 1.0


def _out_path(path: str | None) -> Path | None:
    if path is None or path == "-":
        return None
    p = Path(path)
    root = os.environ.get("FINCAT_OUT_DIR")
    if root and not p.is_absolute():
        p = Path(root) / p
    p.parent.mkdir(parents=True, exist_ok=True)
    return p


def _emit_text(text: str, path: str | None) -> None:
    target = _out_path(path)
    if target is None:
        sys.stdout.write(text)
    else:
        target.write_text(text)


def _emit_json(doc: dict, path: str | None) -> None:
    _emit_text(dumps(doc) + "\n", path)


def _emit_csv(header, rows, path: str | None, preamble: str) -> None:
    buf = StringIO()
    write_csv(buf, header, rows, preamble)
    _emit_text(buf.getvalue(), path)


def _theory(args, dim: int):
    kind = _need(args, "theory")
    if kind == "entanglement":
        return Entanglement()
    if kind == "athermality":
        gamma = load_gibbs(args.gibbs) if args.gibbs else GibbsSpec.uniform(dim)
        return Athermality(gamma)
    if kind == "unitary":
        return UnitaryNoisy(dim)
    raise InputError(f"unknown theory {kind!r} (entanglement, athermality, unitary)")


def _pair(args):
    p = load_prob_vec(_need(args, "p"))
    q = load_prob_vec(_need(args, "q"))
    d = max(p.dim, q.dim)
    return p.padded(d), q.padded(d)


# -- verbs -------------------------------------------------------------------------

def cmd_rates(args) -> int:
    p, q = _pair(args)
    theory = _theory(args, p.dim)
    r = rates(theory, p, q, args.eps)
    scale = _log_base(args)
    doc = {
        "format_version": FORMAT_VERSION,
        "command": "rates",
        "theory": theory.name,
        "eps": args.eps,
        "base": args.base,
        "R": r.R,
        "Rprime": r.Rprime,
        "nu": r.nu,
        "f_value": r.f_value,
        "mean_p_nats": r.mean_p,
        "mean_q_nats": r.mean_q,
        "var_p": r.var_p,
        "var_q": r.var_q,
        "d_S": r.d_S,
        "flags": list(r.flags),
        "display": {"mean_p": r.mean_p / scale, "mean_q": r.mean_q / scale},
    }
    try:
        n = n_epsilon(r)
        plan = catalyst_dimension(n, max(r.d_S, 2))
        doc.update(n_eps=n, log_dC_nats=plan.log_dC, dC_exact=plan.dC_exact, diagnostic=None)
        doc["display"]["log_dC"] = plan.log_dC / scale
    except NoFiniteNError as exc:
        doc.update(n_eps=None, log_dC_nats=None, dC_exact=None, diagnostic=str(exc))
    need = min_log_dC(theory, p, q, args.eps)
    doc["min_log_dC_nats"] = need
    doc["display"]["min_log_dC"] = need / scale
    grid = []
    for n in range(1, args.n_max + 1):
        plan = catalyst_dimension(n, max(r.d_S, 2))
        v = sufficiency_check(theory, p, q, args.eps, plan.log_dC)
        grid.append({
            "n": n, "dC_exact": plan.dC_exact, "log_dC_nats": plan.log_dC,
            "status": v.status, "gap": v.gap, "threshold": v.threshold,
            "total_log_dC_nats": v.total_log_dC, "note": v.note,
        })
    doc["sufficiency"] = grid
    doc["approximation"] = "two-term"
    _emit_json(doc, args.out)
    return EXIT_OK


def cmd_error_vs_size(args) -> int:
    p, q = _pair(args)
    theory = _theory(args, p.dim)
    rows = error_vs_size(theory, p, q, args.n_min, args.n_max, args.size_cap, args.workers)
    preamble = f"fincat error-vs-size format_version={FORMAT_VERSION} theory={theory.name}"
    _emit_csv(ERROR_VS_SIZE_COLUMNS, rows, args.out, preamble)
    if args.svg:
        ns = [r["n"] for r in rows]
        svg = line_chart(
            ns,
            {"system_err": [r.get("system_err") for r in rows],
             "predicted_eps": [r.get("predicted_eps") for r in rows]},
            xlabel="copies n", ylabel="error", title="error vs catalyst size",
        )
        _emit_text(svg, args.svg)
    return EXIT_OK


def cmd_resonance(args) -> int:
    scale = _log_base(args)
    cfg = ResonanceConfig(
        h_ini=args.h_ini * scale, h_fin=args.h_fin * scale, dim=args.dim,
        samples=args.samples, eps=args.eps, n_max=args.n_max, seed=args.seed,
        size_cap=args.size_cap,
    )
    target = load_prob_vec(args.target) if args.target else None
    rows = resonance_sweep(cfg, target, args.workers)
    for row in rows:  # entropies are stored in nats, shown in the chosen base
        row["H_ini"] /= scale
        row["H_fin"] /= scale
    preamble = (f"fincat resonance format_version={FORMAT_VERSION} seed={args.seed} "
                f"base={args.base} eps={args.eps!r}")
    _emit_csv(resonance_columns(cfg.dim), rows, args.out, preamble)
    return EXIT_OK


def cmd_check_locc_mixed(args) -> int:
    rho = load_density_matrix(_need(args, "rho"))
    sigma = load_density_matrix(args.sigma) if args.sigma else None
    if sigma is None and args.e_sigma is None:
        raise InputError("give --sigma or --e-sigma")
    v = corollary1_check(rho, sigma, args.e_sigma)
    scale = _log_base(args)
    doc = {
        "format_version": FORMAT_VERSION,
        "command": "check locc-mixed",
        "status": v.status,
        "hashing_bound_nats": v.hashing_bound,
        "target_entanglement_nats": v.target_entanglement,
        "margin_nats": v.margin,
        "S_rho_nats": von_neumann_entropy(rho),
        "S_A_nats": von_neumann_entropy(partial_trace(rho, "A")) if rho.dims else None,
        "S_B_nats": von_neumann_entropy(partial_trace(rho, "B")) if rho.dims else None,
        "base": args.base,
        "display": {"hashing_bound": v.hashing_bound / scale,
                    "target_entanglement": v.target_entanglement / scale},
    }
    if sigma is not None and args.e_sigma is None:
        doc["sigma_concurrence"] = concurrence(sigma)
        doc["sigma_eof_nats"] = eof_two_qubit(sigma)
    _emit_json(doc, args.out)
    return EXIT_OK


def cmd_check_multicopy(args) -> int:
    p, q = _pair(args)
    v = multicopy_feasibility_check(p, q, args.grid)
    doc = {
        "format_version": FORMAT_VERSION,
        "command": "check multicopy",
        "status": v.status,
        "witness_alpha": v.witness_alpha,
        "min_margin": v.min_margin,
        "n_alphas": v.n_alphas,
        "grid_based": v.grid_based,
        "H_p_nats": shannon_entropy(p),
        "H_q_nats": shannon_entropy(q),
        "burg_p": burg_entropy(p),
        "burg_q": burg_entropy(q),
    }
    _emit_json(doc, args.out)
    return EXIT_OK


def cmd_protocol_run(args) -> int:
    p, q = _pair(args)
    n = int(_need(args, "n"))
    if n < 1:
        raise InputError(f"n must be positive, got {n}")
    theory = _theory(args, p.dim) if args.theory else Athermality(GibbsSpec.uniform(p.dim))
    gamma = theory.gamma if isinstance(theory, (Athermality, UnitaryNoisy)) else None
    rep = run_protocol(p, q, n, gamma, args.size_cap, free_direction(theory))
    doc = {"format_version": FORMAT_VERSION, "command": "protocol run", "theory": theory.name}
    doc.update(rep.to_dict())
    _emit_json(doc, args.out)
    return EXIT_OK


# -- parser --------------------------------------------------------------------------

def _common(sp: argparse.ArgumentParser, *names: str) -> None:
    sp.add_argument("--config", help="key = value file supplying option defaults")
    sp.add_argument("--out", help="output path (default: stdout)")
    sp.add_argument("--base", choices=("2", "e"), help="entropy base for display columns")
    flags = {
        "theory": dict(choices=("entanglement", "athermality", "unitary")),
        "p": dict(help="JSON file with the initial distribution"),
        "q": dict(help="JSON file with the target distribution"),
        "gibbs": dict(help="JSON Gibbs state (weights, or energies and beta)"),
        "eps": dict(type=float, help="transformation error"),
        "n": dict(type=int, help="number of copies"),
        "n_min": dict(type=int),
        "n_max": dict(type=int),
        "seed": dict(type=int),
        "workers": dict(type=int),
        "svg": dict(help="also write an SVG chart here"),
        "h_ini": dict(type=float),
        "h_fin": dict(type=float),
        "dim": dict(type=int),
        "samples": dict(type=int),
        "target": dict(help="JSON target distribution (default: built-in contour point)"),
        "rho": dict(help="JSON density matrix of the source"),
        "sigma": dict(help="JSON two-qubit density matrix of the target"),
        "e_sigma": dict(type=float, help="target entanglement in nats"),
        "grid": dict(type=int, help="alpha grid size"),
        "size_cap": dict(type=int),
    }
    for name in names:
        sp.add_argument("--" + name.replace("_", "-"), dest=name, **flags[name])


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fincat", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"fincat {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="verb", required=True)

    sp = sub.add_parser("rates", help="second-order rates, n_eps and sufficiency grid")
    _common(sp, "theory", "p", "q", "gibbs", "eps", "n_max")
    sp.set_defaults(func=cmd_rates)

    sp = sub.add_parser("error-vs-size", help="simulated error against catalyst size")
    _common(sp, "theory", "p", "q", "gibbs", "eps", "n_min", "n_max", "workers", "svg", "size_cap")
    sp.set_defaults(func=cmd_error_vs_size)

    sp = sub.add_parser("resonance", help="fixed-entropy sweep of initial Schmidt vectors")
    _common(sp, "h_ini", "h_fin", "dim", "samples", "target", "eps", "n_max", "seed", "workers", "size_cap")
    sp.set_defaults(func=cmd_resonance)

    check = sub.add_parser("check", help="sufficiency and feasibility checks")
    csub = check.add_subparsers(dest="check", required=True)
    sp = csub.add_parser("locc-mixed", help="hashing bound against target entanglement")
    _common(sp, "rho", "sigma", "e_sigma")
    sp.set_defaults(func=cmd_check_locc_mixed)
    sp = csub.add_parser("multicopy", help="Renyi and Burg entropy conditions")
    _common(sp, "p", "q", "grid")
    sp.set_defaults(func=cmd_check_multicopy)

    proto = sub.add_parser("protocol", help="exact simulation of the catalytic construction")
    psub = proto.add_subparsers(dest="protocol", required=True)
    sp = psub.add_parser("run", help="run the construction for n copies")
    _common(sp, "theory", "p", "q", "gibbs", "n", "size_cap")
    sp.set_defaults(func=cmd_protocol_run)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="fincat: %(levelname)s: %(message)s")
    try:
        return args.func(resolve(args))
    except SizeCapError as exc:
        return _fail(exc, EXIT_SIZE_CAP)
    except (UndefinedRateError, FeasibilityOnlyError, NotMajorizedError,
            NoFiniteNError, InfeasibleContourError) as exc:
        return _fail(exc, EXIT_INFEASIBLE)
    except (InputError, FincatError, ValueError) as exc:
        return _fail(exc, EXIT_INPUT)


def _fail(exc: Exception, code: int) -> int:
    print(f"fincat: error: {exc}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
