"""Command line front end.

Subcommands: ``info``, ``pressure``, ``measure``, ``entropy``, ``mixing`` and
``converge``.  Options may also come from a JSON ``--config`` file; explicit
flags override it.

Exit codes: 0 success, 2 parse or validation error, 3 budget exceeded,
4 numerical non-convergence or malformed bracket.  Errors are reported on
stderr as one line of JSON ``{"code", "message", "context"}``.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from .errors import BudgetExceeded, NoConvergence, ParseError, SoficGibbsError, ValidationError
from .symbolic import DEFAULT_ENUMERATION_BUDGET, specification_length

EXIT_OK, EXIT_VALIDATION, EXIT_BUDGET, EXIT_NUMERIC = 0, 2, 3, 4

DEFAULTS = {
    "subshift": None,
    "potential": None,
    "m": "2",
    "n": None,
    "p": None,
    "depth": 8,
    "tol": 1e-12,
    "budget": DEFAULT_ENUMERATION_BUDGET,
    "out": ".",
    "format": "csv",
    "a": None,
    "b": None,
    "s": None,
    "method": "perron",
}


def parse_int_range(text) -> list:
    """``"3"``, ``"1..8"``, ``"1:8"``, ``"1-8"`` (inclusive) or ``"1,3,5"``."""
    if isinstance(text, int):
        return [text]
    if isinstance(text, list):
        return [int(t) for t in text]
    text = str(text).strip()
    try:
        for sep in ("..", ":"):
            if sep in text:
                lo, hi = text.split(sep)
                return list(range(int(lo), int(hi) + 1))
        if "," in text:
            return [int(t) for t in text.split(",")]
        if "-" in text[1:]:
            lo, hi = text[0] + text[1:].split("-")[0], text[1:].split("-", 1)[1]
            return list(range(int(lo), int(hi) + 1))
        return [int(text)]
    except ValueError:
        raise ParseError(f"cannot read an integer range from {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with default values for any option")
    common.add_argument("--subshift", help="presentation JSON (graph, forbidden words or beta expansion)")
    common.add_argument("--potential", help="potential JSON; the zero potential when omitted")
    common.add_argument("--m", help="approximation order, or a range like 1..8")
    common.add_argument("--n", type=int, help="transfer matrix depth (default max(m, range-1)+2)")
    common.add_argument("--depth", type=int, help="cylinder depth / weak distance cutoff K")
    common.add_argument("--tol", type=float, help="certified Perron tolerance")
    common.add_argument("--budget", type=int, help="enumeration budget")
    common.add_argument("--out", help="output directory")
    common.add_argument("--format", choices=["csv", "json"], help="output format")

    parser = argparse.ArgumentParser(prog="soficgibbs", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("info", parents=[common], help="structural data and a-priori constants")
    sub.add_parser("pressure", parents=[common], help="pressure of X_m with its radius")
    pm = sub.add_parser("measure", parents=[common], help="cylinder masses up to --depth symbols")
    pm.add_argument("--method", choices=["perron", "periodic"])
    pm.add_argument("--p", type=int, help="period minus one for --method periodic")
    sub.add_parser("entropy", parents=[common], help="variational and block entropy")
    px = sub.add_parser("mixing", parents=[common], help="correlation of [a] and T^-s [b]")
    px.add_argument("-a", help="first word")
    px.add_argument("-b", help="second word")
    px.add_argument("-s", help="gap or gap range")
    sub.add_parser("converge", parents=[common], help="convergence study over a range of m")
    return parser


def resolve_config(args) -> dict:
    cfg = dict(DEFAULTS)
    if args.config:
        try:
            data = json.loads(Path(args.config).read_text())
        except OSError as exc:
            raise ParseError(f"cannot read config {args.config}: {exc.strerror}") from None
        except json.JSONDecodeError as exc:
            raise ParseError(f"{args.config}: {exc.msg}", line=exc.lineno, column=exc.colno) from None
        if not isinstance(data, dict):
            raise ParseError("config must be a JSON object")
        unknown = set(data) - set(DEFAULTS) - {"command", "m_range"}
        if unknown:
            raise ParseError(f"unknown config keys: {sorted(unknown)}")
        if "m_range" in data:
            data["m"] = data.pop("m_range")
        cfg.update(data)
    for key in DEFAULTS:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    if cfg["subshift"] is None:
        raise ValidationError("--subshift is required")
    if not cfg["tol"] > 0:
        raise ValidationError("tolerance must be positive")
    if int(cfg["budget"]) <= 0:
        raise ValidationError("budget must be positive")
    cfg["m_list"] = parse_int_range(cfg["m"])
    if not cfg["m_list"] or min(cfg["m_list"]) < 0:
        raise ValidationError("m range must be nonempty and nonnegative")
    if int(cfg["depth"]) < 0:
        raise ValidationError("depth must be nonnegative")
    return cfg


def _load(cfg):
    from .io import load_potential, load_presentation, sha256_of
    from .potential import Potential

    P = load_presentation(cfg["subshift"])
    phi = load_potential(cfg["potential"], P.alphabet) if cfg["potential"] else Potential.zero(P.alphabet)
    prov = {
        "subshift_sha256": sha256_of(cfg["subshift"]),
        "potential_sha256": sha256_of(cfg["potential"]) if cfg["potential"] else None,
        "budget": int(cfg["budget"]),
        "tol": float(cfg["tol"]),
    }
    return P, phi, prov


def _emit(cfg, name, columns, rows, prov):
    from .io import write_table

    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"{name}.{cfg['format']}"
    write_table(path, columns, rows, cfg["format"], prov)
    return path


def _well_formed(*pairs) -> bool:
    return all(not (math.isnan(lo) or math.isnan(hi)) and lo <= hi for lo, hi in pairs)


def cmd_info(cfg, out=sys.stdout) -> int:
    from .constants import proof_constants
    from .symbolic import find_magic_word

    P, phi, _ = _load(cfg)
    c = phi.constants()
    report = {
        "alphabet_size": len(P.alphabet),
        "vertices": len(P.vertices),
        "edges": P.n_edges,
        "magic_word": P.alphabet.decode(find_magic_word(P)),
        "specification_length": specification_length(P),
        "norm": c.norm,
        "Lambda": c.Lambda,
        "C": c.C,
        "theta" if c.theta is not None else "alpha": c.theta if c.theta is not None else c.alpha,
    }
    pc = proof_constants(P, phi)
    for key in ("K0", "K1", "C_E", "theta_E", "C_X", "theta_X", "theta_FT"):
        report[key] = getattr(pc, key)
    if cfg["format"] == "json":
        out.write(json.dumps(report, sort_keys=True) + "\n")
    else:
        for k, v in report.items():
            out.write(f"{k}: {v}\n")
    return EXIT_OK


def cmd_pressure(cfg, out=sys.stdout) -> int:
    from .gibbs import fit_order

    P, phi, prov = _load(cfg)
    rows = []
    for m in cfg["m_list"]:
        f = fit_order(P, phi, m, cfg["n"], cfg["tol"], int(cfg["budget"]))
        e = f.pressure
        rows.append({"m": m, "n": f.n, "pressure": e.value, "radius": e.radius, "lo": e.lo, "hi": e.hi,
                     "tau": f.pd.tau, "L": f.pd.L})
        out.write(f"pressure m={m} n={f.n}: {e.value:.12g} +- {e.radius:.3g}\n")
    _emit(cfg, "pressure", ["m", "n", "pressure", "radius", "lo", "hi", "tau", "L"], rows, prov)
    return EXIT_OK if _well_formed(*[(r["lo"], r["hi"]) for r in rows]) else EXIT_NUMERIC


def cmd_measure(cfg, out=sys.stdout) -> int:
    from .gibbs import elementary_measure, fit_order, markov_extend
    from .symbolic import build_sft

    P, phi, prov = _load(cfg)
    m = cfg["m_list"][0]
    depth = max(int(cfg["depth"]), 1)
    if cfg["method"] == "periodic":
        S = build_sft(P, m, int(cfg["budget"]))
        p = cfg["p"] if cfg["p"] is not None else max(depth - 1, m + 1)
        mu = elementary_measure(S, p, phi, depth, int(cfg["budget"]))
        prov["p"] = p
    else:
        f = fit_order(P, phi, m, cfg["n"], cfg["tol"], int(cfg["budget"]))
        mu = markov_extend(f.S, f.n, phi, f.pd, depth - 1, f.M, budget=int(cfg["budget"]))
        prov["n"] = f.n
    prov.update(m=m, depth=depth, method=cfg["method"])
    rows = [{"word": P.alphabet.decode(w), "value": v, "radius": mu.radius[w]}
            for w, v in sorted(mu.values.items(), key=lambda t: (len(t[0]), t[0]))]
    _emit(cfg, "measures", ["word", "value", "radius"], rows, prov)
    worst = max(abs(mu.total(k) - 1.0) for k in range(1, depth + 1))
    out.write(f"measure m={m} depth={depth}: {len(rows)} cylinders, max normalization defect {worst:.3g}\n")
    ok = all(not math.isnan(r["radius"]) for r in rows)
    return EXIT_OK if ok else EXIT_NUMERIC


def cmd_entropy(cfg, out=sys.stdout) -> int:
    from .gibbs import entropy, fit_order

    P, phi, prov = _load(cfg)
    rows = []
    for m in cfg["m_list"]:
        f = fit_order(P, phi, m, cfg["n"], cfg["tol"], int(cfg["budget"]))
        e = entropy(f.S, f.n, phi, f.pd, M=f.M, direct_depth=max(int(cfg["depth"]), 2) - 1)
        rows.append({"m": m, "n": f.n, "entropy": e.value, "radius": e.radius, "lo": e.lo, "hi": e.hi,
                     "direct": e.direct, "direct_average": e.direct_average, "direct_depth": e.direct_depth})
        out.write(f"entropy m={m}: {e.value:.12g} +- {e.radius:.3g} (block estimate {e.direct:.6g})\n")
    _emit(cfg, "entropy", list(rows[0]), rows, prov)
    return EXIT_OK if _well_formed(*[(r["lo"], r["hi"]) for r in rows]) else EXIT_NUMERIC


def cmd_mixing(cfg, out=sys.stdout) -> int:
    from .constants import proof_constants
    from .gibbs import fit_order, mixing_ratio

    if cfg["a"] is None or cfg["b"] is None or cfg["s"] is None:
        raise ValidationError("mixing needs -a, -b and -s")
    P, phi, prov = _load(cfg)
    a = P.alphabet.encode(str(cfg["a"]))
    b = P.alphabet.encode(str(cfg["b"]))
    m = cfg["m_list"][0]
    f = fit_order(P, phi, m, cfg["n"], cfg["tol"], int(cfg["budget"]))
    consts = proof_constants(P, phi)
    rows = []
    for s in parse_int_range(cfg["s"]):
        r = mixing_ratio(f.S, f.n, phi, f.pd, a, b, s, f.M, strict=False, constants=consts)
        rows.append({"a": cfg["a"], "b": cfg["b"], "s": s, "ratio_minus_1": r.value, "radius": r.radius,
                     "bound": r.bound, "method": r.method})
        out.write(f"mixing a={cfg['a']} b={cfg['b']} s={s}: |ratio-1| = {r.value:.12g} +- {r.radius:.3g}"
                  f" [{r.method}]\n")
    prov.update(m=m, n=f.n, methods=sorted({r["method"] for r in rows}))
    _emit(cfg, "mixing", ["a", "b", "s", "ratio_minus_1", "radius", "bound", "method"], rows, prov)
    ok = all(not math.isnan(r["ratio_minus_1"]) and r["radius"] >= 0 for r in rows)
    return EXIT_OK if ok else EXIT_NUMERIC


def cmd_converge(cfg, out=sys.stdout) -> int:
    from .gibbs import convergence_study

    P, phi, prov = _load(cfg)
    K = int(cfg["depth"])
    st = convergence_study(P, phi, cfg["m_list"], K, cfg["tol"], cfg["n"], int(cfg["budget"]))
    rate = st.fit.rate if st.fit else math.nan
    rows = [{"m": r.m, "D_lo": r.D.lo, "D_hi": r.D.hi,
             "pressure_gap": r.pressure_gap.value, "pressure_gap_radius": r.pressure_gap.radius,
             "entropy_gap": r.entropy_gap.value, "entropy_gap_radius": r.entropy_gap.radius,
             "fitted_rate": rate} for r in st.rows]
    prov.update(K=K, m_range=cfg["m_list"],
                fit=None if st.fit is None else {"slope": st.fit.slope, "r2": st.fit.r2, "rate": st.fit.rate},
                theta_FT=st.theta_FT, limit_bracket=st.limit_bracket)
    _emit(cfg, "convergence", list(rows[0]), rows, prov)
    if st.fit is not None:
        out.write(f"converge m={cfg['m_list'][0]}..{cfg['m_list'][-1]}: slope {st.fit.slope:.6g} "
                  f"(R^2 {st.fit.r2:.4f}, rate {st.fit.rate:.6g}); a-priori theta_FT {st.theta_FT}\n")
    else:
        out.write(f"converge m={cfg['m_list'][0]}..{cfg['m_list'][-1]}: all pressure gaps below the noise floor\n")
    if st.limit_bracket is not None:
        out.write(f"pressure limit bracket [{st.limit_bracket[0]:.12g}, {st.limit_bracket[1]:.12g}]\n")
    ok = _well_formed(*[(r.D.lo, r.D.hi) for r in st.rows], *[(r.pressure_gap.lo, r.pressure_gap.hi) for r in st.rows])
    return EXIT_OK if ok else EXIT_NUMERIC


COMMANDS = {
    "info": cmd_info,
    "pressure": cmd_pressure,
    "measure": cmd_measure,
    "entropy": cmd_entropy,
    "mixing": cmd_mixing,
    "converge": cmd_converge,
}


def exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, ValidationError):
        return EXIT_VALIDATION
    if isinstance(exc, BudgetExceeded):
        return EXIT_BUDGET
    if isinstance(exc, NoConvergence):
        return EXIT_NUMERIC
    return EXIT_NUMERIC


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        return COMMANDS[args.command](cfg, sys.stdout)
    except SoficGibbsError as exc:
        payload = {"code": exc.code, "message": str(exc), "context": exc.context}
        sys.stderr.write(json.dumps(payload, sort_keys=True, default=str) + "\n")
        return exit_code_for(exc)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
