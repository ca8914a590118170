"""
Command-line front end.

Subcommands::

    laws inspect   tail constants and classification of a law (alias laws-inspect)
    fcurve         F(θ) on a θ-grid
    rate           rate function on an x-grid, with the GOE rate alongside
    igoe           GOE rate function, closed form and quadrature
    simulate       per-sample top eigenvalue, semicircle distance and overlap
    tilt           tilted importance-sampling tail estimates over a list of N
    localize       localization statistics of top eigenvectors

CSV output starts with a ``# {json}`` line holding the package version, the
resolved configuration and the seed.  Exit codes: 0 success, 2 invalid
configuration, 3 regime or validity failure, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from typing import Any

import numpy as np

from . import __version__
from .annealed import f_value, small_theta_threshold
from .errors import InvalidParameters, NumericsError, OutOfDomain, TiltOutOfRange, WrongRegime
from .freeprob import i_goe, i_goe_quadrature
from .laws import EntryLaw, classify, law_from_spec, tail_constants
from .montecarlo import (
    DEFAULT_DELTA,
    Tilt,
    WignerEnsembleConfig,
    localization_stats,
    localized_direction,
    map_samples,
    sample_tilted_wigner,
    sample_wigner,
    spectrum_stats,
    tail_estimate_tilted,
)
from .eigen import eig_top
from .freeprob import k_sigma
from .numerics import is_infinite
from .rate import goe_window, rate_curve

__all__ = ["main", "build_parser", "EXIT_OK", "EXIT_CONFIG", "EXIT_REGIME", "EXIT_NUMERICS"]

EXIT_OK, EXIT_CONFIG, EXIT_REGIME, EXIT_NUMERICS = 0, 2, 3, 4


# ---------------------------------------------------------------------------
# Output helpers
# ---------------------------------------------------------------------------


def _fmt(v: Any) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)) or is_infinite(v):
        f = float(v)
        if math.isinf(f):
            return "inf" if f > 0 else "-inf"
        if math.isnan(f):
            return "nan"
        return repr(f)
    return str(v)


def _json_safe(v: Any) -> Any:
    if isinstance(v, dict):
        return {str(k): _json_safe(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_json_safe(x) for x in v]
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)) or is_infinite(v):
        f = float(v)
        return _fmt(f) if (math.isinf(f) or math.isnan(f)) else f
    if hasattr(v, "value") and not isinstance(v, (str, bytes)):
        return v.value
    return v


def _meta(args: argparse.Namespace, config: dict) -> dict:
    return {"version": __version__, "command": args.command, "config": _json_safe(config), "seed": args.seed}


def _emit(args, config: dict, columns: list[str], rows: list[dict], trailer: str | None = None) -> None:
    meta = _meta(args, config)
    buf = io.StringIO()
    if args.format == "json":
        doc = {"meta": meta, "rows": [{c: _json_safe(r.get(c)) for c in columns} for r in rows]}
        json.dump(doc, buf, indent=2, sort_keys=True)
        buf.write("\n")
    else:
        buf.write("# " + json.dumps(meta, sort_keys=True) + "\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_fmt(r.get(c)) for c in columns])
        if trailer:
            buf.write(trailer)
    _write(args.out, buf.getvalue())


def _write(path: str | None, text: str) -> None:
    if path:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# Argument handling
# ---------------------------------------------------------------------------


def _grid(lo: float, hi: float, steps: int) -> np.ndarray:
    if steps < 1:
        raise InvalidParameters("constraint violated: steps >= 1")
    if steps > 1 and not hi > lo:
        raise InvalidParameters("constraint violated: grid maximum exceeds minimum")
    return np.linspace(lo, hi, steps) if steps > 1 else np.array([float(lo)])


def _law(args) -> tuple[EntryLaw, dict]:
    if args.law is None:
        raise InvalidParameters("a law is required (--law or the config file)")
    law = law_from_spec(args.law)
    return law, law.spec()


def _direction(token: str | None, N: int) -> np.ndarray | str:
    if token is None or token == "uniform":
        return "uniform"
    if token.startswith("loc:"):
        try:
            v, r2 = (float(t) for t in token[4:].split(","))
        except ValueError as exc:
            raise InvalidParameters(f"malformed localized direction {token!r} (expected loc:<v>,<r2>)") from exc
        return localized_direction(N, v, r2)
    raise InvalidParameters(f"unknown tilt direction {token!r} (uniform or loc:<v>,<r2>)")


def _ensemble(args, law: EntryLaw) -> WignerEnsembleConfig:
    tilt = None
    if args.tilt_theta is not None:
        tilt = Tilt(float(args.tilt_theta), _direction(args.tilt_dir, args.N))
    return WignerEnsembleConfig(law, args.N, args.samples, args.seed, tilt, max_N=max(args.max_N, args.N) if args.allow_large else args.max_N)


def _common(p: argparse.ArgumentParser, law: bool = True) -> None:
    p.add_argument("--config", type=str, default=None, help="JSON file with the law spec and command parameters.")
    p.add_argument("--out", type=str, default=None, help="Output path (default: stdout).")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=None, help="Worker threads (capped by WIGNER_LDP_THREADS).")
    if law:
        p.add_argument("--law", default=None, help="Law spec: inline kind:k=v, JSON string or JSON file.")


def _ensemble_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--N", type=int, default=200)
    p.add_argument("--samples", type=int, default=10)
    p.add_argument("--tilt-theta", type=float, default=None)
    p.add_argument("--tilt-dir", type=str, default="uniform", help="uniform or loc:<v>,<r2>")
    p.add_argument("--max-N", type=int, default=1000)
    p.add_argument("--allow-large", action="store_true", help="Lift the N <= max-N cap.")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="wigner-ldp",
        description="Rate functions and Monte Carlo checks for the top eigenvalue of sub-Gaussian Wigner matrices.",
    )
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("laws", aliases=["laws-inspect"], help="Tail constants and classification of a law.")
    p.add_argument("action", nargs="?", choices=("inspect",), default="inspect")
    _common(p)
    p.add_argument("--emit-spec", type=str, default=None, help="Write the resolved law spec to this JSON file.")

    p = sub.add_parser("fcurve", help="Annealed spherical integral F on a θ-grid.")
    _common(p)
    p.add_argument("--theta-min", type=float, default=0.0)
    p.add_argument("--theta-max", type=float, default=5.0)
    p.add_argument("--steps", type=int, default=51)

    p = sub.add_parser("rate", help="Rate function on an x-grid.")
    _common(p)
    p.add_argument("--xmin", type=float, default=2.0)
    p.add_argument("--xmax", type=float, default=6.0)
    p.add_argument("--steps", type=int, default=41)
    p.add_argument("--emit-theta", action="store_true", help="Add the maximizing θ column.")
    p.add_argument("--allow-upper-bound", action="store_true", help="Accept unclassified laws (upper bound only).")

    p = sub.add_parser("igoe", help="GOE rate function.")
    _common(p, law=False)
    p.add_argument("--xmin", type=float, default=2.0)
    p.add_argument("--xmax", type=float, default=6.0)
    p.add_argument("--steps", type=int, default=41)

    p = sub.add_parser("simulate", help="Per-sample spectral statistics of (tilted) Wigner matrices.")
    _common(p)
    _ensemble_args(p)
    p.add_argument("--full-spectrum", action="store_true", help="Compute every eigenvalue (semicircle distance).")
    p.add_argument("--summary", type=str, default=None, help="Summary JSON path (default: <out>.summary.json).")

    p = sub.add_parser("tilt", help="Tilted importance-sampling estimates of the top-eigenvalue tail.")
    _common(p)
    p.add_argument("--N-list", type=str, default="50,100,200")
    p.add_argument("--x", type=float, default=2.5)
    p.add_argument("--theta", type=float, default=1.0)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--delta", type=float, default=DEFAULT_DELTA)
    p.add_argument("--event", choices=("window", "upper"), default="window")

    p = sub.add_parser("localize", help="Localization statistics of top eigenvectors.")
    _common(p)
    _ensemble_args(p)
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--r2", type=float, default=1.0)
    p.add_argument("--exponent", type=float, default=-0.25)
    return ap


_ALIASES = {"laws-inspect": "laws"}


def _parse(argv: list[str] | None) -> argparse.Namespace:
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise InvalidParameters(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(cfg, dict):
            raise InvalidParameters("config file must hold a JSON object")
        cfg = {k.replace("-", "_"): v for k, v in cfg.items()}
        # command-line values win over the file: re-parse with the file as defaults
        subparsers = next(a for a in ap._actions if isinstance(a, argparse._SubParsersAction))
        sp = subparsers.choices[args.command]
        known = {a.dest for a in sp._actions}
        unknown = sorted(set(cfg) - known)
        if unknown:
            raise InvalidParameters(f"unknown config keys: {unknown}")
        sp.set_defaults(**cfg)
        args = ap.parse_args(argv)
    args.command = _ALIASES.get(args.command, args.command)
    return args


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def _cmd_laws(args) -> int:
    law, spec = _law(args)
    tc = tail_constants(law)
    cls = classify(law)
    window = goe_window(tc.A)
    info = {
        "meta": _meta(args, {"law": spec}),
        "name": law.name,
        "spec": spec,
        "A": tc.A,
        "B": tc.B,
        "m_star": tc.m_star,
        "psi_second_at_mstar": tc.psi_second_at_mstar,
        "class": cls.tag.value,
        "evidence": cls.evidence,
        "small_theta_threshold": small_theta_threshold(tc.A),
        "goe_window": list(window) if window else None,
    }
    if args.emit_spec:
        with open(args.emit_spec, "w", encoding="utf-8") as fh:
            json.dump(spec, fh, indent=2, sort_keys=True)
            fh.write("\n")
    _write(args.out, json.dumps(_json_safe(info), indent=2, sort_keys=True) + "\n")
    return EXIT_OK


def _cmd_fcurve(args) -> int:
    law, spec = _law(args)
    thetas = _grid(args.theta_min, args.theta_max, args.steps)
    rows = []
    for th in thetas:
        p = f_value(law, th)
        rows.append(
            {
                "theta": float(th),
                "F": p.value,
                "regime": p.regime.value,
                "alpha_opt": p.alpha_opt,
                "zeta_opt": p.zeta_opt,
                "validity": p.validity,
                "upper": p.upper,
            }
        )
    config = {"law": spec, "theta_min": args.theta_min, "theta_max": args.theta_max, "steps": args.steps}
    _emit(args, config, ["theta", "F", "regime", "alpha_opt", "zeta_opt", "validity", "upper"], rows)
    return EXIT_OK


def _cmd_rate(args) -> int:
    law, spec = _law(args)
    xs = _grid(args.xmin, args.xmax, args.steps)
    curve = rate_curve(law, xs, workers=args.workers, allow_upper_bound=args.allow_upper_bound)
    rows = [
        {"x": p.x, "I": p.value, "I_GOE": g, "theta_star": p.theta_star, "validity": p.validity}
        for p, g in zip(curve.points, curve.goe_reference)
    ]
    cols = ["x", "I", "I_GOE"] + (["theta_star"] if args.emit_theta else []) + ["validity"]
    config = {"law": spec, "xmin": args.xmin, "xmax": args.xmax, "steps": args.steps,
              "allow_upper_bound": args.allow_upper_bound}
    _emit(args, config, cols, rows)
    return EXIT_OK


def _cmd_igoe(args) -> int:
    xs = _grid(args.xmin, args.xmax, args.steps)
    rows = []
    for x in xs:
        q = i_goe_quadrature(x) if x >= 2.0 else math.inf
        rows.append({"x": float(x), "I_GOE": i_goe(x), "I_GOE_quadrature": q})
    config = {"xmin": args.xmin, "xmax": args.xmax, "steps": args.steps}
    _emit(args, config, ["x", "I_GOE", "I_GOE_quadrature"], rows)
    return EXIT_OK


def _ensemble_config(args, spec) -> dict:
    return {"law": spec, "N": args.N, "samples": args.samples, "tilt_theta": args.tilt_theta,
            "tilt_dir": args.tilt_dir if args.tilt_theta is not None else None}


def _cmd_simulate(args) -> int:
    law, spec = _law(args)
    cfg = _ensemble(args, law)
    e = cfg.direction() if cfg.tilt is not None else None

    def one(k):
        X = sample_tilted_wigner(cfg, k) if cfg.tilt is not None else sample_wigner(cfg, k)
        st = spectrum_stats(X, full=args.full_spectrum, keep_vector=e is not None)
        ov = float(np.dot(st.top_eigenvector, e) ** 2) if e is not None else None
        return {"sample": k, "lambda_max": st.lambda_max, "ks": st.ks_to_semicircle, "overlap_sq": ov}

    rows = map_samples(one, args.samples, args.workers)
    lams = np.array([r["lambda_max"] for r in rows])
    summary: dict[str, Any] = {
        "n_samples": args.samples,
        "mean_lambda_max": float(lams.mean()),
        "stderr_lambda_max": float(lams.std(ddof=1) / math.sqrt(lams.size)) if lams.size > 1 else None,
    }
    if args.full_spectrum:
        summary["mean_ks"] = float(np.mean([r["ks"] for r in rows]))
    if e is not None:
        summary["mean_overlap_sq"] = float(np.mean([r["overlap_sq"] for r in rows]))
        if isinstance(cfg.tilt.direction, str) and 2.0 * cfg.tilt.theta > 1.0:
            summary["predicted_lambda_max"] = k_sigma(2.0 * cfg.tilt.theta)
            summary["predicted_overlap_sq"] = 1.0 - 1.0 / (2.0 * cfg.tilt.theta) ** 2
    summary_text = json.dumps(_json_safe(summary), indent=2, sort_keys=True) + "\n"
    path = args.summary or (args.out + ".summary.json" if args.out else None)
    trailer = None
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(summary_text)
    else:
        trailer = "# summary " + json.dumps(_json_safe(summary), sort_keys=True) + "\n"
    _emit(args, _ensemble_config(args, spec), ["sample", "lambda_max", "ks", "overlap_sq"], rows, trailer)
    return EXIT_OK


def _cmd_tilt(args) -> int:
    law, spec = _law(args)
    try:
        Ns = [int(t) for t in args.N_list.split(",") if t.strip()]
    except ValueError as exc:
        raise InvalidParameters(f"malformed --N-list {args.N_list!r}") from exc
    if not Ns or min(Ns) < 1:
        raise InvalidParameters("constraint violated: --N-list holds positive integers")
    rows, status = [], EXIT_OK
    for N in Ns:
        try:
            t = tail_estimate_tilted(law, N, args.x, args.theta, args.samples, args.seed, delta=args.delta,
                                     event=args.event, workers=args.workers)
            rows.append({"N": N, "log_p_per_N": t.log_p_per_N, "stderr": t.stderr, "ess": t.ess, "hits": t.hits,
                         "mean_weight": t.mean_weight, "status": "ok"})
        except NumericsError:
            rows.append({"N": N, "log_p_per_N": math.nan, "stderr": math.nan, "ess": math.nan, "hits": None,
                         "mean_weight": math.nan, "status": "degenerate"})
            status = EXIT_NUMERICS
    config = {"law": spec, "N_list": Ns, "x": args.x, "theta": args.theta, "samples": args.samples,
              "delta": args.delta, "event": args.event, "reference_I_GOE": i_goe(args.x)}
    _emit(args, config, ["N", "log_p_per_N", "stderr", "ess", "hits", "mean_weight", "status"], rows)
    return status


def _cmd_localize(args) -> int:
    law, spec = _law(args)
    cfg = _ensemble(args, law)
    e = cfg.direction() if cfg.tilt is not None else None

    def one(k):
        X = sample_tilted_wigner(cfg, k) if cfg.tilt is not None else sample_wigner(cfg, k)
        lam, u = eig_top(X)
        s = localization_stats(u, args.epsilon, args.r2, direction=e, exponent=args.exponent)
        return {"sample": k, "lambda_max": lam, "bucket_count": s.bucket_count, "bucket_mass": s.bucket_mass,
                "small_mass": s.small_mass, "overlap_sq": s.overlap_sq,
                "deloc_violation_count": s.deloc_violation_count}

    rows = map_samples(one, args.samples, args.workers)
    config = dict(_ensemble_config(args, spec), epsilon=args.epsilon, r2=args.r2, exponent=args.exponent)
    cols = ["sample", "lambda_max", "bucket_count", "bucket_mass", "small_mass", "overlap_sq", "deloc_violation_count"]
    _emit(args, config, cols, rows)
    return EXIT_OK


_COMMANDS = {
    "laws": _cmd_laws,
    "fcurve": _cmd_fcurve,
    "rate": _cmd_rate,
    "igoe": _cmd_igoe,
    "simulate": _cmd_simulate,
    "tilt": _cmd_tilt,
    "localize": _cmd_localize,
}


def main(argv: list[str] | None = None) -> int:
    try:
        args = _parse(argv)
        return _COMMANDS[args.command](args)
    except WrongRegime as exc:
        print(f"regime error: {exc}", file=sys.stderr)
        return EXIT_REGIME
    except NumericsError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICS
    except (InvalidParameters, OutOfDomain, TiltOutOfRange, ValueError, OSError) as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
