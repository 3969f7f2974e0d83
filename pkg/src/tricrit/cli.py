"""Command line interface: ``tricrit {constants,growth,verify-lemma,build-net}``.

Exit codes: 0 success, 2 invalid configuration, 3 numerical non-convergence,
4 inconclusive verification.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import elliptic, extremal_fn, nevanlinna, trinet
from .errors import Inconclusive, Inconsistent, NonConvergence, SamplingTooCoarse, Unsupported

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NONCONVERGENCE = 3
EXIT_INCONCLUSIVE = 4

LEMMA_MAX_TRIANGLES = 12


class ConfigError(ValueError):
    pass


def fmt(x: float) -> str:
    """17 significant digits, the round-trip precision of a double."""
    return format(float(x), ".17g")


def to_json(obj, indent: int | None = 2) -> str:
    """JSON text with every finite float written to 17 significant digits."""
    # json cannot emit raw number text, so floats go in as placeholders
    raws: list[str] = []

    def conv(o):
        if isinstance(o, (bool, type(None), str)):
            return o
        if isinstance(o, (int, np.integer)):
            return int(o)
        if isinstance(o, (float, np.floating)):
            if not math.isfinite(o):
                return None
            raws.append(fmt(o))
            return f"\x00{len(raws) - 1}\x00"
        if isinstance(o, complex):
            return [conv(o.real), conv(o.imag)]
        if isinstance(o, dict):
            return {str(k): conv(v) for k, v in o.items()}
        if isinstance(o, (list, tuple, np.ndarray)):
            return [conv(v) for v in o]
        raise TypeError(f"cannot serialise {type(o).__name__}")

    text = json.dumps(conv(obj), indent=indent)
    for i, raw in enumerate(raws):
        text = text.replace(f'"\\u0000{i}\\u0000"', raw, 1)
    return text + "\n"


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


# --- subcommands -------------------------------------------------------------------


def cmd_constants(args) -> int:
    c = elliptic.compute_constants()
    data = {
        "k": c.k,
        "a": c.a,
        "g2": c.g2,
        "g3": c.g3,
        "sqrt3_over_pi": nevanlinna.SQRT3_OVER_PI,
        "sqrt3_over_2pi": nevanlinna.SQRT3_OVER_2PI,
        "I_of_1": extremal_fn.integral_I([0, 1]).real,
        "a_equals_k_cubed": abs(c.a - c.k**3) <= 1e-12 * c.a,
    }
    if args.format == "csv":
        lines = ["name,value"]
        for k, v in data.items():
            if isinstance(v, complex):
                lines += [f"{k}_re,{fmt(v.real)}", f"{k}_im,{fmt(v.imag)}"]
            elif isinstance(v, bool):
                lines.append(f"{k},{str(v).lower()}")
            else:
                lines.append(f"{k},{fmt(v)}")
        _emit("\n".join(lines) + "\n", args.out)
    else:
        _emit(to_json(data), args.out)
    return EXIT_OK


def _growth_series(args) -> nevanlinna.GrowthSeries:
    radii = nevanlinna.sample_radii(args.r_max, args.per_decade, args.r_min)
    if args.method == "quadrature":
        A = nevanlinna.pullback_area(args.function, radii, per_decade=args.per_decade)
    else:
        if args.function != "f1":
            raise Unsupported("counting is available for f1 only")
        if args.seed is None:
            raise ConfigError("--seed is required for the counting method")
        est = nevanlinna.pullback_count("f1", nevanlinna.SphereMeasure.spherical(), radii,
                                        mc_samples=args.mc_samples, seed=args.seed, method="mc")
        A = est.value
    return nevanlinna.GrowthSeries.from_A(radii, A)


def cmd_growth(args) -> int:
    if not 0 < args.r_min < args.r_max:
        raise ConfigError("need 0 < r_min < r_max")
    if args.r_min < math.e:
        raise ConfigError("r_min must be at least e")
    if args.per_decade < 1 or args.mc_samples < 2:
        raise ConfigError("per-decade must be >= 1 and mc-samples >= 2")
    series = _growth_series(args)
    fit_lo = args.fit_min if args.fit_min is not None else max(args.r_min, args.r_max / 1e4)
    window = (fit_lo, args.r_max)
    fits = {m: nevanlinna.fit_series(series, m, window).as_dict() for m in nevanlinna.MODELS}
    footer = {
        "function": args.function,
        "method": args.method,
        "seed": args.seed,
        "per_decade": args.per_decade,
        "mc_samples": args.mc_samples if args.method == "counting" else None,
        "fits": fits,
        "invariant_violations": series.check_invariants(),
    }
    T_over = series.T / np.log(series.r) ** 2
    if args.format == "json":
        rows = [{"r": r, "A": a, "T": t, "T_over_log2r": q} for r, a, t, q in zip(series.r, series.A, series.T, T_over)]
        _emit(to_json({"rows": rows, **footer}), args.out)
    else:
        _emit(series.to_csv(extra={"T_over_log2r": T_over}), args.out)
        fit_out = args.fit_out or (args.out + ".fit.json" if args.out else None)
        if fit_out:
            Path(fit_out).write_text(to_json(footer))
        else:
            sys.stderr.write(to_json(footer))
    return EXIT_OK


def lemma_report(max_triangles: int, max_crossings: int, cone_points: bool = False) -> dict:
    """Systoles of every enumerated annulus, with the equality cases flagged."""
    from .enumerate import enumerate_annuli, net_to_code

    if not 1 <= max_triangles <= LEMMA_MAX_TRIANGLES:
        raise ConfigError(f"max_triangles must lie in 1..{LEMMA_MAX_TRIANGLES}")
    if max_crossings < 1:
        raise ConfigError("max_crossings must be positive")
    result = enumerate_annuli(max_triangles, flat_only=not cone_points)
    figure1 = net_to_code(trinet.build_figure1())
    surfaces, inconclusive = [], []
    best = math.inf
    for i, (code, net) in enumerate(zip(result.annuli, result.nets())):
        entry = {"id": i, "n_triangles": net.n_triangles, "code": code.hex()}
        try:
            res = trinet.systole_verify(net, max_crossings)
        except Inconclusive as exc:
            inconclusive.append({**entry, "reason": str(exc)})
            continue
        best = min(best, res.min_length)
        surfaces.append({**entry, "systole": res.min_length, "squared_pieces": list(res.norms),
                         "exactly_sqrt3": res.is_exactly_sqrt3, "kind": res.kind,
                         "witness": [list(w) for w in res.witness], "figure1": code == figure1})
    equality = [s["id"] for s in surfaces if s["exactly_sqrt3"]]
    return {
        "max_triangles": max_triangles,
        "max_crossings": max_crossings,
        "cone_points": cone_points,
        "states_visited": result.states_visited,
        "n_surfaces": len(result.annuli),
        "global_min": best if surfaces else None,
        "global_min_is_sqrt3": bool(surfaces) and abs(best - math.sqrt(3)) <= 1e-12,
        "below_sqrt3": [s["id"] for s in surfaces if s["systole"] < math.sqrt(3) - 1e-9],
        "equality_ids": equality,
        "figure1_ids": [s["id"] for s in surfaces if s["figure1"]],
        "surfaces": surfaces,
        "inconclusive": inconclusive,
    }


def cmd_verify_lemma(args) -> int:
    report = lemma_report(args.max_triangles, args.max_crossings, args.cone_points)
    _emit(to_json(report, indent=None if args.compact else 2), args.out)
    return EXIT_INCONCLUSIVE if report["inconclusive"] else EXIT_OK


_BUILDERS = {
    "patched": trinet.build_patched_cylinder,
    "block": trinet.build_block_cylinder,
    "strip": trinet.build_strip_cylinder,
}


def cmd_build_net(args) -> int:
    if args.blocks < 1:
        raise ConfigError("blocks must be at least 1")
    if args.kind == "figure1":
        net = trinet.build_figure1()
    else:
        net = _BUILDERS[args.kind](args.blocks)
    report = trinet.validate_net(net)
    if not report.valid:
        raise Inconclusive(f"built net fails validation: {report.violations}")
    _emit(net.to_json(indent=2) + "\n", args.out)
    return EXIT_OK


# --- parser ------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tricrit", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("constants", help="lattice constants and I(1)")
    c.add_argument("--format", choices=("json", "csv"), default="json")
    c.add_argument("--out")
    c.set_defaults(func=cmd_constants)

    g = sub.add_parser("growth", help="A(r), T(r) table with fitted growth coefficients")
    g.add_argument("--function", choices=("f0", "f1"), required=True)
    g.add_argument("--r-min", type=float, default=math.e)
    g.add_argument("--r-max", type=float, default=1e6)
    g.add_argument("--per-decade", type=int, default=nevanlinna.DEFAULT_PER_DECADE)
    g.add_argument("--method", choices=("quadrature", "counting"), default="quadrature")
    g.add_argument("--seed", type=int)
    g.add_argument("--mc-samples", type=int, default=nevanlinna.DEFAULT_MC_SAMPLES)
    g.add_argument("--fit-min", type=float, help="lower end of the fit window (default r_max / 1e4)")
    g.add_argument("--out")
    g.add_argument("--fit-out", help="fit summary path (default <out>.fit.json, stderr without --out)")
    g.add_argument("--format", choices=("csv", "json"), default="csv")
    g.set_defaults(func=cmd_growth)

    v = sub.add_parser("verify-lemma", help="systoles of all small annular nets")
    v.add_argument("--max-triangles", type=int, default=LEMMA_MAX_TRIANGLES)
    v.add_argument("--max-crossings", type=int, default=24)
    v.add_argument("--cone-points", action="store_true", help="also allow interior vertices of valence other than 6")
    v.add_argument("--compact", action="store_true")
    v.add_argument("--out")
    v.add_argument("--format", choices=("json",), default="json")
    v.set_defaults(func=cmd_verify_lemma)

    b = sub.add_parser("build-net", help="serialise a constructed net")
    b.add_argument("--blocks", type=int, default=1)
    b.add_argument("--kind", choices=("patched", "block", "strip", "figure1"), default="patched")
    b.add_argument("--out")
    b.add_argument("--format", choices=("json",), default="json")
    b.set_defaults(func=cmd_build_net)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, Unsupported, SamplingTooCoarse, Inconsistent, ValueError) as exc:
        print(f"tricrit: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NonConvergence as exc:
        print(f"tricrit: no convergence: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except Inconclusive as exc:
        print(f"tricrit: inconclusive: {exc}", file=sys.stderr)
        return EXIT_INCONCLUSIVE


if __name__ == "__main__":
    sys.exit(main())
