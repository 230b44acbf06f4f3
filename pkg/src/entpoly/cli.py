"""Command-line entry point: ``entpoly <command> [options]``.

Exit codes: 0 success, 2 input or validation error, 3 numerical failure
(the requested operation annihilates the state).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import re
import sys
from fractions import Fraction

import numpy as np

from entpoly import filtering, montecarlo, polytope, tomo
from entpoly.prng import Stream
from entpoly.qcore import AnnihilationError, canonical_state, load_state, local_spectra, fidelity_pure

EXIT_INPUT = 2
EXIT_NUMERIC = 3

_ANGLE = re.compile(r"^(?P<sign>[+-]?)(?P<coef>\d+(?:\.\d*)?)?\s*\*?\s*pi\s*(?:/\s*(?P<den>\d+))?$")


def parse_angle(text: str) -> float:
    """Radians from ``0.3927``, ``pi/8``, ``-pi/8``, ``3pi/32`` or ``3*pi/32``."""
    s = text.strip().lower()
    m = _ANGLE.match(s)
    if m:
        coef = Fraction(m.group("coef")) if m.group("coef") else Fraction(1)
        if m.group("den"):
            coef /= int(m.group("den"))
        value = float(coef) * math.pi
        return -value if m.group("sign") == "-" else value
    try:
        return float(Fraction(s))
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"cannot parse angle {text!r}") from None


def parse_gamma(text: str) -> float:
    try:
        value = float(Fraction(text.strip()))
    except (ValueError, ZeroDivisionError):
        m = re.fullmatch(r"1/sqrt\((\d+(?:\.\d*)?)\)", text.strip())
        if not m:
            raise argparse.ArgumentTypeError(f"cannot parse gamma {text!r}") from None
        value = 1.0 / math.sqrt(float(m.group(1)))
    if not 0 < value <= 1:
        raise argparse.ArgumentTypeError(f"gamma must be in (0, 1], got {value}")
    return value


def parse_grid(kind):
    def parse(text: str) -> list[float]:
        parts = text.split(":")
        if len(parts) != 3:
            raise argparse.ArgumentTypeError(f"grid must be start:stop:count, got {text!r}")
        start, stop = (kind(p) for p in parts[:2])
        try:
            count = int(parts[2])
        except ValueError:
            raise argparse.ArgumentTypeError(f"grid count must be an integer, got {parts[2]!r}") from None
        if count < 1:
            raise argparse.ArgumentTypeError("grid count must be >= 1")
        return [float(x) for x in np.linspace(start, stop, count)]
    return parse


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def resolve_state(source: str):
    """``psi1``, ``psi2``, ``epr``, ``ghz:N``, ``w:N``, ``basis:INDEX`` (4 qubits), ``basis:N:INDEX`` or ``file:PATH``."""
    src = source.strip()
    if src.lower().startswith("file:"):
        return load_state(src[5:])
    parts = src.lower().split(":")
    name, args = parts[0], parts[1:]
    try:
        nums = [int(a) for a in args]
    except ValueError:
        raise ValueError(f"--state: bad numeric argument in {source!r}") from None
    if name in ("psi1", "psi2", "epr") and not nums:
        return canonical_state(name)
    if name in ("ghz", "w") and len(nums) == 1:
        return canonical_state(name, n=nums[0])
    if name == "basis" and len(nums) in (1, 2):
        n, index = (4, nums[0]) if len(nums) == 1 else nums
        return canonical_state("basis", n=n, index=index)
    raise ValueError(f"--state: unknown state source {source!r}")


def _emit(args, document=None, table=None):
    if table is not None:
        buf = io.StringIO()
        buf.write("# " + json.dumps(document["config"], sort_keys=True) + "\n")
        writer = csv.writer(buf, lineterminator="\n")
        for row in table:
            writer.writerow(row)
        text = buf.getvalue()
    else:
        text = json.dumps(document, indent=2) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _config(args) -> dict:
    skip = {"func", "out"}
    cfg = {}
    for k, v in sorted(vars(args).items()):
        if k not in skip:
            cfg[k] = v
    return cfg


def _g12(x: float) -> str:
    return format(x, ".12g")


def cmd_classify(args):
    state = resolve_state(args.state)
    spectra = local_spectra(state)
    if len(spectra) not in (3, 4):
        raise ValueError(f"--state: classification needs 3 or 4 qubits, got {len(spectra)}")
    cls = polytope.classify(spectra)
    result = {
        "spectra": list(spectra),
        "containing": [str(i) for i in cls.containing],
        "minimal": [str(i) for i in cls.minimal],
    }
    if len(spectra) == 4:
        result["f_values"] = [
            {"negated": i, "f": polytope.f_value(spectra, i), "slack": polytope.f_value(spectra, i) - 1.0}
            for i in range(1, 5)
        ]
    else:
        total = sum(spectra)
        result["w3_sum"] = {"sum": total, "slack": total - 2.0}
    return {"config": _config(args), "result": result}, None


def _setting(args, theta1=None, gamma=None):
    return filtering.FilterSetting(
        theta1=args.theta1 if theta1 is None else theta1,
        gamma=args.gamma if gamma is None else gamma,
        theta2=args.theta2,
        outcome=args.outcome,
    )


def cmd_protocol(args):
    res = filtering.run_protocol(resolve_state(args.state), _setting(args))
    l2, l3, l4 = res.spectra
    return {"config": _config(args), "result": {
        "lambda2": l2, "lambda3": l3, "lambda4": l4,
        "f": res.f, "success": res.success,
        "full_spectra": list(res.full_spectra),
        "inside_P4": bool(polytope.facets("P4").satisfied(res.full_spectra, 1e-9)),
    }}, None


def cmd_sweep(args):
    base = filtering.FilterSetting(0.0, theta2=args.theta2, outcome=args.outcome)
    rows = filtering.sweep(resolve_state(args.state), args.theta1_grid, args.invgamma2_grid, base)
    header = ["theta1", "inv_gamma_sq", "f", "success", "lambda2", "lambda3", "lambda4"]
    doc = {"config": _config(args)}
    if args.format == "json":
        doc["result"] = [
            dict(zip(header, [r.theta1, r.inv_gamma_sq, r.f, r.success, *r.spectra]), annihilated=r.annihilated)
            for r in rows
        ]
        return doc, None
    table = [header] + [[_g12(x) for x in (r.theta1, r.inv_gamma_sq, r.f, r.success, *r.spectra)] for r in rows]
    return doc, table


def cmd_search(args):
    base = filtering.FilterSetting(0.0, theta2=args.theta2, outcome=args.outcome)
    res = filtering.search_escape(resolve_state(args.state), args.target, args.budget, base)
    best = None
    if res.setting is not None:
        best = {"theta1": res.setting.theta1, "gamma": res.setting.gamma, "inv_gamma_sq": res.setting.inv_gamma_sq}
    return {"config": _config(args), "result": {
        "best_setting": best, "margin": res.margin, "escaped": res.escaped, "evaluations": res.evaluations,
    }}, None


def _volume_table(tally: montecarlo.SampleTally) -> dict:
    def entry(key):
        count = tally.unions[key] if key in tally.unions else tally.counts[key]
        return {"count": count, "fraction": tally.fraction(key), "stderr": tally.stderr(key)}

    families = []
    if tally.num_qubits == 4:
        for fam in ("P1", "P2", "P3", "P4", "P5", "P6", "P7"):
            variants = [k for k in tally.counts if k[:2] == fam]
            row = {"family": fam}
            if fam in tally.unions:
                row["union"] = entry(fam)
                row["variants"] = [dict(id=k, **entry(k)) for k in variants]
            else:
                row.update(entry(fam))
            families.append(row)
    else:
        families = [dict(family=k, **entry(k)) for k in tally.counts]
    fractions = {k: tally.fraction(k) for k in tally.counts}
    fractions.update({k: tally.fraction(k) for k in tally.unions})
    return {
        "num_qubits": tally.num_qubits,
        "num_samples": tally.num_samples,
        "table": families,
        "fractions": fractions,
        "shards": [list(s) for s in tally.shards],
    }


def cmd_volume(args):
    if args.n not in (3, 4):
        raise ValueError(f"-n: volume statistics need 3 or 4 qubits, got {args.n}")
    tally = montecarlo.volume_estimate(args.n, args.N, args.seed, args.shards, args.workers)
    return {"config": _config(args), "result": _volume_table(tally)}, None


def cmd_postmeasure(args):
    outside = montecarlo.postmeasure_experiment(args.N, args.seed)
    result = {"outside_W3_after_postselection": outside}
    if args.compare:
        four = montecarlo.volume_estimate(4, args.N, args.seed)
        three = montecarlo.volume_estimate(3, args.N, args.seed)
        result["outside_P4_direct_4qubit"] = 1.0 - four.fraction("P4")
        result["outside_W3_direct_3qubit"] = 1.0 - three.fraction("W3")
    return {"config": _config(args), "result": result}, None


def cmd_tomo_sim(args):
    if (args.state is None) == (args.dataset is None):
        raise ValueError("--state/--dataset: give exactly one input source")
    state = None
    if args.dataset:
        ds = tomo.load_dataset(args.dataset)
    else:
        state = resolve_state(args.state)
        ds = tomo.simulate_counts(state, args.n_set, Stream(args.seed, 0))
        if args.dataset_out:
            tomo.save_dataset(ds, args.dataset_out)
    res = tomo.bootstrap_spectra(ds, args.steps, args.seed)
    result = res.to_document()
    result["reconstructed_spectra"] = list(local_spectra(res.rho))
    if state is not None:
        result["fidelity"] = fidelity_pure(res.rho, state)
    return {"config": _config(args), "result": result}, None


def cmd_catalog(args):
    dims = (3, 4) if args.dim == "all" else (int(args.dim),)
    return {"config": _config(args), "result": polytope.catalog_to_document(dims)}, None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="entpoly",
        description="Entanglement-polytope classification, local-filter protocol and Monte Carlo volumes.",
        epilog="Exit codes: 0 success; 2 input/validation error; 3 numerical failure (annihilated state).",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, fmt="json"):
        p.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
        p.add_argument("--out", help="write output here instead of stdout")
        p.add_argument("--format", choices=["json", "csv"], default=fmt)

    def filter_flags(p):
        p.add_argument("--theta2", type=parse_angle, default=-math.pi / 8, help="default -pi/8")
        p.add_argument("--outcome", type=int, choices=[0, 1], default=0)

    p = sub.add_parser("classify", help="local spectra and containing polytopes")
    p.add_argument("--state", required=True)
    common(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("protocol", help="one run of the filter protocol")
    p.add_argument("--state", required=True)
    p.add_argument("--theta1", type=parse_angle, required=True)
    p.add_argument("--gamma", type=parse_gamma, default=1.0)
    filter_flags(p)
    common(p)
    p.set_defaults(func=cmd_protocol)

    p = sub.add_parser("sweep", help="f and success over a (theta1, 1/gamma^2) grid")
    p.add_argument("--state", required=True)
    p.add_argument("--theta1-grid", type=parse_grid(parse_angle), required=True, help="start:stop:count")
    p.add_argument("--invgamma2-grid", type=parse_grid(float), required=True, help="start:stop:count, values >= 1")
    filter_flags(p)
    common(p, fmt="csv")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("search", help="search for a filter setting that leaves a polytope")
    p.add_argument("--state", required=True)
    p.add_argument("--target", choices=["P4", "W3"], default="P4")
    p.add_argument("--budget", type=_positive_int, default=200)
    filter_flags(p)
    common(p)
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("volume", help="Haar Monte Carlo polytope occupation")
    p.add_argument("-n", type=int, default=4, help="qubits (3 or 4)")
    p.add_argument("-N", type=_positive_int, default=100_000, help="samples")
    p.add_argument("--shards", type=_positive_int, default=1)
    p.add_argument("--workers", type=_positive_int, default=1)
    common(p)
    p.set_defaults(func=cmd_volume)

    p = sub.add_parser("postmeasure", help="outside-W fraction after post-selecting qubit 1")
    p.add_argument("-N", type=_positive_int, default=100_000)
    p.add_argument("--no-compare", dest="compare", action="store_false",
                   help="skip the direct 3- and 4-qubit reference fractions")
    common(p)
    p.set_defaults(func=cmd_postmeasure)

    p = sub.add_parser("tomo-sim", help="simulated tomography with bootstrap error bars")
    p.add_argument("--state")
    p.add_argument("--dataset", help="read counts from a dataset file instead of simulating")
    p.add_argument("--n-set", type=float, default=1e4)
    p.add_argument("--steps", type=int, default=1000)
    p.add_argument("--dataset-out")
    common(p)
    p.set_defaults(func=cmd_tomo_sim)

    p = sub.add_parser("catalog", help="export polytope vertex tables")
    p.add_argument("--dim", choices=["3", "4", "all"], default="all")
    common(p)
    p.set_defaults(func=cmd_catalog)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        document, table = args.func(args)
    except AnnihilationError as exc:
        print(f"entpoly: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, OSError) as exc:
        print(f"entpoly: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    _emit(args, document, table)
    return 0


if __name__ == "__main__":
    sys.exit(main())
