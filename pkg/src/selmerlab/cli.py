"""Command-line front end.

Subcommands: selmer, census, randmat, dist, pell, isotropy, lattice,
condition-check.  Identical invocations produce byte-identical output; every
output carries a header block with the configuration, seed and code version.
Environment variables prefixed SELMERLAB_ override the corresponding flag
defaults (SELMERLAB_SEED, SELMERLAB_WORKERS, SELMERLAB_FORMAT, SELMERLAB_OUT).

Exit codes: 0 success, 2 usage error, 3 invariant violation, 4 budget exceeded.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from typing import List, Optional, Sequence

from . import __version__
from .arith import SigmaSet, square_class
from .curve import Curve2T, check_condition_gamma, check_no_cyclic_4_isogeny_proxy
from .selmer import (
    BClass,
    BudgetError,
    selmer_count_formula,
    selmer_direct,
    selmer_kernel,
    systematic_subspace,
)
from .family import census, census_tsv, family_spec, histogram_json, sieve_family
from .isotropy import enumerate_max_isotropic, main_term_identity_check, torsion_space
from .dist import alpha, beta, beta_series, hom_moment_identity, pell_constants
from .lattices import decompose, lattice, norm_index
from .pell import pell_selmer, pell_soluble, stevenhagen_census
from .randmat import (
    default_precision,
    gamma_n_empirical,
    gamma_n_exact,
    kernel_dim_distribution,
    line_equidistribution_test,
    make_rng,
)


class InvariantViolation(RuntimeError):
    pass


def _env_default(name: str, fallback, cast):
    raw = os.environ.get(f"SELMERLAB_{name}")
    if raw is None:
        return fallback
    return cast(raw)


def _parse_curve(text: str) -> Curve2T:
    parts = [int(x) for x in text.split(",")]
    if len(parts) != 3:
        raise ValueError("--curve expects three comma-separated integers")
    return Curve2T(*parts)


def _parse_gens(text: str) -> List:
    if not text:
        return []
    return [square_class(int(x)) for x in text.split(",")]


def _parse_classes(text: str):
    from .curve import descent_class

    out = []
    if text:
        for item in text.split(";"):
            c1, c2 = (int(x) for x in item.split(","))
            out.append(descent_class(c1, c2))
    return out


def _header(args, extra: Optional[dict] = None) -> List[str]:
    cfg = {k: v for k, v in sorted(vars(args).items())
           if k not in ("func", "out", "resume_from") and v is not None}
    lines = [f"# selmerlab {__version__}"]
    for k, v in sorted(cfg.items()):
        lines.append(f"# {k}={v}")
    for k, v in sorted((extra or {}).items()):
        lines.append(f"# {k}={v}")
    return lines


def _emit(args, text: str) -> None:
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# subcommands


def cmd_selmer(args) -> int:
    E = _parse_curve(args.curve)
    sigma = E.sigma(args.sigma_extra or ())
    d = args.d
    grp = selmer_kernel(E, d, sigma)
    lines = _header(args, {"sigma": sigma})
    lines.append(f"dim\t{grp.dim}")
    for dc in grp.basis:
        lines.append(f"basis\t{dc.c1.value}\t{dc.c2.value}")
    agree = True
    if args.oracle == "all":
        count = selmer_count_formula(E, d, sigma)
        direct = selmer_direct(E, d, sigma)
        agree = grp.span_equal(direct) and count == (1 << grp.dim)
        lines.append(f"direct_dim\t{direct.dim}")
        lines.append(f"formula_count\t{count}")
        lines.append(f"oracles_agree\t{1 if agree else 0}")
    _emit(args, "\n".join(lines) + "\n")
    if not agree:
        raise InvariantViolation("the three Selmer routes disagree")
    return 0


def cmd_census(args) -> int:
    E = _parse_curve(args.curve)
    gens = _parse_gens(args.L or "")
    spec = family_spec(E, gens, args.b, args.sigma_extra or ())
    tracked = _parse_classes(args.tracked or "")
    result = census(spec, args.X, tracked, workers=args.workers)
    if args.resume_from and os.path.exists(args.resume_from):
        pass  # rows recomputed deterministically; checkpoint kept for inspection
    header = "\n".join(_header(args, {"members": result.total})) + "\n"
    tsv = census_tsv(result)
    agg = histogram_json(result) + "\n"
    if args.format == "json":
        _emit(args, header + agg)
    else:
        _emit(args, header + tsv)
        aggpath = (args.out + ".aggregates.json") if args.out else None
        if aggpath:
            with open(aggpath, "w") as fh:
                fh.write(agg)
        else:
            sys.stdout.write(agg)
    return 0


def cmd_randmat(args) -> int:
    p = args.p
    e = args.e or default_precision(p)
    rng = make_rng(args.seed)
    if args.gamma:
        n, s = (int(x) for x in args.gamma.split(","))
        rep = gamma_n_empirical(n, s, p, e, args.N, rng)
        rep["exact_fraction"] = str(gamma_n_exact(n, s, p))
        rep["within_3_sigma"] = bool(
            abs(rep["estimate"] - rep["exact"]) <= 3 * rep["stderr"])
        body = json.dumps(rep, sort_keys=True, indent=2)
    elif args.kernel_dims is not None:
        n, s = (int(x) for x in args.kernel_dims.split(","))
        body = json.dumps(kernel_dim_distribution(n, s, p, e, args.N, rng),
                          sort_keys=True, indent=2)
    elif args.equidist is not None:
        s, udim = (int(x) for x in args.equidist.split(","))
        body = json.dumps(line_equidistribution_test(s, p, e, udim, args.N, rng),
                          sort_keys=True, indent=2)
    else:
        raise ValueError("choose one of --gamma, --kernel-dims, --equidist")
    _emit(args, "\n".join(_header(args, {"e_used": e})) + "\n" + body + "\n")
    return 0


def cmd_dist(args) -> int:
    lines = _header(args)
    if args.alpha is not None:
        val = alpha(args.alpha)
        lines.append(f"alpha({args.alpha})\t{float(val):.15f}\t[exact truncated "
                     f"product, error < 1e-15]")
    if args.beta is not None:
        b = beta(args.beta)
        gap = abs(float(b) - beta_series(args.beta))
        lines.append(f"beta({args.beta})\t{b.numerator}/{b.denominator}\t"
                     f"[exact; series gap {gap:.2e}]")
    if args.hom_moments is not None:
        ok = all(hom_moment_identity(r) for r in range(args.hom_moments + 1))
        lines.append(f"hom_moment_identity(r<={args.hom_moments})\t{ok}\t[exact]")
    if args.pell_constants:
        pc = pell_constants()
        lines.append(f"c_pell\t{pc.c_pell:.12f}\t[truncated product]")
        lines.append(f"alpha_pell\t{pc.alpha_pell:.12f}\t[truncated product]")
    _emit(args, "\n".join(lines) + "\n")
    return 0


def cmd_pell(args) -> int:
    if args.census:
        result = stevenhagen_census(args.census)
        header = "\n".join(_header(args, {"members": len(result.rows)})) + "\n"
        if args.format == "json":
            _emit(args, header + result.aggregates_json() + "\n")
        else:
            _emit(args, header + result.to_tsv())
            agg = result.aggregates_json() + "\n"
            if args.out:
                with open(args.out + ".aggregates.json", "w") as fh:
                    fh.write(agg)
            else:
                sys.stdout.write(agg)
        return 0
    if args.d is None:
        raise ValueError("give --census X or --d D")
    sel = pell_selmer(args.d)
    lines = _header(args)
    lines.append(f"d\t{args.d}")
    lines.append(f"soluble\t{1 if pell_soluble(args.d) else 0}\t[exact CF period]")
    lines.append(f"selmer_dim\t{sel.dim}")
    lines.append("elements\t" + ",".join(map(str, sel.elements)))
    _emit(args, "\n".join(lines) + "\n")
    return 0


def cmd_isotropy(args) -> int:
    lines = _header(args)
    if args.count is not None:
        if args.count % 2:
            raise ValueError("dim A[2] is even")
        sp = torsion_space(1, args.count // 2)
        lines.append(f"max_isotropic_count\t{len(enumerate_max_isotropic(sp))}\t[exact]")
    if args.main_term:
        E = _parse_curve(args.curve)
        gens = _parse_gens(args.L or "")
        spec = family_spec(E, gens, args.b, args.sigma_extra or ())
        rep = main_term_identity_check(E, spec.sigma, spec.b, list(spec.L_gens))
        lines.append(f"lhs\t{rep.lhs}\t[exact]")
        lines.append(f"rhs\t{rep.rhs}\t[exact]")
        lines.append(f"equal\t{1 if rep.equal else 0}")
        if not rep.equal:
            _emit(args, "\n".join(lines) + "\n")
            raise InvariantViolation("main-term identity failed")
    _emit(args, "\n".join(lines) + "\n")
    return 0


def cmd_lattice(args) -> int:
    rows = [[int(x) for x in row.split(",")] for row in args.matrix.split(";")]
    L = lattice(rows)
    n1, n2, n3 = decompose(L)
    lines = _header(args)
    lines.append(f"multiplicities\t{n1}\t{n2}\t{n3}\t[exact]")
    lines.append(f"norm_index\t{norm_index(L)}\t[exact]")
    _emit(args, "\n".join(lines) + "\n")
    return 0


def cmd_condition_check(args) -> int:
    E = _parse_curve(args.curve)
    gens = _parse_gens(args.L or "")
    rep = check_condition_gamma(E, gens)
    lines = _header(args)
    lines.append(f"satisfied\t{1 if rep.satisfied else 0}\t[exact enumeration]")
    if rep.invariant_line:
        lines.append(f"invariant_line\t{rep.invariant_line}")
    if rep.extra_endo:
        lines.append(f"extra_endomorphism\t{rep.extra_endo.rows}")
    if args.point:
        x, y = (Fraction(t) for t in args.point.split(","))
        lines.append(f"disjointness_proxy\t{check_no_cyclic_4_isogeny_proxy(E, (x, y))}")
    _emit(args, "\n".join(lines) + "\n")
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="selmerlab",
        description="Exact 2-descent statistics for quadratic twist families",
    )
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int,
                       default=_env_default("SEED", 0, int))
        p.add_argument("--workers", type=int,
                       default=_env_default("WORKERS", 1, int))
        p.add_argument("--format", choices=("tsv", "json"),
                       default=_env_default("FORMAT", "tsv", str))
        p.add_argument("--out", default=_env_default("OUT", None, str))
        p.add_argument("--sigma-extra", type=lambda s: [int(x) for x in s.split(",")],
                       default=None, help="extra odd primes to include in Sigma")

    p = sub.add_parser("selmer", help="2-Selmer group of one twist")
    common(p)
    p.add_argument("--curve", required=True, help="a1,a2,a3")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--oracle", choices=("kernel", "all"), default="all")
    p.set_defaults(func=cmd_selmer)

    p = sub.add_parser("census", help="family census of 2-Selmer dimensions")
    common(p)
    p.add_argument("--curve", required=True)
    p.add_argument("--X", type=int, required=True)
    p.add_argument("--L", default="", help="multiquadratic generators m1,m2")
    p.add_argument("--b", type=int, default=1, help="integer representing the class")
    p.add_argument("--tracked", default="", help="classes c1,c2;c1,c2 to track")
    p.add_argument("--from", dest="resume_from", default=None,
                   help="checkpoint TSV from an earlier run")
    p.set_defaults(func=cmd_census)

    p = sub.add_parser("randmat", help="random alternating matrix statistics")
    common(p)
    p.add_argument("--gamma", help="n,s for the line-hitting probability")
    p.add_argument("--kernel-dims", help="n,s for the kernel dimension histogram")
    p.add_argument("--equidist", help="s,U_dim for the equidistribution test")
    p.add_argument("--p", type=int, default=2)
    p.add_argument("--e", type=int, default=None)
    p.add_argument("--N", type=int, default=100_000)
    p.set_defaults(func=cmd_randmat)

    p = sub.add_parser("dist", help="exact distribution values and identities")
    common(p)
    p.add_argument("--alpha", type=int, default=None)
    p.add_argument("--beta", type=int, default=None)
    p.add_argument("--hom-moments", type=int, default=None)
    p.add_argument("--pell-constants", action="store_true")
    p.set_defaults(func=cmd_dist)

    p = sub.add_parser("pell", help="negative Pell solubility and census")
    common(p)
    p.add_argument("--census", type=int, default=None)
    p.add_argument("--d", type=int, default=None)
    p.set_defaults(func=cmd_pell)

    p = sub.add_parser("isotropy", help="maximal isotropic combinatorics")
    common(p)
    p.add_argument("--count", type=int, default=None, help="dim A[2]")
    p.add_argument("--main-term", action="store_true")
    p.add_argument("--curve", default=None)
    p.add_argument("--L", default="")
    p.add_argument("--b", type=int, default=1)
    p.set_defaults(func=cmd_isotropy)

    p = sub.add_parser("lattice", help="involution lattice decomposition")
    common(p)
    p.add_argument("--matrix", required=True, help="rows as r11,r12;r21,r22")
    p.set_defaults(func=cmd_lattice)

    p = sub.add_parser("condition-check", help="4-torsion largeness condition")
    common(p)
    p.add_argument("--curve", required=True)
    p.add_argument("--L", default="")
    p.add_argument("--point", default=None, help="x,y for the disjointness proxy")
    p.set_defaults(func=cmd_condition_check)

    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except BudgetError as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return 4
    except (InvariantViolation, AssertionError) as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return 3
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
