"""Command-line front end.

Exit codes: 0 the order holds or the construction succeeded, 1 the order fails
(a certificate is written), 2 usage or input error, 3 numerical breakdown.
The result goes to stdout as JSON; a one-line summary goes to stderr.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import io, kernels, measures, order
from .errors import InfeasibleError, MeasureError, NumericalBreakdown, UnboundedError
from .geometry import wulff_support

EXIT_OK, EXIT_FAILS, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3
DEFAULT_SEED = 0


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _note(msg: str) -> None:
    print(msg, file=sys.stderr)


def _emit(obj) -> None:
    sys.stdout.write(io.dumps(obj))


def _pair(args):
    a, b = io.read_measure(args.a), io.read_measure(args.b)
    if a.dim != b.dim:
        raise MeasureError(f"{args.a} has dim {a.dim} but {args.b} has dim {b.dim}")
    return a, b


def _verdict(v, args) -> int:
    _emit(io.verdict_to_dict(v, args.timing))
    if v.holds:
        _note(f"{v.relation} order holds ({v.stats.get('pivots', 0)} pivots)")
        return EXIT_OK
    _note(f"{v.relation} order fails; certificate gap {v.gap:.6g}")
    return EXIT_FAILS


def cmd_check_order(args) -> int:
    a, b = _pair(args)
    check = order.check_phc if args.relation == "phc" else order.check_cx
    return _verdict(check(a, b, tol=args.tol), args)


def cmd_find_kernel(args) -> int:
    a, b = _pair(args)
    v = order.check_phc(a, b, tol=args.tol)
    if v.holds:
        _emit(io.kernel_to_dict(v.witness))
        _note("moment-preserving kernel found")
        return EXIT_OK
    return _verdict(v, args)


def cmd_barcost(args) -> int:
    a, b = _pair(args)
    res = order.barycentric_cost(a, b, norm=args.norm)
    _emit({"norm": res.norm, "value": res.value, "upper_bound": res.upper_bound,
           "kernel": io.kernel_to_dict(res.kernel)})
    _note(f"barycentric cost ({res.norm}{', upper bound' if res.upper_bound else ''}) = {res.value:.6g}")
    return EXIT_OK


def cmd_marginal(args) -> int:
    m = measures.homogeneous_marginal(io.read_measure(args.a), args.tol)
    _emit(io.measure_to_dict(m))
    _note(f"homogeneous marginal with {len(m)} atoms")
    return EXIT_OK


def cmd_sphere_kernels(args) -> int:
    m = io.read_measure(args.a)
    fwd = kernels.sphere_kernel(m, args.tol)
    try:
        inv = io.kernel_to_dict(kernels.inverse_sphere_kernel(m, args.tol))
    except MeasureError as exc:
        inv = None
        _note(f"no inverse sphere kernel: {exc}")
    _emit({"sphere_kernel": io.kernel_to_dict(fwd), "inverse_sphere_kernel": inv})
    return EXIT_OK


def cmd_coarsen(args) -> int:
    m = measures.coarsen(io.read_measure(args.a), args.n)
    _emit(io.measure_to_dict(m))
    _note(f"coarsened to {len(m)} atoms")
    return EXIT_OK


def _unary(fn):
    def run(args) -> int:
        m = io.read_measure(args.a)
        out = fn(m) if fn is measures.lift else fn(m, args.tol)
        _emit(io.measure_to_dict(out))
        return EXIT_OK
    return run


def cmd_wulff(args) -> int:
    f = io.read_samples(args.f)
    try:
        value = wulff_support(f, np.asarray(args.omega, dtype=float))
    except UnboundedError:
        _note("Wulff shape is unbounded along omega (directions do not positively span)")
        return EXIT_INPUT
    except InfeasibleError:
        _note("Wulff shape is empty")
        return EXIT_INPUT
    _emit({"value": value})
    return EXIT_OK


def cmd_w1(args) -> int:
    a, b = _pair(args)
    _emit({"norm": args.norm, "value": measures.w1(a, b, args.norm, args.tol)})
    return EXIT_OK


def cmd_glue(args) -> int:
    p, q = io.read_kernel(args.p), io.read_kernel(args.q)
    _emit(io.kernel_to_dict(kernels.glue(p, q, args.tol)))
    return EXIT_OK


def cmd_probe(args) -> int:
    a, b = _pair(args)
    res = order.dual_probe(a, b, trials=args.trials, k=args.pieces, seed=args.seed, tol=args.tol)
    _emit({
        "passed": res.passed,
        "violator": io.support_function_to_dict(res.violator) if res.violator is not None else None,
        "excess": res.excess,
        "trials_run": res.trials_run,
    })
    if res.passed:
        _note(f"no violation in {res.trials_run} random support functions (evidence only)")
        return EXIT_OK
    _note(f"support function {res.trials_run} separates; order fails")
    return EXIT_FAILS


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=measures.DEFAULT_TOL,
                        help="decision tolerance (default %(default)g)")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED, help="seed for randomized steps")
    common.add_argument("--timing", action="store_true", help="report runtime_ms in verdict stats")

    parser = _Parser(prog="phcorder", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, fn, help_, *files):
        p = sub.add_parser(name, parents=[common], help=help_)
        for f in files:
            p.add_argument(f)
        p.set_defaults(func=fn)
        return p

    p = add("check-order", cmd_check_order, "decide mu <= nu in the phc or cx order", "a", "b")
    p.add_argument("--relation", choices=("phc", "cx"), default="phc")
    add("find-kernel", cmd_find_kernel, "moment-preserving kernel from A to B", "a", "b")
    p = add("barcost", cmd_barcost, "barycentric cost", "a", "b")
    p.add_argument("--norm", choices=measures.NORMS, default="l1")
    add("marginal", cmd_marginal, "homogeneous marginal", "a")
    add("sphere-kernels", cmd_sphere_kernels, "kernels to and from the homogeneous marginal", "a")
    p = add("coarsen", cmd_coarsen, "grid barycenter discretization", "a")
    p.add_argument("--n", type=int, required=True)
    add("lift", _unary(measures.lift), "embed into the hyperplane x_{d+1} = 1", "a")
    add("project", _unary(measures.project), "drop the last coordinate", "a")
    add("flatten", _unary(measures.flatten_to_hyperplane), "slide mass along rays onto x_{d+1} = 1", "a")
    p = add("wulff", cmd_wulff, "support function of a Wulff shape", "f")
    p.add_argument("--omega", type=float, nargs="+", required=True)
    p = add("w1", cmd_w1, "Wasserstein-1 distance", "a", "b")
    p.add_argument("--norm", choices=measures.NORMS, default="l2")
    add("glue", cmd_glue, "compose two kernels", "p", "q")
    p = add("probe", cmd_probe, "Monte-Carlo support-function test", "a", "b")
    p.add_argument("--trials", type=int, default=256)
    p.add_argument("--pieces", type=int, default=3)
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except NumericalBreakdown as exc:
        _note(f"numerical breakdown: {exc}")
        return EXIT_NUMERIC
    except (MeasureError, ValueError) as exc:
        _note(f"error: {exc}")
        return EXIT_INPUT


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
