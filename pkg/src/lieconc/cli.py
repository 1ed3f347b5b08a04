"""``lieconc`` command line driver.

Every subcommand emits flat records (CSV or JSON) that always carry the seed
and the package version.  Exit status: 0 ok, 1 invariant failure, 2 usage error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from pathlib import Path

import numpy as np
from scipy import stats as sps

from . import __version__, concentration, examples, liealg, rootdata, sampling, suite
from .sampling import RandomStream

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
PLOT_COLUMNS = ("n", "epsilon", "exact", "mc", "halfwidth")


class UsageError(ValueError):
    pass


# -- serialization ------------------------------------------------------------------


def fmt_float(x: float) -> str:
    return format(float(x), ".17g")


def _plain(v):
    if isinstance(v, (np.bool_, bool)):
        return bool(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.floating):
        return float(v)
    return v


def to_json(v) -> str:
    """JSON with floats at 17 significant digits; non-finite floats become null."""
    v = _plain(v)
    if v is None:
        return "null"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return fmt_float(v) if math.isfinite(v) else "null"
    if isinstance(v, str):
        return json.dumps(v)
    if isinstance(v, dict):
        return "{" + ", ".join(f"{to_json(str(k))}: {to_json(x)}" for k, x in v.items()) + "}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(to_json(x) for x in v) + "]"
    raise TypeError(f"cannot serialize {type(v).__name__}")


def _cell(v) -> str:
    v = _plain(v)
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return fmt_float(v)
    if isinstance(v, (dict, list, tuple)):
        return to_json(v)
    return str(v)


def render(records: list[dict], fmt: str) -> str:
    if fmt == "json":
        return "[\n" + ",\n".join("  " + to_json(r) for r in records) + "\n]\n"
    columns: list[str] = []
    for r in records:
        columns += [k for k in r if k not in columns]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in records:
        w.writerow([_cell(r.get(c)) for c in columns])
    return buf.getvalue()


def write_atomic(path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def emit_plot_data(report: concentration.ConcentrationReport, path) -> Path:
    """Write ``n,epsilon,exact,mc,halfwidth`` rows for external plotting."""
    if not report.entries:
        raise ValueError("empty report")
    rows = [{"n": e.n, "epsilon": e.epsilon, "exact": e.exact_mass, "mc": e.mc_mass,
             "halfwidth": e.mc_halfwidth} for e in report.entries]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(PLOT_COLUMNS)
    for r in rows:
        w.writerow([_cell(r[c]) for c in PLOT_COLUMNS])
    return write_atomic(path, buf.getvalue())


def load_plot_data(path) -> list[tuple]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != PLOT_COLUMNS:
            raise ValueError(f"unexpected header {header}")
        return [(int(n), float(eps), None if ex == "" else float(ex), float(mc), float(hw))
                for n, eps, ex, mc, hw in reader]


# -- subcommands --------------------------------------------------------------------


def _ints(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated integers, got {text!r}") from None


def _floats(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated numbers, got {text!r}") from None


def cmd_volume(args):
    s = rootdata.check_rank(args.series, max(args.n_min, rootdata.SeriesTag(args.series).min_n))
    start = max(args.n_min, s.min_n)
    if args.n_max < start:
        raise UsageError("--n-max below the smallest admissible rank")
    rows, ok = [], True
    for row in rootdata.volume_table(s, range(start, args.n_max + 1)):
        mac = rootdata.macdonald_log_volume(rootdata.build_root_system(s, row["n"])).log_value
        rel = abs(mac - row["log_volume"]) / max(abs(row["log_volume"]), 1.0)
        agree = rel <= suite.VOLUME_REL_TOL
        ok = ok and agree
        rows.append({**row, "macdonald_log_volume": mac, "rel_diff": rel, "agree": agree})
    return rows, ok


def cmd_ratio(args):
    rows = []
    for n in args.n:
        s = rootdata.check_rank(args.series, n)
        v = rootdata.normalized_volume_ratio(s, n)
        rows.append({"series": s.value, "n": n, "normalized_ratio": v,
                     "asymptote": rootdata.ratio_asymptote(s, n),
                     "scaled": v * math.sqrt(n / (2 * math.pi * math.e)),
                     "scaled_by_asymptote": v / rootdata.ratio_asymptote(s, n)})
    return rows, True


def cmd_chi(args):
    spec = rootdata.GroupSpec(args.series, args.n)
    basis = liealg.build_basis(spec)
    sc = liealg.structure_constants(basis)
    try:
        rep = liealg.chi_coefficient(sc)
    except liealg.NonSimpleError as exc:
        return [{"group": spec.name, "error": str(exc)}], False
    closed = liealg.chi_closed_form(basis.kind, basis.size)
    jac = liealg.jacobi_residual(sc)
    return [{"group": spec.name, "algebra": f"{basis.kind}({basis.size})", "dim": basis.dim_alg,
             "chi": rep.chi, "closed_form": closed, "matches_closed_form": abs(rep.chi - closed) <= liealg.CHI_TOL,
             "killing_constant": rep.killing_constant, "spread": rep.killing_diagonal_spread,
             "ricci_bound": rep.ricci_bound, "jacobi_residual": jac}], jac <= liealg.JACOBI_TOL


# sampler and matrix size for rank n
_HAAR = {
    "O": (sampling.haar_orthogonal, lambda n: n),
    "U": (sampling.haar_unitary, lambda n: n),
    "SU": (sampling.haar_special_unitary, lambda n: n),
    "USp": (sampling.haar_symplectic, lambda n: 2 * n),
}


def cmd_haar_check(args):
    draw, size_of = _HAAR[args.group]
    gen = RandomStream(args.seed, stream_id=8).generator()
    M = draw(args.n, args.samples, gen)
    N = size_of(args.n)
    res = float(np.abs(np.swapaxes(M, 1, 2).conj() @ M - np.eye(N)).max())
    rec = {"group": args.group, "n": args.n, "matrix_size": N, "samples": args.samples, "unitarity_residual": res}
    if args.group == "SU":
        rec["det_residual"] = float(np.abs(np.linalg.det(M) - 1).max())
    if args.group == "USp":
        J = sampling.symplectic_form(args.n)
        rec["symplectic_residual"] = float(np.abs(np.swapaxes(M, 1, 2) @ J @ M - J).max())
    x = np.abs(M[:, 0, 0]) ** 2
    a, b = (0.5, (N - 1) / 2) if args.group == "O" else (1.0, N - 1)
    if N > 1:
        rec["ks_beta"] = f"Beta({a:g},{b:g})"
        rec["ks_pvalue"] = float(sps.kstest(x, sps.beta(a, b).cdf).pvalue)
    worst = max(v for k, v in rec.items() if k.endswith("residual"))
    return [rec], worst < suite.HAAR_RESIDUAL_TOL


def _report_rows(report):
    return [{k: v for k, v in r.items() if k != "seed"} | {"flags": ";".join(report.flags)}
            for r in report.records()]


def cmd_cpn(args):
    label = "cpn" if args.route == "inverse-cdf" else "cpn-haar"
    report = concentration.concentration_sweep(label, args.n, args.eps, args.trials,
                                               RandomStream(args.seed, stream_id=4))
    if args.plot_data:
        emit_plot_data(report, args.plot_data)
    rows = _report_rows(report)
    ok = all(e.exact_mass is None or abs(e.mc_mass - e.exact_mass) <= e.mc_halfwidth for e in report.entries)
    if len(report.n_values()) >= 3:
        trend = concentration.levy_trend(report)
        for r in rows:
            r["levy_trend"] = trend[r["epsilon"]]
    return rows, ok


def cmd_circle(args):
    rows = []
    if args.family == "y":
        for n in args.n:
            rows.append({"family": "Y", "n": n, "diameter": examples.yn_diameter(n),
                         "epsilon": args.eps, "tube_is_whole_space": examples.yn_tube_is_whole_space(n, args.eps)})
        return rows, True
    ok = True
    for n in args.n:
        norm = examples.zn_normalization(n)
        ok = ok and abs(norm - 1) <= suite.ZN_NORM_TOL
        rows.append({"family": "Z", "n": n, "normalization": norm, "delta": args.delta,
                     "mass_outside": examples.zn_mass_outside(n, args.delta)})
    return rows, ok


def _preset_action(args):
    p = args.preset
    if p == "trivial":
        return examples.ActionSpec("SO", 3, "circle", 2, mode="trivial"), np.array([1.0, 0.0]), None
    if p == "rotation":
        return examples.ActionSpec("SO", 2, "circle", 2), np.array([1.0, 0.0]), args.arc / (2 * math.pi)
    if p == "axis-through":
        return (examples.ActionSpec("SO", 2, "sphere", 3, mode="axis", axis=(0.0, 0.0, 1.0)),
                np.array([0.0, 0.0, 1.0]), None)
    if p == "axis-off":
        return (examples.ActionSpec("SO", 2, "sphere", 3, mode="axis", axis=(0.0, 0.0, 1.0)),
                np.array([1.0, 0.0, 0.0]), None)
    raise UsageError(f"unknown preset {p!r}")


def cmd_action(args):
    if args.preset == "u1":
        if not args.weights or any(w == 0 for w in args.weights):
            raise UsageError("--weights must be nonzero integers")
        d = examples.u1_min_displacement(args.weights, args.theta_grid, args.sphere_samples,
                                         RandomStream(args.seed, stream_id=7))
        return [{"preset": "u1", "weights": ";".join(map(str, args.weights)), "theta_grid": args.theta_grid,
                 "sphere_samples": args.sphere_samples, "min_displacement": d}], d > 0
    action, x, exact = _preset_action(args)
    if action.space_dim == 2:
        target = examples.TargetSet.arc(-args.arc / 2, args.arc)
    else:
        target = examples.TargetSet.ball(x, args.radius)
    est = examples.induced_measure(action, x, target, args.trials, RandomStream(args.seed, stream_id=3))
    rec = {"preset": args.preset, "target": target.kind, "probability": est.probability,
           "halfwidth": est.halfwidth, "trials": est.trials, "exact": exact}
    ok = exact is None or abs(est.probability - exact) <= est.halfwidth
    if args.preset in ("trivial", "axis-through"):
        ok = ok and est.probability in (0.0, 1.0)
    return [rec], ok


def cmd_hilbert(args):
    rows, ok = [], True
    rng = RandomStream(args.seed, stream_id=6)
    for N in args.N:
        m = examples.hilbert_coordinate_moment(N, [1.0], args.trials, rng.substream(N))
        x = np.zeros(N)
        x[0] = 1.0
        est = examples.induced_measure(examples.ActionSpec("SO", N, "hilbert", N), x,
                                       examples.TargetSet.cylinder([1.0], args.eps, outside=True),
                                       args.trials, rng.substream(N + 1))
        z = abs(m.estimate - m.exact) / m.stderr if m.stderr > 0 else 0.0
        ok = ok and z <= suite.HILBERT_SIGMAS
        rows.append({"N": N, "moment": m.estimate, "moment_exact": m.exact, "stderr": m.stderr,
                     "epsilon": args.eps, "tail_prob": est.probability, "tail_halfwidth": est.halfwidth,
                     "chebyshev_bound": min(1.0, 1.0 / (N * args.eps ** 2)), "trials": args.trials})
    return rows, ok


def cmd_sobolev(args):
    rows, ok = [], True
    for n in args.n:
        pts = args.points or 20 * n
        w12, l2 = examples.sobolev_norms(n, pts)
        exact = 1 / math.sqrt(n * n + 1)
        ok = ok and abs(w12 - 1) <= suite.SOBOLEV_W12_TOL and abs(l2 - exact) <= suite.SOBOLEV_L2_TOL
        rows.append({"n": n, "points": pts, "w12_norm": w12, "l2_norm": l2, "l2_exact": exact})
    return rows, ok


def cmd_suite(args):
    wanted = args.criteria or sorted(suite.CHECKS)
    unknown = [c for c in wanted if c not in suite.CHECKS]
    if unknown:
        raise UsageError(f"unknown criteria {unknown}")
    rows, ok = [], True
    for res in suite.run_suite(args.seed, wanted):
        ok = ok and res.passed
        row = {"criterion": res.criterion, "name": res.name, "passed": res.passed, "metrics": res.metrics}
        if args.timing:
            row["runtime_ms"] = res.runtime_s * 1000
        rows.append(row)
    return rows, ok


COMMANDS = {
    "volume": cmd_volume, "ratio": cmd_ratio, "chi": cmd_chi, "haar-check": cmd_haar_check,
    "cpn": cmd_cpn, "circle": cmd_circle, "action": cmd_action, "hilbert": cmd_hilbert,
    "sobolev": cmd_sobolev, "suite": cmd_suite,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--out", type=Path)
    common.add_argument("--timing", action="store_true", help="add runtime_ms (breaks byte identity)")

    p = argparse.ArgumentParser(prog="lieconc", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    series = ("A", "B", "C", "D")

    s = sub.add_parser("volume", parents=[common], help="Macdonald vs closed-form volumes")
    s.add_argument("--series", choices=series, required=True)
    s.add_argument("--n-min", type=int, default=1)
    s.add_argument("--n-max", type=int, default=30)

    s = sub.add_parser("ratio", parents=[common], help="normalized volume ratios")
    s.add_argument("--series", choices=series, required=True)
    s.add_argument("--n", type=_ints, default=[50, 100, 200])

    s = sub.add_parser("chi", parents=[common], help="Killing coefficient by brute force")
    s.add_argument("--series", choices=series, required=True)
    s.add_argument("--n", type=int, required=True)

    s = sub.add_parser("haar-check", parents=[common], help="Haar sampler residuals and KS")
    s.add_argument("--group", choices=tuple(_HAAR), required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--samples", type=int, default=1000)

    s = sub.add_parser("cpn", parents=[common], help="CP^n band masses")
    s.add_argument("--n", type=_ints, default=[5, 20, 80])
    s.add_argument("--eps", type=_floats, default=[0.2])
    s.add_argument("--trials", type=int, default=100_000)
    s.add_argument("--route", choices=("inverse-cdf", "haar"), default="inverse-cdf")
    s.add_argument("--plot-data", type=Path)

    s = sub.add_parser("circle", parents=[common], help="circle families Y_n and Z_n")
    s.add_argument("--family", choices=("y", "z"), default="z")
    s.add_argument("--n", type=_ints, default=[5, 20, 80])
    s.add_argument("--delta", type=float, default=0.3)
    s.add_argument("--eps", type=float, default=1.0)

    s = sub.add_parser("action", parents=[common], help="pushforward measures of group actions")
    s.add_argument("--preset", choices=("trivial", "rotation", "axis-through", "axis-off", "u1"), required=True)
    s.add_argument("--arc", type=float, default=1.0)
    s.add_argument("--radius", type=float, default=0.5)
    s.add_argument("--trials", type=int, default=20_000)
    s.add_argument("--weights", type=_ints, default=[1, 2])
    s.add_argument("--theta-grid", type=int, default=64)
    s.add_argument("--sphere-samples", type=int, default=10_000)

    s = sub.add_parser("hilbert", parents=[common], help="SO(N) on truncated Hilbert balls")
    s.add_argument("--N", type=_ints, default=[10, 100, 10_000])
    s.add_argument("--trials", type=int, default=20_000)
    s.add_argument("--eps", type=float, default=0.1)

    s = sub.add_parser("sobolev", parents=[common], help="Sobolev norms of u_n")
    s.add_argument("--n", type=_ints, default=[1, 10, 100])
    s.add_argument("--points", type=int)

    s = sub.add_parser("suite", parents=[common], help="acceptance checks")
    s.add_argument("--criteria", type=_ints)
    return p


def run(argv=None) -> tuple[int, str]:
    parser = build_parser()
    args = parser.parse_args(argv)  # exits 2 on bad flags
    try:
        rows, ok = COMMANDS[args.command](args)
    except (UsageError, ValueError) as exc:
        print(f"lieconc {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE, ""
    records = [{"command": args.command, **r, "seed": args.seed, "version": __version__} for r in rows]
    text = render(records, args.format)
    if args.out:
        write_atomic(args.out, text)
    else:
        sys.stdout.write(text)
    return (EXIT_OK if ok else EXIT_FAIL), text


def main(argv=None) -> int:
    return run(argv)[0]


if __name__ == "__main__":
    raise SystemExit(main())
