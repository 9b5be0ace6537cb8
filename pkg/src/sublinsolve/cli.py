"""Command-line harness: instance generation, solve/sample/exact runs,
sketch verification, and sublinearity sweeps.

Exit codes: 0 success, 1 requested check failed, 2 I/O error, 3 bad
configuration.  All randomness flows from --seed through named streams, so
identical flags reproduce byte-identical CSV output (reports still carry
wall times, which are excluded from determinism guarantees).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import fileio, oracle, solver
from .errors import SublinsolveError, ZeroSolution
from .generate import InstanceSpec, generate_instance, generate_psd_instance
from .estimators import ArrayQueryAccess
from .matrix import SampledMatrix
from .oracle import DENSE_CAP
from .rng import named_stream
from .sketch import paper_sketch_size, suggest_sketch_size, subsample, verify_sketch
from .vector import SampledVector

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_IO = 2
EXIT_CONFIG = 3

CSV_HEADER = "n,p,k,kappa,entry_queries,samples,err_max,tv"
CSV_SCHEMA_VERSION = 1


def _fmt_metric(x: float | None) -> str:
    if x is None or (isinstance(x, float) and np.isnan(x)):
        return "nan"
    return format(float(x), ".9g")


def _emit(report: dict, out: str | None) -> None:
    if out:
        fileio.write_json(report, out)
    else:
        fileio.write_json(report, sys.stdout)


def _load_inputs(args, with_transpose: bool = False):
    a = fileio.load_matrix(args.matrix, with_transpose=with_transpose)
    b = fileio.load_vector(args.vector)
    if b.n != a.m:
        raise ValueError(f"vector length {b.n} does not match matrix rows {a.m}")
    return a, b


def _solver_config(args, a: SampledMatrix) -> solver.SolverConfig:
    p = args.p if args.p is not None else suggest_sketch_size(args.k, a.m, a.n)
    return solver.SolverConfig(
        k=args.k,
        p=p,
        epsilon=args.epsilon,
        delta=args.delta,
        estimator_groups=args.groups,
        estimator_group_size=args.group_size,
        tau_b=args.tau_b,
        seed=args.seed,
    )


def cmd_gen(args) -> int:
    spec = InstanceSpec(
        m=args.m,
        n=args.n,
        k=args.k,
        kappa=args.kappa,
        profile=args.profile,
        b_mode=args.b_mode,
        mix_c=args.mix_c,
        seed=args.seed,
        complex_field=not args.real,
    )
    inst = generate_psd_instance(spec) if args.psd else generate_instance(spec)
    prefix = args.out_prefix
    fileio.save_matrix(inst.a, prefix + ".mat")
    fileio.save_vector(inst.b, prefix + ".vec")
    meta = inst.metadata()
    meta["matrix_file"] = prefix + ".mat"
    meta["vector_file"] = prefix + ".vec"
    fileio.write_json(meta, prefix + ".json")
    print(f"wrote {prefix}.mat {prefix}.vec {prefix}.json")
    return EXIT_OK


def _oracle_enabled(args, a: SampledMatrix) -> bool:
    if args.no_oracle:
        return False
    return max(a.m, a.n) <= DENSE_CAP


def cmd_query(args) -> int:
    a, b = _load_inputs(args, with_transpose=args.with_transpose)
    cfg = _solver_config(args, a)
    if args.paper_p:
        sigma = np.linalg.svd(a.to_dense(), compute_uv=False) if _oracle_enabled(args, a) else None
        kappa = float(sigma[0] / sigma[cfg.k - 1]) if sigma is not None else float("nan")
        fro = float(np.sqrt(a.frobenius_sq()))
        print(f"worst-case sketch size: {paper_sketch_size(cfg.k, kappa, cfg.epsilon, fro):.3e}")
    t0 = time.perf_counter()
    state = solver.prepare(a, b, cfg)
    value = solver.query_entry(state, a, args.j)
    wall = time.perf_counter() - t0
    report = {
        "mode": "query",
        "j": args.j,
        "value": [value.real, value.imag],
        "config": {"k": cfg.k, "p": cfg.p, "epsilon": cfg.epsilon,
                   "delta": cfg.delta, "seed": cfg.seed},
        "sigma_hat": [float(s) for s in state.description.sigma_hat],
        "w": [[z.real, z.imag] for z in state.w],
        "w_prime": [[z.real, z.imag] for z in state.w_prime],
        "ledger": a.ledger.snapshot(),
        "b_ledger": b.ledger.snapshot(),
        "wall_s": wall,
        "timings": state.timings,
    }
    passed = True
    if _oracle_enabled(args, a):
        exact = oracle.pinv_solve(a.to_dense(), b.to_array())
        err = abs(value - exact[args.j])
        scale = float(np.abs(exact).max())
        report["oracle_value"] = [exact[args.j].real, exact[args.j].imag]
        report["abs_err"] = err
        report["rel_inf_err"] = err / scale if scale > 0 else err
        passed = report["rel_inf_err"] <= args.check_tol
        report["check_passed"] = bool(passed)
    _emit(report, args.out)
    return EXIT_OK if passed else EXIT_CHECK_FAILED


def cmd_sample(args) -> int:
    a, b = _load_inputs(args, with_transpose=args.with_transpose)
    cfg = _solver_config(args, a)
    state = solver.prepare(a, b, cfg)
    overlap = solver.sample_gate(state, a, b)
    rng = named_stream(cfg.seed, "rejection")
    idx = solver.sample_solutions(state, a, rng, args.draws)
    report = {
        "mode": "sample",
        "draws": args.draws,
        "indices": [int(i) for i in idx[: min(args.draws, 1000)]],
        "overlap": overlap,
        "config": {"k": cfg.k, "p": cfg.p, "epsilon": cfg.epsilon,
                   "delta": cfg.delta, "tau_b": cfg.tau_b, "seed": cfg.seed},
        "ledger": a.ledger.snapshot(),
    }
    passed = True
    if _oracle_enabled(args, a):
        exact = oracle.pinv_solve(a.to_dense(), b.to_array())
        tv = oracle.exact_tv(
            oracle.empirical_distribution(idx, a.n), oracle.exact_distribution(exact)
        )
        threshold = args.check_tol + 3.0 * np.sqrt(a.n / args.draws)
        report["tv"] = tv
        report["tv_threshold"] = threshold
        passed = tv <= threshold
        report["check_passed"] = bool(passed)
    _emit(report, args.out)
    return EXIT_OK if passed else EXIT_CHECK_FAILED


def cmd_psd(args) -> int:
    a = fileio.load_matrix(args.matrix, with_transpose=args.with_transpose)
    b_arr = fileio.load_vector_array(args.vector)
    if b_arr.size != a.m:
        raise ValueError(f"vector length {b_arr.size} does not match matrix rows {a.m}")
    cfg = _solver_config(args, a)
    b_access = ArrayQueryAccess(b_arr, ledger=a.ledger)
    state = solver.prepare_psd(a, b_access, cfg)
    report = {
        "mode": f"psd-{args.mode}",
        "config": {"k": cfg.k, "p": cfg.p, "epsilon": cfg.epsilon,
                   "delta": cfg.delta, "seed": cfg.seed},
        "sigma_hat": [float(s) for s in state.description.sigma_hat],
        "ledger": a.ledger.snapshot(),
    }
    passed = True
    if args.mode == "query":
        value = solver.query_entry(state, a, args.j)
        report["j"] = args.j
        report["value"] = [value.real, value.imag]
        if _oracle_enabled(args, a):
            exact = oracle.pinv_solve(a.to_dense(), b_arr)
            scale = float(np.abs(exact).max())
            err = abs(value - exact[args.j])
            report["rel_inf_err"] = err / scale if scale > 0 else err
            passed = report["rel_inf_err"] <= args.check_tol
            report["check_passed"] = bool(passed)
    else:
        rng = named_stream(cfg.seed, "rejection")
        idx = solver.sample_solutions(state, a, rng, args.draws)
        report["indices"] = [int(i) for i in idx[: min(args.draws, 1000)]]
    _emit(report, args.out)
    return EXIT_OK if passed else EXIT_CHECK_FAILED


def cmd_exact(args) -> int:
    a = fileio.load_matrix_dense(args.matrix)
    b = fileio.load_vector_array(args.vector)
    x = oracle.pinv_solve(a, b)
    report = {"mode": "exact", "n": int(x.size)}
    if args.j is not None:
        report["j"] = args.j
        report["value"] = [x[args.j].real, x[args.j].imag]
    else:
        report["solution"] = [[z.real, z.imag] for z in x]
    _emit(report, args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    a = fileio.load_matrix(args.matrix)
    p = args.p if args.p is not None else suggest_sketch_size(args.k, a.m, a.n)
    rng = named_stream(args.seed, "rows")
    col_rng = named_stream(args.seed, "cols")
    d = subsample(a, args.k, p, rng, col_rng=col_rng, seed=args.seed)
    rep = verify_sketch(d, a)
    checks = {
        "s_fro_ratio_in_band": 0.5 <= rep.s_fro_ratio**2 <= 1.5,
        "w_fro_ratio_in_band": 0.5 <= rep.w_fro_ratio**2 <= 1.5,
        "sigma_k_positive": rep.sigma_k_w > 0.0,
        "finite_panel": all(
            np.isfinite(v) for v in (rep.ata_sts_err, rep.sst_wwt_err,
                                     rep.ata_ahat2_err, rep.inv_ahat_m2_err,
                                     rep.v_gram_err)
        ),
    }
    if max(a.m, a.n) <= DENSE_CAP:
        sigma = np.linalg.svd(a.to_dense(), compute_uv=False)
        checks["sigma1_w_bounded"] = rep.sigma_1_w <= 2.0 * float(sigma[0]) * 1.5
    report = {"mode": "verify", "p": p, "k": args.k, "panel": rep.as_dict(),
              "checks": checks}
    passed = all(checks.values())
    report["check_passed"] = bool(passed)
    _emit(report, args.out)
    return EXIT_OK if passed else EXIT_CHECK_FAILED


def _sweep_cell(n: int, args) -> dict:
    spec = InstanceSpec(m=args.m, n=n, k=args.k, kappa=args.kappa,
                        profile=args.profile, b_mode="in-range", seed=args.seed)
    inst = generate_instance(spec)
    a = SampledMatrix.from_dense(inst.a)
    b = SampledVector(inst.b, ledger=a.ledger)
    p = args.p if args.p is not None else suggest_sketch_size(args.k, args.m, n)
    cfg = solver.SolverConfig(
        k=args.k, p=p, epsilon=args.epsilon, delta=args.delta,
        estimator_groups=args.groups, estimator_group_size=args.group_size,
        seed=args.seed,
    )
    state = solver.prepare(a, b, cfg)
    query_rng = named_stream(args.seed, f"sweep-queries-{n}")
    js = query_rng.integers(0, n, size=args.queries)
    values = solver.query_entries(state, a, js)
    err_max = float("nan")
    tv = float("nan")
    if not args.no_oracle and max(args.m, n) <= DENSE_CAP:
        exact = oracle.pinv_solve(inst.a, inst.b)
        scale = float(np.abs(exact).max())
        err_max = float(np.abs(values - exact[js]).max() / scale)
    return {
        "n": n,
        "p": p,
        "k": args.k,
        "kappa": args.kappa,
        "entry_queries": a.ledger.entry_queries,
        "samples": a.ledger.samples,
        "total": a.ledger.total,
        "err_max": err_max,
        "tv": tv,
    }


def cmd_sweep(args) -> int:
    sizes = [int(x) for x in args.n.split(",")]
    workers = int(os.environ.get("SOLVE_THREADS", "0")) or min(4, len(sizes))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda n: _sweep_cell(n, args), sizes))
    else:
        rows = [_sweep_cell(n, args) for n in sizes]
    rows.sort(key=lambda r: r["n"])

    lines = [CSV_HEADER]
    for r in rows:
        lines.append(
            f"{r['n']},{r['p']},{r['k']},{_fmt_metric(r['kappa'])},"
            f"{r['entry_queries']},{r['samples']},"
            f"{_fmt_metric(r['err_max'])},{_fmt_metric(r['tv'])}"
        )
    csv_text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(csv_text)
    else:
        sys.stdout.write(csv_text)

    passed = True
    if len(rows) >= 2:
        base = rows[0]["total"]
        worst = max(r["total"] / base for r in rows[1:])
        passed = worst <= args.growth_cap
        sys.stderr.write(
            f"query growth x{worst:.3f} over n x{rows[-1]['n'] / rows[0]['n']:.0f} "
            f"({'pass' if passed else 'FAIL'}, cap {args.growth_cap})\n"
        )
    return EXIT_OK if passed else EXIT_CHECK_FAILED


def _add_common_solver_flags(sp) -> None:
    sp.add_argument("--matrix", required=True, help="matrix file (MAT format)")
    sp.add_argument("--vector", required=True, help="vector file (VEC format)")
    sp.add_argument("--k", type=int, required=True, help="target rank")
    sp.add_argument("--p", type=int, default=None, help="sketch size (default: heuristic)")
    sp.add_argument("--epsilon", type=float, default=0.05)
    sp.add_argument("--delta", type=float, default=0.1)
    sp.add_argument("--groups", type=int, default=None, help="median-of-means group count")
    sp.add_argument("--group-size", type=int, default=None, help="samples per group")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--tau-b", type=float, default=0.1, dest="tau_b")
    sp.add_argument("--out", default=None, help="write the JSON report here")
    sp.add_argument("--with-transpose", action="store_true")
    sp.add_argument("--paper-p", action="store_true",
                    help="also print the worst-case sketch size formula value")
    sp.add_argument("--no-oracle", action="store_true",
                    help="skip dense oracle comparisons")
    sp.add_argument("--check-tol", type=float, default=0.05,
                    help="oracle comparison tolerance")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="sublinsolve",
        description="Sublinear low-rank linear system solver and harness",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a synthetic instance")
    g.add_argument("--m", type=int, required=True)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--k", type=int, required=True)
    g.add_argument("--kappa", type=float, default=1.0)
    g.add_argument("--profile", choices=("linear", "geometric"), default="linear")
    g.add_argument("--b-mode", choices=("in-range", "mixed", "orthogonal"),
                   default="in-range", dest="b_mode")
    g.add_argument("--mix-c", type=float, default=0.5, dest="mix_c")
    g.add_argument("--psd", action="store_true", help="Hermitian PSD instance")
    g.add_argument("--real", action="store_true", help="real-valued instance")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out-prefix", required=True)
    g.set_defaults(func=cmd_gen)

    q = sub.add_parser("query", help="approximate one entry of the solution")
    _add_common_solver_flags(q)
    q.add_argument("--j", type=int, required=True)
    q.set_defaults(func=cmd_query)

    s = sub.add_parser("sample", help="sample indices from the solution law")
    _add_common_solver_flags(s)
    s.add_argument("--draws", type=int, default=1)
    s.set_defaults(func=cmd_sample)

    p = sub.add_parser("psd", help="PSD variant with query-only b")
    _add_common_solver_flags(p)
    p.add_argument("--mode", choices=("query", "sample"), default="query")
    p.add_argument("--j", type=int, default=0)
    p.add_argument("--draws", type=int, default=1)
    p.set_defaults(func=cmd_psd)

    e = sub.add_parser("exact", help="dense oracle solve")
    e.add_argument("--matrix", required=True)
    e.add_argument("--vector", required=True)
    e.add_argument("--j", type=int, default=None)
    e.add_argument("--out", default=None)
    e.set_defaults(func=cmd_exact)

    v = sub.add_parser("verify", help="dense sketch verification panel")
    v.add_argument("--matrix", required=True)
    v.add_argument("--k", type=int, required=True)
    v.add_argument("--p", type=int, default=None)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--out", default=None)
    v.set_defaults(func=cmd_verify)

    w = sub.add_parser("sweep", help="query-count growth table across n")
    w.add_argument("--n", required=True, help="comma-separated sizes, e.g. 1000,10000")
    w.add_argument("--m", type=int, default=300)
    w.add_argument("--k", type=int, default=3)
    w.add_argument("--kappa", type=float, default=5.0)
    w.add_argument("--profile", choices=("linear", "geometric"), default="linear")
    w.add_argument("--p", type=int, default=None)
    w.add_argument("--epsilon", type=float, default=0.05)
    w.add_argument("--delta", type=float, default=0.1)
    w.add_argument("--groups", type=int, default=None)
    w.add_argument("--group-size", type=int, default=2000)
    w.add_argument("--queries", type=int, default=10)
    w.add_argument("--growth-cap", type=float, default=3.0)
    w.add_argument("--seed", type=int, default=0)
    w.add_argument("--no-oracle", action="store_true")
    w.add_argument("--out", default=None)
    w.set_defaults(func=cmd_sweep)

    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except (OSError, json.JSONDecodeError, fileio.FormatError) as exc:
        sys.stderr.write(f"I/O error: {exc}\n")
        return EXIT_IO
    except ZeroSolution as exc:
        sys.stderr.write(f"check failed: {exc}\n")
        return EXIT_CHECK_FAILED
    except ValueError as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return EXIT_CONFIG
    except SublinsolveError as exc:
        sys.stderr.write(f"check failed: {exc}\n")
        return EXIT_CHECK_FAILED


if __name__ == "__main__":
    sys.exit(main())
