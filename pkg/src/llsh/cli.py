"""Command-line interface: reproducible experiments and artifact emission.

Every artifact embeds the full effective configuration, the seed, and the
package version; artifacts are byte-identical across re-runs with the
same seed and any worker count (wall-clock timings go to stderr only).
Exit codes: 0 success, 1 runtime failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time

import numpy as np

from . import __version__, analysis, ann, randlat
from . import lshcore
from .cvp import DkDecoder, E8Decoder, EnumDecoder, ZkDecoder
from .errors import InvalidArgumentError, LlshError
from .geometry import ball_radius_for_volume
from .lattice import (
    basis_dk,
    basis_e8,
    basis_zk,
    lattice_dk,
    lattice_e8,
    lattice_zk,
    load_lattice,
    save_basis,
)
from .stats import RandomStream

VERSION_STRING = f"llsh-{__version__}"


def _default_seed() -> int:
    return int(os.environ.get("LLSH_SEED", "0"))


def _write_json(path, payload: dict):
    payload = dict(payload)
    payload["version"] = VERSION_STRING
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


# Worker count is execution detail, never part of artifact bytes.
_OMIT_FROM_ARTIFACTS = ("func", "config", "workers")


def _effective_config(args: argparse.Namespace) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in _OMIT_FROM_ARTIFACTS}


def _sidecar(path, args: argparse.Namespace, command: str):
    _write_json(str(path) + ".run.json", {"command": command, "config": _effective_config(args)})


def _resolve_lattice(source: str, k: int, seed: int):
    """Resolve a lattice source spec {zk|dk|e8|gm[:p]|file:path} into
    (lattice, decoder, label)."""
    head, _, tail = source.partition(":")
    if head == "zk":
        return lattice_zk(k), ZkDecoder(k), f"zk:{k}"
    if head == "dk":
        return lattice_dk(k), DkDecoder(k), f"dk:{k}"
    if head == "e8":
        if k not in (0, 8):
            raise InvalidArgumentError("e8 requires k = 8")
        return lattice_e8(), E8Decoder(), "e8"
    if head == "gm":
        p = int(tail) if tail else randlat.DEFAULT_GM_PRIME
        params = randlat.GmParams(k=k, p=p, seed=seed)
        lat = randlat.sample_gm(params, RandomStream(seed).generator("cli-lattice"))
        return lat, EnumDecoder(lat), f"gm:{p}:k={k}:seed={seed}"
    if head == "file":
        lat = load_lattice(tail)
        return lat, EnumDecoder(lat), f"file:{tail}"
    raise InvalidArgumentError(f"unknown lattice source {source!r}")


def _parse_grid(args, k: int) -> np.ndarray:
    if args.deltas:
        grid = np.array([float(tok) for tok in args.deltas.split(",")])
    else:
        grid = np.geomspace(args.grid_min or 0.25 * k**0.25,
                            args.grid_max or 8.0 * k**0.25,
                            args.grid_points)
    return grid


# ---------------------------------------------------------------------------
# Commands

def cmd_sample_lattice(args) -> int:
    k = args.k
    if args.ensemble == "gm":
        p = args.p or randlat.DEFAULT_GM_PRIME
        params = randlat.GmParams(k=k, p=p, seed=args.seed)
        basis = randlat.gm_raw_basis(params, RandomStream(args.seed).generator("gm-file"))
    elif args.ensemble == "zk":
        basis = basis_zk(k)
    elif args.ensemble == "dk":
        basis = basis_dk(k)
    elif args.ensemble == "e8":
        basis = basis_e8()
    else:  # pragma: no cover - argparse choices guard this
        raise InvalidArgumentError(f"unknown ensemble {args.ensemble!r}")
    save_basis(basis, args.out)
    _sidecar(args.out, args, "sample-lattice")
    return 0


def cmd_collision(args) -> int:
    lat, decoder, label = _resolve_lattice(args.lattice, args.k, args.seed)
    grid = _parse_grid(args, lat.k)
    curve = lshcore.estimate_curve(
        lat, grid, args.trials, RandomStream(args.seed), decoder=decoder,
        workers=args.workers, lattice_id=label,
    )
    curve.to_csv(args.out)
    _sidecar(args.out, args, "collision")
    return 0


def cmd_rho(args) -> int:
    if args.oracle_zk:
        grid = _parse_grid(args, args.k)
        curve = lshcore.zk_collision_curve(args.k, grid)
        label = f"zk:{args.k}(oracle)"
    else:
        lat, decoder, label = _resolve_lattice(args.lattice, args.k, args.seed)
        grid = _parse_grid(args, lat.k)
        curve = lshcore.estimate_curve(
            lat, grid, args.trials, RandomStream(args.seed), decoder=decoder,
            workers=args.workers, lattice_id=label,
        )
    est = lshcore.estimate_rho(curve, args.c)
    _write_json(args.out, {
        "command": "rho",
        "config": {"lattice": label, "k": args.k, "c": args.c,
                   "trials": args.trials, "seed": args.seed,
                   "oracle_zk": args.oracle_zk},
        "curve": {
            "deltas": list(curve.deltas),
            "p_hat": list(curve.p_hat),
            "ci_half": list(curve.ci_half),
            "trials": curve.trials,
        },
        "rho": est.rho,
        "argmin_delta": est.argmin_delta,
    })
    return 0


def _verify_siegel(args) -> dict:
    params = randlat.GmParams(k=args.k, p=args.p or randlat.DEFAULT_GM_PRIME, seed=args.seed)
    lats = randlat.sample_gm_many(params, args.lattices)
    volumes = [float(tok) for tok in args.volumes.split(",")]
    rows = []
    passed = True
    for v in volumes:
        radius = ball_radius_for_volume(args.k, v)
        counts = np.array([randlat.count_points(lat, radius) for lat in lats])
        se = float(counts.std(ddof=1) / math.sqrt(len(counts)))
        ok = abs(float(counts.mean()) - v) <= 3.0 * se
        passed &= ok
        rows.append({"volume": v, "mean": float(counts.mean()), "se": se, "within_3se": bool(ok)})
    return {"check": "siegel", "k": args.k, "lattices": args.lattices,
            "rows": rows, "passed": bool(passed)}


def _verify_schmidt(args) -> dict:
    params = randlat.GmParams(k=args.k, p=args.p or randlat.DEFAULT_GM_PRIME, seed=args.seed)
    rk = ball_radius_for_volume(args.k, 1.0)
    rows = []
    passed = True
    for v in [float(tok) for tok in args.volumes.split(",")]:
        center = np.zeros(args.k)
        center[0] = 2.0 * rk
        region = randlat.Region.ball(center, ball_radius_for_volume(args.k, v))
        est = randlat.empty_probability(params, region, args.lattices, RandomStream(args.seed))
        target = math.exp(-v)
        ok = abs(est.p_hat - target) <= 0.02 + 3.0 * est.ci_half
        passed &= ok
        rows.append({"volume": v, "p_hat": est.p_hat, "ci_half": est.ci_half,
                     "target": target, "within": bool(ok)})
    return {"check": "schmidt", "k": args.k, "lattices": args.lattices,
            "rows": rows, "passed": bool(passed)}


def _verify_rogers(args) -> dict:
    params = randlat.GmParams(k=args.k, p=args.p or randlat.DEFAULT_GM_PRIME, seed=args.seed)
    frac = randlat.rogers_tail_fraction(
        params, args.lattices, args.trials, RandomStream(args.seed)
    )
    bound = 4.0 * math.exp(-args.k / 8.0)
    return {"check": "rogers", "k": args.k, "lattices": args.lattices,
            "samples_per_lattice": args.trials, "fraction": frac,
            "bound": bound, "passed": bool(frac <= bound)}


def _verify_sandwich(args) -> dict:
    params = randlat.GmParams(k=args.k, p=args.p or randlat.DEFAULT_GM_PRIME, seed=args.seed)
    lats = randlat.sample_gm_many(params, args.lattices)
    report = analysis.check_sandwich(lats, args.delta, args.trials,
                                     RandomStream(args.seed), workers=args.workers)
    return report.to_dict()


def _verify_schmidt_ap(args) -> dict:
    report = analysis.check_schmidt_ap(args.k, args.lattices, RandomStream(args.seed),
                                       n_pairs=args.pairs)
    return report.to_dict()


def _verify_exponents(args) -> dict:
    report = analysis.check_exponents(args.k, args.c)
    return report.to_dict()


_SUITES = {
    "siegel": _verify_siegel,
    "schmidt": _verify_schmidt,
    "rogers": _verify_rogers,
    "sandwich": _verify_sandwich,
    "schmidt-ap": _verify_schmidt_ap,
    "exponents": _verify_exponents,
}


def cmd_verify(args) -> int:
    payload = _SUITES[args.suite](args)
    payload["config"] = _effective_config(args)
    _write_json(args.out, payload)
    print(f"suite {args.suite}: {'PASS' if payload.get('passed') else 'FAIL'}")
    return 0 if payload.get("passed") else 1


def cmd_ann_bench(args) -> int:
    dataset = ann.gen_planted(args.n, args.d, args.c, args.queries, args.seed)
    lat, decoder, label = _resolve_lattice(args.lattice, args.k, args.seed)
    grid = lshcore.default_delta_grid(lat.k, args.c)
    curve = lshcore.estimate_curve(lat, grid, args.curve_trials, RandomStream(args.seed),
                                   decoder=decoder, workers=args.workers, lattice_id=label)
    rho_est = lshcore.estimate_rho(curve, args.c)
    delta_star = rho_est.argmin_delta
    p1 = float(curve.p_hat[np.argmin(np.abs(curve.deltas - delta_star))])
    log_p2 = lshcore.interp_log_p(curve, args.c * delta_star)
    p2 = math.exp(log_p2) if log_p2 is not None else None
    m, tables_plan, rho = ann.plan_params(args.n, args.c, p1, p2)
    # ceil() in m makes n^rho tables fall short of the target recall at
    # desk scale; size the table count from the measured per-table
    # collision probability p1^m instead (target miss rate 5%).
    tables = max(tables_plan, math.ceil(math.log(20.0) / (p1**m)))
    config = ann.AnnConfig(n=args.n, d=args.d, c=args.c, k=lat.k, m=m,
                           tables=tables, seed=args.seed)
    index = ann.build(config, dataset.points, lat, decoder, scale=delta_star / 1.0)
    t0 = time.perf_counter()
    results = [ann.query(index, q) for q in dataset.queries]
    query_seconds = time.perf_counter() - t0
    hits = 0
    too_far = 0
    rows = []
    for qid, found in enumerate(results):
        if found is None:
            rows.append((qid, -1, ""))
            continue
        dist = float(np.linalg.norm(dataset.points[found] - dataset.queries[qid]))
        if dist <= args.c * 1.0:
            hits += 1
        else:
            too_far += 1
        rows.append((qid, found, f"{dist:.17g}"))
    recall = hits / max(args.queries, 1)
    with open(f"{args.out}.csv", "w") as fh:
        fh.write("query_id,found_id,dist\n")
        for qid, fid, dist in rows:
            fh.write(f"{qid},{fid},{dist}\n")
    _write_json(f"{args.out}.json", {
        "command": "ann-bench",
        "config": _effective_config(args),
        "lattice": label,
        "plan": {"m": m, "tables": tables, "tables_from_plan": tables_plan,
                 "rho": rho, "p1": p1, "p2": p2, "delta_star": delta_star},
        "recall": recall,
        "returned_beyond_cr": too_far,
    })
    if args.save_data:
        ann.save_dataset(dataset.points, f"{args.out}.data.bin")
        ann.save_ground_truth(dataset.planted_ids, f"{args.out}.gt.csv")
    print(f"recall {recall:.3f} over {args.queries} queries, {tables} tables", file=sys.stderr)
    print(f"mean query time {query_seconds / max(args.queries, 1) * 1e3:.3f} ms", file=sys.stderr)
    return 0


# ---------------------------------------------------------------------------
# Parser

# Flags each command must end up with (from the command line or --config).
_REQUIRED = {
    "sample-lattice": ("k", "out"),
    "collision": ("k", "out"),
    "rho": ("k", "c", "out"),
    "verify": ("suite", "k", "out"),
    "ann-bench": ("out",),
}


def _build_parser():
    parser = argparse.ArgumentParser(prog="llsh", description=__doc__)
    parser.add_argument("--config", help="JSON file with flag defaults")
    sub = parser.add_subparsers(dest="command", required=True)
    sub_map = {}

    def common(p):
        p.add_argument("--seed", type=int, default=_default_seed())
        p.add_argument("--workers", type=int, default=1)
        p.add_argument("--out")

    p = sub_map["sample-lattice"] = sub.add_parser("sample-lattice", help="sample or emit a lattice basis file")
    p.add_argument("--k", type=int)
    p.add_argument("--ensemble", choices=["gm", "zk", "dk", "e8"], default="gm")
    p.add_argument("--p", type=int, default=0, help="ensemble modulus (gm)")
    common(p)
    p.set_defaults(func=cmd_sample_lattice)

    p = sub_map["collision"] = sub.add_parser("collision", help="estimate a collision curve, emit CSV")
    p.add_argument("--lattice", default="gm")
    p.add_argument("--k", type=int)
    p.add_argument("--deltas", help="comma-separated delta grid")
    p.add_argument("--grid-min", type=float)
    p.add_argument("--grid-max", type=float)
    p.add_argument("--grid-points", type=int, default=17)
    p.add_argument("--trials", type=int, default=170_000,
                   help="total trial budget shared across the grid")
    common(p)
    p.set_defaults(func=cmd_collision)

    p = sub_map["rho"] = sub.add_parser("rho", help="estimate the LSH exponent, emit JSON")
    p.add_argument("--lattice", default="gm")
    p.add_argument("--k", type=int)
    p.add_argument("--c", type=float)
    p.add_argument("--deltas")
    p.add_argument("--grid-min", type=float)
    p.add_argument("--grid-max", type=float)
    p.add_argument("--grid-points", type=int, default=17)
    p.add_argument("--trials", type=int, default=170_000)
    p.add_argument("--oracle-zk", action="store_true",
                   help="use the closed-form Z^k curve instead of sampling")
    common(p)
    p.set_defaults(func=cmd_rho)

    p = sub_map["verify"] = sub.add_parser("verify", help="run a verification suite, emit JSON report")
    p.add_argument("--suite", choices=sorted(_SUITES))
    p.add_argument("--k", type=int)
    p.add_argument("--p", type=int, default=0)
    p.add_argument("--lattices", type=int, default=2000)
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--pairs", type=int, default=50)
    p.add_argument("--delta", type=float, default=2.0)
    p.add_argument("--c", type=float, default=1.5)
    p.add_argument("--volumes", default="0.5,1,2,4")
    common(p)
    p.set_defaults(func=cmd_verify)

    p = sub_map["ann-bench"] = sub.add_parser("ann-bench", help="planted-dataset ANN benchmark, emit JSON + CSV")
    p.add_argument("--n", type=int, default=10_000)
    p.add_argument("--d", type=int, default=64)
    p.add_argument("--c", type=float, default=2.0)
    p.add_argument("--k", type=int, default=8)
    p.add_argument("--queries", type=int, default=200)
    p.add_argument("--lattice", default="e8")
    p.add_argument("--curve-trials", type=int, default=340_000)
    p.add_argument("--save-data", action="store_true")
    common(p)
    p.set_defaults(func=cmd_ann_bench)
    return parser, sub_map


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, sub_map = _build_parser()
    # --config supplies defaults; explicit flags override them.  Defaults
    # must land on the subparser: its own defaults would otherwise win.
    if "--config" in argv:
        with open(argv[argv.index("--config") + 1]) as fh:
            overrides = json.load(fh)
        command = next((tok for tok in argv if tok in sub_map), None)
        (sub_map[command] if command else parser).set_defaults(**overrides)
    args = parser.parse_args(argv)
    for name in _REQUIRED[args.command]:
        if getattr(args, name) is None:
            parser.error(f"{args.command}: --{name} is required")
    t0 = time.perf_counter()
    try:
        rc = args.func(args)
    except LlshError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"{args.command} completed in {time.perf_counter() - t0:.2f}s", file=sys.stderr)
    return rc


if __name__ == "__main__":
    sys.exit(main())
