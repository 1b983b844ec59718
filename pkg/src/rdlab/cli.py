"""Experiment runner CLI.

Subcommands: analyze (closed-form security sweeps), simulate (one
cycle-level run), sweep (grid of runs fanning out over a worker pool),
report (bundle manifest for the plotting frontend), explain-config.

Exit codes: 0 ok, 2 configuration error, 3 security violation detected in
a configuration claimed secure.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from concurrent.futures import ProcessPoolExecutor, as_completed
from pathlib import Path

from . import analytic
from .attacks import Trace, gen_mix, gen_perf_attack, gen_synthetic, load_trace
from .config import RunConfig, build_sim_config, load_config
from .controller import alone_ipcs, simulate
from .mapping import AddressMapper
from .metrics import max_slowdown, weighted_speedup
from .mitigations import storage_model
from .timing import ConfigError, make_timing

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INSECURE = 3

SWEEP_NRH_DEFAULT = (1000, 512, 256, 128, 64, 32, 20)


def _write_csv(path: Path, rows: list[dict]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    if not rows:
        path.write_text("")
        return
    keys: list[str] = []
    for row in rows:
        for k in row:
            if k not in keys:
                keys.append(k)
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=keys)
        writer.writeheader()
        writer.writerows(rows)


# ---------------------------------------------------------------------------
# analyze

def cmd_analyze(args) -> int:
    timing_prac = make_timing(True)
    timing_base = make_timing(False)
    rows: list[dict] = []
    mechs = [args.mech] if args.mech != "all" else ["prfm", "prac", "chronus"]
    r1_max = args.r1_max
    if "prfm" in mechs:
        th_values = args.rfmth or [1, 2, 3, 4, 8, 16, 32, 64]
        rows += analytic.sweep_prfm(timing_base, th_values, r1_max)
    if "prac" in mechs:
        ab_values = args.aboth or [1, 2, 4, 8, 16, 32, 64]
        nbor_values = [args.nbor] if args.nbor else [1, 2, 4]
        rows += analytic.sweep_prac(timing_prac, ab_values, nbor_values,
                                    r1_max, inflight=args.inflight)
    if "chronus" in mechs:
        rows += analytic.sweep_chronus(timing_base)
    # internal consistency: every row's secure_min_nrh must admit a config
    for row in rows:
        if row["max_hammer"] < 1:
            print(f"internal inconsistency: {row}", file=sys.stderr)
            return EXIT_CONFIG
    if args.out:
        _write_csv(Path(args.out), rows)
        print(f"wrote {len(rows)} rows to {args.out}")
    else:
        writer = csv.DictWriter(sys.stdout, fieldnames=sorted(
            {k for row in rows for k in row}))
        writer.writeheader()
        for row in rows:
            writer.writerow(row)
    return EXIT_OK


# ---------------------------------------------------------------------------
# simulate

def _load_workload(run: RunConfig, sim_config) -> list[Trace]:
    wl = run.values["workload"]
    capacity = sim_config.geometry.capacity_bytes
    kind = wl["kind"]
    if kind == "traces":
        if not wl["traces"]:
            raise ConfigError("workload.kind=traces requires workload.traces")
        return [load_trace(p) for p in wl["traces"]]
    if kind == "synthetic":
        return [gen_synthetic(wl["intensity"], wl["length"], wl["seed"],
                              capacity)]
    if kind == "mix":
        return gen_mix(wl["mix"], wl["length"], wl["seed"], capacity)
    if kind == "perf-attack":
        mapper = AddressMapper(sim_config.geometry, sim_config.mapping)
        attacker = gen_perf_attack(mapper, wl["attack_rows"],
                                   wl["attack_banks"])
        benign = gen_mix(wl["mix"], wl["length"], wl["seed"], capacity)[:3]
        return [attacker] + benign
    raise ConfigError(f"unknown workload kind {kind!r}")


def cmd_simulate(args) -> int:
    run = load_config(args.config, _flag_overrides(args))
    sim_config = build_sim_config(run)
    traces = _load_workload(run, sim_config)
    result = simulate(sim_config, traces)
    n_rh = run.values["mitigation"]["n_rh"]
    payload = result.to_json(n_rh=n_rh)
    text = json.dumps(payload, indent=2, sort_keys=True)
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(text + "\n")
    else:
        print(text)
    if getattr(args, "dump_device", None):
        Path(args.dump_device).write_text(result.device.dump_state() + "\n")
    claimed_secure = run.values["mitigation"]["secure"] and \
        run.values["mitigation"]["mechanism"] != "none"
    if claimed_secure and payload["oracle"]["violations"]:
        print("security violation under a configuration claimed secure",
              file=sys.stderr)
        return EXIT_INSECURE
    return EXIT_OK


def _flag_overrides(args) -> dict:
    out: dict = {}
    if getattr(args, "mechanism", None):
        out.setdefault("mitigation", {})["mechanism"] = args.mechanism
    if getattr(args, "nrh", None):
        out.setdefault("mitigation", {})["n_rh"] = args.nrh
    if getattr(args, "seed", None) is not None:
        out["seed"] = args.seed
    if getattr(args, "instructions", None):
        out["instructions_per_core"] = args.instructions
    if getattr(args, "no_cache", False):
        out["use_cache"] = False
    if getattr(args, "mix", None):
        out.setdefault("workload", {})["kind"] = "mix"
        out["workload"]["mix"] = args.mix
    return out


# ---------------------------------------------------------------------------
# sweep

def _sweep_cell(payload: dict) -> dict:
    """Worker: one (mechanism, n_rh, workload) cell."""
    run = load_config(payload.get("config_path"), payload["overrides"])
    sim_config = build_sim_config(run)
    traces = _load_workload(run, sim_config)
    shared = simulate(sim_config, traces)
    alone = alone_ipcs(sim_config, traces)
    ws = weighted_speedup(shared.ipcs(), alone)
    slow = max_slowdown(shared.ipcs(), alone)
    n_rh = run.values["mitigation"]["n_rh"]
    oracle = shared.oracle(n_rh)
    return {
        "mechanism": run.values["mitigation"]["mechanism"],
        "n_rh": n_rh,
        "workload": run.values["workload"]["mix"],
        "seed": run.values["seed"],
        "weighted_speedup": round(ws, 6),
        "max_slowdown": round(slow, 6),
        "energy_total": round(shared.energy["total"], 3),
        "energy_act": round(shared.energy["act_pre"], 3),
        "rfm_count": shared.rfm_count,
        "backoff_count": shared.backoff_count,
        "rbmpki": round(shared.rbmpki, 3),
        "max_exposure": oracle.max_exposure,
        "violations": oracle.violations,
    }


def cmd_sweep(args) -> int:
    mechs = args.mechanisms.split(",")
    nrhs = [int(x) for x in args.nrh.split(",")] if args.nrh else list(SWEEP_NRH_DEFAULT)
    cells = []
    for mech in mechs:
        for n_rh in nrhs:
            overrides = {
                "mitigation": {"mechanism": mech, "n_rh": n_rh},
                "workload": {"kind": "mix", "mix": args.mix},
                "instructions_per_core": args.instructions,
                "seed": args.seed,
            }
            cells.append({"config_path": args.config, "overrides": overrides})
    rows = []
    failures = []
    if args.workers > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            futures = {pool.submit(_sweep_cell, c): c for c in cells}
            for fut in as_completed(futures):
                cell = futures[fut]
                try:
                    rows.append(fut.result())
                except Exception as exc:  # partial-failure report
                    failures.append((cell["overrides"], repr(exc)))
    else:
        for cell in cells:
            try:
                rows.append(_sweep_cell(cell))
            except Exception as exc:
                failures.append((cell["overrides"], repr(exc)))
    rows.sort(key=lambda r: (r["mechanism"], -r["n_rh"], r["workload"]))
    out = Path(args.out)
    _write_csv(out, rows)
    print(f"wrote {len(rows)} rows to {out}")
    if failures:
        print("failed cells:", file=sys.stderr)
        for overrides, err in failures:
            print(f"  {overrides}: {err}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


# ---------------------------------------------------------------------------
# report (bundle manifest for the plotting frontend)

KIND_BY_STEM = {
    "security_prfm": "security_sweep",
    "security_prac": "security_sweep",
    "security_chronus": "security_sweep",
    "analyze": "security_sweep",
    "perf": "perf_by_nrh",
    "energy": "perf_by_nrh",
    "storage": "storage_by_nrh",
    "dbc": "dbc",
}


def cmd_report(args) -> int:
    bundle = Path(args.bundle)
    bundle.mkdir(parents=True, exist_ok=True)
    if args.with_storage:
        rows = []
        from .device import DeviceGeometry
        geometry = DeviceGeometry(rows_per_bank=131072)
        for mech in ("chronus", "prac", "prfm", "graphene", "hydra", "para",
                     "abacus"):
            for n_rh in SWEEP_NRH_DEFAULT:
                s = storage_model(mech, n_rh, geometry)
                rows.append({"mechanism": mech, "n_rh": n_rh,
                             "cpu_bytes": s["cpu_bytes"],
                             "dram_bytes": s["dram_bytes"]})
        _write_csv(bundle / "storage.csv", rows)
    sweeps = []
    for path in sorted(bundle.glob("*.csv")):
        stem = path.stem
        kind = KIND_BY_STEM.get(stem)
        if kind is None:
            kind = next((v for k, v in KIND_BY_STEM.items()
                         if stem.startswith(k)), "table")
        sweeps.append({"name": stem, "csv": path.name, "kind": kind})
    manifest = {"schema_version": 1, "sweeps": sweeps}
    (bundle / "manifest.json").write_text(json.dumps(manifest, indent=2,
                                                     sort_keys=True) + "\n")
    print(f"manifest with {len(sweeps)} sweeps at {bundle / 'manifest.json'}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# explain-config

def cmd_explain(args) -> int:
    run = load_config(args.config, _flag_overrides(args))
    for dotted, value, source in run.explain():
        print(f"{dotted:42s} = {value!r:24} [{source}]")
    return EXIT_OK


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rdlab",
                                description="DRAM read-disturbance laboratory")
    sub = p.add_subparsers(dest="command", required=True)

    pa = sub.add_parser("analyze", help="closed-form security sweeps")
    pa.add_argument("--mech", default="all",
                    choices=["all", "prfm", "prac", "chronus"])
    pa.add_argument("--nbor", type=int, default=None,
                    help="refreshes per back-off (with --mech prac)")
    pa.add_argument("--aboth", type=int, nargs="*", default=None)
    pa.add_argument("--rfmth", type=int, nargs="*", default=None)
    pa.add_argument("--r1-max", type=int, default=analytic.DEFAULT_R1_MAX)
    pa.add_argument("--inflight", action="store_true",
                    help="count in-recovery activations toward the maximum")
    pa.add_argument("--out", default=None)
    pa.set_defaults(func=cmd_analyze)

    ps = sub.add_parser("simulate", help="one cycle-level run")
    ps.add_argument("--config", default=None)
    ps.add_argument("--mechanism", default=None)
    ps.add_argument("--nrh", type=int, default=None)
    ps.add_argument("--seed", type=int, default=None)
    ps.add_argument("--instructions", type=int, default=None)
    ps.add_argument("--mix", default=None)
    ps.add_argument("--no-cache", action="store_true",
                    help="interpret traces as cache-miss streams")
    ps.add_argument("--out", default=None)
    ps.add_argument("--dump-device", default=None, metavar="PATH",
                    help="write the final counter store and tracking table "
                         "as JSON (test fixtures)")
    ps.set_defaults(func=cmd_simulate)

    pw = sub.add_parser("sweep", help="grid of simulations")
    pw.add_argument("--config", default=None)
    pw.add_argument("--mechanisms", default="none,prac,chronus")
    pw.add_argument("--nrh", default=None,
                    help="comma-separated list, default 1000..20")
    pw.add_argument("--mix", default="HHHH")
    pw.add_argument("--instructions", type=int, default=1_000_000)
    pw.add_argument("--seed", type=int, default=0)
    pw.add_argument("--workers", type=int, default=1)
    pw.add_argument("--out", required=True)
    pw.set_defaults(func=cmd_sweep)

    pr = sub.add_parser("report", help="write the bundle manifest")
    pr.add_argument("--bundle", required=True)
    pr.add_argument("--with-storage", action="store_true",
                    help="also emit the storage-by-threshold table")
    pr.set_defaults(func=cmd_report)

    pe = sub.add_parser("explain-config", help="effective config with provenance")
    pe.add_argument("--config", default=None)
    pe.add_argument("--mechanism", default=None)
    pe.add_argument("--nrh", type=int, default=None)
    pe.add_argument("--seed", type=int, default=None)
    pe.add_argument("--instructions", type=int, default=None)
    pe.set_defaults(func=cmd_explain)

    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    raise SystemExit(main())
