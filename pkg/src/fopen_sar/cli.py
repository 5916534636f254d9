"""Command-line driver: simulate, image, metrics, compare.

Each command resolves a scenario (from --scenario PATH or --preset NAME,
optionally overridden by --waveform / --foliage / --seed), runs its stage,
writes artifacts under --out, and records a manifest with the resolved
configuration, seeds, output hashes and timings.

Exit codes: 0 success, 2 scenario/schema violation, 3 I/O failure,
4 raw-file/scenario mismatch, 5 no peak in the image.
"""

import argparse
import csv
import hashlib
import json
import os
import sys
import time

import numpy as np

from . import __version__
from .echo import (RawDataMatrix, foliage_channel, read_fsar, synthesize_raw,
                   write_fsar, write_raw_csv)
from .foliage import dump_realizations_csv
from .imaging import read_fimg, write_fimg, write_pgm, write_png
from .metrics import (NoPeakError, aggregate_reports, extract_profiles,
                      image_metrics)
from .scenario import (PRESETS, SchemaError, Scenario, focus_config,
                       load_scenario, preset_scenario, run_metrics,
                       tank_scenario)

EXIT_OK = 0
EXIT_SCHEMA = 2
EXIT_IO = 3
EXIT_MISMATCH = 4
EXIT_NO_PEAK = 5

# CSV threshold below which simulate also writes a plain-text copy.
_CSV_MAX_SAMPLES = 1 << 16


class MismatchError(ValueError):
    """Raw file and scenario disagree."""


def _threads(args) -> int:
    if args.threads is not None:
        return max(1, args.threads)
    env = os.environ.get("FOPEN_SAR_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise SchemaError(f"FOPEN_SAR_THREADS: not an integer: {env!r}")
    return 1


def _resolve_scenario(args) -> Scenario:
    if bool(args.scenario) == bool(args.preset):
        raise SchemaError("scenario: give exactly one of --scenario or --preset")
    if args.scenario:
        scen = load_scenario(args.scenario)
    elif args.preset == "tank":
        scen = tank_scenario("full")
    else:
        scen = preset_scenario(args.preset)
    if args.waveform or args.foliage or args.seed is not None:
        scen = scen.with_overrides(waveform_kind=args.waveform,
                                   foliage_pol=args.foliage,
                                   master_seed=args.seed)
    return scen


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def _write_manifest(out_dir, command, scen_docs, seeds, threads, files, timings):
    manifest = {
        "tool": "fopen-sar",
        "version": __version__,
        "command": command,
        "scenarios": scen_docs,
        "seeds": seeds,
        "threads": threads,
        "outputs": [{"path": os.path.basename(p), "sha256": _sha256(p),
                     "bytes": os.path.getsize(p)} for p in files],
        "timings_s": timings,
    }
    path = os.path.join(out_dir, f"{command}_manifest.json")
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    os.replace(tmp, path)
    return path


def _write_profiles_csv(out_dir, label, pixels, upsample, smooth):
    rng_p, az_p = extract_profiles(pixels, upsample, smooth)
    paths = []
    for name, prof in (("range", rng_p), ("azimuth", az_p)):
        path = os.path.join(out_dir, f"{label}_{name}_profile.csv")
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([f"axis_{prof.axis_unit}", "power", "power_db"])
            peak = prof.values.max()
            for x, v in zip(prof.axis, prof.values):
                db = 10 * np.log10(v / peak) if v > 0 else float("-inf")
                w.writerow([repr(float(x)), repr(float(v)), repr(float(db))])
        paths.append(path)
    return paths


def cmd_simulate(args) -> int:
    scen = _resolve_scenario(args)
    threads = _threads(args)
    os.makedirs(args.out, exist_ok=True)
    t0 = time.perf_counter()
    cfg = scen.simulation_config()
    raw = synthesize_raw(cfg, threads=threads)
    t_sim = time.perf_counter() - t0
    label = f"{scen.label()}-seed{scen.master_seed}"
    files = []
    raw_path = os.path.join(args.out, f"{label}_raw.fsar")
    write_fsar(raw_path, raw)
    files.append(raw_path)
    if raw.data.size <= _CSV_MAX_SAMPLES:
        csv_path = os.path.join(args.out, f"{label}_raw.csv")
        write_raw_csv(csv_path, raw)
        files.append(csv_path)
    if scen.outputs["dump_foliage_csv"] and cfg.foliage is not None:
        fol_path = os.path.join(args.out, f"{label}_foliage.csv")
        dump_realizations_csv(fol_path, foliage_channel(cfg))
        files.append(fol_path)
    _write_manifest(args.out, "simulate", [scen.doc], [scen.master_seed],
                    threads, files, {"simulate": t_sim})
    print(f"wrote {raw_path} ({raw.n_pulses} pulses x {raw.line_length} samples)")
    return EXIT_OK


def cmd_image(args) -> int:
    scen = _resolve_scenario(args)
    threads = _threads(args)
    os.makedirs(args.out, exist_ok=True)
    cfg = scen.simulation_config()
    t0 = time.perf_counter()
    if args.raw:
        data, _version = read_fsar(args.raw)
        n_pulses = cfg.platform.n_pulses()
        if data.shape != (n_pulses, cfg.line_length):
            raise MismatchError(
                f"raw file {args.raw} has shape {data.shape}, scenario expects "
                f"({n_pulses}, {cfg.line_length})")
        raw = RawDataMatrix(data, cfg.platform.slow_time_axis(),
                            cfg.ofdm.sample_interval, cfg.waveform_kind)
    else:
        raw = synthesize_raw(cfg, threads=threads)
    img = focus_config(scen, cfg, raw)
    t_img = time.perf_counter() - t0
    label = f"{scen.label()}-seed{scen.master_seed}"
    files = []
    fimg_path = os.path.join(args.out, f"{label}_image.fimg")
    write_fimg(fimg_path, img)
    files.append(fimg_path)
    floor = scen.outputs["db_floor"]
    if scen.outputs["write_pgm"]:
        p = os.path.join(args.out, f"{label}_image.pgm")
        write_pgm(p, img, floor)
        files.append(p)
    if scen.outputs["write_png"]:
        p = os.path.join(args.out, f"{label}_image.png")
        write_png(p, img, floor)
        files.append(p)
    if scen.outputs["write_csv_profiles"]:
        files += _write_profiles_csv(args.out, label, img.pixels,
                                     scen.processing["upsample"],
                                     scen.processing["smooth_window"])
    _write_manifest(args.out, "image", [scen.doc], [scen.master_seed],
                    threads, files, {"image": t_img})
    print(f"wrote {fimg_path} ({img.shape[0]} x {img.shape[1]})")
    return EXIT_OK


def _seed_list(scen, args) -> list[int]:
    base = scen.master_seed
    return [base + i for i in range(max(1, args.seeds))]


def cmd_metrics(args) -> int:
    scen = _resolve_scenario(args)
    threads = _threads(args)
    os.makedirs(args.out, exist_ok=True)
    t0 = time.perf_counter()
    if args.image:
        pixels = read_fimg(args.image)
        per_seed = [image_metrics(pixels, scen.processing["upsample"],
                                  scen.processing["smooth_window"])]
        seeds = [scen.master_seed]
    else:
        seeds = _seed_list(scen, args)
        per_seed = run_metrics(scen, seeds, threads=threads)
    t_met = time.perf_counter() - t0
    fol = scen.doc.get("foliage")
    report = aggregate_reports(per_seed, scen.doc["waveform"]["kind"],
                               fol["polarization"] if fol else None,
                               fol is not None)
    label = f"{scen.label()}-seed{scen.master_seed}"
    path = os.path.join(args.out, f"{label}_metrics.json")
    with open(path, "w") as fh:
        fh.write(report.to_json(indent=2, sort_keys=True))
        fh.write("\n")
    _write_manifest(args.out, "metrics", [scen.doc], seeds, threads, [path],
                    {"metrics": t_met})
    print(report.to_json(indent=2, sort_keys=True))
    return EXIT_OK


def cmd_compare(args) -> int:
    threads = _threads(args)
    os.makedirs(args.out, exist_ok=True)
    variants: list[Scenario] = []
    if args.scenario_multi:
        for path in args.scenario_multi:
            variants.append(load_scenario(path))
        if args.seed is not None:
            variants = [v.with_overrides(master_seed=args.seed) for v in variants]
    else:
        if not args.preset:
            raise SchemaError("compare: give --preset or two or more --scenario")
        base = tank_scenario("full") if args.preset == "tank" else preset_scenario(args.preset)
        if args.seed is not None:
            base = base.with_overrides(master_seed=args.seed)
        pols = [args.foliage] if args.foliage else ["off", "HH"]
        for kind in ("ofdm", "noise"):
            for pol in pols:
                variants.append(base.with_overrides(waveform_kind=kind,
                                                    foliage_pol=pol))
    if len(variants) < 2:
        raise SchemaError("compare: need at least 2 scenario variants")
    t0 = time.perf_counter()
    entries = []
    for scen in variants:
        seeds = _seed_list(scen, args)
        per_seed = run_metrics(scen, seeds, threads=threads)
        fol = scen.doc.get("foliage")
        report = aggregate_reports(per_seed, scen.doc["waveform"]["kind"],
                                   fol["polarization"] if fol else None,
                                   fol is not None)
        entries.append({"label": scen.label(), "seeds": seeds,
                        "metrics": report.to_dict()})
    diffs = []
    keys = ("islr_range_db", "pslr_range_db", "islr_azimuth_db", "pslr_azimuth_db")
    for i in range(len(entries)):
        for j in range(i + 1, len(entries)):
            a, b = entries[i], entries[j]
            diffs.append({
                "pair": [a["label"], b["label"]],
                **{f"delta_{k}": (a["metrics"][k] - b["metrics"][k]
                                  if isinstance(a["metrics"][k], float)
                                  and isinstance(b["metrics"][k], float)
                                  else None)
                   for k in keys},
            })
    result = {"variants": entries, "differences": diffs}
    path = os.path.join(args.out, "compare.json")
    with open(path, "w") as fh:
        json.dump(result, fh, indent=2, sort_keys=True)
        fh.write("\n")
    _write_manifest(args.out, "compare", [v.doc for v in variants],
                    sorted({s for e in entries for s in e["seeds"]}), threads,
                    [path], {"compare": time.perf_counter() - t0})
    print(json.dumps(result["differences"], indent=2, sort_keys=True))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fopen-sar",
        description="UWB stripmap SAR foliage-penetration simulator "
                    "(CP-OFDM vs random-noise waveforms)")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, scenario_multi=False):
        if scenario_multi:
            p.add_argument("--scenario", action="append", dest="scenario_multi",
                           metavar="PATH", help="scenario JSON (repeatable)")
        else:
            p.add_argument("--scenario", metavar="PATH", help="scenario JSON")
        p.add_argument("--preset", choices=sorted(PRESETS) + ["tank"],
                       help="built-in scenario preset")
        p.add_argument("--waveform", choices=["ofdm", "noise"],
                       help="override the scenario waveform kind")
        p.add_argument("--foliage", choices=["off", "HH", "VV"],
                       help="override the scenario foliage section")
        p.add_argument("--seed", type=int, help="override seeds.master")
        p.add_argument("--seeds", type=int, default=1,
                       help="number of consecutive seeds (metrics/compare)")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--threads", type=int, default=None,
                       help="worker threads (or FOPEN_SAR_THREADS)")

    p = sub.add_parser("simulate", help="synthesize the raw data matrix")
    common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("image", help="form the focused image")
    common(p)
    p.add_argument("--raw", metavar="PATH", help="existing FSAR file "
                   "(default: simulate in-process)")
    p.set_defaults(func=cmd_image)

    p = sub.add_parser("metrics", help="compute ISLR/PSLR metrics")
    common(p)
    p.add_argument("--image", metavar="PATH", help="existing FIMG file "
                   "(default: run the pipeline)")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("compare", help="run scenario variants and diff metrics")
    common(p, scenario_multi=True)
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SchemaError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_SCHEMA
    except MismatchError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_MISMATCH
    except NoPeakError as e:
        print(f"error: no peak: {e}", file=sys.stderr)
        return EXIT_NO_PEAK
    except OSError as e:
        print(f"error: i/o: {e}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
