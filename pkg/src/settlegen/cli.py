"""Command line front end.

Exit codes: 0 ok, 2 bad input or arguments, 3 generation error, 4 time limit
exceeded.
"""

from __future__ import annotations

import argparse
import json
import os
import platform
import signal
import sys
import time
from pathlib import Path

from . import __version__, kernels
from .adaptive import AdaptiveConfig, adaptive_generate
from .casg import CasgConfig, casg_generate
from .evaluation import build_report, evaluate, load_weights, map_entry
from .manifest import GenerationError, SettlementManifest
from .nbt import NBTError
from .render import write_ppm
from .schematic import read_schematic, write_schematic
from .terrain import TerrainParams, analysis_summary, synth_terrain
from .voxel import BoundingBox, ShapeError, Vec3, apply_edit_set

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_GENERATION = 3
EXIT_TIMEOUT = 4

GENERATORS = {"casg": (CasgConfig, casg_generate), "adaptive": (AdaptiveConfig, adaptive_generate)}


class InputError(Exception):
    pass


class TimeLimitExceeded(Exception):
    pass


def parse_box(text: str) -> BoundingBox:
    try:
        v = [int(p) for p in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"box must be six integers, got {text!r}")
    if len(v) != 6:
        raise argparse.ArgumentTypeError(f"box must be x0,y0,z0,x1,y1,z1, got {text!r}")
    try:
        return BoundingBox(Vec3(*v[:3]), Vec3(*v[3:]))
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e))


def parse_seed(text: str) -> int:
    try:
        seed = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer, got {text!r}")
    if not 0 <= seed < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return seed


def resolve_seed(seed: int | None) -> int:
    if seed is not None:
        return seed
    env = os.environ.get("GDMC_SEED")
    if env:
        try:
            return parse_seed(env)
        except argparse.ArgumentTypeError as e:
            raise InputError(f"GDMC_SEED: {e}")
    return 0


def _load(path) -> object:
    try:
        return read_schematic(path)
    except (OSError, NBTError) as e:
        raise InputError(f"cannot read {path}: {e}")


def _load_json(path, what: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, ValueError) as e:
        raise InputError(f"cannot read {what} {path}: {e}")


def hardware() -> dict:
    return {"cpu_count": os.cpu_count(), "machine": platform.machine(),
            "python": platform.python_version(), "kernels": kernels.BACKEND}


def _dump(doc, path) -> None:
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True)
        fh.write("\n")


# -- commands ---------------------------------------------------------------

def cmd_analyze(args) -> int:
    world = _load(args.input)
    box = args.box or world.bounds
    if not world.bounds.contains_box(box):
        raise InputError(f"box {box} lies outside the world {world.bounds}")
    doc = analysis_summary(world, box, args.min_area, args.max_slope)
    text = json.dumps(doc, indent=1, sort_keys=True)
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        print(text)
    return EXIT_OK


def _alarm(signum, frame):
    raise TimeLimitExceeded()


def cmd_generate(args) -> int:
    if Path(args.output).resolve() == Path(args.input).resolve():
        raise InputError("refusing to overwrite the input file")
    seed = resolve_seed(args.seed)
    cfg_cls, generate = GENERATORS[args.generator]
    try:
        doc = _load_json(args.config, "config") if args.config else {}
        cfg = cfg_cls.from_json({**doc, "seed": seed})
    except (TypeError, ValueError) as e:
        raise InputError(f"bad {args.generator} config: {e}")
    manifest_path = args.manifest or f"{args.output}.manifest.json"
    record_path = args.run_record or f"{args.output}.run.json"
    limit = args.time_limit

    started = time.perf_counter()
    use_alarm = limit > 0 and hasattr(signal, "setitimer")
    if use_alarm:
        previous = signal.signal(signal.SIGALRM, _alarm)
        signal.setitimer(signal.ITIMER_REAL, limit)
    record = {"generator": args.generator, "seed": seed, "input": str(args.input),
              "output": str(args.output), "manifest": manifest_path, "hardware": hardware(),
              "workers": args.workers, "time_limit": limit}
    try:
        world = _load(args.input)
        box = args.box or world.bounds
        record["box"] = [list(box.min), list(box.max)]
        if not world.bounds.contains_box(box):
            raise InputError(f"box {box} lies outside the world {world.bounds}")
        t0 = time.perf_counter()
        try:
            edits, manifest = generate(world, box, cfg, workers=args.workers)
        except GenerationError as e:
            record.update(seconds=time.perf_counter() - t0, exit_status=EXIT_GENERATION, error=str(e))
            _dump(record, record_path)
            print(f"generation failed: {e}", file=sys.stderr)
            return EXIT_GENERATION
        record["seconds"] = time.perf_counter() - t0
        apply_edit_set(world, edits)
    except TimeLimitExceeded:
        print(f"time limit of {limit}s exceeded", file=sys.stderr)
        return EXIT_TIMEOUT
    finally:
        if use_alarm:
            signal.setitimer(signal.ITIMER_REAL, 0)
            signal.signal(signal.SIGALRM, previous)
    if time.perf_counter() - started > limit:
        print(f"time limit of {limit}s exceeded", file=sys.stderr)
        return EXIT_TIMEOUT
    write_schematic(world, args.output)
    Path(manifest_path).write_text(manifest.dumps() + "\n")
    record.update(edit_count=len(edits), buildings=len(manifest.buildings),
                  total_seconds=time.perf_counter() - started, exit_status=EXIT_OK)
    _dump(record, record_path)
    return EXIT_OK


def cmd_evaluate(args) -> int:
    n = len(args.after)
    if len(args.before) != n or len(args.manifest) != n:
        raise InputError("--before, --after and --manifest need the same number of paths")
    names = args.name or [Path(p).stem for p in args.after]
    if len(names) != n:
        raise InputError("--name needs one entry per map")
    try:
        weights = load_weights(args.weights) if args.weights else None
    except (OSError, ValueError) as e:
        raise InputError(f"bad weights {args.weights}: {e}")
    started = time.perf_counter()
    entries = []
    for name, before_path, after_path, manifest_path in zip(names, args.before, args.after, args.manifest):
        before, after = _load(before_path), _load(after_path)
        try:
            manifest = SettlementManifest.from_json(_load_json(manifest_path, "manifest"))
        except (KeyError, TypeError, ValueError) as e:
            raise InputError(f"bad manifest {manifest_path}: {e}")
        try:
            ev = evaluate(before, after, manifest, weights)
        except ShapeError as e:
            raise InputError(str(e))
        entries.append(map_entry(name, ev))
    report = build_report(entries, time.perf_counter() - started)
    report["hardware"] = hardware()
    _dump(report, args.report)
    return EXIT_OK


def cmd_render(args) -> int:
    world = _load(args.input)
    try:
        write_ppm(world, args.out)
    except OSError as e:
        raise InputError(f"cannot write {args.out}: {e}")
    return EXIT_OK


def cmd_synth(args) -> int:
    params = TerrainParams(height=args.height, base_height=args.base_height,
                           roughness=args.roughness, water_level=args.water_level)
    try:
        world = synth_terrain(resolve_seed(args.seed), args.width, args.length, params)
    except ValueError as e:
        raise InputError(str(e))
    write_schematic(world, args.output)
    return EXIT_OK


# -- parser -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    version = f"settlegen {__version__}"
    parser = argparse.ArgumentParser(prog="settlegen", description="Voxel settlement generation and evaluation.")
    parser.add_argument("--version", action="version", version=version)
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name, func, help):
        p = sub.add_parser(name, help=help, description=help)
        p.add_argument("--version", action="version", version=version)
        p.set_defaults(func=func)
        return p

    p = command("analyze", cmd_analyze, "Print terrain analysis JSON for a schematic.")
    p.add_argument("--input", required=True)
    p.add_argument("--box", type=parse_box)
    p.add_argument("--min-area", type=int, default=25)
    p.add_argument("--max-slope", type=int, default=1)
    p.add_argument("--out", help="write JSON here instead of stdout")

    p = command("generate", cmd_generate, "Run a generator on a schematic under a time limit.")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--generator", choices=sorted(GENERATORS), default="adaptive")
    p.add_argument("--seed", type=parse_seed, help="defaults to $GDMC_SEED, then 0")
    p.add_argument("--box", type=parse_box, help="x0,y0,z0,x1,y1,z1 (default: whole map)")
    p.add_argument("--config", help="generator config JSON")
    p.add_argument("--manifest", help="default: <output>.manifest.json")
    p.add_argument("--run-record", help="default: <output>.run.json")
    p.add_argument("--time-limit", type=float, default=600.0, help="seconds (default 600)")
    p.add_argument("--workers", type=int, default=1)

    p = command("evaluate", cmd_evaluate, "Score before/after pairs and write a report.")
    p.add_argument("--before", nargs="+", required=True)
    p.add_argument("--after", nargs="+", required=True)
    p.add_argument("--manifest", nargs="+", required=True)
    p.add_argument("--report", required=True)
    p.add_argument("--weights")
    p.add_argument("--name", nargs="+", help="map names (default: after file stems)")

    p = command("render", cmd_render, "Write a top-down PPM image of a schematic.")
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--mode", choices=["top"], default="top")

    p = command("synth", cmd_synth, "Write a seeded value-noise terrain schematic.")
    p.add_argument("--output", required=True)
    p.add_argument("--seed", type=parse_seed)
    p.add_argument("--width", type=int, default=256)
    p.add_argument("--length", type=int, default=256)
    p.add_argument("--height", type=int, default=128)
    p.add_argument("--base-height", type=int, default=64)
    p.add_argument("--roughness", type=float, default=16.0)
    p.add_argument("--water-level", type=int)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
