"""Command-line front end.

Subcommands: synth (scene script to fixture file), replay (fixture to
metrics), bench (matcher and reacquisition suites), serve (streaming
service), calibrate (sample template reference hue/saturation from a
fixture frame region).
"""

import argparse
import csv
import io
import json
import math
import os
import sys

import numpy as np

from .bench import bench_matcher, bench_reacquire
from .color import rgb_to_hs
from .fixtures import read_fixture, write_fixture
from .metrics import replay
from .pipeline import ConfigError, EngineConfig, default_config
from .service import DEFAULT_ENDPOINT, DEFAULT_MAX_DIM, serve
from .synth import SceneScript

# the bench grid the matcher count model is checked over
BENCH_STRIDES = (1, 2, 4)
BENCH_MASKS = ((5, 5), (11, 11))


def _load_config(path: str | None) -> EngineConfig | None:
    if path is None:
        return None
    with open(path) as f:
        return EngineConfig.from_dict(json.load(f))


def _clean(obj):
    """NaN is not valid JSON; emit null instead."""
    if isinstance(obj, float) and math.isnan(obj):
        return None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_clean(v) for v in obj]
    return obj


def _write_out(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
    else:
        with open(out, "w") as f:
            f.write(text)


def _emit(data, fmt: str, out: str | None) -> None:
    data = _clean(data)
    if fmt == "json":
        _write_out(json.dumps(data, indent=2, sort_keys=True), out)
        return
    buf = io.StringIO()
    if isinstance(data, list):
        keys: list[str] = []
        for row in data:
            for k in row:
                if k not in keys:
                    keys.append(k)
        w = csv.DictWriter(buf, fieldnames=keys)
        w.writeheader()
        for row in data:
            w.writerow({k: row.get(k, "") for k in keys})
    else:
        w = csv.writer(buf)
        w.writerow(["key", "value"])
        for k, v in data.items():
            w.writerow([k, json.dumps(v) if isinstance(v, (dict, list)) else v])
    _write_out(buf.getvalue(), out)


def _cmd_synth(args) -> int:
    with open(args.script) as f:
        script = SceneScript.from_dict(json.load(f))
    write_fixture(args.out, script, args.seed)
    size = os.path.getsize(args.out)
    print(f"wrote {args.out}: {script.frame_count} frames "
          f"{script.width}x{script.height} @ {script.fps} fps, {size} bytes")
    return 0


def _cmd_replay(args) -> int:
    fixture = read_fixture(args.fixture)
    expected = None
    if args.expected:
        with open(args.expected) as f:
            expected = json.load(f)
    metrics = replay(_load_config(args.config), fixture, expected)
    _emit(metrics.to_dict(per_frame=args.per_frame), args.format, args.out)
    return 0


def _cmd_bench(args) -> int:
    rows = []
    if args.suite in ("matcher", "all"):
        for stride in BENCH_STRIDES:
            for mask in BENCH_MASKS:
                r = bench_matcher(
                    mask_dims=mask, stride=stride,
                    repetitions=args.repetitions, seed=args.seed,
                )
                rows.append({"suite": "matcher"} | r)
    if args.suite in ("reacquire", "all"):
        rows.append({"suite": "reacquire"} | bench_reacquire(seed=args.seed))
    _emit(rows, args.format, args.out)
    return 0


def _cmd_serve(args) -> int:
    serve(_load_config(args.config), args.endpoint, args.max_dim)
    return 0


def _cmd_calibrate(args) -> int:
    try:
        x, y, w, h = (int(v) for v in args.region.split(","))
    except ValueError:
        raise ValueError(f"region must be x,y,w,h integers, got {args.region!r}")
    fixture = read_fixture(args.fixture)
    frame = fixture.frame(args.frame)
    if not (0 <= x and 0 <= y and w > 0 and h > 0
            and x + w <= frame.width and y + h <= frame.height):
        raise ValueError(f"region {args.region} outside {frame.width}x{frame.height} frame")
    hs = rgb_to_hs(frame)
    hue = int(math.floor(float(np.median(hs.hue[y : y + h, x : x + w])) + 0.5))
    sat = int(math.floor(float(np.median(hs.sat[y : y + h, x : x + w])) + 0.5))

    if args.config or args.out:
        from dataclasses import replace

        cfg = _load_config(args.config) or default_config()
        key = f"{args.color}_template"
        tpl = replace(getattr(cfg, key), ref_hue=hue, ref_sat=sat)
        cfg = replace(cfg, **{key: tpl})
        _write_out(json.dumps(cfg.to_dict(), indent=2, sort_keys=True), args.out)
    else:
        _emit({"color": args.color, "hue": hue, "sat": sat,
               "frame": args.frame, "region": args.region}, args.format, None)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="markermouse",
        description="colored-marker tracking and gesture recognition toolkit",
    )
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("synth", help="render a scene script to a fixture file")
    sp.add_argument("--script", required=True, help="scene script JSON path")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", required=True, help="fixture output path")
    sp.set_defaults(fn=_cmd_synth)

    rp = sub.add_parser("replay", help="run a fixture through the engine and score it")
    rp.add_argument("--fixture", required=True)
    rp.add_argument("--config", help="engine config JSON path")
    rp.add_argument("--expected", help="JSON list of expected command names")
    rp.add_argument("--out", help="write metrics here instead of stdout")
    rp.add_argument("--format", choices=("json", "csv"), default="json")
    rp.add_argument("--per-frame", action="store_true", help="include per-frame count arrays")
    rp.set_defaults(fn=_cmd_replay)

    bp = sub.add_parser("bench", help="operation-count and timing benchmarks")
    bp.add_argument("--suite", choices=("matcher", "reacquire", "all"), default="all")
    bp.add_argument("--seed", type=int, default=0)
    bp.add_argument("--repetitions", type=int, default=3)
    bp.add_argument("--out")
    bp.add_argument("--format", choices=("json", "csv"), default="json")
    bp.set_defaults(fn=_cmd_bench)

    vp = sub.add_parser("serve", help="run the frame-streaming service")
    vp.add_argument("--endpoint", default=os.environ.get("MM_ENDPOINT", DEFAULT_ENDPOINT))
    vp.add_argument("--max-dim", type=int,
                    default=int(os.environ.get("MM_MAX_DIM", DEFAULT_MAX_DIM)))
    vp.add_argument("--config", help="engine config JSON path")
    vp.set_defaults(fn=_cmd_serve)

    cp = sub.add_parser("calibrate", help="sample reference hue/saturation from a fixture region")
    cp.add_argument("--fixture", required=True)
    cp.add_argument("--frame", type=int, default=0)
    cp.add_argument("--region", required=True, help="x,y,w,h")
    cp.add_argument("--color", choices=("red", "green"), default="red")
    cp.add_argument("--config", help="base config to update")
    cp.add_argument("--out", help="write updated config here")
    cp.add_argument("--format", choices=("json", "csv"), default="json")
    cp.set_defaults(fn=_cmd_calibrate)

    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (OSError, ValueError, ConfigError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
