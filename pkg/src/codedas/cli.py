"""Command line front end.

Exit codes: 0 success, 2 invalid input or validation failure, 3 file I/O or
capture-format problems, 4 selftest failure.
"""

import argparse
import sys

from .analysis import AnalysisError
from .capture_io import CaptureFormatError
from .channel import ChannelError
from .codes import CodeSetError, make_code_set, verify_code_set
from .config import ConfigError, load_config
from .dsp import DspError

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_IO = 3
EXIT_SELFTEST = 4


def _cmd_codes(args):
    s = make_code_set(args.k)
    if args.verify:
        report = verify_code_set(s)
        for field in ("complementary_x", "complementary_y", "mutually_orthogonal"):
            print(f"# {field}: {'ok' if getattr(report, field) else 'VIOLATED'}")
        if not report.ok:
            name, lag, value = report.first_violation
            print(f"# first violation: {name} lag={lag} value={value}")
            return EXIT_INVALID
    print("index,xa,xb,ya,yb")
    for i in range(s.length):
        print(
            f"{i},{s.pair_x.a[i]},{s.pair_x.b[i]},{s.pair_y.a[i]},{s.pair_y.b[i]}"
        )
    return EXIT_OK


def _cmd_simulate(args):
    from .pipeline import simulate_to_file

    cfg = load_config(args.config)
    header = simulate_to_file(cfg, args.out)
    print(
        f"wrote {args.out}: {header.num_frames} frames x {header.frame_len} "
        f"samples at {header.sample_rate_hz:g} S/s"
    )
    return EXIT_OK


def _cmd_process(args):
    from .pipeline import process_capture, write_process_outputs

    cfg = load_config(args.config)
    result = process_capture(args.capture, cfg, full_maps=args.full_maps)
    paths = write_process_outputs(result, cfg, args.out)
    for key in sorted(paths):
        print(f"wrote {paths[key]}")
    return EXIT_OK


def _cmd_analyze(args):
    from .pipeline import load_diff_phase, run_analysis

    cfg = load_config(args.config)
    dpm = load_diff_phase(args.indir)
    paths, _, events, _, _ = run_analysis(cfg, dpm, args.indir)
    for key in sorted(paths):
        print(f"wrote {paths[key]}")
    if events:
        for e in events:
            print(
                f"event at {e.position_m:.1f} m: {e.frequency_hz:.2f} Hz, "
                f"{e.magnitude_rad_pp:.4f} rad pk-pk"
            )
    else:
        print("no events detected")
    return EXIT_OK


def _cmd_pipeline(args):
    from .pipeline import run_pipeline, run_analysis, write_process_outputs

    cfg = load_config(args.config)
    outdir = args.out if args.out is not None else cfg.outputs.directory
    result = run_pipeline(cfg, capture_path=args.capture, full_maps=args.full_maps)
    paths = write_process_outputs(result, cfg, outdir)
    apaths, _, events, _, _ = run_analysis(cfg, result.diff_phase, outdir)
    paths.update(apaths)
    for key in sorted(paths):
        print(f"wrote {paths[key]}")
    if args.capture is not None:
        print(f"wrote {args.capture}")
    if events:
        for e in events:
            print(
                f"event at {e.position_m:.1f} m: {e.frequency_hz:.2f} Hz, "
                f"{e.magnitude_rad_pp:.4f} rad pk-pk"
            )
    else:
        print("no events detected")
    return EXIT_OK


def _cmd_selftest(args):
    from .acceptance import selftest

    return EXIT_OK if selftest() else EXIT_SELFTEST


def _build_parser():
    p = argparse.ArgumentParser(
        prog="codedas",
        description="Coded-probe polarization-diverse DAS simulator and DSP chain",
    )
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("codes", help="emit an orthogonal complementary code set")
    c.add_argument("--k", type=int, required=True, help="recursion depth (length 4*2^k)")
    c.add_argument("--verify", action="store_true", help="check the code identities")
    c.set_defaults(func=_cmd_codes)

    c = sub.add_parser("simulate", help="synthesize a capture file from a config")
    c.add_argument("--config", required=True)
    c.add_argument("--out", required=True, help="capture file to write")
    c.set_defaults(func=_cmd_simulate)

    c = sub.add_parser("process", help="estimate maps from a capture file")
    c.add_argument("--capture", required=True)
    c.add_argument("--config", required=True)
    c.add_argument("--out", required=True, help="output directory")
    c.add_argument("--full-maps", action="store_true",
                   help="also write the per-tap Jones map (large)")
    c.set_defaults(func=_cmd_process)

    c = sub.add_parser("analyze", help="run detection/spectral analyses on outputs")
    c.add_argument("--in", dest="indir", required=True,
                   help="directory written by process/pipeline")
    c.add_argument("--config", required=True)
    c.set_defaults(func=_cmd_analyze)

    c = sub.add_parser("pipeline", help="simulate, process, and analyze in one pass")
    c.add_argument("--config", required=True)
    c.add_argument("--out", help="output directory (default: outputs.directory)")
    c.add_argument("--capture", help="also persist the raw capture here")
    c.add_argument("--full-maps", action="store_true")
    c.set_defaults(func=_cmd_pipeline)

    c = sub.add_parser("selftest", help="run the fast built-in checks")
    c.set_defaults(func=_cmd_selftest)
    return p


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CaptureFormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ConfigError, CodeSetError, ChannelError, DspError, AnalysisError,
            ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
