"""
Command-line front end.

    bci enhance IMG... --out DIR      enhance images, one JSON record per image
    bci analyze IMG... [--reference]  shape / reference metrics table
    bci qq INPUT                      Rayleigh QQ pairs as TSV
    bci bench                         full-data vs histogram lambda timing

Exit codes: 0 ok, 2 bad arguments, 3 I/O failure.
"""

from __future__ import annotations

import argparse
import csv
import glob
import io
import json
import logging
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import List, Optional

import numpy as np

from . import __version__
from .bench import DEFAULT_SIZES, rows_to_csv, run_bench
from .boxcox import DEFAULT_HI, DEFAULT_LO, DEFAULT_TOL, Mode
from .enhance import apply_bci
from .errors import BCIError, CorruptFile, UnsupportedFormat
from .image import ImageBuffer, gray, read_image, write_image
from .metrics import qq_rayleigh, quality_report, rayleigh_fit

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3

IMAGE_EXTS = (".png", ".pgm", ".ppm", ".pnm")

log = logging.getLogger("bci")


class UsageError(Exception):
    pass


class InputError(Exception):
    pass


def _number(x):
    """JSON/CSV-safe scalar: NaN -> None, +-inf -> 'inf' / '-inf'."""
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return None
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
    return x


def _clean(obj):
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return _number(obj)


def _dump_json(obj) -> str:
    return json.dumps(_clean(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def _csv_text(rows: List[dict]) -> str:
    buf = io.StringIO()
    if rows:
        w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: ("" if v is None else v) for k, v in _clean(r).items()})
    return buf.getvalue()


def expand_inputs(patterns: List[str]) -> List[Path]:
    paths = set()
    for pat in patterns:
        if glob.has_magic(pat):
            matches = glob.glob(pat)
        elif Path(pat).is_dir():
            matches = [str(p) for p in Path(pat).iterdir() if p.suffix.lower() in IMAGE_EXTS]
        else:
            matches = [pat]
        paths.update(Path(m) for m in matches)
    if not paths:
        raise UsageError("no input files matched")
    return sorted(paths)


def _read(path: Path) -> ImageBuffer:
    try:
        return read_image(path)
    except (OSError, CorruptFile, UnsupportedFormat) as exc:
        raise InputError(str(exc)) from exc


def _map(fn, items, workers: int):
    if workers <= 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _write_text(text: str, out: Optional[str]):
    if out is None or out == "-":
        sys.stdout.write(text)
        return
    try:
        Path(out).write_text(text, newline="")
    except OSError as exc:
        raise InputError(str(exc)) from exc


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------


def _enhance_one(path: Path, args) -> dict:
    img = _read(path)
    res = apply_bci(img, args.mode, args.lo, args.hi, args.tol)
    out_path = Path(args.out) / f"{path.stem}.png"
    try:
        write_image(res.output, out_path)
    except OSError as exc:
        raise InputError(str(exc)) from exc
    record = {
        "input": str(path),
        "output": out_path.name,
        **res.lam.as_dict(),
        "degenerate": res.degenerate,
        "fallback": res.fallback,
        "clamped": res.clamped,
        "pre_min": res.pre_min,
        "pre_max": res.pre_max,
        "mean_in": float(img.data.mean()),
        "mean_out": float(res.output.data.mean()),
        "quality_in": quality_report(img).as_dict(),
        "quality_out": quality_report(res.output).as_dict(),
        "timings": dict(res.timings),
    }
    try:
        (Path(args.out) / f"{path.stem}.json").write_text(_dump_json(record))
    except OSError as exc:
        raise InputError(str(exc)) from exc
    return record


def run_enhance(args) -> int:
    paths = expand_inputs(args.inputs)
    stems = [p.stem for p in paths]
    if len(set(stems)) != len(stems):
        raise UsageError("inputs must have distinct file stems (outputs are named by stem)")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    records = _map(lambda p: _enhance_one(p, args), paths, args.workers)
    records.sort(key=lambda r: r["input"])

    content, timing_rows = [], []
    for r in records:
        row = {k: v for k, v in r.items() if not k.startswith("quality") and k != "timings"}
        for prefix in ("quality_in", "quality_out"):
            for k, v in r[prefix].items():
                row[f"{prefix}.{k}"] = v
        content.append(row)
        timing_rows.append({"input": r["input"], **r["timings"]})
    if args.format == "json":
        (out / "report.json").write_text(_dump_json(content))
    else:
        (out / "report.csv").write_text(_csv_text(content))
    (out / "timings.csv").write_text(_csv_text(timing_rows))
    return EXIT_OK


def _analyze_one(path: Path, reference: Optional[ImageBuffer]) -> dict:
    img = _read(path)
    if reference is not None and reference.data.shape != img.data.shape:
        raise UsageError(f"{path}: shape {img.data.shape} differs from reference {reference.data.shape}")
    rep = quality_report(img, reference)
    return {"input": str(path), "width": img.width, "height": img.height,
            "channels": img.channels, **rep.as_dict()}


def run_analyze(args) -> int:
    paths = expand_inputs(args.inputs)
    reference = _read(Path(args.reference)) if args.reference else None
    rows = _map(lambda p: _analyze_one(p, reference), paths, args.workers)
    rows.sort(key=lambda r: r["input"])
    if args.format == "json":
        _write_text(_dump_json(rows), args.out)
    else:
        _write_text(_csv_text(rows), args.out)
    return EXIT_OK


def _read_vector(path: Path) -> np.ndarray:
    try:
        text = path.read_text()
    except OSError as exc:
        raise InputError(str(exc)) from exc
    try:
        return np.array([float(t) for t in text.replace(",", " ").split()])
    except ValueError as exc:
        raise InputError(f"{path}: not a list of numbers") from exc


def qq_tsv(values: np.ndarray) -> str:
    corr, pts = qq_rayleigh(values)
    lines = [f"# sigma={rayleigh_fit(values)!r}\tqq_corr={corr!r}", "empirical\ttheoretical"]
    lines += [f"{e!r}\t{t!r}" for e, t in pts.tolist()]
    return "\n".join(lines) + "\n"


def run_qq(args) -> int:
    path = Path(args.input)
    if path.suffix.lower() in IMAGE_EXTS:
        values = gray(_read(path)).flat()
    else:
        values = _read_vector(path)
    try:
        text = qq_tsv(values)
    except BCIError as exc:
        raise UsageError(f"{path}: {exc}") from exc
    _write_text(text, args.out)
    return EXIT_OK


def run_bench_cmd(args) -> int:
    rows = run_bench(args.sizes, args.repeats, args.seed, args.lo, args.hi, args.tol)
    _write_text(rows_to_csv(rows), args.out)
    return EXIT_OK


# --------------------------------------------------------------------------
# argument parsing
# --------------------------------------------------------------------------


def _positive_int(s):
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bci", description="Box-Cox image enhancement")
    ap.add_argument("--version", action="version", version=f"bci {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def search_opts(p, mode=True):
        if mode:
            p.add_argument("--mode", type=Mode, choices=list(Mode), default=Mode.HISTOGRAM_COUNTS,
                           metavar="{full,counts,weighted}")
        p.add_argument("--lo", type=float, default=DEFAULT_LO)
        p.add_argument("--hi", type=float, default=DEFAULT_HI)
        p.add_argument("--tol", type=float, default=DEFAULT_TOL)

    p = sub.add_parser("enhance", help="enhance images")
    p.add_argument("inputs", nargs="+")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--workers", type=_positive_int, default=1)
    search_opts(p)
    p.set_defaults(func=run_enhance)

    p = sub.add_parser("analyze", help="quality metrics per image")
    p.add_argument("inputs", nargs="+")
    p.add_argument("--reference", help="reference image; enables PSNR and Pearson")
    p.add_argument("--out", help="report file (default stdout)")
    p.add_argument("--format", choices=("json", "csv"), default="csv")
    p.add_argument("--workers", type=_positive_int, default=1)
    p.set_defaults(func=run_analyze)

    p = sub.add_parser("qq", help="Rayleigh QQ data as TSV")
    p.add_argument("input", help="image, or text file of whitespace/comma separated numbers")
    p.add_argument("--out", help="TSV file (default stdout)")
    p.set_defaults(func=run_qq)

    p = sub.add_parser("bench", help="time lambda estimation: full data vs histogram")
    p.add_argument("--sizes", type=_positive_int, nargs="+", default=list(DEFAULT_SIZES))
    p.add_argument("--repeats", type=_positive_int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="CSV file (default stdout)")
    search_opts(p, mode=False)
    p.set_defaults(func=run_bench_cmd)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if hasattr(args, "lo") and not args.lo < args.hi:
        parser.print_usage(sys.stderr)
        print("bci: error: --lo must be less than --hi", file=sys.stderr)
        return EXIT_USAGE
    if hasattr(args, "tol") and not args.tol > 0:
        print("bci: error: --tol must be positive", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"bci: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InputError as exc:
        print(f"bci: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except BrokenPipeError:
        # downstream reader (e.g. head) closed early
        sys.stderr.close()
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
