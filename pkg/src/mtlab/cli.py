"""mtlab command line: run one experiment and write its table as CSV.

Exit status 0 when every check passes, 1 when a check fails, 2 for bad configuration.
"""

from __future__ import annotations

import argparse
import csv
import logging
import os
import sys

from .errors import DomainError, GridTooCoarse, InvalidDimension, MTLabError
from .experiments import EXPERIMENTS, ExperimentConfig, run

log = logging.getLogger("mtlab")

KEYS = ("experiment", "N", "k", "k_range", "alpha", "grid", "L", "case", "seed", "out", "tol")


class ConfigError(Exception):
    pass


def parse_grid(text: str) -> tuple[int, int]:
    try:
        w, h = text.lower().split("x")
        return int(w), int(h)
    except ValueError:
        raise ConfigError(f"grid must look like 512x128, got {text!r}") from None


def parse_range(text: str) -> tuple[int, int]:
    for sep in ("..", ":", "-"):
        if sep in text:
            a, b = text.split(sep, 1)
            try:
                return int(a), int(b)
            except ValueError:
                break
    raise ConfigError(f"k range must look like 1..6, got {text!r}")


def parse_alpha(text: str) -> str:
    if text == "sharp":
        return text
    try:
        if float(text) > 0:
            return text
    except ValueError:
        pass
    raise ConfigError(f"alpha must be 'sharp' or a positive number, got {text!r}")


CONVERT = {
    "experiment": str, "N": int, "k": float, "k_range": parse_range, "alpha": parse_alpha,
    "grid": parse_grid, "L": float, "case": int, "seed": int, "out": str, "tol": float,
}


def read_config(path: str) -> dict:
    """Plain key=value lines; '#' starts a comment; dashes in keys read as underscores."""
    try:
        with open(path) as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    out = {}
    for n, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{n}: expected key=value")
        key, val = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in CONVERT:
            raise ConfigError(f"{path}:{n}: unknown key {key!r}")
        out[key] = val
    return out


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mtlab", description=__doc__.splitlines()[0])
    p.add_argument("--experiment", choices=sorted(EXPERIMENTS))
    p.add_argument("--N", type=str)
    p.add_argument("--k", type=str)
    p.add_argument("--k-range", dest="k_range", type=str, help="inclusive, e.g. 1..6")
    p.add_argument("--alpha", type=str, help="'sharp' or a positive value")
    p.add_argument("--grid", type=str, help="WxH, e.g. 512x128")
    p.add_argument("--L", type=str, help="strip truncation")
    p.add_argument("--case", type=str, help="metric case 1..7")
    p.add_argument("--seed", type=str)
    p.add_argument("--out", type=str, help="CSV path (default stdout)")
    p.add_argument("--tol", type=str)
    p.add_argument("--config", type=str, help="key=value file; flags override it")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def make_config(args: argparse.Namespace) -> ExperimentConfig:
    raw = read_config(args.config) if args.config else {}
    for key in KEYS:
        val = getattr(args, key)
        if val is not None:
            raw[key] = val
    if "experiment" not in raw:
        raise ConfigError("no experiment given")
    kw = {}
    for key, val in raw.items():
        try:
            kw[key] = CONVERT[key](val)
        except ValueError:
            raise ConfigError(f"bad value for {key}: {val!r}") from None
    try:
        return ExperimentConfig(**kw)
    except MTLabError as exc:
        raise ConfigError(str(exc)) from None


def fmt(v) -> str:
    if isinstance(v, bool):
        return str(v)
    if isinstance(v, int):
        return str(v)
    try:
        return "%.15g" % float(v)
    except (TypeError, ValueError):
        return str(v)


def write_csv(fh, header, rows):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = make_config(args)
        if cfg.out:
            d = os.path.dirname(os.path.abspath(cfg.out))
            if not os.path.isdir(d) or not os.access(d, os.W_OK):
                raise ConfigError(f"cannot write to {cfg.out}")
    except ConfigError as exc:
        print(f"mtlab: {exc}", file=sys.stderr)
        return 2
    try:
        header, rows, ok = run(cfg)
    except (DomainError, GridTooCoarse, InvalidDimension) as exc:
        print(f"mtlab: invalid input for {cfg.experiment}: {exc}", file=sys.stderr)
        return 2
    except MTLabError as exc:
        print(f"mtlab: {cfg.experiment} failed: {exc}", file=sys.stderr)
        return 1
    if cfg.out:
        try:
            with open(cfg.out, "w", newline="") as fh:
                write_csv(fh, header, rows)
        except OSError as exc:
            print(f"mtlab: cannot write {cfg.out}: {exc}", file=sys.stderr)
            return 2
    else:
        write_csv(sys.stdout, header, rows)
    log.info("%s: %s", cfg.experiment, "pass" if ok else "fail")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
