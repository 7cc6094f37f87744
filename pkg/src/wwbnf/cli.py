"""Command-line interface: ``wwbnf <subcommand> --config run.yaml --out DIR``.

Configuration files are flat YAML mappings. Recognised keys:

  M            truncation (positive integer)
  N            resonance box size (positive integer)
  mode         resonances mode: enumerate | cubic-min | scan
  bucket       bucket width of the small-divisor scan (default 1)
  epsilon      initial amplitude (Hdot^s norm)
  s            Sobolev index used for normalisation and reporting
  seed         random seed for the initial datum
  dt, T        time step and final time (positive, dt < T)
  scheme       rk4 | implicit-midpoint
  system       ww | zd
  degree       2, 3 or 4 (ww only)
  record_every record every n-th step
  actions      write per-mode action columns (bool)
  n_max        largest probe mode for ``coeffs``
  tol          verification tolerance
  null_tol     Benjamin-Feir null tolerance (relative to max coefficient)
  output_dir   default output directory (overridden by --out)

Exit codes: 0 success, 1 verification failure, 2 configuration error,
3 runtime abort (blowup).
"""

from __future__ import annotations

import argparse
import csv
import datetime
import json
import math
import sys
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .birkhoff import compute_normal_form, verify_identity
from .dynamics import (
    SCHEMES,
    BlowupError,
    IntegratorConfig,
    integrate_ww,
    integrate_zd_numeric,
    random_initial,
)
from .expansion import build_hamiltonian, closed_form_coefficients, extract_bilinear
from .resonance import benjamin_feir, enumerate_quartic, min_cubic_phase, small_divisor_scan

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_ABORT = 0, 1, 2, 3


class ConfigError(ValueError):
    pass


def _pos_int(v):
    if isinstance(v, bool) or not isinstance(v, int) or v < 1:
        raise ValueError("must be a positive integer")
    return v


def _nonneg_int(v):
    if isinstance(v, bool) or not isinstance(v, int) or v < 0:
        raise ValueError("must be a nonnegative integer")
    return v


def _pos_float(v):
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not v > 0 or not math.isfinite(v):
        raise ValueError("must be a positive number")
    return float(v)


def _nonneg_float(v):
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not v >= 0:
        raise ValueError("must be a nonnegative number")
    return float(v)


def _choice(*opts):
    def check(v):
        if v not in opts:
            raise ValueError(f"must be one of {', '.join(map(str, opts))}")
        return v
    return check


def _bool(v):
    if not isinstance(v, bool):
        raise ValueError("must be true or false")
    return v


KEYS = {
    "M": (_pos_int, 8),
    "N": (_pos_int, 50),
    "mode": (_choice("enumerate", "cubic-min", "scan"), "enumerate"),
    "bucket": (_pos_int, 1),
    "epsilon": (_nonneg_float, 0.05),
    "s": (_nonneg_float, 1.0),
    "seed": (_nonneg_int, 0),
    "dt": (_pos_float, 0.01),
    "T": (_pos_float, 1.0),
    "scheme": (_choice(*SCHEMES), "implicit-midpoint"),
    "system": (_choice("ww", "zd"), "ww"),
    "degree": (_choice(2, 3, 4), 4),
    "record_every": (_pos_int, 1),
    "actions": (_bool, False),
    "n_max": (_pos_int, 16),
    "tol": (_nonneg_float, 1e-9),
    "null_tol": (_nonneg_float, 1e-10),
    "output_dir": (str, "."),
}


def load_config(path: str | None) -> dict:
    """Validated config with defaults filled in; raises ConfigError naming the bad key."""
    raw = {}
    if path is not None:
        try:
            with open(path) as fh:
                raw = yaml.safe_load(fh) or {}
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
        except yaml.YAMLError as exc:
            raise ConfigError(f"config {path} is not valid YAML: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError(f"config {path} must be a flat key: value mapping")
    cfg = {}
    for key, value in raw.items():
        if key not in KEYS:
            raise ConfigError(f"unknown config key '{key}'")
        check = KEYS[key][0]
        try:
            cfg[key] = check(value)
        except ValueError as exc:
            raise ConfigError(f"config key '{key}' {exc} (got {value!r})") from None
    for key, (_, default) in KEYS.items():
        cfg.setdefault(key, default)
    if cfg["dt"] >= cfg["T"]:
        raise ConfigError(f"config key 'dt' must be smaller than T (got dt={cfg['dt']}, T={cfg['T']})")
    return cfg


def _header(args) -> str | None:
    if args.no_header:
        return None
    stamp = datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")
    return f"wwbnf {__version__} {args.command} {stamp}"


def _outdir(args, cfg) -> Path:
    out = Path(args.out or cfg["output_dir"])
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc.strerror}") from exc
    return out


def _write_text(path: Path, text: str) -> None:
    try:
        path.write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror}") from exc


# subcommands ------------------------------------------------------------------------


def cmd_expand(args, cfg) -> int:
    out = _outdir(args, cfg)
    head = _header(args)
    for d in (2, 3, 4):
        H = build_hamiltonian(cfg["M"], d)
        text = ("# " + head + "\n" if head else "") + H.to_text()
        _write_text(out / f"H{d}.txt", text)
        print(f"H{d}: {len(H)} terms -> {out / f'H{d}.txt'}")
    return EXIT_OK


def cmd_resonances(args, cfg) -> int:
    out = _outdir(args, cfg)
    head = _header(args)
    N, mode = cfg["N"], cfg["mode"]
    if mode == "cubic-min":
        val, t = min_cubic_phase(N)
        print(f"min_abs_phase={val!r} signs={t.signs} modes={t.modes}")
        return EXIT_OK
    path = out / f"resonances_{mode}.csv"
    with open(path, "w", newline="") as fh:
        if head:
            fh.write(f"# {head}\n")
        w = csv.writer(fh)
        if mode == "enumerate":
            rows = enumerate_quartic(N, threads=args.threads)
            w.writerow(["s1", "n1", "s2", "n2", "s3", "n3", "s4", "n4", "class", "lambda", "b"])
            other = 0
            for t, cls in rows:
                if cls.kind == "BenjaminFeir":
                    t = benjamin_feir(cls.lam, cls.b)
                other += cls.kind == "Other"
                pairs = [x for sn in zip(t.signs, t.modes) for x in sn]
                w.writerow(pairs + [cls.kind, cls.lam or "", cls.b or ""])
            print(f"{len(rows)} resonant classes, {other} Other -> {path}")
            return EXIT_OK if other == 0 else EXIT_FAIL
        scan = small_divisor_scan(N, cfg["bucket"], threads=args.threads)
        w.writerow(["max_bucket", "min_abs_phase", "count_tuples"])
        for b, m, c in scan.rows():
            w.writerow([b, repr(m), c])
    print(f"fitted N0={scan.exponent!r} c={scan.constant!r} -> {path}")
    return EXIT_OK if bool(np.all(scan.min_abs_phase > 0)) else EXIT_FAIL


def cmd_birkhoff_verify(args, cfg) -> int:
    out = _outdir(args, cfg)
    M = cfg["M"]
    nf = compute_normal_form(M, threads=args.threads)
    rep = verify_identity(M, cfg["tol"], normal_form=nf, null_tol=cfg["null_tol"])
    text = rep.to_json()
    _write_text(out / "birkhoff_report.json", text + "\n")
    print(text)
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_simulate(args, cfg) -> int:
    out = _outdir(args, cfg)
    icfg = IntegratorConfig(cfg["scheme"], cfg["dt"], cfg["T"], cfg["record_every"], (cfg["s"],))
    u0 = random_initial(cfg["epsilon"], cfg["s"], cfg["M"], cfg["seed"])
    path = out / f"trajectory_{cfg['system']}.csv"
    try:
        if cfg["system"] == "zd":
            rec = integrate_zd_numeric(u0, icfg)
        else:
            rec = integrate_ww(u0, cfg["degree"], icfg)
    except BlowupError as exc:
        exc.record.to_csv(path, with_actions=cfg["actions"], header=_header(args))
        print(f"aborted: {exc}; partial trajectory -> {path}", file=sys.stderr)
        return EXIT_ABORT
    rec.to_csv(path, with_actions=cfg["actions"], header=_header(args))
    print(f"energy drift {rec.relative_drift('energy'):.3e}, momentum drift {rec.momentum_drift():.3e} -> {path}")
    return EXIT_OK


def cmd_coeffs(args, cfg) -> int:
    tol = cfg["tol"]
    probes = [
        ("V1", lambda n: extract_bilinear("V1", n), "V1"),
        ("a1", lambda n: extract_bilinear("a1", n), "a1"),
        ("F2+-(n,-n)", lambda n: extract_bilinear("F2", n, 1, -n, -1), "F2_n_-n"),
        ("V2+-(n,n)", lambda n: extract_bilinear("V2", n, 1, n, -1), "V2_n_n"),
        ("V2+-(n,-n)", lambda n: extract_bilinear("V2", n, 1, -n, -1), "V2_n_-n"),
        ("a2+-(n,n)", lambda n: extract_bilinear("a2", n, 1, n, -1), "a2_n_n"),
    ]
    worst = 0.0
    w = csv.writer(sys.stdout)
    w.writerow(["n", "coefficient", "extracted_re", "extracted_im", "closed_form", "abs_err"])
    for n in range(1, cfg["n_max"] + 1):
        ref = closed_form_coefficients(n)
        for name, fn, key in probes:
            v = fn(n)
            err = abs(v - ref[key])
            worst = max(worst, err)
            w.writerow([n, name, repr(v.real), repr(v.imag), repr(float(ref[key])), repr(err)])
    print(f"# max abs error {worst:.3e} (tol {tol:g})", file=sys.stderr)
    return EXIT_OK if worst <= tol else EXIT_FAIL


COMMANDS = {
    "expand": (cmd_expand, "write H2/H3/H4 term dumps"),
    "resonances": (cmd_resonances, "quartic resonance enumeration, cubic minimum or small-divisor scan"),
    "birkhoff-verify": (cmd_birkhoff_verify, "check the quartic normal form against the closed form"),
    "simulate": (cmd_simulate, "integrate the truncated water-waves or ZD flow"),
    "coeffs": (cmd_coeffs, "probe expansion coefficients against closed forms"),
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="wwbnf",
        description="Birkhoff normal form tools for deep-water gravity waves.",
        epilog=__doc__.split("\n\n", 1)[1],
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name, (_, help_) in COMMANDS.items():
        sp = sub.add_parser(name, help=help_, description=help_)
        sp.add_argument("--config", help="flat YAML config file (see wwbnf --help for keys)")
        sp.add_argument("--out", help="output directory (default: output_dir key or .)")
        sp.add_argument("--no-header", action="store_true", help="omit the version/timestamp comment line")
        sp.add_argument("--threads", type=int, default=1, help="worker threads for resonance scans")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.threads < 1:
        print("error: --threads must be positive", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    fn = COMMANDS[args.command][0]
    try:
        return fn(args, cfg)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ABORT
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
