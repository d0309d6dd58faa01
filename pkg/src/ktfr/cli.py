"""Command-line front end.

Exit codes: 0 success, 1 configuration error, 2 usage error (argparse,
including an unknown subcommand), 3 ``compare`` above ``--tol``.

Settings may come from ``--config FILE``: an INI file whose ``[common]``
section applies to every subcommand and whose ``[<subcommand>]`` section
applies to one.  Keys are flag names with dashes or underscores
(``base_sigma_t = 2.0``).  Command-line flags override the file.
"""
from __future__ import annotations

import argparse
import configparser
import csv
import io
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import _backend
from .diagnostics import interference_report, lipschitz_bound, logon_summary
from .kernels import KernelGrid, read_grid_csv
from .ktransform import default_base, k_equivariant, k_exact, k_fast
from .presets import PRESETS, Preset, preset_params, preset_table
from .signal import Signal, load_wav, parse_spec, synth
from .stft import BaseSmoothing, smoothed_pwvd
from .tfr import TFRMatrix, write_csv, write_pgm

EXIT_OK, EXIT_CONFIG, EXIT_USAGE, EXIT_TOL = 0, 1, 2, 3
COMMANDS = ("transform", "compare", "diagnose", "bench", "train", "presets")


class ConfigError(ValueError):
    pass


# ------------------------------------------------------------------ parser --

def _common(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("input")
    g.add_argument("--input", help="16-bit PCM mono WAV file")
    g.add_argument("--spec", help="signal spec, e.g. tone:0.5pi, noise:seed=7, chirp:0.1pi,0.8pi")
    g.add_argument("--length", type=int, default=128, help="samples for --spec signals")
    g.add_argument("--no-analytic", action="store_true", help="skip analytic conversion")
    k = p.add_argument_group("kernels")
    k.add_argument("--preset", choices=PRESETS, help="preset kernel grid")
    k.add_argument("--kernels", help="KernelGrid CSV (overrides --preset)")
    k.add_argument("--sigma", type=float, default=3.0, help="preset sigma_t / sigma0")
    k.add_argument("--S", type=float, default=2.0, help="preset largest scale exponent")
    k.add_argument("--widen", type=float, default=2.0, help="scattering time widening")
    k.add_argument("--chirp", type=float, default=0.5, help="chirpogram correlation")
    k.add_argument("--freqs", type=int, help="output frequency bins (default: length)")
    k.add_argument("--base-sigma-t", type=float, help="base smoothing time spread")
    k.add_argument("--base-sigma-f", type=float, help="base smoothing frequency spread")
    k.add_argument("--hop", type=int, default=1, help="fast-path time step")
    o = p.add_argument_group("output")
    o.add_argument("--out", help="output path")
    o.add_argument("--format", choices=("csv", "pgm", "both"), default="csv")
    o.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ktfr", description="Gaussian-kernel Wigner-Ville transforms")
    ap.add_argument("--config", help="INI file with [common] and per-subcommand sections")
    sub = ap.add_subparsers(dest="command", metavar="{" + ",".join(COMMANDS) + "}")
    sub.required = True

    p = sub.add_parser("transform", help="compute a K-transform")
    _common(p)
    p.add_argument("--method", choices=("exact", "fast", "equivariant"), default="exact")

    p = sub.add_parser("compare", help="exact vs fast relative error")
    _common(p)
    p.add_argument("--tol", type=float, default=1e-2)

    p = sub.add_parser("diagnose", help="interference, logon and Lipschitz report")
    _common(p)
    p.add_argument("--kernels2", help="second KernelGrid CSV for the Lipschitz pair")
    p.add_argument("--perturb", type=float, default=1e-3,
                   help="relative spread perturbation when --kernels2 is absent")

    p = sub.add_parser("bench", help="smoothed_pwvd wall time vs base smoothing")
    _common(p)
    p.set_defaults(length=4096, hop=16, freqs=512)
    p.add_argument("--products", default="0.05,0.1,0.2,0.4,1.0",
                   help="comma list of sigma_t_base * sigma_f_base")
    p.add_argument("--repeat", type=int, default=3)

    p = sub.add_parser("train", help="learn kernels on the up/down chirp task")
    _common(p)
    p.set_defaults(length=512, preset="chirpogram")
    p.add_argument("--epochs", type=int, default=200)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--n-train", type=int, default=200)
    p.add_argument("--n-test", type=int, default=100)
    p.add_argument("--batch-size", type=int, default=0)
    p.add_argument("--curve", help="loss-curve CSV (default: <out>_curve.csv)")

    p = sub.add_parser("presets", help="print a preset's kernel table")
    p.add_argument("--name", choices=PRESETS, required=True)
    p.add_argument("--freqs", type=int, default=8)
    p.add_argument("--S", type=float, default=2.0)
    p.add_argument("--sigma0", "--sigma", dest="sigma", type=float, default=3.0)
    p.add_argument("--widen", type=float, default=2.0)
    p.add_argument("--chirp", type=float, default=0.5)
    p.add_argument("--out")
    return ap


def _apply_config(ap: argparse.ArgumentParser, argv: list[str]) -> None:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, rest = pre.parse_known_args(argv)
    if not known.config:
        return
    path = Path(known.config)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    cfg = configparser.ConfigParser()
    try:
        cfg.read(path)
    except configparser.Error as e:
        raise ConfigError(f"{path}: {e}") from None
    cmd = next((a for a in rest if a in COMMANDS), None)
    if cmd is None:
        return
    sub = next(a for a in ap._actions if isinstance(a, argparse._SubParsersAction)).choices[cmd]
    actions = {a.dest: a for a in sub._actions}
    values = {}
    for section in ("common", cmd):
        if cfg.has_section(section):
            for key, raw in cfg.items(section, raw=True):
                dest = key.replace("-", "_")
                if dest not in actions:
                    if section == "common":
                        continue
                    raise ConfigError(f"{path}: unknown key {key!r} in [{section}]")
                a = actions[dest]
                try:
                    if isinstance(a, argparse._StoreTrueAction):
                        v = cfg.getboolean(section, key)
                    else:
                        v = a.type(raw) if a.type else raw
                except ValueError:
                    raise ConfigError(f"{path}: bad value {raw!r} for {key}") from None
                if a.choices and v not in a.choices:
                    raise ConfigError(f"{path}: {key} must be one of {', '.join(a.choices)}")
                values[dest] = v
    sub.set_defaults(**values)


# ----------------------------------------------------------------- helpers --

def _signal(a) -> Signal:
    if a.input and a.spec:
        raise ConfigError("give either --input or --spec, not both")
    if a.input:
        if not Path(a.input).is_file():
            raise ConfigError(f"input file not found: {a.input}")
        return load_wav(a.input)
    if a.spec:
        if a.length < 2:
            raise ConfigError("--length must be >= 2")
        return synth(parse_spec(a.spec, a.length))
    raise ConfigError("no input: use --input FILE or --spec SPEC")


def _grid(a, n: int) -> KernelGrid:
    if a.kernels:
        if not Path(a.kernels).is_file():
            raise ConfigError(f"kernel file not found: {a.kernels}")
        return read_grid_csv(a.kernels)
    if not a.preset:
        raise ConfigError("no kernels: use --preset NAME or --kernels FILE")
    f_out = a.freqs or n
    if f_out < 1:
        raise ConfigError("--freqs must be >= 1")
    return preset_params(Preset(a.preset, a.sigma, a.S, a.widen, a.chirp), n, f_out)


def _base(a, grid: KernelGrid) -> BaseSmoothing:
    if (a.base_sigma_t is None) != (a.base_sigma_f is None):
        raise ConfigError("give both --base-sigma-t and --base-sigma-f, or neither")
    if a.base_sigma_t is None:
        return default_base(grid)
    return BaseSmoothing(a.base_sigma_t, a.base_sigma_f)


def _write_tfr(k: TFRMatrix, a, default: str) -> list[str]:
    out = Path(a.out or default)
    written = []
    if a.format in ("csv", "both"):
        p = out if out.suffix == ".csv" else out.with_suffix(".csv")
        write_csv(p, k)
        written.append(str(p))
    if a.format in ("pgm", "both"):
        p = out.with_suffix(".pgm")
        side = write_pgm(p, k)
        written += [str(p), str(side)]
    return written


def _kv_lines(d: dict) -> str:
    return "\n".join(f"{k}={_fmtv(v)}" for k, v in d.items())


def _fmtv(v) -> str:
    if isinstance(v, float):
        return format(v, ".10g")
    return str(v)


def _write_kv(path, d: dict) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["key", "value"])
        for k, v in d.items():
            w.writerow([k, _fmtv(v)])


# ---------------------------------------------------------------- commands --

def cmd_transform(a) -> int:
    x = _signal(a)
    grid = _grid(a, x.n)
    convert = not a.no_analytic
    if a.method == "exact":
        k = k_exact(x, grid, convert=convert)
    elif a.method == "fast":
        k = k_fast(x, grid, _base(a, grid), convert=convert, hop=a.hop)
    else:
        k = k_equivariant(x, grid, convert=convert)
    for p in _write_tfr(k, a, "ktfr_out.csv"):
        print(f"wrote {p}")
    return EXIT_OK


def relative_errors(ref: np.ndarray, other: np.ndarray) -> tuple[float, float]:
    """Max and mean of ``|other - ref|`` over ``max |ref|``."""
    scale = float(np.max(np.abs(ref)))
    if scale == 0:
        d = float(np.max(np.abs(other)))
        return d, float(np.mean(np.abs(other)))
    diff = np.abs(other - ref) / scale
    return float(diff.max()), float(diff.mean())


def cmd_compare(a) -> int:
    x = _signal(a)
    grid = _grid(a, x.n)
    convert = not a.no_analytic
    base = _base(a, grid)
    exact = k_exact(x, grid, convert=convert)
    fast = k_fast(x, grid, base, convert=convert, hop=a.hop)
    mx, mean = relative_errors(exact.values, fast.values)
    rep = {"max_rel_error": mx, "mean_rel_error": mean, "tol": a.tol,
           "base_sigma_t": base.sigma_t_base, "base_sigma_f": base.sigma_f_base,
           "passes": mx <= a.tol}
    print(_kv_lines(rep))
    if a.out:
        _write_kv(a.out, rep)
    return EXIT_OK if mx <= a.tol else EXIT_TOL


def _perturbed(grid: KernelGrid, scale: float, seed: int) -> KernelGrid:
    rng = np.random.default_rng(seed)
    st = grid.sigma_t * np.exp(scale * rng.standard_normal(grid.sigma_t.shape))
    sf = grid.sigma_f * np.exp(scale * rng.standard_normal(grid.sigma_f.shape))
    rho = grid.rho * st * sf / (grid.sigma_t * grid.sigma_f)
    return KernelGrid(grid.time_axis, grid.freq_axis, grid.mu_f, st, sf, rho,
                      mu_t=None if grid.shared else grid.mu_t, shared=grid.shared, meta=grid.meta)


def cmd_diagnose(a) -> int:
    x = _signal(a)
    grid = _grid(a, x.n)
    convert = not a.no_analytic
    k = k_exact(x, grid, convert=convert)
    rep = {f"interference.{k_}": v for k_, v in interference_report(k).items()}
    rep.update({f"logon.{k_}": v for k_, v in logon_summary(grid).items()})
    if a.kernels2:
        if not Path(a.kernels2).is_file():
            raise ConfigError(f"kernel file not found: {a.kernels2}")
        g2 = read_grid_csv(a.kernels2)
    else:
        g2 = _perturbed(grid, a.perturb, a.seed)
    rep.update({f"lipschitz.{k_}": v for k_, v in lipschitz_bound(grid, g2, x, convert=convert).items()})
    print(_kv_lines(rep))
    if a.out:
        _write_kv(a.out, rep)
    return EXIT_OK


def bench_sweep(x: Signal, products, hop: int, n_freq: int, repeat: int = 3,
                sigma_t: float | None = None) -> list[dict]:
    """Wall time of ``smoothed_pwvd`` as the base product grows at fixed
    ``sigma_t``; the minimum over ``repeat`` runs is reported."""
    st = sigma_t if sigma_t is not None else 8.0
    rows = []
    for prod in products:
        base = BaseSmoothing(st, prod / st)
        best = math.inf
        for _ in range(max(1, repeat)):
            t0 = time.perf_counter()
            smoothed_pwvd(x, base, hop=hop, n_freq=n_freq)
            best = min(best, time.perf_counter() - t0)
        rows.append({"sigma_t_base": st, "sigma_f_base": prod / st, "product": prod,
                     "seconds": best})
    return rows


def cmd_bench(a) -> int:
    x = _signal(a) if (a.input or a.spec) else synth(parse_spec(f"noise:seed={a.seed}", a.length))
    try:
        products = [float(v) for v in a.products.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"bad --products {a.products!r}") from None
    if len(products) < 2 or any(p <= 0 or p > 1 for p in products):
        raise ConfigError("--products needs >= 2 values in (0, 1]")
    rows = bench_sweep(x, sorted(products), a.hop, a.freqs or 512, a.repeat, a.base_sigma_t)
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: _fmtv(v) for k, v in r.items()})
    print(f"# backend={_backend.name()} threads={_backend.threads()} n={x.n}")
    print(buf.getvalue(), end="")
    secs = [r["seconds"] for r in rows]
    mono = all(b <= a_ for a_, b in zip(secs, secs[1:]))
    print(f"# non_increasing={mono} speedup={secs[0] / secs[-1]:.2f}")
    if a.out:
        Path(a.out).write_text(buf.getvalue())
    return EXIT_OK


def cmd_train(a) -> int:
    from .learn.data import chirp_task
    from .learn.io import write_checkpoint, write_curve
    from .learn.train import TrainConfig, train

    if a.epochs < 0 or a.lr < 0:
        raise ConfigError("--epochs and --lr must be >= 0")
    if a.length < 64:
        raise ConfigError("--length must be >= 64 for the chirp task")
    cfg = TrainConfig(learning_rate=a.lr, epochs=a.epochs, batch_size=a.batch_size, seed=a.seed)
    tr, te = chirp_task(a.n_train, a.n_test, a.length, a.seed)
    init = Preset(a.preset, a.sigma, a.S, a.widen, a.chirp) if a.preset else None
    res = train(tr, te, cfg, init)
    out = Path(a.out or "ktfr_checkpoint.csv")
    curve = Path(a.curve) if a.curve else out.with_name(out.stem + "_curve.csv")
    write_checkpoint(out, res.model, cfg)
    write_curve(curve, res.curve)
    print(f"initial_accuracy={res.initial_accuracy:.4f}")
    print(f"test_accuracy={res.test_accuracy:.4f}")
    if res.curve:
        print(f"final_train_loss={res.curve[-1][1]:.6f}")
    print(f"wrote {out}\nwrote {curve}")
    return EXIT_OK


def cmd_presets(a) -> int:
    if a.freqs < 1:
        raise ConfigError("--freqs must be >= 1")
    rows = preset_table(Preset(a.name, a.sigma, a.S, a.widen, a.chirp), a.freqs)
    buf = io.StringIO()
    fields = ["f", "scale", "mu_t", "mu_f", "sigma_t", "sigma_f", "rho", "sigma_t_sigma_f"]
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    for r in rows:
        r = dict(r, sigma_t_sigma_f=r["sigma_t"] * r["sigma_f"])
        w.writerow({k: _fmtv(v) for k, v in r.items()})
    print(buf.getvalue(), end="")
    if a.out:
        Path(a.out).write_text(buf.getvalue())
    return EXIT_OK


HANDLERS = {"transform": cmd_transform, "compare": cmd_compare, "diagnose": cmd_diagnose,
            "bench": cmd_bench, "train": cmd_train, "presets": cmd_presets}


def run_cli(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    ap = build_parser()
    try:
        _apply_config(ap, argv)
        a = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code not in (0, None) else EXIT_OK
    except ConfigError as e:
        print(f"ktfr: config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return HANDLERS[a.command](a)
    except (ConfigError, ValueError, OSError) as e:
        print(f"ktfr: config error: {e}", file=sys.stderr)
        return EXIT_CONFIG


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
