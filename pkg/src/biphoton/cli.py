"""Command-line front end.

    biphoton sweep    --config run.ini --out curve.csv [--plot curve.png]
    biphoton chsh     --set scenario=recovery --set L1=195 --set L2=195
    biphoton tomo     --set scenario=bell --set N=1000000 --seed 1
    biphoton validate

Exit codes: 0 success, 1 validation failure, 2 usage/config error, 3 I/O error.
"""

import argparse
from dataclasses import dataclass
import logging
import sys

import numpy as np

from . import optics, oracle
from .scenarios import (ExperimentConfig, SigmaConvention, build_state,
                        make_spectrum, pipeline_a, pipeline_esd,
                        pipeline_partial, pipeline_recovery, scenario_a, scenario_esd,
                        scenario_recovery, sweep)
from .states import bell_density, concurrence, horodecki_Smax, maximize_chsh_linear
from .tomo import ProjectionSet, mc_error

log = logging.getLogger("biphoton")

EXIT_OK, EXIT_VALIDATION, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3


class ConfigError(Exception):
    def __init__(self, key, msg, line=None):
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"{key}{where}: {msg}")
        self.key, self.line = key, line


def _positive(x):
    return x > 0


def _nonneg(x):
    return x >= 0


def _bool(text):
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _int(text):
    v = float(text)
    if not v.is_integer():
        raise ValueError(f"not an integer: {text!r}")
    return int(v)


def _optional_float(text):
    return None if text.strip().lower() in ("", "none") else float(text)


SCENARIO_CHOICES = ("bell", "a", "recovery", "esd")
CONVENTIONS = tuple(c.value for c in SigmaConvention)

# key -> (parser, range check or allowed values, description of the range)
SCHEMA = {
    "scenario": (str, SCENARIO_CHOICES, None),
    "lambda0_nm": (float, _positive, "> 0"),
    "delta_n": (float, lambda x: 0 < x < 1, "in (0, 1)"),
    "bandwidth_nm": (float, _positive, "> 0"),
    "sigma_convention": (str, CONVENTIONS, None),
    "sigma": (_optional_float, lambda x: x is None or x > 0, "> 0"),
    "La": (float, _nonneg, ">= 0"),
    "L1": (float, _nonneg, ">= 0"),
    "L2": (float, _nonneg, ">= 0"),
    "L2_start": (float, _nonneg, ">= 0"),
    "L2_stop": (float, _nonneg, ">= 0"),
    "L2_step": (float, _positive, "> 0"),
    "with_chsh": (_bool, None, None),
    "N": (_int, _positive, "> 0"),
    "trials": (_int, lambda x: x >= 2, ">= 2"),
    "jitter_deg": (float, _nonneg, ">= 0"),
    "seed": (_int, lambda x: 0 <= x < 2 ** 64, "in [0, 2^64)"),
    "tol_characteristic": (float, _positive, "> 0"),
    "tol_reduce": (float, _positive, "> 0"),
    "validate_points": (_int, lambda x: x >= 1, ">= 1"),
    "out": (str, None, None),
    "plot": (str, None, None),
}


@dataclass
class CliConfig:
    scenario: str = "recovery"
    lambda0_nm: float = 800.0
    delta_n: float = 0.01
    bandwidth_nm: float = 3.0
    sigma_convention: str = SigmaConvention.DIRECT_SIGMA.value
    sigma: float = None
    La: float = 0.0
    L1: float = 0.0
    L2: float = 0.0
    L2_start: float = 0.0
    L2_stop: float = 1200.0
    L2_step: float = 1.0
    with_chsh: bool = False
    N: int = 1_000_000
    trials: int = 100
    jitter_deg: float = 0.0
    seed: int = 0
    tol_characteristic: float = 1e-9
    tol_reduce: float = 1e-9
    validate_points: int = 20
    out: str = None
    plot: str = None

    def experiment(self):
        return ExperimentConfig(
            lambda0=self.lambda0_nm * 1e-9, delta_n=self.delta_n,
            bandwidth_nm=self.bandwidth_nm, sigma_convention=self.sigma_convention,
            sigma=self.sigma, L_a=self.La, L_1=self.L1, L_2=self.L2)


def set_value(cfg, key, text, line=None):
    if key not in SCHEMA:
        raise ConfigError(key, "unknown key", line)
    parse, check, desc = SCHEMA[key]
    text = text.strip()
    try:
        value = parse(text)
    except ValueError:
        raise ConfigError(key, f"malformed value {text!r}", line) from None
    if isinstance(check, tuple):
        if value not in check:
            raise ConfigError(key, f"must be one of {', '.join(check)}", line)
    elif check is not None and not check(value):
        raise ConfigError(key, f"value {text} out of range (must be {desc})", line)
    setattr(cfg, key, value)


def parse_config(text, cfg=None):
    """Parse flat ``key = value`` lines; ``#`` starts a comment."""
    cfg = cfg or CliConfig()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(line, "expected 'key = value'", lineno)
        key, value = line.split("=", 1)
        set_value(cfg, key.strip(), value, lineno)
    return cfg


# -- commands ---------------------------------------------------------------

def _state_for(cfg):
    exp = cfg.experiment()
    if cfg.scenario == "bell":
        return bell_density()
    if cfg.scenario == "a":
        return scenario_a(exp, cfg.L1).rho
    if cfg.scenario == "recovery":
        return scenario_recovery(exp, cfg.L1, cfg.L2).rho
    return scenario_esd(exp, cfg.La, cfg.L1, cfg.L2).rho


def _format_matrix(m):
    rows = []
    for row in m:
        cells = []
        for z in row:
            re, im = z.real, z.imag
            # avoid '-0.000000' which depends on rounding noise
            re = 0.0 if abs(re) < 5e-13 else re
            im = 0.0 if abs(im) < 5e-13 else im
            cells.append(f"{re:+.6f}{im:+.6f}j")
        rows.append("  [" + "  ".join(cells) + "]")
    return "\n".join(rows)


def run_sweep_command(cfg, stdout):
    if cfg.scenario == "bell":
        raise ConfigError("scenario", "sweep needs one of a, recovery, esd")
    result = sweep(cfg.experiment(), cfg.scenario, cfg.L2_start, cfg.L2_stop,
                   cfg.L2_step, cfg.with_chsh)
    text = result.to_csv()
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    if cfg.plot:
        from .plotting import render_sweep
        render_sweep(result, cfg.plot)
    return EXIT_OK


def run_chsh_command(cfg, stdout):
    rho = _state_for(cfg)
    setting, s_max = maximize_chsh_linear(rho)
    lines = [
        f"scenario: {cfg.scenario}  La={cfg.La:g} L1={cfg.L1:g} L2={cfg.L2:g}",
        "rho (basis HH, HV, VH, VV):",
        _format_matrix(rho.m),
        f"concurrence: {concurrence(rho):.6f}",
        "linear angles (deg): theta1={:.2f} theta1'={:.2f} theta2={:.2f} theta2'={:.2f}".format(
            *setting.as_tuple()),
        f"S_max (linear polarizers): {s_max:.4f}",
        f"S_max bound (all projective): {horodecki_Smax(rho):.4f}",
        f"violates CHSH: {'yes' if s_max > 2 else 'no'}",
    ]
    stdout.write("\n".join(lines) + "\n")
    return EXIT_OK


def run_tomo_command(cfg, stdout):
    rho = _state_for(cfg)
    ps = ProjectionSet.standard()
    res = mc_error(rho, ps, cfg.N, cfg.trials, cfg.seed, cfg.jitter_deg)
    lines = [
        f"scenario: {cfg.scenario}  La={cfg.La:g} L1={cfg.L1:g} L2={cfg.L2:g}",
        f"N={cfg.N} trials={cfg.trials} jitter_deg={cfg.jitter_deg:g} seed={cfg.seed}",
        f"true concurrence: {concurrence(rho):.6f}",
        f"concurrence: {res.concurrence_mean:.6f} +- {res.concurrence_std:.6f}",
        f"S_max: {res.s_mean:.6f} +- {res.s_std:.6f}",
    ]
    stdout.write("\n".join(lines) + "\n")
    return EXIT_OK


def validation_checks(cfg):
    """Oracle-vs-closed-form comparisons. Returns [(name, max_error, tolerance)]."""
    exp = cfg.experiment()
    sp = make_spectrum(exp)
    grid = oracle.QuadratureGrid()

    worst = 0.0
    for x in np.linspace(0.0, 10.0, 200):
        da = x / sp.sigma
        closed = optics.gaussian_characteristic(da, sp)
        numeric = oracle.numeric_characteristic(da, sp, grid)
        worst = max(worst, abs(closed - numeric) / abs(numeric))
    checks = [("characteristic", worst, cfg.tol_characteristic)]

    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    pipelines = {
        "a": lambda La, L1, L2: pipeline_a(exp, L1),
        "recovery": lambda La, L1, L2: pipeline_recovery(exp, L1, L2),
        "partial": lambda La, L1, L2: pipeline_partial(exp, La),
        "esd": lambda La, L1, L2: pipeline_esd(exp, La, L1, L2),
    }
    worst_r = {name: 0.0 for name in pipelines}
    for _ in range(cfg.validate_points):
        La, L1, L2 = rng.uniform(0.0, 1000.0, size=3)
        for name, make in pipelines.items():
            s = build_state(make(La, L1, L2))
            r1, p1 = optics.reduce(s, sp, sp)
            r2, p2 = oracle.numeric_reduce(s, sp, sp, grid)
            err = max(float(np.max(np.abs(r1.m - r2.m))), abs(p1 - p2))
            worst_r[name] = max(worst_r[name], err)
    checks += [(f"reduce:{name}", err, cfg.tol_reduce) for name, err in worst_r.items()]
    return checks


def run_validate_command(cfg, stdout):
    failed = []
    for name, err, tol in validation_checks(cfg):
        ok = err < tol
        stdout.write(f"{'PASS' if ok else 'FAIL'} {name}: max error {err:.3e} (tol {tol:.1e})\n")
        if not ok:
            failed.append(name)
    if failed:
        stdout.write("validation failed: " + ", ".join(failed) + "\n")
        return EXIT_VALIDATION
    stdout.write("all checks passed\n")
    return EXIT_OK


COMMANDS = {
    "sweep": run_sweep_command,
    "chsh": run_chsh_command,
    "tomo": run_tomo_command,
    "validate": run_validate_command,
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value configuration file")
    common.add_argument("--out", help="output path (default: standard output)")
    common.add_argument("--seed", help="random seed (unsigned 64-bit)")
    common.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override one configuration key; may be repeated")
    common.add_argument("--plot", help="sweep only: also render a PNG figure to this path")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(
        prog="biphoton",
        description="Measurement-induced entanglement recovery simulator.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=fn.__name__.replace("_", " "))
    return parser


def load_config(args):
    cfg = CliConfig()
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError("config", f"cannot read {args.config}: {exc.strerror}") from None
        parse_config(text, cfg)
    for item in args.set:
        if "=" not in item:
            raise ConfigError(item, "expected --set key=value")
        key, value = item.split("=", 1)
        set_value(cfg, key.strip(), value)
    if args.seed is not None:
        set_value(cfg, "seed", args.seed)
    if args.out is not None:
        cfg.out = args.out
    if args.plot is not None:
        cfg.plot = args.plot
    return cfg


def main(argv=None, stdout=None):
    stdout = stdout or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    try:
        cfg = load_config(args)
        cfg.experiment()
    except ConfigError as exc:
        log.error("config error: %s", exc)
        return EXIT_USAGE
    except ValueError as exc:
        log.error("config error: %s", exc)
        return EXIT_USAGE
    try:
        return COMMANDS[args.command](cfg, stdout)
    except ConfigError as exc:
        log.error("config error: %s", exc)
        return EXIT_USAGE
    except OSError as exc:
        log.error("I/O error: %s", exc)
        return EXIT_IO


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
