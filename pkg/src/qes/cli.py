"""Command-line front end: ``qes <command> [options]``.

Exit codes: 0 on success, 1 on usage or runtime errors, 2 when the QES
integer condition does not hold for the requested parameters.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction

import numpy as np

from .models import Family, ModelSpec, QESConditionError, check_qes, to_fraction

COMMANDS = ("spectrum", "bd", "verify", "antiiso", "sl2", "reconcile", "sweep")

# documented defaults; keys double as the accepted --config keys
DEFAULTS = {
    "family": "complex-dshg",
    "branch": "i",
    "a": None,
    "M": None,
    "l": None,
    "g": "0",
    "sector": 0,
    "strict": False,
    "n": None,
    "n_max": None,
    "root_tol": 1e-10,
    "residual_tol": 1e-7,
    "n_points": 4000,
    "x_max": 8.0,
    "k": 8,
    "param": None,
    "start": None,
    "stop": None,
    "steps": None,
    "format": "json",
    "out": None,
}
CONFIG_VERSION = 1

SWEEP_HEADER = ("index", "a", "l", "g", "M", "status", "p", "energies", "classes",
                "max_residual")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    S = argparse.SUPPRESS
    common.add_argument("--config", help="JSON config file; explicit flags take precedence")
    common.add_argument("--family", default=S,
                        choices=[f.cli_name for f in Family], help="model family")
    common.add_argument("--branch", default=S, help="exponent branch (i, ii, iii, iv)")
    common.add_argument("--a", default=S, help="coupling a > 0")
    common.add_argument("--M", default=S, help="shift parameter M")
    common.add_argument("--l", default=S, help="centrifugal parameter l")
    common.add_argument("--g", default=S, help="second centrifugal parameter (V3)")
    common.add_argument("--sector", type=int, default=S, help="parity sector s (V1, V2)")
    common.add_argument("--strict", action="store_true", default=S,
                        help="exact mode: refuse float parameters, no M snapping")
    common.add_argument("--root-tol", dest="root_tol", type=float, default=S)
    common.add_argument("--residual-tol", dest="residual_tol", type=float, default=S)
    common.add_argument("--format", choices=("json", "csv", "table"), default=S)
    common.add_argument("--out", default=S, help="output file (default: stdout)")

    p = _Parser(prog="qes", description="Quasi-exactly solvable DSHG/DSG spectra and checks")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True
    for name in COMMANDS:
        sp = sub.add_parser(name, parents=[common])
        if name == "bd":
            sp.add_argument("--n-max", dest="n_max", type=int, default=S,
                            help="highest polynomial index (default p+3)")
        if name == "verify":
            sp.add_argument("--n-points", dest="n_points", type=int, default=S)
            sp.add_argument("--x-max", dest="x_max", type=float, default=S)
            sp.add_argument("--k", type=int, default=S, help="FD eigenvalues to compute")
        if name == "sl2":
            sp.add_argument("--n", type=int, default=S, help="representation label n >= 0")
        if name == "sweep":
            sp.add_argument("--param", choices=("a", "l", "g", "M"), default=S)
            sp.add_argument("--from", dest="start", default=S)
            sp.add_argument("--to", dest="stop", default=S)
            sp.add_argument("--steps", type=int, default=S)
    return p


def resolve_config(ns: argparse.Namespace) -> dict:
    """defaults < config file < flags; unknown config keys are rejected."""
    cfg = dict(DEFAULTS)
    if getattr(ns, "config", None):
        with open(ns.config) as fh:
            data = json.load(fh)
        if not isinstance(data, dict):
            raise UsageError("config file must hold a JSON object")
        data = dict(data)
        version = data.pop("version", CONFIG_VERSION)
        if version != CONFIG_VERSION:
            raise UsageError(f"unsupported config version {version}")
        data.pop("command", None)
        unknown = sorted(set(data) - set(DEFAULTS))
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(unknown)}")
        cfg.update(data)
    for key, val in vars(ns).items():
        if key in DEFAULTS:
            cfg[key] = val
    cfg["command"] = ns.command
    return cfg


def _param(cfg: dict, name: str, required: bool = True):
    v = cfg.get(name)
    if v is None:
        if required:
            raise UsageError(f"missing required parameter --{name}")
        return None
    if isinstance(v, float):
        v = repr(v)
    return str(v)


def spec_from_config(cfg: dict) -> ModelSpec:
    fam = Family.parse(cfg["family"])
    a, l = _param(cfg, "a"), _param(cfg, "l")
    M = _param(cfg, "M", required=cfg["command"] != "sl2")
    if M is None:
        n = cfg.get("n")
        if n is None:
            raise UsageError("sl2 needs --n (or --M)")
        M = str(2 * n + 2 * to_fraction(l) + 3)
    try:
        return ModelSpec(fam, a, M, l, _param(cfg, "g"), cfg["branch"], int(cfg["sector"]),
                         bool(cfg["strict"]))
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from exc


# output helpers

def _cnum(z) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def _dec(x: float) -> str:
    """Plain decimal; exponent form only for magnitudes below 1e-4."""
    x = float(x)
    if not np.isfinite(x):
        return str(x)
    if x == 0:
        return "0"
    if abs(x) < 1e-4:
        return repr(x)
    return np.format_float_positional(x, unique=True, trim="-")


def _cstr(z) -> str:
    z = complex(z)
    im = _dec(abs(z.imag))
    return f"{_dec(z.real)}{'-' if z.imag < 0 else '+'}{im}j"


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=True) + "\n"


def _write(cfg: dict, text: str):
    if cfg.get("out"):
        with open(cfg["out"], "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerows(rows)
    return buf.getvalue()


def n_threads() -> int:
    env = os.environ.get("QES_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise UsageError(f"QES_THREADS must be an integer, got {env!r}")
    return min(4, os.cpu_count() or 1)


# commands

def cmd_spectrum(cfg: dict) -> str:
    from .spectra import qes_spectrum
    sp = qes_spectrum(spec_from_config(cfg), root_tol=cfg["root_tol"])
    if cfg["format"] == "csv":
        rows = [("index", "E_re", "E_im", "class", "multiplicity")]
        for k, lv in enumerate(sp.levels):
            rows.append((k, _dec(lv.E.real), _dec(lv.E.imag), lv.reality_class,
                         lv.multiplicity))
        return _csv(rows)
    return dumps(sp.to_dict())


def cmd_bd(cfg: dict) -> str:
    from .bdengine import bd_family
    fam = bd_family(spec_from_config(cfg), N=cfg["n_max"])
    return dumps(fam.to_dict())


def cmd_verify(cfg: dict) -> str:
    from . import verify as V
    from .spectra import qes_spectrum
    spec = spec_from_config(cfg)
    sp = qes_spectrum(spec, root_tol=cfg["root_tol"])
    tol = cfg["residual_tol"]
    levels = []
    for k, lv in enumerate(sp.levels):
        r = V.residual(sp.spec, k, spectrum=sp, tol=tol)
        bumped = [V.residual(sp.spec, k, spectrum=sp, E=lv.E + d, tol=tol).max_residual
                  for d in (-0.1, 0.1)]
        levels.append({"E": _cnum(lv.E), "residual": r.to_dict(),
                       "perturbed_residual": bumped})
    out = {"model": sp.spec.to_dict(), "levels": levels}
    if spec.family.is_real:
        out["fd"] = V.fd_eigen(sp.spec, cfg["n_points"], cfg["x_max"], cfg["k"]).to_dict()
    if spec.family is Family.ComplexDSHG:
        out["wedge"] = [d.to_dict() for side in (1, -1)
                        for d in V.wedge_decay(sp.spec, 0, side=side, spectrum=sp)]
    return dumps(out)


def cmd_antiiso(cfg: dict) -> str:
    from . import verify as V
    from .antiiso import map_spectrum
    from .spectra import qes_spectrum
    spec = spec_from_config(cfg)
    if spec.family not in (Family.ComplexDSHG, Family.PeriodicDSG):
        raise UsageError("antiiso needs --family complex-dshg or periodic-dsg")
    src = qes_spectrum(spec, root_tol=cfg["root_tol"])
    tgt = map_spectrum(src)
    res = [V.residual(tgt.spec, k, spectrum=tgt, tol=cfg["residual_tol"]).max_residual
           for k in range(len(tgt.levels))]
    return dumps({"source": src.to_dict(), "target": tgt.to_dict(), "target_residuals": res})


def cmd_sl2(cfg: dict) -> str:
    from .sl2 import compare, hg_direct, hg_sl2
    spec = spec_from_config(cfg)
    n = cfg["n"]
    if n is None:
        cond = check_qes(spec)
        if not cond.satisfied:
            raise UsageError("sl2 needs --n when M does not fix the level count")
        n = cond.p - 1
    rep = compare(spec, n)
    out = {"model": spec.to_dict(), "report": rep.to_dict(),
           "direct": hg_direct(spec, n).to_dict(), "generators": hg_sl2(spec, n).to_dict()}
    return dumps(out)


def cmd_reconcile(cfg: dict) -> str:
    from .verify import reconcile
    rep = reconcile(spec_from_config(cfg))
    if cfg["format"] == "table":
        return rep.table() + "\n"
    return dumps(rep.to_dict())


def sweep_values(cfg: dict) -> list[Fraction]:
    for key, flag in (("param", "--param"), ("start", "--from"), ("stop", "--to"),
                      ("steps", "--steps")):
        if cfg.get(key) is None:
            raise UsageError(f"sweep needs {flag}")
    steps = int(cfg["steps"])
    if steps < 2:
        raise UsageError("--steps must be at least 2")
    lo, hi = to_fraction(_param(cfg, "start")), to_fraction(_param(cfg, "stop"))
    if cfg["param"] == "l" and not (-1 < lo < 0 and -1 < hi < 0):
        raise UsageError("swept l must stay inside (-1, 0)")
    if cfg["param"] == "a" and min(lo, hi) <= 0:
        raise UsageError("swept a must stay positive")
    return [lo + (hi - lo) * k / (steps - 1) for k in range(steps)]


def _sweep_point(args):
    from .spectra import qes_spectrum
    from .verify import residual
    k, cfg, value = args
    local = dict(cfg, **{cfg["param"]: str(value)})
    spec = spec_from_config(local)
    row = [k, _dec(spec.a), _dec(spec.l), _dec(spec.g), _dec(spec.M)]
    cond = check_qes(spec)
    if not cond.satisfied:
        return row + ["no-qes", "", "", "", ""]
    sp = qes_spectrum(spec, root_tol=cfg["root_tol"])
    res = max(residual(sp.spec, j, spectrum=sp, tol=cfg["residual_tol"]).max_residual
              for j in range(len(sp.levels)))
    return row + ["ok", sp.p, ";".join(_cstr(lv.E) for lv in sp.levels),
                  ";".join(lv.reality_class for lv in sp.levels), _dec(res)]


def cmd_sweep(cfg: dict) -> str:
    values = sweep_values(cfg)
    spec_from_config(dict(cfg, **{cfg["param"]: str(values[0])}))  # fail fast on bad flags
    jobs = [(k, cfg, v) for k, v in enumerate(values)]
    with ThreadPoolExecutor(max_workers=n_threads()) as pool:
        rows = list(pool.map(_sweep_point, jobs))
    return _csv([SWEEP_HEADER, *rows])


HANDLERS = {
    "spectrum": cmd_spectrum,
    "bd": cmd_bd,
    "verify": cmd_verify,
    "antiiso": cmd_antiiso,
    "sl2": cmd_sl2,
    "reconcile": cmd_reconcile,
    "sweep": cmd_sweep,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = resolve_config(ns)
        text = HANDLERS[cfg["command"]](cfg)
        _write(cfg, text)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"qes: error: {exc}", file=sys.stderr)
        return 1
    except QESConditionError as exc:
        print(f"qes: {exc}", file=sys.stderr)
        return 2
    except (ValueError, ArithmeticError, OSError) as exc:
        print(f"qes: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
