"""Command-line front end.

Every subcommand writes CSV/JSON files into ``--out``.  Settings come from
built-in defaults, then an optional JSON file given with ``--config``, then
explicit flags, each overriding the previous.

Exit codes: 0 on success, 2 on invalid input, 3 when a solver does not
converge.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from . import io as vio
from .angmom import boundary_patch_energy, crossover_demo, radial_envelope_bound
from .curve import (
    BETA_MAX,
    DEFAULT_POINTS,
    beta_grid,
    concavity_report,
    duality_check,
    scan,
    temperature_monotonicity,
)
from .disk import DEFAULT_NR, FAST_NR, greens_energy, rearrange_to_radial, talenti_report
from .errors import ConvergenceError, DomainError
from .maximizer import certify, onsager_exact, solve_constrained, solve_probability
from .radial import (
    DEFAULT_N,
    RadialProfile,
    entropy,
    extremal_profiles,
    kinetic_energy,
    rearrange_decreasing,
)
from .sampling import FIELD_KINDS, random_disk_field, random_radial_profile
from .transport import (
    brenier_map,
    energy_inequality_check,
    entropy_identity_check,
    jensen_defect,
    quantitative_jensen,
)

EXIT_OK, EXIT_INVALID, EXIT_NOCONV = 0, 2, 3
SEED_MAX = 2**64 - 1

COMMON_DEFAULTS = {"seed": 0, "out": "."}

DEFAULTS = {
    "maximize": {"beta": None, "m": 0.5, "L": 1.0, "n": DEFAULT_N, "kind": "boltzmann",
                 "tol": 1e-10},
    "onsager": {"beta": None, "n": DEFAULT_N, "extrapolate": True},
    "curve": {"m": 0.5, "L": 1.0, "n": DEFAULT_N, "beta_min": -BETA_MAX,
              "beta_max": BETA_MAX, "points": DEFAULT_POINTS},
    "transport": {"beta": -2.0, "m": 0.5, "L": 1.0, "n": DEFAULT_N, "pairs": 0},
    "angmom": {"m": 0.5, "a": None, "L": None, "crossover": False, "points": 40},
    "talenti": {"fields": 1, "n_r": DEFAULT_NR, "n_theta": None, "fast": False,
                "field_kind": None},
    "rearrange": {"input": None, "m": 0.4, "L": 10.0, "n": DEFAULT_N},
}

# keys that do not change results and stay out of the echoed configuration
_UNECHOED = {"out", "config"}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def _add_common(p):
    p.add_argument("--config", help="JSON file with settings (overridden by flags)")
    p.add_argument("--out", help="output directory (default: current)")
    p.add_argument("--seed", type=int, help="seed for randomized inputs (unsigned 64-bit)")


def build_parser():
    sup = argparse.SUPPRESS
    parser = _Parser(prog="vortentropy", description=__doc__.splitlines()[0],
                     argument_default=sup)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("maximize", help="bounded free-energy maximizer", argument_default=sup)
    p.add_argument("--beta", type=float)
    p.add_argument("--m", type=float, help="mass fraction")
    p.add_argument("--L", type=float, help="vorticity ceiling")
    p.add_argument("--n", type=int, help="radial cells")
    p.add_argument("--kind", choices=["boltzmann", "rsm", "turkington"])
    p.add_argument("--tol", type=float)
    _add_common(p)

    p = sub.add_parser("onsager", help="mean-field maximizer vs closed form", argument_default=sup)
    p.add_argument("--beta", type=float)
    p.add_argument("--n", type=int)
    p.add_argument("--no-extrapolate", dest="extrapolate", action="store_false")
    _add_common(p)

    p = sub.add_parser("curve", help="entropy-energy curve by beta scan", argument_default=sup)
    p.add_argument("--m", type=float)
    p.add_argument("--L", type=float)
    p.add_argument("--n", type=int)
    p.add_argument("--beta-min", type=float)
    p.add_argument("--beta-max", type=float)
    p.add_argument("--points", type=int)
    _add_common(p)

    p = sub.add_parser("transport", help="monotone map from a maximizer to the constant state",
                       argument_default=sup)
    p.add_argument("--beta", type=float)
    p.add_argument("--m", type=float)
    p.add_argument("--L", type=float)
    p.add_argument("--n", type=int)
    p.add_argument("--pairs", type=int, help="extra seeded random pairs to check")
    _add_common(p)

    p = sub.add_parser("angmom", help="radial bound vs boundary patch at fixed momentum",
                       argument_default=sup)
    p.add_argument("--m", type=float)
    p.add_argument("--a", type=float, help="angular momentum (negative)")
    p.add_argument("--L", type=float)
    p.add_argument("--crossover", action="store_true", help="scan a for the crossover")
    p.add_argument("--points", type=int, help="grid points of the crossover scan")
    _add_common(p)

    p = sub.add_parser("talenti", help="rearrangement checks on random disk fields",
                       argument_default=sup)
    p.add_argument("--fields", type=int, help="number of seeded random fields")
    p.add_argument("--n-r", type=int)
    p.add_argument("--n-theta", type=int)
    p.add_argument("--fast", action="store_true", help=f"use n_r = n_theta = {FAST_NR}")
    p.add_argument("--field-kind", choices=FIELD_KINDS)
    _add_common(p)

    p = sub.add_parser("rearrange", help="decreasing rearrangement of a radial profile",
                       argument_default=sup)
    p.add_argument("--input", help="profile CSV with an omega column (default: random)")
    p.add_argument("--m", type=float)
    p.add_argument("--L", type=float)
    p.add_argument("--n", type=int)
    _add_common(p)
    return parser


def resolve_config(args):
    """Merge defaults, the ``--config`` file and explicit flags."""
    given = vars(args).copy()
    command = given.pop("command")
    cfg = dict(COMMON_DEFAULTS)
    cfg.update(DEFAULTS[command])
    path = given.pop("config", None)
    if path is not None:
        try:
            loaded = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise DomainError(f"cannot read config {path}: {exc}") from None
        if not isinstance(loaded, dict):
            raise DomainError("config file must hold a JSON object")
        loaded = {k.replace("-", "_"): v for k, v in loaded.items()}
        loaded.pop("command", None)
        unknown = sorted(set(loaded) - set(cfg))
        if unknown:
            raise DomainError(f"unknown config keys for {command}: {', '.join(unknown)}")
        cfg.update(loaded)
    cfg.update(given)
    seed = cfg["seed"]
    if not isinstance(seed, int) or not 0 <= seed <= SEED_MAX:
        raise DomainError(f"seed must be an unsigned 64-bit integer, got {seed!r}")
    cfg["command"] = command
    return cfg


def _echo(cfg):
    return {k: v for k, v in sorted(cfg.items()) if k not in _UNECHOED}


def _require(cfg, *keys):
    missing = [k for k in keys if cfg.get(k) is None]
    if missing:
        raise DomainError(f"{cfg['command']} needs --{' --'.join(missing)}".replace("_", "-"))


def _positive_int(cfg, key):
    v = cfg[key]
    if not isinstance(v, int) or v < 1:
        raise DomainError(f"{key} must be a positive integer, got {v!r}")


# -- subcommands ----------------------------------------------------------------


def _cmd_maximize(cfg, out):
    _require(cfg, "beta")
    _positive_int(cfg, "n")
    rep = solve_constrained(cfg["beta"], cfg["m"], cfg["L"], kind=cfg["kind"],
                            n=cfg["n"], tol=cfg["tol"])
    cert = certify(rep, tol=cfg["tol"])
    echo = _echo(cfg)
    vio.write_profile_csv(out / "maximize_profile.csv", rep.profile, echo)
    rec = vio.maximizer_record(rep, "maximize_profile.csv")
    rec.update(monotone=cert.monotone, boundary_bound=cert.boundary_bound,
               bound_ok=cert.bound_ok, certified=cert.ok)
    vio.write_json(out / "maximize_report.json", rec, echo)
    return rec


def _cmd_onsager(cfg, out):
    _require(cfg, "beta")
    _positive_int(cfg, "n")
    rep = solve_probability(cfg["beta"], n=cfg["n"], extrapolate=cfg["extrapolate"])
    exact = onsager_exact(cfg["beta"], cfg["n"])
    echo = _echo(cfg)
    vio.write_profile_csv(out / "onsager_profile.csv", rep.profile, echo)
    rec = vio.maximizer_record(rep, "onsager_profile.csv")
    rec["sup_error"] = float(np.max(np.abs(rep.profile.values - exact.values)))
    rec["certified"] = certify(rep).ok
    vio.write_json(out / "onsager_report.json", rec, echo)
    return rec


def _cmd_curve(cfg, out):
    _positive_int(cfg, "n")
    _positive_int(cfg, "points")
    betas = beta_grid(cfg["beta_min"], cfg["beta_max"], cfg["points"])
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        curve = scan(cfg["m"], betas, ceiling=cfg["L"], n=cfg["n"])
    for w in caught:
        logging.getLogger("vortentropy").warning("%s", w.message)
    echo = _echo(cfg)
    vio.write_curve_csv(out / "curve.csv", curve, echo)
    rec = {"points": len(curve), "dropped": list(curve.dropped),
           "e_min": curve.e_min, "e_star": curve.e_star, "e_max": curve.e_max}
    if len(curve) >= 3:
        conc = concavity_report(curve)
        dual = duality_check(curve)
        clau = temperature_monotonicity(curve)
        rec.update(concave=conc.concave, max_at=conc.e_argmax, duality_ok=dual.duality_ok,
                   clausius_max_err=clau.clausius_max_err,
                   energy_decreasing=clau.energy_decreasing,
                   concavity=conc.to_dict(), duality=dual.to_dict())
    vio.write_json(out / "curve_report.json", rec, echo)
    return rec


def _cmd_transport(cfg, out):
    _positive_int(cfg, "n")
    if cfg["pairs"] < 0:
        raise DomainError("pairs must be nonnegative")
    rep = solve_constrained(cfg["beta"], cfg["m"], cfg["L"], n=cfg["n"])
    bar = RadialProfile.constant(cfg["m"], cfg["n"], cfg["L"])
    tmap = brenier_map(rep.profile, bar)
    q = quantitative_jensen(tmap)
    rec = {
        "beta": rep.beta,
        "brenier_h_defect": entropy_identity_check(rep.profile, bar, tmap),
        "slack": energy_inequality_check(rep.profile, bar, tmap),
        "h_integral": q.h_integral,
        "sup_T_deviation": q.sup_T_deviation,
        "residual_MA": tmap.residual_ma,
    }
    if rep.beta < 0:
        jd = jensen_defect(rep, bar)
        rec.update(defect=jd.defect, free_energy_gap=jd.free_energy_gap,
                   consistent=jd.consistent)
    if cfg["pairs"]:
        rng = np.random.default_rng(cfg["seed"])
        worst_h, worst_slack = 0.0, math.inf
        for _ in range(cfg["pairs"]):
            a = random_radial_profile(rng, cfg["n"])
            b = random_radial_profile(rng, cfg["n"])
            t = brenier_map(a, b)
            worst_h = max(worst_h, entropy_identity_check(a, b, t))
            worst_slack = min(worst_slack, energy_inequality_check(a, b, t))
        rec.update(random_pairs=cfg["pairs"], worst_h_defect=worst_h, worst_slack=worst_slack)
    echo = _echo(cfg)
    vio.write_map_csv(out / "transport_map.csv", tmap, echo)
    vio.write_json(out / "transport_report.json", rec, echo)
    return rec


def _cmd_angmom(cfg, out):
    echo = _echo(cfg)
    rec = {}
    if cfg["a"] is not None:
        _require(cfg, "L")
        env = radial_envelope_bound(cfg["m"], cfg["a"], cfg["L"])
        rec["envelope"] = env.to_dict()
        try:
            rec["patch"] = boundary_patch_energy(cfg["m"], cfg["a"], cfg["L"]).to_dict()
        except DomainError as exc:
            rec["patch"] = {"error": str(exc)}
    elif not cfg["crossover"]:
        raise DomainError("angmom needs --a and --L, or --crossover")
    if cfg["crossover"]:
        _positive_int(cfg, "points")
        rep = crossover_demo(cfg["m"], points=cfg["points"])
        rec["crossover"] = rep.to_dict()
        cols = np.array(rep.table, dtype=float).reshape(-1, 4).T
        vio.write_csv(out / "crossover.csv", ("a", "L", "radial_bound", "patch_energy"),
                      cols, echo)
    vio.write_json(out / "angmom_report.json", rec, echo)
    return rec


def _cmd_talenti(cfg, out):
    _positive_int(cfg, "fields")
    n_r = FAST_NR if cfg["fast"] else cfg["n_r"]
    n_theta = n_r if cfg["fast"] or cfg["n_theta"] is None else cfg["n_theta"]
    if n_r < 2 or n_theta < 2:
        raise DomainError("disk grid needs n_r, n_theta >= 2")
    rng = np.random.default_rng(cfg["seed"])
    reports, violations = [], 0
    first = None
    for i in range(cfg["fields"]):
        field = random_disk_field(rng, n_r, n_theta, cfg["field_kind"])
        first = field if first is None else first
        tr = talenti_report(field, shift_grid=0)
        d = tr.to_dict()
        d["energy"] = greens_energy(field)
        d["energy_sharp"] = kinetic_energy(rearrange_to_radial(field))
        bad = tr.energy_gap < -1e-4 or not tr.distribution_ok or tr.linf_gap < -1e-4
        violations += int(bad)
        reports.append(d)
    echo = _echo(cfg)
    vio.write_field_csv(out / "talenti_field.csv", first, echo)
    rec = {"n_r": n_r, "n_theta": n_theta, "fields": reports, "violations": violations}
    vio.write_json(out / "talenti_report.json", rec, echo)
    return rec


def _cmd_rearrange(cfg, out):
    _positive_int(cfg, "n")
    if cfg["input"] is not None:
        prof = vio.read_profile_csv(cfg["input"], ceiling=cfg["L"])
    else:
        prof = random_radial_profile(np.random.default_rng(cfg["seed"]), cfg["n"],
                                     cfg["m"], cfg["L"])
    sharp = rearrange_decreasing(prof)
    rec = {
        "energy": kinetic_energy(prof),
        "energy_sharp": kinetic_energy(sharp),
        "entropy": entropy(prof),
        "entropy_sharp": entropy(sharp),
        "m": prof.mass_fraction,
    }
    m = prof.mass_fraction / prof.ceiling
    if 0 < m < 1:
        ext = extremal_profiles(m, prof.n)
        scale = prof.ceiling**2
        rec.update(e_min=scale * ext.e_min, e_star=scale * ext.e_star,
                   e_max=scale * ext.e_max)
    echo = _echo(cfg)
    vio.write_profile_csv(out / "rearranged_profile.csv", sharp, echo)
    vio.write_json(out / "rearrange_report.json", rec, echo)
    return rec


COMMANDS = {
    "maximize": _cmd_maximize,
    "onsager": _cmd_onsager,
    "curve": _cmd_curve,
    "transport": _cmd_transport,
    "angmom": _cmd_angmom,
    "talenti": _cmd_talenti,
    "rearrange": _cmd_rearrange,
}


def run(argv=None):
    """Parse ``argv``, run the subcommand and return the exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_INVALID
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        cfg = resolve_config(args)
        out = Path(cfg["out"])
        out.mkdir(parents=True, exist_ok=True)
        COMMANDS[cfg["command"]](cfg, out)
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NOCONV
    except (DomainError, TypeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


def main():
    sys.exit(run())
