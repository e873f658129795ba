"""Command-line entry point.

Subcommands wire configuration (TOML or JSON files, or inline flags) to
the library: ``verify`` runs the structure-equation check, ``lemma21``
the pointwise condition checker, ``match-ch`` the coefficient matcher,
``immerse`` builds second-fundamental-form coefficients, ``certify``
emits nonexistence certificates, and ``reconstruct`` integrates and
exports a surface.  Every run writes a JSON report embedding the
resolved configuration, the library version and the seed; timestamps
live in a separate ``meta`` field so reports are otherwise reproducible
byte for byte.  Exit codes: 0 all checks passed, 1 a check failed,
2 configuration problems, 3 I/O problems.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from . import __version__
from .jetalg import ExprError, parse_expr, render
from . import families as fam
from .chmatch import CH_RHS, MatchError, match_family
from . import immersion as imm
from . import bonnet as bon


class ConfigError(ValueError):
    pass


_FAMILY_KEYS = {"kind", "mu2", "mu3", "eta2", "eta3", "lam", "c1", "c2",
                "theta", "nu", "sigma", "tau", "sign", "f", "phi1", "vphi"}

_PRESETS = {f"{k.lower()}-default": k
            for k in ("T22", "T23", "T24", "T25i", "T25ii")}
_PRESETS["sg"] = "SG"


def _load_config_file(path: str) -> dict:
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    text = raw.decode("utf-8")
    if path.endswith(".json"):
        return json.loads(text)
    if path.endswith(".toml"):
        return _loads_toml(raw)
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return _loads_toml(raw)


def _loads_toml(raw: bytes) -> dict:
    try:
        import tomllib
    except ImportError:
        import tomli as tomllib
    try:
        return tomllib.loads(raw.decode("utf-8"))
    except Exception as exc:
        raise ConfigError(f"config is neither valid TOML nor JSON: {exc}")


def _norm_kind(s: str) -> str:
    u = str(s).upper()
    return {"T25I": "T25i", "T25II": "T25ii"}.get(u, u)


def _family_params_from_dict(cfg: dict) -> fam.FamilyParams:
    if not isinstance(cfg, dict):
        raise ConfigError("family config must be a table of key/value pairs")
    unknown = set(cfg) - _FAMILY_KEYS
    if unknown:
        raise ConfigError(f"unknown family config keys: {sorted(unknown)}")
    if "kind" not in cfg:
        raise ConfigError("family config needs a 'kind'")
    kind = _norm_kind(cfg["kind"])
    kw = {"kind": kind}
    for src, dst in (("mu2", "mu2"), ("mu3", "mu3"), ("eta2", "eta2"),
                     ("eta3", "eta3"), ("lam", "lam"), ("c1", "c1"),
                     ("c2", "c2"), ("theta", "theta"), ("nu", "nu"),
                     ("sigma", "sigma"), ("tau", "tau")):
        if src in cfg and cfg[src] is not None:
            kw[dst] = str(cfg[src])
    if "sign" in cfg:
        kw["sign"] = int(cfg["sign"])
    defaults = fam.default_params(kind, kw.get("sign", 1))
    kw.setdefault("f_slot", defaults.f_slot)
    kw.setdefault("phi1_slot", defaults.phi1_slot)
    kw.setdefault("vphi_slot", defaults.vphi_slot)
    for src, dst in (("f", "f_slot"), ("phi1", "phi1_slot"),
                     ("vphi", "vphi_slot")):
        if src in cfg:
            kw[dst] = None if cfg[src] in (None, "opaque") else str(cfg[src])
    for name in ("mu2", "eta2", "lam", "c1", "c2", "theta", "nu", "sigma",
                 "tau"):
        if name not in kw:
            kw[name] = getattr(defaults, name)
    try:
        return fam.FamilyParams(**kw)
    except (fam.FamilyError, ValueError, ZeroDivisionError) as exc:
        raise ConfigError(str(exc)) from exc


def _resolve_family(args) -> fam.FamilyParams:
    sources = [s for s in (args.family, args.config, args.kind) if s]
    if len(sources) != 1:
        raise ConfigError(
            "give exactly one of --family <preset>, --config <file>, or "
            "--kind with inline parameters")
    if args.family:
        key = args.family.lower()
        if key in _PRESETS:
            return fam.default_params(_PRESETS[key], args.sign or 1)
        if os.path.exists(args.family):
            cfg = _load_config_file(args.family)
            if args.sign is not None:
                cfg["sign"] = args.sign
            return _family_params_from_dict(cfg)
        raise ConfigError(f"unknown preset {args.family!r} (and no such "
                          f"config file); presets: {sorted(_PRESETS)}")
    if args.config:
        cfg = _load_config_file(args.config)
        if args.sign is not None:
            cfg["sign"] = args.sign
        return _family_params_from_dict(cfg)
    cfg = {"kind": args.kind}
    for name in ("mu2", "mu3", "eta2", "eta3", "lam", "c1", "c2", "theta",
                 "nu", "sigma", "tau", "f", "phi1", "vphi"):
        v = getattr(args, name, None)
        if v is not None:
            cfg[name] = v
    if args.sign is not None:
        cfg["sign"] = args.sign
    return _family_params_from_dict(cfg)


def _add_family_flags(p: argparse.ArgumentParser):
    p.add_argument("--family", help="named preset (t22-default, ..., sg)")
    p.add_argument("--config", help="TOML or JSON family configuration file")
    p.add_argument("--kind", help="family kind for inline parameters")
    for name in ("mu2", "mu3", "eta2", "eta3", "lam", "c1", "c2", "theta",
                 "nu", "sigma", "tau"):
        p.add_argument(f"--{name}", help=f"rational scalar {name}")
    p.add_argument("--f", help="f slot expression, or 'opaque'")
    p.add_argument("--phi1", help="phi1 slot expression, or 'opaque'")
    p.add_argument("--vphi", help="vphi slot expression, or 'opaque'")
    p.add_argument("--sign", type=int, choices=(1, -1), default=None)


def _common_flags(p: argparse.ArgumentParser):
    p.add_argument("--out", default="psskit-out", help="output directory")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--rtol", type=float, default=1e-10)
    p.add_argument("--atol", type=float, default=1e-10)


def _threads() -> int:
    env = os.environ.get("PSSKIT_THREADS")
    if env:
        n = int(env)
        if n < 1:
            raise ConfigError("PSSKIT_THREADS must be a positive integer")
        return n
    return os.cpu_count() or 1


def _write_report(args, command: str, result: dict, ok: bool,
                  config: dict) -> str:
    if args.rtol <= 0 or args.atol <= 0:
        raise ConfigError("tolerances must be positive")
    report = {
        "command": command,
        "version": __version__,
        "config": dict(config, seed=args.seed, rtol=args.rtol,
                       atol=args.atol, out=args.out),
        "result": result,
        "ok": ok,
        "meta": {"created_at": time.strftime("%Y-%m-%dT%H:%M:%S%z")},
    }
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, f"{command}-report.json")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


# -- subcommands ------------------------------------------------------------


def _cmd_verify(args) -> int:
    params = _resolve_family(args)
    signs = (1, -1) if args.both_signs else (params.sign,)
    results, ok = [], True
    for s in signs:
        p = fam.FamilyParams(**{**params.__dict__, "sign": s})
        rep = fam.verify_pss(fam.build_family(p))
        results.append(rep.to_dict())
        ok = ok and rep.ok
    path = _write_report(args, "verify", {"runs": results}, ok,
                         params.to_dict())
    print(f"verify: {'PASS' if ok else 'FAIL'} ({path})")
    return 0 if ok else 1


def _cmd_lemma21(args) -> int:
    params = _resolve_family(args)
    inst = fam.build_family(params)
    delta = None if args.delta in (None, "auto") else Fraction(args.delta)
    rep = fam.lemma21_check(inst, delta)
    ok = rep.all_passed
    path = _write_report(args, "lemma21", rep.to_dict(), ok, params.to_dict())
    print(f"lemma21: {'PASS' if ok else 'FAIL'} "
          f"(delta={rep.delta_used}, solved={rep.delta_solved}) ({path})")
    return 0 if ok else 1


def _cmd_match_ch(args) -> int:
    target_src = args.target or CH_RHS
    try:
        target = parse_expr(target_src)
    except ExprError as exc:
        raise ConfigError(f"bad target expression: {exc}") from exc
    try:
        res = match_family(target, args.match_kind)
    except MatchError as exc:
        path = _write_report(args, "match-ch",
                             {"target": target_src, "error": str(exc)},
                             False, {"target": target_src})
        print(f"match-ch: FAIL ({path})")
        return 1
    verified = fam.verify_pss(res.instance).ok
    residual = render(res.reassembled - target)
    result = dict(res.to_dict(), target=target_src,
                  expansion_residual=residual, verified=verified)
    ok = verified and residual == "0"
    path = _write_report(args, "match-ch", result, ok, {"target": target_src})
    print(f"match-ch: {'PASS' if ok else 'FAIL'} params={res.params.to_dict()} "
          f"({path})")
    return 0 if ok else 1


def _cmd_immerse(args) -> int:
    for tag in imm.CLOSED_CASES + imm.ODE_CASES:
        if args.case.lower() == tag.lower():
            case = tag
            break
    else:
        raise ConfigError(f"unknown immersion case {args.case!r}")
    cfg = {"case": case, "alpha": args.alpha, "beta": args.beta,
           "sign": args.sign or 1, "eta2": args.eta2_f, "c1": args.c1_f,
           "mu2": args.mu2_f, "xi0": args.xi0, "b0": args.b0,
           "range": [args.xi_min, args.xi_max], "samples": args.samples}
    os.makedirs(args.out, exist_ok=True)
    csv_path = os.path.join(args.out, f"immerse-{case.lower()}.csv")
    if case in imm.CLOSED_CASES:
        sff = imm.ClosedFormSFF(case, args.alpha, args.beta, args.sign or 1,
                                eta2=args.eta2_f, c1=args.c1_f)
        g = imm.gauss_residual(sff, n=args.samples, seed=args.seed)
        result = {"case": case, "gauss_residual_max": g,
                  "strip_e": [sff.domain.e_lo, sff.domain.e_hi],
                  "strip_xi": [sff.domain.xi_lo, sff.domain.xi_hi],
                  "degenerate_beta": sff.domain.degenerate_beta,
                  "csv": csv_path}
        ok = g <= 1e-12
    else:
        prob = imm.BOdeProblem(case, mu2=args.mu2_f, eta2=args.eta2_f,
                               c1=args.c1_f, beta=args.beta,
                               sign=args.sign or 1, xi0=args.xi0, b0=args.b0,
                               xi_range=(args.xi_min, args.xi_max),
                               rtol=args.rtol, atol=args.atol)
        sff = imm.solve_b_ode(prob)
        xi = np.linspace(sff.xi_lo, sff.xi_hi, args.samples)
        rel = float(sff.relation_residual_xi(xi).max())
        result = {"case": case, "relation_residual_max": rel,
                  "integrated_range": [sff.xi_lo, sff.xi_hi],
                  "stopped": sff.stopped, "csv": csv_path}
        ok = rel <= 1e-8 and not sff.stopped
    imm.sff_to_csv(sff, csv_path, n=args.samples)
    path = _write_report(args, "immerse", result, ok, cfg)
    print(f"immerse[{case}]: {'PASS' if ok else 'FAIL'} ({path})")
    return 0 if ok else 1


def _cmd_certify(args) -> int:
    kind = args.kind_norm
    cfg = {"kind": kind, "count": args.count}
    if args.count:
        from concurrent.futures import ThreadPoolExecutor
        rng_seeds = [args.seed + i for i in range(args.count)]

        def one(s):
            import random
            p = imm.random_certificate_params(kind, random.Random(s))
            return imm.nonexistence_certificate(kind, p)

        with ThreadPoolExecutor(max_workers=_threads()) as pool:
            certs = list(pool.map(one, rng_seeds))
        nonzero = sum(c.nonzero for c in certs)
        result = {"kind": kind, "count": args.count, "nonzero": nonzero,
                  "all_nonzero": nonzero == args.count,
                  "sample": certs[0].to_dict()}
        ok = nonzero == args.count
    else:
        params = _resolve_family(args)
        rep = imm.nonexistence_certificate(kind, params)
        result = rep.to_dict()
        cfg.update(params.to_dict())
        ok = rep.nonzero
    path = _write_report(args, "certify", result, ok, cfg)
    print(f"certify[{kind}]: {'PASS' if ok else 'FAIL'} ({path})")
    return 0 if ok else 1


def _cmd_reconstruct(args) -> int:
    cfg = {"solution": args.solution, "nx": args.nx, "nt": args.nt,
           "hx": args.hx, "x0": args.x0, "t0": args.t0, "abc": args.abc,
           "a": args.a, "c": args.c, "renormalize": args.renormalize}
    xs, ts = bon.make_grid(args.x0, args.t0, args.nx, args.nt, args.hx)
    if args.solution == "sg-kink":
        sampler = bon.sg_kink(args.a, xs, ts)
        inst = fam.build_family(fam.default_params("SG"))
    elif args.solution == "traveling-wave":
        params = _resolve_family(args)
        inst = fam.build_family(params)
        initial = tuple(float(Fraction(v)) for v in args.initial.split(","))
        if len(initial) != 3:
            raise ConfigError("--initial needs U,U',U'' at xi0")
        sampler = bon.traveling_wave(inst, args.c, initial, xs, ts,
                                     rtol=args.rtol, atol=args.atol)
        cfg["initial"] = list(initial)
        cfg["family"] = params.to_dict()
    else:
        raise ConfigError(f"unknown solution kind {args.solution!r}")

    if args.abc == "sg":
        sff = bon.sine_gordon_abc(args.sign or 1)
    elif args.abc == "closed-form":
        sff = imm.ClosedFormSFF(args.case, args.alpha, args.beta,
                                args.sign or 1, eta2=args.eta2_f, c1=args.c1_f)
    else:
        triple = tuple(float(Fraction(v)) for v in args.abc.split(","))
        if len(triple) != 3:
            raise ConfigError("--abc needs 'sg', 'closed-form', or a,b,c")
        sff = triple
    mesh = bon.integrate_frame(sampler, inst, sff,
                               renormalize=args.renormalize)
    mesh.K = bon.discrete_curvature(mesh)
    os.makedirs(args.out, exist_ok=True)
    paths = bon.export_mesh(mesh, os.path.join(args.out, "surface"), "obj")
    med = float(np.nanmedian(mesh.K[1:-1, 1:-1]))
    result = {"drift_max": float(mesh.drift.max()),
              "commutation_defect": mesh.commutation_defect,
              "median_interior_K": med,
              "pde_residual": sampler.residual,
              "files": paths}
    ok = bool(mesh.drift.max() <= 1e-6)
    path = _write_report(args, "reconstruct", result, ok, cfg)
    print(f"reconstruct: {'PASS' if ok else 'FAIL'} medianK={med:.4f} ({path})")
    return 0 if ok else 1


# -- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="psskit",
        description="verification toolkit for PDEs describing "
                    "pseudospherical surfaces")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="structure-equation verification")
    _add_family_flags(p)
    _common_flags(p)
    p.add_argument("--both-signs", action="store_true")
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("lemma21", help="pointwise condition checker")
    _add_family_flags(p)
    _common_flags(p)
    p.add_argument("--delta", default="auto",
                   help="scalar for the third compatibility condition")
    p.set_defaults(func=_cmd_lemma21)

    p = sub.add_parser("match-ch", help="coefficient matcher")
    _common_flags(p)
    p.add_argument("--target", help="target right-hand side expression")
    p.add_argument("--match-kind", default="T24", choices=("T22", "T24"))
    p.set_defaults(func=_cmd_match_ch)

    p = sub.add_parser("immerse", help="second-fundamental-form coefficients")
    _common_flags(p)
    p.add_argument("--case", required=True,
                   help="p35i, p35ii, p37i, p37ii, p37iii")
    p.add_argument("--alpha", type=float, default=2.5)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--sign", type=int, choices=(1, -1), default=1)
    p.add_argument("--eta2", dest="eta2_f", type=float, default=1.0)
    p.add_argument("--c1", dest="c1_f", type=float, default=0.0)
    p.add_argument("--mu2", dest="mu2_f", type=float, default=1.0)
    p.add_argument("--xi0", type=float, default=0.0)
    p.add_argument("--b0", type=float, default=2.0)
    p.add_argument("--xi-min", type=float, default=0.0)
    p.add_argument("--xi-max", type=float, default=1.0)
    p.add_argument("--samples", type=int, default=1000)
    p.set_defaults(func=_cmd_immerse)

    p = sub.add_parser("certify", help="nonexistence certificates")
    _add_family_flags(p)
    _common_flags(p)
    p.add_argument("--count", type=int, default=0,
                   help="random admissible sweep size (0 = use given params)")
    p.set_defaults(func=_cmd_certify)

    p = sub.add_parser("reconstruct", help="integrate and export a surface")
    _add_family_flags(p)
    _common_flags(p)
    p.add_argument("--solution", default="sg-kink",
                   choices=("sg-kink", "traveling-wave"))
    p.add_argument("--a", type=float, default=1.0, help="kink parameter")
    p.add_argument("--c", type=float, default=2.0, help="wave speed")
    p.add_argument("--initial", default="0.1,0.05,0",
                   help="U,U',U'' at xi0 for traveling waves")
    p.add_argument("--nx", type=int, default=101)
    p.add_argument("--nt", type=int, default=101)
    p.add_argument("--hx", type=float, default=0.01)
    p.add_argument("--x0", type=float, default=0.3)
    p.add_argument("--t0", type=float, default=0.3)
    p.add_argument("--abc", default="sg",
                   help="'sg', 'closed-form', or constant a,b,c")
    p.add_argument("--case", default="P35i")
    p.add_argument("--alpha", type=float, default=2.5)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--eta2-num", dest="eta2_f", type=float, default=1.0)
    p.add_argument("--c1-num", dest="c1_f", type=float, default=0.0)
    p.add_argument("--renormalize", action="store_true")
    p.set_defaults(func=_cmd_reconstruct)
    return ap


@dataclass
class RunConfig:
    """Programmatic equivalent of one CLI invocation.

    ``inline`` carries family parameters (same keys as the config files),
    ``options`` any command-specific flags (booleans become bare flags).
    Unknown keys are rejected by the argument parser, which keeps the two
    entry points behaviorally identical.
    """
    command: str
    family: Optional[str] = None
    config_path: Optional[str] = None
    inline: dict = field(default_factory=dict)
    out: str = "psskit-out"
    seed: int = 0
    rtol: float = 1e-10
    atol: float = 1e-10
    options: dict = field(default_factory=dict)

    def to_argv(self) -> list:
        argv = [self.command, "--out", self.out, "--seed", str(self.seed),
                "--rtol", repr(self.rtol), "--atol", repr(self.atol)]
        if self.family:
            argv += ["--family", self.family]
        if self.config_path:
            argv += ["--config", self.config_path]
        for src in (self.inline, self.options):
            for key, val in src.items():
                flag = "--" + str(key).replace("_", "-")
                if isinstance(val, bool):
                    if val:
                        argv.append(flag)
                else:
                    argv += [flag, str(val)]
        return argv


def run(config: RunConfig) -> int:
    """Execute one command; returns the process exit status (0 = pass)."""
    return main(config.to_argv())


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 2
    if getattr(args, "command", None) == "certify":
        kind = _norm_kind((args.kind or args.family or "").replace(
            "-default", ""))
        if kind not in ("T23", "T25i", "T25ii"):
            print(f"certify: kind {kind or '(none)'} has no nonexistence "
                  "certificate (use t23, t25i, t25ii)", file=sys.stderr)
            return 2
        args.kind_norm = kind
        if args.count:
            args.kind = None
            args.family = None
    try:
        return args.func(args)
    except (ConfigError, fam.FamilyError, ExprError, imm.ImmersionError,
            bon.ReconstructionError, ValueError) as exc:
        print(f"psskit: configuration error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"psskit: I/O error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
