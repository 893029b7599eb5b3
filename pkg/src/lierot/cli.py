"""Command-line interface: ``lierot {gen,rotation,eval,optimize,sweep}``.

Exit status is 0 on success, 1 for usage or validation errors and 2 for
numerical failures.
"""
from __future__ import annotations

import argparse
import datetime as _dt
import math
import os
import sys
from pathlib import Path

from . import __version__
from .channel_objective import (
    CONVENTIONS,
    DEFAULT_CONVENTION,
    McConfig,
    NoiseSpec,
    awgn_mutual_information,
    cm_capacity,
    jensen_rate,
    mean_cutoff_rate,
)
from .constellation import (
    Constellation,
    NuqamParams,
    direct_product,
    make_nuqam,
    make_qam,
    normalize_unit_energy,
    rotate,
)
from .fileio import (
    dumps_table,
    fmt,
    read_constellation,
    read_matrix,
    write_constellation,
    write_matrix,
)
from .lie_rotations import build_skew_generator, family_rotation
from .optimizer import (
    DescentSettings,
    GridSpec,
    LineSearchError,
    best_rotation_t,
    joint_optimize,
    optimize_alpha,
    snr_sweep,
)

EVAL_COLUMNS = ["ebn0_db", "n0", "metric_name", "value", "std_err", "seed"]
OPTIMIZE_COLUMNS = [
    "mode",
    "ebn0_db",
    "n0",
    "best_t",
    "best_alpha",
    "R_bits",
    "baseline_R_bits",
    "delta_R_bits",
    "converged",
    "iterations",
]
SWEEP_COLUMNS = ["ebn0_db", "constellation", "rotation_name", "t_or_alpha", "R_bits", "delta_R_bits"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def short(x) -> str:
    return repr(float(x))


def manifest(command: str, params: dict, convention: str | None = None, seed=None) -> dict:
    m = {"command": command, "tool": f"lierot {__version__}"}
    m.update({k: v for k, v in params.items() if v is not None})
    if seed is not None:
        m["seed"] = seed
    if convention is not None:
        m["convention"] = CONVENTIONS.get(convention, convention)
    # wall-clock time would break byte-identical reruns; honour SOURCE_DATE_EPOCH only
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    if epoch:
        m["timestamp"] = _dt.datetime.fromtimestamp(int(epoch), _dt.timezone.utc).isoformat()
    return m


def _emit(text: str, out) -> None:
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _noise(args, X: Constellation) -> NoiseSpec:
    if getattr(args, "n0", None) is not None:
        return NoiseSpec(n0=args.n0)
    if args.ebn0_db is None:
        raise UsageError("one of --ebn0-db or --n0 is required")
    if X.M < 2:
        # any N0 works for a single point; all metrics are zero
        return NoiseSpec(n0=1.0, ebn0_db=args.ebn0_db, convention=args.convention)
    energy = 1.0 if not getattr(args, "no_normalize", False) else X.mean_energy
    return NoiseSpec.from_ebn0(args.ebn0_db, X.M, X.n, symbol_energy=energy, convention=args.convention)


def _grid(args) -> GridSpec:
    if args.quarter_turn:
        return GridSpec(0.0, math.pi / 2, args.grid_points, args.refine_tol)
    if args.grid_points == 1:
        return GridSpec.single(args.t_min)
    return GridSpec(args.t_min, args.t_max, args.grid_points, args.refine_tol)


def cmd_gen(args) -> int:
    if args.kind == "qam":
        if args.M is None:
            raise UsageError("gen qam requires --M")
        X = make_qam(args.M)
        params = {"kind": "qam", "M": args.M}
    elif args.kind == "nuqam":
        if args.q is None or not args.alpha:
            raise UsageError("gen nuqam requires --q and --alpha")
        X = make_nuqam(NuqamParams(args.q, tuple(args.alpha)))
        params = {"kind": "nuqam", "q": args.q, "alpha": " ".join(short(a) for a in args.alpha)}
    else:
        if not args.a or not args.b:
            raise UsageError("gen product requires --a and --b")
        X = direct_product(read_constellation(args.a), read_constellation(args.b))
        params = {"kind": "product", "a": args.a, "b": args.b}
    if args.normalize:
        X = normalize_unit_energy(X)
    params["normalized"] = bool(args.normalize)
    write_constellation(args.out, X, manifest("gen", params))
    return 0


def cmd_rotation(args) -> int:
    Q = family_rotation(build_skew_generator(args.k), args.t)
    write_matrix(args.out, Q, manifest("rotation", {"k": args.k, "n": 2**args.k, "t": short(args.t)}))
    return 0


def cmd_eval(args) -> int:
    X = read_constellation(args.constellation)
    if not args.no_normalize and X.M > 1:
        X = normalize_unit_energy(X)
    if args.rotation:
        Q = read_matrix(args.rotation)
        if Q.shape[0] != X.n:
            raise UsageError(f"rotation is {Q.shape[0]}-D but constellation is {X.n}-D")
        X = rotate(X, Q)
    noise = _noise(args, X)
    mc = McConfig(seed=args.seed, noise_samples=args.noise_samples, fading_samples=args.fading_samples)
    if args.metric == "R":
        value, se = jensen_rate(X, noise), 0.0
    elif args.metric == "R0":
        value, se = mean_cutoff_rate(X, noise, mc)
    elif args.metric == "mi":
        value, se = awgn_mutual_information(X, noise, mc)
    else:
        value, se = cm_capacity(X, noise, mc)
    params = {
        "constellation": args.constellation,
        "rotation": args.rotation,
        "metric": args.metric,
        "normalized": not args.no_normalize,
        "noise_samples": args.noise_samples if args.metric != "R" else None,
        "fading_samples": args.fading_samples if args.metric in ("R0", "cm") else None,
    }
    row = {
        "ebn0_db": "" if noise.ebn0_db is None else noise.ebn0_db,
        "n0": noise.n0,
        "metric_name": args.metric,
        "value": value,
        "std_err": se,
        "seed": args.seed,
    }
    conv = noise.convention if noise.convention else "N0 given directly"
    _emit(dumps_table(EVAL_COLUMNS, [row], manifest("eval", params, conv, args.seed)), args.out)
    return 0


def cmd_optimize(args) -> int:
    gd = DescentSettings(max_iter=args.max_iter)
    if args.mode == "rotation":
        if not args.constellation:
            raise UsageError("optimize rotation requires a constellation file")
        X = read_constellation(args.constellation)
        noise = _noise(args, X)
        res = best_rotation_t(X, noise, _grid(args), normalize=not args.no_normalize)
        params = {"mode": "rotation", "constellation": args.constellation}
    else:
        if args.q is None:
            raise UsageError(f"optimize {args.mode} requires --q")
        init = NuqamParams(args.q, tuple(args.init)) if args.init else NuqamParams.uniform(args.q)
        X = make_nuqam(init)
        args.no_normalize = False
        noise = _noise(args, X)
        if args.mode == "alpha":
            res = optimize_alpha(args.q, noise, init, gd)
        else:
            res = joint_optimize(args.q, noise, _grid(args), gd, init, max_rounds=args.rounds)
        params = {"mode": args.mode, "q": args.q, "init": " ".join(short(a) for a in init.alpha)}
    if args.mode in ("rotation", "joint"):
        g = _grid(args)
        params["grid"] = f"[{short(g.t_min)}, {short(g.t_max)}) x {g.coarse_points}, refine_tol {short(g.refine_tol)}"
    if args.mode in ("alpha", "joint"):
        params["descent"] = (
            f"fd_step {gd.fd_step}, armijo {gd.armijo}, grad_tol {gd.grad_tol}, max_iter {gd.max_iter}"
        )
    row = {
        "mode": args.mode,
        "ebn0_db": "" if noise.ebn0_db is None else noise.ebn0_db,
        "n0": noise.n0,
        "best_t": "" if res.best_t is None else res.best_t,
        "best_alpha": "" if res.best_alpha is None else " ".join(fmt(a) for a in res.best_alpha),
        "R_bits": res.objective_at_best,
        "baseline_R_bits": res.objective_baseline,
        "delta_R_bits": res.improvement,
        "converged": "true" if res.converged else "false",
        "iterations": res.iterations,
    }
    _emit(dumps_table(OPTIMIZE_COLUMNS, [row], manifest("optimize", params, noise.convention)), args.out)
    if args.out_matrix and res.best_t is not None:
        n = X.n if args.mode == "rotation" else 2
        Q = family_rotation(build_skew_generator(n.bit_length() - 1), res.best_t)
        write_matrix(args.out_matrix, Q, manifest("optimize", {"t": short(res.best_t), "n": n}))
    if args.out_constellation and res.best_alpha is not None:
        write_constellation(
            args.out_constellation,
            make_nuqam(NuqamParams(args.q, res.best_alpha)),
            manifest("optimize", {"q": args.q, "alpha": row["best_alpha"]}),
        )
    if not res.converged:
        print("warning: optimizer stopped before meeting its tolerance", file=sys.stderr)
    return 0


# ---------------------------------------------------------------- sweep config

def _parse_bool(text: str) -> bool:
    value = text.strip().lower()
    if value in ("1", "true", "yes"):
        return True
    if value in ("0", "false", "no"):
        return False
    raise ValueError(f"expected true or false, got {text!r}")


_SCALAR_KEYS = {"sweep", "ebn0_db", "grid_points", "t_min", "t_max", "refine_tol", "convention", "seed", "quarter_turn"}


def parse_db_list(text: str) -> list[float]:
    text = text.strip()
    if ":" in text:
        parts = [float(p) for p in text.split(":")]
        if len(parts) != 3 or parts[2] <= 0:
            raise ValueError("range must be start:stop:step with step > 0")
        start, stop, step = parts
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [start + i * step for i in range(count)]
    return [float(v) for v in text.replace(",", " ").split()]


def load_sweep_config(path) -> dict:
    """Parse the flat ``key = value`` sweep configuration.

    Raises ``UsageError`` naming the offending key on any problem.
    """
    base = Path(path).parent
    cfg = {"constellations": {}, "baselines": {}, "rotations": [], "scalars": {}}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        try:
            if key.startswith("constellation."):
                name = key.split(".", 1)[1]
                cfg["constellations"][name] = _build_constellation(value, cfg["constellations"], base)
            elif key.startswith("baseline."):
                cfg["baselines"][key.split(".", 1)[1]] = value
            elif key.startswith("rotation."):
                cfg["rotations"].append((key.split(".", 1)[1], _rotation_source(value, base)))
            elif key in _SCALAR_KEYS:
                cfg["scalars"][key] = value
            else:
                raise ValueError("unknown key")
        except (ValueError, FileNotFoundError, KeyError, IndexError) as exc:
            raise UsageError(f"config key {key!r} (line {lineno}): {exc}") from exc
    s = cfg["scalars"]
    for key in ("ebn0_db",):
        if key not in s:
            raise UsageError(f"config key {key!r} is missing")
    if not cfg["constellations"]:
        raise UsageError("config key 'constellation.<name>' is missing")
    if not cfg["rotations"]:
        raise UsageError("config key 'rotation.<name>' is missing")
    if "sweep" in s:
        names = s["sweep"].replace(",", " ").split()
        unknown = [n for n in names if n not in cfg["constellations"]]
        if unknown or not names:
            raise UsageError(f"config key 'sweep' names unknown constellations: {unknown}")
        cfg["swept"] = {n: cfg["constellations"][n] for n in names}
    else:
        cfg["swept"] = dict(cfg["constellations"])
    for name, ref in cfg["baselines"].items():
        if name not in cfg["constellations"] or ref not in cfg["constellations"]:
            raise UsageError(f"config key 'baseline.{name}' refers to an unknown constellation")
    def scalar(key, parse, default):
        if key not in s:
            return default
        try:
            return parse(s[key])
        except ValueError as exc:
            raise UsageError(f"config key '{key}': {exc}") from exc

    cfg["ebn0_db"] = scalar("ebn0_db", parse_db_list, None)
    quarter = scalar("quarter_turn", _parse_bool, False)
    points = scalar("grid_points", int, 2048)
    tol = scalar("refine_tol", float, 1e-6)
    try:
        cfg["grid"] = (
            GridSpec(0.0, math.pi / 2, points, tol)
            if quarter
            else GridSpec(scalar("t_min", float, 0.0), scalar("t_max", float, 2 * math.pi), points, tol)
        )
    except ValueError as exc:
        raise UsageError(f"config grid keys: {exc}") from exc
    cfg["seed"] = scalar("seed", int, 0)
    cfg["convention"] = s.get("convention", DEFAULT_CONVENTION)
    if cfg["convention"] not in CONVENTIONS:
        raise UsageError(f"config key 'convention': unknown value {cfg['convention']!r}")
    return cfg


def _build_constellation(spec: str, known: dict, base: Path) -> Constellation:
    kind, *rest = spec.split()
    if kind == "qam":
        return make_qam(int(rest[0]))
    if kind == "nuqam":
        return make_nuqam(NuqamParams(int(rest[0]), tuple(float(a) for a in rest[1:])))
    if kind == "product":
        return direct_product(known[rest[0]], known[rest[1]])
    if kind == "file":
        return read_constellation(base / rest[0])
    raise ValueError(f"unknown constellation kind {kind!r}")


def _rotation_source(spec: str, base: Path):
    kind, *rest = spec.split()
    if kind in ("identity", "family"):
        return kind
    if kind == "file":
        return read_matrix(base / rest[0])
    raise ValueError(f"unknown rotation source {kind!r}")


def cmd_sweep(args) -> int:
    cfg = load_sweep_config(args.config)
    swept = dict(cfg["swept"])
    for name in cfg["baselines"].values():
        swept.setdefault(name, cfg["constellations"][name])
    rows = snr_sweep(
        swept,
        cfg["rotations"],
        cfg["ebn0_db"],
        grid=cfg["grid"],
        baselines=cfg["baselines"],
        convention=cfg["convention"],
    )
    g = cfg["grid"]
    params = {
        "config": args.config,
        "constellations": "; ".join(f"{k}={v.label}" for k, v in swept.items()),
        "baselines": "; ".join(f"{k}->{v}" for k, v in cfg["baselines"].items()) or "self",
        "rotations": "; ".join(name for name, _ in cfg["rotations"]),
        "ebn0_db": " ".join(short(d) for d in cfg["ebn0_db"]),
        "grid": f"[{short(g.t_min)}, {short(g.t_max)}) x {g.coarse_points}, refine_tol {short(g.refine_tol)}",
    }
    text = dumps_table(SWEEP_COLUMNS, rows, manifest("sweep", params, cfg["convention"], cfg["seed"]))
    _emit(text, args.out)
    return 0


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="lierot", description="Rotated and non-uniform constellations over Rayleigh fading.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def snr_flags(sp, n0=False):
        sp.add_argument("--ebn0-db", type=float)
        if n0:
            sp.add_argument("--n0", type=float, help="noise level N0, overriding --ebn0-db")
        sp.add_argument("--convention", choices=sorted(CONVENTIONS), default=DEFAULT_CONVENTION)

    def grid_flags(sp):
        sp.add_argument("--grid-points", type=int, default=2048)
        sp.add_argument("--t-min", type=float, default=0.0)
        sp.add_argument("--t-max", type=float, default=2 * math.pi)
        sp.add_argument("--refine-tol", type=float, default=1e-6)
        sp.add_argument("--quarter-turn", action="store_true", help="search [0, pi/2) only")

    g = sub.add_parser("gen", help="write a constellation file")
    g.add_argument("kind", choices=["qam", "nuqam", "product"])
    g.add_argument("--M", type=int)
    g.add_argument("--q", type=int)
    g.add_argument("--alpha", type=float, nargs="+")
    g.add_argument("--a")
    g.add_argument("--b")
    g.add_argument("--normalize", action="store_true", help="scale to unit mean energy")
    g.add_argument("--out")
    g.set_defaults(func=cmd_gen)

    r = sub.add_parser("rotation", help="write Q_{2^k}(t) as a matrix file")
    r.add_argument("--k", type=int, required=True)
    r.add_argument("--t", type=float, required=True)
    r.add_argument("--out")
    r.set_defaults(func=cmd_rotation)

    e = sub.add_parser("eval", help="evaluate a capacity measure")
    e.add_argument("constellation")
    e.add_argument("--rotation")
    e.add_argument("--metric", choices=["R", "R0", "mi", "cm"], default="R")
    snr_flags(e, n0=True)
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--noise-samples", type=int, default=1000)
    e.add_argument("--fading-samples", type=int, default=1000)
    e.add_argument("--no-normalize", action="store_true")
    e.add_argument("--out")
    e.set_defaults(func=cmd_eval)

    o = sub.add_parser("optimize", help="optimize rotation angle and/or shaping levels")
    o.add_argument("mode", choices=["rotation", "alpha", "joint"])
    o.add_argument("constellation", nargs="?")
    o.add_argument("--q", type=int)
    o.add_argument("--init", type=float, nargs="+")
    snr_flags(o, n0=True)
    grid_flags(o)
    o.add_argument("--max-iter", type=int, default=500)
    o.add_argument("--rounds", type=int, default=20)
    o.add_argument("--seed", type=int, default=0)
    o.add_argument("--no-normalize", action="store_true")
    o.add_argument("--out")
    o.add_argument("--out-matrix")
    o.add_argument("--out-constellation")
    o.set_defaults(func=cmd_optimize)

    s = sub.add_parser("sweep", help="run an E_b/N0 sweep from a config file")
    s.add_argument("config")
    s.add_argument("--out")
    s.set_defaults(func=cmd_sweep)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except LineSearchError as exc:
        print(f"lierot: numerical failure: {exc}", file=sys.stderr)
        return 2
    except FloatingPointError as exc:
        print(f"lierot: numerical failure: {exc}", file=sys.stderr)
        return 2
    except (UsageError, ValueError, OSError) as exc:
        print(f"lierot: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
