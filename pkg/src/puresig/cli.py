"""Batch driver: every subsystem behind one subcommand with reproducible output.

Config values come from an optional TOML file; explicit command-line flags
override file values.  CSV output carries a fixed schema header plus a
trailing comment with the tool version and a hash of the resolved config,
so identical configs produce byte-identical artifacts.

Exit codes: 1 invalid configuration, 2 resource guard tripped,
3 solver non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import sys

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

from . import __version__, develop, hsfree, polysys, signature
from .lie import bracket_str, expand_bracket, hall_basis, parse_lie
from .tensor import TermBudgetError, norm, project

EXIT_BAD_CONFIG = 1
EXIT_RESOURCE = 2
EXIT_SOLVER = 3


def _config_hash(cfg: dict) -> str:
    canon = json.dumps(cfg, sort_keys=True, default=str)
    return hashlib.sha256(canon.encode()).hexdigest()[:12]


def _meta(cfg: dict) -> str:
    return f"puresig {__version__} config_hash={_config_hash(cfg)}"


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _rows_csv(header: list[str], rows: list[list], meta: str) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow(row)
    buf.write(f"# {meta}\n")
    return buf.getvalue()


def _json_doc(payload: dict, cfg: dict) -> str:
    doc = {"meta": {"version": __version__, "config_hash": _config_hash(cfg)}}
    doc.update(payload)
    return json.dumps(doc, indent=2, default=str) + "\n"


# -- subcommand handlers -------------------------------------------------------


def _cmd_tail(cfg: dict) -> str:
    lie = parse_lie(cfg["lie"])
    report = signature.tail_sequence(
        lie,
        cfg["m"],
        cfg["N"],
        cfg.get("norm", "l1"),
        cfg.get("N0"),
        cfg.get("budget", signature.DEFAULT_TERM_BUDGET),
        dense=bool(cfg.get("dense", False)),
    )
    if cfg.get("format", "csv") == "json":
        return _json_doc({"tail": report.to_dict()}, cfg)
    return report.to_csv(_meta(cfg))


def _cmd_upper(cfg: dict) -> str:
    lie = parse_lie(cfg["lie"])
    m, nmax, which = cfg["m"], cfg["N"], cfg.get("norm", "l1")
    table = signature.dense_norm_table(
        lie, nmax, cfg.get("budget", signature.DEFAULT_TERM_BUDGET)
    )
    rows = []
    for n in range(1, nmax + 1):
        actual = table[n][0 if which == "l1" else 1]
        bound = signature.upper_bound_series(lie, m, n, which)
        ratio = actual / bound if bound else 0.0
        rows.append([n, repr(actual), repr(bound), repr(ratio)])
    if cfg.get("format", "csv") == "json":
        payload = [
            {"n": int(r[0]), "actual": float(r[1]), "bound": float(r[2]), "ratio": float(r[3])}
            for r in rows
        ]
        return _json_doc({"upper": payload}, cfg)
    return _rows_csv(["n", "actual", "bound", "ratio"], rows, _meta(cfg))


def _cmd_localvar(cfg: dict) -> str:
    lie = parse_lie(cfg["lie"])
    values = signature.local_variation(lie, cfg["m"], cfg.get("levels", 10), cfg.get("norm", "l1"))
    rows = [[j, repr(v)] for j, v in enumerate(values)]
    if cfg.get("format", "csv") == "json":
        return _json_doc({"localvar": [{"j": j, "value": v} for j, v in enumerate(values)]}, cfg)
    return _rows_csv(["j", "value"], rows, _meta(cfg))


def _cmd_hall(cfg: dict) -> str:
    d, m = cfg["d"], cfg["m"]
    rows = []
    for i, t in enumerate(hall_basis(d, m)):
        x = expand_bracket(t, d)
        rows.append([i, bracket_str(t), str(norm(x, "l1")), repr(norm(x, "hs"))])
    if cfg.get("format", "csv") == "json":
        payload = [
            {"index": r[0], "bracket": r[1], "l1": r[2], "hs": float(r[3])} for r in rows
        ]
        return _json_doc({"hall": payload, "dim_free_lie": len(rows)}, cfg)
    return _rows_csv(["index", "bracket", "l1_norm", "hs_norm"], rows, _meta(cfg))


def _default_preset_lie(preset: develop.Preset) -> str:
    signs = [1 if c == "+" else -1 for c in preset.signs]
    text = "e1"
    for s, t in zip(signs, preset.hall):
        text += (" + " if s > 0 else " - ") + bracket_str(t)
    return text


def _cmd_develop(cfg: dict) -> str:
    if cfg.get("preset"):
        preset = develop.preset_development(cfg["preset"], cfg.get("signs"))
        dev = preset.dev
        m = dev.meta.get("m", cfg.get("m"))
        lie_text = cfg.get("lie") or _default_preset_lie(preset)
    else:
        if "dev_json" not in cfg or "m" not in cfg:
            raise ValueError("custom developments need dev_json and m")
        with open(cfg["dev_json"]) as fh:
            dev = develop.Development.from_json(fh.read())
        m = cfg["m"]
        if not cfg.get("lie"):
            raise ValueError("custom developments need a --lie element")
        lie_text = cfg["lie"]
        preset = None
    lie = parse_lie(lie_text)
    op = float(develop.operator_norm(dev))
    bound = develop.eigen_lower_bound(dev, lie, m)
    lm_norm = float(norm(project(lie.to_tensor(m), m), "l1"))
    lambdas = [float(x) for x in cfg.get("lambdas", [1.0, 2.0, 4.0])]
    curve = develop.growth_curve(
        dev, lie, m, lambdas, trunc=cfg.get("N", 40), require_agreement=False
    )
    payload = {
        "preset": cfg.get("preset"),
        "signs": cfg.get("signs"),
        "lie": lie_text,
        "m": m,
        "operator_norm": op,
        "eigen_lower_bound": bound,
        "pi_m_norm": lm_norm,
        "factor": bound / lm_norm if lm_norm else None,
        "growth_curve": [
            {"lambda": lam, "value": v, "agreement": a, "trunc": n}
            for lam, v, a, n in zip(curve.lambdas, curve.values, curve.agreements, curve.trunc_used)
        ],
    }
    if preset is not None:
        payload["expected_norm"] = preset.expected_norm
        payload["expected_factor"] = preset.expected_factor
    if cfg.get("format", "csv") == "json":
        return _json_doc(payload, cfg)
    rows = [[r["lambda"], repr(r["value"]), repr(r["agreement"]), r["trunc"]] for r in payload["growth_curve"]]
    summary = (
        f"operator_norm={op!r} eigen_lower_bound={bound!r} factor={payload['factor']!r}"
    )
    return _rows_csv(
        ["lambda", "value", "agreement", "trunc"], rows, f"{summary}\n# {_meta(cfg)}"
    )


def _parse_targets(text: str) -> list[complex]:
    items = [s for chunk in text.split(";") for s in chunk.split(",") if s.strip()]
    return [complex(s.strip().replace(" ", "")) for s in items]


def _cmd_solve(cfg: dict) -> str:
    d, m = cfg.get("d", 2), cfg["m"]
    polys = polysys.polys_from_hall(d, m)
    targets = _parse_targets(str(cfg["targets"]))
    if len(targets) != len(polys):
        raise ValueError(f"expected {len(polys)} targets for (d={d}, m={m})")
    result = polysys.solve_targets(
        polys,
        targets,
        m,
        d,
        seed=cfg.get("seed", 0),
        restarts=cfg.get("restarts", 64),
        tol=cfg.get("tol", 1e-10),
        block_cap=cfg.get("k"),
    )
    payload = json.loads(result.to_json())
    payload["system"] = json.loads(result.system.to_json())
    return _json_doc({"solve": payload}, cfg)


def _cmd_hs_check(cfg: dict) -> str:
    la = parse_lie(cfg["a"]).to_tensor()
    lb = parse_lie(cfg["b"]).to_tensor()
    rows = hsfree.orthogonality_check(la, lb, cfg.get("K", 6))
    if cfg.get("format", "csv") == "json":
        payload = [
            {
                "k": r.k,
                "inner_product": str(r.inner),
                "condition_holds": r.condition_holds,
                "lower_bound": r.lower_bound,
            }
            for r in rows
        ]
        return _json_doc({"hs_check": payload}, cfg)
    return hsfree.rows_to_csv(rows, _meta(cfg))


def _cmd_separate(cfg: dict) -> str:
    l1 = parse_lie(cfg["lie"])
    l2 = parse_lie(cfg["lie2"])
    dev, eps = develop.separate_points(
        l1, l2, seed=cfg.get("seed", 0), tol=cfg.get("tol", 1e-9),
        restarts=cfg.get("restarts", 64),
    )
    payload = {
        "epsilon": eps,
        "development": json.loads(dev.to_json()),
    }
    return _json_doc({"separate": payload}, cfg)


_HANDLERS = {
    "tail": _cmd_tail,
    "upper": _cmd_upper,
    "localvar": _cmd_localvar,
    "hall": _cmd_hall,
    "develop": _cmd_develop,
    "solve": _cmd_solve,
    "hs-check": _cmd_hs_check,
    "separate": _cmd_separate,
}

_INT_KEYS = {"m", "N", "N0", "d", "K", "levels", "seed", "restarts", "k", "budget"}
_FLOAT_KEYS = {"tol"}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="puresig",
        description="Signature tails, developments and lower-bound systems for exponential paths",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help="TOML file with defaults for this subcommand")
        p.add_argument("--out", help="output path (default stdout)")
        p.add_argument("--format", choices=["csv", "json"])
        p.add_argument("--exact", action="store_true", help="kept for config-file symmetry")

    p = sub.add_parser("tail", help="normalized tail values t_n and window supremum")
    add_common(p)
    p.add_argument("--lie")
    p.add_argument("--m", type=int)
    p.add_argument("--N", type=int)
    p.add_argument("--N0", type=int)
    p.add_argument("--norm", choices=["l1", "hs"])
    p.add_argument("--budget", type=int)
    p.add_argument("--dense", action="store_true", help="double-precision dense kernel")

    p = sub.add_parser("upper", help="per-degree norm vs combinatorial upper bound")
    add_common(p)
    p.add_argument("--lie")
    p.add_argument("--m", type=int)
    p.add_argument("--N", type=int)
    p.add_argument("--norm", choices=["l1", "hs"])
    p.add_argument("--budget", type=int)

    p = sub.add_parser("localvar", help="dyadic variation sums converging to ||pi_m(l)||")
    add_common(p)
    p.add_argument("--lie")
    p.add_argument("--m", type=int)
    p.add_argument("--levels", type=int)
    p.add_argument("--norm", choices=["l1", "hs"])

    p = sub.add_parser("hall", help="Lyndon basis elements and their norms")
    add_common(p)
    p.add_argument("--d", type=int)
    p.add_argument("--m", type=int)

    p = sub.add_parser("develop", help="preset or custom development report")
    add_common(p)
    p.add_argument("--preset", choices=list(develop.PRESET_CASES))
    p.add_argument("--signs")
    p.add_argument("--lie")
    p.add_argument("--m", type=int)
    p.add_argument("--N", type=int)
    p.add_argument("--dev-json", dest="dev_json")
    p.add_argument("--lambdas", type=float, nargs="+")

    p = sub.add_parser("solve", help="solve a block target system")
    add_common(p)
    p.add_argument("--d", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--targets")
    p.add_argument("--k", type=int, help="block cap (default 4^(nu-1) nu!)")
    p.add_argument("--seed", type=int)
    p.add_argument("--restarts", type=int)
    p.add_argument("--tol", type=float)

    p = sub.add_parser("hs-check", help="orthogonality table for two homogeneous Lie parts")
    add_common(p)
    p.add_argument("--a")
    p.add_argument("--b")
    p.add_argument("--K", type=int)

    p = sub.add_parser("separate", help="find a development separating two Lie polynomials")
    add_common(p)
    p.add_argument("--lie")
    p.add_argument("--lie2")
    p.add_argument("--seed", type=int)
    p.add_argument("--restarts", type=int)
    p.add_argument("--tol", type=float)

    return parser


def resolve_config(args: argparse.Namespace) -> dict:
    cfg: dict = {}
    if args.config:
        with open(args.config, "rb") as fh:
            file_cfg = tomllib.load(fh)
        for key, value in file_cfg.items():
            cfg[key] = value
    for key, value in vars(args).items():
        if key in ("config", "command") or value is None or value is False:
            continue
        cfg[key] = value
    cfg["command"] = args.command
    for key in list(cfg):
        if key in _INT_KEYS and cfg[key] is not None:
            cfg[key] = int(cfg[key])
        if key in _FLOAT_KEYS and cfg[key] is not None:
            cfg[key] = float(cfg[key])
    return cfg


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        handler = _HANDLERS[args.command]
        text = handler(cfg)
    except TermBudgetError as exc:
        print(f"resource guard: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except polysys.SolverError as exc:
        print(f"solver failed: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (ValueError, KeyError, OSError, TypeError) as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return EXIT_BAD_CONFIG
    _emit(text, cfg.get("out"))
    return 0


if __name__ == "__main__":
    sys.exit(main())
