"""Command-line front end: tables, plot data and an oracle self-check.

Every subcommand writes CSV (default) or JSON to ``--out`` or stdout.
Floats carry 6 significant digits so reruns are byte-identical.

Exit status: 0 success, 1 usage error, 2 verification failure, 3 I/O error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .depol import RateParams, equal_rate_kraus
from .dynamics import (
    closed_form_C,
    closed_form_gamma,
    config_generator,
    cyclic_profile,
    transfer_of_map,
    unequal_rate_functions,
)
from .errors import InvalidParameterError, SwitchMemError
from .measures import (
    blp_memory,
    characteristic_eta,
    configuration_profile,
    full_switch_profile,
    measure,
    partition_measures,
    post_label,
    rhp_memory,
)
from .qmat import (
    DEFAULT_TOL,
    IDENTITY,
    PAULIS,
    KrausSet,
    apply_kraus,
    check_completeness,
)
from .switchnet import (
    MINUS_VECTOR_6,
    SwitchConfig,
    cyclic_orderings,
    plus_vector,
    superchannel_operators,
)

EXIT_OK, EXIT_USAGE, EXIT_VERIFY, EXIT_IO = 0, 1, 2, 3

# (n, X) pairs of the standard block-partition table
TABLE2_PAIRS = ((2, 3), (3, 3), (2, 4), (3, 4), (4, 4), (2, 5), (3, 5))
POST_CHOICES = {"plus": "plus", "minus-vector": "minus", "best": "best"}


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    gamma: float = 2.0
    rates: tuple[float, float, float] | None = None
    n: int | None = None
    n_max: int | None = None
    channels: int | None = None
    partition: tuple[int, ...] | None = None
    post: str = "best"
    fmt: str = "csv"
    out: str | None = None
    tol: float | None = None

    def __post_init__(self):
        if not self.gamma > 0:
            raise UsageError(f"--gamma must be > 0, got {self.gamma}")
        if self.n is not None and self.n < 2:
            raise UsageError(f"--n must be >= 2, got {self.n}")
        if self.fmt not in ("csv", "json"):
            raise UsageError(f"--format must be csv or json, got {self.fmt}")


def fmt_value(v) -> str | None:
    if v is None:
        return None
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        if v == 0:
            v = 0.0  # drop the sign of -0.0
        return f"{v:.6g}"
    if isinstance(v, tuple):
        return "-".join(str(x) for x in v)
    return str(v)


def _json_value(v):
    s = fmt_value(v)
    if s is None or isinstance(v, (str, tuple, bool, np.bool_)):
        return s if not isinstance(v, (bool, np.bool_)) else bool(v)
    if s in ("inf", "-inf"):
        return s
    return int(s) if isinstance(v, (int, np.integer)) else float(s)


def render(columns: Sequence[str], rows: Sequence[dict], fmt: str) -> str:
    if fmt == "json":
        data = [{c: _json_value(r.get(c)) for c in columns} for r in rows]
        return json.dumps(data, indent=2) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow(["" if (s := fmt_value(r.get(c))) is None else s for c in columns])
    return buf.getvalue()


def emit(text: str, out: str | None):
    if out is None or out == "-":
        sys.stdout.write(text)
        return
    try:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {out}: {exc.strerror or exc}") from exc


def _n_range(cfg: RunConfig, lo: int, hi: int) -> range:
    start = cfg.n if cfg.n is not None else lo
    stop = cfg.n_max if cfg.n_max is not None else (cfg.n if cfg.n is not None else hi)
    if stop < start:
        raise UsageError(f"--n-max ({stop}) is below --n ({start})")
    return range(start, stop + 1)


def cmd_table1(cfg: RunConfig):
    cols = ["n", "eta_star", "T_minus", "memory", "normalized", "C_star"]
    rows = []
    for n in _n_range(cfg, 2, 15):
        r = measure(cyclic_profile(n), cfg.gamma, check=False)
        rows.append({"n": n, "eta_star": r.eta_star, "T_minus": r.t_minus, "memory": r.memory,
                     "normalized": r.normalized, "C_star": r.c_star})
    return cols, rows


def _table2_pairs(cfg: RunConfig):
    if cfg.channels is None and cfg.n is None:
        return list(TABLE2_PAIRS)
    xs = [cfg.channels] if cfg.channels is not None else range(3, 6)
    pairs = []
    for X in xs:
        ns = [cfg.n] if cfg.n is not None else range(2, X + 1)
        pairs.extend((n, X) for n in ns if n <= X)
    if not pairs:
        raise UsageError("no (n, X) pair with n <= X")
    return pairs


def cmd_table2(cfg: RunConfig):
    """Best configuration per (n, X); ``eta_star`` is listed next to ``T_minus``."""
    cols = ["n", "X", "partition", "post", "eta_star", "T_minus", "memory", "normalized"]
    rows = []
    for n, X in _table2_pairs(cfg):
        if cfg.partition is not None:
            if len(cfg.partition) != n or sum(cfg.partition) != X:
                raise UsageError(f"--partition {cfg.partition} is not a split of {X} into {n} blocks")
            ks = {"plus": [0], "minus": list(range(1, n)), "best": list(range(n))}[cfg.post]
            cands = []
            for k in ks:
                res = measure(configuration_profile(cfg.partition, k), cfg.gamma, check=False)
                cands.append((res, cfg.partition, post_label(k)))
            r, part, post = max(cands, key=lambda c: c[0].normalized)
        else:
            r = max(partition_measures(X, n, cfg.gamma, cfg.post), key=lambda c: c.normalized)
            part, post = r.partition, r.post
        rows.append({"n": n, "X": X, "partition": part, "post": post, "eta_star": r.eta_star,
                     "T_minus": r.t_minus, "memory": r.memory, "normalized": r.normalized})
    return cols, rows


def cmd_fullswitch(cfg: RunConfig):
    if cfg.channels not in (None, 3):
        raise UsageError("fullswitch supports 3 channels only")
    post = plus_vector(6) if cfg.post == "plus" else MINUS_VECTOR_6
    full = full_switch_profile(3, post)
    cyc = cyclic_profile(3)
    cols = ["config", "measure", "eta_star", "T_minus", "pole", "value", "normalized"]
    rows = []
    for name, prof in (("full-6", full), ("cyclic-3", cyc)):
        root = characteristic_eta(prof, cfg.gamma)
        rhp = rhp_memory(prof, root, cfg.gamma, check=False)
        rows.append({"config": name, "measure": "RHP", "eta_star": rhp.eta_star, "T_minus": rhp.t_minus,
                     "pole": rhp.pole_flag, "value": rhp.memory, "normalized": rhp.normalized})
        if root.markovian:
            continue
        blp = blp_memory(prof, root.eta)
        rows.append({"config": name, "measure": "BLP", "eta_star": root.eta, "T_minus": rhp.t_minus,
                     "pole": root.pole, "value": blp.m_blp, "normalized": blp.normalized})
    return cols, rows


def cmd_plotdata(cfg: RunConfig, curve: str, t_max: float, points: int):
    ts = np.linspace(0.0, t_max, points)
    if curve == "gamma":
        cols = ["t", "n", "six_gamma"]
        rows = []
        for n in _n_range(cfg, 2, 5):
            vals = 6 * closed_form_gamma(n, np.exp(-4 * cfg.gamma * ts), cfg.gamma)
            rows.extend({"t": float(t), "n": n, "six_gamma": float(v)} for t, v in zip(ts, vals))
        return cols, rows
    if curve == "memory":
        cols = ["n", "normalized"]
        return cols, [{"n": n, "normalized": measure(cyclic_profile(n), cfg.gamma, check=False).normalized}
                      for n in _n_range(cfg, 2, 15)]
    if curve == "unequal":
        rates = RateParams(*(cfg.rates or (1.0, 2.0, 3.0)))
        g, g3 = unequal_rate_functions(rates)(ts)
        cols = ["t", "two_gamma_sum"]
        return cols, [{"t": float(t), "two_gamma_sum": float(v)} for t, v in zip(ts, 2 * (2 * g + g3))]
    raise UsageError(f"unknown curve {curve!r}")


def _check(rows, name, residual, tol):
    rows.append({"check": name, "passed": bool(residual <= tol), "residual": float(residual), "tol": tol})


def cmd_verify(cfg: RunConfig, inject_broken: bool = False, draws: int = 100, seed: int = 0):
    """Invariant and oracle suite; any failed row makes the exit status 2."""
    tol_a = cfg.tol if cfg.tol is not None else DEFAULT_TOL.algebraic
    tol_i = cfg.tol if cfg.tol is not None else DEFAULT_TOL.iterated
    rng = np.random.default_rng(seed)
    rows: list[dict] = []
    etas = rng.uniform(0.0, 1.0, draws)

    worst = max(check_completeness(KrausSet(k), tol_a).residual for k in equal_rate_kraus(etas))
    _check(rows, "completeness", worst, tol_a)
    if inject_broken:
        broken = KrausSet(1.01 * equal_rate_kraus(0.5))
        _check(rows, "completeness[injected]", check_completeness(broken, tol_a).residual, tol_a)

    worst_tp = worst_s = worst_gram = worst_fixed = worst_lin = 0.0
    configs = [SwitchConfig.cyclic(2), SwitchConfig.cyclic(3), SwitchConfig.partitioned((2, 1)),
               SwitchConfig.full(3)]
    for eta in etas[: max(1, draws // 10)]:
        ks = KrausSet(equal_rate_kraus(eta))
        out = apply_kraus(ks.operators, 0.5 * IDENTITY)
        worst_tp = max(worst_tp, abs(np.trace(out).real - 1))
        for n in (2, 3):
            S = superchannel_operators(cyclic_orderings(n), [ks] * n)
            gram = np.einsum("kji,kjl->il", S.conj(), S)
            worst_s = max(worst_s, float(np.linalg.norm(gram - np.eye(gram.shape[0]), ord=2)))
        for c in configs:
            emap = c.effective_map(float(eta))
            p = emap.trace_factor()
            if p < 1e-9:
                continue
            tm = transfer_of_map(emap)
            worst_gram = max(worst_gram, tm.linearity_residual)
            fixed = emap.unnormalized(0.5 * IDENTITY) / p
            worst_fixed = max(worst_fixed, float(np.max(np.abs(fixed - 0.5 * IDENTITY))))
            rho = np.array([[0.7, 0.2 - 0.1j], [0.2 + 0.1j, 0.3]])
            direct = emap.unnormalized(rho) / p
            via_g = tm.G @ np.array([1, 2 * rho[0, 1].real, -2 * rho[0, 1].imag, 0.4]) / math.sqrt(2)
            recon = 0.5 * (via_g[0] * math.sqrt(2) * IDENTITY
                           + sum(via_g[i] * math.sqrt(2) * P for i, P in enumerate(PAULIS, 1)))
            worst_lin = max(worst_lin, float(np.max(np.abs(recon - direct))))
    _check(rows, "trace_preservation", worst_tp, tol_a)
    _check(rows, "superchannel_completeness", worst_s, tol_i)
    _check(rows, "gram_proportional", worst_gram, tol_i)
    _check(rows, "fixed_point", worst_fixed, tol_i)
    _check(rows, "linearity", worst_lin, tol_i)

    n_hi = cfg.n_max if cfg.n_max is not None else 6
    grid = np.linspace(0.02, 0.98, 20)
    for n in range(cfg.n or 2, n_hi + 1):
        diff = np.max(np.abs(SwitchConfig.cyclic(n).factors(grid).offdiag - closed_form_C(n, grid)))
        _check(rows, f"closed_vs_bruteforce[n={n}]", diff, 1e-10)

    worst_gen = 0.0
    for n in range(2, min(n_hi, 5) + 1):
        conf = SwitchConfig.cyclic(n)
        for eta in (0.05, 0.3, 0.6, 0.95):
            gen = config_generator(conf, eta, cfg.gamma)
            ref = closed_form_gamma(n, eta, cfg.gamma)
            worst_gen = max(worst_gen, max(abs(g - ref) for g in gen.as_tuple()))
    _check(rows, "generator_crosscheck", worst_gen, 1e-6)
    return ["check", "passed", "residual", "tol"], rows


def _parse_partition(s: str) -> tuple[int, ...]:
    try:
        parts = tuple(int(x) for x in s.replace("-", ",").split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid partition {s!r}")
    if not parts or min(parts) < 1:
        raise argparse.ArgumentTypeError(f"partition blocks must be positive: {s!r}")
    return parts


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--gamma", type=float, default=2.0, help="equal decay rate (default 2)")
    common.add_argument("--gamma1", type=float)
    common.add_argument("--gamma2", type=float)
    common.add_argument("--gamma3", type=float)
    common.add_argument("--n", type=int, help="number of channel slots (or first n of a range)")
    common.add_argument("--n-max", type=int, help="last n of a range")
    common.add_argument("--channels", type=int, help="number of distinct channels X")
    common.add_argument("--partition", type=_parse_partition, help="block sizes, e.g. 3,1,1")
    common.add_argument("--post", choices=sorted(POST_CHOICES), default=None,
                        help="post-selected control outcome")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--out", help="output path (default stdout)")
    common.add_argument("--tol", type=float, help="override check tolerance")

    p = _Parser(prog="switchmem", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("table1", parents=[common], help="cyclic switch, n channels, n-dim control")
    sub.add_parser("table2", parents=[common], help="n slots over X channels, best block split")
    sub.add_parser("fullswitch", parents=[common], help="6-dim control over all orders of 3 channels")
    pd = sub.add_parser("plotdata", parents=[common], help="curve data")
    pd.add_argument("--curve", choices=("gamma", "memory", "unequal"), required=True,
                    help="gamma: 6*Gamma(t) per n; memory: normalized memory vs n; "
                         "unequal: 2(2Gamma+Gamma3)(t) at unequal rates (default 1,2,3)")
    pd.add_argument("--t-max", type=float, default=1.0)
    pd.add_argument("--points", type=int, default=201)
    v = sub.add_parser("verify", parents=[common], help="invariant and oracle checks")
    v.add_argument("--inject-broken", action="store_true", help="add a non-trace-preserving Kraus set")
    v.add_argument("--draws", type=int, default=100)
    v.add_argument("--seed", type=int, default=0)
    return p


def _config(args) -> RunConfig:
    given = [args.gamma1, args.gamma2, args.gamma3]
    rates = None
    if any(g is not None for g in given):
        if any(g is None for g in given):
            raise UsageError("--gamma1, --gamma2 and --gamma3 go together")
        rates = tuple(float(g) for g in given)
    default_post = "minus-vector" if args.command == "fullswitch" else "best"
    post = args.post or default_post
    if args.command == "fullswitch" and post == "best":
        raise UsageError("fullswitch takes --post plus or minus-vector")
    return RunConfig(args.gamma, rates, args.n, args.n_max, args.channels, args.partition,
                     post if args.command == "fullswitch" else POST_CHOICES[post],
                     args.format, args.out, args.tol)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = _config(args)
        if args.command == "table1":
            cols, rows = cmd_table1(cfg)
        elif args.command == "table2":
            cols, rows = cmd_table2(cfg)
        elif args.command == "fullswitch":
            cols, rows = cmd_fullswitch(cfg)
        elif args.command == "plotdata":
            if args.points < 2 or not args.t_max > 0:
                raise UsageError("--points must be >= 2 and --t-max > 0")
            cols, rows = cmd_plotdata(cfg, args.curve, args.t_max, args.points)
        else:
            cols, rows = cmd_verify(cfg, args.inject_broken, args.draws, args.seed)
        emit(render(cols, rows, cfg.fmt), cfg.out)
    except (UsageError, InvalidParameterError) as exc:
        print(f"switchmem: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"switchmem: {exc}", file=sys.stderr)
        return EXIT_IO
    except SwitchMemError as exc:
        print(f"switchmem: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    if args.command == "verify" and not all(r["passed"] for r in rows):
        return EXIT_VERIFY
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
