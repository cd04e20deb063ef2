"""Command-line front end: figure data files, point queries, validation suites.

Exit codes: 0 on success, 1 when a validation suite fails (or output cannot
be written), 2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence, Union

import numpy as np

from . import __version__
from .asymptotics import (
    loss_coefficient,
    nmax_approx,
    normal_cdf,
    profile,
    prop3_limits,
)
from .conversion import brute_force_fidelity, concentration_fidelity, dilution_fidelity
from .errors import InvalidSpec, IoFailure, ParamError
from .spectrum import SchmidtVector, log2_prefix_sqrt_mass, make_schmidt, power_spectrum
from .tradeoff import delta_curve, generalized_mcre, max_recoverable, mcre

QUERY_KINDS = ("mcre", "gmcre", "nmax", "error-conc", "error-dil", "profile")
SUITES = ("oracle", "identities", "asymptotic")

_DEFAULTS = {
    "p": 0.1,
    "n": 3000,
    "kmax": 10,
    "format": "csv",
    "jobs": 1,
    "seed": 0,
}


@dataclass(frozen=True)
class FigureSpec:
    """Everything needed to produce one figure data file."""

    figure_id: str
    state: SchmidtVector
    n: int
    kmax: int
    epsilon_grid: tuple[float, ...]
    b_grid: tuple[float, ...]
    output_path: str
    format: str
    jobs: int


def _parse_float_list(text: str, what: str) -> tuple[float, ...]:
    try:
        values = tuple(float(tok) for tok in text.split(",") if tok.strip())
    except ValueError as exc:
        raise ParamError(f"cannot parse {what} list {text!r}") from exc
    if not values:
        raise ParamError(f"empty {what} list")
    return values


def _load_config(path: Union[str, None]) -> dict[str, str]:
    if path is None:
        return {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParamError(f"cannot read config file {path}: {exc}") from exc
    config: dict[str, str] = {}
    for line_no, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ParamError(f"config line {line_no} is not key=value: {line!r}")
        key, value = line.split("=", 1)
        config[key.strip()] = value.strip()
    return config


def _resolve(cli_value, config: dict[str, str], key: str, cast):
    """Flags beat the config file, which beats the built-in default."""
    if cli_value is not None:
        return cli_value
    if key in config:
        try:
            return cast(config[key])
        except ValueError as exc:
            raise ParamError(f"config value {key}={config[key]!r} is not valid") from exc
    return _DEFAULTS.get(key)


def _resolve_state(args, config: dict[str, str]) -> SchmidtVector:
    if getattr(args, "p", None) is not None and getattr(args, "schmidt", None) is not None:
        raise ParamError("give either --p or --schmidt, not both")
    if getattr(args, "schmidt", None) is not None:
        return make_schmidt(_parse_float_list(args.schmidt, "schmidt"))
    if "schmidt" in config and getattr(args, "p", None) is None:
        return make_schmidt(_parse_float_list(config["schmidt"], "schmidt"))
    p = _resolve(getattr(args, "p", None), config, "p", float)
    if not 0.0 < p < 1.0:
        raise ParamError(f"--p must be in (0, 1), got {p}")
    return make_schmidt([p, 1.0 - p])


def _format_value(value) -> str:
    if isinstance(value, float):
        return repr(float(value))
    return str(value)


def _render_csv(metadata: list[tuple[str, str]], columns: Sequence[str], rows) -> str:
    lines = [f"# {key}={value}" for key, value in metadata]
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(_format_value(v) for v in row))
    return "\n".join(lines) + "\n"


def _render_json(metadata: list[tuple[str, str]], columns: Sequence[str], rows) -> str:
    payload = {
        "metadata": dict(metadata),
        "columns": list(columns),
        "rows": [list(row) for row in rows],
    }
    return json.dumps(payload, sort_keys=True, separators=(", ", ": ")) + "\n"


def _state_text(sv: SchmidtVector) -> str:
    return ",".join(repr(p) for p in sv.probs)


def run_figure(spec: FigureSpec) -> tuple[Sequence[str], list, list[tuple[str, str]]]:
    """Compute the rows of one figure; returns (columns, rows, metadata)."""
    sv = spec.state
    metadata: list[tuple[str, str]] = [
        ("figure", spec.figure_id),
        ("state", _state_text(sv)),
        ("version", __version__),
    ]
    if spec.figure_id == "fig2":
        metadata.append(("kmax", str(spec.kmax)))
        metadata.append(("units", "log2_n:bits,delta:1"))
        points = delta_curve(sv, [1 << k for k in range(1, spec.kmax + 1)], jobs=spec.jobs)
        rows = [(k, delta) for k, (_n, delta) in enumerate(points, start=1)]
        return ("log2_n", "delta"), rows, metadata
    if spec.figure_id == "fig3":
        prof = profile(sv)
        if prof.variance_V <= 0.0:
            raise InvalidSpec("fig3 needs a state with non-flat spectrum (V > 0)")
        metadata.append(("units", "b:bits_per_sqrt_copy,conc_limit:1,dil_limit:1"))
        rows = []
        for b in spec.b_grid:
            conc, dil = prop3_limits(sv, prof.entropy_S, b)
            rows.append((b, conc, dil))
        return ("b", "conc_limit", "dil_limit"), rows, metadata
    if spec.figure_id == "fig4":
        prof = profile(sv)
        if prof.variance_V <= 0.0 or prof.entropy_S <= 0.0:
            raise InvalidSpec("fig4 needs a state with V > 0 and S > 0")
        metadata.append(("n", str(spec.n)))
        metadata.append(("units", "epsilon:1,N_exact:copies,N_approx:copies"))

        def one(eps: float) -> tuple[float, int, float]:
            return eps, max_recoverable(sv, spec.n, eps), nmax_approx(sv, spec.n, eps)

        if spec.jobs > 1:
            from concurrent.futures import ThreadPoolExecutor

            with ThreadPoolExecutor(max_workers=spec.jobs) as pool:
                rows = list(pool.map(one, spec.epsilon_grid))
        else:
            rows = [one(eps) for eps in spec.epsilon_grid]
        return ("epsilon", "N_exact", "N_approx"), rows, metadata
    if spec.figure_id == "fig5":
        metadata.append(("units", "epsilon:1,coefficient:copies_per_sqrt_copy"))
        rows = [(eps, loss_coefficient(sv, eps, loss_scale=1.0)) for eps in spec.epsilon_grid]
        return ("epsilon", "coefficient"), rows, metadata
    raise InvalidSpec(f"unknown figure id {spec.figure_id!r}")


def _cmd_fig(args) -> int:
    config = _load_config(args.config)
    state = _resolve_state(args, config)
    figure_id = f"fig{args.id}"
    eps_default = {
        "fig4": tuple(0.05 * i for i in range(1, 20)),
        "fig5": tuple(0.01 * i for i in range(1, 100)),
    }.get(figure_id, ())
    eps_grid = (
        _parse_float_list(args.eps_grid, "epsilon")
        if args.eps_grid is not None
        else (_parse_float_list(config["eps_grid"], "epsilon") if "eps_grid" in config else eps_default)
    )
    for eps in eps_grid:
        if not 0.0 < eps < 1.0:
            raise ParamError(f"epsilon values must lie in (0, 1), got {eps}")
    b_grid = (
        _parse_float_list(args.b_grid, "b")
        if args.b_grid is not None
        else tuple(float(b) for b in np.linspace(-4.0, 4.0, 81))
    )
    spec = FigureSpec(
        figure_id=figure_id,
        state=state,
        n=_resolve(args.n, config, "n", int),
        kmax=_resolve(args.kmax, config, "kmax", int),
        epsilon_grid=eps_grid,
        b_grid=b_grid,
        output_path=args.out,
        format=_resolve(args.format, config, "format", str),
        jobs=_resolve(args.jobs, config, "jobs", int),
    )
    if spec.n < 1 or spec.kmax < 1:
        raise ParamError("--n and --kmax must be >= 1")
    if spec.format not in ("csv", "json"):
        raise ParamError(f"unknown format {spec.format!r}")

    start = time.perf_counter()
    columns, rows, metadata = run_figure(spec)
    for row in rows:
        for value in row:
            if isinstance(value, float) and not math.isfinite(value):
                raise InvalidSpec(f"non-finite value {value!r} in output row {row}")
    text = (_render_csv if spec.format == "csv" else _render_json)(metadata, columns, rows)
    try:
        Path(spec.output_path).write_text(text)
    except OSError as exc:
        raise IoFailure(f"cannot write {spec.output_path}: {exc}") from exc
    elapsed = time.perf_counter() - start
    print(f"wrote {spec.output_path} ({len(rows)} rows) in {elapsed:.2f}s")
    return 0


def _param(args, config: dict[str, str], name: str, cast):
    """Query parameters come from flags or the config file, never defaults."""
    value = getattr(args, name)
    if value is not None:
        return value
    if name in config:
        try:
            return cast(config[name])
        except ValueError as exc:
            raise ParamError(f"config value {name}={config[name]!r} is not valid") from exc
    raise ParamError(f"query kind {args.kind!r} requires --{name}")


def _cmd_query(args) -> int:
    config = _load_config(args.config)
    state = _resolve_state(args, config)
    record: dict[str, object] = {"kind": args.kind, "state": _state_text(state)}
    kind = args.kind
    if kind == "mcre":
        n = _param(args, config, "n", int)
        result = mcre(state, n)
        record.update(
            n=n,
            delta=result.delta,
            optimal_m=result.optimal_m,
            concentration_error=result.concentration_error,
            recovery_error=result.recovery_error,
        )
    elif kind == "gmcre":
        n = _param(args, config, "n", int)
        N = _param(args, config, "N", int)
        result = generalized_mcre(state, n, N)
        record.update(
            n=n,
            N=N,
            delta=result.delta,
            optimal_m=result.optimal_m,
            concentration_error=result.concentration_error,
            recovery_error=result.recovery_error,
        )
    elif kind == "nmax":
        n = _param(args, config, "n", int)
        eps = _param(args, config, "eps", float)
        n_exact = max_recoverable(state, n, eps)
        record.update(n=n, eps=eps, N_max=n_exact, loss=n - n_exact)
        prof = profile(state)
        if prof.variance_V > 0.0 and prof.entropy_S > 0.0 and eps < 1.0:
            record["N_approx"] = nmax_approx(state, n, eps)
        if n_exact >= 1:
            record["delta_at_N_max"] = generalized_mcre(state, n, n_exact).delta
    elif kind == "error-conc":
        n = _param(args, config, "n", int)
        m = _param(args, config, "m", int)
        if n < 0 or m < 1:
            raise ParamError("error-conc needs n >= 0 and m >= 1")
        result = concentration_fidelity(power_spectrum(state, n), 1 << m)
        record.update(
            n=n,
            m=m,
            error=result.error,
            fidelity=result.fidelity,
            flatten_index_J=result.flatten_index_J,
        )
    elif kind == "error-dil":
        N = _param(args, config, "N", int)
        m = _param(args, config, "m", int)
        if N < 0 or m < 1:
            raise ParamError("error-dil needs N >= 0 and m >= 1")
        result = dilution_fidelity(power_spectrum(state, N), 1 << m)
        record.update(N=N, m=m, error=result.error, fidelity=result.fidelity)
    elif kind == "profile":
        prof = profile(state)
        record.update(
            entropy_S=prof.entropy_S,
            variance_V=prof.variance_V,
            sqrt_V=prof.sqrt_V,
            loss_scale=prof.loss_scale,
        )
    else:
        raise ParamError(f"unknown query kind {kind!r}")

    if args.format == "csv":
        keys = list(record)
        print(",".join(keys))
        print(",".join(_format_value(record[k]) for k in keys))
    else:
        print(json.dumps(record, sort_keys=True))
    return 0


def _dense_spectrum(sv: SchmidtVector, n: int) -> np.ndarray:
    """All rank^n eigenvalue products, sorted descending (validation only)."""
    spec = np.ones(1)
    base = np.asarray(sv.probs)
    for _ in range(n):
        spec = np.multiply.outer(spec, base).ravel()
    return np.sort(spec)[::-1]


def _dense_concentration_error(p: np.ndarray, L: int) -> float:
    prefix = np.concatenate(([0.0], np.cumsum(p)))
    total = float(prefix[-1])
    J = L - 1
    for j in range(L):
        tail = total - float(prefix[j]) if j < p.size else 0.0
        nxt = float(p[j]) if j < p.size else 0.0
        if tail / (L - j) >= nxt * (1.0 - 1e-12) - 1e-15:
            J = j
            break
    sqrt_prefix = float(np.sqrt(p[:J]).sum())
    tail = total - float(prefix[J]) if J < p.size else 0.0
    tail = max(tail, 0.0)
    fidelity = sqrt_prefix / math.sqrt(L) + math.sqrt((1.0 - J / L) * tail)
    return 1.0 - min(fidelity, 1.0) ** 2


class _Report:
    def __init__(self) -> None:
        self.failed = False

    def check(self, name: str, deviation: float, tolerance: float) -> None:
        ok = deviation <= tolerance
        self.failed |= not ok
        status = "PASS" if ok else "FAIL"
        print(f"{status}  {name}: max deviation {deviation:.3e} (tolerance {tolerance:.1e})")


def _suite_oracle(seed: int) -> _Report:
    rng = np.random.default_rng(seed)
    report = _Report()
    worst = 0.0
    trials = 0
    for _ in range(200):
        rank = int(rng.integers(2, 5))
        probs = rng.dirichlet(np.ones(rank))
        sv = make_schmidt(probs.tolist())
        single = power_spectrum(sv, 1)
        for L in range(2, 9):
            formula = concentration_fidelity(single, L).fidelity
            oracle = brute_force_fidelity(sv, L)
            worst = max(worst, abs(formula - oracle))
            trials += 1
    print(f"compared 200 random states across L in 2..8 ({trials} pairs)")
    report.check("concentration fidelity vs brute-force oracle", worst, 1e-6)
    return report


def _suite_identities() -> _Report:
    report = _Report()
    sv = make_schmidt([0.9, 0.1])

    mass_dev = 0.0
    sqrt_dev = 0.0
    count_dev = 0.0
    log2_sqrt_single = math.log2(math.fsum(math.sqrt(p) for p in sv.probs))
    for n in range(1, 65):
        ls = power_spectrum(sv, n)
        mass_dev = max(mass_dev, abs(math.pow(2.0, float(ls.prefix_log2_mass[-1])) - 1.0))
        sqrt_dev = max(
            sqrt_dev,
            abs(log2_prefix_sqrt_mass(ls, ls.total_count) - n * log2_sqrt_single),
        )
        count_dev = max(count_dev, abs(ls.total_count - 2**n))
    report.check("total mass equals 1", mass_dev, 1e-10)
    report.check("log2 of total sqrt-mass equals n*log2(sum sqrt p)", sqrt_dev, 1.5e-9)
    report.check("total count equals rank^n", count_dev, 0.0)

    dense_dev = 0.0
    for probs in ([0.9, 0.1], [0.5, 0.3, 0.2]):
        svd = make_schmidt(probs)
        for n in range(0, 13):
            ls = power_spectrum(svd, n)
            dense = _dense_spectrum(svd, n)
            expanded = np.repeat(
                np.power(2.0, ls.log2_eigenvalues),
                [lv.multiplicity for lv in ls.levels],
            )
            dense_dev = max(dense_dev, float(np.max(np.abs(expanded - dense))))
    report.check("leveled spectrum equals dense enumeration", dense_dev, 1e-12)

    mono_dev = 0.0
    ls16 = power_spectrum(sv, 16)
    conc = [concentration_fidelity(ls16, 1 << m).error for m in range(1, 33)]
    dil = [dilution_fidelity(ls16, 1 << m).error for m in range(1, 33)]
    for a, b in zip(conc, conc[1:]):
        mono_dev = max(mono_dev, a - b)
    for a, b in zip(dil, dil[1:]):
        mono_dev = max(mono_dev, b - a)
    deltas = [generalized_mcre(sv, 32, N).delta for N in range(1, 33)]
    for a, b in zip(deltas, deltas[1:]):
        mono_dev = max(mono_dev, a - b)
    report.check("monotonicity (conc in m, dil in m, delta in N)", mono_dev, 1e-12)
    return report


def _suite_asymptotic(n: int) -> _Report:
    report = _Report()
    sv = make_schmidt([0.9, 0.1])
    prof = profile(sv)
    ls = power_spectrum(sv, n)
    conc_dev = 0.0
    dil_dev = 0.0
    for b in (-1.0, 0.0, 1.0):
        m = int(math.floor(prof.entropy_S * n + b * math.sqrt(n)))
        limit = normal_cdf(b / prof.sqrt_V)
        conc = concentration_fidelity(ls, 1 << m).error
        dil = dilution_fidelity(ls, 1 << m).error
        conc_dev = max(conc_dev, abs(conc - limit))
        dil_dev = max(dil_dev, abs(dil - (1.0 - limit)))
    report.check(f"concentration error vs Gaussian limit at n={n}", conc_dev, 0.05)
    report.check(f"dilution error vs Gaussian limit at n={n}", dil_dev, 0.05)
    return report


def _cmd_validate(args) -> int:
    if args.suite == "oracle":
        report = _suite_oracle(args.seed if args.seed is not None else _DEFAULTS["seed"])
    elif args.suite == "identities":
        report = _suite_identities()
    elif args.suite == "asymptotic":
        report = _suite_asymptotic(args.n if args.n is not None else _DEFAULTS["n"])
    else:
        raise ParamError(f"unknown suite {args.suite!r}")
    return 1 if report.failed else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="concrec",
        description=(
            "Exact LOCC concentration/dilution errors between tensor-power "
            "states and EPR blocks, trade-off curves, and their Gaussian "
            "second-order approximations."
        ),
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    fig = sub.add_parser("fig", help="write one figure data file")
    fig.add_argument("--id", type=int, required=True, choices=(2, 3, 4, 5))
    fig.add_argument("--p", type=float, help="qubit parameter: state sqrt(p)|00> + sqrt(1-p)|11>")
    fig.add_argument("--schmidt", type=str, help="comma-separated squared Schmidt coefficients")
    fig.add_argument("--n", type=int, help="copy count for fig4 (default 3000)")
    fig.add_argument("--kmax", type=int, help="fig2 scans n = 2^1 .. 2^kmax (default 10)")
    fig.add_argument("--eps-grid", type=str, help="comma-separated error budgets for fig4/fig5")
    fig.add_argument("--b-grid", type=str, help="comma-separated second-order rates for fig3")
    fig.add_argument("--out", type=str, required=True)
    fig.add_argument("--format", choices=("csv", "json"))
    fig.add_argument("--jobs", type=int, help="thread count for independent grid points")
    fig.add_argument("--config", type=str, help="key=value defaults file")
    fig.set_defaults(func=_cmd_fig)

    query = sub.add_parser("query", help="print one record for a single quantity")
    query.add_argument("--kind", required=True, choices=QUERY_KINDS)
    query.add_argument("--p", type=float)
    query.add_argument("--schmidt", type=str)
    query.add_argument("--n", type=int)
    query.add_argument("--N", type=int)
    query.add_argument("--m", type=int)
    query.add_argument("--eps", type=float)
    query.add_argument("--format", choices=("csv", "json"), default="json")
    query.add_argument("--config", type=str)
    query.set_defaults(func=_cmd_query)

    validate = sub.add_parser("validate", help="run a self-check suite")
    validate.add_argument("--suite", required=True, choices=SUITES)
    validate.add_argument("--seed", type=int)
    validate.add_argument("--n", type=int)
    validate.set_defaults(func=_cmd_validate)
    return parser


def main(argv: Union[Sequence[str], None] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except IoFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:  # includes every errors.Error subclass
        print(f"error: {exc}", file=sys.stderr)
        print(f"run 'concrec {args.command} --help' for usage", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
