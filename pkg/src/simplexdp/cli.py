"""Command-line front end.

Subcommands::

    count             summarise a vector or chain CSV
    privatize-vector  release a private count vector with its budget
    privatize-chain   release a private transition matrix with its budget
    calibrate         concentration k for a target epsilon
    delta             Monte-Carlo delta for a configuration
    analyze           accuracy and perturbation bounds (no randomness)
    merge             relabel a CSV through a merge map
    sweep             budget and empirical accuracy over a grid of k

Reports are JSON with a fixed key order; sweeps write CSV. Every failure prints
``error: code=<code> reason=<message>`` on stderr and exits with a status
specific to the error class; warnings print as one
``warning: category=<name> reason=<message>`` line each.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import warnings
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .accuracy import (
    AccuracyReport,
    accuracy_report,
    coord_error_bounds,
    expected_kl_bound,
    expected_kl_exact,
    expected_l1_bound,
    kl_divergence,
    markov_expected_kl,
)
from .data import (
    CategorySet,
    CountVector,
    EventLog,
    TransitionCounts,
    count_query,
    merge_categories,
    merge_partitions,
    read_chain_csv,
    read_merge_map,
    read_vector_csv,
    transition_counts,
    validate_chain_structure,
    write_chain_csv,
    write_vector_csv,
)
from .dirichlet import DirichletParams, RngSeed, sample_batch
from .errors import AssumptionError, SimplexDPError, StructureError, ValidationError
from .markov import PerturbationBounds, TransitionModel, perturbation_bounds, tv_distance
from .privacy import (
    DEFAULT_SAMPLES,
    MechanismConfig,
    PrivacyBudget,
    calibrate_k,
    chain_configs,
    config_for,
    delta_bound,
    epsilon_bound,
    min_epsilon,
    min_k,
    privatize_chain,
    privatize_vector,
)

__all__ = ["RunConfig", "Report", "ChainAccuracy", "run", "sweep", "main"]

DEFAULT_REPS = 2000
IO_EXIT = 20

# substream keys under the run seed
_RELEASE, _SWEEP = 0, 1


@dataclass(frozen=True)
class RunConfig:
    """Inputs of one privatization run.

    Exactly one of ``k``, ``target_epsilon`` and ``k_scale`` (a multiple of the
    smallest admissible k, applied row by row) must be set.
    """

    mode: str
    input_path: str
    gamma: float
    k: float | None = None
    target_epsilon: float | None = None
    k_scale: float | None = None
    eta: float | tuple[float, ...] | None = None
    merge_map_path: str | None = None
    categories: tuple[str, ...] | None = None
    samples: int = DEFAULT_SAMPLES
    seed: int = 0
    output_path: str | None = None
    include_sensitive: bool = False
    z_sign: str = "paper"

    def __post_init__(self):
        if self.mode not in ("vector", "chain"):
            raise AssumptionError(f"mode must be 'vector' or 'chain', got {self.mode!r}")
        if sum(v is not None for v in (self.k, self.target_epsilon, self.k_scale)) != 1:
            raise AssumptionError("set exactly one of --k, --epsilon, --k-scale")
        if not self.gamma > 0:
            raise AssumptionError(f"gamma must be positive, got {self.gamma!r}")
        if self.k is not None and not self.k > 0:
            raise AssumptionError(f"k must be positive, got {self.k!r}")
        if self.target_epsilon is not None and not self.target_epsilon > 0:
            raise AssumptionError(f"epsilon must be positive, got {self.target_epsilon!r}")
        if self.k_scale is not None and not self.k_scale >= 1.0:
            raise AssumptionError(f"k scale must be at least 1, got {self.k_scale!r}")
        if self.samples < 1000:
            raise AssumptionError("--samples must be at least 1000")
        if self.z_sign not in ("paper", "classical"):
            raise AssumptionError("--z-sign must be 'paper' or 'classical'")
        if not 0 <= self.seed < 2**64:
            raise AssumptionError("--seed must be an unsigned 64-bit integer")

    def echo(self) -> dict:
        out = asdict(self)
        for key in ("eta", "categories"):
            if isinstance(out[key], tuple):
                out[key] = list(out[key])
        return out


@dataclass(frozen=True)
class ChainAccuracy:
    expected_kl_exact: float
    expected_kl_bound: float
    expected_l1_bound: float


@dataclass(eq=False)
class Report:
    mode: str
    budget: PrivacyBudget
    private_output: np.ndarray
    labels: tuple[str, ...]
    configs: tuple[MechanismConfig, ...]
    accuracy: AccuracyReport | ChainAccuracy
    perturbation: PerturbationBounds | None = None
    stationary_pair: tuple[np.ndarray, np.ndarray] | None = None
    tau_pair: tuple[float, float] | None = None
    sensitive_counts: np.ndarray | None = None
    provenance: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        acc = self.accuracy
        if isinstance(acc, AccuracyReport):
            acc_d = {
                "expected_kl_exact": acc.expected_kl_exact,
                "expected_kl_bound": acc.expected_kl_bound,
                "coord_abs_error": acc.coord_abs_error.tolist(),
                "coord_abs_error_upper": acc.coord_abs_error_upper,
                "coord_abs_error_lower": acc.coord_abs_error_lower,
                "coord_sq_error": acc.coord_sq_error.tolist(),
                "coord_sq_error_upper": acc.coord_sq_error_upper,
            }
        else:
            acc_d = asdict(acc)
        out = {
            "mode": self.mode,
            "budget": asdict(self.budget),
            "labels": list(self.labels),
            "private_output": self.private_output.tolist(),
            "configs": [asdict(c) for c in self.configs],
            "accuracy": acc_d,
        }
        if self.perturbation is not None:
            out["perturbation"] = asdict(self.perturbation)
        if self.stationary_pair is not None:
            out["stationary_pair"] = {
                "sensitive": self.stationary_pair[0].tolist(),
                "private": self.stationary_pair[1].tolist(),
            }
        if self.tau_pair is not None:
            out["tau_inf_pair"] = {"sensitive": self.tau_pair[0], "private": self.tau_pair[1]}
        if self.sensitive_counts is not None:
            out["sensitive_counts"] = self.sensitive_counts.tolist()
        out["provenance"] = self.provenance
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "Report":
        acc = d["accuracy"]
        if "coord_abs_error" in acc:
            accuracy = AccuracyReport(
                **{
                    **acc,
                    "coord_abs_error": np.asarray(acc["coord_abs_error"]),
                    "coord_sq_error": np.asarray(acc["coord_sq_error"]),
                }
            )
        else:
            accuracy = ChainAccuracy(**acc)
        sp = d.get("stationary_pair")
        tp = d.get("tau_inf_pair")
        sc = d.get("sensitive_counts")
        return cls(
            mode=d["mode"],
            budget=PrivacyBudget(**d["budget"]),
            private_output=np.asarray(d["private_output"]),
            labels=tuple(d["labels"]),
            configs=tuple(MechanismConfig(**c) for c in d["configs"]),
            accuracy=accuracy,
            perturbation=PerturbationBounds(**d["perturbation"]) if "perturbation" in d else None,
            stationary_pair=(np.asarray(sp["sensitive"]), np.asarray(sp["private"])) if sp else None,
            tau_pair=(tp["sensitive"], tp["private"]) if tp else None,
            sensitive_counts=np.asarray(sc) if sc is not None else None,
            provenance=d["provenance"],
        )

    @classmethod
    def from_json(cls, text: str) -> "Report":
        return cls.from_dict(json.loads(text))

    def __eq__(self, other):
        if not isinstance(other, Report):
            return NotImplemented
        return self.to_dict() == other.to_dict()


# loading ---------------------------------------------------------------------


def _detect_mode(path) -> str:
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            header = fh.readline().strip().replace(" ", "")
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror}") from None
    if header == "category":
        return "vector"
    if header == "from_state,to_state":
        return "chain"
    raise ValidationError(f"{path}: unrecognised header {header!r}")


def load_counts(
    mode: str,
    path,
    merge_map_path=None,
    categories=None,
    eta=None,
) -> CountVector | TransitionCounts:
    """Read a CSV, apply an optional merge map, and run the counting query."""
    found = _detect_mode(path)
    if found != mode:
        raise ValidationError(f"{path} holds {found} data but {mode} mode was requested")
    mapping = read_merge_map(merge_map_path) if merge_map_path else None
    if mode == "vector":
        events = read_vector_csv(path)
        log = EventLog.single(events)
        cats = CategorySet(tuple(categories) if categories else tuple(dict.fromkeys(events)))
        if mapping is not None:
            log = merge_partitions(log, mapping)
            cats = merge_categories(cats, mapping)
        if eta is not None and np.ndim(eta) != 0:
            raise ValidationError("vector mode takes a single --eta value")
        return count_query(log.partitions[0], cats, eta)
    log, cats = read_chain_csv(path)
    if categories:
        raise ValidationError("--categories applies to vector mode only")
    if mapping is not None:
        log = merge_partitions(log, mapping)
        cats = merge_categories(cats, mapping)
    if eta is not None and np.ndim(eta) != 0 and len(eta) != len(cats):
        raise ValidationError(f"--eta lists {len(eta)} values for {len(cats)} states")
    return transition_counts(log, cats, eta)


# delta is minimised over the vertices of the bordered simplex, which contain
# every grid count vector admitted at this eta
DELTA_DOMAIN = "vertex: all coordinates at eta except one at 1 - (n - 1) eta"


def _provenance(config: RunConfig) -> dict:
    return {
        "config": config.echo(),
        "seed": config.seed,
        "version": __version__,
        "delta_extreme_points": DELTA_DOMAIN,
    }


def _vector_configs(q: CountVector, config: RunConfig) -> MechanismConfig:
    return config_for(
        q, config.gamma, k=config.k, epsilon=config.target_epsilon, k_scale=config.k_scale
    )


def _chain_configs(tc: TransitionCounts, config: RunConfig) -> list[MechanismConfig]:
    return chain_configs(
        tc, config.gamma, k=config.k, epsilon=config.target_epsilon, k_scale=config.k_scale
    )


def _chain_analysis(tc: TransitionCounts, cfgs, z_sign: str):
    P = tc.matrix
    model = TransitionModel.from_matrix(P, tc.states.labels, z_sign=z_sign)
    ks = [c.k for c in cfgs]
    bounds = perturbation_bounds(P, model.pi, tc.Ns, ks, z_sign=z_sign)
    acc = ChainAccuracy(
        expected_kl_exact=markov_expected_kl(tc, model.pi, ks),
        expected_kl_bound=bounds.L,
        expected_l1_bound=expected_l1_bound(bounds.L),
    )
    return model, bounds, acc


def run(config: RunConfig) -> Report:
    """Count, validate, configure, privatize, account and analyse one input."""
    data = load_counts(config.mode, config.input_path, config.merge_map_path, config.categories, config.eta)
    seed = RngSeed(config.seed).spawn(_RELEASE)
    if config.mode == "vector":
        q = data
        cfg = _vector_configs(q, config)
        private, budget = privatize_vector(q, cfg, config.samples, seed)
        return Report(
            mode="vector",
            budget=budget,
            private_output=private,
            labels=q.labels,
            configs=(cfg,),
            accuracy=accuracy_report(q, cfg.k),
            sensitive_counts=q.counts.copy() if config.include_sensitive else None,
            provenance=_provenance(config),
        )
    tc = data
    diag = validate_chain_structure(tc)
    if not diag.ok:
        raise StructureError("; ".join(diag.messages))
    cfgs = _chain_configs(tc, config)
    model, bounds, acc = _chain_analysis(tc, cfgs, config.z_sign)
    private, budget = privatize_chain(tc, cfgs, config.samples, seed, z_sign=config.z_sign)
    return Report(
        mode="chain",
        budget=budget,
        private_output=np.asarray(private.P),
        labels=tc.states.labels,
        configs=tuple(cfgs),
        accuracy=acc,
        perturbation=bounds,
        stationary_pair=(np.asarray(model.pi), np.asarray(private.pi)),
        tau_pair=(model.tau_inf, private.tau_inf),
        sensitive_counts=tc.count_matrix if config.include_sensitive else None,
        provenance=_provenance(config),
    )


# sweeps ----------------------------------------------------------------------

VECTOR_COLUMNS = (
    "k", "epsilon", "delta", "delta_stderr", "mean_kl", "mean_kl_stderr", "kl_exact", "kl_bound",
)
CHAIN_COLUMNS = (
    "k_scale", "epsilon", "delta", "delta_stderr", "L", "mean_tv", "mean_tv_stderr", "tv_bound",
    "mean_tau_diff", "mean_tau_diff_stderr", "tau_bound",
)


def _mean_se(values) -> tuple[float, float]:
    v = np.asarray(values, dtype=np.float64)
    se = float(v.std(ddof=1) / math.sqrt(v.size)) if v.size > 1 else 0.0
    return float(v.mean()), se


def sweep(config: RunConfig, grid, reps: int = DEFAULT_REPS, grid_kind: str = "k") -> list[dict]:
    """One summary row per grid point.

    ``grid_kind`` says what the grid holds: ``"k"``, ``"epsilon"`` or
    ``"k_scale"``. The grid overrides the single value in ``config``.
    Repetition draws for grid point ``g`` come from their own substream.
    """
    if grid_kind not in ("k", "epsilon", "k_scale"):
        raise AssumptionError(f"unknown grid kind {grid_kind!r}")
    grid = [float(g) for g in grid]
    if not grid:
        raise AssumptionError("empty sweep grid")
    if reps < 2:
        raise AssumptionError("--reps must be at least 2")
    data = load_counts(config.mode, config.input_path, config.merge_map_path, config.categories, config.eta)
    root = RngSeed(config.seed).spawn(_SWEEP)
    rows = []
    for g, value in enumerate(grid):
        choice = {"k": None, "epsilon": None, "k_scale": None}
        choice[grid_kind] = value
        seed = root.spawn(g)
        if config.mode == "vector":
            q = data
            cfg = config_for(q, config.gamma, k=choice["k"], epsilon=choice["epsilon"], k_scale=choice["k_scale"])
            est = delta_bound(cfg, config.samples, seed.spawn(0))
            draws = sample_batch(DirichletParams(q.probs, cfg.k), reps, seed.spawn(1))
            kls = [kl_divergence(q.probs, d) for d in draws]
            mean_kl, se_kl = _mean_se(kls)
            rows.append(
                dict(
                    k=cfg.k,
                    epsilon=epsilon_bound(cfg),
                    delta=est.delta,
                    delta_stderr=est.stderr,
                    mean_kl=mean_kl,
                    mean_kl_stderr=se_kl,
                    kl_exact=expected_kl_exact(q, cfg.k),
                    kl_bound=expected_kl_bound(q.N, q.n, cfg.k),
                )
            )
            continue
        tc = data
        cfgs = chain_configs(tc, config.gamma, k=choice["k"], epsilon=choice["epsilon"], k_scale=choice["k_scale"])
        model, bounds, _ = _chain_analysis(tc, cfgs, config.z_sign)
        ests = [delta_bound(c, config.samples, seed.spawn(0, i)) for i, c in enumerate(cfgs)]
        draws = [
            sample_batch(DirichletParams(row.probs, c.k), reps, seed.spawn(1, i))
            for i, (row, c) in enumerate(zip(tc.rows, cfgs))
        ]
        tvs, taus = [], []
        for r in range(reps):
            priv = TransitionModel.from_matrix(np.vstack([d[r] for d in draws]), z_sign=config.z_sign)
            tvs.append(tv_distance(model.pi, priv.pi))
            taus.append(abs(model.tau_inf - priv.tau_inf))
        worst = int(np.argmax([e.delta for e in ests]))
        mean_tv, se_tv = _mean_se(tvs)
        mean_tau, se_tau = _mean_se(taus)
        rows.append(
            dict(
                k_scale=value if grid_kind == "k_scale" else float("nan"),
                epsilon=max(epsilon_bound(c) for c in cfgs),
                delta=ests[worst].delta,
                delta_stderr=ests[worst].stderr,
                L=bounds.L,
                mean_tv=mean_tv,
                mean_tv_stderr=se_tv,
                tv_bound=bounds.tv_bound,
                mean_tau_diff=mean_tau,
                mean_tau_diff_stderr=se_tau,
                tau_bound=bounds.tau_bound,
            )
        )
    return rows


def sweep_csv(rows: list[dict], mode: str) -> str:
    columns = VECTOR_COLUMNS if mode == "vector" else CHAIN_COLUMNS
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([repr(float(r[c])) for c in columns])
    return buf.getvalue()


# argument parsing ------------------------------------------------------------


def _floats(text: str) -> float | tuple[float, ...]:
    parts = [p for p in text.split(",") if p.strip()]
    try:
        vals = tuple(float(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number or comma-separated numbers, got {text!r}")
    if not vals:
        raise argparse.ArgumentTypeError("empty value")
    return vals[0] if len(vals) == 1 else vals


def _grid(text: str) -> list[float]:
    """``start:stop:step`` (inclusive of stop up to rounding) or a comma list."""
    if ":" in text:
        try:
            start, stop, step = (float(p) for p in text.split(":"))
        except ValueError:
            raise argparse.ArgumentTypeError(f"grid must be start:stop:step, got {text!r}")
        if step <= 0 or stop < start:
            raise argparse.ArgumentTypeError("grid needs step > 0 and stop >= start")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [round(start + i * step, 12) for i in range(count)]
    vals = _floats(text)
    return list(vals) if isinstance(vals, tuple) else [vals]


def _labels(text: str) -> tuple[str, ...]:
    return tuple(p.strip() for p in text.split(",") if p.strip())


def _add_common(p: argparse.ArgumentParser, *, needs_input=True, knob=True, mc=True, seed=True):
    p.add_argument("--input", required=needs_input, help="event CSV (header 'category' or 'from_state,to_state')")
    p.add_argument("--merge-map", help="CSV with header 'old_label,new_label'")
    p.add_argument("--categories", type=_labels, help="comma-separated category labels (vector mode)")
    p.add_argument("--eta", type=_floats, help="border eta; comma-separated per-row values in chain mode")
    p.add_argument("--gamma", type=float, help="Omega_1 threshold gamma")
    if knob:
        g = p.add_mutually_exclusive_group()
        g.add_argument("--k", type=float, help="Dirichlet concentration")
        g.add_argument("--epsilon", type=float, help="target epsilon (k is calibrated)")
        g.add_argument("--k-scale", type=float, help="k as a multiple of 3/(2 eta), per row")
    if mc:
        p.add_argument("--samples", type=int, default=DEFAULT_SAMPLES, help="Monte-Carlo samples for delta")
    if seed:
        p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", help="output file (default: stdout)")
    p.add_argument("--include-sensitive", action="store_true", help="include raw counts in the output")
    p.add_argument("--z-sign", choices=("paper", "classical"), default="paper", help="sign of 1 pi^T in Z")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="simplexdp", description="Dirichlet-mechanism privacy for simplex data.")
    parser.add_argument("--version", action="version", version=f"simplexdp {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("count", help="summarise the counting query of a CSV")
    _add_common(p, knob=False, mc=False, seed=False)

    for name, mode in (("privatize-vector", "vector"), ("privatize-chain", "chain")):
        p = sub.add_parser(name, help=f"privatize a {mode} and report its budget")
        _add_common(p)
        p.set_defaults(mode=mode)

    p = sub.add_parser("calibrate", help="k reaching a target epsilon")
    _add_common(p, needs_input=False, knob=False, mc=False, seed=False)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--N", type=int, help="record count (without --input)")
    p.add_argument("--n", type=int, help="category count (without --input)")

    p = sub.add_parser("delta", help="Monte-Carlo delta for a configuration")
    _add_common(p, needs_input=False)
    p.add_argument("--N", type=int, help="record count (without --input)")
    p.add_argument("--n", type=int, help="category count (without --input)")
    p.add_argument("--extreme", choices=("vertex", "grid"), default="vertex", help="extreme-point construction")

    p = sub.add_parser("analyze", help="analytic accuracy and perturbation bounds")
    _add_common(p, mc=False, seed=False)

    p = sub.add_parser("merge", help="relabel a CSV through a merge map")
    p.add_argument("--input", required=True)
    p.add_argument("--merge-map", required=True)
    p.add_argument("--output", help="output CSV (default: stdout)")

    p = sub.add_parser("sweep", help="budget and empirical accuracy over a grid")
    _add_common(p, knob=False)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--k-grid", type=_grid, help="start:stop:step or comma list of k")
    g.add_argument("--epsilon-grid", type=_grid, help="start:stop:step or comma list of epsilon")
    g.add_argument("--k-scale-grid", type=_grid, help="start:stop:step or comma list of multiples of k_min")
    p.add_argument("--reps", type=int, default=DEFAULT_REPS, help="privatizations per grid point")
    return parser


def _need(args, *names):
    missing = [f"--{n.replace('_', '-')}" for n in names if getattr(args, n, None) is None]
    if missing:
        raise AssumptionError(f"missing required option(s): {', '.join(missing)}")


def _config(args, mode: str) -> RunConfig:
    _need(args, "gamma")
    eta = args.eta
    return RunConfig(
        mode=mode,
        input_path=args.input,
        gamma=args.gamma,
        k=getattr(args, "k", None),
        target_epsilon=getattr(args, "epsilon", None),
        k_scale=getattr(args, "k_scale", None),
        eta=eta,
        merge_map_path=args.merge_map,
        categories=args.categories,
        samples=getattr(args, "samples", DEFAULT_SAMPLES),
        seed=getattr(args, "seed", 0),
        output_path=args.output,
        include_sensitive=args.include_sensitive,
        z_sign=args.z_sign,
    )


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"


def _cmd_count(args) -> str:
    mode = _detect_mode(args.input)
    data = load_counts(mode, args.input, args.merge_map, args.categories, args.eta)
    if mode == "vector":
        out = {
            "mode": mode,
            "labels": list(data.labels),
            "N": data.N,
            "n": data.n,
            "eta": data.eta,
            "bordered": data.bordered,
            "zero_categories": [lab for lab, c in zip(data.labels, data.counts) if c == 0],
        }
        if args.include_sensitive:
            out["counts"] = data.counts.tolist()
        return _dump(out)
    diag = validate_chain_structure(data)
    out = {
        "mode": mode,
        "labels": list(data.states.labels),
        "N": data.Ns.tolist(),
        "n": data.n,
        "eta": data.etas.tolist(),
        "irreducible": diag.irreducible,
        "positive": diag.positive,
        "zero_transitions": [list(z) for z in diag.zero_entries],
        "no_incoming": list(diag.no_incoming),
        "messages": list(diag.messages),
    }
    if args.include_sensitive:
        out["counts"] = data.count_matrix.tolist()
    return _dump(out)


def _direct_shape(args):
    """(N, n, eta) from --input or from --N/--n/--eta."""
    if args.input:
        mode = _detect_mode(args.input)
        data = load_counts(mode, args.input, args.merge_map, args.categories, args.eta)
        if mode == "chain":
            raise AssumptionError("use a vector input, or --N/--n/--eta, for a single configuration")
        q = data
        eta = q.eta if args.eta is None else args.eta
        return q.N, q.n, min(eta, (q.N - 1) / (4 * q.N))
    _need(args, "N", "n", "eta")
    if np.ndim(args.eta) != 0:
        raise AssumptionError("--eta must be a single value here")
    return args.N, args.n, args.eta


def _cmd_calibrate(args) -> str:
    _need(args, "gamma")
    N, n, eta = _direct_shape(args)
    k = calibrate_k(args.epsilon, eta, args.gamma, N, n)
    cfg = MechanismConfig(k=k, eta=eta, gamma=args.gamma, N=N, n=n)
    return _dump(
        {
            "config": asdict(cfg),
            "target_epsilon": args.epsilon,
            "epsilon": epsilon_bound(cfg),
            "min_k": min_k(eta),
            "min_epsilon": min_epsilon(eta, args.gamma, N, n),
        }
    )


def _cmd_delta(args) -> str:
    _need(args, "gamma")
    N, n, eta = _direct_shape(args)
    if args.k is not None:
        k = args.k
    elif args.epsilon is not None:
        k = calibrate_k(args.epsilon, eta, args.gamma, N, n)
    elif args.k_scale is not None:
        k = args.k_scale * min_k(eta)
    else:
        raise AssumptionError("set exactly one of --k, --epsilon, --k-scale")
    cfg = MechanismConfig(k=k, eta=eta, gamma=args.gamma, N=N, n=n)
    est = delta_bound(cfg, args.samples, RngSeed(args.seed), extreme=args.extreme)
    return _dump(
        {
            "config": asdict(cfg),
            "epsilon": epsilon_bound(cfg),
            "delta": est.delta,
            "delta_stderr": est.stderr,
            "delta_conservative": est.delta + 3.0 * est.stderr,
            "samples": est.samples,
            "minimizer": list(est.minimizer),
            "extreme": est.extreme,
            "seed": args.seed,
        }
    )


def _cmd_analyze(args) -> str:
    _need(args, "gamma")
    mode = _detect_mode(args.input)
    cfgv = _config(args, mode)
    data = load_counts(mode, args.input, args.merge_map, args.categories, args.eta)
    if mode == "vector":
        cfg = _vector_configs(data, cfgv)
        acc = accuracy_report(data, cfg.k)
        upper, lower, sq_upper = coord_error_bounds(data.N, data.n, cfg.k)
        return _dump(
            {
                "mode": mode,
                "config": asdict(cfg),
                "epsilon": epsilon_bound(cfg),
                "expected_kl_exact": acc.expected_kl_exact,
                "expected_kl_bound": acc.expected_kl_bound,
                "coord_abs_error": acc.coord_abs_error.tolist(),
                "coord_abs_error_upper": upper,
                "coord_abs_error_lower": lower,
                "coord_sq_error": acc.coord_sq_error.tolist(),
                "coord_sq_error_upper": sq_upper,
            }
        )
    diag = validate_chain_structure(data)
    if not diag.ok:
        raise StructureError("; ".join(diag.messages))
    cfgs = _chain_configs(data, cfgv)
    model, bounds, acc = _chain_analysis(data, cfgs, args.z_sign)
    return _dump(
        {
            "mode": mode,
            "configs": [asdict(c) for c in cfgs],
            "epsilon": max(epsilon_bound(c) for c in cfgs),
            "stationary": model.pi.tolist(),
            "tau_inf": model.tau_inf,
            "Z_norm1": model.Z_norm1,
            "z_sign": args.z_sign,
            "expected_kl_exact": acc.expected_kl_exact,
            "L": bounds.L,
            "expected_l1_bound": acc.expected_l1_bound,
            "tv_bound": bounds.tv_bound,
            "tau_bound": bounds.tau_bound,
        }
    )


def _cmd_merge(args) -> str:
    mode = _detect_mode(args.input)
    mapping = read_merge_map(args.merge_map)
    buf = io.StringIO()
    if mode == "vector":
        log = merge_partitions(EventLog.single(read_vector_csv(args.input)), mapping)
        write_vector_csv(buf, log.partitions[0])
    else:
        log, _ = read_chain_csv(args.input)
        write_chain_csv(buf, merge_partitions(log, mapping))
    return buf.getvalue()


def _cmd_sweep(args) -> str:
    mode = _detect_mode(args.input)
    if args.k_grid is not None:
        kind, grid, knob = "k", args.k_grid, {"k": args.k_grid[0]}
    elif args.epsilon_grid is not None:
        kind, grid, knob = "epsilon", args.epsilon_grid, {"epsilon": args.epsilon_grid[0]}
    else:
        kind, grid, knob = "k_scale", args.k_scale_grid, {"k_scale": args.k_scale_grid[0]}
    for name in ("k", "epsilon", "k_scale"):
        setattr(args, name, knob.get(name))
    config = _config(args, mode)
    return sweep_csv(sweep(config, grid, args.reps, kind), mode)


def _cmd_privatize(args) -> str:
    return run(_config(args, args.mode)).to_json()


_COMMANDS = {
    "count": _cmd_count,
    "privatize-vector": _cmd_privatize,
    "privatize-chain": _cmd_privatize,
    "calibrate": _cmd_calibrate,
    "delta": _cmd_delta,
    "analyze": _cmd_analyze,
    "merge": _cmd_merge,
    "sweep": _cmd_sweep,
}


def _emit(text: str, output) -> None:
    if output:
        Path(output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _fail(code: str, reason: str, status: int) -> int:
    reason = " ".join(str(reason).split())
    print(f"error: code={code} reason={reason}", file=sys.stderr)
    return status


def _warn(message, category, filename, lineno, file=None, line=None) -> None:
    reason = " ".join(str(message).split())
    print(f"warning: category={category.__name__} reason={reason}", file=sys.stderr)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    with warnings.catch_warnings():
        warnings.showwarning = _warn
        try:
            text = _COMMANDS[args.command](args)
            _emit(text, args.output)
        except SimplexDPError as exc:
            return _fail(exc.code, exc, exc.exit_status)
        except OSError as exc:
            return _fail("io", f"{exc.filename or ''}: {exc.strerror}", IO_EXIT)
    return 0


if __name__ == "__main__":
    sys.exit(main())
