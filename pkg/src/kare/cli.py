"""Experiment driver: hyperparameter sweeps, threshold curves, validation.

Subcommands
-----------
sweep --config FILE
    Grid sweep over (lengthscale, ridge) emitting one CSV row per cell
    with train error, the alignment risk scores, the optional comparator
    scores, held-out risk, and the Gram-based threshold estimates.

sct --spectrum {rbf-gaussian,power-law} ... --out FILE
    Solved threshold and derivative next to their Monte Carlo estimates
    over an (n, ridge) grid.

validate --suite NAME --seed N
    Run a named validation suite and print a JSON report; exits 3 on
    check failure.

Exit codes: 0 success, 1 usage/config error, 2 data error, 3 validation
failure.  KARE_THREADS caps sweep parallelism (0 or unset = auto); the
output is byte-identical for any thread count.

Config file format: flat "key = value" lines, '#' comments.  Grids are
"start:stop:count:log2" or "start:stop:count:log10" (count log-spaced
values from start to stop inclusive).  Keys:

    data.type            csv | idx | synthetic
    data.path            CSV path                          (csv)
    data.label_column    label column name                 (csv)
    data.label_map       e.g. "s:1,b:-1"; numeric if unset (csv)
    data.feature_columns comma-separated subset, optional  (csv)
    data.sentinel_filter true|false, drop -999 rows        (csv)
    data.images, data.labels   IDX file pair               (idx)
    data.digits          e.g. "7,9"                        (idx)
    data.preprocess      none | maxabs | mnist
    data.n               training rows
    data.test_n          held-out rows (0 disables test risk)
    data.seed            sampling seed
    data.dim             input dimension                   (synthetic)
    data.noise           label noise level                 (synthetic)
    kernel.family        rbf | laplacian | l1exp
    grid.lengthscale     lengthscale grid, in multiples of the dimension
    grid.ridge           ridge grid
    scores.cv_folds      cross-validation folds (0 disables)
    scores.loglik        true|false
    scores.alignment     true|false
    output               output CSV path
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .data import (
    Dataset,
    FormatError,
    ParseError,
    load_csv,
    load_mnist_idx,
    preprocess_maxabs,
    preprocess_mnist,
    split_train_test,
    subsample,
)
from .estimators import (
    RidgeScores,
    TrueFunction,
    classical_alignment,
    cross_validation_risk,
)
from .kernels import KernelSpec, cross_gram, gram_matrix
from .sct import (
    Spectrum,
    power_law_spectrum,
    rbf_gaussian_spectrum,
    sct_from_gram,
    solve_sct,
)
from .synthetic import draw, rbf_gaussian_gram_spectrum
from .spectral import decompose
from .validation import run_suite

SWEEP_COLUMNS = (
    "lengthscale", "ridge", "train_error", "kare", "varrho", "cv_risk",
    "loglik", "alignment", "test_risk", "sct_hat", "sct_deriv_hat",
    "seed", "n",
)

SCT_COLUMNS = (
    "n", "ridge", "theta", "theta_prime", "theta_est", "theta_est_stderr",
    "theta_prime_est", "theta_prime_est_stderr", "trials", "seed",
)


class ConfigError(ValueError):
    """Bad sweep configuration."""


@dataclass(frozen=True)
class SweepConfig:
    data: dict
    family: str
    lengthscale_multiples: tuple[float, ...]
    ridges: tuple[float, ...]
    cv_folds: int
    loglik: bool
    alignment: bool
    output: str
    seed: int


@dataclass(frozen=True)
class SweepRecord:
    lengthscale: float
    ridge: float
    train_error: float
    kare: float
    varrho: float
    cv_risk: float | None
    loglik: float | None
    alignment: float | None
    test_risk: float | None
    sct_hat: float
    sct_deriv_hat: float
    seed: int
    n: int


def parse_grid(text: str) -> tuple[float, ...]:
    """Parse "start:stop:count:log2|log10" into an inclusive log-spaced grid."""
    parts = text.split(":")
    if len(parts) != 4:
        raise ConfigError(f"grid {text!r} is not start:stop:count:scale")
    try:
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise ConfigError(f"grid {text!r}: {exc}") from None
    scale = parts[3]
    if scale not in ("log2", "log10"):
        raise ConfigError(f"grid {text!r}: scale must be log2 or log10")
    if count < 1 or start <= 0 or stop <= 0:
        raise ConfigError(f"grid {text!r}: need positive bounds and count >= 1")
    if count == 1:
        return (start,)
    base = 2.0 if scale == "log2" else 10.0
    lo, hi = np.log(start) / np.log(base), np.log(stop) / np.log(base)
    return tuple(float(base**e) for e in np.linspace(lo, hi, count))


_KNOWN_KEYS = {
    "data.type", "data.path", "data.label_column", "data.label_map",
    "data.feature_columns", "data.sentinel_filter", "data.images",
    "data.labels", "data.digits", "data.preprocess", "data.n",
    "data.test_n", "data.seed", "data.dim", "data.noise",
    "kernel.family", "grid.lengthscale", "grid.ridge",
    "scores.cv_folds", "scores.loglik", "scores.alignment", "output",
}


def _parse_bool(value: str, key: str) -> bool:
    if value.lower() in ("true", "1", "yes"):
        return True
    if value.lower() in ("false", "0", "no"):
        return False
    raise ConfigError(f"{key}: expected true/false, got {value!r}")


def parse_sweep_config(path: str) -> SweepConfig:
    raw = {}
    with open(path) as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key = value")
            key, value = (part.strip() for part in line.split("=", 1))
            if key not in _KNOWN_KEYS:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            raw[key] = value
    for key in ("data.type", "kernel.family", "grid.lengthscale", "grid.ridge", "output"):
        if key not in raw:
            raise ConfigError(f"{path}: missing required key {key!r}")
    try:
        n = int(raw.get("data.n", "0"))
        test_n = int(raw.get("data.test_n", "0"))
        seed = int(raw.get("data.seed", "0"))
        cv_folds = int(raw.get("scores.cv_folds", "0"))
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    if n < 1:
        raise ConfigError(f"{path}: data.n must be >= 1")
    return SweepConfig(
        data={
            "type": raw["data.type"],
            "path": raw.get("data.path"),
            "label_column": raw.get("data.label_column"),
            "label_map": raw.get("data.label_map"),
            "feature_columns": raw.get("data.feature_columns"),
            "sentinel_filter": _parse_bool(raw.get("data.sentinel_filter", "false"), "data.sentinel_filter"),
            "images": raw.get("data.images"),
            "labels": raw.get("data.labels"),
            "digits": raw.get("data.digits"),
            "preprocess": raw.get("data.preprocess", "none"),
            "n": n,
            "test_n": test_n,
            "seed": seed,
            "dim": int(raw.get("data.dim", "5")),
            "noise": float(raw.get("data.noise", "0.1")),
        },
        family=raw["kernel.family"],
        lengthscale_multiples=parse_grid(raw["grid.lengthscale"]),
        ridges=parse_grid(raw["grid.ridge"]),
        cv_folds=cv_folds,
        loglik=_parse_bool(raw.get("scores.loglik", "false"), "scores.loglik"),
        alignment=_parse_bool(raw.get("scores.alignment", "false"), "scores.alignment"),
        output=raw["output"],
        seed=seed,
    )


def _synthetic_dataset(dim: int, n: int, noise: float, seed) -> Dataset:
    """Gaussian inputs with a smooth sine target plus label noise."""
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, dim))
    w = np.ones(dim) / np.sqrt(dim)
    y = np.sin(X @ w) + noise * rng.standard_normal(n)
    return Dataset(X, y, {"source": "synthetic", "preprocessing": []})


def _load_sweep_data(cfg: SweepConfig) -> tuple[Dataset, Dataset | None]:
    d = cfg.data
    if d["type"] == "synthetic":
        s_train, s_test = np.random.SeedSequence(d["seed"]).spawn(2)
        train = _synthetic_dataset(d["dim"], d["n"], d["noise"], s_train)
        test = _synthetic_dataset(d["dim"], d["test_n"], d["noise"], s_test) if d["test_n"] else None
        return train, test
    if d["type"] == "csv":
        if not d["path"] or not d["label_column"]:
            raise ConfigError("csv datasets need data.path and data.label_column")
        label_map = None
        if d["label_map"]:
            label_map = {}
            for pair in d["label_map"].split(","):
                name, _, value = pair.partition(":")
                label_map[name.strip()] = float(value)
        features = None
        if d["feature_columns"]:
            features = [c.strip() for c in d["feature_columns"].split(",")]
        ds = load_csv(
            d["path"], d["label_column"], feature_columns=features,
            label_map=label_map, drop_sentinel=d["sentinel_filter"],
        )
    elif d["type"] == "idx":
        if not d["images"] or not d["labels"] or not d["digits"]:
            raise ConfigError("idx datasets need data.images, data.labels, data.digits")
        digits = tuple(int(v) for v in d["digits"].split(","))
        if len(digits) != 2:
            raise ConfigError("data.digits must name exactly two digits")
        ds = load_mnist_idx(d["images"], d["labels"], digits)
    else:
        raise ConfigError(f"unknown data.type {d['type']!r}")
    if d["preprocess"] == "maxabs":
        ds = preprocess_maxabs(ds)
    elif d["preprocess"] == "mnist":
        ds = preprocess_mnist(ds)
    elif d["preprocess"] != "none":
        raise ConfigError(f"unknown data.preprocess {d['preprocess']!r}")
    if d["test_n"]:
        return split_train_test(ds, d["n"], d["test_n"], d["seed"])
    return subsample(ds, d["n"], d["seed"]), None


def worker_count() -> int:
    """Sweep parallelism from KARE_THREADS; 0 or unset means auto."""
    raw = os.environ.get("KARE_THREADS", "0")
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError(f"KARE_THREADS must be an integer, got {raw!r}") from None
    if value < 0:
        raise ConfigError(f"KARE_THREADS must be >= 0, got {value}")
    return value if value > 0 else (os.cpu_count() or 1)


def run_sweep(cfg: SweepConfig) -> list[SweepRecord]:
    """One record per grid cell, in deterministic grid order.

    Each lengthscale pays one Gram construction and one
    eigendecomposition, shared across all ridges.
    """
    train, test = _load_sweep_data(cfg)
    n, dim = train.X.shape
    kernel_family = cfg.family

    def one_lengthscale(multiple: float) -> list[SweepRecord]:
        kern = KernelSpec(kernel_family, multiple * dim)
        G = gram_matrix(kern, train.X)
        rs = RidgeScores(G, train.y)
        gs = rs.gram_spectrum()
        K_test = cross_gram(kern, test.X, train.X) if test is not None else None
        align = classical_alignment(train.y, G) if cfg.alignment else None
        records = []
        for ridge in cfg.ridges:
            est = sct_from_gram(gs, ridge)
            if K_test is not None:
                residual = K_test @ (rs.solve(ridge) / n) - test.y
                test_risk = float(residual @ residual) / test.y.shape[0]
            else:
                test_risk = None
            records.append(SweepRecord(
                lengthscale=kern.lengthscale,
                ridge=float(ridge),
                train_error=rs.train_error(ridge),
                kare=rs.kare(ridge),
                varrho=rs.varrho(ridge),
                cv_risk=(
                    cross_validation_risk(kern, train.X, train.y, ridge,
                                          cfg.cv_folds, seed=cfg.seed)
                    if cfg.cv_folds else None
                ),
                loglik=rs.log_marginal_likelihood(ridge) if cfg.loglik else None,
                alignment=align,
                test_risk=test_risk,
                sct_hat=est.theta,
                sct_deriv_hat=est.theta_prime,
                seed=cfg.seed,
                n=n,
            ))
        return records

    workers = min(worker_count(), len(cfg.lengthscale_multiples))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            per_scale = list(pool.map(one_lengthscale, cfg.lengthscale_multiples))
    else:
        per_scale = [one_lengthscale(m) for m in cfg.lengthscale_multiples]
    return [record for records in per_scale for record in records]


def _format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def write_sweep_csv(records: list[SweepRecord], path: str) -> None:
    with open(path, "w") as handle:
        handle.write(",".join(SWEEP_COLUMNS) + "\n")
        for r in records:
            handle.write(",".join(
                _format_cell(getattr(r, column)) for column in SWEEP_COLUMNS
            ) + "\n")


@dataclass(frozen=True)
class SctCurveRecord:
    n: int
    ridge: float
    theta: float
    theta_prime: float
    theta_est: float
    theta_est_stderr: float
    theta_prime_est: float
    theta_prime_est_stderr: float
    trials: int
    seed: int


def run_sct_curves(
    spectrum: Spectrum,
    gram_sampler,
    n_values: tuple[int, ...],
    ridges: tuple[float, ...],
    trials: int,
    seed: int,
) -> list[SctCurveRecord]:
    """Solved threshold curves next to Monte Carlo Gram-based estimates.

    gram_sampler(n, seed) must return a GramSpectrum for a fresh sample
    of size n.
    """
    records = []
    for n in n_values:
        spectra = [gram_sampler(n, (seed, n, t)) for t in range(trials)]
        for ridge in ridges:
            res = solve_sct(spectrum, n, ridge)
            estimates = [sct_from_gram(s, ridge) for s in spectra]
            thetas = np.array([e.theta for e in estimates])
            primes = np.array([e.theta_prime for e in estimates])
            scale = np.sqrt(trials) if trials > 1 else 1.0
            records.append(SctCurveRecord(
                n=n, ridge=float(ridge),
                theta=res.theta, theta_prime=res.theta_prime,
                theta_est=float(thetas.mean()),
                theta_est_stderr=float(thetas.std(ddof=1) / scale) if trials > 1 else 0.0,
                theta_prime_est=float(primes.mean()),
                theta_prime_est_stderr=float(primes.std(ddof=1) / scale) if trials > 1 else 0.0,
                trials=trials, seed=seed,
            ))
    return records


def write_sct_csv(records: list[SctCurveRecord], path: str) -> None:
    with open(path, "w") as handle:
        handle.write(",".join(SCT_COLUMNS) + "\n")
        for r in records:
            handle.write(",".join(
                _format_cell(getattr(r, column)) for column in SCT_COLUMNS
            ) + "\n")


def _cmd_sweep(args) -> int:
    cfg = parse_sweep_config(args.config)
    records = run_sweep(cfg)
    write_sweep_csv(records, cfg.output)
    print(f"wrote {len(records)} records to {cfg.output}")
    return 0


def _cmd_sct(args) -> int:
    n_values = tuple(int(round(v)) for v in parse_grid(args.n_grid))
    ridges = parse_grid(args.ridge_grid)
    if args.spectrum == "rbf-gaussian":
        lengthscale = args.lengthscale if args.lengthscale is not None else float(args.dim)
        spectrum = rbf_gaussian_spectrum(args.dim, lengthscale, args.sigma, args.k_max)

        def sampler(n, seed):
            return rbf_gaussian_gram_spectrum(args.dim, lengthscale, args.sigma, n, seed)
    else:
        spectrum = power_law_spectrum(args.beta, args.count)
        zero_f = TrueFunction(np.zeros(spectrum.expanded_size), 0.0)

        def sampler(n, seed):
            return decompose(draw(spectrum, zero_f, n, seed).G)

    records = run_sct_curves(spectrum, sampler, n_values, ridges, args.trials, args.seed)
    write_sct_csv(records, args.out)
    print(f"wrote {len(records)} records to {args.out}")
    return 0


def _cmd_validate(args) -> int:
    try:
        checks = run_suite(args.suite, args.seed)
    except KeyError as exc:
        print(f"error: {exc.args[0]}", file=sys.stderr)
        return 1
    report = {
        "suite": args.suite,
        "seed": args.seed,
        "passed": all(c.passed for c in checks),
        "checks": [
            {"name": c.name, "passed": c.passed, "detail": c.detail} for c in checks
        ],
    }
    print(json.dumps(report, indent=2))
    return 0 if report["passed"] else 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kare",
        description="Kernel ridge regression risk prediction toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sweep = sub.add_parser("sweep", help="hyperparameter grid sweep")
    p_sweep.add_argument("--config", required=True, help="key=value config file")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_sct = sub.add_parser("sct", help="threshold curves, solved and estimated")
    p_sct.add_argument("--spectrum", required=True, choices=("rbf-gaussian", "power-law"))
    p_sct.add_argument("--dim", type=int, default=5)
    p_sct.add_argument("--lengthscale", type=float, default=None,
                       help="defaults to the input dimension")
    p_sct.add_argument("--sigma", type=float, default=1.0)
    p_sct.add_argument("--k-max", type=int, default=50)
    p_sct.add_argument("--beta", type=float, default=2.0)
    p_sct.add_argument("--count", type=int, default=100)
    p_sct.add_argument("--n-grid", default="50:1600:6:log2")
    p_sct.add_argument("--ridge-grid", default="1e-4:1:9:log10")
    p_sct.add_argument("--trials", type=int, default=10)
    p_sct.add_argument("--seed", type=int, default=0)
    p_sct.add_argument("--out", required=True)
    p_sct.set_defaults(func=_cmd_sct)

    p_val = sub.add_parser("validate", help="run a validation suite")
    p_val.add_argument("--suite", required=True)
    p_val.add_argument("--seed", type=int, default=0)
    p_val.set_defaults(func=_cmd_validate)

    return parser


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        return args.func(args)
    except (ParseError, FormatError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        if args.command == "sweep" and exc.filename == args.config:
            print(f"config error: {exc}", file=sys.stderr)
            return 1
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except (ConfigError, ValueError, KeyError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
