"""Batch command line interface: simulate, fit, predict, diagnose.

File conventions: UTF-8, LF line endings, ``.`` decimal point, float fields
written with shortest round-trip repr.  Exit codes are 0 (success), 2 (input
or validation problem) and 3 (numeric failure inside a chain).

Dataset CSV schema: header ``subject,y,x1..xk[,s1..sl]``.  Rows may be
grouped or interleaved by subject; the loader groups them in first-appearance
order.  Absent s-columns mean a random-intercept design, s = (1).
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from .diagnostics import export_trace, kde_density
from .estimator import PosteriorSummary, average_jitter_fit
from .exceptions import ChainError, DataError, NumericError, ParameterError
from .gibbs import GibbsConfig
from .jitter import predict_count_quantile
from .model import PanelDataset, PriorConfig, QuantileSpec, SubjectBlock, validate_dataset
from .simgen import ProgabideRecord, gen_study1, gen_study2, progabide_covariates

__all__ = ["main", "entrypoint", "parse_panel_csv"]

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERIC = 3


def _fmt(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def _write_csv(path: Path, header: str, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _split_csv_line(line: str) -> list[str]:
    return [tok.strip() for tok in line.rstrip("\n").split(",")]


def _read_rows(path: str) -> tuple[list[str], list[tuple[int, list[str]]]]:
    """Header tokens plus (line number, tokens) rows; blank lines are skipped."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.readlines()
    if not lines:
        return [], []
    header = _split_csv_line(lines[0])
    rows = []
    for ln, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        rows.append((ln, _split_csv_line(line)))
    return header, rows


def _covariate_layout(header: list[str], with_y: bool) -> tuple[int, int, bool]:
    """Validate the header and return (k, l, has_s_columns)."""
    expected_lead = ["subject", "y"] if with_y else ["subject"]
    if header[: len(expected_lead)] != expected_lead:
        missing = [c for c in expected_lead if c not in header]
        if missing:
            raise DataError(f"missing required column {missing[0]!r} in header {header}")
        raise DataError(f"header must start with {','.join(expected_lead)}, got {header}")
    rest = header[len(expected_lead) :]
    k = 0
    while k < len(rest) and rest[k] == f"x{k + 1}":
        k += 1
    if k == 0:
        raise DataError(f"no x1..xk covariate columns found in header {header}")
    srest = rest[k:]
    for j, name in enumerate(srest, start=1):
        if name != f"s{j}":
            raise DataError(f"unexpected column {name!r}; expected s{j} in header {header}")
    return k, max(1, len(srest)), bool(srest)


def _group_rows(
    rows: list[tuple[int, list[str]]], n_cols: int, parse_row
) -> dict:
    grouped: dict = {}
    for ln, toks in rows:
        if len(toks) != n_cols:
            raise DataError(f"expected {n_cols} fields, got {len(toks)}", line=ln)
        sid = toks[0]
        grouped.setdefault(sid, []).append(parse_row(ln, toks))
    return grouped


def parse_panel_csv(path: str) -> PanelDataset:
    """Load a long-format panel CSV into a dataset, grouping rows by subject."""
    header, rows = _read_rows(path)
    if not header or header == [""]:
        raise DataError(f"{path}: empty file")
    k, l, has_s = _covariate_layout(header, with_y=True)

    def parse_row(ln: int, toks: list[str]):
        try:
            y = int(toks[1])
        except ValueError as exc:
            raise DataError(f"count y must be an integer, got {toks[1]!r}", line=ln) from exc
        try:
            x = [float(t) for t in toks[2 : 2 + k]]
            s = [float(t) for t in toks[2 + k :]] if has_s else [1.0]
        except ValueError as exc:
            raise DataError(f"malformed numeric field: {exc}", line=ln) from exc
        return y, x, s

    grouped = _group_rows(rows, len(header), parse_row)
    if not grouped:
        raise DataError(f"{path}: no data rows")
    blocks = [
        SubjectBlock(
            subject_id=sid,
            y=np.array([r[0] for r in rs]),
            x=np.array([r[1] for r in rs]),
            s=np.array([r[2] for r in rs]),
        )
        for sid, rs in grouped.items()
    ]
    return PanelDataset(subjects=blocks, k=k, l=l)


def parse_covariate_csv(path: str) -> tuple[list, list[np.ndarray], list[np.ndarray]]:
    """Covariate-only CSV for prediction: (subjects, x rows, s rows)."""
    header, rows = _read_rows(path)
    if not header or header == [""]:
        return [], [], []
    k, _, has_s = _covariate_layout(header, with_y=False)
    subjects, xs, ss = [], [], []
    for ln, toks in rows:
        if len(toks) != len(header):
            raise DataError(f"expected {len(header)} fields, got {len(toks)}", line=ln)
        subjects.append(toks[0])
        try:
            xs.append(np.array([float(t) for t in toks[1 : 1 + k]]))
            ss.append(np.array([float(t) for t in toks[1 + k :]]) if has_s else np.array([1.0]))
        except ValueError as exc:
            raise DataError(f"malformed numeric field: {exc}", line=ln) from exc
    return subjects, xs, ss


def parse_progabide_csv(path: str) -> list[ProgabideRecord]:
    """Raw clinical-trial schema: subject,y,baseline,age,trt,visit."""
    header, rows = _read_rows(path)
    expected = ["subject", "y", "baseline", "age", "trt", "visit"]
    if header != expected:
        raise DataError(f"expected header {','.join(expected)}, got {header}")
    records = []
    for ln, toks in rows:
        if len(toks) != len(expected):
            raise DataError(f"expected {len(expected)} fields, got {len(toks)}", line=ln)
        try:
            records.append(
                ProgabideRecord(
                    subject=toks[0],
                    seizures=int(toks[1]),
                    baseline=float(toks[2]),
                    age=float(toks[3]),
                    treatment=int(toks[4]),
                    visit=int(toks[5]),
                )
            )
        except ValueError as exc:
            raise DataError(f"malformed field: {exc}", line=ln) from exc
    return records


def _parse_quantiles(text: str) -> list[float]:
    try:
        values = [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise ParameterError(f"could not parse quantile list {text!r}") from exc
    if not values:
        raise ParameterError("at least one quantile level is required")
    for p in values:
        if not 0.0 < p < 1.0:
            raise ParameterError(f"quantile level must lie in (0, 1), got {p}")
    return values


def _threads(args) -> int:
    if args.threads is not None:
        return max(1, args.threads)
    return max(1, int(os.environ.get("ALQ_PANEL_THREADS", "1")))


_TRACE_PARAMS = ("sigma", "phi2", "lambda2")


def cmd_fit(args) -> int:
    quantiles = _parse_quantiles(args.quantiles)
    if args.progabide_covariates:
        records = parse_progabide_csv(args.input)
        random_model = "intercept" if args.progabide_model == 1 else "intercept_visit"
        dataset = progabide_covariates(records, random_model=random_model)
    else:
        dataset = parse_panel_csv(args.input)
    report = validate_dataset(dataset)
    if report:
        for entry in report:
            print(f"invalid dataset: {entry}", file=sys.stderr)
        return EXIT_INPUT

    priors = PriorConfig(a1=args.a1, a2=args.a2, b1=args.b1, b2=args.b2, c1=args.c1, c2=args.c2)
    outdir = Path(args.output)
    outdir.mkdir(parents=True, exist_ok=True)
    threads = _threads(args)

    comparison_rows = []
    for p in quantiles:
        pspec = QuantileSpec(
            p=p,
            zeta=args.zeta,
            m_jitter=args.m_jitter,
            iterations=args.iterations,
            burn_in=args.burn_in,
            master_seed=args.seed,
        )
        config = GibbsConfig(
            iterations=args.iterations,
            burn_in=args.burn_in,
            thin=args.thin,
            paper_literal_sigma=args.paper_literal_sigma,
        )
        summary, chains = average_jitter_fit(
            dataset, pspec, priors, config, level=args.level, threads=threads
        )
        qdir = outdir / f"p{p:g}"
        qdir.mkdir(exist_ok=True)
        with open(qdir / "summary.json", "w", encoding="utf-8", newline="\n") as fh:
            json.dump(summary.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

        selectors = [f"beta[{j}]" for j in range(1, dataset.k + 1)] + list(_TRACE_PARAMS)
        for selector in selectors:
            iters, values = export_trace(chains[0], selector)
            name = selector.replace("[", "").replace("]", "")
            _write_csv(qdir / f"trace_{name}.csv", "iter,value", zip(iters, values))
            distinct = np.unique(values)
            if distinct.size >= 2:
                grid, dens = kde_density(values, grid_size=args.grid_size)
                _write_csv(qdir / f"density_{name}.csv", "x,density", zip(grid, dens))
            else:
                print(f"skipping density_{name}.csv: constant chain", file=sys.stderr)

        comparison_rows.append((p, summary.avg_nll, summary.avg_dic, summary.avg_p_d))
        betas = ", ".join(
            f"{name}={summary.coefficients[name].avg_post_mean:.4f}"
            for name in summary.coefficients
            if name.startswith("beta")
        )
        print(f"p={p:g}: {betas}, nll={summary.avg_nll:.1f}, dic={summary.avg_dic:.1f}")

    _write_csv(outdir / "comparison.csv", "quantile,nll,dic,p_d", comparison_rows)
    return EXIT_OK


def cmd_simulate(args) -> int:
    if args.design == "study1":
        dataset, truth = gen_study1(args.subjects, args.per, args.seed)
    else:
        dataset, truth = gen_study2(args.subjects, args.per, args.seed)
    out = Path(args.output)
    if out.parent and not out.parent.exists():
        out.parent.mkdir(parents=True, exist_ok=True)

    write_s = dataset.l > 1
    header = ["subject", "y"] + [f"x{j + 1}" for j in range(dataset.k)]
    if write_s:
        header += [f"s{j + 1}" for j in range(dataset.l)]
    rows = []
    for block in dataset.subjects:
        for j in range(block.n_obs):
            row = [block.subject_id, int(block.y[j])] + list(block.x[j])
            if write_s:
                row += list(block.s[j])
            rows.append(row)
    _write_csv(out, ",".join(header), rows)

    truth_path = Path(args.truth) if args.truth else out.with_name(out.stem + "_truth.json")
    payload = {
        "design": truth.design,
        "seed": args.seed,
        "subjects": args.subjects,
        "per": args.per,
        "beta_true": [float(b) for b in truth.beta_true],
        "alpha_true": [[float(a) for a in row] for row in truth.alpha_true],
    }
    with open(truth_path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"wrote {dataset.n_total} rows to {out}")
    return EXIT_OK


def cmd_predict(args) -> int:
    with open(args.summary, "r", encoding="utf-8") as fh:
        summary = PosteriorSummary.from_dict(json.load(fh))
    beta = np.array(
        [summary.coefficients[f"beta{j + 1}"].avg_post_mean for j in range(summary.k)]
    )
    subjects, xs, ss = parse_covariate_csv(args.input)
    rows = []
    for idx, (sid, x, s) in enumerate(zip(subjects, xs, ss), start=1):
        if len(x) != summary.k:
            raise DataError(f"row {idx}: expected {summary.k} x-covariates, got {len(x)}")
        if len(s) != summary.l:
            raise DataError(f"row {idx}: expected {summary.l} s-covariates, got {len(s)}")
        effect = summary.random_effects.get(str(sid))
        alpha_i = np.array(effect) if effect is not None else np.zeros(summary.l)
        rows.append((idx, predict_count_quantile(beta, alpha_i, x, s, summary.p)))
    _write_csv(Path(args.output), "row,prediction", rows)
    return EXIT_OK


def cmd_diagnose(args) -> int:
    dataset = parse_panel_csv(args.input)
    outdir = Path(args.output)
    outdir.mkdir(parents=True, exist_ok=True)
    counts = dataset.counts
    values, freq = np.unique(counts, return_counts=True)
    _write_csv(outdir / "histogram_y.csv", "count,frequency", zip(values, freq))
    if np.unique(counts).size >= 2:
        grid, dens = kde_density(counts.astype(float), grid_size=args.grid_size)
        _write_csv(outdir / "density_y.csv", "x,density", zip(grid, dens))
    else:
        print("skipping density_y.csv: constant counts", file=sys.stderr)
    print(f"{dataset.n_subjects} subjects, {dataset.n_total} observations, "
          f"count range {counts.min()}..{counts.max()}")
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="alqpanel",
        description="Quantile regression for panel count data via Gibbs sampling",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="generate a synthetic panel dataset")
    sim.add_argument("--design", choices=["study1", "study2"], required=True)
    sim.add_argument("--subjects", type=int, default=20)
    sim.add_argument("--per", type=int, default=5)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("-o", "--output", required=True, help="output CSV path")
    sim.add_argument("--truth", default=None, help="truth JSON path (default alongside CSV)")
    sim.set_defaults(func=cmd_simulate)

    fit = sub.add_parser("fit", help="fit quantile models on a panel CSV")
    fit.add_argument("--input", required=True)
    fit.add_argument("-o", "--output", required=True, help="output directory")
    fit.add_argument("--quantiles", default="0.25,0.5,0.75")
    fit.add_argument("--m-jitter", type=int, default=20, dest="m_jitter")
    fit.add_argument("--iterations", type=int, default=12000)
    fit.add_argument("--burn-in", type=int, default=2000, dest="burn_in")
    fit.add_argument("--thin", type=int, default=1)
    fit.add_argument("--seed", type=int, default=0)
    fit.add_argument("--zeta", type=float, default=1e-5)
    fit.add_argument("--level", type=float, default=0.95)
    fit.add_argument("--a1", type=float, default=0.01)
    fit.add_argument("--a2", type=float, default=0.01)
    fit.add_argument("--b1", type=float, default=-0.5)
    fit.add_argument("--b2", type=float, default=0.0)
    fit.add_argument("--c1", type=float, default=-0.5)
    fit.add_argument("--c2", type=float, default=0.0)
    fit.add_argument("--grid-size", type=int, default=512, dest="grid_size")
    fit.add_argument("--paper-literal-sigma", action="store_true", dest="paper_literal_sigma",
                     help="use the reduced sigma conditional (comparison runs only)")
    fit.add_argument("--threads", type=int, default=None,
                     help="replicate-level parallelism (default $ALQ_PANEL_THREADS or 1)")
    fit.add_argument("--progabide-covariates", action="store_true",
                     dest="progabide_covariates",
                     help="input uses the raw trial schema subject,y,baseline,age,trt,visit")
    fit.add_argument("--progabide-model", type=int, choices=[1, 2], default=1,
                     help="1 = random intercept, 2 = random intercept + visit effect")
    fit.set_defaults(func=cmd_fit)

    pred = sub.add_parser("predict", help="integer quantile predictions from a fit summary")
    pred.add_argument("--summary", required=True, help="summary.json from a fit")
    pred.add_argument("--input", required=True, help="covariate CSV: subject,x1..xk[,s1..sl]")
    pred.add_argument("-o", "--output", required=True, help="output CSV path")
    pred.set_defaults(func=cmd_predict)

    diag = sub.add_parser("diagnose", help="plot-ready histogram/density of the counts")
    diag.add_argument("--input", required=True)
    diag.add_argument("-o", "--output", required=True, help="output directory")
    diag.add_argument("--grid-size", type=int, default=512, dest="grid_size")
    diag.set_defaults(func=cmd_diagnose)
    return parser


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ParameterError, DataError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (NumericError, ChainError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


def entrypoint() -> None:  # pragma: no cover - console-script shim
    sys.exit(main())


if __name__ == "__main__":  # pragma: no cover
    entrypoint()
