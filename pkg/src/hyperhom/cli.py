"""Command-line driver: ``hyperhom {catalog,simulate,phase-scan,fit}``.

Exit codes: 0 success, 1 parse/validation error, 2 runtime or fit error.
Relative output paths resolve against ``$HYPERHOM_OUT_DIR`` when set.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace
from pathlib import Path
from typing import Optional, TextIO

from .analysis import FitError, HomFit, PhaseFit, classify_from_curve, fit_hom, fit_phase
from .bell import (
    HYPER_LABELS,
    HyperLabel,
    OamBell,
    catalog_state,
    classify_exchange,
    hyper_state,
    parity_rule,
)
from .expfile import ExperimentParseError, ExperimentSpec, format_experiment, load_experiment
from .hom import HomCurve, PhaseScan, phase_protocol_scan, simulate_hom_scan
from .optics import SOURCE_LABEL, apply_local, fidelity, prepare_hyper

OUT_DIR_ENV = "HYPERHOM_OUT_DIR"
EXIT_OK, EXIT_PARSE, EXIT_RUNTIME = 0, 1, 2


def catalog_rows() -> list[dict]:
    rows = []
    for lab in HYPER_LABELS:
        by_rule = parity_rule(lab)
        by_swap = classify_exchange(hyper_state(lab))
        rows.append(
            {
                "state": str(lab),
                "pol": lab.pol.tag,
                "oam": lab.oam.tag,
                "parity_rule": str(by_rule),
                "swap": str(by_swap),
                "agree": by_rule.same_kind(by_swap),
            }
        )
    return rows


def cli_catalog(out: Optional[TextIO] = None, as_json: bool = False) -> list[dict]:
    out = out or sys.stdout
    rows = catalog_rows()
    if as_json:
        out.write(json.dumps(rows, indent=2) + "\n")
        return rows
    out.write(f"{'state':<12} {'pol':<8} {'oam':<8} {'parity rule':<14} {'swap operator':<14}\n")
    for r in rows:
        out.write(
            f"{r['state']:<12} {r['pol']:<8} {r['oam']:<8} {r['parity_rule']:<14} {r['swap']:<14}"
            + ("" if r["agree"] else "  MISMATCH")
            + "\n"
        )
    n_sym = sum(r["swap"] == "Symmetric" for r in rows)
    n_anti = sum(r["swap"] == "Antisymmetric" for r in rows)
    out.write(f"symmetric: {n_sym}  antisymmetric: {n_anti}\n")
    return rows


def _resolve(path: str, out_dir: Optional[str]) -> Path:
    p = Path(path)
    base = out_dir or os.environ.get(OUT_DIR_ENV)
    if not p.is_absolute() and base:
        p = Path(base) / p
    return p


def _write_outputs(spec, data, fit, out_dir) -> None:
    for path in spec.outputs:
        p = _resolve(path, out_dir)
        p.parent.mkdir(parents=True, exist_ok=True)
        if p.suffix.lower() == ".csv":
            p.write_text(data.to_csv())
        else:
            doc = {
                "experiment": format_experiment(spec),
                "seed": spec.seed,
                "data": data.to_dict(),
                "fit": fit.to_dict(),
            }
            p.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def summarize_hom(label, fit: HomFit) -> str:
    se = fit.stderr.get("visibility", float("nan"))
    return f"{label}: {fit.kind} V={fit.visibility:.3f} stderr={se:.3f}"


def summarize_phase(label, fit: PhaseFit) -> str:
    return f"{label}: Phi={fit.phi:.4f} rad stderr={fit.phi_stderr:.4f}"


def prepared_state(spec: ExperimentSpec):
    """Internal state entering the interference unit."""
    if not isinstance(spec.source, HyperLabel):
        return catalog_state(spec.source)
    elements = spec.prep if spec.prep is not None else prepare_hyper(spec.source)
    return apply_local(hyper_state(SOURCE_LABEL), elements)


def run_experiment(
    spec: ExperimentSpec, out: Optional[TextIO] = None, out_dir: Optional[str] = None
) -> int:
    """prepare -> simulate -> fit -> write outputs; returns an exit code."""
    out = out or sys.stdout
    try:
        if spec.unit == "pbs":
            scan = phase_protocol_scan(
                spec.source,
                spec.thetas(),
                spectral=spec.spectral,
                pairs_per_point=spec.pairs_per_point,
                accidental_rate=spec.accidentals,
                rng_seed=spec.seed,
            )
            pfit = fit_phase(scan)
            if not pfit.reliable:
                raise FitError("phase amplitude is below the noise floor")
            _write_outputs(spec, scan, pfit, out_dir)
            out.write(summarize_phase(spec.source, pfit) + "\n")
        else:
            state = prepared_state(spec)
            curve = simulate_hom_scan(state, spec.scan_config(), spec.spectral, label=str(spec.source))
            if spec.prep is not None:
                curve.meta["target_fidelity"] = fidelity(state, catalog_state(spec.source))
            hfit = fit_hom(curve)
            classify_from_curve(hfit)
            _write_outputs(spec, curve, hfit, out_dir)
            out.write(summarize_hom(spec.source, hfit) + "\n")
    except FitError as exc:
        print(f"fit error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def _apply_overrides(spec: ExperimentSpec, args) -> ExperimentSpec:
    if args.seed is not None:
        spec = replace(spec, seed=args.seed)
    if args.out is not None:
        out = args.out
        if args.format and not out.lower().endswith("." + args.format):
            out = f"{out}.{args.format}"
        spec = replace(spec, outputs=(out,))
    elif args.format:
        spec = replace(
            spec, outputs=tuple(str(Path(p).with_suffix("." + args.format)) for p in spec.outputs)
        )
    return spec


def _load(path: str) -> ExperimentSpec:
    text = Path(path).read_text(encoding="utf-8")
    return load_experiment(text)


def _cmd_run(args, force_pbs: bool) -> int:
    try:
        spec = _load(args.file)
        if force_pbs and spec.unit != "pbs":
            if not isinstance(spec.source, OamBell):
                print(
                    f"{args.file}: phase-scan requires a pure OAM Bell label, got {spec.source}",
                    file=sys.stderr,
                )
                return EXIT_PARSE
            spec = replace(spec, unit="pbs")
    except ExperimentParseError as exc:
        for d in exc.diagnostics:
            print(f"{args.file}:{d}", file=sys.stderr)
        return EXIT_PARSE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return run_experiment(_apply_overrides(spec, args), out_dir=args.out_dir)


def _cmd_fit(args) -> int:
    try:
        text = Path(args.file).read_text(encoding="utf-8")
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    header = text.split("\n", 1)[0]
    try:
        if header.startswith("delay_s"):
            data = HomCurve.from_csv(text)
            fit = fit_hom(data)
            classify_from_curve(fit)
            line = summarize_hom(args.file, fit)
        elif header.startswith("theta_rad"):
            data = PhaseScan.from_csv(text)
            fit = fit_phase(data)
            if not fit.reliable:
                raise FitError("phase amplitude is below the noise floor")
            line = summarize_phase(args.file, fit)
        else:
            print(f"{args.file}: unrecognized CSV header {header!r}", file=sys.stderr)
            return EXIT_PARSE
    except (ValueError, KeyError) as exc:
        print(f"{args.file}: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except FitError as exc:
        print(f"fit error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    if args.format == "json":
        doc = json.dumps(fit.to_dict(), indent=2, sort_keys=True) + "\n"
        if args.out:
            _resolve(args.out, args.out_dir).write_text(doc)
        else:
            sys.stdout.write(doc)
    print(line)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="hyperhom",
        description="Two-photon HOM interference of polarization-OAM hyper-entangled states.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    cat = sub.add_parser("catalog", help="list the 16 hyper-entangled Bell states and their symmetry")
    cat.add_argument("--format", choices=["text", "json"], default="text")

    def common(p):
        p.add_argument("--seed", type=int, help="override the seed directive")
        p.add_argument("--out", help="write a single output file here instead")
        p.add_argument("--format", choices=["csv", "json"], help="output format override")
        p.add_argument("--out-dir", help=f"directory for relative outputs (default ${OUT_DIR_ENV})")

    sim = sub.add_parser("simulate", help="run an experiment file")
    sim.add_argument("file")
    common(sim)

    ph = sub.add_parser("phase-scan", help="run an experiment file on the PBS exchange-phase unit")
    ph.add_argument("file")
    common(ph)

    fit = sub.add_parser("fit", help="fit a previously written CSV")
    fit.add_argument("file")
    fit.add_argument("--seed", type=int, help="accepted for symmetry; fitting is deterministic")
    fit.add_argument("--out", help="write the JSON fit here")
    fit.add_argument("--format", choices=["text", "json"], default="text")
    fit.add_argument("--out-dir", help=f"directory for relative outputs (default ${OUT_DIR_ENV})")
    return ap


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "catalog":
        rows = cli_catalog(as_json=args.format == "json")
        return EXIT_OK if all(r["agree"] for r in rows) else EXIT_RUNTIME
    if args.command == "simulate":
        return _cmd_run(args, force_pbs=False)
    if args.command == "phase-scan":
        return _cmd_run(args, force_pbs=True)
    return _cmd_fit(args)


if __name__ == "__main__":
    sys.exit(main())
