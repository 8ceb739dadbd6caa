"""``anomaly-forge <command> --job <path> [--out <path>] [--seed <u64>]``.

Reads a JSON job, runs one command and writes a JSON report (atomically).
Exit status: 0 ok, 1 a check failed, 2 usage/schema error, 3 precondition
or unsupported model, 4 accuracy/numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import enum
import json
import math
import os
import sys
import tempfile
import time
from importlib import metadata

import numpy as np
import scipy

from . import __version__
from .charge import assemble_charges, cross_validate_cylinder, reference_sphere_charge
from .errors import (
    AccuracyError,
    AnomalyForgeError,
    NumericError,
    PreconditionError,
    ResolutionError,
    SchemaError,
    UnsupportedModelError,
)
from .flow import branch_trace, find_crossings, mode_family_cylinder, projector_trace
from .forms import ahat_density_batch, index_form_integral, HOMOGENEOUS_POINT
from .models import (
    BianchiI,
    BianchiII,
    Cylinder,
    SphereReference,
    model_kind,
    validate_product_structure,
)
from .schema import COMMANDS, SCHEMA_VERSION, JobSpec, dump_job, job_schema, parse_job
from .spectral import (
    circle_spectrum,
    eta_closed,
    eta_zeta_oracle,
    heisenberg_summary,
    torus_summary,
)
from .suite import run_suite

EXIT_OK, EXIT_CHECK, EXIT_USAGE, EXIT_PRECONDITION, EXIT_ACCURACY = 0, 1, 2, 3, 4

_REQUIRED_MODEL = {
    "charge": (Cylinder, BianchiI, BianchiII, SphereReference),
    "flow": (Cylinder,),
    "eta": (Cylinder, BianchiI, BianchiII),
    "forms": (Cylinder, BianchiI, BianchiII),
    "validate": (Cylinder, BianchiI, BianchiII, SphereReference),
    "reference": (SphereReference,),
}


def to_jsonable(obj):
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {
            f.name: to_jsonable(getattr(obj, f.name))
            for f in dataclasses.fields(obj)
            if not f.name.startswith("_")
        }
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        obj = float(obj)
        return obj if math.isfinite(obj) else None
    return obj


class JobOutcome:
    def __init__(self):
        self.results: dict = {}
        self.warnings: list[str] = []
        self.status = EXIT_OK
        self.csv_rows: list | None = None
        self.csv_header: list[str] | None = None


def _cmd_charge(model, job: JobSpec, out: JobOutcome) -> None:
    rep = assemble_charges(model, job.tolerances.quadrature)
    out.results["charge"] = rep
    out.warnings.extend(rep.notes)
    if rep.anomalous:
        out.warnings.append("charge report flagged anomalous (non-integer Q_R)")
    if isinstance(model, Cylinder):
        cmp = cross_validate_cylinder(model, job.tolerances.quadrature)
        out.results["cross_validation"] = cmp
        if not cmp.equal:
            out.status = EXIT_CHECK


def _cmd_flow(model, job: JobSpec, out: JobOutcome) -> None:
    fam = mode_family_cylinder(model)
    w = model.window
    trace = projector_trace(fam, w.t1, w.t2)
    crossings = find_crossings(fam, w.t1, w.t2, job.samples)
    flow = -sum(c.direction for c in crossings)
    out.results["trace"] = trace
    out.results["spectral_flow"] = flow
    out.results["crossings"] = crossings
    out.results["agree"] = flow == trace.value
    out.warnings.extend(trace.warnings)
    if flow != trace.value:
        out.status = EXIT_CHECK
    out.csv_header = ["mode_index", "t", "lambda"]
    out.csv_rows = branch_trace(fam, w.t1, w.t2, job.samples)


def _cmd_eta(model, job: JobSpec, out: JobOutcome) -> None:
    w = model.window
    ends = {}
    for label, t in (("t1", w.t1), ("t2", w.t2)):
        if isinstance(model, Cylinder):
            spec = circle_spectrum(model.L, model.spin, model.gauge.value(t), conjugate=True)
            closed = eta_closed(spec)
            entry = {"spectrum": spec, "closed": closed}
            if closed.h == 0:
                oracle = eta_zeta_oracle(spec)
                entry["oracle"] = oracle
                entry["oracle_within_tolerance"] = (
                    abs(oracle.eta - closed.eta) < job.tolerances.eta_oracle
                )
                if not entry["oracle_within_tolerance"]:
                    out.warnings.append(f"eta oracle misses closed form at {label}")
        elif isinstance(model, BianchiI):
            entry = {"torus": torus_summary(model.spin)}
        else:
            summary = heisenberg_summary(model.a.value(t), model.b.value(t), model.spin)
            N = model.N1 if label == "t1" else model.N2
            entry = {
                "heisenberg": summary,
                "smooth_eta": summary.smooth_eta,
                "N": N,
                "eta": None if N is None else summary.smooth_eta - N,
            }
        ends[label] = entry
    out.results["eta"] = ends


def _cmd_forms(model, job: JobSpec, out: JobOutcome) -> None:
    out.results["form_integral"] = index_form_integral(model, job.tolerances.quadrature)
    w = model.window
    ts = np.linspace(w.t1, w.t2, job.samples)
    if isinstance(model, Cylinder):
        dens = model.L * model.gauge.derivative(ts) / (2.0 * math.pi)
    else:
        pts = np.column_stack([ts, np.tile(HOMOGENEOUS_POINT, (len(ts), 1))])
        dens = ahat_density_batch(model, pts)
    out.csv_header = ["t", "density"]
    out.csv_rows = [(float(t), float(d)) for t, d in zip(ts, dens)]


def _cmd_validate(model, job: JobSpec, out: JobOutcome) -> None:
    rep = validate_product_structure(model, 0.0)
    out.results["validation"] = rep
    if not rep.passed:
        out.status = EXIT_CHECK


def _cmd_reference(model, job: JobSpec, out: JobOutcome) -> None:
    out.results["reference"] = {"k": model.k, "Q_chir": reference_sphere_charge(model.k)}


def _cmd_suite(model, job: JobSpec, out: JobOutcome) -> None:
    checks = run_suite(
        job.seed, job.suite, job.tolerances.quadrature, job.tolerances.eta_oracle
    )
    out.results["checks"] = checks
    out.results["total_passed"] = sum(c.passed for c in checks)
    out.results["total_failed"] = sum(c.failed for c in checks)
    if out.results["total_failed"]:
        out.status = EXIT_CHECK


_HANDLERS = {
    "charge": _cmd_charge,
    "flow": _cmd_flow,
    "eta": _cmd_eta,
    "forms": _cmd_forms,
    "validate": _cmd_validate,
    "reference": _cmd_reference,
    "suite": _cmd_suite,
}


def _build_model(job: JobSpec, command: str):
    if command == "suite":
        return job.model.build() if job.model is not None else None
    if job.model is None:
        raise SchemaError("command needs a model", "/model")
    try:
        model = job.model.build()
    except ValueError as exc:
        raise SchemaError(str(exc), "/model") from None
    allowed = _REQUIRED_MODEL[command]
    if not isinstance(model, allowed):
        raise PreconditionError(
            f"command {command!r} does not accept a {model_kind(model)} model"
        )
    return model


def versions() -> dict:
    return {
        "anomaly_forge": __version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "pydantic": metadata.version("pydantic"),
        "python": sys.version.split()[0],
    }


def run(job: JobSpec, command: str | None = None) -> tuple[int, dict]:
    """Execute a parsed job; returns the exit status and the report document."""
    command = command or job.command
    if command not in COMMANDS:
        raise SchemaError(f"unknown command {command!r}", "/command")
    started = time.perf_counter()
    out = JobOutcome()
    error = None
    try:
        model = _build_model(job, command)
        _HANDLERS[command](model, job, out)
    except SchemaError as exc:
        out.status, error = EXIT_USAGE, exc
    except (PreconditionError, UnsupportedModelError) as exc:
        out.status, error = EXIT_PRECONDITION, exc
    except (AccuracyError, NumericError, ResolutionError) as exc:
        out.status, error = EXIT_ACCURACY, exc
    report = {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "job": dump_job(job),
        "status": out.status,
        "results": to_jsonable(out.results),
        "warnings": list(out.warnings),
        "error": None if error is None else {"type": type(error).__name__, "message": str(error)},
        "versions": versions(),
        "wall_time_s": time.perf_counter() - started,
    }
    if out.csv_rows is not None and job.output.csv_path:
        write_csv(job.output.csv_path, out.csv_header, out.csv_rows)
    return out.status, report


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".part")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_report(path: str, report: dict) -> None:
    _atomic_write(path, dumps(report))


def write_csv(path: str, header, rows) -> None:
    import io

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(v) if isinstance(v, float) else v for v in row])
    _atomic_write(path, buf.getvalue())


def dumps(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True, allow_nan=False) + "\n"


def result_payload(report: dict) -> str:
    """Canonical text of the deterministic part of a report."""
    keep = {k: report[k] for k in ("schema_version", "command", "job", "status", "results")}
    return json.dumps(keep, sort_keys=True, allow_nan=False)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="anomaly-forge", description="Relative chiral charges on model spacetimes."
    )
    p.add_argument("command", choices=COMMANDS + ("schema",))
    p.add_argument("--job", help="path to the JSON job description")
    p.add_argument("--out", help="report path (overrides output.report_path)")
    p.add_argument("--seed", type=int, help="seed for randomized suites (u64)")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "schema":
        sys.stdout.write(json.dumps(job_schema(), indent=2, sort_keys=True) + "\n")
        return EXIT_OK
    if not args.job:
        print("anomaly-forge: --job is required", file=sys.stderr)
        return EXIT_USAGE
    try:
        with open(args.job) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"anomaly-forge: cannot read job: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if isinstance(doc, dict) and args.seed is not None:
        doc = {**doc, "seed": args.seed}
    try:
        job = parse_job(doc)
        if job.command is not None and job.command != args.command:
            raise SchemaError(
                f"job declares {job.command!r} but {args.command!r} was requested", "/command"
            )
    except SchemaError as exc:
        print(f"anomaly-forge: schema error at {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        status, report = run(job, args.command)
    except AnomalyForgeError as exc:
        print(f"anomaly-forge: {exc}", file=sys.stderr)
        return EXIT_USAGE
    path = args.out or job.output.report_path
    if path:
        write_report(path, report)
    else:
        sys.stdout.write(dumps(report))
    if report["error"]:
        print(f"anomaly-forge: {report['error']['type']}: {report['error']['message']}", file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
