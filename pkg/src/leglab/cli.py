"""Command-line front end.

Subcommands: verify, fit-form, reduce, extend, agree, catalog.  Exit
codes: 0 pass, 1 fail (reports carry witnesses), 2 inconclusive or
usage error.  All runs are deterministic given (seed, backend, budgets)
and JSON output is byte-identical across repeats and thread counts.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from fractions import Fraction

from .catalog import CatalogError, catalog_get, catalog_names, fit_frame_stream, self_check
from .conormal import (
    build_conormal_lift,
    incidence_quadric_residual,
    reduction_agreement_check,
    singularity_classification_probe,
    torus_action_check,
)
from .dsl import DslError, dump_entry, load_file
from .linalg import Matrix
from .report import exit_code_for, render_report
from .rng import spawn
from .runtime import resolve_threads
from .scalars import EXACT, approx_backend, format_rational, parse_rational_text
from .symplectic import SymplecticForm, fit_symplectic_form, standard_form
from .variety import (
    ParamVariety,
    SampleBudgetError,
    VarietyError,
    dimension_estimate,
    sample_points,
)
from .verify import (
    SectionBackendError,
    VerificationReport,
    check_legendrian,
    coisotropic_reduce,
    secant_avoidance_probe,
    verify_reduction,
    witness_nonisotropic_pair,
)


def _add_common(p: argparse.ArgumentParser, samples_default=50):
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--catalog", help="built-in variety name, e.g. lg36 or p1xQ(3)")
    src.add_argument("--dsl", help="path to a variety definition file")
    p.add_argument("--backend", choices=("exact", "approx"), default="exact")
    p.add_argument("--precision", type=int, default=128, help="approx precision in bits")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples", type=int, default=samples_default)
    p.add_argument("--threads", type=int, default=None,
                   help="worker threads (env LEGLAB_THREADS as fallback)")
    p.add_argument("--out", help="write the report here instead of stdout")
    p.add_argument("--format", choices=("json", "text"), default="json")


def _build_parser() -> argparse.ArgumentParser:
    root = argparse.ArgumentParser(
        prog="leglab",
        description="construct and verify Legendrian subvarieties of projective space",
    )
    sub = root.add_subparsers(dest="command")

    p = sub.add_parser("verify", help="sampled Lagrangian-tangent verification")
    _add_common(p)
    p.add_argument("--form", choices=("attached", "standard", "fit", "explicit"),
                   default="attached")
    p.add_argument("--form-file", help="JSON matrix for --form explicit")

    p = sub.add_parser("fit-form", help="solve for forms making the variety Legendrian")
    _add_common(p)

    p = sub.add_parser("reduce", help="hyperplane reduction with verification and probes")
    _add_common(p, samples_default=20)
    p.add_argument("--codim", type=int, default=1)
    p.add_argument("--pairs", type=int, default=100, help="secant probe pair budget")

    p = sub.add_parser("extend", help="conormal lift with the full probe suite")
    _add_common(p, samples_default=30)
    p.add_argument("--torus-checks", type=int, default=3)

    p = sub.add_parser("agree", help="compare reduction-then-project with the chart map")
    _add_common(p, samples_default=20)

    p = sub.add_parser("catalog", help="list, show, or self-check built-in entries")
    p.add_argument("action", choices=("list", "show", "self-check"))
    p.add_argument("name", nargs="?")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples", type=int, default=50)
    p.add_argument("--out")
    p.add_argument("--format", choices=("json", "text"), default="json")
    return root


def _emit(text: str, out):
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _backend_for(args):
    if args.backend == "approx":
        return approx_backend(args.precision)
    return EXACT


def _load_source(args):
    """(entry-or-None, document-or-None); errors raise CatalogError/DslError."""
    if args.catalog:
        return catalog_get(args.catalog), None
    return None, load_file(args.dsl)


def _parametrized_variety(entry, doc):
    if entry is not None:
        if entry.kind == "hypersurface":
            raise CatalogError(
                f"{entry.name} is an implicit hypersurface; use `extend` on it"
            )
        return entry.variety
    if doc.variety is None:
        raise DslError("this command needs a parametrized variety")
    return doc.variety


def _fit_form_for(x: ParamVariety, seed: int) -> SymplecticForm:
    fit = fit_symplectic_form(fit_frame_stream(x, seed))
    if fit.dim != 1 or not fit.nondegenerate:
        raise VarietyError(
            f"fit on {x.name} gave dimension {fit.dim}"
            + ("" if fit.nondegenerate else " (degenerate family)")
        )
    return fit.generator_form()


def _resolve_form(args, entry, doc, x: ParamVariety) -> SymplecticForm:
    mode = getattr(args, "form", "attached")
    if mode == "standard":
        return standard_form(x.ambient_dim // 2)
    if mode == "explicit":
        if not args.form_file:
            raise VarietyError("--form explicit needs --form-file")
        with open(args.form_file, "r", encoding="utf-8") as fh:
            rows = json.load(fh)
        return SymplecticForm(Matrix([[parse_rational_text(str(v)) for v in row] for row in rows]))
    if mode == "fit":
        return _fit_form_for(x, args.seed)
    # attached: catalog form (fitted and cached), or the document's choice
    if entry is not None:
        return entry.form(args.seed)
    if doc.form_mode == "standard":
        return standard_form(x.ambient_dim // 2)
    if doc.form_mode == "explicit":
        return doc.explicit_form
    return _fit_form_for(x, args.seed)


def _cmd_verify(args) -> int:
    entry, doc = _load_source(args)
    x = _parametrized_variety(entry, doc)
    form = _resolve_form(args, entry, doc, x)
    backend = _backend_for(args)
    report = check_legendrian(x, form, args.samples, args.seed, backend,
                              threads=resolve_threads(args.threads))
    _emit(render_report(report, args.format), args.out)
    return exit_code_for(report.verdict)


def _cmd_fit_form(args) -> int:
    entry, doc = _load_source(args)
    x = _parametrized_variety(entry, doc)
    d = x.ambient_dim
    budget = 3 * (d * (d - 1) // 2)
    t0 = time.perf_counter()
    fit = fit_symplectic_form(fit_frame_stream(x, args.seed, budget))
    report = VerificationReport(
        operation="fit_form",
        variety=x.name,
        backend="exact",
        seed=args.seed,
        samples_requested=budget,
        samples_evaluated=fit.frames_used,
        ambient_dim=d,
    )
    report.details["solution_dimension"] = fit.dim
    report.details["nondegenerate"] = fit.nondegenerate
    report.details["degenerate_family"] = fit.degenerate_family
    report.details["equations_used"] = fit.equations_used
    report.details["method"] = fit.method
    if fit.dim == 1:
        gen = fit.generator()
        report.details["generator"] = [
            [format_rational(v) for v in row] for row in gen.entries
        ]
    report.timings["seconds"] = time.perf_counter() - t0
    report.close(fit.dim == 1 and fit.nondegenerate)
    _emit(render_report(report, args.format), args.out)
    return exit_code_for(report.verdict)


def _cmd_reduce(args) -> int:
    entry, doc = _load_source(args)
    x = _parametrized_variety(entry, doc)
    form = _resolve_form(args, entry, doc, x)
    backend = _backend_for(args)
    reduced = coisotropic_reduce(x, form, args.codim, args.seed, backend)
    report = verify_reduction(reduced, args.samples, args.seed, backend,
                              threads=resolve_threads(args.threads))
    probe = secant_avoidance_probe(reduced, args.pairs, args.seed, backend)
    report.details["secant_probe"] = {
        "pairs_tested": probe.details.get("pairs_tested", 0),
        "hits": probe.details.get("hits", 0),
        "projection_injective_on_samples": probe.details.get(
            "projection_injective_on_samples", False
        ),
        "verdict": probe.verdict,
    }
    witness = witness_nonisotropic_pair(x, form, budget=100, seed=args.seed)
    report.details["nonisotropic_witness_found"] = witness.found
    report.details["witness_draws"] = witness.draws
    if report.verdict == "pass" and probe.verdict != "pass":
        report.verdict = probe.verdict
    _emit(render_report(report, args.format), args.out)
    return exit_code_for(report.verdict)


def _lift_for(entry, doc):
    if entry is not None:
        if entry.lift is not None:
            return entry.lift, entry.singular_points
        if entry.kind == "hypersurface":
            sampling = entry.source if isinstance(entry.source, ParamVariety) else None
            return (
                build_conormal_lift(entry.variety, sampling_points=sampling),
                entry.singular_points,
            )
        return build_conormal_lift(entry.variety), ()
    if doc.hypersurface is not None:
        return build_conormal_lift(doc.hypersurface), doc.singular_points
    return build_conormal_lift(doc.variety), ()


def _cmd_extend(args) -> int:
    entry, doc = _load_source(args)
    lift, singular = _lift_for(entry, doc)
    backend = _backend_for(args)
    t0 = time.perf_counter()
    form = lift.split_form()
    leg = check_legendrian(lift, form, args.samples, args.seed, backend,
                           threads=resolve_threads(args.threads))
    samples = lift.sample(args.samples, args.seed, backend)
    exact = backend.name == "exact"
    incidence_violations = 0
    worst = None
    torus_failures = 0
    torus_checks = 0
    for s in samples:
        res = incidence_quadric_residual(s.point, backend)
        if exact:
            if res != 0:
                incidence_violations += 1
        else:
            mag = abs(res)
            if worst is None or mag > worst:
                worst = mag
            if not backend.is_zero(mag):
                incidence_violations += 1
        rng = spawn(args.seed ^ 0x70A115, s.index)
        for _ in range(args.torus_checks):
            t = rng.nonzero_fraction(9)
            torus_checks += 1
            if not torus_action_check(lift, s, t, backend):
                torus_failures += 1
    sing = singularity_classification_probe(
        lift, args.samples, args.seed, backend, singular_points=singular
    )
    report = VerificationReport(
        operation="extend",
        variety=lift.name,
        backend=backend.name,
        precision_bits=backend.precision,
        seed=args.seed,
        samples_requested=args.samples,
        samples_evaluated=len(samples),
        ambient_dim=lift.ambient_dim,
    )
    report.rank_histogram = dict(leg.rank_histogram)
    report.isotropy_violations = leg.isotropy_violations
    report.worst_residual = leg.worst_residual
    report.details["legendrian_verdict"] = leg.verdict
    report.details["incidence_violations"] = incidence_violations
    if worst is not None:
        report.details["worst_incidence_residual"] = worst
    report.details["torus_checks"] = torus_checks
    report.details["torus_failures"] = torus_failures
    report.details["singularity"] = {
        "verdict": sing.verdict,
        "sampled_rank_drops": sing.details.get("sampled_rank_drops"),
        "provided_singular_points": sing.details.get("provided_singular_points"),
        "provided_rank_drops": sing.details.get("provided_rank_drops"),
        "flagged_clusters": sing.details.get("flagged_clusters"),
    }
    passed = (
        leg.verdict == "pass"
        and incidence_violations == 0
        and torus_failures == 0
        and sing.verdict == "pass"
    )
    report.timings["seconds"] = time.perf_counter() - t0
    report.close(passed)
    _emit(render_report(report, args.format), args.out)
    return exit_code_for(report.verdict)


def _cmd_agree(args) -> int:
    entry, doc = _load_source(args)
    if entry is not None and entry.lift is not None:
        lift = entry.lift
    else:
        lift, _ = _lift_for(entry, doc)
    report = reduction_agreement_check(lift, args.samples, args.seed)
    _emit(render_report(report, args.format), args.out)
    return exit_code_for(report.verdict)


def _cmd_catalog(args) -> int:
    if args.action == "list":
        if args.format == "json":
            _emit(json.dumps({"schema": 1, "entries": catalog_names()},
                             separators=(",", ":")) + "\n", args.out)
        else:
            _emit("\n".join(catalog_names()) + "\n", args.out)
        return 0
    if not args.name and args.action == "show":
        sys.stderr.write("catalog show needs a name\n")
        return 2
    if args.action == "show":
        entry = catalog_get(args.name)
        if args.format == "json":
            payload = {
                "schema": 1,
                "name": entry.name,
                "kind": entry.kind,
                "expected_dim": entry.expected_dim,
                "expected_ambient": entry.expected_ambient,
                "builder_params": {k: str(v) for k, v in sorted(entry.builder_params.items())},
                "singular_points": [
                    [format_rational(Fraction(v)) for v in p] for p in entry.singular_points
                ],
                "dimension_estimate": dimension_estimate(entry.variety)
                if entry.kind != "hypersurface" else entry.expected_dim,
                "notes": entry.notes,
                "dsl": dump_entry(entry),
            }
            _emit(json.dumps(payload, separators=(",", ":")) + "\n", args.out)
        else:
            _emit(dump_entry(entry), args.out)
        return 0
    # self-check
    names = catalog_names() if args.name in (None, "all") else [args.name]
    worst = 0
    chunks = []
    for name in names:
        entry = catalog_get(name)
        report = self_check(entry, args.samples, args.seed)
        chunks.append(render_report(report, args.format))
        worst = max(worst, exit_code_for(report.verdict))
    _emit("".join(chunks), args.out)
    return worst


_DISPATCH = {
    "verify": _cmd_verify,
    "fit-form": _cmd_fit_form,
    "reduce": _cmd_reduce,
    "extend": _cmd_extend,
    "agree": _cmd_agree,
    "catalog": _cmd_catalog,
}


def run_command(argv) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0,) else 0
    if not args.command:
        parser.print_usage(sys.stderr)
        return 2
    try:
        return _DISPATCH[args.command](args)
    except (CatalogError, DslError, VarietyError, SectionBackendError, OSError) as err:
        sys.stderr.write(f"error: {err}\n")
        return 2


def main(argv=None) -> int:
    return run_command(sys.argv[1:] if argv is None else list(argv))


if __name__ == "__main__":
    sys.exit(main())
