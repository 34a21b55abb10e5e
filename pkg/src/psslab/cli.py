"""``psslab`` command line: verify, spectrum, reduce and ossqm jobs from JSON configs.

Exit codes: 0 when every check passes, 1 on a numeric failure, 2 on a
config error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import __version__
from .config import (
    SCHEMA_ID,
    ConfigError,
    Job,
    apply_overrides,
    build_bundle,
    inject_fault,
    load_config,
    make_job,
    zeta_rho,
)
from .fock import StructureFunctionError
from .linalg_core import unitarity_defect
from .realizations import (
    ConstraintError,
    build_bosonized_a,
    build_bosonized_b,
    build_ossqm_khare,
    reduce_via_U4,
)
from .spectra import C3SpectrumParams, closed_form_spectrum_A, closed_form_spectrum_B, compare_levels, spectrum_of
from .superpotential import DiagonalPairError, SingularPointError, ossqm_constraint_residual
from .verify import all_passed, check_ossqm, check_psssqm, check_sec2, metric_for

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2

EMBED_TOL = 1e-6
U4_TOL = 1e-12
OFFDIAG_TOL = 1e-11
MATCH_TOL = 1e-12


def _write(payload: dict, out: str | None) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if out:
        p = Path(out)
        p.parent.mkdir(parents=True, exist_ok=True)
        p.write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _payload(command: str, job: Job, **body: Any) -> dict:
    return {"schema": SCHEMA_ID, "command": command, "realization": job.cfg["realization"], **body}


def _reports(reports) -> list[dict]:
    return [r.to_dict() for r in reports]


def _job(args) -> Job:
    cfg = apply_overrides(load_config(args.config), args.dim)
    return make_job(cfg)


def _budget(args, job: Job) -> float | None:
    return args.budget if args.budget is not None else job.cfg.get("budget")


# commands


def cmd_verify(args) -> int:
    job = _job(args)
    bundle = build_bundle(job)
    if "fault" in job.cfg:
        bundle = inject_fault(bundle, job.cfg["fault"])
    budget = _budget(args, job)
    reports = check_psssqm(bundle, budget)
    extra = {}
    if job.name == "sec2_charges":
        from .realizations import build_sec2_charges

        s = build_sec2_charges(job.space, float(job.cfg.get("omega", 1.0)))
        sec2 = check_sec2(s.Q1, s.Q2, s.H, job.margin, budget=budget)
        extra["sec2_reports"] = _reports(sec2)
        reports = reports + sec2
    ok = all_passed(reports)
    _write(_payload("verify", job, reports=_reports(reports[:6] if extra else reports), passed=ok, **extra),
           args.out)
    return EXIT_OK if ok else EXIT_FAIL


def _closed_form(job: Job, n_slots: int):
    F = job.space.F
    if F.kind == "custom_table":
        raise ConfigError("closed-form spectra need a standard or c3 structure function")
    k_max = math.ceil(n_slots / 3)
    cfg = job.cfg
    from .fock import Modulation

    if job.name == "bosonized_a":
        p = C3SpectrumParams(F.alpha0, F.alpha1, job.index, k_max,
                             f=Modulation.from_config(cfg["f"]), h3bar=Modulation.from_config(cfg["h3bar"]))
        return closed_form_spectrum_A(p).first(n_slots)
    p = C3SpectrumParams(F.alpha0, F.alpha1, job.index, k_max,
                         f1=Modulation.from_config(cfg["f1"]), f2=Modulation.from_config(cfg["f2"]),
                         boundary=cfg.get("boundary", "continued"))
    return closed_form_spectrum_B(p).first(n_slots)


def cmd_spectrum(args) -> int:
    job = _job(args)
    bundle = build_bundle(job)
    opts = job.cfg.get("spectrum", {})
    report = spectrum_of(bundle, opts.get("margin"), opts.get("e_max"), opts.get("cluster_tol"),
                         opts.get("n_levels"))
    ok = True
    if args.closed_form:
        tol = float(job.cfg.get("closed_form_tol", 1e-10))
        if job.name in ("bosonized_a", "bosonized_b"):
            cf = _closed_form(job, report.eigenvalues.size)
            compare_levels(report, cf.energies, tol, cf.formula_mask)
        elif "expected_levels" in job.cfg:
            exp = [lv["energy"] for lv in job.cfg["expected_levels"] for _ in range(lv["multiplicity"])]
            exp_levels = [(lv["energy"], lv["multiplicity"]) for lv in job.cfg["expected_levels"]]
            c = compare_levels(report, exp, tol)
            got = report.levels[:len(exp_levels)]
            c.passed = c.passed and [m for _, m in got] == [m for _, m in exp_levels]
        else:
            raise ConfigError("--closed-form needs a bosonized realization or expected_levels in the config")
        ok = report.comparison.passed
    if args.csv:
        p = Path(args.csv)
        p.parent.mkdir(parents=True, exist_ok=True)
        p.write_text(report.to_csv(), encoding="utf-8")
    _write(_payload("spectrum", job, spectrum=report.to_dict(), passed=ok), args.out)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_reduce(args) -> int:
    job = _job(args)
    if job.name not in ("gdoa_a", "gdoa_b"):
        raise ConfigError("reduce needs a gdoa_a or gdoa_b realization")
    bundle = build_bundle(job)
    budget = _budget(args, job)
    red = reduce_via_U4(bundle)
    u4_dev = unitarity_defect(red.U4.full())
    comps, matches = [], []
    for mu, comp in enumerate(red.components):
        if job.name == "gdoa_a":
            direct = build_bosonized_a(job.space, bundle.meta["f"], bundle.meta["h3bar"], bundle.c, mu, job.margin)
        else:
            direct = build_bosonized_b(job.space, bundle.meta["f1"], bundle.meta["f2"], bundle.c, mu,
                                       job.margin, bundle.meta["boundary"])
        dev = max(float(np.max(np.abs(getattr(comp, k).full() - getattr(direct, k).full())))
                  for k in ("Q", "Q_dag", "H"))
        matches.append(dev)
        comps.append({"mu": mu, "reports": _reports(check_psssqm(comp, budget)), "direct_match": dev})
    ok = (u4_dev <= U4_TOL and red.offdiag_norm <= OFFDIAG_TOL and max(matches) <= MATCH_TOL
          and all(r["pass"] for c in comps for r in c["reports"]))
    _write(_payload("reduce", job, u4_unitarity_defect=u4_dev, offdiag_norm=red.offdiag_norm,
                    components=comps, passed=ok), args.out)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_ossqm(args) -> int:
    job = _job(args)
    if job.name not in ("ossqm_khare", "superpotential"):
        raise ConfigError("ossqm needs an ossqm_khare or superpotential realization")
    bundle = build_bundle(job)
    budget = _budget(args, job)
    W1, W2 = job.extras["W1"], job.extras["W2"]
    sp = job.extras["position_space"]
    spec = job.extras["pair_spec"]
    x = sp.nodes
    constraint = ossqm_constraint_residual(W1, W2, x)
    if spec is not None:
        C = spec.C
    else:
        w1, d1, _ = W1.evaluate(x)
        w2, d2, _ = W2.evaluate(x)
        C = float(np.mean(w1**2 + d1 - w2**2 - d2))
    h4_zero = bundle.meta["h4_max"] <= EMBED_TOL
    c_zero = constraint <= EMBED_TOL
    reasons = []
    if not h4_zero:
        reasons.append("H4 ≠ 0")
    if not c_zero:
        reasons.append("C ≠ 0")
    body: dict[str, Any] = {
        "constraint_residual": constraint,
        "C": C,
        "H4_max": bundle.meta["h4_max"],
        "psssqm_reports": _reports(check_psssqm(bundle, budget)),
    }
    ok = all(r["pass"] for r in body["psssqm_reports"])
    if c_zero:
        zeta, rho = zeta_rho(job.cfg)
        k = build_ossqm_khare(W1, W2, sp, bundle.c, zeta, rho, job.margin)
        metric = metric_for(k.tilde, budget)
        oss = check_ossqm(k.QK, k.HK, metric)
        pmetric = metric_for(bundle, budget)
        mapping = []
        for name in ("Q", "Q_dag", "H"):
            A, B = getattr(k.mapped, name), getattr(bundle, name)
            terms = [(1.0, [A]), (-1.0, [B])]
            r, b = pmetric.residual(terms), pmetric.budget(terms)
            mapping.append({"operator": name, "residual": r, "budget": b, "pass": bool(r <= b)})
        body.update(ossqm_reports=_reports(oss), mapping=mapping,
                    mapped_psssqm_reports=_reports(check_psssqm(k.mapped, budget)))
        ok = ok and all_passed(oss) and all(m["pass"] for m in mapping)
        ok = ok and all(r["pass"] for r in body["mapped_psssqm_reports"])
    embedding = h4_zero and c_zero
    body["embedding"] = {"embeds": embedding, "reasons": reasons}
    if "expect_embedding" in job.cfg and job.cfg["expect_embedding"] != embedding:
        ok = False
    _write(_payload("ossqm", job, passed=ok, **body), args.out)
    return EXIT_OK if ok else EXIT_FAIL


COMMANDS = {"verify": cmd_verify, "spectrum": cmd_spectrum, "reduce": cmd_reduce, "ossqm": cmd_ossqm}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="psslab",
        description="Build pseudosupersymmetric realizations and check their algebra and spectra.",
    )
    parser.add_argument("--version", action="version", version=f"psslab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in (
        ("verify", "check the defining relations of a realization"),
        ("spectrum", "cluster the spectrum, optionally against closed forms"),
        ("reduce", "reduce a GDOA realization with U4 and verify each component"),
        ("ossqm", "check the orthosupersymmetric realization and the embedding conditions"),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--config", required=True, help="JSON job config")
        p.add_argument("--dim", type=int, help="override Fock dimension or grid points")
        p.add_argument("--out", help="write the JSON report here instead of stdout")
        p.add_argument("--budget", type=float, help="override the residual budget")
        if name == "spectrum":
            p.add_argument("--csv", help="also write the level table as CSV")
            p.add_argument("--closed-form", action="store_true", help="compare with the closed form")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, StructureFunctionError, SingularPointError, ConstraintError) as exc:
        print(f"psslab: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DiagonalPairError as exc:
        print(f"psslab: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
