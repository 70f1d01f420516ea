"""Stable serialization for lifts, matrices, spectra and sweep tables.

All JSON payloads carry "schema": "1" and are emitted with sorted keys so
identical inputs produce byte-identical output.  Rationals are decimal
strings "num/den" (plain integer string when the denominator is 1).
"""

from __future__ import annotations

import json
import struct
from fractions import Fraction
from typing import List, Optional, Sequence

import numpy as np

from .circlemap import PiecewiseLinearLift, build_lift
from .steptransfer import Eigenvalue, TransitionMatrix
from .surd import Surd

SCHEMA = "1"


class SchemaError(ValueError):
    """Malformed or unknown-keyed input document."""


def frac_str(x: Fraction) -> str:
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return "%d/%d" % (x.numerator, x.denominator)


def parse_frac(s) -> Fraction:
    if isinstance(s, int):
        return Fraction(s)
    if isinstance(s, str):
        try:
            return Fraction(s)
        except (ValueError, ZeroDivisionError) as e:
            raise SchemaError("bad rational %r: %s" % (s, e))
    raise SchemaError("rational must be a string 'num/den', got %r" % (s,))


def lift_to_json(lift: PiecewiseLinearLift) -> str:
    doc = {
        "schema": SCHEMA,
        "p": lift.p,
        "breaks": [frac_str(b) for b in lift.breaks],
        "slopes": [frac_str(s) for s in lift.slopes],
    }
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def lift_from_json(text: str) -> PiecewiseLinearLift:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise SchemaError("invalid JSON: %s" % e)
    if not isinstance(doc, dict):
        raise SchemaError("lift document must be an object")
    allowed = {"schema", "p", "breaks", "slopes"}
    unknown = set(doc) - allowed
    if unknown:
        raise SchemaError("unknown keys: %s" % ", ".join(sorted(unknown)))
    for key in ("p", "breaks", "slopes"):
        if key not in doc:
            raise SchemaError("missing key %r" % key)
    if not isinstance(doc["p"], int):
        raise SchemaError("p must be an integer")
    breaks = [parse_frac(b) for b in doc["breaks"]]
    slopes = [parse_frac(s) for s in doc["slopes"]]
    return build_lift(doc["p"], breaks, slopes)


def matrix_to_csv(M: TransitionMatrix) -> str:
    lines = [",".join(frac_str(v) for v in row) for row in M.rows]
    return "\n".join(lines) + "\n"


def eigenvalues_to_json(eigs: Sequence[Eigenvalue], extra: dict = None) -> str:
    recs = []
    for e in eigs:
        rec = {"re": float(np.real(complex(e.value))),
               "im": float(np.imag(complex(e.value))),
               "mult": e.multiplicity}
        s = e.exact_str()
        if s is not None:
            rec["exact"] = s
        if e.residual:
            rec["residual"] = e.residual
        recs.append(rec)
    doc = {"schema": SCHEMA, "eigenvalues": recs}
    if extra:
        doc.update(extra)
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def ly_report_to_json(consts, checks, seed: Optional[int] = None,
                      extra: dict = None) -> str:
    doc = {
        "schema": SCHEMA,
        "kappa": consts.kappa,
        "M": consts.M,
        "lambda": frac_str(consts.lam),
        "D": frac_str(consts.D),
        "D_float": float(consts.D),
        "D_list": [frac_str(d) for d in consts.D_list],
        "F": consts.F,
        "sup_g": [frac_str(s) for s in consts.sup_g],
        "checks": [{"n": c.n, "lhs": c.lhs, "rhs": c.rhs,
                    "slack": c.slack, "exact": c.exact} for c in checks],
    }
    if seed is not None:
        doc["seed"] = seed
    if extra:
        doc.update(extra)
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def spectrum_report_to_json(report, seed: Optional[int] = None) -> str:
    doc = {
        "schema": SCHEMA,
        "delta": report.delta,
        "N": report.N,
        "assembly_residual": report.assembly_residual,
        "eigenvalues": [{"re": r.value.real, "im": r.value.imag,
                         "abs": r.modulus, "residual": r.residual,
                         "converged": r.converged}
                        for r in report.eigenvalues],
        "lambda_delta": {"re": report.lambda_delta.real,
                         "im": report.lambda_delta.imag,
                         "abs": abs(report.lambda_delta)},
        "gap": report.gap,
        "n_outside": report.n_outside,
        "two_outside": report.two_outside,
        "ess_radius_bound": report.ess_bound,
    }
    if report.decay is not None:
        doc["decay"] = {"rho_hat": report.decay.rho_hat,
                        "fit_r2": report.decay.fit_r2,
                        "n_used": report.decay.n_used}
    if seed is not None:
        doc["seed"] = seed
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def sweep_to_csv(rows) -> str:
    out = ["delta,re,im,abs,gap,ess_bound,N_used,converged,identified"]
    for r in rows:
        out.append("%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d,%d,%d" % (
            r.delta, r.lam.real, r.lam.imag, r.modulus, r.gap,
            r.ess_bound, r.N_used, int(r.converged), int(r.identified)))
    return "\n".join(out) + "\n"


def sweep_to_json(rows, extra: dict = None) -> str:
    doc = {
        "schema": SCHEMA,
        "rows": [{"delta": r.delta, "re": r.lam.real, "im": r.lam.imag,
                  "abs": r.modulus, "gap": r.gap, "ess_bound": r.ess_bound,
                  "N_used": r.N_used, "converged": r.converged,
                  "identified": r.identified}
                 for r in rows],
    }
    if extra:
        doc.update(extra)
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def approx_to_json(entries, seed: Optional[int] = None) -> str:
    doc = {
        "schema": SCHEMA,
        "rows": [{"delta": a.delta, "label": label, "lhs": a.lhs,
                  "rhs": a.rhs, "norm3": a.norm3, "C0": a.C0,
                  "passed": a.passed}
                 for label, a in entries],
    }
    if seed is not None:
        doc["seed"] = seed
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def approx_to_csv(entries) -> str:
    out = ["label,delta,lhs,rhs,norm3,C0,passed"]
    for label, a in entries:
        out.append("%s,%.17g,%.17g,%.17g,%.17g,%.17g,%d" % (
            label, a.delta, a.lhs, a.rhs, a.norm3, a.C0, int(a.passed)))
    return "\n".join(out) + "\n"


# Binary mode-coefficient dump: header <i d d d> = (N, delta, re target,
# im target), then N little-endian float64 pairs (re, im) in mode order
# n = -K..K.

_COEFF_HEADER = struct.Struct("<iddd")


def coeffs_dump(path: str, delta: float, target: complex,
                coeffs: np.ndarray) -> None:
    coeffs = np.asarray(coeffs, dtype=complex)
    n = coeffs.size
    inter = np.empty(2 * n, dtype="<f8")
    inter[0::2] = coeffs.real
    inter[1::2] = coeffs.imag
    with open(path, "wb") as fh:
        fh.write(_COEFF_HEADER.pack(n, float(delta),
                                    float(np.real(target)),
                                    float(np.imag(target))))
        fh.write(inter.tobytes())


def coeffs_load(path: str):
    with open(path, "rb") as fh:
        head = fh.read(_COEFF_HEADER.size)
        if len(head) != _COEFF_HEADER.size:
            raise SchemaError("coefficient dump truncated: short header")
        n, delta, tre, tim = _COEFF_HEADER.unpack(head)
        if n <= 0:
            raise SchemaError("coefficient dump has non-positive length %d" % n)
        raw = fh.read(16 * n)
    if len(raw) != 16 * n:
        raise SchemaError("coefficient dump truncated: expected %d modes" % n)
    data = np.frombuffer(raw, dtype="<f8")
    coeffs = data[0::2] + 1j * data[1::2]
    return coeffs, delta, complex(tre, tim)
