"""Command pipelines, verdicts and deterministic report serialization."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from .bounds import (
    BoundCert, NegativeLog, kadec_bounds, lindner_log_lower_bound, tensor_bounds, transform_bounds,
)
from .config import RunConfig, parse_number
from .construct import (
    ConditionReport, PerturbedSequence, avdonin_condition_check, bailey_condition_check,
    kadec_condition_check, lifted_rule, rectangular_rule, rounded_dual_rule,
    spectral_norm_threshold,
)
from .decomp import (
    Witness, check_witness, find_witness_heuristic, orthogonal_volume_obstruction,
)
from .errors import ConfigError, NormTooLarge, ParalatticeError
from .lattice import (
    BeattyRule, FreqSet, FrequencyRule, LatticeRule, cube_vertices, density_estimate, index_box,
    round_half_up,
)
from .linalg import as_matrix, classify_matrix, det, inv_transpose, spectral_norm
from .verify import (
    GRAM_SIZE_CAP, equidistribution_check, max_offdiagonal, truncation_ladder,
)

VERDICTS = ("certified-orthogonal", "certified-riesz-by-theorem", "evidence-only", "rejected", "unknown")
SUCCESS = frozenset(VERDICTS[:3])

DEFAULT_LADDER = {1: [50, 100, 200], 2: [5, 10, 20], 3: [2, 3, 4]}
DENSITY_TARGET = {1: 2.0e4, 2: 4.0e4, 3: 1.0e5}
ORTHOGONALITY_SIZE = 2000


# --- serialization ---------------------------------------------------------


def _float_text(x: float) -> str:
    if math.isnan(x):
        return '"NaN"'
    if math.isinf(x):
        return '"Infinity"' if x > 0 else '"-Infinity"'
    s = format(x, ".17g")
    if not any(c in s for c in ".en"):
        s += ".0"
    return s


def _plain(obj):
    """Convert numpy scalars/arrays and tuples to plain JSON-able Python."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, Fraction)):
        return float(obj)
    if isinstance(obj, NegativeLog):
        return {"value": obj.value, "log_t": obj.t, "decimal": obj.decimal()}
    return obj


def _write(obj, indent: str, step: str, out: list) -> None:
    if obj is None:
        out.append("null")
    elif obj is True:
        out.append("true")
    elif obj is False:
        out.append("false")
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        out.append(_float_text(obj))
    elif isinstance(obj, str):
        out.append(json.dumps(obj, ensure_ascii=False))
    elif isinstance(obj, list):
        if not obj:
            out.append("[]")
        elif all(not isinstance(v, (list, dict)) for v in obj):
            parts: list[str] = []
            for v in obj:
                buf: list[str] = []
                _write(v, "", "", buf)
                parts.append("".join(buf))
            out.append("[" + ", ".join(parts) + "]")
        else:
            inner = indent + step
            out.append("[\n")
            for i, v in enumerate(obj):
                out.append(inner)
                _write(v, inner, step, out)
                out.append(",\n" if i + 1 < len(obj) else "\n")
            out.append(indent + "]")
    elif isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        inner = indent + step
        out.append("{\n")
        items = list(obj.items())
        for i, (k, v) in enumerate(items):
            out.append(f"{inner}{json.dumps(k)}: ")
            _write(v, inner, step, out)
            out.append(",\n" if i + 1 < len(items) else "\n")
        out.append(indent + "}")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj) -> str:
    """Deterministic JSON: insertion-ordered keys, floats at 17 significant digits."""
    out: list[str] = []
    _write(_plain(obj), "", "  ", out)
    return "".join(out) + "\n"


# --- report ----------------------------------------------------------------


@dataclass
class Report:
    command: str
    config: dict
    verdict: str = "unknown"
    theorem: str | None = None
    witness: dict | None = None
    conditions: list[ConditionReport] = field(default_factory=list)
    bounds: list[dict] = field(default_factory=list)
    frequency_set: dict | None = None
    gram: dict | None = None
    density: dict | None = None
    checks: dict = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)
    errors: list[dict] = field(default_factory=list)

    def conclude(self, verdict: str, theorem: str | None = None) -> None:
        if verdict not in VERDICTS:
            raise ValueError(f"unknown verdict {verdict!r}")
        self.verdict = verdict
        if theorem is not None:
            self.theorem = theorem

    @property
    def exit_code(self) -> int:
        return 0 if self.verdict in SUCCESS else 1

    def to_json(self) -> dict:
        return {
            "command": self.command,
            "verdict": self.verdict,
            "theorem": self.theorem,
            "witness": self.witness,
            "conditions": [c.to_json() for c in self.conditions],
            "bounds": self.bounds,
            "frequency_set": self.frequency_set,
            "gram": self.gram,
            "density": self.density,
            "checks": self.checks,
            "notes": self.notes,
            "errors": self.errors,
            "config": self.config,
        }

    def dumps(self) -> str:
        return dumps(self.to_json())


# --- shared helpers --------------------------------------------------------


def _require(value, path: str, command: str):
    if value is None:
        raise ConfigError(path, f"required for {command!r}")
    return value


def _matrices(cfg: RunConfig):
    A = _require(cfg.A, "A", cfg.command)
    A = as_matrix(A)
    B = np.eye(A.shape[0]) if cfg.B is None else as_matrix(cfg.B)
    return A, B


def _witness(cfg: RunConfig) -> Witness:
    w = cfg.witness
    d = len(w.H)
    return Witness(w.R, w.H, w.P if w.P is not None else list(range(d)), w.mode or cfg.mode)


def _freqset_json(fs: FreqSet) -> dict:
    out = fs.to_json()
    out["size"] = len(fs)
    if fs.dim == 2 and fs.is_integer:
        rows: dict[int, list[int]] = {}
        for x, j in fs.points.tolist():
            rows.setdefault(j, []).append(x)
        out["rows"] = [{"j": j, "x": sorted(rows[j])} for j in sorted(rows)]
    return out


def _ladder_radii(cfg: RunConfig, d: int) -> list[int]:
    return list(cfg.ladder_radii) if cfg.ladder_radii else DEFAULT_LADDER.get(d, [1, 2])


def _density_radii(cfg: RunConfig, volume: float, d: int) -> list[float]:
    if cfg.density_radii:
        return list(cfg.density_radii)
    r = 0.5 * (DENSITY_TARGET.get(d, 1.0e5) / volume) ** (1.0 / d)
    return [0.5 * r, r]


def _numerics(rep: Report, cfg: RunConfig, A: np.ndarray, rule: FrequencyRule) -> bool:
    """Truncation ladder and density check; returns True when both look healthy."""
    d = A.shape[0]
    vol = abs(det(A))
    gram = truncation_ladder(A, rule, _ladder_radii(cfg, d), cfg.normalized,
                             interlace_tol=cfg.tolerances.interlace)
    rep.gram = gram.to_json()
    dens = density_estimate(rule, _density_radii(cfg, vol, d))
    rep.density = {**dens.to_json(), "expected": vol}
    gap = abs(dens.extrapolated - vol)
    allowed = cfg.tolerances.density * vol
    density_ok = gap <= allowed
    rep.conditions.append(ConditionReport(
        "landau-density", density_ok, allowed - gap,
        {"estimate": dens.extrapolated, "expected": vol, "rtol": cfg.tolerances.density},
        dens.counts[-1]))
    ladder_ok = not gram.numerical_failure and gram.floor > 0
    rep.checks["ladder_healthy"] = ladder_ok
    rep.checks["density_consistent"] = density_ok
    if not ladder_ok:
        rep.notes.append("truncation ladder shows a numerical failure or a non-positive floor")
    if not density_ok:
        rep.notes.append("density estimate differs from the domain volume beyond tolerance")
    return ladder_ok and density_ok


def _orthogonality(rep: Report, cfg: RunConfig, A: np.ndarray, rule: FrequencyRule) -> bool:
    d = A.shape[0]
    N = min(cfg.construction.N, int((ORTHOGONALITY_SIZE ** (1.0 / d) - 1) // 2))
    gamma = rule.generate(N)
    off = max_offdiagonal(A, gamma)
    vol = abs(det(A))
    ok = off <= cfg.tolerances.orthogonality * vol
    rep.checks["orthogonality"] = {"N": N, "size": len(gamma), "max_offdiagonal": off,
                                   "volume": vol, "passed": ok}
    if not ok:
        rep.notes.append("Gram matrix is not a multiple of the identity")
    return ok


# --- construction resolution -----------------------------------------------


@dataclass
class Resolved:
    rule: FrequencyRule
    domain: np.ndarray
    kind: str  # "orthogonal", "riesz" or "none" (no theorem behind it)
    theorem: str | None
    bailey: tuple | None = None  # (inner rule, matrix) for the norm-rounding tube check


def _norm_rounding(rep: Report, A, B, *, explicit: bool) -> Resolved:
    M = B.T @ A
    d = A.shape[0]
    norm = spectral_norm(M)
    threshold = spectral_norm_threshold(d)
    ok = norm < threshold
    rep.conditions.append(ConditionReport(
        "spectral-norm", ok, threshold - norm, {"norm": norm, "threshold": threshold, "d": d}, 1,
        qualifier="exact"))
    if not ok:
        raise NormTooLarge(norm, threshold)
    inner = LatticeRule(inv_transpose(M), rounded=True, provenance="spectral-norm")
    rule = inner if np.array_equal(B, np.eye(d)) else lifted_rule(inner, np.eye(d), B)
    return Resolved(rule, A, "riesz", "spectral-norm-rounding", (inner, M))


def _lower_triangular(H, tol) -> bool:
    c = classify_matrix(H, tol)
    return c.is_lower_triangular and c.diag_in_unit_interval


def resolve_construction(cfg: RunConfig, rep: Report) -> Resolved:
    """Frequency rule named by ``construction.rule`` plus the domain it is claimed for."""
    c = cfg.construction
    tol = cfg.tolerances.num
    rule = c.rule
    if rule == "beatty":
        alpha = parse_number(_require(c.alpha, "construction.alpha", cfg.command), exact=True)
        beta = parse_number(c.beta, exact=True)
        return Resolved(BeattyRule(alpha, beta), np.array([[float(alpha)]]), "riesz", "beatty-fraenkel")
    if rule == "rectangular" and cfg.A is None and c.diagonals is not None:
        diag = c.diagonals
        return Resolved(rectangular_rule(diag, c.offsets), np.diag(diag), "riesz", "rectangular-rounding")
    A, B = _matrices(cfg)
    d = A.shape[0]
    if rule == "integer":
        fs_rule = LatticeRule(np.eye(d), provenance="explicit")
        if np.allclose(A, np.eye(d), atol=tol):
            return Resolved(fs_rule, A, "orthogonal", "integer-lattice")
        return Resolved(fs_rule, A, "none", None)
    if rule == "dual-lattice":
        return Resolved(LatticeRule(inv_transpose(A), provenance="explicit"), A, "orthogonal",
                        "dual-lattice-orthogonality")
    if rule == "spectral-norm":
        return _norm_rounding(rep, A, B, explicit=True)
    if cfg.witness is not None:
        w = _witness(cfg)
        wr = check_witness(A, B, w, tol)
        rep.witness = {**w.to_json(), **wr.to_json(), "source": "given"}
        if not wr.accepted:
            raise ParalatticeError("witness rejected: " + ", ".join(wr.failures))
        inner = (rectangular_rule(np.diag(w.H), c.offsets) if rule == "rectangular"
                 else rounded_dual_rule(w.H, tol))
        return Resolved(lifted_rule(inner, w.R, B), A, "riesz", "lower-triangular-decomposition")
    M = B.T @ A
    if rule == "auto" and not _lower_triangular(M, tol):
        return _norm_rounding(rep, A, B, explicit=False)
    inner = (rectangular_rule(c.diagonals or np.diag(M), c.offsets) if rule == "rectangular"
             else rounded_dual_rule(M, tol))
    rule_obj = inner if np.array_equal(B, np.eye(d)) else lifted_rule(inner, np.eye(d), B)
    tag = "rectangular-rounding" if rule == "rectangular" else "lower-triangular-rounding"
    return Resolved(rule_obj, A, "riesz", tag)


_KIND_VERDICT = {"orthogonal": "certified-orthogonal", "riesz": "certified-riesz-by-theorem"}


# --- commands --------------------------------------------------------------


def _construct(cfg: RunConfig, rep: Report) -> None:
    res = resolve_construction(cfg, rep)
    rep.frequency_set = _freqset_json(res.rule.generate(cfg.construction.N))
    if res.bailey is not None:
        _bailey(rep, cfg, *res.bailey)
    if res.kind == "none":
        rep.conclude("evidence-only")
        rep.notes.append("no theorem covers this rule on the given domain")
    else:
        rep.conclude(_KIND_VERDICT[res.kind], res.theorem)


def _verify(cfg: RunConfig, rep: Report) -> None:
    res = resolve_construction(cfg, rep)
    rep.theorem = res.theorem
    ok = _numerics(rep, cfg, res.domain, res.rule)
    if res.kind == "orthogonal":
        ok = _orthogonality(rep, cfg, res.domain, res.rule) and ok
    rep.conclude("evidence-only" if ok else "unknown")


def _bailey(rep: Report, cfg: RunConfig, inner: FrequencyRule, M: np.ndarray) -> None:
    d = M.shape[0]
    fam = PerturbedSequence.from_freqset(inner.generate(cfg.construction.N))
    L = spectral_norm(M) * math.sqrt(d) / 2.0 + 1e-12
    rep.conditions.append(bailey_condition_check(fam, M, L))


def _certify_norm(cfg: RunConfig, rep: Report, A, B, *, explicit: bool) -> None:
    try:
        res = _norm_rounding(rep, A, B, explicit=explicit)
    except NormTooLarge as exc:
        rep.errors.append({"type": "NormTooLarge", "message": str(exc)})
        if explicit:
            rep.conclude("rejected", "spectral-norm-rounding")
        else:
            rep.conclude("unknown")
            rep.notes.append("no decomposition witness found and the norm condition fails")
        return
    _bailey(rep, cfg, *res.bailey)
    rep.frequency_set = _freqset_json(res.rule.generate(cfg.construction.N))
    _numerics(rep, cfg, A, res.rule)
    rep.conclude("certified-riesz-by-theorem", res.theorem)


def _find_witness(cfg: RunConfig, rep: Report, A, B):
    """Witness stage shared by ``certify`` and ``decompose``.

    Returns ``(witness, status)`` with status ``accepted``, ``rejected`` or
    ``not-found``.
    """
    mode, tol = cfg.mode, cfg.tolerances.num
    if cfg.witness is not None:
        w = _witness(cfg)
        wr = check_witness(A, B, w, tol)
        rep.witness = {**w.to_json(), **wr.to_json(), "source": "given"}
        return w, ("accepted" if wr.accepted else "rejected")
    if mode == "orthogonal" and orthogonal_volume_obstruction(A, B, tol):
        rep.witness = {"source": "heuristic", "found": False, "obstruction": "volume"}
        rep.notes.append("1/|det(B^T A)| is not an integer, so no unitriangular witness exists")
        return None, "rejected"
    w = find_witness_heuristic(A, B, mode, tol)
    if w is None:
        rep.witness = {"source": "heuristic", "found": False}
        return None, "not-found"
    wr = check_witness(A, B, w, tol)
    rep.witness = {**w.to_json(), **wr.to_json(), "source": "heuristic", "found": True}
    return w, ("accepted" if wr.accepted else "not-found")


_MODE_THEOREM = {"orthogonal": "unitriangular-decomposition", "riesz": "lower-triangular-decomposition"}


def _decompose(cfg: RunConfig, rep: Report) -> None:
    A, B = _matrices(cfg)
    _, status = _find_witness(cfg, rep, A, B)
    tag = _MODE_THEOREM[cfg.mode]
    if status == "accepted":
        rep.conclude(_KIND_VERDICT[cfg.mode], tag)
    elif status == "rejected":
        rep.conclude("rejected", tag)
    else:
        rep.conclude("unknown")
        rep.notes.append("bounded witness search failed; this does not rule out a witness")


def _certify(cfg: RunConfig, rep: Report) -> None:
    A, B = _matrices(cfg)
    d = A.shape[0]
    if cfg.construction.rule == "spectral-norm":
        if cfg.mode == "orthogonal":
            raise ConfigError("construction.rule", "the norm-rounding path only yields Riesz bases")
        _certify_norm(cfg, rep, A, B, explicit=True)
        return
    w, status = _find_witness(cfg, rep, A, B)
    tag = _MODE_THEOREM[cfg.mode]
    if status == "rejected":
        rep.conclude("rejected", tag)
        return
    if status == "not-found":
        if cfg.mode == "orthogonal":
            rep.conclude("unknown")
            rep.notes.append("bounded witness search failed; this does not rule out a witness")
            return
        rep.notes.append("no lower triangular witness found; trying the norm-rounding path")
        _certify_norm(cfg, rep, A, B, explicit=False)
        return
    if cfg.mode == "orthogonal":
        rule = lifted_rule(LatticeRule(np.eye(d)), w.R, B)
        rep.frequency_set = _freqset_json(rule.generate(cfg.construction.N))
        _orthogonality(rep, cfg, A, rule)
        _numerics(rep, cfg, A, rule)
    else:
        inner = (rectangular_rule(np.diag(w.H), cfg.construction.offsets)
                 if cfg.construction.rule == "rectangular" else rounded_dual_rule(w.H, cfg.tolerances.num))
        rule = lifted_rule(inner, w.R, B)
        rep.frequency_set = _freqset_json(rule.generate(cfg.construction.N))
        _numerics(rep, cfg, A, rule)
    rep.conclude(_KIND_VERDICT[cfg.mode], tag)


def _bounds(cfg: RunConfig, rep: Report) -> None:
    b = cfg.bounds
    if b is None and cfg.equidistribution is None:
        raise ConfigError("bounds", "nothing to evaluate")
    certs: list[BoundCert] = []
    tags: list[str] = []
    failed = False
    if b is not None:
        if b.kadec is not None:
            _, cert = kadec_bounds(b.kadec)
            certs.append(cert)
            tags.append("kadec-quarter")
        if b.tensor is not None:
            certs.append(tensor_bounds(b.tensor))
            tags.append("tensor-kadec")
        if b.lindner is not None:
            p = b.lindner
            log_a = lindner_log_lower_bound(p.B, p.delta, p.L, p.P)
            rep.bounds.append({"source": "lindner", "log_lower": log_a,
                               "params": {"B": p.B, "delta": p.delta, "L": p.L, "P": p.P}})
            tags.append("lindner-mean-quarter")
        if b.sequence is not None:
            failed = not _sequence_bounds(b.sequence, rep, certs, tags)
        if b.transform is not None:
            if not certs:
                raise ConfigError("bounds.transform", "needs a preceding bound to transform")
            t = b.transform
            if t.op == "linear-map" and t.A is None:
                raise ConfigError("bounds.transform.A", "required for linear-map")
            certs.append(transform_bounds(certs[-1], t.op, t.A))
            tags.append(f"{tags[-1]}+{t.op}")
    for cert in certs:
        rep.bounds.append(cert.to_json())
    if failed:
        rep.conclude("rejected", tags[0] if tags else None)
    elif tags:
        rep.conclude("certified-riesz-by-theorem", tags[0])
    elif rep.checks.get("equidistribution", {}).get("satisfied"):
        rep.conclude("evidence-only", "equidistribution")
    else:
        rep.conclude("rejected", "equidistribution")


def _sequence_bounds(seq, rep: Report, certs: list, tags: list) -> bool:
    s = PerturbedSequence.around_integers(seq.values, seq.start)
    kad = kadec_condition_check(s)
    rep.conditions.append(kad)
    if kad.satisfied:
        certs.append(kadec_bounds(kad.parameters["L"])[1])
        tags.append("kadec-quarter")
        return True
    if seq.P is None:
        return False
    av = avdonin_condition_check(s, seq.P, seq.sep_min)
    rep.conditions.append(av)
    if not av.satisfied:
        return False
    Bp = float(np.max(np.abs(s.deltas)))
    log_a = lindner_log_lower_bound(Bp, av.parameters["min_gap"], av.parameters["L"], seq.P)
    rep.bounds.append({"source": "lindner", "log_lower": log_a,
                       "params": {"B": Bp, "delta": av.parameters["min_gap"],
                                  "L": av.parameters["L"], "P": seq.P}})
    tags.append("lindner-mean-quarter")
    return True


def _emit(cfg: RunConfig, rep: Report) -> None:
    rows = point_rows(cfg)
    rep.checks["emitted_rows"] = len(rows)
    rep.conclude("evidence-only")


_COMMANDS = {
    "construct": _construct,
    "verify": _verify,
    "certify": _certify,
    "decompose": _decompose,
    "bounds": _bounds,
    "emit-points": _emit,
}


def _equidistribution(cfg: RunConfig, rep: Report) -> None:
    e = cfg.equidistribution
    res = equidistribution_check(e.alpha, e.betas, e.P, e.m_range, e.epsilon)
    rep.checks["equidistribution"] = res.to_json()


def execute(cfg: RunConfig) -> Report:
    """Run one configured command.

    Configuration problems raise :class:`ConfigError`; every other library
    error is embedded in the report with verdict ``rejected``.
    """
    rep = Report(cfg.command, cfg.model_dump(mode="json"))
    try:
        if cfg.equidistribution is not None:
            _equidistribution(cfg, rep)
        _COMMANDS[cfg.command](cfg, rep)
    except ConfigError:
        raise
    except (ParalatticeError, ValueError) as exc:
        rep.errors.append({"type": type(exc).__name__, "message": str(exc)})
        rep.conclude("rejected")
    return rep


# --- plot points -----------------------------------------------------------


def point_rows(cfg: RunConfig) -> list[tuple]:
    """``(series, index, coords)`` rows in series order, lexicographic by index.

    ``lattice`` is ``A Z^d``, ``dual`` is ``A^{-T} Z^d``, ``rounded`` its
    image under the rounding map (one row per index, so collisions are
    visible) and ``vertices`` the corners ``A v`` for ``v in {0,1}^d``.
    """
    A = as_matrix(_require(cfg.A, "A", cfg.command))
    d = A.shape[0]
    N = cfg.construction.N
    idx = index_box(N, d)
    if len(idx) > GRAM_SIZE_CAP * 16:
        raise ConfigError("construction.N", f"{len(idx)} points per series is too many")
    dual = idx @ inv_transpose(A).T
    series = {
        "lattice": (idx, idx @ A.T),
        "dual": (idx, dual),
        "rounded": (idx, round_half_up(dual)),
        "vertices": (np.array(list(np.ndindex(*([2] * d)))), cube_vertices(A)),
    }
    rows = []
    for name in cfg.series:
        ids, pts = series[name]
        for n, x in zip(ids.tolist(), pts.tolist()):
            rows.append((name, tuple(n), tuple(x)))
    return rows


def emit_points(cfg: RunConfig, target: str | Path) -> int:
    """Write the plot-point CSV; returns the number of data rows."""
    rows = point_rows(cfg)
    d = len(cfg.A)
    with open(target, "w", newline="", encoding="utf-8") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(["series"] + [f"n{k + 1}" for k in range(d)] + [f"x{k + 1}" for k in range(d)])
        for name, n, x in rows:
            out.writerow([name, *n, *(v if isinstance(v, int) else format(float(v), ".17g") for v in x)])
    return len(rows)
