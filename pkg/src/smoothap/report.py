"""Equidistribution reports: assembly, canonical JSON, and CSV tables."""

from __future__ import annotations

import csv
import io
import json
import math
import random
from dataclasses import asdict, dataclass

import numpy as np

from .characters import CharacterGroup
from .distance import DEFAULT_B, flag_problem_characters
from .errors import CapacityError, DomainError, InvariantError
from .mellin import MellinEvaluator, SmoothWeight, central_segment, contour_psi
from .primes import build_prime_table, psi_weighted_exact, residue_histogram
from .saddle import ht_estimate, saddle_data, saddle_residual

RECONSTRUCTION_TOL = 1e-6
MAX_SPECTRUM = 10_000
SECTIONS = ("config", "saddle", "counts", "spectrum", "problem_set", "checks")


@dataclass(frozen=True)
class RunConfig:
    x: float
    y: float
    q: int
    epsilon: float = 0.05
    side: str = "lower"
    B: int = DEFAULT_B
    threshold_scale: float = 1.0
    U: float | None = None
    output_format: str = "json"
    seed: int = 0
    T: float | None = None
    char: str | None = None

    def validate(self) -> "RunConfig":
        if not self.x > 1:
            raise DomainError(f"x must exceed 1, got {self.x}")
        if not self.y >= 2:
            raise DomainError(f"y must be >= 2, got {self.y}")
        if self.q < 1:
            raise DomainError(f"q must be >= 1, got {self.q}")
        if not 0 < self.epsilon < 0.5:
            raise DomainError(f"epsilon must lie in (0, 1/2), got {self.epsilon}")
        if self.side not in ("lower", "upper"):
            raise DomainError(f"side must be lower or upper, got {self.side}")
        if self.B < 1:
            raise DomainError("B must be >= 1")
        if not self.threshold_scale > 0:
            raise DomainError("threshold scale must be positive")
        if self.output_format not in ("json", "csv"):
            raise DomainError(f"format must be json or csv, got {self.output_format}")
        if self.U is not None and not self.U >= 1:
            raise DomainError("U must be >= 1")
        if self.T is not None and not self.T >= 0:
            raise DomainError("T must be nonnegative")
        return self

    @property
    def u(self) -> float:
        return math.log(self.x) / math.log(self.y)

    @property
    def central_U(self) -> float:
        """U for the central segment: 1/sqrt(epsilon) unless set, kept in [1, sqrt(u)]."""
        U = self.U if self.U is not None else 1.0 / math.sqrt(self.epsilon)
        return min(max(U, 1.0), max(1.0, math.sqrt(self.u)))


class _Run:
    # Shared state for one report: prime table, character group, histogram.
    def __init__(self, config: RunConfig):
        self.config = config.validate()
        c = self.config
        self.table = build_prime_table(max(2, math.floor(c.y)))
        self.group = CharacterGroup(c.q)
        self._hist = None
        self._spectrum = None

    @property
    def hist(self) -> np.ndarray:
        if self._hist is None:
            c = self.config
            self._hist = residue_histogram(c.x, c.y, c.q, self.table)
        return self._hist

    def character_sums(self):
        """(characters, Psi(x, y; chi) for each) via the residue histogram."""
        if self._spectrum is None:
            g = self.group
            if g.phi > MAX_SPECTRUM:
                raise CapacityError(f"phi(q) = {g.phi} exceeds the spectrum budget {MAX_SPECTRUM}")
            units = g.reduced_residues
            h = self.hist[units].astype(np.float64)
            chars = g.characters()
            sums = [complex(np.dot(h, chi.values(units))) for chi in chars]
            self._spectrum = (chars, sums)
        return self._spectrum


def _counts_section(run: _Run) -> dict:
    g = run.group
    units = g.reduced_residues
    counts = run.hist[units]
    psi_q = int(counts.sum())
    normalized = counts * g.phi / psi_q
    rows = [
        {"residue": int(a), "count": int(c), "normalized": float(n), "deviation": float(n - 1.0)}
        for a, c, n in zip(units, counts, normalized)
    ]
    return {
        "phi_q": g.phi,
        "psi": int(run.hist.sum()),
        "psi_q": psi_q,
        "per_residue": rows,
        "discrepancy": float(np.max(np.abs(normalized - 1.0))),
    }


def _spectrum_section(run: _Run) -> list:
    chars, sums = run.character_sums()
    psi_q = sums[0].real
    rows = []
    for chi, v in zip(chars, sums):
        ratio = 1.0 if chi.is_principal else abs(v) / psi_q
        rows.append({"char_id": chi.id, "order": chi.order, "ratio": ratio,
                     "value": {"re": v.real, "im": v.imag}})
    head, rest = rows[0], rows[1:]
    rest.sort(key=lambda r: (-r["ratio"], r["char_id"]))
    return [head] + rest


def _reconstruction_check(run: _Run) -> dict:
    chars, sums = run.character_sums()
    g = run.group
    units = g.reduced_residues
    recon = np.zeros(len(units), dtype=np.complex128)
    for chi, v in zip(chars, sums):
        recon += np.conj(chi.values(units)) * v
    recon /= g.phi
    err = float(np.max(np.abs(recon - run.hist[units]))) if len(units) else 0.0
    return {"max_abs_error": err, "tolerance": RECONSTRUCTION_TOL, "passed": err <= RECONSTRUCTION_TOL}


def _multiplicativity_check(run: _Run, pairs=200) -> dict:
    rng = random.Random(run.config.seed)
    g = run.group
    chars = g.characters() if g.phi <= 64 else [g.character([rng.randrange(o) for o in g.orders])
                                                  for _ in range(64)]
    worst = 0.0
    for _ in range(pairs):
        chi = rng.choice(chars)
        m, n = rng.randrange(1, 10**6), rng.randrange(1, 10**6)
        worst = max(worst, abs(chi(m * n) - chi(m) * chi(n)))
    return {"pairs": pairs, "seed": run.config.seed, "max_abs_error": worst, "passed": worst <= 1e-9}


def proven_range(config: RunConfig) -> dict:
    """Where (x, y, q) sits relative to the ranges in which equidistribution is proven.

    The small parameter of the ranges is taken to be the weight epsilon.
    """
    x, y, q, eps = config.x, config.y, config.q, config.epsilon
    logx, logy = math.log(x), math.log(y)
    lly = math.log(logy) if logy > 1 else -math.inf
    lower = lly ** 4 * logy if lly > 0 else 0.0
    x_lower = logx >= lower
    x_upper = logx <= y ** (1.0 - eps)
    q_small = q <= y ** (4 * math.sqrt(math.e) - eps)
    return {
        "log_x_min": lower,
        "log_x_max": y ** (1.0 - eps),
        "x_in_range": bool(x_lower and x_upper),
        "q_max_equidistribution": y ** (4 * math.sqrt(math.e) - eps),
        "q_at_most_sqrt_y": q <= math.sqrt(y),
        "equidistribution_theorem_applies": bool(x_lower and x_upper and q_small),
        "subgroup_theorem_applies": bool(x_lower and x_upper),
    }


def _weighted_exact_or_none(run, chi, weight):
    c = run.config
    try:
        return psi_weighted_exact(c.x, c.y, chi, weight, run.table)
    except CapacityError:
        return None


def _saddle_section(run: _Run, *, with_contour=True) -> dict:
    c = run.config
    sd = saddle_data(c.x, c.y, run.table)
    weight = SmoothWeight(c.side, c.epsilon)
    ev = MellinEvaluator(weight)
    out = dict(sd.as_dict())
    out["residual"] = saddle_residual(sd.alpha, c.x, c.y, run.table)
    out["epsilon"] = c.epsilon
    out["side"] = c.side
    out["ht_estimate"] = ht_estimate(c.x, c.y, ev, run.table)
    out["ht_estimate_coprime"] = ht_estimate(c.x, c.y, ev, run.table, q=c.q) if c.q > 1 else out["ht_estimate"]
    if not with_contour:
        return out
    chi0 = run.group.principal()
    res = contour_psi(c.x, c.y, chi0, ev, c.T, run.table, alpha=sd.alpha)
    exact = _weighted_exact_or_none(run, chi0, weight)
    out["contour"] = {
        "char_id": chi0.id, "T": res.T,
        "value": {"re": res.value.real, "im": res.value.imag},
        "quad_error": res.quad_error, "tail_bound": res.tail_bound,
        "weighted_exact": None if exact is None else exact.real,
    }
    if sd.u >= 1:
        cs = central_segment(c.x, c.y, chi0, ev, c.central_U, run.table, alpha=sd.alpha)
        out["central_segment"] = {"U": c.central_U, "T": cs.T,
                                  "value": {"re": cs.value.real, "im": cs.value.imag},
                                  "quad_error": cs.quad_error}
    return out


def _problem_set_section(run: _Run) -> dict:
    c = run.config
    sd = saddle_data(c.x, c.y, run.table)
    ps = flag_problem_characters(run.group, sd.alpha, c.y, sd.u, c.B, run.table,
                                 threshold_scale=c.threshold_scale)
    hist = run.hist
    cosets = []
    worst_within = 0.0
    for coset in ps.cosets:
        counts = np.array([hist[a] for a in coset], dtype=np.float64)
        mean = float(counts.mean())
        spread = float(np.max(np.abs(counts - mean)))
        worst_within = max(worst_within, spread)
        cosets.append({
            "rep": coset[0], "residues": list(coset), "mean": mean, "max_deviation": spread,
            "rows": [{"residue": a, "count": int(hist[a]), "deviation": float(hist[a] - mean)}
                     for a in coset],
        })
    means = [cs["mean"] for cs in cosets]
    return {
        "method": "distance surrogate",
        "B": ps.B, "threshold": ps.threshold, "threshold_scale": c.threshold_scale,
        "alpha": sd.alpha, "u": sd.u,
        "flagged": [{"char_id": ch.id, "order": ch.order} for ch in ps.flagged],
        "tested": [{"char_id": r.chi.id, "order": r.order, "t_min": r.t_min, "d2_min": r.d2_min}
                   for r in ps.records],
        "H": list(ps.H), "index": ps.index, "index_bound": ps.B ** ps.B,
        "cosets": cosets,
        "within_coset_max_deviation": worst_within,
        "between_coset_mean_range": float(max(means) - min(means)),
    }


def _checks(run: _Run, counts: dict | None) -> dict:
    out = {"proven_range": proven_range(run.config)}
    if counts is not None:
        s = sum(r["normalized"] for r in counts["per_residue"])
        out["normalization"] = {"sum": s, "expected": counts["phi_q"],
                                "passed": abs(s - counts["phi_q"]) <= 1e-9 * counts["phi_q"]}
        out["partition"] = {"passed": counts["psi_q"] <= counts["psi"]
                            and counts["psi_q"] == sum(r["count"] for r in counts["per_residue"])}
    if run.group.phi <= MAX_SPECTRUM:
        rec = _reconstruction_check(run)
        out["reconstruction"] = rec
        if not rec["passed"]:
            raise InvariantError(f"character reconstruction off by {rec['max_abs_error']:.3g}")
    out["multiplicativity"] = _multiplicativity_check(run)
    return out


def _config_section(config: RunConfig) -> dict:
    d = asdict(config)
    d["U_effective"] = config.central_U
    return d


def _report(config, **sections) -> dict:
    out = {k: None for k in SECTIONS}
    out["config"] = _config_section(config)
    out.update(sections)
    return out


def cmd_psi(config: RunConfig) -> dict:
    run = _Run(config)
    counts = _counts_section(run)
    return _report(run.config, counts=counts, checks=_checks(run, counts))


def cmd_saddle(config: RunConfig) -> dict:
    run = _Run(config)
    return _report(run.config, saddle=_saddle_section(run, with_contour=False),
                   checks={"proven_range": proven_range(run.config)})


def cmd_contour(config: RunConfig) -> dict:
    run = _Run(config)
    c = run.config
    sd = saddle_data(c.x, c.y, run.table)
    chi = run.group.character_from_id(c.char) if c.char is not None else run.group.principal()
    weight = SmoothWeight(c.side, c.epsilon)
    ev = MellinEvaluator(weight)
    res = contour_psi(c.x, c.y, chi, ev, c.T, run.table, alpha=sd.alpha)
    exact = _weighted_exact_or_none(run, chi, weight)
    section = dict(sd.as_dict())
    section["contour"] = {
        "char_id": chi.id, "order": chi.order, "T": res.T,
        "value": {"re": res.value.real, "im": res.value.imag},
        "quad_error": res.quad_error, "tail_bound": res.tail_bound,
        "weighted_exact": None if exact is None else {"re": exact.real, "im": exact.imag},
    }
    if sd.u >= 1:
        cs = central_segment(c.x, c.y, chi, ev, c.central_U, run.table, alpha=sd.alpha)
        section["central_segment"] = {"U": c.central_U, "T": cs.T,
                                      "value": {"re": cs.value.real, "im": cs.value.imag},
                                      "quad_error": cs.quad_error}
    return _report(c, saddle=section, checks={"proven_range": proven_range(c)})


def cmd_spectrum(config: RunConfig) -> dict:
    run = _Run(config)
    return _report(run.config, spectrum=_spectrum_section(run), checks=_checks(run, None))


def cmd_equidist(config: RunConfig) -> dict:
    run = _Run(config)
    counts = _counts_section(run)
    return _report(
        run.config,
        saddle=_saddle_section(run),
        counts=counts,
        spectrum=_spectrum_section(run),
        problem_set=_problem_set_section(run),
        checks=_checks(run, counts),
    )


def cmd_subgroup(config: RunConfig) -> dict:
    run = _Run(config)
    counts = _counts_section(run)
    return _report(run.config, counts=counts, problem_set=_problem_set_section(run),
                   checks=_checks(run, counts))


COMMANDS = {
    "psi": cmd_psi,
    "saddle": cmd_saddle,
    "spectrum": cmd_spectrum,
    "equidist": cmd_equidist,
    "subgroup": cmd_subgroup,
    "contour": cmd_contour,
}


# -- serialization ---------------------------------------------------------

def format_float(v: float) -> str:
    """12 significant digits; scientific outside [1e-4, 1e6]."""
    if v == 0:
        return "0.0"
    a = abs(v)
    if 1e-4 <= a <= 1e6:
        s = f"{v:.12g}"
    else:
        s = f"{v:.11e}"
    if "." not in s and "e" not in s:
        s += ".0"
    return s


def _encode(obj) -> str:
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return format_float(v) if math.isfinite(v) else "null"
    if isinstance(obj, complex):
        return _encode({"re": obj.real, "im": obj.imag})
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        items = sorted(obj.items())
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_encode(v)}" for k, v in items) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_encode(v) for v in obj) + "]"
    raise TypeError(f"cannot encode {type(obj).__name__}")


def to_json(report: dict) -> str:
    """Canonical JSON: sorted keys, fixed float formatting, one line plus newline."""
    return _encode(report) + "\n"


def to_csv(command: str, report: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if command in ("equidist", "psi"):
        w.writerow(["residue", "count", "normalized", "deviation"])
        for r in report["counts"]["per_residue"]:
            w.writerow([r["residue"], r["count"], format_float(r["normalized"]), format_float(r["deviation"])])
    elif command == "spectrum":
        w.writerow(["char_id", "order", "ratio"])
        for r in report["spectrum"]:
            w.writerow([r["char_id"], r["order"], format_float(r["ratio"])])
    elif command == "subgroup":
        w.writerow(["coset_rep", "residue", "count", "deviation_from_coset_mean"])
        for cs in report["problem_set"]["cosets"]:
            for r in cs["rows"]:
                w.writerow([cs["rep"], r["residue"], r["count"], format_float(r["deviation"])])
    else:
        w.writerow(["key", "value"])
        for k, v in sorted(_flatten(report["saddle"]).items()):
            w.writerow([k, format_float(v) if isinstance(v, float) else ("" if v is None else v)])
    return buf.getvalue()


def _flatten(d, prefix=""):
    out = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        else:
            out[key] = v
    return out
