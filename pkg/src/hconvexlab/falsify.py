"""Seeded falsification campaigns over hypothesis regions.

A campaign draws instances from a target's hypothesis region, evaluates the
target inequality's signed margin in doubles, and promotes every margin
below -1e-10 to extended-precision confirmation.  A witness is confirmed
only when the 60-digit margin stays below -1e-6 and every feasibility flag
was true; otherwise it is demoted as float noise (sign flipped) or
below-threshold (tiny magnitude).  Campaigns never claim truth — the
outcome is either a confirmed witness or "no violation found at N samples".

Determinism: sample i derives its own counter-based stream from
(seed, i), so reports are byte-identical for a fixed seed regardless of
chunking or the HCONVEXLAB_THREADS worker count.  Samplers draw
constructively inside the beta-dependent membership intervals (using the
fact that the interval's lower end is monotone in the spread target, a
draw with smaller actual spread stays feasible); the post-hoc flags remain
the single source of truth and rejected draws are counted exactly:
drawn = counted + rejected.

Targets
  operator-jensen   M_(0,1)(h) <f(A)x,x>  vs  f(<Ax,x>)
  per-lambda        (h(lam)/lam) <f(A)x,x>  vs  f(<Ax,x>)
  half-bound        2 h(1/2) <f(A)x,x>  vs  f(<Ax,x>)
  best-possible     the diag(0, a) / equal-x construction behind the claim
                    that 2h(1/2) is optimal, with h(t) = t^beta; the target
                    margin uses the construction's reduced expectation
                    f(a)/2 (only the top spectral term), and the full
                    functional-calculus margin travels alongside
  kyfan, amgm, chrystal, holder-mccarthy
                    the refined chains (margin_kind "refined" takes the
                    worse of the two chain margins, "outer" the classical
                    lhs <= rhs margin)
  certificates      grid certification of the conditional-convexity gap
                    for one built-in triple at sampled parameters
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from numpy.random import Generator, Philox

from .convexity import certify
from .errors import ConfigError, EmptyRegion, HConvexLabError
from .funclib import gate_interval, make_triple, scalar_function
from .highprec import digits, hp_chain_margins, hp_jensen_margin
from .opcalc import SymmetricMatrix, UnitVector, jensen_verify, spectrum_in
from .refined import (
    WeightedSample, amgm_chain, chrystal_chain, hm_chain, kyfan_chain,
)

CANDIDATE_THRESHOLD = -1e-10
CONFIRM_THRESHOLD = -1e-6
RETRY_CAP = 512
WITNESS_CAP = 32
THREADS_ENV = "HCONVEXLAB_THREADS"

TARGETS = (
    "operator-jensen", "per-lambda", "half-bound", "best-possible",
    "kyfan", "amgm", "chrystal", "holder-mccarthy", "certificates",
)
_CHAIN_TARGETS = ("kyfan", "amgm", "chrystal", "holder-mccarthy")
_OPERATOR_TARGETS = ("operator-jensen", "per-lambda", "half-bound")

# the one instance every operator-jensen report must evaluate and publish:
# it satisfies the certified-gap hypotheses yet its infimum-mode margin is
# decided by the oracle, not assumed
PINNED_INSTANCE = {
    "triple": "amgm", "alpha": 2.0, "beta": 2.16, "v": 0.8,
    "diag": [0.64, 0.8],
    "x": [0.7071067811865476, 0.7071067811865476],
}


# ---------------------------------------------------------------------------
# Campaign configuration
# ---------------------------------------------------------------------------

_REGION_DEFAULTS = {
    "kyfan": {"alpha": [1.000001, 3.0], "v": [1e-4, 0.5], "n": [2, 5]},
    "amgm": {"alpha": [1.000001, 3.0], "v": [1e-4, 1.0], "n": [2, 5]},
    "chrystal": {"alpha": [0.01, 3.0], "v": [0.1, 3.0], "n": [2, 5]},
    "holder-mccarthy": {"alpha": [0.01, 3.0], "v": [0.1, 2.0],
                        "dim": [2, 8], "p": [1.000001, 4.0]},
    "operator-jensen": {"alpha": [1.000001, 3.0], "v": [1e-2, 1.0],
                        "dim": [2, 8], "triple": "amgm",
                        "weight": "exp_weight"},
    "per-lambda": {"alpha": [1.000001, 3.0], "v": [1e-2, 1.0],
                   "dim": [2, 8], "triple": "amgm", "weight": "exp_weight",
                   "lam": [1e-6, 1.0 - 1e-6]},
    "half-bound": {"alpha": [1.000001, 3.0], "v": [1e-2, 1.0],
                   "dim": [2, 8], "triple": "amgm", "weight": "exp_weight"},
    "best-possible": {"a": [1e-3, 10.0], "beta": [1e-6, 1.0 - 1e-6],
                      "lam": [0.5 + 1e-12, 1.0 - 1e-12]},
    "certificates": {"triple": "amgm", "alpha": [1.000001, 3.0],
                     "v": [0.05, 1.0], "grid": [256, 256]},
}

# per-inequality parameter constraints a region must respect at construction
_ALPHA_FLOOR = {"kyfan": 1.0, "amgm": 1.0, "chrystal": 0.0,
                "holder-mccarthy": 0.0}


def _check_range(name, pair, lo=None, hi=None, lo_strict=False):
    try:
        a, b = float(pair[0]), float(pair[1])
    except (TypeError, ValueError, IndexError):
        raise ConfigError(f"region key {name!r} must be a [lo, hi] pair, "
                          f"got {pair!r}") from None
    if not a <= b:
        raise ConfigError(f"region key {name!r} out of order: {pair!r}")
    if lo is not None and (a < lo or (lo_strict and a <= lo)):
        raise ConfigError(f"region key {name!r} must stay above {lo}, "
                          f"got {pair!r}")
    if hi is not None and b > hi:
        raise ConfigError(f"region key {name!r} must stay below {hi}, "
                          f"got {pair!r}")
    return [a, b]


@dataclass(frozen=True)
class Campaign:
    """A deterministic sampling campaign specification."""

    target: str
    samples: int
    seed: int
    region: dict = field(default_factory=dict)
    margin_kind: str = "refined"  # chains only: refined | outer
    witness_cap: int = WITNESS_CAP

    def __post_init__(self):
        if self.target not in TARGETS:
            raise ConfigError(f"unknown target {self.target!r}; "
                              f"expected one of {TARGETS}")
        if not 1 <= int(self.samples):
            raise ConfigError("samples must be a positive count")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        if self.margin_kind not in ("refined", "outer"):
            raise ConfigError(f"margin_kind must be refined|outer, "
                              f"got {self.margin_kind!r}")
        object.__setattr__(self, "samples", int(self.samples))
        object.__setattr__(self, "seed", int(self.seed))
        object.__setattr__(self, "region",
                           _resolve_region(self.target, self.region))

    def to_json(self) -> dict:
        return {"target": self.target, "samples": self.samples,
                "seed": self.seed, "region": dict(self.region),
                "margin_kind": self.margin_kind,
                "witness_cap": self.witness_cap}


def _resolve_region(target: str, region: dict) -> dict:
    defaults = _REGION_DEFAULTS[target]
    unknown = set(region) - set(defaults)
    if unknown:
        raise ConfigError(f"unknown region keys for {target!r}: "
                          f"{sorted(unknown)}")
    out = {**defaults, **{k: v for k, v in region.items() if v is not None}}
    # stated parameter constraints are enforced here; data-dependent
    # hypothesis clauses (anchor, membership) stay post hoc
    floor = _ALPHA_FLOOR.get(target)
    if target in ("operator-jensen", "per-lambda", "half-bound"):
        floor = 1.0 if out["triple"] in ("kyfan", "amgm") else 0.0
    if "alpha" in out and floor is not None:
        out["alpha"] = _check_range("alpha", out["alpha"], lo=floor,
                                    lo_strict=True)
    if target == "certificates":
        out["alpha"] = _check_range(
            "alpha", out["alpha"],
            lo=1.0 if out["triple"] in ("kyfan", "amgm") else 0.0,
            lo_strict=True)
        out["grid"] = [int(out["grid"][0]), int(out["grid"][1])]
    for key in ("v", "a"):
        if key in out:
            out[key] = _check_range(key, out[key], lo=0.0, lo_strict=True)
    if "lam" in out:
        lo = 0.5 if target == "best-possible" else 0.0
        out["lam"] = _check_range("lam", out["lam"], lo=lo, hi=1.0,
                                  lo_strict=True)
        if out["lam"][1] >= 1.0:
            raise ConfigError("lam range must stay strictly below 1")
    if "beta" in out:
        out["beta"] = _check_range("beta", out["beta"], lo=0.0, hi=1.0,
                                   lo_strict=True)
        if out["beta"][1] >= 1.0:
            raise ConfigError("beta range must stay strictly below 1")
    if "p" in out:
        out["p"] = _check_range("p", out["p"], lo=1.0, lo_strict=True)
    for key in ("n", "dim"):
        if key in out:
            pair = _check_range(key, out[key], lo=1,
                                hi=10_000 if key == "n" else 64)
            out[key] = [int(pair[0]), int(pair[1])]
    if "triple" in out and out["triple"] not in ("kyfan", "amgm", "chrystal",
                                                 "holder_mccarthy"):
        raise ConfigError(f"unknown triple {out['triple']!r}")
    if "weight" in out and out["weight"] not in ("exp_weight",
                                                 "identity_weight"):
        raise ConfigError(f"weight must be exp_weight|identity_weight, "
                          f"got {out['weight']!r}")
    return out


def _stream(seed: int, index: int) -> Generator:
    """Independent counter-based stream for sample `index`."""
    return Generator(Philox(key=seed, counter=index << 128))


# ---------------------------------------------------------------------------
# Per-target samplers (constructive: draws land inside the feasible set)
# ---------------------------------------------------------------------------

def _log_uniform(rng: Generator, lo: float, hi: float) -> float:
    return float(math.exp(rng.uniform(math.log(lo), math.log(hi))))


def _weights(rng: Generator, n: int):
    return [float(t) for t in rng.dirichlet(np.ones(n))]


def _unit_vector(rng: Generator, dim: int):
    while True:
        x = rng.standard_normal(dim)
        norm = float(np.linalg.norm(x))
        if norm > 1e-6:
            return [float(t) for t in x / norm]


def _draw_chain(rng: Generator, target: str, region: dict) -> dict:
    alpha = float(rng.uniform(*region["alpha"]))
    if target in ("kyfan", "amgm"):
        v = _log_uniform(rng, *region["v"])
        n = int(rng.integers(region["n"][0], region["n"][1] + 1))
        if target == "kyfan":
            lo = v ** alpha / (v ** alpha + (1.0 - v) ** alpha)
        else:
            lo = v ** alpha
        lo = min(max(lo, 5e-324), v)
        a = [float(t) for t in rng.uniform(lo, v, n)]
        return {"target": target, "alpha": alpha, "v": v, "n": n,
                "a": a, "q": _weights(rng, n)}
    if target == "chrystal":
        v = _log_uniform(rng, *region["v"])
        n = int(rng.integers(region["n"][0], region["n"][1] + 1))
        # spread target delta keeps the data's log-ratios above the
        # beta-dependent lower gate: the gate value is monotone in the
        # spread, so actual spread <= delta preserves membership
        cap = 0.3 * alpha * math.log1p(math.exp(-v / 2.0)) \
            / math.log1p(math.exp(v))
        delta = _log_uniform(rng, 1e-6, max(cap, 2e-6))
        base = delta / (0.5 * v)
        vals = rng.uniform(base, base + delta, 2 * n)
        return {"target": target, "alpha": alpha, "v": v, "n": n,
                "a": [float(t) for t in vals[:n]],
                "b": [float(t) for t in vals[n:]],
                "q": _weights(rng, n)}
    # holder-mccarthy
    v = _log_uniform(rng, *region["v"])
    p = float(rng.uniform(*region["p"]))
    dim = int(rng.integers(region["dim"][0], region["dim"][1] + 1))
    gtarget = _log_uniform(rng, 1e-6, alpha)
    lo = max(v * (gtarget / alpha) ** (1.0 / p), v - gtarget)
    eigs = [float(t) for t in rng.uniform(min(lo, v), v, dim)]
    return {"target": target, "alpha": alpha, "v": v, "p": p, "dim": dim,
            "diag": eigs, "x": _unit_vector(rng, dim)}


def _draw_operator(rng: Generator, target: str, region: dict) -> dict:
    alpha = float(rng.uniform(*region["alpha"]))
    triple = region["triple"]
    span = 1.0 if triple in ("kyfan", "amgm") else alpha
    beta = float(rng.uniform(alpha, alpha + span))
    v_hi = min(region["v"][1], 0.5) if triple == "kyfan" else region["v"][1]
    v = _log_uniform(rng, region["v"][0], v_hi)
    dim = int(rng.integers(region["dim"][0], region["dim"][1] + 1))
    t = make_triple(triple, alpha, beta,
                    p=2.0 if triple == "holder_mccarthy" else None)
    gi = gate_interval(t.g, v, t.f.domain)
    eigs = [float(u) for u in rng.uniform(gi.interval.lo, gi.interval.hi, dim)]
    inst = {"target": target, "triple": triple, "alpha": alpha, "beta": beta,
            "v": v, "diag": eigs, "x": _unit_vector(rng, dim),
            "weight": region["weight"]}
    if target == "per-lambda":
        inst["lam"] = float(rng.uniform(*region["lam"]))
    return inst


def _draw_best_possible(rng: Generator, region: dict) -> dict:
    return {"target": "best-possible",
            "a": _log_uniform(rng, *region["a"]),
            "beta": float(rng.uniform(*region["beta"])),
            "lam": float(rng.uniform(*region["lam"]))}


def _draw_certificates(rng: Generator, region: dict) -> dict:
    triple = region["triple"]
    alpha = float(rng.uniform(*region["alpha"]))
    span = 1.0 if triple in ("kyfan", "amgm") else alpha
    beta = float(rng.uniform(alpha, alpha + span))
    v_hi = min(region["v"][1], 0.5) if triple == "kyfan" else region["v"][1]
    v = float(rng.uniform(min(region["v"][0], v_hi), v_hi))
    inst = {"target": "certificates", "triple": triple, "alpha": alpha,
            "beta": beta, "v": v, "grid": list(region["grid"])}
    if triple == "holder_mccarthy":
        inst["p"] = float(rng.uniform(1.5, 4.0))
    return inst


def draw_instance(rng: Generator, target: str, region: dict) -> dict:
    if target in _CHAIN_TARGETS:
        return _draw_chain(rng, target, region)
    if target in _OPERATOR_TARGETS:
        return _draw_operator(rng, target, region)
    if target == "best-possible":
        return _draw_best_possible(rng, region)
    return _draw_certificates(rng, region)


# ---------------------------------------------------------------------------
# Per-target evaluation (doubles); shared by campaigns and replay
# ---------------------------------------------------------------------------

def _chain_report(inst: dict):
    target = inst["target"]
    if target == "holder-mccarthy":
        return hm_chain(SymmetricMatrix.diagonal(inst["diag"]),
                        UnitVector(inst["x"]), inst["p"], inst["alpha"],
                        inst["v"])
    sample = WeightedSample(tuple(inst["a"]), tuple(inst["q"]),
                            b=tuple(inst["b"]) if inst.get("b") else None)
    fn = {"kyfan": kyfan_chain, "amgm": amgm_chain,
          "chrystal": chrystal_chain}[target]
    return fn(sample, inst["alpha"], inst["v"])


def _operator_parts(inst: dict):
    triple = make_triple(inst["triple"], inst["alpha"], inst["beta"],
                         p=2.0 if inst["triple"] == "holder_mccarthy" else None)
    h = scalar_function("identity_weight") \
        if inst.get("weight") == "identity_weight" else triple.h
    A = SymmetricMatrix.diagonal(inst["diag"]) if "diag" in inst \
        else SymmetricMatrix(inst["entries"])
    return triple, h, A, UnitVector(inst["x"])


def _closed_form_coefficient(h) -> float:
    if h.family == "exp_weight":
        return h.params["alpha"] / h.params["beta"]
    if h.family == "identity_weight":
        return 1.0
    if h.family == "power_weight":
        return 0.0 if h.params["beta"] > 1.0 else 1.0
    raise ConfigError(f"no closed-form Jensen coefficient for {h.family!r}")


def _operator_flags(inst: dict, triple, A) -> dict:
    gi = gate_interval(triple.g, inst["v"], triple.f.domain)
    inside, _ = spectrum_in(A, gi.interval)
    lo = 1.0 if inst["triple"] in ("kyfan", "amgm") else 0.0
    span = 1.0 if inst["triple"] in ("kyfan", "amgm") else inst["alpha"]
    return {
        "alpha_in_range": inst["alpha"] > lo,
        "beta_in_range": inst["alpha"] <= inst["beta"]
                         <= inst["alpha"] + span + 1e-12,
        "anchor_in_range": triple.anchors.contains(inst["v"]),
        "spectrum_in_gate": inside,
    }


class _FrozenCoefficient:
    """Minimal stand-in carrying a precomputed M value into jensen_verify."""

    __slots__ = ("value",)

    def __init__(self, value: float):
        self.value = value


def evaluate_instance(inst: dict, margin_kind: str = "refined"):
    """(margin, flags, extras) for one serialized instance.

    This is the single evaluation path: campaigns, replay, and tests all
    call it, so a replayed witness reproduces margin_double bit for bit.
    """
    target = inst["target"]
    if target in _CHAIN_TARGETS:
        rep = _chain_report(inst)
        margin = (rep.chain[2] - rep.chain[0]) if margin_kind == "outer" \
            else min(rep.margins)
        return margin, dict(rep.flags), {
            "chain": list(rep.chain), "margins": list(rep.margins),
            "gamma": rep.gamma, "beta": rep.beta, "feasible": rep.feasible}
    if target in _OPERATOR_TARGETS:
        triple, h, A, x = _operator_parts(inst)
        mode = {"operator-jensen": "infimum", "per-lambda": "per-lambda",
                "half-bound": "half-bound"}[target]
        coeff = _FrozenCoefficient(_closed_form_coefficient(h)) \
            if mode == "infimum" else None
        verdict = jensen_verify(triple.f, h, A, x, mode,
                                lam=inst.get("lam"), coefficient=coeff)
        flags = _operator_flags(inst, triple, A)
        return verdict.margin, flags, {
            "lhs": verdict.lhs, "rhs": verdict.rhs,
            "rhs_factor": verdict.rhs_factor,
            "expectation": verdict.expectation}
    if target == "best-possible":
        a, beta, lam = inst["a"], inst["beta"], inst["lam"]
        lhs = math.exp(-a / 2.0)
        factor = lam ** (beta - 1.0)
        reduced = math.exp(-a) / 2.0
        full = (1.0 + math.exp(-a)) / 2.0
        margin = factor * reduced - lhs
        flags = {"lambda_in_range": 0.5 < lam < 1.0,
                 "exponent_in_range": 0.0 < beta < 1.0,
                 "scale_in_range": a > 0.0,
                 "factor_decreasing": True}
        return margin, flags, {
            "lhs": lhs, "rhs_factor": factor,
            "reduced_expectation": reduced,
            "functional_calculus_margin": factor * full - lhs}
    # certificates
    triple = make_triple(inst["triple"], inst["alpha"], inst["beta"],
                         p=inst.get("p"))
    cert = certify(triple.f, triple.g, triple.h, inst["v"],
                   grid=tuple(inst["grid"]))
    flags = {"params_in_range": True, "gate_feasible": True}
    return cert.min_value, flags, {
        "verdict": cert.verdict, "gate_degenerate": cert.gate.degenerate,
        "arg_min": {"u": cert.arg_min[0], "lambda": cert.arg_min[1]}}


# ---------------------------------------------------------------------------
# Extended-precision confirmation
# ---------------------------------------------------------------------------

def confirm(candidate: dict) -> dict:
    """Re-evaluate a candidate witness at 60 digits and set its status.

    confirmed requires margin_confirmed < -1e-6 with all flags true and a
    sign agreeing with the double margin; otherwise the candidate is
    demoted as "float-noise" (sign mismatch) or "below-threshold".
    """
    inst = candidate["inputs"]
    target = inst["target"]
    if target in _CHAIN_TARGETS:
        key = inst["target"].replace("-", "_")
        if target == "holder-mccarthy":
            m1, m2 = hp_chain_margins(
                key, None, None, inst["alpha"], p=inst["p"],
                entries=np.diag(inst["diag"]), x=inst["x"])
        else:
            m1, m2 = hp_chain_margins(key, inst["a"], inst["q"],
                                      inst["alpha"], b=inst.get("b"))
        hp_margin = (m1 + m2) if candidate.get("margin_kind") == "outer" \
            else min(m1, m2)
    elif target in _OPERATOR_TARGETS:
        triple, h, A, x = _operator_parts(inst)
        mode = {"operator-jensen": "infimum", "per-lambda": "per-lambda",
                "half-bound": "half-bound"}[target]
        hp_margin = hp_jensen_margin(triple.f, h, A.entries, x.components,
                                     mode, lam=inst.get("lam"))
    elif target == "best-possible":
        from mpmath import mp
        with mp.workdps(60):
            a, beta, lam = (mp.mpf(inst["a"]), mp.mpf(inst["beta"]),
                            mp.mpf(inst["lam"]))
            factor = lam ** (beta - 1)
            hp_margin = factor * mp.exp(-a) / 2 - mp.exp(-a / 2)
            candidate.setdefault("extras", {})[
                "functional_calculus_margin_confirmed"] = digits(
                    factor * (1 + mp.exp(-a)) / 2 - mp.exp(-a / 2))
    else:  # certificates: min_value is already the hp-corrected gap value
        hp_margin = candidate["margin_double"]

    margin_f = float(hp_margin)
    feasible_all = _counts_as_feasible(target, candidate["flags"])
    sign_agrees = (margin_f < 0.0) == (candidate["margin_double"] < 0.0)
    out = dict(candidate)
    out["margin_confirmed"] = digits(hp_margin)
    out["margin_confirmed_double"] = margin_f
    if not sign_agrees or margin_f >= 0.0:
        out["confirmed"] = False
        out["demotion"] = "float-noise"
    elif margin_f >= CONFIRM_THRESHOLD:
        out["confirmed"] = False
        out["demotion"] = "below-threshold"
    elif not feasible_all:
        out["confirmed"] = False
        out["demotion"] = "infeasible-flags"
    else:
        out["confirmed"] = True
        out["demotion"] = None
    return out


# ---------------------------------------------------------------------------
# Campaign execution
# ---------------------------------------------------------------------------

def _run_range(campaign_json: dict, start: int, stop: int):
    """Evaluate sample indices [start, stop); returns chunk aggregates."""
    c = Campaign(**campaign_json)
    drawn = rejected = 0
    min_margin = math.inf
    argmin = None
    candidates = []
    for i in range(start, stop):
        rng = _stream(c.seed, i)
        accepted = None
        for _ in range(RETRY_CAP):
            drawn += 1
            try:
                inst = draw_instance(rng, c.target, c.region)
                margin, flags, extras = evaluate_instance(inst, c.margin_kind)
            except (ValueError, ArithmeticError, HConvexLabError):
                rejected += 1
                continue
            if not _counts_as_feasible(c.target, flags):
                rejected += 1
                continue
            accepted = (inst, margin, flags, extras)
            break
        if accepted is None:
            raise EmptyRegion(
                f"{c.target}: no feasible draw after {RETRY_CAP} tries at "
                f"sample {i}", drawn=drawn, rejected=rejected)
        inst, margin, flags, extras = accepted
        if margin < min_margin:
            min_margin = margin
            argmin = (i, inst)
        if margin < CANDIDATE_THRESHOLD:
            candidates.append({"index": i, "inputs": inst,
                               "margin_double": margin, "flags": flags,
                               "extras": extras,
                               "margin_kind": c.margin_kind})
    return {"drawn": drawn, "rejected": rejected, "min_margin": min_margin,
            "argmin": argmin, "candidates": candidates,
            "counted": stop - start}


def _counts_as_feasible(target: str, flags: dict) -> bool:
    if target == "chrystal":
        return all(ok for key, ok in flags.items()
                   if key != "values_in_interval")
    return all(flags.values())


def _chunks(n: int, workers: int):
    size = max(1, -(-n // workers))
    return [(lo, min(lo + size, n)) for lo in range(0, n, size)]


def run_campaign(campaign: Campaign) -> dict:
    """Execute a campaign; returns the JSON-ready report.

    The report is byte-deterministic given the campaign (wall_time_s is
    attached by the CLI envelope, not here).
    """
    t0 = time.perf_counter()
    workers = int(os.environ.get(THREADS_ENV, "1") or "1")
    spans = _chunks(campaign.samples, workers) if workers > 1 \
        else [(0, campaign.samples)]
    cj = campaign.to_json()
    if workers > 1 and len(spans) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_range, [cj] * len(spans),
                                  [s[0] for s in spans],
                                  [s[1] for s in spans]))
    else:
        parts = [_run_range(cj, lo, hi) for lo, hi in spans]

    drawn = sum(p["drawn"] for p in parts)
    rejected = sum(p["rejected"] for p in parts)
    counted = sum(p["counted"] for p in parts)
    min_margin = math.inf
    argmin = None
    candidates = []
    for p in parts:  # chunk order == index order: deterministic merge
        if p["argmin"] is not None and p["min_margin"] < min_margin:
            min_margin = p["min_margin"]
            argmin = p["argmin"]
        candidates.extend(p["candidates"])

    confirmed = [confirm(c) for c in candidates]
    n_confirmed = sum(1 for w in confirmed if w["confirmed"])
    demotions = {}
    for w in confirmed:
        if w["demotion"]:
            demotions[w["demotion"]] = demotions.get(w["demotion"], 0) + 1

    kept = confirmed[:campaign.witness_cap]
    if argmin is not None and candidates:
        argmin_idx = argmin[0]
        if all(w["index"] != argmin_idx for w in kept):
            hit = [w for w in confirmed if w["index"] == argmin_idx]
            if hit:
                kept = kept[:-1] + hit if len(kept) >= campaign.witness_cap \
                    else kept + hit

    report = {
        "campaign": cj,
        "counts": {"drawn": drawn, "counted": counted, "rejected": rejected},
        "min_margin": min_margin,
        "argmin": None if argmin is None else
            {"index": argmin[0], "inputs": argmin[1]},
        "witness_stats": {"candidates": len(candidates),
                          "confirmed": n_confirmed,
                          "demotions": demotions,
                          "reported": len(kept)},
        "witnesses": kept,
        "outcome": "confirmed witness" if n_confirmed else
            f"no violation found at {counted} samples",
        "tolerances": {"candidate_threshold": CANDIDATE_THRESHOLD,
                       "confirm_threshold": CONFIRM_THRESHOLD},
    }
    if campaign.target == "operator-jensen":
        report["pinned_instance"] = _pinned_report()
    report["elapsed_s"] = time.perf_counter() - t0
    return report


def _pinned_report() -> dict:
    inst = dict(PINNED_INSTANCE, target="operator-jensen",
                weight="exp_weight")
    margin, flags, extras = evaluate_instance(inst)
    cand = {"index": -1, "inputs": inst, "margin_double": margin,
            "flags": flags, "extras": extras}
    out = confirm(cand) if margin < CANDIDATE_THRESHOLD else dict(
        cand, confirmed=False, demotion=None,
        margin_confirmed=digits(margin), margin_confirmed_double=margin)
    del out["index"]
    return out


def replay_witness(witness: dict) -> dict:
    """Re-evaluate one serialized witness; margins must reproduce exactly."""
    margin, flags, extras = evaluate_instance(
        witness["inputs"], witness.get("margin_kind", "refined"))
    cand = {"index": witness.get("index", -1), "inputs": witness["inputs"],
            "margin_double": margin, "flags": flags, "extras": extras,
            "margin_kind": witness.get("margin_kind", "refined")}
    if margin < CANDIDATE_THRESHOLD:
        return confirm(cand)
    cand.update(confirmed=False, demotion=None,
                margin_confirmed=digits(margin),
                margin_confirmed_double=margin)
    return cand


# ---------------------------------------------------------------------------
# Per-lambda profile
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LambdaProfile:
    """Margin of the per-lambda bound along a grid over (0, 1)."""

    points: tuple  # ((lam, margin), ...)
    argmin_lambda: float
    min_margin: float
    factor_decreasing: bool

    def to_json(self) -> dict:
        return {"points": [{"lambda": t, "margin": m} for t, m in self.points],
                "argmin_lambda": self.argmin_lambda,
                "min_margin": self.min_margin,
                "factor_decreasing": self.factor_decreasing}


def lambda_profile(f, h, A: SymmetricMatrix, x: UnitVector,
                   grid: int = 257) -> LambdaProfile:
    """Sweep the per-lambda margin over interior lambda points.

    Also reports whether h(lam)/lam is nonincreasing across the grid — the
    hypothesis under which the half-bound factor is claimed optimal.
    """
    lams = np.linspace(0.0, 1.0, grid + 2)[1:-1]
    pts = []
    factors = []
    for lam in lams:
        verdict = jensen_verify(f, h, A, x, "per-lambda", lam=float(lam))
        pts.append((float(lam), verdict.margin))
        factors.append(verdict.rhs_factor)
    margins = [m for _, m in pts]
    k = int(np.argmin(margins))
    decreasing = bool(np.all(np.diff(factors) <= 1e-15))
    return LambdaProfile(tuple(pts), pts[k][0], pts[k][1], decreasing)
