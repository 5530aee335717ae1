"""Mixture-of-experts surrogate: softmax gate over split bits, Bernoulli bit
experts, Gaussian predictor experts, and interval-rule extraction."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .binarizer import BinaryDataset, SplitSchema

# Bernoulli parameters are clamped only when densities are evaluated, so the
# stored values (and the M-step closed forms) stay exact.
BERNOULLI_EPS = 1e-6


@dataclass(frozen=True)
class MixtureModel:
    """K-component mixture over (z, s) pairs.

    ``gate_weights`` has one row per component; when ``intercept`` is set the
    last column multiplies a constant 1 appended to the bit vector.
    """

    gate_weights: np.ndarray
    eta: np.ndarray
    mu: np.ndarray
    lam: np.ndarray
    schema: SplitSchema
    intercept: bool = True

    def __post_init__(self):
        object.__setattr__(self, "gate_weights", np.asarray(self.gate_weights, dtype=np.float64))
        object.__setattr__(self, "eta", np.asarray(self.eta, dtype=np.float64))
        object.__setattr__(self, "mu", np.asarray(self.mu, dtype=np.float64))
        object.__setattr__(self, "lam", np.asarray(self.lam, dtype=np.float64))
        k = len(self.mu)
        if k < 1:
            raise ValueError("need at least one component")
        width = len(self.schema) + (1 if self.intercept else 0)
        if self.gate_weights.shape != (k, width):
            raise ValueError(f"gate_weights must be ({k}, {width})")
        if self.eta.shape != (k, len(self.schema)):
            raise ValueError(f"eta must be ({k}, {len(self.schema)})")
        if self.lam.shape != (k,):
            raise ValueError("lam must have one entry per component")
        if not np.isfinite(self.gate_weights).all():
            raise ValueError("non-finite gate weight")
        if ((self.eta < 0) | (self.eta > 1)).any():
            raise ValueError("eta entries must lie in [0, 1]")
        if (self.lam <= 0).any() or not np.isfinite(self.lam).all():
            raise ValueError("lam entries must be positive and finite")
        if not (np.isfinite(self.mu).all()):
            raise ValueError("non-finite mu")

    @property
    def n_components(self) -> int:
        return len(self.mu)

    def _check_bits(self, s) -> np.ndarray:
        s = np.asarray(s, dtype=np.float64)
        if s.shape != (len(self.schema),):
            raise ValueError(f"bit vector must have length {len(self.schema)}")
        return s

    def _design(self, S: np.ndarray) -> np.ndarray:
        if not self.intercept:
            return S
        return np.concatenate([S, np.ones((len(S), 1))], axis=1)

    def gate(self, s) -> np.ndarray:
        """Softmax component weights for one bit vector (positive, sums to 1)."""
        s = self._check_bits(s)
        return self.gate_batch(s[None, :])[0]

    def gate_batch(self, S: np.ndarray) -> np.ndarray:
        logits = self._design(np.asarray(S, dtype=np.float64)) @ self.gate_weights.T
        logits -= logits.max(axis=1, keepdims=True)
        e = np.exp(logits)
        return e / e.sum(axis=1, keepdims=True)

    def log_gate_batch(self, S: np.ndarray) -> np.ndarray:
        logits = self._design(np.asarray(S, dtype=np.float64)) @ self.gate_weights.T
        return logits - logsumexp(logits, axis=1, keepdims=True)

    def component_log_density(self, k: int, s, z: float) -> float:
        """log p(s | eta_k) + log N(z; mu_k, 1/lam_k), always finite."""
        if not 0 <= k < self.n_components:
            raise IndexError(f"component index {k} out of range")
        s = self._check_bits(s)
        return float(self.log_density_matrix(s[None, :], np.array([z]))[0, k])

    def log_density_matrix(self, S: np.ndarray, z: np.ndarray) -> np.ndarray:
        """(n, K) matrix of per-component log densities of (s, z) rows."""
        eta = np.clip(self.eta, BERNOULLI_EPS, 1.0 - BERNOULLI_EPS)
        bern = S @ np.log(eta).T + (1.0 - S) @ np.log1p(-eta).T
        resid = z[:, None] - self.mu[None, :]
        gauss = 0.5 * np.log(self.lam / (2.0 * np.pi))[None, :] - 0.5 * self.lam[None, :] * resid**2
        return bern + gauss

    def predict_point(self, s) -> tuple[int, float]:
        """Hard prediction: argmax-gate component (ties to the lowest index)
        and its predictor value."""
        g = self.gate(s)
        k = int(np.argmax(g))
        return k, float(self.mu[k])

    def predict_soft(self, s) -> float:
        """Gate-weighted average of the component predictors."""
        return float(self.gate(s) @ self.mu)

    def predict_batch(self, S: np.ndarray, soft: bool = False) -> np.ndarray:
        g = self.gate_batch(S)
        if soft:
            return g @ self.mu
        return self.mu[np.argmax(g, axis=1)]


def _check_schema(model: MixtureModel, data: BinaryDataset) -> None:
    same = np.array_equal(model.schema.features, data.schema.features) and np.array_equal(
        model.schema.thresholds, data.schema.thresholds
    )
    if not same:
        raise ValueError("dataset schema does not match model schema")


def log_joint_matrix(model: MixtureModel, data: BinaryDataset) -> np.ndarray:
    """(N, K) matrix of log gate_k(s_n) + log density_k(s_n, z_n)."""
    _check_schema(model, data)
    return model.log_gate_batch(data.bits) + model.log_density_matrix(data.bits, data.z)


def joint_log_likelihood(model: MixtureModel, data: BinaryDataset) -> float:
    """Sum over rows of log sum_k gate_k(s) density_k(s, z), via log-sum-exp."""
    return float(logsumexp(log_joint_matrix(model, data), axis=1).sum())


@dataclass
class RuleInterval:
    feature: int
    lower: float = -math.inf
    upper: float = math.inf

    @property
    def degenerate(self) -> bool:
        return self.lower >= self.upper


@dataclass
class RuleComponent:
    mu: float
    intervals: list = field(default_factory=list)
    share: float | None = None
    degenerate: bool = False

    @property
    def catch_all(self) -> bool:
        return len(self.intervals) == 0


@dataclass
class RuleSet:
    """Human-readable output: one interval conjunction + predictor per component."""

    components: list
    feature_names: tuple | None = None

    def name_of(self, d: int) -> str:
        if self.feature_names is not None:
            return self.feature_names[d]
        return f"x_{d + 1}"

    def active_components(self):
        return [c for c in self.components if not c.catch_all]


def extract_rules(model: MixtureModel, tau: float, data: BinaryDataset | None = None) -> RuleSet:
    """Threshold the Bernoulli parameters into interval rules.

    A bit is an active lower bound when eta >= 1 - tau (the component almost
    surely satisfies x >= b) and an active upper bound when eta <= tau; per
    feature the tightest bounds are kept.  Components with inconsistent
    bounds are flagged degenerate rather than dropped; components with no
    active bit get the catch-all rule.  When ``data`` is given, each
    component's share of argmax-gate rows is recorded.
    """
    if not 0.0 < tau < 0.5:
        raise ValueError("tau must lie in (0, 0.5)")
    shares = None
    if data is not None:
        _check_schema(model, data)
        assign = np.argmax(model.gate_batch(data.bits), axis=1)
        shares = np.bincount(assign, minlength=model.n_components) / len(data)

    feats = model.schema.features
    thrs = model.schema.thresholds
    components = []
    for k in range(model.n_components):
        lowers: dict[int, float] = {}
        uppers: dict[int, float] = {}
        for d, b, e in zip(feats.tolist(), thrs.tolist(), model.eta[k].tolist()):
            if e >= 1.0 - tau:
                lowers[d] = max(b, lowers.get(d, -math.inf))
            elif e <= tau:
                uppers[d] = min(b, uppers.get(d, math.inf))
        intervals = []
        degenerate = False
        for d in sorted(set(lowers) | set(uppers)):
            iv = RuleInterval(d, lowers.get(d, -math.inf), uppers.get(d, math.inf))
            degenerate = degenerate or iv.degenerate
            intervals.append(iv)
        components.append(
            RuleComponent(
                mu=float(model.mu[k]),
                intervals=intervals,
                share=None if shares is None else float(shares[k]),
                degenerate=degenerate,
            )
        )
    return RuleSet(components, model.schema.feature_names)


def _interval_text(ruleset: RuleSet, iv: RuleInterval) -> str:
    name = ruleset.name_of(iv.feature)
    if iv.lower > -math.inf and iv.upper < math.inf:
        return f"{iv.lower:g} <= {name} < {iv.upper:g}"
    if iv.lower > -math.inf:
        return f"{name} >= {iv.lower:g}"
    return f"{name} < {iv.upper:g}"


def rule_text(ruleset: RuleSet, component: RuleComponent) -> str:
    if component.catch_all:
        return "any x"
    body = ", ".join(_interval_text(ruleset, iv) for iv in component.intervals)
    if component.degenerate:
        body += "  [degenerate: empty interval]"
    return body


def render_rules_text(ruleset: RuleSet) -> str:
    """Aligned plain-text table: predictor value, share, rule conjunction."""
    rows = []
    for c in ruleset.components:
        share = "" if c.share is None else f"{c.share:.2f}"
        rows.append((f"{c.mu:.4g}", share, rule_text(ruleset, c)))
    w0 = max(len(r[0]) for r in rows)
    w1 = max([len(r[1]) for r in rows] + [len("share")])
    lines = [f"{'z':>{w0}}  {'share':>{w1}}  rule"]
    for r in rows:
        lines.append(f"{r[0]:>{w0}}  {r[1]:>{w1}}  {r[2]}")
    return "\n".join(lines)


def rules_to_json_dict(ruleset: RuleSet) -> dict:
    """JSON form; unbounded interval ends become null."""
    comps = []
    for c in ruleset.components:
        intervals = []
        for iv in c.intervals:
            entry: dict = {"feature": int(iv.feature)}
            if ruleset.feature_names is not None:
                entry["name"] = ruleset.name_of(iv.feature)
            entry["lower"] = None if iv.lower == -math.inf else iv.lower
            entry["upper"] = None if iv.upper == math.inf else iv.upper
            intervals.append(entry)
        comps.append(
            {
                "mu": c.mu,
                "share": c.share,
                "intervals": intervals,
                "degenerate": c.degenerate,
                "catch_all": c.catch_all,
            }
        )
    return {"components": comps}


def rules_to_json(ruleset: RuleSet) -> str:
    return json.dumps(rules_to_json_dict(ruleset), indent=2)
