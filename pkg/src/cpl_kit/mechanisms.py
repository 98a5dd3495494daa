"""Local differential privacy mechanisms.

Eight mechanisms over a discrete domain of size k: generalized randomized
response (``grr``), the exponential mechanism with 0/1 utility (``exp``),
RAPPOR with unary encoding (``rappor``), optimized unary encoding (``oue``),
binary and optimized local hashing (``blh``/``olh``), histogram encoding with
Laplace summation (``she``), and subset selection (``ss``).

Each mechanism provides per-record perturbation, inference-attack decoding
back into the input alphabet, and an unbiased frequency estimator. ``grr``
and ``exp`` additionally expose their full transition matrix; the others
have exponential-size or continuous output alphabets, so leakage analysis
for them goes through the budget-only bound or the statistical estimator.

Perturbation and decoding take an explicit generator so callers own
determinism; everything here is pure given the stream.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .data_model import PROB_TOL, _locked
from .errors import DimensionMismatchError, InputError, UnsupportedMechanismError

KINDS = ("grr", "exp", "rappor", "oue", "blh", "olh", "she", "ss")

# RAPPOR unary-encoding configuration: permanent flip parameter and the
# instantaneous report probabilities. Applied once per report.
RAPPOR_F = 0.5
RAPPOR_P = 0.5
RAPPOR_Q = 0.75


@dataclass(frozen=True)
class MechanismSpec:
    """One mechanism with its privacy budget and domain size.

    All eight mechanisms are pure LDP; ``delta`` is carried for budget
    bookkeeping and must be 0 for perturbation.
    """

    kind: str
    epsilon: float
    k: int
    delta: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InputError(f"unknown mechanism kind {self.kind!r}, expected one of {KINDS}")
        if self.epsilon < 0:
            raise InputError("epsilon must be nonnegative")
        if not 0 <= self.delta < 1:
            raise InputError("delta must be in [0, 1)")
        if self.k < 2 and self.kind in ("grr", "exp", "ss"):
            raise InputError(f"{self.kind} requires domain size k >= 2")
        if self.k < 1:
            raise InputError("domain size k must be positive")

    @property
    def g(self) -> int:
        """Hash range for the local-hashing mechanisms."""
        if self.kind == "blh":
            return 2
        if self.kind == "olh":
            return int(round(math.exp(self.epsilon))) + 1
        raise UnsupportedMechanismError(f"{self.kind} has no hash range")

    @property
    def subset_size(self) -> int:
        """Report size omega = max(1, floor(k / (e^eps + 1))) for ``ss``."""
        if self.kind != "ss":
            raise UnsupportedMechanismError(f"{self.kind} has no subset size")
        return max(1, int(math.floor(self.k / (math.exp(self.epsilon) + 1))))

    def keep_probability(self) -> float:
        """Probability that grr/exp report the true symbol."""
        w = self._diag_weight()
        return w / (w + self.k - 1)

    def _diag_weight(self) -> float:
        if self.kind == "grr":
            return math.exp(self.epsilon)
        if self.kind == "exp":
            # 0/1 utility, sensitivity 1: score exp(eps * u / 2).
            return math.exp(self.epsilon / 2.0)
        raise UnsupportedMechanismError(f"{self.kind} has no symbol-keep probability")

    def params(self) -> dict:
        p: dict = {}
        if self.kind == "rappor":
            p = {"f": RAPPOR_F, "p": RAPPOR_P, "q": RAPPOR_Q}
        elif self.kind in ("blh", "olh"):
            p = {"g": self.g}
        elif self.kind == "ss":
            p = {"omega": self.subset_size}
        return p

    def to_json(self) -> dict:
        return {"kind": self.kind, "epsilon": self.epsilon, "delta": self.delta,
                "k": self.k, "params": self.params()}

    @classmethod
    def from_json(cls, obj: dict) -> "MechanismSpec":
        return cls(kind=obj["kind"], epsilon=float(obj["epsilon"]),
                   k=int(obj["k"]), delta=float(obj.get("delta", 0.0)))


@dataclass(frozen=True)
class TransitionMatrix:
    """Row-stochastic p(output | input) table for a mechanism."""

    input_labels: tuple[str, ...]
    output_labels: tuple[str, ...]
    matrix: np.ndarray
    epsilon: float

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=np.float64)
        if mat.shape != (len(self.input_labels), len(self.output_labels)):
            raise DimensionMismatchError("transition matrix shape does not match labels")
        if (mat < 0).any() or (mat > 1).any():
            raise InputError("transition probabilities must lie in [0, 1]")
        if np.abs(mat.sum(axis=1) - 1.0).max() > PROB_TOL:
            raise InputError("every transition row must sum to 1")
        if math.isfinite(self.epsilon):
            cmax = mat.max(axis=0)
            cmin = mat.min(axis=0)
            bound = math.exp(self.epsilon) * (1 + 1e-9)
            if (cmax > cmin * bound).any():
                raise InputError("transition matrix violates the pure-LDP ratio bound at its epsilon")
        object.__setattr__(self, "matrix", _locked(mat))

    @property
    def n_inputs(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_outputs(self) -> int:
        return self.matrix.shape[1]


def transition_matrix(spec: MechanismSpec, labels: tuple[str, ...] | None = None) -> TransitionMatrix:
    """Closed-form transition matrix; only tractable for grr and exp."""
    if spec.kind not in ("grr", "exp"):
        raise UnsupportedMechanismError(
            f"{spec.kind} has no tractable transition matrix; use the (epsilon, delta) "
            "bound or the statistical estimator instead"
        )
    if labels is None:
        labels = tuple(str(i) for i in range(spec.k))
    if len(labels) != spec.k:
        raise DimensionMismatchError("label count does not match domain size")
    w = spec._diag_weight()
    denom = w + spec.k - 1
    mat = np.full((spec.k, spec.k), 1.0 / denom)
    np.fill_diagonal(mat, w / denom)
    return TransitionMatrix(labels, labels, mat, spec.epsilon)


@dataclass(frozen=True)
class PerturbedOutput:
    """One record's perturbed report; payload shape depends on the mechanism."""

    kind: str
    payload: object


@dataclass(frozen=True)
class PerturbedColumn:
    """A whole column of perturbed reports stored as arrays.

    Payload layout by kind: grr/exp -> (N,) symbol indices; rappor/oue ->
    (N, k) bit matrix; blh/olh -> (seeds, reports) arrays; she -> (N, k)
    reals; ss -> (N, k) subset membership mask.
    """

    spec: MechanismSpec
    payload: object

    def __len__(self) -> int:
        if self.spec.kind in ("blh", "olh"):
            return len(self.payload[0])
        return len(self.payload)

    def row(self, i: int) -> PerturbedOutput:
        kind = self.spec.kind
        if kind in ("grr", "exp"):
            return PerturbedOutput(kind, int(self.payload[i]))
        if kind in ("blh", "olh"):
            seeds, reports = self.payload
            return PerturbedOutput(kind, (int(seeds[i]), int(reports[i])))
        if kind == "ss":
            return PerturbedOutput(kind, np.flatnonzero(self.payload[i]))
        return PerturbedOutput(kind, np.array(self.payload[i]))


def stack_outputs(spec: MechanismSpec, outputs) -> PerturbedColumn:
    """Bundle per-record outputs into a column for aggregate estimation."""
    if isinstance(outputs, PerturbedColumn):
        return outputs
    outputs = list(outputs)
    if not outputs:
        raise InputError("no outputs to stack")
    for o in outputs:
        if o.kind != spec.kind:
            raise InputError(f"output kind {o.kind!r} does not match spec {spec.kind!r}")
    kind = spec.kind
    if kind in ("grr", "exp"):
        return PerturbedColumn(spec, np.array([o.payload for o in outputs], dtype=np.int64))
    if kind in ("blh", "olh"):
        seeds = np.array([o.payload[0] for o in outputs], dtype=np.uint64)
        reports = np.array([o.payload[1] for o in outputs], dtype=np.int64)
        return PerturbedColumn(spec, (seeds, reports))
    if kind == "ss":
        mask = np.zeros((len(outputs), spec.k), dtype=bool)
        for i, o in enumerate(outputs):
            mask[i, np.asarray(o.payload, dtype=np.int64)] = True
        return PerturbedColumn(spec, mask)
    dtype = np.float64 if kind == "she" else np.uint8
    return PerturbedColumn(spec, np.array([o.payload for o in outputs], dtype=dtype))


# --------------------------------------------------------------------------
# Keyed 64-bit mixing hash for the local-hashing mechanisms. A fresh random
# key per report gives the universality the protocol needs.
# --------------------------------------------------------------------------

_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)


def _mix64(x: np.ndarray) -> np.ndarray:
    x = (x + _GOLDEN).astype(np.uint64)
    x ^= x >> np.uint64(30)
    x *= _M1
    x ^= x >> np.uint64(27)
    x *= _M2
    x ^= x >> np.uint64(31)
    return x


def _hash_bucket(values, seeds, g: int) -> np.ndarray:
    v = np.asarray(values, dtype=np.uint64)
    s = np.asarray(seeds, dtype=np.uint64)
    return (_mix64(_mix64(v + np.uint64(1)) ^ s) % np.uint64(g)).astype(np.int64)


def _random_seeds(rng: np.random.Generator, n: int) -> np.ndarray:
    return rng.integers(0, np.iinfo(np.uint64).max, size=n, dtype=np.uint64, endpoint=True)


# --------------------------------------------------------------------------
# Perturbation
# --------------------------------------------------------------------------

def _grr_sample(values: np.ndarray, keep_p: float, k: int, rng: np.random.Generator) -> np.ndarray:
    keep = rng.random(values.shape) < keep_p
    alt = rng.integers(0, k - 1, size=values.shape)
    alt = alt + (alt >= values)  # uniform over the k-1 other symbols
    return np.where(keep, values, alt).astype(np.int64)


def perturb_column(spec: MechanismSpec, values, rng: np.random.Generator) -> PerturbedColumn:
    """Perturb a full column of symbol indices under ``spec``."""
    values = np.asarray(values, dtype=np.int64)
    if values.size and (values.min() < 0 or values.max() >= spec.k):
        raise InputError("value out of range for the mechanism's domain")
    n, k = values.shape[0], spec.k
    kind = spec.kind

    if kind in ("grr", "exp"):
        return PerturbedColumn(spec, _grr_sample(values, spec.keep_probability(), k, rng))

    if kind == "rappor":
        bits = np.zeros((n, k), dtype=np.uint8)
        bits[np.arange(n), values] = 1
        u = rng.random((n, k))
        permanent = np.where(u < RAPPOR_F / 2, 1,
                             np.where(u < RAPPOR_F, 0, bits)).astype(np.uint8)
        report_p = np.where(permanent == 1, RAPPOR_Q, RAPPOR_P)
        reported = (rng.random((n, k)) < report_p).astype(np.uint8)
        return PerturbedColumn(spec, reported)

    if kind == "oue":
        p_one = 0.5
        p_zero = 1.0 / (math.exp(spec.epsilon) + 1.0)
        bits = np.zeros((n, k), dtype=np.uint8)
        bits[np.arange(n), values] = 1
        report_p = np.where(bits == 1, p_one, p_zero)
        return PerturbedColumn(spec, (rng.random((n, k)) < report_p).astype(np.uint8))

    if kind in ("blh", "olh"):
        g = spec.g
        seeds = _random_seeds(rng, n)
        hashed = _hash_bucket(values, seeds, g)
        keep_p = math.exp(spec.epsilon) / (math.exp(spec.epsilon) + g - 1)
        reports = _grr_sample(hashed, keep_p, g, rng)
        return PerturbedColumn(spec, (seeds, reports))

    if kind == "she":
        if spec.epsilon <= 0:
            raise InputError("she requires epsilon > 0")
        onehot = np.zeros((n, k), dtype=np.float64)
        onehot[np.arange(n), values] = 1.0
        noise = rng.laplace(0.0, 2.0 / spec.epsilon, size=(n, k))
        return PerturbedColumn(spec, onehot + noise)

    # ss: report a subset of size omega containing the true value w.p. p_in.
    omega = spec.subset_size
    e_eps = math.exp(spec.epsilon)
    p_in = omega * e_eps / (omega * e_eps + k - omega)
    include = rng.random(n) < p_in
    keys = rng.random((n, k))
    keys[np.arange(n), values] = np.inf  # others ranked first
    order = np.argsort(keys, axis=1)
    ranks = np.empty_like(order)
    ranks[np.arange(n)[:, None], order] = np.arange(k)[None, :]
    need = np.where(include, omega - 1, omega)
    members = ranks < need[:, None]
    members[np.arange(n), values] = include
    return PerturbedColumn(spec, members)


def perturb(spec: MechanismSpec, value: int, rng: np.random.Generator) -> PerturbedOutput:
    """Perturb a single symbol index."""
    return perturb_column(spec, np.array([value]), rng).row(0)


# --------------------------------------------------------------------------
# Inference-attack decoding back into the input alphabet
# --------------------------------------------------------------------------

def _uniform_over_mask(mask: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Uniform draw over the set bits of each row; uniform over all columns
    for rows with no set bit."""
    n, k = mask.shape
    counts = mask.sum(axis=1)
    pick = np.floor(rng.random(n) * np.maximum(counts, 1)).astype(np.int64)
    cs = np.cumsum(mask, axis=1)
    from_mask = np.argmax(cs > pick[:, None], axis=1)
    fallback = rng.integers(0, k, size=n)
    return np.where(counts > 0, from_mask, fallback).astype(np.int64)


def decode_column(spec: MechanismSpec, column: PerturbedColumn, rng: np.random.Generator,
                  prior=None) -> np.ndarray:
    """Decode a perturbed column into symbol indices."""
    if column.spec.kind != spec.kind or column.spec.k != spec.k:
        raise InputError("column was produced by a different mechanism spec")
    kind, k = spec.kind, spec.k

    if kind in ("grr", "exp"):
        # Output domain equals input domain: take the report as the value.
        return np.asarray(column.payload, dtype=np.int64)

    if kind in ("rappor", "oue"):
        return _uniform_over_mask(np.asarray(column.payload, dtype=bool), rng)

    if kind in ("blh", "olh"):
        seeds, reports = column.payload
        preimage = _hash_bucket(np.arange(k)[None, :], seeds[:, None], spec.g) == reports[:, None]
        return _uniform_over_mask(preimage, rng)

    if kind == "ss":
        return _uniform_over_mask(np.asarray(column.payload, dtype=bool), rng)

    # she: Bayes-optimal argmax of the posterior under the Laplace likelihood.
    if spec.epsilon <= 0:
        raise InputError("she decoding undefined at epsilon = 0 (no likelihood scale)")
    b = 2.0 / spec.epsilon
    if prior is None:
        log_prior = np.zeros(k)
    else:
        prior = np.asarray(prior, dtype=np.float64)
        if prior.shape != (k,) or (prior < 0).any() or abs(prior.sum() - 1.0) > PROB_TOL:
            raise InputError("prior must be a length-k probability vector")
        with np.errstate(divide="ignore"):
            log_prior = np.log(prior)
    y = np.asarray(column.payload, dtype=np.float64)
    # ||y - onehot(v)||_1 = sum|y| - |y_v| + |y_v - 1|
    scores = (np.abs(y) - np.abs(y - 1.0)) / b + log_prior[None, :]
    return np.argmax(scores, axis=1).astype(np.int64)


def decode(spec: MechanismSpec, output: PerturbedOutput, rng: np.random.Generator,
           prior=None) -> int:
    """Decode a single perturbed output into a symbol index."""
    return int(decode_column(spec, stack_outputs(spec, [output]), rng, prior)[0])


# --------------------------------------------------------------------------
# Frequency estimation
# --------------------------------------------------------------------------

def _support_rates(spec: MechanismSpec) -> tuple[float, float]:
    """Per-symbol support probabilities (true symbol, other symbol)."""
    kind, k = spec.kind, spec.k
    e_eps = math.exp(spec.epsilon)
    if kind in ("grr", "exp"):
        p = spec.keep_probability()
        return p, (1.0 - p) / (k - 1)
    if kind == "oue":
        return 0.5, 1.0 / (e_eps + 1.0)
    if kind == "rappor":
        p_hi = (1 - RAPPOR_F / 2) * RAPPOR_Q + (RAPPOR_F / 2) * RAPPOR_P
        p_lo = (RAPPOR_F / 2) * RAPPOR_Q + (1 - RAPPOR_F / 2) * RAPPOR_P
        return p_hi, p_lo
    if kind in ("blh", "olh"):
        g = spec.g
        return e_eps / (e_eps + g - 1), 1.0 / g
    if kind == "ss":
        omega = spec.subset_size
        p_in = omega * e_eps / (omega * e_eps + k - omega)
        q_in = (p_in * (omega - 1) + (1 - p_in) * omega) / (k - 1)
        return p_in, q_in
    raise UnsupportedMechanismError(f"{kind} has no support-count estimator")


def estimate_frequencies(spec: MechanismSpec, outputs) -> np.ndarray:
    """Unbiased frequency estimate from perturbed reports, clipped to [0, 1]
    and renormalized."""
    column = stack_outputs(spec, outputs)
    n = len(column)
    if n == 0:
        raise InputError("no outputs to estimate from")
    kind, k = spec.kind, spec.k

    if kind == "she":
        est = np.asarray(column.payload, dtype=np.float64).mean(axis=0)
    else:
        if kind in ("grr", "exp"):
            support = np.bincount(np.asarray(column.payload), minlength=k).astype(np.float64)
        elif kind in ("rappor", "oue", "ss"):
            support = np.asarray(column.payload, dtype=np.float64).sum(axis=0)
        else:  # blh, olh
            seeds, reports = column.payload
            preimage = _hash_bucket(np.arange(k)[None, :], seeds[:, None], spec.g) == reports[:, None]
            support = preimage.sum(axis=0).astype(np.float64)
        p, q = _support_rates(spec)
        if p == q:
            est = np.full(k, 1.0 / k)
        else:
            est = (support / n - q) / (p - q)

    est = np.clip(est, 0.0, 1.0)
    total = est.sum()
    if total <= 0:
        return np.full(k, 1.0 / k)
    return est / total
