"""Seeded randomized verification suites.

Each suite sweeps a list of configurations and runs ``TrialSpec.trials``
independent trials per configuration.  A trial evaluates named checks of the
form ``value <= limit``; its residual is the worst ratio ``value / limit``, so
a trial passes iff its residual is at most one.  Every trial draws from its
own generator seeded by ``(spec.seed, suite, configuration, trial)``; the seed
and an instance digest are recorded so one failing trial can be replayed with
:func:`rerun_trial`.

Limits of sequences are witnessed by schedules: a chain converges when its
residual envelope is non-increasing up to ``slack`` and its final residual is
below ``convergence``.  The envelope is the bound
``max_L sum_w |f_n(w) - f(w)| |L(k_w)|`` (or its norm analogue), which
dominates the raw residual ``|L(int f_n - int f)|`` at every step; the raw
residual itself need not be monotone for complex kernels.
"""

from __future__ import annotations

import csv
import hashlib
import io
import itertools
import json
import zlib
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import NonNormalError
from .measurable import (
    AtomicSpace,
    ComplexMeasure,
    MeasurableFunction,
    integrate_scalar,
    setwise_defect,
    total_variation,
)
from .normed import SpaceDescriptor, dual_ball_matrix, pair
from .operator import (
    OperatorProjectionFamily,
    check_multiplicative,
    integrate_operator,
    operator_norm,
    series_operator_integral,
    series_operator_measure,
    slice_by_vector,
    spectral_measure_of,
)
from .quantum import (
    Instrument,
    apply_superoperator,
    instrument_apply,
    mixed_state_extension_check,
    operation_integrate,
    operation_projection,
    povm_integrate,
    povm_probabilities,
    trace_pair,
)
from . import sampling
from .vector import (
    VectorProjectionFamily,
    family_of,
    integrate_vector,
    project,
    semivariation,
    series_integral,
    series_vector_measure,
    weighted_measure,
)

DEFAULT_TOLERANCES = {
    "pairing": 1e-11,
    "convergence": 1e-9,
    "slack": 1e-12,
    "reconstruction": 1e-9,
    "projection": 1e-10,
    "calculus": 1e-9,
    "multiplicative": 1e-10,
    "uniqueness": 1e-9,
    "oracle_window": 1e-3,
    "probability": 1e-10,
    "nonnegative": 1e-12,
    "psd": 1e-10,
    "contract": 1e-11,
    "extension": 1e-9,
    "series_exact": 1e-14,
}


@dataclass(frozen=True)
class TrialSpec:
    """Parameters shared by all suites.

    ``trials`` counts trials per configuration.  ``chain_kind`` selects the
    convergence chains: ``"truncate"`` / ``"geometric"`` / ``"constant"``
    for MCT, ``"geometric"`` / ``"harmonic"`` / ``"exact"`` for the DCT
    suites (``"default"`` picks the first).  ``violation_rate`` injects
    chains that break domination, which the DCT suites must reject.
    """

    seed: int = 0
    trials: int = 20
    dims: tuple = (2, 4, 8, 16)
    atom_counts: tuple = (1, 2, 3, 5, 8, 12)
    norms: tuple = ("l1", "l2", "linf")
    chain_length: int = 40
    chain_kind: str = "default"
    violation_rate: float = 0.0
    tolerances: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        object.__setattr__(self, "atom_counts", tuple(int(m) for m in self.atom_counts))
        object.__setattr__(self, "norms", tuple(self.norms))
        if self.trials < 0:
            raise ValueError("trials must be non-negative")
        if not self.dims or min(self.dims) < 1:
            raise ValueError("dimensions must be positive")
        if not self.atom_counts or min(self.atom_counts) < 1:
            raise ValueError("atom counts must be positive")
        if self.chain_length < 1:
            raise ValueError("chain_length must be positive")
        for n in self.norms:
            SpaceDescriptor(1, n)
        for k, v in self.tolerances.items():
            if k not in DEFAULT_TOLERANCES:
                raise ValueError(f"unknown tolerance {k!r}")
            if not v > 0:
                raise ValueError(f"tolerance {k!r} must be positive")

    def tol(self, name):
        return self.tolerances.get(name, DEFAULT_TOLERANCES[name])


@dataclass
class VerificationReport:
    suite: str
    trials_run: int = 0
    failures: list = field(default_factory=list)
    rejected: list = field(default_factory=list)
    max_residual: float = 0.0
    check_max: dict = field(default_factory=dict)
    rows: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_dict(self) -> dict:
        d = asdict(self)
        d["pass"] = self.passed
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        flag = d.pop("pass", None)
        rep = cls(**d)
        if flag is not None and flag != rep.passed:
            raise ValueError("pass flag disagrees with failures")
        return rep

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["suite", "config", "trial", "seed", "digest", "residual", "pass"])
        for r in self.rows:
            w.writerow([self.suite, r["config"], r["trial"], r["seed"], r["digest"],
                        repr(r["residual"]), r["pass"]])
        return buf.getvalue()


class _Trial:
    """Collects checks and the instance digest for one trial."""

    def __init__(self):
        self.checks = []
        self._hash = hashlib.sha256()
        self.rejected = None

    def digest_of(self, *arrays):
        for a in arrays:
            self._hash.update(np.ascontiguousarray(np.asarray(a, dtype=complex)).tobytes())

    @property
    def digest(self):
        return self._hash.hexdigest()[:16]

    def check(self, name, value, limit):
        self.checks.append((name, float(value), float(limit)))

    def flag(self, name, ok):
        self.check(name, 0.0 if ok else 1.0, 0.5)


def _ratio(value, limit):
    if value <= 0:
        return 0.0
    return value / limit


def derive_seed(seed, suite, config_index, trial) -> int:
    ss = np.random.SeedSequence([int(seed), zlib.crc32(suite.encode()), int(config_index), int(trial)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


# chains --------------------------------------------------------------------


def _mct_chain(f, L, kind, rng):
    """Non-decreasing non-negative chain ending at ``f``; returns (L, m) array."""
    if kind in ("default", "truncate"):
        step = f.max() / L if f.size else 0.0
        damp = rng.random(f.shape)
        chain = []
        for n in range(1, L + 1):
            if n == L:
                chain.append(f.copy())
                continue
            c = 0.5 * (1 - n / L)
            chain.append(np.minimum(f, n * step) * (1 - c * damp))
        return np.array(chain)
    if kind == "geometric":
        return np.array([(1 - 2.0**-n) * f for n in range(1, L + 1)])
    if kind == "constant":
        return np.array([f for _ in range(L)])
    raise ValueError(f"unknown MCT chain kind {kind!r}")


def _dct_eps(L, kind):
    n = np.arange(1, L + 1, dtype=float)
    if kind in ("default", "geometric"):
        return 2.0**-n
    if kind == "harmonic":
        return 1.0 / n
    if kind == "exact":
        return np.zeros(L)
    raise ValueError(f"unknown DCT chain kind {kind!r}")


def _dct_chain(f, g, L, kind, rng):
    eps = _dct_eps(L, kind)
    signs = np.exp(2j * np.pi * rng.random((L, f.size)))
    return f[None, :] + eps[:, None] * g[None, :] * signs


def _schedule_checks(trial, raw, envelope, spec, scale, literal_monotone=False):
    slack = spec.tol("slack") * max(1.0, scale)
    trial.check("raw_below_envelope", float(np.max(raw - envelope)), slack)
    if len(envelope) > 1:
        trial.check("envelope_monotone", float(np.max(np.diff(envelope))), slack)
        if literal_monotone:
            trial.check("residual_monotone", float(np.max(np.diff(raw))), slack)
    trial.check("final_residual", raw[-1], spec.tol("convergence"))


def _pairing_schedule(K, chain, f, C):
    """Raw weak-* residuals and envelopes for kernel rows ``K``."""
    fam_space = AtomicSpace.range(K.shape[0])
    I = f @ K
    raw, env = [], []
    A = np.abs(C @ K.T)  # |L(k_w)| per sampled functional
    for fn in chain:
        In = integrate_vector(MeasurableFunction.tabulated(fn, fam_space),
                              VectorProjectionFamily(SpaceDescriptor(K.shape[1]), fam_space, K))
        raw.append(float(np.abs(C @ (In - I)).max()))
        env.append(float((A @ np.abs(fn - f)).max()))
    return np.array(raw), np.array(env)


def _norm_schedule(K, chain, f, space):
    fam = VectorProjectionFamily(space, AtomicSpace.range(K.shape[0]), K)
    I = f @ K
    knorm = np.linalg.norm(K, ord={"l1": 1, "l2": 2, "linf": np.inf}[space.norm], axis=1)
    raw, env = [], []
    for fn in chain:
        In = integrate_vector(MeasurableFunction.tabulated(fn, fam.measurable), fam)
        raw.append(space.vector_norm(In - I))
        env.append(float(np.abs(fn - f) @ knorm))
    return np.array(raw), np.array(env)


def _family_kernels(kind, d, m, norm, rng, n_vectors=3):
    """Kernel matrices to run vector criteria on: the family or its slices."""
    space = SpaceDescriptor(d, norm)
    if kind == "vector":
        fam = sampling.random_vector_family(space, m, rng)
        return [fam.kernel], space, (fam.kernel,)
    ofam = sampling.random_operator_family(d, m, rng, norm)
    xs = [sampling.random_unit_vector(space, rng) for _ in range(n_vectors)]
    return [slice_by_vector(ofam, x).kernel for x in xs], space, (ofam.kernel, *xs)


def _convergence_config(spec, t):
    d = spec.dims[t % len(spec.dims)]
    norm = spec.norms[(t // len(spec.dims)) % len(spec.norms)]
    m = spec.atom_counts[t % len(spec.atom_counts)]
    return d, norm, m


def _trial_mct(cfg, seed, spec, t):
    rng = np.random.default_rng(seed)
    trial = _Trial()
    d, norm, m = _convergence_config(spec, t)
    kernels, space, inst = _family_kernels(cfg, d, m, norm, rng)
    f = np.abs(rng.standard_normal(m)) * (rng.random(m) > 0.2)
    chain = _mct_chain(f, spec.chain_length, spec.chain_kind, rng)
    trial.digest_of(*inst, f)
    if np.any(np.diff(chain, axis=0) < 0) or np.any(chain < 0):
        trial.rejected = "chain is not non-decreasing and non-negative"
        return trial
    C = dual_ball_matrix(space, 16, int(rng.integers(2**31)))
    scale = max(float(np.abs(f).sum() * max(np.abs(K).max() for K in kernels)), 1.0)
    literal = spec.chain_kind in ("geometric", "constant")
    for K in kernels:
        raw, env = _pairing_schedule(K, chain, f, C)
        _schedule_checks(trial, raw, env, spec, scale, literal)
    return trial


def _dominated(chain, f, g, L, kind):
    G = np.abs(f) + g * _dct_eps(L, kind).max(initial=0.0)
    return np.all(np.abs(chain) <= G[None, :] * (1 + 1e-12))


def _dct_instance(cfg, seed, spec, t):
    rng = np.random.default_rng(seed)
    trial = _Trial()
    d, norm, m = _convergence_config(spec, t)
    kernels, space, inst = _family_kernels(cfg, d, m, norm, rng)
    f = sampling.complex_normal(rng, m)
    g = np.abs(rng.standard_normal(m)) + 0.1
    chain = _dct_chain(f, g, spec.chain_length, spec.chain_kind, rng)
    if rng.random() < spec.violation_rate:
        chain[0, 0] = 3 * (abs(f[0]) + g[0])
    trial.digest_of(*inst, f, g)
    if not _dominated(chain, f, g, spec.chain_length, spec.chain_kind):
        trial.rejected = "domination |f_n| <= g violated"
    return trial, rng, kernels, space, f, chain


def _trial_dct(cfg, seed, spec, t):
    trial, rng, kernels, space, f, chain = _dct_instance(cfg, seed, spec, t)
    if trial.rejected:
        return trial
    C = dual_ball_matrix(space, 16, int(rng.integers(2**31)))
    scale = max(float(np.abs(f).sum() * max(np.abs(K).max() for K in kernels)), 1.0)
    for K in kernels:
        raw, env = _pairing_schedule(K, chain, f, C)
        _schedule_checks(trial, raw, env, spec, scale, spec.chain_kind == "exact")
    return trial


def _trial_dct_proper(cfg, seed, spec, t):
    trial, rng, kernels, space, f, chain = _dct_instance(cfg, seed, spec, t)
    if trial.rejected:
        return trial
    scale = max(float(np.abs(f).sum() * max(np.abs(K).max() for K in kernels)), 1.0)
    for K in kernels:
        raw, env = _norm_schedule(K, chain, f, space)
        _schedule_checks(trial, raw, env, spec, scale, spec.chain_kind == "exact")
    return trial


# lewis pairing ---------------------------------------------------------------


def _random_function(rng, space):
    kind = int(rng.integers(4))
    if kind == 0:
        return MeasurableFunction.tabulated(sampling.complex_normal(rng, len(space)), space)
    if kind == 1:
        return MeasurableFunction.poly(sampling.complex_normal(rng, 3))
    if kind == 2:
        return MeasurableFunction.exp(sampling.complex_normal(rng, 1)[0])
    members = [a for a in space.atoms if rng.random() < 0.5]
    return MeasurableFunction.indicator(members)


def _trial_lewis(cfg, seed, spec, t):
    norm, d = cfg
    rng = np.random.default_rng(seed)
    trial = _Trial()
    m = int(rng.integers(1, 33))
    space = SpaceDescriptor(d, norm)
    labels = np.exp(2j * np.pi * rng.random(m)) * rng.random(m)
    S = AtomicSpace.from_labels(labels)
    fam = VectorProjectionFamily(space, S, sampling.complex_normal(rng, (m, d)))
    f = _random_function(rng, S)
    c = sampling.complex_normal(rng, d)
    c = c / space.dual_norm(c)
    trial.digest_of(fam.kernel, labels, c)
    lhs = pair(c, integrate_vector(f, fam))
    rhs = integrate_scalar(f, project(fam, c))
    scale = float(np.abs(f.values(S)) @ np.abs(fam.kernel @ c))
    trial.check("lewis_identity", abs(lhs - rhs), spec.tol("pairing") * max(scale, 1e-300))
    return trial


# semivariation -------------------------------------------------------------


def phase_grid_oracle(V, resolution=1e-3):
    """``sup_L sum |L(v_w)|`` for at most three l2 vectors.

    Uses ``sup = max_t ||sum_w e^{i t_w} v_w||``, fixing the first phase,
    maximising the last one in closed form and gridding the middle one.
    Returns ``(value, error)`` with ``error <= resolution``.
    """
    V = np.asarray(V, dtype=complex)
    m = V.shape[0]
    if m == 0:
        return 0.0, 0.0
    if m == 1:
        return float(np.linalg.norm(V[0])), 0.0

    def pair_max(a, b):
        # max over t of ||a + e^{it} b|| for rows of a
        return np.sqrt(np.maximum(
            (np.abs(a) ** 2).sum(-1) + (np.abs(b) ** 2).sum(-1) + 2 * np.abs((a * b.conj()).sum(-1)), 0))

    if m == 2:
        return float(pair_max(V[0][None], V[1])[0]), 0.0
    if m != 3:
        raise ValueError("oracle handles at most three vectors")
    lip = float(np.linalg.norm(V[1]))
    n = max(16, int(np.ceil(np.pi * lip / resolution)) + 1)
    t = 2 * np.pi * np.arange(n) / n
    a = V[0][None, :] + np.exp(1j * t)[:, None] * V[1][None, :]
    return float(pair_max(a, V[2]).max()), np.pi * lip / n


def _brute_four_sup(V, space):
    best = 0.0
    for r in range(1, V.shape[0] + 1):
        for F in itertools.combinations(range(V.shape[0]), r):
            best = max(best, space.vector_norm(V[list(F)].sum(axis=0)))
    return 4 * best


def _trial_semivariation(cfg, seed, spec, t):
    norm = cfg
    rng = np.random.default_rng(seed)
    trial = _Trial()
    small = t % 2 == 0
    d = int(rng.integers(1, 4)) if small else spec.dims[t % len(spec.dims)]
    m = int(rng.integers(1, 4)) if small else min(12, spec.atom_counts[t % len(spec.atom_counts)])
    space = SpaceDescriptor(d, norm)
    fam = sampling.random_vector_family(space, m, rng)
    trial.digest_of(fam.kernel)
    bp = semivariation(fam, budget=128, seed=int(rng.integers(2**31)))
    scale = max(bp.upper, 1.0)
    trial.check("lower_le_upper", bp.lower - bp.upper, spec.tol("slack") * scale)
    four = _brute_four_sup(fam.kernel, space)
    trial.check("four_sup_honoured", bp.upper - four, spec.tol("slack") * scale)
    if d == 1:
        tv = float(np.abs(fam.kernel).sum())
        trial.check("scalar_equals_tv", max(abs(bp.lower - tv), abs(bp.upper - tv)),
                    spec.tol("slack") * max(tv, 1.0) * 10)
    if norm == "l2" and m <= 3 and d <= 3:
        w = spec.tol("oracle_window")
        val, _ = phase_grid_oracle(fam.kernel, resolution=w)
        trial.check("oracle_above_lower", bp.lower - w - val, w)
        trial.check("oracle_below_upper", val - bp.upper - w, w)

    # weighted measure: its semivariation dominates sampled sup of int |g| d|mu_L|
    g = np.abs(rng.standard_normal(m))
    gf = MeasurableFunction.tabulated(g, fam.measurable)
    mg = family_of(weighted_measure(gf, fam))
    bpg = semivariation(mg, budget=128, seed=int(rng.integers(2**31)))
    C = dual_ball_matrix(space, 64, int(rng.integers(2**31)))
    sampled = float((np.abs(C @ fam.kernel.T) @ g).max())
    trial.check("weighted_sampled_below_upper", sampled - bpg.upper, spec.tol("slack") * max(bpg.upper, 1.0))
    one = semivariation(family_of(weighted_measure(MeasurableFunction.constant(1), fam)),
                        budget=128, seed=7)
    same = semivariation(fam, budget=128, seed=7)
    trial.flag("unit_weight_identical", one == same)

    # continuity on a truncated geometric tail: upper(E_n) <= 2^-n, non-increasing
    n_atoms = 16
    units = np.array([sampling.random_unit_vector(space, rng) for _ in range(n_atoms)])
    vecs = units * (2.0 ** -np.arange(1, n_atoms + 1))[:, None]
    S = AtomicSpace.range(n_atoms, kind="truncated-countable", tail_bound=2.0**-n_atoms)
    tail_fam = VectorProjectionFamily(space, S, vecs, 2.0**-n_atoms)
    uppers = np.array([
        semivariation(tail_fam, S.subset(range(n, n_atoms)), budget=32, seed=n).upper
        for n in range(n_atoms + 1)
    ])
    trial.check("continuity_monotone", float(np.max(np.diff(uppers))), spec.tol("slack"))
    trial.check("continuity_geometric", float(np.max(uppers - 2.0 ** -np.arange(n_atoms + 1))),
                spec.tol("slack"))
    trial.check("continuity_final", uppers[-1] - tail_fam.tail_bound, spec.tol("slack"))
    return trial


# boundedness -------------------------------------------------------------------


def _trial_boundedness(cfg, seed, spec, t):
    rng = np.random.default_rng(seed)
    trial = _Trial()
    m = spec.atom_counts[t % len(spec.atom_counts)]
    S = AtomicSpace.range(m)
    B = float(rng.random() * 5 + 0.1)
    fam_size = int(rng.integers(1, 20))
    W = sampling.complex_normal(rng, (fam_size, m))
    W = W * (B / np.abs(W).max(axis=1, keepdims=True)) * rng.random((fam_size, 1))
    trial.digest_of(W)
    measures = [ComplexMeasure(S, w) for w in W]
    point_sup = max(float(np.abs(mu.weights).max()) for mu in measures)
    trial.check("pointwise_bound", point_sup - B, 1e-12 * B)
    certificate = max(total_variation(mu) for mu in measures)
    trial.check("tv_certificate", certificate - 2 * m * B, 1e-12 * B)
    if m <= 12:
        masks = (np.arange(2**m)[:, None] >> np.arange(m)) & 1
        for mu in measures:
            sup_sets = float(np.abs(masks @ mu.weights).max())
            trial.check("tv_le_four_sup", total_variation(mu) - 4 * sup_sets, 1e-12 * max(B, 1.0))

    # setwise bound along mu_i -> mu with bounded total variation
    mu = sampling.random_measure(S, rng)
    nu = sampling.random_measure(S, rng)
    f = MeasurableFunction.tabulated(sampling.complex_normal(rng, m), S)
    sup_f = f.sup_norm(S)
    M = total_variation(mu) + total_variation(nu)
    base = integrate_scalar(f, mu)
    for i in range(1, 31):
        for mu_i in (mu + (1.0 / i) * nu, (1 - 1.0 / i) * mu):
            gap = abs(integrate_scalar(f, mu_i) - base)
            bound = sup_f * setwise_defect(mu_i, mu)
            trial.check("setwise_bound", gap - bound, 1e-12 * max(M * sup_f, 1.0))
            trial.check("bounded_tv", total_variation(mu_i) - M, 1e-12 * max(M, 1.0))
    return trial


# spectral ----------------------------------------------------------------------


_KINDS = ("hermitian", "unitary", "normal")


def _spectral_functions(rng):
    a = complex(sampling.complex_normal(rng, 1)[0]) * 0.5
    return [
        MeasurableFunction.poly([0, 1]),
        MeasurableFunction.poly([0, 0, 1]),
        MeasurableFunction.poly(sampling.complex_normal(rng, 3)),
        MeasurableFunction.poly(sampling.complex_normal(rng, 4)),
        MeasurableFunction.exp(a),
    ]


def _oracle_apply(f, U, lam):
    vals = f.values(AtomicSpace.from_labels(lam))
    return (U * vals[None, :]) @ U.conj().T, float(np.abs(vals).max())


def _match_clusters(E1, E2):
    # pair clusters by nearest eigenvalue label
    out = []
    for j, lam in enumerate(E1.eigenvalues):
        k = int(np.argmin(np.abs(E2.eigenvalues - lam)))
        out.append((j, k))
    return out


def _trial_spectral(cfg, seed, spec, t):
    d = cfg
    rng = np.random.default_rng(seed)
    trial = _Trial()
    kind = _KINDS[t % 3]
    degenerate = (t // 3) % 2 == 0
    T, U, lam = sampling.random_normal_matrix(d, rng, kind, degenerate)
    trial.digest_of(T)
    normT = operator_norm(T)
    E = spectral_measure_of(T)
    for name, v in E.defects().items():
        trial.check(f"projection_{name}", v, spec.tol("projection"))
    recon = np.einsum("j,jab->ab", E.eigenvalues, E.projections)
    trial.check("reconstruction", operator_norm(recon - T), spec.tol("reconstruction") * normT)

    fs = _spectral_functions(rng)
    for i, f in enumerate(fs):
        ref, fmax = _oracle_apply(f, U, lam)
        got = E.integrate(f)
        trial.check(f"calculus_{i}", operator_norm(got - ref), spec.tol("calculus") * max(fmax, 1.0))
    for f, g in ((fs[0], fs[0]), (fs[2], fs[4]), (fs[3], fs[1])):
        scale = max(f.sup_norm(E.measurable) * g.sup_norm(E.measurable), 1.0)
        trial.check("multiplicative", check_multiplicative(E, f, g), spec.tol("multiplicative") * scale)

    # uniqueness: rebuild from a permuted basis and compare each E({lam_j})
    perm = rng.permutation(d)
    Q = np.eye(d)[perm]
    E2 = spectral_measure_of(Q @ T @ Q.T)
    trial.flag("uniqueness_cluster_count", len(E2.eigenvalues) == len(E.eigenvalues))
    if len(E2.eigenvalues) == len(E.eigenvalues):
        worst = max(operator_norm(E.projections[j] - Q.T @ E2.projections[k] @ Q)
                    for j, k in _match_clusters(E, E2))
        trial.check("uniqueness", worst, spec.tol("uniqueness"))

    # a visibly non-normal perturbation must be rejected
    N = np.triu(sampling.complex_normal(rng, (d, d)), 1)
    N *= 0.1 * max(normT, 1.0) / max(operator_norm(N), 1e-300)
    rejected = False
    try:
        spectral_measure_of(T + U @ N @ U.conj().T)
    except NonNormalError:
        rejected = True
    trial.flag("non_normal_rejected", rejected or d == 1)
    return trial


# quantum -----------------------------------------------------------------------


def _trial_quantum(cfg, seed, spec, t):
    d = cfg
    rng = np.random.default_rng(seed)
    trial = _Trial()
    n_out = int(rng.integers(2, 6))
    P = sampling.random_povm(d, n_out, rng)
    rho = sampling.random_density(d, rng, rank=int(rng.integers(1, d + 1)))
    trial.digest_of(P.effects, rho.matrix)
    p = povm_probabilities(P, rho).weights
    trial.check("probability_nonnegative", float(-p.real.min()), spec.tol("nonnegative"))
    trial.check("probability_real", float(np.abs(p.imag).max()), spec.tol("probability"))
    trial.check("probability_total", abs(p.sum() - 1), spec.tol("probability"))

    fpos = MeasurableFunction.tabulated(np.abs(rng.standard_normal(n_out)), P.measurable)
    M = povm_integrate(fpos, P)
    trial.check("povm_integral_psd", float(-np.linalg.eigvalsh((M + M.conj().T) / 2).min()),
                spec.tol("psd"))

    inst = sampling.random_instrument(d, n_out, rng)
    f = MeasurableFunction.tabulated(sampling.complex_normal(rng, n_out), inst.measurable)
    S = operation_integrate(f, inst)
    for _ in range(4):
        T = sampling.complex_normal(rng, (d, d))
        r = sampling.random_density(d, rng).matrix
        lhs = trace_pair(T, apply_superoperator(S, r))
        rhs = integrate_scalar(f, operation_projection(inst, T, r))
        scale = max(operator_norm(T) * f.sup_norm(inst.measurable), 1.0)
        trial.check("operation_contract", abs(lhs - rhs), spec.tol("contract") * scale)
    out = instrument_apply(inst, inst.measurable.whole(), rho)
    trial.check("trace_preserved", abs(out.trace - rho.trace), spec.tol("probability"))

    # bilinearity of (T, rho) -> E_{T,rho}
    T1, T2 = sampling.complex_normal(rng, (2, d, d))
    r1, r2 = sampling.random_density(d, rng).matrix, sampling.random_density(d, rng).matrix
    a, b = sampling.complex_normal(rng, 2)
    combo = operation_projection(inst, a * T1 + b * T2, r1).weights
    sep = a * operation_projection(inst, T1, r1).weights + b * operation_projection(inst, T2, r1).weights
    trial.check("bilinear_T", float(np.abs(combo - sep).max()), spec.tol("contract") * 10)
    combo = operation_projection(inst, T1, 0.3 * r1 + 0.7 * r2).weights
    sep = 0.3 * operation_projection(inst, T1, r1).weights + 0.7 * operation_projection(inst, T1, r2).weights
    trial.check("bilinear_rho", float(np.abs(combo - sep).max()), spec.tol("contract") * 10)

    proj = sampling.random_projective_povm(d, rng)
    basis = sampling.random_unitary(d, rng)
    rep = mixed_state_extension_check(proj, Instrument.luders(proj), basis, tol=spec.tol("extension"))
    trial.check("luders_extension", rep["max_residual"], spec.tol("extension"))
    return trial


# series ----------------------------------------------------------------------


def _trial_series(cfg, seed, spec, t, N=30, N_ref=60):
    norm = cfg
    rng = np.random.default_rng(seed)
    trial = _Trial()
    m = int(rng.integers(2, 11))
    d = spec.dims[t % len(spec.dims)]
    space = SpaceDescriptor(d, norm)
    S = AtomicSpace.range(m)
    lams = [sampling.random_probability(S, rng) for _ in range(N_ref)]
    xs = [sampling.random_unit_vector(space, rng) for _ in range(N_ref)]
    f = MeasurableFunction.tabulated(sampling.complex_normal(rng, m), S)
    sup_f = f.sup_norm(S)
    trial.digest_of(*(lam.weights for lam in lams), *xs, f.values(S))

    mu = series_vector_measure(lams[:N], xs[:N], space)
    got = integrate_vector(f, family_of(mu))
    closed = series_integral(f, lams[:N], xs[:N])
    trial.check("closed_form", space.vector_norm(got - closed), spec.tol("series_exact") * max(sup_f, 1.0))
    trial.flag("tail_bound", mu.tail_norm_bound == 2.0**-N)
    ref = integrate_vector(f, family_of(series_vector_measure(lams, xs, space)))
    trial.check("tail_honoured", space.vector_norm(got - ref), 2.0**-N * sup_f)

    Ts = [sampling.random_unit_operator(d, rng, norm) for _ in range(N_ref)]
    x = sampling.random_unit_vector(space, rng)
    om = series_operator_measure(lams, Ts, N, norm)
    fam = OperatorProjectionFamily(d, S, om.atom_operators, space, om.tail_bound)
    got = integrate_operator(f, fam) @ x
    closed = series_operator_integral(f, lams[:N], Ts[:N], x)
    trial.check("operator_closed_form", space.vector_norm(got - closed),
                spec.tol("series_exact") * max(sup_f, 1.0))
    ref_om = series_operator_measure(lams, Ts, N_ref, norm)
    ref = np.einsum("w,wij->ij", f.values(S), ref_om.atom_operators) @ x
    trial.check("operator_tail_honoured", space.vector_norm(got - ref), 2.0**-N * sup_f)
    return trial


# suite registry ------------------------------------------------------------------


def _configs(name, spec):
    if name == "lewis":
        return [(n, d) for n in spec.norms for d in spec.dims]
    if name in ("spectral", "quantum"):
        return list(spec.dims)
    if name in ("mct", "dct", "dct_proper"):
        return ["vector", "operator"]
    if name in ("semivariation", "series"):
        return list(spec.norms)
    return ["default"]


_TRIALS = {
    "lewis": _trial_lewis,
    "mct": _trial_mct,
    "dct": _trial_dct,
    "dct_proper": _trial_dct_proper,
    "semivariation": _trial_semivariation,
    "boundedness": _trial_boundedness,
    "spectral": _trial_spectral,
    "quantum": _trial_quantum,
    "series": _trial_series,
}

SUITES = tuple(_TRIALS)


def _config_key(cfg):
    return cfg if isinstance(cfg, str) else json.dumps(cfg)


def rerun_trial(suite, spec: TrialSpec, config_index, trial, seed=None):
    """Re-run a single trial; returns ``(checks, digest, rejected)``."""
    cfg = _configs(suite, spec)[config_index]
    if seed is None:
        seed = derive_seed(spec.seed, suite, config_index, trial)
    tr = _TRIALS[suite](cfg, seed, spec, trial)
    return tr.checks, tr.digest, tr.rejected


def run_suite(suite: str, spec: TrialSpec) -> VerificationReport:
    if suite not in _TRIALS:
        raise ValueError(f"unknown suite {suite!r}; choose from {SUITES}")
    report = VerificationReport(suite)
    for ci, cfg in enumerate(_configs(suite, spec)):
        for t in range(spec.trials):
            seed = derive_seed(spec.seed, suite, ci, t)
            tr = _TRIALS[suite](cfg, seed, spec, t)
            key = _config_key(cfg)
            if tr.rejected:
                report.rejected.append({"config": key, "trial": t, "seed": seed,
                                        "digest": tr.digest, "reason": tr.rejected})
                continue
            report.trials_run += 1
            worst, failed = 0.0, []
            for name, value, limit in tr.checks:
                r = _ratio(value, limit)
                worst = max(worst, r)
                prev = report.check_max.get(name)
                if prev is None or value > prev["value"]:
                    report.check_max[name] = {"value": value, "limit": limit}
                if r > 1:
                    failed.append({"check": name, "value": value, "limit": limit})
            ok = not failed
            report.rows.append({"config": key, "trial": t, "seed": seed,
                                "digest": tr.digest, "residual": worst, "pass": ok})
            report.max_residual = max(report.max_residual, worst)
            if not ok:
                report.failures.append({"config": key, "config_index": ci, "trial": t,
                                        "seed": seed, "digest": tr.digest,
                                        "residual": worst, "checks": failed})
    return report


def run_lewis(spec):
    """Dual-pairing identity ``L(int f dmu) = int f dmu_L`` on random triples."""
    return run_suite("lewis", spec)


def run_mct(spec):
    """Monotone convergence for vector families and operator slices."""
    return run_suite("mct", spec)


def run_dct(spec):
    """Dominated convergence (weak-*) with atomwise domination checked first."""
    return run_suite("dct", spec)


def run_dct_proper(spec):
    """Dominated convergence in norm, and strong-operator for operator families."""
    return run_suite("dct_proper", spec)


def run_semivariation_suite(spec):
    return run_suite("semivariation", spec)


def run_boundedness_suite(spec):
    return run_suite("boundedness", spec)


def run_spectral_suite(spec):
    return run_suite("spectral", spec)


def run_quantum_suite(spec):
    return run_suite("quantum", spec)


def run_series_suite(spec):
    return run_suite("series", spec)
