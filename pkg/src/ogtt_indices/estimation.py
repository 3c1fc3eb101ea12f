"""Per-record parameter estimation by regularized multi-start least squares.

With five samples and five parameters the problem is exactly determined
and multimodal, so a single local search is not trustworthy.  fit() runs
a deterministic multi-start: low-discrepancy starting points inside the
bounds, a bounded simplex descent per start, and best-objective selection
with a total tie-break order.  The objective is

    sum(residuals^2)  +  prior_weight * penalty

where the penalty (computed in scaled coordinates) pulls g0 toward the
measured fasting value and alpha, omega toward the centers of their
bounds.  This is the penalized-least-squares realization of a MAP point
estimate with Gaussian priors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConfigError, NonConvergenceError
from .model import SAMPLE_TIMES, AckermanParams, OgttRecord
from .optim import halton_points, nelder_mead

Interval = tuple[float, float]

#: Default parameter bounds.  g0 bounds are per-record (see FitConfig.g0_bounds).
DEFAULT_A_BOUNDS: Interval = (1.0, 400.0)
DEFAULT_ALPHA_BOUNDS: Interval = (0.001, 0.1)
DEFAULT_OMEGA_BOUNDS: Interval = (0.005, 0.2)
DEFAULT_DELTA_BOUNDS: Interval = (-math.pi, math.pi)
#: Relative default g0 bounds as multiples of the measured fasting value.
G0_RELATIVE_BOUNDS = (0.5, 1.5)

DEFAULT_N_STARTS = 20
DEFAULT_PRIOR_WEIGHT = 0.01
DEFAULT_SEED = 0
DEFAULT_MAX_ITERATIONS = 2000
DEFAULT_CONVERGENCE_TOL = 1e-6

#: Candidate starting points scored per fit before the descents are run.
#: Fixed (not tied to n_starts) so that the set of chosen starts is nested
#: as n_starts grows, which keeps best-of-N monotone.
START_POOL_SIZE = 256


def _check_interval(name: str, iv: Interval, positive_lo: bool = False) -> None:
    lo, hi = iv
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise ConfigError(f"{name} bounds must be finite, got {iv}")
    if not lo < hi:
        raise ConfigError(f"{name} bounds must satisfy lo < hi, got {iv}")
    if positive_lo and lo <= 0.0:
        raise ConfigError(f"{name} lower bound must be > 0, got {lo}")


@dataclass(frozen=True)
class FitConfig:
    """Search bounds and optimizer settings for fit().

    g0_bounds None means "derive per record": [0.5, 1.5] times the
    measured fasting value.  delta bounds must lie within [-pi, pi] so
    the stored (wrapped) phase stays inside them.
    """

    g0_bounds: Interval | None = None
    a_bounds: Interval = DEFAULT_A_BOUNDS
    alpha_bounds: Interval = DEFAULT_ALPHA_BOUNDS
    omega_bounds: Interval = DEFAULT_OMEGA_BOUNDS
    delta_bounds: Interval = DEFAULT_DELTA_BOUNDS
    n_starts: int = DEFAULT_N_STARTS
    prior_weight: float = DEFAULT_PRIOR_WEIGHT
    seed: int = DEFAULT_SEED
    max_iterations: int = DEFAULT_MAX_ITERATIONS
    convergence_tol: float = DEFAULT_CONVERGENCE_TOL

    def __post_init__(self):
        if self.g0_bounds is not None:
            _check_interval("g0", self.g0_bounds, positive_lo=True)
        _check_interval("a", self.a_bounds, positive_lo=True)
        _check_interval("alpha", self.alpha_bounds, positive_lo=True)
        _check_interval("omega", self.omega_bounds, positive_lo=True)
        _check_interval("delta", self.delta_bounds)
        lo, hi = self.delta_bounds
        if lo < -math.pi or hi > math.pi:
            raise ConfigError(f"delta bounds must lie within [-pi, pi], got {self.delta_bounds}")
        if not (isinstance(self.n_starts, int) and self.n_starts >= 1):
            raise ConfigError(f"n_starts must be a positive integer, got {self.n_starts!r}")
        if not (math.isfinite(self.prior_weight) and self.prior_weight >= 0.0):
            raise ConfigError(f"prior_weight must be >= 0, got {self.prior_weight!r}")
        if not isinstance(self.seed, int):
            raise ConfigError(f"seed must be an integer, got {self.seed!r}")
        if not (isinstance(self.max_iterations, int) and self.max_iterations >= 1):
            raise ConfigError(f"max_iterations must be a positive integer, got {self.max_iterations!r}")
        if not (math.isfinite(self.convergence_tol) and self.convergence_tol > 0.0):
            raise ConfigError(f"convergence_tol must be > 0, got {self.convergence_tol!r}")

    # -- plain-text key=value serialization (CLI config file) ---------------

    _KEYS = (
        "g0_min", "g0_max", "a_min", "a_max", "alpha_min", "alpha_max",
        "omega_min", "omega_max", "delta_min", "delta_max",
        "n_starts", "prior_weight", "seed", "max_iterations", "convergence_tol",
    )

    def to_text(self) -> str:
        lines = ["# fit configuration"]
        if self.g0_bounds is not None:
            lines.append(f"g0_min = {self.g0_bounds[0]!r}")
            lines.append(f"g0_max = {self.g0_bounds[1]!r}")
        for name, iv in (("a", self.a_bounds), ("alpha", self.alpha_bounds),
                         ("omega", self.omega_bounds), ("delta", self.delta_bounds)):
            lines.append(f"{name}_min = {iv[0]!r}")
            lines.append(f"{name}_max = {iv[1]!r}")
        lines.append(f"n_starts = {self.n_starts}")
        lines.append(f"prior_weight = {self.prior_weight!r}")
        lines.append(f"seed = {self.seed}")
        lines.append(f"max_iterations = {self.max_iterations}")
        lines.append(f"convergence_tol = {self.convergence_tol!r}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "FitConfig":
        values: dict[str, str] = {}
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"config line {lineno}: expected 'key = value', got {raw!r}")
            key, _, val = line.partition("=")
            key = key.strip()
            if key not in cls._KEYS:
                raise ConfigError(f"config line {lineno}: unknown key {key!r}")
            if key in values:
                raise ConfigError(f"config line {lineno}: duplicate key {key!r}")
            values[key] = val.strip()

        def fval(key: str, default: float) -> float:
            if key not in values:
                return default
            try:
                return float(values[key])
            except ValueError:
                raise ConfigError(f"config key {key}: not a number: {values[key]!r}") from None

        def ival(key: str, default: int) -> int:
            if key not in values:
                return default
            try:
                return int(values[key])
            except ValueError:
                raise ConfigError(f"config key {key}: not an integer: {values[key]!r}") from None

        if ("g0_min" in values) != ("g0_max" in values):
            raise ConfigError("g0_min and g0_max must be given together")
        g0 = (fval("g0_min", 0.0), fval("g0_max", 0.0)) if "g0_min" in values else None
        return cls(
            g0_bounds=g0,
            a_bounds=(fval("a_min", DEFAULT_A_BOUNDS[0]), fval("a_max", DEFAULT_A_BOUNDS[1])),
            alpha_bounds=(fval("alpha_min", DEFAULT_ALPHA_BOUNDS[0]),
                          fval("alpha_max", DEFAULT_ALPHA_BOUNDS[1])),
            omega_bounds=(fval("omega_min", DEFAULT_OMEGA_BOUNDS[0]),
                          fval("omega_max", DEFAULT_OMEGA_BOUNDS[1])),
            delta_bounds=(fval("delta_min", DEFAULT_DELTA_BOUNDS[0]),
                          fval("delta_max", DEFAULT_DELTA_BOUNDS[1])),
            n_starts=ival("n_starts", DEFAULT_N_STARTS),
            prior_weight=fval("prior_weight", DEFAULT_PRIOR_WEIGHT),
            seed=ival("seed", DEFAULT_SEED),
            max_iterations=ival("max_iterations", DEFAULT_MAX_ITERATIONS),
            convergence_tol=fval("convergence_tol", DEFAULT_CONVERGENCE_TOL),
        )


def default_fit_config() -> FitConfig:
    """Documented defaults; stable within a major version."""
    return FitConfig()


def load_config(path) -> FitConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return FitConfig.from_text(fh.read())


def save_config(config: FitConfig, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(config.to_text())


@dataclass(frozen=True)
class FitResult:
    params: AckermanParams
    error_abs: float
    residuals: tuple[float, float, float, float, float]
    objective: float
    converged: bool
    starts_tried: int


def resolve_g0_bounds(config: FitConfig, record: OgttRecord) -> Interval:
    if config.g0_bounds is not None:
        return config.g0_bounds
    return (G0_RELATIVE_BOUNDS[0] * record.fasting,
            G0_RELATIVE_BOUNDS[1] * record.fasting)


def prior_penalty(params: AckermanParams, record: OgttRecord,
                  config: FitConfig) -> float:
    """Quadratic prior in scaled coordinates (recomputable from a result)."""
    g0_lo, g0_hi = resolve_g0_bounds(config, record)
    zg0 = (params.g0 - record.fasting) / (g0_hi - g0_lo)
    al_lo, al_hi = config.alpha_bounds
    zal = (params.alpha - 0.5 * (al_lo + al_hi)) / (al_hi - al_lo)
    om_lo, om_hi = config.omega_bounds
    zom = (params.omega - 0.5 * (om_lo + om_hi)) / (om_hi - om_lo)
    return zg0 * zg0 + zal * zal + zom * zom


def fit_objective(params: AckermanParams, record: OgttRecord,
                  config: FitConfig) -> float:
    """Full objective at given params; used to audit FitResult.objective."""
    ssr = 0.0
    for g, t in zip(record.g, SAMPLE_TIMES):
        pred = params.g0 + params.a * math.exp(-params.alpha * t) \
            * math.cos(params.omega * t - params.delta)
        r = g - pred
        ssr += r * r
    return ssr + config.prior_weight * prior_penalty(params, record, config)


def fit(record: OgttRecord, config: FitConfig | None = None) -> FitResult:
    """Estimate curve parameters for one record.

    Returns the lowest-objective result over config.n_starts simplex
    descents; ties broken by smaller omega, then smaller |delta|.  The
    result is deterministic given (record, config).  Raises
    NonConvergenceError (carrying the best-effort result) only when no
    start converges within max_iterations.

    For fixed (alpha, omega) the curve is linear in g0 and in the pair
    (a cos delta, a sin delta), so each simplex descent searches only the
    two damping/frequency parameters in scaled coordinates; the remaining
    three are recovered at every trial point by a regularized linear
    least-squares solve with deterministic clamping to their bounds.
    This keeps the multi-start structure while making the search space
    two-dimensional and free of the narrow phase ridge.
    """
    cfg = config if config is not None else default_fit_config()

    g0_lo, g0_hi = resolve_g0_bounds(cfg, record)
    a_lo, a_hi = cfg.a_bounds
    al_lo, al_w = cfg.alpha_bounds[0], cfg.alpha_bounds[1] - cfg.alpha_bounds[0]
    om_lo, om_w = cfg.omega_bounds[0], cfg.omega_bounds[1] - cfg.omega_bounds[0]
    de_lo, de_hi = cfg.delta_bounds
    g0_w = g0_hi - g0_lo

    g = record.g
    fasting = record.fasting
    lam = cfg.prior_weight
    lam_u = lam / (g0_w * g0_w)  # weight of (g0 - fasting)^2 in raw units
    sg = sum(g)
    a11 = 5.0 + lam_u
    r1 = sg + lam_u * fasting
    exp = math.exp
    cos = math.cos
    sin = math.sin
    atan2 = math.atan2
    hypot = math.hypot

    def inner(alpha: float, omega: float) -> tuple[float, float, float, float]:
        """Minimize over (g0, a, delta) at fixed (alpha, omega).

        Exact where no bound is active (the common case); bound hits are
        repaired by a short deterministic sequence of exact 1-D solves.
        Returns (ssr + g0 prior term, g0, a, delta).
        """
        cvec = []
        svec = []
        for t in SAMPLE_TIMES:
            e = exp(-alpha * t)
            cvec.append(e * cos(omega * t))
            svec.append(e * sin(omega * t))
        sc = sum(cvec)
        ss = sum(svec)
        scc = sum(v * v for v in cvec)
        sss = sum(v * v for v in svec)
        scs = sum(c * s for c, s in zip(cvec, svec))
        sgc = sum(gi * c for gi, c in zip(g, cvec))
        sgs = sum(gi * s for gi, s in zip(g, svec))

        def value(u: float, a: float, delta: float) -> float:
            cd = cos(delta)
            sd = sin(delta)
            ssr = 0.0
            for gi, c, s in zip(g, cvec, svec):
                r = gi - u - a * (c * cd + s * sd)
                ssr += r * r
            du = (u - fasting) / g0_w
            return ssr + lam * du * du

        def solve_g0(a: float, delta: float) -> float:
            cd = cos(delta)
            sd = sin(delta)
            u = (sg - a * (sc * cd + ss * sd) + lam_u * fasting) / a11
            return g0_lo if u < g0_lo else g0_hi if u > g0_hi else u

        def solve_amp(u: float, delta: float) -> float:
            cd = cos(delta)
            sd = sin(delta)
            sbb = cd * cd * scc + 2.0 * cd * sd * scs + sd * sd * sss
            if sbb <= 0.0:
                return a_lo
            a = (cd * (sgc - u * sc) + sd * (sgs - u * ss)) / sbb
            return a_lo if a < a_lo else a_hi if a > a_hi else a

        # unconstrained 3x3 normal equations for (g0, P, Q) with
        # P = a cos(delta), Q = a sin(delta)
        d11 = scc - sc * sc / a11
        d12 = scs - sc * ss / a11
        d22 = sss - ss * ss / a11
        e1 = sgc - sc * r1 / a11
        e2 = sgs - ss * r1 / a11
        det = d11 * d22 - d12 * d12
        if abs(det) > 1e-14:
            p = (e1 * d22 - e2 * d12) / det
            q = (d11 * e2 - d12 * e1) / det
            u = (r1 - p * sc - q * ss) / a11
            a = hypot(p, q)
            delta = atan2(q, p)
            if (g0_lo <= u <= g0_hi and a_lo <= a <= a_hi
                    and de_lo <= delta <= de_hi):
                return value(u, a, delta), u, a, delta
        else:
            u = r1 / a11
            a = 0.0
            delta = 0.0

        # some bound is active: clamp, then alternate exact 1-D solves
        delta = de_lo if delta < de_lo else de_hi if delta > de_hi else delta
        a = a_lo if a < a_lo else a_hi if a > a_hi else a
        u = g0_lo if u < g0_lo else g0_hi if u > g0_hi else u
        for _ in range(2):
            a = solve_amp(u, delta)
            u = solve_g0(a, delta)
        return value(u, a, delta), u, a, delta

    def scaled_inner(x: list[float]) -> tuple[float, float, float, float]:
        alpha = al_lo + x[0] * al_w
        omega = om_lo + x[1] * om_w
        f, u, a, delta = inner(alpha, omega)
        dz1 = x[0] - 0.5
        dz2 = x[1] - 0.5
        return f + lam * (dz1 * dz1 + dz2 * dz2), u, a, delta

    def objective(x: list[float]) -> float:
        return scaled_inner(x)[0]

    # score a fixed low-discrepancy pool once, descend from the best points
    pool = halton_points(max(START_POOL_SIZE, cfg.n_starts), 2, cfg.seed)
    scored = sorted(((objective(list(p)), i) for i, p in enumerate(pool)))
    starts = [pool[i] for _, i in scored[:cfg.n_starts]]

    best_key = None
    best = None  # (x, f, converged)
    any_converged = False
    for start in starts:
        x, fx, _iters, ok = nelder_mead(
            objective, start, tol=cfg.convergence_tol,
            max_iter=cfg.max_iterations)
        any_converged = any_converged or ok
        _, _, _, delta = scaled_inner(x)
        omega = om_lo + x[1] * om_w
        key = (fx, omega, abs(delta))
        if best_key is None or key < best_key:
            best_key = key
            best = (x, fx, ok)

    x, fx, ok = best
    _, g0_best, a_best, delta_best = scaled_inner(x)
    params = AckermanParams(
        g0=g0_best, a=max(a_best, a_lo), alpha=al_lo + x[0] * al_w,
        omega=om_lo + x[1] * om_w, delta=delta_best)
    preds = tuple(
        params.g0 + params.a * math.exp(-params.alpha * t)
        * math.cos(params.omega * t - params.delta) for t in SAMPLE_TIMES)
    res = tuple(gi - p for gi, p in zip(g, preds))
    result = FitResult(
        params=params,
        error_abs=sum(abs(r) for r in res) / 5.0,
        residuals=res,
        objective=fx,
        converged=ok,
        starts_tried=cfg.n_starts,
    )
    if not any_converged:
        raise NonConvergenceError(
            f"no start converged within {cfg.max_iterations} iterations "
            f"for record {record.patient_id!r}", best=result)
    return result
