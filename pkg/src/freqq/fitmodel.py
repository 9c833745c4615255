"""Two-timescale model fitting for autocorrelation curves.

The model is a mixture of a fast-decaying exponential and a slow-decaying
oscillating term:

    R(theta) = u1 * exp(-alpha_fast * theta)
             + (1 - u1) * exp(-alpha_slow * theta) * cos(omega * theta)

with u1 in [0, 1] and alpha_fast, alpha_slow, omega >= 0 (theta in seconds,
rates in 1/s, omega in rad/s). No ordering between the two rates is
imposed; when omega = 0 the two terms are exchangeable and only the curve
itself is identified.

Fitting minimizes the sum of squared residuals over the curve's lag grid
with Levenberg-Marquardt iterations on smoothly transformed coordinates

    u1 = sin^2(s),  alpha = a^2,  omega = w^2

which keep every iterate feasible and admit exact zeros at the bounds. A
fixed grid of starts covers the basin structure; the lowest-SSE converged
start wins, with near-ties (within 1e-12) broken toward smaller alpha_fast,
then smaller omega.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .acf import AcfCurve
from .errors import DegenerateInput

# SSE window within which two starts count as tied.
SSE_TIE_WINDOW = 1e-12

# Damping factor ceiling; far above it, trial steps are already below any
# sensible step tolerance.
_LAMBDA_FLOOR = 1e-15


def _default_starts() -> tuple[tuple[float, float, float, float], ...]:
    grid = []
    for u1 in (0.25, 0.5, 0.75):
        for alpha_fast in (1e-4, 1e-3, 1e-2):
            for alpha_slow in (1e-4, 1e-3, 1e-2):
                for omega in (0.0, 1e-3, 5e-3, 5e-2):
                    grid.append((u1, alpha_fast, alpha_slow, omega))
    return tuple(grid)


@dataclass(frozen=True)
class FitConfig:
    """Optimizer settings; the digest pins them for provenance.

    gradient_tol bounds the max-norm of J^T r at a solution; step_tol bounds
    the accepted parameter-step norm (transformed coordinates). Damping
    starts at damping_init, divides by damping_down on accepted steps and
    multiplies by damping_up on rejected ones. max_iterations counts trial
    steps, accepted or not, per start.
    """

    max_iterations: int = 200
    gradient_tol: float = 1e-10
    step_tol: float = 1e-12
    damping_init: float = 1e-3
    damping_up: float = 10.0
    damping_down: float = 10.0
    starts: tuple[tuple[float, float, float, float], ...] = field(
        default_factory=_default_starts
    )

    def digest(self) -> str:
        """Short hex digest of the full configuration."""
        payload = json.dumps(
            {
                "max_iterations": self.max_iterations,
                "gradient_tol": self.gradient_tol,
                "step_tol": self.step_tol,
                "damping_init": self.damping_init,
                "damping_up": self.damping_up,
                "damping_down": self.damping_down,
                "starts": [list(s) for s in self.starts],
            },
            sort_keys=True,
            separators=(",", ":"),
        )
        return hashlib.sha256(payload.encode()).hexdigest()[:12]


@dataclass(frozen=True)
class AcfModelParams:
    """Model parameters in natural units."""

    u1: float
    alpha_fast: float
    alpha_slow: float
    omega: float

    def __post_init__(self):
        for name in ("u1", "alpha_fast", "alpha_slow", "omega"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if not 0.0 <= self.u1 <= 1.0:
            raise ValueError(f"u1 must be in [0, 1], got {self.u1}")
        if self.alpha_fast < 0 or self.alpha_slow < 0:
            raise ValueError("decay rates must be >= 0")
        if self.omega < 0:
            raise ValueError(f"omega must be >= 0, got {self.omega}")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, obj: dict) -> "AcfModelParams":
        return cls(**obj)


@dataclass(frozen=True)
class AcfFit:
    """Outcome of a multi-start fit.

    rmse is sqrt(sse / n_lags) with n_lags the number of curve points
    (lag 0 included). converged=False marks a best-effort result where no
    start met either tolerance within its iteration budget; iterations
    counts the winning start's linearization passes, never below one.
    """

    params: AcfModelParams
    sse: float
    rmse: float
    n_lags: int
    n_starts: int
    converged: bool
    iterations: int

    def __post_init__(self):
        if self.converged and self.iterations < 1:
            raise ValueError("a converged fit reports at least one iteration")

    def to_dict(self) -> dict:
        return {
            "params": self.params.to_dict(),
            "sse": self.sse,
            "rmse": self.rmse,
            "n_lags": self.n_lags,
            "n_starts": self.n_starts,
            "converged": self.converged,
            "iterations": self.iterations,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "AcfFit":
        obj = dict(obj)
        obj["params"] = AcfModelParams.from_dict(obj["params"])
        return cls(**obj)


def fit_to_json(fit: AcfFit) -> str:
    return json.dumps(fit.to_dict(), indent=2) + "\n"


def fit_from_json(text: str) -> AcfFit:
    return AcfFit.from_dict(json.loads(text))


def fit_text_row(fit: AcfFit) -> str:
    """The four parameter cells as an aligned text fragment, 4 decimals."""
    p = fit.params
    return f"{p.u1:8.4f} {p.alpha_fast:10.4f} {p.alpha_slow:10.4f} {p.omega:8.4f}"


def model_eval(params: AcfModelParams, lag):
    """Evaluate the model at a lag (seconds) or array of lags.

    Exactly 1 at lag 0. Magnitude is bounded by 1 for all lags >= 0.
    """
    theta = np.asarray(lag, dtype=np.float64)
    out = params.u1 * np.exp(-params.alpha_fast * theta) + (
        1.0 - params.u1
    ) * np.exp(-params.alpha_slow * theta) * np.cos(params.omega * theta)
    if theta.ndim == 0:
        return float(out)
    return out


def model_jacobian(params: AcfModelParams, lag) -> np.ndarray:
    """Partial derivatives wrt (u1, alpha_fast, alpha_slow, omega).

    Returns shape (..., 4) for array input, (4,) for a scalar lag.
    """
    theta = np.asarray(lag, dtype=np.float64)
    e_fast = np.exp(-params.alpha_fast * theta)
    e_slow = np.exp(-params.alpha_slow * theta)
    cos_w = np.cos(params.omega * theta)
    sin_w = np.sin(params.omega * theta)
    rest = 1.0 - params.u1
    j = np.stack(
        [
            e_fast - e_slow * cos_w,
            -params.u1 * theta * e_fast,
            -rest * theta * e_slow * cos_w,
            -rest * theta * e_slow * sin_w,
        ],
        axis=-1,
    )
    return j


def _params_of(z: np.ndarray) -> tuple[float, float, float, float]:
    u1 = math.sin(z[0]) ** 2
    return u1, z[1] * z[1], z[2] * z[2], z[3] * z[3]


def _z_of(start: tuple[float, float, float, float]) -> np.ndarray:
    u1, alpha_fast, alpha_slow, omega = start
    return np.array(
        [
            math.asin(math.sqrt(u1)),
            math.sqrt(alpha_fast),
            math.sqrt(alpha_slow),
            math.sqrt(omega),
        ]
    )


def _model_parts(z: np.ndarray, theta: np.ndarray):
    """Model values plus the transcendental factors they were built from.

    The factors feed _jacobian_z at the same point, so an accepted trial
    step pays for exp/cos once instead of twice.
    """
    u1 = math.sin(z[0]) ** 2
    e_fast = np.exp(-(z[1] * z[1]) * theta)
    e_slow = np.exp(-(z[2] * z[2]) * theta)
    cos_w = np.cos((z[3] * z[3]) * theta)
    model = u1 * e_fast + (1.0 - u1) * e_slow * cos_w
    return model, e_fast, e_slow, cos_w


def _jacobian_z(
    z: np.ndarray,
    theta: np.ndarray,
    e_fast: np.ndarray,
    e_slow: np.ndarray,
    cos_w: np.ndarray,
) -> np.ndarray:
    """Residual Jacobian in transformed coordinates (chain rule)."""
    s, a, b, w = z
    u1 = math.sin(s) ** 2
    sin_w = np.sin((w * w) * theta)
    rest = 1.0 - u1
    j = np.empty((theta.size, 4))
    j[:, 0] = (e_fast - e_slow * cos_w) * math.sin(2.0 * s)
    j[:, 1] = -u1 * theta * e_fast * (2.0 * a)
    j[:, 2] = -rest * theta * e_slow * cos_w * (2.0 * b)
    j[:, 3] = -rest * theta * e_slow * sin_w * (2.0 * w)
    return j


@dataclass
class _StartResult:
    z: np.ndarray
    sse: float
    iterations: int
    converged: bool

    @property
    def alpha_fast(self) -> float:
        return float(self.z[1] * self.z[1])

    @property
    def omega(self) -> float:
        return float(self.z[3] * self.z[3])


def _levenberg_marquardt(
    z0: np.ndarray, theta: np.ndarray, y: np.ndarray, cfg: FitConfig
) -> _StartResult:
    z = z0.copy()
    model, e_fast, e_slow, cos_w = _model_parts(z, theta)
    residual = model - y
    sse = float(residual @ residual)
    lam = cfg.damping_init
    identity = np.eye(4)
    trials = 0
    linearizations = 0
    converged = False
    at_new_point = True
    gradient = None
    normal = None
    while True:
        if at_new_point:
            jac = _jacobian_z(z, theta, e_fast, e_slow, cos_w)
            linearizations += 1
            gradient = jac.T @ residual
            if float(np.max(np.abs(gradient))) <= cfg.gradient_tol:
                converged = True
                break
            normal = jac.T @ jac
            at_new_point = False
        if trials >= cfg.max_iterations:
            break
        trials += 1
        damped = normal + lam * identity
        try:
            delta = np.linalg.solve(damped, -gradient)
        except np.linalg.LinAlgError:
            delta = np.linalg.lstsq(damped, -gradient, rcond=None)[0]
        if float(np.linalg.norm(delta)) <= cfg.step_tol:
            converged = True
            break
        z_trial = z + delta
        model, e_fast_t, e_slow_t, cos_w_t = _model_parts(z_trial, theta)
        residual_trial = model - y
        sse_trial = float(residual_trial @ residual_trial)
        if sse_trial < sse:
            z = z_trial
            residual = residual_trial
            sse = sse_trial
            e_fast, e_slow, cos_w = e_fast_t, e_slow_t, cos_w_t
            lam = max(lam / cfg.damping_down, _LAMBDA_FLOOR)
            at_new_point = True
        else:
            lam *= cfg.damping_up
    return _StartResult(z=z, sse=sse, iterations=linearizations, converged=converged)


def _prefer(best: _StartResult | None, cand: _StartResult) -> _StartResult:
    if best is None:
        return cand
    if cand.converged != best.converged:
        return cand if cand.converged else best
    if cand.sse < best.sse - SSE_TIE_WINDOW:
        return cand
    if abs(cand.sse - best.sse) <= SSE_TIE_WINDOW and (
        (cand.alpha_fast, cand.omega) < (best.alpha_fast, best.omega)
    ):
        return cand
    return best


def fit_acf(curve: AcfCurve, config: FitConfig | None = None) -> AcfFit:
    """Fit the two-timescale model to an autocorrelation curve.

    Every configured start is run to convergence or its iteration budget;
    the lowest-SSE converged start wins. If no start converges the best
    effort is returned with converged=False rather than raising.

    Raises:
        DegenerateInput: Curve has fewer than 8 lags.
    """
    cfg = config if config is not None else FitConfig()
    y = curve.values
    if y.size < 8:
        raise DegenerateInput(f"need at least 8 lags to fit, got {y.size}")
    theta = np.arange(y.size, dtype=np.float64) * curve.dt
    best: _StartResult | None = None
    for start in cfg.starts:
        result = _levenberg_marquardt(_z_of(start), theta, y, cfg)
        best = _prefer(best, result)
    assert best is not None
    u1, alpha_fast, alpha_slow, omega = _params_of(best.z)
    return AcfFit(
        params=AcfModelParams(u1, alpha_fast, alpha_slow, omega),
        sse=best.sse,
        rmse=math.sqrt(best.sse / y.size),
        n_lags=int(y.size),
        n_starts=len(cfg.starts),
        converged=best.converged,
        iterations=best.iterations,
    )
