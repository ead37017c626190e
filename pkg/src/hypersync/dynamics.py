"""Time stepping, steady states, Jacobians and spectra for admissible fields.

Every field here is a callable ``f(x, lam)`` accepting a state array of shape
``(..., n)`` and a parameter broadcastable to ``(...)``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .admissible import ResponseFunction

log = logging.getLogger(__name__)

BLOWUP = 1e8
CONVERGED_RESIDUAL = 1e-10
STABILITY_MARGIN = 1e-10
FD_STEP = 1e-6


class BlowUpError(ArithmeticError):
    def __init__(self, t: float):
        super().__init__(f"state left the 1e8 ball (or became non-finite) at t = {t:g}")
        self.t = t


class EigenvalueError(ArithmeticError):
    pass


@dataclass(frozen=True)
class IntegratorConfig:
    step: float = 0.1
    horizon: float = 5000.0
    method: str = "euler"

    def __post_init__(self) -> None:
        if self.step <= 0:
            raise ValueError("step must be positive")
        if self.horizon < self.step:
            raise ValueError("horizon must be at least one step")
        if self.method not in ("euler", "rk4"):
            raise ValueError(f"unknown method {self.method!r}")

    @property
    def n_steps(self) -> int:
        return int(round(self.horizon / self.step))


@dataclass(frozen=True)
class SteadyState:
    state: np.ndarray
    residual: float
    lam: float
    converged: bool


@dataclass(frozen=True)
class SpectrumReport:
    eigenvalues: np.ndarray
    max_real: float

    @property
    def stable(self) -> bool:
        return self.max_real < -STABILITY_MARGIN


def _step(field, x, lam, dt, method):
    if method == "euler":
        return x + dt * field(x, lam)
    k1 = field(x, lam)
    k2 = field(x + 0.5 * dt * k1, lam)
    k3 = field(x + 0.5 * dt * k2, lam)
    k4 = field(x + dt * k3, lam)
    return x + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def integrate_batch(field, x0, lam, cfg: IntegratorConfig) -> tuple[np.ndarray, np.ndarray]:
    """Integrate many initial states / parameters at once.

    Returns final states and a mask of rows that blew up; those rows are
    frozen at their last finite state.
    """
    x0 = np.asarray(x0, dtype=float)
    lam = np.asarray(lam, dtype=float)
    batch = np.broadcast_shapes(x0.shape[:-1], lam.shape)
    x = np.array(np.broadcast_to(x0, batch + x0.shape[-1:]))
    lam = np.broadcast_to(lam, batch)
    bad = np.zeros(x.shape[:-1], dtype=bool)
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(cfg.n_steps):
            nxt = _step(field, x, lam, cfg.step, cfg.method)
            blew = ~np.all(np.isfinite(nxt) & (np.abs(nxt) <= BLOWUP), axis=-1)
            if blew.any():
                bad |= blew
                nxt[bad] = x[bad]
            x = nxt
    return x, bad


def integrate(field, x0, lam: float, cfg: IntegratorConfig,
              callback: Optional[Callable[[float, np.ndarray], None]] = None) -> np.ndarray:
    """Fixed-step explicit integration of a single state; returns the end state."""
    x = np.array(x0, dtype=float)
    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(cfg.n_steps):
            x = _step(field, x, lam, cfg.step, cfg.method)
            if not np.all(np.isfinite(x)) or np.max(np.abs(x)) > BLOWUP:
                raise BlowUpError((i + 1) * cfg.step)
            if callback is not None:
                callback((i + 1) * cfg.step, x)
    return x


def jacobian_fd(field, x, lam: float) -> np.ndarray:
    """Central-difference Jacobian with per-coordinate step 1e-6 * (1 + |x_i|)."""
    x = np.asarray(x, dtype=float)
    n = x.shape[-1]
    hs = FD_STEP * (1.0 + np.abs(x))
    pert = np.diag(hs)
    probes = np.concatenate([x + pert, x - pert])
    vals = field(probes, lam)
    return ((vals[:n] - vals[n:]) / (2.0 * hs)[:, None]).T


def residual(field, x, lam: float) -> float:
    return float(np.max(np.abs(field(x, lam))))


def newton_polish(field, x, lam: float, max_iter: int = 50) -> tuple[np.ndarray, float, str]:
    """Newton iterations with a finite-difference Jacobian.

    The max-norm residual may rise on the first steps before quadratic
    convergence takes over, so full steps are taken as long as the residual
    stays within 1e6 times the best seen (damping by halves otherwise).  The best
    iterate is returned.  Once below the convergence threshold, iteration stops
    after three steps that fail to halve the best residual (the rounding floor).
    """
    x = np.array(x, dtype=float)
    res = residual(field, x, lam)
    best_x, best = x, res
    reason = "max-iter"
    idle = 0
    for _ in range(max_iter):
        if res == 0.0:
            reason = "exact"
            break
        J = jacobian_fd(field, x, lam)
        try:
            dx = np.linalg.solve(J, -field(x, lam))
        except np.linalg.LinAlgError:
            reason = "singular-jacobian"
            break
        if not np.all(np.isfinite(dx)):
            reason = "singular-jacobian"
            break
        for t in (1.0, 0.5, 0.25, 0.125):
            xn = x + t * dx
            rn = residual(field, xn, lam)
            if np.isfinite(rn) and rn <= 1e6 * best:
                break
        else:
            reason = "diverging"
            break
        x, res = xn, rn
        idle = 0 if res < 0.5 * best else idle + 1
        if res < best:
            best_x, best = x, res
        if idle >= 3 and best <= CONVERGED_RESIDUAL:
            reason = "stalled"
            break
    if best == 0.0:
        reason = "exact"
    return best_x, best, reason


def find_steady_state(field, lam: float, x0, cfg: IntegratorConfig, integrate_first: bool = True) -> SteadyState:
    """Integrate toward an attractor, then polish with Newton."""
    x = np.asarray(x0, dtype=float)
    if integrate_first:
        x = integrate(field, x, lam, cfg)
    x, res, reason = newton_polish(field, x, lam)
    if reason == "singular-jacobian":
        log.debug("singular Jacobian at lam=%g, residual %.3e", lam, res)
    return SteadyState(x, res, float(lam), res <= CONVERGED_RESIDUAL)


def eigenvalues(m) -> SpectrumReport:
    """Spectrum of a small dense matrix with a determinant-residual backstop.

    Each eigenvalue ``mu`` must satisfy
    ``|det(m - mu I)| <= 1e-6 * (1 + ||m|| + |mu|)**(n-1)``.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("matrix must be square")
    n = m.shape[0]
    if n > 32:
        raise ValueError("matrices larger than 32 x 32 are out of range")
    if not np.all(np.isfinite(m)):
        raise EigenvalueError("matrix has non-finite entries")
    try:
        mus = np.linalg.eigvals(m)
    except np.linalg.LinAlgError as exc:
        raise EigenvalueError(f"eigenvalue iteration failed: {exc}") from exc
    norm = np.linalg.norm(m, 2)
    eye = np.eye(n)
    for mu in mus:
        det = abs(np.linalg.det(m - mu * eye))
        if det > 1e-6 * (1.0 + norm + abs(mu)) ** (n - 1):
            raise EigenvalueError(f"eigenvalue {mu} fails the determinant check ({det:.3e})")
    return SpectrumReport(mus, float(np.max(mus.real)) if n else -np.inf)


def assess_stability(field, ss: SteadyState) -> SpectrumReport:
    return eigenvalues(jacobian_fd(field, ss.state, ss.lam))


@dataclass(frozen=True)
class LinearCoefficients:
    """Linear Taylor coefficients at the origin.

    ``a, b, c, d``: derivative of the two-node-type response ``F`` in its self
    state, in the first and second entry of one hyperedge block, and in ``lam``.
    ``A, B, C``: derivative of ``G`` in its self state and its first and second
    input group (``None`` when absent).
    """

    a: float
    b: float
    c: Optional[float]
    d: float
    A: float
    B: float
    C: Optional[float]


def _zero_inputs(resp: ResponseFunction):
    return 0.0, {g.edge_type: np.zeros((g.mult, g.order)) for g in resp.signature}


def _partial(resp: ResponseFunction, which, h: float = 1e-6) -> float:
    """Central difference of ``resp`` at zero input in one coordinate.

    ``which`` is ``"self"``, ``"lam"`` or ``(edge_type, block, entry)``.
    """
    def at(eps):
        s, blocks = _zero_inputs(resp)
        lam = 0.0
        if which == "self":
            s = eps
        elif which == "lam":
            lam = eps
        else:
            label, i, j = which
            blocks[label][i, j] = eps
        return float(resp(np.asarray(s), blocks, np.asarray(lam)))

    return (at(h) - at(-h)) / (2 * h)


def extract_linear_coefficients(F: ResponseFunction, G: ResponseFunction) -> LinearCoefficients:
    hyper = max(F.signature, key=lambda g: g.order)
    a = _partial(F, "self")
    b = _partial(F, (hyper.edge_type, 0, 0))
    c = _partial(F, (hyper.edge_type, 0, 1)) if hyper.order >= 2 else None
    d = _partial(F, "lam")
    A = _partial(G, "self")
    groups = G.signature
    B = _partial(G, (groups[0].edge_type, 0, 0)) if groups else 0.0
    C = _partial(G, (groups[1].edge_type, 0, 0)) if len(groups) >= 2 else None
    return LinearCoefficients(a, b, c, d, A, B, C)
