"""Parameter sweeps, power-law fits and checks of the reluctancy predictions.

Branches for negative ``lam`` are read through the reflection ``lam -> -lam``:
a sweep stores both signs and every fit uses one sign at a time.
"""
from __future__ import annotations

import csv
import itertools
import logging
import math
from dataclasses import dataclass, field as dc_field, replace
from typing import Sequence

import numpy as np

from .admissible import ResponseFunction
from .dynamics import (
    CONVERGED_RESIDUAL,
    STABILITY_MARGIN,
    EigenvalueError,
    IntegratorConfig,
    eigenvalues,
    extract_linear_coefficients,
    integrate_batch,
    jacobian_fd,
    newton_polish,
    residual,
)
from .network import NodeId

log = logging.getLogger(__name__)

NOISE_FLOOR = 1e-11
MIN_FIT_POINTS = 8
HALF_DECADE = math.sqrt(10.0)
EXPONENT_TOL = 0.2
BASE_TOL = 0.1


class SweepError(RuntimeError):
    pass


class BelowResolutionError(ValueError):
    """Too few values above the noise floor to fit a power law."""

    def __init__(self, message: str, pair=None):
        super().__init__(message)
        self.pair = pair


@dataclass(frozen=True)
class SweepConfig:
    lam_min: float
    lam_max: float
    count: int
    initial: tuple[float, ...]
    spacing: str = "uniform"          # or "log"
    integrator: IntegratorConfig = IntegratorConfig()
    warm_start: bool = False

    def __post_init__(self) -> None:
        if self.count < 2:
            raise ValueError("a sweep needs at least two parameter values")
        if not self.lam_min < self.lam_max:
            raise ValueError("lam_min must be below lam_max")
        if self.spacing not in ("uniform", "log"):
            raise ValueError(f"unknown spacing {self.spacing!r}")
        if self.spacing == "log" and self.lam_min <= 0:
            raise ValueError("a log grid needs lam_min > 0")

    def grid(self) -> np.ndarray:
        if self.spacing == "log":
            return np.geomspace(self.lam_min, self.lam_max, self.count)
        return np.linspace(self.lam_min, self.lam_max, self.count)


@dataclass(frozen=True)
class Branch:
    """Steady states along a parameter grid, one row per ``lam``.

    ``max_real`` is NaN where the spectrum was not computed or failed.
    """

    lams: np.ndarray
    states: np.ndarray
    residuals: np.ndarray
    max_real: np.ndarray
    node_ids: tuple[NodeId, ...]

    def __post_init__(self) -> None:
        d = np.diff(self.lams)
        if len(self.lams) > 1 and not (np.all(d > 0) or np.all(d < 0)):
            raise ValueError("branch parameters must be strictly monotone")

    def __len__(self) -> int:
        return len(self.lams)

    @property
    def converged(self) -> np.ndarray:
        return self.residuals <= CONVERGED_RESIDUAL

    @property
    def stable(self) -> np.ndarray:
        return self.max_real < -STABILITY_MARGIN

    def column(self, v: NodeId) -> np.ndarray:
        return self.states[:, self.node_ids.index(v)]

    def difference(self, u: NodeId, v: NodeId) -> np.ndarray:
        return self.column(u) - self.column(v)

    def select(self, mask) -> "Branch":
        mask = np.asarray(mask)
        return Branch(self.lams[mask], self.states[mask], self.residuals[mask], self.max_real[mask], self.node_ids)

    def side(self, sign: int) -> "Branch":
        """Converged points with ``sign * lam > 0``, reflected to positive ``lam`` in increasing order."""
        if sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        keep = (sign * self.lams > 0) & self.converged
        b = self.select(keep)
        order = np.argsort(sign * b.lams)
        return Branch(sign * b.lams[order], b.states[order], b.residuals[order], b.max_real[order], self.node_ids)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["lambda", *(f"node_{v}" for v in self.node_ids), "residual", "stable"])
            for lam, x, r, st in zip(self.lams, self.states, self.residuals, self.stable):
                w.writerow([repr(float(lam)), *(repr(float(v)) for v in x), repr(float(r)), int(st)])


def read_branch_csv(path) -> tuple[np.ndarray, np.ndarray, tuple[str, ...], np.ndarray, np.ndarray]:
    """(lams, states, node ids, residuals, stable flags) from a branch CSV."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header = rows[0]
    if header[0] != "lambda" or header[-2:] != ["residual", "stable"]:
        raise ValueError(f"{path}: not a branch CSV")
    ids = tuple(c.removeprefix("node_") for c in header[1:-2])
    data = np.array([[float(c) for c in r] for r in rows[1:]], dtype=float).reshape(-1, len(header))
    return data[:, 0], data[:, 1:-2], ids, data[:, -2], data[:, -1].astype(bool)


def _spectrum_max(field, x, lam) -> float:
    try:
        return eigenvalues(jacobian_fd(field, x, lam)).max_real
    except EigenvalueError as exc:
        log.warning("spectrum failed at lam=%g: %s", lam, exc)
        return float("nan")


def _polish(field, x, lam):
    if not np.all(np.isfinite(x)):
        return x, float("inf")
    x, res, _ = newton_polish(field, x, lam)
    return x, res


def sweep_branch(field, cfg: SweepConfig, node_ids: Sequence[NodeId] | None = None,
                 stability: bool = True) -> Branch:
    """Steady states over the grid of ``cfg``.

    Cold start integrates every grid point from ``cfg.initial`` (all points in
    one vectorized batch) and polishes with Newton.  Warm start walks the grid
    in order: Newton from the previous steady state, falling back to
    integration from it when Newton does not converge.
    """
    lams = cfg.grid()
    x0 = np.asarray(cfg.initial, dtype=float)
    n = x0.shape[-1]
    if node_ids is None:
        node_ids = tuple(range(n))
    states = np.empty((len(lams), n))
    res = np.empty(len(lams))
    if cfg.warm_start:
        prev = None
        for i, lam in enumerate(lams):
            x, r = (np.inf * x0, np.inf) if prev is None else _polish(field, prev, lam)
            if r > CONVERGED_RESIDUAL:
                start = x0 if prev is None else prev
                xi, bad = integrate_batch(field, start, np.array([lam]), cfg.integrator)
                x, r = (xi[0], np.inf) if bad[0] else _polish(field, xi[0], lam)
            states[i], res[i] = x, r
            if r <= CONVERGED_RESIDUAL:
                prev = x
    else:
        xs, bad = integrate_batch(field, x0, lams, cfg.integrator)
        for i, lam in enumerate(lams):
            if bad[i]:
                states[i], res[i] = xs[i], np.inf
            else:
                states[i], res[i] = _polish(field, xs[i], lam)
    ok = res <= CONVERGED_RESIDUAL
    if ok.sum() * 2 < len(lams):
        worst = lams[~ok][:5]
        raise SweepError(
            f"{(~ok).sum()} of {len(lams)} points did not converge (residual > {CONVERGED_RESIDUAL:g}); "
            f"first failures at lam = {', '.join(f'{v:.4g}' for v in worst)}"
        )
    if (~ok).any():
        log.info("%d of %d sweep points unconverged", (~ok).sum(), len(lams))
    max_real = np.full(len(lams), np.nan)
    if stability:
        for i in np.flatnonzero(ok):
            max_real[i] = _spectrum_max(field, states[i], lams[i])
    return Branch(lams, states, res, max_real, tuple(node_ids))


def continue_branch(field, branch: Branch, lam_stop: float, count: int, stability: bool = True) -> Branch:
    """Warm-start Newton continuation from the converged end of ``branch`` toward ``lam_stop``.

    Steps are log-spaced in ``|lam|``; the sign of ``lam_stop`` picks the side.
    Returns the original points merged with the new ones, ordered by ``lam``.
    """
    sign = 1 if lam_stop > 0 else -1
    side = branch.side(sign)
    if not len(side):
        raise SweepError("no converged point on that side of the branch to continue from")
    near = abs(lam_stop) < side.lams[0]
    start = 0 if near else -1
    lams = sign * np.geomspace(side.lams[start], abs(lam_stop), count + 1)[1:]
    x = side.states[start]
    states, res = np.empty((count, x.shape[-1])), np.empty(count)
    for i, lam in enumerate(lams):
        xi, r = _polish(field, x, lam)
        states[i], res[i] = xi, r
        if r <= CONVERGED_RESIDUAL:
            x = xi
    max_real = np.full(count, np.nan)
    if stability:
        for i in np.flatnonzero(res <= CONVERGED_RESIDUAL):
            max_real[i] = _spectrum_max(field, states[i], lams[i])
    all_lams = np.concatenate([branch.lams, lams])
    order = np.argsort(all_lams)
    return Branch(
        all_lams[order],
        np.concatenate([branch.states, states])[order],
        np.concatenate([branch.residuals, res])[order],
        np.concatenate([branch.max_real, max_real])[order],
        branch.node_ids,
    )


def reassess(field, branch: Branch) -> Branch:
    """Recompute residuals and spectra of ``branch`` states under another field.

    Useful when two fields share a zero set but not a Jacobian, e.g. F and -F.
    """
    res = np.array([residual(field, x, lam) for x, lam in zip(branch.states, branch.lams)])
    max_real = np.array([
        _spectrum_max(field, x, lam) if r <= CONVERGED_RESIDUAL else np.nan
        for x, lam, r in zip(branch.states, branch.lams, res)
    ])
    return replace(branch, residuals=res, max_real=max_real)


# power-law fits


@dataclass(frozen=True)
class ExponentFit:
    slope: float
    coefficient: float
    r2: float
    window: tuple[float, float]
    points: int


def estimate_exponent(lams, values, noise_floor: float = NOISE_FLOOR) -> ExponentFit:
    """Least-squares line through (ln lam, ln|value|).

    The window drops the largest half-decade of ``lam`` and every value
    within one decade of ``noise_floor``.  The coefficient carries the sign of
    the retained values.
    """
    lams = np.asarray(lams, dtype=float)
    values = np.asarray(values, dtype=float)
    if lams.shape != values.shape or lams.ndim != 1:
        raise ValueError("lams and values must be 1-D and of equal length")
    if np.any(lams <= 0):
        raise ValueError("fits need positive lam; reflect negative branches first")
    keep = (lams <= lams.max() / HALF_DECADE) & (np.abs(values) > 10.0 * noise_floor) & np.isfinite(values)
    if keep.sum() < MIN_FIT_POINTS:
        raise BelowResolutionError(
            f"separation below resolution: {keep.sum()} usable points above {10 * noise_floor:g} "
            f"(need {MIN_FIT_POINTS})"
        )
    u = np.log(lams[keep])
    v = np.log(np.abs(values[keep]))
    slope, intercept = np.polyfit(u, v, 1)
    fitted = slope * u + intercept
    ss_res = float(np.sum((v - fitted) ** 2))
    ss_tot = float(np.sum((v - v.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    sign = 1.0 if np.median(values[keep]) > 0 else -1.0
    return ExponentFit(float(slope), sign * math.exp(intercept), r2,
                       (float(lams[keep].min()), float(lams[keep].max())), int(keep.sum()))


@dataclass(frozen=True)
class ExponentReport:
    """Orders of the core nodes and of their pairwise differences along a branch.

    ``orders[v]`` is ``inf`` for components too small to fit (e.g. identically
    zero).  ``p_bar`` is NaN unless every pair resolved.
    """

    node_ids: tuple[NodeId, ...]
    orders: dict
    order_fits: dict
    pairs: dict                       # (i, j) with i after j -> ExponentFit
    failed_pairs: tuple = ()
    p_hat: float = 1.0
    p_bar: float = float("nan")

    @property
    def fully_breaking(self) -> bool:
        return not self.failed_pairs and all(f.coefficient != 0 for f in self.pairs.values())

    def exponent(self, i: NodeId, j: NodeId) -> float:
        key = (i, j) if (i, j) in self.pairs else (j, i)
        return self.pairs[key].slope

    def summary(self) -> str:
        lines = ["node orders:"]
        for v in self.node_ids:
            s = self.orders[v]
            lines.append(f"  s[{v}] = {'inf' if math.isinf(s) else f'{s:.4f}'}")
        lines.append("pairwise exponents:")
        for (i, j), f in self.pairs.items():
            lines.append(f"  p[{i},{j}] = {f.slope:.4f}  D = {f.coefficient:.4g}  R2 = {f.r2:.5f}")
        for i, j in self.failed_pairs:
            lines.append(f"  p[{i},{j}] below resolution")
        lines.append(f"p_hat = {self.p_hat:.4f}")
        lines.append(f"p_bar = {self.p_bar:.4f}")
        return "\n".join(lines)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["quantity", "i", "j", "exponent", "coefficient", "r2", "lam_lo", "lam_hi"])
            for v in self.node_ids:
                f = self.order_fits.get(v)
                if f is None:
                    w.writerow(["s", v, "", "inf", "", "", "", ""])
                else:
                    w.writerow(["s", v, "", f.slope, f.coefficient, f.r2, *f.window])
            for (i, j), f in self.pairs.items():
                w.writerow(["p", i, j, f.slope, f.coefficient, f.r2, *f.window])
            for i, j in self.failed_pairs:
                w.writerow(["p", i, j, "below-resolution", "", "", "", ""])
            w.writerow(["p_hat", "", "", self.p_hat, "", "", "", ""])
            w.writerow(["p_bar", "", "", self.p_bar, "", "", "", ""])


def pairwise_exponents(branch: Branch, node_ids: Sequence[NodeId] | None = None,
                       noise_floor: float = NOISE_FLOOR, strict: bool = False) -> ExponentReport:
    """Fit ``s_k`` and ``p_ij`` on the positive side of ``branch``.

    With ``strict`` an unresolved pair raises ``BelowResolutionError`` naming
    it; otherwise it is recorded in ``failed_pairs``.
    """
    b = branch.side(1)
    if len(b) < MIN_FIT_POINTS:
        raise BelowResolutionError(f"only {len(b)} converged points with lam > 0")
    node_ids = tuple(node_ids if node_ids is not None else b.node_ids)
    orders, order_fits = {}, {}
    for v in node_ids:
        try:
            f = estimate_exponent(b.lams, b.column(v), noise_floor)
        except BelowResolutionError:
            orders[v] = math.inf
        else:
            orders[v], order_fits[v] = f.slope, f
    pairs, failed = {}, []
    for jj, ii in itertools.combinations(range(len(node_ids)), 2):
        i, j = node_ids[ii], node_ids[jj]
        try:
            pairs[(i, j)] = estimate_exponent(b.lams, b.difference(i, j), noise_floor)
        except BelowResolutionError as exc:
            if strict:
                raise BelowResolutionError(f"pair ({i}, {j}): {exc}", (i, j)) from exc
            failed.append((i, j))
    p_hat = min([*orders.values(), 1.0])
    p_bar = sum(f.slope for f in pairs.values()) if not failed else float("nan")
    return ExponentReport(node_ids, orders, order_fits, pairs, tuple(failed), p_hat, p_bar)


@dataclass(frozen=True)
class ReluctancyVerdict:
    """Outcome of comparing an augmented branch against the core's exponents.

    ``status`` is one of ``pass``, ``fail``, ``below-resolution`` and
    ``no-reluctant-branch`` (separation unresolved on a core that is not fully
    synchrony-breaking, so none is predicted).
    """

    status: str
    p_hat: float
    p_bar: float
    separation: ExponentFit | None
    y_fits: dict = dc_field(default_factory=dict)
    reasons: tuple[str, ...] = ()

    @property
    def leading_coefficient(self) -> float:
        return self.separation.coefficient if self.separation else float("nan")

    def summary(self) -> str:
        lines = [f"verdict: {self.status}", f"p_hat = {self.p_hat:.4f}", f"p_bar = {self.p_bar:.4f}"]
        if self.separation is not None:
            s = self.separation
            lines.append(f"separation exponent = {s.slope:.4f} (E = {s.coefficient:.4g}, R2 = {s.r2:.5f}, "
                         f"lam in [{s.window[0]:.3g}, {s.window[1]:.3g}], {s.points} points)")
        for w, f in self.y_fits.items():
            lines.append(f"order of {w} = {f.slope:.4f}" if f else f"order of {w} unresolved")
        lines.extend(f"- {r}" for r in self.reasons)
        return "\n".join(lines)


def verify_reluctancy(core: ExponentReport, aug: Branch, w_ids: tuple[NodeId, NodeId],
                      noise_floor: float = NOISE_FLOOR, tol: float = EXPONENT_TOL,
                      base_tol: float = BASE_TOL, y_branch: Branch | None = None) -> ReluctancyVerdict:
    """Fit the separation of ``w_ids`` on ``aug`` and their own orders on ``y_branch``.

    ``y_branch`` (default ``aug``) lets the orders be measured on a branch
    continued further toward ``lam = 0``, where higher-order terms in the
    individual states have died out.
    """
    b = aug.side(1)
    yb = (y_branch if y_branch is not None else aug).side(1)
    w0, w1 = w_ids
    y_fits, reasons = {}, []
    for w in w_ids:
        try:
            y_fits[w] = estimate_exponent(yb.lams, yb.column(w), noise_floor)
        except BelowResolutionError:
            y_fits[w] = None
    try:
        sep = estimate_exponent(b.lams, b.difference(w0, w1), noise_floor)
    except BelowResolutionError as exc:
        status = "below-resolution" if core.fully_breaking else "no-reluctant-branch"
        return ReluctancyVerdict(status, core.p_hat, core.p_bar, None, y_fits, (str(exc),))
    ok = True
    if not core.fully_breaking:
        ok = False
        reasons.append(f"core not fully synchrony-breaking; unresolved pairs {list(core.failed_pairs)}")
    elif abs(sep.slope - core.p_bar) > tol:
        ok = False
        reasons.append(f"separation exponent {sep.slope:.4f} differs from p_bar {core.p_bar:.4f} by more than {tol}")
    if sep.coefficient == 0:
        ok = False
        reasons.append("leading coefficient of the separation vanishes")
    for w, f in y_fits.items():
        if f is None:
            ok = False
            reasons.append(f"order of {w} unresolved")
        elif abs(f.slope - core.p_hat) > base_tol:
            ok = False
            reasons.append(f"order of {w} is {f.slope:.4f}, p_hat is {core.p_hat:.4f} (tolerance {base_tol})")
    return ReluctancyVerdict("pass" if ok else "fail", core.p_hat, core.p_bar, sep, y_fits, tuple(reasons))


@dataclass(frozen=True)
class StabilityCheck:
    a: float
    lams: np.ndarray
    predicted: np.ndarray
    measured: np.ndarray

    @property
    def agreement(self) -> bool:
        return bool(np.all(self.predicted == self.measured))

    @property
    def disagreements(self) -> np.ndarray:
        return self.lams[self.predicted != self.measured]


def theorem_stability_check(F: ResponseFunction, G: ResponseFunction, aug: Branch, core: Branch) -> StabilityCheck:
    """Compare measured stability of ``aug`` with (core stable) and (dF/dy(0;0) < 0).

    ``core`` must share ``aug``'s grid; only points converged on both with a
    computed spectrum are compared.
    """
    if aug.lams.shape != core.lams.shape or not np.allclose(aug.lams, core.lams):
        raise ValueError("core and augmented branches must share a grid")
    a = extract_linear_coefficients(F, G).a
    keep = aug.converged & core.converged & np.isfinite(aug.max_real) & np.isfinite(core.max_real)
    predicted = core.stable[keep] & (a < 0)
    return StabilityCheck(a, aug.lams[keep], predicted, aug.stable[keep])
