"""Contraction and boundedness certificates.

All certificates are sufficient conditions built from norm bounds on the
solution representation.  The window-contraction family compares the state
over consecutive delay windows:

    g(delta) = (1 - D(delta))^-1 ( ||sum_j phi_j(delta)||
                                   + L1(delta) * sum_{i>=1} a_i )

with D(delta) = L1(delta) * a_0,  L1(delta) = integral_0^delta ||phi||,
a_0 the uniform bound of the time-varying instantaneous part (plus the lag-0
feedback contribution ||B|| K_0), and a_i the uniform bounds of the delayed
coefficients (plus ||B|| K_i under feedback).  The certificate is usable only
while D(delta) < 1 ("feasible"); g <= 1 certifies a non-expansive solution
map (bounded solutions), g < 1 a contraction (zero is a globally
asymptotically stable attractor).

The windowed-L2 family replaces the uniform bounds by Cauchy-Schwarz
factorizations (integral ||phi|| f <= (integral ||phi||^2)^(1/2)
(integral f^2)^(1/2)); it requires alpha > 1/2 for the squared kernel to be
integrable and covers strongly time-localized perturbations better.

A certificate value at delta is the claimed bound for window sups taken at
spacing delta; to compare against the decay of consecutive delay windows of
a simulation, evaluate the grid at the delay itself.  The report's
contraction constant is the minimum over the supplied grid.

The delay-free bounds follow the representation with A0 -> sum_i A_i: with
K0_bar = sup_t max_j ||phi_j(t)||, K1_bar = L1(inf), and
q = K1_bar * sum_i (||Atilde_i|| + ||B|| K_i), the solution satisfies
sup_t ||x(t)|| <= K2_bar = (1 - q)^-1 K0_bar sum_j ||x_j0||  whenever q < 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (DelaysNotZero, EmptyGrid, KernelNotIntegrable,
                     OrderTooLow, PremiseViolated, SingularAtZero,
                     WindowOutOfRange)
from .kernels import Kernels, phi_alpha_l1, phi_alpha_l2sq
from .mlf import DEFAULT_CONFIG, MlEvalConfig
from .system import (ControlInput, ValidatedProblem, ahat_sup_norm,
                     atilde_sup_norm, b_sup_norm)
from .tables import (TimeFunctionTable, l2_window_norm,
                     table_linear_combination)

_TIE_TOL = 1e-12
_QUAD_TOL = 1e-9


# ---------------------------------------------------------------------------
# shared pieces
# ---------------------------------------------------------------------------

def _gain_bounds(prob: ValidatedProblem, feedback: ControlInput | None):
    """Per-lag declared gain bounds K_i^0 (zeros without feedback)."""
    ctl = feedback if feedback is not None else prob.control
    r1 = len(prob.system.delays)
    if ctl is None or ctl.kind != "feedback":
        return [0.0] * r1, None
    return list(ctl.gain_bounds), ctl


def _sum_phi_norm(prob: ValidatedProblem, delta: float,
                  cfg: MlEvalConfig) -> float:
    sys = prob.system
    ker = Kernels(sys.alpha, sys.A[0], cfg)
    total = sum(ker.phi_j(j, np.array([delta]))[0] for j in range(sys.k))
    return float(np.linalg.norm(total, 2))


def _phi_norms(prob: ValidatedProblem, delta: float,
               cfg: MlEvalConfig) -> list:
    sys = prob.system
    ker = Kernels(sys.alpha, sys.A[0], cfg)
    return [float(np.linalg.norm(ker.phi_j(j, np.array([delta]))[0], 2))
            for j in range(sys.k)]


# ---------------------------------------------------------------------------
# uniform-bound family
# ---------------------------------------------------------------------------

def cert_g_h(prob: ValidatedProblem, delta: float,
             cfg: MlEvalConfig = DEFAULT_CONFIG,
             tol: float = _QUAD_TOL):
    """Window-contraction certificate of the uncontrolled system.

    Returns (value, feasible); infeasible means the inverse factor's
    denominator was not positive, reported rather than raised.
    """
    sys = prob.system
    l1 = phi_alpha_l1((sys.alpha, sys.A[0]), delta, cfg, tol)
    a0 = atilde_sup_norm(prob, 0)
    numer = (_sum_phi_norm(prob, delta, cfg)
             + l1 * sum(ahat_sup_norm(prob, i)
                        for i in range(1, len(sys.delays))))
    D = l1 * a0
    if D >= 1.0:
        return math.inf, False
    return numer / (1.0 - D), True


def cert_g_f(prob: ValidatedProblem, feedback: ControlInput | None,
             delta: float, cfg: MlEvalConfig = DEFAULT_CONFIG,
             tol: float = _QUAD_TOL):
    """Controlled variant: gains enter through their declared bounds."""
    sys = prob.system
    bounds, _ = _gain_bounds(prob, feedback)
    bn = b_sup_norm(prob)
    l1 = phi_alpha_l1((sys.alpha, sys.A[0]), delta, cfg, tol)
    a0 = atilde_sup_norm(prob, 0) + bn * bounds[0]
    numer = (_sum_phi_norm(prob, delta, cfg)
             + l1 * sum(ahat_sup_norm(prob, i) + bn * bounds[i]
                        for i in range(1, len(sys.delays))))
    D = l1 * a0
    if D >= 1.0:
        return math.inf, False
    return numer / (1.0 - D), True


# ---------------------------------------------------------------------------
# windowed-L2 family
# ---------------------------------------------------------------------------

def _ahat_table(prob: ValidatedProblem, i: int) -> TimeFunctionTable:
    return table_linear_combination(prob.system.A[i], prob.system.A_tilde[i])


def _bk_table(prob: ValidatedProblem, K: np.ndarray) -> TimeFunctionTable:
    B = prob.system.B
    vals = np.einsum("qik,kj->qij", B.values, K)
    return TimeFunctionTable(B.sample_times.copy(), vals, B.interpolation)


def _window_l2(tbl: TimeFunctionTable, start: float, delta: float) -> float:
    """Windowed L2 norm with the matrix function extended by zero to t < 0.

    Delayed windows reach below zero for window starts before the delay;
    there the trajectory difference inside the estimate is zero anyway, so
    the negative part contributes nothing.
    """
    lo = max(start, 0.0)
    hi = start + delta
    if hi <= lo:
        return 0.0
    return l2_window_norm(tbl, lo, hi - lo)


def cert_g_hat_h(prob: ValidatedProblem, t: float, delta: float,
                 cfg: MlEvalConfig = DEFAULT_CONFIG,
                 tol: float = _QUAD_TOL):
    """Windowed-L2 certificate at window start t; requires alpha > 1/2."""
    sys = prob.system
    l2k = math.sqrt(phi_alpha_l2sq((sys.alpha, sys.A[0]), delta, cfg, tol))
    d_factor = l2_window_norm(sys.A_tilde[0], t, delta)
    numer = sum(_phi_norms(prob, delta, cfg))
    for i in range(1, len(sys.delays)):
        numer += l2k * _window_l2(_ahat_table(prob, i),
                                  t - sys.delays[i], delta)
    D = l2k * d_factor
    if D >= 1.0:
        return math.inf, False
    return numer / (1.0 - D), True


def cert_g_hat_f(prob: ValidatedProblem, feedback: ControlInput | None,
                 t: float, delta: float,
                 cfg: MlEvalConfig = DEFAULT_CONFIG,
                 tol: float = _QUAD_TOL):
    """Controlled windowed-L2 certificate; gain terms enter as L2 windows."""
    sys = prob.system
    bounds, ctl = _gain_bounds(prob, feedback)
    l2k = math.sqrt(phi_alpha_l2sq((sys.alpha, sys.A[0]), delta, cfg, tol))
    d_factor = l2_window_norm(sys.A_tilde[0], t, delta)
    if ctl is not None:
        d_factor += l2_window_norm(_bk_table(prob, ctl.gains[0]), t, delta)
    numer = sum(_phi_norms(prob, delta, cfg))
    for i in range(1, len(sys.delays)):
        numer += l2k * _window_l2(_ahat_table(prob, i),
                                  t - sys.delays[i], delta)
        if ctl is not None:
            numer += l2k * _window_l2(_bk_table(prob, ctl.gains[i]),
                                      t, delta)
    D = l2k * d_factor
    if D >= 1.0:
        return math.inf, False
    return numer / (1.0 - D), True


# ---------------------------------------------------------------------------
# admissible gain bounds
# ---------------------------------------------------------------------------

def gain_bound_uniform(prob: ValidatedProblem, delta: float, epsilon: float,
                       cfg: MlEvalConfig = DEFAULT_CONFIG) -> float:
    """Largest uniform gain bound preserving the margin epsilon.

    Requires g_h(delta) < 1 - epsilon; a zero input norm makes the bound
    vacuous and returns +inf.
    """
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie in (0, 1)")
    value, feasible = cert_g_h(prob, delta, cfg)
    if not feasible or value >= 1.0 - epsilon:
        raise PremiseViolated(
            f"g_h({delta}) = {value:.6g} is not below 1 - epsilon = "
            f"{1 - epsilon:.6g}")
    bn = b_sup_norm(prob)
    if bn == 0.0:
        return math.inf
    sys = prob.system
    l1 = phi_alpha_l1((sys.alpha, sys.A[0]), delta, cfg)
    return epsilon / (len(sys.delays) * l1 * bn)


def gain_bound_l2(prob: ValidatedProblem, delta: float, epsilon: float,
                  cfg: MlEvalConfig = DEFAULT_CONFIG,
                  t: float | None = None) -> float:
    """L2 analogue bounding the summed windowed gain norms."""
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie in (0, 1)")
    t0 = prob.system.h if t is None else t
    value, feasible = cert_g_hat_h(prob, t0, delta, cfg)
    if not feasible or value >= 1.0 - epsilon:
        raise PremiseViolated(
            f"g_hat_h({t0}, {delta}) = {value:.6g} is not below "
            f"{1 - epsilon:.6g}")
    bn = b_sup_norm(prob)
    if bn == 0.0:
        return math.inf
    sys = prob.system
    l2k = math.sqrt(phi_alpha_l2sq((sys.alpha, sys.A[0]), delta, cfg))
    return epsilon / (l2k * bn)


# ---------------------------------------------------------------------------
# grid sweep and verdict
# ---------------------------------------------------------------------------

DEFAULT_DELTA_GRID = tuple(np.geomspace(1e-2, 1e2, 25))


@dataclass
class GridEntry:
    delta: float
    value: float
    feasible: bool


@dataclass
class CertificateReport:
    verdict: str                        # ContractiveGAS | NonExpansiveStable | Inconclusive
    contraction_constant: float | None
    witness_delta: float | None
    grid: list = field(default_factory=list)
    sup_bound: float | None = None      # claimed uniform bound on ||x||_inf

    def as_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "contraction_constant": self.contraction_constant,
            "witness_delta": self.witness_delta,
            "grid": [{"delta": e.delta, "value": e.value,
                      "feasible": e.feasible} for e in self.grid],
            "sup_bound": self.sup_bound,
        }


def certify(prob: ValidatedProblem, feedback: ControlInput | None = None,
            delta_grid=None, t_grid=None,
            cfg: MlEvalConfig = DEFAULT_CONFIG,
            tol: float = _QUAD_TOL) -> CertificateReport:
    """Evaluate the applicable certificate family over a delta grid.

    Per delta the reported value is the best (smallest) among the feasible
    variants: the uniform-bound certificate always, and the sup over
    ``t_grid`` of the windowed-L2 one when alpha > 1/2 and all windows are
    covered by the problem's tables.  Verdict per the report invariants:
    some feasible value < 1 (within a 1e-12 tie tolerance) certifies global
    asymptotic stability of the zero solution; a feasible value at 1
    certifies bounded solutions with the sup bound recorded in the report.
    """
    if delta_grid is None:
        delta_grid = DEFAULT_DELTA_GRID
    delta_grid = [float(d) for d in delta_grid]
    if len(delta_grid) == 0:
        raise EmptyGrid("certify needs at least one delta")
    if t_grid is None:
        t_grid = [prob.system.h]
    has_feedback = ((feedback if feedback is not None else prob.control)
                    .kind == "feedback")

    entries = []
    for delta in delta_grid:
        if has_feedback:
            value, feasible = cert_g_f(prob, feedback, delta, cfg, tol)
        else:
            value, feasible = cert_g_h(prob, delta, cfg, tol)
        hat_vals = []
        hat_ok = True
        for t in t_grid:
            try:
                if has_feedback:
                    v, f = cert_g_hat_f(prob, feedback, t, delta, cfg, tol)
                else:
                    v, f = cert_g_hat_h(prob, t, delta, cfg, tol)
            except (WindowOutOfRange, SingularAtZero):
                hat_ok = False
                break
            hat_vals.append((v, f))
        if hat_ok and hat_vals:
            hat_value = max(v for v, _ in hat_vals)
            hat_feasible = all(f for _, f in hat_vals)
            if hat_feasible and (not feasible or hat_value < value):
                value, feasible = hat_value, True
        entries.append(GridEntry(delta=delta, value=value, feasible=feasible))

    feas = [e for e in entries if e.feasible]
    if not feas:
        return CertificateReport(verdict="Inconclusive",
                                 contraction_constant=None,
                                 witness_delta=None, grid=entries)
    best = min(feas, key=lambda e: e.value)
    if best.value < 1.0 - _TIE_TOL:
        verdict = "ContractiveGAS"
    elif best.value <= 1.0 + _TIE_TOL:
        verdict = "NonExpansiveStable"
    else:
        return CertificateReport(verdict="Inconclusive",
                                 contraction_constant=None,
                                 witness_delta=None, grid=entries)
    return CertificateReport(
        verdict=verdict, contraction_constant=best.value,
        witness_delta=best.delta, grid=entries,
        sup_bound=prob.ics.sup_history_sum())


# ---------------------------------------------------------------------------
# delay-free bounds
# ---------------------------------------------------------------------------

@dataclass
class DelayFreeBounds:
    K0_bar: float
    K1_bar: float
    K2_bar: float | None          # None when the smallness condition fails
    decay_detected: bool
    condition_holds: bool
    load: float                   # K1_bar * sum_i (||Atilde_i|| + ||B|| K_i)

    @property
    def verdict(self) -> str:
        if not self.condition_holds:
            return "Inconclusive"
        return ("GloballyAsymptoticallyStable" if self.decay_detected
                else "GloballyStable")

    def as_dict(self) -> dict:
        return {"K0": self.K0_bar, "K1": self.K1_bar, "K2": self.K2_bar,
                "decay_detected": self.decay_detected,
                "verdict": self.verdict}


def _l1_to_infinity(alpha: float, A_bar: np.ndarray,
                    cfg: MlEvalConfig) -> float:
    """Truncated L1 norm of the forcing kernel with a decay-fit tail estimate."""
    lam = np.linalg.eigvals(A_bar)
    if np.any(lam.real >= 0):
        raise KernelNotIntegrable(
            "effective matrix is not a stability matrix")
    if alpha >= 2:
        raise KernelNotIntegrable(
            "kernel has no decay sector for alpha >= 2")
    if alpha > 1:
        args = np.abs(np.angle(lam))
        if np.any(args <= alpha * math.pi / 2 + 1e-12):
            raise KernelNotIntegrable(
                "eigenvalue arguments inside the non-decaying sector")
    rho = float(np.min(np.abs(lam.real)))
    T = max(20.0, 20.0 * (1.0 / rho) ** (1.0 / min(alpha, 1.0)))
    prev = phi_alpha_l1((alpha, A_bar), T, cfg, tol=1e-8)
    inc_prev = None
    for _ in range(10):
        T *= 2.0
        cur = phi_alpha_l1((alpha, A_bar), T, cfg, tol=1e-8)
        inc = cur - prev
        if inc <= 1e-9 * max(1.0, cur):
            return cur
        if inc_prev is not None:
            ratio = inc / inc_prev
            if ratio < 0.75:
                tail = inc * ratio / (1.0 - ratio)
                return cur + 2.0 * tail
        inc_prev, prev = inc, cur
    raise KernelNotIntegrable(
        f"L1 tail did not settle by T = {T:.3g} (last increment {inc:.3g})")


def delay_free_certify(prob: ValidatedProblem,
                       feedback: ControlInput | None = None,
                       cfg: MlEvalConfig = DEFAULT_CONFIG) -> DelayFreeBounds:
    """Solution bounds for the all-lags-zero encoding.

    Kernels use A0 -> sum_i A_i; a constant lag-0 feedback gain with constant
    B is absorbed into that matrix (and dropped from the load sum).
    """
    sys = prob.system
    if not sys.is_delay_free:
        raise DelaysNotZero(f"system has nonzero delays {sys.delays}")
    bounds, ctl = _gain_bounds(prob, feedback)
    bn = b_sup_norm(prob)

    A_bar = sum(sys.A)
    load_terms = [atilde_sup_norm(prob, i) + bn * bounds[i]
                  for i in range(len(sys.delays))]
    if (ctl is not None and sys.B is not None
            and sys.B.sample_times.size == 1):
        # constant-gain variant: fold B K_0 into the kernel matrix
        A_bar = A_bar + sys.B.values[0] @ ctl.gains[0]
        load_terms[0] = atilde_sup_norm(prob, 0)

    ker = Kernels(sys.alpha, A_bar, cfg)
    lam = np.linalg.eigvals(np.atleast_2d(A_bar))
    rho = float(np.min(np.abs(lam.real))) if np.all(lam.real < 0) else 1.0
    T0 = max(20.0, 30.0 * (1.0 / rho) ** (1.0 / min(sys.alpha, 1.0)))
    grid = np.concatenate(([0.0], np.geomspace(T0 * 1e-5, T0, 2000)))
    sup_by_j = []
    tail_by_j = []
    tail_mask = grid >= 0.8 * T0
    for j in range(sys.k):
        mats = ker.phi_j(j, grid, 1e-8, allow_mp=False)
        norms = (np.abs(mats[:, 0, 0]) if sys.n == 1
                 else np.linalg.svd(mats, compute_uv=False)[:, 0])
        sup_by_j.append(float(np.max(norms)))
        tail_by_j.append(float(np.max(norms[tail_mask])))
    K0 = max(sup_by_j)
    decay = max(tail_by_j) <= 1e-3 * max(K0, 1e-300)

    K1 = _l1_to_infinity(sys.alpha, np.atleast_2d(A_bar), cfg)
    load = K1 * sum(load_terms)
    condition = load < 1.0
    K2 = None
    if condition:
        x0_sum = sum(float(np.linalg.norm(v, 2)) for v in prob.ics.x0)
        K2 = K0 * x0_sum / (1.0 - load)
    return DelayFreeBounds(K0_bar=K0, K1_bar=K1, K2_bar=K2,
                           decay_detected=decay, condition_holds=condition,
                           load=load)


# ---------------------------------------------------------------------------
# high-order boundedness check
# ---------------------------------------------------------------------------

@dataclass
class HighOrderResult:
    verdict: str                        # BoundedIndependentOfDelays | Inconclusive
    zeroing_holds: bool
    spectral_passes: bool
    details: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {"verdict": self.verdict, "zeroing_holds": self.zeroing_holds,
                "spectral_passes": self.spectral_passes, **self.details}


def high_order_check(prob: ValidatedProblem,
                     cfg: MlEvalConfig = DEFAULT_CONFIG,
                     zero_tol: float = 1e-12) -> HighOrderResult:
    """Boundedness check for orders alpha >= 2 (not a stability verdict).

    Requires phi_j identically zero for every j < alpha - 1 and the strict
    composite-norm test against |mu2|^(1/alpha) from the spectral module,
    together with the eigenvalue argument condition |arg| < alpha*pi/2.
    """
    from .spectral import theorem34_certify

    sys = prob.system
    if sys.alpha < 2.0:
        raise OrderTooLow(f"alpha = {sys.alpha} is below 2")
    zero_ok = True
    for j, phi in enumerate(prob.ics.phi):
        if j < sys.alpha - 1.0:
            ss = np.linspace(phi.t_start, 0.0, 2001)
            worst = float(np.max(np.abs(phi(ss))))
            if worst > zero_tol:
                zero_ok = False
    t34 = theorem34_certify(sys, cfg)
    spectral_ok = bool(t34.arg_condition_met and t34.strict_norm_test)
    verdict = ("BoundedIndependentOfDelays" if zero_ok and spectral_ok
               else "Inconclusive")
    return HighOrderResult(verdict=verdict, zeroing_holds=zero_ok,
                           spectral_passes=spectral_ok,
                           details={"composite_norm": t34.composite_norm,
                                    "threshold": t34.threshold})
