"""Fixed-order robust output-feedback synthesis for interval FO-LTI plants.

The synthesis conditions are sufficient LMIs obtained from the analysis
certificates by a change of variables T1..T4 absorbing the controller
matrices, with the interval uncertainty handled through its structured
factorization, a scalar multiplier eta, and a Schur-complement lift.  Two
regimes are assembled separately (0 < alpha < 1 with a Hermitian
certificate, 1 <= alpha < 2 with a symmetric one); plants with zero radii
reduce to the certain-system core inequality.

Controller matrices are recovered from a feasible point by inverting the
change of variables through the certificate blocks and the pseudo-inverse
of the output matrix.  The pseudo-inverse step is exact only when the
T2/T4 blocks happen to lie in the row space of C, so every recovered
controller is certified a posteriori against the interval family (vertex
sweep plus random samples plus the nominal analysis LMI) and is never
accepted on LMI feasibility alone.
"""

from dataclasses import dataclass, replace

import numpy as np

from .errors import (
    AlphaOutOfRangeError,
    FolmiError,
    InfeasibleError,
    ShapeMismatchError,
    SingularCertificateError,
)
from .interval import (
    UncertaintyRealization,
    center_realization,
    count_vertices,
    decompose,
    enumerate_vertices,
    realize,
    sample_uniform,
)
from .linalg import as_matrix, pinv
from .lmi import (
    LmiProblem,
    SdpStatus,
    Sense,
    SolverConfig,
    block_expr,
    solve_feasibility,
    sym_expr,
)
from .stability import analysis_feasible, closed_loop, sector_margin

COND_CAP = 1e12


@dataclass(frozen=True)
class DynamicController:
    """Output-feedback controller of fixed order n_c.

    D^alpha x_c = Ac x_c + Bc y,  u = Cc x_c + Dc y.  A static controller
    has n_c = 0 with empty Ac/Bc/Cc and only the feedthrough Dc active.
    """

    n_c: int
    a_c: np.ndarray
    b_c: np.ndarray
    c_c: np.ndarray
    d_c: np.ndarray

    def __post_init__(self):
        d_c = as_matrix(self.d_c, "d_c")
        l, m = d_c.shape
        n_c = self.n_c
        a_c = np.asarray(self.a_c, float).reshape(n_c, n_c)
        b_c = np.asarray(self.b_c, float).reshape(n_c, m)
        c_c = np.asarray(self.c_c, float).reshape(l, n_c)
        for name, arr in (("a_c", a_c), ("b_c", b_c), ("c_c", c_c)):
            if arr.size and not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} has non-finite entries")
        object.__setattr__(self, "a_c", a_c)
        object.__setattr__(self, "b_c", b_c)
        object.__setattr__(self, "c_c", c_c)
        object.__setattr__(self, "d_c", d_c)

    @classmethod
    def static(cls, d_c):
        d = np.atleast_2d(np.asarray(d_c, float))
        return cls(0, np.zeros((0, 0)), np.zeros((0, d.shape[1])),
                   np.zeros((d.shape[0], 0)), d)

    def to_dict(self):
        return {
            "n_c": self.n_c,
            "a_c": self.a_c.tolist(),
            "b_c": self.b_c.tolist(),
            "c_c": self.c_c.tolist(),
            "d_c": self.d_c.tolist(),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            int(d["n_c"]),
            np.asarray(d["a_c"], float),
            np.asarray(d["b_c"], float),
            np.asarray(d["c_c"], float),
            np.asarray(d["d_c"], float),
        )


@dataclass(frozen=True)
class CertificationReport:
    """Outcome of sweeping a controller over the uncertainty family."""

    vertex_count: int
    sample_count: int
    min_sector_margin: float
    worst_realization: UncertaintyRealization
    nominal_lmi_ok: bool
    passed: bool
    vertices_exhaustive: bool


@dataclass(frozen=True)
class SynthesisResult:
    """Feasible point of a synthesis LMI plus the recovered controller.

    ``eta`` is None on the certain-system (zero radii) path, where no
    uncertainty multiplier exists.  ``p_s`` is complex Hermitian on the
    0 < alpha < 1 path and real symmetric otherwise.
    """

    controller: DynamicController
    eta: float | None
    p_s: np.ndarray
    p_c: np.ndarray
    t1: np.ndarray
    t2: np.ndarray
    t3: np.ndarray
    t4: np.ndarray
    solver_status: SdpStatus
    alpha: float
    values: np.ndarray
    problem: LmiProblem


@dataclass
class _Assembly:
    """LmiProblem plus the variable handles needed for recovery."""

    problem: LmiProblem
    alpha: float
    theta: float
    n: int
    l: int
    m: int
    n_c: int
    c: np.ndarray
    blocks: dict
    uncertain: bool


def _check_synthesis_shapes(factors, c, n_c):
    c = as_matrix(c, "c")
    if c.shape[1] != factors.n:
        raise ShapeMismatchError(f"C has {c.shape[1]} columns, expected {factors.n}")
    if n_c < 0:
        raise ValueError(f"n_c must be >= 0, got {n_c}")
    return c


def assemble_low_alpha(factors, c, alpha, n_c):
    """Synthesis LMI for 0 < alpha < 1.

    Decision variables: Hermitian certificates P_S = X_S + i Y_S (n x n)
    and P_C = X_C + i Y_C (n_c x n_c) through their real parts, controller
    lifts T1..T4, and the multiplier eta.  With theta = (1-alpha)*pi/2 and
    Q = 2 cos(theta) X - 2 sin(theta) Y standing in for r P + conj(r P),
    the core block is

        Sigma = [[Sym(A0 Qs) + Sym(B0 T4), B0 T3 + T2^T],
                 [..sym..,                 T1 + T1^T]]

    and the uncertainty enters through the Schur-form constraint
    [[Sigma + eta M M^T, R^T], [R, -eta I]] < 0 with M = [[M_A, M_B], [0, 0]]
    and R = [[R_A Qs, 0], [R_B T4, R_B T3]] (all-zero rows and columns of
    the factorization are dropped; they contribute nothing).  Positivity of
    the Hermitian certificates is imposed on their real embeddings,
    normalized to >= I, which is equivalent by homogeneity and pins the
    certificate scale.  On the certain path (all radii zero) only
    Sigma < 0 and the positivity blocks are emitted.
    """
    if not 0.0 < alpha < 1.0:
        raise AlphaOutOfRangeError(f"low-alpha synthesis needs 0 < alpha < 1, got {alpha}")
    c = _check_synthesis_shapes(factors, c, n_c)
    n, l, m = factors.n, factors.l, c.shape[0]
    theta = (1.0 - alpha) * np.pi / 2.0
    a0, b0 = factors.a0, factors.b0
    uncertain = not factors.is_certain

    p = LmiProblem()
    xs = p.declare_symmetric_block(n, "X_S")
    ys = p.declare_skew_block(n, "Y_S")
    xc = p.declare_symmetric_block(n_c, "X_C")
    yc = p.declare_skew_block(n_c, "Y_C")
    t1 = p.declare_full_block(n_c, n_c, "T1")
    t2 = p.declare_full_block(n_c, n, "T2")
    t3 = p.declare_full_block(l, n_c, "T3")
    t4 = p.declare_full_block(l, n, "T4")

    cs, sn = 2.0 * np.cos(theta), 2.0 * np.sin(theta)
    qs = cs * xs.expr() - sn * ys.expr()
    s11 = sym_expr(a0 @ qs) + sym_expr(b0 @ t4.expr())
    s12 = b0 @ t3.expr() + t2.expr().T
    s22 = sym_expr(t1.expr())
    sigma = block_expr([[s11, s12], [s12.T, s22]])

    blocks = {"xs": xs, "ys": ys, "xc": xc, "yc": yc,
              "t1": t1, "t2": t2, "t3": t3, "t4": t4}

    if uncertain:
        eta = p.declare_scalar("eta")
        blocks["eta"] = eta
        mmt = factors.m_a @ factors.m_a.T + factors.m_b @ factors.m_b.T
        mmt_aug = np.zeros((n + n_c, n + n_c))
        mmt_aug[:n, :n] = mmt
        r = block_expr([
            [factors.r_a @ qs, np.zeros((n * n, n_c))],
            [factors.r_b @ t4.expr(), factors.r_b @ t3.expr()],
        ])
        q_dim = n * n + n * l
        schur = block_expr([
            [sigma + eta.scale(mmt_aug), r.T],
            [r, -1.0 * eta.scale(np.eye(q_dim))],
        ])
        p.add_constraint(schur, Sense.NEGATIVE_DEFINITE)
        p.add_constraint(eta.expr(), Sense.POSITIVE_DEFINITE)
    else:
        p.add_constraint(sigma, Sense.NEGATIVE_DEFINITE)

    emb_s = block_expr([[xs.expr(), -1.0 * ys.expr()], [ys.expr(), xs.expr()]])
    p.add_constraint(emb_s - np.eye(2 * n), Sense.POSITIVE_DEFINITE)
    if n_c > 0:
        emb_c = block_expr([[xc.expr(), -1.0 * yc.expr()], [yc.expr(), xc.expr()]])
        p.add_constraint(emb_c - np.eye(2 * n_c), Sense.POSITIVE_DEFINITE)

    return _Assembly(p, alpha, theta, n, l, m, n_c, c, blocks, uncertain)


def assemble_high_alpha(factors, c, alpha, n_c):
    """Synthesis LMI for 1 <= alpha < 2.

    Decision variables: symmetric certificates P_S, P_C, lifts T1..T4 and
    the multiplier eta; theta = pi - alpha*pi/2.  The core Sigma is the
    2x2 rotation-structured block built from the symmetric part G_s and
    skew part G_k of the certain closed-loop expression,

        Sigma = [[G_s sin(theta),  G_k cos(theta)],
                 [-G_k cos(theta), G_s sin(theta)]],

    the uncertainty rows are R = I_2 kron [[R_A P_S, 0], [R_B T4, R_B T3]]
    and M carries the same rotation structure, so M M^T = I_2 kron
    (M_A M_A^T + M_B M_B^T).  Certain path: Sigma < 0 only.
    """
    if not 1.0 <= alpha < 2.0:
        raise AlphaOutOfRangeError(f"high-alpha synthesis needs 1 <= alpha < 2, got {alpha}")
    c = _check_synthesis_shapes(factors, c, n_c)
    n, l, m = factors.n, factors.l, c.shape[0]
    theta = np.pi - alpha * np.pi / 2.0
    st, ct = np.sin(theta), np.cos(theta)
    a0, b0 = factors.a0, factors.b0
    uncertain = not factors.is_certain

    p = LmiProblem()
    ps = p.declare_symmetric_block(n, "P_S")
    pc = p.declare_symmetric_block(n_c, "P_C")
    t1 = p.declare_full_block(n_c, n_c, "T1")
    t2 = p.declare_full_block(n_c, n, "T2")
    t3 = p.declare_full_block(l, n_c, "T3")
    t4 = p.declare_full_block(l, n, "T4")

    pse = ps.expr()
    g11s = sym_expr(a0 @ pse) + sym_expr(b0 @ t4.expr())
    g12s = b0 @ t3.expr() + t2.expr().T
    g22s = sym_expr(t1.expr())
    gs = block_expr([[g11s, g12s], [g12s.T, g22s]])
    g11k = (a0 @ pse - (a0 @ pse).T) + (b0 @ t4.expr() - (b0 @ t4.expr()).T)
    g12k = b0 @ t3.expr() - t2.expr().T
    g22k = t1.expr() - t1.expr().T
    gk = block_expr([[g11k, g12k], [-1.0 * g12k.T, g22k]])
    sigma = block_expr([[st * gs, ct * gk], [(-ct) * gk, st * gs]])

    blocks = {"ps": ps, "pc": pc, "t1": t1, "t2": t2, "t3": t3, "t4": t4}

    if uncertain:
        eta = p.declare_scalar("eta")
        blocks["eta"] = eta
        mmt = factors.m_a @ factors.m_a.T + factors.m_b @ factors.m_b.T
        d = n + n_c
        mmt_aug = np.zeros((2 * d, 2 * d))
        mmt_aug[:n, :n] = mmt
        mmt_aug[d : d + n, d : d + n] = mmt
        r_in = block_expr([
            [factors.r_a @ pse, np.zeros((n * n, n_c))],
            [factors.r_b @ t4.expr(), factors.r_b @ t3.expr()],
        ])
        q_dim = n * n + n * l
        zeros = np.zeros((q_dim, d))
        r = block_expr([[r_in, zeros], [zeros, r_in]])
        schur = block_expr([
            [sigma + eta.scale(mmt_aug), r.T],
            [r, -1.0 * eta.scale(np.eye(2 * q_dim))],
        ])
        p.add_constraint(schur, Sense.NEGATIVE_DEFINITE)
        p.add_constraint(eta.expr(), Sense.POSITIVE_DEFINITE)
    else:
        p.add_constraint(sigma, Sense.NEGATIVE_DEFINITE)

    p.add_constraint(pse - np.eye(n), Sense.POSITIVE_DEFINITE)
    if n_c > 0:
        p.add_constraint(pc.expr() - np.eye(n_c), Sense.POSITIVE_DEFINITE)

    return _Assembly(p, alpha, theta, n, l, m, n_c, c, blocks, uncertain)


def _invert_certificate(q, what):
    if q.shape[0] == 0:
        return np.zeros((0, 0))
    if np.linalg.cond(q) > COND_CAP:
        raise SingularCertificateError(f"{what} too ill-conditioned to invert")
    return np.linalg.inv(q)


def recover_low_alpha(assembly, solution):
    """Invert the 0 < alpha < 1 change of variables.

    Ac = T1 Qc^-1, Bc = T2 Qs^-1 C^+, Cc = T3 Qc^-1, Dc = T4 Qs^-1 C^+
    with Q = 2 cos(theta) X - 2 sin(theta) Y, all real by construction.
    """
    v = solution.values
    b = assembly.blocks
    cs = 2.0 * np.cos(assembly.theta)
    sn = 2.0 * np.sin(assembly.theta)
    q_s = cs * b["xs"].value(v) - sn * b["ys"].value(v)
    q_c = cs * b["xc"].value(v) - sn * b["yc"].value(v)
    qs_inv = _invert_certificate(q_s, "Q_S")
    qc_inv = _invert_certificate(q_c, "Q_C")
    c_pinv = pinv(assembly.c)
    d_c = b["t4"].value(v) @ qs_inv @ c_pinv
    if assembly.n_c == 0:
        return DynamicController.static(d_c)
    a_c = b["t1"].value(v) @ qc_inv
    b_c = b["t2"].value(v) @ qs_inv @ c_pinv
    c_c = b["t3"].value(v) @ qc_inv
    return DynamicController(assembly.n_c, a_c, b_c, c_c, d_c)


def recover_high_alpha(assembly, solution):
    """Invert the 1 <= alpha < 2 change of variables.

    Ac = T1 Pc^-1, Bc = T2 Ps^-1 C^+, Cc = T3 Pc^-1, Dc = T4 Ps^-1 C^+.
    """
    v = solution.values
    b = assembly.blocks
    p_s = b["ps"].value(v)
    p_c = b["pc"].value(v)
    ps_inv = _invert_certificate(p_s, "P_S")
    pc_inv = _invert_certificate(p_c, "P_C")
    c_pinv = pinv(assembly.c)
    d_c = b["t4"].value(v) @ ps_inv @ c_pinv
    if assembly.n_c == 0:
        return DynamicController.static(d_c)
    a_c = b["t1"].value(v) @ pc_inv
    b_c = b["t2"].value(v) @ ps_inv @ c_pinv
    c_c = b["t3"].value(v) @ pc_inv
    return DynamicController(assembly.n_c, a_c, b_c, c_c, d_c)


def _result_from(assembly, solution, controller):
    v = solution.values
    b = assembly.blocks
    eta = float(b["eta"].value(v)[0, 0]) if "eta" in b else None
    if "xs" in b:
        p_s = b["xs"].value(v) + 1j * b["ys"].value(v)
        p_c = b["xc"].value(v) + 1j * b["yc"].value(v)
    else:
        p_s = b["ps"].value(v)
        p_c = b["pc"].value(v)
    return SynthesisResult(
        controller=controller,
        eta=eta,
        p_s=p_s,
        p_c=p_c,
        t1=b["t1"].value(v),
        t2=b["t2"].value(v),
        t3=b["t3"].value(v),
        t4=b["t4"].value(v),
        solver_status=solution.status,
        alpha=assembly.alpha,
        values=v,
        problem=assembly.problem,
    )


def certify(sys, controller, sample_count=500, seed=0, solver_cfg=None):
    """Sweep a controller over the uncertainty family and the nominal LMI.

    Checks the sector margin of the closed loop at every vertex of the
    interval family (when at most 2^24 exist; otherwise samples only and
    the report says so) plus ``sample_count`` seeded uniform interior
    realizations, and runs the regime-matching analysis LMI on the center
    closed loop.  ``passed`` requires every margin positive and the
    nominal LMI feasible.  Vertex checking does not prove stability of the
    continuous family, which is why interior samples are always included.
    """
    factors = decompose(sys)
    exhaustive = count_vertices(factors) <= 2 ** 24
    realizations = []
    vertex_count = 0
    if exhaustive:
        realizations.extend(enumerate_vertices(factors))
        vertex_count = len(realizations)
    if sample_count > 0:
        realizations.extend(sample_uniform(factors, sample_count, seed))

    min_margin = np.inf
    worst = center_realization(factors)
    for u in realizations:
        a, b = realize(factors, u)
        a_cl = closed_loop(a, b, sys.c, controller)
        report = sector_margin(a_cl, sys.alpha)
        if report.margin < min_margin:
            min_margin = report.margin
            worst = u
    a_cl0 = closed_loop(factors.a0, factors.b0, sys.c, controller)
    try:
        nominal_ok = analysis_feasible(a_cl0, sys.alpha, solver_cfg).feasible
    except FolmiError:
        nominal_ok = False
    passed = bool(min_margin > 0.0) and nominal_ok
    return CertificationReport(
        vertex_count=vertex_count,
        sample_count=max(sample_count, 0),
        min_sector_margin=float(min_margin),
        worst_realization=worst,
        nominal_lmi_ok=nominal_ok,
        passed=passed,
        vertices_exhaustive=exhaustive,
    )


def synthesize(sys, n_c, solver_cfg=None, sample_count=500, seed=0):
    """Design and certify a fixed-order controller for an interval plant.

    Dispatches on the order regime, solves the synthesis LMI, recovers the
    controller, and certifies it a posteriori.  A controller failing
    certification triggers one retry at 10x the strictness margin and
    solve depth (a better-centered point) before the failed certification
    is returned; a failed result is returned with ``passed = False``,
    never hidden.  Raises :class:`InfeasibleError` when the LMI itself is
    infeasible or undecidable.
    """
    cfg = solver_cfg or SolverConfig()
    factors = decompose(sys)

    def attempt(run_cfg):
        if 0.0 < sys.alpha < 1.0:
            asm = assemble_low_alpha(factors, sys.c, sys.alpha, n_c)
            recover = recover_low_alpha
        else:
            asm = assemble_high_alpha(factors, sys.c, sys.alpha, n_c)
            recover = recover_high_alpha
        sol = solve_feasibility(asm.problem, run_cfg)
        if sol.status is not SdpStatus.FEASIBLE:
            raise InfeasibleError(
                f"synthesis LMI {sol.status.value} for n_c={n_c}, alpha={sys.alpha}"
            )
        controller = recover(asm, sol)
        result = _result_from(asm, sol, controller)
        report = certify(sys, controller, sample_count, seed, run_cfg)
        return result, report

    result, report = attempt(cfg)
    if not report.passed:
        deeper = replace(
            cfg,
            eps_margin=cfg.eps_margin * 10.0,
            feasibility_depth=max(cfg.feasibility_depth * 10.0, cfg.eps_margin * 10.0),
        )
        result, report = attempt(deeper)
    return result, report
