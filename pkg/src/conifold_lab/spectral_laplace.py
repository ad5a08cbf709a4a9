"""Per-mode radial discretization of the Laplacian and its extremal
constants on conifold models and glued families.

Separation of variables reduces the positive Laplacian on a warped
product dx^2 + f(x)^2 g' to the decoupled radial operators

    A_e u = -u'' - (m-1)(f'/f) u' + (e/f^2) u,

one per link eigenvalue e.  We discretize P = rho^2 A_e with
second-order three-point stencils on the graded mesh (uniform in log r
on end regions, where P is the log-coordinate form of the operator of
the cylindrical substitution r = e^z), close the boundaries by

    cap:            even/odd regularity at the smooth center,
    AC truncation:  Robin u' = (gamma/r) u with gamma the decaying root
                    for e (matching the cone-tail harmonic exactly), or
                    the growing root when scanning for kernel elements
                    that the target weight admits,
    CS truncation:  Robin with the locally bounded root,

and measure everything against the weighted quadratic forms of the
k = 0, 1, 2 weighted Sobolev norms.  Invertibility and Poincare
constants are smallest/largest generalized singular values of the
resulting banded pencils; kernel dimensions are counts of near-null
singular values against a grid-calibrated threshold.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .conifold_model import (
    ConifoldModel,
    GluedFamily,
    GluedModel,
    RadialGeometry,
)
from .link_spectra import Link
from .weighted_calc import ModeFunction, RadialGrid, build_grid
from .weight_calculus import distance_to_exceptional, gamma_roots

__all__ = [
    "ClosureRule",
    "ModeOperator",
    "assemble_mode_operator",
    "WeightedQuadraticForm",
    "harmonic_basis_cone",
    "smallest_pencil_eigs",
    "near_null_threshold",
    "InvertibilityReport",
    "invertibility_constant",
    "CompactInvertibilityReport",
    "restricted_invertibility_compact",
    "PoincareReport",
    "poincare_constant",
    "WeightCrossingReport",
    "weight_crossing_kernel",
    "KernelScanRow",
    "kernel_dimension_scan",
    "WeightConditionError",
    "duality_defect",
]


class WeightConditionError(ValueError):
    """A weight violates the structural conditions the estimate needs."""


# ---------------------------------------------------------------------------
# boundary closures


@dataclass(frozen=True)
class ClosureRule:
    """How one truncated boundary expresses its node through interior ones.

    kind 'cap_even' : smooth-center regularity for the rotation-invariant
                      mode (quadratic even extension).
    kind 'zero'     : node value 0 (center regularity for modes e > 0).
    kind 'robin'    : power-law extrapolation u_bnd = u_adj (r_bnd/r_adj)^s,
                      exact for cone-tail harmonics of rate s.
    """

    kind: str
    slope: float = 0.0


def _default_closures(grid: RadialGrid, e: float, beta: float | None,
                      kernel_scan: bool) -> tuple[ClosureRule | None, ClosureRule | None]:
    geo = grid.geometry
    m = geo.m
    gp, gm = gamma_roots(e, m)

    def rule(b):
        if b is None:
            return None
        if b.kind == "cap":
            return ClosureRule("cap_even") if e == 0.0 else ClosureRule("zero")
        if b.kind == "ac":
            if kernel_scan and beta is not None and gp < beta:
                return ClosureRule("robin", gp)
            return ClosureRule("robin", gm)
        if b.kind == "cs":
            return ClosureRule("robin", gp)
        raise ValueError(b.kind)

    return rule(geo.left), rule(geo.right)


def _reduction_matrix(grid: RadialGrid, left: ClosureRule | None,
                      right: ClosureRule | None) -> tuple[sp.spmatrix, np.ndarray]:
    """R with u_full = R u_interior, plus the interior node indices."""
    n = grid.n
    if grid.geometry.circle:
        return sp.identity(n, format="csr"), np.arange(n)
    interior = np.arange(1, n - 1)
    n_i = interior.size
    rows, cols, vals = [], [], []
    for i_local, i in enumerate(interior):
        rows.append(i)
        cols.append(i_local)
        vals.append(1.0)

    def add_boundary(i_bnd, rule, b):
        if rule.kind == "zero":
            return
        if rule.kind == "cap_even":
            i1, i2 = (1, 2) if i_bnd == 0 else (n - 2, n - 3)
            h1 = abs(grid.nodes[i1] - grid.nodes[i_bnd])
            h2 = abs(grid.nodes[i2] - grid.nodes[i_bnd])
            den = h2 * h2 - h1 * h1
            rows.extend([i_bnd, i_bnd])
            cols.extend([i1 - 1, i2 - 1])
            vals.extend([h2 * h2 / den, -h1 * h1 / den])
            return
        if rule.kind == "robin":
            i_adj = 1 if i_bnd == 0 else n - 2
            r_b = b.sign * (grid.nodes[i_bnd] - b.x0)
            r_a = b.sign * (grid.nodes[i_adj] - b.x0)
            rows.append(i_bnd)
            cols.append(i_adj - 1)
            vals.append((r_b / r_a) ** rule.slope)
            return
        raise ValueError(rule.kind)

    add_boundary(0, left, grid.geometry.left)
    add_boundary(n - 1, right, grid.geometry.right)
    R = sp.csr_matrix((vals, (rows, cols)), shape=(n, n_i))
    return R, interior


@dataclass
class ModeOperator:
    """Banded realization of P = rho^2 A_e with boundary closures.

    P_full has consistent rows at every node (boundary rows one-sided);
    residuals and solves use the interior rows composed with the
    reduction R.
    """

    e: float
    grid: RadialGrid
    P_full: sp.spmatrix
    R: sp.spmatrix
    interior: np.ndarray
    closures: tuple

    @property
    def n_interior(self) -> int:
        return self.R.shape[1]

    def apply(self, values: np.ndarray) -> np.ndarray:
        return self.P_full @ np.asarray(values, dtype=float)

    def interior_rows(self) -> sp.spmatrix:
        return self.P_full[self.interior]

    def reduced(self) -> sp.spmatrix:
        return (self.P_full[self.interior] @ self.R).tocsc()

    def solve(self, rhs_full_rows: np.ndarray) -> np.ndarray:
        """Solve P u = rhs on the reduced space; returns full nodal values."""
        lu = spla.splu(self.reduced())
        u_int = lu.solve(np.asarray(rhs_full_rows, dtype=float)[self.interior])
        return self.R @ u_int


def assemble_mode_operator(
    grid: RadialGrid,
    e: float,
    beta: float | None = None,
    kernel_scan: bool = False,
    closures: tuple[ClosureRule | None, ClosureRule | None] | None = None,
) -> ModeOperator:
    """Second-order discretization of rho^2 A_e on the grid.

    On log-graded end regions the three-point stencils are the uniform
    central differences of the log-coordinate operator (second-order
    consistent on cone harmonics r^gamma); closures default to the rules
    described in the module docstring."""
    if closures is None:
        closures = _default_closures(grid, e, beta, kernel_scan)
    f, fp, rho = grid.f, grid.fp, grid.rho
    n = grid.n
    m = grid.geometry.m
    coeff2 = sp.diags(-(rho**2))
    coeff1 = sp.diags(-(m - 1.0) * rho**2 * fp / f)
    coeff0 = sp.diags(e * rho**2 / f**2)
    P = (coeff2 @ grid.d2 + coeff1 @ grid.d1 + coeff0).tocsr()
    R, interior = _reduction_matrix(grid, closures[0], closures[1])
    return ModeOperator(e=float(e), grid=grid, P_full=P, R=R,
                        interior=interior, closures=closures)


# ---------------------------------------------------------------------------
# weighted quadratic forms


@dataclass
class WeightedQuadraticForm:
    """SPD realization of the squared weighted Sobolev norm of one mode.

    For k = 0 the matrix is diagonal (quadrature weights); the k = 1, 2
    derivative blocks sandwich the same diagonal weights between the
    difference operators, so the assembled matrix is banded SPD on the
    reduced space.
    """

    grid: RadialGrid
    k: int
    beta: float | None
    e: float
    matrix: sp.spmatrix

    def reduced(self, R: sp.spmatrix) -> sp.spmatrix:
        return (R.T @ self.matrix @ R).tocsc()

    def norm(self, values: np.ndarray) -> float:
        v = np.asarray(values, dtype=float)
        return float(np.sqrt(max(v @ (self.matrix @ v), 0.0)))


def weighted_form(grid: RadialGrid, k: int, beta: float | None, e: float) -> WeightedQuadraticForm:
    """Quadratic form of ||.||^2_{W^2_{k,beta}} for a single mode e."""
    g = grid
    m = g.geometry.m
    beta_vals = g.beta if beta is None else np.full(g.n, float(beta))
    w = g.wextra * g.rho ** (-beta_vals)
    base = g.quad * g.f ** (m - 1) * g.volume_factor * g.rho ** (-float(m))
    kappa = g.geometry.link.einstein_constant or 0.0

    W0 = w**2 * base
    M = sp.diags(W0).tocsr()
    if k >= 1:
        W1 = (w * g.rho) ** 2 * base
        D1 = g.d1
        M = M + D1.T @ sp.diags(W1) @ D1 + sp.diags(W1 * e / g.f**2)
    if k >= 2:
        W2 = (w * g.rho**2) ** 2 * base
        D1, D2 = g.d1, g.d2
        M = M + D2.T @ sp.diags(W2) @ D2
        # mixed radial-angular block: 2 e f^-2 (u' - (f'/f) u)^2
        mix = sp.diags(2.0 * e * W2 / g.f**2)
        B = D1 - sp.diags(g.fp / g.f)
        M = M + B.T @ mix @ B
        # pure angular block: f^-4 ((e^2 - kappa e) u^2
        #                     - 2 e f f' u u' + (m-1) f^2 f'^2 u'^2)
        hess_c = max(e * e - kappa * e, 0.0)
        c1 = hess_c * W2 / g.f**4
        c2 = -e * g.fp * W2 / g.f**3
        c3 = (m - 1.0) * g.fp**2 * W2 / g.f**2
        M = M + sp.diags(c1) + D1.T @ sp.diags(c3) @ D1
        M = M + sp.diags(c2) @ D1 + D1.T @ sp.diags(c2)
    return WeightedQuadraticForm(grid=grid, k=k, beta=beta, e=e, matrix=M.tocsr())


@dataclass
class LaplacePencil:
    """Factored pencil of Delta: W_{2,beta} -> W_{0,beta-2} for one mode.

    A = Pi^T diag(w_img) Pi is the assembled normal form; sigma
    evaluations should use the factored residual ||w_img^(1/2) Pi v||
    (the assembled A loses near-null information to cancellation)."""

    A: sp.spmatrix
    B: sp.spmatrix
    op: ModeOperator
    Pi: sp.spmatrix
    w_img: np.ndarray

    def residual_sigma(self, v_interior: np.ndarray) -> float:
        r = self.Pi @ v_interior
        num = float(np.sum(self.w_img * r * r))
        den = float(v_interior @ (self.B @ v_interior))
        return math.sqrt(max(num, 0.0) / max(den, 1e-300))


def laplacian_pencil(grid: RadialGrid, e: float, beta: float | None,
                     kernel_scan: bool = False) -> LaplacePencil:
    """Factored realization of Delta between the k=2 and k=0 weighted
    spaces: Pi applies rho^2 Delta at interior nodes on the reduced
    space, w_img carries the weight-(beta-2) mass of Delta u =
    rho^{-2} P u (the rho^2 factors cancel into plain rho^{-2 beta}
    weights), and B is the reduced k=2 form."""
    op = assemble_mode_operator(grid, e, beta=beta, kernel_scan=kernel_scan)
    g = grid
    m = g.geometry.m
    beta_vals = g.beta if beta is None else np.full(g.n, float(beta))
    w_img_full = (g.wextra * g.rho ** (-beta_vals)) ** 2 * g.quad * g.f ** (m - 1) \
        * g.volume_factor * g.rho ** (-float(m))
    Pi = (op.P_full[op.interior] @ op.R).tocsr()
    w_img = w_img_full[op.interior]
    A = (Pi.T @ sp.diags(w_img) @ Pi).tocsc()
    B = weighted_form(grid, 2, beta, e).reduced(op.R)
    return LaplacePencil(A=A, B=B, op=op, Pi=Pi, w_img=w_img)


# ---------------------------------------------------------------------------
# generalized eigen solves


def _deterministic_v0(n: int) -> np.ndarray:
    v = np.sin(0.7 + 1.3 * np.arange(n))
    return v / np.linalg.norm(v)


def _pencil_num(pen: "LaplacePencil"):
    def num_form(v):
        r = pen.Pi @ v
        return float(np.sum(pen.w_img * r * r))
    return num_form


def smallest_pencil_eigs(
    A: sp.spmatrix,
    B: sp.spmatrix,
    k: int = 1,
    constraint: np.ndarray | None = None,
    num_form=None,
) -> np.ndarray:
    """The k smallest eigenvalues of the SPD pencil A v = lam B v,
    optionally restricted to {v : constraint . v = 0} via a bordered
    shift-inverted solve.  Deterministic (fixed start vector).

    num_form(v) -> v^T A v, when supplied, re-evaluates the Rayleigh
    quotients of the converged vectors in a cancellation-free factored
    form; the assembled normal matrix A floors tiny eigenvalues at
    roundoff times its entry magnitudes, so near-null detection needs
    this polish."""
    n = A.shape[0]
    k = min(k, n - 2)
    scale = max((A.diagonal().sum() / max(B.diagonal().sum(), 1e-300)), 1e-300)
    sigma = -1e-8 * scale

    def polish(vals, vecs):
        if num_form is None:
            return np.sort(vals)
        out = []
        for i in range(vecs.shape[1]):
            v = vecs[:, i]
            den = float(v @ (B @ v))
            out.append(num_form(v) / max(den, 1e-300))
        return np.sort(out)

    if constraint is None:
        try:
            vals, vecs = spla.eigsh(A, k=k, M=B, sigma=sigma, which="LM",
                                    v0=_deterministic_v0(n))
            return polish(vals, vecs)
        except Exception:
            if n <= 4000:
                from scipy.linalg import eigh
                vals, vecs = eigh(A.toarray(), B.toarray(),
                                  subset_by_index=[0, k - 1])
                return polish(vals, vecs)
            raise

    q = np.asarray(constraint, dtype=float)
    K = sp.bmat([[(A - sigma * B).tocsc(), q[:, None]],
                 [q[None, :], None]], format="csc")
    lu = spla.splu(K)

    def op_inv(b):
        rhs = np.concatenate([b, [0.0]])
        return lu.solve(rhs)[:-1]

    OPinv = spla.LinearOperator((n, n), matvec=op_inv)
    v0 = _deterministic_v0(n)
    v0 = v0 - q * (q @ v0) / (q @ q)
    try:
        vals, vecs = spla.eigsh(A, k=k, M=B, sigma=sigma, which="LM", OPinv=OPinv,
                                v0=v0)
        return polish(vals, vecs)
    except Exception:
        if n > 4000:
            raise
        from scipy.linalg import eigh, null_space
        Z = null_space(q[None, :])
        Ad = Z.T @ (A @ Z)
        Bd = Z.T @ (B @ Z)
        vals, vecs = eigh(Ad, Bd, subset_by_index=[0, k - 1])
        return polish(vals, Z @ vecs)


def _sigma_from(vals: np.ndarray) -> np.ndarray:
    return np.sqrt(np.maximum(vals, 0.0))


# ---------------------------------------------------------------------------
# cone harmonics and calibration


def harmonic_basis_cone(link: Link, m: int, e: float) -> tuple[float, float, int]:
    """Homogeneity degrees (gamma_plus, gamma_minus) and multiplicity of
    the harmonics r^gamma s(theta) on the exact cone for link eigenvalue
    e; e must belong to the spectrum."""
    mult = link.multiplicity_of(e)  # raises if absent
    gp, gm = gamma_roots(e, m)
    return gp, gm, mult


def near_null_threshold(
    link: Link, m: int, e_max: float, beta: float,
    nodes_per_decade: float, r_span: tuple[float, float] = (1e-3, 1e3),
) -> float:
    """Grid-calibrated kernel-detection threshold: 10 times the largest
    pencil value of sampled exact-cone harmonics on an exact cone meshed
    at the same log density, using the matching Robin closures (exact for
    the samples, so the value isolates interior discretization error)."""
    from .conifold_model import Component, EndSpec, warp_preset

    r_lo, r_hi = r_span
    comp = Component(
        link=link, warp=warp_preset("exact_cone"),
        left=EndSpec("CS", link, nu=1.0, beta=beta, boundary=math.sqrt(r_lo * r_hi)),
        right=EndSpec("AC", link, nu=-1.0, beta=beta, boundary=math.sqrt(r_lo * r_hi)),
    )
    model = ConifoldModel(m, (comp,))
    decades = math.log10(r_hi / r_lo)
    n = max(64, int(nodes_per_decade * decades / 2))
    grid = build_grid(model.geometry(0), n_per_region=n,
                      r_max=r_hi, r_min_factor=r_lo / math.sqrt(r_lo * r_hi))
    worst = 0.0
    for e, _ in link.eigenvalues_below(e_max):
        gp, gm = gamma_roots(e, m)
        for gamma in (gp, gm):
            closures = (ClosureRule("robin", gamma), ClosureRule("robin", gamma))
            op = assemble_mode_operator(grid, e, closures=closures)
            u = grid.rho**gamma
            num_form = weighted_form(grid, 0, beta, e)
            w_img = num_form.matrix.diagonal()[op.interior]
            resid = (op.P_full @ u)[op.interior]
            num = math.sqrt(float(np.sum(w_img * resid**2)))
            den = weighted_form(grid, 2, beta, e).norm(u)
            if den > 0:
                worst = max(worst, num / den)
    return 10.0 * worst


def _grid_nodes_per_decade(grid: RadialGrid) -> float:
    best = 0.0
    for seg in grid.geometry.plan:
        if seg.kind != "log":
            continue
        r = seg.sign * (grid.nodes - seg.x0)
        ok = r > 0
        if np.count_nonzero(ok) < 8:
            continue
        r = r[ok]
        decades = math.log10(np.max(r) / np.min(r))
        if decades > 0.1:
            best = max(best, np.count_nonzero(ok) / decades)
    return best if best > 0 else grid.n / 3.0


# ---------------------------------------------------------------------------
# geometry helpers shared by the constant computations


def _resolve_geometry(model) -> RadialGeometry:
    if isinstance(model, RadialGeometry):
        return model
    if isinstance(model, GluedModel):
        return model.geometry
    if isinstance(model, ConifoldModel):
        if len(model.components) != 1:
            raise ValueError("pass a single component (or its geometry)")
        return model.geometry(0)
    raise TypeError(f"cannot interpret {type(model).__name__} as a radial geometry")


def _residual_ends(geo: RadialGeometry):
    out = []
    for b in (geo.left, geo.right):
        if b is not None and b.kind in ("cs", "ac"):
            out.append(b)
    return out


def _check_lemma_weights(geo: RadialGeometry, beta: float):
    """Structural weight conditions for uniform invertibility at the
    requested constant weight: AC ends strictly below 0, CS ends strictly
    above 2-m, at least one residual end whose weight alone forces
    injectivity (AC < 0 / CS > 0), and marked necks inside (2-m, 0)."""
    m = geo.m
    ends = _residual_ends(geo)
    if not ends:
        raise WeightConditionError(
            "model has no residual ends; use the transverse-subspace solver "
            "for compact glued manifolds"
        )
    for b in ends:
        if b.kind == "ac" and not beta < 0:
            raise WeightConditionError(
                f"AC end weight {beta} must be < 0 for injectivity"
            )
        if b.kind == "cs" and not beta > 2 - m:
            raise WeightConditionError(
                f"CS end weight {beta} must be > 2-m = {2 - m}"
            )
    strong = any((b.kind == "ac" and beta < 0) or (b.kind == "cs" and beta > 0)
                 for b in ends)
    if not strong:
        raise WeightConditionError(
            "need one residual end with AC weight < 0 or CS weight > 0 "
            "to exclude constants"
        )
    if geo.junctions and not (2 - m < beta < 0):
        raise WeightConditionError(
            f"marked-end weight {beta} must lie in (2-m, 0) = ({2 - m}, 0)"
        )
    _check_matches_marked(geo, beta)


def _check_matches_marked(geo: RadialGeometry, beta: float):
    """On glued models the t-uniform weight bookkeeping is tied to the
    marked-end weight frozen into the necks; a different constant weight
    would mix two inconsistent weight functions."""
    for J in geo.junctions:
        if abs(beta - J.beta) > 1e-12:
            raise WeightConditionError(
                f"requested weight {beta} differs from the marked-end weight "
                f"{J.beta} of the glued family; rebuild the family at the "
                "desired weight"
            )


def _check_nonexceptional(geo: RadialGeometry, beta: float, tol: float = 1e-9,
                          warn_below: float = 1e-3):
    d = distance_to_exceptional(beta, geo.link, geo.m)
    if d <= tol:
        raise WeightConditionError(
            f"weight {beta} is exceptional for the link spectrum (distance {d:.2e})"
        )
    if d < warn_below:
        warnings.warn(
            f"weight {beta} is within {d:.2e} of an exceptional weight; "
            "the pencil will be badly conditioned", stacklevel=3)


def _modes(link: Link, e_max: float):
    return link.eigenvalues_below(e_max)


# ---------------------------------------------------------------------------
# invertibility / Poincare constants


@dataclass(frozen=True)
class InvertibilityReport:
    constant: float
    sigma_min: float
    per_mode: tuple[tuple[float, float], ...]  # (e, sigma)
    beta: float
    grid_size: int


def invertibility_constant(
    model,
    beta: float,
    e_max: float = 40.0,
    n_per_region: int = 400,
    r_max: float = 1e3,
    grid: RadialGrid | None = None,
) -> InvertibilityReport:
    """1 / sigma_min of the Laplacian between the k=2 and k=0 weighted
    spaces: sigma_min = min over modes e <= e_max of the smallest
    generalized singular value of Delta as a map W^2_{2,beta} ->
    W^2_{0,beta-2}.  Weight preconditions are enforced, not assumed."""
    geo = _resolve_geometry(model)
    _check_lemma_weights(geo, float(beta))
    _check_nonexceptional(geo, beta)
    if grid is None:
        grid = build_grid(geo, n_per_region=n_per_region, r_max=r_max)
    per_mode = []
    for e, _mult in _modes(geo.link, e_max):
        pen = laplacian_pencil(grid, e, beta)
        lam = smallest_pencil_eigs(pen.A, pen.B, k=1, num_form=_pencil_num(pen))
        per_mode.append((float(e), float(_sigma_from(lam)[0])))
    sigma_min = min(s for _, s in per_mode)
    return InvertibilityReport(constant=1.0 / sigma_min, sigma_min=sigma_min,
                               per_mode=tuple(per_mode), beta=float(beta),
                               grid_size=grid.n)


@dataclass(frozen=True)
class CompactInvertibilityReport:
    constant: float
    sigma_constrained: float
    sigma_mode0_unconstrained: float
    per_mode: tuple[tuple[float, float], ...]
    beta: float
    core: tuple[float, float]
    grid_size: int


def _host_core_interval(geo: RadialGeometry) -> tuple[float, float]:
    """A fixed core region of the host: the middle third of its body."""
    host_segs = [s for s in geo.plan if s.kind == "lin"]
    if not host_segs:
        raise ValueError("no core segment found for the transversality functional")
    seg = max(host_segs, key=lambda s: s.x_b - s.x_a)
    third = (seg.x_b - seg.x_a) / 3.0
    return (seg.x_a + third, seg.x_b - third)


def restricted_invertibility_compact(
    family: GluedFamily,
    beta: float,
    t,
    e_max: float = 40.0,
    n_per_region: int = 400,
    core: tuple[float, float] | None = None,
) -> CompactInvertibilityReport:
    """Uniform invertibility on compact glued manifolds, transverse to
    constants: the rotation-invariant mode is minimized over

        E_t = {u : Q(eta_t u) = 0},   Q(g) = integral of g over a fixed
                                       core region K of the host,

    while the higher modes are unconstrained.  Also reports the
    unconstrained mode-0 minimum (a near-zero sanity value: constants)."""
    m_geo = family.at(t).geometry
    if not m_geo.circle and _residual_ends(m_geo):
        raise WeightConditionError("model is not compact; use invertibility_constant")
    if not (2 - m_geo.m < beta < 0):
        raise WeightConditionError(
            f"compact-case weight must be constant in (2-m, 0), got {beta}")
    _check_matches_marked(m_geo, float(beta))
    _check_nonexceptional(m_geo, beta)
    grid = build_grid(m_geo, n_per_region=n_per_region)
    if core is None:
        core = _host_core_interval(m_geo)
    eta_vals = np.asarray(m_geo.eta(grid.nodes), dtype=float)
    in_core = (grid.nodes >= core[0]) & (grid.nodes <= core[1])
    vol = grid.quad * grid.f ** (m_geo.m - 1) * grid.volume_factor
    q = eta_vals * vol * in_core

    per_mode = []
    sigma0_unc = None
    sigma0_con = None
    for e, _mult in _modes(m_geo.link, e_max):
        pen = laplacian_pencil(grid, e, beta)
        nf = _pencil_num(pen)
        if e == 0.0:
            q_red = pen.op.R.T @ q
            lam_u = smallest_pencil_eigs(pen.A, pen.B, k=1, num_form=nf)
            sigma0_unc = float(_sigma_from(lam_u)[0])
            lam_c = smallest_pencil_eigs(pen.A, pen.B, k=1, constraint=q_red,
                                         num_form=nf)
            sigma0_con = float(_sigma_from(lam_c)[0])
            per_mode.append((0.0, sigma0_con))
        else:
            lam = smallest_pencil_eigs(pen.A, pen.B, k=1, num_form=nf)
            per_mode.append((float(e), float(_sigma_from(lam)[0])))
    sigma_min = min(s for _, s in per_mode)
    return CompactInvertibilityReport(
        constant=1.0 / sigma_min,
        sigma_constrained=sigma_min,
        sigma_mode0_unconstrained=sigma0_unc,
        per_mode=tuple(per_mode),
        beta=float(beta),
        core=core,
        grid_size=grid.n,
    )


@dataclass(frozen=True)
class PoincareReport:
    constant: float
    per_mode: tuple[tuple[float, float], ...]
    beta: float
    grid_size: int


def poincare_constant(
    model,
    beta: float,
    e_max: float = 40.0,
    n_per_region: int = 400,
    r_max: float = 1e3,
    grid: RadialGrid | None = None,
) -> PoincareReport:
    """Largest ratio ||u||_{W_{1,beta}} / ||du||_{L_{beta-1}} over the
    discrete mode spaces, computed per mode as the extreme generalized
    eigenvalue of (k=1 form) against the weighted gradient form
    integrating |u'|^2 + (e/f^2) u^2 with weight rho^{2-2beta} rho^{-m}.

    Requires weights that keep constants out of the space: every residual
    AC end with beta < 0 or CS end with beta > 0."""
    geo = _resolve_geometry(model)
    ends = _residual_ends(geo)
    if not ends:
        raise WeightConditionError("compact model: constants cannot be excluded")
    for b in ends:
        ok = (b.kind == "ac" and beta < 0) or (b.kind == "cs" and beta > 0)
        if not ok:
            raise WeightConditionError(
                f"{b.kind.upper()} end weight {beta} admits constants; "
                "the gradient cannot control the norm")
    for J in geo.junctions:
        if not J.beta < 0:
            raise WeightConditionError(
                f"marked-end weight {J.beta} must be < 0 on glued necks")
    _check_matches_marked(geo, float(beta))
    if grid is None:
        grid = build_grid(geo, n_per_region=n_per_region, r_max=r_max)
    m = geo.m
    per_mode = []
    for e, _mult in _modes(geo.link, e_max):
        op = assemble_mode_operator(grid, e, beta=beta)
        M1 = weighted_form(grid, 1, beta, e).reduced(op.R)
        wg = (grid.wextra * grid.rho ** (1 - beta)) ** 2 * grid.quad \
            * grid.f ** (m - 1) * grid.volume_factor * grid.rho ** (-float(m))
        G = (grid.d1.T @ sp.diags(wg) @ grid.d1 + sp.diags(wg * e / grid.f**2))
        G_red = (op.R.T @ G @ op.R).tocsc()
        lam = smallest_pencil_eigs(G_red, M1, k=1)
        lam0 = max(float(lam[0]), 1e-300)
        per_mode.append((float(e), 1.0 / math.sqrt(lam0)))
    constant = max(c for _, c in per_mode)
    return PoincareReport(constant=constant, per_mode=tuple(per_mode),
                          beta=float(beta), grid_size=grid.n)


# ---------------------------------------------------------------------------
# weight crossing and kernel scans


@dataclass(frozen=True)
class WeightCrossingReport:
    gamma: float
    e: float
    candidate: ModeFunction
    correction_norm: float
    tail_slope: float | None
    slope_bound: float
    residual_sigma: float
    threshold: float


def weight_crossing_kernel(
    model,
    gamma: float,
    e: float,
    slack: float = 0.2,
    n_per_region: int = 800,
    r_max: float = 1e3,
    grid: RadialGrid | None = None,
) -> WeightCrossingReport:
    """Kernel candidate generated by crossing the exceptional rate gamma:
    extend sigma = r^gamma (mode e) by an interior cutoff, solve
    A_e u = A_e sigma_ext in the decaying-closure space and return
    sigma_ext - u together with a fit of the correction's asymptotic
    slope (expected <= gamma + nu + slack) and the pencil residual of the
    candidate against the calibrated near-null threshold.

    Refused unless the classifier certifies surjectivity just below
    gamma (crossing constructions need the cokernel already gone)."""
    geo = _resolve_geometry(model)
    m = geo.m
    gp, gm = gamma_roots(e, m)
    if not (abs(gamma - gp) < 1e-9 or abs(gamma - gm) < 1e-9):
        raise ValueError(f"{gamma} is not an exceptional rate for eigenvalue {e}")
    ends = _residual_ends(geo)
    ac_ends = [b for b in ends if b.kind == "ac"]
    if len(ac_ends) != 1:
        raise ValueError("weight-crossing construction expects exactly one AC end "
                         "(plus a cap or a CS end)")

    from .weight_calculus import (EndDescriptor, WeightVector,
                                  classify_weight_region, exceptional_weights)
    below = [w.gamma for w in exceptional_weights(geo.link, m, (gamma - 10.0, gamma))
             if w.gamma < gamma - 1e-9]
    gap = gamma - max(below) if below else 1.0
    beta_check = gamma - min(0.5 * gap, 0.05)
    facts = classify_weight_region("AC", [EndDescriptor("AC", geo.link)],
                                   WeightVector((beta_check,)), m)
    if facts.surjective is not True:
        raise WeightConditionError(
            f"surjectivity below gamma={gamma} is not certified; "
            "the crossing construction does not apply")

    if grid is None:
        grid = build_grid(geo, n_per_region=n_per_region, r_max=r_max)
    ac = ac_ends[0]
    nu = ac.nu if ac.nu is not None else -1.0

    r = ac.sign * (grid.nodes - ac.x0)
    has_cap = any(b is not None and b.kind == "cap" for b in (geo.left, geo.right))
    if has_cap:
        # interior cutoff: vanish near the cap, pure r^gamma beyond 2R
        R_chart = ac.chart_r
        s = np.clip(np.log(np.maximum(r, 1e-300) / R_chart) / math.log(2.0), 0.0, 1.0)
        chi = np.where(r <= R_chart, 0.0, np.where(r >= 2 * R_chart, 1.0,
                       s**3 * (10 - 15 * s + 6 * s * s)))
        sigma_ext = chi * np.maximum(r, 1e-300) ** gamma
        sigma_ext[r <= 0] = 0.0
    else:
        # no cap: r^gamma is globally defined, no extension cutoff needed
        sigma_ext = grid.rho**gamma

    op = assemble_mode_operator(grid, e)  # decaying closure gamma_minus
    rhs = op.apply(sigma_ext)
    u_corr = op.solve(rhs)
    candidate_vals = sigma_ext - u_corr
    candidate = ModeFunction.single(grid, e, candidate_vals)

    tail = (r > r_max / 100.0) & (r <= r_max / 10.0)
    # the discrete solve excites the decaying homogeneous branch at an
    # O(h^2) amplitude relative to the correction's size; a slope fit is
    # meaningful only above that contamination level
    hz = math.log(10.0) / max(_grid_nodes_per_decade(grid), 1.0)
    floor = max(1e-12, 10.0 * hz * hz) * float(np.max(np.abs(u_corr)))
    slope = None
    if float(np.max(np.abs(u_corr[tail]))) > floor:
        lr = np.log(r[tail])
        ly = np.log(np.maximum(np.abs(u_corr[tail]), 1e-300))
        lr = lr - lr.mean()
        slope = float(np.sum(lr * (ly - ly.mean())) / np.sum(lr * lr))

    # pencil residual of the candidate at a weight that admits it
    above = [w.gamma for w in exceptional_weights(geo.link, m, (gamma, gamma + 10.0))
             if w.gamma > gamma + 1e-9]
    gap_up = (min(above) - gamma) if above else 1.0
    beta_res = gamma + min(0.5 * gap_up, 0.25)
    pen = laplacian_pencil(grid, e, beta_res, kernel_scan=True)
    residual_sigma = pen.residual_sigma(candidate_vals[pen.op.interior])
    thr = near_null_threshold(geo.link, m, e + 1.0, beta_res,
                              _grid_nodes_per_decade(grid))
    corr_norm = float(np.max(np.abs(u_corr)))
    return WeightCrossingReport(
        gamma=float(gamma), e=float(e), candidate=candidate,
        correction_norm=corr_norm, tail_slope=slope,
        slope_bound=float(gamma + nu + slack),
        residual_sigma=residual_sigma, threshold=thr,
    )


@dataclass(frozen=True)
class KernelScanRow:
    beta: float
    dimension: int
    per_mode: tuple[tuple[float, int, float], ...]  # (e, mult, smallest sigma)
    threshold: float
    ambiguous: bool


def kernel_dimension_scan(
    model,
    beta_list,
    e_max: float = 12.0,
    n_per_region: int = 400,
    r_max: float = 1e3,
    grid: RadialGrid | None = None,
) -> list[KernelScanRow]:
    """Detected kernel dimension of Delta: W_{2,beta} -> W_{0,beta-2} per
    weight: per mode, near-null generalized singular values (below the
    calibrated threshold) are counted and weighted by the link
    multiplicity.  The truncation closure admits the growing harmonic
    branch whenever the weight does, so kernel elements with cone-rate
    gamma_plus < beta are representable.  Values clustering around the
    threshold are flagged as ambiguous."""
    geo = _resolve_geometry(model)
    for b in _residual_ends(geo):
        if b.kind != "ac":
            raise ValueError("kernel scan expects AC (or capped) models")
    if grid is None:
        grid = build_grid(geo, n_per_region=n_per_region, r_max=r_max)
    npd = _grid_nodes_per_decade(grid)
    rows = []
    for beta in beta_list:
        _check_nonexceptional(geo, float(beta))
        thr = near_null_threshold(geo.link, geo.m, e_max, float(beta), npd)
        total = 0
        per_mode = []
        ambiguous = False
        for e, mult in _modes(geo.link, e_max):
            pen = laplacian_pencil(grid, e, float(beta), kernel_scan=True)
            k = min(4, pen.A.shape[0] - 2)
            sig = _sigma_from(smallest_pencil_eigs(pen.A, pen.B, k=k,
                                                   num_form=_pencil_num(pen)))
            hits = int(np.count_nonzero(sig < thr))
            if np.any((sig >= thr / 3.0) & (sig <= 3.0 * thr)):
                ambiguous = True
            total += hits * mult
            per_mode.append((float(e), int(mult), float(sig[0])))
        rows.append(KernelScanRow(beta=float(beta), dimension=total,
                                  per_mode=tuple(per_mode), threshold=thr,
                                  ambiguous=ambiguous))
    return rows


# ---------------------------------------------------------------------------
# discrete integration-by-parts diagnostic


def duality_defect(grid: RadialGrid, e: float, u: np.ndarray, v: np.ndarray) -> float:
    """Relative defect of <v, Delta u> = <du, dv> for compactly supported
    nodal vectors (quadrature + stencil accuracy)."""
    geo = grid.geometry
    m = geo.m
    vol = grid.quad * grid.f ** (m - 1) * grid.volume_factor
    op = assemble_mode_operator(grid, e)
    lap_u = (op.P_full @ u) / grid.rho**2
    left_ = float(np.sum(vol * v * lap_u))
    du = grid.d1 @ u
    dv = grid.d1 @ v
    right_ = float(np.sum(vol * (du * dv + (e / grid.f**2) * u * v)))
    denom = max(abs(left_), abs(right_), 1e-300)
    return abs(left_ - right_) / denom
