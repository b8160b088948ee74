"""Constrained gradient descent for capillary equilibrium surfaces.

The solver minimizes the interfacial energy

    E = area(S) - cos(gamma) * area(wetted patch) - 2 kappa * Mz(W)

over vertex positions at fixed enclosed volume, where Mz(W) is the z-moment
of the drop region (the kappa term makes equilibria satisfy the linear
height law H = kappa z + const instead of constant H).  Steps are Sobolev
(H1) preconditioned projected gradients: the raw gradient is smoothed by a
screened cotangent Laplacian, the volume-changing component is removed, a
backtracking line search enforces descent, and the volume is restored
exactly after every trial by a Newton correction along the interior volume
gradient, so the constraint drifts only at round-off.

Three modes share the engine.  ``dirichlet_cmc`` pins the boundary polyline
and drops the wetting terms; ``capillary`` lets boundary vertices slide
tangentially on the substrate sphere; ``prescribed_height_curvature`` adds
the kappa term and requires the boundary in the upper open hemisphere.

Mean curvature is reported in the toward-the-drop convention (a convex
drop has H > 0); the Lagrange multiplier is reported as lambda/2, which
equals that H at an equilibrium with kappa = 0.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import splu

from .analytic import CapillaryParams, contact_angle
from .curvature import (_face_cotangents, cotangent_area_gradient,
                        mixed_voronoi_areas)
from .errors import (MeshDegeneracyError, SideViolationError,
                     StepCollapseError)
from .geometry import Sphere
from .mesh import TriMesh
from .remesh import _remesh_with_stats, mean_edge_length, min_quality
from .wetting import (WettingOperator, make_wetting_operator,
                      surface_volume_gradient, surface_z_moment,
                      surface_z_moment_gradient)

__all__ = [
    "MODES",
    "SolveConfig",
    "SolveReport",
    "FlowState",
    "energy",
    "init_flow_state",
    "flow_step",
    "solve_dirichlet_cmc",
    "solve_capillary",
    "solve_prescribed_height_curvature",
]

MODES = ("dirichlet_cmc", "capillary", "prescribed_height_curvature")


@dataclass
class SolveConfig:
    """Knobs of one solve; every field has a sane default except ``mode``."""

    mode: str
    params: CapillaryParams | None = None
    substrate: Sphere | None = None
    max_iterations: int = 2000
    initial_step: float = 1.0
    backtrack_factor: float = 0.5
    min_step: float = 1e-14
    grad_tol_factor: float = 1e-8      # stop when |proj grad| <= factor * area
    h_dev_factor: float = 1e-3         # H constancy: factor * (|H| + H scale)
    angle_tol: float = math.radians(1.0)
    multiplier_tol: float | None = None  # curvature-target mode; None = derived
    remesh_every: int = 25
    target_edge_length: float | None = None
    quality_floor: float = 0.08
    sobolev_length: float | None = None  # None = quarter of the bbox diagonal
    diagnostics_path: str | None = None

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        for name in ("initial_step", "backtrack_factor", "grad_tol_factor",
                     "h_dev_factor", "angle_tol", "quality_floor"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if not self.backtrack_factor < 1.0:
            raise ValueError("backtrack_factor must lie in (0, 1)")
        if self.mode != "dirichlet_cmc":
            if self.substrate is None:
                raise ValueError(f"{self.mode} mode needs a substrate sphere")
            if self.params is None:
                raise ValueError(f"{self.mode} mode needs CapillaryParams")


@dataclass
class SolveReport:
    """Outcome of a solve.

    ``h_mean`` / ``h_max_deviation`` use the variational curvature estimator
    (energy gradient against volume gradient) in the toward-the-drop
    convention; in prescribed-height-curvature mode the deviation is the
    residual of the law H = kappa z + mu instead of the spread about the
    mean.  ``multiplier`` is lambda/2 from the final iterate.  If
    ``converged`` is true the deviation fields passed their tolerances.
    """

    converged: bool
    iterations: int
    final_energy: float
    h_mean: float
    h_max_deviation: float
    volume: float
    multiplier: float
    multiplier_history: list = field(default_factory=list)
    contact_angle_mean: float | None = None
    contact_angle_max_deviation: float | None = None
    grad_norm: float = math.nan
    message: str = ""


@dataclass
class FlowState:
    """Mutable per-solve scratch carried between flow steps."""

    volume_target: float
    gamma: float
    kappa: float
    operator: WettingOperator | None
    substrate: Sphere | None
    pinned: np.ndarray
    free_boundary: bool
    side_sign: int
    target_edge: float
    sobolev_alpha: float
    alpha_floor: float
    step: float
    iteration: int = 0
    multiplier: float = math.nan
    multiplier_history: list = field(default_factory=list)
    last_energy: float = math.inf
    needs_remesh: bool = False
    side_violation_streak: int = 0
    disp_since_remesh: float = math.inf
    _precond: object = None
    _precond_stale: float = math.inf


# --------------------------------------------------------------------------
# energy


def energy(mesh: TriMesh, region=None, sphere: Sphere | None = None,
           gamma: float = math.pi / 2.0) -> float:
    """Interfacial energy area(S) - cos(gamma) * wetted area.

    The wetted area comes from ``region`` (a ClosedRegion) when given, else
    from line integrals over the boundary loops when ``sphere`` is given,
    else it is zero (plain area).
    """
    base = mesh.surface_area()
    cosg = math.cos(gamma)
    if cosg == 0.0 or (region is None and sphere is None):
        return base
    if region is not None:
        wet = region.patch_area()
    else:
        op = make_wetting_operator(mesh, sphere)
        wet = op.area(mesh.vertices)
    return base - cosg * wet


def _energy_volume(x: np.ndarray, conn: TriMesh, state: FlowState):
    m = conn.with_vertices(x)
    e = m.surface_area()
    vol = m.divergence_volume()
    op = state.operator
    if op is not None:
        cosg = math.cos(state.gamma)
        if cosg != 0.0:
            e -= cosg * op.area(x)
        vol += op.volume_term(x)
        if state.kappa != 0.0:
            e -= 2.0 * state.kappa * (surface_z_moment(x, conn.faces)
                                      + op.z_moment_term(x))
    return e, vol


def _volume_of(x: np.ndarray, conn: TriMesh, state: FlowState) -> float:
    vol = conn.with_vertices(x).divergence_volume()
    if state.operator is not None:
        vol += state.operator.volume_term(x)
    return vol


def _gradients(x: np.ndarray, conn: TriMesh, state: FlowState):
    m = conn.with_vertices(x)
    g = cotangent_area_gradient(m)
    c = surface_volume_gradient(x, conn.faces)
    op = state.operator
    if op is not None:
        cosg = math.cos(state.gamma)
        if cosg != 0.0:
            g -= cosg * op.area_gradient(x)
        c += op.volume_term_gradient(x)
        if state.kappa != 0.0:
            g -= 2.0 * state.kappa * (surface_z_moment_gradient(x, conn.faces)
                                      + op.z_moment_term_gradient(x))
    return g, c


# --------------------------------------------------------------------------
# constraint plumbing


def _project_rows(arr: np.ndarray, conn: TriMesh, state: FlowState,
                  x: np.ndarray) -> np.ndarray:
    out = arr.copy()
    out[state.pinned] = 0.0
    if state.free_boundary:
        bmask = conn.boundary_vertex_mask
        n = state.substrate.outward_normals(x[bmask])
        rows = out[bmask]
        out[bmask] = rows - n * (rows * n).sum(1)[:, None]
    return out


def _restore_direction(x: np.ndarray, conn: TriMesh,
                       state: FlowState) -> np.ndarray:
    """Field along which volume corrections are applied.

    The preconditioner solved against the projected volume gradient: smooth
    on the preconditioner's length scale and fading toward pinned vertices.
    Correcting along the raw (mass-weighted) gradient instead imprints the
    mesh density pattern onto the surface as high-frequency normal noise,
    and any field with a hard zero at a pinned boundary kinks the first
    interior ring, on every single projection.
    """
    c = surface_volume_gradient(x, conn.faces)
    if state.operator is not None:
        c = c + state.operator.volume_term_gradient(x)
    c = _project_rows(c, conn, state, x)
    lu = _preconditioner(conn, x, state)
    return _project_rows(lu.solve(c), conn, state, x)


def _restore_volume(x: np.ndarray, conn: TriMesh, state: FlowState,
                    rel_tol: float = 1e-12, max_iter: int = 30
                    ) -> tuple[np.ndarray, bool]:
    """Newton correction along the smoothed volume-gradient field; returns
    the corrected positions and whether the constraint was met."""
    scale = max(1.0, abs(state.volume_target))
    u = _restore_direction(x, conn, state)
    for _ in range(max_iter):
        vol = _volume_of(x, conn, state)
        r = state.volume_target - vol
        if abs(r) <= rel_tol * scale:
            return x, True
        c = surface_volume_gradient(x, conn.faces)
        if state.operator is not None:
            c = c + state.operator.volume_term_gradient(x)
        denom = float((c * u).sum())
        if denom <= 0.0:
            return x, False
        x = x + (r / denom) * u
    return x, False


def _snap_boundary(x: np.ndarray, conn: TriMesh, state: FlowState) -> np.ndarray:
    if state.free_boundary:
        bmask = conn.boundary_vertex_mask
        x = x.copy()
        x[bmask] = state.substrate.project(x[bmask])
    return x


def _cotan_laplacian(conn: TriMesh, x: np.ndarray) -> sparse.csr_matrix:
    m = conn.with_vertices(x)
    cots = _face_cotangents(m)
    f = conn.faces
    n = conn.n_vertices
    rows, cols, vals = [], [], []
    for k in range(3):
        j1 = f[:, (k + 1) % 3]
        j2 = f[:, (k + 2) % 3]
        w = 0.5 * cots[:, k]
        rows.extend([j1, j2, j1, j2])
        cols.extend([j2, j1, j1, j2])
        vals.extend([-w, -w, w, w])
    L = sparse.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n, n))
    return L


def _preconditioner(conn: TriMesh, x: np.ndarray, state: FlowState):
    cached = state._precond
    if (cached is not None
            and state._precond_stale < 0.25 * state.target_edge
            and cached.shape[0] == conn.n_vertices):
        return cached
    L = _cotan_laplacian(conn, x)
    M = sparse.diags(np.maximum(mixed_voronoi_areas(conn.with_vertices(x)),
                                1e-300))
    A = (M + state.sobolev_alpha * L).tocsr()
    if state.pinned.any():
        free = sparse.diags((~state.pinned).astype(float))
        A = free @ A @ free + sparse.diags(state.pinned.astype(float))
    state._precond = splu(A.tocsc())
    state._precond_stale = 0.0
    return state._precond


# --------------------------------------------------------------------------
# diagnostics helpers


def _cheap_h_stats(g: np.ndarray, c: np.ndarray, interior: np.ndarray):
    """Equilibrium constancy estimate from the assembled gradients.

    For interior vertices the energy gradient is 2(H - kappa z) m n and the
    volume gradient is m n, so their pointwise ratio is constant at any
    equilibrium of any mode (it equals the multiplier).  Returns (mean,
    max deviation from mean) of that ratio.
    """
    cn2 = (c[interior] ** 2).sum(1)
    ok = cn2 > 1e-300
    q = (g[interior][ok] * c[interior][ok]).sum(1) / (2.0 * cn2[ok])
    if q.size == 0:
        return math.nan, math.nan
    mean = float(q.mean())
    return mean, float(np.abs(q - mean).max())


def _cheap_angle_stats(conn: TriMesh, x: np.ndarray, state: FlowState):
    if not state.free_boundary:
        return math.nan
    m = conn.with_vertices(x)
    bmask = conn.boundary_vertex_mask
    n = m.vertex_normals[bmask]
    s = state.substrate.outward_normals(x[bmask]) * state.side_sign
    ang = np.arccos(np.clip(-(n * s).sum(1), -1.0, 1.0))
    return float(np.abs(ang - ang.mean()).max())


# --------------------------------------------------------------------------
# state construction and the step


def init_flow_state(mesh: TriMesh, config: SolveConfig,
                    volume_target: float | None = None) -> FlowState:
    """Bind a flow state to a mesh: wetting operator, masks, preconditioner."""
    dirichlet = config.mode == "dirichlet_cmc"
    operator = None
    side_sign = 1
    gamma = math.pi / 2.0
    kappa = 0.0
    if not dirichlet:
        p = config.params
        gamma = p.gamma
        side_sign = 1 if p.side == "interior" else -1
        operator = make_wetting_operator(mesh, config.substrate, side=p.side)
        if config.mode == "prescribed_height_curvature":
            kappa = p.kappa
    pinned = (mesh.boundary_vertex_mask.copy()
              if dirichlet else np.zeros(mesh.n_vertices, dtype=bool))
    state = FlowState(
        volume_target=0.0,
        gamma=gamma,
        kappa=kappa,
        operator=operator,
        substrate=config.substrate,
        pinned=pinned,
        free_boundary=not dirichlet,
        side_sign=side_sign,
        target_edge=(config.target_edge_length
                     or mean_edge_length(mesh)),
        sobolev_alpha=(config.sobolev_length
                       or 0.25 * mesh.bbox_diagonal()) ** 2,
        alpha_floor=0.0,
        step=config.initial_step,
    )
    # the smoothing length anneals down to a couple of edge lengths once
    # coarse-scale progress stalls; never above the starting value
    state.alpha_floor = min(state.sobolev_alpha,
                            (2.0 * state.target_edge) ** 2)
    if volume_target is None:
        _, volume_target = _energy_volume(mesh.vertices, mesh, state)
    state.volume_target = float(volume_target)
    return state


def flow_step(mesh: TriMesh, config: SolveConfig,
              state: FlowState) -> tuple[TriMesh, dict]:
    """One volume-preserving descent step; returns the new mesh and a
    JSON-ready diagnostics dict.

    A critical point is a fixed point: when the projected gradient norm is
    already below the stopping threshold the mesh is returned unchanged.
    Raises StepCollapseError when backtracking cannot find descent away
    from a critical point.
    """
    x0 = mesh.vertices
    area = mesh.surface_area()
    e0, v0 = _energy_volume(x0, mesh, state)
    g, c = _gradients(x0, mesh, state)
    g_proj = _project_rows(g, mesh, state, x0)
    c_proj = _project_rows(c, mesh, state, x0)
    cc = float((c_proj * c_proj).sum())
    lam = float((g_proj * c_proj).sum()) / cc if cc > 0 else 0.0
    resid = g_proj - lam * c_proj
    grad_norm = float(np.linalg.norm(resid))
    state.multiplier = 0.5 * lam
    state.multiplier_history.append(state.multiplier)

    interior = ~mesh.boundary_vertex_mask
    mean_h, max_h_dev = _cheap_h_stats(g, c, interior)
    diag = {
        "iteration": state.iteration,
        "energy": e0,
        "volume": v0,
        "multiplier": state.multiplier,
        "maxHdev": max_h_dev,
        "maxAngleDev": _cheap_angle_stats(mesh, x0, state),
        "gradNorm": grad_norm,
        "step": 0.0,
        "displacement": 0.0,
        "sideViolations": 0,
    }
    if grad_norm <= config.grad_tol_factor * area:
        state.iteration += 1
        state.last_energy = e0
        return mesh, diag

    lu = _preconditioner(mesh, x0, state)
    sol = lu.solve(np.hstack([g_proj, c_proj]))
    pg, pc = sol[:, :3], sol[:, 3:]
    denom = float((c_proj * pc).sum())
    lam_pre = float((c_proj * pg).sum()) / denom if denom != 0 else 0.0
    # volume-neutral by construction: c_proj . d = 0 through lam_pre, so
    # the restore after each trial is a second-order correction
    d = -(pg - lam_pre * pc)
    d = _project_rows(d, mesh, state, x0)
    slope = float((g * d).sum())
    if slope >= 0.0:
        # fall back to the mass-preconditioned projected gradient
        m_areas = np.maximum(mixed_voronoi_areas(mesh), 1e-300)
        d = _project_rows(-resid / m_areas[:, None], mesh, state, x0)
        slope = float((g * d).sum())
        if slope >= 0.0:
            raise StepCollapseError("no descent direction at current iterate")

    # guard against absurd first trials; Armijo handles the rest
    d_max = float(np.linalg.norm(d, axis=1).max())
    t = min(config.initial_step, state.step / config.backtrack_factor,
            2.0 * state.target_edge / max(d_max, 1e-300))
    if state.iteration % 5 == 4:
        # a step parked at the line-search optimum leaves transverse modes
        # ringing at the edge of stability; a periodic half step damps
        # them hard at negligible cost to the slow directions
        t = min(t, 0.5 * state.step)
    accepted = None
    while t >= config.min_step:
        x = x0 + t * d
        x = _snap_boundary(x, mesh, state)
        x, ok = _restore_volume(x, mesh, state)
        if ok:
            e_t, v_t = _energy_volume(x, mesh, state)
            if e_t <= e0 + 1e-4 * t * slope:
                accepted = (x, e_t, v_t, t)
                break
        t *= config.backtrack_factor
    if accepted is None:
        raise StepCollapseError(
            f"line search failed below step {config.min_step:g} "
            f"(grad norm {grad_norm:.3e})")

    x, e_t, v_t, t = accepted
    # when the realized decrease is curvature-limited, the step is riding
    # the stability boundary of the stiffest mode and plain backtracking
    # lets that mode ring; one quadratic interpolation lands near the
    # parabola vertex instead
    gain = (e0 - e_t) / max(t * (-slope), 1e-300)
    if gain < 0.49:
        t_ref = t / (2.0 * (1.0 - gain))
        x_ref = _snap_boundary(x0 + t_ref * d, mesh, state)
        x_ref, ok = _restore_volume(x_ref, mesh, state)
        if ok:
            e_ref, v_ref = _energy_volume(x_ref, mesh, state)
            if e_ref < e_t:
                x, e_t, v_t, t = x_ref, e_ref, v_ref, t_ref
    state.step = t
    state.iteration += 1

    violations = 0
    if state.free_boundary:
        sd = state.substrate.signed_distance(x[interior]) * state.side_sign
        bad = sd > 1e-7 * state.substrate.radius
        violations = int(bad.sum())
        if violations:
            idx = np.where(interior)[0][bad]
            pull = state.substrate.project(x[idx])
            centered = pull - state.substrate.center
            x = x.copy()
            x[idx] = (state.substrate.center
                      + centered * (1.0 - state.side_sign * 1e-9))
            x, _ = _restore_volume(x, mesh, state)
            e_t, v_t = _energy_volume(x, mesh, state)
        state.side_violation_streak = (state.side_violation_streak + 1
                                       if violations else 0)

    if min_quality(mesh.with_vertices(x)) < config.quality_floor:
        state.needs_remesh = True

    disp = float(np.linalg.norm(x - x0, axis=1).max())
    state._precond_stale += disp
    state.disp_since_remesh += disp
    diag.update(step=t, displacement=disp, energy=e_t, volume=v_t,
                sideViolations=violations)
    state.last_energy = e_t
    return mesh.with_vertices(x), diag


# --------------------------------------------------------------------------
# the shared engine


def _do_remesh(mesh: TriMesh, config: SolveConfig,
               state: FlowState) -> tuple[TriMesh, FlowState]:
    dirichlet = not state.free_boundary
    new, _ = _remesh_with_stats(
        mesh, state.target_edge,
        preserve_boundary_edges=dirichlet,
        boundary_sphere=None if dirichlet else state.substrate,
        quality_floor=min(0.05, config.quality_floor))
    if new is mesh:
        state.needs_remesh = False
        return mesh, state
    if state.operator is not None:
        p = config.params
        state.operator = make_wetting_operator(new, config.substrate,
                                               side=p.side)
    if dirichlet:
        state.pinned = new.boundary_vertex_mask.copy()
    else:
        state.pinned = np.zeros(new.n_vertices, dtype=bool)
    state._precond = None
    state._precond_stale = math.inf
    x, _ = _restore_volume(new.vertices.copy(), new, state)
    new = new.with_vertices(x)
    state.needs_remesh = False
    state.disp_since_remesh = 0.0
    state._precond = None
    state._precond_stale = math.inf
    return new, state


def _write_diag(sink, diag: dict) -> None:
    if sink is not None:
        sink.write(json.dumps(diag, sort_keys=True, allow_nan=False,
                              default=float) + "\n")


def _sanitize(diag: dict) -> dict:
    return {k: (None if isinstance(v, float) and not math.isfinite(v) else v)
            for k, v in diag.items()}


def _run_flow(mesh: TriMesh, config: SolveConfig, state: FlowState,
              sink=None, iteration_budget: int | None = None) -> tuple[TriMesh, dict]:
    """Drive flow_step to convergence; returns the mesh and a stop record."""
    budget = iteration_budget or config.max_iterations
    x = _snap_boundary(mesh.vertices.copy(), mesh, state)
    x, ok = _restore_volume(x, mesh, state)
    if not ok:
        raise MeshDegeneracyError(
            "could not push the initial surface to the target volume")
    mesh = mesh.with_vertices(x)
    # the entry correction can move vertices a long way
    state._precond_stale = math.inf
    area = mesh.surface_area()
    grad_norm = math.inf
    stop = "budget"
    steps = 0
    prev_e = None
    recent: list = []
    cad_e = math.inf
    while steps < budget:
        cadence = (config.remesh_every > 0 and steps > 0
                   and steps % config.remesh_every == 0)
        forced = (state.needs_remesh
                  and state.disp_since_remesh > 0.02 * state.target_edge)
        annealed = False
        if cadence and not forced:
            # energy progress per cadence window; when it dries up while
            # the smoothing length is still coarse, the leftover error
            # lives at scales the preconditioner suppresses, so sharpen it
            e_now = state.last_energy
            if (math.isfinite(cad_e) and math.isfinite(e_now)
                    and state.sobolev_alpha > state.alpha_floor
                    and cad_e - e_now < 1e-6 * (abs(e_now) + 1.0)):
                state.sobolev_alpha = max(0.25 * state.sobolev_alpha,
                                          state.alpha_floor)
                state._precond = None
                state._precond_stale = math.inf
                annealed = True
            cad_e = e_now
        if forced or (
                cadence and not annealed
                and state.disp_since_remesh > 0.2 * state.target_edge):
            mesh, state = _do_remesh(mesh, config, state)
            area = mesh.surface_area()
            prev_e = None
            recent.clear()
        elif cadence and steps >= 2 * config.remesh_every:
            # the mesh has settled; see if the measured physics already
            # passes before grinding out the last tangential modes
            if _measured_ok(mesh, config, state):
                stop = "measured"
                break
        try:
            mesh, diag = flow_step(mesh, config, state)
        except StepCollapseError:
            stop = "stalled"
            break
        steps += 1
        grad_norm = diag["gradNorm"]
        _write_diag(sink, _sanitize(diag))
        if (prev_e is not None and diag["step"] > 0
                and diag["energy"] > prev_e + 1e-9 * (abs(prev_e) + 1)):
            raise AssertionError(
                "energy increased across an accepted step; this is a bug")
        prev_e = diag["energy"]
        if grad_norm <= config.grad_tol_factor * area:
            stop = "gradient"
            break
        recent.append(diag["energy"])
        if len(recent) > 20:
            recent.pop(0)
            if recent[0] - recent[-1] <= 1e-13 * (abs(recent[-1]) + 1.0):
                stop = "stalled"
                break
        if state.free_boundary and state.side_violation_streak > 50:
            raise SideViolationError(
                "surface kept crossing the substrate sphere for more than "
                "50 consecutive steps")
    return mesh, {"stop": stop, "steps": steps, "grad_norm": grad_norm}


def _h_scale(state: FlowState, mesh: TriMesh) -> float:
    if state.substrate is not None:
        return 1.0 / state.substrate.radius
    return 2.0 / mesh.bbox_diagonal()


def _measure(mesh: TriMesh, config: SolveConfig, state: FlowState,
             mu_for_law: float | None = None) -> dict:
    """Equilibrium measurement against which the converged flag is judged.

    Mean curvature comes from the variational estimator (energy gradient
    against volume gradient, pointwise): for this discrete energy that is
    the quantity which is exactly constant at a discrete equilibrium, so
    its spread measures distance from equilibrium without the 1/h^2 noise
    a stencil-fit estimator picks up from benign discretization wiggle.
    In the height-law mode the estimator already subtracts kappa z, so the
    deviation is the law residual; h_mean still reports the achieved mean
    of H itself.
    """
    x = mesh.vertices
    g, c = _gradients(x, mesh, state)
    interior = ~mesh.boundary_vertex_mask
    cn2 = (c[interior] ** 2).sum(1)
    ok = cn2 > 1e-300
    q = (g[interior][ok] * c[interior][ok]).sum(1) / (2.0 * cn2[ok])
    if q.size == 0:
        q_mean, h_dev, h_mean = math.nan, math.nan, math.nan
    else:
        q_mean = float(q.mean())
        if config.mode == "prescribed_height_curvature":
            mu = q_mean if mu_for_law is None else mu_for_law
            h_dev = float(np.abs(q - mu).max())
            h_mean = float((q + state.kappa
                            * x[interior, 2][ok]).mean())
        else:
            h_dev = float(np.abs(q - q_mean).max())
            h_mean = q_mean
    h_tol = config.h_dev_factor * (abs(h_mean) + _h_scale(state, mesh))
    passed = h_dev <= h_tol
    angle_mean = angle_dev = None
    if state.free_boundary:
        rep = contact_angle(mesh, state.substrate, side=config.params.side)
        angle_mean = rep.mean
        angle_dev = rep.max_deviation
        passed = passed and angle_dev <= config.angle_tol
    return {"h_mean": h_mean, "h_dev": h_dev, "h_tol": h_tol,
            "angle_mean": angle_mean, "angle_dev": angle_dev, "pass": passed}


def _measured_ok(mesh: TriMesh, config: SolveConfig, state: FlowState) -> bool:
    try:
        return _measure(mesh, config, state)["pass"]
    except Exception:
        return False


def _final_report(mesh: TriMesh, config: SolveConfig, state: FlowState,
                  info: dict, mu_for_law: float | None = None) -> SolveReport:
    e, vol = _energy_volume(mesh.vertices, mesh, state)
    m = _measure(mesh, config, state, mu_for_law)
    converged = info["stop"] in ("gradient", "stalled", "measured") and m["pass"]
    return SolveReport(
        converged=converged,
        iterations=state.iteration,
        final_energy=e,
        h_mean=m["h_mean"],
        h_max_deviation=m["h_dev"],
        volume=vol,
        multiplier=state.multiplier,
        multiplier_history=list(state.multiplier_history),
        contact_angle_mean=m["angle_mean"],
        contact_angle_max_deviation=m["angle_dev"],
        grad_norm=info["grad_norm"],
        message=info["stop"],
    )


def _tune_volume(mesh: TriMesh, config: SolveConfig, state: FlowState,
                 target: float, sink) -> tuple[TriMesh, dict]:
    """Outer secant on the volume target until lambda/2 matches ``target``."""
    tol = config.multiplier_tol
    if tol is None:
        tol = 5e-4 * (abs(target) + _h_scale(state, mesh))
    inner = max(50, config.max_iterations // 10)
    total = 0
    v_prev = m_prev = None
    v_cur = state.volume_target
    info = {"stop": "budget", "steps": 0, "grad_norm": math.inf}
    for _ in range(24):
        state.volume_target = v_cur
        x, _ = _restore_volume(mesh.vertices.copy(), mesh, state)
        mesh = mesh.with_vertices(x)
        budget = min(inner, config.max_iterations - total)
        if budget <= 0:
            break
        mesh, info = _run_flow(mesh, config, state, sink, budget)
        total += info["steps"]
        m_cur = state.multiplier
        if abs(m_cur - target) <= tol and info["stop"] != "budget":
            info["stop"] = "gradient"
            break
        if m_prev is None or m_cur == m_prev:
            v_next = v_cur * (1.06 if m_cur < target else 1.0 / 1.06)
        else:
            v_next = v_cur + (target - m_cur) * (v_cur - v_prev) / (m_cur - m_prev)
            v_next = min(max(v_next, 0.4 * v_cur), 2.5 * v_cur)
        v_prev, m_prev = v_cur, m_cur
        v_cur = v_next
    return mesh, info


def _open_sink(config: SolveConfig):
    if config.diagnostics_path is None:
        return None
    return open(config.diagnostics_path, "w")


# --------------------------------------------------------------------------
# the three public solvers


def solve_dirichlet_cmc(boundary: np.ndarray, init: TriMesh,
                        config: SolveConfig | None = None, *,
                        target_volume: float | None = None,
                        target_mean_curvature: float | None = None
                        ) -> tuple[TriMesh, SolveReport]:
    """Constant-H surface spanning the pinned polyline ``boundary``.

    Exactly one of target_volume / target_mean_curvature selects the
    constraint: either the enclosed (divergence) volume is fixed, or the
    volume is tuned until the equilibrium multiplier matches the target H.
    The init mesh must have ``boundary`` as its boundary vertex set; those
    vertices never move.
    """
    if config is None:
        config = SolveConfig(mode="dirichlet_cmc")
    if config.mode != "dirichlet_cmc":
        raise ValueError("config.mode must be 'dirichlet_cmc'")
    if (target_volume is None) == (target_mean_curvature is None):
        raise ValueError(
            "exactly one of target_volume / target_mean_curvature is required")
    boundary = np.asarray(boundary, dtype=float)
    bpts = init.vertices[init.boundary_vertex_mask]
    scale = max(init.bbox_diagonal(), 1e-30)
    if len(bpts) != len(boundary):
        raise ValueError(
            f"init mesh boundary has {len(bpts)} vertices, the prescribed "
            f"curve has {len(boundary)}; the init mesh must span the curve")
    d2 = ((boundary[:, None, :] - bpts[None, :, :]) ** 2).sum(-1)
    if math.sqrt(float(d2.min(axis=1).max())) > 1e-8 * scale:
        raise ValueError("init mesh boundary does not lie on the prescribed "
                         "curve; the init mesh must span it")

    state = init_flow_state(init, config, volume_target=target_volume)
    sink = _open_sink(config)
    try:
        if target_volume is not None:
            mesh, info = _run_flow(init, config, state, sink)
            return mesh, _final_report(mesh, config, state, info)
        mesh, info = _tune_volume(init, config, state,
                                  target_mean_curvature, sink)
        return mesh, _final_report(mesh, config, state, info)
    finally:
        if sink is not None:
            sink.close()


def _default_capillary_init(sphere: Sphere, params: CapillaryParams,
                            n_angular: int = 96):
    """Analytic cap roughly matching the requested volume or curvature."""
    from .analytic import exterior_drop_cap, interior_drop_cap

    def drop_at(theta):
        if params.side == "interior":
            return interior_drop_cap(sphere.radius, theta, params.gamma)
        return exterior_drop_cap(sphere.radius, theta, params.gamma)

    if params.target_volume is not None:
        lo, hi = 0.05, math.pi - 0.05
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            try:
                if drop_at(mid).volume < params.target_volume:
                    lo = mid
                else:
                    hi = mid
            except Exception:
                lo = mid
        drop = drop_at(0.5 * (lo + hi))
    else:
        target_r = 1.0 / max(abs(params.target_curvature), 1e-9)
        best, best_err = None, math.inf
        for theta in np.linspace(0.08, math.pi - 0.08, 120):
            try:
                d = drop_at(theta)
            except Exception:
                continue
            err = abs(d.carrier.radius - target_r)
            if err < best_err:
                best, best_err = d, err
        drop = best
    mesh = drop.free_surface_mesh(n_angular)
    if sphere.center.any():
        mesh = mesh.with_vertices(mesh.vertices + sphere.center)
    return mesh


def solve_capillary(sphere: Sphere, params: CapillaryParams,
                    init: TriMesh | None = None,
                    config: SolveConfig | None = None
                    ) -> tuple[TriMesh, SolveReport]:
    """Fixed-volume drop on a sphere; the contact angle emerges from the
    minimization rather than being enforced.

    The boundary slides tangentially on the substrate.  With
    ``target_curvature`` set, the volume is tuned until the equilibrium
    multiplier (= mean curvature) matches.
    """
    if config is None:
        config = SolveConfig(mode="capillary", params=params, substrate=sphere)
    if config.mode != "capillary":
        raise ValueError("config.mode must be 'capillary'")
    if init is None:
        init = _default_capillary_init(sphere, params)
    state = init_flow_state(init, config,
                            volume_target=params.target_volume)
    sink = _open_sink(config)
    try:
        if params.target_volume is not None:
            mesh, info = _run_flow(init, config, state, sink)
        else:
            mesh, info = _tune_volume(init, config, state,
                                      params.target_curvature, sink)
        return mesh, _final_report(mesh, config, state, info)
    finally:
        if sink is not None:
            sink.close()


def solve_prescribed_height_curvature(sphere: Sphere, params: CapillaryParams,
                                      init: TriMesh | None = None,
                                      config: SolveConfig | None = None
                                      ) -> tuple[TriMesh, SolveReport]:
    """Equilibrium under the height-linear curvature law H = kappa z + mu.

    Requires kappa > 0 and the initial boundary strictly inside the upper
    open hemisphere of the substrate.  With ``target_curvature`` set it is
    the law constant mu and the volume is tuned until the equilibrium
    multiplier matches it; with ``target_volume`` the constant emerges and
    is reported as the multiplier.
    """
    if params.kappa <= 0.0:
        raise ValueError("prescribed height-curvature mode requires kappa > 0")
    if config is None:
        config = SolveConfig(mode="prescribed_height_curvature",
                             params=params, substrate=sphere)
    if config.mode != "prescribed_height_curvature":
        raise ValueError("config.mode must be 'prescribed_height_curvature'")
    if init is None:
        init = _default_capillary_init(sphere, params)
    bz = init.vertices[init.boundary_vertex_mask, 2] - sphere.center[2]
    if not (bz > 1e-12 * sphere.radius).all():
        raise ValueError("the boundary must lie in the upper open hemisphere "
                         "of the substrate")
    state = init_flow_state(init, config,
                            volume_target=params.target_volume)
    sink = _open_sink(config)
    try:
        if params.target_volume is not None:
            mesh, info = _run_flow(init, config, state, sink)
            mu_law = state.multiplier
        else:
            mesh, info = _tune_volume(init, config, state,
                                      params.target_curvature, sink)
            mu_law = params.target_curvature
        return mesh, _final_report(mesh, config, state, info, mu_for_law=mu_law)
    finally:
        if sink is not None:
            sink.close()
