//! Non-rigorous numerics: Newton iteration on the symmetry-reduced Galerkin
//! system producing the approximate orbit and frequency, the dense
//! numerical inverse, and a natural-continuation step in the viscosity.

use crate::error::{Error, Result};
use crate::spectral::{Coeff, ModeKey, SupportBox};
use crate::symmetry::{lift_sigma, orbit_data, OrbitCatalog, ReducedState, UnitPhase};
use crate::validator::TruncationScheme;
use crate::vorticity::{residual_f, Forcing, JacobianTables, PhaseReference, State};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

/// How the scalar phase equation is closed.
#[derive(Clone, Debug)]
pub enum PhaseMode {
    /// Phase row against a fixed reduced reference orbit.
    Reference(ReducedState<C64>),
    /// Use the incoming iterate as the reference, fixed for the whole
    /// Newton solve (refreshed between continuation steps).
    PreviousIterate,
    /// Replace the phase row by Omega - Omega0 = 0 (for equilibria and
    /// other states without a meaningful time phase).
    PinnedOmega(f64),
}

/// Finite Galerkin zero-finding problem on the reduced solution box.
#[derive(Clone, Debug)]
pub struct GalerkinProblem {
    pub scheme: TruncationScheme,
    pub forcing: Forcing<C64>,
    pub phase: PhaseMode,
}

/// Per-iteration record of a Newton run.
#[derive(Clone, Debug, serde::Serialize)]
pub struct NewtonTelemetry {
    pub residuals: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// lower estimate of the jacobian inverse action (sup-norm ratio of
    /// Newton step to residual, maximized over iterations)
    pub condition_estimate: f64,
}

/// Reduced unknown slots over the solution box: symmetric orbit
/// representatives inside the box, sorted; slot 0 is the frequency.
pub fn box_reduced_keys(support: &SupportBox, catalog: &OrbitCatalog) -> Vec<ModeKey> {
    let group = catalog.group();
    let mut keys = Vec::new();
    for n in support.iter_nonzero() {
        for c in 0..3 {
            let j = ModeKey::new(n, c);
            let d = orbit_data(group, &j);
            if d.symmetric && d.rep == j && support.contains(&d.rep.n) {
                keys.push(j);
            }
        }
    }
    keys.sort();
    keys.dedup();
    keys
}

fn reduced_residual_vector(
    phi: &ReducedState<C64>,
    keys: &[ModeKey],
    problem: &GalerkinProblem,
    phase_ref: &ReducedState<C64>,
    catalog: &OrbitCatalog,
) -> Result<DVector<C64>> {
    let lifted = lift_sigma(phi, catalog)?;
    let hat = lift_sigma(phase_ref, catalog)?;
    let state = State::new(phi.omega, lifted)?;
    let phase = PhaseReference::new(hat);
    let (fp, fr) = residual_f(&state, problem.scheme.nu, &problem.forcing, &phase)?;
    let mut v = DVector::zeros(keys.len() + 1);
    v[0] = match &problem.phase {
        PhaseMode::PinnedOmega(target) => phi.omega - C64::new(*target, 0.0),
        _ => fp,
    };
    for (i, j) in keys.iter().enumerate() {
        v[i + 1] = fr.get(j);
    }
    Ok(v)
}

fn reduced_jacobian(
    phi: &ReducedState<C64>,
    keys: &[ModeKey],
    problem: &GalerkinProblem,
    phase_ref: &ReducedState<C64>,
    catalog: &OrbitCatalog,
) -> Result<DMatrix<C64>> {
    let group = catalog.group();
    let dim = keys.len() + 1;
    let slot: std::collections::HashMap<ModeKey, usize> =
        keys.iter().enumerate().map(|(i, j)| (*j, i + 1)).collect();
    let lifted = lift_sigma(phi, catalog)?;
    let tables = JacobianTables::new(&lifted);
    let nu = problem.scheme.nu;
    let mut jac = DMatrix::<C64>::zeros(dim, dim);

    // frequency column: i n4 phi_j
    for (j, v) in &phi.phi {
        if let Some(&s) = slot.get(j) {
            jac[(s, 0)] = v.mul_i().scale_int(j.n.n4 as i64);
        }
    }
    // phase row
    match &problem.phase {
        PhaseMode::PinnedOmega(_) => jac[(0, 0)] = C64::new(1.0, 0.0),
        _ => {
            for (i, j) in keys.iter().enumerate() {
                let h = phase_ref.get(j);
                if j.n.n4 != 0 && !(h.re == 0.0 && h.im == 0.0) {
                    let osize = orbit_data(group, j).orbit_size as i64;
                    jac[(0, i + 1)] = h.conj().mul_i().scale_int(j.n.n4 as i64 * osize);
                }
            }
        }
    }
    // mode columns: transported quadratic entries plus the heat diagonal
    for (ci, j) in keys.iter().enumerate() {
        let c = ci + 1;
        let mut seen = std::collections::HashSet::new();
        for gi in 0..group.order() {
            let member = group.beta(gi, j);
            if !seen.insert(member) {
                continue;
            }
            let phase: C64 = UnitPhase::unit_from_turn(group.alpha_turn(gi, j).neg().mod1());
            for (row, v) in tables.dpsi_column(&member.n, member.comp) {
                if let Some(&r) = slot.get(&row) {
                    jac[(r, c)] += phase * v;
                }
            }
        }
        jac[(c, c)] += C64::new(nu * j.n.sp_sq() as f64, 0.0)
            + C64::new(0.0, 1.0) * phi.omega * (j.n.n4 as f64);
    }
    Ok(jac)
}

/// Dense LU inverse with one step of iterative refinement and a 1-norm
/// condition estimate.
pub fn numerical_inverse(j: &DMatrix<C64>) -> Result<(DMatrix<C64>, f64)> {
    assert_eq!(j.nrows(), j.ncols(), "square system required");
    let lu = j.clone().lu();
    let mut x = lu.try_inverse().ok_or(Error::SingularFiniteBlock)?;
    // one refinement step: X <- X + X (I - J X)
    let dim = j.nrows();
    let mut r = DMatrix::<C64>::identity(dim, dim) - j * &x;
    r = &x * r;
    x += r;
    if x.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::SingularFiniteBlock);
    }
    let norm1 = |m: &DMatrix<C64>| -> f64 {
        (0..m.ncols())
            .map(|c| m.column(c).iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    };
    let cond = norm1(j) * norm1(&x);
    Ok((x, cond))
}

/// Newton iteration on the reduced Galerkin system until the residual
/// sup-norm drops below 1e-12 (at most 50 iterations). Errors on stagnation
/// or a singular jacobian.
pub fn newton_refine(
    phi0: &ReducedState<C64>,
    problem: &GalerkinProblem,
    catalog: &mut OrbitCatalog,
) -> Result<(ReducedState<C64>, NewtonTelemetry)> {
    problem.scheme.validate()?;
    let mut cover: Vec<ModeKey> = phi0.phi.keys().copied().collect();
    for n in problem
        .scheme
        .support
        .sum(&problem.scheme.support)
        .iter_nonzero()
    {
        for c in 0..3 {
            cover.push(ModeKey::new(n, c));
        }
    }
    catalog.ensure_modes(cover);
    let keys = box_reduced_keys(&problem.scheme.support, catalog);
    // drop any initial content outside the unknown set
    let mut phi = ReducedState::new(phi0.omega);
    for j in &keys {
        let v = phi0.get(j);
        if !(v.re == 0.0 && v.im == 0.0) {
            phi.set(*j, v);
        }
    }

    let tol = 1e-12;
    let max_iter = 50;
    let mut residuals = Vec::new();
    let mut cond = f64::NAN;
    // the reference is fixed for the whole solve
    let phase_ref = match &problem.phase {
        PhaseMode::Reference(r) => r.clone(),
        PhaseMode::PreviousIterate | PhaseMode::PinnedOmega(_) => phi.clone(),
    };
    for it in 0..max_iter {
        let f = reduced_residual_vector(&phi, &keys, problem, &phase_ref, catalog)?;
        let res = f.iter().map(|z| z.norm()).fold(0.0, f64::max);
        residuals.push(res);
        if !res.is_finite() {
            return Err(Error::NoConvergence(format!(
                "residual diverged at iteration {it}"
            )));
        }
        if res < tol {
            return Ok((
                phi,
                NewtonTelemetry {
                    residuals,
                    iterations: it,
                    converged: true,
                    condition_estimate: cond,
                },
            ));
        }
        // stagnation: no order-of-magnitude progress over the last few steps
        if it >= 8 {
            let prev = residuals[it - 4];
            if res > prev * 0.5 {
                return Err(Error::NoConvergence(format!(
                    "residual stagnated near {res:.3e} after {it} iterations"
                )));
            }
        }
        let jac = reduced_jacobian(&phi, &keys, problem, &phase_ref, catalog)?;
        let lu = jac.lu();
        let delta = lu.solve(&f).ok_or(Error::SingularJacobian)?;
        if delta.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::SingularJacobian);
        }
        // lower estimate of the inverse action: ||delta||_inf / ||F||_inf
        let step = delta.iter().map(|z| z.norm()).fold(0.0, f64::max) / res.max(1e-300);
        cond = if cond.is_nan() { step } else { cond.max(step) };
        phi.omega -= delta[0];
        for (i, j) in keys.iter().enumerate() {
            let v = phi.get(j) - delta[i + 1];
            phi.set(*j, v);
        }
    }
    Err(Error::NoConvergence(format!(
        "no convergence after {max_iter} iterations (last residual {:.3e})",
        residuals.last().copied().unwrap_or(f64::NAN)
    )))
}

/// One natural-continuation step: shift the viscosity and re-refine with
/// the previous orbit as the initial guess.
pub fn continuation_step(
    phi: &ReducedState<C64>,
    dnu: f64,
    problem: &GalerkinProblem,
    catalog: &mut OrbitCatalog,
) -> Result<(GalerkinProblem, ReducedState<C64>, NewtonTelemetry)> {
    let mut next = problem.clone();
    next.scheme.nu += dnu;
    if !(next.scheme.nu > 0.0) {
        return Err(Error::SchemeInvalid(format!(
            "continuation reached nu = {}",
            next.scheme.nu
        )));
    }
    let (out, telemetry) = newton_refine(phi, &next, catalog)?;
    Ok((next, out, telemetry))
}
