//! End-to-end refinement of the shipped Taylor-Green orbit seed: load the
//! bootstrap data, Newton-polish it on the reduced Galerkin system, and
//! check convergence quality.

use nsorbit::solver::{newton_refine, GalerkinProblem, PhaseMode};
use nsorbit::spectral::ModeKey;
use nsorbit::symmetry::{
    lift_sigma, project_pi, symmetrize_input, taylor_green_16, OrbitCatalog,
};
use nsorbit::validator::TruncationScheme;
use nsorbit::vfld::read_field_file;
use nsorbit::vorticity::taylor_green_forcing;
use nsorbit::spectral::Coeff;
use num_complex::Complex64 as C64;
use std::path::PathBuf;

fn seed_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/tg-orbit-nu0.286-seed.json")
}

#[test]
fn shipped_seed_refines_to_newton_tolerance() {
    let file = read_field_file(&seed_path()).expect("seed data present");
    assert_eq!(file.nu, 0.286);
    let mut catalog = OrbitCatalog::new(taylor_green_16());
    let support = file.support;
    let mut cover = vec![];
    for n in support.sum(&support).iter_nonzero() {
        for c in 0..3 {
            cover.push(ModeKey::new(n, c));
        }
    }
    catalog.ensure_modes(cover);

    let field = file.field.midpoint();
    let phi0 = project_pi(C64::new(file.omega, 0.0), &field, &catalog).unwrap();
    assert!(!phi0.phi.is_empty());

    // the projected seed reproduces the full field: the data is symmetric
    let relift = lift_sigma(&phi0, &catalog).unwrap();
    let mut err: f64 = 0.0;
    let mut amp: f64 = 0.0;
    for (j, v) in field.iter() {
        err = err.max((relift.get(&j) - v).norm());
        amp = amp.max(v.norm());
    }
    assert!(err < 1e-6 * amp, "symmetrization defect {err} vs amp {amp}");

    let problem = GalerkinProblem {
        scheme: TruncationScheme {
            support,
            ndagger: 8,
            ntilde: 16,
            eta: 1.0,
            nu: file.nu,
            essentially_2d: true,
        },
        forcing: taylor_green_forcing(),
        phase: PhaseMode::PreviousIterate,
    };
    let (refined, telemetry) = newton_refine(&phi0, &problem, &mut catalog).unwrap();
    assert!(telemetry.converged, "telemetry: {telemetry:?}");
    assert!(*telemetry.residuals.last().unwrap() < 1e-12);
    assert!(
        telemetry.iterations <= 8,
        "expected fast convergence from bootstrap data: {:?}",
        telemetry.residuals
    );
    // frequency stays near the measured one and essentially real
    assert!((refined.omega.re - file.omega).abs() < 1e-2);
    assert!(refined.omega.im.abs() < 1e-9);

    // perturb by 1e-6 and recover to 1e-12 within a few steps
    let mut perturbed = refined.clone();
    let keys = perturbed.sorted_keys();
    for (i, j) in keys.iter().enumerate() {
        if i % 7 == 0 {
            let v = perturbed.get(j) + C64::new(1e-6, -0.5e-6);
            perturbed.set(*j, v);
        }
    }
    let (recovered, tele2) = newton_refine(&perturbed, &problem, &mut catalog).unwrap();
    assert!(tele2.converged && tele2.iterations <= 3, "{:?}", tele2.residuals);
    // the recovered orbit is the same up to a time translation (complex a
    // priori, real after symmetrization); frequency and the symmetrized
    // magnitude spectrum are translation invariants
    assert!((recovered.omega - refined.omega).norm() < 1e-9);
    let rec_sym = symmetrize_input(&recovered.to_rigorous(), &catalog)
        .unwrap()
        .midpoint();
    for j in refined.sorted_keys() {
        assert!(
            (rec_sym.get(&j).norm() - refined.get(&j).norm()).abs() < 1e-8,
            "magnitude mismatch at {j}: {} vs {}",
            rec_sym.get(&j).norm(),
            refined.get(&j).norm()
        );
    }

    // quadratic convergence: ratios r_{k+1} / r_k^2 bounded along the tail
    let rs = &tele2.residuals;
    for w in rs.windows(2) {
        if w[0] < 1e-3 && w[1] > 1e-15 {
            assert!(
                w[1] <= 20.0 * w[0] * w[0] + 1e-13,
                "not quadratic: {rs:?}"
            );
        }
    }

    // symmetrize_input changes the converged orbit by less than 10x the
    // final Newton residual in reduced norm
    let rphi = refined.to_rigorous();
    let sym = symmetrize_input(&rphi, &catalog).unwrap();
    let eta = rigor::RigorousReal::one();
    let mut diff = nsorbit::symmetry::ReducedState::new(
        sym.omega.sub(&rphi.omega),
    );
    for j in rphi.sorted_keys().into_iter().chain(sym.sorted_keys()) {
        diff.set(j, sym.get(&j).sub(&rphi.get(&j)));
    }
    let dn = nsorbit::symmetry::reduced_norm(&diff, &catalog, &eta).unwrap();
    let res = *telemetry.residuals.last().unwrap();
    assert!(
        dn.hi() <= (10.0 * res).max(1e-11),
        "symmetrization moved the orbit by {dn:?} (residual {res:.3e})"
    );
}
