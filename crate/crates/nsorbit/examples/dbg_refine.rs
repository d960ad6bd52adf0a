use nsorbit::solver::{newton_refine, GalerkinProblem, PhaseMode};
use nsorbit::spectral::ModeKey;
use nsorbit::symmetry::{project_pi, taylor_green_16, OrbitCatalog};
use nsorbit::validator::TruncationScheme;
use nsorbit::vfld::read_field_file;
use nsorbit::vorticity::taylor_green_forcing;
use num_complex::Complex64 as C64;

fn main() {
    let file = read_field_file(std::path::Path::new("data/tg-orbit-nu0.286-seed.json")).unwrap();
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
    let problem = GalerkinProblem {
        scheme: TruncationScheme {
            support, ndagger: 8, ntilde: 16, eta: 1.0, nu: file.nu, essentially_2d: true,
        },
        forcing: taylor_green_forcing(),
        phase: PhaseMode::PreviousIterate,
    };
    let (refined, t) = newton_refine(&phi0, &problem, &mut catalog).unwrap();
    println!("first: iters={} residuals={:?}", t.iterations, t.residuals);
    println!("omega = {}", refined.omega);
    let mut perturbed = refined.clone();
    let keys = perturbed.sorted_keys();
    for (i, j) in keys.iter().enumerate() {
        if i % 7 == 0 {
            let v = perturbed.get(j) + C64::new(1e-6, -0.5e-6);
            perturbed.set(*j, v);
        }
    }
    match newton_refine(&perturbed, &problem, &mut catalog) {
        Ok((_, t2)) => println!("second: iters={} residuals={:?}", t2.iterations, t2.residuals),
        Err(e) => println!("second failed: {e}"),
    }
}
