use nsorbit::solver::{newton_refine, GalerkinProblem, PhaseMode};
use nsorbit::spectral::ModeKey;
use nsorbit::symmetry::{project_pi, taylor_green_16, OrbitCatalog};
use nsorbit::validator::{count_e, validate, DiagonalTail, TruncationScheme};
use nsorbit::vfld::read_field_file;
use nsorbit::vorticity::taylor_green_forcing;
use num_complex::Complex64 as C64;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let ndagger: u32 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(8);
    let ntilde: u32 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(16);

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
    let phi0 = project_pi(C64::new(file.omega, 0.0), &file.field.midpoint(), &catalog).unwrap();
    let scheme = TruncationScheme {
        support,
        ndagger,
        ntilde,
        eta: 1.0,
        nu: file.nu,
        essentially_2d: true,
    };
    let problem = GalerkinProblem {
        scheme,
        forcing: taylor_green_forcing(),
        phase: PhaseMode::PreviousIterate,
    };
    let t0 = std::time::Instant::now();
    let (refined, tele) = newton_refine(&phi0, &problem, &mut catalog).unwrap();
    println!(
        "refined in {:?}: {} iterations, residual {:.3e}, omega {:.8}",
        t0.elapsed(),
        tele.iterations,
        tele.residuals.last().unwrap(),
        refined.omega.re
    );

    let tail = DiagonalTail::new(scheme.nu, refined.omega.re).unwrap();
    println!("|E({})| = {}", ndagger, count_e(ndagger, &tail));

    let t1 = std::time::Instant::now();
    let report = validate(
        &refined.to_rigorous(),
        &scheme,
        &mut catalog,
        &taylor_green_forcing(),
    )
    .unwrap();
    println!("validate in {:?}", t1.elapsed());
    println!(
        "block_dim {} e_dagger {} z1_cols {}",
        report.block_dim, report.e_dagger_modes, report.z1_columns
    );
    println!(
        "Y0 = [{:.6e},{:.6e}]\nZ0 = [{:.6e},{:.6e}]\nZ1f = [{:.6e},{:.6e}]\nZ1t = [{:.6e},{:.6e}]\nZ2 = [{:.6e},{:.6e}]",
        report.y0.lo(), report.y0.hi(),
        report.z0.lo(), report.z0.hi(),
        report.z1_finite.lo(), report.z1_finite.hi(),
        report.z1_tail.lo(), report.z1_tail.hi(),
        report.z2.lo(), report.z2.hi(),
    );
    println!(
        "success = {} margins: contraction {:.4e}, discriminant {:.4e}",
        report.success, report.contraction_margin, report.discriminant_margin
    );
    if let (Some(rmin), Some(rmax)) = (&report.rmin, &report.rmax) {
        println!("rmin = [{:.6e},{:.6e}] rmax = [{:.6e},{:.6e}]", rmin.lo(), rmin.hi(), rmax.lo(), rmax.hi());
    }
    if let Some(f) = report.failure_attribution() {
        println!("failure: {f}");
    }
    for (name, ms) in &report.timing_ms {
        println!("  {name}: {ms} ms");
    }
}
