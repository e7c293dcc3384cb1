use dlab_core::conserved::{mass, momentum_h};
use dlab_core::model::Params21;
use dlab_core::spectral::make_grid;
use dlab_core::varsolve::{
    direct_lambda_minimize, lambda_minimize, subadditivity_check, theta_minimize, theta_minimize_resolved,
    DirectOptions, LambdaOptions, ThetaOptions,
};
use dlab_core::waves::profile_residual;

const DX: f64 = 0.15;
const TAIL: f64 = 1e-10;

#[test]
fn minimizers_on_mass_lattice_are_negative_and_positive() {
    let prm = Params21::reference();
    let levels = [0.5, 1.0, 2.0];
    for &r in &levels {
        for &l in &levels {
            for &m in &levels {
                let res = theta_minimize_resolved(r, l, m, &prm, DX, TAIL, &ThetaOptions::default()).unwrap();
                let tag = format!("({r}, {l}, {m})");
                assert!(res.converged, "{tag} did not converge");
                assert!(res.value < 0.0, "{tag} value {}", res.value);
                assert!(res.min_w() > 0.0, "{tag} min w {}", res.min_w());
                assert!(res.sigma[0] > 0.0 && res.sigma[1] > 0.0, "{tag} sigma {:?}", res.sigma);
                for j in 0..2 {
                    let phi = res.phi(j);
                    let worst_im = phi.values().iter().map(|z| z.im.abs()).fold(0.0, f64::max);
                    let min_re = phi.values().iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
                    assert!(worst_im < 1e-8 * phi.max_abs(), "{tag} phase residue {worst_im}");
                    assert!(min_re > 0.0, "{tag} envelope {j} min {min_re}");
                }
                let rel = |a: f64, b: f64| (a - b).abs() / b;
                assert!(rel(mass(res.phi(0)), r) < 1e-8);
                assert!(rel(mass(res.phi(1)), l) < 1e-8);
                assert!(rel(mass(res.w()), m) < 1e-8);
                let residual = profile_residual([res.phi(0), res.phi(1)], res.w(), res.sigma, res.c, &prm);
                assert!(residual <= 1e-5, "{tag} profile residual {residual}");
            }
        }
    }
}

#[test]
fn multipliers_survive_refinement() {
    let prm = Params21::reference();
    let coarse = make_grid(80.0, 256).unwrap();
    let fine = make_grid(80.0, 512).unwrap();
    let a = theta_minimize(1.0, 1.0, 1.0, &prm, &coarse, &ThetaOptions::default()).unwrap();
    let b = theta_minimize(1.0, 1.0, 1.0, &prm, &fine, &ThetaOptions::default()).unwrap();
    assert!((a.sigma[0] - b.sigma[0]).abs() < 1e-6);
    assert!((a.sigma[1] - b.sigma[1]).abs() < 1e-6);
    assert!((a.c - b.c).abs() < 1e-6);
    assert!((a.value - b.value).abs() < 1e-6);
}

#[test]
fn doubling_all_masses_is_strictly_subadditive() {
    let prm = Params21::reference();
    let grid = make_grid(80.0, 512).unwrap();
    let opts = ThetaOptions::default();
    let report = subadditivity_check(&[[1.0, 1.0, 1.0], [1.0, 1.0, 1.0]], &prm, &grid, &opts).unwrap();
    let margin = report.margin.unwrap();
    assert!(margin < -1e-4, "margin {margin}");

    let uneven = [[1.5, 0.5, 1.0], [0.5, 1.5, 1.0]];
    let swapped = [uneven[1], uneven[0]];
    let a = subadditivity_check(&uneven, &prm, &grid, &opts).unwrap().margin.unwrap();
    let b = subadditivity_check(&swapped, &prm, &grid, &opts).unwrap().margin.unwrap();
    assert!((a - b).abs() < 1e-10);

    let skipped = subadditivity_check(&[[1.0, 1.0, 1.0], [0.0, 0.0, 0.0]], &prm, &grid, &opts).unwrap();
    assert!(skipped.parts[1].skipped);
    assert!(skipped.margin.unwrap().abs() < 1e-12);
}

#[test]
fn boost_decomposition_matches_direct_solver() {
    let prm = Params21::reference();
    let grid = make_grid(80.0, 512).unwrap();
    for m in [1.0, -1.0] {
        let split = lambda_minimize(1.0, 1.0, m, &prm, &grid, &LambdaOptions::default()).unwrap();
        let direct = direct_lambda_minimize(1.0, 1.0, m, &prm, &grid, &DirectOptions::default()).unwrap();
        assert!(direct.converged);
        let rel = (split.minimizer.value - direct.value).abs() / direct.value.abs();
        assert!(rel < 1e-4, "m = {m}: {} vs {}", split.minimizer.value, direct.value);

        for res in [&split.minimizer, &direct] {
            let s = &res.fields;
            assert!((mass(s.u1()) - 1.0).abs() < 1e-6);
            assert!((mass(s.u2()) - 1.0).abs() < 1e-6);
            assert!((momentum_h(s) - m).abs() < 1e-6, "m = {m}: H = {}", momentum_h(s));
        }
        for probe in &split.probes {
            assert!(split.minimizer.value <= probe.objective);
        }
        assert!(!split.boundary_hit);
    }
}
