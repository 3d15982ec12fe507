use b3fem::analysis::{order_known_exact, order_successive};
use b3fem::problems::{
    morley_alpha_sweep, solve_bihar_evp, solve_tep, ProblemKind, Scheme, SourceExample, SpectralSettings,
};
use b3fem::{CoefficientField, Domain};

#[test]
fn coarsest_table_row_for_linear_coefficient() {
    let delta = CoefficientField::preset("delta_lin").unwrap();
    let s = solve_bihar_evp(Domain::Square, 8, &delta, 10, Scheme::B3, &SpectralSettings::default()).unwrap();
    let printed = [
        10374.5195,
        43152.3618,
        43280.1536,
        94720.7844,
        138651.7814,
        140390.6663,
        221070.9885,
        221623.7915,
        353927.2977,
        355323.7661,
    ];
    for (got, want) in s.values.iter().zip(printed) {
        assert!((got - want).abs() < 1e-3, "{got} vs {want}");
    }
    assert!(s.residuals.iter().all(|&r| r <= 1e-9));
}

#[test]
fn eigenvalues_decrease_under_refinement() {
    let delta = CoefficientField::preset("delta_rad").unwrap();
    let settings = SpectralSettings::default();
    let coarse = solve_bihar_evp(Domain::Square, 8, &delta, 6, Scheme::B3, &settings).unwrap();
    let fine = solve_bihar_evp(Domain::Square, 16, &delta, 6, Scheme::B3, &settings).unwrap();
    for (c, f) in coarse.values.iter().zip(&fine.values) {
        assert!(f < c);
    }
}

#[test]
fn source_orders_on_small_meshes() {
    for k in 1..=3 {
        let ex = SourceExample::numbered(k).unwrap();
        let errs: Vec<[f64; 3]> =
            [8, 16, 32].iter().map(|&n| ex.solve(n).unwrap().errors.unwrap().as_array()).collect();
        for (norm, want) in [2.0, 3.0, 4.0].iter().enumerate() {
            let col: Vec<f64> = errs.iter().map(|e| e[norm]).collect();
            let last = order_known_exact(&col)[2].unwrap();
            assert!((last - want).abs() < 0.3, "example {k}, norm {norm}: {last}");
        }
    }
}

#[test]
fn zero_load_source_errors_equal_exact_norms() {
    let ex = SourceExample::numbered(2).unwrap();
    let zero = b3fem::problems::solve_source(ex.domain, 4, &ex.delta, |_| 0.0, Some(&*ex.exact)).unwrap();
    let e = zero.errors.unwrap();
    let l2 = b3fem::quadrature::barycentric_monomial_integral(4, 4, 4, 0.5).sqrt();
    assert!((e.l2 - l2).abs() <= 1e-13 * l2);
}

#[test]
fn coarse_transmission_eigenvalues() {
    let n16 = CoefficientField::preset("n16").unwrap();
    let s = solve_tep(Domain::Square, 8, &n16, 6, Scheme::B3, &SpectralSettings::default()).unwrap();
    let roots = s.roots.clone().unwrap();
    assert_eq!(roots.len(), 6);
    assert!(s.values.iter().all(|&t| t >= 1e-6));
    assert!(s.residuals.iter().all(|&r| r <= 1e-8));
    // upper bounds for the converged values
    let reference = [1.879591, 2.444236, 2.444236, 2.866439, 3.140111, 3.471509];
    for (r, want) in roots.iter().zip(reference) {
        assert!(*r > want && *r < want + 0.02, "{r} vs {want}");
    }
}

#[test]
fn transmission_vectors_are_gradient_normalized() {
    let n16 = CoefficientField::preset("n16").unwrap();
    let mesh = Domain::Square.build(8).unwrap();
    let map = b3fem::build_dofmap(&mesh);
    let grad = b3fem::assembly::assemble_grad(&mesh, &map).unwrap();
    let s = solve_tep(Domain::Square, 8, &n16, 3, Scheme::B3, &SpectralSettings::default()).unwrap();
    for v in &s.vectors {
        let gv = grad.mul_vec(v);
        let b: f64 = v.iter().zip(&gv).map(|(a, b)| a * b).sum();
        assert!((b - 1.0).abs() < 1e-10);
    }
}

#[test]
fn tiny_mesh_uses_dense_path() {
    let n16 = CoefficientField::preset("n16").unwrap();
    let s = solve_tep(Domain::Square, 3, &n16, 2, Scheme::B3, &SpectralSettings::default()).unwrap();
    assert!(!s.values.is_empty());
    assert!(s.residuals.iter().all(|&r| r <= 1e-8));
}

#[test]
fn single_cell_sweep_matches_direct_solve() {
    let one = CoefficientField::constant(1.0);
    let settings = SpectralSettings::default();
    let cells = morley_alpha_sweep(Domain::Square, &[8], &one, &[0.5], 4, ProblemKind::Bihar, &settings);
    assert_eq!(cells.len(), 1);
    let direct = solve_bihar_evp(Domain::Square, 8, &one, 4, Scheme::Morley { alpha: 0.5 }, &settings).unwrap();
    assert_eq!(cells[0].result.as_ref().unwrap().values, direct.values);
}

#[test]
fn sweep_records_failures_and_continues() {
    let one = CoefficientField::constant(1.0);
    let cells = morley_alpha_sweep(
        Domain::Square,
        &[4],
        &one,
        &[2.0, 0.5],
        2,
        ProblemKind::Bihar,
        &SpectralSettings::default(),
    );
    assert!(cells[0].result.is_err());
    assert!(cells[1].result.is_ok());
}

#[test]
fn morley_transmission_runs() {
    let n_lin = CoefficientField::preset("n_lin").unwrap();
    // alpha must stay below 1/(n_max - 1) = 1/8
    let s =
        solve_tep(Domain::Square, 8, &n_lin, 4, Scheme::Morley { alpha: 0.05 }, &SpectralSettings::default()).unwrap();
    assert_eq!(s.values.len(), 4);
    assert!(
        solve_tep(Domain::Square, 8, &n_lin, 4, Scheme::Morley { alpha: 0.2 }, &SpectralSettings::default()).is_err()
    );
}

#[test]
fn successive_orders_of_linear_coefficient_table() {
    let delta = CoefficientField::preset("delta_lin").unwrap();
    let vals: Vec<f64> = [8, 16, 32]
        .iter()
        .map(|&n| {
            solve_bihar_evp(Domain::Square, n, &delta, 1, Scheme::B3, &SpectralSettings::default()).unwrap().values[0]
        })
        .collect();
    let o = order_successive(&vals)[2].unwrap();
    assert!((o - 3.785).abs() < 0.1, "{o}");
}
