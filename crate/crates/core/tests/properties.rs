use proptest::prelude::*;

use pdwg::analysis::{error_lambda, triple_bar};
use pdwg::fem::{project_tri, tri_quadrature, TriGeom};
use pdwg::mesh::{unit_square_at_level, Side};
use pdwg::problems::list_cases;
use pdwg::study::solve_level;
use pdwg::system::{assemble, solve};
use pdwg::wg::{local_weak_moments, ElementView, Quadrature};
use pdwg::{BoundaryConfig, Point, PrimalSpace, PrimalVec, WgSpace};

fn sides() -> impl Strategy<Value = Vec<Side>> {
    proptest::sample::subsequence(Side::ALL.to_vec(), 0..=4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn mesh_invariants(level in 0u32..=5) {
        let m = unit_square_at_level(level);
        let n = 1usize << level;
        prop_assert_eq!(m.vertices().len(), (n + 1) * (n + 1));
        prop_assert_eq!(m.num_triangles(), 2 * n * n);
        prop_assert_eq!(m.num_edges(), 3 * n * n + 2 * n);
        let total: f64 = (0..m.num_triangles()).map(|t| m.area(t)).sum();
        prop_assert!((total - 1.0).abs() < 1e-13);
        for e in 0..m.num_edges() {
            let adj = m.edge_triangles(e);
            prop_assert_eq!(adj.len(), if m.is_boundary_edge(e) { 1 } else { 2 });
            prop_assert!((m.edges()[e].normal.norm() - 1.0).abs() < 1e-15);
            if adj.len() == 2 {
                let sign = |t: usize| m.triangle_edges(t).iter().find(|le| le.edge == e).unwrap().sign;
                prop_assert_eq!(sign(adj[0]), -sign(adj[1]));
            } else {
                let [a, b] = m.edge_points(e);
                let mid = (a + b) * 0.5;
                let on_side = mid.x.abs() < 1e-15 || mid.y.abs() < 1e-15 || (mid.x - 1.0).abs() < 1e-15 || (mid.y - 1.0).abs() < 1e-15;
                prop_assert!(on_side);
            }
        }
    }

    #[test]
    fn quadrature_is_exact_on_monomials(exactness in 0usize..=24, i in 0usize..=24, j in 0usize..=24) {
        prop_assume!(i + j <= exactness);
        let rule = tri_quadrature(exactness).unwrap();
        prop_assert!(rule.weights.iter().all(|&w| w > 0.0));
        prop_assert!((rule.measure() - 0.5).abs() < 1e-15);
        let fact = |n: usize| (1..=n).map(|k| k as f64).product::<f64>();
        let exact = fact(i) * fact(j) / fact(i + j + 2);
        let got: f64 = rule.points.iter().zip(&rule.weights).map(|(p, w)| w * p[0].powi(i as i32) * p[1].powi(j as i32)).sum();
        prop_assert!((got - exact).abs() <= 1e-14 * exact);
    }

    #[test]
    fn projection_is_idempotent(
        verts in proptest::array::uniform6(-2.0f64..2.0),
        freq in 0.5f64..4.0,
        degree in 0usize..=4,
    ) {
        let pts = [Point::new(verts[0], verts[1]), Point::new(verts[2], verts[3]), Point::new(verts[4], verts[5])];
        let d1 = pts[1] - pts[0];
        let d2 = pts[2] - pts[0];
        let g = TriGeom::new(pts);
        prop_assume!((d1.x * d2.y - d1.y * d2.x).abs() > 0.2 * g.diameter * g.diameter);
        let rule = tri_quadrature(2 * degree + 8).unwrap();
        let c = project_tri(|p| (freq * p.x).sin() * (p.y * p.x).cos(), &g, degree, &rule).unwrap();
        let basis = pdwg::fem::TriBasis::new(&g, degree);
        let again = project_tri(|p| basis.eval(&c, p), &g, degree, &rule).unwrap();
        let diff: Vec<f64> = c.iter().zip(&again).map(|(a, b)| a - b).collect();
        let l2 = |v: &[f64]| rule.map_triangle(&g.points).map(|(p, w)| w * basis.eval(v, &p).powi(2)).sum::<f64>().sqrt();
        prop_assert!(l2(&diff) <= 1e-12 * l2(&c).max(1e-12));
    }

    /// `Σ_T <σ_n n_e·n_T, v>_∂T = Σ_e <σ_n, [[v]]>_e` for piecewise-constant `v`.
    #[test]
    fn flux_sign_consistency(level in 0u32..=3, seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let m = unit_square_at_level(level);
        let space = WgSpace::unconstrained(&m, 2).unwrap();
        let primal = PrimalSpace::new(&m, 2).unwrap();
        let quad = Quadrature::for_degree(2).unwrap();
        let mut sigma = space.zeros();
        for e in 0..m.num_edges() {
            for j in 0..space.flux_dim() {
                sigma.0[space.flux_offset(e) + j] = rng.random_range(-1.0..1.0);
            }
        }
        let v = PrimalVec((0..primal.dim()).map(|_| rng.random_range(-1.0..1.0)).collect());
        let mut by_element = 0.0;
        for t in 0..m.num_triangles() {
            let mom = local_weak_moments(&ElementView::of(&m, t), &pdwg::TensorField::identity(), 2, &quad);
            let local = sigma.local(&space, &m, t);
            by_element += v.0[t] * (0..local.len()).map(|j| mom[(0, j)] * local[j]).sum::<f64>();
        }
        let mut by_edge = 0.0;
        for e in 0..m.num_edges() {
            // only the constant mode of σ_n has a nonzero mean
            let mean = sigma.flux(&space, e)[0] * m.edges()[e].length;
            let jump: f64 = m
                .edge_triangles(e)
                .iter()
                .map(|&t| m.triangle_edges(t).iter().find(|le| le.edge == e).unwrap().sign * v.0[t])
                .sum();
            by_edge += mean * jump;
        }
        prop_assert!((by_element - by_edge).abs() < 1e-12 * (1.0 + by_edge.abs()));
    }

    #[test]
    fn constraint_mask(dirichlet in sides(), neumann in sides(), k in 2usize..=3, seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let m = unit_square_at_level(2);
        let bc = BoundaryConfig::new(&dirichlet, &neumann);
        let space = WgSpace::new(&m, k, &bc).unwrap();
        let mut v = pdwg::WeakFunctionVec((0..space.dim()).map(|_| rng.random_range(-1.0..1.0)).collect());
        space.apply_constraints(&mut v);
        for e in 0..m.num_edges() {
            let class = space.edge_class(e);
            if class.in_neumann_complement() {
                prop_assert!(v.trace(&space, e).iter().all(|&x| x == 0.0));
            }
            if class.in_dirichlet_complement() {
                prop_assert!(v.flux(&space, e).iter().all(|&x| x == 0.0));
            }
        }
        for i in 0..space.dim() {
            if space.free_index(i).is_none() {
                let edge = match space.locate(i) {
                    pdwg::wg::DofKind::Trace { edge, .. } | pdwg::wg::DofKind::Flux { edge, .. } => edge,
                    pdwg::wg::DofKind::Interior { .. } => usize::MAX,
                };
                prop_assert!(edge != usize::MAX && m.is_boundary_edge(edge));
            }
        }
    }

    /// Both block rows hold for the computed solution, re-tested against
    /// every basis function.
    #[test]
    fn discrete_equations_hold(case_index in 0usize..21, level in 1u32..=3) {
        let cases = list_cases();
        let case = &cases[case_index % cases.len()];
        let m = unit_square_at_level(level);
        let space = WgSpace::new(&m, 2, &case.bc).unwrap();
        let primal = PrimalSpace::new(&m, 2).unwrap();
        let quad = Quadrature::for_degree(2).unwrap();
        let sys = assemble(&space, &primal, &m, &case.a, &case.load_data(), &case.bc, &quad).unwrap();
        let sol = solve(&sys).unwrap();
        let lam = space.restrict(&sol.lambda);
        let mut r1 = sys.stabilizer.mul_vec(&lam);
        for (r, bt) in r1.iter_mut().zip(sys.coupling.mul_vec_transposed(&sol.u.0)) {
            *r += bt;
        }
        let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let diff: Vec<f64> = r1.iter().zip(&sys.rhs).map(|(a, b)| a - b).collect();
        prop_assert!(norm(&diff) <= 1e-10 * norm(&sys.rhs).max(1e-300));
        let r2 = sys.coupling.mul_vec(&lam);
        prop_assert!(norm(&r2) <= 1e-10 * norm(&sys.rhs).max(1e-300));
    }

    #[test]
    fn lambda_norms_scale_exactly(c in -10.0f64..10.0, level in 0u32..=2) {
        let case = &list_cases()[2];
        let lvl = solve_level(case, 2, 1 << level).unwrap();
        let base = error_lambda(&lvl.solution.lambda, &lvl.mesh, &lvl.space, &lvl.quad);
        let scaled = error_lambda(&lvl.solution.lambda.scaled(c), &lvl.mesh, &lvl.space, &lvl.quad);
        for (s, b) in [(scaled.l0, base.l0), (scaled.lb, base.lb), (scaled.ln, base.ln)] {
            prop_assert!((s - c.abs() * b).abs() <= 1e-13 * b.max(1.0));
        }
    }
}

/// One would expect `|||λ_h|||` to decrease monotonically under refinement.
/// For `k = 2` it does not (it settles at an O(1) value, see README), so
/// this pins the stronger fact that holds at `k = 3`.
#[test]
fn stabilizer_norm_of_multiplier_decreases_for_k3() {
    for name in ["sin_sin_varcoef", "exp_xy_varcoef"] {
        let case = pdwg::get_case(name).unwrap();
        let norms: Vec<f64> = [2, 4, 8, 16]
            .iter()
            .map(|&n| {
                let l = solve_level(&case, 3, n).unwrap();
                triple_bar(&l.solution.lambda, &l.mesh, &l.space, &case.a, &l.quad)
            })
            .collect();
        assert!(norms.windows(2).all(|w| w[1] < w[0]), "{name}: {norms:?}");
    }
}

/// At `k = 2` the multiplier's energy levels off instead: an interior `σ_n`
/// test row ties the flux residual on each edge to `[[u_h]]/h`, which is
/// O(1) for a piecewise-constant `u_h` approximating a smooth `u`.
#[test]
fn stabilizer_norm_of_multiplier_levels_off_for_k2() {
    let case = pdwg::get_case("sin_sin_varcoef").unwrap();
    let norms: Vec<f64> = [4, 8, 16]
        .iter()
        .map(|&n| {
            let l = solve_level(&case, 2, n).unwrap();
            triple_bar(&l.solution.lambda, &l.mesh, &l.space, &case.a, &l.quad)
        })
        .collect();
    assert!(norms.iter().all(|&v| v > 1.0), "{norms:?}");
    assert!((norms[2] / norms[0] - 1.0).abs() < 0.1, "{norms:?}");
}

/// With data on every side (Cauchy on bottom/top, D on left, N on right)
/// the multiplier's conditions are `λ = 0` on the left and `∂_n λ = 0` on
/// the right only, which `φ = sin(πx/2) sinh(πy/2)` satisfies with `Δφ = 0`.
/// Its projection is an asymptotically null vector of the whole system.
#[test]
fn four_sided_configuration_has_near_null_multiplier() {
    use std::f64::consts::FRAC_PI_2 as C;
    let case = pdwg::get_case("suite_sin_sin").unwrap();
    let a = pdwg::TensorField::identity();
    let mut ratios = Vec::new();
    let mut contrast = Vec::new();
    for level in [2, 3, 4] {
        let m = unit_square_at_level(level);
        let space = WgSpace::new(&m, 2, &case.bc).unwrap();
        let primal = PrimalSpace::new(&m, 2).unwrap();
        let quad = Quadrature::for_degree(2).unwrap();
        let phi = pdwg::wg::project_qh(
            |p| (C * p.x).sin() * (C * p.y).sinh(),
            |p| Point::new(C * (C * p.x).cos() * (C * p.y).sinh(), C * (C * p.x).sin() * (C * p.y).cosh()),
            &a,
            &m,
            &space,
            &quad,
        )
        .unwrap();
        let sys = assemble(&space, &primal, &m, &a, &pdwg::LoadData::zero(), &case.bc, &quad).unwrap();
        let x = space.restrict(&phi);
        let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let mut r = sys.stabilizer.mul_vec(&x);
        r.extend(sys.coupling.mul_vec(&x));
        ratios.push(norm(&r) / norm(&x));

        // same boundary conditions, but Δψ = -2
        let psi =
            pdwg::wg::project_qh(|p| p.x * (2.0 - p.x), |p| Point::new(2.0 - 2.0 * p.x, 0.0), &a, &m, &space, &quad)
                .unwrap();
        let y = space.restrict(&psi);
        let mut r = sys.stabilizer.mul_vec(&y);
        r.extend(sys.coupling.mul_vec(&y));
        contrast.push(norm(&r) / norm(&y));
    }
    // Matrix entries shrink with h, so both ratios decay; the harmonic
    // candidate's decays one order faster.
    assert!(ratios.windows(2).all(|w| w[1] < 0.2 * w[0]), "{ratios:?}");
    assert!(contrast.windows(2).all(|w| w[1] > 0.2 * w[0]), "{contrast:?}");
}
