mod common;

use common::*;
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use qembed::embed::{embed_joint, verify_embedding};
use qembed::pipeline::{
    build_f_alpha, build_g_tilde, build_h_tilde, build_split, find_constants, joint_cosine_law,
    reference_triplet, validate_constants, BaseCosineContext, SearchCriterion, SearchOptions,
};
use qembed::spectral::{eigendecompose, inf_norm, is_psd, psd_factorize, DEFAULT_PSD_TOLERANCE};
use qembed::{build_cosine_law, Error, ProblemInstance, Role};

const TOL: f64 = DEFAULT_PSD_TOLERANCE;

#[test]
fn jacobi_agrees_with_library_eigensolver() {
    let mut rng = rng(11);
    for k in 1..=12 {
        for _ in 0..10 {
            let a = random_symmetric(&mut rng, k);
            let ours = eigendecompose(&a).unwrap();
            let mut theirs: Vec<f64> = SymmetricEigen::new(a.clone()).eigenvalues.iter().copied().collect();
            theirs.sort_by(|x, y| y.total_cmp(x));
            for (x, y) in ours.eigenvalues.iter().zip(&theirs) {
                assert!((x - y).abs() <= 1e-9 * inf_norm(&a).max(1.0), "{x} vs {y}");
            }
            let scale = inf_norm(&a).max(1.0);
            for (i, &lambda) in ours.eigenvalues.iter().enumerate() {
                let v = ours.eigenvectors.column(i);
                assert!((&a * v - v * lambda).norm() <= 1e-8 * scale);
            }
            let vtv = ours.eigenvectors.transpose() * &ours.eigenvectors;
            assert!((vtv - DMatrix::identity(k, k)).amax() <= 1e-8);
        }
    }
}

#[test]
fn gram_matrices_are_psd_by_quadratic_form() {
    let mut rng = rng(12);
    for _ in 0..50 {
        let a = random_gram(&mut rng, 5, 3);
        assert!(is_psd(&a, TOL).unwrap().is_psd);
        for _ in 0..20 {
            let x = DVector::from_fn(5, |_, _| rand::Rng::random_range(&mut rng, -1.0..1.0));
            assert!((x.transpose() * &a * &x)[(0, 0)] >= -1e-12);
        }
    }
}

#[test]
fn planted_gram_block_matches_dot_products() {
    let mut rng = rng(13);
    for _ in 0..20 {
        let pts = random_points(&mut rng, 6, 3);
        let d = euclidean_distances(&pts);
        for a in 0..6 {
            let m = build_cosine_law(&d, a).unwrap();
            for l in 0..6 {
                for s in 0..6 {
                    let dot: f64 = (0..3).map(|t| (pts[l][t] - pts[a][t]) * (pts[s][t] - pts[a][t])).sum();
                    assert!((m.entries()[(l, s)] - dot).abs() <= 1e-10);
                }
            }
        }
    }
}

#[test]
fn zeta_matches_brute_force() {
    let mut rng = rng(14);
    for trial in 0..60 {
        let (m, n) = (2 + trial % 5, 2 + (trial / 5) % 5);
        let inst = planted_instance(&mut rng, m, n, 2, trial % 2 == 0, trial);
        let ctx = BaseCosineContext::prepare(&inst, None, TOL).unwrap();
        let oracle = brute_force_zeta(&inst);
        assert!((ctx.zeta_f - oracle).abs() <= 1e-12 * oracle.max(1.0), "{} vs {oracle}", ctx.zeta_f);
    }
}

#[test]
fn joint_matrix_matches_case_table() {
    let mut rng = rng(15);
    for trial in 0..40 {
        let (m, n) = (2 + trial % 5, 2 + (trial / 3) % 5);
        let inst = planted_instance(&mut rng, m, n, 3, trial % 2 == 1, trial);
        let ctx = BaseCosineContext::prepare(&inst, None, TOL).unwrap();
        for _ in 0..5 {
            let alpha = rand::Rng::random_range(&mut rng, 0.0..10.0);
            let c1 = rand::Rng::random_range(&mut rng, 0.1..8.0);
            let c2 = rand::Rng::random_range(&mut rng, 0.1..8.0);
            let joint = joint_cosine_law(&ctx, alpha, c1, c2).unwrap();
            let table = case_table(ctx.instance(), ctx.zeta_f, alpha, c1, c2);
            let diff = (joint.entries() * 2.0 - &table).amax();
            assert!(diff <= 1e-9 * table.amax().max(1.0), "diff {diff}");
        }
    }
}

#[test]
fn split_entries_at_the_reference() {
    let mut rng = rng(16);
    let inst = planted_instance(&mut rng, 3, 2, 2, true, 1);
    let ctx = BaseCosineContext::prepare(&inst, None, TOL).unwrap();
    let (alpha, c1, c2) = (0.7, 1.3, 2.9);
    let split = build_split(&ctx, alpha, c1, c2).unwrap();
    let z = ctx.zeta_f;
    let (x1, y1) = (1, 5);
    assert!((2.0 * split.g[(x1, y1)] - (c1 * z + c2 * z - alpha)).abs() < 1e-12);
    // the x1 diagonal of A_X is 2 c1 ζ before the c2 ζ / 2 shift moves to G
    let a_x1 = split.cx[(x1, x1)] + c2 * z / 2.0;
    assert!((2.0 * a_x1 - 2.0 * c1 * z).abs() < 1e-12);
}

#[test]
fn g_tilde_examples() {
    // ζ = 2 instance: see the unit test of the same construction
    let d = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
    let f = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 1.0, 1.0]);
    let u = DVector::from_vec(vec![1.0, 1.0]);
    let inst = ProblemInstance::new(d.clone(), d, f, Some(u.clone()), Some(u), true).unwrap();
    let ctx = BaseCosineContext::prepare(&inst, None, TOL).unwrap();
    assert_eq!(ctx.zeta_f, 2.0);
    let g = build_g_tilde(&ctx, 1.0, 0.5);
    assert_eq!(g[0], 2f64.sqrt());
    assert_eq!(g[2], 1.0);

    // F(x1, y1) = 3 with c2 ζ = 1 gives √10; a duplicate of x1 gives √(c2 ζ)
    let dx = DMatrix::from_row_slice(3, 3, &[0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 1.0, 1.0, 0.0]);
    let dy = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
    let f = DMatrix::from_row_slice(3, 2, &[3.0, 1.0, 2.0, 2.0, 1.0, 0.5]);
    let inst = ProblemInstance::new(dx, dy, f, None, None, false).unwrap();
    let ctx = BaseCosineContext::prepare(&inst, None, TOL).unwrap();
    let c2 = 1.0 / ctx.zeta_f;
    let g = build_g_tilde(&ctx, 1.0, c2);
    assert!((g[1] - 1.0).abs() < 1e-15);
    assert!((g[3] - 10f64.sqrt()).abs() < 1e-14);
}

#[test]
fn h_tilde_interior_is_f_alpha() {
    let mut rng = rng(17);
    for origin in [true, false] {
        let inst = planted_instance(&mut rng, 4, 3, 2, origin, 2);
        let ctx = BaseCosineContext::prepare(&inst, None, TOL).unwrap();
        let h = build_h_tilde(&ctx, 1.7, 1.0, 2.0);
        let fa = build_f_alpha(ctx.instance(), &ctx.indexing, 1.7);
        let q = ctx.indexing.q();
        assert_eq!(h.view((1, 1), (q - 1, q - 1)).into_owned(), fa);
        assert_eq!(h[(0, 0)], 0.0);
        assert_eq!(h, h.transpose());
    }
}

#[test]
fn sufficient_condition_implies_joint_psd() {
    let mut rng = rng(18);
    let inst = planted_instance(&mut rng, 3, 3, 2, true, 1);
    let ctx = BaseCosineContext::prepare(&inst, None, TOL).unwrap();
    let opts = SearchOptions {
        criterion: SearchCriterion::SplitSummands,
        seed: (4096.0, 4096.0, 8194.0),
        ..Default::default()
    };
    let run = find_constants(&ctx, &opts).unwrap();
    assert!(run.last.split.verdict);
    assert!(run.last.joint.is_psd);
}

#[test]
fn embedding_examples() {
    let mut rng = rng(19);
    for origin in [true, false] {
        let inst = planted_instance(&mut rng, 2, 2, 2, origin, 1);
        let ctx = BaseCosineContext::prepare(&inst, None, TOL).unwrap();
        let search = find_constants(&ctx, &SearchOptions::default()).unwrap();
        let emb = embed_joint(&ctx, &search.constants, TOL, false).unwrap();
        assert_eq!(emb.coords.nrows(), if origin { 6 } else { 5 });
        let report = verify_embedding(&emb);
        assert!(report.passed);
        assert!(report.max_abs_error <= 1e-8);
        // z sits at the origin of the factorization frame
        assert!(emb.coords.row(0).amax() == 0.0);
        // coords · coordsᵀ reconstructs the joint matrix
        let gram = &emb.coords * emb.coords.transpose();
        assert!((gram - &emb.cosine_law).amax() <= 1e-7 * inf_norm(&emb.cosine_law));
    }
}

#[test]
fn within_x_distances_are_shifted() {
    let mut rng = rng(20);
    let inst = planted_instance(&mut rng, 4, 3, 2, true, 0);
    let ctx = BaseCosineContext::prepare(&inst, None, TOL).unwrap();
    let search = find_constants(&ctx, &SearchOptions::default()).unwrap();
    let emb = embed_joint(&ctx, &search.constants, TOL, true).unwrap();
    let eps = emb.epsilon();
    for i in 0..4 {
        for k in 0..4 {
            let (a, b) = (emb.row_of(Role::X(i)).unwrap(), emb.row_of(Role::X(k)).unwrap());
            let dist = (emb.coords.row(a) - emb.coords.row(b)).norm();
            let want = if i == k { 0.0 } else { (inst.dx()[(i, k)].powi(2) + eps).sqrt() };
            assert!((dist - want).abs() <= 1e-6 * want.max(1.0));
        }
    }
    assert_eq!(emb.coords.ncols(), emb.rank);
}

#[test]
fn swapped_instance_reports_caller_labels() {
    let mut rng = rng(21);
    let star = star_metric(&mut rng, 4);
    let dy = euclidean_distances(&random_points(&mut rng, 3, 2));
    let f = DMatrix::from_fn(4, 3, |i, j| 1.0 + (i + 2 * j) as f64 * 0.3);
    let inst = ProblemInstance::new(star, dy.clone(), f, None, None, false).unwrap();
    let ctx = BaseCosineContext::prepare(&inst, None, TOL).unwrap();
    assert!(ctx.selection.swapped());
    let search = find_constants(&ctx, &SearchOptions::default()).unwrap();
    let emb = embed_joint(&ctx, &search.constants, TOL, false).unwrap();
    assert_eq!(emb.labels[1], Role::X(0));
    assert_eq!(emb.labels[5], Role::Y(0));
    let eps = emb.epsilon();
    let (a, b) = (emb.row_of(Role::Y(0)).unwrap(), emb.row_of(Role::Y(2)).unwrap());
    let dist = (emb.coords.row(a) - emb.coords.row(b)).norm();
    assert!((dist - (dy[(0, 2)].powi(2) + eps).sqrt()).abs() < 1e-8);
    let (a, b) = (emb.row_of(Role::X(1)).unwrap(), emb.row_of(Role::Y(2)).unwrap());
    let dist = (emb.coords.row(a) - emb.coords.row(b)).norm();
    assert!((dist - (inst.f()[(1, 2)].powi(2) + eps).sqrt()).abs() < 1e-6 * dist);
}

#[test]
fn reference_triplet_is_checked_not_trusted() {
    let mut rng = rng(22);
    let inst = planted_instance(&mut rng, 5, 4, 2, true, 1);
    let ctx = BaseCosineContext::prepare(&inst, None, TOL).unwrap();
    let triple = reference_triplet(5, 4);
    // whatever the verdict, it must agree with a direct PSD test
    let joint = joint_cosine_law(&ctx, triple.2 * ctx.zeta_f, triple.0, triple.1).unwrap();
    let direct = is_psd(joint.entries(), TOL).unwrap().is_psd;
    match validate_constants(&ctx, triple, TOL, SearchCriterion::JointCosineLaw) {
        Ok(s) => assert!(direct && s.last.joint.is_psd),
        Err(Error::ConstantsRejected { .. }) => assert!(!direct),
        Err(e) => panic!("unexpected error {e}"),
    }
}

#[test]
fn factor_of_clearly_negative_matrix_is_refused() {
    let a = DMatrix::from_row_slice(3, 3, &[1.0, -1.0, -1.0, -1.0, 1.0, -1.0, -1.0, -1.0, 1.0]);
    match psd_factorize(&a, TOL) {
        Err(Error::NotPsd { min_eigenvalue, offending_discs }) => {
            assert!((min_eigenvalue + 1.0).abs() < 1e-12);
            assert!(!offending_discs.is_empty());
        }
        other => panic!("expected NotPsd, got {other:?}"),
    }
}
