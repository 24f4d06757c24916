//! Independent oracles and random instance generators shared by the
//! integration tests. Nothing here calls into the construction being
//! tested except to build a `ProblemInstance`.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use qembed::ProblemInstance;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_points(rng: &mut impl Rng, k: usize, dim: usize) -> Vec<Vec<f64>> {
    (0..k).map(|_| (0..dim).map(|_| rng.random_range(-3.0..3.0)).collect()).collect()
}

pub fn euclidean_distances(points: &[Vec<f64>]) -> DMatrix<f64> {
    let k = points.len();
    DMatrix::from_fn(k, k, |i, j| {
        points[i].iter().zip(&points[j]).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
    })
}

/// Hub at distance `r` from every leaf, leaves at `s · 2r` from one another
/// with `s ∈ [0.95, 1]`. Three or more leaves cannot sit on a sphere of
/// radius `r` that far apart, so the set is not Euclidean.
pub fn star_metric(rng: &mut impl Rng, k: usize) -> DMatrix<f64> {
    assert!(k >= 4, "a star needs at least three leaves");
    let r = rng.random_range(0.5..2.0);
    let mut d = DMatrix::zeros(k, k);
    for i in 0..k {
        for j in i + 1..k {
            let v = if i == 0 { r } else { rng.random_range(0.95..=1.0) * 2.0 * r };
            d[(i, j)] = v;
            d[(j, i)] = v;
        }
    }
    d
}

/// Shortest-path metric of a complete graph with random weights.
pub fn random_metric(rng: &mut impl Rng, k: usize) -> DMatrix<f64> {
    let mut d = DMatrix::zeros(k, k);
    for i in 0..k {
        for j in i + 1..k {
            let w = rng.random_range(0.2..3.0);
            d[(i, j)] = w;
            d[(j, i)] = w;
        }
    }
    for via in 0..k {
        for i in 0..k {
            for j in 0..k {
                let through = d[(i, via)] + d[(via, j)];
                if through < d[(i, j)] {
                    d[(i, j)] = through;
                }
            }
        }
    }
    d
}

fn positive_vector(rng: &mut impl Rng, k: usize) -> DVector<f64> {
    let mut u = DVector::from_fn(k, |_, _| rng.random_range(0.0..3.0));
    u[0] += 0.1;
    u
}

/// A metric for `Y` cycling through planted, shortest-path and star
/// constructions, so both Euclidean and non-Euclidean sets occur.
pub fn any_metric(rng: &mut impl Rng, k: usize, kind: usize) -> DMatrix<f64> {
    match kind % 3 {
        0 => euclidean_distances(&random_points(rng, k, 3)),
        1 => random_metric(rng, k),
        _ if k >= 4 => star_metric(rng, k),
        _ => random_metric(rng, k),
    }
}

/// `X` planted in `ℝ^dim`, `Y` from [`any_metric`], random nonnegative
/// `F` (with some exact zeros) and origin proximities.
pub fn planted_instance(
    rng: &mut impl Rng,
    m: usize,
    n: usize,
    dim: usize,
    origin: bool,
    y_kind: usize,
) -> ProblemInstance {
    let dx = euclidean_distances(&random_points(rng, m, dim));
    let dy = any_metric(rng, n, y_kind);
    let mut f =
        DMatrix::from_fn(m, n, |_, _| if rng.random_bool(0.15) { 0.0 } else { rng.random_range(0.0..4.0) });
    f[(0, 0)] += 0.5;
    let ux = positive_vector(rng, m);
    let uy = positive_vector(rng, n);
    ProblemInstance::new(dx, dy, f, Some(ux), Some(uy), origin).expect("generated instance is valid")
}

/// Roles by position, written out directly from the layout
/// `z, x1..xM, o, y1..yN`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Slot {
    Z,
    X(usize),
    O,
    Y(usize),
}

pub fn slot(q: usize, m: usize, origin: bool) -> Slot {
    let o = usize::from(origin);
    if q == 0 {
        Slot::Z
    } else if q <= m {
        Slot::X(q - 1)
    } else if origin && q == m + 1 {
        Slot::O
    } else {
        Slot::Y(q - m - 1 - o)
    }
}

/// Twice the joint cosine-law entry, case by case, for an instance whose
/// first `X` point is the reference. The `(o, o)` entry, missing from the
/// case list, is `2 g̃(o)² = 2 c2 ζ`.
pub fn case_table(inst: &ProblemInstance, zeta: f64, alpha: f64, c1: f64, c2: f64) -> DMatrix<f64> {
    let (m, n, origin) = (inst.m(), inst.n(), inst.include_origin());
    let q = m + n + 1 + usize::from(origin);
    let dx = |a: usize, b: usize| inst.dx()[(a, b)];
    let dy = |a: usize, b: usize| inst.dy()[(a, b)];
    let f = |a: usize, b: usize| inst.f()[(a, b)];
    let ux = |a: usize| inst.ux().unwrap()[a];
    let uy = |a: usize| inst.uy().unwrap()[a];
    let sq = |v: f64| v * v;
    let (c1z, c2z) = (c1 * zeta, c2 * zeta);

    let entry = |a: Slot, b: Slot| -> f64 {
        use Slot::*;
        match (a, b) {
            (Z, _) | (_, Z) => 0.0,
            (X(0), X(0)) => 2.0 * c1z,
            (X(0), X(_)) | (X(_), X(0)) => c1z + c2z - alpha,
            (X(i), X(k)) if i == k => 2.0 * c2z + 2.0 * sq(dx(i, 0)),
            (X(i), X(k)) => 2.0 * c2z - alpha + sq(dx(i, 0)) + sq(dx(k, 0)) - sq(dx(i, k)),
            (O, O) => 2.0 * c2z,
            (O, X(0)) | (X(0), O) => c1z + c2z - alpha - sq(ux(0)),
            (O, X(i)) | (X(i), O) => 2.0 * c2z - alpha + sq(dx(i, 0)) - sq(ux(i)),
            (O, Y(j)) | (Y(j), O) => 2.0 * c2z - alpha + sq(f(0, j)) - sq(uy(j)),
            (Y(j), Y(l)) if j == l => 2.0 * c2z + 2.0 * sq(f(0, j)),
            (Y(j), Y(l)) => 2.0 * c2z - alpha + sq(f(0, j)) + sq(f(0, l)) - sq(dy(j, l)),
            (X(0), Y(_)) | (Y(_), X(0)) => c1z + c2z - alpha,
            (X(i), Y(j)) | (Y(j), X(i)) => 2.0 * c2z - alpha + sq(dx(i, 0)) + sq(f(0, j)) - sq(f(i, j)),
        }
    };
    DMatrix::from_fn(q, q, |a, b| entry(slot(a, m, origin), slot(b, m, origin)))
}

/// `ζ_f` by a plain double loop over the cross pairs, from raw values.
pub fn brute_force_zeta(inst: &ProblemInstance) -> f64 {
    let (m, n) = (inst.m(), inst.n());
    let cross = |i: usize, j: usize| {
        let (d, f1, f) = (inst.dx()[(i, 0)], inst.f()[(0, j)], inst.f()[(i, j)]);
        ((d * d + f1 * f1 - f * f) / 2.0).abs()
    };
    let mut best = 0.0f64;
    for i in 0..m {
        best = best.max((0..n).map(|j| cross(i, j)).sum());
    }
    for j in 0..n {
        best = best.max((0..m).map(|i| cross(i, j)).sum());
    }
    best
}

/// Random symmetric matrix with entries in `[-5, 5]`.
pub fn random_symmetric(rng: &mut impl Rng, k: usize) -> DMatrix<f64> {
    let mut a = DMatrix::zeros(k, k);
    for i in 0..k {
        for j in i..k {
            let v = rng.random_range(-5.0..=5.0);
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
    a
}

/// `B·Bᵀ` for a random `k × r` matrix `B`.
pub fn random_gram(rng: &mut impl Rng, k: usize, r: usize) -> DMatrix<f64> {
    let b = DMatrix::from_fn(k, r, |_, _| rng.random_range(-2.0..2.0));
    &b * b.transpose()
}

/// Indices of the strict upper triangle sorted by value, ties broken by
/// position.
pub fn sorted_pairs(d: &DMatrix<f64>) -> Vec<(usize, usize)> {
    let k = d.nrows();
    let mut pairs: Vec<(usize, usize)> = (0..k).flat_map(|i| (i + 1..k).map(move |j| (i, j))).collect();
    pairs.sort_by(|&(a, b), &(c, e)| d[(a, b)].total_cmp(&d[(c, e)]).then((a, b).cmp(&(c, e))));
    pairs
}

/// Whether `candidate` orders the upper-triangle pairs the way `reference`
/// does, modulo ties in `reference`: every pair in a tie group of
/// `reference` must sit strictly below every pair of the next group.
pub fn same_ranking(reference: &DMatrix<f64>, candidate: &DMatrix<f64>) -> bool {
    let order = sorted_pairs(reference);
    let mut groups: Vec<Vec<(usize, usize)>> = Vec::new();
    for p in order {
        match groups.last_mut() {
            Some(g) if reference[g[0]] == reference[p] => g.push(p),
            _ => groups.push(vec![p]),
        }
    }
    groups.windows(2).all(|w| {
        let below = w[0].iter().map(|&p| candidate[p]).fold(f64::NEG_INFINITY, f64::max);
        let above = w[1].iter().map(|&p| candidate[p]).fold(f64::INFINITY, f64::min);
        below < above
    })
}
