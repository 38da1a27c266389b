use nomarch_core::{compute_rss, evaluate_indices, Matrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random(rng: &mut ChaCha8Rng, r: usize, c: usize) -> Matrix {
    Matrix::from_vec(r, c, (0..r * c).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
}

#[test]
fn compute_rss_matches_naive_loops() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..40 {
        let (n, m, k) = (rng.random_range(1..20), rng.random_range(1..10), rng.random_range(1..5));
        let x = random(&mut rng, n, m);
        let alpha = random(&mut rng, n, k);
        let z = random(&mut rng, k, m);
        let mut naive = 0.0;
        for i in 0..n {
            for d in 0..m {
                let mut fit = 0.0;
                for j in 0..k {
                    fit += alpha[(i, j)] * z[(j, d)];
                }
                naive += (x[(i, d)] - fit) * (x[(i, d)] - fit);
            }
        }
        let got = compute_rss(&x, &alpha, &z).unwrap();
        assert!((got - naive).abs() <= 1e-12 * (1.0 + naive), "{got} vs {naive}");
    }
}

#[test]
fn single_archetypoid_is_total_squared_distance() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..20 {
        let (n, m) = (rng.random_range(1..25), rng.random_range(1..9));
        let x = random(&mut rng, n, m);
        let idx = rng.random_range(0..n);
        let (alpha, rss) = evaluate_indices(&x, &[idx]).unwrap();
        let brute: f64 = (0..n).map(|i| (0..m).map(|d| (x[(i, d)] - x[(idx, d)]).powi(2)).sum::<f64>()).sum();
        assert!((rss - brute).abs() <= 1e-12 * (1.0 + brute));
        assert!(alpha.iter_rows().all(|r| r == [1.0]));
    }
}
