//! Fixtures shared by the benchmarks in `benches/`.

use mdcon::{builtin, ProblemInstance, ProximalSetup};

/// The built-in problems with the accuracy each is benchmarked at.
pub fn md_cases() -> Vec<(ProblemInstance, f64)> {
    [
        ("p1_linear_ball", 0.05),
        ("p2_maxlin_box", 0.05),
        ("p3_strongly_convex", 0.1),
        ("p4_entropy_simplex", 0.05),
    ]
    .into_iter()
    .map(|(id, eps)| (builtin(id).expect("built-in problem"), eps))
    .collect()
}

/// One setup of each kind in dimension `n`, with an interior point and a
/// dual vector for mirror-step timings.
pub fn step_cases(n: usize) -> Vec<(&'static str, ProximalSetup, Vec<f64>, Vec<f64>)> {
    let y: Vec<f64> = (0..n).map(|i| ((i * 7 % 11) as f64 - 5.0) / 5.0).collect();
    vec![
        (
            "ball",
            ProximalSetup::euclidean_ball(n, 1.0).expect("valid ball"),
            vec![0.1; n],
            y.clone(),
        ),
        (
            "box",
            ProximalSetup::boxed(vec![-1.0; n], vec![1.0; n]).expect("valid box"),
            vec![0.1; n],
            y.clone(),
        ),
        (
            "simplex",
            ProximalSetup::entropy_simplex(n).expect("valid simplex"),
            vec![1.0 / n as f64; n],
            y,
        ),
    ]
}
