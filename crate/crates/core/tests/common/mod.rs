//! Oracles shared by the integration tests. They are written independently
//! of the library code they check.

#![allow(dead_code)]

/// `counts[j][s]`: number of `j`-subsets of the ranks `1..=n` summing to `s`,
/// built by the include/exclude recurrence one rank at a time.
pub fn rank_sum_counts(n: usize, k: usize) -> Vec<Vec<u64>> {
    let max_sum = n * (n + 1) / 2;
    let mut counts = vec![vec![0u64; max_sum + 1]; k + 1];
    counts[0][0] = 1;
    for rank in 1..=n {
        for j in (1..=k.min(rank)).rev() {
            for s in (rank..=max_sum).rev() {
                counts[j][s] += counts[j - 1][s - rank];
            }
        }
    }
    counts
}

/// Exact two-sided Mann-Whitney p for tie-free samples: the share of rank
/// assignments whose `min(U_a, U_b)` is at most `u_min`.
pub fn exact_mwu_p(u_min: f64, n_a: usize, n_b: usize) -> f64 {
    let counts = rank_sum_counts(n_a + n_b, n_a);
    let offset = n_a * (n_a + 1) / 2;
    let (mut extreme, mut total) = (0u64, 0u64);
    for (sum, &c) in counts[n_a].iter().enumerate() {
        if c == 0 {
            continue;
        }
        let u_a = (sum - offset) as f64;
        let u_b = (n_a * n_b) as f64 - u_a;
        total += c;
        if u_a.min(u_b) <= u_min {
            extreme += c;
        }
    }
    extreme as f64 / total as f64
}

/// Every `k`-subset of `0..n`.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if n < k {
        return vec![];
    }
    let mut with = subsets(n - 1, k - 1);
    for s in &mut with {
        s.push(n - 1);
    }
    with.extend(subsets(n - 1, k));
    with
}

/// Splits the values `0..2n` into the chosen indices and the rest.
pub fn split_ranks(n_total: usize, chosen: &[usize]) -> (Vec<f64>, Vec<f64>) {
    let a = (0..n_total)
        .filter(|i| chosen.contains(i))
        .map(|i| i as f64)
        .collect();
    let b = (0..n_total)
        .filter(|i| !chosen.contains(i))
        .map(|i| i as f64)
        .collect();
    (a, b)
}

/// Andrew's monotone chain; counter-clockwise, no collinear points.
pub fn convex_hull(mut points: Vec<[f64; 2]>) -> Vec<[f64; 2]> {
    points.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    points.dedup();
    let cross = |o: [f64; 2], a: [f64; 2], b: [f64; 2]| {
        (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
    };
    let mut lower: Vec<[f64; 2]> = Vec::new();
    for &p in &points {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<[f64; 2]> = Vec::new();
    for &p in points.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b))
}

fn adaptive(f: &dyn Fn(f64) -> f64, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (left, right) = (simpson(f, a, m), simpson(f, m, b));
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    adaptive(f, a, m, left, tol / 2.0, depth - 1) + adaptive(f, m, b, right, tol / 2.0, depth - 1)
}

/// Adaptive Simpson quadrature of `f` over `[a, b]` to a relative tolerance.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> f64 {
    let whole = simpson(f, a, b);
    let tol = (rel_tol * whole.abs()).max(1e-300);
    adaptive(f, a, b, whole, tol, 48)
}
