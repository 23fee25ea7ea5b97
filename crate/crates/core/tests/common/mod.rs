//! Independent reference implementations used as test oracles.
#![allow(dead_code)]

/// Edit distance straight from the recursive definition, memoized on
/// suffix lengths (inputs up to 15 symbols).
pub fn recursive_edit_distance(a: &[u8], b: &[u8]) -> usize {
    fn go(a: &[u8], b: &[u8], memo: &mut [[u8; 16]; 16]) -> usize {
        if a.is_empty() {
            return b.len();
        }
        if b.is_empty() {
            return a.len();
        }
        let cached = memo[a.len()][b.len()];
        if cached != u8::MAX {
            return cached as usize;
        }
        let sub = go(&a[1..], &b[1..], memo) + usize::from(a[0] != b[0]);
        let del = go(&a[1..], b, memo) + 1;
        let ins = go(a, &b[1..], memo) + 1;
        let d = sub.min(del).min(ins);
        memo[a.len()][b.len()] = d as u8;
        d
    }
    assert!(a.len() < 16 && b.len() < 16);
    go(a, b, &mut [[u8::MAX; 16]; 16])
}

/// Every sequence over `alphabet` symbols with length `0..=max_len`.
pub fn all_sequences(alphabet: u8, max_len: usize) -> Vec<Vec<u8>> {
    let mut out = vec![Vec::new()];
    let mut frontier = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for s in &frontier {
            for c in 0..alphabet {
                let mut t: Vec<u8> = s.clone();
                t.push(c);
                next.push(t);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// EER by evaluating FRR/FAR from scratch at every candidate threshold.
///
/// Candidates are the lowest score, every midpoint between adjacent
/// distinct scores and one point above the top score. The result is the
/// linear interpolation between the last threshold with FAR > FRR and the
/// first with FRR >= FAR.
pub fn brute_force_eer(scores: &[(f64, bool)]) -> f64 {
    let mut distinct: Vec<f64> = scores.iter().map(|s| s.0).collect();
    distinct.sort_by(|a, b| a.partial_cmp(b).unwrap());
    distinct.dedup();
    let mut thresholds = vec![distinct[0]];
    for w in distinct.windows(2) {
        thresholds.push((w[0] + w[1]) / 2.0);
    }
    let top = *distinct.last().unwrap();
    thresholds.push(top + top.abs().max(1.0));

    let n_t = scores.iter().filter(|s| s.1).count() as f64;
    let n_n = scores.iter().filter(|s| !s.1).count() as f64;
    let rates = |t: f64| {
        let frr = scores.iter().filter(|s| s.1 && s.0 < t).count() as f64 / n_t;
        let far = scores.iter().filter(|s| !s.1 && s.0 >= t).count() as f64 / n_n;
        (frr, far)
    };
    let curve: Vec<(f64, f64)> = thresholds.iter().map(|&t| rates(t)).collect();
    let k = curve.iter().position(|(frr, far)| frr >= far).unwrap();
    if k == 0 {
        return curve[0].0;
    }
    let (f0, a0) = curve[k - 1];
    let (f1, a1) = curve[k];
    let (g0, g1) = (a0 - f0, a1 - f1);
    let alpha = if g0 - g1 > 0.0 { g0 / (g0 - g1) } else { 1.0 };
    f0 + alpha * (f1 - f0)
}

/// Log-domain Gaussian KDE evaluated term by term and mapped back with
/// the change of variable, renormalized by the trapezoid rule on `grid`.
pub fn direct_log_kde(values: &[f64], grid: &[f64], h: f64) -> Vec<f64> {
    let n = values.len() as f64;
    let raw: Vec<f64> = grid
        .iter()
        .map(|&w| {
            let mut f_y = 0.0;
            for &v in values {
                let z = (w.ln() - v.ln()) / h;
                f_y += (-0.5 * z * z).exp() / (h * (2.0 * std::f64::consts::PI).sqrt());
            }
            f_y / n / w
        })
        .collect();
    let mut area = 0.0;
    for i in 1..grid.len() {
        area += (grid[i] - grid[i - 1]) * (raw[i] + raw[i - 1]) / 2.0;
    }
    raw.iter().map(|f| f / area).collect()
}

/// `n` log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

/// Reference values produced by `scipy.stats.ttest_rel(a, b)` on the
/// datasets from [`ttest_dataset`], as `(t, p)`.
pub const TTEST_REFERENCE: [(f64, f64); 5] = [
    (0.08968219133339296, 0.9305038550665401),
    (2.3946843788558616, 0.027102946413342675),
    (6.389704527930404, 5.500181612707006e-07),
    (10.874274400672515, 2.2612052557976081e-13),
    (17.034745232090486, 3.1714954683202737e-22),
];

/// Fixture `k` (0..5) of sizes 10, 20, 30, 40, 50.
pub fn ttest_dataset(k: usize) -> (Vec<f64>, Vec<f64>) {
    let n = [10, 20, 30, 40, 50][k];
    let a: Vec<f64> = (0..n).map(|i| ((i * 37 + 13 * k + 5) % 101) as f64 / 100.0).collect();
    let b: Vec<f64> = a
        .iter()
        .enumerate()
        .map(|(i, &x)| x - 0.02 * k as f64 + (((i * 53 + 7 * k) % 23) as f64 - 11.0) / 200.0)
        .collect();
    (a, b)
}

/// Relative-or-absolute closeness.
pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}
