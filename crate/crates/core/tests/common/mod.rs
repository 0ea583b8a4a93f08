#![allow(dead_code)]

use polarization::estimate::SurveyDataset;
use polarization::rng::stream_rng;
use polarization::{Dataset, Matrix};
use rand::Rng;

/// Symmetric matrix from its row-major upper triangle.
pub fn sym_from_upper(p: usize, upper: &[f64]) -> Matrix {
    let idx = |j: usize, k: usize| j * p - j * (j + 1) / 2 + k;
    Matrix::from_fn(p, |j, k| upper[idx(j, k)])
}

/// `B B'` for a `p x p` factor given row-major.
pub fn gram(p: usize, b: &[f64]) -> Matrix {
    Matrix::from_fn(p, |j, k| (0..p).map(|l| b[j * p + l] * b[k * p + l]).sum())
}

/// Brute-force determinant by cofactor expansion.
fn det(a: &[Vec<f64>]) -> f64 {
    let n = a.len();
    if n == 0 {
        return 1.0;
    }
    (0..n)
        .map(|c| {
            let minor: Vec<Vec<f64>> = a[1..].iter().map(|r| r.iter().enumerate().filter(|&(k, _)| k != c).map(|(_, &v)| v).collect()).collect();
            let sign = if c % 2 == 0 { 1.0 } else { -1.0 };
            sign * a[0][c] * det(&minor)
        })
        .sum()
}

/// `det(t I - m)`.
pub fn charpoly(m: &Matrix, t: f64) -> f64 {
    let p = m.dim();
    let a: Vec<Vec<f64>> = (0..p).map(|j| (0..p).map(|k| if j == k { t - m.get(j, k) } else { -m.get(j, k) }).collect()).collect();
    det(&a)
}

fn bisect(f: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let (flo, fhi) = (f(lo), f(hi));
    if flo == 0.0 {
        return lo;
    }
    if fhi == 0.0 {
        return hi;
    }
    if flo.signum() == fhi.signum() {
        // touching root at a critical point
        return if flo.abs() < fhi.abs() { lo } else { hi };
    }
    let rising = fhi > flo;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if (fm > 0.0) == rising {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Eigenvalues of a 1x1, 2x2 or 3x3 symmetric matrix as roots of its
/// characteristic polynomial, found by bisection between its critical points.
/// Descending.
pub fn charpoly_eigenvalues(m: &Matrix) -> Vec<f64> {
    let p = m.dim();
    let r = (0..p).map(|j| m.row(j).iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max) + 1.0;
    let f = |t: f64| charpoly(m, t);
    let mut roots = match p {
        1 => vec![m.get(0, 0)],
        2 => {
            let c = 0.5 * (m.get(0, 0) + m.get(1, 1));
            vec![bisect(&f, -r, c), bisect(&f, c, r)]
        }
        3 => {
            // f'(t) = 3t^2 - 2 tr t + c1
            let tr = m.get(0, 0) + m.get(1, 1) + m.get(2, 2);
            let c1 = m.get(0, 0) * m.get(1, 1) + m.get(0, 0) * m.get(2, 2) + m.get(1, 1) * m.get(2, 2)
                - m.get(0, 1).powi(2)
                - m.get(0, 2).powi(2)
                - m.get(1, 2).powi(2);
            let disc = (4.0 * tr * tr - 12.0 * c1).max(0.0).sqrt();
            let (t1, t2) = ((2.0 * tr - disc) / 6.0, (2.0 * tr + disc) / 6.0);
            vec![bisect(&f, -r, t1), bisect(&f, t1, t2), bisect(&f, t2, r)]
        }
        _ => panic!("oracle covers p <= 3"),
    };
    roots.sort_by(|a, b| b.partial_cmp(a).unwrap());
    roots
}

/// Generator settings for fuzzed grouped survey data.
#[derive(Clone, Copy, Debug)]
pub struct FuzzShape {
    pub n: usize,
    pub p: usize,
    pub groups: usize,
    pub missingness: f64,
}

impl FuzzShape {
    /// Draws `n <= 200`, `p <= 6`, at most 4 groups and missingness up to 30%.
    pub fn random(seed: u64) -> Self {
        let mut rng = stream_rng(seed, u64::MAX);
        let groups = rng.random_range(1..=4);
        FuzzShape {
            n: rng.random_range((2 * groups).max(4)..=200),
            p: rng.random_range(1..=6),
            groups,
            missingness: rng.random_range(0.0..=0.3),
        }
    }
}

/// Mixed ordinal responses in `[-1, 1]` with group-specific offsets and
/// random positive weights; every group keeps at least two members.
pub fn fuzz_dataset(shape: FuzzShape, seed: u64) -> Dataset {
    let mut rng = stream_rng(seed, 0);
    let FuzzShape { n, p, groups, missingness } = shape;
    let questions = (0..p).map(|j| format!("q{j}")).collect();
    let mut d = SurveyDataset::with_group_vars(questions, vec!["g".into()]);
    let scales: Vec<usize> = (0..p).map(|_| [2, 3, 4, 5, 7][rng.random_range(0..5)]).collect();
    let offsets: Vec<Vec<f64>> = (0..groups).map(|_| (0..p).map(|_| rng.random_range(-0.6..0.6)).collect()).collect();
    let labels: Vec<String> = (0..groups).map(|g| format!("g{g}")).collect();
    for i in 0..n {
        let g = if i < 2 * groups { i % groups } else { rng.random_range(0..groups) };
        let factor: f64 = rng.random_range(-1.0..1.0);
        let row: Vec<Option<f64>> = (0..p)
            .map(|j| {
                if rng.random::<f64>() < missingness {
                    return None;
                }
                let x = (offsets[g][j] + 0.5 * factor + rng.random_range(-0.5..0.5)).clamp(-1.0, 1.0);
                let k = scales[j] as f64 - 1.0;
                Some(-1.0 + 2.0 * ((x + 1.0) / 2.0 * k).round() / k)
            })
            .collect();
        d.push_row(&row, rng.random_range(0.2..3.0), 2000, &[Some(&labels[g])]).unwrap();
    }
    d
}
