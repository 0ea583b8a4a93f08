mod common;

use common::{fuzz_dataset, FuzzShape};
use polarization::encode::{encode_dataset, encode_value, Code, QuestionSchema, RawTable};
use polarization::estimate::{
    bootstrap_rho, consistency_check, consistency_check_model, normality_check, pairwise_covariance, polarization_index,
    SurveyDataset,
};
use polarization::latent::{LatentDist, LatentModel};
use polarization::{Dataset, Matrix, NormKind};
use proptest::prelude::*;

/// Weighted pairwise-complete covariance by direct double loop over respondents.
fn oracle_covariance(d: &Dataset) -> Vec<Vec<f64>> {
    let p = d.p();
    let mut out = vec![vec![0.0; p]; p];
    for j in 0..p {
        for k in 0..p {
            let rows: Vec<usize> = (0..d.n()).filter(|&r| d.value(r, j).is_some() && d.value(r, k).is_some()).collect();
            if rows.len() < 2 {
                continue;
            }
            let w: f64 = rows.iter().map(|&r| d.weight(r)).sum();
            let mj = rows.iter().map(|&r| d.weight(r) * d.value(r, j).unwrap()).sum::<f64>() / w;
            let mk = rows.iter().map(|&r| d.weight(r) * d.value(r, k).unwrap()).sum::<f64>() / w;
            let mut s = 0.0;
            for &r in &rows {
                s += d.weight(r) * (d.value(r, j).unwrap() - mj) * (d.value(r, k).unwrap() - mk);
            }
            out[j][k] = s / w;
        }
    }
    out
}

fn complete_rows() -> impl Strategy<Value = Vec<Vec<f64>>> {
    (1..=5usize, 2..=40usize)
        .prop_flat_map(|(p, n)| prop::collection::vec(prop::collection::vec(-1.0..1.0f64, p), n))
}

fn reorder(d: &Dataset, order: &[usize]) -> Dataset {
    d.subset(order)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn complete_equal_weight_matches_textbook(rows in complete_rows()) {
        let d = SurveyDataset::from_complete(&rows).unwrap();
        let (n, p) = (rows.len() as f64, rows[0].len());
        let mean: Vec<f64> = (0..p).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n).collect();
        let sigma = pairwise_covariance(&d).unwrap().sigma;
        for j in 0..p {
            for k in 0..p {
                let mut s = 0.0;
                for r in &rows {
                    s += (r[j] - mean[j]) * (r[k] - mean[k]);
                }
                prop_assert!((sigma.get(j, k) - s / n).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn pairwise_matches_oracle(seed in any::<u64>()) {
        let d = fuzz_dataset(FuzzShape::random(seed), seed);
        let want = oracle_covariance(&d);
        let got = pairwise_covariance(&d).unwrap();
        for (j, row) in want.iter().enumerate() {
            for (k, &w) in row.iter().enumerate() {
                prop_assert!((got.sigma.get(j, k) - w).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn weight_scale_invariance(seed in any::<u64>(), alpha in 1e-3..1e3f64) {
        let d = fuzz_dataset(FuzzShape::random(seed), seed);
        let mut scaled = d.clone();
        scaled.rescale_weights(alpha).unwrap();
        let a = pairwise_covariance(&d).unwrap().sigma;
        let b = pairwise_covariance(&scaled).unwrap().sigma;
        prop_assert!(a.max_abs_diff(&b) < 1e-12);
    }

    #[test]
    fn row_permutation_invariance(seed in any::<u64>()) {
        let d = fuzz_dataset(FuzzShape::random(seed), seed);
        let mut order: Vec<usize> = (0..d.n()).collect();
        order.reverse();
        order.rotate_left((seed % d.n() as u64) as usize);
        let a = pairwise_covariance(&d).unwrap().sigma;
        let b = pairwise_covariance(&reorder(&d, &order)).unwrap().sigma;
        prop_assert!(a.max_abs_diff(&b) < 1e-12);
    }

    #[test]
    fn index_identities(seed in any::<u64>()) {
        let d = fuzz_dataset(FuzzShape::random(seed), seed);
        let cov = pairwise_covariance(&d).unwrap();
        prop_assume!(cov.sigma.trace() > 0.0);
        let ix = polarization_index(&cov).unwrap();
        prop_assert!((ix.rho - ix.trace * ix.concentration).abs() < 1e-9);
        for j in 0..d.p() {
            prop_assert!(cov.sigma.get(j, j) <= 1.0);
        }
    }

    #[test]
    fn encoded_values_are_bounded(k in 2..=9usize, i in 0..9usize) {
        let s = QuestionSchema::new("q", 1..=k as i64);
        let v: Option<f64> = encode_value(&s, Some(&(i + 1).to_string()));
        match v {
            Some(x) => prop_assert!((-1.0..=1.0).contains(&x) && i < k),
            None => prop_assert!(i >= k),
        }
        prop_assert_eq!(encode_value::<f64>(&s, Some("1")), Some(-1.0));
        prop_assert_eq!(encode_value::<f64>(&s, Some(&k.to_string())), Some(1.0));
    }

    #[test]
    fn reversing_a_scale_flips_signs_only(codes in prop::collection::vec(prop::collection::vec(prop::option::of(1..=5i64), 3), 3..40)) {
        let forward = vec![
            QuestionSchema::new("a", 1..=5i64),
            QuestionSchema::new("b", 1..=3i64),
            QuestionSchema::new("c", 1..=2i64),
        ];
        let mut reversed = forward.clone();
        reversed[0].ordered_codes.reverse();
        let levels = [5, 3, 2];
        let table = RawTable {
            columns: vec!["a".into(), "b".into(), "c".into()],
            rows: codes
                .iter()
                .map(|r| r.iter().zip(levels).map(|(c, k)| c.map(|c| (1 + (c - 1) % k).to_string())).collect())
                .collect(),
        };
        let enc_f = encode_dataset::<f64>(&forward, &table).unwrap();
        let enc_r = encode_dataset::<f64>(&reversed, &table).unwrap();
        for (a, b) in enc_f.values.iter().zip(&enc_r.values) {
            prop_assert_eq!(a[0].map(|x| -x), b[0]);
        }
        let build = |values: &Vec<Vec<Option<f64>>>| {
            let mut d = SurveyDataset::new(enc_f.questions.clone());
            for row in values {
                d.push_row(row, 1.0, 2000, &[]).unwrap();
            }
            d
        };
        let (df, dr) = (build(&enc_f.values), build(&enc_r.values));
        let (sf, sr) = (pairwise_covariance(&df).unwrap().sigma, pairwise_covariance(&dr).unwrap().sigma);
        for j in 0..3 {
            for k in 0..3 {
                let sign = if (j == 0) != (k == 0) { -1.0 } else { 1.0 };
                prop_assert!((sf.get(j, k) - sign * sr.get(j, k)).abs() < 1e-12);
            }
        }
        for kind in NormKind::ALL {
            prop_assert!((sf.norm(kind).unwrap() - sr.norm(kind).unwrap()).abs() < 1e-9);
        }
    }
}

#[test]
fn excluded_codes_are_missing() {
    let s = QuestionSchema::new("q", 1..=4i64).with_excluded([Code::from(5)]);
    assert_eq!(encode_value::<f64>(&s, Some("5")), None);
    assert_eq!(encode_value::<f64>(&s, None), None);
}

#[test]
fn half_at_each_extreme_has_unit_variance() {
    let rows: Vec<Vec<f64>> = (0..100).map(|i| vec![if i < 50 { -1.0 } else { 1.0 }]).collect();
    let d = SurveyDataset::from_complete(&rows).unwrap();
    assert_eq!(pairwise_covariance(&d).unwrap().sigma.get(0, 0), 1.0);
}

#[test]
fn bootstrap_is_bit_identical() {
    let m = LatentModel::gaussian(Matrix::diag(&[2.0, 1.0])).unwrap();
    let d = m.sample(300, 1).unwrap();
    let a = bootstrap_rho(&d, 200, 0.95, 42).unwrap();
    let b = bootstrap_rho(&d, 200, 0.95, 42).unwrap();
    assert_eq!(a, b);
    assert!(a.replicates.iter().zip(&b.replicates).all(|(x, y)| x.to_bits() == y.to_bits()));
    assert_ne!(a.replicates, bootstrap_rho(&d, 200, 0.95, 43).unwrap().replicates);
    assert!(bootstrap_rho(&d, 0, 0.95, 42).is_err());
}

#[test]
fn bootstrap_interval_covers_truth() {
    let m = LatentModel::gaussian(Matrix::diag(&[2.0, 1.0])).unwrap();
    let covered = (0..100u64)
        .filter(|&t| {
            let d = m.sample(5000, 1000 + t).unwrap();
            bootstrap_rho(&d, 200, 0.95, t).unwrap().contains(2.0)
        })
        .count();
    assert!(covered >= 90, "coverage {covered}/100");
}

#[test]
fn consistency_examples() {
    let rows = consistency_check(&Matrix::diag(&[2.0, 1.0]), &[100, 400, 1600, 6400], 200, 7).unwrap();
    assert!(rows.windows(2).all(|w| w[1].mean_abs_error < w[0].mean_abs_error));
    assert!(rows[3].mean_abs_error <= 0.1);

    let rows = consistency_check(&Matrix::identity(2), &[6400], 200, 7).unwrap();
    assert!((rows[0].mean_estimate - 1.0).abs() < 0.15);
    assert!(rows[0].mean_estimate > 1.0);

    assert!(consistency_check(&Matrix::identity(2), &[100], 0, 7).unwrap().is_empty());
}

#[test]
fn consistency_with_rademacher_latent() {
    let m = LatentModel::new(1.0, vec![1.0, 0.0], Matrix::identity(2))
        .unwrap()
        .with_dists(LatentDist::Rademacher, Default::default());
    let rows = consistency_check_model(&m, &[100, 400, 1600, 6400], 200, 3).unwrap();
    assert!(rows.windows(2).all(|w| w[1].mean_abs_error < w[0].mean_abs_error));
    assert!(rows[3].mean_abs_error <= 0.1);
}

#[test]
fn normality_second_example() {
    let r = normality_check(&Matrix::diag(&[4.0, 1.0]), 2000, 2000, 5).unwrap();
    assert!((r.empirical_variance[0] / 32.0 - 1.0).abs() < 0.15, "{:?}", r.empirical_variance);
    assert!(normality_check(&Matrix::identity(2), 2000, 10, 5).is_err());
}
