//! Spatial weights and global/local Moran's I.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geo::{distance_unchecked, nearest, Location, SpatialDataset};

pub const DEFAULT_KNN: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum WeightsScheme {
    KnnRowStandardized(usize),
    /// All points within distance `r`, row-standardized.
    DistanceBand(f64),
}

impl Default for WeightsScheme {
    fn default() -> Self {
        Self::KnnRowStandardized(DEFAULT_KNN)
    }
}

/// Sparse weights; each row is sorted by neighbor index and sums to 1
/// unless the point has no neighbors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpatialWeightsMatrix {
    n: usize,
    rows: Vec<Vec<(usize, f64)>>,
    scheme: WeightsScheme,
    isolated: Vec<usize>,
}

impl SpatialWeightsMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    pub fn scheme(&self) -> WeightsScheme {
        self.scheme
    }

    pub fn isolated(&self) -> &[usize] {
        &self.isolated
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.rows[i]
            .binary_search_by_key(&j, |e| e.0)
            .map_or(0.0, |p| self.rows[i][p].1)
    }

    fn s0(&self) -> f64 {
        self.rows.iter().flatten().map(|e| e.1).sum()
    }
}

pub fn build_spatial_weights(
    ds: &SpatialDataset,
    scheme: WeightsScheme,
) -> Result<SpatialWeightsMatrix> {
    build_weights_for_locations(&ds.locations(), scheme)
}

pub fn build_weights_for_locations(
    locs: &[Location],
    scheme: WeightsScheme,
) -> Result<SpatialWeightsMatrix> {
    let n = locs.len();
    if n < 2 {
        return Err(Error::InvalidArgument(
            "spatial weights need at least 2 points".into(),
        ));
    }
    if locs.iter().any(|l| l.crs != locs[0].crs) {
        return Err(Error::InvalidArgument(
            "locations mix coordinate systems".into(),
        ));
    }
    let raw: Vec<Vec<usize>> = match scheme {
        WeightsScheme::KnnRowStandardized(k) => {
            if k == 0 || k >= n {
                return Err(Error::InvalidArgument(format!(
                    "k must lie in [1, {}], got {k}",
                    n - 1
                )));
            }
            (0..n)
                .map(|i| {
                    nearest(locs, &locs[i], k, Some(i))
                        .into_iter()
                        .map(|(j, _)| j)
                        .collect()
                })
                .collect()
        }
        WeightsScheme::DistanceBand(r) => {
            if !(r > 0.0) || !r.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "band radius must be positive, got {r}"
                )));
            }
            (0..n)
                .map(|i| {
                    (0..n)
                        .filter(|&j| j != i && distance_unchecked(&locs[i], &locs[j]) <= r)
                        .collect()
                })
                .collect()
        }
    };
    let mut isolated = Vec::new();
    let rows = raw
        .into_iter()
        .enumerate()
        .map(|(i, mut js)| {
            if js.is_empty() {
                isolated.push(i);
            }
            js.sort_unstable();
            let w = 1.0 / js.len() as f64;
            js.into_iter().map(|j| (j, w)).collect()
        })
        .collect();
    if !isolated.is_empty() {
        log::warn!(
            "{} points have no neighbors under {:?}",
            isolated.len(),
            scheme
        );
    }
    Ok(SpatialWeightsMatrix {
        n,
        rows,
        scheme,
        isolated,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MoranResult {
    pub i: f64,
    pub expected_i: f64,
    /// Standard deviation of I under the normality null.
    pub null_sd: f64,
    pub z_score: f64,
}

fn centered(values: &[f64], w: &SpatialWeightsMatrix) -> Result<(Vec<f64>, f64)> {
    if values.len() != w.n {
        return Err(Error::LengthMismatch {
            left: values.len(),
            right: w.n,
        });
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("values must be finite".into()));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let z: Vec<f64> = values.iter().map(|v| v - mean).collect();
    let ss: f64 = z.iter().map(|d| d * d).sum();
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if ss <= n * (1e-12 * scale).powi(2) {
        return Err(Error::ZeroVariance);
    }
    Ok((z, ss))
}

pub fn morans_i(values: &[f64], w: &SpatialWeightsMatrix) -> Result<MoranResult> {
    let (z, ss) = centered(values, w)?;
    let n = w.n as f64;
    let s0 = w.s0();
    if !(s0 > 0.0) {
        return Err(Error::InvalidArgument("weights matrix has no links".into()));
    }
    let cross: f64 = w
        .rows
        .iter()
        .enumerate()
        .map(|(i, row)| z[i] * row.iter().map(|&(j, wij)| wij * z[j]).sum::<f64>())
        .sum();
    let i = n / s0 * cross / ss;

    let mut s1 = 0.0;
    let mut col_sums = vec![0.0; w.n];
    for (a, row) in w.rows.iter().enumerate() {
        for &(b, wab) in row {
            col_sums[b] += wab;
            let wba = w.weight(b, a);
            s1 += (wab + wba).powi(2);
            if wba == 0.0 {
                s1 += wab * wab;
            }
        }
    }
    s1 *= 0.5;
    let s2: f64 = w
        .rows
        .iter()
        .zip(&col_sums)
        .map(|(row, c)| (row.iter().map(|e| e.1).sum::<f64>() + c).powi(2))
        .sum();
    let expected_i = -1.0 / (n - 1.0);
    let var =
        (n * n * s1 - n * s2 + 3.0 * s0 * s0) / ((n * n - 1.0) * s0 * s0) - expected_i * expected_i;
    let null_sd = var.max(0.0).sqrt();
    let z_score = if null_sd > 0.0 {
        (i - expected_i) / null_sd
    } else {
        f64::NAN
    };
    Ok(MoranResult {
        i,
        expected_i,
        null_sd,
        z_score,
    })
}

/// Local indicators `Iᵢ = (zᵢ − z̄)/m₂ · Σⱼ wᵢⱼ (zⱼ − z̄)`, `m₂ = Σ(z − z̄)²/n`.
pub fn local_morans_i(values: &[f64], w: &SpatialWeightsMatrix) -> Result<Vec<f64>> {
    let (z, ss) = centered(values, w)?;
    let m2 = ss / w.n as f64;
    Ok(w.rows
        .iter()
        .enumerate()
        .map(|(i, row)| z[i] / m2 * row.iter().map(|&(j, wij)| wij * z[j]).sum::<f64>())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid(side: usize) -> Vec<Location> {
        (0..side * side)
            .map(|i| Location::planar((i % side) as f64, (i / side) as f64))
            .collect()
    }

    fn checkerboard(side: usize) -> Vec<f64> {
        (0..side * side)
            .map(|i| ((i % side + i / side) % 2) as f64)
            .collect()
    }

    #[test]
    fn two_points_k1() {
        let w = build_weights_for_locations(
            &[Location::planar(0.0, 0.0), Location::planar(3.0, 0.0)],
            WeightsScheme::KnnRowStandardized(1),
        )
        .unwrap();
        assert_eq!(w.row(0), &[(1, 1.0)]);
        assert_eq!(w.row(1), &[(0, 1.0)]);
    }

    #[test]
    fn knn_k_out_of_range() {
        let locs = grid(2);
        assert!(build_weights_for_locations(&locs, WeightsScheme::KnnRowStandardized(4)).is_err());
        assert!(build_weights_for_locations(&locs, WeightsScheme::KnnRowStandardized(0)).is_err());
    }

    #[test]
    fn rook_band_on_grid() {
        let side = 5;
        let w =
            build_weights_for_locations(&grid(side), WeightsScheme::DistanceBand(1.01)).unwrap();
        for i in 0..side * side {
            let (x, y) = (i % side, i / side);
            let expected = [x > 0, x + 1 < side, y > 0, y + 1 < side]
                .iter()
                .filter(|b| **b)
                .count();
            assert_eq!(w.row(i).len(), expected);
            assert!((w.row(i).iter().map(|e| e.1).sum::<f64>() - 1.0).abs() < 1e-15);
            assert_eq!(w.weight(i, i), 0.0);
        }
    }

    #[test]
    fn isolated_points_flagged() {
        let locs = [
            Location::planar(0.0, 0.0),
            Location::planar(0.5, 0.0),
            Location::planar(9.0, 9.0),
        ];
        let w = build_weights_for_locations(&locs, WeightsScheme::DistanceBand(1.0)).unwrap();
        assert_eq!(w.isolated(), &[2]);
        assert!(w.row(2).is_empty());
    }

    #[test]
    fn checkerboard_is_minus_one() {
        let w = build_weights_for_locations(&grid(4), WeightsScheme::DistanceBand(1.01)).unwrap();
        let m = morans_i(&checkerboard(4), &w).unwrap();
        assert!((m.i + 1.0).abs() < 1e-9);
        assert!((m.expected_i + 1.0 / 15.0).abs() < 1e-15);
        let local = local_morans_i(&checkerboard(4), &w).unwrap();
        assert!(local.iter().all(|&v| v < 0.0));
    }

    #[test]
    fn constant_values_rejected() {
        let w =
            build_weights_for_locations(&grid(3), WeightsScheme::KnnRowStandardized(2)).unwrap();
        assert!(matches!(morans_i(&[2.5; 9], &w), Err(Error::ZeroVariance)));
        assert!(local_morans_i(&[0.1; 9], &w).is_err());
    }

    #[test]
    fn neighbors_at_mean_give_zero_local() {
        // Center of a 3x3 rook grid; its four neighbors sit at the mean 0.
        let vals = [1.0, 0.0, -1.0, 0.0, 5.0, 0.0, -1.0, 0.0, -4.0];
        let w = build_weights_for_locations(&grid(3), WeightsScheme::DistanceBand(1.01)).unwrap();
        assert_eq!(local_morans_i(&vals, &w).unwrap()[4], 0.0);
    }

    #[test]
    fn null_sd_matches_permutation_spread() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let locs: Vec<Location> = (0..150)
            .map(|_| Location::planar(rng.random::<f64>(), rng.random::<f64>()))
            .collect();
        let w = build_weights_for_locations(&locs, WeightsScheme::KnnRowStandardized(8)).unwrap();
        let vals: Vec<f64> = (0..150).map(|_| rng.random::<f64>()).collect();
        let analytic = morans_i(&vals, &w).unwrap().null_sd;
        let mut perm = vals.clone();
        let draws: Vec<f64> = (0..2000)
            .map(|_| {
                rand::seq::SliceRandom::shuffle(perm.as_mut_slice(), &mut rng);
                morans_i(&perm, &w).unwrap().i
            })
            .collect();
        let m = draws.iter().sum::<f64>() / draws.len() as f64;
        let sd =
            (draws.iter().map(|d| (d - m).powi(2)).sum::<f64>() / (draws.len() - 1) as f64).sqrt();
        assert!(
            (analytic - sd).abs() / sd < 0.15,
            "analytic {analytic} permutation {sd}"
        );
    }

    fn random_instance(seed: u64, n: usize) -> (Vec<Location>, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let locs = (0..n)
            .map(|_| Location::planar(rng.random::<f64>() * 10.0, rng.random::<f64>() * 10.0))
            .collect();
        let vals = (0..n).map(|_| rng.random::<f64>() * 4.0 - 2.0).collect();
        (locs, vals)
    }

    proptest! {
        #[test]
        fn local_mean_equals_global(seed in 0u64..10_000, n in 5usize..60, k in 1usize..5) {
            let (locs, vals) = random_instance(seed, n);
            let w = build_weights_for_locations(&locs, WeightsScheme::KnnRowStandardized(k)).unwrap();
            let global = morans_i(&vals, &w).unwrap().i;
            let local = local_morans_i(&vals, &w).unwrap();
            prop_assert!((local.iter().sum::<f64>() / n as f64 - global).abs() < 1e-9);
        }

        #[test]
        fn affine_invariance_and_bound(seed in 0u64..10_000, a in prop_oneof![-5.0f64..-0.1, 0.1f64..5.0], c in -100.0f64..100.0) {
            let (locs, vals) = random_instance(seed, 30);
            let w = build_weights_for_locations(&locs, WeightsScheme::KnnRowStandardized(4)).unwrap();
            let i0 = morans_i(&vals, &w).unwrap().i;
            let moved: Vec<f64> = vals.iter().map(|v| a * v + c).collect();
            prop_assert!((morans_i(&moved, &w).unwrap().i - i0).abs() < 1e-9);
            prop_assert!(i0.abs() <= 1.5);
        }

        #[test]
        fn rows_sum_to_one(seed in 0u64..10_000, r in 0.5f64..5.0) {
            let (locs, _) = random_instance(seed, 25);
            let w = build_weights_for_locations(&locs, WeightsScheme::DistanceBand(r)).unwrap();
            for i in 0..25 {
                let s: f64 = w.row(i).iter().map(|e| e.1).sum();
                prop_assert!(w.row(i).is_empty() || (s - 1.0).abs() < 1e-12);
            }
        }
    }
}
