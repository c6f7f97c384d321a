//! Spatial data model: locations, distance metrics, datasets, CSV ingestion
//! and seeded train/calibration/test splitting.
//!
//! Two coordinate systems are supported. `Planar` coordinates use Euclidean
//! distance in native units; `LatLon` coordinates (x = longitude, y = latitude,
//! degrees) use the haversine great-circle distance in meters.

use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Mean Earth radius used by the haversine metric.
pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Crs {
    Planar,
    LatLon,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Location {
    pub x: f64,
    pub y: f64,
    pub crs: Crs,
}

impl Location {
    pub fn planar(x: f64, y: f64) -> Self {
        Self {
            x,
            y,
            crs: Crs::Planar,
        }
    }

    /// Geographic location from longitude and latitude in degrees.
    pub fn lat_lon(lon: f64, lat: f64) -> Result<Self> {
        let loc = Self {
            x: lon,
            y: lat,
            crs: Crs::LatLon,
        };
        loc.validate()?;
        Ok(loc)
    }

    pub fn new(x: f64, y: f64, crs: Crs) -> Result<Self> {
        let loc = Self { x, y, crs };
        loc.validate()?;
        Ok(loc)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.x.is_finite() || !self.y.is_finite() {
            return Err(Error::InvalidLocation(format!(
                "non-finite coordinate ({}, {})",
                self.x, self.y
            )));
        }
        if self.crs == Crs::LatLon
            && (!(-180.0..=180.0).contains(&self.x) || !(-90.0..=90.0).contains(&self.y))
        {
            return Err(Error::InvalidLocation(format!(
                "longitude/latitude out of range ({}, {})",
                self.x, self.y
            )));
        }
        Ok(())
    }
}

/// Distance between two locations sharing a coordinate system.
pub fn distance(a: &Location, b: &Location) -> Result<f64> {
    if a.crs != b.crs {
        return Err(Error::CrsMismatch { a: a.crs, b: b.crs });
    }
    Ok(distance_unchecked(a, b))
}

#[inline]
pub(crate) fn distance_unchecked(a: &Location, b: &Location) -> f64 {
    match a.crs {
        Crs::Planar => (a.x - b.x).hypot(a.y - b.y),
        Crs::LatLon => haversine(a, b),
    }
}

fn haversine(a: &Location, b: &Location) -> f64 {
    if a.x == b.x && a.y == b.y {
        return 0.0;
    }
    let (lat1, lat2) = (a.y.to_radians(), b.y.to_radians());
    let dlat = lat2 - lat1;
    let dlon = (b.x - a.x).to_radians();
    let h = (dlat / 2.0).sin().powi(2) + lat1.cos() * lat2.cos() * (dlon / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_M * h.sqrt().min(1.0).asin()
}

/// Bearing (radians, counter-clockwise from +x / east) from `from` to `to`.
///
/// For geographic coordinates the longitude offset is scaled by cos(latitude)
/// of the midpoint, which is adequate for neighbor-scale offsets.
pub(crate) fn bearing(from: &Location, to: &Location) -> f64 {
    let dy = to.y - from.y;
    let dx = match from.crs {
        Crs::Planar => to.x - from.x,
        Crs::LatLon => (to.x - from.x) * ((from.y + to.y) / 2.0).to_radians().cos(),
    };
    if dx == 0.0 && dy == 0.0 {
        0.0
    } else {
        dy.atan2(dx)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpatialRecord {
    pub loc: Location,
    pub features: Vec<f64>,
    pub target: f64,
}

impl SpatialRecord {
    pub fn new(loc: Location, features: Vec<f64>, target: f64) -> Self {
        Self {
            loc,
            features,
            target,
        }
    }
}

/// An ordered collection of georeferenced records sharing one coordinate
/// system and one feature schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpatialDataset {
    records: Vec<SpatialRecord>,
    feature_names: Vec<String>,
    crs: Crs,
}

impl SpatialDataset {
    pub fn new(records: Vec<SpatialRecord>, feature_names: Vec<String>, crs: Crs) -> Result<Self> {
        for (i, r) in records.iter().enumerate() {
            if r.loc.crs != crs {
                return Err(Error::CrsMismatch {
                    a: crs,
                    b: r.loc.crs,
                });
            }
            r.loc.validate()?;
            if r.features.len() != feature_names.len() {
                return Err(Error::InvalidDataset(format!(
                    "record {i} has {} features, schema has {}",
                    r.features.len(),
                    feature_names.len()
                )));
            }
            if !r.target.is_finite() || r.features.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidDataset(format!(
                    "record {i} has non-finite values"
                )));
            }
        }
        Ok(Self {
            records,
            feature_names,
            crs,
        })
    }

    /// Dataset with locations and targets only.
    pub fn from_points(points: &[(f64, f64, f64)], crs: Crs) -> Result<Self> {
        let records = points
            .iter()
            .map(|&(x, y, z)| Ok(SpatialRecord::new(Location::new(x, y, crs)?, vec![], z)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(records, vec![], crs)
    }

    pub fn records(&self) -> &[SpatialRecord] {
        &self.records
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn crs(&self) -> Crs {
        self.crs
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn locations(&self) -> Vec<Location> {
        self.records.iter().map(|r| r.loc).collect()
    }

    pub fn targets(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.target).collect()
    }

    /// New dataset holding the records at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Self {
        Self {
            records: indices.iter().map(|&i| self.records[i].clone()).collect(),
            feature_names: self.feature_names.clone(),
            crs: self.crs,
        }
    }

    /// Same records with targets replaced.
    pub fn with_targets(&self, targets: &[f64]) -> Result<Self> {
        if targets.len() != self.len() {
            return Err(Error::LengthMismatch {
                left: self.len(),
                right: targets.len(),
            });
        }
        let records = self
            .records
            .iter()
            .zip(targets)
            .map(|(r, &t)| SpatialRecord::new(r.loc, r.features.clone(), t))
            .collect();
        Self::new(records, self.feature_names.clone(), self.crs)
    }

    /// Merges records sharing identical coordinates. Targets and features of
    /// merged rows are averaged; the merged record takes the position of the
    /// first occurrence. Returns one warning per merged location.
    pub fn merge_duplicate_locations(self) -> (Self, Vec<String>) {
        let mut first_at: HashMap<(u64, u64), usize> = HashMap::new();
        let mut groups: Vec<Vec<usize>> = Vec::new();
        for (i, r) in self.records.iter().enumerate() {
            let key = (r.loc.x.to_bits(), r.loc.y.to_bits());
            match first_at.get(&key) {
                Some(&g) => groups[g].push(i),
                None => {
                    first_at.insert(key, groups.len());
                    groups.push(vec![i]);
                }
            }
        }
        if groups.len() == self.records.len() {
            return (self, Vec::new());
        }
        let mut warnings = Vec::new();
        let nf = self.feature_names.len();
        let records = groups
            .iter()
            .map(|g| {
                let first = &self.records[g[0]];
                if g.len() == 1 {
                    return first.clone();
                }
                let n = g.len() as f64;
                let same = g.iter().all(|&i| self.records[i] == *first);
                let target = if same {
                    first.target
                } else {
                    g.iter().map(|&i| self.records[i].target).sum::<f64>() / n
                };
                let features = if same {
                    first.features.clone()
                } else {
                    (0..nf)
                        .map(|f| g.iter().map(|&i| self.records[i].features[f]).sum::<f64>() / n)
                        .collect()
                };
                warnings.push(if same {
                    format!(
                        "{} identical rows at ({}, {}) deduplicated",
                        g.len(),
                        first.loc.x,
                        first.loc.y
                    )
                } else {
                    format!(
                        "{} rows share location ({}, {}); targets averaged to {}",
                        g.len(),
                        first.loc.x,
                        first.loc.y,
                        target
                    )
                });
                SpatialRecord::new(first.loc, features, target)
            })
            .collect();
        for w in &warnings {
            log::warn!("{w}");
        }
        (
            Self {
                records,
                feature_names: self.feature_names,
                crs: self.crs,
            },
            warnings,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitFractions {
    pub train: f64,
    pub calib: f64,
    pub test: f64,
}

impl SplitFractions {
    pub fn new(train: f64, calib: f64, test: f64) -> Result<Self> {
        let f = Self { train, calib, test };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        let parts = [self.train, self.calib, self.test];
        if parts.iter().any(|p| !p.is_finite() || *p < 0.0 || *p > 1.0) {
            return Err(Error::InvalidFractions(format!(
                "each fraction must lie in [0, 1], got {parts:?}"
            )));
        }
        let sum: f64 = parts.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidFractions(format!(
                "fractions sum to {sum}, not 1"
            )));
        }
        Ok(())
    }

    /// Part sizes for `n` records: calibration and test sizes are floored,
    /// the remainder goes to training.
    pub fn sizes(&self, n: usize) -> (usize, usize, usize) {
        // The slack absorbs representation error such as 0.1 * 90 = 9.000000000000002
        // or 200/2700 * 2700 = 199.99999999999997.
        let floor = |f: f64| ((f * n as f64) + 1e-9).floor() as usize;
        let calib = floor(self.calib).min(n);
        let test = floor(self.test).min(n - calib);
        (n - calib - test, calib, test)
    }
}

impl Default for SplitFractions {
    fn default() -> Self {
        Self {
            train: 0.8,
            calib: 0.1,
            test: 0.1,
        }
    }
}

impl std::str::FromStr for SplitFractions {
    type Err = Error;

    /// Parses `a/b/c`, e.g. `0.8/0.1/0.1`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split('/').collect();
        if parts.len() != 3 {
            return Err(Error::InvalidFractions(format!(
                "expected a/b/c, got '{s}'"
            )));
        }
        let mut v = [0.0; 3];
        for (slot, p) in v.iter_mut().zip(&parts) {
            *slot = p
                .trim()
                .parse()
                .map_err(|_| Error::InvalidFractions(format!("not a number: '{p}'")))?;
        }
        Self::new(v[0], v[1], v[2])
    }
}

#[derive(Debug, Clone)]
pub struct SplitResult {
    pub train: SpatialDataset,
    pub calib: SpatialDataset,
    pub test: SpatialDataset,
    /// Indices into the source dataset, ascending within each part.
    pub train_idx: Vec<usize>,
    pub calib_idx: Vec<usize>,
    pub test_idx: Vec<usize>,
    pub seed: u64,
    pub fractions: SplitFractions,
}

/// Uniform random partition into train/calibration/test parts.
///
/// One permutation is drawn from `seed`; its leading segment becomes the
/// training part, then calibration, then test. Each part keeps the source
/// order of its records.
pub fn split_dataset(
    ds: &SpatialDataset,
    fractions: SplitFractions,
    seed: u64,
) -> Result<SplitResult> {
    fractions.validate()?;
    if ds.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let n = ds.len();
    let (n_train, n_calib, _) = fractions.sizes(n);
    let mut perm: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    perm.shuffle(&mut rng);

    let mut train_idx = perm[..n_train].to_vec();
    let mut calib_idx = perm[n_train..n_train + n_calib].to_vec();
    let mut test_idx = perm[n_train + n_calib..].to_vec();
    train_idx.sort_unstable();
    calib_idx.sort_unstable();
    test_idx.sort_unstable();

    Ok(SplitResult {
        train: ds.subset(&train_idx),
        calib: ds.subset(&calib_idx),
        test: ds.subset(&test_idx),
        train_idx,
        calib_idx,
        test_idx,
        seed,
        fractions,
    })
}

/// Column mapping used to read a dataset from CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnMapping {
    pub x: String,
    pub y: String,
    pub target: String,
    pub features: Vec<String>,
    pub crs: Crs,
}

impl ColumnMapping {
    /// The mapping produced by [`write_dataset_csv`].
    pub fn standard(feature_names: &[String], crs: Crs) -> Self {
        Self {
            x: "x".into(),
            y: "y".into(),
            target: "target".into(),
            features: feature_names.to_vec(),
            crs,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LoadedDataset {
    pub dataset: SpatialDataset,
    pub warnings: Vec<String>,
}

pub fn parse_dataset(path: impl AsRef<Path>, schema: &ColumnMapping) -> Result<LoadedDataset> {
    let file = std::fs::File::open(path.as_ref())?;
    parse_dataset_from_reader(file, schema)
}

/// Reads a header-first CSV. Row numbers in errors are 1-based data rows.
pub fn parse_dataset_from_reader<R: Read>(
    reader: R,
    schema: &ColumnMapping,
) -> Result<LoadedDataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    };
    let xi = col(&schema.x)?;
    let yi = col(&schema.y)?;
    let ti = col(&schema.target)?;
    let fi = schema
        .features
        .iter()
        .map(|f| col(f))
        .collect::<Result<Vec<_>>>()?;

    let mut records = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let cell = |idx: usize, name: &str| -> Result<f64> {
            let raw = rec.get(idx).unwrap_or("").trim();
            raw.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::ParseCell {
                    row: row + 1,
                    column: name.to_string(),
                    value: raw.to_string(),
                })
        };
        let x = cell(xi, &schema.x)?;
        let y = cell(yi, &schema.y)?;
        let target = cell(ti, &schema.target)?;
        let features = fi
            .iter()
            .zip(&schema.features)
            .map(|(&i, name)| cell(i, name))
            .collect::<Result<Vec<_>>>()?;
        let loc = Location::new(x, y, schema.crs).map_err(|e| match e {
            Error::InvalidLocation(msg) => {
                Error::InvalidLocation(format!("row {}: {msg}", row + 1))
            }
            other => other,
        })?;
        records.push(SpatialRecord::new(loc, features, target));
    }
    if records.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let ds = SpatialDataset::new(records, schema.features.clone(), schema.crs)?;
    let (dataset, warnings) = ds.merge_duplicate_locations();
    Ok(LoadedDataset { dataset, warnings })
}

/// Writes `x,y,target,<features...>`; floats use the shortest exact
/// representation so a reread reproduces the dataset bit for bit.
pub fn write_dataset_csv<W: Write>(ds: &SpatialDataset, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["x".to_string(), "y".to_string(), "target".to_string()];
    header.extend(ds.feature_names.iter().cloned());
    w.write_record(&header)?;
    for r in &ds.records {
        let mut row = vec![
            r.loc.x.to_string(),
            r.loc.y.to_string(),
            r.target.to_string(),
        ];
        row.extend(r.features.iter().map(|v| v.to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// The `k` records nearest to `query`, ascending by distance; ties go to the
/// lower record index.
pub fn knn_neighbors(ds: &SpatialDataset, query: &Location, k: usize) -> Result<Vec<(usize, f64)>> {
    if query.crs != ds.crs {
        return Err(Error::CrsMismatch {
            a: ds.crs,
            b: query.crs,
        });
    }
    if k == 0 || k > ds.len() {
        return Err(Error::InvalidArgument(format!(
            "k = {k} out of range 1..={}",
            ds.len()
        )));
    }
    let locs: Vec<Location> = ds.locations();
    Ok(nearest(&locs, query, k, None))
}

/// Brute-force k-nearest search over `locs`, optionally skipping one index.
/// Caller guarantees matching CRS and `k` no larger than the candidate count.
pub(crate) fn nearest(
    locs: &[Location],
    query: &Location,
    k: usize,
    exclude: Option<usize>,
) -> Vec<(usize, f64)> {
    let mut cand: Vec<(usize, f64)> = locs
        .iter()
        .enumerate()
        .filter(|(i, _)| Some(*i) != exclude)
        .map(|(i, l)| (i, distance_unchecked(query, l)))
        .collect();
    let cmp = |a: &(usize, f64), b: &(usize, f64)| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0));
    let k = k.min(cand.len());
    if k < cand.len() {
        cand.select_nth_unstable_by(k, cmp);
        cand.truncate(k);
    }
    cand.sort_unstable_by(cmp);
    cand
}

/// Largest pairwise distance among `locs` (0 for fewer than two points).
pub(crate) fn max_pairwise_distance(locs: &[Location]) -> f64 {
    let mut best = 0.0f64;
    for i in 0..locs.len() {
        for j in i + 1..locs.len() {
            best = best.max(distance_unchecked(&locs[i], &locs[j]));
        }
    }
    best
}

/// Median of all pairwise distances among `locs` (0 for fewer than two points).
pub(crate) fn median_pairwise_distance(locs: &[Location]) -> f64 {
    let mut d = Vec::with_capacity(locs.len() * locs.len().saturating_sub(1) / 2);
    for i in 0..locs.len() {
        for j in i + 1..locs.len() {
            d.push(distance_unchecked(&locs[i], &locs[j]));
        }
    }
    crate::stats::median(&mut d).unwrap_or(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> SpatialDataset {
        let pts: Vec<(f64, f64, f64)> = (0..n)
            .map(|i| (i as f64, (i % 7) as f64, i as f64))
            .collect();
        SpatialDataset::from_points(&pts, Crs::Planar).unwrap()
    }

    #[test]
    fn planar_pythagorean() {
        let d = distance(&Location::planar(0.0, 0.0), &Location::planar(3.0, 4.0)).unwrap();
        assert_eq!(d, 5.0);
    }

    #[test]
    fn quarter_great_circle() {
        let a = Location::lat_lon(0.0, 0.0).unwrap();
        let b = Location::lat_lon(90.0, 0.0).unwrap();
        let d = distance(&a, &b).unwrap();
        assert!((d - std::f64::consts::PI * EARTH_RADIUS_M / 2.0).abs() < 1e-6);
        assert!((d - 10_007_543.0).abs() < 1.0);
    }

    #[test]
    fn self_distance_zero() {
        let p = Location::lat_lon(-118.2, 34.05).unwrap();
        assert_eq!(distance(&p, &p).unwrap(), 0.0);
    }

    #[test]
    fn crs_mismatch_names_both() {
        let err = distance(
            &Location::planar(0.0, 0.0),
            &Location::lat_lon(0.0, 0.0).unwrap(),
        )
        .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("Planar") && msg.contains("LatLon"), "{msg}");
    }

    #[test]
    fn latlon_range_checked() {
        assert!(Location::lat_lon(181.0, 0.0).is_err());
        assert!(Location::lat_lon(0.0, -91.0).is_err());
    }

    #[test]
    fn split_sizes_80_10_10() {
        let ds = grid(90);
        let s = split_dataset(&ds, SplitFractions::new(0.8, 0.1, 0.1).unwrap(), 7).unwrap();
        assert_eq!((s.train.len(), s.calib.len(), s.test.len()), (72, 9, 9));
    }

    #[test]
    fn split_all_train() {
        let ds = grid(13);
        let s = split_dataset(&ds, SplitFractions::new(1.0, 0.0, 0.0).unwrap(), 1).unwrap();
        assert_eq!(s.train.len(), 13);
        assert!(s.calib.is_empty() && s.test.is_empty());
    }

    #[test]
    fn split_deterministic() {
        let ds = grid(50);
        let f = SplitFractions::default();
        let a = split_dataset(&ds, f, 99).unwrap();
        let b = split_dataset(&ds, f, 99).unwrap();
        assert_eq!(a.train_idx, b.train_idx);
        assert_eq!(a.calib_idx, b.calib_idx);
        assert_eq!(a.test_idx, b.test_idx);
    }

    #[test]
    fn split_rejects_bad_input() {
        let ds = grid(10);
        assert!(SplitFractions::new(0.5, 0.5, 0.5).is_err());
        assert!(SplitFractions::new(1.2, -0.1, -0.1).is_err());
        let empty = SpatialDataset::new(vec![], vec![], Crs::Planar).unwrap();
        assert!(matches!(
            split_dataset(&empty, SplitFractions::default(), 0),
            Err(Error::EmptyDataset)
        ));
        assert!("0.8/0.1".parse::<SplitFractions>().is_err());
        assert!(split_dataset(&ds, "0.6/0.2/0.2".parse().unwrap(), 0).is_ok());
    }

    #[test]
    fn split_fraction_rounding_is_stable() {
        let f = SplitFractions::new(500.0 / 2700.0, 200.0 / 2700.0, 2000.0 / 2700.0).unwrap();
        assert_eq!(f.sizes(2700), (500, 200, 2000));
    }

    #[test]
    fn knn_self_and_all() {
        let ds = grid(20);
        let q = ds.records()[5].loc;
        let one = knn_neighbors(&ds, &q, 1).unwrap();
        assert_eq!(one, vec![(5, 0.0)]);
        let all = knn_neighbors(&ds, &q, 20).unwrap();
        assert_eq!(all.len(), 20);
        assert!(all.windows(2).all(|w| w[0].1 <= w[1].1));
        assert!(knn_neighbors(&ds, &q, 0).is_err());
        assert!(knn_neighbors(&ds, &q, 21).is_err());
    }

    #[test]
    fn knn_ties_prefer_lower_index() {
        let ds = SpatialDataset::from_points(
            &[
                (1.0, 0.0, 0.0),
                (-1.0, 0.0, 0.0),
                (0.0, 1.0, 0.0),
                (0.0, -1.0, 0.0),
            ],
            Crs::Planar,
        )
        .unwrap();
        let nn = knn_neighbors(&ds, &Location::planar(0.0, 0.0), 2).unwrap();
        assert_eq!(nn.iter().map(|p| p.0).collect::<Vec<_>>(), vec![0, 1]);
    }

    const TABLE1: &str =
        "price,bathrooms,sqft_liv,waterfront,view,condition,grade,yr_built,floors,UTM_X,UTM_Y
53.8,2.25,2570,0,0,3,7,1951,2,552000.5,5283000.25
18.0,1.0,770,0,0,3,6,1933,1,553100.0,5280100.0
60.4,3.0,1960,0,0,5,7,1965,1,549800.0,5271000.0
";

    fn table1_schema() -> ColumnMapping {
        ColumnMapping {
            x: "UTM_X".into(),
            y: "UTM_Y".into(),
            target: "price".into(),
            features: [
                "bathrooms",
                "sqft_liv",
                "waterfront",
                "view",
                "condition",
                "grade",
                "yr_built",
                "floors",
            ]
            .iter()
            .map(|s| s.to_string())
            .collect(),
            crs: Crs::Planar,
        }
    }

    #[test]
    fn parse_table1_schema() {
        let loaded = parse_dataset_from_reader(TABLE1.as_bytes(), &table1_schema()).unwrap();
        let ds = loaded.dataset;
        assert_eq!(ds.len(), 3);
        assert_eq!(ds.n_features() + 2, 10);
        assert_eq!(ds.records()[0].target, 53.8);
        assert_eq!(ds.records()[0].loc.x, 552000.5);
        assert!(loaded.warnings.is_empty());
    }

    #[test]
    fn parse_header_only_is_empty() {
        let header = TABLE1.lines().next().unwrap();
        let err = parse_dataset_from_reader(header.as_bytes(), &table1_schema()).unwrap_err();
        assert_eq!(err.to_string(), "empty dataset");
    }

    #[test]
    fn parse_missing_column_named() {
        let mut schema = table1_schema();
        schema.features.push("bedrooms".into());
        let err = parse_dataset_from_reader(TABLE1.as_bytes(), &schema).unwrap_err();
        assert!(matches!(err, Error::MissingColumn(ref c) if c == "bedrooms"));
    }

    #[test]
    fn parse_bad_cell_reports_row_and_column() {
        let csv = "x,y,target\n0,0,1\n1,1,abc\n";
        let schema = ColumnMapping::standard(&[], Crs::Planar);
        match parse_dataset_from_reader(csv.as_bytes(), &schema).unwrap_err() {
            Error::ParseCell { row, column, value } => {
                assert_eq!((row, column.as_str(), value.as_str()), (2, "target", "abc"));
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn parse_duplicates_merge_with_warning() {
        let csv = "x,y,target\n0,0,1\n0,0,1\n2,2,5\n";
        let loaded =
            parse_dataset_from_reader(csv.as_bytes(), &ColumnMapping::standard(&[], Crs::Planar))
                .unwrap();
        assert_eq!(loaded.dataset.len(), 2);
        assert_eq!(loaded.warnings.len(), 1);

        let csv = "x,y,target\n0,0,1\n2,2,5\n0,0,3\n";
        let loaded =
            parse_dataset_from_reader(csv.as_bytes(), &ColumnMapping::standard(&[], Crs::Planar))
                .unwrap();
        assert_eq!(loaded.dataset.targets(), vec![2.0, 5.0]);
        assert_eq!(loaded.warnings.len(), 1);
    }
}
