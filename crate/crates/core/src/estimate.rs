//! Closed-form maximum likelihood estimation, the hierarchical path formula,
//! parameter recovery from path probabilities and Birch residuals.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{Model, ParameterPoint, Path, Symbol};
use crate::paths::{DesignMatrix, PathTable};
use crate::rational::{format_rational, ln_rational};

/// Validated trajectories with multiplicities. All share one length, which
/// may exceed the model horizon.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrajectorySet {
    records: Vec<(Path, u64)>,
    length: usize,
}

impl TrajectorySet {
    /// Checks lengths and admissibility; errors name the 1-based record.
    pub fn new(model: &Model, records: Vec<(Path, u64)>) -> Result<Self> {
        let Some((first, _)) = records.first() else {
            return Err(Error::EmptyData("no trajectories".into()));
        };
        let length = first.len();
        for (i, (seq, _)) in records.iter().enumerate() {
            let record = i + 1;
            if seq.len() != length {
                return Err(Error::Data {
                    record,
                    message: format!("length {} differs from {length}", seq.len()),
                });
            }
            if let Err(e) = model.check_sequence(seq, None) {
                let message = match e {
                    Error::InadmissiblePath { path, reason } => format!("{path}: {reason}"),
                    other => other.to_string(),
                };
                return Err(Error::Data { record, message });
            }
        }
        Ok(TrajectorySet { records, length })
    }

    pub fn records(&self) -> &[(Path, u64)] {
        &self.records
    }

    pub fn length(&self) -> usize {
        self.length
    }

    /// Number of trajectories counting multiplicity.
    pub fn total(&self) -> u64 {
        self.records.iter().map(|(_, m)| m).sum()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// Counts aligned with a [`PathTable`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountVector {
    counts: Vec<u64>,
}

impl CountVector {
    pub fn new(counts: Vec<u64>) -> Self {
        CountVector { counts }
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    fn check(&self, table: &PathTable) -> Result<()> {
        if self.counts.len() != table.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} counts for {} paths",
                self.counts.len(),
                table.len()
            )));
        }
        if self.total() == 0 {
            return Err(Error::EmptyData("all counts are zero".into()));
        }
        Ok(())
    }
}

/// Which windows feed the pooled transition tallies of a homogeneous model.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum WindowPolicy {
    /// Only transitions into positions `k+1 ..= n`.
    #[default]
    Prefix,
    /// Every window of the full trajectory.
    Slide,
}

#[derive(Debug, Clone)]
struct Tally {
    total: u64,
    initial: Vec<u64>,
    windows: Vec<Vec<u64>>,
}

impl Tally {
    fn zeros(model: &Model) -> Self {
        Tally {
            total: 0,
            initial: vec![0; model.num_histories()],
            windows: vec![vec![0; model.num_windows()]; model.num_slots()],
        }
    }

    fn add(&mut self, model: &Model, seq: &[usize], weight: u64, last: usize) {
        let k = model.order();
        self.total += weight;
        self.initial[model.rank(&seq[..k])] += weight;
        for time in k + 1..=last {
            let window = &seq[time - k - 1..time];
            self.windows[model.slot(time)][model.rank(window)] += weight;
        }
    }

    fn merge(mut self, other: Tally) -> Tally {
        self.total += other.total;
        for (a, b) in self.initial.iter_mut().zip(other.initial) {
            *a += b;
        }
        for (ra, rb) in self.windows.iter_mut().zip(other.windows) {
            for (a, b) in ra.iter_mut().zip(rb) {
                *a += b;
            }
        }
        self
    }

    fn from_trajectories(trajs: &TrajectorySet, model: &Model, policy: WindowPolicy) -> Result<Tally> {
        let n = model.horizon();
        if trajs.length() < n {
            return Err(Error::DimensionMismatch(format!(
                "trajectories of length {} are shorter than the horizon {n}",
                trajs.length()
            )));
        }
        let last = match policy {
            WindowPolicy::Slide if model.is_homogeneous() => trajs.length(),
            _ => n,
        };
        let tally = trajs
            .records()
            .par_iter()
            .fold(
                || Tally::zeros(model),
                |mut t, (seq, m)| {
                    t.add(model, seq, *m, last);
                    t
                },
            )
            .reduce(|| Tally::zeros(model), Tally::merge);
        if tally.total == 0 {
            return Err(Error::EmptyData("all multiplicities are zero".into()));
        }
        Ok(tally)
    }

    fn from_counts(u: &CountVector, model: &Model, table: &PathTable) -> Result<Tally> {
        u.check(table)?;
        let mut tally = Tally::zeros(model);
        for (path, &c) in table.paths().iter().zip(u.counts()) {
            if c > 0 {
                tally.add(model, path, c, model.horizon());
            }
        }
        Ok(tally)
    }
}

/// Estimated (or recovered) parameters. Transition rows of histories that
/// were never visited are `None`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Estimate {
    pub homogeneous: bool,
    /// By initial block rank.
    pub initial: Vec<BigRational>,
    /// `transitions[slot][window rank]`.
    pub transitions: Vec<Vec<Option<BigRational>>>,
}

impl Estimate {
    pub fn get(&self, model: &Model, symbol: &Symbol) -> Option<&BigRational> {
        match symbol {
            Symbol::Initial(block) => self.initial.get(model.rank(block)),
            Symbol::Transition { time, window } => {
                let slot = time.map_or(0, |t| model.slot(t));
                self.transitions.get(slot)?.get(model.rank(window))?.as_ref()
            }
        }
    }

    pub fn row_defined(&self, model: &Model, slot: usize, history: &[usize]) -> bool {
        let s = model.num_states();
        self.transitions[slot][model.rank(history) * s].is_some()
    }

    /// `(time, history)` of rows with allowed successors but no estimate.
    pub fn undefined_rows(&self, model: &Model) -> Vec<(Option<usize>, Path)> {
        let k = model.order();
        let mut out = Vec::new();
        for slot in 0..self.transitions.len() {
            for h in 0..model.num_histories() {
                let history = model.unrank(h, k);
                if !model.allowed_next(&history).is_empty() && !self.row_defined(model, slot, &history) {
                    out.push((model.slot_time(slot), history));
                }
            }
        }
        out
    }

    /// Fails on the first undefined row that has allowed successors.
    pub fn to_parameter_point(&self, model: &Model) -> Result<ParameterPoint> {
        if let Some((time, history)) = self.undefined_rows(model).into_iter().next() {
            return Err(Error::UndefinedRow { time, history: model.path_key(&history) });
        }
        let mut point = ParameterPoint::zeros(model);
        point.initial = self.initial.clone();
        for (dst, src) in point.transitions.iter_mut().zip(&self.transitions) {
            for (d, s) in dst.iter_mut().zip(src) {
                if let Some(v) = s {
                    *d = v.clone();
                }
            }
        }
        Ok(point)
    }

    fn fit(&self, model: &Model, path: &[usize]) -> Result<BigRational> {
        let k = model.order();
        let mut value = self.initial[model.rank(&path[..k])].clone();
        for time in k + 1..=model.horizon() {
            if value.is_zero() {
                break;
            }
            let window = &path[time - k - 1..time];
            match &self.transitions[model.slot(time)][model.rank(window)] {
                Some(a) => value *= a,
                None => {
                    return Err(Error::UndefinedRow {
                        time: model.slot_time(model.slot(time)),
                        history: model.path_key(&window[..k]),
                    })
                }
            }
        }
        Ok(value)
    }
}

fn estimate_from_tally(tally: &Tally, model: &Model) -> Estimate {
    let m = BigInt::from(tally.total);
    let initial = tally
        .initial
        .iter()
        .map(|&c| BigRational::new(BigInt::from(c), m.clone()))
        .collect();
    let s = model.num_states();
    let transitions = tally
        .windows
        .iter()
        .map(|counts| {
            counts
                .chunks(s)
                .flat_map(|row| {
                    let visits: u64 = row.iter().sum();
                    row.iter().map(move |&c| {
                        (visits > 0).then(|| BigRational::new(BigInt::from(c), BigInt::from(visits)))
                    })
                })
                .collect()
        })
        .collect();
    Estimate { homogeneous: model.is_homogeneous(), initial, transitions }
}

fn require(model: &Model, homogeneous: bool) -> Result<()> {
    match (model.is_homogeneous(), homogeneous) {
        (true, false) => Err(Error::WrongModelKind("this estimator requires a nonhomogeneous model")),
        (false, true) => Err(Error::WrongModelKind("this estimator requires a homogeneous model")),
        _ => Ok(()),
    }
}

/// Initial-block frequencies and per-time conditional frequencies over the
/// first `n` positions.
pub fn mle_nonhomogeneous(trajs: &TrajectorySet, model: &Model) -> Result<Estimate> {
    require(model, false)?;
    Ok(estimate_from_tally(&Tally::from_trajectories(trajs, model, WindowPolicy::Prefix)?, model))
}

/// Initial-block frequencies and transition counts pooled over time.
pub fn mle_homogeneous(trajs: &TrajectorySet, model: &Model, policy: WindowPolicy) -> Result<Estimate> {
    require(model, true)?;
    Ok(estimate_from_tally(&Tally::from_trajectories(trajs, model, policy)?, model))
}

pub fn mle_nonhomogeneous_counts(u: &CountVector, model: &Model, table: &PathTable) -> Result<Estimate> {
    require(model, false)?;
    Ok(estimate_from_tally(&Tally::from_counts(u, model, table)?, model))
}

pub fn mle_homogeneous_counts(u: &CountVector, model: &Model, table: &PathTable) -> Result<Estimate> {
    require(model, true)?;
    Ok(estimate_from_tally(&Tally::from_counts(u, model, table)?, model))
}

/// `phi(theta_hat)` over the table. A path reaching an undefined row with
/// nonzero running product is an error.
pub fn fitted_path_probabilities(est: &Estimate, model: &Model, table: &PathTable) -> Result<Vec<BigRational>> {
    table.paths().iter().map(|p| est.fit(model, p)).collect()
}

/// Like [`fitted_path_probabilities`] but undefined entries become `None`.
pub fn fitted_path_probabilities_partial(est: &Estimate, model: &Model, table: &PathTable) -> Vec<Option<BigRational>> {
    table.paths().iter().map(|p| est.fit(model, p).ok()).collect()
}

/// Marginal counts of the block at positions `start..start + len` (0-based).
fn marginal<T: Clone + Zero>(model: &Model, table: &PathTable, weights: &[T], start: usize, len: usize) -> Vec<T> {
    let mut out = vec![T::zero(); model.num_states().pow(len as u32)];
    for (path, w) in table.paths().iter().zip(weights) {
        let r = model.rank(&path[start..start + len]);
        out[r] = out[r].clone() + w.clone();
    }
    out
}

/// Path probabilities of the decomposable model straight from counts:
/// `(1/M) prod_j u|window_j / prod_j u|separator_j`. Entries whose
/// separator marginal vanishes are `None`.
pub fn mle_paths_hierarchical(u: &CountVector, model: &Model, table: &PathTable) -> Result<Vec<Option<BigRational>>> {
    require(model, false)?;
    u.check(table)?;
    let n = model.horizon();
    let k = model.order();
    let counts: Vec<BigInt> = u.counts().iter().map(|&c| BigInt::from(c)).collect();
    // window j covers 1-based positions j-k ..= j, separator j covers j-k+1 ..= j
    let windows: Vec<Vec<BigInt>> = (k + 1..=n).map(|j| marginal(model, table, &counts, j - k - 1, k + 1)).collect();
    let separators: Vec<Vec<BigInt>> = (k + 1..n).map(|j| marginal(model, table, &counts, j - k, k)).collect();
    let m = BigInt::from(u.total());
    Ok(table
        .paths()
        .iter()
        .map(|path| {
            let mut num = BigInt::one();
            for (j, w) in (k + 1..=n).zip(&windows) {
                num *= &w[model.rank(&path[j - k - 1..j])];
            }
            let mut den = m.clone();
            for (j, sep) in (k + 1..n).zip(&separators) {
                let c = &sep[model.rank(&path[j - k..j])];
                if c.is_zero() {
                    return None;
                }
                den *= c;
            }
            Some(BigRational::new(num, den))
        })
        .collect())
}

/// Parameters reproducing an exact distribution over the table through
/// marginal ratios. Rows whose history has zero marginal mass are `None`.
/// For homogeneous models the per-time ratios must agree exactly.
pub fn recover_parameters(p: &[BigRational], model: &Model, table: &PathTable) -> Result<Estimate> {
    if p.len() != table.len() {
        return Err(Error::DimensionMismatch(format!("{} probabilities for {} paths", p.len(), table.len())));
    }
    if let Some(neg) = p.iter().find(|x| x.is_negative()) {
        return Err(Error::NotADistribution(format!("negative entry {}", format_rational(neg))));
    }
    let total: BigRational = p.iter().sum();
    if !total.is_one() {
        return Err(Error::NotADistribution(format!("entries sum to {}", format_rational(&total))));
    }
    let k = model.order();
    let n = model.horizon();
    let s = model.num_states();
    let initial = marginal(model, table, p, 0, k);
    let per_time: Vec<Vec<Option<BigRational>>> = (k + 1..=n)
        .map(|time| {
            let w = marginal(model, table, p, time - k - 1, k + 1);
            w.chunks(s)
                .flat_map(|row| {
                    let h: BigRational = row.iter().sum();
                    row.iter().map(move |c| (!h.is_zero()).then(|| c / &h))
                })
                .collect()
        })
        .collect();
    if !model.is_homogeneous() {
        return Ok(Estimate { homogeneous: false, initial, transitions: per_time });
    }
    let mut pooled: Vec<Option<BigRational>> = vec![None; model.num_windows()];
    let mut source = vec![0usize; model.num_windows()];
    for (offset, row) in per_time.iter().enumerate() {
        let time = offset + k + 1;
        for (rank, value) in row.iter().enumerate() {
            let Some(v) = value else { continue };
            match &pooled[rank] {
                None => {
                    pooled[rank] = Some(v.clone());
                    source[rank] = time;
                }
                Some(prev) if prev != v => {
                    let window = model.unrank(rank, k + 1);
                    return Err(Error::InconsistentRatios {
                        history: model.path_key(&window[..k]),
                        next: model.label(window[k]).to_string(),
                        time_a: source[rank],
                        ratio_a: format_rational(prev),
                        time_b: time,
                        ratio_b: format_rational(v),
                    });
                }
                Some(_) => {}
            }
        }
    }
    Ok(Estimate { homogeneous: true, initial, transitions: vec![pooled] })
}

/// `M A p - A u`, exactly.
pub fn birch_residual(p: &[BigRational], u: &CountVector, a: &DesignMatrix) -> Result<Vec<BigRational>> {
    if u.len() != a.num_cols() {
        return Err(Error::DimensionMismatch(format!(
            "{} counts for {} design-matrix columns",
            u.len(),
            a.num_cols()
        )));
    }
    let m = BigRational::from_integer(BigInt::from(u.total()));
    let ap = a.apply_rational(p)?;
    let counts: Vec<BigRational> = u.counts().iter().map(|&c| BigRational::from_integer(c.into())).collect();
    let au = a.apply_rational(&counts)?;
    Ok(ap.into_iter().zip(au).map(|(x, y)| &m * x - y).collect())
}

/// `sum u_i ln p_i`; negative infinity when some `u_i > 0` has `p_i = 0`.
pub fn loglikelihood(p: &[BigRational], u: &CountVector) -> Result<f64> {
    if p.len() != u.len() {
        return Err(Error::DimensionMismatch(format!("{} probabilities for {} counts", p.len(), u.len())));
    }
    let mut total = 0.0;
    for (pi, &ui) in p.iter().zip(u.counts()) {
        if ui == 0 {
            continue;
        }
        if pi.is_negative() {
            return Err(Error::NotADistribution(format!("negative entry {}", format_rational(pi))));
        }
        if pi.is_zero() {
            return Ok(f64::NEG_INFINITY);
        }
        total += ui as f64 * ln_rational(pi);
    }
    Ok(total)
}

/// Estimate plus fitted path probabilities and their log-likelihood.
#[derive(Debug, Clone)]
pub struct EstimateReport {
    pub estimate: Estimate,
    pub fitted: Vec<Option<BigRational>>,
    pub loglikelihood: Option<f64>,
    pub total: u64,
}

pub fn estimate_report(est: Estimate, model: &Model, table: &PathTable, counts: &CountVector) -> EstimateReport {
    let fitted = fitted_path_probabilities_partial(&est, model, table);
    let loglikelihood = fitted
        .iter()
        .zip(counts.counts())
        .map(|(p, &c)| match p {
            Some(p) => Some(p.clone()),
            None if c == 0 => Some(BigRational::zero()),
            None => None,
        })
        .collect::<Option<Vec<_>>>()
        .and_then(|p| loglikelihood(&p, counts).ok());
    EstimateReport { estimate: est, fitted, loglikelihood, total: counts.total() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::catalog;
    use crate::paths::enumerate_paths;
    use crate::rational::ratio;

    fn trajs(model: &Model, records: &[(&[usize], u64)]) -> TrajectorySet {
        TrajectorySet::new(model, records.iter().map(|(p, m)| (p.to_vec(), *m)).collect()).unwrap()
    }

    fn a(est: &Estimate, model: &Model, time: Option<usize>, window: &[usize]) -> Option<BigRational> {
        est.get(model, &Symbol::Transition { time, window: window.to_vec() }).cloned()
    }

    #[test]
    fn single_trajectory_point_mass() {
        let m = catalog::unrestricted(2, 1, 4, false);
        let est = mle_nonhomogeneous(&trajs(&m, &[(&[0, 0, 0, 1], 1)]), &m).unwrap();
        assert_eq!(est.initial, [ratio(1, 1), ratio(0, 1)]);
        assert_eq!(a(&est, &m, Some(2), &[0, 0]), Some(ratio(1, 1)));
        assert_eq!(a(&est, &m, Some(3), &[0, 0]), Some(ratio(1, 1)));
        assert_eq!(a(&est, &m, Some(4), &[0, 1]), Some(ratio(1, 1)));
        assert_eq!(a(&est, &m, Some(2), &[1, 0]), None);
        assert_eq!(est.undefined_rows(&m).len(), 3);

        let t = enumerate_paths(&m);
        let fitted = fitted_path_probabilities(&est, &m, &t).unwrap();
        let hit = t.index_of(&[0, 0, 0, 1]).unwrap();
        for (i, p) in fitted.iter().enumerate() {
            assert_eq!(p, &ratio(u64::from(i == hit), 1));
        }
    }

    #[test]
    fn two_short_trajectories() {
        let m = catalog::unrestricted(2, 1, 2, false);
        let est = mle_nonhomogeneous(&trajs(&m, &[(&[0, 1], 1), (&[0, 0], 1)]), &m).unwrap();
        assert_eq!(est.initial[0], ratio(1, 1));
        assert_eq!(a(&est, &m, Some(2), &[0, 0]), Some(ratio(1, 2)));
        assert_eq!(a(&est, &m, Some(2), &[0, 1]), Some(ratio(1, 2)));
    }

    #[test]
    fn homogeneous_pools_and_slides() {
        let m = catalog::unrestricted(2, 1, 3, true);
        let data = trajs(&m, &[(&[0, 0, 0, 0], 1)]);
        let est = mle_homogeneous(&data, &m, WindowPolicy::Prefix).unwrap();
        assert_eq!(a(&est, &m, None, &[0, 0]), Some(ratio(1, 1)));
        assert_eq!(est.initial[0], ratio(1, 1));

        let data = trajs(&m, &[(&[0, 1, 1, 0], 1)]);
        let prefix = mle_homogeneous(&data, &m, WindowPolicy::Prefix).unwrap();
        let slide = mle_homogeneous(&data, &m, WindowPolicy::Slide).unwrap();
        assert_eq!(a(&prefix, &m, None, &[1, 1]), Some(ratio(1, 1)));
        assert_eq!(a(&slide, &m, None, &[1, 1]), Some(ratio(1, 2)));
        assert!(mle_nonhomogeneous(&data, &m).is_err());
    }

    #[test]
    fn empty_and_inadmissible_data_are_rejected() {
        let m = catalog::illness_death(4, true);
        assert!(matches!(TrajectorySet::new(&m, vec![]), Err(Error::EmptyData(_))));
        let err = TrajectorySet::new(&m, vec![(vec![0, 0, 0, 0], 1), (vec![0, 1, 0, 0], 2)]).unwrap_err();
        assert!(matches!(err, Error::Data { record: 2, .. }), "{err}");
        let err = TrajectorySet::new(&m, vec![(vec![0, 0, 0, 0], 1), (vec![0, 1, 1], 2)]).unwrap_err();
        assert!(matches!(err, Error::Data { record: 2, .. }), "{err}");
    }

    #[test]
    fn hierarchical_uniform_and_indicator() {
        let m = catalog::unrestricted(2, 1, 3, false);
        let t = enumerate_paths(&m);
        let p = mle_paths_hierarchical(&CountVector::new(vec![1; 8]), &m, &t).unwrap();
        assert!(p.iter().all(|x| x == &Some(ratio(1, 8))));

        let mut counts = vec![0; 8];
        counts[5] = 9;
        let p = mle_paths_hierarchical(&CountVector::new(counts), &m, &t).unwrap();
        for (i, x) in p.iter().enumerate() {
            if i == 5 {
                assert_eq!(x, &Some(ratio(1, 1)));
            } else {
                // either a zero numerator or an unvisited separator
                assert!(x.as_ref().is_none_or(Zero::is_zero));
            }
        }
    }

    #[test]
    fn recovery_of_indicator() {
        let m = catalog::illness_death(4, false);
        let t = enumerate_paths(&m);
        let mut p = vec![ratio(0, 1); t.len()];
        p[t.index_of(&[0, 1, 2, 2]).unwrap()] = ratio(1, 1);
        let est = recover_parameters(&p, &m, &t).unwrap();
        assert_eq!(est.initial[0], ratio(1, 1));
        assert_eq!(a(&est, &m, Some(2), &[0, 1]), Some(ratio(1, 1)));
        assert_eq!(a(&est, &m, Some(3), &[1, 2]), Some(ratio(1, 1)));
        assert_eq!(a(&est, &m, Some(4), &[2, 2]), Some(ratio(1, 1)));
        assert_eq!(a(&est, &m, Some(3), &[0, 0]), None);
        assert_eq!(fitted_path_probabilities(&est, &m, &t).unwrap(), p);
    }

    #[test]
    fn recovery_rejects_points_outside_homogeneous_model() {
        let m = catalog::unrestricted(2, 1, 3, true);
        let t = enumerate_paths(&m);
        // uniform over paths starting 00 or 01 then constant: a00 differs over time
        let mut p = vec![ratio(0, 1); 8];
        p[t.index_of(&[0, 0, 1]).unwrap()] = ratio(1, 2);
        p[t.index_of(&[0, 1, 1]).unwrap()] = ratio(1, 2);
        let err = recover_parameters(&p, &m, &t).unwrap_err();
        assert!(matches!(err, Error::InconsistentRatios { .. }), "{err}");
        assert!(recover_parameters(&p[..3], &m, &t).is_err());
        let mut q = p.clone();
        q[0] = ratio(1, 2);
        assert!(matches!(recover_parameters(&q, &m, &t), Err(Error::NotADistribution(_))));
    }

    #[test]
    fn birch_fixed_point_and_loglikelihood() {
        let m = catalog::unrestricted(2, 1, 3, true);
        let t = enumerate_paths(&m);
        let a_mat = crate::paths::build_design_matrix(&m, &t);
        let u = CountVector::new(vec![1, 2, 3, 4, 5, 6, 7, 8]);
        let p: Vec<BigRational> = u.counts().iter().map(|&c| ratio(c, 36)).collect();
        assert!(birch_residual(&p, &u, &a_mat).unwrap().iter().all(Zero::is_zero));
        assert!(birch_residual(&p, &CountVector::new(vec![1; 3]), &a_mat).is_err());

        let uniform = vec![ratio(1, 14); 14];
        let u = CountVector::new(vec![685 / 14; 14]);
        let ll = loglikelihood(&uniform, &u).unwrap();
        assert!((ll + (u.total() as f64) * 14f64.ln()).abs() < 1e-9);

        let mut indicator = vec![ratio(0, 1); 14];
        indicator[3] = ratio(1, 1);
        let mut counts = vec![0; 14];
        counts[3] = 5;
        assert_eq!(loglikelihood(&indicator, &CountVector::new(counts.clone())).unwrap(), 0.0);
        counts[4] = 1;
        assert_eq!(loglikelihood(&indicator, &CountVector::new(counts)).unwrap(), f64::NEG_INFINITY);
    }
}
