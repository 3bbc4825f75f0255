//! Exact verification of binomial relations: evaluation at sampled rational
//! points of the model and integer-kernel membership against the design
//! matrix.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{Model, ParameterPoint};
use crate::paths::{DesignMatrix, PathTable};
use crate::rational::format_rational;
use crate::relations::Binomial;

pub const DEFAULT_TRIALS: usize = 20;
pub const DEFAULT_BOUND: u32 = 97;

const INITIAL_STREAM: u64 = u64::MAX;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives an independent stream seed from a base seed and two indices.
pub fn mix_seed(seed: u64, a: u64, b: u64) -> u64 {
    splitmix(splitmix(splitmix(seed) ^ a) ^ b.rotate_left(32))
}

fn normalized_row(seed: u64, len: usize, bound: u32) -> Vec<BigRational> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weights: Vec<u32> = (0..len).map(|_| rng.gen_range(1..=bound)).collect();
    let total: u64 = weights.iter().map(|&w| u64::from(w)).sum();
    weights
        .into_iter()
        .map(|w| BigRational::new(BigInt::from(w), BigInt::from(total)))
        .collect()
}

/// A strictly positive point of the model: positive integers up to `bound`
/// drawn for every allowed entry, each row normalized exactly.
///
/// Every row has its own random stream, so the point depends only on
/// `(seed, bound)` and the model.
pub fn sample_parameters(model: &Model, seed: u64, bound: u32) -> Result<ParameterPoint> {
    if bound == 0 {
        return Err(Error::Parse("denominator bound must be positive".into()));
    }
    let mut point = ParameterPoint::zeros(model);
    let blocks = model.initial_blocks();
    let initial = normalized_row(mix_seed(seed, INITIAL_STREAM, 0), blocks.len(), bound);
    for (block, value) in blocks.iter().zip(initial) {
        point.initial[model.rank(block)] = value;
    }
    let k = model.order();
    let s = model.num_states();
    for slot in 0..model.num_slots() {
        for h in 0..model.num_histories() {
            let next = model.allowed_next(&model.unrank(h, k));
            if next.is_empty() {
                continue;
            }
            let row = normalized_row(mix_seed(seed, slot as u64, h as u64), next.len(), bound);
            for (&t, value) in next.iter().zip(row) {
                point.transitions[slot][h * s + t] = value;
            }
        }
    }
    Ok(point)
}

fn monomial_value(m: &crate::relations::Monomial, p: &[BigRational]) -> Result<BigRational> {
    let mut value = BigRational::one();
    for (&i, &e) in m {
        let x = p.get(i).ok_or(Error::IndexOutOfRange { index: i, len: p.len() })?;
        value *= num_traits::pow(x.clone(), e as usize);
    }
    Ok(value)
}

/// `p^plus - p^minus`, exactly.
pub fn evaluate_binomial(b: &Binomial, p: &[BigRational]) -> Result<BigRational> {
    Ok(monomial_value(b.plus(), p)? - monomial_value(b.minus(), p)?)
}

/// Everything needed to reproduce a nonzero evaluation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub seed: u64,
    pub relation: usize,
    pub trial: usize,
    pub bound: u32,
    #[serde(serialize_with = "ser_rational")]
    pub residual: BigRational,
}

fn ser_rational<S: serde::Serializer>(v: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format_rational(v))
}

impl Witness {
    pub fn point_seed(&self) -> u64 {
        mix_seed(self.seed, self.relation as u64, self.trial as u64)
    }

    pub fn point(&self, model: &Model) -> Result<ParameterPoint> {
        sample_parameters(model, self.point_seed(), self.bound)
    }

    /// Re-evaluates the relation at the witness point.
    pub fn replay(&self, b: &Binomial, model: &Model, table: &PathTable) -> Result<BigRational> {
        let point = self.point(model)?;
        evaluate_at(b, model, table, &point)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum Vanishing {
    VanishesExactly { trials: usize },
    Nonzero(Witness),
}

impl Vanishing {
    pub fn vanishes(&self) -> bool {
        matches!(self, Vanishing::VanishesExactly { .. })
    }
}

fn evaluate_at(b: &Binomial, model: &Model, table: &PathTable, point: &ParameterPoint) -> Result<BigRational> {
    let eval = |m: &crate::relations::Monomial| -> Result<BigRational> {
        let mut value = BigRational::one();
        for (&i, &e) in m {
            let path = table.get(i)?;
            value *= num_traits::pow(point.evaluate(model, path), e as usize);
        }
        Ok(value)
    };
    Ok(eval(b.plus())? - eval(b.minus())?)
}

fn vanishes_indexed(
    b: &Binomial,
    model: &Model,
    table: &PathTable,
    trials: usize,
    seed: u64,
    bound: u32,
    relation: usize,
) -> Result<Vanishing> {
    for trial in 0..trials {
        let point = sample_parameters(model, mix_seed(seed, relation as u64, trial as u64), bound)?;
        let residual = evaluate_at(b, model, table, &point)?;
        if !residual.is_zero() {
            return Ok(Vanishing::Nonzero(Witness { seed, relation, trial, bound, residual }));
        }
    }
    Ok(Vanishing::VanishesExactly { trials })
}

/// Evaluates `b` (indexed by `table`) at `trials` sampled points of `model`.
pub fn vanishes_on_model(b: &Binomial, model: &Model, table: &PathTable, trials: usize, seed: u64) -> Result<Vanishing> {
    if trials == 0 {
        return Err(Error::Parse("at least one trial is required".into()));
    }
    vanishes_indexed(b, model, table, trials, seed, DEFAULT_BOUND, 0)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KernelCheck {
    pub in_kernel: bool,
    pub degenerate: bool,
    #[serde(serialize_with = "ser_ints")]
    pub residual: Vec<BigInt>,
}

fn ser_ints<S: serde::Serializer>(v: &[BigInt], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|x| x.to_string()))
}

/// `A (plus - minus) = 0` over the integers.
pub fn kernel_membership(b: &Binomial, a: &DesignMatrix) -> Result<KernelCheck> {
    let mut v: Vec<(usize, BigInt)> = b.plus().iter().map(|(&i, &e)| (i, BigInt::from(e))).collect();
    v.extend(b.minus().iter().map(|(&i, &e)| (i, -BigInt::from(e))));
    let residual = a.apply_sparse(&v)?;
    Ok(KernelCheck {
        in_kernel: residual.iter().all(Zero::is_zero),
        degenerate: b.is_degenerate(),
        residual,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RelationVerdict {
    pub index: usize,
    pub text: String,
    pub vanishing: Vanishing,
    pub kernel: KernelCheck,
}

impl RelationVerdict {
    pub fn passes(&self) -> bool {
        self.vanishing.vanishes() && self.kernel.in_kernel
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub seed: u64,
    pub trials: usize,
    pub bound: u32,
    pub relations: Vec<RelationVerdict>,
}

impl VerificationReport {
    pub fn all_pass(&self) -> bool {
        self.relations.iter().all(RelationVerdict::passes)
    }

    pub fn failures(&self) -> impl Iterator<Item = &RelationVerdict> {
        self.relations.iter().filter(|r| !r.passes())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyOptions {
    pub trials: usize,
    pub seed: u64,
    pub bound: u32,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { trials: DEFAULT_TRIALS, seed: 0, bound: DEFAULT_BOUND }
    }
}

/// Runs both checks on every relation in parallel; the report is ordered by
/// relation index and independent of scheduling.
pub fn verify_relations(
    relations: &[Binomial],
    model: &Model,
    table: &PathTable,
    opts: VerifyOptions,
) -> Result<VerificationReport> {
    if opts.trials == 0 {
        return Err(Error::Parse("at least one trial is required".into()));
    }
    let a = crate::paths::build_design_matrix(model, table);
    let verdicts = relations
        .par_iter()
        .enumerate()
        .map(|(index, b)| {
            Ok(RelationVerdict {
                index,
                text: crate::relations::format_binomial(b, model, table),
                vanishing: vanishes_indexed(b, model, table, opts.trials, opts.seed, opts.bound, index)?,
                kernel: kernel_membership(b, &a)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(VerificationReport { seed: opts.seed, trials: opts.trials, bound: opts.bound, relations: verdicts })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{catalog, validate_parameters, Symbol};
    use crate::paths::{build_design_matrix, enumerate_paths};
    use crate::rational::ratio;
    use crate::relations::parse_binomial;

    #[test]
    fn sampled_points_respect_structure() {
        let m = catalog::illness_death(4, true);
        let p = sample_parameters(&m, 7, DEFAULT_BOUND).unwrap();
        validate_parameters(&p, &m).unwrap();
        let get = |w: Vec<usize>| p.get(&m, &Symbol::Transition { time: None, window: w }).clone();
        assert!(get(vec![1, 0]).is_zero());
        assert_eq!(get(vec![2, 2]), ratio(1, 1));
        assert_eq!(p, sample_parameters(&m, 7, DEFAULT_BOUND).unwrap());
        assert_ne!(p, sample_parameters(&m, 8, DEFAULT_BOUND).unwrap());
    }

    #[test]
    fn sampled_points_are_interior() {
        let m = catalog::reversible_illness_death(4, false);
        let t = enumerate_paths(&m);
        let p = sample_parameters(&m, 3, 5).unwrap();
        assert!(t.probabilities(&m, &p).iter().all(|x| x > &BigRational::zero()));
    }

    #[test]
    fn uniform_assignment_annihilates_equal_degree_binomial() {
        let m = catalog::illness_death(4, false);
        let t = enumerate_paths(&m);
        let b = parse_binomial("p_1112*p_0122 - p_0112*p_1122", &m, &t).unwrap();
        let p = vec![ratio(1, 14); 14];
        assert!(evaluate_binomial(&b, &p).unwrap().is_zero());
        assert!(evaluate_binomial(&b, &p[..3]).is_err());
        assert!(vanishes_on_model(&b, &m, &t, 10, 1).unwrap().vanishes());
    }

    #[test]
    fn homogeneity_relation_fails_on_nonhomogeneous_point() {
        let m = catalog::illness_death(4, false);
        let t = enumerate_paths(&m);
        let b = parse_binomial("p_0011^2 - p_0001*p_0111", &m, &t).unwrap();
        // a(2) = (1/2, 1/4, 1/4), a(3) = (1/3, 1/3, 1/3), a(4) = a(3); rows of
        // state 1 are (0, 1/2, 1/2).
        let p = ParameterPoint::from_fn(&m, |s| match s {
            Symbol::Initial(_) => ratio(1, 2),
            Symbol::Transition { time, window } => match (window[0], window[1], *time) {
                (0, 0, Some(2)) => ratio(1, 2),
                (0, _, Some(2)) => ratio(1, 4),
                (0, _, _) => ratio(1, 3),
                (1, _, _) => ratio(1, 2),
                _ => ratio(1, 1),
            },
        });
        validate_parameters(&p, &m).unwrap();
        let probs = t.probabilities(&m, &p);
        // Direct substitution:
        // p_0011 = 1/2 * 1/2 * 1/3 * 1/2 = 1/24
        // p_0001 = 1/2 * 1/2 * 1/3 * 1/3 = 1/36
        // p_0111 = 1/2 * 1/4 * 1/2 * 1/2 = 1/32
        let expected = ratio(1, 576) - ratio(1, 36 * 32);
        assert_eq!(evaluate_binomial(&b, &probs).unwrap(), expected);

        let verdict = vanishes_on_model(&b, &m, &t, 5, 11).unwrap();
        let Vanishing::Nonzero(w) = verdict else { panic!("expected a witness") };
        assert_eq!(w.replay(&b, &m, &t).unwrap(), w.residual);

        let hom = m.with_homogeneous(true);
        assert!(vanishes_on_model(&b, &hom, &t, 20, 11).unwrap().vanishes());
    }

    #[test]
    fn kernel_membership_reports_residuals() {
        let m = catalog::unrestricted(2, 1, 3, true);
        let t = enumerate_paths(&m);
        let a = build_design_matrix(&m, &t);
        let cubic = parse_binomial("p_001*p_110^2 - p_010*p_100*p_111", &m, &t).unwrap();
        assert!(kernel_membership(&cubic, &a).unwrap().in_kernel);

        let bad = parse_binomial("p_000 - p_111", &m, &t).unwrap();
        let check = kernel_membership(&bad, &a).unwrap();
        assert!(!check.in_kernel);
        let as_i64: Vec<i64> = check.residual.iter().map(|x| x.try_into().unwrap()).collect();
        assert_eq!(as_i64, [1, -1, 2, 0, 0, -2]);

        let degenerate = parse_binomial("p_000*p_001 - p_001*p_000", &m, &t).unwrap();
        let check = kernel_membership(&degenerate, &a).unwrap();
        assert!(check.in_kernel && check.degenerate);

        let out_of_range = crate::relations::Binomial::raw([(40, 1)].into(), [(0, 1)].into());
        assert!(kernel_membership(&out_of_range, &a).is_err());
    }

    #[test]
    fn report_is_deterministic() {
        let m = catalog::illness_death(4, true);
        let t = enumerate_paths(&m);
        let fabricated = parse_binomial("p_0000*p_1111 - p_0001*p_1112", &m, &t).unwrap();
        let good = parse_binomial("p_0011^2 - p_0001*p_0111", &m, &t).unwrap();
        let opts = VerifyOptions { trials: 5, seed: 42, bound: DEFAULT_BOUND };
        let r1 = verify_relations(&[good.clone(), fabricated.clone()], &m, &t, opts).unwrap();
        let r2 = verify_relations(&[good, fabricated], &m, &t, opts).unwrap();
        assert_eq!(r1, r2);
        assert!(r1.relations[0].passes());
        assert!(!r1.relations[1].passes());
        assert_eq!(r1.failures().count(), 1);
    }
}
