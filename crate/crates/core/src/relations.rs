//! Binomial relations among path probabilities: canonical forms, the exchange
//! families that vanish on the model, linear relations from equal block
//! counts, and the text format.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Model, Path};
use crate::paths::{block_counts, inadmissible_paths, PathTable, SufficientStats};

/// Exponents over path indices of a [`PathTable`].
pub type Monomial = BTreeMap<usize, u32>;

pub fn monomial_degree(m: &Monomial) -> u32 {
    m.values().sum()
}

/// Lexicographic comparison of the dense exponent vectors.
fn dense_cmp(a: &Monomial, b: &Monomial) -> Ordering {
    let mut ia = a.iter().filter(|(_, &e)| e > 0).peekable();
    let mut ib = b.iter().filter(|(_, &e)| e > 0).peekable();
    loop {
        match (ia.peek(), ib.peek()) {
            (None, None) => return Ordering::Equal,
            (Some(_), None) => return Ordering::Greater,
            (None, Some(_)) => return Ordering::Less,
            (Some(&(ka, ea)), Some(&(kb, eb))) => match ka.cmp(kb) {
                Ordering::Less => return Ordering::Greater,
                Ordering::Greater => return Ordering::Less,
                Ordering::Equal => match ea.cmp(eb) {
                    Ordering::Equal => {
                        ia.next();
                        ib.next();
                    }
                    other => return other,
                },
            },
        }
    }
}

/// `p^plus - p^minus` over path indices.
///
/// Values built with [`Binomial::new`] are canonical: no common factor and
/// `plus` lexicographically larger than `minus` as dense exponent vectors.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Binomial {
    plus: Monomial,
    minus: Monomial,
}

impl Binomial {
    pub fn new(plus: Monomial, minus: Monomial) -> Result<Binomial> {
        canonicalize(&Binomial::raw(plus, minus))
    }

    /// Keeps both sides exactly as given (zero exponents dropped).
    pub fn raw(mut plus: Monomial, mut minus: Monomial) -> Binomial {
        plus.retain(|_, e| *e > 0);
        minus.retain(|_, e| *e > 0);
        Binomial { plus, minus }
    }

    /// `p_a p_b - p_c p_d` style constructor from index lists.
    pub fn from_factors(plus: &[usize], minus: &[usize]) -> Result<Binomial> {
        let collect = |xs: &[usize]| {
            let mut m = Monomial::new();
            for &x in xs {
                *m.entry(x).or_insert(0) += 1;
            }
            m
        };
        Binomial::new(collect(plus), collect(minus))
    }

    pub fn plus(&self) -> &Monomial {
        &self.plus
    }

    pub fn minus(&self) -> &Monomial {
        &self.minus
    }

    pub fn degree(&self) -> u32 {
        monomial_degree(&self.plus).max(monomial_degree(&self.minus))
    }

    pub fn is_degenerate(&self) -> bool {
        self.plus == self.minus
    }

    pub fn support(&self) -> BTreeSet<usize> {
        self.plus.keys().chain(self.minus.keys()).copied().collect()
    }

    /// `plus - minus` as sparse integer coordinates.
    pub fn exponent_difference(&self) -> BTreeMap<usize, i64> {
        let mut diff = BTreeMap::new();
        for (&i, &e) in &self.plus {
            *diff.entry(i).or_insert(0) += i64::from(e);
        }
        for (&i, &e) in &self.minus {
            *diff.entry(i).or_insert(0) -= i64::from(e);
        }
        diff.retain(|_, v| *v != 0);
        diff
    }

    /// Re-indexes every variable, e.g. from one path table into another.
    pub fn reindex(&self, mut map: impl FnMut(usize) -> Option<usize>) -> Option<Binomial> {
        let mut go = |m: &Monomial| -> Option<Monomial> {
            m.iter().map(|(&i, &e)| map(i).map(|j| (j, e))).collect()
        };
        Some(Binomial::raw(go(&self.plus)?, go(&self.minus)?))
    }
}

/// Removes the common factor and fixes the sign.
pub fn canonicalize(b: &Binomial) -> Result<Binomial> {
    let mut plus = b.plus.clone();
    let mut minus = b.minus.clone();
    for (i, e) in plus.iter_mut() {
        if let Some(f) = minus.get_mut(i) {
            let common = (*e).min(*f);
            *e -= common;
            *f -= common;
        }
    }
    plus.retain(|_, e| *e > 0);
    minus.retain(|_, e| *e > 0);
    match dense_cmp(&plus, &minus) {
        Ordering::Equal => Err(Error::DegenerateBinomial),
        Ordering::Greater => Ok(Binomial { plus, minus }),
        Ordering::Less => Ok(Binomial { plus: minus, minus: plus }),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    NonhomExchange,
    HomExchange,
    HomLinear,
    Slice,
    Imported,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Provenance::NonhomExchange => "nonhom-exchange",
            Provenance::HomExchange => "hom-exchange",
            Provenance::HomLinear => "hom-linear",
            Provenance::Slice => "slice",
            Provenance::Imported => "imported",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Relation {
    pub binomial: Binomial,
    pub provenance: Provenance,
}

/// Binomials over the model's own [`PathTable`] plus the slice variables:
/// companion-model paths that are forced to zero.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RelationSet {
    pub relations: Vec<Relation>,
    pub slice: Vec<Path>,
}

impl RelationSet {
    fn from_binomials(binomials: BTreeSet<Binomial>, provenance: Provenance) -> Self {
        RelationSet {
            relations: binomials.into_iter().map(|binomial| Relation { binomial, provenance }).collect(),
            slice: Vec::new(),
        }
    }

    pub fn binomials(&self) -> impl Iterator<Item = &Binomial> {
        self.relations.iter().map(|r| &r.binomial)
    }

    pub fn len(&self) -> usize {
        self.relations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.relations.is_empty()
    }

    /// Union keeping the first provenance of each canonical form.
    pub fn merge(mut self, other: RelationSet) -> RelationSet {
        let mut seen: BTreeSet<Binomial> = self.binomials().cloned().collect();
        for r in other.relations {
            if seen.insert(r.binomial.clone()) {
                self.relations.push(r);
            }
        }
        let mut slice: BTreeSet<Path> = self.slice.into_iter().collect();
        slice.extend(other.slice);
        self.slice = slice.into_iter().collect();
        self
    }
}

/// Exchange binomials `p_{IJS} p_{I'JS'} - p_{IJS'} p_{I'JS}` with `|J| = k`
/// and nonempty `I`, `S`. For restricted models only exchanges whose four
/// paths are admissible are kept, and the slice variables are attached.
pub fn nonhomogeneous_generators(model: &Model, table: &PathTable) -> Result<RelationSet> {
    if model.is_homogeneous() {
        return Err(Error::WrongModelKind(
            "exchange generators of this family require a nonhomogeneous model",
        ));
    }
    let n = model.horizon();
    let k = model.order();
    let binomials: BTreeSet<Binomial> = (1..n.saturating_sub(k))
        .into_par_iter()
        .flat_map_iter(|r| {
            let mut groups: BTreeMap<&[usize], Vec<usize>> = BTreeMap::new();
            for (i, p) in table.paths().iter().enumerate() {
                groups.entry(&p[r..r + k]).or_default().push(i);
            }
            let mut out = Vec::new();
            for members in groups.values() {
                for (a, &x) in members.iter().enumerate() {
                    for &y in &members[a + 1..] {
                        let (px, py) = (&table.paths()[x], &table.paths()[y]);
                        let mut sx = px[..r + k].to_vec();
                        sx.extend_from_slice(&py[r + k..]);
                        let mut sy = py[..r + k].to_vec();
                        sy.extend_from_slice(&px[r + k..]);
                        let (Some(ix), Some(iy)) = (table.index_of(&sx), table.index_of(&sy)) else {
                            continue;
                        };
                        if let Ok(b) = Binomial::from_factors(&[x, y], &[ix, iy]) {
                            out.push(b);
                        }
                    }
                }
            }
            out
        })
        .collect();
    let mut set = RelationSet::from_binomials(binomials, Provenance::NonhomExchange);
    set.slice = slice_linear_generators(model);
    Ok(set)
}

/// Companion-model paths containing a forbidden step or initial block.
pub fn slice_linear_generators(model: &Model) -> Vec<Path> {
    inadmissible_paths(model)
}

/// Left and right context of a position, clipped at the path boundary.
type Contexts<'a> = (&'a [usize], &'a [usize]);

/// Exchange binomials of the homogeneous model: swap the state at one
/// position of `x` with the state at one position of `y` whenever both
/// positions have the same `k` states on each side.
///
/// A context is cut short only by the start or end of the path, and two
/// positions match only when their (possibly shortened) contexts are equal,
/// so both exchanged paths lose and gain exactly the same windows.
pub fn homogeneous_family(model: &Model, table: &PathTable) -> Result<RelationSet> {
    if !model.is_homogeneous() {
        return Err(Error::WrongModelKind(
            "the exchange family of this kind requires a homogeneous model",
        ));
    }
    let n = model.horizon();
    let k = model.order();
    // (left context, right context) -> [(path index, position)]
    let mut groups: HashMap<Contexts, Vec<(usize, usize)>> = HashMap::new();
    for (i, p) in table.paths().iter().enumerate() {
        for r in 0..n {
            let left = &p[r.saturating_sub(k)..r];
            let right = &p[r + 1..(r + 1 + k).min(n)];
            groups.entry((left, right)).or_default().push((i, r));
        }
    }
    let mut groups: Vec<_> = groups.into_values().filter(|g| g.len() > 1).collect();
    groups.sort();
    let binomials: BTreeSet<Binomial> = groups
        .par_iter()
        .flat_map_iter(|members| {
            let mut out = Vec::new();
            for (a, &(x, r)) in members.iter().enumerate() {
                for &(y, s) in &members[a + 1..] {
                    let (px, py) = (&table.paths()[x], &table.paths()[y]);
                    if px[r] == py[s] {
                        continue;
                    }
                    let mut sx = px.clone();
                    sx[r] = py[s];
                    let mut sy = py.clone();
                    sy[s] = px[r];
                    let (Some(ix), Some(iy)) = (table.index_of(&sx), table.index_of(&sy)) else {
                        continue;
                    };
                    if let Ok(b) = Binomial::from_factors(&[x, y], &[ix, iy]) {
                        out.push(b);
                    }
                }
            }
            out
        })
        .collect();
    Ok(RelationSet::from_binomials(binomials, Provenance::HomExchange))
}

/// `p_a - p_b` for paths with identical pooled block counts, `a` being the
/// first path of its class.
pub fn permutation_linear_relations(model: &Model, table: &PathTable) -> Result<RelationSet> {
    if !model.is_homogeneous() {
        return Err(Error::WrongModelKind("block-count linear relations require a homogeneous model"));
    }
    let mut classes: BTreeMap<SufficientStats, Vec<usize>> = BTreeMap::new();
    for (i, p) in table.paths().iter().enumerate() {
        classes.entry(block_counts(model, p)?).or_default().push(i);
    }
    let mut binomials = BTreeSet::new();
    for members in classes.values() {
        for &b in &members[1..] {
            binomials.insert(Binomial::from_factors(&[members[0]], &[b])?);
        }
    }
    Ok(RelationSet::from_binomials(binomials, Provenance::HomLinear))
}

/// Every family that applies to the model's homogeneity, merged.
pub fn all_relations(model: &Model, table: &PathTable) -> Result<RelationSet> {
    if model.is_homogeneous() {
        let linear = permutation_linear_relations(model, table)?;
        let mut set = linear.merge(homogeneous_family(model, table)?);
        set.slice = slice_linear_generators(model);
        Ok(set)
    } else {
        nonhomogeneous_generators(model, table)
    }
}

fn format_monomial(m: &Monomial, model: &Model, table: &PathTable) -> String {
    m.iter()
        .map(|(&i, &e)| {
            let key = table.paths().get(i).map_or_else(|| format!("#{i}"), |p| model.path_key(p));
            if e == 1 {
                format!("p_{key}")
            } else {
                format!("p_{key}^{e}")
            }
        })
        .collect::<Vec<_>>()
        .join("*")
}

/// `p_0112*p_1122 - p_0122*p_1112`.
pub fn format_binomial(b: &Binomial, model: &Model, table: &PathTable) -> String {
    format!(
        "{} - {}",
        format_monomial(&b.plus, model, table),
        format_monomial(&b.minus, model, table)
    )
}

pub fn format_variable(path: &[usize], model: &Model) -> String {
    format!("p_{}", model.path_key(path))
}

/// Reads a path variable key: `0112` (one character per label) or
/// `{a,b,c}`.
fn parse_key(key: &str, model: &Model) -> Result<Path> {
    let labels: Vec<String> = match key.strip_prefix('{').and_then(|k| k.strip_suffix('}')) {
        Some(inner) => inner.split(',').map(|s| s.trim().to_string()).collect(),
        None => key.chars().map(|c| c.to_string()).collect(),
    };
    let path = model.parse_labels(&labels)?;
    model.check_path(&path)?;
    Ok(path)
}

pub fn parse_monomial(text: &str, model: &Model, table: &PathTable) -> Result<Monomial> {
    let mut m = Monomial::new();
    for factor in text.split('*') {
        let factor = factor.trim();
        let body = factor
            .strip_prefix("p_")
            .ok_or_else(|| Error::Parse(format!("expected a variable p_..., found {factor:?}")))?;
        let (key, exp) = match body.rsplit_once('^') {
            Some((key, exp)) => {
                let exp: u32 = exp
                    .trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad exponent in {factor:?}")))?;
                (key.trim(), exp)
            }
            None => (body, 1),
        };
        let path = parse_key(key, model)?;
        let index = table
            .index_of(&path)
            .ok_or_else(|| Error::Parse(format!("{factor} is not in the path table")))?;
        *m.entry(index).or_insert(0) += exp;
    }
    Ok(m)
}

/// Parses `monomial - monomial`; the result is not canonicalized.
pub fn parse_binomial(text: &str, model: &Model, table: &PathTable) -> Result<Binomial> {
    let mut depth = 0i32;
    let mut split = None;
    for (i, c) in text.char_indices() {
        match c {
            '{' => depth += 1,
            '}' => depth -= 1,
            '-' if depth == 0 => {
                if split.is_some() {
                    return Err(Error::Parse(format!("more than one '-' in {text:?}")));
                }
                split = Some(i);
            }
            _ => {}
        }
    }
    let i = split.ok_or_else(|| Error::Parse(format!("expected 'a - b' in {text:?}")))?;
    Ok(Binomial::raw(
        parse_monomial(&text[..i], model, table)?,
        parse_monomial(&text[i + 1..], model, table)?,
    ))
}

/// One binomial per non-empty line; `#` starts a comment.
pub fn parse_binomial_list(text: &str, model: &Model, table: &PathTable) -> Result<Vec<Binomial>> {
    text.lines()
        .enumerate()
        .filter_map(|(no, line)| {
            let line = line.split('#').next().unwrap_or("").trim();
            (!line.is_empty()).then_some((no, line))
        })
        .map(|(no, line)| {
            parse_binomial(line, model, table).map_err(|e| Error::Parse(format!("line {}: {e}", no + 1)))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorRecord {
    pub path: Vec<String>,
    pub index: usize,
    pub exponent: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationRecord {
    pub text: String,
    pub plus: Vec<FactorRecord>,
    pub minus: Vec<FactorRecord>,
    pub provenance: Provenance,
}

pub fn relation_record(r: &Relation, model: &Model, table: &PathTable) -> RelationRecord {
    let factors = |m: &Monomial| {
        m.iter()
            .map(|(&index, &exponent)| FactorRecord {
                path: table.paths()[index].iter().map(|&s| model.label(s).to_string()).collect(),
                index,
                exponent,
            })
            .collect()
    };
    RelationRecord {
        text: format_binomial(&r.binomial, model, table),
        plus: factors(&r.binomial.plus),
        minus: factors(&r.binomial.minus),
        provenance: r.provenance,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::catalog;
    use crate::paths::enumerate_paths;

    fn texts(set: &RelationSet, model: &Model, table: &PathTable) -> BTreeSet<String> {
        set.binomials().map(|b| format_binomial(b, model, table)).collect()
    }

    #[test]
    fn canonical_form_removes_common_factor() {
        let b = Binomial::from_factors(&[1, 3, 4], &[4, 2, 2]).unwrap();
        assert_eq!(b.plus(), &Monomial::from([(1, 1), (3, 1)]));
        assert_eq!(b.minus(), &Monomial::from([(2, 2)]));
        assert!(matches!(Binomial::from_factors(&[2, 5], &[5, 2]), Err(Error::DegenerateBinomial)));
        // Sign flips so the side holding the smallest index leads.
        let c = Binomial::from_factors(&[2, 2], &[1, 3]).unwrap();
        assert_eq!(c, b);
        assert_eq!(canonicalize(&c).unwrap(), c);
    }

    #[test]
    fn illness_death_nonhomogeneous_generators() {
        let m = catalog::illness_death(4, false);
        let t = enumerate_paths(&m);
        let set = nonhomogeneous_generators(&m, &t).unwrap();
        let fixture = include_str!("../fixtures/illness_death_nonhom_n4.txt");
        let expected: BTreeSet<Binomial> = parse_binomial_list(fixture, &m, &t)
            .unwrap()
            .iter()
            .map(|b| canonicalize(b).unwrap())
            .collect();
        let got: BTreeSet<Binomial> = set.binomials().cloned().collect();
        assert_eq!(got, expected);
        assert_eq!(set.slice.len(), 67);
    }

    #[test]
    fn one_step_models_have_no_exchanges() {
        let m = catalog::unrestricted(3, 1, 2, false);
        let t = enumerate_paths(&m);
        assert!(nonhomogeneous_generators(&m, &t).unwrap().is_empty());
        assert!(slice_linear_generators(&m).is_empty());
    }

    #[test]
    fn survival_slice() {
        let m = catalog::survival(3, false);
        assert_eq!(slice_linear_generators(&m).len(), 5);
    }

    #[test]
    fn binary_homogeneous_family_contains_known_exchanges() {
        let m = catalog::unrestricted(2, 1, 3, true);
        let t = enumerate_paths(&m);
        let got = texts(&homogeneous_family(&m, &t).unwrap(), &m, &t);
        assert!(got.contains("p_000*p_101 - p_001*p_100"), "{got:?}");
        assert!(got.contains("p_010*p_111 - p_011*p_110"), "{got:?}");
    }

    #[test]
    fn same_path_exchange_in_illness_death() {
        let m = catalog::illness_death(4, true);
        let t = enumerate_paths(&m);
        let got = texts(&homogeneous_family(&m, &t).unwrap(), &m, &t);
        assert!(got.contains("p_0001*p_0111 - p_0011^2"), "{got:?}");
    }

    #[test]
    fn permutation_linears() {
        let m = catalog::illness_death(4, true);
        let t = enumerate_paths(&m);
        assert!(permutation_linear_relations(&m, &t).unwrap().is_empty());

        let b = catalog::unrestricted(2, 1, 4, true);
        let tb = enumerate_paths(&b);
        let got = texts(&permutation_linear_relations(&b, &tb).unwrap(), &b, &tb);
        assert!(got.contains("p_0010 - p_0100"), "{got:?}");
        assert!(!got.iter().any(|s| s.contains("0101")));

        let non = b.with_homogeneous(false);
        assert!(permutation_linear_relations(&non, &tb).is_err());
    }

    #[test]
    fn wrong_kind_is_rejected() {
        let m = catalog::illness_death(4, true);
        let t = enumerate_paths(&m);
        assert!(nonhomogeneous_generators(&m, &t).is_err());
        assert!(homogeneous_family(&m.with_homogeneous(false), &t).is_err());
    }

    #[test]
    fn text_round_trip() {
        let m = catalog::illness_death(4, true);
        let t = enumerate_paths(&m);
        let b = parse_binomial("p_0011^2 - p_0001*p_0111", &m, &t).unwrap();
        let c = canonicalize(&b).unwrap();
        let text = format_binomial(&c, &m, &t);
        assert_eq!(text, "p_0001*p_0111 - p_0011^2");
        assert_eq!(canonicalize(&parse_binomial(&text, &m, &t).unwrap()).unwrap(), c);
        assert!(parse_binomial("p_1000 - p_0000", &m, &t).is_err());
        assert!(parse_binomial("p_0000 p_0001", &m, &t).is_err());
    }

    #[test]
    fn braced_keys_for_long_labels() {
        let spec = crate::model::ModelSpec::from_rules(&crate::model::Rules {
            states: vec!["V".into(), "C".into(), "pad".into()],
            order: 1,
            horizon: 3,
            absorbing: vec!["pad".into()],
            ..Default::default()
        })
        .unwrap();
        let m = crate::model::validate_model(&spec).unwrap();
        let t = enumerate_paths(&m);
        let b = parse_binomial("p_{V,C,pad} - p_{C,C,pad}", &m, &t).unwrap();
        let text = format_binomial(&canonicalize(&b).unwrap(), &m, &t);
        assert_eq!(text, "p_{V,C,pad} - p_{C,C,pad}");
    }
}
