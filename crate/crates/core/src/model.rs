//! Model specifications, exact parameter points and the monomial
//! parametrization of path probabilities.
//!
//! A model of order `k` and horizon `n` assigns every admissible path
//! `(i_1, ..., i_n)` the probability
//!
//! ```text
//! p = pi[i_1..i_k] * prod_{l = k+1}^{n} a(l)[i_{l-k} .. i_l]
//! ```
//!
//! where `a(l)` is a single pooled tensor in the homogeneous case. Time
//! indices `l` always label the transition *into* position `l`, so the first
//! transition of a first-order chain is `a(2)`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, ParameterViolation, Result};

/// A sequence of state indices (declaration order of the model's labels).
pub type Path = Vec<usize>;

/// Exponents of a monomial in the parameter symbols.
pub type ExponentVector = BTreeMap<Symbol, u32>;

const MAX_WINDOWS: usize = 1 << 22;

/// Raw, unvalidated model description with explicit allowed-successor lists.
///
/// Histories missing from `allowed` have no successors.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub states: Vec<String>,
    pub order: usize,
    pub horizon: usize,
    pub homogeneous: bool,
    pub allowed: BTreeMap<Vec<String>, Vec<String>>,
    pub initial: Vec<Vec<String>>,
}

/// Shorthand description that expands into a [`ModelSpec`].
///
/// * a `forbid` entry of two labels `[s, t]` forbids `s -> t` after every
///   history ending in `s`; an entry of `k + 1` labels forbids that window only;
/// * an absorbing state only allows itself after any history ending in it;
/// * initial blocks default to every `k`-block over `initial_states` (all
///   states when unset) whose internal steps respect the pairwise rules.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Rules {
    pub states: Vec<String>,
    pub order: usize,
    pub horizon: usize,
    pub homogeneous: bool,
    pub forbid: Vec<Vec<String>>,
    pub absorbing: Vec<String>,
    pub initial_states: Option<Vec<String>>,
    pub initial_blocks: Option<Vec<Vec<String>>>,
}

impl ModelSpec {
    pub fn from_rules(rules: &Rules) -> Result<ModelSpec> {
        let index: HashMap<&str, usize> = rules
            .states
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_str(), i))
            .collect();
        let lookup = |label: &String| -> Result<usize> {
            index
                .get(label.as_str())
                .copied()
                .ok_or_else(|| Error::InvalidModel(vec![format!("unknown state label {label:?}")]))
        };
        let s = rules.states.len();
        let k = rules.order;
        if s == 0 || k == 0 {
            return Err(Error::InvalidModel(vec![
                "a model needs at least one state and order >= 1".into(),
            ]));
        }
        if s.checked_pow(k as u32 + 1).is_none_or(|w| w > MAX_WINDOWS) {
            return Err(Error::InvalidModel(vec![format!(
                "{s} states at order {k} is too large to tabulate"
            )]));
        }

        let mut pair_forbidden = vec![false; s * s];
        let mut window_forbidden = BTreeSet::new();
        for entry in &rules.forbid {
            let idx = entry.iter().map(lookup).collect::<Result<Vec<_>>>()?;
            if idx.len() == 2 {
                pair_forbidden[idx[0] * s + idx[1]] = true;
            }
            if idx.len() == k + 1 {
                window_forbidden.insert(idx);
            } else if idx.len() != 2 {
                return Err(Error::InvalidModel(vec![format!(
                    "forbid entry {entry:?} must have 2 or {} labels",
                    k + 1
                )]));
            }
        }
        let absorbing: BTreeSet<usize> = rules.absorbing.iter().map(lookup).collect::<Result<_>>()?;
        let pair_ok = |from: usize, to: usize| {
            if absorbing.contains(&from) {
                from == to
            } else {
                !pair_forbidden[from * s + to]
            }
        };

        let mut allowed = BTreeMap::new();
        for rank in 0..s.pow(k as u32) {
            let history = unrank(rank, s, k);
            let last = history[k - 1];
            let next: Vec<String> = (0..s)
                .filter(|&t| {
                    let mut window = history.clone();
                    window.push(t);
                    pair_ok(last, t) && !window_forbidden.contains(&window)
                })
                .map(|t| rules.states[t].clone())
                .collect();
            allowed.insert(history.iter().map(|&i| rules.states[i].clone()).collect(), next);
        }

        let initial = match &rules.initial_blocks {
            Some(blocks) => blocks.clone(),
            None => {
                let starts: BTreeSet<usize> = match &rules.initial_states {
                    Some(labels) => labels.iter().map(lookup).collect::<Result<_>>()?,
                    None => (0..s).collect(),
                };
                (0..s.pow(k as u32))
                    .map(|rank| unrank(rank, s, k))
                    .filter(|block| {
                        block.iter().all(|i| starts.contains(i))
                            && block.windows(2).all(|w| pair_ok(w[0], w[1]))
                    })
                    .map(|block| block.iter().map(|&i| rules.states[i].clone()).collect())
                    .collect()
            }
        };

        Ok(ModelSpec {
            states: rules.states.clone(),
            order: k,
            horizon: rules.horizon,
            homogeneous: rules.homogeneous,
            allowed,
            initial,
        })
    }
}

/// Parameter symbol of the monomial parametrization.
///
/// The derived order is the canonical row order of design matrices: initial
/// blocks first, then transitions by `(time, window)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Symbol {
    Initial(Vec<usize>),
    /// `time` is `None` for pooled (homogeneous) parameters.
    Transition { time: Option<usize>, window: Vec<usize> },
}

/// A validated model: the handle every other operation works with.
#[derive(Debug, Clone)]
pub struct Model {
    labels: Vec<String>,
    index: HashMap<String, usize>,
    order: usize,
    horizon: usize,
    homogeneous: bool,
    allowed: Vec<Vec<usize>>,
    window_allowed: Vec<bool>,
    initial: Vec<Vec<usize>>,
    initial_allowed: Vec<bool>,
    warnings: Vec<String>,
}

fn unrank(mut rank: usize, base: usize, len: usize) -> Vec<usize> {
    let mut out = vec![0; len];
    for slot in out.iter_mut().rev() {
        *slot = rank % base;
        rank /= base;
    }
    out
}

/// Checks a raw specification and builds the indexed [`Model`].
///
/// Unreachable states are reported through [`Model::warnings`]; everything
/// else that is wrong is collected into one [`Error::InvalidModel`].
pub fn validate_model(spec: &ModelSpec) -> Result<Model> {
    let mut errors = Vec::new();
    let mut index = HashMap::new();
    if spec.states.is_empty() {
        errors.push("state set is empty".to_string());
    }
    for (i, label) in spec.states.iter().enumerate() {
        if label.is_empty() {
            errors.push("state labels must be non-empty".to_string());
        }
        if index.insert(label.clone(), i).is_some() {
            errors.push(format!("duplicate state label {label:?}"));
        }
    }
    if spec.order == 0 {
        errors.push("order k must be at least 1".to_string());
    }
    if spec.horizon < spec.order + 1 {
        errors.push(format!(
            "horizon n = {} must be at least k + 1 = {}",
            spec.horizon,
            spec.order + 1
        ));
    }
    let s = spec.states.len();
    let k = spec.order;
    if !errors.is_empty() {
        return Err(Error::InvalidModel(errors));
    }
    let num_windows = match s.checked_pow(k as u32 + 1) {
        Some(w) if w <= MAX_WINDOWS => w,
        _ => {
            return Err(Error::InvalidModel(vec![format!(
                "{s} states at order {k} is too large to tabulate"
            )]))
        }
    };
    let num_histories = num_windows / s;

    let resolve = |labels: &[String], what: &str, errors: &mut Vec<String>| -> Option<Vec<usize>> {
        let mut out = Vec::with_capacity(labels.len());
        for label in labels {
            match index.get(label) {
                Some(&i) => out.push(i),
                None => {
                    errors.push(format!("unknown state label {label:?} in {what}"));
                    return None;
                }
            }
        }
        Some(out)
    };

    let mut allowed = vec![Vec::new(); num_histories];
    let mut window_allowed = vec![false; num_windows];
    for (history, next) in &spec.allowed {
        if history.len() != k {
            errors.push(format!("allowed-successor key {history:?} must have {k} labels"));
            continue;
        }
        let Some(h) = resolve(history, "an allowed-successor key", &mut errors) else { continue };
        let Some(mut nx) = resolve(next, "an allowed-successor list", &mut errors) else { continue };
        nx.sort_unstable();
        nx.dedup();
        let rank = h.iter().fold(0, |acc, &i| acc * s + i);
        for &t in &nx {
            window_allowed[rank * s + t] = true;
        }
        allowed[rank] = nx;
    }

    let mut initial_set = BTreeSet::new();
    for block in &spec.initial {
        if block.len() != k {
            errors.push(format!("initial block {block:?} must have {k} labels"));
            continue;
        }
        if let Some(b) = resolve(block, "an initial block", &mut errors) {
            initial_set.insert(b);
        }
    }
    if initial_set.is_empty() {
        errors.push("no allowed initial block".to_string());
    }
    let initial: Vec<Vec<usize>> = initial_set.into_iter().collect();
    let mut initial_allowed = vec![false; num_histories];
    for block in &initial {
        initial_allowed[block.iter().fold(0, |acc, &i| acc * s + i)] = true;
    }
    if !errors.is_empty() {
        return Err(Error::InvalidModel(errors));
    }

    // Layered reachability: histories occupying positions (t-k+1 ..= t).
    let mut seen_states = BTreeSet::new();
    let mut frontier: BTreeSet<usize> = initial
        .iter()
        .map(|b| b.iter().fold(0, |acc, &i| acc * s + i))
        .collect();
    let mut dead_ends = BTreeSet::new();
    for block in &initial {
        seen_states.extend(block.iter().copied());
    }
    for t in k..spec.horizon {
        let mut next_frontier = BTreeSet::new();
        for &h in &frontier {
            if allowed[h].is_empty() {
                dead_ends.insert((h, t));
            }
            for &nx in &allowed[h] {
                seen_states.insert(nx);
                next_frontier.insert((h * s + nx) % num_histories);
            }
        }
        frontier = next_frontier;
    }
    for (h, t) in dead_ends {
        let labels: Vec<&str> = unrank(h, s, k).iter().map(|&i| spec.states[i].as_str()).collect();
        errors.push(format!(
            "history ({}) is reachable at position {t} but has no allowed successor",
            labels.join(",")
        ));
    }
    if !errors.is_empty() {
        return Err(Error::InvalidModel(errors));
    }
    let warnings = (0..s)
        .filter(|i| !seen_states.contains(i))
        .map(|i| format!("state {:?} is unreachable", spec.states[i]))
        .collect();

    Ok(Model {
        labels: spec.states.clone(),
        index,
        order: k,
        horizon: spec.horizon,
        homogeneous: spec.homogeneous,
        allowed,
        window_allowed,
        initial,
        initial_allowed,
        warnings,
    })
}

impl Model {
    pub fn num_states(&self) -> usize {
        self.labels.len()
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn is_homogeneous(&self) -> bool {
        self.homogeneous
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, state: usize) -> &str {
        &self.labels[state]
    }

    pub fn state_index(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn num_histories(&self) -> usize {
        self.allowed.len()
    }

    pub fn num_windows(&self) -> usize {
        self.window_allowed.len()
    }

    /// Lexicographic rank of a block of any length over the state set.
    pub fn rank(&self, block: &[usize]) -> usize {
        let s = self.num_states();
        block.iter().fold(0, |acc, &i| acc * s + i)
    }

    pub fn unrank(&self, rank: usize, len: usize) -> Vec<usize> {
        unrank(rank, self.num_states(), len)
    }

    pub fn allowed_next(&self, history: &[usize]) -> &[usize] {
        &self.allowed[self.rank(history)]
    }

    pub fn is_allowed_window(&self, window: &[usize]) -> bool {
        self.window_allowed[self.rank(window)]
    }

    pub fn initial_blocks(&self) -> &[Vec<usize>] {
        &self.initial
    }

    pub fn is_initial(&self, block: &[usize]) -> bool {
        self.initial_allowed[self.rank(block)]
    }

    /// Number of transition tensors: one when pooled, `n - k` otherwise.
    pub fn num_slots(&self) -> usize {
        if self.homogeneous {
            1
        } else {
            self.horizon - self.order
        }
    }

    /// Slot holding `a(time)`; `time` ranges over `k+1 ..= n` (or beyond for
    /// pooled parameters, which share slot 0).
    pub fn slot(&self, time: usize) -> usize {
        if self.homogeneous {
            0
        } else {
            time - self.order - 1
        }
    }

    pub fn slot_time(&self, slot: usize) -> Option<usize> {
        (!self.homogeneous).then_some(slot + self.order + 1)
    }

    /// `Ok(())` iff the path has length `n`, an allowed initial block and
    /// only allowed windows.
    pub fn check_path(&self, path: &[usize]) -> Result<()> {
        self.check_sequence(path, Some(self.horizon))
    }

    /// Like [`Model::check_path`] but for sequences of any length `>= k + 1`
    /// when `len` is `None`.
    pub fn check_sequence(&self, seq: &[usize], len: Option<usize>) -> Result<()> {
        let fail = |reason: String| Error::InadmissiblePath {
            path: self.path_csv(seq),
            reason,
        };
        if let Some(len) = len {
            if seq.len() != len {
                return Err(fail(format!("length {} differs from {len}", seq.len())));
            }
        }
        if seq.len() < self.order + 1 {
            return Err(fail(format!("shorter than k + 1 = {}", self.order + 1)));
        }
        if let Some(&bad) = seq.iter().find(|&&i| i >= self.num_states()) {
            return Err(fail(format!("state index {bad} out of range")));
        }
        if !self.is_initial(&seq[..self.order]) {
            return Err(fail("initial block is not allowed".into()));
        }
        for (offset, window) in seq.windows(self.order + 1).enumerate() {
            if !self.is_allowed_window(window) {
                return Err(fail(format!(
                    "transition into position {} is forbidden",
                    offset + self.order + 1
                )));
            }
        }
        Ok(())
    }

    pub fn is_admissible(&self, path: &[usize]) -> bool {
        self.check_path(path).is_ok()
    }

    pub fn parse_labels<S: AsRef<str>>(&self, labels: &[S]) -> Result<Vec<usize>> {
        labels
            .iter()
            .map(|l| {
                let l = l.as_ref().trim();
                self.state_index(l)
                    .ok_or_else(|| Error::Parse(format!("unknown state label {l:?}")))
            })
            .collect()
    }

    /// Compact key used in variable names: `0112` when every label is one
    /// character, `{a,b,c}` otherwise.
    pub fn path_key(&self, path: &[usize]) -> String {
        if self.labels.iter().all(|l| l.chars().count() == 1) {
            path.iter().map(|&i| self.labels[i].as_str()).collect()
        } else {
            format!("{{{}}}", self.path_csv(path))
        }
    }

    pub fn path_csv(&self, path: &[usize]) -> String {
        path.iter()
            .map(|&i| self.labels.get(i).map_or("?", |l| l.as_str()))
            .collect::<Vec<_>>()
            .join(",")
    }

    pub fn format_symbol(&self, symbol: &Symbol) -> String {
        match symbol {
            Symbol::Initial(block) => format!("pi_{}", self.path_key(block)),
            Symbol::Transition { time: None, window } => format!("a_{}", self.path_key(window)),
            Symbol::Transition { time: Some(t), window } => {
                format!("a({t})_{}", self.path_key(window))
            }
        }
    }

    /// Canonical parameter symbols: allowed initial blocks, then allowed
    /// windows per time (or pooled).
    pub fn symbols(&self) -> Vec<Symbol> {
        let mut out: Vec<Symbol> = self.initial.iter().cloned().map(Symbol::Initial).collect();
        for slot in 0..self.num_slots() {
            let time = self.slot_time(slot);
            for rank in 0..self.num_windows() {
                if self.window_allowed[rank] {
                    out.push(Symbol::Transition {
                        time,
                        window: self.unrank(rank, self.order + 1),
                    });
                }
            }
        }
        out
    }

    /// The unrestricted model on the same states, order, horizon and
    /// homogeneity: every transition and every initial block allowed.
    pub fn companion(&self) -> Model {
        let s = self.num_states();
        Model {
            labels: self.labels.clone(),
            index: self.index.clone(),
            order: self.order,
            horizon: self.horizon,
            homogeneous: self.homogeneous,
            allowed: vec![(0..s).collect(); self.num_histories()],
            window_allowed: vec![true; self.num_windows()],
            initial: (0..self.num_histories()).map(|r| self.unrank(r, self.order)).collect(),
            initial_allowed: vec![true; self.num_histories()],
            warnings: Vec::new(),
        }
    }

    pub fn with_homogeneous(&self, homogeneous: bool) -> Model {
        Model { homogeneous, ..self.clone() }
    }

    pub fn with_horizon(&self, horizon: usize) -> Result<Model> {
        let mut spec = self.to_spec();
        spec.horizon = horizon;
        validate_model(&spec)
    }

    pub fn to_spec(&self) -> ModelSpec {
        let k = self.order;
        let allowed = (0..self.num_histories())
            .map(|rank| {
                let history = self.unrank(rank, k);
                (
                    history.iter().map(|&i| self.labels[i].clone()).collect(),
                    self.allowed[rank].iter().map(|&i| self.labels[i].clone()).collect(),
                )
            })
            .collect();
        ModelSpec {
            states: self.labels.clone(),
            order: k,
            horizon: self.horizon,
            homogeneous: self.homogeneous,
            allowed,
            initial: self
                .initial
                .iter()
                .map(|b| b.iter().map(|&i| self.labels[i].clone()).collect())
                .collect(),
        }
    }
}

/// Exponents of the path monomial in the parameter symbols: one on the
/// initial block and one per `(k+1)`-window, pooled across time when the model
/// is homogeneous.
pub fn symbolic_path_monomial(model: &Model, path: &[usize]) -> Result<ExponentVector> {
    model.check_path(path)?;
    Ok(path_monomial_unchecked(model, path))
}

pub(crate) fn path_monomial_unchecked(model: &Model, path: &[usize]) -> ExponentVector {
    let k = model.order();
    let mut out = ExponentVector::new();
    out.insert(Symbol::Initial(path[..k].to_vec()), 1);
    for (offset, window) in path.windows(k + 1).enumerate() {
        let time = (!model.is_homogeneous()).then_some(offset + k + 1);
        *out.entry(Symbol::Transition { time, window: window.to_vec() }).or_insert(0) += 1;
    }
    out
}

/// Exact values for every initial block and every transition entry, dense by
/// lexicographic rank. Entries outside the model's support are kept at zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParameterPoint {
    pub initial: Vec<BigRational>,
    /// `transitions[slot][window rank]`, see [`Model::slot`].
    pub transitions: Vec<Vec<BigRational>>,
}

impl ParameterPoint {
    pub fn zeros(model: &Model) -> Self {
        ParameterPoint {
            initial: vec![BigRational::zero(); model.num_histories()],
            transitions: vec![vec![BigRational::zero(); model.num_windows()]; model.num_slots()],
        }
    }

    /// Fills every symbol of [`Model::symbols`] from `value`.
    pub fn from_fn(model: &Model, mut value: impl FnMut(&Symbol) -> BigRational) -> Self {
        let mut point = Self::zeros(model);
        for symbol in model.symbols() {
            let v = value(&symbol);
            *point.entry_mut(model, &symbol) = v;
        }
        point
    }

    /// Uniform initial distribution and uniform rows over allowed successors.
    pub fn uniform(model: &Model) -> Self {
        let blocks = model.initial_blocks().len();
        Self::from_fn(model, |symbol| match symbol {
            Symbol::Initial(_) => BigRational::new(BigInt::one(), BigInt::from(blocks)),
            Symbol::Transition { window, .. } => {
                let n = model.allowed_next(&window[..model.order()]).len();
                BigRational::new(BigInt::one(), BigInt::from(n))
            }
        })
    }

    pub fn get(&self, model: &Model, symbol: &Symbol) -> &BigRational {
        match symbol {
            Symbol::Initial(block) => &self.initial[model.rank(block)],
            Symbol::Transition { time, window } => {
                let slot = time.map_or(0, |t| model.slot(t));
                &self.transitions[slot][model.rank(window)]
            }
        }
    }

    pub fn entry_mut(&mut self, model: &Model, symbol: &Symbol) -> &mut BigRational {
        match symbol {
            Symbol::Initial(block) => &mut self.initial[model.rank(block)],
            Symbol::Transition { time, window } => {
                let slot = time.map_or(0, |t| model.slot(t));
                &mut self.transitions[slot][model.rank(window)]
            }
        }
    }

    /// The product of the path's factors with no admissibility check; a
    /// forbidden step picks up its zero entry.
    pub fn evaluate(&self, model: &Model, path: &[usize]) -> BigRational {
        let k = model.order();
        let mut value = self.initial[model.rank(&path[..k])].clone();
        for (offset, window) in path.windows(k + 1).enumerate() {
            if value.is_zero() {
                break;
            }
            let slot = model.slot(offset + k + 1);
            value *= &self.transitions[slot][model.rank(window)];
        }
        value
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::Initial(block) => write!(f, "pi{block:?}"),
            Symbol::Transition { time: None, window } => write!(f, "a{window:?}"),
            Symbol::Transition { time: Some(t), window } => write!(f, "a({t}){window:?}"),
        }
    }
}

/// Checks nonnegativity, zeros outside the support and exact unit row sums.
pub fn validate_parameters(params: &ParameterPoint, model: &Model) -> Result<()> {
    let mut violations = Vec::new();
    if params.initial.len() != model.num_histories() {
        violations.push(ParameterViolation::Shape(format!(
            "{} initial entries, expected {}",
            params.initial.len(),
            model.num_histories()
        )));
    }
    if params.transitions.len() != model.num_slots()
        || params.transitions.iter().any(|t| t.len() != model.num_windows())
    {
        violations.push(ParameterViolation::Shape(format!(
            "transition tensors must be {} x {}",
            model.num_slots(),
            model.num_windows()
        )));
    }
    if !violations.is_empty() {
        return Err(Error::InvalidParameters(violations));
    }
    let k = model.order();
    let one = BigRational::one();
    let check_entry = |name: String, value: &BigRational, allowed: bool, out: &mut Vec<_>| {
        if value.is_negative() {
            out.push(ParameterViolation::Negative { entry: name, value: value.clone() });
        } else if !allowed && !value.is_zero() {
            out.push(ParameterViolation::ForbiddenNonzero { entry: name, value: value.clone() });
        }
    };

    let mut initial_sum = BigRational::zero();
    for (rank, value) in params.initial.iter().enumerate() {
        let block = model.unrank(rank, k);
        let name = model.format_symbol(&Symbol::Initial(block.clone()));
        check_entry(name, value, model.is_initial(&block), &mut violations);
        initial_sum += value;
    }
    if initial_sum != one {
        violations.push(ParameterViolation::RowSum {
            row: "initial distribution".into(),
            deficit: &one - &initial_sum,
            sum: initial_sum,
        });
    }

    let s = model.num_states();
    for (slot, tensor) in params.transitions.iter().enumerate() {
        let time = model.slot_time(slot);
        for h in 0..model.num_histories() {
            let history = model.unrank(h, k);
            let mut sum = BigRational::zero();
            for t in 0..s {
                let mut window = history.clone();
                window.push(t);
                let value = &tensor[h * s + t];
                let name = model.format_symbol(&Symbol::Transition { time, window: window.clone() });
                check_entry(name, value, model.is_allowed_window(&window), &mut violations);
                sum += value;
            }
            if !model.allowed_next(&history).is_empty() && sum != one {
                let row = match time {
                    Some(t) => format!("row {} at time {t}", model.path_key(&history)),
                    None => format!("row {}", model.path_key(&history)),
                };
                violations.push(ParameterViolation::RowSum { row, deficit: &one - &sum, sum });
            }
        }
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(Error::InvalidParameters(violations))
    }
}

/// Exact probability of an admissible path. Inadmissible paths are an error
/// rather than probability zero.
pub fn path_probability(model: &Model, params: &ParameterPoint, path: &[usize]) -> Result<BigRational> {
    model.check_path(path)?;
    Ok(params.evaluate(model, path))
}

/// Named models used throughout the examples and tests.
pub mod catalog {
    use super::{validate_model, Model, ModelSpec, Rules};

    fn labels(n: usize) -> Vec<String> {
        (0..n).map(|i| i.to_string()).collect()
    }

    fn build(rules: Rules) -> Model {
        let spec = ModelSpec::from_rules(&rules).expect("catalog rules are well formed");
        validate_model(&spec).expect("catalog models are valid")
    }

    /// Every transition and initial block allowed on states `0..states`.
    pub fn unrestricted(states: usize, order: usize, horizon: usize, homogeneous: bool) -> Model {
        build(Rules {
            states: labels(states),
            order,
            horizon,
            homogeneous,
            ..Rules::default()
        })
    }

    /// States {0, 1, 2}: `1 -> 0` forbidden, `2` absorbing, start in 0 or 1.
    pub fn illness_death(horizon: usize, homogeneous: bool) -> Model {
        build(Rules {
            states: labels(3),
            order: 1,
            horizon,
            homogeneous,
            forbid: vec![vec!["1".into(), "0".into()]],
            absorbing: vec!["2".into()],
            initial_states: Some(vec!["0".into(), "1".into()]),
            ..Rules::default()
        })
    }

    /// Illness-death with the recovery transition `1 -> 0` allowed.
    pub fn reversible_illness_death(horizon: usize, homogeneous: bool) -> Model {
        build(Rules {
            states: labels(3),
            order: 1,
            horizon,
            homogeneous,
            absorbing: vec!["2".into()],
            initial_states: Some(vec!["0".into(), "1".into()]),
            ..Rules::default()
        })
    }

    /// Alive (0) to dead (1), starting alive.
    pub fn survival(horizon: usize, homogeneous: bool) -> Model {
        build(Rules {
            states: labels(2),
            order: 1,
            horizon,
            homogeneous,
            absorbing: vec!["1".into()],
            initial_states: Some(vec!["0".into()]),
            ..Rules::default()
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    fn path(model: &Model, labels: &str) -> Path {
        let parts: Vec<String> = labels.chars().map(|c| c.to_string()).collect();
        model.parse_labels(&parts).unwrap()
    }

    #[test]
    fn illness_death_is_valid() {
        let m = catalog::illness_death(4, true);
        assert_eq!(m.allowed_next(&[1]), &[1, 2]);
        assert_eq!(m.allowed_next(&[2]), &[2]);
        assert_eq!(m.initial_blocks(), &[vec![0], vec![1]]);
        assert!(m.warnings().is_empty());
    }

    #[test]
    fn single_state_chain_is_valid() {
        let m = catalog::unrestricted(1, 1, 3, true);
        assert_eq!(m.allowed_next(&[0]), &[0]);
    }

    #[test]
    fn reachable_dead_end_is_rejected() {
        let spec = ModelSpec::from_rules(&Rules {
            states: vec!["0".into(), "1".into()],
            order: 1,
            horizon: 3,
            forbid: vec![vec!["0".into(), "0".into()], vec!["0".into(), "1".into()]],
            ..Rules::default()
        })
        .unwrap();
        let err = validate_model(&spec).unwrap_err();
        assert!(err.to_string().contains("no allowed successor"), "{err}");
    }

    #[test]
    fn duplicate_labels_and_empty_initial_are_rejected() {
        let mut spec = catalog::illness_death(4, true).to_spec();
        spec.states[1] = "0".into();
        let err = validate_model(&spec).unwrap_err().to_string();
        assert!(err.contains("duplicate"), "{err}");

        let mut spec = catalog::illness_death(4, true).to_spec();
        spec.initial.clear();
        let err = validate_model(&spec).unwrap_err().to_string();
        assert!(err.contains("no allowed initial block"), "{err}");
    }

    #[test]
    fn unreachable_state_is_only_a_warning() {
        let spec = ModelSpec::from_rules(&Rules {
            states: vec!["0".into(), "1".into(), "2".into()],
            order: 1,
            horizon: 3,
            forbid: vec![vec!["0".into(), "2".into()], vec!["1".into(), "2".into()]],
            initial_states: Some(vec!["0".into(), "1".into()]),
            ..Rules::default()
        })
        .unwrap();
        let m = validate_model(&spec).unwrap();
        assert_eq!(m.warnings().len(), 1);
    }

    #[test]
    fn second_order_initial_blocks_respect_pair_rules() {
        let spec = ModelSpec::from_rules(&Rules {
            states: vec!["0".into(), "1".into(), "2".into()],
            order: 2,
            horizon: 4,
            forbid: vec![vec!["1".into(), "0".into()]],
            absorbing: vec!["2".into()],
            initial_states: Some(vec!["0".into(), "1".into()]),
            ..Rules::default()
        })
        .unwrap();
        let m = validate_model(&spec).unwrap();
        assert_eq!(m.initial_blocks(), &[vec![0, 0], vec![0, 1], vec![1, 1]]);
        assert_eq!(m.allowed_next(&[0, 2]), &[2]);
    }

    #[test]
    fn deficit_is_reported_exactly() {
        let m = catalog::illness_death(4, true);
        let mut p = ParameterPoint::uniform(&m);
        assert!(validate_parameters(&p, &m).is_ok());
        *p.entry_mut(&m, &Symbol::Transition { time: None, window: vec![0, 2] }) = ratio(7, 30);
        let err = validate_parameters(&p, &m).unwrap_err();
        let Error::InvalidParameters(v) = err else { panic!() };
        assert_eq!(v.len(), 1);
        match &v[0] {
            ParameterViolation::RowSum { deficit, .. } => assert_eq!(deficit, &ratio(1, 10)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn forbidden_entries_must_be_zero() {
        let m = catalog::illness_death(4, false);
        let mut p = ParameterPoint::uniform(&m);
        *p.entry_mut(&m, &Symbol::Transition { time: Some(3), window: vec![1, 0] }) = ratio(1, 2);
        let msg = validate_parameters(&p, &m).unwrap_err().to_string();
        assert!(msg.contains("forbidden"), "{msg}");
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let m = catalog::illness_death(4, false);
        let p = ParameterPoint::uniform(&catalog::illness_death(4, true));
        assert!(validate_parameters(&p, &m).unwrap_err().to_string().contains("shape"));
    }

    #[test]
    fn monomials_follow_the_time_convention() {
        let hom = catalog::illness_death(4, true);
        let mono = symbolic_path_monomial(&hom, &path(&hom, "0001")).unwrap();
        let expected: ExponentVector = [
            (Symbol::Initial(vec![0]), 1),
            (Symbol::Transition { time: None, window: vec![0, 0] }, 2),
            (Symbol::Transition { time: None, window: vec![0, 1] }, 1),
        ]
        .into_iter()
        .collect();
        assert_eq!(mono, expected);

        let non = catalog::illness_death(4, false);
        let mono = symbolic_path_monomial(&non, &path(&non, "0001")).unwrap();
        let expected: ExponentVector = [
            (Symbol::Initial(vec![0]), 1),
            (Symbol::Transition { time: Some(2), window: vec![0, 0] }, 1),
            (Symbol::Transition { time: Some(3), window: vec![0, 0] }, 1),
            (Symbol::Transition { time: Some(4), window: vec![0, 1] }, 1),
        ]
        .into_iter()
        .collect();
        assert_eq!(mono, expected);
    }

    #[test]
    fn inadmissible_paths_are_errors_not_zero() {
        let m = catalog::illness_death(4, true);
        let p = ParameterPoint::uniform(&m);
        assert!(path_probability(&m, &p, &path(&m, "0110")).is_err());
        assert!(path_probability(&m, &p, &path(&m, "2222")).is_err());
        assert!(path_probability(&m, &p, &path(&m, "012")).is_err());
        assert!(symbolic_path_monomial(&m, &path(&m, "1000")).is_err());
        // Forbidden steps evaluate to an exact zero when bypassing the check.
        assert!(p.evaluate(&m, &path(&m, "0110")).is_zero());
    }

    #[test]
    fn point_mass_chain_has_probability_one() {
        let m = catalog::unrestricted(2, 1, 4, true);
        let mut p = ParameterPoint::zeros(&m);
        p.initial[0] = ratio(1, 1);
        *p.entry_mut(&m, &Symbol::Transition { time: None, window: vec![0, 1] }) = ratio(1, 1);
        *p.entry_mut(&m, &Symbol::Transition { time: None, window: vec![1, 0] }) = ratio(1, 1);
        assert!(validate_parameters(&p, &m).is_ok());
        assert_eq!(path_probability(&m, &p, &[0, 1, 0, 1]).unwrap(), ratio(1, 1));
    }

    #[test]
    fn illness_death_path_matches_table_row() {
        let m = catalog::illness_death(4, true);
        let p = ParameterPoint::from_fn(&m, |s| match s {
            Symbol::Initial(b) if b == &[0] => ratio(2, 3),
            Symbol::Initial(_) => ratio(1, 3),
            Symbol::Transition { window, .. } => match window.as_slice() {
                [0, 0] => ratio(1, 2),
                [0, 1] => ratio(1, 3),
                [0, 2] => ratio(1, 6),
                [1, 1] => ratio(3, 4),
                [1, 2] => ratio(1, 4),
                _ => ratio(1, 1),
            },
        });
        validate_parameters(&p, &m).unwrap();
        // pi_0 a_01 a_12 a_22
        let expected = ratio(2, 3) * ratio(1, 3) * ratio(1, 4) * ratio(1, 1);
        assert_eq!(path_probability(&m, &p, &path(&m, "0122")).unwrap(), expected);
    }

    #[test]
    fn symbols_are_in_canonical_order() {
        let m = catalog::unrestricted(2, 1, 3, false);
        let symbols = m.symbols();
        assert_eq!(symbols.len(), 10);
        let mut sorted = symbols.clone();
        sorted.sort();
        assert_eq!(symbols, sorted);
        assert_eq!(m.format_symbol(&symbols[2]), "a(2)_00");
    }

    #[test]
    fn spec_round_trips_through_model() {
        let m = catalog::reversible_illness_death(4, false);
        let again = validate_model(&m.to_spec()).unwrap();
        assert_eq!(again.to_spec(), m.to_spec());
    }
}
