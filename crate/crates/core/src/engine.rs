//! Fixpoint semantics.
//!
//! An [`Interpretation`] stores, per atom, the lower bound of `a` and the
//! lower bound of `~a`. The intervals follow from the coupling
//! `I(a) = ¬I(~a)`: `I(a) = [lower(a), N - lower(~a)]`. Rules only ever raise
//! lower bounds, so a head `a:[l,u]` raises `lower(a)` to `l` and
//! `lower(~a)` to `N - u`. A state whose two lower bounds add up to more than
//! `N` for some atom is *conflicted*; it is kept around only so the `incon`
//! detectors can see it and is never read back as a lattice element.
//!
//! One application of `T` updates every literal from the same input state.
//! [`lfp`] iterates from `⊥` and stops at the first conflict;
//! [`check_consistency`] adds the `incon` detectors, keeps iterating through
//! the conflict and requires both detection routes to agree.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::EngineError;
use crate::lattice::{Interval, LatticeConfig};
use crate::neural::activation_unchecked;
use crate::program::{
    add_incon_rules, has_incon_rules, AnnotationExpr, AtomId, BodyCondition, Literal, Program, Rule,
};

/// Largest search space [`brute_force`] accepts by default.
pub const DEFAULT_ORACLE_CAP: u128 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Interpretation {
    config: LatticeConfig,
    /// Lower-bound coordinate per literal index.
    lower: Vec<u32>,
}

impl Interpretation {
    /// `⊥` on every literal.
    pub fn bottom(config: LatticeConfig, atoms: usize) -> Self {
        Interpretation {
            config,
            lower: vec![0; 2 * atoms],
        }
    }

    pub fn bottom_for(program: &Program) -> Self {
        Self::bottom(program.config(), program.atom_count())
    }

    /// From per-literal lower-bound coordinates; conflicted pairs are allowed.
    pub fn from_lowers(config: LatticeConfig, lower: Vec<u32>) -> Option<Self> {
        let n = config.resolution();
        (lower.len() % 2 == 0 && lower.iter().all(|&l| l <= n)).then_some(Interpretation { config, lower })
    }

    /// From one interval per atom.
    pub fn from_intervals(config: LatticeConfig, atoms: &[Interval]) -> Self {
        let n = config.resolution();
        let lower = atoms.iter().flat_map(|mu| [mu.lower(), n - mu.upper()]).collect();
        Interpretation { config, lower }
    }

    pub fn config(&self) -> LatticeConfig {
        self.config
    }

    pub fn atom_count(&self) -> usize {
        self.lower.len() / 2
    }

    pub fn lowers(&self) -> &[u32] {
        &self.lower
    }

    pub fn lower(&self, lit: Literal) -> u32 {
        self.lower[lit.index()]
    }

    /// `+1` when the lower bound is at the top, `-1` otherwise.
    pub fn signed_lower(&self, lit: Literal) -> i8 {
        if self.lower(lit) == self.config.resolution() {
            1
        } else {
            -1
        }
    }

    pub fn signed_lowers(&self) -> Vec<i8> {
        let n = self.config.resolution();
        self.lower.iter().map(|&l| if l == n { 1 } else { -1 }).collect()
    }

    pub fn atom_conflicted(&self, atom: AtomId) -> bool {
        let i = 2 * atom.index();
        self.lower[i] + self.lower[i + 1] > self.config.resolution()
    }

    pub fn is_conflicted(&self) -> bool {
        (0..self.atom_count()).any(|a| self.atom_conflicted(AtomId(a as u32)))
    }

    /// `I(ℓ) = [lower(ℓ), N - lower(~ℓ)]`, or `None` when the atom is conflicted.
    pub fn interval(&self, lit: Literal) -> Option<Interval> {
        let n = self.config.resolution();
        let lo = self.lower(lit);
        let other = self.lower(lit.negate());
        (lo + other <= n).then(|| self.config.interval(lo, n - other).expect("checked bounds"))
    }

    /// `I1 ⪯ I2`: every literal's annotation is below. With the coupling this is
    /// the pointwise order on lower bounds.
    pub fn precedes(&self, other: &Interpretation) -> bool {
        self.config == other.config
            && self.lower.len() == other.lower.len()
            && self.lower.iter().zip(&other.lower).all(|(a, b)| a <= b)
    }
}

/// Two annotations in `annoSet(a)` with no common upper bound.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub atom: AtomId,
    /// Application of `T` that produced the pair.
    pub iteration: usize,
    pub first: Interval,
    pub second: Interval,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConflictReport {
    pub witnesses: Vec<Witness>,
    /// The conflicted successor state.
    pub raw: Interpretation,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Applied {
    Next(Interpretation),
    Conflict(ConflictReport),
}

/// Result of one raw application: the successor and the incompatible pairs.
#[derive(Debug, Clone)]
pub struct Step {
    pub next: Interpretation,
    pub witnesses: Vec<Witness>,
}

#[inline]
fn holds(lower: &[u32], n: u32, lit: Literal, mu: &Interval) -> bool {
    lower[lit.index()] >= mu.lower() && lower[lit.negate().index()] >= n - mu.upper()
}

/// Head annotation `(l, u)` of `rule` if its body holds in `lower`.
///
/// Binding conditions always hold; function heads are evaluated on the
/// current lower bounds.
pub(crate) fn fired_head(rule: &Rule, lower: &[u32], n: u32) -> Option<(u32, u32)> {
    match rule.head_anno {
        AnnotationExpr::Const(mu) => {
            let ok = rule.body.iter().all(|b| match &b.condition {
                BodyCondition::Annotated(m) => holds(lower, n, b.literal, m),
                BodyCondition::Binding => true,
            });
            ok.then_some((mu.lower(), mu.upper()))
        }
        AnnotationExpr::BinAnd => {
            let theta = rule.theta().expect("parametrized rule");
            let x = rule.body.iter().map(|b| if lower[b.literal.index()] == n { 1 } else { -1 });
            let f = activation_unchecked(theta.iter().map(|g| g.signed()), x);
            Some(if f == 1 { (n, n) } else { (0, n) })
        }
        AnnotationExpr::SignSum => {
            let x = lower[rule.body[0].literal.index()];
            let y = lower[rule.body[1].literal.index()];
            Some(if x + y > n { (n, n) } else { (0, n) })
        }
    }
}

fn check_shape(program: &Program, interp: &Interpretation) -> Result<(), EngineError> {
    if interp.atom_count() != program.atom_count() {
        return Err(EngineError::ShapeMismatch {
            expected: program.atom_count(),
            got: interp.atom_count(),
        });
    }
    if interp.config != program.config() {
        return Err(EngineError::Lattice(crate::error::LatticeError::ConfigMismatch {
            left: program.config(),
            right: interp.config,
        }));
    }
    Ok(())
}

/// One synchronous application of `T` that tolerates conflicted input.
///
/// Witnesses are collected per atom from `I(a)` (when it is an element), the
/// fired heads for `a`, and the negations of the fired heads for `~a`.
pub fn apply_raw(program: &Program, interp: &Interpretation, iteration: usize) -> Step {
    let n = program.config().resolution();
    let cfg = program.config();
    let lower = &interp.lower;
    let mut next = lower.clone();
    let mut anno: Vec<Vec<(u32, u32)>> = vec![Vec::new(); interp.atom_count()];
    for rule in program.rules() {
        let Some((l, u)) = fired_head(rule, lower, n) else {
            continue;
        };
        if l == 0 && u == n {
            continue;
        }
        let head = rule.head;
        let neg = head.negate();
        next[head.index()] = next[head.index()].max(l);
        next[neg.index()] = next[neg.index()].max(n - u);
        // annotation as seen from the positive literal
        let seen = if head.is_negated() { (n - u, n - l) } else { (l, u) };
        anno[head.atom().index()].push(seen);
    }
    let mut witnesses = Vec::new();
    for (a, heads) in anno.iter_mut().enumerate() {
        if heads.is_empty() {
            continue;
        }
        let atom = AtomId(a as u32);
        if let Some(cur) = interp.interval(Literal::pos(atom)) {
            heads.insert(0, (cur.lower(), cur.upper()));
        }
        'pairs: for i in 0..heads.len() {
            for j in i + 1..heads.len() {
                let (li, ui) = heads[i];
                let (lj, uj) = heads[j];
                if li.max(lj) > ui.min(uj) {
                    witnesses.push(Witness {
                        atom,
                        iteration,
                        first: cfg.interval(li, ui).expect("fired head"),
                        second: cfg.interval(lj, uj).expect("fired head"),
                    });
                    break 'pairs;
                }
            }
        }
    }
    Step {
        next: Interpretation { config: cfg, lower: next },
        witnesses,
    }
}

/// `T_Π(I)` on a conflict-free `I`.
pub fn apply_t(program: &Program, interp: &Interpretation) -> Result<Applied, EngineError> {
    check_shape(program, interp)?;
    if interp.is_conflicted() {
        return Err(EngineError::ConflictedInterpretation);
    }
    let step = apply_raw(program, interp, 1);
    if step.witnesses.is_empty() {
        debug_assert!(!step.next.is_conflicted());
        Ok(Applied::Next(step.next))
    } else {
        Ok(Applied::Conflict(ConflictReport {
            witnesses: step.witnesses,
            raw: step.next,
        }))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixpointResult {
    /// Last state reached; the last conflict-free one when iteration halted on a conflict.
    pub final_state: Interpretation,
    /// Applications of `T` performed, including the one that confirmed stationarity.
    pub iterations: usize,
    pub consistent: bool,
    pub witnesses: Vec<Witness>,
    /// First application that produced a witness.
    pub conflict_iteration: Option<usize>,
    /// First application after which `incon` was at its true top.
    pub incon_iteration: Option<usize>,
    /// `T↑0, T↑1, ...` when tracing was requested.
    pub trace: Option<Vec<Interpretation>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OnConflict {
    /// Stop at the first witness.
    Halt,
    /// Keep iterating raw states until `incon` is true or nothing changes.
    Continue,
}

/// `height(𝒯)·|ℒ|`, the most applications a consistent program needs
/// (at least 1, so an atom-free program still gets its confirming step).
pub fn iteration_bound(program: &Program) -> usize {
    (program.config().height() as usize * program.literal_count()).max(1)
}

pub fn iterate(program: &Program, on_conflict: OnConflict, traced: bool) -> Result<FixpointResult, EngineError> {
    let bound = iteration_bound(program);
    let n = program.config().resolution();
    let incon = program.incon_atom().map(Literal::pos);
    let mut cur = Interpretation::bottom_for(program);
    let mut trace = traced.then(|| vec![cur.clone()]);
    let mut witnesses = Vec::new();
    let mut conflict_iteration = None;
    for k in 1..=bound {
        let step = apply_raw(program, &cur, k);
        if !step.witnesses.is_empty() && conflict_iteration.is_none() {
            conflict_iteration = Some(k);
            witnesses = step.witnesses;
            if on_conflict == OnConflict::Halt {
                return Ok(FixpointResult {
                    final_state: cur,
                    iterations: k,
                    consistent: false,
                    witnesses,
                    conflict_iteration,
                    incon_iteration: None,
                    trace,
                });
            }
        }
        if let Some(t) = trace.as_mut() {
            t.push(step.next.clone());
        }
        let incon_true = incon.is_some_and(|l| step.next.lower(l) == n);
        let stationary = step.next == cur;
        cur = step.next;
        if incon_true || stationary {
            let incon_iteration = incon_true.then_some(k);
            return Ok(FixpointResult {
                consistent: conflict_iteration.is_none() && incon_iteration.is_none() && !cur.is_conflicted(),
                final_state: cur,
                iterations: k,
                witnesses,
                conflict_iteration,
                incon_iteration,
                trace,
            });
        }
    }
    Err(EngineError::BoundExceeded { bound })
}

/// Iterate `T` from `⊥` until it is stationary or produces a conflict.
pub fn lfp(program: &Program, traced: bool) -> Result<FixpointResult, EngineError> {
    iterate(program, OnConflict::Halt, traced)
}

/// Run the `incon`-augmented program through any conflict and cross-check
/// the two detection routes.
///
/// The witness route flags application `k` when some `annoSet(a)` holds two
/// annotations without a common upper bound; the detector route sees the
/// resulting conflicted state one application later.
pub fn check_consistency(program: &Program) -> Result<FixpointResult, EngineError> {
    let owned;
    let aug = if has_incon_rules(program) {
        program
    } else {
        owned = add_incon_rules(program)?;
        &owned
    };
    let res = iterate(aug, OnConflict::Continue, false)?;
    match (res.conflict_iteration, res.incon_iteration) {
        (None, None) => {}
        (Some(k), Some(j)) if j == k + 1 => {}
        (w, i) => {
            return Err(EngineError::DetectionMismatch(format!(
                "witness at {w:?}, incon at {i:?}"
            )))
        }
    }
    Ok(res)
}

/// `Π ⊨ ℓ:μ` iff `μ ⊑ lfp(ℓ)`; undefined on inconsistent programs.
pub fn entails(program: &Program, lit: Literal, mu: &Interval) -> Result<bool, EngineError> {
    let res = lfp(program, false)?;
    if !res.consistent {
        return Err(EngineError::Inconsistent(Box::new(res)));
    }
    let here = res.final_state.interval(lit).expect("consistent fixpoint");
    Ok(mu.leq(&here)?)
}

/// `I ⊨ ℓ:μ`.
pub fn satisfies_literal(interp: &Interpretation, lit: Literal, mu: &Interval) -> Result<bool, EngineError> {
    let here = interp.interval(lit).ok_or(EngineError::ConflictedInterpretation)?;
    Ok(mu.leq(&here)?)
}

/// `I ⊨ r`: the head holds or some body condition fails.
pub fn satisfies_rule(interp: &Interpretation, rule: &Rule) -> Result<bool, EngineError> {
    if interp.is_conflicted() {
        return Err(EngineError::ConflictedInterpretation);
    }
    Ok(rule_holds(rule, &interp.lower, interp.config.resolution()))
}

fn rule_holds(rule: &Rule, lower: &[u32], n: u32) -> bool {
    match fired_head(rule, lower, n) {
        None => true,
        Some((l, u)) => {
            let h = rule.head;
            lower[h.index()] >= l && lower[h.negate().index()] >= n - u
        }
    }
}

/// `I ⊨ Π`.
pub fn satisfies_program(interp: &Interpretation, program: &Program) -> Result<bool, EngineError> {
    check_shape(program, interp)?;
    if interp.is_conflicted() {
        return Err(EngineError::ConflictedInterpretation);
    }
    let n = interp.config.resolution();
    Ok(program.rules().iter().all(|r| rule_holds(r, &interp.lower, n)))
}

/// All models of a small program, found by enumeration.
#[derive(Debug, Clone)]
pub struct BruteForce {
    pub models: Vec<Interpretation>,
    /// Per literal index: the largest annotation below the literal in every
    /// model. Empty when there are no models.
    pub entailed: Vec<Interval>,
}

impl BruteForce {
    pub fn is_consistent(&self) -> bool {
        !self.models.is_empty()
    }

    pub fn entailed_bound(&self, lit: Literal) -> Option<Interval> {
        self.entailed.get(lit.index()).copied()
    }

    /// `ℓ:μ` holds in every model.
    pub fn entails(&self, lit: Literal, mu: &Interval) -> bool {
        self.models
            .iter()
            .all(|m| mu.leq(&m.interval(lit).expect("models are conflict-free")).unwrap_or(false))
    }

    pub fn entailed_map(&self, program: &Program) -> BTreeMap<String, Interval> {
        self.entailed
            .iter()
            .enumerate()
            .map(|(i, mu)| (program.literal_name(Literal::from_index(i)), *mu))
            .collect()
    }
}

pub fn brute_force(program: &Program) -> Result<BruteForce, EngineError> {
    brute_force_capped(program, DEFAULT_ORACLE_CAP)
}

/// Enumerate every conflict-free interpretation and keep the models.
pub fn brute_force_capped(program: &Program, cap: u128) -> Result<BruteForce, EngineError> {
    let cfg = program.config();
    let n = cfg.resolution();
    let states: Vec<Interval> = cfg.elements().collect();
    let atoms = program.atom_count();
    let size = (states.len() as u128).checked_pow(atoms as u32).unwrap_or(u128::MAX);
    if size > cap {
        return Err(EngineError::OracleTooLarge { size, cap });
    }
    let mut digits = vec![0usize; atoms];
    let mut lower = vec![0u32; 2 * atoms];
    let mut models = Vec::new();
    loop {
        for (a, &d) in digits.iter().enumerate() {
            lower[2 * a] = states[d].lower();
            lower[2 * a + 1] = n - states[d].upper();
        }
        if program.rules().iter().all(|r| rule_holds(r, &lower, n)) {
            models.push(Interpretation {
                config: cfg,
                lower: lower.clone(),
            });
        }
        // odometer
        let mut i = 0;
        while i < atoms {
            digits[i] += 1;
            if digits[i] < states.len() {
                break;
            }
            digits[i] = 0;
            i += 1;
        }
        if i == atoms {
            break;
        }
    }
    let entailed = if models.is_empty() {
        Vec::new()
    } else {
        (0..2 * atoms)
            .map(|li| {
                let lit = Literal::from_index(li);
                let (lo, hi) = models.iter().fold((n, 0), |(lo, hi), m| {
                    let mu = m.interval(lit).expect("models are conflict-free");
                    (lo.min(mu.lower()), hi.max(mu.upper()))
                });
                cfg.interval(lo, hi).expect("hull of elements")
            })
            .collect()
    };
    Ok(BruteForce { models, entailed })
}

/// `INCONSISTENT at iter k: atom a: [μ] vs [μ′]`.
pub struct ConflictLine<'a> {
    pub program: &'a Program,
    pub witness: &'a Witness,
}

impl fmt::Display for ConflictLine<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let w = self.witness;
        write!(
            f,
            "INCONSISTENT at iter {}: atom {}: {} vs {}",
            w.iteration,
            self.program.symbols().name(w.atom),
            w.first,
            w.second
        )
    }
}

/// `iter k: lit -> [l,u]` for every literal whose lower bound moved.
pub fn trace_lines(program: &Program, trace: &[Interpretation]) -> Vec<String> {
    let mut out = Vec::new();
    for (k, pair) in trace.windows(2).enumerate() {
        let (before, after) = (&pair[0], &pair[1]);
        for li in 0..after.lower.len() {
            if before.lower[li] == after.lower[li] {
                continue;
            }
            let lit = Literal::from_index(li);
            let shown = match after.interval(lit) {
                Some(mu) => mu.to_string(),
                None => "conflict".to_string(),
            };
            out.push(format!("iter {}: {} -> {}", k + 1, program.literal_name(lit), shown));
        }
    }
    out
}
