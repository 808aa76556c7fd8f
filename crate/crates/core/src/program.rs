//! Propositional annotated programs.
//!
//! A program is a list of rules over a symbol table of atoms. Each atom `a`
//! gives two literals, `a` and `~a`, numbered `2·id` and `2·id + 1`. Rules come
//! in three shapes:
//!
//! * classical rules `ℓ0:μ0 <- ℓ1:μ1, ..., ℓm:μm` with constant annotations
//!   (facts when the body is empty);
//! * parametrized rules whose body literals are gated by weights in `{-1,1}`
//!   and whose head lower bound is the gated conjunction of the body
//!   literals' lower bounds;
//! * generated `incon` detectors that fire when an atom and its negation
//!   both have their lower bound at the top.

use std::collections::HashMap;
use std::fmt;

use crate::error::ProgramError;
use crate::lattice::{Interval, LatticeConfig};

/// Reserved atom that becomes true exactly when the program is inconsistent.
pub const INCON: &str = "incon";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AtomId(pub(crate) u32);

impl AtomId {
    pub fn from_index(index: usize) -> Self {
        AtomId(index as u32)
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SymbolTable {
    names: Vec<String>,
    ids: HashMap<String, AtomId>,
}

impl SymbolTable {
    pub fn intern(&mut self, name: &str) -> AtomId {
        if let Some(&id) = self.ids.get(name) {
            return id;
        }
        let id = AtomId(self.names.len() as u32);
        self.names.push(name.to_string());
        self.ids.insert(name.to_string(), id);
        id
    }

    pub fn get(&self, name: &str) -> Option<AtomId> {
        self.ids.get(name).copied()
    }

    pub fn name(&self, id: AtomId) -> &str {
        &self.names[id.index()]
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn is_reserved(&self, id: AtomId) -> bool {
        self.name(id) == INCON
    }

    pub fn atoms(&self) -> impl Iterator<Item = AtomId> {
        (0..self.names.len() as u32).map(AtomId)
    }

    /// Resolve `a` or `~a`.
    pub fn literal(&self, text: &str) -> Option<Literal> {
        match text.strip_prefix('~') {
            Some(name) => self.get(name).map(Literal::neg),
            None => self.get(text).map(Literal::pos),
        }
    }

    pub fn literal_name(&self, lit: Literal) -> String {
        if lit.negated {
            format!("~{}", self.name(lit.atom))
        } else {
            self.name(lit.atom).to_string()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    atom: AtomId,
    negated: bool,
}

impl Literal {
    pub fn pos(atom: AtomId) -> Self {
        Literal { atom, negated: false }
    }

    pub fn neg(atom: AtomId) -> Self {
        Literal { atom, negated: true }
    }

    pub fn atom(self) -> AtomId {
        self.atom
    }

    pub fn is_negated(self) -> bool {
        self.negated
    }

    /// `~~a` is `a`.
    pub fn negate(self) -> Self {
        Literal {
            atom: self.atom,
            negated: !self.negated,
        }
    }

    /// Dense literal number: `2·atom` for `a`, `2·atom + 1` for `~a`.
    pub fn index(self) -> usize {
        2 * self.atom.index() + self.negated as usize
    }

    pub fn from_index(index: usize) -> Self {
        Literal {
            atom: AtomId((index / 2) as u32),
            negated: index % 2 == 1,
        }
    }
}

/// A binarized body weight θ: `On` (+1) keeps the literal, `Off` (−1) erases it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Gate {
    Off,
    On,
}

impl Gate {
    pub fn from_signed(x: f64) -> Gate {
        if x > 0.0 {
            Gate::On
        } else {
            Gate::Off
        }
    }

    pub fn signed(self) -> i8 {
        match self {
            Gate::On => 1,
            Gate::Off => -1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnnotationExpr {
    Const(Interval),
    /// `[f(X),1]` where `f` is the gated conjunction over the body's signed
    /// lower bounds. Only on parametrized rules.
    BinAnd,
    /// `[Sign(x+y),1]` over the lower bounds of `a` and `~a`. Only on
    /// generated `incon` rules.
    SignSum,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BodyCondition {
    /// Satisfied when the annotation is below the literal's current value.
    Annotated(Interval),
    /// Always satisfied; binds the literal's lower bound for the head function.
    Binding,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BodyLiteral {
    pub literal: Literal,
    pub condition: BodyCondition,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RuleKind {
    Classical,
    Parametrized {
        label: String,
        index: u32,
        theta: Vec<Gate>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub head: Literal,
    pub head_anno: AnnotationExpr,
    pub body: Vec<BodyLiteral>,
    pub kind: RuleKind,
}

impl Rule {
    pub fn fact(head: Literal, anno: Interval) -> Rule {
        Rule {
            head,
            head_anno: AnnotationExpr::Const(anno),
            body: Vec::new(),
            kind: RuleKind::Classical,
        }
    }

    pub fn classical(head: Literal, anno: Interval, body: impl IntoIterator<Item = (Literal, Interval)>) -> Rule {
        Rule {
            head,
            head_anno: AnnotationExpr::Const(anno),
            body: body
                .into_iter()
                .map(|(literal, mu)| BodyLiteral {
                    literal,
                    condition: BodyCondition::Annotated(mu),
                })
                .collect(),
            kind: RuleKind::Classical,
        }
    }

    pub fn parametrized(
        label: impl Into<String>,
        index: u32,
        head: Literal,
        candidates: impl IntoIterator<Item = Literal>,
        theta: Vec<Gate>,
    ) -> Rule {
        Rule {
            head,
            head_anno: AnnotationExpr::BinAnd,
            body: candidates
                .into_iter()
                .map(|literal| BodyLiteral {
                    literal,
                    condition: BodyCondition::Binding,
                })
                .collect(),
            kind: RuleKind::Parametrized {
                label: label.into(),
                index,
                theta,
            },
        }
    }

    /// `incon:[Sign(x+y),1] <- a:[x,x'], ~a:[y,y']`.
    pub fn incon_detector(incon: AtomId, atom: AtomId) -> Rule {
        Rule {
            head: Literal::pos(incon),
            head_anno: AnnotationExpr::SignSum,
            body: vec![
                BodyLiteral {
                    literal: Literal::pos(atom),
                    condition: BodyCondition::Binding,
                },
                BodyLiteral {
                    literal: Literal::neg(atom),
                    condition: BodyCondition::Binding,
                },
            ],
            kind: RuleKind::Classical,
        }
    }

    pub fn is_fact(&self) -> bool {
        self.body.is_empty()
    }

    pub fn is_parametrized(&self) -> bool {
        matches!(self.kind, RuleKind::Parametrized { .. })
    }

    pub fn theta(&self) -> Option<&[Gate]> {
        match &self.kind {
            RuleKind::Parametrized { theta, .. } => Some(theta),
            RuleKind::Classical => None,
        }
    }

    fn atoms(&self) -> impl Iterator<Item = AtomId> + '_ {
        std::iter::once(self.head.atom()).chain(self.body.iter().map(|b| b.literal.atom()))
    }
}

/// What a diagnostic complains about.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DiagnosticKind {
    DuplicateBodyLiteral(String),
    ThetaArity { expected: usize, got: usize },
    OffGrid(String),
    NotAnElement(String),
    NegatedIncon,
    ParametrizedNeedsSigned,
    EmptyParametrizedBody,
    DuplicateParametrizedIndex { head: String, index: u32 },
    MisplacedAnnotationFunction,
    BindingOutsideFunctionRule,
    UnknownAtom(u32),
    ConfigMismatch,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    /// Position of the rule in the program.
    pub rule: usize,
    /// Source line, when the rule came from text.
    pub line: Option<usize>,
    pub kind: DiagnosticKind,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "rule {} (line {line}): ", self.rule)?,
            None => write!(f, "rule {}: ", self.rule)?,
        }
        match &self.kind {
            DiagnosticKind::DuplicateBodyLiteral(l) => write!(f, "body literal `{l}` appears more than once"),
            DiagnosticKind::ThetaArity { expected, got } => {
                write!(f, "weight vector has {got} entries for {expected} body literals")
            }
            DiagnosticKind::OffGrid(v) => write!(f, "annotation value {v} is off the grid"),
            DiagnosticKind::NotAnElement(v) => write!(f, "annotation {v} is not an interval"),
            DiagnosticKind::NegatedIncon => write!(f, "`~incon` is never allowed"),
            DiagnosticKind::ParametrizedNeedsSigned => write!(f, "parametrized rules need signed mode"),
            DiagnosticKind::EmptyParametrizedBody => write!(f, "parametrized rule without candidates"),
            DiagnosticKind::DuplicateParametrizedIndex { head, index } => {
                write!(f, "parametrized rule {index} for `{head}` defined twice")
            }
            DiagnosticKind::MisplacedAnnotationFunction => write!(f, "annotation function on the wrong rule kind"),
            DiagnosticKind::BindingOutsideFunctionRule => write!(f, "binding body literal on a constant-headed rule"),
            DiagnosticKind::UnknownAtom(id) => write!(f, "atom id {id} is not in the symbol table"),
            DiagnosticKind::ConfigMismatch => write!(f, "annotation from a different lattice"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Program {
    config: LatticeConfig,
    symbols: SymbolTable,
    rules: Vec<Rule>,
    /// Rule positions per head literal index.
    by_head: Vec<Vec<usize>>,
}

impl Program {
    pub fn new(config: LatticeConfig) -> Self {
        Program {
            config,
            symbols: SymbolTable::default(),
            rules: Vec::new(),
            by_head: Vec::new(),
        }
    }

    pub fn config(&self) -> LatticeConfig {
        self.config
    }

    pub fn symbols(&self) -> &SymbolTable {
        &self.symbols
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn atom(&mut self, name: &str) -> AtomId {
        let id = self.symbols.intern(name);
        self.by_head.resize(2 * self.symbols.len(), Vec::new());
        id
    }

    pub fn atom_count(&self) -> usize {
        self.symbols.len()
    }

    /// `|ℒ| = 2·|𝒜|`.
    pub fn literal_count(&self) -> usize {
        2 * self.symbols.len()
    }

    pub fn incon_atom(&self) -> Option<AtomId> {
        self.symbols.get(INCON)
    }

    /// Interval from grid coordinates on this program's lattice.
    pub fn interval(&self, lower: u32, upper: u32) -> Result<Interval, ProgramError> {
        Ok(self.config.interval(lower, upper)?)
    }

    /// Append a rule after checking it against every rule invariant.
    pub fn add_rule(&mut self, rule: Rule) -> Result<usize, ProgramError> {
        let diags = validate_rule(self, &rule, self.rules.len());
        if !diags.is_empty() {
            return Err(ProgramError::Invalid(diags));
        }
        let pos = self.rules.len();
        self.by_head[rule.head.index()].push(pos);
        self.rules.push(rule);
        Ok(pos)
    }

    /// `Π(ℓ)`: positions of the rules with `ℓ` in the head.
    pub fn rules_for(&self, lit: Literal) -> &[usize] {
        self.by_head.get(lit.index()).map(Vec::as_slice).unwrap_or(&[])
    }

    /// `m_ℓ = |Π(ℓ)|`.
    pub fn rule_count_for(&self, lit: Literal) -> usize {
        self.rules_for(lit).len()
    }

    pub fn parametrized_rules(&self) -> impl Iterator<Item = (usize, &Rule)> {
        self.rules.iter().enumerate().filter(|(_, r)| r.is_parametrized())
    }

    pub fn has_parametrized_rules(&self) -> bool {
        self.rules.iter().any(Rule::is_parametrized)
    }

    /// Replace the weights of parametrized rule `rule`.
    pub fn set_theta(&mut self, rule: usize, new_theta: Vec<Gate>) -> Result<(), ProgramError> {
        let r = &mut self.rules[rule];
        let body_len = r.body.len();
        match &mut r.kind {
            RuleKind::Parametrized { theta, .. } => {
                if new_theta.len() != body_len {
                    return Err(ProgramError::ThetaArity {
                        rule,
                        expected: body_len,
                        got: new_theta.len(),
                    });
                }
                *theta = new_theta;
                Ok(())
            }
            RuleKind::Classical => Err(ProgramError::NotParametrized { rule }),
        }
    }

    /// A copy with extra facts `ℓ:μ` appended.
    pub fn with_facts(&self, facts: impl IntoIterator<Item = (Literal, Interval)>) -> Result<Program, ProgramError> {
        let mut p = self.clone();
        for (lit, mu) in facts {
            p.add_rule(Rule::fact(lit, mu))?;
        }
        Ok(p)
    }

    pub fn literal_name(&self, lit: Literal) -> String {
        self.symbols.literal_name(lit)
    }

    /// Equality of rule lists up to atom numbering.
    pub fn same_structure(&self, other: &Program) -> bool {
        if self.config != other.config || self.rules.len() != other.rules.len() {
            return false;
        }
        let lit = |p: &Program, l: Literal| p.literal_name(l);
        self.rules.iter().zip(&other.rules).all(|(a, b)| {
            lit(self, a.head) == lit(other, b.head)
                && a.head_anno == b.head_anno
                && a.kind == b.kind
                && a.body.len() == b.body.len()
                && a.body
                    .iter()
                    .zip(&b.body)
                    .all(|(x, y)| x.condition == y.condition && lit(self, x.literal) == lit(other, y.literal))
        })
    }
}

/// Every violated invariant of `rule` as it would sit at position `pos` of `program`.
pub fn validate_rule(program: &Program, rule: &Rule, pos: usize) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut push = |kind| {
        out.push(Diagnostic {
            rule: pos,
            line: None,
            kind,
        })
    };
    let symbols = &program.symbols;
    let mut known = true;
    for atom in rule.atoms() {
        if atom.index() >= symbols.len() {
            push(DiagnosticKind::UnknownAtom(atom.0));
            known = false;
        }
    }
    if !known {
        return out;
    }
    for (i, b) in rule.body.iter().enumerate() {
        if rule.body[..i].iter().any(|p| p.literal == b.literal) {
            push(DiagnosticKind::DuplicateBodyLiteral(symbols.literal_name(b.literal)));
        }
    }
    let negates_incon = |l: Literal| l.is_negated() && symbols.is_reserved(l.atom());
    if negates_incon(rule.head) || rule.body.iter().any(|b| negates_incon(b.literal)) {
        push(DiagnosticKind::NegatedIncon);
    }
    let cfg = program.config;
    let foreign = |mu: &Interval| mu.config() != cfg;
    if let AnnotationExpr::Const(mu) = &rule.head_anno {
        if foreign(mu) {
            push(DiagnosticKind::ConfigMismatch);
        }
    }
    for b in &rule.body {
        if let BodyCondition::Annotated(mu) = &b.condition {
            if foreign(mu) {
                push(DiagnosticKind::ConfigMismatch);
            }
        }
    }
    let all_binding = rule.body.iter().all(|b| b.condition == BodyCondition::Binding);
    match (&rule.kind, &rule.head_anno) {
        (RuleKind::Parametrized { theta, .. }, AnnotationExpr::BinAnd) => {
            if !cfg.is_signed() {
                push(DiagnosticKind::ParametrizedNeedsSigned);
            }
            if rule.body.is_empty() {
                push(DiagnosticKind::EmptyParametrizedBody);
            }
            if theta.len() != rule.body.len() {
                push(DiagnosticKind::ThetaArity {
                    expected: rule.body.len(),
                    got: theta.len(),
                });
            }
            if !all_binding {
                push(DiagnosticKind::MisplacedAnnotationFunction);
            }
        }
        (RuleKind::Classical, AnnotationExpr::SignSum) => {
            let shaped = rule.body.len() == 2
                && all_binding
                && symbols.is_reserved(rule.head.atom())
                && !rule.head.is_negated()
                && rule.body[0].literal == rule.body[1].literal.negate()
                && !rule.body[0].literal.is_negated();
            if !shaped {
                push(DiagnosticKind::MisplacedAnnotationFunction);
            }
        }
        (RuleKind::Classical, AnnotationExpr::Const(_)) => {
            if rule.body.iter().any(|b| b.condition == BodyCondition::Binding) {
                push(DiagnosticKind::BindingOutsideFunctionRule);
            }
        }
        _ => push(DiagnosticKind::MisplacedAnnotationFunction),
    }
    if let RuleKind::Parametrized { index, .. } = &rule.kind {
        let clash = program.rules[..pos.min(program.rules.len())].iter().any(|other| {
            other.head == rule.head && matches!(&other.kind, RuleKind::Parametrized { index: j, .. } if j == index)
        });
        if clash {
            push(DiagnosticKind::DuplicateParametrizedIndex {
                head: symbols.literal_name(rule.head),
                index: *index,
            });
        }
    }
    out
}

/// Re-check every rule; empty iff all invariants hold.
pub fn validate(program: &Program) -> Vec<Diagnostic> {
    program
        .rules
        .iter()
        .enumerate()
        .flat_map(|(pos, rule)| validate_rule(program, rule, pos))
        .collect()
}

/// Erase every body literal whose weight is `Off`.
///
/// Surviving literals become classical conditions `ℓ:[1,1]` and the head
/// becomes `[1,1]`; a rule with nothing left is a fact.
pub fn prune(program: &Program) -> Program {
    let mut out = Program::new(program.config);
    out.symbols = program.symbols.clone();
    out.by_head = vec![Vec::new(); program.literal_count()];
    let top = program.config.top(program.config.resolution()).expect("top is on the grid");
    for rule in &program.rules {
        let pruned = match &rule.kind {
            RuleKind::Parametrized { theta, .. } => Rule::classical(
                rule.head,
                top,
                rule.body
                    .iter()
                    .zip(theta)
                    .filter(|(_, g)| **g == Gate::On)
                    .map(|(b, _)| (b.literal, top)),
            ),
            RuleKind::Classical => rule.clone(),
        };
        out.by_head[pruned.head.index()].push(out.rules.len());
        out.rules.push(pruned);
    }
    out
}

/// Add `incon:⊥ <-` and one detector `incon:[Sign(x+y),1] <- a, ~a` per atom.
pub fn add_incon_rules(program: &Program) -> Result<Program, ProgramError> {
    if let Some(incon) = program.incon_atom() {
        if let Some(rule) = program.rules.iter().position(|r| r.head.atom() == incon) {
            return Err(ProgramError::ReservedSymbol { rule });
        }
    }
    let mut out = program.clone();
    let incon = out.atom(INCON);
    let bottom = out.config.bottom();
    out.add_rule(Rule::fact(Literal::pos(incon), bottom))?;
    for atom in program.symbols.atoms().filter(|&a| a != incon) {
        out.add_rule(Rule::incon_detector(incon, atom))?;
    }
    Ok(out)
}

/// Whether `program` already carries generated `incon` detectors.
pub fn has_incon_rules(program: &Program) -> bool {
    program.rules.iter().any(|r| r.head_anno == AnnotationExpr::SignSum)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn signed_program() -> (Program, AtomId, AtomId, AtomId) {
        let mut p = Program::new(LatticeConfig::signed());
        let a = p.atom("a");
        let b = p.atom("b");
        let c = p.atom("c");
        (p, a, b, c)
    }

    #[test]
    fn literal_numbering() {
        let a = AtomId(3);
        assert_eq!(Literal::pos(a).index(), 6);
        assert_eq!(Literal::neg(a).index(), 7);
        assert_eq!(Literal::neg(a).negate(), Literal::pos(a));
        assert_eq!(Literal::pos(a).negate().negate(), Literal::pos(a));
        assert_eq!(Literal::from_index(7), Literal::neg(a));
    }

    #[test]
    fn head_index_tracks_rules() {
        let (mut p, a, b, _) = signed_program();
        let top = p.interval(1, 1).unwrap();
        p.add_rule(Rule::fact(Literal::pos(a), top)).unwrap();
        p.add_rule(Rule::classical(Literal::pos(b), top, [(Literal::pos(a), top)])).unwrap();
        p.add_rule(Rule::fact(Literal::pos(a), top)).unwrap();
        assert_eq!(p.rules_for(Literal::pos(a)), &[0, 2]);
        assert_eq!(p.rule_count_for(Literal::pos(b)), 1);
        assert_eq!(p.rule_count_for(Literal::neg(b)), 0);
        assert!(validate(&p).is_empty());
    }

    #[test]
    fn theta_arity_diagnostic() {
        let (p, a, b, c) = signed_program();
        let bad = Rule::parametrized("r", 1, Literal::pos(a), [Literal::pos(b), Literal::pos(c)], vec![Gate::On]);
        let diags = validate_rule(&p, &bad, 0);
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].kind, DiagnosticKind::ThetaArity { expected: 2, got: 1 });
    }

    #[test]
    fn incon_heads_are_fine_but_negation_is_not() {
        let mut p = Program::new(LatticeConfig::signed());
        let a = p.atom("a");
        let incon = p.atom(INCON);
        let top = p.interval(1, 1).unwrap();
        p.add_rule(Rule::classical(Literal::pos(incon), top, [(Literal::pos(a), top)]))
            .unwrap();
        assert!(validate(&p).is_empty());
        let err = p.add_rule(Rule::fact(Literal::neg(incon), top)).unwrap_err();
        assert!(matches!(err, ProgramError::Invalid(d) if d[0].kind == DiagnosticKind::NegatedIncon));
    }

    #[test]
    fn parametrized_rules_need_signed_mode() {
        let mut p = Program::new(LatticeConfig::unit(1).unwrap());
        let a = p.atom("a");
        let b = p.atom("b");
        let r = Rule::parametrized("r", 1, Literal::pos(a), [Literal::pos(b)], vec![Gate::On]);
        assert!(validate_rule(&p, &r, 0)
            .iter()
            .any(|d| d.kind == DiagnosticKind::ParametrizedNeedsSigned));
    }

    #[test]
    fn duplicate_parametrized_index() {
        let (mut p, a, b, _) = signed_program();
        let r = Rule::parametrized("r", 1, Literal::pos(a), [Literal::pos(b)], vec![Gate::On]);
        p.add_rule(r.clone()).unwrap();
        assert!(p.add_rule(r).is_err());
    }

    #[test]
    fn prune_erases_off_literals() {
        let (mut p, a, b, c) = signed_program();
        let top = p.interval(1, 1).unwrap();
        p.add_rule(Rule::parametrized("r", 1, Literal::pos(a), [Literal::pos(b), Literal::pos(c)], vec![Gate::On, Gate::Off]))
            .unwrap();
        p.add_rule(Rule::parametrized("r", 2, Literal::pos(a), [Literal::pos(b), Literal::pos(c)], vec![Gate::On, Gate::On]))
            .unwrap();
        p.add_rule(Rule::parametrized("r", 3, Literal::pos(a), [Literal::pos(b), Literal::pos(c)], vec![Gate::Off, Gate::Off]))
            .unwrap();
        let q = prune(&p);
        assert_eq!(q.rules()[0], Rule::classical(Literal::pos(a), top, [(Literal::pos(b), top)]));
        assert_eq!(
            q.rules()[1],
            Rule::classical(Literal::pos(a), top, [(Literal::pos(b), top), (Literal::pos(c), top)])
        );
        assert_eq!(q.rules()[2], Rule::fact(Literal::pos(a), top));
        assert!(!q.has_parametrized_rules());
        assert_eq!(q.rules_for(Literal::pos(a)), &[0, 1, 2]);
        assert!(validate(&q).is_empty());
    }

    #[test]
    fn incon_rules_per_atom() {
        let mut p = Program::new(LatticeConfig::signed());
        p.atom("a");
        p.atom("b");
        let q = add_incon_rules(&p).unwrap();
        assert_eq!(q.rules().len(), 3);
        assert!(q.rules()[0].is_fact());
        assert_eq!(q.rules()[1].head_anno, AnnotationExpr::SignSum);
        assert_eq!(q.rules()[2].head_anno, AnnotationExpr::SignSum);
        assert!(has_incon_rules(&q));
        assert!(matches!(add_incon_rules(&q), Err(ProgramError::ReservedSymbol { .. })));

        let empty = Program::new(LatticeConfig::signed());
        let q = add_incon_rules(&empty).unwrap();
        assert_eq!(q.rules().len(), 1);
        assert!(q.rules()[0].is_fact());
    }

    #[test]
    fn set_theta_checks_shape() {
        let (mut p, a, b, c) = signed_program();
        let top = p.interval(1, 1).unwrap();
        p.add_rule(Rule::parametrized("r", 1, Literal::pos(a), [Literal::pos(b), Literal::pos(c)], vec![Gate::On, Gate::On]))
            .unwrap();
        p.add_rule(Rule::fact(Literal::pos(b), top)).unwrap();
        assert!(p.set_theta(0, vec![Gate::Off, Gate::On]).is_ok());
        assert_eq!(p.rules()[0].theta().unwrap(), &[Gate::Off, Gate::On]);
        assert!(matches!(p.set_theta(0, vec![Gate::On]), Err(ProgramError::ThetaArity { .. })));
        assert!(matches!(p.set_theta(1, vec![]), Err(ProgramError::NotParametrized { .. })));
    }
}
