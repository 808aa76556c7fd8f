//! The gated activation and the unrolled recurrent network.
//!
//! Each cell of an [`UnrolledNet`] performs one application of `T` on signed
//! lower bounds: every literal with rules owns a [`HeadBlock`] whose rows are
//! max-pooled together with the literal's previous value.

use std::fmt::Write as _;

use crate::engine::{apply_raw, iteration_bound, Interpretation};
use crate::error::NeuralError;
use crate::lattice::LatticeConfig;
use crate::program::{AnnotationExpr, BodyCondition, Literal, Program, RuleKind};

/// `Sign(relu(1 + Σ_j 0.5(1+θ_j)(x_j-1)))` without input checks.
///
/// Evaluated on twice the inner value so the arithmetic stays integral.
pub(crate) fn activation_unchecked(theta: impl IntoIterator<Item = i8>, x: impl IntoIterator<Item = i8>) -> i8 {
    let twice: i32 = 2 + theta
        .into_iter()
        .zip(x)
        .map(|(t, x)| (1 + t as i32) * (x as i32 - 1))
        .sum::<i32>();
    if twice.max(0) > 0 {
        1
    } else {
        -1
    }
}

fn check_signed(v: &[i8]) -> Result<(), NeuralError> {
    match v.iter().find(|&&x| x != 1 && x != -1) {
        Some(&bad) => Err(NeuralError::NotSigned(bad as i32)),
        None => Ok(()),
    }
}

/// Output of a parametrized rule body for weights `theta` and inputs `x`.
pub fn activation(theta: &[i8], x: &[i8]) -> Result<i8, NeuralError> {
    if theta.len() != x.len() {
        return Err(NeuralError::LengthMismatch {
            theta: theta.len(),
            input: x.len(),
        });
    }
    check_signed(theta)?;
    check_signed(x)?;
    Ok(activation_unchecked(theta.iter().copied(), x.iter().copied()))
}

/// `A_t`: one signed lower bound per literal.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CellState(Vec<i8>);

impl CellState {
    /// `A_0`, all `-1`.
    pub fn initial(literals: usize) -> Self {
        CellState(vec![-1; literals])
    }

    pub fn from_values(values: Vec<i8>) -> Result<Self, NeuralError> {
        check_signed(&values)?;
        Ok(CellState(values))
    }

    pub fn values(&self) -> &[i8] {
        &self.0
    }

    pub fn get(&self, lit: Literal) -> i8 {
        self.0[lit.index()]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RowKind {
    /// A fact's head value.
    Const(i8),
    /// A classical rule: emits `value` when every listed position is `1`.
    Threshold { required: Vec<usize>, value: i8 },
    /// A parametrized rule; weights live in the network's slot `slot`.
    Gated { slot: usize, indices: Vec<usize> },
    /// An `incon` detector over the positions of `a` and `~a`.
    SignSum { pos: usize, neg: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Row {
    /// Position of the source rule in the program.
    pub rule: usize,
    pub kind: RowKind,
}

/// `Ã^{(j)}` for head literal `a_j`: one row per rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HeadBlock {
    pub literal: Literal,
    pub rows: Vec<Row>,
}

#[derive(Debug, Clone)]
pub struct UnrolledNet {
    k: usize,
    literals: usize,
    blocks: Vec<HeadBlock>,
    thetas: Vec<Vec<i8>>,
    /// Program rule position of each weight slot.
    slot_rules: Vec<usize>,
}

impl UnrolledNet {
    /// Compile a signed-mode program with `K = height·|ℒ|`.
    pub fn compile(program: &Program) -> Result<Self, NeuralError> {
        let cfg = program.config();
        if !cfg.is_signed() {
            return Err(NeuralError::ModeMismatch(cfg));
        }
        let literals = program.literal_count();
        let mut rows: Vec<Vec<Row>> = vec![Vec::new(); literals];
        let mut thetas = Vec::new();
        let mut slot_rules = Vec::new();
        for (i, rule) in program.rules().iter().enumerate() {
            let head = rule.head;
            match (&rule.head_anno, &rule.kind) {
                (AnnotationExpr::BinAnd, RuleKind::Parametrized { theta, .. }) => {
                    let slot = thetas.len();
                    thetas.push(theta.iter().map(|g| g.signed()).collect());
                    slot_rules.push(i);
                    rows[head.index()].push(Row {
                        rule: i,
                        kind: RowKind::Gated {
                            slot,
                            indices: rule.body.iter().map(|b| b.literal.index()).collect(),
                        },
                    });
                }
                (AnnotationExpr::SignSum, _) => rows[head.index()].push(Row {
                    rule: i,
                    kind: RowKind::SignSum {
                        pos: rule.body[0].literal.index(),
                        neg: rule.body[1].literal.index(),
                    },
                }),
                (AnnotationExpr::Const(mu), _) => {
                    let mut required = Vec::new();
                    for b in &rule.body {
                        if let BodyCondition::Annotated(m) = b.condition {
                            if m.lower() == 1 {
                                required.push(b.literal.index());
                            }
                            if m.upper() == 0 {
                                required.push(b.literal.negate().index());
                            }
                        }
                    }
                    // head [l,u] raises a to l and ~a to 1-u
                    let emit = [(head, mu.lower() == 1), (head.negate(), mu.upper() == 0)];
                    for (lit, fires) in emit {
                        if !fires {
                            continue;
                        }
                        let kind = if rule.body.is_empty() {
                            RowKind::Const(1)
                        } else {
                            RowKind::Threshold {
                                required: required.clone(),
                                value: 1,
                            }
                        };
                        rows[lit.index()].push(Row { rule: i, kind });
                    }
                }
                (AnnotationExpr::BinAnd, RuleKind::Classical) => unreachable!("validated program"),
            }
        }
        let blocks = rows
            .into_iter()
            .enumerate()
            .filter(|(_, r)| !r.is_empty())
            .map(|(j, rows)| HeadBlock {
                literal: Literal::from_index(j),
                rows,
            })
            .collect();
        Ok(UnrolledNet {
            k: iteration_bound(program),
            literals,
            blocks,
            thetas,
            slot_rules,
        })
    }

    pub fn with_k(mut self, k: usize) -> Self {
        self.k = k;
        self
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn literal_count(&self) -> usize {
        self.literals
    }

    pub fn blocks(&self) -> &[HeadBlock] {
        &self.blocks
    }

    pub fn slot_count(&self) -> usize {
        self.thetas.len()
    }

    pub fn theta(&self, slot: usize) -> &[i8] {
        &self.thetas[slot]
    }

    pub fn slot_rule(&self, slot: usize) -> usize {
        self.slot_rules[slot]
    }

    pub fn set_theta(&mut self, slot: usize, theta: &[i8]) -> Result<(), NeuralError> {
        let cur = &mut self.thetas[slot];
        if cur.len() != theta.len() {
            return Err(NeuralError::LengthMismatch {
                theta: theta.len(),
                input: cur.len(),
            });
        }
        check_signed(theta)?;
        cur.copy_from_slice(theta);
        Ok(())
    }

    pub fn row_value(&self, row: &Row, prev: &[i8]) -> i8 {
        match &row.kind {
            RowKind::Const(v) => *v,
            RowKind::Threshold { required, value } => {
                if required.iter().all(|&i| prev[i] == 1) {
                    *value
                } else {
                    -1
                }
            }
            RowKind::Gated { slot, indices } => {
                activation_unchecked(self.thetas[*slot].iter().copied(), indices.iter().map(|&i| prev[i]))
            }
            RowKind::SignSum { pos, neg } => {
                if prev[*pos] + prev[*neg] > 0 {
                    1
                } else {
                    -1
                }
            }
        }
    }

    fn cell(&self, prev: &CellState, clamp: &[usize]) -> CellState {
        let mut next = prev.0.clone();
        for block in &self.blocks {
            let j = block.literal.index();
            for row in &block.rows {
                next[j] = next[j].max(self.row_value(row, &prev.0));
            }
        }
        for &j in clamp {
            next[j] = 1;
        }
        CellState(next)
    }

    pub fn forward_cell(&self, prev: &CellState) -> Result<CellState, NeuralError> {
        self.check_state(prev)?;
        Ok(self.cell(prev, &[]))
    }

    fn check_state(&self, state: &CellState) -> Result<(), NeuralError> {
        if state.len() != self.literals {
            return Err(NeuralError::StateShape {
                expected: self.literals,
                got: state.len(),
            });
        }
        Ok(())
    }

    /// `A_steps`, composing cells from `A_0`.
    pub fn forward(&self, steps: usize) -> Result<CellState, NeuralError> {
        self.forward_clamped(steps, &[])
    }

    /// As [`forward`](Self::forward) with a fact `ℓ:[1,1]` for every
    /// literal position in `clamp`.
    pub fn forward_clamped(&self, steps: usize, clamp: &[usize]) -> Result<CellState, NeuralError> {
        Ok(self.trajectory(steps, clamp)?.pop().expect("A_0 is always present"))
    }

    /// `A_0, ..., A_steps`.
    pub fn trajectory(&self, steps: usize, clamp: &[usize]) -> Result<Vec<CellState>, NeuralError> {
        if steps > self.k {
            return Err(NeuralError::TooManySteps { steps, k: self.k });
        }
        let mut out = vec![CellState::initial(self.literals)];
        for _ in 0..steps {
            let next = self.cell(out.last().expect("nonempty"), clamp);
            out.push(next);
        }
        Ok(out)
    }

    /// One line per row: `block a_j: rule i: indices…, θ…`.
    pub fn dump(&self, program: &Program) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "K = {}", self.k);
        let name = |i: usize| program.literal_name(Literal::from_index(i));
        let list = |v: &[usize]| v.iter().map(|&i| i.to_string()).collect::<Vec<_>>().join(" ");
        for block in &self.blocks {
            let head = program.literal_name(block.literal);
            for row in &block.rows {
                let body = match &row.kind {
                    RowKind::Const(v) => format!("const {v}"),
                    RowKind::Threshold { required, value } => {
                        format!("indices {}, emits {value}", list(required))
                    }
                    RowKind::Gated { slot, indices } => {
                        let theta = self.thetas[*slot].iter().map(|t| t.to_string()).collect::<Vec<_>>().join(" ");
                        format!("indices {}, θ {theta}", list(indices))
                    }
                    RowKind::SignSum { pos, neg } => format!("sign sum {} ({}) {} ({})", pos, name(*pos), neg, name(*neg)),
                };
                let _ = writeln!(out, "block {head}: rule {}: {body}", row.rule);
            }
        }
        out
    }
}

/// Whether the network's first `steps` cells reproduce `T_Π↑t` on signed
/// lower bounds, for every `t ≤ steps`.
pub fn equivalence_check(program: &Program, net: &UnrolledNet, steps: usize) -> Result<bool, NeuralError> {
    let cfg: LatticeConfig = program.config();
    if !cfg.is_signed() {
        return Err(NeuralError::ModeMismatch(cfg));
    }
    let cells = net.trajectory(steps, &[])?;
    let mut interp = Interpretation::bottom_for(program);
    for (t, cell) in cells.iter().enumerate() {
        if t > 0 {
            interp = apply_raw(program, &interp, t).next;
        }
        if interp.signed_lowers() != cell.values() {
            return Ok(false);
        }
    }
    Ok(true)
}
