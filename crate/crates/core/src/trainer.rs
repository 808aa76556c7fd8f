//! Learning the weights of parametrized rules from labeled examples.
//!
//! Each parametrized rule keeps a latent real weight per candidate literal;
//! the forward pass always uses `θ = Sign(w)`. Gradients come from a tape of
//! the unrolled network: the gated activation is differentiated as a clipped
//! identity on its inner value, max-pools route to their argmax, and facts,
//! classical rows and `incon` detectors are constants.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::engine::lfp;
use crate::error::{ProgramError, TrainError};
use crate::neural::{activation_unchecked, RowKind, UnrolledNet};
use crate::program::{add_incon_rules, prune, Gate, Literal, Program};

/// Default cap on the number of weight assignments [`discrete_oracle`] scores.
pub const DEFAULT_DISCRETE_CAP: u128 = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrainingExample {
    pub inputs: Vec<(Literal, i8)>,
    pub targets: Vec<(Literal, i8)>,
}

impl TrainingExample {
    /// Inputs at `1` become facts `ℓ:[1,1]`; inputs at `-1` stay at `⊥`.
    pub fn facts(&self) -> impl Iterator<Item = Literal> + '_ {
        self.inputs.iter().filter(|(_, v)| *v == 1).map(|(l, _)| *l)
    }

    fn clamp(&self) -> Vec<usize> {
        self.facts().map(Literal::index).collect()
    }

    /// The program with this example's input facts appended.
    pub fn program_with_inputs(&self, program: &Program) -> Result<Program, ProgramError> {
        let top = program.config().top(program.config().resolution())?;
        program.with_facts(self.facts().map(|l| (l, top)))
    }
}

#[derive(Deserialize, Serialize)]
struct RawExample {
    #[serde(default)]
    inputs: BTreeMap<String, i64>,
    #[serde(default)]
    targets: BTreeMap<String, i64>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Dataset {
    pub examples: Vec<TrainingExample>,
}

fn signed_entries(
    program: &Program,
    map: &BTreeMap<String, i64>,
) -> Result<Vec<(Literal, i8)>, TrainError> {
    map.iter()
        .map(|(name, &v)| {
            let lit = program
                .symbols()
                .literal(name)
                .ok_or_else(|| ProgramError::UnknownLiteral(name.clone()))?;
            match v {
                1 | -1 => Ok((lit, v as i8)),
                _ => Err(TrainError::BadLabel {
                    literal: name.clone(),
                    value: v,
                }),
            }
        })
        .collect()
}

impl Dataset {
    pub fn new(examples: Vec<TrainingExample>) -> Self {
        Dataset { examples }
    }

    /// One JSON object per non-blank line, literal names resolved against `program`.
    pub fn parse(text: &str, program: &Program) -> Result<Self, TrainError> {
        let mut examples = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let raw: RawExample =
                serde_json::from_str(line).map_err(|source| TrainError::Dataset { line: i + 1, source })?;
            let inputs = signed_entries(program, &raw.inputs)?;
            let targets = signed_entries(program, &raw.targets)?;
            if let Some((lit, _)) = targets.iter().find(|(t, _)| inputs.iter().any(|(l, _)| l == t)) {
                return Err(TrainError::InputTargetOverlap(program.literal_name(*lit)));
            }
            examples.push(TrainingExample { inputs, targets });
        }
        Ok(Dataset { examples })
    }

    pub fn to_json_lines(&self, program: &Program) -> String {
        let mut out = String::new();
        for ex in &self.examples {
            let named = |v: &[(Literal, i8)]| v.iter().map(|(l, x)| (program.literal_name(*l), *x as i64)).collect();
            let raw = RawExample {
                inputs: named(&ex.inputs),
                targets: named(&ex.targets),
            };
            out.push_str(&serde_json::to_string(&raw).expect("maps of strings to integers"));
            out.push('\n');
        }
        out
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Policy {
    /// Reject an update that makes any training example inconsistent.
    HardCheck,
    /// Add `λ` to the loss of every inconsistent example.
    Penalty(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub seed: u64,
    pub policy: Policy,
    /// Charged per parametrized rule whose weights are all `Off`.
    pub rho: f64,
    /// Cell count override; `None` uses the fixpoint bound.
    pub k: Option<usize>,
    /// Examples per update; `None` is full-batch.
    pub batch_size: Option<usize>,
    /// Run the consistency check on the fixpoint engine instead of the network.
    pub engine_check: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 500,
            learning_rate: 0.1,
            seed: 0,
            policy: Policy::HardCheck,
            rho: 0.01,
            k: None,
            batch_size: None,
            engine_check: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pass {
    /// `θ = Sign(w)` and signed activations; the training forward pass.
    Binary,
    /// `θ = w`, every gated row replaced by `htanh` of its inner value.
    Surrogate,
}

fn htanh(z: f64) -> f64 {
    z.clamp(-1.0, 1.0)
}

fn binarize(w: &[f64]) -> Vec<i8> {
    w.iter().map(|&x| if x > 0.0 { 1 } else { -1 }).collect()
}

#[derive(Debug, Clone, Copy)]
enum Source {
    Prev,
    Constant,
    /// Gated row `row` of the literal's block with inner value `z`.
    Gated { row: usize, z: f64 },
}

struct Tape {
    /// Surrogate value per cell and literal.
    sur: Vec<Vec<f64>>,
    /// Binary value per cell and literal.
    bin: Vec<Vec<i8>>,
    /// Pool winner per cell `1..=K` and literal.
    source: Vec<Vec<Source>>,
}

fn inner(theta: &[f64], x: impl Iterator<Item = f64>) -> f64 {
    1.0 + theta.iter().zip(x).map(|(t, x)| 0.5 * (1.0 + t) * (x - 1.0)).sum::<f64>()
}

fn record(net: &UnrolledNet, weights: &[Vec<f64>], clamp: &[usize], pass: Pass) -> Tape {
    let l = net.literal_count();
    let thetas: Vec<Vec<f64>> = match pass {
        Pass::Binary => weights.iter().map(|w| binarize(w).into_iter().map(f64::from).collect()).collect(),
        Pass::Surrogate => weights.to_vec(),
    };
    let mut block_of = vec![None; l];
    for (b, block) in net.blocks().iter().enumerate() {
        block_of[block.literal.index()] = Some(b);
    }
    let mut is_clamped = vec![false; l];
    for &c in clamp {
        is_clamped[c] = true;
    }
    let mut tape = Tape {
        sur: vec![vec![-1.0; l]],
        bin: vec![vec![-1; l]],
        source: Vec::with_capacity(net.k()),
    };
    for _ in 0..net.k() {
        let ps = tape.sur.last().expect("nonempty").clone();
        let pb = tape.bin.last().expect("nonempty").clone();
        let mut ns = ps.clone();
        let mut nb = pb.clone();
        let mut src = vec![Source::Prev; l];
        for j in 0..l {
            if is_clamped[j] {
                ns[j] = 1.0;
                nb[j] = 1;
                src[j] = Source::Constant;
                continue;
            }
            let Some(b) = block_of[j] else { continue };
            // (pool key, surrogate, binary, source); previous value last on ties
            let mut best: Option<(f64, f64, i8, Source)> = None;
            for (r, row) in net.blocks()[b].rows.iter().enumerate() {
                let cand = match (&row.kind, pass) {
                    (RowKind::Gated { slot, indices }, _) => {
                        let z = match pass {
                            Pass::Binary => inner(&thetas[*slot], indices.iter().map(|&i| pb[i] as f64)),
                            Pass::Surrogate => inner(&thetas[*slot], indices.iter().map(|&i| ps[i])),
                        };
                        let bv = activation_unchecked(
                            thetas[*slot].iter().map(|&t| if t > 0.0 { 1 } else { -1 }),
                            indices.iter().map(|&i| if pb[i] > 0 { 1 } else { -1 }),
                        );
                        let s = htanh(z);
                        let key = if pass == Pass::Binary { bv as f64 } else { s };
                        (key, s, bv, Source::Gated { row: r, z })
                    }
                    (RowKind::Const(v), _) => (*v as f64, *v as f64, *v, Source::Constant),
                    (RowKind::Threshold { required, value }, Pass::Binary) => {
                        let v = if required.iter().all(|&i| pb[i] == 1) { *value } else { -1 };
                        (v as f64, v as f64, v, Source::Constant)
                    }
                    (RowKind::Threshold { required, value }, Pass::Surrogate) => {
                        let v = if required.iter().all(|&i| ps[i] > 0.0) { *value } else { -1 };
                        (v as f64, v as f64, v, Source::Constant)
                    }
                    (RowKind::SignSum { pos, neg }, Pass::Binary) => {
                        let v = if pb[*pos] + pb[*neg] > 0 { 1 } else { -1 };
                        (v as f64, v as f64, v, Source::Constant)
                    }
                    (RowKind::SignSum { pos, neg }, Pass::Surrogate) => {
                        let v = if ps[*pos] + ps[*neg] > 0.0 { 1 } else { -1 };
                        (v as f64, v as f64, v, Source::Constant)
                    }
                };
                if best.map_or(true, |b| cand.0 > b.0) {
                    best = Some(cand);
                }
            }
            let prev_key = if pass == Pass::Binary { pb[j] as f64 } else { ps[j] };
            match best {
                Some((key, s, bv, source)) if key >= prev_key => {
                    ns[j] = s;
                    nb[j] = bv.max(pb[j]);
                    src[j] = source;
                }
                _ => {}
            }
        }
        tape.sur.push(ns);
        tape.bin.push(nb);
        tape.source.push(src);
    }
    tape
}

/// Gradient of `Σ_t coeff_t · s_K[target_t]` with respect to θ.
fn backprop(net: &UnrolledNet, weights: &[Vec<f64>], tape: &Tape, seeds: &[(usize, f64)], pass: Pass, grad: &mut [Vec<f64>]) {
    let l = net.literal_count();
    let k = net.k();
    let mut block_of = vec![None; l];
    for (b, block) in net.blocks().iter().enumerate() {
        block_of[block.literal.index()] = Some(b);
    }
    let mut adj = vec![0.0; l];
    for &(j, g) in seeds {
        adj[j] += g;
    }
    for t in (1..=k).rev() {
        let mut prev_adj = vec![0.0; l];
        for j in 0..l {
            let g = adj[j];
            if g == 0.0 {
                continue;
            }
            match tape.source[t - 1][j] {
                Source::Prev => prev_adj[j] += g,
                Source::Constant => {}
                Source::Gated { row, z } => {
                    if z.abs() > 1.0 {
                        continue;
                    }
                    let b = block_of[j].expect("gated rows live in blocks");
                    let RowKind::Gated { slot, indices } = &net.blocks()[b].rows[row].kind else {
                        unreachable!("source recorded a gated row")
                    };
                    let w = &weights[*slot];
                    for (pos, &i) in indices.iter().enumerate() {
                        let (theta, x) = match pass {
                            Pass::Binary => (if w[pos] > 0.0 { 1.0 } else { -1.0 }, tape.bin[t - 1][i] as f64),
                            Pass::Surrogate => (w[pos], tape.sur[t - 1][i]),
                        };
                        grad[*slot][pos] += g * 0.5 * (x - 1.0);
                        prev_adj[i] += g * 0.5 * (1.0 + theta);
                    }
                }
            }
        }
        adj = prev_adj;
    }
}

/// `Σ_targets max(0, 1 - y·ŷ)` on the final surrogate values.
pub fn hinge(values: &[f64], example: &TrainingExample) -> f64 {
    example
        .targets
        .iter()
        .map(|&(lit, y)| (1.0 - y as f64 * values[lit.index()]).max(0.0))
        .sum()
}

fn state_consistent(bin: &[i8], incon: Option<usize>) -> bool {
    incon.map_or(true, |i| bin[i] != 1) && bin.chunks(2).all(|p| !(p[0] == 1 && p[1] == 1))
}

/// Loss and gradient contribution of one example.
pub fn example_loss_and_gradient(
    net: &UnrolledNet,
    weights: &[Vec<f64>],
    example: &TrainingExample,
    pass: Pass,
    grad: &mut [Vec<f64>],
) -> f64 {
    let tape = record(net, weights, &example.clamp(), pass);
    let out = tape.sur.last().expect("nonempty");
    let seeds: Vec<(usize, f64)> = example
        .targets
        .iter()
        .filter(|&&(lit, y)| 1.0 - y as f64 * out[lit.index()] > 0.0)
        .map(|&(lit, y)| (lit.index(), -(y as f64)))
        .collect();
    backprop(net, weights, &tape, &seeds, pass, grad);
    hinge(out, example)
}

/// Summed hinge loss and its gradient over `examples`.
pub fn loss_and_gradient(
    net: &UnrolledNet,
    weights: &[Vec<f64>],
    examples: &[TrainingExample],
    pass: Pass,
) -> (f64, Vec<Vec<f64>>) {
    let mut grad: Vec<Vec<f64>> = weights.iter().map(|w| vec![0.0; w.len()]).collect();
    let mut loss = 0.0;
    for ex in examples {
        loss += example_loss_and_gradient(net, weights, ex, pass, &mut grad);
    }
    (loss, grad)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Hinge plus penalty and regularizer terms, for the weights entering the epoch.
    pub loss: f64,
    pub accuracy: f64,
    pub consistency: f64,
    /// Whether the epoch's proposed weights were kept.
    pub accepted: bool,
    pub step: f64,
    /// Binarized weights leaving the epoch, per parametrized rule.
    pub theta: Vec<Vec<i8>>,
}

#[derive(Debug, Clone)]
pub struct TrainReport {
    /// The input program with the learned weights, before pruning.
    pub trained: Program,
    /// `prune(trained)`.
    pub program: Program,
    pub initial_theta: Vec<Vec<i8>>,
    pub history: Vec<EpochRecord>,
    pub weights: Vec<Vec<f64>>,
    pub rejected: usize,
}

impl TrainReport {
    pub fn final_theta(&self) -> Vec<Vec<Gate>> {
        self.weights
            .iter()
            .map(|w| w.iter().map(|&x| Gate::from_signed(x)).collect())
            .collect()
    }

    pub fn history_json(&self) -> String {
        let mut out = String::new();
        for rec in &self.history {
            out.push_str(&serde_json::to_string(rec).expect("plain record"));
            out.push('\n');
        }
        out
    }
}

struct Model {
    base: Program,
    net: UnrolledNet,
    incon: Option<usize>,
    /// Program rule positions of the weight slots.
    rules: Vec<usize>,
}

impl Model {
    fn new(program: &Program, k: Option<usize>) -> Result<Self, TrainError> {
        let aug = add_incon_rules(program)?;
        let mut net = UnrolledNet::compile(&aug)?;
        if let Some(k) = k {
            net = net.with_k(k);
        }
        let rules = (0..net.slot_count()).map(|s| net.slot_rule(s)).collect();
        Ok(Model {
            base: program.clone(),
            incon: aug.incon_atom().map(|a| Literal::pos(a).index()),
            net,
            rules,
        })
    }

    fn set_weights(&mut self, weights: &[Vec<f64>]) {
        for (slot, w) in weights.iter().enumerate() {
            self.net.set_theta(slot, &binarize(w)).expect("slot shapes are fixed");
        }
    }

    fn program_with(&self, theta: &[Vec<i8>]) -> Program {
        let mut p = self.base.clone();
        for (&rule, t) in self.rules.iter().zip(theta) {
            let gates = t.iter().map(|&x| Gate::from_signed(x as f64)).collect();
            p.set_theta(rule, gates).expect("slot shapes are fixed");
        }
        p
    }

    /// (consistent, matched targets) for the network's current weights.
    fn score(&self, ex: &TrainingExample) -> (bool, usize) {
        let out = self.net.forward_clamped(self.net.k(), &ex.clamp()).expect("k within bound");
        let ok = state_consistent(out.values(), self.incon);
        let hits = ex.targets.iter().filter(|&&(l, y)| out.get(l) == y).count();
        (ok, hits)
    }

    fn all_consistent(&self, data: &Dataset, engine: bool, theta: &[Vec<i8>]) -> Result<bool, TrainError> {
        if engine {
            let p = self.program_with(theta);
            for ex in &data.examples {
                if !lfp(&ex.program_with_inputs(&p)?, false)?.consistent {
                    return Ok(false);
                }
            }
            Ok(true)
        } else {
            Ok(data.examples.iter().all(|ex| self.score(ex).0))
        }
    }
}

/// Latent weights in `(0, 0.1]`, one draw per candidate literal.
pub fn initial_weights(program: &Program, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    program
        .parametrized_rules()
        .map(|(_, r)| r.body.iter().map(|_| 0.1 * (1.0 - rng.gen::<f64>())).collect())
        .collect()
}

/// Full-batch descent on the latent weights, returning the pruned program.
pub fn train(program: &Program, data: &Dataset, cfg: &TrainConfig) -> Result<TrainReport, TrainError> {
    if !program.has_parametrized_rules() {
        return Err(TrainError::NoParametrizedRules);
    }
    if data.is_empty() {
        return Err(TrainError::EmptyData);
    }
    let mut model = Model::new(program, cfg.k)?;
    let mut weights = initial_weights(program, cfg.seed);
    let initial_theta: Vec<Vec<i8>> = weights.iter().map(|w| binarize(w)).collect();
    model.set_weights(&weights);
    let mut order_rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut step = cfg.learning_rate;
    let mut history = Vec::new();
    let mut proposals = 0usize;
    let mut rejected = 0usize;
    let targets: usize = data.examples.iter().map(|e| e.targets.len()).sum();

    for epoch in 1..=cfg.epochs {
        // score the weights entering the epoch
        let mut consistent = 0usize;
        let mut hits = 0usize;
        let mut penalty = 0.0;
        for ex in &data.examples {
            let (ok, h) = model.score(ex);
            hits += h;
            if ok {
                consistent += 1;
            } else if let Policy::Penalty(lambda) = cfg.policy {
                penalty += lambda;
            }
        }
        let pruned_rules = weights.iter().filter(|w| w.iter().all(|&x| x <= 0.0)).count();
        let (hinge_total, _) = loss_and_gradient(&model.net, &weights, &data.examples, Pass::Binary);
        let loss = hinge_total + penalty + cfg.rho * pruned_rules as f64;
        let accuracy = if targets == 0 { 1.0 } else { hits as f64 / targets as f64 };
        let consistency = consistent as f64 / data.len() as f64;

        if hinge_total == 0.0 {
            history.push(EpochRecord {
                epoch,
                loss,
                accuracy,
                consistency,
                accepted: true,
                step,
                theta: weights.iter().map(|w| binarize(w)).collect(),
            });
            break;
        }

        let mut batches: Vec<Vec<TrainingExample>> = match cfg.batch_size {
            Some(b) if b > 0 && b < data.len() => {
                let mut idx: Vec<usize> = (0..data.len()).collect();
                idx.shuffle(&mut order_rng);
                idx.chunks(b).map(|c| c.iter().map(|&i| data.examples[i].clone()).collect()).collect()
            }
            _ => vec![data.examples.clone()],
        };
        let mut accepted_all = true;
        for batch in batches.drain(..) {
            let (_, grad) = loss_and_gradient(&model.net, &weights, &batch, Pass::Binary);
            let proposal: Vec<Vec<f64>> = weights
                .iter()
                .zip(&grad)
                .map(|(w, g)| w.iter().zip(g).map(|(x, d)| (x - step * d).clamp(-1.0, 1.0)).collect())
                .collect();
            let old_theta: Vec<Vec<i8>> = weights.iter().map(|w| binarize(w)).collect();
            let new_theta: Vec<Vec<i8>> = proposal.iter().map(|w| binarize(w)).collect();
            proposals += 1;
            let accept = match cfg.policy {
                Policy::Penalty(_) => true,
                Policy::HardCheck if new_theta == old_theta => true,
                Policy::HardCheck => {
                    model.set_weights(&proposal);
                    let ok = model.all_consistent(data, cfg.engine_check, &new_theta)?;
                    if !ok {
                        model.set_weights(&weights);
                    }
                    ok
                }
            };
            if accept {
                weights = proposal;
                model.set_weights(&weights);
            } else {
                rejected += 1;
                accepted_all = false;
                step *= 0.5;
            }
        }
        history.push(EpochRecord {
            epoch,
            loss,
            accuracy,
            consistency,
            accepted: accepted_all,
            step,
            theta: weights.iter().map(|w| binarize(w)).collect(),
        });
    }

    if proposals > 0 && rejected == proposals {
        return Err(TrainError::AllRejected { epochs: history.len() });
    }
    let final_theta: Vec<Vec<i8>> = weights.iter().map(|w| binarize(w)).collect();
    let trained = model.program_with(&final_theta);
    Ok(TrainReport {
        program: prune(&trained),
        trained,
        initial_theta,
        history,
        weights,
        rejected,
    })
}

/// Target mismatches of `program` on one example; an inconsistent fixpoint
/// misses every target.
fn example_errors(program: &Program, ex: &TrainingExample) -> Result<usize, TrainError> {
    let res = lfp(&ex.program_with_inputs(program)?, false)?;
    if !res.consistent {
        return Ok(ex.targets.len());
    }
    let n = program.config().resolution();
    Ok(ex
        .targets
        .iter()
        .filter(|&&(l, y)| (if res.final_state.lower(l) == n { 1 } else { -1 }) != y)
        .count())
}

/// Total 0-1 target error of `program` on `data`.
pub fn zero_one_error(program: &Program, data: &Dataset) -> Result<usize, TrainError> {
    data.examples.iter().map(|ex| example_errors(program, ex)).sum()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleResult {
    pub error: usize,
    /// Every minimizing assignment, fewest `On` entries first, then lexicographic.
    pub best: Vec<Vec<Vec<Gate>>>,
}

/// Score every weight assignment by 0-1 error on the fixpoint engine.
pub fn discrete_oracle(program: &Program, data: &Dataset, cap: u128) -> Result<OracleResult, TrainError> {
    let rules: Vec<(usize, usize)> = program.parametrized_rules().map(|(i, r)| (i, r.body.len())).collect();
    if rules.is_empty() {
        return Err(TrainError::NoParametrizedRules);
    }
    let bits: usize = rules.iter().map(|r| r.1).sum();
    let size = 1u128.checked_shl(bits as u32).unwrap_or(u128::MAX);
    if bits >= 128 || size > cap {
        return Err(TrainError::OracleTooLarge { size, cap });
    }
    let mut programs: Vec<Program> = data
        .examples
        .iter()
        .map(|ex| ex.program_with_inputs(program))
        .collect::<Result<_, _>>()?;
    let n = program.config().resolution();
    let decode = |mask: u64| -> Vec<Vec<Gate>> {
        let mut shift = 0;
        rules
            .iter()
            .map(|&(_, len)| {
                let v = (0..len)
                    .map(|j| if mask >> (shift + j) & 1 == 1 { Gate::On } else { Gate::Off })
                    .collect();
                shift += len;
                v
            })
            .collect()
    };
    let mut best_err = usize::MAX;
    let mut best = Vec::new();
    for mask in 0..(size as u64) {
        let theta = decode(mask);
        let mut err = 0usize;
        for (p, ex) in programs.iter_mut().zip(&data.examples) {
            for (&(r, _), t) in rules.iter().zip(&theta) {
                p.set_theta(r, t.clone())?;
            }
            let res = lfp(p, false)?;
            err += if res.consistent {
                ex.targets
                    .iter()
                    .filter(|&&(l, y)| (if res.final_state.lower(l) == n { 1 } else { -1 }) != y)
                    .count()
            } else {
                ex.targets.len()
            };
            if err > best_err {
                break;
            }
        }
        if err < best_err {
            best_err = err;
            best.clear();
        }
        if err == best_err {
            best.push(theta);
        }
    }
    let ones = |t: &Vec<Vec<Gate>>| t.iter().flatten().filter(|g| **g == Gate::On).count();
    best.sort_by(|a, b| ones(a).cmp(&ones(b)).then_with(|| a.cmp(b)));
    Ok(OracleResult { error: best_err, best })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evaluation {
    /// Per target literal, the fraction of examples where the fixpoint matches the label.
    pub accuracy: BTreeMap<String, f64>,
    pub overall: f64,
    pub consistency_rate: f64,
}

/// Fixpoint accuracy and consistency of a fixed program on `data`.
pub fn evaluate(program: &Program, data: &Dataset) -> Result<Evaluation, TrainError> {
    let n = program.config().resolution();
    let mut per: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    let mut consistent = 0usize;
    for ex in &data.examples {
        let res = lfp(&ex.program_with_inputs(program)?, false)?;
        if res.consistent {
            consistent += 1;
        }
        for &(lit, y) in &ex.targets {
            let got = if res.consistent && res.final_state.lower(lit) == n { 1 } else { -1 };
            let e = per.entry(program.literal_name(lit)).or_default();
            e.1 += 1;
            if res.consistent && got == y {
                e.0 += 1;
            }
        }
    }
    let (hit, total) = per.values().fold((0, 0), |(h, t), (a, b)| (h + a, t + b));
    Ok(Evaluation {
        accuracy: per.into_iter().map(|(k, (h, t))| (k, h as f64 / t as f64)).collect(),
        overall: if total == 0 { 1.0 } else { hit as f64 / total as f64 },
        consistency_rate: if data.is_empty() { 1.0 } else { consistent as f64 / data.len() as f64 },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::LatticeConfig;
    use crate::syntax::parse_program;

    fn signed(text: &str) -> Program {
        parse_program(text, LatticeConfig::signed()).unwrap()
    }

    fn example(p: &Program, inputs: &[(&str, i8)], targets: &[(&str, i8)]) -> TrainingExample {
        let lits = |v: &[(&str, i8)]| v.iter().map(|(n, x)| (p.symbols().literal(n).unwrap(), *x)).collect();
        TrainingExample {
            inputs: lits(inputs),
            targets: lits(targets),
        }
    }

    #[test]
    fn hinge_examples() {
        let p = signed("param r(1) : a <- ?b.");
        let ex = example(&p, &[], &[("a", 1)]);
        let a = p.symbols().literal("a").unwrap().index();
        let mut v = vec![-1.0; p.literal_count()];
        assert_eq!(hinge(&v, &ex), 2.0);
        v[a] = 1.0;
        assert_eq!(hinge(&v, &ex), 0.0);
    }

    #[test]
    fn dataset_round_trip_and_errors() {
        let p = signed("param r(1) : a <- ?b, ?~c.");
        let text = "{\"inputs\": {\"b\": 1, \"~b\": -1}, \"targets\": {\"a\": 1}}\n\n{\"inputs\": {\"c\": 1}, \"targets\": {\"a\": -1}}\n";
        let d = Dataset::parse(text, &p).unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(Dataset::parse(&d.to_json_lines(&p), &p).unwrap(), d);
        assert!(matches!(
            Dataset::parse("{\"inputs\": {\"b\": 2}, \"targets\": {}}", &p),
            Err(TrainError::BadLabel { value: 2, .. })
        ));
        assert!(matches!(
            Dataset::parse("{\"inputs\": {\"a\": 1}, \"targets\": {\"a\": 1}}", &p),
            Err(TrainError::InputTargetOverlap(_))
        ));
        assert!(matches!(Dataset::parse("{\"inputs\": ", &p), Err(TrainError::Dataset { line: 1, .. })));
        assert!(matches!(
            Dataset::parse("{\"inputs\": {\"zz\": 1}}", &p),
            Err(TrainError::Program(ProgramError::UnknownLiteral(_)))
        ));
    }

    #[test]
    fn gradient_is_zero_when_correct() {
        let p = signed("param r(1) : a <- ?b.");
        let net = UnrolledNet::compile(&add_incon_rules(&p).unwrap()).unwrap();
        let ex = example(&p, &[("b", 1)], &[("a", 1)]);
        let (loss, grad) = loss_and_gradient(&net, &[vec![0.05]], &[ex], Pass::Binary);
        assert_eq!(loss, 0.0);
        assert_eq!(grad, vec![vec![0.0]]);
    }

    #[test]
    fn true_inputs_carry_no_weight_gradient() {
        // a blocked only by c; b is true so its θ gets nothing
        let p = signed("param r(1) : a <- ?b, ?c.");
        let net = UnrolledNet::compile(&add_incon_rules(&p).unwrap()).unwrap();
        let ex = example(&p, &[("b", 1), ("c", -1)], &[("a", 1)]);
        let (loss, grad) = loss_and_gradient(&net, &[vec![0.05, 0.05]], &[ex], Pass::Binary);
        assert_eq!(loss, 2.0);
        assert_eq!(grad[0][0], 0.0);
        assert_eq!(grad[0][1], 1.0);
    }

    #[test]
    fn constant_target_prunes_everything() {
        let p = signed("param r(1) : a <- ?b, ?c, ?d.");
        let mut rows = Vec::new();
        for m in 0..8u8 {
            let v = |i: u8| if m >> i & 1 == 1 { 1 } else { -1 };
            rows.push(example(
                &p,
                &[("b", v(0)), ("~b", -v(0)), ("c", v(1)), ("~c", -v(1)), ("d", v(2)), ("~d", -v(2))],
                &[("a", 1)],
            ));
        }
        let data = Dataset::new(rows);
        let report = train(&p, &data, &TrainConfig::default()).unwrap();
        assert!(report.final_theta()[0].iter().all(|g| *g == Gate::Off));
        assert!(report.program.rules()[0].is_fact());
        assert_eq!(evaluate(&report.program, &data).unwrap().overall, 1.0);
    }

    #[test]
    fn contradictory_targets_are_rejected() {
        let p = signed("param r(1) : a <- ?b.\nparam s(1) : ~a <- ?c.");
        let data = Dataset::new(vec![example(&p, &[("~b", 1), ("~c", 1)], &[("a", 1), ("~a", 1)])]);
        let report = train(&p, &data, &TrainConfig::default()).unwrap();
        assert!(report.rejected > 0);
        assert!(report.history.iter().any(|r| !r.accepted));
        for rec in &report.history {
            let prog = Model::new(&p, None).unwrap().program_with(&rec.theta);
            assert!(lfp(&data.examples[0].program_with_inputs(&prog).unwrap(), false).unwrap().consistent);
        }
    }

    #[test]
    fn training_is_deterministic() {
        let p = signed("param r(1) : a <- ?b, ?c.\nparam r(2) : a <- ?b, ?c.");
        let data = Dataset::new(vec![
            example(&p, &[("b", 1), ("c", -1), ("~c", 1)], &[("a", 1)]),
            example(&p, &[("b", -1), ("~b", 1), ("c", 1)], &[("a", -1)]),
        ]);
        let cfg = TrainConfig {
            seed: 3,
            ..TrainConfig::default()
        };
        let a = train(&p, &data, &cfg).unwrap();
        let b = train(&p, &data, &cfg).unwrap();
        assert_eq!(a.history, b.history);
        assert_eq!(a.weights, b.weights);
    }

    #[test]
    fn train_preconditions() {
        let p = signed("a : [1,1] <- .");
        assert!(matches!(train(&p, &Dataset::default(), &TrainConfig::default()), Err(TrainError::NoParametrizedRules)));
        let q = signed("param r(1) : a <- ?b.");
        assert!(matches!(train(&q, &Dataset::default(), &TrainConfig::default()), Err(TrainError::EmptyData)));
    }

    #[test]
    fn oracle_examples() {
        let p = signed("param r(1) : a <- ?b, ?c, ?d.");
        let mut rows = Vec::new();
        for m in 0..8u8 {
            let v = |i: u8| if m >> i & 1 == 1 { 1 } else { -1 };
            rows.push(example(&p, &[("b", v(0)), ("c", v(1)), ("d", v(2))], &[("a", v(0))]));
        }
        let res = discrete_oracle(&p, &Dataset::new(rows), DEFAULT_DISCRETE_CAP).unwrap();
        assert_eq!(res.error, 0);
        assert_eq!(res.best[0], vec![vec![Gate::On, Gate::Off, Gate::Off]]);

        let empty = discrete_oracle(&p, &Dataset::default(), DEFAULT_DISCRETE_CAP).unwrap();
        assert_eq!(empty.error, 0);
        assert_eq!(empty.best.len(), 8);

        let contradictory = Dataset::new(vec![
            example(&p, &[("b", 1)], &[("a", 1)]),
            example(&p, &[("b", 1)], &[("a", -1)]),
        ]);
        assert_eq!(discrete_oracle(&p, &contradictory, DEFAULT_DISCRETE_CAP).unwrap().error, 1);
        assert!(matches!(discrete_oracle(&p, &Dataset::default(), 4), Err(TrainError::OracleTooLarge { .. })));
    }

    #[test]
    fn evaluate_examples() {
        let mut p = signed("b : [1,1] <- c : [1,1].");
        p.atom("a");
        let rows = |y: i8| Dataset::new(vec![example(&p, &[("c", 1)], &[("a", y)]), example(&p, &[], &[("a", y)])]);
        let all_neg = evaluate(&p, &rows(-1)).unwrap();
        assert_eq!(all_neg.overall, 1.0);
        assert_eq!(all_neg.consistency_rate, 1.0);
        assert_eq!(evaluate(&p, &rows(1)).unwrap().overall, 0.0);
    }
}
