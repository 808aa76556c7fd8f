//! Seeded random programs and interpretations for property testing.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::engine::Interpretation;
use crate::lattice::{Interval, LatticeConfig};
use crate::program::{AtomId, Gate, Literal, Program, Rule};

#[derive(Debug, Clone)]
pub struct GenConfig {
    pub lattice: LatticeConfig,
    pub max_atoms: usize,
    pub max_rules: usize,
    pub max_body: usize,
    /// Probability that a head or body literal is negated.
    pub negation: f64,
    /// Probability that a rule is a fact.
    pub fact: f64,
    /// Probability that a rule is parametrized (signed mode only).
    pub parametrized: f64,
}

impl GenConfig {
    pub fn signed(max_atoms: usize, max_rules: usize) -> Self {
        GenConfig {
            lattice: LatticeConfig::signed(),
            max_atoms,
            max_rules,
            max_body: 3,
            negation: 0.3,
            fact: 0.3,
            parametrized: 0.0,
        }
    }
}

fn random_literal<R: Rng>(rng: &mut R, atoms: usize, negation: f64) -> Literal {
    let atom = AtomId(rng.gen_range(0..atoms) as u32);
    if rng.gen_bool(negation) {
        Literal::neg(atom)
    } else {
        Literal::pos(atom)
    }
}

pub fn random_element<R: Rng>(rng: &mut R, cfg: LatticeConfig) -> Interval {
    let n = cfg.resolution();
    let l = rng.gen_range(0..=n);
    let u = rng.gen_range(l..=n);
    cfg.interval(l, u).expect("l <= u <= n")
}

/// An element other than `⊥`.
fn random_informative<R: Rng>(rng: &mut R, cfg: LatticeConfig) -> Interval {
    loop {
        let mu = random_element(rng, cfg);
        if !mu.is_bottom() {
            return mu;
        }
    }
}

fn distinct_literals<R: Rng>(rng: &mut R, atoms: usize, negation: f64, count: usize) -> Vec<Literal> {
    let mut out: Vec<Literal> = Vec::new();
    for _ in 0..count * 4 {
        if out.len() == count {
            break;
        }
        let lit = random_literal(rng, atoms, negation);
        if !out.contains(&lit) {
            out.push(lit);
        }
    }
    out
}

/// A random program on atoms `p0, p1, ...`.
pub fn random_program<R: Rng>(rng: &mut R, cfg: &GenConfig) -> Program {
    let lattice = cfg.lattice;
    let mut p = Program::new(lattice);
    let atoms = rng.gen_range(1..=cfg.max_atoms.max(1));
    for i in 0..atoms {
        p.atom(&format!("p{i}"));
    }
    let rules = rng.gen_range(0..=cfg.max_rules);
    for i in 0..rules {
        let head = random_literal(rng, atoms, cfg.negation);
        let rule = if lattice.is_signed() && rng.gen_bool(cfg.parametrized) {
            let n = rng.gen_range(1..=cfg.max_body.max(1));
            let body = distinct_literals(rng, atoms, cfg.negation, n);
            let theta = body.iter().map(|_| if rng.gen_bool(0.5) { Gate::On } else { Gate::Off }).collect();
            Rule::parametrized("r", i as u32 + 1, head, body, theta)
        } else if rng.gen_bool(cfg.fact) {
            Rule::fact(head, random_informative(rng, lattice))
        } else {
            let n = rng.gen_range(1..=cfg.max_body.max(1));
            let lits = distinct_literals(rng, atoms, cfg.negation, n);
            let body: Vec<_> = lits.into_iter().map(|l| (l, random_informative(rng, lattice))).collect();
            Rule::classical(head, random_informative(rng, lattice), body)
        };
        p.add_rule(rule).expect("generated rules are valid");
    }
    p
}

/// A random conflict-free interpretation.
pub fn random_interpretation<R: Rng>(rng: &mut R, lattice: LatticeConfig, atoms: usize) -> Interpretation {
    let elems: Vec<Interval> = (0..atoms).map(|_| random_element(rng, lattice)).collect();
    Interpretation::from_intervals(lattice, &elems)
}

/// A random pair `I1 ⪯ I2`.
pub fn random_comparable_pair<R: Rng>(
    rng: &mut R,
    lattice: LatticeConfig,
    atoms: usize,
) -> (Interpretation, Interpretation) {
    let n = lattice.resolution();
    let lo = random_interpretation(rng, lattice, atoms);
    let mut hi = lo.lowers().to_vec();
    let mut order: Vec<usize> = (0..atoms).collect();
    order.shuffle(rng);
    for a in order {
        let (p, q) = (hi[2 * a], hi[2 * a + 1]);
        let room = n - p - q;
        if room == 0 {
            continue;
        }
        let up = rng.gen_range(0..=room);
        let split = rng.gen_range(0..=up);
        hi[2 * a] = p + split;
        hi[2 * a + 1] = q + (up - split);
    }
    let hi = Interpretation::from_lowers(lattice, hi).expect("within bounds");
    (lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generated_programs_are_valid_and_reproducible() {
        let mut cfg = GenConfig::signed(6, 10);
        cfg.parametrized = 0.3;
        let a = random_program(&mut ChaCha8Rng::seed_from_u64(7), &cfg);
        let b = random_program(&mut ChaCha8Rng::seed_from_u64(7), &cfg);
        assert!(a.same_structure(&b));
        assert!(crate::program::validate(&a).is_empty());
    }

    #[test]
    fn comparable_pairs_are_ordered() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let (lo, hi) = random_comparable_pair(&mut rng, LatticeConfig::unit(3).unwrap(), 4);
            assert!(lo.precedes(&hi));
            assert!(!hi.is_conflicted());
        }
    }
}
