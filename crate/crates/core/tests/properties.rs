use std::path::PathBuf;

use annolog::engine::{apply_raw, brute_force, lfp, satisfies_program, Interpretation};
use annolog::gen::{random_element, random_program, GenConfig};
use annolog::lattice::{sup, LatticeConfig, Sup};
use annolog::neural::{activation, equivalence_check, UnrolledNet};
use annolog::program::{add_incon_rules, Program};
use annolog::syntax::{parse_program, serialize};
use annolog::trainer::{loss_and_gradient, train, Dataset, Pass, TrainConfig, TrainingExample};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

/// Programs from the corpus with the lattice named in their `// mode:` header.
fn corpus() -> Vec<(String, Program)> {
    let mut out = Vec::new();
    let mut entries: Vec<_> = std::fs::read_dir(corpus_dir()).unwrap().map(|e| e.unwrap().path()).collect();
    entries.sort();
    for path in entries {
        if path.extension().and_then(|e| e.to_str()) != Some("alp") {
            continue;
        }
        let text = std::fs::read_to_string(&path).unwrap();
        let header = text.lines().next().unwrap().trim_start_matches("// mode:").trim().to_string();
        let cfg = match header.split_whitespace().collect::<Vec<_>>().as_slice() {
            ["signed"] => LatticeConfig::signed(),
            ["unit", n] => LatticeConfig::unit(n.parse().unwrap()).unwrap(),
            other => panic!("bad header {other:?} in {}", path.display()),
        };
        out.push((path.display().to_string(), parse_program(&text, cfg).unwrap()));
    }
    out
}

fn rebuild(p: &Program, rules: Vec<annolog::Rule>) -> Program {
    let mut q = Program::new(p.config());
    for id in p.symbols().atoms() {
        q.atom(p.symbols().name(id));
    }
    for r in rules {
        q.add_rule(r).unwrap();
    }
    q
}

fn any_config() -> impl Strategy<Value = LatticeConfig> {
    prop_oneof![Just(LatticeConfig::signed()), (1u32..=6).prop_map(|n| LatticeConfig::unit(n).unwrap())]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn sup_is_an_upper_bound_and_commutes(cfg in any_config(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let items: Vec<_> = (0..rng.gen_range(1..5)).map(|_| random_element(&mut rng, cfg)).collect();
        let mut rev = items.clone();
        rev.reverse();
        let a = sup(&items).unwrap();
        prop_assert_eq!(&a, &sup(&rev).unwrap());
        if let Sup::Element(s) = a {
            for x in &items {
                prop_assert!(x.leq(&s).unwrap());
            }
        }
    }

    #[test]
    fn negation_preserves_the_order(cfg in any_config(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_element(&mut rng, cfg);
        let b = random_element(&mut rng, cfg);
        prop_assert_eq!(a.leq(&b).unwrap(), a.negate().leq(&b.negate()).unwrap());
        prop_assert_eq!(a.negate().negate(), a);
    }

    #[test]
    fn text_round_trip(seed in any::<u64>(), unit in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cfg = if unit {
            GenConfig { lattice: LatticeConfig::unit(rng.gen_range(1..=8)).unwrap(), ..GenConfig::signed(5, 8) }
        } else {
            GenConfig { parametrized: 0.4, ..GenConfig::signed(5, 8) }
        };
        let p = random_program(&mut rng, &cfg);
        let text = serialize(&p);
        let q = parse_program(&text, p.config()).unwrap();
        prop_assert!(q.same_structure(&p), "{}", text);
        prop_assert_eq!(serialize(&q), text);
    }

    #[test]
    fn lfp_does_not_depend_on_rule_order(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_program(&mut rng, &GenConfig { parametrized: 0.3, ..GenConfig::signed(5, 10) });
        let mut rules = p.rules().to_vec();
        rules.shuffle(&mut rng);
        let q = rebuild(&p, rules);
        let (a, b) = (lfp(&p, false).unwrap(), lfp(&q, false).unwrap());
        prop_assert_eq!(a.consistent, b.consistent);
        prop_assert_eq!(a.iterations, b.iterations);
        if a.consistent {
            prop_assert_eq!(a.final_state, b.final_state);
        }
    }

    #[test]
    fn lfp_is_the_least_model(seed in any::<u64>(), n in 1u32..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cfg = GenConfig { lattice: LatticeConfig::unit(n).unwrap(), ..GenConfig::signed(3, 6) };
        let p = random_program(&mut rng, &cfg);
        let res = lfp(&p, false).unwrap();
        let bf = brute_force(&p).unwrap();
        prop_assert_eq!(res.consistent, bf.is_consistent());
        if res.consistent {
            prop_assert!(satisfies_program(&res.final_state, &p).unwrap());
            for m in &bf.models {
                prop_assert!(res.final_state.precedes(m));
            }
        }
    }

    #[test]
    fn raw_states_only_grow(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = add_incon_rules(&random_program(&mut rng, &GenConfig { negation: 0.5, ..GenConfig::signed(4, 8) })).unwrap();
        let mut cur = Interpretation::bottom_for(&p);
        for t in 1..=8 {
            let next = apply_raw(&p, &cur, t).next;
            prop_assert!(cur.precedes(&next));
            cur = next;
        }
    }

    #[test]
    fn cells_are_monotone_in_time(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_program(&mut rng, &GenConfig { parametrized: 0.5, ..GenConfig::signed(5, 10) });
        let net = UnrolledNet::compile(&p).unwrap();
        let traj = net.trajectory(net.k(), &[]).unwrap();
        for w in traj.windows(2) {
            prop_assert!(w[0].values().iter().zip(w[1].values()).all(|(a, b)| a <= b));
        }
    }

    #[test]
    fn gradient_sum_is_order_independent(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_program(&mut rng, &GenConfig { parametrized: 0.8, ..GenConfig::signed(4, 5) });
        prop_assume!(p.has_parametrized_rules());
        let net = UnrolledNet::compile(&p).unwrap();
        let w: Vec<Vec<f64>> = p.parametrized_rules().map(|(_, r)| r.body.iter().map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let heads: Vec<_> = p.parametrized_rules().map(|(_, r)| r.head).collect();
        let mut examples: Vec<TrainingExample> = (0..6).map(|_| TrainingExample {
            inputs: (0..p.literal_count()).filter(|_| rng.gen_bool(0.3)).map(|i| (annolog::Literal::from_index(i), 1)).collect(),
            targets: vec![(heads[rng.gen_range(0..heads.len())], if rng.gen_bool(0.5) { 1 } else { -1 })],
        }).filter(|e| !e.inputs.iter().any(|(l, _)| *l == e.targets[0].0)).collect();
        let (la, ga) = loss_and_gradient(&net, &w, &examples, Pass::Surrogate);
        examples.reverse();
        let (lb, gb) = loss_and_gradient(&net, &w, &examples, Pass::Surrogate);
        prop_assert!((la - lb).abs() <= 1e-12);
        for (x, y) in ga.iter().flatten().zip(gb.iter().flatten()) {
            prop_assert!((x - y).abs() <= 1e-12);
        }
    }
}

#[test]
fn activation_is_monotone_in_its_inputs() {
    for n in 0..=6usize {
        for tb in 0..(1u32 << n) {
            let theta: Vec<i8> = (0..n).map(|i| if tb >> i & 1 == 1 { 1 } else { -1 }).collect();
            for xb in 0..(1u32 << n) {
                let x: Vec<i8> = (0..n).map(|i| if xb >> i & 1 == 1 { 1 } else { -1 }).collect();
                let base = activation(&theta, &x).unwrap();
                for j in (0..n).filter(|&j| x[j] == -1) {
                    let mut up = x.clone();
                    up[j] = 1;
                    assert!(activation(&theta, &up).unwrap() >= base);
                }
            }
        }
    }
}

#[test]
fn corpus_round_trips_and_matches_the_network() {
    let programs = corpus();
    assert!(programs.len() >= 5);
    for (name, p) in &programs {
        let q = parse_program(&serialize(p), p.config()).unwrap();
        assert!(q.same_structure(p), "{name}");
        if p.config().is_signed() {
            let aug = add_incon_rules(p).unwrap();
            let net = UnrolledNet::compile(&aug).unwrap();
            assert!(equivalence_check(&aug, &net, net.k()).unwrap(), "{name}");
        }
    }
}

#[test]
fn corpus_training_keeps_weights_clipped_and_consistent() {
    let text = std::fs::read_to_string(corpus_dir().join("mixed.alp")).unwrap();
    let p = parse_program(&text, LatticeConfig::signed()).unwrap();
    let data = Dataset::parse(&std::fs::read_to_string(corpus_dir().join("mixed.jsonl")).unwrap(), &p).unwrap();
    for seed in 0..5 {
        let cfg = TrainConfig { seed, ..TrainConfig::default() };
        let report = train(&p, &data, &cfg).unwrap();
        assert!(report.weights.iter().flatten().all(|w| (-1.0..=1.0).contains(w)));
        for rec in &report.history {
            assert_eq!(rec.consistency, 1.0);
        }
        let eval = annolog::trainer::evaluate(&report.program, &data).unwrap();
        assert_eq!(eval.overall, 1.0, "seed {seed}");
        // the binarized view always follows the latent weights
        let last = report.history.last().unwrap();
        let theta: Vec<Vec<i8>> = report.weights.iter().map(|w| w.iter().map(|&x| if x > 0.0 { 1 } else { -1 }).collect()).collect();
        assert_eq!(last.theta, theta);
    }
}
