use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use chorex::corpus::{generated_choreography, project, AstGen};
use chorex::equiv::canonicalize_spawned_names;
use chorex::model::{find_equivalence_mapping, Name, Network, Process, ProcedureDef, ProcessRenaming, TransitionLabel};
use chorex::semantics::{enabled_network_transitions, NetworkState};
use chorex::syntax::{parse_choreography, parse_network, print_choreography, print_network};

const POOL: &[&str] = &["a", "b", "c", "d", "e"];

fn renaming() -> impl Strategy<Value = ProcessRenaming> {
    prop::collection::btree_map(prop::sample::select(POOL), prop::sample::select(POOL), 0..5)
        .prop_map(|m| ProcessRenaming::from_pairs(m.into_iter().map(|(a, b)| (Name::new(a), Name::new(b)))))
}

fn rename_network(n: &Network, m: &ProcessRenaming) -> Network {
    Network::new(n.processes().map(|p| {
        let defs = p
            .procedures
            .values()
            .map(|d| ProcedureDef { name: d.name.clone(), params: d.params.clone(), body: d.body.apply_renaming(m) })
            .collect();
        Process::new(m.apply(&p.name), defs, p.main.apply_renaming(m))
    }))
    .unwrap()
}

// A state some way into the run of a generated network.
fn reachable_state(seed: u64, steps: usize) -> NetworkState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = NetworkState::initial(project(&generated_choreography(seed)).unwrap());
    for _ in 0..steps {
        let mut ts = enabled_network_transitions(&s).unwrap();
        if ts.is_empty() {
            break;
        }
        let i = rng.gen_range(0..ts.len());
        s = ts.swap_remove(i).1;
    }
    s
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn identity_renaming_changes_nothing(n in prop::sample::select(POOL)) {
        let n = Name::new(n);
        prop_assert_eq!(ProcessRenaming::identity().apply(&n), n);
    }

    #[test]
    fn composition_applies_left_then_right(f in renaming(), g in renaming(), n in prop::sample::select(POOL)) {
        let n = Name::new(n);
        prop_assert_eq!(f.then(&g).apply(&n), g.apply(&f.apply(&n)));
    }

    #[test]
    fn inverse_undoes_an_injective_renaming(f in renaming()) {
        if let Some(inv) = f.inverse() {
            for (a, _) in f.iter() {
                prop_assert_eq!(&inv.apply(&f.apply(a)), a);
            }
        }
    }

    #[test]
    fn equivalence_mappings_exist_both_ways(seed in 0u64..400, steps in 0usize..6, shuffle in any::<u64>()) {
        let n = reachable_state(seed, steps).network;
        // Names of terminated processes are compared literally, so only live ones move.
        let names: Vec<Name> = n.live_names().into_iter().collect();
        let mut image = names.clone();
        image.shuffle(&mut ChaCha8Rng::seed_from_u64(shuffle));
        let perm = ProcessRenaming::from_pairs(names.into_iter().zip(image));
        let m = rename_network(&n, &perm);
        let there = find_equivalence_mapping(&n, &m);
        let back = find_equivalence_mapping(&m, &n);
        prop_assert!(there.is_some() && back.is_some());
        prop_assert!(there.unwrap().is_injective() && back.unwrap().is_injective());
    }

    #[test]
    fn independent_steps_commute(seed in 0u64..400, steps in 0usize..8) {
        let s = reachable_state(seed, steps);
        let ts = enabled_network_transitions(&s).unwrap();
        for (la, sa) in &ts {
            for (lb, sb) in &ts {
                let (na, nb): (BTreeSet<&Name>, BTreeSet<&Name>) = (la.names().into_iter().collect(), lb.names().into_iter().collect());
                if !na.is_disjoint(&nb) {
                    continue;
                }
                let after_ab = enabled_network_transitions(sa).unwrap().into_iter().find(|(l, _)| l == lb);
                let after_ba = enabled_network_transitions(sb).unwrap().into_iter().find(|(l, _)| l == la);
                let (ab, ba) = (after_ab.expect("b still enabled"), after_ba.expect("a still enabled"));
                prop_assert_eq!(&ab.1.network, &ba.1.network);
                prop_assert_eq!(&ab.1.gamma, &ba.1.gamma);
            }
        }
    }

    #[test]
    fn canonical_names_are_idempotent(trace in prop::collection::vec((0usize..4, 0usize..4, any::<bool>()), 0..8)) {
        const NAMES: &[&str] = &["p", "p/w0", "p/w0/w1", "q/x3"];
        let trace: Vec<TransitionLabel> = trace
            .into_iter()
            .map(|(a, b, spawn)| {
                let (a, b) = (Name::new(NAMES[a]), Name::new(NAMES[b]));
                if spawn {
                    TransitionLabel::Spawned { parent: a, child: b }
                } else {
                    TransitionLabel::Com { sender: a, receiver: b, expr: chorex::model::Expr::new("m") }
                }
            })
            .collect();
        let once = canonicalize_spawned_names(&trace);
        prop_assert_eq!(canonicalize_spawned_names(&once), once.clone());
        // Distinct names stay distinct.
        let pairs: BTreeMap<Vec<String>, Vec<String>> = BTreeMap::from([(
            trace.iter().flat_map(|l| l.names().into_iter().map(|n| n.to_string()).collect::<Vec<_>>()).collect(),
            once.iter().flat_map(|l| l.names().into_iter().map(|n| n.to_string()).collect::<Vec<_>>()).collect(),
        )]);
        for (before, after) in pairs {
            for i in 0..before.len() {
                for j in 0..before.len() {
                    prop_assert_eq!(before[i] == before[j], after[i] == after[j]);
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn printed_networks_parse_back(seed in any::<u64>()) {
        let n = AstGen::new(seed).network();
        let text = print_network(&n);
        prop_assert_eq!(parse_network(&text).unwrap(), n, "{}", text);
    }

    #[test]
    fn printed_choreographies_parse_back(seed in any::<u64>()) {
        let c = AstGen::new(seed).choreography();
        let text = print_choreography(&c);
        prop_assert_eq!(parse_choreography(&text).unwrap(), c, "{}", text);
    }
}

#[test]
fn traces_differing_in_spawn_counters_canonicalize_alike() {
    let trace = |child: &str| {
        vec![
            TransitionLabel::Spawned { parent: "entry".into(), child: child.into() },
            TransitionLabel::Intro { introducer: "entry".into(), left: child.into(), right: "client".into() },
        ]
    };
    assert_eq!(canonicalize_spawned_names(&trace("entry/worker0")), canonicalize_spawned_names(&trace("entry/worker7")));
}
