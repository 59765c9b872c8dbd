use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use snn_resilience::evolution::{crossover, init_population, merge, mutate, EvolutionConfig};
use snn_resilience::network::{random_position, ArchitectureProfile, Network, Role};
use snn_resilience::simulator::{InputSchedule, Simulator};

/// A valid network of exactly `size` neurons with random wiring.
fn wide_network(profile: ArchitectureProfile, size: usize, seed: u64) -> Network {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut net = Network::empty(profile);
    let inputs = rng.random_range(1..=8);
    let outputs = rng.random_range(1..=4);
    for i in 0..size {
        let role = if i < inputs {
            Role::Input
        } else if i < inputs + outputs {
            Role::Output
        } else {
            Role::Hidden
        };
        let t = rng.random_range(net.profile.threshold_min..=net.profile.threshold_max);
        let pos = net.profile.uses_positions().then(|| random_position(&mut rng));
        net.add_neuron(role, t, pos);
    }
    let ids: Vec<_> = net.neurons.iter().map(|n| n.id).collect();
    for _ in 0..3 * size {
        let pre = ids[rng.random_range(0..ids.len())];
        let post = ids[rng.random_range(inputs..ids.len())];
        if !net.has_edge(pre, post) {
            let w = rng.random_range(net.profile.weight_min..=net.profile.weight_max);
            let d = rng.random_range(1..=15);
            net.connect(pre, post, w, d).unwrap();
        }
    }
    net
}

fn grown(profile: ArchitectureProfile, seed: u64, steps: usize) -> Network {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let template = Network::scaffold(profile, 4, 2, &mut rng);
    let cfg = EvolutionConfig {
        population_size: 2,
        max_generations: 1,
        ..Default::default()
    };
    let mut net = init_population(&template, &cfg, &mut rng).unwrap().remove(0).network;
    for _ in 0..steps {
        net = mutate(&net, &mut rng);
    }
    net
}

fn profile(digital: bool) -> ArchitectureProfile {
    if digital {
        ArchitectureProfile::digital()
    } else {
        ArchitectureProfile::analog()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn json_round_trip_of_100_neurons(seed in any::<u64>(), digital in any::<bool>()) {
        let net = wide_network(profile(digital), 100, seed);
        prop_assert!(net.is_valid());
        let back = Network::from_json(&net.to_json().unwrap()).unwrap();
        prop_assert!(back.structurally_eq(&net));
        prop_assert_eq!(back, net);
    }

    #[test]
    fn variation_operators_keep_networks_valid(a in any::<u64>(), b in any::<u64>(), digital in any::<bool>()) {
        let p = profile(digital);
        let x = grown(p.clone(), a, 25);
        let y = grown(p, a ^ 0x5555, 25);
        let mut rng = ChaCha8Rng::seed_from_u64(b);
        prop_assert!(x.is_valid() && y.is_valid());
        let child = crossover(&x, &y, &mut rng).unwrap();
        prop_assert!(child.validate().is_empty(), "{:?}", child.validate());
        prop_assert_eq!(&child.inputs, &x.inputs);
        prop_assert_eq!(&child.outputs, &x.outputs);
        let joined = merge(&x, &y, &mut rng).unwrap();
        prop_assert!(joined.validate().is_empty(), "{:?}", joined.validate());
        prop_assert_eq!(joined.hidden_count(), x.hidden_count() + y.hidden_count());
    }

    #[test]
    fn fire_counts_agree_with_times(seed in any::<u64>(), digital in any::<bool>(), duration in 1u32..200) {
        let net = grown(profile(digital), seed, 40);
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
        let mut sched = InputSchedule::new();
        for _ in 0..30 {
            sched.push(net.inputs[rng.random_range(0..net.inputs.len())], rng.random_range(0..duration), 2.0);
        }
        let res = Simulator::new(&net).unwrap().run_window(&sched, duration).unwrap();
        let mut counts = Vec::new();
        Simulator::new(&net).unwrap().run_window_counts(&sched, duration, &mut counts).unwrap();
        for (i, n) in net.neurons.iter().enumerate() {
            let times = res.fire_times(n.id).unwrap();
            prop_assert_eq!(res.fire_count(n.id).unwrap() as usize, times.len());
            prop_assert!(times.len() <= duration as usize);
            prop_assert!(times.windows(2).all(|w| w[0] < w[1]));
            prop_assert_eq!(counts[i] as usize, times.len());
        }
    }
}
