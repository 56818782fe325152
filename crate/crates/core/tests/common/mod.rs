#![allow(dead_code)]

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use recovery_core::damage::DamageScenario;
use recovery_core::geometry::Point;
use recovery_core::network::{Component, ComponentClass, DemandModel, EpnTree, GridCell, Network, Retailer};
use recovery_core::testbed;

/// Repair days a toy component can draw, all multiples of half a day.
pub const TOY_DAYS: [f64; 5] = [0.5, 1.0, 2.0, 3.0, 7.0];

/// A small random instance.
pub struct Toy {
    pub network: Network,
    pub scenario: DamageScenario,
    pub resources: usize,
}

/// Random tree of 4 to 12 components, root depth 0 and no node deeper than 3.
/// Every leaf feeds a cell, and one or two retailers hang off random nodes.
/// At least `resources + 1` components are damaged.
pub fn toy(seed: u64) -> Toy {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = rng.random_range(4..=12usize);
    let resources = rng.random_range(1..=3usize);
    let mut depth = vec![0usize];
    let mut comps = vec![component(1, None, &mut rng)];
    for id in 2..=m as u32 {
        let open: Vec<usize> = (0..depth.len()).filter(|&i| depth[i] < 3).collect();
        let p = *open.choose(&mut rng).unwrap();
        depth.push(depth[p] + 1);
        comps.push(component(id, Some(p as u32 + 1), &mut rng));
    }
    let has_child: Vec<bool> = (1..=m as u32).map(|id| comps.iter().any(|c| c.parent == Some(id))).collect();
    let mut cells = Vec::new();
    for (i, c) in comps.iter().enumerate() {
        if !has_child[i] || rng.random_bool(0.2) {
            cells.push(GridCell {
                id: cells.len() as u32 + 1,
                population: rng.random_range(1..=100),
                sink: c.id,
                centroid: c.location,
            });
        }
    }
    let retailers: Vec<Retailer> = (0..rng.random_range(1..=2u32))
        .map(|k| Retailer {
            id: k + 1,
            capacity: rng.random_range(1..=10) as f64,
            sink: rng.random_range(1..=m as u32),
        })
        .collect();
    let minutes: Vec<Vec<f64>> = cells
        .iter()
        .map(|_| retailers.iter().map(|_| rng.random_range(1..=20) as f64).collect())
        .collect();
    let demand = DemandModel::build(&cells, &retailers, -0.1, &minutes).unwrap();
    let network = Network::new(EpnTree::build(comps).unwrap(), cells, retailers, demand).unwrap();

    let mut days: Vec<f64> = (0..m)
        .map(|_| if rng.random_bool(0.8) { *TOY_DAYS.choose(&mut rng).unwrap() } else { 0.0 })
        .collect();
    let mut healthy: Vec<usize> = (0..m).filter(|&i| days[i] == 0.0).collect();
    healthy.shuffle(&mut rng);
    while days.iter().filter(|&&d| d > 0.0).count() <= resources {
        days[healthy.pop().unwrap()] = *TOY_DAYS.choose(&mut rng).unwrap();
    }
    Toy {
        network,
        scenario: DamageScenario::from_repair_days(days),
        resources,
    }
}

fn component(id: u32, parent: Option<u32>, rng: &mut ChaCha8Rng) -> Component {
    Component {
        id,
        class: if parent.is_none() { ComponentClass::Substation } else { ComponentClass::Distribution },
        parent,
        location: Point::new(rng.random_range(0.0..2.0), rng.random_range(0.0..2.0)),
    }
}

/// The bundled testbed as a network.
pub fn testbed_network(decay: f64) -> (Network, testbed::Testbed) {
    let bed = testbed::generate(0);
    let tree = EpnTree::build(bed.components.clone()).unwrap();
    let demand = DemandModel::build(&bed.cells, &bed.retailers, decay, &bed.travel_minutes).unwrap();
    let network = Network::new(tree, bed.cells.clone(), bed.retailers.clone(), demand).unwrap();
    (network, bed)
}
