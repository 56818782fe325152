//! A synthetic stand-in for the Gilroy case study: a 327-component serial
//! network feeding a 6 x 6 grid of populated cells and six food retailers.
//!
//! Layout: a substation feeds a transmission spine running along the south
//! edge of the grid. Each grid column hangs a distribution feeder off the
//! spine; every row of a feeder branches a lateral to one cell, and one row
//! per column also feeds a retailer. Population is densest in the south-
//! central cells next to the spine, as in a downtown core, while the thin
//! northern cells hang off long rural laterals that hold most of the
//! components.
//!
//! Component ids are assigned in decreasing order of the population behind
//! each component, so ascending id is the importance ranking.

use std::collections::BTreeMap;
use std::path::Path;

use rand::Rng;

use crate::damage::{ClassFragility, DamageState, Fragility, FragilitySet, RestorationTable};
use crate::error::Result;
use crate::geometry::Point;
use crate::io::{self, CellRow, ComponentRow, FragilityRow, RestorationRow, RetailerRow, TravelRow};
use crate::network::{Component, ComponentClass, GridCell, Retailer};
use crate::rng;

pub const GRID: usize = 6;
pub const CELL_KM: f64 = 0.18;
pub const TOTAL_POPULATION: u64 = 48_821;
/// Employee counts of the six retailers.
pub const RETAILER_CAPACITY: [f64; GRID] = [395.0, 220.0, 130.0, 106.0, 100.0, 130.0];
/// Spine components between successive column junctions.
const SPINE_RUNS: [usize; GRID] = [3, 3, 2, 2, 2, 2];
const FEEDER_RUN: usize = 2;
/// Lateral length by row: short in the dense core, long rural runs north.
const CELL_LATERAL: [usize; GRID] = [2, 2, 6, 8, 10, 10];
const RETAILER_LATERAL: usize = 2;
/// Feeder row each column's retailer hangs off.
const RETAILER_ROW: [usize; GRID] = [0, 1, 0, 2, 1, 0];
const SPINE_Y_KM: f64 = -0.3;
const SUBSTATION: Point = Point { x: -1.0, y: -0.5 };

/// Generated network, demand and damage data.
#[derive(Debug, Clone)]
pub struct Testbed {
    pub components: Vec<Component>,
    pub cells: Vec<GridCell>,
    pub retailers: Vec<Retailer>,
    pub retailer_locations: Vec<Point>,
    /// Minutes, `cells x retailers`.
    pub travel_minutes: Vec<Vec<f64>>,
    pub fragilities: FragilitySet,
    pub restoration: RestorationTable,
}

struct Builder {
    comps: Vec<Component>,
}

impl Builder {
    fn add(&mut self, class: ComponentClass, parent: Option<u32>, location: Point) -> u32 {
        let id = self.comps.len() as u32 + 1;
        self.comps.push(Component {
            id,
            class,
            parent,
            location,
        });
        id
    }

    /// `n` components evenly spaced from `from` (exclusive) to `to`; returns
    /// the last.
    fn run(&mut self, class: ComponentClass, mut parent: u32, from: Point, to: Point, n: usize) -> u32 {
        for i in 1..=n {
            parent = self.add(class, Some(parent), from.lerp(&to, i as f64 / n as f64));
        }
        parent
    }

    fn location(&self, id: u32) -> Point {
        self.comps[id as usize - 1].location
    }
}

fn cell_centroid(row: usize, col: usize) -> Point {
    Point::new((col as f64 + 0.5) * CELL_KM, (row as f64 + 0.5) * CELL_KM)
}

/// Population shares: dense next to the spine and toward the middle
/// columns, thinning out northwards, with a seeded jitter.
fn populations(seed: u64) -> Vec<u64> {
    let mut rng = rng::stream(seed, rng::Purpose::Testbed, 0);
    let mut w = Vec::with_capacity(GRID * GRID);
    for row in 0..GRID {
        for col in 0..GRID {
            let dc = col as f64 - 2.5;
            let base = (-(row as f64) * 0.9 - dc * dc / 6.0).exp();
            w.push(base * rng.random_range(0.8..1.2));
        }
    }
    apportion(&w, TOTAL_POPULATION)
}

/// Integer split of `total` proportional to `weights` (largest remainder).
fn apportion(weights: &[f64], total: u64) -> Vec<u64> {
    let sum: f64 = weights.iter().sum();
    let exact: Vec<f64> = weights.iter().map(|w| w / sum * total as f64).collect();
    let mut out: Vec<u64> = exact.iter().map(|x| x.floor() as u64).collect();
    let mut left = total - out.iter().sum::<u64>();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = exact[a] - exact[a].floor();
        let rb = exact[b] - exact[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for i in order {
        if left == 0 {
            break;
        }
        out[i] += 1;
        left -= 1;
    }
    out
}

/// Default fragility medians (g) and dispersions per class.
pub fn default_fragilities() -> FragilitySet {
    let make = |medians: [f64; 4], xi: [f64; 4]| {
        let mut curves = [Fragility { lambda: 0.0, xi: 1.0 }; 4];
        for k in 0..4 {
            curves[k] = Fragility {
                lambda: medians[k].ln(),
                xi: xi[k],
            };
        }
        ClassFragility::new(curves).expect("default fragilities are valid")
    };
    let mut classes = BTreeMap::new();
    classes.insert(
        ComponentClass::Substation,
        make([0.40, 0.80, 1.60, 3.20], [0.6; 4]),
    );
    classes.insert(ComponentClass::Transmission, make([0.20, 0.40, 0.60, 1.00], [0.6; 4]));
    classes.insert(ComponentClass::Distribution, make([0.15, 0.30, 0.50, 0.85], [0.6; 4]));
    FragilitySet { classes }
}

/// Builds the testbed. `seed` only jitters cell populations.
pub fn generate(seed: u64) -> Testbed {
    let mut b = Builder { comps: Vec::new() };
    let root = b.add(ComponentClass::Substation, None, SUBSTATION);

    let junctions: Vec<Point> = (0..GRID).map(|c| Point::new(cell_centroid(0, c).x, SPINE_Y_KM)).collect();
    let mut spine_end = Vec::with_capacity(GRID);
    let mut prev = root;
    for (c, &n) in SPINE_RUNS.iter().enumerate() {
        let from = b.location(prev);
        prev = b.run(ComponentClass::Transmission, prev, from, junctions[c], n);
        spine_end.push(prev);
    }

    let pops = populations(seed);
    let mut cell_sinks = [0u32; GRID * GRID];
    let mut retailer_sinks = [0u32; GRID];
    let mut retailer_locations = vec![Point::default(); GRID];
    for col in 0..GRID {
        let mut tap = spine_end[col];
        for row in 0..GRID {
            let target = Point::new(cell_centroid(row, col).x + 0.06, cell_centroid(row, col).y);
            let from = b.location(tap);
            tap = b.run(ComponentClass::Distribution, tap, from, target, FEEDER_RUN);
            let from = b.location(tap);
            cell_sinks[row * GRID + col] =
                b.run(ComponentClass::Distribution, tap, from, cell_centroid(row, col), CELL_LATERAL[row]);
            if RETAILER_ROW[col] == row {
                let loc = Point::new(from.x - 0.07, from.y + 0.05);
                retailer_sinks[col] = b.run(ComponentClass::Distribution, tap, from, loc, RETAILER_LATERAL);
                retailer_locations[col] = loc;
            }
        }
    }

    let cells: Vec<GridCell> = (0..GRID * GRID)
        .map(|i| GridCell {
            id: i as u32 + 1,
            population: pops[i],
            sink: cell_sinks[i],
            centroid: cell_centroid(i / GRID, i % GRID),
        })
        .collect();
    let retailers: Vec<Retailer> = (0..GRID)
        .map(|k| Retailer {
            id: k as u32 + 1,
            capacity: RETAILER_CAPACITY[k],
            sink: retailer_sinks[k],
        })
        .collect();
    let travel_minutes = cells
        .iter()
        .map(|c| retailer_locations.iter().map(|r| travel_minutes(&c.centroid, r)).collect())
        .collect();

    let mut bed = Testbed {
        components: b.comps,
        cells,
        retailers,
        retailer_locations,
        travel_minutes,
        fragilities: default_fragilities(),
        restoration: RestorationTable::reference(),
    };
    relabel_by_importance(&mut bed);
    bed
}

/// Driving time: Manhattan distance at 25 km/h plus two minutes to park.
fn travel_minutes(a: &Point, b: &Point) -> f64 {
    let km = (a.x - b.x).abs() + (a.y - b.y).abs();
    let minutes = 2.0 + km / 25.0 * 60.0;
    (minutes * 100.0).round() / 100.0
}

/// Renumbers components by decreasing population behind them, ties in
/// construction order.
fn relabel_by_importance(bed: &mut Testbed) {
    let n = bed.components.len();
    let mut demand = vec![0u64; n];
    for cell in &bed.cells {
        let mut id = Some(cell.sink);
        while let Some(u) = id {
            demand[u as usize - 1] += cell.population;
            id = bed.components[u as usize - 1].parent;
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| demand[b].cmp(&demand[a]).then(a.cmp(&b)));
    let mut new_id = vec![0u32; n];
    for (rank, &u) in order.iter().enumerate() {
        new_id[u] = rank as u32 + 1;
    }
    let map = |id: u32| new_id[id as usize - 1];
    let mut comps: Vec<Component> = bed
        .components
        .iter()
        .map(|c| Component {
            id: map(c.id),
            class: c.class,
            parent: c.parent.map(map),
            location: c.location,
        })
        .collect();
    comps.sort_by_key(|c| c.id);
    bed.components = comps;
    for c in &mut bed.cells {
        c.sink = map(c.sink);
    }
    for r in &mut bed.retailers {
        r.sink = map(r.sink);
    }
}

impl Testbed {
    /// Writes the CSV inputs into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| crate::error::Error::Io {
            path: dir.to_path_buf(),
            source: e,
        })?;
        io::write_rows(
            &dir.join("components.csv"),
            self.components.iter().map(|c| ComponentRow {
                id: c.id,
                class: c.class.to_string(),
                parent_id: c.parent,
                x_km: round6(c.location.x),
                y_km: round6(c.location.y),
            }),
        )?;
        io::write_rows(
            &dir.join("cells.csv"),
            self.cells.iter().map(|c| CellRow {
                id: c.id,
                population: c.population,
                sink_id: c.sink,
                x_km: round6(c.centroid.x),
                y_km: round6(c.centroid.y),
            }),
        )?;
        io::write_rows(
            &dir.join("retailers.csv"),
            self.retailers.iter().map(|r| RetailerRow {
                id: r.id,
                capacity: r.capacity,
                sink_id: r.sink,
            }),
        )?;
        io::write_rows(
            &dir.join("travel_times.csv"),
            self.cells.iter().zip(&self.travel_minutes).flat_map(|(c, row)| {
                self.retailers.iter().zip(row).map(move |(r, &minutes)| TravelRow {
                    cell_id: c.id,
                    retailer_id: r.id,
                    minutes,
                })
            }),
        )?;
        io::write_rows(
            &dir.join("fragility.csv"),
            self.fragilities.classes.iter().flat_map(|(class, cf)| {
                cf.curves.iter().enumerate().map(move |(k, f)| FragilityRow {
                    class: class.to_string(),
                    state: DamageState::ALL[k + 1].to_string(),
                    lambda: f.lambda,
                    xi: f.xi,
                })
            }),
        )?;
        io::write_rows(
            &dir.join("restoration.csv"),
            self.restoration.rows().flat_map(|(class, row)| {
                row.iter().enumerate().map(move |(k, &days)| RestorationRow {
                    class: class.to_string(),
                    state: DamageState::ALL[k].to_string(),
                    days,
                })
            }),
        )
    }
}

fn round6(x: f64) -> f64 {
    (x * 1e6).round() / 1e6
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::EpnTree;

    #[test]
    fn sizes_match_the_case_study() {
        let bed = generate(0);
        assert_eq!(bed.components.len(), 327);
        assert_eq!(bed.cells.len(), 36);
        assert_eq!(bed.retailers.len(), 6);
        assert_eq!(bed.cells.iter().map(|c| c.population).sum::<u64>(), TOTAL_POPULATION);
        let tree = EpnTree::build(bed.components.clone()).unwrap();
        assert_eq!(tree.id(tree.root()), 1);
        assert_eq!(tree.component(tree.root()).class, ComponentClass::Substation);
    }

    #[test]
    fn supply_paths_match_bfs_depth() {
        let bed = generate(0);
        let tree = EpnTree::build(bed.components.clone()).unwrap();
        // Independent depth by breadth-first search over child lists.
        let mut depth = vec![usize::MAX; tree.len()];
        let mut queue = std::collections::VecDeque::from([tree.root()]);
        depth[tree.root()] = 0;
        while let Some(u) = queue.pop_front() {
            for &v in tree.children(u) {
                depth[v] = depth[u] + 1;
                queue.push_back(v);
            }
        }
        for cell in &bed.cells {
            let sink = tree.index_of(cell.sink).unwrap();
            assert_eq!(tree.supply_path(cell.sink).unwrap().len(), 1 + depth[sink]);
        }
    }

    #[test]
    fn ids_rank_importance() {
        let bed = generate(3);
        let tree = EpnTree::build(bed.components.clone()).unwrap();
        // A parent always outranks its children.
        for (u, c) in tree.components().iter().enumerate() {
            if let Some(p) = tree.parent(u) {
                assert!(tree.id(p) < c.id);
            }
        }
    }

    #[test]
    fn apportion_is_exact() {
        assert_eq!(apportion(&[1.0, 1.0, 1.0], 10), vec![4, 3, 3]);
        assert_eq!(apportion(&[0.5, 0.25, 0.25], 7).iter().sum::<u64>(), 7);
    }
}
