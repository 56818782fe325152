//! The power network as a rooted dependency tree, plus the population and
//! food-retailer demand it serves.
//!
//! Components are stored sorted by id, so a component's index order agrees
//! with its id order. Everything downstream (simulator, planner) works on
//! indices and converts back to ids only at the edges.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ComponentClass {
    Substation,
    Transmission,
    Distribution,
}

impl ComponentClass {
    pub const ALL: [ComponentClass; 3] = [
        ComponentClass::Substation,
        ComponentClass::Transmission,
        ComponentClass::Distribution,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ComponentClass::Substation => "substation",
            ComponentClass::Transmission => "transmission",
            ComponentClass::Distribution => "distribution",
        }
    }
}

impl fmt::Display for ComponentClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ComponentClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "substation" => Ok(ComponentClass::Substation),
            "transmission" => Ok(ComponentClass::Transmission),
            "distribution" => Ok(ComponentClass::Distribution),
            other => Err(Error::Config(format!("unknown component class '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub id: u32,
    pub class: ComponentClass,
    pub parent: Option<u32>,
    pub location: Point,
}

/// A maximal serial run of components: every member after the first is the
/// only child of its predecessor. Segments are the nodes the candidate-pool
/// heuristics walk level by level.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    /// Smallest component id in the segment.
    pub label: u32,
    pub level: usize,
    pub parent: Option<usize>,
    /// Component indices from the upstream end down.
    pub members: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct EpnTree {
    components: Vec<Component>,
    index: HashMap<u32, usize>,
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
    depth: Vec<usize>,
    segment_of: Vec<usize>,
    segments: Vec<Segment>,
    /// Segment indices per level, ascending label within a level.
    levels: Vec<Vec<usize>>,
}

impl EpnTree {
    pub fn build(mut records: Vec<Component>) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::Config("network has no components".into()));
        }
        records.sort_by_key(|c| c.id);
        let mut index = HashMap::with_capacity(records.len());
        for (i, c) in records.iter().enumerate() {
            if index.insert(c.id, i).is_some() {
                return Err(Error::DuplicateId(c.id));
            }
        }

        let mut parent = vec![None; records.len()];
        let mut roots = Vec::new();
        for (i, c) in records.iter().enumerate() {
            match c.parent {
                None => roots.push(c.id),
                Some(p) => {
                    let &pi = index.get(&p).ok_or(Error::DanglingParent {
                        child: c.id,
                        parent: p,
                    })?;
                    parent[i] = Some(pi);
                }
            }
        }
        if roots.len() > 1 {
            return Err(Error::MultipleRoots(roots));
        }
        // Without a parentless record every component sits on a cycle.
        let root = match roots.first() {
            Some(id) => index[id],
            None => return Err(Error::Cycle(records[0].id)),
        };

        let mut children = vec![Vec::new(); records.len()];
        for (i, p) in parent.iter().enumerate() {
            if let Some(p) = p {
                children[*p].push(i);
            }
        }

        // Breadth-first from the root; anything unreached sits on a cycle.
        let mut depth = vec![usize::MAX; records.len()];
        let mut order = Vec::with_capacity(records.len());
        depth[root] = 0;
        order.push(root);
        let mut head = 0;
        while head < order.len() {
            let u = order[head];
            head += 1;
            for &v in &children[u] {
                depth[v] = depth[u] + 1;
                order.push(v);
            }
        }
        if let Some(i) = depth.iter().position(|&d| d == usize::MAX) {
            return Err(Error::Cycle(records[i].id));
        }

        let mut segment_of = vec![usize::MAX; records.len()];
        let mut segments: Vec<Segment> = Vec::new();
        for &u in &order {
            let continues = parent[u].filter(|&p| children[p].len() == 1);
            match continues {
                Some(p) => {
                    let s = segment_of[p];
                    segment_of[u] = s;
                    segments[s].members.push(u);
                    segments[s].label = segments[s].label.min(records[u].id);
                }
                None => {
                    let (parent_seg, level) = match parent[u] {
                        Some(p) => (Some(segment_of[p]), segments[segment_of[p]].level + 1),
                        None => (None, 0),
                    };
                    segment_of[u] = segments.len();
                    segments.push(Segment {
                        label: records[u].id,
                        level,
                        parent: parent_seg,
                        members: vec![u],
                    });
                }
            }
        }
        let max_level = segments.iter().map(|s| s.level).max().unwrap_or(0);
        let mut levels = vec![Vec::new(); max_level + 1];
        for (s, seg) in segments.iter().enumerate() {
            levels[seg.level].push(s);
        }
        for level in &mut levels {
            level.sort_by_key(|&s| segments[s].label);
        }

        Ok(Self {
            components: records,
            index,
            parent,
            children,
            depth,
            segment_of,
            segments,
            levels,
        })
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn component(&self, idx: usize) -> &Component {
        &self.components[idx]
    }

    pub fn id(&self, idx: usize) -> u32 {
        self.components[idx].id
    }

    pub fn index_of(&self, id: u32) -> Result<usize> {
        self.index.get(&id).copied().ok_or(Error::UnknownComponent(id))
    }

    pub fn root(&self) -> usize {
        self.parent.iter().position(Option::is_none).expect("validated tree has a root")
    }

    pub fn parent(&self, idx: usize) -> Option<usize> {
        self.parent[idx]
    }

    pub fn children(&self, idx: usize) -> &[usize] {
        &self.children[idx]
    }

    /// Component depth; the root is 0.
    pub fn depth(&self, idx: usize) -> usize {
        self.depth[idx]
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn segment_of(&self, idx: usize) -> usize {
        self.segment_of[idx]
    }

    /// Segment indices grouped by level, shallowest first.
    pub fn levels(&self) -> &[Vec<usize>] {
        &self.levels
    }

    /// Component indices on the path root..=sink.
    pub fn supply_path_indices(&self, sink: usize) -> Vec<usize> {
        let mut path = Vec::with_capacity(self.depth[sink] + 1);
        let mut cur = Some(sink);
        while let Some(u) = cur {
            path.push(u);
            cur = self.parent[u];
        }
        path.reverse();
        path
    }

    /// Component ids on the path from the root to `sink`, inclusive.
    pub fn supply_path(&self, sink: u32) -> Result<Vec<u32>> {
        let idx = self.index_of(sink)?;
        Ok(self
            .supply_path_indices(idx)
            .into_iter()
            .map(|i| self.components[i].id)
            .collect())
    }

    pub fn is_energized(&self, sink: usize, functional: &[bool]) -> bool {
        let mut cur = Some(sink);
        while let Some(u) = cur {
            if !functional[u] {
                return false;
            }
            cur = self.parent[u];
        }
        true
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub id: u32,
    pub population: u64,
    pub sink: u32,
    pub centroid: Point,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Retailer {
    pub id: u32,
    /// Employee count, the gravity-model weight.
    pub capacity: f64,
    pub sink: u32,
}

/// Retailer choice probabilities `P(r | c)`, one row per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct DemandModel {
    pub decay: f64,
    pub probs: Vec<Vec<f64>>,
}

/// `P(r | c) = w_r exp(b T_cr) / sum_r' w_r' exp(b T_cr')`.
pub fn gravity_probs(cell: u32, weights: &[f64], decay: f64, minutes: &[f64]) -> Result<Vec<f64>> {
    if !(decay < 0.0) {
        return Err(Error::Config(format!("gravity decay must be negative, got {decay}")));
    }
    if weights.len() != minutes.len() || weights.is_empty() {
        return Err(Error::Config(format!(
            "cell {cell}: {} weights for {} travel times",
            weights.len(),
            minutes.len()
        )));
    }
    if let Some(t) = minutes.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
        return Err(Error::Config(format!("cell {cell}: invalid travel time {t}")));
    }
    let raw: Vec<f64> = weights
        .iter()
        .zip(minutes)
        .map(|(w, t)| w * (decay * t).exp())
        .collect();
    let total: f64 = raw.iter().sum();
    if !(total > 0.0) || !total.is_finite() {
        return Err(Error::Renormalization { cell });
    }
    Ok(raw.into_iter().map(|a| a / total).collect())
}

impl DemandModel {
    /// `minutes[c][r]` is the travel time from cell `c` to retailer `r`.
    pub fn build(
        cells: &[GridCell],
        retailers: &[Retailer],
        decay: f64,
        minutes: &[Vec<f64>],
    ) -> Result<Self> {
        let weights: Vec<f64> = retailers.iter().map(|r| r.capacity).collect();
        if let Some(r) = retailers.iter().find(|r| !(r.capacity > 0.0)) {
            return Err(Error::Config(format!("retailer {} has non-positive capacity", r.id)));
        }
        if minutes.len() != cells.len() {
            return Err(Error::Config("travel-time matrix does not cover every cell".into()));
        }
        let probs = if retailers.is_empty() {
            vec![Vec::new(); cells.len()]
        } else {
            cells
                .iter()
                .zip(minutes)
                .map(|(c, row)| gravity_probs(c.id, &weights, decay, row))
                .collect::<Result<_>>()?
        };
        Ok(Self { decay, probs })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ServiceMode {
    /// People are served when their cell is energized.
    #[serde(rename = "case1")]
    Households,
    /// People are served when their cell is energized and the retailer they
    /// patronize is energized too, counted in expectation over `P(r | c)`.
    #[serde(rename = "case2")]
    HouseholdsAndRetailers,
}

impl FromStr for ServiceMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "case1" | "households" => Ok(ServiceMode::Households),
            "case2" | "households_and_retailers" | "households-and-retailers" => {
                Ok(ServiceMode::HouseholdsAndRetailers)
            }
            other => Err(Error::Config(format!("unknown service mode '{other}'"))),
        }
    }
}

impl fmt::Display for ServiceMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ServiceMode::Households => "case1",
            ServiceMode::HouseholdsAndRetailers => "case2",
        })
    }
}

/// The tree together with the demand it serves. Immutable after load.
#[derive(Debug, Clone)]
pub struct Network {
    pub tree: EpnTree,
    pub cells: Vec<GridCell>,
    pub retailers: Vec<Retailer>,
    pub demand: DemandModel,
    cell_sinks: Vec<usize>,
    retailer_sinks: Vec<usize>,
}

impl Network {
    pub fn new(
        tree: EpnTree,
        cells: Vec<GridCell>,
        retailers: Vec<Retailer>,
        demand: DemandModel,
    ) -> Result<Self> {
        let cell_sinks = cells
            .iter()
            .map(|c| tree.index_of(c.sink))
            .collect::<Result<Vec<_>>>()?;
        let retailer_sinks = retailers
            .iter()
            .map(|r| tree.index_of(r.sink))
            .collect::<Result<Vec<_>>>()?;
        if demand.probs.len() != cells.len()
            || demand.probs.iter().any(|row| row.len() != retailers.len())
        {
            return Err(Error::Config("demand model shape does not match cells x retailers".into()));
        }
        Ok(Self {
            tree,
            cells,
            retailers,
            demand,
            cell_sinks,
            retailer_sinks,
        })
    }

    pub fn total_population(&self) -> f64 {
        self.cells.iter().map(|c| c.population as f64).sum()
    }

    /// Sink component index per cell.
    pub fn cell_sinks(&self) -> &[usize] {
        &self.cell_sinks
    }

    pub fn retailer_sinks(&self) -> &[usize] {
        &self.retailer_sinks
    }

    /// Served people given per-cell and per-retailer energized predicates.
    /// The simulator calls this too, so both paths round identically.
    pub fn level_with(
        &self,
        cell_on: impl Fn(usize) -> bool,
        retailer_on: impl Fn(usize) -> bool,
        mode: ServiceMode,
    ) -> f64 {
        let mut total = 0.0;
        for (c, cell) in self.cells.iter().enumerate() {
            if !cell_on(c) {
                continue;
            }
            let pop = cell.population as f64;
            match mode {
                ServiceMode::Households => total += pop,
                ServiceMode::HouseholdsAndRetailers => {
                    let mut share = 0.0;
                    for (r, p) in self.demand.probs[c].iter().enumerate() {
                        if retailer_on(r) {
                            share += p;
                        }
                    }
                    total += pop * share;
                }
            }
        }
        total
    }

    /// People with electricity when exactly the components flagged in
    /// `functional` (by index) work.
    pub fn served_population(&self, functional: &[bool], mode: ServiceMode) -> f64 {
        let cell_on: Vec<bool> = self
            .cell_sinks
            .iter()
            .map(|&s| self.tree.is_energized(s, functional))
            .collect();
        let retailer_on: Vec<bool> = self
            .retailer_sinks
            .iter()
            .map(|&s| self.tree.is_energized(s, functional))
            .collect();
        self.level_with(|c| cell_on[c], |r| retailer_on[r], mode)
    }

    /// Population whose supply path crosses each component. In
    /// [`ServiceMode::HouseholdsAndRetailers`] a retailer also counts the
    /// people expected to shop there.
    pub fn subtree_demand(&self, mode: ServiceMode) -> Vec<f64> {
        let mut demand = vec![0.0; self.tree.len()];
        for (cell, &sink) in self.cells.iter().zip(&self.cell_sinks) {
            for u in self.tree.supply_path_indices(sink) {
                demand[u] += cell.population as f64;
            }
        }
        if mode == ServiceMode::HouseholdsAndRetailers {
            for (r, &sink) in self.retailer_sinks.iter().enumerate() {
                let customers: f64 = self
                    .cells
                    .iter()
                    .zip(&self.demand.probs)
                    .map(|(c, row)| c.population as f64 * row[r])
                    .sum();
                for u in self.tree.supply_path_indices(sink) {
                    demand[u] += customers;
                }
            }
        }
        demand
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn comp(id: u32, parent: Option<u32>) -> Component {
        Component {
            id,
            class: if parent.is_none() {
                ComponentClass::Substation
            } else {
                ComponentClass::Distribution
            },
            parent,
            location: Point::default(),
        }
    }

    #[test]
    fn chain_levels() {
        let t = EpnTree::build(vec![comp(3, Some(2)), comp(1, None), comp(2, Some(1))]).unwrap();
        let depths: Vec<_> = (0..3).map(|i| (t.id(i), t.depth(i))).collect();
        assert_eq!(depths, vec![(1, 0), (2, 1), (3, 2)]);
        assert_eq!(t.supply_path(3).unwrap(), vec![1, 2, 3]);
        assert_eq!(t.supply_path(1).unwrap(), vec![1]);
        // A pure chain is a single segment.
        assert_eq!(t.segments().len(), 1);
        assert_eq!(t.levels().len(), 1);
    }

    #[test]
    fn load_errors_are_distinct() {
        assert!(matches!(
            EpnTree::build(vec![comp(1, None), comp(2, None)]),
            Err(Error::MultipleRoots(_))
        ));
        assert!(matches!(
            EpnTree::build(vec![comp(1, None), comp(2, Some(9))]),
            Err(Error::DanglingParent { child: 2, parent: 9 })
        ));
        assert!(matches!(
            EpnTree::build(vec![comp(1, None), comp(2, Some(3)), comp(3, Some(2))]),
            Err(Error::Cycle(_))
        ));
        assert!(matches!(
            EpnTree::build(vec![comp(1, Some(2)), comp(2, Some(1))]),
            Err(Error::Cycle(_))
        ));
        assert!(matches!(
            EpnTree::build(vec![comp(1, None), comp(1, Some(1))]),
            Err(Error::DuplicateId(1))
        ));
        assert!(EpnTree::build(vec![]).is_err());
    }

    #[test]
    fn unknown_sink() {
        let t = EpnTree::build(vec![comp(1, None)]).unwrap();
        assert!(matches!(t.supply_path(7), Err(Error::UnknownComponent(7))));
    }

    #[test]
    fn segments_split_at_branches() {
        // 1-2 then branches 3-4 and 5; 4 branches again into 6 and 7.
        let t = EpnTree::build(vec![
            comp(1, None),
            comp(2, Some(1)),
            comp(3, Some(2)),
            comp(4, Some(3)),
            comp(5, Some(2)),
            comp(6, Some(4)),
            comp(7, Some(4)),
        ])
        .unwrap();
        let segs: Vec<(u32, usize, Vec<u32>)> = t
            .segments()
            .iter()
            .map(|s| (s.label, s.level, s.members.iter().map(|&m| t.id(m)).collect()))
            .collect();
        assert_eq!(
            segs,
            vec![
                (1, 0, vec![1, 2]),
                (3, 1, vec![3, 4]),
                (5, 1, vec![5]),
                (6, 2, vec![6]),
                (7, 2, vec![7]),
            ]
        );
    }

    #[test]
    fn gravity_cases() {
        assert_eq!(gravity_probs(0, &[5.0], -0.1, &[3.0]).unwrap(), vec![1.0]);
        assert_eq!(
            gravity_probs(0, &[3.0, 3.0], -0.1, &[4.0, 4.0]).unwrap(),
            vec![0.5, 0.5]
        );
        let p = gravity_probs(0, &[2.0, 1.0], -0.3, &[7.0, 7.0]).unwrap();
        assert!((p[0] - 2.0 / 3.0).abs() < 1e-15 && (p[1] - 1.0 / 3.0).abs() < 1e-15);
        assert!(matches!(
            gravity_probs(4, &[1.0, 1.0], -1.0, &[1e6, 1e6]),
            Err(Error::Renormalization { cell: 4 })
        ));
        assert!(gravity_probs(0, &[1.0], 0.1, &[1.0]).is_err());
        assert!(gravity_probs(0, &[1.0], -0.1, &[-1.0]).is_err());
    }

    fn toy_network() -> Network {
        // root 1 -> 2 (cell 10, pop 100), 1 -> 3 (cell 11, pop 200);
        // retailer 20 behind 2, retailer 21 behind 3.
        let tree = EpnTree::build(vec![comp(1, None), comp(2, Some(1)), comp(3, Some(1))]).unwrap();
        let cells = vec![
            GridCell { id: 10, population: 100, sink: 2, centroid: Point::default() },
            GridCell { id: 11, population: 200, sink: 3, centroid: Point::default() },
        ];
        let retailers = vec![
            Retailer { id: 20, capacity: 1.0, sink: 2 },
            Retailer { id: 21, capacity: 1.0, sink: 3 },
        ];
        let demand = DemandModel { decay: -0.1, probs: vec![vec![0.6, 0.4], vec![0.5, 0.5]] };
        Network::new(tree, cells, retailers, demand).unwrap()
    }

    #[test]
    fn served_population_cases() {
        let net = toy_network();
        let all = vec![true; 3];
        assert_eq!(net.served_population(&all, ServiceMode::Households), 300.0);
        let no_root = vec![false, true, true];
        assert_eq!(net.served_population(&no_root, ServiceMode::Households), 0.0);
        assert_eq!(net.served_population(&no_root, ServiceMode::HouseholdsAndRetailers), 0.0);
        // Only cell 10 energized, only retailer 20 energized: 100 * 0.6.
        let only_left = vec![true, true, false];
        assert!(
            (net.served_population(&only_left, ServiceMode::HouseholdsAndRetailers) - 60.0).abs()
                < 1e-12
        );
        assert_eq!(net.subtree_demand(ServiceMode::Households), vec![300.0, 100.0, 200.0]);
    }
}
