//! CSV input and output. Every loader reports problems as `file:line`.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::Write;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::damage::{ClassFragility, DamageState, Fragility, FragilitySet, RestorationTable};
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::network::{Component, ComponentClass, GridCell, Retailer};
use crate::sim::RecoveryTrajectory;

fn input_error(path: &Path, line: u64, message: impl Into<String>) -> Error {
    Error::Input {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn io_error(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Reads every row of a headed CSV file, paired with its 1-based line.
pub fn read_rows<T: DeserializeOwned>(path: &Path) -> Result<Vec<(u64, T)>> {
    let file = File::open(path).map_err(|e| io_error(path, e))?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).comment(Some(b'#')).from_reader(file);
    let headers = reader.headers().map_err(|e| input_error(path, 1, e.to_string()))?.clone();
    let mut rows = Vec::new();
    let mut record = csv::StringRecord::new();
    loop {
        match reader.read_record(&mut record) {
            Ok(false) => break,
            Ok(true) => {}
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line());
                return Err(input_error(path, line, e.to_string()));
            }
        }
        let line = record.position().map_or(0, |p| p.line());
        let row = record
            .deserialize(Some(&headers))
            .map_err(|e| input_error(path, line, e.to_string()))?;
        rows.push((line, row));
    }
    Ok(rows)
}

fn finite(path: &Path, line: u64, name: &str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(input_error(path, line, format!("{name} must be finite")))
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ComponentRow {
    pub id: u32,
    pub class: String,
    pub parent_id: Option<u32>,
    pub x_km: f64,
    pub y_km: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CellRow {
    pub id: u32,
    pub population: u64,
    pub sink_id: u32,
    pub x_km: f64,
    pub y_km: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct RetailerRow {
    pub id: u32,
    pub capacity: f64,
    pub sink_id: u32,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct TravelRow {
    pub cell_id: u32,
    pub retailer_id: u32,
    pub minutes: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct FragilityRow {
    pub class: String,
    pub state: String,
    pub lambda: f64,
    pub xi: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct RestorationRow {
    pub class: String,
    pub state: String,
    pub days: f64,
}

fn parse_class(path: &Path, line: u64, s: &str) -> Result<ComponentClass> {
    s.parse().map_err(|e: Error| input_error(path, line, e.to_string()))
}

fn parse_state(path: &Path, line: u64, s: &str) -> Result<DamageState> {
    s.parse().map_err(|e: Error| input_error(path, line, e.to_string()))
}

pub fn load_components(path: &Path) -> Result<Vec<Component>> {
    read_rows::<ComponentRow>(path)?
        .into_iter()
        .map(|(line, r)| {
            Ok(Component {
                id: r.id,
                class: parse_class(path, line, &r.class)?,
                parent: r.parent_id,
                location: Point::new(finite(path, line, "x_km", r.x_km)?, finite(path, line, "y_km", r.y_km)?),
            })
        })
        .collect()
}

pub fn load_cells(path: &Path) -> Result<Vec<GridCell>> {
    let mut seen = HashMap::new();
    read_rows::<CellRow>(path)?
        .into_iter()
        .map(|(line, r)| {
            if let Some(first) = seen.insert(r.id, line) {
                return Err(input_error(path, line, format!("cell {} already defined on line {first}", r.id)));
            }
            Ok(GridCell {
                id: r.id,
                population: r.population,
                sink: r.sink_id,
                centroid: Point::new(finite(path, line, "x_km", r.x_km)?, finite(path, line, "y_km", r.y_km)?),
            })
        })
        .collect()
}

pub fn load_retailers(path: &Path) -> Result<Vec<Retailer>> {
    let mut seen = HashMap::new();
    read_rows::<RetailerRow>(path)?
        .into_iter()
        .map(|(line, r)| {
            if let Some(first) = seen.insert(r.id, line) {
                return Err(input_error(path, line, format!("retailer {} already defined on line {first}", r.id)));
            }
            if !(r.capacity > 0.0 && r.capacity.is_finite()) {
                return Err(input_error(path, line, "capacity must be positive"));
            }
            Ok(Retailer {
                id: r.id,
                capacity: r.capacity,
                sink: r.sink_id,
            })
        })
        .collect()
}

/// Travel minutes as a dense `cells x retailers` matrix in input order.
pub fn load_travel_times(path: &Path, cells: &[GridCell], retailers: &[Retailer]) -> Result<Vec<Vec<f64>>> {
    let cell_pos: HashMap<u32, usize> = cells.iter().enumerate().map(|(i, c)| (c.id, i)).collect();
    let ret_pos: HashMap<u32, usize> = retailers.iter().enumerate().map(|(i, r)| (r.id, i)).collect();
    let mut m = vec![vec![f64::NAN; retailers.len()]; cells.len()];
    for (line, r) in read_rows::<TravelRow>(path)? {
        let c = *cell_pos
            .get(&r.cell_id)
            .ok_or_else(|| input_error(path, line, format!("unknown cell {}", r.cell_id)))?;
        let k = *ret_pos
            .get(&r.retailer_id)
            .ok_or_else(|| input_error(path, line, format!("unknown retailer {}", r.retailer_id)))?;
        if !(r.minutes.is_finite() && r.minutes >= 0.0) {
            return Err(input_error(path, line, "minutes must be finite and non-negative"));
        }
        if !m[c][k].is_nan() {
            return Err(input_error(
                path,
                line,
                format!("duplicate pair ({}, {})", r.cell_id, r.retailer_id),
            ));
        }
        m[c][k] = r.minutes;
    }
    for (c, row) in m.iter().enumerate() {
        if let Some(k) = row.iter().position(|t| t.is_nan()) {
            return Err(input_error(
                path,
                0,
                format!("missing travel time for cell {} and retailer {}", cells[c].id, retailers[k].id),
            ));
        }
    }
    Ok(m)
}

pub fn load_fragilities(path: &Path) -> Result<FragilitySet> {
    let mut partial: BTreeMap<ComponentClass, [Option<Fragility>; 4]> = BTreeMap::new();
    let mut last_line = BTreeMap::new();
    for (line, r) in read_rows::<FragilityRow>(path)? {
        let class = parse_class(path, line, &r.class)?;
        let state = parse_state(path, line, &r.state)?;
        if state == DamageState::Undamaged {
            return Err(input_error(path, line, "undamaged has no fragility curve"));
        }
        if !(r.xi > 0.0 && r.xi.is_finite()) {
            return Err(input_error(path, line, "xi must be positive"));
        }
        let slot = &mut partial.entry(class).or_default()[state.ordinal() - 1];
        if slot.is_some() {
            return Err(input_error(path, line, format!("duplicate curve for {class} {state}")));
        }
        *slot = Some(Fragility {
            lambda: finite(path, line, "lambda", r.lambda)?,
            xi: r.xi,
        });
        last_line.insert(class, line);
    }
    let mut set = FragilitySet::default();
    for (class, curves) in partial {
        let line = last_line[&class];
        let mut full = [Fragility { lambda: 0.0, xi: 1.0 }; 4];
        for (k, c) in curves.iter().enumerate() {
            full[k] = c.ok_or_else(|| {
                input_error(path, line, format!("{class} lacks a curve for state {}", k + 1))
            })?;
        }
        let cf = ClassFragility::new(full).map_err(|e| input_error(path, line, e.to_string()))?;
        set.classes.insert(class, cf);
    }
    Ok(set)
}

pub fn load_restoration(path: &Path) -> Result<RestorationTable> {
    let mut partial: BTreeMap<ComponentClass, [Option<f64>; 5]> = BTreeMap::new();
    let mut last = 0;
    for (line, r) in read_rows::<RestorationRow>(path)? {
        let class = parse_class(path, line, &r.class)?;
        let state = parse_state(path, line, &r.state)?;
        let slot = &mut partial.entry(class).or_default()[state.ordinal()];
        if slot.is_some() {
            return Err(input_error(path, line, format!("duplicate entry for {class} {state}")));
        }
        *slot = Some(finite(path, line, "days", r.days)?);
        last = line;
    }
    let mut days = BTreeMap::new();
    for (class, row) in partial {
        let mut full = [0.0; 5];
        for (k, d) in row.iter().enumerate() {
            full[k] = match (k, d) {
                (_, Some(d)) => *d,
                (0, None) => 0.0,
                (_, None) => {
                    return Err(input_error(path, last, format!("{class} lacks a repair time for state {k}")));
                }
            };
        }
        days.insert(class, full);
    }
    RestorationTable::new(days).map_err(|e| input_error(path, last, e.to_string()))
}

fn create(path: &Path) -> Result<File> {
    File::create(path).map_err(|e| io_error(path, e))
}

/// Writes serializable rows with a header.
pub fn write_rows<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    for row in rows {
        w.serialize(row).map_err(|e| io_error(path, e.into()))?;
    }
    w.flush().map_err(|e| io_error(path, e))
}

#[derive(Debug, Serialize)]
struct TrajectoryRow {
    epoch: usize,
    clock_days: f64,
    k_days: f64,
    h_people: f64,
    served_fraction: f64,
}

/// One row per epoch, preceded by an epoch-0 row holding the initial level.
pub fn write_trajectory(path: &Path, trajectory: &RecoveryTrajectory) -> Result<()> {
    let p = trajectory.total_population;
    let frac = |h: f64| if p > 0.0 { h / p } else { 1.0 };
    let initial = TrajectoryRow {
        epoch: 0,
        clock_days: 0.0,
        k_days: 0.0,
        h_people: trajectory.initial_level,
        served_fraction: frac(trajectory.initial_level),
    };
    let rows = trajectory.epochs.iter().map(|e| TrajectoryRow {
        epoch: e.epoch,
        clock_days: e.clock,
        k_days: e.interval,
        h_people: e.level,
        served_fraction: frac(e.level),
    });
    if trajectory.epochs.is_empty() {
        // Nothing to repair: header only.
        return header_only(path);
    }
    write_rows(path, std::iter::once(initial).chain(rows))
}

fn header_only(path: &Path) -> Result<()> {
    let mut f = create(path)?;
    writeln!(f, "epoch,clock_days,k_days,h_people,served_fraction").map_err(|e| io_error(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| io_error(path, e))
}
