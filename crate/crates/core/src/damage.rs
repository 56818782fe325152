//! Lognormal fragility curves, damage-state sampling and restoration times.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};
use libm::erfc;

use crate::error::{Error, Result};
use crate::hazard::ImField;
use crate::network::ComponentClass;
use crate::rng::{self, Purpose};

/// Tolerance for negative differenced state probabilities.
pub const CROSSING_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DamageState {
    Undamaged = 0,
    Minor = 1,
    Moderate = 2,
    Extensive = 3,
    Complete = 4,
}

impl DamageState {
    pub const ALL: [DamageState; 5] = [
        DamageState::Undamaged,
        DamageState::Minor,
        DamageState::Moderate,
        DamageState::Extensive,
        DamageState::Complete,
    ];

    pub fn from_ordinal(k: usize) -> Option<Self> {
        Self::ALL.get(k).copied()
    }

    pub fn ordinal(self) -> usize {
        self as usize
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            DamageState::Undamaged => "undamaged",
            DamageState::Minor => "minor",
            DamageState::Moderate => "moderate",
            DamageState::Extensive => "extensive",
            DamageState::Complete => "complete",
        }
    }
}

impl fmt::Display for DamageState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DamageState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        if let Ok(k) = s.parse::<usize>() {
            return Self::from_ordinal(k).ok_or_else(|| Error::Config(format!("no damage state {k}")));
        }
        Self::ALL
            .into_iter()
            .find(|d| d.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown damage state '{s}'")))
    }
}

/// Standard normal CDF.
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// `P(DS >= ds | IM = im) = Phi((ln im - lambda) / xi)`.
pub fn exceedance_prob(lambda: f64, xi: f64, im: f64) -> Result<f64> {
    if !(im > 0.0) {
        return Err(Error::Domain(format!("intensity must be positive, got {im}")));
    }
    if !(xi > 0.0) {
        return Err(Error::Domain(format!("fragility dispersion must be positive, got {xi}")));
    }
    Ok(std_normal_cdf((im.ln() - lambda) / xi))
}

/// Lognormal parameters of one exceedance curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fragility {
    /// Mean of ln(im) at the threshold, im in g.
    pub lambda: f64,
    /// Standard deviation of ln(im).
    pub xi: f64,
}

/// Exceedance curves for Minor..Complete of one component class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassFragility {
    pub curves: [Fragility; 4],
}

impl ClassFragility {
    pub fn new(curves: [Fragility; 4]) -> Result<Self> {
        let f = Self { curves };
        f.validate()?;
        Ok(f)
    }

    /// Curves must be ordered so the differenced probabilities stay
    /// non-negative. Equal dispersions reduce to ordered medians; otherwise
    /// the curves are checked on a 100-point log grid spanning their support.
    pub fn validate(&self) -> Result<()> {
        if let Some(c) = self.curves.iter().find(|c| !(c.xi > 0.0) || !c.lambda.is_finite()) {
            return Err(Error::Config(format!("invalid fragility curve {c:?}")));
        }
        let xi0 = self.curves[0].xi;
        if self.curves.iter().all(|c| c.xi == xi0) {
            if self.curves.windows(2).all(|w| w[0].lambda <= w[1].lambda) {
                return Ok(());
            }
            return Err(Error::Config("fragility medians decrease with damage state".into()));
        }
        let lo = self
            .curves
            .iter()
            .map(|c| c.lambda - 4.0 * c.xi)
            .fold(f64::INFINITY, f64::min);
        let hi = self
            .curves
            .iter()
            .map(|c| c.lambda + 4.0 * c.xi)
            .fold(f64::NEG_INFINITY, f64::max);
        for i in 0..100 {
            let im = (lo + (hi - lo) * i as f64 / 99.0).exp();
            self.state_probs(im)?;
        }
        Ok(())
    }

    pub fn exceedances(&self, im: f64) -> Result<[f64; 4]> {
        let mut out = [0.0; 4];
        for (o, c) in out.iter_mut().zip(&self.curves) {
            *o = exceedance_prob(c.lambda, c.xi, im)?;
        }
        Ok(out)
    }

    /// Probability of each of the five states at `im`.
    pub fn state_probs(&self, im: f64) -> Result<[f64; 5]> {
        let e = self.exceedances(im)?;
        differenced(&e)
    }

    /// Single uniform draw against the cumulative exceedance thresholds.
    pub fn sample<R: Rng>(&self, im: f64, rng: &mut R) -> Result<DamageState> {
        let e = self.exceedances(im)?;
        differenced(&e)?;
        let u: f64 = rng.random();
        let k = e.iter().take_while(|&&p| u < p).count();
        Ok(DamageState::from_ordinal(k).expect("at most four thresholds"))
    }
}

/// State probabilities from exceedances `P(DS >= 1..=4)`, with
/// `P(DS >= 0) = 1` and `P(DS >= 5) = 0`.
pub fn differenced(exceed: &[f64; 4]) -> Result<[f64; 5]> {
    let mut cum = [1.0, 0.0, 0.0, 0.0, 0.0, 0.0];
    cum[1..5].copy_from_slice(exceed);
    let mut out = [0.0; 5];
    for k in 0..5 {
        let p = cum[k] - cum[k + 1];
        if p < -CROSSING_TOLERANCE {
            return Err(Error::Config(format!(
                "fragility curves cross: P(state {k}) = {p}"
            )));
        }
        out[k] = p.max(0.0);
    }
    Ok(out)
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FragilitySet {
    pub classes: BTreeMap<ComponentClass, ClassFragility>,
}

impl FragilitySet {
    pub fn get(&self, class: ComponentClass) -> Result<&ClassFragility> {
        self.classes
            .get(&class)
            .ok_or_else(|| Error::Config(format!("no fragility curves for class {class}")))
    }
}

/// Repair days per class and damage state.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RestorationTable {
    days: BTreeMap<ComponentClass, [f64; 5]>,
}

impl RestorationTable {
    pub fn new(days: BTreeMap<ComponentClass, [f64; 5]>) -> Result<Self> {
        for (class, row) in &days {
            if row[0] != 0.0 {
                return Err(Error::Config(format!("{class}: undamaged repair time must be 0")));
            }
            if row.iter().any(|d| !(d.is_finite() && *d >= 0.0)) {
                return Err(Error::Config(format!("{class}: repair times must be finite and >= 0")));
            }
            if row.windows(2).any(|w| w[1] < w[0]) {
                return Err(Error::Config(format!(
                    "{class}: repair times must not decrease with damage"
                )));
            }
            if row[1..].iter().any(|d| *d <= 0.0) {
                return Err(Error::Config(format!(
                    "{class}: damaged components need a positive repair time"
                )));
            }
        }
        Ok(Self { days })
    }

    /// Restoration times of the Gilroy case study, in days.
    pub fn reference() -> Self {
        let mut days = BTreeMap::new();
        days.insert(ComponentClass::Substation, [0.0, 1.0, 3.0, 7.0, 30.0]);
        days.insert(ComponentClass::Transmission, [0.0, 0.5, 1.0, 1.0, 2.0]);
        days.insert(ComponentClass::Distribution, [0.0, 0.5, 1.0, 1.0, 1.0]);
        Self { days }
    }

    pub fn restoration_time(&self, class: ComponentClass, ds: DamageState) -> Result<f64> {
        self.days
            .get(&class)
            .map(|row| row[ds.ordinal()])
            .ok_or_else(|| Error::Config(format!("no restoration times for class {class}")))
    }

    pub fn rows(&self) -> impl Iterator<Item = (ComponentClass, &[f64; 5])> {
        self.days.iter().map(|(c, r)| (*c, r))
    }
}

/// Post-event damage: state and initial repair time per component index.
#[derive(Debug, Clone, PartialEq)]
pub struct DamageScenario {
    pub states: Vec<DamageState>,
    pub repair_days: Vec<f64>,
}

impl DamageScenario {
    pub fn from_repair_days(repair_days: Vec<f64>) -> Self {
        let states = repair_days
            .iter()
            .map(|&d| if d > 0.0 { DamageState::Complete } else { DamageState::Undamaged })
            .collect();
        Self { states, repair_days }
    }

    pub fn damaged_count(&self) -> usize {
        self.repair_days.iter().filter(|&&d| d > 0.0).count()
    }
}

/// Per-component intensity: the value at the component's nearest site.
pub fn component_intensities(field: &ImField, nearest_site: &[usize]) -> Vec<f64> {
    nearest_site.iter().map(|&s| field.values[s]).collect()
}

/// Samples one damage state per component. Each component draws from its
/// own stream keyed by its id, so the result does not depend on the order
/// components are visited.
pub fn generate_scenario(
    intensities: &[f64],
    classes: &[ComponentClass],
    ids: &[u32],
    frags: &FragilitySet,
    table: &RestorationTable,
    seed: u64,
) -> Result<DamageScenario> {
    if intensities.len() != classes.len() || ids.len() != classes.len() {
        return Err(Error::Config("one intensity per component is required".into()));
    }
    let mut states = Vec::with_capacity(ids.len());
    let mut repair_days = Vec::with_capacity(ids.len());
    for ((&im, &class), &id) in intensities.iter().zip(classes).zip(ids) {
        let mut rng = rng::stream(seed, Purpose::Damage, u64::from(id));
        let ds = frags.get(class)?.sample(im, &mut rng)?;
        states.push(ds);
        repair_days.push(table.restoration_time(class, ds)?);
    }
    Ok(DamageScenario { states, repair_days })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn equal_xi(medians: [f64; 4], xi: f64) -> ClassFragility {
        ClassFragility::new(medians.map(|m: f64| Fragility { lambda: m.ln(), xi })).unwrap()
    }

    #[test]
    fn exceedance_at_median_is_half() {
        for lambda in [-2.0, -0.3, 0.0, 1.7] {
            let p = exceedance_prob(lambda, 0.6, f64::exp(lambda)).unwrap();
            assert!((p - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn exceedance_one_sigma() {
        // Phi(1) to 30 digits: 0.841344746068542948585232545632
        let p = exceedance_prob(0.0, 1.0, std::f64::consts::E).unwrap();
        assert!((p - 0.841_344_746_068_543).abs() < 1e-14, "{p:e}");
    }

    #[test]
    fn exceedance_limits_and_domain() {
        assert!(exceedance_prob(0.0, 0.5, 1e-300).unwrap() < 1e-12);
        assert!(exceedance_prob(0.0, 0.5, 1e300).unwrap() > 1.0 - 1e-12);
        assert!(exceedance_prob(0.0, 0.5, 0.0).is_err());
        assert!(exceedance_prob(0.0, 0.5, -1.0).is_err());
        assert!(exceedance_prob(0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn differencing_identity() {
        let p = differenced(&[0.8, 0.5, 0.3, 0.1]).unwrap();
        let want = [0.2, 0.3, 0.2, 0.2, 0.1];
        for (a, b) in p.iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!(differenced(&[0.5, 0.6, 0.3, 0.1]).is_err());
        // Tiny negatives are clamped.
        let p = differenced(&[0.5, 0.5 + 1e-14, 0.3, 0.1]).unwrap();
        assert_eq!(p[1], 0.0);
    }

    #[test]
    fn tiny_intensity_is_undamaged() {
        let f = equal_xi([0.2, 0.4, 0.6, 1.0], 0.5);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            assert_eq!(f.sample(1e-6, &mut rng).unwrap(), DamageState::Undamaged);
        }
    }

    #[test]
    fn crossing_curves_rejected() {
        let bad = [0.2, 0.1, 0.6, 1.0].map(|m: f64| Fragility { lambda: m.ln(), xi: 0.5 });
        assert!(ClassFragility::new(bad).is_err());
        // Unequal dispersions that cross somewhere on the grid.
        let bad = [
            Fragility { lambda: 0.0, xi: 0.2 },
            Fragility { lambda: 0.1, xi: 1.5 },
            Fragility { lambda: 0.2, xi: 0.2 },
            Fragility { lambda: 0.3, xi: 0.2 },
        ];
        assert!(ClassFragility::new(bad).is_err());
    }

    #[test]
    fn reference_restoration_times() {
        let t = RestorationTable::reference();
        use ComponentClass::*;
        assert_eq!(t.restoration_time(Substation, DamageState::Moderate).unwrap(), 3.0);
        assert_eq!(t.restoration_time(Transmission, DamageState::Complete).unwrap(), 2.0);
        assert_eq!(t.restoration_time(Distribution, DamageState::Minor).unwrap(), 0.5);
        for class in ComponentClass::ALL {
            for ds in DamageState::ALL {
                let d = t.restoration_time(class, ds).unwrap();
                assert_eq!(d == 0.0, ds == DamageState::Undamaged);
            }
        }
        assert!(RestorationTable::default()
            .restoration_time(Substation, DamageState::Minor)
            .is_err());
    }

    #[test]
    fn restoration_table_validation() {
        let mut days = BTreeMap::new();
        days.insert(ComponentClass::Substation, [0.0, 3.0, 1.0, 7.0, 30.0]);
        assert!(RestorationTable::new(days.clone()).is_err());
        days.insert(ComponentClass::Substation, [1.0, 1.0, 3.0, 7.0, 30.0]);
        assert!(RestorationTable::new(days).is_err());
    }

    #[test]
    fn scenario_is_order_independent() {
        let mut frags = FragilitySet::default();
        frags.classes.insert(ComponentClass::Distribution, equal_xi([0.2, 0.4, 0.6, 1.0], 0.6));
        let table = RestorationTable::reference();
        let ids: Vec<u32> = (1..=40).collect();
        let classes = vec![ComponentClass::Distribution; 40];
        let ims: Vec<f64> = (0..40).map(|i| 0.1 + 0.02 * i as f64).collect();
        let a = generate_scenario(&ims, &classes, &ids, &frags, &table, 5).unwrap();
        let rev_ids: Vec<u32> = ids.iter().rev().copied().collect();
        let rev_ims: Vec<f64> = ims.iter().rev().copied().collect();
        let b = generate_scenario(&rev_ims, &classes, &rev_ids, &frags, &table, 5).unwrap();
        let b_states: Vec<_> = b.states.iter().rev().copied().collect();
        assert_eq!(a.states, b_states);
        for (ds, d) in a.states.iter().zip(&a.repair_days) {
            assert_eq!(*d == 0.0, *ds == DamageState::Undamaged);
        }
    }
}
