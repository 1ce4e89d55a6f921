//! Seeded random instances in the style of the classic BSS design experiments:
//! MSC and BTS sites uniform over a square, one BSC candidate on each BTS
//! site, BTS traffic uniform on `[0, traffic_max_erl]`.
//!
//! The generator is ChaCha8 seeded through `seed_from_u64`. Draws happen in
//! a fixed order (MSC x, y, then x, y, traffic for each BTS), so a seed
//! always reproduces the same instance bit for bit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{BscCandidate, BscModel, BtsNode, CostRates, Instance, Site};
use crate::traffic::{build_capacity_table, Gos, TimeslotSchedule};

/// Default acquisition costs of the small, medium and large models. Arbitrary units.
pub const DEFAULT_MODEL_COSTS: [f64; 3] = [1000.0, 3000.0, 5000.0];

#[derive(Debug, Clone, PartialEq)]
pub struct GenParams {
    pub n_bts: usize,
    /// Number of BSC candidates, placed on the first BTS sites. Defaults to one per BTS.
    pub bsc_candidates: Option<usize>,
    pub area_km: f64,
    pub traffic_max_erl: f64,
    pub rates: CostRates,
    pub models: Vec<BscModel>,
    pub gos: Gos,
    pub max_lines: usize,
    /// Voice timeslots per E1 line; the standard schedule when absent.
    pub schedule: Option<TimeslotSchedule>,
    pub seed: u64,
}

impl GenParams {
    pub fn new(n_bts: usize, seed: u64) -> Self {
        Self {
            n_bts,
            bsc_candidates: None,
            area_km: 100.0,
            traffic_max_erl: 80.0,
            rates: CostRates::default(),
            models: BscModel::standard_catalog(DEFAULT_MODEL_COSTS),
            gos: Gos::default(),
            max_lines: 40,
            schedule: None,
            seed,
        }
    }

    pub fn with_bsc_candidates(mut self, n: usize) -> Self {
        self.bsc_candidates = Some(n);
        self
    }

    fn validate(&self) -> Result<()> {
        if self.n_bts == 0 {
            return Err(Error::Config("at least one BTS is required".into()));
        }
        if let Some(k) = self.bsc_candidates {
            if k == 0 || k > self.n_bts {
                return Err(Error::Config(format!(
                    "BSC candidate count must be in 1..={}, got {k}",
                    self.n_bts
                )));
            }
        }
        if !self.traffic_max_erl.is_finite() || self.traffic_max_erl <= 0.0 {
            return Err(Error::Config(format!(
                "maximum BTS traffic must be positive, got {}",
                self.traffic_max_erl
            )));
        }
        if !self.area_km.is_finite() || self.area_km <= 0.0 {
            return Err(Error::Config(format!(
                "area side must be positive, got {}",
                self.area_km
            )));
        }
        Ok(())
    }
}

pub fn generate(params: &GenParams) -> Result<Instance> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let area = params.area_km;

    let msc = Site::new(0, rng.gen::<f64>() * area, rng.gen::<f64>() * area);
    let bts: Vec<BtsNode> = (0..params.n_bts)
        .map(|i| {
            let site = Site::new(i as u32, rng.gen::<f64>() * area, rng.gen::<f64>() * area);
            BtsNode::new(site, rng.gen::<f64>() * params.traffic_max_erl)
        })
        .collect();
    let bsc = bts
        .iter()
        .take(params.bsc_candidates.unwrap_or(params.n_bts))
        .map(|b| BscCandidate::new(b.site))
        .collect();

    let schedule = params
        .schedule
        .clone()
        .unwrap_or_else(|| TimeslotSchedule::standard(params.max_lines));
    let table = build_capacity_table(params.max_lines, &schedule, params.gos)?;

    Instance::new(msc, bts, bsc, params.models.clone(), table, params.rates)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn same_seed_same_instance() {
        let p = GenParams::new(5, 11);
        assert_eq!(generate(&p).unwrap(), generate(&p).unwrap());
        let q = GenParams::new(5, 12);
        assert_ne!(generate(&p).unwrap(), generate(&q).unwrap());
    }

    #[test]
    fn default_sizes() {
        let inst = generate(&GenParams::new(50, 3)).unwrap();
        assert_eq!(inst.bts().len(), 50);
        assert_eq!(inst.bsc().len(), 50);
        assert_eq!(inst.capacity_table().entries().len(), 41);
        assert_eq!(inst.models().len(), 3);
        for (b, c) in inst.bts().iter().zip(inst.bsc()) {
            assert_eq!(b.site, c.site);
            assert_eq!(b.abis_lines, 1);
        }
    }

    #[test]
    fn rejects_bad_params() {
        assert!(generate(&GenParams::new(0, 1)).is_err());
        assert!(generate(&GenParams::new(3, 1).with_bsc_candidates(4)).is_err());
        let mut p = GenParams::new(3, 1);
        p.traffic_max_erl = 0.0;
        assert!(generate(&p).is_err());
    }

    #[test]
    fn fewer_candidates() {
        let inst = generate(&GenParams::new(7, 5).with_bsc_candidates(2)).unwrap();
        assert_eq!(inst.bsc().len(), 2);
        assert_eq!(inst.bsc()[1].site, inst.bts()[1].site);
    }

    proptest! {
        #[test]
        fn generated_values_stay_in_range(n in 1usize..40, seed in any::<u64>()) {
            let p = GenParams::new(n, seed);
            let inst = generate(&p).unwrap();
            let inside = |s: &Site| (0.0..=p.area_km).contains(&s.x) && (0.0..=p.area_km).contains(&s.y);
            prop_assert!(inside(inst.msc()));
            for b in inst.bts() {
                prop_assert!(inside(&b.site));
                prop_assert!((0.0..=p.traffic_max_erl).contains(&b.traffic_erl));
            }
        }
    }
}
