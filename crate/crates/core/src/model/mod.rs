//! In-memory description of a BSS design problem and its solutions.
//!
//! An [`Instance`] holds the BTS demand nodes, the candidate BSC sites, the
//! catalogue of BSC models, the trunk capacity table and the cost rates. All
//! collections are sorted by id on construction, so index order equals id
//! order throughout the crate and every tie-break "lowest id wins" reduces to
//! "lowest index wins".

mod cost;
mod feasibility;
mod stats;

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::traffic::CapacityTable;

pub use cost::{
    complete_assignment, evaluate, link_cost, trunk_cost, CostBreakdown, CostModel, SiteChoice,
    Step,
};
pub use feasibility::{check_feasibility, ConstraintKind, Violation};
pub use stats::{formulation_stats, FormulationStats};

pub type SiteId = u32;
pub type ModelId = u32;

/// A point on the planning plane, coordinates in km.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Site {
    pub id: SiteId,
    pub x: f64,
    pub y: f64,
}

impl Site {
    pub fn new(id: SiteId, x: f64, y: f64) -> Self {
        Self { id, x, y }
    }

    /// Euclidean distance in km.
    #[inline]
    pub fn distance(&self, other: &Site) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BtsNode {
    pub site: Site,
    /// Offered traffic in Erlangs.
    pub traffic_erl: f64,
    /// E1 lines on the Abis link towards the serving BSC.
    pub abis_lines: u32,
}

impl BtsNode {
    pub fn new(site: Site, traffic_erl: f64) -> Self {
        Self {
            site,
            traffic_erl,
            abis_lines: 1,
        }
    }

    pub fn id(&self) -> SiteId {
        self.site.id
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BscCandidate {
    pub site: Site,
}

impl BscCandidate {
    pub fn new(site: Site) -> Self {
        Self { site }
    }

    pub fn id(&self) -> SiteId {
        self.site.id
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BscModel {
    pub id: ModelId,
    pub name: String,
    /// Traffic the controller can switch, in Erlangs.
    pub capacity_erl: f64,
    /// Purchase cost amortized over the analysis period.
    pub acquisition_cost: f64,
}

impl BscModel {
    pub fn new(id: ModelId, name: impl Into<String>, capacity_erl: f64, cost: f64) -> Self {
        Self {
            id,
            name: name.into(),
            capacity_erl,
            acquisition_cost: cost,
        }
    }

    /// Small, medium and large controllers of 512, 2048 and 4096 Erlangs.
    pub fn standard_catalog(costs: [f64; 3]) -> Vec<BscModel> {
        vec![
            BscModel::new(0, "small", 512.0, costs[0]),
            BscModel::new(1, "medium", 2048.0, costs[1]),
            BscModel::new(2, "large", 4096.0, costs[2]),
        ]
    }
}

/// Transmission prices per km and per E1 line over the analysis period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostRates {
    /// BTS to BSC links.
    pub abis_rate: f64,
    /// BSC to MSC trunks.
    pub a_rate: f64,
}

impl Default for CostRates {
    fn default() -> Self {
        Self {
            abis_rate: 10.0,
            a_rate: 10.0,
        }
    }
}

/// A validated problem instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    msc: Site,
    bts: Vec<BtsNode>,
    bsc: Vec<BscCandidate>,
    models: Vec<BscModel>,
    capacity_table: CapacityTable,
    rates: CostRates,
}

impl Instance {
    /// Validates and canonicalizes (sorts by id) the problem data.
    ///
    /// Rejects instances where some BTS alone exceeds the largest BSC model,
    /// since no assignment can then be feasible.
    pub fn new(
        msc: Site,
        mut bts: Vec<BtsNode>,
        mut bsc: Vec<BscCandidate>,
        mut models: Vec<BscModel>,
        capacity_table: CapacityTable,
        rates: CostRates,
    ) -> Result<Self> {
        let invalid = |msg: String| Err(Error::InvalidInstance(msg));

        if bts.is_empty() {
            return invalid("the BTS set is empty".into());
        }
        if bsc.is_empty() {
            return invalid("the BSC candidate set is empty".into());
        }
        if models.is_empty() {
            return invalid("the BSC model catalogue is empty".into());
        }

        bts.sort_by_key(BtsNode::id);
        bsc.sort_by_key(BscCandidate::id);
        models.sort_by_key(|m| m.id);

        if let Some(w) = bts.windows(2).find(|w| w[0].id() == w[1].id()) {
            return invalid(format!("duplicate BTS id {}", w[0].id()));
        }
        if let Some(w) = bsc.windows(2).find(|w| w[0].id() == w[1].id()) {
            return invalid(format!("duplicate BSC id {}", w[0].id()));
        }
        if let Some(w) = models.windows(2).find(|w| w[0].id == w[1].id) {
            return invalid(format!("duplicate BSC model id {}", w[0].id));
        }

        let finite_site = |s: &Site| s.x.is_finite() && s.y.is_finite();
        if !finite_site(&msc) {
            return invalid("MSC coordinates are not finite".into());
        }
        for b in &bts {
            if !finite_site(&b.site) {
                return invalid(format!("BTS {} coordinates are not finite", b.id()));
            }
            if !b.traffic_erl.is_finite() || b.traffic_erl < 0.0 {
                return invalid(format!(
                    "BTS {} traffic {} Erl must be finite and non-negative",
                    b.id(),
                    b.traffic_erl
                ));
            }
            if b.abis_lines == 0 {
                return invalid(format!("BTS {} needs at least one Abis E1 line", b.id()));
            }
        }
        for c in &bsc {
            if !finite_site(&c.site) {
                return invalid(format!("BSC {} coordinates are not finite", c.id()));
            }
        }
        for m in &models {
            if !m.capacity_erl.is_finite() || m.capacity_erl <= 0.0 {
                return invalid(format!(
                    "BSC model {} capacity {} Erl must be positive",
                    m.id, m.capacity_erl
                ));
            }
            if !m.acquisition_cost.is_finite() || m.acquisition_cost < 0.0 {
                return invalid(format!(
                    "BSC model {} cost {} must be non-negative",
                    m.id, m.acquisition_cost
                ));
            }
        }
        for (name, rate) in [("abis_rate", rates.abis_rate), ("a_rate", rates.a_rate)] {
            if !rate.is_finite() || rate < 0.0 {
                return invalid(format!("{name} {rate} must be non-negative"));
            }
        }

        let max_model = models.iter().map(|m| m.capacity_erl).fold(0.0, f64::max);
        if capacity_table.max_capacity() < max_model {
            return invalid(format!(
                "capacity table tops out at {:.3} Erl ({} lines), below the largest BSC model ({} Erl)",
                capacity_table.max_capacity(),
                capacity_table.max_lines(),
                max_model
            ));
        }
        if let Some(b) = bts.iter().find(|b| b.traffic_erl > max_model) {
            return invalid(format!(
                "BTS {} traffic {} Erl exceeds the largest BSC model capacity {} Erl",
                b.id(),
                b.traffic_erl,
                max_model
            ));
        }

        Ok(Self {
            msc,
            bts,
            bsc,
            models,
            capacity_table,
            rates,
        })
    }

    pub fn msc(&self) -> &Site {
        &self.msc
    }

    pub fn bts(&self) -> &[BtsNode] {
        &self.bts
    }

    pub fn bsc(&self) -> &[BscCandidate] {
        &self.bsc
    }

    pub fn models(&self) -> &[BscModel] {
        &self.models
    }

    pub fn capacity_table(&self) -> &CapacityTable {
        &self.capacity_table
    }

    pub fn rates(&self) -> CostRates {
        self.rates
    }

    pub fn total_traffic(&self) -> f64 {
        self.bts.iter().map(|b| b.traffic_erl).sum()
    }

    pub fn bts_index(&self, id: SiteId) -> Option<usize> {
        self.bts.binary_search_by_key(&id, BtsNode::id).ok()
    }

    pub fn bsc_index(&self, id: SiteId) -> Option<usize> {
        self.bsc.binary_search_by_key(&id, BscCandidate::id).ok()
    }

    pub fn model_index(&self, id: ModelId) -> Option<usize> {
        self.models.binary_search_by_key(&id, |m| m.id).ok()
    }

    /// Copy of this instance with different cost rates.
    pub fn with_rates(&self, rates: CostRates) -> Result<Self> {
        Self::new(
            self.msc,
            self.bts.clone(),
            self.bsc.clone(),
            self.models.clone(),
            self.capacity_table.clone(),
            rates,
        )
    }

    /// Copy of this instance with a different model catalogue.
    pub fn with_models(&self, models: Vec<BscModel>) -> Result<Self> {
        Self::new(
            self.msc,
            self.bts.clone(),
            self.bsc.clone(),
            models,
            self.capacity_table.clone(),
            self.rates,
        )
    }
}

/// The `x_ij = 1` entries of a design: (BTS id, BSC id) pairs.
///
/// Stored as a list rather than a map so that malformed designs (a BTS listed
/// twice) survive loading and can be reported by [`check_feasibility`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Assignment(Vec<(SiteId, SiteId)>);

impl Assignment {
    pub fn new(mut pairs: Vec<(SiteId, SiteId)>) -> Self {
        pairs.sort_by_key(|&(bts, _)| bts);
        Self(pairs)
    }

    /// Builds the assignment `BTS index i -> BSC index choice[i]`.
    pub fn from_indices(instance: &Instance, choice: &[usize]) -> Self {
        Self(
            choice
                .iter()
                .enumerate()
                .map(|(i, &j)| (instance.bts[i].id(), instance.bsc[j].id()))
                .collect(),
        )
    }

    pub fn pairs(&self) -> &[(SiteId, SiteId)] {
        &self.0
    }

    /// BSC serving `bts`, or the first one if it is listed more than once.
    pub fn get(&self, bts: SiteId) -> Option<SiteId> {
        self.0.iter().find(|&&(b, _)| b == bts).map(|&(_, c)| c)
    }

    /// Index form `BTS index -> BSC index`, when the map is total and single-valued.
    pub fn to_indices(&self, instance: &Instance) -> Result<Vec<usize>> {
        let mut choice = vec![usize::MAX; instance.bts.len()];
        for &(bts, bsc) in &self.0 {
            let i = instance
                .bts_index(bts)
                .ok_or_else(|| Error::InvalidAssignment(format!("unknown BTS id {bts}")))?;
            let j = instance
                .bsc_index(bsc)
                .ok_or_else(|| Error::InvalidAssignment(format!("unknown BSC id {bsc}")))?;
            if choice[i] != usize::MAX {
                return Err(Error::InvalidAssignment(format!(
                    "BTS {bts} is assigned more than once"
                )));
            }
            choice[i] = j;
        }
        if let Some(i) = choice.iter().position(|&j| j == usize::MAX) {
            return Err(Error::InvalidAssignment(format!(
                "BTS {} is not assigned",
                instance.bts[i].id()
            )));
        }
        Ok(choice)
    }
}

impl FromIterator<(SiteId, SiteId)> for Assignment {
    fn from_iter<I: IntoIterator<Item = (SiteId, SiteId)>>(iter: I) -> Self {
        Self::new(iter.into_iter().collect())
    }
}

/// Trunk size and controller model installed at one BSC site.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BscConfig {
    /// Index into the capacity table, i.e. the number of E1 lines to the MSC.
    pub lines: usize,
    pub model: Option<ModelId>,
}

/// A complete network design.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub assignment: Assignment,
    pub bsc_config: BTreeMap<SiteId, BscConfig>,
    pub objective: f64,
}

impl Solution {
    /// Ids of BSC sites that have a controller installed.
    pub fn open_bscs(&self) -> Vec<SiteId> {
        self.bsc_config
            .iter()
            .filter(|(_, c)| c.model.is_some())
            .map(|(&id, _)| id)
            .collect()
    }
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    fn rates() -> CostRates {
        CostRates::default()
    }

    #[test]
    fn rejects_structural_problems() {
        let table = standard_table();
        let models = BscModel::standard_catalog([1.0, 2.0, 3.0]);
        let msc = Site::new(0, 0.0, 0.0);
        let bts = vec![BtsNode::new(Site::new(0, 1.0, 1.0), 10.0)];
        let bsc = vec![BscCandidate::new(Site::new(0, 1.0, 1.0))];

        let err = Instance::new(
            msc,
            vec![],
            bsc.clone(),
            models.clone(),
            table.clone(),
            rates(),
        );
        assert!(matches!(err, Err(Error::InvalidInstance(_))));

        let dup = vec![bts[0].clone(), bts[0].clone()];
        let err = Instance::new(
            msc,
            dup,
            bsc.clone(),
            models.clone(),
            table.clone(),
            rates(),
        )
        .unwrap_err();
        assert!(err.to_string().contains("duplicate BTS id 0"));

        let heavy = vec![BtsNode::new(Site::new(0, 1.0, 1.0), 5000.0)];
        let err = Instance::new(
            msc,
            heavy,
            bsc.clone(),
            models.clone(),
            table.clone(),
            rates(),
        )
        .unwrap_err();
        assert!(err.to_string().contains("exceeds the largest BSC model"));

        let small = crate::traffic::build_capacity_table(
            5,
            &crate::traffic::TimeslotSchedule::standard(5),
            Default::default(),
        )
        .unwrap();
        let err = Instance::new(
            msc,
            bts.clone(),
            bsc.clone(),
            models.clone(),
            small,
            rates(),
        )
        .unwrap_err();
        assert!(err.to_string().contains("capacity table tops out"));

        let bad = CostRates {
            abis_rate: -1.0,
            a_rate: 1.0,
        };
        assert!(Instance::new(msc, bts, bsc, models, table, bad).is_err());
    }

    #[test]
    fn canonical_order_by_id() {
        let table = standard_table();
        let inst = Instance::new(
            Site::new(9, 0.0, 0.0),
            vec![
                BtsNode::new(Site::new(7, 0.0, 0.0), 1.0),
                BtsNode::new(Site::new(3, 0.0, 0.0), 2.0),
            ],
            vec![
                BscCandidate::new(Site::new(5, 0.0, 0.0)),
                BscCandidate::new(Site::new(1, 0.0, 0.0)),
            ],
            BscModel::standard_catalog([1.0, 2.0, 3.0]),
            table,
            rates(),
        )
        .unwrap();
        assert_eq!(inst.bts()[0].id(), 3);
        assert_eq!(inst.bsc()[0].id(), 1);
        assert_eq!(inst.bts_index(7), Some(1));
        assert_eq!(inst.bsc_index(4), None);
    }

    #[test]
    fn assignment_index_round_trip() {
        let inst = instance(
            &[(0.0, 0.0, 1.0), (1.0, 0.0, 1.0), (2.0, 0.0, 1.0)],
            &[(0.0, 0.0), (2.0, 0.0)],
            rates(),
        );
        let a = Assignment::from_indices(&inst, &[1, 0, 1]);
        assert_eq!(a.to_indices(&inst).unwrap(), vec![1, 0, 1]);
        assert_eq!(a.get(2), Some(1));

        let twice = Assignment::new(vec![(0, 0), (0, 1), (1, 0), (2, 0)]);
        assert!(matches!(
            twice.to_indices(&inst),
            Err(Error::InvalidAssignment(_))
        ));
        let missing = Assignment::new(vec![(0, 0), (1, 0)]);
        assert!(missing.to_indices(&inst).is_err());
        let unknown = Assignment::new(vec![(0, 0), (1, 0), (2, 7)]);
        assert!(unknown.to_indices(&inst).is_err());
    }
}
