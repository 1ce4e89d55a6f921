use super::Instance;

/// Size of the integer program an instance corresponds to.
///
/// Rows are the assignment rows (one per BTS), the trunk and model capacity
/// rows (one each per BSC), plus the single-level and single-model rows (one
/// each per BSC). Nonzeros count every emitted term; the zero-capacity trunk
/// level has a zero coefficient in the capacity row and is not counted there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FormulationStats {
    pub variables: usize,
    /// Assignment plus capacity rows: `|T| + 2|B|`.
    pub model_constraints: usize,
    /// Single-level and single-model rows: `2|B|`.
    pub convention_constraints: usize,
    pub nonzeros: usize,
    /// `nonzeros / (variables * all rows)`.
    pub density: f64,
}

impl FormulationStats {
    pub fn total_constraints(&self) -> usize {
        self.model_constraints + self.convention_constraints
    }
}

pub fn formulation_stats(instance: &Instance) -> FormulationStats {
    let t = instance.bts().len();
    let b = instance.bsc().len();
    let c = instance.capacity_table().entries().len();
    let w = instance.models().len();

    let variables = t * b + b * c + b * w;
    let model_constraints = t + 2 * b;
    let convention_constraints = 2 * b;
    let nonzeros = t * b // assignment rows
        + b * (t + (c - 1)) // trunk capacity rows
        + b * (t + w) // model capacity rows
        + b * c // one trunk level per BSC
        + b * w; // at most one model per BSC
    let density =
        nonzeros as f64 / (variables * (model_constraints + convention_constraints)) as f64;

    FormulationStats {
        variables,
        model_constraints,
        convention_constraints,
        nonzeros,
        density,
    }
}
