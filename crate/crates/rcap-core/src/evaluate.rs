//! Full-resolution re-scoring of allocations against the unclustered
//! instance with the explicit tidal state set.
//!
//! Solving a reduced model yields an allocation whose reported objective is
//! an approximation; this module re-prices any allocation on the original
//! zones and states, and certifies feasibility by listing every coverable
//! tuple the allocation leaves without a responder.

use alloc::string::String;
use alloc::vec::Vec;

use crate::model::{Allocation, Instance, Violation};
use crate::solver::{optimal_dispatch, DispatchOutcome, ScenarioAxis};

#[derive(Debug, Clone, PartialEq)]
pub enum EvaluateError {
    /// The allocation references unknown indices, violates placement
    /// compatibility, or exceeds a fleet count.
    InvalidAllocation(Vec<Violation>),
}

impl core::fmt::Display for EvaluateError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            EvaluateError::InvalidAllocation(v) => {
                write!(f, "allocation invalid for instance ({} violations)", v.len())
            }
        }
    }
}

/// Exact objective of an allocation over every (incident, zone, state)
/// tuple of the full instance.
///
/// The returned outcome carries the dispatch plan and the list of coverable
/// tuples left uncovered; an empty list certifies the allocation feasible,
/// and only then is `objective()` defined.
pub fn full_resolution_objective(
    instance: &Instance,
    alloc: &Allocation,
) -> Result<DispatchOutcome, EvaluateError> {
    let violations = alloc.violations(instance);
    if !violations.is_empty() {
        return Err(EvaluateError::InvalidAllocation(violations));
    }
    let axis = ScenarioAxis::States(instance.tidal.states().to_vec());
    Ok(optimal_dispatch(instance, &axis, alloc))
}

/// One line of the side-by-side allocation comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub label: String,
    /// Defined only when the allocation leaves nothing uncovered.
    pub objective: Option<f64>,
    /// Weighted cost over the covered tuples, always defined.
    pub covered_objective: f64,
    pub uncovered_count: usize,
    pub per_incident: Vec<f64>,
}

/// Re-prices each labelled allocation at full resolution, in input order.
pub fn compare_allocations(
    instance: &Instance,
    allocations: &[(String, Allocation)],
) -> Result<Vec<ComparisonRow>, EvaluateError> {
    let mut rows = Vec::with_capacity(allocations.len());
    for (label, alloc) in allocations {
        let outcome = full_resolution_objective(instance, alloc)?;
        rows.push(ComparisonRow {
            label: label.clone(),
            objective: outcome.objective(),
            covered_objective: outcome.covered_objective,
            uncovered_count: outcome.uncovered.len(),
            per_incident: outcome.per_incident,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geo::LatLon;
    use crate::model::{
        CompatibilityRelations, DistanceMatrix, IncidentType, Station, VesselType, Zone,
    };
    use crate::solver::{solve_cavabb, Limits, ModelVariant, NoClock, VariantTag};
    use crate::tides::TidalStateSet;
    use alloc::collections::BTreeSet;
    use alloc::string::ToString;
    use alloc::vec;

    fn fixture() -> Instance {
        Instance {
            vessels: vec![
                VesselType {
                    speed_kn: 18.0,
                    draught_m: 1.0,
                    count: 1,
                    range_nm: 200.0,
                    equipment: BTreeSet::new(),
                },
                VesselType {
                    speed_kn: 9.0,
                    draught_m: 1.5,
                    count: 2,
                    range_nm: 200.0,
                    equipment: BTreeSet::new(),
                },
            ],
            stations: vec![
                Station { position: LatLon::new(54.0, 8.0), base_depth_m: 5.0 },
                Station { position: LatLon::new(54.5, 8.5), base_depth_m: 5.0 },
            ],
            zones: vec![
                Zone { position: LatLon::new(54.1, 8.2), frequencies: vec![0.7] },
                Zone { position: LatLon::new(54.4, 8.3), frequencies: vec![0.4] },
                Zone { position: LatLon::new(54.2, 8.6), frequencies: vec![0.9] },
            ],
            incident_types: vec![IncidentType {
                severity: 0.8,
                required_equipment: BTreeSet::new(),
            }],
            relations: CompatibilityRelations::complete(2, 2, 3, 1),
            distances: DistanceMatrix::new(2, 3, vec![5.0, 20.0, 30.0, 25.0, 8.0, 6.0]).unwrap(),
            tidal: TidalStateSet::single_full(2, 2),
        }
    }

    #[test]
    fn matches_solver_objective_without_clustering() {
        let instance = fixture();
        let variant = ModelVariant::for_instance(&instance, VariantTag::BestTidal).unwrap();
        let report = solve_cavabb(&instance, &variant, Limits::default(), &NoClock);
        let alloc = report.allocation.unwrap();
        let outcome = full_resolution_objective(&instance, &alloc).unwrap();
        assert_eq!(outcome.uncovered, vec![]);
        assert!((outcome.objective().unwrap() - report.objective.unwrap()).abs() <= 1e-12);
    }

    #[test]
    fn empty_allocation_leaves_everything_uncovered() {
        let instance = fixture();
        let outcome = full_resolution_objective(&instance, &Allocation::empty()).unwrap();
        assert_eq!(outcome.objective(), None);
        assert_eq!(outcome.uncovered.len(), crate::model::coverable_triples(&instance).len());
        assert_eq!(outcome.covered_objective, 0.0);
    }

    #[test]
    fn rejects_invalid_allocations() {
        let instance = fixture();
        // Both stations on the single fast vessel exceeds its fleet count.
        let alloc = Allocation::from_pairs([(0usize, 0usize), (1usize, 0usize)]);
        assert!(matches!(
            full_resolution_objective(&instance, &alloc),
            Err(EvaluateError::InvalidAllocation(_))
        ));
    }

    #[test]
    fn adding_a_vessel_never_hurts() {
        let instance = fixture();
        let smaller = Allocation::from_pairs([(0usize, 0usize)]);
        let larger = Allocation::from_pairs([(0usize, 0usize), (1usize, 1usize)]);
        let a = full_resolution_objective(&instance, &smaller).unwrap();
        let b = full_resolution_objective(&instance, &larger).unwrap();
        assert!(b.uncovered.len() <= a.uncovered.len());
        if let (Some(x), Some(y)) = (a.objective(), b.objective()) {
            assert!(y <= x + 1e-12);
        }
    }

    #[test]
    fn comparison_rows_in_input_order_with_stable_values() {
        let instance = fixture();
        let alloc = Allocation::from_pairs([(0usize, 0usize), (1usize, 1usize)]);
        let rows = compare_allocations(
            &instance,
            &[
                ("first".to_string(), alloc.clone()),
                ("second".to_string(), alloc),
                ("empty".to_string(), Allocation::empty()),
            ],
        )
        .unwrap();
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[0].label, "first");
        assert_eq!(rows[0].objective, rows[1].objective);
        assert_eq!(rows[0].per_incident, rows[1].per_incident);
        assert_eq!(rows[2].objective, None);
        assert!(rows[2].uncovered_count > 0);
    }

    #[test]
    fn objective_invariant_under_zone_permutation() {
        let instance = fixture();
        let alloc = Allocation::from_pairs([(0usize, 0usize), (1usize, 1usize)]);
        let base = full_resolution_objective(&instance, &alloc).unwrap();

        let mut permuted = instance.clone();
        permuted.zones.reverse();
        let d = &instance.distances;
        permuted.distances = DistanceMatrix::new(
            2,
            3,
            (0..2).flat_map(|j| (0..3).rev().map(move |r| d.get(j, r))).collect(),
        )
        .unwrap();
        let turned = full_resolution_objective(&permuted, &alloc).unwrap();
        assert!((base.objective().unwrap() - turned.objective().unwrap()).abs() <= 1e-12);
    }
}
