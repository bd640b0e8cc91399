//! X3C-to-RCAP reductions and a brute-force optimum oracle.
//!
//! The reductions turn an exact-cover-by-3-sets instance into an allocation
//! instance whose feasibility (range variant) or optimal value (speed
//! variant, threshold 3q) answers the cover question. The brute-force
//! solver enumerates every valid allocation and is the reference the
//! branch-and-bound solver is tested against.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::geo::LatLon;
use crate::model::{
    Allocation, CompatibilityRelations, DistanceMatrix, IncidentType, Instance, Station,
    VesselType, Zone,
};
use crate::solver::{optimal_dispatch, ModelVariant};
use crate::tides::TidalStateSet;

/// Enumeration budget for [`brute_force_solve`].
pub const BRUTE_FORCE_LIMIT: f64 = 1e7;

/// An exact cover by 3-sets instance: a universe of size 3q and a family
/// of 3-element subsets. Elements are 0-based indices into the universe.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct X3cInstance {
    pub universe_size: usize,
    pub triples: Vec<[usize; 3]>,
}

impl X3cInstance {
    pub fn new(universe_size: usize, triples: Vec<[usize; 3]>) -> Result<Self, ComplexityError> {
        let inst = Self { universe_size, triples };
        inst.validate()?;
        Ok(inst)
    }

    pub fn q(&self) -> usize {
        self.universe_size / 3
    }

    fn validate(&self) -> Result<(), ComplexityError> {
        if self.universe_size % 3 != 0 {
            return Err(ComplexityError::InvalidX3c(format!(
                "universe size {} not divisible by 3",
                self.universe_size
            )));
        }
        for (idx, d) in self.triples.iter().enumerate() {
            if d[0] == d[1] || d[0] == d[2] || d[1] == d[2] {
                return Err(ComplexityError::InvalidX3c(format!(
                    "triple {} has repeated elements",
                    idx
                )));
            }
            for &e in d {
                if e >= self.universe_size {
                    return Err(ComplexityError::InvalidX3c(format!(
                        "triple {} references element {} outside the universe",
                        idx, e
                    )));
                }
            }
        }
        Ok(())
    }

    /// Whether some q of the triples partition the universe. Exponential
    /// backtracking; intended for the small instances used in tests.
    pub fn has_exact_cover(&self) -> bool {
        fn masks(inst: &X3cInstance) -> Vec<u64> {
            inst.triples
                .iter()
                .map(|d| d.iter().fold(0u64, |m, &e| m | (1 << e)))
                .collect()
        }
        fn search(masks: &[u64], covered: u64, full: u64, first_free: usize) -> bool {
            if covered == full {
                return true;
            }
            let mut e = first_free;
            while covered & (1 << e) != 0 {
                e += 1;
            }
            for &m in masks {
                if m & (1 << e) != 0 && m & covered == 0 {
                    if search(masks, covered | m, full, e + 1) {
                        return true;
                    }
                }
            }
            false
        }
        if self.universe_size == 0 {
            return true;
        }
        debug_assert!(self.universe_size <= 63);
        let full = (1u64 << self.universe_size) - 1;
        search(&masks(self), 0, full, 0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReductionVariant {
    /// Feasibility question: ranges restrict the fast type to its
    /// station's own elements and ground the slow type entirely.
    Range,
    /// Optimization question: everything is reachable, the slow type
    /// takes twice as long, and the yes-threshold is 3q.
    Speed,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ComplexityError {
    InvalidX3c(String),
    /// The allocation enumeration would exceed [`BRUTE_FORCE_LIMIT`].
    TooLarge { combinations: f64 },
}

impl core::fmt::Display for ComplexityError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            ComplexityError::InvalidX3c(msg) => write!(f, "invalid X3C instance: {}", msg),
            ComplexityError::TooLarge { combinations } => {
                write!(f, "brute force would enumerate {:e} allocations", combinations)
            }
        }
    }
}

/// Builds the RCAP instance encoding an X3C instance.
///
/// One zone per universe element, one station per triple, q vessels of the
/// fast type and |D| - q of the slow type (zero when |D| < q, in which
/// case no exact cover exists anyway), all distances 1, a single incident
/// type with severity 1 and frequency 1, and a single tidal state with
/// full availability. The fast type at station d reaches exactly the three
/// zones of d. The slow type reaches nothing in the range variant and
/// every zone in the speed variant, where it moves at half speed.
pub fn x3c_reduce(x3c: &X3cInstance, variant: ReductionVariant) -> Result<Instance, ComplexityError> {
    x3c.validate()?;
    let q = x3c.q();
    let z = x3c.universe_size;
    let m = x3c.triples.len();
    let slow_count = m.saturating_sub(q);

    let slow_speed = match variant {
        ReductionVariant::Range => 1.0,
        ReductionVariant::Speed => 0.5,
    };
    let vessels = vec![
        VesselType {
            speed_kn: 1.0,
            draught_m: 1.0,
            count: q as u32,
            range_nm: 2.0,
            equipment: BTreeSet::new(),
        },
        VesselType {
            speed_kn: slow_speed,
            draught_m: 1.0,
            count: slow_count as u32,
            range_nm: 2.0,
            equipment: BTreeSet::new(),
        },
    ];

    let origin = LatLon { lat: 0.0, lon: 0.0 };
    let stations = vec![Station { position: origin, base_depth_m: 10.0 }; m];
    let zones = vec![Zone { position: origin, frequencies: vec![1.0] }; z];
    let incident_types =
        vec![IncidentType { severity: 1.0, required_equipment: BTreeSet::new() }];

    let mut relations = CompatibilityRelations::empty(2, m, z, 1);
    for i in 0..2 {
        relations.insert_equipment(i, 0);
        for j in 0..m {
            relations.insert_placement(i, j);
        }
    }
    for (j, d) in x3c.triples.iter().enumerate() {
        for &e in d {
            relations.insert_reach(0, j, e);
        }
        if variant == ReductionVariant::Speed {
            for r in 0..z {
                relations.insert_reach(1, j, r);
            }
        }
    }

    let distances = DistanceMatrix::new(m, z, vec![1.0; m * z])
        .expect("shape is consistent by construction");

    Ok(Instance {
        vessels,
        stations,
        zones,
        incident_types,
        relations,
        distances,
        tidal: TidalStateSet::single_full(m, 2),
    })
}

/// Exact optimum by exhaustive enumeration of valid allocations.
#[derive(Debug, Clone, PartialEq)]
pub enum BruteForceResult {
    Optimal { objective: f64, allocation: Allocation },
    /// No allocation covers every (incident, zone, state) tuple.
    Infeasible,
}

/// Enumerates every allocation respecting placement compatibility, fleet
/// counts, and one vessel per station, scoring each via the optimal
/// dispatch, and returns the exact minimum. Feasibility requires every
/// tuple to have a responder, matching the coverage constraints.
///
/// Ties are broken toward the lexicographically smallest assignment
/// vector, with an empty station ordered after every vessel index.
pub fn brute_force_solve(
    instance: &Instance,
    variant: &ModelVariant,
) -> Result<BruteForceResult, ComplexityError> {
    let n = instance.vessel_count();
    let m = instance.station_count();
    let z = instance.zone_count();
    let f = instance.incident_count();
    let axis = &variant.axis;
    let t_count = axis.len();

    let candidates: Vec<Vec<usize>> = (0..m)
        .map(|j| {
            (0..n)
                .filter(|&i| instance.relations.placeable(i, j) && instance.vessels[i].count > 0)
                .collect()
        })
        .collect();
    let combinations =
        candidates.iter().fold(1.0f64, |acc, c| acc * (1.0 + c.len() as f64));
    if combinations > BRUTE_FORCE_LIMIT {
        return Err(ComplexityError::TooLarge { combinations });
    }

    // If some tuple is unreachable under every allocation, the coverage
    // constraints cannot be met at all.
    for t in 0..t_count {
        for k in 0..f {
            'zone: for r in 0..z {
                for i in 0..n {
                    if instance.vessels[i].count == 0 || !instance.relations.equipped(i, k) {
                        continue;
                    }
                    for j in 0..m {
                        if instance.relations.placeable(i, j)
                            && instance.relations.reachable(i, j, r)
                            && axis.operable(t, j, i)
                        {
                            continue 'zone;
                        }
                    }
                }
                return Ok(BruteForceResult::Infeasible);
            }
        }
    }

    let mut remaining: Vec<u32> = instance.vessels.iter().map(|v| v.count).collect();
    let mut current: Vec<Option<usize>> = vec![None; m];
    let mut best: Option<(f64, Allocation)> = None;

    fn recurse(
        instance: &Instance,
        variant: &ModelVariant,
        candidates: &[Vec<usize>],
        remaining: &mut [u32],
        current: &mut [Option<usize>],
        station: usize,
        best: &mut Option<(f64, Allocation)>,
    ) {
        if station == candidates.len() {
            let alloc = Allocation::from_pairs(
                current.iter().enumerate().filter_map(|(j, i)| i.map(|i| (j, i))),
            );
            let outcome = optimal_dispatch(instance, &variant.axis, &alloc);
            if !outcome.uncovered.is_empty() {
                return;
            }
            let obj = outcome.covered_objective;
            let improves = match best {
                Some((cur, _)) => obj < *cur,
                None => true,
            };
            if improves {
                *best = Some((obj, alloc));
            }
            return;
        }
        for &i in &candidates[station] {
            if remaining[i] == 0 {
                continue;
            }
            remaining[i] -= 1;
            current[station] = Some(i);
            recurse(instance, variant, candidates, remaining, current, station + 1, best);
            current[station] = None;
            remaining[i] += 1;
        }
        recurse(instance, variant, candidates, remaining, current, station + 1, best);
    }

    recurse(instance, variant, &candidates, &mut remaining, &mut current, 0, &mut best);

    Ok(match best {
        Some((objective, allocation)) => BruteForceResult::Optimal { objective, allocation },
        None => BruteForceResult::Infeasible,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{check_dispatch_feasibility, DispatchPlan};
    use crate::solver::{solve_cavabb, Limits, NoClock, SolveStatus, VariantTag};

    fn x3c(universe: usize, triples: &[[usize; 3]]) -> X3cInstance {
        X3cInstance::new(universe, triples.to_vec()).unwrap()
    }

    fn best_tidal(instance: &Instance) -> ModelVariant {
        ModelVariant::for_instance(instance, VariantTag::BestTidal).unwrap()
    }

    #[test]
    fn rejects_malformed_x3c() {
        assert!(X3cInstance::new(4, vec![]).is_err());
        assert!(X3cInstance::new(3, vec![[0, 1, 1]]).is_err());
        assert!(X3cInstance::new(3, vec![[0, 1, 3]]).is_err());
    }

    #[test]
    fn exact_cover_detection() {
        assert!(x3c(6, &[[0, 1, 2], [3, 4, 5]]).has_exact_cover());
        assert!(!x3c(6, &[[0, 1, 2], [0, 1, 3]]).has_exact_cover());
        assert!(x3c(0, &[]).has_exact_cover());
        assert!(x3c(6, &[[0, 1, 2], [2, 3, 4], [3, 4, 5]]).has_exact_cover());
    }

    #[test]
    fn yes_instance_range_variant_is_feasible() {
        let inst = x3c_reduce(&x3c(6, &[[0, 1, 2], [3, 4, 5]]), ReductionVariant::Range).unwrap();
        assert!(crate::model::validate_instance(&inst).is_empty());
        let variant = best_tidal(&inst);
        let report = solve_cavabb(&inst, &variant, Limits::default(), &NoClock);
        assert_eq!(report.status, SolveStatus::Optimal);
        // Every response costs distance 1 at speed 1 with unit weights.
        assert!((report.objective.unwrap() - 6.0).abs() <= 1e-9);

        match brute_force_solve(&inst, &variant).unwrap() {
            BruteForceResult::Optimal { objective, .. } => {
                assert!((objective - 6.0).abs() <= 1e-9)
            }
            BruteForceResult::Infeasible => panic!("yes-instance must be feasible"),
        }
    }

    #[test]
    fn yes_instance_witness_passes_dispatch_check() {
        let inst = x3c_reduce(&x3c(6, &[[0, 1, 2], [3, 4, 5]]), ReductionVariant::Range).unwrap();
        // Witness: a fast vessel at both cover stations; zone r is served
        // by the station whose triple contains it.
        let alloc = Allocation::from_pairs([(0usize, 0usize), (1usize, 0usize)]);
        let responders = (0..6).map(|r| Some(if r < 3 { 0 } else { 1 })).collect();
        let plan = DispatchPlan::new(
            6,
            vec![crate::model::DispatchGroup { states: vec![0], responders }],
        );
        let verdict = check_dispatch_feasibility(&inst, &alloc, &plan).unwrap();
        assert!(verdict.feasible, "{:?}", verdict.violations);
    }

    #[test]
    fn no_instance_range_variant_is_infeasible() {
        let inst = x3c_reduce(&x3c(6, &[[0, 1, 2], [0, 1, 3]]), ReductionVariant::Range).unwrap();
        let variant = best_tidal(&inst);
        let report = solve_cavabb(&inst, &variant, Limits::default(), &NoClock);
        assert_eq!(report.status, SolveStatus::Infeasible);
        assert!(!report.uncoverable.is_empty());
        assert_eq!(brute_force_solve(&inst, &variant).unwrap(), BruteForceResult::Infeasible);
    }

    #[test]
    fn empty_triple_family_is_infeasible() {
        let inst = x3c_reduce(&x3c(3, &[]), ReductionVariant::Range).unwrap();
        let variant = best_tidal(&inst);
        assert_eq!(brute_force_solve(&inst, &variant).unwrap(), BruteForceResult::Infeasible);
        let report = solve_cavabb(&inst, &variant, Limits::default(), &NoClock);
        assert_eq!(report.status, SolveStatus::Infeasible);
    }

    #[test]
    fn speed_variant_threshold_separates_yes_from_no() {
        let q = 2usize;
        let yes = x3c_reduce(&x3c(6, &[[0, 1, 2], [3, 4, 5], [1, 2, 3]]), ReductionVariant::Speed)
            .unwrap();
        let variant = best_tidal(&yes);
        match brute_force_solve(&yes, &variant).unwrap() {
            BruteForceResult::Optimal { objective, .. } => {
                assert!((objective - 3.0 * q as f64).abs() <= 1e-9, "got {objective}");
            }
            BruteForceResult::Infeasible => panic!("speed variant with slack is feasible"),
        }

        // No exact cover: some zone must wait for the half-speed type.
        let no = x3c_reduce(&x3c(6, &[[0, 1, 2], [0, 1, 3], [0, 1, 4]]), ReductionVariant::Speed)
            .unwrap();
        let variant = best_tidal(&no);
        match brute_force_solve(&no, &variant).unwrap() {
            BruteForceResult::Optimal { objective, .. } => {
                assert!(objective > 3.0 * q as f64 + 1e-9, "got {objective}");
            }
            BruteForceResult::Infeasible => panic!("speed variant with slack is feasible"),
        }
    }

    #[test]
    fn brute_force_prefers_faster_vessel() {
        let mut inst = x3c_reduce(&x3c(3, &[[0, 1, 2]]), ReductionVariant::Range).unwrap();
        inst.vessels[0].speed_kn = 10.0;
        inst.vessels[1].speed_kn = 20.0;
        inst.vessels[1].count = 1;
        for r in 0..3 {
            inst.relations.insert_reach(1, 0, r);
        }
        let variant = best_tidal(&inst);
        match brute_force_solve(&inst, &variant).unwrap() {
            BruteForceResult::Optimal { objective, allocation } => {
                assert_eq!(allocation.vessel_at(0), Some(1));
                assert!((objective - 3.0 / 20.0).abs() <= 1e-12);
            }
            BruteForceResult::Infeasible => panic!("instance is coverable"),
        }
    }

    #[test]
    fn zero_incident_types_give_zero_objective() {
        let mut inst = x3c_reduce(&x3c(3, &[[0, 1, 2]]), ReductionVariant::Range).unwrap();
        inst.incident_types.clear();
        inst.relations = CompatibilityRelations::empty(2, 1, 3, 0);
        let variant = best_tidal(&inst);
        match brute_force_solve(&inst, &variant).unwrap() {
            BruteForceResult::Optimal { objective, allocation } => {
                assert_eq!(objective, 0.0);
                assert!(allocation.is_empty());
            }
            BruteForceResult::Infeasible => panic!("nothing requires coverage"),
        }
    }

    #[test]
    fn enumeration_guard_trips() {
        let inst = x3c_reduce(
            &x3c(
                33,
                &(0..30)
                    .map(|t| [t % 33, (t + 7) % 33, (t + 19) % 33])
                    .collect::<Vec<_>>(),
            ),
            ReductionVariant::Speed,
        )
        .unwrap();
        let variant = best_tidal(&inst);
        assert!(matches!(
            brute_force_solve(&inst, &variant),
            Err(ComplexityError::TooLarge { .. })
        ));
    }

    #[test]
    fn small_reductions_agree_with_cover_oracle() {
        // All X3C instances over |X| = 3 with up to one triple, plus a
        // spot grid over |X| = 6 with two triples.
        let mut cases: Vec<X3cInstance> = vec![x3c(3, &[]), x3c(3, &[[0, 1, 2]])];
        let six: Vec<[usize; 3]> = vec![[0, 1, 2], [3, 4, 5], [0, 1, 3], [2, 4, 5], [1, 2, 3]];
        for a in 0..six.len() {
            for b in a + 1..six.len() {
                cases.push(x3c(6, &[six[a], six[b]]));
            }
        }
        for case in cases {
            let expected = case.has_exact_cover();
            let range = x3c_reduce(&case, ReductionVariant::Range).unwrap();
            let variant = best_tidal(&range);
            let feasible = matches!(
                brute_force_solve(&range, &variant).unwrap(),
                BruteForceResult::Optimal { .. }
            );
            assert_eq!(feasible, expected, "range variant disagrees on {case:?}");

            let speed = x3c_reduce(&case, ReductionVariant::Speed).unwrap();
            let variant = best_tidal(&speed);
            let at_threshold = match brute_force_solve(&speed, &variant).unwrap() {
                BruteForceResult::Optimal { objective, .. } => {
                    objective <= 3.0 * case.q() as f64 + 1e-9
                }
                BruteForceResult::Infeasible => false,
            };
            assert_eq!(at_threshold, expected, "speed variant disagrees on {case:?}");
        }
    }
}
