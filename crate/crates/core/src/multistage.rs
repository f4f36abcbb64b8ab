//! Multi-stage robust MD-CRT: groups whose robust region is certified to be
//! an FPD are reconstructed first, and their lcrms become the moduli of the
//! next stage.

use std::collections::BTreeSet;
use std::fmt;

use num_rational::BigRational;

use crate::crt::lcrm_many;
use crate::error::{Error, Result};
use crate::lattice::{FpdUnionRegion, ModReducer};
use crate::linalg::{hnf, IntMatrix, IntVector, RatVector};
use crate::numeric::{fmt_rational, sqrt_rational_f64};
use crate::robust::{
    build_instance, build_instance_with_anchor, robust_reconstruct_rational, RobustInstance,
    RobustOutput,
};

/// A squared error bound; singleton groups tolerate any error.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Bound {
    Finite(BigRational),
    Infinite,
}

impl Bound {
    pub fn min(self, other: Bound) -> Bound {
        match (self, other) {
            (Bound::Infinite, b) | (b, Bound::Infinite) => b,
            (Bound::Finite(a), Bound::Finite(b)) => Bound::Finite(if a <= b { a } else { b }),
        }
    }

    pub fn finite(&self) -> Option<&BigRational> {
        match self {
            Bound::Finite(q) => Some(q),
            Bound::Infinite => None,
        }
    }

    /// Square root for display.
    pub fn sqrt_f64(&self) -> f64 {
        match self {
            Bound::Finite(q) => sqrt_rational_f64(q),
            Bound::Infinite => f64::INFINITY,
        }
    }

    /// `tau_sq` lies strictly below the bound.
    pub fn admits(&self, tau_sq: &BigRational) -> bool {
        match self {
            Bound::Finite(q) => tau_sq < q,
            Bound::Infinite => true,
        }
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::Finite(q) => f.write_str(&fmt_rational(q)),
            Bound::Infinite => f.write_str("inf"),
        }
    }
}

/// One group of a stage. The first member is the anchor.
#[derive(Clone, Debug)]
pub struct StageGroup {
    pub members: Vec<usize>,
    /// `anchor * D` with `D` the diagonal HNF of `anchor^-1 lcrm`.
    pub designated_lcrm: IntMatrix,
    /// Squared `δ` of the group.
    pub delta_sq: Bound,
    instance: Option<RobustInstance>,
}

impl StageGroup {
    pub fn anchor_index(&self) -> usize {
        self.members[0]
    }

    pub fn instance(&self) -> Option<&RobustInstance> {
        self.instance.as_ref()
    }
}

/// End-to-end bound for one initial group.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PerGroupBound {
    pub group: usize,
    pub tau_max_sq: Bound,
}

/// A validated multi-stage plan.
#[derive(Clone, Debug)]
pub struct GroupingPlan {
    moduli: Vec<IntMatrix>,
    stages: Vec<Vec<StageGroup>>,
    final_inputs: Vec<IntMatrix>,
    final_instance: Option<RobustInstance>,
    delta_final_sq: Bound,
    phi: Vec<Vec<BTreeSet<usize>>>,
    bounds: Vec<PerGroupBound>,
}

/// Group condition: for several moduli returns `anchor * H` when
/// `H = hnf(anchor^-1 lcrm)` is diagonal, `None` otherwise. A single modulus
/// is returned unchanged.
pub fn check_group_condition(moduli: &[IntMatrix], anchor: usize) -> Result<Option<IntMatrix>> {
    let a = moduli.get(anchor).ok_or_else(|| {
        Error::InvalidArgument(format!(
            "anchor {anchor} out of range for {} moduli",
            moduli.len()
        ))
    })?;
    if moduli.len() == 1 {
        return Ok(Some(a.clone()));
    }
    let r = lcrm_many(moduli)?;
    let q = a
        .left_divide(&r)?
        .expect("an lcrm is a right multiple of every modulus");
    let h = hnf(&q)?.h;
    Ok(h.is_diagonal().then(|| a * &h))
}

/// Validates a grouping and computes every designated lcrm, stage bound,
/// path map and per-group bound.
///
/// `grouping[s]` lists the groups of stage `s + 1`; each group holds indices
/// into the previous stage's outputs (the moduli for the first stage), and
/// its first index is the anchor. The outputs of the last listed stage are
/// combined by a final single-stage reconstruction.
pub fn build_plan(moduli: &[IntMatrix], grouping: &[Vec<Vec<usize>>]) -> Result<GroupingPlan> {
    if moduli.is_empty() {
        return Err(Error::InvalidArgument("empty moduli list".into()));
    }
    let mut inputs = moduli.to_vec();
    let mut stages = Vec::with_capacity(grouping.len());
    for (s, groups) in grouping.iter().enumerate() {
        let stage = s + 1;
        if groups.is_empty() {
            return Err(Error::ConfigInvalid(format!("stage {stage} has no groups")));
        }
        let covered: BTreeSet<usize> = groups.iter().flatten().copied().collect();
        if let Some(&bad) = covered.iter().find(|&&i| i >= inputs.len()) {
            return Err(Error::ConfigInvalid(format!(
                "stage {stage} refers to input {bad} but only {} exist",
                inputs.len()
            )));
        }
        if let Some(missing) = (0..inputs.len()).find(|i| !covered.contains(i)) {
            return Err(Error::CoverageIncomplete { stage, missing });
        }
        let mut built = Vec::with_capacity(groups.len());
        for (g, members) in groups.iter().enumerate() {
            if members.is_empty() {
                return Err(Error::ConfigInvalid(format!(
                    "stage {stage} group {g} is empty"
                )));
            }
            let ms: Vec<IntMatrix> = members.iter().map(|&i| inputs[i].clone()).collect();
            let designated = check_group_condition(&ms, 0)?
                .ok_or(Error::GroupConditionFailed { stage, group: g })?;
            let (instance, delta_sq) = if ms.len() == 1 {
                (None, Bound::Infinite)
            } else {
                let inst = build_instance_with_anchor(&ms, 0, Some(&designated))?;
                let d = Bound::Finite(inst.tau_bound_sq().clone());
                (Some(inst), d)
            };
            built.push(StageGroup {
                members: members.clone(),
                designated_lcrm: designated,
                delta_sq,
                instance,
            });
        }
        let outputs: Vec<IntMatrix> = built.iter().map(|g| g.designated_lcrm.clone()).collect();
        let canon: Vec<IntMatrix> = outputs
            .iter()
            .map(|m| hnf(m).map(|d| d.h))
            .collect::<Result<_>>()?;
        for i in 0..canon.len() {
            for j in i + 1..canon.len() {
                if canon[i] == canon[j] {
                    return Err(Error::DuplicateOutput {
                        stage,
                        first: i,
                        second: j,
                    });
                }
            }
        }
        stages.push(built);
        inputs = outputs;
    }

    let (final_instance, delta_final_sq) = if inputs.len() == 1 {
        (None, Bound::Infinite)
    } else {
        let inst = build_instance(&inputs)?;
        let d = Bound::Finite(inst.tau_bound_sq().clone());
        (Some(inst), d)
    };

    let phi = path_maps(&stages);
    let bounds = per_group_bounds(&stages, &phi, &delta_final_sq);
    Ok(GroupingPlan {
        moduli: moduli.to_vec(),
        stages,
        final_inputs: inputs,
        final_instance,
        delta_final_sq,
        phi,
        bounds,
    })
}

/// `phi[i][s]` is the set of groups at stage `s + 2` reached from initial
/// group `i`.
fn path_maps(stages: &[Vec<StageGroup>]) -> Vec<Vec<BTreeSet<usize>>> {
    let Some(first) = stages.first() else {
        return Vec::new();
    };
    (0..first.len())
        .map(|i| {
            let mut reach: BTreeSet<usize> = [i].into();
            stages[1..]
                .iter()
                .map(|groups| {
                    reach = groups
                        .iter()
                        .enumerate()
                        .filter(|(_, g)| g.members.iter().any(|m| reach.contains(m)))
                        .map(|(k, _)| k)
                        .collect();
                    reach.clone()
                })
                .collect()
        })
        .collect()
}

fn per_group_bounds(
    stages: &[Vec<StageGroup>],
    phi: &[Vec<BTreeSet<usize>>],
    delta: &Bound,
) -> Vec<PerGroupBound> {
    let Some(first) = stages.first() else {
        return Vec::new();
    };
    first
        .iter()
        .enumerate()
        .map(|(i, g)| {
            let mut b = g.delta_sq.clone().min(delta.clone());
            for (s, reached) in phi[i].iter().enumerate() {
                for &k in reached {
                    b = b.min(stages[s + 1][k].delta_sq.clone());
                }
            }
            PerGroupBound {
                group: i,
                tau_max_sq: b,
            }
        })
        .collect()
}

impl GroupingPlan {
    pub fn moduli(&self) -> &[IntMatrix] {
        &self.moduli
    }

    /// Intermediate stages, first stage first.
    pub fn stages(&self) -> &[Vec<StageGroup>] {
        &self.stages
    }

    /// Moduli of the final single-stage reconstruction.
    pub fn final_inputs(&self) -> &[IntMatrix] {
        &self.final_inputs
    }

    pub fn final_instance(&self) -> Option<&RobustInstance> {
        self.final_instance.as_ref()
    }

    /// Index of the final anchor among [`GroupingPlan::final_inputs`].
    pub fn final_anchor(&self) -> usize {
        self.final_instance.as_ref().map_or(0, |i| i.anchor())
    }

    /// Squared `δ` of the final stage.
    pub fn delta_final_sq(&self) -> &Bound {
        &self.delta_final_sq
    }

    /// Groups of stage `stage` (2-based, as the first stage has no
    /// predecessors) reached from initial group `group`.
    pub fn phi(&self, group: usize, stage: usize) -> Option<&BTreeSet<usize>> {
        stage
            .checked_sub(2)
            .and_then(|s| self.phi.get(group)?.get(s))
    }

    pub fn per_group_bounds(&self) -> &[PerGroupBound] {
        &self.bounds
    }

    /// The smallest per-group bound; the final `δ` for a plan without
    /// intermediate stages.
    pub fn overall_bound_sq(&self) -> Bound {
        self.bounds
            .iter()
            .fold(self.delta_final_sq.clone(), |acc, b| {
                acc.min(b.tau_max_sq.clone())
            })
    }

    /// The lcrm of all final inputs.
    pub fn final_lcrm(&self) -> Result<IntMatrix> {
        match &self.final_instance {
            Some(inst) => Ok(inst.lcrm().clone()),
            None => Ok(self.final_inputs[0].clone()),
        }
    }

    /// Error-free remainders of `f` for every stage-1 modulus.
    pub fn remainders_of(&self, f: &IntVector) -> Result<Vec<IntVector>> {
        self.moduli
            .iter()
            .map(|m| Ok(ModReducer::new(m)?.remainder(f)))
            .collect()
    }
}

/// Region guaranteed by the final stage: anchor `R_{l0}`, shifts
/// `N(R_{l0}^-1 R)`.
pub fn final_region(plan: &GroupingPlan) -> Result<FpdUnionRegion> {
    match &plan.final_instance {
        Some(inst) => Ok(inst.region().clone()),
        None => FpdUnionRegion::new(&plan.final_inputs[0], &plan.final_inputs[0]),
    }
}

/// Per-stage rational estimates together with the final output.
#[derive(Clone, Debug)]
pub struct MultistageTrace {
    /// `stage_estimates[s][g]` is the estimate of group `g` at stage `s + 1`.
    pub stage_estimates: Vec<Vec<RatVector>>,
    pub output: RobustOutput,
}

/// Runs every stage. Estimates stay exact rationals between stages.
pub fn multistage_reconstruct(plan: &GroupingPlan, noisy: &[IntVector]) -> Result<RobustOutput> {
    Ok(multistage_reconstruct_traced(plan, noisy)?.output)
}

pub fn multistage_reconstruct_traced(
    plan: &GroupingPlan,
    noisy: &[IntVector],
) -> Result<MultistageTrace> {
    if noisy.len() != plan.moduli.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} remainders for {} moduli",
            noisy.len(),
            plan.moduli.len()
        )));
    }
    let mut current: Vec<RatVector> = noisy.iter().map(RatVector::from).collect();
    let mut stage_estimates = Vec::with_capacity(plan.stages.len());
    for groups in &plan.stages {
        let next = groups
            .iter()
            .map(|g| match &g.instance {
                None => Ok(current[g.members[0]].clone()),
                Some(inst) => {
                    let rs: Vec<RatVector> =
                        g.members.iter().map(|&m| current[m].clone()).collect();
                    Ok(robust_reconstruct_rational(inst, &rs)?.estimate)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        stage_estimates.push(next.clone());
        current = next;
    }
    let output = match &plan.final_instance {
        Some(inst) => robust_reconstruct_rational(inst, &current)?,
        None => RobustOutput {
            estimate: current[0].clone(),
            folds: Vec::new(),
        },
    };
    Ok(MultistageTrace {
        stage_estimates,
        output,
    })
}
