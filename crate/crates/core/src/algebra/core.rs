//! Cores and constant relations.

use std::sync::Arc;

use super::fractional::FractionalOperation;
use super::operation::{for_each_operation, Operation};
use super::support::{supp_membership, supp_membership_any, SuppOptions};
use crate::error::{Error, Result};
use crate::library;
use crate::model::{Instance, Language};

/// One restriction step of a core computation.
#[derive(Clone, Debug)]
pub struct CoreStep {
    /// The non-bijective unary operation found in the support, on the
    /// domain of the previous step.
    pub map: Operation,
    /// Fractional polymorphism witnessing `map ∈ supp`.
    pub witness: FractionalOperation,
    /// Labels kept, in the previous step's labelling.
    pub image: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct CoreResult {
    pub core: Language,
    /// Original label of each core label.
    pub labels: Vec<usize>,
    pub steps: Vec<CoreStep>,
}

impl CoreResult {
    /// The instance rebound to the core language.
    pub fn core_instance(&self, instance: &Instance) -> Result<Instance> {
        instance.rebind(Arc::new(self.core.clone()))
    }
}

/// Non-bijective unary operations on `d` labels ordered by image size, then
/// table.
fn non_bijective_unaries(d: usize, cap: u64) -> Result<Vec<Operation>> {
    let mut ops = Vec::new();
    for_each_operation(d, 1, false, cap, |h| {
        if !h.is_bijection() {
            ops.push(h.clone());
        }
    })?;
    ops.sort_by(|a, b| a.image().len().cmp(&b.image().len()).then_with(|| a.table().cmp(b.table())));
    Ok(ops)
}

/// Restricts `Γ` along non-bijective unary support operations until none
/// remains. Among candidates the smallest image wins, then the
/// lexicographically smallest table.
pub fn core_of(language: &Language, options: &SuppOptions) -> Result<CoreResult> {
    let mut current = language.clone();
    let mut labels: Vec<usize> = language.domain().labels().collect();
    let mut steps = Vec::new();
    'outer: loop {
        let d = current.domain_size();
        if d == 1 {
            break;
        }
        let candidates = non_bijective_unaries(d, options.max_ops)?;
        let mut start = 0;
        while start < candidates.len() {
            let size = candidates[start].image().len();
            let end = candidates[start..]
                .iter()
                .position(|h| h.image().len() != size)
                .map_or(candidates.len(), |p| start + p);
            let level = &candidates[start..end];
            if supp_membership_any(level, &current, options)?.member {
                for h in level {
                    let ans = supp_membership(h, &current, options)?;
                    if ans.member {
                        let image = h.image();
                        let witness = ans
                            .witness_fpol
                            .ok_or_else(|| Error::Internal("member without witness".into()))?;
                        current = current.restrict(&image)?;
                        labels = image.iter().map(|&x| labels[x]).collect();
                        steps.push(CoreStep {
                            map: h.clone(),
                            witness,
                            image,
                        });
                        continue 'outer;
                    }
                }
                return Err(Error::Internal(
                    "set query found a member but no single candidate is one".into(),
                ));
            }
            start = end;
        }
        break;
    }
    Ok(CoreResult {
        core: current,
        labels,
        steps,
    })
}

/// `Γ ∪ C_D`: one crisp singleton `{(a)}` per label, named `const_<a>`.
/// Existing identical relations are kept once.
pub fn add_constants(language: &Language) -> Result<Language> {
    let mut out = language.clone();
    let d = language.domain_size();
    for a in 0..d {
        let c = library::constant(d, a);
        match out.lookup(c.name()) {
            Some(id) if *out.relation(id) == c => {}
            Some(_) => {
                return Err(Error::Structural(format!(
                    "relation `{}` exists with different contents",
                    c.name()
                )))
            }
            None => {
                out.push(c)?;
            }
        }
    }
    Ok(out)
}
