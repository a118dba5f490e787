//! End-to-end solving: the `SA(2,3)` value, optimal assignments by
//! self-reduction, and width audits against brute force.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::algebra::bwc::{bwc_test, BwcVerdict};
use crate::algebra::core::{add_constants, core_of, CoreResult};
use crate::algebra::support::SuppOptions;
use crate::error::{Error, Result};
use crate::format::serialize_language;
use crate::model::{Assignment, Instance, Language, DEFAULT_ASSIGNMENT_CAP};
use crate::oracle::brute_force_value;
use crate::rational::ExtRational;
use crate::relaxation::{
    build_sa, build_sa_masked, check_complementary_slackness, solve_sa, LabelMask, SaProgram, SaSolution,
    SaStatus, SlacknessReport,
};

#[derive(Clone, Copy, Debug)]
pub struct PipelineOptions {
    pub k: usize,
    pub l: usize,
    pub supp: SuppOptions,
    /// Cap on `d^n` for brute force in audits.
    pub assignment_cap: u64,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            k: 2,
            l: 3,
            supp: SuppOptions::default(),
            assignment_cap: DEFAULT_ASSIGNMENT_CAP,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    /// The language passed the BWC test, so the relaxation value is the
    /// optimum.
    ExactIfBwc,
    RelaxationOnly,
    Unsatisfiable,
}

impl SolveStatus {
    pub fn label(self) -> &'static str {
        match self {
            SolveStatus::ExactIfBwc => "exact-if-bwc",
            SolveStatus::RelaxationOnly => "relaxation-only",
            SolveStatus::Unsatisfiable => "unsatisfiable",
        }
    }
}

/// Core, core with constants, and the BWC verdict on the latter.
#[derive(Clone, Debug)]
pub struct LanguageAnalysis {
    /// `None` when the core search exceeded its caps.
    pub core: Option<CoreResult>,
    pub prepared: Option<Language>,
    pub verdict: BwcVerdict,
}

impl LanguageAnalysis {
    /// Labels of the core in the original labelling, or all labels.
    pub fn core_labels(&self, d: usize) -> Vec<usize> {
        match &self.core {
            Some(c) => c.labels.clone(),
            None => (0..d).collect(),
        }
    }
}

pub fn analyse_language(language: &Language, options: &SuppOptions) -> Result<LanguageAnalysis> {
    let core = match core_of(language, options) {
        Ok(c) => c,
        Err(Error::Resource(msg)) => {
            return Ok(LanguageAnalysis {
                core: None,
                prepared: None,
                verdict: BwcVerdict::Unknown(format!("core search: {msg}")),
            })
        }
        Err(e) => return Err(e),
    };
    let prepared = add_constants(&core.core)?;
    let verdict = bwc_test(&prepared, options)?;
    Ok(LanguageAnalysis {
        core: Some(core),
        prepared: Some(prepared),
        verdict,
    })
}

#[derive(Clone, Debug)]
pub struct ValueReport {
    pub value: ExtRational,
    pub status: SolveStatus,
    pub program: SaProgram,
    pub solution: SaSolution,
    pub analysis: Arc<LanguageAnalysis>,
}

#[derive(Clone, Debug)]
pub struct AssignmentReport {
    pub assignment: Assignment,
    pub value: ExtRational,
    pub lp_solves: usize,
    pub slackness: SlacknessReport,
}

/// Solver with a per-language cache of BWC analyses, keyed by the
/// canonical serialization of the language.
#[derive(Debug, Default)]
pub struct Solver {
    pub options: PipelineOptions,
    cache: Mutex<HashMap<String, Arc<LanguageAnalysis>>>,
}

impl Solver {
    pub fn new(options: PipelineOptions) -> Self {
        Solver {
            options,
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn analysis(&self, language: &Language) -> Result<Arc<LanguageAnalysis>> {
        let key = serialize_language(language);
        if let Some(hit) = self.cache.lock().expect("cache lock").get(&key) {
            return Ok(hit.clone());
        }
        let fresh = Arc::new(analyse_language(language, &self.options.supp)?);
        self.cache
            .lock()
            .expect("cache lock")
            .entry(key)
            .or_insert(fresh.clone());
        Ok(fresh)
    }

    pub fn cached_languages(&self) -> usize {
        self.cache.lock().expect("cache lock").len()
    }

    pub fn solve_value(&self, instance: &Instance) -> Result<ValueReport> {
        let program = build_sa(instance, self.options.k, self.options.l)?;
        let solution = solve_sa(&program)?;
        let analysis = self.analysis(instance.language())?;
        let status = if solution.status == SaStatus::Infeasible {
            SolveStatus::Unsatisfiable
        } else if analysis.verdict.is_yes() && self.options.k >= 2 && self.options.l >= 3 {
            SolveStatus::ExactIfBwc
        } else {
            SolveStatus::RelaxationOnly
        };
        Ok(ValueReport {
            value: solution.objective.clone(),
            status,
            program,
            solution,
            analysis,
        })
    }

    /// An optimal assignment by pinning variables in index order to core
    /// labels in ascending order. Needs status exact-if-BWC.
    pub fn solve_assignment(&self, instance: &Instance) -> Result<AssignmentReport> {
        let report = self.solve_value(instance)?;
        match report.status {
            SolveStatus::ExactIfBwc => {}
            SolveStatus::Unsatisfiable => {
                return Err(Error::Unsatisfiable("the relaxation is infeasible".into()))
            }
            SolveStatus::RelaxationOnly => {
                return Err(Error::Structural(
                    "assignment extraction needs a language that passed the BWC test".into(),
                ))
            }
        }
        let (n, d) = (instance.num_vars(), instance.domain_size());
        let (k, l) = (self.options.k, self.options.l);
        let labels = report.analysis.core_labels(d);
        let mut mask = LabelMask::labels(n, d, &labels);
        let target = solve_sa(&build_sa_masked(instance, k, l, &mask)?)?.objective;
        let mut solves = 1;
        if target != report.value {
            return Err(Error::Internal(format!(
                "restricting to the core changed the optimum from {} to {target}",
                report.value
            )));
        }
        let mut sigma = Vec::with_capacity(n);
        for v in 0..n {
            let mut chosen = None;
            for &a in &labels {
                let mut trial = mask.clone();
                trial.pin(v, a);
                let value = solve_sa(&build_sa_masked(instance, k, l, &trial)?)?.objective;
                solves += 1;
                if value == target {
                    chosen = Some(a);
                    mask = trial;
                    break;
                }
            }
            let a = chosen.ok_or_else(|| {
                Error::Internal(format!("no label of x{v} keeps the optimum {target}"))
            })?;
            sigma.push(a);
        }
        let assignment = Assignment(sigma);
        let value = instance.eval(&assignment)?;
        if value != report.value {
            return Err(Error::Internal(format!(
                "extracted assignment has value {value}, relaxation {}",
                report.value
            )));
        }
        let slackness = check_complementary_slackness(&report.program, &report.solution, &assignment.0);
        Ok(AssignmentReport {
            assignment,
            value,
            lp_solves: solves,
            slackness,
        })
    }
}

/// One audited instance.
#[derive(Clone, Debug, Serialize)]
pub struct AuditRow {
    pub id: String,
    pub oracle: ExtRational,
    pub relaxation: ExtRational,
    pub gap: bool,
    #[serde(skip)]
    pub runtime: Option<Duration>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AuditReport {
    pub verdict: String,
    pub rows: Vec<AuditRow>,
}

impl AuditReport {
    pub fn gaps(&self) -> impl Iterator<Item = &AuditRow> {
        self.rows.iter().filter(|r| r.gap)
    }

    pub fn matches(&self) -> usize {
        self.rows.iter().filter(|r| !r.gap).count()
    }

    /// `instance,oracle,sa,gap,runtime`, runtime in milliseconds or `NA`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("instance,oracle,sa,gap,runtime\n");
        for r in &self.rows {
            let runtime = r
                .runtime
                .map_or_else(|| "NA".to_string(), |t| format!("{:.3}", t.as_secs_f64() * 1e3));
            let _ = writeln!(out, "{},{},{},{},{}", r.id, r.oracle, r.relaxation, r.gap, runtime);
        }
        out
    }
}

/// Compares the relaxation with brute force on every instance. All
/// instances must share one language. With `timing` the relaxation
/// runtime is recorded; otherwise reports are reproducible byte for byte.
pub fn width_audit(solver: &Solver, instances: &[(String, Instance)], timing: bool) -> Result<AuditReport> {
    let mut rows = Vec::with_capacity(instances.len());
    let mut verdict = None;
    for (id, inst) in instances {
        let oracle = brute_force_value(inst, solver.options.assignment_cap)?;
        let start = Instant::now();
        let report = solver.solve_value(inst)?;
        let elapsed = start.elapsed();
        if report.value > oracle {
            return Err(Error::Internal(format!(
                "relaxation value {} exceeds the optimum {oracle} on {id}",
                report.value
            )));
        }
        verdict.get_or_insert_with(|| report.analysis.verdict.label().to_string());
        rows.push(AuditRow {
            id: id.clone(),
            gap: report.value != oracle,
            oracle,
            relaxation: report.value,
            runtime: timing.then_some(elapsed),
        });
    }
    Ok(AuditReport {
        verdict: verdict.unwrap_or_else(|| "n/a".into()),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::{cycle, gen_instance, gen_min_uncut, gen_submodular};
    use crate::library;
    use crate::model::{Domain, WeightedRelation};
    use crate::oracle::brute_force;

    fn single(rel: WeightedRelation, n: usize, scopes: &[&[usize]]) -> Instance {
        let lang = Arc::new(Language::with_relations(Domain::new(rel.domain()).unwrap(), [rel]).unwrap());
        let mut inst = Instance::new(lang, n);
        for s in scopes {
            inst.add(0, s.to_vec()).unwrap();
        }
        inst
    }

    #[test]
    fn statuses() {
        let solver = Solver::default();
        let tri = gen_min_uncut(3, &cycle(3)).unwrap();
        let r = solver.solve_value(&tri).unwrap();
        assert_eq!(r.value, ExtRational::one());
        assert_eq!(r.status, SolveStatus::RelaxationOnly);

        let empty = WeightedRelation::crisp("empty", 2, 1, []).unwrap();
        let r = solver.solve_value(&single(empty, 2, &[&[1]])).unwrap();
        assert_eq!(r.status, SolveStatus::Unsatisfiable);

        let (_, inst) = gen_submodular(4, 5, 3, 6).unwrap();
        let r = solver.solve_value(&inst).unwrap();
        assert_eq!(r.status, SolveStatus::ExactIfBwc);
        assert_eq!(r.value, brute_force_value(&inst, DEFAULT_ASSIGNMENT_CAP).unwrap());
    }

    #[test]
    fn assignments_by_self_reduction() {
        let solver = Solver::default();
        let cut = solver.solve_assignment(&single(library::phi_cut(), 2, &[&[0, 1]])).unwrap();
        assert_eq!(cut.assignment, Assignment(vec![0, 0]));
        assert!(cut.slackness.holds);
        let u = solver.solve_assignment(&single(library::phi_u(), 1, &[&[0]])).unwrap();
        assert_eq!(u.assignment, Assignment(vec![0]));

        let (_, inst) = gen_submodular(11, 4, 2, 7).unwrap();
        let r = solver.solve_assignment(&inst).unwrap();
        assert_eq!(ExtRational::Finite(r.value.finite().unwrap().clone()), brute_force(&inst, DEFAULT_ASSIGNMENT_CAP).unwrap().value);
        assert!(r.lp_solves <= 1 + 4 * 2);
        assert!(r.slackness.holds);
        assert!(solver.solve_assignment(&gen_min_uncut(3, &cycle(3)).unwrap()).is_err());
    }

    #[test]
    fn analysis_is_cached_per_language() {
        let solver = Solver::default();
        let (lang, _) = gen_submodular(2, 3, 2, 3).unwrap();
        for seed in 0..3 {
            solver.solve_value(&gen_instance(seed, lang.clone(), 3, 3).unwrap()).unwrap();
        }
        assert_eq!(solver.cached_languages(), 1);
    }

    #[test]
    fn audits() {
        let solver = Solver::default();
        let cut = Arc::new(Language::with_relations(Domain::new(2).unwrap(), [library::phi_cut()]).unwrap());
        let cases: Vec<(String, Instance)> = (0..10)
            .map(|s| (format!("cut{s}"), gen_instance(s, cut.clone(), 4, 5).unwrap()))
            .collect();
        let report = width_audit(&solver, &cases, false).unwrap();
        assert_eq!(report.gaps().count(), 0);
        assert_eq!(report.verdict, "yes");
        assert!(report.to_csv().lines().nth(1).unwrap().ends_with(",false,NA"));

        let cycles: Vec<(String, Instance)> =
            (3..8).map(|n| (format!("c{n}"), gen_min_uncut(n, &cycle(n)).unwrap())).collect();
        let report = width_audit(&solver, &cycles, false).unwrap();
        assert_eq!(report.verdict, "no");
        assert_eq!(report.rows.len(), 5);
    }
}
