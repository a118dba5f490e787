//! `vcsp`: solve, relax and analyse valued constraint languages from files.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use vcsp_core::algebra::bwc::{bwc_test_with_candidates, BwcVerdict};
use vcsp_core::algebra::core::{add_constants, core_of};
use vcsp_core::algebra::fractional::find_fpol_violation;
use vcsp_core::algebra::gadget::opt_gadget;
use vcsp_core::algebra::operation::Operation;
use vcsp_core::algebra::support::{supp_membership, SuppOptions};
use vcsp_core::format::{
    builtin_operation, load_instance, load_language, load_operations, serialize_fractional, serialize_instance,
    serialize_language, serialize_operation,
};
use vcsp_core::gen::{cycle, gen_improved, gen_instance, gen_min_uncut, gen_submodular, GenConfig, Shape};
use vcsp_core::lp::to_lp_text;
use vcsp_core::minimality::{establish_minimality, CrispNetwork};
use vcsp_core::oracle::brute_force;
use vcsp_core::pipeline::{width_audit, PipelineOptions, SolveStatus, Solver};
use vcsp_core::relaxation::{build_sa, dump_solution, solve_sa, SaStatus};
use vcsp_core::{Error, Instance, Language, Result};

#[derive(Parser)]
#[command(name = "vcsp", version, about = "Exact Sherali-Adams relaxations for valued CSPs")]
struct Cli {
    /// Emit JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Cap on d^n for exhaustive enumeration.
    #[arg(long, global = true, default_value_t = 1_000_000)]
    max_assignments: u64,
    /// Cap on d^(d^k) operations in support queries.
    #[arg(long, global = true, default_value_t = 1 << 16)]
    max_ops: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy)]
struct Levels {
    #[arg(long, default_value_t = 2)]
    k: usize,
    #[arg(long, default_value_t = 3)]
    l: usize,
}

#[derive(Subcommand)]
enum Command {
    /// SA(k,l) value with exactness status, optionally an optimal assignment.
    Solve {
        #[arg(long)]
        instance: PathBuf,
        #[command(flatten)]
        levels: Levels,
        #[arg(long)]
        assign: bool,
    },
    /// Dump the SA(k,l) program and its optimal solution.
    Relax {
        #[arg(long)]
        instance: PathBuf,
        #[command(flatten)]
        levels: Levels,
        /// Also print the LP in text form.
        #[arg(long)]
        lp: bool,
    },
    /// Establish (k,l)-minimality of the instance's feasibility network.
    Minimal {
        #[arg(long)]
        instance: PathBuf,
        #[command(flatten)]
        levels: Levels,
    },
    /// Brute-force optimum and all optimal assignments.
    Oracle {
        #[arg(long)]
        instance: PathBuf,
    },
    /// Check every fractional operation of an operation file.
    CheckFpol {
        #[arg(long)]
        language: PathBuf,
        #[arg(long)]
        ops: PathBuf,
    },
    /// Decide f ∈ supp(Γ) with a witness either way.
    SuppMember {
        #[arg(long)]
        language: PathBuf,
        /// Operation file, or a built-in name (min, max, majority, minority).
        #[arg(long)]
        op: String,
        /// Operation within the file; defaults to the first.
        #[arg(long)]
        name: Option<String>,
        /// Where to write the witness instance of a negative answer.
        #[arg(long, default_value = "witness.vcsp")]
        witness_out: PathBuf,
    },
    /// Compute a core by restricting along non-bijective unary support operations.
    Core {
        #[arg(long)]
        language: PathBuf,
        /// Write the core language here (needs at least two labels).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Test the bounded width condition.
    Bwc {
        #[arg(long)]
        language: PathBuf,
        /// Test the language as given instead of its core with constants.
        #[arg(long)]
        raw: bool,
        /// Operation file with candidate pairs: each ternary operation is
        /// paired with the next 4-ary one.
        #[arg(long)]
        candidates: Option<PathBuf>,
    },
    /// Replace opt(I) constraints of J′ by copies of I.
    OptGadget {
        /// Language Γ of I and of the output.
        #[arg(long)]
        gamma: PathBuf,
        #[arg(long)]
        inner: PathBuf,
        #[arg(long)]
        outer: PathBuf,
        #[arg(long)]
        opt_name: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate languages and instances.
    #[command(subcommand)]
    Gen(GenCommand),
    /// Compare SA(k,l) with brute force on sampled or given instances.
    Audit {
        #[arg(long, conflicts_with = "instances")]
        language: Option<PathBuf>,
        #[arg(long, num_args = 1..)]
        instances: Vec<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 4)]
        vars: usize,
        #[arg(long, default_value_t = 5)]
        constraints: usize,
        #[command(flatten)]
        levels: Levels,
        /// Record runtimes (makes the report non-reproducible).
        #[arg(long)]
        timing: bool,
        /// Write instances with a gap into this directory.
        #[arg(long)]
        gap_dir: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum GenCommand {
    /// Min-UnCut on a cycle or an explicit edge list.
    MinUncut {
        #[arg(long)]
        vertices: usize,
        /// Edges as `a-b,c-d`; defaults to the cycle on all vertices.
        #[arg(long)]
        edges: Option<String>,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Random Boolean submodular language and instance.
    Submodular {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        vars: usize,
        #[arg(long, default_value_t = 2)]
        arity: usize,
        #[arg(long)]
        count: usize,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Random language improved by a fractional operation from a file.
    Improved {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        ops: PathBuf,
        /// Index of the fpol block in the file.
        #[arg(long, default_value_t = 0)]
        fpol: usize,
        #[arg(long, value_delimiter = ',')]
        arities: Vec<usize>,
        #[arg(long)]
        crisp: bool,
        #[arg(long, default_value_t = 10)]
        max_value: usize,
        /// Probability of +∞ entries as `p/q`.
        #[arg(long, default_value = "0/1")]
        p_inf: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Random instance over a language file.
    Instance {
        #[arg(long)]
        language: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        vars: usize,
        #[arg(long)]
        constraints: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

/// What a command prints and how it exits.
struct Report {
    text: String,
    json: Value,
    code: u8,
}

impl Report {
    fn ok(text: String, json: Value) -> Self {
        Report { text, json, code: 0 }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Unsatisfiable(_) => 1,
        Error::Parse { .. } | Error::Structural(_) | Error::Io(_) => 2,
        Error::Resource(_) | Error::RejectionLimit(_) => 3,
        Error::Internal(_) | Error::Arithmetic(_) => 4,
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    }
    std::fs::write(path, contents).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Absolute form of `path` for `language` lines in written instances.
fn absolute(path: &Path) -> Result<String> {
    std::fs::canonicalize(path)
        .map(|p| p.display().to_string())
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn supp_options(cli: &Cli) -> SuppOptions {
    SuppOptions {
        max_ops: cli.max_ops,
        ..SuppOptions::default()
    }
}

fn solver(cli: &Cli, levels: Levels) -> Solver {
    Solver::new(PipelineOptions {
        k: levels.k,
        l: levels.l,
        supp: supp_options(cli),
        assignment_cap: cli.max_assignments,
    })
}

fn load_operation(spec: &str, name: Option<&str>, d: usize) -> Result<(String, Operation)> {
    let path = Path::new(spec);
    if !path.exists() {
        return (1..=4)
            .find_map(|arity| builtin_operation(spec, d, arity))
            .map(|op| (spec.to_string(), op))
            .ok_or_else(|| Error::Io(format!("{spec}: no such file or built-in operation")));
    }
    let file = load_operations(path)?;
    if file.domain != d {
        return Err(Error::Structural(format!(
            "operation file is over {} labels, language over {d}",
            file.domain
        )));
    }
    let found = match name {
        Some(n) => file.operations.iter().find(|(m, _)| m == n),
        None => file.operations.first(),
    };
    found
        .cloned()
        .ok_or_else(|| Error::Structural(format!("{spec}: operation not found")))
}

fn run(cli: &Cli) -> Result<Report> {
    match &cli.command {
        Command::Solve {
            instance,
            levels,
            assign,
        } => cmd_solve(cli, instance, *levels, *assign),
        Command::Relax { instance, levels, lp } => cmd_relax(instance, *levels, *lp),
        Command::Minimal { instance, levels } => cmd_minimal(instance, *levels),
        Command::Oracle { instance } => cmd_oracle(cli, instance),
        Command::CheckFpol { language, ops } => cmd_check_fpol(language, ops),
        Command::SuppMember {
            language,
            op,
            name,
            witness_out,
        } => cmd_supp_member(cli, language, op, name.as_deref(), witness_out),
        Command::Core { language, out } => cmd_core(cli, language, out.as_deref()),
        Command::Bwc {
            language,
            raw,
            candidates,
        } => cmd_bwc(cli, language, *raw, candidates.as_deref()),
        Command::OptGadget {
            gamma,
            inner,
            outer,
            opt_name,
            out,
        } => cmd_opt_gadget(cli, gamma, inner, outer, opt_name, out),
        Command::Gen(g) => cmd_gen(g),
        Command::Audit {
            language,
            instances,
            seed,
            samples,
            vars,
            constraints,
            levels,
            timing,
            gap_dir,
        } => {
            let cases = audit_cases(language.as_deref(), instances, *seed, *samples, *vars, *constraints)?;
            cmd_audit(cli, *levels, &cases, *timing, gap_dir.as_deref())
        }
    }
}

fn cmd_solve(cli: &Cli, path: &Path, levels: Levels, assign: bool) -> Result<Report> {
    let inst = load_instance(path)?;
    let solver = solver(cli, levels);
    let r = solver.solve_value(&inst)?;
    let mut text = format!(
        "value {}\nstatus {}\nbwc {}\n",
        r.value,
        r.status.label(),
        r.analysis.verdict.label()
    );
    let mut js = json!({
        "value": r.value.to_string(),
        "status": r.status,
        "bwc": r.analysis.verdict.label(),
    });
    if r.status == SolveStatus::Unsatisfiable {
        return Ok(Report { text, json: js, code: 1 });
    }
    if assign && r.status != SolveStatus::ExactIfBwc {
        eprintln!("no assignment: the relaxation is not known to be exact for this language");
    } else if assign {
        let a = solver.solve_assignment(&inst)?;
        let _ = writeln!(text, "assignment {}", a.assignment);
        let _ = writeln!(text, "lp-solves {}", a.lp_solves);
        let _ = writeln!(text, "slackness {}", if a.slackness.holds { "holds" } else { "fails" });
        js["assignment"] = json!(a.assignment.0);
        js["lp_solves"] = json!(a.lp_solves);
        js["slackness"] = json!(a.slackness);
    }
    Ok(Report::ok(text, js))
}

fn cmd_relax(path: &Path, levels: Levels, lp: bool) -> Result<Report> {
    let inst = load_instance(path)?;
    let program = build_sa(&inst, levels.k, levels.l)?;
    let sol = solve_sa(&program)?;
    let mut text = String::new();
    if lp {
        text.push_str(&to_lp_text(&program.lp));
        text.push('\n');
    }
    let dump = dump_solution(&program, &sol);
    text.push_str(&dump);
    let js = json!({
        "status": sol.status,
        "objective": sol.objective.to_string(),
        "columns": program.num_columns(),
        "rows": program.rows.len(),
        "dump": dump,
    });
    let code = if sol.status == SaStatus::Infeasible { 1 } else { 0 };
    Ok(Report { text, json: js, code })
}

fn network_text(net: &CrispNetwork) -> String {
    let mut out = String::new();
    for (scope, tuples) in &net.constraints {
        let vars: Vec<String> = scope.iter().map(|v| format!("x{v}")).collect();
        let _ = write!(out, "{{{}}}:", vars.join(","));
        for t in tuples {
            let labels: Vec<String> = t.iter().map(|x| x.to_string()).collect();
            let _ = write!(out, " ({})", labels.join(","));
        }
        out.push('\n');
    }
    out
}

fn cmd_minimal(path: &Path, levels: Levels) -> Result<Report> {
    let inst = load_instance(path)?;
    let net = CrispNetwork::from_instance(&inst)?;
    match establish_minimality(&net, levels.k, levels.l)? {
        None => Ok(Report {
            text: "empty\n".into(),
            json: json!({ "empty": true }),
            code: 1,
        }),
        Some(out) => Ok(Report::ok(
            format!("minimal\n{}", network_text(&out)),
            json!({ "empty": false, "network": out }),
        )),
    }
}

fn cmd_oracle(cli: &Cli, path: &Path) -> Result<Report> {
    let inst = load_instance(path)?;
    let bf = brute_force(&inst, cli.max_assignments)?;
    let mut text = format!("value {}\noptima {}\n", bf.value, bf.optima.len());
    for a in &bf.optima {
        let _ = writeln!(text, "{a}");
    }
    let code = if bf.value.is_infinite() { 1 } else { 0 };
    Ok(Report {
        text,
        json: json!(bf),
        code,
    })
}

fn cmd_check_fpol(language: &Path, ops: &Path) -> Result<Report> {
    let lang = load_language(language)?;
    let file = load_operations(ops)?;
    if file.fractional.is_empty() {
        return Err(Error::Structural(format!("{}: no fpol blocks", ops.display())));
    }
    let mut text = String::new();
    let mut results = Vec::new();
    for (i, omega) in file.fractional.iter().enumerate() {
        let v = find_fpol_violation(omega, &lang)?;
        match &v {
            None => {
                let _ = writeln!(text, "fpol {i}: yes");
            }
            Some(violation) => {
                let _ = writeln!(text, "fpol {i}: no {violation:?}");
            }
        }
        results.push(json!({ "index": i, "fractional_polymorphism": v.is_none(), "violation": v }));
    }
    Ok(Report::ok(text, Value::Array(results)))
}

fn cmd_supp_member(cli: &Cli, language: &Path, op: &str, name: Option<&str>, witness_out: &Path) -> Result<Report> {
    let lang = load_language(language)?;
    let (op_name, f) = load_operation(op, name, lang.domain_size())?;
    let ans = supp_membership(&f, &lang, &supp_options(cli))?;
    if ans.member {
        let omega = ans.witness_fpol.expect("member witness");
        let mut fpol = String::new();
        serialize_fractional(&mut fpol, "w", &omega);
        let text = format!("yes\noperation {op_name}\n{fpol}");
        let js = json!({ "member": true, "operation": op_name, "witness_fpol": fpol, "certificate_verified": ans.certificate_verified });
        return Ok(Report::ok(text, js));
    }
    let witness = ans.witness_instance.expect("non-member witness");
    let witness = witness.with_path(absolute(language)?);
    write_file(witness_out, &serialize_instance(&witness))?;
    let text = format!(
        "no\noperation {op_name}\nnot-polymorphism {}\nwitness {}\n",
        ans.not_polymorphism,
        witness_out.display()
    );
    let js = json!({
        "member": false,
        "operation": op_name,
        "not_polymorphism": ans.not_polymorphism,
        "witness": witness_out.display().to_string(),
        "certificate_verified": ans.certificate_verified,
    });
    Ok(Report::ok(text, js))
}

fn cmd_core(cli: &Cli, language: &Path, out: Option<&Path>) -> Result<Report> {
    let lang = load_language(language)?;
    let core = core_of(&lang, &supp_options(cli))?;
    let labels: Vec<String> = core.labels.iter().map(|x| x.to_string()).collect();
    let mut text = format!("labels {}\nsteps {}\n", labels.join(" "), core.steps.len());
    let mut steps = Vec::new();
    for s in &core.steps {
        let image: Vec<String> = s.image.iter().map(|x| x.to_string()).collect();
        let _ = writeln!(text, "map {} image {}", s.map, image.join(" "));
        steps.push(json!({ "map": s.map.table(), "image": s.image }));
    }
    if let Some(path) = out {
        if core.core.domain_size() < 2 {
            return Err(Error::Structural("a one-label core cannot be written as a language file".into()));
        }
        write_file(path, &serialize_language(&core.core))?;
        let _ = writeln!(text, "written {}", path.display());
    }
    Ok(Report::ok(text, json!({ "labels": core.labels, "steps": steps })))
}

fn verdict_report(verdict: &BwcVerdict, domain: usize) -> Report {
    match verdict {
        BwcVerdict::Yes(w) => {
            let mut ops = String::new();
            serialize_operation(&mut ops, "f", &w.f);
            serialize_operation(&mut ops, "g", &w.g);
            let route = serde_json::to_value(w.route).expect("route");
            let text = format!(
                "yes\nroute {}\npair-checked {}\ndomain {domain}\n{ops}",
                route.as_str().unwrap_or(""),
                w.pair_checked
            );
            Report::ok(
                text,
                json!({ "verdict": "yes", "route": w.route, "pair_checked": w.pair_checked, "f": w.f.table(), "g": w.g.table() }),
            )
        }
        BwcVerdict::No => Report::ok("no\n".into(), json!({ "verdict": "no" })),
        BwcVerdict::Unknown(reason) => Report::ok(
            format!("unknown\nreason {reason}\n"),
            json!({ "verdict": "unknown", "reason": reason }),
        ),
    }
}

fn candidate_pairs(path: &Path, d: usize) -> Result<Vec<(Operation, Operation)>> {
    let file = load_operations(path)?;
    if file.domain != d {
        return Err(Error::Structural("candidate file over another domain".into()));
    }
    let mut pairs = Vec::new();
    let mut pending: Option<Operation> = None;
    for (_, op) in &file.operations {
        match (op.arity(), pending.take()) {
            (3, _) => pending = Some(op.clone()),
            (4, Some(f)) => pairs.push((f, op.clone())),
            _ => {}
        }
    }
    Ok(pairs)
}

fn cmd_bwc(cli: &Cli, language: &Path, raw: bool, candidates: Option<&Path>) -> Result<Report> {
    let lang = load_language(language)?;
    let options = supp_options(cli);
    let (tested, labels) = if raw {
        (lang.clone(), (0..lang.domain_size()).collect::<Vec<_>>())
    } else {
        let core = core_of(&lang, &options)?;
        (add_constants(&core.core)?, core.labels)
    };
    let pairs = match candidates {
        Some(p) if raw || labels.len() == lang.domain_size() => candidate_pairs(p, tested.domain_size())?,
        Some(_) => {
            return Err(Error::Structural(
                "candidate pairs need --raw or a language that is already a core".into(),
            ))
        }
        None => Vec::new(),
    };
    let verdict = bwc_test_with_candidates(&tested, &pairs, &options)?;
    Ok(verdict_report(&verdict, tested.domain_size()))
}

fn cmd_opt_gadget(cli: &Cli, gamma: &Path, inner: &Path, outer: &Path, opt_name: &str, out: &Path) -> Result<Report> {
    let g = Arc::new(load_language(gamma)?);
    let i = load_instance(inner)?.rebind(g.clone())?;
    let jp = load_instance(outer)?;
    let r = opt_gadget(&g, &i, &jp, opt_name, cli.max_assignments)?;
    let j = r.instance.clone().with_path(absolute(gamma)?);
    write_file(out, &serialize_instance(&j))?;
    let gap = r.gap.as_ref().map_or_else(|| "none".to_string(), |q| q.to_string());
    let text = format!(
        "copies {}\nupper {}\nlower {}\ngap {gap}\nreplaced {}\nmin-inner {}\noffset {}\nwritten {}\n",
        r.copies,
        r.upper,
        r.lower,
        r.replaced,
        r.min_i,
        r.offset(),
        out.display()
    );
    let js = json!({
        "copies": r.copies.to_string(),
        "upper": r.upper.to_string(),
        "lower": r.lower.to_string(),
        "gap": gap,
        "replaced": r.replaced,
        "min_inner": r.min_i.to_string(),
        "offset": r.offset().to_string(),
        "written": out.display().to_string(),
    });
    Ok(Report::ok(text, js))
}

fn write_pair(dir: &Path, stem: &str, lang: &Language, inst: &Instance) -> Result<(PathBuf, PathBuf)> {
    let lang_path = dir.join(format!("{stem}.lang"));
    let inst_path = dir.join(format!("{stem}.vcsp"));
    write_file(&lang_path, &serialize_language(lang))?;
    let inst = inst.clone().with_path(format!("{stem}.lang"));
    write_file(&inst_path, &serialize_instance(&inst))?;
    Ok((lang_path, inst_path))
}

fn parse_edges(spec: &str) -> Result<Vec<(usize, usize)>> {
    spec.split(',')
        .filter(|s| !s.is_empty())
        .map(|e| {
            let (a, b) = e
                .split_once('-')
                .ok_or_else(|| Error::Structural(format!("malformed edge `{e}`")))?;
            let p = |s: &str| {
                s.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::Structural(format!("malformed edge `{e}`")))
            };
            Ok((p(a)?, p(b)?))
        })
        .collect()
}

fn parse_ratio(s: &str) -> Result<(usize, usize)> {
    let (p, q) = s.split_once('/').unwrap_or((s, "1"));
    match (p.parse::<usize>(), q.parse::<usize>()) {
        (Ok(p), Ok(q)) if q > 0 && p <= q => Ok((p, q)),
        _ => Err(Error::Structural(format!("malformed probability `{s}`"))),
    }
}

fn cmd_gen(cmd: &GenCommand) -> Result<Report> {
    let written = |paths: Vec<PathBuf>| {
        let text: String = paths.iter().map(|p| format!("written {}\n", p.display())).collect();
        let js = json!({ "written": paths.iter().map(|p| p.display().to_string()).collect::<Vec<_>>() });
        Report::ok(text, js)
    };
    match cmd {
        GenCommand::MinUncut {
            vertices,
            edges,
            out_dir,
        } => {
            let edges = match edges {
                Some(s) => parse_edges(s)?,
                None => cycle(*vertices),
            };
            let inst = gen_min_uncut(*vertices, &edges)?;
            let (l, i) = write_pair(out_dir, "min_uncut", inst.language(), &inst)?;
            Ok(written(vec![l, i]))
        }
        GenCommand::Submodular {
            seed,
            vars,
            arity,
            count,
            out_dir,
        } => {
            let (lang, inst) = gen_submodular(*seed, *vars, *arity, *count)?;
            let (l, i) = write_pair(out_dir, "submodular", &lang, &inst)?;
            Ok(written(vec![l, i]))
        }
        GenCommand::Improved {
            seed,
            ops,
            fpol,
            arities,
            crisp,
            max_value,
            p_inf,
            out,
        } => {
            let file = load_operations(ops)?;
            let omega = file
                .fractional
                .get(*fpol)
                .ok_or_else(|| Error::Structural(format!("{}: no fpol block {fpol}", ops.display())))?;
            let shape = Shape {
                domain: file.domain,
                arities: arities.clone(),
                crisp: *crisp,
            };
            let cfg = GenConfig {
                max_value: *max_value,
                p_inf: parse_ratio(p_inf)?,
                ..GenConfig::default()
            };
            let lang = gen_improved(*seed, omega, &shape, &cfg)?;
            write_file(out, &serialize_language(&lang))?;
            Ok(written(vec![out.clone()]))
        }
        GenCommand::Instance {
            language,
            seed,
            vars,
            constraints,
            out,
        } => {
            let lang = Arc::new(load_language(language)?);
            let inst = gen_instance(*seed, lang, *vars, *constraints)?.with_path(absolute(language)?);
            write_file(out, &serialize_instance(&inst))?;
            Ok(written(vec![out.clone()]))
        }
    }
}

fn audit_cases(
    language: Option<&Path>,
    instances: &[PathBuf],
    seed: u64,
    samples: usize,
    vars: usize,
    constraints: usize,
) -> Result<Vec<(String, Instance)>> {
    if let Some(path) = language {
        let lang = Arc::new(load_language(path)?);
        return (0..samples)
            .map(|i| {
                let s = seed.wrapping_add(i as u64);
                Ok((format!("sample{i}"), gen_instance(s, lang.clone(), vars, constraints)?))
            })
            .collect();
    }
    if instances.is_empty() {
        return Err(Error::Structural("audit needs --language or --instances".into()));
    }
    instances
        .iter()
        .map(|p| Ok((p.display().to_string(), load_instance(p)?)))
        .collect()
}

fn cmd_audit(
    cli: &Cli,
    levels: Levels,
    cases: &[(String, Instance)],
    timing: bool,
    gap_dir: Option<&Path>,
) -> Result<Report> {
    let solver = solver(cli, levels);
    let report = width_audit(&solver, cases, timing)?;
    if let Some(dir) = gap_dir {
        for ((id, inst), row) in cases.iter().zip(&report.rows) {
            if row.gap {
                let stem = Path::new(id)
                    .file_stem()
                    .map_or_else(|| id.clone(), |s| s.to_string_lossy().into_owned());
                let lang = inst.language();
                write_pair(dir, &stem, lang, inst)?;
            }
        }
    }
    eprintln!(
        "matches {} gaps {} bwc {}",
        report.matches(),
        report.gaps().count(),
        report.verdict
    );
    let js = json!(report);
    Ok(Report::ok(report.to_csv(), js))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(report) => {
            if cli.json {
                println!("{}", serde_json::to_string_pretty(&report.json).expect("json"));
            } else {
                print!("{}", report.text);
            }
            ExitCode::from(report.code)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
