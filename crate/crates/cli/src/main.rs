//! kzrat: exact rational solutions of Fuchsian systems
//! dW/dz = rho * A(z) W, A(z) = sum_k P_k/(z - z_k).
//!
//! Exit codes: 0 = success / all checks pass; 1 = mathematical negative
//! (conditions fail, no solution found, verification fails); 2 = usage or
//! parse error.

mod docs;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use kzrat::kzsystem::{self, CondOutcome, CondStatus};
use kzrat::ratfunc::{self, SolveStatus};
use kzrat::symrep;
use kzrat::{frobenius, KzSystem, RatMatFunc};

use docs::*;

/// Known discrepancies between this implementation's exactly computed
/// values and figures sometimes quoted for these systems. Facts below are
/// asserted by the test suite; they are reported as notes, never failures.
const NOTES: [&str; 3] = [
    "adjoint degree: deg Q2 follows the bound -m_T (= 1 when m_T = -1); a quoted value of -1 for this degree contradicts the bound and is not used",
    "T spectrum (natural representation): the exact multiplicity profile is {n-1: 1, n-2: n-2, -1: 1}; the middle eigenvalue is n-2, not n-1",
    "product invariant: b0*c0 + b(-1)*c1 + b1*c(-1) = -2*beta_k*P_k when beta_k != 0 (4I when beta_k = 0); the scalar form 2*beta_k*I does not hold, though det != 0 holds either way",
];

#[derive(Parser)]
#[command(name = "kzrat", version, about = "exact rational solutions of Fuchsian systems")]
struct Cli {
    /// Emit one machine-readable JSON document instead of text
    #[arg(long, global = true)]
    json: bool,
    /// Seed for the deterministic kernel search and evaluation points
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the natural-representation system of S_n
    GenSn {
        /// Dimension n >= 2 (uses n-1 poles)
        #[arg(long)]
        n: usize,
        /// Comma-separated distinct rational poles, e.g. "0,1,-1/2"
        #[arg(long)]
        poles: String,
        #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
        rho: i64,
        /// Output path (stdout when omitted)
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Check the sufficient conditions and degree bounds
    Check { input: PathBuf },
    /// Construct a rational fundamental solution (and optionally its adjoint)
    Solve {
        input: PathBuf,
        /// Highest pole order allowed in the ansatz
        #[arg(long, default_value_t = 1)]
        max_pole_order: usize,
        /// Polynomial degree cap (negative = no polynomial part; omitted = from the degree bounds)
        #[arg(long, allow_hyphen_values = true)]
        max_poly_degree: Option<i64>,
        /// Write the solution W to this path
        #[arg(long)]
        emit_solution: Option<PathBuf>,
        /// Also build the adjoint Y (normalized so W*Y = I) and write it here
        #[arg(long)]
        adjoint: Option<PathBuf>,
    },
    /// Independently re-verify a solution file against a system file
    Verify { system: PathBuf, solution: PathBuf },
    /// Per-pole local data: exponent bounds, seeds, product invariant
    Local { input: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            2
        }
    };
    ExitCode::from(code)
}

fn run(cli: Cli) -> Result<u8, String> {
    match cli.command {
        Command::GenSn { n, poles, rho, output } => cmd_gen_sn(n, &poles, rho, output, cli.json),
        Command::Check { input } => cmd_check(&input, cli.json),
        Command::Solve {
            input,
            max_pole_order,
            max_poly_degree,
            emit_solution,
            adjoint,
        } => cmd_solve(
            &input,
            max_pole_order,
            max_poly_degree,
            emit_solution,
            adjoint,
            cli.seed,
            cli.json,
        ),
        Command::Verify { system, solution } => cmd_verify(&system, &solution, cli.seed, cli.json),
        Command::Local { input } => cmd_local(&input, cli.json),
    }
}

fn read_system(path: &PathBuf) -> Result<(SystemDocument, KzSystem), String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let doc: SystemDocument =
        serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    let system = doc.to_system().map_err(|e| format!("{}: {e}", path.display()))?;
    Ok((doc, system))
}

fn write_json<T: serde::Serialize>(value: &T, path: Option<&PathBuf>) -> Result<(), String> {
    let text = serde_json::to_string_pretty(value).map_err(|e| e.to_string())?;
    match path {
        Some(p) => fs::write(p, text + "\n").map_err(|e| format!("{}: {e}", p.display())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn cmd_gen_sn(
    n: usize,
    poles: &str,
    rho: i64,
    output: Option<PathBuf>,
    json: bool,
) -> Result<u8, String> {
    let poles = poles
        .split(',')
        .map(parse_rat)
        .collect::<Result<Vec<_>, _>>()?;
    let system = symrep::natural_kz_system(n, poles, rho).map_err(|e| e.to_string())?;
    let doc = SystemDocument::from_system(
        &system,
        Some(Metadata {
            label: Some(format!("S_{n} natural representation")),
            provenance: Some("kzrat gen-sn".into()),
        }),
    );
    write_json(&doc, output.as_ref())?;
    if let Some(p) = &output {
        if !json {
            println!(
                "wrote S_{n} system ({} poles, rho={rho}) to {}",
                system.pole_count(),
                p.display()
            );
        }
    }
    Ok(0)
}

fn condition_entry(name: &str, o: &CondOutcome) -> ConditionEntry {
    ConditionEntry {
        name: name.to_string(),
        status: match o.status {
            CondStatus::Pass => "pass",
            CondStatus::Fail => "fail",
            CondStatus::Vacuous => "vacuous",
        }
        .to_string(),
        witness: o.witness.clone(),
    }
}

fn conditions_doc(system: &KzSystem) -> ConditionsDoc {
    let report = kzsystem::check_conditions(system);
    ConditionsDoc {
        entries: vec![
            condition_entry("involution", &report.cond1_involution),
            condition_entry("triple-product", &report.cond2_triple),
            condition_entry("pair-product", &report.cond3_pair),
            condition_entry("symmetry", &report.cond4_symmetry),
        ],
        all_pass: report.all_pass,
    }
}

fn degree_bounds_doc(system: &KzSystem) -> Result<DegreeBoundsDoc, String> {
    let db = kzsystem::degree_bounds(system).map_err(|e| e.to_string())?;
    let spectrum = db
        .spectrum
        .integer_roots
        .iter()
        .map(|(root, mult)| {
            let v: i64 = root.try_into().map_err(|_| "eigenvalue out of i64 range")?;
            Ok((v, *mult))
        })
        .collect::<Result<Vec<_>, String>>()?;
    Ok(DegreeBoundsDoc {
        integer_spectrum: spectrum,
        all_integer: db.all_integer,
        m_t: db.m_t,
        big_m_t: db.big_m_t,
        deg_q1: db.deg_q1,
        deg_q2: db.deg_q2,
    })
}

fn betas_doc(system: &KzSystem) -> Result<Vec<String>, String> {
    (1..=system.pole_count())
        .map(|k| {
            kzsystem::beta(system, k)
                .map(|b| format_rat(&b))
                .map_err(|e| e.to_string())
        })
        .collect()
}

fn print_conditions(doc: &ConditionsDoc) {
    println!("conditions:");
    for e in &doc.entries {
        match &e.witness {
            Some(w) => println!("  {:<16} {}  witness (1-based residue indices): {w:?}", e.name, e.status),
            None => println!("  {:<16} {}", e.name, e.status),
        }
    }
    println!("  all pass: {}", doc.all_pass);
}

fn print_degree_bounds(doc: &DegreeBoundsDoc) {
    println!("degree bounds (from the integer spectrum of rho*T):");
    println!("  integer spectrum: {:?}", doc.integer_spectrum);
    println!("  all integer: {}", doc.all_integer);
    println!(
        "  m_T = {:?}, M_T = {:?}, deg Q1 = {:?}, deg Q2 = {:?}",
        doc.m_t, doc.big_m_t, doc.deg_q1, doc.deg_q2
    );
}

fn print_notes(notes: &[String]) {
    for n in notes {
        println!("note: {n}");
    }
}

fn cmd_check(input: &PathBuf, json: bool) -> Result<u8, String> {
    let (_, system) = read_system(input)?;
    let mut report = ReportDocument::new("check");
    report.conditions = Some(conditions_doc(&system));
    report.degree_bounds = Some(degree_bounds_doc(&system)?);
    report.betas = Some(betas_doc(&system)?);
    report.notes = NOTES.iter().map(|s| s.to_string()).collect();

    let all_pass = report.conditions.as_ref().unwrap().all_pass;
    if json {
        write_json(&report, None)?;
    } else {
        print_conditions(report.conditions.as_ref().unwrap());
        print_degree_bounds(report.degree_bounds.as_ref().unwrap());
        println!("beta values: {:?}", report.betas.as_ref().unwrap());
        print_notes(&report.notes);
    }
    Ok(if all_pass { 0 } else { 1 })
}

fn certificate_doc(cert: &ratfunc::VerificationRecord) -> CertificateDoc {
    CertificateDoc {
        residual_zero: cert.residual_zero,
        pointwise_residual_ok: cert.pointwise_residual_ok,
        det_evidence: cert
            .det_evidence
            .iter()
            .map(|(z, d)| (format_rat(z), format_rat(d)))
            .collect(),
        det_nonzero: cert.det_nonzero,
        nullity_at_points: cert.nullity_at_points.clone(),
        poly_degree: cert.poly_degree,
        pole_orders: cert
            .pole_orders
            .iter()
            .map(|(z, o)| (format_rat(z), *o))
            .collect(),
        expected_deg_q1: cert.expected_deg_q1,
        expected_deg_q2: cert.expected_deg_q2,
        poly_degree_matches_bound: cert.poly_degree_matches_bound,
    }
}

fn print_certificate(doc: &CertificateDoc) {
    println!("verification certificate:");
    println!("  residual identically zero: {}", doc.residual_zero);
    println!("  pointwise residual check:  {}", doc.pointwise_residual_ok);
    println!("  det evidence: {:?}", doc.det_evidence);
    println!("  det nonzero: {}", doc.det_nonzero);
    println!("  nullity at sample points: {:?}", doc.nullity_at_points);
    println!(
        "  poly degree {:?} vs bound deg Q1 = {:?} (match: {}), deg Q2 bound = {:?}",
        doc.poly_degree, doc.expected_deg_q1, doc.poly_degree_matches_bound, doc.expected_deg_q2
    );
    println!("  pole orders: {:?}", doc.pole_orders);
}

fn cmd_solve(
    input: &PathBuf,
    max_pole_order: usize,
    max_poly_degree: Option<i64>,
    emit_solution: Option<PathBuf>,
    adjoint: Option<PathBuf>,
    seed: u64,
    json: bool,
) -> Result<u8, String> {
    let (_, system) = read_system(input)?;
    if system.rho().abs() > 1 {
        eprintln!(
            "warning: |rho| = {} > 1 is exploratory; a negative search result is inconclusive",
            system.rho().abs()
        );
    }

    let outcome = ratfunc::solve_rational(&system, max_pole_order, max_poly_degree, seed)
        .map_err(|e| e.to_string())?;

    let mut solve = SolveDoc {
        status: match outcome.status {
            SolveStatus::Found => "found",
            SolveStatus::NotFound => "not-found",
            SolveStatus::ConditionsUnknown => "conditions-unknown",
        }
        .to_string(),
        kernel_dimension: outcome.kernel_dimension,
        reason: outcome.reason.clone(),
        max_pole_order: outcome.bounds.max_pole_order,
        max_poly_degree: outcome.bounds.max_poly_degree,
        capped: outcome.bounds.capped,
        poly_degree: None,
        adjoint_poly_degree: None,
        certificate: outcome.certificate.as_ref().map(certificate_doc),
    };

    let mut ok = outcome.status == SolveStatus::Found
        && outcome
            .certificate
            .as_ref()
            .map(|c| c.residual_zero && c.det_nonzero)
            .unwrap_or(false);

    let mut y_func: Option<RatMatFunc> = None;
    if let Some(w) = &outcome.w {
        solve.poly_degree = w.poly_degree();
        if let Some(path) = &emit_solution {
            write_json(&SolutionDocument::from_func(w, "fundamental"), Some(path))?;
        }
        if adjoint.is_some() {
            match ratfunc::adjoint_solution(&system, w, seed) {
                Ok(y) => {
                    solve.adjoint_poly_degree = y.poly_degree();
                    write_json(
                        &SolutionDocument::from_func(&y, "adjoint"),
                        adjoint.as_ref(),
                    )?;
                    y_func = Some(y);
                }
                Err(e) => {
                    solve.reason = Some(format!("adjoint construction failed: {e}"));
                    ok = false;
                }
            }
        }
    } else if adjoint.is_some() {
        ok = false;
    }

    let mut report = ReportDocument::new("solve");
    report.conditions = Some(conditions_doc(&system));
    report.degree_bounds = Some(degree_bounds_doc(&system)?);
    report.solve = Some(solve);
    report.notes = NOTES.iter().map(|s| s.to_string()).collect();

    if json {
        write_json(&report, None)?;
    } else {
        let s = report.solve.as_ref().unwrap();
        println!(
            "solve: {} (kernel dimension {}, pole order <= {}, poly degree {:?}{})",
            s.status,
            s.kernel_dimension,
            s.max_pole_order,
            s.max_poly_degree,
            if s.capped { ", capped bounds" } else { "" }
        );
        if let Some(r) = &s.reason {
            println!("reason: {r}");
        }
        if let Some(d) = s.poly_degree {
            println!("W polynomial degree: {d}");
        }
        if let Some(d) = s.adjoint_poly_degree {
            println!("Y polynomial degree: {d}");
        }
        if let Some(c) = &s.certificate {
            print_certificate(c);
        }
        if y_func.is_some() {
            println!("adjoint written (normalized so W*Y = I)");
        }
        print_notes(&report.notes);
    }
    Ok(if ok { 0 } else { 1 })
}

fn cmd_verify(
    system_path: &PathBuf,
    solution_path: &PathBuf,
    seed: u64,
    json: bool,
) -> Result<u8, String> {
    let (_, system) = read_system(system_path)?;
    let text = fs::read_to_string(solution_path)
        .map_err(|e| format!("{}: {e}", solution_path.display()))?;
    let sol_doc: SolutionDocument =
        serde_json::from_str(&text).map_err(|e| format!("{}: {e}", solution_path.display()))?;
    let w = sol_doc
        .to_func()
        .map_err(|e| format!("{}: {e}", solution_path.display()))?;
    if w.rows() != system.dim() || w.cols() != system.dim() {
        return Err(format!(
            "dimension mismatch: solution is {}x{}, system is {0}x{0}",
            w.rows(),
            system.dim()
        ));
    }

    let cert = ratfunc::verify(&system, &w, seed).map_err(|e| e.to_string())?;
    let ok = cert.residual_zero && cert.pointwise_residual_ok && cert.det_nonzero;

    let mut report = ReportDocument::new("verify");
    report.verify = Some(certificate_doc(&cert));
    if json {
        write_json(&report, None)?;
    } else {
        print_certificate(report.verify.as_ref().unwrap());
        println!("verdict: {}", if ok { "pass" } else { "FAIL" });
    }
    Ok(if ok { 0 } else { 1 })
}

fn cmd_local(input: &PathBuf, json: bool) -> Result<u8, String> {
    let (_, system) = read_system(input)?;
    let mut locals = Vec::new();
    let mut all_ok = true;
    for k in 1..=system.pole_count() {
        let pole = format_rat(system.pole(k).map_err(|e| e.to_string())?);
        let beta = kzsystem::beta(&system, k).map(|b| format_rat(&b)).map_err(|e| e.to_string())?;
        let eff = system.effective_residue(k).map_err(|e| e.to_string())?;
        let mut doc = LocalDoc {
            k,
            pole,
            beta,
            m: None,
            big_m: None,
            seeds: None,
            product_invariant: None,
            error: None,
        };
        match frobenius::exponent_bounds(&eff) {
            Ok((m, big_m)) => {
                doc.m = Some(m);
                doc.big_m = Some(big_m);
            }
            Err(e) => {
                doc.error = Some(e.to_string());
                all_ok = false;
                locals.push(doc);
                continue;
            }
        }
        match frobenius::canonical_seeds(&system, k) {
            Ok(seeds) => {
                doc.seeds = Some(SeedsDoc {
                    branch: match seeds.branch {
                        frobenius::SeedBranch::BetaZero => "beta-zero",
                        frobenius::SeedBranch::BetaNonzero => "beta-nonzero",
                    }
                    .to_string(),
                    b: seeds.b.iter().map(matrix_to_rows).collect(),
                    c: seeds.c.iter().map(matrix_to_rows).collect(),
                });
                match frobenius::product_invariant(&system, k) {
                    Ok(prod) => doc.product_invariant = Some(matrix_to_rows(&prod)),
                    Err(e) => {
                        doc.error = Some(e.to_string());
                        all_ok = false;
                    }
                }
            }
            Err(e) => {
                doc.error = Some(e.to_string());
                all_ok = false;
            }
        }
        locals.push(doc);
    }

    let mut report = ReportDocument::new("local");
    report.betas = Some(betas_doc(&system)?);
    report.local = Some(locals);
    report.notes = NOTES.iter().map(|s| s.to_string()).collect();

    if json {
        write_json(&report, None)?;
    } else {
        for l in report.local.as_ref().unwrap() {
            println!(
                "pole {} (k={}): beta = {}, exponents m = {:?}, M = {:?}",
                l.pole, l.k, l.beta, l.m, l.big_m
            );
            if let Some(s) = &l.seeds {
                println!("  seed branch: {}", s.branch);
                println!("  b(-1), b0, b1: {:?}", s.b);
                println!("  c(-1), c0, c1: {:?}", s.c);
            }
            if let Some(p) = &l.product_invariant {
                println!("  product invariant: {p:?}");
            }
            if let Some(e) = &l.error {
                println!("  error: {e}");
            }
        }
        print_notes(&report.notes);
    }
    Ok(if all_ok { 0 } else { 1 })
}
