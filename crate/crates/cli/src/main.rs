//! `lgck`: command-line front end for the exact LG-orbifold toolkit.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use lgck::cohft::{dual_bases, homogeneity_shift, narrow_sector_data, virdim, CohftData, FrobeniusAlgebra};
use lgck::exactalg::poly::MultiPoly;
use lgck::exactalg::rational::{fmt_rational, parse_rational, Rational};
use lgck::glsm::{GlsmError, GlsmModel};
use lgck::matfact::{chern_char, koszul_in, splitting_degree_check, todd_chern, unit_class, BundleData};
use lgck::orbifold::inertia_sectors;
use lgck::simplicial::{analyze_sheaf, sheaf_corpus, stokes_sides, th_complex, whitney_form, FinitePosetSheaf};
use lgck::statespace::{conventions, kunneth_sum, StateSpace};

#[derive(Parser)]
#[command(name = "lgck", version, about = "Exact computations for Landau–Ginzburg orbifolds and GLSMs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Write the JSON report here (default: stdout).
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Poset level bound N for the simplicial constructions.
    #[arg(long, global = true, default_value_t = 3)]
    level_bound: usize,
    /// Polynomial degree bound D for Thom–Sullivan forms (must be ≥ N).
    #[arg(long, global = true, default_value_t = 4)]
    degree_bound: usize,
    /// Largest finite group the enumeration may produce.
    #[arg(long, global = true, default_value_t = 100_000)]
    group_order_bound: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Check the model's invariance, quasi-homogeneity and isolatedness conditions.
    Validate { model: PathBuf },
    /// Describe the semistable locus of one or all stability characters.
    Phases {
        model: PathBuf,
        /// Character name from the config, or a comma-separated vector.
        #[arg(long)]
        character: Option<String>,
    },
    /// List inertia sectors with ages and fixed loci.
    Sectors { model: PathBuf },
    /// Sector dimensions and the degree histogram of the state space.
    StateSpace { model: PathBuf },
    /// Residue pairing: Gram matrices, nondegeneracy and dual bases.
    Pairing {
        model: PathBuf,
        /// Print Gram entries for sectors up to this dimension.
        #[arg(long, default_value_t = 8)]
        print_bound: usize,
    },
    /// The unit class in the sector of J.
    Unit {
        model: PathBuf,
        #[arg(long)]
        character: Option<String>,
    },
    /// Chern character and Todd–Chern class of the Euler Koszul factorization.
    Chern { model: PathBuf },
    /// Virtual dimension and homogeneity shift.
    Virdim {
        model: PathBuf,
        #[arg(long, default_value_t = 0)]
        genus: u32,
        /// `∫_d c₁`, a rational number.
        #[arg(long, default_value = "0")]
        degree: String,
        /// Comma-separated sector indices, as listed by `sectors`.
        #[arg(long, default_value = "")]
        insertions: String,
    },
    /// Check CohFT axioms on a table file, on a model's narrow sectors, or on `toy`.
    VerifyCohft { input: String },
    /// Godement resolutions, de Rham triangle and Stokes checks on poset sheaves.
    SimplicialDemo { sheaf: Option<PathBuf> },
    /// Compare the state space of a sum of singularities with the tensor product.
    Kunneth {
        first: PathBuf,
        second: PathBuf,
        #[arg(long, default_value_t = 64)]
        pairing_size_bound: usize,
    },
}

enum Failure {
    Precondition(String),
    Malformed(String),
}

type Outcome = Result<(Value, String), Failure>;

fn pre<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Precondition(e.to_string())
}

fn malformed<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Malformed(e.to_string())
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| malformed(format!("{}: {e}", path.display())))
}

fn load_model(path: &Path) -> Result<GlsmModel, Failure> {
    let text = read(path)?;
    let model = GlsmModel::from_json(&text).map_err(|e| match e {
        GlsmError::TooManyVariables(_) => pre(e),
        other => malformed(other),
    })?;
    if model.name().is_empty() {
        let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        return Ok(model.with_name(&stem));
    }
    Ok(model)
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report serializes")
}

fn envelope(command: &str, model: Option<&GlsmModel>, body: Value) -> Value {
    let mut v = json!({
        "command": command,
        "conventions": conventions(),
        "result": body,
    });
    if let Some(m) = model {
        v["model"] = json!({
            "name": m.name(),
            "variables": m.variables(),
            "potential": m.potential().to_string(),
            "fingerprint": m.fingerprint(),
        });
    }
    v
}

fn character(model: &GlsmModel, spec: &Option<String>) -> Result<Vec<Rational>, Failure> {
    match spec {
        Some(s) => model.resolve_character(s).map_err(pre),
        None => Ok(model.nu().to_vec()),
    }
}

fn validate(path: &Path) -> Outcome {
    let m = load_model(path)?;
    let report = m.validate();
    let mut summary = String::new();
    for c in &report.checks {
        let mark = if c.passed { "ok" } else if c.required { "FAILED" } else { "advisory" };
        summary.push_str(&format!("{:<28} {mark}\n", c.name));
    }
    if !report.passed() {
        let names: Vec<&str> = report.failed_required().iter().map(|c| c.name.as_str()).collect();
        return Err(Failure::Precondition(format!("{summary}failed checks: {}", names.join(", "))));
    }
    Ok((envelope("validate", Some(&m), to_value(&report)), summary))
}

fn phases(path: &Path, spec: &Option<String>) -> Outcome {
    let m = load_model(path)?;
    let mut chars: BTreeMap<String, Vec<Rational>> = BTreeMap::new();
    match spec {
        Some(s) => {
            chars.insert(s.clone(), m.resolve_character(s).map_err(pre)?);
        }
        None => {
            chars.insert("nu".into(), m.nu().to_vec());
            for name in ["nu_plus", "nu_minus"] {
                if let Ok(c) = m.resolve_character(name) {
                    chars.insert(name.into(), c);
                }
            }
        }
    }
    let mut out = BTreeMap::new();
    let mut summary = String::new();
    for (name, theta) in &chars {
        let phase = m.semistable_locus(theta).map_err(pre)?;
        let dagger = if m.torus_rank() > 0 && m.r_subgroup().is_some() {
            Some(m.check_dagger(theta).map_err(pre)?)
        } else {
            None
        };
        summary.push_str(&format!("{name}: {}\n", phase.description));
        if let Some(d) = &dagger {
            summary.push_str(&format!("  (†) {}\n", if d.holds { "holds" } else { "fails" }));
        }
        out.insert(name.clone(), json!({ "phase": phase, "dagger": dagger }));
    }
    Ok((envelope("phases", Some(&m), to_value(&out)), summary))
}

fn sectors(path: &Path, bound: usize) -> Outcome {
    let m = load_model(path)?;
    let secs = inertia_sectors(&m, bound).map_err(pre)?;
    let records: Vec<_> = secs.iter().map(|s| s.record(m.variables())).collect();
    let mut summary = String::new();
    for (i, r) in records.iter().enumerate() {
        summary.push_str(&format!(
            "[{i}] ({}) age {} {}\n",
            r.element.join(", "),
            r.age,
            if r.narrow { "narrow".to_string() } else { format!("broad on {}", r.fixed_support.join(",")) }
        ));
    }
    Ok((envelope("sectors", Some(&m), to_value(&records)), summary))
}

fn load_valid(path: &Path) -> Result<GlsmModel, Failure> {
    let m = load_model(path)?;
    let report = m.validate();
    if !report.passed() {
        let names: Vec<&str> = report.failed_required().iter().map(|c| c.name.as_str()).collect();
        return Err(Failure::Precondition(format!("{}: failed checks: {}", path.display(), names.join(", "))));
    }
    Ok(m)
}

fn state(path: &Path, bound: usize) -> Result<(GlsmModel, StateSpace), Failure> {
    let m = load_valid(path)?;
    let s = StateSpace::new(&m, bound).map_err(pre)?;
    Ok((m, s))
}

fn state_space(path: &Path, bound: usize) -> Outcome {
    let (m, s) = state(path, bound)?;
    let report = s.report();
    let summary = format!(
        "|G| = {}, ĉ = {}, dim 𝓗 = {}\nsector dimensions: {:?}\ndegree histogram: {:?}\n",
        report.group_order, report.c_hat, report.total_dimension, report.sector_dimensions, report.degree_histogram
    );
    Ok((envelope("state-space", Some(&m), to_value(&report)), summary))
}

fn pairing(path: &Path, bound: usize, print_bound: usize) -> Outcome {
    let (m, s) = state(path, bound)?;
    s.check_nondegenerate().map_err(pre)?;
    let duals = dual_bases(&s).map_err(pre)?;
    let mut rows = Vec::new();
    for d in &duals {
        let g = s.gram(d.sector);
        let entries = (g.rows() <= print_bound).then(|| {
            (0..g.rows())
                .map(|i| (0..g.cols()).map(|j| g[(i, j)].to_string()).collect::<Vec<_>>())
                .collect::<Vec<_>>()
        });
        rows.push(json!({
            "sector": s.group()[d.sector].to_strings(),
            "partner": s.group()[d.partner].to_strings(),
            "dimension": g.rows(),
            "rank": g.rank(),
            "gram": entries,
            "casimir": true,
        }));
    }
    let summary = format!("{} sectors, all Gram matrices nonsingular, dual bases verified\n", duals.len());
    Ok((envelope("pairing", Some(&m), Value::Array(rows)), summary))
}

fn unit(path: &Path, spec: &Option<String>) -> Outcome {
    let m = load_valid(path)?;
    let theta = character(&m, spec)?;
    let u = unit_class(&m, &theta).map_err(pre)?;
    let body = json!({
        "sector": u.sector.to_strings(),
        "moving_variables": u.moving_vars,
        "class": u.class.jac_class.to_string(),
        "twist": fmt_rational(&u.class.twist),
        "coefficients": u.coefficients.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
        "degree": fmt_rational(&u.degree),
    });
    let summary = format!("𝟙 in sector ({}): {}\n", u.sector.to_strings().join(", "), u.class);
    Ok((envelope("unit", Some(&m), body), summary))
}

fn chern(path: &Path) -> Outcome {
    let m = load_valid(path)?;
    if m.n_vars() > 5 {
        return Err(Failure::Precondition(format!("Koszul rank 2^{} is beyond the supported size", m.n_vars())));
    }
    // Euler splitting w = Σ (c_i/d_w) x_i ∂_i w
    let w = m.potential();
    let ring = m.ring().clone();
    let dw = m.d_w_rational();
    let tau: Vec<MultiPoly> = (0..m.n_vars())
        .map(|i| w.derivative(i).scale(&(&m.r_charges()[i] / &dw).into()))
        .collect();
    let sigma: Vec<MultiPoly> = (0..m.n_vars()).map(|i| MultiPoly::var(ring.clone(), i)).collect();
    let f = koszul_in(ring, &tau, &sigma).map_err(pre)?;
    if f.potential() != w {
        return Err(Failure::Precondition("charges do not give an Euler splitting of w".into()));
    }
    let ch = chern_char(&f).map_err(pre)?;
    let td = todd_chern(&f, &BundleData::trivial(m.n_vars())).map_err(pre)?;
    let split = splitting_degree_check(&f).map_err(pre)?;
    let body = json!({
        "rank": f.rank(),
        "chern_character": {"class": ch.jac_class.to_string(), "twist": fmt_rational(&ch.twist)},
        "todd_chern": {"class": td.jac_class.to_string(), "twist": fmt_rational(&td.twist)},
        "splitting_degree_bound": split,
    });
    let summary = format!("ch = {ch}\ntdch = {td}\n");
    Ok((envelope("chern", Some(&m), body), summary))
}

fn virdim_cmd(path: &Path, bound: usize, genus: u32, degree: &str, insertions: &str) -> Outcome {
    let m = load_model(path)?;
    let d = parse_rational(degree).ok_or_else(|| malformed(format!("not a rational number: {degree:?}")))?;
    let secs = inertia_sectors(&m, bound).map_err(pre)?;
    let mut hs = Vec::new();
    for tok in insertions.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let i: usize = tok.parse().map_err(|_| malformed(format!("bad sector index {tok:?}")))?;
        let s = secs
            .get(i)
            .ok_or_else(|| Failure::Precondition(format!("sector index {i} out of range ({} sectors)", secs.len())))?;
        hs.push(s.element.clone());
    }
    let v = virdim(&m, genus, hs.len() as u32, &d, &hs);
    let shift = homogeneity_shift(&m, genus, &d);
    let body = json!({
        "genus": genus,
        "marked_points": hs.len(),
        "degree": fmt_rational(&d),
        "insertions": hs.iter().map(|h| h.to_strings()).collect::<Vec<_>>(),
        "virtual_dimension": fmt_rational(&v),
        "homogeneity_shift": fmt_rational(&shift),
    });
    let summary = format!("virdim = {}, homogeneity shift = {}\n", fmt_rational(&v), fmt_rational(&shift));
    Ok((envelope("virdim", Some(&m), body), summary))
}

fn verify_cohft(input: &str, bound: usize) -> Outcome {
    let (data, model) = if input == "toy" {
        (FrobeniusAlgebra::toy().cohft_data().map_err(pre)?, None)
    } else {
        let path = Path::new(input);
        let text = read(path)?;
        let v: Value = serde_json::from_str(&text).map_err(malformed)?;
        if v.get("basis").is_some() {
            (CohftData::from_json(&text).map_err(malformed)?, None)
        } else {
            let (m, s) = state(path, bound)?;
            let u = unit_class(&m, m.nu()).map_err(pre)?;
            (narrow_sector_data(&s, &u.coefficients).map_err(pre)?, Some(m))
        }
    };
    let mut body = BTreeMap::new();
    let mut summary = String::new();
    let mut all = true;
    for (name, r) in data.check_all() {
        match r {
            Ok(r) => {
                let f = r.failures().len();
                all &= f == 0;
                summary.push_str(&format!("{name:<18} {} ({} entries, {f} failures)\n", if f == 0 { "PASS" } else { "FAIL" }, r.entries.len()));
                body.insert(name, to_value(&r));
            }
            Err(e) => {
                summary.push_str(&format!("{name:<18} skipped: {e}\n"));
                body.insert(name, json!({ "skipped": e.to_string() }));
            }
        }
    }
    let out = envelope("verify-cohft", model.as_ref(), json!({ "checks": body, "passed": all }));
    if !all {
        return Err(Failure::Precondition(format!("{summary}CohFT axioms fail\n{}", serde_json::to_string_pretty(&out).unwrap())));
    }
    Ok((out, summary))
}

fn simplicial_demo(sheaf: &Option<PathBuf>, level: usize, degree: usize) -> Outcome {
    if degree < level {
        return Err(Failure::Precondition(format!("degree bound {degree} is below the level bound {level}")));
    }
    let sheaves = match sheaf {
        Some(p) => vec![(
            p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default(),
            FinitePosetSheaf::from_json(&read(p)?).map_err(malformed)?,
        )],
        None => sheaf_corpus(),
    };
    let mut reports = Vec::new();
    let mut summary = String::new();
    for (name, f) in &sheaves {
        let rep = analyze_sheaf(name, f, level).map_err(pre)?;
        let (a, _) = f.godement(f.whole_space(), level).map_err(pre)?;
        let th = th_complex(&a, degree).map_err(pre)?;
        summary.push_str(&format!(
            "{name}: H* = {:?}, flasque {:?}, triangle {}\n",
            rep.global_cohomology,
            rep.flasque_levels,
            if rep.passed() { "commutes" } else { "FAILS" }
        ));
        reports.push(json!({ "report": rep, "th_span_dims": th.dims(), "passed": rep.passed() }));
    }
    // Stokes on Whitney forms of every face of Δ^n
    let mut stokes = Vec::new();
    for n in 1..=level.max(1) {
        for mask in 1u32..(1 << (n + 1)) {
            if mask.count_ones() as usize != n {
                continue;
            }
            let idx: Vec<usize> = (0..=n).filter(|i| mask & (1 << i) != 0).collect();
            let (l, r) = stokes_sides(&whitney_form(&idx, n)).map_err(pre)?;
            stokes.push(json!({ "n": n, "indices": idx, "lhs": fmt_rational(&l), "rhs": fmt_rational(&r), "pass": l == r }));
        }
    }
    let ok = reports.iter().all(|r| r["passed"] == json!(true)) && stokes.iter().all(|s| s["pass"] == json!(true));
    summary.push_str(&format!("Stokes on {} Whitney forms: {}\n", stokes.len(), if ok { "ok" } else { "FAILED" }));
    let body = json!({
        "level_bound": level,
        "degree_bound": degree,
        "sheaves": reports,
        "stokes": stokes,
        "passed": ok,
    });
    if !ok {
        return Err(Failure::Precondition(summary));
    }
    Ok((envelope("simplicial-demo", None, body), summary))
}

fn kunneth(first: &Path, second: &Path, bound: usize, pairing_bound: usize) -> Outcome {
    let m1 = load_valid(first)?;
    let m2 = load_valid(second)?;
    let w = kunneth_sum(&m1, &m2, bound, pairing_bound).map_err(pre)?;
    let body = json!({
        "sum_potential": w.sum_model.potential().to_string(),
        "total_dimension": w.state.total_dim(),
        "isomorphism": w.is_isomorphism(),
        "entries": w.entries,
    });
    let summary = format!(
        "dim 𝓗(w₁ ⊞ w₂) = {}; Künneth {}\n",
        w.state.total_dim(),
        if w.is_isomorphism() { "holds" } else { "FAILS" }
    );
    if !w.is_isomorphism() {
        return Err(Failure::Precondition(summary));
    }
    Ok((envelope("kunneth", None, body), summary))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let bound = cli.group_order_bound;
    if bound == 0 || cli.level_bound == 0 {
        eprintln!("bounds must be positive");
        return ExitCode::from(2);
    }
    let outcome = match &cli.command {
        Command::Validate { model } => validate(model),
        Command::Phases { model, character } => phases(model, character),
        Command::Sectors { model } => sectors(model, bound),
        Command::StateSpace { model } => state_space(model, bound),
        Command::Pairing { model, print_bound } => pairing(model, bound, *print_bound),
        Command::Unit { model, character } => unit(model, character),
        Command::Chern { model } => chern(model),
        Command::Virdim {
            model,
            genus,
            degree,
            insertions,
        } => virdim_cmd(model, bound, *genus, degree, insertions),
        Command::VerifyCohft { input } => verify_cohft(input, bound),
        Command::SimplicialDemo { sheaf } => simplicial_demo(sheaf, cli.level_bound, cli.degree_bound),
        Command::Kunneth {
            first,
            second,
            pairing_size_bound,
        } => kunneth(first, second, bound, *pairing_size_bound),
    };
    match outcome {
        Ok((report, summary)) => {
            let text = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
            match &cli.output {
                Some(path) => {
                    if let Err(e) = std::fs::write(path, text) {
                        eprintln!("cannot write {}: {e}", path.display());
                        return ExitCode::from(2);
                    }
                    print!("{summary}");
                }
                None => {
                    print!("{text}");
                    eprint!("{summary}");
                }
            }
            ExitCode::SUCCESS
        }
        Err(Failure::Precondition(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Malformed(msg)) => {
            eprintln!("malformed input: {msg}");
            ExitCode::from(2)
        }
    }
}
