use std::fs;
use std::path::{Path, PathBuf};

use feo_core::fixtures;
use feo_core::inference::feo_table;
use feo_core::learning::{ingest_csv, Schema, StructureDoc};
use feo_core::network::{Network, NetworkDoc};
use feo_core::roles::{scenario_from_docs, FeoScenario, RolesDoc};
use feo_core::sampler::{export_sample, manifest_path, SampleRequest};
use feo_core::solver::{
    add_feasibility_constraints, build_feo_system, parse_constraints, solve_scenario, MarginalConstraint,
    ParameterIndex, SolveMode,
};
use serde_json::{json, Value};

use crate::args::{BundleArgs, Cli, Command, FixtureCommand, LearnArgs, ReportArgs, SampleArgs, SolveArgs};
use crate::error::{diagnostic, CliError};

pub fn run(cli: Cli) -> Result<(), CliError> {
    let out = Output { json: cli.json };
    match cli.command {
        Command::Validate(args) => validate(&out, &args),
        Command::Learn(args) => learn(&out, &args),
        Command::Solve(args) => solve(&out, &args),
        Command::Report(args) => report(&out, &args),
        Command::Sample(args) => sample(&out, &args),
        Command::Fixture(FixtureCommand::List) => list_fixtures(&out),
        Command::Fixture(FixtureCommand::Export { name, dir }) => export_fixture(&out, &name, &dir),
    }
}

struct Output {
    json: bool,
}

impl Output {
    /// Prints either the JSON value or the human lines.
    fn emit(&self, value: Value, human: impl FnOnce() -> Vec<String>) {
        if self.json {
            println!("{}", serde_json::to_string_pretty(&value).expect("summary serializes"));
        } else {
            for line in human() {
                println!("{line}");
            }
        }
    }

    fn warn(&self, kind: &str, message: &str) {
        diagnostic(self.json, "warn", kind, message);
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::read(path, e))
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::write(dir, e))?;
    }
    fs::write(path, text).map_err(|e| CliError::write(path, e))
}

/// Parses a network document, reporting every validation issue at once.
fn load_network(path: &Path) -> Result<Network, CliError> {
    let doc = NetworkDoc::from_json(&read(path)?)?;
    let report = doc.validate();
    if let Some(first) = report.issues.first() {
        let related = report.issues[1..].iter().map(|e| (e.kind().to_string(), e.to_string())).collect();
        return Err(CliError::input(first.kind(), first.to_string()).with_related(related));
    }
    Ok(Network::from_doc(&doc)?)
}

struct Bundle {
    network: Network,
    roles: Option<RolesDoc>,
    constraints: Vec<MarginalConstraint>,
}

impl Bundle {
    fn load(args: &BundleArgs) -> Result<Self, CliError> {
        let (network, roles, mut constraints) = match (&args.fixture, &args.network) {
            (Some(name), _) => {
                let f = fixtures::get(name)?;
                (f.network()?, Some(f.roles()), f.constraints())
            }
            (None, Some(path)) => {
                let roles = args.roles.as_deref().map(|p| read(p).and_then(|t| Ok(RolesDoc::from_json(&t)?))).transpose()?;
                (load_network(path)?, roles, Vec::new())
            }
            (None, None) => return Err(CliError::input("Usage", "give either --fixture or --network")),
        };
        if let Some(path) = &args.constraints {
            constraints = parse_constraints(&read(path)?)?;
        }
        Ok(Self { network, roles, constraints })
    }

    fn scenario(&self) -> Result<FeoScenario, CliError> {
        let roles = self.roles.as_ref().ok_or_else(|| CliError::input("Usage", "this command needs --roles"))?;
        Ok(scenario_from_docs(&self.network, roles)?)
    }
}

fn validate(out: &Output, args: &BundleArgs) -> Result<(), CliError> {
    let bundle = Bundle::load(args)?;
    let net = &bundle.network;
    let mut summary = json!({
        "network": { "valid": true, "variables": net.len(), "edges": net.edges().len() },
    });
    let mut lines = vec![format!("network ok: {} variables, {} edges", net.len(), net.edges().len())];
    if bundle.roles.is_some() {
        let sc = bundle.scenario()?;
        let index = ParameterIndex::enumerate(&sc)?;
        let system = build_feo_system(&sc, &index)?;
        let control = &net.variable(sc.control()).name;
        let target = &net.variable(sc.target()).name;
        summary["roles"] = json!({ "valid": true, "control": control, "target": target, "parameters": index.len() });
        lines.push(format!("roles ok: control {control}, target {target}, {} free parameters", index.len()));
        add_feasibility_constraints(&sc, system, &bundle.constraints)?;
        summary["constraints"] = json!({ "valid": true, "count": bundle.constraints.len() });
        lines.push(format!("constraints ok: {}", bundle.constraints.len()));
    } else if !bundle.constraints.is_empty() {
        return Err(CliError::input("Usage", "checking constraints needs --roles"));
    }
    out.emit(summary, || lines);
    Ok(())
}

fn learn(out: &Output, args: &LearnArgs) -> Result<(), CliError> {
    let schema = Schema::from_json(&read(&args.schema)?)?;
    let structure = StructureDoc::from_json(&read(&args.structure)?)?;
    let raw = ingest_csv(&args.data, &schema)?;
    let discretized = feo_core::learning::discretize(&raw, &schema.policy())?;
    let (network, fit) = feo_core::learning::fit_parameters(&structure, &discretized, args.smoothing)?;
    write(&args.out, &(network.to_json_pretty() + "\n"))?;
    let provenance = discretized.provenance();
    if let Some(path) = &args.provenance {
        let text = serde_json::to_string_pretty(provenance).expect("provenance serializes");
        write(path, &(text + "\n"))?;
    }
    for row in &fit.unseen {
        out.warn("UnseenParents", &format!("{} given {:?} never observed; row set to uniform", row.variable, row.given));
    }
    for w in &provenance.warnings {
        out.warn("Ingestion", w);
    }
    let variables: Vec<Value> = network
        .variables()
        .iter()
        .enumerate()
        .map(|(v, var)| {
            let parents: Vec<&str> = network.parents(v).iter().map(|&p| network.variable(p).name.as_str()).collect();
            json!({ "name": var.name, "states": var.states, "parents": parents, "rows": network.cpt(v).num_rows() })
        })
        .collect();
    let summary = json!({
        "network": args.out,
        "rows_read": provenance.rows_read,
        "rows_dropped": provenance.rows_dropped,
        "rows_used": fit.rows_used,
        "smoothing": fit.smoothing,
        "unseen_rows": fit.unseen.len(),
        "variables": variables,
    });
    out.emit(summary, || {
        let mut lines = vec![format!(
            "fitted {} variables from {} rows ({} read, {} dropped)",
            network.len(),
            fit.rows_used,
            provenance.rows_read,
            provenance.rows_dropped
        )];
        for (v, var) in network.variables().iter().enumerate() {
            lines.push(format!("  {}: {} states, {} CPT rows", var.name, var.cardinality(), network.cpt(v).num_rows()));
        }
        lines.push(format!("wrote {}", args.out.display()));
        lines
    });
    Ok(())
}

fn solve(out: &Output, args: &SolveArgs) -> Result<(), CliError> {
    let bundle = Bundle::load(&args.bundle)?;
    let sc = bundle.scenario()?;
    let outcome = solve_scenario(&sc, &bundle.constraints, SolveMode::from(args.mode))?;
    let report = outcome.report(&sc);
    let solution_path = args
        .solution
        .clone()
        .unwrap_or_else(|| args.out.parent().unwrap_or(Path::new("")).join("solution.json"));
    write(&args.out, &(outcome.network.to_json_pretty() + "\n"))?;
    write(&solution_path, &(report.to_json_pretty() + "\n"))?;
    let (pre, post) = (outcome.pre.deviation(), outcome.post.deviation());
    let summary = json!({
        "status": report.status,
        "objective": report.objective,
        "max_residual": report.max_residual,
        "pre_deviation": pre,
        "post_deviation": post,
        "active_constraints": report.active_constraints,
        "network": args.out,
        "solution": solution_path,
    });
    out.emit(summary, || {
        let mut lines = vec![
            format!("status: {}", serde_json::to_value(report.status).expect("status").as_str().unwrap_or("")),
            format!("objective: {:e}", report.objective),
            format!("deviation: {pre:.6} -> {post:.6}"),
        ];
        for c in &report.active_constraints {
            lines.push(format!("active: {c}"));
        }
        lines.push(format!("wrote {} and {}", args.out.display(), solution_path.display()));
        lines
    });
    Ok(())
}

fn report(out: &Output, args: &ReportArgs) -> Result<(), CliError> {
    let bundle = Bundle::load(&args.bundle)?;
    let sc = bundle.scenario()?;
    let pre = feo_table(&sc)?;
    let (post, status) = match &args.post {
        Some(path) => {
            let post_net = load_network(path)?;
            let roles = bundle.roles.as_ref().expect("scenario built");
            (feo_table(&scenario_from_docs(&post_net, roles)?)?, None)
        }
        None => {
            let outcome = solve_scenario(&sc, &bundle.constraints, SolveMode::from(args.mode))?;
            (outcome.post, Some(outcome.solution.status))
        }
    };
    let dir = &args.out_dir;
    let (pre_path, post_path, summary_path) = (dir.join("pre.csv"), dir.join("post.csv"), dir.join("summary.json"));
    write(&pre_path, &pre.to_csv())?;
    write(&post_path, &post.to_csv())?;
    let (pd, qd) = (pre.deviation(), post.deviation());
    let mut summary = json!({
        "target": pre.target_variable,
        "rows": pre.rows.len(),
        "pre_deviation": pd,
        "post_deviation": qd,
        "delta": qd - pd,
    });
    if let Some(s) = status {
        summary["status"] = json!(s);
    }
    write(&summary_path, &(serde_json::to_string_pretty(&summary).expect("summary") + "\n"))?;
    out.emit(summary, || {
        vec![
            format!("{} rows per table", pre.rows.len()),
            format!("deviation: {pd:.6} -> {qd:.6} (delta {:.6})", qd - pd),
            format!("wrote {}, {} and {}", pre_path.display(), post_path.display(), summary_path.display()),
        ]
    });
    Ok(())
}

fn sample(out: &Output, args: &SampleArgs) -> Result<(), CliError> {
    let network = match (&args.fixture, &args.network) {
        (Some(name), _) => fixtures::get(name)?.network()?,
        (None, Some(path)) => load_network(path)?,
        (None, None) => unreachable!("clap requires one of --network and --fixture"),
    };
    let count = usize::try_from(args.count).map_err(|_| CliError::input("Usage", "count too large"))?;
    let mut req = SampleRequest::new(count, args.seed);
    req.columns = args.columns.clone();
    if let Some(dir) = args.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::write(dir, e))?;
    }
    let manifest = export_sample(&network, &req, &args.out)?;
    let mpath = manifest_path(&args.out);
    let summary = json!({ "csv": args.out, "manifest": mpath, "records": count, "network_sha256": manifest.network_sha256 });
    out.emit(summary, || vec![format!("wrote {count} records to {} ({})", args.out.display(), mpath.display())]);
    Ok(())
}

fn list_fixtures(out: &Output) -> Result<(), CliError> {
    let infos = fixtures::list();
    out.emit(json!(infos), || {
        infos
            .iter()
            .map(|i| {
                let mut flags = Vec::new();
                if i.learned {
                    flags.push("learned");
                }
                if !i.available {
                    flags.push("data missing");
                }
                let flags = if flags.is_empty() { String::new() } else { format!(" [{}]", flags.join(", ")) };
                format!("{:<10} {}{flags}", i.name, i.description)
            })
            .collect()
    });
    Ok(())
}

fn export_fixture(out: &Output, name: &str, dir: &Path) -> Result<(), CliError> {
    let f = fixtures::get(name)?;
    let mut written: Vec<PathBuf> = Vec::new();
    let mut put = |file: &str, text: String| -> Result<(), CliError> {
        let path = dir.join(file);
        write(&path, &text)?;
        written.push(path);
        Ok(())
    };
    put("roles.json", f.roles_json().to_string())?;
    put("constraints.json", f.constraints_json().to_string())?;
    if let (Some(schema), Some(structure)) = (f.schema(), f.structure()) {
        put("schema.json", schema.to_json_pretty() + "\n")?;
        put("structure.json", structure.to_json_pretty() + "\n")?;
    }
    match f.network() {
        Ok(net) => put("network.json", net.to_json_pretty() + "\n")?,
        Err(fixtures::FixtureError::DataUnavailable { hint, .. }) => {
            out.warn("DataUnavailable", &format!("network.json not written: {hint}"));
        }
        Err(e) => return Err(e.into()),
    }
    if let Some(text) = f.raw_csv() {
        put("data.csv", text.to_string())?;
    }
    out.emit(json!({ "fixture": name, "files": written }), || {
        written.iter().map(|p| format!("wrote {}", p.display())).collect()
    });
    Ok(())
}
