use feller_lab::{catalog, config, emit_plot_data, run_experiment, RunConfig, VerificationReport};
use std::path::PathBuf;
use std::process::ExitCode;

const USAGE: &str = "\
feller-lab — boundary-trace verification experiments

USAGE:
    feller-lab list [FILTER]
    feller-lab defaults
    feller-lab run <NAME|all> [--config FILE] [--seed N] [--out DIR] [--emit-csv] [--parallel]
    feller-lab plot <REPORT.json> [--out DIR]

Experiments run sequentially unless --parallel is given; each writes
<out>/<name>-<seed>.json. Exit code is 0 only when every executed
experiment passes. The default output directory is `reports` or
$FELLER_LAB_OUT.";

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    match dispatch(&args) {
        Ok(all_pass) => {
            if all_pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(args: &[String]) -> Result<bool, String> {
    match args.first().map(String::as_str) {
        None | Some("help") | Some("--help") | Some("-h") => {
            println!("{USAGE}");
            Ok(true)
        }
        Some("list") => {
            let filter = args.get(1).map(String::as_str).unwrap_or("");
            for spec in catalog() {
                if filter.is_empty()
                    || spec.name.contains(filter)
                    || spec.geometry.contains(filter)
                    || spec.route.as_str().contains(filter)
                {
                    println!("{:<24} [{}/{}] {}", spec.name, spec.geometry, spec.route.as_str(), spec.identity);
                }
            }
            Ok(true)
        }
        Some("defaults") => {
            for (k, v) in config::default_lines() {
                println!("{k} = {v}");
            }
            Ok(true)
        }
        Some("run") => run_cmd(&args[1..]),
        Some("plot") => plot_cmd(&args[1..]),
        Some(other) => Err(format!("unknown subcommand `{other}`\n{USAGE}")),
    }
}

fn run_cmd(args: &[String]) -> Result<bool, String> {
    let mut target: Option<String> = None;
    let mut cfg = RunConfig::new();
    let mut config_file: Option<PathBuf> = None;
    let mut overrides: Vec<(String, String)> = Vec::new();
    let mut out_flag: Option<String> = None;
    let mut parallel = false;

    let mut it = args.iter();
    while let Some(arg) = it.next() {
        match arg.as_str() {
            "--config" => {
                let v = it.next().ok_or("--config needs a file")?;
                config_file = Some(PathBuf::from(v));
            }
            "--seed" => {
                let v = it.next().ok_or("--seed needs a value")?;
                v.parse::<u64>().map_err(|_| format!("bad seed `{v}`"))?;
                overrides.push(("seed".into(), v.clone()));
            }
            "--out" => {
                let v = it.next().ok_or("--out needs a directory")?;
                out_flag = Some(v.clone());
            }
            "--emit-csv" => overrides.push(("emit_csv".into(), "true".into())),
            "--parallel" => parallel = true,
            other if other.starts_with("--") => return Err(format!("unknown flag `{other}`")),
            other => {
                if target.is_some() {
                    return Err(format!("unexpected extra argument `{other}`"));
                }
                target = Some(other.to_string());
            }
        }
    }
    let target = target.ok_or("run needs an experiment name or `all`")?;

    // validate the target before producing any output
    let names: Vec<&'static str> = catalog().iter().map(|s| s.name).collect();
    let selected: Vec<String> = if target == "all" {
        names.iter().map(|s| s.to_string()).collect()
    } else if names.contains(&target.as_str()) {
        vec![target]
    } else {
        return Err(format!("unknown experiment `{target}` (try `feller-lab list`)"));
    };

    if let Some(path) = config_file {
        cfg = RunConfig::from_file(&path).map_err(|e| e.to_string())?;
    }
    for (k, v) in overrides {
        cfg.set(&k, &v);
    }
    if let Some(out) = out_flag {
        cfg.set("out_dir", &out);
    }
    let out_dir = PathBuf::from(cfg.out_dir());
    std::fs::create_dir_all(&out_dir).map_err(|e| format!("cannot create {out_dir:?}: {e}"))?;

    let reports: Vec<Result<feller_lab::VerificationReport, String>> = if parallel {
        // each experiment is internally parallel already; this only overlaps
        // the deterministic ones with the samplers
        std::thread::scope(|scope| {
            let handles: Vec<_> = selected
                .iter()
                .map(|name| {
                    let cfg = &cfg;
                    let out_dir = &out_dir;
                    scope.spawn(move || {
                        run_experiment(name, cfg, Some(out_dir)).map_err(|e| e.to_string())
                    })
                })
                .collect();
            handles.into_iter().map(|h| h.join().unwrap()).collect()
        })
    } else {
        selected
            .iter()
            .map(|name| run_experiment(name, &cfg, Some(&out_dir)).map_err(|e| e.to_string()))
            .collect()
    };

    let mut all_pass = true;
    for report in reports {
        let report = report?;
        for line in report.console_lines() {
            println!("{line}");
        }
        let path = out_dir.join(format!("{}-{}.json", report.experiment, report.seed));
        std::fs::write(&path, report.to_json().map_err(|e| e.to_string())?)
            .map_err(|e| format!("cannot write {path:?}: {e}"))?;
        println!("  report: {}", path.display());
        all_pass &= report.pass;
    }
    Ok(all_pass)
}

fn plot_cmd(args: &[String]) -> Result<bool, String> {
    let mut report_path: Option<PathBuf> = None;
    let mut out: Option<PathBuf> = None;
    let mut it = args.iter();
    while let Some(arg) = it.next() {
        match arg.as_str() {
            "--out" => out = Some(PathBuf::from(it.next().ok_or("--out needs a directory")?)),
            other if other.starts_with("--") => return Err(format!("unknown flag `{other}`")),
            other => report_path = Some(PathBuf::from(other)),
        }
    }
    let report_path = report_path.ok_or("plot needs a report JSON path")?;
    let text = std::fs::read_to_string(&report_path)
        .map_err(|e| format!("cannot read {report_path:?}: {e}"))?;
    let report = VerificationReport::from_json(&text).map_err(|e| e.to_string())?;
    let out_dir = out.unwrap_or_else(|| {
        report_path.parent().map(PathBuf::from).unwrap_or_else(|| PathBuf::from("."))
    });
    let files = emit_plot_data(&report, &out_dir).map_err(|e| e.to_string())?;
    for f in files {
        println!("wrote {}", f.display());
    }
    Ok(true)
}
