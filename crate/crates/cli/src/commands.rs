use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{Context, Result};
use serde::Serialize;

use bellcert::events::format::{write_events, EventFormat};
use bellcert::fixtures::{find_run, PublishedRun, PUBLISHED_RUNS};
use bellcert::lhv::{
    validate_bound, DeterministicStrategy, HeraldConditioned, LossReactive, OutcomeModel,
    SettingSource, Simulator,
};
use bellcert::nosignaling::analyze_nosignaling;
use bellcert::pvalues::{pvalue_game, pvalue_martingale, Predictability};
use bellcert::qrng::{
    bias, predictability_budget, read_bits_path, scc_range, serial_test, windowed_evolution,
    write_bits, xor_reduction, BitFormat, BitStream, PredictabilityBudget, WindowStatistic,
};
use bellcert::report::{analyze as analyze_manifest, render, ReportFormat, RunManifest};
use bellcert::spacetime::{render_report, SpacetimeConfig};
use bellcert::Error;

use crate::{
    AnalyzeArgs, FixturesArgs, ModelArg, NosignalArgs, OutputFormat, PvalueArgs, QrngCommand,
    SimulateArgs, SpacetimeCommand, StatArg, WindowStatArg, EXIT_CHECK_FAILED,
};

fn json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).context("serializing output")?;
    s.push('\n');
    Ok(s)
}

fn emit(text: &str, output: Option<&Path>) -> Result<()> {
    match output {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
        None => io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn event_format(arg: Option<&str>) -> Result<Option<EventFormat>> {
    Ok(arg.map(str::parse).transpose()?)
}

fn bit_format(arg: Option<&str>) -> Result<Option<BitFormat>> {
    Ok(arg.map(str::parse).transpose()?)
}

pub fn analyze(args: AnalyzeArgs) -> Result<ExitCode> {
    let mut manifest = match (&args.manifest, &args.events) {
        (Some(path), _) => RunManifest::read(path)
            .with_context(|| format!("reading manifest {}", path.display()))?,
        (None, Some(events)) => {
            let id = events
                .file_stem()
                .and_then(|s| s.to_str())
                .unwrap_or("run")
                .to_string();
            RunManifest::new(id, PathBuf::new())
        }
        (None, None) => {
            return Err(Error::Validation("give a manifest or --events".into()).into());
        }
    };
    if let Some(events) = args.events {
        // Flag paths are relative to the working directory.
        manifest.events = std::path::absolute(&events).unwrap_or(events);
    }
    if let Some(f) = event_format(args.event_format.as_deref())? {
        manifest.format = Some(f);
    }
    if let Some(tau) = args.tau {
        manifest.tau = tau;
    }
    if let Some(p) = args.precision {
        manifest.report.precision = p;
    }
    let report = analyze_manifest(&manifest)?;
    let format = match args.format {
        OutputFormat::Text => ReportFormat::Text,
        OutputFormat::Json => ReportFormat::Json,
    };
    let text = render(&report, format, manifest.report.precision)?;
    emit(&text, args.output.as_deref())?;
    Ok(ExitCode::SUCCESS)
}

pub fn pvalue(args: PvalueArgs) -> Result<ExitCode> {
    let tau = Predictability::new(args.tau)?;
    if args.s.is_none() && args.wins.is_none() {
        return Err(Error::Validation("give --s, --wins, or both".into()).into());
    }
    let mut reports = Vec::new();
    if let Some(s) = args.s {
        reports.push(pvalue_martingale(s, args.n, tau)?);
    }
    if let Some(w) = args.wins {
        reports.push(pvalue_game(w, args.n, tau)?);
    }
    let text = match args.format {
        OutputFormat::Json => json(&reports)?,
        OutputFormat::Text => {
            let mut out = String::new();
            for r in &reports {
                let input = match (r.s, r.wins) {
                    (Some(s), _) => format!("S = {s}"),
                    (_, Some(w)) => format!("W = {w}"),
                    _ => String::new(),
                };
                out.push_str(&format!(
                    "{:?}: {input}, N = {}, tau = {}: P <= {:.4e} (ln P = {:.4})\n",
                    r.method, r.n, r.tau, r.p_bound, r.log_p
                ));
            }
            out
        }
    };
    emit(&text, None)?;
    Ok(ExitCode::SUCCESS)
}

fn build_simulator(args: &SimulateArgs) -> Result<Simulator> {
    let model = match args.model {
        ModelArg::Quantum => OutcomeModel::Quantum {
            visibility: args.visibility,
        },
        ModelArg::Deterministic => {
            if args.strategy >= 16 {
                return Err(Error::Validation(format!(
                    "strategy index {} outside 0..16",
                    args.strategy
                ))
                .into());
            }
            OutcomeModel::Deterministic(DeterministicStrategy::from_index(args.strategy))
        }
        ModelArg::OptimalBiased => OutcomeModel::OptimalBiased,
        ModelArg::LossReactive => OutcomeModel::Memory(Arc::new(LossReactive)),
        ModelArg::HeraldConditioned => OutcomeModel::Memory(Arc::new(HeraldConditioned)),
    };
    let source = SettingSource {
        tau_a: args.tau_a,
        tau_b: args.tau_b,
    };
    Ok(Simulator::new(model, source, args.psi_plus_fraction)?)
}

pub fn simulate(args: SimulateArgs) -> Result<ExitCode> {
    let sim = build_simulator(&args)?;
    if let Some(trials) = args.trials {
        if !sim.model().is_local() {
            return Err(Error::Validation("bound validation needs a local model".into()).into());
        }
        let r = validate_bound(&sim, args.n, trials, args.kappa, args.seed)?;
        let sound = r.martingale_sound() && r.game_sound();
        let text = match args.format {
            OutputFormat::Json => json(&r)?,
            OutputFormat::Text => {
                let line = |name: &str, e: &bellcert::lhv::Exceedance| {
                    format!(
                        "{name:<11} {:>7} hits, frequency {:.5} (99.7% CI {:.5}..{:.5})\n",
                        e.hits, e.frequency, e.ci_low, e.ci_high
                    )
                };
                format!(
                    "{} runs of {} events, tau = {}, kappa = {}\nmean S = {:.4}\n{}{}threshold {:.5}: {}\n",
                    r.trials,
                    r.n_events,
                    r.tau,
                    r.kappa,
                    r.mean_s,
                    line("martingale", &r.martingale),
                    line("game", &r.game),
                    r.threshold(),
                    if sound { "PASS" } else { "FAIL" }
                )
            }
        };
        emit(&text, None)?;
        return Ok(if sound {
            ExitCode::SUCCESS
        } else {
            ExitCode::from(EXIT_CHECK_FAILED)
        });
    }
    let ds = sim.run(args.n, args.seed, 0)?;
    let format = match event_format(args.event_format.as_deref())? {
        Some(f) => f,
        None => args
            .output
            .as_deref()
            .map(EventFormat::from_path)
            .unwrap_or(EventFormat::Delimited),
    };
    match &args.output {
        Some(p) => {
            let f = File::create(p).with_context(|| format!("creating {}", p.display()))?;
            let mut w = BufWriter::new(f);
            write_events(&mut w, &ds.records, format)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = BufWriter::new(stdout.lock());
            write_events(&mut w, &ds.records, format)?;
            w.flush()?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize, Default)]
struct AuditOutput {
    n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    bias: Option<bellcert::qrng::BiasEstimate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    scc: Option<Vec<bellcert::qrng::SccPoint>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    window: Option<Vec<bellcert::qrng::WindowPoint>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    serial: Option<bellcert::qrng::SerialTest>,
}

fn render_audit(a: &AuditOutput) -> String {
    let mut out = format!("{} bits\n", a.n);
    if let Some(b) = &a.bias {
        out.push_str(&format!("bias {:+.3e} ± {:.3e}\n", b.bias, b.sigma));
    }
    if let Some(points) = &a.scc {
        for p in points {
            out.push_str(&format!("SCC_{:<3} {:+.3e} ± {:.3e}\n", p.lag, p.scc, p.sigma));
        }
    }
    if let Some(points) = &a.window {
        let inside = points.iter().filter(|p| p.within(3.0)).count();
        out.push_str(&format!("{} windows, {} within 3σ\n", points.len(), inside));
        for p in points {
            out.push_str(&format!(
                "  {:>12} {:>10} {:+.3e} ± {:.3e}\n",
                p.start, p.len, p.value, p.sigma
            ));
        }
    }
    if let Some(s) = &a.serial {
        out.push_str(&format!(
            "serial test L = {}: {} blocks, chi2 = {:.3} ({} dof), P = {:.4}\n",
            s.block_length, s.blocks, s.chi_squared, s.dof, s.p_value
        ));
    }
    out
}

pub fn qrng(cmd: QrngCommand) -> Result<ExitCode> {
    match cmd {
        QrngCommand::Audit {
            file,
            bit_format: fmt,
            stat,
            min_lag,
            max_lag,
            window,
            window_stat,
            block_length,
            format,
        } => {
            let bits = read_bits_path(&file, bit_format(fmt.as_deref())?)
                .with_context(|| format!("reading {}", file.display()))?;
            if bits.is_empty() {
                return Err(Error::EmptyDataset.into());
            }
            let all = matches!(stat, StatArg::All);
            let mut out = AuditOutput {
                n: bits.len(),
                ..AuditOutput::default()
            };
            if all || matches!(stat, StatArg::Bias) {
                out.bias = Some(bias(&bits)?);
            }
            if all || matches!(stat, StatArg::Scc) {
                if min_lag > max_lag {
                    return Err(Error::Validation("min lag exceeds max lag".into()).into());
                }
                out.scc = Some(scc_range(&bits, min_lag..=max_lag)?);
            }
            if matches!(stat, StatArg::Window) || (all && window.is_some()) {
                let w = window.ok_or_else(|| Error::Validation("--window is required".into()))?;
                let s = match window_stat {
                    WindowStatArg::Bias => WindowStatistic::Bias,
                    WindowStatArg::Scc1 => WindowStatistic::Scc1,
                };
                out.window = Some(windowed_evolution(&bits, s, w)?);
            }
            if all || matches!(stat, StatArg::Serial) {
                match serial_test(&bits, block_length) {
                    Ok(s) => out.serial = Some(s),
                    Err(e @ Error::InsufficientData(_)) if all => eprintln!("serial test skipped: {e}"),
                    Err(e) => return Err(e.into()),
                }
            }
            let text = match format {
                OutputFormat::Json => json(&out)?,
                OutputFormat::Text => render_audit(&out),
            };
            emit(&text, None)?;
        }
        QrngCommand::Budget { config, format } => {
            let budget = match &config {
                Some(p) => {
                    let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                    toml::from_str::<PredictabilityBudget>(&text)
                        .map_err(|e| Error::Validation(format!("budget: {e}")))?
                }
                None => PredictabilityBudget::reference(),
            };
            let r = predictability_budget(&budget)?;
            let text = match format {
                OutputFormat::Json => json(&r)?,
                OutputFormat::Text => format!(
                    "tau1 (bias)      {:.3e}\nthreshold noise  {:.3e}\ntemperature      {:.3e}\ntau2             {:.3e}\n",
                    r.tau1, r.threshold_component, r.temperature_component, r.tau2
                ),
            };
            emit(&text, None)?;
        }
        QrngCommand::Xor { tau, depth } => {
            emit(&format!("{:.6e}\n", xor_reduction(tau, depth)?), None)?;
        }
        QrngCommand::Generate {
            n,
            bias,
            seed,
            output,
            bit_format: fmt,
        } => {
            let bits = BitStream::simulate(n, bias, seed)?;
            let format = bit_format(fmt.as_deref())?.unwrap_or_else(|| BitFormat::from_path(&output));
            let f = File::create(&output).with_context(|| format!("creating {}", output.display()))?;
            let mut w = BufWriter::new(f);
            write_bits(&mut w, &bits, format)?;
            w.flush()?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

pub fn spacetime(cmd: SpacetimeCommand) -> Result<ExitCode> {
    let SpacetimeCommand::Check { config, format } = cmd;
    let cfg = match &config {
        Some(p) => SpacetimeConfig::read(p).with_context(|| format!("reading {}", p.display()))?,
        None => SpacetimeConfig::reference(),
    };
    let report = cfg.check()?;
    let text = match format {
        OutputFormat::Json => json(&report)?,
        OutputFormat::Text => render_report(&report),
    };
    emit(&text, None)?;
    Ok(if report.all_separated() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_CHECK_FAILED)
    })
}

pub fn nosignal(args: NosignalArgs) -> Result<ExitCode> {
    let ds = bellcert::report::ingest(&args.events, event_format(args.event_format.as_deref())?)
        .with_context(|| format!("reading {}", args.events.display()))?;
    let r = analyze_nosignaling(&ds)?;
    let text = match args.format {
        OutputFormat::Json => json(&r)?,
        OutputFormat::Text => format!("{r}\n"),
    };
    emit(&text, None)?;
    Ok(ExitCode::SUCCESS)
}

pub const SYNTHETIC_ORDER_NOTE: &str = "event order is synthetic: only per-cell counts are \
published, so records follow table order within each herald and the two heralds alternate";

fn fixture_manifest(run: &PublishedRun, events: &str) -> RunManifest {
    let mut m = RunManifest::new(run.id, events);
    m.label = run.label.to_string();
    m.expected_events = Some(run.total());
    m.note = Some(SYNTHETIC_ORDER_NOTE.to_string());
    m
}

pub fn fixtures(args: FixturesArgs) -> Result<ExitCode> {
    let format: EventFormat = args.event_format.parse()?;
    let runs: Vec<PublishedRun> = match &args.run {
        Some(id) => vec![find_run(id)?],
        None => PUBLISHED_RUNS.to_vec(),
    };
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let ext = match format {
        EventFormat::Delimited => "csv",
        EventFormat::JsonLines => "jsonl",
    };
    for run in runs {
        let events = format!("{}.{ext}", run.id);
        let path = args.out.join(&events);
        let f = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        let mut w = BufWriter::new(f);
        write_events(&mut w, &run.dataset().records, format)?;
        w.flush()?;
        let manifest = fixture_manifest(&run, &events).to_toml()?;
        fs::write(args.out.join(format!("{}.toml", run.id)), manifest)?;
        eprintln!("wrote {} ({} events)", path.display(), run.total());
    }
    Ok(ExitCode::SUCCESS)
}
