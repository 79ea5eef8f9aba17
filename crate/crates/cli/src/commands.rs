use std::collections::BTreeMap;
use std::fmt;

use anyhow::{anyhow, bail, Context, Result};
use pralab::cache::GenCache;
use pralab::connector::{connect_to_redundant, ConnectorOptions};
use pralab::graph::{components, pra_sample_counts, pra_walk, ComponentOptions};
use pralab::spread::{blocking_search, exact_spread, spread_at_least, MateTable, SpreadOptions};
use pralab::subgroup::{classify_subgroup, closure, is_structural, normalizer};
use pralab::verify::{
    chi_square_critical, chi_square_uniform, errored, run_criterion, VerifyOptions, CRITERIA,
    UNIFORMITY_SIGNIFICANCE,
};
use pralab::{ElementType, Error, GenTuple, GroupTable};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::config::{Format, RunConfig};
use crate::output::Out;
use crate::{Cli, Command, Mode};

/// A check that ran and failed, as opposed to bad input.
#[derive(Debug)]
pub struct VerificationFailed(pub String);

impl fmt::Display for VerificationFailed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for VerificationFailed {}

pub fn hint(e: &anyhow::Error) -> Option<&'static str> {
    match e.downcast_ref::<Error>()? {
        Error::BudgetExceeded { .. } => Some("raise --state-budget or lower --k"),
        Error::SearchBudget(_) => Some("raise --search-budget or use --mode upper"),
        Error::NotGenerating => Some("the tuple must generate the whole group"),
        Error::NotInPsl { .. } => Some("use --group pgl for matrices with non-square determinant"),
        _ => None,
    }
}

pub fn run(cfg: &RunConfig, cli: &Cli) -> Result<()> {
    let mut out = Out::new(cfg.format, cfg.deterministic);
    match &cli.command {
        Command::Classify { census } => classify(cfg, &mut out, *census),
        Command::Subgroup => subgroup(cfg, &mut out, cli.common.tuple.as_deref()),
        Command::Components => components_cmd(cfg, &mut out),
        Command::Walk { samples } => walk(cfg, &mut out, cli, *samples),
        Command::Connect { experimental, search_cap } => {
            connect(cfg, &mut out, cli, *experimental, *search_cap)
        }
        Command::Spread { m, mode, restarts, no_reduce } => {
            let opts = SpreadOptions {
                set_budget: cfg.search_budget,
                reduce: !no_reduce,
                restarts: *restarts,
                seed: cfg.seed,
            };
            spread(cfg, &mut out, *m, *mode, &opts)
        }
        Command::Verify { only, keep_going } => verify(cfg, &mut out, only, *keep_going),
    }
}

fn table(cfg: &RunConfig) -> Result<GroupTable> {
    let q = cfg.q.ok_or_else(|| anyhow!("--q is required"))?;
    Ok(GroupTable::from_q(cfg.group, q)?)
}

fn start_tuple(cfg: &RunConfig, cli: &Cli, g: &GroupTable, random_default: bool) -> Result<GenTuple> {
    match (&cli.common.tuple, cli.common.random || random_default) {
        (Some(_), true) if cli.common.random => bail!("give either --tuple or --random"),
        (Some(s), _) => {
            let t = GenTuple::parse(g, s).context("reading --tuple")?;
            if t.k() != cfg.k && cli.common.k.is_some() {
                bail!("--tuple has {} entries but --k is {}", t.k(), cfg.k);
            }
            if !t.generates(g) {
                return Err(Error::NotGenerating.into());
            }
            Ok(t)
        }
        (None, true) => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            Ok(GenTuple::random_generating(g, cfg.k, &mut rng)?)
        }
        (None, false) => bail!("give --tuple or --random"),
    }
}

fn classify(cfg: &RunConfig, out: &mut Out, census: bool) -> Result<()> {
    let g = table(cfg)?;
    let id = g.id();
    if census {
        let mut types: BTreeMap<String, usize> = BTreeMap::new();
        let mut orders: BTreeMap<u32, usize> = BTreeMap::new();
        for t in [ElementType::Identity, ElementType::Unipotent, ElementType::Split, ElementType::NonSplit] {
            types.insert(t.to_string(), 0);
        }
        for &x in g.elements() {
            *types.get_mut(&g.element_type(x).to_string()).unwrap() += 1;
            *orders.entry(g.order_of(x)).or_default() += 1;
        }
        return match out.format {
            Format::Json => out.json(&json!({
                "group": id.to_string(),
                "q": g.q(),
                "total": g.order(),
                "types": types,
                "orders": orders,
            })),
            Format::Csv => out.csv(
                &["type", "count"],
                types.iter().map(|(t, c)| [t.clone(), c.to_string()]),
            ),
            Format::Text => {
                out.line(format!("{}: {} elements", id, g.order()))?;
                for (t, c) in &types {
                    out.line(format!("  {t:<10} {c}"))?;
                }
                let orders: Vec<String> = orders.iter().map(|(o, c)| format!("{o}:{c}")).collect();
                out.line(format!("  orders     {}", orders.join(" ")))
            }
        };
    }
    let rows = g.elements().iter().map(|&x| {
        let rec = id.record(&g.elem(x));
        let fixed = g.fixed_points(x).len();
        (rec, fixed)
    });
    match out.format {
        Format::Json => {
            for (rec, fixed) in rows {
                let mut v = serde_json::to_value(&rec)?;
                v["fixed-points"] = fixed.into();
                out.json(&v)?;
            }
            Ok(())
        }
        Format::Csv => out.csv(
            &["code", "matrix", "order", "type", "fixed-points"],
            rows.map(|(r, f)| {
                [r.code, r.matrix, r.order.to_string(), r.element_type.to_string(), f.to_string()]
            }),
        ),
        Format::Text => {
            for (r, f) in rows {
                out.line(format!("{:<16} order {:<3} {:<10} {f} fixed", r.matrix, r.order, r.element_type.to_string()))?;
            }
            Ok(())
        }
    }
}

fn subgroup(cfg: &RunConfig, out: &mut Out, gens: Option<&str>) -> Result<()> {
    let g = table(cfg)?;
    let gens = gens.ok_or_else(|| anyhow!("give the generators with --tuple"))?;
    let gens = GenTuple::parse(&g, gens).context("reading --tuple")?;
    let h = closure(&g, gens.entries())?;
    let rec = h.record(&g)?;
    let proper = h.order() < g.order();
    let structural = if proper { Some(is_structural(&g, &h)?) } else { None };
    let class = classify_subgroup(&g, &h);
    let norm = normalizer(&g, &h).order();
    match out.format {
        Format::Json => {
            let mut v = serde_json::to_value(&rec)?;
            v["structural"] = json!(structural);
            v["normalizer-order"] = norm.into();
            if let Err(e) = &class {
                v["class"] = json!(null);
                v["classification-error"] = e.to_string().into();
            }
            out.json(&v)
        }
        Format::Csv => out.csv(
            &["ambient", "order", "class", "structural", "normalizer-order", "orbit-sizes"],
            [[
                rec.ambient.clone(),
                rec.order.to_string(),
                class.as_ref().map_or_else(|e| e.to_string(), |c| c.to_string()),
                structural.map_or("full".into(), |s| s.to_string()),
                norm.to_string(),
                format!("{:?}", rec.orbit_sizes),
            ]],
        ),
        Format::Text => out.line(format!(
            "subgroup of {} of order {}: {}, {}, normalizer order {norm} in PGL, orbits {:?}",
            rec.ambient,
            rec.order,
            class.as_ref().map_or_else(|e| e.to_string(), |c| c.to_string()),
            match structural {
                Some(true) => "structural",
                Some(false) => "not structural",
                None => "the whole group",
            },
            rec.orbit_sizes
        )),
    }?;
    class.map(|_| ()).map_err(Into::into)
}

fn components_cmd(cfg: &RunConfig, out: &mut Out) -> Result<()> {
    let g = table(cfg)?;
    let opts = ComponentOptions {
        extended: cfg.extended,
        state_budget: cfg.state_budget,
        workers: cfg.workers,
    };
    let (mut report, _) = components(&g, cfg.k, &opts)?;
    if cfg.deterministic {
        report.timing = None;
    }
    match out.format {
        Format::Json => out.json(&report),
        Format::Csv => {
            let mut sizes: BTreeMap<u64, u64> = BTreeMap::new();
            for &s in &report.component_sizes {
                *sizes.entry(s).or_default() += 1;
            }
            out.csv(
                &["size", "count"],
                sizes.iter().rev().map(|(s, c)| [s.to_string(), c.to_string()]),
            )
        }
        Format::Text => out.line(format!(
            "{} k={} {}: {} vertices, {} component(s), sizes {:?}",
            report.group,
            report.k,
            if report.extended { "extended" } else { "plain" },
            report.vertex_count,
            report.component_count,
            report.component_sizes
        )),
    }
}

fn walk(cfg: &RunConfig, out: &mut Out, cli: &Cli, samples: u64) -> Result<()> {
    let g = table(cfg)?;
    let t0 = start_tuple(cfg, cli, &g, true)?;
    if samples <= 1 {
        let (end, x) = pra_walk(&g, &t0, cfg.steps, cfg.seed)?;
        return match out.format {
            Format::Json => out.json(&json!({
                "group": g.id().to_string(),
                "k": t0.k(),
                "steps": cfg.steps,
                "seed": cfg.seed,
                "start": t0.format(&g),
                "end": end.format(&g),
                "sample": g.format_elem(x),
            })),
            Format::Csv => out.csv(
                &["start", "end", "sample"],
                [[t0.format(&g), end.format(&g), g.format_elem(x)]],
            ),
            Format::Text => out.line(g.format_elem(x)),
        };
    }
    let counts = pra_sample_counts(&g, &t0, cfg.steps, samples, cfg.seed)?;
    let stat = chi_square_uniform(&counts);
    let crit = chi_square_critical(counts.len() - 1, UNIFORMITY_SIGNIFICANCE);
    let rows: Vec<(String, u64)> = g
        .elements()
        .iter()
        .zip(&counts)
        .map(|(&x, &c)| (g.format_elem(x), c))
        .collect();
    match out.format {
        Format::Json => out.json(&json!({
            "group": g.id().to_string(),
            "k": t0.k(),
            "steps": cfg.steps,
            "seed": cfg.seed,
            "samples": samples,
            "start": t0.format(&g),
            "counts": rows.iter().map(|(m, c)| json!({"matrix": m, "count": c})).collect::<Vec<_>>(),
            "chi-square": stat,
            "critical-value": crit,
            "significance": UNIFORMITY_SIGNIFICANCE,
        })),
        Format::Csv => out.csv(&["matrix", "count"], rows.iter().map(|(m, c)| [m.clone(), c.to_string()])),
        Format::Text => out.line(format!(
            "{samples} samples over {} elements: chi-square {stat:.2}, critical value {crit:.2} at {UNIFORMITY_SIGNIFICANCE}",
            counts.len()
        )),
    }
}

fn connect(cfg: &RunConfig, out: &mut Out, cli: &Cli, experimental: bool, search_cap: usize) -> Result<()> {
    let g = table(cfg)?;
    let t = start_tuple(cfg, cli, &g, false)?;
    let opts = ConnectorOptions {
        search_cap,
        experimental_long_tuples: experimental,
        ..Default::default()
    };
    let trace = match connect_to_redundant(&g, &t, &opts) {
        Ok(trace) => trace,
        Err(f) => {
            if matches!(f.error, Error::Connector { .. }) {
                out.json(&json!({ "error": f.error.to_string(), "partial-trace": f.trace }))?;
                return Err(VerificationFailed(f.to_string()).into());
            }
            return Err(f.error.into());
        }
    };
    trace
        .recheck(&g)
        .map_err(|e| VerificationFailed(format!("trace does not replay: {e}")))?;
    match out.format {
        Format::Json => out.json(&trace),
        Format::Csv => out.csv(
            &["stage", "move"],
            trace
                .stages
                .iter()
                .flat_map(|s| s.moves.iter().map(move |m| [s.label.clone(), m.to_string()])),
        ),
        Format::Text => {
            out.line(format!("# {} input {}", trace.group, trace.input))?;
            for s in &trace.stages {
                out.line(format!("# {}", s.label))?;
                for m in &s.moves {
                    out.line(m.to_string())?;
                }
            }
            out.line(format!(
                "# endpoint {}, entry {} is redundant",
                trace.endpoint, trace.redundant_witness_index
            ))
        }
    }
}

fn spread(cfg: &RunConfig, out: &mut Out, m: usize, mode: Mode, opts: &SpreadOptions) -> Result<()> {
    let g = table(cfg)?;
    let mates = match GenCache::env_dir() {
        Some(dir) => {
            let mut cache = GenCache::load(&dir, &g)?;
            let mates = MateTable::build_cached(&g, &mut cache);
            if cache.is_dirty() {
                cache.save(&dir)?;
            }
            mates
        }
        None => MateTable::build(&g),
    };
    let report = match mode {
        Mode::Lower => spread_at_least(&g, &mates, m, opts)?,
        Mode::Upper => blocking_search(&g, &mates, m, opts),
        Mode::Exact => exact_spread(&g, &mates, m, opts)?,
    };
    match out.format {
        Format::Json => out.json(&report),
        Format::Csv => out.csv(&["group", "q", "m", "mode", "verdict"], [report.csv_row(g.q())]),
        Format::Text => {
            let row = report.csv_row(g.q());
            out.line(format!("{} m={} {}: {}", row[0], row[2], row[3], row[4]))?;
            if let Some(w) = &report.witness {
                for e in w {
                    out.line(format!("  {}", e.matrix))?;
                }
            }
            Ok(())
        }
    }
}

fn verify(cfg: &RunConfig, out: &mut Out, only: &[u32], keep_going: bool) -> Result<()> {
    let opts = VerifyOptions {
        seed: cfg.seed,
        workers: cfg.workers,
        state_budget: cfg.state_budget,
        spread: SpreadOptions {
            set_budget: cfg.search_budget,
            ..Default::default()
        },
    };
    for id in only {
        if !CRITERIA.iter().any(|c| c.0 == *id) {
            bail!("no acceptance criterion {id}");
        }
    }
    if out.format == Format::Csv {
        out.line("id,title,passed,summary")?;
    }
    let mut failed = Vec::new();
    for (id, _) in CRITERIA {
        if !only.is_empty() && !only.contains(&id) {
            continue;
        }
        let mut outcome = run_criterion(id, &opts).unwrap_or_else(|e| errored(id, &e));
        if cfg.deterministic {
            outcome.elapsed_ms = None;
        }
        match out.format {
            Format::Json => out.json(&outcome)?,
            Format::Csv => {
                let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(vec![]);
                w.write_record([id.to_string(), outcome.title.clone(), outcome.passed.to_string(), outcome.summary.clone()])?;
                out.line(String::from_utf8(w.into_inner()?)?.trim_end())?;
            }
            Format::Text => {
                out.line(outcome.to_string())?;
                for d in &outcome.details {
                    out.line(format!("       {d}"))?;
                }
            }
        }
        if !outcome.passed {
            failed.push(id);
            if !keep_going {
                break;
            }
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(VerificationFailed(format!("criteria {failed:?} failed")).into())
    }
}
