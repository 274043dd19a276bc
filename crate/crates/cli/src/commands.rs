use std::io::{self, Write};
use std::path::PathBuf;

use anyhow::{bail, Context};
use serde::Serialize;

use fbmwalk::oracle::{exact_fbm_sample, FbmOracle, DEFAULT_MAX_POINTS};
use fbmwalk::special::uses_zeta_branch;
use fbmwalk::stats::{
    compare_covariance, estimate_variance, scaling_study, ConvergenceReport, ProbeReport,
    ScalingOptions, Z_BAND,
};
use fbmwalk::walk::{
    incremental_values, kernel_values, lemma2_variance_bounds, lemma3_for_signs, walk_covariance,
    ErrorKind, ErrorTermSummary,
};
use fbmwalk::{
    bernoulli_stream, scaling_constant_c, zeta, FbmConstants, GridSpec, HurstIndex, PathForm,
    PathSample, Regime, WalkGenerator, WeightTable, VERSION,
};

use crate::config::{RunConfig, Scale};
use crate::output::{create, path_file, sidecar_file, write_json, write_path};

/// Result of a command that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    ChecksFailed,
}

/// Seeds generated per batch before writing.
const BATCH: usize = 256;

#[derive(Serialize)]
struct GenerateMeta<'a> {
    hurst: f64,
    n_per_unit: u64,
    horizon: f64,
    past_steps: u64,
    paths: u64,
    seed: u64,
    seeds: Vec<u64>,
    scale: &'static str,
    c_h: f64,
    form: &'static str,
    format: &'static str,
    files: &'a [PathBuf],
    version: &'static str,
}

pub fn generate(config: &RunConfig) -> anyhow::Result<Outcome> {
    let grid = config.grid()?;
    let gen = WalkGenerator::new(config.hurst, grid);
    let scaled = config.scale == Scale::CH;
    let seeds = config.seeds();

    let Some(out) = &config.out else {
        if seeds.len() > 1 {
            bail!("--out is required when --paths is more than 1");
        }
        let path = gen.path(config.form, seeds[0], scaled)?;
        let stdout = io::stdout();
        let mut w = stdout.lock();
        write_path(&path, config.format, &mut w)?;
        w.flush()?;
        return Ok(Outcome::Pass);
    };

    let mut files = Vec::with_capacity(seeds.len());
    for batch in seeds.chunks(BATCH) {
        let paths = gen.paths(config.form, batch, scaled)?;
        for (path, &seed) in paths.iter().zip(batch) {
            let file = path_file(out, seed, seeds.len(), config.format);
            let mut w = create(&file)?;
            write_path(path, config.format, &mut w)
                .and_then(|_| w.flush())
                .with_context(|| format!("writing {}", file.display()))?;
            files.push(file);
        }
    }
    let meta = GenerateMeta {
        hurst: config.hurst.value(),
        n_per_unit: grid.n_per_unit(),
        horizon: grid.horizon(),
        past_steps: grid.past_steps(),
        paths: config.paths,
        seed: config.seed,
        seeds: seeds.clone(),
        scale: config.scale.name(),
        c_h: scaling_constant_c(config.hurst),
        form: config.form.name(),
        format: config.format.extension(),
        files: &files,
        version: VERSION,
    };
    write_json(&meta, Some(&sidecar_file(out)))?;
    Ok(Outcome::Pass)
}

#[derive(Debug, Serialize)]
struct Check {
    section: &'static str,
    name: String,
    value: f64,
    bound: f64,
    /// `bound - value`; negative on failure.
    margin: f64,
    pass: bool,
}

impl Check {
    fn upper(section: &'static str, name: String, value: f64, bound: f64) -> Self {
        Self {
            section,
            name,
            value,
            bound,
            margin: bound - value,
            pass: value <= bound,
        }
    }
}

#[derive(Serialize)]
struct VerifyReport {
    hurst: f64,
    regime: Regime,
    n_per_unit: u64,
    horizon: f64,
    past_steps: u64,
    seeds: Vec<u64>,
    sections: Vec<&'static str>,
    checks: Vec<Check>,
    failures: usize,
    pass: bool,
}

/// Steps at `{1/4, 1/2, 3/4, 1}` of the window, snapped to the grid.
fn probe_steps(grid: &GridSpec) -> Vec<i64> {
    let end = grid.end_step();
    let mut steps: Vec<i64> = [0.25, 0.5, 0.75, 1.0]
        .iter()
        .map(|f| ((f * end as f64).round() as i64).max(1))
        .collect();
    steps.dedup();
    steps
}

/// Sandwich checks cover every `t` when the sweep is small enough.
const FULL_SWEEP_LIMIT: u64 = 50_000_000;

pub fn verify(config: &RunConfig) -> anyhow::Result<(Outcome, String)> {
    let grid = config.grid()?;
    let hurst = config.hurst;
    let table = WeightTable::new(hurst, grid);
    let seeds = config.seeds();
    let mut sections = Vec::new();
    let mut checks = Vec::new();

    if hurst.regime() == Regime::Classical {
        sections.extend(["degeneracy", "quadratic_variation"]);
        for &seed in &seeds {
            let stream = bernoulli_stream(seed, grid);
            let plain = stream.walk();
            let signs = stream.signs();
            let mut gap: f64 = 0.0;
            let forms = [
                incremental_values(&table, &signs)?,
                fbmwalk::walk::coefficient_values(&table, &signs)?,
                kernel_values(&table, &signs)?,
            ];
            for values in &forms {
                for (x, y) in values.iter().zip(&plain) {
                    gap = gap.max((x - y).abs());
                }
            }
            checks.push(Check::upper("degeneracy", format!("seed {seed}"), gap, 1e-12));
            let qv: f64 = forms[0].windows(2).map(|w| (w[1] - w[0]).powi(2)).sum();
            checks.push(Check::upper(
                "quadratic_variation",
                format!("seed {seed}"),
                (qv - grid.horizon()).abs(),
                1e-12,
            ));
        }
    } else {
        sections.push("form_identity");
        let gen = WalkGenerator::new(hurst, grid);
        for &seed in &seeds {
            let signs = bernoulli_stream(seed, grid).signs();
            let incremental = incremental_values(&table, &signs)?;
            let coefficient = fbmwalk::walk::coefficient_values(&table, &signs)?;
            let fast = gen.values(PathForm::Fast, seed)?;
            checks.push(Check::upper(
                "form_identity",
                format!("seed {seed}: incremental vs coefficient"),
                sup(&incremental, &coefficient),
                1e-9,
            ));
            checks.push(Check::upper(
                "form_identity",
                format!("seed {seed}: incremental vs fast"),
                sup(&incremental, &fast),
                1e-8,
            ));
        }

        if let Some(kinds) = ErrorKind::for_hurst(hurst) {
            sections.push("riemann_sandwich");
            let work = grid.horizon_steps() * (grid.horizon_steps() + grid.past_steps());
            let steps: Vec<i64> = if work <= FULL_SWEEP_LIMIT {
                (1..=grid.end_step()).collect()
            } else {
                probe_steps(&grid)
            };
            for kind in kinds {
                let s = ErrorTermSummary::sweep(kind, &table, &steps)?;
                checks.push(Check {
                    section: "riemann_sandwich",
                    name: format!(
                        "{}: {} terms, {} violations, min value {:.3e}",
                        kind.name(),
                        s.count,
                        s.violations,
                        s.min_value
                    ),
                    value: s.max_ratio,
                    bound: 1.0,
                    margin: 1.0 - s.max_ratio,
                    pass: s.all_within(),
                });
            }
        }

        match hurst.regime() {
            Regime::SuperDiffusive => {
                sections.push("lemma2");
                for t in probe_steps(&grid) {
                    let r = lemma2_variance_bounds(&table, t)?;
                    checks.push(Check::upper(
                        "lemma2",
                        format!("t={}: sum eps^2 dt", r.t),
                        r.epsilon_sum,
                        r.epsilon_bound,
                    ));
                    checks.push(Check::upper(
                        "lemma2",
                        format!("t={}: sum delta^2 dt", r.t),
                        r.delta_sum,
                        r.delta_bound,
                    ));
                }
            }
            Regime::SubDiffusive if uses_zeta_branch(hurst) => {
                sections.push("lemma3");
                for &seed in &seeds {
                    let r = lemma3_for_signs(&table, &bernoulli_stream(seed, grid).signs())?;
                    checks.push(Check::upper(
                        "lemma3",
                        format!("seed {seed}: sup |incremental - kernel| at t={}", r.argmax),
                        r.max_discrepancy,
                        r.bound,
                    ));
                }
            }
            _ => {}
        }
    }

    let failures = checks.iter().filter(|c| !c.pass).count();
    let failing: Vec<String> = checks
        .iter()
        .filter(|c| !c.pass)
        .map(|c| format!("{} / {}: {:e} > {:e}", c.section, c.name, c.value, c.bound))
        .collect();
    let report = VerifyReport {
        hurst: hurst.value(),
        regime: hurst.regime(),
        n_per_unit: grid.n_per_unit(),
        horizon: grid.horizon(),
        past_steps: grid.past_steps(),
        seeds,
        sections,
        checks,
        failures,
        pass: failures == 0,
    };
    write_json(&report, config.out.as_deref())?;
    let outcome = if failures == 0 {
        Outcome::Pass
    } else {
        Outcome::ChecksFailed
    };
    Ok((outcome, failing.join("\n")))
}

fn sup(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Below this many paths the z-scores are reported but not gated.
pub const MIN_GATED_PATHS: u64 = 100;

#[derive(Serialize)]
struct ConvergeOutput {
    report: ConvergenceReport,
    paths: u64,
    gated: bool,
    warnings: Vec<String>,
    pass: bool,
}

pub fn converge(config: &RunConfig) -> anyhow::Result<(Outcome, Vec<String>)> {
    if config.paths < 2 {
        bail!("converge needs --paths of at least 2");
    }
    let grid = config.grid()?;
    let hurst = config.hurst;
    let gen = WalkGenerator::new(hurst, grid);
    let seeds = config.seeds();
    let paths = gen.paths(config.form, &seeds, false)?;
    let c = scaling_constant_c(hurst);
    let steps = probe_steps(&grid);
    let probes: Vec<f64> = steps.iter().map(|&s| grid.time(s)).collect();
    let last = *steps.last().unwrap();
    let variance = estimate_variance(&paths, grid.time(last), c, hurst)?;
    let covariance = compare_covariance(&paths, &probes, c, hurst)?;
    drop(paths);
    let exact_walk_variance = c * c * walk_covariance(gen.table(), last, last)?;

    let mut warnings = Vec::new();
    let oracle_check = if grid.horizon_steps() as usize <= DEFAULT_MAX_POINTS {
        let oracle = FbmOracle::on_grid(hurst, &grid)?;
        let exact: Vec<PathSample> = seeds
            .iter()
            .map(|&s| exact_fbm_sample(&oracle, &grid, s))
            .collect::<fbmwalk::Result<_>>()?;
        Some(compare_covariance(&exact, &probes, 1.0, hurst)?)
    } else {
        warnings.push(format!(
            "oracle self-test skipped: {} grid points exceed the dense cap of {DEFAULT_MAX_POINTS}",
            grid.horizon_steps()
        ));
        None
    };

    let scaling = if hurst.regime() == Regime::Classical || config.ns.is_empty() {
        None
    } else {
        let options = ScalingOptions {
            base_seed: config.seed,
            ..Default::default()
        };
        Some(scaling_study(hurst, &config.ns, options)?)
    };

    let report = ConvergenceReport {
        hurst,
        band: Z_BAND,
        probes: vec![ProbeReport {
            n: grid.n_per_unit(),
            past_steps: grid.past_steps(),
            paths: seeds.len(),
            variance,
            covariance,
            exact_walk_variance,
        }],
        oracle_check,
        scaling,
    };
    let gated = config.paths >= MIN_GATED_PATHS;
    if !gated {
        warnings.push(format!(
            "only {} paths (fewer than {MIN_GATED_PATHS}): z-scores reported but not gated",
            config.paths
        ));
    }
    let pass = if gated {
        report.passes()
    } else {
        report.slopes_pass()
    };
    write_json(
        &ConvergeOutput {
            report,
            paths: config.paths,
            gated,
            warnings: warnings.clone(),
            pass,
        },
        config.out.as_deref(),
    )?;
    let outcome = if pass {
        Outcome::Pass
    } else {
        Outcome::ChecksFailed
    };
    Ok((outcome, warnings))
}

#[derive(Serialize)]
struct ConstantsReport {
    hurst: f64,
    regime: Regime,
    k_h: f64,
    c_h: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    zeta_three_halves_minus_h: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    zeta_three_minus_two_h: Option<f64>,
}

pub fn constants(hurst: HurstIndex, json: bool) -> anyhow::Result<Outcome> {
    let FbmConstants { k, c, .. } = FbmConstants::new(hurst);
    let h = hurst.value();
    let report = ConstantsReport {
        hurst: h,
        regime: hurst.regime(),
        k_h: k,
        c_h: c,
        zeta_three_halves_minus_h: uses_zeta_branch(hurst)
            .then(|| zeta(1.5 - h))
            .transpose()?,
        zeta_three_minus_two_h: (hurst.regime() == Regime::SuperDiffusive)
            .then(|| zeta(3.0 - 2.0 * h))
            .transpose()?,
    };
    if json {
        write_json(&report, None)?;
    } else {
        let stdout = io::stdout();
        let mut w = stdout.lock();
        writeln!(w, "H            {h}")?;
        writeln!(w, "K_H          {k}")?;
        writeln!(w, "c_H          {c}")?;
        if let Some(z) = report.zeta_three_halves_minus_h {
            writeln!(w, "zeta(3/2-H)  {z}")?;
        }
        if let Some(z) = report.zeta_three_minus_two_h {
            writeln!(w, "zeta(3-2H)   {z}")?;
        }
    }
    Ok(Outcome::Pass)
}
