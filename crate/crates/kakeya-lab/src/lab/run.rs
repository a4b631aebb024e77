//! The ten experiment commands.
//!
//! Each runner consumes an [`ExperimentConfig`], prints one summary line
//! per result, and writes artifacts when an output directory is set. With
//! the check switch on, a runner also judges its own results against the
//! thresholds it is supposed to meet and reports violations; the binary
//! turns those into a non-zero exit status.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde_json::json;
use std::path::PathBuf;

use crate::binary_perco;
use crate::bitstring::BitString;
use crate::dirtree::DirTree;
use crate::dyadic::Dyadic;
use crate::families::{self, Family, FamilyInstance};
use crate::gtree::build_gtree;
use crate::kset::KSet;
use crate::poss::{membership_probability_exact, membership_probability_mc, poss_set};
use crate::sticky::{self, StickyError, StickyMap};
use crate::witness;

use super::config::ExperimentConfig;
use super::report::{approx_text, json_bytes, rational_text, write_artifact, Csv};
use super::LabError;

/// The experiment to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    TreeInfo,
    Prune,
    Ksigma,
    Measure,
    Prob,
    Gtree,
    Percolation,
    Counterexample,
    SeparationScan,
    LemmaScaling,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::TreeInfo => "tree-info",
            Command::Prune => "prune",
            Command::Ksigma => "ksigma",
            Command::Measure => "measure",
            Command::Prob => "prob",
            Command::Gtree => "gtree",
            Command::Percolation => "percolation",
            Command::Counterexample => "counterexample",
            Command::SeparationScan => "separation-scan",
            Command::LemmaScaling => "lemma-scaling",
        }
    }

    pub fn all() -> [Command; 10] {
        [
            Command::TreeInfo,
            Command::Prune,
            Command::Ksigma,
            Command::Measure,
            Command::Prob,
            Command::Gtree,
            Command::Percolation,
            Command::Counterexample,
            Command::SeparationScan,
            Command::LemmaScaling,
        ]
    }

    pub fn from_name(name: &str) -> Option<Command> {
        Command::all().into_iter().find(|c| c.name() == name)
    }
}

/// What a runner produced: summary lines for stdout, paths of written
/// artifacts, and any check-mode violations.
#[derive(Debug, Default)]
pub struct RunSummary {
    pub lines: Vec<String>,
    pub artifacts: Vec<PathBuf>,
    pub check_failures: Vec<String>,
}

impl RunSummary {
    fn line(&mut self, text: impl Into<String>) {
        self.lines.push(text.into());
    }

    fn fail(&mut self, text: impl Into<String>) {
        self.check_failures.push(text.into());
    }
}

/// Runs one command against one configuration.
pub fn run(command: Command, config: &ExperimentConfig) -> Result<RunSummary, LabError> {
    match command {
        Command::TreeInfo => run_tree_info(config),
        Command::Prune => run_prune(config),
        Command::Ksigma => run_ksigma(config),
        Command::Measure => run_measure(config),
        Command::Prob => run_prob(config),
        Command::Gtree => run_gtree(config),
        Command::Percolation => run_percolation(config),
        Command::Counterexample => run_counterexample(config),
        Command::SeparationScan => run_separation_scan(config),
        Command::LemmaScaling => run_lemma_scaling(config),
    }
}

/// Deterministic per-task seed: `n` and the task index occupy disjoint
/// bit ranges, so tasks never share a stream by accident.
pub fn derived_seed(base: u64, n: u32, task: u64) -> u64 {
    base.wrapping_add((u64::from(n) << 40).wrapping_add(task))
}

fn family_instance(config: &ExperimentConfig, n: u32) -> Result<FamilyInstance, LabError> {
    let instance = families::generate(config.family, n)?;
    if instance.depth > config.cap_depth {
        return Err(LabError::DepthCap {
            depth: instance.depth,
            cap: config.cap_depth,
        });
    }
    Ok(instance)
}

fn rat_f64(value: &BigRational) -> f64 {
    value.to_f64().unwrap_or(f64::NAN)
}

/// Dyadic grid of `2^bits` points spanning `(0, hi)`, each nudged by
/// `hi * 2^-(bits + tree_height + 2)` so intercepts never land exactly on
/// a cell boundary of the scanned tree (boundaries carry no membership
/// under the open-parallelogram convention and would make every scanned
/// probability trivially zero).
fn grid_points(hi: &Dyadic, bits: u32, tree_height: u32) -> Vec<Dyadic> {
    let nudge = Dyadic::pow2(-i64::from(bits + tree_height + 2)) * hi;
    (0..(1u64 << bits))
        .map(|k| &(&Dyadic::new(BigInt::from(k), u64::from(bits)) * hi) + &nudge)
        .collect()
}

fn emit(
    summary: &mut RunSummary,
    config: &ExperimentConfig,
    name: &str,
    bytes: &[u8],
) -> Result<(), LabError> {
    if let Some(dir) = &config.out {
        let path = write_artifact(dir, name, bytes)?;
        summary.artifacts.push(path);
    }
    Ok(())
}

fn tree_text_artifact(hash: &str, text: &str) -> Vec<u8> {
    format!("# config_sha256 = {hash}\n{text}").into_bytes()
}

fn run_tree_info(config: &ExperimentConfig) -> Result<RunSummary, LabError> {
    let mut summary = RunSummary::default();
    let hash = config.sha256_hex();
    let mut entries: Vec<(String, DirTree)> = Vec::new();
    if let Some(directions) = &config.directions {
        let depth = config.depth.ok_or_else(|| {
            LabError::Config("depth is required when directions are given".to_string())
        })?;
        if depth > config.cap_depth {
            return Err(LabError::DepthCap {
                depth,
                cap: config.cap_depth,
            });
        }
        entries.push((
            "directions".to_string(),
            DirTree::from_directions(directions, depth)?,
        ));
    } else {
        for n in config.n_range() {
            let instance = family_instance(config, n)?;
            entries.push((format!("{}-n{}", config.family, n), instance.tree));
        }
    }

    let mut rows = Vec::new();
    for (label, tree) in &entries {
        let report = tree.splitting_values();
        let eta = tree.separation_eta_max();
        let eta_text = match eta.value() {
            Some(v) => v.to_string(),
            None => "unconstrained".to_string(),
        };
        let splitting = tree.splitting_vertices();

        let mut csv = Csv::new(&["vertex", "split_value", "config_sha256"]);
        for v in &splitting {
            csv.row([v.to_string(), report.value(*v).to_string(), hash.clone()]);
        }
        emit(
            &mut summary,
            config,
            &format!("splits_{label}.csv"),
            &csv.into_bytes(),
        )?;

        summary.line(format!(
            "[{label}] lambda = {}, eta_max = {eta_text}, height = {}, vertices = {}, leaves = {}",
            report.lambda,
            tree.height(),
            tree.vertex_count(),
            tree.leaves().len()
        ));
        rows.push(json!({
            "label": label,
            "lambda": report.lambda,
            "eta_max": eta_text,
            "height": tree.height(),
            "vertices": tree.vertex_count(),
            "leaves": tree.leaves().len(),
            "splitting_vertices": splitting.len(),
        }));

        if config.check {
            match tree.brute_force_split(BitString::root(), config.cap_enum) {
                Ok(direct) => {
                    if direct != report.lambda {
                        summary.fail(format!(
                            "[{label}] recursion gives lambda = {}, enumeration gives {direct}",
                            report.lambda
                        ));
                    }
                }
                Err(_) => summary.line(format!(
                    "[{label}] enumeration cross-check skipped (subtree count over cap)"
                )),
            }
        }
    }

    let doc = json!({
        "command": "tree-info",
        "config_sha256": hash,
        "trees": rows,
    });
    emit(&mut summary, config, "tree_info.json", &json_bytes(&doc))?;
    Ok(summary)
}

fn run_prune(config: &ExperimentConfig) -> Result<RunSummary, LabError> {
    let mut summary = RunSummary::default();
    let hash = config.sha256_hex();
    let mut rows = Vec::new();
    for n in config.n_range() {
        let instance = family_instance(config, n)?;
        let pruned = instance.tree.prune(n)?;
        emit(
            &mut summary,
            config,
            &format!("pruned_{}_n{}.txt", config.family, n),
            &tree_text_artifact(&hash, &pruned.to_text()),
        )?;
        summary.line(format!(
            "n={n}: pruned to order {n}; height {} -> {}, vertices {} -> {}",
            instance.tree.height(),
            pruned.height(),
            instance.tree.vertex_count(),
            pruned.vertex_count()
        ));
        rows.push(json!({
            "n": n,
            "height": pruned.height(),
            "vertices": pruned.vertex_count(),
            "leaves": pruned.leaves().len(),
        }));
        if config.check {
            if pruned.lacunary_order() != n {
                summary.fail(format!(
                    "n={n}: pruned tree has order {}, expected {n}",
                    pruned.lacunary_order()
                ));
            }
            if !pruned.vertices().all(|v| instance.tree.contains_vertex(v)) {
                summary.fail(format!("n={n}: pruned tree is not a subtree"));
            }
        }
    }
    let doc = json!({
        "command": "prune",
        "config_sha256": hash,
        "family": config.family.to_string(),
        "trees": rows,
    });
    emit(&mut summary, config, "prune.json", &json_bytes(&doc))?;
    Ok(summary)
}

fn run_ksigma(config: &ExperimentConfig) -> Result<RunSummary, LabError> {
    let mut summary = RunSummary::default();
    let hash = config.sha256_hex();
    let (x0, x1) = config.strip_or((Dyadic::zero(), Dyadic::one()));
    let mut rows = Vec::new();
    for n in config.n_range() {
        let instance = family_instance(config, n)?;
        let h = instance.tree.height();
        let sigma = StickyMap::sample(&instance.tree, h, derived_seed(config.seed, n, 0))?;
        let kset = KSet::from_sticky(&instance.tree, &sigma)?;
        let note = format!("config_sha256: {hash}");
        let svg = kset.render_svg(&x0, &x1, Some(&note));
        let name = format!("ksigma_{}_n{}_seed{}.svg", config.family, n, config.seed);
        emit(&mut summary, config, &name, svg.as_bytes())?;
        summary.line(format!(
            "n={n}: sampled sticky map over height {h}, {} parallelograms",
            kset.parallelograms.len()
        ));
        if config.check && kset.parallelograms.len() != instance.tree.vertices_at(h).len() {
            summary.fail(format!("n={n}: one parallelogram per leaf expected"));
        }
        rows.push(json!({
            "n": n,
            "height": h,
            "parallelograms": kset.parallelograms.len(),
            "svg": name,
        }));
    }
    let doc = json!({
        "command": "ksigma",
        "config_sha256": hash,
        "family": config.family.to_string(),
        "strip": format!("{x0}..{x1}"),
        "renders": rows,
    });
    emit(&mut summary, config, "ksigma.json", &json_bytes(&doc))?;
    Ok(summary)
}

fn run_measure(config: &ExperimentConfig) -> Result<RunSummary, LabError> {
    let mut summary = RunSummary::default();
    let hash = config.sha256_hex();
    let (x0, x1) = config.strip_or((Dyadic::zero(), Dyadic::one()));
    let ns: Vec<u32> = config.n_range().collect();
    let results: Vec<Result<_, LabError>> = ns
        .par_iter()
        .map(|&n| {
            let instance = family_instance(config, n)?;
            let h = instance.tree.height();
            let sigma = StickyMap::sample(&instance.tree, h, derived_seed(config.seed, n, 0))?;
            let kset = KSet::from_sticky(&instance.tree, &sigma)?;
            let exact = kset.strip_measure_exact(&x0, &x1);
            let mc = kset.strip_measure_mc(&x0, &x1, config.samples, derived_seed(config.seed, n, 1));
            Ok((n, exact, mc))
        })
        .collect();

    let mut csv = Csv::new(&[
        "n", "x0", "x1", "exact", "exact_f64", "mc_estimate", "mc_stderr", "mc_hits",
        "mc_samples", "config_sha256",
    ]);
    let mut rows = Vec::new();
    for result in results {
        let (n, exact, mc) = result?;
        csv.row([
            n.to_string(),
            x0.to_string(),
            x1.to_string(),
            rational_text(&exact),
            approx_text(rat_f64(&exact)),
            approx_text(mc.estimate),
            approx_text(mc.stderr),
            mc.hits.to_string(),
            mc.samples.to_string(),
            hash.clone(),
        ]);
        summary.line(format!(
            "n={n}: |K| over [{x0}, {x1}] = {} ~ {:.6}, mc = {:.6} +- {:.6}",
            rational_text(&exact),
            rat_f64(&exact),
            mc.estimate,
            mc.stderr
        ));
        if config.check {
            let gap = (mc.estimate - rat_f64(&exact)).abs();
            if gap > 3.0 * mc.stderr.max(1e-12) {
                summary.fail(format!(
                    "n={n}: Monte-Carlo estimate {:.6} is {gap:.6} away from the exact value, over 3 standard errors",
                    mc.estimate
                ));
            }
        }
        rows.push(json!({
            "n": n,
            "exact": rational_text(&exact),
            "mc_estimate": mc.estimate,
            "mc_stderr": mc.stderr,
            "mc_hits": mc.hits,
            "mc_samples": mc.samples,
        }));
    }
    emit(&mut summary, config, "measure.csv", &csv.into_bytes())?;
    let doc = json!({
        "command": "measure",
        "config_sha256": hash,
        "family": config.family.to_string(),
        "strip": format!("{x0}..{x1}"),
        "measures": rows,
    });
    emit(&mut summary, config, "measure.json", &json_bytes(&doc))?;
    Ok(summary)
}

fn run_prob(config: &ExperimentConfig) -> Result<RunSummary, LabError> {
    let mut summary = RunSummary::default();
    let hash = config.sha256_hex();
    let x = config.x.clone().unwrap_or_else(Dyadic::one);
    if !x.is_positive() {
        return Err(LabError::Config("x must be positive".to_string()));
    }
    let span = &x + &Dyadic::one();
    let mut docs = Vec::new();
    for n in config.n_range() {
        let instance = family_instance(config, n)?;
        let h = instance.tree.height();
        let ys = match &config.y {
            Some(y) => vec![y.clone()],
            None => grid_points(&span, config.grid_bits, h),
        };
        let mut csv = Csv::new(&[
            "k", "y", "pr_exact", "pr_f64", "mc_estimate", "mc_stderr", "config_sha256",
        ]);
        let mut best = BigRational::zero();
        for (k, y) in ys.iter().enumerate() {
            let exact = match membership_probability_exact(&instance.tree, h, &x, y, config.cap_enum)
            {
                Ok(pr) => Some(pr),
                Err(StickyError::EnumerationCapExceeded { .. }) => None,
                Err(other) => return Err(other.into()),
            };
            let mc = membership_probability_mc(
                &instance.tree,
                h,
                &x,
                y,
                config.samples,
                derived_seed(config.seed, n, k as u64),
            )?;
            if let Some(pr) = &exact {
                if pr > &best {
                    best = pr.clone();
                }
                if config.check {
                    if pr < &BigRational::zero() || pr > &BigRational::one() {
                        summary.fail(format!("n={n}, y={y}: probability {pr} outside [0, 1]"));
                    }
                    let gap = (mc.estimate - rat_f64(pr)).abs();
                    if gap > (4.0 * mc.stderr).max(0.02) {
                        summary.fail(format!(
                            "n={n}, y={y}: Monte-Carlo {:.4} far from exact {:.4}",
                            mc.estimate,
                            rat_f64(pr)
                        ));
                    }
                }
            }
            csv.row([
                k.to_string(),
                y.to_string(),
                exact.as_ref().map(rational_text).unwrap_or_default(),
                exact
                    .as_ref()
                    .map(|pr| approx_text(rat_f64(pr)))
                    .unwrap_or_default(),
                approx_text(mc.estimate),
                approx_text(mc.stderr),
                hash.clone(),
            ]);
        }
        emit(
            &mut summary,
            config,
            &format!("prob_n{n}.csv"),
            &csv.into_bytes(),
        )?;
        summary.line(format!(
            "n={n}: scanned {} points at x = {x}; max exact probability {} ~ {:.6}",
            ys.len(),
            rational_text(&best),
            rat_f64(&best)
        ));
        docs.push(json!({
            "n": n,
            "x": x.to_string(),
            "points": ys.len(),
            "max_pr_exact": rational_text(&best),
        }));
    }
    let doc = json!({
        "command": "prob",
        "config_sha256": hash,
        "family": config.family.to_string(),
        "scans": docs,
    });
    emit(&mut summary, config, "prob.json", &json_bytes(&doc))?;
    Ok(summary)
}

fn run_gtree(config: &ExperimentConfig) -> Result<RunSummary, LabError> {
    let mut summary = RunSummary::default();
    let hash = config.sha256_hex();
    let eta = config.eta.clone();
    let x = match &config.x {
        Some(x) => x.clone(),
        None => witness::x_extent(&eta).map_err(|_| {
            LabError::Config(
                "x is required when eta is not a power of two".to_string(),
            )
        })?,
    };
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let span = &x + &Dyadic::one();
    let mut docs = Vec::new();
    for n in config.n_range() {
        let instance = family_instance(config, n)?;
        let pruned = instance.tree.prune(n)?;
        let h = pruned.height();
        let ys = match &config.y {
            Some(y) => vec![y.clone()],
            None => grid_points(&span, config.grid_bits, h),
        };
        let mut csv = Csv::new(&[
            "k",
            "y",
            "poss_pairs",
            "vertices",
            "tree_height",
            "survival",
            "survival_f64",
            "clean",
            "half_violations",
            "shared_cells",
            "audit_breaches",
            "config_sha256",
        ]);
        let mut best: Option<(BigRational, usize, String)> = None;
        let mut diagnostics = 0usize;
        for (k, y) in ys.iter().enumerate() {
            let report = build_gtree(&pruned, &eta, &x, y)?;
            let survival = report.tree.survival_probability(&half);
            diagnostics +=
                report.half_violations.len() + report.shared_cells.len() + report.audits.len();
            if config.check {
                match membership_probability_exact(&pruned, h, &x, y, config.cap_enum) {
                    Ok(pr) => {
                        if pr > survival {
                            summary.fail(format!(
                                "n={n}, y={y}: membership {} exceeds survival {}",
                                rational_text(&pr),
                                rational_text(&survival)
                            ));
                        }
                    }
                    Err(StickyError::EnumerationCapExceeded { .. }) => {}
                    Err(other) => return Err(other.into()),
                }
            }
            csv.row([
                k.to_string(),
                y.to_string(),
                report.poss.pairs.len().to_string(),
                report.tree.len().to_string(),
                report.tree.height().to_string(),
                rational_text(&survival),
                approx_text(rat_f64(&survival)),
                report.is_clean().to_string(),
                report.half_violations.len().to_string(),
                report.shared_cells.len().to_string(),
                report.audits.len().to_string(),
                hash.clone(),
            ]);
            let better = match &best {
                None => true,
                Some((s, _, _)) => survival > *s,
            };
            if better {
                best = Some((survival, k, report.tree.to_text()));
            }
        }
        emit(
            &mut summary,
            config,
            &format!("gtree_n{n}.csv"),
            &csv.into_bytes(),
        )?;
        let (best_survival, best_k, best_text) = best.expect("at least one grid point");
        emit(
            &mut summary,
            config,
            &format!("gtree_n{n}.txt"),
            &tree_text_artifact(&hash, &best_text),
        )?;
        summary.line(format!(
            "n={n}: {} points at x = {x}, eta = {eta}; best survival {} ~ {:.6} (point {best_k}); {diagnostics} diagnostics",
            ys.len(),
            rational_text(&best_survival),
            rat_f64(&best_survival)
        ));
        docs.push(json!({
            "n": n,
            "x": x.to_string(),
            "eta": eta.to_string(),
            "points": ys.len(),
            "best_survival": rational_text(&best_survival),
            "diagnostics": diagnostics,
        }));
    }
    let doc = json!({
        "command": "gtree",
        "config_sha256": hash,
        "family": config.family.to_string(),
        "scans": docs,
    });
    emit(&mut summary, config, "gtree.json", &json_bytes(&doc))?;
    Ok(summary)
}

fn run_percolation(config: &ExperimentConfig) -> Result<RunSummary, LabError> {
    let mut summary = RunSummary::default();
    let hash = config.sha256_hex();
    let half_dyadic = Dyadic::pow2(-1);
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let bounds = binary_perco::survival_bounds(config.n_hi, &half_dyadic, 192);
    let mut csv = Csv::new(&[
        "n", "exact", "lo", "hi", "n_times_lo", "n_times_hi", "config_sha256",
    ]);
    let mut rows = Vec::new();
    for n in config.n_range() {
        let b = &bounds[n as usize];
        let exact = if n <= 12 {
            Some(binary_perco::survival_exact(n, &half))
        } else {
            None
        };
        let lo = b.lo.to_f64();
        let hi = b.hi.to_f64();
        csv.row([
            n.to_string(),
            exact.as_ref().map(rational_text).unwrap_or_default(),
            format!("{lo:.12}"),
            format!("{hi:.12}"),
            format!("{:.8}", f64::from(n) * lo),
            format!("{:.8}", f64::from(n) * hi),
            hash.clone(),
        ]);
        rows.push(json!({
            "n": n,
            "exact": exact.as_ref().map(rational_text),
            "lo": lo,
            "hi": hi,
        }));
    }
    summary.line(format!(
        "survival at p = 1/2 for heights {}..={}; s({}) in [{:.8}, {:.8}], scaled {:.5}",
        config.n_lo,
        config.n_hi,
        config.n_hi,
        bounds[config.n_hi as usize].lo.to_f64(),
        bounds[config.n_hi as usize].hi.to_f64(),
        f64::from(config.n_hi) * bounds[config.n_hi as usize].lo.to_f64(),
    ));
    if config.check {
        if binary_perco::survival_exact(1, &half) != BigRational::new(3.into(), 4.into()) {
            summary.fail("s(1) is not 3/4".to_string());
        }
        if binary_perco::survival_exact(2, &half) != BigRational::new(39.into(), 64.into()) {
            summary.fail("s(2) is not 39/64".to_string());
        }
        for n in 1..=config.n_hi as usize {
            if bounds[n].hi >= bounds[n - 1].lo {
                summary.fail(format!("no certified decrease from height {} to {n}", n - 1));
            }
        }
        let twenty = Dyadic::from_int(20);
        for n in 50..=config.n_hi as usize {
            let n_dy = Dyadic::from_int(n as i64);
            let m_dy = Dyadic::from_int(n as i64 - 1);
            let d_hi = &(&n_dy * &bounds[n].hi) - &(&m_dy * &bounds[n - 1].lo);
            let d_lo = &(&n_dy * &bounds[n].lo) - &(&m_dy * &bounds[n - 1].hi);
            let worst = if d_hi.abs() > d_lo.abs() {
                d_hi.abs()
            } else {
                d_lo.abs()
            };
            if &twenty * &worst >= Dyadic::one() {
                summary.fail(format!("scaled survival still moving at height {n}"));
            }
        }
    }
    emit(&mut summary, config, "percolation.csv", &csv.into_bytes())?;
    let doc = json!({
        "command": "percolation",
        "config_sha256": hash,
        "p": "1/2",
        "precision_bits": 192,
        "levels": rows,
    });
    emit(&mut summary, config, "percolation.json", &json_bytes(&doc))?;
    Ok(summary)
}

fn run_counterexample(config: &ExperimentConfig) -> Result<RunSummary, LabError> {
    let mut summary = RunSummary::default();
    let hash = config.sha256_hex();
    let mut rows = Vec::new();
    let mut csv = Csv::new(&[
        "n",
        "x",
        "y",
        "pr_exact",
        "total_maps",
        "hitting_maps",
        "mc_hits",
        "mc_samples",
        "config_sha256",
    ]);
    for n in config.n_range() {
        // The forced-hit construction lives on the tournament family, no
        // matter which family the rest of the configuration talks about.
        let instance = families::generate(Family::Tournament, n)?;
        if instance.depth > config.cap_depth {
            return Err(LabError::DepthCap {
                depth: instance.depth,
                cap: config.cap_depth,
            });
        }
        let h = instance.tree.height();
        let (x, y) = families::forced_hit_point(n);
        let pr = membership_probability_exact(&instance.tree, h, &x, &y, config.cap_enum)?;
        let total = sticky::count_sticky_maps(&instance.tree, h);
        let total_int = BigInt::from(total);
        let hitting = &pr * &BigRational::from_integer(total_int.clone());
        let hitting_text = if hitting.is_integer() {
            hitting.numer().to_string()
        } else {
            rational_text(&hitting)
        };
        let mc = if config.samples > 0 {
            Some(membership_probability_mc(
                &instance.tree,
                h,
                &x,
                &y,
                config.samples,
                derived_seed(config.seed, n, 2),
            )?)
        } else {
            None
        };
        let pr_text = if pr.is_one() {
            "1".to_string()
        } else {
            rational_text(&pr)
        };
        let mut line = format!(
            "n={n}: Pr = {pr_text} (exact), {hitting_text}/{total_int} maps hit ({x}, {y})"
        );
        if let Some(mc) = &mc {
            line.push_str(&format!(", mc {}/{} hits", mc.hits, mc.samples));
        }
        summary.line(line);
        if config.check {
            if !pr.is_one() {
                summary.fail(format!(
                    "n={n}: forced point has probability {} instead of 1",
                    rational_text(&pr)
                ));
            }
            if let Some(mc) = &mc {
                if mc.hits != mc.samples {
                    summary.fail(format!(
                        "n={n}: {}/{} sampled maps hit the forced point",
                        mc.hits, mc.samples
                    ));
                }
            }
        }
        csv.row([
            n.to_string(),
            x.to_string(),
            y.to_string(),
            rational_text(&pr),
            total_int.to_string(),
            hitting_text.clone(),
            mc.as_ref().map(|m| m.hits.to_string()).unwrap_or_default(),
            mc.as_ref()
                .map(|m| m.samples.to_string())
                .unwrap_or_default(),
            hash.clone(),
        ]);

        // Per-assignment witness table: which restricted sticky maps hit
        // the point, and via which base-to-leaf pair.
        let poss = poss_set(&instance.tree, h, &x, &y);
        let assignments =
            sticky::enumerate_restricted(&instance.tree, h, &poss.bases(), config.cap_enum)?;
        let mut wcsv = Csv::new(&["assignment", "weight", "hit", "witness_pairs", "config_sha256"]);
        for (index, assignment) in assignments.iter().enumerate() {
            let matched: Vec<String> = poss
                .pairs
                .iter()
                .filter(|pair| assignment.images.get(&pair.base) == Some(&pair.leaf))
                .map(|pair| format!("{}->{}", pair.base, pair.leaf))
                .collect();
            wcsv.row([
                index.to_string(),
                assignment.weight.to_string(),
                (!matched.is_empty()).to_string(),
                matched.join(";"),
                hash.clone(),
            ]);
        }
        emit(
            &mut summary,
            config,
            &format!("witness_n{n}.csv"),
            &wcsv.into_bytes(),
        )?;

        rows.push(json!({
            "n": n,
            "x": x.to_string(),
            "y": y.to_string(),
            "pr_exact": rational_text(&pr),
            "total_maps": total_int.to_string(),
            "hitting_maps": hitting_text,
            "mc_hits": mc.as_ref().map(|m| m.hits),
            "mc_samples": mc.as_ref().map(|m| m.samples),
        }));
    }
    emit(&mut summary, config, "counterexample.csv", &csv.into_bytes())?;
    let doc = json!({
        "command": "counterexample",
        "config_sha256": hash,
        "family": Family::Tournament.to_string(),
        "points": rows,
    });
    emit(
        &mut summary,
        config,
        "counterexample.json",
        &json_bytes(&doc),
    )?;
    Ok(summary)
}

fn run_separation_scan(config: &ExperimentConfig) -> Result<RunSummary, LabError> {
    let mut summary = RunSummary::default();
    let hash = config.sha256_hex();
    let mut csv = Csv::new(&["n", "eta_max", "eta_f64", "config_sha256"]);
    let mut rows = Vec::new();
    let mut constrained: Vec<(u32, Dyadic)> = Vec::new();
    for n in config.n_range() {
        let instance = family_instance(config, n)?;
        let eta = instance.tree.separation_eta_max();
        let (text, approx) = match eta.value() {
            Some(v) => (v.to_string(), approx_text(v.to_f64())),
            None => ("unconstrained".to_string(), String::new()),
        };
        if let Some(v) = eta.value() {
            constrained.push((n, v.clone()));
        }
        summary.line(format!("n={n}: eta_max = {text}"));
        csv.row([n.to_string(), text.clone(), approx, hash.clone()]);
        rows.push(json!({"n": n, "eta_max": text}));
    }
    if config.check {
        for pair in constrained.windows(2) {
            if pair[1].1 > pair[0].1 {
                summary.fail(format!(
                    "eta_max increases from n={} to n={}",
                    pair[0].0, pair[1].0
                ));
            }
        }
        if config.family == Family::Vanishing && constrained.len() >= 2 {
            let first = &constrained[0];
            let last = &constrained[constrained.len() - 1];
            if last.1 >= first.1 {
                summary.fail(format!(
                    "separation does not vanish: eta_max(n={}) = {} is not below eta_max(n={}) = {}",
                    last.0, last.1, first.0, first.1
                ));
            }
        }
    }
    emit(
        &mut summary,
        config,
        "separation_scan.csv",
        &csv.into_bytes(),
    )?;
    let doc = json!({
        "command": "separation-scan",
        "config_sha256": hash,
        "family": config.family.to_string(),
        "orders": rows,
    });
    emit(
        &mut summary,
        config,
        "separation_scan.json",
        &json_bytes(&doc),
    )?;
    Ok(summary)
}

struct ScalingRow {
    n: u32,
    mean_k1: BigRational,
    min_k1: BigRational,
    mean_k2: BigRational,
    min_k2: BigRational,
}

fn run_lemma_scaling(config: &ExperimentConfig) -> Result<RunSummary, LabError> {
    let mut summary = RunSummary::default();
    let hash = config.sha256_hex();
    let second = config.strip.clone().map(Ok).unwrap_or_else(|| {
        witness::second_strip(&config.eta).map_err(|_| {
            LabError::Config("strip is required when eta is not a power of two".to_string())
        })
    })?;
    let unit = (Dyadic::zero(), Dyadic::one());
    let mut csv = Csv::new(&[
        "n",
        "draws",
        "mean_k1",
        "min_k1",
        "mean_k2",
        "min_k2",
        "mean_k2_times_n",
        "min_k1_scaled",
        "config_sha256",
    ]);
    let mut rows: Vec<ScalingRow> = Vec::new();
    let mut docs = Vec::new();
    for n in config.n_range() {
        let instance = family_instance(config, n)?;
        let pruned = instance.tree.prune(n)?;
        let h = pruned.height();
        let draws: Vec<Result<(BigRational, BigRational), LabError>> = (0..config.draws)
            .into_par_iter()
            .map(|d| {
                let sigma =
                    StickyMap::sample(&pruned, h, derived_seed(config.seed, n, u64::from(d)))?;
                let kset = KSet::from_sticky(&pruned, &sigma)?;
                let a1 = kset.strip_measure_exact(&unit.0, &unit.1);
                let a2 = kset.strip_measure_exact(&second.0, &second.1);
                Ok((a1, a2))
            })
            .collect();
        let mut sum1 = BigRational::zero();
        let mut sum2 = BigRational::zero();
        let mut min1: Option<BigRational> = None;
        let mut min2: Option<BigRational> = None;
        for draw in draws {
            let (a1, a2) = draw?;
            sum1 += &a1;
            sum2 += &a2;
            min1 = Some(match min1 {
                Some(m) if m <= a1 => m,
                _ => a1,
            });
            min2 = Some(match min2 {
                Some(m) if m <= a2 => m,
                _ => a2,
            });
        }
        let count = BigRational::from_integer(BigInt::from(config.draws));
        let row = ScalingRow {
            n,
            mean_k1: &sum1 / &count,
            min_k1: min1.expect("draws is positive"),
            mean_k2: &sum2 / &count,
            min_k2: min2.expect("draws is positive"),
        };
        let scaled_mean2 = rat_f64(&row.mean_k2) * f64::from(n);
        let scaled_min1 = if n >= 2 {
            rat_f64(&row.min_k1) * f64::from(n) / f64::from(n).ln()
        } else {
            f64::NAN
        };
        csv.row([
            n.to_string(),
            config.draws.to_string(),
            rational_text(&row.mean_k1),
            rational_text(&row.min_k1),
            rational_text(&row.mean_k2),
            rational_text(&row.min_k2),
            approx_text(scaled_mean2),
            if n >= 2 {
                approx_text(scaled_min1)
            } else {
                String::new()
            },
            hash.clone(),
        ]);
        summary.line(format!(
            "n={n}: over {} sticky maps, mean |K1| ~ {:.6}, min |K1| ~ {:.6}, mean |K2| ~ {:.6} (times n: {:.4})",
            config.draws,
            rat_f64(&row.mean_k1),
            rat_f64(&row.min_k1),
            rat_f64(&row.mean_k2),
            scaled_mean2
        ));
        docs.push(json!({
            "n": n,
            "mean_k1": rational_text(&row.mean_k1),
            "min_k1": rational_text(&row.min_k1),
            "mean_k2": rational_text(&row.mean_k2),
            "min_k2": rational_text(&row.min_k2),
        }));
        rows.push(row);
    }
    if config.check && rows.len() >= 2 {
        let base = &rows[0];
        let base_mean2 = rat_f64(&base.mean_k2) * f64::from(base.n);
        let base_min1 =
            rat_f64(&base.min_k1) * f64::from(base.n) / f64::from(base.n.max(2)).ln();
        for row in &rows[1..] {
            let scaled2 = rat_f64(&row.mean_k2) * f64::from(row.n);
            if scaled2 > 2.0 * base_mean2 || scaled2 < base_mean2 / 2.0 {
                summary.fail(format!(
                    "n={}: mean |K2| times n is {scaled2:.4}, outside a factor 2 of {base_mean2:.4}",
                    row.n
                ));
            }
            if row.n >= 2 {
                let scaled1 = rat_f64(&row.min_k1) * f64::from(row.n) / f64::from(row.n).ln();
                if scaled1 < base_min1 / 2.0 {
                    summary.fail(format!(
                        "n={}: min |K1| n / log n dropped to {scaled1:.4}, under half of {base_min1:.4}",
                        row.n
                    ));
                }
            }
        }
    }
    emit(&mut summary, config, "lemma_scaling.csv", &csv.into_bytes())?;
    let doc = json!({
        "command": "lemma-scaling",
        "config_sha256": hash,
        "family": config.family.to_string(),
        "second_strip": format!("{}..{}", second.0, second.1),
        "orders": docs,
    });
    emit(&mut summary, config, "lemma_scaling.json", &json_bytes(&doc))?;
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::TempDir;

    fn config_with(pairs: &[(&str, &str)]) -> ExperimentConfig {
        let mut config = ExperimentConfig::default();
        for (key, value) in pairs {
            config.apply(key, value).unwrap();
        }
        config
    }

    #[test]
    fn command_names_round_trip() {
        for command in Command::all() {
            assert_eq!(Command::from_name(command.name()), Some(command));
        }
        assert_eq!(Command::from_name("no-such"), None);
    }

    #[test]
    fn tree_info_reports_lambda_for_a_direction_list() {
        let config = config_with(&[
            ("directions", "1/2^1,1/2^2,1/2^3"),
            ("depth", "6"),
            ("check", "true"),
        ]);
        let summary = run(Command::TreeInfo, &config).unwrap();
        assert!(summary.check_failures.is_empty(), "{:?}", summary.check_failures);
        assert!(summary.lines[0].contains("lambda = 2"), "{:?}", summary.lines);
    }

    #[test]
    fn counterexample_reports_certainty_at_order_one() {
        let config = config_with(&[("N", "1"), ("samples", "200"), ("check", "true")]);
        let summary = run(Command::Counterexample, &config).unwrap();
        assert!(summary.check_failures.is_empty(), "{:?}", summary.check_failures);
        assert!(
            summary.lines[0].contains("Pr = 1 (exact), 4/4 maps hit"),
            "{:?}",
            summary.lines
        );
        assert!(
            summary.lines[0].contains("(1/2^0, 71/2^6)"),
            "{:?}",
            summary.lines
        );
        assert!(summary.lines[0].contains("mc 200/200 hits"));
    }

    #[test]
    fn percolation_passes_its_own_checks() {
        let config = config_with(&[("N", "1..60"), ("check", "true")]);
        let summary = run(Command::Percolation, &config).unwrap();
        assert!(summary.check_failures.is_empty(), "{:?}", summary.check_failures);
    }

    #[test]
    fn artifacts_embed_the_config_hash_and_reproduce() {
        let dir_a = TempDir::new().unwrap();
        let dir_b = TempDir::new().unwrap();
        let mut config = config_with(&[("N", "2"), ("samples", "500"), ("draws", "8")]);
        let hash = config.sha256_hex();

        config.out = Some(dir_a.path().to_path_buf());
        let first = run(Command::Measure, &config).unwrap();
        config.out = Some(dir_b.path().to_path_buf());
        let second = run(Command::Measure, &config).unwrap();
        assert_eq!(first.artifacts.len(), second.artifacts.len());
        assert!(!first.artifacts.is_empty());
        for (a, b) in first.artifacts.iter().zip(&second.artifacts) {
            let bytes_a = std::fs::read(a).unwrap();
            let bytes_b = std::fs::read(b).unwrap();
            assert_eq!(bytes_a, bytes_b, "artifact differs: {a:?} vs {b:?}");
            assert!(
                String::from_utf8_lossy(&bytes_a).contains(&hash),
                "missing hash in {a:?}"
            );
        }
    }

    #[test]
    fn gtree_scan_stays_dominated_on_the_separated_family() {
        let config = config_with(&[("N", "2"), ("grid", "3"), ("check", "true"), ("samples", "50")]);
        let summary = run(Command::Gtree, &config).unwrap();
        assert!(summary.check_failures.is_empty(), "{:?}", summary.check_failures);
    }

    #[test]
    fn separation_scan_sees_the_vanishing_family_decay() {
        let config = config_with(&[("family", "vanishing"), ("N", "1..4"), ("check", "true")]);
        let summary = run(Command::SeparationScan, &config).unwrap();
        assert!(summary.check_failures.is_empty(), "{:?}", summary.check_failures);
        assert_eq!(summary.lines.len(), 4);
    }

    #[test]
    fn lemma_scaling_emits_scaled_statistics() {
        let dir = TempDir::new().unwrap();
        let mut config = config_with(&[("N", "2..3"), ("draws", "12"), ("check", "true")]);
        config.out = Some(dir.path().to_path_buf());
        let summary = run(Command::LemmaScaling, &config).unwrap();
        assert!(summary.check_failures.is_empty(), "{:?}", summary.check_failures);
        assert_eq!(summary.artifacts.len(), 2);
    }
}
