//! The named experiments.

use std::f64::consts::FRAC_PI_2;
use std::path::Path;
use std::time::Instant;

use kerrloss::fock::tensor_product;
use kerrloss::observables::COVERAGE_TOL;
use kerrloss::oracle::build_collective_generator;
use kerrloss::{
    bs_half_loss_wigner, build_cross_kerr_generator, coherent_density, conditioned_cat, correlated_cat_asymptotic,
    evolve_exact, integrate, min_wigner, negativity_trace, project_quadrature, purity, purity_exact, q_function,
    wigner, CoherentAmplitude, DensityOperator, FockCutoff, KerrLossParams, ModeIndex, PhaseSpaceGrid,
    QuadratureOutcome, SingleModeDensity, TimeSeries, TwoModeDensity, C64,
};
use serde_json::{json, Map, Value};

use crate::config::{KerrForm, PanelSet, Scenario, ScenarioConfig};
use crate::error::CliError;
use crate::output::{self, OutputRecord, RunManifest, ValidationSummary};

/// One row of the standard loss table; rates in units of `chi`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Panel {
    pub label: &'static str,
    pub gamma1: f64,
    pub gamma2: f64,
    pub gamma12: f64,
}

pub const PANELS: [Panel; 6] = [
    Panel { label: "a", gamma1: 0.0, gamma2: 0.0, gamma12: 0.0 },
    Panel { label: "b", gamma1: 10.0, gamma2: 10.0, gamma12: 10.0 },
    Panel { label: "c", gamma1: 3.0, gamma2: 3.0, gamma12: 0.0 },
    Panel { label: "d", gamma1: 3.0, gamma2: 3.0, gamma12: 3.0 },
    Panel { label: "e", gamma1: 0.5, gamma2: 0.5, gamma12: 0.0 },
    Panel { label: "f", gamma1: 3.0, gamma2: 3.0, gamma12: 2.95 },
];

impl Panel {
    pub fn params(&self, chi: f64) -> KerrLossParams {
        KerrLossParams::symmetric_kerr(chi)
            .with_loss(self.gamma1 * chi, self.gamma2 * chi)
            .with_cross_loss(self.gamma12 * chi)
    }
}

/// Cross-Kerr evolution of `|α₁⟩|α₂⟩` for time `t` followed by an
/// `x`-quadrature measurement of mode 2.
pub fn crescent_state(
    alpha1: CoherentAmplitude,
    alpha2: CoherentAmplitude,
    p: &KerrLossParams,
    t: f64,
    x: f64,
    cutoff: FockCutoff,
) -> kerrloss::Result<QuadratureOutcome> {
    let rho = evolve_exact(alpha1, alpha2, t, p, cutoff)?;
    Ok(project_quadrature(&rho, ModeIndex::Second, x))
}

/// Minimum and coverage of one emitted Wigner grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldSummary {
    pub min: f64,
    pub at: C64,
    pub normalization_defect: f64,
    pub coverage_ok: bool,
}

impl FieldSummary {
    fn json(&self) -> Value {
        json!({
            "min": self.min,
            "at": [self.at.re, self.at.im],
            "normalization_defect": self.normalization_defect,
            "coverage_ok": self.coverage_ok,
        })
    }
}

struct Ctx<'a> {
    dir: &'a Path,
    cfg: &'a ScenarioConfig,
    manifest: &'a mut RunManifest,
    validation: ValidationSummary,
}

impl Ctx<'_> {
    fn grid(&self) -> Result<PhaseSpaceGrid, CliError> {
        Ok(PhaseSpaceGrid::square(self.cfg.grid_extent, self.cfg.grid_points)?)
    }

    fn record(&mut self, name: &str, schema: &'static str, rows: usize, norm: Option<(f64, bool)>) {
        self.manifest.outputs.push(OutputRecord {
            path: name.to_string(),
            schema,
            rows,
            normalization_defect: norm.map(|n| n.0),
            coverage_ok: norm.map(|n| n.1),
        });
    }

    fn field_summary(&mut self, name: &str, field: &kerrloss::ScalarField) -> FieldSummary {
        let normalization_defect = (field.riemann_integral() - 1.0).abs();
        let coverage_ok = normalization_defect <= COVERAGE_TOL;
        if !coverage_ok {
            self.manifest
                .warnings
                .push(format!("{name}: grid misses part of the state (normalization defect {normalization_defect:.3e})"));
        }
        let (min, at) = field.min();
        FieldSummary {
            min,
            at,
            normalization_defect,
            coverage_ok,
        }
    }

    /// Writes the Wigner grid of `rho`; the minimum is refined when the grid
    /// covers the state.
    fn emit_wigner(&mut self, name: &str, rho: &SingleModeDensity) -> Result<FieldSummary, CliError> {
        let grid = self.grid()?;
        let field = wigner(rho, grid.clone());
        let mut s = self.field_summary(name, &field);
        if s.coverage_ok {
            let m = min_wigner(rho, grid)?;
            s.min = m.value;
            s.at = m.at;
        }
        let rows = output::write_field(&self.dir.join(name), &field)?;
        self.record(name, "re,im,value", rows, Some((s.normalization_defect, s.coverage_ok)));
        Ok(s)
    }

    fn emit_field(&mut self, name: &str, field: &kerrloss::ScalarField, wigner_like: bool) -> Result<FieldSummary, CliError> {
        let s = if wigner_like {
            self.field_summary(name, field)
        } else {
            let (min, at) = field.min();
            FieldSummary {
                min,
                at,
                normalization_defect: (field.riemann_integral() - 1.0).abs(),
                coverage_ok: true,
            }
        };
        let rows = output::write_field(&self.dir.join(name), field)?;
        let norm = wigner_like.then_some((s.normalization_defect, s.coverage_ok));
        self.record(name, "re,im,value", rows, norm);
        Ok(s)
    }

    fn emit_series(&mut self, name: &str, s: &TimeSeries) -> Result<(), CliError> {
        let rows = output::write_series(&self.dir.join(name), s)?;
        self.record(name, "t,value", rows, None);
        Ok(())
    }

    fn result(&mut self, key: &str, v: Value) {
        self.manifest.results.insert(key.to_string(), v);
    }
}

fn product(a1: CoherentAmplitude, a2: CoherentAmplitude, c: FockCutoff) -> kerrloss::Result<TwoModeDensity> {
    tensor_product(&coherent_density(a1, c)?, &coherent_density(a2, c)?)
}

fn exact_vs_oracle(ctx: &mut Ctx) -> Result<(), CliError> {
    let cfg = ctx.cfg;
    let p = cfg.params();
    let c = cfg.fock_cutoff()?;
    let big = FockCutoff::new(c.n_max() + cfg.padding)?;
    let gen = build_cross_kerr_generator(&p, big)?;
    let mut state = product(cfg.alpha1, cfg.alpha2, big)?;
    let mut now = 0.0;
    let mut rows = Vec::new();
    for &t in &cfg.t_samples {
        state = integrate(&state, &gen, t - now, cfg.tol)?;
        now = t;
        let oracle = state.restrict(c)?.normalized();
        let exact = evolve_exact(cfg.alpha1, cfg.alpha2, t, &p, c)?;
        ctx.validation.check(&exact);
        ctx.validation.check(&oracle);
        rows.push((t, exact.max_abs_diff(&oracle), (state.trace().re - 1.0).abs()));
    }
    let n = output::write_comparison(&ctx.dir.join("comparison.csv"), &rows)?;
    ctx.record("comparison.csv", "t,max_abs_diff,trace_defect", n, None);
    let worst = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    ctx.result("max_abs_diff", json!(worst));
    ctx.result("cutoff", json!(c.n_max()));
    ctx.result("oracle_cutoff", json!(big.n_max()));
    Ok(())
}

fn purity_scan(ctx: &mut Ctx) -> Result<(), CliError> {
    let cfg = ctx.cfg;
    let p = cfg.params();
    let mut s = TimeSeries::default();
    for &t in &cfg.t_samples {
        s.t.push(t);
        s.values.push(purity_exact(cfg.alpha1, cfg.alpha2, t, &p)?);
    }
    ctx.emit_series("purity.csv", &s)?;
    if let Some((t, value)) = s.last() {
        let rho = evolve_exact(cfg.alpha1, cfg.alpha2, t, &p, cfg.fock_cutoff()?)?;
        ctx.validation.check(&rho);
        ctx.result("final_purity", json!(value));
        ctx.result("final_matrix_purity", json!(purity(&rho)));
    }
    let min = s.values.iter().cloned().fold(f64::INFINITY, f64::min);
    ctx.result("min_purity", json!(min));
    Ok(())
}

fn generation_vs_propagation(ctx: &mut Ctx) -> Result<(), CliError> {
    let cfg = ctx.cfg;
    let c = cfg.fock_cutoff()?;
    let t = cfg.t.unwrap_or_default();
    let lossless = crescent_state(cfg.alpha1, cfg.alpha2, &KerrLossParams::cross_kerr(cfg.chi), t, cfg.x, c)?;
    let generated = crescent_state(cfg.alpha1, cfg.alpha2, &cfg.params(), t, cfg.x, c)?;
    let (clean, lossy) = (lossless.state.normalized(), generated.state.normalized());
    ctx.validation.check(&clean);
    ctx.validation.check(&lossy);
    let w0 = ctx.emit_wigner("wigner_lossless.csv", &clean)?;
    let w1 = ctx.emit_wigner("wigner_generation_loss.csv", &lossy)?;
    let bs = bs_half_loss_wigner(&clean, ctx.grid()?);
    let w2 = ctx.emit_field("wigner_propagation_loss.csv", &bs, true)?;
    ctx.result("lossless", w0.json());
    ctx.result("generation_loss", w1.json());
    ctx.result("propagation_loss", w2.json());
    ctx.result("probability_density_lossless", json!(lossless.probability_density));
    ctx.result("probability_density_generation_loss", json!(generated.probability_density));
    Ok(())
}

fn crescent(ctx: &mut Ctx) -> Result<(), CliError> {
    let cfg = ctx.cfg;
    let c = cfg.fock_cutoff()?;
    let out = crescent_state(cfg.alpha1, cfg.alpha2, &cfg.params(), cfg.t.unwrap_or_default(), cfg.x, c)?;
    let rho = out.state.normalized();
    ctx.validation.check(&rho);
    let w = ctx.emit_wigner("wigner.csv", &rho)?;
    let q = q_function(&rho, ctx.grid()?);
    let qs = ctx.emit_field("q.csv", &q, false)?;
    ctx.result("wigner", w.json());
    ctx.result("q_min", json!(qs.min));
    ctx.result("probability_density", json!(out.probability_density));
    Ok(())
}

fn conditioned(ctx: &mut Ctx) -> Result<(), CliError> {
    let cfg = ctx.cfg;
    let t = cfg.t.unwrap_or(FRAC_PI_2 / cfg.chi);
    let c = cfg.fock_cutoff()?;
    let panels: Vec<(String, KerrLossParams)> = match cfg.panels {
        PanelSet::All => PANELS.iter().map(|p| (p.label.to_string(), p.params(cfg.chi))).collect(),
        PanelSet::Single => vec![("single".into(), cfg.params())],
    };
    let mut rows = Vec::new();
    let mut summary = Map::new();
    for (label, p) in panels {
        let cat = conditioned_cat(cfg.alpha1, cfg.alpha2, t, &p, c)?;
        ctx.validation.check(&cat.state);
        let w = ctx.emit_wigner(&format!("wigner_{label}.csv"), &cat.state)?;
        rows.push(vec![
            label.clone(),
            output::cell(p.gamma1),
            output::cell(p.gamma2),
            output::cell(p.gamma12),
            output::cell(cat.success_probability),
            output::cell(w.min),
            output::cell(w.at.re),
            output::cell(w.at.im),
            output::cell(w.normalization_defect),
        ]);
        let mut entry = w.json();
        entry["success_probability"] = json!(cat.success_probability);
        summary.insert(label, entry);
    }
    let header = "panel,gamma1,gamma2,gamma12,success_probability,min_wigner,min_re,min_im,normalization_defect";
    let n = output::write_table(&ctx.dir.join("summary.csv"), header, rows)?;
    ctx.record("summary.csv", "panel summary", n, None);
    ctx.result("t", json!(t));
    ctx.result("panels", Value::Object(summary));
    Ok(())
}

fn correlated_vs_uncorrelated(ctx: &mut Ctx) -> Result<(), CliError> {
    let cfg = ctx.cfg;
    let c = cfg.fock_cutoff()?;
    let p = cfg.params();
    let rho0 = product(cfg.alpha1, cfg.alpha2, c)?;
    let cat = if cfg.kerr == KerrForm::Symmetric {
        correlated_cat_asymptotic(cfg.alpha1, cfg.alpha2, &p, None).ok().map(|r| r.0)
    } else {
        None
    };
    let variants = [("correlated", p), ("uncorrelated", p.with_cross_loss(0.0).with_cross_dephasing(0.0))];
    for (name, params) in variants {
        let gen = build_cross_kerr_generator(&params, c)?;
        let (mut state, mut now) = (rho0.clone(), 0.0);
        let mut pur = TimeSeries::default();
        let mut fid = TimeSeries::default();
        for &t in &cfg.t_samples {
            state = integrate(&state, &gen, t - now, cfg.tol)?;
            now = t;
            pur.t.push(t);
            pur.values.push(purity(&state));
            if let Some(cat) = &cat {
                fid.t.push(t);
                fid.values.push(cat.fidelity(&state)?);
            }
        }
        ctx.validation.check(&state);
        ctx.emit_series(&format!("purity_{name}.csv"), &pur)?;
        if cat.is_some() {
            ctx.emit_series(&format!("fidelity_{name}.csv"), &fid)?;
            ctx.result(&format!("final_cat_fidelity_{name}"), json!(fid.last().map(|x| x.1)));
        }
        ctx.result(&format!("final_purity_{name}"), json!(pur.last().map(|x| x.1)));
    }
    Ok(())
}

fn beamsplit(ctx: &mut Ctx) -> Result<(), CliError> {
    let cfg = ctx.cfg;
    let mut asymptotes = Map::new();
    for &gbar in &cfg.gamma_bar {
        let s = negativity_trace(cfg.g1, cfg.g2, cfg.delta_w, cfg.chi_c, gbar, &cfg.t_samples)?;
        ctx.emit_series(&format!("negativity_gbar_{gbar}.csv"), &s)?;
        let (t, value) = s.last().expect("t_samples checked non-empty");
        let c = FockCutoff::new(1)?;
        let rho = kerrloss::beamsplit_decoherence_evolve(
            cfg.g1,
            cfg.g2,
            cfg.delta_w,
            cfg.chi_c,
            gbar,
            t,
            &TwoModeDensity::fock(1, 0, c),
        )?;
        ctx.validation.check(&rho);
        asymptotes.insert(gbar.to_string(), json!(value));
    }
    // the closed form is checked once against the integrator at the last sample
    if let (Some(&gbar), Some(&t)) = (cfg.gamma_bar.first(), cfg.t_samples.last()) {
        let c = FockCutoff::new(1)?;
        let rho0 = TwoModeDensity::fock(1, 0, c);
        let gen = build_collective_generator(cfg.g1, cfg.g2, cfg.delta_w, cfg.chi_c, gbar, 0.0, c)?;
        let oracle = integrate(&rho0, &gen, t, cfg.tol)?;
        let closed = kerrloss::beamsplit_decoherence_evolve(cfg.g1, cfg.g2, cfg.delta_w, cfg.chi_c, gbar, t, &rho0)?;
        ctx.result("oracle_max_abs_diff", json!(closed.max_abs_diff(&oracle)));
    }
    ctx.result("final_negativity", Value::Object(asymptotes));
    Ok(())
}

fn echo(cfg: &ScenarioConfig) -> Map<String, Value> {
    cfg.entries.0.iter().map(|(k, v)| (k.clone(), Value::String(v.clone()))).collect()
}

/// Runs one scenario into `dir` and writes its manifest there, also on
/// failure.
pub fn run(cfg: &ScenarioConfig, dir: &Path) -> (RunManifest, Result<(), CliError>) {
    let start = Instant::now();
    let mut manifest = RunManifest::new(Some(cfg.scenario.to_string()), echo(cfg));
    let result = std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Io(dir.to_path_buf(), e))
        .and_then(|_| {
            let mut ctx = Ctx {
                dir,
                cfg,
                manifest: &mut manifest,
                validation: ValidationSummary::new(cfg.validation_tol),
            };
            let r = match cfg.scenario {
                Scenario::ExactVsOracle => exact_vs_oracle(&mut ctx),
                Scenario::PurityScan => purity_scan(&mut ctx),
                Scenario::GenerationVsPropagationLoss => generation_vs_propagation(&mut ctx),
                Scenario::ConditionedCat => conditioned(&mut ctx),
                Scenario::CorrelatedVsUncorrelated => correlated_vs_uncorrelated(&mut ctx),
                Scenario::BeamsplitDecoherence => beamsplit(&mut ctx),
                Scenario::CrescentState => crescent(&mut ctx),
            };
            let v = ctx.validation;
            let passed = v.passed();
            let worst = v.worst();
            manifest.validation = Some(v);
            r?;
            if passed {
                Ok(())
            } else {
                Err(CliError::Validation(format!(
                    "state defect {worst:.3e} exceeds validation_tol {:.3e}",
                    cfg.validation_tol
                )))
            }
        });
    if let Err(e) = &result {
        manifest.fail(e);
    }
    manifest.duration_seconds = start.elapsed().as_secs_f64();
    let written = manifest.write(dir).map(|_| ());
    let result = result.and(written);
    (manifest, result)
}
