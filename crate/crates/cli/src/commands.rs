use std::fs::File;
use std::io::BufWriter;
use std::sync::mpsc;

use anyhow::{anyhow, bail, Context, Result};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use peakwave::delta_op::{interleaves, Coupling, DeltaOperator, EigenKind};
use peakwave::evolve::{evolve_from, stiffness, State};
use peakwave::linops::{self, assemble, Parity, Which, PARITY_TOL};
use peakwave::stability::{self, classify_with, default_h_omega, norm_squared};
use peakwave::wave::{build_profile, WaveProfile};
use peakwave::{ClassifyConfig, Error, EvolveConfig, LinearStep, Perturbation, Verdict, WaveParams};

use crate::output::{num, OutDir, Provenance};
use crate::{Cli, Command};

pub const EXIT_USAGE: u8 = 1;
pub const EXIT_ADMISSIBILITY: u8 = 2;
pub const EXIT_NUMERIC: u8 = 3;
pub const EXIT_INCONCLUSIVE: u8 = 4;

/// Raised under `--strict` when a verdict is inconclusive.
#[derive(Debug)]
pub struct Inconclusive(pub String);

impl std::fmt::Display for Inconclusive {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "inconclusive verdict: {}", self.0)
    }
}

impl std::error::Error for Inconclusive {}

pub fn exit_code(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<Inconclusive>().is_some() {
        return EXIT_INCONCLUSIVE;
    }
    match e.downcast_ref::<Error>() {
        Some(Error::Admissibility(_)) => EXIT_ADMISSIBILITY,
        Some(Error::Domain(_)) | Some(Error::GridMismatch(_)) => EXIT_USAGE,
        Some(_) => EXIT_NUMERIC,
        None => EXIT_NUMERIC,
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    let name = command_name(&cli.command);
    let out = OutDir::new(&cli.out_dir, cli.prefix.as_deref().unwrap_or(name))?;
    match &cli.command {
        Command::BuildWave { wave, n } => build_wave(&out, wave.params(), *n),
        Command::Spectrum { wave, n, op, count, vectors } => spectrum(&out, cli.strict, wave.params(), *n, op, *count, *vectors),
        Command::DeltaSpectrum { gamma, half_period, count, n } => delta_spectrum(&out, *gamma, *half_period, *count, *n),
        Command::Classify { wave, n, h_omega_rel } => {
            classify(&out, cli.strict, wave.params(), ClassifyConfig { n: *n, h_omega_rel: *h_omega_rel })
        }
        Command::Evolve { wave, n, dt, t_final, records, perturb, linear, seed, dt_ceiling, blowup_factor, snapshot } => {
            let config = EvolveConfig {
                n: *n,
                dt: *dt,
                t_final: *t_final,
                records: *records,
                linear: linear.parse::<LinearStep>()?,
                dt_ceiling: *dt_ceiling,
                seed: *seed,
                blowup_factor: *blowup_factor,
            };
            evolve(&out, wave.params(), perturb.parse()?, config, *snapshot)
        }
        Command::Sweep { omega_min, omega_max, omega_count, z_min, z_max, z_count, half_period, n, h_omega_rel, threads } => {
            let lattice = Lattice {
                omegas: linspace(*omega_min, *omega_max, *omega_count)?,
                zs: linspace(*z_min, *z_max, *z_count)?,
                half_period: *half_period,
                config: ClassifyConfig { n: *n, h_omega_rel: *h_omega_rel },
            };
            sweep(&out, cli.strict, &lattice, *threads)
        }
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::BuildWave { .. } => "build_wave",
        Command::Spectrum { .. } => "spectrum",
        Command::DeltaSpectrum { .. } => "delta_spectrum",
        Command::Classify { .. } => "classify",
        Command::Evolve { .. } => "evolve",
        Command::Sweep { .. } => "sweep",
    }
}

fn linspace(a: f64, b: f64, count: usize) -> Result<Vec<f64>> {
    if count == 0 || !a.is_finite() || !b.is_finite() {
        return Err(Error::Domain(format!("bad range [{a}, {b}] with {count} points")).into());
    }
    if count == 1 {
        return Ok(vec![a]);
    }
    Ok((0..count).map(|i| a + (b - a) * i as f64 / (count - 1) as f64).collect())
}

fn parity_name(p: Parity) -> &'static str {
    match p {
        Parity::Even => "even",
        Parity::Odd => "odd",
        Parity::Mixed => "mixed",
    }
}

fn profile_summary(p: &WaveProfile) -> Value {
    json!({
        "branch": p.branch,
        "eta1": p.eta1,
        "eta2": p.eta2,
        "k": p.modulus.k(),
        "k_complement": p.modulus.kp(),
        "shift": p.shift,
        "phi0": p.phi0,
        "norm_squared": norm_squared(p),
        "period_residual": p.period_residual,
    })
}

fn build_wave(out: &OutDir, params: WaveParams, n: usize) -> Result<()> {
    let p = build_profile(&params, n)?;
    let d = p.diagnostics();
    let rows = (0..n).map(|i| {
        let x = p.grid.x(i);
        vec![num(x), num(p.values[i]), num(p.eval_derivative(x))]
    });
    let table = out.table("", &["x", "phi", "dphi"], rows)?;
    let prov = Provenance::new(
        "build-wave",
        json!({ "params": params, "n": n }),
        json!({ "pde": 1e-6, "jump": d.jump_tolerance, "endpoint": 1e-10, "quadrature": 1e-8, "period": 1e-12 }),
    );
    let mut body = profile_summary(&p);
    body["diagnostics"] = serde_json::to_value(d)?;
    body["all_green"] = json!(d.all_green());
    out.sidecar(&table, &prov, body)?;
    println!(
        "η₂={:.12e} k={:.12e} a={:.12e} φ(0)={:.12e} residuals {}",
        p.eta2,
        p.modulus.k(),
        p.shift,
        p.phi0,
        if d.all_green() { "green" } else { "RED" }
    );
    if !d.all_green() {
        bail!(Error::Numerical(format!("profile residuals above tolerance: {d:?}")));
    }
    Ok(())
}

fn spectrum(out: &OutDir, strict: bool, params: WaveParams, n: usize, op: &str, count: usize, vectors: bool) -> Result<()> {
    let which: Vec<Which> = match op.to_ascii_lowercase().as_str() {
        "l1" => vec![Which::L1],
        "l2" => vec![Which::L2],
        "both" => vec![Which::L1, Which::L2],
        other => bail!(Error::Domain(format!("unknown operator '{other}' (l1, l2, both)"))),
    };
    let p = build_profile(&params, n)?;
    let mut inconclusive = Vec::new();
    for w in which {
        let s = linops::spectrum(&assemble(&p, w)?, count);
        let tag = match w {
            Which::L1 => "l1",
            Which::L2 => "l2",
        };
        let rows = s.pairs.iter().enumerate().map(|(i, e)| {
            vec![i.to_string(), num(e.value), parity_name(e.parity).into(), num(e.reflection_residual), num(e.residual)]
        });
        let table = out.table(tag, &["index", "eigenvalue", "parity", "reflection_residual", "residual"], rows)?;
        let prov = Provenance::new(
            "spectrum",
            json!({ "params": params, "n": n, "operator": tag, "count": count }),
            json!({ "tau_neg": s.tau_neg, "parity": PARITY_TOL }),
        );
        let mut body = serde_json::to_value(&s)?;
        body["profile"] = profile_summary(&p);
        if w == Which::L2 {
            body["profile_overlap"] = json!(linops::overlap(&s.pairs[0].vector, &p.values));
        }
        out.sidecar(&table, &prov, body)?;
        if vectors {
            let mut header = vec!["x".to_string()];
            header.extend((0..s.pairs.len()).map(|i| format!("v{i}")));
            let rows = (0..n).map(|i| {
                let mut r = vec![num(p.grid.x(i))];
                r.extend(s.pairs.iter().map(|e| num(e.vector[i])));
                r
            });
            let h: Vec<&str> = header.iter().map(String::as_str).collect();
            let vt = out.table(&format!("{tag}_vectors"), &h, rows)?;
            out.sidecar(&vt, &prov, json!({ "eigenvalues": s.values() }))?;
        }
        println!(
            "{tag}: n_negative={} (even {}) inertia={} τ={:.3e} lowest={:?}",
            s.n_negative,
            s.n_negative_even,
            s.inertia_count,
            s.tau_neg,
            s.values().iter().take(4).map(|v| format!("{v:.6e}")).collect::<Vec<_>>()
        );
        if s.inconclusive() {
            inconclusive.push(format!("{tag}: eigenvalues within τ of 0: {:?}", s.band));
        }
    }
    if strict && !inconclusive.is_empty() {
        bail!(Inconclusive(inconclusive.join("; ")));
    }
    Ok(())
}

fn kind_name(k: EigenKind) -> &'static str {
    match k {
        EigenKind::NegativeBoundState => "negative_bound_state",
        EigenKind::InteriorRoot => "interior_root",
        EigenKind::IntegerSine => "integer_sine",
    }
}

fn delta_spectrum(out: &OutDir, gamma: f64, half_period: f64, count: usize, n: usize) -> Result<()> {
    let coupling = if gamma == f64::INFINITY { Coupling::Dirichlet } else { Coupling::Finite(gamma) };
    let op = DeltaOperator::new(coupling, half_period)?;
    let exact = op.spectrum(count)?;
    let discrete = if n > 0 {
        let grid = peakwave::Grid::new(n, half_period)?;
        let pairs = linops::symmetric_spectrum(&op.discretize(n)?, &grid, exact.len());
        Some(pairs.into_iter().map(|e| e.value).collect::<Vec<f64>>())
    } else {
        None
    };
    let rows = exact.iter().enumerate().map(|(i, e)| {
        let parity = if e.kind == EigenKind::IntegerSine { "odd" } else { "even" };
        let mut r = vec![i.to_string(), num(e.eigenvalue), kind_name(e.kind).into(), parity.into(), num(e.wavenumber)];
        if let Some(d) = &discrete {
            r.push(num(d[i]));
            r.push(num((d[i] - e.eigenvalue).abs()));
        }
        r
    });
    let mut header = vec!["index", "eigenvalue", "kind", "parity", "wavenumber"];
    if discrete.is_some() {
        header.extend(["discrete", "abs_error"]);
    }
    let table = out.table("", &header, rows)?;
    let ok = interleaves(&exact);
    let max_error = discrete
        .as_ref()
        .map(|d| d.iter().zip(&exact).map(|(a, e)| (a - e.eigenvalue).abs()).fold(0.0, f64::max));
    let prov = Provenance::new("delta-spectrum", json!({ "gamma": gamma, "half_period": half_period, "count": count, "n": n }), json!({}));
    out.sidecar(&table, &prov, json!({ "interleaved": ok, "max_discrete_error": max_error, "eigenvalues": exact }))?;
    println!(
        "{} eigenvalues, interleaved={ok}{}",
        exact.len(),
        max_error.map(|e| format!(", max discrete error {e:.3e}")).unwrap_or_default()
    );
    for e in &exact {
        println!("  {:>22} {:.12e}", kind_name(e.kind), e.eigenvalue);
    }
    Ok(())
}

fn classify(out: &OutDir, strict: bool, params: WaveParams, config: ClassifyConfig) -> Result<()> {
    let r = classify_with(&params, &config)?;
    let prov = Provenance::new(
        "classify",
        json!({ "params": params, "classify": config }),
        json!({ "tau_neg": r.tau_neg, "h_omega": r.slope_detail.h_omega, "parity": PARITY_TOL }),
    );
    let mut body = serde_json::to_value(&r)?;
    body["label"] = json!(r.label());
    out.document("", &prov, body)?;
    println!("n={} n_even={} p={} slope={:.6e} verdict: {}", r.n_negative, r.n_negative_even, r.p_index, r.slope, r.label());
    if let Some(c) = &r.caveat {
        println!("caveat: {c}");
    }
    if strict && r.verdict == Verdict::Inconclusive {
        bail!(Inconclusive(r.caveat.clone().unwrap_or_default()));
    }
    Ok(())
}

fn evolve(out: &OutDir, params: WaveParams, perturbation: Perturbation, config: EvolveConfig, snapshot: bool) -> Result<()> {
    let profile = build_profile(&params, config.n)?;
    let u0 = perturbation.apply(&profile, config.seed);
    let (trace, state) = evolve_from(&profile, u0, perturbation, &config)?;
    let rows = (0..trace.len()).map(|i| {
        vec![num(trace.times[i]), num(trace.charge[i]), num(trace.energy[i]), num(trace.orbit_distance[i]), num(trace.odd_residual[i])]
    });
    let table = out.table("", &["t", "Q", "E", "orbit_distance", "odd_residual"], rows)?;
    let stiff = stiffness(&profile.grid, params.z, config.dt);
    if stiff > std::f64::consts::PI && config.linear == LinearStep::Eigen {
        eprintln!("warning: λ_max dt = {stiff:.1} > π; the exact linear step may resonate (try a smaller dt or --linear cayley)");
    }
    let regime = match stability::slope(&params, default_h_omega(params.omega)) {
        Ok(s) if s.value > 0.0 => json!({ "slope": s.value, "label": "slope_positive" }),
        Ok(s) => json!({ "slope": s.value, "label": "exploratory" }),
        Err(e) => json!({ "slope": null, "label": "exploratory", "reason": e.to_string() }),
    };
    let prov = Provenance::new(
        "evolve",
        json!({ "params": params, "perturbation": perturbation, "evolve": config }),
        json!({ "dt_ceiling": config.dt_ceiling, "blowup_factor": config.blowup_factor }),
    );
    let body = json!({
        "samples": trace.len(),
        "charge_drift": trace.charge_drift(),
        "energy_drift": trace.energy_drift(),
        "initial_distance": trace.orbit_distance[0],
        "max_distance_ratio": trace.max_distance_ratio(),
        "first_exceedance_10x": trace.first_exceedance(10.0),
        "first_exceedance_100x": trace.first_exceedance(100.0),
        "max_odd_residual": trace.max_odd_residual(),
        "blow_up": trace.blow_up,
        "regime": regime,
        "stiffness": stiff,
    });
    out.sidecar(&table, &prov, body)?;
    if snapshot {
        write_snapshot(out, &state, &prov)?;
    }
    println!(
        "t={:.6} samples={} dQ={:.3e} dE={:.3e} d0={:.3e} max d/d0={:.3e} odd={:.3e}",
        state.t,
        trace.len(),
        trace.charge_drift(),
        trace.energy_drift(),
        trace.orbit_distance[0],
        trace.max_distance_ratio(),
        trace.max_odd_residual()
    );
    trace.into_result()?;
    Ok(())
}

fn write_snapshot(out: &OutDir, state: &State, prov: &Provenance) -> Result<()> {
    let rows = state.u.iter().enumerate().map(|(i, u)| vec![num(state.grid.x(i)), num(u.re), num(u.im)]);
    let t = out.table("snapshot", &["x", "re", "im"], rows)?;
    out.sidecar(&t, prov, json!({ "t": state.t }))?;
    Ok(())
}

struct Lattice {
    omegas: Vec<f64>,
    zs: Vec<f64>,
    half_period: f64,
    config: ClassifyConfig,
}

#[derive(Debug, Clone, Serialize)]
struct SweepRow {
    index: usize,
    omega: f64,
    z: f64,
    half_period: f64,
    n: usize,
    p: Option<u8>,
    slope: Option<f64>,
    verdict: String,
    n_negative: Option<usize>,
    n_negative_even: Option<usize>,
    note: String,
}

impl SweepRow {
    fn record(&self) -> Vec<String> {
        let opt = |v: Option<String>| v.unwrap_or_default();
        vec![
            self.index.to_string(),
            num(self.omega),
            num(self.z),
            num(self.half_period),
            self.n.to_string(),
            opt(self.p.map(|p| p.to_string())),
            opt(self.slope.map(num)),
            self.verdict.clone(),
            opt(self.n_negative.map(|v| v.to_string())),
            opt(self.n_negative_even.map(|v| v.to_string())),
            self.note.clone(),
        ]
    }
}

const SWEEP_HEADER: [&str; 11] =
    ["index", "omega", "z", "L", "n", "p", "slope", "verdict", "n_negative", "n_negative_even", "note"];

fn sweep_point(index: usize, omega: f64, z: f64, lattice: &Lattice) -> SweepRow {
    let params = WaveParams::new(omega, z, lattice.half_period);
    let mut row = SweepRow {
        index,
        omega,
        z,
        half_period: lattice.half_period,
        n: lattice.config.n,
        p: None,
        slope: None,
        verdict: String::new(),
        n_negative: None,
        n_negative_even: None,
        note: String::new(),
    };
    match classify_with(&params, &lattice.config) {
        Ok(r) => {
            row.p = Some(r.p_index);
            row.slope = Some(r.slope);
            row.verdict = r.label();
            row.n_negative = Some(r.n_negative);
            row.n_negative_even = Some(r.n_negative_even);
            row.note = r.caveat.unwrap_or_default();
        }
        Err(Error::Admissibility(a)) => {
            row.verdict = "inadmissible".into();
            row.note = a.to_string();
        }
        Err(e) => {
            row.verdict = "error".into();
            row.note = e.to_string();
        }
    }
    row
}

fn sweep(out: &OutDir, strict: bool, lattice: &Lattice, threads: usize) -> Result<()> {
    if !(lattice.half_period > 0.0) {
        bail!(Error::Admissibility(peakwave::Admissibility::NonPositiveHalfPeriod { half_period: lattice.half_period }));
    }
    let points: Vec<(usize, f64, f64)> = lattice
        .zs
        .iter()
        .flat_map(|&z| lattice.omegas.iter().map(move |&w| (w, z)))
        .enumerate()
        .map(|(i, (w, z))| (i, w, z))
        .collect();
    let path = out.path("", "csv");
    // rows are flushed as they complete, then rewritten in lattice order
    let mut partial = csv::Writer::from_writer(BufWriter::new(
        File::create(&path).with_context(|| format!("writing {}", path.display()))?,
    ));
    partial.write_record(SWEEP_HEADER)?;
    partial.flush()?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build()?;
    let (tx, rx) = mpsc::channel::<SweepRow>();
    let mut rows: Vec<SweepRow> = Vec::with_capacity(points.len());
    std::thread::scope(|s| -> Result<()> {
        s.spawn(|| {
            pool.install(|| {
                points.par_iter().for_each_with(tx, |tx, &(i, w, z)| {
                    let _ = tx.send(sweep_point(i, w, z, lattice));
                })
            })
        });
        for row in rx {
            partial.write_record(row.record())?;
            partial.flush()?;
            rows.push(row);
        }
        Ok(())
    })?;
    drop(partial);
    rows.sort_by_key(|r| r.index);
    let table = out.table("", &SWEEP_HEADER, rows.iter().map(SweepRow::record))?;

    let mut counts = std::collections::BTreeMap::<String, usize>::new();
    for r in &rows {
        *counts.entry(r.verdict.clone()).or_default() += 1;
    }
    let prov = Provenance::new(
        "sweep",
        json!({ "omegas": lattice.omegas, "zs": lattice.zs, "half_period": lattice.half_period, "classify": lattice.config }),
        json!({ "h_omega_rel": lattice.config.h_omega_rel }),
    );
    out.sidecar(&table, &prov, json!({ "points": rows.len(), "verdicts": counts, "slope_sign_changes": sign_changes(&rows, lattice) }))?;
    for (v, c) in &counts {
        println!("{c:>5}  {v}");
    }
    let inconclusive = rows.iter().filter(|r| r.verdict == Verdict::Inconclusive.name()).count();
    if strict && inconclusive > 0 {
        bail!(Inconclusive(format!("{inconclusive} lattice points")));
    }
    if rows.iter().any(|r| r.verdict == "error") {
        return Err(anyhow!(Error::Numerical("some lattice points failed; see the note column".into())));
    }
    Ok(())
}

/// Adjacent ω pairs (fixed Z) where the computed slope changes sign.
fn sign_changes(rows: &[SweepRow], lattice: &Lattice) -> Vec<Value> {
    let m = lattice.omegas.len();
    let mut out = Vec::new();
    for (zi, &z) in lattice.zs.iter().enumerate() {
        let line = &rows[zi * m..(zi + 1) * m];
        for w in line.windows(2) {
            if let (Some(a), Some(b)) = (w[0].slope, w[1].slope) {
                if a.signum() != b.signum() {
                    out.push(json!({ "z": z, "omega_lo": w[0].omega, "omega_hi": w[1].omega, "slope_lo": a, "slope_hi": b }));
                }
            }
        }
    }
    out
}
