use crate::{Cli, Command, EnergyArgs, ImagesArgs, KindSelection, RmtArgs, SpectrumArgs};
use qgvac::casimir::{
    energy_logdet, energy_orbit_sum, energy_rational, orbit_tail_bound, EnergyBreakdown,
};
use qgvac::images::{compare_traces, write_trace_csv};
use qgvac::rmt::{mc_energy_stats, write_stats_jsonl, EnsembleKind};
use qgvac::spectrum::{
    default_t_grid, energy_from_spectrum, find_spectrum, write_spectrum_csv, TRUNCATION_RATIO,
};
use qgvac::{bond_scattering_matrix, load_graph, Error};
use serde::Serialize;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

type AnyResult<T> = Result<T, Box<dyn std::error::Error>>;

pub fn run(cli: &Cli) -> AnyResult<()> {
    let mut out: Box<dyn Write> = match &cli.out {
        Some(path) => Box::new(BufWriter::new(create(path)?)),
        None => Box::new(BufWriter::new(std::io::stdout().lock())),
    };
    match &cli.command {
        Command::Spectrum(a) => spectrum(a, &mut out)?,
        Command::Energy(a) => energy(a, &mut out)?,
        Command::Images(a) => images(a, &mut out)?,
        Command::Rmt(a) => rmt(a, &mut out)?,
    }
    out.flush()?;
    Ok(())
}

fn create(path: &Path) -> AnyResult<File> {
    File::create(path).map_err(|e| format!("{}: {e}", path.display()).into())
}

fn spectrum(a: &SpectrumArgs, out: &mut dyn Write) -> AnyResult<()> {
    let g = load_graph(&a.graph)?;
    let s = bond_scattering_matrix(&g)?;
    let sp = find_spectrum(&s, &g.lengths(), a.k_max)?;
    write_spectrum_csv(out, &sp, &g.canonical_hash())?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct MethodResult {
    method: &'static str,
    value: f64,
    uncertainty: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    detail: Option<serde_json::Value>,
}

#[derive(Debug, Serialize)]
struct EnergyReport {
    graph_hash: String,
    num_bonds: usize,
    total_length: f64,
    methods: Vec<MethodResult>,
    /// Largest pairwise difference between methods.
    max_discrepancy: f64,
    /// Every pair agrees within the sum of its uncertainties.
    agree: bool,
}

// Uncertainty floors for methods whose own estimate is essentially exact.
const LOGDET_FLOOR: f64 = 1e-9;
const BERNOULLI_FLOOR: f64 = 1e-12;

fn energy(a: &EnergyArgs, out: &mut dyn Write) -> AnyResult<()> {
    let g = load_graph(&a.graph)?;
    let s = bond_scattering_matrix(&g)?;
    s.require_j_symmetric()?;
    let lengths = g.lengths();
    let mut methods = Vec::new();

    let ld = energy_logdet(&s, &lengths)?;
    methods.push(MethodResult {
        method: "logdet",
        value: ld.value,
        uncertainty: ld.error_estimate.max(LOGDET_FLOOR),
        detail: None,
    });

    let orbit = energy_orbit_sum(&s, &lengths, a.n_max)?;
    if let Some(path) = &a.breakdown {
        write_breakdown(path, &orbit, g.num_bonds(), g.min_length())?;
    }
    methods.push(MethodResult {
        method: "orbit_sum",
        value: orbit.value,
        uncertainty: orbit.tail_bound,
        detail: Some(serde_json::json!({
            "n_requested": orbit.n_requested,
            "n_completed": orbit.n_completed,
        })),
    });

    match energy_rational(&g) {
        Ok(r) => methods.push(MethodResult {
            method: "bernoulli",
            value: r.value,
            uncertainty: BERNOULLI_FLOOR,
            detail: Some(serde_json::json!({
                "unit": r.unit,
                "subdivided_bonds": r.subdivided_bonds,
            })),
        }),
        Err(Error::Incommensurate { .. }) | Err(Error::InvalidArgument(_)) => {}
        Err(e) => return Err(e.into()),
    }

    if let Some(k_max) = a.k_max {
        let grid = match &a.t_grid {
            Some(t) => t.0.clone(),
            None => default_t_grid(g.min_length()),
        };
        let sp = find_spectrum(&s, &lengths, k_max)?;
        let e = energy_from_spectrum(&sp, &grid)?;
        methods.push(MethodResult {
            method: "spectral",
            value: e.value,
            uncertainty: e.error_estimate,
            detail: Some(serde_json::json!({
                "k_max": k_max,
                "eigenvalues": sp.count(),
                "t_grid": e.t_grid,
            })),
        });
    }

    let mut max_discrepancy: f64 = 0.0;
    let mut agree = true;
    for (i, x) in methods.iter().enumerate() {
        for y in &methods[i + 1..] {
            let d = (x.value - y.value).abs();
            max_discrepancy = max_discrepancy.max(d);
            agree &= d <= x.uncertainty + y.uncertainty;
        }
    }
    let report = EnergyReport {
        graph_hash: g.canonical_hash(),
        num_bonds: g.num_bonds(),
        total_length: g.total_length(),
        methods,
        max_discrepancy,
        agree,
    };
    serde_json::to_writer(&mut *out, &report)?;
    writeln!(out)?;
    Ok(())
}

fn write_breakdown(
    path: &Path,
    b: &EnergyBreakdown,
    num_bonds: usize,
    l_min: f64,
) -> AnyResult<()> {
    let mut w = BufWriter::new(create(path)?);
    for t in &b.terms {
        serde_json::to_writer(
            &mut w,
            &serde_json::json!({
                "n": t.n,
                "sigma_n": t.sigma_n,
                "bound_n": t.bound_n,
                "cumulative_value": t.cumulative_value,
                "tail_bound": orbit_tail_bound(num_bonds, l_min, t.n),
            }),
        )?;
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}

fn images(a: &ImagesArgs, out: &mut dyn Write) -> AnyResult<()> {
    let g = load_graph(&a.graph)?;
    let s = bond_scattering_matrix(&g)?;
    let ts = &a.t_grid.0;
    let t_min = ts.iter().cloned().fold(f64::INFINITY, f64::min);
    let k_max = a.k_max.unwrap_or(1.05 * TRUNCATION_RATIO / t_min);
    let sp = find_spectrum(&s, &g.lengths(), k_max)?;
    let rows = compare_traces(&sp, &s, &g.lengths(), ts, a.n_max)?;
    write_trace_csv(out, &rows)?;
    Ok(())
}

fn rmt(a: &RmtArgs, out: &mut dyn Write) -> AnyResult<()> {
    let mut kinds: Vec<EnsembleKind> = Vec::new();
    for sel in &a.kind {
        match sel {
            KindSelection::All => kinds.extend(EnsembleKind::ALL),
            KindSelection::One(k) => kinds.push(*k),
        }
    }
    let mut stats = Vec::new();
    for &kind in &kinds {
        for &b in &a.num_bonds {
            stats.push(mc_energy_stats(kind, b, a.length, a.samples, a.seed)?);
        }
    }
    write_stats_jsonl(out, &stats)?;
    Ok(())
}
