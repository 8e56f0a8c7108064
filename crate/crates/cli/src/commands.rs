//! One function per subcommand, each returning the files it produces.

use fockedge::experiments::{arange, dark_state_study, edge_fit, pointer_run, spectrum_sweep};
use fockedge::export::{csv_bytes, fmt_f64, json_bytes, vector_json};
use fockedge::par::Exec;
use fockedge::spectra::winding_number;
use fockedge::{site_a, site_b, Result};
use serde_json::json;

use crate::config::RunConfig;

pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl Artifact {
    fn new(name: impl Into<String>, bytes: Vec<u8>) -> Self {
        Self { name: name.into(), bytes }
    }

    fn script(name: impl Into<String>, lines: &[String]) -> Self {
        let mut s = String::from("set datafile separator ','\nset key autotitle columnhead\n");
        for l in lines {
            s.push_str(l);
            s.push('\n');
        }
        Self::new(name, s.into_bytes())
    }
}

fn flag(b: bool) -> String {
    u8::from(b).to_string()
}

pub fn spectrum(cfg: &RunConfig, gnuplot: bool) -> Result<Vec<Artifact>> {
    let c = &cfg.spectrum;
    let j1s = arange(c.j1_start, c.j1_stop, c.j1_step)?;
    let points = spectrum_sweep(&c.ssh(), &j1s, c.j2, Exec::default())?;

    let rows = points.iter().flat_map(|p| {
        p.energies
            .iter()
            .zip(&p.in_gap)
            .enumerate()
            .map(|(i, (e, g))| vec![fmt_f64(p.j1), i.to_string(), fmt_f64(*e), flag(*g)])
    });
    let spectrum = csv_bytes(&["j1", "eigenvalue_index", "energy", "in_gap"], rows)?;

    let edge_rows = points.iter().map(|p| {
        let e = p.edge_energy();
        vec![
            fmt_f64(p.j1),
            e.map(fmt_f64).unwrap_or_default(),
            fmt_f64(p.predicted),
            e.filter(|_| p.predicted != 0.0)
                .map(|e| fmt_f64((e - p.predicted).abs() / p.predicted.abs()))
                .unwrap_or_default(),
            p.edge_indices.len().to_string(),
        ]
    });
    let edges = csv_bytes(&["j1", "edge_energy", "predicted", "relative_deviation", "edge_states"], edge_rows)?;

    let mut out = vec![Artifact::new("spectrum.csv", spectrum), Artifact::new("spectrum_edge.csv", edges)];
    if gnuplot {
        out.push(Artifact::script(
            "spectrum.gp",
            &[
                "set xlabel 'J1'".into(),
                "set ylabel 'E'".into(),
                "plot 'spectrum.csv' using 1:3 with points pt 7 ps 0.3 lc rgb 'gray' notitle, \\".into(),
                "     'spectrum.csv' using 1:($4 == 1 ? $3 : 1/0) with points pt 7 ps 0.6 lc rgb 'red' title 'in gap', \\"
                    .into(),
                "     'spectrum_edge.csv' using 1:3 with lines lc rgb 'blue' title 'predicted'".into(),
            ],
        ));
    }
    Ok(out)
}

pub fn edgefit(cfg: &RunConfig, gnuplot: bool) -> Result<Vec<Artifact>> {
    let c = &cfg.edgefit;
    let p = c.ssh();
    let mut out = Vec::new();
    for (k, &[j1, j2]) in c.points.iter().enumerate() {
        let r = edge_fit(&p, j1, j2)?;
        let stem = format!("edgefit_{k:02}");
        let model = |f: Option<fockedge::spectra::SublatticeFit>, m: usize| f.map(|f| fmt_f64(f.model_abs(m))).unwrap_or_default();
        let rows = (0..p.n_cells).map(|m| {
            vec![
                m.to_string(),
                fmt_f64(r.state[site_a(m)].norm()),
                fmt_f64(r.state[site_b(m)].norm()),
                model(r.fit.a, m),
                model(r.fit.b, m),
            ]
        });
        out.push(Artifact::new(
            format!("{stem}.csv"),
            csv_bytes(&["cell", "abs_psi_a", "abs_psi_b", "fit_a", "fit_b"], rows)?,
        ));
        let record = json!({
            "j1": r.j1,
            "j2": r.j2,
            "t_inter": c.t_inter,
            "t_intra": c.t_intra,
            "n_cells": c.n_cells,
            "energy": r.energy,
            "predicted_energy": r.predicted,
            "fit": r.fit,
            "schmidt": r.schmidt.to_json(),
            "b_weight": r.b_weight,
            "left_weight": r.left_weight,
        });
        out.push(Artifact::new(format!("{stem}.json"), json_bytes(&record)?));
        if gnuplot {
            out.push(Artifact::script(
                format!("{stem}.gp"),
                &[
                    format!("set title 'J1 = {j1}, J2 = {j2}'"),
                    "set xlabel 'cell m'".into(),
                    "set logscale y".into(),
                    format!("plot '{stem}.csv' using 1:2 with points pt 7 title '|psi_A|', \\"),
                    "     '' using 1:3 with points pt 6 title '|psi_B|', \\".into(),
                    "     '' using 1:4 with lines title 'fit A', '' using 1:5 with lines title 'fit B'".into(),
                ],
            ));
        }
    }
    Ok(out)
}

pub fn darkstate(cfg: &RunConfig, gnuplot: bool) -> Result<Vec<Artifact>> {
    let r = dark_state_study(&cfg.darkstate)?;
    let n_cells = r.closed_form.len() / 2;
    let rho = &r.steady.rho.entries;
    let rows = (0..n_cells).map(|n| {
        let (cf, rec) = (r.closed_form[site_a(n)], r.recurrence[site_a(n)]);
        vec![
            n.to_string(),
            fmt_f64(cf.re),
            fmt_f64(cf.im),
            fmt_f64(rec.re),
            fmt_f64(rec.im),
            fmt_f64(rho[(site_a(n), site_a(n))].re),
            fmt_f64(rho[(site_b(n), site_b(n))].re),
        ]
    });
    let amplitudes = csv_bytes(
        &["n", "closed_form_re", "closed_form_im", "recurrence_re", "recurrence_im", "steady_pop_a", "steady_pop_b"],
        rows,
    )?;
    let report = json!({
        "config": cfg.darkstate,
        "alpha": [r.alpha.re, r.alpha.im],
        "tail_error": r.tail_error,
        "report": r.report,
        "recurrence_vs_closed": r.recurrence_vs_closed,
        "steady_vs_closed": r.steady_vs_closed,
        "steady_vs_recurrence": r.steady_vs_recurrence,
        "steady_residual": r.steady.residual,
        "steady_iterations": r.steady.iterations,
        "closed_form": vector_json(&r.closed_form),
    });
    let mut out = vec![
        Artifact::new("darkstate.json", json_bytes(&report)?),
        Artifact::new("darkstate_amplitudes.csv", amplitudes),
    ];
    if gnuplot {
        out.push(Artifact::script(
            "darkstate.gp",
            &[
                "set xlabel 'n'".into(),
                "plot 'darkstate_amplitudes.csv' using 1:(abs($2)) with points pt 7 title '|closed form|', \\".into(),
                "     '' using 1:(abs($4)) with lines title '|recurrence|', \\".into(),
                "     '' using 1:(sqrt($6)) with lines dt 2 title 'sqrt(steady population)'".into(),
            ],
        ));
    }
    Ok(out)
}

pub fn evolve(cfg: &RunConfig, gnuplot: bool) -> Result<Vec<Artifact>> {
    let rows = pointer_run(&cfg.evolve, cfg.seed, Exec::default())?;
    let csv = csv_bytes(
        &[
            "t",
            "trace",
            "purity",
            "alpha_ref_re",
            "alpha_ref_im",
            "product_fidelity",
            "schmidt_1",
            "schmidt_2",
            "min_eigenvalue",
        ],
        rows.iter().map(|r| {
            vec![
                fmt_f64(r.t),
                fmt_f64(r.trace),
                fmt_f64(r.purity),
                fmt_f64(r.alpha_ref.re),
                fmt_f64(r.alpha_ref.im),
                fmt_f64(r.product_fidelity),
                fmt_f64(r.schmidt[0]),
                fmt_f64(r.schmidt[1]),
                fmt_f64(r.min_eigenvalue),
            ]
        }),
    )?;
    let mut out = vec![Artifact::new("evolve.csv", csv)];
    if gnuplot {
        out.push(Artifact::script(
            "evolve.gp",
            &[
                "set xlabel 't'".into(),
                "plot 'evolve.csv' using 1:3 with lines title 'purity', '' using 1:6 with lines title 'product fidelity', \\"
                    .into(),
                "     '' using 1:8 with lines title 'second Schmidt value'".into(),
            ],
        ));
    }
    Ok(out)
}

pub fn winding(cfg: &RunConfig) -> Result<Vec<Artifact>> {
    let c = &cfg.winding;
    let mut rows = Vec::with_capacity(c.w.len());
    for &w in &c.w {
        let nu = winding_number(c.v, w, c.k_points)?;
        rows.push(vec![fmt_f64(c.v), fmt_f64(w), c.k_points.to_string(), nu.to_string()]);
    }
    Ok(vec![Artifact::new("winding.csv", csv_bytes(&["v", "w", "k_points", "winding"], rows)?)])
}
