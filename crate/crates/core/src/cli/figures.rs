//! Data and gnuplot scripts for the published figures.

use std::f64::consts::PI;

use clap::ValueEnum;
use rayon::prelude::*;

use crate::channels::{Detector, DistinguishabilityAngle};
use crate::cli::output::{csv, series_csv, Cell, Series};
use crate::cli::scenario::{Scenario, SourceQuality};
use crate::error::Result;
use crate::metrics::visibility_region;
use crate::numeric::format_f64;
use crate::state::{BeamSplitter, FockPair};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FigureId {
    #[value(name = "fig2a")]
    Fig2a,
    #[value(name = "fig2b")]
    Fig2b,
    #[value(name = "fig2c")]
    Fig2c,
    #[value(name = "fig3")]
    Fig3,
    #[value(name = "figS1a")]
    FigS1a,
    #[value(name = "figS1b")]
    FigS1b,
    #[value(name = "figS1c")]
    FigS1c,
    #[value(name = "figS2")]
    FigS2,
    #[value(name = "figS3")]
    FigS3,
    #[value(name = "figS4")]
    FigS4,
    #[value(name = "figLossArray")]
    FigLossArray,
}

impl FigureId {
    pub fn name(self) -> &'static str {
        match self {
            FigureId::Fig2a => "fig2a",
            FigureId::Fig2b => "fig2b",
            FigureId::Fig2c => "fig2c",
            FigureId::Fig3 => "fig3",
            FigureId::FigS1a => "figS1a",
            FigureId::FigS1b => "figS1b",
            FigureId::FigS1c => "figS1c",
            FigureId::FigS2 => "figS2",
            FigureId::FigS3 => "figS3",
            FigureId::FigS4 => "figS4",
            FigureId::FigLossArray => "figLossArray",
        }
    }
}

pub const REFLECTIVITIES: [f64; 4] = [0.1, 0.2, 0.5, 0.9];
const COLORS: [&str; 4] = ["#2ca02c", "#d62728", "#1f77b4", "#7f7f7f"];

pub struct Figure {
    pub id: FigureId,
    pub csv: String,
    pub script: String,
    /// Parameter series, for callers that want to inspect the data.
    pub series: Vec<Series>,
}

fn pure_series(total: u32, delta: i64, extra: &[(&str, Cell)]) -> Result<Vec<Series>> {
    REFLECTIVITIES
        .par_iter()
        .map(|&r| {
            let sc = Scenario::pure(FockPair::new(total, delta)?, BeamSplitter::new(r)?);
            let mut params: Vec<(String, Cell)> = extra.iter().map(|(k, v)| (k.to_string(), v.clone())).collect();
            params.push(("r".into(), Cell::float(r)));
            Ok(Series::from_masses(params, &sc.compute::<f64>()?))
        })
        .collect()
}

fn mixed_series(total: u32, deltas: &[i64], purity: f64) -> Result<Vec<Series>> {
    let jobs: Vec<(i64, f64)> = deltas
        .iter()
        .flat_map(|&d| REFLECTIVITIES.iter().map(move |&r| (d, r)))
        .collect();
    jobs.par_iter()
        .map(|&(delta, r)| {
            let mut sc = Scenario::pure(FockPair::new(total, delta)?, BeamSplitter::new(r)?);
            sc.source = SourceQuality::Purity(purity);
            let params = vec![
                ("delta_in".to_string(), Cell::int(delta)),
                ("r".to_string(), Cell::float(r)),
            ];
            Ok(Series::from_masses(params, &sc.compute::<f64>()?))
        })
        .collect()
}

fn quote(s: &str) -> String {
    format!("\"{s}\"")
}

/// `using` clause selecting rows whose leading columns equal `keys`.
fn select(keys: &[(usize, String)], x: usize, y: usize) -> String {
    let cond: Vec<String> = keys
        .iter()
        .map(|(col, v)| format!("strcol({col}) eq {}", quote(v)))
        .collect();
    format!("{x}:({} ? ${y} : 1/0)", cond.join(" && "))
}

fn script_header(stem: &str, width: u32, height: u32) -> String {
    format!(
        "set datafile separator \",\"\nset terminal pngcairo size {width},{height}\nset output '{stem}.png'\nset xlabel 'Δ_out'\nset ylabel 'p(Δ_out)'\n"
    )
}

fn reflectivity_plot(stem: &str, keys: &[(usize, String)], r_col: usize, x: usize, y: usize) -> String {
    let curves: Vec<String> = REFLECTIVITIES
        .iter()
        .zip(COLORS)
        .map(|(r, color)| {
            let mut k = keys.to_vec();
            k.push((r_col, format_f64(*r)));
            format!(
                "'{stem}.csv' skip 1 using {} with linespoints pt 7 ps 0.5 lc rgb '{color}' title 'r = {r}'",
                select(&k, x, y)
            )
        })
        .collect();
    format!("plot {}\n", curves.join(", \\\n     "))
}

fn walk_figure(id: FigureId, total: u32, delta: i64) -> Result<Figure> {
    let stem = id.name();
    let series = pure_series(total, delta, &[])?;
    let csv = series_csv(&series, true);
    let script = format!(
        "{}set title 'S = {total}, Δ = {delta}'\n{}",
        script_header(stem, 800, 500),
        reflectivity_plot(stem, &[], 1, 2, 3)
    );
    Ok(Figure { id, csv, script, series })
}

fn purity_figure(id: FigureId, total: u32, deltas: [i64; 3], purity: f64) -> Result<Figure> {
    let stem = id.name();
    let series = mixed_series(total, &deltas, purity)?;
    let csv = series_csv(&series, true);
    let mut script = script_header(stem, 800, 1300);
    script.push_str("set multiplot layout 3,1\n");
    for (panel, delta) in ["a", "b", "c"].iter().zip(deltas) {
        script.push_str(&format!("set title '{panel}) purity {purity}, S = {total}, Δ = {delta}'\n"));
        script.push_str(&reflectivity_plot(stem, &[(1, delta.to_string())], 2, 3, 4));
    }
    script.push_str("unset multiplot\n");
    Ok(Figure { id, csv, script, series })
}

fn distinguishability_figure() -> Result<Figure> {
    let id = FigureId::Fig3;
    let stem = id.name();
    let angles = [("pi/24", PI / 24.0), ("pi/6", PI / 6.0), ("pi/3", PI / 3.0), ("pi/2", PI / 2.0)];
    let series: Vec<Series> = angles
        .par_iter()
        .map(|&(label, y)| {
            let mut sc = Scenario::pure(FockPair::new(50, 0)?, BeamSplitter::new(0.5)?);
            sc.angle = DistinguishabilityAngle::new(y)?;
            Ok(Series::from_masses(vec![("y".into(), Cell::text(label))], &sc.compute::<f64>()?))
        })
        .collect::<Result<_>>()?;
    let csv = series_csv(&series, true);
    let mut script = script_header(stem, 1000, 800);
    script.push_str("set multiplot layout 2,2\n");
    for (panel, (label, _)) in ["a", "b", "c", "d"].iter().zip(angles) {
        script.push_str(&format!(
            "set title '{panel}) y = {label}'\nplot '{stem}.csv' skip 1 using {} with impulses lw 2 lc rgb '#1f77b4' notitle\n",
            select(&[(1, label.to_string())], 2, 3)
        ));
    }
    script.push_str("unset multiplot\n");
    Ok(Figure { id, csv, script, series })
}

pub const REGION_PANELS: [(&str, f64, u32); 6] = [
    ("a", 0.36, 10),
    ("b", 0.43, 50),
    ("c", 0.39, 10),
    ("d", 0.45, 50),
    ("e", 0.5, 10),
    ("f", 0.5, 50),
];

fn region_figure() -> Result<Figure> {
    let id = FigureId::FigS4;
    let stem = id.name();
    let columns: Vec<String> = ["panel", "r", "n", "m", "visibility", "nonclassical"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let mut rows = Vec::new();
    for (panel, r, size) in REGION_PANELS {
        let region = visibility_region(size, size, r)?;
        for n in 1..=size {
            for m in 1..=size {
                rows.push(vec![
                    panel.to_string(),
                    format_f64(r),
                    n.to_string(),
                    m.to_string(),
                    format_f64(region.values[(n - 1) as usize][(m - 1) as usize]),
                    u8::from(region.is_nonclassical(n, m)).to_string(),
                ]);
            }
        }
    }
    let mut script = format!(
        "set datafile separator \",\"\nset terminal pngcairo size 900,1300\nset output '{stem}.png'\nset xlabel 'n'\nset ylabel 'm'\nset size ratio -1\nset multiplot layout 3,2\n"
    );
    for (panel, r, size) in REGION_PANELS {
        script.push_str(&format!(
            "set title '{panel}) r = {r}'\nset xrange [0:{lim}]\nset yrange [0:{lim}]\nplot '{stem}.csv' skip 1 using 3:(strcol(1) eq \"{panel}\" && $6 == 1 ? $4 : 1/0) with points pt 5 ps {ps} lc rgb '#1f77b4' notitle\n",
            lim = size + 1,
            ps = if size > 10 { 0.3 } else { 1.5 },
        ));
    }
    script.push_str("unset multiplot\n");
    Ok(Figure {
        id,
        csv: csv(&columns, &rows),
        script,
        series: Vec::new(),
    })
}

pub const LOSS_DELTAS: [i64; 3] = [0, -4, -10];
pub const LOSS_LEVELS: [(&str, f64); 3] = [("0", 1.0), ("0.1", 0.9), ("0.2", 0.8)];
pub const LOSS_PURITIES: [&str; 4] = ["0.21", "0.41", "0.83", "1.00"];
pub const LOSS_REFLECTIVITIES: [f64; 3] = [0.1, 0.2, 0.5];

fn loss_figure() -> Result<Figure> {
    let id = FigureId::FigLossArray;
    let stem = id.name();
    let mut jobs = Vec::new();
    for delta in LOSS_DELTAS {
        for (loss, eta_det) in LOSS_LEVELS {
            for purity in LOSS_PURITIES {
                for r in LOSS_REFLECTIVITIES {
                    jobs.push((delta, loss, eta_det, purity, r));
                }
            }
        }
    }
    let series: Vec<Series> = jobs
        .par_iter()
        .map(|&(delta, loss, eta_det, purity, r)| {
            let mut sc = Scenario::pure(FockPair::new(10, delta)?, BeamSplitter::new(r)?);
            sc.source = SourceQuality::Purity(purity.parse().expect("literal purity"));
            sc.detector = Detector::new(eta_det, 1)?;
            let params = vec![
                ("delta_in".to_string(), Cell::int(delta)),
                ("loss".to_string(), Cell::text(loss)),
                ("purity".to_string(), Cell::text(purity)),
                ("r".to_string(), Cell::float(r)),
            ];
            Ok(Series::from_masses(params, &sc.compute::<f64>()?))
        })
        .collect::<Result<_>>()?;
    let csv = series_csv(&series, true);

    let mut script = String::from("set datafile separator \",\"\nset terminal pngcairo size 1600,1000\n");
    for (panel, delta) in ["a", "b", "c"].iter().zip(LOSS_DELTAS) {
        script.push_str(&format!(
            "set output '{stem}_{panel}.png'\nset multiplot layout 3,4 title '{panel}) S = 10, Δ = {delta}'\n"
        ));
        for (loss, _) in LOSS_LEVELS {
            for purity in LOSS_PURITIES {
                let curves: Vec<String> = LOSS_REFLECTIVITIES
                    .iter()
                    .zip(COLORS)
                    .map(|(r, color)| {
                        let keys = [
                            (1, delta.to_string()),
                            (2, loss.to_string()),
                            (3, purity.to_string()),
                            (4, format_f64(*r)),
                        ];
                        format!(
                            "'{stem}.csv' skip 1 using {} with linespoints pt 7 ps 0.4 lc rgb '{color}' notitle",
                            select(&keys, 5, 6)
                        )
                    })
                    .collect();
                script.push_str(&format!(
                    "set title 'loss {loss}, purity {purity}'\nplot {}\n",
                    curves.join(", \\\n     ")
                ));
            }
        }
        script.push_str("unset multiplot\n");
    }
    Ok(Figure { id, csv, script, series })
}

pub fn build(id: FigureId) -> Result<Figure> {
    match id {
        FigureId::Fig2a => walk_figure(id, 50, 0),
        FigureId::Fig2b => walk_figure(id, 50, -30),
        FigureId::Fig2c => walk_figure(id, 50, -50),
        FigureId::FigS1a => walk_figure(id, 10, 0),
        FigureId::FigS1b => walk_figure(id, 10, -4),
        FigureId::FigS1c => walk_figure(id, 10, -10),
        FigureId::Fig3 => distinguishability_figure(),
        FigureId::FigS2 => purity_figure(id, 10, [0, -4, -10], 0.83),
        FigureId::FigS3 => purity_figure(id, 50, [0, -30, -50], 0.47),
        FigureId::FigS4 => region_figure(),
        FigureId::FigLossArray => loss_figure(),
    }
}
