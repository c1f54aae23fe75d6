//! Per-point diagnostic records.

use serde::{Deserialize, Serialize};

use super::{Flatness, Label, PowerFit, SlopeFit};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PointReport {
    pub position: Vec<f64>,
    pub normal: Vec<f64>,
    /// `(r, density)` pairs.
    pub density: Vec<(f64, f64)>,
    pub holder: Option<PowerFit>,
    pub nondeg: Option<PowerFit>,
    pub flatness: Option<Flatness>,
    pub slope: Option<SlopeFit>,
    pub label: Option<Label>,
    /// Checks that could not run at this point, with the reason.
    pub skipped: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub a_star: Option<f64>,
    pub points: Vec<PointReport>,
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl DiagnosticsReport {
    pub const CSV_HEADER: &'static str =
        "x,nu,label,density_min,density_max,holder_slope,holder_c1,nondeg_slope,nondeg_c,flatness,slope_alpha";

    pub fn csv_rows(&self) -> Vec<String> {
        let join = |v: &[f64]| v.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(";");
        self.points
            .iter()
            .map(|p| {
                let dmin = p.density.iter().map(|d| d.1).reduce(f64::min);
                let dmax = p.density.iter().map(|d| d.1).reduce(f64::max);
                let label = match p.label {
                    Some(Label::Regular) => "regular",
                    Some(Label::Singular) => "singular",
                    Some(Label::Unresolved) => "unresolved",
                    None => "",
                };
                format!(
                    "{},{},{},{},{},{},{},{},{},{},{}",
                    join(&p.position),
                    join(&p.normal),
                    label,
                    opt(dmin),
                    opt(dmax),
                    opt(p.holder.as_ref().map(|f| f.slope)),
                    opt(p.holder.as_ref().map(|f| f.envelope)),
                    opt(p.nondeg.as_ref().map(|f| f.slope)),
                    opt(p.nondeg.as_ref().map(|f| f.envelope)),
                    opt(p.flatness.as_ref().map(|f| f.eps)),
                    opt(p.slope.as_ref().map(|s| s.alpha)),
                )
            })
            .collect()
    }
}
