//! Result rows and their CSV form.

use std::cmp::Ordering;
use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use super::config::Experiment;
use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "experiment,seed,param,method,metric,value";

macro_rules! named_enum {
    ($(#[$m:meta])* $name:ident { $($variant:ident => $s:literal),+ $(,)? }) => {
        $(#[$m])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
        pub enum $name { $($variant),+ }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self { $($name::$variant => $s),+ }
            }

            pub fn parse(s: &str) -> Result<Self> {
                Self::ALL
                    .iter()
                    .copied()
                    .find(|v| v.as_str() == s)
                    .ok_or_else(|| Error::invalid(format!(concat!("unknown ", stringify!($name), " `{}`"), s)))
            }
        }

        impl std::fmt::Display for $name {
            fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
                f.write_str(self.as_str())
            }
        }
    };
}

named_enum! {
    /// `exact` marks sampling-free (quadrature or enumeration) quantities,
    /// `net` the neural score model.
    Method {
        Sm => "sm",
        Mle => "mle",
        Pl => "pl",
        Rm => "rm",
        Exact => "exact",
        Net => "net",
    }
}

named_enum! {
    Metric {
        Log10ParamError => "log10_param_error",
        Log10ErrorMedian => "log10_error_median",
        Log10ErrorQ90 => "log10_error_q90",
        FitFailed => "fit_failed",
        WorstRatio => "worst_ratio",
        CpRestricted => "c_p_restricted",
        GammaSmOp => "gamma_sm_op",
        GammaMleOp => "gamma_mle_op",
        ELap2 => "e_lap2",
        EJf4 => "e_jf4",
        ErrorAlignmentDeg => "error_alignment_deg",
        EllipseAngleDeg => "ellipse_angle_deg",
        Ellipse50Major => "ellipse50_major",
        Ellipse50Minor => "ellipse50_minor",
        Ellipse90Major => "ellipse90_major",
        Ellipse90Minor => "ellipse90_minor",
        Tv => "tv",
        LogWeightRatio => "log_weight_ratio",
        ModeScoreError => "mode_score_error",
        TailLoss => "tail_loss",
        Cp => "c_p",
        CLsLower => "c_ls_lower",
        CLsUpper => "c_ls_upper",
        CIs => "c_is",
        ChainHolds => "chain_holds",
        ParamError => "param_error",
        RmIdentityError => "rm_identity_error",
        PlIdentityError => "pl_identity_error",
        CAtLower => "c_at_lower",
        KlBound => "kl_bound",
        EmpiricalKl => "empirical_kl",
        RateRn => "rate_rn",
        LhsDeriv => "lhs_deriv",
        RhsDeriv => "rhs_deriv",
        RelativeGap => "relative_gap",
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub experiment: Experiment,
    /// Replicate index; `None` for sampling-free or aggregated rows.
    pub seed: Option<u64>,
    pub param: f64,
    pub method: Method,
    pub metric: Metric,
    pub value: f64,
}

impl ResultRow {
    pub fn new(experiment: Experiment, seed: Option<u64>, param: f64, method: Method, metric: Metric, value: f64) -> Self {
        Self { experiment, seed, param, method, metric, value }
    }

    fn canonical_cmp(&self, other: &Self) -> Ordering {
        self.experiment
            .cmp(&other.experiment)
            .then(self.param.total_cmp(&other.param))
            .then(self.seed.cmp(&other.seed))
            .then(self.method.cmp(&other.method))
            .then(self.metric.cmp(&other.metric))
            .then(self.value.total_cmp(&other.value))
    }

    pub fn to_csv_line(&self) -> String {
        let seed = self.seed.map(|s| s.to_string()).unwrap_or_default();
        format!("{},{seed},{:?},{},{},{:?}", self.experiment, self.param, self.method, self.metric, self.value)
    }

    pub fn from_csv_line(line: &str) -> Result<Self> {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 6 {
            return Err(Error::invalid(format!("expected 6 fields, got {}: `{line}`", f.len())));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|_| Error::invalid(format!("bad number `{s}`")));
        Ok(Self {
            experiment: f[0].parse()?,
            seed: if f[1].is_empty() {
                None
            } else {
                Some(f[1].parse().map_err(|_| Error::invalid(format!("bad seed `{}`", f[1])))?)
            },
            param: num(f[2])?,
            method: Method::parse(f[3])?,
            metric: Metric::parse(f[4])?,
            value: num(f[5])?,
        })
    }
}

/// Sorts by experiment, param, seed, method, then metric.
pub fn sort_canonical(rows: &mut [ResultRow]) {
    rows.sort_by(ResultRow::canonical_cmp);
}

/// CSV text of the rows in canonical order.
pub fn render_csv(rows: &[ResultRow]) -> Result<String> {
    if rows.is_empty() {
        return Err(Error::EmptyRows);
    }
    let mut sorted = rows.to_vec();
    sort_canonical(&mut sorted);
    let mut out = String::with_capacity(64 * rows.len());
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in &sorted {
        let _ = writeln!(out, "{}", r.to_csv_line());
    }
    Ok(out)
}

pub fn emit_csv(rows: &[ResultRow], path: &Path) -> Result<()> {
    let text = render_csv(rows)?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn parse_csv(text: &str) -> Result<Vec<ResultRow>> {
    let mut lines = text.lines();
    if lines.next() != Some(CSV_HEADER) {
        return Err(Error::invalid("missing or wrong CSV header"));
    }
    lines.filter(|l| !l.is_empty()).map(ResultRow::from_csv_line).collect()
}

pub fn read_csv(path: &Path) -> Result<Vec<ResultRow>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_csv(&text)
}

/// Values of `metric` for `method` at `param`, in row order.
pub fn select(rows: &[ResultRow], param: f64, method: Method, metric: Metric) -> Vec<f64> {
    rows.iter()
        .filter(|r| r.param == param && r.method == method && r.metric == metric)
        .map(|r| r.value)
        .collect()
}

/// Distinct params in ascending order.
pub fn params(rows: &[ResultRow]) -> Vec<f64> {
    let mut v: Vec<f64> = rows.iter().map(|r| r.param).collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

/// Median with NaN-free input; `+∞` entries count as larger than everything.
pub fn median(values: &[f64]) -> Option<f64> {
    quantile(values, 0.5)
}

/// Linear-interpolation sample quantile.
pub fn quantile(values: &[f64], p: f64) -> Option<f64> {
    if values.is_empty() || values.iter().any(|v| v.is_nan()) {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = p.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    if lo == hi || v[lo] == v[hi] {
        return Some(v[lo]);
    }
    Some(v[lo] + (pos - lo as f64) * (v[hi] - v[lo]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(seed: Option<u64>, param: f64, method: Method, value: f64) -> ResultRow {
        ResultRow::new(Experiment::BimodalCut, seed, param, method, Metric::Log10ParamError, value)
    }

    #[test]
    fn empty_rows_refused() {
        assert!(matches!(render_csv(&[]), Err(Error::EmptyRows)));
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(emit_csv(&[], &dir.path().join("x.csv")), Err(Error::EmptyRows)));
    }

    #[test]
    fn canonical_order_and_round_trip() {
        let rows = vec![
            row(Some(1), 2.0, Method::Mle, -2.5),
            row(Some(0), 2.0, Method::Sm, f64::INFINITY),
            row(None, 1.0, Method::Exact, 1e-300),
            row(Some(0), 1.0, Method::Mle, 0.1),
            row(Some(0), 1.0, Method::Sm, f64::NAN),
        ];
        let text = render_csv(&rows).unwrap();
        let mut shuffled = rows.clone();
        shuffled.reverse();
        assert_eq!(render_csv(&shuffled).unwrap(), text);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines[1], "bimodal_cut,,1.0,exact,log10_param_error,1e-300");
        assert_eq!(lines[2], "bimodal_cut,0,1.0,sm,log10_param_error,NaN");
        assert_eq!(lines[5], "bimodal_cut,1,2.0,mle,log10_param_error,-2.5");
        let back = parse_csv(&text).unwrap();
        assert_eq!(back.len(), 5);
        assert_eq!(back[4], rows[0]);
        assert_eq!(back[3].value, f64::INFINITY);
    }

    #[test]
    fn io_error_carries_path() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("missing").join("x.csv");
        match emit_csv(&[row(None, 1.0, Method::Sm, 0.0)], &p) {
            Err(Error::Io { path, .. }) => assert_eq!(path, p),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn quantiles() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&[1.0, 2.0, 3.0, 4.0]), Some(2.5));
        assert_eq!(median(&[1.0, f64::INFINITY, f64::INFINITY]), Some(f64::INFINITY));
        assert_eq!(median(&[]), None);
        assert_eq!(quantile(&[0.0, 10.0], 0.9), Some(9.0));
    }
}
