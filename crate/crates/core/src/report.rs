//! Machine-readable run reports tying the pipeline together.

use std::time::Instant;

use serde::Serialize;
use serde_json::Value;

use crate::certificate::{base_is_valid, certify, BasePoint, CertificateTower};
use crate::error::{Error, Result};
use crate::expr::{print_poly, print_ratfunc};
use crate::field::VectorField;
use crate::numeric::{check_constancy, flow, NumericReport};
use crate::poly::Poly;
use crate::witness::{classify_with_hints, Classification, Exclusion, SearchBounds, Status};

pub const SCHEMA: &str = "1";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Trajectory settings for the numeric cross-check.
pub const NUMERIC_T_END: f64 = 1.0;
pub const NUMERIC_H: f64 = 1e-3;
pub const NUMERIC_TOL: f64 = 1e-6;

#[derive(Clone, Debug, Serialize)]
pub struct InputReport {
    pub x1: String,
    pub x2: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct WitnessReport {
    pub level: u8,
    pub a: String,
    pub n: Option<u32>,
    pub first_integral: Option<String>,
    pub summary: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassificationReport {
    pub level_found: Option<u8>,
    pub status: Status,
    pub semantics: String,
    pub witness: Option<WitnessReport>,
    pub exclusions: Vec<Exclusion>,
    pub coefficient_field: &'static str,
    pub note: Option<String>,
    pub common_factor: Option<String>,
    pub denominator_generators: Vec<String>,
}

impl From<&Classification> for ClassificationReport {
    fn from(c: &Classification) -> Self {
        ClassificationReport {
            level_found: c.level_found,
            status: c.status,
            semantics: c.semantics(),
            witness: c.witness.as_ref().map(|w| WitnessReport {
                level: w.level,
                a: print_ratfunc(&w.a),
                n: w.n,
                first_integral: w.first_integral.as_ref().map(print_ratfunc),
                summary: w.to_string(),
            }),
            exclusions: c.exclusions.clone(),
            coefficient_field: c.coefficient_field,
            note: c.note.clone(),
            common_factor: c.common_factor.as_ref().map(print_poly),
            denominator_generators: c.den_gens.iter().map(print_poly).collect(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct NumericSection {
    pub start: Option<(f64, f64)>,
    pub t_end: f64,
    pub h: f64,
    pub result: Option<NumericReport>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Timings {
    pub classify_ms: u128,
    pub certify_ms: u128,
    pub numeric_ms: u128,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub schema: &'static str,
    pub version: &'static str,
    pub input: InputReport,
    pub b_sequence: Vec<String>,
    pub classification: ClassificationReport,
    pub certificate: Option<Value>,
    pub numeric: Option<NumericSection>,
    /// Wall-clock timings; omitted unless requested so reports stay reproducible.
    pub timings: Option<Timings>,
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub bounds: SearchBounds,
    pub hints: Vec<Poly>,
    pub base: Option<BasePoint>,
    pub numeric: bool,
    pub timings: bool,
}

impl RunReport {
    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// The pipeline result kept alongside its report.
pub struct Run {
    pub report: RunReport,
    pub classification: Classification,
    pub tower: Option<CertificateTower>,
}

/// Classifies, certifies and cross-checks `vf`.
pub fn run(vf: &VectorField, opts: &RunOptions) -> Result<Run> {
    let mut timings = Timings::default();
    let clock = Instant::now();
    let classification = classify_with_hints(vf, &opts.bounds, &opts.hints)?;
    timings.classify_ms = clock.elapsed().as_millis();

    let clock = Instant::now();
    let tower = match &classification.witness {
        Some(w) => {
            let t = certify(vf, w, opts.base)?;
            if !t.verified {
                return Err(Error::InternalVerifyFailed("certificate tower failed verification".into()));
            }
            Some(t)
        }
        None => None,
    };
    timings.certify_ms = clock.elapsed().as_millis();

    let clock = Instant::now();
    let numeric = match (&tower, opts.numeric) {
        (Some(t), true) => Some(numeric_section(vf, t)),
        _ => None,
    };
    timings.numeric_ms = clock.elapsed().as_millis();

    let report = RunReport {
        schema: SCHEMA,
        version: VERSION,
        input: InputReport { x1: print_poly(vf.x1()), x2: print_poly(vf.x2()) },
        b_sequence: vf.b_sequence(2).entries().iter().map(print_ratfunc).collect(),
        classification: ClassificationReport::from(&classification),
        certificate: tower.as_ref().map(CertificateTower::to_json),
        numeric,
        timings: opts.timings.then_some(timings),
    };
    Ok(Run { report, classification, tower })
}

/// Starts the trajectory at the first regular spiral point after the base
/// whose check completes.
pub fn numeric_section(vf: &VectorField, t: &CertificateTower) -> NumericSection {
    let mut last_err = None;
    for p in BasePoint::spiral().filter(|p| *p != t.base && base_is_valid(vf, &t.nodes, p)).take(8) {
        let start = (p.x1(), p.x2());
        let res = flow(vf, start, NUMERIC_T_END, NUMERIC_H).and_then(|traj| check_constancy(vf, t, &traj, NUMERIC_TOL));
        match res {
            Ok(r) => {
                return NumericSection { start: Some(start), t_end: NUMERIC_T_END, h: NUMERIC_H, result: Some(r), error: None }
            }
            Err(e) => last_err = Some(e),
        }
    }
    NumericSection {
        start: None,
        t_end: NUMERIC_T_END,
        h: NUMERIC_H,
        result: None,
        error: Some(last_err.map_or("no regular start point".into(), |e| e.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_is_reproducible() {
        let vf = VectorField::parse("1", "x2").unwrap();
        let opts = RunOptions { numeric: true, ..Default::default() };
        let a = run(&vf, &opts).unwrap().report.to_json_string();
        let b = run(&vf, &opts).unwrap().report.to_json_string();
        assert_eq!(a, b);
        let v: Value = serde_json::from_str(&a).unwrap();
        assert_eq!(v["schema"], "1");
        assert_eq!(v["classification"]["level_found"], 1);
        assert_eq!(v["classification"]["witness"]["a"], "1/x2");
        assert_eq!(v["numeric"]["result"]["pass"], true);
        assert_eq!(v["timings"], Value::Null);
    }
}
