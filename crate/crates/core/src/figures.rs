//! Field-sweep tables for the level, polarization, Raman and noise curves,
//! with deterministic CSV and JSON output.
//!
//! Two geometries are covered: a single NV with the field along its own x̂
//! (`fig2`), and all four orientations under a field along the cubic [100]
//! axis (`fig3`).

use std::fmt::Write as _;

use serde_json::{Map, Value};

use crate::error::Result;
use crate::hamiltonian::{build_excited, build_ground, FieldRange};
use crate::model::{lab_field_to_nv, DjtParams, FieldNV, NvOrientation, PhysicalConstants, StrainNV};
use crate::optics::{degree_from_probabilities, dipole_set_nv0, doublet_absorption, noise_suppression, raman_coupling, Doublet};

/// Detuning handed to the Raman calculation. Only R·Δ̄ is tabulated, which
/// does not depend on it.
const TABLE_DETUNING: f64 = 1000.0;

const X: [f64; 3] = [1.0, 0.0, 0.0];
const Y: [f64; 3] = [0.0, 1.0, 0.0];

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
}

/// A header plus rows, in emission order.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

/// Shortest decimal that parses back to the same f64. Negative zero is
/// written as 0 so that sign-of-zero noise never reaches golden files.
pub fn format_number(v: f64) -> String {
    if v == 0.0 {
        "0".to_string()
    } else {
        format!("{v}")
    }
}

impl Table {
    fn new(header: Vec<&'static str>) -> Self {
        Table { header, rows: Vec::new() }
    }

    /// CSV with a header row and LF line endings.
    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            for (k, c) in row.iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                match c {
                    Cell::Num(v) => out.push_str(&format_number(*v)),
                    Cell::Text(t) => {
                        let _ = write!(out, "{t}");
                    }
                }
            }
            out.push('\n');
        }
        out
    }

    /// One JSON object per row.
    pub fn to_json(&self) -> Value {
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let mut m = Map::new();
                for (h, c) in self.header.iter().zip(row) {
                    let v = match c {
                        Cell::Num(x) => serde_json::Number::from_f64(*x).map(Value::Number).unwrap_or(Value::Null),
                        Cell::Text(t) => Value::String(t.clone()),
                    };
                    m.insert((*h).to_string(), v);
                }
                Value::Object(m)
            })
            .collect();
        Value::Array(rows)
    }

    /// Numeric column by header name.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.header.iter().position(|h| *h == name)?;
        self.rows
            .iter()
            .map(|r| match &r[k] {
                Cell::Num(v) => Some(*v),
                Cell::Text(_) => None,
            })
            .collect()
    }

    /// Rows whose text cells include every value in `labels`.
    pub fn filter(&self, labels: &[&str]) -> Table {
        let rows = self
            .rows
            .iter()
            .filter(|r| labels.iter().all(|l| r.iter().any(|c| matches!(c, Cell::Text(t) if t == l))))
            .cloned()
            .collect();
        Table { header: self.header.clone(), rows }
    }
}

/// A named DJT setting.
#[derive(Debug, Clone, PartialEq)]
pub struct Case {
    pub label: String,
    pub djt: DjtParams,
}

impl Case {
    pub fn new(upsilon: f64, alpha: f64) -> Result<Self> {
        let djt = DjtParams::new(upsilon, alpha)?;
        let label = if upsilon == 0.0 { "U0".to_string() } else { format!("U{upsilon}_a{alpha}") };
        Ok(Case { label, djt })
    }
}

/// Υ = 0, then Υ = `upsilon` at α = 0°, 90°, −90° and 180°.
pub fn standard_cases(upsilon: f64) -> Result<Vec<Case>> {
    let mut v = vec![Case::new(0.0, 0.0)?];
    for a in [0.0, 90.0, -90.0, 180.0] {
        v.push(Case::new(upsilon, a)?);
    }
    Ok(v)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fig2 {
    /// Ground energies.
    pub a: Table,
    /// Polarization degrees of both doublets on the NV x̂/ŷ axes.
    pub b: Table,
    /// |R·Δ̄| for x̂ control and ŷ signal.
    pub c: Table,
    /// Splitting and noise factor for x̂ control.
    pub d: Table,
}

/// A [111] NV with the field along its own x̂ axis.
pub fn fig2(range: &FieldRange, cases: &[Case], consts: &PhysicalConstants) -> Result<Fig2> {
    let ds = dipole_set_nv0(consts);
    let strain = StrainNV::zero();
    let mut a = Table::new(vec!["field_V_per_um", "e_lower_GHz", "e_upper_GHz", "case"]);
    let mut b = Table::new(vec!["field_V_per_um", "degree_lower", "degree_upper", "case"]);
    let mut c = Table::new(vec!["field_V_per_um", "r_times_delta_GHz2_um2_per_V2", "case"]);
    let mut d = Table::new(vec!["field_V_per_um", "splitting_GHz", "p_noise", "case"]);
    for case in cases {
        let label = || Cell::Text(case.label.clone());
        for f in range.values() {
            let field = FieldNV::new(f, 0.0, 0.0);
            let h = build_ground(&case.djt, &field, &strain, consts);
            let ground = h.eigensystem();
            let excited = build_excited(&field, &strain, consts).eigensystem();
            let r = h.coefficients.half_splitting();
            a.rows.push(vec![Cell::Num(f), Cell::Num(-r), Cell::Num(r), label()]);
            let (lx, ly) = doublet_absorption(&ground, Doublet::Lower, &ds, X, Y)?;
            let (ux, uy) = doublet_absorption(&ground, Doublet::Upper, &ds, X, Y)?;
            b.rows.push(vec![
                Cell::Num(f),
                Cell::Num(degree_from_probabilities(lx, ly)?),
                Cell::Num(degree_from_probabilities(ux, uy)?),
                label(),
            ]);
            let raman = raman_coupling(&ground, &excited, &ds, Y, X, TABLE_DETUNING)?;
            c.rows.push(vec![Cell::Num(f), Cell::Num(raman.r_times_delta.norm()), label()]);
            let p = noise_suppression(&ground, &ds, X)?.p;
            d.rows.push(vec![Cell::Num(f), Cell::Num(2.0 * r), Cell::Num(p), label()]);
        }
    }
    Ok(Fig2 { a, b, c, d })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fig3 {
    /// Ground energies per orientation; "all" is the orientation mean.
    pub b: Table,
    /// Polarization degrees on the lab [100]/[010] axes; "all" sums the
    /// absorption of the four orientations.
    pub c: Table,
    /// |R·Δ̄| for [100] control and [010] signal; "all" is the mean.
    pub d: Table,
    /// Noise factor for [100] control; "all" sums coupling probabilities.
    pub e: Table,
}

pub const ENSEMBLE_LABEL: &str = "all";

/// All four orientations with the field along lab [100].
pub fn fig3(range: &FieldRange, cases: &[Case], consts: &PhysicalConstants) -> Result<Fig3> {
    let ds = dipole_set_nv0(consts);
    let strain = StrainNV::zero();
    let orients = NvOrientation::all();
    let mut b = Table::new(vec!["field_V_per_um", "e_lower_GHz", "e_upper_GHz", "orientation", "case"]);
    let mut c = Table::new(vec!["field_V_per_um", "degree_lower", "degree_upper", "orientation", "case"]);
    let mut d = Table::new(vec!["field_V_per_um", "r_times_delta_GHz2_um2_per_V2", "orientation", "case"]);
    let mut e = Table::new(vec!["field_V_per_um", "p_noise", "orientation", "case"]);
    for case in cases {
        for f in range.values() {
            let mut sum_r = 0.0;
            let mut sum_abs = [0.0; 4];
            let mut sum_raman = 0.0;
            let (mut up, mut total) = (0.0, 0.0);
            for o in &orients {
                let tags = || [Cell::Text(o.label.to_string()), Cell::Text(case.label.clone())];
                let field = lab_field_to_nv([f, 0.0, 0.0], o);
                let h = build_ground(&case.djt, &field, &strain, consts);
                let ground = h.eigensystem();
                let excited = build_excited(&field, &strain, consts).eigensystem();
                let (ax, ay) = (o.to_nv(X), o.to_nv(Y));
                let r = h.coefficients.half_splitting();
                sum_r += r;
                b.rows.push([vec![Cell::Num(f), Cell::Num(-r), Cell::Num(r)], tags().to_vec()].concat());
                let (lx, ly) = doublet_absorption(&ground, Doublet::Lower, &ds, ax, ay)?;
                let (ux, uy) = doublet_absorption(&ground, Doublet::Upper, &ds, ax, ay)?;
                for (acc, v) in sum_abs.iter_mut().zip([lx, ly, ux, uy]) {
                    *acc += v;
                }
                c.rows.push(
                    [
                        vec![Cell::Num(f), Cell::Num(degree_from_probabilities(lx, ly)?), Cell::Num(degree_from_probabilities(ux, uy)?)],
                        tags().to_vec(),
                    ]
                    .concat(),
                );
                let raman = raman_coupling(&ground, &excited, &ds, ay, ax, TABLE_DETUNING)?.r_times_delta.norm();
                sum_raman += raman;
                d.rows.push([vec![Cell::Num(f), Cell::Num(raman)], tags().to_vec()].concat());
                let nf = noise_suppression(&ground, &ds, ax)?;
                let part = &nf.per_orientation[0];
                up += part.upper;
                total += part.total;
                e.rows.push([vec![Cell::Num(f), Cell::Num(nf.p)], tags().to_vec()].concat());
            }
            let n = orients.len() as f64;
            let tags = || vec![Cell::Text(ENSEMBLE_LABEL.into()), Cell::Text(case.label.clone())];
            let r = sum_r / n;
            b.rows.push([vec![Cell::Num(f), Cell::Num(-r), Cell::Num(r)], tags()].concat());
            c.rows.push(
                [
                    vec![
                        Cell::Num(f),
                        Cell::Num(degree_from_probabilities(sum_abs[0], sum_abs[1])?),
                        Cell::Num(degree_from_probabilities(sum_abs[2], sum_abs[3])?),
                    ],
                    tags(),
                ]
                .concat(),
            );
            d.rows.push([vec![Cell::Num(f), Cell::Num(sum_raman / n)], tags()].concat());
            e.rows.push([vec![Cell::Num(f), Cell::Num(up / total)], tags()].concat());
        }
    }
    Ok(Fig3 { b, c, d, e })
}
