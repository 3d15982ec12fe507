//! Error norms against exact solutions and observed convergence orders.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::assembly::element_basis;
use crate::dofmap::DofMap;
use crate::error::{Error, Result};
use crate::frame::{BaryFrame, BasisValue};
use crate::mesh::{Point, TriMesh};
use crate::quadrature::{collapsed_gauss_rule, TriangleRule};

/// A function known together with its gradient and Hessian.
pub trait ExactSolution: Sync {
    fn eval(&self, p: Point) -> BasisValue;
}

impl<F> ExactSolution for F
where
    F: Fn(Point) -> BasisValue + Sync,
{
    fn eval(&self, p: Point) -> BasisValue {
        self(p)
    }
}

/// Broken norms of `u - u_h`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorNorms {
    pub l2: f64,
    /// Broken `H¹` seminorm.
    pub h1: f64,
    /// Broken `H²` seminorm.
    pub h2: f64,
}

impl ErrorNorms {
    pub fn as_array(&self) -> [f64; 3] {
        [self.h2, self.h1, self.l2]
    }
}

/// The discrete function with coefficient vector `coeffs`, evaluated with
/// derivatives at barycentric points of triangle `t`.
pub fn eval_discrete(
    mesh: &TriMesh,
    map: &DofMap,
    coeffs: &[f64],
    t: usize,
    points: &[[f64; 3]],
) -> Result<Vec<BasisValue>> {
    if coeffs.len() != map.num_dofs() {
        return Err(Error::DimensionMismatch(format!(
            "{} coefficients for {} degrees of freedom",
            coeffs.len(),
            map.num_dofs()
        )));
    }
    let ev = element_basis(mesh, map, t, points)?;
    let dofs = map.local_to_global(t);
    Ok((0..points.len())
        .map(|q| {
            let mut acc = BasisValue::default();
            for (b, v) in ev.at(q).iter().enumerate() {
                if let Some(g) = dofs[b] {
                    let c = coeffs[g];
                    acc.value += c * v.value;
                    acc.grad[0] += c * v.grad[0];
                    acc.grad[1] += c * v.grad[1];
                    for i in 0..3 {
                        acc.hess[i] += c * v.hess[i];
                    }
                }
            }
            acc
        })
        .collect())
}

/// Degree of the rule used for error norms. The integrands are not
/// polynomial, and with the assembly rule the `L²` error already carries a
/// relative quadrature error near 1e-6 at h = 1/16.
pub const ERROR_RULE_DEGREE: usize = 14;

/// `L²` norm and broken `H¹`, `H²` seminorms of `exact - u_h`, integrated
/// triangle by triangle.
pub fn error_norms(mesh: &TriMesh, map: &DofMap, coeffs: &[f64], exact: &dyn ExactSolution) -> Result<ErrorNorms> {
    error_norms_with_rule(mesh, map, coeffs, exact, &collapsed_gauss_rule(ERROR_RULE_DEGREE))
}

pub fn error_norms_with_rule(
    mesh: &TriMesh,
    map: &DofMap,
    coeffs: &[f64],
    exact: &dyn ExactSolution,
    rule: &TriangleRule,
) -> Result<ErrorNorms> {
    let parts: Vec<[f64; 3]> = (0..mesh.num_triangles())
        .into_par_iter()
        .map(|t| {
            let frame = BaryFrame::new(mesh.triangle_coords(t))?;
            let uh = eval_discrete(mesh, map, coeffs, t, rule.points())?;
            let mut s = [0.0; 3];
            for (q, (l, w)) in rule.iter().enumerate() {
                let u = exact.eval(frame.point(l));
                let d = &uh[q];
                let e0 = u.value - d.value;
                let e1 = [u.grad[0] - d.grad[0], u.grad[1] - d.grad[1]];
                let e2 = [u.hess[0] - d.hess[0], u.hess[1] - d.hess[1], u.hess[2] - d.hess[2]];
                let wa = w * frame.area;
                s[0] += wa * e0 * e0;
                s[1] += wa * (e1[0] * e1[0] + e1[1] * e1[1]);
                s[2] += wa * (e2[0] * e2[0] + 2.0 * e2[1] * e2[1] + e2[2] * e2[2]);
            }
            Ok(s)
        })
        .collect::<Result<_>>()?;
    let mut total = [0.0; 3];
    for s in &parts {
        for i in 0..3 {
            total[i] += s[i];
        }
    }
    Ok(ErrorNorms { l2: total[0].sqrt(), h1: total[1].sqrt(), h2: total[2].sqrt() })
}

/// `order_k = log2(e_{k-1} / e_k)`; the first entry is always absent.
pub fn order_known_exact(errors: &[f64]) -> Vec<Option<f64>> {
    let mut out = vec![None; errors.len()];
    for k in 1..errors.len() {
        let (prev, cur) = (errors[k - 1], errors[k]);
        if prev > 0.0 && cur > 0.0 && prev.is_finite() && cur.is_finite() {
            out[k] = Some((prev / cur).log2());
        }
    }
    out
}

/// `order_k = log2 |(v_{k-2} - v_{k-1}) / (v_{k-1} - v_k)|`; the first two
/// entries are always absent.
pub fn order_successive(values: &[f64]) -> Vec<Option<f64>> {
    let mut out = vec![None; values.len()];
    for k in 2..values.len() {
        let num = values[k - 2] - values[k - 1];
        let den = values[k - 1] - values[k];
        if num != 0.0 && den != 0.0 && num.is_finite() && den.is_finite() {
            out[k] = Some((num / den).abs().log2());
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrderMode {
    KnownExact,
    Successive,
}

/// One mesh level of a convergence study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelRow {
    pub level: usize,
    pub h: f64,
    pub dofs: usize,
    pub values: Vec<Option<f64>>,
    pub orders: Vec<Option<f64>>,
}

/// Per-level quantities with their observed orders, one column per quantity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTable {
    pub columns: Vec<String>,
    pub mode: OrderMode,
    pub rows: Vec<LevelRow>,
}

impl ConvergenceTable {
    pub fn new(columns: Vec<String>, mode: OrderMode) -> Self {
        Self { columns, mode, rows: Vec::new() }
    }

    /// Appends a level and recomputes every order column. Missing trailing
    /// values (fewer eigenvalues found) are recorded as absent.
    pub fn push(&mut self, h: f64, dofs: usize, values: &[f64]) {
        let k = self.columns.len();
        let values = (0..k).map(|i| values.get(i).copied()).collect();
        let level = self.rows.len() + 1;
        self.rows.push(LevelRow { level, h, dofs, values, orders: vec![None; k] });
        self.recompute();
    }

    fn recompute(&mut self) {
        for c in 0..self.columns.len() {
            // a gap in a column breaks the order sequence at that level
            let col: Vec<f64> = self.rows.iter().map(|r| r.values[c].unwrap_or(f64::NAN)).collect();
            let orders = match self.mode {
                OrderMode::KnownExact => order_known_exact(&col),
                OrderMode::Successive => order_successive(&col),
            };
            for (row, o) in self.rows.iter_mut().zip(orders) {
                row.orders[c] = o;
            }
        }
    }

    pub fn column(&self, c: usize) -> Vec<Option<f64>> {
        self.rows.iter().map(|r| r.values[c]).collect()
    }

    pub fn last_orders(&self) -> Vec<Option<f64>> {
        self.rows.last().map(|r| r.orders.clone()).unwrap_or_default()
    }

    /// CSV with header `level,h,dofs,value_1..,order_1..`; absent entries are
    /// empty cells.
    pub fn to_csv(&self) -> String {
        let k = self.columns.len();
        let mut out = String::from("level,h,dofs");
        for i in 1..=k {
            let _ = write!(out, ",value_{i}");
        }
        for i in 1..=k {
            let _ = write!(out, ",order_{i}");
        }
        out.push('\n');
        for r in &self.rows {
            let _ = write!(out, "{},{},{}", r.level, format_significant(r.h, 10), r.dofs);
            for v in r.values.iter().chain(&r.orders) {
                out.push(',');
                if let Some(v) = v {
                    out.push_str(&format_significant(*v, 10));
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Formats `x` with `digits` significant digits, in plain notation when the
/// magnitude allows it.
pub fn format_significant(x: f64, digits: usize) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return "0".into();
    }
    let digits = digits.max(1);
    // round first so that 9.9999999999 does not print with one digit too many
    let sci = format!("{:.*e}", digits - 1, x);
    let exp: i32 = sci.split('e').nth(1).and_then(|e| e.parse().ok()).unwrap_or(0);
    if (-5..15).contains(&exp) {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        sci
    }
}
