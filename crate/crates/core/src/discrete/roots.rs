//! Roots of `G_{S_N}(s) = s^{cN}` in the closed unit disk.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Result, RuinError};
use crate::model::{NetProfit, SeasonalModel};
use crate::scalar::Scalar;

/// Slack on `|s| <= 1` when deciding membership of the closed disk.
pub const DISK_SLACK: f64 = 1e-9;
/// Largest accepted `|G(s) - s^{cN}|` at a reported root.
pub const MAX_RESIDUAL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RootSet {
    /// Roots with multiplicity; the root `s = 1` comes first.
    pub roots: Vec<Complex64>,
    pub on_boundary: Vec<bool>,
    pub residual: f64,
    /// Multiplicity of `s = 1` (2 for a neutral model with positive variance).
    pub unit_multiplicity: usize,
}

impl RootSet {
    pub fn count(&self) -> usize {
        self.roots.len()
    }

    /// Roots other than `s = 1`.
    pub fn non_unit(&self) -> &[Complex64] {
        &self.roots[self.unit_multiplicity..]
    }
}

/// Coefficients (ascending) of `G_{S_N}(s) - s^{cN}`.
pub fn characteristic_polynomial<T: Scalar>(model: &SeasonalModel<T>) -> Vec<f64> {
    let g = model.period_sum().to_f64();
    let cn = model.period_premium();
    let mut q: Vec<f64> = g.probs().to_vec();
    if q.len() <= cn {
        q.resize(cn + 1, 0.0);
    }
    q[cn] -= 1.0;
    while q.len() > 1 && q.last() == Some(&0.0) {
        q.pop();
    }
    q
}

pub fn eval_real_poly(coeffs: &[f64], s: Complex64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * s + c)
}

fn eval_with_derivative(coeffs: &[Complex64], s: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        dp = dp * s + p;
        p = p * s + c;
    }
    (p, dp)
}

/// Divides `poly` (ascending) by `(s - root)`, dropping the remainder.
pub fn deflate(poly: &[Complex64], root: Complex64) -> Vec<Complex64> {
    let d = poly.len() - 1;
    let mut out = vec![Complex64::new(0.0, 0.0); d];
    let mut carry = Complex64::new(0.0, 0.0);
    for k in (1..=d).rev() {
        carry = poly[k] + carry * root;
        out[k - 1] = carry;
    }
    out
}

fn to_complex(p: &[f64]) -> Vec<Complex64> {
    p.iter().map(|&c| Complex64::new(c, 0.0)).collect()
}

/// Eigenvalues of the companion matrix of `poly` (ascending, nonzero leading term).
fn companion_roots(poly: &[Complex64]) -> Vec<Complex64> {
    let m = poly.len() - 1;
    if m == 0 {
        return Vec::new();
    }
    let lead = poly[m].re;
    if m == 1 {
        return vec![Complex64::new(-poly[0].re / lead, 0.0)];
    }
    let mat = DMatrix::<f64>::from_fn(m, m, |i, j| {
        if j == m - 1 {
            -poly[i].re / lead
        } else if i == j + 1 {
            1.0
        } else {
            0.0
        }
    });
    mat.complex_eigenvalues().iter().copied().collect()
}

fn polish(poly: &[Complex64], mut z: Complex64) -> Complex64 {
    for _ in 0..100 {
        let (p, dp) = eval_with_derivative(poly, z);
        if p.norm() == 0.0 || dp.norm() == 0.0 {
            break;
        }
        let step = p / dp;
        let next = z - step;
        if eval_with_derivative(poly, next).0.norm() > p.norm() {
            break;
        }
        z = next;
        if step.norm() <= 4.0 * f64::EPSILON * z.norm().max(1.0) {
            break;
        }
    }
    z
}

/// All roots of `G_{S_N}(s) - s^{cN}` with `|s| <= 1`, counted with multiplicity.
///
/// The factor `(s - 1)` (squared for a neutral model) is divided out exactly;
/// the rest come from companion-matrix eigenvalues polished by Newton's method.
pub fn find_unit_disk_roots<T: Scalar>(model: &SeasonalModel<T>) -> Result<RootSet> {
    if model.is_degenerate() {
        return Err(RuinError::DegenerateModel(
            "P(S_N = cN) = 1: G(s) - s^cN vanishes identically".into(),
        ));
    }
    let q = characteristic_polynomial(model);
    let npc = model.net_profit();
    let unit_multiplicity = if npc == NetProfit::Neutral { 2 } else { 1 };
    let one = Complex64::new(1.0, 0.0);
    let mut rest = to_complex(&q);
    for _ in 0..unit_multiplicity {
        rest = deflate(&rest, one);
    }
    let mut others: Vec<Complex64> = companion_roots(&rest)
        .into_iter()
        .map(|z| polish(&rest, z))
        .filter(|z| z.norm() <= 1.0 + DISK_SLACK)
        .collect();
    others.sort_by(|a, b| {
        a.norm()
            .total_cmp(&b.norm())
            .then(a.arg().total_cmp(&b.arg()))
    });
    let mut roots = vec![one; unit_multiplicity];
    roots.extend(others);
    let residual = roots
        .iter()
        .map(|&z| eval_real_poly(&q, z).norm())
        .fold(0.0, f64::max);
    if residual > MAX_RESIDUAL {
        return Err(RuinError::RootFailure { residual });
    }
    if npc == NetProfit::Positive && roots.len() != model.period_premium() {
        return Err(RuinError::RootFailure { residual });
    }
    let on_boundary = roots
        .iter()
        .map(|z| (z.norm() - 1.0).abs() <= DISK_SLACK)
        .collect();
    Ok(RootSet {
        roots,
        on_boundary,
        residual,
        unit_multiplicity,
    })
}

fn require_strict_npc<T: Scalar>(model: &SeasonalModel<T>) -> Result<()> {
    match model.net_profit() {
        NetProfit::Positive => Ok(()),
        other => Err(RuinError::NpcViolation(format!(
            "cN - E S_N = {:?} ({other:?}); need strictly positive",
            model.safety_margin()
        ))),
    }
}

/// Numerator `P` (ascending, degree `<= c - 1`) of the survival generating function
/// `P(s) / (G(s) - s^c)` for a homogeneous model: `P` vanishes at every non-unit
/// root in the disk (to full multiplicity) and `P(1) = c - EX`.
pub fn solve_numerator<T: Scalar>(model: &SeasonalModel<T>, roots: &RootSet) -> Result<Vec<f64>> {
    if model.period() != 1 {
        return Err(RuinError::Domain("numerator solve needs a homogeneous model (N = 1)".into()));
    }
    require_strict_npc(model)?;
    let c = model.c;
    let interior = roots.non_unit();
    if interior.len() != c - 1 {
        return Err(RuinError::RootFailure {
            residual: roots.residual,
        });
    }
    let margin = model.safety_margin().as_f64();
    let one = Complex64::new(1.0, 0.0);
    let mut poly = vec![Complex64::new(margin, 0.0)];
    for &r in interior {
        let scale = one / (one - r);
        let mut next = vec![Complex64::new(0.0, 0.0); poly.len() + 1];
        for (k, &a) in poly.iter().enumerate() {
            next[k + 1] += a * scale;
            next[k] -= a * r * scale;
        }
        poly = next;
    }
    Ok(poly.iter().map(|z| z.re).collect())
}

/// `R(s) = (G(s) - s^c) / ((s - 1) prod (s - r_i))` over the roots in the disk;
/// every root of `R` lies outside the closed unit disk under strict NPC.
pub fn outer_factor<T: Scalar>(model: &SeasonalModel<T>, roots: &RootSet) -> Vec<f64> {
    let mut rest = to_complex(&characteristic_polynomial(model));
    for &r in &roots.roots {
        rest = deflate(&rest, r);
    }
    rest.iter().map(|z| z.re).collect()
}
