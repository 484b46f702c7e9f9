//! Real scalar fields on the torus stored as half-spectrum Fourier coefficients.

use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use rustfft::num_complex::Complex64;

use crate::error::{Result, SqgError};
use crate::grid::Grid;

/// Relative tolerance for accepting externally supplied coefficients as
/// Hermitian-symmetric.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// A real-valued field on the torus.
///
/// `coeffs` is the half spectrum described in [`crate::grid`]; the mean mode
/// lives at index 0. Hermitian symmetry of the self-conjugate columns is an
/// invariant of every constructor.
#[derive(Clone, Debug)]
pub struct SpectralField {
    grid: Arc<Grid>,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: &Arc<Grid>) -> Self {
        Self {
            grid: grid.clone(),
            coeffs: vec![Complex64::default(); grid.spectral_len()],
        }
    }

    /// Wrap raw half-spectrum coefficients, rejecting non-Hermitian input.
    pub fn from_coeffs(grid: &Arc<Grid>, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.spectral_len() {
            return Err(SqgError::InvalidGrid(format!(
                "expected {} coefficients, got {}",
                grid.spectral_len(),
                coeffs.len()
            )));
        }
        let field = Self {
            grid: grid.clone(),
            coeffs,
        };
        field.check_hermitian()?;
        Ok(field)
    }

    pub(crate) fn from_coeffs_unchecked(grid: &Arc<Grid>, coeffs: Vec<Complex64>) -> Self {
        debug_assert_eq!(coeffs.len(), grid.spectral_len());
        Self {
            grid: grid.clone(),
            coeffs,
        }
    }

    pub fn from_physical(grid: &Arc<Grid>, values: &[f64]) -> Self {
        Self {
            grid: grid.clone(),
            coeffs: grid.forward(values),
        }
    }

    /// Sample `f(x₁, x₂)` on the grid and transform.
    pub fn from_fn(grid: &Arc<Grid>, f: impl Fn(f64, f64) -> f64) -> Self {
        let n = grid.n();
        let mut values = Vec::with_capacity(n * n);
        for i2 in 0..n {
            for i1 in 0..n {
                let (x1, x2) = grid.point(i1, i2);
                values.push(f(x1, x2));
            }
        }
        Self::from_physical(grid, &values)
    }

    /// The real field `c·exp(i k·x/L) + conj`, i.e. `2 Re(c exp(i k·x/L))`.
    pub fn mode(grid: &Arc<Grid>, k1: i64, k2: i64, c: Complex64) -> Result<Self> {
        let mut f = Self::zeros(grid);
        f.add_mode(k1, k2, c)?;
        Ok(f)
    }

    /// Add the real field `c·exp(i k·x/L) + conj` in place.
    pub fn add_mode(&mut self, k1: i64, k2: i64, c: Complex64) -> Result<()> {
        let (k1, k2, c) = if k1 < 0 {
            (-k1, -k2, c.conj())
        } else {
            (k1, k2, c)
        };
        let idx = self
            .grid
            .index_of(k1, k2)
            .ok_or_else(|| SqgError::Domain(format!("mode ({k1}, {k2}) is not on the lattice")))?;
        if self.grid.is_nyquist(idx) {
            return Err(SqgError::Domain(format!(
                "mode ({k1}, {k2}) lies on the Nyquist line"
            )));
        }
        if k1 == 0 {
            let partner = self
                .grid
                .index_of(0, -k2)
                .expect("mirror of an interior mode");
            self.coeffs[idx] += c;
            self.coeffs[partner] += c.conj();
        } else {
            self.coeffs[idx] += c;
        }
        Ok(())
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub(crate) fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Coefficient of mode `(k₁, k₂)` for either sign of `k₁`.
    pub fn coeff(&self, k1: i64, k2: i64) -> Option<Complex64> {
        if k1 < 0 {
            self.grid.index_of(-k1, -k2).map(|i| self.coeffs[i].conj())
        } else {
            self.grid.index_of(k1, k2).map(|i| self.coeffs[i])
        }
    }

    /// Spatial mean (the zero mode).
    pub fn mean(&self) -> f64 {
        self.coeffs[0].re
    }

    pub fn to_physical(&self) -> Vec<f64> {
        self.grid.inverse(&self.coeffs)
    }

    pub fn same_grid(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid
    }

    pub fn ensure_same_grid(&self, other: &Self) -> Result<()> {
        if self.same_grid(other) {
            Ok(())
        } else {
            Err(SqgError::GridMismatch)
        }
    }

    pub fn hermitian_defect(&self) -> f64 {
        self.grid.hermitian_defect(&self.coeffs)
    }

    pub fn check_hermitian(&self) -> Result<()> {
        let scale = self.max_abs_coeff().max(f64::MIN_POSITIVE);
        let defect = self.hermitian_defect();
        if !(defect <= HERMITIAN_TOL * scale) {
            return Err(SqgError::SymmetryViolation { max_defect: defect });
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs
            .iter()
            .all(|c| c.re.is_finite() && c.im.is_finite())
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.norm()))
    }

    /// Largest coefficient-wise difference; fields must share a grid.
    pub fn max_coeff_diff(&self, other: &Self) -> Result<f64> {
        self.ensure_same_grid(other)?;
        Ok(self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .fold(0.0, |m, (a, b)| m.max((a - b).norm())))
    }

    /// Inverse then forward transform; validates symmetry first.
    pub fn transform_roundtrip(&self) -> Result<Self> {
        self.check_hermitian()?;
        Ok(Self::from_physical(&self.grid, &self.to_physical()))
    }

    /// Apply a real, even multiplier `m(idx)`.
    pub fn apply_real_multiplier(&self, m: impl Fn(usize) -> f64) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c * m(i))
            .collect();
        Self::from_coeffs_unchecked(&self.grid, coeffs)
    }

    /// Apply a complex multiplier with `m(-k) = conj m(k)`.
    pub fn apply_multiplier(&self, m: impl Fn(usize) -> Complex64) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c * m(i))
            .collect();
        Self::from_coeffs_unchecked(&self.grid, coeffs)
    }

    /// Zero every mode outside the dealiasing band.
    pub fn dealiased(&self) -> Self {
        let g = &self.grid;
        self.apply_real_multiplier(|i| if g.in_band(i) { 1.0 } else { 0.0 })
    }

    pub fn without_mean(&self) -> Self {
        let mut out = self.clone();
        out.coeffs[0] = Complex64::default();
        out
    }

    pub fn scaled(&self, a: f64) -> Self {
        self.apply_real_multiplier(|_| a)
    }

    /// `self + a·other`.
    pub fn axpy(&self, a: f64, other: &Self) -> Result<Self> {
        self.ensure_same_grid(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(x, y)| x + y * a)
            .collect();
        Ok(Self::from_coeffs_unchecked(&self.grid, coeffs))
    }

    /// `Σ_k w(k)·|c(k)|²` over the full lattice, folding the implicit
    /// conjugate half into the stored columns.
    pub(crate) fn weighted_power(&self, w: impl Fn(usize) -> f64) -> f64 {
        let half = self.grid.half_width();
        let nyq = self.grid.n() / 2;
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let col = i % half;
                let fold = if col == 0 || col == nyq { 1.0 } else { 2.0 };
                fold * w(i) * c.norm_sqr()
            })
            .sum()
    }

    /// `∫ f g dx` from coefficients.
    pub fn inner_product(&self, other: &Self) -> Result<f64> {
        self.ensure_same_grid(other)?;
        let half = self.grid.half_width();
        let nyq = self.grid.n() / 2;
        let s: f64 = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .enumerate()
            .map(|(i, (a, b))| {
                let col = i % half;
                let fold = if col == 0 || col == nyq { 1.0 } else { 2.0 };
                fold * (a * b.conj()).re
            })
            .sum();
        Ok(s * self.grid.measure())
    }

    /// `‖f‖²_{L²}` by Parseval.
    pub fn energy(&self) -> f64 {
        self.weighted_power(|_| 1.0) * self.grid.measure()
    }

    /// `‖f‖_{L²}` by Parseval.
    pub fn l2_norm(&self) -> f64 {
        self.energy().sqrt()
    }

    /// `L^p` norm by uniform-grid quadrature (`p = ∞` takes the largest
    /// sample). Normalized so that `‖1‖_{L^p} = (2πL)^{2/p}`.
    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        check_exponent(p)?;
        Ok(lp_norm_samples(
            &self.to_physical(),
            p,
            self.grid.cell_area(),
        ))
    }

    /// Maximum of `|f|` over the continuous trigonometric interpolant, found
    /// by Newton refinement from the largest grid extrema.
    pub fn sup_norm(&self) -> f64 {
        sup_norm_refined(self, &self.to_physical())
    }

    /// Copy coefficients onto another grid (zero padding or truncation).
    /// Returns `true` in the second slot when nonzero modes were dropped.
    /// Nyquist modes of the source are never transferred.
    pub fn resample(&self, target: &Arc<Grid>) -> (Self, bool) {
        let mut out = Self::zeros(target);
        let mut truncated = false;
        let noise = ROUNDOFF_FLOOR * self.max_abs_coeff();
        for (i, c) in self.coeffs.iter().enumerate() {
            if *c == Complex64::default() {
                continue;
            }
            let (k1, k2) = self.grid.mode(i);
            let dst = (!self.grid.is_nyquist(i))
                .then(|| target.index_of(k1, k2))
                .flatten()
                .filter(|&j| !target.is_nyquist(j));
            match dst {
                Some(j) => out.coeffs[j] = *c,
                None => truncated |= c.norm() > noise,
            }
        }
        (out, truncated)
    }
}

impl Add for &SpectralField {
    type Output = SpectralField;
    fn add(self, rhs: Self) -> SpectralField {
        self.axpy(1.0, rhs)
            .expect("grid mismatch in field addition")
    }
}

impl Sub for &SpectralField {
    type Output = SpectralField;
    fn sub(self, rhs: Self) -> SpectralField {
        self.axpy(-1.0, rhs)
            .expect("grid mismatch in field subtraction")
    }
}

impl Mul<f64> for &SpectralField {
    type Output = SpectralField;
    fn mul(self, a: f64) -> SpectralField {
        self.scaled(a)
    }
}

impl Neg for &SpectralField {
    type Output = SpectralField;
    fn neg(self) -> SpectralField {
        self.scaled(-1.0)
    }
}

/// Relative size below which a dropped coefficient counts as roundoff
/// rather than truncation.
pub(crate) const ROUNDOFF_FLOOR: f64 = 1e-13;

pub(crate) fn check_exponent(p: f64) -> Result<()> {
    if p.is_nan() || p < 1.0 {
        return Err(SqgError::Domain(format!(
            "L^p exponent must satisfy p >= 1, got {p}"
        )));
    }
    Ok(())
}

/// `(h² Σ|v|^p)^{1/p}`, or `max|v|` for `p = ∞`.
pub fn lp_norm_samples(values: &[f64], p: f64, cell_area: f64) -> f64 {
    if p.is_infinite() {
        return values.iter().fold(0.0, |m, v| m.max(v.abs()));
    }
    if p == 2.0 {
        return (cell_area * values.iter().map(|v| v * v).sum::<f64>()).sqrt();
    }
    let s: f64 = values.iter().map(|v| v.abs().powf(p)).sum();
    (cell_area * s).powf(1.0 / p)
}

/// `L^p` norm of the pointwise Euclidean length of a vector field given by
/// its component samples.
pub fn lp_norm_vector_samples(components: &[Vec<f64>], p: f64, cell_area: f64) -> f64 {
    match components {
        [] => 0.0,
        [single] => lp_norm_samples(single, p, cell_area),
        _ => {
            let len = components[0].len();
            let mags: Vec<f64> = (0..len)
                .map(|i| components.iter().map(|c| c[i] * c[i]).sum::<f64>().sqrt())
                .collect();
            lp_norm_samples(&mags, p, cell_area)
        }
    }
}

/// Value, gradient and Hessian of the trigonometric interpolant at a point.
struct LocalJet {
    value: f64,
    grad: [f64; 2],
    hess: [[f64; 2]; 2],
}

fn evaluate_jet(field: &SpectralField, x1: f64, x2: f64) -> LocalJet {
    let grid = field.grid();
    let n = grid.n();
    let half = grid.half_width();
    let l = grid.length();
    let nyq = n / 2;
    // e^{i ξ₁ x₁} per column; e^{i ξ₂ x₂} per row.
    let e1: Vec<Complex64> = (0..half)
        .map(|b| Complex64::from_polar(1.0, b as f64 / l * x1))
        .collect();
    let mut acc = [Complex64::default(); 6]; // f, f1, f2, f11, f12, f22
    for a in 0..n {
        let (_, k2) = grid.mode(a * half);
        let xi2 = k2 as f64 / l;
        let e2 = Complex64::from_polar(1.0, xi2 * x2);
        let row = &field.coeffs()[a * half..(a + 1) * half];
        let mut r = [Complex64::default(); 3]; // Σ w c e1, Σ w c e1 ξ1, Σ w c e1 ξ1²
        for (b, c) in row.iter().enumerate() {
            if *c == Complex64::default() {
                continue;
            }
            let w = if b == 0 || b == nyq { 1.0 } else { 2.0 };
            let xi1 = b as f64 / l;
            let t = c * e1[b] * w;
            r[0] += t;
            r[1] += t * xi1;
            r[2] += t * xi1 * xi1;
        }
        let i = Complex64::new(0.0, 1.0);
        acc[0] += r[0] * e2;
        acc[1] += r[1] * e2 * i;
        acc[2] += r[0] * e2 * i * xi2;
        acc[3] -= r[2] * e2;
        acc[4] -= r[1] * e2 * xi2;
        acc[5] -= r[0] * e2 * xi2 * xi2;
    }
    LocalJet {
        value: acc[0].re,
        grad: [acc[1].re, acc[2].re],
        hess: [[acc[3].re, acc[4].re], [acc[4].re, acc[5].re]],
    }
}

fn refine_extremum(field: &SpectralField, start: (f64, f64), sign: f64, h: f64) -> f64 {
    let (mut x1, mut x2) = start;
    let mut jet = evaluate_jet(field, x1, x2);
    let mut best = sign * jet.value;
    for _ in 0..60 {
        let g = [sign * jet.grad[0], sign * jet.grad[1]];
        let hm = [
            [sign * jet.hess[0][0], sign * jet.hess[0][1]],
            [sign * jet.hess[1][0], sign * jet.hess[1][1]],
        ];
        let det = hm[0][0] * hm[1][1] - hm[0][1] * hm[1][0];
        let mut step = if hm[0][0] < 0.0 && det > 0.0 {
            // Newton step for a maximum: -H⁻¹ g
            [
                -(hm[1][1] * g[0] - hm[0][1] * g[1]) / det,
                -(-hm[1][0] * g[0] + hm[0][0] * g[1]) / det,
            ]
        } else {
            let gn = g[0].hypot(g[1]);
            if gn == 0.0 {
                break;
            }
            [0.25 * h * g[0] / gn, 0.25 * h * g[1] / gn]
        };
        let len = step[0].hypot(step[1]);
        if len > h {
            step = [step[0] * h / len, step[1] * h / len];
        }
        let mut accepted = false;
        for _ in 0..30 {
            let cand = evaluate_jet(field, x1 + step[0], x2 + step[1]);
            if sign * cand.value >= best {
                x1 += step[0];
                x2 += step[1];
                best = sign * cand.value;
                jet = cand;
                accepted = true;
                break;
            }
            step = [step[0] * 0.5, step[1] * 0.5];
        }
        if !accepted || step[0].hypot(step[1]) < 1e-13 * h {
            break;
        }
    }
    best
}

fn sup_norm_refined(field: &SpectralField, values: &[f64]) -> f64 {
    let grid = field.grid();
    let n = grid.n();
    let grid_max = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if grid_max == 0.0 || !grid_max.is_finite() {
        return grid_max;
    }
    let at = |i1: usize, i2: usize| values[(i2 % n) * n + (i1 % n)].abs();
    let mut candidates: Vec<(f64, usize, usize)> = Vec::new();
    for i2 in 0..n {
        for i1 in 0..n {
            let v = at(i1, i2);
            if v < 0.5 * grid_max {
                continue;
            }
            let is_peak = (0..3).all(|d2| {
                (0..3).all(|d1| (d1 == 1 && d2 == 1) || at(i1 + n + d1 - 1, i2 + n + d2 - 1) <= v)
            });
            if is_peak {
                candidates.push((v, i1, i2));
            }
        }
    }
    candidates.sort_by(|a, b| b.0.total_cmp(&a.0));
    candidates.truncate(16);
    let h = grid.spacing();
    let mut best = grid_max;
    for (_, i1, i2) in candidates {
        let sign = values[i2 * n + i1].signum();
        let (x1, x2) = grid.point(i1, i2);
        best = best.max(refine_extremum(field, (x1, x2), sign, h));
    }
    best
}
