//! Linear symplectic algebra on `R^{2n}` with interleaved coordinates
//! `(x_1, y_1, ..., x_n, y_n)`.
//!
//! The complex structure acts on each `(x_h, y_h)` plane as multiplication by
//! `i`, so `J = diag([[0, -1], [1, 0]], ...)` and `ω(u, v) = <Ju, v>`.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{invalid, Error, Result};

pub type Mat = DMatrix<f64>;

/// Tolerance on `‖MᵀJM − J‖_∞` for numerically produced matrices.
pub const TOL_SYM: f64 = 1e-10;

/// Raw standard complex structure of `R^{2n}`.
pub(crate) fn j_matrix(n: usize) -> Mat {
    let mut j = Mat::zeros(2 * n, 2 * n);
    for h in 0..n {
        j[(2 * h, 2 * h + 1)] = -1.0;
        j[(2 * h + 1, 2 * h)] = 1.0;
    }
    j
}

/// `‖MᵀJM − J‖_∞` (max-abs entry).
pub fn symplectic_defect(m: &Mat) -> f64 {
    let j = j_matrix(m.nrows() / 2);
    (m.transpose() * &j * m - &j).amax()
}

/// A `2n × 2n` matrix preserving the standard symplectic form.
#[derive(Clone, Debug, PartialEq)]
pub struct SymplecticMatrix(Mat);

impl SymplecticMatrix {
    /// Validates symplecticity and `det = 1` within [`TOL_SYM`] (scaled by the
    /// matrix size for the determinant).
    pub fn new(m: Mat) -> Result<Self> {
        Self::with_tolerance(m, TOL_SYM)
    }

    pub fn with_tolerance(m: Mat, tol: f64) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 || m.nrows() % 2 != 0 {
            return invalid(format!(
                "symplectic matrix must be square of even positive size, got {}x{}",
                m.nrows(),
                m.ncols()
            ));
        }
        let scale = 1.0f64.max(m.amax() * m.amax());
        let defect = symplectic_defect(&m);
        if !(defect < tol * scale) {
            return invalid(format!("matrix is not symplectic (defect {defect:e})"));
        }
        let det = m.determinant();
        if !((det - 1.0).abs() < tol.sqrt() * scale) {
            return invalid(format!("symplectic matrix has det {det}"));
        }
        Ok(SymplecticMatrix(m))
    }

    /// Wraps a matrix known to be symplectic by construction.
    pub fn new_unchecked(m: Mat) -> Self {
        SymplecticMatrix(m)
    }

    pub fn identity(n: usize) -> Self {
        SymplecticMatrix(Mat::identity(2 * n, 2 * n))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn half_dim(&self) -> usize {
        self.0.nrows() / 2
    }

    pub fn matrix(&self) -> &Mat {
        &self.0
    }

    pub fn into_inner(self) -> Mat {
        self.0
    }

    pub fn defect(&self) -> f64 {
        symplectic_defect(&self.0)
    }

    pub fn compose(&self, other: &SymplecticMatrix) -> SymplecticMatrix {
        SymplecticMatrix(&self.0 * &other.0)
    }

    /// `M⁻¹ = −J Mᵀ J`.
    pub fn inverse(&self) -> SymplecticMatrix {
        let j = j_matrix(self.half_dim());
        SymplecticMatrix(-(&j * self.0.transpose() * &j))
    }

    /// Conjugation `P M P⁻¹`.
    pub fn conjugate_by(&self, p: &SymplecticMatrix) -> SymplecticMatrix {
        SymplecticMatrix(&p.0 * &self.0 * p.inverse().0)
    }
}

/// The standard complex structure on `R^{2n}`.
pub fn standard_j(n: usize) -> Result<SymplecticMatrix> {
    if n == 0 {
        return invalid("standard_J needs n >= 1");
    }
    Ok(SymplecticMatrix(j_matrix(n)))
}

/// `(cos 2πf, sin 2πf)` with exact values at quarter turns.
pub(crate) fn turn_cos_sin(turns: f64) -> (f64, f64) {
    let frac = turns - turns.floor();
    if frac == 0.0 {
        (1.0, 0.0)
    } else if frac == 0.25 {
        (0.0, 1.0)
    } else if frac == 0.5 {
        (-1.0, 0.0)
    } else if frac == 0.75 {
        (0.0, -1.0)
    } else {
        let theta = std::f64::consts::TAU * frac;
        (theta.cos(), theta.sin())
    }
}

/// Writes `e^{2π J turns}` into the `(2h, 2h)` diagonal block of `m`.
pub(crate) fn put_rotation(m: &mut Mat, h: usize, turns: f64) {
    let (c, s) = turn_cos_sin(turns);
    m[(2 * h, 2 * h)] = c;
    m[(2 * h, 2 * h + 1)] = -s;
    m[(2 * h + 1, 2 * h)] = s;
    m[(2 * h + 1, 2 * h + 1)] = c;
}

/// Evaluator for paths that are not closed-form rotations, e.g. linearized flows.
pub trait PathEvaluator: Send + Sync {
    fn dim(&self) -> usize;
    fn eval(&self, t: f64) -> Mat;
    fn label(&self) -> &str {
        "custom"
    }
}

/// Piecewise log-linear interpolation of a sampled path.
#[derive(Clone, Debug)]
pub struct SampledPath {
    times: Vec<f64>,
    mats: Vec<Mat>,
    generators: Vec<Mat>,
}

impl SampledPath {
    /// `times` must increase strictly from 0 to 1 and consecutive samples must
    /// be close enough for the matrix logarithm series (`‖Γ_{i+1}Γ_i⁻¹ − I‖ ≤ 1/2`).
    pub fn new(times: Vec<f64>, mats: Vec<Mat>) -> Result<Self> {
        if times.len() < 2 || times.len() != mats.len() {
            return invalid("sampled path needs at least two samples and matching lengths");
        }
        if times[0] != 0.0 || *times.last().unwrap() != 1.0 {
            return invalid("sampled path must span [0, 1]");
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return invalid("sample times must be strictly increasing");
        }
        let dim = mats[0].nrows();
        let mut generators = Vec::with_capacity(mats.len() - 1);
        for (i, w) in mats.windows(2).enumerate() {
            if w[1].nrows() != dim {
                return invalid("sample dimensions differ");
            }
            let inv = SymplecticMatrix(w[0].clone()).inverse().into_inner();
            let step = &w[1] * inv - Mat::identity(dim, dim);
            if step.norm() > 0.5 {
                return invalid(format!("sampling too coarse near t = {}", times[i]));
            }
            generators.push(log_near_identity(&step));
        }
        if (&mats[0] - Mat::identity(dim, dim)).amax() > TOL_SYM {
            return invalid("sampled path must start at the identity");
        }
        Ok(SampledPath {
            times,
            mats,
            generators,
        })
    }

    /// Row-major samples, each checked for symplecticity.
    pub fn from_rows(times: Vec<f64>, rows: &[Vec<Vec<f64>>]) -> Result<Self> {
        let mut mats = Vec::with_capacity(rows.len());
        for (k, m) in rows.iter().enumerate() {
            let d = m.len();
            if d == 0 || d % 2 != 0 || m.iter().any(|r| r.len() != d) {
                return invalid(format!("sample {k} is not a square matrix of even size"));
            }
            let mat = Mat::from_fn(d, d, |i, j| m[i][j]);
            SymplecticMatrix::new(mat.clone())?;
            mats.push(mat);
        }
        Self::new(times, mats)
    }

    fn eval(&self, t: f64) -> Mat {
        let t = t.clamp(0.0, 1.0);
        let i = self.times.partition_point(|&s| s <= t).saturating_sub(1);
        let i = i.min(self.generators.len() - 1);
        let s = (t - self.times[i]) / (self.times[i + 1] - self.times[i]);
        (&self.generators[i] * s).exp() * &self.mats[i]
    }
}

/// `log(I + X)` by its power series; requires `‖X‖ ≤ 1/2`.
fn log_near_identity(x: &Mat) -> Mat {
    let mut acc = Mat::zeros(x.nrows(), x.ncols());
    let mut power = x.clone();
    for k in 1..=80 {
        let term = &power / k as f64;
        if k % 2 == 1 {
            acc += &term;
        } else {
            acc -= &term;
        }
        if term.amax() < 1e-18 {
            break;
        }
        power = &power * x;
    }
    acc
}

/// A continuous path `Γ: [0, 1] → Sp(2n)` with `Γ(0) = I`.
#[derive(Clone)]
pub enum SymplecticPath {
    /// `Γ(t) = diag(e^{2π J rate_h · total_time · t})`.
    Rotation { rates: Vec<f64>, total_time: f64 },
    /// Block-diagonal sum of paths.
    Blocks(Vec<SymplecticPath>),
    Sampled(SampledPath),
    Custom(Arc<dyn PathEvaluator>),
}

impl fmt::Debug for SymplecticPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SymplecticPath::Rotation { rates, total_time } => f
                .debug_struct("Rotation")
                .field("rates", rates)
                .field("total_time", total_time)
                .finish(),
            SymplecticPath::Blocks(b) => f.debug_tuple("Blocks").field(b).finish(),
            SymplecticPath::Sampled(s) => write!(f, "Sampled({} samples)", s.times.len()),
            SymplecticPath::Custom(c) => write!(f, "Custom({}, dim {})", c.label(), c.dim()),
        }
    }
}

impl SymplecticPath {
    pub fn dim(&self) -> usize {
        match self {
            SymplecticPath::Rotation { rates, .. } => 2 * rates.len(),
            SymplecticPath::Blocks(b) => b.iter().map(SymplecticPath::dim).sum(),
            SymplecticPath::Sampled(s) => s.mats[0].nrows(),
            SymplecticPath::Custom(c) => c.dim(),
        }
    }

    pub fn half_dim(&self) -> usize {
        self.dim() / 2
    }

    /// Raw matrix `Γ(t)`.
    pub fn eval(&self, t: f64) -> Mat {
        match self {
            SymplecticPath::Rotation { rates, total_time } => {
                let mut m = Mat::zeros(2 * rates.len(), 2 * rates.len());
                for (h, rate) in rates.iter().enumerate() {
                    put_rotation(&mut m, h, rate * total_time * t);
                }
                m
            }
            SymplecticPath::Blocks(blocks) => {
                let d = self.dim();
                let mut m = Mat::zeros(d, d);
                let mut off = 0;
                for b in blocks {
                    let bd = b.dim();
                    m.view_mut((off, off), (bd, bd)).copy_from(&b.eval(t));
                    off += bd;
                }
                m
            }
            SymplecticPath::Sampled(s) => s.eval(t),
            SymplecticPath::Custom(c) => c.eval(t),
        }
    }

    pub fn at(&self, t: f64) -> SymplecticMatrix {
        SymplecticMatrix(self.eval(t))
    }

    pub fn kind(&self) -> &'static str {
        match self {
            SymplecticPath::Rotation { .. } => "rotation",
            SymplecticPath::Blocks(_) => "blocks",
            SymplecticPath::Sampled(_) => "sampled",
            SymplecticPath::Custom(_) => "linearized-flow",
        }
    }

    /// Whether `eval` may be called slightly outside `[0, 1]`.
    pub(crate) fn extends_beyond_unit_interval(&self) -> bool {
        match self {
            SymplecticPath::Rotation { .. } => true,
            SymplecticPath::Blocks(b) => b.iter().all(|p| p.extends_beyond_unit_interval()),
            SymplecticPath::Sampled(_) => false,
            SymplecticPath::Custom(_) => false,
        }
    }
}

/// Closed-form rotation path `Γ(t) = diag(e^{2π J rate_h · total_time · t})`.
pub fn rotation_path(rates: &[f64], total_time: f64) -> Result<SymplecticPath> {
    if rates.is_empty() {
        return invalid("rotation path needs at least one rate");
    }
    if rates.iter().any(|r| !r.is_finite()) {
        return invalid("rotation rates must be finite");
    }
    if !(total_time > 0.0 && total_time.is_finite()) {
        return invalid("total_time must be positive");
    }
    Ok(SymplecticPath::Rotation {
        rates: rates.to_vec(),
        total_time,
    })
}

/// Block-diagonal composition `Γ₁ ⊕ Γ₂ ⊕ ...`.
pub fn block_compose(blocks: Vec<SymplecticPath>) -> Result<SymplecticPath> {
    match blocks.len() {
        0 => Err(Error::InvalidInput("block_compose needs at least one block".into())),
        1 => Ok(blocks.into_iter().next().unwrap()),
        _ => Ok(SymplecticPath::Blocks(blocks)),
    }
}

/// Product path `t ↦ A(t) B(t)` (same dimension).
#[derive(Clone, Debug)]
pub struct ProductPath {
    pub left: SymplecticPath,
    pub right: SymplecticPath,
}

impl PathEvaluator for ProductPath {
    fn dim(&self) -> usize {
        self.left.dim()
    }

    fn eval(&self, t: f64) -> Mat {
        self.left.eval(t) * self.right.eval(t)
    }

    fn label(&self) -> &str {
        "product"
    }
}

/// Conjugated path `t ↦ P Γ(t) P⁻¹`.
#[derive(Clone, Debug)]
pub struct ConjugatedPath {
    pub conjugator: SymplecticMatrix,
    pub path: SymplecticPath,
}

impl PathEvaluator for ConjugatedPath {
    fn dim(&self) -> usize {
        self.path.dim()
    }

    fn eval(&self, t: f64) -> Mat {
        let p = self.conjugator.matrix();
        p * self.path.eval(t) * self.conjugator.inverse().matrix()
    }

    fn label(&self) -> &str {
        "conjugated"
    }
}
