//! Physical parameters, uniform grids, complex fields and boundary data.
//!
//! Everything in here is immutable after construction and validated on the
//! way in, so downstream modules can assume the invariants hold.

use num_complex::Complex64;
use std::f64::consts::PI;
use thiserror::Error;

/// Tolerance on `kx² + ky² = 1`.
pub const UNIT_DIRECTION_TOL: f64 = 1e-12;

/// Smallest absorption accepted when the limit-study floor is enabled.
pub const NU_FLOOR: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("direction (kx, ky) = ({kx}, {ky}) is not a unit vector with kx > 0")]
    NonUnitDirection { kx: f64, ky: f64 },
    #[error("absorption nu must be strictly positive, got {0}")]
    NonPositiveNu(f64),
    #[error("epsilon must be strictly positive, got {0}")]
    NonPositiveEpsilon(f64),
    #[error("ky = 0 (normal incidence) is not supported by this operation")]
    ZeroKy,
    #[error("propagation angle {0} is outside (-pi/2, pi/2)")]
    AngleOutOfRange(f64),
    #[error("grid size {0} must be a power of two and at least 8")]
    BadGridSize(usize),
    #[error("grid spacing must be finite and positive, got {0}")]
    BadSpacing(f64),
    #[error("field has {got} values, expected {expected}")]
    FieldShape { expected: usize, got: usize },
    #[error("non-finite value at flat index {0}")]
    NonFinite(usize),
    #[error("g_plus data is nonzero at y = {y} <= 0")]
    SupportViolation { y: f64 },
}

/// Physical parameters of the oblique paraxial model.
///
/// `epsilon` is the inverse wave-number scale, `(kx, ky)` the unit
/// propagation direction and `nu` the (constant) absorption coefficient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    epsilon: f64,
    kx: f64,
    ky: f64,
    nu: f64,
    below_theory_floor: bool,
}

impl PhysicalParams {
    pub fn new(epsilon: f64, kx: f64, ky: f64, nu: f64) -> Result<Self, ModelError> {
        validate_params(epsilon, kx, ky, nu)
    }

    /// Direction given as an angle from the x axis, `kx = cos θ`, `ky = sin θ`.
    pub fn from_angle(epsilon: f64, theta: f64, nu: f64) -> Result<Self, ModelError> {
        if !(theta.abs() < PI / 2.0) {
            return Err(ModelError::AngleOutOfRange(theta));
        }
        let (ky, kx) = theta.sin_cos();
        validate_params(epsilon, kx, ky, nu)
    }

    /// Same as [`PhysicalParams::new`] but clamps `nu` up to [`NU_FLOOR`]
    /// instead of rejecting it. Results obtained this way are outside the
    /// well-posedness theory and are flagged by [`Self::below_theory_floor`].
    pub fn with_nu_floor(epsilon: f64, kx: f64, ky: f64, nu: f64) -> Result<Self, ModelError> {
        let clamped = if nu.is_finite() { nu.max(NU_FLOOR) } else { nu };
        let mut p = validate_params(epsilon, kx, ky, clamped)?;
        p.below_theory_floor = nu < NU_FLOOR;
        Ok(p)
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn kx(&self) -> f64 {
        self.kx
    }

    pub fn ky(&self) -> f64 {
        self.ky
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    /// Normal incidence: representable, but every ky-dividing operation rejects it.
    pub fn is_zero_ky(&self) -> bool {
        self.ky == 0.0
    }

    pub fn below_theory_floor(&self) -> bool {
        self.below_theory_floor
    }

    pub fn require_oblique(&self) -> Result<(), ModelError> {
        if self.is_zero_ky() {
            Err(ModelError::ZeroKy)
        } else {
            Ok(())
        }
    }

    /// Copy with a different `(epsilon, nu)` pair, same direction.
    pub fn rescaled(&self, epsilon: f64, nu: f64) -> Result<Self, ModelError> {
        validate_params(epsilon, self.kx, self.ky, nu)
    }

    /// Copy with `ky` negated (the beam leaves the quadrant through y = 0).
    pub fn mirrored(&self) -> Self {
        Self { ky: -self.ky, ..*self }
    }
}

/// Checks every parameter invariant. A zero `ky` is accepted here and
/// reported by [`PhysicalParams::is_zero_ky`]; it only becomes an error
/// in operations that divide by `ky`.
pub fn validate_params(epsilon: f64, kx: f64, ky: f64, nu: f64) -> Result<PhysicalParams, ModelError> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(ModelError::NonPositiveEpsilon(epsilon));
    }
    if !(nu > 0.0) || !nu.is_finite() {
        return Err(ModelError::NonPositiveNu(nu));
    }
    let norm_err = (kx * kx + ky * ky - 1.0).abs();
    if !(kx > 0.0) || !ky.is_finite() || !(norm_err <= UNIT_DIRECTION_TOL) {
        return Err(ModelError::NonUnitDirection { kx, ky });
    }
    Ok(PhysicalParams {
        epsilon,
        kx,
        ky,
        nu,
        below_theory_floor: false,
    })
}

/// Uniform sample points `x0 + i·dx`, `i ∈ [0, n)`, with `n` a power of two.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    n: usize,
    x0: f64,
    dx: f64,
}

impl Grid1D {
    pub fn new(n: usize, x0: f64, dx: f64) -> Result<Self, ModelError> {
        if n < 8 || !n.is_power_of_two() {
            return Err(ModelError::BadGridSize(n));
        }
        if !(dx > 0.0) || !dx.is_finite() {
            return Err(ModelError::BadSpacing(dx));
        }
        if !x0.is_finite() {
            return Err(ModelError::BadSpacing(x0));
        }
        Ok(Self { n, x0, dx })
    }

    /// `n` points covering `[x0, x0 + length)`.
    pub fn with_length(n: usize, x0: f64, length: f64) -> Result<Self, ModelError> {
        Self::new(n, x0, length / n as f64)
    }

    /// `n` points covering `[-length/2, length/2)`; the point `0` is on the grid.
    pub fn centered(n: usize, length: f64) -> Result<Self, ModelError> {
        Self::new(n, -length / 2.0, length / n as f64)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn length(&self) -> f64 {
        self.dx * self.n as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.dx
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |i| self.point(i))
    }

    /// Nearest grid index, or `None` if `x` is farther than half a step
    /// from the grid.
    pub fn index_of(&self, x: f64) -> Option<usize> {
        let r = ((x - self.x0) / self.dx).round();
        if r < 0.0 || r >= self.n as f64 {
            return None;
        }
        Some(r as usize)
    }

    /// First index whose point is `>= 0` (within a small relative slack).
    pub fn first_nonnegative(&self) -> usize {
        let slack = 1e-9 * self.dx;
        (0..self.n).find(|&i| self.point(i) >= -slack).unwrap_or(self.n)
    }

    /// Point `i` counts as `y >= 0`; the grid point at zero belongs to the half-line.
    pub fn is_nonnegative(&self, i: usize) -> bool {
        self.point(i) >= -1e-9 * self.dx
    }

    /// Same spacing, twice as many points, same origin.
    pub fn doubled(&self) -> Self {
        Self {
            n: 2 * self.n,
            ..*self
        }
    }

    /// Same extent, twice the resolution.
    pub fn refined(&self) -> Self {
        Self {
            n: 2 * self.n,
            x0: self.x0,
            dx: self.dx / 2.0,
        }
    }

    pub fn approx_eq(&self, other: &Grid1D) -> bool {
        self.n == other.n
            && (self.x0 - other.x0).abs() <= 1e-12 * (1.0 + self.x0.abs())
            && (self.dx - other.dx).abs() <= 1e-12 * self.dx
    }
}

/// DFT frequencies matched to a [`Grid1D`]: `η_j = deta·j`, `j ∈ [-n/2, n/2)`.
///
/// Index `k` of every spectral array corresponds to `j = k - n/2`, so the
/// Nyquist bin sits at index 0 with frequency `-n/2·deta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralGrid {
    grid: Grid1D,
    deta: f64,
}

impl SpectralGrid {
    pub fn new(grid: &Grid1D) -> Self {
        Self {
            grid: *grid,
            deta: 2.0 * PI / (grid.len() as f64 * grid.dx()),
        }
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn deta(&self) -> f64 {
        self.deta
    }

    pub fn space(&self) -> &Grid1D {
        &self.grid
    }

    /// Signed frequency number `j` stored at array index `k`.
    pub fn wavenumber(&self, k: usize) -> i64 {
        k as i64 - (self.grid.len() / 2) as i64
    }

    pub fn frequency(&self, k: usize) -> f64 {
        self.deta * self.wavenumber(k) as f64
    }

    pub fn frequencies(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(move |k| self.frequency(k))
    }

    /// Array index of signed frequency number `j`.
    pub fn index_of_wavenumber(&self, j: i64) -> Option<usize> {
        let k = j + (self.grid.len() / 2) as i64;
        (0..self.len() as i64).contains(&k).then_some(k as usize)
    }
}

/// Complex amplitude on an `x × y` grid, stored x-major (`values[ix·ny + iy]`).
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField2D {
    xgrid: Grid1D,
    ygrid: Grid1D,
    values: Vec<Complex64>,
}

impl ComplexField2D {
    pub fn new(xgrid: Grid1D, ygrid: Grid1D, values: Vec<Complex64>) -> Result<Self, ModelError> {
        let expected = xgrid.len() * ygrid.len();
        if values.len() != expected {
            return Err(ModelError::FieldShape {
                expected,
                got: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(ModelError::NonFinite(i));
        }
        Ok(Self { xgrid, ygrid, values })
    }

    pub fn zeros(xgrid: Grid1D, ygrid: Grid1D) -> Self {
        let values = vec![Complex64::new(0.0, 0.0); xgrid.len() * ygrid.len()];
        Self { xgrid, ygrid, values }
    }

    /// Builds the field from per-x slices, each of length `ny`.
    pub fn from_slices(xgrid: Grid1D, ygrid: Grid1D, slices: Vec<Vec<Complex64>>) -> Result<Self, ModelError> {
        let values: Vec<Complex64> = slices.into_iter().flatten().collect();
        Self::new(xgrid, ygrid, values)
    }

    pub fn nx(&self) -> usize {
        self.xgrid.len()
    }

    pub fn ny(&self) -> usize {
        self.ygrid.len()
    }

    pub fn xgrid(&self) -> &Grid1D {
        &self.xgrid
    }

    pub fn ygrid(&self) -> &Grid1D {
        &self.ygrid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn get(&self, ix: usize, iy: usize) -> Complex64 {
        self.values[ix * self.ny() + iy]
    }

    pub fn slice(&self, ix: usize) -> &[Complex64] {
        let ny = self.ny();
        &self.values[ix * ny..(ix + 1) * ny]
    }

    pub fn slices(&self) -> impl Iterator<Item = &[Complex64]> {
        self.values.chunks(self.ny())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// What a sampled boundary line represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryKind {
    /// Entrance datum `g` of the half-space problem.
    G,
    /// Incoming amplitude `u^in(y)`.
    UIn,
    /// Quadrant entrance datum, supported in `y > 0`.
    GPlus,
    /// Solution trace `u(0, y)`.
    Trace,
}

/// Samples of a boundary function on a y-grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryData {
    grid: Grid1D,
    samples: Vec<Complex64>,
    kind: BoundaryKind,
    support_lo: f64,
}

impl BoundaryData {
    pub fn new(grid: Grid1D, samples: Vec<Complex64>, kind: BoundaryKind) -> Result<Self, ModelError> {
        if samples.len() != grid.len() {
            return Err(ModelError::FieldShape {
                expected: grid.len(),
                got: samples.len(),
            });
        }
        if let Some(i) = samples.iter().position(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(ModelError::NonFinite(i));
        }
        if kind == BoundaryKind::GPlus {
            let slack = 1e-9 * grid.dx();
            if let Some(k) = (0..grid.len()).find(|&k| grid.point(k) <= slack && samples[k].norm() != 0.0) {
                return Err(ModelError::SupportViolation { y: grid.point(k) });
            }
        }
        let support_lo = samples
            .iter()
            .position(|v| v.norm() > 0.0)
            .map(|i| grid.point(i))
            .unwrap_or(f64::INFINITY);
        Ok(Self {
            grid,
            samples,
            kind,
            support_lo,
        })
    }

    pub fn from_fn(grid: Grid1D, kind: BoundaryKind, f: impl Fn(f64) -> Complex64) -> Result<Self, ModelError> {
        let samples = grid.points().map(f).collect();
        Self::new(grid, samples, kind)
    }

    /// Zero-extends `g_plus` to the whole line (it already lives on the full grid).
    pub fn extended_by_zero(&self) -> BoundaryData {
        Self {
            kind: BoundaryKind::G,
            ..self.clone()
        }
    }

    /// Reinterprets the samples as another kind, re-checking invariants.
    pub fn with_kind(&self, kind: BoundaryKind) -> Result<BoundaryData, ModelError> {
        Self::new(self.grid, self.samples.clone(), kind)
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn kind(&self) -> BoundaryKind {
        self.kind
    }

    /// Infimum of the points carrying nonzero samples (`+∞` for zero data).
    pub fn support_lo(&self) -> f64 {
        self.support_lo
    }

    pub fn is_zero(&self) -> bool {
        self.samples.iter().all(|v| v.norm() == 0.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// Gaussian profile `a·exp(-(y-c)²/(2w²))`.
pub fn gaussian(center: f64, width: f64, amplitude: f64) -> impl Fn(f64) -> Complex64 {
    move |y| {
        let t = (y - center) / width;
        Complex64::new(amplitude * (-0.5 * t * t).exp(), 0.0)
    }
}

/// Gaussian data for the quadrant problem: samples at `y <= 0` are set to
/// exactly zero so the `g_plus` support invariant holds.
pub fn gaussian_g_plus(grid: Grid1D, center: f64, width: f64, amplitude: f64) -> Result<BoundaryData, ModelError> {
    let f = gaussian(center, width, amplitude);
    BoundaryData::from_fn(grid, BoundaryKind::GPlus, |y| {
        if y > 0.0 {
            f(y)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}
