//! Hydrogen-like internal spectrum with metric-corrected kinetic and Coulomb
//! coefficients.
//!
//! The radial equation
//! `-(A hbar^2 / 2 mu)(u'' - l(l+1) u / r^2) - (B k / r) u = E u`
//! is discretised with second-order finite differences and the lowest
//! eigenvalues are extracted from the symmetric tridiagonal matrix by Sturm
//! bisection. The two `1/c^2` corrections of the internal Hamiltonian are
//! added as first-order shifts computed on the flat-space wavefunctions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{lapse, PpnContext};

/// Minimum number of interior grid points.
pub const MIN_POINTS: usize = 2000;
/// Minimum grid extent in scaled Bohr radii.
pub const MIN_EXTENT_BOHR: f64 = 30.0;
/// Default grid extent in scaled Bohr radii.
pub const DEFAULT_EXTENT_BOHR: f64 = 60.0;
/// Default number of interior grid points.
pub const DEFAULT_POINTS: usize = 8000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Uniform,
    /// Uniform in `ln r`; the first node sits at `r_min`. The inner Dirichlet
    /// wall shifts s-levels by about `2 r_min / a` relative, so keep `r_min` tiny.
    Logarithmic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    pub r_min: f64,
    pub r_max: f64,
    pub points: usize,
    pub spacing: Spacing,
}

impl RadialGrid {
    pub fn uniform(r_max: f64, points: usize) -> Self {
        Self {
            r_min: 0.0,
            r_max,
            points,
            spacing: Spacing::Uniform,
        }
    }

    pub fn logarithmic(r_min: f64, r_max: f64, points: usize) -> Self {
        Self {
            r_min,
            r_max,
            points,
            spacing: Spacing::Logarithmic,
        }
    }

    fn with_points(&self, points: usize) -> Self {
        Self { points, ..*self }
    }

    /// Characteristic step: `h` for uniform grids, the `ln r` step otherwise.
    fn step(&self) -> f64 {
        match self.spacing {
            Spacing::Uniform => self.r_max / (self.points + 1) as f64,
            Spacing::Logarithmic => (self.r_max / self.r_min).ln() / (self.points - 1) as f64,
        }
    }

    fn nodes(&self) -> Vec<f64> {
        let h = self.step();
        match self.spacing {
            Spacing::Uniform => (1..=self.points).map(|i| i as f64 * h).collect(),
            Spacing::Logarithmic => {
                let x0 = self.r_min.ln();
                (0..self.points).map(|i| (x0 + i as f64 * h).exp()).collect()
            }
        }
    }
}

/// Radial Coulomb problem with metric coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialProblem {
    pub reduced_mass: f64,
    /// `A`, multiplying the kinetic term.
    pub kinetic_coefficient: f64,
    /// `B k`, the attractive Coulomb strength.
    pub coulomb_strength: f64,
    pub l: u32,
    pub hbar: f64,
    pub grid: RadialGrid,
    /// Largest accepted relative gap between the raw and extrapolated ground state.
    pub coarse_tolerance: f64,
}

impl RadialProblem {
    /// Problem on the default uniform grid scaled to its Bohr radius.
    pub fn new(reduced_mass: f64, kinetic_coefficient: f64, coulomb_strength: f64, l: u32, hbar: f64) -> Self {
        let a = kinetic_coefficient * hbar * hbar / (reduced_mass * coulomb_strength);
        Self {
            reduced_mass,
            kinetic_coefficient,
            coulomb_strength,
            l,
            hbar,
            grid: RadialGrid::uniform(DEFAULT_EXTENT_BOHR * a, DEFAULT_POINTS),
            coarse_tolerance: 1e-3,
        }
    }

    pub fn with_grid(mut self, grid: RadialGrid) -> Self {
        self.grid = grid;
        self
    }

    /// `A hbar^2 / (mu B k)`.
    pub fn bohr_radius(&self) -> f64 {
        self.kinetic_coefficient * self.hbar * self.hbar / (self.reduced_mass * self.coulomb_strength)
    }

    /// `-mu (B k)^2 / (2 A hbar^2 n^2)`.
    pub fn analytic_level(&self, n: u32) -> f64 {
        -self.reduced_mass * self.coulomb_strength.powi(2)
            / (2.0 * self.kinetic_coefficient * self.hbar * self.hbar * f64::from(n * n))
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("reduced mass", self.reduced_mass),
            ("kinetic coefficient", self.kinetic_coefficient),
            ("Coulomb strength", self.coulomb_strength),
            ("hbar", self.hbar),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be > 0, got {v}")));
            }
        }
        let g = &self.grid;
        if g.points < MIN_POINTS {
            return Err(Error::Grid(format!("need at least {MIN_POINTS} points, got {}", g.points)));
        }
        let extent = g.r_max / self.bohr_radius();
        if !(extent >= MIN_EXTENT_BOHR) {
            return Err(Error::Grid(format!(
                "grid covers {extent:.1} Bohr radii, need {MIN_EXTENT_BOHR}"
            )));
        }
        if g.spacing == Spacing::Logarithmic && !(g.r_min > 0.0 && g.r_min < g.r_max) {
            return Err(Error::Grid("logarithmic grid needs 0 < r_min < r_max".into()));
        }
        Ok(())
    }

    /// Symmetric tridiagonal discretisation `(diagonal, off_diagonal)`.
    fn matrix(&self, grid: &RadialGrid) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let t = self.kinetic_coefficient * self.hbar * self.hbar / (2.0 * self.reduced_mass);
        let r = grid.nodes();
        let h = grid.step();
        let ll = f64::from(self.l * (self.l + 1));
        match grid.spacing {
            Spacing::Uniform => {
                let diag = r
                    .iter()
                    .map(|&ri| t * (2.0 / (h * h) + ll / (ri * ri)) - self.coulomb_strength / ri)
                    .collect();
                let off = vec![-t / (h * h); r.len() - 1];
                (diag, off, r)
            }
            Spacing::Logarithmic => {
                // u = r^(1/2) w(x), x = ln r; symmetrised with r^-1 on both sides.
                let lh = f64::from(self.l) + 0.5;
                let diag = r
                    .iter()
                    .map(|&ri| t * (2.0 / (h * h) + lh * lh) / (ri * ri) - self.coulomb_strength / ri)
                    .collect();
                let off = r.windows(2).map(|w| -t / (h * h * w[0] * w[1])).collect();
                (diag, off, r)
            }
        }
    }
}

/// Number of eigenvalues below `lambda` (Sturm count).
fn count_below(diag: &[f64], off: &[f64], lambda: f64) -> usize {
    let mut count = 0;
    let mut q = diag[0] - lambda;
    if q < 0.0 {
        count += 1;
    }
    for i in 1..diag.len() {
        let denom = if q == 0.0 { f64::EPSILON * off[i - 1].abs().max(1.0) } else { q };
        q = diag[i] - lambda - off[i - 1] * off[i - 1] / denom;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Lowest `k` eigenvalues of a symmetric tridiagonal matrix by bisection.
pub fn tridiagonal_lowest(diag: &[f64], off: &[f64], k: usize) -> Vec<f64> {
    let n = diag.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let radius = if i > 0 { off[i - 1].abs() } else { 0.0 } + if i + 1 < n { off[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - radius);
        hi = hi.max(diag[i] + radius);
    }
    (0..k.min(n))
        .map(|j| {
            let (mut a, mut b) = (lo, hi);
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                if mid <= a || mid >= b {
                    break;
                }
                if count_below(diag, off, mid) > j {
                    b = mid;
                } else {
                    a = mid;
                }
            }
            0.5 * (a + b)
        })
        .collect()
}

/// Eigenvector for an isolated eigenvalue by inverse iteration.
fn inverse_iteration(diag: &[f64], off: &[f64], lambda: f64) -> Vec<f64> {
    let n = diag.len();
    let shift = lambda + 1e-10 * lambda.abs().max(f64::MIN_POSITIVE);
    let mut x = vec![1.0; n];
    for _ in 0..4 {
        // Thomas algorithm on (T - shift) y = x.
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        let mut b0 = diag[0] - shift;
        c[0] = if n > 1 { off[0] / b0 } else { 0.0 };
        d[0] = x[0] / b0;
        for i in 1..n {
            b0 = diag[i] - shift - off[i - 1] * c[i - 1];
            if b0 == 0.0 {
                b0 = f64::EPSILON;
            }
            if i + 1 < n {
                c[i] = off[i] / b0;
            }
            d[i] = (x[i] - off[i - 1] * d[i - 1]) / b0;
        }
        let mut y = vec![0.0; n];
        y[n - 1] = d[n - 1];
        for i in (0..n - 1).rev() {
            y[i] = d[i] - c[i] * y[i + 1];
        }
        let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        x = y.into_iter().map(|v| v / norm).collect();
    }
    x
}

/// Raw second-order finite-difference eigenvalues (no extrapolation).
pub fn solve_radial_raw(problem: &RadialProblem, n_levels: usize) -> Result<Vec<f64>> {
    problem.validate()?;
    eigenvalues_on(problem, &problem.grid, n_levels)
}

fn eigenvalues_on(problem: &RadialProblem, grid: &RadialGrid, n_levels: usize) -> Result<Vec<f64>> {
    if n_levels == 0 {
        return Err(Error::InvalidParameter("n_levels must be >= 1".into()));
    }
    let (diag, off, r) = problem.matrix(grid);
    let levels = tridiagonal_lowest(&diag, &off, n_levels);
    if let Some(e) = levels.iter().find(|e| **e >= 0.0) {
        return Err(Error::Grid(format!(
            "only bound states are resolved; level at {e} is not bound on this grid"
        )));
    }
    // Bisection resolves eigenvalues only to eps times the matrix norm (~1/h^2);
    // the Rayleigh quotient in difference form is accurate to eps times |E|.
    Ok(levels
        .into_iter()
        .map(|e| rayleigh_quotient(problem, grid, &r, &inverse_iteration(&diag, &off, e)))
        .collect())
}

/// `y^T T y / y^T y` with the kinetic part summed as squared differences.
fn rayleigh_quotient(problem: &RadialProblem, grid: &RadialGrid, r: &[f64], y: &[f64]) -> f64 {
    let t = problem.kinetic_coefficient * problem.hbar * problem.hbar / (2.0 * problem.reduced_mass);
    let h = grid.step();
    let n = y.len();
    let norm: f64 = y.iter().map(|v| v * v).sum();
    let (w, centrifugal): (Vec<f64>, f64) = match grid.spacing {
        Spacing::Uniform => (y.to_vec(), f64::from(problem.l * (problem.l + 1))),
        Spacing::Logarithmic => {
            let lh = f64::from(problem.l) + 0.5;
            (y.iter().zip(r).map(|(yi, ri)| yi / ri).collect(), lh * lh)
        }
    };
    let mut kinetic = w[0] * w[0] + w[n - 1] * w[n - 1];
    for i in 1..n {
        kinetic += (w[i] - w[i - 1]).powi(2);
    }
    kinetic *= t / (h * h);
    let mut potential = 0.0;
    for i in 0..n {
        let ri = r[i];
        let angular = match grid.spacing {
            Spacing::Uniform => t * centrifugal / (ri * ri) * y[i] * y[i],
            Spacing::Logarithmic => t * centrifugal * w[i] * w[i],
        };
        potential += angular - problem.coulomb_strength / ri * y[i] * y[i];
    }
    (kinetic + potential) / norm
}

/// Lowest eigenvalues, Richardson-extrapolated from the grid and a grid of
/// half the resolution.
///
/// Fails when the raw ground state differs from the extrapolated one by more
/// than `problem.coarse_tolerance` (relative).
pub fn solve_radial(problem: &RadialProblem, n_levels: usize) -> Result<Vec<f64>> {
    problem.validate()?;
    let fine = &problem.grid;
    let coarse_points = match fine.spacing {
        Spacing::Uniform => fine.points.div_ceil(2) - 1,
        Spacing::Logarithmic => (fine.points - 1) / 2 + 1,
    };
    let coarse = fine.with_points(coarse_points);
    let ef = eigenvalues_on(problem, fine, n_levels)?;
    let ec = eigenvalues_on(problem, &coarse, n_levels)?;
    let (hf, hc) = (fine.step(), coarse.step());
    let w = hc * hc / (hc * hc - hf * hf);
    let extrapolated: Vec<f64> = ef.iter().zip(&ec).map(|(f, c)| w * f + (1.0 - w) * c).collect();
    let gap = ((ef[0] - extrapolated[0]) / extrapolated[0]).abs();
    if gap > problem.coarse_tolerance {
        return Err(Error::Grid(format!(
            "grid too coarse: ground state moves by {gap:.3e} under extrapolation"
        )));
    }
    Ok(extrapolated)
}

/// Normalised radial function `u(r)` on the grid nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialState {
    pub energy: f64,
    pub r: Vec<f64>,
    pub u: Vec<f64>,
}

/// Lowest eigenstates (raw eigenvalues) with `u` normalised to `Int u^2 dr = 1`.
pub fn radial_states(problem: &RadialProblem, n_levels: usize) -> Result<Vec<RadialState>> {
    problem.validate()?;
    let (diag, off, r) = problem.matrix(&problem.grid);
    let energies = eigenvalues_on(problem, &problem.grid, n_levels)?;
    Ok(energies
        .into_iter()
        .map(|energy| {
            let w = inverse_iteration(&diag, &off, energy);
            let mut u: Vec<f64> = match problem.grid.spacing {
                Spacing::Uniform => w,
                // Undo the symmetrisation: w_sym = r w, u = r^(1/2) w.
                Spacing::Logarithmic => w.iter().zip(&r).map(|(wi, ri)| wi / ri.sqrt()).collect(),
            };
            let norm = integrate(&r, &u.iter().map(|v| v * v).collect::<Vec<_>>()).sqrt();
            let sign = if u.iter().take(u.len() / 10 + 1).sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
            u.iter_mut().for_each(|v| *v *= sign / norm);
            RadialState { energy, r: r.clone(), u }
        })
        .collect())
}

/// Trapezoid rule from `r = 0`, with the integrand at the origin linearly
/// extrapolated from the first two nodes.
fn integrate(r: &[f64], f: &[f64]) -> f64 {
    let f_origin = f[0] - r[0] * (f[1] - f[0]) / (r[1] - r[0]);
    let mut acc = 0.5 * r[0] * (f[0] + f_origin);
    for i in 1..r.len() {
        acc += 0.5 * (r[i] - r[i - 1]) * (f[i] + f[i - 1]);
    }
    acc
}

/// First derivative on a possibly non-uniform grid: five-point stencil in
/// the interior of uniform grids, three-point otherwise.
fn derivative(r: &[f64], u: &[f64], spacing: Spacing) -> Vec<f64> {
    let n = r.len();
    let mut d = three_point_derivative(r, u);
    if spacing == Spacing::Uniform && n > 4 {
        let h = r[1] - r[0];
        for i in 2..n - 2 {
            d[i] = (u[i - 2] - 8.0 * u[i - 1] + 8.0 * u[i + 1] - u[i + 2]) / (12.0 * h);
        }
    }
    d
}

fn three_point_derivative(r: &[f64], u: &[f64]) -> Vec<f64> {
    let n = r.len();
    (0..n)
        .map(|i| {
            let (rm, um) = if i == 0 { (0.0, 0.0) } else { (r[i - 1], u[i - 1]) };
            let (rp, up) = if i + 1 == n { (r[i] + (r[i] - rm), 0.0) } else { (r[i + 1], u[i + 1]) };
            let (h1, h2) = (r[i] - rm, rp - r[i]);
            (up * h1 * h1 - um * h2 * h2 + u[i] * (h2 * h2 - h1 * h1)) / (h1 * h2 * (h1 + h2))
        })
        .collect()
}

/// Expectation values needed for the first-order shifts, in units with `hbar` restored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentExpectations {
    /// `<p^4>`.
    pub p4: f64,
    /// `<p . (1/r) p>`.
    pub p_inv_r_p: f64,
    /// `<p . r (1/r^3) r . p>`.
    pub p_radial_p: f64,
}

/// Momentum expectations of a flat-space Coulomb eigenstate.
///
/// `<p^4>` uses the eigenvalue equation, `p^2 u = 2 mu (E - V) u`.
pub fn moment_expectations(problem: &RadialProblem, state: &RadialState) -> MomentExpectations {
    let (r, u) = (&state.r, &state.u);
    let hbar2 = problem.hbar * problem.hbar;
    let mu = problem.reduced_mass;
    let ll = f64::from(problem.l * (problem.l + 1));
    let du = derivative(r, u, problem.grid.spacing);
    let p4_density: Vec<f64> = r
        .iter()
        .zip(u)
        .map(|(ri, ui)| {
            let e_minus_v = state.energy + problem.coulomb_strength / ri;
            (2.0 * mu * e_minus_v * ui).powi(2) / problem.kinetic_coefficient.powi(2)
        })
        .collect();
    let radial: Vec<f64> = r
        .iter()
        .zip(u.iter().zip(&du))
        .map(|(ri, (ui, dui))| (dui - ui / ri).powi(2) / ri)
        .collect();
    let angular: Vec<f64> = r.iter().zip(u).map(|(ri, ui)| ll * ui * ui / ri.powi(3)).collect();
    let radial_int = integrate(r, &radial);
    MomentExpectations {
        p4: integrate(r, &p4_density),
        p_inv_r_p: hbar2 * (radial_int + integrate(r, &angular)),
        p_radial_p: hbar2 * radial_int,
    }
}

/// Two-body hydrogen-like atom.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AtomParameters {
    pub m1: f64,
    pub m2: f64,
    pub e1: f64,
    pub e2: f64,
}

impl AtomParameters {
    pub fn hydrogen_like(m1: f64, m2: f64, e: f64) -> Self {
        Self {
            m1,
            m2,
            e1: -e,
            e2: e,
        }
    }

    pub fn total_mass(&self) -> f64 {
        self.m1 + self.m2
    }

    pub fn reduced_mass(&self) -> f64 {
        self.m1 * self.m2 / self.total_mass()
    }

    fn validate(&self) -> Result<()> {
        if !(self.m1 > 0.0 && self.m2 > 0.0) {
            return Err(Error::InvalidParameter("masses must be positive".into()));
        }
        if !(self.e1 * self.e2 < 0.0) {
            return Err(Error::InvalidParameter("charges must attract for bound levels".into()));
        }
        Ok(())
    }
}

/// One bound level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelRecord {
    pub n: u32,
    pub l: u32,
    /// Eigenvalue of the metric-corrected radial problem (coordinate time).
    pub energy: f64,
    pub shift_p4: f64,
    pub shift_darwin_cross: f64,
    /// `energy + shift_p4 + shift_darwin_cross`.
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumResult {
    pub total_mass: f64,
    pub kinetic_coefficient: f64,
    pub coulomb_coefficient: f64,
    pub levels: Vec<LevelRecord>,
}

impl SpectrumResult {
    pub fn level(&self, n: u32) -> Result<&LevelRecord> {
        self.levels
            .iter()
            .find(|lv| lv.n == n)
            .ok_or_else(|| Error::InvalidParameter(format!("level n = {n} not in spectrum")))
    }
}

/// Levels `n = l+1 .. l+n_levels` of the internal Hamiltonian at the potential of `ctx`.
///
/// The radial problem uses `A = 1 + 2 gamma phi/c^2` and `B = 1 + gamma phi/c^2`.
/// The `1/c^2` shifts are evaluated on the flat (`A = B = 1`) eigenstates, so
/// they carry no potential dependence.
pub fn internal_levels(ctx: &PpnContext, atom: &AtomParameters, l: u32, n_levels: usize) -> Result<SpectrumResult> {
    ctx.validate()?;
    atom.validate()?;
    let x = ctx.phi_over_c2();
    let a = 1.0 + 2.0 * ctx.gamma * x;
    let b = 1.0 + ctx.gamma * x;
    let k = -atom.e1 * atom.e2 * ctx.units.coulomb_constant();
    let (mu, m) = (atom.reduced_mass(), atom.total_mass());
    let hbar = ctx.units.hbar;
    let c2 = ctx.c2();

    let problem = RadialProblem::new(mu, a, b * k, l, hbar);
    let energies = solve_radial(&problem, n_levels)?;
    let flat = RadialProblem::new(mu, 1.0, k, l, hbar);
    let states = radial_states(&flat, n_levels)?;
    let mass_factor = (atom.m1.powi(3) + atom.m2.powi(3)) / m.powi(3);

    let levels = energies
        .iter()
        .zip(&states)
        .enumerate()
        .map(|(i, (&energy, state))| {
            let ex = moment_expectations(&flat, state);
            let shift_p4 = -mass_factor * ex.p4 / (8.0 * mu.powi(3) * c2);
            let shift_darwin_cross = -k / (2.0 * mu * m * c2) * (ex.p_inv_r_p + ex.p_radial_p);
            LevelRecord {
                n: l + 1 + i as u32,
                l,
                energy,
                shift_p4,
                shift_darwin_cross,
                total: energy + shift_p4 + shift_darwin_cross,
            }
        })
        .collect();
    Ok(SpectrumResult {
        total_mass: m,
        kinetic_coefficient: a,
        coulomb_coefficient: b,
        levels,
    })
}

/// `M + E_n / c^2` with the shifted level energy.
pub fn mass_defect(spectrum: &SpectrumResult, n: u32, ctx: &PpnContext) -> Result<f64> {
    Ok(spectrum.total_mass + spectrum.level(n)?.total / ctx.c2())
}

/// `(E_n - E_m) / (hbar sqrt(-g00))`: the transition frequency in the proper
/// time of an observer at rest at the atom.
pub fn proper_time_frequency(spectrum: &SpectrumResult, n: u32, m: u32, ctx: &PpnContext) -> Result<f64> {
    if n == m {
        return Err(Error::InvalidParameter("transition needs two distinct levels".into()));
    }
    let delta = spectrum.level(n)?.total - spectrum.level(m)?.total;
    Ok(delta / (ctx.units.hbar * lapse(ctx)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn unit_problem(l: u32) -> RadialProblem {
        RadialProblem::new(1.0, 1.0, 1.0, l, 1.0)
    }

    #[test]
    fn bohr_levels() {
        let e = solve_radial(&unit_problem(0), 3).unwrap();
        for (n, v) in e.iter().enumerate() {
            let exact = -0.5 / ((n + 1) * (n + 1)) as f64;
            assert_relative_eq!(*v, exact, max_relative = 1e-6);
        }
    }

    #[test]
    fn p_wave_starts_at_n2() {
        let e = solve_radial(&unit_problem(1), 2).unwrap();
        assert_relative_eq!(e[0], -0.125, max_relative = 1e-6);
        assert_relative_eq!(e[1], -0.5 / 9.0, max_relative = 1e-6);
    }

    #[test]
    fn scaled_problem_matches_ratio() {
        let (a, b) = (1.0 + 2e-3, 1.0 + 1e-3);
        let scaled = solve_radial(&RadialProblem::new(1.0, a, b, 0, 1.0), 2).unwrap();
        let base = solve_radial(&unit_problem(0), 2).unwrap();
        for (s, f) in scaled.iter().zip(&base) {
            assert_relative_eq!(*s, b * b / a * f, max_relative = 1e-13);
        }
    }

    #[test]
    fn raw_solver_is_second_order() {
        let p = unit_problem(0);
        let errs: Vec<(f64, f64)> = [2000usize, 4001, 8003]
            .iter()
            .map(|&n| {
                let g = RadialGrid::uniform(p.grid.r_max, n);
                let e = solve_radial_raw(&p.with_grid(g), 1).unwrap()[0];
                (g.step(), (e + 0.5).abs())
            })
            .collect();
        for o in crate::order::observed_orders(&errs) {
            assert!((1.8..=2.2).contains(&o), "order {o}");
        }
    }

    #[test]
    fn logarithmic_grid_agrees() {
        let p = unit_problem(0).with_grid(RadialGrid::logarithmic(1e-9, 60.0, 6000));
        let e = solve_radial(&p, 2).unwrap();
        assert_relative_eq!(e[0], -0.5, max_relative = 1e-6);
        assert_relative_eq!(e[1], -0.125, max_relative = 1e-6);
    }

    #[test]
    fn grid_validation() {
        let p = unit_problem(0);
        assert!(matches!(
            solve_radial(&p.with_grid(RadialGrid::uniform(60.0, 100)), 1),
            Err(Error::Grid(_))
        ));
        assert!(matches!(
            solve_radial(&p.with_grid(RadialGrid::uniform(10.0, 4000)), 1),
            Err(Error::Grid(_))
        ));
    }

    #[test]
    fn ground_state_moments() {
        let p = unit_problem(0);
        let s = &radial_states(&p, 1).unwrap()[0];
        let ex = moment_expectations(&p, s);
        assert_relative_eq!(ex.p4, 5.0, max_relative = 1e-4);
        assert_relative_eq!(ex.p_inv_r_p, 1.0, max_relative = 1e-4);
        assert_relative_eq!(ex.p_radial_p, 1.0, max_relative = 1e-4);
    }

    #[test]
    fn tridiagonal_bisection_small_matrix() {
        // [[2,-1,0],[-1,2,-1],[0,-1,2]]: 2 - sqrt 2, 2, 2 + sqrt 2.
        let e = tridiagonal_lowest(&[2.0, 2.0, 2.0], &[-1.0, -1.0], 3);
        let s = 2f64.sqrt();
        for (v, x) in e.iter().zip([2.0 - s, 2.0, 2.0 + s]) {
            assert!((v - x).abs() < 1e-14);
        }
    }
}
