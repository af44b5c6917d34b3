//! Sliding-window SE(2) factor-graph smoother: binary odometry factors,
//! gated unary overhead-registration factors, and batch optimization over
//! the most recent stretch of states.
//!
//! Residuals follow the measurement-times-inverse-estimate convention
//! `log(M T^-1)` (unary) and `log(M (T_a^-1 T_b)^-1)` (odometry), whitened
//! componentwise by the isotropic sigmas. Optimization is damped
//! Gauss-Newton on the manifold with right retraction `T <- T exp(delta)`;
//! damped steps are only accepted on a cost decrease. Marginalization is
//! approximated by anchoring: when old states fall out of the window, a
//! strong prior pins the new oldest state at its current estimate.

use crate::error::{Error, Result};
use crate::geo::GeoReference;
use crate::linalg::cholesky_solve;
use crate::scalar::{real, Real};
use crate::se2::{
    adjoint, left_jacobian_inv, mat3_mul, right_jacobian_inv, Mat3, Pose2, Twist2,
};

/// Isotropic noise: one sigma for x/y, one for yaw.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel<T> {
    pub sigma_xy: T,
    pub sigma_yaw: T,
}

impl<T: Real> NoiseModel<T> {
    pub fn new(sigma_xy: T, sigma_yaw: T) -> Self {
        assert!(
            sigma_xy > T::zero() && sigma_yaw > T::zero(),
            "noise sigmas must be strictly positive"
        );
        Self {
            sigma_xy,
            sigma_yaw,
        }
    }

    #[inline]
    fn weights(&self) -> [T; 3] {
        [
            T::one() / self.sigma_xy,
            T::one() / self.sigma_xy,
            T::one() / self.sigma_yaw,
        ]
    }
}

/// Relative-motion constraint between consecutive states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdometryFactor<T> {
    pub from_index: usize,
    pub to_index: usize,
    pub measurement: Pose2<T>,
    pub noise: NoiseModel<T>,
}

impl<T: Real> OdometryFactor<T> {
    pub fn new(from_index: usize, measurement: Pose2<T>, noise: NoiseModel<T>) -> Self {
        Self {
            from_index,
            to_index: from_index + 1,
            measurement,
            noise,
        }
    }
}

/// Global-pose constraint on a single state, produced only by
/// registrations that passed the fitness gate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnaryFactor<T> {
    pub index: usize,
    pub measurement: Pose2<T>,
    pub noise: NoiseModel<T>,
}

/// Prior pinning a state at a fixed pose: the initial georeferenced guess
/// and the anchor replacing marginalized states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriorFactor<T> {
    pub index: usize,
    pub pose: Pose2<T>,
    pub noise: NoiseModel<T>,
}

/// Whitened odometry residual `log(M (T_from^-1 T_to)^-1) / sigma`.
pub fn residual_odometry<T: Real>(
    factor: &OdometryFactor<T>,
    from: &Pose2<T>,
    to: &Pose2<T>,
) -> [T; 3] {
    let between = from.inverse().compose(to);
    let xi = factor.measurement.compose(&between.inverse()).log();
    whiten(&xi, &factor.noise)
}

/// Whitened unary residual `log(M T^-1) / sigma`.
pub fn residual_unary<T: Real>(factor: &UnaryFactor<T>, state: &Pose2<T>) -> [T; 3] {
    let xi = factor.measurement.compose(&state.inverse()).log();
    whiten(&xi, &factor.noise)
}

#[inline]
fn whiten<T: Real>(xi: &Twist2<T>, noise: &NoiseModel<T>) -> [T; 3] {
    let w = noise.weights();
    [xi.rho_x * w[0], xi.rho_y * w[1], xi.omega * w[2]]
}

#[inline]
fn scale_rows<T: Real>(m: &Mat3<T>, w: &[T; 3]) -> Mat3<T> {
    let mut out = *m;
    for (row, wi) in out.iter_mut().zip(w) {
        for v in row.iter_mut() {
            *v = *v * *wi;
        }
    }
    out
}

/// Analytic Jacobian of the whitened unary residual with respect to a
/// right perturbation of the state.
fn unary_jacobian<T: Real>(factor: &UnaryFactor<T>, state: &Pose2<T>) -> Mat3<T> {
    let xi = factor.measurement.compose(&state.inverse()).log();
    // d/d(delta) log(X exp(-Ad_T delta)) = -Jr^-1(xi) Ad_T
    let mut j = mat3_mul(&right_jacobian_inv(&xi), &adjoint(state));
    for row in j.iter_mut() {
        for v in row.iter_mut() {
            *v = -*v;
        }
    }
    scale_rows(&j, &factor.noise.weights())
}

/// Analytic Jacobians of the whitened odometry residual with respect to
/// right perturbations of (from, to).
fn odometry_jacobians<T: Real>(
    factor: &OdometryFactor<T>,
    from: &Pose2<T>,
    to: &Pose2<T>,
) -> (Mat3<T>, Mat3<T>) {
    let between = from.inverse().compose(to);
    let xi = factor.measurement.compose(&between.inverse()).log();
    let w = factor.noise.weights();
    // X = M T_to^-1 T_from: perturbing `from` multiplies X on the right,
    // perturbing `to` injects exp(-Ad_M delta) on the left.
    let j_from = scale_rows(&right_jacobian_inv(&xi), &w);
    let mut j_to = mat3_mul(&left_jacobian_inv(&xi), &adjoint(&factor.measurement));
    for row in j_to.iter_mut() {
        for v in row.iter_mut() {
            *v = -*v;
        }
    }
    let j_to = scale_rows(&j_to, &w);
    (j_from, j_to)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmootherConfig<T> {
    pub max_iterations: usize,
    /// Convergence threshold on the largest retraction component.
    pub convergence_delta: T,
    pub initial_damping: T,
    /// Prior on the first state at the georeferenced guess; `None` leaves
    /// the first state constrained only by measurements.
    pub initial_prior_noise: Option<NoiseModel<T>>,
    /// Strong prior used to anchor the oldest retained state after drops.
    pub anchor_noise: NoiseModel<T>,
}

impl<T: Real> Default for SmootherConfig<T> {
    fn default() -> Self {
        Self {
            max_iterations: 100,
            convergence_delta: real(1e-8),
            initial_damping: real(1e-6),
            initial_prior_noise: Some(NoiseModel::new(real(0.01), real(0.01))),
            // Approximates the information a window's worth of dropped
            // measurements carries about the oldest state; much tighter
            // and stale errors freeze in, much looser and the window
            // drifts freely during measurement outages.
            anchor_noise: NoiseModel::new(real(0.08), real(0.01)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizeReport<T> {
    /// Linear solves attempted (accepted and rejected).
    pub iterations: usize,
    pub converged: bool,
    pub initial_cost: T,
    pub final_cost: T,
}

/// Sliding window of timestamped SE(2) states plus the factors tying them
/// together. Single-owner mutable object; hand it between threads whole.
#[derive(Debug, Clone)]
pub struct FactorGraphWindow<T> {
    window_duration: T,
    config: SmootherConfig<T>,
    origin_pose: Pose2<T>,
    first_index: usize,
    states: Vec<(T, Pose2<T>)>,
    odometry: Vec<OdometryFactor<T>>,
    unaries: Vec<UnaryFactor<T>>,
    priors: Vec<PriorFactor<T>>,
}

impl<T: Real> FactorGraphWindow<T> {
    /// Establishes the map frame at a georeferenced origin: the first
    /// state will sit at `(0, 0, pi/2 - heading)` under a strong prior.
    pub fn initialize(origin: &GeoReference, window_duration: T, config: SmootherConfig<T>) -> Self {
        Self::from_origin_pose(
            Pose2::new(T::zero(), T::zero(), real(origin.theta())),
            window_duration,
            config,
        )
    }

    /// Same as [`FactorGraphWindow::initialize`] with an explicit map-frame
    /// starting pose.
    pub fn from_origin_pose(
        origin_pose: Pose2<T>,
        window_duration: T,
        config: SmootherConfig<T>,
    ) -> Self {
        assert!(window_duration > T::zero());
        Self {
            window_duration,
            config,
            origin_pose,
            first_index: 0,
            states: Vec::new(),
            odometry: Vec::new(),
            unaries: Vec::new(),
            priors: Vec::new(),
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.states.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Global index of the oldest retained state.
    #[inline]
    pub fn first_index(&self) -> usize {
        self.first_index
    }

    #[inline]
    pub fn states(&self) -> &[(T, Pose2<T>)] {
        &self.states
    }

    #[inline]
    pub fn latest(&self) -> Option<(T, Pose2<T>)> {
        self.states.last().copied()
    }

    #[inline]
    pub fn odometry_factors(&self) -> &[OdometryFactor<T>] {
        &self.odometry
    }

    #[inline]
    pub fn unary_factors(&self) -> &[UnaryFactor<T>] {
        &self.unaries
    }

    #[inline]
    pub fn priors(&self) -> &[PriorFactor<T>] {
        &self.priors
    }

    fn local(&self, global_index: usize) -> usize {
        global_index - self.first_index
    }

    fn pose(&self, global_index: usize) -> &Pose2<T> {
        &self.states[self.local(global_index)].1
    }

    /// Appends a state, maintains the window, and optimizes.
    ///
    /// The first call establishes state 0 at the origin pose (the odometry
    /// argument is not used); every later call composes the latest
    /// estimate with the odometry measurement for the new state's initial
    /// value and adds the binary factor. A unary measurement, when
    /// provided, must already have passed the fitness gate. States older
    /// than the window duration are dropped and replaced by an anchor
    /// prior on the new oldest state fixed at its current estimate.
    pub fn advance(
        &mut self,
        timestamp: T,
        odometry: Option<(Pose2<T>, NoiseModel<T>)>,
        unary: Option<(Pose2<T>, NoiseModel<T>)>,
    ) -> Result<OptimizeReport<T>> {
        if let Some((prev_ts, _)) = self.states.last() {
            if timestamp <= *prev_ts {
                return Err(Error::NonMonotoneTimestamp {
                    prev: prev_ts.to_f64().unwrap_or(f64::NAN),
                    next: timestamp.to_f64().unwrap_or(f64::NAN),
                });
            }
        }

        let new_index = self.first_index + self.states.len();
        if self.states.is_empty() {
            self.states.push((timestamp, self.origin_pose));
            if let Some(noise) = self.config.initial_prior_noise {
                self.priors.push(PriorFactor {
                    index: new_index,
                    pose: self.origin_pose,
                    noise,
                });
            }
        } else {
            let (meas, noise) = odometry.ok_or_else(|| {
                Error::InvalidInput("odometry measurement required after the first state".into())
            })?;
            let last = self.states.last().unwrap().1;
            self.states.push((timestamp, last.compose(&meas)));
            self.odometry
                .push(OdometryFactor::new(new_index - 1, meas, noise));
        }

        if let Some((meas, noise)) = unary {
            self.unaries.push(UnaryFactor {
                index: new_index,
                measurement: meas,
                noise,
            });
        }

        // Drop states older than the window, anchoring the new oldest one.
        let cutoff = timestamp - self.window_duration;
        let drop = self.states.iter().take_while(|(ts, _)| *ts < cutoff).count();
        if drop > 0 && drop < self.states.len() {
            self.states.drain(..drop);
            let new_first = self.first_index + drop;
            self.first_index = new_first;
            self.odometry.retain(|f| f.from_index >= new_first);
            self.unaries.retain(|f| f.index >= new_first);
            self.priors.retain(|f| f.index >= new_first);
            let (_, anchor_pose) = self.states[0];
            self.priors.push(PriorFactor {
                index: new_first,
                pose: anchor_pose,
                noise: self.config.anchor_noise,
            });
        }

        Ok(self.optimize())
    }

    /// Total cost: sum of squared whitened residuals over all factors.
    pub fn total_cost(&self) -> T {
        self.cost_of(&self.states)
    }

    fn cost_of(&self, states: &[(T, Pose2<T>)]) -> T {
        let local = |g: usize| &states[g - self.first_index].1;
        let mut cost = T::zero();
        for f in &self.odometry {
            let r = residual_odometry(f, local(f.from_index), local(f.to_index));
            cost += r.iter().map(|v| *v * *v).sum();
        }
        for f in &self.unaries {
            let r = residual_unary(f, local(f.index));
            cost += r.iter().map(|v| *v * *v).sum();
        }
        for f in &self.priors {
            let unary = UnaryFactor {
                index: f.index,
                measurement: f.pose,
                noise: f.noise,
            };
            let r = residual_unary(&unary, local(f.index));
            cost += r.iter().map(|v| *v * *v).sum();
        }
        cost
    }

    fn accumulate_block(
        h: &mut [T],
        g: &mut [T],
        dim: usize,
        i: usize,
        j: usize,
        ji: &Mat3<T>,
        jj: &Mat3<T>,
        r: Option<&[T; 3]>,
    ) {
        // H[3i.., 3j..] += Ji^T Jj; g[3i..] += Ji^T r when given.
        for a in 0..3 {
            for b in 0..3 {
                let mut s = T::zero();
                for k in 0..3 {
                    s += ji[k][a] * jj[k][b];
                }
                h[(3 * i + a) * dim + 3 * j + b] += s;
            }
            if let Some(r) = r {
                let mut s = T::zero();
                for k in 0..3 {
                    s += ji[k][a] * r[k];
                }
                g[3 * i + a] += s;
            }
        }
    }

    fn build_normal_equations(&self) -> (Vec<T>, Vec<T>) {
        let n = self.states.len();
        let dim = 3 * n;
        let mut h = vec![T::zero(); dim * dim];
        let mut g = vec![T::zero(); dim];

        for f in &self.odometry {
            let (ia, ib) = (self.local(f.from_index), self.local(f.to_index));
            let (from, to) = (self.pose(f.from_index), self.pose(f.to_index));
            let r = residual_odometry(f, from, to);
            let (ja, jb) = odometry_jacobians(f, from, to);
            Self::accumulate_block(&mut h, &mut g, dim, ia, ia, &ja, &ja, Some(&r));
            Self::accumulate_block(&mut h, &mut g, dim, ib, ib, &jb, &jb, Some(&r));
            Self::accumulate_block(&mut h, &mut g, dim, ia, ib, &ja, &jb, None);
            Self::accumulate_block(&mut h, &mut g, dim, ib, ia, &jb, &ja, None);
        }
        let mut unary_like = |f: &UnaryFactor<T>| {
            let i = self.local(f.index);
            let state = self.pose(f.index);
            let r = residual_unary(f, state);
            let j = unary_jacobian(f, state);
            Self::accumulate_block(&mut h, &mut g, dim, i, i, &j, &j, Some(&r));
        };
        for f in &self.unaries {
            unary_like(f);
        }
        for f in &self.priors {
            unary_like(&UnaryFactor {
                index: f.index,
                measurement: f.pose,
                noise: f.noise,
            });
        }
        (h, g)
    }

    /// Damped Gauss-Newton to convergence; deterministic.
    pub fn optimize(&mut self) -> OptimizeReport<T> {
        let initial_cost = self.total_cost();
        if self.states.is_empty() {
            return OptimizeReport {
                iterations: 0,
                converged: true,
                initial_cost,
                final_cost: initial_cost,
            };
        }
        let n = self.states.len();
        let dim = 3 * n;
        let mut cost = initial_cost;
        let mut lambda = self.config.initial_damping;
        let lambda_floor = real::<T>(1e-12);
        let lambda_ceil = real::<T>(1e12);
        let mut iterations = 0;
        let mut converged = false;

        'outer: while iterations < self.config.max_iterations {
            let (h, g) = self.build_normal_equations();
            loop {
                if iterations >= self.config.max_iterations {
                    break 'outer;
                }
                iterations += 1;
                let mut damped = h.clone();
                for i in 0..dim {
                    damped[i * dim + i] += lambda;
                }
                let neg_g: Vec<T> = g.iter().map(|v| -*v).collect();
                let Some(delta) = cholesky_solve(&mut damped, &neg_g, dim) else {
                    // Singular normal equations: raise damping and retry.
                    lambda *= real(10.0);
                    if lambda > lambda_ceil {
                        break 'outer;
                    }
                    continue;
                };
                let candidate: Vec<(T, Pose2<T>)> = self
                    .states
                    .iter()
                    .enumerate()
                    .map(|(i, (ts, p))| {
                        let xi = Twist2::new(delta[3 * i], delta[3 * i + 1], delta[3 * i + 2]);
                        (*ts, p.compose(&Pose2::exp(&xi)))
                    })
                    .collect();
                let new_cost = self.cost_of(&candidate);
                let delta_max = delta
                    .iter()
                    .fold(T::zero(), |acc, v| acc.max(v.abs()));

                if new_cost < cost {
                    self.states = candidate;
                    cost = new_cost;
                    lambda = (lambda / real(10.0)).max(lambda_floor);
                    if delta_max < self.config.convergence_delta {
                        converged = true;
                        break 'outer;
                    }
                    break; // rebuild the linearization
                }
                if delta_max < self.config.convergence_delta {
                    // Stationary: no descent available and the step is
                    // below tolerance.
                    converged = true;
                    break 'outer;
                }
                lambda *= real(10.0);
                if lambda > lambda_ceil {
                    break 'outer;
                }
            }
        }

        OptimizeReport {
            iterations,
            converged,
            initial_cost,
            final_cost: cost,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_PI_2;

    fn noise(xy: f64, yaw: f64) -> NoiseModel<f64> {
        NoiseModel::new(xy, yaw)
    }

    fn default_window(window_duration: f64) -> FactorGraphWindow<f64> {
        FactorGraphWindow::from_origin_pose(
            Pose2::identity(),
            window_duration,
            SmootherConfig::default(),
        )
    }

    #[test]
    fn residual_odometry_zero_when_consistent() {
        let from = Pose2::new(1.0, 2.0, 0.3);
        let to = Pose2::new(1.5, 2.2, 0.5);
        let f = OdometryFactor::new(0, from.inverse().compose(&to), noise(0.04, 0.0017));
        let r = residual_odometry(&f, &from, &to);
        assert!(r.iter().all(|v| v.abs() < 1e-12), "{r:?}");
    }

    #[test]
    fn residual_odometry_hand_computed() {
        // Identity -> (1,0,0) with measurement (1.04,0,0): the log of the
        // 0.04 m translation offset whitened by sigma 0.04 gives exactly 1.
        let f = OdometryFactor::new(
            0,
            Pose2::new(1.04, 0.0, 0.0),
            noise(0.04, 0.1_f64.to_radians()),
        );
        let r = residual_odometry(&f, &Pose2::identity(), &Pose2::new(1.0, 0.0, 0.0));
        assert!((r[0] - 1.0).abs() < 1e-12);
        assert!(r[1].abs() < 1e-12 && r[2].abs() < 1e-12);
    }

    #[test]
    fn residual_scales_inversely_with_sigma() {
        let f1 = OdometryFactor::new(0, Pose2::new(1.1, -0.2, 0.05), noise(0.1, 0.01));
        let f2 = OdometryFactor::new(0, Pose2::new(1.1, -0.2, 0.05), noise(0.2, 0.02));
        let from = Pose2::new(0.3, 0.4, 0.2);
        let to = Pose2::new(1.2, 0.5, 0.21);
        let r1 = residual_odometry(&f1, &from, &to);
        let r2 = residual_odometry(&f2, &from, &to);
        for (a, b) in r1.iter().zip(r2) {
            assert!((a - 2.0 * b).abs() < 1e-12);
        }
    }

    #[test]
    fn residual_unary_cases() {
        let state = Pose2::new(3.0, -1.0, 0.7);
        let f = UnaryFactor {
            index: 0,
            measurement: state,
            noise: noise(0.5, 4.5_f64.to_radians()),
        };
        let r = residual_unary(&f, &state);
        assert!(r.iter().all(|v| v.abs() < 1e-12));

        // Pure yaw offset equal to sigma_yaw gives a unit yaw component.
        let f = UnaryFactor {
            index: 0,
            measurement: Pose2::new(0.0, 0.0, 4.5_f64.to_radians()),
            noise: noise(0.5, 4.5_f64.to_radians()),
        };
        let r = residual_unary(&f, &Pose2::identity());
        assert!((r[2] - 1.0).abs() < 1e-12);
        assert!(r[0].abs() < 1e-12 && r[1].abs() < 1e-12);
    }

    #[test]
    fn unary_cost_matches_explicit_covariance_oracle() {
        // r^T r with componentwise whitening must equal the Mahalanobis
        // form xi^T Q^-1 xi with the explicit 3x3 covariance.
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..100 {
            let state = Pose2::new(
                rng.random_range(-5.0..5.0),
                rng.random_range(-5.0..5.0),
                rng.random_range(-3.0..3.0),
            );
            let meas = Pose2::new(
                rng.random_range(-5.0..5.0),
                rng.random_range(-5.0..5.0),
                rng.random_range(-3.0..3.0),
            );
            let (sxy, syaw) = (0.5, 4.5_f64.to_radians());
            let f = UnaryFactor {
                index: 0,
                measurement: meas,
                noise: noise(sxy, syaw),
            };
            let r = residual_unary(&f, &state);
            let cost: f64 = r.iter().map(|v| v * v).sum();

            let xi = meas.compose(&state.inverse()).log().as_array();
            let q_inv = [1.0 / (sxy * sxy), 1.0 / (sxy * sxy), 1.0 / (syaw * syaw)];
            let oracle: f64 = xi.iter().zip(q_inv).map(|(v, qi)| v * v * qi).sum();
            assert!((cost - oracle).abs() < 1e-9 * oracle.max(1.0));
        }
    }

    #[test]
    fn analytic_jacobians_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let h = 1e-6;
        for _ in 0..50 {
            let rand_pose = |rng: &mut ChaCha8Rng| {
                Pose2::new(
                    rng.random_range(-5.0..5.0),
                    rng.random_range(-5.0..5.0),
                    rng.random_range(-2.0..2.0),
                )
            };
            let from = rand_pose(&mut rng);
            let to = rand_pose(&mut rng);
            let f = OdometryFactor::new(0, rand_pose(&mut rng), noise(0.04, 0.0017));
            let (ja, jb) = odometry_jacobians(&f, &from, &to);
            for col in 0..3 {
                let mut dp = [0.0; 3];
                dp[col] = h;
                let retract = |p: &Pose2<f64>, d: &[f64; 3]| {
                    p.compose(&Pose2::exp(&Twist2::new(d[0], d[1], d[2])))
                };
                let dm = [-dp[0], -dp[1], -dp[2]];
                let rp = residual_odometry(&f, &retract(&from, &dp), &to);
                let rm = residual_odometry(&f, &retract(&from, &dm), &to);
                for row in 0..3 {
                    let fd = (rp[row] - rm[row]) / (2.0 * h);
                    let scale = fd.abs().max(ja[row][col].abs()).max(1.0);
                    assert!(
                        ((fd - ja[row][col]) / scale).abs() < 1e-5,
                        "from jac ({row},{col}): {fd} vs {}",
                        ja[row][col]
                    );
                }
                let rp = residual_odometry(&f, &from, &retract(&to, &dp));
                let rm = residual_odometry(&f, &from, &retract(&to, &dm));
                for row in 0..3 {
                    let fd = (rp[row] - rm[row]) / (2.0 * h);
                    let scale = fd.abs().max(jb[row][col].abs()).max(1.0);
                    assert!(((fd - jb[row][col]) / scale).abs() < 1e-5);
                }
            }

            let uf = UnaryFactor {
                index: 0,
                measurement: rand_pose(&mut rng),
                noise: noise(0.5, 0.0785),
            };
            let state = rand_pose(&mut rng);
            let j = unary_jacobian(&uf, &state);
            for col in 0..3 {
                let mut dp = [0.0; 3];
                dp[col] = h;
                let dm = [-dp[0], -dp[1], -dp[2]];
                let retract = |p: &Pose2<f64>, d: &[f64; 3]| {
                    p.compose(&Pose2::exp(&Twist2::new(d[0], d[1], d[2])))
                };
                let rp = residual_unary(&uf, &retract(&state, &dp));
                let rm = residual_unary(&uf, &retract(&state, &dm));
                for row in 0..3 {
                    let fd = (rp[row] - rm[row]) / (2.0 * h);
                    let scale = fd.abs().max(j[row][col].abs()).max(1.0);
                    assert!(((fd - j[row][col]) / scale).abs() < 1e-5);
                }
            }
        }
    }

    #[test]
    fn single_state_single_unary_reaches_measurement() {
        let mut config = SmootherConfig::default();
        config.initial_prior_noise = None;
        let mut w = FactorGraphWindow::from_origin_pose(Pose2::identity(), 10.0, config);
        let meas = Pose2::new(2.0, -1.0, 0.4);
        let report = w
            .advance(0.0, None, Some((meas, noise(0.5, 0.0785))))
            .unwrap();
        assert!(report.converged);
        let (_, state) = w.latest().unwrap();
        assert!((state.x - meas.x).abs() < 1e-9);
        assert!((state.y - meas.y).abs() < 1e-9);
        assert!((state.theta - meas.theta).abs() < 1e-9);
    }

    #[test]
    fn first_advance_sits_at_origin_guess() {
        let origin = Pose2::new(0.0, 0.0, FRAC_PI_2);
        let mut w =
            FactorGraphWindow::from_origin_pose(origin, 10.0, SmootherConfig::default());
        w.advance(0.0, None, None).unwrap();
        assert_eq!(w.len(), 1);
        let (_, state) = w.latest().unwrap();
        assert!((state.theta - FRAC_PI_2).abs() < 1e-12);
        assert!(state.translation().norm() < 1e-12);
    }

    #[test]
    fn exact_odometry_chain_recovers_trajectory() {
        // Five states on a curve; exact odometry + anchored origin.
        let truth: Vec<Pose2<f64>> = (0..5)
            .map(|i| Pose2::new(i as f64 * 0.8, (i as f64 * 0.4).sin(), 0.1 * i as f64))
            .collect();
        let mut w = FactorGraphWindow::from_origin_pose(
            truth[0],
            1e9,
            SmootherConfig::default(),
        );
        w.advance(0.0, None, None).unwrap();
        for k in 1..truth.len() {
            let meas = truth[k - 1].inverse().compose(&truth[k]);
            w.advance(k as f64, Some((meas, noise(0.04, 0.0017))), None)
                .unwrap();
        }
        assert_eq!(w.len(), 5);
        for ((_, got), want) in w.states().iter().zip(&truth) {
            assert!((got.x - want.x).abs() < 1e-9);
            assert!((got.y - want.y).abs() < 1e-9);
            assert!((got.theta - want.theta).abs() < 1e-9);
        }
        assert!(w.total_cost() < 1e-16);
    }

    #[test]
    fn noise_free_measurements_reach_zero_cost() {
        // Odometry and unary measurements generated from the same ground
        // truth: feasible zero-residual optimum.
        let truth: Vec<Pose2<f64>> = (0..20)
            .map(|i| {
                let t = i as f64 * 0.5;
                Pose2::new(t, 0.3 * (0.2 * t).sin(), 0.05 * (0.4 * t).cos())
            })
            .collect();
        let mut w =
            FactorGraphWindow::from_origin_pose(truth[0], 1e9, SmootherConfig::default());
        let sat = noise(0.5, 4.5_f64.to_radians());
        let odo = noise(0.04, 0.1_f64.to_radians());
        w.advance(0.0, None, Some((truth[0], sat))).unwrap();
        for k in 1..truth.len() {
            let meas = truth[k - 1].inverse().compose(&truth[k]);
            let unary = (k % 3 == 0).then_some((truth[k], sat));
            w.advance(k as f64, Some((meas, odo)), unary).unwrap();
        }
        assert!(w.total_cost() < 1e-16, "cost {}", w.total_cost());
        for ((_, got), want) in w.states().iter().zip(&truth) {
            assert!((got.x - want.x).abs() < 1e-8);
            assert!((got.y - want.y).abs() < 1e-8);
        }
    }

    #[test]
    fn window_drops_states_and_bounds_span() {
        let mut w = default_window(10.0);
        w.advance(0.0, None, None).unwrap();
        let odo = noise(0.04, 0.0017);
        for k in 1..=48 {
            let t = k as f64 * 0.25; // 4 Hz
            w.advance(t, Some((Pose2::new(0.25, 0.0, 0.0), odo)), None)
                .unwrap();
        }
        // t = 12 s: states older than 2 s dropped, 41 retained at 4 Hz.
        assert_eq!(w.len(), 41);
        let span = w.states().last().unwrap().0 - w.states().first().unwrap().0;
        assert!(span <= 10.0 + 1e-12);
        assert_eq!(w.first_index(), 8);
        // A single anchor prior pins the oldest retained state.
        assert_eq!(w.priors().len(), 1);
        assert_eq!(w.priors()[0].index, 8);
        // All factors reference retained states only.
        for f in w.odometry_factors() {
            assert!(f.from_index >= w.first_index());
        }
        for f in w.unary_factors() {
            assert!(f.index >= w.first_index());
        }
    }

    #[test]
    fn windowed_matches_full_batch_on_noise_free_data() {
        let truth: Vec<Pose2<f64>> = (0..30)
            .map(|i| {
                let t = i as f64;
                Pose2::new(t * 1.2, 2.0 * (0.1 * t).sin(), 0.2 * (0.15 * t).sin())
            })
            .collect();
        let sat = noise(0.5, 4.5_f64.to_radians());
        let odo = noise(0.04, 0.1_f64.to_radians());

        let run = |duration: f64| {
            let mut w = FactorGraphWindow::from_origin_pose(
                truth[0],
                duration,
                SmootherConfig::default(),
            );
            w.advance(0.0, None, Some((truth[0], sat))).unwrap();
            for k in 1..truth.len() {
                let meas = truth[k - 1].inverse().compose(&truth[k]);
                w.advance(k as f64, Some((meas, odo)), Some((truth[k], sat)))
                    .unwrap();
            }
            w
        };
        let windowed = run(10.0);
        let batch = run(1e9);
        assert!(windowed.first_index() > 0);
        for (ts, got) in windowed.states() {
            let (_, want) = batch.states()[*ts as usize];
            assert!((got.x - want.x).abs() < 1e-9);
            assert!((got.y - want.y).abs() < 1e-9);
            assert!((got.theta - want.theta).abs() < 1e-9);
        }
    }

    #[test]
    fn non_monotone_timestamp_rejected() {
        let mut w = default_window(10.0);
        w.advance(0.0, None, None).unwrap();
        let r = w.advance(0.0, Some((Pose2::identity(), noise(1.0, 1.0))), None);
        assert!(matches!(r, Err(Error::NonMonotoneTimestamp { .. })));
    }

    #[test]
    fn cost_non_increasing_with_noisy_measurements() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let mut w = default_window(1e9);
        w.advance(0.0, None, None).unwrap();
        let odo = noise(0.04, 0.0017);
        let sat = noise(0.5, 0.0785);
        for k in 1..25 {
            let meas = Pose2::new(
                1.0 + rng.random_range(-0.05..0.05),
                rng.random_range(-0.05..0.05),
                rng.random_range(-0.01..0.01),
            );
            let unary = Pose2::new(
                k as f64 + rng.random_range(-0.5..0.5),
                rng.random_range(-0.5..0.5),
                rng.random_range(-0.1..0.1),
            );
            let report = w
                .advance(k as f64, Some((meas, odo)), Some((unary, sat)))
                .unwrap();
            assert!(report.final_cost <= report.initial_cost + 1e-12);
            assert!(report.converged);
        }
    }
}
