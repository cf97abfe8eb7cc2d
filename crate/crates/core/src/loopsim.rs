//! Discrete-time simulator of the delegation feedback loop:
//! AI capability -> lower delegation threshold -> reduced practice ->
//! attenuated capacity -> lower threshold.
//!
//! Only the direction of each arrow is given; every functional form and
//! default magnitude here is invented for illustration and carries no
//! empirical calibration. Units are token-like throughout: the delegation
//! threshold and practice level are treated as commensurable with capacity.
//!
//! One step, all nodes read the same prior state `(A, T, P, H)`:
//!
//! ```text
//! A' = A * exp(g)
//! T' = max(0, exp(-k_t * g) * (T - k_t * max(0, T - H)))
//! P' = max(p_floor, 0, P + k_p * (min(T, H) - P))
//! H' = max(h_floor, H - k_c * max(0, H - P) + r * max(0, P - H))
//! ```
//!
//! Tasks above the threshold are delegated, so the practiced share of work
//! is `min(T, H)`; the maintenance level of capacity `H` is practice equal
//! to `H`. With every coupling in `[0, 1]` each update is nondecreasing in
//! `T`, `P` and `H`, which makes capacity trajectories ordered by `k_c`.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoopState {
    /// Proxied by the context window, in tokens.
    pub ai_capability: f64,
    pub delegation_threshold: f64,
    pub practice: f64,
    pub capacity: f64,
}

impl LoopState {
    pub fn check(&self) -> Result<()> {
        let all_finite = [self.ai_capability, self.delegation_threshold, self.practice, self.capacity]
            .iter()
            .all(|v| v.is_finite());
        if !all_finite || !(self.capacity > 0.0) || !(self.practice >= 0.0) || !(self.delegation_threshold >= 0.0) || !(self.ai_capability > 0.0) {
            return Err(Error::domain(format!("invalid loop state {self:?}")));
        }
        Ok(())
    }

    /// Starting point: threshold and capacity at one ECS value, practice at
    /// the tokens of a single linear reading pass.
    pub fn baseline(ai_capability: f64, ecs_tokens: f64, linear_pass_tokens: f64) -> Self {
        Self {
            ai_capability,
            delegation_threshold: ecs_tokens,
            practice: linear_pass_tokens,
            capacity: ecs_tokens,
        }
    }

    fn components(&self) -> [f64; 4] {
        [self.ai_capability, self.delegation_threshold, self.practice, self.capacity]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoopParams {
    /// Log growth of capability per period.
    pub capability_growth_rate: f64,
    pub k_threshold: f64,
    pub k_practice: f64,
    pub k_capacity: f64,
    pub practice_floor: f64,
    pub capacity_floor: f64,
    pub recovery_rate: f64,
}

// Illustrative magnitudes: about a 20-period halving of capacity from the
// 2022 baseline at the fitted frontier growth rate.
pub const DEFAULT_K_THRESHOLD: f64 = 0.12;
pub const DEFAULT_K_PRACTICE: f64 = 0.3;
pub const DEFAULT_K_CAPACITY: f64 = 0.08;
pub const DEFAULT_CAPACITY_FLOOR: f64 = 250.0;
pub const DEFAULT_RECOVERY_RATE: f64 = 0.05;

impl LoopParams {
    /// Invented default couplings with the given capability growth rate.
    pub fn illustrative(capability_growth_rate: f64) -> Self {
        Self {
            capability_growth_rate,
            k_threshold: DEFAULT_K_THRESHOLD,
            k_practice: DEFAULT_K_PRACTICE,
            k_capacity: DEFAULT_K_CAPACITY,
            practice_floor: 0.0,
            capacity_floor: DEFAULT_CAPACITY_FLOOR,
            recovery_rate: DEFAULT_RECOVERY_RATE,
        }
    }

    /// All couplings and growth zero: `step` is the identity.
    pub fn decoupled(capacity_floor: f64) -> Self {
        Self {
            capability_growth_rate: 0.0,
            k_threshold: 0.0,
            k_practice: 0.0,
            k_capacity: 0.0,
            practice_floor: 0.0,
            capacity_floor,
            recovery_rate: 0.0,
        }
    }

    pub fn check(&self) -> Result<()> {
        let couplings = [
            ("k_threshold", self.k_threshold),
            ("k_practice", self.k_practice),
            ("k_capacity", self.k_capacity),
            ("recovery_rate", self.recovery_rate),
        ];
        for (name, k) in couplings {
            if !(0.0..=1.0).contains(&k) {
                return Err(Error::domain(format!("{name} = {k} outside [0, 1]")));
            }
        }
        if !self.capability_growth_rate.is_finite() {
            return Err(Error::domain("capability growth rate must be finite"));
        }
        if !(self.practice_floor >= 0.0 && self.practice_floor.is_finite()) {
            return Err(Error::domain(format!("practice_floor {} must be >= 0", self.practice_floor)));
        }
        if !(self.capacity_floor > 0.0 && self.capacity_floor.is_finite()) {
            return Err(Error::domain(format!("capacity_floor {} must be > 0", self.capacity_floor)));
        }
        Ok(())
    }
}

/// Raises the practice floor from a given period onward.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Intervention {
    /// Steps taken from this period index on use the new floor.
    pub at_period: usize,
    pub practice_floor: f64,
}

pub fn step(state: &LoopState, params: &LoopParams) -> LoopState {
    let LoopState {
        ai_capability: a,
        delegation_threshold: t,
        practice: p,
        capacity: h,
    } = *state;
    let g = params.capability_growth_rate;

    let threshold = ((-params.k_threshold * g).exp() * (t - params.k_threshold * (t - h).max(0.0))).max(0.0);
    let practice = (p + params.k_practice * (t.min(h) - p))
        .max(params.practice_floor)
        .max(0.0);
    let capacity = (h - params.k_capacity * (h - p).max(0.0) + params.recovery_rate * (p - h).max(0.0))
        .max(params.capacity_floor);

    LoopState {
        ai_capability: a * g.exp(),
        delegation_threshold: threshold,
        practice,
        capacity,
    }
}

/// Trajectory of `periods + 1` states starting at `initial`.
pub fn simulate(initial: &LoopState, params: &LoopParams, periods: usize) -> Vec<LoopState> {
    simulate_with(initial, params, periods, None)
}

pub fn simulate_with(
    initial: &LoopState,
    params: &LoopParams,
    periods: usize,
    intervention: Option<Intervention>,
) -> Vec<LoopState> {
    let mut out = Vec::with_capacity(periods + 1);
    out.push(*initial);
    let mut current = *params;
    let mut state = *initial;
    for period in 0..periods {
        if let Some(iv) = intervention.filter(|iv| iv.at_period == period) {
            current.practice_floor = iv.practice_floor;
        }
        state = step(&state, &current);
        out.push(state);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Trend {
    Declining,
    Stabilized,
    Recovering,
}

/// Mean per-period change of capacity over the final quarter.
pub fn last_quarter_slope(trajectory: &[LoopState]) -> Result<f64> {
    if trajectory.len() < 3 {
        return Err(Error::domain(format!(
            "classification needs at least 3 states, got {}",
            trajectory.len()
        )));
    }
    let q = (trajectory.len() / 4).max(2);
    let tail = &trajectory[trajectory.len() - q..];
    Ok((tail[q - 1].capacity - tail[0].capacity) / (q - 1) as f64)
}

/// `tolerance` is in capacity units per period.
pub fn classify(trajectory: &[LoopState], tolerance: f64) -> Result<Trend> {
    if !(tolerance > 0.0) {
        return Err(Error::domain(format!("tolerance {tolerance} must be positive")));
    }
    let slope = last_quarter_slope(trajectory)?;
    Ok(if slope < -tolerance {
        Trend::Declining
    } else if slope > tolerance {
        Trend::Recovering
    } else {
        Trend::Stabilized
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FixedPoint {
    pub period: usize,
    pub state: LoopState,
}

fn relative_gap(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// First state within `max_periods` steps whose successor differs by less
/// than `epsilon` (relative) in every component.
pub fn find_fixed_point(
    params: &LoopParams,
    initial: &LoopState,
    max_periods: usize,
    epsilon: f64,
) -> Option<FixedPoint> {
    let mut state = *initial;
    for period in 0..=max_periods {
        let next = step(&state, params);
        let settled = state
            .components()
            .iter()
            .zip(next.components())
            .all(|(a, b)| relative_gap(*a, b) < epsilon);
        if settled {
            return Some(FixedPoint { period, state });
        }
        state = next;
    }
    None
}

pub fn trajectory_to_csv(trajectory: &[LoopState]) -> String {
    let mut out = String::from("period,ai_capability,delegation_threshold,practice,capacity\n");
    for (i, s) in trajectory.iter().enumerate() {
        out.push_str(&format!(
            "{i},{},{},{},{}\n",
            s.ai_capability, s.delegation_threshold, s.practice, s.capacity
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    // 2022 baseline: ECS 593 s * R_tok * 1.5, linear pass 593 s * R_tok.
    const R_TOK: f64 = 238.0 * 1.33 / 60.0;
    const FITTED_LAMBDA: f64 = 1.060_558_425_239_072;

    fn baseline() -> LoopState {
        LoopState::baseline(8192.0, 593.0 * R_TOK * 1.5, 593.0 * R_TOK)
    }

    fn defaults() -> LoopParams {
        LoopParams::illustrative(FITTED_LAMBDA)
    }

    fn capacities(traj: &[LoopState]) -> Vec<f64> {
        traj.iter().map(|s| s.capacity).collect()
    }

    #[test]
    fn decoupled_step_is_identity() {
        let s = baseline();
        assert_eq!(step(&s, &LoopParams::decoupled(1.0)), s);
        let traj = simulate(&s, &LoopParams::decoupled(1.0), 25);
        assert_eq!(traj.len(), 26);
        assert!(traj.iter().all(|x| *x == s));
    }

    #[test]
    fn default_step_lowers_capacity() {
        let s = baseline();
        let next = step(&s, &defaults());
        assert!(next.capacity < s.capacity);
        assert!(next.delegation_threshold < s.delegation_threshold);
        assert!(next.ai_capability > s.ai_capability);
    }

    #[test]
    fn floor_above_maintenance_holds_capacity() {
        let mut s = baseline();
        s.practice = 1.2 * s.capacity;
        let mut p = defaults();
        p.practice_floor = 1.2 * s.capacity;
        let next = step(&s, &p);
        assert!(next.capacity >= s.capacity);
        assert!(next.practice >= p.practice_floor);
    }

    #[test]
    fn default_run_declines_to_floor() {
        let p = defaults();
        let traj = simulate(&baseline(), &p, 40);
        assert_eq!(traj.len(), 41);
        let h = capacities(&traj);
        assert!(h.windows(2).all(|w| w[1] <= w[0]));
        assert!(traj.windows(2).all(|w| w[1].delegation_threshold <= w[0].delegation_threshold));
        assert!(h.iter().all(|&v| v >= p.capacity_floor));
        // Roughly halves over 20 periods.
        let ratio = h[20] / h[0];
        assert!((0.4..0.6).contains(&ratio), "{ratio}");
        assert_eq!(classify(&traj, 1.0).unwrap(), Trend::Declining);
    }

    #[test]
    fn intervention_reverses_decline() {
        let s = baseline();
        let iv = Intervention { at_period: 20, practice_floor: s.capacity };
        let traj = simulate_with(&s, &defaults(), 40, Some(iv));
        let h = capacities(&traj);
        let argmin = h
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .unwrap();
        assert!(argmin >= 20, "{argmin}");
        assert!(h[argmin..].windows(2).all(|w| w[1] >= w[0]));
        assert_eq!(classify(&traj, 1.0).unwrap(), Trend::Recovering);
    }

    #[test]
    fn classify_edge_cases() {
        let s = baseline();
        let flat = simulate(&s, &LoopParams::decoupled(1.0), 10);
        assert_eq!(classify(&flat, 1e-9).unwrap(), Trend::Stabilized);
        assert!(classify(&flat[..2], 1.0).is_err());
        assert!(classify(&flat, 0.0).is_err());
    }

    #[test]
    fn fixed_points() {
        let s = baseline();
        let fp = find_fixed_point(&LoopParams::decoupled(1.0), &s, 10, 1e-9).unwrap();
        assert_eq!(fp.period, 0);
        assert_eq!(fp.state, s);

        let mut p = defaults();
        p.capability_growth_rate = 0.0;
        p.practice_floor = 1000.0;
        let fp = find_fixed_point(&p, &s, 5000, 1e-10).expect("converges without growth");
        let next = step(&fp.state, &p);
        for (a, b) in fp.state.components().iter().zip(next.components()) {
            assert!(relative_gap(*a, b) < 1e-10);
        }
        assert!(fp.state.practice >= p.practice_floor);
        assert!((fp.state.capacity - fp.state.practice).abs() / fp.state.capacity < 1e-6);

        assert!(find_fixed_point(&defaults(), &s, 500, 1e-6).is_none());
    }

    #[test]
    fn params_validation() {
        assert!(defaults().check().is_ok());
        let mut p = defaults();
        p.k_capacity = 1.5;
        assert!(p.check().is_err());
        let mut p = defaults();
        p.capacity_floor = 0.0;
        assert!(p.check().is_err());
        let mut p = defaults();
        p.practice_floor = -1.0;
        assert!(p.check().is_err());
        assert!(baseline().check().is_ok());
    }

    #[test]
    fn csv_layout() {
        let csv = trajectory_to_csv(&simulate(&baseline(), &defaults(), 2));
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[0], "period,ai_capability,delegation_threshold,practice,capacity");
        assert_eq!(lines.len(), 4);
        assert!(lines[1].starts_with("0,8192,"));
    }

    fn arb_params() -> impl Strategy<Value = LoopParams> {
        (-0.5..2.0f64, 0.0..=1.0f64, 0.0..=1.0f64, 0.0..=1.0f64, 0.0..5000.0f64, 1.0..3000.0f64, 0.0..=1.0f64)
            .prop_map(|(g, kt, kp, kc, pf, cf, r)| LoopParams {
                capability_growth_rate: g,
                k_threshold: kt,
                k_practice: kp,
                k_capacity: kc,
                practice_floor: pf,
                capacity_floor: cf,
                recovery_rate: r,
            })
    }

    fn arb_state() -> impl Strategy<Value = LoopState> {
        (1.0..1e6f64, 0.0..10_000.0f64, 0.0..10_000.0f64, 1.0..10_000.0f64).prop_map(|(a, t, p, h)| LoopState {
            ai_capability: a,
            delegation_threshold: t,
            practice: p,
            capacity: h,
        })
    }

    proptest! {
        #[test]
        fn deterministic(s in arb_state(), p in arb_params()) {
            let a = simulate(&s, &p, 30);
            let b = simulate(&s, &p, 30);
            let bits = |t: &[LoopState]| t.iter().flat_map(|x| x.components().map(f64::to_bits)).collect::<Vec<_>>();
            prop_assert_eq!(bits(&a), bits(&b));
        }

        #[test]
        fn floors_hold(s in arb_state(), p in arb_params()) {
            for x in &simulate(&s, &p, 40)[1..] {
                prop_assert!(x.capacity >= p.capacity_floor);
                prop_assert!(x.practice >= p.practice_floor);
                prop_assert!(x.delegation_threshold >= 0.0);
                prop_assert!(x.check().is_ok());
            }
        }

        #[test]
        fn higher_k_capacity_lowers_capacity(s in arb_state(), p in arb_params(), extra in 0.0..1.0f64) {
            let mut q = p;
            q.k_capacity = (p.k_capacity + extra).min(1.0);
            let lo = simulate(&s, &q, 40);
            let hi = simulate(&s, &p, 40);
            for (a, b) in lo.iter().zip(&hi) {
                prop_assert!(a.capacity <= b.capacity);
            }
        }

        #[test]
        fn decoupled_identity_any_state(s in arb_state()) {
            prop_assert_eq!(step(&s, &LoopParams::decoupled(s.capacity.min(1.0))), s);
        }

        #[test]
        fn some_practice_floor_reverses_decline(kt in 0.05..0.3f64, kp in 0.1..0.6f64, kc in 0.04..0.15f64, g in 0.3..1.5f64) {
            let mut p = defaults();
            p.k_threshold = kt;
            p.k_practice = kp;
            p.k_capacity = kc;
            p.capability_growth_rate = g;
            let s = baseline();
            let traj = simulate(&s, &p, 40);
            prop_assume!(classify(&traj, 1.0).unwrap() == Trend::Declining);
            let found = [1.0, 1.5, 2.0, 4.0, 8.0].iter().any(|m| {
                let mut q = p;
                q.practice_floor = m * s.capacity;
                classify(&simulate(&s, &q, 40), 1.0).unwrap() == Trend::Recovering
            });
            prop_assert!(found);
        }
    }
}
