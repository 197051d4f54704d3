use super::{gamma, ConditionError, RcbfParams};

/// Per-node factors shared by every check on one time grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Schedule {
    pub params: RcbfParams,
    pub times: Vec<f64>,
    /// `e^{L t_k}`.
    growth: Vec<f64>,
    /// `e^{L min(t_{k+1}, τ)}`.
    growth_next: Vec<f64>,
    exp_alpha: Vec<f64>,
    exp_beta: Vec<f64>,
    /// `M·dt + eps_int`.
    guard: f64,
}

impl Schedule {
    pub fn new(params: &RcbfParams) -> Result<Self, ConditionError> {
        params.validate()?;
        let grid = params.grid()?;
        let times = grid.times();
        let n = times.len();
        let l = params.lipschitz;
        let growth: Vec<f64> = times.iter().map(|t| (l * t).exp()).collect();
        let growth_next = (0..n).map(|k| growth[(k + 1).min(n - 1)]).collect();
        Ok(Schedule {
            exp_alpha: times.iter().map(|t| (params.alpha * t).exp()).collect(),
            exp_beta: times.iter().map(|t| (params.beta * t).exp()).collect(),
            growth,
            growth_next,
            guard: params.velocity * grid.dt() + params.eps_int,
            times,
            params: *params,
        })
    }

    /// Number of grid nodes, `τ/dt + 1`.
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> usize {
        self.times.len() - 1
    }

    /// `r·e^{L t_k}`.
    #[inline]
    pub fn deviation(&self, r: f64, k: usize) -> f64 {
        r * self.growth[k]
    }

    /// `M·dt + eps_int`.
    pub fn guard(&self) -> f64 {
        self.guard
    }

    /// `e^{γ(s) t_k}·s`, nondecreasing in `s`.
    #[inline]
    pub fn weighted(&self, s: f64, k: usize) -> f64 {
        let f = if s >= 0.0 { self.exp_alpha[k] } else { self.exp_beta[k] };
        f * s
    }

    fn check_len(&self, len: usize) -> Result<(), ConditionError> {
        if len == self.len() {
            Ok(())
        } else {
            Err(ConditionError::GridMismatch { expected: self.len(), found: len })
        }
    }
}

/// State of an incremental check.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pending,
    Pass,
    Fail,
}

/// Safe side of the reachability stage: `sd_k > r·e^{L t_{k+1}} + M·dt + eps_int` at every node.
#[derive(Clone, Debug)]
pub struct OutsideMonitor<'a> {
    schedule: &'a Schedule,
    r: f64,
}

impl<'a> OutsideMonitor<'a> {
    pub fn new(schedule: &'a Schedule, r: f64) -> Self {
        OutsideMonitor { schedule, r }
    }

    /// Largest node threshold; an `sd` trajectory that never exceeds it cannot pass.
    pub fn threshold(&self, k: usize) -> f64 {
        self.r * self.schedule.growth_next[k] + self.schedule.guard
    }

    #[inline]
    pub fn push(&self, k: usize, sd: f64) -> Verdict {
        if !(sd > self.threshold(k)) {
            Verdict::Fail
        } else if k == self.schedule.last() {
            Verdict::Pass
        } else {
            Verdict::Pending
        }
    }
}

/// Unsafe side of the reachability stage for one control: some `k ≥ 1` with
/// `sd_k < −r·e^{L t_k} − (M·dt + eps_int)`.
#[derive(Clone, Debug)]
pub struct InsideMonitor<'a> {
    schedule: &'a Schedule,
    r: f64,
}

impl<'a> InsideMonitor<'a> {
    pub fn new(schedule: &'a Schedule, r: f64) -> Self {
        InsideMonitor { schedule, r }
    }

    pub fn threshold(&self, k: usize) -> f64 {
        -self.schedule.deviation(self.r, k) - self.schedule.guard
    }

    #[inline]
    pub fn push(&self, k: usize, sd: f64) -> Verdict {
        if k >= 1 && sd < self.threshold(k) {
            Verdict::Pass
        } else if k == self.schedule.last() {
            Verdict::Fail
        } else {
            Verdict::Pending
        }
    }
}

/// Safe side of the recurrence stage: some `k ≥ 1` with
/// `e^{γ(ĥ⁻) t_k}·ĥ⁻ ≥ h(x) + r`, `ĥ⁻ = h_k − r·e^{L t_k} − eps_int`.
#[derive(Clone, Debug)]
pub struct RecurrentMonitor<'a> {
    schedule: &'a Schedule,
    r: f64,
    target: f64,
}

impl<'a> RecurrentMonitor<'a> {
    pub fn new(schedule: &'a Schedule, h_x: f64, r: f64) -> Self {
        RecurrentMonitor { schedule, r, target: h_x + r }
    }

    pub fn target(&self) -> f64 {
        self.target
    }

    #[inline]
    pub fn push(&self, k: usize, h: f64) -> Verdict {
        if k >= 1 {
            let lower = h - self.schedule.deviation(self.r, k) - self.schedule.params.eps_int;
            if self.schedule.weighted(lower, k) >= self.target {
                return Verdict::Pass;
            }
        }
        if k == self.schedule.last() {
            Verdict::Fail
        } else {
            Verdict::Pending
        }
    }
}

/// Unsafe side of the recurrence stage for one control:
/// `e^{γ(ĥ⁺) t_k}·ĥ⁺ + G_k < h(x) − r` at every node, `ĥ⁺ = h_k + r·e^{L t_k} + eps_int`.
///
/// The maximum runs over `(0, τ]`, whose closure contains `t = 0`, so node 0 is included.
/// `G_k` bounds the growth of `e^{γt}ĥ⁺` between nodes `k` and `k+1`.
#[derive(Clone, Debug)]
pub struct NonrecurrentMonitor<'a> {
    schedule: &'a Schedule,
    r: f64,
    limit: f64,
}

impl<'a> NonrecurrentMonitor<'a> {
    pub fn new(schedule: &'a Schedule, h_x: f64, r: f64) -> Self {
        NonrecurrentMonitor { schedule, r, limit: h_x - r }
    }

    fn inter_sample(&self, k: usize, upper: f64) -> f64 {
        let s = self.schedule;
        if k == s.last() {
            return 0.0;
        }
        let p = &s.params;
        let dt = s.times[k + 1] - s.times[k];
        let gmax = p.alpha.max(p.beta);
        let rate = p.velocity + p.lipschitz * self.r * s.growth[k + 1];
        dt * (gmax * s.times[k + 1]).exp() * (gmax * (upper.abs() + rate * dt) + rate)
    }

    #[inline]
    pub fn push(&self, k: usize, h: f64) -> Verdict {
        let upper = h + self.schedule.deviation(self.r, k) + self.schedule.params.eps_int;
        if !(self.schedule.weighted(upper, k) + self.inter_sample(k, upper) < self.limit) {
            Verdict::Fail
        } else if k == self.schedule.last() {
            Verdict::Pass
        } else {
            Verdict::Pending
        }
    }
}

fn run(values: &[f64], mut push: impl FnMut(usize, f64) -> Verdict) -> bool {
    for (k, v) in values.iter().enumerate() {
        match push(k, *v) {
            Verdict::Pass => return true,
            Verdict::Fail => return false,
            Verdict::Pending => {}
        }
    }
    false
}

/// `true` certifies that no point of `B_r(x)` reaches the unsafe set within `τ` under
/// the control that produced `sd_traj`.
pub fn check_outside_brt(sd_traj: &[f64], r: f64, params: &RcbfParams) -> Result<bool, ConditionError> {
    let s = Schedule::new(params)?;
    s.check_len(sd_traj.len())?;
    let m = OutsideMonitor::new(&s, r);
    Ok(run(sd_traj, |k, v| m.push(k, v)))
}

/// `true` when every supplied trajectory dives below the robust unsafe threshold.
pub fn check_inside_brt<T: AsRef<[f64]>>(sd_trajs: &[T], r: f64, params: &RcbfParams) -> Result<bool, ConditionError> {
    if sd_trajs.is_empty() {
        return Err(ConditionError::EmptyInput);
    }
    let s = Schedule::new(params)?;
    for t in sd_trajs {
        s.check_len(t.as_ref().len())?;
    }
    let m = InsideMonitor::new(&s, r);
    Ok(sd_trajs.iter().all(|t| run(t.as_ref(), |k, v| m.push(k, v))))
}

/// `true` certifies the recurrence inequality for every point of `B_r(x)` under the
/// control that produced `h_traj`.
pub fn check_robust_recurrent(h_traj: &[f64], h_x: f64, r: f64, params: &RcbfParams) -> Result<bool, ConditionError> {
    let s = Schedule::new(params)?;
    s.check_len(h_traj.len())?;
    let m = RecurrentMonitor::new(&s, h_x, r);
    Ok(run(h_traj, |k, v| m.push(k, v)))
}

/// `true` when no supplied trajectory can satisfy the recurrence inequality anywhere in `B_r(x)`.
pub fn check_robust_nonrecurrent<T: AsRef<[f64]>>(
    h_trajs: &[T],
    h_x: f64,
    r: f64,
    params: &RcbfParams,
) -> Result<bool, ConditionError> {
    if h_trajs.is_empty() {
        return Err(ConditionError::EmptyInput);
    }
    let s = Schedule::new(params)?;
    for t in h_trajs {
        s.check_len(t.as_ref().len())?;
    }
    let m = NonrecurrentMonitor::new(&s, h_x, r);
    Ok(h_trajs.iter().all(|t| run(t.as_ref(), |k, v| m.push(k, v))))
}

/// The plain recurrence inequality `max_{t_k > 0} e^{γ(h_k) t_k}·h_k ≥ h(x)` on the
/// samples `(times[k], h_traj[k])`.
pub fn rcbf_pointwise(h_traj: &[f64], times: &[f64], h_x: f64, alpha: f64, beta: f64) -> bool {
    h_traj
        .iter()
        .zip(times)
        .filter(|(_, t)| **t > 0.0)
        .any(|(h, t)| (gamma(*h, alpha, beta) * t).exp() * h >= h_x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(tau: f64, l: f64, m: f64, dt: f64) -> RcbfParams {
        RcbfParams { tau, alpha: 0.05, beta: 0.05, lipschitz: l, velocity: m, dt, eps_int: 0.0 }
    }

    #[test]
    fn outside_examples() {
        let p = params(1.0, 0.0, 1.0, 0.01);
        assert!(check_outside_brt(&[10.0; 101], 0.1, &p).unwrap());
        let mut touch = [10.0; 101];
        touch[40] = 0.0;
        assert!(!check_outside_brt(&touch, 0.1, &p).unwrap());
        let edge = 0.1 + 0.01;
        assert!(!check_outside_brt(&[edge; 101], 0.1, &p).unwrap());
        assert!(matches!(check_outside_brt(&[1.0; 5], 0.1, &p), Err(ConditionError::GridMismatch { .. })));
    }

    #[test]
    fn inside_examples() {
        let p = params(1.0, 0.0, 1.0, 0.5);
        let dive = vec![-1.0, -2.0, -2.0];
        let stay = vec![-1.0, 0.5, 1.0];
        assert!(check_inside_brt(&[dive.clone(), dive.clone()], 0.1, &p).unwrap());
        assert!(!check_inside_brt(&[dive, stay], 0.1, &p).unwrap());
        assert!(matches!(check_inside_brt::<Vec<f64>>(&[], 0.1, &p), Err(ConditionError::EmptyInput)));
    }

    #[test]
    fn pointwise_hand_case() {
        assert!(!rcbf_pointwise(&[-0.5, -0.5], &[0.0, 1.0], -1.0, 1.0, 1.0));
        assert!(rcbf_pointwise(&[0.0, 0.3], &[0.0, 1.0], 0.3, 1.0, 1.0));
    }

    #[test]
    fn nonrecurrent_needs_node_zero_margin() {
        let p = RcbfParams { tau: 0.1, alpha: 0.01, beta: 0.01, lipschitz: 0.0, velocity: 0.0, dt: 0.05, eps_int: 0.0 };
        assert!(check_robust_nonrecurrent(&[vec![-10.0; 3]], 0.0, 0.1, &p).unwrap());
        assert!(!check_robust_nonrecurrent(&[vec![-10.0, -10.0, 0.5]], 0.0, 0.1, &p).unwrap());
    }
}
