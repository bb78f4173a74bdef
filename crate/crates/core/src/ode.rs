//! Dormand-Prince 5(4) for scalar ODEs with continuous (dense) output.

use crate::error::{Error, Result};

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];

const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];

const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

#[derive(Debug, Clone, Copy)]
pub struct Options {
    pub rtol: f64,
    pub atol: f64,
    /// Initial step; chosen from the derivative scale when `None`.
    pub h0: Option<f64>,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for Options {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-10,
            h0: None,
            h_max: f64::INFINITY,
            max_steps: 1_000_000,
        }
    }
}

/// Continuous extension of one accepted step.
#[derive(Debug, Clone, Copy)]
pub struct DenseStep {
    pub t0: f64,
    pub h: f64,
    rcont: [f64; 5],
}

impl DenseStep {
    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    pub fn y0(&self) -> f64 {
        self.rcont[0]
    }

    pub fn y1(&self) -> f64 {
        self.rcont[0] + self.rcont[1]
    }

    pub fn eval(&self, t: f64) -> f64 {
        let th = (t - self.t0) / self.h;
        let th1 = 1.0 - th;
        let r = &self.rcont;
        r[0] + th * (r[1] + th1 * (r[2] + th * (r[3] + th1 * r[4])))
    }
}

/// Accepted steps of an integration that stopped on a level crossing.
#[derive(Debug, Clone)]
pub struct LevelCrossing {
    pub steps: Vec<DenseStep>,
    /// Time at which the solution reaches the target level.
    pub t_hit: f64,
    pub rejected: usize,
}

impl LevelCrossing {
    /// Dense value at `t` in `[t0, t_hit]`.
    pub fn eval(&self, t: f64) -> f64 {
        let k = self.steps.partition_point(|st| st.t1() < t).min(self.steps.len() - 1);
        self.steps[k].eval(t)
    }

    /// Time at which the (increasing) solution equals `level`.
    pub fn time_at(&self, level: f64) -> f64 {
        let k = self.steps.partition_point(|st| st.y1() < level).min(self.steps.len() - 1);
        invert_step(&self.steps[k], level, self.steps[k].t1().min(self.t_hit))
    }
}

fn invert_step(step: &DenseStep, level: f64, t_end: f64) -> f64 {
    let (mut lo, mut hi) = (step.t0, t_end);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if step.eval(mid) < level {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Integrates `y' = f(t, y)` from `(t0, y0)` until `y` first reaches
/// `target` (the solution must be increasing). The crossing is located on
/// the dense output of the final step.
pub fn integrate_to_level<F>(f: F, t0: f64, y0: f64, target: f64, opts: &Options) -> Result<LevelCrossing>
where
    F: Fn(f64, f64) -> f64,
{
    if y0 >= target {
        return Err(Error::invalid("initial value already at or above the target level"));
    }
    let mut t = t0;
    let mut y = y0;
    let mut k = [0.0f64; 7];
    k[0] = f(t, y);
    if !(k[0] > 0.0) {
        return Err(Error::invalid("solution is not increasing at the initial point"));
    }
    let sc0 = opts.atol + opts.rtol * y.abs();
    let mut h = opts
        .h0
        .unwrap_or_else(|| (0.01 * sc0.max(1e-6) / k[0].abs()).max(1e-8) * 10.0)
        .min(opts.h_max);
    let mut steps = Vec::new();
    let mut rejected = 0;
    let mut err_old = 1e-4f64;
    for _ in 0..opts.max_steps {
        for stage in 1..7 {
            let mut acc = 0.0;
            for (j, kj) in k.iter().enumerate().take(stage) {
                acc += A[stage][j] * kj;
            }
            k[stage] = f(t + C[stage] * h, y + h * acc);
        }
        let y_new = y + h * A[6].iter().zip(&k).map(|(a, kj)| a * kj).sum::<f64>();
        let err_raw = h * E.iter().zip(&k).map(|(e, kj)| e * kj).sum::<f64>();
        let sc = opts.atol + opts.rtol * y.abs().max(y_new.abs());
        let err = (err_raw / sc).abs();
        if !err.is_finite() || !y_new.is_finite() {
            return Err(Error::Numeric(format!("non-finite state at t = {t}")));
        }
        if err <= 1.0 {
            // PI step-size control.
            let fac = (0.9 * err.max(1e-10).powf(-0.17) * err_old.powf(0.04)).clamp(0.2, 10.0);
            let r1 = y_new - y;
            let r2 = h * k[0] - r1;
            let r3 = r1 - h * k[6] - r2;
            let r4 = h * D.iter().zip(&k).map(|(d, kj)| d * kj).sum::<f64>();
            let step = DenseStep {
                t0: t,
                h,
                rcont: [y, r1, r2, r3, r4],
            };
            steps.push(step);
            if y_new >= target {
                let t_hit = invert_step(&step, target, step.t1());
                return Ok(LevelCrossing { steps, t_hit, rejected });
            }
            t += h;
            y = y_new;
            k[0] = k[6];
            err_old = err.max(1e-4);
            h = (h * fac).min(opts.h_max);
        } else {
            rejected += 1;
            h *= (0.9 * err.powf(-0.2)).max(0.2);
        }
        if h.abs() < 1e-14 * t.abs().max(1.0) {
            return Err(Error::Numeric(format!("step size underflow at t = {t}")));
        }
    }
    Err(Error::Numeric(format!("no level crossing within {} steps", opts.max_steps)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_growth_hits_level() {
        let sol = integrate_to_level(|_, y| y, 0.0, 1.0, std::f64::consts::E, &Options::default()).unwrap();
        assert!((sol.t_hit - 1.0).abs() < 1e-9);
        assert!((sol.eval(0.5) - 0.5f64.exp()).abs() < 1e-9);
        assert!((sol.time_at(2.0) - 2f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn logistic_dense_output() {
        // y' = y(1-y), y(0) = 0.1
        let exact = |t: f64| 1.0 / (1.0 + 9.0 * (-t).exp());
        let sol = integrate_to_level(|_, y| y * (1.0 - y), 0.0, 0.1, 0.9, &Options::default()).unwrap();
        for k in 0..50 {
            let t = sol.t_hit * k as f64 / 49.0;
            assert!((sol.eval(t) - exact(t)).abs() < 1e-9, "t={t}");
        }
        assert!((sol.t_hit - 2.0 * 9f64.ln()).abs() < 1e-8);
    }

    #[test]
    fn rejects_bad_starts() {
        assert!(integrate_to_level(|_, _| 1.0, 0.0, 2.0, 1.0, &Options::default()).is_err());
        assert!(integrate_to_level(|_, _| -1.0, 0.0, 0.0, 1.0, &Options::default()).is_err());
    }
}
