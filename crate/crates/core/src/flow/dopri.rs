//! Dormand–Prince 5(4) with PI step control and Hairer's 4th-order dense
//! output.

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// difference between the 5th and embedded 4th order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const BETA: f64 = 0.04;
const ALPHA: f64 = 0.2 - BETA * 0.75;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;

/// Continuous extension over one accepted step `[t0, t0 + h]`.
#[derive(Debug, Clone)]
pub struct DenseSegment {
    pub t0: f64,
    pub h: f64,
    rcont: [Vec<f64>; 5],
}

impl DenseSegment {
    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    /// Interpolated state at time `t` (meant for `t` inside the step).
    pub fn eval(&self, t: f64) -> Vec<f64> {
        let theta = (t - self.t0) / self.h;
        let theta1 = 1.0 - theta;
        let [r1, r2, r3, r4, r5] = &self.rcont;
        (0..r1.len())
            .map(|i| r1[i] + theta * (r2[i] + theta1 * (r3[i] + theta * (r4[i] + theta1 * r5[i]))))
            .collect()
    }

    pub fn contains(&self, t: f64) -> bool {
        let (a, b) = if self.h >= 0.0 { (self.t0, self.t1()) } else { (self.t1(), self.t0) };
        t >= a && t <= b
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    pub rel: f64,
    pub abs: f64,
    pub max_step: f64,
}

/// What the caller wants after an accepted step. Returning `Modified` tells
/// the solver the state was altered in place (FSAL stage is recomputed).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepAction {
    Continue,
    Modified,
    Stop,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Reached,
    Stopped,
    StepUnderflow,
    NonFinite,
}

pub struct Accepted<'a> {
    pub t: f64,
    pub y: &'a mut Vec<f64>,
    pub segment: DenseSegment,
}

/// Integrates `y' = f(t, y)` from `t0` to `t_end` (either direction).
///
/// `on_step` sees every accepted step with the new state and its dense
/// segment; it may edit the state (returning `Modified`) or stop the run.
pub fn solve<F, S>(f: F, t0: f64, y0: &[f64], t_end: f64, tol: Tolerances, mut on_step: S) -> Outcome
where
    F: Fn(f64, &[f64], &mut [f64]),
    S: FnMut(Accepted<'_>) -> StepAction,
{
    let n = y0.len();
    let span = t_end - t0;
    if span == 0.0 {
        return Outcome::Reached;
    }
    let dir = span.signum();
    let min_step = 1e-14 * span.abs().max(t0.abs());
    let max_step = tol.max_step.min(span.abs());

    let mut t = t0;
    let mut y = y0.to_vec();
    let mut k: [Vec<f64>; 7] = std::array::from_fn(|_| vec![0.0; n]);
    let mut ytmp = vec![0.0; n];
    let mut y1 = vec![0.0; n];
    let mut err = vec![0.0; n];
    f(t, &y, &mut k[0]);
    let mut h = dir * initial_step(&f, t, &y, &k[0], dir, tol).min(max_step);
    let mut fac_old = 1e-4_f64;
    let mut last_rejected = false;

    loop {
        if (t - t_end) * dir >= 0.0 {
            return Outcome::Reached;
        }
        if h.abs() < min_step {
            return Outcome::StepUnderflow;
        }
        let last = (t + h - t_end) * dir >= 0.0;
        if last {
            h = t_end - t;
        }

        for i in 0..n {
            ytmp[i] = y[i] + h * A21 * k[0][i];
        }
        let (k0, rest) = k.split_first_mut().unwrap();
        f(t + C2 * h, &ytmp, &mut rest[0]);
        for i in 0..n {
            ytmp[i] = y[i] + h * (A31 * k0[i] + A32 * rest[0][i]);
        }
        f(t + C3 * h, &ytmp, &mut rest[1]);
        for i in 0..n {
            ytmp[i] = y[i] + h * (A41 * k0[i] + A42 * rest[0][i] + A43 * rest[1][i]);
        }
        f(t + C4 * h, &ytmp, &mut rest[2]);
        for i in 0..n {
            ytmp[i] = y[i] + h * (A51 * k0[i] + A52 * rest[0][i] + A53 * rest[1][i] + A54 * rest[2][i]);
        }
        f(t + C5 * h, &ytmp, &mut rest[3]);
        for i in 0..n {
            ytmp[i] = y[i]
                + h * (A61 * k0[i] + A62 * rest[0][i] + A63 * rest[1][i] + A64 * rest[2][i] + A65 * rest[3][i]);
        }
        f(t + h, &ytmp, &mut rest[4]);
        for i in 0..n {
            y1[i] = y[i]
                + h * (A71 * k0[i] + A73 * rest[1][i] + A74 * rest[2][i] + A75 * rest[3][i] + A76 * rest[4][i]);
        }
        f(t + h, &y1, &mut rest[5]);
        for i in 0..n {
            err[i] = h
                * (E1 * k0[i] + E3 * rest[1][i] + E4 * rest[2][i] + E5 * rest[3][i] + E6 * rest[4][i]
                    + E7 * rest[5][i]);
        }

        let mut sq = 0.0;
        for i in 0..n {
            let sc = tol.abs + tol.rel * y[i].abs().max(y1[i].abs());
            sq += (err[i] / sc).powi(2);
        }
        let e = (sq / n as f64).sqrt();
        if !e.is_finite() || y1.iter().any(|v| !v.is_finite()) {
            if h.abs() <= min_step * 2.0 {
                return Outcome::NonFinite;
            }
            h *= 0.25;
            last_rejected = true;
            continue;
        }

        let fac11 = e.powf(ALPHA);
        if e <= 1.0 {
            let mut fac = fac11 / fac_old.powf(BETA);
            fac = (fac / SAFETY).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
            let mut h_new = h / fac;
            fac_old = e.max(1e-4);

            let mut r5 = vec![0.0; n];
            let mut r2 = vec![0.0; n];
            let mut r3 = vec![0.0; n];
            let mut r4 = vec![0.0; n];
            for i in 0..n {
                let dy = y1[i] - y[i];
                let bspl = h * k[0][i] - dy;
                r2[i] = dy;
                r3[i] = bspl;
                r4[i] = dy - h * k[6][i] - bspl;
                r5[i] = h
                    * (D1 * k[0][i] + D3 * k[2][i] + D4 * k[3][i] + D5 * k[4][i] + D6 * k[5][i] + D7 * k[6][i]);
            }
            let segment = DenseSegment {
                t0: t,
                h,
                rcont: [y.clone(), r2, r3, r4, r5],
            };
            t = if last { t_end } else { t + h };
            std::mem::swap(&mut y, &mut y1);
            let action = on_step(Accepted {
                t,
                y: &mut y,
                segment,
            });
            match action {
                StepAction::Stop => return Outcome::Stopped,
                StepAction::Modified => f(t, &y, &mut k[0]),
                StepAction::Continue => {
                    let (first, rest) = k.split_first_mut().unwrap();
                    std::mem::swap(first, &mut rest[5]);
                }
            }
            if last {
                return Outcome::Reached;
            }
            if h_new.abs() > max_step {
                h_new = dir * max_step;
            }
            if last_rejected && h_new.abs() > h.abs() {
                h_new = h;
            }
            last_rejected = false;
            h = h_new;
        } else {
            h /= (fac11 / SAFETY).min(1.0 / FAC_MIN);
            last_rejected = true;
        }
    }
}

fn initial_step<F>(f: &F, t: f64, y: &[f64], f0: &[f64], dir: f64, tol: Tolerances) -> f64
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    let n = y.len();
    let sc: Vec<f64> = y.iter().map(|v| tol.abs + tol.rel * v.abs()).collect();
    let dnf = (0..n).map(|i| (f0[i] / sc[i]).powi(2)).sum::<f64>() / n as f64;
    let dny = (0..n).map(|i| (y[i] / sc[i]).powi(2)).sum::<f64>() / n as f64;
    let mut h = if dnf <= 1e-10 || dny <= 1e-10 {
        1e-6
    } else {
        (dny / dnf).sqrt() * 0.01
    };
    h = h.min(tol.max_step);
    let y1: Vec<f64> = (0..n).map(|i| y[i] + dir * h * f0[i]).collect();
    let mut f1 = vec![0.0; n];
    f(t + dir * h, &y1, &mut f1);
    let der2 = ((0..n).map(|i| ((f1[i] - f0[i]) / sc[i]).powi(2)).sum::<f64>() / n as f64).sqrt() / h;
    let der = der2.max(dnf.sqrt());
    let h1 = if der <= 1e-15 {
        (h * 1e-3).max(1e-6)
    } else {
        (0.01 / der).powf(0.2)
    };
    (100.0 * h).min(h1).min(tol.max_step)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol(rel: f64) -> Tolerances {
        Tolerances {
            rel,
            abs: rel * 1e-2,
            max_step: f64::INFINITY,
        }
    }

    #[test]
    fn exponential_decay_to_tolerance() {
        let mut y_end = vec![];
        let out = solve(|_, y, dy| dy[0] = -y[0], 0.0, &[1.0], 5.0, tol(1e-10), |a| {
            y_end = a.y.clone();
            StepAction::Continue
        });
        assert_eq!(out, Outcome::Reached);
        assert!((y_end[0] - (-5.0f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn backward_harmonic_oscillator() {
        let mut y_end = vec![];
        let out = solve(
            |_, y, dy| {
                dy[0] = y[1];
                dy[1] = -y[0];
            },
            0.0,
            &[0.0, 1.0],
            -3.0,
            tol(1e-10),
            |a| {
                y_end = a.y.clone();
                StepAction::Continue
            },
        );
        assert_eq!(out, Outcome::Reached);
        assert!((y_end[0] - (-3.0f64).sin()).abs() < 1e-9);
        assert!((y_end[1] - (-3.0f64).cos()).abs() < 1e-9);
    }

    #[test]
    fn dense_output_is_fourth_order_inside_steps() {
        let mut worst: f64 = 0.0;
        let mut segs = 0;
        solve(
            |_, y, dy| {
                dy[0] = y[1];
                dy[1] = -y[0];
            },
            0.0,
            &[0.0, 1.0],
            10.0,
            tol(1e-11),
            |a| {
                for j in 1..10 {
                    let s = a.segment.t0 + a.segment.h * j as f64 / 10.0;
                    let v = a.segment.eval(s);
                    worst = worst.max((v[0] - s.sin()).abs()).max((v[1] - s.cos()).abs());
                }
                // endpoints reproduce the step exactly
                let end = a.segment.eval(a.segment.t1());
                assert!((end[0] - a.y[0]).abs() < 1e-14);
                segs += 1;
                StepAction::Continue
            },
        );
        assert!(segs > 5);
        assert!(worst < 1e-9, "dense output error {worst:e}");
    }

    #[test]
    fn stop_and_modify_are_honoured() {
        let mut count = 0;
        let out = solve(|_, _, dy| dy[0] = 1.0, 0.0, &[0.0], 100.0, tol(1e-8), |a| {
            count += 1;
            a.y[0] = 0.0;
            if count == 3 {
                StepAction::Stop
            } else {
                StepAction::Modified
            }
        });
        assert_eq!(out, Outcome::Stopped);
        assert_eq!(count, 3);
    }

    #[test]
    fn blow_up_is_not_silent() {
        // y' = y², y(0) = 1 escapes at t = 1
        let out = solve(|_, y, dy| dy[0] = y[0] * y[0], 0.0, &[1.0], 2.0, tol(1e-9), |a| {
            if a.y[0].abs() > 1e12 {
                StepAction::Stop
            } else {
                StepAction::Continue
            }
        });
        assert!(matches!(out, Outcome::Stopped | Outcome::StepUnderflow | Outcome::NonFinite));
    }
}
