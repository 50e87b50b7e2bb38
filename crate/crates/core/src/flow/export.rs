use std::fmt::Write as _;

use super::integrate::Trajectory;

impl Trajectory {
    /// CSV with columns `t, x.., p.., u, H, F` (`F` blank when not attached).
    pub fn to_csv(&self) -> String {
        let n = self.dim;
        let mut out = String::from("t");
        for i in 1..=n {
            let _ = write!(out, ",x{i}");
        }
        for i in 1..=n {
            let _ = write!(out, ",p{i}");
        }
        out.push_str(",u,H,F\n");
        for k in 0..self.len() {
            let z = &self.points[k];
            let _ = write!(out, "{}", self.times[k]);
            for v in z.x.coords().iter().chain(z.p()) {
                let _ = write!(out, ",{v}");
            }
            let _ = write!(out, ",{},{},", z.u, self.h_values[k]);
            if let Some(f) = &self.f_values {
                let _ = write!(out, "{}", f[k]);
            }
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }
}
