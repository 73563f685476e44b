//! Verification reports and sweep results with deterministic serialization.
//!
//! Floats are rendered with exactly 12 significant digits in scientific
//! notation so that identical runs produce byte-identical output.

/// Renders a float with 12 significant digits, deterministically.
pub fn fmt_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.11e}")
    } else {
        "null".to_string()
    }
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Outcome of one inequality check.
///
/// `deficit` is the slack of the inequality (nonnegative when it holds):
/// `rhs - lhs` for upper bounds `lhs <= rhs`, `lhs - rhs` for lower bounds.
/// `passed` holds exactly when `deficit >= -tolerance`, with the absolute
/// tolerance derived from the relative one against `max(|lhs|, |rhs|, 1)`.
#[derive(Debug, Clone)]
pub struct VerificationReport {
    pub inequality_id: String,
    pub lhs: f64,
    pub rhs: f64,
    pub deficit: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub params: Vec<(String, String)>,
    pub provenance: String,
}

impl VerificationReport {
    fn build(
        id: &str,
        lhs: f64,
        rhs: f64,
        deficit: f64,
        rel_tol: f64,
        mut params: Vec<(String, String)>,
        provenance: String,
    ) -> Self {
        params.sort_by(|a, b| a.0.cmp(&b.0));
        let tolerance = rel_tol * lhs.abs().max(rhs.abs()).max(1.0);
        VerificationReport {
            inequality_id: id.to_string(),
            lhs,
            rhs,
            deficit,
            tolerance,
            passed: deficit >= -tolerance,
            params,
            provenance,
        }
    }

    /// Check of an upper bound `lhs <= rhs`.
    pub fn upper_bound(
        id: &str,
        lhs: f64,
        rhs: f64,
        rel_tol: f64,
        params: Vec<(String, String)>,
        provenance: String,
    ) -> Self {
        Self::build(id, lhs, rhs, rhs - lhs, rel_tol, params, provenance)
    }

    /// Check of a lower bound `lhs >= rhs`.
    pub fn lower_bound(
        id: &str,
        lhs: f64,
        rhs: f64,
        rel_tol: f64,
        params: Vec<(String, String)>,
        provenance: String,
    ) -> Self {
        Self::build(id, lhs, rhs, lhs - rhs, rel_tol, params, provenance)
    }

    /// Single-line JSON record with fixed key order.
    pub fn to_json(&self) -> String {
        let mut out = String::from("{");
        out.push_str(&format!("\"inequality_id\":\"{}\"", escape(&self.inequality_id)));
        out.push_str(",\"params\":{");
        for (i, (k, v)) in self.params.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(&format!("\"{}\":\"{}\"", escape(k), escape(v)));
        }
        out.push('}');
        out.push_str(&format!(",\"lhs\":{}", fmt_float(self.lhs)));
        out.push_str(&format!(",\"rhs\":{}", fmt_float(self.rhs)));
        out.push_str(&format!(",\"deficit\":{}", fmt_float(self.deficit)));
        out.push_str(&format!(",\"tolerance\":{}", fmt_float(self.tolerance)));
        out.push_str(&format!(",\"passed\":{}", self.passed));
        out.push_str(&format!(",\"provenance\":\"{}\"", escape(&self.provenance)));
        out.push('}');
        out
    }

    pub const CSV_HEADER: &'static str = "inequality_id,space,p,N,avr,lhs,rhs,deficit,passed";

    fn param(&self, key: &str) -> String {
        self.params
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.clone())
            .unwrap_or_default()
    }

    /// One CSV row matching [`Self::CSV_HEADER`].
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.inequality_id,
            self.param("space"),
            self.param("p"),
            self.param("N"),
            self.param("avr"),
            fmt_float(self.lhs),
            fmt_float(self.rhs),
            fmt_float(self.deficit),
            self.passed
        )
    }
}

/// Result of a sharpness sweep over a decreasing parameter schedule.
#[derive(Debug, Clone)]
pub struct SweepResult {
    pub parameter_values: Vec<f64>,
    pub implied_values: Vec<f64>,
    pub limit_estimate: f64,
    pub target: f64,
}

impl SweepResult {
    pub fn new(parameter_values: Vec<f64>, implied_values: Vec<f64>, target: f64) -> Self {
        let limit_estimate = richardson_limit(&parameter_values, &implied_values);
        SweepResult {
            parameter_values,
            implied_values,
            limit_estimate,
            target,
        }
    }

    pub fn min_implied(&self) -> f64 {
        self.implied_values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn to_json(&self) -> String {
        let mut out = String::from("{\"parameter_values\":[");
        for (i, v) in self.parameter_values.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(&fmt_float(*v));
        }
        out.push_str("],\"implied_values\":[");
        for (i, v) in self.implied_values.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(&fmt_float(*v));
        }
        out.push_str(&format!(
            "],\"limit_estimate\":{},\"target\":{}}}",
            fmt_float(self.limit_estimate),
            fmt_float(self.target)
        ));
        out
    }

    /// CSV rows `parameter,implied_value`, one per sweep point.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("parameter,implied_value\n");
        for (p, v) in self.parameter_values.iter().zip(self.implied_values.iter()) {
            out.push_str(&format!("{},{}\n", fmt_float(*p), fmt_float(*v)));
        }
        out
    }
}

/// Extrapolates the sweep limit at parameter 0 from the last three points
/// (polynomial elimination, valid for first-order convergence).
pub fn richardson_limit(params: &[f64], values: &[f64]) -> f64 {
    let n = params.len().min(values.len());
    if n == 0 {
        return f64::NAN;
    }
    if n == 1 {
        return values[n - 1];
    }
    let take = n.min(3);
    let ps = &params[n - take..n];
    let vs = &values[n - take..n];
    // Lagrange evaluation at parameter 0
    let mut limit = 0.0;
    for i in 0..take {
        let mut weight = 1.0;
        for j in 0..take {
            if i != j {
                weight *= -ps[j] / (ps[i] - ps[j]);
            }
        }
        limit += weight * vs[i];
    }
    limit
}
