//! Decreasing rearrangement onto the one-dimensional model cone and the
//! Polya-Szego check.
//!
//! Sampled inputs are treated as their piecewise-linear interpolants, for
//! which superlevel measures are computed in closed form. The rearranged
//! function is the generalized inverse of the measure profile, tabulated on a
//! grid that contains the exact image of every node level (so plateaus and
//! monotone inputs rearrange exactly) plus adaptive fill between them.

use crate::calculus::{RadialFunction, RadialMap};
use crate::error::{Error, Result};
use crate::report::VerificationReport;
use crate::spaces::SpaceDescriptor;

/// Superlevel measures `m({u > t})` at a decreasing list of levels.
#[derive(Debug, Clone)]
pub struct DistributionProfile {
    pub thresholds: Vec<f64>,
    pub superlevel_measures: Vec<f64>,
}

/// One linear piece of the interpolant, including the constant head below the
/// first grid node.
#[derive(Debug, Clone, Copy)]
struct Segment {
    r0: f64,
    r1: f64,
    v0: f64,
    v1: f64,
}

impl Segment {
    fn min(&self) -> f64 {
        self.v0.min(self.v1)
    }

    fn max(&self) -> f64 {
        self.v0.max(self.v1)
    }

    /// Measure of `{u > t}` (or `{u >= t}` when `strict` is false) inside the
    /// piece, as an exact ball-volume difference.
    fn measure_above(&self, space: &SpaceDescriptor, t: f64, strict: bool) -> f64 {
        let above = |v: f64| if strict { v > t } else { v >= t };
        let vol = |a: f64, b: f64| {
            space.ball_volume(b).unwrap_or(0.0) - space.ball_volume(a).unwrap_or(0.0)
        };
        match (above(self.v0), above(self.v1)) {
            (true, true) => vol(self.r0, self.r1),
            (false, false) => 0.0,
            (a0, _) => {
                let cross = self.r0 + (t - self.v0) * (self.r1 - self.r0) / (self.v1 - self.v0);
                let cross = cross.clamp(self.r0, self.r1);
                if a0 {
                    vol(self.r0, cross)
                } else {
                    vol(cross, self.r1)
                }
            }
        }
    }
}

/// Exact superlevel-measure profile of a piecewise-linear interpolant, with
/// per-band active-segment lists so that level inversions stay cheap.
struct LevelSets<'a> {
    space: &'a SpaceDescriptor,
    segments: Vec<Segment>,
    /// distinct node values, strictly decreasing
    levels: Vec<f64>,
    /// per band `(levels[j+1], levels[j])`: segments crossing the whole band
    active: Vec<Vec<usize>>,
    /// per band: total measure of segments lying fully above the band
    base: Vec<f64>,
}

impl<'a> LevelSets<'a> {
    fn new(u: &RadialFunction, space: &'a SpaceDescriptor) -> Result<Self> {
        if u.min_value() < 0.0 {
            return Err(Error::Domain(
                "rearrangement requires a nonnegative function".into(),
            ));
        }
        let grid = u.grid();
        let values = u.values();
        let mut segments = Vec::with_capacity(grid.len());
        if grid[0] > 0.0 {
            segments.push(Segment {
                r0: 0.0,
                r1: grid[0],
                v0: values[0],
                v1: values[0],
            });
        }
        for i in 0..grid.len() - 1 {
            segments.push(Segment {
                r0: grid[i],
                r1: grid[i + 1],
                v0: values[i],
                v1: values[i + 1],
            });
        }
        let mut levels: Vec<f64> = values.to_vec();
        levels.sort_by(|a, b| b.total_cmp(a));
        levels.dedup();
        let bands = levels.len().saturating_sub(1);
        let mut active = vec![Vec::new(); bands];
        let mut base = vec![0.0; bands];
        for j in 0..bands {
            let (top, bottom) = (levels[j], levels[j + 1]);
            for (idx, seg) in segments.iter().enumerate() {
                if seg.min() >= top {
                    base[j] += space.ball_volume(seg.r1)? - space.ball_volume(seg.r0)?;
                } else if seg.min() <= bottom && seg.max() >= top {
                    active[j].push(idx);
                }
            }
        }
        Ok(LevelSets {
            space,
            segments,
            levels,
            active,
            base,
        })
    }

    /// `m({u > t})`, exact for the interpolant.
    fn measure(&self, t: f64, strict: bool) -> f64 {
        self.segments
            .iter()
            .map(|s| s.measure_above(self.space, t, strict))
            .sum()
    }

    /// `m({u > t})` for `t` strictly inside band `j`, using the active list.
    fn measure_in_band(&self, j: usize, t: f64) -> f64 {
        let mut total = self.base[j];
        for &idx in &self.active[j] {
            total += self.segments[idx].measure_above(self.space, t, true);
        }
        total
    }
}

/// Measures of the strict superlevel sets `{u > t}` at the given positive
/// levels, returned with thresholds sorted in decreasing order.
pub fn distribution(
    u: &RadialFunction,
    space: &SpaceDescriptor,
    levels: &[f64],
) -> Result<DistributionProfile> {
    if levels.iter().any(|t| !(*t > 0.0) && u.eval(u.r_end()) != 0.0) {
        return Err(Error::Domain(
            "level 0 is only admissible when the function vanishes at its support end".into(),
        ));
    }
    if levels.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(Error::Domain("levels must be finite and nonnegative".into()));
    }
    let sets = LevelSets::new(u, space)?;
    let mut thresholds = levels.to_vec();
    thresholds.sort_by(|a, b| b.total_cmp(a));
    let superlevel_measures = thresholds.iter().map(|&t| sets.measure(t, true)).collect();
    Ok(DistributionProfile {
        thresholds,
        superlevel_measures,
    })
}

/// Decreasing rearrangement of `u` onto the model cone of the same dimension.
pub fn rearrangement(u: &RadialFunction, space: &SpaceDescriptor) -> Result<RadialFunction> {
    let sets = LevelSets::new(u, space)?;
    let sigma = space.sigma();
    let n_dim = space.n_dim();
    let radius_of = |mass: f64| (mass.max(0.0) / sigma).powf(1.0 / n_dim);

    // Exact breakpoints: images of every node level, twice when a plateau
    // separates the strict and weak superlevel measures.
    let mut points: Vec<(f64, f64)> = Vec::new();
    for &level in &sets.levels {
        let weak = sets.measure(level, false);
        let strict = sets.measure(level, true);
        points.push((radius_of(strict), level));
        if weak > strict {
            points.push((radius_of(weak), level));
        }
    }
    points.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.total_cmp(&a.1)));

    // Adaptive fill between breakpoints. Levels are bisected inside the
    // matching band and each fill point is the exact measure image of its
    // level, so every tabulated sample lies on the rearranged curve. The
    // subdivision stops only when both the value deviation of the chord and
    // the mass its radial shift carries are negligible, keeping superlevel
    // measures of the tabulated function accurate even where it is flat.
    let value_scale = sets.levels.first().copied().unwrap_or(0.0);
    let y_scale = points.last().map(|p| p.0).unwrap_or(1.0).max(1e-300);
    let fill_tol = 1e-9 * value_scale.max(1e-300);
    let mut assembled: Vec<(f64, f64)> = Vec::new();
    let mut budget = 262144usize;
    for pair in points.windows(2) {
        let ((y0, t0), (y1, t1)) = (pair[0], pair[1]);
        assembled.push((y0, t0));
        if y1 - y0 <= 1e-12 * y1.max(1.0) || t0 == t1 {
            continue;
        }
        // locate the band (t1, t0); node levels are exact boundaries
        let band = match sets.levels.iter().position(|&l| l == t0) {
            Some(j) if j + 1 < sets.levels.len() && sets.levels[j + 1] == t1 => j,
            _ => continue,
        };
        let mut stack = vec![(t0, y0, t1, y1, 32u32)];
        while let Some((a_t, a_y, b_t, b_y, depth)) = stack.pop() {
            if depth == 0 || budget == 0 || b_y - a_y < 1e-11 * y_scale {
                continue;
            }
            let mid_t = 0.5 * (a_t + b_t);
            let mid_y = radius_of(sets.measure_in_band(band, mid_t));
            let chord_y = a_y + (mid_t - a_t) / (b_t - a_t) * (b_y - a_y);
            let y_dev = (mid_y - chord_y).abs();
            let t_dev = y_dev * ((b_t - a_t) / (b_y - a_y)).abs();
            let mass_dev = y_dev * n_dim * sigma * mid_y.powf(n_dim - 1.0);
            // error budget relative to the superlevel mass at this radius
            let mass_tol = 1e-9 * (sigma * mid_y.powf(n_dim)).max(1.0);
            if t_dev <= fill_tol && mass_dev <= mass_tol {
                continue;
            }
            budget -= 1;
            assembled.push((mid_y, mid_t));
            stack.push((a_t, a_y, mid_t, mid_y, depth - 1));
            stack.push((mid_t, mid_y, b_t, b_y, depth - 1));
        }
    }
    if let Some(&last) = points.last() {
        assembled.push(last);
    }
    assembled.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.total_cmp(&a.1)));

    // strictly increasing grid: nudge exact duplicates (value jumps)
    let mut ys = Vec::with_capacity(assembled.len());
    let mut ts = Vec::with_capacity(assembled.len());
    for (y, t) in assembled {
        let mut y = y;
        if let Some(&prev) = ys.last() {
            if y <= prev {
                y = prev + 1e-12 * prev.max(1e-12);
            }
            let prev_t = *ts.last().unwrap();
            if t > prev_t {
                // bisection noise: keep the profile non-increasing
                ts.push(prev_t);
                ys.push(y);
                continue;
            }
        }
        ys.push(y);
        ts.push(t);
    }
    if ys.len() < 2 {
        // constant-zero input
        return RadialFunction::new(vec![0.0, 1.0], vec![0.0, 0.0]);
    }
    RadialFunction::new(ys, ts)
}

/// Exact Cheeger energy of the piecewise-linear interpolant:
/// sum over segments of |slope|^p times the weight mass of the segment.
pub(crate) fn segment_energy(u: &RadialFunction, p: f64, space: &SpaceDescriptor) -> Result<f64> {
    let grid = u.grid();
    let values = u.values();
    let mut total = 0.0;
    for i in 0..grid.len() - 1 {
        let slope = (values[i + 1] - values[i]) / (grid[i + 1] - grid[i]);
        if slope != 0.0 {
            total += slope.abs().powf(p)
                * (space.ball_volume(grid[i + 1])? - space.ball_volume(grid[i])?);
        }
    }
    Ok(total)
}

/// Polya-Szego check: rearrangement does not increase the Cheeger energy
/// beyond the `avr^{p/N}` factor. Both sides are evaluated as exact
/// piecewise-linear energies so that equality cases sit at machine scale.
pub fn polya_szego_check(
    u: &RadialFunction,
    p: f64,
    space: &SpaceDescriptor,
) -> Result<VerificationReport> {
    let model = SpaceDescriptor::model_cone(space.n_dim())?;
    let rearranged = rearrangement(u, space)?;
    let lhs = segment_energy(u, p, space)?;
    let rhs = space.avr_analytic().powf(p / space.n_dim()) * segment_energy(&rearranged, p, &model)?;
    Ok(VerificationReport::lower_bound(
        "polya-szego",
        lhs,
        rhs,
        1e-8,
        vec![
            ("p".into(), format!("{p}")),
            ("N".into(), format!("{}", space.n_dim())),
            ("avr".into(), format!("{}", space.avr_analytic())),
        ],
        format!("{} grid n={}", space.kind().as_str(), u.len()),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::{entropy, linear_grid, lp_norm, QuadratureSpec};
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};

    fn log_levels(lo: f64, hi: f64, count: usize) -> Vec<f64> {
        (0..count)
            .map(|i| lo * (hi / lo).powf(i as f64 / (count - 1) as f64))
            .collect()
    }

    fn random_test_function(seed: u64, n: usize) -> RadialFunction {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let bumps: Vec<(f64, f64, f64)> = (0..rng.gen_range(2..5))
            .map(|_| {
                (
                    rng.gen_range(0.2..2.0),
                    rng.gen_range(0.0..4.0),
                    rng.gen_range(0.3..1.5),
                )
            })
            .collect();
        let grid = linear_grid(0.0, 8.0, n);
        let values = grid
            .iter()
            .map(|&r| {
                let envelope = (-0.25 * r * r).exp();
                let sum: f64 = bumps
                    .iter()
                    .map(|&(a, c, w)| a * (-(r - c) * (r - c) / (w * w)).exp())
                    .sum();
                sum * envelope
            })
            .collect();
        RadialFunction::new(grid, values).unwrap()
    }

    #[test]
    fn indicator_distribution_and_rearrangement() {
        let space = SpaceDescriptor::model_cone(2.0).unwrap();
        let ind = RadialFunction::new(vec![0.0, 1.5], vec![1.0, 1.0]).unwrap();
        let profile = distribution(&ind, &space, &[0.5]).unwrap();
        assert_relative_eq!(
            profile.superlevel_measures[0],
            space.ball_volume(1.5).unwrap(),
            max_relative = 1e-14
        );

        // on a deficit cone the ball of the same measure shrinks
        let deficit = SpaceDescriptor::angle_deficit(2.0, 0.25).unwrap();
        let hat = rearrangement(&ind, &deficit).unwrap();
        let expected_radius = 0.25f64.powf(0.5) * 1.5;
        assert_relative_eq!(hat.eval(expected_radius * 0.99), 1.0, max_relative = 1e-9);
        assert!(hat.eval(expected_radius * 1.01) < 1e-9);
    }

    #[test]
    fn exponential_superlevel_set() {
        // u = exp(-r), t = exp(-1): {u > t} = [0, 1), measure sigma_2 = pi
        let space = SpaceDescriptor::model_cone(2.0).unwrap();
        let grid = linear_grid(0.0, 12.0, 4097);
        let u = RadialFunction::new(grid.clone(), grid.iter().map(|r| (-r).exp()).collect()).unwrap();
        let profile = distribution(&u, &space, &[(-1.0f64).exp()]).unwrap();
        // tolerance reflects the piecewise-linear model of the exponential
        assert_relative_eq!(
            profile.superlevel_measures[0],
            std::f64::consts::PI,
            max_relative = 1e-5
        );
    }

    #[test]
    fn monotone_profile_inverts_the_function() {
        let space = SpaceDescriptor::angle_deficit(2.5, 0.6).unwrap();
        let grid = linear_grid(0.0, 6.0, 4097);
        let u = RadialFunction::new(grid.clone(), grid.iter().map(|r| (-0.7 * r).exp()).collect())
            .unwrap();
        for &t in &[0.9, 0.5, 0.1, 0.02] {
            let profile = distribution(&u, &space, &[t]).unwrap();
            let r_inv = -(t.ln()) / 0.7;
            // tolerance covers the piecewise-linear model of the exponential
            assert_relative_eq!(
                profile.superlevel_measures[0],
                space.ball_volume(r_inv).unwrap(),
                max_relative = 2e-5
            );
        }
    }

    #[test]
    fn rejects_negative_inputs() {
        let space = SpaceDescriptor::model_cone(2.0).unwrap();
        let u = RadialFunction::new(vec![0.0, 1.0], vec![1.0, -0.2]).unwrap();
        assert!(distribution(&u, &space, &[0.5]).is_err());
        assert!(rearrangement(&u, &space).is_err());
    }

    #[test]
    fn non_increasing_input_is_a_fixed_point() {
        let space = SpaceDescriptor::model_cone(3.0).unwrap();
        let grid = linear_grid(0.0, 7.0, 513);
        let u = RadialFunction::new(grid.clone(), grid.iter().map(|r| (-0.5 * r * r).exp()).collect())
            .unwrap();
        let hat = rearrangement(&u, &space).unwrap();
        for &r in &linear_grid(0.0, 6.9, 200) {
            assert!(
                (hat.eval(r) - u.eval(r)).abs() <= 1e-9,
                "fixed point violated at r = {r}: {} vs {}",
                hat.eval(r),
                u.eval(r)
            );
        }
    }

    #[test]
    fn deficit_cone_rearrangement_is_a_dilation() {
        let alpha: f64 = 0.4;
        let n_dim = 2.0;
        let space = SpaceDescriptor::angle_deficit(n_dim, alpha).unwrap();
        let grid = linear_grid(0.0, 7.0, 513);
        let u = RadialFunction::new(grid.clone(), grid.iter().map(|r| (-r).exp()).collect()).unwrap();
        let hat = rearrangement(&u, &space).unwrap();
        let shrink = alpha.powf(1.0 / n_dim);
        for &y in &linear_grid(0.0, 4.0, 100) {
            let expected = u.eval(y / shrink);
            assert!(
                (hat.eval(y) - expected).abs() <= 1e-8,
                "dilation violated at y = {y}"
            );
        }
    }

    #[test]
    fn equimeasurability_at_sampled_levels() {
        let model = SpaceDescriptor::model_cone(2.5).unwrap();
        for seed in 0..5 {
            for space in [
                SpaceDescriptor::model_cone(2.5).unwrap(),
                SpaceDescriptor::angle_deficit(2.5, 0.35).unwrap(),
            ] {
                let u = random_test_function(seed, 513);
                let hat = rearrangement(&u, &space).unwrap();
                let peak = u.max_value();
                let levels = log_levels(1e-4 * peak, 0.999 * peak, 64);
                let original = distribution(&u, &space, &levels).unwrap();
                let image = distribution(&hat, &model, &levels).unwrap();
                for i in 0..levels.len() {
                    let a = original.superlevel_measures[i];
                    let b = image.superlevel_measures[i];
                    assert!(
                        (a - b).abs() <= 1e-8 * a.abs().max(1.0),
                        "level {}: {a} vs {b}",
                        original.thresholds[i]
                    );
                }
            }
        }
    }

    #[test]
    fn norm_and_entropy_invariance() {
        let model = SpaceDescriptor::model_cone(2.0).unwrap();
        let space = SpaceDescriptor::angle_deficit(2.0, 0.5).unwrap();
        let spec = QuadratureSpec::new(9.0).unwrap();
        for seed in [3u64, 17] {
            let u = random_test_function(seed, 513);
            let hat = rearrangement(&u, &space).unwrap();
            for &p in &[1.5, 2.0] {
                let a = lp_norm(&u, p, &space, &spec).unwrap();
                let b = lp_norm(&hat, p, &model, &spec).unwrap();
                assert_relative_eq!(a, b, max_relative = 1e-8);
            }
            let ea = entropy(&u, 2.0, &space, &spec).unwrap();
            let eb = entropy(&hat, 2.0, &model, &spec).unwrap();
            assert!((ea - eb).abs() <= 1e-7 * ea.abs().max(1.0), "{ea} vs {eb}");
        }
    }

    #[test]
    fn rearrangement_is_order_preserving() {
        let space = SpaceDescriptor::model_cone(2.0).unwrap();
        let grid = linear_grid(0.0, 8.0, 257);
        let base = random_test_function(9, 257);
        let larger = RadialFunction::new(
            grid.clone(),
            grid.iter()
                .zip(base.values())
                .map(|(&r, &v)| v + 0.3 * (-0.5 * r).exp())
                .collect(),
        )
        .unwrap();
        let hat_small = rearrangement(&base, &space).unwrap();
        let hat_large = rearrangement(&larger, &space).unwrap();
        for &y in &linear_grid(0.0, 6.0, 300) {
            assert!(
                hat_small.eval(y) <= hat_large.eval(y) + 1e-9,
                "order violated at y = {y}"
            );
        }
    }

    #[test]
    fn polya_szego_equality_for_monotone_inputs() {
        // non-increasing on the model cone: hat u = u, equality
        let model = SpaceDescriptor::model_cone(2.0).unwrap();
        let grid = linear_grid(0.0, 8.0, 513);
        let u = RadialFunction::new(grid.clone(), grid.iter().map(|r| (-0.8 * r).exp()).collect())
            .unwrap();
        let report = polya_szego_check(&u, 2.0, &model).unwrap();
        assert!(report.passed, "{report:?}");
        assert!(report.deficit.abs() <= 1e-8 * report.lhs.max(1.0));

        // dilation makes both sides equal on the deficit cone as well
        let deficit = SpaceDescriptor::angle_deficit(2.0, 0.5).unwrap();
        let report = polya_szego_check(&u, 2.0, &deficit).unwrap();
        assert!(report.passed, "{report:?}");
        assert!(report.deficit.abs() <= 1e-6 * report.lhs.max(1.0));
    }

    #[test]
    fn polya_szego_on_random_battery() {
        for seed in 20..30 {
            for space in [
                SpaceDescriptor::model_cone(2.0).unwrap(),
                SpaceDescriptor::angle_deficit(2.0, 0.3).unwrap(),
            ] {
                let u = random_test_function(seed, 513);
                let report = polya_szego_check(&u, 2.0, &space).unwrap();
                assert!(
                    report.deficit >= -1e-8 * report.lhs.max(1.0),
                    "seed {seed}: {report:?}"
                );
            }
        }
    }
}
