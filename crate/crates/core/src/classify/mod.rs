//! Qualitative labels for concurrence trajectories: no generation (NONE),
//! sudden death (SD), death for an instant (DI) and always alive (AL), plus
//! parameter thresholds between labels.
//!
//! Zero regions seen on the sample grid, and sampled minima that could dip
//! to zero between grid points, are refined against the underlying dynamics
//! through a callback. Verdicts hold on the simulated window only.

mod table1;

pub use table1::{table1_harness, CellReport, CellStatus, Expected, Instance, InstanceReport, Instances, Table1Report};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{Evolution, ModelConfig};
use crate::entanglement::{concurrence, concurrence_margin};
use crate::error::{Error, Result};
use crate::states::{assemble_initial, AtomicLabel, FieldSpec};

/// Fewest samples accepted by [`classify_series`].
pub const MIN_SAMPLES: usize = 500;

/// A minimum at sample value `v` is refined when `v <= MINIMUM_SLACK * d + tau`,
/// with `d` the larger step to its neighbours.
const MINIMUM_SLACK: f64 = 4.0;

/// Location tolerance of the golden-section search for minima.
const MINIMUM_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Label {
    None,
    Sd,
    Di,
    Al,
}

impl Label {
    pub fn name(self) -> &'static str {
        match self {
            Self::None => "NONE",
            Self::Sd => "SD",
            Self::Di => "DI",
            Self::Al => "AL",
        }
    }
}

impl std::fmt::Display for Label {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// A zero region whose endpoints were located on the dynamics.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Refinement {
    pub start: f64,
    pub end: f64,
    /// Smallest value found inside the region.
    pub minimum: f64,
    /// Where `minimum` was found.
    pub at: f64,
}

impl Refinement {
    pub fn width(&self) -> f64 {
        self.end - self.start
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntanglementSeries {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub refinements: Vec<Refinement>,
}

impl EntanglementSeries {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::DimensionMismatch { expected: times.len(), found: values.len() });
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument("series times must be strictly increasing".into()));
        }
        if values.iter().any(|v| !(v.is_finite() && (0.0..=1.0).contains(v))) {
            return Err(Error::InvalidArgument("series values must lie in [0, 1]".into()));
        }
        Ok(Self { times, values, refinements: Vec::new() })
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.times.clone(), self.values.iter().map(|v| v * c).collect())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntanglementClass {
    pub label: Label,
    /// Zero regions of width at least `dead_width` after the first life.
    pub dead_intervals: Vec<(f64, f64)>,
    /// Zero regions narrower than `dead_width` after the first life, by
    /// the location of their minimum.
    pub touch_points: Vec<f64>,
    /// First time the concurrence reaches `tau_zero`.
    pub first_life: Option<f64>,
    /// Whether entanglement is present again after the last dead interval.
    pub revives: bool,
    /// Window `[t0, t_max]` the verdict applies to.
    pub window: (f64, f64),
    /// Set when no refinement callback was available.
    pub low_confidence: bool,
}

/// Value at `t` of the quantity behind the series (or a signed version of
/// it that is below `tau_zero` exactly where the series is).
pub type Refiner<'a> = &'a (dyn Fn(f64) -> Result<f64> + Sync);

/// Boundary of the set `{value < tau}` between `live` (value >= tau) and
/// `dead` (value < tau), to within `tol`.
fn bisect_edge(f: Refiner, mut live: f64, mut dead: f64, tau: f64, tol: f64) -> Result<f64> {
    while (live - dead).abs() > tol {
        let mid = 0.5 * (live + dead);
        if f(mid)? < tau {
            dead = mid;
        } else {
            live = mid;
        }
    }
    Ok(0.5 * (live + dead))
}

/// Golden-section search for the minimum of `f` on `[a, b]`.
fn golden_minimum(f: Refiner, mut a: f64, mut b: f64) -> Result<(f64, f64)> {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let (mut f1, mut f2) = (f(x1)?, f(x2)?);
    while b - a > MINIMUM_TOL {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = f(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = f(x2)?;
        }
    }
    Ok(if f1 <= f2 { (x1, f1) } else { (x2, f2) })
}

/// Labels `series`. With `refine`, zero regions are located on the dynamics
/// to `dead_width / 10` and sampled minima that might reach zero between
/// samples are searched; without it the verdict is coarse and flagged
/// low-confidence.
pub fn classify_series(
    series: &mut EntanglementSeries,
    tau_zero: f64,
    dead_width: f64,
    refine: Option<Refiner>,
) -> Result<EntanglementClass> {
    let n = series.times.len();
    if n < MIN_SAMPLES {
        return Err(Error::InvalidArgument(format!("need at least {MIN_SAMPLES} samples, got {n}")));
    }
    if !(tau_zero > 0.0 && dead_width > 0.0) {
        return Err(Error::InvalidArgument("tau_zero and dead_width must be positive".into()));
    }
    let (t, v) = (&series.times, &series.values);
    let window = (t[0], t[n - 1]);
    let low_confidence = refine.is_none();
    let tol = dead_width / 10.0;
    let dead = |x: f64| x < tau_zero;

    let mut regions: Vec<Refinement> = Vec::new();
    // runs of sub-threshold samples
    let mut i = 0;
    while i < n {
        if !dead(v[i]) {
            i += 1;
            continue;
        }
        let start_idx = i;
        while i < n && dead(v[i]) {
            i += 1;
        }
        let end_idx = i - 1;
        let (at, minimum) = (start_idx..=end_idx)
            .map(|k| (t[k], v[k]))
            .fold((t[start_idx], f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
        let (start, end) = match refine {
            Some(f) => {
                let start = if start_idx == 0 { t[0] } else { bisect_edge(f, t[start_idx - 1], t[start_idx], tau_zero, tol)? };
                let end = if end_idx == n - 1 { t[n - 1] } else { bisect_edge(f, t[end_idx + 1], t[end_idx], tau_zero, tol)? };
                (start, end)
            }
            None => (
                if start_idx == 0 { t[0] } else { 0.5 * (t[start_idx - 1] + t[start_idx]) },
                if end_idx == n - 1 { t[n - 1] } else { 0.5 * (t[end_idx] + t[end_idx + 1]) },
            ),
        };
        regions.push(Refinement { start, end, minimum, at });
    }
    // sampled minima above the threshold that may still touch zero
    if let Some(f) = refine {
        let candidates: Vec<usize> = (1..n - 1)
            .filter(|&i| {
                !dead(v[i])
                    && v[i] <= v[i - 1]
                    && v[i] <= v[i + 1]
                    && v[i] <= MINIMUM_SLACK * (v[i - 1] - v[i]).max(v[i + 1] - v[i]) + tau_zero
            })
            .collect();
        let found: Vec<Option<Refinement>> = candidates
            .par_iter()
            .map(|&i| -> Result<Option<Refinement>> {
                let (tm, fm) = golden_minimum(f, t[i - 1], t[i + 1])?;
                if !dead(fm) {
                    return Ok(None);
                }
                let start = bisect_edge(f, t[i - 1], tm, tau_zero, tol)?;
                let end = bisect_edge(f, t[i + 1], tm, tau_zero, tol)?;
                Ok(Some(Refinement { start, end, minimum: fm, at: tm }))
            })
            .collect::<Result<_>>()?;
        regions.extend(found.into_iter().flatten());
    }
    regions.sort_by(|a, b| a.start.total_cmp(&b.start));
    // merge overlaps
    let mut merged: Vec<Refinement> = Vec::new();
    for r in regions {
        match merged.last_mut() {
            Some(last) if r.start <= last.end => {
                last.end = last.end.max(r.end);
                if r.minimum < last.minimum {
                    last.minimum = r.minimum;
                    last.at = r.at;
                }
            }
            _ => merged.push(r),
        }
    }
    series.refinements = merged.clone();

    let first_life = v.iter().position(|&x| !dead(x)).map(|k| {
        // the first live sample, or the end of the initial zero region
        merged.first().filter(|r| r.start <= t[0] && r.end <= t[k]).map_or(t[k], |r| r.end)
    });
    let Some(life) = first_life else {
        return Ok(EntanglementClass {
            label: Label::None,
            dead_intervals: Vec::new(),
            touch_points: Vec::new(),
            first_life: None,
            revives: false,
            window,
            low_confidence,
        });
    };
    let after: Vec<&Refinement> = merged.iter().filter(|r| r.start > life || (r.start > t[0] && r.end > life)).collect();
    let dead_intervals: Vec<(f64, f64)> =
        after.iter().filter(|r| r.width() >= dead_width).map(|r| (r.start, r.end)).collect();
    let touch_points: Vec<f64> =
        after.iter().filter(|r| r.width() < dead_width).map(|r| r.at).collect();
    let label = if !dead_intervals.is_empty() {
        Label::Sd
    } else if !touch_points.is_empty() {
        Label::Di
    } else {
        Label::Al
    };
    let revives = dead_intervals.last().is_some_and(|&(_, end)| end < window.1);
    Ok(EntanglementClass { label, dead_intervals, touch_points, first_life: Some(life), revives, window, low_confidence })
}

/// Atomic initial state, field and model of one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub atoms: AtomicLabel,
    pub field: FieldSpec,
    pub model: ModelConfig,
}

impl Scenario {
    pub fn new(atoms: AtomicLabel, field: FieldSpec, model: ModelConfig) -> Self {
        Self { atoms, field, model }
    }

    pub fn prepare(&self) -> Result<Evolution> {
        let initial = assemble_initial(self.atoms, &self.field, &self.model)?;
        Evolution::new(&initial, &self.model)
    }

    /// Concurrence on the model's grid, evaluated in parallel.
    pub fn series(&self, evolution: &Evolution) -> Result<EntanglementSeries> {
        let times = self.model.grid.times();
        let values = times
            .par_iter()
            .map(|&t| concurrence(&evolution.atoms_at(t)?))
            .collect::<Result<Vec<_>>>()?;
        EntanglementSeries::new(times, values)
    }

    /// Series and refined classification with the model's tolerances.
    pub fn classify(&self) -> Result<(EntanglementSeries, EntanglementClass)> {
        let evolution = self.prepare()?;
        let mut series = self.series(&evolution)?;
        let refine = |t: f64| concurrence_margin(&evolution.atoms_at(t)?);
        let tol = self.model.tolerances;
        let class = classify_series(&mut series, tol.zero, tol.dead_width, Some(&refine))?;
        Ok((series, class))
    }
}

/// Value of the parameter at which the label switches between `from` and
/// `to`, bisected to `width`. The range is first sampled at `samples`
/// points (at least 8); the sampled labels must change exactly once, from
/// `from` to `to` or back.
pub fn find_threshold(
    family: &(dyn Fn(f64) -> Result<Label> + Sync),
    range: (f64, f64),
    samples: usize,
    boundary: (Label, Label),
    width: f64,
) -> Result<f64> {
    let (lo, hi) = range;
    if !(lo < hi) || samples < 8 || !(width > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "threshold search needs lo < hi, >= 8 samples and width > 0, got {range:?}, {samples}, {width}"
        )));
    }
    let params: Vec<f64> = (0..samples).map(|k| lo + (hi - lo) * k as f64 / (samples - 1) as f64).collect();
    let labels = params.par_iter().map(|&p| family(p)).collect::<Result<Vec<_>>>()?;
    let listing = || {
        params
            .iter()
            .zip(&labels)
            .map(|(p, l)| format!("{p}:{l}"))
            .collect::<Vec<_>>()
            .join(", ")
    };
    let changes: Vec<usize> = (1..samples).filter(|&k| labels[k] != labels[k - 1]).collect();
    let (a, b) = boundary;
    let ends = (labels[0], labels[samples - 1]);
    if changes.len() != 1 || !(ends == (a, b) || ends == (b, a)) {
        return Err(Error::AmbiguousThreshold(listing()));
    }
    let k = changes[0];
    let left_label = labels[k - 1];
    let (mut left, mut right) = (params[k - 1], params[k]);
    while right - left > width {
        let mid = 0.5 * (left + right);
        let label = family(mid)?;
        if label == left_label {
            left = mid;
        } else if label == labels[k] {
            right = mid;
        } else {
            return Err(Error::AmbiguousThreshold(format!("{} and {mid}:{label}", listing())));
        }
    }
    Ok(0.5 * (left + right))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::Scheme;

    fn grid(t_max: f64, n: usize) -> Vec<f64> {
        (0..n).map(|k| t_max * k as f64 / (n - 1) as f64).collect()
    }

    fn series_of(f: &(dyn Fn(f64) -> f64 + Sync), t_max: f64, n: usize) -> EntanglementSeries {
        let times = grid(t_max, n);
        let values = times.iter().map(|&t| f(t).clamp(0.0, 1.0)).collect();
        EntanglementSeries::new(times, values).unwrap()
    }

    fn classify_fn(f: &(dyn Fn(f64) -> f64 + Sync), n: usize) -> EntanglementClass {
        let mut s = series_of(f, 25.0, n);
        let refine = |t: f64| Ok(f(t));
        classify_series(&mut s, 1e-9, 0.01, Some(&refine)).unwrap()
    }

    #[test]
    fn constant_zero_is_none() {
        let c = classify_fn(&|_| 0.0, 1001);
        assert_eq!(c.label, Label::None);
        assert!(c.first_life.is_none());
    }

    #[test]
    fn positive_series_is_al() {
        let c = classify_fn(&|t| 0.5 + 0.3 * t.cos(), 1001);
        assert_eq!(c.label, Label::Al);
        assert_eq!(c.first_life, Some(0.0));
    }

    #[test]
    fn quadratic_touches_between_samples_are_di() {
        // cos^2 touches zero at odd multiples of pi/2, never on the grid
        let c = classify_fn(&|t: f64| (1.1 * t).cos().powi(2), 2001);
        assert_eq!(c.label, Label::Di, "{c:?}");
        let expected = ((25.0 * 1.1 / std::f64::consts::PI) + 0.5).floor() as usize;
        assert_eq!(c.touch_points.len(), expected);
        for p in &c.touch_points {
            let phase = 1.1 * p / std::f64::consts::PI - 0.5;
            assert!((phase - phase.round()).abs() < 1e-6, "{p}");
        }
    }

    #[test]
    fn linear_touches_are_di() {
        let c = classify_fn(&|t: f64| (0.7 * t + 0.1).sin().abs(), 2001);
        assert_eq!(c.label, Label::Di);
    }

    #[test]
    fn dead_intervals_are_sd_and_located() {
        // negative between the roots of cos(t) = -0.9
        let f = |t: f64| t.cos() + 0.9;
        let c = classify_fn(&f, 2001);
        assert_eq!(c.label, Label::Sd);
        let first = c.dead_intervals[0];
        let root = (-0.9f64).acos();
        assert!((first.0 - root).abs() < 1e-3 && (first.1 - (2.0 * std::f64::consts::PI - root)).abs() < 1e-3);
        assert!(c.revives);
        for w in c.dead_intervals.windows(2) {
            assert!(w[0].1 < w[1].0);
        }
    }

    #[test]
    fn dead_interval_between_samples_is_found() {
        // dead for a width of about 0.011 around t = 10, narrower than the grid step
        let f = |t: f64| 1e-4 * ((t - 10.0).powi(2) - 0.0055f64.powi(2)) * 1e4 + 0.0;
        let c = classify_fn(&f, 1001);
        assert_eq!(c.label, Label::Sd, "{c:?}");
        assert!((c.dead_intervals[0].1 - c.dead_intervals[0].0 - 0.011).abs() < 1e-3);
    }

    #[test]
    fn narrow_dead_region_is_a_touch_point() {
        let f = |t: f64| (t - 10.0).powi(2) - 0.002f64.powi(2);
        let c = classify_fn(&f, 1001);
        assert_eq!(c.label, Label::Di, "{c:?}");
    }

    #[test]
    fn initial_zero_region_is_not_death() {
        // generated after a delay, then alive
        let f = |t: f64| if t < 3.0 { 0.0 } else { 0.2 * (1.0 - (-(t - 3.0)).exp()) + 1e-3 };
        let c = classify_fn(&f, 1001);
        assert_eq!(c.label, Label::Al, "{c:?}");
        assert!((c.first_life.unwrap() - 3.0).abs() < 1e-3);
    }

    #[test]
    fn unrefined_verdicts_are_flagged() {
        let mut s = series_of(&|t: f64| t.cos() + 0.9, 25.0, 1001);
        let c = classify_series(&mut s, 1e-9, 0.01, None).unwrap();
        assert_eq!(c.label, Label::Sd);
        assert!(c.low_confidence);
    }

    #[test]
    fn short_series_are_rejected() {
        let mut s = series_of(&|_| 0.5, 25.0, 100);
        assert!(classify_series(&mut s, 1e-9, 0.01, None).is_err());
        assert!(EntanglementSeries::new(vec![0.0, 0.0], vec![0.1, 0.1]).is_err());
        assert!(EntanglementSeries::new(vec![0.0, 1.0], vec![0.1, 1.5]).is_err());
    }

    #[test]
    fn scaling_preserves_labels() {
        for f in [
            &(|t: f64| (1.1 * t).cos().powi(2)) as &(dyn Fn(f64) -> f64 + Sync),
            &|t: f64| (t.cos() + 0.9).max(0.0) / 1.9,
            &|t: f64| 0.5 + 0.3 * t.cos(),
        ] {
            let base = classify_fn(f, 2001).label;
            for c in [1.0, 0.5, 1e-3] {
                let g = |t: f64| c * f(t);
                assert_eq!(classify_fn(&g, 2001).label, base, "c={c}");
            }
        }
    }

    #[test]
    fn thresholds_are_bisected() {
        let family = |p: f64| -> Result<Label> { Ok(if p < 0.4321 { Label::Al } else { Label::Sd }) };
        let x = find_threshold(&family, (0.0, 1.0), 9, (Label::Al, Label::Sd), 1e-3).unwrap();
        assert!((x - 0.4321).abs() < 1e-3);
        let flat = |_: f64| -> Result<Label> { Ok(Label::Al) };
        assert!(matches!(
            find_threshold(&flat, (0.0, 1.0), 9, (Label::Al, Label::Sd), 1e-3),
            Err(Error::AmbiguousThreshold(_))
        ));
        let twice = |p: f64| -> Result<Label> { Ok(if (0.3..0.6).contains(&p) { Label::Sd } else { Label::Al }) };
        assert!(find_threshold(&twice, (0.0, 1.0), 9, (Label::Al, Label::Sd), 1e-3).is_err());
    }

    #[test]
    fn vacuum_role_reversal() {
        let run = |scheme, atoms| {
            let model = ModelConfig::new(scheme);
            Scenario::new(atoms, FieldSpec::Vacuum, model).classify().unwrap()
        };
        assert_eq!(run(Scheme::Tmsc, AtomicLabel::Phi).1.label, Label::Al);
        assert_eq!(run(Scheme::Tmsc, AtomicLabel::Psi).1.label, Label::Di);
        assert_eq!(run(Scheme::Tmac, AtomicLabel::Psi).1.label, Label::Di);
    }

    #[test]
    fn tmac_phi_vacuum_is_cos4() {
        // independent decay in the mapped cavities gives C = cos^4(sqrt2 g t),
        // which vanishes only at isolated instants
        let model = ModelConfig::new(Scheme::Tmac);
        let (series, class) = Scenario::new(AtomicLabel::Phi, FieldSpec::Vacuum, model).classify().unwrap();
        for (t, c) in series.times.iter().zip(&series.values) {
            assert!((c - (2f64.sqrt() * t).cos().powi(4)).abs() < 1e-9, "t={t}");
        }
        assert_eq!(class.label, Label::Di);
        assert!(class.dead_intervals.is_empty());
    }
}
