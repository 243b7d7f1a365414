//! Growth-rate estimation from truncated orbit counts.
//!
//! Two asymptotic regimes matter here.  Hyperbolic models have orbit counts
//! growing like `e^{hT}/T`, and the exponential rate recovers topological
//! entropy.  Degenerate models such as flat tori grow polynomially, and the
//! meaningful number is the log-log slope.  Both fits are computed for every
//! sample set; the residual ratio between them decides which regime the data
//! is in.
//!
//! Counts are arbitrary-precision integers: trace-formula counts overflow
//! `u64` well inside the truncation ranges used by the checks, and the fits
//! only ever need logarithms, which are extracted from the bit length
//! without rounding the count first.

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::models::{self, Model, ToralSuspension};
use crate::census::CensusTable;

/// The infinite-growth call: exponential beats polynomial when the
/// polynomial residual is at least this factor larger.
pub const RESIDUAL_RATIO: f64 = 10.0;

/// Relative tolerance for the record-by-record scaling comparison.
pub const SCALING_REL_TOL: f64 = 1e-9;

/// One truncation sample: the count of orbit-iterate pairs up to time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthSample {
    pub t: f64,
    pub count: BigUint,
}

/// A straight-line least-squares fit with its uncertainty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope; infinite when the window has only two
    /// points and the residual is therefore zero by construction.
    pub stderr: f64,
    /// Root-mean-square residual of the fit window.
    pub rms: f64,
}

/// Both growth fits over one sample set.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthEstimate {
    samples: Vec<GrowthSample>,
    /// Fit of `log count` against `T`: the exponential rate.
    pub exp_rate: LineFit,
    /// Fit of `log count` against `log T`: the polynomial degree.
    pub loglog_slope: LineFit,
    /// Exponential fit residual beats the polynomial one by
    /// [`RESIDUAL_RATIO`]: the count grows faster than any polynomial.
    pub infinite_growth: bool,
}

impl GrowthEstimate {
    pub fn samples(&self) -> &[GrowthSample] {
        &self.samples
    }
}

/// Natural log of a big integer, safe far beyond `f64` range.
///
/// Splits off the bit length and takes the logarithm of a 53-bit mantissa,
/// so the result is exact to roughly one ulp regardless of magnitude.
pub fn ln_big(x: &BigUint) -> Result<f64> {
    if x.is_zero() {
        return Err(Error::Validation("log of a zero count".into()));
    }
    let bits = x.bits();
    if bits <= 53 {
        return Ok(x.to_f64().expect("small count fits f64").ln());
    }
    let shift = bits - 53;
    let mantissa = (x >> shift).to_f64().expect("53-bit mantissa fits f64");
    Ok(mantissa.ln() + shift as f64 * std::f64::consts::LN_2)
}

fn line_fit(xs: &[f64], ys: &[f64]) -> LineFit {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    let rms = (ss_res / n).sqrt();
    let stderr = if xs.len() > 2 {
        (ss_res / (n - 2.0) / sxx).sqrt()
    } else {
        f64::INFINITY
    };
    LineFit {
        slope,
        intercept,
        stderr,
        rms,
    }
}

/// Validate samples and run both fits over the upper half of the grid.
///
/// The upper half suppresses the `log C / T` transient in the Bowen limit;
/// small truncations see the prefactor, not the rate.
pub fn fit_growth(samples: Vec<GrowthSample>) -> Result<GrowthEstimate> {
    if samples.len() < 4 {
        return Err(Error::BadArgument(format!(
            "growth fits need at least 4 samples, got {}",
            samples.len()
        )));
    }
    for w in samples.windows(2) {
        if !(w[1].t > w[0].t) {
            return Err(Error::Validation(format!(
                "sample times must be strictly increasing, got {} then {}",
                w[0].t, w[1].t
            )));
        }
        if w[1].count < w[0].count {
            return Err(Error::Validation(format!(
                "counts must be non-decreasing, got {} then {} at T = {}",
                w[0].count, w[1].count, w[1].t
            )));
        }
    }
    if samples.last().expect("nonempty").count.is_zero() {
        return Err(Error::Validation(
            "all counts are zero; nothing to fit".into(),
        ));
    }
    let window = &samples[samples.len() / 2..];
    let mut ts = Vec::with_capacity(window.len());
    let mut logs = Vec::with_capacity(window.len());
    for s in window {
        if !(s.t > 0.0) {
            return Err(Error::Validation(format!(
                "fit window needs positive times, got {}",
                s.t
            )));
        }
        if s.count.is_zero() {
            return Err(Error::Validation(format!(
                "count at T = {} is zero inside the fit window; start the \
                 grid later",
                s.t
            )));
        }
        ts.push(s.t);
        logs.push(ln_big(&s.count)?);
    }
    let exp_rate = line_fit(&ts, &logs);
    let log_ts: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
    let loglog_slope = line_fit(&log_ts, &logs);
    let infinite_growth = loglog_slope.rms > RESIDUAL_RATIO * exp_rate.rms;
    Ok(GrowthEstimate {
        samples,
        exp_rate,
        loglog_slope,
        infinite_growth,
    })
}

fn sample_counts(
    count: impl Fn(f64) -> Result<BigUint>,
    grid: &[f64],
) -> Result<Vec<GrowthSample>> {
    grid.iter()
        .map(|&t| {
            Ok(GrowthSample {
                t,
                count: count(t)?,
            })
        })
        .collect()
}

/// Exponential growth rate of a count function over a truncation grid.
///
/// For hyperbolic flows this is the entropy estimator: the fitted rate of
/// `log P_T` against `T` converges to the topological entropy.
pub fn entropy_estimate(
    count: impl Fn(f64) -> Result<BigUint>,
    grid: &[f64],
) -> Result<GrowthEstimate> {
    fit_growth(sample_counts(count, grid)?)
}

/// Polynomial growth exponent of a count function, with the infinite flag.
///
/// The same double fit as [`entropy_estimate`]; the headline number is the
/// log-log slope, and `infinite_growth` is set when no polynomial explains
/// the data.
pub fn gamma_estimate(
    count: impl Fn(f64) -> Result<BigUint>,
    grid: &[f64],
) -> Result<GrowthEstimate> {
    fit_growth(sample_counts(count, grid)?)
}

/// Check the length-scaling identity on a census: scaling the model by `c`
/// and the truncation by `c` reproduces the same records with periods
/// multiplied by `c`.
pub fn scaling_identity_check(table: &CensusTable, c: f64) -> Result<bool> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::BadArgument(format!(
            "scaling constant must be positive, got {c}"
        )));
    }
    let model = models::build(table.model())?;
    let scaled_spec = model.scaled_spec(c)?;
    let scaled = models::build(&scaled_spec)?.census(c * table.truncation())?;
    let ours = table.records();
    let theirs = scaled.records();
    if ours.len() != theirs.len() {
        return Ok(false);
    }
    // Scaling preserves the census sort order, so the multiset comparison
    // reduces to a positional one.
    for (a, b) in ours.iter().zip(theirs) {
        let same = a.simple_id == b.simple_id
            && a.iterate == b.iterate
            && a.class_label == b.class_label
            && a.cz_parity == b.cz_parity
            && a.cz_index == b.cz_index
            && a.good == b.good
            && a.orbit_type == b.orbit_type
            && a.holonomy_sign == b.holonomy_sign
            && (b.period - c * a.period).abs() <= SCALING_REL_TOL * (c * a.period).max(1.0);
        if !same {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Entropy of the base automorphism: `log` of its dominant eigenvalue.
pub fn base_entropy(suspension: &ToralSuspension) -> f64 {
    let tr = suspension.trace().abs() as f64;
    ((tr + (tr * tr - 4.0).sqrt()) / 2.0).ln()
}

/// The two defects of the entropy squeeze for a suspension with roof `r`:
/// `(g - h/max r, h/min r - g)` where `g` is the fitted growth rate of the
/// orbit count and `h` the base entropy.  Both are nonnegative up to fit
/// error when the squeeze holds.
pub fn entropy_squeeze_check(
    suspension: &ToralSuspension,
    grid: &[f64],
) -> Result<(f64, f64)> {
    let samples = suspension.growth_samples(grid)?;
    let estimate = fit_growth(
        samples
            .into_iter()
            .map(|(t, p, _)| GrowthSample { t, count: p })
            .collect(),
    )?;
    let g = estimate.exp_rate.slope;
    let h = base_entropy(suspension);
    let roof = suspension.roof();
    Ok((g - h / roof.max(), h / roof.min() - g))
}

/// Entropy squeeze through the [`Model`] interface; only suspensions carry
/// a roof to squeeze against.
pub fn model_squeeze_check(model: &Model, grid: &[f64]) -> Result<(f64, f64)> {
    match model {
        Model::Suspension(s) => entropy_squeeze_check(s, grid),
        _ => Err(Error::Validation(
            "the entropy squeeze compares a roof function to a base entropy; \
             only suspension models have one"
                .into(),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::Roof;
    use num_bigint::BigUint;

    fn cat() -> ToralSuspension {
        ToralSuspension::new([[2, 1], [1, 1]], Roof::constant(1.0).unwrap()).unwrap()
    }

    fn grid(a: u32, b: u32) -> Vec<f64> {
        (a..=b).map(f64::from).collect()
    }

    #[test]
    fn ln_big_matches_shifted_powers() {
        let two_pow_200 = BigUint::from(1u8) << 200;
        assert!((ln_big(&two_pow_200).unwrap() - 200.0 * std::f64::consts::LN_2).abs() < 1e-9);
        let ten_pow_40 = BigUint::from(10u8).pow(40);
        assert!((ln_big(&ten_pow_40).unwrap() - 40.0 * 10f64.ln()).abs() < 1e-9);
        assert!((ln_big(&BigUint::from(7u8)).unwrap() - 7f64.ln()).abs() < 1e-15);
        assert!(ln_big(&BigUint::zero()).is_err());
    }

    #[test]
    fn cat_entropy_matches_the_eigenvalue() {
        let s = cat();
        let est = entropy_estimate(|t| Ok(s.pair_counts(t)?.0), &grid(5, 30)).unwrap();
        let h = ((3.0 + 5.0_f64.sqrt()) / 2.0).ln();
        assert!(
            (est.exp_rate.slope - h).abs() < 0.05,
            "rate {} vs {}",
            est.exp_rate.slope,
            h
        );
        assert!(est.infinite_growth);
        assert!(est.exp_rate.rms < est.loglog_slope.rms / RESIDUAL_RATIO);
    }

    #[test]
    fn flat_torus_growth_is_polynomial_of_the_right_degree() {
        // The residual exponential slope of a degree-d polynomial over a
        // window around T = 155 is about d/155, hence the per-degree caps.
        for (n, degree, rate_cap) in [(2usize, 2.0, 0.02), (3, 3.0, 0.03)] {
            let model = models::build(&crate::models::ModelSpec::FlatTorus { n }).unwrap();
            let g: Vec<f64> = (10..=200).step_by(10).map(|t| t as f64).collect();
            let est = gamma_estimate(|t| model.pair_count(t), &g).unwrap();
            assert!(
                (est.loglog_slope.slope - degree).abs() < 0.3,
                "n = {n}: slope {}",
                est.loglog_slope.slope
            );
            assert!(!est.infinite_growth, "n = {n}");
            assert!(est.exp_rate.slope.abs() < rate_cap, "n = {n}");
        }
    }

    #[test]
    fn constant_counts_fit_rate_zero() {
        let est = entropy_estimate(|_| Ok(BigUint::from(1u8)), &grid(1, 10)).unwrap();
        assert_eq!(est.exp_rate.slope, 0.0);
        assert!(!est.infinite_growth);
    }

    #[test]
    fn zero_counts_are_rejected() {
        let err = entropy_estimate(|_| Ok(BigUint::zero()), &grid(1, 10)).unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
    }

    #[test]
    fn decreasing_counts_are_rejected() {
        let err = fit_growth(vec![
            GrowthSample {
                t: 1.0,
                count: BigUint::from(5u8),
            },
            GrowthSample {
                t: 2.0,
                count: BigUint::from(3u8),
            },
            GrowthSample {
                t: 3.0,
                count: BigUint::from(3u8),
            },
            GrowthSample {
                t: 4.0,
                count: BigUint::from(3u8),
            },
        ])
        .unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
    }

    #[test]
    fn unsorted_grids_are_rejected() {
        let err = entropy_estimate(|_| Ok(BigUint::from(2u8)), &[1.0, 3.0, 2.0, 4.0]).unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
    }

    #[test]
    fn roof_scaling_divides_the_rate_exactly() {
        let base = entropy_estimate(|t| Ok(cat().pair_counts(t)?.0), &grid(5, 20)).unwrap();
        let doubled =
            ToralSuspension::new([[2, 1], [1, 1]], Roof::constant(2.0).unwrap()).unwrap();
        let scaled_grid: Vec<f64> = grid(5, 20).iter().map(|t| 2.0 * t).collect();
        let scaled =
            entropy_estimate(|t| Ok(doubled.pair_counts(t)?.0), &scaled_grid).unwrap();
        // Same counts at scaled times: the rate halves exactly.
        assert!((scaled.exp_rate.slope - base.exp_rate.slope / 2.0).abs() < 1e-9);
    }

    #[test]
    fn scaling_identity_holds_for_suspensions_and_ellipsoids() {
        let table = cat().census(3.0).unwrap();
        assert!(scaling_identity_check(&table, 1.0).unwrap());
        assert!(scaling_identity_check(&table, 2.0).unwrap());

        let e = crate::models::EllipsoidModel::new(1.0, 2f64.sqrt()).unwrap();
        let et = e.census(5.0).unwrap();
        assert!(scaling_identity_check(&et, 3.0).unwrap());
    }

    #[test]
    fn scaling_identity_detects_mismatched_truncations() {
        // A census truncated at T compared against the scaled model at
        // cT' with T' > T picks up extra records.
        let base = cat().census(3.0).unwrap();
        let tampered = CensusTable::new(
            base.model().clone(),
            2.5,
            base.grading(),
            base.records().to_vec(),
        )
        .unwrap();
        assert!(!scaling_identity_check(&tampered, 2.0).unwrap());
    }

    #[test]
    fn squeeze_is_tight_for_constant_roofs() {
        for c in [1.0, 2.0] {
            let s = ToralSuspension::new([[2, 1], [1, 1]], Roof::constant(c).unwrap()).unwrap();
            let g: Vec<f64> = (5..=30).map(|t| c * t as f64).collect();
            let (lo, hi) = entropy_squeeze_check(&s, &g).unwrap();
            // Constant roof: min = max, so the two defects are negatives of
            // each other and both small.
            assert!(lo.abs() < 0.05, "c = {c}: lo {lo}");
            assert!(hi.abs() < 0.05, "c = {c}: hi {hi}");
            assert!((lo + hi).abs() < 1e-12);
        }
    }

    #[test]
    fn squeeze_brackets_a_trigonometric_roof() {
        let roof = Roof::from_spec(crate::models::RoofSpec::Trig {
            base: 1.0,
            terms: vec![crate::models::TrigTerm {
                kx: 1,
                ky: 0,
                cos: 0.3,
                sin: 0.0,
            }],
        })
        .unwrap();
        let s = ToralSuspension::new([[2, 1], [1, 1]], roof).unwrap();
        // Times chosen so the enumeration never needs map periods past
        // 9.8 / 0.7 = 14.
        let g: Vec<f64> = (3..=14).map(|k| 0.7 * f64::from(k)).collect();
        let (lo, hi) = entropy_squeeze_check(&s, &g).unwrap();
        assert!(lo >= -0.1, "lower defect {lo}");
        assert!(hi >= -0.1, "upper defect {hi}");
    }

    #[test]
    fn squeeze_needs_a_suspension() {
        let model = models::build(&crate::models::ModelSpec::FlatTorus { n: 2 }).unwrap();
        assert!(model_squeeze_check(&model, &grid(1, 10)).is_err());
    }
}
