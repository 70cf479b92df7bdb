//! Independent oracles and synthetic fixtures shared by the integration
//! tests and the acceptance suite.
#![allow(dead_code)]

use lvef_core::dataset::MaskSequence;
use lvef_core::ensemble::FeatureVector;
use lvef_core::geometry::extract_features;
use lvef_core::Mask;

/// SplitMix64 written out from its published recurrence.
pub struct RefRng(u64);

impl RefRng {
    const GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

    fn finalize(mut z: u64) -> u64 {
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    pub fn new(seed: u64) -> Self {
        Self(seed)
    }

    pub fn substream(seed: u64, i: u64) -> Self {
        Self(Self::finalize(seed ^ Self::finalize(i.wrapping_add(1))))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(Self::GAMMA);
        Self::finalize(self.0)
    }

    pub fn below(&mut self, n: usize) -> usize {
        ((self.next_u64() as u128 * n as u128) >> 64) as usize
    }

    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn gauss(&mut self) -> f64 {
        let u1 = self.unit().max(1e-300);
        let u2 = self.unit();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }
}

/// Peak indices by brute force: plateau-aware local maxima, prominence by
/// scanning the whole series for the nearest strictly higher sample on each
/// side, threshold `fraction * range`, then greedy selection by height.
pub fn peaks_oracle(x: &[f64], min_distance: usize, fraction: f64) -> Vec<usize> {
    let n = x.len();
    if n < 3 {
        return vec![];
    }
    let mut maxima = vec![];
    for i in 1..n - 1 {
        if x[i - 1] >= x[i] {
            continue;
        }
        // first differing sample to the right must be lower
        match (i + 1..n).find(|&j| x[j] != x[i]) {
            Some(j) if x[j] < x[i] => maxima.push(i),
            _ => {}
        }
    }
    let lo = x.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let threshold = fraction * (hi - lo);
    let prom = |p: usize| {
        let h = x[p];
        let left_stop = (0..p).rev().find(|&j| x[j] > h).map_or(0, |j| j + 1);
        let right_stop = (p + 1..n).find(|&j| x[j] > h).unwrap_or(n);
        let lmin = x[left_stop..=p].iter().cloned().fold(f64::INFINITY, f64::min);
        let rmin = x[p..right_stop].iter().cloned().fold(f64::INFINITY, f64::min);
        h - lmin.max(rmin)
    };
    let mut cand: Vec<usize> = maxima.into_iter().filter(|&p| prom(p) >= threshold).collect();
    let mut chosen: Vec<usize> = vec![];
    while !cand.is_empty() {
        let mut best = 0;
        for k in 1..cand.len() {
            if x[cand[k]] > x[cand[best]] {
                best = k;
            }
        }
        let p = cand.remove(best);
        if chosen.iter().all(|&c: &usize| c.abs_diff(p) >= min_distance) {
            chosen.push(p);
        }
    }
    chosen.sort();
    chosen
}

/// Pairwise AUC: P(score_pos > score_neg) + 0.5 P(equal).
pub fn mann_whitney_auc(scores: &[f64], labels: &[bool]) -> f64 {
    let (mut credit, mut pairs) = (0.0, 0.0);
    for (i, &si) in scores.iter().enumerate() {
        for (j, &sj) in scores.iter().enumerate() {
            if labels[i] && !labels[j] {
                pairs += 1.0;
                if si > sj {
                    credit += 1.0;
                } else if si == sj {
                    credit += 0.5;
                }
            }
        }
    }
    credit / pairs
}

#[allow(clippy::too_many_arguments)]
fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
        return left + right + (left + right - whole) / 15.0;
    }
    simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
        + simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson(f, a, b, fa, fm, fb, whole, 1e-15, 50)
}

/// Two-sided Student t tail by quadrature. With `x = √ν tan θ` the density
/// integral becomes `∫ cos^(ν−1) θ dθ`, so no gamma functions are needed.
pub fn t_two_sided_quadrature(t: f64, df: f64) -> f64 {
    let g = |th: f64| th.cos().powf(df - 1.0);
    let total = integrate(&g, 0.0, std::f64::consts::FRAC_PI_2);
    let inner = integrate(&g, 0.0, (t.abs() / df.sqrt()).atan());
    (1.0 - inner / total).max(0.0)
}

/// Axis-aligned filled ellipse sampled at pixel centres.
pub fn ellipse_mask(w: usize, h: usize, cx: f64, cy: f64, semi_x: f64, semi_y: f64) -> Mask {
    Mask::from_fn(w, h, |x, y| {
        let dx = (x as f64 + 0.5 - cx) / semi_x;
        let dy = (y as f64 + 0.5 - cy) / semi_y;
        dx * dx + dy * dy <= 1.0
    })
}

fn smoothstep(u: f64) -> f64 {
    let u = u.clamp(0.0, 1.0);
    u * u * (3.0 - 2.0 * u)
}

/// Contraction level in `[0, 1]` (0 = end-diastole, 1 = end-systole) of a
/// beat with dwell plateaus: `dwell` frames at ED, a `fall`-frame
/// contraction, `dwell` frames at ES, then relaxation for the rest of the
/// period.
pub fn contraction(phase: f64, period: f64, dwell: f64, fall: f64) -> f64 {
    let p = phase.rem_euclid(period);
    let rise = period - 2.0 * dwell - fall;
    if p < dwell {
        0.0
    } else if p < dwell + fall {
        smoothstep((p - dwell) / fall)
    } else if p < 2.0 * dwell + fall {
        1.0
    } else {
        1.0 - smoothstep((p - 2.0 * dwell - fall) / rise)
    }
}

/// Semi-axes (long, short) at end-systole that give `ef` under the
/// area-length law, shortening the long axis by `long_ratio`.
pub fn es_axes(long_ed: f64, short_ed: f64, ef: f64, long_ratio: f64) -> (f64, f64) {
    // V ∝ A²/L ∝ long · short²
    let short = short_ed * ((1.0 - ef / 100.0) / long_ratio).sqrt();
    (long_ed * long_ratio, short)
}

/// Analytic area-length EF of an ellipse pair with length = 2·long.
pub fn analytic_ef(long_ed: f64, short_ed: f64, long_es: f64, short_es: f64) -> f64 {
    100.0 * (1.0 - (long_es * short_es * short_es) / (long_ed * short_ed * short_ed))
}

pub struct EllipseVideo {
    pub masks: MaskSequence,
    pub ef: f64,
}

/// A vertical ellipse pulsating through `beats` cycles at target `ef`.
/// `scale` multiplies the canvas and both axes.
pub fn pulsating_ellipse(id: &str, ef: f64, beats: usize, scale: usize) -> EllipseVideo {
    let s = scale as f64;
    let (long_ed, short_ed) = (50.0 * s, 22.0 * s);
    let (long_es, short_es) = es_axes(long_ed, short_ed, ef, 0.9);
    let (w, h) = (64 * scale, 128 * scale);
    let (period, dwell, fall) = (40.0, 5.0, 12.0);
    let lead = 10.0;
    let n = (lead + period * beats as f64 + 8.0) as usize;
    let frames = (0..n)
        .map(|t| {
            // start mid-relaxation so the first ED is an interior peak
            let c = contraction(t as f64 - lead, period, dwell, fall);
            let long = long_ed + (long_es - long_ed) * c;
            let short = short_ed + (short_es - short_ed) * c;
            ellipse_mask(w, h, w as f64 / 2.0, h as f64 / 2.0, short, long)
        })
        .collect();
    EllipseVideo {
        masks: MaskSequence::new(id, frames).unwrap(),
        ef: analytic_ef(long_ed, short_ed, long_es, short_es),
    }
}

/// Ellipse features paired with their true long-axis length `2·long`,
/// covering the shapes [`pulsating_ellipse`] produces at `scale`.
pub fn ellipse_length_data(n: usize, scale: usize, seed: u64) -> (Vec<FeatureVector>, Vec<f64>) {
    let s = scale as f64;
    let mut rng = RefRng::new(seed);
    let (w, h) = (64 * scale, 128 * scale);
    let mut feats = vec![];
    let mut lengths = vec![];
    for i in 0..n {
        let long = s * (42.0 + 10.0 * rng.unit());
        let short = s * (9.0 + 14.0 * rng.unit());
        let m = ellipse_mask(w, h, w as f64 / 2.0, h as f64 / 2.0, short, long);
        let f = extract_features(&m, i);
        feats.push(FeatureVector::new(f.area, f.width, f.height));
        lengths.push(2.0 * long);
    }
    (feats, lengths)
}
