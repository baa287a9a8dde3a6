//! Oracles shared by the integration tests, computed independently of the
//! library.
#![allow(dead_code)]

use std::f64::consts::PI;

/// Rayleigh CDF with scale 1/sqrt(2): 1 - exp(-r^2).
pub fn rayleigh_cdf(r: f64) -> f64 {
    1.0 - (-r * r).exp()
}

/// J0 by composite Simpson on (1/pi) * int_0^pi cos(x sin t) dt.
pub fn bessel_j0(x: f64) -> f64 {
    let n = 2000;
    let h = PI / n as f64;
    let f = |t: f64| (x * t.sin()).cos();
    let mut acc = f(0.0) + f(PI);
    for i in 1..n {
        acc += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * h / 3.0 / PI
}

pub const J0_FIRST_ZERO: f64 = 2.404_825_557_695_773;

/// Two-sided KS distance of `samples` against `cdf`. Sorts in place.
pub fn ks_distance(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max((i as f64 + 1.0) / n - f)
        })
        .fold(0.0, f64::max)
}

/// Path loss by hand: 128.1 + 37.6 log10(d / 1 km).
pub fn path_loss_oracle(d_m: f64) -> f64 {
    128.1 + 37.6 * (d_m / 1000.0).log10()
}

/// Empty `w x h` map text (cell 0.5 m) with the given marker cells,
/// `(col, row)` counted from the bottom-left.
pub fn open_map(w: usize, h: usize, start: (usize, usize), source: (usize, usize)) -> String {
    let mut rows = vec![vec!['.'; w]; h];
    rows[h - 1 - start.1][start.0] = 'U';
    rows[h - 1 - source.1][source.0] = 'S';
    let mut text = format!("{w} {h} 0.5\n");
    for r in rows {
        text.extend(r);
        text.push('\n');
    }
    text
}
