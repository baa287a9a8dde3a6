//! Statistical validation of the fading generator against closed-form
//! Rayleigh/Clarke results. Oracles are computed here independently of the
//! library.

mod common;

use std::f64::consts::PI;

use common::{bessel_j0, ks_distance, rayleigh_cdf, J0_FIRST_ZERO};
use uavnav::channel::{create_fading, ChannelParams, FadingProcess};

const DT: f64 = 1e-3;

fn process(v: f64, seed: u64) -> FadingProcess {
    create_fading(v, &ChannelParams::default(), seed).unwrap()
}

#[test]
fn bessel_oracle_reference_values() {
    assert!((bessel_j0(0.0) - 1.0).abs() < 1e-12);
    assert!((bessel_j0(1.0) - 0.765_197_686_557_966_6).abs() < 1e-10);
    assert!(bessel_j0(J0_FIRST_ZERO).abs() < 1e-10);
}

fn envelope_trace(p: &FadingProcess, n: usize) -> Vec<f64> {
    p.power_gains(0.0, DT).take(n).map(f64::sqrt).collect()
}

#[test]
fn envelope_is_rayleigh_with_unit_power() {
    let p = process(5.0, 2024);
    let mut env = envelope_trace(&p, 1_000_000);
    let mean_sq = env.iter().map(|r| r * r).sum::<f64>() / env.len() as f64;
    assert!((mean_sq - 1.0).abs() < 0.01, "mean |h|^2 = {mean_sq}");

    let ks = ks_distance(&mut env, rayleigh_cdf);
    assert!(ks < 0.01, "KS distance {ks}");
}

/// Normalized autocorrelation of the real part of h(t) from one long
/// realization, at lags 0..=max_lag samples.
fn autocorrelation(p: &FadingProcess, n: usize, max_lag: usize) -> Vec<f64> {
    let re: Vec<f64> = (0..n + max_lag).map(|k| p.envelope(k as f64 * DT).0).collect();
    let power = re[..n].iter().map(|a| a * a).sum::<f64>();
    (0..=max_lag)
        .map(|lag| (0..n).map(|k| re[k] * re[k + lag]).sum::<f64>() / power)
        .collect()
}

#[test]
fn autocorrelation_follows_bessel_j0() {
    for v in [2.0, 5.0, 10.0] {
        let p = process(v, 7);
        let f_d = p.doppler_hz();
        // Lags up to the first zero of J0(2 pi f_d tau).
        let max_lag = (J0_FIRST_ZERO / (2.0 * PI * f_d) / DT).floor() as usize;
        assert!(max_lag >= 4, "too few lags at v={v}");
        let r = autocorrelation(&p, 200_000, max_lag);
        let mse = r
            .iter()
            .enumerate()
            .map(|(lag, &got)| (got - bessel_j0(2.0 * PI * f_d * lag as f64 * DT)).powi(2))
            .sum::<f64>()
            / r.len() as f64;
        let rmse = mse.sqrt();
        assert!(rmse < 0.05, "v={v}: RMSE {rmse}");
    }
}

#[test]
fn deep_fades_are_common() {
    let n = (60.0 / DT) as usize;
    let with_fade = (0..100u64)
        .filter(|&seed| {
            let p = process(10.0, seed);
            let min_gain = p.power_gains(0.0, DT).take(n).fold(f64::INFINITY, f64::min);
            10.0 * min_gain.log10() <= -30.0
        })
        .count();
    assert!(with_fade >= 95, "{with_fade}/100 traces reach -30 dB");
}

/// Downward crossings of `threshold` (relative to RMS) per second.
fn level_crossing_rate(p: &FadingProcess, seconds: f64, threshold: f64) -> f64 {
    let n = (seconds / DT) as usize;
    let level = threshold * threshold;
    let mut crossings = 0usize;
    let mut above = true;
    for g in p.power_gains(0.0, DT).take(n) {
        let now_above = g >= level;
        if above && !now_above {
            crossings += 1;
        }
        above = now_above;
    }
    crossings as f64 / seconds
}

#[test]
fn level_crossing_rate_grows_with_speed() {
    // Clarke: N_R = sqrt(2 pi) f_d rho exp(-rho^2) with rho relative to RMS;
    // the Rayleigh median sits at rho = sqrt(ln 2).
    let rho = 2f64.ln().sqrt();
    let mut last = 0.0;
    for v in [2.0, 5.0, 10.0] {
        let p = process(v, 99);
        let got = level_crossing_rate(&p, 200.0, rho);
        let theory = (2.0 * PI).sqrt() * p.doppler_hz() * rho * (-rho * rho).exp();
        assert!(got > last, "v={v}: {got} not above {last}");
        assert!((got / theory - 1.0).abs() < 0.1, "v={v}: {got} vs {theory}");
        last = got;
    }
}
