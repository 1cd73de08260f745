//! The reversely degraded broadcast example: two binary inputs, Bob sees
//! both through erasure channels, Willie sees the second bit noiselessly.
//!
//! All quantities here are in bits. The auxiliary `U = (X1, U2)` reaches the
//! input through `X2 = U2 xor N`, `N ~ Bernoulli(q)`.

use std::fmt::Write as _;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{h2_bits, mutual_information, LogBase};
use crate::prob::{bec, bsc, compose, product, push_forward, Alphabet, Channel, Distribution, WiretapChannel};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RevDegradedScenario {
    pub eps: f64,
    pub q: f64,
    pub p_x1: f64,
    pub p_u2: f64,
}

impl RevDegradedScenario {
    /// Scenario with uniform `X1` and `U2`.
    pub fn new(eps: f64, q: f64) -> Result<Self> {
        let s = Self {
            eps,
            q,
            p_x1: 0.5,
            p_u2: 0.5,
        };
        s.validate()?;
        Ok(s)
    }

    /// Scenario at the erasure probability where `I(U;Y) = I(U;Z)`.
    pub fn critical(q: f64) -> Result<Self> {
        check_q(q)?;
        Self::new(critical_eps(q), q)
    }

    pub fn with_inputs(mut self, p_x1: f64, p_u2: f64) -> Result<Self> {
        self.p_x1 = p_x1;
        self.p_u2 = p_u2;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.5 && self.eps <= 1.0) {
            return Err(Error::OutOfRange {
                name: "eps",
                value: self.eps,
                range: "(1/2, 1]",
            });
        }
        check_q(self.q)?;
        for (name, v) in [("p_x1", self.p_x1), ("p_u2", self.p_u2)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::OutOfRange {
                    name,
                    value: v,
                    range: "[0, 1]",
                });
            }
        }
        Ok(())
    }

    /// `P(X2 = 1)` after the prefix.
    pub fn p_x2(&self) -> f64 {
        self.p_u2 * (1.0 - self.q) + (1.0 - self.p_u2) * self.q
    }
}

fn check_q(q: f64) -> Result<()> {
    if !(0.0..=0.5).contains(&q) {
        return Err(Error::OutOfRange {
            name: "q",
            value: q,
            range: "[0, 1/2]",
        });
    }
    Ok(())
}

/// `1 / (2 - h2(q))`.
pub fn critical_eps(q: f64) -> f64 {
    1.0 / (2.0 - h2_bits(q))
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub wiretap: WiretapChannel,
    /// `P_{X|U}` from `U = (X1, U2)` to `X = (X1, X2)`.
    pub prefix: Channel,
}

pub fn build_scenario(s: &RevDegradedScenario) -> Result<Scenario> {
    s.validate()?;
    let erasure = bec(s.eps)?;
    let legit = product(&erasure, &erasure);
    let eaves = Channel::deterministic(legit.input().clone(), Alphabet::binary(), &[0, 1, 0, 1])?;
    let prefix = product(&Channel::identity(Alphabet::binary()), &bsc(s.q)?);
    Ok(Scenario {
        wiretap: WiretapChannel::new(legit, eaves)?,
        prefix,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub i_xy: f64,
    pub i_xz: f64,
    pub i_uy: f64,
    pub i_uz: f64,
    pub eps_threshold: f64,
    /// `I(X;Y) - I(U;Y)`.
    pub gap: f64,
    pub est_bound: f64,
    pub secret_id: f64,
    pub cor1_lower: f64,
    pub thm1_upper: f64,
}

/// Closed-form evaluation of every quantity of the example.
pub fn analytic_report(s: &RevDegradedScenario) -> ScenarioReport {
    let e = 1.0 - s.eps;
    let (h1, h2, hq) = (h2_bits(s.p_x1), h2_bits(s.p_x2()), h2_bits(s.q));
    let i_xy = e * (h1 + h2);
    let i_xz = h2;
    let i_uy = e * h1 + e * (h2 - hq);
    let i_uz = h2 - hq;
    // The prefix construction is admissible for uniform Q_Z when it is
    // stealthy and secret; otherwise fall back to U = X1 alone.
    let stealthy = (s.p_x2() - 0.5).abs() <= 1e-12;
    let cor1_lower = if stealthy && i_uy >= i_uz { i_uy } else { e * h1 };
    ScenarioReport {
        i_xy,
        i_xz,
        i_uy,
        i_uz,
        eps_threshold: critical_eps(s.q),
        gap: e * hq,
        est_bound: i_uy - i_uz,
        secret_id: 2.0 * e,
        cor1_lower,
        thm1_upper: 2.0 * e,
    }
}

fn bernoulli_pair(p1: f64, p2: f64) -> Result<Distribution> {
    let b = |p: f64| Distribution::new(Alphabet::binary(), vec![1.0 - p, p]);
    Ok(b(p1)?.product(&b(p2)?))
}

/// Largest absolute difference between the closed forms and the same four
/// mutual informations computed from the constructed channels.
pub fn numeric_cross_check(s: &RevDegradedScenario) -> Result<f64> {
    let sc = build_scenario(s)?;
    let p_u = bernoulli_pair(s.p_x1, s.p_u2)?;
    let p_u = Distribution::new(sc.prefix.input().clone(), p_u.mass().to_vec())?;
    let p_x = push_forward(&p_u, &sc.prefix)?;
    let (legit, eaves) = (sc.wiretap.legit(), sc.wiretap.eaves());
    let numeric = [
        mutual_information(&p_x, legit, LogBase::Two)?,
        mutual_information(&p_x, eaves, LogBase::Two)?,
        mutual_information(&p_u, &compose(&sc.prefix, legit)?, LogBase::Two)?,
        mutual_information(&p_u, &compose(&sc.prefix, eaves)?, LogBase::Two)?,
    ];
    let r = analytic_report(s);
    Ok([r.i_xy, r.i_xz, r.i_uy, r.i_uz]
        .iter()
        .zip(&numeric)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

/// One row of the mutual-information sweep. The `I(X;.)` columns take
/// `p_x2 = p_u2` directly; the `I(U;.)` columns pass `p_u2` through the
/// prefix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub p_u2: f64,
    pub i_xy: f64,
    pub i_xz: f64,
    pub i_uy: f64,
    pub i_uz: f64,
}

pub fn fig2_sweep(q: f64, eps: f64, grid_points: usize) -> Result<Vec<SweepRow>> {
    fig2_sweep_at(q, eps, 0.5, grid_points)
}

pub fn fig2_sweep_at(q: f64, eps: f64, p_x1: f64, grid_points: usize) -> Result<Vec<SweepRow>> {
    if grid_points < 2 {
        return Err(Error::OutOfRange {
            name: "grid_points",
            value: grid_points as f64,
            range: "[2, inf)",
        });
    }
    let base = RevDegradedScenario::new(eps, q)?;
    (0..grid_points)
        .map(|i| {
            let p = i as f64 / (grid_points - 1) as f64;
            let via_prefix = analytic_report(&base.with_inputs(p_x1, p)?);
            // With q = 0 the prefix is the identity, so p_x2 = p.
            let direct = analytic_report(&RevDegradedScenario { q: 0.0, ..base }.with_inputs(p_x1, p)?);
            Ok(SweepRow {
                p_u2: p,
                i_xy: direct.i_xy,
                i_xz: direct.i_xz,
                i_uy: via_prefix.i_uy,
                i_uz: via_prefix.i_uz,
            })
        })
        .collect()
}

pub const SWEEP_HEADER: &str = "p_u2,i_xy,i_xz,i_uy,i_uz";

/// Writes the sweep as CSV. Values use the shortest decimal form that
/// round-trips, so files are bit-stable.
pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{SWEEP_HEADER}")?;
    for r in rows {
        writeln!(out, "{},{},{},{},{}", r.p_u2, r.i_xy, r.i_xz, r.i_uy, r.i_uz)?;
    }
    Ok(())
}

/// A minimal SVG with one polyline per curve.
pub fn sweep_svg(rows: &[SweepRow]) -> String {
    const W: f64 = 480.0;
    const H: f64 = 320.0;
    const PAD: f64 = 40.0;
    let top = rows
        .iter()
        .flat_map(|r| [r.i_xy, r.i_xz, r.i_uy, r.i_uz])
        .fold(1e-12, f64::max);
    let sx = |p: f64| PAD + p * (W - 2.0 * PAD);
    let sy = |v: f64| H - PAD - v / top * (H - 2.0 * PAD);
    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n"
    );
    let _ = writeln!(
        svg,
        "<rect x=\"{PAD}\" y=\"{PAD}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#888\"/>",
        W - 2.0 * PAD,
        H - 2.0 * PAD
    );
    type Curve = (&'static str, &'static str, fn(&SweepRow) -> f64);
    let curves: [Curve; 4] = [
        ("I(X;Y)", "#1f77b4", |r| r.i_xy),
        ("I(X;Z)", "#ff7f0e", |r| r.i_xz),
        ("I(U;Y)", "#2ca02c", |r| r.i_uy),
        ("I(U;Z)", "#d62728", |r| r.i_uz),
    ];
    for (i, (label, color, get)) in curves.iter().enumerate() {
        let points: Vec<String> = rows
            .iter()
            .map(|r| format!("{:.3},{:.3}", sx(r.p_u2), sy(get(r))))
            .collect();
        let _ = writeln!(
            svg,
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>",
            points.join(" ")
        );
        let _ = writeln!(
            svg,
            "<text x=\"{}\" y=\"{}\" font-size=\"11\" fill=\"{color}\">{label}</text>",
            W - PAD - 60.0,
            PAD + 14.0 * (i + 1) as f64
        );
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn critical_point_crossing() {
        let s = RevDegradedScenario::critical(0.125).unwrap();
        let r = analytic_report(&s);
        let target = 1.0 - h2_bits(0.125);
        assert_eq!(r.i_xz, 1.0);
        assert!((r.i_uy - target).abs() < 1e-12 && (r.i_uz - target).abs() < 1e-12);
        assert!((r.i_xy - 2.0 * (1.0 - s.eps)).abs() < 1e-15);
        assert!((s.eps - 0.6866).abs() < 1e-4);
    }

    #[test]
    fn gap_equals_i_xy_minus_i_uy() {
        for q in [0.0, 0.125, 0.25, 0.5] {
            for eps in [0.6, 0.6866, 0.9, 1.0] {
                let r = analytic_report(&RevDegradedScenario::new(eps, q).unwrap());
                assert!((r.gap - (r.i_xy - r.i_uy)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn scenario_validation() {
        assert!(RevDegradedScenario::new(0.5, 0.1).is_err());
        assert!(RevDegradedScenario::new(0.7, 0.6).is_err());
        assert!(RevDegradedScenario::new(0.7, 0.1).unwrap().with_inputs(1.1, 0.5).is_err());
    }

    #[test]
    fn construction_edge_cases() {
        let full = build_scenario(&RevDegradedScenario::new(1.0, 0.1).unwrap()).unwrap();
        let ee = full.wiretap.legit().output().index_of("ee").unwrap();
        for x in 0..4 {
            assert_eq!(full.wiretap.legit().get(x, ee), 1.0);
        }
        let clean = build_scenario(&RevDegradedScenario::new(0.7, 0.0).unwrap()).unwrap();
        assert_eq!(clean.prefix, Channel::identity(clean.prefix.input().clone()));
    }

    #[test]
    fn cross_check_agrees() {
        for s in [
            RevDegradedScenario::critical(0.125).unwrap(),
            RevDegradedScenario::new(0.8, 0.0).unwrap(),
            RevDegradedScenario::new(1.0, 0.3).unwrap().with_inputs(0.2, 0.9).unwrap(),
        ] {
            assert!(numeric_cross_check(&s).unwrap() <= 1e-12);
        }
    }

    #[test]
    fn sweep_shape() {
        let eps = critical_eps(0.125);
        let rows = fig2_sweep(0.125, eps, 101).unwrap();
        assert_eq!(rows.len(), 101);
        assert!(rows[0].i_uz.abs() < 1e-15 && rows[100].i_uz.abs() < 1e-12);
        assert!((rows[50].i_uy - rows[50].i_uz).abs() < 1e-9);
        for r in &rows {
            assert!(r.i_uy <= r.i_xy + 1e-12 && r.i_uz <= r.i_xz + 1e-12);
        }
        let flat = fig2_sweep(0.5, 0.75, 11).unwrap();
        assert!(flat.iter().all(|r| r.i_uz == 0.0 && (r.i_uy - 0.25).abs() < 1e-15));
        assert!(fig2_sweep(0.1, 0.7, 1).is_err());

        let mut buf = Vec::new();
        write_sweep_csv(&rows[..2], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("p_u2,i_xy,i_xz,i_uy,i_uz\n0,"));
        assert!(sweep_svg(&rows).contains("<polyline"));
    }
}
