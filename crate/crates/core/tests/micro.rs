//! Two-symbol instances checked against receivers unrolled by hand.

use polarcm::constellation::build_pam;
use polarcm::demod::Kernel;
use polarcm::schemes::{receive, CompoundMetric, SchemeConfig, SchemeKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Length-2 SC with `c0 = u0 ^ u1`, `c1 = u1`: returns `(u, c)`.
fn sc2(l: [f64; 2]) -> ([u8; 2], [u8; 2]) {
    let f = 2.0 * ((l[0] / 2.0).tanh() * (l[1] / 2.0).tanh()).atanh();
    let u0 = u8::from(f < 0.0);
    let g = l[1] + if u0 == 0 { l[0] } else { -l[0] };
    let u1 = u8::from(g < 0.0);
    ([u0, u1], [u0 ^ u1, u1])
}

fn ln_sum(terms: impl Iterator<Item = f64>) -> f64 {
    terms.map(f64::exp).sum::<f64>().ln()
}

/// Stage-by-stage hand receiver: `llr(t, j, prefix)` is the channel LLR of
/// level `j` of symbol `t` given the decided bits of levels `< j`.
fn unrolled(m: usize, llr: impl Fn(usize, usize, &[u8]) -> f64) -> Vec<u8> {
    let mut decided = vec![Vec::new(); 2];
    let mut data = Vec::new();
    for j in 0..m {
        let l = [llr(0, j, &decided[0]), llr(1, j, &decided[1])];
        let (u, c) = sc2(l);
        data.extend(u);
        decided[0].push(c[0]);
        decided[1].push(c[1]);
    }
    data
}

fn bit(b: u32, t: usize) -> u8 {
    ((b >> t) & 1) as u8
}

#[test]
fn mlpcm_on_4pam() {
    let cfg = SchemeConfig::new(SchemeKind::Mlpcm, 2, 2)
        .unwrap()
        .with_info_sets(&[vec![0, 1], vec![0, 1]])
        .unwrap();
    let c = build_pam(2, cfg.constellation().kind()).unwrap();
    let sigma = 0.8;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..500 {
        let y = [rng.random_range(-4.0..4.0), rng.random_range(-4.0..4.0)];
        // W(y|label) up to a constant, written out for the four labels
        let w = |t: usize, b: u32| -(y[t] - c.point_of_label(b)).powi(2) / (2.0 * sigma * sigma);
        let got = receive(&cfg, &y, sigma).unwrap().data;
        let want = unrolled(2, |t, j, prefix| {
            if j == 0 {
                ln_sum([w(t, 0b00), w(t, 0b10)].into_iter()) - ln_sum([w(t, 0b01), w(t, 0b11)].into_iter())
            } else {
                let b0 = u32::from(prefix[0]);
                w(t, b0) - w(t, b0 | 0b10)
            }
        });
        assert_eq!(got, want, "y = {y:?}");
    }
}

fn compound_oracle(metric: CompoundMetric) {
    let k3 = Kernel::bidiagonal(3).unwrap();
    let cfg = SchemeConfig::new(SchemeKind::CompoundBicm(k3.clone()), 3, 2)
        .unwrap()
        .with_compound_metric(metric)
        .with_info_sets(&[vec![0, 1], vec![0, 1], vec![0, 1]])
        .unwrap();
    let c = build_pam(3, cfg.constellation().kind()).unwrap();
    let sigma = 0.9;
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..500 {
        let y = [rng.random_range(-9.0..9.0), rng.random_range(-9.0..9.0)];
        let w = |t: usize, b: u32| -(y[t] - c.point_of_label(b)).powi(2) / (2.0 * sigma * sigma);
        // log-metric of a label under the chosen demodulator
        let metric_of = |t: usize, b: u32| -> f64 {
            match metric {
                CompoundMetric::SymbolExact => w(t, b),
                CompoundMetric::BitwisePbp => (0..3)
                    .map(|level| {
                        let side = |v: u8| ln_sum((0..8u32).filter(|&x| bit(x, level) == v).map(|x| w(t, x)));
                        let lambda = side(0) - side(1);
                        if bit(b, level) == 0 {
                            lambda / 2.0
                        } else {
                            -lambda / 2.0
                        }
                    })
                    .sum(),
            }
        };
        let got = receive(&cfg, &y, sigma).unwrap().data;
        let want = unrolled(3, |t, j, prefix| {
            // sum over kernel inputs v consistent with the prefix, label b = vK
            let side = |vj: u8| {
                ln_sum(
                    (0..8u32)
                        .filter(|&v| bit(v, j) == vj && prefix.iter().enumerate().all(|(i, &p)| bit(v, i) == p))
                        .map(|v| {
                            let b = (bit(v, 0) ^ bit(v, 1)) as u32
                                | (((bit(v, 1) ^ bit(v, 2)) as u32) << 1)
                                | ((bit(v, 2) as u32) << 2);
                            assert_eq!(b, k3.apply(v));
                            metric_of(t, b)
                        }),
                )
            };
            side(0) - side(1)
        });
        assert_eq!(got, want, "y = {y:?}");
    }
}

#[test]
fn compound_k3_on_8pam_bitwise() {
    compound_oracle(CompoundMetric::BitwisePbp);
}

#[test]
fn compound_k3_on_8pam_exact() {
    compound_oracle(CompoundMetric::SymbolExact);
}
