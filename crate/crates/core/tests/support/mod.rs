//! Test-only reference implementations. Everything here works on whole
//! sequences (`Vec<frame>`) straight from the named tensors, independent of
//! the crate's streaming kernels.
#![allow(dead_code)]

use std::f64::consts::PI;

use baenet::dsp::{Complex64, ComplexSpectrogram};
use baenet::spectral::ErbFilterBank;
use baenet::{ModelConfig, ModelWeights, Variant, Waveform};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Seq = Vec<Vec<f64>>;

pub fn noise(len: usize, seed: u64) -> Waveform {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Waveform::new((0..len).map(|_| rng.gen_range(-0.5..0.5)).collect(), 48_000).unwrap()
}

pub fn randn(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

fn sig(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// `y[t][o] = b[o] + sum_lag sum_i w[o][lag][i] * x[t - lag][group(o) * in_g + i]`
pub fn conv_batch(x: &Seq, w: &[f64], b: &[f64], cin: usize, cout: usize, groups: usize, k: usize) -> Seq {
    let (in_g, out_g) = (cin / groups, cout / groups);
    (0..x.len())
        .map(|t| {
            (0..cout)
                .map(|o| {
                    let g = o / out_g;
                    let mut acc = b[o];
                    for lag in 0..k {
                        if lag > t {
                            continue;
                        }
                        for i in 0..in_g {
                            acc += w[(o * k + lag) * in_g + i] * x[t - lag][g * in_g + i];
                        }
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

pub fn gru_batch(x: &Seq, w_ih: &[f64], w_hh: &[f64], bias: &[f64], size: usize, groups: usize) -> Seq {
    let hg = size / groups;
    let mut h = vec![0.0; size];
    let mut out = Vec::with_capacity(x.len());
    for frame in x {
        let mut next = vec![0.0; size];
        for g in 0..groups {
            let wi = |gate: usize, j: usize, i: usize| w_ih[((g * 3 + gate) * hg + j) * hg + i];
            let wh = |gate: usize, j: usize, i: usize| w_hh[((g * 3 + gate) * hg + j) * hg + i];
            let b = |gate: usize, j: usize| bias[(g * 3 + gate) * hg + j];
            let xs = &frame[g * hg..(g + 1) * hg];
            let hs = &h[g * hg..(g + 1) * hg];
            let lin = |gate: usize, j: usize, v: &[f64], m: &dyn Fn(usize, usize, usize) -> f64| {
                (0..hg).map(|i| m(gate, j, i) * v[i]).sum::<f64>()
            };
            let z: Vec<f64> = (0..hg).map(|j| sig(lin(0, j, xs, &wi) + lin(0, j, hs, &wh) + b(0, j))).collect();
            let r: Vec<f64> = (0..hg).map(|j| sig(lin(1, j, xs, &wi) + lin(1, j, hs, &wh) + b(1, j))).collect();
            let rh: Vec<f64> = (0..hg).map(|i| r[i] * hs[i]).collect();
            for j in 0..hg {
                let n = (lin(2, j, xs, &wi) + lin(2, j, &rh, &wh) + b(2, j)).tanh();
                next[g * hg + j] = (1.0 - z[j]) * hs[j] + z[j] * n;
            }
        }
        h = next.clone();
        out.push(next);
    }
    out
}

pub fn linear_batch(x: &Seq, w: &[f64], b: &[f64], cin: usize, cout: usize) -> Seq {
    x.iter()
        .map(|f| (0..cout).map(|o| b[o] + (0..cin).map(|i| w[o * cin + i] * f[i]).sum::<f64>()).collect())
        .collect()
}

fn add(a: &Seq, b: &Seq) -> Seq {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p + q).collect())
        .collect()
}

/// Mirror-and-negate phase extension, written directly from its definition:
/// segment `m` is the negated reversal of segment `m - 1`.
pub fn flip_phase_ref(phase: &[f64], base: usize) -> Vec<f64> {
    let mut out = phase.to_vec();
    let segments = (phase.len() - 1) / base;
    for m in 1..segments {
        let prev: Vec<f64> = out[(m - 1) * base + 1..=m * base].to_vec();
        for (j, v) in prev.iter().rev().enumerate() {
            let mut p = -v;
            if p <= -PI {
                p += 2.0 * PI;
            }
            if p > PI {
                p -= 2.0 * PI;
            }
            out[m * base + 1 + j] = p;
        }
    }
    out
}

pub struct Oracle<'a> {
    cfg: &'a ModelConfig,
    w: &'a ModelWeights,
}

impl<'a> Oracle<'a> {
    pub fn new(cfg: &'a ModelConfig, w: &'a ModelWeights) -> Self {
        Self { cfg, w }
    }

    fn t(&self, name: &str) -> Vec<f64> {
        self.w
            .get(name)
            .unwrap_or_else(|| panic!("missing {name}"))
            .data()
            .iter()
            .map(|&v| f64::from(v))
            .collect()
    }

    fn conv(&self, name: &str, x: &Seq, cin: usize, cout: usize, groups: usize) -> Seq {
        let y = conv_batch(
            x,
            &self.t(&format!("{name}.weight")),
            &self.t(&format!("{name}.bias")),
            cin,
            cout,
            groups,
            self.cfg.kernel_time,
        );
        let a = self.t(&format!("{name}.prelu"));
        y.into_iter()
            .map(|f| f.iter().zip(&a).map(|(&v, &s)| if v < 0.0 { v * s } else { v }).collect())
            .collect()
    }

    fn gru(&self, name: &str, x: &Seq, size: usize, groups: usize) -> Seq {
        gru_batch(
            x,
            &self.t(&format!("{name}.w_ih")),
            &self.t(&format!("{name}.w_hh")),
            &self.t(&format!("{name}.bias")),
            size,
            groups,
        )
    }

    fn inter(&self, name: &str, mi: &Seq, pr: &Seq, c: usize) -> Seq {
        let s = add(mi, pr);
        let m = conv_batch(
            &s,
            &self.t(&format!("{name}.weight")),
            &self.t(&format!("{name}.bias")),
            c,
            c,
            1,
            self.cfg.kernel_time,
        );
        (0..pr.len())
            .map(|t| (0..c).map(|j| pr[t][j] + sig(m[t][j]) * mi[t][j]).collect())
            .collect()
    }

    /// Magnitude stream over the whole utterance: returns the output
    /// magnitudes and the four down-path taps.
    pub fn mi(&self, mag: &Seq) -> (Seq, Vec<Seq>) {
        let c = self.cfg;
        let bank = ErbFilterBank::new(c.erb_bands, c.bins, c.sample_rate).unwrap();
        let e: Seq = mag
            .iter()
            .map(|f| (0..c.erb_bands).map(|b| bank.row(b).iter().zip(f).map(|(w, x)| w * x).sum()).collect())
            .collect();
        let d = &c.mi_down_channels;
        let u = &c.mi_up_channels;
        let g = c.mi_gru_groups;
        let f0 = self.conv("mi.down.0", &e, c.erb_bands, d[0], 1);
        let f1 = self.gru("mi.gru_down", &self.conv("mi.down.1", &f0, d[0], d[1], 1), d[1], g);
        let f2 = self.conv("mi.down.2", &f1, d[1], d[2], 1);
        let f3 = self.conv("mi.down.3", &f2, d[2], d[3], 1);
        let u0 = add(&self.conv("mi.up.0", &f3, d[3], u[0], 1), &f2);
        let u1 = self.gru("mi.gru_up", &add(&self.conv("mi.up.1", &u0, u[0], u[1], 1), &f1), u[1], g);
        let u2 = add(&self.conv("mi.up.2", &u1, u[1], u[2], 1), &f0);
        let up = self.conv("mi.up.3", &u2, u[2], u[3], 1);
        let (a, a0, b, b0) = (
            self.t("mi.bgm.lr_scale"),
            self.t("mi.bgm.lr_bias"),
            self.t("mi.bgm.up_scale"),
            self.t("mi.bgm.up_bias"),
        );
        let out = mag
            .iter()
            .zip(&up)
            .map(|(x, y)| {
                (0..c.bins)
                    .map(|k| {
                        let gain = sig(a[k] * x[k] + a0[k]) * sig(b[k] * y[k] + b0[k]);
                        (x[k] + gain * y[k]).max(0.0)
                    })
                    .collect()
            })
            .collect();
        (out, vec![f0, f1, f2, f3])
    }

    /// Phase stream residual (real, imaginary) over the whole utterance.
    pub fn pr(&self, ri: &Seq, taps: &[Seq]) -> (Seq, Seq) {
        let c = self.cfg;
        let d = &c.pr_down_channels;
        let dg = &c.pr_down_groups;
        let u = &c.pr_up_channels;
        let g = c.pr_gru_groups;
        let p = self.conv("pr.proj", ri, 2 * c.bins, d[0], c.pr_proj_groups);
        let q0 = self.conv("pr.down.0", &p, d[0], d[0], dg[0]);
        let q1 = self.inter("pr.inter.0", &taps[0], &self.conv("pr.down.1", &q0, d[0], d[1], dg[1]), d[1]);
        let q2 = self.inter("pr.inter.1", &taps[1], &self.conv("pr.down.2", &q1, d[1], d[2], dg[2]), d[2]);
        let q2 = self.gru("pr.gru_down", &q2, d[2], g);
        let q3 = self.inter("pr.inter.2", &taps[2], &self.conv("pr.down.3", &q2, d[2], d[3], dg[3]), d[3]);
        let q4 = self.inter("pr.inter.3", &taps[3], &self.conv("pr.down.4", &q3, d[3], d[4], dg[4]), d[4]);
        let v0 = add(&self.conv("pr.up.0", &q4, d[4], u[0], 1), &q2);
        let v1 = self.gru("pr.gru_up", &add(&self.conv("pr.up.1", &v0, u[0], u[1], 1), &q1), u[1], g);
        let v2 = add(&self.conv("pr.up.2", &v1, u[1], u[2], 1), &q0);
        let re = linear_batch(&v2, &self.t("pr.fc_real.weight"), &self.t("pr.fc_real.bias"), u[2], c.bins);
        let im = linear_batch(&v2, &self.t("pr.fc_imag.weight"), &self.t("pr.fc_imag.bias"), u[2], c.bins);
        (re, im)
    }

    pub fn run(&self, spec: &ComplexSpectrogram) -> ComplexSpectrogram {
        let c = self.cfg;
        let frames: Vec<&[Complex64]> = spec.frames().collect();
        let mag: Seq = frames.iter().map(|f| f.iter().map(|z| z.norm()).collect()).collect();
        let (mi, taps) = self.mi(&mag);
        let mut out = Vec::with_capacity(spec.data().len());
        let residual = (c.variant == Variant::Full).then(|| {
            let ri: Seq = frames
                .iter()
                .map(|f| f.iter().map(|z| z.re).chain(f.iter().map(|z| z.im)).collect())
                .collect();
            self.pr(&ri, &taps)
        });
        for (t, f) in frames.iter().enumerate() {
            let phase: Vec<f64> = f.iter().map(|z| z.arg()).collect();
            let flipped = flip_phase_ref(&phase, c.phase_base_bins);
            for k in 0..c.bins {
                let mut z = Complex64::from_polar(mi[t][k], if k <= c.phase_base_bins { phase[k] } else { flipped[k] });
                if let Some((re, im)) = &residual {
                    z += Complex64::new(re[t][k], im[t][k]);
                }
                out.push(z);
            }
        }
        ComplexSpectrogram::from_data(out, spec.fft_size(), spec.hop()).unwrap()
    }
}
