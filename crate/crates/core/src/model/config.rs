use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Magnitude inpainting plus phase refinement.
    Full,
    /// Magnitude inpainting with the mirrored phase only.
    Lite,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Full => "full",
            Variant::Lite => "lite",
        }
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(Variant::Full),
            "lite" => Ok(Variant::Lite),
            other => Err(Error::InvalidArgument(format!("unknown variant `{other}`"))),
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Topology of the two streams.
///
/// The magnitude stream is four down convolutions, four up convolutions with
/// summation skips (`up[0] + down[2]`, `up[1] + down[1]`, `up[2] + down[0]`)
/// and two grouped GRUs, one after `down[1]` and one after the `up[1]` skip.
/// The phase stream mirrors that layout after a grouped input projection of
/// the stacked real/imaginary spectrum, with skips `up[0] + down[2]`,
/// `up[1] + down[1]`, `up[2] + down[0]`, GRUs after `down[2]` and after the
/// `up[1]` skip, and an interaction gate after each of `down[1..=4]` fed by
/// the magnitude stream's `down[0..=3]` features.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModelConfig {
    pub variant: Variant,
    pub sample_rate: u32,
    pub fft_size: usize,
    pub bins: usize,
    pub erb_bands: usize,
    pub phase_base_bins: usize,
    pub kernel_time: usize,
    pub mi_down_channels: Vec<usize>,
    pub mi_up_channels: Vec<usize>,
    pub mi_gru_groups: usize,
    pub pr_proj_groups: usize,
    pub pr_down_channels: Vec<usize>,
    pub pr_down_groups: Vec<usize>,
    pub pr_up_channels: Vec<usize>,
    pub pr_gru_groups: usize,
}

impl ModelConfig {
    pub fn full() -> Self {
        Self {
            variant: Variant::Full,
            sample_rate: crate::SAMPLE_RATE,
            fft_size: crate::FFT_SIZE,
            bins: crate::NUM_BINS,
            erb_bands: 128,
            phase_base_bins: 128,
            kernel_time: 3,
            mi_down_channels: vec![128, 128, 64, 64],
            mi_up_channels: vec![64, 128, 128, 769],
            mi_gru_groups: 4,
            pr_proj_groups: 2,
            pr_down_channels: vec![512, 128, 128, 64, 64],
            pr_down_groups: vec![2, 2, 2, 1, 1],
            pr_up_channels: vec![128, 128, 512],
            pr_gru_groups: 4,
        }
    }

    pub fn lite() -> Self {
        Self::full().with_variant(Variant::Lite)
    }

    pub fn for_variant(variant: Variant) -> Self {
        Self::full().with_variant(variant)
    }

    pub fn with_variant(mut self, variant: Variant) -> Self {
        self.variant = variant;
        self
    }

    pub fn hop(&self) -> usize {
        self.fft_size / 2
    }

    /// STFT frames per second.
    pub fn frame_rate(&self) -> f64 {
        self.sample_rate as f64 / self.hop() as f64
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.sample_rate == 0 || self.fft_size < 4 || !self.fft_size.is_multiple_of(2) {
            return bad(format!("fft size {} must be even and >= 4", self.fft_size));
        }
        if self.bins != self.fft_size / 2 + 1 {
            return bad(format!("bins {} != fft_size/2 + 1", self.bins));
        }
        if self.erb_bands < 2 || self.erb_bands >= self.bins {
            return bad(format!("erb bands {} must be in 2..bins", self.erb_bands));
        }
        if self.phase_base_bins == 0 || !(self.bins - 1).is_multiple_of(self.phase_base_bins) {
            return bad(format!("phase base {} must divide bins - 1", self.phase_base_bins));
        }
        if self.kernel_time == 0 {
            return bad("kernel_time must be >= 1".into());
        }
        let (d, u) = (&self.mi_down_channels, &self.mi_up_channels);
        if d.len() != 4 || u.len() != 4 || d.iter().chain(u).any(|&c| c == 0) {
            return bad("magnitude stream needs 4 non-zero down and 4 up channel counts".into());
        }
        if u[0] != d[2] || u[1] != d[1] || u[2] != d[0] {
            return bad(format!("magnitude skips need up {u:?} to mirror down {d:?}"));
        }
        if u[3] != self.bins {
            return bad(format!("last up layer must produce {} bins", self.bins));
        }
        if self.mi_gru_groups == 0 || d[1] % self.mi_gru_groups != 0 {
            return bad(format!("gru width {} not divisible by {} groups", d[1], self.mi_gru_groups));
        }
        if self.variant == Variant::Full {
            self.validate_phase_stream()?;
        }
        Ok(())
    }

    fn validate_phase_stream(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        let (d, g, u) = (&self.pr_down_channels, &self.pr_down_groups, &self.pr_up_channels);
        if d.len() != 5 || g.len() != 5 || u.len() != 3 || d.iter().chain(u).any(|&c| c == 0) {
            return bad("phase stream needs 5 down channels, 5 down groups, 3 up channels".into());
        }
        if u[0] != d[2] || u[1] != d[1] || u[2] != d[0] {
            return bad(format!("phase skips need up {u:?} to mirror down {d:?}"));
        }
        for i in 0..4 {
            if d[i + 1] != self.mi_down_channels[i] {
                return bad(format!(
                    "interaction {i}: phase down[{}] = {} != magnitude down[{i}] = {}",
                    i + 1,
                    d[i + 1],
                    self.mi_down_channels[i]
                ));
            }
        }
        let pg = self.pr_proj_groups;
        if pg == 0 || !(2 * self.bins).is_multiple_of(pg) || d[0] % pg != 0 {
            return bad(format!("projection groups {pg} must divide {} and {}", 2 * self.bins, d[0]));
        }
        let mut prev = d[0];
        for (i, (&c, &gr)) in d.iter().zip(g).enumerate() {
            if gr == 0 || prev % gr != 0 || c % gr != 0 {
                return bad(format!("phase down[{i}] {prev}->{c} not divisible into {gr} groups"));
            }
            prev = c;
        }
        if self.pr_gru_groups == 0 || d[2] % self.pr_gru_groups != 0 {
            return bad(format!("phase gru width {} not divisible by {}", d[2], self.pr_gru_groups));
        }
        Ok(())
    }

    /// Every learned layer of the configured variant, in weight-file order.
    pub fn layers(&self) -> Vec<LayerSpec> {
        let k = self.kernel_time;
        let conv = |name: String, cin, cout, groups| LayerSpec::Conv {
            name,
            in_channels: cin,
            out_channels: cout,
            groups,
            kernel: k,
        };
        let mut layers = Vec::new();
        let d = &self.mi_down_channels;
        let u = &self.mi_up_channels;
        let mut prev = self.erb_bands;
        for (i, &c) in d.iter().enumerate() {
            layers.push(conv(format!("mi.down.{i}"), prev, c, 1));
            prev = c;
        }
        layers.push(LayerSpec::Gru {
            name: "mi.gru_down".into(),
            groups: self.mi_gru_groups,
            size: d[1],
        });
        for (i, &c) in u.iter().enumerate() {
            layers.push(conv(format!("mi.up.{i}"), prev, c, 1));
            prev = c;
        }
        layers.push(LayerSpec::Gru {
            name: "mi.gru_up".into(),
            groups: self.mi_gru_groups,
            size: u[1],
        });
        layers.push(LayerSpec::BandGate {
            name: "mi.bgm".into(),
            bins: self.bins,
        });
        if self.variant == Variant::Lite {
            return layers;
        }

        let d = &self.pr_down_channels;
        let u = &self.pr_up_channels;
        layers.push(conv("pr.proj".into(), 2 * self.bins, d[0], self.pr_proj_groups));
        let mut prev = d[0];
        for (i, (&c, &g)) in d.iter().zip(&self.pr_down_groups).enumerate() {
            layers.push(conv(format!("pr.down.{i}"), prev, c, g));
            prev = c;
        }
        for i in 0..4 {
            layers.push(LayerSpec::Gate {
                name: format!("pr.inter.{i}"),
                channels: d[i + 1],
                kernel: k,
            });
        }
        layers.push(LayerSpec::Gru {
            name: "pr.gru_down".into(),
            groups: self.pr_gru_groups,
            size: d[2],
        });
        for (i, &c) in u.iter().enumerate() {
            layers.push(conv(format!("pr.up.{i}"), prev, c, 1));
            prev = c;
        }
        layers.push(LayerSpec::Gru {
            name: "pr.gru_up".into(),
            groups: self.pr_gru_groups,
            size: u[1],
        });
        for head in ["pr.fc_real", "pr.fc_imag"] {
            layers.push(LayerSpec::Linear {
                name: head.into(),
                in_features: u[2],
                out_features: self.bins,
            });
        }
        layers
    }

    /// Name and shape of every tensor a weight file must hold.
    pub fn tensor_specs(&self) -> Vec<TensorSpec> {
        self.layers().iter().flat_map(LayerSpec::tensors).collect()
    }
}

/// One learned layer and its shape parameters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LayerSpec {
    /// Causal grouped convolution followed by a per-channel PReLU.
    Conv {
        name: String,
        in_channels: usize,
        out_channels: usize,
        groups: usize,
        kernel: usize,
    },
    /// Dimension-preserving grouped GRU.
    Gru { name: String, groups: usize, size: usize },
    /// Sigmoid mask convolution of an interaction gate (`channels -> channels`).
    Gate {
        name: String,
        channels: usize,
        kernel: usize,
    },
    Linear {
        name: String,
        in_features: usize,
        out_features: usize,
    },
    /// Per-bin affine gates on the two paths of the band-guided mask.
    BandGate { name: String, bins: usize },
}

impl LayerSpec {
    pub fn name(&self) -> &str {
        match self {
            LayerSpec::Conv { name, .. }
            | LayerSpec::Gru { name, .. }
            | LayerSpec::Gate { name, .. }
            | LayerSpec::Linear { name, .. }
            | LayerSpec::BandGate { name, .. } => name,
        }
    }

    pub fn tensors(&self) -> Vec<TensorSpec> {
        let t = |suffix: &str, dims: Vec<usize>| TensorSpec {
            name: format!("{}.{suffix}", self.name()),
            dims,
        };
        match *self {
            LayerSpec::Conv {
                in_channels,
                out_channels,
                groups,
                kernel,
                ..
            } => vec![
                t("weight", vec![out_channels, kernel, in_channels / groups]),
                t("bias", vec![out_channels]),
                t("prelu", vec![out_channels]),
            ],
            LayerSpec::Gru { groups, size, .. } => {
                let h = size / groups;
                vec![
                    t("w_ih", vec![groups, 3 * h, h]),
                    t("w_hh", vec![groups, 3 * h, h]),
                    t("bias", vec![groups, 3 * h]),
                ]
            }
            LayerSpec::Gate { channels, kernel, .. } => vec![
                t("weight", vec![channels, kernel, channels]),
                t("bias", vec![channels]),
            ],
            LayerSpec::Linear {
                in_features,
                out_features,
                ..
            } => vec![
                t("weight", vec![out_features, in_features]),
                t("bias", vec![out_features]),
            ],
            LayerSpec::BandGate { bins, .. } => vec![
                t("lr_scale", vec![bins]),
                t("lr_bias", vec![bins]),
                t("up_scale", vec![bins]),
                t("up_bias", vec![bins]),
            ],
        }
    }

    /// Multiply-accumulates per frame.
    pub fn macs(&self) -> usize {
        match *self {
            LayerSpec::Conv {
                in_channels,
                out_channels,
                groups,
                kernel,
                ..
            } => out_channels * (in_channels / groups) * kernel,
            LayerSpec::Gru { groups, size, .. } => {
                let h = size / groups;
                groups * 3 * (h * h + h * h)
            }
            LayerSpec::Gate { channels, kernel, .. } => channels * channels * kernel,
            LayerSpec::Linear {
                in_features,
                out_features,
                ..
            } => in_features * out_features,
            LayerSpec::BandGate { bins, .. } => 2 * bins,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TensorSpec {
    pub name: String,
    pub dims: Vec<usize>,
}

impl TensorSpec {
    pub fn numel(&self) -> usize {
        self.dims.iter().product()
    }
}
