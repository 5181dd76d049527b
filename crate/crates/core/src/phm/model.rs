use std::sync::atomic::{AtomicU64, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{pad, PaddedSequence, Vocabulary, PAD_INDEX};
use crate::embeddings::EmbeddingTable;
use crate::error::{Error, Result};
use crate::neuralnet::ops::{check_rate, conv1d_backward_into, conv1d_into, maxpool_into};
use crate::neuralnet::{bce_grad_logit, bce_loss, dropout_mask, sigmoid, Checkpoint, Manifest, Param, ParamSpec, Tensor, CHECKPOINT_VERSION};
use crate::scalar::{dot, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Architecture {
    Phmd,
    FeatAug,
}

/// How the dropout tuple maps onto the text kernels: one parallel branch
/// per kernel width, or a single branch of stacked conv/pool layers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DropoutLayout {
    Positional,
    Stacked,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub max_len: usize,
    pub filters: usize,
    pub kernels: Vec<usize>,
    pub pool: usize,
    /// One rate per text kernel, in kernel order.
    pub dropout: Vec<f64>,
    pub layout: DropoutLayout,
    pub feature_kernel: usize,
    pub feature_dropout: f64,
    /// Append the raw literal score to the figurative feature vector.
    pub include_raw_score: bool,
    pub train_embeddings: bool,
    /// Conv and dense parameters start uniform on `[-init_range, init_range]`.
    pub init_range: f64,
}

impl ModelConfig {
    pub fn phmd() -> Self {
        ModelConfig {
            max_len: 50,
            filters: 100,
            kernels: vec![3, 4, 5],
            pool: 2,
            dropout: vec![0.2, 0.3, 0.5],
            layout: DropoutLayout::Positional,
            feature_kernel: 2,
            feature_dropout: 0.0,
            include_raw_score: true,
            train_embeddings: true,
            init_range: 0.05,
        }
    }

    pub fn feataug() -> Self {
        ModelConfig {
            dropout: vec![0.3, 0.1, 0.3],
            ..Self::phmd()
        }
    }

    pub fn for_architecture(arch: Architecture) -> Self {
        match arch {
            Architecture::Phmd => Self::phmd(),
            Architecture::FeatAug => Self::feataug(),
        }
    }

    pub fn feature_len(&self) -> usize {
        crate::figurative::verdict_feature_len(self.include_raw_score)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Source {
    Text,
    Features,
}

/// conv → ReLU → max-pool → dropout.
#[derive(Debug, Clone)]
struct Stage {
    width: usize,
    channels: usize,
    filters: usize,
    in_len: usize,
    conv_len: usize,
    pool_len: usize,
    rate: f64,
    kernel: usize,
    bias: usize,
}

impl Stage {
    fn out_len(&self) -> usize {
        self.pool_len * self.filters
    }
}

#[derive(Debug, Clone)]
struct Branch {
    source: Source,
    stages: Vec<Stage>,
    offset: usize,
}

impl Branch {
    fn out_len(&self) -> usize {
        self.stages.last().map_or(0, Stage::out_len)
    }
}

struct StageTrace<T> {
    input: Vec<T>,
    pre: Vec<T>,
    argmax: Vec<usize>,
    mask: Option<Vec<T>>,
}

struct Trace<T> {
    ids: Vec<usize>,
    branches: Vec<Vec<StageTrace<T>>>,
    hidden: Vec<T>,
    prob: T,
}

/// Input to a forward pass: token ids plus, for FeatAug, the figurative
/// feature vector.
#[derive(Debug, Clone, Copy)]
pub struct ModelInput<'a, T> {
    pub seq: &'a PaddedSequence,
    pub features: Option<&'a [T]>,
}

/// Sentence CNN over embedded tokens with an optional convolutional
/// branch over figurative features.
pub struct CnnModel<T> {
    arch: Architecture,
    config: ModelConfig,
    vocab: Vocabulary,
    dim: usize,
    seed: u64,
    names: Vec<String>,
    params: Vec<Param<T>>,
    branches: Vec<Branch>,
    head_w: usize,
    head_b: usize,
    invocations: AtomicU64,
}

impl<T: Scalar> Clone for CnnModel<T> {
    fn clone(&self) -> Self {
        CnnModel {
            arch: self.arch,
            config: self.config.clone(),
            vocab: self.vocab.clone(),
            dim: self.dim,
            seed: self.seed,
            names: self.names.clone(),
            params: self.params.clone(),
            branches: self.branches.clone(),
            head_w: self.head_w,
            head_b: self.head_b,
            invocations: AtomicU64::new(self.invocations()),
        }
    }
}

impl<T: Scalar> std::fmt::Debug for CnnModel<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CnnModel")
            .field("arch", &self.arch)
            .field("vocab", &self.vocab.len())
            .field("dim", &self.dim)
            .field("params", &self.param_count())
            .finish()
    }
}

fn stage_chain(
    widths: &[usize],
    rates: &[f64],
    in_len: usize,
    channels: usize,
    cfg: &ModelConfig,
    what: &str,
) -> Result<Vec<Stage>> {
    let mut stages = Vec::new();
    let (mut len, mut ch) = (in_len, channels);
    for (&width, &rate) in widths.iter().zip(rates) {
        check_rate(rate)?;
        if width == 0 {
            return Err(Error::Config(format!("{what}: kernel width must be positive")));
        }
        if len < width {
            return Err(Error::Config(format!("{what}: sequence of length {len} shorter than kernel {width}")));
        }
        let conv_len = len - width + 1;
        stages.push(Stage {
            width,
            channels: ch,
            filters: cfg.filters,
            in_len: len,
            conv_len,
            pool_len: conv_len / cfg.pool,
            rate,
            kernel: 0,
            bias: 0,
        });
        len = conv_len / cfg.pool;
        ch = cfg.filters;
    }
    Ok(stages)
}

impl<T: Scalar> CnnModel<T> {
    /// Builds a model whose embedding matrix is `table`, row for row; the
    /// table's vocabulary becomes the model vocabulary.
    pub fn new(arch: Architecture, table: &EmbeddingTable<T>, config: &ModelConfig, seed: u64) -> Result<Self> {
        let cfg = config.clone();
        let max_kernel = cfg.kernels.iter().copied().max().unwrap_or(0);
        if cfg.kernels.is_empty() || cfg.filters == 0 || cfg.pool == 0 {
            return Err(Error::Config("model needs kernels, filters and a pool size".into()));
        }
        if cfg.max_len < max_kernel {
            return Err(Error::Config(format!(
                "max_len {} is shorter than the largest kernel {max_kernel}",
                cfg.max_len
            )));
        }
        if cfg.dropout.len() != cfg.kernels.len() {
            return Err(Error::Config(format!(
                "{} dropout rates for {} kernels",
                cfg.dropout.len(),
                cfg.kernels.len()
            )));
        }
        if !(cfg.init_range > 0.0 && cfg.init_range.is_finite()) {
            return Err(Error::Config("init_range must be positive".into()));
        }

        let dim = table.dim();
        let mut branches = match cfg.layout {
            DropoutLayout::Positional => cfg
                .kernels
                .iter()
                .zip(&cfg.dropout)
                .map(|(&w, &r)| {
                    Ok(Branch {
                        source: Source::Text,
                        stages: stage_chain(&[w], &[r], cfg.max_len, dim, &cfg, "text branch")?,
                        offset: 0,
                    })
                })
                .collect::<Result<Vec<_>>>()?,
            DropoutLayout::Stacked => vec![Branch {
                source: Source::Text,
                stages: stage_chain(&cfg.kernels, &cfg.dropout, cfg.max_len, dim, &cfg, "stacked branch")?,
                offset: 0,
            }],
        };
        if branches.iter().any(|b| b.stages.last().is_some_and(|s| s.pool_len == 0 && b.stages.len() > 1)) {
            return Err(Error::Config("stacked layers shrink the sequence to nothing".into()));
        }
        if arch == Architecture::FeatAug {
            let n = cfg.feature_len();
            if n < cfg.feature_kernel {
                return Err(Error::Config(format!(
                    "feature vector of length {n} shorter than kernel {}",
                    cfg.feature_kernel
                )));
            }
            branches.push(Branch {
                source: Source::Features,
                stages: stage_chain(&[cfg.feature_kernel], &[cfg.feature_dropout], n, 1, &cfg, "feature branch")?,
                offset: 0,
            });
        }

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = cfg.init_range;
        let mut uniform = |n: usize| -> Vec<T> { (0..n).map(|_| T::of(rng.gen_range(-r..=r))).collect() };
        let mut names = vec!["embedding".to_string()];
        let mut params = vec![Param::new(Tensor::new(vec![table.len(), dim], table.matrix().to_vec())?)];
        let mut offset = 0;
        for (bi, branch) in branches.iter_mut().enumerate() {
            let tag = match branch.source {
                Source::Text => format!("text{bi}"),
                Source::Features => "features".to_string(),
            };
            for (si, st) in branch.stages.iter_mut().enumerate() {
                st.kernel = params.len();
                names.push(format!("{tag}.conv{si}.kernel"));
                params.push(Param::new(Tensor::new(
                    vec![st.filters, st.width, st.channels],
                    uniform(st.filters * st.width * st.channels),
                )?));
                st.bias = params.len();
                names.push(format!("{tag}.conv{si}.bias"));
                params.push(Param::new(Tensor::vector(uniform(st.filters))));
            }
            branch.offset = offset;
            offset += branch.out_len();
        }
        if offset == 0 {
            return Err(Error::Config("model has no features after pooling".into()));
        }
        let head_w = params.len();
        names.push("head.weight".into());
        params.push(Param::new(Tensor::new(vec![1, offset], uniform(offset))?));
        let head_b = params.len();
        names.push("head.bias".into());
        params.push(Param::new(Tensor::vector(uniform(1))));

        Ok(CnnModel {
            arch,
            config: cfg,
            vocab: table.vocab().clone(),
            dim,
            seed,
            names,
            params,
            branches,
            head_w,
            head_b,
            invocations: AtomicU64::new(0),
        })
    }

    pub fn architecture(&self) -> Architecture {
        self.arch
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn param_count(&self) -> usize {
        self.params.iter().map(Param::len).sum()
    }

    pub fn param_names(&self) -> &[String] {
        &self.names
    }

    pub fn param(&self, name: &str) -> Option<&Tensor<T>> {
        self.names.iter().position(|n| n == name).map(|i| &self.params[i].value)
    }

    pub fn param_mut(&mut self, name: &str) -> Option<&mut Tensor<T>> {
        self.names.iter().position(|n| n == name).map(|i| &mut self.params[i].value)
    }

    /// Width of the concatenated representation fed to the head, and
    /// the offset where the feature branch starts (if any).
    pub fn hidden_layout(&self) -> (usize, Option<usize>) {
        let total = self.branches.iter().map(Branch::out_len).sum();
        let feat = self.branches.iter().find(|b| b.source == Source::Features).map(|b| b.offset);
        (total, feat)
    }

    /// Number of forward passes made through [`CnnModel::probability`].
    pub fn invocations(&self) -> u64 {
        self.invocations.load(Ordering::Relaxed)
    }

    pub fn encode<S: AsRef<str>>(&self, tokens: &[S]) -> PaddedSequence {
        pad(tokens, &self.vocab, self.config.max_len)
    }

    fn check_input(&self, input: &ModelInput<'_, T>) -> Result<()> {
        if input.seq.len() != self.config.max_len {
            return Err(Error::Shape(format!(
                "sequence of length {} for a model with max_len {}",
                input.seq.len(),
                self.config.max_len
            )));
        }
        if let Some(&bad) = input.seq.token_ids.iter().find(|&&id| id >= self.vocab.len()) {
            return Err(Error::invalid(format!("token id {bad} outside the vocabulary")));
        }
        match (self.arch, input.features) {
            (Architecture::FeatAug, None) => Err(Error::invalid("FeatAug model needs figurative features")),
            (Architecture::FeatAug, Some(f)) if f.len() != self.config.feature_len() => Err(Error::Shape(format!(
                "feature vector of length {} for a model expecting {}",
                f.len(),
                self.config.feature_len()
            ))),
            _ => Ok(()),
        }
    }

    fn forward<R: Rng>(&self, input: &ModelInput<'_, T>, mut rng: Option<&mut R>) -> Trace<T> {
        let d = self.dim;
        let emb = &self.params[0].value;
        let mut embedded = vec![T::zero(); input.seq.len() * d];
        for (t, &id) in input.seq.token_ids.iter().enumerate() {
            if id != PAD_INDEX {
                embedded[t * d..(t + 1) * d].copy_from_slice(&emb.data()[id * d..(id + 1) * d]);
            }
        }
        let mut hidden = Vec::with_capacity(self.hidden_layout().0);
        let mut traces = Vec::with_capacity(self.branches.len());
        for branch in &self.branches {
            let mut x = match branch.source {
                Source::Text => embedded.clone(),
                Source::Features => input.features.map(<[T]>::to_vec).unwrap_or_default(),
            };
            let mut stage_traces = Vec::with_capacity(branch.stages.len());
            for st in &branch.stages {
                let mut pre = vec![T::zero(); st.conv_len * st.filters];
                conv1d_into(
                    &x,
                    st.channels,
                    self.params[st.kernel].value.data(),
                    st.width,
                    self.params[st.bias].value.data(),
                    &mut pre,
                );
                let act: Vec<T> = pre.iter().map(|&v| v.max(T::zero())).collect();
                let mut pooled = vec![T::zero(); st.out_len()];
                let mut argmax = vec![0; st.out_len()];
                maxpool_into(&act, st.filters, self.config.pool, &mut pooled, &mut argmax);
                let mask = match rng.as_deref_mut() {
                    Some(r) if st.rate > 0.0 => {
                        let m: Vec<T> = dropout_mask(pooled.len(), st.rate, r);
                        pooled.iter_mut().zip(&m).for_each(|(p, &k)| *p *= k);
                        Some(m)
                    }
                    _ => None,
                };
                stage_traces.push(StageTrace {
                    input: std::mem::replace(&mut x, pooled),
                    pre,
                    argmax,
                    mask,
                });
            }
            hidden.extend_from_slice(&x);
            traces.push(stage_traces);
        }
        let logit = self.params[self.head_b].value.data()[0] + dot(self.params[self.head_w].value.data(), &hidden);
        Trace {
            ids: input.seq.token_ids.clone(),
            branches: traces,
            hidden,
            prob: sigmoid(logit),
        }
    }

    /// Adds `dlogit`-scaled gradients of one example into the parameter
    /// gradients. The PAD row never receives gradient.
    fn backward(&mut self, trace: &Trace<T>, dlogit: T, embedding_grad: bool) {
        let hw = self.head_w;
        let dh: Vec<T> = self.params[hw].value.data().iter().map(|&w| w * dlogit).collect();
        for (g, &h) in self.params[hw].grad.iter_mut().zip(&trace.hidden) {
            *g += dlogit * h;
        }
        self.params[self.head_b].grad[0] += dlogit;

        let d = self.dim;
        for bi in 0..self.branches.len() {
            let branch = &self.branches[bi];
            let (source, offset, n) = (branch.source, branch.offset, branch.out_len());
            let stages = branch.stages.clone();
            let mut grad = dh[offset..offset + n].to_vec();
            for (si, st) in stages.iter().enumerate().rev() {
                let tr = &trace.branches[bi][si];
                if let Some(mask) = &tr.mask {
                    grad.iter_mut().zip(mask).for_each(|(g, &m)| *g *= m);
                }
                let mut grad_pre = vec![T::zero(); st.conv_len * st.filters];
                for (cell, (&row, &g)) in tr.argmax.iter().zip(&grad).enumerate() {
                    let idx = row * st.filters + cell % st.filters;
                    if tr.pre[idx] > T::zero() {
                        grad_pre[idx] += g;
                    }
                }
                let need_input = si > 0 || (source == Source::Text && embedding_grad);
                let mut grad_input = need_input.then(|| vec![T::zero(); st.in_len * st.channels]);
                let mut grad_bias = vec![T::zero(); st.filters];
                {
                    let Param { value, grad: gk } = &mut self.params[st.kernel];
                    conv1d_backward_into(
                        &tr.input,
                        st.channels,
                        value.data(),
                        st.width,
                        &grad_pre,
                        gk,
                        &mut grad_bias,
                        grad_input.as_deref_mut(),
                    );
                }
                for (a, b) in self.params[st.bias].grad.iter_mut().zip(&grad_bias) {
                    *a += *b;
                }
                match grad_input {
                    Some(gi) if si > 0 => grad = gi,
                    Some(gi) => {
                        let eg = &mut self.params[0].grad;
                        for (t, &id) in trace.ids.iter().enumerate() {
                            if id != PAD_INDEX {
                                for (a, &b) in eg[id * d..(id + 1) * d].iter_mut().zip(&gi[t * d..(t + 1) * d]) {
                                    *a += b;
                                }
                            }
                        }
                    }
                    None => {}
                }
            }
        }
    }

    /// Eval-mode probability; counts as one classifier invocation.
    pub fn probability(&self, input: &ModelInput<'_, T>) -> Result<T> {
        self.check_input(input)?;
        self.invocations.fetch_add(1, Ordering::Relaxed);
        let p = self.forward::<ChaCha8Rng>(input, None).prob;
        if !p.is_finite() {
            return Err(Error::invalid("non-finite probability"));
        }
        Ok(p)
    }

    pub(crate) fn zero_grad(&mut self) {
        self.params.iter_mut().for_each(Param::zero_grad);
    }

    pub(crate) fn trainable_params(&mut self) -> Vec<&mut Param<T>> {
        let skip = usize::from(!self.config.train_embeddings);
        self.params.iter_mut().skip(skip).collect()
    }

    /// Forward plus backward for one example, gradients scaled by
    /// `scale`. Returns the example's loss.
    pub(crate) fn accumulate<R: Rng>(&mut self, input: &ModelInput<'_, T>, y: T, scale: T, rng: Option<&mut R>) -> Result<T> {
        self.check_input(input)?;
        let trace = self.forward(input, rng);
        let loss = bce_loss(trace.prob, y);
        let embedding_grad = self.config.train_embeddings;
        self.backward(&trace, bce_grad_logit(trace.prob, y) * scale, embedding_grad);
        Ok(loss)
    }

    /// All parameters concatenated in declaration order.
    pub fn flat_params(&self) -> Vec<T> {
        self.params.iter().flat_map(|p| p.value.data().iter().copied()).collect()
    }

    pub fn set_flat_params(&mut self, flat: &[T]) -> Result<()> {
        if flat.len() != self.param_count() {
            return Err(Error::Shape(format!("{} values for {} parameters", flat.len(), self.param_count())));
        }
        let mut at = 0;
        for p in &mut self.params {
            let n = p.len();
            p.value.data_mut().copy_from_slice(&flat[at..at + n]);
            at += n;
        }
        Ok(())
    }

    /// Mean eval-mode loss over `examples`.
    pub fn loss(&self, examples: &[(ModelInput<'_, T>, T)]) -> Result<T> {
        let mut total = T::zero();
        for (input, y) in examples {
            self.check_input(input)?;
            total += bce_loss(self.forward::<ChaCha8Rng>(input, None).prob, *y);
        }
        Ok(total / T::of(examples.len().max(1) as f64))
    }

    /// Mean eval-mode loss and its gradient with respect to every
    /// parameter (embedding included), flattened in declaration order.
    pub fn loss_and_gradient(&mut self, examples: &[(ModelInput<'_, T>, T)]) -> Result<(T, Vec<T>)> {
        self.zero_grad();
        let scale = T::one() / T::of(examples.len().max(1) as f64);
        let mut total = T::zero();
        for (input, y) in examples {
            self.check_input(input)?;
            let trace = self.forward::<ChaCha8Rng>(input, None);
            total += bce_loss(trace.prob, *y);
            self.backward(&trace, bce_grad_logit(trace.prob, *y) * scale, true);
        }
        let grad = self.params.iter().flat_map(|p| p.grad.iter().copied()).collect();
        self.zero_grad();
        Ok((total * scale, grad))
    }

    /// Distance of an eval-mode forward pass from the nearest kink: the
    /// smallest |ReLU input| and the smallest non-zero gap between a
    /// pooling window's maximum and another entry of that window. Exact
    /// ties only arise between identical windows and are ignored.
    pub fn kink_margin(&self, input: &ModelInput<'_, T>) -> Result<f64> {
        self.check_input(input)?;
        let trace = self.forward::<ChaCha8Rng>(input, None);
        let pool = self.config.pool;
        let mut margin = f64::INFINITY;
        for (branch, traces) in self.branches.iter().zip(&trace.branches) {
            for (st, tr) in branch.stages.iter().zip(traces) {
                for &v in &tr.pre {
                    margin = margin.min(v.as_f64().abs());
                }
                let f = st.filters;
                for (cell, &row) in tr.argmax.iter().enumerate() {
                    let (p, c) = (cell / f, cell % f);
                    let best = tr.pre[row * f + c].max(T::zero()).as_f64();
                    for r in p * pool..(p + 1) * pool {
                        let gap = best - tr.pre[r * f + c].max(T::zero()).as_f64();
                        if r != row && gap > 0.0 {
                            margin = margin.min(gap);
                        }
                    }
                }
            }
        }
        Ok(margin)
    }

    fn graph(&self) -> Vec<String> {
        let mut g = vec![format!("embedding(v={},d={})", self.vocab.len(), self.dim)];
        for (bi, b) in self.branches.iter().enumerate() {
            let src = match b.source {
                Source::Text => "text",
                Source::Features => "features",
            };
            for st in &b.stages {
                g.push(format!(
                    "branch{bi}[{src}]: conv1d(w={},f={}) relu maxpool({}) dropout({})",
                    st.width, st.filters, self.config.pool, st.rate
                ));
            }
        }
        g.push(format!("concat({}) dense(1) sigmoid", self.hidden_layout().0));
        g
    }

    pub fn to_checkpoint(&self) -> Checkpoint {
        Checkpoint {
            manifest: Manifest {
                version: CHECKPOINT_VERSION.into(),
                scalar: T::TYPE_NAME.into(),
                graph: self.graph(),
                params: self
                    .names
                    .iter()
                    .zip(&self.params)
                    .map(|(n, p)| ParamSpec {
                        name: n.clone(),
                        shape: p.value.shape().to_vec(),
                    })
                    .collect(),
                seed: self.seed,
                hyperparameters: serde_json::json!({
                    "architecture": self.arch,
                    "model": self.config,
                }),
                extra: serde_json::json!({ "vocab": self.vocab.words() }),
            },
            values: self
                .params
                .iter()
                .map(|p| p.value.data().iter().map(|x| x.as_f64()).collect())
                .collect(),
        }
    }

    pub fn from_checkpoint(ckpt: &Checkpoint) -> Result<Self> {
        let m = &ckpt.manifest;
        let bad = |what: &str| Error::invalid(format!("checkpoint manifest: {what}"));
        let arch: Architecture =
            serde_json::from_value(m.hyperparameters["architecture"].clone()).map_err(|_| bad("architecture"))?;
        let config: ModelConfig = serde_json::from_value(m.hyperparameters["model"].clone()).map_err(|_| bad("model"))?;
        let words: Vec<String> = serde_json::from_value(m.extra["vocab"].clone()).map_err(|_| bad("vocab"))?;
        let vocab = Vocabulary::from(words);
        let emb = m.params.first().ok_or_else(|| bad("no parameters"))?;
        let dim = *emb.shape.get(1).ok_or_else(|| bad("embedding shape"))?;
        let matrix: Vec<T> = ckpt.values[0].iter().map(|&x| T::of(x)).collect();
        let table = EmbeddingTable::new(vocab, matrix, dim)?;
        let mut model = CnnModel::new(arch, &table, &config, m.seed)?;
        if model.names.len() != m.params.len()
            || model
                .names
                .iter()
                .zip(&model.params)
                .zip(&m.params)
                .any(|((n, p), spec)| *n != spec.name || p.value.shape() != spec.shape.as_slice())
        {
            return Err(bad("parameter layout does not match the architecture"));
        }
        let flat: Vec<T> = ckpt.values.iter().flatten().map(|&x| T::of(x)).collect();
        model.set_flat_params(&flat)?;
        Ok(model)
    }
}
