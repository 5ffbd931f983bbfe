use ndarray::{s, Array1, Array2, ArrayView1, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geom::{Point3, PointCloud};

/// Architecture identifier stored in model files.
pub const ARCH_TAG: u32 = 1;

/// Widths of the shared per-point layers.
pub const POINT_WIDTHS: [usize; 3] = [64, 128, 256];
/// Width of the hidden head layer.
pub const HEAD_WIDTH: usize = 128;

/// Affine layer `y = x W + b` with `W` stored as (in, out).
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub weight: Array2<f64>,
    pub bias: Array1<f64>,
}

impl Dense {
    pub fn zeros(input: usize, output: usize) -> Self {
        Self {
            weight: Array2::zeros((input, output)),
            bias: Array1::zeros(output),
        }
    }

    fn he_uniform<R: Rng>(input: usize, output: usize, rng: &mut R) -> Self {
        let bound = (6.0 / input as f64).sqrt();
        let weight = Array2::from_shape_fn((input, output), |_| rng.random_range(-bound..bound));
        Self {
            weight,
            bias: Array1::zeros(output),
        }
    }

    pub fn input_dim(&self) -> usize {
        self.weight.nrows()
    }

    pub fn output_dim(&self) -> usize {
        self.weight.ncols()
    }

    fn forward_rows(&self, x: &Array2<f64>, relu: bool) -> Array2<f64> {
        let mut z = x.dot(&self.weight);
        z += &self.bias;
        if relu {
            z.mapv_inplace(|v| v.max(0.0));
        }
        z
    }

    fn forward_vec(&self, x: ArrayView1<f64>, relu: bool) -> Array1<f64> {
        let mut z = x.dot(&self.weight);
        z += &self.bias;
        if relu {
            z.mapv_inplace(|v| v.max(0.0));
        }
        z
    }
}

/// Parameters of the point-set network.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierModel {
    pub point_layers: Vec<Dense>,
    pub head_layers: Vec<Dense>,
}

/// Parameter gradients share the model's layout.
pub type ParamGrads = ClassifierModel;

/// Logits, plus the input gradient once a backward pass has run.
#[derive(Debug, Clone, PartialEq)]
pub struct LogitGrad {
    pub logits: Vec<f64>,
    pub input_gradient: Vec<Point3>,
}

/// Activations retained by [`ClassifierModel::forward_cached`].
#[derive(Debug, Clone)]
pub struct ForwardCache {
    input: Array2<f64>,
    /// post-ReLU output of every per-point layer
    point_acts: Vec<Array2<f64>>,
    pooled: Array1<f64>,
    /// row achieving each pooled feature (lowest index on ties)
    argmax: Vec<usize>,
    hidden: Array1<f64>,
    pub logits: Array1<f64>,
}

impl ForwardCache {
    pub fn num_points(&self) -> usize {
        self.input.nrows()
    }

    pub fn logits_vec(&self) -> Vec<f64> {
        self.logits.to_vec()
    }
}

impl ClassifierModel {
    /// Randomly initialized network (He-uniform weights, zero biases).
    pub fn new(classes: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut point_layers = Vec::new();
        let mut input = 3;
        for &w in &POINT_WIDTHS {
            point_layers.push(Dense::he_uniform(input, w, &mut rng));
            input = w;
        }
        let head_layers = vec![
            Dense::he_uniform(input, HEAD_WIDTH, &mut rng),
            Dense::he_uniform(HEAD_WIDTH, classes, &mut rng),
        ];
        Self {
            point_layers,
            head_layers,
        }
    }

    /// A model of the same shape with every parameter zero.
    pub fn zeros_like(&self) -> Self {
        let z = |l: &Dense| Dense::zeros(l.input_dim(), l.output_dim());
        Self {
            point_layers: self.point_layers.iter().map(z).collect(),
            head_layers: self.head_layers.iter().map(z).collect(),
        }
    }

    pub fn classes(&self) -> usize {
        self.head_layers.last().map_or(0, Dense::output_dim)
    }

    pub fn layers(&self) -> impl Iterator<Item = &Dense> {
        self.point_layers.iter().chain(&self.head_layers)
    }

    pub fn layers_mut(&mut self) -> impl Iterator<Item = &mut Dense> {
        self.point_layers.iter_mut().chain(&mut self.head_layers)
    }

    /// Checks the dimension chain and that all parameters are finite.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::FormatVersionMismatch(m));
        if self.point_layers.is_empty() || self.head_layers.is_empty() {
            return bad("model needs per-point and head layers".into());
        }
        let mut input = 3;
        for (i, l) in self.layers().enumerate() {
            if l.input_dim() != input || l.bias.len() != l.output_dim() {
                return bad(format!("layer {i} has inconsistent dimensions"));
            }
            if l.weight.iter().chain(l.bias.iter()).any(|v| !v.is_finite()) {
                return bad(format!("layer {i} has non-finite parameters"));
            }
            input = l.output_dim();
        }
        if self.classes() < 2 {
            return bad("fewer than two classes".into());
        }
        Ok(())
    }

    pub fn forward(&self, cloud: &PointCloud) -> Result<Vec<f64>> {
        Ok(self.forward_cached(cloud)?.logits_vec())
    }

    /// Argmax of the logits, lowest class on ties.
    pub fn predict(&self, cloud: &PointCloud) -> Result<usize> {
        Ok(argmax(&self.forward(cloud)?))
    }

    pub fn forward_cached(&self, cloud: &PointCloud) -> Result<ForwardCache> {
        if cloud.is_empty() {
            return Err(Error::EmptyCloud);
        }
        let n = cloud.len();
        let input = Array2::from_shape_fn((n, 3), |(i, c)| cloud.points()[i][c]);
        let mut point_acts = Vec::with_capacity(self.point_layers.len());
        let mut x = input.clone();
        for layer in &self.point_layers {
            x = layer.forward_rows(&x, true);
            point_acts.push(x.clone());
        }
        let last = point_acts.last().expect("at least one per-point layer");
        let width = last.ncols();
        let mut pooled = last.row(0).to_owned();
        let mut argmax = vec![0usize; width];
        for (r, row) in last.axis_iter(Axis(0)).enumerate().skip(1) {
            for f in 0..width {
                if row[f] > pooled[f] {
                    pooled[f] = row[f];
                    argmax[f] = r;
                }
            }
        }
        let (hidden_layer, out_layer) = self.head();
        let hidden = hidden_layer.forward_vec(pooled.view(), true);
        let logits = out_layer.forward_vec(hidden.view(), false);
        Ok(ForwardCache {
            input,
            point_acts,
            pooled,
            argmax,
            hidden,
            logits,
        })
    }

    fn head(&self) -> (&Dense, &Dense) {
        (&self.head_layers[0], &self.head_layers[1])
    }

    fn check_state(&self, cache: &ForwardCache, dlogits: &[f64]) -> Result<()> {
        if dlogits.len() != self.classes() || cache.logits.len() != self.classes() {
            return Err(Error::StateMismatch(format!(
                "expected {} logits, got {} (cache) / {} (upstream)",
                self.classes(),
                cache.logits.len(),
                dlogits.len()
            )));
        }
        if cache.point_acts.len() != self.point_layers.len()
            || cache
                .point_acts
                .iter()
                .zip(&self.point_layers)
                .any(|(a, l)| a.ncols() != l.output_dim())
        {
            return Err(Error::StateMismatch(
                "cached activations do not match layer widths".into(),
            ));
        }
        Ok(())
    }

    /// Gradient of `⟨logits, dlogits⟩` with respect to the input points.
    ///
    /// Max pooling routes each feature's gradient to the single point that
    /// attained it, so only those "critical" points receive a gradient.
    pub fn backward_input(&self, cache: &ForwardCache, dlogits: &[f64]) -> Result<Vec<Point3>> {
        self.check_state(cache, dlogits)?;
        Ok(self.backward(cache, dlogits, None))
    }

    /// Like [`backward_input`](Self::backward_input), also accumulating
    /// parameter gradients into `grads`.
    pub fn backward_params(
        &self,
        cache: &ForwardCache,
        dlogits: &[f64],
        grads: &mut ParamGrads,
    ) -> Result<()> {
        self.check_state(cache, dlogits)?;
        self.backward(cache, dlogits, Some(grads));
        Ok(())
    }

    fn backward(
        &self,
        cache: &ForwardCache,
        dlogits: &[f64],
        mut grads: Option<&mut ParamGrads>,
    ) -> Vec<Point3> {
        let n = cache.num_points();
        let (hidden_layer, out_layer) = self.head();
        let dlogits = ArrayView1::from(dlogits);

        let mut dhidden = out_layer.weight.dot(&dlogits);
        for (d, &h) in dhidden.iter_mut().zip(cache.hidden.iter()) {
            if h <= 0.0 {
                *d = 0.0;
            }
        }
        let dpooled = hidden_layer.weight.dot(&dhidden);

        if let Some(g) = grads.as_deref_mut() {
            accumulate_outer(&mut g.head_layers[1], cache.hidden.view(), dlogits);
            accumulate_outer(&mut g.head_layers[0], cache.pooled.view(), dhidden.view());
        }

        // Rows that won at least one pooled feature, in increasing order.
        let mut rows: Vec<usize> = cache.argmax.clone();
        rows.sort_unstable();
        rows.dedup();
        let mut slot = vec![usize::MAX; n];
        for (s, &r) in rows.iter().enumerate() {
            slot[r] = s;
        }
        let width = dpooled.len();
        let mut dact = Array2::<f64>::zeros((rows.len(), width));
        for f in 0..width {
            dact[[slot[cache.argmax[f]], f]] += dpooled[f];
        }

        for l in (0..self.point_layers.len()).rev() {
            let act = &cache.point_acts[l];
            for (s, &r) in rows.iter().enumerate() {
                let mut drow = dact.row_mut(s);
                for (d, &a) in drow.iter_mut().zip(act.row(r).iter()) {
                    if a <= 0.0 {
                        *d = 0.0;
                    }
                }
            }
            let prev = if l == 0 {
                &cache.input
            } else {
                &cache.point_acts[l - 1]
            };
            if let Some(g) = grads.as_deref_mut() {
                let prev_rows = prev.select(Axis(0), &rows);
                let gl = &mut g.point_layers[l];
                gl.weight += &prev_rows.t().dot(&dact);
                gl.bias += &dact.sum_axis(Axis(0));
            }
            dact = dact.dot(&self.point_layers[l].weight.t());
        }

        let mut out = vec![[0.0; 3]; n];
        for (s, &r) in rows.iter().enumerate() {
            let d = dact.slice(s![s, ..]);
            out[r] = [d[0], d[1], d[2]];
        }
        out
    }

    /// Logits and input gradient of `⟨logits, dlogits⟩` in one call.
    pub fn logit_grad(&self, cloud: &PointCloud, dlogits: &[f64]) -> Result<LogitGrad> {
        let cache = self.forward_cached(cloud)?;
        let input_gradient = self.backward_input(&cache, dlogits)?;
        Ok(LogitGrad {
            logits: cache.logits_vec(),
            input_gradient,
        })
    }
}

fn accumulate_outer(layer: &mut Dense, x: ArrayView1<f64>, dy: ArrayView1<f64>) {
    for (i, &xi) in x.iter().enumerate() {
        if xi == 0.0 {
            continue;
        }
        let mut row = layer.weight.row_mut(i);
        row.scaled_add(xi, &dy);
    }
    layer.bias += &dy;
}

/// Index of the largest value, lowest index on ties.
pub(crate) fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate().skip(1) {
        if x > v[best] {
            best = i;
        }
    }
    best
}
