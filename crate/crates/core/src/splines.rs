//! Univariate and tensor-product B-splines.
//!
//! Indices are 0-based throughout. For a degree-`p` knot vector with `n`
//! functions, `B_i` is supported on `[ξ_i, ξ_{i+p+1}]`. The reduced vector
//! `Ξ'` drops the first and last knot and carries the Curry–Schoenberg
//! functions `D_j = p / (ξ_{j+p+1} − ξ_{j+1}) · B^{p−1}_j(Ξ')`, so that
//! `B_i' = D_{i−1} − D_i` with `D_{−1} = D_{n−1} = 0`.

use crate::error::{Error, Result};

/// Open knot vector on `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct KnotVector {
    degree: usize,
    knots: Vec<f64>,
}

impl KnotVector {
    /// Validates an open, nondecreasing knot vector on `[0, 1]`.
    ///
    /// Degree 0 is accepted so that reduced vectors of linear splines are
    /// representable.
    pub fn new(degree: usize, knots: Vec<f64>) -> Result<Self> {
        let p = degree;
        if knots.len() < 2 * (p + 1) {
            return Err(Error::Knots(format!(
                "{} knots cannot hold an open degree-{p} vector",
                knots.len()
            )));
        }
        if knots.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Knots("knots must be nondecreasing".into()));
        }
        let m = knots.len();
        if knots[..=p].iter().any(|&k| k != 0.0) || knots[m - p - 1..].iter().any(|&k| k != 1.0) {
            return Err(Error::Knots(format!(
                "end knots must repeat 0 and 1 exactly {} times",
                p + 1
            )));
        }
        if knots[p + 1] == 0.0 || knots[m - p - 2] == 1.0 {
            return Err(Error::Knots(
                "end knot multiplicity exceeds degree + 1".into(),
            ));
        }
        if let Some(w) = knots
            .windows(p + 2)
            .find(|w| w[0] == w[p + 1] && w[0] > 0.0 && w[0] < 1.0)
        {
            return Err(Error::Knots(format!(
                "interior knot {} repeated more than {} times",
                w[0],
                p + 1
            )));
        }
        Ok(Self { degree, knots })
    }

    /// Uniform open vector with `elements` spans whose interior knots have
    /// multiplicity `degree − regularity` (functions are `C^regularity`).
    pub fn uniform(degree: usize, elements: usize, regularity: usize) -> Result<Self> {
        if elements == 0 {
            return Err(Error::Knots("at least one element required".into()));
        }
        if regularity >= degree.max(1) && elements > 1 {
            return Err(Error::Knots(format!(
                "regularity {regularity} needs degree > {regularity}"
            )));
        }
        let mult = degree - regularity.min(degree);
        let mut knots = vec![0.0; degree + 1];
        for e in 1..elements {
            let x = e as f64 / elements as f64;
            knots.extend(std::iter::repeat_n(x, mult));
        }
        knots.extend(std::iter::repeat_n(1.0, degree + 1));
        Self::new(degree, knots)
    }

    /// Uniform vector with maximal smoothness `C^{p−1}`.
    pub fn open_uniform(degree: usize, elements: usize) -> Result<Self> {
        Self::uniform(degree, elements, degree.saturating_sub(1))
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    /// Number of basis functions `n = len − p − 1`.
    pub fn num_basis(&self) -> usize {
        self.knots.len() - self.degree - 1
    }

    /// Distinct knot values in increasing order.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut b = self.knots.clone();
        b.dedup();
        b
    }

    pub fn num_spans(&self) -> usize {
        self.breakpoints().len() - 1
    }

    /// Largest knot span, the mesh size `h`.
    pub fn mesh_size(&self) -> f64 {
        self.breakpoints()
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max)
    }

    /// Index `s` with `ξ_s ≤ x < ξ_{s+1}`; `x = 1` maps to the last
    /// nonempty span.
    pub fn find_span(&self, x: f64) -> usize {
        let p = self.degree;
        let n = self.num_basis();
        if x >= self.knots[n] {
            return n - 1;
        }
        // first index with knot > x, minus one
        let s = self.knots.partition_point(|&k| k <= x) - 1;
        s.clamp(p, n - 1)
    }

    /// Vector without its first and last knot, one degree lower.
    pub fn reduced(&self) -> Result<ReducedKnotVector> {
        if self.degree == 0 {
            return Err(Error::Knots("cannot reduce a degree-0 vector".into()));
        }
        let inner = KnotVector::new(
            self.degree - 1,
            self.knots[1..self.knots.len() - 1].to_vec(),
        )?;
        Ok(ReducedKnotVector {
            source: self.clone(),
            inner,
        })
    }

    /// Greville abscissae `γ_i = (ξ_{i+1} + … + ξ_{i+p}) / p`.
    pub fn greville(&self) -> Vec<f64> {
        let p = self.degree;
        if p == 0 {
            return (0..self.num_basis())
                .map(|i| 0.5 * (self.knots[i] + self.knots[i + 1]))
                .collect();
        }
        (0..self.num_basis())
            .map(|i| self.knots[i + 1..=i + p].iter().sum::<f64>() / p as f64)
            .collect()
    }

    /// Bisects every nonempty span `levels` times (new knots are simple).
    pub fn refine_dyadic(&self, levels: usize) -> KnotVector {
        let mut kv = self.clone();
        for _ in 0..levels {
            let mut knots = Vec::with_capacity(2 * kv.knots.len());
            for w in kv.knots.windows(2) {
                knots.push(w[0]);
                if w[1] > w[0] {
                    knots.push(0.5 * (w[0] + w[1]));
                }
            }
            knots.push(1.0);
            kv = KnotVector {
                degree: kv.degree,
                knots,
            };
        }
        kv
    }

    /// Knot vector of degree `degree` on the same breakpoints, each interior
    /// breakpoint subdivided into `elements` equal pieces, interior knots of
    /// multiplicity `degree − regularity`.
    pub fn subdivided(
        &self,
        degree: usize,
        elements: usize,
        regularity: usize,
    ) -> Result<KnotVector> {
        let bp = self.breakpoints();
        let mult = degree - regularity.min(degree);
        let mut knots = vec![0.0; degree + 1];
        for (s, w) in bp.windows(2).enumerate() {
            for e in 0..elements {
                if s == 0 && e == 0 {
                    continue;
                }
                let x = w[0] + (w[1] - w[0]) * e as f64 / elements as f64;
                knots.extend(std::iter::repeat_n(x, mult));
            }
        }
        knots.extend(std::iter::repeat_n(1.0, degree + 1));
        KnotVector::new(degree, knots)
    }
}

/// `Ξ'`: source knots without the first and last entry, degree `p − 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedKnotVector {
    source: KnotVector,
    inner: KnotVector,
}

impl ReducedKnotVector {
    pub fn source(&self) -> &KnotVector {
        &self.source
    }

    /// The reduced knots as an ordinary open vector of degree `p − 1`.
    pub fn as_knot_vector(&self) -> &KnotVector {
        &self.inner
    }

    pub fn degree(&self) -> usize {
        self.inner.degree
    }

    pub fn knots(&self) -> &[f64] {
        &self.inner.knots
    }

    pub fn num_basis(&self) -> usize {
        self.inner.num_basis()
    }
}

fn check_unit(x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::Domain { value: x })
    }
}

/// The `p + 1` possibly nonzero B-splines at `x`, starting at the returned
/// index.
pub fn eval_basis(kv: &KnotVector, x: f64) -> Result<(usize, Vec<f64>)> {
    check_unit(x)?;
    let (first, mut ders) = basis_ders_unchecked(kv, x, 0);
    Ok((first, ders.swap_remove(0)))
}

/// Values and derivatives up to order `nders` of the active B-splines at `x`.
pub fn eval_basis_ders(kv: &KnotVector, x: f64, nders: usize) -> Result<(usize, Vec<Vec<f64>>)> {
    check_unit(x)?;
    Ok(basis_ders_unchecked(kv, x, nders))
}

/// Triangular-table evaluation of values and derivatives.
pub(crate) fn basis_ders_unchecked(
    kv: &KnotVector,
    x: f64,
    nders: usize,
) -> (usize, Vec<Vec<f64>>) {
    let p = kv.degree;
    let u = &kv.knots;
    let span = kv.find_span(x);
    let mut ndu = vec![vec![0.0; p + 1]; p + 1];
    let mut left = vec![0.0; p + 1];
    let mut right = vec![0.0; p + 1];
    ndu[0][0] = 1.0;
    for j in 1..=p {
        left[j] = x - u[span + 1 - j];
        right[j] = u[span + j] - x;
        let mut saved = 0.0;
        for r in 0..j {
            ndu[j][r] = right[r + 1] + left[j - r];
            let temp = ndu[r][j - 1] / ndu[j][r];
            ndu[r][j] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        ndu[j][j] = saved;
    }
    let mut ders = vec![vec![0.0; p + 1]; nders + 1];
    for j in 0..=p {
        ders[0][j] = ndu[j][p];
    }
    let mut a = vec![vec![0.0; p + 1]; 2];
    for r in 0..=p {
        let (mut s1, mut s2) = (0usize, 1usize);
        a[0][0] = 1.0;
        for k in 1..=nders.min(p) {
            let mut d = 0.0;
            let rk = r as isize - k as isize;
            let pk = p - k;
            if r >= k {
                a[s2][0] = a[s1][0] / ndu[pk + 1][rk as usize];
                d = a[s2][0] * ndu[rk as usize][pk];
            }
            let j1 = if rk >= -1 { 1 } else { (-rk) as usize };
            let j2 = if (r as isize - 1) <= pk as isize {
                k - 1
            } else {
                p - r
            };
            for j in j1..=j2 {
                let idx = (rk + j as isize) as usize;
                a[s2][j] = (a[s1][j] - a[s1][j - 1]) / ndu[pk + 1][idx];
                d += a[s2][j] * ndu[idx][pk];
            }
            if r <= pk {
                a[s2][k] = -a[s1][k - 1] / ndu[pk + 1][r];
                d += a[s2][k] * ndu[r][pk];
            }
            ders[k][r] = d;
            std::mem::swap(&mut s1, &mut s2);
        }
    }
    let mut f = p as f64;
    for (k, row) in ders.iter_mut().enumerate().skip(1) {
        if k > p {
            row.iter_mut().for_each(|v| *v = 0.0);
            continue;
        }
        row.iter_mut().for_each(|v| *v *= f);
        f *= (p - k) as f64;
    }
    (span - p, ders)
}

/// Curry–Schoenberg functions `D_j` active at `x`: `p` values (or fewer
/// meaningful ones) starting at the returned index of `Ξ'`.
///
/// A function with zero-width support is identically zero.
pub fn eval_curry_schoenberg(rkv: &ReducedKnotVector, x: f64) -> Result<(usize, Vec<f64>)> {
    check_unit(x)?;
    Ok(curry_schoenberg_unchecked(rkv, x))
}

pub(crate) fn curry_schoenberg_unchecked(rkv: &ReducedKnotVector, x: f64) -> (usize, Vec<f64>) {
    let (first, mut ders) = basis_ders_unchecked(&rkv.inner, x, 0);
    let mut vals = ders.swap_remove(0);
    let p = rkv.source.degree as f64;
    let src = &rkv.source.knots;
    let q = rkv.source.degree;
    for (o, v) in vals.iter_mut().enumerate() {
        let j = first + o;
        let width = src[j + q + 1] - src[j + 1];
        *v = if width > 0.0 { *v * p / width } else { 0.0 };
    }
    (first, vals)
}

/// One univariate factor of a tensor basis.
#[derive(Clone, Debug, PartialEq)]
pub enum Factor {
    /// B-splines of the knot vector.
    Full(KnotVector),
    /// Curry–Schoenberg functions of the reduced vector.
    Reduced(ReducedKnotVector),
}

impl Factor {
    pub fn num_basis(&self) -> usize {
        match self {
            Factor::Full(k) => k.num_basis(),
            Factor::Reduced(r) => r.num_basis(),
        }
    }

    pub fn degree(&self) -> usize {
        match self {
            Factor::Full(k) => k.degree(),
            Factor::Reduced(r) => r.degree(),
        }
    }

    /// Active values at `x` (first index, values).
    pub fn eval(&self, x: f64) -> (usize, Vec<f64>) {
        match self {
            Factor::Full(k) => {
                let (f, mut d) = basis_ders_unchecked(k, x, 0);
                (f, d.swap_remove(0))
            }
            Factor::Reduced(r) => curry_schoenberg_unchecked(r, x),
        }
    }
}

/// Tensor product of univariate factors in `d ∈ {1, 2, 3}` directions.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorBasis {
    factors: Vec<Factor>,
}

impl TensorBasis {
    pub fn new(factors: Vec<Factor>) -> Result<Self> {
        if factors.is_empty() || factors.len() > 3 {
            return Err(Error::Knots(format!(
                "tensor dimension {} not in 1..=3",
                factors.len()
            )));
        }
        Ok(Self { factors })
    }

    pub fn dim(&self) -> usize {
        self.factors.len()
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn counts(&self) -> Vec<usize> {
        self.factors.iter().map(Factor::num_basis).collect()
    }

    pub fn num_basis(&self) -> usize {
        self.counts().iter().product()
    }

    /// Linear index with the first direction fastest.
    pub fn linear_index(&self, idx: &[usize]) -> usize {
        let counts = self.counts();
        idx.iter()
            .zip(&counts)
            .rev()
            .fold(0, |acc, (&i, &n)| acc * n + i)
    }

    /// All nonzero `(linear index, value)` pairs at `xi`.
    pub fn eval(&self, xi: &[f64]) -> Result<Vec<(usize, f64)>> {
        for &x in xi {
            check_unit(x)?;
        }
        let counts = self.counts();
        let per: Vec<(usize, Vec<f64>)> = self
            .factors
            .iter()
            .zip(xi)
            .map(|(f, &x)| f.eval(x))
            .collect();
        let mut out = vec![(0usize, 1.0f64)];
        let mut stride = 1;
        for (d, (first, vals)) in per.iter().enumerate() {
            let mut next = Vec::with_capacity(out.len() * vals.len());
            for &(li, v) in &out {
                for (o, &b) in vals.iter().enumerate() {
                    next.push((li + (first + o) * stride, v * b));
                }
            }
            out = next;
            stride *= counts[d];
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Textbook recursive definition, independent of the table algorithm.
    fn cox_de_boor(knots: &[f64], i: usize, p: usize, x: f64) -> f64 {
        if p == 0 {
            let last = knots[i + 1] == 1.0 && x == 1.0 && knots[i] < 1.0;
            return if (knots[i] <= x && x < knots[i + 1]) || last {
                1.0
            } else {
                0.0
            };
        }
        let mut v = 0.0;
        let d1 = knots[i + p] - knots[i];
        if d1 > 0.0 {
            v += (x - knots[i]) / d1 * cox_de_boor(knots, i, p - 1, x);
        }
        let d2 = knots[i + p + 1] - knots[i + 1];
        if d2 > 0.0 {
            v += (knots[i + p + 1] - x) / d2 * cox_de_boor(knots, i + 1, p - 1, x);
        }
        v
    }

    #[test]
    fn linear_hat_is_symmetric() {
        let kv = KnotVector::new(1, vec![0.0, 0.0, 1.0, 1.0]).unwrap();
        let (f, v) = eval_basis(&kv, 0.5).unwrap();
        assert_eq!(f, 0);
        assert_eq!(v, vec![0.5, 0.5]);
    }

    #[test]
    fn quadratic_matches_recursive_oracle() {
        let kv = KnotVector::new(2, vec![0.0, 0.0, 0.0, 0.5, 1.0, 1.0, 1.0]).unwrap();
        let (f, v) = eval_basis(&kv, 0.25).unwrap();
        for (o, val) in v.iter().enumerate() {
            let want = cox_de_boor(kv.knots(), f + o, 2, 0.25);
            assert!((val - want).abs() < 1e-15, "{val} vs {want}");
        }
        assert!(
            (v[0] - 0.25).abs() < 1e-15
                && (v[1] - 0.625).abs() < 1e-15
                && (v[2] - 0.125).abs() < 1e-15
        );
    }

    #[test]
    fn right_endpoint_takes_left_limit() {
        let kv = KnotVector::open_uniform(3, 4).unwrap();
        let (f, v) = eval_basis(&kv, 1.0).unwrap();
        assert_eq!(f + 3, kv.num_basis() - 1);
        assert!((v[3] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn linear_source_gives_unit_constant() {
        let kv = KnotVector::new(1, vec![0.0, 0.0, 1.0, 1.0]).unwrap();
        let r = kv.reduced().unwrap();
        for x in [0.0, 0.3, 1.0] {
            let (f, v) = eval_curry_schoenberg(&r, x).unwrap();
            assert_eq!((f, v), (0, vec![1.0]));
        }
    }

    #[test]
    fn greville_examples() {
        let kv = KnotVector::new(2, vec![0.0, 0.0, 0.0, 1.0, 1.0, 1.0]).unwrap();
        assert_eq!(kv.greville(), vec![0.0, 0.5, 1.0]);
        let kv = KnotVector::new(3, vec![0.0, 0.0, 0.0, 0.0, 0.5, 1.0, 1.0, 1.0, 1.0]).unwrap();
        let g = kv.greville();
        let want = [0.0, 1.0 / 6.0, 0.5, 5.0 / 6.0, 1.0];
        for (a, b) in g.iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
        let kv = KnotVector::open_uniform(1, 4).unwrap();
        assert_eq!(kv.greville(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn dyadic_refinement() {
        let kv = KnotVector::new(2, vec![0.0, 0.0, 0.0, 1.0, 1.0, 1.0]).unwrap();
        assert_eq!(kv.refine_dyadic(0), kv);
        assert_eq!(
            kv.refine_dyadic(1).knots(),
            &[0.0, 0.0, 0.0, 0.5, 1.0, 1.0, 1.0]
        );
        assert_eq!(kv.refine_dyadic(3).num_spans(), 8);
    }

    #[test]
    fn uniform_regularity_counts() {
        // C^1 counts used by the kernel table
        assert_eq!(KnotVector::uniform(2, 2, 1).unwrap().num_basis(), 4);
        assert_eq!(KnotVector::uniform(2, 3, 1).unwrap().num_basis(), 5);
        assert_eq!(KnotVector::uniform(3, 2, 1).unwrap().num_basis(), 6);
        assert_eq!(KnotVector::uniform(3, 3, 1).unwrap().num_basis(), 8);
        assert_eq!(KnotVector::open_uniform(3, 3).unwrap().num_basis(), 6);
    }

    #[test]
    fn rejects_bad_vectors() {
        assert!(KnotVector::new(2, vec![0.0, 0.0, 1.0, 1.0, 1.0, 1.0]).is_err());
        assert!(KnotVector::new(1, vec![0.0, 0.0, 0.6, 0.4, 1.0, 1.0]).is_err());
        assert!(eval_basis(&KnotVector::open_uniform(2, 2).unwrap(), 1.5).is_err());
    }

    #[test]
    fn tensor_eval_is_partition_of_unity() {
        let kv = KnotVector::open_uniform(2, 3).unwrap();
        let tb = TensorBasis::new(vec![
            Factor::Full(kv.clone()),
            Factor::Full(kv.clone()),
            Factor::Full(kv),
        ])
        .unwrap();
        let vals = tb.eval(&[0.1, 0.7, 0.95]).unwrap();
        assert_eq!(vals.len(), 27);
        let s: f64 = vals.iter().map(|v| v.1).sum();
        assert!((s - 1.0).abs() < 1e-14);
        assert_eq!(tb.num_basis(), 125);
    }
}
