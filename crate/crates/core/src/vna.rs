//! Finite-dimensional von Neumann algebras `M_{n_1} (+) ... (+) M_{n_k}` and linear maps
//! between them, stored as dense matrices on vectorized elements.
//!
//! Vectorization: each block column-major, blocks concatenated in order. Tensor products list
//! blocks lexicographically with Kronecker products inside each block, which makes `(x)`
//! strictly associative with `[1]` as strict unit.

use std::fmt;
use std::sync::OnceLock;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::qstate::StateVector;
use crate::syntax::CMatrix;

/// Tolerance for Hermiticity, positivity and law checks.
pub const TOL: f64 = 1e-9;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Error, PartialEq)]
pub enum VnaError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("{0} is not completely positive")]
    NotCp(String),
    #[error("{0} is not a MIU map")]
    NotMiu(String),
    #[error("{0} is not of the form l-infinity(X)")]
    NotLinf(String),
    #[error("{0} is not invertible")]
    NotInvertible(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VnaObject {
    pub blocks: Vec<usize>,
}

impl VnaObject {
    pub fn new(blocks: Vec<usize>) -> VnaObject {
        assert!(blocks.iter().all(|&n| n > 0), "block dimensions must be positive");
        VnaObject { blocks }
    }

    /// `C = [1]`
    pub fn scalar() -> VnaObject {
        VnaObject { blocks: vec![1] }
    }

    /// The zero algebra `[]`.
    pub fn zero() -> VnaObject {
        VnaObject { blocks: vec![] }
    }

    /// `M_n = [n]`
    pub fn matrix(n: usize) -> VnaObject {
        VnaObject::new(vec![n])
    }

    /// `C^k = [1, ..., 1]`
    pub fn linf(k: usize) -> VnaObject {
        VnaObject { blocks: vec![1; k] }
    }

    /// Vector-space dimension, the sum of squared block sizes.
    pub fn dim(&self) -> usize {
        self.blocks.iter().map(|n| n * n).sum()
    }

    pub fn offsets(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.blocks.len());
        let mut acc = 0;
        for n in &self.blocks {
            out.push(acc);
            acc += n * n;
        }
        out
    }

    pub fn is_linf(&self) -> bool {
        self.blocks.iter().all(|&n| n == 1)
    }

    pub fn is_scalar(&self) -> bool {
        self.blocks == [1]
    }

    /// Block, row and column of a vector index.
    pub fn locate(&self, mut idx: usize) -> (usize, usize, usize) {
        for (b, &n) in self.blocks.iter().enumerate() {
            if idx < n * n {
                return (b, idx % n, idx / n);
            }
            idx -= n * n;
        }
        panic!("index out of range for {self}");
    }

    pub fn index(&self, block: usize, row: usize, col: usize) -> usize {
        self.offsets()[block] + row + col * self.blocks[block]
    }
}

impl fmt::Display for VnaObject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.blocks.iter().map(|n| n.to_string()).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

/// An element: one square matrix per block.
#[derive(Clone, Debug, PartialEq)]
pub struct VnaElement {
    pub object: VnaObject,
    pub blocks: Vec<CMatrix>,
}

impl VnaElement {
    pub fn new(object: VnaObject, blocks: Vec<CMatrix>) -> Result<VnaElement, VnaError> {
        if blocks.len() != object.blocks.len()
            || blocks.iter().zip(&object.blocks).any(|(m, &n)| m.nrows() != n || m.ncols() != n)
        {
            return Err(VnaError::Shape(format!("element blocks do not fit {object}")));
        }
        Ok(VnaElement { object, blocks })
    }

    pub fn unit(a: &VnaObject) -> VnaElement {
        VnaElement { object: a.clone(), blocks: a.blocks.iter().map(|&n| CMatrix::identity(n, n)).collect() }
    }

    pub fn zero(a: &VnaObject) -> VnaElement {
        VnaElement { object: a.clone(), blocks: a.blocks.iter().map(|&n| CMatrix::zeros(n, n)).collect() }
    }

    /// Basis element with a single `1` at vector index `idx` (a matrix unit).
    pub fn basis(a: &VnaObject, idx: usize) -> VnaElement {
        let mut v = vec![ZERO; a.dim()];
        v[idx] = ONE;
        VnaElement::from_vector(a, &v)
    }

    pub fn from_vector(a: &VnaObject, v: &[Complex64]) -> VnaElement {
        assert_eq!(v.len(), a.dim());
        let mut blocks = Vec::with_capacity(a.blocks.len());
        let mut off = 0;
        for &n in &a.blocks {
            blocks.push(CMatrix::from_column_slice(n, n, &v[off..off + n * n]));
            off += n * n;
        }
        VnaElement { object: a.clone(), blocks }
    }

    pub fn to_vector(&self) -> Vec<Complex64> {
        self.blocks.iter().flat_map(|m| m.as_slice().iter().copied()).collect()
    }

    pub fn mul(&self, other: &VnaElement) -> VnaElement {
        assert_eq!(self.object, other.object);
        VnaElement { object: self.object.clone(), blocks: self.blocks.iter().zip(&other.blocks).map(|(a, b)| a * b).collect() }
    }

    pub fn adjoint(&self) -> VnaElement {
        VnaElement { object: self.object.clone(), blocks: self.blocks.iter().map(|a| a.adjoint()).collect() }
    }

    pub fn sub(&self, other: &VnaElement) -> VnaElement {
        VnaElement { object: self.object.clone(), blocks: self.blocks.iter().zip(&other.blocks).map(|(a, b)| a - b).collect() }
    }

    pub fn max_abs(&self) -> f64 {
        self.blocks.iter().flat_map(|m| m.iter()).map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_self_adjoint(&self) -> bool {
        self.blocks.iter().all(is_hermitian)
    }

    /// Hermitian blocks with eigenvalues at least `-TOL`.
    pub fn is_positive(&self) -> bool {
        self.blocks.iter().all(is_psd)
    }
}

fn is_hermitian(m: &CMatrix) -> bool {
    m.nrows() == m.ncols() && (m - m.adjoint()).iter().all(|z| z.norm() <= TOL)
}

fn is_psd(m: &CMatrix) -> bool {
    if !is_hermitian(m) {
        return false;
    }
    if m.nrows() == 0 {
        return true;
    }
    let h = (m + m.adjoint()).scale(0.5);
    h.symmetric_eigenvalues().iter().all(|&l| l >= -TOL)
}

#[derive(Default, Debug)]
struct Flags {
    cp: OnceLock<bool>,
    miu: OnceLock<bool>,
    unital: OnceLock<bool>,
    subunital: OnceLock<bool>,
}

impl Clone for Flags {
    fn clone(&self) -> Self {
        Flags {
            cp: self.cp.clone(),
            miu: self.miu.clone(),
            unital: self.unital.clone(),
            subunital: self.subunital.clone(),
        }
    }
}

/// A linear map `dom -> cod`; `matrix` is `dim(cod) x dim(dom)`.
#[derive(Clone, Debug)]
pub struct VnaMorphism {
    dom: VnaObject,
    cod: VnaObject,
    matrix: CMatrix,
    flags: Flags,
}

impl PartialEq for VnaMorphism {
    fn eq(&self, other: &Self) -> bool {
        self.dom == other.dom && self.cod == other.cod && self.matrix == other.matrix
    }
}

impl fmt::Display for VnaMorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {}", self.dom, self.cod)
    }
}

impl VnaMorphism {
    pub fn new(dom: VnaObject, cod: VnaObject, matrix: CMatrix) -> Result<VnaMorphism, VnaError> {
        if matrix.nrows() != cod.dim() || matrix.ncols() != dom.dim() {
            return Err(VnaError::Shape(format!(
                "{}x{} matrix for a map {dom} -> {cod}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(VnaMorphism { dom, cod, matrix, flags: Flags::default() })
    }

    pub fn dom(&self) -> &VnaObject {
        &self.dom
    }

    pub fn cod(&self) -> &VnaObject {
        &self.cod
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    fn raw(dom: VnaObject, cod: VnaObject, matrix: CMatrix) -> VnaMorphism {
        debug_assert!(matrix.nrows() == cod.dim() && matrix.ncols() == dom.dim());
        VnaMorphism { dom, cod, matrix, flags: Flags::default() }
    }

    /// Build from the images of the basis elements of `dom`.
    pub fn from_fn(dom: &VnaObject, cod: &VnaObject, f: impl Fn(&VnaElement) -> VnaElement) -> VnaMorphism {
        let mut m = CMatrix::zeros(cod.dim(), dom.dim());
        for j in 0..dom.dim() {
            let img = f(&VnaElement::basis(dom, j));
            assert_eq!(&img.object, cod);
            for (i, z) in img.to_vector().into_iter().enumerate() {
                m[(i, j)] = z;
            }
        }
        VnaMorphism::raw(dom.clone(), cod.clone(), m)
    }

    pub fn identity(a: &VnaObject) -> VnaMorphism {
        VnaMorphism::raw(a.clone(), a.clone(), CMatrix::identity(a.dim(), a.dim()))
    }

    pub fn zero(dom: &VnaObject, cod: &VnaObject) -> VnaMorphism {
        VnaMorphism::raw(dom.clone(), cod.clone(), CMatrix::zeros(cod.dim(), dom.dim()))
    }

    pub fn apply(&self, x: &VnaElement) -> VnaElement {
        assert_eq!(x.object, self.dom, "argument object");
        let v = CMatrix::from_column_slice(self.dom.dim(), 1, &x.to_vector());
        let out = &self.matrix * v;
        VnaElement::from_vector(&self.cod, out.as_slice())
    }

    /// `self o first`
    pub fn after(&self, first: &VnaMorphism) -> Result<VnaMorphism, VnaError> {
        if first.cod != self.dom {
            return Err(VnaError::Shape(format!("cannot compose {self} after {first}")));
        }
        Ok(VnaMorphism::raw(first.dom.clone(), self.cod.clone(), &self.matrix * &first.matrix))
    }

    pub fn scale(&self, s: f64) -> VnaMorphism {
        VnaMorphism::raw(self.dom.clone(), self.cod.clone(), self.matrix.scale(s))
    }

    pub fn add(&self, other: &VnaMorphism) -> Result<VnaMorphism, VnaError> {
        if self.dom != other.dom || self.cod != other.cod {
            return Err(VnaError::Shape(format!("cannot add {self} and {other}")));
        }
        Ok(VnaMorphism::raw(self.dom.clone(), self.cod.clone(), &self.matrix + &other.matrix))
    }

    /// Max entrywise distance, `None` on differing shapes.
    pub fn distance(&self, other: &VnaMorphism) -> Option<f64> {
        if self.dom != other.dom || self.cod != other.cod {
            return None;
        }
        Some((&self.matrix - &other.matrix).iter().map(|z| z.norm()).fold(0.0, f64::max))
    }

    pub fn approx_eq(&self, other: &VnaMorphism, tol: f64) -> bool {
        self.distance(other).is_some_and(|d| d <= tol)
    }

    /// Component `M_{n_i} -> M_{m_j}` as a matrix on the two blocks' vectorizations.
    fn component(&self, i: usize, j: usize) -> CMatrix {
        let (n, m) = (self.dom.blocks[i], self.cod.blocks[j]);
        let (oi, oj) = (self.dom.offsets()[i], self.cod.offsets()[j]);
        self.matrix.view((oj, oi), (m * m, n * n)).into_owned()
    }

    /// Complete positivity via the Choi matrix of every block component.
    pub fn is_cp(&self) -> bool {
        *self.flags.cp.get_or_init(|| {
            (0..self.dom.blocks.len()).all(|i| {
                (0..self.cod.blocks.len()).all(|j| is_psd(&choi(&self.component(i, j), self.dom.blocks[i], self.cod.blocks[j])))
            })
        })
    }

    pub fn is_unital(&self) -> bool {
        *self.flags.unital.get_or_init(|| {
            self.apply(&VnaElement::unit(&self.dom)).sub(&VnaElement::unit(&self.cod)).max_abs() <= TOL
        })
    }

    pub fn is_subunital(&self) -> bool {
        *self.flags.subunital.get_or_init(|| {
            VnaElement::unit(&self.cod).sub(&self.apply(&VnaElement::unit(&self.dom))).is_positive()
        })
    }

    /// Unital, involutive and multiplicative on all pairs of matrix units.
    pub fn is_miu(&self) -> bool {
        *self.flags.miu.get_or_init(|| {
            if !self.is_unital() {
                return false;
            }
            let dom = &self.dom;
            let images: Vec<VnaElement> = (0..dom.dim()).map(|k| self.apply(&VnaElement::basis(dom, k))).collect();
            for a in 0..dom.dim() {
                let (ba, ra, ca) = dom.locate(a);
                let star = dom.index(ba, ca, ra);
                if images[star].sub(&images[a].adjoint()).max_abs() > TOL {
                    return false;
                }
                for (b, img_b) in images.iter().enumerate() {
                    let (bb, rb, cb) = dom.locate(b);
                    let prod = images[a].mul(img_b);
                    let expected = if ba == bb && ca == rb {
                        images[dom.index(ba, ra, cb)].clone()
                    } else {
                        VnaElement::zero(&self.cod)
                    };
                    if prod.sub(&expected).max_abs() > TOL {
                        return false;
                    }
                }
            }
            true
        })
    }

    /// JSON dump: dom/cod block lists and the row-major matrix as `[re, im]` pairs.
    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<Vec<[f64; 2]>> = (0..self.matrix.nrows())
            .map(|i| (0..self.matrix.ncols()).map(|j| [self.matrix[(i, j)].re, self.matrix[(i, j)].im]).collect())
            .collect();
        serde_json::json!({ "dom": self.dom.blocks, "cod": self.cod.blocks, "matrix": rows })
    }
}

/// Choi matrix `sum_{r,c} E_rc (x) f(E_rc)` of a map `M_n -> M_m`.
fn choi(f: &CMatrix, n: usize, m: usize) -> CMatrix {
    let mut out = CMatrix::zeros(n * m, n * m);
    for r in 0..n {
        for c in 0..n {
            let col = f.column(r + c * n);
            for p in 0..m {
                for q in 0..m {
                    out[(r * m + p, c * m + q)] = col[p + q * m];
                }
            }
        }
    }
    out
}

/// Choi matrices of every block component, keyed by (dom block, cod block).
pub fn choi_matrices(f: &VnaMorphism) -> Vec<((usize, usize), CMatrix)> {
    let mut out = Vec::new();
    for i in 0..f.dom.blocks.len() {
        for j in 0..f.cod.blocks.len() {
            out.push(((i, j), choi(&f.component(i, j), f.dom.blocks[i], f.cod.blocks[j])));
        }
    }
    out
}

// ---------------------------------------------------------------------------------------------
// Tensor and direct sum

pub fn tensor(a: &VnaObject, b: &VnaObject) -> VnaObject {
    let mut blocks = Vec::with_capacity(a.blocks.len() * b.blocks.len());
    for &n in &a.blocks {
        for &m in &b.blocks {
            blocks.push(n * m);
        }
    }
    VnaObject { blocks }
}

pub fn tensor_all<'a>(factors: impl IntoIterator<Item = &'a VnaObject>) -> VnaObject {
    factors.into_iter().fold(VnaObject::scalar(), |acc, f| tensor(&acc, f))
}

/// Position in `a (x) b` of the elementary tensor of vector indices `ia` of `a` and `ib` of `b`.
pub fn tensor_index(a: &VnaObject, b: &VnaObject, ia: usize, ib: usize) -> usize {
    let (pa, ra, ca) = a.locate(ia);
    let (pb, rb, cb) = b.locate(ib);
    let m = b.blocks[pb];
    let n = a.blocks[pa] * m;
    let off: usize = a.blocks[..pa].iter().map(|x| b.blocks.iter().map(|y| x * y * x * y).sum::<usize>()).sum::<usize>()
        + b.blocks[..pb].iter().map(|y| a.blocks[pa] * y * a.blocks[pa] * y).sum::<usize>();
    off + (ra * m + rb) + (ca * m + cb) * n
}

/// `perm[ia * dim(b) + ib] = tensor_index(a, b, ia, ib)`
pub(crate) fn tensor_perm(a: &VnaObject, b: &VnaObject) -> Vec<usize> {
    let (da, db) = (a.dim(), b.dim());
    let locs = |o: &VnaObject| -> Vec<(usize, usize, usize)> {
        let mut v = Vec::with_capacity(o.dim());
        for (p, &n) in o.blocks.iter().enumerate() {
            for k in 0..n * n {
                v.push((p, k % n, k / n));
            }
        }
        v
    };
    let (la, lb) = (locs(a), locs(b));
    let offs = tensor(a, b).offsets();
    let nb = b.blocks.len();
    let mut perm = vec![0; da * db];
    for (ia, &(pa, ra, ca)) in la.iter().enumerate() {
        for (ib, &(pb, rb, cb)) in lb.iter().enumerate() {
            let m = b.blocks[pb];
            let n = a.blocks[pa] * m;
            perm[ia * db + ib] = offs[pa * nb + pb] + (ra * m + rb) + (ca * m + cb) * n;
        }
    }
    perm
}

pub fn tensor_element(x: &VnaElement, y: &VnaElement) -> VnaElement {
    let obj = tensor(&x.object, &y.object);
    let (vx, vy) = (x.to_vector(), y.to_vector());
    let mut v = vec![ZERO; obj.dim()];
    for (ia, a) in vx.iter().enumerate() {
        if *a == ZERO {
            continue;
        }
        for (ib, b) in vy.iter().enumerate() {
            v[tensor_index(&x.object, &y.object, ia, ib)] = a * b;
        }
    }
    VnaElement::from_vector(&obj, &v)
}

/// `f (x) g`; both factors must be completely positive.
pub fn tensor_mor(f: &VnaMorphism, g: &VnaMorphism) -> Result<VnaMorphism, VnaError> {
    for h in [f, g] {
        if !h.is_cp() {
            return Err(VnaError::NotCp(h.to_string()));
        }
    }
    Ok(tensor_mor_unchecked(f, g))
}

pub(crate) fn tensor_mor_unchecked(f: &VnaMorphism, g: &VnaMorphism) -> VnaMorphism {
    let dom = tensor(&f.dom, &g.dom);
    let cod = tensor(&f.cod, &g.cod);
    if f.dom.is_scalar() && f.cod.is_scalar() && f.matrix[(0, 0)] == ONE {
        return VnaMorphism::raw(dom, cod, g.matrix.clone());
    }
    if g.dom.is_scalar() && g.cod.is_scalar() && g.matrix[(0, 0)] == ONE {
        return VnaMorphism::raw(dom, cod, f.matrix.clone());
    }
    let kron = f.matrix.kronecker(&g.matrix);
    let pd = tensor_perm(&f.dom, &g.dom);
    let pc = tensor_perm(&f.cod, &g.cod);
    let mut m = CMatrix::zeros(cod.dim(), dom.dim());
    for (c, &tc) in pd.iter().enumerate() {
        for (r, &tr) in pc.iter().enumerate() {
            let z = kron[(r, c)];
            if z != ZERO {
                m[(tr, tc)] = z;
            }
        }
    }
    VnaMorphism::raw(dom, cod, m)
}

pub fn direct_sum(a: &VnaObject, b: &VnaObject) -> VnaObject {
    VnaObject { blocks: a.blocks.iter().chain(&b.blocks).copied().collect() }
}

/// `pi_1 : a (+) b -> a` (`which = 0`) or `pi_2 : a (+) b -> b` (`which = 1`).
pub fn proj(a: &VnaObject, b: &VnaObject, which: usize) -> VnaMorphism {
    let sum = direct_sum(a, b);
    let (target, off) = if which == 0 { (a, 0) } else { (b, a.dim()) };
    let mut m = CMatrix::zeros(target.dim(), sum.dim());
    for i in 0..target.dim() {
        m[(i, off + i)] = ONE;
    }
    VnaMorphism::raw(sum, target.clone(), m)
}

/// `<f, g> : c -> a (+) b`
pub fn tuple(f: &VnaMorphism, g: &VnaMorphism) -> Result<VnaMorphism, VnaError> {
    if f.dom != g.dom {
        return Err(VnaError::Shape(format!("tupling {f} with {g}")));
    }
    let mut m = CMatrix::zeros(f.cod.dim() + g.cod.dim(), f.dom.dim());
    m.view_mut((0, 0), (f.cod.dim(), f.dom.dim())).copy_from(&f.matrix);
    m.view_mut((f.cod.dim(), 0), (g.cod.dim(), f.dom.dim())).copy_from(&g.matrix);
    Ok(VnaMorphism::raw(f.dom.clone(), direct_sum(&f.cod, &g.cod), m))
}

/// `f (+) g`
pub fn oplus(f: &VnaMorphism, g: &VnaMorphism) -> VnaMorphism {
    let dom = direct_sum(&f.dom, &g.dom);
    let cod = direct_sum(&f.cod, &g.cod);
    let mut m = CMatrix::zeros(cod.dim(), dom.dim());
    m.view_mut((0, 0), (f.cod.dim(), f.dom.dim())).copy_from(&f.matrix);
    m.view_mut((f.cod.dim(), f.dom.dim()), (g.cod.dim(), g.dom.dim())).copy_from(&g.matrix);
    VnaMorphism::raw(dom, cod, m)
}

fn permutation(dom: VnaObject, cod: VnaObject, image: impl Fn(usize) -> usize) -> VnaMorphism {
    let mut m = CMatrix::zeros(cod.dim(), dom.dim());
    for j in 0..dom.dim() {
        m[(image(j), j)] = ONE;
    }
    VnaMorphism::raw(dom, cod, m)
}

/// Symmetry `a (x) b -> b (x) a`.
pub fn gamma(a: &VnaObject, b: &VnaObject) -> VnaMorphism {
    let db = b.dim();
    let perm = tensor_perm(a, b);
    let mut inv = vec![0; perm.len()];
    for (k, &t) in perm.iter().enumerate() {
        inv[t] = k;
    }
    permutation(tensor(a, b), tensor(b, a), |t| {
        let k = inv[t];
        tensor_index(b, a, k % db, k / db)
    })
}

/// Distributivity `(a (x) b) (+) (a (x) c) -> a (x) (b (+) c)`.
pub fn theta(a: &VnaObject, b: &VnaObject, c: &VnaObject) -> VnaMorphism {
    let ab = tensor(a, b);
    let ac = tensor(a, c);
    let bc = direct_sum(b, c);
    let dom = direct_sum(&ab, &ac);
    let inverse = |other: &VnaObject| {
        let perm = tensor_perm(a, other);
        let mut inv = vec![0; perm.len()];
        for (k, &t) in perm.iter().enumerate() {
            inv[t] = k;
        }
        inv
    };
    let (inv_b, inv_c) = (inverse(b), inverse(c));
    let (db, dc) = (b.dim(), c.dim());
    permutation(dom, tensor(a, &bc), |j| {
        if j < ab.dim() {
            let k = inv_b[j];
            tensor_index(a, &bc, k / db, k % db)
        } else {
            let k = inv_c[j - ab.dim()];
            tensor_index(a, &bc, k / dc, db + k % dc)
        }
    })
}

pub fn theta_inv(a: &VnaObject, b: &VnaObject, c: &VnaObject) -> VnaMorphism {
    let t = theta(a, b, c);
    VnaMorphism::raw(t.cod.clone(), t.dom.clone(), t.matrix.transpose())
}

/// The unique MIU map `C -> a`, `z |-> z 1`.
pub fn unit_map(a: &VnaObject) -> VnaMorphism {
    let v = VnaElement::unit(a).to_vector();
    VnaMorphism::raw(VnaObject::scalar(), a.clone(), CMatrix::from_column_slice(a.dim(), 1, &v))
}

// ---------------------------------------------------------------------------------------------
// Spectrum, l-infinity and the monad L

/// A labelled finite set; labels are distinct.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteSet {
    pub labels: Vec<String>,
}

impl FiniteSet {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Normal spectrum: one point per 1-dimensional block, labelled by block index.
pub fn nsp(a: &VnaObject) -> FiniteSet {
    FiniteSet { labels: one_blocks(a).into_iter().map(|b| b.to_string()).collect() }
}

fn one_blocks(a: &VnaObject) -> Vec<usize> {
    a.blocks.iter().enumerate().filter(|(_, &n)| n == 1).map(|(i, _)| i).collect()
}

/// Evaluation at the spectrum point sitting in block `block` of `a`.
pub fn point(a: &VnaObject, block: usize) -> Result<VnaMorphism, VnaError> {
    if a.blocks.get(block) != Some(&1) {
        return Err(VnaError::Shape(format!("block {block} of {a} is not one-dimensional")));
    }
    let mut m = CMatrix::zeros(1, a.dim());
    m[(0, a.offsets()[block])] = ONE;
    Ok(VnaMorphism::raw(a.clone(), VnaObject::scalar(), m))
}

pub fn linf(x: &FiniteSet) -> VnaObject {
    VnaObject::linf(x.len())
}

/// `l(X) -> l(Y)`, `phi |-> phi o h` for `h : Y -> X` given as `h[y] = x`.
pub fn linf_mor(x: &FiniteSet, h: &[usize]) -> VnaMorphism {
    permutation_like(VnaObject::linf(x.len()), VnaObject::linf(h.len()), h)
}

fn permutation_like(dom: VnaObject, cod: VnaObject, h: &[usize]) -> VnaMorphism {
    let mut m = CMatrix::zeros(cod.dim(), dom.dim());
    for (y, &x) in h.iter().enumerate() {
        m[(y, x)] = ONE;
    }
    VnaMorphism::raw(dom, cod, m)
}

/// `L a = l(nsp a)`: the 1-dimensional blocks of `a`, in order.
pub fn l_obj(a: &VnaObject) -> VnaObject {
    VnaObject::linf(one_blocks(a).len())
}

/// `L f` for a MIU map `f : a -> b`: each point of `nsp b` is sent to the point `x o f`.
pub fn l_mor(f: &VnaMorphism) -> Result<VnaMorphism, VnaError> {
    if !f.is_miu() {
        return Err(VnaError::NotMiu(f.to_string()));
    }
    let dom_points = one_blocks(&f.dom);
    let mut h = Vec::new();
    for j in one_blocks(&f.cod) {
        let composite = point(&f.cod, j)?.after(f)?;
        let found = dom_points
            .iter()
            .position(|&i| point(&f.dom, i).map(|p| p.approx_eq(&composite, TOL)).unwrap_or(false))
            .ok_or_else(|| VnaError::NotMiu(format!("{f}: pulled-back point is not in the spectrum")))?;
        h.push(found);
    }
    Ok(permutation_like(l_obj(&f.dom), l_obj(&f.cod), &h))
}

/// `eta : a -> L a`, the evaluations at the spectrum points.
pub fn eta(a: &VnaObject) -> VnaMorphism {
    let offs = a.offsets();
    let ones = one_blocks(a);
    let mut m = CMatrix::zeros(ones.len(), a.dim());
    for (k, &b) in ones.iter().enumerate() {
        m[(k, offs[b])] = ONE;
    }
    VnaMorphism::raw(a.clone(), l_obj(a), m)
}

/// Inverse of `eta`, defined when every block of `a` is 1-dimensional.
pub fn eta_inv(a: &VnaObject) -> Result<VnaMorphism, VnaError> {
    if !a.is_linf() {
        return Err(VnaError::NotInvertible(format!("eta at {a}")));
    }
    Ok(VnaMorphism::identity(a))
}

/// `mu : L L a -> L a`; `L` is idempotent so the two objects coincide.
pub fn mu(a: &VnaObject) -> VnaMorphism {
    let la = l_obj(a);
    debug_assert_eq!(l_obj(&la), la);
    VnaMorphism::identity(&la)
}

/// `d^L : L a (x) L b -> L(a (x) b)`, pairing spectrum points by their product.
pub fn d_l(a: &VnaObject, b: &VnaObject) -> VnaMorphism {
    let ab = tensor(a, b);
    let (pa, pb) = (one_blocks(a), one_blocks(b));
    let pab = one_blocks(&ab);
    // point (i, j) of the product spectrum lives in block i * |b| + j of a (x) b
    let h: Vec<usize> = pab
        .iter()
        .map(|&k| {
            let (i, j) = (k / b.blocks.len(), k % b.blocks.len());
            let x = pa.iter().position(|&p| p == i).expect("factor point");
            let y = pb.iter().position(|&p| p == j).expect("factor point");
            x * pb.len() + y
        })
        .collect();
    permutation_like(tensor(&l_obj(a), &l_obj(b)), l_obj(&ab), &h)
}

pub fn d_l_inv(a: &VnaObject, b: &VnaObject) -> VnaMorphism {
    let d = d_l(a, b);
    VnaMorphism::raw(d.cod.clone(), d.dom.clone(), d.matrix.transpose())
}

/// `e^L : L a (+) L b -> L(a (+) b)`; a point of a direct sum factors through one summand.
pub fn e_l(a: &VnaObject, b: &VnaObject) -> VnaMorphism {
    let (pa, pb) = (one_blocks(a), one_blocks(b));
    let psum = one_blocks(&direct_sum(a, b));
    let h: Vec<usize> = psum
        .iter()
        .map(|&k| {
            if k < a.blocks.len() {
                pa.iter().position(|&p| p == k).expect("summand point")
            } else {
                pa.len() + pb.iter().position(|&p| p == k - a.blocks.len()).expect("summand point")
            }
        })
        .collect();
    permutation_like(direct_sum(&l_obj(a), &l_obj(b)), l_obj(&direct_sum(a, b)), &h)
}

pub fn e_l_inv(a: &VnaObject, b: &VnaObject) -> VnaMorphism {
    let e = e_l(a, b);
    VnaMorphism::raw(e.cod.clone(), e.dom.clone(), e.matrix.transpose())
}

/// Pointwise multiplication `C^X (x) C^X -> C^X`.
pub fn nabla(x: &VnaObject) -> Result<VnaMorphism, VnaError> {
    if !x.is_linf() {
        return Err(VnaError::NotLinf(x.to_string()));
    }
    let k = x.blocks.len();
    let mut m = CMatrix::zeros(k, k * k);
    for p in 0..k {
        m[(p, p * k + p)] = ONE;
    }
    Ok(VnaMorphism::raw(tensor(x, x), x.clone(), m))
}

/// `iota : (x)_{present} factors -> (x) factors`, inserting `z |-> z 1` at absent positions.
pub fn iota(factors: &[VnaObject], present: &[bool]) -> Result<VnaMorphism, VnaError> {
    if factors.len() != present.len() {
        return Err(VnaError::Shape("iota: factor and presence lists differ".into()));
    }
    Ok(factors.iter().zip(present).fold(VnaMorphism::identity(&VnaObject::scalar()), |acc, (f, &p)| {
        let part = if p { VnaMorphism::identity(f) } else { unit_map(f) };
        tensor_mor_unchecked(&acc, &part)
    }))
}

/// `merge : (x) left (x) (x) right -> (x) target`. `left_to[i]` / `right_to[j]` give the target
/// position of each factor; positions hit from both sides are shared and combined with
/// pointwise multiplication, so they must be of l-infinity form. Every target position must be
/// hit at least once.
pub fn merge(
    target: &[VnaObject],
    left: &[VnaObject],
    left_to: &[usize],
    right: &[VnaObject],
    right_to: &[usize],
) -> Result<VnaMorphism, VnaError> {
    if left.len() != left_to.len() || right.len() != right_to.len() {
        return Err(VnaError::Shape("merge: position lists differ from factor lists".into()));
    }
    let mut sources: Vec<Vec<usize>> = vec![vec![]; target.len()];
    let all: Vec<&VnaObject> = left.iter().chain(right).collect();
    for (k, &t) in left_to.iter().chain(right_to).enumerate() {
        let slot = sources.get_mut(t).ok_or_else(|| VnaError::Shape(format!("merge: position {t} out of range")))?;
        if *all[k] != target[t] {
            return Err(VnaError::Shape(format!("merge: factor {} does not match target {}", all[k], target[t])));
        }
        slot.push(k);
    }
    for (t, s) in sources.iter().enumerate() {
        match s.len() {
            0 => return Err(VnaError::Shape(format!("merge: target position {t} is not covered"))),
            1 => {}
            2 if target[t].is_linf() => {}
            2 => return Err(VnaError::NotLinf(target[t].to_string())),
            _ => return Err(VnaError::Shape(format!("merge: position {t} hit more than twice"))),
        }
    }
    let dom = tensor_all(all.iter().copied());
    let cod = tensor_all(target);
    let dims: Vec<usize> = all.iter().map(|f| f.dim()).collect();
    let tdims: Vec<usize> = target.iter().map(|f| f.dim()).collect();
    let kron_to_tensor = |objs: &[&VnaObject], idx: &[usize]| {
        let mut obj = VnaObject::scalar();
        let mut at = 0;
        for (o, &i) in objs.iter().zip(idx) {
            at = tensor_index(&obj, o, at, i);
            obj = tensor(&obj, o);
        }
        at
    };
    let tref: Vec<&VnaObject> = target.iter().collect();
    let mut m = CMatrix::zeros(cod.dim(), dom.dim());
    let mut idx = vec![0usize; all.len()];
    let total: usize = dims.iter().product();
    for _ in 0..total {
        let mut out = vec![0usize; target.len()];
        let mut ok = true;
        for (t, s) in sources.iter().enumerate() {
            out[t] = idx[s[0]];
            if s.len() == 2 && idx[s[1]] != idx[s[0]] {
                ok = false;
            }
        }
        debug_assert!(out.iter().zip(&tdims).all(|(i, d)| i < d));
        if ok {
            m[(kron_to_tensor(&tref, &out), kron_to_tensor(&all, &idx))] = ONE;
        }
        for k in (0..idx.len()).rev() {
            idx[k] += 1;
            if idx[k] < dims[k] {
                break;
            }
            idx[k] = 0;
        }
    }
    Ok(VnaMorphism::raw(dom, cod, m))
}

// ---------------------------------------------------------------------------------------------
// Duplicators

/// Normal positive unital `m : a (x) a -> a` with `m(1 (x) x) = x = m(x (x) 1)` and associativity,
/// checked on matrix units. Positivity is checked as complete positivity.
pub fn is_duplicator(a: &VnaObject, m: &VnaMorphism) -> bool {
    if m.dom != tensor(a, a) || m.cod != *a || !m.is_unital() || !m.is_cp() {
        return false;
    }
    let one = VnaElement::unit(a);
    let basis: Vec<VnaElement> = (0..a.dim()).map(|k| VnaElement::basis(a, k)).collect();
    let mul = |x: &VnaElement, y: &VnaElement| m.apply(&tensor_element(x, y));
    for x in &basis {
        if mul(&one, x).sub(x).max_abs() > TOL || mul(x, &one).sub(x).max_abs() > TOL {
            return false;
        }
    }
    for x in &basis {
        for y in &basis {
            let xy = mul(x, y);
            for z in &basis {
                if mul(x, &mul(y, z)).sub(&mul(&xy, z)).max_abs() > TOL {
                    return false;
                }
            }
        }
    }
    true
}

/// Outcome of solving the duplicator constraints on `C^X`.
#[derive(Clone, Debug, PartialEq)]
pub struct DuplicatorSolve {
    pub unknowns: usize,
    /// Unknowns forced to zero by positivity.
    pub forced_zero: usize,
    /// Rank of the remaining linear system.
    pub rank: usize,
    /// The unique solution when `rank` equals the number of free unknowns.
    pub solution: Option<VnaMorphism>,
}

/// Solve `m(1 (x) e_j) = e_j = m(e_j (x) 1)` for `m : C^X (x) C^X -> C^X` with every
/// `m(e_i (x) e_j)` positive. Positivity turns each unit equation `sum = 0` at a coordinate into
/// zeros for all its (nonnegative) summands; the rest is a linear solve.
pub fn solve_duplicator(k: usize) -> DuplicatorSolve {
    let x = VnaObject::linf(k);
    let var = |out: usize, i: usize, j: usize| out * k * k + i * k + j;
    let n = k * k * k;
    // each equation: (indices with coefficient 1, right-hand side)
    let mut eqs: Vec<(Vec<usize>, f64)> = Vec::new();
    for j in 0..k {
        for out in 0..k {
            let rhs = if out == j { 1.0 } else { 0.0 };
            eqs.push(((0..k).map(|i| var(out, i, j)).collect(), rhs));
            eqs.push(((0..k).map(|i| var(out, j, i)).collect(), rhs));
        }
    }
    let mut zero = vec![false; n];
    loop {
        let mut changed = false;
        for (vars, rhs) in &eqs {
            if *rhs == 0.0 {
                for &v in vars {
                    if !zero[v] {
                        zero[v] = true;
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    let free: Vec<usize> = (0..n).filter(|&v| !zero[v]).collect();
    let rows: Vec<&(Vec<usize>, f64)> = eqs.iter().filter(|(vs, _)| vs.iter().any(|v| !zero[*v])).collect();
    let mut a = DMatrix::<f64>::zeros(rows.len().max(1), free.len());
    let mut b = DMatrix::<f64>::zeros(rows.len().max(1), 1);
    for (r, (vs, rhs)) in rows.iter().enumerate() {
        for v in vs {
            if let Some(c) = free.iter().position(|f| f == v) {
                a[(r, c)] = 1.0;
            }
        }
        b[(r, 0)] = *rhs;
    }
    let svd = a.clone().svd(true, true);
    let rank = svd.rank(TOL);
    let solution = if rank == free.len() {
        svd.solve(&b, TOL).ok().map(|sol| {
            let mut m = CMatrix::zeros(k, k * k);
            for (c, &v) in free.iter().enumerate() {
                let (out, rest) = (v / (k * k), v % (k * k));
                m[(out, rest)] = Complex64::new(sol[(c, 0)], 0.0);
            }
            VnaMorphism::raw(tensor(&x, &x), x.clone(), m)
        })
    } else {
        None
    };
    DuplicatorSolve { unknowns: n, forced_zero: n - free.len(), rank, solution }
}

/// Constraints on a MIU functional `phi : M_n -> C` (values `v_rc = phi(E_rc)`).
#[derive(Clone, Debug, PartialEq)]
pub struct MiuFunctionalSolve {
    /// Rank of the linear system on the diagonal: `v_ii = v_jj` (from `E_ij E_ji = E_ii` and
    /// `E_ji E_ij = E_jj`) together with unitality `sum v_ii = 1`.
    pub rank: usize,
    /// The forced diagonal values.
    pub diagonal: Vec<f64>,
    /// `max |v_ii^2 - v_ii|`: the violation of multiplicativity on `E_ii E_ii = E_ii`.
    pub idempotency_residual: f64,
}

impl MiuFunctionalSolve {
    pub fn feasible(&self) -> bool {
        self.idempotency_residual <= TOL
    }
}

pub fn solve_miu_functional(n: usize) -> MiuFunctionalSolve {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut rhs = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let mut r = vec![0.0; n];
            r[i] = 1.0;
            r[j] = -1.0;
            rows.push(r);
            rhs.push(0.0);
        }
    }
    rows.push(vec![1.0; n]);
    rhs.push(1.0);
    let a = DMatrix::from_fn(rows.len(), n, |r, c| rows[r][c]);
    let b = DMatrix::from_column_slice(rhs.len(), 1, &rhs);
    let svd = a.svd(true, true);
    let rank = svd.rank(TOL);
    let sol = svd.solve(&b, TOL).expect("least squares");
    let diagonal: Vec<f64> = (0..n).map(|i| sol[(i, 0)]).collect();
    let idempotency_residual = diagonal.iter().map(|v| (v * v - v).abs()).fold(0.0, f64::max);
    MiuFunctionalSolve { rank, diagonal, idempotency_residual }
}

// ---------------------------------------------------------------------------------------------
// Quantum maps

/// `<psi| - |psi> : M_{2^m} -> C`
pub fn psi_functional(psi: &StateVector) -> VnaMorphism {
    let amps = psi.amplitudes();
    let n = amps.len();
    let mut m = CMatrix::zeros(1, n * n);
    for r in 0..n {
        for c in 0..n {
            m[(0, r + c * n)] = amps[r].conj() * amps[c];
        }
    }
    VnaMorphism::raw(VnaObject::matrix(n), VnaObject::scalar(), m)
}

/// `f_new : M_2 -> C^2`, `A |-> (<0|A|0>, <1|A|1>)`.
pub fn f_new() -> VnaMorphism {
    VnaMorphism::from_fn(&VnaObject::matrix(2), &VnaObject::linf(2), |a| {
        let d = &a.blocks[0];
        VnaElement::from_vector(&VnaObject::linf(2), &[d[(0, 0)], d[(1, 1)]])
    })
}

/// `f_meas : C^2 -> M_2`, `(l, r) |-> l |0><0| + r |1><1|`.
pub fn f_meas() -> VnaMorphism {
    VnaMorphism::from_fn(&VnaObject::linf(2), &VnaObject::matrix(2), |x| {
        let v = x.to_vector();
        VnaElement::from_vector(&VnaObject::matrix(2), &[v[0], ZERO, ZERO, v[1]])
    })
}

/// `f_U : M_{2^k} -> M_{2^k}`, `A |-> U* A U`.
pub fn f_unitary(u: &CMatrix) -> VnaMorphism {
    let obj = VnaObject::matrix(u.nrows());
    // vec(U* A U) = (U^T (x) U*) vec(A)
    let m = u.transpose().kronecker(&u.adjoint());
    VnaMorphism::raw(obj.clone(), obj, m)
}

/// Matrix transpose on `M_n`, positive but not completely positive.
pub fn transpose_map(n: usize) -> VnaMorphism {
    VnaMorphism::from_fn(&VnaObject::matrix(n), &VnaObject::matrix(n), |a| {
        VnaElement::new(a.object.clone(), vec![a.blocks[0].transpose()]).expect("shape")
    })
}

/// `A |-> sum_k K_k* A K_k` for Kraus operators `K_k : C^m -> C^n`, a map `M_n -> M_m`.
pub fn kraus_map(kraus: &[CMatrix]) -> Result<VnaMorphism, VnaError> {
    let first = kraus.first().ok_or_else(|| VnaError::Shape("no Kraus operators".into()))?;
    let (n, m) = (first.nrows(), first.ncols());
    if kraus.iter().any(|k| k.nrows() != n || k.ncols() != m) {
        return Err(VnaError::Shape("Kraus operators of differing shapes".into()));
    }
    let dom = VnaObject::matrix(n);
    let cod = VnaObject::matrix(m);
    Ok(VnaMorphism::from_fn(&dom, &cod, |a| {
        let mut out = CMatrix::zeros(m, m);
        for k in kraus {
            out += k.adjoint() * &a.blocks[0] * k;
        }
        VnaElement::new(cod.clone(), vec![out]).expect("shape")
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::Gate;

    fn obj(b: &[usize]) -> VnaObject {
        VnaObject::new(b.to_vec())
    }

    #[test]
    fn tensor_blocks() {
        assert_eq!(tensor(&obj(&[2]), &obj(&[2])), obj(&[4]));
        assert_eq!(tensor(&obj(&[1, 1]), &obj(&[2])), obj(&[2, 2]));
        assert_eq!(tensor(&obj(&[1, 2]), &obj(&[1, 3])), obj(&[1, 3, 2, 6]));
        let id = tensor_mor(&VnaMorphism::identity(&obj(&[1, 2])), &VnaMorphism::identity(&obj(&[2]))).unwrap();
        assert_eq!(id, VnaMorphism::identity(&obj(&[2, 4])));
    }

    #[test]
    fn tensor_index_is_a_bijection() {
        let (a, b) = (obj(&[1, 2]), obj(&[2, 1]));
        let mut seen = vec![false; tensor(&a, &b).dim()];
        for ia in 0..a.dim() {
            for ib in 0..b.dim() {
                let t = tensor_index(&a, &b, ia, ib);
                assert!(!seen[t]);
                seen[t] = true;
            }
        }
    }

    #[test]
    fn tensor_of_elements_matches_kron() {
        let x = VnaElement::basis(&obj(&[2]), 2); // E_01
        let y = VnaElement::basis(&obj(&[2]), 1); // E_10
        let t = tensor_element(&x, &y);
        let expected = x.blocks[0].kronecker(&y.blocks[0]);
        assert_eq!(t.blocks[0], expected);
    }

    #[test]
    fn predicates() {
        let h = Gate::builtin("H").unwrap();
        let fu = f_unitary(&h.matrix);
        assert!(fu.is_cp() && fu.is_miu());
        assert!(!transpose_map(2).is_cp());
        let fnew = f_new();
        assert!(fnew.is_cp() && fnew.is_unital() && !fnew.is_miu());
        assert!(f_meas().is_cp() && f_meas().is_miu());
        let half = VnaMorphism::identity(&obj(&[2])).scale(0.5);
        assert!(half.is_subunital() && !half.is_unital());
    }

    #[test]
    fn spectrum() {
        assert!(nsp(&obj(&[2])).is_empty());
        assert_eq!(nsp(&obj(&[1, 1])).len(), 2);
        assert_eq!(nsp(&obj(&[1, 2, 1])).labels, vec!["0", "2"]);
        for b in [0, 2] {
            assert!(point(&obj(&[1, 2, 1]), b).unwrap().is_miu());
        }
        assert_eq!(l_obj(&obj(&[2])), VnaObject::zero());
        assert_eq!(eta(&obj(&[1, 1])), VnaMorphism::identity(&obj(&[1, 1])));
    }

    #[test]
    fn nabla_is_duplicator() {
        let x = obj(&[1, 1]);
        let n = nabla(&x).unwrap();
        assert!(is_duplicator(&x, &n));
        let e = tensor_element(&VnaElement::from_vector(&x, &[ONE, ONE.scale(2.0)]), &VnaElement::from_vector(&x, &[ONE.scale(3.0), ONE.scale(5.0)]));
        assert_eq!(n.apply(&e).to_vector(), vec![ONE.scale(3.0), ONE.scale(10.0)]);
    }

    #[test]
    fn theta_and_gamma_are_isomorphisms() {
        for (a, b, c) in [(obj(&[1]), obj(&[2]), obj(&[1])), (obj(&[2]), obj(&[1]), obj(&[1])), (obj(&[1, 2]), obj(&[1, 1]), obj(&[3]))] {
            let t = theta(&a, &b, &c);
            assert!(t.is_miu());
            assert_eq!(theta_inv(&a, &b, &c).after(&t).unwrap(), VnaMorphism::identity(&t.dom));
            let g = gamma(&a, &b);
            assert!(g.is_miu());
            assert_eq!(gamma(&b, &a).after(&g).unwrap(), VnaMorphism::identity(&g.dom));
        }
        assert_eq!(theta(&obj(&[2]), &obj(&[1]), &obj(&[1])), VnaMorphism::identity(&obj(&[2, 2])));
    }

    #[test]
    fn merge_shared_is_nabla() {
        let b = obj(&[1, 1]);
        let m = merge(std::slice::from_ref(&b), std::slice::from_ref(&b), &[0], std::slice::from_ref(&b), &[0]).unwrap();
        assert_eq!(m, nabla(&b).unwrap());
        let q = obj(&[2]);
        let swap = merge(&[q.clone(), b.clone()], std::slice::from_ref(&b), &[1], std::slice::from_ref(&q), &[0]).unwrap();
        assert_eq!(swap, gamma(&b, &q));
    }

    #[test]
    fn psi() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plus = StateVector::from_amplitudes(vec![Complex64::new(s, 0.0); 2]).unwrap();
        let f = psi_functional(&plus);
        assert!(f.is_unital() && f.is_cp());
        for k in 0..4 {
            assert!((f.matrix[(0, k)].re - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn duplicator_uniqueness() {
        for k in 1..=3 {
            let s = solve_duplicator(k);
            let sol = s.solution.expect("unique solution");
            assert!(sol.approx_eq(&nabla(&VnaObject::linf(k)).unwrap(), TOL));
        }
        let m2 = solve_miu_functional(2);
        assert_eq!(m2.rank, 2);
        assert!(!m2.feasible());
        assert!(solve_miu_functional(1).feasible());
    }
}
