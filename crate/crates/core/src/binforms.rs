//! Binary forms (homogeneous polynomials in two variables) over F_p.
//!
//! A form of degree n is a coefficient vector of length n+1 where index
//! i holds the coefficient of u^(n-i) v^i, matching the descending
//! monomial order used for graded piece bases.

use crate::field::PrimeField;

/// Degree of a coefficient vector (length - 1); zero-length is invalid.
pub fn degree(form: &[u64]) -> usize {
    assert!(!form.is_empty(), "empty coefficient vector");
    form.len() - 1
}

pub fn is_zero(form: &[u64]) -> bool {
    form.iter().all(|&c| c == 0)
}

/// Product of two forms; degrees add.
pub fn mul(field: &PrimeField, a: &[u64], b: &[u64]) -> Vec<u64> {
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate() {
            if bj != 0 {
                out[i + j] = field.add(out[i + j], field.mul(ai, bj));
            }
        }
    }
    out
}

/// k-th power; `pow(f, 0)` is the constant form 1.
pub fn pow(field: &PrimeField, form: &[u64], k: usize) -> Vec<u64> {
    let mut out = vec![1u64];
    for _ in 0..k {
        out = mul(field, &out, form);
    }
    out
}

pub fn scale(field: &PrimeField, form: &[u64], c: u64) -> Vec<u64> {
    form.iter().map(|&x| field.mul(x, c)).collect()
}

/// Evaluate at a point (u0 : v0).
pub fn eval(field: &PrimeField, form: &[u64], u0: u64, v0: u64) -> u64 {
    let n = degree(form);
    let mut acc = 0u64;
    for (i, &c) in form.iter().enumerate() {
        if c != 0 {
            let term = field.mul(field.pow(u0, (n - i) as u64), field.pow(v0, i as u64));
            acc = field.add(acc, field.mul(c, term));
        }
    }
    acc
}

/// Whether a degree-1 form and another form share a projective root.
/// Used to reject degenerate curve sections.
pub fn share_root_with_linear(field: &PrimeField, linear: &[u64], other: &[u64]) -> bool {
    assert_eq!(degree(linear), 1);
    if is_zero(linear) || is_zero(other) {
        return true;
    }
    // linear = alpha*u + beta*v vanishes at (-beta : alpha).
    let root_u = field.neg(linear[1]);
    let root_v = linear[0];
    eval(field, other, root_u, root_v) == 0
}

/// Drop trailing zero coefficients; the zero polynomial stays as [0].
fn poly_trim(v: &mut Vec<u64>) {
    while v.len() > 1 && *v.last().unwrap() == 0 {
        v.pop();
    }
}

fn poly_is_zero(v: &[u64]) -> bool {
    v.len() == 1 && v[0] == 0
}

/// Univariate polynomial remainder a mod b, coefficients ascending in x.
/// `b` must be trimmed and nonzero.
fn poly_rem(field: &PrimeField, a: &mut Vec<u64>, b: &[u64]) {
    let db = b.len() - 1;
    let lead_inv = field.inv(b[db]);
    loop {
        poly_trim(a);
        if poly_is_zero(a) || a.len() - 1 < db {
            return;
        }
        let da = a.len() - 1;
        let c = field.mul(a[da], lead_inv);
        for (k, &bk) in b.iter().enumerate() {
            let idx = da - db + k;
            a[idx] = field.sub(a[idx], field.mul(c, bk));
        }
        a.pop();
        if a.is_empty() {
            a.push(0);
        }
    }
}

fn poly_gcd(field: &PrimeField, mut a: Vec<u64>, mut b: Vec<u64>) -> Vec<u64> {
    poly_trim(&mut a);
    poly_trim(&mut b);
    loop {
        if poly_is_zero(&b) {
            return a;
        }
        if a.len() < b.len() {
            std::mem::swap(&mut a, &mut b);
            continue;
        }
        poly_rem(field, &mut a, &b);
        std::mem::swap(&mut a, &mut b);
    }
}

/// True when the given forms have no common projective root, i.e. the
/// span they generate is base point free on the line. Exact.
pub fn coprime(field: &PrimeField, forms: &[Vec<u64>]) -> bool {
    let nonzero: Vec<&Vec<u64>> = forms.iter().filter(|f| !is_zero(f)).collect();
    if nonzero.is_empty() {
        return false;
    }
    // Common root at (1 : 0) means every leading coefficient vanishes.
    if nonzero.iter().all(|f| f[0] == 0) {
        return false;
    }
    // Dehomogenize at v = 1: index i carries x^(n-i), so reverse for
    // ascending univariate coefficients.
    let mut gcd: Option<Vec<u64>> = None;
    for form in nonzero {
        let mut uni: Vec<u64> = form.iter().rev().copied().collect();
        while uni.len() > 1 && *uni.last().unwrap() == 0 {
            uni.pop();
        }
        gcd = Some(match gcd {
            None => uni,
            Some(g) => poly_gcd(field, g, uni),
        });
        if gcd.as_ref().map(|g| g.len() == 1 && g[0] != 0) == Some(true) {
            return true;
        }
    }
    let g = gcd.unwrap();
    g.len() == 1 && g[0] != 0
}
