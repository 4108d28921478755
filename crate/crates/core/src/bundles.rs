//! Splitting types of kernel bundles on the line.
//!
//! For a base point free subspace W of the degree-n forms, the kernel
//! M_W of the evaluation W (x) O -> O(n) splits as a direct sum of line
//! bundles O(-a_i). The twists are recovered from the jump function
//! k -> h^0(M_W(k)), which is the kernel dimension of the multiplication
//! W (x) (degree-k forms) -> (degree-(n+k) forms): its first differences
//! count the twists that are <= k. Restricting a surface subsystem to a
//! rational curve adds one trivial summand for each independent section
//! vanishing on the curve.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::field::PrimeField;
use crate::matrix::Matrix;
use crate::models::RationalCurve;
use crate::subsystems::{base_point_free_on_line, Subsystem};

/// The multiset of twists of a totally decomposed bundle on the line:
/// M = (+) O(-a_i), with the a_i sorted ascending. Zero twists record
/// trivial summands of restricted bundles.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplittingType {
    pub twists: Vec<u64>,
    /// Degree n of the forms the subsystem sits in.
    pub degree: usize,
    /// Codimension of the subsystem inside the full space of degree-n forms.
    pub codim: usize,
    /// h^0(M(k)) for k = 0..=n, the profile the twists were read from.
    pub h0_profile: Vec<usize>,
}

impl SplittingType {
    pub fn rank(&self) -> usize {
        self.twists.len()
    }

    pub fn twist_sum(&self) -> u64 {
        self.twists.iter().sum()
    }

    /// Sum of the `count` largest twists.
    pub fn top_sum(&self, count: usize) -> u64 {
        self.twists.iter().rev().take(count).sum()
    }
}

/// Whether H^1 of (wedge^i M)(j) vanishes for M with the given splitting
/// type: every i-fold twist sum must stay within j + 1. For i larger
/// than the rank the wedge power is zero and the answer is trivially
/// true; for i = 0 it is the line bundle O(j) itself.
pub fn wedge_h1_vanishes(st: &SplittingType, i: usize, j: i64) -> bool {
    if i == 0 {
        return j >= -1;
    }
    if i > st.rank() {
        return true;
    }
    st.top_sum(i) as i64 <= j + 1
}

/// Splitting type of the kernel bundle of a base point free subspace of
/// the degree-n forms, given as a full-row-rank coefficient matrix over
/// the descending monomial basis.
pub fn splitting_type_on_line(field: PrimeField, basis: &Matrix) -> Result<SplittingType, Error> {
    let n = basis.cols() - 1;
    let dim_w = basis.rows();
    if dim_w == 0 || basis.rank() != dim_w {
        return Err(Error::dim(
            "subsystem basis on the line must have full row rank".to_string(),
        ));
    }
    let rows: Vec<Vec<u64>> = (0..dim_w).map(|i| basis.row(i)).collect();
    if !base_point_free_on_line(field, &rows).base_point_free {
        return Err(Error::BasePoint(
            "the subsystem has a base point on the line".to_string(),
        ));
    }
    let codim = n + 1 - dim_w;
    let bundle_rank = dim_w - 1;

    // h^0(M(k)) = dim ker( W (x) H^0(O(k)) -> H^0(O(n+k)) )
    let mut profile = Vec::with_capacity(n + 1);
    let mut counts = Vec::with_capacity(n + 1);
    let mut twists = Vec::with_capacity(bundle_rank);
    for k in 0..=n {
        let mut triplets = Vec::new();
        for (i, w) in rows.iter().enumerate() {
            for shift in 0..=k {
                let col = i * (k + 1) + shift;
                for (pos, &c) in w.iter().enumerate() {
                    if c != 0 {
                        triplets.push((pos + shift, col, c));
                    }
                }
            }
        }
        let mult = Matrix::from_triplets(field, n + k + 1, dim_w * (k + 1), triplets)?;
        profile.push(mult.kernel_dim());
        let prev = if k == 0 { 0 } else { counts[k - 1] };
        let here = profile[k] - if k == 0 { 0 } else { profile[k - 1] };
        counts.push(here);
        assert!(here >= prev, "twist counts must be nondecreasing");
        for _ in prev..here {
            twists.push(k as u64);
        }
        if here == bundle_rank {
            break;
        }
    }
    assert_eq!(twists.len(), bundle_rank, "kernel bundle rank");
    assert_eq!(
        twists.iter().sum::<u64>(),
        n as u64,
        "twists sum to the degree"
    );
    // fill the reported profile out to k = n from the twists
    for k in profile.len()..=n {
        profile.push(
            twists
                .iter()
                .map(|&a| (k as u64 + 1).saturating_sub(a) as usize)
                .sum(),
        );
    }
    Ok(SplittingType {
        twists,
        degree: n,
        codim,
        h0_profile: profile,
    })
}

/// Splitting type of the kernel bundle of a surface subsystem restricted
/// to a rational curve: one zero twist per independent section of V
/// vanishing on the curve, plus the splitting type of the image subsystem
/// on the line.
pub fn restricted_kernel_splitting(
    sub: &Subsystem,
    curve: &RationalCurve,
) -> Result<SplittingType, Error> {
    let restricted = sub.restricted_basis(curve)?;
    let image = restricted.row_space_rref();
    let zeros = sub.dim() - image.rows();
    let line_part = splitting_type_on_line(sub.field, &image)?;
    let mut twists = vec![0u64; zeros];
    twists.extend(line_part.twists.iter().copied());
    let degree = line_part.degree;
    let profile = (0..=degree)
        .map(|k| {
            twists
                .iter()
                .map(|&a| (k as u64 + 1).saturating_sub(a) as usize)
                .sum()
        })
        .collect();
    let st = SplittingType {
        twists,
        degree,
        codim: line_part.codim,
        h0_profile: profile,
    };
    assert_eq!(st.rank(), sub.dim() - 1, "restricted kernel bundle rank");
    Ok(st)
}

/// The sufficient criterion for Property N^S_p through the curve: all
/// wedge powers i+2 (0 <= i <= p) of the restricted kernel bundle,
/// twisted by the self-intersection degree of the curve, must have no
/// H^1. Twisting by higher multiples of the curve class only increases
/// the twist, so checking the smallest one suffices.
pub fn nsp_restriction_criterion(
    sub: &Subsystem,
    curve: &RationalCurve,
    p: usize,
) -> Result<bool, Error> {
    let st = restricted_kernel_splitting(sub, curve)?;
    let m = curve.self_intersection(&sub.model)?;
    Ok((0..=p).all(|i| wedge_h1_vanishes(&st, i + 2, m)))
}
