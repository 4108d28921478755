//! Independent validation of the coordinate-ring strand: the minimal
//! generator counts k_(1,j)(R) produced through the reduced-module path
//! must match a brute-force symmetric-power enumeration that multiplies
//! the actual generator forms, built with no crate elimination code.

mod common;

use nsp_core::field::PrimeField;
use nsp_core::invariants::ModuleWorkbench;
use nsp_core::models::{mono_add, BundleClass, Mono, SurfaceModel};
use nsp_core::subsystems::{make_subsystem, Subsystem, SubsystemSpec};

use common::{naive_nullspace, naive_rank, sym_basis};

/// Multiply two coefficient vectors over monomial bases of two classes
/// into the basis of the sum class, test-locally.
fn mul_forms(
    p: u64,
    a: &[u64],
    basis_a: &[Mono],
    b: &[u64],
    basis_b: &[Mono],
    basis_out: &[Mono],
) -> Vec<u64> {
    let mut out = vec![0u64; basis_out.len()];
    for (i, &ca) in a.iter().enumerate() {
        if ca == 0 {
            continue;
        }
        for (j, &cb) in b.iter().enumerate() {
            if cb == 0 {
                continue;
            }
            let prod = mono_add(basis_a[i], basis_b[j]);
            let idx = basis_out.iter().position(|&m| m == prod).unwrap();
            out[idx] = (out[idx] + ca * cb) % p;
        }
    }
    out
}

struct SurfaceIdealOracle {
    p: u64,
    model: SurfaceModel,
    class: BundleClass,
    generators: Vec<Vec<u64>>,
}

impl SurfaceIdealOracle {
    fn new(sub: &Subsystem) -> Self {
        SurfaceIdealOracle {
            p: sub.field.prime(),
            model: sub.model,
            class: sub.class,
            generators: (0..sub.dim()).map(|i| sub.basis_row(i)).collect(),
        }
    }

    /// Evaluation matrix Sym^q(V) -> sections of the q-th power:
    /// each multiset column is the expanded product of its generators.
    fn eval_matrix(&self, q: usize) -> Vec<Vec<u64>> {
        let target = self
            .model
            .monomial_basis(self.class.scale(q as i64))
            .unwrap();
        let base = self.model.monomial_basis(self.class).unwrap();
        let multisets = sym_basis(self.generators.len(), q);
        let mut columns = Vec::with_capacity(multisets.len());
        for ms in &multisets {
            let mut acc = vec![1u64];
            let mut acc_basis: Vec<Mono> = vec![[0, 0, 0, 0]];
            for (step, &g) in ms.iter().enumerate() {
                let out_basis = self
                    .model
                    .monomial_basis(self.class.scale(step as i64 + 1))
                    .unwrap();
                acc = mul_forms(
                    self.p,
                    &acc,
                    &acc_basis,
                    &self.generators[g],
                    &base,
                    &out_basis,
                );
                acc_basis = out_basis.to_vec();
            }
            columns.push(acc);
        }
        // transpose into rows over the target basis
        let mut mat = vec![vec![0u64; columns.len()]; target.len()];
        for (c, col) in columns.iter().enumerate() {
            for (r, &v) in col.iter().enumerate() {
                mat[r][c] = v;
            }
        }
        mat
    }

    fn ideal_dim(&self, q: usize) -> usize {
        sym_basis(self.generators.len(), q).len() - naive_rank(self.p, &self.eval_matrix(q))
    }

    /// Minimal generators of the homogeneous ideal in degree q.
    fn minimal_generators(&self, q: usize) -> usize {
        let prev = sym_basis(self.generators.len(), q - 1);
        let target = sym_basis(self.generators.len(), q);
        let kernel = naive_nullspace(self.p, &self.eval_matrix(q - 1));
        let mut products = Vec::new();
        for kv in &kernel {
            for var in 0..self.generators.len() {
                let mut out = vec![0u64; target.len()];
                for (i, &c) in kv.iter().enumerate() {
                    if c == 0 {
                        continue;
                    }
                    let mut ms = prev[i].clone();
                    ms.push(var);
                    ms.sort_unstable();
                    let idx = target.iter().position(|m| *m == ms).unwrap();
                    out[idx] = (out[idx] + c) % self.p;
                }
                products.push(out);
            }
        }
        self.ideal_dim(q) - naive_rank(self.p, &products)
    }
}

fn check_generators(sub: &Subsystem, degrees: &[usize]) {
    let oracle = SurfaceIdealOracle::new(sub);
    let max_q = *degrees.iter().max().unwrap();
    let wb = ModuleWorkbench::new(sub, max_q + 1).unwrap();
    for &q in degrees {
        assert_eq!(
            wb.betti_r1(q - 1).unwrap(),
            oracle.minimal_generators(q),
            "generators of degree {q} for {}",
            sub.label
        );
    }
}

#[test]
fn ring_strand_matches_symmetric_power_enumeration_on_the_plane() {
    let f = PrimeField::default_field();
    let p2 = SurfaceModel::plane();
    let class = BundleClass::plane(2);
    let complete = make_subsystem(&p2, class, f, &SubsystemSpec::Complete).unwrap();
    check_generators(&complete, &[2, 3]);
    for seed in [1u64, 8] {
        let generic =
            make_subsystem(&p2, class, f, &SubsystemSpec::Generic { codim: 1, seed }).unwrap();
        check_generators(&generic, &[2, 3]);
    }
    let small =
        make_subsystem(&p2, class, f, &SubsystemSpec::Generic { codim: 2, seed: 5 }).unwrap();
    check_generators(&small, &[2, 3]);
}

#[test]
fn ring_strand_matches_symmetric_power_enumeration_on_a_ruled_surface() {
    let f = PrimeField::default_field();
    let f1 = SurfaceModel::hirzebruch(1);
    let class = BundleClass::ruled(2, 3);
    let complete = make_subsystem(&f1, class, f, &SubsystemSpec::Complete).unwrap();
    check_generators(&complete, &[2, 3]);
    let generic =
        make_subsystem(&f1, class, f, &SubsystemSpec::Generic { codim: 1, seed: 4 }).unwrap();
    check_generators(&generic, &[2, 3]);
}
