//! Independent oracles for the acceptance tests: textbook Gaussian
//! elimination and symmetric-power ideal enumeration, sharing no code
//! with the crate's own elimination or Koszul paths.

// written in indexed textbook style on purpose
#![allow(clippy::needless_range_loop, dead_code)]

/// Textbook row reduction over F_p; returns the rank.
pub fn naive_rank(p: u64, rows: &[Vec<u64>]) -> usize {
    let mut mat: Vec<Vec<u64>> = rows
        .iter()
        .map(|r| r.iter().map(|&x| x % p).collect())
        .collect();
    let cols = mat.first().map_or(0, |r| r.len());
    let mut rank = 0usize;
    for col in 0..cols {
        let Some(pivot) = (rank..mat.len()).find(|&r| mat[r][col] != 0) else {
            continue;
        };
        mat.swap(rank, pivot);
        let inv = naive_inv(p, mat[rank][col]);
        for c in col..cols {
            mat[rank][c] = mat[rank][c] * inv % p;
        }
        for r in 0..mat.len() {
            if r != rank && mat[r][col] != 0 {
                let factor = mat[r][col];
                for c in col..cols {
                    let sub = factor * mat[rank][c] % p;
                    mat[r][c] = (mat[r][c] + p - sub) % p;
                }
            }
        }
        rank += 1;
        if rank == mat.len() {
            break;
        }
    }
    rank
}

/// Nullspace basis by back-substitution from the reduced echelon form.
pub fn naive_nullspace(p: u64, rows: &[Vec<u64>]) -> Vec<Vec<u64>> {
    let cols = rows.first().map_or(0, |r| r.len());
    let mut mat: Vec<Vec<u64>> = rows
        .iter()
        .map(|r| r.iter().map(|&x| x % p).collect())
        .collect();
    let mut pivots: Vec<usize> = Vec::new();
    let mut rank = 0usize;
    for col in 0..cols {
        let Some(pivot) = (rank..mat.len()).find(|&r| mat[r][col] != 0) else {
            continue;
        };
        mat.swap(rank, pivot);
        let inv = naive_inv(p, mat[rank][col]);
        for c in 0..cols {
            mat[rank][c] = mat[rank][c] * inv % p;
        }
        for r in 0..mat.len() {
            if r != rank && mat[r][col] != 0 {
                let factor = mat[r][col];
                for c in 0..cols {
                    let sub = factor * mat[rank][c] % p;
                    mat[r][c] = (mat[r][c] + p - sub) % p;
                }
            }
        }
        pivots.push(col);
        rank += 1;
    }
    let mut basis = Vec::new();
    for free in (0..cols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![0u64; cols];
        v[free] = 1;
        for (r, &pc) in pivots.iter().enumerate() {
            v[pc] = (p - mat[r][free] % p) % p;
        }
        basis.push(v);
    }
    basis
}

fn naive_inv(p: u64, a: u64) -> u64 {
    // Fermat inverse by square-and-multiply.
    let mut base = a % p;
    let mut exp = p - 2;
    let mut acc = 1u64;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % p;
        }
        base = base * base % p;
        exp >>= 1;
    }
    acc
}

/// Monomials of degree q in `vars` variables, as sorted exponent-index
/// multisets, enumerated lexicographically.
pub fn sym_basis(vars: usize, q: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::new();
    fn recurse(
        vars: usize,
        q: usize,
        start: usize,
        current: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if current.len() == q {
            out.push(current.clone());
            return;
        }
        for v in start..vars {
            current.push(v);
            recurse(vars, q, v, current, out);
            current.pop();
        }
    }
    recurse(vars, q, 0, &mut current, &mut out);
    out
}

/// Homogeneous ideal data of the rational normal curve of degree n:
/// everything derived from the evaluation Sym^q(V) -> (forms of degree
/// q n) for the complete system V of the degree-n forms on the line.
pub struct LineIdealOracle {
    pub p: u64,
    pub n: usize,
}

impl LineIdealOracle {
    /// Matrix of the evaluation map in degree q: rows indexed by the
    /// target forms (v-exponent 0..=qn), columns by sym_basis(n+1, q).
    pub fn eval_matrix(&self, q: usize) -> Vec<Vec<u64>> {
        let basis = sym_basis(self.n + 1, q);
        let rows = q * self.n + 1;
        let mut mat = vec![vec![0u64; basis.len()]; rows];
        for (col, multiset) in basis.iter().enumerate() {
            // basis element i of V is u^(n-i) v^i, so the product has
            // v-exponent equal to the multiset sum
            let v_exp: usize = multiset.iter().sum();
            mat[v_exp][col] = 1;
        }
        mat
    }

    pub fn sym_dim(&self, q: usize) -> usize {
        sym_basis(self.n + 1, q).len()
    }

    /// Dimension of the degree-q part of the ideal.
    pub fn ideal_dim(&self, q: usize) -> usize {
        self.sym_dim(q) - naive_rank(self.p, &self.eval_matrix(q))
    }

    /// Basis of the degree-q part of the ideal, as coefficient vectors
    /// over sym_basis(n+1, q).
    pub fn ideal_basis(&self, q: usize) -> Vec<Vec<u64>> {
        naive_nullspace(self.p, &self.eval_matrix(q))
    }

    /// Coefficient vectors over sym_basis(n+1, q) of all products
    /// (variable) x (ideal element of degree q-1).
    fn ideal_times_linear(&self, q: usize) -> Vec<Vec<u64>> {
        assert!(q >= 1);
        let prev = sym_basis(self.n + 1, q - 1);
        let target = sym_basis(self.n + 1, q);
        let mut products = Vec::new();
        for kernel_vec in self.ideal_basis(q - 1) {
            for var in 0..=self.n {
                let mut out = vec![0u64; target.len()];
                for (i, &c) in kernel_vec.iter().enumerate() {
                    if c == 0 {
                        continue;
                    }
                    let mut multiset = prev[i].clone();
                    multiset.push(var);
                    multiset.sort_unstable();
                    let idx = target
                        .iter()
                        .position(|m| *m == multiset)
                        .expect("product multiset in the target basis");
                    out[idx] = (out[idx] + c) % self.p;
                }
                products.push(out);
            }
        }
        products
    }

    /// Number of minimal ideal generators in degree q.
    pub fn minimal_generators(&self, q: usize) -> usize {
        self.ideal_dim(q) - naive_rank(self.p, &self.ideal_times_linear(q))
    }

    /// Number of minimal first syzygies in degree q + 1 among the
    /// degree-q generators; valid when the ideal has no generators in
    /// degrees below q or at q + 1 (asserted).
    pub fn minimal_first_syzygies_after(&self, q: usize) -> usize {
        assert_eq!(self.ideal_dim(q - 1), 0, "no generators below degree {q}");
        assert_eq!(
            self.minimal_generators(q + 1),
            0,
            "no generators in degree {}",
            q + 1
        );
        let gens = self.ideal_basis(q);
        // relations sum_i l_i g_i = 0 with l_i linear
        let syzygy_space = (self.n + 1) * gens.len();
        let image_rank = naive_rank(self.p, &self.ideal_times_linear(q + 1));
        syzygy_space - image_rank
    }
}

/// Kernel dimension of the multiplication (subsystem of degree-n forms)
/// (x) (degree-k forms) -> (degree-(n+k) forms), built and reduced
/// independently of the crate.
pub fn naive_line_kernel_dim(p: u64, basis_rows: &[Vec<u64>], k: usize) -> usize {
    let n = basis_rows[0].len() - 1;
    let cols = basis_rows.len() * (k + 1);
    let rows = n + k + 1;
    let mut mat = vec![vec![0u64; cols]; rows];
    for (i, w) in basis_rows.iter().enumerate() {
        for shift in 0..=k {
            let col = i * (k + 1) + shift;
            for (pos, &c) in w.iter().enumerate() {
                mat[pos + shift][col] = (mat[pos + shift][col] + c) % p;
            }
        }
    }
    cols - naive_rank(p, &mat)
}
