//! LLL reduction and Gram–Schmidt data used as enumeration preprocessing.

use nalgebra::DMatrix;

/// Gram–Schmidt data of a row basis: `mu[(i, j)] = ⟨b_i, b*_j⟩ / ‖b*_j‖²`
/// for `j < i`, and `bstar_sq[i] = ‖b*_i‖²`.
#[derive(Debug, Clone)]
pub struct Gso {
    pub mu: DMatrix<f64>,
    pub bstar_sq: Vec<f64>,
}

impl Gso {
    pub fn new(basis: &DMatrix<f64>) -> Self {
        let n = basis.nrows();
        let mut bstar = basis.clone();
        let mut mu = DMatrix::identity(n, n);
        let mut bstar_sq = vec![0.0; n];
        for i in 0..n {
            for j in 0..i {
                let m = basis.row(i).dot(&bstar.row(j)) / bstar_sq[j];
                mu[(i, j)] = m;
                for c in 0..n {
                    bstar[(i, c)] -= m * bstar[(j, c)];
                }
            }
            bstar_sq[i] = bstar.row(i).norm_squared();
        }
        Self { mu, bstar_sq }
    }
}

/// LLL-reduces the rows of `basis` in place (δ = 0.99) and returns the
/// unimodular `U` with `reduced = U · original`.
pub fn lll(basis: &mut DMatrix<f64>) -> DMatrix<i64> {
    let n = basis.nrows();
    let mut u = DMatrix::<i64>::identity(n, n);
    if n <= 1 {
        return u;
    }
    let delta = 0.99;
    let mut gso = Gso::new(basis);
    let mut kk = 1;
    let mut guard = 0usize;
    while kk < n {
        guard += 1;
        if guard > 100_000 {
            break;
        }
        for j in (0..kk).rev() {
            let q = gso.mu[(kk, j)].round();
            if q != 0.0 {
                for c in 0..n {
                    basis[(kk, c)] -= q * basis[(j, c)];
                }
                let uj = u.row(j).clone_owned();
                let qi = q as i64;
                for c in 0..n {
                    u[(kk, c)] -= qi * uj[c];
                }
                for l in 0..=j {
                    let m = if l == j { 1.0 } else { gso.mu[(j, l)] };
                    gso.mu[(kk, l)] -= q * m;
                }
            }
        }
        let lhs = gso.bstar_sq[kk];
        let m = gso.mu[(kk, kk - 1)];
        if lhs >= (delta - m * m) * gso.bstar_sq[kk - 1] {
            kk += 1;
        } else {
            basis.swap_rows(kk, kk - 1);
            u.swap_rows(kk, kk - 1);
            gso = Gso::new(basis);
            kk = (kk - 1).max(1);
        }
    }
    u
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lll_recovers_short_basis() {
        // unimodular mess of the identity
        let mut b = DMatrix::from_row_slice(3, 3, &[1.0, 7.0, 3.0, 0.0, 1.0, 5.0, 0.0, 0.0, 1.0]);
        let orig = b.clone();
        let u = lll(&mut b);
        let uf = u.map(|x| x as f64);
        assert!((&uf * &orig - &b).norm() < 1e-9);
        assert!(u.map(|x| x as f64).determinant().abs() - 1.0 < 1e-9);
        for i in 0..3 {
            assert!((b.row(i).norm() - 1.0).abs() < 1e-9);
        }
    }
}
