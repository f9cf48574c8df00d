//! Smith normal form of small nonsingular integer matrices.

/// `U · M · V = diag(d)` with `U`, `V` unimodular and `d_i | d_{i+1}`, `d_i > 0`.
#[derive(Debug, Clone)]
pub struct Smith {
    pub u: Vec<Vec<i128>>,
    pub v: Vec<Vec<i128>>,
    pub diag: Vec<i128>,
}

fn identity(n: usize) -> Vec<Vec<i128>> {
    (0..n)
        .map(|i| (0..n).map(|j| i128::from(i == j)).collect())
        .collect()
}

pub fn smith(m: &[Vec<i64>]) -> Option<Smith> {
    let n = m.len();
    let mut a: Vec<Vec<i128>> = m
        .iter()
        .map(|r| r.iter().map(|&x| x as i128).collect())
        .collect();
    let mut u = identity(n);
    let mut v = identity(n);

    for t in 0..n {
        loop {
            // smallest nonzero entry of the trailing block goes to (t, t)
            let mut pivot = None;
            for i in t..n {
                for j in t..n {
                    if a[i][j] != 0
                        && pivot
                            .is_none_or(|(pi, pj): (usize, usize)| a[i][j].abs() < a[pi][pj].abs())
                    {
                        pivot = Some((i, j));
                    }
                }
            }
            let (pi, pj) = pivot?;
            a.swap(t, pi);
            u.swap(t, pi);
            for row in a.iter_mut().chain(v.iter_mut()) {
                row.swap(t, pj);
            }

            let p = a[t][t];
            let mut clean = true;
            for i in t + 1..n {
                let q = a[i][t].div_euclid(p);
                if q != 0 {
                    for j in 0..n {
                        a[i][j] -= q * a[t][j];
                        u[i][j] -= q * u[t][j];
                    }
                }
                clean &= a[i][t] == 0;
            }
            for j in t + 1..n {
                let q = a[t][j].div_euclid(p);
                if q != 0 {
                    for i in 0..n {
                        a[i][j] -= q * a[i][t];
                        v[i][j] -= q * v[i][t];
                    }
                }
                clean &= a[t][j] == 0;
            }
            if !clean {
                continue;
            }
            // divisibility of the trailing block
            let bad = (t + 1..n).find(|&i| (t + 1..n).any(|j| a[i][j] % p != 0));
            match bad {
                Some(i) => {
                    for j in 0..n {
                        a[t][j] += a[i][j];
                        u[t][j] += u[i][j];
                    }
                }
                None => break,
            }
        }
        if a[t][t] < 0 {
            for j in 0..n {
                a[t][j] = -a[t][j];
                u[t][j] = -u[t][j];
            }
        }
    }
    let diag = (0..n).map(|i| a[i][i]).collect();
    Some(Smith { u, v, diag })
}

/// Inverse of a unimodular integer matrix (exact, via fraction-free Gauss–Jordan).
pub fn unimodular_inverse(m: &[Vec<i128>]) -> Option<Vec<Vec<i128>>> {
    let n = m.len();
    let mut a: Vec<Vec<i128>> = m
        .iter()
        .zip(identity(n))
        .map(|(r, id)| r.iter().copied().chain(id).collect())
        .collect();
    // column-wise Euclid keeps everything integral
    for c in 0..n {
        loop {
            let nz: Vec<usize> = (c..n).filter(|&r| a[r][c] != 0).collect();
            if nz.is_empty() {
                return None;
            }
            let p = *nz.iter().min_by_key(|&&r| a[r][c].abs())?;
            a.swap(c, p);
            let mut done = true;
            for r in c + 1..n {
                if a[r][c] != 0 {
                    let q = a[r][c].div_euclid(a[c][c]);
                    for j in 0..2 * n {
                        a[r][j] -= q * a[c][j];
                    }
                    done &= a[r][c] == 0;
                }
            }
            if done {
                break;
            }
        }
        if a[c][c].abs() != 1 {
            return None;
        }
        if a[c][c] < 0 {
            for j in 0..2 * n {
                a[c][j] = -a[c][j];
            }
        }
    }
    for c in (0..n).rev() {
        for r in 0..c {
            let q = a[r][c];
            if q != 0 {
                for j in 0..2 * n {
                    a[r][j] -= q * a[c][j];
                }
            }
        }
    }
    Some(a.into_iter().map(|r| r[n..].to_vec()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat_mul(a: &[Vec<i128>], b: &[Vec<i128>]) -> Vec<Vec<i128>> {
        let n = a.len();
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| (0..n).map(|l| a[i][l] * b[l][j]).sum())
                    .collect()
            })
            .collect()
    }

    #[test]
    fn smith_of_one_plus_i() {
        let m = vec![vec![1, 1], vec![-1, 1]];
        let s = smith(&m).unwrap();
        assert_eq!(s.diag, vec![1, 2]);
        let m128: Vec<Vec<i128>> = m
            .iter()
            .map(|r| r.iter().map(|&x| x as i128).collect())
            .collect();
        let d = mat_mul(&mat_mul(&s.u, &m128), &s.v);
        assert_eq!(d, vec![vec![1, 0], vec![0, 2]]);
    }

    #[test]
    fn smith_divisibility_chain() {
        let m = vec![vec![2, 0], vec![0, 3]];
        let s = smith(&m).unwrap();
        assert_eq!(s.diag, vec![1, 6]);
        assert!(smith(&[vec![1, 2], vec![2, 4]]).is_none());
    }

    #[test]
    fn unimodular_inverse_roundtrip() {
        let m = vec![vec![2, 3, 1], vec![1, 2, 1], vec![0, 1, 2]];
        let inv = unimodular_inverse(&m).unwrap();
        assert_eq!(mat_mul(&m, &inv), identity(3));
        assert!(unimodular_inverse(&[vec![2, 0], vec![0, 1]]).is_none());
    }
}
