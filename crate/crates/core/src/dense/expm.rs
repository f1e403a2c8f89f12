use super::{solve, DenseMatrix};
use crate::error::Result;

const THETA_13: f64 = 5.371920351148152;

const PADE_13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// Matrix exponential by scaling and squaring with a degree 13 Padé kernel.
pub fn expm(a: &DenseMatrix) -> Result<DenseMatrix> {
    assert!(a.is_square(), "expm: square input");
    let n = a.rows();
    let norm = a.norm_one();
    let s = if norm > THETA_13 {
        (norm / THETA_13).log2().ceil().max(0.0) as i32
    } else {
        0
    };
    let a = a.scale_real(0.5f64.powi(s));
    let b = &PADE_13;
    let id = DenseMatrix::identity(n);
    let a2 = a.matmul(&a);
    let a4 = a2.matmul(&a2);
    let a6 = a4.matmul(&a2);
    let comb = |c6: f64, c4: f64, c2: f64, c0: f64| -> DenseMatrix {
        let mut m = a6.scale_real(c6);
        m = &m + &a4.scale_real(c4);
        m = &m + &a2.scale_real(c2);
        if c0 != 0.0 {
            m = &m + &id.scale_real(c0);
        }
        m
    };
    let u_inner = &a6.matmul(&comb(b[13], b[11], b[9], 0.0)) + &comb(b[7], b[5], b[3], b[1]);
    let u = a.matmul(&u_inner);
    let v = &a6.matmul(&comb(b[12], b[10], b[8], 0.0)) + &comb(b[6], b[4], b[2], b[0]);
    let mut x = solve(&(&v - &u), &(&v + &u))?;
    for _ in 0..s {
        x = x.matmul(&x);
    }
    Ok(x)
}
