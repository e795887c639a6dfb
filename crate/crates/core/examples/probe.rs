use ucdesk::density::{charsum_a};
use ucdesk::hermitian::HermMatrix;
use ucdesk::quadfield::make_field;
use num_rational::BigRational;
use num_bigint::BigInt;

fn scaled(ctx: &ucdesk::quadfield::FieldContext, s: &HermMatrix, t: &HermMatrix, k: u32) -> BigRational {
    let c = charsum_a(ctx, s, t, 3, k).unwrap();
    let e = k * (t.n as u32) * (2 * s.n as u32 - t.n as u32);
    BigRational::from_integer(c) / BigRational::from_integer(BigInt::from(3).pow(e))
}

fn main() {
    let ctx = make_field(-4).unwrap();
    // Scan S-variants against T = diag(1,3) and T = diag(3,9):
    let ss: Vec<(&str, HermMatrix)> = vec![
        ("d(1,3)", HermMatrix::diag_ints(&[1,3])),
        ("d(3,9)", HermMatrix::diag_ints(&[3,9])),
        ("d(3,3)", HermMatrix::diag_ints(&[3,3])),
        ("d(1,27)", HermMatrix::diag_ints(&[1,27])),
        ("d(9,3)", HermMatrix::diag_ints(&[9,3])),
    ];
    let ts: Vec<(&str, HermMatrix)> = vec![
        ("d(1,3)", HermMatrix::diag_ints(&[1,3])),
        ("d(3,9)", HermMatrix::diag_ints(&[3,9])),
    ];
    println!("target 112/81 = {}", BigRational::new(BigInt::from(112), BigInt::from(81)));
    for (sn, s) in &ss {
        for (tn, t) in &ts {
            let v4 = scaled(&ctx, s, t, 4);
            let v5 = scaled(&ctx, s, t, 5);
            println!("S={sn} T={tn}: k4={v4} k5={v5}");
        }
    }
}
