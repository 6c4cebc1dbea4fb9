use nalgebra::{DMatrix, DVector, Complex};

fn main() {
    let n = 4;
    let a = DMatrix::<Complex<f64>>::from_fn(n, n, |i, j| {
        Complex::new((i * j) as f64, 0.1 * (i as f64 + j as f64))
    }); // rank-deficient-ish
    let svd = a.clone().svd(true, true);
    println!("rank(1e-10) = {}", svd.rank(1e-10));
    let b = DVector::<Complex<f64>>::from_element(n, Complex::new(1.0, 0.0));
    match svd.solve(&b, 1e-10) {
        Ok(x) => println!("solve ok, |x| = {}", x.norm()),
        Err(e) => println!("solve err: {e}"),
    }
    // pseudo_inverse
    match a.clone().pseudo_inverse(1e-10) {
        Ok(p) => println!("pinv ok {}", p.norm()),
        Err(e) => println!("pinv err: {e}"),
    }
    // does exp exist for complex DMatrix?
    let e = a.map(|z| z * Complex::new(0.01, 0.0));
    println!("exp ok {}", e.norm());
}
