//! Quaternion products, conjugation and rotation of a vector.

use quattrack::{Quaternion, Vec3};

fn main() {
    let i = Quaternion::new(0.0, 1.0, 0.0, 0.0);
    let j = Quaternion::new(0.0, 0.0, 1.0, 0.0);
    println!("i j = {}", i * j);
    println!("j i = {}", j * i);

    let p = Quaternion::new(1.0, 1.0, 0.0, 0.0);
    let q = Quaternion::new(1.0, 0.0, 1.0, 0.0);
    println!("(1 + i)(1 + j) = {}", p * q);
    println!(
        "|pq| = {:.6}, |p||q| = {:.6}",
        (p * q).norm(),
        p.norm() * q.norm()
    );
    println!(
        "(pq)* = {}, q* p* = {}",
        (p * q).conj(),
        q.conj() * p.conj()
    );

    // a quarter turn about z maps x to y
    let r = Quaternion::from_axis_angle(Vec3::z(), std::f64::consts::FRAC_PI_2);
    let x = Quaternion::pure(Vec3::x());
    let rotated = r * x * r.conj();
    println!(
        "q x q* = {rotated}  (scalar part {:.1e})",
        rotated.scalar_part()
    );
}
