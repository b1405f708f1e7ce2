//! Direct implementations of the functions the shipped modules define.

use num_bigint::BigInt;

/// fib(1) = fib(2) = 1, computed iteratively.
pub fn fib(k: u32) -> BigInt {
    assert!(k >= 1, "fib is defined from 1");
    let (mut a, mut b) = (BigInt::from(1), BigInt::from(1));
    for _ in 2..k {
        let next = &a + &b;
        a = std::mem::replace(&mut b, next);
    }
    b
}

/// Primality by trial division.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}
