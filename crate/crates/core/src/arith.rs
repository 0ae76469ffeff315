//! Exact integer arithmetic, small number theory, and seeded randomness.
//!
//! Everything downstream leans on this module: checked fixed-width
//! arithmetic that reports overflow instead of wrapping, deterministic
//! 64-bit primality and factorization, p-adic valuations, k-th power
//! residue searches, and the [`SeededStream`] abstraction that makes every
//! random draw in the crate a pure function of `(seed, stream index)`.

use crate::{Error, Result};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Deterministic Miller-Rabin witnesses covering the full 64-bit range.
const MR_BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

// ---------------------------------------------------------------------------
// Checked arithmetic
// ---------------------------------------------------------------------------

/// `base^exp` in `i128`, or a resource error on overflow.
pub fn checked_pow_i128(base: i128, exp: u32) -> Result<i128> {
    base.checked_pow(exp)
        .ok_or_else(|| Error::resource(format!("integer overflow computing {base}^{exp}")))
}

/// `a + b` in `i128`, or a resource error on overflow.
pub fn checked_add_i128(a: i128, b: i128) -> Result<i128> {
    a.checked_add(b)
        .ok_or_else(|| Error::resource(format!("integer overflow computing {a} + {b}")))
}

/// `a * b` in `i128`, or a resource error on overflow.
pub fn checked_mul_i128(a: i128, b: i128) -> Result<i128> {
    a.checked_mul(b)
        .ok_or_else(|| Error::resource(format!("integer overflow computing {a} * {b}")))
}

/// `a - b` in `i128`, or a resource error on overflow.
pub fn checked_sub_i128(a: i128, b: i128) -> Result<i128> {
    a.checked_sub(b)
        .ok_or_else(|| Error::resource(format!("integer overflow computing {a} - {b}")))
}

/// Largest absolute value among the entries (0 for an empty slice).
pub fn sup_norm(v: &[i64]) -> i64 {
    v.iter().map(|x| x.abs()).max().unwrap_or(0)
}

// ---------------------------------------------------------------------------
// Modular arithmetic and primality
// ---------------------------------------------------------------------------

/// `base^exp mod modulus` with u128 intermediates; `modulus >= 1`.
pub fn mod_pow(base: u64, mut exp: u64, modulus: u64) -> u64 {
    if modulus == 1 {
        return 0;
    }
    let m = modulus as u128;
    let mut result: u128 = 1;
    let mut b = (base as u128) % m;
    while exp > 0 {
        if exp & 1 == 1 {
            result = result * b % m;
        }
        b = b * b % m;
        exp >>= 1;
    }
    result as u64
}

/// `base^exp mod modulus` for signed base, reduced into `0..modulus`.
pub fn mod_pow_signed(base: i64, exp: u64, modulus: u64) -> u64 {
    mod_pow(base.rem_euclid(modulus as i64) as u64, exp, modulus)
}

/// Deterministic primality test for u64 (trial division + Miller-Rabin).
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    // n is odd and > 37 here. Write n - 1 = d * 2^r.
    let mut d = n - 1;
    let mut r = 0u32;
    while d % 2 == 0 {
        d /= 2;
        r += 1;
    }
    'base: for &a in &MR_BASES {
        let mut x = mod_pow(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 0..r - 1 {
            x = ((x as u128 * x as u128) % n as u128) as u64;
            if x == n - 1 {
                continue 'base;
            }
        }
        return false;
    }
    true
}

/// All primes `<= n` by a sieve of Eratosthenes.
///
/// Refuses bounds above 10^8 so a typo cannot eat the machine.
pub fn primes_up_to(n: u64) -> Result<Vec<u64>> {
    if n > 100_000_000 {
        return Err(Error::resource(format!(
            "prime sieve bound {n} exceeds the 10^8 cap"
        )));
    }
    let n = n as usize;
    if n < 2 {
        return Ok(Vec::new());
    }
    let mut composite = vec![false; n + 1];
    let mut primes = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            primes.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    Ok(primes)
}

fn pollard_rho(n: u64) -> u64 {
    // Brent's cycle variant; n must be odd, composite, and not a prime power
    // fully handled by trial division. Deterministic seed schedule.
    let n128 = n as u128;
    for c in 1..64u128 {
        let f = |x: u128| (x * x % n128 + c) % n128;
        let mut x: u128 = 2;
        let mut y: u128 = 2;
        let mut d: u64 = 1;
        while d == 1 {
            x = f(x);
            y = f(f(y));
            d = num_integer::gcd(x.abs_diff(y) as u64, n);
        }
        if d != n {
            return d;
        }
    }
    // Unreachable in practice; fall back to trial division for tiny leftovers.
    let mut i = 3;
    while i * i <= n {
        if n % i == 0 {
            return i;
        }
        i += 2;
    }
    n
}

/// Prime factorization of `n >= 1` as sorted `(prime, exponent)` pairs.
pub fn factorize(n: u64) -> Result<Vec<(u64, u32)>> {
    if n == 0 {
        return Err(Error::domain("cannot factorize 0"));
    }
    let mut n = n;
    let mut factors: Vec<(u64, u32)> = Vec::new();
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47] {
        if n == 1 {
            break;
        }
        let mut e = 0;
        while n % p == 0 {
            n /= p;
            e += 1;
        }
        if e > 0 {
            factors.push((p, e));
        }
    }
    // Recursive split of whatever survives trial division.
    fn split(n: u64, out: &mut Vec<u64>) {
        if n == 1 {
            return;
        }
        if is_prime(n) {
            out.push(n);
            return;
        }
        let d = pollard_rho(n);
        split(d, out);
        split(n / d, out);
    }
    let mut rest = Vec::new();
    split(n, &mut rest);
    rest.sort_unstable();
    for p in rest {
        match factors.last_mut() {
            Some((q, e)) if *q == p => *e += 1,
            _ => factors.push((p, 1)),
        }
    }
    factors.sort_unstable();
    Ok(factors)
}

// ---------------------------------------------------------------------------
// Valuations, kernels, residues
// ---------------------------------------------------------------------------

/// Exponent of the prime `p` in `n`; `n` must be nonzero and `p` prime.
pub fn p_adic_valuation(n: i128, p: u64) -> Result<u32> {
    if n == 0 {
        return Err(Error::domain("p-adic valuation of 0 is undefined"));
    }
    if !is_prime(p) {
        return Err(Error::domain(format!("{p} is not prime")));
    }
    let p = p as i128;
    let mut n = n;
    let mut v = 0;
    while n % p == 0 {
        n /= p;
        v += 1;
    }
    Ok(v)
}

/// Product of the distinct primes dividing `n >= 1` (the squarefree kernel).
pub fn squarefree_kernel(n: u64) -> Result<u64> {
    if n == 0 {
        return Err(Error::domain("squarefree kernel of 0 is undefined"));
    }
    Ok(factorize(n)?.iter().map(|&(p, _)| p).product())
}

/// Smallest `q >= 1` that is not a k-th power residue modulo the prime `p`.
///
/// Returns `None` when every unit is a k-th power, i.e. when
/// `gcd(k, p-1) = 1` (the power map is then a bijection on units).
pub fn kth_power_nonresidue(k: u32, p: u64) -> Result<Option<u64>> {
    if !is_prime(p) {
        return Err(Error::domain(format!("{p} is not prime")));
    }
    if k == 0 {
        return Err(Error::domain("exponent k must be positive"));
    }
    let d = num_integer::gcd(k as u64, p - 1);
    if d == 1 {
        return Ok(None);
    }
    // A unit q is a k-th power mod p exactly when q^((p-1)/d) = 1.
    let e = (p - 1) / d;
    for q in 2..p {
        if mod_pow(q, e, p) != 1 {
            return Ok(Some(q));
        }
    }
    Ok(None) // p = 2: no nonresidue exists (d = 1 already caught it).
}

// ---------------------------------------------------------------------------
// Seeded randomness
// ---------------------------------------------------------------------------

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mix `(seed, stream)` into a single 64-bit state.
///
/// Two SplitMix64 finalization rounds over a golden-ratio multiple of the
/// stream index; nearby pairs land in statistically unrelated states.
fn mix(seed: u64, stream: u64) -> u64 {
    splitmix64(splitmix64(seed) ^ GOLDEN_GAMMA.wrapping_mul(stream.wrapping_add(1)))
}

/// A named random stream: a pure function of `(seed, stream index)`.
///
/// Every randomized operation in the crate takes one of these instead of a
/// shared generator, so trial `i` of a run draws the same values no matter
/// how many worker threads execute it or in what order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeededStream {
    seed: u64,
    stream: u64,
}

impl SeededStream {
    /// Stream `stream` of the run identified by `seed`.
    pub fn new(seed: u64, stream: u64) -> Self {
        SeededStream { seed, stream }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Child stream `i`, derived so it never collides with siblings.
    pub fn substream(&self, i: u64) -> SeededStream {
        SeededStream::new(mix(self.seed, self.stream), i)
    }

    /// Fresh generator positioned at the start of this stream.
    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(mix(self.seed, self.stream))
    }
}

/// Draw `s` coefficients uniformly from `{-a_height..-1, 1..a_height}`.
///
/// The draw is a fixed function of the stream: one uniform integer in
/// `1..=2*a_height` per coordinate, mapped to the negative half above
/// `a_height`.
pub fn sample_coefficients(s: u32, a_height: i64, stream: &SeededStream) -> Result<Vec<i64>> {
    if s == 0 {
        return Err(Error::domain("need at least one coefficient"));
    }
    if a_height < 1 {
        return Err(Error::domain("coefficient height must be >= 1"));
    }
    let mut rng = stream.rng();
    let mut out = Vec::with_capacity(s as usize);
    for _ in 0..s {
        let v = rng.random_range(1..=2 * a_height);
        out.push(if v <= a_height { v } else { a_height - v });
    }
    Ok(out)
}
