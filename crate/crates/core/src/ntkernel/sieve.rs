//! Prime generation: an odd-only sieve of Eratosthenes, a cached table of
//! small primes, and an ascending segmented prime stream.

use std::sync::OnceLock;

use super::primality::is_prime_u64;

/// All primes `<= bound`, ascending. Empty when `bound < 2`.
pub fn primes_upto(bound: u64) -> Vec<u64> {
    if bound < 2 {
        return Vec::new();
    }
    let bound = usize::try_from(bound).expect("sieve bound exceeds address space");
    // index i represents 2i + 1
    let half = bound / 2 + 1;
    let mut composite = vec![false; half];
    composite[0] = true;
    let mut i = 1;
    while (2 * i + 1) * (2 * i + 1) <= bound {
        if !composite[i] {
            let p = 2 * i + 1;
            let mut j = p * p / 2;
            while j < half {
                composite[j] = true;
                j += p;
            }
        }
        i += 1;
    }
    let mut out = Vec::with_capacity(estimate_count(bound as u64));
    out.push(2);
    out.extend(
        composite
            .iter()
            .enumerate()
            .filter(|&(i, &c)| !c && 2 * i + 1 <= bound)
            .map(|(i, _)| (2 * i + 1) as u64),
    );
    out
}

/// The prime-counting function π(x).
pub fn prime_count(x: u64) -> usize {
    if x < 2 {
        return 0;
    }
    if x <= SMALL_LIMIT {
        return small_primes().partition_point(|&p| p <= x);
    }
    primes_upto(x).len()
}

fn estimate_count(x: u64) -> usize {
    if x < 17 {
        return 8;
    }
    let xf = x as f64;
    (1.26 * xf / xf.ln()) as usize
}

pub(crate) const SMALL_LIMIT: u64 = 1 << 21;

/// Cached primes below `2^21`.
pub fn small_primes() -> &'static [u64] {
    static TABLE: OnceLock<Vec<u64>> = OnceLock::new();
    TABLE.get_or_init(|| primes_upto(SMALL_LIMIT))
}

/// Primes `<= bound`, borrowing the cache when it covers the request.
pub(crate) fn primes_upto_cached(bound: u64) -> std::borrow::Cow<'static, [u64]> {
    if bound <= SMALL_LIMIT {
        let table = small_primes();
        let end = table.partition_point(|&p| p <= bound);
        std::borrow::Cow::Borrowed(&table[..end])
    } else {
        std::borrow::Cow::Owned(primes_upto(bound))
    }
}

/// Least prime `>= n`, or `None` if it would not fit in a `u64`.
pub fn next_prime(n: u64) -> Option<u64> {
    if n <= 2 {
        return Some(2);
    }
    let mut c = if n % 2 == 0 { n.checked_add(1)? } else { n };
    loop {
        if is_prime_u64(c) {
            return Some(c);
        }
        c = c.checked_add(2)?;
    }
}

const SEGMENT: u64 = 1 << 18;

/// Ascending stream of primes in `[start, cap]`, produced segment by segment.
#[derive(Debug, Clone)]
pub struct PrimeStream {
    base: Vec<u64>,
    next_lo: u64,
    cap: u64,
    buffer: Vec<u64>,
    pos: usize,
}

impl PrimeStream {
    pub fn new(start: u64, cap: u64) -> Self {
        Self {
            base: Vec::new(),
            next_lo: start,
            cap,
            buffer: Vec::new(),
            pos: 0,
        }
    }

    /// Stream over every prime up to `cap`.
    pub fn all(cap: u64) -> Self {
        Self::new(2, cap)
    }

    fn refill(&mut self) -> bool {
        while self.pos >= self.buffer.len() {
            if self.next_lo > self.cap {
                return false;
            }
            let lo = self.next_lo;
            let hi = lo.saturating_add(SEGMENT - 1).min(self.cap);
            self.next_lo = hi.saturating_add(1);
            if hi == u64::MAX {
                self.next_lo = u64::MAX;
                self.cap = self.cap.min(u64::MAX - 1);
            }
            self.buffer.clear();
            self.pos = 0;
            self.sieve_segment(lo, hi);
        }
        true
    }

    fn sieve_segment(&mut self, lo: u64, hi: u64) {
        let root = isqrt(hi);
        if self.base.last().copied().unwrap_or(0) < root {
            self.base = primes_upto(root.max(2).saturating_mul(2).min(1 << 32));
        }
        let len = (hi - lo + 1) as usize;
        let mut composite = vec![false; len];
        for &p in &self.base {
            if p * p > hi {
                break;
            }
            let first = (lo.div_ceil(p) * p).max(p * p);
            let mut m = first;
            while m <= hi {
                composite[(m - lo) as usize] = true;
                m += p;
            }
        }
        for (i, &c) in composite.iter().enumerate() {
            let v = lo + i as u64;
            if !c && v >= 2 {
                self.buffer.push(v);
            }
        }
    }
}

impl Iterator for PrimeStream {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        if !self.refill() {
            return None;
        }
        let p = self.buffer[self.pos];
        self.pos += 1;
        Some(p)
    }
}

pub(crate) fn isqrt(n: u64) -> u64 {
    if n < 2 {
        return n;
    }
    let mut x = (n as f64).sqrt() as u64;
    while x.saturating_mul(x) > n {
        x -= 1;
    }
    while (x + 1).saturating_mul(x + 1) <= n {
        x += 1;
    }
    x
}
