//! Prime-order subgroup arithmetic and Pedersen-style commitments.
//!
//! `C(v, r) = g^v · h^r mod p` in the order-`q` subgroup of `Z_p^*`.
//! Commitments are additively homomorphic: `C(a, r) · C(b, s) = C(a + b, r + s)`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

use crate::error::ParseError;
use crate::hash::sha256;

const H_DOMAIN: &[u8] = b"antsreview/pedersen-h";

const STANDARD_P: &str = "9cd22e5fafee8d5448d94582e1f18a15399779fc35e51cb26ac32737afddf1ef";
const STANDARD_Q: &str = "4e69172fd7f746aa246ca2c170f8c50a9ccbbcfe1af28e593561939bd7eef8f7";

fn parse_uint(s: &str) -> Result<BigUint, ParseError> {
    let bad = || ParseError::Integer(s.to_string());
    match s.strip_prefix("0x") {
        Some(digits) if !digits.is_empty() => BigUint::parse_bytes(digits.as_bytes(), 16).ok_or_else(bad),
        Some(_) => Err(bad()),
        None if !s.is_empty() => BigUint::parse_bytes(s.as_bytes(), 10).ok_or_else(bad),
        None => Err(bad()),
    }
}

fn to_hex(v: &BigUint) -> String {
    format!("0x{}", v.to_str_radix(16))
}

struct UintVisitor;

impl de::Visitor<'_> for UintVisitor {
    type Value = BigUint;

    fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("a 0x-hex string, decimal string or non-negative integer")
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<BigUint, E> {
        Ok(v.into())
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<BigUint, E> {
        parse_uint(v).map_err(E::custom)
    }
}

macro_rules! uint_newtype {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
        pub struct $name(pub BigUint);

        impl $name {
            pub fn value(&self) -> &BigUint {
                &self.0
            }
        }

        impl From<u64> for $name {
            fn from(v: u64) -> Self {
                $name(v.into())
            }
        }

        impl From<BigUint> for $name {
            fn from(v: BigUint) -> Self {
                $name(v)
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&to_hex(&self.0))
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}({})", stringify!($name), to_hex(&self.0))
            }
        }

        impl FromStr for $name {
            type Err = ParseError;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                parse_uint(s).map($name)
            }
        }

        impl Serialize for $name {
            fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
                serializer.serialize_str(&to_hex(&self.0))
            }
        }

        impl<'de> Deserialize<'de> for $name {
            fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
                deserializer.deserialize_any(UintVisitor).map($name)
            }
        }
    };
}

uint_newtype!(
    /// Blinding factor in `[0, q)`.
    Scalar
);
uint_newtype!(
    /// Element of the order-`q` subgroup; commitments are group elements.
    GroupElement
);

/// Group description `(p, q, g, h)` with `q | p - 1` and `g, h` of order `q`.
///
/// `h` is derived by hashing `g` so nobody knows `log_g h` (the toy
/// parameters are the exception and exist only for exhaustive tests).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct GroupParams {
    p: BigUint,
    q: BigUint,
    g: BigUint,
    h: BigUint,
}

#[derive(Serialize, Deserialize)]
struct RawParams {
    p: GroupElement,
    q: GroupElement,
    g: GroupElement,
    h: GroupElement,
}

impl TryFrom<RawParams> for GroupParams {
    type Error = ParseError;

    fn try_from(raw: RawParams) -> Result<Self, Self::Error> {
        GroupParams::new(raw.p.0, raw.q.0, raw.g.0, raw.h.0)
    }
}

impl From<GroupParams> for RawParams {
    fn from(p: GroupParams) -> Self {
        RawParams {
            p: GroupElement(p.p),
            q: GroupElement(p.q),
            g: GroupElement(p.g),
            h: GroupElement(p.h),
        }
    }
}

impl Default for GroupParams {
    fn default() -> Self {
        GroupParams::standard()
    }
}

impl GroupParams {
    /// Validates and builds a parameter set.
    pub fn new(p: BigUint, q: BigUint, g: BigUint, h: BigUint) -> Result<Self, ParseError> {
        let err = |m: &str| Err(ParseError::Params(m.to_string()));
        if !is_probable_prime(&p) {
            return err("p is not prime");
        }
        if !is_probable_prime(&q) {
            return err("q is not prime");
        }
        if !((&p - 1u32) % &q).is_zero() {
            return err("q does not divide p - 1");
        }
        let params = GroupParams { p, q, g, h };
        if !params.is_element(&params.g) || params.g.is_one() {
            return err("g does not generate the order-q subgroup");
        }
        if !params.is_element(&params.h) || params.h.is_one() {
            return err("h does not generate the order-q subgroup");
        }
        Ok(params)
    }

    /// Builds parameters with `h = hash_to_group(g)`.
    pub fn with_derived_h(p: BigUint, q: BigUint, g: BigUint) -> Result<Self, ParseError> {
        let h = hash_to_group(&p, &q, &g);
        GroupParams::new(p, q, g, h)
    }

    /// 256-bit safe prime `p = 2q + 1`, `g = 4`, `h` derived from `g`.
    pub fn standard() -> Self {
        let p = BigUint::parse_bytes(STANDARD_P.as_bytes(), 16).expect("constant");
        let q = BigUint::parse_bytes(STANDARD_Q.as_bytes(), 16).expect("constant");
        GroupParams::with_derived_h(p, q, BigUint::from(4u32)).expect("standard parameters are valid")
    }

    /// `p = 23, q = 11, g = 2, h = 4`. Here `h = g^2`, so these parameters
    /// hide nothing and bind nothing; they exist for exhaustive testing.
    pub fn toy() -> Self {
        GroupParams::new(23u32.into(), 11u32.into(), 2u32.into(), 4u32.into())
            .expect("toy parameters are valid")
    }

    pub fn p(&self) -> &BigUint {
        &self.p
    }

    pub fn q(&self) -> &BigUint {
        &self.q
    }

    pub fn g(&self) -> &BigUint {
        &self.g
    }

    pub fn h(&self) -> &BigUint {
        &self.h
    }

    /// `0 < x < p` and `x^q = 1 (mod p)`.
    pub fn is_element(&self, x: &BigUint) -> bool {
        !x.is_zero() && x < &self.p && x.modpow(&self.q, &self.p).is_one()
    }

    pub fn is_scalar(&self, r: &Scalar) -> bool {
        r.0 < self.q
    }

    pub fn commit(&self, value: u64, r: &Scalar) -> GroupElement {
        self.commit_big(&BigUint::from(value), r)
    }

    pub fn commit_big(&self, value: &BigUint, r: &Scalar) -> GroupElement {
        let gv = self.g.modpow(value, &self.p);
        let hr = self.h.modpow(&r.0, &self.p);
        GroupElement(gv * hr % &self.p)
    }

    /// Checks that `(value, r)` opens `c`.
    pub fn verify(&self, c: &GroupElement, value: u64, r: &Scalar) -> bool {
        self.commit(value, r) == *c
    }

    /// Product of group elements mod `p`; the empty product is 1.
    pub fn product<'a>(&self, elems: impl IntoIterator<Item = &'a GroupElement>) -> GroupElement {
        GroupElement(
            elems
                .into_iter()
                .fold(BigUint::one(), |acc, e| acc * &e.0 % &self.p),
        )
    }

    /// Sum of scalars mod `q`.
    pub fn add_scalars<'a>(&self, rs: impl IntoIterator<Item = &'a Scalar>) -> Scalar {
        Scalar(
            rs.into_iter()
                .fold(BigUint::zero(), |acc, r| (acc + &r.0) % &self.q),
        )
    }
}

/// Maps `g` to a subgroup element with unknown discrete log relative to `g`:
/// `SHA-256(domain || g || counter) mod p`, squared, retrying on 0, 1 or `g`.
///
/// Squaring lands in the order-`q` subgroup when `p = 2q + 1`.
pub fn hash_to_group(p: &BigUint, q: &BigUint, g: &BigUint) -> BigUint {
    let width = p.to_bytes_be().len().max(32);
    let mut g_bytes = vec![0u8; width];
    let raw = g.to_bytes_be();
    g_bytes[width - raw.len()..].copy_from_slice(&raw);
    for counter in 0u32.. {
        let mut input = H_DOMAIN.to_vec();
        input.extend_from_slice(&g_bytes);
        input.extend_from_slice(&counter.to_be_bytes());
        let x = BigUint::from_bytes_be(sha256(&input).as_bytes()) % p;
        let h = x.modpow(&BigUint::from(2u32), p);
        if !h.is_zero() && !h.is_one() && &h != g && h.modpow(q, p).is_one() {
            return h;
        }
    }
    unreachable!("counter space exhausted")
}

/// Miller-Rabin with the first 20 primes as witnesses.
pub fn is_probable_prime(n: &BigUint) -> bool {
    const WITNESSES: [u32; 20] = [
        2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71,
    ];
    let two = BigUint::from(2u32);
    if n < &two {
        return false;
    }
    for w in WITNESSES {
        let w = BigUint::from(w);
        if *n == w {
            return true;
        }
        if (n % &w).is_zero() {
            return false;
        }
    }
    let n_minus_one = n - 1u32;
    let s = n_minus_one.trailing_zeros().expect("n > 2");
    let d = &n_minus_one >> s;
    'witness: for w in WITNESSES {
        let mut x = BigUint::from(w).modpow(&d, n);
        if x.is_one() || x == n_minus_one {
            continue;
        }
        for _ in 1..s {
            x = x.modpow(&two, n);
            if x == n_minus_one {
                continue 'witness;
            }
        }
        return false;
    }
    true
}
