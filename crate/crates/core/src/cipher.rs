//! The Lorenz Code feedback stream cipher and its `LZC1` container.
//!
//! Each 32-byte group is XORed with `hash8(base, chain)`, and the chain for
//! the next group is `chain ⊕ fold(M) ⊕ fold(C)`. Since `C = M ⊕ K`, this is
//! `chain ⊕ fold(K)`: the chain sequence depends on the key only, never on
//! the plaintext.

use crate::error::{Error, FormatError, Result};
use crate::oneway::{hash8, BaseConfig, KeyBlock};

/// Bytes per plaintext group and per keystream block.
pub const GROUP: usize = 32;
pub const MAGIC: [u8; 4] = *b"LZC1";
pub const VERSION: u8 = 0x01;
/// Magic, version and the 8-byte length.
pub const HEADER_LEN: usize = 13;

/// Secret key bytes with the public base parameters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CipherKey {
    pub k: KeyBlock,
    pub base: BaseConfig,
}

impl CipherKey {
    pub fn new(k: KeyBlock, base: BaseConfig) -> Result<Self> {
        base.validate()?;
        Ok(CipherKey { k, base })
    }
}

/// `hash8(base, chain)` as 32 bytes.
pub fn keystream_block(key: &CipherKey, chain: &KeyBlock) -> Result<[u8; GROUP]> {
    Ok(hash8(&key.base, chain)?.0)
}

fn group(bytes: &[u8]) -> Result<&[u8; GROUP]> {
    bytes.try_into().map_err(|_| Error::Length {
        expected: GROUP,
        got: bytes.len(),
    })
}

/// `out[j] = b[j] ⊕ b[j+8] ⊕ b[j+16] ⊕ b[j+24]`.
pub fn fold32to8(block: &[u8]) -> Result<[u8; 8]> {
    let b = group(block)?;
    Ok(std::array::from_fn(|j| b[j] ^ b[j + 8] ^ b[j + 16] ^ b[j + 24]))
}

/// `chain ⊕ fold(m) ⊕ fold(c)`.
pub fn next_chain(chain: &KeyBlock, m: &[u8], c: &[u8]) -> Result<KeyBlock> {
    let (fm, fc) = (fold32to8(m)?, fold32to8(c)?);
    Ok(KeyBlock(std::array::from_fn(|j| chain.0[j] ^ fm[j] ^ fc[j])))
}

/// The first `blocks` keystream blocks, as produced when encrypting zeros.
pub fn keystream(key: &CipherKey, blocks: usize) -> Result<Vec<u8>> {
    let mut out = Vec::with_capacity(blocks * GROUP);
    let mut chain = key.k;
    for i in 0..blocks {
        let k = keystream_block(key, &chain).map_err(|e| in_group(i, e))?;
        chain = next_chain(&chain, &[0; GROUP], &k)?;
        out.extend_from_slice(&k);
    }
    Ok(out)
}

fn in_group(i: usize, source: Error) -> Error {
    Error::Group {
        group: i as u64,
        source: Box::new(source),
    }
}

/// Serialized form: `"LZC1"`, version, big-endian `u64` plaintext length,
/// then the ciphertext groups.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CipherContainer {
    pub original_length: u64,
    pub body: Vec<u8>,
}

impl CipherContainer {
    /// Number of 32-byte groups covering `len` bytes.
    pub fn groups_for(len: u64) -> u64 {
        len.div_ceil(GROUP as u64)
    }

    fn check_body(&self) -> Result<(), FormatError> {
        let want = Self::groups_for(self.original_length)
            .checked_mul(GROUP as u64)
            .ok_or_else(|| FormatError::Corrupt(format!("length {} too large", self.original_length)))?;
        if self.body.len() as u64 != want {
            return Err(FormatError::Corrupt(format!(
                "original length {} needs a {want}-byte body, found {}",
                self.original_length,
                self.body.len()
            )));
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + self.body.len());
        out.extend_from_slice(&MAGIC);
        out.push(VERSION);
        out.extend_from_slice(&self.original_length.to_be_bytes());
        out.extend_from_slice(&self.body);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, FormatError> {
        if bytes.len() < 4 {
            return Err(FormatError::Corrupt(format!("{} bytes is shorter than the header", bytes.len())));
        }
        let magic: [u8; 4] = bytes[..4].try_into().expect("length checked");
        if magic != MAGIC {
            return Err(FormatError::BadMagic(magic));
        }
        if bytes.len() < HEADER_LEN {
            return Err(FormatError::Corrupt(format!("{} bytes is shorter than the header", bytes.len())));
        }
        if bytes[4] != VERSION {
            return Err(FormatError::UnsupportedVersion(bytes[4]));
        }
        let c = CipherContainer {
            original_length: u64::from_be_bytes(bytes[5..HEADER_LEN].try_into().expect("length checked")),
            body: bytes[HEADER_LEN..].to_vec(),
        };
        c.check_body()?;
        Ok(c)
    }
}

/// [`encrypt`], also returning the chain used for each group.
pub fn encrypt_traced(key: &CipherKey, plaintext: &[u8]) -> Result<(CipherContainer, Vec<KeyBlock>)> {
    let mut chain = key.k;
    let mut chains = Vec::with_capacity(plaintext.len().div_ceil(GROUP));
    let mut body = Vec::with_capacity(plaintext.len().div_ceil(GROUP) * GROUP);
    for (i, part) in plaintext.chunks(GROUP).enumerate() {
        let mut m = [0u8; GROUP];
        m[..part.len()].copy_from_slice(part);
        let k = keystream_block(key, &chain).map_err(|e| in_group(i, e))?;
        let c: [u8; GROUP] = std::array::from_fn(|j| m[j] ^ k[j]);
        chains.push(chain);
        chain = next_chain(&chain, &m, &c)?;
        body.extend_from_slice(&c);
    }
    let container = CipherContainer {
        original_length: plaintext.len() as u64,
        body,
    };
    Ok((container, chains))
}

/// Zero-pads to whole groups and encrypts group by group.
pub fn encrypt(key: &CipherKey, plaintext: &[u8]) -> Result<CipherContainer> {
    encrypt_traced(key, plaintext).map(|(c, _)| c)
}

/// [`decrypt`], also returning the chain used for each group.
pub fn decrypt_traced(key: &CipherKey, container: &CipherContainer) -> Result<(Vec<u8>, Vec<KeyBlock>)> {
    container.check_body()?;
    let mut chain = key.k;
    let mut chains = Vec::with_capacity(container.body.len() / GROUP);
    let mut out = Vec::with_capacity(container.body.len());
    for (i, c) in container.body.chunks_exact(GROUP).enumerate() {
        let k = keystream_block(key, &chain).map_err(|e| in_group(i, e))?;
        let m: [u8; GROUP] = std::array::from_fn(|j| c[j] ^ k[j]);
        chains.push(chain);
        chain = next_chain(&chain, &m, c)?;
        out.extend_from_slice(&m);
    }
    out.truncate(container.original_length as usize);
    Ok((out, chains))
}

/// Regenerates the keystream and strips the padding.
pub fn decrypt(key: &CipherKey, container: &CipherContainer) -> Result<Vec<u8>> {
    decrypt_traced(key, container).map(|(m, _)| m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fold_examples() {
        assert_eq!(fold32to8(&[0xff; 32]).unwrap(), [0; 8]);
        assert_eq!(fold32to8(&[0; 32]).unwrap(), [0; 8]);
        let mut b = [0u8; 32];
        b[0] = 1;
        assert_eq!(fold32to8(&b).unwrap(), [1, 0, 0, 0, 0, 0, 0, 0]);
        assert!(matches!(fold32to8(&[0; 31]), Err(Error::Length { expected: 32, got: 31 })));
    }

    #[test]
    fn chain_examples() {
        let chain = KeyBlock(*b"chainkey");
        let m: [u8; 32] = std::array::from_fn(|i| i as u8 * 7);
        assert_eq!(next_chain(&chain, &m, &m).unwrap(), chain);
        assert_eq!(next_chain(&chain, &[0; 32], &[0; 32]).unwrap(), chain);
        let k: [u8; 32] = std::array::from_fn(|i| (i as u8).wrapping_mul(31) ^ 0x5a);
        let c: [u8; 32] = std::array::from_fn(|i| m[i] ^ k[i]);
        let fk = fold32to8(&k).unwrap();
        let want = KeyBlock(std::array::from_fn(|j| chain.0[j] ^ fk[j]));
        assert_eq!(next_chain(&chain, &m, &c).unwrap(), want);
        assert!(next_chain(&chain, &m[..16], &c).is_err());
    }

    #[test]
    fn empty_plaintext() {
        let key = CipherKey::new(KeyBlock::default(), BaseConfig::default()).unwrap();
        let c = encrypt(&key, &[]).unwrap();
        assert_eq!(c.original_length, 0);
        assert!(c.body.is_empty());
        assert_eq!(c.to_bytes(), b"LZC1\x01\0\0\0\0\0\0\0\0");
        assert_eq!(decrypt(&key, &c).unwrap(), Vec::<u8>::new());
    }

    #[test]
    fn container_parsing_errors() {
        assert_eq!(CipherContainer::from_bytes(b"XXXX\x01\0\0\0\0\0\0\0\0"), Err(FormatError::BadMagic(*b"XXXX")));
        assert_eq!(CipherContainer::from_bytes(b"LZC1\x02\0\0\0\0\0\0\0\0"), Err(FormatError::UnsupportedVersion(2)));
        assert!(matches!(CipherContainer::from_bytes(b"LZC1\x01\0\0"), Err(FormatError::Corrupt(_))));
        assert!(matches!(CipherContainer::from_bytes(b"LZ"), Err(FormatError::Corrupt(_))));
        let mut short = b"LZC1\x01\0\0\0\0\0\0\0\x21".to_vec();
        short.extend_from_slice(&[0; 32]);
        assert!(matches!(CipherContainer::from_bytes(&short), Err(FormatError::Corrupt(_))));
        short.extend_from_slice(&[0; 32]);
        assert_eq!(CipherContainer::from_bytes(&short).unwrap().original_length, 33);
        let huge = b"LZC1\x01\xff\xff\xff\xff\xff\xff\xff\xff";
        assert!(matches!(CipherContainer::from_bytes(huge), Err(FormatError::Corrupt(_))));
    }

    #[test]
    fn invalid_base_rejected() {
        let mut base = BaseConfig::default();
        base.precision = 128;
        assert!(CipherKey::new(KeyBlock::default(), base).is_err());
    }
}
