//! CRC-16/CCITT (poly 0x1021, init 0xFFFF, MSB first, no reflection, no
//! final XOR) over bit sequences.

pub const POLY: u16 = 0x1021;
pub const INIT: u16 = 0xFFFF;
pub const CRC_BITS: usize = 16;

/// CRC over bits given as 0/1 values, most significant first.
pub fn crc16_bits(bits: &[u8]) -> u16 {
    bits.iter().fold(INIT, |crc, &b| {
        let fb = ((crc >> 15) as u8 ^ b) & 1;
        let crc = crc << 1;
        if fb == 1 {
            crc ^ POLY
        } else {
            crc
        }
    })
}

pub fn crc16(bytes: &[u8]) -> u16 {
    crc16_bits(&bytes_to_bits(bytes))
}

pub fn bytes_to_bits(bytes: &[u8]) -> Vec<u8> {
    bytes
        .iter()
        .flat_map(|&byte| (0..8).rev().map(move |t| (byte >> t) & 1))
        .collect()
}

/// Appends the 16 CRC bits, most significant first.
pub fn append_crc(bits: &[u8]) -> Vec<u8> {
    let crc = crc16_bits(bits);
    let mut out = bits.to_vec();
    out.extend((0..CRC_BITS).rev().map(|t| ((crc >> t) & 1) as u8));
    out
}

/// Checks a bit sequence that ends in its CRC.
pub fn check_crc(bits_with_crc: &[u8]) -> bool {
    bits_with_crc.len() >= CRC_BITS && {
        let (data, tail) = bits_with_crc.split_at(bits_with_crc.len() - CRC_BITS);
        let crc = tail.iter().fold(0u16, |acc, &b| (acc << 1) | b as u16);
        crc16_bits(data) == crc
    }
}
