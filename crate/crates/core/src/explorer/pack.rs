//! Compact byte encoding of stored configurations: zigzag LEB128 per value.
//! Most values are small, so a state takes a quarter of its `i32` size.

pub(crate) fn pack(values: &[i32]) -> Box<[u8]> {
    let mut out = Vec::with_capacity(values.len() + 8);
    for &v in values {
        let mut z = ((v << 1) ^ (v >> 31)) as u32;
        while z >= 0x80 {
            out.push((z as u8) | 0x80);
            z >>= 7;
        }
        out.push(z as u8);
    }
    out.into_boxed_slice()
}

pub(crate) fn unpack(bytes: &[u8]) -> Vec<i32> {
    let mut out = Vec::with_capacity(bytes.len());
    let (mut z, mut shift) = (0u32, 0);
    for &b in bytes {
        z |= ((b & 0x7f) as u32) << shift;
        if b & 0x80 == 0 {
            out.push(((z >> 1) as i32) ^ -((z & 1) as i32));
            z = 0;
            shift = 0;
        } else {
            shift += 7;
        }
    }
    out
}
