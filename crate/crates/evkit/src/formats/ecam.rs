//! `ECAM` camera models: offset `k` as f64 and the threshold field as f32.

use evkit_core::{CameraModel, ChannelField, ChannelKind};

use super::{container_len, open_container, Writer};
use crate::error::Result;

pub const MAGIC: [u8; 4] = *b"ECAM";
const HEADER_LEN: usize = 2 + 2 + 8;

pub fn write_camera_model(model: &CameraModel) -> Vec<u8> {
    let (width, height) = model.dims();
    let mut w = Writer::new(&MAGIC, HEADER_LEN + 4 * model.theta().values().len());
    w.u16(width);
    w.u16(height);
    w.f64(model.k());
    for &v in model.theta().values() {
        w.f32(v as f32);
    }
    w.finish()
}

/// Thresholds are widened from f32; writing the result back reproduces the bytes.
pub fn parse_camera_model(bytes: &[u8]) -> Result<CameraModel> {
    let mut r = open_container(bytes, &MAGIC, HEADER_LEN, |probe| {
        let w = probe.u16()? as u64;
        let h = probe.u16()? as u64;
        container_len(HEADER_LEN, w * h, 4, bytes.len())
    })?;
    let width = r.u16()?;
    let height = r.u16()?;
    let k = r.f64()?;
    let theta = (0..width as usize * height as usize)
        .map(|_| r.f32().map(f64::from))
        .collect::<Result<Vec<f64>>>()?;
    Ok(CameraModel::new(
        ChannelField::new(width, height, ChannelKind::Theta, theta)?,
        k,
    )?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_bytes() {
        let theta = ChannelField::new(3, 1, ChannelKind::Theta, vec![0.1, 0.25, 0.0]).unwrap();
        let m = CameraModel::new(theta, 0.05).unwrap();
        let bytes = write_camera_model(&m);
        let back = parse_camera_model(&bytes).unwrap();
        assert_eq!(back.k(), 0.05);
        assert_eq!(write_camera_model(&back), bytes);
    }

    #[test]
    fn rejects_negative_k_and_theta() {
        let m = CameraModel::uniform(1, 1, 0.1, 0.0).unwrap();
        let bytes = write_camera_model(&m);
        let mut payload = bytes[..bytes.len() - 4].to_vec();
        payload[8..16].copy_from_slice(&(-1.0f64).to_le_bytes());
        let crc = crc32fast::hash(&payload);
        payload.extend_from_slice(&crc.to_le_bytes());
        assert!(parse_camera_model(&payload).is_err());
    }
}
