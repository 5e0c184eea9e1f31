use image::{Rgb, RgbImage};

use planecrf::dataset::{
    load_kitti_frame, parse_calib, project_points, read_velodyne, write_ply_file, write_velodyne, KittiCalib, PlyFormat,
};
use planecrf::depth::DenseDepth;
use planecrf::geometry::{backproject, CameraIntrinsics, PixelDepth};

const CALIB: &str = "P2: 721.5 0 609.6 44.9 0 721.5 172.9 0.2 0 0 1 0.003\n\
R0_rect: 0.9999 0.0098 -0.0074 -0.0099 0.9999 -0.0043 0.0074 0.0044 1\n\
Tr_velo_to_cam: 0.0075 -0.9999 -0.0006 -0.0040 0.0148 0.0007 -0.9999 -0.0763 0.9999 0.0075 0.0148 -0.2718\n";

#[test]
fn velodyne_write_read_projects_identically() {
    let tmp = tempfile::tempdir().unwrap();
    let calib = parse_calib(CALIB, "calib.txt").unwrap();
    let points: Vec<[f32; 4]> = (0..400)
        .map(|i| {
            let t = i as f32;
            [4.0 + (t * 0.37) % 40.0, ((t * 1.7) % 20.0) - 10.0, -1.6 + (t % 7.0) * 0.3, (t % 10.0) / 10.0]
        })
        .chain([[-5.0, 0.0, 0.0, 0.5]]) // behind the camera
        .collect();
    let path = tmp.path().join("scan.bin");
    write_velodyne(&path, &points).unwrap();
    assert_eq!(read_velodyne(&path).unwrap(), points);

    let direct = project_points::<f64>(&points, &calib, 1242, 375).unwrap();
    let image_path = tmp.path().join("image.png");
    RgbImage::from_pixel(1242, 375, Rgb([1, 2, 3])).save(&image_path).unwrap();
    let calib_path = tmp.path().join("calib.txt");
    std::fs::write(&calib_path, calib.to_text()).unwrap();
    let frame = load_kitti_frame::<f64>(&image_path, &path, &calib_path).unwrap();
    assert!(!direct.is_empty());
    assert_eq!(frame.sparse.samples(), direct.samples());

    // in bounds and in front of the camera
    for p in frame.sparse.samples() {
        assert!(p.depth > 0.0 && p.u >= 0.0 && p.v >= 0.0 && p.u < 1242.0 && p.v < 375.0);
    }
    let KittiCalib { p2, .. } = calib;
    assert_eq!(frame.k.f, p2[0][0]);
}

fn read_f32(b: &[u8]) -> f32 {
    f32::from_le_bytes([b[0], b[1], b[2], b[3]])
}

#[test]
fn binary_ply_decodes_to_backprojected_points() {
    let tmp = tempfile::tempdir().unwrap();
    let k = CameraIntrinsics::new(50.0, 4.0, 3.0).unwrap();
    let depth = DenseDepth::from_fn(8, 6, |u, v| if (u + v) % 5 == 0 { None } else { Some(2.0 + 0.5 * u as f64 + 0.25 * v as f64) });
    let image = RgbImage::from_fn(8, 6, |u, v| Rgb([u as u8 * 10, v as u8 * 20, 200]));
    let mask: Vec<bool> = (0..48).map(|i| i >= 24).collect();
    let path = tmp.path().join("cloud.ply");
    let n = write_ply_file(&path, &depth, &image, &k, Some(&mask), PlyFormat::BinaryLittleEndian).unwrap();
    assert_eq!(n, depth.valid_count());

    let bytes = std::fs::read(&path).unwrap();
    let marker = b"end_header\n";
    let split = bytes.windows(marker.len()).position(|w| w == marker).unwrap() + marker.len();
    let header = std::str::from_utf8(&bytes[..split]).unwrap();
    assert!(header.starts_with("ply\nformat binary_little_endian 1.0\n"));
    assert!(header.contains(&format!("element vertex {n}\n")));
    let body = &bytes[split..];
    assert_eq!(body.len(), n * 15);

    let mut rec = body.chunks_exact(15);
    for v in 0..6 {
        for u in 0..8 {
            let Some(d) = depth.get(u, v) else { continue };
            let r = rec.next().unwrap();
            let p = backproject(&PixelDepth::new(u as f64, v as f64, d), &k).unwrap();
            assert_eq!([read_f32(&r[0..]), read_f32(&r[4..]), read_f32(&r[8..])], [p.x as f32, p.y as f32, p.z as f32]);
            let c = image.get_pixel(u as u32, v as u32).0;
            let expected = if mask[v * 8 + u] {
                [((c[0] as u16 + 40) / 2) as u8, ((c[1] as u16 + 220) / 2) as u8, ((c[2] as u16 + 60) / 2) as u8]
            } else {
                c
            };
            assert_eq!(&r[12..15], &expected);
        }
    }
    assert!(rec.next().is_none());
}
