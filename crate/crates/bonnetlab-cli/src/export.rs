//! OBJ meshes with a CSV sidecar for the fourth coordinate.

use std::fmt::Write as _;
use std::io;
use std::path::Path;

use bonnetlab::{Grid, V4};

/// Triangles of the vertex grid, counterclockwise in the `(u, v)` plane, so
/// the face normals follow `f_u x f_v`. Periodic axes close up.
pub fn triangles(grid: &Grid) -> Vec<[usize; 3]> {
    let mut out = Vec::new();
    for j in 0..grid.nv {
        for i in 0..grid.nu {
            let (Some(i1), Some(j1)) = (grid.shift_u(i, 1), grid.shift_v(j, 1)) else { continue };
            let (a, b, c, d) = (grid.idx(i, j), grid.idx(i1, j), grid.idx(i1, j1), grid.idx(i, j1));
            out.push([a, b, c]);
            out.push([a, c, d]);
        }
    }
    out
}

pub fn obj_text(label: &str, grid: &Grid, points: &[V4]) -> String {
    let mut s = format!("# {label}\n# first three coordinates; x4 in the sidecar CSV\n");
    for p in points {
        writeln!(s, "v {} {} {}", p[0], p[1], p[2]).expect("string write");
    }
    for t in triangles(grid) {
        writeln!(s, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1).expect("string write");
    }
    s
}

/// Write `<stem>.obj` and `<stem>_x4.csv`; returns the file names.
pub fn write_mesh(dir: &Path, stem: &str, label: &str, grid: &Grid, points: &[V4]) -> io::Result<Vec<String>> {
    let obj = format!("{stem}.obj");
    std::fs::write(dir.join(&obj), obj_text(label, grid, points))?;
    let side = format!("{stem}_x4.csv");
    let mut w = csv::Writer::from_path(dir.join(&side))?;
    w.write_record(["vertex", "i", "j", "u", "v", "x4"])?;
    for (k, p) in points.iter().enumerate() {
        let (i, j) = grid.ij(k);
        let (u, v) = grid.node(i, j);
        w.write_record([(k + 1).to_string(), i.to_string(), j.to_string(), u.to_string(), v.to_string(), p[3].to_string()])?;
    }
    w.flush()?;
    Ok(vec![obj, side])
}

/// CSV with a header row; each record is already formatted.
pub fn write_csv(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> io::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use bonnetlab::zoo;

    fn normal3(p: &[V4], t: [usize; 3]) -> [f64; 3] {
        let a = p[t[1]] - p[t[0]];
        let b = p[t[2]] - p[t[0]];
        [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
    }

    #[test]
    fn plane_faces_point_up() {
        let c = zoo::plane();
        let g = Grid::for_chart(&c, 6, 5).unwrap();
        let p = g.try_map(|u, v| c.value(u, v)).unwrap();
        let t = triangles(&g);
        assert_eq!(t.len(), 2 * 5 * 4);
        assert!(t.iter().all(|&t| normal3(&p, t)[2] > 0.0));
    }

    #[test]
    fn periodic_axes_close_up() {
        let c = zoo::product_circles(0.5, 1.0);
        let g = Grid::for_chart(&c, 8, 6).unwrap();
        let t = triangles(&g);
        assert_eq!(t.len(), 2 * 8 * 6);
        // every vertex is used by exactly six triangles on a closed torus
        let mut uses = vec![0; g.len()];
        t.iter().flatten().for_each(|&k| uses[k] += 1);
        assert!(uses.iter().all(|&n| n == 6));
    }

    #[test]
    fn obj_lists_vertices_then_one_based_faces() {
        let c = zoo::plane();
        let g = Grid::for_chart(&c, 5, 5).unwrap();
        let p = g.try_map(|u, v| c.value(u, v)).unwrap();
        let s = obj_text("plane", &g, &p);
        assert_eq!(s.lines().filter(|l| l.starts_with("v ")).count(), 25);
        let first_face = s.lines().find(|l| l.starts_with("f ")).unwrap();
        assert_eq!(first_face, "f 1 2 7");
    }
}
