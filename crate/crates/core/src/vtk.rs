//! Legacy ASCII VTK output of P1 fields.

use std::io::{self, Write};

use crate::mesh::TriMesh;

/// Writes an unstructured triangle grid with one `SCALARS` block per field.
pub fn write_vtk<W: Write>(w: &mut W, mesh: &TriMesh, title: &str, fields: &[(&str, &[f64])]) -> io::Result<()> {
    let n = mesh.num_nodes();
    let m = mesh.num_triangles();
    writeln!(w, "# vtk DataFile Version 3.0")?;
    writeln!(w, "{}", title.replace('\n', " "))?;
    writeln!(w, "ASCII")?;
    writeln!(w, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(w, "POINTS {n} double")?;
    for p in mesh.nodes() {
        writeln!(w, "{} {} 0", p[0], p[1])?;
    }
    writeln!(w, "CELLS {m} {}", 4 * m)?;
    for t in mesh.triangles() {
        writeln!(w, "3 {} {} {}", t[0], t[1], t[2])?;
    }
    writeln!(w, "CELL_TYPES {m}")?;
    for _ in 0..m {
        writeln!(w, "5")?;
    }
    writeln!(w, "POINT_DATA {n}")?;
    for (name, values) in fields {
        if values.len() != n {
            return Err(io::Error::new(
                io::ErrorKind::InvalidInput,
                format!("field `{name}` has {} values for {n} points", values.len()),
            ));
        }
        writeln!(w, "SCALARS {name} double 1")?;
        writeln!(w, "LOOKUP_TABLE default")?;
        for v in values.iter() {
            writeln!(w, "{v}")?;
        }
    }
    Ok(())
}
