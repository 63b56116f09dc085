//! Human-readable dump of the tile metadata. The format is for inspection
//! only and may change.

use alloc::string::String;
use core::fmt::{self, Write};

use super::matrix::Csr5Matrix;

struct Flags<'a>(&'a [bool], usize);

impl fmt::Display for Flags<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, column) in self.0.chunks(self.1).enumerate() {
            if i > 0 {
                f.write_char('|')?;
            }
            for &b in column {
                f.write_char(if b { '1' } else { '0' })?;
            }
        }
        Ok(())
    }
}

struct List<'a>(&'a [usize]);

impl fmt::Display for List<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_char('[')?;
        for (k, v) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_char(',')?;
            }
            write!(f, "{v}")?;
        }
        f.write_char(']')
    }
}

impl Csr5Matrix {
    /// Header line followed by one line per tile.
    pub fn write_dump<W: Write>(&self, out: &mut W) -> fmt::Result {
        let layout = self.layout();
        writeln!(
            out,
            "csr5 m={} n={} nnz={} omega={} sigma={} tiles={} complete={} tail={} \
             tile_ptr_bits={} desc_bits={} column_bits={}",
            self.rows(),
            self.cols(),
            self.nnz(),
            layout.omega,
            layout.sigma,
            self.tile_count(),
            self.complete_tiles(),
            self.tail_len(),
            self.tile_ptr().word_bits(),
            layout.word_bits,
            layout.column_bits(),
        )?;
        for tid in 0..self.tile_count() {
            let ptr = self.tile_pointer(tid);
            write!(
                out,
                "tile={tid} ptr={} empty={}",
                ptr.row,
                u8::from(ptr.has_empty_rows)
            )?;
            if tid < self.complete_tiles() {
                let d = self.tile_descriptor(tid);
                write!(
                    out,
                    " y_offset={} seg_offset={} bit_flag={}",
                    List(&d.y_offset),
                    List(&d.seg_offset),
                    Flags(&d.bit_flag, d.sigma)
                )?;
                if ptr.has_empty_rows {
                    write!(out, " empty_offset={}", List(self.empty_offsets(tid)))?;
                }
            } else {
                write!(out, " tail={}", self.tail_len())?;
            }
            out.write_char('\n')?;
        }
        Ok(())
    }

    pub fn debug_dump(&self) -> String {
        let mut s = String::new();
        self.write_dump(&mut s)
            .expect("writing to a String cannot fail");
        s
    }
}
