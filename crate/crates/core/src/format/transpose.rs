//! Tile-level transposition of the nonzero arrays.
//!
//! Inside every complete tile the `sigma` consecutive nonzeros of column `i`
//! are scattered so that depth `j` of all columns is contiguous. The tail
//! (fewer than `omega * sigma` trailing entries) is never moved.

use alloc::vec::Vec;

use super::tile::TileGeometry;
use crate::exec::{map_chunks_mut, Exec};

fn transpose_tile<T: Copy>(tile: &mut [T], scratch: &mut Vec<T>, geom: TileGeometry) {
    scratch.clear();
    scratch.extend_from_slice(tile);
    for i in 0..geom.omega {
        for j in 0..geom.sigma {
            tile[geom.physical(0, i, j)] = scratch[geom.logical(0, i, j)];
        }
    }
}

fn untranspose_tile<T: Copy>(tile: &mut [T], scratch: &mut Vec<T>, geom: TileGeometry) {
    scratch.clear();
    scratch.extend_from_slice(tile);
    for i in 0..geom.omega {
        for j in 0..geom.sigma {
            tile[geom.logical(0, i, j)] = scratch[geom.physical(0, i, j)];
        }
    }
}

fn complete_prefix<T>(data: &mut [T], geom: TileGeometry) -> &mut [T] {
    let end = geom.complete_tiles(data.len()) * geom.size();
    &mut data[..end]
}

/// Row-major to column-major within each complete tile, in place with one
/// tile of scratch per worker.
pub fn transpose_tiles<T: Copy + Send + Sync>(data: &mut [T], geom: TileGeometry, exec: Exec) {
    let size = geom.size();
    let body = complete_prefix(data, geom);
    if body.is_empty() {
        return;
    }
    map_chunks_mut(
        exec,
        body,
        size,
        || Vec::with_capacity(size),
        |scratch, _, tile| transpose_tile(tile, scratch, geom),
    );
}

/// Inverse of [`transpose_tiles`].
pub fn untranspose_tiles<T: Copy + Send + Sync>(data: &mut [T], geom: TileGeometry, exec: Exec) {
    let size = geom.size();
    let body = complete_prefix(data, geom);
    if body.is_empty() {
        return;
    }
    map_chunks_mut(
        exec,
        body,
        size,
        || Vec::with_capacity(size),
        |scratch, _, tile| untranspose_tile(tile, scratch, geom),
    );
}
