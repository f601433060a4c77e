//! Fully connected emulator mapping low-array snapshots to high-array ones.
//!
//! Complex snapshots are fed as stacked `[Re; Im]` real vectors, min-max
//! scaled with statistics from the training share. Training uses Adam on a
//! mean-squared-error objective.

mod adam;
mod io;
mod mlp;
mod norm;
mod train;

pub use adam::{adam_step, adam_update, AdamConfig, OptimizerState};
pub use io::{read_model, write_model, MODEL_MAGIC, MODEL_VERSION};
pub use mlp::{Activation, ForwardCache, Gradients, Mlp};
pub use norm::MinMaxStats;
pub use train::{split_indices, train, train_select, EpochLoss, PairDataset, Split, TrainConfig, TrainReport};

use ndarray::{s, Array2, ArrayView2};

use crate::array::{ArrayConfig, SnapshotBlock};
use crate::{Error, Result, C64};

/// `[Re(Y); Im(Y)]`, real matrix of shape `2·rows × cols`.
pub fn stack_real_imag(data: ArrayView2<'_, C64>) -> Array2<f64> {
    let (rows, cols) = data.dim();
    let mut out = Array2::zeros((2 * rows, cols));
    out.slice_mut(s![..rows, ..]).assign(&data.mapv(|z| z.re));
    out.slice_mut(s![rows.., ..]).assign(&data.mapv(|z| z.im));
    out
}

/// Inverse of [`stack_real_imag`].
pub fn unstack_real_imag(data: ArrayView2<'_, f64>) -> Result<Array2<C64>> {
    let (rows2, cols) = data.dim();
    if rows2 % 2 != 0 {
        return Err(Error::dim(format!("stacked data has odd row count {rows2}")));
    }
    let rows = rows2 / 2;
    Ok(Array2::from_shape_fn((rows, cols), |(i, j)| {
        C64::new(data[[i, j]], data[[i + rows, j]])
    }))
}

/// Emulate high-array snapshots from a low-array block, column by column.
pub fn predict(model: &Mlp, low: &SnapshotBlock, high: &ArrayConfig) -> Result<SnapshotBlock> {
    if 2 * low.array.virtual_size() != model.input_dim() {
        return Err(Error::dim(format!(
            "model expects {} stacked inputs, the {} array gives {}",
            model.input_dim(),
            low.array,
            2 * low.array.virtual_size()
        )));
    }
    if 2 * high.virtual_size() != model.output_dim() {
        return Err(Error::dim(format!(
            "model produces {} stacked outputs, the {} array needs {}",
            model.output_dim(),
            high,
            2 * high.virtual_size()
        )));
    }
    let x = model.norm_in.apply(stack_real_imag(low.data.view()).view())?;
    let cache = model.forward_batch(x.view())?;
    let y = model.norm_out.invert(cache.output().view())?;
    SnapshotBlock::new(unstack_real_imag(y.view())?, low.snr_db, *high)
}
