use crate::error::Result;
use crate::frames::{frame_conjugate, frame_shift_state, Frame, PhaseAngle, Unitary2};

use super::{apply, PureQubit};

fn toward(view: Frame, phi_ba: PhaseAngle) -> PhaseAngle {
    match view {
        Frame::Bob => phi_ba,
        Frame::Alice => -phi_ba,
    }
}

/// Applies `gates`, each described in its own party's frame, to `start`
/// after rewriting every description into `view`.
pub fn run_in_frame(gates: &[Unitary2], start: &PureQubit, view: Frame, phi_ba: PhaseAngle) -> Result<PureQubit> {
    let shift = toward(view, phi_ba);
    let mut psi = if start.frame() == view {
        *start
    } else {
        frame_shift_state(start, shift)
    };
    for g in gates {
        let g = if g.frame() == view {
            *g
        } else {
            frame_conjugate(g, shift)
        };
        psi = apply(&g, &psi)?;
    }
    Ok(psi)
}
