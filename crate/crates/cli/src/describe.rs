use std::fmt::Write as _;

use tunnelbox::{project_packet, solve_spectrum, PacketWarning, Preset};

use crate::config::ExperimentConfig;

/// Levels shown in the spectrum preview.
const PREVIEW_LEVELS: usize = 10;

/// Human-readable summary of a resolved config: geometry, the first levels,
/// how well the basis captures the packet, and warnings.
pub fn describe(config: &ExperimentConfig) -> String {
    let mut out = String::new();
    let mut warnings: Vec<String> = Vec::new();
    let g = &config.geometry;
    let c = config.constants();

    let _ = writeln!(
        out,
        "preset: {} (hbar = {:e}, m = {:e}, hbar^2/2m = {:e})",
        config.preset.name(),
        c.hbar(),
        c.mass(),
        c.kinetic_scale()
    );
    let _ = writeln!(
        out,
        "geometry: L = {}, barrier [{}, {}], V0 = {}{}",
        g.total_length(),
        g.barrier_left(),
        g.barrier_right(),
        g.barrier_height(),
        if g.is_symmetric() { " (symmetric)" } else { "" }
    );
    let _ = writeln!(
        out,
        "chambers: left {}, right {}",
        g.left_half(),
        g.right_half()
    );
    if g.is_free_box() {
        let _ = writeln!(out, "free box: closed-form spectrum in use");
    }
    let _ = writeln!(
        out,
        "packet: x0 = {}, sigma = {}, k0 = {}",
        config.packet.center(),
        config.packet.width(),
        config.packet.momentum()
    );
    let _ = writeln!(
        out,
        "time: [{}, {}] with {} samples",
        config.time.start, config.time.end, config.time.samples
    );
    if let Some(s) = &config.sweep {
        let _ = writeln!(out, "sweep: {} over {:?}", s.axis, s.values);
    }
    let names: Vec<&str> = config.outputs.iter().map(|o| o.name()).collect();
    let _ = writeln!(out, "outputs: {}", names.join(", "));
    let _ = writeln!(out, "levels: {}", config.n_levels);

    match solve_spectrum(g, &c, config.n_levels) {
        Ok(spectrum) => {
            for s in spectrum.states().iter().take(PREVIEW_LEVELS) {
                let _ = writeln!(out, "  E_{:<3} = {:e}  ({})", s.index(), s.energy(), s.regime().label());
            }
            if spectrum.len() > PREVIEW_LEVELS {
                let _ = writeln!(out, "  ... {} more", spectrum.len() - PREVIEW_LEVELS);
            }
            match project_packet(&config.packet, &spectrum) {
                Ok(expansion) => {
                    let _ = writeln!(out, "captured_norm: {:.9}", expansion.captured_norm());
                    warnings.extend(
                        expansion
                            .warnings()
                            .iter()
                            .filter(|w| matches!(w, PacketWarning::Truncation { .. }))
                            .map(|w| w.to_string()),
                    );
                }
                Err(e) => warnings.push(format!("projection failed: {e}")),
            }
        }
        Err(e) => warnings.push(format!("spectrum failed: {e}")),
    }
    match config.packet.check_in(g) {
        Ok(wall) => warnings.extend(wall.iter().map(|w| w.to_string())),
        Err(e) => warnings.push(e.to_string()),
    }
    warnings.push(match config.preset {
        Preset::Natural => "natural units (hbar = 1, 2m = 1): lengths, energies and times are dimensionless".into(),
        Preset::Paper => {
            "paper units: the source states hbar and m but not the length unit; Angstrom is assumed (energies in eV, times in s)"
                .into()
        }
    });

    if warnings.is_empty() {
        let _ = writeln!(out, "warnings: none");
    } else {
        let _ = writeln!(out, "warnings:");
        for w in warnings {
            let _ = writeln!(out, "  - {w}");
        }
    }
    out
}
