// leakage metric variants experiment
use diffadv::engine::SimParams;
use diffadv_core::kernel::{Geometry, Medium};
use diffadv_core::pulse::{upconvert, PulseSet};
use diffadv_core::rx::matched_filter_bank;
use diffadv_core::stats::mean_response;
use diffadv_core::wind::{CovarianceKernel, WindModel};
use diffadv_core::Scenario;

fn main() {
    let s = 0.5f64.sqrt();
    for sv2 in [1e-6, 0.16] {
        let sc = Scenario::new(
            Geometry::new([0.0, 0.0, 1.0], [s, s, 1.0]).unwrap(),
            Medium::new(6.7698e-6).unwrap(),
            WindModel::new(0.5, CovarianceKernel::White { intensity: sv2 }).unwrap(),
        )
        .unwrap();
        let sim = SimParams { channel_rate_hz: 1000, symbol_rate_hz: 100, t_mem: 30.0, normalize: false };
        // mean channel taps
        let dtc = 1e-3;
        let n_taps = 30_000usize;
        let mut taps = vec![0.0f64; n_taps + 1];
        for l in 1..=n_taps {
            let tau = dtc * l as f64;
            taps[l] = mean_response(tau, tau, &sc).unwrap();
        }
        let first = taps.iter().position(|&g| g > 0.0).unwrap_or(n_taps);
        let last = taps.iter().rposition(|&g| g > 0.0).unwrap_or(0);
        for t_sym in [2.0f64, 4.0, 8.0, 16.0] {
            let n = 2usize;
            let pulses = PulseSet::build(n, t_sym, 100).unwrap();
            let window_rx = ((t_sym + 30.0) * 100.0).round() as usize;
            let mut abs_peak = 0.0; // metric A
            let mut auto_sq = 0.0;
            let mut abs_onset = 0.0; // metric B
            for i in 0..n {
                let mut tx = vec![0.0; window_rx];
                for (k, &v) in pulses.waveform(i).iter().enumerate() {
                    tx[k] = v;
                }
                let up = upconvert(&tx, 100, 1000).unwrap();
                let received: Vec<f64> = (0..window_rx)
                    .map(|k| {
                        let c = k * 10;
                        let hi = last.min(c);
                        let mut acc = 0.0;
                        for lag in first..=hi {
                            let q = up[c - lag];
                            if q != 0.0 {
                                acc += taps[lag] * q;
                            }
                        }
                        acc * dtc
                    })
                    .collect();
                let mf = matched_filter_bank(&received, &pulses);
                // A: own-branch argmax
                let mut best = (0usize, f64::NEG_INFINITY);
                for (idx, &v) in mf[i].iter().enumerate() {
                    if v > best.1 {
                        best = (idx, v);
                    }
                }
                auto_sq += best.1 * best.1;
                for (j, b) in mf.iter().enumerate() {
                    if j != i {
                        abs_peak += b[best.0] * b[best.0];
                    }
                }
                // B: onset instant (5% of windowed total mf energy)
                let total: f64 = mf.iter().flat_map(|b| b.iter()).map(|y| y * y).sum();
                let thr = 0.05 * total;
                let mut cum = 0.0;
                let mut onset = 0;
                'scan: for idx in 0..window_rx {
                    for b in mf.iter() {
                        cum += b[idx] * b[idx];
                    }
                    if cum >= thr {
                        onset = idx;
                        break 'scan;
                    }
                }
                for (j, b) in mf.iter().enumerate() {
                    if j != i {
                        abs_onset += b[onset] * b[onset];
                    }
                }
            }
            println!(
                "sv2={sv2:.0e} T_sym={t_sym:4}: A(peak)={abs_peak:.4e}  rel=A/auto={:.4e}  B(onset)={abs_onset:.4e}",
                abs_peak / auto_sq
            );
        }
    }
}
